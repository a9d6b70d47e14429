//! Eigenvalues of the PT-symmetric square well `V = -iZ` on `(0, 1)`,
//! `V = +iZ` on `(-1, 0)` with Dirichlet walls at `±1`.
//!
//! A real energy `E` maps to the wavenumber `κ = s - i t` with `κ² = -E - iZ`.
//! Continuity of `ψ` and `ψ'` at the origin reduces to the real equation
//! `G(t, Z) = s sinh 2s + t sin 2t = 0` with `s = Z / 2t`. Its roots come in
//! pairs inside the bands `t ∈ ((2ν+1)π/2, (ν+1)π)`; a pair merges at the
//! critical coupling of band `ν` and continues as a complex-conjugate pair.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{self, coth, fd_jacobian, newton_2d, C64};

/// Sample intervals per band for the sign scan.
pub const BAND_SAMPLES: usize = 512;

const BISECTION_WIDTH: f64 = 1e-8;
const NEWTON_TOL: f64 = 1e-12;
const MAX_ITER: usize = 100;
/// Coupling step of the complex-pair continuation.
pub const CONTINUATION_STEP: f64 = 0.05;

/// Non-negative coupling strength `Z` (units `ħ = 2m = 1`, half-width 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct CouplingStrength(f64);

impl CouplingStrength {
    pub fn new(z: f64) -> Result<Self> {
        if z.is_finite() && z >= 0.0 {
            Ok(Self(z))
        } else {
            Err(Error::Domain(format!("coupling must be finite and >= 0, got {z}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Real and imaginary magnitudes of `κ = s - i t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumPair {
    pub s: f64,
    pub t: f64,
}

impl MomentumPair {
    pub fn wave_number(self) -> WaveNumber {
        WaveNumber(C64::new(self.s, -self.t))
    }

    pub fn energy(self) -> f64 {
        (self.t - self.s) * (self.t + self.s)
    }
}

/// Complex wavenumber of one side of the well (`ρ` on the right, `σ` on the left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveNumber(pub C64);

impl WaveNumber {
    pub fn value(self) -> C64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Real,
    /// `E = e - iε` with `ε > 0`.
    ComplexPairLower,
    /// The conjugate partner `E = e + iε`.
    ComplexPairUpper,
}

impl Branch {
    pub fn is_real(self) -> bool {
        self == Branch::Real
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Real => "real",
            Branch::ComplexPairLower => "complex_lower",
            Branch::ComplexPairUpper => "complex_upper",
        }
    }
}

/// One eigenvalue of the square well together with its one-sided wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralLevel {
    pub index: usize,
    /// Band `ν` the level comes from; a band holds two levels.
    pub band: usize,
    pub energy: C64,
    /// `ρ`, with `ρ² = -E - iZ`.
    pub kappa_right: WaveNumber,
    /// `σ`, with `σ² = -E + iZ`.
    pub kappa_left: WaveNumber,
    pub branch: Branch,
    /// `(s, t)` for real levels.
    pub momentum: Option<MomentumPair>,
}

impl SpectralLevel {
    /// Real level from its `t` root at coupling `z`.
    pub fn real(index: usize, band: usize, z: f64, t: f64) -> Self {
        let momentum = MomentumPair { s: z / (2.0 * t), t };
        let rho = momentum.wave_number().0;
        Self {
            index,
            band,
            energy: C64::new(momentum.energy(), 0.0),
            kappa_right: WaveNumber(rho),
            kappa_left: WaveNumber(rho.conj()),
            branch: Branch::Real,
            momentum: Some(momentum),
        }
    }

    /// Level with an arbitrary (complex) energy. `ρ = √(-E - iZ)` and
    /// `σ = conj √(-E* - iZ)`, both principal roots, so `Re ρ ≥ 0`.
    pub fn from_energy(index: usize, band: usize, z: f64, energy: C64, branch: Branch) -> Self {
        let iz = C64::new(0.0, z);
        let rho = (-energy - iz).sqrt();
        let sigma = (-energy.conj() - iz).sqrt().conj();
        Self {
            index,
            band,
            energy,
            kappa_right: WaveNumber(rho),
            kappa_left: WaveNumber(sigma),
            branch,
            momentum: None,
        }
    }

    pub fn rho(&self) -> C64 {
        self.kappa_right.0
    }

    pub fn sigma(&self) -> C64 {
        self.kappa_left.0
    }

    /// `ρ coth ρ + σ coth σ`; vanishes at an eigenvalue.
    pub fn matching_residual(&self) -> C64 {
        matching_condition(self.rho(), self.sigma())
    }

    /// Point `(T, S)` on the intersection of the X and Y curves (real levels only).
    pub fn curve_point(&self) -> Option<CurvePoint> {
        self.momentum.map(CurvePoint::from_momentum)
    }
}

/// Ordered eigenvalues at one coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub coupling: CouplingStrength,
    pub levels: Vec<SpectralLevel>,
    /// Index pairs `(lower, upper)` of complex-conjugate levels.
    pub broken_pairs: Vec<(usize, usize)>,
}

impl Spectrum {
    pub fn z(&self) -> f64 {
        self.coupling.value()
    }

    pub fn energies(&self) -> Vec<C64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    /// Rebuild `index` fields and the pair list after levels were removed.
    pub(crate) fn reindexed(coupling: CouplingStrength, mut levels: Vec<SpectralLevel>) -> Self {
        for (i, level) in levels.iter_mut().enumerate() {
            level.index = i;
        }
        let broken_pairs = levels
            .windows(2)
            .enumerate()
            .filter(|(_, w)| {
                w[0].branch == Branch::ComplexPairLower
                    && w[1].branch == Branch::ComplexPairUpper
                    && w[0].band == w[1].band
            })
            .map(|(i, _)| (i, i + 1))
            .collect();
        Self { coupling, levels, broken_pairs }
    }
}

/// Coupling at which the real pair of band `nu` merges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalCoupling {
    pub nu: usize,
    pub z_crit: f64,
    pub t_merge: f64,
    pub e_merge: f64,
    /// `G` at the merge point.
    pub residual: f64,
    /// `∂G/∂t` at the merge point.
    pub residual_dt: f64,
}

/// A point of the `T`-`S` plane, `t = πT/2`, `sinh² S = s sinh(2s) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t_scaled: f64,
    pub s_scaled: f64,
}

impl CurvePoint {
    pub fn from_momentum(m: MomentumPair) -> Self {
        let sinh2 = 0.5 * m.s * (2.0 * m.s).sinh();
        Self {
            t_scaled: 2.0 * m.t / PI,
            s_scaled: sinh2.sqrt().asinh(),
        }
    }
}

/// `(s, t)` and `κ = s - i t` from `κ² = -E - iZ`, both `s, t ≥ 0`.
pub fn kappa_from_energy(e: f64, z: f64) -> Result<(MomentumPair, WaveNumber)> {
    CouplingStrength::new(z)?;
    if !e.is_finite() {
        return Err(Error::Domain(format!("energy must be finite, got {e}")));
    }
    let t = if z == 0.0 {
        if e <= 0.0 {
            return Err(Error::Domain(format!("E = {e} <= 0 at Z = 0 has no positive t")));
        }
        e.sqrt()
    } else {
        let r = e.hypot(z);
        // avoid cancellation in E + r when E < 0
        let t2 = if e >= 0.0 { 0.5 * (e + r) } else { 0.5 * z * z / (r - e) };
        t2.sqrt()
    };
    let pair = MomentumPair { s: z / (2.0 * t), t };
    Ok((pair, pair.wave_number()))
}

/// `G(t, Z) = s sinh 2s + t sin 2t` with `s = Z / 2t`.
pub fn matching_residual(t: f64, z: f64) -> f64 {
    let s = z / (2.0 * t);
    s * (2.0 * s).sinh() + t * (2.0 * t).sin()
}

/// `∂G/∂t`.
pub fn matching_residual_dt(t: f64, z: f64) -> f64 {
    residual_parts(t, z).g_t
}

/// `ρ coth ρ + σ coth σ`, the complex matching condition.
pub fn matching_condition(rho: C64, sigma: C64) -> C64 {
    rho * coth(rho) + sigma * coth(sigma)
}

struct ResidualParts {
    g: f64,
    g_t: f64,
    g_tt: f64,
    g_z: f64,
    g_tz: f64,
}

fn residual_parts(t: f64, z: f64) -> ResidualParts {
    let s = z / (2.0 * t);
    let (sh, ch) = ((2.0 * s).sinh(), (2.0 * s).cosh());
    let (sn, cs) = (2.0 * t).sin_cos();
    // f(s) = s sinh 2s, h(t) = t sin 2t
    let f = s * sh;
    let f1 = sh + 2.0 * s * ch;
    let f2 = 4.0 * ch + 4.0 * s * sh;
    let h = t * sn;
    let h1 = sn + 2.0 * t * cs;
    let h2 = 4.0 * cs - 4.0 * t * sn;
    let s_t = -s / t;
    let s_z = 0.5 / t;
    let s_tt = 2.0 * s / (t * t);
    let s_tz = -0.5 / (t * t);
    ResidualParts {
        g: f + h,
        g_t: f1 * s_t + h1,
        g_tt: f2 * s_t * s_t + f1 * s_tt + h2,
        g_z: f1 * s_z,
        g_tz: f2 * s_z * s_t + f1 * s_tz,
    }
}

/// Closed interval `[(2ν+1)π/2, (ν+1)π]` of band `ν`, where `sin 2t ≤ 0`.
pub fn band_interval(band: usize) -> (f64, f64) {
    let b = band as f64;
    ((2.0 * b + 1.0) * FRAC_PI_2, (b + 1.0) * PI)
}

fn band_samples(z: f64, band: usize) -> Vec<(f64, f64)> {
    let (a, b) = band_interval(band);
    (0..=BAND_SAMPLES)
        .map(|i| {
            let t = if i == BAND_SAMPLES { b } else { a + (b - a) * i as f64 / BAND_SAMPLES as f64 };
            (t, matching_residual(t, z))
        })
        .collect()
}

/// Number of sign changes of `G(·, Z)` on the uniform band sampling.
pub fn band_sign_changes(z: f64, band: usize) -> usize {
    band_samples(z, band)
        .windows(2)
        .filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0))
        .count()
}

/// Minimum of `G` on a band: sampled, then polished by safeguarded Newton
/// on `∂G/∂t = 0`.
fn band_minimum(z: f64, band: usize) -> (f64, f64) {
    let samples = band_samples(z, band);
    let (imin, _) = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("band sampling is non-empty");
    let lo = samples[imin.saturating_sub(1)].0;
    let hi = samples[(imin + 1).min(BAND_SAMPLES)].0;
    let mut t = samples[imin].0;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..MAX_ITER {
        let p = residual_parts(t, z);
        if p.g_t > 0.0 {
            b = t;
        } else {
            a = t;
        }
        let mut next = if p.g_tt > 0.0 { t - p.g_t / p.g_tt } else { f64::NAN };
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - t).abs() <= 4.0 * f64::EPSILON * t {
            t = next;
            break;
        }
        t = next;
    }
    // the sampled minimum may beat the polish at a band edge
    let g = matching_residual(t, z);
    if g <= samples[imin].1 {
        (t, g)
    } else {
        samples[imin]
    }
}

/// Root of `G` in `[a, b]` given `G(a)` and `G(b)` of opposite sign (or zero).
fn refine_root(z: f64, mut a: f64, mut b: f64, band: usize) -> Result<f64> {
    let mut ga = matching_residual(a, z);
    let gb = matching_residual(b, z);
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if (ga > 0.0) == (gb > 0.0) {
        return Err(Error::BandConvergence { band, reason: format!("no sign change on [{a}, {b}]") });
    }
    while b - a > BISECTION_WIDTH {
        let m = 0.5 * (a + b);
        let gm = matching_residual(m, z);
        if gm == 0.0 {
            return Ok(m);
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    let mut t = 0.5 * (a + b);
    for _ in 0..MAX_ITER {
        let p = residual_parts(t, z);
        if p.g == 0.0 {
            return Ok(t);
        }
        if (p.g > 0.0) == (ga > 0.0) {
            a = t;
        } else {
            b = t;
        }
        let mut next = t - p.g / p.g_t;
        if !(next >= a && next <= b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        if (next - t).abs() <= 2.0 * f64::EPSILON * t {
            // converged to machine precision; keep the better of the two
            let gn = matching_residual(next, z).abs();
            return Ok(if gn < p.g.abs() { next } else { t });
        }
        t = next;
    }
    let g = matching_residual(t, z);
    if g.abs() < NEWTON_TOL * t.max(1.0) {
        Ok(t)
    } else {
        Err(Error::BandConvergence { band, reason: format!("Newton stalled at t = {t}, G = {g:e}") })
    }
}

/// The two real roots `t` of band `ν`, or `None` if the pair has gone complex.
pub fn band_roots(z: f64, band: usize) -> Result<Option<(f64, f64)>> {
    CouplingStrength::new(z)?;
    let (a, b) = band_interval(band);
    if z == 0.0 {
        return Ok(Some((a, b)));
    }
    let (tmin, gmin) = band_minimum(z, band);
    if gmin > 0.0 {
        return Ok(None);
    }
    let lower = refine_root(z, a, tmin, band)?;
    let upper = refine_root(z, tmin, b, band)?;
    for &t in &[lower, upper] {
        verify_real_root(z, t, band)?;
    }
    Ok(Some((lower, upper)))
}

/// Cross-check a root of `G` against the complex form of the matching
/// condition, scaled by `|sinh κ|²` so that it stays finite as `Z -> 0`.
fn verify_real_root(z: f64, t: f64, band: usize) -> Result<()> {
    let m = MomentumPair { s: z / (2.0 * t), t };
    let kappa = m.wave_number().0;
    let scaled = matching_condition(kappa, kappa.conj()) * kappa.sinh().norm_sqr();
    if scaled.norm() <= 1e-10 * t.max(1.0) {
        Ok(())
    } else {
        Err(Error::BandConvergence {
            band,
            reason: format!("spurious root t = {t}: |κ coth κ + c.c.|·|sinh κ|² = {:e}", scaled.norm()),
        })
    }
}

/// Up to `count` real eigenvalues, skipping bands whose pair is complex.
pub fn solve_real_spectrum(z: f64, count: usize) -> Result<Vec<SpectralLevel>> {
    CouplingStrength::new(z)?;
    let mut levels = Vec::with_capacity(count);
    let max_band = count + 10_000;
    let mut band = 0;
    while levels.len() < count {
        if band > max_band {
            return Err(Error::BandConvergence { band, reason: "ran out of bands".into() });
        }
        if let Some((t0, t1)) = band_roots(z, band)? {
            for t in [t0, t1] {
                if levels.len() < count {
                    levels.push(SpectralLevel::real(levels.len(), band, z, t));
                }
            }
        }
        band += 1;
    }
    Ok(levels)
}

fn has_two_sign_changes(z: f64, band: usize) -> bool {
    band_sign_changes(z, band) >= 2
}

/// Critical coupling of band `nu`: Z-bisection on the two-sign-change
/// predicate to width `1e-3`, then 2-D Newton on `G = ∂G/∂t = 0`.
pub fn find_critical_coupling(nu: usize) -> Result<CriticalCoupling> {
    let mut z_lo = 0.5;
    if !has_two_sign_changes(z_lo, nu) {
        return Err(Error::Convergence(format!("band {nu} has no real pair at Z = {z_lo}")));
    }
    let mut z_hi = 1.0;
    let mut doublings = 0;
    while has_two_sign_changes(z_hi, nu) {
        z_lo = z_hi;
        z_hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Convergence(format!("no upper bracket for band {nu}")));
        }
    }
    while z_hi - z_lo > 1e-3 {
        let mid = 0.5 * (z_lo + z_hi);
        if has_two_sign_changes(mid, nu) {
            z_lo = mid;
        } else {
            z_hi = mid;
        }
    }
    let (t_seed, _) = band_minimum(z_lo, nu);
    let outcome = newton_2d(
        |x| {
            let p = residual_parts(x[0], x[1]);
            ([p.g, p.g_t], [[p.g_t, p.g_z], [p.g_tt, p.g_tz]])
        },
        [t_seed, z_lo],
        1e-13,
        MAX_ITER,
    );
    // a stalled iterate is still usable if it meets the tolerances below
    let [t, z] = match outcome {
        Ok(o) => o.x,
        Err(_) => polish_tangency([t_seed, z_lo]),
    };
    let p = residual_parts(t, z);
    if p.g.abs() >= 1e-10 || p.g_t.abs() >= 1e-8 {
        return Err(Error::Convergence(format!(
            "critical coupling of band {nu}: |G| = {:e}, |G_t| = {:e}",
            p.g.abs(),
            p.g_t.abs()
        )));
    }
    let s = z / (2.0 * t);
    Ok(CriticalCoupling {
        nu,
        z_crit: z,
        t_merge: t,
        e_merge: (t - s) * (t + s),
        residual: p.g,
        residual_dt: p.g_t,
    })
}

fn polish_tangency(mut x: [f64; 2]) -> [f64; 2] {
    let mut best = x;
    let mut best_norm = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let p = residual_parts(x[0], x[1]);
        let norm = p.g.hypot(p.g_t);
        if norm < best_norm {
            best = x;
            best_norm = norm;
        }
        let det = p.g_t * p.g_tz - p.g_z * p.g_tt;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        x = [
            x[0] - (p.g_tz * p.g - p.g_z * p.g_t) / det,
            x[1] - (p.g_t * p.g_t - p.g_tt * p.g) / det,
        ];
    }
    best
}

fn pair_residual(z: f64, x: [f64; 2]) -> [f64; 2] {
    let energy = C64::new(x[0], -x[1]);
    let iz = C64::new(0.0, z);
    let r = matching_condition((-energy - iz).sqrt(), (-energy + iz).sqrt());
    [r.re, r.im]
}

fn polish_pair(z: f64, seed: [f64; 2]) -> std::result::Result<[f64; 2], String> {
    let out = newton_2d(
        |x| {
            let mut f = |y: [f64; 2]| pair_residual(z, y);
            let r = f(x);
            (r, fd_jacobian(&mut f, x, r))
        },
        seed,
        1e-12,
        MAX_ITER,
    )?;
    Ok([out.x[0], out.x[1].abs()])
}

/// Complex-conjugate pair `E = e ∓ iε` of band `nu` at coupling `z > Z_ν^(crit)`.
///
/// Without a seed the pair is followed from `(e_merge, 10⁻³)` just above the
/// critical coupling in steps of [`CONTINUATION_STEP`].
pub fn solve_complex_pair(z: f64, nu: usize, seed: Option<(f64, f64)>) -> Result<(SpectralLevel, SpectralLevel)> {
    CouplingStrength::new(z)?;
    let crit = find_critical_coupling(nu)?;
    if z <= crit.z_crit {
        return Err(Error::BelowCritical { nu, coupling: z, critical: crit.z_crit });
    }
    let x = match seed {
        Some((e, eps)) => polish_pair(z, [e, eps]).map_err(Error::Convergence)?,
        None => {
            let mut x = [crit.e_merge, 1e-3];
            let mut zk = crit.z_crit;
            loop {
                zk = (zk + CONTINUATION_STEP).min(z);
                x = polish_pair(zk, x)
                    .map_err(|m| Error::Convergence(format!("continuation of pair {nu} failed at Z = {zk}: {m}")))?;
                if zk >= z {
                    break;
                }
            }
            x
        }
    };
    let residual = numeric::norm2(pair_residual(z, x));
    if !(x[1] > 0.0) || residual >= 1e-10 {
        return Err(Error::Convergence(format!(
            "pair {nu} at Z = {z}: ε = {}, residual = {residual:e}",
            x[1]
        )));
    }
    let lower = C64::new(x[0], -x[1]);
    Ok((
        SpectralLevel::from_energy(2 * nu, nu, z, lower, Branch::ComplexPairLower),
        SpectralLevel::from_energy(2 * nu + 1, nu, z, lower.conj(), Branch::ComplexPairUpper),
    ))
}

/// The first `count` levels at coupling `z`, real and complex, in band order.
pub fn classify_spectrum(z: f64, count: usize) -> Result<Spectrum> {
    let coupling = CouplingStrength::new(z)?;
    let mut levels = Vec::with_capacity(count + 1);
    let mut band = 0;
    while levels.len() < count {
        match band_roots(z, band)? {
            Some((t0, t1)) => {
                levels.push(SpectralLevel::real(0, band, z, t0));
                levels.push(SpectralLevel::real(0, band, z, t1));
            }
            None => {
                let (lower, upper) = solve_complex_pair(z, band, None)?;
                levels.push(lower);
                levels.push(upper);
            }
        }
        band += 1;
    }
    levels.truncate(count);
    Ok(Spectrum::reindexed(coupling, levels))
}

/// X-curve `S = arcsinh(½ √(-πT sin πT))` on the bands `2m-1 ≤ T ≤ 2m`.
pub fn curve_x(t_scaled: f64) -> Result<f64> {
    let m = (t_scaled / 2.0).ceil();
    if !(t_scaled.is_finite() && m >= 1.0 && t_scaled >= 2.0 * m - 1.0) {
        return Err(Error::Domain(format!("T = {t_scaled} lies outside the bands 2m-1 <= T <= 2m")));
    }
    let arg = (-PI * t_scaled * (PI * t_scaled).sin()).max(0.0);
    Ok((0.5 * arg.sqrt()).asinh())
}

/// Y-curve `S = arcsinh √((Z / 2πT) sinh(2Z / πT))`.
pub fn curve_y(z: f64, t_scaled: f64) -> Result<f64> {
    CouplingStrength::new(z)?;
    if !(t_scaled > 0.0 && t_scaled.is_finite()) {
        return Err(Error::Domain(format!("T must be positive, got {t_scaled}")));
    }
    let arg = z / (2.0 * PI * t_scaled) * (2.0 * z / (PI * t_scaled)).sinh();
    Ok(arg.sqrt().asinh())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_trivial_cases() {
        let (m, k) = kappa_from_energy(PI * PI / 4.0, 0.0).unwrap();
        assert_eq!(m.s, 0.0);
        assert!((m.t - FRAC_PI_2).abs() < 1e-15);
        assert!((k.0 - C64::new(0.0, -FRAC_PI_2)).norm() < 1e-15);

        let (m, k) = kappa_from_energy(0.0, 2.0).unwrap();
        assert!((m.s - 1.0).abs() < 1e-15 && (m.t - 1.0).abs() < 1e-15);
        assert!((k.0 - C64::new(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn kappa_e5_z3_matches_extended_precision() {
        // mpmath, 40 digits
        let (m, _) = kappa_from_energy(5.0, 3.0).unwrap();
        assert!((m.s - 0.644_574_237_324_646_91).abs() < 1e-15);
        assert!((m.t - 2.327_117_519_039_949_6).abs() < 1e-15);
        assert!((2.0 * m.s * m.t - 3.0).abs() < 1e-12 * 3.0);
        assert!((m.t * m.t - m.s * m.s - 5.0).abs() < 1e-12 * 5.0);
    }

    #[test]
    fn kappa_domain_error() {
        assert!(matches!(kappa_from_energy(0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(kappa_from_energy(-1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(kappa_from_energy(1.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn kappa_negative_energy_is_stable() {
        let (m, k) = kappa_from_energy(-1e8, 1e-3).unwrap();
        assert!(m.t > 0.0 && m.s > 0.0);
        let lhs = k.0 * k.0;
        let rhs = C64::new(1e8, -1e-3);
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
        assert!((lhs.im - rhs.im).abs() <= 1e-12 * 1e-3);
    }

    #[test]
    fn residual_examples() {
        assert!(matching_residual(FRAC_PI_2, 0.0).abs() < 1e-15);
        assert!(matching_residual(PI, 0.0).abs() < 1e-15);
        // 0.25 sinh 0.5 + 2 sin 4, mpmath
        assert!((matching_residual(2.0, 1.0) + 1.383_331_164_242_419_7).abs() < 1e-14);
    }

    #[test]
    fn residual_derivative_matches_difference_quotient() {
        for &(t, z) in &[(2.0, 1.0), (5.1, 7.0), (1.7, 4.4)] {
            let h = 1e-6;
            let fd = (matching_residual(t + h, z) - matching_residual(t - h, z)) / (2.0 * h);
            assert!((matching_residual_dt(t, z) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn curve_examples() {
        assert_eq!(curve_x(1.0).unwrap(), 0.0);
        assert!((curve_x(1.5).unwrap() - 0.940_491_396_387_554_14).abs() < 1e-14);
        assert!(curve_x(2.0).unwrap().abs() < 1e-7);
        assert!(curve_x(0.5).is_err());
        assert!(curve_x(2.5).is_err());
        assert_eq!(curve_y(0.0, 3.0).unwrap(), 0.0);
        assert!((curve_y(PI, 2.0).unwrap() - 0.518_488_336_949_126_82).abs() < 1e-14);
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let y = curve_y(2.0, 10f64.powf(k as f64 / 4.0)).unwrap();
            assert!(y < prev);
            prev = y;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn z0_spectrum_is_free_particle_in_box() {
        let levels = solve_real_spectrum(0.0, 4).unwrap();
        for (n, level) in levels.iter().enumerate() {
            let exact = ((n + 1) as f64).powi(2) * PI * PI / 4.0;
            assert!((level.energy.re - exact).abs() < 1e-12);
            assert_eq!(level.energy.im, 0.0);
        }
    }

    #[test]
    fn z1_first_band_has_two_roots() {
        let levels = solve_real_spectrum(1.0, 2).unwrap();
        let (a, b) = band_interval(0);
        for level in &levels {
            let t = level.momentum.unwrap().t;
            assert!(t > a && t < b);
            assert!(matching_residual(t, 1.0).abs() < 1e-12);
        }
        assert!(levels[0].energy.re < levels[1].energy.re);
        // mpmath roots
        assert!((levels[0].energy.re - 2.569_959_033_123_294_1).abs() < 1e-11);
        assert!((levels[1].energy.re - 9.792_272_387_210_851_9).abs() < 1e-11);
    }

    #[test]
    fn above_first_critical_the_first_band_is_empty() {
        assert_eq!(band_sign_changes(4.6, 0), 0);
        let levels = solve_real_spectrum(4.6, 2).unwrap();
        let (a, b) = band_interval(1);
        for level in &levels {
            let t = level.momentum.unwrap().t;
            assert!(t > a && t < b);
            assert_eq!(level.band, 1);
        }
    }

    #[test]
    fn critical_couplings() {
        let c0 = find_critical_coupling(0).unwrap();
        assert!((4.47..=4.49).contains(&c0.z_crit), "{c0:?}");
        let c1 = find_critical_coupling(1).unwrap();
        assert!((12.79..=12.81).contains(&c1.z_crit), "{c1:?}");
        for c in [c0, c1] {
            assert!(matching_residual(c.t_merge, c.z_crit).abs() < 1e-10);
            assert!(matching_residual_dt(c.t_merge, c.z_crit).abs() < 1e-8);
        }
        // mpmath tangency solution
        assert!((c0.z_crit - 4.475_308_602_193_255_2).abs() < 1e-9);
        assert!((c1.z_crit - 12.801_544_262_555_983).abs() < 1e-9);
    }

    #[test]
    fn complex_pair_at_z8() {
        let (lo, hi) = solve_complex_pair(8.0, 0, None).unwrap();
        assert!(lo.energy.im < 0.0);
        assert_eq!(hi.energy, lo.energy.conj());
        assert!(lo.matching_residual().norm() < 1e-10);
        assert!(hi.matching_residual().norm() < 1e-10);
        // mpmath continuation
        assert!((lo.energy - C64::new(6.791_734_691_575_69, -5.770_054_142_209_851_7)).norm() < 1e-9);
    }

    #[test]
    fn complex_pair_just_above_critical() {
        let (lo, _) = solve_complex_pair(4.6, 0, None).unwrap();
        let crit = find_critical_coupling(0).unwrap();
        assert!(lo.energy.im < 0.0 && -lo.energy.im < 1.0);
        assert!((lo.energy.re - crit.e_merge).abs() < 0.1);
        assert!((lo.energy - C64::new(6.413_930_583_128_759, -0.897_314_581_572_004_33)).norm() < 1e-9);
    }

    #[test]
    fn complex_pair_below_critical_is_rejected() {
        assert!(matches!(solve_complex_pair(3.0, 0, None), Err(Error::BelowCritical { .. })));
    }

    #[test]
    fn complex_pair_from_seed() {
        let (lo, _) = solve_complex_pair(8.0, 0, Some((6.5, 5.5))).unwrap();
        assert!((lo.energy - C64::new(6.791_734_691_575_69, -5.770_054_142_209_851_7)).norm() < 1e-9);
    }

    #[test]
    fn broken_pair_wavenumber_bookkeeping() {
        let (lo, hi) = solve_complex_pair(8.0, 0, None).unwrap();
        let iz = C64::new(0.0, 8.0);
        // ρ0 = κ0, ρ1 = λ0, σ0 = λ0*, σ1 = κ0*
        assert!((lo.rho() * lo.rho() - (-lo.energy - iz)).norm() < 1e-12);
        assert!((lo.sigma() * lo.sigma() - (-lo.energy + iz)).norm() < 1e-12);
        assert_eq!(hi.rho(), lo.sigma().conj());
        assert_eq!(hi.sigma(), lo.rho().conj());
        assert!(lo.rho().re > 0.0 && lo.rho().im < 0.0);
        assert!(hi.rho().re > 0.0);
    }

    #[test]
    fn classify_examples() {
        let sp = classify_spectrum(2.0, 6).unwrap();
        assert_eq!(sp.levels.len(), 6);
        assert!(sp.levels.iter().all(|l| l.branch == Branch::Real));
        assert!(sp.broken_pairs.is_empty());

        let sp = classify_spectrum(8.0, 6).unwrap();
        assert_eq!(sp.levels[0].branch, Branch::ComplexPairLower);
        assert_eq!(sp.levels[1].branch, Branch::ComplexPairUpper);
        assert!(sp.levels[2..].iter().all(|l| l.branch == Branch::Real));
        assert_eq!(sp.broken_pairs, vec![(0, 1)]);

        let sp = classify_spectrum(0.0, 3).unwrap();
        for (n, l) in sp.levels.iter().enumerate() {
            assert!((l.energy.re - ((n + 1) as f64).powi(2) * PI * PI / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_pairs_above_second_critical() {
        let sp = classify_spectrum(14.0, 6).unwrap();
        assert_eq!(sp.broken_pairs, vec![(0, 1), (2, 3)]);
        assert!(sp.levels[4].branch.is_real());
        for l in &sp.levels {
            assert!(l.matching_residual().norm() < 1e-9);
        }
    }
}
