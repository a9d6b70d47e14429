//! Shooting eigen-solver for piecewise potentials on `(-1, 1)`.
//!
//! Each side is integrated with fixed-step RK4 from just inside its wall to
//! the origin, starting on the regular solution `w^p`. Eigenvalues are the
//! zeros of the Wronskian of the two one-sided solutions at `x = 0`. Only the
//! potential and its endpoint exponent are consulted, never a closed-form
//! eigenfunction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::C64;
use crate::susy::{Side, SidedPotential};

/// Below this wall distance a `p ≥ 2` mesh is graded, `step = h·w/GRADING_WIDTH`.
const GRADING_WIDTH: f64 = 1e-2;
const RENORMALIZE_ABOVE: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingConfig {
    /// RK4 step `h` away from the walls.
    pub step: f64,
    /// Starting distance `δ` from the wall.
    pub wall_offset: f64,
    /// Real-axis samples of the eigenvalue scan.
    pub scan_points: usize,
    /// Acceptance threshold on `|W| / scale` after polishing.
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self { step: 2e-4, wall_offset: 1e-6, scan_points: 400, newton_tol: 1e-10, max_newton: 60 }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step < 1e-2) {
            return Err(Error::InvalidConfig(format!("step must lie in (0, 1e-2), got {}", self.step)));
        }
        if !(self.wall_offset > 0.0 && self.wall_offset < 1e-3) {
            return Err(Error::InvalidConfig(format!("wall offset must lie in (0, 1e-3), got {}", self.wall_offset)));
        }
        if self.scan_points < 2 {
            return Err(Error::InvalidConfig("need at least 2 scan points".into()));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidConfig("Newton tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// `ψ(0)` and `ψ'(0)` of one side, both times `exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideSolution {
    pub value: C64,
    pub slope: C64,
    pub log_scale: f64,
}

/// Wronskian `ψ_L(0) ψ_R'(0) - ψ_L'(0) ψ_R(0)` at trial energy `energy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchValue {
    pub energy: C64,
    pub wronskian: C64,
    /// `√q |(ψ_L, ψ_L'/√q)| |(ψ_R, ψ_R'/√q)|` with `q = max(1, |E|)`, which
    /// bounds `|W|` and does not vanish at a node or extremum of `ψ`.
    pub scale: f64,
}

impl MismatchValue {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.wronskian.norm() / self.scale
        }
    }
}

#[derive(Debug, Clone)]
struct SideTable {
    /// Mesh nodes in wall distance, from `δ` to 1.
    nodes: Vec<f64>,
    /// Potential at the nodes.
    at_nodes: Vec<C64>,
    /// Potential at the midpoints.
    at_mids: Vec<C64>,
}

impl SideTable {
    fn new<V: SidedPotential + ?Sized>(v: &V, side: Side, p: u32, cfg: &ShootingConfig) -> Result<Self> {
        let mut nodes = vec![cfg.wall_offset];
        let mut w = cfg.wall_offset;
        while w < 1.0 {
            let mut step = if p >= 2 { cfg.step * (w / GRADING_WIDTH).min(1.0) } else { cfg.step };
            // don't leave a sliver before the origin
            if w + 1.5 * step >= 1.0 {
                step = 1.0 - w;
            }
            w += step;
            nodes.push(w.min(1.0));
        }
        *nodes.last_mut().expect("mesh has nodes") = 1.0;
        let eval = |w: f64| -> Result<C64> {
            let value = v.at_wall_distance(side, w);
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::InvalidConfig(format!("potential is not finite at wall distance {w} ({side:?})")))
            }
        };
        let at_nodes = nodes.iter().map(|&w| eval(w)).collect::<Result<Vec<_>>>()?;
        let at_mids = nodes.windows(2).map(|n| eval(0.5 * (n[0] + n[1]))).collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes, at_nodes, at_mids })
    }

    /// `(f, df/dw)` at `w = 1`.
    fn integrate(&self, energy: C64, p: u32) -> (C64, C64, f64) {
        let delta = self.nodes[0];
        let pf = f64::from(p);
        let mut f = C64::new(delta.powi(p as i32), 0.0);
        let mut df = C64::new(pf * delta.powi(p as i32 - 1), 0.0);
        let mut log_scale = 0.0;
        for i in 0..self.nodes.len() - 1 {
            let h = self.nodes[i + 1] - self.nodes[i];
            let q0 = self.at_nodes[i] - energy;
            let qm = self.at_mids[i] - energy;
            let q1 = self.at_nodes[i + 1] - energy;
            let (k1f, k1d) = (df, q0 * f);
            let (f2, d2) = (f + 0.5 * h * k1f, df + 0.5 * h * k1d);
            let (k2f, k2d) = (d2, qm * f2);
            let (f3, d3) = (f + 0.5 * h * k2f, df + 0.5 * h * k2d);
            let (k3f, k3d) = (d3, qm * f3);
            let (f4, d4) = (f + h * k3f, df + h * k3d);
            let (k4f, k4d) = (d4, q1 * f4);
            f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
            df += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            let size = f.norm() + df.norm();
            if size > RENORMALIZE_ABOVE {
                f /= size;
                df /= size;
                log_scale += size.ln();
            }
        }
        (f, df, log_scale)
    }
}

/// Potential sampled on both integration meshes; reusable across energies.
#[derive(Debug, Clone)]
pub struct ShootingTable {
    right: SideTable,
    left: SideTable,
    exponent: u32,
    cfg: ShootingConfig,
}

impl ShootingTable {
    pub fn new<V: SidedPotential + ?Sized>(v: &V, cfg: &ShootingConfig) -> Result<Self> {
        cfg.validate()?;
        let p = v.endpoint_exponent();
        if p == 0 {
            return Err(Error::InvalidConfig("endpoint exponent must be at least 1".into()));
        }
        Ok(Self {
            right: SideTable::new(v, Side::Right, p, cfg)?,
            left: SideTable::new(v, Side::Left, p, cfg)?,
            exponent: p,
            cfg: *cfg,
        })
    }

    pub fn config(&self) -> &ShootingConfig {
        &self.cfg
    }

    pub fn integrate(&self, side: Side, energy: C64) -> SideSolution {
        let (table, sign) = match side {
            Side::Right => (&self.right, -1.0),
            Side::Left => (&self.left, 1.0),
        };
        let (f, df, log_scale) = table.integrate(energy, self.exponent);
        SideSolution { value: f, slope: sign * df, log_scale }
    }

    pub fn mismatch(&self, energy: C64) -> MismatchValue {
        let r = self.integrate(Side::Right, energy);
        let l = self.integrate(Side::Left, energy);
        let q = energy.norm().max(1.0);
        let sq = q.sqrt();
        let size = |s: &SideSolution| s.value.norm().hypot(s.slope.norm() / sq);
        MismatchValue {
            energy,
            wronskian: l.value * r.slope - l.slope * r.value,
            scale: sq * size(&l) * size(&r),
        }
    }

    /// Complex Newton on the Wronskian with a central-difference derivative
    /// and step halving.
    pub fn polish(&self, start: C64) -> Result<MismatchValue> {
        let mut e = start;
        let mut m = self.mismatch(e);
        for _ in 0..self.cfg.max_newton {
            if !m.wronskian.is_finite() {
                break;
            }
            let d = 1e-6 * e.norm().max(1.0);
            let dm = (self.mismatch(e + d).wronskian - self.mismatch(e - d).wronskian) / (2.0 * d);
            if dm.norm() == 0.0 || !dm.is_finite() {
                break;
            }
            let delta = m.wronskian / dm;
            let mut lambda = 1.0;
            let mut next = self.mismatch(e - delta);
            while next.wronskian.norm() > m.wronskian.norm() && lambda > 1e-4 {
                lambda *= 0.5;
                next = self.mismatch(e - lambda * delta);
            }
            let moved = (lambda * delta).norm();
            if next.wronskian.norm() <= m.wronskian.norm() {
                e = next.energy;
                m = next;
            }
            if moved <= 1e-13 * e.norm().max(1.0) {
                break;
            }
        }
        if m.relative() < self.cfg.newton_tol {
            Ok(m)
        } else {
            Err(Error::Convergence(format!(
                "shooting from {start} stopped at {} with |W|/scale = {:.3e}",
                m.energy,
                m.relative()
            )))
        }
    }
}

/// `(ψ(0), ψ'(0))` of the regular solution on `side`.
pub fn integrate_side<V: SidedPotential + ?Sized>(
    v: &V,
    energy: C64,
    side: Side,
    cfg: &ShootingConfig,
) -> Result<SideSolution> {
    Ok(ShootingTable::new(v, cfg)?.integrate(side, energy))
}

pub fn mismatch<V: SidedPotential + ?Sized>(v: &V, energy: C64, cfg: &ShootingConfig) -> Result<MismatchValue> {
    Ok(ShootingTable::new(v, cfg)?.mismatch(energy))
}

/// Rectangle of the complex energy plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchBox {
    pub fn real(re_min: f64, re_max: f64) -> Self {
        Self { re_min, re_max, im_min: -1e-6, im_max: 1e-6 }
    }

    pub fn contains(&self, e: C64) -> bool {
        e.re >= self.re_min && e.re <= self.re_max && e.im >= self.im_min && e.im <= self.im_max
    }
}

/// Relative perturbation applied to every seed before polishing, so that a
/// seed sitting exactly on a closed-form value is not trusted as is.
pub const SEED_PERTURBATION: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericSpectrum {
    /// Converged eigenvalues, ordered by real part.
    pub eigenvalues: Vec<MismatchValue>,
    /// Seeds or brackets that did not converge.
    pub failures: Vec<String>,
}

impl NumericSpectrum {
    pub fn energies(&self) -> Vec<C64> {
        self.eigenvalues.iter().map(|m| m.energy).collect()
    }
}

/// Up to `count` eigenvalues inside `search`: sign changes of the Wronskian
/// along the real axis plus Newton from each of `seeds` (perturbed by
/// [`SEED_PERTURBATION`]).
pub fn find_spectrum_numeric<V: SidedPotential + ?Sized>(
    v: &V,
    count: usize,
    search: &SearchBox,
    seeds: &[C64],
    cfg: &ShootingConfig,
) -> Result<NumericSpectrum> {
    let table = ShootingTable::new(v, cfg)?;
    let mut found: Vec<MismatchValue> = Vec::new();
    let mut failures = Vec::new();

    let n = cfg.scan_points;
    let scan: Vec<MismatchValue> = (0..n)
        .map(|i| {
            let e = search.re_min + (search.re_max - search.re_min) * i as f64 / (n - 1) as f64;
            table.mismatch(C64::new(e, 0.0))
        })
        .collect();
    let mut starts = Vec::new();
    for pair in scan.windows(2) {
        let (a, b) = (pair[0].wronskian, pair[1].wronskian);
        if (a * b.conj()).re < 0.0 {
            // linear interpolation of the projected Wronskian
            let u = a.norm() / (a.norm() + b.norm());
            starts.push(pair[0].energy + u * (pair[1].energy - pair[0].energy));
        }
    }
    starts.extend(seeds.iter().map(|s| s * SEED_PERTURBATION));

    for start in starts {
        match table.polish(start) {
            Ok(m) if search.contains(m.energy) => {
                let duplicate = found
                    .iter()
                    .any(|f| (f.energy - m.energy).norm() <= 1e-6 * m.energy.norm().max(1.0));
                if !duplicate {
                    found.push(m);
                }
            }
            Ok(m) => failures.push(format!("start {start} converged outside the search box to {}", m.energy)),
            Err(err) => failures.push(err.to_string()),
        }
    }
    found.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re).then(a.energy.im.total_cmp(&b.energy.im)));
    if found.len() < count {
        failures.push(format!("found {} of {count} eigenvalues", found.len()));
    }
    found.truncate(count);
    Ok(NumericSpectrum { eigenvalues: found, failures })
}
