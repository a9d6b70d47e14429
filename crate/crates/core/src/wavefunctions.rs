//! Closed-form eigenfunctions of the square well and of its SUSY partners,
//! PT diagnostics on grids, and the Gegenbauer shapes of the `Z -> 0` limit.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::darboux::LocalChain;
use crate::error::{Error, Result};
use crate::numeric::C64;
use crate::spectral::SpectralLevel;
use crate::susy::PiecewisePotential;

/// Below this ratio of `|ψ(0)|` to `|ψ'(0)|` the value at the origin is
/// treated as zero and the slope is normalized instead.
const VALUE_NORMALIZATION_FLOOR: f64 = 1e-8;

/// Values at the origin, `α = ψ(0)` and `β = ψ'(0)/i`. Both are real for a
/// level whose eigenfunction is PT-symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OriginData {
    pub alpha: C64,
    pub beta: C64,
}

/// Which origin value is fixed by the normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `ψ(0) = 1`.
    Value,
    /// `ψ'(0) = i`, used when `ψ(0) = 0` (odd levels at `Z = 0`).
    Slope,
}

/// Eigenfunction of a hierarchy member, one closed form per side.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseEigenfunction {
    level: SpectralLevel,
    right: LocalChain,
    left: LocalChain,
    c_right: C64,
    c_left: C64,
    normalization: Normalization,
    origin: OriginData,
}

impl PiecewiseEigenfunction {
    /// Square-well eigenfunction of `level` at coupling `z`.
    pub fn square_well(level: &SpectralLevel, z: f64) -> Self {
        let right = LocalChain::new(C64::new(0.0, -z), Vec::new());
        let left = LocalChain::new(C64::new(0.0, z), Vec::new());
        Self::from_chains(*level, right, left)
    }

    pub(crate) fn from_chains(level: SpectralLevel, right: LocalChain, left: LocalChain) -> Self {
        let (a_r, db_r) = right.eigen(level.rho(), 1.0);
        let (a_l, b_l) = left.eigen(level.sigma(), 1.0);
        let b_r = -db_r;
        let value_ok = a_r.norm() * level.rho().norm().max(1.0) >= VALUE_NORMALIZATION_FLOOR * b_r.norm()
            && a_l.norm() * level.sigma().norm().max(1.0) >= VALUE_NORMALIZATION_FLOOR * b_l.norm();
        let (c_right, c_left, normalization) = if value_ok {
            (1.0 / a_r, 1.0 / a_l, Normalization::Value)
        } else {
            let i = C64::new(0.0, 1.0);
            (i / b_r, i / b_l, Normalization::Slope)
        };
        let origin = OriginData {
            alpha: c_right * a_r,
            beta: c_right * b_r / C64::new(0.0, 1.0),
        };
        Self { level, right, left, c_right, c_left, normalization, origin }
    }

    pub fn level(&self) -> &SpectralLevel {
        &self.level
    }

    /// Hierarchy depth `m` of the member this eigenfunction belongs to.
    pub fn member_depth(&self) -> usize {
        self.right.depth()
    }

    pub fn origin(&self) -> OriginData {
        self.origin
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Constants `(C_R, C_L)` multiplying the unnormalized one-sided forms.
    pub fn coefficients(&self) -> (C64, C64) {
        (self.c_right, self.c_left)
    }

    pub(crate) fn chains(&self) -> (&LocalChain, &LocalChain) {
        (&self.right, &self.left)
    }

    /// `ψ(x)`; the right branch is used at `x = 0`.
    pub fn eval(&self, x: f64) -> C64 {
        if x >= 0.0 {
            self.eval_right(x)
        } else {
            self.eval_left(x)
        }
    }

    /// Right closed form, valid on `[0, 1]`.
    pub fn eval_right(&self, x: f64) -> C64 {
        let w = 1.0 - x;
        if w <= 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.c_right * self.right.eigen(self.level.rho(), w).0
    }

    /// Left closed form, valid on `[-1, 0]`.
    pub fn eval_left(&self, x: f64) -> C64 {
        let w = 1.0 + x;
        if w <= 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.c_left * self.left.eigen(self.level.sigma(), w).0
    }

    /// `ψ'(x)` from the analytic derivative of the closed form.
    pub fn derivative(&self, x: f64) -> C64 {
        if x >= 0.0 {
            self.derivative_right(x)
        } else {
            self.derivative_left(x)
        }
    }

    pub fn derivative_right(&self, x: f64) -> C64 {
        -self.c_right * self.side_slope(&self.right, self.level.rho(), 1.0 - x)
    }

    pub fn derivative_left(&self, x: f64) -> C64 {
        self.c_left * self.side_slope(&self.left, self.level.sigma(), 1.0 + x)
    }

    fn side_slope(&self, chain: &LocalChain, k: C64, w: f64) -> C64 {
        if w > 0.0 {
            chain.eigen(k, w).1
        } else if chain.depth() == 1 {
            k
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// `(|ψ(0⁺) - ψ(0⁻)|, |ψ'(0⁺) - ψ'(0⁻)|)`.
    pub fn continuity_defects(&self) -> (f64, f64) {
        (
            (self.eval_right(0.0) - self.eval_left(0.0)).norm(),
            (self.derivative_right(0.0) - self.derivative_left(-0.0)).norm(),
        )
    }
}

/// Square-well eigenfunction `α sinh[ρ(1-x)]/sinh ρ` (right) and
/// `α sinh[σ(1+x)]/sinh σ` (left). Singular where `sinh ρ = 0`, i.e. for the
/// odd levels at `Z = 0`; [`PiecewiseEigenfunction`] handles that case.
pub fn eval_sw_eigenfunction(level: &SpectralLevel, alpha: f64, x: f64) -> C64 {
    if x >= 0.0 {
        let rho = level.rho();
        alpha * (rho * (1.0 - x)).sinh() / rho.sinh()
    } else {
        let sigma = level.sigma();
        alpha * (sigma * (1.0 + x)).sinh() / sigma.sinh()
    }
}

/// `x ↦ conj f(-x)`.
pub fn pt_transform<F>(f: F) -> impl Fn(f64) -> C64
where
    F: Fn(f64) -> C64,
{
    move |x| f(-x).conj()
}

/// `max |f(x) - conj f(-x)| / max |f|` over the grid.
pub fn pt_defect<F>(f: F, grid: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> C64,
{
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut defect: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &x in grid {
        let fx = f(x);
        defect = defect.max((fx - f(-x).conj()).norm());
        scale = scale.max(fx.norm());
    }
    Ok(if scale == 0.0 { 0.0 } else { defect / scale })
}

/// Constancy of the pointwise ratio `g/f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportionality {
    /// Mean ratio.
    pub ratio: C64,
    /// `mean |r_i / ratio - 1|²`.
    pub variance: f64,
}

impl Proportionality {
    /// `|Im ratio| / |ratio|`.
    pub fn phase_defect(&self) -> f64 {
        self.ratio.im.abs() / self.ratio.norm()
    }
}

/// Ratio `g(x)/f(x)` on the grid, skipping points where `|f|` is below
/// `10⁻³ max |f|`.
pub fn proportionality<F, G>(f: F, g: G, grid: &[f64]) -> Result<Proportionality>
where
    F: Fn(f64) -> C64,
    G: Fn(f64) -> C64,
{
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let values: Vec<(C64, C64)> = grid.iter().map(|&x| (f(x), g(x))).collect();
    let fmax = values.iter().map(|v| v.0.norm()).fold(0.0, f64::max);
    let ratios: Vec<C64> = values
        .iter()
        .filter(|v| v.0.norm() >= 1e-3 * fmax && fmax > 0.0)
        .map(|v| v.1 / v.0)
        .collect();
    if ratios.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<C64>() / n;
    let variance = ratios.iter().map(|r| (r / mean - 1.0).norm_sqr()).sum::<f64>() / n;
    Ok(Proportionality { ratio: mean, variance })
}

/// Proportionality of `conj f(-x)` to `f(x)`.
pub fn pt_proportionality<F>(f: F, grid: &[f64]) -> Result<Proportionality>
where
    F: Fn(f64) -> C64,
{
    proportionality(&f, |x| f(-x).conj(), grid)
}

/// `-(f(x+h) - 2f(x) + f(x-h))/h² + (V(x) - E) f(x)`.
pub fn schrodinger_residual<F>(f: F, v: &PiecewisePotential, energy: C64, x: f64, h: f64) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!("stencil step must be positive, got {h}")));
    }
    let (lo, hi) = (x - h, x + h);
    let same_region = (lo > 0.0 && hi < 1.0) || (lo > -1.0 && hi < 0.0);
    if !same_region {
        return Err(Error::StencilCrossesBoundary { x, h });
    }
    let fx = f(x);
    let d2 = (f(hi) - 2.0 * fx + f(lo)) / (h * h);
    Ok(-d2 + (v.eval(x) - energy) * fx)
}

/// Gegenbauer polynomial `C_n^(m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GegenbauerPoly {
    pub degree: usize,
    pub order: usize,
}

impl GegenbauerPoly {
    pub fn new(degree: usize, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain("Gegenbauer order must be >= 1".into()));
        }
        Ok(Self { degree, order })
    }

    /// Three-term recurrence
    /// `n C_n = 2x(n+m-1) C_{n-1} - (n+2m-2) C_{n-2}`.
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.order as f64;
        let mut prev = 1.0;
        if self.degree == 0 {
            return prev;
        }
        let mut cur = 2.0 * m * x;
        for n in 2..=self.degree {
            let nf = n as f64;
            let next = (2.0 * x * (nf + m - 1.0) * cur - (nf + 2.0 * m - 2.0) * prev) / nf;
            prev = cur;
            cur = next;
        }
        cur
    }
}

/// `C_n^(m)(x)`; `m` must be at least 1.
pub fn gegenbauer_eval(n: usize, m: usize, x: f64) -> Result<f64> {
    Ok(GegenbauerPoly::new(n, m)?.eval(x))
}

/// `cos^m(πx/2) C_n^(m)(sin(πx/2))`, the `Z -> 0` shape of the member-`m`
/// eigenfunction `n`.
pub fn limit_form(m: usize, n: usize, x: f64) -> Result<f64> {
    if !(1..=3).contains(&m) {
        return Err(Error::Domain(format!("limit forms exist for members 1..=3, got {m}")));
    }
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!("x must lie in (-1, 1), got {x}")));
    }
    let (s, c) = (FRAC_PI_2 * x).sin_cos();
    Ok(c.powi(m as i32) * GegenbauerPoly::new(n, m)?.eval(s))
}
