//! Small numerical kernels shared by the solvers: overflow-safe hyperbolic
//! functions, near-wall series for the pole-subtracted `coth`/`csch²` terms,
//! and a damped two-dimensional Newton iteration.

use num_complex::Complex64;

pub(crate) type C64 = Complex64;

/// Arguments with `|Re z|` beyond this are evaluated through `exp(-2|z|)`.
const LARGE_RE: f64 = 20.0;

/// Below this `|z|` the pole-subtracted forms switch to their Taylor series.
const SERIES_RADIUS: f64 = 0.1;

/// Hyperbolic cotangent, stable for large `|Re z|`.
pub fn coth(z: C64) -> C64 {
    if z.re > LARGE_RE {
        let e = (-2.0 * z).exp();
        C64::new(1.0, 0.0) + 2.0 * e / (1.0 - e)
    } else if z.re < -LARGE_RE {
        -coth(-z)
    } else {
        z.cosh() / z.sinh()
    }
}

/// Hyperbolic cosecant, stable for large `|Re z|`.
pub fn csch(z: C64) -> C64 {
    if z.re > LARGE_RE {
        2.0 * (-z).exp() / (1.0 - (-2.0 * z).exp())
    } else if z.re < -LARGE_RE {
        -csch(-z)
    } else {
        1.0 / z.sinh()
    }
}

// z coth z - 1 = sum_n COTH_SERIES[n-1] z^(2n)
const COTH_SERIES: [f64; 6] = [
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
];

fn horner_even(coeffs: &[f64], z2: C64) -> C64 {
    // sum_n coeffs[n-1] z^(2n), n >= 1
    let mut acc = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z2 + c;
    }
    acc * z2
}

/// `k coth(k w) - 1/w`, regular as `w -> 0`.
pub fn coth_minus_pole(k: C64, w: f64) -> C64 {
    let z = k * w;
    if z.norm() < SERIES_RADIUS {
        horner_even(&COTH_SERIES, z * z) / w
    } else {
        k * coth(z) - 1.0 / w
    }
}

/// `k² csch²(k w) - 1/w²`, regular as `w -> 0`.
pub fn csch2_minus_pole(k: C64, w: f64) -> C64 {
    let z = k * w;
    if z.norm() < SERIES_RADIUS {
        // z² csch² z - 1 = -sum_n (2n-1) a_n z^(2n)
        let mut coeffs = [0.0; 6];
        for (n, c) in COTH_SERIES.iter().enumerate() {
            coeffs[n] = -((2 * n + 1) as f64) * c;
        }
        horner_even(&coeffs, z * z) / (w * w)
    } else {
        let c = csch(z);
        k * k * c * c - 1.0 / (w * w)
    }
}

/// `sinh(k w)·(k coth(k w) - 1/w) = k cosh(k w) - sinh(k w)/w`, free of
/// the cancellation near the wall.
pub fn sinh_times_coth_minus_pole(k: C64, w: f64) -> C64 {
    let z = k * w;
    if z.norm() < SERIES_RADIUS {
        // (z cosh z - sinh z) = sum_n 2n z^(2n+1) / (2n+1)!
        let z2 = z * z;
        let mut term = z * z2 / 3.0;
        let mut acc = term;
        for n in 2..8u32 {
            let two_n = f64::from(2 * n);
            // ratio of consecutive terms: z² · 2n / ((2n-2)(2n)(2n+1))
            term = term * z2 * two_n / ((two_n - 2.0) * two_n * (two_n + 1.0));
            acc += term;
        }
        acc / w
    } else {
        k * z.cosh() - z.sinh() / w
    }
}

/// `n` Chebyshev nodes scaled to `(-half_width, half_width)`, ascending,
/// with any node within `1e-12` of the origin dropped.
pub fn chebyshev_grid(n: usize, half_width: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n)
        .map(|i| {
            let theta = (2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
            half_width * theta.cos()
        })
        .filter(|x| x.abs() > 1e-12)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs
}

/// Forward-difference Jacobian of a map `R² -> R²`, step `1e-7 (1 + |x|)`.
pub(crate) fn fd_jacobian<F>(f: &mut F, x: [f64; 2], fx: [f64; 2]) -> [[f64; 2]; 2]
where
    F: FnMut([f64; 2]) -> [f64; 2],
{
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let h = 1e-7 * (1.0 + x[j].abs());
        let mut xp = x;
        xp[j] += h;
        let fp = f(xp);
        for i in 0..2 {
            jac[i][j] = (fp[i] - fx[i]) / h;
        }
    }
    jac
}

pub(crate) fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

pub(crate) struct NewtonOutcome {
    pub x: [f64; 2],
}

/// Damped Newton for `F: R² -> R²`. `step` returns the residual and the
/// Jacobian at a point. The step is halved while the residual norm grows.
pub(crate) fn newton_2d<F>(mut step: F, x0: [f64; 2], tol: f64, max_iter: usize) -> Result<NewtonOutcome, String>
where
    F: FnMut([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]),
{
    let mut x = x0;
    let (mut r, mut jac) = step(x);
    for _ in 0..max_iter {
        if !(r[0].is_finite() && r[1].is_finite()) {
            return Err(format!("non-finite residual at {x:?}"));
        }
        if norm2(r) < tol {
            return Ok(NewtonOutcome { x });
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(format!("singular Jacobian at {x:?}"));
        }
        let dx = [
            (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            (jac[0][0] * r[1] - jac[1][0] * r[0]) / det,
        ];
        let base = norm2(r);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = [x[0] - lambda * dx[0], x[1] - lambda * dx[1]];
            let (rt, jt) = step(trial);
            if rt[0].is_finite() && rt[1].is_finite() && norm2(rt) <= base {
                accepted = Some((trial, rt, jt));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, rt, jt)) => {
                let stalled = xt == x;
                x = xt;
                r = rt;
                jac = jt;
                if stalled {
                    break;
                }
            }
            None => break,
        }
    }
    if norm2(r) < tol {
        Ok(NewtonOutcome { x })
    } else {
        Err(format!("residual {:.3e} after {max_iter} iterations at {x:?}", norm2(r)))
    }
}
