//! One side of a Darboux (SUSY) chain, written in the distance `w` from the
//! wall (`w = 1 - x` on the right, `w = 1 + x` on the left).
//!
//! On either side the bare well is `-f'' + v1 f = E f` with `f = sinh(k w)`
//! and `E = v1 - k²`. Eliminating the levels `k_e, k_a, ...` in turn gives the
//! members of the hierarchy. Members up to depth 3 are evaluated in closed
//! form with the wall poles subtracted analytically; deeper members continue
//! with the logarithmic-derivative recursion.

use crate::numeric::{coth_minus_pole, csch, csch2_minus_pole, sinh_times_coth_minus_pole, C64};

/// Deepest member with a closed-form evaluator.
pub(crate) const CLOSED_FORM_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LocalChain {
    pub v1: C64,
    /// Wavenumbers of the eliminated levels, in elimination order.
    pub ks: Vec<C64>,
}

/// Pole-subtracted pieces of `k coth(kw)` and `k² csch²(kw)`.
struct Pole {
    c: C64,
    c_hat: C64,
    q: C64,
    q_hat: C64,
}

impl Pole {
    fn new(k: C64, w: f64) -> Self {
        let c_hat = coth_minus_pole(k, w);
        let q_hat = csch2_minus_pole(k, w);
        let cs = csch(k * w);
        Self { c: c_hat + 1.0 / w, c_hat, q: k * k * cs * cs, q_hat }
    }
}

impl LocalChain {
    pub fn new(v1: C64, ks: Vec<C64>) -> Self {
        Self { v1, ks }
    }

    pub fn depth(&self) -> usize {
        self.ks.len() + 1
    }

    pub fn energy(&self, k: C64) -> C64 {
        self.v1 - k * k
    }

    #[cfg(test)]
    pub fn extended(&self, k: C64) -> Self {
        let mut ks = self.ks.clone();
        ks.push(k);
        Self { v1: self.v1, ks }
    }

    fn prefix(&self, len: usize) -> Self {
        Self { v1: self.v1, ks: self.ks[..len].to_vec() }
    }

    pub fn potential(&self, w: f64) -> C64 {
        if self.depth() <= CLOSED_FORM_DEPTH {
            closed_potential(self.v1, &self.ks, w)
        } else {
            self.state(w, &[], true).0
        }
    }

    /// `(f, df/dw)` of the member eigenfunction with wavenumber `k`.
    pub fn eigen(&self, k: C64, w: f64) -> (C64, C64) {
        if self.depth() <= CLOSED_FORM_DEPTH {
            closed_eigen(&self.ks, k, w)
        } else {
            self.state(w, &[k], true).1[0]
        }
    }

    /// Same as [`eigen`](Self::eigen) but by recursion from the bare well.
    pub fn eigen_recursive(&self, k: C64, w: f64) -> (C64, C64) {
        self.state(w, &[k], false).1[0]
    }

    pub fn potential_recursive(&self, w: f64) -> C64 {
        self.state(w, &[], false).0
    }

    /// Superpotential `(w̃, dw̃/dw)` that eliminates `k_e` from this member.
    pub fn superpotential(&self, k_e: C64, w: f64) -> (C64, C64) {
        match self.ks.as_slice() {
            [] => {
                let p = Pole::new(k_e, w);
                (-p.c, p.q)
            }
            [e] => {
                let pe = Pole::new(*e, w);
                let pa = Pole::new(k_e, w);
                let ka = k_e * k_e - e * e;
                let dca = pa.c_hat - pe.c_hat;
                (pe.c - ka / dca, -pe.q - ka * (pa.q_hat - pe.q_hat) / (dca * dca))
            }
            _ => self.superpotential_recursive(k_e, w),
        }
    }

    /// `w̃ = -f_e'/f_e` from the member eigenfunction of `k_e`.
    pub fn superpotential_recursive(&self, k_e: C64, w: f64) -> (C64, C64) {
        let (v, f) = self.state(w, &[k_e], self.depth() > CLOSED_FORM_DEPTH);
        let (fe, dfe) = f[0];
        let wt = -dfe / fe;
        (wt, -(v - self.energy(k_e)) + wt * wt)
    }

    /// Potential and `(f, f')` for `targets`. With `closed` the first two
    /// eliminations use the closed forms; the rest always recurse.
    fn state(&self, w: f64, targets: &[C64], closed: bool) -> (C64, Vec<(C64, C64)>) {
        let base = if closed { self.ks.len().min(CLOSED_FORM_DEPTH - 1) } else { 0 };
        let prefix = self.prefix(base);
        let rest: Vec<C64> = self.ks[base..].iter().chain(targets).copied().collect();
        let mut v = closed_potential(self.v1, &prefix.ks, w);
        let mut fs: Vec<(C64, C64)> = rest.iter().map(|&k| closed_eigen(&prefix.ks, k, w)).collect();
        let steps = self.ks.len() - base;
        for i in 0..steps {
            let (fe, dfe) = fs[i];
            let wt = -dfe / fe;
            let dwt = -(v - self.energy(rest[i])) + wt * wt;
            for l in i + 1..rest.len() {
                let (f, df) = fs[l];
                let el = self.energy(rest[l]);
                fs[l] = (df + wt * f, (v - el) * f + dwt * f + wt * df);
            }
            v += 2.0 * dwt;
        }
        (v, fs.split_off(steps))
    }
}

fn closed_potential(v1: C64, ks: &[C64], w: f64) -> C64 {
    match ks {
        [] => v1,
        [e] => v1 + 2.0 * Pole::new(*e, w).q,
        [e, a] => {
            let pe = Pole::new(*e, w);
            let pa = Pole::new(*a, w);
            let ka = a * a - e * e;
            let dca = pa.c_hat - pe.c_hat;
            v1 - 2.0 * ka * (pa.q_hat - pe.q_hat) / (dca * dca)
        }
        _ => unreachable!("closed forms stop at depth {CLOSED_FORM_DEPTH}"),
    }
}

/// Depth-2 `(f, f')`; `f = sinh(k w)(ĉ_k - ĉ_e)`.
fn depth2_eigen(k: C64, w: f64, pe: &Pole) -> (C64, C64) {
    let z = k * w;
    let (sh, ch) = (z.sinh(), z.cosh());
    let stcp = sinh_times_coth_minus_pole(k, w);
    let f = stcp - sh * pe.c_hat;
    let df = sh * (k * k + pe.q_hat) - pe.c_hat * k * ch - stcp / w;
    (f, df)
}

fn closed_eigen(ks: &[C64], k: C64, w: f64) -> (C64, C64) {
    match ks {
        [] => {
            let z = k * w;
            (z.sinh(), k * z.cosh())
        }
        [e] => depth2_eigen(k, w, &Pole::new(*e, w)),
        [e, a] => {
            let pe = Pole::new(*e, w);
            let pa = Pole::new(*a, w);
            let (f2, df2) = depth2_eigen(k, w, &pe);
            let kj = k * k - e * e;
            let ka = a * a - e * e;
            let dca = pa.c_hat - pe.c_hat;
            let d_dca = -(pa.q_hat - pe.q_hat);
            let z = k * w;
            let f = kj * z.sinh() - ka * f2 / dca;
            let df = kj * k * z.cosh() - ka * (df2 / dca - f2 * d_dca / (dca * dca));
            (f, df)
        }
        _ => unreachable!("closed forms stop at depth {CLOSED_FORM_DEPTH}"),
    }
}
