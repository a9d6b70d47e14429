use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ptwell_core::numeric::chebyshev_grid;
use ptwell_core::spectral::classify_spectrum;
use ptwell_core::susy::{build_hierarchy, EliminationPlan, PiecewisePotential};
use ptwell_core::wavefunctions::{
    eval_sw_eigenfunction, gegenbauer_eval, limit_form, proportionality, pt_defect, schrodinger_residual,
    PiecewiseEigenfunction,
};
use ptwell_core::Complex64 as C64;

const COUPLINGS: [f64; 5] = [0.0, 1.0, 2.0, 8.0, 14.0];

fn peak(f: &PiecewiseEigenfunction) -> f64 {
    chebyshev_grid(201, 0.999).iter().map(|&x| f.eval(x).norm()).fold(0.0, f64::max)
}

#[test]
fn eigenfunctions_vanish_at_the_walls() {
    for z in COUPLINGS {
        for level in classify_spectrum(z, 6).unwrap().levels {
            let psi = PiecewiseEigenfunction::square_well(&level, z);
            let p = peak(&psi);
            for x in [1.0 - 1e-6, -1.0 + 1e-6] {
                assert!(psi.eval(x).norm() < 1e-5 * p, "Z={z} n={} x={x}", level.index);
            }
        }
    }
}

#[test]
fn eigenfunctions_are_smooth_at_the_origin() {
    for z in COUPLINGS {
        for plan in [EliminationPlan::all_real(2), EliminationPlan::lower_first(2)] {
            let Ok(members) = build_hierarchy(z, &plan, 3, 4) else { continue };
            for member in &members {
                for n in 0..member.spectrum.levels.len() {
                    let psi = member.eigenfunction(n).unwrap();
                    let (value, slope) = psi.continuity_defects();
                    assert!(value < 1e-12 * peak(&psi).max(1.0), "Z={z} {plan} m={} n={n}: {value}", member.depth);
                    assert!(slope < 1e-10 * peak(&psi).max(1.0), "Z={z} {plan} m={} n={n}: {slope}", member.depth);
                }
            }
        }
    }
}

#[test]
fn unbroken_levels_are_pt_symmetric() {
    let grid = chebyshev_grid(101, 0.999);
    for z in COUPLINGS {
        for level in classify_spectrum(z, 8).unwrap().levels.iter().filter(|l| l.branch.is_real()) {
            let psi = PiecewiseEigenfunction::square_well(level, z);
            assert!(pt_defect(|x| psi.eval(x), &grid).unwrap() < 1e-12);
            let origin = psi.origin();
            assert!(origin.alpha.im.abs() < 1e-12 * origin.alpha.norm().max(1.0));
        }
    }
}

#[test]
fn square_well_residual_at_random_points() {
    let mut rng = StdRng::seed_from_u64(42);
    for z in COUPLINGS {
        let v = PiecewisePotential::square_well(z).unwrap();
        for level in classify_spectrum(z, 6).unwrap().levels {
            let psi = PiecewiseEigenfunction::square_well(&level, z);
            let p = peak(&psi);
            for _ in 0..50 {
                let x: f64 = rng.gen_range(-0.999..0.999);
                if x.abs() < 2e-4 {
                    continue;
                }
                let r = schrodinger_residual(|y| psi.eval(y), &v, level.energy, x, 1e-4).unwrap();
                assert!(r.norm() < 1e-5 * p, "Z={z} n={} x={x}: {r}", level.index);
            }
        }
    }
}

#[test]
fn free_ground_state_is_a_cosine() {
    let level = classify_spectrum(0.0, 1).unwrap().levels[0];
    for i in 1..40 {
        let x = -1.0 + i as f64 / 20.0;
        let f = eval_sw_eigenfunction(&level, 1.0, x);
        assert!((f - C64::new((PI * x / 2.0).cos(), 0.0)).norm() < 1e-12);
    }
}

#[test]
fn odd_limit_forms_are_sines() {
    let grid = chebyshev_grid(101, 0.999);
    for nu in 0..3 {
        let p = proportionality(
            |x| C64::new(limit_form(1, 2 * nu + 1, x).unwrap(), 0.0),
            |x| C64::new(((nu + 1) as f64 * PI * x).sin(), 0.0),
            &grid,
        )
        .unwrap();
        assert!(p.variance < 1e-20);
    }
}

#[test]
fn gegenbauer_values() {
    assert_eq!(gegenbauer_eval(0, 3, 0.7).unwrap(), 1.0);
    assert!((gegenbauer_eval(1, 2, 0.3).unwrap() - 1.2).abs() < 1e-15);
    assert!((gegenbauer_eval(2, 1, 0.3).unwrap() + 0.64).abs() < 1e-15);
    let phi: f64 = 0.8;
    assert!((gegenbauer_eval(1, 1, phi.cos()).unwrap() - (2.0 * phi).sin() / phi.sin()).abs() < 1e-15);
    assert!(gegenbauer_eval(1, 0, 0.3).is_err());
}
