//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use ptwell_core::numeric::chebyshev_grid;
use ptwell_core::oracle::{find_spectrum_numeric, mismatch, SearchBox, ShootingConfig, ShootingTable};
use ptwell_core::spectral::{
    classify_spectrum, curve_x, curve_y, find_critical_coupling, matching_residual, solve_complex_pair,
    solve_real_spectrum, Branch,
};
use ptwell_core::susy::{
    apply_intertwiner, build_hierarchy, hierarchy_relations_check, superpotential_next, EliminationPlan,
    PiecewisePotential,
};
use ptwell_core::wavefunctions::{
    limit_form, proportionality, pt_defect, pt_transform, GegenbauerPoly, PiecewiseEigenfunction,
};
use ptwell_core::Complex64 as C64;

struct Outcome {
    checks: Vec<(String, bool)>,
}

impl Outcome {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect()
    }
}

type Criterion = fn(&mut Outcome) -> Result<(), ptwell_core::Error>;

fn z0_spectrum(out: &mut Outcome) -> Result<(), ptwell_core::Error> {
    let start = Instant::now();
    let levels = solve_real_spectrum(0.0, 10)?;
    let mut closed: f64 = 0.0;
    for (n, level) in levels.iter().enumerate() {
        let exact = ((n + 1) as f64).powi(2) * PI * PI / 4.0;
        closed = closed.max((level.energy - exact).norm());
    }
    out.check(format!("closed-form max error {closed:.2e} < 1e-10"), closed < 1e-10);

    let v = PiecewisePotential::square_well(0.0)?;
    let found = find_spectrum_numeric(&v, 10, &SearchBox::real(0.5, 260.0), &[], &ShootingConfig::default())?;
    let energies = found.energies();
    out.check(format!("oracle found {} of 10 levels", energies.len()), energies.len() == 10);
    let mut oracle: f64 = 0.0;
    for (n, e) in energies.iter().enumerate() {
        let exact = ((n + 1) as f64).powi(2) * PI * PI / 4.0;
        oracle = oracle.max((e - exact).norm());
    }
    out.check(format!("oracle max error {oracle:.2e} < 1e-8"), oracle < 1e-8);
    let elapsed = start.elapsed().as_secs_f64();
    out.check(format!("runtime {elapsed:.3} s < 1 s"), elapsed < 1.0);
    Ok(())
}

fn critical_couplings(out: &mut Outcome) -> Result<(), ptwell_core::Error> {
    for (nu, lo, hi) in [(0, 4.47, 4.49), (1, 12.79, 12.81)] {
        let start = Instant::now();
        let c = find_critical_coupling(nu)?;
        let elapsed = start.elapsed().as_secs_f64();
        out.check(format!("Z{nu}crit = {:.10} in [{lo}, {hi}]", c.z_crit), (lo..=hi).contains(&c.z_crit));
        out.check(
            format!("Z{nu}crit tangency |G| = {:.1e}, |G_t| = {:.1e}", c.residual.abs(), c.residual_dt.abs()),
            c.residual.abs() < 1e-10 && c.residual_dt.abs() < 1e-8,
        );
        out.check(format!("Z{nu}crit runtime {elapsed:.3} s < 5 s"), elapsed < 5.0);
    }
    Ok(())
}

fn matching_identities(out: &mut Outcome) -> Result<(), ptwell_core::Error> {
    let (mut g_max, mut eq6_max, mut curve_max, mut st_max) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    for z in [0.5, 1.0, 2.0, 4.0] {
        for level in solve_real_spectrum(z, 10)? {
            let m = level.momentum.expect("real levels carry (s, t)");
            let kappa = level.rho();
            g_max = g_max.max(matching_residual(m.t, z).abs());
            eq6_max = eq6_max.max((kappa * kappa.cosh() / kappa.sinh() + (kappa * kappa.cosh() / kappa.sinh()).conj()).norm());
            let t_scaled = 2.0 * m.t / PI;
            let s_scaled = (0.5 * m.s * (2.0 * m.s).sinh()).sqrt().asinh();
            let x = curve_x(t_scaled)?;
            let y = curve_y(z, t_scaled)?;
            curve_max = curve_max.max((x - y).abs()).max((s_scaled - y).abs());
            st_max = st_max.max((2.0 * m.s * m.t - z).abs() / z);
            count += 1;
        }
    }
    out.check(format!("{count} levels: max |G| = {g_max:.1e} < 1e-12"), g_max < 1e-12);
    out.check(format!("max |κ coth κ + c.c.| = {eq6_max:.1e} < 1e-10"), eq6_max < 1e-10);
    out.check(format!("max |X - Y| = {curve_max:.1e} < 1e-10"), curve_max < 1e-10);
    out.check(format!("max |2st - Z|/Z = {st_max:.1e} < 1e-12"), st_max < 1e-12);
    Ok(())
}

fn oracle_cross_validation(out: &mut Outcome) -> Result<(), ptwell_core::Error> {
    let z = 2.0;
    let levels = solve_real_spectrum(z, 8)?;
    let v = PiecewisePotential::square_well(z)?;
    let top = levels[7].energy.re;
    let found = find_spectrum_numeric(&v, 8, &SearchBox::real(0.5, top + 10.0), &[], &ShootingConfig::default())?;
    let energies = found.energies();
    out.check(format!("oracle found {} of 8 levels", energies.len()), energies.len() == 8);
    let dev = levels
        .iter()
        .zip(&energies)
        .map(|(l, e)| (l.energy - e).norm())
        .fold(0.0, f64::max);
    out.check(format!("max |E_closed - E_oracle| = {dev:.1e} < 1e-6"), dev < 1e-6);

    // fitted order from the error of the top level at three step sizes
    let steps = [4e-3, 2e-3, 1e-3];
    let mut errors = Vec::new();
    for h in steps {
        let cfg = ShootingConfig { step: h, ..Default::default() };
        let root = ShootingTable::new(&v, &cfg)?.polish(levels[7].energy)?;
        errors.push((root.energy - levels[7].energy).norm());
    }
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    out.check(format!("RK4 order {slope:.3} in [3.7, 4.3] (errors {})", errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")), (3.7..=4.3).contains(&slope));
    Ok(())
}

fn susy_pairing(out: &mut Outcome) -> Result<(), ptwell_core::Error> {
    let z = 2.0;
    let members = build_hierarchy(z, &EliminationPlan::all_real(1), 2, 7)?;
    let e = members[0].spectrum.energies();
    let v2 = &members[1].potential;
    let found = find_spectrum_numeric(v2, 6, &SearchBox::real(0.5, e[6].re + 10.0), &[], &ShootingConfig::default())?;
    let energies = found.energies();
    out.check(format!("oracle found {} of 6 partner levels", energies.len()), energies.len() == 6);
    let dev = energies
        .iter()
        .enumerate()
        .map(|(n, x)| (x - e[n + 1]).norm())
        .fold(0.0, f64::max);
    out.check(format!("max |E_oracle(V2) - E_(n+1)| = {dev:.1e} < 1e-6"), dev < 1e-6);

    let w = superpotential_next(&members[0])?;
    let psi0 = members[0].eigenfunction(0)?;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let x = -0.98 + 1.96 * (i as f64 + 0.5) / 50.0;
        let g = apply_intertwiner(&w, &psi0, x);
        let scale = psi0.derivative(x).norm() + (w.eval(x) * psi0.eval(x)).norm();
        worst = worst.max(g.norm() / scale);
    }
    out.check(format!("max |A1 ψ1,0| / scale = {worst:.1e} < 1e-10 at 50 points"), worst < 1e-10);
    Ok(())
}

fn hierarchy_limits(out: &mut Outcome) -> Result<(), ptwell_core::Error> {
    let members = build_hierarchy(0.0, &EliminationPlan::all_real(2), 3, 5)?;
    let xs: Vec<f64> = (1..=101).map(|i| -1.0 + 2.0 * i as f64 / 102.0).collect();
    for (m, strength) in [(1usize, 0.5), (2, 1.5)] {
        let mut rel: f64 = 0.0;
        for &x in &xs {
            let expect = strength * PI * PI / (PI * x / 2.0).cos().powi(2);
            rel = rel.max((members[m].potential.eval(x) - expect).norm() / expect);
        }
        out.check(format!("V{} sec² form, max relative deviation {rel:.1e} < 1e-10", m + 1), rel < 1e-10);
    }

    let grid = chebyshev_grid(101, 0.999);
    let mut variance: f64 = 0.0;
    for (m, member) in members.iter().enumerate() {
        for n in 0..5 {
            let psi = member.eigenfunction(n)?;
            let shape = |x: f64| C64::new(limit_form(m + 1, n, x).expect("|x| < 1"), 0.0);
            variance = variance.max(proportionality(shape, |x| psi.eval(x), &grid)?.variance);
        }
    }
    out.check(format!("Gegenbauer ratio variance {variance:.1e} < 1e-8 (m = 1..3, n = 0..4)"), variance < 1e-8);

    let h = 1e-5;
    let mut ladder: f64 = 0.0;
    for m in 2..=3usize {
        let mf = (m - 1) as f64;
        for n in 0..4 {
            let lower = GegenbauerPoly::new(n + 1, m - 1)?;
            let upper = GegenbauerPoly::new(n, m)?;
            let f = |x: f64| (PI * x / 2.0).cos().powi(m as i32 - 1) * lower.eval((PI * x / 2.0).sin());
            for i in 1..=21 {
                let x = -1.0 + 2.0 * i as f64 / 22.0;
                let lhs = (f(x + h) - f(x - h)) / (2.0 * h) + mf * PI / 2.0 * (PI * x / 2.0).tan() * f(x);
                let rhs = PI * mf * (PI * x / 2.0).cos().powi(m as i32) * upper.eval((PI * x / 2.0).sin());
                ladder = ladder.max((lhs - rhs).abs());
            }
        }
    }
    out.check(format!("Gegenbauer ladder max deviation {ladder:.1e} < 1e-6"), ladder < 1e-6);
    Ok(())
}

fn broken_phase(out: &mut Outcome) -> Result<(), ptwell_core::Error> {
    let z = 8.0;
    let (lower, upper) = solve_complex_pair(z, 0, None)?;
    let eps = -lower.energy.im;
    out.check(format!("E0 = {:.12}, ε0 = {eps:.6} > 0", lower.energy), eps > 0.0);
    let residual = lower.matching_residual().norm().max(upper.matching_residual().norm());
    out.check(format!("matching residual {residual:.1e} < 1e-10"), residual < 1e-10);
    let v = PiecewisePotential::square_well(z)?;
    let m = mismatch(&v, lower.energy, &ShootingConfig::default())?;
    out.check(format!("oracle |W|/scale at E0 = {:.1e} < 1e-7", m.relative()), m.relative() < 1e-7);

    let grid = chebyshev_grid(101, 0.999);
    let spectrum = classify_spectrum(z, 8)?;
    let psi0 = PiecewiseEigenfunction::square_well(&spectrum.levels[0], z);
    let psi1 = PiecewiseEigenfunction::square_well(&spectrum.levels[1], z);
    let d0 = pt_defect(|x| psi0.eval(x), &grid)?;
    let d1 = pt_defect(|x| psi1.eval(x), &grid)?;
    out.check(format!("PT-defect ψ0 = {d0:.3}, ψ1 = {d1:.3} > 0.01"), d0 > 0.01 && d1 > 0.01);
    let p = proportionality(|x| psi1.eval(x), pt_transform(|x| psi0.eval(x)), &grid)?;
    out.check(
        format!("PT ψ0 = r ψ1: variance {:.1e} < 1e-10, |Im r|/|r| = {:.1e}", p.variance, p.phase_defect()),
        p.variance < 1e-10 && p.phase_defect() < 1e-10,
    );
    let mut unbroken: f64 = 0.0;
    for level in spectrum.levels.iter().filter(|l| l.branch == Branch::Real) {
        let psi = PiecewiseEigenfunction::square_well(level, z);
        unbroken = unbroken.max(pt_defect(|x| psi.eval(x), &grid)?);
    }
    out.check(format!("unbroken levels max PT-defect {unbroken:.1e} < 1e-12"), unbroken < 1e-12);
    Ok(())
}

fn hierarchy_relations(out: &mut Outcome) -> Result<(), ptwell_core::Error> {
    let z = 8.0;
    let report = hierarchy_relations_check(z)?;
    out.check(
        format!("max |V(3)2(x) - conj V(2)2(-x)| = {:.1e} < 1e-10", report.v2_mirror_deviation),
        report.v2_mirror_deviation < 1e-10,
    );
    out.check(format!("max |V(3)3 - V(2)3| = {:.1e} < 1e-10", report.v3_deviation), report.v3_deviation < 1e-10);
    out.check(
        format!("member 3 potential PT-symmetric: flag {}, PT-defect {:.1e}", report.member3_pt_flag, report.member3_potential_pt_defect),
        report.member3_pt_flag && report.member3_potential_pt_defect < 1e-10,
    );

    let members = build_hierarchy(z, &EliminationPlan::lower_first(2), 3, 5)?;
    let member3 = &members[2];
    let seeds: Vec<C64> = member3.spectrum.energies();
    let top = seeds.iter().map(|e| e.re).fold(0.0, f64::max);
    let search = SearchBox { re_min: 0.5, re_max: top + 10.0, im_min: -20.0, im_max: 20.0 };
    let found = find_spectrum_numeric(&member3.potential, 5, &search, &seeds, &ShootingConfig::default())?;
    let energies = found.energies();
    let max_im = energies.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
    out.check(
        format!("oracle spectrum of member 3: {} levels, max |Im E| = {max_im:.1e} < 1e-7", energies.len()),
        energies.len() == 5 && max_im < 1e-7,
    );

    let min_var = report.member3_pt_ratio_variance.iter().copied().fold(f64::INFINITY, f64::min);
    out.check(
        format!("member 3 eigenfunctions fail PT-proportionality: min ratio variance {min_var:.1e} > 1e-4"),
        min_var > 1e-4,
    );
    Ok(())
}

fn main() -> ExitCode {
    let suite_start = Instant::now();
    let criteria: [(&str, Criterion); 8] = [
        ("1 Z=0 spectrum", z0_spectrum),
        ("2 critical couplings", critical_couplings),
        ("3 matching identities", matching_identities),
        ("4 oracle cross-validation", oracle_cross_validation),
        ("5 SUSY pairing", susy_pairing),
        ("6 hierarchy limits", hierarchy_limits),
        ("7 broken phase at Z=8", broken_phase),
        ("8 hierarchy relations at Z=8", hierarchy_relations),
    ];
    let mut all_passed = true;
    for (name, run) in criteria {
        let start = Instant::now();
        let mut out = Outcome::new();
        if let Err(err) = run(&mut out) {
            out.check(format!("error: {err}"), false);
        }
        let status = if out.passed() { "PASS" } else { "FAIL" };
        all_passed &= out.passed();
        println!("{status} criterion {name} ({:.2} s)", start.elapsed().as_secs_f64());
        for (what, ok) in &out.checks {
            println!("    [{}] {what}", if *ok { "ok" } else { "FAILED" });
        }
        if !out.passed() {
            println!("    failing checks: {}", out.failures().join("; "));
        }
    }
    let total = suite_start.elapsed().as_secs_f64();
    let fast = total < 60.0;
    all_passed &= fast;
    println!(
        "{} criterion 9 runtime: acceptance run took {total:.2} s (< 60 s)",
        if fast { "PASS" } else { "FAIL" }
    );
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
