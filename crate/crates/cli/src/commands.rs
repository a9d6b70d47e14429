use std::f64::consts::PI;
use std::path::PathBuf;

use ptwell_core::numeric::chebyshev_grid;
use ptwell_core::oracle::{find_spectrum_numeric, mismatch, SearchBox, ShootingConfig};
use ptwell_core::spectral::{classify_spectrum, find_critical_coupling, SpectralLevel};
use ptwell_core::susy::{
    build_hierarchy, hierarchy_relations_check, EliminationPlan, HierarchyMember, RelationsReport, SidedPotential,
    ORIGIN_GUARD, WALL_GUARD,
};
use ptwell_core::wavefunctions::{limit_form, proportionality};
use ptwell_core::Complex64 as C64;
use serde::Serialize;

use crate::output::{emit, fixed, to_json, ComplexOut};

pub enum Failure {
    Usage(String),
    Solver(ptwell_core::Error),
    /// The report was written; some check did not pass.
    Verification(String),
    Io(std::io::Error),
}

impl From<ptwell_core::Error> for Failure {
    fn from(e: ptwell_core::Error) -> Self {
        Failure::Solver(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

pub type Outcome = Result<(), Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Multiplies every tolerance; read from `PTWELL_TOL_OVERRIDE`.
pub fn tolerance_scale() -> Result<f64, Failure> {
    match std::env::var("PTWELL_TOL_OVERRIDE") {
        Err(_) => Ok(1.0),
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(s) if s > 0.0 && s.is_finite() => Ok(s),
            _ => Err(Failure::Usage(format!("PTWELL_TOL_OVERRIDE must be a positive number, got `{raw}`"))),
        },
    }
}

fn default_plan(plan: Option<EliminationPlan>, depth: usize) -> EliminationPlan {
    plan.unwrap_or_else(|| EliminationPlan::all_real(depth.saturating_sub(1)))
}

#[derive(Serialize)]
struct LevelOut {
    n: usize,
    re: f64,
    im: f64,
    branch: &'static str,
    s: f64,
    t: f64,
}

impl LevelOut {
    fn new(n: usize, level: &SpectralLevel) -> Self {
        let kappa = level.rho();
        Self {
            n,
            re: level.energy.re,
            im: level.energy.im,
            branch: level.branch.as_str(),
            s: kappa.re,
            t: -kappa.im,
        }
    }
}

#[derive(Serialize)]
struct SpectrumOut {
    coupling: f64,
    levels: Vec<LevelOut>,
    broken_pairs: Vec<(usize, usize)>,
    /// `|ρ coth ρ + σ coth σ|` per level.
    residuals: Vec<f64>,
}

pub fn spectrum(coupling: f64, levels: usize, output: Option<PathBuf>) -> Outcome {
    let s = classify_spectrum(coupling, levels)?;
    let out = SpectrumOut {
        coupling,
        levels: s.levels.iter().enumerate().map(|(n, l)| LevelOut::new(n, l)).collect(),
        broken_pairs: s.broken_pairs.clone(),
        residuals: s.levels.iter().map(|l| l.matching_residual().norm()).collect(),
    };
    Ok(emit(&to_json(&out), output.as_deref())?)
}

#[derive(Serialize)]
struct Residuals {
    g: f64,
    g_t: f64,
}

#[derive(Serialize)]
struct CriticalOut {
    nu: usize,
    z_crit: f64,
    t_merge: f64,
    e_merge: f64,
    residuals: Residuals,
}

pub fn critical(index: usize, output: Option<PathBuf>) -> Outcome {
    let c = find_critical_coupling(index)?;
    let out = CriticalOut {
        nu: c.nu,
        z_crit: c.z_crit,
        t_merge: c.t_merge,
        e_merge: c.e_merge,
        residuals: Residuals { g: c.residual, g_t: c.residual_dt },
    };
    Ok(emit(&to_json(&out), output.as_deref())?)
}

/// `samples` points on `[-1 + WALL_GUARD, 1 - WALL_GUARD]`, nudged off the origin.
fn guarded_grid(samples: usize) -> Vec<f64> {
    let half = 1.0 - WALL_GUARD;
    (0..samples)
        .map(|i| {
            let x = -half + 2.0 * half * i as f64 / (samples - 1) as f64;
            if x.abs() < ORIGIN_GUARD {
                ORIGIN_GUARD
            } else {
                x
            }
        })
        .collect()
}

#[derive(Serialize)]
struct Sample {
    x: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct MemberOut {
    depth: usize,
    plan_prefix: String,
    pt_symmetric: bool,
    endpoint_exponent: u32,
    eliminated: Vec<ComplexOut>,
    spectrum: Vec<LevelOut>,
    samples: Vec<Sample>,
}

#[derive(Serialize)]
struct HierarchyOut {
    coupling: f64,
    plan: String,
    members: Vec<MemberOut>,
    /// Present when the coupling lies between the first two critical values.
    relations: Option<RelationsReport>,
}

fn member_out(member: &HierarchyMember, grid: &[f64]) -> MemberOut {
    MemberOut {
        depth: member.depth,
        plan_prefix: member.plan_prefix.to_string(),
        pt_symmetric: member.potential.pt_symmetric(),
        endpoint_exponent: member.potential.endpoint_exponent(),
        eliminated: member.eliminated.iter().map(|l| l.energy.into()).collect(),
        spectrum: member.spectrum.levels.iter().enumerate().map(|(n, l)| LevelOut::new(n, l)).collect(),
        samples: grid
            .iter()
            .map(|&x| {
                let v = member.potential.eval(x);
                Sample { x, re: v.re, im: v.im }
            })
            .collect(),
    }
}

pub struct HierarchyArgs {
    pub coupling: f64,
    pub depth: usize,
    pub plan: Option<EliminationPlan>,
    pub levels: usize,
    pub samples: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
}

pub fn hierarchy(args: HierarchyArgs) -> Outcome {
    let plan = default_plan(args.plan, args.depth);
    let members = build_hierarchy(args.coupling, &plan, args.depth, args.levels)?;
    let grid = guarded_grid(args.samples);
    let text = match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["member", "x", "re_v", "im_v"]).map_err(std::io::Error::from)?;
            for member in &members {
                for &x in &grid {
                    let v = member.potential.eval(x);
                    let row = [member.depth.to_string(), fixed(x), fixed(v.re), fixed(v.im)];
                    w.write_record(&row).map_err(std::io::Error::from)?;
                }
            }
            let bytes = w.into_inner().map_err(|e| e.into_error())?;
            String::from_utf8(bytes).expect("CSV rows are ASCII")
        }
        Format::Json => {
            let c0 = find_critical_coupling(0)?.z_crit;
            let c1 = find_critical_coupling(1)?.z_crit;
            let relations = if args.coupling > c0 && args.coupling < c1 {
                Some(hierarchy_relations_check(args.coupling)?)
            } else {
                None
            };
            let out = HierarchyOut {
                coupling: args.coupling,
                plan: plan.to_string(),
                members: members.iter().map(|m| member_out(m, &grid)).collect(),
                relations,
            };
            to_json(&out)
        }
    };
    Ok(emit(&text, args.output.as_deref())?)
}

#[derive(Serialize)]
struct VerifiedLevel {
    n: usize,
    /// Position of the level in the square-well spectrum.
    bare_level: usize,
    closed: ComplexOut,
    oracle: Option<ComplexOut>,
    deviation: Option<f64>,
    matching_residual: f64,
    /// `|W| / scale` of the shooting Wronskian at the closed-form energy.
    mismatch: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyOut {
    coupling: f64,
    member: usize,
    plan: String,
    tolerance: f64,
    levels: Vec<VerifiedLevel>,
    oracle_failures: Vec<String>,
    max_deviation: Option<f64>,
    pass: bool,
}

pub struct VerifyArgs {
    pub coupling: f64,
    pub member: usize,
    pub levels: usize,
    pub plan: Option<EliminationPlan>,
    pub tol: f64,
    pub output: Option<PathBuf>,
}

pub fn verify(args: VerifyArgs) -> Outcome {
    let tolerance = args.tol * tolerance_scale()?;
    let plan = default_plan(args.plan, args.member);
    let members = build_hierarchy(args.coupling, &plan, args.member, args.levels)?;
    let bare = members[0].spectrum.energies();
    let member = members.last().expect("depth >= 1");
    let closed = member.spectrum.energies();

    let cfg = ShootingConfig::default();
    let top = closed.iter().map(|e| e.re).fold(0.0, f64::max);
    let height = closed.iter().map(|e| e.im.abs()).fold(0.0, f64::max) + 5.0;
    let search = SearchBox { re_min: 0.5, re_max: top + 5.0, im_min: -height, im_max: height };
    let seeds: Vec<C64> = closed.iter().copied().filter(|e| e.im != 0.0).collect();
    let numeric = find_spectrum_numeric(&member.potential, closed.len(), &search, &seeds, &cfg)?;
    let found = numeric.energies();

    let mut levels = Vec::with_capacity(closed.len());
    for (n, level) in member.spectrum.levels.iter().enumerate() {
        let nearest = found.iter().copied().min_by(|a, b| (a - level.energy).norm().total_cmp(&(b - level.energy).norm()));
        let deviation = nearest.map(|e| (e - level.energy).norm());
        levels.push(VerifiedLevel {
            n,
            bare_level: bare.iter().position(|&e| e == level.energy).unwrap_or(usize::MAX),
            closed: level.energy.into(),
            oracle: nearest.map(Into::into),
            deviation,
            matching_residual: level.matching_residual().norm(),
            mismatch: mismatch(&member.potential, level.energy, &cfg)?.relative(),
            pass: deviation.is_some_and(|d| d < tolerance),
        });
    }
    let pass = levels.iter().all(|l| l.pass);
    let out = VerifyOut {
        coupling: args.coupling,
        member: args.member,
        plan: plan.to_string(),
        tolerance,
        max_deviation: levels.iter().filter_map(|l| l.deviation).reduce(f64::max),
        oracle_failures: numeric.failures.iter().map(|f| f.to_string()).collect(),
        levels,
        pass,
    };
    emit(&to_json(&out), args.output.as_deref())?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!("oracle deviation above tolerance {tolerance:e}")))
    }
}

/// Coupling used to check that the limit is approached continuously.
const SMALL_COUPLING: f64 = 1e-6;
const POTENTIAL_TOL: f64 = 1e-10;

#[derive(Serialize)]
struct LimitPoint {
    coupling: f64,
    ratio: ComplexOut,
    variance: f64,
    /// Largest `|V_m - (π²/4) m(m-1) sec²(πx/2)|`, relative to `max(1, |·|)`.
    potential_deviation: f64,
}

#[derive(Serialize)]
struct LimitOut {
    m: usize,
    n: usize,
    variance_tolerance: f64,
    potential_tolerance: f64,
    exact: LimitPoint,
    near: LimitPoint,
    pass: bool,
}

fn limit_point(coupling: f64, m: usize, n: usize) -> Result<LimitPoint, Failure> {
    let members = build_hierarchy(coupling, &EliminationPlan::all_real(m - 1), m, n + 1)?;
    let member = &members[m - 1];
    let psi = member.eigenfunction(n)?;
    let grid = chebyshev_grid(101, 0.999);
    let p = proportionality(|x| C64::new(limit_form(m, n, x).expect("|x| < 1 on the grid"), 0.0), |x| psi.eval(x), &grid)?;
    let strength = PI * PI / 4.0 * (m * (m - 1)) as f64;
    let potential_deviation = (1..=101)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / 102.0;
            let expect = strength / (PI * x / 2.0).cos().powi(2);
            (member.potential.eval(x) - expect).norm() / expect.max(1.0)
        })
        .fold(0.0, f64::max);
    Ok(LimitPoint { coupling, ratio: p.ratio.into(), variance: p.variance, potential_deviation })
}

pub fn limit(m: usize, n: usize, tol: f64, output: Option<PathBuf>) -> Outcome {
    let scale = tolerance_scale()?;
    let (variance_tolerance, potential_tolerance) = (tol * scale, POTENTIAL_TOL * scale);
    let exact = limit_point(0.0, m, n)?;
    let near = limit_point(SMALL_COUPLING, m, n)?;
    let pass = exact.variance < variance_tolerance && exact.potential_deviation < potential_tolerance;
    let out = LimitOut { m, n, variance_tolerance, potential_tolerance, exact, near, pass };
    emit(&to_json(&out), output.as_deref())?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification("limit shape or potential outside tolerance".into()))
    }
}
