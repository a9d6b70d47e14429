//! SUSY partner hierarchies of the square well.
//!
//! Member `m + 1` is obtained from member `m` by factorizing `H_m` at the
//! energy of one of its levels with `A = d/dx + W` and swapping the factors.
//! Which level goes is set by an [`EliminationPlan`]; in the broken phase a
//! step may remove the lowest real level or either member of a complex pair.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::darboux::LocalChain;
use crate::error::{Error, Result};
use crate::numeric::{chebyshev_grid, C64};
use crate::spectral::{classify_spectrum, find_critical_coupling, Branch, CouplingStrength, SpectralLevel, Spectrum};
use crate::wavefunctions::{proportionality, pt_defect, pt_proportionality, PiecewiseEigenfunction};

/// Closest approach to the walls and to the origin at which potentials and
/// superpotentials are evaluated by callers that sample grids.
pub const WALL_GUARD: f64 = 1e-9;
pub const ORIGIN_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `0 < x < 1`, potential `-iZ` for the bare well.
    Right,
    /// `-1 < x < 0`, potential `+iZ` for the bare well.
    Left,
}

impl Side {
    pub fn of(x: f64) -> Self {
        if x >= 0.0 {
            Side::Right
        } else {
            Side::Left
        }
    }

    /// Distance from `x` to this side's wall.
    pub fn wall_distance(self, x: f64) -> f64 {
        match self {
            Side::Right => 1.0 - x,
            Side::Left => 1.0 + x,
        }
    }
}

/// A potential given separately on the two halves of the well.
///
/// The shooting oracle only needs this interface, so it can be fed any
/// potential, not just hierarchy members.
pub trait SidedPotential {
    /// Value at distance `w ∈ (0, 1]` from the wall of `side`.
    fn at_wall_distance(&self, side: Side, w: f64) -> C64;

    /// `p` in the leading wall behaviour `p(p-1)/w²`; the regular solution
    /// starts as `w^p`.
    fn endpoint_exponent(&self) -> u32;

    fn eval(&self, x: f64) -> C64 {
        let side = Side::of(x);
        self.at_wall_distance(side, side.wall_distance(x))
    }
}

/// Potential of a hierarchy member.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePotential {
    coupling: f64,
    right: LocalChain,
    left: LocalChain,
    eliminated: Vec<SpectralLevel>,
    pt_symmetric: bool,
}

impl PiecewisePotential {
    /// `-iZ` on the right, `+iZ` on the left.
    pub fn square_well(z: f64) -> Result<Self> {
        CouplingStrength::new(z)?;
        Ok(Self::after_eliminating(z, &[]))
    }

    /// Member obtained by eliminating `levels` in order. The right side is
    /// built from their `ρ`, the left from their `σ`.
    pub(crate) fn after_eliminating(z: f64, levels: &[SpectralLevel]) -> Self {
        let right = LocalChain::new(C64::new(0.0, -z), levels.iter().map(|l| l.rho()).collect());
        let left = LocalChain::new(C64::new(0.0, z), levels.iter().map(|l| l.sigma()).collect());
        Self { coupling: z, right, left, eliminated: levels.to_vec(), pt_symmetric: conjugation_closed(levels) }
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Member depth `m` (1 for the square well).
    pub fn depth(&self) -> usize {
        self.right.depth()
    }

    /// Levels removed from the square well to reach this member.
    pub fn eliminated(&self) -> &[SpectralLevel] {
        &self.eliminated
    }

    /// Whether the eliminated energies are closed under conjugation, which
    /// makes `V(x) = conj V(-x)`.
    pub fn pt_symmetric(&self) -> bool {
        self.pt_symmetric
    }

    pub fn eval(&self, x: f64) -> C64 {
        SidedPotential::eval(self, x)
    }

    /// Same potential by the logarithmic-derivative recursion from the
    /// square well, as an independent check of the closed forms.
    pub fn eval_recursive(&self, x: f64) -> C64 {
        let side = Side::of(x);
        self.chain(side).potential_recursive(side.wall_distance(x))
    }

    pub(crate) fn chain(&self, side: Side) -> &LocalChain {
        match side {
            Side::Right => &self.right,
            Side::Left => &self.left,
        }
    }
}

impl SidedPotential for PiecewisePotential {
    fn at_wall_distance(&self, side: Side, w: f64) -> C64 {
        self.chain(side).potential(w)
    }

    fn endpoint_exponent(&self) -> u32 {
        self.depth() as u32
    }
}

fn conjugation_closed(levels: &[SpectralLevel]) -> bool {
    let mut unmatched: Vec<C64> = Vec::new();
    for level in levels {
        let e = level.energy;
        let tol = 1e-9 * e.norm().max(1.0);
        if level.branch.is_real() {
            continue;
        }
        match unmatched.iter().position(|u| (u.conj() - e).norm() <= tol) {
            Some(i) => {
                unmatched.swap_remove(i);
            }
            None => unmatched.push(e),
        }
    }
    unmatched.is_empty()
}

/// `W` for one factorization step, `V^(±) = W² ∓ W' + E₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superpotential {
    member: PiecewisePotential,
    eliminated: SpectralLevel,
}

impl Superpotential {
    fn new(member: &PiecewisePotential, eliminated: SpectralLevel) -> Self {
        Self { member: member.clone(), eliminated }
    }

    /// Energy `E₀` of the eliminated level.
    pub fn factorization_energy(&self) -> C64 {
        self.eliminated.energy
    }

    pub fn eliminated(&self) -> &SpectralLevel {
        &self.eliminated
    }

    /// The member this superpotential factorizes.
    pub fn member(&self) -> &PiecewisePotential {
        &self.member
    }

    fn side(&self, x: f64) -> (&LocalChain, C64, f64, f64) {
        match Side::of(x) {
            Side::Right => (&self.member.right, self.eliminated.rho(), -1.0, 1.0 - x),
            Side::Left => (&self.member.left, self.eliminated.sigma(), 1.0, 1.0 + x),
        }
    }

    pub fn eval(&self, x: f64) -> C64 {
        let (chain, k, sign, w) = self.side(x);
        sign * chain.superpotential(k, w).0
    }

    /// Analytic `W'(x)`.
    pub fn derivative(&self, x: f64) -> C64 {
        let (chain, k, _, w) = self.side(x);
        chain.superpotential(k, w).1
    }

    /// `-ψ₀'/ψ₀` of the eliminated eigenfunction, bypassing the closed forms.
    pub fn eval_log_derivative(&self, x: f64) -> Result<C64> {
        let (chain, k, sign, w) = self.side(x);
        let (f, _) = chain.eigen_recursive(k, w);
        if f.norm() == 0.0 || !f.is_finite() {
            return Err(Error::Node(x));
        }
        Ok(sign * chain.superpotential_recursive(k, w).0)
    }

    /// `W² - W' + E₀`, which reproduces the factorized member.
    pub fn lower_potential(&self, x: f64) -> C64 {
        let w = self.eval(x);
        w * w - self.derivative(x) + self.factorization_energy()
    }

    /// `W² + W' + E₀`, the partner.
    pub fn upper_potential(&self, x: f64) -> C64 {
        let w = self.eval(x);
        w * w + self.derivative(x) + self.factorization_energy()
    }

    /// Partner potential as a member in its own right.
    pub fn partner(&self) -> PiecewisePotential {
        let mut eliminated = self.member.eliminated.clone();
        eliminated.push(self.eliminated);
        PiecewisePotential::after_eliminating(self.member.coupling, &eliminated)
    }
}

/// Which level an elimination step removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStep {
    LowestReal,
    /// The member `E = e - iε` of the lowest remaining complex pair.
    ComplexLower,
    /// The member `E = e + iε`.
    ComplexUpper,
}

impl PlanStep {
    fn select(self, spectrum: &Spectrum) -> Option<usize> {
        let wanted = match self {
            PlanStep::LowestReal => Branch::Real,
            PlanStep::ComplexLower => Branch::ComplexPairLower,
            PlanStep::ComplexUpper => Branch::ComplexPairUpper,
        };
        spectrum.levels.iter().position(|l| l.branch == wanted)
    }

    fn token(self) -> &'static str {
        match self {
            PlanStep::LowestReal => "real",
            PlanStep::ComplexLower => "clower",
            PlanStep::ComplexUpper => "cupper",
        }
    }
}

impl FromStr for PlanStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "real" => Ok(PlanStep::LowestReal),
            "clower" => Ok(PlanStep::ComplexLower),
            "cupper" => Ok(PlanStep::ComplexUpper),
            other => Err(Error::PlanSyntax(other.to_string())),
        }
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Ordered elimination steps, written `real,clower,cupper,...`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct EliminationPlan(pub Vec<PlanStep>);

impl EliminationPlan {
    pub fn all_real(len: usize) -> Self {
        Self(vec![PlanStep::LowestReal; len])
    }

    /// Complex lower, complex upper, then real steps.
    pub fn lower_first(len: usize) -> Self {
        Self::complex_first(PlanStep::ComplexLower, PlanStep::ComplexUpper, len)
    }

    /// Complex upper, complex lower, then real steps.
    pub fn upper_first(len: usize) -> Self {
        Self::complex_first(PlanStep::ComplexUpper, PlanStep::ComplexLower, len)
    }

    fn complex_first(a: PlanStep, b: PlanStep, len: usize) -> Self {
        let mut steps = vec![a, b];
        steps.resize(len.max(2), PlanStep::LowestReal);
        steps.truncate(len);
        Self(steps)
    }

    pub fn steps(&self) -> &[PlanStep] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for EliminationPlan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Ok(Self::default());
        }
        s.split(',').map(str::parse).collect::<Result<Vec<_>>>().map(Self)
    }
}

impl fmt::Display for EliminationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

/// One member `H_m` of a hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyMember {
    pub depth: usize,
    pub potential: PiecewisePotential,
    /// Superpotential to the next member, if the plan has a next step.
    pub superpotential: Option<Superpotential>,
    pub spectrum: Spectrum,
    /// Levels removed so far, in order.
    pub eliminated: Vec<SpectralLevel>,
    pub plan_prefix: EliminationPlan,
}

impl HierarchyMember {
    /// Eigenfunction of the `n`-th remaining level.
    pub fn eigenfunction(&self, n: usize) -> Result<PiecewiseEigenfunction> {
        let level = self.spectrum.levels.get(n).ok_or_else(|| {
            Error::Domain(format!("member {} has {} levels, asked for {n}", self.depth, self.spectrum.levels.len()))
        })?;
        Ok(PiecewiseEigenfunction::from_chains(
            *level,
            self.potential.right.clone(),
            self.potential.left.clone(),
        ))
    }

    /// Superpotential removing the level `step` selects.
    pub fn superpotential_for(&self, step: PlanStep, step_index: usize) -> Result<Superpotential> {
        let idx = step.select(&self.spectrum).ok_or_else(|| Error::IllegalPlanStep {
            step: step_index,
            reason: format!("member {} has no level for `{step}`", self.depth),
        })?;
        Ok(Superpotential::new(&self.potential, self.spectrum.levels[idx]))
    }
}

/// `W₁` of the square well eliminating level `index` of `spectrum`.
pub fn superpotential_w1(spectrum: &Spectrum, index: usize) -> Result<Superpotential> {
    let level = spectrum.levels.get(index).ok_or_else(|| Error::IllegalPlanStep {
        step: 0,
        reason: format!("spectrum has {} levels, asked for {index}", spectrum.levels.len()),
    })?;
    let well = PiecewisePotential::square_well(spectrum.z())?;
    Ok(Superpotential::new(&well, *level))
}

/// `V^(-) = W² + W' + E₀` in closed form.
pub fn partner_potential(w: &Superpotential) -> PiecewisePotential {
    w.partner()
}

/// Superpotential from `member` to the next one, per its plan.
pub fn superpotential_next(member: &HierarchyMember) -> Result<Superpotential> {
    member.superpotential.clone().ok_or_else(|| Error::IllegalPlanStep {
        step: member.depth - 1,
        reason: format!("member {} has no planned next step", member.depth),
    })
}

/// Third member after eliminating levels 0 and 1 of `spectrum`.
pub fn potential_v3(spectrum: &Spectrum) -> Result<PiecewisePotential> {
    if spectrum.levels.len() < 2 {
        return Err(Error::IllegalPlanStep { step: 1, reason: "need two levels".into() });
    }
    Ok(PiecewisePotential::after_eliminating(spectrum.z(), &spectrum.levels[..2]))
}

/// `(d/dx + W) ψ` at `x`, unnormalized.
pub fn apply_intertwiner(w: &Superpotential, psi: &PiecewiseEigenfunction, x: f64) -> C64 {
    psi.derivative(x) + w.eval(x) * psi.eval(x)
}

const ANNIHILATION_PROBES: [f64; 4] = [-0.7, -0.3, 0.3, 0.7];

/// Partner eigenfunction `A ψ`, renormalized to the origin convention.
pub fn intertwine(w: &Superpotential, psi: &PiecewiseEigenfunction) -> Result<PiecewiseEigenfunction> {
    let (right, left) = psi.chains();
    if right != &w.member.right || left != &w.member.left {
        return Err(Error::InvalidConfig("eigenfunction and superpotential belong to different members".into()));
    }
    let annihilated = ANNIHILATION_PROBES.iter().all(|&x| {
        let g = apply_intertwiner(w, psi, x);
        g.norm() <= 1e-10 * (psi.derivative(x).norm() + (w.eval(x) * psi.eval(x)).norm())
    });
    if annihilated {
        return Err(Error::Annihilated);
    }
    let partner = w.partner();
    Ok(PiecewiseEigenfunction::from_chains(*psi.level(), partner.right, partner.left))
}

/// Members `1..=depth` following `plan`. The square-well spectrum is
/// computed with `levels + depth - 1` levels so that every member keeps at
/// least `levels`.
pub fn build_hierarchy(z: f64, plan: &EliminationPlan, depth: usize, levels: usize) -> Result<Vec<HierarchyMember>> {
    if depth == 0 {
        return Err(Error::InvalidConfig("depth must be at least 1".into()));
    }
    if plan.len() + 1 < depth {
        return Err(Error::IllegalPlanStep {
            step: plan.len(),
            reason: format!("plan has {} steps, depth {depth} needs {}", plan.len(), depth - 1),
        });
    }
    let spectrum = classify_spectrum(z, levels + depth - 1)?;
    let coupling = spectrum.coupling;
    let mut members: Vec<HierarchyMember> = Vec::with_capacity(depth);
    let mut current = HierarchyMember {
        depth: 1,
        potential: PiecewisePotential::square_well(z)?,
        superpotential: None,
        spectrum,
        eliminated: Vec::new(),
        plan_prefix: EliminationPlan::default(),
    };
    for m in 1..=depth {
        if m == depth {
            if let Some(&step) = plan.steps().get(m - 1) {
                current.superpotential = current.superpotential_for(step, m - 1).ok();
            }
            members.push(current);
            break;
        }
        let step = plan.steps()[m - 1];
        let w = current.superpotential_for(step, m - 1)?;
        current.superpotential = Some(w.clone());
        let mut eliminated = current.eliminated.clone();
        eliminated.push(w.eliminated);
        let remaining: Vec<SpectralLevel> =
            current.spectrum.levels.iter().filter(|l| **l != w.eliminated).copied().collect();
        let mut plan_prefix = current.plan_prefix.clone();
        plan_prefix.0.push(step);
        let next = HierarchyMember {
            depth: m + 1,
            potential: PiecewisePotential::after_eliminating(z, &eliminated),
            superpotential: None,
            spectrum: Spectrum::reindexed(coupling, remaining),
            eliminated,
            plan_prefix,
        };
        members.push(current);
        current = next;
    }
    Ok(members)
}

/// Grid deviations of the relations between the hierarchies that start by
/// removing the lower and the upper member of the lowest complex pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationsReport {
    pub coupling: f64,
    /// `max |V^(3)_2(x) - conj V^(2)_2(-x)|`, relative to `max(1, |V|)`.
    pub v2_mirror_deviation: f64,
    /// `max |V^(3)_3 - V^(2)_3|`, relative to `max(1, |V|)`.
    pub v3_deviation: f64,
    /// Largest variance of `ψ^(3)_{m,n}(x) / conj ψ^(2)_{m,n}(-x)`, members 2 and 3.
    pub eigenfunction_mirror_variance: f64,
    /// Largest `|Im r| / |r|` of those mean ratios.
    pub eigenfunction_mirror_phase: f64,
    /// Whether `V^(2)_3` carries the PT flag.
    pub member3_pt_flag: bool,
    /// `pt_defect` of `V^(2)_3` on the grid.
    pub member3_potential_pt_defect: f64,
    /// PT-defect of `ψ^(2)_{3,n}` for each retained level.
    pub member3_eigenfunction_pt_defect: Vec<f64>,
    /// Variance of `conj ψ^(2)_{3,n}(-x) / ψ^(2)_{3,n}(x)`.
    pub member3_pt_ratio_variance: Vec<f64>,
}

/// Levels per member used by [`hierarchy_relations_check`].
pub const RELATIONS_LEVELS: usize = 5;

/// Compare the lower-first and upper-first hierarchies at `z`, which must
/// lie between the first two critical couplings.
pub fn hierarchy_relations_check(z: f64) -> Result<RelationsReport> {
    let c0 = find_critical_coupling(0)?.z_crit;
    let c1 = find_critical_coupling(1)?.z_crit;
    if !(z > c0 && z < c1) {
        return Err(Error::Domain(format!("coupling {z} must lie in ({c0}, {c1})")));
    }
    let grid = chebyshev_grid(101, 0.999);
    let lower = build_hierarchy(z, &EliminationPlan::lower_first(2), 3, RELATIONS_LEVELS)?;
    let upper = build_hierarchy(z, &EliminationPlan::upper_first(2), 3, RELATIONS_LEVELS)?;

    let rel = |a: C64, b: C64| (a - b).norm() / a.norm().max(1.0);
    let mut v2 = 0.0f64;
    let mut v3 = 0.0f64;
    for &x in &grid {
        v2 = v2.max(rel(upper[1].potential.eval(x), lower[1].potential.eval(-x).conj()));
        v3 = v3.max(rel(upper[2].potential.eval(x), lower[2].potential.eval(x)));
    }

    let mut variance = 0.0f64;
    let mut phase = 0.0f64;
    for m in 1..3 {
        let count = upper[m].spectrum.levels.len().min(lower[m].spectrum.levels.len()).min(RELATIONS_LEVELS);
        for n in 0..count {
            let a = upper[m].eigenfunction(n)?;
            let b = lower[m].eigenfunction(n)?;
            let p = proportionality(|x| b.eval(-x).conj(), |x| a.eval(x), &grid)?;
            variance = variance.max(p.variance);
            phase = phase.max(p.phase_defect());
        }
    }

    let member3 = &lower[2];
    let mut defects = Vec::new();
    let mut ratios = Vec::new();
    for n in 0..member3.spectrum.levels.len().min(RELATIONS_LEVELS) {
        let psi = member3.eigenfunction(n)?;
        defects.push(pt_defect(|x| psi.eval(x), &grid)?);
        ratios.push(pt_proportionality(|x| psi.eval(x), &grid)?.variance);
    }

    Ok(RelationsReport {
        coupling: z,
        v2_mirror_deviation: v2,
        v3_deviation: v3,
        eigenfunction_mirror_variance: variance,
        eigenfunction_mirror_phase: phase,
        member3_pt_flag: member3.potential.pt_symmetric(),
        member3_potential_pt_defect: pt_defect(|x| member3.potential.eval(x), &grid)?,
        member3_eigenfunction_pt_defect: defects,
        member3_pt_ratio_variance: ratios,
    })
}
