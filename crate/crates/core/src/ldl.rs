//! Limited-detection local (LDL) polytope: local models whose every response
//! function fires with probability between `eta_min` and `eta_max`, and the
//! postselected behaviors they can explain.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{Behavior, Click, EfficiencyMap, LossyBehavior, Scenario};
use crate::error::{Error, Result};
use crate::lp::{solve_feasibility, Certificate, FeasibilityProblem, Scalar, SolverOptions};

pub const DEFAULT_VERTEX_CAP: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Each party's detection probability lies in `[eta_min, eta_max]`.
    #[default]
    PerParty,
    /// The probability that both parties detect lies in `[eta_min, eta_max]`.
    Joint,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::PerParty => "per-party",
            Convention::Joint => "joint",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionBounds {
    pub eta_min: f64,
    pub eta_max: f64,
    #[serde(default)]
    pub convention: Convention,
}

impl DetectionBounds {
    pub fn new(eta_min: f64, eta_max: f64, convention: Convention) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta_min) || !(0.0..=1.0).contains(&eta_max) || eta_min > eta_max {
            return Err(Error::InvalidBounds(format!(
                "need 0 <= eta_min <= eta_max <= 1, got [{eta_min}, {eta_max}]"
            )));
        }
        Ok(DetectionBounds {
            eta_min,
            eta_max,
            convention,
        })
    }

    pub fn per_party(eta_min: f64, eta_max: f64) -> Result<Self> {
        Self::new(eta_min, eta_max, Convention::PerParty)
    }

    pub fn ratio(&self) -> f64 {
        if self.eta_max == 0.0 {
            1.0
        } else {
            self.eta_min / self.eta_max
        }
    }

    /// Range of the all-parties detection probability.
    pub fn joint_mass_range(&self, parties: usize) -> (f64, f64) {
        match self.convention {
            Convention::PerParty => (self.eta_min.powi(parties as i32), self.eta_max.powi(parties as i32)),
            Convention::Joint => (self.eta_min, self.eta_max),
        }
    }

    pub fn level(&self, level: Level) -> f64 {
        match level {
            Level::Min => self.eta_min,
            Level::Max => self.eta_max,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdChoice {
    pub outcome: usize,
    pub level: Level,
    pub eta: f64,
}

/// Deterministic single-party response that fires with probability `eta` per
/// input and reports `outcome` when it does.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdVertex {
    outcomes: usize,
    choices: Vec<LdChoice>,
}

impl LdVertex {
    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn choices(&self) -> &[LdChoice] {
        &self.choices
    }

    pub fn entry(&self, input: usize, click: Click) -> f64 {
        let c = &self.choices[input];
        match click {
            Click::Outcome(a) if a == c.outcome => c.eta,
            Click::Outcome(_) => 0.0,
            Click::NoDetection => 1.0 - c.eta,
        }
    }

    fn entry_as<T: Scalar>(&self, input: usize, click: Click) -> T {
        let c = &self.choices[input];
        let eta = T::from_f64(c.eta);
        match click {
            Click::Outcome(a) if a == c.outcome => eta,
            Click::Outcome(_) => T::zero(),
            Click::NoDetection => T::one().sub(&eta),
        }
    }
}

/// All single-party LD vertices, ordered by (input, outcome, level) with
/// input 0 most significant. Choices that realize the same response (equal
/// levels, or a zero level that makes the outcome irrelevant) are kept once.
pub fn enumerate_ld_vertices(party: &Scenario, bounds: &DetectionBounds) -> Result<Vec<LdVertex>> {
    if party.parties() != 1 {
        return Err(Error::shape("single-party scenario", format!("{} parties", party.parties())));
    }
    let (n, m) = (party.inputs()[0], party.outcomes()[0]);
    let options = input_options(m, bounds);
    let count = checked_pow(options.len() as u128, n).unwrap_or(u128::MAX);
    if count > DEFAULT_VERTEX_CAP {
        return Err(Error::TooLarge {
            count,
            cap: DEFAULT_VERTEX_CAP,
        });
    }
    let radices = vec![options.len(); n];
    Ok((0..count as usize)
        .map(|k| LdVertex {
            outcomes: m,
            choices: mixed_radix(k, &radices).into_iter().map(|d| options[d]).collect(),
        })
        .collect())
}

fn input_options(m: usize, bounds: &DetectionBounds) -> Vec<LdChoice> {
    let mut out: Vec<LdChoice> = Vec::with_capacity(2 * m);
    for outcome in 0..m {
        for level in [Level::Min, Level::Max] {
            let eta = bounds.level(level);
            let dup = out
                .iter()
                .any(|c| c.eta == eta && (eta == 0.0 || c.outcome == outcome));
            if !dup {
                out.push(LdChoice { outcome, level, eta });
            }
        }
    }
    out
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base))
}

fn mixed_radix(mut k: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = k % r;
        k /= r;
    }
    out
}

/// Product vertices of the LDL polytope, stored as per-party assignments.
#[derive(Clone, Debug)]
pub struct VertexSet {
    scenario: Scenario,
    bounds: Vec<DetectionBounds>,
    party_vertices: Vec<Vec<LdVertex>>,
    assignments: Vec<Vec<usize>>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn bounds(&self) -> &[DetectionBounds] {
        &self.bounds
    }

    pub fn party_vertices(&self, party: usize) -> &[LdVertex] {
        &self.party_vertices[party]
    }

    /// Index into `party_vertices(p)` for each party.
    pub fn assignment(&self, i: usize) -> &[usize] {
        &self.assignments[i]
    }

    fn factors(&self, i: usize) -> impl Iterator<Item = &LdVertex> {
        self.assignments[i]
            .iter()
            .enumerate()
            .map(|(p, &v)| &self.party_vertices[p][v])
    }

    /// Full lossy table of vertex `i`.
    pub fn table_as<T: Scalar>(&self, i: usize) -> Vec<T> {
        let s = &self.scenario;
        let row = s.lossy_outcome_tuples();
        let mut out = Vec::with_capacity(row * s.input_tuples());
        for xi in 0..s.input_tuples() {
            let x = s.input_tuple(xi);
            for li in 0..row {
                let clicks = s.lossy_tuple(li);
                out.push(self.factors(i).enumerate().fold(T::one(), |acc, (p, v)| {
                    acc.mul(&v.entry_as::<T>(x[p], clicks[p]))
                }));
            }
        }
        out
    }

    pub fn exact_table(&self, i: usize) -> Vec<BigRational> {
        self.table_as(i)
    }

    pub fn vertex(&self, i: usize) -> LossyBehavior {
        LossyBehavior::new(self.scenario.clone(), self.table_as(i)).expect("vertex tables are normalized")
    }

    /// Detected entries only, in `(input tuple, outcome tuple)` order.
    pub fn detected_as<T: Scalar>(&self, i: usize) -> Vec<T> {
        let s = &self.scenario;
        let mut out = Vec::with_capacity(s.input_tuples() * s.outcome_tuples());
        for xi in 0..s.input_tuples() {
            let x = s.input_tuple(xi);
            for ai in 0..s.outcome_tuples() {
                let a = s.outcome_tuple(ai);
                out.push(self.factors(i).enumerate().fold(T::one(), |acc, (p, v)| {
                    acc.mul(&v.entry_as::<T>(x[p], Click::Outcome(a[p])))
                }));
            }
        }
        out
    }
}

/// Every product of per-party LD vertices; `bounds` holds one entry per party
/// or a single entry shared by all parties.
pub fn enumerate_ldl_vertices(scenario: &Scenario, bounds: &[DetectionBounds]) -> Result<VertexSet> {
    enumerate_ldl_vertices_capped(scenario, bounds, DEFAULT_VERTEX_CAP)
}

pub fn enumerate_ldl_vertices_capped(
    scenario: &Scenario,
    bounds: &[DetectionBounds],
    cap: u128,
) -> Result<VertexSet> {
    let bounds: Vec<DetectionBounds> = match bounds.len() {
        1 => vec![bounds[0]; scenario.parties()],
        n if n == scenario.parties() => bounds.to_vec(),
        n => {
            return Err(Error::shape(
                format!("{} detection bounds", scenario.parties()),
                format!("{n}"),
            ))
        }
    };
    if let Some(b) = bounds.iter().find(|b| b.convention != Convention::PerParty) {
        return Err(Error::UnsupportedConvention(format!(
            "LDL vertices are products of per-party responses; {} bounds have no product form",
            b.convention.as_str()
        )));
    }
    // Count before materializing anything.
    let mut count: u128 = 1;
    for (p, b) in bounds.iter().enumerate() {
        let per = checked_pow(input_options(scenario.outcomes()[p], b).len() as u128, scenario.inputs()[p]);
        count = per.and_then(|c| c.checked_mul(count)).unwrap_or(u128::MAX);
    }
    if count > cap {
        return Err(Error::TooLarge { count, cap });
    }
    let party_vertices = bounds
        .iter()
        .enumerate()
        .map(|(p, b)| enumerate_ld_vertices(&scenario.single_party(p), b))
        .collect::<Result<Vec<_>>>()?;
    let radices: Vec<usize> = party_vertices.iter().map(Vec::len).collect();
    let assignments = (0..count as usize)
        .into_par_iter()
        .map(|k| mixed_radix(k, &radices))
        .collect();
    Ok(VertexSet {
        scenario: scenario.clone(),
        bounds,
        party_vertices,
        assignments,
    })
}

/// What is known about the per-input-tuple detection probability `η_xy`.
#[derive(Clone, Debug, PartialEq)]
pub enum Efficiencies {
    /// Equal for every input tuple but otherwise unknown.
    UniformUnknown,
    Known(EfficiencyMap),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Membership<T> {
    /// Over the LP variables: vertex weights, then (uniform-unknown only) the
    /// total weight `s`. See [`membership_against`] for the scaling.
    pub certificate: Certificate<T>,
    /// For a feasible uniform-unknown instance, the common detection
    /// probability of the explaining model.
    pub detected_mass: Option<T>,
    pub convention: Convention,
    pub vertices: usize,
    pub notes: Vec<String>,
}

/// Is `p` the postselection of some mixture of LDL vertices?
pub fn membership_ldlps<T: Scalar>(
    p: &Behavior,
    eff: &Efficiencies,
    bounds: &DetectionBounds,
    opts: &SolverOptions,
) -> Result<Membership<T>> {
    if bounds.convention != Convention::PerParty {
        return Err(Error::UnsupportedConvention(
            "LDL membership needs per-party detection bounds".into(),
        ));
    }
    let vs = enumerate_ldl_vertices(p.scenario(), &[*bounds])?;
    membership_against(&vs, p, eff, opts)
}

/// Membership against a prepared vertex set.
///
/// With known efficiencies the LP is `Σ w_i V_i = η_xy·p`, `Σ w = 1`, `w ≥ 0`.
///
/// With a common unknown efficiency `t ∈ [lo, hi]` (the products of the
/// per-party bounds) the system `Σ w_i V_i = t·p`, `Σ w = 1` is solved in
/// the equivalent form `Σ w'_i V_i = p`, `Σ w' − s = 0`, `s ∈ [1/hi, 1/lo]`
/// with `w' = w/t`, `s = 1/t`. Fixing the data side keeps the certified
/// separation at the size of the violation instead of shrinking it by `lo`.
pub fn membership_against<T: Scalar>(
    vs: &VertexSet,
    p: &Behavior,
    eff: &Efficiencies,
    opts: &SolverOptions,
) -> Result<Membership<T>> {
    let s = vs.scenario();
    if p.scenario() != s {
        return Err(Error::shape(format!("{s:?}"), format!("{:?}", p.scenario())));
    }
    let mut notes = Vec::new();
    let problem = ldlps_problem::<T>(vs, p, eff, &mut notes)?;
    let certificate = solve_feasibility(&problem, opts)?;
    let detected_mass = match (&certificate, eff) {
        (Certificate::Feasible { point }, Efficiencies::UniformUnknown) => {
            Some(T::one().div(&point[vs.len()]))
        }
        _ => None,
    };
    Ok(Membership {
        certificate,
        detected_mass,
        convention: Convention::PerParty,
        vertices: vs.len(),
        notes,
    })
}

/// Smallest and largest all-parties detection probability, exactly in `T`.
fn mass_range<T: Scalar>(vs: &VertexSet) -> (T, T) {
    vs.bounds().iter().fold((T::one(), T::one()), |(lo, hi), b| {
        (lo.mul(&T::from_f64(b.eta_min)), hi.mul(&T::from_f64(b.eta_max)))
    })
}

fn ldlps_problem<T: Scalar>(
    vs: &VertexSet,
    p: &Behavior,
    eff: &Efficiencies,
    notes: &mut Vec<String>,
) -> Result<FeasibilityProblem<T>> {
    let s = vs.scenario();
    let n_out = s.outcome_tuples();
    let entries = s.input_tuples() * n_out;
    let columns: Vec<Vec<T>> = (0..vs.len()).into_par_iter().map(|i| vs.detected_as::<T>(i)).collect();
    let nv = columns.len();
    let (lo, hi) = mass_range::<T>(vs);
    let uniform = matches!(eff, Efficiencies::UniformUnknown);
    let nvars = nv + usize::from(uniform);

    let mut rows = Vec::with_capacity(entries + 1);
    let mut rhs = Vec::with_capacity(entries + 1);
    for k in 0..entries {
        let mut row: Vec<T> = columns.iter().map(|c| c[k].clone()).collect();
        let pk = T::from_f64(p.table()[k]);
        match eff {
            Efficiencies::UniformUnknown => {
                row.push(T::zero());
                rhs.push(pk);
            }
            Efficiencies::Known(map) => {
                rhs.push(T::from_f64(map.values()[k / n_out]).mul(&pk));
            }
        }
        rows.push(row);
    }
    let mut norm = vec![T::one(); nv];
    if uniform {
        norm.push(T::one().neg());
        rhs.push(T::zero());
    } else {
        rhs.push(T::one());
    }
    rows.push(norm);

    let mut lower = vec![Some(T::zero()); nvars];
    let mut upper = vec![None; nvars];
    if uniform {
        if hi.is_zero() {
            return Err(Error::InvalidBounds("eta_max = 0 leaves nothing to postselect".into()));
        }
        lower[nv] = Some(T::one().div(&hi));
        upper[nv] = if lo.is_zero() { None } else { Some(T::one().div(&lo)) };
    }
    if let Efficiencies::Known(map) = eff {
        if map.scenario() != s {
            return Err(Error::shape(format!("{s:?}"), format!("{:?}", map.scenario())));
        }
        let (lo, hi) = (lo.to_f64(), hi.to_f64());
        for (xi, &eta) in map.values().iter().enumerate() {
            if eta < lo || eta > hi {
                notes.push(format!(
                    "detection probability {eta} at inputs {:?} is outside the achievable range [{lo}, {hi}]",
                    s.input_tuple(xi)
                ));
            }
        }
    }
    FeasibilityProblem::new(rows, rhs, lower, upper)
}

/// Independent check of an infeasibility dual from [`membership_against`].
///
/// Reads the leading multipliers of `dual` as a linear functional `I` on
/// detected entries, finds `v* = max_v I(v)` over every vertex, and returns
/// the worst-case gap between the data and that bound once the data is
/// rescaled to an admissible detected mass: `min_η I(η·p) − v*`, divided by
/// `η` in the uniform-unknown case so it is on the same scale as the LP.
/// A positive value means `I ≤ v*` is a Bell-like inequality satisfied by
/// every LDL mixture and violated by the data. `None` when no admissible
/// rescaling separates (a zero lower detection bound with `v* > 0`).
pub fn separation_margin<T: Scalar>(
    vs: &VertexSet,
    p: &Behavior,
    eff: &Efficiencies,
    dual: &[T],
) -> Result<Option<T>> {
    let s = vs.scenario();
    let n_out = s.outcome_tuples();
    let entries = s.input_tuples() * n_out;
    if dual.len() != entries + 1 {
        return Err(Error::shape(format!("{} multipliers", entries + 1), format!("{}", dual.len())));
    }
    let y = &dual[..entries];
    let functional = |q: &[T]| q.iter().zip(y).fold(T::zero(), |acc, (a, b)| acc.add(&a.mul(b)));
    let vmax = (0..vs.len())
        .into_par_iter()
        .map(|i| functional(&vs.detected_as::<T>(i)))
        .reduce_with(|a, b| if b > a { b } else { a })
        .ok_or(Error::EmptyData)?;
    let pt: Vec<T> = p.table().iter().map(|&v| T::from_f64(v)).collect();
    Ok(match eff {
        Efficiencies::UniformUnknown => {
            // I(t p) > v*  for every t in [lo, hi]  <=>  I(p) > v*/t
            let (lo, hi) = mass_range::<T>(vs);
            let worst_t = if vmax > T::zero() { lo } else { hi };
            if worst_t.is_zero() {
                None
            } else {
                Some(functional(&pt).sub(&vmax.div(&worst_t)))
            }
        }
        Efficiencies::Known(map) => {
            let scaled: Vec<T> = pt
                .iter()
                .enumerate()
                .map(|(k, v)| T::from_f64(map.values()[k / n_out]).mul(v))
                .collect();
            Some(functional(&scaled).sub(&vmax))
        }
    })
}
