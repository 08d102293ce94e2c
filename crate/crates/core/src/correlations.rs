//! Probability tables for Bell scenarios, with and without the no-detection
//! symbol, and the conversions between them.
//!
//! Every table is stored flat, input tuple major: the entry for outcome tuple
//! `a` and input tuple `x` lives at `index(x) * outcome_tuples + index(a)`.
//! Tuples are encoded mixed-radix with party 0 most significant. In lossy
//! tables the no-detection symbol of party `i` occupies the extra digit `m_i`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization slack for synthetic tables.
pub const NORM_TOL: f64 = 1e-6;
/// Normalization slack for ingested measurement tables.
pub const INGEST_TOL: f64 = 5e-4;

const MAX_TABLE_ENTRIES: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct Scenario {
    parties: usize,
    inputs: Vec<usize>,
    outcomes: Vec<usize>,
}

#[derive(Deserialize)]
struct RawScenario {
    parties: usize,
    inputs: Vec<usize>,
    outcomes: Vec<usize>,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(raw: RawScenario) -> Result<Self> {
        if raw.inputs.len() != raw.parties || raw.outcomes.len() != raw.parties {
            return Err(Error::InvalidScenario(format!(
                "declared {} parties but got {} input and {} outcome counts",
                raw.parties,
                raw.inputs.len(),
                raw.outcomes.len()
            )));
        }
        Scenario::new(raw.inputs, raw.outcomes)
    }
}

impl Scenario {
    /// `inputs[i]` and `outcomes[i]` are the alphabet sizes of party `i`.
    /// The no-detection symbol is not counted in `outcomes`.
    pub fn new(inputs: Vec<usize>, outcomes: Vec<usize>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::InvalidScenario("need at least one party".into()));
        }
        if inputs.len() != outcomes.len() {
            return Err(Error::InvalidScenario(
                "inputs and outcomes must list one size per party".into(),
            ));
        }
        if inputs.iter().chain(outcomes.iter()).any(|&n| n == 0) {
            return Err(Error::InvalidScenario(
                "every alphabet needs at least one symbol".into(),
            ));
        }
        let s = Scenario {
            parties: inputs.len(),
            inputs,
            outcomes,
        };
        let lossy = checked_product(s.outcomes.iter().map(|m| m + 1));
        let total = lossy.and_then(|l| l.checked_mul(checked_product(s.inputs.iter().copied())?));
        match total {
            Some(n) if n <= MAX_TABLE_ENTRIES => Ok(s),
            _ => Err(Error::InvalidScenario("probability table too large".into())),
        }
    }

    /// Two parties, two inputs and two outcomes each.
    pub fn bipartite_binary() -> Self {
        Scenario::new(vec![2, 2], vec![2, 2]).expect("static scenario")
    }

    pub fn single_party(&self, party: usize) -> Scenario {
        Scenario {
            parties: 1,
            inputs: vec![self.inputs[party]],
            outcomes: vec![self.outcomes[party]],
        }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn is_bipartite_binary(&self) -> bool {
        self.parties == 2 && self.inputs == [2, 2] && self.outcomes == [2, 2]
    }

    pub fn input_tuples(&self) -> usize {
        self.inputs.iter().product()
    }

    pub fn outcome_tuples(&self) -> usize {
        self.outcomes.iter().product()
    }

    pub fn lossy_outcome_tuples(&self) -> usize {
        self.outcomes.iter().map(|m| m + 1).product()
    }

    pub fn input_index(&self, inputs: &[usize]) -> usize {
        encode(inputs, &self.inputs)
    }

    pub fn outcome_index(&self, outcomes: &[usize]) -> usize {
        encode(outcomes, &self.outcomes)
    }

    pub fn input_tuple(&self, index: usize) -> Vec<usize> {
        decode(index, &self.inputs)
    }

    pub fn outcome_tuple(&self, index: usize) -> Vec<usize> {
        decode(index, &self.outcomes)
    }

    pub fn lossy_index(&self, clicks: &[Click]) -> usize {
        let digits: Vec<usize> = clicks
            .iter()
            .zip(&self.outcomes)
            .map(|(c, &m)| match c {
                Click::Outcome(a) => *a,
                Click::NoDetection => m,
            })
            .collect();
        let radices: Vec<usize> = self.outcomes.iter().map(|m| m + 1).collect();
        encode(&digits, &radices)
    }

    pub fn lossy_tuple(&self, index: usize) -> Vec<Click> {
        let radices: Vec<usize> = self.outcomes.iter().map(|m| m + 1).collect();
        decode(index, &radices)
            .into_iter()
            .zip(&self.outcomes)
            .map(|(d, &m)| if d == m { Click::NoDetection } else { Click::Outcome(d) })
            .collect()
    }

    /// Lossy index of the all-detected tuple `outcomes`.
    pub fn detected_lossy_index(&self, outcome_index: usize) -> usize {
        let clicks: Vec<Click> = self
            .outcome_tuple(outcome_index)
            .into_iter()
            .map(Click::Outcome)
            .collect();
        self.lossy_index(&clicks)
    }

    pub(crate) fn check_inputs(&self, inputs: &[usize]) -> Result<()> {
        check_digits(inputs, &self.inputs, "input")
    }

    pub(crate) fn check_outcomes(&self, outcomes: &[usize]) -> Result<()> {
        check_digits(outcomes, &self.outcomes, "outcome")
    }

    pub(crate) fn check_clicks(&self, clicks: &[Click]) -> Result<()> {
        if clicks.len() != self.parties {
            return Err(Error::InvalidTable(format!(
                "outcome tuple has {} entries for {} parties",
                clicks.len(),
                self.parties
            )));
        }
        for (c, &m) in clicks.iter().zip(&self.outcomes) {
            if let Click::Outcome(a) = c {
                if *a >= m {
                    return Err(Error::InvalidTable(format!("outcome {a} out of range 0..{m}")));
                }
            }
        }
        Ok(())
    }
}

fn checked_product(it: impl Iterator<Item = usize>) -> Option<usize> {
    it.fold(Some(1usize), |acc, n| acc?.checked_mul(n))
}

fn encode(digits: &[usize], radices: &[usize]) -> usize {
    digits
        .iter()
        .zip(radices)
        .fold(0, |acc, (&d, &r)| acc * r + d)
}

fn decode(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    out
}

fn check_digits(digits: &[usize], radices: &[usize], what: &str) -> Result<()> {
    if digits.len() != radices.len() {
        return Err(Error::InvalidTable(format!(
            "{what} tuple has {} entries for {} parties",
            digits.len(),
            radices.len()
        )));
    }
    for (&d, &r) in digits.iter().zip(radices) {
        if d >= r {
            return Err(Error::InvalidTable(format!("{what} {d} out of range 0..{r}")));
        }
    }
    Ok(())
}

/// One party's recorded result: an outcome label or the no-detection symbol.
///
/// Serialized as an integer or `null`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Option<usize>", into = "Option<usize>")]
pub enum Click {
    Outcome(usize),
    NoDetection,
}

impl From<Option<usize>> for Click {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Click::NoDetection, Click::Outcome)
    }
}

impl From<Click> for Option<usize> {
    fn from(c: Click) -> Self {
        match c {
            Click::Outcome(a) => Some(a),
            Click::NoDetection => None,
        }
    }
}

fn check_entries(table: &[f64], tol: f64) -> Result<()> {
    for &p in table {
        if !p.is_finite() || p < -tol || p > 1.0 + tol {
            return Err(Error::InvalidTable(format!("entry {p} is not a probability")));
        }
    }
    Ok(())
}

fn check_rows(scenario: &Scenario, table: &[f64], row_len: usize, tol: f64) -> Result<()> {
    for (i, row) in table.chunks(row_len).enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::InvalidTable(format!(
                "row for inputs {:?} sums to {s}",
                scenario.input_tuple(i)
            )));
        }
    }
    Ok(())
}

/// Conditional correlations P(a|x) over detected outcomes only.
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<f64>,
}

impl Behavior {
    pub fn new(scenario: Scenario, table: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(scenario, table, NORM_TOL)
    }

    pub fn with_tolerance(scenario: Scenario, table: Vec<f64>, tol: f64) -> Result<Self> {
        let row = scenario.outcome_tuples();
        if table.len() != row * scenario.input_tuples() {
            return Err(Error::InvalidTable(format!(
                "expected {} entries, got {}",
                row * scenario.input_tuples(),
                table.len()
            )));
        }
        check_entries(&table, tol)?;
        check_rows(&scenario, &table, row, tol)?;
        Ok(Behavior { scenario, table })
    }

    /// Builds a behavior from `f(outcomes, inputs)`.
    pub fn from_fn(scenario: Scenario, f: impl Fn(&[usize], &[usize]) -> f64) -> Result<Self> {
        let table = tabulate(&scenario, &f);
        Behavior::new(scenario, table)
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let p = 1.0 / scenario.outcome_tuples() as f64;
        let table = vec![p; scenario.outcome_tuples() * scenario.input_tuples()];
        Behavior { scenario, table }
    }

    /// Deterministic local behavior; `responses[party][input]` is the outcome.
    pub fn deterministic(scenario: Scenario, responses: &[Vec<usize>]) -> Result<Self> {
        if responses.len() != scenario.parties()
            || responses
                .iter()
                .zip(scenario.inputs())
                .any(|(r, &n)| r.len() != n)
        {
            return Err(Error::InvalidTable("response table does not match scenario".into()));
        }
        Behavior::from_fn(scenario, |a, x| {
            let hit = a
                .iter()
                .zip(x)
                .zip(responses)
                .all(|((&ai, &xi), r)| r[xi] == ai);
            if hit {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn get(&self, outcomes: &[usize], inputs: &[usize]) -> f64 {
        let s = &self.scenario;
        self.table[s.input_index(inputs) * s.outcome_tuples() + s.outcome_index(outcomes)]
    }

    pub fn row(&self, input_index: usize) -> &[f64] {
        let n = self.scenario.outcome_tuples();
        &self.table[input_index * n..(input_index + 1) * n]
    }

    /// Largest change of any single-party marginal under a change of the
    /// other parties' inputs. Zero for non-signaling behaviors.
    pub fn signaling_deviation(&self) -> f64 {
        (0..self.scenario.parties())
            .map(|p| marginal(self, p).expect("valid party").signaling_deviation())
            .fold(0.0, f64::max)
    }
}

fn tabulate(scenario: &Scenario, f: &impl Fn(&[usize], &[usize]) -> f64) -> Vec<f64> {
    let mut table = Vec::with_capacity(scenario.input_tuples() * scenario.outcome_tuples());
    for xi in 0..scenario.input_tuples() {
        let x = scenario.input_tuple(xi);
        for ai in 0..scenario.outcome_tuples() {
            table.push(f(&scenario.outcome_tuple(ai), &x));
        }
    }
    table
}

/// Conditional correlations including the no-detection symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct LossyBehavior {
    scenario: Scenario,
    table: Vec<f64>,
}

impl LossyBehavior {
    pub fn new(scenario: Scenario, table: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(scenario, table, NORM_TOL)
    }

    pub fn with_tolerance(scenario: Scenario, table: Vec<f64>, tol: f64) -> Result<Self> {
        let row = scenario.lossy_outcome_tuples();
        if table.len() != row * scenario.input_tuples() {
            return Err(Error::InvalidTable(format!(
                "expected {} entries, got {}",
                row * scenario.input_tuples(),
                table.len()
            )));
        }
        check_entries(&table, tol)?;
        check_rows(&scenario, &table, row, tol)?;
        Ok(LossyBehavior { scenario, table })
    }

    /// Embeds a lossless behavior (zero mass on every no-detection tuple).
    pub fn from_lossless(b: &Behavior) -> Self {
        let s = b.scenario().clone();
        let row = s.lossy_outcome_tuples();
        let mut table = vec![0.0; row * s.input_tuples()];
        for xi in 0..s.input_tuples() {
            for (ai, &p) in b.row(xi).iter().enumerate() {
                table[xi * row + s.detected_lossy_index(ai)] = p;
            }
        }
        LossyBehavior { scenario: s, table }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn get(&self, clicks: &[Click], inputs: &[usize]) -> f64 {
        let s = &self.scenario;
        self.table[s.input_index(inputs) * s.lossy_outcome_tuples() + s.lossy_index(clicks)]
    }

    pub fn row(&self, input_index: usize) -> &[f64] {
        let n = self.scenario.lossy_outcome_tuples();
        &self.table[input_index * n..(input_index + 1) * n]
    }

    /// Probability that every party registers an outcome, per input tuple.
    pub fn detected_mass(&self, input_index: usize) -> f64 {
        let row = self.row(input_index);
        (0..self.scenario.outcome_tuples())
            .map(|ai| row[self.scenario.detected_lossy_index(ai)])
            .sum()
    }
}

/// Unconditional P(a, x), input distribution included.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    scenario: Scenario,
    table: Vec<f64>,
    uncertainty: Option<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(scenario: Scenario, table: Vec<f64>, uncertainty: Option<Vec<f64>>) -> Result<Self> {
        Self::with_tolerance(scenario, table, uncertainty, NORM_TOL)
    }

    pub fn with_tolerance(
        scenario: Scenario,
        table: Vec<f64>,
        uncertainty: Option<Vec<f64>>,
        tol: f64,
    ) -> Result<Self> {
        let n = scenario.outcome_tuples() * scenario.input_tuples();
        if table.len() != n {
            return Err(Error::InvalidTable(format!("expected {n} entries, got {}", table.len())));
        }
        if let Some(u) = &uncertainty {
            if u.len() != n || u.iter().any(|e| !e.is_finite() || *e < 0.0) {
                return Err(Error::InvalidTable("malformed uncertainty table".into()));
            }
        }
        check_entries(&table, tol)?;
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidTable(format!("entries sum to {total}")));
        }
        Ok(JointDistribution {
            scenario,
            table,
            uncertainty,
        })
    }

    /// Recombines a behavior with an input distribution: P(a,x) = P(a|x) P(x).
    pub fn from_conditional(b: &Behavior, inputs: &InputDistribution) -> Result<Self> {
        let s = b.scenario();
        if inputs.probs.len() != s.input_tuples() {
            return Err(Error::shape(
                format!("{} input probabilities", s.input_tuples()),
                format!("{}", inputs.probs.len()),
            ));
        }
        let n = s.outcome_tuples();
        let table = b
            .table()
            .iter()
            .enumerate()
            .map(|(i, p)| p * inputs.probs[i / n])
            .collect();
        JointDistribution::new(s.clone(), table, None)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn uncertainty(&self) -> Option<&[f64]> {
        self.uncertainty.as_deref()
    }

    pub fn get(&self, outcomes: &[usize], inputs: &[usize]) -> f64 {
        self.table[self.flat_index(outcomes, inputs)]
    }

    pub fn error(&self, outcomes: &[usize], inputs: &[usize]) -> Option<f64> {
        let i = self.flat_index(outcomes, inputs);
        self.uncertainty.as_ref().map(|u| u[i])
    }

    pub fn flat_index(&self, outcomes: &[usize], inputs: &[usize]) -> usize {
        let s = &self.scenario;
        s.input_index(inputs) * s.outcome_tuples() + s.outcome_index(outcomes)
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    /// Divides every entry (and its error) by the total mass.
    pub fn renormalized(&self) -> Self {
        let total = self.total();
        JointDistribution {
            scenario: self.scenario.clone(),
            table: self.table.iter().map(|p| p / total).collect(),
            uncertainty: self
                .uncertainty
                .as_ref()
                .map(|u| u.iter().map(|e| e / total).collect()),
        }
    }

    pub fn with_uncertainty(mut self, uncertainty: Option<Vec<f64>>) -> Result<Self> {
        if let Some(u) = &uncertainty {
            if u.len() != self.table.len() {
                return Err(Error::InvalidTable("malformed uncertainty table".into()));
            }
        }
        self.uncertainty = uncertainty;
        Ok(self)
    }
}

/// P(x) over input tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct InputDistribution {
    pub probs: Vec<f64>,
}

/// Observed joint detection probability per input tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyMap {
    scenario: Scenario,
    values: Vec<f64>,
}

impl EfficiencyMap {
    pub fn new(scenario: Scenario, values: Vec<f64>) -> Result<Self> {
        if values.len() != scenario.input_tuples() {
            return Err(Error::shape(
                format!("{} efficiencies", scenario.input_tuples()),
                values.len().to_string(),
            ));
        }
        if let Some(&v) = values.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
            return Err(Error::InvalidEfficiency { value: v });
        }
        Ok(EfficiencyMap { scenario, values })
    }

    pub fn uniform(scenario: Scenario, eta: f64) -> Result<Self> {
        let n = scenario.input_tuples();
        EfficiencyMap::new(scenario, vec![eta; n])
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, inputs: &[usize]) -> f64 {
        self.values[self.scenario.input_index(inputs)]
    }
}

/// Integer counts over (outcomes, inputs), same layout as a joint table.
#[derive(Clone, Debug, PartialEq)]
pub struct Counts {
    scenario: Scenario,
    table: Vec<u64>,
}

impl Counts {
    pub fn new(scenario: Scenario, table: Vec<u64>) -> Result<Self> {
        let n = scenario.outcome_tuples() * scenario.input_tuples();
        if table.len() != n {
            return Err(Error::InvalidTable(format!("expected {n} counts, got {}", table.len())));
        }
        Ok(Counts { scenario, table })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn total(&self) -> u64 {
        self.table.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
}

/// How `from_counts` attaches per-entry standard errors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EstimatorConfig {
    /// Multinomial resampling instead of the closed-form sqrt(p(1-p)/n).
    pub bootstrap: Option<BootstrapConfig>,
}

pub fn from_counts(counts: &Counts, config: &EstimatorConfig) -> Result<JointDistribution> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::EmptyData);
    }
    let n = total as f64;
    let table: Vec<f64> = counts.table.iter().map(|&c| c as f64 / n).collect();
    let uncertainty = match config.bootstrap {
        None => table.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect(),
        Some(cfg) => bootstrap_errors(&table, total, cfg),
    };
    JointDistribution::new(counts.scenario.clone(), table, Some(uncertainty))
}

fn bootstrap_errors(p: &[f64], total: u64, cfg: BootstrapConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sum = vec![0.0; p.len()];
    let mut sum_sq = vec![0.0; p.len()];
    for _ in 0..cfg.resamples {
        let mut remaining = total;
        let mut mass_left = 1.0;
        for (i, &pi) in p.iter().enumerate() {
            let k = if remaining == 0 || pi <= 0.0 {
                0
            } else if pi >= mass_left || i + 1 == p.len() {
                remaining
            } else {
                Binomial::new(remaining, (pi / mass_left).clamp(0.0, 1.0))
                    .expect("probability in range")
                    .sample(&mut rng)
            };
            remaining -= k;
            mass_left -= pi;
            let est = k as f64 / total as f64;
            sum[i] += est;
            sum_sq[i] += est * est;
        }
    }
    let r = cfg.resamples.max(1) as f64;
    sum.iter()
        .zip(&sum_sq)
        .map(|(s, sq)| {
            let mean = s / r;
            (sq / r - mean * mean).max(0.0).sqrt()
        })
        .collect()
}

/// Splits a joint table into P(a|x) and P(x).
pub fn condition_on_inputs(j: &JointDistribution) -> Result<(Behavior, InputDistribution)> {
    let s = j.scenario();
    let n = s.outcome_tuples();
    let mut probs = Vec::with_capacity(s.input_tuples());
    let mut table = Vec::with_capacity(j.table().len());
    for (xi, block) in j.table().chunks(n).enumerate() {
        let mass: f64 = block.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroInputMass {
                inputs: s.input_tuple(xi),
            });
        }
        probs.push(mass);
        table.extend(block.iter().map(|p| p / mass));
    }
    let b = Behavior::new(s.clone(), table)?;
    Ok((b, InputDistribution { probs }))
}

/// Discards every run in which some party saw no detection.
pub fn postselect(l: &LossyBehavior) -> Result<(Behavior, EfficiencyMap)> {
    let s = l.scenario();
    let n = s.outcome_tuples();
    let mut etas = Vec::with_capacity(s.input_tuples());
    let mut table = Vec::with_capacity(n * s.input_tuples());
    for xi in 0..s.input_tuples() {
        let row = l.row(xi);
        let detected: Vec<f64> = (0..n).map(|ai| row[s.detected_lossy_index(ai)]).collect();
        let eta: f64 = detected.iter().sum();
        if eta <= 0.0 {
            return Err(Error::NoDetections {
                inputs: s.input_tuple(xi),
            });
        }
        etas.push(eta.min(1.0));
        table.extend(detected.iter().map(|p| p / eta));
    }
    Ok((Behavior::new(s.clone(), table)?, EfficiencyMap::new(s.clone(), etas)?))
}

/// P(a_party | x_1..x_N) for every full input tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    party: usize,
    scenario: Scenario,
    table: Vec<f64>,
}

impl Marginal {
    pub fn party(&self) -> usize {
        self.party
    }

    pub fn get(&self, outcome: usize, inputs: &[usize]) -> f64 {
        let m = self.scenario.outcomes()[self.party];
        self.table[self.scenario.input_index(inputs) * m + outcome]
    }

    /// Max over (own input, outcome) of the spread across the other inputs.
    pub fn signaling_deviation(&self) -> f64 {
        let s = &self.scenario;
        let m = s.outcomes()[self.party];
        let mut worst = 0.0f64;
        for own in 0..s.inputs()[self.party] {
            for a in 0..m {
                let vals: Vec<f64> = (0..s.input_tuples())
                    .filter(|&xi| s.input_tuple(xi)[self.party] == own)
                    .map(|xi| self.table[xi * m + a])
                    .collect();
                let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
                let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
                worst = worst.max(hi - lo);
            }
        }
        worst
    }
}

pub fn marginal(b: &Behavior, party: usize) -> Result<Marginal> {
    let s = b.scenario();
    if party >= s.parties() {
        return Err(Error::InvalidScenario(format!(
            "party {party} out of range for {} parties",
            s.parties()
        )));
    }
    let m = s.outcomes()[party];
    let mut table = vec![0.0; s.input_tuples() * m];
    for xi in 0..s.input_tuples() {
        for (ai, &p) in b.row(xi).iter().enumerate() {
            let a = s.outcome_tuple(ai)[party];
            table[xi * m + a] += p;
        }
    }
    Ok(Marginal {
        party,
        scenario: s.clone(),
        table,
    })
}
