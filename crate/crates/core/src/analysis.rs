//! The LDL-Hardy inequality and the thresholds derived from it.
//!
//! With `P1 = P(00|00)`, `P2 = P(01|01)`, `P3 = P(10|10)`, `P4 = P(00|11)`
//! (postselected, outcomes `ab`, inputs `xy`), every LDL model with equal
//! detection probability for all input pairs satisfies
//!
//! ```text
//! η_min²·P1 − η_min·η_max·(P2 + P3) − η_max²·P4 ≤ 0.
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::correlations::{condition_on_inputs, Behavior, JointDistribution};
use crate::error::{Error, Result};
use crate::files::number;
use crate::ldl::{Convention, DetectionBounds};
use crate::mdl::hardy_entries;

/// `(outcomes, inputs)` of the four terms.
const TERMS: [([usize; 2], [usize; 2]); 4] = [([0, 0], [0, 0]), ([0, 1], [0, 1]), ([1, 0], [1, 0]), ([0, 0], [1, 1])];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyTerms {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    /// Standard errors, in the same order.
    pub errors: Option<[f64; 4]>,
}

impl HardyTerms {
    pub fn new(p1: f64, p2: f64, p3: f64, p4: f64) -> Self {
        HardyTerms { p1, p2, p3, p4, errors: None }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p3, self.p4]
    }

    fn from_values(v: [f64; 4], errors: Option<[f64; 4]>) -> Self {
        HardyTerms { p1: v[0], p2: v[1], p3: v[2], p4: v[3], errors }
    }

    pub fn to_json(&self) -> Value {
        let mut m = json!({ "P1": self.p1, "P2": self.p2, "P3": self.p3, "P4": self.p4 });
        if let Some(e) = self.errors {
            m["errors"] = json!({ "P1": e[0], "P2": e[1], "P3": e[2], "P4": e[3] });
        }
        m
    }
}

fn check_binary(s: &crate::correlations::Scenario) -> Result<()> {
    if s.is_bipartite_binary() {
        Ok(())
    } else {
        Err(Error::shape(
            "two parties with binary inputs and outcomes",
            format!("inputs {:?}, outcomes {:?}", s.inputs(), s.outcomes()),
        ))
    }
}

pub fn extract_hardy_terms(b: &Behavior) -> Result<HardyTerms> {
    check_binary(b.scenario())?;
    Ok(HardyTerms::from_values(TERMS.map(|(a, x)| b.get(&a, &x)), None))
}

/// Conditions on the inputs first. Entry errors, when present, are
/// propagated to first order treating entries as independent.
pub fn extract_hardy_terms_joint(j: &JointDistribution) -> Result<HardyTerms> {
    check_binary(j.scenario())?;
    let (b, inputs) = condition_on_inputs(j)?;
    let mut t = extract_hardy_terms(&b)?;
    if let Some(u) = j.uncertainty() {
        let n = j.scenario().outcome_tuples();
        t.errors = Some(TERMS.map(|(a, x)| {
            let k = j.flat_index(&a, &x);
            let block = k / n;
            let s = inputs.probs[block];
            let v = j.table()[k];
            // P = v / s with s = v + rest
            let var: f64 = (block * n..(block + 1) * n)
                .map(|i| {
                    let d = if i == k { (s - v) / (s * s) } else { -v / (s * s) };
                    d * d * u[i] * u[i]
                })
                .sum();
            var.sqrt()
        }));
    }
    Ok(t)
}

fn require_per_party(convention: Convention) -> Result<()> {
    match convention {
        Convention::PerParty => Ok(()),
        Convention::Joint => Err(Error::UnsupportedConvention(
            "the Hardy-type inequality bounds each party's detection probability".into(),
        )),
    }
}

/// Positive refutes every LDL model with these bounds, assuming the same
/// detection efficiency for all input pairs.
pub fn ldl_value(t: &HardyTerms, bounds: &DetectionBounds) -> Result<f64> {
    require_per_party(bounds.convention)?;
    let (lo, hi) = (bounds.eta_min, bounds.eta_max);
    Ok(lo * lo * t.p1 - lo * hi * (t.p2 + t.p3) - hi * hi * t.p4)
}

/// Positive root of `P1·r² − (P2+P3)·r − P4`; the inequality is violated
/// exactly when `η_min/η_max` exceeds it. Infinite when `P1 = 0`.
pub fn critical_ratio(t: &HardyTerms) -> f64 {
    if t.p1 <= 0.0 {
        return f64::INFINITY;
    }
    let s = t.p2 + t.p3;
    ((s * s + 4.0 * t.p1 * t.p4).sqrt() + s) / (2.0 * t.p1)
}

pub fn required_eta_min(t: &HardyTerms, eta_max: f64) -> f64 {
    if eta_max == 0.0 {
        return 0.0;
    }
    critical_ratio(t) * eta_max
}

/// `(J(0101) + J(1010) + J(0011)) / J(0000)`: combined measurement
/// dependence and limited detection are refuted when
/// `(ℓ/h)·(η_min/η_max)⁴` exceeds it.
pub fn mdl_ldl_threshold(j: &JointDistribution) -> Result<f64> {
    let (p0000, rest) = hardy_entries(j)?;
    Ok(if p0000 > 0.0 { rest / p0000 } else { f64::INFINITY })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum ErrorMethod {
    Delta,
    /// Gaussian resampling of every table entry from its standard error.
    Bootstrap { resamples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Uncertainties {
    pub method: ErrorMethod,
    pub critical_ratio: f64,
    /// Aligned with the `eta_max` values passed in.
    pub required_eta_min: Vec<f64>,
    pub mdl_ldl_threshold: Option<f64>,
}

/// First-order error of the critical ratio from the term errors.
pub fn critical_ratio_error(t: &HardyTerms) -> Option<f64> {
    let e = t.errors?;
    if e.iter().all(|&v| v == 0.0) {
        return Some(0.0);
    }
    let r = critical_ratio(t);
    if !r.is_finite() {
        return Some(f64::INFINITY);
    }
    let s = t.p2 + t.p3;
    let d = (s * s + 4.0 * t.p1 * t.p4).sqrt();
    if d == 0.0 {
        // s = P4 = 0: r = s/P1 near here, except for the square-root cusp in P4
        if e[3] > 0.0 {
            return Some(f64::INFINITY);
        }
        return Some((e[1] * e[1] + e[2] * e[2]).sqrt() / t.p1);
    }
    let grad = [-r * r / d, r / d, r / d, 1.0 / d];
    Some(grad.iter().zip(&e).map(|(g, s)| g * g * s * s).sum::<f64>().sqrt())
}

fn threshold_error(j: &JointDistribution) -> Option<f64> {
    let u = j.uncertainty()?;
    let (p0000, rest) = hardy_entries(j).ok()?;
    let idx = |a: [usize; 2], x: [usize; 2]| j.flat_index(&a, &x);
    let (e0, en) = (
        u[idx([0, 0], [0, 0])],
        TERMS[1..].iter().map(|&(a, x)| u[idx(a, x)].powi(2)).sum::<f64>(),
    );
    if e0 == 0.0 && en == 0.0 {
        return Some(0.0);
    }
    if p0000 <= 0.0 {
        return Some(f64::INFINITY);
    }
    Some((en / (p0000 * p0000) + rest * rest * e0 * e0 / p0000.powi(4)).sqrt())
}

/// Errors on the critical ratio, the required `η_min` values and the
/// combined threshold. `None` when the table carries no uncertainties.
pub fn propagate_errors(j: &JointDistribution, eta_max: &[f64], method: ErrorMethod) -> Result<Option<Uncertainties>> {
    check_binary(j.scenario())?;
    let Some(u) = j.uncertainty() else { return Ok(None) };
    let (cr, th) = match method {
        ErrorMethod::Delta => {
            let t = extract_hardy_terms_joint(j)?;
            (critical_ratio_error(&t).unwrap_or(0.0), threshold_error(j))
        }
        ErrorMethod::Bootstrap { resamples, seed } => {
            if resamples < 2 {
                return Err(Error::InvalidTable("bootstrap needs at least 2 resamples".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ratios = Vec::with_capacity(resamples);
            let mut thresholds = Vec::with_capacity(resamples);
            let n = j.scenario().outcome_tuples();
            for _ in 0..resamples {
                let table: Vec<f64> = j
                    .table()
                    .iter()
                    .zip(u)
                    .map(|(&v, &e)| {
                        let draw = if e > 0.0 { Normal::new(v, e).expect("finite").sample(&mut rng) } else { v };
                        draw.max(0.0)
                    })
                    .collect();
                if table.chunks(n).any(|b| b.iter().sum::<f64>() <= 0.0) {
                    continue;
                }
                let total: f64 = table.iter().sum();
                let sample = JointDistribution::with_tolerance(
                    j.scenario().clone(),
                    table.iter().map(|v| v / total).collect(),
                    None,
                    f64::INFINITY,
                )?;
                let r = critical_ratio(&extract_hardy_terms_joint(&sample)?);
                if r.is_finite() {
                    ratios.push(r);
                }
                let t = mdl_ldl_threshold(&sample)?;
                if t.is_finite() {
                    thresholds.push(t);
                }
            }
            (std_dev(&ratios), Some(std_dev(&thresholds)))
        }
    };
    Ok(Some(Uncertainties {
        method,
        critical_ratio: cr,
        required_eta_min: eta_max.iter().map(|e| cr * e).collect(),
        mdl_ldl_threshold: th,
    }))
}

fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return f64::INFINITY;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzeOptions {
    pub eta_max: Vec<f64>,
    pub convention: Convention,
    /// Divide a joint table by its total before conditioning.
    pub renormalize: bool,
    pub errors: Option<ErrorMethod>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            eta_max: vec![1.0, 0.5, 0.1],
            convention: Convention::PerParty,
            renormalize: false,
            errors: Some(ErrorMethod::Delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisReport {
    pub hardy_terms: HardyTerms,
    pub critical_ratio: f64,
    pub required_eta_min: Vec<(f64, f64)>,
    /// Needs the input distribution, so only available for joint tables.
    pub mdl_ldl_threshold: Option<f64>,
    pub errors: Option<Uncertainties>,
    pub convention: Convention,
}

fn check_eta_max(opts: &AnalyzeOptions) -> Result<()> {
    require_per_party(opts.convention)?;
    match opts.eta_max.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        Some(&value) => Err(Error::InvalidEfficiency { value }),
        None => Ok(()),
    }
}

pub fn analyze_joint(j: &JointDistribution, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    check_eta_max(opts)?;
    let owned;
    let j = if opts.renormalize {
        owned = j.renormalized();
        &owned
    } else {
        j
    };
    let t = extract_hardy_terms_joint(j)?;
    let errors = match opts.errors {
        Some(m) => propagate_errors(j, &opts.eta_max, m)?,
        None => None,
    };
    Ok(report(t, Some(mdl_ldl_threshold(j)?), errors, opts))
}

pub fn analyze_behavior(b: &Behavior, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    check_eta_max(opts)?;
    Ok(report(extract_hardy_terms(b)?, None, None, opts))
}

fn report(t: HardyTerms, threshold: Option<f64>, errors: Option<Uncertainties>, opts: &AnalyzeOptions) -> AnalysisReport {
    AnalysisReport {
        hardy_terms: t,
        critical_ratio: critical_ratio(&t),
        required_eta_min: opts.eta_max.iter().map(|&e| (e, required_eta_min(&t, e))).collect(),
        mdl_ldl_threshold: threshold,
        errors,
        convention: opts.convention,
    }
}

impl AnalysisReport {
    pub fn to_json(&self) -> Value {
        let keyed = |vals: &mut dyn Iterator<Item = (f64, f64)>| {
            Value::Object(vals.map(|(k, v)| (k.to_string(), number(v))).collect::<Map<_, _>>())
        };
        let errors = self.errors.as_ref().map(|u| {
            json!({
                "method": u.method,
                "critical_ratio": number(u.critical_ratio),
                "required_eta_min": keyed(&mut self.required_eta_min.iter().map(|p| p.0).zip(u.required_eta_min.iter().copied())),
                "mdl_ldl_threshold": u.mdl_ldl_threshold.map(number),
            })
        });
        json!({
            "hardy_terms": self.hardy_terms.to_json(),
            "critical_ratio": number(self.critical_ratio),
            "required_eta_min": keyed(&mut self.required_eta_min.iter().copied()),
            "mdl_ldl_threshold": self.mdl_ldl_threshold.map(number),
            "errors": errors,
            "assumptions": ["equal_eta_xy", self.convention.as_str()],
        })
    }

    pub fn summary(&self) -> String {
        let t = &self.hardy_terms;
        let mut out = format!(
            "P1 = {:.7}  P2 = {:.7}  P3 = {:.7}  P4 = {:.7}\n",
            t.p1, t.p2, t.p3, t.p4
        );
        let err = |v: Option<f64>| v.map_or(String::new(), |e| format!(" ± {e:.2e}"));
        out += &format!(
            "critical ratio η_min/η_max = {:.7}{}\n",
            self.critical_ratio,
            err(self.errors.as_ref().map(|u| u.critical_ratio))
        );
        for (i, (eta_max, v)) in self.required_eta_min.iter().enumerate() {
            out += &format!(
                "required η_min at η_max = {eta_max}: {v:.7}{}\n",
                err(self.errors.as_ref().map(|u| u.required_eta_min[i]))
            );
        }
        if let Some(th) = self.mdl_ldl_threshold {
            out += &format!(
                "combined threshold on (ℓ/h)(η_min/η_max)⁴: {th:.7}{}\n",
                err(self.errors.as_ref().and_then(|u| u.mdl_ldl_threshold))
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{InputDistribution, Scenario};
    use crate::files::{parse, DataFile};
    use crate::ldl::{membership_ldlps, Efficiencies};
    use crate::lp::SolverOptions;
    use crate::quantum::hardy_behavior;
    use proptest::prelude::*;

    fn measured() -> JointDistribution {
        match parse(include_str!("../fixtures/measured.json")).unwrap() {
            DataFile::Joint(j) => j,
            _ => unreachable!(),
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn measured_terms_are_block_ratios() {
        let t = extract_hardy_terms_joint(&measured()).unwrap();
        // hand-divided by the block sums of the printed table
        assert!(close(t.p1, 0.01977 / 0.23573, 1e-12));
        assert!(close(t.p2, 0.00112 / 0.26405, 1e-12));
        assert!(close(t.p3, 0.00106 / 0.26598, 1e-12));
        assert!(close(t.p4, 0.00089 / 0.23432, 1e-12));
        assert!(close(t.p1, 0.08387, 5e-6) && close(t.p4, 0.00380, 5e-6));
    }

    #[test]
    fn measured_thresholds() {
        let j = measured();
        let t = extract_hardy_terms_joint(&j).unwrap();
        let r = critical_ratio(&t);
        assert!(close(r, 0.267, 1e-3), "{r}");
        assert!(close(required_eta_min(&t, 0.5), 0.134, 1e-3));
        assert!(close(required_eta_min(&t, 0.1), 0.027, 1e-3));
        assert!(close(mdl_ldl_threshold(&j).unwrap(), 0.15529, 1e-4));
        let at = DetectionBounds::per_party(0.267, 1.0).unwrap();
        assert!(ldl_value(&t, &at).unwrap().abs() < 5e-5);
        // conditionals and the threshold are scale invariant
        let n = j.renormalized();
        assert!(close(critical_ratio(&extract_hardy_terms_joint(&n).unwrap()), r, 1e-15));
        assert!(close(mdl_ldl_threshold(&n).unwrap(), mdl_ldl_threshold(&j).unwrap(), 1e-15));
    }

    #[test]
    fn critical_ratio_roots_the_quadratic() {
        let t = extract_hardy_terms_joint(&measured()).unwrap();
        let r = critical_ratio(&t);
        // independent evaluation of the defining polynomial
        let f = |r: f64| t.p1 * r * r - (t.p2 + t.p3) * r - t.p4;
        assert!(f(r).abs() < 1e-15);
        assert!(f(r - 1e-6) < 0.0 && f(r + 1e-6) > 0.0);
    }

    #[test]
    fn degenerate_cases() {
        let h = extract_hardy_terms(&hardy_behavior()).unwrap();
        // zeros of the Born table hold to rounding
        assert!(critical_ratio(&h) < 1e-12);
        let b = DetectionBounds::per_party(0.01, 0.7).unwrap();
        assert!(close(ldl_value(&h, &b).unwrap(), 1e-4 * h.p1, 1e-18));
        let zero = DetectionBounds::per_party(0.0, 0.7).unwrap();
        assert!(close(ldl_value(&h, &zero).unwrap(), -0.49 * h.p4, 1e-18));
        assert_eq!(critical_ratio(&HardyTerms::new(0.0, 0.1, 0.1, 0.2)), f64::INFINITY);
        assert_eq!(required_eta_min(&HardyTerms::new(0.0, 0.1, 0.1, 0.2), 0.0), 0.0);
        let u = extract_hardy_terms(&Behavior::uniform(Scenario::bipartite_binary())).unwrap();
        assert_eq!(u.values(), [0.25; 4]);
        let joint = DetectionBounds::new(0.1, 1.0, Convention::Joint).unwrap();
        assert!(matches!(ldl_value(&h, &joint), Err(Error::UnsupportedConvention(_))));
        let wrong = Behavior::uniform(Scenario::new(vec![3, 2], vec![2, 2]).unwrap());
        assert!(matches!(extract_hardy_terms(&wrong), Err(Error::Shape { .. })));
    }

    #[test]
    fn mdl_threshold_examples() {
        let hardy = JointDistribution::from_conditional(&hardy_behavior(), &InputDistribution { probs: vec![0.25; 4] }).unwrap();
        assert!(mdl_ldl_threshold(&hardy).unwrap() < 1e-12);
        let mut table = vec![0.0; 16];
        let s = Scenario::bipartite_binary();
        let probe = JointDistribution::new(s.clone(), vec![1.0 / 16.0; 16], None).unwrap();
        for (a, x) in [([0, 0], [0, 0]), ([0, 1], [0, 1]), ([1, 0], [1, 0]), ([0, 0], [1, 1])] {
            table[probe.flat_index(&a, &x)] = 0.25;
        }
        let eq = JointDistribution::new(s, table, None).unwrap();
        assert!(close(mdl_ldl_threshold(&eq).unwrap(), 3.0, 1e-15));
    }

    #[test]
    fn delta_errors() {
        let j = measured();
        let u = propagate_errors(&j, &[0.5], ErrorMethod::Delta).unwrap().unwrap();
        assert!(u.critical_ratio > 0.0 && u.critical_ratio < 0.01);
        assert!(close(u.required_eta_min[0], 0.5 * u.critical_ratio, 1e-15));
        // finite-difference oracle on the term errors
        let t = extract_hardy_terms_joint(&j).unwrap();
        let e = t.errors.unwrap();
        let mut var = 0.0;
        for k in 0..4 {
            let h = 1e-7;
            let mut v = t.values();
            v[k] += h;
            let up = critical_ratio(&HardyTerms::from_values(v, None));
            v[k] -= 2.0 * h;
            let down = critical_ratio(&HardyTerms::from_values(v, None));
            var += ((up - down) / (2.0 * h) * e[k]).powi(2);
        }
        assert!(close(u.critical_ratio, var.sqrt(), 1e-8));

        let zero = j.clone().with_uncertainty(Some(vec![0.0; 16])).unwrap();
        let z = propagate_errors(&zero, &[0.5], ErrorMethod::Delta).unwrap().unwrap();
        assert_eq!((z.critical_ratio, z.mdl_ldl_threshold), (0.0, Some(0.0)));
        let none = j.with_uncertainty(None).unwrap();
        let cusp = HardyTerms { errors: Some([0.01, 0.001, 0.002, 0.0]), ..HardyTerms::new(0.1, 0.0, 0.0, 0.0) };
        assert!(close(critical_ratio_error(&cusp).unwrap(), (5e-6f64).sqrt() / 0.1, 1e-12));
        assert_eq!(propagate_errors(&none, &[0.5], ErrorMethod::Delta).unwrap(), None);
    }

    #[test]
    fn bootstrap_is_reproducible_and_agrees_with_delta() {
        let j = measured();
        let m = ErrorMethod::Bootstrap { resamples: 2000, seed: 7 };
        let a = propagate_errors(&j, &[0.1], m).unwrap().unwrap();
        let b = propagate_errors(&j, &[0.1], m).unwrap().unwrap();
        assert_eq!(a, b);
        let d = propagate_errors(&j, &[0.1], ErrorMethod::Delta).unwrap().unwrap();
        assert!((a.critical_ratio / d.critical_ratio - 1.0).abs() < 0.15);
        let zero = j.with_uncertainty(Some(vec![0.0; 16])).unwrap();
        assert!(propagate_errors(&zero, &[0.1], m).unwrap().unwrap().critical_ratio < 1e-12);
    }

    #[test]
    fn report_json_shape() {
        let r = analyze_joint(&measured(), &AnalyzeOptions::default()).unwrap();
        let v = r.to_json();
        assert!(v["required_eta_min"]["0.5"].as_f64().is_some());
        assert_eq!(v["assumptions"], json!(["equal_eta_xy", "per-party"]));
        let h = analyze_behavior(&hardy_behavior(), &AnalyzeOptions::default()).unwrap();
        assert_eq!(h.to_json()["mdl_ldl_threshold"], Value::Null);
        let inf = report(HardyTerms::new(0.0, 0.1, 0.1, 0.1), None, None, &AnalyzeOptions::default());
        assert_eq!(inf.to_json()["critical_ratio"], json!("inf"));
        let joint = AnalyzeOptions { convention: Convention::Joint, ..Default::default() };
        assert!(matches!(analyze_joint(&measured(), &joint), Err(Error::UnsupportedConvention(_))));
    }

    fn terms() -> impl Strategy<Value = HardyTerms> {
        (0.0f64..1.0, 0.0f64..0.3, 0.0f64..0.3, 0.0f64..0.3).prop_map(|(a, b, c, d)| HardyTerms::new(a, b, c, d))
    }

    proptest! {
        #[test]
        fn sign_matches_critical_ratio(t in terms(), lo in 0.0f64..1.0, hi in 0.01f64..=1.0) {
            let (lo, hi) = (lo * hi, hi);
            let v = ldl_value(&t, &DetectionBounds::per_party(lo, hi).unwrap()).unwrap();
            let r = critical_ratio(&t);
            prop_assume!(v.abs() > 1e-12 && (lo / hi - r).abs() > 1e-9);
            prop_assert_eq!(v > 0.0, lo / hi > r);
        }

        #[test]
        fn critical_ratio_is_monotone(t in terms(), k in 0usize..4, bump in 1e-6f64..0.1) {
            prop_assume!(t.p1 > 1e-3);
            let r = critical_ratio(&t);
            let mut v = t.values();
            v[k] += bump;
            let r2 = critical_ratio(&HardyTerms::from_values(v, None));
            if k == 0 { prop_assert!(r2 <= r + 1e-12) } else { prop_assert!(r2 >= r - 1e-12) }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn positive_value_implies_infeasible(
            w in 0.0f64..0.3,
            noise in prop::collection::vec(0.01f64..1.0, 16),
            ratio in 0.01f64..1.0,
        ) {
            let s = Scenario::bipartite_binary();
            let h = hardy_behavior();
            let table: Vec<f64> = noise
                .chunks(4)
                .enumerate()
                .flat_map(|(xi, row)| {
                    let total: f64 = row.iter().sum();
                    let h = h.row(xi).to_vec();
                    row.iter().zip(h).map(move |(n, p)| (1.0 - w) * p + w * n / total).collect::<Vec<_>>()
                })
                .collect();
            let b = Behavior::new(s, table).unwrap();
            let bounds = DetectionBounds::per_party(ratio, 1.0).unwrap();
            let v = ldl_value(&extract_hardy_terms(&b).unwrap(), &bounds).unwrap();
            prop_assume!(v > 1e-6);
            let m = membership_ldlps::<f64>(&b, &Efficiencies::UniformUnknown, &bounds, &SolverOptions::default()).unwrap();
            prop_assert!(!m.certificate.is_feasible());
        }
    }
}
