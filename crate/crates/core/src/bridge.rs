//! Limited detection reduces to measurement dependence: a local model whose
//! detection probabilities lie in `[eta_min, eta_max]` and whose input
//! distributions lie in `[l, h]` produces, after postselection, correlations
//! that a measurement-dependent local model with wider bounds `[l', h']`
//! reproduces. Postselection reweights each `P(x|λ)` by `P(detect|x, λ)`,
//! which can move it by at most the ratio of the detection bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{JointDistribution, Scenario};
use crate::error::{Error, Result};
use crate::ldl::{Convention, DetectionBounds};
use crate::lp::{Scalar, SolverOptions};
use crate::mdl::{enumerate_input_dist_vertices, enumerate_mdl_vertices, membership_mdl_against, MdlBounds};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeParams {
    pub mdl: MdlBounds,
    pub detection: DetectionBounds,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transformed {
    pub bounds: MdlBounds,
    /// `h'` would have exceeded 1 and was capped.
    pub clamped: bool,
    pub convention: Convention,
}

/// `(l', h') = (ρ·l, h/ρ)` with `ρ = eta_min/eta_max` for joint bounds and
/// `ρ = (eta_min/eta_max)²` for per-party bounds on two parties.
pub fn transform(p: &BridgeParams) -> Result<Transformed> {
    let d = &p.detection;
    if d.eta_min <= 0.0 {
        return Err(Error::DegenerateBounds);
    }
    let ratio = d.eta_min / d.eta_max;
    let rho = match d.convention {
        Convention::Joint => ratio,
        Convention::PerParty => ratio * ratio,
    };
    let l = (rho * p.mdl.l).max(0.0);
    let raw_h = p.mdl.h / rho;
    Ok(Transformed {
        bounds: MdlBounds::new(l, raw_h.min(1.0))?,
        clamped: raw_h > 1.0,
        convention: d.convention,
    })
}

/// A two-party local model with finitely many hidden states, each with a
/// deterministic response, an input distribution and a detection
/// probability per input pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdldlModel {
    pub scenario: Scenario,
    pub weights: Vec<f64>,
    /// `responses[λ][party][input]`.
    pub responses: Vec<Vec<Vec<usize>>>,
    /// `inputs[λ][x]`, `P(x|λ)` over input tuples.
    pub inputs: Vec<Vec<f64>>,
    /// `detection[λ][x]`, the probability that every party detects.
    pub detection: Vec<Vec<f64>>,
}

impl MdldlModel {
    fn detect_given_lambda(&self, lambda: usize) -> f64 {
        self.inputs[lambda]
            .iter()
            .zip(&self.detection[lambda])
            .map(|(q, d)| q * d)
            .sum()
    }

    /// `P(x | detect, λ)` by Bayes' rule.
    pub fn postselected_inputs(&self, lambda: usize) -> Vec<f64> {
        let pd = self.detect_given_lambda(lambda);
        self.inputs[lambda]
            .iter()
            .zip(&self.detection[lambda])
            .map(|(q, d)| q * d / pd)
            .collect()
    }

    /// `P(a, x, detect | λ)` as a joint table (unnormalized).
    fn detected_joint(&self, lambda: usize) -> Vec<f64> {
        let s = &self.scenario;
        let n_out = s.outcome_tuples();
        let mut t = vec![0.0; n_out * s.input_tuples()];
        for xi in 0..s.input_tuples() {
            let x = s.input_tuple(xi);
            let a: Vec<usize> = x
                .iter()
                .enumerate()
                .map(|(p, &xp)| self.responses[lambda][p][xp])
                .collect();
            t[xi * n_out + s.outcome_index(&a)] = self.inputs[lambda][xi] * self.detection[lambda][xi];
        }
        t
    }

    /// `P(x | detect, λ)` by marginalizing the detected joint table; agrees
    /// with [`postselected_inputs`](Self::postselected_inputs).
    pub fn postselected_inputs_direct(&self, lambda: usize) -> Vec<f64> {
        let t = self.detected_joint(lambda);
        let n_out = self.scenario.outcome_tuples();
        let total: f64 = t.iter().sum();
        t.chunks(n_out).map(|c| c.iter().sum::<f64>() / total).collect()
    }

    /// `P(a, x | detect)`.
    pub fn postselected(&self) -> Result<JointDistribution> {
        let mut acc = vec![0.0; self.scenario.outcome_tuples() * self.scenario.input_tuples()];
        for (lambda, w) in self.weights.iter().enumerate() {
            for (a, v) in acc.iter_mut().zip(self.detected_joint(lambda)) {
                *a += w * v;
            }
        }
        let total: f64 = acc.iter().sum();
        if total <= 0.0 {
            return Err(Error::NoDetections { inputs: vec![] });
        }
        JointDistribution::new(self.scenario.clone(), acc.iter().map(|v| v / total).collect(), None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BridgeReport {
    pub trials: usize,
    pub failures: usize,
    /// Smallest distance of any postselected `P(x|detect, λ)` from the
    /// transformed bounds; negative would contradict the reduction.
    pub min_slack: f64,
    /// Largest disagreement between the two ways of computing
    /// `P(x|detect, λ)`.
    pub max_identity_error: f64,
    pub convention: Convention,
    pub params: BridgeParams,
    pub transformed: Transformed,
    pub seed: u64,
    pub lambda_support: usize,
    /// Models whose postselection fell outside the transformed polytope.
    pub failing_models: Vec<MdldlModel>,
}

pub const DEFAULT_LAMBDA_SUPPORT: usize = 8;

/// Samples `trials` random models obeying `p` and checks every
/// postselection lies in the MDL polytope with transformed bounds.
///
/// Trial `k` draws from its own ChaCha8 stream `k` under `seed`, so the
/// report does not depend on scheduling.
pub fn verify_bridge(
    trials: usize,
    seed: u64,
    scenario: &Scenario,
    p: &BridgeParams,
    lambda_support: usize,
) -> Result<BridgeReport> {
    if scenario.parties() != 2 {
        return Err(Error::InvalidScenario("the reduction is checked for two parties".into()));
    }
    if lambda_support == 0 {
        return Err(Error::InvalidScenario("need at least one hidden state".into()));
    }
    let t = transform(p)?;
    let input_vertices: Vec<Vec<f64>> = enumerate_input_dist_vertices(scenario.input_tuples(), &p.mdl)?
        .iter()
        .map(|q| q.iter().map(Scalar::to_f64).collect())
        .collect();
    let target = enumerate_mdl_vertices(scenario, &t.bounds)?;
    let opts = SolverOptions::default();

    let outcomes: Vec<(MdldlModel, Result<bool>, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let model = sample_model(&mut rng, scenario, p, &input_vertices, lambda_support);
            let mut slack = f64::INFINITY;
            let mut ident = 0.0f64;
            for lambda in 0..lambda_support {
                let bayes = model.postselected_inputs(lambda);
                let direct = model.postselected_inputs_direct(lambda);
                for (b, d) in bayes.iter().zip(&direct) {
                    ident = ident.max((b - d).abs());
                    slack = slack.min(b - t.bounds.l).min(t.bounds.h - b);
                }
            }
            let verdict = model
                .postselected()
                .and_then(|j| membership_mdl_against::<f64>(&target, &j, &opts))
                .map(|c| c.is_feasible());
            (model, verdict, slack, ident)
        })
        .collect();

    let mut report = BridgeReport {
        trials,
        failures: 0,
        min_slack: f64::INFINITY,
        max_identity_error: 0.0,
        convention: t.convention,
        params: *p,
        transformed: t,
        seed,
        lambda_support,
        failing_models: Vec::new(),
    };
    for (model, verdict, slack, ident) in outcomes {
        report.min_slack = report.min_slack.min(slack);
        report.max_identity_error = report.max_identity_error.max(ident);
        if !verdict? {
            report.failures += 1;
            report.failing_models.push(model);
        }
    }
    Ok(report)
}

fn sample_model(
    rng: &mut ChaCha8Rng,
    s: &Scenario,
    p: &BridgeParams,
    input_vertices: &[Vec<f64>],
    k: usize,
) -> MdldlModel {
    let d = &p.detection;
    let draw_eta = |rng: &mut ChaCha8Rng| match rng.gen_range(0..4) {
        0 => d.eta_min,
        1 => d.eta_max,
        _ => rng.gen_range(d.eta_min..=d.eta_max),
    };
    let weights = dirichlet(rng, k);
    let mut responses = Vec::with_capacity(k);
    let mut inputs = Vec::with_capacity(k);
    let mut detection = Vec::with_capacity(k);
    for _ in 0..k {
        responses.push(
            (0..s.parties())
                .map(|party| (0..s.inputs()[party]).map(|_| rng.gen_range(0..s.outcomes()[party])).collect())
                .collect(),
        );
        // a single extreme point a quarter of the time, else an interior mix
        let q = if rng.gen_range(0..4) == 0 {
            input_vertices[rng.gen_range(0..input_vertices.len())].clone()
        } else {
            let w = dirichlet(rng, input_vertices.len());
            (0..s.input_tuples())
                .map(|x| input_vertices.iter().zip(&w).map(|(v, w)| w * v[x]).sum())
                .collect()
        };
        inputs.push(q);
        let det: Vec<f64> = match d.convention {
            Convention::Joint => (0..s.input_tuples()).map(|_| draw_eta(rng)).collect(),
            Convention::PerParty => {
                let per: Vec<Vec<f64>> = s
                    .inputs()
                    .iter()
                    .map(|&n| (0..n).map(|_| draw_eta(rng)).collect())
                    .collect();
                (0..s.input_tuples())
                    .map(|xi| {
                        let x = s.input_tuple(xi);
                        x.iter().enumerate().map(|(party, &xp)| per[party][xp]).product()
                    })
                    .collect()
            }
        };
        detection.push(det);
    }
    MdldlModel {
        scenario: s.clone(),
        weights,
        responses,
        inputs,
        detection,
    }
}

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// A model whose detection favours input 0 on both sides, so postselection
/// skews the input distribution away from uniform: `l = h = 1/4`, joint
/// detection bounds `[1/2, 1]`, every party detects with probability 1 on
/// input 0 and `√½` on input 1.
pub fn input_biasing_witness() -> (MdldlModel, BridgeParams) {
    let s = Scenario::bipartite_binary();
    let r = 0.5f64.sqrt();
    let model = MdldlModel {
        scenario: s,
        weights: vec![1.0],
        responses: vec![vec![vec![0, 0], vec![0, 0]]],
        inputs: vec![vec![0.25; 4]],
        detection: vec![vec![1.0, r, r, 0.5]],
    };
    let params = BridgeParams {
        mdl: MdlBounds { l: 0.25, h: 0.25 },
        detection: DetectionBounds {
            eta_min: 0.5,
            eta_max: 1.0,
            convention: Convention::Joint,
        },
    };
    (model, params)
}
