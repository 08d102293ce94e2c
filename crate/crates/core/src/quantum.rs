//! Two-qubit states, projective measurements and the Born rule.

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::correlations::{Behavior, Counts, LossyBehavior, Scenario};
use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// Amplitudes indexed `2 * a + b` over the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PureTwoQubitState {
    amplitudes: [Complex64; 4],
}

impl PureTwoQubitState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidTable(format!("state has squared norm {norm}")));
        }
        Ok(PureTwoQubitState { amplitudes })
    }

    pub fn product_zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        PureTwoQubitState {
            amplitudes: [Complex64::new(1.0, 0.0), z, z, z],
        }
    }

    pub fn amplitude(&self, a: usize, b: usize) -> Complex64 {
        self.amplitudes[2 * a + b]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// The partially entangled state ((√5−1)|00⟩ + (√5+1)|11⟩) / (2√3).
pub fn hardy_state() -> PureTwoQubitState {
    let s5 = 5f64.sqrt();
    let d = 2.0 * 3f64.sqrt();
    let z = Complex64::new(0.0, 0.0);
    PureTwoQubitState {
        amplitudes: [
            Complex64::new((s5 - 1.0) / d, 0.0),
            z,
            z,
            Complex64::new((s5 + 1.0) / d, 0.0),
        ],
    }
}

/// Measurement angle θ with cos²θ = 1/2 + 1/√5.
pub fn hardy_angle() -> f64 {
    (0.5 + 1.0 / 5f64.sqrt()).sqrt().acos()
}

fn real_vector(angle: f64) -> [Complex64; 2] {
    [Complex64::new(angle.cos(), 0.0), Complex64::new(angle.sin(), 0.0)]
}

fn orthogonal(v: &[Complex64; 2]) -> [Complex64; 2] {
    [-v[1].conj(), v[0].conj()]
}

/// Per party and input, the unit vector whose projector is outcome 0 (before
/// any relabelling). `relabelled[party][input]` swaps outcomes 0 and 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementFamily {
    vectors: [[[Complex64; 2]; 2]; 2],
    relabelled: [[bool; 2]; 2],
    theta: Option<f64>,
}

impl MeasurementFamily {
    pub fn new(vectors: [[[Complex64; 2]; 2]; 2]) -> Result<Self> {
        for v in vectors.iter().flatten() {
            let n = v[0].norm_sqr() + v[1].norm_sqr();
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidTable(format!("measurement vector has squared norm {n}")));
            }
        }
        Ok(MeasurementFamily {
            vectors,
            relabelled: [[false; 2]; 2],
            theta: None,
        })
    }

    /// Both parties measure the computational basis for every input.
    pub fn computational() -> Self {
        let zero = real_vector(0.0);
        MeasurementFamily {
            vectors: [[zero; 2]; 2],
            relabelled: [[false; 2]; 2],
            theta: None,
        }
    }

    pub fn vector(&self, party: usize, input: usize) -> [Complex64; 2] {
        self.vectors[party][input]
    }

    /// Vector whose projector yields `outcome`, relabelling applied.
    pub fn outcome_vector(&self, party: usize, input: usize, outcome: usize) -> [Complex64; 2] {
        let v = self.vectors[party][input];
        if (outcome == 1) != self.relabelled[party][input] {
            orthogonal(&v)
        } else {
            v
        }
    }

    pub fn relabelled(&self) -> [[bool; 2]; 2] {
        self.relabelled
    }

    pub fn with_relabelling(mut self, relabelled: [[bool; 2]; 2]) -> Self {
        self.relabelled = relabelled;
        self
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }
}

/// A₀ = cosθ|0⟩ + sinθ|1⟩, A₁ = A₀(θ−π/4), B₀ = A₀(−θ), B₁ = A₁(−θ), with
/// the outcome labelling chosen so the three Hardy probabilities vanish.
///
/// Outcome 0 is the named vector unless `relabelled()` says otherwise. The
/// search prefers the fewest swapped (party, input) labels; for this state it
/// swaps Bob's input 1, which is the same as taking B₁ = A₀(π/4 − θ).
pub fn hardy_measurements() -> MeasurementFamily {
    let theta = hardy_angle();
    let a0 = |t: f64| real_vector(t);
    let a1 = |t: f64| real_vector(t - std::f64::consts::FRAC_PI_4);
    let base = MeasurementFamily {
        vectors: [[a0(theta), a1(theta)], [a0(-theta), a1(-theta)]],
        relabelled: [[false; 2]; 2],
        theta: Some(theta),
    };
    let state = hardy_state();
    let mut masks: Vec<u8> = (0..16).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let flips = [[mask & 1 != 0, mask & 2 != 0], [mask & 4 != 0, mask & 8 != 0]];
        let fam = base.clone().with_relabelling(flips);
        let b = born_behavior(&state, &fam);
        let zeros = [b.get(&[0, 1], &[0, 1]), b.get(&[1, 0], &[1, 0]), b.get(&[0, 0], &[1, 1])];
        if zeros.iter().all(|&p| p < UNIT_TOL) && b.get(&[0, 0], &[0, 0]) > UNIT_TOL {
            return fam;
        }
    }
    base
}

/// P(ab|xy) = |⟨u_a^x ⊗ u_b^y | ψ⟩|².
pub fn born_behavior(state: &PureTwoQubitState, meas: &MeasurementFamily) -> Behavior {
    let mut table = Vec::with_capacity(16);
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let u = meas.outcome_vector(0, x, a);
                    let v = meas.outcome_vector(1, y, b);
                    let mut amp = Complex64::new(0.0, 0.0);
                    for i in 0..2 {
                        for j in 0..2 {
                            amp += (u[i] * v[j]).conj() * state.amplitude(i, j);
                        }
                    }
                    table.push(amp.norm_sqr());
                }
            }
        }
    }
    Behavior::new(Scenario::bipartite_binary(), table).expect("Born rule rows are normalized")
}

/// Ideal behavior of the Hardy state under the Hardy measurements.
pub fn hardy_behavior() -> Behavior {
    born_behavior(&hardy_state(), &hardy_measurements())
}

/// `efficiencies[party][input]` is the probability that party's outcome
/// survives; losses are independent across parties and of the outcome.
pub fn apply_detection(b: &Behavior, efficiencies: &[Vec<f64>]) -> Result<LossyBehavior> {
    let s = b.scenario();
    if efficiencies.len() != s.parties()
        || efficiencies
            .iter()
            .zip(s.inputs())
            .any(|(e, &n)| e.len() != n)
    {
        return Err(Error::shape(
            format!("efficiencies for inputs {:?}", s.inputs()),
            format!("{efficiencies:?}"),
        ));
    }
    if let Some(&v) = efficiencies
        .iter()
        .flatten()
        .find(|&&v| !(v > 0.0 && v <= 1.0))
    {
        return Err(Error::InvalidEfficiency { value: v });
    }
    let n = s.parties();
    let row = s.lossy_outcome_tuples();
    let mut table = vec![0.0; row * s.input_tuples()];
    for xi in 0..s.input_tuples() {
        let x = s.input_tuple(xi);
        for (ai, &p) in b.row(xi).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let a = s.outcome_tuple(ai);
            for lost in 0..(1usize << n) {
                let mut weight = p;
                let clicks: Vec<_> = (0..n)
                    .map(|i| {
                        let eta = efficiencies[i][x[i]];
                        if lost >> i & 1 == 1 {
                            weight *= 1.0 - eta;
                            crate::correlations::Click::NoDetection
                        } else {
                            weight *= eta;
                            crate::correlations::Click::Outcome(a[i])
                        }
                    })
                    .collect();
                table[xi * row + s.lossy_index(&clicks)] += weight;
            }
        }
    }
    LossyBehavior::new(s.clone(), table)
}

/// Simulates `shots` emitted pairs with uniformly random inputs and keeps the
/// jointly detected events, as a counts table over (outcomes, inputs).
pub fn sample_detected_counts(l: &LossyBehavior, shots: u64, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::InvalidTable("shot count must be positive".into()));
    }
    let s = l.scenario();
    let nx = s.input_tuples();
    let row = s.lossy_outcome_tuples();
    let weights: Vec<f64> = l.table().iter().map(|p| p.max(0.0) / nx as f64).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidTable(e.to_string()))?;
    let mut detected_slot = vec![None; row];
    for ai in 0..s.outcome_tuples() {
        detected_slot[s.detected_lossy_index(ai)] = Some(ai);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; s.outcome_tuples() * nx];
    for _ in 0..shots {
        let k = dist.sample(&mut rng);
        let (xi, li) = (k / row, k % row);
        if let Some(ai) = detected_slot[li] {
            counts[xi * s.outcome_tuples() + ai] += 1;
        }
    }
    Counts::new(s.clone(), counts)
}
