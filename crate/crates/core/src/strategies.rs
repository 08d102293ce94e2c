//! Completing non-detections with local responses.
//!
//! A source with efficiency `η` feeds a nonlocal behavior `P_NL`. Each party
//! that misses keeps the round with probability `η_min` and answers from a
//! local table instead; rounds where a party misses and discards are
//! postselected away. The resulting behavior has every party "detect" with
//! probability at least `η + (1−η)·η_min`.

use serde::Serialize;

use crate::correlations::{marginal, Behavior, Scenario};
use crate::error::{Error, Result};

/// Gate on the spread of a marginal across the other party's inputs.
pub const NON_SIGNALING_TOL: f64 = 1e-9;

/// Weights of `P_NL`, of the two cross terms together, and of the fully
/// local term. They sum to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixCoefficients {
    pub nonlocal: f64,
    pub cross: f64,
    pub local: f64,
}

pub fn mix_coefficients(eta: f64, eta_min: f64) -> Result<MixCoefficients> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidEfficiency { value: eta });
    }
    if !(0.0..=1.0).contains(&eta_min) {
        return Err(Error::InvalidBounds(format!("target eta_min {eta_min} outside [0, 1]")));
    }
    let lost = 1.0 - eta;
    let d = eta + lost * eta_min;
    let d2 = d * d;
    Ok(MixCoefficients {
        nonlocal: eta * eta / d2,
        cross: 2.0 * eta * lost * eta_min / d2,
        local: lost * lost * eta_min * eta_min / d2,
    })
}

/// The postselected behavior of the completion strategy. `local_a` and
/// `local_b` are single-party tables (one input per row); `None` means
/// uniformly random answers.
pub fn assignment_mix(
    p_nl: &Behavior,
    eta: f64,
    eta_min_target: f64,
    local_a: Option<&Behavior>,
    local_b: Option<&Behavior>,
) -> Result<Behavior> {
    let s = p_nl.scenario();
    if s.parties() != 2 {
        return Err(Error::shape("two parties", format!("{} parties", s.parties())));
    }
    let c = mix_coefficients(eta, eta_min_target)?;
    let nl = [party_marginal(p_nl, 0)?, party_marginal(p_nl, 1)?];
    let loc = [local_table(s, 0, local_a)?, local_table(s, 1, local_b)?];
    let (ma, mb) = (s.outcomes()[0], s.outcomes()[1]);
    Behavior::from_fn(s.clone(), |a, x| {
        let nla = nl[0][x[0] * ma + a[0]];
        let nlb = nl[1][x[1] * mb + a[1]];
        let la = loc[0][x[0] * ma + a[0]];
        let lb = loc[1][x[1] * mb + a[1]];
        c.nonlocal * p_nl.get(a, x) + 0.5 * c.cross * (nla * lb + la * nlb) + c.local * la * lb
    })
}

/// `P(a|x)` for one party, flattened `x * m + a`, after the non-signaling gate.
fn party_marginal(b: &Behavior, party: usize) -> Result<Vec<f64>> {
    let m = marginal(b, party)?;
    let deviation = m.signaling_deviation();
    if deviation > NON_SIGNALING_TOL {
        return Err(Error::SignalingInput { deviation });
    }
    let s = b.scenario();
    let mut out = Vec::with_capacity(s.inputs()[party] * s.outcomes()[party]);
    for x in 0..s.inputs()[party] {
        let mut inputs = vec![0; s.parties()];
        inputs[party] = x;
        for a in 0..s.outcomes()[party] {
            out.push(m.get(a, &inputs));
        }
    }
    Ok(out)
}

fn local_table(s: &Scenario, party: usize, table: Option<&Behavior>) -> Result<Vec<f64>> {
    let own = s.single_party(party);
    match table {
        None => Ok(Behavior::uniform(own).table().to_vec()),
        Some(t) if *t.scenario() == own => Ok(t.table().to_vec()),
        Some(t) => Err(Error::shape(
            format!("inputs {:?}, outcomes {:?}", own.inputs(), own.outcomes()),
            format!("inputs {:?}, outcomes {:?}", t.scenario().inputs(), t.scenario().outcomes()),
        )),
    }
}
