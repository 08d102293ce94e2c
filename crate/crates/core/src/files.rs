//! JSON data files.
//!
//! ```json
//! { "scenario": {"parties": 2, "inputs": [2, 2], "outcomes": [2, 2]},
//!   "kind": "joint_probabilities",
//!   "entries": [ {"a": [0, 0], "x": [0, 0], "value": 0.01977, "error": 0.00012} ] }
//! ```
//!
//! `kind` is one of `counts`, `joint_probabilities`, `behavior`,
//! `lossy_behavior` or `efficiencies` (entries without `a`). `null` in `a` is
//! the no-detection symbol and is only valid in lossy tables. Entries not
//! listed are zero. Unknown top-level fields are ignored, so files may carry
//! descriptive notes.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::correlations::{
    Behavior, Click, Counts, EfficiencyMap, JointDistribution, LossyBehavior, Scenario, INGEST_TOL,
};
use crate::error::{Error, Result};
use crate::ldl::VertexSet;
use crate::lp::Scalar;
use crate::mdl::MdlVertexSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Counts,
    JointProbabilities,
    Behavior,
    LossyBehavior,
    Efficiencies,
}

#[derive(Deserialize)]
struct RawFile {
    scenario: Scenario,
    kind: Kind,
    entries: Vec<RawEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    #[serde(default)]
    a: Option<Vec<Click>>,
    x: Vec<usize>,
    value: f64,
    #[serde(default)]
    error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataFile {
    Counts(Counts),
    Joint(JointDistribution),
    Behavior(Behavior),
    Lossy(LossyBehavior),
    Efficiencies(EfficiencyMap),
}

impl DataFile {
    pub fn kind(&self) -> Kind {
        match self {
            DataFile::Counts(_) => Kind::Counts,
            DataFile::Joint(_) => Kind::JointProbabilities,
            DataFile::Behavior(_) => Kind::Behavior,
            DataFile::Lossy(_) => Kind::LossyBehavior,
            DataFile::Efficiencies(_) => Kind::Efficiencies,
        }
    }
}

pub fn parse(text: &str) -> Result<DataFile> {
    // scenario validation failures also surface here, as serde data errors
    let raw: RawFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let s = raw.scenario;
    let lossy = raw.kind == Kind::LossyBehavior;
    let per_row = if lossy { s.lossy_outcome_tuples() } else { s.outcome_tuples() };
    let per_row = if raw.kind == Kind::Efficiencies { 1 } else { per_row };
    let n = per_row * s.input_tuples();
    let mut table = vec![0.0; n];
    let mut errors = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut any_error = false;

    for e in &raw.entries {
        s.check_inputs(&e.x)?;
        let col = match (&e.a, raw.kind) {
            (None, Kind::Efficiencies) => 0,
            (Some(_), Kind::Efficiencies) => {
                return Err(Error::InvalidTable("efficiency entries take no outcomes".into()))
            }
            (None, _) => return Err(Error::InvalidTable("entry without outcomes".into())),
            (Some(a), _) => {
                s.check_clicks(a)?;
                if lossy {
                    s.lossy_index(a)
                } else {
                    let digits: Vec<usize> = a
                        .iter()
                        .map(|c| match c {
                            Click::Outcome(v) => Ok(*v),
                            Click::NoDetection => Err(Error::InvalidTable(
                                "no-detection outcome in a table without losses".into(),
                            )),
                        })
                        .collect::<Result<_>>()?;
                    s.check_outcomes(&digits)?;
                    s.outcome_index(&digits)
                }
            }
        };
        let idx = s.input_index(&e.x) * per_row + col;
        if seen[idx] {
            return Err(Error::InvalidTable(format!("duplicate entry for a={:?} x={:?}", e.a, e.x)));
        }
        seen[idx] = true;
        if !e.value.is_finite() {
            return Err(Error::InvalidTable("non-finite value".into()));
        }
        table[idx] = e.value;
        if let Some(err) = e.error {
            errors[idx] = err;
            any_error = true;
        }
    }

    Ok(match raw.kind {
        Kind::Counts => {
            let counts = table
                .iter()
                .map(|&v| {
                    if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
                        Ok(v as u64)
                    } else {
                        Err(Error::InvalidTable(format!("count {v} is not a nonnegative integer")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            DataFile::Counts(Counts::new(s, counts)?)
        }
        Kind::JointProbabilities => DataFile::Joint(JointDistribution::with_tolerance(
            s,
            table,
            any_error.then_some(errors),
            INGEST_TOL,
        )?),
        Kind::Behavior => DataFile::Behavior(Behavior::with_tolerance(s, table, INGEST_TOL)?),
        Kind::LossyBehavior => DataFile::Lossy(LossyBehavior::with_tolerance(s, table, INGEST_TOL)?),
        Kind::Efficiencies => DataFile::Efficiencies(EfficiencyMap::new(s, table)?),
    })
}

pub fn read(path: &std::path::Path) -> Result<DataFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse(&text)
}

fn scenario_json(s: &Scenario) -> Value {
    json!({ "parties": s.parties(), "inputs": s.inputs(), "outcomes": s.outcomes() })
}

fn entries(s: &Scenario, table: &[f64], errors: Option<&[f64]>, lossy: bool, skip_zero: bool) -> Vec<Value> {
    let per_row = if lossy { s.lossy_outcome_tuples() } else { s.outcome_tuples() };
    let mut out = Vec::new();
    for (idx, &v) in table.iter().enumerate() {
        if skip_zero && v == 0.0 && errors.map_or(true, |e| e[idx] == 0.0) {
            continue;
        }
        let (xi, ai) = (idx / per_row, idx % per_row);
        let a: Vec<Option<usize>> = if lossy {
            s.lossy_tuple(ai).into_iter().map(Into::into).collect()
        } else {
            s.outcome_tuple(ai).into_iter().map(Some).collect()
        };
        let mut e = json!({ "a": a, "x": s.input_tuple(xi), "value": v });
        if let Some(err) = errors {
            e["error"] = json!(err[idx]);
        }
        out.push(e);
    }
    out
}

/// Serializes a table in the file format, omitting zero entries.
pub fn to_json(data: &DataFile) -> Value {
    let (s, body) = match data {
        DataFile::Counts(c) => {
            let t: Vec<f64> = c.table().iter().map(|&v| v as f64).collect();
            (c.scenario(), entries(c.scenario(), &t, None, false, true))
        }
        DataFile::Joint(j) => (j.scenario(), entries(j.scenario(), j.table(), j.uncertainty(), false, true)),
        DataFile::Behavior(b) => (b.scenario(), entries(b.scenario(), b.table(), None, false, true)),
        DataFile::Lossy(l) => (l.scenario(), entries(l.scenario(), l.table(), None, true, true)),
        DataFile::Efficiencies(e) => {
            let s = e.scenario();
            let body = e
                .values()
                .iter()
                .enumerate()
                .map(|(xi, v)| json!({ "x": s.input_tuple(xi), "value": v }))
                .collect();
            (s, body)
        }
    };
    json!({ "scenario": scenario_json(s), "kind": data.kind(), "entries": body })
}

pub fn ldl_vertex_dump(vs: &VertexSet) -> Value {
    let s = vs.scenario();
    let vertices: Vec<Value> = (0..vs.len())
        .map(|i| {
            let table = vs.table_as::<f64>(i);
            let responses: Vec<Value> = vs
                .assignment(i)
                .iter()
                .enumerate()
                .map(|(p, &v)| json!(vs.party_vertices(p)[v].choices()))
                .collect();
            json!({ "responses": responses, "entries": entries(s, &table, None, true, true) })
        })
        .collect();
    json!({
        "scenario": scenario_json(s),
        "kind": Kind::LossyBehavior,
        "polytope": "ldl",
        "bounds": vs.bounds(),
        "count": vs.len(),
        "vertices": vertices,
    })
}

pub fn mdl_vertex_dump(vs: &MdlVertexSet) -> Value {
    let s = vs.scenario();
    let vertices: Vec<Value> = (0..vs.len())
        .map(|i| {
            let (q, d) = vs.parts(i);
            let table = vs.table_as::<f64>(i);
            json!({
                "input_distribution": q.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "responses": d,
                "entries": entries(s, &table, None, false, true),
            })
        })
        .collect();
    json!({
        "scenario": scenario_json(s),
        "kind": Kind::JointProbabilities,
        "polytope": "mdl",
        "bounds": vs.bounds(),
        "count": vs.len(),
        "input_vertices": vs.input_vertices().len(),
        "vertices": vertices,
    })
}

/// JSON number, or the string `"inf"` for an infinite value.
pub fn number(v: f64) -> Value {
    if v.is_infinite() && v > 0.0 {
        json!("inf")
    } else if v.is_infinite() {
        json!("-inf")
    } else {
        json!(v)
    }
}

pub fn vector_json<T: Scalar>(v: &[T]) -> Value {
    Value::Array(v.iter().map(Scalar::to_json).collect())
}
