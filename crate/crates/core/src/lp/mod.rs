//! Feasibility of `A x = b, l <= x <= u` with a checkable certificate either
//! way: a point, or a Farkas dual `y` with `yᵀb > max_{l<=x<=u} yᵀA x`.

mod scalar;
mod simplex;
mod verify;

pub use scalar::{decimal_rational, parse_rational, Scalar};
pub use simplex::solve_feasibility;
pub use verify::{dual_margin, verify};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Float,
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Residual allowed on a returned point (float mode).
    pub eps_lp: f64,
    /// Minimum separation a float dual must certify.
    pub delta_sep: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps_lp: 1e-9,
            delta_sep: 1e-9,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityProblem<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    lower: Vec<Option<T>>,
    upper: Vec<Option<T>>,
}

impl<T: Scalar> FeasibilityProblem<T> {
    /// `None` bounds are infinite.
    pub fn new(
        rows: Vec<Vec<T>>,
        rhs: Vec<T>,
        lower: Vec<Option<T>>,
        upper: Vec<Option<T>>,
    ) -> Result<Self> {
        let n = lower.len();
        if upper.len() != n {
            return Err(Error::IllFormed(format!(
                "{} lower bounds but {} upper bounds",
                n,
                upper.len()
            )));
        }
        if rows.len() != rhs.len() {
            return Err(Error::IllFormed(format!(
                "{} constraint rows but {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::IllFormed(format!("row of length {} for {n} variables", r.len())));
        }
        for (j, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if let (Some(l), Some(u)) = (l, u) {
                if l > u {
                    return Err(Error::IllFormed(format!("variable {j} has lower > upper")));
                }
            }
        }
        Ok(FeasibilityProblem {
            rows,
            rhs,
            lower,
            upper,
        })
    }

    /// Every variable in `[0, +inf)`.
    pub fn nonnegative(rows: Vec<Vec<T>>, rhs: Vec<T>) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.len());
        Self::new(rows, rhs, vec![Some(T::zero()); n], vec![None; n])
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn lower(&self) -> &[Option<T>] {
        &self.lower
    }

    pub fn upper(&self) -> &[Option<T>] {
        &self.upper
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> FeasibilityProblem<U> {
        let opt = |v: &Option<T>| v.as_ref().map(&f);
        FeasibilityProblem {
            rows: self.rows.iter().map(|r| r.iter().map(&f).collect()).collect(),
            rhs: self.rhs.iter().map(&f).collect(),
            lower: self.lower.iter().map(opt).collect(),
            upper: self.upper.iter().map(opt).collect(),
        }
    }

    pub fn to_exact(&self) -> FeasibilityProblem<BigRational> {
        self.map(|v| <BigRational as Scalar>::from_f64(v.to_f64()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate<T> {
    Feasible { point: Vec<T> },
    /// One multiplier per equality row, scaled so the largest is 1 in
    /// magnitude.
    Infeasible { dual: Vec<T> },
}

impl<T: Scalar> Certificate<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Certificate::Feasible { .. })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vec = |v: &[T]| serde_json::Value::Array(v.iter().map(Scalar::to_json).collect());
        match self {
            Certificate::Feasible { point } => serde_json::json!({ "status": "feasible", "point": vec(point) }),
            Certificate::Infeasible { dual } => serde_json::json!({ "status": "infeasible", "dual": vec(dual) }),
        }
    }
}
