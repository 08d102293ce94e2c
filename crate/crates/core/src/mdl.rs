//! Measurement-dependent local (MDL) polytope over unconditional `P(a, x)`:
//! local models whose hidden variable may bias the input distribution, as
//! long as every `P(x|λ)` stays within `[l, h]`.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{JointDistribution, Scenario};
use crate::error::{Error, Result};
use crate::lp::{decimal_rational, solve_feasibility, Certificate, FeasibilityProblem, Scalar, SolverOptions};

pub const DEFAULT_VERTEX_CAP: u128 = 1_000_000;

/// Bounds `l <= P(x|λ) <= h` on the hidden-variable-conditioned input
/// distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdlBounds {
    pub l: f64,
    pub h: f64,
}

impl MdlBounds {
    pub fn new(l: f64, h: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&l) || !(0.0..=1.0).contains(&h) || l > h {
            return Err(Error::InvalidBounds(format!("need 0 <= l <= h <= 1, got [{l}, {h}]")));
        }
        Ok(MdlBounds { l, h })
    }

    /// `l <= 1/n <= h`, i.e. the uniform distribution over `n` input tuples
    /// is allowed.
    pub fn check(&self, input_tuples: usize) -> Result<()> {
        let (l, h) = self.exact();
        let u = BigRational::new(1.into(), input_tuples.into());
        if l > u || h < u {
            return Err(Error::InvalidBounds(format!(
                "need l <= 1/{input_tuples} <= h, got [{}, {}]",
                self.l, self.h
            )));
        }
        Ok(())
    }

    /// The bounds as the decimals they were written as.
    pub fn exact(&self) -> (BigRational, BigRational) {
        (decimal_rational(self.l), decimal_rational(self.h))
    }
}

/// Extreme points of `{q : Σq = 1, l <= q <= h}` in lexicographic order.
///
/// A point of a box cut by one hyperplane is extreme exactly when at most one
/// coordinate is strictly between its bounds, so it suffices to pin all but
/// one coordinate to a bound and solve for the last.
pub fn enumerate_input_dist_vertices(input_tuples: usize, bounds: &MdlBounds) -> Result<Vec<Vec<BigRational>>> {
    enumerate_input_dist_vertices_capped(input_tuples, bounds, DEFAULT_VERTEX_CAP)
}

fn enumerate_input_dist_vertices_capped(
    n: usize,
    bounds: &MdlBounds,
    cap: u128,
) -> Result<Vec<Vec<BigRational>>> {
    bounds.check(n)?;
    let work = 1u128
        .checked_shl(n.saturating_sub(1) as u32)
        .and_then(|p| p.checked_mul(n as u128))
        .filter(|_| n < 100)
        .unwrap_or(u128::MAX);
    if work > cap {
        return Err(Error::TooLarge { count: work, cap });
    }
    let (l, h) = bounds.exact();
    let mut found = BTreeSet::new();
    for free in 0..n {
        for mask in 0..(1usize << (n - 1)) {
            let mut q = Vec::with_capacity(n);
            let mut bit = 0;
            for k in 0..n {
                if k == free {
                    q.push(<BigRational as Zero>::zero());
                    continue;
                }
                q.push(if mask >> bit & 1 == 1 { h.clone() } else { l.clone() });
                bit += 1;
            }
            let rest: BigRational = q.iter().sum();
            let r = <BigRational as One>::one() - rest;
            if r >= l && r <= h {
                q[free] = r;
                found.insert(q);
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// Products `q(x) Π_i D_i(a_i|x_i)` of an input-distribution vertex and a
/// deterministic strategy.
#[derive(Clone, Debug)]
pub struct MdlVertexSet {
    scenario: Scenario,
    bounds: MdlBounds,
    input_vertices: Vec<Vec<BigRational>>,
    /// `strategies[s][party][input]` is the outcome.
    strategies: Vec<Vec<Vec<usize>>>,
}

impl MdlVertexSet {
    pub fn len(&self) -> usize {
        self.input_vertices.len() * self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn bounds(&self) -> &MdlBounds {
        &self.bounds
    }

    pub fn input_vertices(&self) -> &[Vec<BigRational>] {
        &self.input_vertices
    }

    pub fn strategies(&self) -> &[Vec<Vec<usize>>] {
        &self.strategies
    }

    /// Vertex `i` pairs input vertex `i / #strategies` with strategy
    /// `i % #strategies`.
    pub fn parts(&self, i: usize) -> (&[BigRational], &[Vec<usize>]) {
        let ns = self.strategies.len();
        (&self.input_vertices[i / ns], &self.strategies[i % ns])
    }

    /// Joint table of vertex `i` in the layout of [`JointDistribution`].
    pub fn table_as<T: Scalar>(&self, i: usize) -> Vec<T> {
        let s = &self.scenario;
        let (q, d) = self.parts(i);
        let n_out = s.outcome_tuples();
        let mut out = vec![T::zero(); n_out * s.input_tuples()];
        for (xi, qx) in q.iter().enumerate() {
            let x = s.input_tuple(xi);
            let a: Vec<usize> = x.iter().enumerate().map(|(p, &xp)| d[p][xp]).collect();
            out[xi * n_out + s.outcome_index(&a)] = T::from_rational(qx);
        }
        out
    }
}

pub fn enumerate_mdl_vertices(scenario: &Scenario, bounds: &MdlBounds) -> Result<MdlVertexSet> {
    enumerate_mdl_vertices_capped(scenario, bounds, DEFAULT_VERTEX_CAP)
}

pub fn enumerate_mdl_vertices_capped(scenario: &Scenario, bounds: &MdlBounds, cap: u128) -> Result<MdlVertexSet> {
    let strategies_count = scenario
        .inputs()
        .iter()
        .zip(scenario.outcomes())
        .try_fold(1u128, |acc, (&n, &m)| {
            (0..n).try_fold(acc, |a, _| a.checked_mul(m as u128))
        })
        .unwrap_or(u128::MAX);
    if strategies_count > cap {
        return Err(Error::TooLarge {
            count: strategies_count,
            cap,
        });
    }
    let input_vertices = enumerate_input_dist_vertices_capped(scenario.input_tuples(), bounds, cap)?;
    let count = strategies_count.saturating_mul(input_vertices.len() as u128);
    if count > cap {
        return Err(Error::TooLarge { count, cap });
    }
    // One digit per (party, input), party 0 and input 0 most significant.
    let radices: Vec<usize> = scenario
        .inputs()
        .iter()
        .zip(scenario.outcomes())
        .flat_map(|(&n, &m)| std::iter::repeat(m).take(n))
        .collect();
    let strategies = (0..strategies_count as usize)
        .into_par_iter()
        .map(|mut k| {
            let mut digits = vec![0; radices.len()];
            for (slot, &r) in digits.iter_mut().zip(&radices).rev() {
                *slot = k % r;
                k /= r;
            }
            let mut it = digits.into_iter();
            scenario
                .inputs()
                .iter()
                .map(|&n| it.by_ref().take(n).collect())
                .collect()
        })
        .collect();
    Ok(MdlVertexSet {
        scenario: scenario.clone(),
        bounds: *bounds,
        input_vertices,
        strategies,
    })
}

/// Is `j` in the cone over the MDL vertices?
///
/// No normalization row is imposed: every vertex has total mass 1, so the
/// weights automatically sum to the total of `j`, and slightly
/// unnormalized measured tables are judged on their shape alone.
pub fn membership_mdl<T: Scalar>(
    j: &JointDistribution,
    bounds: &MdlBounds,
    opts: &SolverOptions,
) -> Result<Certificate<T>> {
    let vs = enumerate_mdl_vertices(j.scenario(), bounds)?;
    membership_mdl_against(&vs, j, opts)
}

pub fn membership_mdl_against<T: Scalar>(
    vs: &MdlVertexSet,
    j: &JointDistribution,
    opts: &SolverOptions,
) -> Result<Certificate<T>> {
    if j.scenario() != vs.scenario() {
        return Err(Error::shape(format!("{:?}", vs.scenario()), format!("{:?}", j.scenario())));
    }
    let columns: Vec<Vec<T>> = (0..vs.len()).into_par_iter().map(|i| vs.table_as::<T>(i)).collect();
    let rows: Vec<Vec<T>> = (0..j.table().len())
        .map(|k| columns.iter().map(|c| c[k].clone()).collect())
        .collect();
    let rhs = j.table().iter().map(|&v| T::from_f64(v)).collect();
    solve_feasibility(&FeasibilityProblem::nonnegative(rows, rhs)?, opts)
}

/// Independent check of a dual from [`membership_mdl`]: `I(j) − Σj·max_v I(v)`.
/// Positive means `I ≤ 0`-type separation holds for every cone point of the
/// same total mass as `j`.
pub fn mdl_separation_margin<T: Scalar>(vs: &MdlVertexSet, j: &JointDistribution, dual: &[T]) -> Result<T> {
    if dual.len() != j.table().len() {
        return Err(Error::shape(format!("{} multipliers", j.table().len()), format!("{}", dual.len())));
    }
    let functional = |q: &[T]| q.iter().zip(dual).fold(T::zero(), |acc, (a, b)| acc.add(&a.mul(b)));
    let vmax = (0..vs.len())
        .into_par_iter()
        .map(|i| functional(&vs.table_as::<T>(i)))
        .reduce_with(|a, b| if b > a { b } else { a })
        .ok_or(Error::EmptyData)?;
    let jt: Vec<T> = j.table().iter().map(|&v| T::from_f64(v)).collect();
    let total = jt.iter().fold(T::zero(), |a, b| a.add(b));
    Ok(functional(&jt).sub(&total.mul(&vmax)))
}

/// `l·J(0000) − h·(J(0101) + J(1010) + J(0011))` with indices `a b x y`;
/// positive refutes MDL models with these bounds.
pub fn mdl_hardy_value(j: &JointDistribution, bounds: &MdlBounds) -> Result<f64> {
    let (p0000, rest) = hardy_entries(j)?;
    Ok(bounds.l * p0000 - bounds.h * rest)
}

/// `(J(0000), J(0101) + J(1010) + J(0011))`.
pub(crate) fn hardy_entries(j: &JointDistribution) -> Result<(f64, f64)> {
    if !j.scenario().is_bipartite_binary() {
        return Err(Error::shape(
            "two parties with binary inputs and outcomes",
            format!("inputs {:?}, outcomes {:?}", j.scenario().inputs(), j.scenario().outcomes()),
        ));
    }
    Ok((
        j.get(&[0, 0], &[0, 0]),
        j.get(&[0, 1], &[0, 1]) + j.get(&[1, 0], &[1, 0]) + j.get(&[0, 0], &[1, 1]),
    ))
}
