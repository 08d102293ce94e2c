use super::{verify, Certificate, FeasibilityProblem, Scalar, SolverOptions};
use crate::error::{Error, Result};

/// Smallest pivot element accepted in floating point.
const PIVOT_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;
/// Float entries below this magnitude are flushed to zero after a pivot.
const FLUSH: f64 = 1e-14;

/// How an original variable is expressed through nonnegative columns.
#[derive(Clone, Debug)]
enum Column<T> {
    /// x = l + p
    Shifted { col: usize, lower: T },
    /// x = u - q
    Mirrored { col: usize, upper: T },
    /// x = p - q
    Split { pos: usize, neg: usize },
}

struct StandardForm<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    columns: Vec<Column<T>>,
    /// Rows that came from the original problem; the rest are `p + s = u - l`.
    original_rows: usize,
}

fn standardize<T: Scalar>(p: &FeasibilityProblem<T>) -> StandardForm<T> {
    let m = p.num_constraints();
    let mut rhs: Vec<T> = p.rhs().to_vec();
    let mut cols: Vec<Vec<T>> = Vec::new();
    let mut columns = Vec::with_capacity(p.num_vars());
    let mut bound_rows: Vec<(usize, T)> = Vec::new();

    for j in 0..p.num_vars() {
        let a_j: Vec<T> = p.rows().iter().map(|r| r[j].clone()).collect();
        match (&p.lower()[j], &p.upper()[j]) {
            (Some(l), upper) => {
                for (b, a) in rhs.iter_mut().zip(&a_j) {
                    *b = b.sub(&a.mul(l));
                }
                let col = cols.len();
                cols.push(a_j);
                if let Some(u) = upper {
                    bound_rows.push((col, u.sub(l)));
                }
                columns.push(Column::Shifted { col, lower: l.clone() });
            }
            (None, Some(u)) => {
                for (b, a) in rhs.iter_mut().zip(&a_j) {
                    *b = b.sub(&a.mul(u));
                }
                let col = cols.len();
                cols.push(a_j.iter().map(Scalar::neg).collect());
                columns.push(Column::Mirrored { col, upper: u.clone() });
            }
            (None, None) => {
                let pos = cols.len();
                cols.push(a_j.iter().map(Scalar::neg).collect());
                cols.push(a_j);
                // cols[pos] is -A_j, cols[pos + 1] is A_j
                columns.push(Column::Split { pos: pos + 1, neg: pos });
            }
        }
    }

    let n_struct = cols.len() + bound_rows.len();
    let total_rows = m + bound_rows.len();
    let mut rows = vec![vec![T::zero(); n_struct]; total_rows];
    for (c, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            rows[i][c] = v.clone();
        }
    }
    for (k, (col, width)) in bound_rows.into_iter().enumerate() {
        let r = m + k;
        rows[r][col] = T::one();
        rows[r][cols.len() + k] = T::one();
        rhs.push(width);
    }
    StandardForm {
        rows,
        rhs,
        columns,
        original_rows: m,
    }
}

/// Phase-1 simplex over a dense tableau.
///
/// The returned certificate has already passed [`verify`]; a certificate that
/// fails it is reported as [`Error::Numerical`] rather than returned.
pub fn solve_feasibility<T: Scalar>(
    p: &FeasibilityProblem<T>,
    opts: &SolverOptions,
) -> Result<Certificate<T>> {
    let cert = phase_one(p, opts)?;
    verify(p, &cert, opts).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(cert)
}

fn phase_one<T: Scalar>(p: &FeasibilityProblem<T>, opts: &SolverOptions) -> Result<Certificate<T>> {
    let sf = standardize(p);
    let m = sf.rows.len();
    let n = sf.rows.first().map_or(0, |r| r.len());
    // columns: n structural, m artificial, then rhs
    let width = n + m + 1;
    let rhs_col = n + m;
    let mut signs = Vec::with_capacity(m);
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    for (i, (row, b)) in sf.rows.iter().zip(&sf.rhs).enumerate() {
        let flip = *b < T::zero();
        signs.push(!flip);
        let mut t = Vec::with_capacity(width);
        for v in row {
            t.push(if flip { v.neg() } else { v.clone() });
        }
        for k in 0..m {
            t.push(if k == i { T::one() } else { T::zero() });
        }
        t.push(if flip { b.neg() } else { b.clone() });
        tab.push(t);
    }
    // reduced costs of the phase-1 objective (sum of artificials)
    let mut cost = vec![T::zero(); width];
    for j in (0..n).chain(std::iter::once(rhs_col)) {
        let mut s = T::zero();
        for row in &tab {
            s = s.sub(&row[j]);
        }
        cost[j] = s;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Dantzig pricing until degeneracy persists, then Bland's rule, which
    // cannot cycle.
    let piv_tol = if T::EXACT { T::zero() } else { T::from_f64(PIVOT_TOL) };
    let tie_tol = T::tolerance();
    let mut degenerate_run = 0usize;
    let mut bland = false;
    let mut iterations = 0;
    loop {
        let entering = if bland {
            (0..n + m).find(|&j| cost[j].is_negative())
        } else {
            (0..n + m)
                .filter(|&j| cost[j].is_negative())
                .fold(None, |best: Option<usize>, j| match best {
                    Some(b) if cost[b] <= cost[j] => Some(b),
                    _ => Some(j),
                })
        };
        let Some(j) = entering else { break };
        iterations += 1;
        if iterations > opts.max_iterations {
            return Err(Error::Unsolved {
                iterations: opts.max_iterations,
            });
        }
        let mut leave: Option<(usize, T)> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[j] <= piv_tol || row[j].is_zero() {
                continue;
            }
            let ratio = row[rhs_col].div(&row[j]);
            let better = match &leave {
                None => true,
                Some((r, best)) => {
                    let diff = ratio.sub(best);
                    if diff.abs() <= tie_tol {
                        basis[i] < basis[*r]
                    } else {
                        diff.is_negative()
                    }
                }
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // The phase-1 objective is bounded below by zero, so some row must block.
        let Some((r, ratio)) = leave else {
            return Err(Error::Numerical("phase-1 ray found".into()));
        };
        if ratio.abs() <= tie_tol {
            degenerate_run += 1;
            if degenerate_run > DEGENERATE_RUN {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
        pivot(&mut tab, &mut cost, r, j);
        basis[r] = j;
    }

    let objective = cost[rhs_col].neg();
    let feasible = if T::EXACT {
        objective.is_zero()
    } else {
        objective.to_f64() <= opts.eps_lp
    };

    if feasible {
        let mut values = vec![T::zero(); n];
        for (i, &bj) in basis.iter().enumerate() {
            if bj < n {
                values[bj] = tab[i][rhs_col].clone();
            }
        }
        let point = sf
            .columns
            .iter()
            .map(|c| match c {
                Column::Shifted { col, lower } => lower.add(&values[*col]),
                Column::Mirrored { col, upper } => upper.sub(&values[*col]),
                Column::Split { pos, neg } => values[*pos].sub(&values[*neg]),
            })
            .collect();
        return Ok(Certificate::Feasible { point });
    }

    // y_i = 1 - reduced cost of artificial i, undoing the row flip.
    let mut dual: Vec<T> = (0..sf.original_rows)
        .map(|i| {
            let y = T::one().sub(&cost[n + i]);
            if signs[i] {
                y
            } else {
                y.neg()
            }
        })
        .collect();
    let scale = dual
        .iter()
        .map(Scalar::abs)
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    if scale.is_zero() {
        return Err(Error::Numerical("zero Farkas multiplier".into()));
    }
    for y in &mut dual {
        *y = y.div(&scale);
    }
    Ok(Certificate::Infeasible { dual })
}

fn pivot<T: Scalar>(tab: &mut [Vec<T>], cost: &mut [T], r: usize, j: usize) {
    let width = tab[r].len();
    let piv = tab[r][j].clone();
    let nz: Vec<usize> = (0..width).filter(|&k| !tab[r][k].is_zero()).collect();
    for &k in &nz {
        tab[r][k] = tab[r][k].div(&piv);
    }
    tab[r][j] = T::one();
    let pivot_row = tab[r].clone();
    let eliminate = |row: &mut Vec<T>| {
        let f = row[j].clone();
        if f.is_zero() {
            return;
        }
        for &k in &nz {
            let v = row[k].sub(&f.mul(&pivot_row[k]));
            row[k] = if !T::EXACT && v.abs().to_f64() < FLUSH { T::zero() } else { v };
        }
        row[j] = T::zero();
    };
    for (i, row) in tab.iter_mut().enumerate() {
        if i != r {
            eliminate(row);
        }
    }
    let mut c = cost.to_vec();
    eliminate(&mut c);
    cost.clone_from_slice(&c);
}
