use super::{Certificate, FeasibilityProblem, Scalar, SolverOptions};
use crate::error::{Error, Result};

/// `yᵀb - sup_{l<=x<=u} (Aᵀy)ᵀx`, or `None` when the supremum is unbounded.
///
/// In floating point, reduced coefficients within `Scalar::tolerance()` of zero
/// are treated as zero so rounding noise on an unbounded column does not void
/// an otherwise valid dual.
pub fn dual_margin<T: Scalar>(p: &FeasibilityProblem<T>, y: &[T]) -> Option<T> {
    if y.len() != p.num_constraints() {
        return None;
    }
    let mut sup = T::zero();
    for j in 0..p.num_vars() {
        let mut c = T::zero();
        for (row, yi) in p.rows().iter().zip(y) {
            if !row[j].is_zero() && !yi.is_zero() {
                c = c.add(&row[j].mul(yi));
            }
        }
        if !T::EXACT && c.abs() <= T::tolerance() {
            continue;
        }
        let bound = if c > T::zero() {
            &p.upper()[j]
        } else if c < T::zero() {
            &p.lower()[j]
        } else {
            continue;
        };
        sup = sup.add(&c.mul(bound.as_ref()?));
    }
    let mut yb = T::zero();
    for (b, yi) in p.rhs().iter().zip(y) {
        yb = yb.add(&b.mul(yi));
    }
    Some(yb.sub(&sup))
}

/// Re-checks a certificate against the problem it claims to settle.
///
/// For a point returns the worst violation (residual or bound); for a dual
/// returns the certified margin. Exact mode demands zero residual / positive
/// margin, float mode `eps_lp` / `delta_sep`.
pub fn verify<T: Scalar>(p: &FeasibilityProblem<T>, cert: &Certificate<T>, opts: &SolverOptions) -> Result<T> {
    match cert {
        Certificate::Feasible { point } => {
            if point.len() != p.num_vars() {
                return Err(Error::shape(
                    format!("{} variables", p.num_vars()),
                    format!("point of length {}", point.len()),
                ));
            }
            let mut worst = T::zero();
            let mut note = |v: T| {
                let v = v.abs();
                if v > worst {
                    worst = v;
                }
            };
            for (row, b) in p.rows().iter().zip(p.rhs()) {
                let mut s = T::zero();
                for (a, x) in row.iter().zip(point) {
                    if !a.is_zero() {
                        s = s.add(&a.mul(x));
                    }
                }
                note(s.sub(b));
            }
            for ((x, l), u) in point.iter().zip(p.lower()).zip(p.upper()) {
                if let Some(l) = l {
                    if x < l {
                        note(l.sub(x));
                    }
                }
                if let Some(u) = u {
                    if x > u {
                        note(x.sub(u));
                    }
                }
            }
            let ok = if T::EXACT {
                worst.is_zero()
            } else {
                worst.to_f64() <= opts.eps_lp
            };
            if ok {
                Ok(worst)
            } else {
                Err(Error::Numerical(format!("point violates constraints by {:?}", worst)))
            }
        }
        Certificate::Infeasible { dual } => {
            let margin = dual_margin(p, dual)
                .ok_or_else(|| Error::Numerical("dual is unbounded over the variable box".into()))?;
            let ok = if T::EXACT {
                margin > T::zero()
            } else {
                margin.to_f64() > opts.delta_sep
            };
            if ok {
                Ok(margin)
            } else {
                Err(Error::Numerical(format!("dual separates by only {:?}", margin)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::solve_feasibility;
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    /// Convex-hull membership for points `pts` in the plane-free dimension d.
    fn hull_problem(pts: &[Vec<f64>], target: &[f64]) -> FeasibilityProblem<f64> {
        let d = target.len();
        let mut rows: Vec<Vec<f64>> = (0..d).map(|k| pts.iter().map(|p| p[k]).collect()).collect();
        rows.push(vec![1.0; pts.len()]);
        let mut rhs = target.to_vec();
        rhs.push(1.0);
        FeasibilityProblem::nonnegative(rows, rhs).unwrap()
    }

    #[test]
    fn forged_certificates_are_rejected() {
        let p = FeasibilityProblem::new(vec![vec![1.0]], vec![0.5], vec![Some(0.0)], vec![Some(1.0)]).unwrap();
        let o = SolverOptions::default();
        assert!(verify(&p, &Certificate::Feasible { point: vec![0.4] }, &o).is_err());
        assert!(verify(&p, &Certificate::Feasible { point: vec![0.5] }, &o).is_ok());
        assert!(verify(&p, &Certificate::Infeasible { dual: vec![1.0] }, &o).is_err());
        assert!(verify(&p, &Certificate::Infeasible { dual: vec![-1.0] }, &o).is_err());
    }

    #[test]
    fn unbounded_box_has_no_margin() {
        let p = FeasibilityProblem::nonnegative(vec![vec![1.0]], vec![-1.0]).unwrap();
        assert_eq!(dual_margin(&p, &[1.0]), None);
        assert_eq!(dual_margin(&p, &[-1.0]), Some(1.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn hull_points_feasible_displaced_points_not(
            pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 4..9),
            weights in prop::collection::vec(0.01f64..1.0, 9),
            dir in prop::collection::vec(-1.0f64..1.0, 3),
        ) {
            let o = SolverOptions::default();
            let n = pts.len();
            let s: f64 = weights[..n].iter().sum();
            let inside: Vec<f64> = (0..3)
                .map(|k| (0..n).map(|i| weights[i] / s * pts[i][k]).sum())
                .collect();
            let c = solve_feasibility(&hull_problem(&pts, &inside), &o).unwrap();
            prop_assert!(c.is_feasible());

            // Push past the supporting hyperplane in direction `dir`.
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assume!(norm > 0.1);
            let u: Vec<f64> = dir.iter().map(|v| v / norm).collect();
            let h = pts
                .iter()
                .map(|p| p.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            let t = inside.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
            let outside: Vec<f64> = inside
                .iter()
                .zip(&u)
                .map(|(x, d)| x + (h - t + 1e-3) * d)
                .collect();
            let p = hull_problem(&pts, &outside);
            let c = solve_feasibility(&p, &o).unwrap();
            prop_assert!(!c.is_feasible());

            // Exact arithmetic reaches the same verdict on the same data.
            let e = solve_feasibility(&p.to_exact(), &o).unwrap();
            prop_assert!(!e.is_feasible());
            prop_assert!(verify(&p.to_exact(), &e, &o).unwrap() > <BigRational as Scalar>::zero());
        }
    }
}
