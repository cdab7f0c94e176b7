//! Dictionary simplex over exact rationals for `min c·x, Ax ≤ b, x ≥ 0`
//! with `b ≥ 0`, so the origin is a feasible starting vertex.
//!
//! Bland's rule (smallest variable label enters and leaves) rules out
//! cycling and makes the optimal vertex reproducible.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Unbounded,
}

/// Variables `0..n` are structural, `n..n+m` the slacks of the rows.
pub fn minimize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m, "one right-hand side per row");
    assert!(b.iter().all(|v| !v.is_negative()), "origin must be feasible");

    // basic_i = rhs_i - sum_j coef[i][j] * nonbasic_j
    let mut coef: Vec<Vec<Rational>> = a.to_vec();
    let mut rhs: Vec<Rational> = b.to_vec();
    // z = z0 + sum_j cost_j * nonbasic_j
    let mut cost: Vec<Rational> = c.to_vec();
    let mut z0 = Rational::zero();
    let mut nonbasic: Vec<usize> = (0..n).collect();
    let mut basic: Vec<usize> = (n..n + m).collect();

    loop {
        let entering = (0..n)
            .filter(|&j| cost[j].is_negative())
            .min_by_key(|&j| nonbasic[j]);
        let Some(s) = entering else { break };

        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if !coef[i][s].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &coef[i][s];
            let better = match &leave {
                None => true,
                Some((r, best)) => ratio < *best || (ratio == *best && basic[i] < basic[*r]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((r, _)) = leave else {
            return LpOutcome::Unbounded;
        };

        let pivot = coef[r][s].clone();
        rhs[r] = &rhs[r] / &pivot;
        for j in 0..n {
            if j != s && !coef[r][j].is_zero() {
                coef[r][j] = &coef[r][j] / &pivot;
            }
        }
        coef[r][s] = pivot.recip();

        let rhs_r = rhs[r].clone();
        let (before, rest) = coef.split_at_mut(r);
        let (row_r, after) = rest.split_first_mut().expect("pivot row exists");
        for (i, row) in before.iter_mut().chain(after.iter_mut()).enumerate() {
            let i = if i < r { i } else { i + 1 };
            let factor = row[s].clone();
            if factor.is_zero() {
                continue;
            }
            rhs[i] -= &factor * &rhs_r;
            for j in 0..n {
                if j != s && !row_r[j].is_zero() {
                    row[j] -= &factor * &row_r[j];
                }
            }
            row[s] = -&factor * &row_r[s];
        }

        let factor = cost[s].clone();
        z0 += &factor * &rhs_r;
        for j in 0..n {
            if j != s && !row_r[j].is_zero() {
                cost[j] -= &factor * &row_r[j];
            }
        }
        cost[s] = -&factor * &row_r[s];

        std::mem::swap(&mut nonbasic[s], &mut basic[r]);
    }

    let mut x = vec![Rational::zero(); n];
    for (i, &var) in basic.iter().enumerate() {
        if var < n {
            x[var] = rhs[i].clone();
        }
    }
    LpOutcome::Optimal { value: z0, x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn rows(data: &[&[i64]]) -> Vec<Vec<Rational>> {
        data.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let c = vec![int(-3), int(-5)];
        let a = rows(&[&[1, 0], &[0, 2], &[3, 2]]);
        let b = vec![int(4), int(12), int(18)];
        match minimize(&c, &a, &b) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, int(-36));
                assert_eq!(x, vec![int(2), int(6)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_unboundedness() {
        let c = vec![int(-1), int(0)];
        let a = rows(&[&[-1, 1]]);
        assert_eq!(minimize(&c, &a, &[int(1)]), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // Beale-style degenerate instance; Bland's rule must not cycle.
        let c = vec![int(-10), int(57), int(9), int(24)];
        let a = vec![
            vec![Rational::new(1.into(), 2.into()), Rational::new((-11).into(), 2.into()), Rational::new((-5).into(), 2.into()), int(9)],
            vec![Rational::new(1.into(), 2.into()), Rational::new((-3).into(), 2.into()), Rational::new((-1).into(), 2.into()), int(1)],
            vec![int(1), int(0), int(0), int(0)],
        ];
        let b = vec![int(0), int(0), int(1)];
        match minimize(&c, &a, &b) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(-1)),
            other => panic!("{other:?}"),
        }
    }
}
