//! Exact feasibility of `A x = b, x >= 0` by phase-1 simplex over rationals.
//!
//! Redundant equality rows are removed by Gauss-Jordan elimination first; an
//! inconsistent row found there settles infeasibility without pivoting.
//! Pivoting uses Bland's rule, so it terminates without cycling.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Reduces `[A | b]` to an equivalent system of linearly independent rows.
/// Returns `None` when the system has no solution at all (ignoring signs).
pub fn independent_rows(
    a: &[Vec<BigRational>],
    b: &[BigRational],
) -> Option<(Vec<Vec<BigRational>>, Vec<BigRational>)> {
    let cols = a.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            debug_assert_eq!(row.len(), cols);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].recip();
        for v in rows[rank].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        rank += 1;
    }

    if rows[rank..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    rows.truncate(rank);
    let rhs = rows.iter_mut().map(|r| r.pop().unwrap()).collect();
    Some((rows, rhs))
}

/// Finds some `x >= 0` with `A x = b`, or `None` if none exists. The result
/// is a basic feasible solution.
pub fn find_feasible_point(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.first().map_or(0, Vec::len);
    let (mut rows, mut rhs) = independent_rows(a, b)?;
    let m = rows.len();

    for (row, r) in rows.iter_mut().zip(rhs.iter_mut()) {
        if r.is_negative() {
            row.iter_mut().for_each(|v| *v = -v.clone());
            *r = -r.clone();
        }
    }

    // Columns 0..n are the original variables, n..n+m the artificials.
    let width = n + m;
    let mut tableau: Vec<Vec<BigRational>> = rows
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.extend((0..m).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..width).collect();

    // Reduced costs of the phase-1 objective (sum of artificials).
    let mut cost: Vec<BigRational> = (0..width)
        .map(|j| {
            if j >= n {
                BigRational::zero()
            } else {
                -tableau.iter().map(|row| &row[j]).sum::<BigRational>()
            }
        })
        .collect();
    let mut objective: BigRational = rhs.iter().sum();

    while let Some(entering) = (0..width).find(|&j| cost[j].is_negative()) {

        let mut leaving: Option<(usize, BigRational)> = None;
        for i in 0..m {
            let coef = &tableau[i][entering];
            if !coef.is_positive() {
                continue;
            }
            let ratio = &rhs[i] / coef;
            let better = match &leaving {
                None => true,
                Some((best_row, best)) => {
                    ratio < *best || (ratio == *best && basis[i] < basis[*best_row])
                }
            };
            if better {
                leaving = Some((i, ratio));
            }
        }
        // The phase-1 objective is bounded below by zero.
        let (pivot_row, _) = leaving.expect("phase-1 problem is bounded");

        let inv = tableau[pivot_row][entering].recip();
        tableau[pivot_row].iter_mut().for_each(|v| *v *= &inv);
        rhs[pivot_row] *= &inv;
        let pivot = tableau[pivot_row].clone();
        let pivot_rhs = rhs[pivot_row].clone();
        for i in 0..m {
            if i == pivot_row || tableau[i][entering].is_zero() {
                continue;
            }
            let factor = tableau[i][entering].clone();
            for (v, p) in tableau[i].iter_mut().zip(&pivot) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
            rhs[i] -= &factor * &pivot_rhs;
        }
        let factor = cost[entering].clone();
        for (c, p) in cost.iter_mut().zip(&pivot) {
            if !p.is_zero() {
                *c -= &factor * p;
            }
        }
        objective += &factor * &pivot_rhs;
        basis[pivot_row] = entering;
    }

    if !objective.is_zero() {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = rhs[i].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use rand::{Rng, SeedableRng};

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    fn vec_of(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn satisfies(a: &[Vec<BigRational>], b: &[BigRational], x: &[BigRational]) -> bool {
        x.iter().all(|v| !v.is_negative())
            && a.iter().zip(b).all(|(row, rhs)| {
                row.iter().zip(x).map(|(c, v)| c * v).sum::<BigRational>() == *rhs
            })
    }

    /// Unique solution of `A x = b` when `A` has independent columns.
    fn solve_full_column_rank(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
        let n = a[0].len();
        let mut m: Vec<Vec<BigRational>> =
            a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain([v.clone()]).collect()).collect();
        for col in 0..n {
            let p = (col..m.len()).find(|&r| !m[r][col].is_zero())?;
            m.swap(col, p);
            let lead = m[col][col].clone();
            for v in m[col].iter_mut() {
                *v /= &lead;
            }
            for r in 0..m.len() {
                if r != col {
                    let f = m[r][col].clone();
                    let pivot = m[col].clone();
                    for (v, p) in m[r].iter_mut().zip(&pivot) {
                        *v -= &f * p;
                    }
                }
            }
        }
        if m[n..].iter().any(|r| !r[n].is_zero()) {
            return None;
        }
        Some(m[..n].iter().map(|r| r[n].clone()).collect())
    }

    /// Brute force over column supports: a feasible system has a
    /// nonnegative solution on some set of linearly independent columns.
    fn vertex_oracle(a: &[Vec<BigRational>], b: &[BigRational]) -> bool {
        let n = a[0].len();
        if b.iter().all(Zero::is_zero) {
            return true;
        }
        (1u32..(1 << n)).any(|subset| {
            let cols: Vec<usize> = (0..n).filter(|j| subset & (1 << j) != 0).collect();
            let sub: Vec<Vec<BigRational>> =
                a.iter().map(|r| cols.iter().map(|&j| r[j].clone()).collect()).collect();
            solve_full_column_rank(&sub, b).is_some_and(|x| x.iter().all(|v| !v.is_negative()))
        })
    }

    #[test]
    fn simple_feasible_system() {
        let a = mat(&[&[1, 1, 1], &[1, -1, 0]]);
        let b = vec_of(&[3, 1]);
        let x = find_feasible_point(&a, &b).unwrap();
        assert!(satisfies(&a, &b, &x));
    }

    #[test]
    fn sign_infeasible_system() {
        // x1 + x2 = -1 has no nonnegative solution.
        let a = mat(&[&[1, 1]]);
        assert!(find_feasible_point(&a, &vec_of(&[-1])).is_none());
        // Unique solution (3/2, -1/2).
        let a = mat(&[&[1, -1], &[1, 1]]);
        assert!(find_feasible_point(&a, &vec_of(&[2, 1])).is_none());
    }

    #[test]
    fn inconsistent_rows_detected_by_elimination() {
        let a = mat(&[&[1, 1], &[2, 2]]);
        assert!(independent_rows(&a, &vec_of(&[1, 3])).is_none());
        assert!(find_feasible_point(&a, &vec_of(&[1, 3])).is_none());
        let (rows, _) = independent_rows(&a, &vec_of(&[1, 2])).unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn degenerate_vertices_do_not_cycle() {
        // Classic degenerate system; many zero-level bases.
        let a = mat(&[&[1, 0, 0, 1, -1, 0], &[0, 1, 0, 1, 0, -1], &[0, 0, 1, 0, 1, 1]]);
        let b = vec_of(&[0, 0, 0]);
        let x = find_feasible_point(&a, &b).unwrap();
        assert!(satisfies(&a, &b, &x));
    }

    #[test]
    fn agrees_with_vertex_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut feasible = 0;
        for _ in 0..400 {
            let m = rng.random_range(1..4);
            let n = rng.random_range(2..7);
            let a: Vec<Vec<BigRational>> = (0..m)
                .map(|_| (0..n).map(|_| int(rng.random_range(-2..3))).collect())
                .collect();
            let b: Vec<BigRational> = (0..m).map(|_| int(rng.random_range(-3..4))).collect();
            let got = find_feasible_point(&a, &b);
            assert_eq!(got.is_some(), vertex_oracle(&a, &b), "{a:?} {b:?}");
            if let Some(x) = got {
                feasible += 1;
                assert!(satisfies(&a, &b, &x));
            }
        }
        assert!(feasible > 50 && feasible < 350, "{feasible}");
    }
}
