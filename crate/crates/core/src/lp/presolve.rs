//! Removal of linearly dependent equality rows.

use super::program::LinearProgram;

/// Pivots smaller than this (relative to the row's largest entry) count as zero.
pub const PIVOT_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum RowSelection {
    /// Indices of a maximal independent subset of the rows, in original order.
    Independent(Vec<usize>),
    /// A dependent row whose right-hand side disagrees with the combination
    /// of the rows it depends on.
    Inconsistent { row: usize, residual: f64 },
}

/// Row-echelon elimination over `[A | b]`, keeping the rows that produce a pivot.
pub fn independent_rows(lp: &LinearProgram, consistency_tol: f64) -> RowSelection {
    let n = lp.num_vars();
    // each stored pivot row is normalized so that row[col] == 1
    let mut pivots: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut kept = Vec::new();
    let rhs_scale = 1.0 + lp.rhs().iter().fold(0.0f64, |a, b| a.max(b.abs()));

    for (i, row) in lp.rows().iter().enumerate() {
        let mut dense = vec![0.0; n + 1];
        for &(j, v) in row {
            dense[j] += v;
        }
        dense[n] = lp.rhs()[i];
        let scale = dense[..n].iter().fold(0.0f64, |a, b| a.max(b.abs()));

        for (col, prow) in &pivots {
            let factor = dense[*col];
            if factor != 0.0 {
                for (d, p) in dense.iter_mut().zip(prow) {
                    *d -= factor * p;
                }
                dense[*col] = 0.0;
            }
        }

        let (best, mag) =
            dense[..n].iter().enumerate().fold(
                (0, 0.0f64),
                |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc },
            );
        if scale > 0.0 && mag > PIVOT_THRESHOLD * scale {
            let inv = 1.0 / dense[best];
            for v in dense.iter_mut() {
                *v *= inv;
            }
            dense[best] = 1.0;
            pivots.push((best, dense));
            kept.push(i);
        } else if dense[n].abs() > consistency_tol * rhs_scale {
            return RowSelection::Inconsistent {
                row: i,
                residual: dense[n],
            };
        }
    }
    RowSelection::Independent(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_sum_of_rows() {
        let lp = LinearProgram::new(
            vec![0.0; 3],
            vec![
                vec![(0, 1.0), (1, 1.0)],
                vec![(1, 1.0), (2, 1.0)],
                vec![(0, 1.0), (1, 2.0), (2, 1.0)],
                vec![],
            ],
            vec![1.0, 2.0, 3.0, 0.0],
            vec![(0.0, 10.0); 3],
        )
        .unwrap();
        assert_eq!(independent_rows(&lp, 1e-9), RowSelection::Independent(vec![0, 1]));
    }

    #[test]
    fn detects_inconsistent_rhs() {
        let lp = LinearProgram::new(
            vec![0.0; 2],
            vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]],
            vec![1.0, 3.0],
            vec![(0.0, 10.0); 2],
        )
        .unwrap();
        assert!(matches!(
            independent_rows(&lp, 1e-9),
            RowSelection::Inconsistent { row: 1, .. }
        ));
    }
}
