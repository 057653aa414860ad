//! Brute-force reference solver for tiny bounded LPs.
#![allow(dead_code)]

use nonlocality_core::LinearProgram;
use rand::Rng;

/// Solves `M z = r` by Gaussian elimination with partial pivoting.
fn solve_square(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[p][c].abs() < 1e-10 {
            return None;
        }
        m.swap(c, p);
        r.swap(c, p);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for j in c..n {
                m[i][j] -= f * m[c][j];
            }
            r[i] -= f * r[c];
        }
    }
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * z[j]).sum();
        z[i] = (r[i] - s) / m[i][i];
    }
    Some(z)
}

/// Minimum objective over all basic feasible solutions, or `None` when no
/// vertex is feasible. Rows must be linearly independent and every bound finite.
pub fn vertex_enumeration(lp: &LinearProgram, tol: f64) -> Option<f64> {
    let (n, m) = (lp.num_vars(), lp.num_rows());
    let mut dense = vec![vec![0.0; n]; m];
    for (i, row) in lp.rows().iter().enumerate() {
        for &(j, v) in row {
            dense[i][j] += v;
        }
    }
    let mut best: Option<f64> = None;
    for basis_mask in 0u32..(1 << n) {
        if basis_mask.count_ones() as usize != m {
            continue;
        }
        let basic: Vec<usize> = (0..n).filter(|j| basis_mask >> j & 1 == 1).collect();
        let nonbasic: Vec<usize> = (0..n).filter(|j| basis_mask >> j & 1 == 0).collect();
        for bound_mask in 0u32..(1 << nonbasic.len()) {
            let mut x = vec![0.0; n];
            for (k, &j) in nonbasic.iter().enumerate() {
                let (lo, hi) = lp.bounds()[j];
                x[j] = if bound_mask >> k & 1 == 1 { hi } else { lo };
            }
            let rhs: Vec<f64> = (0..m)
                .map(|i| lp.rhs()[i] - nonbasic.iter().map(|&j| dense[i][j] * x[j]).sum::<f64>())
                .collect();
            let mat: Vec<Vec<f64>> = (0..m).map(|i| basic.iter().map(|&j| dense[i][j]).collect()).collect();
            let Some(z) = solve_square(mat, rhs) else { continue };
            for (&j, v) in basic.iter().zip(z) {
                x[j] = v;
            }
            let inside = x
                .iter()
                .zip(lp.bounds())
                .all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol);
            if inside && lp.primal_residual(&x) <= tol {
                let obj = lp.objective_at(&x);
                best = Some(best.map_or(obj, |b| b.min(obj)));
            }
        }
    }
    best
}

/// A random bounded LP with `n <= 6` variables and `m < n` dense rows. Half
/// of the instances are feasible by construction.
pub fn random_bounded_lp<R: Rng>(rng: &mut R) -> LinearProgram {
    let n = rng.gen_range(2..=6);
    let m = rng.gen_range(1..n);
    let bounds: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let lo = rng.gen_range(-3.0..1.0);
            (lo, lo + rng.gen_range(0.5..4.0))
        })
        .collect();
    let rows: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|_| (0..n).map(|j| (j, rng.gen_range(-2.0..2.0))).collect())
        .collect();
    let rhs: Vec<f64> = if rng.gen_bool(0.5) {
        let x0: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        rows.iter().map(|r| r.iter().map(|&(j, v)| v * x0[j]).sum()).collect()
    } else {
        (0..m).map(|_| rng.gen_range(-6.0..6.0)).collect()
    };
    let objective = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    LinearProgram::new(objective, rows, rhs, bounds).unwrap()
}
