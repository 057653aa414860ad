use std::fmt::Write as _;

use crate::error::{invalid, Result};

/// `minimize c.x  subject to  A x = b,  lower <= x <= upper`.
///
/// Rows of `A` are stored sparse as `(column, value)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(
        objective: Vec<f64>,
        rows: Vec<Vec<(usize, f64)>>,
        rhs: Vec<f64>,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let n = objective.len();
        if bounds.len() != n {
            return Err(invalid(format!("{} bounds for {n} variables", bounds.len())));
        }
        if rhs.len() != rows.len() {
            return Err(invalid(format!(
                "{} right-hand sides for {} rows",
                rhs.len(),
                rows.len()
            )));
        }
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(invalid(format!("variable {j} has bounds [{lo}, {hi}]")));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                if j >= n {
                    return Err(invalid(format!("row {i} references column {j} of {n}")));
                }
                if !v.is_finite() {
                    return Err(invalid(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        if objective.iter().chain(&rhs).any(|v| !v.is_finite()) {
            return Err(invalid("objective and right-hand side must be finite"));
        }
        Ok(Self {
            objective,
            rows,
            rhs,
            bounds,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// `A x` for every row.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// Largest violation of `A x = b` or of the bounds.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let rows = self
            .row_activity(x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, b)| (ax - b).abs())
            .fold(0.0, f64::max);
        let bounds = x
            .iter()
            .zip(&self.bounds)
            .map(|(&v, &(lo, hi))| (lo - v).max(v - hi).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    /// Reduced costs `c - A^T y`.
    pub fn reduced_costs(&self, y: &[f64]) -> Vec<f64> {
        let mut z = self.objective.clone();
        for (row, &yi) in self.rows.iter().zip(y) {
            for &(j, v) in row {
                z[j] -= v * yi;
            }
        }
        z
    }

    /// Lower bound on the optimum implied by the row multipliers `y`:
    /// `b.y + sum_j min over [l_j, u_j] of z_j x_j`. The second value is the
    /// total reduced cost that points toward an infinite bound (zero for a
    /// dual-feasible `y`).
    pub fn dual_bound(&self, y: &[f64]) -> (f64, f64) {
        let z = self.reduced_costs(y);
        let mut bound = dot(&self.rhs, y);
        let mut infeasibility = 0.0f64;
        for (&zj, &(lo, hi)) in z.iter().zip(&self.bounds) {
            if zj > 0.0 {
                if lo.is_finite() {
                    bound += zj * lo;
                } else {
                    infeasibility = infeasibility.max(zj);
                }
            } else if zj < 0.0 {
                if hi.is_finite() {
                    bound += zj * hi;
                } else {
                    infeasibility = infeasibility.max(-zj);
                }
            }
        }
        (bound, infeasibility)
    }

    /// Plain-text dump: a `vars rows` header, the objective on one line,
    /// one `row col value` triple per nonzero, the right-hand side on one
    /// line, then one `lower upper` line per variable. Sections are
    /// separated by blank lines; infinite bounds are written `inf`/`-inf`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{} {}", self.num_vars(), self.num_rows());
        out.push('\n');
        let _ = writeln!(out, "{}", join(&self.objective));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                let _ = writeln!(out, "{i} {j} {v}");
            }
        }
        out.push('\n');
        let _ = writeln!(out, "{}", join(&self.rhs));
        out.push('\n');
        for &(lo, hi) in &self.bounds {
            let _ = writeln!(out, "{lo} {hi}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut sections: Vec<Vec<&str>> = vec![Vec::new()];
        for line in text.lines().map(str::trim) {
            if line.is_empty() {
                sections.push(Vec::new());
            } else if let Some(last) = sections.last_mut() {
                last.push(line);
            }
        }
        if sections.len() != 5 {
            return Err(invalid(format!(
                "expected 5 blank-line separated sections, found {}",
                sections.len()
            )));
        }
        let nums = |line: &str| -> Result<Vec<f64>> {
            line.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| invalid(format!("bad number {t:?}: {e}"))))
                .collect()
        };
        let header = nums(sections[0].first().copied().unwrap_or(""))?;
        if header.len() != 2 {
            return Err(invalid("header must be `vars rows`"));
        }
        let (n, m) = (header[0] as usize, header[1] as usize);
        let objective = if n == 0 {
            Vec::new()
        } else {
            nums(sections[1].first().copied().unwrap_or(""))?
        };
        let mut rows = vec![Vec::new(); m];
        for line in &sections[2] {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err(invalid(format!("bad triple {line:?}")));
            }
            let i: usize = t[0].parse().map_err(|_| invalid(format!("bad row in {line:?}")))?;
            let j: usize = t[1].parse().map_err(|_| invalid(format!("bad column in {line:?}")))?;
            let v: f64 = t[2].parse().map_err(|_| invalid(format!("bad value in {line:?}")))?;
            if i >= m {
                return Err(invalid(format!("row {i} out of range")));
            }
            rows[i].push((j, v));
        }
        let rhs = if m == 0 {
            Vec::new()
        } else {
            nums(sections[3].first().copied().unwrap_or(""))?
        };
        let bounds = sections[4]
            .iter()
            .map(|line| {
                let v = nums(line)?;
                if v.len() != 2 {
                    return Err(invalid(format!("bad bound line {line:?}")));
                }
                Ok((v[0], v[1]))
            })
            .collect::<Result<Vec<_>>>()?;
        if objective.len() != n {
            return Err(invalid(format!(
                "objective has {} entries, header says {n}",
                objective.len()
            )));
        }
        Self::new(objective, rows, rhs, bounds)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
