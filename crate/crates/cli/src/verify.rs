//! Independent re-derivation of a report's claims.

use anyhow::{anyhow, Result};
use nonlocality_core::lp::{CertificateCheck, SimplexOptions};
use nonlocality_core::{correlation_tensor, threshold_with, PhaseSettings, PureState, Scenario, SimplexSolver};

use crate::report::{digest_f64s, RunReport};

/// Allowed disagreement between reported and recomputed quantities.
pub const MATCH_TOL: f64 = 1e-6;
const NEGATIVE_TOL: f64 = 1e-9;

/// Failed checks, one line each. Errors are reserved for reports that cannot
/// be interpreted at all.
pub fn verify(report: &RunReport) -> Result<Vec<String>> {
    let sc = Scenario::new(report.scenario.parties, report.scenario.dim).map_err(|e| anyhow!("scenario: {e}"))?;
    let r = &report.result;
    let state = PureState::new(sc, r.state.clone()).map_err(|e| anyhow!("result.state: {e}"))?;
    let settings = PhaseSettings::from_radians(sc, &r.settings).map_err(|e| anyhow!("result.settings: {e}"))?;
    if r.witness.len() != sc.joint_len() {
        return Err(anyhow!(
            "result.witness has {} entries, expected {}",
            r.witness.len(),
            sc.joint_len()
        ));
    }
    if r.certificate.len() != sc.marginal_rows() + 1 {
        return Err(anyhow!(
            "result.certificate has {} entries, expected {}",
            r.certificate.len(),
            sc.marginal_rows() + 1
        ));
    }

    let mut failures = Vec::new();
    if digest_f64s(&r.witness) != r.witness_sha256 {
        failures.push("witness does not match witness_sha256".to_string());
    }
    if digest_f64s(&r.certificate) != r.certificate_sha256 {
        failures.push("certificate does not match certificate_sha256".to_string());
    }

    let tensor = correlation_tensor(&state, &settings)?;
    let solver = SimplexSolver::new(SimplexOptions {
        feasibility_tol: report.tolerances.feasibility,
        optimality_tol: report.tolerances.optimality,
        ..SimplexOptions::default()
    });
    match threshold_with(&solver, &state, &settings) {
        Ok(fresh) => {
            let diff = fresh.f_thr.value() - r.f_thr;
            if diff.abs() > MATCH_TOL {
                failures.push(format!(
                    "f_thr: reported {:.9}, recomputed {:.9} (difference {diff:+.3e})",
                    r.f_thr,
                    fresh.f_thr.value()
                ));
            }
        }
        Err(e) => failures.push(format!("f_thr: recomputation failed: {e}")),
    }
    if let Some(opt) = &report.optimizer {
        if (opt.best_f_thr - r.f_thr).abs() > MATCH_TOL {
            failures.push(format!(
                "optimizer.best_f_thr {:.9} differs from result.f_thr {:.9}",
                opt.best_f_thr, r.f_thr
            ));
        }
    }

    for (i, &w) in r.witness.iter().enumerate() {
        if w < -NEGATIVE_TOL {
            let digits: Vec<String> = atom_digits(sc, i).iter().map(|d| d.to_string()).collect();
            failures.push(format!(
                "nonnegativity violated: witness[{i}] (outcomes {}) = {w:e}",
                digits.join(",")
            ));
        }
    }

    let f = r.f_thr.clamp(0.0, 1.0);
    let check = CertificateCheck::run(&tensor, f, &r.witness, &r.certificate)?;
    if check.witness_normalization_error > MATCH_TOL {
        failures.push(format!("witness sums to 1 {:+e}", check.witness_normalization_error));
    }
    if check.witness_marginal_error > MATCH_TOL {
        failures.push(format!(
            "witness marginals differ from the noisy statistics at F = {f} by {:e}",
            check.witness_marginal_error
        ));
    }
    if check.lower_bound < r.f_thr - MATCH_TOL {
        failures.push(format!(
            "certificate proves only F >= {:.9}, below the reported {:.9}",
            check.lower_bound, r.f_thr
        ));
    }
    Ok(failures)
}

/// Outcome digits of a joint-distribution atom, party-major then setting.
fn atom_digits(sc: Scenario, mut atom: usize) -> Vec<usize> {
    let len = sc.parties() * sc.settings_per_party();
    let mut digits = vec![0; len];
    for slot in digits.iter_mut().rev() {
        *slot = atom % sc.dim();
        atom /= sc.dim();
    }
    digits
}
