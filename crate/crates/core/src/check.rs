//! Cross-module invariant checks runnable against a single model: slice
//! normalization and recursion consistency, exact-evaluation residuals and
//! slice agreement, stochasticity, operator contraction, and the oracle's
//! fixed-point certificate.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::bellman::{
    apply_l, apply_l_max, policy_matrices, policy_value_exact, SolveMethod,
};
use crate::error::{Error, Result};
use crate::generate::random_vector;
use crate::linalg::TOL_RESIDUAL;
use crate::mdp::{enumerate_policies, Mdp, Policy};
use crate::oracle::{oracle_solve, OPT_TOL};
use crate::slice;

/// Outcome of one named invariant check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Results of a full check run. `passed` ignores skipped checks, which are
/// listed in `warnings`.
#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub checks: Vec<CheckOutcome>,
    pub warnings: Vec<String>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckOutcome {
            name,
            passed,
            detail: detail.into(),
        });
    }
}

/// Runs every applicable invariant check against `mdp`.
///
/// `depth` bounds the slice horizons exercised, `seed` fixes the randomized
/// probes, and `policy_cap` bounds enumeration. When the policy space
/// exceeds the cap, the per-policy checks fall back to a random sample and
/// the oracle-backed check is skipped with a warning rather than failing.
pub fn run_checks(mdp: &Mdp, depth: usize, seed: u64, policy_cap: u64) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let mut rng = StdRng::seed_from_u64(seed);

    let (policies, sampled) = match enumerate_policies(mdp, policy_cap) {
        Ok(iter) => (iter.collect::<Vec<_>>(), false),
        Err(Error::PolicySpaceTooLarge { count, cap }) => {
            report.warnings.push(format!(
                "policy space has {count} policies (cap {cap}); checking a random sample of 50"
            ));
            (sample_policies(mdp, &mut rng, 50), true)
        }
        Err(e) => return Err(e),
    };

    check_slice_normalization(mdp, &policies, depth, &mut report)?;
    check_slice_recursions(mdp, &policies, depth, &mut report)?;
    check_stochasticity(mdp, &policies, &mut report)?;
    check_contraction(mdp, &policies, &mut rng, &mut report)?;

    if mdp.gamma() < 1.0 {
        check_bellman_residuals(mdp, &policies, &mut report)?;
        if sampled {
            report
                .warnings
                .push("optimal-value fixed-point check skipped: policy space too large".into());
        } else {
            check_vmax_fixed_point(mdp, policy_cap, &mut report)?;
        }
    } else {
        report.warnings.push(
            "exact-evaluation and optimal-value checks skipped: discount factor is 1".into(),
        );
    }

    Ok(report)
}

fn sample_policies(mdp: &Mdp, rng: &mut StdRng, count: usize) -> Vec<Policy> {
    (0..count)
        .map(|_| {
            let choices = mdp
                .states()
                .map(|s| rng.gen_range(0..mdp.actions(s).len()))
                .collect();
            Policy::from_indices(mdp, choices).expect("sampled indices are in range")
        })
        .collect()
}

/// Occupation probabilities at each step form a distribution over the slice.
fn check_slice_normalization(
    mdp: &Mdp,
    policies: &[Policy],
    depth: usize,
    report: &mut CheckReport,
) -> Result<()> {
    let mut worst: f64 = 0.0;
    for p in policies {
        for s in mdp.states() {
            for action in mdp.actions(s) {
                let id = action.id().to_string();
                for n in 1..=depth.max(1) {
                    let mut total = 0.0;
                    for t in slice::q_slice(mdp, p, n, s, &id)? {
                        let q = slice::q_slice_p(mdp, p, n, s, &id, t)?;
                        if q < 0.0 {
                            report.push(
                                "slice-normalization",
                                false,
                                format!("negative occupation probability {q}"),
                            );
                            return Ok(());
                        }
                        total += q;
                    }
                    worst = worst.max((total - 1.0).abs());
                }
            }
        }
    }
    let tol = depth.max(1) as f64 * slice::TOL_NUM;
    report.push(
        "slice-normalization",
        worst <= tol,
        format!("max |sum - 1| = {worst:.3e} (tolerance {tol:.1e})"),
    );
    Ok(())
}

/// The two evaluation routes of each slice function agree.
fn check_slice_recursions(
    mdp: &Mdp,
    policies: &[Policy],
    depth: usize,
    report: &mut CheckReport,
) -> Result<()> {
    let mut worst: f64 = 0.0;
    for p in policies {
        for s in mdp.states() {
            for action in mdp.actions(s) {
                let id = action.id().to_string();
                for n in 1..=depth.max(1) {
                    let direct = slice::q_slice(mdp, p, n, s, &id)?;
                    let unrolled = slice::q_slice_via_first_step(mdp, p, n, s, &id)?;
                    if direct != unrolled {
                        report.push("slice-recursions", false, "slice sets disagree".to_string());
                        return Ok(());
                    }

                    let gap = (slice::rq_slice(mdp, p, n, s, &id)?
                        - slice::rq_slice_via_first_step(mdp, p, n, s, &id)?)
                    .abs();
                    worst = worst.max(gap);

                    let gap = (slice::q_expected_n(mdp, p, n, s, &id)?
                        - slice::q_expected_n_one_step(mdp, p, n, s, &id)?)
                    .abs();
                    worst = worst.max(gap);

                    if n >= 2 {
                        for t in mdp.states() {
                            let gap = (slice::q_slice_p(mdp, p, n, s, &id, t)?
                                - slice::q_slice_p_via_last_step(mdp, p, n, s, &id, t)?)
                            .abs();
                            worst = worst.max(gap);
                        }
                    }
                }
            }
        }
    }
    report.push(
        "slice-recursions",
        worst <= 1e-9,
        format!("max route disagreement = {worst:.3e} (tolerance 1e-9)"),
    );
    Ok(())
}

/// Every policy's transition matrix is row-stochastic.
fn check_stochasticity(mdp: &Mdp, policies: &[Policy], report: &mut CheckReport) -> Result<()> {
    for p in policies {
        if !policy_matrices(mdp, p)?.transition.is_stochastic() {
            report.push("stochasticity", false, "non-stochastic transition matrix");
            return Ok(());
        }
    }
    report.push(
        "stochasticity",
        true,
        format!("{} transition matrices checked", policies.len()),
    );
    Ok(())
}

/// Both operators are gamma-Lipschitz in the sup norm.
fn check_contraction(
    mdp: &Mdp,
    policies: &[Policy],
    rng: &mut StdRng,
    report: &mut CheckReport,
) -> Result<()> {
    let gamma = mdp.gamma();
    let n = mdp.n_states();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u = random_vector(rng, n, -5.0, 5.0);
        let v = random_vector(rng, n, -5.0, 5.0);
        let dist = u.sup_dist(&v)?;
        for p in policies.iter().take(8) {
            let excess = apply_l(mdp, p, &u)?.sup_dist(&apply_l(mdp, p, &v)?)? - gamma * dist;
            worst = worst.max(excess);
        }
        let excess = apply_l_max(mdp, &u)?.sup_dist(&apply_l_max(mdp, &v)?)? - gamma * dist;
        worst = worst.max(excess);
    }
    report.push(
        "contraction",
        worst <= 1e-12,
        format!("max Lipschitz excess = {worst:.3e} (tolerance 1e-12)"),
    );
    Ok(())
}

/// Exact evaluation satisfies the one-step equation and matches the slice
/// value.
fn check_bellman_residuals(mdp: &Mdp, policies: &[Policy], report: &mut CheckReport) -> Result<()> {
    let mut worst_residual: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let slice_tol = 1e-7;
    for p in policies {
        let value = policy_value_exact(mdp, p, SolveMethod::Direct)?;
        let residual = apply_l(mdp, p, &value)?.sup_dist(&value)?;
        worst_residual = worst_residual.max(residual);
        for s in mdp.states() {
            let est = slice::v_expected(mdp, p, s, slice_tol)?;
            worst_gap = worst_gap.max((est.value - value.get(s)).abs());
        }
    }
    let gap_tol = slice_tol + TOL_RESIDUAL;
    report.push(
        "bellman-residuals",
        worst_residual <= TOL_RESIDUAL && worst_gap <= gap_tol,
        format!(
            "max residual = {worst_residual:.3e} (tolerance {TOL_RESIDUAL:.1e}), max slice gap = {worst_gap:.3e}"
        ),
    );
    Ok(())
}

/// The oracle's optimal value vector is a fixed point of the optimizing
/// operator.
fn check_vmax_fixed_point(mdp: &Mdp, policy_cap: u64, report: &mut CheckReport) -> Result<()> {
    let oracle = oracle_solve(mdp, policy_cap, false)?;
    let gap = apply_l_max(mdp, &oracle.vmax)?.sup_dist(&oracle.vmax)?;
    report.push(
        "optimal-value-fixed-point",
        gap <= 2.0 * OPT_TOL,
        format!("||L_max(vmax) - vmax|| = {gap:.3e} (tolerance {:.1e})", 2.0 * OPT_TOL),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{loop1, m2};

    #[test]
    fn reference_models_pass_all_checks() {
        for mdp in [m2(), loop1()] {
            let report = run_checks(&mdp, 4, 0, 1_000_000).unwrap();
            assert!(report.all_passed(), "failing checks: {:?}", report.checks);
            assert!(report.warnings.is_empty());
        }
    }

    #[test]
    fn undiscounted_model_skips_matrix_checks() {
        let mdp = m2().with_gamma(1.0).unwrap();
        let report = run_checks(&mdp, 3, 0, 1_000_000).unwrap();
        assert!(report.all_passed());
        assert!(!report.warnings.is_empty());
        assert!(report
            .checks
            .iter()
            .all(|c| c.name != "optimal-value-fixed-point"));
    }

    #[test]
    fn identical_seeds_give_identical_reports() {
        let mdp = m2();
        let a = run_checks(&mdp, 3, 123, 1_000_000).unwrap();
        let b = run_checks(&mdp, 3, 123, 1_000_000).unwrap();
        let render = |r: &CheckReport| {
            r.checks
                .iter()
                .map(|c| format!("{}:{}:{}", c.name, c.passed, c.detail))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(render(&a), render(&b));
    }
}
