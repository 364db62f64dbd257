//! Brute-force optimality oracle: enumerates the entire policy space,
//! evaluates every policy exactly, and reads off the optimal value vector
//! and the optimal-policy sets.
//!
//! This exists to certify solver outputs on desk-scale instances, not to
//! solve anything efficiently; the enumeration is exponential by design.

use rayon::prelude::*;
use std::collections::BTreeSet;

use crate::bellman::{policy_value_exact, q_value, SolveMethod};
use crate::error::{Error, Result};
use crate::linalg::StateVector;
use crate::mdp::{enumerate_policies, Mdp, Policy, StateId};

/// Slack for optimal-set membership. Policy values carry residuals up to
/// 1e-8, so an order of magnitude separates genuine ties from solver noise.
pub const OPT_TOL: f64 = 1e-7;

/// Everything the exhaustive sweep learns about a model.
///
/// Policy indices refer to the canonical lexicographic enumeration, repeated
/// in `policies` for convenience.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Componentwise maximum of all policy value vectors.
    pub vmax: StateVector,
    /// Exact value vector of each policy, by enumeration index.
    pub value_table: Vec<StateVector>,
    /// Per state, the indices of policies attaining `vmax` there within
    /// [`OPT_TOL`].
    pub per_state_optimal: Vec<BTreeSet<usize>>,
    /// Indices of policies whose value vector dominates every other policy's
    /// componentwise within [`OPT_TOL`].
    pub universal_optimal: BTreeSet<usize>,
    /// The enumerated policies themselves.
    pub policies: Vec<Policy>,
}

/// Evaluates every policy and aggregates the optimality sets.
///
/// Requires `gamma < 1` and a policy space within `cap`. With `parallel`,
/// per-policy evaluations run on the rayon pool; they are independent pure
/// solves, and the aggregation below is order-independent.
pub fn oracle_solve(mdp: &Mdp, cap: u64, parallel: bool) -> Result<OracleResult> {
    if mdp.gamma() >= 1.0 {
        return Err(Error::GammaNotContractive(mdp.gamma()));
    }
    let policies: Vec<Policy> = enumerate_policies(mdp, cap)?.collect();
    let value_table: Vec<StateVector> = if parallel {
        policies
            .par_iter()
            .map(|p| policy_value_exact(mdp, p, SolveMethod::Direct))
            .collect::<Result<_>>()?
    } else {
        policies
            .iter()
            .map(|p| policy_value_exact(mdp, p, SolveMethod::Direct))
            .collect::<Result<_>>()?
    };

    let n = mdp.n_states();
    let vmax = StateVector::from_vec(
        (0..n)
            .map(|s| {
                value_table
                    .iter()
                    .map(|v| v.get(StateId(s)))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect(),
    );

    let per_state_optimal: Vec<BTreeSet<usize>> = (0..n)
        .map(|s| {
            value_table
                .iter()
                .enumerate()
                .filter(|(_, v)| v.get(StateId(s)) >= vmax.get(StateId(s)) - OPT_TOL)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    let universal_optimal: BTreeSet<usize> = value_table
        .iter()
        .enumerate()
        .filter(|(_, v)| {
            (0..n).all(|s| v.get(StateId(s)) >= vmax.get(StateId(s)) - OPT_TOL)
        })
        .map(|(i, _)| i)
        .collect();

    Ok(OracleResult {
        vmax,
        value_table,
        per_state_optimal,
        universal_optimal,
        policies,
    })
}

/// Highest value achievable for the fixed initial pair `(s, a)` across all
/// policies: the enumerated maximum of one-step backups against each
/// policy's value vector.
pub fn q_max_check(mdp: &Mdp, oracle: &OracleResult, s: StateId, action: &str) -> Result<f64> {
    let (index, _) = mdp.require_action(s, action)?;
    Ok(oracle
        .value_table
        .iter()
        .map(|v| q_value(mdp, s, index, v))
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{ActionPmf, DEFAULT_POLICY_CAP};
    use crate::models::{loop1, m2};

    #[test]
    fn m2_has_unique_universal_optimum() {
        let mdp = m2();
        let oracle = oracle_solve(&mdp, DEFAULT_POLICY_CAP, false).unwrap();
        assert!((oracle.vmax.get(StateId(0)) - 1.0).abs() < 1e-9);
        assert!(oracle.vmax.get(StateId(1)).abs() < 1e-9);
        assert_eq!(oracle.universal_optimal.len(), 1);
        let best = *oracle.universal_optimal.iter().next().unwrap();
        assert_eq!(oracle.policies[best].action_id(&mdp, StateId(0)), "a_go");
    }

    #[test]
    fn singleton_policy_space_is_trivially_optimal() {
        let mdp = loop1();
        let oracle = oracle_solve(&mdp, DEFAULT_POLICY_CAP, false).unwrap();
        assert!((oracle.vmax.get(StateId(0)) - 2.0).abs() < 1e-9);
        assert_eq!(oracle.universal_optimal, [0].into());
    }

    #[test]
    fn all_terminal_model_makes_every_policy_optimal() {
        let mdp = Mdp::with_default_names(
            0.5,
            2,
            vec![
                vec![
                    ActionPmf::from_triples("x", &[(0, 1.0, 0.0)]),
                    ActionPmf::from_triples("y", &[(0, 1.0, 0.0)]),
                ],
                vec![ActionPmf::from_triples("z", &[(1, 1.0, 0.0)])],
            ],
        )
        .unwrap();
        let oracle = oracle_solve(&mdp, DEFAULT_POLICY_CAP, false).unwrap();
        assert_eq!(oracle.vmax, StateVector::zeros(2));
        assert_eq!(oracle.universal_optimal.len(), oracle.policies.len());
    }

    #[test]
    fn parallel_and_serial_sweeps_agree() {
        let mdp = m2();
        let serial = oracle_solve(&mdp, DEFAULT_POLICY_CAP, false).unwrap();
        let parallel = oracle_solve(&mdp, DEFAULT_POLICY_CAP, true).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn best_fixed_first_action_values_on_m2() {
        let mdp = m2();
        let oracle = oracle_solve(&mdp, DEFAULT_POLICY_CAP, false).unwrap();
        assert!((q_max_check(&mdp, &oracle, StateId(0), "a_go").unwrap() - 1.0).abs() < 1e-9);
        assert!(
            (q_max_check(&mdp, &oracle, StateId(0), "a_stay0").unwrap() - 0.5).abs() < 1e-9
        );
        assert!(q_max_check(&mdp, &oracle, StateId(1), "a_stay1").unwrap().abs() < 1e-9);
    }

    #[test]
    fn rejects_undiscounted_model() {
        let mdp = m2().with_gamma(1.0).unwrap();
        assert!(matches!(
            oracle_solve(&mdp, DEFAULT_POLICY_CAP, false),
            Err(Error::GammaNotContractive(_))
        ));
    }

    #[test]
    fn respects_policy_cap() {
        let mdp = m2();
        assert!(matches!(
            oracle_solve(&mdp, 1, false),
            Err(Error::PolicySpaceTooLarge { count: 2, cap: 1 })
        ));
    }
}
