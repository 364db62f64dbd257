//! Bellman operators in matrix form: the one-step operator of a fixed
//! policy, its optimizing counterpart, greedy policy extraction, and exact
//! policy evaluation by linear solve.
//!
//! For a policy `p` with expected one-step rewards `r` and transition matrix
//! `T`, the operator `L_p` maps `v` to `r + gamma * T * v`; its unique fixed
//! point (for `gamma < 1`) is the policy's value vector, obtained directly by
//! solving `(I - gamma * T) v = r`. The optimizing operator `L_max` takes the
//! per-state maximum over actions, which equals the componentwise maximum
//! over whole policies because the choice decomposes state by state.

use crate::error::{Error, Result};
use crate::linalg::{StateMatrix, StateVector, DEFAULT_NEUMANN_CAP, TOL_RESIDUAL};
use crate::mdp::{Mdp, Policy, StateId};

/// Two action values within this distance of the per-state maximum count as
/// tied; ties go to a preferred incumbent, then to the lowest action index.
pub const TIE_TOL: f64 = 1e-9;

/// How to solve the linear system behind exact policy evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Gaussian elimination with partial pivoting.
    Direct,
    /// Truncated power-series inverse.
    Neumann,
}

/// The reward vector and transition matrix induced by a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyMatrices {
    /// Expected one-step reward per state under the policy's action.
    pub reward: StateVector,
    /// Row-stochastic transition matrix: entry `(i, j)` is the probability
    /// of moving to `j` under the action chosen at `i`.
    pub transition: StateMatrix,
}

/// Reads off `r` and `T` for a policy.
pub fn policy_matrices(mdp: &Mdp, policy: &Policy) -> Result<PolicyMatrices> {
    policy.validate_for(mdp)?;
    let n = mdp.n_states();
    let mut reward = StateVector::zeros(n);
    let mut transition = StateMatrix::zeros(n);
    for s in mdp.states() {
        let action = policy.action(mdp, s);
        reward.set(s, action.expected_reward());
        for (t, p) in action.entries() {
            transition.set(s.index(), t.index(), p);
        }
    }
    Ok(PolicyMatrices { reward, transition })
}

/// One application of the policy's operator: `r + gamma * T * v`.
pub fn apply_l(mdp: &Mdp, policy: &Policy, v: &StateVector) -> Result<StateVector> {
    let PolicyMatrices { reward, transition } = policy_matrices(mdp, policy)?;
    reward.add(&transition.mat_vec(v)?.scale(mdp.gamma()))
}

/// Expected immediate-plus-discounted-continuation value of taking the
/// action at index `action_index` in `s`, with `v` as the continuation.
pub fn q_value(mdp: &Mdp, s: StateId, action_index: usize, v: &StateVector) -> f64 {
    let gamma = mdp.gamma();
    let action = mdp.action(s, action_index);
    action
        .support()
        .map(|t| action.prob(t) * (action.reward(t) + gamma * v.get(t)))
        .sum()
}

/// One application of the optimizing operator: per state, the best action
/// value against the continuation `v`.
pub fn apply_l_max(mdp: &Mdp, v: &StateVector) -> Result<StateVector> {
    if v.len() != mdp.n_states() {
        return Err(Error::DimensionMismatch {
            expected: mdp.n_states(),
            found: v.len(),
        });
    }
    Ok(StateVector::from_vec(
        mdp.states()
            .map(|s| {
                (0..mdp.actions(s).len())
                    .map(|a| q_value(mdp, s, a, v))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect(),
    ))
}

/// A policy that attains the per-state maximum of [`apply_l_max`] against
/// `v`.
///
/// When `prefer` is given and its choice at a state ties the maximum within
/// [`TIE_TOL`], that choice is kept; otherwise the lowest-index action within
/// the tie window wins. The returned policy `g` satisfies
/// `apply_l(g, v) = apply_l_max(v)` componentwise within the tie tolerance.
pub fn greedy_policy(mdp: &Mdp, v: &StateVector, prefer: Option<&Policy>) -> Result<Policy> {
    if v.len() != mdp.n_states() {
        return Err(Error::DimensionMismatch {
            expected: mdp.n_states(),
            found: v.len(),
        });
    }
    if let Some(p) = prefer {
        p.validate_for(mdp)?;
    }
    let mut choices = Vec::with_capacity(mdp.n_states());
    for s in mdp.states() {
        let values: Vec<f64> = (0..mdp.actions(s).len())
            .map(|a| q_value(mdp, s, a, v))
            .collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let incumbent = prefer
            .map(|p| p.action_index(s))
            .filter(|&a| values[a] >= best - TIE_TOL);
        let choice = incumbent.unwrap_or_else(|| {
            values
                .iter()
                .position(|&q| q >= best - TIE_TOL)
                .expect("action sets are non-empty")
        });
        choices.push(choice);
    }
    Policy::from_indices(mdp, choices)
}

/// Exact value vector of a policy: the solution of `(I - gamma * T) v = r`.
///
/// Requires `gamma < 1`; the residual of the returned solution is checked
/// against [`TOL_RESIDUAL`].
pub fn policy_value_exact(mdp: &Mdp, policy: &Policy, method: SolveMethod) -> Result<StateVector> {
    let gamma = mdp.gamma();
    if gamma >= 1.0 {
        return Err(Error::GammaNotContractive(gamma));
    }
    let PolicyMatrices { reward, transition } = policy_matrices(mdp, policy)?;
    let system = StateMatrix::identity(mdp.n_states()).sub(&transition.scale(gamma))?;
    let value = match method {
        SolveMethod::Direct => system.solve(&reward)?,
        SolveMethod::Neumann => {
            let inverse = system.neumann_inverse(1e-9, DEFAULT_NEUMANN_CAP)?;
            inverse.mat_vec(&reward)?
        }
    };
    let residual = system.mat_vec(&value)?.sub(&reward)?.sup_norm();
    if residual > TOL_RESIDUAL {
        return Err(Error::ResidualTooLarge {
            residual,
            tol: TOL_RESIDUAL,
        });
    }
    Ok(value)
}

/// Certifies that `v` is the optimal value vector: for `gamma < 1` the
/// optimizing operator has a unique fixed point, so
/// `||apply_l_max(v) - v|| <= tol` identifies it.
pub fn vmax_fixed_point_check(mdp: &Mdp, v: &StateVector, tol: f64) -> Result<bool> {
    let gamma = mdp.gamma();
    if gamma >= 1.0 {
        return Err(Error::GammaNotContractive(gamma));
    }
    Ok(apply_l_max(mdp, v)?.sub(v)?.sup_norm() <= tol)
}
