//! Slice semantics: the ground-truth account of where an agent can be, with
//! what probability, and what it earns, step by step.
//!
//! Every function here answers a question about the same setup: an agent
//! starts in state `s`, takes an initial action `a`, and from then on follows
//! policy `p`. The *slice* at step `n` is the set of states the agent could
//! occupy at that step ([`q_slice`]), each with an occupation probability
//! ([`q_slice_p`]) and an undiscounted expected one-step reward
//! ([`rq_slice`]). Discounted truncations ([`q_expected_n`]) converge to the
//! policy's value, which [`q_expected`] returns together with a certified
//! tail bound.
//!
//! This module is deliberately independent of the matrix machinery in
//! [`crate::bellman`]; the two are cross-checked against each other in tests.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::mdp::{absorption_step, inevitable_terminal, ActionPmf, Mdp, Policy, StateId};

/// Default tolerance for slice-level float comparisons.
pub const TOL_NUM: f64 = 1e-9;

/// A truncated value with an explicit error budget.
///
/// When `gamma < 1` the true limit lies within `tail_bound` of `value`; the
/// bound is `M * gamma^(horizon+1) / (1 - gamma)` with `M` the largest
/// absolute reward in the model. With `gamma = 1` and inevitable termination
/// the truncation is exact and `tail_bound` is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueEstimate {
    pub value: f64,
    pub tail_bound: f64,
    pub horizon: usize,
}

/// Occupation probabilities propagated along a fixed policy, with one memo
/// level per step. Built fresh inside each public call, so concurrent calls
/// never share state.
struct PolicyChain<'m> {
    mdp: &'m Mdp,
    policy: &'m Policy,
    /// Expected one-step reward from each state under the policy's action.
    step_reward: Vec<f64>,
    /// `levels[m][x * n + t]`: probability of sitting at `t` after `m` steps
    /// of policy-following from `x`.
    levels: Vec<Vec<f64>>,
}

impl<'m> PolicyChain<'m> {
    fn new(mdp: &'m Mdp, policy: &'m Policy) -> Self {
        let n = mdp.n_states();
        let step_reward = mdp
            .states()
            .map(|s| policy.action(mdp, s).expected_reward())
            .collect();
        let mut level0 = vec![0.0; n * n];
        for x in 0..n {
            level0[x * n + x] = 1.0;
        }
        Self {
            mdp,
            policy,
            step_reward,
            levels: vec![level0],
        }
    }

    fn ensure(&mut self, depth: usize) {
        let n = self.mdp.n_states();
        while self.levels.len() <= depth {
            let m = self.levels.len();
            let mut level = vec![0.0; n * n];
            if m == 1 {
                for x in self.mdp.states() {
                    for (t, p) in self.policy.action(self.mdp, x).entries() {
                        level[x.index() * n + t.index()] = p;
                    }
                }
            } else {
                let prev = &self.levels[m - 1];
                for x in self.mdp.states() {
                    let action = self.policy.action(self.mdp, x);
                    for y in action.support() {
                        let w = action.prob(y);
                        for t in 0..n {
                            level[x.index() * n + t] += w * prev[y.index() * n + t];
                        }
                    }
                }
            }
            self.levels.push(level);
        }
    }

    /// Occupation distribution at step `n` for the query `(s, a)`.
    fn query_dist(&mut self, n: usize, s: StateId, a: &ActionPmf) -> Vec<f64> {
        let dim = self.mdp.n_states();
        match n {
            0 => {
                let mut d = vec![0.0; dim];
                d[s.index()] = 1.0;
                d
            }
            1 => {
                let mut d = vec![0.0; dim];
                for (t, p) in a.entries() {
                    d[t.index()] = p;
                }
                d
            }
            _ => {
                self.ensure(n - 1);
                let level = &self.levels[n - 1];
                let mut d = vec![0.0; dim];
                for y in a.support() {
                    let w = a.prob(y);
                    for (t, slot) in d.iter_mut().enumerate() {
                        *slot += w * level[y.index() * dim + t];
                    }
                }
                d
            }
        }
    }

    /// Slice sets for steps `0..=depth` of the query `(s, a)`.
    fn slice_sets(&self, depth: usize, s: StateId, a: &ActionPmf) -> Vec<BTreeSet<StateId>> {
        let mut sets: Vec<BTreeSet<StateId>> = vec![[s].into()];
        if depth >= 1 {
            sets.push(a.support().collect());
        }
        while sets.len() <= depth {
            let next = sets
                .last()
                .expect("at least one slice exists")
                .iter()
                .flat_map(|&x| self.policy.action(self.mdp, x).support())
                .collect();
            sets.push(next);
        }
        sets
    }

    /// Undiscounted expected one-step reward collected at step `n`.
    fn step_reward_at(&mut self, n: usize, s: StateId, a: &ActionPmf) -> f64 {
        if n == 0 {
            return a.expected_reward();
        }
        let dist = self.query_dist(n, s, a);
        let slice = self.slice_sets(n, s, a).pop().expect("requested slice exists");
        self.slice_reward(&slice, &dist)
    }

    fn slice_reward(&self, slice: &BTreeSet<StateId>, dist: &[f64]) -> f64 {
        slice
            .iter()
            .map(|&x| dist[x.index()] * self.step_reward[x.index()])
            .sum()
    }

    /// Discounted partial sum of step rewards up to `horizon` inclusive.
    fn truncated_value(&mut self, horizon: usize, s: StateId, a: &ActionPmf) -> f64 {
        let gamma = self.mdp.gamma();
        let sets = self.slice_sets(horizon, s, a);
        let mut discount = 1.0;
        let mut total = 0.0;
        for (i, set) in sets.iter().enumerate() {
            let reward = if i == 0 {
                a.expected_reward()
            } else {
                let dist = self.query_dist(i, s, a);
                self.slice_reward(set, &dist)
            };
            total += discount * reward;
            discount *= gamma;
        }
        total
    }
}

fn checked_query<'m>(
    mdp: &'m Mdp,
    policy: &Policy,
    start: StateId,
    action: &str,
) -> Result<(usize, &'m ActionPmf)> {
    policy.validate_for(mdp)?;
    if start.index() >= mdp.n_states() {
        return Err(Error::DimensionMismatch {
            expected: mdp.n_states(),
            found: start.index(),
        });
    }
    mdp.require_action(start, action)
}

/// States the agent can occupy at step `n`.
///
/// Step 0 is the singleton start, step 1 the support of the initial action,
/// and each later slice is the union of policy-action supports over the
/// previous slice.
pub fn q_slice(
    mdp: &Mdp,
    policy: &Policy,
    n: usize,
    start: StateId,
    action: &str,
) -> Result<BTreeSet<StateId>> {
    let (_, a) = checked_query(mdp, policy, start, action)?;
    let chain = PolicyChain::new(mdp, policy);
    Ok(chain.slice_sets(n, start, a).pop().expect("requested slice exists"))
}

/// Probability of occupying `target` at step `n`, summed over all routes.
pub fn q_slice_p(
    mdp: &Mdp,
    policy: &Policy,
    n: usize,
    start: StateId,
    action: &str,
    target: StateId,
) -> Result<f64> {
    let (_, a) = checked_query(mdp, policy, start, action)?;
    if target.index() >= mdp.n_states() {
        return Err(Error::DimensionMismatch {
            expected: mdp.n_states(),
            found: target.index(),
        });
    }
    let mut chain = PolicyChain::new(mdp, policy);
    Ok(chain.query_dist(n, start, a)[target.index()])
}

/// Undiscounted expected reward earned by the single transition taken at
/// step `n`.
pub fn rq_slice(
    mdp: &Mdp,
    policy: &Policy,
    n: usize,
    start: StateId,
    action: &str,
) -> Result<f64> {
    let (_, a) = checked_query(mdp, policy, start, action)?;
    let mut chain = PolicyChain::new(mdp, policy);
    Ok(chain.step_reward_at(n, start, a))
}

/// Discounted value truncated at `horizon`:
/// `sum_{i=0..=horizon} gamma^i * rq_slice(i)`.
pub fn q_expected_n(
    mdp: &Mdp,
    policy: &Policy,
    horizon: usize,
    start: StateId,
    action: &str,
) -> Result<f64> {
    let (_, a) = checked_query(mdp, policy, start, action)?;
    let mut chain = PolicyChain::new(mdp, policy);
    Ok(chain.truncated_value(horizon, start, a))
}

/// Limit of the truncated values, reported with a certified tail bound.
///
/// With `gamma < 1` the horizon is the least one whose geometric tail bound
/// drops to `tol`. With `gamma = 1` the value exists only when termination is
/// inevitable under the policy; the truncation at the absorption step is then
/// exact.
pub fn q_expected(
    mdp: &Mdp,
    policy: &Policy,
    start: StateId,
    action: &str,
    tol: f64,
) -> Result<ValueEstimate> {
    let (action_index, a) = checked_query(mdp, policy, start, action)?;
    if tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let gamma = mdp.gamma();
    let mut chain = PolicyChain::new(mdp, policy);

    if gamma < 1.0 {
        let (horizon, tail_bound) = discount_horizon(mdp.max_abs_reward(), gamma, tol);
        let value = chain.truncated_value(horizon, start, a);
        Ok(ValueEstimate {
            value,
            tail_bound,
            horizon,
        })
    } else {
        if !inevitable_terminal(mdp, policy) {
            return Err(Error::NoConvergenceGuarantee);
        }
        let horizon = absorption_step(mdp, policy, start, action_index)
            .expect("inevitable termination implies an absorption step");
        let value = chain.truncated_value(horizon, start, a);
        Ok(ValueEstimate {
            value,
            tail_bound: 0.0,
            horizon,
        })
    }
}

/// [`q_expected`] for every `(state, action)` pair at once, sharing one
/// propagation across the whole table. Entry `[s][i]` is the estimate for
/// starting in `s` with the action at index `i`.
pub fn q_expected_table(mdp: &Mdp, policy: &Policy, tol: f64) -> Result<Vec<Vec<ValueEstimate>>> {
    policy.validate_for(mdp)?;
    if tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let gamma = mdp.gamma();
    let mut chain = PolicyChain::new(mdp, policy);

    if gamma >= 1.0 && !inevitable_terminal(mdp, policy) {
        return Err(Error::NoConvergenceGuarantee);
    }
    let shared = if gamma < 1.0 {
        Some(discount_horizon(mdp.max_abs_reward(), gamma, tol))
    } else {
        None
    };

    let mut table = Vec::with_capacity(mdp.n_states());
    for s in mdp.states() {
        let mut row = Vec::with_capacity(mdp.actions(s).len());
        for index in 0..mdp.actions(s).len() {
            let (horizon, tail_bound) = match shared {
                Some(pair) => pair,
                None => (
                    absorption_step(mdp, policy, s, index)
                        .expect("inevitable termination implies an absorption step"),
                    0.0,
                ),
            };
            let value = chain.truncated_value(horizon, s, mdp.action(s, index));
            row.push(ValueEstimate {
                value,
                tail_bound,
                horizon,
            });
        }
        table.push(row);
    }
    Ok(table)
}

/// Value of following the policy outright: [`q_expected`] with the policy's
/// own action at the start state.
pub fn v_expected(mdp: &Mdp, policy: &Policy, start: StateId, tol: f64) -> Result<ValueEstimate> {
    policy.validate_for(mdp)?;
    if start.index() >= mdp.n_states() {
        return Err(Error::DimensionMismatch {
            expected: mdp.n_states(),
            found: start.index(),
        });
    }
    let action = policy.action_id(mdp, start).to_string();
    q_expected(mdp, policy, start, &action, tol)
}

/// Least horizon whose tail bound `M * gamma^(N+1) / (1 - gamma)` is at most
/// `tol`, together with that bound.
fn discount_horizon(max_abs_reward: f64, gamma: f64, tol: f64) -> (usize, f64) {
    if max_abs_reward == 0.0 || gamma == 0.0 {
        return (0, 0.0);
    }
    let bound_at = |n_plus_1: usize| {
        max_abs_reward * gamma.powf(n_plus_1 as f64) / (1.0 - gamma)
    };
    // First guess from logs, then nudge to the exact least horizon.
    let target = tol * (1.0 - gamma) / max_abs_reward;
    let mut n_plus_1 = if target >= 1.0 {
        1
    } else {
        (target.ln() / gamma.ln()).ceil().max(1.0) as usize
    };
    while bound_at(n_plus_1) > tol {
        n_plus_1 += 1;
    }
    while n_plus_1 > 1 && bound_at(n_plus_1 - 1) <= tol {
        n_plus_1 -= 1;
    }
    (n_plus_1 - 1, bound_at(n_plus_1))
}

// ── Alternate evaluation routes ──────────────────────────────────────────
//
// Each slice function admits a second, mathematically equal recursion that
// peels the opposite end of the trajectory. These are kept separate from the
// primary implementations so consistency between the two routes can be
// checked numerically (see `check::run_checks` and the tests).

/// Slice at step `n >= 1`, evaluated by peeling the initial action first:
/// the union over `s'` in the support of `a` of the step-`(n-1)` slices that
/// start at `s'` with the policy's action.
pub fn q_slice_via_first_step(
    mdp: &Mdp,
    policy: &Policy,
    n: usize,
    start: StateId,
    action: &str,
) -> Result<BTreeSet<StateId>> {
    assert!(n >= 1, "first-step form needs at least one step");
    let (_, a) = checked_query(mdp, policy, start, action)?;
    let mut out = BTreeSet::new();
    for s in a.support() {
        let follow = policy.action_id(mdp, s).to_string();
        out.extend(q_slice(mdp, policy, n - 1, s, &follow)?);
    }
    Ok(out)
}

/// Occupation probability at step `n >= 2`, evaluated by peeling the final
/// transition instead of the first: propagate the step-`(n-1)` distribution
/// through one more policy step.
pub fn q_slice_p_via_last_step(
    mdp: &Mdp,
    policy: &Policy,
    n: usize,
    start: StateId,
    action: &str,
    target: StateId,
) -> Result<f64> {
    assert!(n >= 2, "last-step form needs at least two steps");
    let mut total = 0.0;
    for s in q_slice(mdp, policy, n - 1, start, action)? {
        total += q_slice_p(mdp, policy, n - 1, start, action, s)?
            * policy.action(mdp, s).prob(target);
    }
    Ok(total)
}

/// Step-`n` expected reward for `n >= 1`, evaluated by peeling the initial
/// action first.
pub fn rq_slice_via_first_step(
    mdp: &Mdp,
    policy: &Policy,
    n: usize,
    start: StateId,
    action: &str,
) -> Result<f64> {
    assert!(n >= 1, "first-step form needs at least one step");
    let (_, a) = checked_query(mdp, policy, start, action)?;
    let mut total = 0.0;
    for s in a.support() {
        let follow = policy.action_id(mdp, s).to_string();
        total += a.prob(s) * rq_slice(mdp, policy, n - 1, s, &follow)?;
    }
    Ok(total)
}

/// Truncated value at horizon `n >= 1` via the one-step decomposition:
/// immediate reward plus the discounted truncation one step shorter.
pub fn q_expected_n_one_step(
    mdp: &Mdp,
    policy: &Policy,
    horizon: usize,
    start: StateId,
    action: &str,
) -> Result<f64> {
    assert!(horizon >= 1, "one-step form needs a positive horizon");
    let (_, a) = checked_query(mdp, policy, start, action)?;
    let gamma = mdp.gamma();
    let mut total = 0.0;
    for s in a.support() {
        let follow = policy.action_id(mdp, s).to_string();
        total += a.prob(s)
            * (a.reward(s) + gamma * q_expected_n(mdp, policy, horizon - 1, s, &follow)?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::ActionPmf;
    use crate::models::{loop1, m2};

    fn m2_go() -> (Mdp, Policy) {
        let mdp = m2();
        let p = Policy::from_indices(&mdp, vec![1, 0]).unwrap();
        (mdp, p)
    }

    fn loop1_policy() -> (Mdp, Policy) {
        let mdp = loop1();
        let p = Policy::from_indices(&mdp, vec![0]).unwrap();
        (mdp, p)
    }

    #[test]
    fn slice_zero_is_start_singleton() {
        let (mdp, p) = m2_go();
        let slice = q_slice(&mdp, &p, 0, StateId(0), "a_go").unwrap();
        assert_eq!(slice, [StateId(0)].into());
    }

    #[test]
    fn slice_one_is_action_support() {
        let (mdp, p) = m2_go();
        let slice = q_slice(&mdp, &p, 1, StateId(0), "a_go").unwrap();
        assert_eq!(slice, [StateId(1)].into());
    }

    #[test]
    fn slice_two_follows_policy_after_stay() {
        // Stay put for one step, then the policy's a_go moves to s1.
        let (mdp, p) = m2_go();
        let slice = q_slice(&mdp, &p, 2, StateId(0), "a_stay0").unwrap();
        assert_eq!(slice, [StateId(1)].into());
    }

    #[test]
    fn slice_rejects_unknown_action() {
        let (mdp, p) = m2_go();
        assert!(matches!(
            q_slice(&mdp, &p, 0, StateId(1), "a_go"),
            Err(Error::ActionNotValid { .. })
        ));
    }

    #[test]
    fn occupation_at_step_zero_is_indicator() {
        let (mdp, p) = m2_go();
        assert_eq!(
            q_slice_p(&mdp, &p, 0, StateId(0), "a_go", StateId(0)).unwrap(),
            1.0
        );
        assert_eq!(
            q_slice_p(&mdp, &p, 0, StateId(0), "a_go", StateId(1)).unwrap(),
            0.0
        );
    }

    #[test]
    fn occupation_after_deterministic_move() {
        let (mdp, p) = m2_go();
        assert_eq!(
            q_slice_p(&mdp, &p, 1, StateId(0), "a_go", StateId(1)).unwrap(),
            1.0
        );
    }

    #[test]
    fn split_mass_stays_fixed_once_absorbed() {
        // u's action `a` splits 0.3/0.7 between u and v; the policy then
        // holds both states in place with zero reward.
        let mdp = Mdp::with_default_names(
            0.5,
            2,
            vec![
                vec![
                    ActionPmf::from_triples("stay_u", &[(0, 1.0, 0.0)]),
                    ActionPmf::from_triples("a", &[(0, 0.3, 0.0), (1, 0.7, 0.0)]),
                ],
                vec![ActionPmf::from_triples("stay_v", &[(1, 1.0, 0.0)])],
            ],
        )
        .unwrap();
        let p = Policy::from_indices(&mdp, vec![0, 0]).unwrap();
        assert!((q_slice_p(&mdp, &p, 2, StateId(0), "a", StateId(0)).unwrap() - 0.3).abs() < 1e-12);
        assert!((q_slice_p(&mdp, &p, 2, StateId(0), "a", StateId(1)).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn step_rewards_on_m2() {
        let (mdp, p) = m2_go();
        assert_eq!(rq_slice(&mdp, &p, 0, StateId(0), "a_go").unwrap(), 1.0);
        // After the move the agent sits in the terminal state.
        assert_eq!(rq_slice(&mdp, &p, 1, StateId(0), "a_go").unwrap(), 0.0);
    }

    #[test]
    fn step_rewards_on_self_loop() {
        let (mdp, p) = loop1_policy();
        for n in 0..5 {
            assert_eq!(rq_slice(&mdp, &p, n, StateId(0), "a_loop").unwrap(), 1.0);
        }
    }

    #[test]
    fn truncated_values_are_partial_geometric_sums() {
        let (mdp, p) = loop1_policy();
        assert_eq!(q_expected_n(&mdp, &p, 0, StateId(0), "a_loop").unwrap(), 1.0);
        assert!(
            (q_expected_n(&mdp, &p, 2, StateId(0), "a_loop").unwrap() - 1.75).abs() < 1e-12
        );
    }

    #[test]
    fn truncated_value_settles_after_absorption() {
        let (mdp, p) = m2_go();
        assert_eq!(q_expected_n(&mdp, &p, 5, StateId(0), "a_go").unwrap(), 1.0);
    }

    #[test]
    fn limit_value_of_self_loop() {
        let (mdp, p) = loop1_policy();
        let est = q_expected(&mdp, &p, StateId(0), "a_loop", 1e-9).unwrap();
        assert!((est.value - 2.0).abs() <= 1e-9 + est.tail_bound);
        assert!(est.tail_bound <= 1e-9);
    }

    #[test]
    fn limit_value_after_absorption() {
        let (mdp, p) = m2_go();
        let est = q_expected(&mdp, &p, StateId(0), "a_go", 1e-9).unwrap();
        assert!((est.value - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn undiscounted_self_loop_diverges() {
        let mdp = loop1().with_gamma(1.0).unwrap();
        let p = Policy::from_indices(&mdp, vec![0]).unwrap();
        assert!(matches!(
            q_expected(&mdp, &p, StateId(0), "a_loop", 1e-9),
            Err(Error::NoConvergenceGuarantee)
        ));
    }

    #[test]
    fn undiscounted_value_with_inevitable_termination() {
        let mdp = m2().with_gamma(1.0).unwrap();
        let p = Policy::from_indices(&mdp, vec![1, 0]).unwrap();
        let est = q_expected(&mdp, &p, StateId(0), "a_go", 1e-9).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.tail_bound, 0.0);
    }

    #[test]
    fn policy_values_on_named_models() {
        let (mdp, p) = loop1_policy();
        let est = v_expected(&mdp, &p, StateId(0), 1e-9).unwrap();
        assert!((est.value - 2.0).abs() <= 2e-9);

        let (mdp, p) = m2_go();
        let est = v_expected(&mdp, &p, StateId(0), 1e-9).unwrap();
        assert!((est.value - 1.0).abs() <= 2e-9);
        // Terminal states earn exactly nothing.
        assert_eq!(v_expected(&mdp, &p, StateId(1), 1e-9).unwrap().value, 0.0);
    }

    #[test]
    fn table_matches_per_query_estimates() {
        let (mdp, p) = m2_go();
        let table = q_expected_table(&mdp, &p, 1e-8).unwrap();
        for s in mdp.states() {
            for (i, action) in mdp.actions(s).iter().enumerate() {
                let single = q_expected(&mdp, &p, s, action.id(), 1e-8).unwrap();
                assert_eq!(table[s.index()][i], single);
            }
        }
    }

    #[test]
    fn truncation_grows_with_horizon_for_nonnegative_rewards() {
        let (mdp, p) = m2_go();
        let mut last = f64::NEG_INFINITY;
        for h in 0..8 {
            let v = q_expected_n(&mdp, &p, h, StateId(0), "a_stay0").unwrap();
            assert!(v >= last - 1e-12);
            last = v;
        }
    }
}
