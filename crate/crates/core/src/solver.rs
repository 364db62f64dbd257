//! Value iteration and policy iteration, with stopping rules, certificates,
//! and full iteration traces.
//!
//! Value iteration repeatedly applies the optimizing operator and stops once
//! the sup-norm step drops below `epsilon * (1 - gamma) / (2 * gamma)`; the
//! greedy policy read off the final vector is then within `epsilon` of
//! optimal. Policy iteration alternates exact evaluation with greedy
//! improvement and stops when the policy no longer changes, at which point it
//! is exactly optimal; preferring the incumbent on ties makes the stop test a
//! plain equality and rules out tie-induced oscillation.

use crate::bellman::{apply_l_max, greedy_policy, policy_value_exact, SolveMethod};
use crate::error::{Error, Result};
use crate::linalg::StateVector;
use crate::mdp::{policy_count, Mdp, Policy};

/// Default iteration cap for value iteration.
pub const DEFAULT_VI_CAP: usize = 100_000;

/// Ceiling applied on top of the policy count in [`default_pi_cap`].
pub const DEFAULT_PI_CAP: usize = 10_000;

/// Recommended policy-iteration cap: the policy count (the longest possible
/// strictly improving chain), clamped to [`DEFAULT_PI_CAP`].
pub fn default_pi_cap(mdp: &Mdp) -> usize {
    policy_count(mdp).min(DEFAULT_PI_CAP as u128) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    ValueIteration,
    PolicyIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    IterationCapExceeded,
}

/// One iteration of a solve, as recorded in the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// The value vector after this iteration (for policy iteration, the
    /// exact value of the policy evaluated in it).
    pub value: StateVector,
    /// Sup-norm distance to the previous iteration's vector; absent on the
    /// first policy-iteration entry.
    pub delta: Option<f64>,
    /// The policy evaluated in this iteration (policy iteration only).
    pub policy: Option<Policy>,
}

/// Outcome of a solver run: final policy and value, a certificate on the
/// distance to optimality, and the full per-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub final_policy: Policy,
    pub final_value: StateVector,
    /// Value iteration: the `epsilon` the result is certified against.
    /// Policy iteration: 0, the result is exactly optimal. Only meaningful
    /// when `termination` is [`Termination::Converged`].
    pub certificate: f64,
    pub termination: Termination,
}

/// One value-iteration step: apply the optimizing operator.
pub fn value_iterate_step(mdp: &Mdp, v: &StateVector) -> Result<StateVector> {
    apply_l_max(mdp, v)
}

/// Runs value iteration from `v0` until the sup-norm step falls strictly
/// below `epsilon * (1 - gamma) / (2 * gamma)`, then extracts the greedy
/// policy, which is guaranteed `epsilon`-optimal.
///
/// Requires `0 < gamma < 1`: the threshold divides by `gamma`, and nothing
/// contracts at `gamma = 1`.
pub fn value_iteration(
    mdp: &Mdp,
    v0: &StateVector,
    epsilon: f64,
    cap: usize,
) -> Result<SolveReport> {
    let gamma = mdp.gamma();
    if gamma <= 0.0 || gamma >= 1.0 {
        return Err(Error::GammaOutOfRange(gamma));
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidTolerance(epsilon));
    }
    if v0.len() != mdp.n_states() {
        return Err(Error::DimensionMismatch {
            expected: mdp.n_states(),
            found: v0.len(),
        });
    }

    let threshold = epsilon * (1.0 - gamma) / (2.0 * gamma);
    let mut trace = Vec::new();
    let mut v = v0.clone();
    for iteration in 1..=cap {
        let next = apply_l_max(mdp, &v)?;
        let delta = next.sup_dist(&v)?;
        trace.push(TraceEntry {
            iteration,
            value: next.clone(),
            delta: Some(delta),
            policy: None,
        });
        v = next;
        if delta < threshold {
            let final_policy = greedy_policy(mdp, &v, None)?;
            return Ok(SolveReport {
                algorithm: Algorithm::ValueIteration,
                iterations: iteration,
                trace,
                final_policy,
                final_value: v,
                certificate: epsilon,
                termination: Termination::Converged,
            });
        }
    }
    let final_policy = greedy_policy(mdp, &v, None)?;
    Ok(SolveReport {
        algorithm: Algorithm::ValueIteration,
        iterations: cap,
        trace,
        final_policy,
        final_value: v,
        certificate: epsilon,
        termination: Termination::IterationCapExceeded,
    })
}

/// One policy-iteration step: evaluate the policy exactly, then improve it
/// greedily against its own value, keeping the incumbent choice wherever it
/// already attains the maximum. Returns the improved policy and the value of
/// the *input* policy.
pub fn policy_iterate_step(mdp: &Mdp, policy: &Policy) -> Result<(Policy, StateVector)> {
    let value = policy_value_exact(mdp, policy, SolveMethod::Direct)?;
    let next = greedy_policy(mdp, &value, Some(policy))?;
    Ok((next, value))
}

/// Runs policy iteration from `p0` until the policy is unchanged by a step.
///
/// Each change strictly improves the value vector, so the run visits each
/// policy at most once and terminates within the policy count; the stable
/// policy is universally optimal and the certificate is exactly 0.
pub fn policy_iteration(mdp: &Mdp, p0: &Policy, cap: usize) -> Result<SolveReport> {
    let gamma = mdp.gamma();
    if gamma >= 1.0 {
        return Err(Error::GammaNotContractive(gamma));
    }
    p0.validate_for(mdp)?;

    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut policy = p0.clone();
    let mut previous_value: Option<StateVector> = None;
    for iteration in 0..cap {
        let (next, value) = policy_iterate_step(mdp, &policy)?;
        let delta = match &previous_value {
            Some(prev) => Some(value.sup_dist(prev)?),
            None => None,
        };
        trace.push(TraceEntry {
            iteration,
            value: value.clone(),
            delta,
            policy: Some(policy.clone()),
        });
        if next == policy {
            return Ok(SolveReport {
                algorithm: Algorithm::PolicyIteration,
                iterations: trace.len(),
                trace,
                final_policy: policy,
                final_value: value,
                certificate: 0.0,
                termination: Termination::Converged,
            });
        }
        previous_value = Some(value);
        policy = next;
    }
    let final_value = policy_value_exact(mdp, &policy, SolveMethod::Direct)?;
    Ok(SolveReport {
        algorithm: Algorithm::PolicyIteration,
        iterations: trace.len(),
        trace,
        final_policy: policy,
        final_value,
        certificate: 0.0,
        termination: Termination::IterationCapExceeded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::StateId;
    use crate::models::{loop1, m2};

    #[test]
    fn value_step_examples() {
        let mdp = loop1();
        assert_eq!(
            value_iterate_step(&mdp, &StateVector::zeros(1)).unwrap(),
            StateVector::from_vec(vec![1.0])
        );
        assert_eq!(
            value_iterate_step(&mdp, &StateVector::from_vec(vec![2.0])).unwrap(),
            StateVector::from_vec(vec![2.0])
        );
        let mdp = m2();
        assert_eq!(
            value_iterate_step(&mdp, &StateVector::zeros(2)).unwrap(),
            StateVector::from_vec(vec![1.0, 0.0])
        );
    }

    #[test]
    fn value_iteration_on_self_loop() {
        let mdp = loop1();
        let report = value_iteration(&mdp, &StateVector::zeros(1), 0.1, DEFAULT_VI_CAP).unwrap();
        assert_eq!(report.termination, Termination::Converged);
        assert!((report.final_value.get(StateId(0)) - 2.0).abs() < 0.1);
        assert_eq!(report.final_policy.action_id(&mdp, StateId(0)), "a_loop");
        assert_eq!(report.certificate, 0.1);
    }

    #[test]
    fn value_iteration_on_m2() {
        let mdp = m2();
        let report = value_iteration(&mdp, &StateVector::zeros(2), 0.01, DEFAULT_VI_CAP).unwrap();
        assert_eq!(report.termination, Termination::Converged);
        assert_eq!(report.final_policy.action_id(&mdp, StateId(0)), "a_go");
        assert!((report.final_value.get(StateId(0)) - 1.0).abs() < 0.01);
        assert!(report.final_value.get(StateId(1)).abs() < 0.01);
    }

    #[test]
    fn value_iteration_rejects_zero_discount() {
        let mdp = m2().with_gamma(0.0).unwrap();
        assert!(matches!(
            value_iteration(&mdp, &StateVector::zeros(2), 0.1, 100),
            Err(Error::GammaOutOfRange(_))
        ));
    }

    #[test]
    fn value_iteration_rejects_nonpositive_epsilon() {
        let mdp = m2();
        assert!(matches!(
            value_iteration(&mdp, &StateVector::zeros(2), 0.0, 100),
            Err(Error::InvalidTolerance(_))
        ));
    }

    #[test]
    fn value_iteration_reports_cap() {
        let mdp = loop1();
        let report = value_iteration(&mdp, &StateVector::zeros(1), 1e-9, 2).unwrap();
        assert_eq!(report.termination, Termination::IterationCapExceeded);
        assert_eq!(report.iterations, 2);
        assert_eq!(report.trace.len(), 2);
    }

    #[test]
    fn policy_step_improves_then_stabilizes() {
        let mdp = m2();
        let stay = Policy::from_indices(&mdp, vec![0, 0]).unwrap();
        let (next, value) = policy_iterate_step(&mdp, &stay).unwrap();
        assert_eq!(value, StateVector::zeros(2));
        assert_eq!(next.action_id(&mdp, StateId(0)), "a_go");

        let (stable, value) = policy_iterate_step(&mdp, &next).unwrap();
        assert!((value.get(StateId(0)) - 1.0).abs() < 1e-10);
        assert_eq!(stable, next);
    }

    #[test]
    fn policy_step_on_singleton_policy_space() {
        let mdp = loop1();
        let p = Policy::from_indices(&mdp, vec![0]).unwrap();
        let (next, value) = policy_iterate_step(&mdp, &p).unwrap();
        assert_eq!(next, p);
        assert!((value.get(StateId(0)) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn policy_iteration_from_worst_start() {
        let mdp = m2();
        let stay = Policy::from_indices(&mdp, vec![0, 0]).unwrap();
        let report = policy_iteration(&mdp, &stay, default_pi_cap(&mdp)).unwrap();
        assert_eq!(report.termination, Termination::Converged);
        assert_eq!(report.iterations, 2);
        assert_eq!(report.final_policy.action_id(&mdp, StateId(0)), "a_go");
        assert!((report.final_value.get(StateId(0)) - 1.0).abs() < 1e-10);
        assert_eq!(report.certificate, 0.0);
    }

    #[test]
    fn policy_iteration_already_stable() {
        let mdp = m2();
        let go = Policy::from_indices(&mdp, vec![1, 0]).unwrap();
        let report = policy_iteration(&mdp, &go, default_pi_cap(&mdp)).unwrap();
        assert_eq!(report.termination, Termination::Converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.final_policy, go);
    }

    #[test]
    fn policy_iteration_on_singleton_space() {
        let mdp = loop1();
        let p = Policy::from_indices(&mdp, vec![0]).unwrap();
        let report = policy_iteration(&mdp, &p, default_pi_cap(&mdp)).unwrap();
        assert_eq!(report.termination, Termination::Converged);
        assert_eq!(report.iterations, 1);
        assert!((report.final_value.get(StateId(0)) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn policy_iteration_rejects_undiscounted_model() {
        let mdp = m2().with_gamma(1.0).unwrap();
        let p = Policy::from_indices(&mdp, vec![0, 0]).unwrap();
        assert!(matches!(
            policy_iteration(&mdp, &p, 10),
            Err(Error::GammaNotContractive(_))
        ));
    }
}
