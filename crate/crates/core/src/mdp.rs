//! The finite MDP model: states, actions as probability mass functions,
//! rewards, policies, validation, and policy-space enumeration.
//!
//! An [`Mdp`] holds a finite state set, a non-empty finite list of actions per
//! state, and a discount factor `gamma` in `[0, 1]`. Each action is an
//! [`ActionPmf`]: a probability distribution over successor states together
//! with the reward earned for landing in each successor. A [`Policy`] picks
//! one action per state.
//!
//! Construction always validates; an `Mdp` value satisfies every model
//! invariant (normalized distributions, non-empty action sets, gamma range,
//! unique action labels) by the time it exists.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, ModelViolation, Result};

/// Probabilities below this threshold are treated as zero when computing
/// supports, and distributions must sum to 1 within it. There is no automatic
/// renormalization: out-of-tolerance models are rejected outright.
pub const TOL_PMF: f64 = 1e-9;

/// Default cap on the number of policies that enumeration will produce.
pub const DEFAULT_POLICY_CAP: u64 = 1_000_000;

/// Index of a state in `[0, n_states)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One action: a labelled probability mass function over successor states,
/// with a reward attached to each successor.
///
/// Rewards default to 0 for successors with no explicit entry, so sparse
/// reward maps realize a full reward function without a dense tensor. Two
/// actions at the same state may have identical distributions but must carry
/// distinct labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionPmf {
    id: String,
    probs: BTreeMap<StateId, f64>,
    rewards: BTreeMap<StateId, f64>,
}

impl ActionPmf {
    pub fn new(
        id: impl Into<String>,
        probs: BTreeMap<StateId, f64>,
        rewards: BTreeMap<StateId, f64>,
    ) -> Self {
        Self {
            id: id.into(),
            probs,
            rewards,
        }
    }

    /// Convenience constructor from `(successor, probability, reward)` triples.
    pub fn from_triples(id: impl Into<String>, triples: &[(usize, f64, f64)]) -> Self {
        let mut probs = BTreeMap::new();
        let mut rewards = BTreeMap::new();
        for &(s, p, r) in triples {
            probs.insert(StateId(s), p);
            if r != 0.0 {
                rewards.insert(StateId(s), r);
            }
        }
        Self::new(id, probs, rewards)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Probability of transitioning to `target` (0 when absent).
    pub fn prob(&self, target: StateId) -> f64 {
        self.probs.get(&target).copied().unwrap_or(0.0)
    }

    /// Reward for landing in `target` (0 when absent).
    pub fn reward(&self, target: StateId) -> f64 {
        self.rewards.get(&target).copied().unwrap_or(0.0)
    }

    /// Successors carrying probability mass above [`TOL_PMF`], in state order.
    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.probs
            .iter()
            .filter(|(_, &p)| p > TOL_PMF)
            .map(|(&s, _)| s)
    }

    /// All `(successor, probability)` entries, including zero-mass ones.
    pub fn entries(&self) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.probs.iter().map(|(&s, &p)| (s, p))
    }

    /// Explicit reward entries, in state order.
    pub fn reward_entries(&self) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.rewards.iter().map(|(&s, &r)| (s, r))
    }

    /// Expected reward for taking this action once: sum of
    /// `prob(s') * reward(s')` over the support.
    pub fn expected_reward(&self) -> f64 {
        self.support().map(|s| self.prob(s) * self.reward(s)).sum()
    }
}

/// A validated finite Markov decision process.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    gamma: f64,
    state_names: Vec<String>,
    actions: Vec<Vec<ActionPmf>>,
}

impl Mdp {
    /// Validates a candidate model and returns it, or every violation found.
    ///
    /// `actions[s]` lists the actions available from state `s`; `state_names`
    /// fixes the state count and provides names for diagnostics.
    pub fn new(
        gamma: f64,
        state_names: Vec<String>,
        actions: Vec<Vec<ActionPmf>>,
    ) -> std::result::Result<Self, Vec<ModelViolation>> {
        let mut violations = Vec::new();
        let n = state_names.len();

        if n == 0 {
            violations.push(ModelViolation::NoStates);
        }
        let mut seen = HashSet::new();
        for name in &state_names {
            if !seen.insert(name.clone()) {
                violations.push(ModelViolation::DuplicateState(name.clone()));
            }
        }
        if !(gamma.is_finite() && (0.0..=1.0).contains(&gamma)) {
            violations.push(ModelViolation::GammaOutOfRange(gamma));
        }
        if actions.len() != n {
            // State list and action table disagree; report states with no
            // actions and action rows with no state.
            for name in state_names.iter().take(n).skip(actions.len()) {
                violations.push(ModelViolation::EmptyActionSet {
                    state: name.clone(),
                });
            }
            for extra in n..actions.len() {
                violations.push(ModelViolation::UnknownState(format!("#{extra}")));
            }
        }

        let name_of = |s: StateId| -> String {
            state_names
                .get(s.index())
                .cloned()
                .unwrap_or_else(|| format!("#{}", s.index()))
        };

        for (s, acts) in actions.iter().enumerate().take(n) {
            let state = state_names[s].clone();
            if acts.is_empty() {
                violations.push(ModelViolation::EmptyActionSet {
                    state: state.clone(),
                });
            }
            let mut ids = HashSet::new();
            for act in acts {
                if !ids.insert(act.id.clone()) {
                    violations.push(ModelViolation::DuplicateActionId {
                        state: state.clone(),
                        action: act.id.clone(),
                    });
                }
                let mut sum = 0.0;
                for (&succ, &p) in &act.probs {
                    if succ.index() >= n {
                        violations.push(ModelViolation::UnknownSuccessorState {
                            state: state.clone(),
                            action: act.id.clone(),
                            successor: name_of(succ),
                        });
                    }
                    if !p.is_finite() {
                        violations.push(ModelViolation::NonFiniteNumber {
                            state: state.clone(),
                            action: act.id.clone(),
                            context: format!("probability of `{}`", name_of(succ)),
                        });
                    } else if p < 0.0 {
                        violations.push(ModelViolation::NegativeProbability {
                            state: state.clone(),
                            action: act.id.clone(),
                            successor: name_of(succ),
                            prob: p,
                        });
                    }
                    sum += p;
                }
                if !sum.is_finite() || (sum - 1.0).abs() > TOL_PMF {
                    violations.push(ModelViolation::PmfNotNormalized {
                        state: state.clone(),
                        action: act.id.clone(),
                        sum,
                    });
                }
                for (&succ, &r) in &act.rewards {
                    if succ.index() >= n {
                        violations.push(ModelViolation::UnknownSuccessorState {
                            state: state.clone(),
                            action: act.id.clone(),
                            successor: name_of(succ),
                        });
                    }
                    if !r.is_finite() {
                        violations.push(ModelViolation::NonFiniteNumber {
                            state: state.clone(),
                            action: act.id.clone(),
                            context: format!("reward for `{}`", name_of(succ)),
                        });
                    }
                }
            }
        }

        if violations.is_empty() {
            Ok(Self {
                gamma,
                state_names,
                actions,
            })
        } else {
            Err(violations)
        }
    }

    /// Like [`Mdp::new`] with states named `s0, s1, ...`.
    pub fn with_default_names(
        gamma: f64,
        n_states: usize,
        actions: Vec<Vec<ActionPmf>>,
    ) -> std::result::Result<Self, Vec<ModelViolation>> {
        let names = (0..n_states).map(|i| format!("s{i}")).collect();
        Self::new(gamma, names, actions)
    }

    /// The same model with a different discount factor.
    pub fn with_gamma(&self, gamma: f64) -> std::result::Result<Self, Vec<ModelViolation>> {
        Self::new(gamma, self.state_names.clone(), self.actions.clone())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.n_states()).map(StateId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s.index()]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    /// Looks a state up by name.
    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(StateId)
    }

    /// The actions available from `s`, in declaration order.
    pub fn actions(&self, s: StateId) -> &[ActionPmf] {
        &self.actions[s.index()]
    }

    pub fn action(&self, s: StateId, index: usize) -> &ActionPmf {
        &self.actions[s.index()][index]
    }

    /// Finds an action at `s` by label.
    pub fn action_by_id(&self, s: StateId, id: &str) -> Option<(usize, &ActionPmf)> {
        self.actions[s.index()]
            .iter()
            .enumerate()
            .find(|(_, a)| a.id() == id)
    }

    /// Resolves an action label at `s`, or reports `ActionNotValid`.
    pub fn require_action(&self, s: StateId, id: &str) -> Result<(usize, &ActionPmf)> {
        self.action_by_id(s, id).ok_or_else(|| Error::ActionNotValid {
            state: s.index(),
            action: id.to_string(),
        })
    }

    /// Total number of actions across all states.
    pub fn total_actions(&self) -> usize {
        self.actions.iter().map(|a| a.len()).sum()
    }

    /// Largest absolute reward entry anywhere in the model. Bounds every
    /// one-step expected reward, which drives the discounted tail bounds.
    pub fn max_abs_reward(&self) -> f64 {
        self.actions
            .iter()
            .flatten()
            .flat_map(|a| a.rewards.values())
            .fold(0.0, |m, r| m.max(r.abs()))
    }

    /// True iff every action from `s` transitions only to `s` itself and all
    /// of its reward entries are zero: once entered, the state never changes
    /// and never earns anything.
    pub fn is_terminal_state(&self, s: StateId) -> bool {
        self.actions(s).iter().all(|a| {
            let support: Vec<StateId> = a.support().collect();
            support == [s] && a.rewards.values().all(|&r| r == 0.0)
        })
    }
}

/// A deterministic stationary policy: one action index per state.
///
/// A `Policy` is always constructed against a specific model, so the chosen
/// index is a valid action at every state of that model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    choices: Vec<usize>,
}

impl Policy {
    /// Builds a policy from per-state action indices.
    pub fn from_indices(mdp: &Mdp, choices: Vec<usize>) -> Result<Self> {
        if choices.len() != mdp.n_states() {
            return Err(Error::InvalidPolicy(format!(
                "policy covers {} states, model has {}",
                choices.len(),
                mdp.n_states()
            )));
        }
        for (s, &c) in choices.iter().enumerate() {
            let available = mdp.actions(StateId(s)).len();
            if c >= available {
                return Err(Error::InvalidPolicy(format!(
                    "action index {c} out of range at state `{}` ({available} actions)",
                    mdp.state_name(StateId(s))
                )));
            }
        }
        Ok(Self { choices })
    }

    /// Builds a policy from a total `state -> action label` map.
    pub fn from_choices(mdp: &Mdp, choice: &BTreeMap<StateId, String>) -> Result<Self> {
        let mut indices = Vec::with_capacity(mdp.n_states());
        for s in mdp.states() {
            let id = choice.get(&s).ok_or_else(|| {
                Error::InvalidPolicy(format!("no action chosen for state `{}`", mdp.state_name(s)))
            })?;
            let (idx, _) = mdp.require_action(s, id).map_err(|_| {
                Error::InvalidPolicy(format!(
                    "action `{id}` is not available at state `{}`",
                    mdp.state_name(s)
                ))
            })?;
            indices.push(idx);
        }
        Ok(Self { choices: indices })
    }

    pub fn action_index(&self, s: StateId) -> usize {
        self.choices[s.index()]
    }

    pub fn action<'m>(&self, mdp: &'m Mdp, s: StateId) -> &'m ActionPmf {
        mdp.action(s, self.action_index(s))
    }

    pub fn action_id<'m>(&self, mdp: &'m Mdp, s: StateId) -> &'m str {
        self.action(mdp, s).id()
    }

    pub fn indices(&self) -> &[usize] {
        &self.choices
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Checks that this policy indexes valid actions of `mdp`; guards against
    /// a policy from one model being replayed against another.
    pub fn validate_for(&self, mdp: &Mdp) -> Result<()> {
        if self.choices.len() != mdp.n_states() {
            return Err(Error::InvalidPolicy(format!(
                "policy covers {} states, model has {}",
                self.choices.len(),
                mdp.n_states()
            )));
        }
        for s in mdp.states() {
            if self.action_index(s) >= mdp.actions(s).len() {
                return Err(Error::InvalidPolicy(format!(
                    "action index {} out of range at state `{}`",
                    self.action_index(s),
                    mdp.state_name(s)
                )));
            }
        }
        Ok(())
    }
}

/// True iff `candidate` is total over the model's states and names a valid
/// action at every state. Missing states and unknown labels both yield false.
pub fn is_policy(mdp: &Mdp, candidate: &BTreeMap<StateId, String>) -> bool {
    mdp.states().all(|s| {
        candidate
            .get(&s)
            .is_some_and(|id| mdp.action_by_id(s, id).is_some())
    })
}

/// Number of deterministic stationary policies: the product of the per-state
/// action counts. Saturates at `u128::MAX`.
pub fn policy_count(mdp: &Mdp) -> u128 {
    mdp.states().fold(1u128, |acc, s| {
        acc.saturating_mul(mdp.actions(s).len() as u128)
    })
}

/// Iterator over every deterministic stationary policy, in lexicographic
/// order of action indices (last state varies fastest).
#[derive(Debug)]
pub struct PolicyIter<'m> {
    mdp: &'m Mdp,
    next: Option<Vec<usize>>,
}

impl Iterator for PolicyIter<'_> {
    type Item = Policy;

    fn next(&mut self) -> Option<Policy> {
        let current = self.next.take()?;
        let policy = Policy {
            choices: current.clone(),
        };
        // Odometer increment, rightmost digit fastest.
        let mut digits = current;
        for s in (0..digits.len()).rev() {
            digits[s] += 1;
            if digits[s] < self.mdp.actions(StateId(s)).len() {
                self.next = Some(digits);
                return Some(policy);
            }
            digits[s] = 0;
        }
        Some(policy)
    }
}

/// Enumerates the full policy space, failing up front when it exceeds `cap`.
pub fn enumerate_policies(mdp: &Mdp, cap: u64) -> Result<PolicyIter<'_>> {
    let count = policy_count(mdp);
    if count > cap as u128 {
        return Err(Error::PolicySpaceTooLarge {
            count,
            cap: cap as u128,
        });
    }
    Ok(PolicyIter {
        mdp,
        next: Some(vec![0; mdp.n_states()]),
    })
}

/// Least `n` such that every state reachable at step `n` (starting from `s`,
/// taking `a` first, then following `p`) is terminal, or `None` if no such
/// step exists.
///
/// The step-`n` state sets evolve deterministically over the finite subsets
/// of the state space, so the sequence must revisit a set eventually; the
/// search stops at the first repeat.
pub fn absorption_step(mdp: &Mdp, p: &Policy, s: StateId, action_index: usize) -> Option<usize> {
    let terminal: Vec<bool> = mdp.states().map(|s| mdp.is_terminal_state(s)).collect();
    let all_terminal = |set: &BTreeSet<StateId>| set.iter().all(|s| terminal[s.index()]);

    let step0: BTreeSet<StateId> = [s].into();
    if all_terminal(&step0) {
        return Some(0);
    }
    let mut current: BTreeSet<StateId> = mdp.action(s, action_index).support().collect();
    let mut seen: HashSet<BTreeSet<StateId>> = HashSet::new();
    let mut n = 1;
    loop {
        if all_terminal(&current) {
            return Some(n);
        }
        if !seen.insert(current.clone()) {
            return None;
        }
        current = current
            .iter()
            .flat_map(|&s| p.action(mdp, s).support())
            .collect();
        n += 1;
    }
}

/// True iff from every start state and every initial action, an agent
/// following `p` is certain to end up among terminal states after finitely
/// many steps.
pub fn inevitable_terminal(mdp: &Mdp, p: &Policy) -> bool {
    mdp.states().all(|s| {
        (0..mdp.actions(s).len()).all(|a| absorption_step(mdp, p, s, a).is_some())
    })
}
