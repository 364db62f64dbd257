//! JSON documents for models and policies, and their conversions to and from
//! the validated core types.
//!
//! A model document looks like:
//!
//! ```json
//! {
//!   "gamma": 0.5,
//!   "states": ["s0", "s1"],
//!   "actions": {
//!     "s0": {
//!       "a_stay0": { "transitions": { "s0": 1.0 } },
//!       "a_go":    { "transitions": { "s1": 1.0 }, "rewards": { "s1": 1.0 } }
//!     },
//!     "s1": {
//!       "a_stay1": { "transitions": { "s1": 1.0 } }
//!     }
//!   }
//! }
//! ```
//!
//! Rewards default to 0 for successors without an entry. Maps preserve
//! document order, so the order actions appear in a file is the order used
//! for tie-breaking and policy enumeration. A policy document is a plain
//! `{"state": "action"}` object.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, ModelViolation, Result};
use crate::mdp::{ActionPmf, Mdp, Policy, StateId};

/// One action's transition distribution and rewards, keyed by state name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDocument {
    pub transitions: IndexMap<String, f64>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub rewards: IndexMap<String, f64>,
}

/// Serializable form of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpDocument {
    pub gamma: f64,
    pub states: Vec<String>,
    pub actions: IndexMap<String, IndexMap<String, ActionDocument>>,
}

/// Serializable form of a policy: state name to action name, total over the
/// model's states.
pub type PolicyDocument = IndexMap<String, String>;

impl MdpDocument {
    /// Validates the document and produces the core model, or every
    /// violation found.
    pub fn to_mdp(&self) -> std::result::Result<Mdp, Vec<ModelViolation>> {
        let mut violations = Vec::new();

        let lookup = |name: &str| self.states.iter().position(|s| s == name).map(StateId);
        for state in self.actions.keys() {
            if lookup(state).is_none() {
                violations.push(ModelViolation::UnknownState(state.clone()));
            }
        }

        let mut actions: Vec<Vec<ActionPmf>> = vec![Vec::new(); self.states.len()];
        for (state, acts) in &self.actions {
            let Some(sid) = lookup(state) else { continue };
            for (action_name, doc) in acts {
                let mut probs = BTreeMap::new();
                let mut rewards = BTreeMap::new();
                for (succ, &p) in &doc.transitions {
                    match lookup(succ) {
                        Some(t) => {
                            probs.insert(t, p);
                        }
                        None => violations.push(ModelViolation::UnknownSuccessorState {
                            state: state.clone(),
                            action: action_name.clone(),
                            successor: succ.clone(),
                        }),
                    }
                }
                for (succ, &r) in &doc.rewards {
                    match lookup(succ) {
                        Some(t) => {
                            rewards.insert(t, r);
                        }
                        None => violations.push(ModelViolation::UnknownSuccessorState {
                            state: state.clone(),
                            action: action_name.clone(),
                            successor: succ.clone(),
                        }),
                    }
                }
                actions[sid.index()].push(ActionPmf::new(action_name.clone(), probs, rewards));
            }
        }

        match Mdp::new(self.gamma, self.states.clone(), actions) {
            Ok(mdp) if violations.is_empty() => Ok(mdp),
            Ok(_) => Err(violations),
            Err(more) => {
                violations.extend(more);
                Err(violations)
            }
        }
    }

    /// Document form of a model; inverse of [`MdpDocument::to_mdp`] up to
    /// omitted zero rewards.
    pub fn from_mdp(mdp: &Mdp) -> Self {
        let actions = mdp
            .states()
            .map(|s| {
                let per_state = mdp
                    .actions(s)
                    .iter()
                    .map(|a| {
                        let transitions = a
                            .entries()
                            .map(|(t, p)| (mdp.state_name(t).to_string(), p))
                            .collect();
                        let rewards = a
                            .reward_entries()
                            .filter(|&(_, r)| r != 0.0)
                            .map(|(t, r)| (mdp.state_name(t).to_string(), r))
                            .collect();
                        (a.id().to_string(), ActionDocument { transitions, rewards })
                    })
                    .collect();
                (mdp.state_name(s).to_string(), per_state)
            })
            .collect();
        Self {
            gamma: mdp.gamma(),
            states: mdp.state_names().to_vec(),
            actions,
        }
    }
}

/// Resolves a policy document against a model.
pub fn policy_from_document(mdp: &Mdp, doc: &PolicyDocument) -> Result<Policy> {
    let mut choice = BTreeMap::new();
    for (state, action) in doc {
        let sid = mdp
            .state_id(state)
            .ok_or_else(|| Error::InvalidPolicy(format!("unknown state `{state}`")))?;
        choice.insert(sid, action.clone());
    }
    Policy::from_choices(mdp, &choice)
}

/// Document form of a policy, in state order.
pub fn policy_to_document(mdp: &Mdp, policy: &Policy) -> PolicyDocument {
    mdp.states()
        .map(|s| {
            (
                mdp.state_name(s).to_string(),
                policy.action_id(mdp, s).to_string(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::m2;

    #[test]
    fn document_round_trip_preserves_model() {
        let mdp = m2();
        let doc = MdpDocument::from_mdp(&mdp);
        let json = serde_json::to_string_pretty(&doc).unwrap();
        let parsed: MdpDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(parsed.to_mdp().unwrap(), mdp);
    }

    #[test]
    fn unknown_successor_is_reported_with_names() {
        let json = r#"{
            "gamma": 0.5,
            "states": ["s0"],
            "actions": { "s0": { "a": { "transitions": { "ghost": 1.0 } } } }
        }"#;
        let doc: MdpDocument = serde_json::from_str(json).unwrap();
        let violations = doc.to_mdp().unwrap_err();
        assert!(violations.iter().any(|v| matches!(
            v,
            ModelViolation::UnknownSuccessorState { successor, .. } if successor == "ghost"
        )));
    }

    #[test]
    fn action_order_follows_the_document() {
        let json = r#"{
            "gamma": 0.5,
            "states": ["s0", "s1"],
            "actions": {
                "s0": {
                    "zz_first": { "transitions": { "s0": 1.0 } },
                    "aa_second": { "transitions": { "s1": 1.0 } }
                },
                "s1": { "stay": { "transitions": { "s1": 1.0 } } }
            }
        }"#;
        let mdp: Mdp = serde_json::from_str::<MdpDocument>(json)
            .unwrap()
            .to_mdp()
            .unwrap();
        assert_eq!(mdp.action(StateId(0), 0).id(), "zz_first");
        assert_eq!(mdp.action(StateId(0), 1).id(), "aa_second");
    }

    #[test]
    fn policy_documents_resolve_and_render() {
        let mdp = m2();
        let doc: PolicyDocument = [("s0", "a_go"), ("s1", "a_stay1")]
            .into_iter()
            .map(|(s, a)| (s.to_string(), a.to_string()))
            .collect();
        let policy = policy_from_document(&mdp, &doc).unwrap();
        assert_eq!(policy.action_id(&mdp, StateId(0)), "a_go");
        assert_eq!(policy_to_document(&mdp, &policy), doc);

        let partial: PolicyDocument =
            [("s0".to_string(), "a_go".to_string())].into_iter().collect();
        assert!(policy_from_document(&mdp, &partial).is_err());
    }
}
