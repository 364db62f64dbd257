//! The full loop: solve a model with both algorithms, then certify the
//! answers against the brute-force enumeration oracle.
//!
//! ```bash
//! cargo run --example solve_and_certify
//! ```

use finite_mdp::bellman::policy_value_exact;
use finite_mdp::bellman::SolveMethod;
use finite_mdp::linalg::StateVector;
use finite_mdp::mdp::{enumerate_policies, ActionPmf, Mdp, DEFAULT_POLICY_CAP};
use finite_mdp::oracle::{oracle_solve, q_max_check};
use finite_mdp::solver::{default_pi_cap, policy_iteration, value_iteration, DEFAULT_VI_CAP};

/// Two routes to a goal: a safe slow one and a risky shortcut.
fn commute_model() -> Mdp {
    Mdp::new(
        0.95,
        vec!["home".into(), "highway".into(), "jammed".into(), "office".into()],
        vec![
            vec![
                ActionPmf::from_triples("side_roads", &[(3, 1.0, -4.0)]),
                ActionPmf::from_triples("take_highway", &[(1, 0.8, -1.0), (2, 0.2, -1.0)]),
            ],
            vec![ActionPmf::from_triples("drive", &[(3, 1.0, -1.0)])],
            vec![ActionPmf::from_triples("crawl", &[(2, 0.5, -3.0), (3, 0.5, -3.0)])],
            vec![ActionPmf::from_triples("work", &[(3, 1.0, 0.0)])],
        ],
    )
    .expect("model is valid")
}

fn main() {
    let mdp = commute_model();

    let oracle = oracle_solve(&mdp, DEFAULT_POLICY_CAP, false).unwrap();
    println!("exhaustive sweep over {} policies", oracle.policies.len());
    println!("optimal values per state:");
    for s in mdp.states() {
        println!("  {}: {:.4}", mdp.state_name(s), oracle.vmax.get(s));
    }

    let vi = value_iteration(
        &mdp,
        &StateVector::zeros(mdp.n_states()),
        1e-6,
        DEFAULT_VI_CAP,
    )
    .unwrap();
    let vi_value = policy_value_exact(&mdp, &vi.final_policy, SolveMethod::Direct).unwrap();
    println!(
        "\nvalue iteration: {} iterations, final policy within {:.1e} of the oracle",
        vi.iterations,
        vi_value.sup_dist(&oracle.vmax).unwrap()
    );

    let p0 = enumerate_policies(&mdp, DEFAULT_POLICY_CAP)
        .unwrap()
        .next()
        .unwrap();
    let pi = policy_iteration(&mdp, &p0, default_pi_cap(&mdp)).unwrap();
    let index = oracle
        .policies
        .iter()
        .position(|p| *p == pi.final_policy)
        .unwrap();
    println!(
        "policy iteration: {} evaluations, final policy is oracle policy #{index} \
         (universally optimal: {})",
        pi.iterations,
        oracle.universal_optimal.contains(&index)
    );

    println!("\nchosen route from home: {}", pi.final_policy.action_id(&mdp, finite_mdp::StateId(0)));
    for action in mdp.actions(finite_mdp::StateId(0)) {
        let q = q_max_check(&mdp, &oracle, finite_mdp::StateId(0), action.id()).unwrap();
        println!("  best achievable after first taking `{}`: {q:.4}", action.id());
    }
}
