//! Build a model in code, validate it, and see what validation rejects.
//!
//! ```bash
//! cargo run --example build_and_validate
//! ```

use finite_mdp::mdp::{enumerate_policies, policy_count, ActionPmf, Mdp, DEFAULT_POLICY_CAP};

fn main() {
    // A two-state machine: keep running for a small payoff, or ship the work
    // and stop. Rewards attach to the successor state of each transition.
    let mdp = Mdp::new(
        0.9,
        vec!["working".into(), "done".into()],
        vec![
            vec![
                ActionPmf::from_triples("keep_running", &[(0, 0.8, 0.5), (1, 0.2, 0.5)]),
                ActionPmf::from_triples("ship", &[(1, 1.0, 3.0)]),
            ],
            vec![ActionPmf::from_triples("rest", &[(1, 1.0, 0.0)])],
        ],
    )
    .expect("model is valid");

    println!(
        "built a model with {} states, {} actions, discount {}",
        mdp.n_states(),
        mdp.total_actions(),
        mdp.gamma()
    );
    println!("policy space size: {}", policy_count(&mdp));
    for policy in enumerate_policies(&mdp, DEFAULT_POLICY_CAP).unwrap() {
        let rendered: Vec<String> = mdp
            .states()
            .map(|s| format!("{} -> {}", mdp.state_name(s), policy.action_id(&mdp, s)))
            .collect();
        println!("  policy: {}", rendered.join(", "));
    }
    for s in mdp.states() {
        println!(
            "  {} is terminal: {}",
            mdp.state_name(s),
            mdp.is_terminal_state(s)
        );
    }

    // Validation collects every violation instead of stopping at the first.
    let broken = Mdp::new(
        1.2,
        vec!["a".into(), "b".into()],
        vec![
            vec![ActionPmf::from_triples("leaky", &[(0, 0.5, 0.0), (1, 0.4, 0.0)])],
            vec![],
        ],
    );
    match broken {
        Ok(_) => unreachable!("this model is invalid"),
        Err(violations) => {
            println!("\nrejected a bad model for {} reasons:", violations.len());
            for v in violations {
                println!("  - {v}");
            }
        }
    }
}
