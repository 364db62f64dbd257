//! Solve the same maintenance problem by policy iteration: exact evaluation
//! plus greedy improvement, stopping at the provably optimal policy.
//!
//! ```bash
//! cargo run --example policy_iteration
//! ```

use finite_mdp::mdp::{ActionPmf, Mdp, Policy};
use finite_mdp::solver::{default_pi_cap, policy_iteration};

fn maintenance_model() -> Mdp {
    Mdp::new(
        0.9,
        vec!["good".into(), "worn".into(), "broken".into()],
        vec![
            vec![ActionPmf::from_triples(
                "operate",
                &[(0, 0.7, 2.0), (1, 0.3, 2.0)],
            )],
            vec![
                ActionPmf::from_triples("operate", &[(1, 0.6, 1.0), (2, 0.4, 1.0)]),
                ActionPmf::from_triples("repair", &[(0, 1.0, -1.0)]),
            ],
            vec![ActionPmf::from_triples("repair", &[(0, 1.0, -3.0)])],
        ],
    )
    .expect("model is valid")
}

fn main() {
    let mdp = maintenance_model();
    // Start from the policy that never repairs when worn.
    let p0 = Policy::from_indices(&mdp, vec![0, 0, 0]).unwrap();
    let report = policy_iteration(&mdp, &p0, default_pi_cap(&mdp)).unwrap();

    println!("stabilized after {} evaluations:", report.iterations);
    for entry in &report.trace {
        let policy = entry.policy.as_ref().unwrap();
        let rendered: Vec<String> = mdp
            .states()
            .map(|s| format!("{}:{}", mdp.state_name(s), policy.action_id(&mdp, s)))
            .collect();
        let values: Vec<String> = entry
            .value
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect();
        println!(
            "  iter {}: {{{}}} worth [{}]",
            entry.iteration,
            rendered.join(", "),
            values.join(", ")
        );
    }

    println!("\noptimal policy (certificate: exact):");
    for s in mdp.states() {
        println!(
            "  {}: {} (value {:.4})",
            mdp.state_name(s),
            report.final_policy.action_id(&mdp, s),
            report.final_value.get(s)
        );
    }
}
