//! Solve a small maintenance problem by value iteration and inspect the
//! trace and the epsilon certificate.
//!
//! ```bash
//! cargo run --example value_iteration
//! ```

use finite_mdp::linalg::StateVector;
use finite_mdp::mdp::{ActionPmf, Mdp};
use finite_mdp::solver::{value_iteration, DEFAULT_VI_CAP};

/// A machine degrades stochastically while operated; repairing costs now but
/// restores the good state.
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
    let epsilon = 1e-4;
    let report = value_iteration(
        &mdp,
        &StateVector::zeros(mdp.n_states()),
        epsilon,
        DEFAULT_VI_CAP,
    )
    .unwrap();

    println!("converged in {} iterations", report.iterations);
    println!("first and last steps of the trace:");
    for entry in report.trace.iter().take(3) {
        println!(
            "  iter {:>3}: delta {:.3e}",
            entry.iteration,
            entry.delta.unwrap()
        );
    }
    println!("  ...");
    for entry in report.trace.iter().rev().take(2).collect::<Vec<_>>().iter().rev() {
        println!(
            "  iter {:>3}: delta {:.3e}",
            entry.iteration,
            entry.delta.unwrap()
        );
    }

    println!("\npolicy (certified within {epsilon} of optimal):");
    for s in mdp.states() {
        println!(
            "  {}: {} (value {:.4})",
            mdp.state_name(s),
            report.final_policy.action_id(&mdp, s),
            report.final_value.get(s)
        );
    }
}
