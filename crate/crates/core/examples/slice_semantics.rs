//! Walk the step-by-step trajectory semantics: which states an agent can
//! reach, with what probability, what each step earns, and how the
//! discounted truncations converge to the policy value.
//!
//! ```bash
//! cargo run --example slice_semantics
//! ```

use finite_mdp::mdp::{Policy, StateId};
use finite_mdp::models::m2;
use finite_mdp::slice;

fn main() {
    let mdp = m2();
    // Take a_go first, then follow the policy that always takes a_go at s0.
    let policy = Policy::from_indices(&mdp, vec![1, 0]).unwrap();
    let start = StateId(0);

    println!("start at s0, take a_stay0 once, then follow the policy:\n");
    for n in 0..=4 {
        let slice = slice::q_slice(&mdp, &policy, n, start, "a_stay0").unwrap();
        let rendered: Vec<String> = slice
            .iter()
            .map(|&t| {
                let prob = slice::q_slice_p(&mdp, &policy, n, start, "a_stay0", t).unwrap();
                format!("{} (p={prob:.3})", mdp.state_name(t))
            })
            .collect();
        let reward = slice::rq_slice(&mdp, &policy, n, start, "a_stay0").unwrap();
        println!("  step {n}: reachable {{{}}}, expected step reward {reward:.3}", rendered.join(", "));
    }

    println!("\ndiscounted truncations from (s0, a_go):");
    for horizon in 0..=5 {
        let partial = slice::q_expected_n(&mdp, &policy, horizon, start, "a_go").unwrap();
        println!("  up to step {horizon}: {partial:.6}");
    }

    let estimate = slice::q_expected(&mdp, &policy, start, "a_go", 1e-9).unwrap();
    println!(
        "\nlimit value: {:.9} (horizon {}, tail bound {:.1e})",
        estimate.value, estimate.horizon, estimate.tail_bound
    );

    let v = slice::v_expected(&mdp, &policy, start, 1e-9).unwrap();
    println!("value of following the policy outright: {:.9}", v.value);
}
