//! The one-step operators: apply a fixed policy's operator, apply the
//! optimizing operator, extract a greedy policy, and evaluate a policy
//! exactly through the linear system.
//!
//! ```bash
//! cargo run --example bellman_operators
//! ```

use finite_mdp::bellman::{
    apply_l, apply_l_max, greedy_policy, policy_matrices, policy_value_exact,
    vmax_fixed_point_check, SolveMethod,
};
use finite_mdp::linalg::StateVector;
use finite_mdp::mdp::Policy;
use finite_mdp::models::m2;

fn main() {
    let mdp = m2();
    let stay = Policy::from_indices(&mdp, vec![0, 0]).unwrap();
    let go = Policy::from_indices(&mdp, vec![1, 0]).unwrap();

    let pm = policy_matrices(&mdp, &go).unwrap();
    println!("one-step rewards under `go`: {:?}", pm.reward.as_slice());
    println!("transition rows under `go`:");
    for s in mdp.states() {
        println!("  {}: {:?}", mdp.state_name(s), pm.transition.row(s.index()));
    }

    let zero = StateVector::zeros(2);
    println!("\nL_stay(0) = {:?}", apply_l(&mdp, &stay, &zero).unwrap().as_slice());
    println!("L_go(0)   = {:?}", apply_l(&mdp, &go, &zero).unwrap().as_slice());
    println!("L_max(0)  = {:?}", apply_l_max(&mdp, &zero).unwrap().as_slice());

    let greedy = greedy_policy(&mdp, &zero, None).unwrap();
    println!(
        "greedy against 0: s0 -> {}",
        greedy.action_id(&mdp, finite_mdp::StateId(0))
    );

    let value = policy_value_exact(&mdp, &go, SolveMethod::Direct).unwrap();
    println!("\nexact value of `go`: {:?}", value.as_slice());
    println!(
        "is it the optimal value vector? {}",
        vmax_fixed_point_check(&mdp, &value, 1e-9).unwrap()
    );
    let worse = policy_value_exact(&mdp, &stay, SolveMethod::Direct).unwrap();
    println!("exact value of `stay`: {:?}", worse.as_slice());
    println!(
        "is *that* the optimal value vector? {}",
        vmax_fixed_point_check(&mdp, &worse, 1e-9).unwrap()
    );
}
