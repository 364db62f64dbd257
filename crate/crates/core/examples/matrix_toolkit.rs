//! The dense linear-algebra layer: sup and operator norms, stochastic
//! predicates, spectral-radius bounds, and the two solve routes checking
//! each other.
//!
//! ```bash
//! cargo run --example matrix_toolkit
//! ```

use finite_mdp::linalg::{StateMatrix, StateVector};

fn main() {
    let v = StateVector::from_vec(vec![1.0, -3.0, 2.0]);
    println!("sup norm of {:?} = {}", v.as_slice(), v.sup_norm());

    let t = StateMatrix::from_rows(vec![
        vec![0.5, 0.5, 0.0],
        vec![0.1, 0.6, 0.3],
        vec![0.0, 0.0, 1.0],
    ])
    .unwrap();
    println!("transition matrix is stochastic: {}", t.is_stochastic());
    println!("operator norm (max abs row sum): {}", t.op_norm());
    println!("T^3 still stochastic: {}", t.mat_pow(3).is_stochastic());

    // Discount the dynamics and the spectral radius drops below one, which
    // certifies that I - 0.9 T is invertible by power series.
    let discounted = t.scale(0.9);
    println!(
        "spectral radius bound of 0.9*T (depth 16): {:.6}",
        discounted.spectral_radius_estimate(16)
    );

    let system = StateMatrix::identity(3).sub(&discounted).unwrap();
    let inverse = system.neumann_inverse(1e-10, 10_000).unwrap();
    let residual = system
        .mat_mul(&inverse)
        .unwrap()
        .sub(&StateMatrix::identity(3))
        .unwrap()
        .op_norm();
    println!("power-series inverse residual: {residual:.3e}");

    let b = StateVector::from_vec(vec![1.0, 2.0, 0.0]);
    let via_series = inverse.mat_vec(&b).unwrap();
    let via_elimination = system.solve(&b).unwrap();
    println!(
        "series route:      {:?}",
        via_series.as_slice()
    );
    println!(
        "elimination route: {:?}",
        via_elimination.as_slice()
    );
    println!(
        "routes agree within {:.3e}",
        via_series.sup_dist(&via_elimination).unwrap()
    );
}
