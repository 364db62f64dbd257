//! Small reference models used throughout the tests, examples, and docs.

use crate::mdp::{ActionPmf, Mdp};

/// Two-state model: `s0` can stay put for nothing (`a_stay0`) or move to the
/// terminal state `s1` for a reward of 1 (`a_go`); `s1` only loops on itself
/// (`a_stay1`). Discount 0.5. The optimal value vector is `(1, 0)` and the
/// unique universally optimal policy takes `a_go`.
pub fn m2() -> Mdp {
    Mdp::new(
        0.5,
        vec!["s0".into(), "s1".into()],
        vec![
            vec![
                ActionPmf::from_triples("a_stay0", &[(0, 1.0, 0.0)]),
                ActionPmf::from_triples("a_go", &[(1, 1.0, 1.0)]),
            ],
            vec![ActionPmf::from_triples("a_stay1", &[(1, 1.0, 0.0)])],
        ],
    )
    .expect("reference model is valid")
}

/// One-state model with a single self-loop worth 1 per step, discount 0.5.
/// Its value is the geometric series `1 / (1 - 0.5) = 2`.
pub fn loop1() -> Mdp {
    Mdp::new(
        0.5,
        vec!["s0".into()],
        vec![vec![ActionPmf::from_triples("a_loop", &[(0, 1.0, 1.0)])]],
    )
    .expect("reference model is valid")
}
