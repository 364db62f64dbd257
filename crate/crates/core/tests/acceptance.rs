//! Acceptance suite: every release-gating property, one test per criterion,
//! each printing a PASS line with its runtime against an explicit budget.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.
//!
//! The random model suite is fixed by seed: 20 valid models with 2-5 states,
//! 1-3 actions per state, and discounts strictly inside (0, 1).

use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use finite_mdp::bellman::{
    apply_l, apply_l_max, policy_value_exact, vmax_fixed_point_check, SolveMethod,
};
use finite_mdp::document::{policy_to_document, MdpDocument};
use finite_mdp::generate::{random_mdp, random_stochastic_matrix, random_vector, GeneratorConfig};
use finite_mdp::linalg::{StateMatrix, StateVector};
use finite_mdp::mdp::{enumerate_policies, policy_count, Mdp, Policy, StateId};
use finite_mdp::models::{loop1, m2};
use finite_mdp::oracle::oracle_solve;
use finite_mdp::slice;
use finite_mdp::solver::{policy_iteration, value_iteration, Termination};

const SUITE_SEED: u64 = 0xACCE;
const SUITE_SIZE: usize = 20;
const POLICY_CAP: u64 = 1_000_000;

fn suite() -> Vec<Mdp> {
    let mut rng = StdRng::seed_from_u64(SUITE_SEED);
    let cfg = GeneratorConfig::default();
    (0..SUITE_SIZE).map(|_| random_mdp(&mut rng, &cfg)).collect()
}

fn policies_of(mdp: &Mdp) -> Vec<Policy> {
    enumerate_policies(mdp, POLICY_CAP)
        .expect("suite policy spaces are enumerable")
        .collect()
}

fn conclude(name: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    println!("PASS {name}: {elapsed:.2?} (budget {budget:.0?})");
    assert!(
        elapsed <= budget,
        "{name} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

/// Occupation probabilities over each slice sum to one.
#[test]
fn criterion_01_slice_normalization() {
    let start = Instant::now();
    for mdp in suite() {
        for p in policies_of(&mdp) {
            for s in mdp.states() {
                for action in mdp.actions(s) {
                    let id = action.id().to_string();
                    for n in 1..=6usize {
                        let total: f64 = slice::q_slice(&mdp, &p, n, s, &id)
                            .unwrap()
                            .iter()
                            .map(|&t| slice::q_slice_p(&mdp, &p, n, s, &id, t).unwrap())
                            .sum();
                        assert!(
                            (total - 1.0).abs() <= 1e-8,
                            "normalization off by {}",
                            (total - 1.0).abs()
                        );
                    }
                }
            }
        }
    }
    conclude("slice normalization", start, Duration::from_secs(10));
}

/// Limit values satisfy the scalar one-step recursion.
#[test]
fn criterion_02_scalar_bellman_recursion() {
    let start = Instant::now();
    let tol = 1e-7;
    for base in suite() {
        for gamma in [0.3, 0.9] {
            let mdp = base.with_gamma(gamma).unwrap();
            for p in policies_of(&mdp) {
                let table = slice::q_expected_table(&mdp, &p, tol).unwrap();
                for s in mdp.states() {
                    for (i, action) in mdp.actions(s).iter().enumerate() {
                        let lhs = table[s.index()][i].value;
                        let rhs: f64 = action
                            .support()
                            .map(|t| {
                                let cont = table[t.index()][p.action_index(t)].value;
                                action.prob(t) * (action.reward(t) + gamma * cont)
                            })
                            .sum();
                        assert!(
                            (lhs - rhs).abs() <= 5e-7,
                            "one-step recursion off by {}",
                            (lhs - rhs).abs()
                        );
                    }
                }
            }
        }
    }
    conclude("scalar one-step recursion", start, Duration::from_secs(60));
}

/// Stochastic matrices have operator norm one and close under products and
/// powers; the norm is submultiplicative.
#[test]
fn criterion_03_operator_norm_and_stochasticity() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(SUITE_SEED + 3);
    let mut previous: Option<StateMatrix> = None;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=6);
        let a = random_stochastic_matrix(&mut rng, n);
        assert!((a.op_norm() - 1.0).abs() <= 1e-9);
        assert!(a.mat_pow(2).is_stochastic());
        assert!(a.mat_pow(3).is_stochastic());
        if let Some(b) = previous.filter(|b| b.dim() == n) {
            let ab = a.mat_mul(&b).unwrap();
            assert!(ab.is_stochastic());
            assert!(ab.op_norm() <= a.op_norm() * b.op_norm() + 1e-12);
        }
        previous = Some(a);
    }
    conclude(
        "operator norm and stochasticity",
        start,
        Duration::from_secs(5),
    );
}

/// The power-series inverse is a true inverse and matches elimination.
#[test]
fn criterion_04_neumann_inversion() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(SUITE_SEED + 4);
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let gamma: f64 = rng.gen_range(0.05..=0.95);
        let t = random_stochastic_matrix(&mut rng, n);
        let system = StateMatrix::identity(n).sub(&t.scale(gamma)).unwrap();
        let inverse = system.neumann_inverse(1e-9, 10_000).unwrap();
        let residual = system
            .mat_mul(&inverse)
            .unwrap()
            .sub(&StateMatrix::identity(n))
            .unwrap()
            .op_norm();
        assert!(residual <= 1e-8, "inverse residual {residual}");
        let b = random_vector(&mut rng, n, -2.0, 2.0);
        let gap = inverse
            .mat_vec(&b)
            .unwrap()
            .sup_dist(&system.solve(&b).unwrap())
            .unwrap();
        assert!(gap <= 1e-6, "solve routes disagree by {gap}");
    }
    conclude("power-series inversion", start, Duration::from_secs(10));
}

/// Matrix evaluation and slice evaluation price every policy identically.
#[test]
fn criterion_05_exact_evaluation_matches_slices() {
    let start = Instant::now();
    let tol = 1e-7;
    for mdp in suite() {
        for p in policies_of(&mdp) {
            let exact = policy_value_exact(&mdp, &p, SolveMethod::Direct).unwrap();
            let table = slice::q_expected_table(&mdp, &p, tol).unwrap();
            for s in mdp.states() {
                let sliced = table[s.index()][p.action_index(s)].value;
                assert!(
                    (sliced - exact.get(s)).abs() <= 2e-7,
                    "evaluation routes disagree by {}",
                    (sliced - exact.get(s)).abs()
                );
            }
        }
    }
    conclude("exact evaluation vs slices", start, Duration::from_secs(60));
}

/// Both operators are gamma-contractions in the sup norm.
#[test]
fn criterion_06_contraction_bounds() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(SUITE_SEED + 6);
    for mdp in suite() {
        let gamma = mdp.gamma();
        let n = mdp.n_states();
        let policies = policies_of(&mdp);
        for i in 0..1000 {
            let u = random_vector(&mut rng, n, -5.0, 5.0);
            let v = random_vector(&mut rng, n, -5.0, 5.0);
            let dist = u.sup_dist(&v).unwrap();
            let p = &policies[i % policies.len()];
            let fixed = apply_l(&mdp, p, &u)
                .unwrap()
                .sup_dist(&apply_l(&mdp, p, &v).unwrap())
                .unwrap();
            assert!(fixed <= gamma * dist + 1e-12);
            let optimizing = apply_l_max(&mdp, &u)
                .unwrap()
                .sup_dist(&apply_l_max(&mdp, &v).unwrap())
                .unwrap();
            assert!(optimizing <= gamma * dist + 1e-12);
        }
    }
    conclude("contraction bounds", start, Duration::from_secs(10));
}

/// Value iteration is epsilon-optimal and stops within its analytic bound.
#[test]
fn criterion_07_value_iteration_epsilon_optimality() {
    let start = Instant::now();
    for mdp in suite() {
        let gamma = mdp.gamma();
        assert!(gamma > 0.0 && gamma < 1.0);
        let oracle = oracle_solve(&mdp, POLICY_CAP, false).unwrap();
        let v0 = StateVector::zeros(mdp.n_states());
        for epsilon in [0.5, 0.05, 0.005] {
            let threshold = epsilon * (1.0 - gamma) / (2.0 * gamma);
            let first_step = apply_l_max(&mdp, &v0).unwrap().sup_dist(&v0).unwrap();
            let analytic_cap = if first_step < threshold {
                2
            } else {
                ((threshold / first_step).ln() / gamma.ln()).ceil() as usize + 2
            };
            let report = value_iteration(&mdp, &v0, epsilon, analytic_cap).unwrap();
            assert_eq!(
                report.termination,
                Termination::Converged,
                "not converged within the analytic bound of {analytic_cap}"
            );
            let achieved = policy_value_exact(&mdp, &report.final_policy, SolveMethod::Direct)
                .unwrap();
            let gap = achieved.sup_dist(&oracle.vmax).unwrap();
            assert!(gap < epsilon, "epsilon-optimality violated: {gap} >= {epsilon}");
        }
    }
    conclude(
        "value-iteration epsilon-optimality",
        start,
        Duration::from_secs(60),
    );
}

/// Policy iteration improves monotonically, terminates within the policy
/// count, and lands exactly on the optimum - from every starting policy.
#[test]
fn criterion_08_policy_iteration_optimality_and_finiteness() {
    let start = Instant::now();
    for mdp in suite() {
        let oracle = oracle_solve(&mdp, POLICY_CAP, false).unwrap();
        let count = policy_count(&mdp) as usize;
        for p0 in policies_of(&mdp) {
            let report = policy_iteration(&mdp, &p0, count + 1).unwrap();
            assert_eq!(report.termination, Termination::Converged);
            assert!(report.iterations <= count);
            for pair in report.trace.windows(2) {
                let floor = pair[0]
                    .value
                    .sub(&StateVector::constant(mdp.n_states(), 1e-9))
                    .unwrap();
                assert!(floor.leq(&pair[1].value).unwrap(), "trace not monotone");
            }
            let gap = report.final_value.sup_dist(&oracle.vmax).unwrap();
            assert!(gap <= 2e-7, "final value misses the optimum by {gap}");
        }
    }
    conclude(
        "policy-iteration optimality and finiteness",
        start,
        Duration::from_secs(120),
    );
}

/// The optimal value vector is the unique fixed point of the optimizing
/// operator; perturbing it breaks the certificate.
#[test]
fn criterion_09_fixed_point_characterization() {
    let start = Instant::now();
    for mdp in suite() {
        let oracle = oracle_solve(&mdp, POLICY_CAP, false).unwrap();
        assert!(vmax_fixed_point_check(&mdp, &oracle.vmax, 2e-7).unwrap());
        // Negative control: a bumped component must fail the check.
        let mut bumped = oracle.vmax.clone();
        bumped.set(StateId(0), bumped.get(StateId(0)) + 0.1);
        assert!(!vmax_fixed_point_check(&mdp, &bumped, 2e-7).unwrap());
    }
    conclude("fixed-point characterization", start, Duration::from_secs(5));
}

/// The named reference models solve end-to-end through the command line and
/// match their independently derived values.
#[test]
fn criterion_10_named_examples_end_to_end() {
    let start = Instant::now();
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(dir).unwrap();

    // Independent derivations: exhaustive enumeration for m2, the geometric
    // series for loop1.
    let m2 = m2();
    let oracle = oracle_solve(&m2, POLICY_CAP, false).unwrap();
    assert!((oracle.vmax.get(StateId(0)) - 1.0).abs() <= 1e-9);
    assert!(oracle.vmax.get(StateId(1)).abs() <= 1e-9);
    assert_eq!(oracle.universal_optimal.len(), 1);
    let best = *oracle.universal_optimal.iter().next().unwrap();
    assert_eq!(oracle.policies[best].action_id(&m2, StateId(0)), "a_go");
    let loop1 = loop1();
    let geometric = 1.0 / (1.0 - loop1.gamma());
    assert_eq!(geometric, 2.0);

    // End to end: solve m2 with `pi`.
    let m2_path = dir.join("m2.json");
    std::fs::write(
        &m2_path,
        serde_json::to_string_pretty(&MdpDocument::from_mdp(&m2)).unwrap(),
    )
    .unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_fmdp"))
        .args(["pi", m2_path.to_str().unwrap(), "--json"])
        .output()
        .unwrap();
    assert!(output.status.success(), "pi failed: {output:?}");
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["policy"]["s0"], "a_go");
    assert_eq!(report["policy"]["s1"], "a_stay1");
    assert!((report["values"]["s0"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    assert!(report["values"]["s1"].as_f64().unwrap().abs() <= 1e-9);
    assert_eq!(report["certificate"].as_f64().unwrap(), 0.0);

    // End to end: price loop1's only policy with `eval`.
    let loop1_path = dir.join("loop1.json");
    std::fs::write(
        &loop1_path,
        serde_json::to_string_pretty(&MdpDocument::from_mdp(&loop1)).unwrap(),
    )
    .unwrap();
    let policy = Policy::from_indices(&loop1, vec![0]).unwrap();
    let policy_path = dir.join("loop1_policy.json");
    std::fs::write(
        &policy_path,
        serde_json::to_string(&policy_to_document(&loop1, &policy)).unwrap(),
    )
    .unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_fmdp"))
        .args([
            "eval",
            loop1_path.to_str().unwrap(),
            policy_path.to_str().unwrap(),
            "--check",
            "--json",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "eval failed: {output:?}");
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let value = report["values"]["s0"].as_f64().unwrap();
    assert!((value - geometric).abs() <= 1e-8);

    conclude("named examples end-to-end", start, Duration::from_secs(1));
}
