//! Seeded random generation of valid models, stochastic matrices, and state
//! vectors, used by the invariant checks and the test suites.
//!
//! Generated distributions keep every support probability comfortably above
//! the support threshold, so path products over the depths the checks use
//! never dip into the noise band.

use rand::Rng;

use crate::linalg::{StateMatrix, StateVector};
use crate::mdp::{ActionPmf, Mdp};
use crate::oracle::{oracle_solve, OPT_TOL};

/// Shape of the random models produced by [`random_mdp`].
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub min_states: usize,
    pub max_states: usize,
    pub min_actions: usize,
    pub max_actions: usize,
    /// Largest support size per action (clamped to the state count).
    pub max_support: usize,
    /// Discount factors drawn uniformly from this list.
    pub gamma_choices: Vec<f64>,
    /// Rewards drawn uniformly from this range.
    pub reward_range: (f64, f64),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            min_states: 2,
            max_states: 5,
            min_actions: 1,
            max_actions: 3,
            max_support: 3,
            gamma_choices: vec![0.3, 0.5, 0.7, 0.9, 0.95],
            reward_range: (-2.0, 2.0),
        }
    }
}

/// Draws a valid model: every action's distribution is exactly normalized
/// with all support probabilities at least `0.2 / support_size`.
pub fn random_mdp(rng: &mut impl Rng, cfg: &GeneratorConfig) -> Mdp {
    let n = rng.gen_range(cfg.min_states..=cfg.max_states);
    let gamma = cfg.gamma_choices[rng.gen_range(0..cfg.gamma_choices.len())];
    let actions = (0..n)
        .map(|_| {
            let count = rng.gen_range(cfg.min_actions..=cfg.max_actions);
            (0..count)
                .map(|a| random_action(rng, format!("a{a}"), n, cfg))
                .collect()
        })
        .collect();
    Mdp::with_default_names(gamma, n, actions).expect("generated model is valid")
}

fn random_action(rng: &mut impl Rng, id: String, n: usize, cfg: &GeneratorConfig) -> ActionPmf {
    let support_size = rng.gen_range(1..=cfg.max_support.min(n));
    let mut successors: Vec<usize> = (0..n).collect();
    for i in 0..support_size {
        let j = rng.gen_range(i..n);
        successors.swap(i, j);
    }
    let successors = &successors[..support_size];

    // Weights bounded away from zero keep supports stable after normalizing.
    let weights: Vec<f64> = (0..support_size).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let (lo, hi) = cfg.reward_range;
    let triples: Vec<(usize, f64, f64)> = successors
        .iter()
        .zip(&weights)
        .map(|(&s, &w)| (s, w / total, rng.gen_range(lo..hi)))
        .collect();
    ActionPmf::from_triples(id, &triples)
}

/// Like [`random_mdp`], but re-rolls until no two policies have distinct
/// per-state values closer than `min_gap` (exact ties are allowed). Keeps
/// optimal-set membership well clear of solver noise. Requires enumerable
/// policy spaces.
pub fn random_separated_mdp(rng: &mut impl Rng, cfg: &GeneratorConfig, min_gap: f64) -> Mdp {
    loop {
        let mdp = random_mdp(rng, cfg);
        let oracle = match oracle_solve(&mdp, 100_000, false) {
            Ok(o) => o,
            Err(_) => continue,
        };
        let separated = (0..mdp.n_states()).all(|s| {
            let mut values: Vec<f64> = oracle
                .value_table
                .iter()
                .map(|v| v.as_slice()[s])
                .collect();
            values.sort_by(f64::total_cmp);
            values
                .windows(2)
                .all(|w| w[1] - w[0] <= OPT_TOL * 1e-2 || w[1] - w[0] >= min_gap)
        });
        if separated {
            return mdp;
        }
    }
}

/// Row-stochastic matrix with every entry at least `0.2 / n` before
/// normalization noise.
pub fn random_stochastic_matrix(rng: &mut impl Rng, n: usize) -> StateMatrix {
    let rows = (0..n)
        .map(|_| {
            let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
            let total: f64 = weights.iter().sum();
            weights.into_iter().map(|w| w / total).collect()
        })
        .collect();
    StateMatrix::from_rows(rows).expect("rows are square by construction")
}

/// Vector with entries drawn uniformly from `lo..hi`.
pub fn random_vector(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> StateVector {
    StateVector::from_vec((0..n).map(|_| rng.gen_range(lo..hi)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn generated_models_are_within_bounds() {
        let mut rng = StdRng::seed_from_u64(7);
        let cfg = GeneratorConfig::default();
        for _ in 0..50 {
            let mdp = random_mdp(&mut rng, &cfg);
            assert!((cfg.min_states..=cfg.max_states).contains(&mdp.n_states()));
            for s in mdp.states() {
                assert!((cfg.min_actions..=cfg.max_actions).contains(&mdp.actions(s).len()));
            }
        }
    }

    #[test]
    fn generated_matrices_are_stochastic() {
        let mut rng = StdRng::seed_from_u64(11);
        for n in 1..=6 {
            assert!(random_stochastic_matrix(&mut rng, n).is_stochastic());
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let cfg = GeneratorConfig::default();
        let a = random_mdp(&mut StdRng::seed_from_u64(42), &cfg);
        let b = random_mdp(&mut StdRng::seed_from_u64(42), &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn separated_models_have_gapped_policy_values() {
        let mut rng = StdRng::seed_from_u64(13);
        let cfg = GeneratorConfig {
            max_states: 3,
            ..GeneratorConfig::default()
        };
        let min_gap = 1e-6;
        let mdp = random_separated_mdp(&mut rng, &cfg, min_gap);
        let oracle = oracle_solve(&mdp, 100_000, false).unwrap();
        for s in 0..mdp.n_states() {
            let mut values: Vec<f64> = oracle
                .value_table
                .iter()
                .map(|v| v.as_slice()[s])
                .collect();
            values.sort_by(f64::total_cmp);
            for w in values.windows(2) {
                let gap = w[1] - w[0];
                assert!(gap <= OPT_TOL * 1e-2 || gap >= min_gap);
            }
        }
    }
}
