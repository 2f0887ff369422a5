//! Super-arm selection rules.
//!
//! Every rule returns the indices (into the caller's worker ordering) of the
//! `m` selected workers, ranked: the first index is the most preferred arm.
//! Downstream, the ranked list is split into consecutive groups of `K`, so
//! rank order determines which workers annotate a sentence together.
//!
//! Ties in any score break toward the lower index, which keeps selection a
//! pure function of the scores.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::WorkerState;

/// Indices of the `m` largest scores, ranked descending, ties toward the
/// lower index.
fn top_m(scores: &[f64], m: usize) -> Vec<usize> {
    debug_assert!(m <= scores.len());
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("selection scores are never NaN")
            .then(a.cmp(&b))
    });
    order.truncate(m);
    order
}

/// Epsilon-greedy: with probability `epsilon` a uniform random super-arm
/// (exploration), otherwise the top `m` arms by empirical mean
/// (exploitation). One coin decides for the whole super-arm.
pub fn select_epsilon_greedy(
    states: &[WorkerState],
    m: usize,
    epsilon: f64,
    rng: &mut impl Rng,
) -> Vec<usize> {
    if rng.random::<f64>() < epsilon {
        select_random(states.len(), m, rng)
    } else {
        let scores: Vec<f64> = states.iter().map(|s| s.mu_bar).collect();
        top_m(&scores, m)
    }
}

/// The upper-confidence index of one arm: the empirical mean plus an
/// exploration bonus that grows with the global round count `t` and shrinks
/// with the arm's own observation count,
/// `mu_bar + sqrt(3 ln(t) / (2 T_j))`.
///
/// `ln_t` is the precomputed `ln(t)` so a whole round shares one logarithm.
#[must_use]
pub fn cucb_index(mu_bar: f64, t_count: u64, ln_t: f64) -> f64 {
    mu_bar + (3.0 * ln_t / (2.0 * t_count as f64)).sqrt()
}

/// Combinatorial UCB: the top `m` arms by [`cucb_index`] at round `t`.
///
/// Because the index is separable — the super-arm's value is the sum of its
/// arms' indices — taking the top `m` maximizes the summed index over all
/// m-subsets.
pub fn select_cucb(states: &[WorkerState], m: usize, t: u64) -> Vec<usize> {
    debug_assert!(t >= 1, "round counter starts at 1");
    let ln_t = (t as f64).ln();
    let scores: Vec<f64> = states
        .iter()
        .map(|s| cucb_index(s.mu_bar, s.t_count, ln_t))
        .collect();
    top_m(&scores, m)
}

/// Thompson sampling with a normal surrogate posterior per arm: draw
/// `theta_j ~ Normal(mu_bar_j, 1 / (T_j + prior_strength))` clamped to
/// `[0, 1]`, and take the top `m` draws. The variance shrinks as an arm
/// accumulates observations, collapsing exploration onto the empirical
/// means.
pub fn select_thompson(
    states: &[WorkerState],
    m: usize,
    prior_strength: f64,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let scores: Vec<f64> = states
        .iter()
        .map(|s| {
            let sd = (1.0 / (s.t_count as f64 + prior_strength)).sqrt();
            let normal = Normal::new(s.mu_bar, sd).expect("finite mean and positive sd");
            normal.sample(rng).clamp(0.0, 1.0)
        })
        .collect();
    top_m(&scores, m)
}

/// A uniform random m-subset of the `n` workers (no learning signal used).
pub fn select_random(n: usize, m: usize, rng: &mut impl Rng) -> Vec<usize> {
    debug_assert!(m <= n);
    rand::seq::index::sample(rng, n, m).into_vec()
}

/// The oracle: top `m` workers by true mean reward. Only a simulation can
/// know the truth; this is the benchmark selection regret is measured
/// against.
pub fn select_oracle(true_means: &[f64], m: usize) -> Vec<usize> {
    top_m(true_means, m)
}
