//! A Bernoulli abstraction of the selection loop for fast policy studies.
//!
//! Instead of scoring real annotations, each worker is a pair of success
//! probabilities: `phi_exp` when the expert scores them, `phi_mv` when the
//! group's majority vote does. Rewards are coin flips with the branch's
//! probability, and the agreement gate is abstracted to a uniform draw, so
//! a threshold of `tau` consults the expert on a `tau` fraction of
//! sentences in expectation.
//!
//! The random stream is aligned across reward schemes: every slot draws its
//! gate value and every group member draws one reward uniform, whether or
//! not the branch decision needed them. Runs that differ only in the reward
//! scheme therefore see identical randomness, so `tau = 1` reproduces the
//! expert-only scheme and `tau = -inf` the vote-only scheme draw for draw.

use serde::{Deserialize, Serialize};

use crate::corpus::{SentenceId, WorkerId};

use super::sim::{
    select, RoundOutcome, RunAccumulator, SentenceRecord, SimError, SimulationReport,
};
use super::{PolicyConfig, RewardMetric, WorkerState};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One simulated worker: success probabilities under each evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkerProfile {
    /// The worker's identity.
    pub worker_id: WorkerId,
    /// Probability of a correct annotation when the expert evaluates.
    pub phi_exp: f64,
    /// Probability of agreeing with the majority vote when it evaluates.
    pub phi_mv: f64,
}

/// Runs the selection loop over Bernoulli workers for `horizon` rounds.
///
/// Sentences are unlimited; records number them by a running slot ordinal.
/// True means are the expert-branch probabilities, and the per-annotation
/// expert F1 is logged as its expectation `phi_exp` rather than a draw. All
/// randomness derives from `config.seed`.
pub fn simulate_feedback(
    profiles: &[WorkerProfile],
    config: &PolicyConfig,
    horizon: u64,
) -> Result<SimulationReport, SimError> {
    if profiles.is_empty() {
        return Err(SimError::NoProfiles);
    }
    let mut profiles: Vec<WorkerProfile> = profiles.to_vec();
    profiles.sort_by_key(|p| p.worker_id);
    for pair in profiles.windows(2) {
        if pair[0].worker_id == pair[1].worker_id {
            return Err(SimError::DuplicateProfile(pair[0].worker_id));
        }
    }
    for profile in &profiles {
        for value in [profile.phi_exp, profile.phi_mv] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimError::BadProfile {
                    worker: profile.worker_id,
                    value,
                });
            }
        }
    }
    config.validate(profiles.len())?;

    let workers: Vec<WorkerId> = profiles.iter().map(|p| p.worker_id).collect();
    let true_means: Vec<f64> = profiles.iter().map(|p| p.phi_exp).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut acc = RunAccumulator::new(&true_means, config.superarm_size);

    // Warm-up: one expert-scored flip per worker.
    let mut states: Vec<WorkerState> = profiles
        .iter()
        .map(|p| {
            let reward = f64::from(rng.random::<f64>() < p.phi_exp);
            WorkerState::new(p.worker_id, reward)
        })
        .collect();
    acc.note_warmup(workers.len() as u64);
    let mut t = workers.len() as u64;

    let groups = config.superarm_size / config.k_per_sentence;
    let mut outcomes: Vec<RoundOutcome> = Vec::with_capacity(horizon as usize);
    let mut slot_counter = 0u32;

    for round in 1..=horizon {
        t += 1;
        let selected = select(config, &states, &true_means, t, round, &mut rng);

        let mut records = Vec::with_capacity(groups);
        for chunk in selected.chunks(config.k_per_sentence).take(groups) {
            // The gate draw happens on every slot so that reward schemes
            // share one random stream.
            let gate = rng.random::<f64>();
            let expert_consulted = match config.reward_metric {
                RewardMetric::Exp => true,
                RewardMetric::Mv => false,
                RewardMetric::ExpMv => gate <= config.tau,
            };

            let mut rewards = Vec::with_capacity(chunk.len());
            let mut f1_exp = Vec::with_capacity(chunk.len());
            for &state_idx in chunk {
                let profile = &profiles[state_idx];
                let p = if expert_consulted {
                    profile.phi_exp
                } else {
                    profile.phi_mv
                };
                let reward = f64::from(rng.random::<f64>() < p);
                states[state_idx].record(reward);
                rewards.push(reward);
                f1_exp.push(profile.phi_exp);
            }

            acc.note_sentence(expert_consulted, &rewards, &f1_exp);
            records.push(SentenceRecord {
                sentence_id: SentenceId(slot_counter),
                workers: chunk.iter().map(|&i| workers[i]).collect(),
                kappa: Some(gate),
                expert_consulted,
                rewards,
                f1_exp,
            });
            slot_counter += 1;
        }

        let selected_mean_sum: f64 = selected.iter().map(|&i| true_means[i]).sum();
        acc.end_round(selected_mean_sum);
        outcomes.push(RoundOutcome {
            t,
            selected: selected.iter().map(|&i| workers[i]).collect(),
            sentences: records,
        });
    }

    Ok(SimulationReport {
        config: config.clone(),
        worker_ids: workers,
        true_means,
        worker_states: states,
        final_f1: acc.mean_f1(),
        expert_usage: acc.expert_usage(),
        mean_reward: acc.mean_reward(),
        regret_curve: acc.regret_curve,
        f1_curve: acc.f1_curve,
        expert_usage_curve: acc.usage_curve,
        outcomes,
        produced_prf: None,
    })
}
