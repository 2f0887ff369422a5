//! Core library for bandit-driven worker selection in crowdsourced span labeling.
//!
//! The crate models a crowdsourcing campaign over a sentence corpus annotated
//! with IOB2 span tags. It provides, bottom to top:
//!
//! * [`corpus`] — the data model (tag sets, sentences, spans, corpora), a
//!   line-oriented text format with parser/serializer, and descriptive
//!   statistics.
//! * [`metrics`] — precision/recall/F1 at token, exact-span, and
//!   proportional-span granularity, plus Fleiss' kappa for inter-annotator
//!   agreement.
//! * [`aggregate`] — per-token majority voting with deterministic
//!   tie-breaking and IOB2 repair of voted sequences.
//! * [`augment`] — single-expert-shift candidate generation and
//!   quality-targeted selection used to fill in missing worker annotations
//!   while preserving each worker's observed mean F1.
//! * [`bandit`] — combinatorial multi-armed-bandit selection policies
//!   (epsilon-greedy, CUCB, Thompson sampling, random, oracle), reward
//!   functions with an agreement-gated expert/majority-vote hybrid, the
//!   simulation loop, a Bernoulli synthetic-feedback variant, and a
//!   Chernoff-style lower bound on majority-vote correctness.
//! * [`synth`] — synthetic corpus generation with per-worker quality targets.
//! * [`report`] — CSV emission for simulation, fidelity, sweep, and worker
//!   profile tables.
//!
//! All randomness flows from explicit `u64` seeds through counter-based
//! generators, so every public operation is reproducible bit-for-bit across
//! runs and thread counts.

pub mod aggregate;
pub mod augment;
pub mod bandit;
pub mod corpus;
pub mod metrics;
pub mod report;
pub mod synth;

pub use aggregate::{bio_repair, majority_vote, AggregateError, VoteResult};
pub use augment::{
    augment_corpus, enumerate_sentence_candidates, initial_annotation, select_annotation,
    ses_candidates, AugmentError, AugmentResult, CandidateAnnotation, Direction, FillStrategy,
    ModKind, Modification, SpanCandidate, WorkerFidelity, WorkerTarget,
};
pub use bandit::{
    cucb_index, p_mv_lower_bound, regret, reward_exp, reward_exp_mv, reward_mv, run_simulation,
    select_cucb, select_epsilon_greedy, select_oracle, select_random, select_thompson,
    simulate_feedback, BoundError, ConfigError, PolicyConfig, PolicyKind, ProducedPrf, RewardError,
    RewardMetric, RoundOutcome, SentenceRecord, SimError, SimulationReport, WorkerProfile,
    WorkerState,
};
pub use corpus::{
    compute_stats, infer_tag_set, parse_corpus, serialize_corpus, spans_of, tags_of, Corpus,
    CorpusStats, CountSummary, LabelId, ParseError, Sentence, SentenceId, Span, StatsError, Tag,
    TagSet, TagSetError, WorkerId,
};
pub use metrics::{
    annotation_f1, annotation_prf, fleiss_kappa, mean_prf, span_exact_prf, span_prop_prf,
    token_prf, MetricError, MetricKind, Prf,
};
pub use report::{
    read_profiles_csv, write_fidelity_csv, write_profiles_csv, write_simulation_csv,
    write_sweep_csv, ProfilesError, SweepRow,
};
pub use synth::{generate_corpus, SynthError, SyntheticSpec};
