//! End-to-end acceptance checks, one test per criterion:
//!
//! 1. the worked example's candidate scores and quality-matched selection,
//! 2. augmentation fidelity against its baselines at corpus scale,
//! 3. regret ordering and sublinearity of the learning policies,
//! 4. the agreement gate's control over expert usage,
//! 5. the quality ranking of the reward schemes,
//! 6. metric kernels against direct reference formulas,
//! 7. soundness of the majority-vote success bound,
//! 8. optimality of the separable super-arm selection, and
//! 9. byte-level determinism of the command-line interface.
//!
//! Each test prints a single `PASS:` line on success; tolerances and runtime
//! budgets are pinned inline.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crowdsel_core::{
    augment_corpus, cucb_index, fleiss_kappa, generate_corpus, p_mv_lower_bound, select_annotation,
    select_cucb, select_epsilon_greedy, ses_candidates, simulate_feedback, span_exact_prf,
    span_prop_prf, CandidateAnnotation, FillStrategy, LabelId, MetricKind, PolicyConfig,
    PolicyKind, RewardMetric, Span, SpanCandidate, SyntheticSpec, Tag, TagSet, WorkerFidelity,
    WorkerId, WorkerProfile, WorkerState, WorkerTarget,
};

// ---------------------------------------------------------------------------
// 1. Worked example: single-span edit scores and quality-matched selection.
// ---------------------------------------------------------------------------

/// The candidate in `list` whose edited span is `[start, end)`.
fn candidate_with(list: &[SpanCandidate], start: usize, end: usize) -> &SpanCandidate {
    list.iter()
        .find(|c| c.span.is_some_and(|s| s.start == start && s.end == end))
        .unwrap_or_else(|| panic!("no candidate covering [{start}, {end})"))
}

#[test]
fn c1_span_edit_candidates_reproduce_worked_example_scores() {
    let started = Instant::now();

    // A 16-token sentence with a 2-token NEG span at [3, 5) and a 3-token
    // POS span at [11, 14).
    let neg = LabelId(0);
    let pos = LabelId(1);
    let gold = [Span::new(neg, 3, 5), Span::new(pos, 11, 14)];
    let lists = ses_candidates(&gold, 16);
    assert_eq!(lists.len(), 2, "one candidate list per expert span");

    // The unmodified span leads each list.
    assert_eq!(lists[0][0].span, Some(gold[0]));
    assert!(lists[0][0].modification.is_none());
    assert_eq!(lists[1][0].span, Some(gold[1]));

    // Per-span proportional F1 of an edited span against its source span.
    let single_score = |list: usize, start: usize, end: usize| -> f64 {
        let cand = candidate_with(&lists[list], start, end);
        let pred = [cand.span.expect("edited span present")];
        span_prop_prf(&pred, &gold[list..=list]).f1
    };

    // Shifts of the 2-token span: one step halves the overlap, two steps
    // clear it. Shifts of the 3-token span lose a third per step.
    let cases = [
        (single_score(0, 3, 5), 1.0),
        (single_score(0, 4, 6), 0.5),
        (single_score(0, 5, 7), 0.0),
        (single_score(1, 12, 15), 2.0 / 3.0),
        (single_score(1, 13, 16), 1.0 / 3.0),
    ];
    for (got, want) in cases {
        assert!(
            (got - want).abs() < 1e-9,
            "single-span score {got} differs from {want}"
        );
    }

    // A full annotation combining the one-step shift with the untouched
    // second span scores 0.75 against the complete truth.
    let combined = [Span::new(neg, 4, 6), Span::new(pos, 11, 14)];
    let f1 = span_prop_prf(&combined, &gold).f1;
    assert!((f1 - 0.75).abs() < 1e-9, "combined score {f1} != 0.75");

    // Quality-matched selection: a worker averaging 0.57 whose generated
    // annotations so far average 0.54 takes the nearest candidate from
    // above, 0.58.
    let pool: Vec<CandidateAnnotation> = [0.30, 0.52, 0.58, 0.90]
        .into_iter()
        .map(|f1| CandidateAnnotation {
            tags: vec![Tag::O],
            f1,
        })
        .collect();
    let mut target = WorkerTarget {
        worker_id: WorkerId(0),
        phi_bar: 0.57,
        phi_hat: 0.54,
        n_selected: 1,
    };
    let chosen = select_annotation(&mut target, &pool).expect("pool is non-empty");
    assert!(
        (chosen.f1 - 0.58).abs() < 1e-12,
        "selected {} instead of 0.58",
        chosen.f1
    );

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("PASS: worked-example candidate scores and selection ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// 2. Augmentation fidelity at corpus scale.
// ---------------------------------------------------------------------------

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[test]
fn c2_targeted_fill_holds_worker_means_where_baselines_drift() {
    let started = Instant::now();

    let spec = SyntheticSpec {
        n_sentences: 200,
        n_workers: 30,
        len_range: (8, 16),
        spans_range: (1, 3),
        quality_range: (0.2, 0.9),
        labels: vec!["NEG".into(), "POS".into()],
        seed: 41,
    };
    let corpus = generate_corpus(&spec).expect("spec is feasible");

    let drift = |strategy: FillStrategy| -> Vec<f64> {
        let result = augment_corpus(&corpus, MetricKind::SpanProp, 1000, 41, strategy)
            .expect("every worker has annotations");
        result
            .fidelity
            .iter()
            .map(WorkerFidelity::abs_delta)
            .collect()
    };

    let targeted = drift(FillStrategy::Targeted);
    let worst = targeted.iter().fold(0.0_f64, |a, &b| a.max(b));
    assert!(
        worst <= 0.01,
        "targeted fill drifted a worker's mean F1 by {worst}"
    );
    assert!(
        mean(&targeted) <= 0.005,
        "targeted fill drifted mean F1 by {} on average",
        mean(&targeted)
    );

    for (name, strategy) in [
        ("random", FillStrategy::Random),
        ("ses-only", FillStrategy::SesOnly),
    ] {
        let avg = mean(&drift(strategy));
        assert!(
            avg > 0.05,
            "{name} baseline drifted only {avg}; expected > 0.05"
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("PASS: targeted fill preserves worker means, baselines drift ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// 3. Regret ordering and sublinearity.
// ---------------------------------------------------------------------------

/// Workers with independent expected scores uniform in `[lo, hi]`.
fn uniform_profiles(n: u32, lo: f64, hi: f64, seed: u64) -> Vec<WorkerProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|id| {
            let phi_exp = lo + (hi - lo) * rng.random::<f64>();
            WorkerProfile {
                worker_id: WorkerId(id),
                phi_exp,
                phi_mv: phi_exp,
            }
        })
        .collect()
}

fn feedback_config(policy: PolicyKind, reward: RewardMetric, tau: f64, seed: u64) -> PolicyConfig {
    PolicyConfig {
        policy,
        epsilon: 0.5,
        epsilon_decay: true,
        superarm_size: 20,
        k_per_sentence: 10,
        tau,
        reward_metric: reward,
        metric_kind: MetricKind::SpanProp,
        seed,
    }
}

#[test]
fn c3_learning_policies_dominate_random_selection() {
    let started = Instant::now();
    const SEEDS: u64 = 10;
    const HORIZON: u64 = 3000;
    const EARLY: usize = 300;

    let policies = [
        ("oracle", PolicyKind::Oracle),
        ("cucb", PolicyKind::Cucb),
        ("eps-greedy", PolicyKind::EpsilonGreedy),
        ("random", PolicyKind::Random),
    ];
    // name -> (sum of R(300), sum of R(3000)) over seeds
    let mut totals: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for sd in 0..SEEDS {
        let profiles = uniform_profiles(50, 0.3, 0.9, 1000 + sd);
        for (name, policy) in policies {
            let config = feedback_config(policy, RewardMetric::Exp, 0.4, sd);
            let report = simulate_feedback(&profiles, &config, HORIZON).expect("valid profiles");
            assert_eq!(report.regret_curve.len(), HORIZON as usize);
            if policy == PolicyKind::Oracle {
                assert!(
                    report.regret_curve.iter().all(|&r| r == 0.0),
                    "oracle accrued regret"
                );
            }
            let entry = totals.entry(name).or_insert((0.0, 0.0));
            entry.0 += report.regret_curve[EARLY - 1];
            entry.1 += report.regret_curve[HORIZON as usize - 1];
        }
    }

    let averaged = |name: &str| -> (f64, f64) {
        let (early, late) = totals[name];
        (early / SEEDS as f64, late / SEEDS as f64)
    };
    let (_, oracle) = averaged("oracle");
    let (cucb_early, cucb) = averaged("cucb");
    let (eps_early, eps) = averaged("eps-greedy");
    let (random_early, random) = averaged("random");

    assert_eq!(oracle, 0.0, "oracle regret must be exactly zero");
    assert!(
        random >= 2.0 * cucb,
        "random regret {random} is not twice cucb regret {cucb}"
    );
    assert!(
        random >= 2.0 * eps,
        "random regret {random} is not twice eps-greedy regret {eps}"
    );

    // Sublinear growth: the per-round regret rate must at least halve
    // between round 300 and round 3000 for the learners, and must not for
    // uniform random selection.
    let rate = |at_early: f64, at_late: f64| -> (f64, f64) {
        (at_early / EARLY as f64, at_late / HORIZON as f64)
    };
    for (name, early, late) in [("cucb", cucb_early, cucb), ("eps-greedy", eps_early, eps)] {
        let (r_early, r_late) = rate(early, late);
        assert!(
            r_late <= 0.5 * r_early,
            "{name} regret rate {r_late} did not halve from {r_early}"
        );
    }
    let (r_early, r_late) = rate(random_early, random);
    assert!(
        r_late > 0.5 * r_early,
        "random regret rate unexpectedly halved: {r_late} vs {r_early}"
    );

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "PASS: regret oracle=0, cucb={cucb:.1}, eps-greedy={eps:.1}, random={random:.1} ({elapsed:?})"
    );
}

// ---------------------------------------------------------------------------
// 4. The agreement gate dials expert usage.
// ---------------------------------------------------------------------------

#[test]
fn c4_agreement_threshold_dials_expert_usage() {
    let started = Instant::now();
    const SEEDS: u64 = 5;
    const HORIZON: u64 = 3000;

    // Agreeing with the vote is slightly easier to miss than satisfying the
    // expert.
    let profiles: Vec<WorkerProfile> = uniform_profiles(50, 0.3, 0.9, 4242)
        .into_iter()
        .map(|p| WorkerProfile {
            phi_mv: (p.phi_exp - 0.1).clamp(0.0, 1.0),
            ..p
        })
        .collect();

    let averaged = |reward: RewardMetric, tau: f64| -> (f64, f64, f64) {
        let (mut usage, mut reward_sum, mut f1) = (0.0, 0.0, 0.0);
        for sd in 0..SEEDS {
            let config = feedback_config(PolicyKind::Cucb, reward, tau, 100 + sd);
            let report = simulate_feedback(&profiles, &config, HORIZON).expect("valid profiles");
            usage += report.expert_usage;
            reward_sum += report.mean_reward;
            f1 += report.final_f1;
        }
        let n = SEEDS as f64;
        (usage / n, reward_sum / n, f1 / n)
    };

    let sweep: Vec<(f64, f64, f64, f64)> = (0..=20)
        .map(|i| {
            let tau = f64::from(i) * 0.05;
            let (usage, reward, f1) = averaged(RewardMetric::ExpMv, tau);
            (tau, usage, reward, f1)
        })
        .collect();

    for &(tau, usage, _, _) in &sweep {
        assert!(
            (usage - tau).abs() <= 0.02,
            "expert usage {usage} strays from threshold {tau}"
        );
    }
    for pair in sweep.windows(2) {
        let (_, usage_lo, reward_lo, _) = pair[0];
        let (tau, usage_hi, reward_hi, _) = pair[1];
        assert!(
            usage_hi >= usage_lo - 0.02,
            "expert usage fell from {usage_lo} to {usage_hi} at threshold {tau}"
        );
        assert!(
            reward_hi >= reward_lo - 0.01,
            "mean reward fell from {reward_lo} to {reward_hi} at threshold {tau}"
        );
    }

    // A fully closed gate (threshold 1) is the pure expert-scored run.
    let (_, _, _, f1_gated) = sweep[20];
    let (_, _, f1_expert) = averaged(RewardMetric::Exp, 1.0);
    assert!(
        (f1_gated - f1_expert).abs() <= 0.005,
        "closed gate f1 {f1_gated} differs from expert-only f1 {f1_expert}"
    );

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(180), "took {elapsed:?}");
    println!("PASS: expert usage tracks the agreement threshold across the sweep ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// 5. Reward schemes preserve the quality ranking.
// ---------------------------------------------------------------------------

#[test]
fn c5_reward_schemes_preserve_quality_ranking() {
    const SEEDS: u64 = 10;
    const HORIZON: u64 = 3000;

    let mut wins = 0;
    for sd in 0..SEEDS {
        // Heterogeneous workers: vote agreement is correlated with expert
        // quality but noisy, so vote-based feedback is informative yet
        // degraded.
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + sd);
        let profiles: Vec<WorkerProfile> = (0..50)
            .map(|id| {
                let phi_exp = 0.3 + 0.6 * rng.random::<f64>();
                let noise = 0.1 + 0.6 * rng.random::<f64>();
                WorkerProfile {
                    worker_id: WorkerId(id),
                    phi_exp,
                    phi_mv: (0.5 * phi_exp + 0.5 * noise).clamp(0.02, 0.98),
                }
            })
            .collect();

        let final_f1 = |policy: PolicyKind, reward: RewardMetric| -> f64 {
            let config = feedback_config(policy, reward, 0.5, sd);
            simulate_feedback(&profiles, &config, HORIZON)
                .expect("valid profiles")
                .final_f1
        };

        let oracle = final_f1(PolicyKind::Oracle, RewardMetric::Exp);
        let expert = final_f1(PolicyKind::Cucb, RewardMetric::Exp);
        let gated = final_f1(PolicyKind::Cucb, RewardMetric::ExpMv);
        let vote = final_f1(PolicyKind::Cucb, RewardMetric::Mv);
        let random = final_f1(PolicyKind::Random, RewardMetric::Exp);

        if oracle > expert && expert >= gated && gated >= vote && vote > random {
            wins += 1;
        } else {
            println!(
                "seed {sd}: oracle={oracle:.4} expert={expert:.4} gated={gated:.4} \
                 vote={vote:.4} random={random:.4}"
            );
        }
    }
    assert!(
        wins >= 8,
        "quality ranking held in only {wins} of {SEEDS} seeds"
    );
    println!("PASS: reward-scheme quality ranking held in {wins}/{SEEDS} seeds");
}

// ---------------------------------------------------------------------------
// 6. Metric kernels against direct reference formulas.
// ---------------------------------------------------------------------------

/// F1 from precision and recall, zero when both vanish.
fn f1_of(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Reference exact-match span score: a predicted span counts only when the
/// truth contains the identical (label, start, end) triple.
fn reference_exact(pred: &[Span], gold: &[Span]) -> (f64, f64, f64) {
    let hits = pred.iter().filter(|p| gold.contains(p)).count() as f64;
    let p = if pred.is_empty() {
        0.0
    } else {
        hits / pred.len() as f64
    };
    let r = if gold.is_empty() {
        0.0
    } else {
        hits / gold.len() as f64
    };
    (p, r, f1_of(p, r))
}

/// Token-overlap fraction of `a` covered by `b`, counted position by
/// position.
fn overlap_fraction(a: Span, b: Span) -> f64 {
    let shared = (a.start..a.end)
        .filter(|&t| t >= b.start && t < b.end)
        .count();
    shared as f64 / (a.end - a.start) as f64
}

/// Reference proportional span score: every span earns its best same-label
/// overlap fraction on the other side.
fn reference_prop(pred: &[Span], gold: &[Span]) -> (f64, f64, f64) {
    let side = |spans: &[Span], against: &[Span]| -> f64 {
        if spans.is_empty() {
            return 0.0;
        }
        let credit: f64 = spans
            .iter()
            .map(|s| {
                against
                    .iter()
                    .filter(|g| g.label == s.label)
                    .map(|g| overlap_fraction(*s, *g))
                    .fold(0.0, f64::max)
            })
            .sum();
        credit / spans.len() as f64
    };
    let p = side(pred, gold);
    let r = side(gold, pred);
    (p, r, f1_of(p, r))
}

/// Sorted, disjoint spans over `len` tokens with labels below `n_labels`.
fn random_spans(rng: &mut ChaCha8Rng, len: usize, n_labels: u16) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut cursor = 0usize;
    while cursor < len {
        if rng.random::<f64>() < 0.35 {
            break;
        }
        let start = cursor + rng.random_range(0..=2);
        let width = rng.random_range(1..=3);
        if start + width > len {
            break;
        }
        spans.push(Span::new(
            LabelId(rng.random_range(0..n_labels)),
            start,
            start + width,
        ));
        cursor = start + width + 1;
    }
    spans
}

/// Fleiss' agreement statistic computed with the dense item-by-category
/// count matrix, or `None` when expected agreement leaves no headroom.
fn reference_kappa(rows: &[Vec<Tag>], tag_set: &TagSet) -> Option<f64> {
    let k = rows.len() as f64;
    let n_items = rows[0].len();
    let mut counts = vec![vec![0.0_f64; tag_set.vocab_size()]; n_items];
    for row in rows {
        for (item, &tag) in row.iter().enumerate() {
            counts[item][tag_set.vocab_index(tag)] += 1.0;
        }
    }
    let p_bar = counts
        .iter()
        .map(|row| {
            let agree: f64 = row.iter().map(|&c| c * (c - 1.0)).sum();
            agree / (k * (k - 1.0))
        })
        .sum::<f64>()
        / n_items as f64;
    let p_e = (0..tag_set.vocab_size())
        .map(|j| {
            let share = counts.iter().map(|row| row[j]).sum::<f64>() / (k * n_items as f64);
            share * share
        })
        .sum::<f64>();
    if 1.0 - p_e < 1e-6 {
        return None;
    }
    Some((p_bar - p_e) / (1.0 - p_e))
}

#[test]
fn c6_span_scores_and_agreement_match_reference_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    for case in 0..1000 {
        let len = rng.random_range(4..=24);
        let pred = random_spans(&mut rng, len, 3);
        let gold = random_spans(&mut rng, len, 3);

        let got = span_exact_prf(&pred, &gold);
        let (p, r, f1) = reference_exact(&pred, &gold);
        assert!(
            (got.precision - p).abs() < 1e-9
                && (got.recall - r).abs() < 1e-9
                && (got.f1 - f1).abs() < 1e-9,
            "exact-match score diverged on case {case}: {got:?} vs ({p}, {r}, {f1})"
        );

        let got = span_prop_prf(&pred, &gold);
        let (p, r, f1) = reference_prop(&pred, &gold);
        assert!(
            (got.precision - p).abs() < 1e-9
                && (got.recall - r).abs() < 1e-9
                && (got.f1 - f1).abs() < 1e-9,
            "proportional score diverged on case {case}: {got:?} vs ({p}, {r}, {f1})"
        );
    }

    let tag_set = TagSet::new(["A", "B"]).expect("two plain labels");
    let mut checked = 0;
    while checked < 200 {
        let annotators = rng.random_range(2..=7);
        let len = rng.random_range(1..=25);
        let rows: Vec<Vec<Tag>> = (0..annotators)
            .map(|_| {
                (0..len)
                    .map(|_| tag_set.tag_at(rng.random_range(0..tag_set.vocab_size())))
                    .collect()
            })
            .collect();
        let Some(want) = reference_kappa(&rows, &tag_set) else {
            continue;
        };
        let row_refs: Vec<&[Tag]> = rows.iter().map(Vec::as_slice).collect();
        let got = fleiss_kappa(&row_refs, &tag_set).expect("at least two annotators");
        assert!(
            (got - want).abs() < 1e-9,
            "agreement diverged: {got} vs reference {want}"
        );
        checked += 1;
    }

    println!("PASS: span scores (1000 cases) and agreement (200 cases) match references");
}

// ---------------------------------------------------------------------------
// 7. The majority-vote success bound is conservative and monotone.
// ---------------------------------------------------------------------------

fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact probability that more than half of `n` independent voters, each
/// correct with probability `p`, are correct.
fn exact_majority(n: usize, p: f64) -> f64 {
    (n / 2 + 1..=n)
        .map(|j| choose(n, j) * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32))
        .sum()
}

#[test]
fn c7_vote_success_bound_is_conservative_and_monotone() {
    let sizes: Vec<usize> = (3..=12).collect();
    let capabilities: Vec<f64> = (0..9).map(|i| 0.55 + 0.05 * f64::from(i)).collect();

    let mut bounds = vec![vec![0.0; capabilities.len()]; sizes.len()];
    for (ni, &n) in sizes.iter().enumerate() {
        for (pi, &p) in capabilities.iter().enumerate() {
            let bound = p_mv_lower_bound(&vec![p; n]).expect("mean above one half");
            let exact = exact_majority(n, p);
            assert!(
                bound <= exact + 1e-12,
                "bound {bound} exceeds exact majority probability {exact} at n={n}, p={p}"
            );
            bounds[ni][pi] = bound;
        }
    }

    for ni in 0..sizes.len() {
        for pi in 0..capabilities.len() {
            if ni + 1 < sizes.len() {
                assert!(
                    bounds[ni + 1][pi] > bounds[ni][pi],
                    "bound not increasing in group size at n={}, p={}",
                    sizes[ni],
                    capabilities[pi]
                );
            }
            if pi + 1 < capabilities.len() {
                assert!(
                    bounds[ni][pi + 1] > bounds[ni][pi],
                    "bound not increasing in capability at n={}, p={}",
                    sizes[ni],
                    capabilities[pi]
                );
            }
        }
    }
    println!("PASS: vote success bound is conservative and monotone across the grid");
}

// ---------------------------------------------------------------------------
// 8. Separable super-arm selection is exhaustive-search optimal.
// ---------------------------------------------------------------------------

#[test]
fn c8_superarm_selection_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    for case in 0..100 {
        let n = rng.random_range(2..=10usize);
        let m = rng.random_range(1..=5.min(n));
        let states: Vec<WorkerState> = (0..n)
            .map(|i| WorkerState {
                worker_id: WorkerId(i as u32),
                mu_bar: rng.random(),
                t_count: rng.random_range(1..=60),
            })
            .collect();
        let t = states.iter().map(|s| s.t_count).sum::<u64>();

        let best_sum = |score: &dyn Fn(&WorkerState) -> f64| -> f64 {
            (0..n)
                .combinations(m)
                .map(|subset| subset.iter().map(|&i| score(&states[i])).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let picked_sum = |picked: &[usize], score: &dyn Fn(&WorkerState) -> f64| -> f64 {
            assert_eq!(picked.len(), m, "case {case} picked a wrong-size set");
            assert!(
                picked.iter().all_unique(),
                "case {case} picked a duplicate arm"
            );
            picked.iter().map(|&i| score(&states[i])).sum()
        };

        let ln_t = (t as f64).ln();
        let index = |s: &WorkerState| cucb_index(s.mu_bar, s.t_count, ln_t);
        let got = picked_sum(&select_cucb(&states, m, t), &index);
        let want = best_sum(&index);
        assert!(
            (got - want).abs() < 1e-12,
            "case {case}: confidence-index selection summed {got}, exhaustive best {want}"
        );

        let empirical = |s: &WorkerState| s.mu_bar;
        let got = picked_sum(
            &select_epsilon_greedy(&states, m, 0.0, &mut rng),
            &empirical,
        );
        let want = best_sum(&empirical);
        assert!(
            (got - want).abs() < 1e-12,
            "case {case}: exploit selection summed {got}, exhaustive best {want}"
        );
    }
    println!("PASS: super-arm selection matches exhaustive search on 100 cases");
}

// ---------------------------------------------------------------------------
// 9. The command line is byte-for-byte deterministic.
// ---------------------------------------------------------------------------

/// Runs the binary in `dir`, asserting success, and returns captured stdout.
fn run_cli(dir: &Path, args: &[&str]) -> Vec<u8> {
    let output = Command::new(env!("CARGO_BIN_EXE_crowdsel"))
        .args(args)
        .current_dir(dir)
        .env("CROWDSEL_THREADS", "2")
        .output()
        .expect("binary launches");
    assert!(
        output.status.success(),
        "`crowdsel {}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&output.stderr)
    );
    output.stdout
}

/// Runs a command twice and asserts stdout and every named output file come
/// back byte-identical.
fn assert_rerun_identical(dir: &Path, args: &[&str], files: &[&str]) {
    let first_stdout = run_cli(dir, args);
    let first_files: Vec<Vec<u8>> = files
        .iter()
        .map(|f| std::fs::read(dir.join(f)).expect("first run wrote the file"))
        .collect();
    let second_stdout = run_cli(dir, args);
    assert_eq!(
        first_stdout,
        second_stdout,
        "stdout of `crowdsel {}` changed between runs",
        args.join(" ")
    );
    for (name, first) in files.iter().zip(first_files) {
        let second = std::fs::read(dir.join(name)).expect("second run wrote the file");
        assert_eq!(
            first,
            second,
            "{name} changed between identical runs of `crowdsel {}`",
            args.join(" ")
        );
    }
}

#[test]
fn c9_identical_invocations_produce_identical_bytes() {
    let dir = tempfile::tempdir().expect("temp dir");
    let dir = dir.path();

    std::fs::write(
        dir.join("profiles.csv"),
        "worker_id,phi_exp,phi_mv\n\
         0,0.85,0.75\n1,0.65,0.60\n2,0.45,0.50\n3,0.75,0.65\n4,0.55,0.40\n5,0.35,0.30\n",
    )
    .expect("profile table written");

    assert_rerun_identical(
        dir,
        &[
            "generate",
            "--sentences",
            "60",
            "--workers",
            "12",
            "--seed",
            "9",
            "--out",
            "corpus.txt",
        ],
        &["corpus.txt"],
    );
    assert_rerun_identical(dir, &["stats", "corpus.txt"], &[]);
    assert_rerun_identical(
        dir,
        &["augment", "corpus.txt", "full.txt", "--seed", "9"],
        &["full.txt", "full.txt.fidelity.csv"],
    );
    assert_rerun_identical(
        dir,
        &["aggregate", "full.txt", "--out", "voted.txt"],
        &["voted.txt"],
    );
    assert_rerun_identical(
        dir,
        &["score", "voted.txt", "corpus.txt", "--metric", "prop"],
        &[],
    );
    assert_rerun_identical(
        dir,
        &[
            "simulate",
            "full.txt",
            "--superarm",
            "4",
            "--k",
            "2",
            "--seed",
            "9",
            "--out",
            "run.csv",
        ],
        &["run.csv"],
    );
    assert_rerun_identical(
        dir,
        &[
            "simulate-bernoulli",
            "--profiles",
            "profiles.csv",
            "--superarm",
            "4",
            "--k",
            "2",
            "--horizon",
            "200",
            "--seed",
            "9",
            "--out",
            "bern.csv",
        ],
        &["bern.csv"],
    );
    assert_rerun_identical(
        dir,
        &[
            "sweep-tau",
            "--profiles",
            "profiles.csv",
            "--superarm",
            "4",
            "--k",
            "2",
            "--horizon",
            "100",
            "--step",
            "0.25",
            "--seeds",
            "2",
            "--seed",
            "9",
            "--out",
            "sweep.csv",
        ],
        &["sweep.csv"],
    );
    println!("PASS: all eight subcommands rerun byte-identically");
}
