//! A closed-form lower bound on majority-vote correctness.
//!
//! For `n` independent annotators whose mean per-item success probability
//! is `p > 1/2`, the probability that a majority of them is correct is at
//! least `1 - exp(-n (p - 1/2)^2)`. The bound is loose but monotone in both
//! arguments, which is what sizing a group needs: it answers "how many
//! annotators of this quality make the vote trustworthy".

use thiserror::Error;

/// Why a bound could not be computed.
#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    /// No success probabilities given.
    #[error("no success probabilities given")]
    Empty,
    /// A probability outside `[0, 1]`.
    #[error("success probability {0} is outside [0, 1]")]
    OutOfRange(f64),
    /// The bound only holds when the mean probability exceeds one half.
    #[error("mean success probability {0} is not above 1/2")]
    MeanNotAboveHalf(f64),
}

/// Lower-bounds the probability that the majority vote of independent
/// annotators with the given per-annotator success probabilities is
/// correct: `1 - exp(-n (mean - 1/2)^2)`.
pub fn p_mv_lower_bound(success_probs: &[f64]) -> Result<f64, BoundError> {
    if success_probs.is_empty() {
        return Err(BoundError::Empty);
    }
    if let Some(&bad) = success_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(BoundError::OutOfRange(bad));
    }
    let n = success_probs.len() as f64;
    let mean = success_probs.iter().sum::<f64>() / n;
    if mean <= 0.5 {
        return Err(BoundError::MeanNotAboveHalf(mean));
    }
    Ok(1.0 - (-n * (mean - 0.5).powi(2)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ten_annotators_at_point_eight() {
        // 1 - exp(-10 * 0.3^2) = 1 - exp(-0.9).
        let bound = p_mv_lower_bound(&[0.8; 10]).unwrap();
        assert_abs_diff_eq!(bound, 1.0 - (-0.9f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn bound_stays_below_the_exact_iid_majority_probability() {
        // Exact P(majority correct) for iid annotators via the binomial
        // tail; strict majority, ties counted as failure.
        let exact = |n: usize, p: f64| -> f64 {
            let choose = |n: u64, k: u64| -> f64 {
                (1..=k).map(|i| (n + 1 - i) as f64 / i as f64).product()
            };
            (0..=n)
                .filter(|&k| 2 * k > n)
                .map(|k| {
                    choose(n as u64, k as u64) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
                })
                .sum()
        };
        for n in [3, 5, 7, 9, 15, 25] {
            for p in [0.55, 0.6, 0.7, 0.8, 0.9, 0.95] {
                let bound = p_mv_lower_bound(&vec![p; n]).unwrap();
                let truth = exact(n, p);
                assert!(
                    bound <= truth + 1e-12,
                    "bound {bound} exceeds exact {truth} at n={n}, p={p}"
                );
            }
        }
    }

    #[test]
    fn bound_grows_with_group_size_and_quality() {
        let mut previous = 0.0;
        for n in 1..40 {
            let bound = p_mv_lower_bound(&vec![0.7; n]).unwrap();
            assert!(bound > previous);
            previous = bound;
        }
        let mut previous = 0.0;
        for step in 1..50 {
            let p = 0.5 + 0.01 * step as f64;
            let bound = p_mv_lower_bound(&[p.min(1.0); 9]).unwrap();
            assert!(bound > previous);
            previous = bound;
        }
    }

    #[test]
    fn mixed_probabilities_use_their_mean() {
        let mixed = p_mv_lower_bound(&[0.9, 0.7, 0.8]).unwrap();
        let flat = p_mv_lower_bound(&[0.8, 0.8, 0.8]).unwrap();
        assert_abs_diff_eq!(mixed, flat, epsilon = 1e-15);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert_eq!(p_mv_lower_bound(&[]).unwrap_err(), BoundError::Empty);
        assert_eq!(
            p_mv_lower_bound(&[0.9, 1.1]).unwrap_err(),
            BoundError::OutOfRange(1.1)
        );
        assert_eq!(
            p_mv_lower_bound(&[0.5, 0.5]).unwrap_err(),
            BoundError::MeanNotAboveHalf(0.5)
        );
        assert!(matches!(
            p_mv_lower_bound(&[0.2, 0.4]).unwrap_err(),
            BoundError::MeanNotAboveHalf(m) if (m - 0.3).abs() < 1e-12
        ));
    }
}
