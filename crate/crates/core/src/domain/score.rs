// SPDX-License-Identifier: Apache-2.0

//! Scoring formulas shared by every strategy.
//!
//! Generation tasks are scored by testbench pass rate. Optimization tasks
//! score functionally correct designs by the negated area-latency product,
//! scaled by `eta`, so a smaller design or a faster one always scores
//! higher. Anything that fails to compile or simulate gets `c_penalty`.

use thiserror::Error;

pub const DEFAULT_C_PENALTY: f64 = -1e5;
pub const DEFAULT_ETA: f64 = 1e5;

/// Raised when the evaluator hands the formulas impossible inputs.
#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("simulation reported success with zero test vectors")]
    EmptyTestbench,
    #[error("pass count {pass} exceeds total {total}")]
    PassExceedsTotal { pass: u64, total: u64 },
    #[error("valid design reported non-positive area {area} or latency {latency}")]
    NonPositiveMetric { area: f64, latency: f64 },
}

pub fn score_generation(
    pass_count: u64,
    total: u64,
    sim_ok: bool,
    c_penalty: f64,
) -> Result<f64, ScoreError> {
    if !sim_ok {
        return Ok(c_penalty);
    }
    if total == 0 {
        return Err(ScoreError::EmptyTestbench);
    }
    if pass_count > total {
        return Err(ScoreError::PassExceedsTotal { pass: pass_count, total });
    }
    Ok(pass_count as f64 / total as f64)
}

pub fn score_optimization(
    area: f64,
    latency: f64,
    all_pass: bool,
    eta: f64,
    c_penalty: f64,
) -> Result<f64, ScoreError> {
    if !all_pass {
        return Ok(c_penalty);
    }
    // NaN fails both comparisons, so test the positive case.
    if !(area > 0.0 && latency > 0.0) {
        return Err(ScoreError::NonPositiveMetric { area, latency });
    }
    Ok(-(area * latency) / eta)
}

/// Penalty detection is exact equality: the penalty is assigned, never computed.
pub fn is_penalty(score: f64, c_penalty: f64) -> bool {
    score == c_penalty
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn generation_examples() {
        assert_eq!(score_generation(7, 10, true, -1e5).unwrap(), 0.7);
        assert_eq!(score_generation(10, 10, true, -1e5).unwrap(), 1.0);
        assert_eq!(score_generation(3, 10, false, -1e5).unwrap(), -100000.0);
        assert_eq!(score_generation(0, 0, false, -1e5).unwrap(), -100000.0);
    }

    #[test]
    fn generation_rejects_evaluator_defects() {
        assert_eq!(score_generation(0, 0, true, -1e5), Err(ScoreError::EmptyTestbench));
        assert!(matches!(
            score_generation(5, 4, true, -1e5),
            Err(ScoreError::PassExceedsTotal { .. })
        ));
    }

    #[test]
    fn optimization_examples() {
        // 269657 * 1448 = 390463336, both exact in f64, so the quotient is
        // the correctly rounded value of the literal.
        assert_eq!(269657.0 * 1448.0, 390463336.0);
        assert_eq!(score_optimization(269657.0, 1448.0, true, 1e5, -1e5).unwrap(), -3904.63336);
        assert_eq!(score_optimization(1e5, 1.0, true, 1e5, -1e5).unwrap(), -1.0);
        assert_eq!(score_optimization(5.0, 5.0, false, 1e5, -1e5).unwrap(), -100000.0);
    }

    #[test]
    fn optimization_rejects_non_positive_metrics() {
        for (a, l) in [(0.0, 1.0), (1.0, 0.0), (-3.0, 2.0), (f64::NAN, 1.0)] {
            assert!(score_optimization(a, l, true, 1e5, -1e5).is_err());
        }
        // Invalid designs never reach the metric check.
        assert!(score_optimization(0.0, 0.0, false, 1e5, -1e5).is_ok());
    }

    proptest! {
        #[test]
        fn generation_range_and_monotone(total in 1u64..10_000, a in 0u64..10_000, b in 0u64..10_000, sim_ok: bool) {
            let (lo, hi) = (a.min(b) % (total + 1), a.max(b) % (total + 1));
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            let s_lo = score_generation(lo, total, sim_ok, -1e5).unwrap();
            let s_hi = score_generation(hi, total, sim_ok, -1e5).unwrap();
            if sim_ok {
                prop_assert!((0.0..=1.0).contains(&s_lo));
                prop_assert!(s_lo <= s_hi);
            } else {
                prop_assert_eq!(s_lo, -1e5);
                prop_assert_eq!(s_hi, -1e5);
            }
        }

        #[test]
        fn optimization_strictly_decreasing(area in 1.0f64..1e6, lat in 1.0f64..1e5, da in 1.0f64..1e4, dl in 1.0f64..1e3) {
            let base = score_optimization(area, lat, true, 1e5, -1e5).unwrap();
            prop_assert!(score_optimization(area + da, lat, true, 1e5, -1e5).unwrap() < base);
            prop_assert!(score_optimization(area, lat + dl, true, 1e5, -1e5).unwrap() < base);
            prop_assert!(base < 0.0);
        }
    }
}
