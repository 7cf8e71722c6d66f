//! The Monte Carlo experiments: block pmf sampling, the Gaussian clock rate,
//! sign/state independence, biased-walk direction and oracle calibration.

use super::chi_square::g_test_independence;
use super::{BlockCounts, McError, TestReport};
use crate::decompose::{decompose_completed, Completion, Decomposition};
use crate::exact::{exact_event_probs, EventSpec};
use crate::gaussian::{gaussian_theta, sample_gaussian_pair};
use crate::model::ModelSpec;
use crate::rational::{binomial_stderr, rat, to_f64};
use crate::rng::{substream, StreamKind};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn require_fair(model: &ModelSpec) -> Result<(), McError> {
    if model.marginal_p() != rat(1, 2) {
        return Err(McError::BadArguments {
            detail: format!(
                "{} model has biased marginals; this test assumes p = 1/2",
                model.kind_name()
            ),
        });
    }
    Ok(())
}

/// Sign vector of the first `k` common and `l` counter increments as a cell
/// index (bit set = up move). The decomposition must extend to `max(k, l)`.
fn sign_block_cell(d: &Decomposition, k: usize, l: usize) -> usize {
    let mut key = 0usize;
    let mut prev = 0i64;
    for (i, &v) in d.x.iter().take(k).enumerate() {
        if v > prev {
            key |= 1 << i;
        }
        prev = v;
    }
    prev = 0;
    for (j, &v) in d.y.iter().take(l).enumerate() {
        if v > prev {
            key |= 1 << (k + j);
        }
        prev = v;
    }
    key
}

/// Simulates `reps` paths and tallies the joint sign vector of the first `k`
/// common-walk and `l` counter-walk increments, completing unreached entries
/// with the dedicated fair streams. Replications run in parallel; counts are
/// identical to a serial run.
pub fn mc_block_pmf(
    model: &ModelSpec,
    k: usize,
    l: usize,
    horizon: usize,
    reps: u64,
    seed: u64,
) -> Result<BlockCounts, McError> {
    require_fair(model)?;
    model.check_params()?;
    if k + l == 0 || k + l > 20 {
        return Err(McError::BadArguments {
            detail: format!("k + l = {} out of range", k + l),
        });
    }
    if horizon < k.max(l) {
        return Err(McError::BadArguments {
            detail: format!("horizon {horizon} shorter than the requested block ({k}, {l})"),
        });
    }
    let cells = 1usize << (k + l);
    let counts = (0..reps)
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut acc, rep| {
                let path = model
                    .simulate_path(horizon, seed, rep)
                    .expect("validated model and positive horizon");
                let mut completion = Completion::from_seed(seed, rep);
                let d = decompose_completed(&path, &mut completion);
                acc[sign_block_cell(&d, k, l)] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(BlockCounts { k, l, counts, reps })
}

/// Estimates the common-move rate of the Gaussian model against the exact
/// target `1/2 + asin(rho)/pi`. Verdict: estimate within three binomial
/// standard errors of the target.
pub fn estimate_delta_t(
    rho: f64,
    reps: u64,
    seed: u64,
    significance: f64,
) -> Result<TestReport, McError> {
    let theta = gaussian_theta(rho).map_err(McError::Model)?;
    let target = 2.0 * theta;
    let common: u64 = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(seed, StreamKind::Path, rep);
            u64::from(sample_gaussian_pair(rho, &mut rng).is_common())
        })
        .sum();
    let estimate = common as f64 / reps as f64;
    let std_error = (target * (1.0 - target) / reps as f64).sqrt();
    let deviation = (estimate - target).abs();
    let pass = deviation <= 3.0 * std_error;
    let (statistic, p_value) = if std_error > 0.0 {
        let z = (estimate - target) / std_error;
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (Some(z), Some(2.0 * normal.cdf(-z.abs())))
    } else {
        (None, None)
    };
    Ok(TestReport {
        test_name: format!("delta-t[rho={rho}]"),
        sample_size: reps,
        statistic,
        df: None,
        p_value,
        estimate: Some(estimate),
        std_error: Some(std_error),
        target: Some(target),
        significance,
        pass,
    })
}

/// G test of independence between the joint sign vector (as in
/// [`mc_block_pmf`]) and the initial common/counter pattern of the path.
/// State-adapted models should pass; sign-peeking models should reject.
#[allow(clippy::too_many_arguments)]
pub fn independence_test_xyt(
    model: &ModelSpec,
    k: usize,
    l: usize,
    pattern_len: usize,
    horizon: usize,
    reps: u64,
    seed: u64,
    significance: f64,
) -> Result<TestReport, McError> {
    require_fair(model)?;
    model.check_params()?;
    if pattern_len == 0 || pattern_len > horizon || pattern_len > 16 {
        return Err(McError::BadArguments {
            detail: format!("pattern length {pattern_len} out of range for horizon {horizon}"),
        });
    }
    if k + l == 0 || horizon < k.max(l) {
        return Err(McError::BadArguments {
            detail: format!("block ({k}, {l}) incompatible with horizon {horizon}"),
        });
    }
    let rows = 1usize << (k + l);
    let cols = 1usize << pattern_len;
    let flat = (0..reps)
        .into_par_iter()
        .fold(
            || vec![0u64; rows * cols],
            |mut acc, rep| {
                let path = model
                    .simulate_path(horizon, seed, rep)
                    .expect("validated model and positive horizon");
                let mut completion = Completion::from_seed(seed, rep);
                let d = decompose_completed(&path, &mut completion);
                let row = sign_block_cell(&d, k, l);
                let col =
                    d.q.iter()
                        .take(pattern_len)
                        .enumerate()
                        .fold(0usize, |key, (i, &bit)| key | (usize::from(bit) << i));
                acc[row * cols + col] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; rows * cols],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let table: Vec<Vec<u64>> = (0..rows)
        .map(|r| flat[r * cols..(r + 1) * cols].to_vec())
        .collect();
    g_test_independence(
        &table,
        format!(
            "sign-state-independence[{} k={k} l={l} pattern={pattern_len}]",
            model.kind_name()
        ),
        significance,
    )
}

/// Two-part biased-walk test: (a) the counter walk's first increment stays
/// fair (within three sigma of one half), (b) the common walk's first
/// increment is biased beyond `p` in the direction of the trend (one-sided
/// z > 3 when `p > 1/2`, mirrored when `p < 1/2`, within three sigma at
/// `p = 1/2`).
pub fn biased_walk_tests(
    p: crate::rational::Rational,
    theta: crate::rational::Rational,
    horizon: usize,
    reps: u64,
    seed: u64,
    significance: f64,
) -> Result<(TestReport, TestReport), McError> {
    let model = ModelSpec::biased(p.clone(), theta);
    model.check_params()?;
    if horizon == 0 {
        return Err(McError::BadArguments {
            detail: "horizon must be positive".into(),
        });
    }
    let (x_up, y_up) = (0..reps)
        .into_par_iter()
        .fold(
            || (0u64, 0u64),
            |(x_up, y_up), rep| {
                let path = model
                    .simulate_path(horizon, seed, rep)
                    .expect("validated model and positive horizon");
                let mut completion = Completion::from_seed(seed, rep);
                let d = decompose_completed(&path, &mut completion);
                (x_up + u64::from(d.x[0] > 0), y_up + u64::from(d.y[0] > 0))
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let normal = Normal::new(0.0, 1.0).expect("standard normal");

    let y_estimate = y_up as f64 / reps as f64;
    let y_sigma = (0.25 / reps as f64).sqrt();
    let y_report = TestReport {
        test_name: "biased-counter-fairness".into(),
        sample_size: reps,
        statistic: Some((y_estimate - 0.5) / y_sigma),
        df: None,
        p_value: Some(2.0 * normal.cdf(-((y_estimate - 0.5) / y_sigma).abs())),
        estimate: Some(y_estimate),
        std_error: Some(y_sigma),
        target: Some(0.5),
        significance,
        pass: (y_estimate - 0.5).abs() <= 3.0 * y_sigma,
    };

    let p_f = to_f64(&p);
    let x_estimate = x_up as f64 / reps as f64;
    let x_sigma = (p_f * (1.0 - p_f) / reps as f64).sqrt();
    let z = (x_estimate - p_f) / x_sigma;
    let (pass, p_value) = if p > rat(1, 2) {
        (z > 3.0, normal.cdf(-z))
    } else if p < rat(1, 2) {
        (z < -3.0, normal.cdf(z))
    } else {
        (z.abs() <= 3.0, 2.0 * normal.cdf(-z.abs()))
    };
    let x_report = TestReport {
        test_name: "biased-common-trend".into(),
        sample_size: reps,
        statistic: Some(z),
        df: None,
        p_value: Some(p_value),
        estimate: Some(x_estimate),
        std_error: Some(x_sigma),
        target: Some(p_f),
        significance,
        pass,
    };
    Ok((x_report, y_report))
}

/// Draws `count` calibration events for the horizon from a dedicated seed.
pub fn sample_events(horizon: usize, count: usize, event_seed: u64) -> Vec<EventSpec> {
    let mut rng = substream(event_seed, StreamKind::Path, 0);
    (0..count)
        .map(|_| EventSpec::sample(horizon, &mut rng))
        .collect()
}

/// Calibrates the simulator against the enumeration oracle: for each event,
/// the exact probability is computed by enumeration and the Monte Carlo
/// frequency of the same predicate must land within four binomial standard
/// errors (exactly, when the probability is degenerate).
pub fn calibrate_events(
    model: &ModelSpec,
    horizon: usize,
    events: &[EventSpec],
    reps: u64,
    seed: u64,
    significance: f64,
) -> Result<Vec<TestReport>, McError> {
    let exact = exact_event_probs(model, horizon, events)?;
    let hits = (0..reps)
        .into_par_iter()
        .fold(
            || vec![0u64; events.len()],
            |mut acc, rep| {
                let path = model
                    .simulate_path(horizon, seed, rep)
                    .expect("validated model and positive horizon");
                for (event, slot) in events.iter().zip(acc.iter_mut()) {
                    *slot += u64::from(event.eval(&path));
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; events.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(events
        .iter()
        .zip(exact.iter().zip(hits))
        .map(|(event, (exact_p, hit))| {
            let target = to_f64(exact_p);
            let estimate = hit as f64 / reps as f64;
            let std_error = binomial_stderr(exact_p, reps);
            let pass = (estimate - target).abs() <= 4.0 * std_error;
            TestReport {
                test_name: format!("oracle-calibration[{}]", event.label()),
                sample_size: reps,
                statistic: (std_error > 0.0).then(|| (estimate - target) / std_error),
                df: None,
                p_value: None,
                estimate: Some(estimate),
                std_error: Some(std_error),
                target: Some(target),
                significance,
                pass,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn comonotone_block_is_a_fair_coin() {
        // Only common moves: the first common increment is the first step.
        let model = ModelSpec::constant(rat(1, 2));
        let counts = mc_block_pmf(&model, 1, 0, 8, 100_000, 11).unwrap();
        assert_eq!(counts.cells(), 2);
        let sigma = (0.25f64 / 100_000.0).sqrt();
        for &c in &counts.counts {
            let freq = c as f64 / 100_000.0;
            assert!((freq - 0.5).abs() < 3.0 * sigma, "freq {freq}");
        }
    }

    #[test]
    fn block_counts_are_thread_invariant() {
        let model = ModelSpec::q_history_default();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| mc_block_pmf(&model, 2, 1, 16, 20_000, 7).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn completion_seeds_do_not_touch_reached_statistics() {
        // With a horizon this long every index is reached, so changing the
        // completion stream must not change a single count.
        let model = ModelSpec::constant(rat(1, 4));
        let a = mc_block_pmf(&model, 2, 2, 64, 20_000, 5).unwrap();
        // Same path seed, different completion draws come from the same
        // root seed; to vary completions alone, compare against a manual run.
        let reps = 20_000u64;
        let mut counts = vec![0u64; 16];
        for rep in 0..reps {
            let path = model.simulate_path(64, 5, rep).unwrap();
            let mut completion = Completion::from_seed(987_654, rep);
            let d = decompose_completed(&path, &mut completion);
            counts[sign_block_cell(&d, 2, 2)] += 1;
        }
        assert_eq!(a.counts, counts);
    }

    #[test]
    fn short_horizon_blocks_stay_uniform_through_completion() {
        // A three-step horizon cannot realize two common and two counter
        // movements, so every replication draws from the completion streams;
        // the completed block is still exactly uniform.
        let model = ModelSpec::constant(rat(1, 4));
        let counts = mc_block_pmf(&model, 2, 2, 3, 100_000, 17).unwrap();
        let report = super::super::chi_square_uniform(&counts, 0.001).unwrap();
        assert!(report.pass, "p = {:?}", report.p_value);
    }

    #[test]
    fn delta_t_rate_matches_arcsine_target() {
        let report = estimate_delta_t(0.5, 200_000, 3, 0.001).unwrap();
        assert!(
            report.pass,
            "estimate {:?} target {:?}",
            report.estimate, report.target
        );
        assert!((report.target.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let degenerate = estimate_delta_t(-1.0, 50_000, 3, 0.001).unwrap();
        assert_eq!(degenerate.estimate, Some(0.0));
        assert!(degenerate.pass);
    }

    #[test]
    fn independence_passes_for_state_adapted_and_rejects_adversarial() {
        let fair = ModelSpec::constant(rat(1, 4));
        let report = independence_test_xyt(&fair, 1, 1, 2, 16, 200_000, 21, 0.001).unwrap();
        assert!(report.pass, "p = {:?}", report.p_value);

        let adversarial = ModelSpec::sign_adversarial_default();
        let report = independence_test_xyt(&adversarial, 1, 1, 2, 16, 200_000, 21, 0.001).unwrap();
        assert!(!report.pass);
        assert!(report.p_value.unwrap() < 1e-6);
    }

    #[test]
    fn independence_refuses_degenerate_patterns() {
        // Comonotone model: the state pattern is always all-common.
        let model = ModelSpec::constant(rat(1, 2));
        assert!(matches!(
            independence_test_xyt(&model, 1, 0, 2, 16, 10_000, 2, 0.001),
            Err(McError::DegenerateTable { .. })
        ));
    }

    #[test]
    fn biased_walk_direction_and_fair_noise() {
        let (x_report, y_report) =
            biased_walk_tests(rat(7, 10), rat(1, 2), 200, 50_000, 13, 0.001).unwrap();
        assert!(x_report.pass, "z = {:?}", x_report.statistic);
        assert!(x_report.estimate.unwrap() > 0.7);
        assert!(y_report.pass, "y estimate {:?}", y_report.estimate);
        // The long-horizon limit of the first common increment's up
        // probability is 5/6 for these parameters.
        assert!((x_report.estimate.unwrap() - 5.0 / 6.0).abs() < 0.01);
    }

    #[test]
    fn unbiased_walk_is_flagged_fair_both_ways() {
        let (x_report, y_report) =
            biased_walk_tests(rat(1, 2), rat(1, 4), 64, 50_000, 29, 0.001).unwrap();
        assert!(x_report.pass);
        assert!(y_report.pass);
    }

    #[test]
    fn calibration_agrees_with_oracle() {
        let model = ModelSpec::q_history_default();
        let events = sample_events(8, 6, 777);
        let reports = calibrate_events(&model, 8, &events, 100_000, 31, 0.001).unwrap();
        assert_eq!(reports.len(), 6);
        for r in &reports {
            assert!(
                r.pass,
                "{}: est {:?} vs target {:?}",
                r.test_name, r.estimate, r.target
            );
        }
    }
}
