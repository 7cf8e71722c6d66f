//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with its runtime (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The criteria pin every tolerance in code: exact checks must hold with
//! rational equality, Monte Carlo checks at the stated sigma rule or
//! significance, and each criterion within its runtime budget. Seeds are
//! fixed so the whole suite is reproducible bit for bit.

use comovement::decompose::{decompose, table1};
use comovement::exact::{
    check_biased_formula, check_c1_factorization, check_halving_recursion, check_sign_symmetry,
    exact_event_prob, minimal_factorization_witness,
};
use comovement::mc::{
    biased_walk_tests, calibrate_events, chi_square_uniform, estimate_delta_t, mc_block_pmf,
    sample_events,
};
use comovement::model::ModelSpec;
use comovement::rational::rat;
use comovement::sign::SignPair;
use comovement::{reconstruct, JointPath};
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Criteria run one at a time so the runtime budgets are measured cleanly.
static SEQUENTIAL: Mutex<()> = Mutex::new(());

fn run_criterion(name: &str, budget: Duration, body: impl FnOnce()) {
    let _guard = SEQUENTIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    body();
    let elapsed = start.elapsed();
    println!("PASS {name}: {elapsed:?} (budget {budget:?})");
    assert!(
        elapsed <= budget,
        "{name} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

fn fair_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::constant(rat(1, 4)),
        ModelSpec::constant(rat(1, 3)),
        ModelSpec::constant(rat(1, 2)),
        ModelSpec::q_history_default(),
        ModelSpec::sign_adversarial_default(),
    ]
}

fn all_shipped_models() -> Vec<ModelSpec> {
    let mut models = fair_models();
    models.push(ModelSpec::biased(rat(3, 5), rat(1, 2)));
    models.push(ModelSpec::biased(rat(7, 10), rat(1, 2)));
    models.push(ModelSpec::gaussian(0.5));
    models
}

#[test]
fn c01_golden_decomposition_table() {
    let path = table1();
    let expected = "\
n,B,W,T,S,alpha,beta,X,Y
1,1,-1,0,1,4,1,-1,1
2,0,0,0,2,9,2,0,0
3,-1,1,0,3,10,3,1,-1
4,-2,0,1,3,,5,,0
5,-1,-1,1,4,,6,,1
6,0,-2,1,5,,7,,0
7,-1,-1,1,6,,8,,1
8,0,-2,1,7,,,,
9,1,-1,2,7,,,,
10,2,0,3,7,,,,
";
    run_criterion(
        "criterion 1 (golden table)",
        Duration::from_millis(1),
        || {
            let d = decompose(&path);
            assert_eq!(d.to_csv(&path), expected);
        },
    );
}

#[test]
fn c02_reconstruction_round_trip() {
    run_criterion("criterion 2 (round trip)", Duration::from_secs(10), || {
        use rayon::prelude::*;
        let models = all_shipped_models();
        let per_model = 100_000 / models.len() as u64 + 1;
        for (m, model) in models.iter().enumerate() {
            (0..per_model).into_par_iter().for_each(|rep| {
                let path = model
                    .simulate_path(128, 4242 + m as u64, rep)
                    .expect("valid shipped model");
                let d = decompose(&path);
                let (b, w) = reconstruct(&d.x, &d.y, &d.counters.t).expect("decomposition fits");
                assert_eq!(b, path.b_values());
                assert_eq!(w, path.w_values());
            });
        }
    });
}

#[test]
fn c03_path_structure_exhaustive() {
    run_criterion(
        "criterion 3 (hitting-time structure)",
        Duration::from_secs(1),
        || {
            let n = 8usize;
            let mut checked = 0u64;
            for code in 0..4u32.pow(n as u32) {
                let pairs: Vec<SignPair> = (0..n)
                    .map(|i| SignPair::ALL[((code >> (2 * i)) & 3) as usize])
                    .collect();
                let path = JointPath::from_pairs(pairs).unwrap();
                let d = decompose(&path);
                let reached = |side: &[Option<usize>]| -> Vec<(usize, usize)> {
                    side.iter()
                        .enumerate()
                        .filter_map(|(i, h)| h.map(|h| (i + 1, h)))
                        .collect()
                };
                let alphas = reached(&d.hits.alpha);
                let betas = reached(&d.hits.beta);
                // Hitting times cannot come before their rank.
                for &(rank, step) in alphas.iter().chain(&betas) {
                    assert!(step >= rank, "rank {rank} hit at step {step}");
                }
                // Reached entries strictly increase.
                for side in [&alphas, &betas] {
                    for w in side.windows(2) {
                        assert!(w[0].1 < w[1].1);
                    }
                }
                // No step hosts both a common and a counter hit.
                for &(_, a) in &alphas {
                    assert!(betas.iter().all(|&(_, b)| b != a));
                }
                // Within the horizon, ranks n and m with n + m - 1 <= N cannot
                // both be unreached.
                for rank_n in 1..=n {
                    for rank_m in 1..=(n + 1 - rank_n) {
                        let alpha_unreached = d.hits.alpha[rank_n - 1].is_none();
                        let beta_unreached = d.hits.beta[rank_m - 1].is_none();
                        assert!(
                            !(alpha_unreached && beta_unreached),
                            "both ranks unreached at n={rank_n}, m={rank_m}"
                        );
                    }
                }
                // Every defined component increment is a unit step.
                for series in [&d.x, &d.y] {
                    let mut prev = 0i64;
                    for &v in series.iter() {
                        assert_eq!((v - prev).abs(), 1);
                        prev = v;
                    }
                }
                checked += 1;
            }
            assert_eq!(checked, 65_536);
        },
    );
}

#[test]
fn c04_sign_symmetry_exact() {
    run_criterion(
        "criterion 4 (sign symmetry)",
        Duration::from_secs(30),
        || {
            for model in fair_models() {
                for n in 1..=8 {
                    let report = check_sign_symmetry(&model, 8, n).unwrap();
                    assert!(report.pass, "{} failed", report.claim);
                    assert_eq!(report.lhs, report.rhs);
                }
            }
        },
    );
}

#[test]
fn c05_halving_recursion_exact() {
    run_criterion(
        "criterion 5 (halving recursion)",
        Duration::from_secs(60),
        || {
            let combos: [(&[usize], &[usize]); 4] =
                [(&[1], &[]), (&[], &[1]), (&[1], &[1]), (&[1, 2], &[1])];
            for model in fair_models() {
                for (n_idx, m_idx) in combos {
                    let report = check_halving_recursion(&model, 8, n_idx, m_idx).unwrap();
                    assert!(report.pass, "{} failed", report.claim);
                }
            }
        },
    );
}

#[test]
fn c06_factorization_both_directions() {
    run_criterion(
        "criterion 6 (factorization)",
        Duration::from_secs(30),
        || {
            // Positive direction: state-adapted models factorize exactly.
            let adapted = [
                ModelSpec::constant(rat(1, 4)),
                ModelSpec::constant(rat(1, 3)),
                ModelSpec::constant(rat(1, 2)),
                ModelSpec::q_history_default(),
            ];
            let combos: [(&[usize], &[usize]); 3] = [(&[1], &[]), (&[], &[1]), (&[1], &[1])];
            for model in &adapted {
                for (n_idx, m_idx) in combos {
                    let report = check_c1_factorization(model, 6, n_idx, m_idx).unwrap();
                    assert!(report.pass, "{} failed", report.claim);
                }
            }
            // Negative direction: the sign-peeking model fails, with the
            // hand-computed witness masses. The event (counter step, then a
            // common step) with the counter sign up carries 1/5, while half the
            // pattern mass is 1/8.
            let adversarial = ModelSpec::sign_adversarial_default();
            let report = check_c1_factorization(&adversarial, 6, &[], &[1]).unwrap();
            assert!(!report.pass);
            assert!(report.witness.is_some());
            let minimal = minimal_factorization_witness(&adversarial, 6, &[], &[1]).unwrap();
            assert_eq!(
                minimal.expect("fails somewhere").0,
                2,
                "minimal failing horizon"
            );
            let witness_joint = exact_event_prob(&adversarial, 2, |path| {
                !path.pair(1).is_common() && path.pair(2).is_common() && path.pair(1).xi.is_up()
            })
            .unwrap();
            let witness_pattern = exact_event_prob(&adversarial, 2, |path| {
                !path.pair(1).is_common() && path.pair(2).is_common()
            })
            .unwrap();
            assert_eq!(witness_joint, rat(1, 5));
            assert_eq!(witness_pattern, rat(1, 4));
            assert_ne!(witness_joint, witness_pattern / rat(2, 1)); // 1/5 vs 1/8
        },
    );
}

#[test]
fn c07_biased_walk_exact_and_mc() {
    run_criterion(
        "criterion 7 (biased walks)",
        Duration::from_secs(60),
        || {
            for p in [rat(3, 5), rat(7, 10)] {
                let model = ModelSpec::biased(p.clone(), rat(1, 2));
                for n in 1..=3 {
                    let report = check_biased_formula(&model, 8, n).unwrap();
                    assert!(report.pass, "{} failed", report.claim);
                }
                let (x_report, y_report) =
                    biased_walk_tests(p, rat(1, 2), 200, 100_000, 20_260_807, 0.001).unwrap();
                assert!(
                    x_report.pass,
                    "trend direction not confirmed: z={:?}",
                    x_report.statistic
                );
                assert!(x_report.statistic.unwrap() > 3.0);
                assert!(
                    y_report.pass,
                    "counter walk not fair: {:?}",
                    y_report.estimate
                );
            }
        },
    );
}

#[test]
fn c08_block_uniformity_mc() {
    run_criterion(
        "criterion 8 (block uniformity)",
        Duration::from_secs(120),
        || {
            for model in [
                ModelSpec::constant(rat(1, 4)),
                ModelSpec::sign_adversarial_default(),
            ] {
                let counts = mc_block_pmf(&model, 3, 3, 64, 1_000_000, 88).unwrap();
                assert_eq!(counts.cells(), 64);
                let report = chi_square_uniform(&counts, 0.001).unwrap();
                assert!(
                    report.pass,
                    "{} uniformity rejected: p = {:?}",
                    model.kind_name(),
                    report.p_value
                );
            }
        },
    );
}

#[test]
fn c09_gaussian_clock_rate_mc() {
    run_criterion(
        "criterion 9 (gaussian clock rate)",
        Duration::from_secs(30),
        || {
            for rho in [-0.8, 0.0, 0.5, 0.9] {
                let report = estimate_delta_t(rho, 1_000_000, 99, 0.001).unwrap();
                assert!(
                    report.pass,
                    "rho={rho}: estimate {:?} vs target {:?} (se {:?})",
                    report.estimate, report.target, report.std_error
                );
            }
            // Spot value: at rho = 1/2 the target is exactly 2/3.
            let report = estimate_delta_t(0.5, 1_000, 1, 0.001).unwrap();
            assert!((report.target.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        },
    );
}

#[test]
fn c10_oracle_mc_calibration() {
    run_criterion(
        "criterion 10 (oracle/mc calibration)",
        Duration::from_secs(120),
        || {
            let model = ModelSpec::q_history_default();
            let events = sample_events(8, 20, 20_260_811);
            assert_eq!(events.len(), 20);
            let reports = calibrate_events(&model, 8, &events, 1_000_000, 555, 0.001).unwrap();
            for report in &reports {
                assert!(
                    report.pass,
                    "{}: estimate {:?} vs target {:?} (se {:?})",
                    report.test_name, report.estimate, report.target, report.std_error
                );
            }
        },
    );
}
