//! Property tests for the structural invariants.

use comovement::decompose::{decompose, hitting_times, run_counters};
use comovement::exact::{check_halving_recursion, check_sign_symmetry};
use comovement::model::ModelSpec;
use comovement::rational::{rat, rat_one, Rational};
use comovement::sign::{Sign, SignPair};
use comovement::{reconstruct, History, JointPath};
use num::{Signed, Zero};
use proptest::prelude::*;

fn arb_sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn arb_pair() -> impl Strategy<Value = SignPair> {
    (arb_sign(), arb_sign()).prop_map(|(xi, eta)| SignPair::new(xi, eta))
}

fn arb_path(max_len: usize) -> impl Strategy<Value = JointPath> {
    prop::collection::vec(arb_pair(), 1..=max_len)
        .prop_map(|pairs| JointPath::from_pairs(pairs).unwrap())
}

/// Rationals in [0, 1/2] with small denominators, valid fair-model thetas.
fn arb_fair_theta() -> impl Strategy<Value = Rational> {
    (0i64..=30, 1i64..=30).prop_map(|(num, den_extra)| {
        // num / (2 * max(num, 1) + den_extra) <= 1/2
        let den = 2 * num.max(1) + den_extra;
        rat(num, den)
    })
}

fn arb_history(max_len: usize) -> impl Strategy<Value = History> {
    prop::collection::vec(arb_pair(), 0..=max_len).prop_map(History::from_steps)
}

proptest! {
    #[test]
    fn decompose_then_reconstruct_is_identity(path in arb_path(64)) {
        let d = decompose(&path);
        let (b, w) = reconstruct(&d.x, &d.y, &d.counters.t).unwrap();
        prop_assert_eq!(b, path.b_values());
        prop_assert_eq!(w, path.w_values());
    }

    #[test]
    fn counters_partition_the_steps(path in arb_path(64)) {
        let d = decompose(&path);
        for (i, (&t, &s)) in d.counters.t.iter().zip(&d.counters.s).enumerate() {
            prop_assert_eq!(t + s, i + 1);
        }
        // Counters are nondecreasing with unit increments.
        let mut prev = 0usize;
        for &t in &d.counters.t {
            prop_assert!(t == prev || t == prev + 1);
            prev = t;
        }
    }

    #[test]
    fn hitting_times_invert_the_counters(q in prop::collection::vec(any::<bool>(), 1..48)) {
        let counters = run_counters(&q);
        let hits = hitting_times(&counters);
        for (idx, hit) in hits.alpha.iter().enumerate() {
            let rank = idx + 1;
            match hit {
                Some(step) => {
                    prop_assert_eq!(counters.t[step - 1], rank);
                    prop_assert!(*step == 1 || counters.t[step - 2] == rank - 1);
                }
                None => prop_assert!(counters.t.last().copied().unwrap() < rank),
            }
        }
    }

    #[test]
    fn step_pmf_is_normalized_and_symmetric(
        theta in arb_fair_theta(),
        history in arb_history(6),
    ) {
        let model = ModelSpec::constant(theta);
        prop_assume!(model.check_params().is_ok());
        let pmf = model.step_distribution_exact(&history).unwrap();
        prop_assert_eq!(pmf.total(), rat_one());
        prop_assert!(!pmf.prob(SignPair::BOTH_UP).is_negative());
        prop_assert!(!pmf.prob(SignPair::UP_DOWN).is_negative());
        // Fair-marginal flip symmetry.
        prop_assert_eq!(pmf.prob(SignPair::BOTH_UP), pmf.prob(SignPair::BOTH_DOWN));
        prop_assert_eq!(pmf.prob(SignPair::UP_DOWN), pmf.prob(SignPair::DOWN_UP));
        // Marginal law.
        let up = pmf.prob(SignPair::BOTH_UP) + pmf.prob(SignPair::UP_DOWN);
        prop_assert_eq!(up, rat(1, 2));
    }

    #[test]
    fn biased_pmf_has_marginal_p(
        p_num in 1i64..20,
        p_den_extra in 1i64..20,
        mix in 0u8..=100,
    ) {
        // p in (0, 1), theta anywhere in [max(0, 2p-1), p].
        let p = rat(p_num, p_num + p_den_extra);
        let (lo, hi) = (
            (rat(2, 1) * &p - rat_one()).max(Rational::zero()),
            p.clone(),
        );
        let theta = &lo + (&hi - &lo) * rat(mix as i64, 100);
        let model = ModelSpec::biased(p.clone(), theta);
        prop_assert!(model.check_params().is_ok());
        let pmf = model.step_distribution_exact(&History::empty()).unwrap();
        prop_assert_eq!(pmf.total(), rat_one());
        let xi_up = pmf.prob(SignPair::BOTH_UP) + pmf.prob(SignPair::UP_DOWN);
        let eta_up = pmf.prob(SignPair::BOTH_UP) + pmf.prob(SignPair::DOWN_UP);
        prop_assert_eq!(xi_up, p.clone());
        prop_assert_eq!(eta_up, p);
        prop_assert_eq!(pmf.prob(SignPair::UP_DOWN), pmf.prob(SignPair::DOWN_UP));
    }

    #[test]
    fn model_json_round_trips(theta in arb_fair_theta()) {
        let model = ModelSpec::constant(theta);
        prop_assume!(model.check_params().is_ok());
        let json = serde_json::to_string(&model).unwrap();
        let back: ModelSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(model, back);
    }

    #[test]
    fn path_json_round_trips(path in arb_path(32)) {
        let json = serde_json::to_string(&path).unwrap();
        let back: JointPath = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(path, back);
    }

    #[test]
    fn exact_identities_hold_for_arbitrary_fair_models(
        base in arb_fair_theta(),
        bump_up in any::<bool>(),
    ) {
        // Sign symmetry and the halving recursion admit no exceptions among
        // valid fair-marginal models, shipped or not.
        let half = rat(1, 2);
        let bump = if bump_up { (&half - &base) / rat(2, 1) } else { -&base / rat(2, 1) };
        let models = vec![
            ModelSpec::constant(base.clone()),
            ModelSpec::q_history(base, bump),
        ];
        for model in models {
            prop_assume!(model.check_params().is_ok());
            let symmetry = check_sign_symmetry(&model, 4, 1).unwrap();
            prop_assert!(symmetry.pass, "{}", symmetry.claim);
            let halving = check_halving_recursion(&model, 4, &[1], &[1]).unwrap();
            prop_assert!(halving.pass, "{}", halving.claim);
        }
    }

    #[test]
    fn component_increments_are_unit(path in arb_path(64)) {
        let d = decompose(&path);
        for series in [&d.x, &d.y] {
            let mut prev = 0i64;
            for &v in series.iter() {
                prop_assert_eq!((v - prev).abs(), 1);
                prev = v;
            }
        }
    }
}
