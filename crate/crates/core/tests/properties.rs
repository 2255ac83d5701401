use fullcorr::analytic::{diew_bound_binary, lemma1_max};
use fullcorr::behavior::evaluate;
use fullcorr::circulant::{circulant_matrix, CirculantSpec};
use fullcorr::quantum::{ghz_behavior, quantum_gradient, quantum_value, PhaseAssignment};
use fullcorr::reduction::Relabelling;
use fullcorr::{
    evaluate_on_strategy, local_bound, BellExpression, Behavior, CoefficientFunction,
    DeterministicStrategy, ExpandedTensor, Scenario, Strategy as Witness,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    (2usize..=4, 2usize..=3, 2usize..=3).prop_map(|(n, m, k)| Scenario::new(n, m, k).unwrap())
}

fn table(m: usize, k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, k), m)
}

fn expression() -> impl Strategy<Value = BellExpression> {
    scenario_strategy().prop_flat_map(|s| {
        table(s.settings(), s.outcomes()).prop_map(move |rows| {
            BellExpression::general(s, CoefficientFunction::new(rows).unwrap()).unwrap()
        })
    })
}

fn binary_product() -> impl Strategy<Value = BellExpression> {
    (2usize..=4, 2usize..=4).prop_flat_map(|(n, m)| {
        prop::collection::vec(-2.0f64..2.0, m).prop_map(move |g| {
            let f = CoefficientFunction::product(&g, 2).unwrap();
            BellExpression::general(Scenario::new(n, m, 2).unwrap(), f).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_is_symmetric_under_party_permutations(expr in expression(), seed in any::<u64>()) {
        let s = expr.scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        for settings in s.settings_vectors() {
            let mut shuffled = settings.clone();
            shuffled.shuffle(&mut rng);
            for r in 0..s.outcomes() {
                prop_assert_eq!(expr.coefficient(&settings, r).unwrap(), expr.coefficient(&shuffled, r).unwrap());
            }
        }
    }

    #[test]
    fn evaluation_is_linear(expr in expression(), seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = expr.scenario();
        let b1 = Behavior::random_no_signaling(s, &mut rng).unwrap();
        let b2 = Behavior::random_no_signaling(s, &mut rng).unwrap();
        let mixed = b1.mix(&b2, lambda).unwrap();
        let lhs = evaluate(&expr, &mixed).unwrap();
        let rhs = lambda * evaluate(&expr, &b1).unwrap() + (1.0 - lambda) * evaluate(&expr, &b2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn correlator_form_reproduces_evaluation(expr in binary_product(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let form = expr.correlator_form().unwrap();
        let s = expr.scenario();
        let b = Behavior::random_no_signaling(s, &mut rng).unwrap();
        let e: Vec<f64> = s
            .settings_vectors()
            .map(|v| b.prob_sum(&v, 0).unwrap() - b.prob_sum(&v, 1).unwrap())
            .collect();
        let direct = evaluate(&expr, &b).unwrap();
        let via = form.evaluate(&e).unwrap();
        prop_assert!((direct - via).abs() < 1e-12 * direct.abs().max(1.0), "{} vs {}", direct, via);
    }

    #[test]
    fn relabellings_round_trip(m in 2usize..=4, k in 2usize..=4, n in 2usize..=4, vals in prop::collection::vec(-5.0f64..5.0, 256)) {
        let bkp = Relabelling::bkp(m, k).unwrap();
        let s = Scenario::new(2, m, k).unwrap();
        let t = ExpandedTensor::from_values(s, vals[..m * m * k].to_vec()).unwrap();
        prop_assert_eq!(bkp.revert(&bkp.apply(&t).unwrap()).unwrap(), t.clone());
        prop_assert_eq!(bkp.apply(&bkp.revert(&t).unwrap()).unwrap(), t);

        let kk = k.min(3);
        let sc = Relabelling::svetlichny_cglmp(n, kk).unwrap();
        let s = Scenario::new(n, 2, kk).unwrap();
        let len = (1 << n) * kk;
        let t = ExpandedTensor::from_values(s, vals[..len].to_vec()).unwrap();
        prop_assert_eq!(sc.revert(&sc.apply(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn expression_json_round_trips(expr in expression()) {
        let text = expr.to_json();
        let back = BellExpression::from_json(&text).unwrap();
        prop_assert_eq!(&back, &expr);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn deterministic_behavior_matches_strategy_value(expr in expression(), seed in any::<u64>()) {
        use rand::Rng;
        let s = expr.scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let responses: Vec<Vec<usize>> = (0..s.parties())
            .map(|_| (0..s.settings()).map(|_| rng.random_range(0..s.outcomes())).collect())
            .collect();
        let b = Behavior::deterministic(s, &responses).unwrap();
        let strategy = Witness::Deterministic(DeterministicStrategy::new(responses));
        let a = evaluate(&expr, &b).unwrap();
        let c = evaluate_on_strategy(&expr, &strategy).unwrap();
        prop_assert!((a - c).abs() < 1e-12 * a.abs().max(1.0));
        prop_assert!(b.check_no_signaling().unwrap().no_signaling);
    }

    #[test]
    fn ghz_behaviors_are_valid(n in 2usize..=4, m in 2usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = PhaseAssignment::random(n, m, &mut rng).unwrap();
        let b = ghz_behavior(&a).unwrap();
        prop_assert!(b.check_no_signaling().unwrap().no_signaling);
        let expr = BellExpression::omega(Scenario::new(n, m, 2).unwrap());
        let v = quantum_value(&expr, &a, None).unwrap().value;
        prop_assert!((v - evaluate(&expr, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn diew_scales_by_m_per_party(m in 2usize..=8, n in 3usize..=7, g in prop::collection::vec(-2.0f64..2.0, 8)) {
        let g = &g[..m];
        let hi = diew_bound_binary(n, m, g).unwrap();
        let lo = diew_bound_binary(n - 1, m, g).unwrap();
        prop_assert!((hi - m as f64 * lo).abs() <= 1e-12 * hi.abs().max(1.0));
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-6;
    let cases = [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2)];
    for point in 0..50 {
        let (n, m) = cases[point % cases.len()];
        let expr = if point % 2 == 0 {
            BellExpression::omega(Scenario::new(n, m, 2).unwrap())
        } else {
            let g: Vec<f64> = (0..m).map(|s| (s as f64 * 0.37).sin() + 0.2).collect();
            BellExpression::general(Scenario::new(n, m, 2).unwrap(), CoefficientFunction::product(&g, 2).unwrap()).unwrap()
        };
        let a = PhaseAssignment::random(n, m, &mut rng).unwrap();
        let grad = quantum_gradient(&expr, &a).unwrap();
        for i in 0..n {
            for s in 0..m {
                let shifted = |d: f64| {
                    let mut phi = a.phases().to_vec();
                    phi[i][s] += d;
                    quantum_value(&expr, &PhaseAssignment::new(phi).unwrap(), None).unwrap().value
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                assert!((fd - grad[i][s]).abs() < 1e-5, "point {point}: {fd} vs {}", grad[i][s]);
            }
        }
    }
}

#[test]
fn spectral_formula_matches_numerics_for_random_pairs() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for m in 2..=8 {
        for _ in 0..100 {
            let g: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let spec = CirculantSpec::from_mask(g, rng.random_range(0..1u64 << m)).unwrap();
            let (matrix, data) = circulant_matrix(&spec).unwrap();
            let mut numeric: Vec<f64> = matrix.complex_eigenvalues().iter().map(|l| l.norm()).collect();
            let mut closed: Vec<f64> = data.eigenvalues.iter().map(|l| l.norm()).collect();
            numeric.sort_by(|a, b| b.total_cmp(a));
            closed.sort_by(|a, b| b.total_cmp(a));
            for ((a, b), c) in numeric.iter().zip(&closed).zip(&data.singular_values) {
                assert!((a - b).abs() < 1e-9 && (b - c).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn signed_sum_max_handles_eta_equal_to_m() {
    for m in (3..=15).step_by(2) {
        let j = (m - 1) / 2;
        assert!((lemma1_max(m, j).unwrap() - m as f64).abs() < 1e-12);
    }
}

/// Exhaustive check that no deterministic behavior dips below the local bound.
#[test]
fn deterministic_behaviors_respect_local_bound() {
    for (n, m, k) in [(2, 2, 3), (2, 3, 2), (3, 2, 2)] {
        let s = Scenario::new(n, m, k).unwrap();
        let f = CoefficientFunction::from_fn(m, k, |a, b| ((a * 7 + b * 3) % 5) as f64 - 2.0).unwrap();
        let expr = BellExpression::general(s, f).unwrap();
        let bound = local_bound(&expr).unwrap().value.as_f64();
        let per_party = k.pow(m as u32);
        let mut reached = false;
        for code in 0..per_party.pow(n as u32) {
            let responses: Vec<Vec<usize>> = (0..n)
                .map(|i| {
                    let c = code / per_party.pow(i as u32) % per_party;
                    (0..m).map(|x| c / k.pow(x as u32) % k).collect()
                })
                .collect();
            let v = evaluate(&expr, &Behavior::deterministic(s, &responses).unwrap()).unwrap();
            assert!(v >= bound - 1e-12);
            reached |= (v - bound).abs() < 1e-12;
        }
        assert!(reached);
    }
}
