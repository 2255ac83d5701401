//! Published values and hand-derived fixtures.

use std::f64::consts::PI;

use fullcorr::analytic::{
    diew_bound_binary, g_f_i, svetlichny_bound_closed, tsirelson_bound_binary,
    tsirelson_bound_recursive,
};
use fullcorr::catalogue::known_bound_table;
use fullcorr::decompose::evaluate_decomposed;
use fullcorr::quantum::{optimize_phases, DEFAULT_MAX_ITERS};
use fullcorr::{
    classify, evaluate, local_bound, svetlichny_bound, BellExpression, Behavior, BoundKind,
    BoundReport, BoundValue, CoefficientFunction, Error, Scenario,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn omega(n: usize, m: usize, k: usize) -> BellExpression {
    BellExpression::omega(Scenario::new(n, m, k).unwrap())
}

#[test]
fn chsh_values() {
    let q = 2.0 - 2f64.sqrt();
    assert_eq!(local_bound(&omega(2, 2, 2)).unwrap().value, BoundValue::Integer(1));
    assert!((tsirelson_bound_binary(2, 2).unwrap() - q).abs() < 1e-12);
    assert!((tsirelson_bound_recursive(&Scenario::new(4, 2, 2).unwrap(), q) - 4.0 * q).abs() < 1e-12);
    assert_eq!(evaluate(&omega(2, 2, 2), &Behavior::pr_box()).unwrap(), 0.0);
    assert_eq!(evaluate(&omega(2, 2, 2), &Behavior::uniform(Scenario::new(2, 2, 2).unwrap()).unwrap()).unwrap(), 2.0);
}

#[test]
fn bipartite_local_bound_is_k_minus_one() {
    for m in 2..=4 {
        for k in 2..=5 {
            assert_eq!(local_bound(&omega(2, m, k)).unwrap().value, BoundValue::Integer(k as i64 - 1));
        }
    }
}

#[test]
fn closed_svetlichny_agrees_with_enumeration() {
    for (m, k) in [(2, 2), (3, 2), (2, 3)] {
        let bipartite = local_bound(&omega(2, m, k)).unwrap().value.as_f64();
        let closed = svetlichny_bound_closed(&Scenario::new(3, m, k).unwrap(), bipartite);
        let exact = svetlichny_bound(&omega(3, m, k)).unwrap().value;
        assert_eq!(BoundValue::Real(closed).as_f64(), exact.as_f64());
    }
}

#[test]
fn three_setting_families() {
    let b = diew_bound_binary(3, 3, &g_f_i(3)).unwrap();
    assert!((b - 3.0 * (3.0 - 3f64.sqrt())).abs() < 1e-12);
    let q = tsirelson_bound_binary(3, 3).unwrap();
    assert!((q - 9.0 * (1.0 - (PI / 6.0).cos())).abs() < 1e-12);
}

#[test]
fn catalogue_ordering_against_enumeration() {
    for (n, m) in [(3, 2), (3, 3), (4, 2)] {
        let s = Scenario::new(n, m, 2).unwrap();
        let table = known_bound_table(&s, "fI").unwrap();
        let get = |kind| table.iter().find(|r: &&BoundReport| r.kind == kind).unwrap().value.as_f64();
        let local = local_bound(&omega(n, m, 2)).unwrap().value.as_f64();
        let sv = get(BoundKind::Svetlichny);
        let bi = get(BoundKind::Biseparable);
        assert!(sv <= bi + 1e-12 && bi <= local + 1e-12, "{n},{m}: {sv} {bi} {local}");
    }
    assert!(matches!(known_bound_table(&Scenario::new(2, 2, 2).unwrap(), "cosine"), Err(Error::NoCatalogueEntry(_))));
}

#[test]
fn mermin_optimum_is_stable_across_seeds() {
    let s = Scenario::new(3, 2, 2).unwrap();
    let mermin = BellExpression::general(s, CoefficientFunction::mabk(2, 2).unwrap()).unwrap();
    let values: Vec<f64> = (0..3)
        .map(|seed| optimize_phases(&mermin, seed, 20, DEFAULT_MAX_ITERS).unwrap().value)
        .collect();
    for v in &values {
        assert!((v - values[0]).abs() < 1e-6, "{values:?}");
    }
    // E = cos of the total phase reaches all four Mermin terms at once: 2 - 1/2 * 4 = 0
    assert!(values[0].abs() < 1e-6, "{values:?}");
}

#[test]
fn decomposition_on_random_behaviors() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let expr = omega(3, 2, 2);
    for _ in 0..100 {
        let b = Behavior::random_no_signaling(expr.scenario(), &mut rng).unwrap();
        let direct = evaluate(&expr, &b).unwrap();
        let split = evaluate_decomposed(&expr, &b, 3).unwrap();
        assert!((direct - split).abs() < 1e-12);
    }
}

#[test]
fn classification_examples() {
    let expr = omega(2, 2, 2);
    let bounds = known_bound_table(&expr.scenario(), "fI").unwrap();
    let pr = classify(&expr, &Behavior::pr_box(), &bounds).unwrap();
    assert_eq!(pr.value, 0.0);
    assert!(pr.verdicts.iter().all(|v| v.violated));
    assert_eq!(
        pr.to_string(),
        "value 0.000000; violates local (margin -1.000000); violates tsirelson (margin -0.585786)"
    );
    let uniform = classify(&expr, &Behavior::uniform(expr.scenario()).unwrap(), &bounds).unwrap();
    assert!(uniform.verdicts.iter().all(|v| !v.violated));

    let svet = BoundReport::new(BoundKind::Svetlichny, BoundValue::Integer(1), fullcorr::Method::ClosedForm);
    assert!(matches!(
        classify(&expr, &Behavior::pr_box(), &[svet]),
        Err(Error::BoundExpressionMismatch(_))
    ));
}

#[test]
fn behavior_file_errors() {
    let bad = r#"{"n":2,"m":2,"k":2,"reduced":{"0,0":[0.5,0.4],"0,1":[0.5,0.5],"1,0":[0.5,0.5],"1,1":[0.5,0.5]}}"#;
    assert!(matches!(Behavior::from_json(bad), Err(Error::Normalization { .. })));
    let missing = r#"{"n":2,"m":2,"k":2,"reduced":{"0,0":[0.5,0.5]}}"#;
    assert!(matches!(Behavior::from_json(missing), Err(Error::Schema(_))));
    let b = Behavior::pr_box();
    assert_eq!(Behavior::from_json(&b.to_json()).unwrap(), b);
}
