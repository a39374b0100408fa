//! Built-in instances and their published optimal allocations.

use mabarc_core::instance::{catalog, catalog_get};
use mabarc_core::oracle::{optimal_allocation, OracleConfig};
use mabarc_core::{ActiveSet, PairMatrix};

fn plan_of(name: &str, param: Option<f64>) -> mabarc_core::oracle::Plan {
    optimal_allocation(&catalog_get(name, param).unwrap(), &OracleConfig::default()).unwrap()
}

fn assert_w(name: &str, param: Option<f64>, expected: &[Vec<f64>]) {
    let plan = plan_of(name, param);
    let expected = PairMatrix::from_rows(expected).unwrap();
    let err = plan.allocation.matrix().max_abs_diff(&expected);
    assert!(err <= 1e-7, "{name}({param:?}): error {err}\n{}", plan.allocation.matrix());
}

#[test]
fn weighted_tables_are_exact() {
    let nominal = [[3.0, 1.0, 1.0], [0.0, 0.5, 0.0], [0.0, 0.0, 2.0]];
    for e in catalog() {
        let inst = catalog_get(e.name, None).unwrap();
        let g = inst.weighted_means();
        // μ = G / p with p = 1/|C|, so G = p·μ reproduces the table to one ulp.
        for ((k, c), v) in g.iter_pairs() {
            let back = inst.probs()[c] * inst.means()[(k, c)];
            assert!((back - v).abs() <= f64::EPSILON * v.abs().max(1.0));
        }
        if e.name == "nu0" {
            for ((k, c), v) in g.iter_pairs() {
                assert!((v - nominal[k][c]).abs() <= 4.0 * f64::EPSILON * v.max(1.0));
            }
            assert_eq!(inst.thresholds(), &[1.0, 0.25, 1.0]);
        }
    }
}

#[test]
fn simulation_instance() {
    assert_w("nu_sim", None, &[vec![1.0, 0.5, 0.5], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.5]]);
    assert!((plan_of("nu_sim", None).f_star - 5.25).abs() < 1e-9);
}

#[test]
fn perturbed_instances_follow_closed_forms() {
    for eps in [0.01, 0.1, 0.2, 0.24] {
        let plus = [
            vec![1.0, (1.0 + 2.0 * eps) / (2.0 * (1.0 + eps)), 0.0],
            vec![0.0, 1.0 / (2.0 * (1.0 + eps)), 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert_w("nu_plus", Some(eps), &plus);
        let minus = [
            vec![1.0, (1.0 - 2.0 * eps) / (2.0 * (1.0 - eps)), 0.0],
            vec![0.0, 1.0 / (2.0 * (1.0 - eps)), 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert_w("nu_minus", Some(eps), &minus);
    }
}

#[test]
fn lower_bound_alternative() {
    for eps in [0.1, 0.5, 1.0] {
        assert_w(
            "nu_prime_lb",
            Some(eps),
            &[vec![1.0, 0.5, 0.5], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.5]],
        );
    }
    let plan = plan_of("nu_prime_lb", None);
    assert_eq!(plan.active_set, ActiveSet::from_one_based(&[2, 3], &[(2, 1), (2, 3), (3, 1), (3, 2)]));
}

#[test]
fn non_saturating_instance() {
    let plan = plan_of("nu_prime_ns", None);
    assert_w("nu_prime_ns", None, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
    assert!(plan.active_set.saturated_arms().is_empty());
    assert!((plan.f_star - 9.0).abs() < 1e-9);
}

#[test]
fn greedy_counterexample() {
    assert_w("greedy_ce", None, &[vec![0.0, 1.0], vec![1.0, 0.0]]);
    assert!((plan_of("greedy_ce", None).f_star - 4.0).abs() < 1e-9);
}

#[test]
fn parameters_are_range_checked() {
    assert!(catalog_get("nu_plus", Some(0.25)).is_err());
    assert!(catalog_get("nu_plus", Some(-0.1)).is_err());
    assert!(catalog_get("nu_prime_lb", Some(0.0)).is_err());
    assert!(catalog_get("nu_sim", Some(0.1)).is_err());
    assert!(catalog_get("nope", None).is_err());
    assert_eq!(catalog_get("nu_plus", None).unwrap().name(), "nu_plus(eps=0.1)");
}
