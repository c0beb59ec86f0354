mod common;

use common::min_cost::{check_optimal, crafted_pool, partition, training};
use fondgen::features::{parse_feature, PoolConfig};
use fondgen::learner::{build_theory, learn_policy, pool_for, solve_min_cost, LearnError, LearnOptions, Mode, Variant};
use fondgen::verifier::verify_policy;
use fondgen_benchmarks as bench;

#[test]
fn optimum_matches_brute_force_on_acrobatics() {
    let parts = vec![partition(&bench::acrobatics(1)), partition(&bench::acrobatics(2))];
    let pool = crafted_pool(&parts, &["bool:nullary(up)", "bool:nullary(broken-leg)", "num:dist(position_0,next-fwd_0_1,position_G_0)"], 3, 12);
    assert!(check_optimal(&parts, &pool, Mode::State) > 0);
}

#[test]
fn optimum_matches_brute_force_on_cascade() {
    let parts = vec![partition(&bench::cascade(3)), partition(&bench::cascade(4))];
    let pool = crafted_pool(&parts, &[], 3, 15);
    check_optimal(&parts, &pool, Mode::State);
    check_optimal(&parts, &pool, Mode::Transition);
}

#[test]
fn optimum_matches_brute_force_on_chain_and_detour() {
    let parts = vec![partition(&bench::chain(3)), partition(&bench::chain(4))];
    let pool = crafted_pool(&parts, &[], 4, 15);
    check_optimal(&parts, &pool, Mode::State);
    let parts = vec![partition(&bench::detour())];
    let pool = crafted_pool(&parts, &[], 3, 15);
    check_optimal(&parts, &pool, Mode::State);
}

#[test]
fn cost_bound_is_strict() {
    let parts = vec![partition(&bench::acrobatics(1)), partition(&bench::acrobatics(2))];
    let pool = crafted_pool(&parts, &["bool:nullary(up)", "bool:nullary(broken-leg)", "num:dist(position_0,next-fwd_0_1,position_G_0)"], 3, 12);
    let theory = build_theory(&parts, &pool, Variant::SafeLabeled, Mode::State).unwrap();
    let best = solve_min_cost(&theory, None).unwrap().unwrap();
    assert_eq!(solve_min_cost(&theory, Some(best.cost)).unwrap(), None);
    assert_eq!(solve_min_cost(&theory, Some(best.cost + 1)).unwrap().unwrap().cost, best.cost);
}

#[test]
fn missing_features_make_the_theory_unsatisfiable() {
    let parts = vec![partition(&bench::acrobatics(2))];
    let pool = vec![parse_feature("bool:nullary(broken-leg)").unwrap()];
    let theory = build_theory(&parts, &pool, Variant::Ranked, Mode::State).unwrap();
    assert_eq!(solve_min_cost(&theory, None).unwrap(), None);
    let tr = training(&[bench::acrobatics(2)]);
    assert_eq!(learn_policy(&tr, &pool, &LearnOptions::default()).unwrap_err(), LearnError::Infeasible);
}

#[test]
fn goal_only_training_set_has_nothing_to_learn() {
    let parts = vec![partition(&bench::chain(1))];
    let pool = vec![parse_feature("num:count(at_0)").unwrap()];
    assert_eq!(build_theory(&parts, &pool, Variant::Ranked, Mode::State).unwrap_err(), LearnError::EmptyAliveSet);
    let learned = learn_policy(&training(&[bench::chain(1)]), &pool, &LearnOptions::default()).unwrap();
    assert!(learned.policy.rules.is_empty());
}

#[test]
fn literal_budget_is_enforced() {
    let tr = training(&[bench::acrobatics(2)]);
    let pool = pool_for(&tr, &PoolConfig::new(3)).unwrap();
    let options = LearnOptions { max_literals: Some(10), ..Default::default() };
    assert!(matches!(learn_policy(&tr, &pool, &options), Err(LearnError::TheoryTooLarge { limit: 10, .. })));
}

#[test]
fn acrobatics_policy_generalizes() {
    let tr = training(&(1..=3).map(bench::acrobatics).collect::<Vec<_>>());
    let pool = pool_for(&tr, &PoolConfig::new(3)).unwrap();
    for variant in [Variant::SafeLabeled, Variant::Ranked] {
        let learned = learn_policy(&tr, &pool, &LearnOptions { variant, ..Default::default() }).unwrap();
        assert_eq!(learned.policy.features.len(), 3);
        for n in 4..=10 {
            let v = verify_policy(&learned.policy, &partition(&bench::acrobatics(n)).model).unwrap();
            assert!(v.solved, "{variant} acrobatics-{n}: {}", v.reason);
        }
    }
}

#[test]
fn wcnf_header_counts_clauses() {
    let parts = vec![partition(&bench::chain(3))];
    let pool = crafted_pool(&parts, &[], 3, 6);
    let theory = build_theory(&parts, &pool, Variant::Ranked, Mode::State).unwrap();
    let text = theory.to_wcnf();
    let header = text.lines().find(|l| l.starts_with("p wcnf")).unwrap();
    let fields: Vec<u64> = header.split_whitespace().skip(2).map(|x| x.parse().unwrap()).collect();
    let body = text.lines().filter(|l| !l.starts_with('c') && !l.starts_with('p')).count() as u64;
    assert_eq!(fields[1], body);
    assert_eq!(fields[0], theory.num_vars as u64);
    assert!(text.lines().filter(|l| !l.starts_with('c') && !l.starts_with('p')).all(|l| l.ends_with(" 0")));
}
