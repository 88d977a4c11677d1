use paymin::dsicext::{solve_product_lp, synthesize_dsic, ProductSupport};
use paymin::exact::{synthesize, EnumerationOracle};
use paymin::instances::{scalar_profile, single_item, vertex_cover, weighted};
use paymin::mechanism::Mechanism;
use paymin::model::{CoveringProblem, SupportedDistribution, TypeProfile};
use paymin::verify::{check_dsic_grid, check_robust_bic_ir, expected_disutility};
use paymin::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(v: i64) -> Rational {
    Rational::from(v)
}

fn random_scalar(rng: &mut ChaCha8Rng, problem: &CoveringProblem, n: usize) -> SupportedDistribution {
    let size = rng.gen_range(1..=4);
    let mut rows: Vec<(TypeProfile, u64)> = Vec::new();
    while rows.len() < size {
        let c: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=5)).collect();
        let c = scalar_profile(&c);
        if rows.iter().all(|(d, _)| *d != c) {
            rows.push((c, rng.gen_range(1..=3)));
        }
    }
    weighted(problem, rows).unwrap()
}

fn allocation_is_monotone(mech: &Mechanism, grids: &[Vec<Vec<Rational>>]) -> bool {
    for i in 0..2 {
        let j = 1 - i;
        for other in &grids[j] {
            let mut last: Option<Rational> = None;
            for own in &grids[i] {
                let mut c = vec![Vec::new(), Vec::new()];
                c[i] = own.clone();
                c[j] = other.clone();
                let a = mech.evaluate(&TypeProfile(c)).unwrap().allocation_probability(i);
                if last.as_ref().map_or(false, |l| a > *l) {
                    return false;
                }
                last = Some(a);
            }
        }
    }
    true
}

#[test]
fn point_support_product_lp_dominates_correlated() {
    let problem = single_item(2);
    let d = weighted(&problem, vec![(scalar_profile(&[1, 2]), 1)]).unwrap();
    let omega = problem.enumerate_allocations(1 << 20).unwrap();
    let oracle = EnumerationOracle::new(&problem, &omega);
    let support = ProductSupport::new(vec![vec![r(1)], vec![r(2)]], vec![r(5), r(5)]).unwrap();
    let pair = solve_product_lp(&problem, &support, &d, &Rational::zero(), &oracle).unwrap();
    assert_eq!(pair.profiles.len(), 4);
    let exact = synthesize(&problem, &d, &Rational::zero(), &vec![(0, r(5)), (1, r(5))]).unwrap();
    assert!(pair.value >= exact.pair.value);
}

#[test]
fn zero_costs_cost_nothing() {
    let problem = single_item(2);
    let d = weighted(&problem, vec![(scalar_profile(&[0, 0]), 1)]).unwrap();
    let s = synthesize_dsic(&problem, &d, &Rational::zero(), &vec![]).unwrap();
    assert_eq!(s.pair.value, Rational::zero());
}

#[test]
fn sentinel_profile_is_unrestricted() {
    let problem = single_item(2);
    let d = weighted(&problem, vec![(scalar_profile(&[1, 2]), 1), (scalar_profile(&[3, 1]), 1)]).unwrap();
    let s = synthesize_dsic(&problem, &d, &Rational::zero(), &vec![]).unwrap();
    let m = &s.support.sentinels;
    let top = TypeProfile(vec![vec![m[0].clone()], vec![m[1].clone()]]);
    let k = s.pair.profiles.iter().position(|c| *c == top).unwrap();
    let total: Rational = s.pair.x[k].iter().map(|(_, w)| w.clone()).sum();
    assert_eq!(total, Rational::one());
}

#[test]
fn random_two_player_instances_are_dsic() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for round in 0..40 {
        let problem = if round % 2 == 0 { single_item(2) } else { vertex_cover(2, &[(0, 1)]).unwrap() };
        let d = random_scalar(&mut rng, &problem, 2);
        let kappa = Rational::zero();
        let s = synthesize_dsic(&problem, &d, &kappa, &vec![]).unwrap();
        let mech = Mechanism::Dsic(s.mechanism.clone());
        let grids = s.support.canonical_grid();
        let report = check_dsic_grid(&mech, &grids).unwrap();
        assert!(report.passed(), "round {round}: {:?}", report.violations.first());
        assert!(allocation_is_monotone(&mech, &grids), "round {round}");
        let paid = expected_disutility(&mech, &d, &kappa).unwrap();
        assert!(paid <= s.pair.value, "round {round}: {paid} > {}", s.pair.value);
    }
}

#[test]
fn robust_bic_extension_can_fail_dsic() {
    let problem = single_item(2);
    let d = weighted(&problem, vec![(scalar_profile(&[3, 1]), 1)]).unwrap();
    let s = synthesize(&problem, &d, &Rational::zero(), &vec![]).unwrap();
    let ps = ProductSupport::new(vec![vec![r(3)], vec![r(1)]], s.support.sentinels().to_vec()).unwrap();
    let grids = ps.canonical_grid();
    assert!(check_robust_bic_ir(&s.mechanism, &s.support).unwrap().passed());
    assert!(!check_dsic_grid(&s.mechanism, &grids).unwrap().passed());

    let dsic = synthesize_dsic(&problem, &d, &Rational::zero(), &vec![]).unwrap();
    assert!(check_dsic_grid(&Mechanism::Dsic(dsic.mechanism), &dsic.support.canonical_grid()).unwrap().passed());
}
