use paymin::exact::{extend_to_mechanism, solve_payment_lp, synthesize, EnumerationOracle};
use paymin::instances::{random_instance, scalar_profile, single_item, vertex_cover, weighted};
use paymin::plugins::{
    bufl_cmlp_encode, coverage_cmlp, harmonic, set_cover_greedy, set_cover_lp, BuflSpec, SetCoverApprox, SingleItem,
    VertexCoverApprox,
};
use paymin::relax::{
    convex_decompose, relaxed_bound_estimates, round_bufl, round_single_dim, solve_relaxed_lp, EnumerationApprox,
    ExactUflDecomposer, FracAllocation,
};
use paymin::verify::{check_lp_pair, check_robust_bic_ir, expected_disutility};
use paymin::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn point(v: &[Rational]) -> FracAllocation {
    FracAllocation(v.iter().map(|x| vec![x.clone()]).collect())
}

#[test]
fn decomposition_examples() {
    let problem = single_item(2);
    let lp = coverage_cmlp(&problem).unwrap();
    let approx = SingleItem { n: 2 };
    let half = point(&[r(1, 2), r(1, 2)]);
    let d = convex_decompose(&lp, &half, &Rational::one(), &approx).unwrap();
    assert_eq!(d.atoms.len(), 2);
    assert!(d.atoms.iter().all(|(a, w)| *w == r(1, 2) && a.object_count() == 1));
    let d = convex_decompose(&lp, &half, &Rational::from(2), &approx).unwrap();
    assert_eq!(d.atoms.len(), 1);
    assert_eq!(d.atoms[0].0.object_count(), 2);
    let unit = point(&[r(0, 1), r(1, 1)]);
    let d = convex_decompose(&lp, &unit, &Rational::one(), &approx).unwrap();
    assert_eq!(d.atoms, vec![(unit.to_allocation().unwrap(), Rational::one())]);
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| r(rng.gen_range(0..=4), 4)).collect()
}

#[test]
fn random_decompositions_meet_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 100 {
        let (problem, approx, rho): (_, Box<dyn paymin::relax::LpRelativeApprox>, Rational) = match checked % 4 {
            0 => (single_item(3), Box::new(SingleItem { n: 3 }), Rational::one()),
            1 => (single_item(3), Box::new(SingleItem { n: 3 }), Rational::from(2)),
            2 => {
                let p = vertex_cover(3, &[(0, 1), (1, 2)]).unwrap();
                let omega = p.enumerate_allocations(1 << 20).unwrap();
                let a = EnumerationApprox::new(&p, &omega, Rational::one());
                (p, Box::new(a), Rational::one())
            }
            _ => {
                let edges = vec![(0, 1), (1, 2), (0, 2)];
                (vertex_cover(3, &edges).unwrap(), Box::new(VertexCoverApprox { nodes: 3, edges }), Rational::from(2))
            }
        };
        let lp = coverage_cmlp(&problem).unwrap();
        let x = point(&random_point(&mut rng, 3));
        if !lp.contains(&x).unwrap() {
            continue;
        }
        let d = convex_decompose(&lp, &x, &rho, approx.as_ref()).unwrap();
        assert!(d.total_weight().is_one());
        let want: Vec<Rational> = x.flat().iter().map(|v| (&rho * v).min(Rational::one())).collect();
        assert_eq!(d.marginal(&[1, 1, 1]).flat(), want);
        let public: Rational = d.atoms.iter().map(|(a, w)| w * lp.public_cost(&FracAllocation::from_allocation(a, &[1, 1, 1])).unwrap()).sum();
        assert!(public <= &rho * lp.public_cost(&x).unwrap());
        checked += 1;
    }
}

#[test]
fn relaxation_never_exceeds_exact() {
    for seed in 0..80 {
        let inst = random_instance(seed, 4);
        let Ok(lp) = coverage_cmlp(&inst.problem) else { continue };
        let s = synthesize(&inst.problem, &inst.distribution, &inst.kappa, &vec![]).unwrap();
        let relaxed = solve_relaxed_lp(&lp, &s.support, &inst.kappa).unwrap();
        assert!(check_lp_pair(&s.support, &relaxed).is_none(), "{}", inst.label);
        assert!(relaxed.value <= s.pair.value, "{}: {} > {}", inst.label, relaxed.value, s.pair.value);
        if inst.label.starts_with("single-item") {
            assert_eq!(relaxed.value, s.pair.value, "{}", inst.label);
        }
    }
}

#[test]
fn triangle_relaxation_uses_half_point() {
    let edges = vec![(0, 1), (1, 2), (0, 2)];
    let problem = vertex_cover(3, &edges).unwrap();
    let lp = coverage_cmlp(&problem).unwrap();
    let half = point(&[r(1, 2), r(1, 2), r(1, 2)]);
    assert!(lp.contains(&half).unwrap());
    let d = weighted(&problem, vec![(scalar_profile(&[1, 1, 1]), 1), (scalar_profile(&[2, 1, 3]), 1)]).unwrap();
    let support = relaxed_bound_estimates(&lp, &d, &Rational::zero(), &vec![]).unwrap();
    let relaxed = solve_relaxed_lp(&lp, &support, &Rational::zero()).unwrap();
    let omega = problem.enumerate_allocations(1 << 20).unwrap();
    let exact = solve_payment_lp(&problem, &support, &Rational::zero(), &EnumerationOracle::new(&problem, &omega)).unwrap();
    assert!(relaxed.value <= exact.value);
}

fn check_rounding(
    problem: &paymin::model::CoveringProblem,
    dist: &paymin::model::SupportedDistribution,
    rho: &Rational,
    approx: &dyn paymin::relax::LpRelativeApprox,
) {
    let lp = coverage_cmlp(problem).unwrap();
    let support = relaxed_bound_estimates(&lp, dist, &Rational::zero(), &vec![]).unwrap();
    let relaxed = solve_relaxed_lp(&lp, &support, &Rational::zero()).unwrap();
    let rounded = round_single_dim(&lp, &relaxed, &support, rho, approx).unwrap();
    for (q, p) in rounded.pair.p.iter().flatten().zip(relaxed.p.iter().flatten()) {
        assert!(*q <= rho * p);
    }
    assert!(check_lp_pair(&support, &rounded.pair).is_none());
    let omega = problem.enumerate_allocations(1 << 20).unwrap();
    let mech = extend_to_mechanism(&rounded.pair, &support, problem, &omega).unwrap();
    assert!(check_robust_bic_ir(&mech, &support).unwrap().passed());
    let value = expected_disutility(&mech, dist, &Rational::zero()).unwrap();
    assert!(value <= rho * &relaxed.value);
}

#[test]
fn vertex_cover_rounding_at_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let edges = vec![(0, 1), (1, 2), (0, 2)];
    let problem = vertex_cover(3, &edges).unwrap();
    let approx = VertexCoverApprox { nodes: 3, edges };
    for _ in 0..8 {
        let rows = (0..rng.gen_range(1..=3))
            .map(|_| (scalar_profile(&[rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(0..5)]), rng.gen_range(1..4)))
            .collect::<std::collections::BTreeMap<_, _>>()
            .into_iter()
            .collect();
        let d = weighted(&problem, rows).unwrap();
        check_rounding(&problem, &d, &Rational::from(2), &approx);
    }
}

#[test]
fn set_cover_rounding_at_harmonic() {
    let sets = vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![2]];
    let problem = paymin::instances::set_cover(3, &sets).unwrap();
    let approx = SetCoverApprox { universe: 3, sets: sets.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let costs: Vec<Rational> = (0..4).map(|_| Rational::from(rng.gen_range(0..6))).collect();
        let chosen = set_cover_greedy(3, &sets, &costs).unwrap();
        let cost: Rational = chosen.iter().map(|&k| costs[k].clone()).sum();
        assert!(cost <= harmonic(3) * set_cover_lp(3, &sets, &costs).unwrap());
    }
    let d = weighted(&problem, vec![(scalar_profile(&[2, 1, 1, 1]), 1), (scalar_profile(&[1, 3, 1, 2]), 2)]).unwrap();
    check_rounding(&problem, &d, &harmonic(3), &approx);
}

#[test]
fn facility_rounding_keeps_marginals() {
    let spec = BuflSpec {
        owners: vec![vec![0], vec![1], vec![2]],
        distance: vec![vec![r(1, 1), r(3, 1)], vec![r(3, 1), r(1, 1)], vec![r(2, 1), r(2, 1)]],
        budget: Some(r(5, 1)),
    };
    let problem = spec.problem().unwrap();
    let lp = bufl_cmlp_encode(&spec).unwrap();
    let d = weighted(&problem, vec![(scalar_profile(&[1, 2, 1]), 1), (scalar_profile(&[3, 1, 1]), 1)]).unwrap();
    let kappa = Rational::one();
    let support = relaxed_bound_estimates(&lp, &d, &kappa, &vec![]).unwrap();
    let relaxed = solve_relaxed_lp(&lp, &support, &kappa).unwrap();
    let rounded = round_bufl(&problem, &relaxed, &ExactUflDecomposer).unwrap();
    assert_eq!(rounded.pair.p, relaxed.p);
    for rep in &rounded.assignment {
        assert!(rep.fractional <= r(5, 1));
    }
    let omega = problem.enumerate_allocations(1 << 20).unwrap();
    let mech = extend_to_mechanism(&rounded.pair, &support, &problem, &omega).unwrap();
    assert!(check_robust_bic_ir(&mech, &support).unwrap().passed());
    eprintln!("budget factor {:?}", rounded.budget_factor());
}
