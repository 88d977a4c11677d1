//! One PASS/FAIL line per acceptance criterion.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use paymin::bounds::BoundedSupport;
use paymin::dsicext::synthesize_dsic;
use paymin::exact::{extend_to_mechanism, synthesize, synthesize_with, CmOracle, EnumerationOracle};
use paymin::instances::{procurement, procurement_costs, random_instance, scalar_profile, set_cover, single_item, vertex_cover, weighted};
use paymin::io::MechanismFile;
use paymin::lookahead::{benchmark_mechanism, build_instance, lookahead_payment_lower_bound, restricted_mechanism, LookaheadParams};
use paymin::mechanism::{enforce_ir_prob1, Mechanism};
use paymin::model::{CoveringProblem, SupportedDistribution, TypeProfile};
use paymin::plugins::{
    bufl_cmlp_encode, coverage_cmlp, harmonic, set_cover_greedy, set_cover_lp, vertex_cover_lp, vertex_cover_lp_approx, BuflSpec,
    FlowOracle, SetCoverApprox, SingleItem, VertexCoverApprox,
};
use paymin::relax::{
    convex_decompose, relaxed_bound_estimates, round_bufl, round_single_dim, solve_relaxed_lp, EnumerationApprox, ExactUflDecomposer,
    FracAllocation, LpRelativeApprox,
};
use paymin::verify::{
    brute_force_lp_opt, canonical_extra_types, check_dsic_grid, check_ir_per_realization, check_lp_pair, check_robust_bic_ir,
    expected_disutility,
};
use paymin::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Per-instance time limit for criterion 1.
const INSTANCE_LIMIT: Duration = Duration::from_secs(5);
/// Time limit for criterion 10.
const LOOKAHEAD_LIMIT: Duration = Duration::from_secs(10);
const RANDOM_INSTANCES: u64 = 200;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn profiles_to_check(support: &BoundedSupport) -> Vec<TypeProfile> {
    let mut out = support.extended_profiles().to_vec();
    for i in 0..support.n() {
        for rest in support.others(i) {
            for t in canonical_extra_types(support, i) {
                out.push(rest.with_player(i, t));
            }
        }
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let mut slowest = Duration::ZERO;
    for seed in 0..RANDOM_INSTANCES {
        let inst = random_instance(seed, 5);
        let start = Instant::now();
        let s = synthesize(&inst.problem, &inst.distribution, &inst.kappa, &vec![]).map_err(|e| format!("{}: {e}", inst.label))?;
        let took = start.elapsed();
        slowest = slowest.max(took);
        ensure(s.omega.len() <= 64, || format!("{}: |Ω| = {}", inst.label, s.omega.len()))?;
        let brute = brute_force_lp_opt(&inst.problem, &s.support, &inst.kappa, &s.omega).map_err(|e| e.to_string())?;
        ensure(brute == s.pair.value, || format!("{}: cutting planes {} vs brute force {}", inst.label, s.pair.value, brute))?;
        ensure(took < INSTANCE_LIMIT, || format!("{}: {:?}", inst.label, took))?;
    }
    Ok(format!("{RANDOM_INSTANCES} instances equal, slowest {:.2}s", slowest.as_secs_f64()))
}

fn extension_identity() -> Outcome {
    for seed in 0..RANDOM_INSTANCES {
        let inst = random_instance(seed, 5);
        let s = synthesize(&inst.problem, &inst.distribution, &inst.kappa, &vec![]).map_err(|e| e.to_string())?;
        let report = check_robust_bic_ir(&s.mechanism, &s.support).map_err(|e| e.to_string())?;
        ensure(report.passed(), || format!("{}: {:?}", inst.label, report.violations.first()))?;
        let value = expected_disutility(&s.mechanism, &inst.distribution, &inst.kappa).map_err(|e| e.to_string())?;
        ensure(value == s.pair.value, || format!("{}: disutility {} vs LP {}", inst.label, value, s.pair.value))?;
    }
    Ok(format!("{RANDOM_INSTANCES} mechanisms robust BIC/IR with disutility = OPT"))
}

fn ir_probability_one() -> Outcome {
    for seed in 0..RANDOM_INSTANCES {
        let inst = random_instance(seed, 5);
        let s = synthesize(&inst.problem, &inst.distribution, &inst.kappa, &vec![]).map_err(|e| e.to_string())?;
        let wrapped = enforce_ir_prob1(s.mechanism.clone());
        let report = check_ir_per_realization(&wrapped, &s.support).map_err(|e| e.to_string())?;
        ensure(report.passed(), || format!("{}: {:?}", inst.label, report.violations.first()))?;
        for c in profiles_to_check(&s.support) {
            let before = s.mechanism.evaluate(&c).map_err(|e| e.to_string())?;
            let after = wrapped.evaluate(&c).map_err(|e| e.to_string())?;
            ensure(before.expected_payments == after.expected_payments, || format!("{}: payments changed at {:?}", inst.label, c))?;
            for i in 0..c.n() {
                let mean: Rational = after.atoms.iter().zip(&after.realized).map(|(a, p)| &a.probability * &p[i]).sum();
                ensure(mean == after.expected_payments[i], || format!("{}: realized mean differs at {:?}", inst.label, c))?;
            }
        }
    }
    Ok(format!("{RANDOM_INSTANCES} wrapped mechanisms ex-post IR, expected payments unchanged"))
}

fn sentinel_rows() -> Outcome {
    let mut rows = 0;
    for seed in 0..RANDOM_INSTANCES {
        let inst = random_instance(seed, 5);
        let s = synthesize(&inst.problem, &inst.distribution, &inst.kappa, &vec![]).map_err(|e| e.to_string())?;
        for i in 0..s.support.n() {
            for rest in s.support.others(i) {
                let c = rest.with_player(i, s.support.sentinel_vector(i));
                let ev = s.mechanism.evaluate(&c).map_err(|e| e.to_string())?;
                ensure(ev.allocation_probability(i).is_zero(), || format!("{}: player {i} allocated at {:?}", inst.label, c))?;
                ensure(ev.expected_payments[i].is_zero(), || format!("{}: player {i} paid at {:?}", inst.label, c))?;
                rows += 1;
            }
        }
    }
    Ok(format!("{rows} sentinel rows allocate nothing and pay 0"))
}

fn point(v: &[Rational]) -> FracAllocation {
    FracAllocation(v.iter().map(|x| vec![x.clone()]).collect())
}

fn decompositions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 100 {
        let (problem, approx, rho): (CoveringProblem, Box<dyn LpRelativeApprox>, Rational) = match checked % 4 {
            0 => (single_item(3), Box::new(SingleItem { n: 3 }), Rational::one()),
            1 => (single_item(3), Box::new(SingleItem { n: 3 }), Rational::from(2)),
            2 => {
                let p = vertex_cover(3, &[(0, 1), (1, 2)]).map_err(|e| e.to_string())?;
                let omega = p.enumerate_allocations(1 << 20).map_err(|e| e.to_string())?;
                let a = EnumerationApprox::new(&p, &omega, Rational::one());
                (p, Box::new(a), Rational::one())
            }
            _ => {
                let edges = vec![(0, 1), (1, 2), (0, 2)];
                (vertex_cover(3, &edges).map_err(|e| e.to_string())?, Box::new(VertexCoverApprox { nodes: 3, edges }), Rational::from(2))
            }
        };
        let lp = coverage_cmlp(&problem).map_err(|e| e.to_string())?;
        let x = point(&(0..3).map(|_| r(rng.gen_range(0..=4), 4)).collect::<Vec<_>>());
        if !lp.contains(&x).map_err(|e| e.to_string())? {
            continue;
        }
        let d = convex_decompose(&lp, &x, &rho, approx.as_ref()).map_err(|e| format!("{:?}: {e}", x))?;
        ensure(d.total_weight().is_one(), || format!("{:?}: weights sum to {}", x, d.total_weight()))?;
        let want: Vec<Rational> = x.flat().iter().map(|v| (&rho * v).min(Rational::one())).collect();
        ensure(d.marginal(&[1, 1, 1]).flat() == want, || format!("{:?}: marginal mismatch", x))?;
        let public: Rational = d
            .atoms
            .iter()
            .map(|(a, w)| w * lp.public_cost(&FracAllocation::from_allocation(a, &[1, 1, 1])).unwrap_or_default())
            .sum();
        ensure(public <= &rho * lp.public_cost(&x).map_err(|e| e.to_string())?, || format!("{:?}: public cost", x))?;
        checked += 1;
    }
    Ok(format!("{checked} points decomposed exactly"))
}

fn check_rounding(problem: &CoveringProblem, d: &SupportedDistribution, rho: &Rational, approx: &dyn LpRelativeApprox) -> Result<(), String> {
    let err = |e: paymin::Error| e.to_string();
    let lp = coverage_cmlp(problem).map_err(err)?;
    let zero = Rational::zero();
    let support = relaxed_bound_estimates(&lp, d, &zero, &vec![]).map_err(err)?;
    let relaxed = solve_relaxed_lp(&lp, &support, &zero).map_err(err)?;
    let rounded = round_single_dim(&lp, &relaxed, &support, rho, approx).map_err(err)?;
    for (q, p) in rounded.pair.p.iter().flatten().zip(relaxed.p.iter().flatten()) {
        ensure(*q <= rho * p, || format!("q {} > ρ·p {}", q, rho * p))?;
    }
    if let Some(why) = check_lp_pair(&support, &rounded.pair) {
        return Err(why);
    }
    let omega = problem.enumerate_allocations(1 << 20).map_err(err)?;
    let mech = extend_to_mechanism(&rounded.pair, &support, problem, &omega).map_err(err)?;
    let report = check_robust_bic_ir(&mech, &support).map_err(err)?;
    ensure(report.passed(), || format!("{:?}", report.violations.first()))?;
    let value = expected_disutility(&mech, d, &zero).map_err(err)?;
    ensure(value <= rho * &relaxed.value, || format!("disutility {} > ρ·OPT {}", value, rho * &relaxed.value))
}

fn rounding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let edges = vec![(0, 1), (1, 2), (0, 2)];
    let vc = vertex_cover(3, &edges).map_err(|e| e.to_string())?;
    let vc_approx = VertexCoverApprox { nodes: 3, edges: edges.clone() };
    let sets = vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![2]];
    let sc = set_cover(3, &sets).map_err(|e| e.to_string())?;
    let sc_approx = SetCoverApprox { universe: 3, sets: sets.clone() };
    let mut instances = 0;
    for round in 0..12 {
        let (problem, approx, rho, n): (&CoveringProblem, &dyn LpRelativeApprox, Rational, usize) =
            if round % 2 == 0 { (&vc, &vc_approx, Rational::from(2), 3) } else { (&sc, &sc_approx, harmonic(3), 4) };
        let mut rows: Vec<(TypeProfile, u64)> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let c = scalar_profile(&(0..n).map(|_| rng.gen_range(0..5)).collect::<Vec<_>>());
            if rows.iter().all(|(d, _)| *d != c) {
                rows.push((c, rng.gen_range(1..4)));
            }
        }
        let d = weighted(problem, rows).map_err(|e| e.to_string())?;
        check_rounding(problem, &d, &rho, approx).map_err(|e| format!("round {round}: {e}"))?;
        instances += 1;
    }
    for _ in 0..50 {
        let costs: Vec<Rational> = (0..3).map(|_| Rational::from(rng.gen_range(0..6))).collect();
        let cover = vertex_cover_lp_approx(3, &edges, &costs).map_err(|e| e.to_string())?;
        let cost: Rational = cover.iter().zip(&costs).filter(|(b, _)| **b).map(|(_, c)| c.clone()).sum();
        let (lp, _) = vertex_cover_lp(3, &edges, &costs).map_err(|e| e.to_string())?;
        ensure(cost <= Rational::from(2) * &lp, || format!("vertex cover {} > 2·{}", cost, lp))?;
        let costs: Vec<Rational> = (0..4).map(|_| Rational::from(rng.gen_range(0..6))).collect();
        let chosen = set_cover_greedy(3, &sets, &costs).map_err(|e| e.to_string())?;
        let cost: Rational = chosen.iter().map(|&k| costs[k].clone()).sum();
        let lp = set_cover_lp(3, &sets, &costs).map_err(|e| e.to_string())?;
        ensure(cost <= harmonic(3) * &lp, || format!("set cover {} > H·{}", cost, lp))?;
    }
    Ok(format!("{instances} rounded instances (vertex cover ρ=2, set cover ρ=H_3), 100 approximation checks"))
}

fn supply_shapes(n: usize, items: usize) -> Vec<Vec<Vec<u32>>> {
    let cells = n * items;
    (0..3usize.pow(cells as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    (0..items)
                        .map(|_| {
                            let v = (code % 3) as u32;
                            code /= 3;
                            v
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn flow_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    for n in 1..=3 {
        for items in 1..=3 {
            let shapes = supply_shapes(n, items);
            // Every shape for the small grids, a fixed random sample of the larger ones.
            let take = if n * items <= 4 { shapes.len() } else { 60 };
            for s in 0..take {
                let supply = if take == shapes.len() { shapes[s].clone() } else { shapes[rng.gen_range(0..shapes.len())].clone() };
                let totals: Vec<u32> = (0..items).map(|l| supply.iter().map(|row| row[l]).sum()).collect();
                let demand: Vec<u32> = totals.iter().map(|&t| rng.gen_range(0..=t)).collect();
                let problem = procurement(&supply, &demand).map_err(|e| e.to_string())?;
                let per_item: Vec<Vec<Rational>> = (0..n).map(|_| (0..items).map(|_| Rational::from(rng.gen_range(0..6))).collect()).collect();
                let c = procurement_costs(&supply, &per_item);
                let omega = problem.enumerate_allocations(1 << 20).map_err(|e| e.to_string())?;
                let flow = FlowOracle::new(&problem).map_err(|e| e.to_string())?.minimize(&c).map_err(|e| e.to_string())?;
                let brute = EnumerationOracle::new(&problem, &omega).minimize(&c).map_err(|e| e.to_string())?;
                ensure(c.total_cost(&flow) == c.total_cost(&brute) && problem.is_feasible(&flow), || {
                    format!("supply {:?} demand {:?}: flow {} vs enumeration {}", supply, demand, c.total_cost(&flow), c.total_cost(&brute))
                })?;
                compared += 1;
            }
        }
    }
    let supply = vec![vec![1, 1], vec![1, 1], vec![1, 0]];
    let problem = procurement(&supply, &[1, 1]).map_err(|e| e.to_string())?;
    let d = weighted(
        &problem,
        vec![
            (procurement_costs(&supply, &[vec![r(1, 1), r(2, 1)], vec![r(2, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]]), 1),
            (procurement_costs(&supply, &[vec![r(2, 1), r(2, 1)], vec![r(1, 1), r(3, 1)], vec![r(2, 1), r(0, 1)]]), 1),
        ],
    )
    .map_err(|e| e.to_string())?;
    let omega = problem.enumerate_allocations(1 << 20).map_err(|e| e.to_string())?;
    let oracle = FlowOracle::new(&problem).map_err(|e| e.to_string())?;
    let s = synthesize_with(&problem, &d, &Rational::zero(), &vec![], omega, &oracle).map_err(|e| e.to_string())?;
    let report = check_robust_bic_ir(&s.mechanism, &s.support).map_err(|e| e.to_string())?;
    ensure(report.passed(), || format!("{:?}", report.violations.first()))?;
    let value = expected_disutility(&s.mechanism, &d, &Rational::zero()).map_err(|e| e.to_string())?;
    ensure(value == s.pair.value, || format!("disutility {} vs {}", value, s.pair.value))?;
    Ok(format!("{compared} flow/enumeration comparisons; flow-driven mechanism passes BIC/IR with disutility = OPT"))
}

fn line_metric(rng: &mut ChaCha8Rng, facilities: usize, clients: usize) -> Vec<Vec<Rational>> {
    let f: Vec<i64> = (0..facilities).map(|_| rng.gen_range(0..6)).collect();
    let c: Vec<i64> = (0..clients).map(|_| rng.gen_range(0..6)).collect();
    f.iter().map(|a| c.iter().map(|b| Rational::from((a - b).abs())).collect()).collect()
}

fn bufl() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut specs = vec![BuflSpec {
        owners: vec![vec![0], vec![1], vec![2]],
        distance: vec![vec![r(1, 1), r(3, 1)], vec![r(3, 1), r(1, 1)], vec![r(2, 1), r(2, 1)]],
        budget: Some(r(5, 1)),
    }];
    while specs.len() < 6 {
        let distance = line_metric(&mut rng, 3, 2);
        let nearest: Rational = (0..2).map(|j| distance.iter().map(|row| row[j].clone()).max().unwrap_or_default()).sum();
        specs.push(BuflSpec { owners: vec![vec![0], vec![1], vec![2]], distance, budget: Some(nearest + Rational::one()) });
    }
    let kappa = Rational::one();
    let mut profiles = 0;
    for (k, spec) in specs.iter().enumerate() {
        let problem = spec.problem().map_err(|e| e.to_string())?;
        let lp = bufl_cmlp_encode(spec).map_err(|e| e.to_string())?;
        let mut rows: Vec<(TypeProfile, u64)> = Vec::new();
        for _ in 0..2 {
            let c = scalar_profile(&(0..3).map(|_| rng.gen_range(0..4)).collect::<Vec<_>>());
            if rows.iter().all(|(d, _)| *d != c) {
                rows.push((c, 1));
            }
        }
        let d = weighted(&problem, rows).map_err(|e| e.to_string())?;
        let support = relaxed_bound_estimates(&lp, &d, &kappa, &vec![]).map_err(|e| e.to_string())?;
        let relaxed = solve_relaxed_lp(&lp, &support, &kappa).map_err(|e| e.to_string())?;
        let rounded = round_bufl(&problem, &relaxed, &ExactUflDecomposer).map_err(|e| format!("spec {k}: {e}"))?;
        let budget = spec.budget.clone().unwrap_or_default();
        for (c, a) in rounded.pair.profiles.iter().zip(&rounded.assignment) {
            ensure(a.fractional <= budget, || format!("spec {k} {:?}: fractional {} > B {}", c, a.fractional, budget))?;
            ensure(a.rounded <= budget, || format!("spec {k} {:?}: rounded {} > B {}", c, a.rounded, budget))?;
            profiles += 1;
        }
        let omega = problem.enumerate_allocations(1 << 20).map_err(|e| e.to_string())?;
        let mech = extend_to_mechanism(&rounded.pair, &support, &problem, &omega).map_err(|e| e.to_string())?;
        let report = check_robust_bic_ir(&mech, &support).map_err(|e| e.to_string())?;
        ensure(report.passed(), || format!("spec {k}: {:?}", report.violations.first()))?;
    }
    Ok(format!("{} instances, {profiles} profiles with assignment cost ≤ B at ρ=1", specs.len()))
}

fn dsic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut solved = 0;
    for round in 0..30 {
        let problem = if round % 2 == 0 { single_item(2) } else { vertex_cover(2, &[(0, 1)]).map_err(|e| e.to_string())? };
        let mut rows: Vec<(TypeProfile, u64)> = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let c = scalar_profile(&[rng.gen_range(0..=5), rng.gen_range(0..=5)]);
            if rows.iter().all(|(d, _)| *d != c) {
                rows.push((c, rng.gen_range(1..=3)));
            }
        }
        let d = weighted(&problem, rows).map_err(|e| e.to_string())?;
        let s = synthesize_dsic(&problem, &d, &Rational::zero(), &vec![]).map_err(|e| e.to_string())?;
        let mech = Mechanism::Dsic(s.mechanism.clone());
        let grids = s.support.canonical_grid();
        let report = check_dsic_grid(&mech, &grids).map_err(|e| e.to_string())?;
        ensure(report.passed(), || format!("round {round}: {:?}", report.violations.first()))?;
        for i in 0..2 {
            for other in &grids[1 - i] {
                let mut last: Option<Rational> = None;
                for own in &grids[i] {
                    let mut c = vec![Vec::new(), Vec::new()];
                    c[i] = own.clone();
                    c[1 - i] = other.clone();
                    let a = mech.evaluate(&TypeProfile(c)).map_err(|e| e.to_string())?.allocation_probability(i);
                    ensure(last.as_ref().map_or(true, |l| a <= *l), || format!("round {round}: player {i} not monotone"))?;
                    last = Some(a);
                }
            }
        }
        let paid = expected_disutility(&mech, &d, &Rational::zero()).map_err(|e| e.to_string())?;
        ensure(paid <= s.pair.value, || format!("round {round}: {} > {}", paid, s.pair.value))?;
        solved += 1;
    }
    Ok(format!("{solved} two-player instances DSIC and monotone on the canonical grid, payment ≤ product LP"))
}

fn lookahead() -> Outcome {
    let start = Instant::now();
    let params = LookaheadParams::new(Rational::from(100), Rational::one(), r(1, 100), 3);
    let inst = build_instance(&params).map_err(|e| e.to_string())?;
    let (_, benchmark) = benchmark_mechanism(&inst).map_err(|e| e.to_string())?;
    ensure(benchmark == r(101, 100), || format!("benchmark pays {}", benchmark))?;
    let restricted = restricted_mechanism(&inst).map_err(|e| e.to_string())?.pair.value;
    ensure(restricted >= r(99, 2), || format!("lookahead pays {} < 99/2", restricted))?;
    let bound = lookahead_payment_lower_bound(&params).map_err(|e| e.to_string())?;
    ensure(bound == r(99, 2), || format!("bound {}", bound))?;
    let ratio = &restricted / &benchmark;
    ensure(ratio >= r(4950, 101), || format!("ratio {}", ratio))?;
    let took = start.elapsed();
    ensure(took < LOOKAHEAD_LIMIT, || format!("took {:?}", took))?;
    Ok(format!("benchmark 101/100, lookahead {restricted}, ratio {ratio} in {:.2}s", took.as_secs_f64()))
}

fn instance_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("paymin-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for name in ["single_item.json", "vertex_cover.json", "table.json"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.join(format!("{name}.{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_paymin"))
                .arg("solve")
                .arg(instance_path(name))
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), || format!("{name}: exit {:?}", status.status.code()))?;
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], || format!("{name}: mechanism JSON differs between runs"))?;
        let file = MechanismFile::from_json(std::str::from_utf8(&outputs[0]).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let support = file.support.clone().ok_or("no support in mechanism file")?;
        let reloaded = check_robust_bic_ir(&file.mechanism, &support).map_err(|e| e.to_string())?;
        ensure(reloaded.passed(), || format!("{name}: reloaded mechanism fails BIC/IR"))?;
        ensure(file.to_json().into_bytes() == outputs[0][..outputs[0].len() - 1], || format!("{name}: re-export differs"))?;
        checked += 1;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{checked} instances byte-identical across runs and round trips"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("oracle equivalence", oracle_equivalence),
        ("extension identity", extension_identity),
        ("IR with probability 1", ir_probability_one),
        ("sentinel rows", sentinel_rows),
        ("convex decomposition", decompositions),
        ("rho rounding", rounding),
        ("min-cost flow CM", flow_oracle),
        ("budgeted facility location", bufl),
        ("DSIC extension", dsic),
        ("lookahead gap", lookahead),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
