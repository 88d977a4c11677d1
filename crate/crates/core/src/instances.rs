//! Problem presets and seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{bail, Result};
use crate::model::{
    Allocation, Coverage, CoveringProblem, FacilityLocation, Player, PublicCost, SupportedDistribution, TypeProfile,
};
use crate::rational::Rational;

fn player(name: String, objects: Vec<String>) -> Player {
    Player { name, objects }
}

/// `n` sellers, each able to supply the single item.
pub fn single_item(n: usize) -> CoveringProblem {
    let players = (0..n).map(|i| player(format!("seller{}", i + 1), vec!["item".into()])).collect();
    let public = PublicCost::Coverage(Coverage { demand: vec![1], supplies: vec![vec![vec![(0, 1)]]; n] });
    CoveringProblem::new(players, public).expect("valid preset")
}

/// Players are nodes; an allocation must cover every edge.
pub fn vertex_cover(nodes: usize, edges: &[(usize, usize)]) -> Result<CoveringProblem> {
    if edges.iter().any(|&(u, w)| u >= nodes || w >= nodes || u == w) {
        bail!(Input, "edge list refers to unknown nodes or contains a loop");
    }
    let supplies = (0..nodes)
        .map(|v| {
            let touched = edges.iter().enumerate().filter(|(_, &(a, b))| a == v || b == v).map(|(e, _)| (e, 1)).collect();
            vec![touched]
        })
        .collect();
    let players = (0..nodes).map(|v| player(format!("v{v}"), vec![format!("v{v}")])).collect();
    CoveringProblem::new(players, PublicCost::Coverage(Coverage { demand: vec![1; edges.len()], supplies }))
}

/// Players are sets; an allocation must cover every element of `0..universe`.
pub fn set_cover(universe: usize, sets: &[Vec<usize>]) -> Result<CoveringProblem> {
    if sets.iter().flatten().any(|&e| e >= universe) {
        bail!(Input, "set refers to an element outside the universe");
    }
    let supplies = sets.iter().map(|s| vec![s.iter().map(|&e| (e, 1)).collect()]).collect();
    let players = (0..sets.len()).map(|k| player(format!("S{}", k + 1), vec![format!("S{}", k + 1)])).collect();
    CoveringProblem::new(players, PublicCost::Coverage(Coverage { demand: vec![1; universe], supplies }))
}

/// Multi-unit procurement: seller `i` holds `supply[i][ℓ]` units of item `ℓ`,
/// and each unit is a separate covering object named `item{ℓ}#{k}`.
pub fn procurement(supply: &[Vec<u32>], demand: &[u32]) -> Result<CoveringProblem> {
    if supply.iter().any(|s| s.len() != demand.len()) {
        bail!(Input, "supply vectors must have one entry per item");
    }
    let mut players = Vec::new();
    let mut supplies = Vec::new();
    for (i, s) in supply.iter().enumerate() {
        let mut objects = Vec::new();
        let mut sup = Vec::new();
        for (l, &units) in s.iter().enumerate() {
            for k in 0..units {
                objects.push(format!("item{}#{}", l + 1, k + 1));
                sup.push(vec![(l, 1)]);
            }
        }
        players.push(player(format!("seller{}", i + 1), objects));
        supplies.push(sup);
    }
    CoveringProblem::new(players, PublicCost::Coverage(Coverage { demand: demand.to_vec(), supplies }))
}

/// Unit layout of a procurement instance: for each seller, the item of every object.
pub fn procurement_units(supply: &[Vec<u32>]) -> Vec<Vec<usize>> {
    supply.iter().map(|s| s.iter().enumerate().flat_map(|(l, &u)| std::iter::repeat(l).take(u as usize)).collect()).collect()
}

/// Expands per-item unit costs of one seller into per-object costs.
pub fn procurement_costs(supply: &[Vec<u32>], per_item: &[Vec<Rational>]) -> TypeProfile {
    let units = procurement_units(supply);
    TypeProfile(units.iter().zip(per_item).map(|(items, c)| items.iter().map(|&l| c[l].clone()).collect()).collect())
}

/// Facility location: each player owns the listed facilities.
pub fn facility_location(
    owners: &[Vec<usize>],
    distance: &[Vec<Rational>],
    budget: Option<Rational>,
) -> Result<CoveringProblem> {
    let clients = distance.first().map_or(0, Vec::len);
    let mut players = Vec::new();
    let mut dist = Vec::new();
    for (i, fs) in owners.iter().enumerate() {
        if fs.iter().any(|&f| f >= distance.len()) {
            bail!(Input, "unknown facility");
        }
        players.push(player(format!("owner{}", i + 1), fs.iter().map(|f| format!("f{f}")).collect()));
        dist.push(fs.iter().map(|&f| distance[f].clone()).collect());
    }
    CoveringProblem::new(players, PublicCost::FacilityLocation(FacilityLocation { distance: dist, clients, budget }))
}

/// A distribution from `(profile, weight)` pairs, normalizing positive integer weights.
pub fn weighted(problem: &CoveringProblem, rows: Vec<(TypeProfile, u64)>) -> Result<SupportedDistribution> {
    let total: u64 = rows.iter().map(|(_, w)| w).sum();
    let support = rows
        .into_iter()
        .map(|(c, w)| (c, Rational::new(w as i64, total as i64)))
        .collect();
    SupportedDistribution::new(problem, support)
}

/// Single-object profile from integers.
pub fn scalar_profile(values: &[i64]) -> TypeProfile {
    TypeProfile(values.iter().map(|&v| vec![Rational::from(v)]).collect())
}

/// A random instance for property tests.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub label: String,
    pub problem: CoveringProblem,
    pub distribution: SupportedDistribution,
    pub kappa: Rational,
}

fn random_cost(rng: &mut ChaCha8Rng) -> Rational {
    let v = rng.gen_range(0..=6);
    if rng.gen_bool(0.2) {
        Rational::new(2 * v + 1, 2)
    } else {
        Rational::from(v)
    }
}

fn random_distribution(rng: &mut ChaCha8Rng, problem: &CoveringProblem, max_support: usize) -> SupportedDistribution {
    let counts = problem.object_counts();
    let size = rng.gen_range(1..=max_support);
    let mut rows: Vec<(TypeProfile, u64)> = Vec::new();
    while rows.len() < size {
        let c = TypeProfile(counts.iter().map(|&k| (0..k).map(|_| random_cost(rng)).collect()).collect());
        if rows.iter().all(|(d, _)| *d != c) {
            rows.push((c, rng.gen_range(1..=4)));
        }
    }
    weighted(problem, rows).expect("random distribution is valid")
}

/// Coverage over one or two items where any `n − 1` players suffice.
fn random_coverage(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Player>, Coverage) {
    let items = rng.gen_range(1..=2);
    let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=2)).collect();
    let supplies: Vec<Vec<Vec<(usize, u32)>>> = counts
        .iter()
        .map(|&k| (0..k).map(|_| (0..items).map(|l| (l, rng.gen_range(0..=1))).filter(|(_, u)| *u > 0).collect()).collect())
        .collect();
    let mut demand = vec![0u32; items];
    for (l, d) in demand.iter_mut().enumerate() {
        let without = |skip: usize| -> u32 {
            supplies
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .flat_map(|(_, s)| s.iter().flatten())
                .filter(|(it, _)| *it == l)
                .map(|(_, u)| u)
                .sum()
        };
        let cap = (0..n).map(without).min().unwrap_or(0);
        *d = if cap == 0 { 0 } else { rng.gen_range(1..=cap.min(2)) };
    }
    let players = counts
        .iter()
        .enumerate()
        .map(|(i, &k)| player(format!("p{}", i + 1), (0..k).map(|v| format!("o{}", v + 1)).collect()))
        .collect();
    (players, Coverage { demand, supplies })
}

/// Draws instances with `n ∈ {2,3}`, at most `max_support` support profiles
/// and at most two objects per player (so `|Ω| ≤ 64`).
pub fn random_instance(seed: u64, max_support: usize) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=3);
    let kind = rng.gen_range(0..4);
    let (label, problem, kappa) = match kind {
        0 => ("single-item".to_string(), single_item(n), Rational::zero()),
        1 => {
            let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |w| (u, w))).collect();
            pairs.shuffle(&mut rng);
            let m = rng.gen_range(1..=pairs.len());
            pairs.truncate(m);
            pairs.sort();
            ("vertex-cover".to_string(), vertex_cover(n, &pairs).expect("valid graph"), Rational::zero())
        }
        2 => {
            let (players, cov) = random_coverage(&mut rng, n);
            ("coverage".to_string(), CoveringProblem::new(players, PublicCost::Coverage(cov)).expect("valid"), Rational::zero())
        }
        _ => {
            // Coverage feasibility with a monotone public cost table.
            let (players, cov) = random_coverage(&mut rng, n);
            let base = CoveringProblem::new(players.clone(), PublicCost::Coverage(cov)).expect("valid");
            let counts = base.object_counts();
            let discounts: Vec<Vec<i64>> = counts.iter().map(|&k| (0..k).map(|_| rng.gen_range(0..=2)).collect()).collect();
            let mut rows = Vec::new();
            let bits: usize = counts.iter().sum();
            for m in 0..(1u64 << bits) {
                let mut masks = Vec::new();
                let mut shift = 0;
                for &k in &counts {
                    masks.push((m >> shift) & ((1 << k) - 1));
                    shift += k;
                }
                let a = Allocation::from_masks(masks);
                if base.is_feasible(&a) {
                    let used: i64 = a.pairs().iter().map(|&(i, v)| discounts[i][v]).sum();
                    rows.push((a, Rational::from(12 - used)));
                }
            }
            let kappa = [Rational::one(), Rational::new(1, 2), Rational::from(2)][rng.gen_range(0..3)].clone();
            ("table".to_string(), CoveringProblem::new(players, PublicCost::Table(rows)).expect("valid"), kappa)
        }
    };
    let distribution = random_distribution(&mut rng, &problem, max_support);
    RandomInstance { label: format!("{label}#{seed}"), problem, distribution, kappa }
}
