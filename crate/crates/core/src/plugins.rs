//! Bundled encodings and cost-minimization algorithms.

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::exact::CmOracle;
use crate::instances;
use crate::lp::{solve_lp, LinearProgram, LowerBound, LpOutcome, Relation, Sense};
use crate::model::{Allocation, CoveringProblem, PublicCost, TypeProfile};
use crate::rational::Rational;
use crate::relax::{CmLp, CmRow, LpRelativeApprox};

/// Buys from the cheapest seller, the lowest index on ties.
pub fn single_item_cm(costs: &[Rational]) -> Result<usize> {
    if costs.len() < 2 {
        bail!(Monopoly, "a single-item auction needs at least two sellers");
    }
    let mut best = 0;
    for (i, c) in costs.iter().enumerate() {
        if *c < costs[best] {
            best = i;
        }
    }
    Ok(best)
}

/// [`single_item_cm`] as a CM oracle and as an exact LP-relative algorithm.
#[derive(Clone, Copy, Debug)]
pub struct SingleItem {
    pub n: usize,
}

impl SingleItem {
    fn pick(&self, costs: &[Vec<Rational>]) -> Result<Allocation> {
        let flat: Vec<Rational> = costs.iter().map(|ci| ci[0].clone()).collect();
        let i = single_item_cm(&flat)?;
        let mut sets = vec![Vec::new(); self.n];
        sets[i].push(0);
        Ok(Allocation::from_sets(&sets))
    }
}

impl CmOracle for SingleItem {
    fn minimize(&self, costs: &TypeProfile) -> Result<Allocation> {
        self.pick(&costs.0)
    }
}

impl LpRelativeApprox for SingleItem {
    fn rho(&self) -> Rational {
        Rational::one()
    }

    fn approximate(&self, costs: &[Vec<Rational>]) -> Result<Allocation> {
        self.pick(costs)
    }
}

/// `Σ_{(i,v)} units·x_{i,v} ≥ demand` per item, with no public-cost variables.
pub fn coverage_cmlp(problem: &CoveringProblem) -> Result<CmLp> {
    let PublicCost::Coverage(cov) = &problem.public else {
        bail!(Unsupported, "only coverage instances have a built-in covering LP");
    };
    let counts = problem.object_counts();
    let mut rows: Vec<CmRow> =
        cov.demand.iter().map(|&d| CmRow { x: Vec::new(), z: Vec::new(), rhs: Rational::from(d) }).collect();
    let mut at = 0;
    for (i, sup) in cov.supplies.iter().enumerate() {
        for (v, pairs) in sup.iter().enumerate() {
            for &(item, units) in pairs {
                rows[item].x.push((at + v, Rational::from(units)));
            }
        }
        at += counts[i];
    }
    CmLp::new(counts, 0, rows, Vec::new())
}

/// The vertex-cover LP `min c·x`, `x_u + x_w ≥ 1`, `0 ≤ x ≤ 1`: optimum and a basic solution.
pub fn vertex_cover_lp(nodes: usize, edges: &[(usize, usize)], costs: &[Rational]) -> Result<(Rational, Vec<Rational>)> {
    if costs.len() != nodes {
        bail!(Input, "{} costs for {} nodes", costs.len(), nodes);
    }
    let mut lp = LinearProgram::new(Sense::Minimize, 0);
    for c in costs {
        lp.add_var(c.clone(), LowerBound::Zero);
    }
    for &(u, w) in edges {
        lp.add_row(vec![(u, Rational::one()), (w, Rational::one())], Relation::Ge, Rational::one());
    }
    for v in 0..nodes {
        lp.add_row(vec![(v, Rational::one())], Relation::Le, Rational::one());
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal(sol) => Ok((sol.value, sol.x)),
        _ => bail!(Internal, "vertex-cover LP has no optimum"),
    }
}

/// Threshold rounding of the vertex-cover LP at ½.
pub fn vertex_cover_lp_approx(nodes: usize, edges: &[(usize, usize)], costs: &[Rational]) -> Result<Vec<bool>> {
    if costs.iter().any(Rational::is_negative) {
        bail!(Domain, "vertex-cover costs must be nonnegative");
    }
    let (_, x) = vertex_cover_lp(nodes, edges, costs)?;
    let half = Rational::new(1, 2);
    Ok(x.iter().map(|v| *v >= half).collect())
}

/// [`vertex_cover_lp_approx`] as a factor-2 LP-relative algorithm.
#[derive(Clone, Debug)]
pub struct VertexCoverApprox {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl LpRelativeApprox for VertexCoverApprox {
    fn rho(&self) -> Rational {
        Rational::from(2)
    }

    fn approximate(&self, costs: &[Vec<Rational>]) -> Result<Allocation> {
        let flat: Vec<Rational> = costs.iter().map(|ci| ci[0].clone()).collect();
        let cover = vertex_cover_lp_approx(self.nodes, &self.edges, &flat)?;
        let sets: Vec<Vec<usize>> = cover.iter().map(|&b| if b { vec![0] } else { Vec::new() }).collect();
        Ok(Allocation::from_sets(&sets))
    }
}

/// `H_n = 1 + 1/2 + … + 1/n`.
pub fn harmonic(n: usize) -> Rational {
    (1..=n as i64).map(|k| Rational::new(1, k)).sum()
}

/// Greedy set cover by cost per newly covered element, lowest index on
/// ties. Returns the chosen set indices in increasing order.
pub fn set_cover_greedy(universe: usize, sets: &[Vec<usize>], costs: &[Rational]) -> Result<Vec<usize>> {
    if costs.len() != sets.len() {
        bail!(Input, "{} costs for {} sets", costs.len(), sets.len());
    }
    if costs.iter().any(Rational::is_negative) {
        bail!(Domain, "set-cover costs must be nonnegative");
    }
    let mut covered = vec![false; universe];
    let mut left = universe;
    let mut chosen = Vec::new();
    while left > 0 {
        let mut best: Option<(usize, Rational)> = None;
        for (k, s) in sets.iter().enumerate() {
            let fresh = s.iter().filter(|&&e| e < universe && !covered[e]).count();
            if fresh == 0 {
                continue;
            }
            let ratio = &costs[k] / Rational::from(fresh);
            if best.as_ref().map_or(true, |(_, b)| ratio < *b) {
                best = Some((k, ratio));
            }
        }
        let Some((k, _)) = best else { bail!(Infeasible, "the sets do not cover the universe") };
        for &e in &sets[k] {
            if e < universe && !covered[e] {
                covered[e] = true;
                left -= 1;
            }
        }
        chosen.push(k);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// `min c·x` over the set-cover LP.
pub fn set_cover_lp(universe: usize, sets: &[Vec<usize>], costs: &[Rational]) -> Result<Rational> {
    let mut lp = LinearProgram::new(Sense::Minimize, 0);
    for c in costs {
        lp.add_var(c.clone(), LowerBound::Zero);
    }
    for e in 0..universe {
        let row = sets.iter().enumerate().filter(|(_, s)| s.contains(&e)).map(|(k, _)| (k, Rational::one())).collect();
        lp.add_row(row, Relation::Ge, Rational::one());
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal(sol) => Ok(sol.value),
        LpOutcome::Infeasible => bail!(Infeasible, "the sets do not cover the universe"),
        LpOutcome::Unbounded { .. } => bail!(Internal, "set-cover LP is unbounded"),
    }
}

/// [`set_cover_greedy`] as an LP-relative algorithm with factor `H_|U|`.
#[derive(Clone, Debug)]
pub struct SetCoverApprox {
    pub universe: usize,
    pub sets: Vec<Vec<usize>>,
}

impl LpRelativeApprox for SetCoverApprox {
    fn rho(&self) -> Rational {
        harmonic(self.universe)
    }

    fn approximate(&self, costs: &[Vec<Rational>]) -> Result<Allocation> {
        let flat: Vec<Rational> = costs.iter().map(|ci| ci[0].clone()).collect();
        let chosen = set_cover_greedy(self.universe, &self.sets, &flat)?;
        let mut sets = vec![Vec::new(); self.sets.len()];
        for k in chosen {
            sets[k].push(0);
        }
        Ok(Allocation::from_sets(&sets))
    }
}

/// Multi-unit procurement: supplies per seller and item, and the demand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcurementSpec {
    pub supply: Vec<Vec<u32>>,
    pub demand: Vec<u32>,
}

impl ProcurementSpec {
    pub fn problem(&self) -> Result<CoveringProblem> {
        instances::procurement(&self.supply, &self.demand)
    }

    pub fn items(&self) -> usize {
        self.demand.len()
    }
}

struct Arc {
    to: usize,
    cap: i64,
    cost: Rational,
}

/// Successive shortest paths with Bellman–Ford on the residual graph.
struct FlowGraph {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        FlowGraph { arcs: Vec::new(), out: vec![Vec::new(); nodes] }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: Rational) -> usize {
        let id = self.arcs.len();
        self.out[from].push(id);
        self.arcs.push(Arc { to, cap, cost: cost.clone() });
        self.out[to].push(id + 1);
        self.arcs.push(Arc { to: from, cap: 0, cost: -cost });
        id
    }

    /// Sends `want` units from `s` to `t` at minimum cost; `false` if impossible.
    fn run(&mut self, s: usize, t: usize, mut want: i64) -> bool {
        let nodes = self.out.len();
        while want > 0 {
            let mut dist: Vec<Option<Rational>> = vec![None; nodes];
            let mut via: Vec<Option<usize>> = vec![None; nodes];
            dist[s] = Some(Rational::zero());
            for _ in 0..nodes {
                let mut changed = false;
                for u in 0..nodes {
                    let Some(du) = dist[u].clone() else { continue };
                    for &a in &self.out[u] {
                        let arc = &self.arcs[a];
                        if arc.cap == 0 {
                            continue;
                        }
                        let cand = &du + &arc.cost;
                        if dist[arc.to].as_ref().map_or(true, |d| cand < *d) {
                            dist[arc.to] = Some(cand);
                            via[arc.to] = Some(a);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[t].is_none() {
                return false;
            }
            let mut path = Vec::new();
            let mut v = t;
            while v != s {
                let a = via[v].expect("path to sink");
                path.push(a);
                v = self.arcs[a ^ 1].to;
            }
            let push = path.iter().map(|&a| self.arcs[a].cap).min().unwrap_or(0).min(want);
            for a in path {
                self.arcs[a].cap -= push;
                self.arcs[a ^ 1].cap += push;
            }
            want -= push;
        }
        true
    }
}

/// Cheapest units meeting `spec.demand`: `costs[i][ℓ]` per unit of item `ℓ`
/// from seller `i`. Returns units per seller and item.
pub fn multi_item_flow_cm(spec: &ProcurementSpec, costs: &[Vec<Rational>]) -> Result<Vec<Vec<u32>>> {
    let n = spec.supply.len();
    let k = spec.items();
    if costs.len() != n || costs.iter().any(|c| c.len() != k) || spec.supply.iter().any(|s| s.len() != k) {
        bail!(Input, "supply and cost tables must be sellers × items");
    }
    let (s, t) = (0, 1 + n + k);
    let mut g = FlowGraph::new(n + k + 2);
    let mut arcs = vec![vec![0usize; k]; n];
    for i in 0..n {
        let total: i64 = spec.supply[i].iter().map(|&u| u as i64).sum();
        g.add(s, 1 + i, total, Rational::zero());
        for l in 0..k {
            arcs[i][l] = g.add(1 + i, 1 + n + l, spec.supply[i][l] as i64, costs[i][l].clone());
        }
    }
    for l in 0..k {
        g.add(1 + n + l, t, spec.demand[l] as i64, Rational::zero());
    }
    let want: i64 = spec.demand.iter().map(|&d| d as i64).sum();
    if !g.run(s, t, want) {
        bail!(Infeasible, "supplies cannot meet the demand");
    }
    Ok(arcs.iter().map(|row| row.iter().map(|&a| g.arcs[a ^ 1].cap as u32).collect()).collect())
}

/// Flow-based CM oracle for coverage instances where every object supplies
/// one unit of one item.
#[derive(Clone, Debug)]
pub struct FlowOracle {
    /// `item[i][v]`.
    item: Vec<Vec<usize>>,
    demand: Vec<u32>,
}

impl FlowOracle {
    pub fn new(problem: &CoveringProblem) -> Result<Self> {
        let PublicCost::Coverage(cov) = &problem.public else {
            bail!(Unsupported, "flow oracle needs a coverage instance");
        };
        let mut item = Vec::new();
        for sup in &cov.supplies {
            let mut row = Vec::new();
            for pairs in sup {
                match pairs.as_slice() {
                    [(l, 1)] => row.push(*l),
                    _ => bail!(Unsupported, "flow oracle needs objects that supply one unit of one item"),
                }
            }
            item.push(row);
        }
        Ok(FlowOracle { item, demand: cov.demand.clone() })
    }
}

impl CmOracle for FlowOracle {
    fn minimize(&self, costs: &TypeProfile) -> Result<Allocation> {
        let n = self.item.len();
        let k = self.demand.len();
        let (s, t) = (0, 1 + n + k);
        let mut g = FlowGraph::new(n + k + 2);
        let mut arcs = Vec::new();
        for (i, items) in self.item.iter().enumerate() {
            g.add(s, 1 + i, items.len() as i64, Rational::zero());
            let mut row = Vec::new();
            for (v, &l) in items.iter().enumerate() {
                row.push(g.add(1 + i, 1 + n + l, 1, costs.0[i][v].clone()));
            }
            arcs.push(row);
        }
        for (l, &d) in self.demand.iter().enumerate() {
            g.add(1 + n + l, t, d as i64, Rational::zero());
        }
        let want: i64 = self.demand.iter().map(|&d| d as i64).sum();
        if !g.run(s, t, want) {
            bail!(Infeasible, "supplies cannot meet the demand");
        }
        let sets: Vec<Vec<usize>> = arcs
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, &a)| g.arcs[a].cap == 0).map(|(v, _)| v).collect())
            .collect();
        Ok(Allocation::from_sets(&sets))
    }
}

/// Budgeted facility location: facilities owned by players, facility–client
/// distances and an optional assignment budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuflSpec {
    /// Facilities of each player, as indices into `distance`.
    pub owners: Vec<Vec<usize>>,
    /// `distance[ℓ][j]`.
    pub distance: Vec<Vec<Rational>>,
    pub budget: Option<Rational>,
}

impl BuflSpec {
    /// Checks `d(ℓ,j) ≤ d(ℓ,j') + d(ℓ',j') + d(ℓ',j)` for all facilities and clients.
    pub fn check_metric(&self) -> Result<()> {
        let f = self.distance.len();
        let clients = self.distance.first().map_or(0, Vec::len);
        if self.distance.iter().any(|row| row.len() != clients || row.iter().any(Rational::is_negative)) {
            bail!(Input, "distances must be a nonnegative facilities × clients table");
        }
        for a in 0..f {
            for b in 0..f {
                for j in 0..clients {
                    for j2 in 0..clients {
                        let d = &self.distance;
                        if d[a][j] > &(&d[a][j2] + &d[b][j2]) + &d[b][j] {
                            bail!(Input, "distances violate the triangle inequality at facilities {a},{b}, clients {j},{j2}");
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<CoveringProblem> {
        instances::facility_location(&self.owners, &self.distance, self.budget.clone())
    }
}

/// The facility LP: `Σ_ℓ z_{ℓj} ≥ 1`, `x_ℓ ≥ z_{ℓj}`, and the budget row
/// `Σ d_{ℓj} z_{ℓj} ≤ B` when a budget is set. The public cost is `Σ d·z`.
pub fn bufl_cmlp_encode(spec: &BuflSpec) -> Result<CmLp> {
    if spec.budget.as_ref().is_some_and(Rational::is_negative) {
        bail!(Input, "negative budget");
    }
    spec.check_metric()?;
    let clients = spec.distance.first().map_or(0, Vec::len);
    let order: Vec<usize> = spec.owners.iter().flatten().copied().collect();
    if order.iter().any(|&f| f >= spec.distance.len()) {
        bail!(Input, "unknown facility");
    }
    let z = |pos: usize, j: usize| pos * clients + j;
    let mut rows = Vec::new();
    for j in 0..clients {
        rows.push(CmRow { x: Vec::new(), z: (0..order.len()).map(|p| (z(p, j), Rational::one())).collect(), rhs: Rational::one() });
    }
    for p in 0..order.len() {
        for j in 0..clients {
            rows.push(CmRow { x: vec![(p, Rational::one())], z: vec![(z(p, j), -Rational::one())], rhs: Rational::zero() });
        }
    }
    let mut d = Vec::new();
    for &f in &order {
        d.extend(spec.distance[f].iter().cloned());
    }
    if let Some(b) = &spec.budget {
        rows.push(CmRow { x: Vec::new(), z: d.iter().cloned().enumerate().map(|(j, v)| (j, -v)).collect(), rhs: -b });
    }
    let counts = spec.owners.iter().map(Vec::len).collect();
    CmLp::new(counts, order.len() * clients, rows, d)
}

/// Encoding hook for edge-selection problems such as Steiner forest,
/// multiway cut and multicut, whose approximation algorithms are supplied
/// by the caller.
pub trait EdgeSelectionPlugin {
    fn name(&self) -> &str;
    fn encode(&self, problem: &CoveringProblem) -> Result<CmLp>;
    fn approximation(&self) -> Box<dyn LpRelativeApprox>;
}
