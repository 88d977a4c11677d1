//! Covering-LP relaxations of the allocation space.
//!
//! A [`CmLp`] describes `min c·x + d·z` subject to `Ax + Bz ≥ b`, `x, z ≥ 0`,
//! with one `x` coordinate per covering object. The payment LP can be solved
//! over fractional points of its feasible region ([`solve_relaxed_lp`]), and
//! the result rounded back to lotteries over allocations with an LP-relative
//! approximation algorithm ([`round_single_dim`]) or, for budgeted facility
//! location, with a UFL decomposer ([`round_bufl`]).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bounds::{bounded_from_estimate, estimate_from_solution, marginal_max_sum, max_support_cost, support_layout};
use crate::bounds::{BoundedSupport, Overrides};
use crate::error::{bail, Result};
use crate::lp::{
    cutting_plane_maximize, solve_lp, Candidate, Cut, CuttingPlaneOptions, CuttingPlaneOutcome, CuttingPlaneProblem,
    LinearProgram, LowerBound, LpOutcome, Relation, Row, Sense,
};
use crate::model::{Allocation, CoveringProblem, PublicCost, SupportedDistribution};
use crate::payment::{self, ColumnSpace, LpPair, Outcome};
use crate::rational::{denominator_lcm, Rational};

/// One constraint `Σ a·x + Σ b·z ≥ rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmRow {
    /// `(flat object index, coefficient)`, coefficients nonnegative.
    pub x: Vec<(usize, Rational)>,
    pub z: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

/// A covering LP whose `x` part is indexed by `(player, object)` pairs in
/// player-major order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmLp {
    pub object_counts: Vec<usize>,
    pub z_count: usize,
    pub rows: Vec<CmRow>,
    pub d: Vec<Rational>,
}

/// A point of `[0,1]^T` indexed as `x[i][v]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FracAllocation(pub Vec<Vec<Rational>>);

impl FracAllocation {
    pub fn from_allocation(a: &Allocation, object_counts: &[usize]) -> Self {
        FracAllocation(
            object_counts
                .iter()
                .enumerate()
                .map(|(i, &k)| (0..k).map(|v| if a.contains(i, v) { Rational::one() } else { Rational::zero() }).collect())
                .collect(),
        )
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_zero() || v.is_one())
    }

    /// The allocation with this characteristic vector, if integral.
    pub fn to_allocation(&self) -> Option<Allocation> {
        if !self.is_integral() {
            return None;
        }
        let sets: Vec<Vec<usize>> =
            self.0.iter().map(|xi| xi.iter().enumerate().filter(|(_, v)| v.is_one()).map(|(v, _)| v).collect()).collect();
        Some(Allocation::from_sets(&sets))
    }

    pub fn flat(&self) -> Vec<Rational> {
        self.0.iter().flatten().cloned().collect()
    }
}

impl Outcome for FracAllocation {
    fn player_cost(&self, i: usize, ci: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        for (c, x) in ci.iter().zip(&self.0[i]) {
            total.add_product(c, x);
        }
        total
    }

    fn is_empty_for(&self, i: usize) -> bool {
        self.0[i].iter().all(Rational::is_zero)
    }

    fn coordinates(&self) -> Vec<Rational> {
        self.flat()
    }
}

/// A completion `z(x)` and its cost `d·z(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    pub z: Vec<Rational>,
    pub cost: Rational,
}

impl CmLp {
    pub fn new(object_counts: Vec<usize>, z_count: usize, rows: Vec<CmRow>, d: Vec<Rational>) -> Result<Self> {
        let lp = CmLp { object_counts, z_count, rows, d };
        if lp.d.len() != lp.z_count {
            bail!(Input, "public cost vector has {} entries for {} variables", lp.d.len(), lp.z_count);
        }
        let xn = lp.x_len();
        for (r, row) in lp.rows.iter().enumerate() {
            if row.x.iter().any(|(j, _)| *j >= xn) || row.z.iter().any(|(j, _)| *j >= lp.z_count) {
                bail!(Input, "row {} refers to an unknown variable", r);
            }
            if row.x.iter().any(|(_, a)| a.is_negative()) {
                bail!(Input, "row {} has a negative allocation coefficient", r);
            }
        }
        Ok(lp)
    }

    pub fn n(&self) -> usize {
        self.object_counts.len()
    }

    pub fn x_len(&self) -> usize {
        self.object_counts.iter().sum()
    }

    pub fn offset(&self, i: usize) -> usize {
        self.object_counts[..i].iter().sum()
    }

    fn unflatten(&self, flat: &[Rational]) -> FracAllocation {
        let mut out = Vec::with_capacity(self.n());
        let mut at = 0;
        for &k in &self.object_counts {
            out.push(flat[at..at + k].to_vec());
            at += k;
        }
        FracAllocation(out)
    }

    fn check_shape(&self, x: &FracAllocation) -> Result<()> {
        if x.0.len() != self.n() || x.0.iter().zip(&self.object_counts).any(|(xi, k)| xi.len() != *k) {
            bail!(Input, "point {:?} does not match the covering LP", x);
        }
        Ok(())
    }

    /// `z(x)`, or `None` when `x` has no feasible completion.
    pub fn completion(&self, x: &FracAllocation) -> Result<Option<Completion>> {
        self.check_shape(x)?;
        let flat = x.flat();
        let mut lp = LinearProgram::new(Sense::Minimize, 0);
        for dj in &self.d {
            lp.add_var(dj.clone(), LowerBound::Zero);
        }
        for row in &self.rows {
            let mut rhs = row.rhs.clone();
            for (j, a) in &row.x {
                rhs -= a * &flat[*j];
            }
            if row.z.is_empty() {
                if rhs.is_positive() {
                    return Ok(None);
                }
                continue;
            }
            lp.add_row(row.z.clone(), Relation::Ge, rhs);
        }
        if self.z_count == 0 {
            return Ok(Some(Completion { z: Vec::new(), cost: Rational::zero() }));
        }
        match solve_lp(&lp)? {
            LpOutcome::Optimal(sol) => Ok(Some(Completion { z: sol.x, cost: sol.value })),
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded { .. } => bail!(Contract, "completion LP is unbounded at {:?}", x),
        }
    }

    /// `x ∈ Ω_LP`.
    pub fn contains(&self, x: &FracAllocation) -> Result<bool> {
        let in_box = x.0.iter().flatten().all(|v| !v.is_negative() && *v <= Rational::one());
        Ok(in_box && self.completion(x)?.is_some())
    }

    /// `Π(x) = d·z(x)`, an error outside `Ω_LP`.
    pub fn public_cost(&self, x: &FracAllocation) -> Result<Rational> {
        match self.completion(x)? {
            Some(c) => Ok(c.cost),
            None => bail!(Contract, "{:?} has no feasible completion", x),
        }
    }

    /// A basic optimal solution of `min costs·x + weight·d·z` over the
    /// constraints and `0 ≤ x ≤ 1`, with the objects of `forbidden` players
    /// fixed to 0. `None` when infeasible.
    pub fn optimize(
        &self,
        costs: &[Vec<Rational>],
        weight: &Rational,
        forbidden: &[bool],
    ) -> Result<Option<(FracAllocation, Completion)>> {
        let xn = self.x_len();
        let mut lp = LinearProgram::new(Sense::Minimize, 0);
        for ci in costs {
            for c in ci {
                lp.add_var(c.clone(), LowerBound::Zero);
            }
        }
        if lp.vars() != xn {
            bail!(Input, "cost vector does not match the covering LP");
        }
        for dj in &self.d {
            lp.add_var(weight * dj, LowerBound::Zero);
        }
        for row in &self.rows {
            let mut coeffs = row.x.clone();
            coeffs.extend(row.z.iter().map(|(j, b)| (xn + j, b.clone())));
            lp.add_row(coeffs, Relation::Ge, row.rhs.clone());
        }
        for i in 0..self.n() {
            let cap = if forbidden.get(i).copied().unwrap_or(false) { Rational::zero() } else { Rational::one() };
            for v in 0..self.object_counts[i] {
                lp.add_row(vec![(self.offset(i) + v, Rational::one())], Relation::Le, cap.clone());
            }
        }
        match solve_lp(&lp)? {
            LpOutcome::Optimal(sol) => {
                let x = self.unflatten(&sol.x[..xn]);
                let z = sol.x[xn..].to_vec();
                let mut cost = Rational::zero();
                for (dj, zj) in self.d.iter().zip(&z) {
                    cost.add_product(dj, zj);
                }
                Ok(Some((x, Completion { z, cost })))
            }
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded { .. } => bail!(Contract, "covering LP is unbounded for costs {:?}", costs),
        }
    }

    /// `OPT` of the covering LP for nonnegative `costs` with public weight 1.
    pub fn lp_optimum(&self, costs: &[Vec<Rational>]) -> Result<Option<Rational>> {
        let Some((x, completion)) = self.optimize(costs, &Rational::one(), &[])? else { return Ok(None) };
        Ok(Some(x.signed_cost(costs) + completion.cost))
    }
}

/// Columns for the payment LP drawn from the covering LP's feasible region.
pub struct CmLpSpace<'a> {
    cmlp: &'a CmLp,
    cache: HashMap<FracAllocation, Rational>,
}

impl<'a> CmLpSpace<'a> {
    pub fn new(cmlp: &'a CmLp) -> Self {
        CmLpSpace { cmlp, cache: HashMap::new() }
    }
}

impl ColumnSpace for CmLpSpace<'_> {
    type Col = FracAllocation;

    fn minimize(&mut self, costs: &[Vec<Rational>], weight: &Rational, forbidden: &[bool]) -> Result<FracAllocation> {
        match self.cmlp.optimize(costs, weight, forbidden)? {
            Some((x, _)) => Ok(x),
            None => bail!(Infeasible, "covering LP has no point avoiding players {:?}", forbidden),
        }
    }

    fn public_cost(&mut self, col: &FracAllocation) -> Result<Rational> {
        if let Some(v) = self.cache.get(col) {
            return Ok(v.clone());
        }
        let v = self.cmlp.public_cost(col)?;
        self.cache.insert(col.clone(), v.clone());
        Ok(v)
    }
}

fn check_counts(cmlp: &CmLp, counts: &[usize]) -> Result<()> {
    if cmlp.object_counts != counts {
        bail!(Input, "covering LP has object counts {:?}, distribution has {:?}", cmlp.object_counts, counts);
    }
    Ok(())
}

fn support_counts(d: &SupportedDistribution) -> Vec<usize> {
    d.support()[0].0 .0.iter().map(Vec::len).collect()
}

/// Sentinel values computed from the support LP solved over the covering
/// LP's feasible region.
pub fn relaxed_bound_estimates(
    cmlp: &CmLp,
    d: &SupportedDistribution,
    kappa: &Rational,
    overrides: &Overrides,
) -> Result<BoundedSupport> {
    check_counts(cmlp, &support_counts(d))?;
    let layout = support_layout(d, kappa);
    let mut space = CmLpSpace::new(cmlp);
    let pair = payment::solve(&layout, &mut space)?;
    let estimate = estimate_from_solution(&pair, &max_support_cost(d), &marginal_max_sum(d))?;
    bounded_from_estimate(d, &estimate, overrides)
}

/// The payment LP over `D̄` with the covering LP's feasible region as
/// allocation space. Sentinel profiles fix the sentinel player's objects to 0.
pub fn solve_relaxed_lp(cmlp: &CmLp, support: &BoundedSupport, kappa: &Rational) -> Result<LpPair<FracAllocation>> {
    if kappa.is_negative() {
        bail!(Input, "negative kappa {}", kappa);
    }
    check_counts(cmlp, &support_counts(support.distribution()))?;
    let layout = support.layout(kappa, support.certified());
    let mut space = CmLpSpace::new(cmlp);
    let pair = payment::solve(&layout, &mut space)?;
    if let Some(why) = payment::check_feasible(&layout, &pair) {
        bail!(Internal, "relaxed payment LP solution is infeasible: {why}");
    }
    Ok(pair)
}

/// An algorithm returning, for nonnegative costs `c`, an allocation whose
/// characteristic vector `x` has `c·x + d·z(x) ≤ ρ·OPT` of the covering LP.
pub trait LpRelativeApprox {
    fn rho(&self) -> Rational;
    fn approximate(&self, costs: &[Vec<Rational>]) -> Result<Allocation>;
}

/// An exact CM algorithm over an explicit allocation list, valid as an
/// LP-relative algorithm for any `ρ` at least the integrality gap.
pub struct EnumerationApprox {
    pub omega: Vec<Allocation>,
    pub public: Vec<Rational>,
    pub rho: Rational,
}

impl EnumerationApprox {
    pub fn new(problem: &CoveringProblem, omega: &[Allocation], rho: Rational) -> Self {
        let public = omega.iter().map(|a| problem.public_cost(a).finite().cloned().unwrap_or_default()).collect();
        EnumerationApprox { omega: omega.to_vec(), public, rho }
    }
}

impl LpRelativeApprox for EnumerationApprox {
    fn rho(&self) -> Rational {
        self.rho.clone()
    }

    fn approximate(&self, costs: &[Vec<Rational>]) -> Result<Allocation> {
        let mut best: Option<(usize, Rational)> = None;
        for (k, a) in self.omega.iter().enumerate() {
            let v = a.signed_cost(costs) + &self.public[k];
            if best.as_ref().map_or(true, |(_, b)| v < *b) {
                best = Some((k, v));
            }
        }
        match best {
            Some((k, _)) => Ok(self.omega[k].clone()),
            None => bail!(Infeasible, "no feasible allocation"),
        }
    }
}

/// A convex combination of allocations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Positive weights summing to 1, sorted by allocation.
    pub atoms: Vec<(Allocation, Rational)>,
}

impl Decomposition {
    pub fn marginal(&self, object_counts: &[usize]) -> FracAllocation {
        let mut out: Vec<Vec<Rational>> = object_counts.iter().map(|&k| vec![Rational::zero(); k]).collect();
        for (a, w) in &self.atoms {
            for (i, v) in a.pairs() {
                out[i][v] += w;
            }
        }
        FracAllocation(out)
    }

    pub fn total_weight(&self) -> Rational {
        self.atoms.iter().map(|(_, w)| w).sum()
    }
}

fn scaled_target(x: &FracAllocation, rho: &Rational) -> FracAllocation {
    FracAllocation(x.0.iter().map(|xi| xi.iter().map(|v| (rho * v).min(Rational::one())).collect()).collect())
}

/// Writes `min(ρx, 1)` as a convex combination of allocations whose expected
/// public cost is at most `ρ·Π(x)`.
///
/// The dual of the decomposition LP is solved by cutting planes. For a dual
/// point `(α, β, θ)` below value 1, the approximation algorithm runs on the
/// clamped costs `Γ·α̃` and its output is augmented with every object where
/// `ρx > 1` or `α < 0`; the augmented allocation gives the violated
/// constraint. The weights are then read off the compact primal.
pub fn convex_decompose(
    cmlp: &CmLp,
    x: &FracAllocation,
    rho: &Rational,
    approx: &dyn LpRelativeApprox,
) -> Result<Decomposition> {
    if *rho < Rational::one() {
        bail!(Input, "rho {} is below 1", rho);
    }
    if !cmlp.contains(x)? {
        bail!(Input, "{:?} is not in the covering LP's feasible region", x);
    }
    let counts = cmlp.object_counts.clone();
    let k = cmlp.x_len();
    let public_x = cmlp.public_cost(x)?;
    let target = scaled_target(x, rho).flat();
    let xf = x.flat();
    let rho_public = rho * &public_x;
    let (beta, theta) = (k, k + 1);

    let mut objective: Vec<Rational> = target.iter().map(|t| -t).collect();
    objective.push(-&rho_public);
    objective.push(-Rational::one());
    let mut normalization: Vec<(usize, Rational)> = target.iter().cloned().enumerate().collect();
    normalization.push((beta, rho_public.clone()));
    normalization.push((theta, Rational::one()));
    let mut bounds = vec![LowerBound::Free; k];
    bounds.extend([LowerBound::Zero, LowerBound::Zero]);
    let problem = CuttingPlaneProblem {
        objective,
        bounds,
        static_rows: vec![Row::new(normalization, Relation::Le, Rational::one())],
    };

    let mut publics: BTreeMap<Allocation, Rational> = BTreeMap::new();
    let mut oracle = |cand: Candidate<'_>| -> Result<Vec<Cut<Allocation>>> {
        let (u, threshold) = match cand {
            Candidate::Point(u) => (u, Rational::one()),
            Candidate::Ray(d) => (d, Rational::zero()),
        };
        let (alpha, b, t) = (&u[..k], &u[beta], &u[theta]);
        let mut value = t.clone();
        for (tj, aj) in target.iter().zip(alpha) {
            value.add_product(tj, aj);
        }
        value.add_product(&rho_public, b);
        if value >= threshold {
            return Ok(Vec::new());
        }
        let clamped: Vec<Rational> = alpha
            .iter()
            .zip(&xf)
            .map(|(a, xv)| if !a.is_negative() && rho * xv <= Rational::one() { a.clone() } else { Rational::zero() })
            .collect();
        let gamma = if b.is_positive() {
            b.recip()
        } else if public_x.is_zero() {
            Rational::one()
        } else {
            let grain = denominator_lcm(clamped.iter()) * denominator_lcm(xf.iter()) * rho.denom();
            Rational::from(2) * Rational::from(grain) * rho * &public_x
        };
        let input = cmlp.unflatten(&clamped.iter().map(|a| &gamma * a).collect::<Vec<_>>());
        let found = approx.approximate(&input.0)?;
        let mut hat: Vec<Rational> = FracAllocation::from_allocation(&found, &counts).flat();
        for j in 0..k {
            if rho * &xf[j] > Rational::one() || alpha[j].is_negative() {
                hat[j] = Rational::one();
            }
        }
        let hat = cmlp.unflatten(&hat);
        let Some(alloc) = hat.to_allocation() else { unreachable!("augmented vector is integral") };
        let public = match cmlp.completion(&hat)? {
            Some(c) => c.cost,
            None => bail!(Contract, "approximation output {:?} augments to an infeasible allocation", found),
        };
        let mut lhs = t.clone();
        for (hj, aj) in hat.flat().iter().zip(alpha) {
            lhs.add_product(hj, aj);
        }
        lhs.add_product(&public, b);
        if lhs >= threshold {
            bail!(
                Contract,
                "approximation algorithm missed its factor {} at dual alpha={:?} beta={} theta={}",
                rho,
                alpha,
                b,
                t
            );
        }
        let mut coeffs: Vec<(usize, Rational)> =
            hat.flat().into_iter().enumerate().filter(|(_, h)| !h.is_zero()).map(|(j, h)| (j, -h)).collect();
        coeffs.push((beta, -&public));
        coeffs.push((theta, -Rational::one()));
        publics.insert(alloc.clone(), public);
        Ok(vec![Cut { coeffs, rhs: -Rational::one(), tag: alloc }])
    };
    let result = match cutting_plane_maximize(&problem, &mut oracle, &CuttingPlaneOptions::default())? {
        CuttingPlaneOutcome::Optimal(r) => r,
        CuttingPlaneOutcome::Unbounded { .. } => bail!(Contract, "decomposition dual is unbounded"),
        CuttingPlaneOutcome::Infeasible => bail!(Internal, "decomposition dual is infeasible"),
    };
    if result.optimum != -Rational::one() {
        bail!(Contract, "decomposition dual optimum is {} instead of 1", -result.optimum);
    }

    let columns: Vec<Allocation> = result.cuts.iter().map(|c| c.tag.clone()).collect();
    let mut lp = LinearProgram::new(Sense::Maximize, 0);
    for _ in &columns {
        lp.add_var(Rational::one(), LowerBound::Zero);
    }
    for i in 0..counts.len() {
        for v in 0..counts[i] {
            let j = cmlp.offset(i) + v;
            let row = columns.iter().enumerate().filter(|(_, a)| a.contains(i, v)).map(|(l, _)| (l, Rational::one())).collect();
            lp.add_row(row, Relation::Eq, target[j].clone());
        }
    }
    let pub_row = columns.iter().enumerate().map(|(l, a)| (l, publics[a].clone())).collect();
    lp.add_row(pub_row, Relation::Le, rho_public.clone());
    lp.add_row((0..columns.len()).map(|l| (l, Rational::one())).collect(), Relation::Le, Rational::one());
    let sol = match solve_lp(&lp)? {
        LpOutcome::Optimal(s) => s,
        _ => bail!(Internal, "compact decomposition LP has no optimum"),
    };
    let mut atoms: Vec<(Allocation, Rational)> =
        columns.into_iter().zip(sol.x).filter(|(_, w)| w.is_positive()).collect();
    atoms.sort();
    let dec = Decomposition { atoms };
    if !dec.total_weight().is_one() {
        bail!(Internal, "decomposition weights sum to {}", dec.total_weight());
    }
    if dec.marginal(&counts).flat() != target {
        bail!(Internal, "decomposition marginals differ from min(rho x, 1)");
    }
    Ok(dec)
}

/// A rounded payment-LP solution over allocations.
#[derive(Clone, Debug)]
pub struct RoundedSolution {
    /// Lotteries `x̃` and payments `q` over `D̄`.
    pub pair: LpPair<Allocation>,
    /// `y_c[i]`, the allocation probability of player `i` under the relaxed row.
    pub marginals: Vec<Vec<Rational>>,
    /// `ỹ_c[i] = min(ρ·y_c[i], 1)`.
    pub scaled: Vec<Vec<Rational>>,
    pub rho: Rational,
}

fn player_marginals(pair: &LpPair<FracAllocation>, k: usize, counts: &[usize]) -> FracAllocation {
    let mut y: Vec<Vec<Rational>> = counts.iter().map(|&c| vec![Rational::zero(); c]).collect();
    for (col, w) in &pair.x[k] {
        for (yi, xi) in y.iter_mut().zip(&col.0) {
            for (a, b) in yi.iter_mut().zip(xi) {
                a.add_product(w, b);
            }
        }
    }
    FracAllocation(y)
}

fn allocation_pair(
    source: &LpPair<FracAllocation>,
    x: Vec<Vec<(Allocation, Rational)>>,
    p: Vec<Vec<Rational>>,
    public_of: impl Fn(&Allocation) -> Result<Rational>,
) -> Result<LpPair<Allocation>> {
    let mut public: BTreeMap<Allocation, Rational> = BTreeMap::new();
    for (a, _) in x.iter().flatten() {
        if !public.contains_key(a) {
            public.insert(a.clone(), public_of(a)?);
        }
    }
    let mut pair = LpPair {
        profiles: source.profiles.clone(),
        weights: source.weights.clone(),
        x,
        p,
        public: public.into_iter().collect(),
        kappa: source.kappa.clone(),
        value: Rational::zero(),
        dual_value: Rational::zero(),
    };
    pair.value = pair.objective();
    pair.dual_value = pair.value.clone();
    Ok(pair)
}

/// `q(cˡ) = cˡ·ỹ(cˡ) + Σ_{t>ℓ} (cᵗ − cᵗ⁻¹)·ỹ(cᵗ)` for increasing values `c¹ < … < cᵏ`.
pub fn threshold_payments(values: &[Rational], scaled: &[Rational]) -> Vec<Rational> {
    let mut q = vec![Rational::zero(); values.len()];
    let mut tail = Rational::zero();
    for l in (0..values.len()).rev() {
        q[l] = &values[l] * &scaled[l] + &tail;
        if l > 0 {
            tail.add_product(&(&values[l] - &values[l - 1]), &scaled[l]);
        }
    }
    q
}

/// Rounds a relaxed single-dimensional solution: each row's marginal vector
/// is scaled by `ρ`, decomposed into allocations, and paid by the threshold
/// formula over the ordered support values.
pub fn round_single_dim(
    cmlp: &CmLp,
    pair: &LpPair<FracAllocation>,
    support: &BoundedSupport,
    rho: &Rational,
    approx: &dyn LpRelativeApprox,
) -> Result<RoundedSolution> {
    let counts = cmlp.object_counts.clone();
    if counts.iter().any(|&k| k != 1) {
        bail!(Unsupported, "threshold rounding needs one covering object per player");
    }
    let n = counts.len();
    let rows = pair.profiles.len();
    let mut memo: HashMap<FracAllocation, Decomposition> = HashMap::new();
    let mut marginals = Vec::with_capacity(rows);
    let mut scaled = Vec::with_capacity(rows);
    let mut x = Vec::with_capacity(rows);
    for k in 0..rows {
        let y = player_marginals(pair, k, &counts);
        let dec = match memo.get(&y) {
            Some(d) => d.clone(),
            None => {
                let d = convex_decompose(cmlp, &y, rho, approx)?;
                memo.insert(y.clone(), d.clone());
                d
            }
        };
        marginals.push(y.0.iter().map(|yi| yi[0].clone()).collect::<Vec<_>>());
        scaled.push(scaled_target(&y, rho).0.into_iter().map(|yi| yi[0].clone()).collect::<Vec<_>>());
        x.push(dec.atoms);
    }
    let index = |c: &crate::model::TypeProfile| pair.index_of(c).expect("row for every profile of D̄");
    let mut q = vec![vec![Rational::zero(); n]; rows];
    for i in 0..n {
        let values: Vec<Rational> = support.marginal(i).iter().map(|ci| ci[0].clone()).collect();
        for rest in support.others(i) {
            let ks: Vec<usize> = support.extended_marginal(i).into_iter().map(|ci| index(&rest.with_player(i, ci))).collect();
            for w in ks.windows(2) {
                if marginals[w[0]][i] < marginals[w[1]][i] {
                    bail!(Internal, "allocation probability of player {} increases with its cost at {:?}", i, rest);
                }
            }
            let last = *ks.last().expect("sentinel member");
            if !marginals[last][i].is_zero() {
                bail!(Internal, "player {} is allocated at its sentinel type", i);
            }
            let ys: Vec<Rational> = ks[..values.len()].iter().map(|&k| scaled[k][i].clone()).collect();
            for (l, pay) in threshold_payments(&values, &ys).into_iter().enumerate() {
                q[ks[l]][i] = pay;
            }
        }
    }
    for k in 0..rows {
        for i in 0..n {
            if q[k][i] > rho * &pair.p[k][i] {
                bail!(Internal, "rounded payment {} exceeds rho times {} for player {}", q[k][i], pair.p[k][i], i);
            }
        }
    }
    let rounded = allocation_pair(pair, x, q, |a| cmlp.public_cost(&FracAllocation::from_allocation(a, &counts)))?;
    Ok(RoundedSolution { pair: rounded, marginals, scaled, rho: rho.clone() })
}

/// Splits fractional facility marginals into integral facility sets.
pub trait UflDecomposer {
    /// Weights over nonempty facility sets with marginals exactly `y`.
    fn decompose(&self, problem: &CoveringProblem, y: &FracAllocation) -> Result<Vec<(Allocation, Rational)>>;
}

/// Enumerates every nonempty facility set and picks the decomposition with
/// the least expected nearest-facility assignment cost.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactUflDecomposer;

impl UflDecomposer for ExactUflDecomposer {
    fn decompose(&self, problem: &CoveringProblem, y: &FracAllocation) -> Result<Vec<(Allocation, Rational)>> {
        let PublicCost::FacilityLocation(fl) = &problem.public else {
            bail!(Unsupported, "facility decomposition needs a facility-location instance");
        };
        let counts = problem.object_counts();
        let total: usize = counts.iter().sum();
        if total > 20 {
            bail!(Size, "{} facilities are too many to enumerate", total);
        }
        let mut sets = Vec::new();
        for m in 1u64..(1 << total) {
            let mut masks = Vec::new();
            let mut shift = 0;
            for &k in &counts {
                masks.push((m >> shift) & ((1u64 << k) - 1));
                shift += k;
            }
            let a = Allocation::from_masks(masks);
            let cost = fl.assignment_cost(&a).expect("nonempty facility set");
            sets.push((a, cost));
        }
        sets.sort();
        let mut lp = LinearProgram::new(Sense::Minimize, 0);
        for (_, cost) in &sets {
            lp.add_var(cost.clone(), LowerBound::Zero);
        }
        for (i, &k) in counts.iter().enumerate() {
            for v in 0..k {
                let row = sets.iter().enumerate().filter(|(_, (a, _))| a.contains(i, v)).map(|(l, _)| (l, Rational::one())).collect();
                lp.add_row(row, Relation::Eq, y.0[i][v].clone());
            }
        }
        lp.add_row((0..sets.len()).map(|l| (l, Rational::one())).collect(), Relation::Eq, Rational::one());
        match solve_lp(&lp)? {
            LpOutcome::Optimal(sol) => {
                Ok(sets.into_iter().zip(sol.x).filter(|(_, w)| w.is_positive()).map(|((a, _), w)| (a, w)).collect())
            }
            _ => bail!(Contract, "facility marginals {:?} have no decomposition into facility sets", y),
        }
    }
}

/// Per-profile assignment cost figures of a facility rounding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentReport {
    /// Expected assignment cost of the relaxed row.
    pub fractional: Rational,
    /// Expected nearest-facility cost of the rounded lottery.
    pub rounded: Rational,
}

/// A facility rounding: lotteries over facility sets with the relaxed
/// payments kept.
#[derive(Clone, Debug)]
pub struct BuflRounding {
    pub pair: LpPair<Allocation>,
    pub assignment: Vec<AssignmentReport>,
    pub budget: Option<Rational>,
}

impl BuflRounding {
    /// `max_c rounded(c) / B`, or `None` without a positive budget.
    pub fn budget_factor(&self) -> Option<Rational> {
        let b = self.budget.as_ref().filter(|b| b.is_positive())?;
        self.assignment.iter().map(|r| &r.rounded / b).max()
    }
}

/// Replaces every relaxed row by a decomposition of its facility marginals.
/// Payments are unchanged since every player's expected cost is preserved.
pub fn round_bufl(
    problem: &CoveringProblem,
    pair: &LpPair<FracAllocation>,
    decomposer: &dyn UflDecomposer,
) -> Result<BuflRounding> {
    let PublicCost::FacilityLocation(fl) = &problem.public else {
        bail!(Unsupported, "facility rounding needs a facility-location instance");
    };
    let counts = problem.object_counts();
    let mut x = Vec::new();
    let mut assignment = Vec::new();
    for k in 0..pair.profiles.len() {
        let y = player_marginals(pair, k, &counts);
        let atoms = decomposer.decompose(problem, &y)?;
        let got = Decomposition { atoms: atoms.clone() };
        if !got.total_weight().is_one() || got.marginal(&counts) != y {
            bail!(Contract, "decomposer changed the facility marginals at {:?}", pair.profiles[k]);
        }
        let rounded = atoms.iter().map(|(a, w)| w * fl.assignment_cost(a).unwrap_or_default()).sum();
        assignment.push(AssignmentReport { fractional: pair.expected_public(k), rounded });
        x.push(atoms);
    }
    let rounded = allocation_pair(pair, x, pair.p.clone(), |a| {
        fl.assignment_cost(a).ok_or_else(|| crate::Error::Contract("empty facility set".into()))
    })?;
    Ok(BuflRounding { pair: rounded, assignment, budget: fl.budget.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn threshold_payments_examples() {
        let ones = threshold_payments(&[r(1, 1), r(2, 1)], &[r(1, 1), r(1, 1)]);
        assert_eq!(ones, vec![r(2, 1), r(2, 1)]);
        let q = threshold_payments(&[r(1, 1), r(3, 1)], &[r(1, 1), r(1, 2)]);
        assert_eq!(q, vec![r(2, 1), r(3, 2)]);
        assert_eq!(&q[0] - &q[1], r(1, 1) * (r(1, 1) - r(1, 2)));
    }

    #[test]
    fn frac_allocation_round_trip() {
        let a = Allocation::from_sets(&[vec![1], vec![], vec![0]]);
        let x = FracAllocation::from_allocation(&a, &[2, 1, 1]);
        assert!(x.is_integral());
        assert_eq!(x.to_allocation(), Some(a));
        let half = FracAllocation(vec![vec![r(1, 2)]]);
        assert_eq!(half.to_allocation(), None);
        assert_eq!(half.player_cost(0, &[r(4, 1)]), r(2, 1));
    }

    #[test]
    fn completion_without_public_variables() {
        let lp = CmLp::new(
            vec![1, 1],
            0,
            vec![CmRow { x: vec![(0, r(1, 1)), (1, r(1, 1))], z: vec![], rhs: r(1, 1) }],
            vec![],
        )
        .unwrap();
        assert!(lp.contains(&FracAllocation(vec![vec![r(1, 2)], vec![r(1, 2)]])).unwrap());
        assert!(!lp.contains(&FracAllocation(vec![vec![r(1, 3)], vec![r(1, 3)]])).unwrap());
        assert!(CmLp::new(vec![1], 0, vec![CmRow { x: vec![(0, r(-1, 1))], z: vec![], rhs: r(0, 1) }], vec![]).is_err());
    }
}
