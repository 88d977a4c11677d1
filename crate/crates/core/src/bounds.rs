//! Sentinel bound estimates `mᵢ` and the extended supports `D̄ᵢ`, `D̄`.
//!
//! The estimate comes from the payment LP restricted to `⋃ᵢ(Dᵢ×D₋ᵢ)`: with
//! `N` the lcm of the denominators of an optimal basic solution `(x̂, q̂)`,
//!
//! ```text
//! m = max(2·Σ_{i,v} max_{cᵢ∈Dᵢ} c_{i,v},  N·Σ_{i,c} q̂_{i,c})
//! ```
//!
//! is large enough that an optimal mechanism never allocates to a player who
//! reports `m·1`.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::exact::{CmOracle, OracleSpace};
use crate::model::{Allocation, CoveringProblem, SupportedDistribution, TypeProfile};
use crate::payment::{self, IcGroup, LpPair, Outcome, PaymentLayout};
use crate::rational::{denominator_lcm, Rational};

/// Largest bit length of `N` accepted before giving up with a size error.
pub const MAX_GRANULARITY_BITS: u64 = 4096;

/// Where a profile of `D̄` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileClass {
    /// In `⋃ᵢ(Dᵢ×D₋ᵢ)`.
    Base,
    /// `(mᵢ·1, c₋ᵢ)` with `c₋ᵢ ∈ D₋ᵢ`.
    Sentinel(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "BoundedSupportRecord", from = "BoundedSupportRecord")]
pub struct BoundedSupport {
    distribution: SupportedDistribution,
    sentinel: Vec<Rational>,
    formula: Rational,
    certified: bool,
    marginals: Vec<Vec<Vec<Rational>>>,
    others: Vec<HashSet<TypeProfile>>,
    base: Vec<TypeProfile>,
    extended: Vec<TypeProfile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BoundedSupportRecord {
    distribution: SupportedDistribution,
    sentinel: Vec<Rational>,
    formula: Rational,
    certified: bool,
}

impl From<BoundedSupport> for BoundedSupportRecord {
    fn from(b: BoundedSupport) -> Self {
        BoundedSupportRecord {
            distribution: b.distribution,
            sentinel: b.sentinel,
            formula: b.formula,
            certified: b.certified,
        }
    }
}

impl From<BoundedSupportRecord> for BoundedSupport {
    fn from(r: BoundedSupportRecord) -> Self {
        BoundedSupport::assemble(r.distribution, r.sentinel, r.formula, r.certified)
    }
}

/// `⋃ᵢ(Dᵢ×D₋ᵢ)` in canonical order.
pub fn support_union(d: &SupportedDistribution) -> Vec<TypeProfile> {
    let mut set = BTreeSet::new();
    for i in 0..d.n() {
        let di = d.marginal(i);
        for rest in d.others(i) {
            for ci in &di {
                set.insert(rest.with_player(i, ci.clone()));
            }
        }
    }
    set.into_iter().collect()
}

/// `max_{i, cᵢ∈Dᵢ, v} c_{i,v}`.
pub fn max_support_cost(d: &SupportedDistribution) -> Rational {
    d.profiles().flat_map(|c| c.0.iter().flatten()).max().cloned().unwrap_or_default()
}

impl BoundedSupport {
    fn assemble(distribution: SupportedDistribution, sentinel: Vec<Rational>, formula: Rational, certified: bool) -> Self {
        let n = distribution.n();
        let marginals: Vec<_> = (0..n).map(|i| distribution.marginal(i)).collect();
        let others: Vec<HashSet<TypeProfile>> = (0..n).map(|i| distribution.others(i).into_iter().collect()).collect();
        let base = support_union(&distribution);
        let mut ext: BTreeSet<TypeProfile> = base.iter().cloned().collect();
        for i in 0..n {
            let k = marginals[i][0].len();
            let m = vec![sentinel[i].clone(); k];
            for rest in &others[i] {
                ext.insert(rest.with_player(i, m.clone()));
            }
        }
        BoundedSupport {
            distribution,
            sentinel,
            formula,
            certified,
            marginals,
            others,
            base,
            extended: ext.into_iter().collect(),
        }
    }

    /// Builds the extended supports for explicit sentinel values.
    pub fn with_sentinels(distribution: SupportedDistribution, sentinel: Vec<Rational>, certified: bool) -> Result<Self> {
        if sentinel.len() != distribution.n() {
            bail!(Input, "expected {} sentinel values, got {}", distribution.n(), sentinel.len());
        }
        let max = max_support_cost(&distribution);
        for (i, m) in sentinel.iter().enumerate() {
            if *m <= max {
                bail!(Input, "sentinel value {} for player {} does not exceed the largest support cost", m, i);
            }
        }
        let formula = sentinel.iter().max().cloned().unwrap_or_default();
        Ok(Self::assemble(distribution, sentinel, formula, certified))
    }

    pub fn distribution(&self) -> &SupportedDistribution {
        &self.distribution
    }

    pub fn n(&self) -> usize {
        self.distribution.n()
    }

    pub fn sentinel(&self, i: usize) -> &Rational {
        &self.sentinel[i]
    }

    pub fn sentinels(&self) -> &[Rational] {
        &self.sentinel
    }

    /// The value of the estimate formula (before any override).
    pub fn formula(&self) -> &Rational {
        &self.formula
    }

    /// Whether every `mᵢ` is at least the formula value, so that sentinel
    /// payments may be fixed to zero without losing optimality.
    pub fn certified(&self) -> bool {
        self.certified
    }

    /// `mᵢ·1_{Tᵢ}`.
    pub fn sentinel_vector(&self, i: usize) -> Vec<Rational> {
        vec![self.sentinel[i].clone(); self.marginals[i][0].len()]
    }

    /// `Dᵢ`.
    pub fn marginal(&self, i: usize) -> &[Vec<Rational>] {
        &self.marginals[i]
    }

    /// `D̄ᵢ = Dᵢ ∪ {mᵢ·1}`, sentinel last.
    pub fn extended_marginal(&self, i: usize) -> Vec<Vec<Rational>> {
        let mut v = self.marginals[i].clone();
        v.push(self.sentinel_vector(i));
        v
    }

    /// `D₋ᵢ` in canonical order.
    pub fn others(&self, i: usize) -> Vec<TypeProfile> {
        let mut v: Vec<_> = self.others[i].iter().cloned().collect();
        v.sort();
        v
    }

    pub fn has_others(&self, i: usize, c: &TypeProfile) -> bool {
        self.others[i].contains(&c.others(i))
    }

    /// `⋃ᵢ(Dᵢ×D₋ᵢ)`.
    pub fn base_profiles(&self) -> &[TypeProfile] {
        &self.base
    }

    /// `D̄` in canonical order.
    pub fn extended_profiles(&self) -> &[TypeProfile] {
        &self.extended
    }

    /// `I(c) = {i : c₋ᵢ ∈ D₋ᵢ}`.
    pub fn players_in(&self, c: &TypeProfile) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.has_others(i, c)).collect()
    }

    pub fn classify(&self, c: &TypeProfile) -> Option<ProfileClass> {
        for i in self.players_in(c) {
            if self.marginals[i].iter().any(|ci| ci.as_slice() == c.player(i)) {
                return Some(ProfileClass::Base);
            }
        }
        for i in self.players_in(c) {
            if c.player(i) == self.sentinel_vector(i).as_slice() {
                return Some(ProfileClass::Sentinel(i));
            }
        }
        None
    }

    /// The layout of the full payment LP over `D̄`.
    pub(crate) fn layout(&self, kappa: &Rational, pin_sentinels: bool) -> PaymentLayout {
        let profiles = self.extended.clone();
        let index = |c: &TypeProfile| profiles.binary_search(c).expect("profile in D̄");
        let n = self.n();
        let mut forbidden = vec![vec![false; n]; profiles.len()];
        let mut pinned = HashSet::new();
        for (k, c) in profiles.iter().enumerate() {
            if let Some(ProfileClass::Sentinel(i)) = self.classify(c) {
                forbidden[k][i] = true;
                if pin_sentinels {
                    pinned.insert((i, k));
                }
            }
        }
        let mut groups = Vec::new();
        for i in 0..n {
            let ext = self.extended_marginal(i);
            for rest in self.others(i) {
                let members = ext.iter().map(|ci| index(&rest.with_player(i, ci.clone()))).collect();
                groups.push(IcGroup { player: i, members });
            }
        }
        let weights = profiles.iter().map(|c| self.distribution.prob(c)).collect();
        PaymentLayout { profiles, weights, forbidden, groups, pinned, kappa: kappa.clone() }
    }
}

/// `Ω(c)`: all of Ω on `⋃ᵢ(Dᵢ×D₋ᵢ)`, and the allocations leaving the
/// sentinel player out at a sentinel profile.
pub fn restricted_allocations(omega: &[Allocation], support: &BoundedSupport, c: &TypeProfile) -> Result<Vec<Allocation>> {
    match support.classify(c) {
        Some(ProfileClass::Base) => Ok(omega.to_vec()),
        Some(ProfileClass::Sentinel(i)) => Ok(omega.iter().filter(|a| a.is_empty_for(i)).cloned().collect()),
        None => bail!(Domain, "profile {:?} is not in the extended support", c),
    }
}

/// The payment LP over `⋃ᵢ(Dᵢ×D₋ᵢ)` with incentive constraints among `Dᵢ`
/// only.
pub(crate) fn support_layout(d: &SupportedDistribution, kappa: &Rational) -> PaymentLayout {
    let profiles = support_union(d);
    let index = |c: &TypeProfile| profiles.binary_search(c).expect("profile in support union");
    let n = d.n();
    let mut groups = Vec::new();
    for i in 0..n {
        let di = d.marginal(i);
        for rest in d.others(i) {
            let members = di.iter().map(|ci| index(&rest.with_player(i, ci.clone()))).collect();
            groups.push(IcGroup { player: i, members });
        }
    }
    PaymentLayout {
        weights: profiles.iter().map(|c| d.prob(c)).collect(),
        forbidden: vec![vec![false; n]; profiles.len()],
        profiles,
        groups,
        pinned: HashSet::new(),
        kappa: kappa.clone(),
    }
}

/// The estimate `m` for a solved support LP, with the degenerate guard.
pub(crate) fn estimate_from_solution<C: Outcome>(pair: &LpPair<C>, max_cost: &Rational, cost_sum: &Rational) -> Result<Rational> {
    let coords: Vec<Rational> = pair.x.iter().flatten().flat_map(|(c, _)| c.coordinates()).collect();
    let values = pair.x.iter().flatten().map(|(_, w)| w).chain(pair.p.iter().flatten()).chain(&coords);
    let n = denominator_lcm(values);
    if n.bits() > MAX_GRANULARITY_BITS {
        bail!(Size, "solution granularity has {} bits, above the limit {}", n.bits(), MAX_GRANULARITY_BITS);
    }
    let q_sum: Rational = pair.p.iter().flatten().sum();
    let granular = Rational::from(n) * q_sum;
    let m = (Rational::from(2) * cost_sum).max(granular);
    Ok(if m <= *max_cost { max_cost + Rational::one() } else { m })
}

/// `Σ_{i,v} max_{cᵢ∈Dᵢ} c_{i,v}`.
pub(crate) fn marginal_max_sum(d: &SupportedDistribution) -> Rational {
    let mut total = Rational::zero();
    for i in 0..d.n() {
        let di = d.marginal(i);
        for v in 0..di[0].len() {
            total += di.iter().map(|ci| &ci[v]).max().expect("nonempty marginal");
        }
    }
    total
}

/// The support LP solution together with the estimate it produced.
#[derive(Clone, Debug)]
pub struct SupportSolution {
    pub pair: LpPair<Allocation>,
    pub estimate: Rational,
}

/// Solves the support LP and normalizes it: in each incentive group, if some
/// member never allocates to the player yet pays it, that payment is
/// subtracted from every member of the group.
pub fn solve_support_lp(
    problem: &CoveringProblem,
    d: &SupportedDistribution,
    kappa: &Rational,
    oracle: &dyn CmOracle,
) -> Result<SupportSolution> {
    let layout = support_layout(d, kappa);
    let mut space = OracleSpace::new(problem, oracle);
    let mut pair = payment::solve(&layout, &mut space)?;
    let estimate = estimate_from_solution(&pair, &max_support_cost(d), &marginal_max_sum(d))?;
    for group in &layout.groups {
        let i = group.player;
        let shift = group
            .members
            .iter()
            .filter(|&&c| pair.x[c].iter().all(|(a, _)| a.is_empty_for(i)))
            .map(|&c| pair.p[c][i].clone())
            .max()
            .unwrap_or_default();
        if shift.is_positive() {
            for &c in &group.members {
                pair.p[c][i] -= &shift;
            }
        }
    }
    if let Some(why) = payment::check_feasible(&layout, &pair) {
        bail!(Internal, "normalized support LP solution is infeasible: {why}");
    }
    pair.value = pair.objective();
    Ok(SupportSolution { pair, estimate })
}

/// User-supplied sentinel values, by player.
pub type Overrides = Vec<(usize, Rational)>;

/// Computes `mᵢ` (identical for every player unless overridden) and the
/// extended supports.
pub fn compute_bound_estimates(
    problem: &CoveringProblem,
    d: &SupportedDistribution,
    kappa: &Rational,
    oracle: &dyn CmOracle,
    overrides: &Overrides,
) -> Result<(BoundedSupport, SupportSolution)> {
    let sol = solve_support_lp(problem, d, kappa, oracle)?;
    let support = bounded_from_estimate(d, &sol.estimate, overrides)?;
    Ok((support, sol))
}

pub(crate) fn bounded_from_estimate(d: &SupportedDistribution, estimate: &Rational, overrides: &Overrides) -> Result<BoundedSupport> {
    let n = d.n();
    let mut sentinel = vec![estimate.clone(); n];
    let max = max_support_cost(d);
    for (i, v) in overrides {
        if *i >= n {
            bail!(Input, "sentinel override for unknown player {}", i);
        }
        if *v <= max {
            bail!(Input, "sentinel override {} for player {} does not exceed the largest support cost {}", v, i, max);
        }
        sentinel[*i] = v.clone();
    }
    let certified = sentinel.iter().all(|m| m >= estimate);
    Ok(BoundedSupport::assemble(d.clone(), sentinel, estimate.clone(), certified))
}

/// Extends a normalized support-LP solution to all of `D̄`: at each sentinel
/// profile the min-total-cost allocation (first in canonical order) is chosen
/// with probability 1 and nothing is paid.
pub fn extend_support_solution(
    problem: &CoveringProblem,
    omega: &[Allocation],
    sol: &LpPair<Allocation>,
    support: &BoundedSupport,
) -> Result<LpPair<Allocation>> {
    let n = support.n();
    let mut x = Vec::new();
    let mut p = Vec::new();
    let mut used: BTreeSet<Allocation> = BTreeSet::new();
    for c in support.extended_profiles() {
        match support.classify(c) {
            Some(ProfileClass::Base) => {
                let k = sol.index_of(c).ok_or_else(|| crate::Error::Internal("support profile missing".into()))?;
                x.push(sol.x[k].clone());
                p.push(sol.p[k].clone());
            }
            Some(ProfileClass::Sentinel(i)) => {
                let best = omega
                    .iter()
                    .min_by(|a, b| c.total_cost(a).cmp(&c.total_cost(b)).then_with(|| a.cmp(b)))
                    .ok_or_else(|| crate::Error::Infeasible("no feasible allocation".into()))?;
                if !best.is_empty_for(i) {
                    bail!(Internal, "sentinel value too small: VCG allocates to player {} at {:?}", i, c);
                }
                x.push(vec![(best.clone(), Rational::one())]);
                p.push(vec![Rational::zero(); n]);
            }
            None => unreachable!("extended profiles classify"),
        }
    }
    for row in &x {
        used.extend(row.iter().map(|(a, _)| a.clone()));
    }
    let public = used
        .into_iter()
        .map(|a| {
            let v = problem.public_cost(&a).finite().cloned().unwrap_or_default();
            (a, v)
        })
        .collect();
    let weights = support.extended_profiles().iter().map(|c| support.distribution.prob(c)).collect();
    let mut pair = LpPair {
        profiles: support.extended_profiles().to_vec(),
        weights,
        x,
        p,
        public,
        kappa: sol.kappa.clone(),
        value: Rational::zero(),
        dual_value: sol.dual_value.clone(),
    };
    pair.value = pair.objective();
    Ok(pair)
}
