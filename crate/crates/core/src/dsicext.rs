//! Dominant-strategy mechanisms for single-dimensional problems.
//!
//! The payment LP is imposed on every profile of `D̃ = ∏ᵢ(Dᵢ ∪ {mᵢ})`. Its
//! solution is extended to all profiles by rounding each cost up to the next
//! value of `D̃ᵢ` (the bucket map `H`), using VCG when every player is above
//! its largest support value, and charging threshold payments
//! `qᵢ(c) = cᵢ·Aᵢ(c) + ∫_{cᵢ}^∞ Aᵢ(t, c₋ᵢ) dt`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bounds::{estimate_from_solution, marginal_max_sum, max_support_cost, Overrides};
use crate::error::{bail, Result};
use crate::exact::{validate_allocation_space, CmOracle, EnumerationOracle, OracleSpace};
use crate::mechanism::{Atom, Evaluation, LotteryRow};
use crate::model::{Allocation, CoveringProblem, SupportedDistribution, TypeProfile, DEFAULT_ENUMERATION_CAP};
use crate::payment::{self, IcGroup, LpPair, PaymentLayout};
use crate::rational::Rational;

/// Profiles allowed in the product LP.
pub const PRODUCT_CAP: usize = 20_000;

/// `∏ᵢ Dᵢ` or `∏ᵢ D̃ᵢ` as sorted type profiles.
fn product(values: &[Vec<Rational>]) -> Vec<TypeProfile> {
    let mut out = vec![Vec::new()];
    for vi in values {
        let mut next = Vec::with_capacity(out.len() * vi.len());
        for prefix in &out {
            for v in vi {
                let mut p: Vec<Vec<Rational>> = prefix.clone();
                p.push(vec![v.clone()]);
                next.push(p);
            }
        }
        out = next;
    }
    let mut profiles: Vec<TypeProfile> = out.into_iter().map(TypeProfile).collect();
    profiles.sort();
    profiles
}

fn product_size(values: &[Vec<Rational>]) -> Result<usize> {
    let mut size = 1usize;
    for vi in values {
        size = size.saturating_mul(vi.len());
    }
    if size > PRODUCT_CAP {
        bail!(Size, "product support has {} profiles, above the limit {}", size, PRODUCT_CAP);
    }
    Ok(size)
}

fn scalar_marginals(d: &SupportedDistribution) -> Result<Vec<Vec<Rational>>> {
    let mut out = Vec::new();
    for i in 0..d.n() {
        let m = d.marginal(i);
        if m.iter().any(|ci| ci.len() != 1) {
            bail!(Unsupported, "dominant-strategy extension needs one covering object per player");
        }
        out.push(m.into_iter().map(|ci| ci[0].clone()).collect());
    }
    Ok(out)
}

/// `IC` groups over a product of per-player value lists.
fn product_layout(values: &[Vec<Rational>], d: &SupportedDistribution, kappa: &Rational, sentinels: Option<&[Rational]>) -> PaymentLayout {
    let profiles = product(values);
    let index = |c: &TypeProfile| profiles.binary_search(c).expect("profile in product");
    let n = values.len();
    let mut groups = Vec::new();
    for i in 0..n {
        let mut rest_values = values.to_vec();
        rest_values[i] = vec![values[i][0].clone()];
        for rest in product(&rest_values) {
            let members = values[i].iter().map(|v| index(&rest.with_player(i, vec![v.clone()]))).collect();
            groups.push(IcGroup { player: i, members });
        }
    }
    let forbidden = profiles
        .iter()
        .map(|c| match sentinels {
            Some(m) => {
                let at: Vec<bool> = (0..n).map(|i| c.player(i)[0] == m[i]).collect();
                if at.iter().all(|b| *b) {
                    vec![false; n]
                } else {
                    at
                }
            }
            None => vec![false; n],
        })
        .collect();
    PaymentLayout {
        weights: profiles.iter().map(|c| d.prob(c)).collect(),
        profiles,
        forbidden,
        groups,
        pinned: HashSet::new(),
        kappa: kappa.clone(),
    }
}

/// `D̃ᵢ = Dᵢ ∪ {mᵢ}` for single-object players, with the bucket map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSupport {
    /// `Dᵢ` in increasing order.
    pub values: Vec<Vec<Rational>>,
    pub sentinels: Vec<Rational>,
}

impl ProductSupport {
    pub fn new(values: Vec<Vec<Rational>>, sentinels: Vec<Rational>) -> Result<Self> {
        if values.len() != sentinels.len() || values.iter().any(Vec::is_empty) {
            bail!(Input, "one nonempty value list and one sentinel per player");
        }
        for (vi, m) in values.iter().zip(&sentinels) {
            if vi.windows(2).any(|w| w[0] >= w[1]) {
                bail!(Input, "support values must be strictly increasing");
            }
            if m <= vi.last().expect("nonempty") {
                bail!(Input, "sentinel {} does not exceed the largest support value", m);
            }
        }
        Ok(ProductSupport { values, sentinels })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `cᵢ^max`.
    pub fn max_value(&self, i: usize) -> &Rational {
        self.values[i].last().expect("nonempty")
    }

    /// `D̃ᵢ`, sentinel last.
    pub fn extended(&self, i: usize) -> Vec<Rational> {
        let mut v = self.values[i].clone();
        v.push(self.sentinels[i].clone());
        v
    }

    pub fn extended_values(&self) -> Vec<Vec<Rational>> {
        (0..self.n()).map(|i| self.extended(i)).collect()
    }

    /// `Hᵢ(t)`: the least value of `D̃ᵢ` at or above `t`, and `mᵢ` beyond it.
    pub fn bucket(&self, i: usize, t: &Rational) -> Rational {
        self.values[i].iter().find(|v| t <= *v).cloned().unwrap_or_else(|| self.sentinels[i].clone())
    }

    /// `H(c)`.
    pub fn map(&self, c: &TypeProfile) -> TypeProfile {
        TypeProfile((0..self.n()).map(|i| vec![self.bucket(i, &c.player(i)[0])]).collect())
    }

    /// `D̃` in canonical order.
    pub fn profiles(&self) -> Vec<TypeProfile> {
        product(&self.extended_values())
    }

    pub fn size(&self) -> usize {
        self.values.iter().map(|v| v.len() + 1).product()
    }

    /// A DSIC test grid per player: 0, every value of `D̃ᵢ`, midpoints of
    /// consecutive values (and of 0 and the least one), `cᵢ^max + 1` and `mᵢ + 1`.
    pub fn canonical_grid(&self) -> Vec<Vec<Vec<Rational>>> {
        (0..self.n())
            .map(|i| {
                let ext = self.extended(i);
                let mut pts = vec![Rational::zero()];
                let mut prev = Rational::zero();
                for v in &ext {
                    pts.push((&prev + v) / Rational::from(2));
                    pts.push(v.clone());
                    prev = v.clone();
                }
                pts.push(self.max_value(i) + Rational::one());
                pts.push(&self.sentinels[i] + Rational::one());
                pts.sort();
                pts.dedup();
                pts.into_iter().map(|t| vec![t]).collect()
            })
            .collect()
    }
}

/// Sentinels from the payment LP over `∏ᵢ Dᵢ`, unless overridden.
pub fn compute_product_support(
    problem: &CoveringProblem,
    d: &SupportedDistribution,
    kappa: &Rational,
    oracle: &dyn CmOracle,
    overrides: &Overrides,
) -> Result<ProductSupport> {
    let values = scalar_marginals(d)?;
    product_size(&values.iter().map(|v| [v.clone(), vec![Rational::zero()]].concat()).collect::<Vec<_>>())?;
    let layout = product_layout(&values, d, kappa, None);
    let mut space = OracleSpace::new(problem, oracle);
    let pair = payment::solve(&layout, &mut space)?;
    let estimate = estimate_from_solution(&pair, &max_support_cost(d), &marginal_max_sum(d))?;
    let mut sentinels = vec![estimate; values.len()];
    for (i, v) in overrides {
        if *i >= values.len() {
            bail!(Input, "sentinel override for unknown player {}", i);
        }
        sentinels[*i] = v.clone();
    }
    ProductSupport::new(values, sentinels)
}

/// The payment LP with incentive and participation constraints on all of
/// `D̃`. Where some player is below its sentinel, players at their sentinel
/// receive nothing; the all-sentinel profile is unrestricted.
pub fn solve_product_lp(
    problem: &CoveringProblem,
    product: &ProductSupport,
    d: &SupportedDistribution,
    kappa: &Rational,
    oracle: &dyn CmOracle,
) -> Result<LpPair<Allocation>> {
    if kappa.is_negative() {
        bail!(Input, "negative kappa {}", kappa);
    }
    let ext = product.extended_values();
    product_size(&ext)?;
    let layout = product_layout(&ext, d, kappa, Some(&product.sentinels));
    let mut space = OracleSpace::new(problem, oracle);
    let pair = payment::solve(&layout, &mut space)?;
    if let Some(why) = payment::check_feasible(&layout, &pair) {
        bail!(Internal, "product LP solution is infeasible: {why}");
    }
    Ok(pair)
}

/// A dominant-strategy mechanism built from a product-LP solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DsicMechanism {
    pub support: ProductSupport,
    pub kappa: Rational,
    /// Lotteries on `D̃`, sorted by profile.
    pub rows: Vec<(TypeProfile, Vec<Atom>)>,
    /// Ω with public costs, in canonical order, for the VCG region.
    pub omega: Vec<(Allocation, Rational)>,
}

fn allocation_probability(atoms: &[Atom], i: usize) -> Rational {
    atoms.iter().filter(|a| !a.allocation.is_empty_for(i)).map(|a| &a.probability).sum()
}

impl DsicMechanism {
    pub fn n(&self) -> usize {
        self.support.n()
    }

    fn row(&self, c: &TypeProfile) -> &[Atom] {
        let k = self.rows.binary_search_by(|(d, _)| d.cmp(c)).expect("bucketed profile in D̃");
        &self.rows[k].1
    }

    fn in_lp_region(&self, costs: &[Rational]) -> bool {
        (0..self.n()).any(|i| costs[i] <= *self.support.max_value(i))
    }

    fn social_cost(&self, costs: &[Rational], a: &Allocation, public: &Rational) -> Rational {
        let own: Rational = (0..self.n()).filter(|&j| !a.is_empty_for(j)).map(|j| costs[j].clone()).sum();
        own + &self.kappa * public
    }

    fn vcg(&self, costs: &[Rational]) -> Atom {
        let mut best: Option<(usize, Rational)> = None;
        for (k, (a, public)) in self.omega.iter().enumerate() {
            let v = self.social_cost(costs, a, public);
            if best.as_ref().map_or(true, |(_, b)| v < *b) {
                best = Some((k, v));
            }
        }
        let (a, public) = &self.omega[best.expect("nonempty Ω").0];
        Atom { allocation: a.clone(), probability: Rational::one(), public_cost: public.clone() }
    }

    /// The cost below which `i` wins under VCG against `costs₋ᵢ`.
    fn vcg_threshold(&self, i: usize, costs: &[Rational]) -> Option<Rational> {
        let mut without: Option<Rational> = None;
        let mut with: Option<Rational> = None;
        let mut probe = costs.to_vec();
        probe[i] = Rational::zero();
        for (a, public) in &self.omega {
            let v = self.social_cost(&probe, a, public);
            let slot = if a.is_empty_for(i) { &mut without } else { &mut with };
            if slot.as_ref().map_or(true, |b| v < *b) {
                *slot = Some(v);
            }
        }
        Some(without? - with?)
    }

    /// `∫_{cᵢ}^∞ Aᵢ(t, c₋ᵢ) dt`.
    fn tail_integral(&self, i: usize, costs: &[Rational]) -> Rational {
        let ci = &costs[i];
        let others_in = (0..self.n()).any(|j| j != i && costs[j] <= *self.support.max_value(j));
        let mut h: Vec<Vec<Rational>> = (0..self.n()).map(|j| vec![self.support.bucket(j, &costs[j])]).collect();
        let mut total = Rational::zero();
        let mut lo = Rational::zero();
        for v in &self.support.values[i] {
            if v > ci {
                h[i] = vec![v.clone()];
                let a = allocation_probability(self.row(&TypeProfile(h.clone())), i);
                let start = lo.clone().max(ci.clone());
                total.add_product(&a, &(v - start));
            }
            lo = v.clone();
        }
        if !others_in {
            let start = ci.clone().max(self.support.max_value(i).clone());
            if let Some(tau) = self.vcg_threshold(i, costs) {
                if tau > start {
                    total += tau - start;
                }
            }
        }
        total
    }

    pub fn evaluate(&self, c: &TypeProfile) -> Result<Evaluation> {
        let costs: Vec<Rational> = c.0.iter().map(|ci| ci[0].clone()).collect();
        let atoms = if self.in_lp_region(&costs) { self.row(&self.support.map(c)).to_vec() } else { vec![self.vcg(&costs)] };
        let payments = (0..self.n())
            .map(|i| &costs[i] * allocation_probability(&atoms, i) + self.tail_integral(i, &costs))
            .collect();
        Ok(Evaluation::from_row(LotteryRow { atoms, payments }))
    }
}

/// Builds the mechanism on all profiles from a product-LP solution over `D̃`.
pub fn dsic_extend(
    problem: &CoveringProblem,
    pair: &LpPair<Allocation>,
    product: &ProductSupport,
    omega: &[Allocation],
) -> Result<DsicMechanism> {
    let profiles = product.profiles();
    let mut rows = Vec::with_capacity(profiles.len());
    for c in &profiles {
        let Some(k) = pair.index_of(c) else { bail!(Input, "LP solution has no row for {:?}", c) };
        let atoms = pair.x[k]
            .iter()
            .map(|(a, w)| Atom { allocation: a.clone(), probability: w.clone(), public_cost: pair.public_cost(a) })
            .collect();
        rows.push((c.clone(), atoms));
    }
    let omega: Vec<(Allocation, Rational)> =
        omega.iter().filter_map(|a| problem.public_cost(a).finite().map(|v| (a.clone(), v.clone()))).collect();
    if omega.is_empty() {
        bail!(Infeasible, "no feasible allocation");
    }
    let mech = DsicMechanism { support: product.clone(), kappa: pair.kappa.clone(), rows, omega };
    for i in 0..product.n() {
        let mut rest_values = product.extended_values();
        rest_values[i] = vec![product.values[i][0].clone()];
        for rest in self::product(&rest_values) {
            let probs: Vec<Rational> = product
                .extended(i)
                .into_iter()
                .map(|v| allocation_probability(mech.row(&rest.with_player(i, vec![v])), i))
                .collect();
            if probs.windows(2).any(|w| w[0] < w[1]) {
                bail!(Internal, "allocation probability of player {} increases with its cost at {:?}", i, rest);
            }
        }
    }
    Ok(mech)
}

/// Everything the dominant-strategy pipeline produces.
#[derive(Clone, Debug)]
pub struct DsicSynthesis {
    pub omega: Vec<Allocation>,
    pub support: ProductSupport,
    pub pair: LpPair<Allocation>,
    pub mechanism: DsicMechanism,
}

/// Product sentinels, the product LP and its extension, with Ω enumerated.
pub fn synthesize_dsic(
    problem: &CoveringProblem,
    d: &SupportedDistribution,
    kappa: &Rational,
    overrides: &Overrides,
) -> Result<DsicSynthesis> {
    if !problem.is_single_dimensional() {
        bail!(Unsupported, "dominant-strategy extension needs one covering object per player");
    }
    let omega = problem.enumerate_allocations(DEFAULT_ENUMERATION_CAP)?;
    validate_allocation_space(problem, &omega)?;
    let oracle = EnumerationOracle::new(problem, &omega);
    let support = compute_product_support(problem, d, kappa, &oracle, overrides)?;
    let pair = solve_product_lp(problem, &support, d, kappa, &oracle)?;
    let mechanism = dsic_extend(problem, &pair, &support, &omega)?;
    Ok(DsicSynthesis { omega, support, pair, mechanism })
}
