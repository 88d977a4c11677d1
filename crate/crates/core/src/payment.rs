//! The payment LP over a finite profile set, solved by column generation.
//!
//! The LP has an allocation lottery `x_{c,·}` and expected payments `p_{i,c}`
//! per profile `c`, with one incentive group per `(i, c₋ᵢ)` whose members are
//! the profiles `(c'ᵢ, c₋ᵢ)`. Within a group every member must prefer its own
//! row to every other member's row, and its own row must give nonnegative
//! utility. Allocation columns are priced out through a [`ColumnSpace`], which
//! minimizes a signed linear cost plus a weighted public cost.

use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::lp::{
    cutting_plane_maximize_seeded, Candidate, Cut, CuttingPlaneOptions, CuttingPlaneOutcome, CuttingPlaneProblem,
    LowerBound, Relation, Row,
};
use crate::model::{Allocation, TypeProfile};
use crate::rational::Rational;

/// Something an allocation lottery can put weight on.
pub trait Outcome: Clone + Eq + Hash + Ord + Debug {
    /// `Σ_v ci[v]·(amount of object v given to player i)`.
    fn player_cost(&self, i: usize, ci: &[Rational]) -> Rational;
    fn is_empty_for(&self, i: usize) -> bool;

    /// Fractional coordinates of the column, if any.
    fn coordinates(&self) -> Vec<Rational> {
        Vec::new()
    }

    fn signed_cost(&self, costs: &[Vec<Rational>]) -> Rational {
        costs.iter().enumerate().map(|(i, ci)| self.player_cost(i, ci)).sum()
    }
}

impl Outcome for Allocation {
    fn player_cost(&self, i: usize, ci: &[Rational]) -> Rational {
        self.objects(i).map(|v| &ci[v]).sum()
    }

    fn is_empty_for(&self, i: usize) -> bool {
        Allocation::is_empty_for(self, i)
    }
}

/// The set of allocation columns the LP may use.
pub trait ColumnSpace {
    type Col: Outcome;

    /// A column minimizing `Σᵢ costs[i]·col + weight·Π(col)` among columns
    /// that give nothing to the players flagged in `forbidden`. Costs may be
    /// negative.
    fn minimize(&mut self, costs: &[Vec<Rational>], weight: &Rational, forbidden: &[bool]) -> Result<Self::Col>;

    fn public_cost(&mut self, col: &Self::Col) -> Result<Rational>;
}

#[derive(Clone, Debug)]
pub(crate) struct IcGroup {
    pub player: usize,
    pub members: Vec<usize>,
}

/// The combinatorial shape of one payment LP.
#[derive(Clone, Debug)]
pub(crate) struct PaymentLayout {
    pub profiles: Vec<TypeProfile>,
    pub weights: Vec<Rational>,
    pub forbidden: Vec<Vec<bool>>,
    pub groups: Vec<IcGroup>,
    /// `(player, profile)` payments fixed to zero.
    pub pinned: HashSet<(usize, usize)>,
    pub kappa: Rational,
}

/// `x_{c,ω}` and `p_{i,c}` over a finite profile set, with the objective value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpPair<C> {
    pub profiles: Vec<TypeProfile>,
    pub weights: Vec<Rational>,
    /// Nonzero lottery entries per profile, in canonical column order.
    pub x: Vec<Vec<(C, Rational)>>,
    /// `p[c][i]`.
    pub p: Vec<Vec<Rational>>,
    /// Public cost of every column used.
    pub public: Vec<(C, Rational)>,
    pub kappa: Rational,
    pub value: Rational,
    /// Optimum of the dual; equal to `value` whenever the pair came from an LP solve.
    pub dual_value: Rational,
}

impl<C: Outcome> LpPair<C> {
    pub fn index_of(&self, c: &TypeProfile) -> Option<usize> {
        self.profiles.iter().position(|d| d == c)
    }

    pub fn public_cost(&self, col: &C) -> Rational {
        self.public.iter().find(|(d, _)| d == col).map(|(_, v)| v.clone()).unwrap_or_default()
    }

    /// `Σ_ω x_{c,ω}·cᵢ(ω)` for the profile at index `k` evaluated with `ci`.
    pub fn expected_cost(&self, k: usize, i: usize, ci: &[Rational]) -> Rational {
        self.x[k].iter().map(|(col, w)| w * col.player_cost(i, ci)).sum()
    }

    pub fn expected_public(&self, k: usize) -> Rational {
        self.x[k].iter().map(|(col, w)| w * self.public_cost(col)).sum()
    }

    /// `Σ_c w_c (Σᵢ p_{i,c} + κ·E[Π])`.
    pub fn objective(&self) -> Rational {
        let mut v = Rational::zero();
        for k in 0..self.profiles.len() {
            if self.weights[k].is_zero() {
                continue;
            }
            let pay: Rational = self.p[k].iter().sum();
            let term = pay + &self.kappa * self.expected_public(k);
            v.add_product(&self.weights[k], &term);
        }
        v
    }
}

struct Indexing {
    gamma: usize,
    y_base: Vec<usize>,
    beta_base: Vec<usize>,
    vars: usize,
    /// For each profile, its `(player, group, position)` memberships.
    members: Vec<Vec<(usize, usize, usize)>>,
}

impl Indexing {
    fn new(layout: &PaymentLayout) -> Self {
        let gamma = layout.profiles.len();
        let mut next = gamma;
        let mut y_base = Vec::new();
        let mut beta_base = Vec::new();
        let mut members = vec![Vec::new(); gamma];
        for (g, group) in layout.groups.iter().enumerate() {
            let k = group.members.len();
            y_base.push(next);
            next += k * k.saturating_sub(1);
            beta_base.push(next);
            next += k;
            for (a, &c) in group.members.iter().enumerate() {
                members[c].push((group.player, g, a));
            }
        }
        Indexing { gamma, y_base, beta_base, vars: next, members }
    }

    /// Dual of "member `a` prefers its row to member `b`'s" in group `g`.
    fn y(&self, layout: &PaymentLayout, g: usize, a: usize, b: usize) -> usize {
        let k = layout.groups[g].members.len();
        debug_assert!(a != b);
        self.y_base[g] + a * (k - 1) + if b < a { b } else { b - 1 }
    }

    fn beta(&self, g: usize, a: usize) -> usize {
        self.beta_base[g] + a
    }
}

type Tag<C> = (usize, C);

struct Pricing<'a, S: ColumnSpace> {
    layout: &'a PaymentLayout,
    ix: &'a Indexing,
    space: &'a mut S,
    public: HashMap<S::Col, Rational>,
}

impl<S: ColumnSpace> Pricing<'_, S> {
    fn public_cost(&mut self, col: &S::Col) -> Result<Rational> {
        if let Some(v) = self.public.get(col) {
            return Ok(v.clone());
        }
        let v = self.space.public_cost(col)?;
        self.public.insert(col.clone(), v.clone());
        Ok(v)
    }

    /// Reduced per-object costs `c̃` for profile `c` at dual point `u`.
    fn signed_costs(&self, c: usize, u: &[Rational]) -> Vec<Vec<Rational>> {
        let layout = self.layout;
        let profile = &layout.profiles[c];
        let mut out: Vec<Vec<Rational>> = profile.0.iter().map(|ci| vec![Rational::zero(); ci.len()]).collect();
        for &(i, g, a) in &self.ix.members[c] {
            let group = &layout.groups[g];
            let own = profile.player(i);
            let mut own_weight = u[self.ix.beta(g, a)].clone();
            for (b, &cb) in group.members.iter().enumerate() {
                if b == a {
                    continue;
                }
                own_weight += &u[self.ix.y(layout, g, a, b)];
                let back = &u[self.ix.y(layout, g, b, a)];
                if !back.is_zero() {
                    for (v, val) in layout.profiles[cb].player(i).iter().enumerate() {
                        out[i][v] -= val * back;
                    }
                }
            }
            if !own_weight.is_zero() {
                for (v, val) in own.iter().enumerate() {
                    out[i][v].add_product(val, &own_weight);
                }
            }
        }
        out
    }

    fn cut(&mut self, c: usize, col: S::Col) -> Result<Cut<Tag<S::Col>>> {
        let layout = self.layout;
        let profile = &layout.profiles[c];
        let mut coeffs = vec![(self.ix.gamma_index(c), Rational::one())];
        for &(i, g, a) in &self.ix.members[c] {
            let group = &layout.groups[g];
            let own = col.player_cost(i, profile.player(i));
            for (b, &cb) in group.members.iter().enumerate() {
                if b == a {
                    continue;
                }
                coeffs.push((self.ix.y(layout, g, a, b), -&own));
                coeffs.push((self.ix.y(layout, g, b, a), col.player_cost(i, layout.profiles[cb].player(i))));
            }
            coeffs.push((self.ix.beta(g, a), -&own));
        }
        coeffs.retain(|(_, v)| !v.is_zero());
        let rhs = if layout.weights[c].is_zero() || layout.kappa.is_zero() {
            Rational::zero()
        } else {
            &layout.kappa * &layout.weights[c] * self.public_cost(&col)?
        };
        Ok(Cut { coeffs, rhs, tag: (c, col) })
    }

    fn separate(&mut self, candidate: Candidate<'_>) -> Result<Vec<Cut<Tag<S::Col>>>> {
        let (u, homogeneous) = match candidate {
            Candidate::Point(u) => (u, false),
            Candidate::Ray(d) => (d, true),
        };
        let mut out = Vec::new();
        for c in 0..self.layout.profiles.len() {
            let costs = self.signed_costs(c, u);
            let weight =
                if homogeneous { Rational::zero() } else { &self.layout.kappa * &self.layout.weights[c] };
            let col = self.space.minimize(&costs, &weight, &self.layout.forbidden[c])?;
            if (0..costs.len()).any(|i| self.layout.forbidden[c][i] && !col.is_empty_for(i)) {
                bail!(Contract, "column space returned a column using a forbidden player");
            }
            let mut value = col.signed_cost(&costs);
            if !weight.is_zero() {
                value += &weight * self.public_cost(&col)?;
            }
            if value < u[self.ix.gamma_index(c)] {
                out.push(self.cut(c, col)?);
            }
        }
        Ok(out)
    }
}

impl Indexing {
    fn gamma_index(&self, c: usize) -> usize {
        debug_assert!(c < self.gamma);
        c
    }
}

/// Solves the payment LP described by `layout` over the columns of `space`.
pub(crate) fn solve<S: ColumnSpace>(layout: &PaymentLayout, space: &mut S) -> Result<LpPair<S::Col>> {
    let ix = Indexing::new(layout);
    let nprof = layout.profiles.len();
    let mut objective = vec![Rational::zero(); ix.vars];
    let mut bounds = vec![LowerBound::Zero; ix.vars];
    for c in 0..nprof {
        objective[c] = Rational::one();
        bounds[c] = LowerBound::Free;
    }
    // One dual row per payment variable that is not pinned.
    let mut pay_vars = Vec::new();
    let mut static_rows = Vec::new();
    for (g, group) in layout.groups.iter().enumerate() {
        for (a, &c) in group.members.iter().enumerate() {
            if layout.pinned.contains(&(group.player, c)) {
                continue;
            }
            let mut coeffs = vec![(ix.beta(g, a), Rational::one())];
            for b in 0..group.members.len() {
                if b != a {
                    coeffs.push((ix.y(layout, g, a, b), Rational::one()));
                    coeffs.push((ix.y(layout, g, b, a), -Rational::one()));
                }
            }
            static_rows.push(Row::new(coeffs, Relation::Le, layout.weights[c].clone()));
            pay_vars.push((group.player, c));
        }
    }
    let problem = CuttingPlaneProblem { objective, bounds, static_rows };

    let mut pricing = Pricing { layout, ix: &ix, space, public: HashMap::new() };
    let mut seeds = Vec::new();
    for c in 0..nprof {
        let weight = &layout.kappa * &layout.weights[c];
        let col = pricing.space.minimize(&layout.profiles[c].0, &weight, &layout.forbidden[c])?;
        seeds.push(pricing.cut(c, col)?);
    }
    let mut oracle = |cand: Candidate<'_>| pricing.separate(cand);
    let outcome = cutting_plane_maximize_seeded(&problem, seeds, &mut oracle, &CuttingPlaneOptions::default())?;
    let res = match outcome {
        CuttingPlaneOutcome::Optimal(res) => res,
        CuttingPlaneOutcome::Unbounded { .. } => bail!(Infeasible, "payment LP is infeasible"),
        CuttingPlaneOutcome::Infeasible => bail!(Internal, "payment LP dual is infeasible"),
    };

    let n = layout.profiles.first().map_or(0, TypeProfile::n);
    let mut x: Vec<Vec<(S::Col, Rational)>> = vec![Vec::new(); nprof];
    let mut used = HashSet::new();
    for (cut, w) in res.cuts.iter().zip(&res.cut_multipliers) {
        if !w.is_zero() {
            x[cut.tag.0].push((cut.tag.1.clone(), w.clone()));
            used.insert(cut.tag.1.clone());
        }
    }
    for row in &mut x {
        row.sort_by(|a, b| a.0.cmp(&b.0));
    }
    let mut p = vec![vec![Rational::zero(); n]; nprof];
    for ((i, c), v) in pay_vars.iter().zip(&res.static_multipliers) {
        p[*c][*i] = v.clone();
    }
    let mut public: Vec<(S::Col, Rational)> = Vec::new();
    for col in used {
        let v = pricing.public_cost(&col)?;
        public.push((col, v));
    }
    public.sort_by(|a, b| a.0.cmp(&b.0));
    let pair = LpPair {
        profiles: layout.profiles.clone(),
        weights: layout.weights.clone(),
        x,
        p,
        public,
        kappa: layout.kappa.clone(),
        value: Rational::zero(),
        dual_value: res.optimum.clone(),
    };
    let value = pair.objective();
    if value != res.optimum {
        bail!(Internal, "payment LP duality gap: primal {} vs dual {}", value, res.optimum);
    }
    Ok(LpPair { value, ..pair })
}

/// Independent exact check that `pair` satisfies every constraint of the
/// payment LP described by `layout`. Returns a description of the first
/// violation.
pub(crate) fn check_feasible<C: Outcome>(layout: &PaymentLayout, pair: &LpPair<C>) -> Option<String> {
    for (k, row) in pair.x.iter().enumerate() {
        let total: Rational = row.iter().map(|(_, w)| w).sum();
        if !total.is_one() {
            return Some(format!("lottery at {:?} sums to {}", layout.profiles[k], total));
        }
        if row.iter().any(|(_, w)| w.is_negative()) {
            return Some(format!("negative lottery weight at {:?}", layout.profiles[k]));
        }
        for (i, f) in layout.forbidden[k].iter().enumerate() {
            if *f && row.iter().any(|(col, _)| !col.is_empty_for(i)) {
                return Some(format!("player {} allocated at restricted profile {:?}", i, layout.profiles[k]));
            }
        }
    }
    if pair.p.iter().flatten().any(Rational::is_negative) {
        return Some("negative payment".into());
    }
    for group in &layout.groups {
        let i = group.player;
        for &a in &group.members {
            let ca = layout.profiles[a].player(i);
            let own = &pair.p[a][i] - pair.expected_cost(a, i, ca);
            if own.is_negative() {
                return Some(format!("IR fails for player {} at {:?}", i, layout.profiles[a]));
            }
            for &b in &group.members {
                let other = &pair.p[b][i] - pair.expected_cost(b, i, ca);
                if other > own {
                    return Some(format!(
                        "IC fails for player {}: {:?} gains by reporting {:?}",
                        i, layout.profiles[a], layout.profiles[b]
                    ));
                }
            }
        }
    }
    None
}
