//! Covering problems, allocations, type profiles and distributions.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::rational::Rational;

/// Default cap on `Πᵢ 2^{|Tᵢ|}` for explicit enumeration of Ω.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// A choice of covering objects for every player, stored as one bitmask per
/// player (bit `v` set iff object `v` of that player is used).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<usize>>", try_from = "Vec<Vec<usize>>")]
pub struct Allocation(Vec<u64>);

impl Allocation {
    pub fn empty(n: usize) -> Self {
        Allocation(vec![0; n])
    }

    pub fn from_masks(masks: Vec<u64>) -> Self {
        Allocation(masks)
    }

    pub fn from_sets(sets: &[Vec<usize>]) -> Self {
        Allocation(sets.iter().map(|s| s.iter().fold(0u64, |m, v| m | (1 << v))).collect())
    }

    pub fn players(&self) -> usize {
        self.0.len()
    }

    pub fn mask(&self, i: usize) -> u64 {
        self.0[i]
    }

    pub fn masks(&self) -> &[u64] {
        &self.0
    }

    pub fn contains(&self, i: usize, v: usize) -> bool {
        self.0[i] >> v & 1 == 1
    }

    pub fn is_empty_for(&self, i: usize) -> bool {
        self.0[i] == 0
    }

    pub fn with(&self, i: usize, v: usize) -> Self {
        let mut a = self.clone();
        a.0[i] |= 1 << v;
        a
    }

    pub fn without_player(&self, i: usize) -> Self {
        let mut a = self.clone();
        a.0[i] = 0;
        a
    }

    pub fn union(&self, other: &Allocation) -> Self {
        Allocation(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    pub fn is_subset_of(&self, other: &Allocation) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn object_count(&self) -> u32 {
        self.0.iter().map(|m| m.count_ones()).sum()
    }

    /// Objects used by player `i`, ascending.
    pub fn objects(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let m = self.0[i];
        (0..64).filter(move |v| m >> v & 1 == 1)
    }

    /// `(player, object)` pairs in ascending order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.0.len()).flat_map(|i| self.objects(i).map(move |v| (i, v))).collect()
    }

    pub fn sets(&self) -> Vec<Vec<usize>> {
        (0..self.0.len()).map(|i| self.objects(i).collect()).collect()
    }
}

/// Canonical order: fewer objects first, then lexicographic on [`Allocation::pairs`].
impl Ord for Allocation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.object_count().cmp(&other.object_count()).then_with(|| self.pairs().cmp(&other.pairs()))
    }
}

impl PartialOrd for Allocation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.sets())
    }
}

impl From<Allocation> for Vec<Vec<usize>> {
    fn from(a: Allocation) -> Self {
        a.sets()
    }
}

impl TryFrom<Vec<Vec<usize>>> for Allocation {
    type Error = String;
    fn try_from(sets: Vec<Vec<usize>>) -> std::result::Result<Self, String> {
        if sets.iter().flatten().any(|v| *v >= 64) {
            return Err("object index out of range".into());
        }
        Ok(Allocation::from_sets(&sets))
    }
}

/// A public cost value; infeasible allocations have [`Cost::Infinite`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cost {
    Finite(Rational),
    Infinite,
}

impl Cost {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Cost::Finite(_))
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }
}

/// Items with integer demands; each object supplies some units of some items.
/// Feasible iff every demand is met, and then the public cost is 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub demand: Vec<u32>,
    /// `supplies[i][v]` lists `(item, units)` provided by object `v` of player `i`.
    pub supplies: Vec<Vec<Vec<(usize, u32)>>>,
}

/// Every object is a facility. Each client is served by its nearest open
/// facility; the public cost is the total assignment cost, infinite if no
/// facility is open or the total exceeds the budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacilityLocation {
    /// `distance[i][v][j]`: distance from facility `v` of player `i` to client `j`.
    pub distance: Vec<Vec<Vec<Rational>>>,
    pub clients: usize,
    pub budget: Option<Rational>,
}

impl FacilityLocation {
    /// Nearest-facility assignment cost ignoring the budget.
    pub fn assignment_cost(&self, a: &Allocation) -> Option<Rational> {
        let mut total = Rational::zero();
        for j in 0..self.clients {
            let best = a.pairs().into_iter().map(|(i, v)| &self.distance[i][v][j]).min()?;
            total += best;
        }
        Some(total)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PublicCost {
    Coverage(Coverage),
    FacilityLocation(FacilityLocation),
    /// Explicit values; allocations not listed are infeasible.
    Table(Vec<(Allocation, Rational)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Player {
    pub name: String,
    pub objects: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringProblem {
    pub players: Vec<Player>,
    pub public: PublicCost,
}

impl CoveringProblem {
    pub fn new(players: Vec<Player>, public: PublicCost) -> Result<Self> {
        let p = CoveringProblem { players, public };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let shape: Vec<usize> = self.players.iter().map(|p| p.objects.len()).collect();
        if shape.iter().any(|&k| k > 63) {
            bail!(Size, "a player has more than 63 objects");
        }
        match &self.public {
            PublicCost::Coverage(c) => {
                if c.supplies.len() != shape.len()
                    || c.supplies.iter().zip(&shape).any(|(s, k)| s.len() != *k)
                {
                    bail!(Input, "coverage supplies do not match the players' objects");
                }
                if c.supplies.iter().flatten().flatten().any(|(item, _)| *item >= c.demand.len()) {
                    bail!(Input, "coverage supply refers to an unknown item");
                }
            }
            PublicCost::FacilityLocation(f) => {
                if f.distance.len() != shape.len()
                    || f.distance.iter().zip(&shape).any(|(d, k)| d.len() != *k)
                    || f.distance.iter().flatten().any(|row| row.len() != f.clients)
                {
                    bail!(Input, "facility distances do not match the players' objects");
                }
                if f.distance.iter().flatten().flatten().any(Rational::is_negative) {
                    bail!(Input, "negative facility distance");
                }
                if f.budget.as_ref().is_some_and(Rational::is_negative) {
                    bail!(Input, "negative assignment budget");
                }
            }
            PublicCost::Table(rows) => {
                for (a, v) in rows {
                    if a.players() != shape.len()
                        || (0..shape.len()).any(|i| a.mask(i) >> shape[i] != 0)
                    {
                        bail!(Input, "public-cost table entry does not fit the players' objects");
                    }
                    if v.is_negative() {
                        bail!(Input, "negative public cost in table");
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn object_counts(&self) -> Vec<usize> {
        self.players.iter().map(|p| p.objects.len()).collect()
    }

    /// `maxᵢ |Tᵢ|`.
    pub fn dimension(&self) -> usize {
        self.object_counts().into_iter().max().unwrap_or(0)
    }

    pub fn is_single_dimensional(&self) -> bool {
        self.players.iter().all(|p| p.objects.len() == 1)
    }

    pub fn full_allocation(&self) -> Allocation {
        Allocation(self.object_counts().iter().map(|&k| (1u64 << k) - 1).collect())
    }

    pub fn public_cost(&self, a: &Allocation) -> Cost {
        match &self.public {
            PublicCost::Coverage(c) => {
                let mut got = vec![0u64; c.demand.len()];
                for (i, v) in a.pairs() {
                    for (item, units) in &c.supplies[i][v] {
                        got[*item] += u64::from(*units);
                    }
                }
                if got.iter().zip(&c.demand).all(|(g, d)| *g >= u64::from(*d)) {
                    Cost::Finite(Rational::zero())
                } else {
                    Cost::Infinite
                }
            }
            PublicCost::FacilityLocation(f) => match f.assignment_cost(a) {
                Some(v) if f.budget.as_ref().map_or(true, |b| v <= *b) => Cost::Finite(v),
                _ => Cost::Infinite,
            },
            PublicCost::Table(rows) => {
                rows.iter().find(|(b, _)| b == a).map_or(Cost::Infinite, |(_, v)| Cost::Finite(v.clone()))
            }
        }
    }

    pub fn is_feasible(&self, a: &Allocation) -> bool {
        self.public_cost(a).is_finite()
    }

    /// A value strictly larger than every finite public cost.
    pub fn public_cost_bound(&self) -> Rational {
        let max = match &self.public {
            PublicCost::Coverage(_) => Rational::zero(),
            PublicCost::FacilityLocation(f) => {
                let mut total = Rational::zero();
                for j in 0..f.clients {
                    if let Some(d) = f.distance.iter().flatten().map(|row| &row[j]).max() {
                        total += d;
                    }
                }
                total
            }
            PublicCost::Table(rows) => rows.iter().map(|(_, v)| v.clone()).max().unwrap_or_default(),
        };
        max + Rational::one()
    }

    /// `Πᵢ 2^{|Tᵢ|}`, saturating.
    pub fn allocation_space_size(&self) -> u64 {
        let bits: usize = self.object_counts().iter().sum();
        if bits >= 64 {
            u64::MAX
        } else {
            1u64 << bits
        }
    }

    /// Every feasible allocation, in canonical order.
    pub fn enumerate_allocations(&self, cap: u64) -> Result<Vec<Allocation>> {
        if self.allocation_space_size() > cap {
            bail!(
                Size,
                "allocation space has {} candidates, above the enumeration cap {}; use a CM oracle instead",
                self.allocation_space_size(),
                cap
            );
        }
        let counts = self.object_counts();
        let mut out = Vec::new();
        let mut masks = vec![0u64; counts.len()];
        loop {
            let a = Allocation(masks.clone());
            if self.is_feasible(&a) {
                out.push(a);
            }
            // Mixed-radix increment over the players' masks.
            let mut i = 0;
            loop {
                if i == counts.len() {
                    out.sort();
                    return Ok(out);
                }
                masks[i] += 1;
                if masks[i] >> counts[i] == 0 {
                    break;
                }
                masks[i] = 0;
                i += 1;
            }
        }
    }

    /// True iff every player can be left out of some feasible allocation.
    pub fn check_monopoly_free(&self, omega: &[Allocation]) -> bool {
        (0..self.n()).all(|i| omega.iter().any(|a| a.is_empty_for(i)))
    }

    /// Checks that adding any single object to a feasible allocation keeps it
    /// feasible and does not raise the public cost. Returns a witness pair on
    /// failure.
    pub fn check_monotone(&self, omega: &[Allocation]) -> Option<(Allocation, Allocation)> {
        let counts = self.object_counts();
        for a in omega {
            let base = self.public_cost(a);
            for (i, &k) in counts.iter().enumerate() {
                for v in 0..k {
                    if a.contains(i, v) {
                        continue;
                    }
                    let b = a.with(i, v);
                    if self.public_cost(&b) > base {
                        return Some((a.clone(), b));
                    }
                }
            }
        }
        None
    }
}

/// Per-player cost vectors `cᵢ = (c_{i,v})_{v ∈ Tᵢ}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeProfile(pub Vec<Vec<Rational>>);

impl TypeProfile {
    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn player(&self, i: usize) -> &[Rational] {
        &self.0[i]
    }

    /// `cᵢ(ωᵢ) = Σ_{v∈ωᵢ} c_{i,v}`.
    pub fn player_cost(&self, i: usize, a: &Allocation) -> Rational {
        a.objects(i).map(|v| &self.0[i][v]).sum()
    }

    pub fn total_cost(&self, a: &Allocation) -> Rational {
        (0..self.n()).map(|i| self.player_cost(i, a)).sum()
    }

    /// The profile with player `i`'s vector replaced by `ci`.
    pub fn with_player(&self, i: usize, ci: Vec<Rational>) -> Self {
        let mut p = self.clone();
        p.0[i] = ci;
        p
    }

    /// Key identifying `c₋ᵢ`: the profile with player `i`'s entry cleared.
    pub fn others(&self, i: usize) -> TypeProfile {
        self.with_player(i, Vec::new())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().flatten().all(|v| !v.is_negative())
    }

    pub fn fits(&self, problem: &CoveringProblem) -> bool {
        self.n() == problem.n() && self.0.iter().zip(&problem.players).all(|(c, p)| c.len() == p.objects.len())
    }

    pub fn uniform(n: usize, values: &[Rational]) -> Self {
        TypeProfile(values.iter().take(n).map(|v| vec![v.clone()]).collect())
    }
}

impl fmt::Debug for TypeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            write!(f, "{}", parts.join(","))?;
        }
        write!(f, ")")
    }
}

/// An explicit finite joint type distribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<(TypeProfile, Rational)>", from = "Vec<(TypeProfile, Rational)>")]
pub struct SupportedDistribution {
    support: Vec<(TypeProfile, Rational)>,
    index: HashMap<TypeProfile, usize>,
}

impl From<SupportedDistribution> for Vec<(TypeProfile, Rational)> {
    fn from(d: SupportedDistribution) -> Self {
        d.support
    }
}

impl From<Vec<(TypeProfile, Rational)>> for SupportedDistribution {
    fn from(mut support: Vec<(TypeProfile, Rational)>) -> Self {
        support.sort_by(|a, b| a.0.cmp(&b.0));
        SupportedDistribution::from_sorted(support)
    }
}

impl SupportedDistribution {
    /// Validates and stores the support in canonical profile order.
    pub fn new(problem: &CoveringProblem, mut support: Vec<(TypeProfile, Rational)>) -> Result<Self> {
        if support.is_empty() {
            bail!(Input, "empty distribution support");
        }
        for (c, p) in &support {
            if !c.fits(problem) {
                bail!(Input, "profile {:?} does not match the players' objects", c);
            }
            if !c.is_nonnegative() {
                bail!(Input, "profile {:?} has a negative cost", c);
            }
            if !p.is_positive() {
                bail!(Input, "profile {:?} has non-positive probability {}", c, p);
            }
        }
        let total: Rational = support.iter().map(|(_, p)| p).sum();
        if !total.is_one() {
            bail!(Input, "probabilities sum to {}, not 1", total);
        }
        support.sort_by(|a, b| a.0.cmp(&b.0));
        if support.windows(2).any(|w| w[0].0 == w[1].0) {
            bail!(Input, "duplicate profile in distribution support");
        }
        Ok(Self::from_sorted(support))
    }

    fn from_sorted(support: Vec<(TypeProfile, Rational)>) -> Self {
        let index = support.iter().enumerate().map(|(k, (c, _))| (c.clone(), k)).collect();
        SupportedDistribution { support, index }
    }

    pub fn support(&self) -> &[(TypeProfile, Rational)] {
        &self.support
    }

    pub fn profiles(&self) -> impl Iterator<Item = &TypeProfile> {
        self.support.iter().map(|(c, _)| c)
    }

    pub fn n(&self) -> usize {
        self.support[0].0.n()
    }

    /// `Pr_D(c)`, zero off the support.
    pub fn prob(&self, c: &TypeProfile) -> Rational {
        self.index.get(c).map_or_else(Rational::zero, |&k| self.support[k].1.clone())
    }

    pub fn contains(&self, c: &TypeProfile) -> bool {
        self.index.contains_key(c)
    }

    /// `Dᵢ`, sorted.
    pub fn marginal(&self, i: usize) -> Vec<Vec<Rational>> {
        let set: BTreeSet<Vec<Rational>> = self.profiles().map(|c| c.0[i].clone()).collect();
        set.into_iter().collect()
    }

    /// `D₋ᵢ` as [`TypeProfile::others`] keys, sorted.
    pub fn others(&self, i: usize) -> Vec<TypeProfile> {
        let set: BTreeSet<TypeProfile> = self.profiles().map(|c| c.others(i)).collect();
        set.into_iter().collect()
    }

    /// The distribution conditioned on `keep(c)`.
    pub fn condition(&self, keep: impl Fn(&TypeProfile) -> bool) -> Result<Self> {
        let kept: Vec<_> = self.support.iter().filter(|(c, _)| keep(c)).cloned().collect();
        let mass: Rational = kept.iter().map(|(_, p)| p).sum();
        if mass.is_zero() {
            bail!(Domain, "conditioning event has probability zero");
        }
        Ok(Self::from_sorted(kept.into_iter().map(|(c, p)| (c, p / &mass)).collect()))
    }

    /// Restricts every profile to the given players.
    pub fn project(&self, players: &[usize]) -> Self {
        let mut acc: Vec<(TypeProfile, Rational)> = Vec::new();
        for (c, p) in &self.support {
            let q = TypeProfile(players.iter().map(|&i| c.0[i].clone()).collect());
            match acc.iter_mut().find(|(d, _)| *d == q) {
                Some((_, w)) => *w += p,
                None => acc.push((q, p.clone())),
            }
        }
        acc.sort_by(|a, b| a.0.cmp(&b.0));
        Self::from_sorted(acc)
    }
}

/// `(cᵢ(ωᵢ))ᵢ` and `κ·Π(ω)` for a feasible allocation.
pub fn disutility_terms(
    problem: &CoveringProblem,
    profile: &TypeProfile,
    a: &Allocation,
    kappa: &Rational,
) -> Result<(Vec<Rational>, Rational)> {
    let Cost::Finite(pi) = problem.public_cost(a) else {
        bail!(Infeasible, "allocation {:?} is infeasible", a);
    };
    let costs = (0..problem.n()).map(|i| profile.player_cost(i, a)).collect();
    Ok((costs, kappa * &pi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    pub(crate) fn single_item(n: usize) -> CoveringProblem {
        let players = (0..n).map(|i| Player { name: format!("s{}", i + 1), objects: vec!["item".into()] }).collect();
        let public = PublicCost::Coverage(Coverage { demand: vec![1], supplies: vec![vec![vec![(0, 1)]]; n] });
        CoveringProblem::new(players, public).unwrap()
    }

    fn edge() -> CoveringProblem {
        let players = ["u", "w"].iter().map(|s| Player { name: s.to_string(), objects: vec![s.to_string()] }).collect();
        let public = PublicCost::Coverage(Coverage { demand: vec![1], supplies: vec![vec![vec![(0, 1)]]; 2] });
        CoveringProblem::new(players, public).unwrap()
    }

    fn ufl_toy() -> CoveringProblem {
        let players = vec![Player { name: "a".into(), objects: vec!["f".into()] }];
        let public = PublicCost::FacilityLocation(FacilityLocation {
            distance: vec![vec![vec![Rational::from(2)]]],
            clients: 1,
            budget: None,
        });
        CoveringProblem::new(players, public).unwrap()
    }

    fn sets(a: &[Allocation]) -> Vec<Vec<Vec<usize>>> {
        a.iter().map(Allocation::sets).collect()
    }

    #[test]
    fn single_item_allocations() {
        let p = single_item(2);
        let omega = p.enumerate_allocations(DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(sets(&omega), vec![vec![vec![0], vec![]], vec![vec![], vec![0]], vec![vec![0], vec![0]]]);
    }

    #[test]
    fn edge_allocations() {
        let omega = edge().enumerate_allocations(DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(omega.len(), 3);
        assert!(omega.iter().all(|a| a.object_count() >= 1));
    }

    #[test]
    fn infeasible_everywhere() {
        let players = vec![Player { name: "a".into(), objects: vec!["x".into()] }];
        let p = CoveringProblem::new(players, PublicCost::Table(vec![])).unwrap();
        assert!(p.enumerate_allocations(DEFAULT_ENUMERATION_CAP).unwrap().is_empty());
    }

    #[test]
    fn enumeration_cap() {
        let p = single_item(4);
        assert!(matches!(p.enumerate_allocations(8), Err(crate::Error::Size(_))));
    }

    #[test]
    fn disutility_examples() {
        let p = single_item(2);
        let c = TypeProfile(vec![vec![Rational::from(1)], vec![Rational::from(2)]]);
        let buy1 = Allocation::from_sets(&[vec![0], vec![]]);
        let (costs, public) = disutility_terms(&p, &c, &buy1, &Rational::zero()).unwrap();
        assert_eq!(costs, vec![Rational::from(1), Rational::zero()]);
        assert!(public.is_zero());

        let u = ufl_toy();
        let c = TypeProfile(vec![vec![Rational::from(5)]]);
        let open = Allocation::from_sets(&[vec![0]]);
        let (costs, public) = disutility_terms(&u, &c, &open, &Rational::one()).unwrap();
        assert_eq!(costs, vec![Rational::from(5)]);
        assert_eq!(public, Rational::from(2));

        let empty = Allocation::empty(1);
        assert!(matches!(disutility_terms(&u, &c, &empty, &Rational::one()), Err(crate::Error::Infeasible(_))));
    }

    #[test]
    fn empty_allocation_costs_nothing() {
        let players = vec![Player { name: "a".into(), objects: vec!["x".into()] }];
        let p = CoveringProblem::new(players, PublicCost::Table(vec![(Allocation::empty(1), rat(3, 1))])).unwrap();
        let c = TypeProfile(vec![vec![Rational::from(7)]]);
        let (costs, _) = disutility_terms(&p, &c, &Allocation::empty(1), &Rational::one()).unwrap();
        assert_eq!(costs, vec![Rational::zero()]);
    }

    #[test]
    fn monopoly() {
        let p = single_item(2);
        assert!(p.check_monopoly_free(&p.enumerate_allocations(DEFAULT_ENUMERATION_CAP).unwrap()));
        let p = single_item(1);
        assert!(!p.check_monopoly_free(&p.enumerate_allocations(DEFAULT_ENUMERATION_CAP).unwrap()));
        let p = edge();
        assert!(p.check_monopoly_free(&p.enumerate_allocations(DEFAULT_ENUMERATION_CAP).unwrap()));
    }

    #[test]
    fn monotonicity_violation_detected() {
        let players = vec![Player { name: "a".into(), objects: vec!["x".into()] }];
        let table = vec![(Allocation::empty(1), rat(1, 1)), (Allocation::from_sets(&[vec![0]]), rat(2, 1))];
        let p = CoveringProblem::new(players, PublicCost::Table(table)).unwrap();
        let omega = p.enumerate_allocations(DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(p.check_monotone(&omega).is_some());
        let u = ufl_toy();
        assert!(u.check_monotone(&u.enumerate_allocations(DEFAULT_ENUMERATION_CAP).unwrap()).is_none());
    }

    #[test]
    fn distribution_validation() {
        let p = single_item(2);
        let c = |a: i64, b: i64| TypeProfile(vec![vec![Rational::from(a)], vec![Rational::from(b)]]);
        let d = SupportedDistribution::new(&p, vec![(c(2, 1), rat(1, 2)), (c(1, 2), rat(1, 2))]).unwrap();
        assert_eq!(d.support()[0].0, c(1, 2));
        assert_eq!(d.marginal(0), vec![vec![Rational::from(1)], vec![Rational::from(2)]]);
        assert_eq!(d.others(1).len(), 2);
        assert!(SupportedDistribution::new(&p, vec![(c(1, 2), rat(1, 3))]).is_err());
        assert!(SupportedDistribution::new(&p, vec![(c(-1, 2), rat(1, 1))]).is_err());
        assert!(SupportedDistribution::new(&p, vec![(c(1, 2), rat(1, 2)), (c(1, 2), rat(1, 2))]).is_err());
    }

    #[test]
    fn allocation_serde_round_trip() {
        let a = Allocation::from_sets(&[vec![0, 2], vec![], vec![1]]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[[0,2],[],[1]]");
        let b: Allocation = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn table_problem() -> impl Strategy<Value = CoveringProblem> {
            // Random monotone table: Π(ω) = base − Σ discounts over used objects,
            // feasible iff at least `need` objects are used.
            (1usize..=3, 0u32..=2, proptest::collection::vec(0i64..4, 6)).prop_map(|(n, need, disc)| {
                let players: Vec<Player> =
                    (0..n).map(|i| Player { name: format!("p{i}"), objects: vec!["a".into(), "b".into()] }).collect();
                let mut rows = Vec::new();
                for m in 0..(1u64 << (2 * n)) {
                    let masks: Vec<u64> = (0..n).map(|i| (m >> (2 * i)) & 3).collect();
                    let a = Allocation::from_masks(masks);
                    if a.object_count() < need {
                        continue;
                    }
                    let used: i64 = a.pairs().iter().map(|(i, v)| disc[2 * i + v]).sum();
                    rows.push((a, Rational::from(30 - used)));
                }
                CoveringProblem::new(players, PublicCost::Table(rows)).unwrap()
            })
        }

        proptest! {
            #[test]
            fn enumerated_space_is_monotone_and_sorted(p in table_problem()) {
                let omega = p.enumerate_allocations(DEFAULT_ENUMERATION_CAP).unwrap();
                prop_assert!(p.check_monotone(&omega).is_none());
                for w in omega.windows(2) {
                    prop_assert!(w[0] < w[1]);
                }
                for a in &omega {
                    for b in &omega {
                        if a.is_subset_of(b) {
                            prop_assert!(p.public_cost(b) <= p.public_cost(a));
                        }
                    }
                }
            }
        }
    }
}
