//! Optimal robust-BIC mechanisms from an exact cost-minimization oracle.

use std::collections::BTreeMap;

use crate::bounds::{compute_bound_estimates, BoundedSupport, Overrides, SupportSolution};
use crate::error::{bail, Result};
use crate::mechanism::{Atom, ExtendedMechanism, LotteryRow, Mechanism, RangeTable};
use crate::model::{Allocation, Cost, CoveringProblem, SupportedDistribution, TypeProfile, DEFAULT_ENUMERATION_CAP};
use crate::payment::{self, ColumnSpace, LpPair};
use crate::rational::{denominator_lcm, Rational};

/// An exact algorithm for the cost-minimization problem on nonnegative costs:
/// returns some `ω ∈ Ω` minimizing `Σᵢ cᵢ(ω) + Π(ω)`.
pub trait CmOracle {
    fn minimize(&self, costs: &TypeProfile) -> Result<Allocation>;
}

/// Scans an explicit Ω; ties go to the first allocation in canonical order.
#[derive(Clone, Debug)]
pub struct EnumerationOracle {
    omega: Vec<(Allocation, Rational)>,
}

impl EnumerationOracle {
    pub fn new(problem: &CoveringProblem, omega: &[Allocation]) -> Self {
        let omega = omega
            .iter()
            .filter_map(|a| problem.public_cost(a).finite().map(|v| (a.clone(), v.clone())))
            .collect();
        EnumerationOracle { omega }
    }

    pub fn allocations(&self) -> impl Iterator<Item = &Allocation> {
        self.omega.iter().map(|(a, _)| a)
    }
}

impl CmOracle for EnumerationOracle {
    fn minimize(&self, costs: &TypeProfile) -> Result<Allocation> {
        let mut best: Option<(&Allocation, Rational)> = None;
        for (a, public) in &self.omega {
            let v = costs.total_cost(a) + public;
            if best.as_ref().map_or(true, |(_, b)| v < *b) {
                best = Some((a, v));
            }
        }
        match best {
            Some((a, _)) => Ok(a.clone()),
            None => bail!(Infeasible, "no feasible allocation"),
        }
    }
}

/// Minimizes `Σᵢ cᵢ(ω) + weight·Π(ω)` for costs of any sign with an oracle that
/// only handles nonnegative costs.
///
/// Objects with negative cost are forced in (Π does not increase when objects
/// are added). The remaining costs are scaled by `Γ = 1/weight`, or by `N·U`
/// when `weight = 0`, with `U` a strict upper bound on Π and `1/N` the cost
/// granularity.
pub fn cm_with_signed_costs(
    problem: &CoveringProblem,
    oracle: &dyn CmOracle,
    signed: &TypeProfile,
    weight: &Rational,
) -> Result<(Allocation, Rational)> {
    if weight.is_negative() {
        bail!(Input, "negative public-cost weight {}", weight);
    }
    let forced = Allocation::from_sets(
        &signed.0.iter().map(|ci| (0..ci.len()).filter(|&v| ci[v].is_negative()).collect()).collect::<Vec<_>>(),
    );
    let plus: Vec<Vec<Rational>> =
        signed.0.iter().map(|ci| ci.iter().map(|v| v.clone().max(Rational::zero())).collect()).collect();
    let gamma = if weight.is_positive() {
        weight.recip()
    } else {
        let n = Rational::from(denominator_lcm(plus.iter().flatten()));
        n * problem.public_cost_bound()
    };
    let scaled = TypeProfile(plus.iter().map(|ci| ci.iter().map(|v| v * &gamma).collect()).collect());
    let s = oracle.minimize(&scaled)?;
    if !scaled.fits(problem) || s.players() != problem.n() || !problem.is_feasible(&s) {
        bail!(Contract, "CM oracle returned an infeasible allocation {:?}", s);
    }
    let omega = s.union(&forced);
    let Cost::Finite(public) = problem.public_cost(&omega) else {
        bail!(Contract, "public cost is not monotone: {:?} is infeasible", omega);
    };
    let value = signed.total_cost(&omega) + weight * public;
    Ok((omega, value))
}

/// The exact column space: allocations of Ω, priced through a CM oracle.
///
/// Players flagged as forbidden get a per-object cost large enough that the
/// oracle's argmin over Ω is an argmin over the allocations that leave them
/// out.
pub struct OracleSpace<'a> {
    problem: &'a CoveringProblem,
    oracle: &'a dyn CmOracle,
    bound: Rational,
}

impl<'a> OracleSpace<'a> {
    pub fn new(problem: &'a CoveringProblem, oracle: &'a dyn CmOracle) -> Self {
        OracleSpace { problem, oracle, bound: problem.public_cost_bound() }
    }
}

impl ColumnSpace for OracleSpace<'_> {
    type Col = Allocation;

    fn minimize(&mut self, costs: &[Vec<Rational>], weight: &Rational, forbidden: &[bool]) -> Result<Allocation> {
        let mut signed = TypeProfile(costs.to_vec());
        if forbidden.iter().any(|f| *f) {
            let mut penalty = weight * &self.bound + Rational::one();
            for (i, ci) in costs.iter().enumerate() {
                if !forbidden[i] {
                    for v in ci {
                        penalty += v.abs();
                    }
                }
            }
            for (i, f) in forbidden.iter().enumerate() {
                if *f {
                    signed.0[i] = vec![penalty.clone(); costs[i].len()];
                }
            }
        }
        let (a, _) = cm_with_signed_costs(self.problem, self.oracle, &signed, weight)?;
        if forbidden.iter().enumerate().any(|(i, f)| *f && !a.is_empty_for(i)) {
            bail!(Monopoly, "no feasible allocation leaves out every restricted player");
        }
        Ok(a)
    }

    fn public_cost(&mut self, col: &Allocation) -> Result<Rational> {
        match self.problem.public_cost(col) {
            Cost::Finite(v) => Ok(v),
            Cost::Infinite => bail!(Contract, "column {:?} is infeasible", col),
        }
    }
}

/// Solves the payment LP over `D̄` by cutting planes on its dual, generating
/// allocation columns with `oracle`.
///
/// Sentinel payments are fixed to zero when the sentinel values are certified.
pub fn solve_payment_lp(
    problem: &CoveringProblem,
    support: &BoundedSupport,
    kappa: &Rational,
    oracle: &dyn CmOracle,
) -> Result<LpPair<Allocation>> {
    if kappa.is_negative() {
        bail!(Input, "negative kappa {}", kappa);
    }
    let layout = support.layout(kappa, support.certified());
    let mut space = OracleSpace::new(problem, oracle);
    let pair = payment::solve(&layout, &mut space)?;
    if let Some(why) = payment::check_feasible(&layout, &pair) {
        bail!(Internal, "payment LP solution is infeasible: {why}");
    }
    Ok(pair)
}

fn lottery_row<C>(pair: &LpPair<C>, k: usize, atom: impl Fn(&C, &Rational) -> Atom) -> LotteryRow
where
    C: payment::Outcome,
{
    let atoms = pair.x[k].iter().map(|(col, w)| atom(col, w)).collect();
    LotteryRow { atoms, payments: pair.p[k].clone() }
}

/// Builds range tables and the total mechanism from rows over `D̄`.
pub(crate) fn assemble_extended(
    object_counts: Vec<usize>,
    support: &BoundedSupport,
    rows: Vec<(TypeProfile, LotteryRow)>,
    fallback: Atom,
) -> ExtendedMechanism {
    let lookup: BTreeMap<&TypeProfile, &LotteryRow> = rows.iter().map(|(c, r)| (c, r)).collect();
    let mut ranges = Vec::new();
    for i in 0..support.n() {
        for rest in support.others(i) {
            let mut entries: Vec<LotteryRow> = Vec::new();
            for ci in support.extended_marginal(i) {
                let row = lookup[&rest.with_player(i, ci)];
                if !entries.iter().any(|e| e.atoms == row.atoms) {
                    entries.push(row.clone());
                }
            }
            ranges.push(RangeTable { player: i, others: rest, entries });
        }
    }
    ranges.sort_by(|a, b| (a.player, &a.others).cmp(&(b.player, &b.others)));
    ExtendedMechanism { object_counts, rows, ranges, fallback }
}

/// Extends an LP solution over `D̄` to a mechanism on every profile.
///
/// Profiles of `D̄` play their LP row. A profile where exactly one player `i`
/// is off `D̄ᵢ` but `c₋ᵢ ∈ D₋ᵢ` plays the row of `range(i, c₋ᵢ)` maximizing
/// `i`'s utility (first such row in canonical order) and pays that row's
/// payments. Any other profile plays the first allocation of Ω at first
/// price.
pub fn extend_to_mechanism(
    pair: &LpPair<Allocation>,
    support: &BoundedSupport,
    problem: &CoveringProblem,
    omega: &[Allocation],
) -> Result<Mechanism> {
    let Some(first) = omega.first() else { bail!(Infeasible, "no feasible allocation") };
    let atom = |a: &Allocation, w: &Rational| Atom {
        allocation: a.clone(),
        probability: w.clone(),
        public_cost: pair.public_cost(a),
    };
    let mut rows = Vec::new();
    for c in support.extended_profiles() {
        let Some(k) = pair.index_of(c) else { bail!(Input, "LP solution has no row for {:?}", c) };
        rows.push((c.clone(), lottery_row(pair, k, atom)));
    }
    let fallback = Atom {
        allocation: first.clone(),
        probability: Rational::one(),
        public_cost: problem.public_cost(first).finite().cloned().unwrap_or_default(),
    };
    Ok(Mechanism::Extended(assemble_extended(problem.object_counts(), support, rows, fallback)))
}

/// Everything the exact pipeline produces for one instance.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub omega: Vec<Allocation>,
    pub support: BoundedSupport,
    pub support_solution: SupportSolution,
    pub pair: LpPair<Allocation>,
    pub mechanism: Mechanism,
}

/// Checks that Ω is nonempty, monotone and monopoly-free.
pub fn validate_allocation_space(problem: &CoveringProblem, omega: &[Allocation]) -> Result<()> {
    if omega.is_empty() {
        bail!(Infeasible, "no feasible allocation");
    }
    if let Some((a, b)) = problem.check_monotone(omega) {
        bail!(Input, "public cost increases from {:?} to {:?}", a, b);
    }
    if let Some(i) = (0..problem.n()).find(|&i| omega.iter().all(|a| !a.is_empty_for(i))) {
        bail!(Monopoly, "every feasible allocation uses player {}", problem.players[i].name);
    }
    Ok(())
}

/// Bound estimates, the payment LP and its extension, with Ω enumerated.
pub fn synthesize(
    problem: &CoveringProblem,
    distribution: &SupportedDistribution,
    kappa: &Rational,
    overrides: &Overrides,
) -> Result<Synthesis> {
    let omega = problem.enumerate_allocations(DEFAULT_ENUMERATION_CAP)?;
    validate_allocation_space(problem, &omega)?;
    let oracle = EnumerationOracle::new(problem, &omega);
    synthesize_with(problem, distribution, kappa, overrides, omega, &oracle)
}

/// [`synthesize`] with a caller-supplied Ω and CM oracle.
pub fn synthesize_with(
    problem: &CoveringProblem,
    distribution: &SupportedDistribution,
    kappa: &Rational,
    overrides: &Overrides,
    omega: Vec<Allocation>,
    oracle: &dyn CmOracle,
) -> Result<Synthesis> {
    let (support, support_solution) = compute_bound_estimates(problem, distribution, kappa, oracle, overrides)?;
    let pair = solve_payment_lp(problem, &support, kappa, oracle)?;
    let mechanism = extend_to_mechanism(&pair, &support, problem, &omega)?;
    Ok(Synthesis { omega, support, support_solution, pair, mechanism })
}
