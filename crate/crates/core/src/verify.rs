//! Exact brute-force checks of incentive, participation and optimality claims.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bounds::{restricted_allocations, BoundedSupport};
use crate::error::{bail, Result};
use crate::lp::{solve_lp, LinearProgram, LowerBound, LpOutcome, Relation, Sense};
use crate::mechanism::Mechanism;
use crate::model::{Allocation, CoveringProblem, SupportedDistribution, TypeProfile};
use crate::payment::{LpPair, Outcome};
use crate::rational::Rational;

/// Default cap on the number of `x` variables [`brute_force_lp_opt`] materializes.
pub const BRUTE_FORCE_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Misreporting strictly helps.
    Incentive,
    /// Truthful expected utility is negative.
    Participation,
    /// Some realization leaves the player with negative utility.
    Realization,
    /// Allocation probability increases with the player's own cost.
    Monotonicity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub player: usize,
    pub true_type: Vec<Rational>,
    pub report: Vec<Rational>,
    pub others: TypeProfile,
    /// How far the violated inequality is from holding (always positive).
    pub slack: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Extra types tried for every player on top of `D̄ᵢ`: the zero vector,
/// coordinatewise midpoints of consecutive support types, and `mᵢ + 1`.
pub fn canonical_extra_types(support: &BoundedSupport, i: usize) -> Vec<Vec<Rational>> {
    let di = support.marginal(i);
    let k = di[0].len();
    let mut out = BTreeSet::new();
    out.insert(vec![Rational::zero(); k]);
    for w in di.windows(2) {
        out.insert(w[0].iter().zip(&w[1]).map(|(a, b)| (a + b) / Rational::from(2)).collect());
    }
    out.insert(vec![support.sentinel(i) + Rational::one(); k]);
    let ext: BTreeSet<_> = support.extended_marginal(i).into_iter().collect();
    out.into_iter().filter(|t| !ext.contains(t)).collect()
}

/// Robust BIC and robust IR: for every player `i`, every `c₋ᵢ ∈ D₋ᵢ` and every
/// pair of types drawn from `D̄ᵢ` plus `extra(i)`, truthful expected utility is
/// at least the misreport's and at least zero.
pub fn check_robust_bic_ir_with(
    mechanism: &Mechanism,
    support: &BoundedSupport,
    extra: impl Fn(usize) -> Vec<Vec<Rational>>,
) -> Result<Report> {
    let mut report = Report::default();
    for i in 0..support.n() {
        let mut types = support.extended_marginal(i);
        types.extend(extra(i));
        for rest in support.others(i) {
            let evals = types
                .iter()
                .map(|t| mechanism.evaluate(&rest.with_player(i, t.clone())))
                .collect::<Result<Vec<_>>>()?;
            for (a, truth) in types.iter().enumerate() {
                let own = evals[a].utility(i, truth);
                report.checked += 1;
                if own.is_negative() {
                    report.violations.push(Violation {
                        kind: ViolationKind::Participation,
                        player: i,
                        true_type: truth.clone(),
                        report: truth.clone(),
                        others: rest.clone(),
                        slack: -own.clone(),
                    });
                }
                for (b, lie) in types.iter().enumerate() {
                    if a == b {
                        continue;
                    }
                    report.checked += 1;
                    let gain = evals[b].utility(i, truth) - &own;
                    if gain.is_positive() {
                        report.violations.push(Violation {
                            kind: ViolationKind::Incentive,
                            player: i,
                            true_type: truth.clone(),
                            report: lie.clone(),
                            others: rest.clone(),
                            slack: gain,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// [`check_robust_bic_ir_with`] over [`canonical_extra_types`].
pub fn check_robust_bic_ir(mechanism: &Mechanism, support: &BoundedSupport) -> Result<Report> {
    check_robust_bic_ir_with(mechanism, support, |i| canonical_extra_types(support, i))
}

/// Realized utility is nonnegative on every atom, for every `cᵢ` in `D̄ᵢ`
/// plus the canonical extras and every `c₋ᵢ ∈ D₋ᵢ`.
pub fn check_ir_per_realization(mechanism: &Mechanism, support: &BoundedSupport) -> Result<Report> {
    let mut report = Report::default();
    for i in 0..support.n() {
        let mut types = support.extended_marginal(i);
        types.extend(canonical_extra_types(support, i));
        for rest in support.others(i) {
            for t in &types {
                let ev = mechanism.evaluate(&rest.with_player(i, t.clone()))?;
                for (atom, pay) in ev.atoms.iter().zip(&ev.realized) {
                    report.checked += 1;
                    let cost: Rational = atom.allocation.objects(i).map(|v| &t[v]).sum();
                    let u = &pay[i] - cost;
                    if u.is_negative() {
                        report.violations.push(Violation {
                            kind: ViolationKind::Realization,
                            player: i,
                            true_type: t.clone(),
                            report: t.clone(),
                            others: rest.clone(),
                            slack: -u,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

fn product(grids: &[Vec<Vec<Rational>>], skip: usize) -> Vec<TypeProfile> {
    let mut out = vec![TypeProfile(Vec::new())];
    for (j, g) in grids.iter().enumerate() {
        let mut next = Vec::new();
        for p in &out {
            if j == skip {
                let mut q = p.clone();
                q.0.push(Vec::new());
                next.push(q);
                continue;
            }
            for v in g {
                let mut q = p.clone();
                q.0.push(v.clone());
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// DSIC and IR on a finite grid: for every player, every opponent profile
/// drawn from the other players' grids and every pair of own grid types.
/// For single-object players the allocation probability must also be
/// non-increasing along the (sorted) own grid.
pub fn check_dsic_grid(mechanism: &Mechanism, grids: &[Vec<Vec<Rational>>]) -> Result<Report> {
    let mut report = Report::default();
    for i in 0..grids.len() {
        let mut own: Vec<Vec<Rational>> = grids[i].clone();
        own.sort();
        own.dedup();
        for rest in product(grids, i) {
            let evals =
                own.iter().map(|t| mechanism.evaluate(&rest.with_player(i, t.clone()))).collect::<Result<Vec<_>>>()?;
            for (a, truth) in own.iter().enumerate() {
                let u = evals[a].utility(i, truth);
                report.checked += 1;
                if u.is_negative() {
                    report.violations.push(Violation {
                        kind: ViolationKind::Participation,
                        player: i,
                        true_type: truth.clone(),
                        report: truth.clone(),
                        others: rest.clone(),
                        slack: -u.clone(),
                    });
                }
                for (b, lie) in own.iter().enumerate() {
                    if a == b {
                        continue;
                    }
                    report.checked += 1;
                    let gain = evals[b].utility(i, truth) - &u;
                    if gain.is_positive() {
                        report.violations.push(Violation {
                            kind: ViolationKind::Incentive,
                            player: i,
                            true_type: truth.clone(),
                            report: lie.clone(),
                            others: rest.clone(),
                            slack: gain,
                        });
                    }
                }
            }
            if own.first().is_some_and(|t| t.len() == 1) {
                for (a, w) in evals.windows(2).enumerate() {
                    report.checked += 1;
                    let rise = w[1].allocation_probability(i) - w[0].allocation_probability(i);
                    if rise.is_positive() {
                        report.violations.push(Violation {
                            kind: ViolationKind::Monotonicity,
                            player: i,
                            true_type: own[a].clone(),
                            report: own[a + 1].clone(),
                            others: rest.clone(),
                            slack: rise,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// `Σ_c Pr_D(c)·(Σᵢ E[pᵢ(c)] + κ·E[Π(A(c))])`.
pub fn expected_disutility(mechanism: &Mechanism, distribution: &SupportedDistribution, kappa: &Rational) -> Result<Rational> {
    let mut total = Rational::zero();
    for (c, pr) in distribution.support() {
        let ev = mechanism.evaluate(c)?;
        let pay: Rational = ev.expected_payments.iter().sum();
        let term = pay + kappa * ev.expected_public();
        total.add_product(pr, &term);
    }
    Ok(total)
}

/// Optimum of the full payment LP over `D̄`, with every variable and
/// constraint written out and no payment fixed in advance.
pub fn brute_force_lp_opt(
    problem: &CoveringProblem,
    support: &BoundedSupport,
    kappa: &Rational,
    omega: &[Allocation],
) -> Result<Rational> {
    let profiles = support.extended_profiles();
    let n = support.n();
    let mut lp = LinearProgram::new(Sense::Minimize, 0);
    let mut xvars: Vec<Vec<(usize, &Allocation)>> = Vec::new();
    let mut total = 0usize;
    for c in profiles {
        let allowed = restricted_allocations(omega, support, c)?;
        total += allowed.len();
        if total > BRUTE_FORCE_CAP {
            bail!(Size, "full payment LP would have more than {} allocation variables", BRUTE_FORCE_CAP);
        }
        let pr = support.distribution().prob(c);
        let mut vars = Vec::new();
        for a in omega.iter().filter(|a| allowed.contains(a)) {
            let public = problem.public_cost(a).finite().cloned().unwrap_or_default();
            vars.push((lp.add_var(kappa * &pr * public, LowerBound::Zero), a));
        }
        xvars.push(vars);
    }
    let pvars: Vec<Vec<usize>> = profiles
        .iter()
        .map(|c| {
            let pr = support.distribution().prob(c);
            (0..n).map(|_| lp.add_var(pr.clone(), LowerBound::Zero)).collect()
        })
        .collect();
    let index = |c: &TypeProfile| profiles.binary_search(c).expect("profile in D̄");
    for vars in &xvars {
        lp.add_row(vars.iter().map(|(j, _)| (*j, Rational::one())).collect(), Relation::Eq, Rational::one());
    }
    for i in 0..n {
        let types = support.extended_marginal(i);
        for rest in support.others(i) {
            let ks: Vec<usize> = types.iter().map(|t| index(&rest.with_player(i, t.clone()))).collect();
            for (a, truth) in types.iter().enumerate() {
                // Utility of reporting `b` when the type is `truth`.
                let util = |b: usize, sign: i64| -> Vec<(usize, Rational)> {
                    let s = Rational::from(sign);
                    let mut row = vec![(pvars[ks[b]][i], s.clone())];
                    for (j, alloc) in &xvars[ks[b]] {
                        let cost: Rational = alloc.objects(i).map(|v| &truth[v]).sum();
                        if !cost.is_zero() {
                            row.push((*j, -(&s * &cost)));
                        }
                    }
                    row
                };
                lp.add_row(util(a, 1), Relation::Ge, Rational::zero());
                for b in 0..types.len() {
                    if b != a {
                        let mut row = util(a, 1);
                        row.extend(util(b, -1));
                        lp.add_row(row, Relation::Ge, Rational::zero());
                    }
                }
            }
        }
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal(sol) => Ok(sol.value),
        LpOutcome::Infeasible => bail!(Infeasible, "full payment LP is infeasible"),
        LpOutcome::Unbounded { .. } => bail!(Internal, "full payment LP is unbounded"),
    }
}

/// Checks every constraint of the full payment LP for `pair` directly from
/// the bounded support.
pub fn check_lp_pair<C: Outcome>(support: &BoundedSupport, pair: &LpPair<C>) -> Option<String> {
    for c in support.extended_profiles() {
        let Some(k) = pair.index_of(c) else { return Some(format!("no row for {:?}", c)) };
        let total: Rational = pair.x[k].iter().map(|(_, w)| w).sum();
        if !total.is_one() || pair.x[k].iter().any(|(_, w)| w.is_negative()) {
            return Some(format!("lottery at {:?} is not a distribution", c));
        }
        if let Some(crate::bounds::ProfileClass::Sentinel(i)) = support.classify(c) {
            if pair.x[k].iter().any(|(col, _)| !col.is_empty_for(i)) {
                return Some(format!("sentinel player {} allocated at {:?}", i, c));
            }
        }
        if pair.p[k].iter().any(Rational::is_negative) {
            return Some(format!("negative payment at {:?}", c));
        }
    }
    for i in 0..support.n() {
        let types = support.extended_marginal(i);
        for rest in support.others(i) {
            let ks: Vec<usize> =
                types.iter().map(|t| pair.index_of(&rest.with_player(i, t.clone())).expect("row")).collect();
            for (a, truth) in types.iter().enumerate() {
                let own = &pair.p[ks[a]][i] - pair.expected_cost(ks[a], i, truth);
                if own.is_negative() {
                    return Some(format!("IR fails for player {} type {:?} against {:?}", i, truth, rest));
                }
                for &kb in &ks {
                    if &pair.p[kb][i] - pair.expected_cost(kb, i, truth) > own {
                        return Some(format!("IC fails for player {} type {:?} against {:?}", i, truth, rest));
                    }
                }
            }
        }
    }
    None
}
