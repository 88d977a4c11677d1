//! Cutting-plane maximization against a separation oracle.
//!
//! The restricted LP `max g·u` over the constraints seen so far is solved
//! through its dual, a minimization with one row per variable `u_j` and one
//! column per constraint. A new cut is a new dual column, so every round warm
//! starts from the previous basis. The row prices of that dual are the
//! incumbent `u`; a phase-1 Farkas certificate provides the improving ray when
//! the restricted LP is unbounded.

use std::collections::HashSet;
use std::hash::Hash;

use super::simplex::{ColKind, Simplex, Status};
use super::{LowerBound, Relation, Row};
use crate::error::{bail, Result};
use crate::rational::Rational;

/// A constraint `coeffs·u ≤ rhs` produced by an oracle, identified by `tag`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut<T> {
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
    pub tag: T,
}

impl<T> Cut<T> {
    pub fn slack(&self, u: &[Rational]) -> Rational {
        let mut lhs = Rational::zero();
        for (j, a) in &self.coeffs {
            lhs.add_product(a, &u[*j]);
        }
        &self.rhs - lhs
    }

    /// `coeffs·d` for a direction `d`.
    pub fn direction_activity(&self, d: &[Rational]) -> Rational {
        let mut lhs = Rational::zero();
        for (j, a) in &self.coeffs {
            lhs.add_product(a, &d[*j]);
        }
        lhs
    }
}

/// What the oracle is asked to separate.
#[derive(Clone, Copy, Debug)]
pub enum Candidate<'a> {
    /// Return cuts violated by this point, or none if it is feasible.
    Point(&'a [Rational]),
    /// Return cuts with `coeffs·d > 0`, or none if `d` is a recession
    /// direction of the full feasible region.
    Ray(&'a [Rational]),
}

pub trait SeparationOracle {
    type Tag: Clone + Eq + Hash;
    fn separate(&mut self, candidate: Candidate<'_>) -> Result<Vec<Cut<Self::Tag>>>;
}

impl<T, F> SeparationOracle for F
where
    T: Clone + Eq + Hash,
    F: FnMut(Candidate<'_>) -> Result<Vec<Cut<T>>>,
{
    type Tag = T;
    fn separate(&mut self, candidate: Candidate<'_>) -> Result<Vec<Cut<T>>> {
        self(candidate)
    }
}

/// `max objective·u` subject to `static_rows` and `bounds`, plus whatever the
/// oracle adds.
#[derive(Clone, Debug)]
pub struct CuttingPlaneProblem {
    pub objective: Vec<Rational>,
    pub bounds: Vec<LowerBound>,
    pub static_rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct CuttingPlaneOptions {
    /// Round cap; `None` means `10·(variables + 1000)`.
    pub max_rounds: Option<usize>,
}

impl Default for CuttingPlaneOptions {
    fn default() -> Self {
        CuttingPlaneOptions { max_rounds: None }
    }
}

#[derive(Clone, Debug)]
pub struct CuttingPlaneResult<T> {
    pub optimum: Rational,
    pub point: Vec<Rational>,
    /// Every cut the oracle produced, in order.
    pub cuts: Vec<Cut<T>>,
    /// Optimal dual multiplier of each cut (nonzero only on active cuts).
    pub cut_multipliers: Vec<Rational>,
    /// Optimal dual multiplier of each static row.
    pub static_multipliers: Vec<Rational>,
    pub rounds: usize,
}

impl<T: Clone> CuttingPlaneResult<T> {
    /// The cuts carrying a nonzero multiplier.
    pub fn active_cuts(&self) -> Vec<Cut<T>> {
        self.cuts
            .iter()
            .zip(&self.cut_multipliers)
            .filter(|(_, w)| !w.is_zero())
            .map(|(c, _)| c.clone())
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum CuttingPlaneOutcome<T> {
    Optimal(CuttingPlaneResult<T>),
    Unbounded { ray: Vec<Rational> },
    Infeasible,
}

struct DualLp {
    simplex: Simplex,
    sign: Vec<Rational>,
    /// Columns of each static row: `(≤ part, optional opposite part)`.
    static_cols: Vec<(usize, Option<usize>)>,
    cut_cols: Vec<usize>,
}

impl DualLp {
    fn new(problem: &CuttingPlaneProblem) -> Self {
        let n = problem.objective.len();
        let mut sign = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (g, bound) in problem.objective.iter().zip(&problem.bounds) {
            let negate = match bound {
                LowerBound::Free => g.is_negative(),
                LowerBound::Zero => !g.is_positive(),
            };
            let s = if negate { -Rational::one() } else { Rational::one() };
            b.push(g * &s);
            sign.push(s);
        }
        let mut simplex = Simplex::new(b);
        let mut lp = DualLp { simplex: Simplex::new(Vec::new()), sign, static_cols: Vec::new(), cut_cols: Vec::new() };
        for row in &problem.static_rows {
            let (cols, rhs, opposite) = match row.relation {
                Relation::Le => (row.coeffs.clone(), row.rhs.clone(), false),
                Relation::Ge => (row.coeffs.iter().map(|(j, a)| (*j, -a)).collect(), -&row.rhs, false),
                Relation::Eq => (row.coeffs.clone(), row.rhs.clone(), true),
            };
            let plus = simplex.add_column(lp.entries(&cols), rhs.clone(), ColKind::Structural);
            let minus = opposite.then(|| {
                let neg: Vec<_> = cols.iter().map(|(j, a)| (*j, -a)).collect();
                simplex.add_column(lp.entries(&neg), -&rhs, ColKind::Structural)
            });
            lp.static_cols.push((plus, minus));
        }
        for (j, bound) in problem.bounds.iter().enumerate() {
            if *bound == LowerBound::Zero {
                // Surplus of the `≥` row for a nonnegative variable.
                let s = -&lp.sign[j];
                if s.is_positive() {
                    simplex.add_slack(j);
                } else {
                    simplex.add_column(vec![(j, s)], Rational::zero(), ColKind::Slack);
                }
            }
        }
        simplex.start();
        lp.simplex = simplex;
        lp
    }

    fn entries(&self, coeffs: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
        coeffs.iter().map(|(j, a)| (*j, a * &self.sign[*j])).collect()
    }

    fn add_cut<T>(&mut self, cut: &Cut<T>) {
        let entries = self.entries(&cut.coeffs);
        let j = self.simplex.add_column(entries, cut.rhs.clone(), ColKind::Structural);
        self.cut_cols.push(j);
    }

    fn prices(&self) -> Vec<Rational> {
        self.simplex.duals().iter().zip(&self.sign).map(|(p, s)| p * s).collect()
    }
}

fn check_bounds(problem: &CuttingPlaneProblem) -> Result<()> {
    let n = problem.objective.len();
    if problem.bounds.len() != n {
        bail!(Input, "cutting-plane problem has {} objective entries but {} bounds", n, problem.bounds.len());
    }
    for row in &problem.static_rows {
        if row.coeffs.iter().any(|(j, _)| *j >= n) {
            bail!(Input, "static row references a variable out of range");
        }
    }
    Ok(())
}

/// Maximizes `problem.objective·u` over the static rows and every cut the
/// oracle can produce.
///
/// Each round solves the restricted LP exactly and hands the incumbent (or,
/// when the restricted LP is unbounded, an improving ray) to the oracle. The
/// loop ends when the oracle returns no cut. Exceeding the round cap is an
/// internal error, never a silent approximation.
pub fn cutting_plane_maximize<O: SeparationOracle>(
    problem: &CuttingPlaneProblem,
    oracle: &mut O,
    options: &CuttingPlaneOptions,
) -> Result<CuttingPlaneOutcome<O::Tag>> {
    cutting_plane_maximize_seeded(problem, Vec::new(), oracle, options)
}

/// [`cutting_plane_maximize`] starting from a known set of valid cuts.
pub fn cutting_plane_maximize_seeded<O: SeparationOracle>(
    problem: &CuttingPlaneProblem,
    seeds: Vec<Cut<O::Tag>>,
    oracle: &mut O,
    options: &CuttingPlaneOptions,
) -> Result<CuttingPlaneOutcome<O::Tag>> {
    check_bounds(problem)?;
    let n = problem.objective.len();
    let cap = options.max_rounds.unwrap_or(10 * (n + 1000));
    let mut lp = DualLp::new(problem);
    let mut cuts: Vec<Cut<O::Tag>> = Vec::new();
    let mut seen: HashSet<O::Tag> = HashSet::new();
    for cut in seeds {
        if seen.insert(cut.tag.clone()) {
            lp.add_cut(&cut);
            cuts.push(cut);
        }
    }
    let mut rounds = 0usize;
    loop {
        let status = lp.simplex.optimize()?;
        let new_cuts = match status {
            Status::Unbounded { .. } => return Ok(CuttingPlaneOutcome::Infeasible),
            Status::Infeasible => {
                let ray = lp.prices();
                let found = oracle.separate(Candidate::Ray(&ray))?;
                if found.is_empty() {
                    return Ok(CuttingPlaneOutcome::Unbounded { ray });
                }
                if found.iter().any(|c| !c.direction_activity(&ray).is_positive()) {
                    bail!(Contract, "oracle returned a cut that does not cut off the ray");
                }
                found
            }
            Status::Optimal => {
                let point = lp.prices();
                let found = oracle.separate(Candidate::Point(&point))?;
                if found.is_empty() {
                    return finish(problem, &lp, cuts, point, rounds).map(CuttingPlaneOutcome::Optimal);
                }
                if found.iter().any(|c| !c.slack(&point).is_negative()) {
                    bail!(Contract, "oracle returned a cut that the incumbent satisfies");
                }
                found
            }
        };
        for cut in new_cuts {
            if !seen.insert(cut.tag.clone()) {
                bail!(Contract, "oracle returned a cut that is already in the restricted LP");
            }
            lp.add_cut(&cut);
            cuts.push(cut);
        }
        rounds += 1;
        if rounds > cap {
            bail!(
                Internal,
                "cutting-plane round cap {cap} exceeded ({} cuts, {} variables, {} pivots)",
                cuts.len(),
                n,
                lp.simplex.pivot_count()
            );
        }
    }
}

fn finish<T>(
    problem: &CuttingPlaneProblem,
    lp: &DualLp,
    cuts: Vec<Cut<T>>,
    point: Vec<Rational>,
    rounds: usize,
) -> Result<CuttingPlaneResult<T>> {
    let optimum = lp.simplex.objective();
    let primal: Rational = problem.objective.iter().zip(&point).map(|(g, u)| g * u).sum();
    if primal != optimum {
        bail!(Internal, "restricted LP duality gap {} vs {}", primal, optimum);
    }
    if problem.static_rows.iter().any(|r| !r.holds(&point))
        || problem.bounds.iter().zip(&point).any(|(b, v)| *b == LowerBound::Zero && v.is_negative())
    {
        bail!(Internal, "cutting-plane incumbent violates a static constraint");
    }
    let static_multipliers = lp
        .static_cols
        .iter()
        .map(|(p, m)| {
            let mut v = lp.simplex.value_of(*p);
            if let Some(m) = m {
                v -= lp.simplex.value_of(*m);
            }
            v
        })
        .collect();
    let cut_multipliers = lp.cut_cols.iter().map(|j| lp.simplex.value_of(*j)).collect();
    Ok(CuttingPlaneResult { optimum, point, cuts, cut_multipliers, static_multipliers, rounds })
}
