//! Exact linear programming.
//!
//! [`LinearProgram`] is a general LP with `≤ / = / ≥` rows and variables that
//! are either nonnegative or free. [`solve_lp`] solves it exactly and returns
//! a basic optimum together with row prices, or a certificate of
//! unboundedness. [`cutting_plane_maximize`] handles LPs whose constraints are
//! only available through a separation oracle.

mod cutting;
pub(crate) mod simplex;

pub use cutting::{
    cutting_plane_maximize, cutting_plane_maximize_seeded, Candidate, Cut, CuttingPlaneOptions, CuttingPlaneOutcome, CuttingPlaneProblem,
    CuttingPlaneResult, SeparationOracle,
};

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::rational::{denominator_lcm, Rational};
use num_bigint::BigInt;
use simplex::{ColKind, Simplex, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LowerBound {
    Zero,
    Free,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> Self {
        Row { coeffs, relation, rhs }
    }

    pub fn activity(&self, x: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (j, a) in &self.coeffs {
            acc.add_product(a, &x[*j]);
        }
        acc
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub rows: Vec<Row>,
    pub bounds: Vec<LowerBound>,
}

impl LinearProgram {
    /// An LP over `vars` nonnegative variables with a zero objective.
    pub fn new(sense: Sense, vars: usize) -> Self {
        LinearProgram {
            sense,
            objective: vec![Rational::zero(); vars],
            rows: Vec::new(),
            bounds: vec![LowerBound::Zero; vars],
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, cost: Rational, bound: LowerBound) -> usize {
        self.objective.push(cost);
        self.bounds.push(bound);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> usize {
        self.rows.push(Row::new(coeffs, relation, rhs));
        self.rows.len() - 1
    }

    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// True iff `x` satisfies every row and bound exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.vars()
            && self.bounds.iter().zip(x).all(|(b, v)| *b == LowerBound::Free || !v.is_negative())
            && self.rows.iter().all(|r| r.holds(x))
    }

    fn validate(&self) -> Result<()> {
        let n = self.vars();
        if self.bounds.len() != n {
            bail!(Input, "LP has {} objective entries but {} bounds", n, self.bounds.len());
        }
        for (i, row) in self.rows.iter().enumerate() {
            if let Some((j, _)) = row.coeffs.iter().find(|(j, _)| *j >= n) {
                bail!(Input, "LP row {i} references variable {j} but only {n} exist");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    /// `ray` is a feasible direction along which the objective improves forever.
    Unbounded { ray: Vec<Rational> },
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub value: Rational,
    /// Shadow price of each row: the rate of change of the optimal value in
    /// that row's right-hand side. Strong duality: `value = Σ rhs·dual`.
    pub duals: Vec<Rational>,
}

impl LpSolution {
    /// Least common multiple of the denominators of the solution values.
    pub fn denominator_lcm(&self) -> BigInt {
        denominator_lcm(self.x.iter())
    }
}

/// Mapping from an [`LinearProgram`] into simplex standard form.
struct StandardForm {
    simplex: Simplex,
    /// Column of `x⁺` and optional `x⁻` for each original variable.
    var_cols: Vec<(usize, Option<usize>)>,
    row_sign: Vec<Rational>,
}

fn to_standard(lp: &LinearProgram) -> StandardForm {
    let flip = lp.sense == Sense::Maximize;
    let mut sign = Vec::with_capacity(lp.rows.len());
    let mut b = Vec::with_capacity(lp.rows.len());
    for row in &lp.rows {
        // Negate rows so b ≥ 0, preferring the orientation that yields a +1 slack.
        let negate = match row.relation {
            Relation::Le => row.rhs.is_negative(),
            Relation::Ge => !row.rhs.is_positive(),
            Relation::Eq => row.rhs.is_negative(),
        };
        let s = if negate { -Rational::one() } else { Rational::one() };
        b.push(&row.rhs * &s);
        sign.push(s);
    }
    let mut by_var: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); lp.vars()];
    for (i, row) in lp.rows.iter().enumerate() {
        for (j, a) in &row.coeffs {
            by_var[*j].push((i, a * &sign[i]));
        }
    }
    let mut simplex = Simplex::new(b);
    let mut var_cols = Vec::with_capacity(lp.vars());
    for (j, entries) in by_var.into_iter().enumerate() {
        let c = if flip { -&lp.objective[j] } else { lp.objective[j].clone() };
        let neg_entries: Vec<_> = entries.iter().map(|(i, a)| (*i, -a)).collect();
        let plus = simplex.add_column(entries, c.clone(), ColKind::Structural);
        let minus = match lp.bounds[j] {
            LowerBound::Zero => None,
            LowerBound::Free => Some(simplex.add_column(neg_entries, -c, ColKind::Structural)),
        };
        var_cols.push((plus, minus));
    }
    for (i, row) in lp.rows.iter().enumerate() {
        let slack_sign = match row.relation {
            Relation::Le => Rational::one(),
            Relation::Ge => -Rational::one(),
            Relation::Eq => continue,
        };
        let s = &slack_sign * &sign[i];
        if s.is_positive() {
            simplex.add_slack(i);
        } else {
            simplex.add_column(vec![(i, s)], Rational::zero(), ColKind::Slack);
        }
    }
    simplex.start();
    StandardForm { simplex, var_cols, row_sign: sign }
}

/// Solves `lp` exactly with the two-phase revised simplex method.
///
/// Entering columns follow Dantzig's rule, switching to Bland's rule after a
/// run of degenerate pivots; ties always go to the smallest index, so the
/// result is fully deterministic.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let mut sf = to_standard(lp);
    let status = sf.simplex.optimize()?;
    let outcome = match status {
        Status::Infeasible => LpOutcome::Infeasible,
        Status::Unbounded { entering } => {
            let mut col_dir = vec![Rational::zero(); sf.simplex.column_count()];
            for (j, v) in sf.simplex.ray(entering) {
                col_dir[j] = v;
            }
            let ray = sf
                .var_cols
                .iter()
                .map(|(p, m)| {
                    let mut v = col_dir[*p].clone();
                    if let Some(m) = m {
                        v -= &col_dir[*m];
                    }
                    v
                })
                .collect();
            LpOutcome::Unbounded { ray }
        }
        Status::Optimal => {
            let vals = sf.simplex.values();
            let x: Vec<Rational> = sf
                .var_cols
                .iter()
                .map(|(p, m)| {
                    let mut v = vals[*p].clone();
                    if let Some(m) = m {
                        v -= &vals[*m];
                    }
                    v
                })
                .collect();
            let value = lp.evaluate(&x);
            let flip = lp.sense == Sense::Maximize;
            let duals = sf
                .simplex
                .duals()
                .iter()
                .zip(&sf.row_sign)
                .map(|(pi, s)| if flip { -(pi * s) } else { pi * s })
                .collect();
            LpOutcome::Optimal(LpSolution { x, value, duals })
        }
    };
    if let LpOutcome::Optimal(sol) = &outcome {
        if !lp.is_feasible(&sol.x) {
            bail!(Internal, "simplex returned a point violating the LP");
        }
    }
    Ok(outcome)
}
