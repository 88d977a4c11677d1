//! Revised primal simplex over exact rationals.
//!
//! Standard form: minimize `c·x` subject to `A x = b`, `x ≥ 0`, `b ≥ 0`.
//! Every row starts with a unit basic column (a slack supplied by the caller
//! or an artificial added by [`Simplex::start`]), so the initial basis inverse
//! is the identity. The inverse is kept dense and updated by exact rank-one
//! pivots. Columns may be appended at any time, which is what the
//! cutting-plane driver uses for warm restarts.

use crate::error::{bail, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ColKind {
    Structural,
    Slack,
    Artificial,
}

#[derive(Clone, Debug)]
pub(crate) struct Col {
    pub entries: Vec<(usize, Rational)>,
    pub cost: Rational,
    pub kind: ColKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Status {
    Optimal,
    Infeasible,
    /// Phase 2 found an improving column with no blocking row.
    Unbounded { entering: usize },
}

fn dot(dense: &[Rational], sparse: &[(usize, Rational)]) -> Rational {
    let mut acc = Rational::zero();
    for (k, v) in sparse {
        acc.add_product(&dense[*k], v);
    }
    acc
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;
const PIVOT_CAP: usize = 5_000_000;

pub(crate) struct Simplex {
    m: usize,
    cols: Vec<Col>,
    b: Vec<Rational>,
    binv: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    pos: Vec<Option<usize>>,
    xb: Vec<Rational>,
    pi: Vec<Rational>,
    phase: u8,
    started: bool,
    initial: Vec<Option<usize>>,
    pivots: usize,
}

impl Simplex {
    pub fn new(b: Vec<Rational>) -> Self {
        debug_assert!(b.iter().all(|v| !v.is_negative()));
        let m = b.len();
        Simplex {
            m,
            cols: Vec::new(),
            b,
            binv: Vec::new(),
            basis: Vec::new(),
            pos: Vec::new(),
            xb: Vec::new(),
            pi: vec![Rational::zero(); m],
            phase: 2,
            started: false,
            initial: vec![None; m],
            pivots: 0,
        }
    }

    pub fn add_column(&mut self, entries: Vec<(usize, Rational)>, cost: Rational, kind: ColKind) -> usize {
        let entries: Vec<_> = entries.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        debug_assert!(entries.iter().all(|(r, _)| *r < self.m));
        self.cols.push(Col { entries, cost, kind });
        self.pos.push(None);
        self.cols.len() - 1
    }

    /// Adds a `+1` slack in `row` and makes it that row's initial basic column.
    pub fn add_slack(&mut self, row: usize) -> usize {
        assert!(!self.started);
        let j = self.add_column(vec![(row, Rational::one())], Rational::zero(), ColKind::Slack);
        if self.initial[row].is_none() {
            self.initial[row] = Some(j);
        }
        j
    }

    /// Fills missing initial basic columns with artificials and sets up phase 1.
    pub fn start(&mut self) {
        assert!(!self.started);
        self.started = true;
        let mut any_artificial = false;
        for r in 0..self.m {
            let j = match self.initial[r] {
                Some(j) => j,
                None => {
                    any_artificial = true;
                    self.add_column(vec![(r, Rational::one())], Rational::zero(), ColKind::Artificial)
                }
            };
            self.basis.push(j);
            self.pos[j] = Some(r);
        }
        self.binv = (0..self.m)
            .map(|r| {
                let mut row = vec![Rational::zero(); self.m];
                row[r] = Rational::one();
                row
            })
            .collect();
        self.xb = self.b.clone();
        self.phase = if any_artificial { 1 } else { 2 };
        self.recompute_pi();
    }

    fn phase_cost(&self, j: usize) -> Rational {
        let col = &self.cols[j];
        if self.phase == 1 {
            if col.kind == ColKind::Artificial {
                Rational::one()
            } else {
                Rational::zero()
            }
        } else if col.kind == ColKind::Artificial {
            Rational::zero()
        } else {
            col.cost.clone()
        }
    }

    fn recompute_pi(&mut self) {
        let mut pi = vec![Rational::zero(); self.m];
        for r in 0..self.m {
            let c = self.phase_cost(self.basis[r]);
            if c.is_zero() {
                continue;
            }
            for (k, v) in self.binv[r].iter().enumerate() {
                if !v.is_zero() {
                    pi[k].add_product(&c, v);
                }
            }
        }
        self.pi = pi;
    }

    fn reduced_cost(&self, j: usize) -> Rational {
        self.phase_cost(j) - dot(&self.pi, &self.cols[j].entries)
    }

    fn ftran(&self, j: usize) -> Vec<Rational> {
        let mut alpha = vec![Rational::zero(); self.m];
        for (i, a) in alpha.iter_mut().enumerate() {
            *a = dot(&self.binv[i], &self.cols[j].entries);
        }
        alpha
    }

    fn eligible(&self, j: usize) -> bool {
        self.pos[j].is_none() && self.cols[j].kind != ColKind::Artificial
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, Rational)> {
        let mut best: Option<(usize, Rational)> = None;
        for j in 0..self.cols.len() {
            if !self.eligible(j) {
                continue;
            }
            let d = self.reduced_cost(j);
            if !d.is_negative() {
                continue;
            }
            if bland {
                return Some((j, d));
            }
            match &best {
                Some((_, bd)) if *bd <= d => {}
                _ => best = Some((j, d)),
            }
        }
        best
    }

    fn choose_leaving(&self, alpha: &[Rational]) -> Option<usize> {
        if self.phase == 2 {
            // Artificials stuck in the basis at zero must stay at zero.
            for r in 0..self.m {
                if self.cols[self.basis[r]].kind == ColKind::Artificial && !alpha[r].is_zero() {
                    return Some(r);
                }
            }
        }
        let mut best: Option<(usize, Rational)> = None;
        for r in 0..self.m {
            if !alpha[r].is_positive() {
                continue;
            }
            let ratio = &self.xb[r] / &alpha[r];
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    if ratio < bratio || (ratio == bratio && self.basis[r] < self.basis[br]) {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[Rational], dq: &Rational) {
        let piv = alpha[r].clone();
        let theta = &self.xb[r] / &piv;
        if !theta.is_zero() {
            for i in 0..self.m {
                if i != r && !alpha[i].is_zero() {
                    let delta = &theta * &alpha[i];
                    self.xb[i] -= &delta;
                }
            }
        }
        self.xb[r] = theta;

        let inv = piv.recip();
        let mut pivot_row = std::mem::take(&mut self.binv[r]);
        let mut nz = Vec::new();
        for (k, v) in pivot_row.iter_mut().enumerate() {
            if !v.is_zero() {
                *v *= &inv;
                nz.push(k);
            }
        }
        for i in 0..self.m {
            if i == r || alpha[i].is_zero() {
                continue;
            }
            let f = &alpha[i];
            let row = &mut self.binv[i];
            for &k in &nz {
                let delta = f * &pivot_row[k];
                row[k] -= &delta;
            }
        }
        if !dq.is_zero() {
            for &k in &nz {
                self.pi[k].add_product(dq, &pivot_row[k]);
            }
        }
        self.binv[r] = pivot_row;

        let old = self.basis[r];
        self.pos[old] = None;
        self.basis[r] = q;
        self.pos[q] = Some(r);
        self.pivots += 1;
    }

    fn phase_objective(&self) -> Rational {
        let mut v = Rational::zero();
        for r in 0..self.m {
            let c = self.phase_cost(self.basis[r]);
            v.add_product(&c, &self.xb[r]);
        }
        v
    }

    /// Pivots zero-valued artificials out of the basis where possible.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.cols[self.basis[r]].kind != ColKind::Artificial {
                continue;
            }
            let row = &self.binv[r];
            let found = (0..self.cols.len())
                .find(|&j| self.eligible(j) && !dot(row, &self.cols[j].entries).is_zero());
            if let Some(j) = found {
                let alpha = self.ftran(j);
                self.pivot(r, j, &alpha, &Rational::zero());
            }
        }
    }

    /// Runs simplex iterations until optimality, infeasibility, or unboundedness.
    pub fn optimize(&mut self) -> Result<Status> {
        assert!(self.started);
        let mut streak = 0usize;
        loop {
            if self.pivots > PIVOT_CAP {
                bail!(Internal, "simplex pivot cap {PIVOT_CAP} exceeded");
            }
            let bland = streak >= DEGENERATE_STREAK;
            match self.choose_entering(bland) {
                None => {
                    if self.phase == 1 {
                        if self.phase_objective().is_positive() {
                            return Ok(Status::Infeasible);
                        }
                        self.drive_out_artificials();
                        self.phase = 2;
                        self.recompute_pi();
                        streak = 0;
                        continue;
                    }
                    return Ok(Status::Optimal);
                }
                Some((q, dq)) => {
                    let alpha = self.ftran(q);
                    let Some(r) = self.choose_leaving(&alpha) else {
                        if self.phase == 1 {
                            bail!(Internal, "phase 1 reported unbounded");
                        }
                        return Ok(Status::Unbounded { entering: q });
                    };
                    let degenerate = self.xb[r].is_zero();
                    self.pivot(r, q, &alpha, &dq);
                    streak = if degenerate { streak + 1 } else { 0 };
                }
            }
        }
    }

    /// Current value of every column (zero for nonbasic ones).
    pub fn values(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.cols.len()];
        for r in 0..self.m {
            x[self.basis[r]] = self.xb[r].clone();
        }
        x
    }

    pub fn value_of(&self, j: usize) -> Rational {
        match self.pos[j] {
            Some(r) => self.xb[r].clone(),
            None => Rational::zero(),
        }
    }

    /// Row prices for the current phase: `c_B B⁻¹`.
    pub fn duals(&self) -> &[Rational] {
        &self.pi
    }

    /// Objective `c·x` with the real costs.
    pub fn objective(&self) -> Rational {
        let mut v = Rational::zero();
        for r in 0..self.m {
            let col = &self.cols[self.basis[r]];
            if col.kind != ColKind::Artificial {
                v.add_product(&col.cost, &self.xb[r]);
            }
        }
        v
    }

    /// Direction along which the objective decreases without bound.
    pub fn ray(&self, entering: usize) -> Vec<(usize, Rational)> {
        let alpha = self.ftran(entering);
        let mut d = vec![(entering, Rational::one())];
        for r in 0..self.m {
            if !alpha[r].is_zero() {
                d.push((self.basis[r], -&alpha[r]));
            }
        }
        d
    }

    pub fn column_count(&self) -> usize {
        self.cols.len()
    }

    pub fn pivot_count(&self) -> usize {
        self.pivots
    }
}
