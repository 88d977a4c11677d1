//! Executable mechanisms: allocation lotteries and payments on every profile.

use num_bigint::BigInt;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsicext::DsicMechanism;
use crate::error::{bail, Result};
use crate::lookahead::PriorityThreshold;
use crate::model::{Allocation, TypeProfile};
use crate::rational::Rational;

/// One allocation of a lottery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub allocation: Allocation,
    pub probability: Rational,
    pub public_cost: Rational,
}

/// A lottery over allocations with the expected payment to every player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LotteryRow {
    pub atoms: Vec<Atom>,
    pub payments: Vec<Rational>,
}

impl LotteryRow {
    pub fn expected_cost(&self, i: usize, ci: &[Rational]) -> Rational {
        self.atoms.iter().map(|a| &a.probability * a.allocation.objects(i).map(|v| &ci[v]).sum::<Rational>()).sum()
    }

    pub fn expected_public(&self) -> Rational {
        self.atoms.iter().map(|a| &a.probability * &a.public_cost).sum()
    }

    /// Probability that player `i` receives something.
    pub fn allocation_probability(&self, i: usize) -> Rational {
        self.atoms.iter().filter(|a| !a.allocation.is_empty_for(i)).map(|a| &a.probability).sum()
    }
}

/// The outcome on one input: atoms with their realized payments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub atoms: Vec<Atom>,
    /// `realized[k][i]`: payment to player `i` if atom `k` is drawn.
    pub realized: Vec<Vec<Rational>>,
    pub expected_payments: Vec<Rational>,
}

impl Evaluation {
    pub fn from_row(row: LotteryRow) -> Self {
        let realized = vec![row.payments.clone(); row.atoms.len()];
        Evaluation { atoms: row.atoms, realized, expected_payments: row.payments }
    }

    pub fn expected_cost(&self, i: usize, ci: &[Rational]) -> Rational {
        self.atoms.iter().map(|a| &a.probability * a.allocation.objects(i).map(|v| &ci[v]).sum::<Rational>()).sum()
    }

    /// `E[pᵢ] − E[cᵢ(A(c))]` for a player whose true type is `ci`.
    pub fn utility(&self, i: usize, ci: &[Rational]) -> Rational {
        &self.expected_payments[i] - self.expected_cost(i, ci)
    }

    pub fn expected_public(&self) -> Rational {
        self.atoms.iter().map(|a| &a.probability * &a.public_cost).sum()
    }

    pub fn allocation_probability(&self, i: usize) -> Rational {
        self.atoms.iter().filter(|a| !a.allocation.is_empty_for(i)).map(|a| &a.probability).sum()
    }
}

/// Range table entry for one `(i, c₋ᵢ)`: a distinct lottery and the payments
/// of the first profile that uses it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeTable {
    pub player: usize,
    pub others: TypeProfile,
    pub entries: Vec<LotteryRow>,
}

/// A payment-LP solution extended to every profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedMechanism {
    pub object_counts: Vec<usize>,
    /// Rows for every profile of `D̄`, sorted by profile.
    pub rows: Vec<(TypeProfile, LotteryRow)>,
    /// Sorted by `(player, others)`.
    pub ranges: Vec<RangeTable>,
    pub fallback: Atom,
}

impl ExtendedMechanism {
    pub fn row(&self, c: &TypeProfile) -> Option<&LotteryRow> {
        self.rows.binary_search_by(|(d, _)| d.cmp(c)).ok().map(|k| &self.rows[k].1)
    }

    fn range(&self, i: usize, others: &TypeProfile) -> Option<&RangeTable> {
        self.ranges
            .binary_search_by(|t| (t.player, &t.others).cmp(&(i, others)))
            .ok()
            .map(|k| &self.ranges[k])
    }

    pub fn evaluate(&self, c: &TypeProfile) -> Result<Evaluation> {
        if let Some(row) = self.row(c) {
            return Ok(Evaluation::from_row(row.clone()));
        }
        for i in 0..c.n() {
            let Some(table) = self.range(i, &c.others(i)) else { continue };
            let ci = c.player(i);
            let mut best: Option<(&LotteryRow, Rational)> = None;
            for entry in &table.entries {
                let u = &entry.payments[i] - entry.expected_cost(i, ci);
                if best.as_ref().map_or(true, |(_, b)| u > *b) {
                    best = Some((entry, u));
                }
            }
            let (row, _) = best.expect("range tables are nonempty");
            return Ok(Evaluation::from_row(row.clone()));
        }
        let payments = (0..c.n()).map(|i| self.fallback.allocation.objects(i).map(|v| &c.player(i)[v]).sum()).collect();
        Ok(Evaluation::from_row(LotteryRow { atoms: vec![self.fallback.clone()], payments }))
    }
}

/// Any mechanism this crate can synthesize.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    Extended(ExtendedMechanism),
    Dsic(DsicMechanism),
    PriorityThreshold(PriorityThreshold),
    /// Pays `cᵢ(ω)·E[pᵢ]/E[cᵢ]` on each realized `ω` of the inner mechanism.
    IrProb1 { inner: Box<Mechanism> },
}

impl Mechanism {
    pub fn object_counts(&self) -> Vec<usize> {
        match self {
            Mechanism::Extended(m) => m.object_counts.clone(),
            Mechanism::Dsic(m) => vec![1; m.n()],
            Mechanism::PriorityThreshold(m) => vec![1; m.n()],
            Mechanism::IrProb1 { inner } => inner.object_counts(),
        }
    }

    fn check_input(&self, c: &TypeProfile) -> Result<()> {
        let counts = self.object_counts();
        if c.n() != counts.len() || c.0.iter().zip(&counts).any(|(ci, k)| ci.len() != *k) {
            bail!(Input, "profile {:?} does not match the mechanism's players", c);
        }
        if !c.is_nonnegative() {
            bail!(Input, "profile {:?} has a negative cost", c);
        }
        Ok(())
    }

    /// The lottery and payments on input `c`.
    pub fn evaluate(&self, c: &TypeProfile) -> Result<Evaluation> {
        self.check_input(c)?;
        match self {
            Mechanism::Extended(m) => m.evaluate(c),
            Mechanism::Dsic(m) => m.evaluate(c),
            Mechanism::PriorityThreshold(m) => m.evaluate(c),
            Mechanism::IrProb1 { inner } => {
                let mut ev = inner.evaluate(c)?;
                for i in 0..c.n() {
                    let ci = c.player(i);
                    let ep = ev.expected_payments[i].clone();
                    let ec = ev.expected_cost(i, ci);
                    for (k, atom) in ev.atoms.iter().enumerate() {
                        let cost: Rational = atom.allocation.objects(i).map(|v| &ci[v]).sum();
                        ev.realized[k][i] = if ec.is_zero() { ep.clone() } else { cost * &ep / &ec };
                    }
                }
                Ok(ev)
            }
        }
    }
}

/// Makes IR hold on every realization while keeping expected payments.
///
/// When a player's expected cost is zero but the expected payment is
/// positive, the expected payment is paid on every realization.
pub fn enforce_ir_prob1(mechanism: Mechanism) -> Mechanism {
    match mechanism {
        m @ Mechanism::IrProb1 { .. } => m,
        m => Mechanism::IrProb1 { inner: Box::new(m) },
    }
}

/// A sampled run of a mechanism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub sampled: Allocation,
    pub realized_payments: Vec<Rational>,
    pub evaluation: Evaluation,
}

/// Evaluates `mechanism` on `profile` and draws one allocation using a
/// ChaCha8 generator seeded with `seed`.
pub fn run_mechanism(mechanism: &Mechanism, profile: &TypeProfile, seed: u64) -> Result<Run> {
    let evaluation = mechanism.evaluate(profile)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = Rational::from(BigInt::from(rng.next_u64())) / Rational::from(BigInt::from(1u128 << 64));
    let mut acc = Rational::zero();
    let mut pick = evaluation.atoms.len() - 1;
    for (k, atom) in evaluation.atoms.iter().enumerate() {
        acc += &atom.probability;
        if draw < acc {
            pick = k;
            break;
        }
    }
    Ok(Run {
        sampled: evaluation.atoms[pick].allocation.clone(),
        realized_payments: evaluation.realized[pick].clone(),
        evaluation,
    })
}
