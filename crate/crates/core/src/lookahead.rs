//! The `(n−1)`-lookahead procurement auction against a simple DSIC benchmark.
//!
//! On the instance built here the lookahead auction drops seller `n` and runs a
//! payment-minimizing robust mechanism for the rest, which must pay at least
//! `K(1−δ)/(n−1)` in expectation, while [`PriorityThreshold`] pays `tδ`.

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::exact::{synthesize, Synthesis};
use crate::instances::single_item;
use crate::mechanism::{Atom, Evaluation, LotteryRow, Mechanism};
use crate::model::{Allocation, CoveringProblem, SupportedDistribution, TypeProfile};
use crate::rational::Rational;
use crate::verify::expected_disutility;

/// `K`, `ε`, `δ` and the number of sellers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookaheadParams {
    pub k: Rational,
    pub eps: Rational,
    pub delta: Rational,
    pub n: usize,
}

impl LookaheadParams {
    pub fn new(k: Rational, eps: Rational, delta: Rational, n: usize) -> Self {
        LookaheadParams { k, eps, delta, n }
    }

    /// `t = K + ε`.
    pub fn t(&self) -> Rational {
        &self.k + &self.eps
    }

    fn validate(&self, min_n: usize) -> Result<()> {
        if !self.k.is_positive() {
            bail!(Input, "K must be positive, got {}", self.k);
        }
        if !self.eps.is_positive() {
            bail!(Input, "epsilon must be positive, got {}", self.eps);
        }
        if !self.delta.is_positive() || self.delta >= Rational::one() {
            bail!(Input, "delta must lie in (0, 1), got {}", self.delta);
        }
        if self.n < min_n {
            bail!(Input, "need at least {} sellers, got {}", min_n, self.n);
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LookaheadInstance {
    pub params: LookaheadParams,
    pub problem: CoveringProblem,
    pub distribution: SupportedDistribution,
}

/// Single item, seller `n` always at `t`. For each `i < n` the profile with
/// `cᵢ = 0` and the other sellers at `K` has probability `(1−δ)/(n−1)`;
/// `(K, …, K, t)` has probability `δ`.
pub fn build_instance(params: &LookaheadParams) -> Result<LookaheadInstance> {
    params.validate(3)?;
    let n = params.n;
    let problem = single_item(n);
    let profile = |zero: Option<usize>| {
        let mut c: Vec<Vec<Rational>> = (0..n - 1).map(|j| vec![if Some(j) == zero { Rational::zero() } else { params.k.clone() }]).collect();
        c.push(vec![params.t()]);
        TypeProfile(c)
    };
    let share = (Rational::one() - &params.delta) / Rational::from((n - 1) as i64);
    let mut support: Vec<(TypeProfile, Rational)> = (0..n - 1).map(|i| (profile(Some(i)), share.clone())).collect();
    support.push((profile(None), params.delta.clone()));
    let distribution = SupportedDistribution::new(&problem, support)?;
    Ok(LookaheadInstance { params: params.clone(), problem, distribution })
}

/// `K(1−δ)/(n−1)`.
pub fn lookahead_payment_lower_bound(params: &LookaheadParams) -> Result<Rational> {
    params.validate(2)?;
    Ok(&params.k * (Rational::one() - &params.delta) / Rational::from((params.n - 1) as i64))
}

/// Buys from the lowest-indexed zero-cost seller among the first `n − 1`;
/// otherwise from seller `n` if its cost is at most `reserve`; otherwise from
/// the cheapest seller (lowest index on ties). The winner is paid its
/// threshold cost.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityThreshold {
    pub sellers: usize,
    pub reserve: Rational,
}

impl PriorityThreshold {
    pub fn n(&self) -> usize {
        self.sellers
    }

    fn winner(&self, c: &[Rational]) -> usize {
        let last = self.sellers - 1;
        if let Some(i) = c[..last].iter().position(Rational::is_zero) {
            return i;
        }
        if c[last] <= self.reserve {
            return last;
        }
        let mut best = 0;
        for (i, ci) in c.iter().enumerate() {
            if *ci < c[best] {
                best = i;
            }
        }
        best
    }

    /// The largest cost at which `i` still wins against `c₋ᵢ`.
    fn threshold(&self, i: usize, c: &[Rational]) -> Rational {
        let last = self.sellers - 1;
        let others_min = |skip: usize| c.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, v)| v.clone()).min();
        if (0..last).any(|j| j != i && c[j].is_zero()) {
            return Rational::zero();
        }
        if i == last {
            return others_min(last).map_or(self.reserve.clone(), |m| m.max(self.reserve.clone()));
        }
        if c[last] <= self.reserve {
            return Rational::zero();
        }
        others_min(i).expect("at least two sellers")
    }

    pub fn evaluate(&self, c: &TypeProfile) -> Result<Evaluation> {
        let costs: Vec<Rational> = c.0.iter().map(|ci| ci[0].clone()).collect();
        let w = self.winner(&costs);
        let mut masks = vec![0u64; self.sellers];
        masks[w] = 1;
        let mut payments = vec![Rational::zero(); self.sellers];
        payments[w] = self.threshold(w, &costs);
        let atom = Atom { allocation: Allocation::from_masks(masks), probability: Rational::one(), public_cost: Rational::zero() };
        Ok(Evaluation::from_row(LotteryRow { atoms: vec![atom], payments }))
    }
}

/// The benchmark with reserve `t` and its expected payment on the instance.
pub fn benchmark_mechanism(instance: &LookaheadInstance) -> Result<(Mechanism, Rational)> {
    let m = Mechanism::PriorityThreshold(PriorityThreshold { sellers: instance.params.n, reserve: instance.params.t() });
    let paid = expected_disutility(&m, &instance.distribution, &Rational::zero())?;
    Ok((m, paid))
}

/// The mechanism the lookahead auction runs on sellers `1..n−1`: the exact
/// payment-minimizing robust mechanism for the distribution of their costs
/// given seller `n` at `t`.
pub fn restricted_mechanism(instance: &LookaheadInstance) -> Result<Synthesis> {
    let n = instance.params.n;
    let problem = single_item(n - 1);
    let support = instance
        .distribution
        .support()
        .iter()
        .map(|(c, p)| (TypeProfile(c.0[..n - 1].to_vec()), p.clone()))
        .collect();
    let conditional = SupportedDistribution::new(&problem, support)?;
    synthesize(&problem, &conditional, &Rational::zero(), &Vec::new())
}

/// One line of the lookahead comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookaheadReport {
    pub params: LookaheadParams,
    pub benchmark_payment: Rational,
    pub lookahead_payment: Rational,
    pub lower_bound: Rational,
    /// `lower_bound / benchmark_payment`.
    pub ratio: Rational,
}

pub fn lookahead_report(params: &LookaheadParams) -> Result<LookaheadReport> {
    let instance = build_instance(params)?;
    let (_, benchmark_payment) = benchmark_mechanism(&instance)?;
    let lookahead_payment = restricted_mechanism(&instance)?.pair.value;
    let lower_bound = lookahead_payment_lower_bound(params)?;
    let ratio = &lower_bound / &benchmark_payment;
    Ok(LookaheadReport { params: params.clone(), benchmark_payment, lookahead_payment, lower_bound, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: i64, eps: i64, delta: (i64, i64), n: usize) -> LookaheadParams {
        LookaheadParams::new(Rational::from(k), Rational::from(eps), Rational::new(delta.0, delta.1), n)
    }

    #[test]
    fn instance_probabilities() {
        let inst = build_instance(&params(100, 1, (1, 100), 3)).unwrap();
        let probs: Vec<Rational> = inst.distribution.support().iter().map(|(_, p)| p.clone()).collect();
        let mut expected = vec![Rational::new(99, 200), Rational::new(99, 200), Rational::new(1, 100)];
        expected.sort();
        let mut sorted = probs.clone();
        sorted.sort();
        assert_eq!(sorted, expected);
        let half = build_instance(&params(100, 1, (1, 2), 3)).unwrap();
        let mut probs: Vec<Rational> = half.distribution.support().iter().map(|(_, p)| p.clone()).collect();
        probs.sort();
        assert_eq!(probs, vec![Rational::new(1, 4), Rational::new(1, 4), Rational::new(1, 2)]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_instance(&params(100, 1, (1, 1), 3)).is_err());
        assert!(build_instance(&params(100, 0, (1, 2), 3)).is_err());
        assert!(build_instance(&params(0, 1, (1, 2), 3)).is_err());
        assert!(build_instance(&params(100, 1, (1, 2), 2)).is_err());
    }

    #[test]
    fn lower_bound_values() {
        assert_eq!(lookahead_payment_lower_bound(&params(100, 1, (1, 100), 3)).unwrap(), Rational::new(99, 2));
        assert_eq!(lookahead_payment_lower_bound(&params(10, 1, (1, 5), 2)).unwrap(), Rational::from(8));
        let near_one = lookahead_payment_lower_bound(&params(100, 1, (999_999, 1_000_000), 3)).unwrap();
        assert!(near_one < Rational::new(1, 10_000));
    }

    #[test]
    fn benchmark_pays_t_delta() {
        let inst = build_instance(&params(100, 1, (1, 100), 3)).unwrap();
        let (m, paid) = benchmark_mechanism(&inst).unwrap();
        assert_eq!(paid, Rational::new(101, 100));
        for (c, _) in inst.distribution.support() {
            if c.0.iter().any(|ci| ci[0].is_zero()) {
                assert!(m.evaluate(c).unwrap().expected_payments.iter().all(Rational::is_zero));
            }
        }
        let ratio = lookahead_payment_lower_bound(&inst.params).unwrap() / paid;
        assert_eq!(ratio, Rational::new(4950, 101));
    }
}
