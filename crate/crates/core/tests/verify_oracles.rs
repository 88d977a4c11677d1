use paymin::bounds::BoundedSupport;
use paymin::exact::synthesize;
use paymin::instances::{scalar_profile, single_item, weighted};
use paymin::mechanism::{enforce_ir_prob1, Atom, ExtendedMechanism, LotteryRow, Mechanism};
use paymin::model::{Allocation, TypeProfile};
use paymin::verify::{check_ir_per_realization, check_robust_bic_ir, check_robust_bic_ir_with, ViolationKind};
use paymin::Rational;

fn r(v: i64) -> Rational {
    Rational::from(v)
}

fn atom(winner: usize, p: Rational) -> Atom {
    let mut masks = vec![0, 0];
    masks[winner] = 1;
    Atom { allocation: Allocation::from_masks(masks), probability: p, public_cost: Rational::zero() }
}

fn two_point_support() -> BoundedSupport {
    let problem = single_item(2);
    let d = weighted(&problem, vec![(scalar_profile(&[1, 3]), 1), (scalar_profile(&[3, 1]), 1)]).unwrap();
    BoundedSupport::with_sentinels(d, vec![r(10), r(10)], true).unwrap()
}

/// Tabulates `rule` on every profile of `D̄`.
fn tabulated(support: &BoundedSupport, rule: impl Fn(&TypeProfile) -> LotteryRow) -> Mechanism {
    let rows = support.extended_profiles().iter().map(|c| (c.clone(), rule(c))).collect();
    Mechanism::Extended(ExtendedMechanism { object_counts: vec![1, 1], rows, ranges: Vec::new(), fallback: atom(0, Rational::one()) })
}

#[test]
fn first_price_is_not_bic() {
    let support = two_point_support();
    let mech = tabulated(&support, |c| {
        let w = if c.player(1)[0] < c.player(0)[0] { 1 } else { 0 };
        let mut payments = vec![r(0), r(0)];
        payments[w] = c.player(w)[0].clone();
        LotteryRow { atoms: vec![atom(w, Rational::one())], payments }
    });
    let report = check_robust_bic_ir_with(&mech, &support, |_| Vec::new()).unwrap();
    assert!(report.violations.iter().any(|v| v.kind == ViolationKind::Incentive));
    assert!(report.violations.iter().all(|v| v.kind != ViolationKind::Participation));
}

#[test]
fn negative_payment_breaks_ir() {
    let support = two_point_support();
    let mech = tabulated(&support, |_| LotteryRow { atoms: vec![atom(0, Rational::one())], payments: vec![r(-1), r(0)] });
    let report = check_robust_bic_ir_with(&mech, &support, |_| Vec::new()).unwrap();
    assert!(report.violations.iter().any(|v| v.kind == ViolationKind::Participation && v.player == 0));
}

#[test]
fn proportional_realized_payments() {
    let problem = single_item(2);
    let d = weighted(&problem, vec![(scalar_profile(&[2, 1]), 1)]).unwrap();
    let support = BoundedSupport::with_sentinels(d, vec![r(10), r(10)], true).unwrap();
    let half = Rational::new(1, 2);
    let mech = tabulated(&support, |_| LotteryRow { atoms: vec![atom(0, half.clone()), atom(1, half.clone())], payments: vec![r(3), r(0)] });
    let wrapped = enforce_ir_prob1(mech);
    let ev = wrapped.evaluate(&scalar_profile(&[2, 1])).unwrap();
    assert_eq!(ev.expected_payments[0], r(3));
    assert_eq!(ev.realized[0][0], r(6));
    assert_eq!(ev.realized[1][0], r(0));
}

#[test]
fn zero_costs_pay_nothing() {
    let problem = single_item(2);
    let d = weighted(&problem, vec![(scalar_profile(&[0, 0]), 1)]).unwrap();
    let s = synthesize(&problem, &d, &Rational::zero(), &vec![]).unwrap();
    assert_eq!(s.pair.value, Rational::zero());
    assert!(check_robust_bic_ir(&s.mechanism, &s.support).unwrap().passed());
    assert!(check_ir_per_realization(&enforce_ir_prob1(s.mechanism), &s.support).unwrap().passed());
}
