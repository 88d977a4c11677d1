use paymin::lookahead::{benchmark_mechanism, build_instance, lookahead_payment_lower_bound, lookahead_report, restricted_mechanism, LookaheadParams};
use paymin::verify::check_dsic_grid;
use paymin::Rational;

fn params(delta: Rational, n: usize) -> LookaheadParams {
    LookaheadParams::new(Rational::from(100), Rational::one(), delta, n)
}

#[test]
fn benchmark_is_dsic_on_grid() {
    for n in [3, 4] {
        let inst = build_instance(&params(Rational::new(1, 100), n)).unwrap();
        let (m, _) = benchmark_mechanism(&inst).unwrap();
        let values: Vec<Vec<Rational>> = [0, 1, 50, 99, 100, 201, 101, 102, 150]
            .iter()
            .map(|&v| vec![Rational::new(v, 2)])
            .chain([vec![Rational::zero()], vec![Rational::from(100)], vec![Rational::from(101)], vec![Rational::from(300)]])
            .collect();
        let grids = vec![values; n];
        let report = check_dsic_grid(&m, &grids).unwrap();
        assert!(report.passed(), "n={n}: {:?}", report.violations.first());
    }
}

#[test]
fn restricted_mechanism_pays_at_least_the_bound() {
    for (delta, n) in [(Rational::new(1, 100), 3), (Rational::new(1, 2), 3), (Rational::new(1, 10), 4)] {
        let p = params(delta, n);
        let inst = build_instance(&p).unwrap();
        let paid = restricted_mechanism(&inst).unwrap().pair.value;
        assert!(paid >= lookahead_payment_lower_bound(&p).unwrap(), "{p:?}: {paid}");
    }
}

#[test]
fn gap_grows_as_delta_shrinks() {
    let mut last = Rational::zero();
    for d in [10, 100, 1000, 10_000] {
        let report = lookahead_report(&params(Rational::new(1, d), 3)).unwrap();
        assert!(report.ratio > last);
        assert!(report.lookahead_payment >= report.lower_bound);
        last = report.ratio;
    }
    assert!(last > Rational::from(1000));
}
