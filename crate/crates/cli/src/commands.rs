use std::fs;
use std::path::Path;

use paymin::bounds::Overrides;
use paymin::dsicext::synthesize_dsic;
use paymin::exact::{extend_to_mechanism, synthesize};
use paymin::io::{Instance, MechanismFile, ProblemSpec};
use paymin::lookahead::{lookahead_report, LookaheadParams, LookaheadReport};
use paymin::mechanism::{enforce_ir_prob1, run_mechanism, Mechanism};
use paymin::model::{Allocation, DEFAULT_ENUMERATION_CAP};
use paymin::payment::LpPair;
use paymin::plugins::{SetCoverApprox, SingleItem, VertexCoverApprox};
use paymin::relax::{
    relaxed_bound_estimates, round_bufl, round_single_dim, solve_relaxed_lp, EnumerationApprox, ExactUflDecomposer,
    LpRelativeApprox,
};
use paymin::verify::{check_dsic_grid, check_ir_per_realization, check_lp_pair, check_robust_bic_ir, expected_disutility};
use paymin::{Error, Rational, Result};

use crate::report::{all_passed, AssignmentEntry, PaymentEntry, RoundReport, Sample, SolveReport, Verdict};
use crate::Mode;

/// Exit code when a verification check fails.
const CHECK_FAILED: u8 = 4;

pub fn parse_override(s: &str) -> std::result::Result<(usize, Rational), String> {
    let (i, v) = s.split_once('=').ok_or_else(|| format!("expected i=value, got {s:?}"))?;
    let i = i.trim().parse().map_err(|_| format!("bad player index {i:?}"))?;
    let v = v.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((i, v))
}

fn load(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    Instance::from_json(&text)
}

fn write(path: Option<&Path>, text: String) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, text + "\n").map_err(|e| Error::Input(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn exit_for(verdicts: &[Verdict]) -> u8 {
    if all_passed(verdicts) {
        0
    } else {
        CHECK_FAILED
    }
}

fn samples(mechanism: &Mechanism, inst: &Instance, seed: Option<u64>) -> Result<Vec<Sample>> {
    let Some(seed) = seed else { return Ok(Vec::new()) };
    inst.distribution
        .profiles()
        .map(|c| {
            let run = run_mechanism(mechanism, c, seed)?;
            Ok(Sample::new(c.clone(), &run.sampled, run.realized_payments))
        })
        .collect()
}

pub fn solve(
    path: &Path,
    kappa: Option<Rational>,
    mode: Mode,
    out: Option<&Path>,
    overrides: &Overrides,
    seed: Option<u64>,
) -> Result<u8> {
    let inst = load(path)?;
    let kappa = kappa.unwrap_or_else(|| inst.kappa.clone());
    let report = match mode {
        Mode::Exact => {
            let s = synthesize(&inst.problem, &inst.distribution, &kappa, overrides)?;
            let disutility = expected_disutility(&s.mechanism, &inst.distribution, &kappa)?;
            let wrapped = enforce_ir_prob1(s.mechanism.clone());
            let verdicts = vec![
                Verdict::claim(
                    "lp_pair_feasible",
                    check_lp_pair(&s.support, &s.pair).is_none(),
                    check_lp_pair(&s.support, &s.pair).unwrap_or_else(|| "constraints hold exactly".into()),
                ),
                Verdict::from_report("robust_bic_ir", &check_robust_bic_ir(&s.mechanism, &s.support)?),
                Verdict::from_report("ir_per_realization", &check_ir_per_realization(&wrapped, &s.support)?),
                Verdict::claim("disutility_equals_lp", disutility == s.pair.value, format!("{} vs {}", disutility, s.pair.value)),
            ];
            let file = MechanismFile { mechanism: s.mechanism.clone(), support: Some(s.support.clone()), product_support: None };
            write(out, file.to_json())?;
            SolveReport {
                command: "solve",
                mode: "exact".into(),
                players: inst.problem.n(),
                kappa,
                duality_gap: &s.pair.value - &s.pair.dual_value,
                lp_value: s.pair.value.clone(),
                dual_value: s.pair.dual_value.clone(),
                expected_disutility: Some(disutility),
                sentinels: s.support.sentinels().to_vec(),
                certified: s.support.certified(),
                samples: samples(&s.mechanism, &inst, seed)?,
                verdicts,
            }
        }
        Mode::Relaxed => {
            let cmlp = inst.cmlp()?;
            let support = relaxed_bound_estimates(&cmlp, &inst.distribution, &kappa, overrides)?;
            let pair = solve_relaxed_lp(&cmlp, &support, &kappa)?;
            let feasible = check_lp_pair(&support, &pair);
            let verdicts = vec![Verdict::claim(
                "lp_pair_feasible",
                feasible.is_none(),
                feasible.unwrap_or_else(|| "constraints hold exactly".into()),
            )];
            write(out, serde_json::to_string_pretty(&pair).expect("LP solutions serialize"))?;
            SolveReport {
                command: "solve",
                mode: "relaxed".into(),
                players: inst.problem.n(),
                kappa,
                duality_gap: &pair.value - &pair.dual_value,
                lp_value: pair.value.clone(),
                dual_value: pair.dual_value.clone(),
                expected_disutility: None,
                sentinels: support.sentinels().to_vec(),
                certified: support.certified(),
                samples: Vec::new(),
                verdicts,
            }
        }
        Mode::Dsic => {
            let s = synthesize_dsic(&inst.problem, &inst.distribution, &kappa, overrides)?;
            let mechanism = Mechanism::Dsic(s.mechanism.clone());
            let disutility = expected_disutility(&mechanism, &inst.distribution, &kappa)?;
            let verdicts = vec![
                Verdict::from_report("dsic_grid", &check_dsic_grid(&mechanism, &s.support.canonical_grid())?),
                Verdict::claim("disutility_within_lp", disutility <= s.pair.value, format!("{} vs {}", disutility, s.pair.value)),
            ];
            let file = MechanismFile { mechanism: mechanism.clone(), support: None, product_support: Some(s.support.clone()) };
            write(out, file.to_json())?;
            SolveReport {
                command: "solve",
                mode: "dsic".into(),
                players: inst.problem.n(),
                kappa,
                duality_gap: &s.pair.value - &s.pair.dual_value,
                lp_value: s.pair.value.clone(),
                dual_value: s.pair.dual_value.clone(),
                expected_disutility: Some(disutility),
                sentinels: s.support.sentinels.clone(),
                certified: false,
                samples: samples(&mechanism, &inst, seed)?,
                verdicts,
            }
        }
    };
    print_json(&report);
    Ok(exit_for(&report.verdicts))
}

fn approximation(inst: &Instance, plugin: &str, omega: &[Allocation], rho: Option<&Rational>) -> Result<Box<dyn LpRelativeApprox>> {
    let mismatch = || Error::Input(format!("plugin {plugin} does not fit a {:?} instance", inst.spec));
    Ok(match plugin {
        "exact" => Box::new(EnumerationApprox::new(&inst.problem, omega, rho.cloned().unwrap_or_else(Rational::one))),
        "single-item" => match &inst.spec {
            ProblemSpec::SingleItem { sellers } => Box::new(SingleItem { n: *sellers }),
            _ => return Err(mismatch()),
        },
        "vertex-cover" => match &inst.spec {
            ProblemSpec::VertexCover { nodes, edges } => Box::new(VertexCoverApprox { nodes: *nodes, edges: edges.clone() }),
            _ => return Err(mismatch()),
        },
        "set-cover" => match &inst.spec {
            ProblemSpec::SetCover { universe, sets } => Box::new(SetCoverApprox { universe: *universe, sets: sets.clone() }),
            _ => return Err(mismatch()),
        },
        other => return Err(Error::Input(format!("unknown plugin {other:?}"))),
    })
}

fn default_plugin(spec: &ProblemSpec) -> &'static str {
    match spec {
        ProblemSpec::SingleItem { .. } => "single-item",
        ProblemSpec::VertexCover { .. } => "vertex-cover",
        ProblemSpec::SetCover { .. } => "set-cover",
        ProblemSpec::Bufl { .. } => "bufl",
        _ => "exact",
    }
}

fn payment_entries(relaxed: &LpPair<paymin::relax::FracAllocation>, rounded: &LpPair<Allocation>) -> Vec<PaymentEntry> {
    let mut out = Vec::new();
    for (k, c) in rounded.profiles.iter().enumerate() {
        for i in 0..c.n() {
            let p = relaxed.p[k][i].clone();
            let q = rounded.p[k][i].clone();
            let ratio = (!p.is_zero()).then(|| &q / &p);
            out.push(PaymentEntry { profile: c.clone(), player: i, relaxed: p, rounded: q, ratio });
        }
    }
    out
}

pub fn round(
    path: &Path,
    rho: Option<Rational>,
    plugin: Option<&str>,
    kappa: Option<Rational>,
    out: Option<&Path>,
    overrides: &Overrides,
) -> Result<u8> {
    let inst = load(path)?;
    let kappa = kappa.unwrap_or_else(|| inst.kappa.clone());
    let plugin = plugin.unwrap_or_else(|| default_plugin(&inst.spec)).to_string();
    let cmlp = inst.cmlp()?;
    let support = relaxed_bound_estimates(&cmlp, &inst.distribution, &kappa, overrides)?;
    let relaxed = solve_relaxed_lp(&cmlp, &support, &kappa)?;
    let omega = inst.problem.enumerate_allocations(DEFAULT_ENUMERATION_CAP)?;
    let mut verdicts = Vec::new();
    let mut assignment = Vec::new();
    let (pair, rho) = if plugin == "bufl" {
        if inst.spec.bufl().is_none() {
            return Err(Error::Input("plugin bufl needs a bufl instance".into()));
        }
        let rho = rho.unwrap_or_else(Rational::one);
        let rounding = round_bufl(&inst.problem, &relaxed, &ExactUflDecomposer)?;
        let limit = rounding.budget.as_ref().map(|b| &rho * b);
        for (c, a) in rounding.pair.profiles.iter().zip(&rounding.assignment) {
            assignment.push(AssignmentEntry {
                profile: c.clone(),
                fractional: a.fractional.clone(),
                rounded: a.rounded.clone(),
                limit: limit.clone(),
            });
        }
        if let Some(limit) = &limit {
            let worst = rounding.assignment.iter().map(|a| a.rounded.clone()).max().unwrap_or_default();
            verdicts.push(Verdict::claim("assignment_within_budget", worst <= *limit, format!("max {} vs {}", worst, limit)));
        }
        (rounding.pair, rho)
    } else {
        let approx = approximation(&inst, &plugin, &omega, rho.as_ref())?;
        let rho = rho.unwrap_or_else(|| approx.rho());
        if rho < approx.rho() {
            return Err(Error::Input(format!("rho {} is below the plugin's factor {}", rho, approx.rho())));
        }
        let rounded = round_single_dim(&cmlp, &relaxed, &support, &rho, approx.as_ref())?;
        (rounded.pair, rho)
    };
    let payments = payment_entries(&relaxed, &pair);
    let worst = payments.iter().all(|e| e.rounded <= &rho * &e.relaxed);
    verdicts.push(Verdict::claim("payments_within_rho", worst, format!("q <= {} p on every entry", rho)));
    let feasible = check_lp_pair(&support, &pair);
    verdicts.push(Verdict::claim("lp_pair_feasible", feasible.is_none(), feasible.unwrap_or_else(|| "constraints hold exactly".into())));
    let mechanism = extend_to_mechanism(&pair, &support, &inst.problem, &omega)?;
    verdicts.push(Verdict::from_report("robust_bic_ir", &check_robust_bic_ir(&mechanism, &support)?));
    let disutility = expected_disutility(&mechanism, &inst.distribution, &kappa)?;
    if plugin != "bufl" {
        let bound = &rho * &relaxed.value;
        verdicts.push(Verdict::claim("disutility_within_rho", disutility <= bound, format!("{} vs {}", disutility, bound)));
    }
    let file = MechanismFile { mechanism, support: Some(support.clone()), product_support: None };
    write(out, file.to_json())?;
    let report = RoundReport {
        command: "round",
        plugin,
        rho,
        kappa,
        relaxed_value: relaxed.value.clone(),
        rounded_value: pair.value.clone(),
        expected_disutility: disutility,
        sentinels: support.sentinels().to_vec(),
        payments,
        assignment,
        verdicts,
    };
    print_json(&report);
    Ok(exit_for(&report.verdicts))
}

fn print_table(rows: &[LookaheadReport]) {
    println!(
        "{:>8} {:>6} {:>10} {:>4} {:>14} {:>14} {:>14} {:>16}",
        "K", "eps", "delta", "n", "benchmark", "lookahead", "lower bound", "ratio"
    );
    for r in rows {
        println!(
            "{:>8} {:>6} {:>10} {:>4} {:>14} {:>14} {:>14} {:>16}",
            r.params.k.to_string(),
            r.params.eps.to_string(),
            r.params.delta.to_string(),
            r.params.n,
            r.benchmark_payment.to_string(),
            r.lookahead_payment.to_string(),
            r.lower_bound.to_string(),
            format!("{} (~{:.2})", r.ratio, r.ratio.to_f64()),
        );
    }
}

pub fn lookahead_demo(
    k: Option<Rational>,
    eps: Option<Rational>,
    delta: Option<Rational>,
    n: Option<usize>,
    json: bool,
) -> Result<u8> {
    let given = k.is_some() || eps.is_some() || delta.is_some() || n.is_some();
    let params = if given {
        vec![LookaheadParams::new(
            k.unwrap_or_else(|| Rational::from(100)),
            eps.unwrap_or_else(Rational::one),
            delta.unwrap_or_else(|| Rational::new(1, 100)),
            n.unwrap_or(3),
        )]
    } else {
        [(Rational::new(1, 100), 3), (Rational::new(1, 2), 3), (Rational::new(1, 10), 4)]
            .into_iter()
            .map(|(d, n)| LookaheadParams::new(Rational::from(100), Rational::one(), d, n))
            .collect()
    };
    let rows = params.iter().map(lookahead_report).collect::<Result<Vec<_>>>()?;
    if json {
        print_json(&rows);
    } else {
        print_table(&rows);
    }
    let sound = rows.iter().all(|r| r.lookahead_payment >= r.lower_bound);
    Ok(if sound { 0 } else { CHECK_FAILED })
}
