use serde::Serialize;

use paymin::model::{Allocation, TypeProfile};
use paymin::verify::Report;
use paymin::Rational;

#[derive(Debug, Serialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub checked: usize,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Verdict {
    pub fn from_report(check: &str, report: &Report) -> Self {
        Verdict {
            check: check.into(),
            passed: report.passed(),
            checked: report.checked,
            violations: report.violations.len(),
            detail: report.violations.first().map(|v| format!("{v:?}")),
        }
    }

    pub fn claim(check: &str, passed: bool, detail: String) -> Self {
        Verdict { check: check.into(), passed, checked: 1, violations: usize::from(!passed), detail: Some(detail) }
    }
}

#[derive(Debug, Serialize)]
pub struct Sample {
    pub profile: TypeProfile,
    pub allocation: Vec<Vec<usize>>,
    pub payments: Vec<Rational>,
}

impl Sample {
    pub fn new(profile: TypeProfile, allocation: &Allocation, payments: Vec<Rational>) -> Self {
        Sample { profile, allocation: allocation.sets(), payments }
    }
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    pub mode: String,
    pub players: usize,
    pub kappa: Rational,
    pub lp_value: Rational,
    pub dual_value: Rational,
    pub duality_gap: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_disutility: Option<Rational>,
    pub sentinels: Vec<Rational>,
    pub certified: bool,
    pub verdicts: Vec<Verdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<Sample>,
}

#[derive(Debug, Serialize)]
pub struct PaymentEntry {
    pub profile: TypeProfile,
    pub player: usize,
    pub relaxed: Rational,
    pub rounded: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<Rational>,
}

#[derive(Debug, Serialize)]
pub struct AssignmentEntry {
    pub profile: TypeProfile,
    pub fractional: Rational,
    pub rounded: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<Rational>,
}

#[derive(Debug, Serialize)]
pub struct RoundReport {
    pub command: &'static str,
    pub plugin: String,
    pub rho: Rational,
    pub kappa: Rational,
    pub relaxed_value: Rational,
    pub rounded_value: Rational,
    pub expected_disutility: Rational,
    pub sentinels: Vec<Rational>,
    pub payments: Vec<PaymentEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assignment: Vec<AssignmentEntry>,
    pub verdicts: Vec<Verdict>,
}

pub fn all_passed(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(|v| v.passed)
}
