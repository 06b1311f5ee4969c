//! Corpus statistics: representability reports, saturation and one-tailed
//! two-proportion z-tests.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::parser::{FailureClass, HumanCause, RecordSummary};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("no records in {0}")]
    Empty(String),
    #[error("non-representable records without a cause: {}", .0.join(", "))]
    IncompleteAnnotation(Vec<String>),
    #[error("invalid z-test input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: pooled proportion is {0}")]
    Degenerate(f64),
    #[error("{0}")]
    TooFewReports(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauseCounts {
    pub cause1: usize,
    pub cause2: usize,
    pub cause3: usize,
}

impl CauseCounts {
    pub fn sum(&self) -> usize {
        self.cause1 + self.cause2 + self.cause3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub srs_id: String,
    pub total: usize,
    pub representable: usize,
    pub cause_counts: CauseCounts,
    pub percent_representable: f64,
}

impl CorpusReport {
    /// Report from known counts; checks `representable + causes = total`.
    pub fn from_counts(
        srs_id: impl Into<String>,
        total: usize,
        representable: usize,
        cause_counts: CauseCounts,
    ) -> Result<Self, AnalyticsError> {
        let srs_id = srs_id.into();
        if total == 0 {
            return Err(AnalyticsError::Empty(srs_id));
        }
        if representable + cause_counts.sum() != total {
            return Err(AnalyticsError::InvalidInput(format!(
                "{srs_id}: {representable} representable + {} causes != {total}",
                cause_counts.sum()
            )));
        }
        Ok(CorpusReport {
            percent_representable: representable as f64 / total as f64,
            srs_id,
            total,
            representable,
            cause_counts,
        })
    }
}

/// Cause of a non-representable record: the human annotation when present,
/// otherwise the automatic class.
fn cause_of(record: &RecordSummary) -> Option<HumanCause> {
    record.annotation.or(match record.auto_cause {
        Some(FailureClass::Cause1) => Some(HumanCause::Cause1),
        Some(FailureClass::Cause2) => Some(HumanCause::Cause2),
        _ => None,
    })
}

pub fn build_report(records: &[RecordSummary], srs_id: &str) -> Result<CorpusReport, AnalyticsError> {
    if records.is_empty() {
        return Err(AnalyticsError::Empty(srs_id.to_string()));
    }
    let mut counts = CauseCounts::default();
    let mut representable = 0;
    let mut missing = Vec::new();
    for r in records {
        if r.representable {
            representable += 1;
            continue;
        }
        match cause_of(r) {
            Some(HumanCause::Cause1) => counts.cause1 += 1,
            Some(HumanCause::Cause2) => counts.cause2 += 1,
            Some(HumanCause::Cause3) => counts.cause3 += 1,
            None => missing.push(r.id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(AnalyticsError::IncompleteAnnotation(missing));
    }
    CorpusReport::from_counts(srs_id, records.len(), representable, counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZTestInput {
    pub n1: usize,
    pub x1: usize,
    pub n2: usize,
    pub x2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTestResult {
    pub p_hat1: f64,
    pub p_hat2: f64,
    pub p_bar: f64,
    pub z: f64,
    /// Left-tail probability for H1: p1 < p2.
    pub p_value: f64,
    pub alpha: f64,
    pub reject_h0: bool,
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

pub fn ztest(input: ZTestInput, alpha: f64) -> Result<ZTestResult, AnalyticsError> {
    let ZTestInput { n1, x1, n2, x2 } = input;
    if n1 == 0 || n2 == 0 || x1 > n1 || x2 > n2 {
        return Err(AnalyticsError::InvalidInput(format!("{input:?}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AnalyticsError::InvalidInput(format!("alpha {alpha}")));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let p_hat1 = x1 as f64 / n1f;
    let p_hat2 = x2 as f64 / n2f;
    let p_bar = (x1 + x2) as f64 / (n1f + n2f);
    if p_bar <= 0.0 || p_bar >= 1.0 {
        return Err(AnalyticsError::Degenerate(p_bar));
    }
    let se = (p_bar * (1.0 - p_bar) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    let z = (p_hat1 - p_hat2) / se;
    let p_value = normal_cdf(z);
    Ok(ZTestResult { p_hat1, p_hat2, p_bar, z, p_value, alpha, reject_h0: p_value < alpha })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationStatus {
    pub per_srs: Vec<(String, usize)>,
    pub saturated: bool,
}

/// Saturated when the latest SRS has no unknown-verb failures.
pub fn saturation(reports: &[CorpusReport]) -> Result<SaturationStatus, AnalyticsError> {
    let last = reports
        .last()
        .ok_or_else(|| AnalyticsError::TooFewReports("saturation needs at least one report".into()))?;
    Ok(SaturationStatus {
        per_srs: reports.iter().map(|r| (r.srs_id.clone(), r.cause_counts.cause1)).collect(),
        saturated: last.cause_counts.cause1 == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub srs_i: String,
    pub srs_j: String,
    pub input: ZTestInput,
    pub result: ZTestResult,
}

/// Every pair `i < j` in order: (1,2), (1,3), ..., (n-1,n).
pub fn pairwise_ztests(reports: &[CorpusReport], alpha: f64) -> Result<Vec<PairTest>, AnalyticsError> {
    if reports.len() < 2 {
        return Err(AnalyticsError::TooFewReports("pairwise tests need at least two reports".into()));
    }
    let mut out = Vec::new();
    for (i, a) in reports.iter().enumerate() {
        for b in &reports[i + 1..] {
            let input = ZTestInput { n1: a.total, x1: a.representable, n2: b.total, x2: b.representable };
            out.push(PairTest {
                srs_i: a.srs_id.clone(),
                srs_j: b.srs_id.clone(),
                input,
                result: ztest(input, alpha)?,
            });
        }
    }
    Ok(out)
}

/// Everything `stats` reports for an ordered list of SRSs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub reports: Vec<CorpusReport>,
    pub saturation: SaturationStatus,
    pub tests: Vec<PairTest>,
}

pub fn summarize(reports: Vec<CorpusReport>, alpha: f64) -> Result<StatsSummary, AnalyticsError> {
    let saturation = saturation(&reports)?;
    let tests = if reports.len() >= 2 { pairwise_ztests(&reports, alpha)? } else { Vec::new() };
    Ok(StatsSummary { reports, saturation, tests })
}

fn format_p(p: f64) -> String {
    if p < 0.01 {
        format!("{p:.2e}")
    } else {
        format!("{p:.2}")
    }
}

/// Plain-text tables: representability per SRS, z-test inputs and results.
pub fn render_tables(summary: &StatsSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<8} {:>6} {:>15} {:>8} {:>8} {:>8}", "SRS", "Total", "% Representable", "Cause 1", "Cause 2", "Cause 3");
    for r in &summary.reports {
        let c = r.cause_counts;
        let _ = writeln!(
            out,
            "{:<8} {:>6} {:>15.1} {:>8} {:>8} {:>8}",
            r.srs_id,
            r.total,
            r.percent_representable * 100.0,
            c.cause1,
            c.cause2,
            c.cause3
        );
    }
    let _ = writeln!(
        out,
        "saturated: {}",
        if summary.saturation.saturated { "yes" } else { "no" }
    );
    if summary.tests.is_empty() {
        return out;
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<5} {:<16} {:>6} {:>6} {:>6} {:>6}", "Test", "Pair", "n1", "n2", "x1", "x2");
    for (k, t) in summary.tests.iter().enumerate() {
        let i = t.input;
        let pair = format!("{}, {}", t.srs_i, t.srs_j);
        let _ = writeln!(out, "{:<5} {:<16} {:>6} {:>6} {:>6} {:>6}", k + 1, pair, i.n1, i.n2, i.x1, i.x2);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<5} {:<16} {:>7} {:>10} {:>8}", "Test", "Pair", "z", "p-value", "H0");
    for (k, t) in summary.tests.iter().enumerate() {
        let pair = format!("{}, {}", t.srs_i, t.srs_j);
        let verdict = if t.result.reject_h0 { "reject" } else { "retain" };
        let _ = writeln!(
            out,
            "{:<5} {:<16} {:>7.2} {:>10} {:>8}",
            k + 1,
            pair,
            t.result.z,
            format_p(t.result.p_value),
            verdict
        );
    }
    out
}
