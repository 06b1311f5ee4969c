use std::io::Write;
use std::path::{Path, PathBuf};

use rimay_core::analytics::{build_report, render_tables, summarize, CorpusReport};
use rimay_core::lexicon::Lexicon;
use rimay_core::parser::{
    parse_document, parse_requirement, FailureClass, HumanCause, ParserContext, RecordSummary,
    RequirementRecord,
};
use rimay_core::syntax::pretty_print;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

/// Process exit status: 0 success, 1 findings, 2 usage or I/O problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Findings = 1,
    Usage = 2,
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Output(#[from] std::io::Error),
}

impl CommandError {
    pub fn status(&self) -> Status {
        Status::Usage
    }
}

fn read(path: &Path) -> Result<String, CommandError> {
    std::fs::read_to_string(path).map_err(|source| CommandError::Io { path: path.to_path_buf(), source })
}

/// A parsed record plus its automatic cause, as emitted by `check --json`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckedRecord {
    #[serde(flatten)]
    pub record: RequirementRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auto_cause: Option<FailureClass>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileReport {
    pub path: String,
    pub total: usize,
    pub representable: usize,
    pub records: Vec<CheckedRecord>,
}

fn check_file(path: &Path, ctx: &ParserContext) -> Result<FileReport, CommandError> {
    let text = read(path)?;
    let records = parse_document(&text, ctx).map_err(|e| CommandError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let records: Vec<_> = records
        .into_iter()
        .map(|r| CheckedRecord { auto_cause: r.auto_cause(ctx), record: r })
        .collect();
    Ok(FileReport {
        path: path.display().to_string(),
        total: records.len(),
        representable: records.iter().filter(|r| r.record.result.representable).count(),
        records,
    })
}

fn cause_label(auto: Option<FailureClass>, annotation: Option<HumanCause>) -> &'static str {
    match (annotation, auto) {
        (Some(HumanCause::Cause1), _) => "cause 1 (annotated)",
        (Some(HumanCause::Cause2), _) => "cause 2 (annotated)",
        (Some(HumanCause::Cause3), _) => "cause 3 (annotated)",
        (None, Some(FailureClass::Cause1)) => "cause 1 (unknown verb)",
        (None, Some(FailureClass::Cause2)) => "cause 2 (unsupported content)",
        _ => "cause unknown",
    }
}

fn write_file_report(out: &mut impl Write, report: &FileReport) -> std::io::Result<()> {
    for checked in &report.records {
        let r = &checked.record;
        // Plain-text entries know their first line; JSON entries count from 1.
        let base = r.line.unwrap_or(1);
        let status = if r.result.representable {
            "representable".to_string()
        } else {
            format!("not representable, {}", cause_label(checked.auto_cause, r.annotation))
        };
        writeln!(out, "{}:{}:1: {}: {}", report.path, base, r.id, status)?;
        for d in &r.result.diagnostics {
            let severity = if d.is_error() { "error" } else { "warning" };
            writeln!(
                out,
                "{}:{}:{}: {}: {}",
                report.path,
                base + d.span.line - 1,
                d.span.column,
                severity,
                d.message
            )?;
        }
    }
    Ok(())
}

pub fn check(
    paths: &[PathBuf],
    json: bool,
    ctx: &ParserContext,
    out: &mut impl Write,
) -> Result<Status, CommandError> {
    let reports = paths.iter().map(|p| check_file(p, ctx)).collect::<Result<Vec<_>, _>>()?;
    let total: usize = reports.iter().map(|r| r.total).sum();
    let representable: usize = reports.iter().map(|r| r.representable).sum();
    if json {
        serde_json::to_writer_pretty(&mut *out, &reports).map_err(std::io::Error::from)?;
        writeln!(out)?;
    } else {
        for r in &reports {
            write_file_report(out, r)?;
        }
        writeln!(out, "{representable}/{total} representable")?;
    }
    Ok(if representable == total { Status::Ok } else { Status::Findings })
}

/// Record summaries from a requirements document, a record array or a
/// `check --json` report. A report yields one group per file.
fn load_summaries(path: &Path, ctx: &ParserContext) -> Result<Vec<(String, Vec<RecordSummary>)>, CommandError> {
    let text = read(path)?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let format = |message: String| CommandError::Format { path: path.to_path_buf(), message };
    let summarize_value = |v: &Value| -> Result<RecordSummary, CommandError> {
        let record: RequirementRecord = serde_json::from_value(v.clone()).map_err(|e| format(e.to_string()))?;
        Ok(record.summary(ctx))
    };
    if text.trim_start().starts_with('[') {
        let value: Value = serde_json::from_str(&text).map_err(|e| format(e.to_string()))?;
        let items = value.as_array().cloned().unwrap_or_default();
        if items.iter().all(|i| i.get("records").is_some()) && !items.is_empty() {
            return items
                .iter()
                .map(|file| {
                    let id = file
                        .get("path")
                        .and_then(Value::as_str)
                        .map(|p| Path::new(p).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
                        .unwrap_or_else(|| stem.clone());
                    let records = file["records"].as_array().cloned().unwrap_or_default();
                    Ok((id, records.iter().map(summarize_value).collect::<Result<_, _>>()?))
                })
                .collect();
        }
        if items.iter().all(|i| i.get("result").is_some()) && !items.is_empty() {
            return Ok(vec![(stem, items.iter().map(summarize_value).collect::<Result<_, _>>()?)]);
        }
    }
    let records = parse_document(&text, ctx).map_err(|e| format(e.to_string()))?;
    Ok(vec![(stem, records.iter().map(|r| r.summary(ctx)).collect())])
}

pub fn stats(
    paths: &[PathBuf],
    alpha: f64,
    json: bool,
    ctx: &ParserContext,
    out: &mut impl Write,
    err: &mut impl Write,
) -> Result<Status, CommandError> {
    let mut reports: Vec<CorpusReport> = Vec::new();
    for path in paths {
        for (id, summaries) in load_summaries(path, ctx)? {
            match build_report(&summaries, &id) {
                Ok(r) => reports.push(r),
                Err(e) => {
                    writeln!(err, "{}: {e}", path.display())?;
                    return Ok(Status::Findings);
                }
            }
        }
    }
    let summary = match summarize(reports, alpha) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(Status::Usage);
        }
    };
    if json {
        serde_json::to_writer_pretty(&mut *out, &summary).map_err(std::io::Error::from)?;
        writeln!(out)?;
    } else {
        write!(out, "{}", render_tables(&summary))?;
    }
    Ok(Status::Ok)
}

pub fn parse(text: &str, json: bool, ctx: &ParserContext, out: &mut impl Write) -> Result<Status, CommandError> {
    let text = text.trim_end_matches(['\n', '\r']);
    let result = parse_requirement(text, ctx);
    if json {
        serde_json::to_writer_pretty(&mut *out, &result).map_err(std::io::Error::from)?;
        writeln!(out)?;
    } else {
        if let Some(req) = &result.requirement {
            writeln!(out, "{}", pretty_print(req))?;
        }
        for d in &result.diagnostics {
            let severity = if d.is_error() { "error" } else { "warning" };
            writeln!(out, "{}:{}: {}: {}", d.span.line, d.span.column, severity, d.message)?;
        }
        writeln!(out, "{}", if result.representable { "representable" } else { "not representable" })?;
    }
    Ok(if result.representable { Status::Ok } else { Status::Findings })
}

pub fn lexicon(lex: &Lexicon, lookup: Option<&str>, json: bool, out: &mut impl Write) -> Result<Status, CommandError> {
    if let Some(word) = lookup {
        let hits = lex.lookup_verb(word);
        if json {
            serde_json::to_writer_pretty(&mut *out, &hits).map_err(std::io::Error::from)?;
            writeln!(out)?;
        } else if hits.is_empty() {
            writeln!(out, "`{word}` is not in the lexicon")?;
        }
        for (code, lemma) in hits.iter().filter(|_| !json) {
            writeln!(out, "{code}: {lemma}")?;
        }
        return Ok(if hits.is_empty() { Status::Findings } else { Status::Ok });
    }
    if json {
        serde_json::to_writer_pretty(&mut *out, &lex.to_document()).map_err(std::io::Error::from)?;
        writeln!(out)?;
    } else {
        for code in lex.codes() {
            writeln!(out, "{code}")?;
        }
        writeln!(out, "{} codes", lex.len())?;
    }
    Ok(Status::Ok)
}
