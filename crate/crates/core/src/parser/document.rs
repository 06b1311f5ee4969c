use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    classify_failure, parse_requirement, Diagnostic, DiagnosticCode, FailureClass, ParseResult,
    ParserContext, Severity,
};
use crate::span::Span;

/// Cause assigned by a human reviewer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanCause {
    Cause1,
    Cause2,
    /// The meaning of the requirement is unclear.
    Cause3,
}

/// One entry of a JSON requirements document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentEntry {
    pub id: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub examples: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<HumanCause>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementRecord {
    pub id: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub examples: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<HumanCause>,
    /// First line of the entry in a plain-text document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    pub result: ParseResult,
}

impl RequirementRecord {
    pub fn new(entry: DocumentEntry, ctx: &ParserContext) -> Self {
        let result = parse_requirement(&entry.description, ctx);
        RequirementRecord {
            id: entry.id,
            description: entry.description,
            rationale: entry.rationale,
            examples: entry.examples,
            annotation: entry.annotation,
            line: None,
            result,
        }
    }

    /// Automatic failure class, `None` when representable.
    pub fn auto_cause(&self, ctx: &ParserContext) -> Option<FailureClass> {
        classify_failure(&self.result, ctx).ok()
    }

    pub fn summary(&self, ctx: &ParserContext) -> RecordSummary {
        RecordSummary {
            id: self.id.clone(),
            representable: self.result.representable,
            auto_cause: self.auto_cause(ctx),
            annotation: self.annotation,
        }
    }
}

/// What corpus statistics need to know about a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub id: String,
    pub representable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_cause: Option<FailureClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<HumanCause>,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed requirements document: {0}")]
    Format(#[from] serde_json::Error),
}

fn plain_entries(text: &str) -> Vec<(DocumentEntry, usize)> {
    let mut entries = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut start = 0;
    let flush = |lines: &mut Vec<&str>, start: usize, entries: &mut Vec<(DocumentEntry, usize)>| {
        if !lines.is_empty() {
            let entry = DocumentEntry {
                id: format!("R{}", entries.len() + 1),
                description: lines.join("\n"),
                rationale: None,
                examples: None,
                annotation: None,
            };
            entries.push((entry, start));
            lines.clear();
        }
    };
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            flush(&mut current, start, &mut entries);
        } else {
            if current.is_empty() {
                start = n + 1;
            }
            current.push(line);
        }
    }
    flush(&mut current, start, &mut entries);
    entries
}

/// Parses a requirements document: a JSON array of entries, or plain text
/// with entries separated by blank lines (ids `R1..Rn`).
pub fn parse_document(
    text: &str,
    ctx: &ParserContext,
) -> Result<Vec<RequirementRecord>, DocumentError> {
    let entries: Vec<(DocumentEntry, Option<usize>)> = if text.trim_start().starts_with('[') {
        let entries: Vec<DocumentEntry> = serde_json::from_str(text)?;
        entries.into_iter().map(|e| (e, None)).collect()
    } else {
        plain_entries(text).into_iter().map(|(e, l)| (e, Some(l))).collect()
    };
    let mut seen = HashSet::new();
    let records = entries
        .into_iter()
        .map(|(entry, line)| {
            let mut record = RequirementRecord::new(entry, ctx);
            record.line = line;
            if !seen.insert(record.id.clone()) {
                let end = record.description.len();
                record.result.diagnostics.insert(
                    0,
                    Diagnostic {
                        severity: Severity::Error,
                        span: Span::new(0, end, 1, 1),
                        message: format!("duplicate requirement id `{}`", record.id),
                        expected: Vec::new(),
                        cause: None,
                        code: DiagnosticCode::DuplicateId,
                    },
                );
                record.result.representable = false;
            }
            record
        })
        .collect();
    Ok(records)
}
