//! Recursive-descent parser from requirement text to [`Requirement`] trees,
//! with panic-mode recovery and expectation tracking for content assist.

mod classify;
mod document;
mod expected;
mod grammar;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lexicon::Lexicon;
use crate::model::SymbolTable;
use crate::span::Span;
use crate::syntax::{ActionPhrase, ConditionExpr, Requirement, Trigger};

pub use classify::{classify_failure, ClassifyError, FailureClass};
pub use document::{
    parse_document, DocumentEntry, DocumentError, HumanCause, RecordSummary, RequirementRecord,
};
pub use expected::Expected;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// Automatic failure cause attached to an error diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagnosticCause {
    #[serde(rename = "cause1_unknown_verb")]
    UnknownVerb,
    #[serde(rename = "cause2_unsupported_content")]
    UnsupportedContent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    Syntax,
    UnknownVerb,
    Lex,
    UnknownName,
    DuplicateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    #[serde(flatten)]
    pub span: Span,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<DiagnosticCause>,
    pub code: DiagnosticCode,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOptions {
    pub max_errors: usize,
    pub recovery: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { max_errors: 25, recovery: true }
    }
}

/// Everything a parse depends on. Cloning is cheap; the lexicon and symbol
/// table are shared snapshots.
#[derive(Debug, Clone)]
pub struct ParserContext {
    pub lexicon: Arc<Lexicon>,
    pub symbols: Arc<SymbolTable>,
    pub options: ParseOptions,
}

impl ParserContext {
    pub fn new(lexicon: Lexicon, symbols: SymbolTable) -> Self {
        ParserContext {
            lexicon: Arc::new(lexicon),
            symbols: Arc::new(symbols),
            options: ParseOptions::default(),
        }
    }

    pub fn with_options(mut self, options: ParseOptions) -> Self {
        self.options = ParseOptions { max_errors: options.max_errors.max(1), ..options };
        self
    }
}

impl Default for ParserContext {
    fn default() -> Self {
        ParserContext::new(Lexicon::default_lexicon(), SymbolTable::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseResult {
    pub representable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirement: Option<Requirement>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseResult {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| !d.is_error())
    }

    /// Offset of the first error, if any.
    pub fn failure_offset(&self) -> Option<usize> {
        self.errors().map(|d| d.span.start).min()
    }
}

/// Result of parsing a requirement fragment (condition, action phrase, trigger).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentResult<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<T>,
    pub diagnostics: Vec<Diagnostic>,
}

impl<T> FragmentResult<T> {
    pub fn is_ok(&self) -> bool {
        self.value.is_some() && !self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

/// Expectations collected while parsing, used by content assist.
#[derive(Debug, Clone, Default)]
pub struct ParseTrace {
    /// What the grammar would accept at the end of the input.
    pub at_end: BTreeSet<Expected>,
}

pub fn parse_requirement(text: &str, ctx: &ParserContext) -> ParseResult {
    grammar::parse_requirement(text, ctx).0
}

/// Parses and also reports the expectations at end of input.
pub fn parse_with_trace(text: &str, ctx: &ParserContext) -> (ParseResult, ParseTrace) {
    grammar::parse_requirement(text, ctx)
}

pub fn parse_condition(text: &str, ctx: &ParserContext) -> FragmentResult<ConditionExpr> {
    grammar::parse_fragment(text, ctx, |p| p.condition_expr())
}

pub fn parse_action_phrase(text: &str, ctx: &ParserContext) -> FragmentResult<ActionPhrase> {
    grammar::parse_fragment(text, ctx, |p| p.action_phrase(false))
}

pub fn parse_trigger(text: &str, ctx: &ParserContext) -> FragmentResult<Trigger> {
    grammar::parse_fragment(text, ctx, |p| p.trigger())
}
