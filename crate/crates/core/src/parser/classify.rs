use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DiagnosticCause, DiagnosticCode, ParseResult, ParserContext};

/// Automatic failure class of a non-representable requirement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureClass {
    Cause1,
    Cause2,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("cannot classify a representable requirement")]
    Representable,
}

/// Unknown verbs win over structural failures; lexing errors without
/// either give `Unknown`.
pub fn classify_failure(
    result: &ParseResult,
    _ctx: &ParserContext,
) -> Result<FailureClass, ClassifyError> {
    if result.representable {
        return Err(ClassifyError::Representable);
    }
    let errors: Vec<_> = result.errors().collect();
    if errors.iter().any(|d| d.cause == Some(DiagnosticCause::UnknownVerb)) {
        return Ok(FailureClass::Cause1);
    }
    if errors.iter().any(|d| d.code == DiagnosticCode::Lex) {
        return Ok(FailureClass::Unknown);
    }
    if errors.iter().any(|d| d.cause == Some(DiagnosticCause::UnsupportedContent)) {
        return Ok(FailureClass::Cause2);
    }
    Ok(FailureClass::Unknown)
}
