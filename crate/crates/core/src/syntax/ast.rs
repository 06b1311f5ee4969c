//! Typed syntax tree for a single requirement.
//!
//! Sum types serialize with a `"node"` discriminator; every node keeps the
//! source span it was parsed from.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::lexicon::Role;
use crate::model::SymbolRef;
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    All,
    None,
    OnlyOne,
    Any,
}

impl Quantifier {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantifier::All => "all",
            Quantifier::None => "none",
            Quantifier::OnlyOne => "only one",
            Quantifier::Any => "any",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        Some(match kw {
            "all" => Quantifier::All,
            "none" => Quantifier::None,
            "only one" => Quantifier::OnlyOne,
            "any" => Quantifier::Any,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Article {
    A,
    An,
    The,
}

impl Article {
    pub fn as_str(self) -> &'static str {
        match self {
            Article::A => "a",
            Article::An => "an",
            Article::The => "the",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        Some(match kw {
            "a" => Article::A,
            "an" => Article::An,
            "the" => Article::The,
            _ => return None,
        })
    }
}

/// Optional quantifier and article in front of an operand.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Determiner {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantifier: Option<Quantifier>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub article: Option<Article>,
}

impl Determiner {
    pub fn is_empty(&self) -> bool {
        self.quantifier.is_none() && self.article.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModalVerb {
    Shall,
    Must,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modal {
    pub verb: ModalVerb,
    pub negated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connector {
    And,
    Or,
}

impl Connector {
    pub fn as_str(self) -> &'static str {
        match self {
            Connector::And => "and",
            Connector::Or => "or",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<Scope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionStructures>,
    pub actor: SymbolRef,
    pub modal: Modal,
    pub response: SystemResponse,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scope {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantifier: Option<Quantifier>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub article: Option<Article>,
    pub subject: SymbolRef,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionStructures {
    pub head: ConditionStructure,
    #[serde(default)]
    pub rest: Vec<ConnectedStructure>,
}

impl ConditionStructures {
    pub fn iter(&self) -> impl Iterator<Item = &ConditionStructure> {
        std::iter::once(&self.head).chain(self.rest.iter().map(|c| &c.structure))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectedStructure {
    pub connector: Connector,
    pub structure: ConditionStructure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalDirection {
    Before,
    After,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum ConditionStructure {
    While { states: ConditionExpr },
    When { trigger: Trigger },
    Where { features: TextLiteral },
    If { pre: PreconditionStructure },
    Temporal { direction: TemporalDirection, anchor: TemporalAnchor },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TemporalAnchor {
    Time { time: TimeLiteral },
    Trigger { trigger: Trigger },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trigger {
    pub actor: SymbolRef,
    pub actions: Expr<ActionPhrase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum PreconditionStructure {
    /// Intro clause ending in `:` followed by bulleted conditions; the
    /// connector list has one entry per adjacent item pair.
    Itemized { intro_span: Span, items: Vec<ConditionExpr>, connectors: Vec<Connector> },
    Expr { expr: ConditionExpr },
}

/// Boolean combination of atoms. `And` binds tighter than `Or`; both are
/// left-associative and `Paren` records explicit grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Expr<T> {
    Atom { atom: T },
    Not { inner: Box<Expr<T>> },
    And { left: Box<Expr<T>>, right: Box<Expr<T>> },
    Or { left: Box<Expr<T>>, right: Box<Expr<T>> },
    Paren { inner: Box<Expr<T>> },
}

impl<T> Expr<T> {
    pub fn atom(atom: T) -> Self {
        Expr::Atom { atom }
    }

    pub fn and(left: Expr<T>, right: Expr<T>) -> Self {
        Expr::And { left: Box::new(left), right: Box::new(right) }
    }

    pub fn or(left: Expr<T>, right: Expr<T>) -> Self {
        Expr::Or { left: Box::new(left), right: Box::new(right) }
    }

    pub fn paren(inner: Expr<T>) -> Self {
        Expr::Paren { inner: Box::new(inner) }
    }

    pub fn not(inner: Expr<T>) -> Self {
        Expr::Not { inner: Box::new(inner) }
    }

    /// Atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<&T> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a T>) {
        match self {
            Expr::Atom { atom } => out.push(atom),
            Expr::Not { inner } | Expr::Paren { inner } => inner.collect(out),
            Expr::And { left, right } | Expr::Or { left, right } => {
                left.collect(out);
                right.collect(out);
            }
        }
    }

    /// True when the tree is what the parser would build from its printed
    /// form: left-associative chains, `Or` under `And` only inside `Paren`.
    pub fn is_canonical(&self) -> bool {
        match self {
            Expr::Atom { .. } => true,
            Expr::Not { inner } => {
                matches!(**inner, Expr::Atom { .. } | Expr::Paren { .. } | Expr::Not { .. })
                    && inner.is_canonical()
            }
            Expr::Paren { inner } => !matches!(**inner, Expr::Paren { .. }) && inner.is_canonical(),
            Expr::And { left, right } => {
                !matches!(**left, Expr::Or { .. })
                    && !matches!(**right, Expr::Or { .. } | Expr::And { .. })
                    && left.is_canonical()
                    && right.is_canonical()
            }
            Expr::Or { left, right } => {
                !matches!(**right, Expr::Or { .. }) && left.is_canonical() && right.is_canonical()
            }
        }
    }
}

pub type ConditionExpr = Expr<Condition>;

/// An operand naming a model entity, with its determiner and an optional
/// inline `of type` binding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(default, skip_serializing_if = "Determiner::is_empty")]
    pub det: Determiner,
    pub symbol: SymbolRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub of_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Condition {
    HasProperties {
        owner: Term,
        source: PropertySource,
    },
    Convention {
        subject: Term,
        standard: TextLiteral,
    },
    ClassOrPropOpElement {
        lhs: Term,
        op: Operator,
        /// Absent only for operators without a second operand (`is available`).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rhs: Option<Operand>,
    },
    InstanceOrPropOpValue {
        lhs: Term,
        op: Operator,
        value: String,
    },
    UiComponentOp {
        #[serde(default, skip_serializing_if = "Determiner::is_empty")]
        det: Determiner,
        instance_label: TextLiteral,
        component_type: String,
        op: Operator,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rhs: Option<Operand>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum PropertySource {
    Inline { properties: Vec<String> },
    Document { document: TextLiteral },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorFamily {
    Compare,
    Contains,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Has,
    Contains,
    IsAvailable,
    ConformsTo,
}

impl OperatorKind {
    pub fn family(self) -> OperatorFamily {
        match self {
            OperatorKind::Eq
            | OperatorKind::Neq
            | OperatorKind::Lt
            | OperatorKind::Le
            | OperatorKind::Gt
            | OperatorKind::Ge => OperatorFamily::Compare,
            OperatorKind::Has | OperatorKind::Contains => OperatorFamily::Contains,
            OperatorKind::IsAvailable | OperatorKind::ConformsTo => OperatorFamily::Other,
        }
    }

    /// Whether the operator takes a right-hand operand.
    pub fn is_binary(self) -> bool {
        self != OperatorKind::IsAvailable
    }

    pub const ALL: [OperatorKind; 10] = [
        OperatorKind::Eq,
        OperatorKind::Neq,
        OperatorKind::Lt,
        OperatorKind::Le,
        OperatorKind::Gt,
        OperatorKind::Ge,
        OperatorKind::Has,
        OperatorKind::Contains,
        OperatorKind::IsAvailable,
        OperatorKind::ConformsTo,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Operator {
    pub family: OperatorFamily,
    pub kind: OperatorKind,
    pub negated: bool,
}

/// Surface forms accepted for each operator: `(phrase, kind, negated)`.
/// The first entry of each (kind, negated) pair is the canonical spelling.
pub const OPERATOR_FORMS: &[(&str, OperatorKind, bool)] = &[
    ("is equal to", OperatorKind::Eq, false),
    ("equals to", OperatorKind::Eq, false),
    ("is", OperatorKind::Eq, false),
    ("is not equal to", OperatorKind::Neq, false),
    ("is different from", OperatorKind::Neq, false),
    ("is not", OperatorKind::Neq, false),
    ("is less than", OperatorKind::Lt, false),
    ("is not less than", OperatorKind::Lt, true),
    ("is less than or equal to", OperatorKind::Le, false),
    ("is less or equal to", OperatorKind::Le, false),
    ("less or equal to", OperatorKind::Le, false),
    ("is not less than or equal to", OperatorKind::Le, true),
    ("is greater than", OperatorKind::Gt, false),
    ("is not greater than", OperatorKind::Gt, true),
    ("is greater than or equal to", OperatorKind::Ge, false),
    ("is greater or equal to", OperatorKind::Ge, false),
    ("greater or equal to", OperatorKind::Ge, false),
    ("is not greater than or equal to", OperatorKind::Ge, true),
    ("has", OperatorKind::Has, false),
    ("have", OperatorKind::Has, false),
    ("does not have", OperatorKind::Has, true),
    ("do not have", OperatorKind::Has, true),
    ("contains", OperatorKind::Contains, false),
    ("contain", OperatorKind::Contains, false),
    ("does not contain", OperatorKind::Contains, true),
    ("do not contain", OperatorKind::Contains, true),
    ("is available", OperatorKind::IsAvailable, false),
    ("are available", OperatorKind::IsAvailable, false),
    ("is not available", OperatorKind::IsAvailable, true),
    ("are not available", OperatorKind::IsAvailable, true),
    ("conforms to the standard", OperatorKind::ConformsTo, false),
    ("conforms to the format", OperatorKind::ConformsTo, false),
    ("conform to the standard", OperatorKind::ConformsTo, false),
    ("conform to the format", OperatorKind::ConformsTo, false),
    ("does not conform to the standard", OperatorKind::ConformsTo, true),
    ("does not conform to the format", OperatorKind::ConformsTo, true),
];

impl Operator {
    /// Builds an operator; equality is never flagged negated, `neq` is used.
    pub fn new(kind: OperatorKind, negated: bool) -> Self {
        let (kind, negated) = match (kind, negated) {
            (OperatorKind::Eq, true) => (OperatorKind::Neq, false),
            (OperatorKind::Neq, true) => (OperatorKind::Eq, false),
            other => other,
        };
        Operator { family: kind.family(), kind, negated }
    }

    pub fn from_phrase(phrase: &str) -> Option<Self> {
        OPERATOR_FORMS
            .iter()
            .find(|(p, _, _)| *p == phrase)
            .map(|&(_, kind, negated)| Operator::new(kind, negated))
    }

    pub fn canonical(&self) -> &'static str {
        OPERATOR_FORMS
            .iter()
            .find(|(_, k, n)| *k == self.kind && *n == self.negated)
            .map(|(p, _, _)| *p)
            .expect("every operator has a canonical form")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Operand {
    Symbol {
        term: Term,
    },
    Number {
        /// Decimal digits as written, so `0000` is preserved.
        value: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unit: Option<String>,
    },
    Text {
        #[serde(default, skip_serializing_if = "Determiner::is_empty")]
        det: Determiner,
        text: TextLiteral,
    },
    ValueLiteral {
        value: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum SystemResponse {
    Itemized { items: Vec<AtomicResponse>, connectors: Vec<Connector> },
    Expr { expr: Expr<AtomicResponse> },
}

impl SystemResponse {
    pub fn phrases(&self) -> Vec<&ActionPhrase> {
        match self {
            SystemResponse::Itemized { items, .. } => items.iter().map(|a| &a.phrase).collect(),
            SystemResponse::Expr { expr } => expr.atoms().into_iter().map(|a| &a.phrase).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicResponse {
    pub phrase: ActionPhrase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<Frequency>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Millisecond,
    Second,
    Minute,
    Hour,
    Day,
    Week,
    Month,
}

impl TimeUnit {
    pub const ALL: [TimeUnit; 7] = [
        TimeUnit::Millisecond,
        TimeUnit::Second,
        TimeUnit::Minute,
        TimeUnit::Hour,
        TimeUnit::Day,
        TimeUnit::Week,
        TimeUnit::Month,
    ];

    pub fn singular(self) -> &'static str {
        match self {
            TimeUnit::Millisecond => "millisecond",
            TimeUnit::Second => "second",
            TimeUnit::Minute => "minute",
            TimeUnit::Hour => "hour",
            TimeUnit::Day => "day",
            TimeUnit::Week => "week",
            TimeUnit::Month => "month",
        }
    }

    pub fn parse(word: &str) -> Option<Self> {
        let lower = word.to_lowercase();
        let stem = lower.strip_suffix('s').unwrap_or(&lower);
        TimeUnit::ALL.into_iter().find(|u| u.singular() == stem)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    /// Positive decimal as written.
    pub every: String,
    pub unit: TimeUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionPhrase {
    pub code_id: String,
    /// Surface form as written.
    pub verb: String,
    pub filled_slots: Vec<FilledSlot>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilledSlot {
    pub role: Role,
    /// Connector joining the operands when there are several.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connector: Option<Connector>,
    pub operands: Vec<Operand>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextLiteral {
    pub raw: String,
    pub quoted: bool,
}

impl TextLiteral {
    pub fn quoted(raw: impl Into<String>) -> Self {
        TextLiteral { raw: raw.into(), quoted: true }
    }

    pub fn free(raw: impl Into<String>) -> Self {
        TextLiteral { raw: raw.into(), quoted: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeLiteral {
    /// `<h>h<mm>` plus an optional zone word, e.g. `1h00 CET`.
    pub raw: String,
}

fn strip(value: &mut Value) {
    match value {
        Value::Object(map) => {
            map.remove("span");
            map.remove("intro_span");
            map.values_mut().for_each(strip);
        }
        Value::Array(items) => items.iter_mut().for_each(strip),
        _ => {}
    }
}

/// JSON form of a node with all source spans removed.
pub fn without_spans<T: Serialize>(node: &T) -> Value {
    let mut value = serde_json::to_value(node).expect("syntax nodes serialize");
    strip(&mut value);
    value
}

/// Equality ignoring source positions.
pub fn structurally_equal<T: Serialize>(a: &T, b: &T) -> bool {
    without_spans(a) == without_spans(b)
}


/// Collects every symbol reference below a node, in source order.
pub trait Symbols {
    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a SymbolRef>);

    fn symbols(&self) -> Vec<&SymbolRef> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }
}

impl<T: Symbols> Symbols for Expr<T> {
    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a SymbolRef>) {
        for atom in self.atoms() {
            atom.collect_symbols(out);
        }
    }
}

impl Symbols for Term {
    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a SymbolRef>) {
        out.push(&self.symbol);
    }
}

impl Symbols for Operand {
    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a SymbolRef>) {
        if let Operand::Symbol { term } = self {
            term.collect_symbols(out);
        }
    }
}

impl Symbols for Condition {
    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a SymbolRef>) {
        match self {
            Condition::HasProperties { owner, .. } => owner.collect_symbols(out),
            Condition::Convention { subject, .. } => subject.collect_symbols(out),
            Condition::ClassOrPropOpElement { lhs, rhs, .. } => {
                lhs.collect_symbols(out);
                if let Some(rhs) = rhs {
                    rhs.collect_symbols(out);
                }
            }
            Condition::InstanceOrPropOpValue { lhs, .. } => lhs.collect_symbols(out),
            Condition::UiComponentOp { rhs, .. } => {
                if let Some(rhs) = rhs {
                    rhs.collect_symbols(out);
                }
            }
        }
    }
}

impl Symbols for ActionPhrase {
    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a SymbolRef>) {
        for slot in &self.filled_slots {
            for operand in &slot.operands {
                operand.collect_symbols(out);
            }
        }
    }
}

impl Symbols for AtomicResponse {
    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a SymbolRef>) {
        self.phrase.collect_symbols(out);
    }
}

impl Symbols for Trigger {
    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a SymbolRef>) {
        out.push(&self.actor);
        self.actions.collect_symbols(out);
    }
}

impl Symbols for ConditionStructure {
    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a SymbolRef>) {
        match self {
            ConditionStructure::While { states } => states.collect_symbols(out),
            ConditionStructure::When { trigger } => trigger.collect_symbols(out),
            ConditionStructure::Where { .. } => {}
            ConditionStructure::If { pre } => match pre {
                PreconditionStructure::Itemized { items, .. } => {
                    items.iter().for_each(|i| i.collect_symbols(out))
                }
                PreconditionStructure::Expr { expr } => expr.collect_symbols(out),
            },
            ConditionStructure::Temporal { anchor, .. } => {
                if let TemporalAnchor::Trigger { trigger } = anchor {
                    trigger.collect_symbols(out);
                }
            }
        }
    }
}

impl Symbols for Requirement {
    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a SymbolRef>) {
        if let Some(scope) = &self.scope {
            out.push(&scope.subject);
        }
        if let Some(conds) = &self.conditions {
            conds.iter().for_each(|c| c.collect_symbols(out));
        }
        out.push(&self.actor);
        match &self.response {
            SystemResponse::Itemized { items, .. } => items.iter().for_each(|i| i.collect_symbols(out)),
            SystemResponse::Expr { expr } => expr.collect_symbols(out),
        }
    }
}
