//! Canonical text rendering. `parse(pretty_print(n))` rebuilds `n`.

use std::fmt::{self, Display, Formatter, Write};

use crate::lexicon::Role;
use crate::model::{SymbolKind, SymbolRef};

use super::ast::*;

pub fn pretty_print<T: Display + ?Sized>(node: &T) -> String {
    node.to_string()
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Renders a symbol path: `Owner.Prop`, or `Prop of Owner` when a segment
/// contains spaces.
pub fn symbol_text(symbol: &SymbolRef) -> String {
    match symbol.path.as_slice() {
        [owner, prop]
            if symbol.kind == SymbolKind::Property
                && (owner.contains(' ') || prop.contains(' ')) =>
        {
            format!("{prop} of {owner}")
        }
        path => path.join("."),
    }
}

impl Display for Determiner {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.quantifier {
            write!(f, "{} ", q.as_str())?;
        }
        if let Some(a) = self.article {
            write!(f, "{} ", a.as_str())?;
        }
        Ok(())
    }
}

impl Display for TextLiteral {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.quoted {
            write!(f, "\"{}\"", self.raw)
        } else {
            f.write_str(&self.raw)
        }
    }
}

impl Display for TimeLiteral {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.det, symbol_text(&self.symbol))?;
        if let Some(class) = &self.of_type {
            write!(f, " of type {class}")?;
        }
        Ok(())
    }
}

impl Display for Operator {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical())
    }
}

impl Display for Operand {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Symbol { term } => term.fmt(f),
            Operand::Number { value, unit: Some(unit) } => write!(f, "{value} {unit}"),
            Operand::Number { value, unit: None } => f.write_str(value),
            Operand::Text { det, text } => write!(f, "{det}{text}"),
            Operand::ValueLiteral { value } => f.write_str(value),
        }
    }
}

fn write_rhs(f: &mut Formatter<'_>, op: &Operator, rhs: &Option<Operand>) -> fmt::Result {
    write!(f, " {op}")?;
    match rhs {
        Some(rhs) => write!(f, " {rhs}"),
        None => Ok(()),
    }
}

impl Display for Condition {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Condition::HasProperties { owner, source } => {
                write!(f, "{owner} has the properties")?;
                match source {
                    PropertySource::Inline { properties } => {
                        f.write_str(": ")?;
                        let n = properties.len();
                        for (i, p) in properties.iter().enumerate() {
                            if i > 0 {
                                f.write_str(if i + 1 == n { " and " } else { ", " })?;
                            }
                            f.write_str(p)?;
                        }
                        Ok(())
                    }
                    PropertySource::Document { document } => write!(f, " described in {document}"),
                }
            }
            Condition::Convention { subject, standard } => {
                write!(f, "{subject} conforms to the standard {standard}")
            }
            Condition::ClassOrPropOpElement { lhs, op, rhs } => {
                lhs.fmt(f)?;
                write_rhs(f, op, rhs)
            }
            Condition::InstanceOrPropOpValue { lhs, op, value } => write!(f, "{lhs} {op} {value}"),
            Condition::UiComponentOp { det, instance_label, component_type, op, rhs } => {
                write!(f, "{det}{instance_label} {component_type}")?;
                write_rhs(f, op, rhs)
            }
        }
    }
}

impl<T: Display> Display for Expr<T> {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom { atom } => atom.fmt(f),
            Expr::Not { inner } => write!(f, "not {inner}"),
            Expr::And { left, right } => write!(f, "{left} and {right}"),
            Expr::Or { left, right } => write!(f, "{left} or {right}"),
            Expr::Paren { inner } => write!(f, "({inner})"),
        }
    }
}

impl Display for FilledSlot {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let connector = self.connector.unwrap_or(Connector::And).as_str();
        for (i, operand) in self.operands.iter().enumerate() {
            if i > 0 {
                write!(f, " {connector} ")?;
            }
            operand.fmt(f)?;
        }
        Ok(())
    }
}

/// Keyword introducing a slot in the built-in templates.
pub fn role_keyword(role: Role) -> &'static str {
    match role {
        Role::Theme | Role::Value | Role::Instrument | Role::Beneficiary => "",
        Role::InitialLocation => "from",
        Role::Destination => "to",
        Role::Channel => "through",
        Role::Compliance => "in compliance with",
        Role::DescribedIn => "described in",
    }
}

/// Renders an action phrase using explicit slot keywords (from a lexicon
/// template) rather than the built-in defaults.
pub fn action_phrase_with<'a>(
    phrase: &ActionPhrase,
    keyword_of: impl Fn(Role) -> &'a str,
) -> String {
    let mut out = phrase.verb.clone();
    for slot in &phrase.filled_slots {
        let kw = keyword_of(slot.role);
        if kw.is_empty() {
            let _ = write!(out, " {slot}");
        } else {
            let _ = write!(out, " {kw} {slot}");
        }
    }
    out
}

impl Display for ActionPhrase {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&action_phrase_with(self, role_keyword))
    }
}

impl Display for AtomicResponse {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        self.phrase.fmt(f)?;
        if let Some(freq) = &self.frequency {
            let unit = freq.unit.singular();
            let plural = if freq.every == "1" { "" } else { "s" };
            write!(f, " every {} {unit}{plural}", freq.every)?;
        }
        Ok(())
    }
}

impl Display for Trigger {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", symbol_text(&self.actor), self.actions)
    }
}

/// Intro clause printed in front of itemized conditions.
pub const ITEMIZED_INTRO: &str = "the following conditions hold";

fn write_items<T: Display>(
    f: &mut Formatter<'_>,
    items: &[T],
    connectors: &[Connector],
) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        write!(f, "\n- {item}")?;
        if connectors.get(i) == Some(&Connector::Or) {
            f.write_str(", or")?;
        }
    }
    Ok(())
}

impl Display for PreconditionStructure {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            PreconditionStructure::Expr { expr } => expr.fmt(f),
            PreconditionStructure::Itemized { items, connectors, .. } => {
                write!(f, "{ITEMIZED_INTRO}:")?;
                write_items(f, items, connectors)?;
                f.write_str("\n")
            }
        }
    }
}

impl ConditionStructure {
    pub fn keyword(&self) -> &'static str {
        match self {
            ConditionStructure::While { .. } => "while",
            ConditionStructure::When { .. } => "when",
            ConditionStructure::Where { .. } => "where",
            ConditionStructure::If { .. } => "if",
            ConditionStructure::Temporal { direction: TemporalDirection::Before, .. } => "before",
            ConditionStructure::Temporal { direction: TemporalDirection::After, .. } => "after",
        }
    }

    pub fn is_itemized(&self) -> bool {
        matches!(self, ConditionStructure::If { pre: PreconditionStructure::Itemized { .. } })
    }

    fn write_body(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            ConditionStructure::While { states } => states.fmt(f),
            ConditionStructure::When { trigger } => trigger.fmt(f),
            ConditionStructure::Where { features } => features.fmt(f),
            ConditionStructure::If { pre } => pre.fmt(f),
            ConditionStructure::Temporal { anchor, .. } => match anchor {
                TemporalAnchor::Time { time } => time.fmt(f),
                TemporalAnchor::Trigger { trigger } => trigger.fmt(f),
            },
        }
    }
}

impl Display for ConditionStructure {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.keyword())?;
        self.write_body(f)
    }
}

impl Display for ConditionStructures {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        self.head.fmt(f)?;
        for next in &self.rest {
            write!(f, " {} {}", next.connector.as_str(), next.structure)?;
        }
        Ok(())
    }
}

impl Display for Scope {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str("for ")?;
        if let Some(q) = self.quantifier {
            write!(f, "{} ", q.as_str())?;
        }
        if let Some(a) = self.article {
            write!(f, "{} ", a.as_str())?;
        }
        write!(f, "{},", symbol_text(&self.subject))
    }
}

impl Display for Modal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self.verb {
            ModalVerb::Must => "must",
            ModalVerb::Shall => "shall",
        })?;
        if self.negated {
            f.write_str(" not")?;
        }
        Ok(())
    }
}

impl Display for SystemResponse {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            SystemResponse::Expr { expr } => expr.fmt(f),
            SystemResponse::Itemized { items, connectors } => {
                f.write_str(":")?;
                write_items(f, items, connectors)
            }
        }
    }
}

impl Display for Requirement {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if let Some(scope) = &self.scope {
            write!(out, "{scope} ")?;
        }
        if let Some(conds) = &self.conditions {
            write!(out, "{conds}")?;
            let last = conds.rest.last().map_or(&conds.head, |c| &c.structure);
            if !last.is_itemized() {
                out.push_str(", ");
            }
        }
        write!(out, "{} {}", symbol_text(&self.actor), self.modal)?;
        if !matches!(self.response, SystemResponse::Itemized { .. }) {
            out.push(' ');
        }
        write!(out, "{}", self.response)?;
        f.write_str(&capitalize(&out))
    }
}
