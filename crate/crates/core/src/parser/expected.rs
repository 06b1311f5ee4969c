use std::fmt;

use crate::model::SymbolKind;

/// Something the grammar would accept at a given token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expected {
    /// A keyword phrase, lowercase and single-spaced.
    Keyword(String),
    Punct(char),
    Verb,
    /// A name of one of `kinds`; `partial` holds the words of a multi-word
    /// name already read.
    Name { kinds: Vec<SymbolKind>, partial: Vec<String> },
    Property { owner: String },
    Text,
    Number,
    /// Unit word after a number.
    Unit,
    Value,
    Time,
    TimeUnit,
    UiType,
    Bullet,
    End,
}

impl Expected {
    pub fn name(kinds: &[SymbolKind]) -> Self {
        Expected::Name { kinds: kinds.to_vec(), partial: Vec::new() }
    }

    /// Continuations of an already started name are left out of messages.
    pub fn is_continuation(&self) -> bool {
        matches!(self, Expected::Name { partial, .. } if !partial.is_empty())
    }
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Keyword(k) => write!(f, "`{k}`"),
            Expected::Punct(c) => write!(f, "`{c}`"),
            Expected::Verb => f.write_str("verb"),
            Expected::Name { kinds, .. } => {
                let names: Vec<_> = kinds.iter().map(|k| k.as_str()).collect();
                write!(f, "{} name", names.join("/"))
            }
            Expected::Property { owner } => write!(f, "property of {owner}"),
            Expected::Text => f.write_str("text"),
            Expected::Number => f.write_str("number"),
            Expected::Unit => f.write_str("unit"),
            Expected::Value => f.write_str("value"),
            Expected::Time => f.write_str("time such as 1h00"),
            Expected::TimeUnit => f.write_str("time unit"),
            Expected::UiType => f.write_str("UI component type"),
            Expected::Bullet => f.write_str("`-` item"),
            Expected::End => f.write_str("end of requirement"),
        }
    }
}
