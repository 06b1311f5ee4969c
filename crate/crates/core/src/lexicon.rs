//! Verb-code registry.
//!
//! A [`Lexicon`] maps verb codes (VerbNet classes such as `send-11.1`, or
//! project-specific codes such as `validate`) to their member verbs and to the
//! slot template that shapes the action phrases built from those verbs.
//! Lexicons are loaded from a JSON document; the default one ships with the
//! repository in `lexicon/default.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_LEXICON: &str = include_str!("../../../lexicon/default.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("malformed lexicon document at line {line}, column {column}: {message}")]
    Format {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate verb code `{0}`")]
    Conflict(String),
    #[error("invalid verb code `{id}`: {message}")]
    Validation { id: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Verbnet,
    Proposed,
}

/// Semantic role filled by an action-phrase complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Theme,
    InitialLocation,
    Destination,
    Channel,
    Compliance,
    DescribedIn,
    Value,
    Instrument,
    Beneficiary,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Theme => "theme",
            Role::InitialLocation => "initial_location",
            Role::Destination => "destination",
            Role::Channel => "channel",
            Role::Compliance => "compliance",
            Role::DescribedIn => "described_in",
            Role::Value => "value",
            Role::Instrument => "instrument",
            Role::Beneficiary => "beneficiary",
        }
    }
}

/// Category of operand a slot accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperandKind {
    Actor,
    Class,
    Property,
    Instance,
    Element,
    Text,
    Number,
    Value,
}

impl OperandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OperandKind::Actor => "actor",
            OperandKind::Class => "class",
            OperandKind::Property => "property",
            OperandKind::Instance => "instance",
            OperandKind::Element => "element",
            OperandKind::Text => "text",
            OperandKind::Number => "number",
            OperandKind::Value => "value",
        }
    }
}

impl FromStr for OperandKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown operand kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbMember {
    pub lemma: String,
    pub surface_forms: BTreeSet<String>,
    /// Member kept for compatibility but not confirmed by the coding tables.
    pub provisional: bool,
}

impl VerbMember {
    /// Member whose surface forms come from the regular conjugation rule.
    pub fn regular(lemma: &str) -> Self {
        let lemma = lemma.to_lowercase();
        VerbMember {
            surface_forms: conjugate(&lemma),
            lemma,
            provisional: false,
        }
    }
}

/// Regular English inflection: lemma, third-person singular and past form.
/// Consonant doubling and irregular verbs are not modeled; the lexicon file
/// can list explicit forms for those.
pub fn conjugate(lemma: &str) -> BTreeSet<String> {
    let lemma = lemma.to_lowercase();
    let mut forms = BTreeSet::new();
    forms.insert(lemma.clone());
    if lemma.is_empty() {
        return forms;
    }
    let consonant_y = lemma.len() >= 2
        && lemma.ends_with('y')
        && !matches!(lemma.as_bytes()[lemma.len() - 2], b'a' | b'e' | b'i' | b'o' | b'u');
    let stem = &lemma[..lemma.len() - 1];
    let third = if consonant_y {
        format!("{stem}ies")
    } else if ["s", "x", "z", "ch", "sh", "o"].iter().any(|e| lemma.ends_with(e)) {
        format!("{lemma}es")
    } else {
        format!("{lemma}s")
    };
    let past = if consonant_y {
        format!("{stem}ied")
    } else if lemma.ends_with('e') {
        format!("{lemma}d")
    } else {
        format!("{lemma}ed")
    };
    forms.insert(third);
    forms.insert(past);
    forms
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub role: Role,
    /// Lowercase, single-spaced introducing keyword; empty for the direct object.
    pub keyword: String,
    #[serde(rename = "operands")]
    pub operand_kinds: BTreeSet<OperandKind>,
    #[serde(default)]
    pub optional: bool,
    #[serde(default)]
    pub repeatable: bool,
}

impl Slot {
    pub fn keyword_words(&self) -> Vec<&str> {
        self.keyword.split_whitespace().collect()
    }

    /// Kind assigned to a name that cannot be resolved against the model.
    pub fn default_kind(&self) -> Option<OperandKind> {
        self.operand_kinds
            .iter()
            .copied()
            .find(|k| !matches!(k, OperandKind::Text | OperandKind::Number | OperandKind::Value))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlotTemplate {
    pub slots: Vec<Slot>,
}

impl SlotTemplate {
    fn validate(&self) -> Result<(), String> {
        let mut roles = BTreeSet::new();
        for (i, slot) in self.slots.iter().enumerate() {
            if !roles.insert(slot.role) {
                return Err(format!("role `{}` appears twice", slot.role.as_str()));
            }
            if slot.keyword.is_empty() && i != 0 {
                return Err(format!(
                    "slot `{}` has no keyword but is not the first slot",
                    slot.role.as_str()
                ));
            }
            if slot.operand_kinds.is_empty() {
                return Err(format!("slot `{}` accepts no operands", slot.role.as_str()));
            }
        }
        Ok(())
    }

    pub fn get(&self, role: Role) -> Option<&Slot> {
        self.slots.iter().find(|s| s.role == role)
    }

    /// The keyword-less leading slot, if the template has one.
    pub fn direct_object(&self) -> Option<&Slot> {
        self.slots.first().filter(|s| s.keyword.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbCode {
    pub id: String,
    pub origin: Origin,
    pub members: Vec<VerbMember>,
    pub slot_template: SlotTemplate,
}

impl VerbCode {
    pub fn member_for(&self, word: &str) -> Option<&VerbMember> {
        let word = word.to_lowercase();
        self.members.iter().find(|m| m.surface_forms.contains(&word))
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|m| m.lemma.as_str())
    }
}

/// True when `id` ends in a VerbNet hierarchy level such as `-13.5.2` or `-22.1-2-1`.
pub fn has_hierarchy_suffix(id: &str) -> bool {
    let Some(dash) = id.find(|c: char| c == '-') else {
        return false;
    };
    let suffix = &id[dash + 1..];
    let mut parts = suffix.split('-');
    let Some(first) = parts.next() else {
        return false;
    };
    let dotted_ok = !first.is_empty()
        && first
            .split('.')
            .all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()));
    dotted_ok && parts.all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    codes: BTreeMap<String, VerbCode>,
    verb_index: BTreeMap<String, Vec<String>>,
}

impl Lexicon {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The shipped 48-code lexicon.
    pub fn default_lexicon() -> Self {
        load_lexicon(DEFAULT_LEXICON).expect("shipped lexicon is valid")
    }

    /// Builds a lexicon from already-validated codes.
    pub fn from_codes(codes: impl IntoIterator<Item = VerbCode>) -> Result<Self, LexiconError> {
        let mut map = BTreeMap::new();
        for code in codes {
            validate_code(&code)?;
            if map.contains_key(&code.id) {
                return Err(LexiconError::Conflict(code.id));
            }
            map.insert(code.id.clone(), code);
        }
        Ok(Self::with_codes(map))
    }

    fn with_codes(codes: BTreeMap<String, VerbCode>) -> Self {
        let mut verb_index: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for code in codes.values() {
            for member in &code.members {
                for form in &member.surface_forms {
                    let ids = verb_index.entry(form.clone()).or_default();
                    if !ids.contains(&code.id) {
                        ids.push(code.id.clone());
                    }
                }
            }
        }
        Lexicon { codes, verb_index }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code(&self, id: &str) -> Option<&VerbCode> {
        self.codes.get(id)
    }

    pub fn codes(&self) -> impl Iterator<Item = &VerbCode> {
        self.codes.values()
    }

    pub fn verb_index(&self) -> &BTreeMap<String, Vec<String>> {
        &self.verb_index
    }

    pub fn is_verb(&self, word: &str) -> bool {
        self.verb_index.contains_key(&word.to_lowercase())
    }

    /// Codes containing `word` as a surface form, as `(code id, lemma)` pairs.
    /// An empty result means the verb is unknown.
    pub fn lookup_verb(&self, word: &str) -> Vec<(String, String)> {
        let word = word.to_lowercase();
        let Some(ids) = self.verb_index.get(&word) else {
            return Vec::new();
        };
        ids.iter()
            .filter_map(|id| {
                let code = self.codes.get(id)?;
                let member = code.member_for(&word)?;
                Some((id.clone(), member.lemma.clone()))
            })
            .collect()
    }

    /// Overlay codes replace the slot template of matching codes and add
    /// their members; unknown overlay codes are added as-is.
    pub fn merge(&self, overlay: &Lexicon) -> Lexicon {
        let mut codes = self.codes.clone();
        for (id, extra) in &overlay.codes {
            match codes.get_mut(id) {
                Some(code) => {
                    code.slot_template = extra.slot_template.clone();
                    for member in &extra.members {
                        match code.members.iter_mut().find(|m| m.lemma == member.lemma) {
                            Some(existing) => {
                                existing
                                    .surface_forms
                                    .extend(member.surface_forms.iter().cloned());
                                existing.provisional &= member.provisional;
                            }
                            None => code.members.push(member.clone()),
                        }
                    }
                }
                None => {
                    codes.insert(id.clone(), extra.clone());
                }
            }
        }
        Lexicon::with_codes(codes)
    }

    pub fn to_document(&self) -> LexiconDocument {
        LexiconDocument {
            default_slots: None,
            codes: self
                .codes
                .values()
                .map(|c| CodeDocument {
                    id: c.id.clone(),
                    origin: Some(c.origin),
                    members: c
                        .members
                        .iter()
                        .map(|m| MemberDocument {
                            lemma: m.lemma.clone(),
                            forms: Some(m.surface_forms.iter().cloned().collect()),
                            provisional: m.provisional,
                        })
                        .collect(),
                    slots: Some(c.slot_template.slots.clone()),
                })
                .collect(),
        }
    }
}

pub fn merge_lexicons(base: &Lexicon, overlay: &Lexicon) -> Lexicon {
    base.merge(overlay)
}

fn validate_code(code: &VerbCode) -> Result<(), LexiconError> {
    let invalid = |message: String| LexiconError::Validation {
        id: code.id.clone(),
        message,
    };
    if code.id.trim().is_empty() {
        return Err(invalid("empty code id".into()));
    }
    if code.members.is_empty() {
        return Err(invalid("member list is empty".into()));
    }
    for m in &code.members {
        if !m.surface_forms.contains(&m.lemma) {
            return Err(invalid(format!("forms of `{}` do not include the lemma", m.lemma)));
        }
        if m.surface_forms.iter().any(|f| f.is_empty() || f.chars().any(|c| c.is_uppercase())) {
            return Err(invalid(format!("forms of `{}` must be lowercase words", m.lemma)));
        }
    }
    let expected = if has_hierarchy_suffix(&code.id) {
        Origin::Verbnet
    } else {
        Origin::Proposed
    };
    if code.origin != expected {
        return Err(invalid(format!(
            "origin must be `{}` for this id",
            if expected == Origin::Verbnet { "verbnet" } else { "proposed" }
        )));
    }
    code.slot_template.validate().map_err(invalid)
}

/// On-disk lexicon format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconDocument {
    /// Template applied to codes that do not list their own slots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_slots: Option<Vec<Slot>>,
    #[serde(default)]
    pub codes: Vec<CodeDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDocument {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
    #[serde(default)]
    pub members: Vec<MemberDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<Vec<Slot>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberDocument {
    pub lemma: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forms: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub provisional: bool,
}

/// Built-in template used when a document supplies neither per-code slots
/// nor `default_slots`: a mandatory theme plus optional from/to/through and
/// compliance complements.
pub fn builtin_default_template() -> SlotTemplate {
    use OperandKind::*;
    let located: BTreeSet<_> = [Element, Actor, Class, Instance].into();
    let slot = |role, keyword: &str, kinds: BTreeSet<OperandKind>, optional, repeatable| Slot {
        role,
        keyword: keyword.to_string(),
        operand_kinds: kinds,
        optional,
        repeatable,
    };
    SlotTemplate {
        slots: vec![
            slot(Role::Theme, "", [Element, Class, Instance, Property, Text].into(), false, false),
            slot(Role::InitialLocation, "from", located.clone(), true, true),
            slot(Role::Destination, "to", located, true, true),
            slot(Role::Channel, "through", [Actor].into(), true, true),
            slot(Role::Compliance, "in compliance with", [Text].into(), true, false),
        ],
    }
}

fn normalize_keyword(k: &str) -> String {
    k.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn normalize_slots(slots: &[Slot]) -> SlotTemplate {
    SlotTemplate {
        slots: slots
            .iter()
            .map(|s| Slot {
                keyword: normalize_keyword(&s.keyword),
                ..s.clone()
            })
            .collect(),
    }
}

/// Parses a lexicon document and checks every invariant.
pub fn load_lexicon(source: &str) -> Result<Lexicon, LexiconError> {
    let doc: LexiconDocument = serde_json::from_str(source).map_err(|e| LexiconError::Format {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    lexicon_from_document(&doc)
}

pub fn lexicon_from_document(doc: &LexiconDocument) -> Result<Lexicon, LexiconError> {
    let default_template = doc
        .default_slots
        .as_deref()
        .map(normalize_slots)
        .unwrap_or_else(builtin_default_template);
    let mut codes = Vec::with_capacity(doc.codes.len());
    for c in &doc.codes {
        let members = c
            .members
            .iter()
            .map(|m| {
                let lemma = m.lemma.trim().to_lowercase();
                let surface_forms = match &m.forms {
                    Some(forms) => forms.iter().map(|f| f.trim().to_lowercase()).collect(),
                    None => conjugate(&lemma),
                };
                VerbMember {
                    lemma,
                    surface_forms,
                    provisional: m.provisional,
                }
            })
            .collect();
        let origin = c.origin.unwrap_or(if has_hierarchy_suffix(&c.id) {
            Origin::Verbnet
        } else {
            Origin::Proposed
        });
        codes.push(VerbCode {
            id: c.id.trim().to_string(),
            origin,
            members,
            slot_template: c
                .slots
                .as_deref()
                .map(normalize_slots)
                .unwrap_or_else(|| default_template.clone()),
        });
    }
    Lexicon::from_codes(codes)
}

impl fmt::Display for VerbCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} — members: {}", self.id, self.lemmas().collect::<Vec<_>>().join(", "))
    }
}
