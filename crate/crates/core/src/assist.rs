//! Content assist: completion items and hover text for a cursor offset.
//!
//! Completions re-parse the text before the cursor and turn the parser's
//! end-of-input expectations into items.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::SymbolKind;
use crate::parser::{parse_with_trace, Expected, ParserContext};
use crate::syntax::token::{tokenize_lossy, Token, TokenKind};
use crate::syntax::{Operator, TimeUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionKind {
    Keyword,
    Verb,
    Actor,
    Class,
    Property,
    Instance,
    Element,
    UiComponent,
    Operator,
    Snippet,
}

impl CompletionKind {
    fn group(self) -> u8 {
        match self {
            CompletionKind::Keyword | CompletionKind::Operator => 0,
            CompletionKind::Verb => 2,
            CompletionKind::Snippet => 3,
            _ => 1,
        }
    }

    fn of_symbol(kind: SymbolKind) -> Self {
        match kind {
            SymbolKind::Actor => CompletionKind::Actor,
            SymbolKind::Class => CompletionKind::Class,
            SymbolKind::Property => CompletionKind::Property,
            SymbolKind::Instance => CompletionKind::Instance,
            SymbolKind::UiComponent => CompletionKind::UiComponent,
            _ => CompletionKind::Element,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionItem {
    pub label: String,
    pub insert_text: String,
    pub kind: CompletionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub sort_rank: usize,
}

#[derive(Debug, Clone)]
pub struct CompletionRequest<'a> {
    pub text: &'a str,
    pub offset: usize,
    pub ctx: &'a ParserContext,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssistError {
    #[error("offset {offset} is outside the text (length {len})")]
    OffsetOutOfBounds { offset: usize, len: usize },
    #[error("offset {0} is not on a character boundary")]
    NotCharBoundary(usize),
}

struct Candidate {
    label: String,
    kind: CompletionKind,
    detail: Option<String>,
    /// Secondary rank inside a group, e.g. lemmas before inflections.
    minor: u8,
    /// Text typed so far that the label must extend.
    typed: String,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

/// Start of the word being typed at `offset`.
fn word_start(text: &str, offset: usize) -> usize {
    let mut start = offset;
    for (i, c) in text[..offset].char_indices().rev() {
        if is_word_char(c) {
            start = i;
        } else {
            break;
        }
    }
    // A leading hyphen is a bullet or a sign, not part of a name.
    while text[start..offset].starts_with('-') {
        start += 1;
    }
    start
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Instances declared inline with `X of type C`.
pub fn local_instances(tokens: &[Token]) -> BTreeMap<String, String> {
    let mut found = BTreeMap::new();
    for (k, t) in tokens.iter().enumerate() {
        if !t.is_keyword("of type") {
            continue;
        }
        let mut a = k;
        while a > 0 && tokens[a - 1].is_word() {
            a -= 1;
        }
        let mut b = k + 1;
        while b < tokens.len() && tokens[b].is_word() {
            b += 1;
        }
        if a < k && b > k + 1 {
            let words = |r: std::ops::Range<usize>| {
                tokens[r].iter().map(|t| t.lexeme.as_str()).collect::<Vec<_>>().join(" ")
            };
            found.insert(words(a..k), words(k + 1..b));
        }
    }
    found
}

fn check_offset(text: &str, offset: usize) -> Result<(), AssistError> {
    if offset > text.len() {
        return Err(AssistError::OffsetOutOfBounds { offset, len: text.len() });
    }
    if !text.is_char_boundary(offset) {
        return Err(AssistError::NotCharBoundary(offset));
    }
    Ok(())
}

struct Harvest<'a> {
    ctx: &'a ParserContext,
    locals: BTreeMap<String, String>,
    typed: String,
    at_start: bool,
    line_start: bool,
    out: Vec<Candidate>,
}

impl Harvest<'_> {
    fn push(&mut self, label: impl Into<String>, kind: CompletionKind, detail: Option<String>, minor: u8) {
        let typed = self.typed.clone();
        self.out.push(Candidate { label: label.into(), kind, detail, minor, typed });
    }

    fn names(&self, kind: SymbolKind) -> Vec<String> {
        let mut names: Vec<String> =
            self.ctx.symbols.names(kind).into_iter().map(str::to_string).collect();
        if kind == SymbolKind::Instance {
            names.extend(self.locals.keys().cloned());
        }
        names
    }

    fn properties(&self, owner: &str) -> Vec<String> {
        let symbols = &self.ctx.symbols;
        let class = symbols
            .class_of(owner)
            .map(str::to_string)
            .or_else(|| self.locals.get(owner).cloned())
            .unwrap_or_else(|| owner.to_string());
        symbols.properties_of(&class).map(|p| p.iter().cloned().collect()).unwrap_or_default()
    }

    fn expected(&mut self, e: &Expected) {
        match e {
            Expected::Keyword(k) => {
                let label = if self.at_start { capitalize(k) } else { k.clone() };
                let kind = if Operator::from_phrase(k).is_some() {
                    CompletionKind::Operator
                } else {
                    CompletionKind::Keyword
                };
                self.push(label, kind, None, 0);
            }
            Expected::Punct(c) => {
                if self.typed.is_empty() {
                    self.push(c.to_string(), CompletionKind::Keyword, None, 1);
                }
            }
            Expected::Verb => {
                let lexicon = self.ctx.lexicon.clone();
                for (form, ids) in lexicon.verb_index() {
                    let is_lemma = lexicon
                        .lookup_verb(form)
                        .iter()
                        .any(|(_, lemma)| lemma == form);
                    let detail = Some(ids.join(", "));
                    self.push(form.clone(), CompletionKind::Verb, detail, u8::from(!is_lemma));
                }
            }
            Expected::Name { kinds, partial } if partial.is_empty() => {
                for kind in kinds {
                    for name in self.names(*kind) {
                        self.push(name, CompletionKind::of_symbol(*kind), Some(kind.as_str().into()), 0);
                    }
                }
            }
            Expected::Name { kinds, partial } => {
                // Continue a multi-word name already partly written.
                let head = format!("{} ", partial.join(" "));
                let mut names: Vec<(SymbolKind, String)> = Vec::new();
                for kind in kinds {
                    names.extend(self.names(*kind).into_iter().map(|n| (*kind, n)));
                }
                if kinds.contains(&SymbolKind::Class) {
                    // `Prop of Owner` and free UI labels may start with these words.
                    let symbols = &self.ctx.symbols;
                    for props in symbols.classes.values() {
                        names.extend(props.iter().map(|p| (SymbolKind::Property, p.clone())));
                    }
                    for t in &symbols.ui_component_types {
                        self.push(t.clone(), CompletionKind::UiComponent, None, 1);
                    }
                }
                for (kind, name) in names {
                    {
                        if name.starts_with(&head) {
                            let typed = self.typed.clone();
                            self.out.push(Candidate {
                                label: name.clone(),
                                kind: CompletionKind::of_symbol(kind),
                                detail: Some(kind.as_str().into()),
                                minor: 0,
                                typed: format!("{head}{typed}"),
                            });
                        }
                    }
                }
            }
            Expected::Property { owner } => {
                for p in self.properties(owner) {
                    self.push(p, CompletionKind::Property, Some(format!("property of {owner}")), 0);
                }
            }
            Expected::Text => self.push("\"text\"", CompletionKind::Snippet, None, 0),
            Expected::Number => self.push("1", CompletionKind::Snippet, None, 0),
            Expected::Value => self.push("Value", CompletionKind::Snippet, None, 0),
            Expected::Unit => self.push("Unit", CompletionKind::Snippet, None, 0),
            Expected::Time => self.push("1h00", CompletionKind::Snippet, None, 0),
            Expected::TimeUnit => {
                for unit in TimeUnit::ALL {
                    self.push(format!("{}s", unit.singular()), CompletionKind::Keyword, None, 0);
                }
            }
            Expected::UiType => {
                let types: Vec<String> = self.ctx.symbols.ui_component_types.iter().cloned().collect();
                for t in types {
                    self.push(t, CompletionKind::UiComponent, None, 0);
                }
            }
            Expected::Bullet => {
                if self.typed.is_empty() {
                    let label = if self.line_start { "- " } else { "\n- " };
                    self.push(label, CompletionKind::Snippet, None, 1);
                }
            }
            Expected::End => {}
        }
    }
}

/// Completion items for the cursor position, ranked.
pub fn complete(req: &CompletionRequest<'_>) -> Result<Vec<CompletionItem>, AssistError> {
    let text = req.text;
    check_offset(text, req.offset)?;
    let start = word_start(text, req.offset);
    let typed = &text[start..req.offset];
    let before = &text[..start];
    let (tokens, _) = tokenize_lossy(text);
    let mut h = Harvest {
        ctx: req.ctx,
        locals: local_instances(&tokens),
        typed: typed.to_string(),
        at_start: before.trim().is_empty(),
        line_start: before.is_empty() || before.ends_with('\n'),
        out: Vec::new(),
    };

    // Inside an unterminated quote only the closing quote makes progress.
    let line = &text[text[..req.offset].rfind('\n').map_or(0, |i| i + 1)..req.offset];
    if line.matches('"').count() % 2 == 1 {
        h.typed.clear();
        h.push("\"", CompletionKind::Snippet, Some("close quote".into()), 0);
        return Ok(rank(h.out));
    }

    // `Owner.` directly after a known class or instance offers its properties only.
    if let Some(owner_text) = before.strip_suffix('.') {
        let owner_start = word_start(owner_text, owner_text.len());
        let owner = &owner_text[owner_start..];
        let known = req.ctx.symbols.classes.contains_key(owner)
            || req.ctx.symbols.instances.contains_key(owner)
            || h.locals.contains_key(owner);
        if !owner.is_empty() && known {
            h.expected(&Expected::Property { owner: owner.to_string() });
            return Ok(rank(h.out));
        }
    }

    let (_, trace) = parse_with_trace(before, req.ctx);
    for e in &trace.at_end {
        h.expected(e);
    }
    if !typed.is_empty() {
        // Punctuation that may directly follow the word being typed.
        let (_, full) = parse_with_trace(&text[..req.offset], req.ctx);
        h.typed.clear();
        for e in full.at_end.iter().filter(|e| matches!(e, Expected::Punct(_))) {
            h.expected(e);
        }
        h.typed = typed.to_string();
    }
    if trace.at_end.contains(&Expected::Punct(':')) && typed.is_empty() {
        h.push(":\n- \n- ", CompletionKind::Snippet, Some("itemized list".into()), 2);
    }
    let ends_with_if = tokens_before(before).last().is_some_and(|t| t.is_keyword("if"));
    if ends_with_if {
        h.push(
            format!("{}:\n- \n- ", crate::syntax::print::ITEMIZED_INTRO),
            CompletionKind::Snippet,
            Some("itemized conditions".into()),
            2,
        );
    }
    Ok(rank(h.out))
}

fn tokens_before(text: &str) -> Vec<Token> {
    let (tokens, _) = tokenize_lossy(text);
    tokens
        .into_iter()
        .filter(|t| !matches!(t.kind, TokenKind::Newline | TokenKind::Eof))
        .collect()
}

fn rank(candidates: Vec<Candidate>) -> Vec<CompletionItem> {
    let mut seen = BTreeSet::new();
    let mut items: Vec<(u8, u8, CompletionItem)> = Vec::new();
    for c in candidates {
        let typed_lower = c.typed.to_lowercase();
        let label_lower = c.label.to_lowercase();
        if !label_lower.starts_with(&typed_lower) || label_lower == typed_lower {
            continue;
        }
        let insert_text = c.label[c.typed.len()..].to_string();
        if insert_text.is_empty() || !seen.insert((c.label.clone(), insert_text.clone())) {
            continue;
        }
        let item = CompletionItem { label: c.label, insert_text, kind: c.kind, detail: c.detail, sort_rank: 0 };
        items.push((c.kind.group(), c.minor, item));
    }
    items.sort_by(|a, b| (a.0, a.1, &a.2.label).cmp(&(b.0, b.1, &b.2.label)));
    items
        .into_iter()
        .enumerate()
        .map(|(i, (_, _, item))| CompletionItem { sort_rank: i, ..item })
        .collect()
}

fn describe_symbol(
    name: &str,
    ctx: &ParserContext,
    locals: &BTreeMap<String, String>,
) -> Option<String> {
    let symbols = &ctx.symbols;
    if symbols.actors.contains(name) {
        return Some(format!("actor {name}"));
    }
    if let Some(props) = symbols.classes.get(name) {
        let props: Vec<&str> = props.iter().map(String::as_str).collect();
        return Some(if props.is_empty() {
            format!("class {name}")
        } else {
            format!("class {name} with properties: {}", props.join(", "))
        });
    }
    if let Some(class) = symbols.instances.get(name).or_else(|| locals.get(name)) {
        return Some(format!("instance of {class}"));
    }
    if symbols.elements.contains(name) {
        return Some(format!("element {name}"));
    }
    if symbols.is_ui_component_type(name) {
        return Some(format!("UI component type {name}"));
    }
    None
}

/// Hover text for the token under `offset`: verb codes, or a symbol's kind
/// and declaration.
pub fn hover(text: &str, offset: usize, ctx: &ParserContext) -> Option<String> {
    check_offset(text, offset).ok()?;
    let (tokens, _) = tokenize_lossy(text);
    let t = tokens.iter().position(|t| {
        t.kind != TokenKind::Eof && t.span.start <= offset && offset < t.span.end
    })?;
    let tok = &tokens[t];
    let locals = local_instances(&tokens);
    if tok.is_word() {
        // Property after a dot.
        if t >= 2 && tokens[t - 1].is_punct('.') && tokens[t - 2].is_word() {
            let owner = &tokens[t - 2].lexeme;
            return Some(format!("property {} of {owner}", tok.lexeme));
        }
        // Longest run of words around the token that names a symbol.
        let mut a = t;
        while a > 0 && tokens[a - 1].is_word() {
            a -= 1;
        }
        let mut b = t + 1;
        while b < tokens.len() && tokens[b].is_word() {
            b += 1;
        }
        let mut spans: Vec<(usize, usize)> = Vec::new();
        for i in a..=t {
            for j in t + 1..=b {
                spans.push((i, j));
            }
        }
        spans.sort_by_key(|(i, j)| std::cmp::Reverse(j - i));
        for (i, j) in spans {
            let name = tokens[i..j].iter().map(|t| t.lexeme.as_str()).collect::<Vec<_>>().join(" ");
            if let Some(d) = describe_symbol(&name, ctx, &locals) {
                return Some(d);
            }
        }
        let codes = ctx.lexicon.lookup_verb(&tok.lexeme);
        if !codes.is_empty() {
            let parts: Vec<String> = codes
                .iter()
                .filter_map(|(id, _)| ctx.lexicon.code(id).map(|c| c.to_string()))
                .collect();
            return Some(parts.join("; "));
        }
    }
    None
}
