use std::collections::{BTreeMap, BTreeSet};

use crate::lexicon::{OperandKind, Slot, VerbCode};
use crate::model::{SymbolKind, SymbolRef};
use crate::span::Span;
use crate::syntax::token::{tokenize_lossy, LexError, Token, TokenKind};
use crate::syntax::*;

use super::{
    Diagnostic, DiagnosticCause, DiagnosticCode, Expected, FragmentResult, ParseResult,
    ParseTrace, ParserContext, Severity,
};

#[derive(Debug)]
pub(crate) struct Fail;

type PResult<T> = Result<T, Fail>;

pub(crate) const STRUCTURE_KEYWORDS: [&str; 6] = ["while", "when", "where", "if", "before", "after"];
const QUANTIFIERS: [&str; 4] = ["all", "none", "only one", "any"];
const ARTICLES: [&str; 3] = ["a", "an", "the"];

#[derive(Clone)]
struct Snapshot {
    pos: usize,
    prev: Span,
    bindings: BTreeMap<String, String>,
}

struct FailState {
    furthest: usize,
    expected: BTreeSet<Expected>,
    cause1_at: Option<usize>,
    custom: Option<(usize, String)>,
}

/// A run of words on one line.
struct Group {
    words: Vec<String>,
    span: Span,
    idxs: Vec<usize>,
}

impl Group {
    fn name(&self) -> String {
        self.words.join(" ")
    }
}

struct RawTerm {
    det: Determiner,
    group: Group,
    path: Vec<String>,
    of_type: Option<String>,
    span: Span,
}

impl RawTerm {
    fn single_word(&self) -> Option<&str> {
        (self.path.len() == 1 && self.of_type.is_none() && self.group.words.len() == 1)
            .then(|| self.group.words[0].as_str())
    }
}

pub(crate) struct Parser<'a> {
    ctx: &'a ParserContext,
    text: &'a str,
    toks: Vec<Token>,
    pos: usize,
    prev: Span,
    first: usize,
    furthest: usize,
    expected: BTreeSet<Expected>,
    cause1_at: Option<usize>,
    custom: Option<(usize, String)>,
    record_end: bool,
    at_end: BTreeSet<Expected>,
    bindings: BTreeMap<String, String>,
    text_stops: Vec<String>,
    in_structure: bool,
    whole_requirement: bool,
    anchored: bool,
}

fn is_time(word: &str) -> bool {
    let Some((h, m)) = word.split_once(['h', 'H']) else {
        return false;
    };
    (1..=2).contains(&h.len())
        && h.bytes().all(|b| b.is_ascii_digit())
        && m.len() == 2
        && m.bytes().all(|b| b.is_ascii_digit())
}

fn is_zone(word: &str) -> bool {
    (2..=5).contains(&word.len()) && word.bytes().all(|b| b.is_ascii_uppercase())
}

fn symbol_kind(kind: OperandKind) -> Option<SymbolKind> {
    Some(match kind {
        OperandKind::Actor => SymbolKind::Actor,
        OperandKind::Class => SymbolKind::Class,
        OperandKind::Property => SymbolKind::Property,
        OperandKind::Instance => SymbolKind::Instance,
        OperandKind::Element => SymbolKind::Element,
        _ => return None,
    })
}

fn operand_kind(kind: SymbolKind) -> Option<OperandKind> {
    Some(match kind {
        SymbolKind::Actor => OperandKind::Actor,
        SymbolKind::Class => OperandKind::Class,
        SymbolKind::Property => OperandKind::Property,
        SymbolKind::Instance => OperandKind::Instance,
        SymbolKind::Element => OperandKind::Element,
        _ => return None,
    })
}

fn describe(tok: &Token) -> String {
    match tok.kind {
        TokenKind::Eof => "end of input".to_string(),
        TokenKind::QuotedText => format!("text \"{}\"", tok.lexeme),
        TokenKind::Bullet => "`-` item".to_string(),
        _ => format!("`{}`", tok.lexeme),
    }
}

fn join_alternatives(items: &[String]) -> String {
    match items {
        [] => "more input".to_string(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} or {last}", init.join(", ")),
    }
}

impl<'a> Parser<'a> {
    fn new(ctx: &'a ParserContext, text: &'a str, toks: Vec<Token>) -> Self {
        let first = toks.iter().position(|t| t.kind != TokenKind::Newline).unwrap_or(0);
        Parser {
            ctx,
            text,
            toks,
            pos: 0,
            prev: Span::default(),
            first,
            furthest: first,
            expected: BTreeSet::new(),
            cause1_at: None,
            custom: None,
            record_end: false,
            at_end: BTreeSet::new(),
            bindings: BTreeMap::new(),
            text_stops: Vec::new(),
            in_structure: false,
            whole_requirement: false,
            anchored: false,
        }
    }

    // ---- token access ----

    fn skip_newlines(&self, mut i: usize) -> usize {
        while self.toks[i].kind == TokenKind::Newline {
            i += 1;
        }
        i
    }

    fn idx(&self) -> usize {
        self.skip_newlines(self.pos)
    }

    fn cur(&self) -> &Token {
        &self.toks[self.idx()]
    }

    /// Index of the `n`th significant token from the current one.
    fn nth_idx(&self, n: usize) -> usize {
        let mut i = self.idx();
        for _ in 0..n {
            if self.toks[i].kind == TokenKind::Eof {
                break;
            }
            i = self.skip_newlines(i + 1);
        }
        i
    }

    fn nth(&self, n: usize) -> &Token {
        &self.toks[self.nth_idx(n)]
    }

    fn bump(&mut self) -> Token {
        let i = self.idx();
        let tok = self.toks[i].clone();
        if tok.kind != TokenKind::Eof {
            self.pos = i + 1;
            self.prev = tok.span;
        }
        tok
    }

    fn save(&self) -> Snapshot {
        Snapshot { pos: self.pos, prev: self.prev, bindings: self.bindings.clone() }
    }

    fn restore(&mut self, s: Snapshot) {
        self.pos = s.pos;
        self.prev = s.prev;
        self.bindings = s.bindings;
    }

    fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let snap = self.save();
        match f(self) {
            Ok(v) => Some(v),
            Err(Fail) => {
                self.restore(snap);
                None
            }
        }
    }

    // ---- expectation tracking ----

    fn expect_at(&mut self, i: usize, e: Expected) {
        if self.record_end && self.toks[i].kind == TokenKind::Eof {
            self.at_end.insert(e.clone());
        }
        // Name continuations are completion hints only; they never move the
        // failure point.
        if i > self.furthest && !e.is_continuation() {
            self.reset_tracking(i);
        }
        if i == self.furthest {
            self.expected.insert(e);
        }
    }

    fn expect(&mut self, e: Expected) {
        let i = self.idx();
        self.expect_at(i, e);
    }

    fn expect_kw(&mut self, kw: &str) {
        self.expect(Expected::Keyword(kw.to_string()));
    }

    fn fail_with(&mut self, i: usize, e: Expected, message: String) -> Fail {
        self.expect_at(i, e);
        if i == self.furthest {
            self.custom = Some((i, message));
        }
        Fail
    }

    fn mark_cause1(&mut self, i: usize) {
        if i == self.furthest {
            self.cause1_at = Some(i);
        }
    }

    fn reset_tracking(&mut self, i: usize) {
        self.furthest = i;
        self.expected.clear();
        self.cause1_at = None;
        self.custom = None;
    }

    fn take_fail_state(&mut self) -> FailState {
        FailState {
            furthest: self.furthest,
            expected: std::mem::take(&mut self.expected),
            cause1_at: self.cause1_at.take(),
            custom: self.custom.take(),
        }
    }

    fn put_fail_state(&mut self, s: FailState) {
        self.furthest = s.furthest;
        self.expected = s.expected;
        self.cause1_at = s.cause1_at;
        self.custom = s.custom;
    }

    // ---- small matchers ----

    fn peek_kw(&self, kw: &str) -> bool {
        self.cur().is_keyword(kw)
    }

    fn peek_punct(&self, c: char) -> bool {
        self.cur().is_punct(c)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.peek_kw(kw) {
            self.bump();
            true
        } else {
            self.expect_kw(kw);
            false
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek_punct(c) {
            self.bump();
            true
        } else {
            self.expect(Expected::Punct(c));
            false
        }
    }

    /// Number of tokens from `start` whose normalized text spells `phrase`.
    fn phrase_len_at(&self, start: usize, phrase: &str) -> Option<usize> {
        let mut acc = String::new();
        let mut i = start;
        while acc.len() < phrase.len() {
            let t = &self.toks[i];
            if !matches!(t.kind, TokenKind::Word | TokenKind::Keyword) {
                return None;
            }
            if !acc.is_empty() {
                acc.push(' ');
            }
            acc.push_str(&t.norm());
            i += 1;
        }
        (acc == phrase).then_some(i - start)
    }

    fn eat_phrase(&mut self, phrase: &str) -> bool {
        let i = self.idx();
        match self.phrase_len_at(i, phrase) {
            Some(n) => {
                for _ in 0..n {
                    self.bump();
                }
                true
            }
            None => {
                self.expect_kw(phrase);
                false
            }
        }
    }

    fn is_lower_verb(&self, tok: &Token) -> bool {
        tok.is_word()
            && tok.lexeme.chars().next().is_some_and(char::is_lowercase)
            && self.ctx.lexicon.is_verb(&tok.lexeme)
    }

    fn is_determiner(tok: &Token) -> bool {
        tok.kind == TokenKind::Keyword
            && (QUANTIFIERS.contains(&tok.norm().as_str()) || ARTICLES.contains(&tok.norm().as_str()))
    }

    fn stops_word(&self, j: usize) -> bool {
        self.text_stops.iter().any(|s| self.phrase_len_at(j, s).is_some())
    }

    // ---- names ----

    fn word_group(&mut self, start: Expected, stop_at_verbs: bool) -> PResult<Group> {
        let i = self.idx();
        let t = &self.toks[i];
        if !t.is_word() || (stop_at_verbs && self.is_lower_verb(t)) || self.stops_word(i) {
            self.expect_at(i, start);
            return Err(Fail);
        }
        let t = self.bump();
        let mut group = Group { words: vec![t.lexeme], span: t.span, idxs: vec![i] };
        loop {
            let j = self.pos;
            let t = &self.toks[j];
            if t.is_word() && !(stop_at_verbs && self.is_lower_verb(t)) && !self.stops_word(j) {
                let t = self.bump();
                group.words.push(t.lexeme);
                group.span = group.span.to(t.span);
                group.idxs.push(j);
            } else {
                if t.kind != TokenKind::Newline {
                    if let Expected::Name { kinds, .. } = &start {
                        let e = Expected::Name { kinds: kinds.clone(), partial: group.words.clone() };
                        self.expect_at(j, e);
                    }
                }
                return Ok(group);
            }
        }
    }

    fn lookup_name(&self, name: &str) -> Option<SymbolKind> {
        let symbols = &self.ctx.symbols;
        if symbols.actors.contains(name) {
            return Some(SymbolKind::Actor);
        }
        if self.bindings.contains_key(name) {
            return Some(SymbolKind::Instance);
        }
        symbols.resolve_operand(&[name]).map(|r| r.kind)
    }

    fn property_known(&self, owner: &str, prop: &str) -> bool {
        if self.ctx.symbols.resolve_operand(&[owner, prop]).is_some() {
            return true;
        }
        self.bindings
            .get(owner)
            .and_then(|class| self.ctx.symbols.classes.get(class))
            .is_some_and(|props| props.contains(prop))
    }

    fn raw_term(&mut self, det: Determiner, kinds: &[SymbolKind]) -> PResult<RawTerm> {
        let group = self.word_group(Expected::name(kinds), false)?;
        let mut span = group.span;
        let mut path = vec![group.name()];
        let mut of_type = None;
        let dotted = self.toks[self.pos].is_punct('.') && self.toks[self.pos + 1].is_word();
        if dotted {
            self.bump();
            let owner = group.name();
            let prop = self.word_group(Expected::Property { owner: owner.clone() }, false)?;
            span = span.to(prop.span);
            path = vec![owner, prop.name()];
        } else if self.peek_kw("of type") {
            self.bump();
            let class = self.word_group(Expected::name(&[SymbolKind::Class]), false)?;
            span = span.to(class.span);
            of_type = Some(class.name());
        } else if self.peek_kw("of") {
            self.bump();
            let owner = self
                .word_group(Expected::name(&[SymbolKind::Class, SymbolKind::Instance]), false)?;
            span = span.to(owner.span);
            path = vec![owner.name(), group.name()];
        } else {
            if self.toks[self.pos].kind != TokenKind::Newline {
                self.expect(Expected::Punct('.'));
            }
            // `Owner.` at end of input may still become a property path.
            if self.toks[self.pos].is_punct('.') && self.toks[self.pos + 1].kind == TokenKind::Eof {
                let owner = group.name();
                self.expect_at(self.pos + 1, Expected::Property { owner });
            }
            self.expect_kw("of");
            self.expect_kw("of type");
        }
        Ok(RawTerm { det, group, path, of_type, span })
    }

    fn resolve(&mut self, raw: &RawTerm, fallback: SymbolKind) -> Term {
        let symbol = match (raw.path.as_slice(), &raw.of_type) {
            ([name], Some(class)) => {
                self.bindings.insert(name.clone(), class.clone());
                let known = self.ctx.symbols.classes.contains_key(class);
                SymbolRef::new(SymbolKind::Instance, vec![name.clone()], known)
            }
            ([name], None) => match self.lookup_name(name) {
                Some(kind) => SymbolRef::new(kind, vec![name.clone()], true),
                None => SymbolRef::new(fallback, vec![name.clone()], false),
            },
            ([owner, prop], _) => {
                let known = self.property_known(owner, prop);
                SymbolRef::new(SymbolKind::Property, raw.path.clone(), known)
            }
            _ => SymbolRef::new(fallback, raw.path.clone(), false),
        };
        Term {
            det: raw.det,
            symbol: SymbolRef { span: raw.span, ..symbol },
            of_type: raw.of_type.clone(),
        }
    }

    fn actor_ref(&self, group: &Group) -> SymbolRef {
        let name = group.name();
        let resolved = self.lookup_name(&name) == Some(SymbolKind::Actor);
        SymbolRef { span: group.span, ..SymbolRef::new(SymbolKind::Actor, vec![name], resolved) }
    }

    fn determiner(&mut self) -> Determiner {
        let mut det = Determiner::default();
        if let Some(q) = QUANTIFIERS.iter().find(|q| self.peek_kw(q)) {
            det.quantifier = Quantifier::from_keyword(q);
            self.bump();
        } else {
            QUANTIFIERS.iter().for_each(|q| self.expect_kw(q));
        }
        if let Some(a) = ARTICLES.iter().find(|a| self.peek_kw(a)) {
            det.article = Article::from_keyword(a);
            self.bump();
        } else {
            ARTICLES.iter().for_each(|a| self.expect_kw(a));
        }
        det
    }

    // ---- literals ----

    fn is_text_stop(&self, j: usize) -> bool {
        let t = &self.toks[j];
        match t.kind {
            TokenKind::Eof | TokenKind::Newline | TokenKind::Bullet => true,
            TokenKind::Punctuation => {
                t.is_punct(',')
                    || t.is_punct(')')
                    || (t.is_punct('.')
                        && matches!(self.toks[j + 1].kind, TokenKind::Eof | TokenKind::Newline))
            }
            TokenKind::Keyword if t.is_keyword("and") || t.is_keyword("or") => true,
            _ => self.stops_word(j),
        }
    }

    fn free_text(&mut self) -> PResult<TextLiteral> {
        if self.cur().kind == TokenKind::QuotedText {
            return Ok(TextLiteral::quoted(self.bump().lexeme));
        }
        let start = self.idx();
        if self.is_text_stop(start) {
            self.expect(Expected::Text);
            return Err(Fail);
        }
        self.pos = start;
        let begin = self.toks[start].span.start;
        let mut end = begin;
        while !self.is_text_stop(self.pos) {
            end = self.bump().span.end;
        }
        if self.toks[self.pos].kind == TokenKind::Eof {
            self.expect_at(self.pos, Expected::Text);
        }
        Ok(TextLiteral::free(&self.text[begin..end]))
    }

    fn number_operand(&mut self) -> Operand {
        let value = self.bump().lexeme;
        let t = &self.toks[self.pos];
        let unit = (t.is_word()
            && t.lexeme.chars().next().is_some_and(char::is_uppercase)
            && !self.ctx.lexicon.is_verb(&t.lexeme))
        .then(|| t.lexeme.clone());
        if unit.is_some() {
            self.bump();
        } else if t.kind != TokenKind::Newline {
            self.expect_at(self.pos, Expected::Unit);
        }
        Operand::Number { value, unit }
    }

    // ---- expressions ----

    fn connector_ahead(&mut self, kw: &str) -> bool {
        if !self.peek_kw(kw) {
            self.expect_kw(kw);
            return false;
        }
        let next = self.nth_idx(1);
        if STRUCTURE_KEYWORDS.iter().any(|s| self.toks[next].is_keyword(s)) {
            return false;
        }
        if self.in_structure {
            for s in STRUCTURE_KEYWORDS {
                self.expect_at(next, Expected::Keyword(s.to_string()));
            }
        }
        true
    }

    fn expr<T>(
        &mut self,
        allow_not: bool,
        atom: &dyn Fn(&mut Self) -> PResult<T>,
    ) -> PResult<Expr<T>> {
        let mut left = self.and_expr(allow_not, atom)?;
        while self.connector_ahead("or") {
            self.bump();
            let right = self.and_expr(allow_not, atom)?;
            left = Expr::or(left, right);
        }
        Ok(left)
    }

    fn and_expr<T>(
        &mut self,
        allow_not: bool,
        atom: &dyn Fn(&mut Self) -> PResult<T>,
    ) -> PResult<Expr<T>> {
        let mut left = self.unary(allow_not, atom)?;
        while self.connector_ahead("and") {
            self.bump();
            let right = self.unary(allow_not, atom)?;
            left = Expr::and(left, right);
        }
        Ok(left)
    }

    fn unary<T>(
        &mut self,
        allow_not: bool,
        atom: &dyn Fn(&mut Self) -> PResult<T>,
    ) -> PResult<Expr<T>> {
        if allow_not {
            if self.eat_kw("not") {
                return Ok(Expr::not(self.unary(allow_not, atom)?));
            }
        }
        if self.eat_punct('(') {
            let inner = self.expr(allow_not, atom)?;
            if !self.eat_punct(')') {
                return Err(Fail);
            }
            return Ok(Expr::paren(inner));
        }
        atom(self).map(Expr::atom)
    }

    // ---- conditions ----

    pub(crate) fn condition_expr(&mut self) -> PResult<ConditionExpr> {
        self.expr(true, &|p| p.condition())
    }

    fn operator(&mut self) -> PResult<Operator> {
        let t = self.cur();
        if t.kind == TokenKind::Keyword {
            if let Some(op) = Operator::from_phrase(&t.norm()) {
                self.bump();
                self.anchored = true;
                return Ok(op);
            }
        }
        for (phrase, _, _) in OPERATOR_FORMS {
            self.expect_kw(phrase);
        }
        Err(Fail)
    }

    fn condition(&mut self) -> PResult<Condition> {
        let det = self.determiner();
        if self.cur().kind == TokenKind::QuotedText {
            let label = self.bump().lexeme;
            let t = self.cur().clone();
            if t.is_word() && self.ctx.symbols.is_ui_component_type(&t.lexeme) {
                self.bump();
                return self.ui_rest(det, TextLiteral::quoted(label), t.lexeme);
            }
            self.expect(Expected::UiType);
            return Err(Fail);
        }
        let lhs_kinds = [SymbolKind::Class, SymbolKind::Instance, SymbolKind::Element];
        let raw = self.raw_term(det, &lhs_kinds)?;
        let words = &raw.group.words;
        let plain = raw.path.len() == 1 && raw.of_type.is_none();
        if plain
            && words.len() >= 2
            && self.ctx.symbols.is_ui_component_type(&words[words.len() - 1])
            && self.lookup_name(&raw.path[0]).is_none()
        {
            let label = words[..words.len() - 1].join(" ");
            let ty = words[words.len() - 1].clone();
            return self.ui_rest(det, TextLiteral::free(label), ty);
        }
        if self.peek_kw("has the properties") || self.peek_kw("have the properties") {
            self.bump();
            let owner = self.resolve(&raw, SymbolKind::Class);
            let source = if self.eat_punct(':') {
                PropertySource::Inline { properties: self.property_list(&owner.symbol.name())? }
            } else if self.eat_kw("described in") {
                PropertySource::Document { document: self.free_text()? }
            } else {
                return Err(Fail);
            };
            return Ok(Condition::HasProperties { owner, source });
        }
        self.expect_kw("has the properties");
        let op = self.operator()?;
        if op.kind == OperatorKind::ConformsTo {
            let text = self.free_text()?;
            let subject = self.resolve(&raw, SymbolKind::Class);
            return Ok(if op.negated {
                let rhs = Operand::Text { det: Determiner::default(), text };
                Condition::ClassOrPropOpElement { lhs: subject, op, rhs: Some(rhs) }
            } else {
                Condition::Convention { subject, standard: text }
            });
        }
        if !op.kind.is_binary() {
            let lhs = self.resolve(&raw, SymbolKind::Class);
            return Ok(Condition::ClassOrPropOpElement { lhs, op, rhs: None });
        }
        match self.rhs()? {
            Operand::ValueLiteral { value } => {
                let lhs = self.resolve(&raw, SymbolKind::Instance);
                Ok(Condition::InstanceOrPropOpValue { lhs, op, value })
            }
            rhs => {
                let lhs = self.resolve(&raw, SymbolKind::Class);
                Ok(Condition::ClassOrPropOpElement { lhs, op, rhs: Some(rhs) })
            }
        }
    }

    fn ui_rest(&mut self, det: Determiner, label: TextLiteral, ty: String) -> PResult<Condition> {
        let op = self.operator()?;
        let rhs = if op.kind.is_binary() { Some(self.rhs()?) } else { None };
        Ok(Condition::UiComponentOp { det, instance_label: label, component_type: ty, op, rhs })
    }

    fn rhs(&mut self) -> PResult<Operand> {
        let det = self.determiner();
        let t = self.cur().clone();
        match t.kind {
            TokenKind::Number if det.is_empty() => Ok(self.number_operand()),
            TokenKind::QuotedText => {
                self.bump();
                Ok(Operand::Text { det, text: TextLiteral::quoted(t.lexeme) })
            }
            TokenKind::Word => {
                let kinds = [SymbolKind::Class, SymbolKind::Instance, SymbolKind::Element];
                let raw = self.raw_term(det, &kinds)?;
                if let Some(word) = raw.single_word().filter(|_| det.is_empty()) {
                    if self.lookup_name(word).is_none() {
                        return Ok(Operand::ValueLiteral { value: word.to_string() });
                    }
                }
                Ok(Operand::Symbol { term: self.resolve(&raw, SymbolKind::Element) })
            }
            _ => {
                let kinds = [SymbolKind::Class, SymbolKind::Instance, SymbolKind::Element];
                self.expect(Expected::name(&kinds));
                self.expect(Expected::Text);
                if det.is_empty() {
                    self.expect(Expected::Number);
                    self.expect(Expected::Value);
                }
                Err(Fail)
            }
        }
    }

    fn starts_condition_tail(&self) -> bool {
        let t = self.cur();
        let kw = t.kind == TokenKind::Keyword
            && (Operator::from_phrase(&t.norm()).is_some()
                || t.is_keyword("has the properties")
                || t.is_keyword("have the properties")
                || t.is_keyword("of")
                || t.is_keyword("of type"));
        kw || (self.toks[self.pos].is_punct('.') && self.toks[self.pos + 1].is_word())
    }

    fn property_list(&mut self, owner: &str) -> PResult<Vec<String>> {
        let start = Expected::Property { owner: owner.to_string() };
        let mut props = vec![self.word_group(start.clone(), false)?.name()];
        loop {
            let comma = self.attempt(|p| {
                if !p.eat_punct(',') {
                    return Err(Fail);
                }
                let g = p.word_group(start.clone(), false)?;
                p.expect(Expected::Punct(','));
                p.expect_kw("and");
                if p.peek_punct(',') || p.peek_kw("and") {
                    Ok(g.name())
                } else {
                    Err(Fail)
                }
            });
            if let Some(name) = comma {
                props.push(name);
                continue;
            }
            let last = self.attempt(|p| {
                if !p.eat_kw("and") {
                    return Err(Fail);
                }
                let g = p.word_group(start.clone(), false)?;
                if p.starts_condition_tail() {
                    Err(Fail)
                } else {
                    Ok(g.name())
                }
            });
            if let Some(name) = last {
                props.push(name);
            }
            return Ok(props);
        }
    }

    fn itemized_ahead(&self) -> bool {
        let mut j = self.idx();
        let mut last = None;
        while !matches!(self.toks[j].kind, TokenKind::Newline | TokenKind::Eof) {
            let t = &self.toks[j];
            if t.is_punct(',') || t.is_keyword("must") || t.is_keyword("shall") {
                return false;
            }
            last = Some(j);
            j += 1;
        }
        last.is_some_and(|l| self.toks[l].is_punct(':'))
            && self.toks[j].kind == TokenKind::Newline
            && self.toks[self.skip_newlines(j)].kind == TokenKind::Bullet
    }

    fn itemized<T>(
        &mut self,
        item: &dyn Fn(&mut Self) -> PResult<T>,
    ) -> PResult<(Vec<T>, Vec<Connector>)> {
        let mut items = Vec::new();
        let mut connectors = Vec::new();
        loop {
            if self.cur().kind != TokenKind::Bullet {
                self.expect(Expected::Bullet);
                return Err(Fail);
            }
            let bullet = self.idx();
            if bullet == self.pos && self.pos > 0 && self.toks[self.pos - 1].kind != TokenKind::Newline {
                self.expect(Expected::Bullet);
                return Err(Fail);
            }
            self.bump();
            items.push(item(self)?);
            let connector = if self.peek_punct(',') && self.nth(1).is_keyword("or") {
                self.bump();
                self.bump();
                Connector::Or
            } else {
                self.expect(Expected::Punct(','));
                Connector::And
            };
            if self.cur().kind == TokenKind::Bullet {
                connectors.push(connector);
                continue;
            }
            self.expect(Expected::Bullet);
            if connector == Connector::Or || items.len() < 2 {
                return Err(Fail);
            }
            return Ok((items, connectors));
        }
    }

    fn precondition(&mut self) -> PResult<PreconditionStructure> {
        if self.itemized_ahead() {
            let start = self.cur().span;
            while !self.peek_punct(':') {
                self.bump();
            }
            let colon = self.bump().span;
            let (items, connectors) = self.itemized(&|p| p.condition_expr())?;
            return Ok(PreconditionStructure::Itemized {
                intro_span: start.to(colon),
                items,
                connectors,
            });
        }
        Ok(PreconditionStructure::Expr { expr: self.condition_expr()? })
    }

    // ---- triggers and action phrases ----

    pub(crate) fn trigger(&mut self) -> PResult<Trigger> {
        let group = self.word_group(Expected::name(&[SymbolKind::Actor]), true)?;
        let next = self.cur().clone();
        let n = group.words.len();
        if !(next.is_word() && self.ctx.lexicon.is_verb(&next.lexeme)) && n >= 2 {
            let head = group.words[..n - 1].join(" ");
            if self.lookup_name(&head) == Some(SymbolKind::Actor) {
                // The last word sits in verb position but is not in the lexicon.
                let i = group.idxs[n - 1];
                self.expect_at(i, Expected::Verb);
                self.mark_cause1(i);
                return Err(Fail);
            }
        }
        let actor = self.actor_ref(&group);
        let actions = self.expr(false, &|p| p.action_phrase(false))?;
        Ok(Trigger { actor, actions })
    }

    pub(crate) fn action_phrase(&mut self, in_response: bool) -> PResult<ActionPhrase> {
        let i = self.idx();
        let verb = self.toks[i].clone();
        let mut code_ids: Vec<String> = if verb.is_word() {
            self.ctx.lexicon.lookup_verb(&verb.lexeme).into_iter().map(|(id, _)| id).collect()
        } else {
            Vec::new()
        };
        code_ids.dedup();
        if code_ids.is_empty() {
            self.expect_at(i, Expected::Verb);
            if verb.is_word() {
                self.mark_cause1(i);
            }
            return Err(Fail);
        }
        self.bump();
        let start = self.save();
        let lexicon = &self.ctx.lexicon;
        let mut best: Option<(Snapshot, Vec<FilledSlot>, String)> = None;
        for id in code_ids {
            let code = lexicon.code(&id).expect("indexed code exists");
            self.restore(start.clone());
            if let Ok(slots) = self.slots(code, in_response) {
                if best.as_ref().is_none_or(|(s, _, _)| self.pos > s.pos) {
                    best = Some((self.save(), slots, id));
                }
            }
        }
        let Some((snap, filled_slots, code_id)) = best else {
            self.restore(start);
            return Err(Fail);
        };
        self.restore(snap);
        Ok(ActionPhrase { code_id, verb: verb.lexeme, filled_slots, span: verb.span.to(self.prev) })
    }

    fn slots(&mut self, code: &'a VerbCode, in_response: bool) -> PResult<Vec<FilledSlot>> {
        let mut stops: Vec<String> = code
            .slot_template
            .slots
            .iter()
            .filter(|s| !s.keyword.is_empty())
            .map(|s| s.keyword.clone())
            .collect();
        if in_response {
            stops.push("every".to_string());
        }
        let saved = std::mem::replace(&mut self.text_stops, stops);
        let result = self.fill_slots(&code.slot_template.slots);
        self.text_stops = saved;
        result
    }

    fn fill_slots(&mut self, template: &'a [Slot]) -> PResult<Vec<FilledSlot>> {
        let mut filled = Vec::new();
        let mut next = 0;
        if let Some(first) = template.first().filter(|s| s.keyword.is_empty()) {
            next = 1;
            if first.optional {
                if let Some(slot) = self.attempt(|p| p.operand_list(first)) {
                    filled.push(slot);
                }
            } else {
                filled.push(self.operand_list(first)?);
            }
        }
        loop {
            let hit = (next..template.len()).find(|&j| self.eat_phrase(&template[j].keyword));
            match hit {
                Some(j) => {
                    filled.push(self.operand_list(&template[j])?);
                    next = j + 1;
                }
                None => break,
            }
        }
        let missing = template
            .iter()
            .any(|slot| !slot.optional && !filled.iter().any(|f: &FilledSlot| f.role == slot.role));
        if missing {
            return Err(Fail);
        }
        Ok(filled)
    }

    /// Whether `and`/`or` at the cursor continues an operand list rather
    /// than starting a new action.
    fn list_continues(&self) -> bool {
        let next = self.nth(1);
        match next.kind {
            TokenKind::Eof | TokenKind::QuotedText | TokenKind::Number => true,
            TokenKind::Keyword => Self::is_determiner(next),
            TokenKind::Word => {
                if self.is_lower_verb(next) {
                    return false;
                }
                // `and <word> the ...` reads as an unknown verb with an object.
                let after = self.nth(2);
                !(Self::is_determiner(after)
                    || matches!(after.kind, TokenKind::QuotedText | TokenKind::Number))
            }
            _ => false,
        }
    }

    fn operand_list(&mut self, slot: &Slot) -> PResult<FilledSlot> {
        let mut operands = vec![self.operand(slot)?];
        let mut connector = None;
        while slot.repeatable {
            let c = match connector {
                Some(c) => c,
                None if self.peek_kw("and") => Connector::And,
                None if self.peek_kw("or") => Connector::Or,
                None => {
                    self.expect_kw("and");
                    self.expect_kw("or");
                    break;
                }
            };
            if !self.peek_kw(c.as_str()) {
                self.expect_kw(c.as_str());
                break;
            }
            if !self.list_continues() {
                break;
            }
            let snap = self.save();
            self.bump();
            match self.operand(slot) {
                Ok(o) => {
                    operands.push(o);
                    connector = Some(c);
                }
                Err(Fail) => {
                    self.restore(snap);
                    break;
                }
            }
        }
        Ok(FilledSlot { role: slot.role, connector, operands })
    }

    fn operand(&mut self, slot: &Slot) -> PResult<Operand> {
        let kinds = &slot.operand_kinds;
        let sym_kinds: Vec<SymbolKind> = kinds.iter().filter_map(|k| symbol_kind(*k)).collect();
        let det = self.determiner();
        let i = self.idx();
        let t = self.toks[i].clone();
        let role = slot.role.as_str();
        match t.kind {
            TokenKind::QuotedText => {
                if kinds.contains(&OperandKind::Text) {
                    self.bump();
                    return Ok(Operand::Text { det, text: TextLiteral::quoted(t.lexeme) });
                }
                let msg = format!("text cannot fill the {role} slot");
                return Err(self.fail_with(i, Expected::name(&sym_kinds), msg));
            }
            TokenKind::Number if kinds.contains(&OperandKind::Number) && det.is_empty() => {
                return Ok(self.number_operand());
            }
            TokenKind::Word if !sym_kinds.is_empty() => {
                let raw = self.raw_term(det, &sym_kinds)?;
                if kinds.contains(&OperandKind::Value) && det.is_empty() {
                    if let Some(word) = raw.single_word() {
                        if self.lookup_name(word).is_none() {
                            return Ok(Operand::ValueLiteral { value: word.to_string() });
                        }
                    }
                }
                let fallback = slot.default_kind().and_then(symbol_kind).unwrap_or(SymbolKind::Element);
                let mut term = self.resolve(&raw, fallback);
                let accepted = |k: SymbolKind| operand_kind(k).is_some_and(|o| kinds.contains(&o));
                if term.symbol.resolved && !accepted(term.symbol.kind) {
                    if term.symbol.kind == SymbolKind::Class && accepted(SymbolKind::Instance) {
                        term.symbol.kind = SymbolKind::Instance;
                    } else {
                        let msg = format!(
                            "{} `{}` cannot fill the {role} slot",
                            term.symbol.kind.as_str(),
                            term.symbol.name()
                        );
                        return Err(self.fail_with(raw.group.idxs[0], Expected::name(&sym_kinds), msg));
                    }
                }
                return Ok(Operand::Symbol { term });
            }
            _ => {}
        }
        if !sym_kinds.is_empty() {
            self.expect(Expected::name(&sym_kinds));
        }
        if kinds.contains(&OperandKind::Number) && det.is_empty() {
            self.expect(Expected::Number);
        }
        if kinds.contains(&OperandKind::Text) {
            if sym_kinds.is_empty() {
                return Ok(Operand::Text { det, text: self.free_text()? });
            }
            self.expect(Expected::Text);
        }
        Err(Fail)
    }

    // ---- requirement skeleton ----

    fn atomic_response(&mut self) -> PResult<AtomicResponse> {
        let phrase = self.action_phrase(true)?;
        if !self.eat_kw("every") {
            return Ok(AtomicResponse { phrase, frequency: None });
        }
        let i = self.idx();
        let t = self.toks[i].clone();
        if t.kind != TokenKind::Number {
            self.expect(Expected::Number);
            return Err(Fail);
        }
        if t.lexeme.parse::<f64>().map_or(true, |v| v <= 0.0) {
            let msg = "frequency must be a positive number".to_string();
            return Err(self.fail_with(i, Expected::Number, msg));
        }
        self.bump();
        let u = self.cur().clone();
        let Some(unit) = u.is_word().then(|| TimeUnit::parse(&u.lexeme)).flatten() else {
            self.expect(Expected::TimeUnit);
            return Err(Fail);
        };
        self.bump();
        Ok(AtomicResponse { phrase, frequency: Some(Frequency { every: t.lexeme, unit }) })
    }

    fn response(&mut self) -> PResult<SystemResponse> {
        if self.eat_punct(':') {
            let (items, connectors) = self.itemized(&|p| p.atomic_response())?;
            return Ok(SystemResponse::Itemized { items, connectors });
        }
        Ok(SystemResponse::Expr { expr: self.expr(false, &|p| p.atomic_response())? })
    }

    fn modal(&mut self) -> PResult<Modal> {
        let verb = if self.eat_kw("must") {
            ModalVerb::Must
        } else if self.eat_kw("shall") {
            ModalVerb::Shall
        } else {
            return Err(Fail);
        };
        Ok(Modal { verb, negated: self.eat_kw("not") })
    }

    fn scope(&mut self) -> PResult<Scope> {
        let start = self.bump().span;
        let det = self.determiner();
        let kinds = [SymbolKind::Class, SymbolKind::Element, SymbolKind::Actor, SymbolKind::Instance];
        let group = self.word_group(Expected::name(&kinds), false)?;
        let name = group.name();
        let subject = match self.lookup_name(&name) {
            Some(kind) => SymbolRef::new(kind, vec![name], true),
            None => SymbolRef::new(SymbolKind::Element, vec![name], false),
        };
        if !self.eat_punct(',') {
            return Err(Fail);
        }
        Ok(Scope {
            quantifier: det.quantifier,
            article: det.article,
            subject: SymbolRef { span: group.span, ..subject },
            span: start.to(self.prev),
        })
    }

    fn structure(&mut self) -> PResult<ConditionStructure> {
        if self.eat_kw("while") {
            return Ok(ConditionStructure::While { states: self.condition_expr()? });
        }
        if self.eat_kw("when") {
            return Ok(ConditionStructure::When { trigger: self.trigger()? });
        }
        if self.eat_kw("where") {
            return Ok(ConditionStructure::Where { features: self.free_text()? });
        }
        if self.eat_kw("if") {
            return Ok(ConditionStructure::If { pre: self.precondition()? });
        }
        let direction = if self.eat_kw("before") {
            TemporalDirection::Before
        } else if self.eat_kw("after") {
            TemporalDirection::After
        } else {
            return Err(Fail);
        };
        let t = self.cur().clone();
        if t.is_word() && is_time(&t.lexeme) {
            self.bump();
            let mut raw = t.lexeme;
            let zone = &self.toks[self.pos];
            if zone.is_word() && is_zone(&zone.lexeme) {
                raw = format!("{raw} {}", self.bump().lexeme);
            }
            let anchor = TemporalAnchor::Time { time: TimeLiteral { raw } };
            return Ok(ConditionStructure::Temporal { direction, anchor });
        }
        self.expect(Expected::Time);
        let anchor = TemporalAnchor::Trigger { trigger: self.trigger()? };
        Ok(ConditionStructure::Temporal { direction, anchor })
    }

    fn condition_structures(&mut self) -> PResult<ConditionStructures> {
        let saved = std::mem::replace(&mut self.in_structure, true);
        let result = self.condition_structures_inner();
        self.in_structure = saved;
        result
    }

    fn condition_structures_inner(&mut self) -> PResult<ConditionStructures> {
        let head = self.structure()?;
        let mut rest = Vec::new();
        loop {
            let connector = if self.peek_kw("and") {
                Connector::And
            } else if self.peek_kw("or") {
                Connector::Or
            } else {
                break;
            };
            let next = self.nth_idx(1);
            if !STRUCTURE_KEYWORDS.iter().any(|k| self.toks[next].is_keyword(k)) {
                for k in STRUCTURE_KEYWORDS {
                    self.expect_at(next, Expected::Keyword(k.to_string()));
                }
                break;
            }
            self.bump();
            rest.push(ConnectedStructure { connector, structure: self.structure()? });
        }
        Ok(ConditionStructures { head, rest })
    }

    fn finish(&mut self) -> PResult<()> {
        self.eat_punct('.');
        if self.cur().kind != TokenKind::Eof {
            self.expect(Expected::End);
            return Err(Fail);
        }
        Ok(())
    }

    fn requirement(&mut self) -> PResult<Requirement> {
        let start = self.cur().span;
        let scope = if self.peek_kw("for") {
            Some(self.scope()?)
        } else {
            self.expect_kw("for");
            None
        };
        let conditions = if STRUCTURE_KEYWORDS.iter().any(|k| self.peek_kw(k)) {
            let conds = self.condition_structures()?;
            let itemized = conds.rest.last().map_or(&conds.head, |c| &c.structure).is_itemized();
            if !self.eat_punct(',') && !itemized {
                return Err(Fail);
            }
            Some(conds)
        } else {
            STRUCTURE_KEYWORDS.iter().for_each(|k| self.expect_kw(k));
            None
        };
        let group = self.word_group(Expected::name(&[SymbolKind::Actor]), false)?;
        let actor = self.actor_ref(&group);
        let modal = self.modal()?;
        self.anchored = true;
        let response = self.response()?;
        let end = self.prev;
        self.finish()?;
        Ok(Requirement { scope, conditions, actor, modal, response, span: start.to(end) })
    }

    fn tail_response(&mut self) -> PResult<()> {
        self.expr(false, &|p| p.atomic_response())?;
        self.finish()
    }

    fn tail_conditions(&mut self) -> PResult<()> {
        self.condition_expr()?;
        if !self.eat_punct(',') {
            return Err(Fail);
        }
        self.word_group(Expected::name(&[SymbolKind::Actor]), false)?;
        self.modal()?;
        self.response()?;
        self.finish()
    }

    // ---- diagnostics and recovery ----

    fn error_diagnostic(&self) -> Diagnostic {
        let i = self.furthest;
        let tok = &self.toks[i];
        let cause1 = self.cause1_at == Some(i);
        let expected: Vec<String> = self
            .expected
            .iter()
            .filter(|e| !e.is_continuation())
            .map(|e| e.to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut shown: Vec<String> = Vec::new();
        for e in self.expected.iter().filter(|e| !e.is_continuation()) {
            let text = match e {
                Expected::Keyword(k) if Operator::from_phrase(k).is_some() => "operator".to_string(),
                e => e.to_string(),
            };
            if !shown.contains(&text) {
                shown.push(text);
            }
        }
        let message = match &self.custom {
            Some((j, m)) if *j == i => m.clone(),
            _ if cause1 => format!("`{}` is not a verb in the lexicon", tok.lexeme),
            _ if i == self.first && self.whole_requirement => {
                "expected scope, condition, or actor".to_string()
            }
            _ => format!("expected {}, found {}", join_alternatives(&shown), describe(tok)),
        };
        Diagnostic {
            severity: Severity::Error,
            span: tok.span,
            message,
            expected,
            cause: Some(if cause1 {
                DiagnosticCause::UnknownVerb
            } else {
                DiagnosticCause::UnsupportedContent
            }),
            code: if cause1 { DiagnosticCode::UnknownVerb } else { DiagnosticCode::Syntax },
        }
    }

    fn is_sync(&self, j: usize) -> bool {
        let t = &self.toks[j];
        matches!(t.kind, TokenKind::Eof | TokenKind::Bullet)
            || t.is_punct(',')
            || t.is_keyword("and")
            || t.is_keyword("or")
    }

    /// Panic-mode recovery: skip to the next synchronization token and try
    /// to resume as a requirement, a response continuation or a condition
    /// continuation, reporting the furthest failure of each round.
    fn recover(&mut self, diags: &mut Vec<Diagnostic>) {
        self.record_end = false;
        let mut count = 1;
        let mut from = self.furthest;
        while count < self.ctx.options.max_errors {
            let mut j = from;
            while !self.is_sync(j) {
                j += 1;
            }
            while self.toks[j].kind != TokenKind::Eof && self.is_sync(j + 1) {
                j += 1;
            }
            if self.toks[j].kind == TokenKind::Eof {
                break;
            }
            let resume = j + 1;
            let mut best: Option<(bool, FailState)> = None;
            for alt in 0..3 {
                self.pos = resume;
                self.anchored = false;
                self.reset_tracking(self.skip_newlines(resume));
                let outcome = match alt {
                    0 => self.requirement().map(|_| ()),
                    1 => self.tail_response(),
                    _ => self.tail_conditions(),
                };
                if outcome.is_ok() {
                    return;
                }
                // A restart that never reached a modal verb or an operator
                // is only a guess.
                let credible = alt == 1 || self.anchored;
                let state = self.take_fail_state();
                let better = best.as_ref().is_none_or(|(c, b)| {
                    (credible, state.furthest) > (*c, b.furthest)
                });
                if better {
                    best = Some((credible, state));
                }
            }
            let (_, state) = best.expect("at least one alternative ran");
            self.put_fail_state(state);
            diags.push(self.error_diagnostic());
            count += 1;
            from = self.furthest.max(resume);
        }
    }
}

fn lex_diagnostic(e: &LexError) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        span: e.span,
        message: e.message.clone(),
        expected: Vec::new(),
        cause: None,
        code: DiagnosticCode::Lex,
    }
}

fn name_warnings<T: Symbols>(node: &T) -> Vec<Diagnostic> {
    node.symbols()
        .into_iter()
        .filter(|s| !s.resolved)
        .map(|s| Diagnostic {
            severity: Severity::Warning,
            span: s.span,
            message: format!("unknown {} `{}`", s.kind.as_str(), s.name()),
            expected: Vec::new(),
            cause: None,
            code: DiagnosticCode::UnknownName,
        })
        .collect()
}

fn sort(diags: &mut [Diagnostic]) {
    diags.sort_by_key(|d| (d.span.start, d.severity == Severity::Warning));
}

pub(crate) fn parse_requirement(text: &str, ctx: &ParserContext) -> (ParseResult, ParseTrace) {
    let (toks, lex_errors) = tokenize_lossy(text);
    let mut p = Parser::new(ctx, text, toks);
    p.record_end = true;
    p.whole_requirement = true;
    let outcome = p.requirement();
    let trace = ParseTrace { at_end: std::mem::take(&mut p.at_end) };
    let mut diagnostics: Vec<Diagnostic> = lex_errors.iter().map(lex_diagnostic).collect();
    let requirement = match outcome {
        Ok(req) => {
            diagnostics.extend(name_warnings(&req));
            Some(req)
        }
        Err(Fail) => {
            diagnostics.push(p.error_diagnostic());
            if ctx.options.recovery {
                p.recover(&mut diagnostics);
            }
            None
        }
    };
    sort(&mut diagnostics);
    let representable = requirement.is_some() && !diagnostics.iter().any(Diagnostic::is_error);
    (ParseResult { representable, requirement, diagnostics }, trace)
}

pub(crate) fn parse_fragment<T: Symbols>(
    text: &str,
    ctx: &ParserContext,
    f: impl FnOnce(&mut Parser<'_>) -> PResult<T>,
) -> FragmentResult<T> {
    let (toks, lex_errors) = tokenize_lossy(text);
    let mut p = Parser::new(ctx, text, toks);
    let outcome = f(&mut p).and_then(|v| p.finish().map(|_| v));
    let mut diagnostics: Vec<Diagnostic> = lex_errors.iter().map(lex_diagnostic).collect();
    let value = match outcome {
        Ok(v) => {
            diagnostics.extend(name_warnings(&v));
            Some(v)
        }
        Err(Fail) => {
            diagnostics.push(p.error_diagnostic());
            None
        }
    };
    sort(&mut diagnostics);
    FragmentResult { value, diagnostics }
}
