use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Keyword,
    Word,
    QuotedText,
    Number,
    Punctuation,
    Bullet,
    Newline,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    /// Source text of the token; quoted text has its delimiters stripped.
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    /// Lowercase, single-spaced form used for keyword comparison.
    pub fn norm(&self) -> String {
        self.lexeme
            .split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.norm() == kw
    }

    pub fn is_punct(&self, c: char) -> bool {
        self.kind == TokenKind::Punctuation && self.lexeme.starts_with(c)
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{message}")]
pub struct LexError {
    pub message: String,
    pub span: Span,
}

/// Single and multi-word keywords. Multi-word entries are matched greedily
/// (longest first) so that e.g. `is less than or equal to` is one token.
pub const KEYWORDS: &[&str] = &[
    // modifiers
    "all", "none", "only one", "any", "a", "an", "the",
    // structure
    "for", "while", "when", "where", "if", "before", "after", "every",
    // modal verbs and connectors
    "must", "shall", "not", "and", "or",
    // operands
    "of", "of type",
    // slot keywords of the built-in templates
    "from", "to", "through", "in compliance with", "described in",
    // condition rules
    "has the properties", "have the properties",
    "conforms to the standard", "conforms to the format",
    "conform to the standard", "conform to the format",
    "does not conform to the standard", "does not conform to the format",
    // operators
    "is", "is not",
    "is equal to", "equals to", "is not equal to", "is different from",
    "is less than", "is not less than",
    "is less than or equal to", "is less or equal to", "less or equal to",
    "is not less than or equal to",
    "is greater than", "is not greater than",
    "is greater than or equal to", "is greater or equal to", "greater or equal to",
    "is not greater than or equal to",
    "has", "have", "does not have", "do not have",
    "contains", "contain", "does not contain", "do not contain",
    "is available", "are available", "is not available", "are not available",
];

struct KeywordTable {
    phrases: HashSet<&'static str>,
    max_words: usize,
}

fn keyword_table() -> &'static KeywordTable {
    static TABLE: OnceLock<KeywordTable> = OnceLock::new();
    TABLE.get_or_init(|| KeywordTable {
        phrases: KEYWORDS.iter().copied().collect(),
        max_words: KEYWORDS.iter().map(|k| k.split(' ').count()).max().unwrap_or(1),
    })
}

pub fn is_keyword_phrase(phrase: &str) -> bool {
    keyword_table().phrases.contains(phrase)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
    tokens: Vec<Token>,
    errors: Vec<LexError>,
}

impl<'a> Lexer<'a> {
    fn span(&self, start: usize, end: usize) -> Span {
        let column = self.text[self.line_start..start].chars().count() + 1;
        Span::new(start, end, self.line, column)
    }

    fn push(&mut self, kind: TokenKind, start: usize, end: usize, lexeme: &str) {
        let span = self.span(start, end);
        self.tokens.push(Token { kind, lexeme: lexeme.to_string(), span });
    }

    fn peek_char(&self, at: usize) -> Option<char> {
        self.text[at..].chars().next()
    }

    /// End offset of a word starting at `start` (letters, digits, `_`, and
    /// inner hyphens).
    fn scan_word(&self, start: usize) -> usize {
        let mut end = start;
        let bytes = self.text;
        while let Some(c) = self.peek_char(end) {
            if is_word_char(c) {
                end += c.len_utf8();
            } else if c == '-' {
                match bytes[end + 1..].chars().next() {
                    Some(n) if is_word_char(n) => end += 1,
                    _ => break,
                }
            } else {
                break;
            }
        }
        end
    }

    fn at_line_start(&self, at: usize) -> bool {
        self.text[self.line_start..at].chars().all(|c| c == ' ' || c == '\t' || c == '\r')
    }

    fn run(mut self) -> (Vec<Token>, Vec<LexError>) {
        while let Some(c) = self.peek_char(self.pos) {
            let start = self.pos;
            match c {
                '\n' => {
                    self.push(TokenKind::Newline, start, start + 1, "\n");
                    self.pos += 1;
                    self.line += 1;
                    self.line_start = self.pos;
                }
                c if c.is_whitespace() => self.pos += c.len_utf8(),
                '"' => self.quoted(start),
                '-' if self.at_line_start(start)
                    && self.peek_char(start + 1).is_none_or(|n| n.is_whitespace()) =>
                {
                    self.push(TokenKind::Bullet, start, start + 1, "-");
                    self.pos += 1;
                }
                c if c.is_ascii_digit() => self.number(start),
                c if c.is_alphabetic() => self.word(start),
                c => {
                    let end = start + c.len_utf8();
                    let lexeme = &self.text[start..end];
                    self.push(TokenKind::Punctuation, start, end, lexeme);
                    self.pos = end;
                }
            }
        }
        let end = self.text.len();
        let span = self.span(end, end);
        self.tokens.push(Token { kind: TokenKind::Eof, lexeme: String::new(), span });
        (self.tokens, self.errors)
    }

    fn quoted(&mut self, start: usize) {
        let body = start + 1;
        let rest = &self.text[body..];
        let stop = rest.find(['"', '\n']).map(|i| body + i);
        match stop {
            Some(close) if self.text.as_bytes()[close] == b'"' => {
                let content = &self.text[body..close];
                self.push(TokenKind::QuotedText, start, close + 1, content);
                self.pos = close + 1;
            }
            other => {
                let end = other.unwrap_or(self.text.len());
                let content = &self.text[body..end];
                self.push(TokenKind::QuotedText, start, end, content);
                let span = self.span(start, end);
                self.errors.push(LexError { message: "unterminated quoted text".into(), span });
                self.pos = end;
            }
        }
    }

    fn number(&mut self, start: usize) {
        let digits_end = |from: usize| {
            self.text[from..]
                .find(|c: char| !c.is_ascii_digit())
                .map_or(self.text.len(), |i| from + i)
        };
        let mut end = digits_end(start);
        if self.text[end..].starts_with('.')
            && self.peek_char(end + 1).is_some_and(|c| c.is_ascii_digit())
        {
            end = digits_end(end + 1);
        }
        let glued = self.peek_char(end).is_some_and(is_word_char)
            || (self.text[end..].starts_with('-')
                && self.peek_char(end + 1).is_some_and(is_word_char));
        if glued {
            // digits followed by letters, e.g. `1h00`
            let end = self.scan_word(start);
            let lexeme = &self.text[start..end];
            self.push(TokenKind::Word, start, end, lexeme);
            self.pos = end;
        } else {
            let lexeme = &self.text[start..end];
            self.push(TokenKind::Number, start, end, lexeme);
            self.pos = end;
        }
    }

    fn word(&mut self, start: usize) {
        let first_end = self.scan_word(start);
        let table = keyword_table();
        // Collect following words on the same line for multi-word keywords.
        let mut words = vec![(start, first_end)];
        let mut cursor = first_end;
        while words.len() < table.max_words {
            let gap = self.text[cursor..]
                .find(|c: char| c != ' ' && c != '\t')
                .map_or(self.text.len(), |i| cursor + i);
            if gap == cursor {
                break;
            }
            match self.peek_char(gap) {
                Some(c) if c.is_alphabetic() => {
                    let e = self.scan_word(gap);
                    words.push((gap, e));
                    cursor = e;
                }
                _ => break,
            }
        }
        for n in (1..=words.len()).rev() {
            let phrase = words[..n]
                .iter()
                .map(|&(s, e)| self.text[s..e].to_lowercase())
                .collect::<Vec<_>>()
                .join(" ");
            if table.phrases.contains(phrase.as_str()) {
                let end = words[n - 1].1;
                let lexeme = &self.text[start..end];
                self.push(TokenKind::Keyword, start, end, lexeme);
                self.pos = end;
                return;
            }
        }
        let lexeme = &self.text[start..first_end];
        self.push(TokenKind::Word, start, first_end, lexeme);
        self.pos = first_end;
    }
}

/// Tokenizes `text`, recovering from unterminated quotes (the quoted token
/// runs to the end of the line) and reporting them separately.
pub fn tokenize_lossy(text: &str) -> (Vec<Token>, Vec<LexError>) {
    Lexer { text, pos: 0, line: 1, line_start: 0, tokens: Vec::new(), errors: Vec::new() }.run()
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let (tokens, mut errors) = tokenize_lossy(text);
    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(errors.remove(0))
    }
}
