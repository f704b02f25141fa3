use std::sync::Arc;

use crate::diagnostic::{Diagnostic, Rule, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Keyword(&'static str),
    Number(u32),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Eq,
    And,
    Or,
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Keyword(k) => format!("keyword `{k}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Eq => "=",
            Tok::And => "/\\",
            Tok::Or => "\\/",
            Tok::Arrow => "=>",
            _ => "",
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "Pattern",
    "ShortName",
    "DTSpec",
    "DT",
    "Sort",
    "Predicate",
    "Operation",
    "CTypes",
    "CType",
    "InputPorts",
    "InputPort",
    "OutputPorts",
    "OutputPort",
    "Contracts",
    "Contract",
    "Connections",
    "Type",
    "var",
    "triggers",
    "guarantees",
    "duration",
    "at",
    "proof",
    "have",
    "from",
    "using",
    "with",
];

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Split `text` into tokens. Lexical errors are reported and the offending
/// character skipped; the token stream always ends with `Eof`.
pub fn lex(file: &Arc<str>, text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut lx = Lexer {
        file: file.clone(),
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    loop {
        lx.skip_trivia(&mut diags);
        let start = (lx.line, lx.col);
        let Some(c) = lx.peek(0) else {
            toks.push(Token {
                tok: Tok::Eof,
                span: lx.span(start),
            });
            break;
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = lx
                .peek(0)
                .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
            {
                s.push(c);
                lx.bump();
            }
            match KEYWORDS.iter().find(|k| **k == s) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(s),
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(c) = lx.peek(0).filter(char::is_ascii_digit) {
                s.push(c);
                lx.bump();
            }
            match s.parse() {
                Ok(n) => Tok::Number(n),
                Err(_) => {
                    diags.push(Diagnostic::error(
                        Rule::LexError,
                        lx.span(start),
                        format!("number {s} is too large"),
                    ));
                    continue;
                }
            }
        } else {
            let two = (c, lx.peek(1));
            let (tok, len) = match two {
                ('/', Some('\\')) => (Some(Tok::And), 2),
                ('\\', Some('/')) => (Some(Tok::Or), 2),
                ('=', Some('>')) => (Some(Tok::Arrow), 2),
                ('{', _) => (Some(Tok::LBrace), 1),
                ('}', _) => (Some(Tok::RBrace), 1),
                ('(', _) => (Some(Tok::LParen), 1),
                (')', _) => (Some(Tok::RParen), 1),
                ('[', _) => (Some(Tok::LBracket), 1),
                (']', _) => (Some(Tok::RBracket), 1),
                (',', _) => (Some(Tok::Comma), 1),
                (':', _) => (Some(Tok::Colon), 1),
                ('.', _) => (Some(Tok::Dot), 1),
                ('=', _) => (Some(Tok::Eq), 1),
                _ => (None, 1),
            };
            for _ in 0..len {
                lx.bump();
            }
            match tok {
                Some(t) => t,
                None => {
                    diags.push(Diagnostic::error(
                        Rule::LexError,
                        lx.span(start),
                        format!("unexpected character {c:?}"),
                    ));
                    continue;
                }
            }
        };
        toks.push(Token {
            tok,
            span: lx.span(start),
        });
    }
    (toks, diags)
}

struct Lexer {
    file: Arc<str>,
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Lexer {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek(0) {
            self.pos += 1;
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
    }

    fn span(&self, start: (u32, u32)) -> SourceSpan {
        SourceSpan::new(self.file.clone(), start, (self.line, self.col))
    }

    fn skip_trivia(&mut self, diags: &mut Vec<Diagnostic>) {
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(c), _) if c.is_whitespace() => self.bump(),
                (Some('/'), Some('/')) => {
                    while self.peek(0).is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    let start = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(0), self.peek(1)) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => self.bump(),
                            (None, _) => {
                                diags.push(Diagnostic::error(
                                    Rule::LexError,
                                    self.span(start),
                                    "unterminated block comment",
                                ));
                                return;
                            }
                        }
                    }
                }
                _ => return,
            }
        }
    }
}
