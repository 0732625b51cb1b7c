//! Hand-written lexer and recursive-descent parser.

use std::collections::BTreeMap;

use crate::ontology::{rdf_type, ClassId, Literal};

use super::{PredicateObjects, Statement, Term, TtlDocument, TtlError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Prefix,
    Iri(String),
    PName(String, String),
    A,
    Semicolon,
    Comma,
    Dot,
    LBracket,
    RBracket,
    Str(String),
    Int(i64),
    Real(f64),
    Bool(bool),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

fn is_name_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, expected: &str) -> TtlError {
        TtlError::SyntaxError {
            line: self.line,
            col: self.col,
            expected: expected.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<Token>, TtlError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, line, col });
                return Ok(out);
            };
            let tok = match c {
                ';' => self.single(Tok::Semicolon),
                ',' => self.single(Tok::Comma),
                '[' => self.single(Tok::LBracket),
                ']' => self.single(Tok::RBracket),
                '.' if !self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => self.single(Tok::Dot),
                '@' => self.directive()?,
                '<' => self.iri()?,
                '"' => self.string()?,
                '+' | '-' | '.' | '0'..='9' => self.number()?,
                c if c == ':' || is_name_start(c) => self.name()?,
                _ => return Err(self.err("a term, `.`, `;`, `,`, `[` or `]`")),
            };
            out.push(Token { tok, line, col });
        }
    }

    fn single(&mut self, t: Tok) -> Tok {
        self.bump();
        t
    }

    fn directive(&mut self) -> Result<Tok, TtlError> {
        self.bump();
        let mut word = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_alphabetic()) {
            word.push(c);
            self.bump();
        }
        if word == "prefix" {
            Ok(Tok::Prefix)
        } else {
            Err(self.err("`@prefix`"))
        }
    }

    fn iri(&mut self) -> Result<Tok, TtlError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.peek() {
                Some('>') => {
                    self.bump();
                    return Ok(Tok::Iri(s));
                }
                Some(c) if !c.is_whitespace() && !matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') => {
                    s.push(c);
                    self.bump();
                }
                _ => return Err(self.err("`>` closing the IRI")),
            }
        }
    }

    fn string(&mut self) -> Result<Tok, TtlError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.peek() {
                None | Some('\n') | Some('\r') => return Err(self.err("`\"` closing the string")),
                Some('"') => {
                    self.bump();
                    return Ok(Tok::Str(s));
                }
                Some('\\') => {
                    self.bump();
                    let c = match self.peek() {
                        Some('"') => '"',
                        Some('\\') => '\\',
                        Some('\'') => '\'',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('f') => '\u{c}',
                        Some('u') => {
                            self.bump();
                            let mut code = 0u32;
                            for _ in 0..4 {
                                let d = self.peek().and_then(|c| c.to_digit(16)).ok_or_else(|| self.err("four hex digits"))?;
                                code = code * 16 + d;
                                self.bump();
                            }
                            s.push(char::from_u32(code).ok_or_else(|| self.err("a valid code point"))?);
                            continue;
                        }
                        _ => return Err(self.err("an escape sequence")),
                    };
                    self.bump();
                    s.push(c);
                }
                Some(c) => {
                    s.push(c);
                    self.bump();
                }
            }
        }
    }

    fn digits(&mut self, into: &mut String) -> usize {
        let mut n = 0;
        while let Some(d) = self.peek().filter(|c| c.is_ascii_digit()) {
            into.push(d);
            self.bump();
            n += 1;
        }
        n
    }

    fn number(&mut self) -> Result<Tok, TtlError> {
        let (line, col) = (self.line, self.col);
        let mut s = String::new();
        if let Some(sign) = self.peek().filter(|c| matches!(c, '+' | '-')) {
            s.push(sign);
            self.bump();
        }
        let mut real = false;
        let int_digits = self.digits(&mut s);
        let mut frac_digits = 0;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
            real = true;
            s.push('.');
            self.bump();
            frac_digits = self.digits(&mut s);
        }
        if int_digits + frac_digits == 0 {
            return Err(self.err("digits"));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            real = true;
            s.push('e');
            self.bump();
            if let Some(sign) = self.peek().filter(|c| matches!(c, '+' | '-')) {
                s.push(sign);
                self.bump();
            }
            if self.digits(&mut s) == 0 {
                return Err(self.err("exponent digits"));
            }
        }
        if self.peek().is_some_and(|c| is_name_char(c) || c == ':') {
            return Err(self.err("a delimiter after the number"));
        }
        let at = |expected: &str| TtlError::SyntaxError {
            line,
            col,
            expected: expected.to_string(),
        };
        if real {
            s.parse::<f64>()
                .ok()
                .filter(|f| f.is_finite())
                .map(Tok::Real)
                .ok_or_else(|| at("a finite number"))
        } else {
            s.parse::<i64>().map(Tok::Int).map_err(|_| at("an integer within 64 bits"))
        }
    }

    /// Prefixed name, `a`, `true` or `false`.
    fn name(&mut self) -> Result<Tok, TtlError> {
        let (line, col) = (self.line, self.col);
        let mut prefix = String::new();
        while let Some(c) = self.peek().filter(|c| is_name_char(*c)) {
            prefix.push(c);
            self.bump();
        }
        if self.peek() != Some(':') {
            return match prefix.as_str() {
                "a" => Ok(Tok::A),
                "true" => Ok(Tok::Bool(true)),
                "false" => Ok(Tok::Bool(false)),
                _ => Err(TtlError::SyntaxError {
                    line,
                    col,
                    expected: "a prefixed name".into(),
                }),
            };
        }
        if prefix.starts_with(|c: char| !c.is_alphabetic()) {
            return Err(TtlError::SyntaxError {
                line,
                col,
                expected: "a prefix starting with a letter".into(),
            });
        }
        self.bump();
        let mut local = String::new();
        if self.peek().is_some_and(is_name_start) {
            while let Some(c) = self.peek() {
                if is_name_char(c) {
                    local.push(c);
                    self.bump();
                } else if c == '.' && self.peek_at(1).is_some_and(is_name_char) {
                    local.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
        }
        Ok(Tok::PName(prefix, local))
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> TtlError {
        let t = self.peek();
        TtlError::SyntaxError {
            line: t.line,
            col: t.col,
            expected: expected.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), TtlError> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            Err(self.err(expected))
        }
    }

    fn document(&mut self) -> Result<TtlDocument, TtlError> {
        let mut statements = Vec::new();
        loop {
            match self.peek().tok {
                Tok::Eof => break,
                Tok::Prefix => self.prefix()?,
                _ => statements.push(self.statement()?),
            }
        }
        Ok(TtlDocument {
            prefixes: std::mem::take(&mut self.prefixes),
            statements,
        })
    }

    fn prefix(&mut self) -> Result<(), TtlError> {
        self.next();
        let name = match self.peek().tok.clone() {
            Tok::PName(p, l) if l.is_empty() => p,
            _ => return Err(self.err("a prefix name such as `osmo:`")),
        };
        self.next();
        let iri = match self.peek().tok.clone() {
            Tok::Iri(iri) => {
                self.next();
                iri
            }
            _ => return Err(self.err("an IRI in angle brackets")),
        };
        self.expect(Tok::Dot, "`.` after the prefix declaration")?;
        self.prefixes.insert(name, iri);
        Ok(())
    }

    fn pname(&self, t: &Token, p: &str, l: &str) -> Result<ClassId, TtlError> {
        if !self.prefixes.contains_key(p) {
            return Err(TtlError::UnknownPrefix {
                prefix: p.to_string(),
                line: t.line,
                col: t.col,
            });
        }
        Ok(ClassId::new(p, l))
    }

    fn statement(&mut self) -> Result<Statement, TtlError> {
        let t = self.peek().clone();
        let subject = match &t.tok {
            Tok::PName(p, l) if !l.is_empty() => self.pname(&t, p, l)?,
            _ => return Err(self.err("a subject (prefixed name) or `@prefix`")),
        };
        self.next();
        let predicates = self.predicate_objects(Tok::Dot)?;
        if predicates.is_empty() {
            return Err(self.err("a predicate"));
        }
        self.expect(Tok::Dot, "`.` ending the statement")?;
        Ok(Statement {
            subject,
            predicates,
            line: t.line,
        })
    }

    /// Predicate-object list up to (not including) `end`.
    fn predicate_objects(&mut self, end: Tok) -> Result<Vec<PredicateObjects>, TtlError> {
        let mut out = Vec::new();
        loop {
            if self.peek().tok == end && !out.is_empty() {
                return Ok(out);
            }
            let t = self.peek().clone();
            let predicate = match &t.tok {
                Tok::A => rdf_type(),
                Tok::PName(p, l) if !l.is_empty() => self.pname(&t, p, l)?,
                _ if end == Tok::RBracket && out.is_empty() => return Ok(out),
                _ => return Err(self.err("a predicate")),
            };
            self.next();
            let mut objects = vec![self.object()?];
            while self.peek().tok == Tok::Comma {
                self.next();
                objects.push(self.object()?);
            }
            out.push(PredicateObjects { predicate, objects });
            if self.peek().tok != Tok::Semicolon {
                return Ok(out);
            }
            while self.peek().tok == Tok::Semicolon {
                self.next();
            }
        }
    }

    fn object(&mut self) -> Result<Term, TtlError> {
        let t = self.peek().clone();
        let term = match &t.tok {
            Tok::PName(p, l) if !l.is_empty() => Term::Name(self.pname(&t, p, l)?),
            Tok::Str(s) => Term::Literal(Literal::String(s.clone())),
            Tok::Int(i) => Term::Literal(Literal::Integer(*i)),
            Tok::Real(f) => Term::Literal(Literal::Real(*f)),
            Tok::Bool(b) => Term::Literal(Literal::Boolean(*b)),
            Tok::LBracket => {
                self.next();
                let inner = self.predicate_objects(Tok::RBracket)?;
                self.expect(Tok::RBracket, "`]` closing the blank node")?;
                return Ok(Term::Blank(inner));
            }
            _ => return Err(self.err("an object (name, literal or `[`)")),
        };
        self.next();
        Ok(term)
    }
}

/// Parses a document in the supported Turtle subset.
pub fn parse_ttl(text: &str) -> Result<TtlDocument, TtlError> {
    let toks = Lexer::new(text).tokens()?;
    Parser {
        toks,
        pos: 0,
        prefixes: BTreeMap::new(),
    }
    .document()
}
