//! Line structure and value terms of the scenario file.
//!
//! ```text
//! file    := { blank | comment | "[" name "]" | key "=" term }
//! term    := number | string | bool | ident [ "(" args ")" ] | "[" terms "]"
//! args    := [ arg { "," arg } ]      arg := [ ident "=" ] term
//! ```
//!
//! `#` starts a comment outside strings. A value continues onto following
//! lines while its brackets are unbalanced.

use std::fmt;

use super::ConfigError;

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    /// Kept as written so that integers beyond 2^53 survive.
    Num(String),
    Str(String),
    Bool(bool),
    Ident(String),
    List(Vec<Term>),
    Call { name: String, args: Vec<Arg> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub name: Option<String>,
    pub value: Term,
}

impl Term {
    pub fn num(x: f64) -> Term {
        Term::Num(fmt_f64(x))
    }

    pub fn int(x: u64) -> Term {
        Term::Num(x.to_string())
    }

    pub fn vector(xs: &[f64]) -> Term {
        Term::List(xs.iter().map(|x| Term::num(*x)).collect())
    }

    pub fn rows(rows: &[Vec<f64>]) -> Term {
        Term::List(rows.iter().map(|r| Term::vector(r)).collect())
    }

    pub fn call(name: &str, args: Vec<(Option<&str>, Term)>) -> Term {
        Term::Call {
            name: name.to_string(),
            args: args
                .into_iter()
                .map(|(n, value)| Arg {
                    name: n.map(str::to_string),
                    value,
                })
                .collect(),
        }
    }

    /// Name of a bare identifier or a call.
    pub fn head(&self) -> Option<&str> {
        match self {
            Term::Ident(n) | Term::Call { name: n, .. } => Some(n),
            _ => None,
        }
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Num(s) => f.write_str(s),
            Term::Str(s) => write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
            Term::Bool(b) => write!(f, "{b}"),
            Term::Ident(s) => f.write_str(s),
            Term::List(items) => {
                f.write_str("[")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("]")
            }
            Term::Call { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    if let Some(n) = &a.name {
                        write!(f, "{n}=")?;
                    }
                    write!(f, "{}", a.value)?;
                }
                f.write_str(")")
            }
        }
    }
}

/// One logical line.
#[derive(Debug, Clone, PartialEq)]
pub enum Line {
    Section { name: String, line: usize },
    Entry { key: String, value: Term, line: usize },
}

fn strip_comment(s: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        match c {
            '\\' if in_str => escaped = !escaped,
            '"' if !escaped => in_str = !in_str,
            '#' if !in_str => return &s[..i],
            _ => escaped = false,
        }
        if c != '\\' {
            escaped = false;
        }
    }
    s
}

fn depth_change(s: &str) -> i64 {
    let mut in_str = false;
    let mut prev = ' ';
    let mut d = 0;
    for c in s.chars() {
        if c == '"' && prev != '\\' {
            in_str = !in_str;
        } else if !in_str {
            match c {
                '(' | '[' => d += 1,
                ')' | ']' => d -= 1,
                _ => {}
            }
        }
        prev = c;
    }
    d
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn split_lines(text: &str) -> Result<Vec<Line>, ConfigError> {
    let mut out = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, strip_comment(l)));
    while let Some((no, raw)) = lines.next() {
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim();
            if !is_ident(name) {
                return Err(ConfigError::at(no, format!("malformed section header `{s}`")));
            }
            out.push(Line::Section {
                name: name.to_string(),
                line: no,
            });
            continue;
        }
        let Some((key, rest)) = s.split_once('=') else {
            return Err(ConfigError::at(no, format!("expected `key = value`, found `{s}`")));
        };
        let key = key.trim();
        if !is_ident(key) {
            return Err(ConfigError::at(no, format!("malformed key `{key}`")));
        }
        let mut value = rest.trim().to_string();
        let mut depth = depth_change(&value);
        while depth > 0 {
            let Some((_, more)) = lines.next() else {
                return Err(ConfigError::at(no, format!("unbalanced brackets in value of `{key}`")));
            };
            value.push(' ');
            value.push_str(more.trim());
            depth += depth_change(more);
        }
        let term = parse_term(&value).map_err(|m| ConfigError::at(no, format!("in value of `{key}`: {m}")))?;
        out.push(Line::Entry {
            key: key.to_string(),
            value: term,
            line: no,
        });
    }
    Ok(out)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

pub fn parse_term(s: &str) -> Result<Term, String> {
    let mut p = Parser { s: s.as_bytes(), pos: 0 };
    let t = p.term()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(format!("unexpected trailing text `{}`", &s[p.pos..]));
    }
    Ok(t)
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn text(&self, a: usize, b: usize) -> String {
        String::from_utf8_lossy(&self.s[a..b]).into_owned()
    }

    fn ident(&mut self) -> String {
        let a = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        self.text(a, self.pos)
    }

    fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            None => Err("missing value".into()),
            Some(b'[') => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat(b']') {
                    loop {
                        items.push(self.term()?);
                        if self.eat(b']') {
                            break;
                        }
                        if !self.eat(b',') {
                            return Err("expected `,` or `]` in list".into());
                        }
                    }
                }
                Ok(Term::List(items))
            }
            Some(b'"') => {
                self.pos += 1;
                let mut out = String::new();
                let mut chars = std::str::from_utf8(&self.s[self.pos..])
                    .map_err(|e| e.to_string())?
                    .char_indices();
                while let Some((i, c)) = chars.next() {
                    match c {
                        '"' => {
                            self.pos += i + 1;
                            return Ok(Term::Str(out));
                        }
                        '\\' => match chars.next() {
                            Some((_, e)) => out.push(e),
                            None => break,
                        },
                        c => out.push(c),
                    }
                }
                Err("unterminated string".into())
            }
            Some(c) if c == b'-' || c == b'+' || c == b'.' || c.is_ascii_digit() => {
                let a = self.pos;
                self.pos += 1;
                while self.pos < self.s.len() {
                    let c = self.s[self.pos];
                    let exp_sign = (c == b'-' || c == b'+') && matches!(self.s[self.pos - 1], b'e' | b'E');
                    if c.is_ascii_alphanumeric() || c == b'.' || c == b'_' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let lit = self.text(a, self.pos);
                if lit.parse::<f64>().is_err() {
                    return Err(format!("malformed number `{lit}`"));
                }
                Ok(Term::Num(lit))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let name = self.ident();
                match name.as_str() {
                    "true" => return Ok(Term::Bool(true)),
                    "false" => return Ok(Term::Bool(false)),
                    _ => {}
                }
                if !self.eat(b'(') {
                    return Ok(Term::Ident(name));
                }
                let mut args = Vec::new();
                if !self.eat(b')') {
                    loop {
                        args.push(self.arg()?);
                        if self.eat(b')') {
                            break;
                        }
                        if !self.eat(b',') {
                            return Err(format!("expected `,` or `)` in arguments of `{name}`"));
                        }
                    }
                }
                Ok(Term::Call { name, args })
            }
            Some(c) => Err(format!("unexpected character `{}`", c as char)),
        }
    }

    fn arg(&mut self) -> Result<Arg, String> {
        let save = self.pos;
        self.ws();
        if matches!(self.s.get(self.pos), Some(c) if c.is_ascii_alphabetic() || *c == b'_') {
            let name = self.ident();
            if self.peek() == Some(b'=') {
                self.pos += 1;
                return Ok(Arg {
                    name: Some(name),
                    value: self.term()?,
                });
            }
        }
        self.pos = save;
        Ok(Arg {
            name: None,
            value: self.term()?,
        })
    }
}
