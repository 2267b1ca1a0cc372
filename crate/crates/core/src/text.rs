//! Textual grammar files.
//!
//! ```text
//! grammar  = rule+ ;
//! rule     = IDENT "<-" choice ";" ;
//! choice   = sequence ( "/" sequence )* ;
//! sequence = prefix+ ;
//! prefix   = ( "!" | "&" )* suffix ;
//! suffix   = primary ( "?" | "*" | "+" )* ;
//! primary  = IDENT | LITERAL | CLASS | "(" choice ")" | "(" ")" ;
//! ```
//!
//! Literals are single-quoted with the escapes `\' \\ \n \r \t`. Classes are
//! `[...]` lists of characters and `a-z` ranges, with `\] \[ \- \\ \n \r \t`
//! escapes. `()` is the empty match. `#` starts a comment running to end of
//! line. The first rule is the start rule.

use crate::grammar::{escape_literal, Expr, GrammarDef, GrammarError, Terminal};

/// Grammar file contents plus a display name used in diagnostics.
#[derive(Debug, Clone)]
pub struct GrammarSource {
    pub text: String,
    pub origin: String,
}

impl GrammarSource {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            origin: origin.into(),
        }
    }
}

/// Parses grammar text into an unresolved definition. Derived operators are
/// kept as written; [`GrammarDef::resolve`] desugars them.
pub fn parse_grammar_text(src: &GrammarSource) -> Result<GrammarDef, GrammarError> {
    let mut p = MetaParser {
        chars: src.text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        origin: &src.origin,
    };
    let mut def = GrammarDef::new();
    p.skip_trivia();
    if p.at_end() {
        return Err(p.error("rule definition"));
    }
    while !p.at_end() {
        let name = p.ident().ok_or_else(|| p.error("rule name"))?;
        p.skip_trivia();
        p.expect_str("<-")?;
        let body = p.choice()?;
        p.expect_str(";")?;
        if def.rules.iter().any(|(n, _)| *n == name) {
            return Err(GrammarError::DuplicateRule(name));
        }
        def = def.rule(&name, body);
    }
    Ok(def)
}

/// Parses and resolves in one step.
pub fn load_grammar(src: &GrammarSource) -> Result<crate::grammar::Grammar, GrammarError> {
    parse_grammar_text(src)?.resolve()
}

struct MetaParser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    origin: &'a str,
}

impl MetaParser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
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

    fn error(&self, expected: &str) -> GrammarError {
        GrammarError::Syntax {
            origin: self.origin.to_string(),
            line: self.line,
            col: self.col,
            expected: expected.to_string(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while !matches!(self.peek(), None | Some('\n')) {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn expect_str(&mut self, s: &str) -> Result<(), GrammarError> {
        self.skip_trivia();
        let end = self.pos + s.chars().count();
        if end <= self.chars.len() && self.chars[self.pos..end].iter().copied().eq(s.chars()) {
            for _ in 0..s.chars().count() {
                self.bump();
            }
            self.skip_trivia();
            Ok(())
        } else {
            Err(self.error(&format!("`{s}`")))
        }
    }

    fn ident(&mut self) -> Option<String> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return None,
        }
        let mut name = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
            name.push(c);
            self.bump();
        }
        Some(name)
    }

    fn choice(&mut self) -> Result<Expr, GrammarError> {
        let mut alts = vec![self.sequence()?];
        while self.peek() == Some('/') {
            self.bump();
            self.skip_trivia();
            alts.push(self.sequence()?);
        }
        Ok(Expr::first(alts))
    }

    fn starts_primary(&self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || "_'[(!&".contains(c))
    }

    fn sequence(&mut self) -> Result<Expr, GrammarError> {
        if !self.starts_primary() {
            return Err(self.error("expression"));
        }
        let mut items = Vec::new();
        while self.starts_primary() {
            items.push(self.prefix()?);
        }
        Ok(Expr::seq(items))
    }

    fn prefix(&mut self) -> Result<Expr, GrammarError> {
        match self.peek() {
            Some('!') => {
                self.bump();
                self.skip_trivia();
                Ok(self.prefix()?.not_followed_by())
            }
            Some('&') => {
                self.bump();
                self.skip_trivia();
                Ok(self.prefix()?.followed_by())
            }
            _ => self.suffix(),
        }
    }

    fn suffix(&mut self) -> Result<Expr, GrammarError> {
        let mut e = self.primary()?;
        loop {
            e = match self.peek() {
                Some('?') => e.optional(),
                Some('*') => e.zero_or_more(),
                Some('+') => e.one_or_more(),
                _ => break,
            };
            self.bump();
            self.skip_trivia();
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, GrammarError> {
        let e = match self.peek() {
            Some('\'') => self.literal()?,
            Some('[') => self.class()?,
            Some('(') => {
                self.bump();
                self.skip_trivia();
                if self.peek() == Some(')') {
                    self.bump();
                    Expr::Epsilon
                } else {
                    let inner = self.choice()?;
                    if self.peek() != Some(')') {
                        return Err(self.error("`)`"));
                    }
                    self.bump();
                    inner
                }
            }
            _ => Expr::Ref(self.ident().ok_or_else(|| self.error("expression"))?),
        };
        self.skip_trivia();
        Ok(e)
    }

    fn escape(&mut self, allowed: &str) -> Result<char, GrammarError> {
        match self.bump() {
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('t') => Ok('\t'),
            Some(c) if allowed.contains(c) => Ok(c),
            _ => Err(self.error("valid escape sequence")),
        }
    }

    fn literal(&mut self) -> Result<Expr, GrammarError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("closing `'`")),
                Some('\'') => break,
                Some('\\') => s.push(self.escape("'\\")?),
                Some(c) => s.push(c),
            }
        }
        if s.is_empty() {
            return Err(self.error("non-empty literal"));
        }
        Ok(Expr::lit(&s))
    }

    fn class_char(&mut self) -> Result<char, GrammarError> {
        match self.bump() {
            None => Err(self.error("closing `]`")),
            Some('\\') => self.escape("]\\[-"),
            Some(c) => Ok(c),
        }
    }

    fn class(&mut self) -> Result<Expr, GrammarError> {
        self.bump();
        let mut alts = Vec::new();
        while self.peek() != Some(']') {
            let lo = self.class_char()?;
            let hi = if self.peek() == Some('-') && self.chars.get(self.pos + 1) != Some(&']') {
                self.bump();
                self.class_char()?
            } else {
                lo
            };
            if hi < lo {
                return Err(self.error("ascending character range"));
            }
            alts.push(Expr::Terminal(Terminal::Range(lo, hi)));
        }
        self.bump();
        if alts.is_empty() {
            return Err(self.error("non-empty character class"));
        }
        Ok(Expr::first(alts))
    }
}

/// Renders a definition in the file syntax. Re-parsing the output yields an
/// identical definition.
pub fn print_grammar(def: &GrammarDef) -> String {
    let mut out = String::new();
    // The start rule goes first so it stays the start rule on re-parse.
    let ordered = def
        .rules
        .iter()
        .filter(|(n, _)| *n == def.start)
        .chain(def.rules.iter().filter(|(n, _)| *n != def.start));
    for (name, body) in ordered {
        out.push_str(&format!("{name} <- {} ;\n", print_expr(body)));
    }
    out
}

pub fn print_expr(e: &Expr) -> String {
    print_prec(e, 0)
}

// 0 = choice, 1 = sequence, 2 = prefix, 3 = suffix/primary
fn print_prec(e: &Expr, ctx: u8) -> String {
    let (text, prec) = match e {
        Expr::First(xs) => (
            xs.iter().map(|x| print_prec(x, 1)).collect::<Vec<_>>().join(" / "),
            0,
        ),
        Expr::Seq(xs) => (
            xs.iter().map(|x| print_prec(x, 2)).collect::<Vec<_>>().join(" "),
            1,
        ),
        Expr::NotFollowedBy(x) => (format!("!{}", print_prec(x, 2)), 2),
        Expr::FollowedBy(x) => (format!("&{}", print_prec(x, 2)), 2),
        Expr::OneOrMore(x) => (format!("{}+", print_prec(x, 3)), 3),
        Expr::ZeroOrMore(x) => (format!("{}*", print_prec(x, 3)), 3),
        Expr::Optional(x) => (format!("{}?", print_prec(x, 3)), 3),
        Expr::Terminal(Terminal::Literal(s)) => (format!("'{}'", escape_literal(s)), 3),
        Expr::Terminal(t) => (t.to_string(), 3),
        Expr::Epsilon => ("()".to_string(), 3),
        Expr::Ref(name) => (name.clone(), 3),
    };
    if prec < ctx {
        format!("({text})")
    } else {
        text
    }
}
