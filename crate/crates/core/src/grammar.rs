//! Clause algebra, rule tables and reference resolution.
//!
//! Grammars are written against [`Expr`], which admits the derived operators
//! (`e?`, `e*`, `&e`). [`desugar`] rewrites those into the four principal
//! operators, and [`GrammarDef::resolve`] lowers the result into an immutable
//! [`Grammar`] whose [`Clause`] trees carry rule indices instead of names.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Errors raised while building or loading a grammar.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("unknown rule `{name}` referenced from rule `{referenced_from}`")]
    UnknownRule { name: String, referenced_from: String },
    #[error("start rule `{0}` is not defined")]
    MissingStartRule(String),
    #[error("rule `{0}` is defined more than once")]
    DuplicateRule(String),
    #[error("{origin}:{line}:{col}: syntax error, expected {expected}")]
    Syntax {
        origin: String,
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("empty string literal in rule `{0}` (use `()` for the empty match)")]
    EmptyLiteral(String),
    #[error("grammar has no rules")]
    Empty,
}

/// Index of a rule inside a resolved [`Grammar`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub u32);

impl RuleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Something that consumes input characters directly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Terminal {
    Char(char),
    /// Inclusive code-point range.
    Range(char, char),
    /// Matches its characters atomically. Never empty once inside a grammar.
    Literal(String),
}

impl Terminal {
    /// Length in characters of a successful match of this terminal.
    pub fn width(&self) -> usize {
        match self {
            Terminal::Char(_) | Terminal::Range(..) => 1,
            Terminal::Literal(s) => s.chars().count(),
        }
    }

    /// Returns the match length at `pos`, if the terminal matches there.
    pub fn match_at(&self, input: &[char], pos: usize) -> Option<usize> {
        match self {
            Terminal::Char(c) => (input.get(pos) == Some(c)).then_some(1),
            Terminal::Range(lo, hi) => input
                .get(pos)
                .filter(|c| (*lo..=*hi).contains(*c))
                .map(|_| 1),
            Terminal::Literal(s) => {
                let mut p = pos;
                for c in s.chars() {
                    if input.get(p) != Some(&c) {
                        return None;
                    }
                    p += 1;
                }
                Some(p - pos)
            }
        }
    }
}

/// Surface expression, as produced by the text front end or a builder.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Seq(Vec<Expr>),
    First(Vec<Expr>),
    OneOrMore(Box<Expr>),
    NotFollowedBy(Box<Expr>),
    Optional(Box<Expr>),
    ZeroOrMore(Box<Expr>),
    FollowedBy(Box<Expr>),
    Terminal(Terminal),
    Epsilon,
    Ref(String),
}

impl Expr {
    pub fn ch(c: char) -> Expr {
        Expr::Terminal(Terminal::Char(c))
    }

    pub fn range(lo: char, hi: char) -> Expr {
        Expr::Terminal(Terminal::Range(lo, hi))
    }

    /// Single-character literals collapse to [`Terminal::Char`].
    pub fn lit(s: &str) -> Expr {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Expr::ch(c),
            _ => Expr::Terminal(Terminal::Literal(s.to_string())),
        }
    }

    pub fn rule(name: &str) -> Expr {
        Expr::Ref(name.to_string())
    }

    /// Sequence with nested sequences flattened; one element collapses to
    /// itself and zero elements to [`Expr::Epsilon`].
    pub fn seq(items: Vec<Expr>) -> Expr {
        Self::flat(items, true)
    }

    /// Ordered choice, flattened the same way as [`Expr::seq`].
    pub fn first(items: Vec<Expr>) -> Expr {
        Self::flat(items, false)
    }

    fn flat(items: Vec<Expr>, seq: bool) -> Expr {
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Expr::Seq(inner) if seq => out.extend(inner),
                Expr::First(inner) if !seq => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::Epsilon,
            1 => out.pop().unwrap(),
            _ if seq => Expr::Seq(out),
            _ => Expr::First(out),
        }
    }

    pub fn one_or_more(self) -> Expr {
        Expr::OneOrMore(Box::new(self))
    }

    pub fn zero_or_more(self) -> Expr {
        Expr::ZeroOrMore(Box::new(self))
    }

    pub fn optional(self) -> Expr {
        Expr::Optional(Box::new(self))
    }

    pub fn not_followed_by(self) -> Expr {
        Expr::NotFollowedBy(Box::new(self))
    }

    pub fn followed_by(self) -> Expr {
        Expr::FollowedBy(Box::new(self))
    }

    /// True when no derived operator occurs anywhere in the tree.
    pub fn is_principal(&self) -> bool {
        match self {
            Expr::Optional(_) | Expr::ZeroOrMore(_) | Expr::FollowedBy(_) => false,
            Expr::Seq(xs) | Expr::First(xs) => xs.iter().all(Expr::is_principal),
            Expr::OneOrMore(x) | Expr::NotFollowedBy(x) => x.is_principal(),
            Expr::Terminal(_) | Expr::Epsilon | Expr::Ref(_) => true,
        }
    }
}

/// Rewrites derived operators into principal ones:
/// `e?` is `e / ()`, `e*` is `e+ / ()` and `&e` is `!!e`.
pub fn desugar(expr: &Expr) -> Expr {
    match expr {
        Expr::Seq(xs) => Expr::seq(xs.iter().map(desugar).collect()),
        Expr::First(xs) => Expr::first(xs.iter().map(desugar).collect()),
        Expr::OneOrMore(x) => desugar(x).one_or_more(),
        Expr::NotFollowedBy(x) => desugar(x).not_followed_by(),
        Expr::Optional(x) => Expr::first(vec![desugar(x), Expr::Epsilon]),
        Expr::ZeroOrMore(x) => Expr::first(vec![desugar(x).one_or_more(), Expr::Epsilon]),
        Expr::FollowedBy(x) => desugar(x).not_followed_by().not_followed_by(),
        Expr::Terminal(t) => Expr::Terminal(t.clone()),
        Expr::Epsilon => Expr::Epsilon,
        Expr::Ref(name) => Expr::Ref(name.clone()),
    }
}

/// A parsing expression over principal operators only, with rule references
/// bound to rule indices. Immutable once the owning [`Grammar`] is built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Clause {
    /// Two or more children matched left to right.
    Seq(Vec<Clause>),
    /// Two or more alternatives; the first that matches wins.
    First(Vec<Clause>),
    OneOrMore(Box<Clause>),
    NotFollowedBy(Box<Clause>),
    Terminal(Terminal),
    Epsilon,
    RuleRef { name: String, rule: RuleId },
}

impl Clause {
    /// Number of clause nodes in this tree.
    pub fn size(&self) -> usize {
        match self {
            Clause::Seq(xs) | Clause::First(xs) => 1 + xs.iter().map(Clause::size).sum::<usize>(),
            Clause::OneOrMore(x) | Clause::NotFollowedBy(x) => 1 + x.size(),
            _ => 1,
        }
    }

    /// Back-conversion to the surface form, used for printing.
    pub fn to_expr(&self) -> Expr {
        match self {
            Clause::Seq(xs) => Expr::Seq(xs.iter().map(Clause::to_expr).collect()),
            Clause::First(xs) => Expr::First(xs.iter().map(Clause::to_expr).collect()),
            Clause::OneOrMore(x) => x.to_expr().one_or_more(),
            Clause::NotFollowedBy(x) => x.to_expr().not_followed_by(),
            Clause::Terminal(t) => Expr::Terminal(t.clone()),
            Clause::Epsilon => Expr::Epsilon,
            Clause::RuleRef { name, .. } => Expr::Ref(name.clone()),
        }
    }
}

/// An unresolved grammar: ordered rule definitions plus a start rule name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GrammarDef {
    pub rules: Vec<(String, Expr)>,
    pub start: String,
}

impl GrammarDef {
    /// Creates a definition whose start rule is the first rule added.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a rule. The first rule added becomes the start rule unless
    /// [`GrammarDef::with_start`] says otherwise.
    pub fn rule(mut self, name: &str, body: Expr) -> Self {
        if self.rules.is_empty() && self.start.is_empty() {
            self.start = name.to_string();
        }
        self.rules.push((name.to_string(), body));
        self
    }

    pub fn with_start(mut self, name: &str) -> Self {
        self.start = name.to_string();
        self
    }

    /// Desugars every rule body and binds every reference to a rule index.
    pub fn resolve(&self) -> Result<Grammar, GrammarError> {
        if self.rules.is_empty() {
            return Err(GrammarError::Empty);
        }
        let mut index = HashMap::new();
        for (i, (name, _)) in self.rules.iter().enumerate() {
            if index.insert(name.clone(), RuleId(i as u32)).is_some() {
                return Err(GrammarError::DuplicateRule(name.clone()));
            }
        }
        let start = *index
            .get(&self.start)
            .ok_or_else(|| GrammarError::MissingStartRule(self.start.clone()))?;
        let rules = self
            .rules
            .iter()
            .map(|(name, body)| {
                let body = lower(&desugar(body), name, &index)?;
                Ok(Rule {
                    name: name.clone(),
                    body,
                })
            })
            .collect::<Result<Vec<_>, GrammarError>>()?;
        Ok(Grammar {
            rules,
            index,
            start,
        })
    }
}

fn lower(expr: &Expr, owner: &str, index: &HashMap<String, RuleId>) -> Result<Clause, GrammarError> {
    let many = |xs: &[Expr]| {
        xs.iter()
            .map(|x| lower(x, owner, index))
            .collect::<Result<Vec<_>, _>>()
    };
    Ok(match expr {
        Expr::Seq(xs) => Clause::Seq(many(xs)?),
        Expr::First(xs) => Clause::First(many(xs)?),
        Expr::OneOrMore(x) => Clause::OneOrMore(Box::new(lower(x, owner, index)?)),
        Expr::NotFollowedBy(x) => Clause::NotFollowedBy(Box::new(lower(x, owner, index)?)),
        Expr::Terminal(Terminal::Literal(s)) if s.is_empty() => {
            return Err(GrammarError::EmptyLiteral(owner.to_string()))
        }
        Expr::Terminal(t) => Clause::Terminal(t.clone()),
        Expr::Epsilon => Clause::Epsilon,
        Expr::Ref(name) => Clause::RuleRef {
            name: name.clone(),
            rule: *index.get(name).ok_or_else(|| GrammarError::UnknownRule {
                name: name.clone(),
                referenced_from: owner.to_string(),
            })?,
        },
        Expr::Optional(_) | Expr::ZeroOrMore(_) | Expr::FollowedBy(_) => {
            unreachable!("lower() runs on desugared expressions")
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub body: Clause,
}

/// A resolved, immutable grammar. Safe to share between parse sessions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    rules: Vec<Rule>,
    index: HashMap<String, RuleId>,
    start: RuleId,
}

impl Grammar {
    pub fn start(&self) -> RuleId {
        self.start
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.index()]
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule_id(&self, name: &str) -> Option<RuleId> {
        self.index.get(name).copied()
    }

    pub fn rule_name(&self, id: RuleId) -> &str {
        &self.rules[id.index()].name
    }

    /// |G|: rule count plus total clause count.
    pub fn size(&self) -> usize {
        self.rules.len() + self.rules.iter().map(|r| r.body.size()).sum::<usize>()
    }

    /// Converts back to an unresolved definition (desugared form).
    pub fn to_def(&self) -> GrammarDef {
        GrammarDef {
            rules: self
                .rules
                .iter()
                .map(|r| (r.name.clone(), r.body.to_expr()))
                .collect(),
            start: self.rule_name(self.start).to_string(),
        }
    }

    /// Rules that can match the empty string.
    pub fn nullable_rules(&self) -> Vec<bool> {
        let mut nullable = vec![false; self.rules.len()];
        loop {
            let mut changed = false;
            for (i, rule) in self.rules.iter().enumerate() {
                if !nullable[i] && clause_nullable(&rule.body, &nullable) {
                    nullable[i] = true;
                    changed = true;
                }
            }
            if !changed {
                return nullable;
            }
        }
    }

    /// Rules that can re-enter themselves at the same input position,
    /// directly or through other rules (lookahead included).
    pub fn left_recursive_rules(&self) -> HashSet<RuleId> {
        let nullable = self.nullable_rules();
        let edges: Vec<Vec<RuleId>> = self
            .rules
            .iter()
            .map(|r| {
                let mut out = Vec::new();
                leftmost_refs(&r.body, &nullable, &mut out);
                out
            })
            .collect();
        let mut result = HashSet::new();
        for start in 0..self.rules.len() {
            let mut seen = vec![false; self.rules.len()];
            let mut stack: Vec<RuleId> = edges[start].clone();
            while let Some(r) = stack.pop() {
                if r.index() == start {
                    result.insert(RuleId(start as u32));
                    break;
                }
                if !std::mem::replace(&mut seen[r.index()], true) {
                    stack.extend(edges[r.index()].iter().copied());
                }
            }
        }
        result
    }
}

fn clause_nullable(c: &Clause, nullable: &[bool]) -> bool {
    match c {
        Clause::Seq(xs) => xs.iter().all(|x| clause_nullable(x, nullable)),
        Clause::First(xs) => xs.iter().any(|x| clause_nullable(x, nullable)),
        Clause::OneOrMore(x) => clause_nullable(x, nullable),
        Clause::NotFollowedBy(_) | Clause::Epsilon => true,
        Clause::Terminal(_) => false,
        Clause::RuleRef { rule, .. } => nullable[rule.index()],
    }
}

fn leftmost_refs(c: &Clause, nullable: &[bool], out: &mut Vec<RuleId>) {
    match c {
        Clause::Seq(xs) => {
            for x in xs {
                leftmost_refs(x, nullable, out);
                if !clause_nullable(x, nullable) {
                    break;
                }
            }
        }
        Clause::First(xs) => xs.iter().for_each(|x| leftmost_refs(x, nullable, out)),
        Clause::OneOrMore(x) | Clause::NotFollowedBy(x) => leftmost_refs(x, nullable, out),
        Clause::RuleRef { rule, .. } => out.push(*rule),
        Clause::Terminal(_) | Clause::Epsilon => {}
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Char(c) => write!(f, "'{}'", escape_literal(&c.to_string())),
            Terminal::Literal(s) => write!(f, "'{}'", escape_literal(s)),
            Terminal::Range(lo, hi) if lo == hi => write!(f, "[{}]", escape_class(*lo)),
            Terminal::Range(lo, hi) => write!(f, "[{}-{}]", escape_class(*lo), escape_class(*hi)),
        }
    }
}

pub(crate) fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\'' => out.push_str("\\'"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

fn escape_class(c: char) -> String {
    match c {
        ']' => "\\]".into(),
        '[' => "\\[".into(),
        '-' => "\\-".into(),
        '\\' => "\\\\".into(),
        '\n' => "\\n".into(),
        '\r' => "\\r".into(),
        '\t' => "\\t".into(),
        c => c.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Expr {
        Expr::ch('a')
    }

    #[test]
    fn optional_desugars_to_choice_with_epsilon() {
        assert_eq!(desugar(&a().optional()), Expr::First(vec![a(), Expr::Epsilon]));
    }

    #[test]
    fn zero_or_more_desugars_to_one_or_more_or_epsilon() {
        assert_eq!(
            desugar(&a().zero_or_more()),
            Expr::First(vec![Expr::OneOrMore(Box::new(a())), Expr::Epsilon])
        );
    }

    #[test]
    fn followed_by_desugars_to_double_negation() {
        assert_eq!(
            desugar(&a().followed_by()),
            Expr::NotFollowedBy(Box::new(Expr::NotFollowedBy(Box::new(a()))))
        );
    }

    #[test]
    fn desugar_is_deep() {
        let e = Expr::seq(vec![a().optional().zero_or_more(), Expr::rule("B").followed_by()]);
        let d = desugar(&e);
        assert!(d.is_principal());
        assert!(!e.is_principal());
    }

    #[test]
    fn desugar_idempotent_on_sample() {
        let e = Expr::first(vec![a().optional(), Expr::seq(vec![a().zero_or_more(), a().followed_by()])]);
        let once = desugar(&e);
        assert_eq!(desugar(&once), once);
    }

    #[test]
    fn builders_flatten_and_collapse() {
        let s = Expr::seq(vec![a(), Expr::seq(vec![a(), a()])]);
        assert_eq!(s, Expr::Seq(vec![a(), a(), a()]));
        assert_eq!(Expr::seq(vec![a()]), a());
        assert_eq!(Expr::first(vec![]), Expr::Epsilon);
        let f = Expr::first(vec![Expr::first(vec![a(), Expr::ch('b')]), Expr::ch('c')]);
        assert_eq!(f, Expr::First(vec![a(), Expr::ch('b'), Expr::ch('c')]));
    }

    #[test]
    fn lit_collapses_single_char() {
        assert_eq!(Expr::lit("x"), Expr::ch('x'));
        assert_eq!(Expr::lit("xy"), Expr::Terminal(Terminal::Literal("xy".into())));
    }

    #[test]
    fn resolve_binds_self_reference() {
        let g = GrammarDef::new()
            .rule(
                "E",
                Expr::first(vec![
                    Expr::seq(vec![Expr::rule("E"), Expr::ch('+'), Expr::rule("T")]),
                    Expr::rule("T"),
                ]),
            )
            .rule("T", Expr::ch('1'))
            .resolve()
            .unwrap();
        let e = g.rule_id("E").unwrap();
        assert_eq!(g.start(), e);
        match &g.rule(e).body {
            Clause::First(alts) => match &alts[0] {
                Clause::Seq(items) => assert_eq!(
                    items[0],
                    Clause::RuleRef {
                        name: "E".into(),
                        rule: e
                    }
                ),
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
        assert!(g.left_recursive_rules().contains(&e));
    }

    #[test]
    fn resolve_without_references() {
        let g = GrammarDef::new().rule("A", Expr::ch('x')).resolve().unwrap();
        assert_eq!(g.rules().len(), 1);
        assert_eq!(g.rule(g.start()).body, Clause::Terminal(Terminal::Char('x')));
        assert!(g.left_recursive_rules().is_empty());
    }

    #[test]
    fn resolve_reports_dangling_reference() {
        let err = GrammarDef::new().rule("A", Expr::rule("B")).resolve().unwrap_err();
        assert_eq!(
            err,
            GrammarError::UnknownRule {
                name: "B".into(),
                referenced_from: "A".into()
            }
        );
    }

    #[test]
    fn resolve_reports_missing_start() {
        let err = GrammarDef::new()
            .rule("A", Expr::ch('x'))
            .with_start("S")
            .resolve()
            .unwrap_err();
        assert_eq!(err, GrammarError::MissingStartRule("S".into()));
    }

    #[test]
    fn resolve_rejects_duplicates_and_empty_literals() {
        let dup = GrammarDef::new().rule("A", a()).rule("A", a()).resolve();
        assert_eq!(dup.unwrap_err(), GrammarError::DuplicateRule("A".into()));
        let empty = GrammarDef::new()
            .rule("A", Expr::Terminal(Terminal::Literal(String::new())))
            .resolve();
        assert_eq!(empty.unwrap_err(), GrammarError::EmptyLiteral("A".into()));
        assert_eq!(GrammarDef::new().resolve().unwrap_err(), GrammarError::Empty);
    }

    #[test]
    fn resolution_is_repeatable() {
        let def = GrammarDef::new()
            .rule("A", Expr::seq(vec![Expr::rule("B"), Expr::rule("A").optional()]))
            .rule("B", Expr::ch('b'));
        assert_eq!(def.resolve().unwrap(), def.resolve().unwrap());
    }

    #[test]
    fn indirect_left_recursion_detected() {
        let g = GrammarDef::new()
            .rule("A", Expr::first(vec![Expr::seq(vec![Expr::rule("B"), a()]), a()]))
            .rule("B", Expr::seq(vec![Expr::ch('x').optional(), Expr::rule("A")]))
            .resolve()
            .unwrap();
        let lr = g.left_recursive_rules();
        assert_eq!(lr.len(), 2);
    }

    #[test]
    fn terminal_matching() {
        let input: Vec<char> = "xab".chars().collect();
        assert_eq!(Terminal::Literal("ab".into()).match_at(&input, 1), Some(2));
        assert_eq!(Terminal::Literal("ab".into()).match_at(&input, 2), None);
        assert_eq!(Terminal::Range('a', 'z').match_at(&input, 0), Some(1));
        assert_eq!(Terminal::Char('x').match_at(&input, 3), None);
        assert_eq!(Terminal::Literal("abc".into()).width(), 3);
    }

    #[test]
    fn grammar_size_counts_rules_and_clauses() {
        let g = GrammarDef::new()
            .rule("A", Expr::seq(vec![a(), Expr::rule("A").optional()]))
            .resolve()
            .unwrap();
        // A: Seq(a, First(Ref, Eps)) -> 5 clauses, plus 1 rule.
        assert_eq!(g.size(), 6);
    }
}
