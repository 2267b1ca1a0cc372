//! Rendering parse trees as S-expressions or JSON, and listing their errors.
//!
//! By default a rule reference is shown as the rule name with the body's
//! items inlined: sequence, choice and repetition nodes dissolve into their
//! children, and empty matches (epsilon, negative lookahead) are dropped.
//! Raw mode prints every node. Both writers are iterative so left-recursive
//! trees of any depth render without recursion.

use std::fmt;

use crate::engine::{ErrorKind, Match, MatchKind};
use crate::grammar::Grammar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFormat {
    SExpr,
    Json,
}

impl std::str::FromStr for TreeFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sexpr" => Ok(TreeFormat::SExpr),
            "json" => Ok(TreeFormat::Json),
            other => Err(format!("unknown format `{other}` (expected sexpr or json)")),
        }
    }
}

pub fn serialize_tree(root: &Match, grammar: &Grammar, input: &[char], format: TreeFormat, raw: bool) -> String {
    match format {
        TreeFormat::SExpr => to_sexpr(root, grammar, input, raw),
        TreeFormat::Json => to_json(root, grammar, input, raw),
    }
}

fn quote(input: &[char], m: &Match) -> String {
    let text: String = input[m.pos..m.end()].iter().collect();
    serde_json::to_string(&text).expect("strings always serialize")
}

fn kind_label(kind: MatchKind) -> &'static str {
    match kind {
        MatchKind::Seq => "seq",
        MatchKind::First => "first",
        MatchKind::OneOrMore => "one-or-more",
        MatchKind::NotFollowedBy => "not-followed-by",
        MatchKind::Terminal => "terminal",
        MatchKind::Epsilon => "epsilon",
        MatchKind::Rule(_) => "rule",
        MatchKind::SyntaxError(_) => "error",
        MatchKind::Root => "root",
    }
}

/// How a node takes part in the flattened view.
enum Role {
    /// Printed as a node with children.
    Open,
    /// Printed as a leaf.
    Leaf,
    /// Replaced by its children.
    Dissolve,
    Drop,
}

fn role(m: &Match, top: bool, raw: bool) -> Role {
    match m.kind {
        MatchKind::Terminal | MatchKind::SyntaxError(_) => Role::Leaf,
        _ if raw => {
            if m.children.is_empty() {
                Role::Leaf
            } else {
                Role::Open
            }
        }
        MatchKind::Rule(_) => Role::Open,
        MatchKind::Root if top => Role::Open,
        MatchKind::Seq | MatchKind::First | MatchKind::OneOrMore | MatchKind::Root => Role::Dissolve,
        MatchKind::Epsilon | MatchKind::NotFollowedBy => Role::Drop,
    }
}

enum Step<'a> {
    Visit(&'a Match, bool),
    Close,
}

/// `(Rule pos len items…)`, terminals as quoted text, errors as
/// `(ERROR pos len "text")`, a partial parse as `(ROOT 0 n …)`.
pub fn to_sexpr(root: &Match, grammar: &Grammar, input: &[char], raw: bool) -> String {
    let mut out = String::new();
    let mut stack = vec![Step::Visit(root, true)];
    while let Some(step) = stack.pop() {
        let (m, top) = match step {
            Step::Close => {
                out.push(')');
                continue;
            }
            Step::Visit(m, top) => (m, top),
        };
        let role = role(m, top, raw);
        if matches!(role, Role::Open | Role::Leaf) && !out.is_empty() && !out.ends_with('(') {
            out.push(' ');
        }
        match role {
            Role::Drop => {}
            Role::Dissolve => stack.extend(m.children.iter().rev().map(|c| Step::Visit(c, false))),
            Role::Leaf => match m.kind {
                MatchKind::Terminal if !raw => out.push_str(&quote(input, m)),
                MatchKind::SyntaxError(_) => {
                    out.push_str(&format!("(ERROR {} {} {})", m.pos, m.len, quote(input, m)));
                }
                MatchKind::Terminal => out.push_str(&format!("(:terminal {} {} {})", m.pos, m.len, quote(input, m))),
                other => out.push_str(&format!("(:{} {} {})", kind_label(other), m.pos, m.len)),
            },
            Role::Open => {
                let label = match m.kind {
                    MatchKind::Rule(id) => grammar.rule_name(id).to_string(),
                    MatchKind::Root => "ROOT".to_string(),
                    other => format!(":{}", kind_label(other)),
                };
                out.push_str(&format!("({label} {} {}", m.pos, m.len));
                if m.eof_deleted && raw {
                    out.push_str(" :eof-deleted");
                }
                stack.push(Step::Close);
                stack.extend(m.children.iter().rev().map(|c| Step::Visit(c, false)));
            }
        }
    }
    out
}

/// One JSON object per node with fields `kind`, `rule`, `pos`, `len`,
/// `complete`, `error`, `children`, plus `text` on terminals and
/// `errorKind` on errors.
pub fn to_json(root: &Match, grammar: &Grammar, input: &[char], raw: bool) -> String {
    let mut out = String::new();
    // One flag per open `children` array: whether it is still empty.
    let mut first: Vec<bool> = Vec::new();
    let mut stack = vec![Step::Visit(root, true)];
    while let Some(step) = stack.pop() {
        let (m, top) = match step {
            Step::Close => {
                out.push_str("]}");
                first.pop();
                continue;
            }
            Step::Visit(m, top) => (m, top),
        };
        let role = role(m, top, raw);
        match role {
            Role::Drop => continue,
            Role::Dissolve => {
                stack.extend(m.children.iter().rev().map(|c| Step::Visit(c, false)));
                continue;
            }
            Role::Open | Role::Leaf => {}
        }
        if let Some(f) = first.last_mut() {
            if !*f {
                out.push(',');
            }
            *f = false;
        }
        let rule = match m.kind {
            MatchKind::Rule(id) => serde_json::to_string(grammar.rule_name(id)).expect("strings always serialize"),
            _ => "null".to_string(),
        };
        out.push_str(&format!(
            "{{\"kind\":\"{}\",\"rule\":{},\"pos\":{},\"len\":{},\"complete\":{},\"error\":{}",
            kind_label(m.kind),
            rule,
            m.pos,
            m.len,
            m.complete,
            m.is_error()
        ));
        if m.kind == MatchKind::Terminal {
            out.push_str(&format!(",\"text\":{}", quote(input, m)));
        }
        if let MatchKind::SyntaxError(k) = m.kind {
            out.push_str(&format!(",\"errorKind\":\"{}\"", ErrorReportKind::from(k)));
        }
        if m.eof_deleted {
            out.push_str(",\"eofDeleted\":true");
        }
        out.push_str(",\"children\":[");
        match role {
            Role::Open => {
                first.push(true);
                stack.push(Step::Close);
                stack.extend(m.children.iter().rev().map(|c| Step::Visit(c, false)));
            }
            _ => out.push_str("]}"),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorReportKind {
    Skip,
    Trailing,
    Total,
    EofDelete,
}

impl From<ErrorKind> for ErrorReportKind {
    fn from(k: ErrorKind) -> Self {
        match k {
            ErrorKind::Skip => ErrorReportKind::Skip,
            ErrorKind::Trailing => ErrorReportKind::Trailing,
            ErrorKind::Total => ErrorReportKind::Total,
        }
    }
}

impl fmt::Display for ErrorReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorReportKind::Skip => "skip",
            ErrorReportKind::Trailing => "trailing",
            ErrorReportKind::Total => "total",
            ErrorReportKind::EofDelete => "eof-delete",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorReport {
    pub pos: usize,
    pub len: usize,
    pub kind: ErrorReportKind,
}

/// Every error node, plus a zero-length entry at the end of each sequence
/// cut short at end of input, ordered by position.
pub fn collect_errors(root: &Match) -> Vec<ErrorReport> {
    let mut errors = Vec::new();
    root.walk(|m| {
        if let MatchKind::SyntaxError(k) = m.kind {
            errors.push(ErrorReport {
                pos: m.pos,
                len: m.len,
                kind: k.into(),
            });
        }
        if m.eof_deleted {
            errors.push(ErrorReport {
                pos: m.end(),
                len: 0,
                kind: ErrorReportKind::EofDelete,
            });
        }
    });
    errors.sort_by_key(|e| e.pos);
    errors
}

pub fn has_errors(root: &Match) -> bool {
    let mut found = false;
    root.walk(|m| found |= m.is_error() || m.eof_deleted);
    found
}
