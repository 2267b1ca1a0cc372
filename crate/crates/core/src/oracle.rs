//! A deliberately naive PEG interpreter used as a reference in tests.
//!
//! No memo table and no recovery. Left recursion is handled by keeping the
//! rule invocations currently on the call stack: re-entering one returns its
//! current seed, and the outermost invocation re-evaluates its body until
//! the match stops growing. Exponential in the worst case, hence the step
//! budget.

use std::collections::HashMap;

use crate::engine::{Match, MatchKind};
use crate::grammar::{Clause, Grammar, RuleId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: MatchKind,
    pub pos: usize,
    pub len: usize,
    pub children: Vec<Node>,
}

impl Node {
    /// The engine's tree with flags dropped, for comparison.
    pub fn from_match(m: &Match) -> Node {
        Node {
            kind: m.kind,
            pos: m.pos,
            len: m.len,
            children: m.children.iter().map(|c| Node::from_match(c)).collect(),
        }
    }

    /// Rule-labelled bracketing, e.g. `E(E(T) T)`, for readable assertions.
    pub fn rule_shape(&self, grammar: &Grammar) -> String {
        let mut inner = Vec::new();
        for c in &self.children {
            let s = c.rule_shape(grammar);
            if !s.is_empty() {
                inner.push(s);
            }
        }
        match self.kind {
            MatchKind::Rule(id) if inner.is_empty() => grammar.rule_name(id).to_string(),
            MatchKind::Rule(id) => format!("{}({})", grammar.rule_name(id), inner.join(" ")),
            _ => inner.join(" "),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExceeded;

struct Oracle<'g> {
    grammar: &'g Grammar,
    input: Vec<char>,
    budget: u64,
    /// Rule invocations in progress: current seed and whether it was used.
    active: HashMap<(RuleId, usize), (Option<Node>, bool)>,
}

/// Matches the start rule at position 0 within `budget` steps.
pub fn oracle_parse(grammar: &Grammar, input: &str, budget: u64) -> Result<Option<Node>, BudgetExceeded> {
    let mut o = Oracle {
        grammar,
        input: input.chars().collect(),
        budget,
        active: HashMap::new(),
    };
    o.rule(grammar.start(), 0)
}

impl Oracle<'_> {
    fn tick(&mut self) -> Result<(), BudgetExceeded> {
        if self.budget == 0 {
            return Err(BudgetExceeded);
        }
        self.budget -= 1;
        Ok(())
    }

    fn rule(&mut self, id: RuleId, pos: usize) -> Result<Option<Node>, BudgetExceeded> {
        self.tick()?;
        if let Some((seed, used)) = self.active.get_mut(&(id, pos)) {
            *used = true;
            return Ok(seed.clone().map(|body| wrap_rule(id, body)));
        }
        self.active.insert((id, pos), (None, false));
        let body = &self.grammar.rule(id).body;
        let result = loop {
            let new = self.clause(body, pos);
            let new = match new {
                Ok(n) => n,
                Err(e) => {
                    self.active.remove(&(id, pos));
                    return Err(e);
                }
            };
            let (seed, used) = self.active.get(&(id, pos)).unwrap().clone();
            if !used {
                break new;
            }
            let grew = match (&new, &seed) {
                (Some(n), Some(s)) => n.len > s.len,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if !grew {
                break seed;
            }
            self.active.insert((id, pos), (new, true));
        };
        self.active.remove(&(id, pos));
        Ok(result.map(|body| wrap_rule(id, body)))
    }

    fn clause(&mut self, c: &Clause, pos: usize) -> Result<Option<Node>, BudgetExceeded> {
        self.tick()?;
        let leaf = |kind, len| Node {
            kind,
            pos,
            len,
            children: Vec::new(),
        };
        Ok(match c {
            Clause::Terminal(t) => t.match_at(&self.input, pos).map(|len| leaf(MatchKind::Terminal, len)),
            Clause::Epsilon => Some(leaf(MatchKind::Epsilon, 0)),
            Clause::RuleRef { rule, .. } => self.rule(*rule, pos)?,
            Clause::NotFollowedBy(inner) => match self.clause(inner, pos)? {
                Some(_) => None,
                None => Some(leaf(MatchKind::NotFollowedBy, 0)),
            },
            Clause::Seq(items) => {
                let mut children = Vec::new();
                let mut p = pos;
                for item in items {
                    match self.clause(item, p)? {
                        Some(m) => {
                            p += m.len;
                            children.push(m);
                        }
                        None => return Ok(None),
                    }
                }
                Some(Node {
                    kind: MatchKind::Seq,
                    pos,
                    len: p - pos,
                    children,
                })
            }
            Clause::First(alts) => {
                let mut found = None;
                for alt in alts {
                    if let Some(m) = self.clause(alt, pos)? {
                        found = Some(Node {
                            kind: MatchKind::First,
                            pos,
                            len: m.len,
                            children: vec![m],
                        });
                        break;
                    }
                }
                found
            }
            Clause::OneOrMore(inner) => {
                let mut children = Vec::new();
                let mut p = pos;
                while let Some(m) = self.clause(inner, p)? {
                    p += m.len;
                    let empty = m.len == 0;
                    children.push(m);
                    if empty {
                        break;
                    }
                }
                (!children.is_empty()).then(|| Node {
                    kind: MatchKind::OneOrMore,
                    pos,
                    len: p - pos,
                    children,
                })
            }
        })
    }
}

fn wrap_rule(id: RuleId, body: Node) -> Node {
    Node {
        kind: MatchKind::Rule(id),
        pos: body.pos,
        len: body.len,
        children: vec![body],
    }
}
