//! Two-phase parsing: an error-free first pass, then, only when that pass
//! does not span the input, a second pass that may skip input.
//!
//! Recovery happens at three kinds of site: a sequence element after the
//! first fails (skip ahead to where the element matches again, or drop the
//! rest of the sequence at end of input), a repetition whose next element
//! fails part-way through, and the start rule itself failing at position 0.
//! Skips never cross the *bound*: the clause that follows in the nearest
//! enclosing sequence, nor the bound of that sequence itself. A failure caused by a left-recursion seed never
//! triggers a skip.

use std::rc::Rc;

use crate::engine::{ErrorKind, Match, MatchKind, MatchResult, MemoEntry, Mismatch, ParseSession, ParseStats};
use crate::grammar::{Clause, Grammar};

pub const DEFAULT_MAX_SKIP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoveryConfig {
    /// Longest run of input a single skip may cover. At least 1.
    pub max_skip: usize,
    /// When false the parser stops after the first pass.
    pub enabled: bool,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            max_skip: DEFAULT_MAX_SKIP,
            enabled: true,
        }
    }
}

impl RecoveryConfig {
    /// `None` when `max_skip` is 0.
    pub fn new(max_skip: usize) -> Option<Self> {
        (max_skip >= 1).then_some(RecoveryConfig { max_skip, enabled: true })
    }

    pub fn disabled() -> Self {
        RecoveryConfig {
            enabled: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Seq,
    First,
    Repetition,
}

/// Completeness of a composite match from its children's flags.
///
/// A sequence is complete when every child is and no skip was made; a choice
/// takes its chosen child's flag (pass a one-element slice); a repetition is
/// complete when every child is and it was not cut short at a bound.
pub fn completeness_of(kind: OperatorKind, child_flags: &[bool], used_recovery: bool, truncated: bool) -> bool {
    let all = child_flags.iter().all(|&c| c);
    match kind {
        OperatorKind::Seq => all && !used_recovery,
        OperatorKind::First => child_flags.first().copied().unwrap_or(false),
        OperatorKind::Repetition => all && !truncated,
    }
}

/// The bound for child `i` of a sequence: its next sibling, or the bound
/// inherited from the enclosing sequence for the last child.
pub fn bound_for<'a>(children: &'a [Clause], i: usize, inherited: Option<&'a Clause>) -> Option<&'a Clause> {
    children.get(i + 1).or(inherited)
}

/// Whether a cached entry may answer a lookup made in the given phase:
/// complete matches are valid everywhere, anything else only in the phase
/// that produced it.
pub fn cache_valid(entry: &MemoEntry, in_recovery_phase: bool) -> bool {
    let complete = matches!(&entry.result, Some(MatchResult::Match(m)) if m.complete);
    complete || entry.cached_in_recovery_phase == in_recovery_phase
}

/// Turns a top-level result into a tree spanning `[0, n)`.
pub fn span_wrap(result: Option<Rc<Match>>, n: usize) -> Rc<Match> {
    let Some(m) = result else {
        return Rc::new(Match::syntax_error(ErrorKind::Total, 0, n));
    };
    if m.len == n {
        return m;
    }
    let trailing = Rc::new(Match::syntax_error(ErrorKind::Trailing, m.len, n - m.len));
    let children = if m.kind == MatchKind::Root {
        let mut c = m.children.clone();
        c.push(trailing);
        c
    } else {
        vec![m, trailing]
    };
    Rc::new(Match {
        kind: MatchKind::Root,
        pos: 0,
        len: n,
        children,
        complete: false,
        eof_deleted: false,
    })
}

#[derive(Debug, Clone)]
pub enum SkipOutcome {
    /// The clause matches again after skipping `skip` characters.
    Resumed { skip: usize, resumed: Rc<Match> },
    /// The bound matched (non-empty) after `skip` characters, first.
    BoundReached { skip: usize },
    NoRepair,
}

/// A finished parse: a tree covering the whole input, plus counters.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub tree: Rc<Match>,
    pub stats: ParseStats,
}

impl ParseOutcome {
    pub fn has_errors(&self) -> bool {
        crate::tree::has_errors(&self.tree)
    }
}

/// Parses `input` from the grammar's start rule.
pub fn parse(grammar: &Grammar, input: &str, config: RecoveryConfig) -> ParseOutcome {
    let mut session = ParseSession::new(grammar, input, config);
    let tree = session.two_phase_parse();
    ParseOutcome {
        tree,
        stats: session.stats().clone(),
    }
}

impl<'g> ParseSession<'g> {
    /// Looks for the smallest `k` in `1..=max_skip` at which `clause` matches
    /// at `pos + k`, giving up early if a bound matches first: `bound` is
    /// the failed clause's next sibling, `outer` the bound of the sequence
    /// containing it, so a skip never swallows the enclosing construct's
    /// closing delimiter either.
    pub(crate) fn skip_search(
        &mut self,
        clause: &'g Clause,
        pos: usize,
        bound: Option<&'g Clause>,
        outer: Option<&'g Clause>,
        trigger: Mismatch,
    ) -> SkipOutcome {
        if trigger.from_lr_context {
            self.stats.lr_skip_violations += 1;
        }
        self.stats.skip_searches += 1;
        if self.bound_at(bound, outer, pos) {
            return SkipOutcome::BoundReached { skip: 0 };
        }
        let limit = self.config.max_skip.min(self.input.len() - pos);
        for k in 1..=limit {
            if let MatchResult::Match(probed) = self.probe(clause, pos + k) {
                let resumed = match self.match_clause(clause, pos + k, bound) {
                    MatchResult::Match(m) => m,
                    MatchResult::Mismatch(_) => probed,
                };
                self.stats.recoveries += 1;
                return SkipOutcome::Resumed { skip: k, resumed };
            }
            if self.bound_at(bound, outer, pos + k) {
                return SkipOutcome::BoundReached { skip: k };
            }
        }
        SkipOutcome::NoRepair
    }

    // Only a non-empty bound match counts: a nullable bound matches
    // everywhere and would block every skip.
    fn bound_at(&mut self, bound: Option<&'g Clause>, outer: Option<&'g Clause>, pos: usize) -> bool {
        let same = matches!((bound, outer), (Some(a), Some(b)) if std::ptr::eq(a, b));
        let mut hit = |b: Option<&'g Clause>| match b {
            Some(b) => matches!(self.probe(b, pos), MatchResult::Match(m) if m.len > 0),
            None => false,
        };
        hit(bound) || (!same && hit(outer))
    }

    fn rule_wrapper(&self, body: Rc<Match>) -> Rc<Match> {
        Rc::new(Match {
            kind: MatchKind::Rule(self.grammar.start()),
            pos: body.pos,
            len: body.len,
            complete: body.complete,
            children: vec![body],
            eof_deleted: false,
        })
    }

    fn start_match(&mut self) -> Option<Rc<Match>> {
        let start = self.grammar.start();
        match self.match_rule(start, 0) {
            MatchResult::Match(m) => Some(self.rule_wrapper(m)),
            MatchResult::Mismatch(_) => None,
        }
    }

    /// Runs the first pass and, if it does not span the input and recovery
    /// is enabled, the recovery pass. The result always spans the input.
    pub fn two_phase_parse(&mut self) -> Rc<Match> {
        let n = self.input.len();
        self.in_recovery_phase = false;
        let first = self.start_match();
        if let Some(m) = &first {
            if m.len == n {
                return m.clone();
            }
        }
        if !self.config.enabled {
            return span_wrap(first, n);
        }

        self.in_recovery_phase = true;
        self.stats.phase2_entered = true;
        let second = match self.start_match() {
            Some(m) => Some(m),
            None => self.recover_start(),
        };
        self.in_recovery_phase = false;
        span_wrap(second, n)
    }

    /// The start rule failed outright: skip leading input until it matches.
    fn recover_start(&mut self) -> Option<Rc<Match>> {
        let start = self.grammar.start();
        let limit = self.config.max_skip.min(self.input.len());
        self.stats.skip_searches += 1;
        for k in 1..=limit {
            let MatchResult::Match(probed) = self.probe_rule(start, k) else {
                continue;
            };
            let body = match self.match_rule(start, k) {
                MatchResult::Match(m) => m,
                MatchResult::Mismatch(_) => probed,
            };
            self.stats.recoveries += 1;
            let wrapped = self.rule_wrapper(body);
            return Some(Rc::new(Match {
                kind: MatchKind::Root,
                pos: 0,
                len: k + wrapped.len,
                children: vec![Rc::new(Match::syntax_error(ErrorKind::Skip, 0, k)), wrapped],
                complete: false,
                eof_deleted: false,
            }));
        }
        None
    }
}
