//! Memoized matching with left-recursion support.
//!
//! Rule-level results are cached per `(rule, pos)` in a [`MemoEntry`]. An
//! entry reached again while it is still being computed (`in_rec_path`) is a
//! left-recursive cycle: it answers with a MISMATCH seed and records
//! `found_left_rec`, and the outer evaluation then re-runs the rule body,
//! growing the match until its length stops increasing. Every growth step
//! bumps the per-position `cycle_depth_for_pos` counter, which makes all
//! entries at that position stale so they are recomputed against the new
//! seed. Other names for the same fields: `inLeftRecCycle` for
//! `found_left_rec`, `version`/`memoVersion` for the cycle depth.
//!
//! Clauses other than rule references are matched directly, without caching.

use std::collections::HashMap;
use std::rc::Rc;

use crate::grammar::{Clause, Grammar, RuleId, Terminal};
use crate::recovery::{bound_for, cache_valid, completeness_of, OperatorKind, RecoveryConfig, SkipOutcome};

/// What produced a [`SyntaxError`](MatchKind::SyntaxError) node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    /// Input skipped by recovery before a resumed match.
    Skip,
    /// Unconsumed input after the top-level match.
    Trailing,
    /// Nothing matched; the node covers the whole input.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchKind {
    Seq,
    First,
    OneOrMore,
    NotFollowedBy,
    Terminal,
    Epsilon,
    /// A rule reference; the single child is the rule body's match.
    Rule(RuleId),
    SyntaxError(ErrorKind),
    /// Top-level wrapper holding a match plus leading/trailing error nodes.
    Root,
}

/// A successful match of some clause over `input[pos..pos + len]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub kind: MatchKind,
    pub pos: usize,
    pub len: usize,
    pub children: Vec<Rc<Match>>,
    /// False when recovery was used below this node, or (for results of
    /// the error-free first pass) when a failure was absorbed below this
    /// node that recovery might have repaired.
    pub complete: bool,
    /// Set on a sequence whose trailing elements were dropped at end of input.
    pub eof_deleted: bool,
}

impl Match {
    pub fn leaf(kind: MatchKind, pos: usize, len: usize) -> Self {
        Match {
            kind,
            pos,
            len,
            children: Vec::new(),
            complete: !matches!(kind, MatchKind::SyntaxError(_)),
            eof_deleted: false,
        }
    }

    pub fn syntax_error(kind: ErrorKind, pos: usize, len: usize) -> Self {
        Self::leaf(MatchKind::SyntaxError(kind), pos, len)
    }

    pub fn end(&self) -> usize {
        self.pos + self.len
    }

    pub fn is_error(&self) -> bool {
        matches!(self.kind, MatchKind::SyntaxError(_))
    }

    /// Depth-first pre-order traversal without recursion.
    pub fn walk(&self, mut f: impl FnMut(&Match)) {
        let mut stack: Vec<&Match> = vec![self];
        while let Some(m) = stack.pop() {
            f(m);
            stack.extend(m.children.iter().rev().map(|c| c.as_ref()));
        }
    }
}

// Left-recursive parses nest one level per growth step, so trees can be
// far deeper than the call stack allows to drop recursively.
impl Drop for Match {
    fn drop(&mut self) {
        let mut stack = std::mem::take(&mut self.children);
        while let Some(child) = stack.pop() {
            if let Ok(mut m) = Rc::try_unwrap(child) {
                stack.append(&mut m.children);
            }
        }
    }
}

/// The MISMATCH value, with flags the recovery pass relies on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Mismatch {
    /// Produced by a left-recursion seed rather than a genuine failure.
    pub from_lr_context: bool,
    /// Some sequence failed after matching at least one element before end
    /// of input, so recovery could turn this into a match.
    pub recoverable: bool,
}

#[derive(Debug, Clone)]
pub enum MatchResult {
    Match(Rc<Match>),
    Mismatch(Mismatch),
}

impl MatchResult {
    pub fn mismatch() -> Self {
        MatchResult::Mismatch(Mismatch::default())
    }

    pub fn is_match(&self) -> bool {
        matches!(self, MatchResult::Match(_))
    }

    pub fn as_match(&self) -> Option<&Rc<Match>> {
        match self {
            MatchResult::Match(m) => Some(m),
            MatchResult::Mismatch(_) => None,
        }
    }

    /// Match length, with MISMATCH ordered below every real match.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> isize {
        match self {
            MatchResult::Match(m) => m.len as isize,
            MatchResult::Mismatch(_) => -1,
        }
    }

    fn from_match(m: Match) -> Self {
        MatchResult::Match(Rc::new(m))
    }
}

/// Per-`(rule, pos)` cache cell.
#[derive(Debug, Clone, Default)]
pub struct MemoEntry {
    pub result: Option<MatchResult>,
    pub in_rec_path: bool,
    pub found_left_rec: bool,
    pub cycle_depth: u32,
    pub cached_in_recovery_phase: bool,
}

/// Instrumentation counters for one session.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseStats {
    /// Rule body evaluations, indexed by phase (0 discovery, 1 recovery).
    pub rule_body_evaluations: [u64; 2],
    /// Characters examined by terminals, indexed by phase.
    pub char_inspections: [u64; 2],
    pub memo_hits: u64,
    /// Complete discovery results served to the recovery phase.
    pub cross_phase_reuse: u64,
    /// Incomplete discovery results refused by the recovery phase.
    pub cross_phase_rejections: u64,
    /// Incomplete discovery results served to the recovery phase. Always 0.
    pub incomplete_cross_phase_returns: u64,
    pub expansion_iterations: u64,
    /// Most body evaluations performed by a single memo entry loop.
    pub max_loop_iterations: u64,
    pub probes: u64,
    pub skip_searches: u64,
    /// Skips that led to a resumed match.
    pub recoveries: u64,
    pub eof_deletions: u64,
    /// Recovery sites skipped because the failure was a left-recursion seed.
    pub lr_recovery_blocked: u64,
    /// Skip searches entered on a left-recursion seed. Always 0.
    pub lr_skip_violations: u64,
    pub phase2_entered: bool,
}

/// State for parsing one input against one grammar.
///
/// Discovery (first pass and all probes) and recovery results live in
/// separate tables, each with its own cycle-depth counters, so a lookahead
/// made during recovery never disturbs recovery-phase left-recursion state.
pub struct ParseSession<'g> {
    pub(crate) grammar: &'g Grammar,
    pub(crate) input: Vec<char>,
    pub(crate) config: RecoveryConfig,
    pub(crate) memo: [HashMap<(RuleId, usize), MemoEntry>; 2],
    pub(crate) cycle_depth_for_pos: [Vec<u32>; 2],
    pub(crate) in_recovery_phase: bool,
    pub(crate) probe_depth: u32,
    pub(crate) stats: ParseStats,
}

impl<'g> ParseSession<'g> {
    pub fn new(grammar: &'g Grammar, input: &str, config: RecoveryConfig) -> Self {
        let input: Vec<char> = input.chars().collect();
        let n = input.len();
        ParseSession {
            grammar,
            input,
            config,
            memo: [HashMap::new(), HashMap::new()],
            cycle_depth_for_pos: [vec![0; n + 1], vec![0; n + 1]],
            in_recovery_phase: false,
            probe_depth: 0,
            stats: ParseStats::default(),
        }
    }

    pub fn grammar(&self) -> &'g Grammar {
        self.grammar
    }

    pub fn input(&self) -> &[char] {
        &self.input
    }

    pub fn stats(&self) -> &ParseStats {
        &self.stats
    }

    pub fn config(&self) -> &RecoveryConfig {
        &self.config
    }

    pub fn in_recovery_phase(&self) -> bool {
        self.in_recovery_phase
    }

    /// Switches between first-pass and recovery matching for subsequent
    /// calls. [`two_phase_parse`](Self::two_phase_parse) manages this itself.
    pub fn set_recovery_phase(&mut self, on: bool) {
        self.in_recovery_phase = on;
    }

    pub fn cycle_depth_for_pos(&self, recovery_phase: bool) -> &[u32] {
        &self.cycle_depth_for_pos[recovery_phase as usize]
    }

    /// Memo entries of one phase's table.
    pub fn memo_entries(&self, recovery_phase: bool) -> impl Iterator<Item = (&(RuleId, usize), &MemoEntry)> {
        self.memo[recovery_phase as usize].iter()
    }

    /// True when recovery actions are allowed at this point: the recovery
    /// phase is on and no probe is in progress.
    pub(crate) fn recovering(&self) -> bool {
        self.in_recovery_phase && self.probe_depth == 0
    }

    fn phase(&self) -> usize {
        self.recovering() as usize
    }

    /// Matches `rule` at `pos` through the memo table.
    pub fn match_rule(&mut self, rule: RuleId, pos: usize) -> MatchResult {
        self.match_rule_bounded(rule, pos, None)
    }

    pub(crate) fn match_rule_bounded(&mut self, rule: RuleId, pos: usize, bound: Option<&'g Clause>) -> MatchResult {
        assert!(pos <= self.input.len(), "position {pos} past end of input");
        let phase = self.phase();
        let key = (rule, pos);
        let current = self.cycle_depth_for_pos[phase][pos];
        let entry = self.memo[phase].entry(key).or_insert_with(|| MemoEntry {
            cached_in_recovery_phase: phase == 1,
            ..MemoEntry::default()
        });

        if let Some(result) = &entry.result {
            if entry.cycle_depth >= current && cache_valid(entry, phase == 1) {
                self.stats.memo_hits += 1;
                return result.clone();
            }
        }
        if entry.in_rec_path {
            // Re-entered while computing: a left-recursive cycle. The stored
            // result (the MISMATCH seed on first contact, otherwise the
            // previous growth step) is the answer.
            if entry.result.is_none() {
                entry.found_left_rec = true;
                entry.result = Some(MatchResult::Mismatch(Mismatch {
                    from_lr_context: true,
                    recoverable: false,
                }));
            }
            entry.cycle_depth = current;
            return entry.result.clone().unwrap();
        }
        if phase == 1 {
            if let Some(reused) = self.reuse_discovery_result(key) {
                return reused;
            }
        }

        self.memo[phase].get_mut(&key).unwrap().in_rec_path = true;
        let body = &self.grammar.rule(rule).body;
        let mut iterations = 0u64;
        let last_attempt;
        loop {
            self.stats.rule_body_evaluations[phase] += 1;
            iterations += 1;
            let new = self.match_clause(body, pos, bound);
            let entry = self.memo[phase].get_mut(&key).unwrap();
            if let Some(prev) = &entry.result {
                if new.len() <= prev.len() {
                    last_attempt = new;
                    break;
                }
            }
            entry.result = Some(new);
            if !entry.found_left_rec {
                last_attempt = MatchResult::Mismatch(Mismatch::default());
                break;
            }
            self.cycle_depth_for_pos[phase][pos] += 1;
            entry.cycle_depth = self.cycle_depth_for_pos[phase][pos];
            self.stats.expansion_iterations += 1;
        }
        self.stats.max_loop_iterations = self.stats.max_loop_iterations.max(iterations);

        let entry = self.memo[phase].get_mut(&key).unwrap();
        entry.in_rec_path = false;
        entry.cycle_depth = self.cycle_depth_for_pos[phase][pos];
        let head = entry.found_left_rec;
        let mut result = entry.result.take().unwrap();
        if let MatchResult::Mismatch(mm) = &mut result {
            // At the cycle head, a seed that was never improved on is a
            // genuine failure.
            if head && mm.from_lr_context {
                mm.from_lr_context = false;
                mm.recoverable = matches!(last_attempt, MatchResult::Mismatch(m) if m.recoverable);
            }
        }
        if phase == 0 && attempt_was_repairable(&last_attempt) {
            // The final growth attempt failed in a way recovery might fix.
            result = mark_incomplete(result);
        }
        entry.result = Some(result.clone());
        result
    }

    fn reuse_discovery_result(&mut self, key: (RuleId, usize)) -> Option<MatchResult> {
        let entry = self.memo[0].get(&key)?;
        let result = entry.result.as_ref()?;
        if entry.in_rec_path || entry.cycle_depth < self.cycle_depth_for_pos[0][key.1] {
            return None;
        }
        if cache_valid(entry, true) {
            if !matches!(result, MatchResult::Match(m) if m.complete) {
                self.stats.incomplete_cross_phase_returns += 1;
            }
            self.stats.cross_phase_reuse += 1;
            Some(result.clone())
        } else {
            self.stats.cross_phase_rejections += 1;
            None
        }
    }

    /// Matches with recovery suppressed, whatever the current phase. Rule
    /// results land in the discovery table.
    pub fn probe(&mut self, clause: &'g Clause, pos: usize) -> MatchResult {
        self.stats.probes += 1;
        self.probe_depth += 1;
        let result = self.match_clause(clause, pos, None);
        self.probe_depth -= 1;
        result
    }

    pub(crate) fn probe_rule(&mut self, rule: RuleId, pos: usize) -> MatchResult {
        self.stats.probes += 1;
        self.probe_depth += 1;
        let result = self.match_rule_bounded(rule, pos, None);
        self.probe_depth -= 1;
        result
    }

    /// Matches one clause at `pos`. `bound` is the clause that follows this
    /// one in the nearest enclosing sequence, if any.
    pub fn match_clause(&mut self, clause: &'g Clause, pos: usize, bound: Option<&'g Clause>) -> MatchResult {
        match clause {
            Clause::Terminal(t) => self.match_terminal(t, pos),
            Clause::Epsilon => MatchResult::from_match(Match::leaf(MatchKind::Epsilon, pos, 0)),
            Clause::RuleRef { rule, .. } => match self.match_rule_bounded(*rule, pos, bound) {
                MatchResult::Match(m) => MatchResult::from_match(Match {
                    kind: MatchKind::Rule(*rule),
                    pos,
                    len: m.len,
                    complete: m.complete,
                    children: vec![m],
                    eof_deleted: false,
                }),
                mismatch => mismatch,
            },
            Clause::Seq(children) => self.match_seq(children, pos, bound),
            Clause::First(alts) => self.match_first(alts, pos, bound),
            Clause::OneOrMore(child) => self.match_one_or_more(child, pos, bound),
            Clause::NotFollowedBy(child) => match self.probe(child, pos) {
                MatchResult::Match(_) => MatchResult::mismatch(),
                MatchResult::Mismatch(_) => MatchResult::from_match(Match::leaf(MatchKind::NotFollowedBy, pos, 0)),
            },
        }
    }

    fn match_terminal(&mut self, t: &Terminal, pos: usize) -> MatchResult {
        let remaining = self.input.len() - pos;
        self.stats.char_inspections[self.phase()] += t.width().min(remaining).max(1) as u64;
        match t.match_at(&self.input, pos) {
            Some(len) => MatchResult::from_match(Match::leaf(MatchKind::Terminal, pos, len)),
            None => MatchResult::mismatch(),
        }
    }

    fn match_seq(&mut self, children: &'g [Clause], pos: usize, bound: Option<&'g Clause>) -> MatchResult {
        let n = self.input.len();
        let mut matched = Vec::with_capacity(children.len());
        let mut flags = Vec::with_capacity(children.len());
        let mut used_recovery = false;
        let mut p = pos;
        for (i, child) in children.iter().enumerate() {
            let child_bound = bound_for(children, i, bound);
            let mm = match self.match_clause(child, p, child_bound) {
                MatchResult::Match(m) => {
                    p += m.len;
                    flags.push(m.complete);
                    matched.push(m);
                    continue;
                }
                MatchResult::Mismatch(mm) => mm,
            };
            if i > 0 && self.recovering() {
                if mm.from_lr_context {
                    self.stats.lr_recovery_blocked += 1;
                } else if p == n {
                    self.stats.eof_deletions += 1;
                    return MatchResult::from_match(Match {
                        kind: MatchKind::Seq,
                        pos,
                        len: p - pos,
                        children: matched,
                        complete: false,
                        eof_deleted: true,
                    });
                } else if let SkipOutcome::Resumed { skip, resumed } = self.skip_search(child, p, child_bound, bound, mm) {
                    matched.push(Rc::new(Match::syntax_error(ErrorKind::Skip, p, skip)));
                    flags.push(false);
                    p += skip + resumed.len;
                    flags.push(resumed.complete);
                    matched.push(resumed);
                    used_recovery = true;
                    continue;
                }
            }
            return MatchResult::Mismatch(Mismatch {
                from_lr_context: mm.from_lr_context,
                recoverable: mm.recoverable || (i > 0 && p < n && !mm.from_lr_context),
            });
        }
        MatchResult::from_match(Match {
            kind: MatchKind::Seq,
            pos,
            len: p - pos,
            children: matched,
            complete: completeness_of(OperatorKind::Seq, &flags, used_recovery, false),
            eof_deleted: false,
        })
    }

    fn match_first(&mut self, alts: &'g [Clause], pos: usize, bound: Option<&'g Clause>) -> MatchResult {
        let recovering = self.recovering();
        let mut any_recoverable = false;
        let mut all_lr = true;
        let mut best: Option<Rc<Match>> = None;
        for alt in alts {
            match self.match_clause(alt, pos, bound) {
                MatchResult::Match(m) if !recovering => {
                    // An earlier alternative that failed part-way might have
                    // matched under recovery.
                    let complete = completeness_of(OperatorKind::First, &[m.complete], false, false) && !any_recoverable;
                    return wrap_choice(m, complete);
                }
                MatchResult::Match(m) if m.complete => {
                    // A clean alternative wins unless an earlier repaired one
                    // got strictly further.
                    let chosen = match best {
                        Some(b) if b.len > m.len => b,
                        _ => m,
                    };
                    let complete = completeness_of(OperatorKind::First, &[chosen.complete], false, false);
                    return wrap_choice(chosen, complete);
                }
                MatchResult::Match(m) => {
                    if best.as_ref().is_none_or(|b| m.len > b.len) {
                        best = Some(m);
                    }
                }
                MatchResult::Mismatch(mm) => {
                    any_recoverable |= mm.recoverable;
                    all_lr &= mm.from_lr_context;
                }
            }
        }
        match best {
            Some(b) => wrap_choice(b, false),
            None => MatchResult::Mismatch(Mismatch {
                from_lr_context: all_lr,
                recoverable: any_recoverable,
            }),
        }
    }

    fn match_one_or_more(&mut self, child: &'g Clause, pos: usize, bound: Option<&'g Clause>) -> MatchResult {
        let n = self.input.len();
        let mut items: Vec<Rc<Match>> = Vec::new();
        let mut p = pos;
        let mut truncated = false;
        let mut tainted = false;
        loop {
            let mm = match self.match_clause(child, p, bound) {
                MatchResult::Match(m) => {
                    let len = m.len;
                    items.push(m);
                    p += len;
                    // A zero-length iteration would repeat forever.
                    if len == 0 {
                        break;
                    }
                    continue;
                }
                MatchResult::Mismatch(mm) => mm,
            };
            if items.is_empty() {
                return MatchResult::Mismatch(mm);
            }
            if mm.from_lr_context {
                if self.recovering() {
                    self.stats.lr_recovery_blocked += 1;
                }
            } else if mm.recoverable && p < n {
                if !self.recovering() {
                    tainted = true;
                } else {
                    match self.skip_search(child, p, bound, None, mm) {
                        SkipOutcome::Resumed { skip, resumed } => {
                            items.push(Rc::new(Match::syntax_error(ErrorKind::Skip, p, skip)));
                            p += skip + resumed.len;
                            let len = resumed.len;
                            items.push(resumed);
                            if len > 0 {
                                continue;
                            }
                        }
                        SkipOutcome::BoundReached { skip } if skip > 0 => {
                            items.push(Rc::new(Match::syntax_error(ErrorKind::Skip, p, skip)));
                            p += skip;
                            truncated = true;
                        }
                        _ => {}
                    }
                }
            }
            break;
        }
        let flags: Vec<bool> = items.iter().map(|m| m.complete).collect();
        MatchResult::from_match(Match {
            kind: MatchKind::OneOrMore,
            pos,
            len: p - pos,
            children: items,
            complete: completeness_of(OperatorKind::Repetition, &flags, false, truncated) && !tainted,
            eof_deleted: false,
        })
    }
}

fn wrap_choice(chosen: Rc<Match>, complete: bool) -> MatchResult {
    MatchResult::from_match(Match {
        kind: MatchKind::First,
        pos: chosen.pos,
        len: chosen.len,
        children: vec![chosen],
        complete,
        eof_deleted: false,
    })
}

fn attempt_was_repairable(attempt: &MatchResult) -> bool {
    match attempt {
        MatchResult::Match(m) => !m.complete,
        MatchResult::Mismatch(mm) => mm.recoverable,
    }
}

fn mark_incomplete(result: MatchResult) -> MatchResult {
    match result {
        MatchResult::Match(m) if m.complete => {
            let mut copy = (*m).clone();
            copy.complete = false;
            MatchResult::from_match(copy)
        }
        MatchResult::Mismatch(mut mm) => {
            mm.recoverable = true;
            MatchResult::Mismatch(mm)
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{load_grammar, GrammarSource};

    fn g(text: &str) -> Grammar {
        load_grammar(&GrammarSource::new(text, "test")).unwrap()
    }

    fn first_pass(grammar: &Grammar, input: &str) -> (MatchResult, ParseStats) {
        let mut s = ParseSession::new(grammar, input, RecoveryConfig::disabled());
        let r = s.match_rule(grammar.start(), 0);
        (r, s.stats().clone())
    }

    fn len_of(text: &str, input: &str) -> isize {
        first_pass(&g(text), input).0.len()
    }

    #[test]
    fn terminal_char() {
        assert_eq!(len_of("S <- 'a' ;", "a"), 1);
        assert_eq!(len_of("S <- 'a' ;", "b"), -1);
        assert_eq!(len_of("S <- 'a' ;", ""), -1);
    }

    #[test]
    fn terminal_literal_and_range() {
        assert_eq!(len_of("S <- 'abc' ;", "abcd"), 3);
        assert_eq!(len_of("S <- 'abc' ;", "abd"), -1);
        assert_eq!(len_of("S <- [b-d] ;", "c"), 1);
        assert_eq!(len_of("S <- [b-d] ;", "e"), -1);
    }

    #[test]
    fn sequence_sums_lengths() {
        assert_eq!(len_of("S <- 'a' 'bc' [0-9] ;", "abc7"), 4);
        assert_eq!(len_of("S <- 'a' 'bc' [0-9] ;", "abcx"), -1);
    }

    #[test]
    fn ordered_choice_takes_first_success() {
        assert_eq!(len_of("S <- 'a' / 'ab' ;", "ab"), 1);
        assert_eq!(len_of("S <- 'ab' / 'a' ;", "ab"), 2);
        assert_eq!(len_of("S <- 'x' / 'y' ;", "z"), -1);
    }

    #[test]
    fn repetition_is_greedy() {
        assert_eq!(len_of("S <- 'a'+ ;", "aaab"), 3);
        assert_eq!(len_of("S <- 'a'+ ;", "b"), -1);
        assert_eq!(len_of("S <- 'a'* ;", "b"), 0);
        assert_eq!(len_of("S <- 'a'* 'a' ;", "aaa"), -1);
    }

    #[test]
    fn optional_and_lookahead() {
        assert_eq!(len_of("S <- 'a'? 'b' ;", "b"), 1);
        assert_eq!(len_of("S <- 'a'? 'b' ;", "ab"), 2);
        assert_eq!(len_of("S <- !'a' [a-z] ;", "b"), 1);
        assert_eq!(len_of("S <- !'a' [a-z] ;", "a"), -1);
        assert_eq!(len_of("S <- &'a' [a-z] ;", "a"), 1);
        assert_eq!(len_of("S <- &'a' [a-z] ;", "b"), -1);
    }

    #[test]
    fn zero_length_iteration_stops_repetition() {
        assert_eq!(len_of("S <- ('a'?)+ ;", "aab"), 2);
        assert_eq!(len_of("S <- ('a'?)+ ;", "b"), 0);
    }

    #[test]
    fn epsilon_matches_empty() {
        let (r, _) = first_pass(&g("S <- () ;"), "xyz");
        let m = r.as_match().unwrap();
        assert_eq!(m.len, 0);
        assert_eq!(m.kind, MatchKind::Epsilon);
    }

    #[test]
    fn rule_reference_wraps_body() {
        let grammar = g("S <- A 'b' ; A <- 'a' ;");
        let (r, _) = first_pass(&grammar, "ab");
        let seq = r.as_match().unwrap();
        assert_eq!(seq.kind, MatchKind::Seq);
        assert_eq!(seq.children[0].kind, MatchKind::Rule(grammar.rule_id("A").unwrap()));
        assert_eq!(seq.children[0].children[0].kind, MatchKind::Terminal);
    }

    #[test]
    fn memo_serves_repeated_references() {
        let (_, stats) = first_pass(&g("S <- A 'x' / A 'y' ; A <- 'a'+ ;"), "aaay");
        assert_eq!(stats.rule_body_evaluations[0], 2);
        assert_eq!(stats.memo_hits, 1);
    }

    #[test]
    fn non_recursive_rules_evaluate_once_per_position() {
        let grammar = g("S <- (A / B)+ ; A <- 'a' ; B <- 'b' ;");
        let input = "abababab";
        let (r, stats) = first_pass(&grammar, input);
        assert_eq!(r.len(), 8);
        // S once, A at 9 positions, B at the 5 positions where A fails.
        assert_eq!(stats.rule_body_evaluations[0], 1 + 9 + 5);
    }

    #[test]
    fn match_result_lengths_order_mismatch_lowest() {
        assert_eq!(MatchResult::mismatch().len(), -1);
        let m = MatchResult::Match(Rc::new(Match::leaf(MatchKind::Epsilon, 3, 0)));
        assert!(m.len() > MatchResult::mismatch().len());
        assert!(m.is_match());
        assert!(MatchResult::mismatch().as_match().is_none());
    }

    #[test]
    fn leaf_completeness() {
        assert!(Match::leaf(MatchKind::Terminal, 0, 1).complete);
        assert!(!Match::syntax_error(ErrorKind::Trailing, 0, 1).complete);
        assert_eq!(Match::leaf(MatchKind::Terminal, 2, 3).end(), 5);
    }

    #[test]
    fn walk_visits_in_preorder() {
        let grammar = g("S <- 'a' 'b' ;");
        let (r, _) = first_pass(&grammar, "ab");
        let mut kinds = Vec::new();
        r.as_match().unwrap().walk(|m| kinds.push((m.kind, m.pos)));
        assert_eq!(
            kinds,
            vec![(MatchKind::Seq, 0), (MatchKind::Terminal, 0), (MatchKind::Terminal, 1)]
        );
    }

    #[test]
    fn deep_tree_drops_without_recursion() {
        let mut m = Match::leaf(MatchKind::Epsilon, 0, 0);
        for _ in 0..200_000 {
            m = Match {
                kind: MatchKind::Seq,
                pos: 0,
                len: 0,
                children: vec![Rc::new(m)],
                complete: true,
                eof_deleted: false,
            };
        }
        drop(m);
    }

    #[test]
    fn seed_is_tagged_and_head_is_not() {
        let grammar = g("E <- E 'x' / 'y' ;");
        let mut s = ParseSession::new(&grammar, "z", RecoveryConfig::disabled());
        match s.match_rule(grammar.start(), 0) {
            MatchResult::Mismatch(mm) => assert!(!mm.from_lr_context),
            other => panic!("{other:?}"),
        }
        let entry = s.memo_entries(false).next().unwrap().1;
        assert!(entry.found_left_rec);
        assert!(!entry.in_rec_path);
    }

    #[test]
    fn indirect_cycle_member_keeps_seed_tag() {
        // B fails only because A's seed failed; B is not the cycle head.
        let grammar = g("A <- B 'a' / 'x' ; B <- A 'b' ;");
        let mut s = ParseSession::new(&grammar, "x", RecoveryConfig::disabled());
        assert_eq!(s.match_rule(grammar.start(), 0).len(), 1);
        let b = grammar.rule_id("B").unwrap();
        let (_, entry) = s.memo_entries(false).find(|(k, _)| k.0 == b).unwrap();
        assert!(!entry.found_left_rec);
    }

    #[test]
    fn discovery_marks_absorbed_failure_incomplete() {
        // The first alternative fails part-way, so recovery might extend it.
        let (r, _) = first_pass(&g("S <- 'a' 'b' / 'a' ;"), "ax");
        assert!(!r.as_match().unwrap().complete);
        let (r, _) = first_pass(&g("S <- 'a' 'b' / 'a' ;"), "a");
        assert!(r.as_match().unwrap().complete);
    }

    #[test]
    fn discovery_repetition_ending_mid_element_is_incomplete() {
        let (r, _) = first_pass(&g("S <- ('a' 'b')+ ;"), "ababa?");
        assert!(!r.as_match().unwrap().complete);
        let (r, _) = first_pass(&g("S <- ('a' 'b')+ ;"), "abab?");
        assert!(r.as_match().unwrap().complete);
    }

    #[test]
    fn discovery_growth_ending_mid_sequence_is_incomplete() {
        let (r, _) = first_pass(&g("E <- E '+' T / T ; T <- [0-9] ;"), "1+2+?");
        let m = r.as_match().unwrap();
        assert_eq!(m.len, 3);
        assert!(!m.complete);
        let (r, _) = first_pass(&g("E <- E '+' T / T ; T <- [0-9] ;"), "1+2");
        assert!(r.as_match().unwrap().complete);
    }

    #[test]
    fn character_inspections_are_counted_per_phase() {
        let grammar = g("S <- 'abc' ;");
        let mut s = ParseSession::new(&grammar, "abc", RecoveryConfig::default());
        s.two_phase_parse();
        assert_eq!(s.stats().char_inspections, [3, 0]);
    }

    #[test]
    fn set_recovery_phase_switches_tables() {
        let grammar = g("S <- 'a' ;");
        let mut s = ParseSession::new(&grammar, "a", RecoveryConfig::default());
        s.set_recovery_phase(true);
        assert!(s.in_recovery_phase());
        s.match_rule(grammar.start(), 0);
        assert_eq!(s.memo_entries(true).count(), 1);
        assert_eq!(s.memo_entries(false).count(), 0);
        assert_eq!(s.stats().rule_body_evaluations, [0, 1]);
    }

    #[test]
    fn recovery_phase_reuses_complete_discovery_entry() {
        let grammar = g("S <- A ; A <- 'a' ;");
        let mut s = ParseSession::new(&grammar, "a", RecoveryConfig::default());
        s.match_rule(grammar.start(), 0);
        s.set_recovery_phase(true);
        s.match_rule(grammar.start(), 0);
        assert_eq!(s.stats().cross_phase_reuse, 1);
        assert_eq!(s.stats().rule_body_evaluations, [2, 0]);
    }

    #[test]
    fn recovery_phase_rejects_incomplete_discovery_entry() {
        let grammar = g("S <- 'a' 'b' / 'a' ;");
        let mut s = ParseSession::new(&grammar, "ax", RecoveryConfig::default());
        s.match_rule(grammar.start(), 0);
        s.set_recovery_phase(true);
        s.match_rule(grammar.start(), 0);
        assert_eq!(s.stats().cross_phase_reuse, 0);
        assert_eq!(s.stats().cross_phase_rejections, 1);
        assert_eq!(s.stats().rule_body_evaluations, [1, 1]);
    }

    #[test]
    #[should_panic(expected = "past end of input")]
    fn position_past_end_panics() {
        let grammar = g("S <- 'a' ;");
        let mut s = ParseSession::new(&grammar, "a", RecoveryConfig::default());
        s.match_rule(grammar.start(), 2);
    }
}
