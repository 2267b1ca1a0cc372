//! A packrat PEG parser that accepts left-recursive grammars and recovers
//! from syntax errors by skipping bounded stretches of input.
//!
//! ```
//! use seedpeg::{load_grammar, parse, GrammarSource, RecoveryConfig};
//!
//! let g = load_grammar(&GrammarSource::new("E <- E '+' T / T ; T <- [0-9] ;", "inline")).unwrap();
//! let out = parse(&g, "1+2+3", RecoveryConfig::default());
//! assert_eq!(out.tree.len, 5);
//! assert!(!out.has_errors());
//! ```

pub mod bench;
pub mod engine;
pub mod grammar;
pub mod oracle;
pub mod recovery;
pub mod text;
pub mod tree;

pub use engine::{ErrorKind, Match, MatchKind, MatchResult, MemoEntry, Mismatch, ParseSession, ParseStats};
pub use grammar::{Clause, Expr, Grammar, GrammarDef, GrammarError, RuleId, Terminal};
pub use recovery::{parse, ParseOutcome, RecoveryConfig};
pub use text::{load_grammar, parse_grammar_text, print_grammar, GrammarSource};
pub use tree::{collect_errors, serialize_tree, ErrorReport, ErrorReportKind, TreeFormat};
