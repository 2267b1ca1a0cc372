#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use seedpeg::oracle::Node;
use seedpeg::{load_grammar, Expr, Grammar, GrammarDef, GrammarSource, MatchKind, ParseSession, RecoveryConfig};

pub fn grammar(text: &str) -> Grammar {
    load_grammar(&GrammarSource::new(text, "test")).unwrap_or_else(|e| panic!("{e}"))
}

/// The start rule's first-pass match at 0, wrapped like the oracle wraps it.
pub fn engine_match(g: &Grammar, input: &str) -> Option<Node> {
    let mut s = ParseSession::new(g, input, RecoveryConfig::disabled());
    let body = s.match_rule(g.start(), 0).as_match().cloned()?;
    Some(Node {
        kind: MatchKind::Rule(g.start()),
        pos: 0,
        len: body.len,
        children: vec![Node::from_match(&body)],
    })
}

/// Runs `f` on a thread with a large stack; deep inputs recurse deeply.
pub fn with_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, f)
            .unwrap()
            .join()
            .unwrap()
    })
}

fn random_expr(rng: &mut StdRng, rules: usize, alphabet: &[char], depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        return match rng.gen_range(0..5) {
            0 | 1 => Expr::ch(alphabet[rng.gen_range(0..alphabet.len())]),
            2 => {
                let s: String = (0..2).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
                Expr::lit(&s)
            }
            _ => Expr::rule(&format!("R{}", rng.gen_range(0..rules))),
        };
    }
    let sub = |rng: &mut StdRng| random_expr(rng, rules, alphabet, depth - 1);
    match rng.gen_range(0..8) {
        0 | 1 => {
            let n = rng.gen_range(2..=3);
            Expr::seq((0..n).map(|_| sub(rng)).collect())
        }
        2 | 3 => {
            let n = rng.gen_range(2..=3);
            Expr::first((0..n).map(|_| sub(rng)).collect())
        }
        4 => sub(rng).one_or_more(),
        5 => sub(rng).zero_or_more(),
        6 => sub(rng).optional(),
        _ => {
            if rng.gen_bool(0.5) {
                sub(rng).not_followed_by()
            } else {
                sub(rng).followed_by()
            }
        }
    }
}

/// A grammar of 1..=`max_rules` rules named R0.. over `alphabet`. May be
/// left-recursive.
pub fn random_grammar(rng: &mut StdRng, max_rules: usize, alphabet: &[char]) -> Grammar {
    let rules = rng.gen_range(1..=max_rules);
    let mut def = GrammarDef::new();
    for i in 0..rules {
        def = def.rule(&format!("R{i}"), random_expr(rng, rules, alphabet, 3));
    }
    def.resolve().expect("generated grammars always resolve")
}

pub fn random_input(rng: &mut StdRng, max_len: usize, alphabet: &[char]) -> String {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

/// Every string over `alphabet` of length at most `max_len`.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| alphabet.iter().map(move |c| format!("{s}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Sums of 1..=`max_terms` single digits, e.g. `3+0+7`.
pub fn random_sum(rng: &mut StdRng, max_terms: usize) -> String {
    let terms = rng.gen_range(1..=max_terms);
    (0..terms)
        .map(|_| char::from(b'0' + rng.gen_range(0..10u8)).to_string())
        .collect::<Vec<_>>()
        .join("+")
}

pub const SINGLE_DIGIT_SUMS: &str = "E <- E '+' T / T ;\nT <- [0-9] ;\n";

/// Grammars for the left-recursion shapes, each with inputs it must span.
pub fn left_recursion_cases() -> Vec<(&'static str, &'static str, Vec<&'static str>)> {
    vec![
        ("direct", "E <- E '+' T / T ; T <- '1' ;", vec!["1", "1+1", "1+1+1+1"]),
        (
            "indirect, cycle of two",
            "A <- B 'a' / 'x' ; B <- A 'b' ;",
            vec!["x", "xba", "xbaba"],
        ),
        (
            "indirect, cycle of three",
            "A <- B 'a' / 'x' ; B <- C 'b' ; C <- A 'c' ;",
            vec!["x", "xcba", "xcbacba"],
        ),
        (
            "guarded by a choice",
            "S <- E ; E <- (E '-' / E '*') N / N ; N <- [0-9] ;",
            vec!["1", "1-2", "1-2*3-4"],
        ),
        ("guarded by an option", "E <- E? 'a' ;", vec!["a", "aa", "aaaa"]),
        (
            "interwoven cycles E-F, G-H, E-F-G",
            "E <- F 'a' / 'x' ; F <- E 'b' / G 'c' ; G <- H 'd' / E 'e' ; H <- G 'f' ;",
            vec!["x", "xba", "xeca", "xefdca", "xefdfdca", "xbaeca", "xecaba"],
        ),
        (
            "L-P with a P-P cycle",
            "L <- P '.x' / 'x' ; P <- P '(n)' / L ;",
            vec!["x", "x.x", "x(n).x", "x(n)(n).x(n).x"],
        ),
        ("left-associative", "E <- E '+' N / N ; N <- '1' ;", vec!["1+1+1"]),
        ("right-associative", "E <- N '+' E / N ; N <- '1' ;", vec!["1+1+1"]),
        ("ambiguous associativity", "E <- E '+' E / N ; N <- '1' ;", vec!["1+1+1"]),
    ]
}
