//! Scaling measurements on generated sums like `12+3+4+5`.

use std::fmt::Write as _;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::index::sample;
use rand::SeedableRng;

use crate::grammar::Grammar;
use crate::recovery::{parse, RecoveryConfig};
use crate::tree::collect_errors;

/// Grammar the generated inputs are written for.
pub const ARITHMETIC_GRAMMAR: &str = "E <- E '+' T / T ;\nT <- [0-9]+ ;\n";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BenchError {
    #[error("sizes must be strictly increasing and at least 1")]
    BadSizes,
    #[error("error rate {0} is outside [0, 1]")]
    BadErrorRate(f64),
}

/// A valid sum of exactly `size` characters: single digits separated by
/// `+`, with a two-digit first number when `size` is even.
pub fn generate_sum(size: usize, seed: u64) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let digit = |rng: &mut StdRng| char::from(b'0' + rand::Rng::gen_range(rng, 0..10u8));
    let mut s = String::with_capacity(size);
    if size == 0 {
        return s;
    }
    s.push(digit(&mut rng));
    if size.is_multiple_of(2) {
        s.push(digit(&mut rng));
    }
    while s.len() < size {
        s.push('+');
        s.push(digit(&mut rng));
    }
    s
}

/// Replaces `round(rate * len)` single-digit numbers with `?`, never the
/// first number. Returns the mutated text and the positions changed.
pub fn mutate(input: &str, rate: f64, seed: u64) -> (String, Vec<usize>) {
    let mut chars: Vec<char> = input.chars().collect();
    let candidates: Vec<usize> = (1..chars.len())
        .filter(|&i| chars[i].is_ascii_digit() && chars[i - 1] == '+' && chars.get(i + 1).is_none_or(|&c| c == '+'))
        .collect();
    let wanted = ((rate * chars.len() as f64).round() as usize).min(candidates.len());
    let mut rng = StdRng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, candidates.len(), wanted)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    picked.sort_unstable();
    for &p in &picked {
        chars[p] = '?';
    }
    (chars.into_iter().collect(), picked)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub mutations: usize,
    pub errors: usize,
    pub error_span: usize,
    pub wall_secs: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub secs_per_char: f64,
    pub evaluations_per_char: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Present when there are at least three rows.
    pub fit: Option<Fit>,
}

/// Least-squares slope of `y` against `x`.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    num / den
}

impl BenchReport {
    /// Largest over smallest evaluations-per-character across rows.
    pub fn evaluation_ratio_spread(&self) -> f64 {
        let per: Vec<f64> = self.rows.iter().map(|r| r.evaluations as f64 / r.size as f64).collect();
        let max = per.iter().cloned().fold(f64::MIN, f64::max);
        let min = per.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("size,mutations,errors,error_span,wall_ms,evaluations,evaluations_per_char\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.3},{},{:.4}",
                r.size,
                r.mutations,
                r.errors,
                r.error_span,
                r.wall_secs * 1e3,
                r.evaluations,
                r.evaluations as f64 / r.size as f64
            );
        }
        if let Some(f) = &self.fit {
            let _ = writeln!(out, "# slope wall_ms/char {:.6}", f.secs_per_char * 1e3);
            let _ = writeln!(out, "# slope evaluations/char {:.4}", f.evaluations_per_char);
        }
        out
    }
}

/// Parses one generated input per size and records time and rule body
/// evaluations across both passes.
pub fn bench_linearity(grammar: &Grammar, sizes: &[usize], error_rate: f64, seed: u64) -> Result<BenchReport, BenchError> {
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::BadSizes);
    }
    if !(0.0..=1.0).contains(&error_rate) {
        return Err(BenchError::BadErrorRate(error_rate));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for (i, &size) in sizes.iter().enumerate() {
        let clean = generate_sum(size, seed.wrapping_add(i as u64));
        let (input, mutated) = mutate(&clean, error_rate, seed.wrapping_add(1000 + i as u64));
        let started = Instant::now();
        let out = parse(grammar, &input, RecoveryConfig::default());
        let wall_secs = started.elapsed().as_secs_f64();
        let errors = collect_errors(&out.tree);
        rows.push(BenchRow {
            size,
            mutations: mutated.len(),
            errors: errors.len(),
            error_span: errors.iter().map(|e| e.len).sum(),
            wall_secs,
            evaluations: out.stats.rule_body_evaluations.iter().sum(),
        });
    }
    let fit = (rows.len() >= 3).then(|| Fit {
        secs_per_char: slope(&rows.iter().map(|r| (r.size as f64, r.wall_secs)).collect::<Vec<_>>()),
        evaluations_per_char: slope(&rows.iter().map(|r| (r.size as f64, r.evaluations as f64)).collect::<Vec<_>>()),
    });
    Ok(BenchReport { rows, fit })
}
