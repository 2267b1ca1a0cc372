use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use seedpeg::bench::bench_linearity;
use seedpeg::{collect_errors, load_grammar, parse, serialize_tree, Grammar, GrammarSource, RecoveryConfig, TreeFormat};

#[derive(Parser)]
#[command(name = "seedpeg", version, about = "PEG parser with left recursion and error recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an input and print its tree; errors go to stderr.
    Parse {
        #[arg(short, long)]
        grammar: PathBuf,
        /// File to parse.
        #[arg(short, long, conflicts_with = "text", required_unless_present = "text")]
        input: Option<PathBuf>,
        /// Literal text to parse.
        #[arg(short, long)]
        text: Option<String>,
        #[arg(short, long, default_value = "sexpr")]
        format: TreeFormat,
        /// Print every node instead of rule-level trees.
        #[arg(long)]
        raw: bool,
        /// Stop after the error-free pass.
        #[arg(long)]
        no_recover: bool,
        /// Longest input run a single skip may cover.
        #[arg(long, default_value_t = seedpeg::recovery::DEFAULT_MAX_SKIP, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
        max_skip: usize,
    },
    /// Time parses of generated sums and print a CSV report.
    Bench {
        #[arg(short, long)]
        grammar: PathBuf,
        /// Comma-separated input sizes, strictly increasing.
        #[arg(short, long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(short, long, default_value_t = 0.0)]
        error_rate: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Load a grammar and report its rules.
    CheckGrammar {
        #[arg(short, long)]
        grammar: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn grammar_from(path: &Path) -> Result<Grammar, String> {
    let text = read(path)?;
    load_grammar(&GrammarSource::new(text, path.display().to_string())).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Parse {
            grammar,
            input,
            text,
            format,
            raw,
            no_recover,
            max_skip,
        } => {
            let g = grammar_from(&grammar)?;
            let input = match (input, text) {
                (Some(path), _) => read(&path)?,
                (None, Some(t)) => t,
                (None, None) => unreachable!("clap requires one of --input/--text"),
            };
            let config = RecoveryConfig {
                max_skip,
                enabled: !no_recover,
            };
            let out = parse(&g, &input, config);
            let chars: Vec<char> = input.chars().collect();
            println!("{}", serialize_tree(&out.tree, &g, &chars, format, raw));
            let errors = collect_errors(&out.tree);
            for e in &errors {
                let skipped: String = chars[e.pos..e.pos + e.len].iter().collect();
                eprintln!("error: {} at {} len {}: {:?}", e.kind, e.pos, e.len, skipped);
            }
            Ok(if errors.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Bench {
            grammar,
            sizes,
            error_rate,
            seed,
        } => {
            let g = grammar_from(&grammar)?;
            let report = bench_linearity(&g, &sizes, error_rate, seed).map_err(|e| e.to_string())?;
            print!("{}", report.to_csv());
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckGrammar { grammar } => {
            let g = grammar_from(&grammar)?;
            let lr = g.left_recursive_rules();
            let nullable = g.nullable_rules();
            println!("start: {}", g.rule_name(g.start()));
            println!("rules: {}", g.rules().len());
            println!("size: {}", g.size());
            for (i, rule) in g.rules().iter().enumerate() {
                let mut tags = Vec::new();
                if lr.iter().any(|id| id.index() == i) {
                    tags.push("left-recursive");
                }
                if nullable[i] {
                    tags.push("nullable");
                }
                println!("  {}", std::iter::once(rule.name.as_str()).chain(tags).collect::<Vec<_>>().join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Deep left-recursive inputs recurse once per growth step.
    let worker = std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(move || run(cli))
        .expect("spawn parser thread");
    match worker.join() {
        Ok(Ok(code)) => code,
        Ok(Err(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(2),
    }
}
