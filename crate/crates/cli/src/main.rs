mod commands;
mod table;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mgl_core::{Budget, Error};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::table::Table;

#[derive(Parser, Debug)]
#[command(name = "mgl", version, about = "Experiments on spaces of marked groups")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Cap on the number of items any exhaustive enumeration may touch
    /// (overrides MGL_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for tables, plot data and the run manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct RankRadius {
    /// Number of generators.
    #[arg(short = 'm')]
    pub m: usize,
    /// Radius, or the largest radius of a table.
    #[arg(short = 'n')]
    pub n: u32,
}

#[derive(Args, Debug, Clone)]
pub struct Relators {
    /// Number of generators.
    #[arg(short = 'm', default_value_t = 2)]
    pub m: usize,
    /// Relator words (lowercase generators, uppercase inverses); repeatable.
    #[arg(short = 'r', long = "relator", required = true)]
    pub relators: Vec<String>,
    /// Small-cancellation parameter, e.g. 1/6.
    #[arg(long, default_value = "1/6")]
    pub lambda: String,
    /// Use the one-relator mode `r^q` with the single relator as root.
    #[arg(short = 'q')]
    pub q: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Ball sizes of the free group, closed form checked by enumeration.
    Ball(RankRadius),
    /// Counts of cyclically reduced words.
    Cyc {
        #[command(flatten)]
        rr: RankRadius,
        /// List the words of length n instead of counting.
        #[arg(long)]
        list: bool,
    },
    /// Check the C'(lambda) condition and report the longest piece.
    CheckCprime(Relators),
    /// Decide membership in a normal closure by Dehn's algorithm.
    Dehn {
        #[command(flatten)]
        rel: Relators,
        #[arg(short = 'w')]
        word: String,
    },
    /// Closure fingerprint over the ball of radius n.
    Fingerprint {
        #[command(flatten)]
        rel: Relators,
        #[arg(short = 'n')]
        n: u32,
    },
    /// Covering numbers and dimension estimates of the small-cancellation space.
    PsDim {
        #[arg(short = 'm', default_value_t = 2)]
        m: usize,
        #[arg(short = 'k', default_value_t = 1)]
        k: u32,
        #[arg(long, default_value = "1/6")]
        lambda: String,
        #[arg(short = 'n')]
        n: u32,
        /// Seed for the sampling fallback when exhaustive counting is refused.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Covering numbers and dimension estimates of one-relator groups r^q.
    UrDim {
        #[arg(short = 'm', default_value_t = 2)]
        m: usize,
        #[arg(short = 'q', default_value_t = 2)]
        q: u32,
        #[arg(short = 'n')]
        n: u32,
    },
    /// Oracle membership of a word over a, b, c, d.
    GrigMember {
        #[arg(short = 'w')]
        word: String,
        #[arg(long)]
        omega: String,
    },
    /// Oracle membership bitmap over the ball of radius n in F(a,b,c,d).
    GrigFingerprint {
        #[arg(long)]
        omega: String,
        #[arg(short = 'n')]
        n: u32,
    },
    /// Compare two oracle sequences through their fingerprints.
    #[command(name = "grig-prop62")]
    GrigSeparation {
        /// Exactly two oracle sequences.
        #[arg(long, num_args = 1, required = true)]
        omega: Vec<String>,
        #[arg(short = 'n')]
        n: u32,
    },
    /// Exact covering numbers of the space of subgroups of Z^m.
    ZmCover(RankRadius),
    /// Dimension estimates for subgroups of Z^m.
    ZmDim(RankRadius),
    /// Pairwise distances between fingerprints read from files.
    Distance {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Growth of balls in the free group.
    Growth(RankRadius),
}

impl Verb {
    fn name(&self) -> &'static str {
        match self {
            Verb::Ball(_) => "ball",
            Verb::Cyc { .. } => "cyc",
            Verb::CheckCprime(_) => "check-cprime",
            Verb::Dehn { .. } => "dehn",
            Verb::Fingerprint { .. } => "fingerprint",
            Verb::PsDim { .. } => "ps-dim",
            Verb::UrDim { .. } => "ur-dim",
            Verb::GrigMember { .. } => "grig-member",
            Verb::GrigFingerprint { .. } => "grig-fingerprint",
            Verb::GrigSeparation { .. } => "grig-prop62",
            Verb::ZmCover(_) => "zm-cover",
            Verb::ZmDim(_) => "zm-dim",
            Verb::Distance { .. } => "distance",
            Verb::Growth(_) => "growth",
        }
    }
}

/// Everything a verb produces.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub plot: Option<Table>,
    pub seeds: Vec<u64>,
    /// Raw text artifacts such as fingerprint files, by file name.
    pub files: Vec<(String, String)>,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn run_verb(verb: &Verb, budget: &Budget) -> Result<Outcome, CliError> {
    use commands::*;
    match verb {
        Verb::Ball(a) => ball(a, budget),
        Verb::Cyc { rr, list } => cyc(rr, *list, budget),
        Verb::CheckCprime(r) => check_cprime(r),
        Verb::Dehn { rel, word } => dehn(rel, word),
        Verb::Fingerprint { rel, n } => fingerprint(rel, *n, budget),
        Verb::PsDim { m, k, lambda, n, seed, samples } => ps_dim(*m, *k, lambda, *n, *seed, *samples, budget),
        Verb::UrDim { m, q, n } => ur_dim(*m, *q, *n, budget),
        Verb::GrigMember { word, omega } => grig_member(word, omega),
        Verb::GrigFingerprint { omega, n } => grig_fingerprint(omega, *n, budget),
        Verb::GrigSeparation { omega, n } => grig_separation(omega, *n, budget),
        Verb::ZmCover(a) => zm_cover(a, budget),
        Verb::ZmDim(a) => zm_dim(a, budget),
        Verb::Distance { files } => distance(files),
        Verb::Growth(a) => growth(a),
    }
}

fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Tsv => table.to_tsv(),
        Format::Json => serde_json::to_string_pretty(&table.to_json()).expect("json") + "\n",
    }
}

fn write_outputs(
    dir: &Path,
    cli: &Cli,
    argv: &[String],
    budget: &Budget,
    outcome: &Outcome,
    started: Instant,
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let ext = match cli.format {
        Format::Tsv => "tsv",
        Format::Json => "json",
    };
    let mut digests = serde_json::Map::new();
    let mut emit = |name: String, body: String| -> Result<(), CliError> {
        fs::write(dir.join(&name), &body)?;
        digests.insert(name, json!(sha256_hex(body.as_bytes())));
        Ok(())
    };
    for t in &outcome.tables {
        emit(format!("{}.{ext}", t.name), render(t, cli.format))?;
    }
    if let Some(p) = &outcome.plot {
        emit("plotdata.tsv".into(), p.to_tsv())?;
    }
    for (name, body) in &outcome.files {
        emit(name.clone(), body.clone())?;
    }
    let manifest = json!({
        "command": cli.verb.name(),
        "argv": argv,
        "parameters": format!("{:?}", cli.verb),
        "seeds": outcome.seeds,
        "budget": budget.limit(),
        "threads": rayon::current_num_threads(),
        "format": ext,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_ms": started.elapsed().as_millis() as u64,
        "outputs": digests,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("json") + "\n")?;
    Ok(())
}

fn main() -> ExitCode {
    let started = Instant::now();
    // single-dash long flags are accepted for the oracle sequence
    let argv: Vec<String> = std::env::args()
        .map(|a| if a == "-omega" { "--omega".into() } else { a })
        .collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let budget = cli.budget.map(Budget::new).unwrap_or_else(Budget::from_env);
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = run_verb(&cli.verb, &budget).and_then(|outcome| {
        if let Some(dir) = &cli.out {
            write_outputs(dir, &cli, &argv[1..], &budget, &outcome, started)?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            let mut text = String::new();
            for (i, t) in outcome.tables.iter().enumerate() {
                if i > 0 {
                    text.push_str(&format!("\n# {}\n", t.name));
                }
                text.push_str(&render(t, cli.format));
            }
            // a closed pipe (`| head`) is not an error
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(CliError::Core(e)) if e.is_budget() => {
            eprintln!("refused: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
