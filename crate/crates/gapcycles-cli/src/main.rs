use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gapcycles::cycle::MemoryBudget;
use gapcycles_cli::commands::{self, GlobalOpts, OutputFormat};

#[derive(Parser)]
#[command(
    name = "gapcycles",
    version,
    about = "Cycles of gaps across stages of Eratosthenes sieve: construction, \
             driving-term censuses, and exact population models"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Exact rational arithmetic (the default)
    #[arg(long, global = true)]
    exact: bool,

    /// IEEE double arithmetic instead of exact rationals
    #[arg(long, global = true, conflicts_with = "exact")]
    float: bool,

    /// Working-memory ceiling for cycle construction; accepts k/m/g suffixes.
    /// The default 1g admits stages through 23#.
    #[arg(long, global = true, default_value = "1g", value_parser = parse_bytes)]
    memory_limit: u64,

    /// Worker threads for parallel construction and scans
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Significant digits for decimal values in reports
    #[arg(long, global = true, default_value_t = 12)]
    precision: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build G(prime#) by the recursion and write it to a cycle cache file
    Build {
        prime: u64,
        /// Output path for the cycle file
        #[arg(short, long)]
        out: PathBuf,
        /// Print per-stage fusion statistics while building
        #[arg(long)]
        trace: bool,
    },
    /// Build G(prime#) both by recursion and by direct sieve and compare
    SieveCheck { prime: u64 },
    /// Census driving terms in a cached cycle
    Census {
        /// Cycle cache file
        cycle: PathBuf,
        /// Census a single gap
        #[arg(long, conflicts_with = "max_gap")]
        gap: Option<u64>,
        /// Census every even gap up to this bound in one scan
        #[arg(long)]
        max_gap: Option<u64>,
        /// Split the census into the four endpoint classes (needs --gap)
        #[arg(long)]
        subpop: bool,
        /// Skip the load-time gap-sum check for cycles longer than this
        #[arg(long)]
        skip_sum_above: Option<u64>,
    },
    /// Population model for one gap: per-stage vectors plus closed-form
    /// coefficients
    Model {
        /// Starting stage prime (initial conditions come from G(p0#))
        #[arg(long)]
        p0: u64,
        #[arg(long)]
        gap: u64,
        /// Final stage prime
        #[arg(long)]
        target: u64,
        /// Use the bundled g=82 census of G(37#) instead of building a cycle
        #[arg(long)]
        fixture: bool,
    },
    /// Verify model predictions against censuses of built cycles
    Verify {
        #[arg(long)]
        p0: u64,
        #[arg(long)]
        target: u64,
        /// Comma-separated list of gaps
        #[arg(long, value_delimiter = ',')]
        gaps: Vec<u64>,
        /// Verify every gap the models cover from p0
        #[arg(long)]
        all_applicable: bool,
    },
    /// Regression of the bundled g=82 reference dataset
    Table82,
}

fn parse_bytes(s: &str) -> Result<u64, String> {
    let s = s.trim().to_ascii_lowercase();
    let (digits, mult) = match s.strip_suffix(['k', 'm', 'g']) {
        Some(head) => {
            let mult = match s.as_bytes()[s.len() - 1] {
                b'k' => 1u64 << 10,
                b'm' => 1 << 20,
                _ => 1 << 30,
            };
            (head, mult)
        }
        None => (s.as_str(), 1),
    };
    digits
        .parse::<u64>()
        .map_err(|e| format!("bad byte count {s:?}: {e}"))?
        .checked_mul(mult)
        .ok_or_else(|| format!("byte count {s:?} overflows"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        gapcycles::configure_threads(n);
    }
    let opts = GlobalOpts {
        format: match cli.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
        exact: !cli.float,
        budget: MemoryBudget {
            max_bytes: cli.memory_limit,
        },
        precision: cli.precision,
    };

    let outcome = match cli.cmd {
        Cmd::Build { prime, out, trace } => commands::cmd_build(prime, &out, trace, &opts),
        Cmd::SieveCheck { prime } => commands::cmd_sieve_check(prime, &opts),
        Cmd::Census {
            cycle,
            gap,
            max_gap,
            subpop,
            skip_sum_above,
        } => commands::cmd_census(&cycle, gap, max_gap, subpop, skip_sum_above, &opts),
        Cmd::Model {
            p0,
            gap,
            target,
            fixture,
        } => commands::cmd_model(p0, gap, target, fixture, &opts),
        Cmd::Verify {
            p0,
            target,
            gaps,
            all_applicable,
        } => commands::cmd_verify(p0, target, &gaps, all_applicable, &opts),
        Cmd::Table82 => commands::cmd_table82(&opts),
    };

    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
