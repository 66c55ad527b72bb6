//! Command-line parsing, validation and dispatch.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::character::{
    build_character_table, default_tail_cutoff, hunt_small_l_one_with, Discriminant,
    HUNT_TAIL_FACTOR,
};
use crate::expsums::{kloosterman_max_avg, kloosterman_primes};
use crate::numeric::gcd;
use crate::partition::{j_e_split_sums, t_sums, PartitionParams, DEFAULT_EPSILON};
use crate::progressions::{main_term_deviation, ProgressionQuery, DEFAULT_BETA};
use crate::sieve::{build_fun_tables, build_spf, FunTables};
use crate::suite::{run_suite, Suite, DEFAULT_DISCS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] clap::Error),
    #[error("invalid --{flag}: {reason}")]
    Invalid { flag: &'static str, reason: String },
    #[error("{0}")]
    Runtime(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn invalid(flag: &'static str, reason: impl ToString) -> CliError {
    CliError::Invalid {
        flag,
        reason: reason.to_string(),
    }
}

fn runtime(e: impl ToString) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "siegellab",
    version,
    about = "Real characters, λ-sieves and prime progression sums"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Identities,
    Full,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// L(1, χ) for a fundamental discriminant
    Character {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        #[arg(long)]
        tail_cutoff: Option<u64>,
    },
    /// CSV table of μ, τ, τ₃, λ, ν, Λ, λ′
    Sieve {
        #[arg(long)]
        limit: usize,
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Identity and inequality checks, one JSON line per report
    Verify {
        #[arg(long, value_enum, default_value = "identities")]
        suite: SuiteArg,
        #[arg(long)]
        limit: usize,
        /// repeatable; defaults to -3, -4 and 5
        #[arg(long, allow_hyphen_values = true)]
        disc: Vec<i64>,
    },
    /// ψ(x, q, a) against its main term
    Psi {
        #[command(flatten)]
        prog: ProgArgs,
        #[arg(long)]
        beta: Option<f64>,
        /// CSV over all 2 ≤ q ≤ Q and all units a, with Q taken from --q
        #[arg(long)]
        table: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// T₁..T₄ against |ψ_*|, or the J/E split with --je
    Tsum {
        #[command(flatten)]
        prog: ProgArgs,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        je: bool,
    },
    /// S(x, q, a) over primes, or the max-over-a average with --avg
    Kloosterman {
        #[arg(long)]
        x: usize,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        a: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        disc: Option<i64>,
        #[arg(long = "Q")]
        big_q: Option<u64>,
        #[arg(long)]
        avg: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fundamental discriminants with the smallest L(1, χ)
    Hunt {
        #[arg(long)]
        max: u64,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long, default_value_t = HUNT_TAIL_FACTOR)]
        tail_factor: u64,
    },
}

#[derive(Debug, Args)]
struct ProgArgs {
    #[arg(long)]
    x: usize,
    #[arg(long)]
    q: u64,
    #[arg(long)]
    a: u64,
    #[arg(long, allow_hyphen_values = true)]
    disc: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Character {
        disc: Discriminant,
        tail_cutoff: u64,
    },
    Sieve {
        disc: Discriminant,
        limit: usize,
    },
    Verify {
        suite: Suite,
        limit: usize,
        discs: Vec<Discriminant>,
    },
    Psi {
        disc: Discriminant,
        query: ProgressionQuery,
        beta: f64,
    },
    PsiTable {
        disc: Discriminant,
        x: usize,
        max_q: u64,
        beta: f64,
    },
    Tsum {
        disc: Discriminant,
        query: ProgressionQuery,
        params: PartitionParams,
        je: bool,
    },
    Kloosterman {
        x: usize,
        q: u64,
        a: u64,
    },
    KloostermanAvg {
        x: usize,
        big_q: u64,
    },
    Hunt {
        max: u64,
        top: usize,
        tail_factor: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn disc(delta: i64) -> Result<Discriminant, CliError> {
    Discriminant::new(delta).map_err(|e| invalid("disc", e))
}

fn beta(b: Option<f64>) -> Result<f64, CliError> {
    let b = b.unwrap_or(DEFAULT_BETA);
    if b > 0.0 && b < 1.0 {
        Ok(b)
    } else {
        Err(invalid("beta", format!("must lie in (0, 1), got {b}")))
    }
}

fn positive(flag: &'static str, v: usize, min: usize) -> Result<usize, CliError> {
    if v < min {
        Err(invalid(flag, format!("must be at least {min}, got {v}")))
    } else {
        Ok(v)
    }
}

fn query(p: &ProgArgs) -> Result<ProgressionQuery, CliError> {
    if p.q < 2 {
        return Err(invalid(
            "q",
            format!("modulus must be at least 2, got {}", p.q),
        ));
    }
    positive("x", p.x, 1)?;
    ProgressionQuery::new(p.x, p.q, p.a).map_err(|e| invalid("a", e))
}

/// Parses `argv` (without the program name) into a validated configuration.
pub fn parse_and_validate<I, S>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("siegellab"))
        .chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args)?;
    let mut format = Format::Json;
    let mut out = None;
    let task = match cli.command {
        Command::Character {
            disc: d,
            tail_cutoff,
        } => {
            let disc = disc(d)?;
            let tail_cutoff = tail_cutoff.unwrap_or(default_tail_cutoff(d));
            if tail_cutoff < disc.modulus() {
                return Err(invalid(
                    "tail-cutoff",
                    format!("must be at least D = {}", disc.modulus()),
                ));
            }
            Task::Character { disc, tail_cutoff }
        }
        Command::Sieve {
            limit,
            disc: d,
            out: o,
        } => {
            format = Format::Csv;
            out = o;
            Task::Sieve {
                disc: disc(d)?,
                limit: positive("limit", limit, 2)?,
            }
        }
        Command::Verify {
            suite,
            limit,
            disc: ds,
        } => {
            let ds = if ds.is_empty() {
                DEFAULT_DISCS.to_vec()
            } else {
                ds
            };
            let discs = ds.into_iter().map(disc).collect::<Result<_, _>>()?;
            let suite = match suite {
                SuiteArg::Identities => Suite::Identities,
                SuiteArg::Full => Suite::Full,
            };
            Task::Verify {
                suite,
                limit: positive("limit", limit, 20)?,
                discs,
            }
        }
        Command::Psi {
            prog,
            beta: b,
            table,
            out: o,
        } => {
            let disc = disc(prog.disc)?;
            let beta = beta(b)?;
            if table {
                format = Format::Csv;
                out = o;
                if prog.q < 2 {
                    return Err(invalid("q", "table mode needs Q >= 2"));
                }
                Task::PsiTable {
                    disc,
                    x: positive("x", prog.x, 2)?,
                    max_q: prog.q,
                    beta,
                }
            } else {
                out = o;
                Task::Psi {
                    disc,
                    query: query(&prog)?,
                    beta,
                }
            }
        }
        Command::Tsum {
            prog,
            theta,
            alpha,
            beta: b,
            je,
        } => {
            let params =
                PartitionParams::with(theta, alpha, DEFAULT_EPSILON, beta(b)?).map_err(|e| {
                    let flag = match e {
                        crate::partition::PartitionError::Theta(_) => "theta",
                        crate::partition::PartitionError::Alpha(_) => "alpha",
                        _ => "beta",
                    };
                    invalid(flag, e)
                })?;
            Task::Tsum {
                disc: disc(prog.disc)?,
                query: query(&prog)?,
                params,
                je,
            }
        }
        Command::Kloosterman {
            x,
            q,
            a,
            disc: d,
            big_q,
            avg,
            out: o,
        } => {
            if let Some(d) = d {
                disc(d)?;
            }
            positive("x", x, 2)?;
            if avg {
                let big_q = big_q.ok_or_else(|| invalid("Q", "required with --avg"))?;
                if big_q == 0 {
                    return Err(invalid("Q", "must be at least 1"));
                }
                if o.is_some() {
                    format = Format::Csv;
                    out = o;
                }
                Task::KloostermanAvg { x, big_q }
            } else {
                let q = q.ok_or_else(|| invalid("q", "required unless --avg is given"))?;
                let a = a.ok_or_else(|| invalid("a", "required unless --avg is given"))?;
                if q < 2 {
                    return Err(invalid("q", format!("modulus must be at least 2, got {q}")));
                }
                if gcd(a % q, q) != 1 {
                    return Err(invalid("a", format!("{a} is not a unit modulo {q}")));
                }
                out = o;
                Task::Kloosterman { x, q, a: a % q }
            }
        }
        Command::Hunt {
            max,
            top,
            tail_factor,
        } => {
            if max < 3 {
                return Err(invalid("max", "must be at least 3"));
            }
            if tail_factor == 0 {
                return Err(invalid("tail-factor", "must be positive"));
            }
            Task::Hunt {
                max,
                top,
                tail_factor,
            }
        }
    };
    Ok(RunConfig { task, format, out })
}

fn emit_json<T: Serialize>(w: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    writeln!(w)
}

fn tables_for(disc: Discriminant, limit: usize) -> Result<FunTables, CliError> {
    let chi =
        build_character_table(disc.delta(), default_tail_cutoff(disc.delta())).map_err(runtime)?;
    build_fun_tables(limit, &chi).map_err(runtime)
}

fn write_sieve_csv(w: &mut dyn Write, t: &FunTables) -> io::Result<()> {
    writeln!(w, "n,mu,tau,tau3,lambda,nu,biglambda,lambda_prime")?;
    for n in 1..=t.limit {
        writeln!(
            w,
            "{n},{},{},{},{},{},{:.12e},{:.12e}",
            t.mu[n], t.tau[n], t.tau3[n], t.lambda[n], t.nu[n], t.biglambda[n], t.lambda_prime[n]
        )?;
    }
    Ok(())
}

/// Runs the task, writing to `out` when set and to `stdout` otherwise.
fn run(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mut file;
    let w: &mut dyn Write = match &config.out {
        Some(path) => {
            file = BufWriter::new(File::create(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?);
            &mut file
        }
        None => stdout,
    };
    let io_err = |source: io::Error| CliError::Io {
        path: config
            .out
            .clone()
            .unwrap_or_else(|| Path::new("<stdout>").to_path_buf()),
        source,
    };
    let mut code = EXIT_OK;
    match &config.task {
        Task::Character { disc, tail_cutoff } => {
            let t = build_character_table(disc.delta(), *tail_cutoff).map_err(runtime)?;
            let value = serde_json::json!({
                "delta": disc.delta(),
                "D": disc.modulus(),
                "l_one": t.l_one,
                "l_one_error": t.l_one_error,
            });
            emit_json(w, &value).map_err(io_err)?;
        }
        Task::Sieve { disc, limit } => {
            let t = tables_for(*disc, *limit)?;
            write_sieve_csv(w, &t).map_err(io_err)?;
        }
        Task::Verify {
            suite,
            limit,
            discs,
        } => {
            for d in discs {
                let lines = run_suite(*suite, d.delta(), *limit).map_err(runtime)?;
                for line in &lines {
                    if line.report.violations > 0 {
                        code = EXIT_VIOLATIONS;
                    }
                    emit_json(w, line).map_err(io_err)?;
                }
            }
        }
        Task::Psi { disc, query, beta } => {
            let t = tables_for(*disc, query.x.max(2))?;
            let r = main_term_deviation(query, &t, *beta).map_err(runtime)?;
            emit_json(w, &r).map_err(io_err)?;
        }
        Task::PsiTable {
            disc,
            x,
            max_q,
            beta,
        } => {
            let t = tables_for(*disc, *x)?;
            writeln!(w, "q,a,psi_prog,main_term,normalized_error,comparator").map_err(io_err)?;
            for q in 2..=*max_q {
                for a in (1..q).filter(|&a| gcd(a, q) == 1) {
                    let query = ProgressionQuery::new(*x, q, a).map_err(runtime)?;
                    let r = main_term_deviation(&query, &t, *beta).map_err(runtime)?;
                    writeln!(
                        w,
                        "{q},{a},{:.12e},{:.12e},{:.12e},{:.12e}",
                        r.psi_prog, r.main_term, r.normalized_error, r.comparator
                    )
                    .map_err(io_err)?;
                }
            }
        }
        Task::Tsum {
            disc,
            query,
            params,
            je,
        } => {
            let t = tables_for(*disc, query.x.max(2))?;
            if *je {
                let sieve = build_spf(query.x.max(2)).map_err(runtime)?;
                let r = j_e_split_sums(query.x, query.q, query.a, params, &t, &sieve)
                    .map_err(runtime)?;
                emit_json(w, &r).map_err(io_err)?;
            } else {
                let r = t_sums(query.x, query.q, query.a, params, &t).map_err(runtime)?;
                emit_json(w, &r).map_err(io_err)?;
            }
        }
        Task::Kloosterman { x, q, a } => {
            let sieve = build_spf(*x).map_err(runtime)?;
            let r = kloosterman_primes(*x, *q, *a, &sieve).map_err(runtime)?;
            emit_json(w, &r).map_err(io_err)?;
        }
        Task::KloostermanAvg { x, big_q } => {
            let sieve = build_spf(*x).map_err(runtime)?;
            let r = kloosterman_max_avg(*x, *big_q, &sieve).map_err(runtime)?;
            if config.format == Format::Csv {
                writeln!(w, "q,a_max,abs_s,fs_ratio").map_err(io_err)?;
                for e in &r.per_q_max {
                    writeln!(
                        w,
                        "{},{},{:.12e},{:.12e}",
                        e.q, e.a_max, e.abs_s, e.fs_ratio
                    )
                    .map_err(io_err)?;
                }
            } else {
                emit_json(w, &r).map_err(io_err)?;
            }
        }
        Task::Hunt {
            max,
            top,
            tail_factor,
        } => {
            let entries = hunt_small_l_one_with(*max, *top, *tail_factor);
            emit_json(w, &entries).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(code)
}

/// Runs a validated configuration and returns the process exit code.
pub fn execute(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match run(config, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// Full entry point: parse, validate, execute.
pub fn main_with_args<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match parse_and_validate(argv) {
        Ok(config) => execute(&config, stdout, stderr),
        Err(CliError::Parse(e)) if !e.use_stderr() => {
            let _ = write!(stdout, "{}", e.render());
            EXIT_OK
        }
        Err(e) => {
            let msg = match &e {
                CliError::Parse(p) => p.render().to_string(),
                other => format!("error: {other}\n"),
            };
            let _ = write!(stderr, "{msg}");
            EXIT_ERROR
        }
    }
}
