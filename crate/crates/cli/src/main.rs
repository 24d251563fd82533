//! `bilinear`: command-line front end for the bilinear-games solvers.
//!
//! Stdout is pure JSON; all diagnostics go to stderr. Exit codes:
//! 0 success, 1 parse error, 2 validation/solver error, 3 no applicable
//! algorithm.

use bilinear_games::convert;
use bilinear_games::fptas::{self, RankDecomposition};
use bilinear_games::game::BilinearGame;
use bilinear_games::gen;
use bilinear_games::io::{self, IoError};
use bilinear_games::linalg::matrix_rank;
use bilinear_games::lowrank;
use bilinear_games::oracle;
use bilinear_games::par::Parallelism;
use bilinear_games::rank1;
use bilinear_games::rational::{parse_rat, Rat};
use bilinear_games::zerosum;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_PARSE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NO_ALGORITHM: u8 = 3;

#[derive(Parser)]
#[command(name = "bilinear", about = "Exact and approximate Nash equilibria of bilinear games")]
struct Cli {
    /// Parallelism hint for grid and enumeration work; 1 forces
    /// sequential, omitted uses one thread per core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game file and print an equilibrium certificate.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Auto)]
        algo: Algo,
        /// Approximation parameter, required by the fptas modes.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Convert a source-format game into a bilinear game file.
    Convert {
        #[arg(value_enum)]
        kind: Kind,
        in_path: PathBuf,
        out_path: PathBuf,
    },
    /// Verify a strategy profile against a game and print its certificate.
    Verify {
        game_path: PathBuf,
        profile_path: PathBuf,
    },
    /// Print rank(A+B).
    Rank { game_path: PathBuf },
    /// Enumerate all extreme equilibria.
    Enumerate { game_path: PathBuf },
    /// Generate a random game deterministically from a seed.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        cols: usize,
        #[arg(long, default_value_t = 9)]
        max_entry: i64,
        /// Target rank(A+B); omitted means unconstrained, 0 zero-sum.
        #[arg(long)]
        game_rank: Option<usize>,
        /// With --game-rank k, make the decomposition strictly positive.
        #[arg(long, default_value_t = false)]
        positive: bool,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Algo {
    Auto,
    ZeroSum,
    Rank1,
    FptasAbs,
    FptasRel,
    LowRank,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Bimatrix,
    Bayesian,
    Polymatrix,
    RankingDuel,
    Extensive,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Parse(_) => EXIT_PARSE,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_INVALID, e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let par = Parallelism::from_jobs(cli.jobs);
    match run(cli.command, par) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn load_game(path: &PathBuf) -> Result<BilinearGame, Failure> {
    Ok(io::parse_game(&read_file(path)?)?)
}

fn run(cmd: Command, par: Parallelism) -> Result<(), Failure> {
    match cmd {
        Command::Solve { path, algo, eps } => cmd_solve(&path, algo, eps.as_deref(), par),
        Command::Convert {
            kind,
            in_path,
            out_path,
        } => cmd_convert(kind, &in_path, &out_path),
        Command::Verify {
            game_path,
            profile_path,
        } => {
            let g = load_game(&game_path)?;
            let profile = io::parse_profile(&read_file(&profile_path)?)?;
            let cert = g.verify(&profile).map_err(invalid)?;
            print_json(&io::certificate_to_value(&cert, "verify", None));
            Ok(())
        }
        Command::Rank { game_path } => {
            let g = load_game(&game_path)?;
            print_json(&serde_json::json!(g.rank()));
            Ok(())
        }
        Command::Enumerate { game_path } => {
            let g = load_game(&game_path)?;
            let certs = lowrank::enumerate_extreme_equilibria(&g, par).map_err(invalid)?;
            let list: Vec<_> = certs
                .iter()
                .map(|c| io::certificate_to_value(c, "low-rank", None))
                .collect();
            print_json(&serde_json::Value::Array(list));
            Ok(())
        }
        Command::Gen {
            seed,
            rows,
            cols,
            max_entry,
            game_rank,
            positive,
        } => cmd_gen(seed, rows, cols, max_entry, game_rank, positive),
    }
}

fn cmd_solve(
    path: &PathBuf,
    algo: Algo,
    eps: Option<&str>,
    par: Parallelism,
) -> Result<(), Failure> {
    let g = load_game(path)?;
    let eps = eps
        .map(|s| {
            parse_rat(s).ok_or_else(|| Failure::new(EXIT_PARSE, format!("bad --eps value {s:?}")))
        })
        .transpose()?;
    let algo = if algo == Algo::Auto {
        route(&g, eps.as_ref(), par)?
    } else {
        algo
    };
    let need_eps = || {
        eps.clone().ok_or_else(|| {
            Failure::new(EXIT_NO_ALGORITHM, "--eps is required for the fptas modes")
        })
    };
    let (cert, name, iterations) = match algo {
        Algo::Auto => unreachable!("auto was routed above"),
        Algo::ZeroSum => {
            let (cert, _) = zerosum::solve_zero_sum(&g).map_err(invalid)?;
            (cert, "zero-sum", None)
        }
        Algo::Rank1 => {
            let (cert, trace) = rank1::solve_rank1_traced(&g).map_err(invalid)?;
            (cert, "rank1", Some(trace.iterations))
        }
        Algo::FptasAbs => {
            let cert = fptas::fptas_absolute(&g, &need_eps()?, par).map_err(invalid)?;
            (cert, "fptas-abs", None)
        }
        Algo::FptasRel => {
            let cert = fptas::fptas_relative(&g, &need_eps()?, par).map_err(invalid)?;
            (cert, "fptas-rel", None)
        }
        Algo::LowRank => {
            let cert = lowrank::solve_low_rank(&g, lowrank::Side::Auto, par).map_err(invalid)?;
            (cert, "low-rank", None)
        }
        Algo::Oracle => {
            let certs = oracle::brute_force_equilibria(&g, par).map_err(invalid)?;
            let cert = certs
                .into_iter()
                .next()
                .ok_or_else(|| invalid("oracle found no equilibrium"))?;
            (cert, "oracle", None)
        }
    };
    print_json(&io::certificate_to_value(&cert, name, iterations));
    Ok(())
}

/// Routing by game rank: 0 is a linear program, 1 the exact binary
/// search; otherwise prefer low-rank enumeration when one payoff matrix
/// is small-rank, then the relative scheme, then the oracle.
fn route(g: &BilinearGame, eps: Option<&Rat>, _par: Parallelism) -> Result<Algo, Failure> {
    const LOW_RANK_THRESHOLD: usize = 6;
    const ORACLE_LIMIT: usize = 24;
    match g.rank() {
        0 => return Ok(Algo::ZeroSum),
        1 => return Ok(Algo::Rank1),
        _ => {}
    }
    let low = matrix_rank(&g.a).min(matrix_rank(&g.b)) + g.k1() + g.k2();
    if low <= LOW_RANK_THRESHOLD {
        return Ok(Algo::LowRank);
    }
    if eps.is_some() {
        if let Ok(dec) = RankDecomposition::from_game(g) {
            if dec.is_positive() {
                return Ok(Algo::FptasRel);
            }
        }
    }
    let (m, n) = g.dims();
    if m + n + g.k1() + g.k2() <= ORACLE_LIMIT {
        return Ok(Algo::Oracle);
    }
    Err(Failure::new(
        EXIT_NO_ALGORITHM,
        "no applicable algorithm: game rank > 1, payoff ranks too high for \
         enumeration, no positive decomposition with --eps, and too large \
         for the oracle",
    ))
}

fn cmd_convert(kind: Kind, in_path: &PathBuf, out_path: &PathBuf) -> Result<(), Failure> {
    let text = read_file(in_path)?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let game = match kind {
        Kind::Bimatrix => {
            let (a, b) = io::parse_bimatrix_input(&v)?;
            convert::from_bimatrix(a, b).map_err(invalid)?
        }
        Kind::Bayesian => {
            let spec = io::parse_bayesian_input(&v)?;
            convert::from_bayesian(&spec).map_err(invalid)?
        }
        Kind::Polymatrix => {
            let spec = io::parse_polymatrix_input(&v)?;
            convert::from_polymatrix(&spec).map_err(invalid)?
        }
        Kind::RankingDuel => io::parse_ranking_duel_input(&v)?,
        Kind::Extensive => {
            let tree = io::parse_extensive_input(&v)?;
            convert::from_extensive_form(&tree).map_err(invalid)?.game
        }
    };
    std::fs::write(out_path, io::serialize_game(&game))
        .map_err(|e| invalid(format!("{}: {e}", out_path.display())))?;
    Ok(())
}

fn cmd_gen(
    seed: u64,
    rows: usize,
    cols: usize,
    max_entry: i64,
    game_rank: Option<usize>,
    positive: bool,
) -> Result<(), Failure> {
    use gen::StrategySet::Simplex;
    let mut rng = gen::rng_from_seed(seed);
    let g = match (game_rank, positive) {
        (None, _) => gen::random_game(&mut rng, rows, cols, max_entry, Simplex, Simplex),
        (Some(0), _) => gen::random_zero_sum(&mut rng, rows, cols, max_entry, Simplex, Simplex),
        (Some(k), false) => {
            gen::random_rank_k(&mut rng, rows, cols, k, max_entry, Simplex, Simplex)
        }
        (Some(k), true) => gen::random_positive_rank_k(&mut rng, rows, cols, k, max_entry),
    };
    use std::io::Write;
    let _ = write!(std::io::stdout(), "{}", io::serialize_game(&g));
    Ok(())
}

fn print_json(v: &serde_json::Value) {
    use std::io::Write;
    // Ignore EPIPE so `bilinear ... | head` exits quietly.
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(v).expect("serializable")
    );
}
