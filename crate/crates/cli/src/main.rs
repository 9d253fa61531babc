use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use finrank::engine::{expectation_sylvester, sylvester_applicable};
use finrank::generate::{generate_instance, GenConfig};
use finrank::instance::read_instance;
use finrank::oracle::brute_force_expectation;
use finrank::scaling::{fit_slope, run_sweep, target_slope, write_csv, ScalingError};
use finrank::verify::{run_suite, Suite};
use finrank::{expectation, ComputationReport, Statistics};

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_GUARD: u8 = 3;

#[derive(Parser)]
#[command(name = "finrank", version, about = "Matrix elements of finite-rank multiplicative extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FastPath {
    /// Use the determinant shortcut when every block is one fermion in one mode.
    Auto,
    Engine,
    Sylvester,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the matrix element of an instance file.
    Compute {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        fast_path: FastPath,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded random instance.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "n", default_value_t = 1)]
        blocks: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "boson")]
        stat: Statistics,
        #[arg(long, default_value_t = 1)]
        n_max: u32,
        #[arg(long)]
        single_particle: bool,
        #[arg(long)]
        distinct_ket: bool,
        #[arg(long)]
        vary_dims: bool,
        #[arg(long)]
        number_conserving: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite against the oracles.
    Verify {
        /// One of moments, oracle-small, permanent, determinant,
        /// normal-ordered, conjugation, or `all`.
        suite: String,
        #[arg(long)]
        seeds: Option<u64>,
        /// Print every case, not only the summary.
        #[arg(long)]
        verbose: bool,
    },
    /// Scaling sweep: CSV of op counts and a log-log slope fit.
    Bench {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        stat: Statistics,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force matrix element of a small instance.
    Oracle { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Compute {
            file,
            fast_path,
            json,
        } => compute(file, fast_path, json),
        Command::Gen {
            seed,
            blocks,
            d,
            k,
            stat,
            n_max,
            single_particle,
            distinct_ket,
            vary_dims,
            number_conserving,
            out,
        } => {
            let cfg = GenConfig {
                blocks,
                d,
                k,
                statistics: stat,
                n_max,
                single_particle,
                distinct_ket,
                vary_dims,
                number_conserving,
                ..GenConfig::default()
            };
            gen(&cfg, seed, out)
        }
        Command::Verify {
            suite,
            seeds,
            verbose,
        } => verify(&suite, seeds, verbose),
        Command::Bench {
            k,
            stat,
            ns,
            seed,
            out,
        } => bench(stat, k, &ns, seed, out),
        Command::Oracle { file } => oracle(file),
    }
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn print_report(r: &ComputationReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(r).expect("report serializes"));
        return;
    }
    println!("value = {}", r.value);
    println!("op_count = {}", r.op_count);
    println!("factor_op_count = {}", r.factor_op_count);
    println!("method = {}", serde_json::to_value(r.method).expect("serializes").as_str().unwrap_or(""));
    println!("wall_time = {:.6} s", r.wall_time);
}

fn compute(file: PathBuf, fast_path: FastPath, json: bool) -> ExitCode {
    let inst = match read_instance(&file) {
        Ok(i) => i,
        Err(e) => return input_error(e),
    };
    let sylvester = match fast_path {
        FastPath::Engine => false,
        FastPath::Sylvester => true,
        FastPath::Auto => sylvester_applicable(&inst.bra, &inst.ket),
    };
    let result = if sylvester {
        expectation_sylvester(&inst.bra, &inst.ket, &inst.op)
    } else {
        expectation(&inst.bra, &inst.ket, &inst.op)
    };
    match result {
        Ok(r) => {
            print_report(&r, json);
            ExitCode::SUCCESS
        }
        Err(e) => input_error(e),
    }
}

fn gen(cfg: &GenConfig, seed: u64, out: Option<PathBuf>) -> ExitCode {
    let text = match generate_instance(cfg, seed) {
        Ok(f) => f.to_json(),
        Err(e) => return input_error(e),
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                return input_error(format!("{}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

fn verify(name: &str, seeds: Option<u64>, verbose: bool) -> ExitCode {
    let suites: Vec<Suite> = if name == "all" {
        Suite::ALL.to_vec()
    } else {
        match name.parse() {
            Ok(s) => vec![s],
            Err(e) => return input_error(e),
        }
    };
    let mut all_ok = true;
    for suite in suites {
        let report = run_suite(suite, seeds.unwrap_or(suite.default_seeds()));
        if verbose {
            for c in &report.cases {
                let seed = c.seed.map(|s| format!(" seed {s}")).unwrap_or_default();
                println!(
                    "  {} {}{seed}: error {:.3e} (tol {:.0e})",
                    if c.passed { "ok  " } else { "FAIL" },
                    c.label,
                    c.error,
                    c.tolerance
                );
            }
        }
        let status = if report.passed() { "PASS" } else { "FAIL" };
        println!(
            "{suite}: {status} {} cases, max error {:.3e}, {} within the absolute floor",
            report.cases.len(),
            report.max_error(),
            report.floor_count()
        );
        if !report.passed() {
            all_ok = false;
            let failing = report.failing_seeds();
            if !failing.is_empty() {
                println!("  failing seeds: {failing:?}");
            }
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}

fn bench(stat: Statistics, k: usize, ns: &[usize], seed: u64, out: Option<PathBuf>) -> ExitCode {
    let records = match run_sweep(stat, k, ns, seed) {
        Ok(r) => r,
        Err(e @ ScalingError::ResourceGuard { .. }) => {
            eprintln!("refused: {e}");
            return ExitCode::from(EXIT_GUARD);
        }
        Err(e) => return input_error(e),
    };
    let written = match &out {
        Some(path) => File::create(path)
            .map_err(|e| format!("{}: {e}", path.display()))
            .and_then(|f| write_csv(&records, f).map_err(|e| e.to_string())),
        None => write_csv(&records, io::stdout().lock()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        return input_error(e);
    }
    // Keep stdout clean for the CSV when no file was given.
    let mut summary: Box<dyn Write> = if out.is_some() {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    };
    match fit_slope(&records) {
        Ok(fit) => {
            let _ = writeln!(
                summary,
                "slope = {:.4} (target {}), intercept = {:.4}, r^2 = {:.6}",
                fit.slope,
                target_slope(stat, k),
                fit.intercept,
                fit.r_squared
            );
        }
        Err(e) => {
            let _ = writeln!(summary, "no slope fit: {e}");
        }
    }
    ExitCode::SUCCESS
}

fn oracle(file: PathBuf) -> ExitCode {
    let inst = match read_instance(&file) {
        Ok(i) => i,
        Err(e) => return input_error(e),
    };
    match brute_force_expectation(&inst.bra, &inst.ket, &inst.op.dense()) {
        Ok(v) => {
            println!("value = {v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("refused: {e}");
            ExitCode::from(EXIT_GUARD)
        }
    }
}
