mod report;

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use detpower::adaptive::{evaluate_strategy, history_to_string, optimal_adaptive};
use detpower::closed_forms::{
    commuting_gamma, commuting_zeta, covariant_c_s, covariant_zeta_numeric, equivalent_sg_purity, mix_povms,
    mixing_bounds, noisy_sg_zeta, stein_mixing_bounds, CovariantDiscretization,
};
use detpower::finite::{
    best_product_pair, brute_force_grouping, ml_error_probability, sequence_distribution, sweep_x, ProductInput,
};
use detpower::io::{parse_povm, parse_povm_repr, parse_states, parse_strategy};
use detpower::optimizer::{single_shot_power, zeta_chernoff, zeta_hoeffding, zeta_stein, PowerReport, SearchOptions};
use detpower::{eig_hermitian, validate_povm, DensityMatrix, Error, Povm};

use report::{digest, num, RunReport, Unit};

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_CAP: u8 = 4;

/// Discrimination power of quantum detectors.
#[derive(Parser, Debug)]
#[command(name = "detpower", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    search: SearchArgs,

    /// Report exponents in bits instead of nats.
    #[arg(long, global = true)]
    bits: bool,

    /// Print curves as CSV instead of the JSON report.
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Random restarts of the state-pair search.
    #[arg(long, global = true, default_value_t = 64)]
    restarts: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Refine over mixed states after the pure-state search.
    #[arg(long, global = true)]
    mixed: bool,

    /// Stop refining once a sweep gains less than this.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
}

impl SearchArgs {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            restarts: self.restarts,
            seed: self.seed,
            mixed: self.mixed,
            tol: self.tol,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a POVM file describes a valid measurement.
    Validate { file: PathBuf },
    /// Single-shot error or an asymptotic exponent, optimised over input pairs.
    Exponent {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Type-I rate for the Hoeffding exponent.
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Exact error probabilities for n uses.
    Finite {
        file: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::Ml)]
        mode: Mode,
        /// Candidate states (`{"states": [...]}`); defaults to the eigenbasis of the first element.
        #[arg(long)]
        states: Option<PathBuf>,
        /// Candidate index per use under H0, e.g. `001`.
        #[arg(long)]
        rho_pattern: Option<String>,
        /// Candidate index per use under H1, e.g. `110`.
        #[arg(long)]
        sigma_pattern: Option<String>,
    },
    /// Evaluate a feedback strategy, or search for the best one.
    Adaptive {
        file: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// Table of analytic benchmark values.
    Benchmarks {
        /// Size of the covariant POVM discretization.
        #[arg(long, default_value_t = 10_000)]
        points: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    SingleShot,
    Chernoff,
    Stein,
    Hoeffding,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Ml,
    Brute,
    Sweep,
    Pattern,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Lib(Error),
    /// Report already printed; exit with this code.
    Reported(u8),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<Output, Failure>;

enum Output {
    Report(RunReport),
    Text(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = std::env::var("DETPOWER_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    match run(&cli) {
        Ok(Output::Report(r)) => {
            emit(&(r.to_json() + "\n"));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            emit(&t);
            ExitCode::SUCCESS
        }
        Err(f) => ExitCode::from(report_failure(f)),
    }
}

// A closed pipe downstream is not our failure.
fn emit(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes()).and_then(|_| out.flush());
}

fn report_failure(f: Failure) -> u8 {
    match f {
        Failure::Usage(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Failure::Io(path, e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            EXIT_PARSE
        }
        Failure::Lib(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) => EXIT_PARSE,
                Error::Resource { .. } => EXIT_CAP,
                _ => EXIT_INVALID,
            }
        }
        Failure::Reported(code) => code,
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn text(bytes: &[u8]) -> Result<&str, Failure> {
    std::str::from_utf8(bytes).map_err(|e| Failure::Lib(Error::Parse(e.to_string())))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { file } => cmd_validate(file),
        Command::Exponent { file, kind, rate } => cmd_exponent(cli, file, *kind, *rate),
        Command::Finite {
            file,
            n,
            mode,
            states,
            rho_pattern,
            sigma_pattern,
        } => cmd_finite(
            cli,
            file,
            *n,
            *mode,
            states.as_deref(),
            rho_pattern.as_deref(),
            sigma_pattern.as_deref(),
        ),
        Command::Adaptive {
            file,
            n,
            candidates,
            strategy,
        } => cmd_adaptive(file, *n, candidates.as_deref(), strategy.as_deref()),
        Command::Benchmarks { points } => cmd_benchmarks(cli, *points),
    }
}

fn cmd_validate(file: &Path) -> Outcome {
    let bytes = read(file)?;
    let repr = parse_povm_repr(text(&bytes)?)?;
    let elements = repr.checked_elements()?;
    let check = validate_povm(&elements)?;
    let mut r = RunReport::new("validate", digest(&[&bytes]));
    r.value("valid", json!(check.is_valid()));
    r.value("report", serde_json::to_value(&check).expect("validation report serializes"));
    r.scalar("completeness_residual", check.completeness_residual, Unit::Dimensionless);
    if check.is_valid() {
        Ok(Output::Report(r))
    } else {
        emit(&(r.to_json() + "\n"));
        Err(Failure::Reported(EXIT_INVALID))
    }
}

fn load_povm(file: &Path) -> Result<(Povm, Vec<u8>), Failure> {
    let bytes = read(file)?;
    let p = parse_povm(text(&bytes)?)?;
    Ok((p, bytes))
}

fn power_report(r: &mut RunReport, rep: &PowerReport) {
    r.value(
        "optimizer",
        json!({"rho": rep.optimizer.rho, "sigma": rep.optimizer.sigma}),
    );
    if let Some(s) = rep.s_star {
        r.scalar("s_star", s, Unit::Dimensionless);
    }
    if let Some(g) = &rep.grouping {
        let members: Vec<usize> = g.members().iter().map(|k| k + 1).collect();
        r.value("grouping", json!(members));
    }
}

fn cmd_exponent(cli: &Cli, file: &Path, kind: Kind, rate: Option<f64>) -> Outcome {
    if kind == Kind::Hoeffding && rate.is_none() {
        return Err(Failure::Usage("--rate is required for the hoeffding exponent".into()));
    }
    if kind != Kind::Hoeffding && rate.is_some() {
        return Err(Failure::Usage("--rate only applies to the hoeffding exponent".into()));
    }
    let (p, bytes) = load_povm(file)?;
    let opts = cli.search.options();
    let mut r = RunReport::new("exponent", digest(&[&bytes]));
    let rep = match kind {
        Kind::SingleShot => {
            let rep = single_shot_power(&p)?;
            r.scalar("p_err", rep.value, Unit::Probability);
            power_report(&mut r, &rep);
            return Ok(Output::Report(r));
        }
        Kind::Chernoff => zeta_chernoff(&p, &opts)?,
        Kind::Stein => zeta_stein(&p, &opts)?,
        Kind::Hoeffding => {
            let rate = rate.expect("checked above");
            r.exponent("rate", rate, false);
            zeta_hoeffding(&p, rate, &opts)?
        }
    };
    r.exponent("zeta", rep.value, cli.bits);
    if let Some(o) = rep.orthogonal_value {
        r.exponent("zeta_orthogonal_pairs", o, cli.bits);
    }
    power_report(&mut r, &rep);
    r.diag("restarts_used", json!(rep.restarts_used));
    r.diag("search", serde_json::to_value(opts).expect("options serialize"));
    Ok(Output::Report(r))
}

/// Eigenvectors of the first element, largest eigenvalue first.
fn default_candidates(p: &Povm) -> Result<Vec<DensityMatrix>, Failure> {
    let eig = eig_hermitian(p.element(0))?;
    (0..p.dim())
        .map(|k| DensityMatrix::from_pure(&eig.vector(k)).map_err(Failure::from))
        .collect()
}

fn load_candidates(p: &Povm, file: Option<&Path>, inputs: &mut Vec<Vec<u8>>) -> Result<Vec<DensityMatrix>, Failure> {
    match file {
        Some(f) => {
            let bytes = read(f)?;
            let states = parse_states(text(&bytes)?)?;
            inputs.push(bytes);
            Ok(states)
        }
        None => default_candidates(p),
    }
}

fn parse_pattern(s: &str, n: usize, candidates: usize) -> Result<Vec<usize>, Failure> {
    let pat: Vec<usize> = s
        .chars()
        .map(|c| c.to_digit(10).map(|d| d as usize))
        .collect::<Option<_>>()
        .ok_or_else(|| Failure::Usage(format!("pattern {s:?} must be decimal digits")))?;
    if pat.len() != n {
        return Err(Failure::Usage(format!("pattern {s:?} has {} uses, expected {n}", pat.len())));
    }
    if let Some(k) = pat.iter().find(|&&k| k >= candidates) {
        return Err(Failure::Usage(format!("pattern index {k} but only {candidates} candidates")));
    }
    Ok(pat)
}

fn pattern_string(p: &[usize]) -> String {
    p.iter().map(|k| k.to_string()).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_finite(
    cli: &Cli,
    file: &Path,
    n: usize,
    mode: Mode,
    states: Option<&Path>,
    rho_pattern: Option<&str>,
    sigma_pattern: Option<&str>,
) -> Outcome {
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let (p, bytes) = load_povm(file)?;
    let mut inputs = vec![bytes];
    let candidates = load_candidates(&p, states, &mut inputs)?;
    let slices: Vec<&[u8]> = inputs.iter().map(|b| b.as_slice()).collect();
    let mut r = RunReport::new("finite", digest(&slices));
    r.diag("n", json!(n));
    r.diag("mode", json!(format!("{mode:?}").to_lowercase()));
    match mode {
        Mode::Ml | Mode::Brute => {
            let rho = match rho_pattern {
                Some(s) => parse_pattern(s, n, candidates.len())?,
                None => vec![0; n],
            };
            let sigma = match sigma_pattern {
                Some(s) => parse_pattern(s, n, candidates.len())?,
                None => vec![1.min(candidates.len() - 1); n],
            };
            let a = sequence_distribution(&p, &ProductInput::from_pattern(&candidates, &rho)?)?;
            let b = sequence_distribution(&p, &ProductInput::from_pattern(&candidates, &sigma)?)?;
            let out = if mode == Mode::Ml {
                ml_error_probability(&a, &b)?
            } else {
                brute_force_grouping(&a, &b)?
            };
            r.scalar("p_err", out.p_err, Unit::Probability);
            r.value("rho_pattern", json!(pattern_string(&rho)));
            r.value("sigma_pattern", json!(pattern_string(&sigma)));
            let accepted: Vec<String> = out
                .grouping
                .members()
                .into_iter()
                .map(|idx| history_to_string(&a.sequence(idx)))
                .collect();
            r.value("h0_sequences", json!(accepted));
        }
        Mode::Pattern => {
            let out = best_product_pair(&p, n, &candidates)?;
            r.scalar("p_err", out.p_err, Unit::Probability);
            r.value("rho_pattern", json!(pattern_string(&out.rho_pattern)));
            r.value("sigma_pattern", json!(pattern_string(&out.sigma_pattern)));
            r.diag("heuristic", json!(out.heuristic));
        }
        Mode::Sweep => {
            let sweep = sweep_x(&p, n)?;
            if cli.csv {
                return Ok(Output::Text(sweep.to_csv()));
            }
            let rate_unit = if cli.bits { Unit::Bits } else { Unit::Nats };
            let scale = if cli.bits { 1.0 / std::f64::consts::LN_2 } else { 1.0 };
            let rows = sweep
                .points
                .iter()
                .map(|pt| vec![pt.x, pt.p_err, pt.rate * scale])
                .collect();
            r.curve(
                "sweep",
                &[("x", Unit::Dimensionless), ("p_err", Unit::Probability), ("rate", rate_unit)],
                rows,
            );
        }
    }
    Ok(Output::Report(r))
}

fn cmd_adaptive(file: &Path, n: Option<usize>, candidates: Option<&Path>, strategy: Option<&Path>) -> Outcome {
    let (p, bytes) = load_povm(file)?;
    let mut inputs = vec![bytes];
    if let Some(sf) = strategy {
        if candidates.is_some() {
            return Err(Failure::Usage("a strategy file carries its own candidates".into()));
        }
        let sbytes = read(sf)?;
        let strat = parse_strategy(text(&sbytes)?)?;
        if n.is_some_and(|n| n != strat.depth()) {
            return Err(Failure::Usage(format!("--n differs from the strategy depth {}", strat.depth())));
        }
        inputs.push(sbytes);
        let slices: Vec<&[u8]> = inputs.iter().map(|b| b.as_slice()).collect();
        let ev = evaluate_strategy(&p, &strat)?;
        let mut r = RunReport::new("adaptive", digest(&slices));
        r.scalar("p_err", ev.p_err, Unit::Probability);
        r.diag("depth", json!(strat.depth()));
        r.diag("decision", json!(if strat.grouping().is_some() { "explicit" } else { "ml" }));
        return Ok(Output::Report(r));
    }
    let Some(n) = n else {
        return Err(Failure::Usage("--n is required without a strategy file".into()));
    };
    let cands = load_candidates(&p, candidates, &mut inputs)?;
    let slices: Vec<&[u8]> = inputs.iter().map(|b| b.as_slice()).collect();
    let found = optimal_adaptive(&p, &cands, n)?;
    let mut r = RunReport::new("adaptive", digest(&slices));
    r.scalar("p_err", found.p_err, Unit::Probability);
    r.value("strategy", serde_json::to_value(&found.strategy).expect("strategy serializes"));
    if let Ok(best) = best_product_pair(&p, n, &cands) {
        r.scalar("non_adaptive_p_err", best.p_err, Unit::Probability);
    }
    r.diag("depth", json!(n));
    Ok(Output::Report(r))
}

fn cmd_benchmarks(cli: &Cli, points: usize) -> Outcome {
    let bits = cli.bits;
    let opts = cli.search.options();
    let mut r = RunReport::new("benchmarks", digest(&[]));

    let exact = (4.0 / PI).ln();
    r.exponent("covariant_zeta", exact, bits);
    r.scalar("covariant_c_half", covariant_c_s(0.5)?, Unit::Dimensionless);
    let cov = covariant_zeta_numeric(&CovariantDiscretization::new(points)?)?;
    r.exponent("covariant_zeta_discretized", cov.value, bits);
    r.diag("covariant_points", json!(points));

    let rows: Vec<Vec<f64>> = (1..=9)
        .map(|i| {
            let rr = i as f64 / 10.0;
            let z = noisy_sg_zeta(rr).expect("purity in range");
            vec![rr, if bits { z / std::f64::consts::LN_2 } else { z }]
        })
        .collect();
    r.curve(
        "noisy_sg",
        &[("r", Unit::Dimensionless), ("zeta", if bits { Unit::Bits } else { Unit::Nats })],
        rows,
    );
    r.exponent("noisy_sg_0.62", noisy_sg_zeta(0.62)?, bits);
    r.scalar("equivalent_sg_purity", equivalent_sg_purity(exact)?, Unit::Dimensionless);

    r.scalar("commuting_gamma", commuting_gamma(0.4, 0.2)?, Unit::Dimensionless);
    r.exponent("commuting_zeta", commuting_zeta(0.4, 0.2)?, bits);

    let e = Povm::commuting_qubit(0.4, 0.2)?;
    let g = Povm::commuting_qubit(0.3, 0.1)?;
    let ze = zeta_chernoff(&e, &opts)?.value;
    let zg = zeta_chernoff(&g, &opts)?.value;
    let se = zeta_stein(&e, &opts)?.value;
    let sg = zeta_stein(&g, &opts)?.value;
    let mut checks = Vec::new();
    for w in [0.25, 0.5, 0.75] {
        let mixed = mix_povms(&e, &g, w)?;
        let zm = zeta_chernoff(&mixed, &opts)?.value;
        let sm = zeta_stein(&mixed, &opts)?.value;
        let cb = mixing_bounds((-ze).exp(), (-zg).exp(), ze, zg, w)?;
        let sl = stein_mixing_bounds(se, sg, w)?;
        checks.push(json!({
            "p": w,
            "chernoff": {"lower": num(cb.lower), "value": num(zm), "upper": num(cb.upper)},
            "stein": {"lower": num(sl.lower), "value": num(sm), "upper": num(sl.upper)},
        }));
    }
    // mixing checks stay in nats whatever --bits says
    r.value("mixing", json!({"units": "nats", "checks": checks}));
    r.diag("search", serde_json::to_value(opts).expect("options serialize"));
    Ok(Output::Report(r))
}
