mod input;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde_json::json;

use mwvar::estimators::{analyze, wald_ci, Estimator};
use mwvar::oracle::{self, decimal_string, SweepConfig, DEFAULT_BUDGET};
use mwvar::simulation::{self, ExperimentConfig};
use mwvar::Error;

const DIGITS: usize = 40;

/// Variance estimation for the Mann-Whitney effect.
#[derive(Parser)]
#[command(name = "mwvar", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate θ and the variance of its estimator from two samples.
    Estimate(EstimateArgs),
    /// Run a Monte-Carlo experiment described by a JSON config.
    Simulate(SimulateArgs),
    /// Run a verification oracle.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Args)]
struct EstimateArgs {
    /// Group-1 values, one per line.
    #[arg(long, requires = "group2", conflicts_with = "data")]
    group1: Option<PathBuf>,
    /// Group-2 values, one per line.
    #[arg(long, requires = "group1", conflicts_with = "data")]
    group2: Option<PathBuf>,
    /// Two-column CSV `group,value` with groups labelled 1 and 2.
    #[arg(long, required_unless_present = "group1")]
    data: Option<PathBuf>,
    /// Print a JSON report.
    #[arg(long)]
    json: bool,
    /// Confidence level of the Wald interval.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, default_value = "bernoulli_half")]
    fixture: String,
    #[arg(long, default_value_t = 2)]
    n1: usize,
    #[arg(long, default_value_t = 2)]
    n2: usize,
    /// Maximal number of enumerated outcomes.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Exact E(σ̂_N²) = σ_N² by enumeration.
    Unbiasedness(ExactArgs),
    /// Exact bias of one estimator by enumeration.
    Bias {
        #[command(flatten)]
        exact: ExactArgs,
        #[arg(long, default_value = "DL")]
        estimator: Estimator,
    },
    /// Bounds and count-sum identities on random samples.
    Identities {
        #[arg(long, default_value_t = 100_000)]
        nsim: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Exhaustive search for samples attaining the upper bound.
    Bound {
        #[arg(long, default_value_t = 2)]
        n1: usize,
        #[arg(long, default_value_t = 2)]
        n2: usize,
        /// Comma-separated value grid.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        grid: Vec<f64>,
    },
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    VerificationFailed,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::BudgetExceeded { .. } => 3,
        Error::InvariantViolation(_) => 1,
        _ => 2,
    }
}

fn fmt_rational(x: &BigRational) -> String {
    format!("{} ({x})", decimal_string(x, DIGITS))
}

fn estimate(args: &EstimateArgs) -> mwvar::Result<Status> {
    let sample = input::load(args.group1.as_deref(), args.group2.as_deref(), args.data.as_deref())?;
    let a = analyze(&sample)?;
    let s = a.summary;
    let v = a.variances;
    let (lo, hi) = wald_ci(s.theta_hat, v.sigma_n_sq, args.level)?;
    let mut warnings = Vec::new();
    if v.sigma_shs_sq < 0.0 {
        warnings.push(format!("SHS variance estimate is negative ({})", v.sigma_shs_sq));
    }
    if lo == hi {
        warnings.push(format!("degenerate confidence interval [{lo}, {hi}]: estimated variance is 0"));
    }

    let stdout = io::stdout();
    let mut out = stdout.lock();
    if args.json {
        let variances: serde_json::Map<String, serde_json::Value> =
            Estimator::ALL.iter().map(|&e| (e.label().to_string(), json!(v.get(e)))).collect();
        let report = json!({
            "input": {"group1": sample.group1(), "group2": sample.group2()},
            "n1": s.n1,
            "n2": s.n2,
            "theta_hat": s.theta_hat,
            "tau_hat": s.tau_hat,
            "q1_sq": s.q1_sq,
            "q2_sq": s.q2_sq,
            "variances": variances,
            "upper_bound": a.upper_bound(),
            "ci": {"level": args.level, "lower": lo, "upper": hi},
            "warnings": warnings,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable report"))?;
    } else {
        writeln!(out, "n1            {}", s.n1)?;
        writeln!(out, "n2            {}", s.n2)?;
        writeln!(out, "theta_hat     {}", s.theta_hat)?;
        writeln!(out, "tau_hat       {}", s.tau_hat)?;
        writeln!(out, "Q1^2          {}", s.q1_sq)?;
        writeln!(out, "Q2^2          {}", s.q2_sq)?;
        for e in Estimator::ALL {
            writeln!(out, "{:<14}{}", format!("var_{e}"), v.get(e))?;
        }
        writeln!(out, "upper_bound   {}", a.upper_bound())?;
        writeln!(out, "wald_ci_{}   [{lo}, {hi}]", args.level)?;
        for w in &warnings {
            writeln!(out, "warning: {w}")?;
        }
    }
    Ok(Status::Ok)
}

fn simulate(args: &SimulateArgs) -> mwvar::Result<Status> {
    let mut config = ExperimentConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let output = simulation::run(&config, args.threads)?;
    match &args.out {
        Some(path) => simulation::write_csv(&output.rows, BufWriter::new(File::create(path)?))?,
        None => simulation::write_csv(&output.rows, io::stdout().lock())?,
    }
    for v in &output.verdicts {
        let points: Vec<String> = v.points.iter().map(|(n, l2, se)| format!("N={n}: {l2:.6} ± {se:.6}")).collect();
        eprintln!(
            "{} {}: {}",
            if v.monotone { "monotone" } else { "NOT monotone" },
            v.spec,
            points.join(", ")
        );
    }
    Ok(Status::Ok)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify(cmd: &VerifyCommand) -> mwvar::Result<Status> {
    let ok = match cmd {
        VerifyCommand::Unbiasedness(a) => {
            let dist = oracle::fixture(&a.fixture)?;
            let e = oracle::enumerate(&dist, a.n1, a.n2, a.budget)?;
            let expected = e.expectation(Estimator::Unbiased);
            let ok = *expected == e.sigma_n_sq_true && e.identity_failures == 0;
            println!("{} unbiasedness fixture={} n1={} n2={}", verdict(ok), a.fixture, a.n1, a.n2);
            println!("  outcomes           {}", e.outcomes);
            println!("  E[var_N]           {}", fmt_rational(expected));
            println!("  sigma_N^2          {}", fmt_rational(&e.sigma_n_sq_true));
            println!("  identity failures  {}", e.identity_failures);
            ok
        }
        VerifyCommand::Bias { exact: a, estimator } => {
            let dist = oracle::fixture(&a.fixture)?;
            let e = oracle::enumerate(&dist, a.n1, a.n2, a.budget)?;
            let bias = e.bias(*estimator);
            let (n1, n2) = (a.n1, a.n2);
            let closed = match estimator {
                Estimator::Unbiased => Some(BigRational::from_integer(0.into())),
                Estimator::DeLong => Some(e.truth.bias_dl(n1, n2)),
                Estimator::Shs => {
                    // −τ/(4(n1 − 1)(n2 − 1))
                    let den = BigRational::from_integer((4 * (n1 - 1) * (n2 - 1)).into());
                    Some(-e.truth.tau.clone() / den)
                }
                Estimator::PermeManevski | Estimator::HanleyMcNeil => None,
            };
            let ok = closed.as_ref().map_or(true, |c| *c == bias);
            let label = if closed.is_some() { verdict(ok) } else { "INFO" };
            println!("{label} bias estimator={estimator} fixture={} n1={n1} n2={n2}", a.fixture);
            println!("  enumerated bias    {}", fmt_rational(&bias));
            if let Some(c) = &closed {
                println!("  closed form        {}", fmt_rational(c));
            }
            ok
        }
        VerifyCommand::Identities { nsim, seed, threads } => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                builder = builder.num_threads(*t);
            }
            let pool = builder.build().map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let config = SweepConfig { samples: *nsim, seed: *seed, ..SweepConfig::default() };
            let r = pool.install(|| oracle::identity_sweep(&config));
            let ok = r.passed(1e-12);
            println!("{} identities samples={} seed={seed}", verdict(ok), r.samples);
            println!("  negative estimates        {}", r.negative);
            println!("  above upper bound         {}", r.above_bound);
            println!("  above 1/(4(m-1))          {}", r.above_quarter);
            println!("  zero attained             {}", r.zero_attained);
            println!("  upper bound attained      {}", r.upper_attained);
            println!("  max appendix error        {:e}", r.max_appendix_error);
            println!("  max count identity error  {:e}", r.max_count_identity_error);
            println!("  brute-force checked       {}", r.brute_checked);
            println!("  max brute-force error     {:e}", r.max_brute_error);
            ok
        }
        VerifyCommand::Bound { n1, n2, grid } => {
            let r = oracle::bound_search(*n1, *n2, grid).ok_or_else(|| {
                Error::InvalidParameter("bound search needs n1, n2 >= 2 and a non-empty grid".into())
            })?;
            let ok = r.ratio <= 1.0 + 1e-12;
            println!("{} bound n1={n1} n2={n2} searched={}", verdict(ok), r.searched);
            println!("  max ratio   {}", r.ratio);
            println!("  attained    {}", r.ratio >= 1.0 - 1e-12);
            println!("  group1      {:?}", r.group1);
            println!("  group2      {:?}", r.group2);
            println!("  var_N       {}", r.sigma_n_sq);
            println!("  bound       {}", r.bound);
            ok
        }
    };
    Ok(if ok { Status::Ok } else { Status::VerificationFailed })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(v) => verify(v),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::BudgetExceeded { needed: 2, budget: 1 }), 3);
        assert_eq!(exit_code(&Error::EmptyGroup { group: 1 }), 2);
        assert_eq!(exit_code(&Error::InvalidConfig("x".into())), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
