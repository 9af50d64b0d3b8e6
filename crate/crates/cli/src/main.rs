mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use mms_core::baranyai::{baranyai_partition_with_path, validate_schedule};
use mms_core::constructions::{
    compute_ank, cover_witness_to_reals, hm_construction_1, hm_construction_2, reals_to_cover_witness,
    small_n_counterexample, star_instance, CoverWitness,
};
use mms_core::deviations::{feige_check, monte_carlo_tail, samuels_search, DeviationQuery};
use mms_core::exact::{format_rational, parse_rational, Rational};
use mms_core::harness::{run_harness, Budgets, RunConfig, Suite, SuiteParams};
use mms_core::hypergraph::{
    erdos_bruteforce, erdos_formula, erdos_fractional_formula, fractional_cover, fractional_matching, matching_number,
    Hypergraph,
};
use mms_core::ksum::{
    check_lemma1_lemma6, check_theorem10, check_theorem5, check_theorem_hm, check_theorem_moderate,
    count_nonnegative_ksums, count_through, is_large, lemma2_edge_bound, negative_sum_hypergraph, reduce, refs,
    Instance, KSumQuery, Thresholds,
};
use mms_core::report::{exit_code, CheckReport, CheckStatus};
use mms_core::Error;

use output::{emit, Format};

#[derive(Parser)]
#[command(
    name = "mms",
    version,
    about = "Exact checks for nonnegative k-sums and related bounds"
)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Wall-clock limit for harness suites; trials started after it
    /// report budget-exceeded.
    #[arg(long, global = true)]
    budget_ms: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ThresholdArgs {
    /// Size constant for the Hilton-Milner bound (n >= c k^2).
    #[arg(long)]
    c_hm: Option<String>,
    /// Size constant for the large-n bound (n >= c k^2).
    #[arg(long)]
    c_thm10: Option<String>,
    /// Size constant for the moderately-large bound (n >= c k^2).
    #[arg(long)]
    c_moderate: Option<String>,
}

impl ThresholdArgs {
    fn resolve(&self) -> Result<Thresholds> {
        let mut th = Thresholds::default();
        for (arg, slot) in [
            (&self.c_hm, &mut th.hm),
            (&self.c_thm10, &mut th.thm10),
            (&self.c_moderate, &mut th.moderate),
        ] {
            if let Some(s) = arg {
                *slot = parse_rational(s)?;
            }
        }
        Ok(th)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Count nonnegative k-sums of an instance and run the bound checks.
    Analyze {
        /// Instance JSON: {"values": ["p/q", ...]}.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        /// 1-based sorted position used for the hypergraph and the
        /// through-count.
        #[arg(long, default_value_t = 1)]
        pivot: usize,
        #[arg(long, value_enum)]
        check: Option<CheckName>,
        /// Deviation parameter for the moderate check.
        #[arg(long, default_value = "1/4")]
        delta: String,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Exact A(n,k) by searching realizable upsets.
    Ank {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Matching numbers of a hypergraph.
    Lp {
        #[arg(value_enum)]
        what: LpWhat,
        #[arg(long)]
        hypergraph: PathBuf,
    },
    /// Small-deviation tail checks for sums of independent variables.
    #[command(subcommand)]
    Feige(FeigeCommand),
    /// Partition all k-subsets of [n] into perfect matchings.
    Baranyai {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        validate: bool,
    },
    /// Print an extremal instance.
    Construct {
        #[arg(value_enum)]
        which: Construction,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Maximum edges with bounded matching number, formula and search.
    Erdos {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        bruteforce: bool,
        /// Also evaluate the fractional formula at this x.
        #[arg(long)]
        x: Option<String>,
    },
    /// Convert between zero-sum instances and cover witnesses.
    Transform {
        #[arg(value_enum)]
        direction: Direction,
        #[arg(long)]
        input: PathBuf,
        /// Required for to-cover.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run a falsification suite.
    Harness {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// Random instances per configuration.
        #[arg(long)]
        trials: Option<usize>,
        /// Grid resolution for the two-point search.
        #[arg(long)]
        grid: Option<u32>,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
}

#[derive(Subcommand)]
enum FeigeCommand {
    /// Exact tail against the small-deviation bound.
    Check {
        #[arg(long)]
        query: PathBuf,
    },
    /// Monte Carlo estimate of the tail.
    Sample {
        #[arg(long)]
        query: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Grid search over two-point laws for the smallest tail.
    Search {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        threshold: String,
        #[arg(long, default_value_t = 200)]
        grid: u32,
        /// Comma-separated means; all 1 by default.
        #[arg(long)]
        means: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckName {
    Lemma1,
    Lemma2,
    Thm5,
    Thm10,
    Hm,
    Moderate,
}

#[derive(Clone, Copy, ValueEnum)]
enum LpWhat {
    Nu,
    NuStar,
    TauStar,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Star,
    SmallN,
    Hm1,
    Hm2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    ToCover,
    ToReals,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Lemmas,
    Theorems,
    Constructions,
    Feige,
    Baranyai,
    Ank,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Lemmas => Suite::Lemmas,
            SuiteArg::Theorems => Suite::Theorems,
            SuiteArg::Constructions => Suite::Constructions,
            SuiteArg::Feige => Suite::Feige,
            SuiteArg::Baranyai => Suite::Baranyai,
            SuiteArg::Ank => Suite::Ank,
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn need(v: Option<usize>, flag: &str) -> Result<usize> {
    v.with_context(|| format!("--{flag} is required here"))
}

/// Output value and exit code.
type Outcome = (Value, i32);

fn reports_outcome(mut head: Value, reports: Vec<CheckReport>) -> Result<Outcome> {
    let code = exit_code(&reports);
    head["reports"] = serde_json::to_value(&reports)?;
    head["exit_code"] = code.into();
    Ok((head, code))
}

fn analyze(
    inst: Instance,
    k: usize,
    pivot: usize,
    check: Option<CheckName>,
    delta: &Rational,
    th: &Thresholds,
) -> Result<Outcome> {
    let q = KSumQuery::new(inst, k)?;
    let n = q.n();
    if pivot == 0 || pivot > n {
        bail!(Error::Precondition(format!("pivot {pivot} out of range 1..={n}")));
    }
    let budget = mms_core::ksum::DEFAULT_ENUM_BUDGET;
    let nodes = mms_core::hypergraph::DEFAULT_MATCHING_BUDGET;
    let count = count_nonnegative_ksums(&q, budget)?;
    let through = count_through(&q, pivot, budget)?;
    let mut head = json!({
        "n": n, "k": k, "count": count, "pivot": pivot,
        "pivot_is_large": is_large(&q, pivot), "through_pivot": through,
    });
    if let Ok(red) = reduce(&q) {
        head["reduction"] = serde_json::to_value(&red)?;
    }

    let selected: Vec<CheckName> = match check {
        Some(c) => vec![c],
        None => vec![
            CheckName::Lemma1,
            CheckName::Lemma2,
            CheckName::Thm5,
            CheckName::Thm10,
            CheckName::Hm,
            CheckName::Moderate,
        ],
    };
    let explicit = check.is_some();
    let mut reports = Vec::new();
    for c in selected {
        let (claim, paper_ref) = match c {
            CheckName::Lemma1 => ("lemma1", refs::LEMMA1),
            CheckName::Lemma2 => ("lemma2", refs::LEMMA2),
            CheckName::Thm5 => ("thm5", refs::THM5),
            CheckName::Thm10 => ("thm10", refs::THM10),
            CheckName::Hm => ("hm", refs::HM),
            CheckName::Moderate => ("moderate", refs::MODERATE),
        };
        let result: mms_core::Result<Vec<CheckReport>> = match c {
            CheckName::Lemma1 => check_lemma1_lemma6(&q, nodes).map(|r| r.reports()),
            CheckName::Lemma2 => reduce(&q)
                .and_then(|red| KSumQuery::new(red.instance, k))
                .and_then(|rq| negative_sum_hypergraph(&rq, pivot))
                .and_then(|h| lemma2_edge_bound(&h, n, k, nodes))
                .map(|r| vec![r.report()]),
            CheckName::Thm5 => check_theorem5(&q, budget).map(|r| r.reports(&q)),
            CheckName::Thm10 => check_theorem10(&q, th, budget).map(|r| r.reports(&q)),
            CheckName::Hm => check_theorem_hm(&q, th, budget).map(|r| vec![r.report(&q)]),
            CheckName::Moderate => check_theorem_moderate(&q, delta, th, budget).map(|r| vec![r.report(&q)]),
        };
        match result {
            Ok(r) => reports.extend(r),
            // with no explicit check, inapplicable claims are skipped
            Err(Error::Precondition(msg)) if !explicit => reports.push(CheckReport::new(
                claim,
                paper_ref,
                CheckStatus::Skipped,
                json!({ "reason": msg }),
            )),
            Err(e) => reports.push(CheckReport::from_error(claim, paper_ref, &e)),
        }
    }
    reports_outcome(head, reports)
}

fn run(cli: &Cli) -> Result<Outcome> {
    Ok(match &cli.command {
        Command::Analyze {
            input,
            k,
            pivot,
            check,
            delta,
            thresholds,
        } => {
            let inst: Instance = read_json(input)?;
            analyze(
                inst,
                *k,
                *pivot,
                *check,
                &parse_rational(delta)?,
                &thresholds.resolve()?,
            )?
        }
        Command::Ank { n, k } => {
            let r = compute_ank(*n, *k, mms_core::constructions::DEFAULT_ANK_BUDGET)?;
            (serde_json::to_value(&r)?, 0)
        }
        Command::Lp { what, hypergraph } => {
            let h: Hypergraph = read_json(hypergraph)?;
            let v = match what {
                LpWhat::Nu => {
                    serde_json::to_value(matching_number(&h, mms_core::hypergraph::DEFAULT_MATCHING_BUDGET)?)?
                }
                LpWhat::NuStar => serde_json::to_value(fractional_matching(&h))?,
                LpWhat::TauStar => serde_json::to_value(fractional_cover(&h))?,
            };
            (v, 0)
        }
        Command::Feige(FeigeCommand::Check { query }) => {
            let q: DeviationQuery = read_json(query)?;
            let c = feige_check(&q, mms_core::deviations::DEFAULT_CONVOLUTION_BUDGET)?;
            let report = CheckReport::new(
                "feige",
                "Pr(X_1 + ... + X_m < m + delta) >= min{delta/(1+delta), 1/13} for independent nonnegative X_i with mean at most 1",
                CheckStatus::from_bool(c.holds),
                serde_json::to_value(&c)?,
            );
            reports_outcome(json!({}), vec![report])?
        }
        Command::Feige(FeigeCommand::Sample { query, trials }) => {
            let q: DeviationQuery = read_json(query)?;
            (serde_json::to_value(monte_carlo_tail(&q, *trials, cli.seed)?)?, 0)
        }
        Command::Feige(FeigeCommand::Search {
            m,
            threshold,
            grid,
            means,
        }) => {
            let means: Vec<Rational> = match means {
                Some(list) => list
                    .split(',')
                    .map(|s| parse_rational(s.trim()))
                    .collect::<Result<_, _>>()?,
                None => vec![Rational::from_integer(1.into()); *m],
            };
            if means.len() != *m {
                bail!("--means lists {} values but --m is {m}", means.len());
            }
            let r = samuels_search(&means, &parse_rational(threshold)?, *grid)?;
            (serde_json::to_value(&r)?, 0)
        }
        Command::Baranyai { n, k, validate } => {
            let (s, path) = baranyai_partition_with_path(*n, *k, mms_core::baranyai::DEFAULT_PARTITION_BUDGET)?;
            let mut v = json!({"n": s.n, "k": s.k, "path": path, "rounds": s.rounds});
            let mut code = 0;
            if *validate {
                let ok = validate_schedule(&s);
                v["valid"] = ok.into();
                if !ok {
                    code = 1;
                }
            }
            (v, code)
        }
        Command::Construct { which, n, k } => {
            let inst = match which {
                Construction::Star => star_instance(need(*n, "n")?)?,
                Construction::SmallN => small_n_counterexample(need(*k, "k")?)?,
                Construction::Hm1 => hm_construction_1(need(*n, "n")?, need(*k, "k")?)?,
                Construction::Hm2 => hm_construction_2(need(*n, "n")?)?,
            };
            (serde_json::to_value(&inst)?, 0)
        }
        Command::Erdos { n, r, s, bruteforce, x } => {
            let mut v = json!({
                "n": n, "r": r, "s": s,
                "formula": erdos_formula(*n, *r, *s)?.to_string(),
            });
            if *bruteforce {
                v["bruteforce"] = serde_json::to_value(erdos_bruteforce(
                    *n,
                    *r,
                    *s,
                    mms_core::constructions::DEFAULT_ANK_BUDGET,
                )?)?;
            }
            if let Some(x) = x {
                let x = parse_rational(x)?;
                v["fractional"] = format_rational(&erdos_fractional_formula(*n, *r, &x)?).into();
            }
            (v, 0)
        }
        Command::Transform { direction, input, k } => match direction {
            Direction::ToCover => {
                let inst: Instance = read_json(input)?;
                let w = reals_to_cover_witness(&inst, need(*k, "k")?, mms_core::ksum::DEFAULT_ENUM_BUDGET)?;
                (serde_json::to_value(&w)?, 0)
            }
            Direction::ToReals => {
                let w: CoverWitness = read_json(input)?;
                (serde_json::to_value(cover_witness_to_reals(&w)?)?, 0)
            }
        },
        Command::Harness {
            suite,
            n,
            k,
            trials,
            grid,
            thresholds,
        } => {
            let cfg = RunConfig {
                seed: cli.seed,
                budgets: Budgets {
                    wall: cli.budget_ms.map(Duration::from_millis),
                    ..Budgets::default()
                },
                thresholds: thresholds.resolve()?,
            };
            let params = SuiteParams {
                n: *n,
                k: *k,
                trials: *trials,
                grid: *grid,
            };
            let report = run_harness((*suite).into(), &params, &cfg)?;
            (serde_json::to_value(&report)?, report.exit_code)
        }
    })
}

/// Exit code for an error: 3 for unmet preconditions, 4 for budgets,
/// 1 otherwise.
fn error_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Precondition(_)) => 3,
        Some(Error::BudgetExceeded { .. }) => 4,
        _ => 1,
    }
}

/// A closed downstream pipe (`mms ... | head`) is not an error.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<serde_json::Error>()
                .is_some_and(|j| j.io_error_kind() == Some(std::io::ErrorKind::BrokenPipe))
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli).and_then(|(v, code)| emit(&v, cli.format).map(|_| code)) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
