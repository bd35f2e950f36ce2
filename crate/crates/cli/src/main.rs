use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use assortvis::apvc::objective as sales_of;
use assortvis::instgen::{gen_3partition, gen_random, PriceMode};
use assortvis::{
    brute_force_apv, brute_force_apvc, check_feasibility, fee_report, revenue, solve_apv, solve_apv_lp,
    what_if, Error, Execution, FeeReport, Instance, Plan, PtasPlanner,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

mod instance_file;

#[derive(Parser, Debug)]
#[command(name = "assortvis", version, about = "Assortment planning with visibility floors")]
struct Cli {
    /// Print per-customer (or per-product) CSV rows instead of the JSON document.
    #[arg(long, global = true)]
    csv: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal plan without a cardinality cap.
    SolveApv {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Nested)]
        method: Method,
    },
    /// Approximate plan under the cardinality cap (equal prices only).
    SolveApvc(ApvcArgs),
    /// Revenue lost to the floors and the per-product fees that cover it.
    Fees {
        #[arg(long)]
        instance: PathBuf,
        /// Also report the fee after raising this product's floor by one.
        #[arg(long)]
        what_if: Option<usize>,
    },
    /// Write a random instance or a 3-PARTITION gadget as JSON.
    Generate(GenerateArgs),
    /// Cross-check the solvers against exhaustive search.
    Verify {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Nested,
    Lp,
}

#[derive(Args, Debug)]
struct ApvcArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, env = "ASSORT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 1_000_000)]
    guess_budget: u128,
    /// Compare with the exhaustive optimum.
    #[arg(long)]
    oracle: bool,
    /// Solve the relaxations on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Random,
    Gadget,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Prices {
    General,
    Equal,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of products (random).
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Number of customers (random).
    #[arg(long, default_value_t = 3)]
    customers: usize,
    #[arg(long, env = "ASSORT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Prices::General)]
    prices: Prices,
    /// Cardinality cap (random).
    #[arg(long)]
    cap: Option<usize>,
    /// Comma-separated positive integers (gadget).
    #[arg(long, value_delimiter = ',')]
    values: Vec<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Solver(Error),
    Json(serde_json::Error),
    Io(String),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Solver(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Solver(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "bad instance JSON: {e}"),
            CliError::Io(msg) => write!(f, "I/O error: {msg}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Solver(Error::Infeasible(_)) => "infeasible",
            CliError::Solver(Error::TooLarge { .. }) => "too_large",
            CliError::Solver(Error::BudgetExceeded { .. }) => "budget_exceeded",
            CliError::Solver(Error::InvalidInstance(_)) => "invalid_instance",
            CliError::Solver(Error::Unsupported(_)) => "unsupported",
            CliError::Solver(Error::Precondition(_) | Error::CannotIncrease { .. } | Error::InvalidAssortment { .. }) => {
                "precondition"
            }
            CliError::Solver(_) => "internal",
            CliError::Json(_) => "bad_json",
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(Error::Infeasible(_)) => 2,
            CliError::Solver(Error::TooLarge { .. } | Error::BudgetExceeded { .. }) => 3,
            CliError::Io(_) => 4,
            _ => 1,
        }
    }
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    exit_code: u8,
    message: String,
}

fn fail(err: &CliError) -> ExitCode {
    let doc = ErrorDoc { error: ErrorBody { kind: err.kind(), exit_code: err.exit_code(), message: err.to_string() } };
    println!("{}", serde_json::to_string_pretty(&doc).expect("error serializes"));
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ASSORTVIS_LOG", "warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return fail(&CliError::Usage(e.kind().to_string()));
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::SolveApv { instance, method } => solve_apv_cmd(&instance_file::read(&instance)?, method, cli.csv),
        Command::SolveApvc(args) => solve_apvc_cmd(&instance_file::read(&args.instance)?, &args, cli.csv),
        Command::Fees { instance, what_if } => fees_cmd(&instance_file::read(&instance)?, what_if, cli.csv),
        Command::Generate(args) => generate_cmd(&args),
        Command::Verify { instance } => verify_cmd(&instance_file::read(&instance)?),
    }
}

fn emit_json<T: Serialize>(doc: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(doc).expect("report serializes");
    writeln!(io::stdout(), "{text}").map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn emit_plan_csv(inst: &Instance, plan: &Plan) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(io::stdout());
    let io_err = |e: csv::Error| CliError::Io(format!("stdout: {e}"));
    w.write_record(["customer", "size", "products", "revenue"]).map_err(io_err)?;
    for (t, s) in plan.assortments().iter().enumerate() {
        let products: Vec<String> = s.members().iter().map(usize::to_string).collect();
        let r = revenue(inst, s)?;
        w.write_record([t.to_string(), s.len().to_string(), products.join(" "), r.to_string()]).map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn assortment_lists(plan: &Plan) -> Vec<Vec<usize>> {
    plan.assortments().iter().map(|s| s.members().to_vec()).collect()
}

fn summarize_plan(plan: &Plan) {
    for (t, s) in plan.assortments().iter().enumerate() {
        eprintln!("  customer {t:>3}: {:?}", s.members());
    }
}

#[derive(Serialize)]
struct ApvDoc {
    command: &'static str,
    method: Method,
    objective: f64,
    feasible: bool,
    assortments: Vec<Vec<usize>>,
}

fn solve_apv_cmd(inst: &Instance, method: Method, csv: bool) -> Result<u8, CliError> {
    if let Some(k) = inst.cap() {
        warn!("solve-apv ignores the cardinality cap k = {k}");
    }
    let plan = match method {
        Method::Nested => solve_apv(inst),
        Method::Lp => solve_apv_lp(inst)?.0,
    };
    eprintln!("objective {:.6} over {} customers ({:?})", plan.objective(), inst.horizon(), method);
    summarize_plan(&plan);
    if csv {
        emit_plan_csv(inst, &plan)?;
    } else {
        emit_json(&ApvDoc {
            command: "solve-apv",
            method,
            objective: plan.objective(),
            feasible: plan.is_feasible(&inst.with_cap(None)?),
            assortments: assortment_lists(&plan),
        })?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct OracleDoc {
    sales: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct ApvcDoc {
    command: &'static str,
    epsilon: f64,
    seed: u64,
    reps: usize,
    guess_budget: u128,
    sales: f64,
    rounded_sales: f64,
    pairs: usize,
    guesses: u128,
    admissible_guesses: usize,
    feasible_guesses: usize,
    guess_position: u128,
    rep: usize,
    rejected_roundings: usize,
    assortments: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleDoc>,
}

fn solve_apvc_cmd(inst: &Instance, args: &ApvcArgs, csv: bool) -> Result<u8, CliError> {
    if !check_feasibility(inst)? {
        return Err(Error::Infeasible("visibility floors cannot be met under the cardinality cap".into()).into());
    }
    let exec = if args.sequential { Execution::Sequential } else { Execution::Parallel };
    let planner = PtasPlanner::new(inst, args.epsilon, args.guess_budget, exec)?;
    let stats = planner.stats();
    info!("{} feasible relaxations out of {} guesses", stats.feasible, stats.guesses);
    let out = planner.round_best(args.seed, args.reps)?;
    let oracle = if args.oracle {
        let best = sales_of(inst, &brute_force_apvc(inst)?);
        Some(OracleDoc { sales: best, ratio: out.sales / best })
    } else {
        None
    };

    eprintln!("expected sales {:.6} (eps {}, seed {}, {} guesses)", out.sales, args.epsilon, args.seed, stats.guesses);
    if let Some(o) = &oracle {
        eprintln!("exhaustive optimum {:.6}, ratio {:.4}", o.sales, o.ratio);
    }
    summarize_plan(&out.plan);
    if csv {
        emit_plan_csv(inst, &out.plan)?;
    } else {
        emit_json(&ApvcDoc {
            command: "solve-apvc",
            epsilon: args.epsilon,
            seed: args.seed,
            reps: args.reps,
            guess_budget: args.guess_budget,
            sales: out.sales,
            rounded_sales: out.sandwich.rounded,
            pairs: stats.pairs,
            guesses: stats.guesses,
            admissible_guesses: stats.admissible,
            feasible_guesses: stats.feasible,
            guess_position: out.guess_position,
            rep: out.rep,
            rejected_roundings: out.rejected,
            assortments: assortment_lists(&out.plan),
            oracle,
        })?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct FeesDoc<'a> {
    command: &'static str,
    #[serde(flatten)]
    report: &'a FeeReport,
    ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    what_if: Option<WhatIfDoc>,
}

#[derive(Serialize)]
struct WhatIfDoc {
    product: usize,
    fee_before: f64,
    fee_after: f64,
    constrained_after: f64,
    delta_after: f64,
}

fn fees_cmd(inst: &Instance, product: Option<usize>, csv: bool) -> Result<u8, CliError> {
    let report = fee_report(inst);
    let what = match product {
        Some(i) if i >= inst.n() => {
            return Err(CliError::Usage(format!("product {i} out of range for {} products", inst.n())));
        }
        Some(i) => {
            let w = what_if(inst, i)?;
            Some(WhatIfDoc {
                product: i,
                fee_before: w.fee_before,
                fee_after: w.fee_after,
                constrained_after: w.after.constrained,
                delta_after: w.after.delta,
            })
        }
        None => None,
    };

    eprintln!(
        "unconstrained {:.6}  constrained {:.6}  loss {:.6}",
        report.unconstrained, report.constrained, report.delta
    );
    eprintln!("{:>7} {:>10} {:>10} {:>6} {:>13} {:>10}", "product", "price", "weight", "floor", "contribution", "fee");
    for i in 0..inst.n() {
        eprintln!(
            "{:>7} {:>10.4} {:>10.4} {:>6} {:>13.6} {:>10.6}",
            i,
            inst.price(i),
            inst.weight(i),
            inst.visibility(i),
            report.contributions[i],
            report.fees[i]
        );
    }
    if let Some(w) = &what {
        eprintln!("raising the floor of product {}: fee {:.6} -> {:.6}", w.product, w.fee_before, w.fee_after);
    }

    if csv {
        let mut w = csv::Writer::from_writer(io::stdout());
        let io_err = |e: csv::Error| CliError::Io(format!("stdout: {e}"));
        w.write_record(["product", "price", "weight", "visibility", "contribution", "fee"]).map_err(io_err)?;
        for i in 0..inst.n() {
            w.write_record([
                i.to_string(),
                inst.price(i).to_string(),
                inst.weight(i).to_string(),
                inst.visibility(i).to_string(),
                report.contributions[i].to_string(),
                report.fees[i].to_string(),
            ])
            .map_err(io_err)?;
        }
        w.flush().map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    } else {
        emit_json(&FeesDoc { command: "fees", report: &report, ratio: report.ratio(), what_if: what })?;
    }
    Ok(0)
}

fn generate_cmd(args: &GenerateArgs) -> Result<u8, CliError> {
    let inst = match args.kind {
        Kind::Random => {
            let mode = match args.prices {
                Prices::General => PriceMode::General,
                Prices::Equal => PriceMode::Equal,
            };
            let inst = gen_random(args.n, args.customers, args.seed, mode, args.cap)?;
            eprintln!("random instance: {} products, {} customers, seed {}", inst.n(), inst.horizon(), args.seed);
            inst
        }
        Kind::Gadget => {
            let (inst, b) = gen_3partition(&args.values)?;
            eprintln!("gadget: {} products, {} customers, target sum {b}", inst.n(), inst.horizon());
            inst
        }
    };
    let text = instance_file::to_json(&inst);
    match &args.out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => writeln!(io::stdout(), "{text}").map_err(|e| CliError::Io(format!("stdout: {e}")))?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    status: &'static str,
    detail: String,
}

impl Check {
    fn from_result(name: &'static str, res: Result<(bool, String), Error>) -> Result<Self, CliError> {
        Ok(match res {
            Ok((ok, detail)) => Check { name, status: if ok { "passed" } else { "failed" }, detail },
            Err(e @ (Error::TooLarge { .. } | Error::BudgetExceeded { .. })) => {
                Check { name, status: "skipped", detail: e.to_string() }
            }
            Err(e) => return Err(e.into()),
        })
    }

    fn skipped(name: &'static str, detail: &str) -> Self {
        Check { name, status: "skipped", detail: detail.into() }
    }
}

#[derive(Serialize)]
struct VerifyDoc {
    command: &'static str,
    checks: Vec<Check>,
    summary: String,
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn verify_cmd(inst: &Instance) -> Result<u8, CliError> {
    let uncapped = inst.with_cap(None)?;
    let nested = solve_apv(&uncapped);
    let mut checks = Vec::new();

    let nested_ok = nested.is_feasible(&uncapped)
        && nested.assortments().windows(2).all(|w| w[1].is_subset_of(&w[0]));
    checks.push(Check {
        name: "nested plan is feasible and nested",
        status: if nested_ok { "passed" } else { "failed" },
        detail: format!("objective {}", nested.objective()),
    });

    checks.push(Check::from_result(
        "nested plan matches exhaustive search",
        brute_force_apv(&uncapped).map(|b| {
            (close(b.objective(), nested.objective(), 1e-9), format!("exhaustive {}", b.objective()))
        }),
    )?);

    checks.push(Check::from_result(
        "LP plan matches nested plan",
        solve_apv_lp(&uncapped).map(|(plan, sol)| {
            let ok = plan.is_feasible(&uncapped) && close(sol.value, nested.objective(), 1e-6);
            (ok, format!("LP value {}", sol.value))
        }),
    )?);

    let fees = fee_report(inst);
    let fee_ok = if fees.delta > 0.0 {
        close(fees.fees.iter().sum(), fees.delta, 1e-9)
    } else {
        fees.fees.iter().all(|&f| f == 0.0)
    };
    checks.push(Check {
        name: "fees cover the revenue loss",
        status: if fee_ok { "passed" } else { "failed" },
        detail: format!("loss {}", fees.delta),
    });

    if inst.cap().is_none() {
        checks.push(Check::skipped("flow feasibility matches exhaustive search", "no cardinality cap"));
        checks.push(Check::skipped("approximation stays below the optimum", "no cardinality cap"));
    } else {
        let feasible = check_feasibility(inst)?;
        let brute = match brute_force_apvc(inst) {
            Ok(plan) => Ok(Some(plan)),
            Err(Error::Infeasible(_)) => Ok(None),
            Err(e) => Err(e),
        };
        checks.push(Check::from_result(
            "flow feasibility matches exhaustive search",
            brute.clone().map(|b| (b.is_some() == feasible, format!("flow says {feasible}"))),
        )?);
        if !inst.has_equal_prices() {
            checks.push(Check::skipped("approximation stays below the optimum", "prices differ"));
        } else if !feasible {
            checks.push(Check::skipped("approximation stays below the optimum", "infeasible"));
        } else {
            let res = brute.and_then(|b| {
                let planner = PtasPlanner::new(inst, 0.5, 1_000_000, Execution::default())?;
                let out = planner.round_best(0, 20)?;
                let Some(b) = b else {
                    return Ok((false, "exhaustive search found no plan".into()));
                };
                let best = sales_of(inst, &b);
                let ok = out.plan.is_feasible(inst) && out.sales <= best + 1e-9;
                Ok((ok, format!("scheme {} vs optimum {best}", out.sales)))
            });
            checks.push(Check::from_result("approximation stays below the optimum", res)?);
        }
    }

    let failed = checks.iter().filter(|c| c.status == "failed").count();
    for c in &checks {
        eprintln!("{:>7}  {}  ({})", c.status, c.name, c.detail);
    }
    let summary = if failed == 0 { "all checks passed".to_string() } else { format!("{failed} checks failed") };
    eprintln!("{summary}");
    emit_json(&VerifyDoc { command: "verify", checks, summary })?;
    Ok(if failed == 0 { 0 } else { 1 })
}
