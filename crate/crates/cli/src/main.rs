//! `duodiv`: divergences between exponential family members from the shell.
//!
//! Exit codes: 0 success, 1 `verify` mismatch, 2 usage error, 3 domain,
//! nesting or other evaluation error.

mod report;
mod verify;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use duodiv::centroids::{minimality_check, point_spread, CentroidProblem, Side};
use duodiv::divergences::{jensen, DuoPair};
use duodiv::families::{self, ExpFamilyMember, ReferenceDensity, SourceParams};
use duodiv::figures::{self, Table};
use duodiv::oracle::{bhattacharyya_numeric, entropy_numeric, kl_numeric};
use duodiv::{DivergenceValue, Error, OracleConfig};
use serde::Serialize;

use report::{Inputs, Minimality, Report};

#[derive(Debug, Parser)]
#[command(
    name = "duodiv",
    version,
    about = "Closed-form divergences between exponential family members"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Also evaluate by quadrature or series summation and report the result.
    #[arg(long, global = true)]
    oracle: bool,

    /// Output format (json by default; csv for `figure`).
    #[arg(long, global = true, value_enum)]
    output: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct PairArgs {
    /// First distribution, e.g. `exponential:lambda=1`.
    #[arg(long)]
    p: SourceParams,
    /// Second distribution.
    #[arg(long)]
    q: SourceParams,
}

#[derive(Debug, Args)]
struct SkewArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Skew parameter in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Kullback-Leibler divergence KL[p : q].
    Kl(PairArgs),
    /// Skewed Bhattacharyya distance −log ∫ p^α q^(1−α).
    Bhat(SkewArgs),
    /// Skewed (duo) Jensen divergence of the log-normalizers at the natural parameters.
    Jensen(SkewArgs),
    /// (Duo) Bregman divergence B(θ_q : θ_p) of the log-normalizers.
    Bregman(PairArgs),
    /// Sided centroid of members of one family in natural coordinates.
    Centroid {
        /// Member; repeat for each point.
        #[arg(long = "p", required = true)]
        points: Vec<SourceParams>,
        #[arg(long, default_value = "right")]
        side: Side,
    },
    /// Entropy of a member (Shannon or differential).
    Entropy {
        #[arg(long)]
        p: SourceParams,
    },
    /// Run the closed-form versus oracle regression suite.
    Verify,
    /// Emit plotting grids.
    Figure {
        #[arg(value_enum)]
        name: FigureName,
        /// Scale of the major quadratic generator.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Grid size (per axis).
        #[arg(long)]
        n: Option<usize>,
        /// Half-width of the grid for the quadratic tables.
        #[arg(long, default_value_t = 2.0)]
        range: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureName {
    /// Duo squared Euclidean surface of (a/2)θ² and θ²/2.
    DuoEuclidean,
    /// θ² and θ⁴ on (0, 1) with their conjugates.
    Quartic,
    /// (a/2)θ² and θ²/2 with their conjugates.
    Quadratic,
}

enum Failure {
    Usage(String),
    Eval(Error),
    Mismatch,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Alpha(_) => Failure::Usage(e.to_string()),
            other => Failure::Eval(other),
        }
    }
}

fn oracle_config() -> Result<OracleConfig, Failure> {
    let mut cfg = OracleConfig::default();
    if let Ok(raw) = std::env::var("DUODIV_ORACLE_TOL") {
        cfg.abs_tol = raw
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("DUODIV_ORACLE_TOL='{raw}' is not a number")))?;
        cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(cfg)
}

fn members(pair: &PairArgs) -> Result<(ExpFamilyMember, ExpFamilyMember), Error> {
    Ok((ExpFamilyMember::new(pair.p)?, ExpFamilyMember::new(pair.q)?))
}

fn pair_inputs(pair: &PairArgs, alpha: Option<f64>) -> Inputs {
    Inputs {
        p: Some(pair.p.to_string()),
        q: Some(pair.q.to_string()),
        alpha,
        ..Inputs::default()
    }
}

fn check_alpha(alpha: f64) -> Result<(), Failure> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Alpha(alpha).into())
    }
}

/// Jensen divergence within a family, duo Jensen divergence across nested
/// families. Unlike `bhat`, overlapping windows that do not nest are refused.
fn jensen_value(p: &ExpFamilyMember, q: &ExpFamilyMember, alpha: f64) -> Result<DivergenceValue, Error> {
    if p.family() == q.family() {
        return jensen(p.log_normalizer(), p.natural(), q.natural(), alpha);
    }
    let (sp, sq) = (p.support(), q.support());
    if !sp.is_subset_of(&sq) && !sq.is_subset_of(&sp) {
        return Err(Error::Nesting(format!(
            "supports of {} and {} are not nested",
            p.source(),
            q.source()
        )));
    }
    families::bhattacharyya(p, q, alpha)
}

/// Bregman divergence within a family, duo Bregman divergence across nested
/// families.
fn bregman_value(p: &ExpFamilyMember, q: &ExpFamilyMember) -> Result<DivergenceValue, Error> {
    if p.family() == q.family() {
        families::kl_same_family(p, q)
    } else {
        families::kl_nested(p, q)
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn write_out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit<T: Serialize>(value: &T) {
    write_out(&(serde_json::to_string_pretty(value).expect("reports serialize") + "\n"));
}

fn emit_report(report: &Report, format: Format) {
    match format {
        Format::Json => emit(report),
        Format::Csv => write_out(&report.to_csv()),
    }
}

#[derive(Serialize)]
struct VerifySummary {
    command: &'static str,
    passed: usize,
    failed: usize,
    tolerance: f64,
    cases: Vec<verify::Case>,
    version: &'static str,
    oracle_config: OracleConfig,
}

#[derive(Serialize)]
struct FigureReport<'a> {
    command: &'static str,
    name: &'static str,
    columns: &'a [String],
    rows: &'a [Vec<f64>],
    version: &'static str,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = oracle_config()?;
    let format = cli.output.unwrap_or(Format::Json);
    let oracle_or = |report: Report, oracle: &dyn Fn() -> Result<DivergenceValue, Error>| {
        if cli.oracle {
            Ok::<_, Error>(report.with_oracle(oracle()?))
        } else {
            Ok(report)
        }
    };
    match &cli.command {
        Command::Kl(pair) => {
            let (p, q) = members(pair)?;
            let closed = families::kl(&p, &q)?;
            let report = Report::new("kl", pair_inputs(pair, None), closed, cfg);
            let report = oracle_or(report, &|| {
                kl_numeric(&ReferenceDensity(pair.p), &ReferenceDensity(pair.q), &cfg)
            })?;
            emit_report(&report, format);
        }
        Command::Bhat(args) | Command::Jensen(args) => {
            check_alpha(args.alpha)?;
            let (p, q) = members(&args.pair)?;
            let (name, closed) = match cli.command {
                Command::Bhat(_) => ("bhat", families::bhattacharyya(&p, &q, args.alpha)?),
                _ => ("jensen", jensen_value(&p, &q, args.alpha)?),
            };
            let report = Report::new(name, pair_inputs(&args.pair, Some(args.alpha)), closed, cfg);
            let report = oracle_or(report, &|| {
                bhattacharyya_numeric(
                    &ReferenceDensity(args.pair.p),
                    &ReferenceDensity(args.pair.q),
                    args.alpha,
                    &cfg,
                )
            })?;
            emit_report(&report, format);
        }
        Command::Bregman(pair) => {
            let (p, q) = members(pair)?;
            let closed = bregman_value(&p, &q)?;
            let report = Report::new("bregman", pair_inputs(pair, None), closed, cfg);
            let report = oracle_or(report, &|| {
                kl_numeric(&ReferenceDensity(pair.p), &ReferenceDensity(pair.q), &cfg)
            })?;
            emit_report(&report, format);
        }
        Command::Entropy { p } => {
            let member = ExpFamilyMember::new(*p)?;
            let est = families::entropy(&member)?;
            let mut report = Report::new(
                "entropy",
                Inputs {
                    p: Some(p.to_string()),
                    ..Inputs::default()
                },
                DivergenceValue::infinite(duodiv::Method::ClosedForm),
                cfg,
            );
            // entropies can be negative, so they are filled in directly
            report.value = Some(est.value);
            report.infinite = false;
            report.abs_error_estimate = est.abs_error;
            if cli.oracle {
                let oracle = entropy_numeric(&ReferenceDensity(*p), &cfg)?;
                report.oracle_value = Some(oracle.value);
                report.oracle_infinite = Some(false);
                report.abs_error_estimate = report.abs_error_estimate.max(oracle.abs_error);
            }
            emit_report(&report, format);
        }
        Command::Centroid { points, side } => {
            let members = points
                .iter()
                .map(|s| ExpFamilyMember::new(*s))
                .collect::<Result<Vec<_>, _>>()?;
            let family = members[0].family();
            if let Some(other) = members.iter().find(|m| m.family() != family) {
                return Err(Error::FamilyMismatch(members[0].source().to_string(), other.source().to_string()).into());
            }
            let f = members[0].log_normalizer();
            let thetas = members.iter().map(|m| m.natural().to_vec()).collect();
            let prob = CentroidProblem::new(DuoPair::new(f, f)?, thetas, *side)?;
            let theta = prob.solve()?;
            let objective = prob.objective(&theta)?;
            let mut report = Report::new(
                "centroid",
                Inputs {
                    points: points.iter().map(|s| s.to_string()).collect(),
                    side: Some(format!("{side:?}").to_lowercase()),
                    ..Inputs::default()
                },
                DivergenceValue::closed_form(objective)?,
                cfg,
            );
            report.centroid_spec = Some(family.source_from_natural(&theta)?.to_string());
            if cli.oracle {
                let radius = 0.1 * point_spread(prob.points());
                let check = minimality_check(&prob, &theta, radius, 100)?;
                report.minimality = Some(Minimality {
                    perturbations: check.perturbations,
                    violations: check.violations,
                    smallest_gap: check.smallest_gap,
                });
            }
            report.centroid = Some(theta);
            emit_report(&report, format);
        }
        Command::Verify => {
            let cases = verify::run(&cfg);
            let failed = cases.iter().filter(|c| !c.pass).count();
            let summary = VerifySummary {
                command: "verify",
                passed: cases.len() - failed,
                failed,
                tolerance: verify::TOLERANCE,
                cases,
                version: duodiv::VERSION,
                oracle_config: cfg,
            };
            match format {
                Format::Json => emit(&summary),
                Format::Csv => {
                    let mut out = String::from("name,closed,oracle,abs_error_estimate,pass\n");
                    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
                    for c in &summary.cases {
                        out += &format!(
                            "\"{}\",{},{},{:?},{}\n",
                            c.name,
                            opt(c.closed),
                            opt(c.oracle),
                            c.abs_error_estimate,
                            c.pass
                        );
                    }
                    write_out(&out);
                }
            }
            if failed > 0 {
                return Err(Failure::Mismatch);
            }
        }
        Command::Figure { name, a, n, range } => {
            let (label, table): (&'static str, Table) = match name {
                FigureName::DuoEuclidean => (
                    "duo-euclidean",
                    figures::duo_squared_euclidean(*a, -range, *range, n.unwrap_or(41))?,
                ),
                FigureName::Quartic => ("quartic", figures::quartic_conjugates(n.unwrap_or(200))?),
                FigureName::Quadratic => (
                    "quadratic",
                    figures::quadratic_conjugates(*a, *range, n.unwrap_or(101))?,
                ),
            };
            match cli.output.unwrap_or(Format::Csv) {
                Format::Csv => write_out(&table.to_csv()),
                Format::Json => emit(&FigureReport {
                    command: "figure",
                    name: label,
                    columns: &table.columns,
                    rows: &table.rows,
                    version: duodiv::VERSION,
                }),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("duodiv: usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Eval(e)) => {
            eprintln!("duodiv: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Mismatch) => {
            eprintln!("duodiv: verify found mismatches");
            ExitCode::from(1)
        }
    }
}
