//! Batch front door: subcommands, config ingestion, seeded reproducibility
//! and machine-readable JSON reports.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 property violation
//! (a bound exceeded, a check failing, a marginal geometry refused). The
//! report is written even on violations so the evidence survives.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::deviation::{
    self, chd_estimate, deviation_lower, deviation_oracle, extremal_l1, extremal_linf,
    extremal_search, xi_estimate, AnnealParams, DeviationError, PointConfig,
};
use crate::inequalities::{fuzz_exponent, replay_case, ReplayCase};
use crate::nerve::{
    betti_numbers, build_nerve, check_admissible, random_admissible, section_cover_check,
    verify_example_l1, BallSystem, NerveError,
};
use crate::space::{Exponent, NormSpec};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "chd", version, about = "Convex-hull deviation toolkit")]
struct Cli {
    /// RNG seed shared by every stochastic stage.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker count; accepted for interface stability, execution is
    /// sequential so any value reproduces --threads 1.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Tolerance for pass/fail verdicts where applicable.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Deviation of a fixed configuration against the theoretical bounds.
    Compute(ComputeArgs),
    /// Simulated-annealing search for extremal configurations.
    Search(SearchArgs),
    /// Theoretical CHD-constant bounds for a space.
    Bounds(BoundsArgs),
    /// Brute-force barycentric-grid deviation oracle.
    Oracle(OracleArgs),
    /// Hyperplane-projection constant estimation.
    Xi {
        #[command(subcommand)]
        cmd: XiCmd,
    },
    /// Energy inequality fuzzing and replay.
    Ineq {
        #[command(subcommand)]
        cmd: IneqCmd,
    },
    /// Nerve complexes of ball systems.
    Nerve {
        #[command(subcommand)]
        cmd: NerveCmd,
    },
    /// Section covering checks.
    Section {
        #[command(subcommand)]
        cmd: SectionCmd,
    },
}

#[derive(Args)]
struct ComputeArgs {
    /// Norm: l1, linf, l2, lp:<value>, or poly:<file>.
    #[arg(long)]
    norm: Option<String>,
    /// Use the n-point extremal configuration of the chosen norm (l1/linf).
    #[arg(long)]
    extremal_basis: Option<usize>,
    /// JSON file with {"points": [...], "norm": {...}, "radius_bound": r}.
    #[arg(long)]
    points_file: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    restarts: u32,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    norm: String,
    #[arg(long)]
    dim: usize,
    /// Number of points per configuration.
    #[arg(long, short = 'k', default_value_t = 3)]
    points: usize,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[arg(long, default_value_t = 0.5)]
    t0: f64,
    #[arg(long, default_value_t = 0.995)]
    cooling: f64,
    #[arg(long, default_value_t = 16)]
    chains: u32,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    norm: String,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    points_file: PathBuf,
    #[arg(long, default_value_t = 500)]
    grid_steps: usize,
    #[arg(long, default_value_t = 8)]
    restarts: u32,
}

#[derive(Subcommand)]
enum XiCmd {
    /// Lower-bound estimate of the projection constant xi.
    Estimate {
        #[arg(long)]
        norm: String,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
    },
}

#[derive(Subcommand)]
enum IneqCmd {
    /// Random-family fuzzing of the four energy inequalities.
    Fuzz {
        /// Exponent: a number >= 1 or "inf".
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Re-evaluate a recorded failure case.
    Replay {
        #[arg(long)]
        case_file: PathBuf,
    },
}

#[derive(Subcommand)]
enum NerveCmd {
    /// Nerve, Betti profile and admissibility of a ball system.
    Analyze {
        #[arg(long)]
        system_file: PathBuf,
        #[arg(long)]
        max_dim: Option<usize>,
        #[arg(long, default_value_t = 40)]
        grid_steps: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// The four-ball non-contractible covering, verified end to end.
    #[command(name = "example-l1")]
    ExampleL1,
    /// Random admissible systems; their reduced Betti profiles must vanish.
    RandomSuite {
        #[arg(long)]
        norm: String,
        #[arg(long)]
        dim: usize,
        /// Number of systems to generate.
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Balls per system.
        #[arg(long, default_value_t = 5)]
        balls: usize,
    },
}

#[derive(Subcommand)]
enum SectionCmd {
    /// Covering of a hyperplane section by a translated central section.
    Cover {
        #[arg(long)]
        norm: String,
        #[arg(long)]
        dim: usize,
        /// Comma-separated functional coefficients.
        #[arg(long)]
        functional: String,
        #[arg(long)]
        offset: f64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Serialize)]
struct Report {
    command: String,
    inputs: Value,
    seed: u64,
    results: Value,
    wall_time_ms: f64,
    version: &'static str,
}

enum CliError {
    Usage(String),
    Violation(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Violation(_) => 2,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Violation(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn parse_norm(s: &str) -> Result<NormSpec, CliError> {
    match s {
        "l1" => Ok(NormSpec::l1()),
        "linf" => Ok(NormSpec::linf()),
        "l2" => Ok(NormSpec::l2()),
        _ => {
            if let Some(v) = s.strip_prefix("lp:") {
                let p: f64 = v.parse().map_err(usage)?;
                NormSpec::lp(p).map_err(usage)
            } else if let Some(path) = s.strip_prefix("poly:") {
                let text = std::fs::read_to_string(path).map_err(usage)?;
                // Accept either a bare functional list or a full NormSpec.
                if let Ok(fs) = serde_json::from_str::<Vec<Vec<f64>>>(&text) {
                    NormSpec::polyhedral(fs).map_err(usage)
                } else {
                    serde_json::from_str::<NormSpec>(&text).map_err(usage)
                }
            } else {
                Err(CliError::Usage(format!(
                    "unknown norm '{s}' (expected l1, linf, l2, lp:<value>, poly:<file>)"
                )))
            }
        }
    }
}

fn parse_exponent(s: &str) -> Result<Exponent, CliError> {
    if s == "inf" {
        Ok(Exponent::Inf)
    } else {
        let v: f64 = s.parse().map_err(usage)?;
        if v < 1.0 || v.is_nan() {
            Err(CliError::Usage(format!("exponent must be >= 1, got {s}")))
        } else {
            Ok(Exponent::Finite(v))
        }
    }
}

fn load_point_config(path: &PathBuf) -> Result<PointConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(usage)?;
    let raw: PointConfig = serde_json::from_str(&text).map_err(usage)?;
    // Revalidate: serde bypasses the constructor invariants.
    PointConfig::new(raw.points, raw.spec, raw.radius_bound).map_err(usage)
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report serialization")
}

/// Entry point used by the binary and by integration tests.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outputs, not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if !(cli.tol > 0.0) {
        eprintln!("--tol must be positive");
        return 1;
    }

    let start = Instant::now();
    let outcome = dispatch(&cli);
    let (command, inputs, results, violation) = match outcome {
        Ok(ok) => ok,
        Err(e) => {
            eprintln!("{}", e.message());
            return e.code();
        }
    };

    let report = Report {
        command,
        inputs,
        seed: cli.seed,
        results,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        version: ARTIFACT_VERSION,
    };
    let text = serde_json::to_string_pretty(&report).expect("report serialization");
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("cannot write report: {e}");
            return 1;
        }
    } else {
        println!("{text}");
    }
    match violation {
        Some(cause) => {
            eprintln!("{cause}");
            2
        }
        None => 0,
    }
}

type Outcome = (String, Value, Value, Option<String>);

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let seed = cli.seed;
    let tol = cli.tol;
    match &cli.command {
        Cmd::Compute(args) => {
            let (cfg, inputs) = match (&args.points_file, args.extremal_basis) {
                (Some(path), None) => {
                    let cfg = load_point_config(path)?;
                    let inputs = json!({
                        "points_file": path,
                        "config": to_value(&cfg),
                        "restarts": args.restarts,
                    });
                    (cfg, inputs)
                }
                (None, Some(n)) => {
                    let norm = args.norm.as_deref().ok_or_else(|| {
                        CliError::Usage("--extremal-basis requires --norm".into())
                    })?;
                    let cfg = match parse_norm(norm)? {
                        NormSpec::Lp(p) if p.is_one() => extremal_l1(n).map_err(usage)?,
                        NormSpec::Lp(Exponent::Inf) => extremal_linf(n).map_err(usage)?,
                        _ => {
                            return Err(CliError::Usage(
                                "--extremal-basis supports --norm l1 or linf".into(),
                            ))
                        }
                    };
                    let inputs = json!({
                        "norm": norm,
                        "extremal_basis": n,
                        "restarts": args.restarts,
                    });
                    (cfg, inputs)
                }
                _ => {
                    return Err(CliError::Usage(
                        "provide exactly one of --points-file or --extremal-basis".into(),
                    ))
                }
            };
            let report = match chd_estimate(&cfg, args.restarts, seed) {
                Ok(r) => r,
                Err(e @ DeviationError::Consistency { .. }) => {
                    return Err(CliError::Violation(e.to_string()))
                }
                Err(e) => return Err(usage(e)),
            };
            Ok(("chd compute".into(), inputs, to_value(&report), None))
        }

        Cmd::Search(args) => {
            let spec = parse_norm(&args.norm)?;
            let params = AnnealParams {
                t0: args.t0,
                cooling: args.cooling,
                chains: args.chains,
            };
            if !(params.t0 > 0.0) || !(params.cooling > 0.0 && params.cooling < 1.0) {
                return Err(CliError::Usage(
                    "annealing requires t0 > 0 and 0 < cooling < 1".into(),
                ));
            }
            let (cfg, report) =
                extremal_search(&spec, args.dim, args.points, args.budget, seed, &params)
                    .map_err(usage)?;
            let inputs = json!({
                "norm": args.norm,
                "dim": args.dim,
                "points": args.points,
                "budget": args.budget,
                "anneal": to_value(&params),
            });
            let results = json!({
                "config": to_value(&cfg),
                "report": to_value(&report),
            });
            Ok(("chd search".into(), inputs, results, None))
        }

        Cmd::Bounds(args) => {
            let spec = parse_norm(&args.norm)?;
            if args.dim == 0 || !(args.radius > 0.0) {
                return Err(CliError::Usage("dim and radius must be positive".into()));
            }
            let candidates: Vec<Value> = deviation::zeta_upper_candidates(&spec, args.dim)
                .into_iter()
                .map(|(v, src)| json!({"value": v * args.radius, "source": to_value(&src)}))
                .collect();
            let (best, src) = deviation::zeta_upper(&spec, args.dim);
            let inputs = json!({"norm": args.norm, "dim": args.dim, "radius": args.radius});
            let results = json!({
                "candidates": candidates,
                "selected": {"value": best * args.radius, "source": to_value(&src)},
            });
            Ok(("chd bounds".into(), inputs, results, None))
        }

        Cmd::Oracle(args) => {
            let cfg = load_point_config(&args.points_file)?;
            let oracle = deviation_oracle(&cfg, args.grid_steps).map_err(usage)?;
            let lower = deviation_lower(&cfg, args.restarts, seed);
            let inputs = json!({
                "points_file": args.points_file,
                "config": to_value(&cfg),
                "grid_steps": args.grid_steps,
                "restarts": args.restarts,
            });
            let results = json!({
                "oracle": oracle,
                "lower": lower.lower,
                "difference": (oracle - lower.lower).abs(),
            });
            Ok(("chd oracle".into(), inputs, results, None))
        }

        Cmd::Xi { cmd } => match cmd {
            XiCmd::Estimate { norm, dim, budget } => {
                let spec = parse_norm(norm)?;
                if *dim < 2 {
                    return Err(CliError::Usage("xi estimate requires --dim >= 2".into()));
                }
                let est = xi_estimate(&spec, *dim, *budget, seed);
                let inputs = json!({"norm": norm, "dim": dim, "budget": budget});
                Ok(("xi estimate".into(), inputs, to_value(&est), None))
            }
        },

        Cmd::Ineq { cmd } => match cmd {
            IneqCmd::Fuzz { p, count } => {
                let exp = parse_exponent(p)?;
                let outcome = fuzz_exponent(exp, *count, seed);
                let violation = if outcome.failures.is_empty() {
                    None
                } else {
                    Some(format!(
                        "{} inequality failures (worst margin {:.3e})",
                        outcome.failures.len(),
                        outcome.worst_margin
                    ))
                };
                let inputs = json!({"p": p, "count": count});
                Ok(("ineq fuzz".into(), inputs, to_value(&outcome), violation))
            }
            IneqCmd::Replay { case_file } => {
                let text = std::fs::read_to_string(case_file).map_err(usage)?;
                let case: ReplayCase = serde_json::from_str(&text).map_err(usage)?;
                let margin = replay_case(&case).map_err(usage)?;
                let violation = if margin.margin < -1e-9 {
                    Some(format!("inequality violated: margin {:.3e}", margin.margin))
                } else {
                    None
                };
                let inputs = json!({"case_file": case_file});
                Ok(("ineq replay".into(), inputs, to_value(&margin), violation))
            }
        },

        Cmd::Nerve { cmd } => match cmd {
            NerveCmd::Analyze {
                system_file,
                max_dim,
                grid_steps,
                samples,
            } => {
                let text = std::fs::read_to_string(system_file).map_err(usage)?;
                let sys: BallSystem = serde_json::from_str(&text).map_err(usage)?;
                if sys.centers.is_empty() {
                    return Err(CliError::Usage("ball system has no centers".into()));
                }
                let md = max_dim.unwrap_or(sys.centers.len() - 1);
                let nerve = match build_nerve(&sys, md) {
                    Ok(n) => n,
                    Err(e @ NerveError::Marginal(_)) => {
                        return Err(CliError::Violation(e.to_string()))
                    }
                    Err(e) => return Err(usage(e)),
                };
                let betti = betti_numbers(&nerve);
                let (admissible, uncovered) =
                    check_admissible(&sys, (*grid_steps).max(10), *samples, seed);
                let inputs = json!({
                    "system_file": system_file,
                    "system": to_value(&sys),
                    "max_dim": md,
                    "grid_steps": grid_steps,
                    "samples": samples,
                });
                let results = json!({
                    "simplex_counts": (0..=md).map(|d| nerve.count(d)).collect::<Vec<_>>(),
                    "betti": betti.betti,
                    "reduced_trivial": betti.is_trivial(),
                    "admissible": admissible,
                    "uncovered_sample": uncovered,
                });
                Ok(("nerve analyze".into(), inputs, results, None))
            }
            NerveCmd::ExampleL1 => {
                let report = verify_example_l1().map_err(usage)?;
                let violation = if report.pass {
                    None
                } else {
                    Some("example-l1 verification failed".into())
                };
                Ok((
                    "nerve example-l1".into(),
                    json!({}),
                    to_value(&report),
                    violation,
                ))
            }
            NerveCmd::RandomSuite {
                norm,
                dim,
                count,
                balls,
            } => {
                let spec = parse_norm(norm)?;
                if *dim < 2 || *balls < 2 {
                    return Err(CliError::Usage("need --dim >= 2 and --balls >= 2".into()));
                }
                let mut systems = Vec::new();
                let mut nontrivial = 0usize;
                for i in 0..*count {
                    let sys = random_admissible(&spec, *dim, *balls, seed.wrapping_add(i as u64))
                        .map_err(usage)?;
                    // Untruncated nerve: a dimension cap can surface the
                    // boundary sphere of a higher simplex as spurious
                    // homology.
                    let md = *balls - 1;
                    let entry = match build_nerve(&sys, md) {
                        Ok(nerve) => {
                            let betti = betti_numbers(&nerve);
                            if !betti.is_trivial() {
                                nontrivial += 1;
                            }
                            json!({
                                "index": i,
                                "radius": sys.radius,
                                "betti": betti.betti,
                                "reduced_trivial": betti.is_trivial(),
                            })
                        }
                        Err(NerveError::Marginal(subset)) => json!({
                            "index": i,
                            "radius": sys.radius,
                            "marginal_subset": subset,
                        }),
                        Err(e) => return Err(usage(e)),
                    };
                    systems.push(entry);
                }
                let violation = if nontrivial > 0 {
                    Some(format!(
                        "{nontrivial} admissible systems with nonvanishing reduced homology"
                    ))
                } else {
                    None
                };
                let inputs =
                    json!({"norm": norm, "dim": dim, "count": count, "balls": balls});
                let results = json!({"systems": systems, "nontrivial": nontrivial});
                Ok(("nerve random-suite".into(), inputs, results, violation))
            }
        },

        Cmd::Section { cmd } => match cmd {
            SectionCmd::Cover {
                norm,
                dim,
                functional,
                offset,
                k,
                samples,
            } => {
                let spec = parse_norm(norm)?;
                let coeffs: Vec<f64> = functional
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(usage)?;
                if coeffs.len() != *dim {
                    return Err(CliError::Usage(format!(
                        "functional has {} coefficients, expected {dim}",
                        coeffs.len()
                    )));
                }
                if !(offset.abs() < 1.0) {
                    return Err(CliError::Usage("--offset must satisfy |offset| < 1".into()));
                }
                let kk = k.unwrap_or(*dim - 1);
                let report =
                    section_cover_check(&spec, *dim, &coeffs, *offset, kk, *samples, seed, tol)
                        .map_err(usage)?;
                let violation = if report.pass {
                    None
                } else {
                    Some(format!(
                        "section not covered: worst gauge {:.6}",
                        report.worst_gauge
                    ))
                };
                let inputs = json!({
                    "norm": norm,
                    "dim": dim,
                    "functional": coeffs,
                    "offset": offset,
                    "k": kk,
                    "samples": samples,
                    "tol": tol,
                });
                Ok(("section cover".into(), inputs, to_value(&report), violation))
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(args("chd frobnicate")), 1);
    }

    #[test]
    fn norm_strings_parse() {
        assert!(parse_norm("l1").is_ok());
        assert!(parse_norm("linf").is_ok());
        assert!(parse_norm("l2").is_ok());
        assert!(parse_norm("lp:1.5").is_ok());
        assert!(parse_norm("lp:0.5").is_err());
        assert!(parse_norm("garbage").is_err());
    }

    #[test]
    fn extremal_compute_reaches_exact_bound() {
        let out = tempfile::NamedTempFile::new().unwrap();
        let cmd = format!(
            "chd compute --norm l1 --extremal-basis 4 --seed 1 --out {}",
            out.path().display()
        );
        assert_eq!(run(args(&cmd)), 0);
        let report: Value =
            serde_json::from_str(&std::fs::read_to_string(out.path()).unwrap()).unwrap();
        let lower = report["results"]["lower"].as_f64().unwrap();
        let upper = report["results"]["upper"].as_f64().unwrap();
        assert_eq!(upper, 1.5);
        assert!(lower >= 1.5 - 1e-6, "lower {lower}");
    }

    #[test]
    fn compute_without_inputs_is_usage_error() {
        assert_eq!(run(args("chd compute --norm l1")), 1);
    }

    #[test]
    fn empty_points_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.json");
        std::fs::write(
            &path,
            r#"{"points": [], "norm": {"norm": "lp", "p": 1.0}, "radius_bound": 1.0}"#,
        )
        .unwrap();
        let cmd = format!("chd compute --points-file {}", path.display());
        assert_eq!(run(args(&cmd)), 1);
    }

    #[test]
    fn example_l1_exits_zero() {
        let out = tempfile::NamedTempFile::new().unwrap();
        let cmd = format!("chd nerve example-l1 --out {}", out.path().display());
        assert_eq!(run(args(&cmd)), 0);
        let report: Value =
            serde_json::from_str(&std::fs::read_to_string(out.path()).unwrap()).unwrap();
        assert_eq!(report["results"]["betti"], json!([1, 0, 1]));
    }

    #[test]
    fn bounds_reports_selected_value() {
        let out = tempfile::NamedTempFile::new().unwrap();
        let cmd = format!(
            "chd bounds --norm l2 --dim 4 --out {}",
            out.path().display()
        );
        assert_eq!(run(args(&cmd)), 0);
        let report: Value =
            serde_json::from_str(&std::fs::read_to_string(out.path()).unwrap()).unwrap();
        assert_eq!(report["results"]["selected"]["value"], json!(1.0));
    }

    #[test]
    fn reports_are_deterministic_in_results() {
        let a = tempfile::NamedTempFile::new().unwrap();
        let b = tempfile::NamedTempFile::new().unwrap();
        for out in [&a, &b] {
            let cmd = format!(
                "chd compute --norm linf --extremal-basis 3 --seed 9 --out {}",
                out.path().display()
            );
            assert_eq!(run(args(&cmd)), 0);
        }
        let ra: Value =
            serde_json::from_str(&std::fs::read_to_string(a.path()).unwrap()).unwrap();
        let rb: Value =
            serde_json::from_str(&std::fs::read_to_string(b.path()).unwrap()).unwrap();
        assert_eq!(ra["results"], rb["results"]);
    }
}
