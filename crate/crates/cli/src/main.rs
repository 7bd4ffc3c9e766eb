mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use wconcur::bounds::{
    bound_eq5, bound_eq6, max_per_block_size, pure_bipartite_values, theorem4_pure, theorem4_report,
};
use wconcur::combinatorics::{format_block, parse_block, proper_subsets, set_partitions};
use wconcur::concurrence::{bipartite_concurrence_pure, concurrence_pure, partition_concurrence_pure};
use wconcur::io::{parse_state, parse_sub_values, LoadedState};
use wconcur::roof::{roof_upper_bound, Functional};
use wconcur::verify::{self, Scope, VerifyOptions};
use wconcur::wclass::{
    verify_theorem3, w_balance_identity, w_concurrence_sq, w_pair_partition_concurrence_sq, w_tilde_sum_sq,
};
use wconcur::{BoundReport, DensityMatrix, Error, EstimatorConfig, Partition, PureState, SubsystemSet};

use report::{Residual, RunReport};

/// Tolerance on the N vs (N−1)-partite relation residual.
const TAU_IDENTITY: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "wconcur",
    version,
    about = "Multipartite concurrence of W-class and general states"
)]
struct Cli {
    /// Print a text table instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    /// Omit the timestamp so identical runs give identical output.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Concurrence of a pure state (N-partite, per partition, or across a cut).
    Pure {
        file: PathBuf,
        /// Block partition such as "12|3|4".
        #[arg(long, conflicts_with = "block")]
        partition: Option<String>,
        /// One side of a bipartite cut such as "13".
        #[arg(long)]
        block: Option<String>,
    },
    /// Closed forms for W-class states.
    Wstate {
        file: PathBuf,
        #[command(subcommand)]
        op: WOp,
    },
    /// Lower bounds on the N-partite concurrence.
    Bounds {
        file: PathBuf,
        which: Which,
        /// Sub-concurrence values for mixed input.
        #[arg(long)]
        sub_values: Option<PathBuf>,
        /// Estimate sub-concurrences of mixed input with the roof search.
        #[arg(long, conflicts_with = "sub_values")]
        estimate: bool,
        /// Roof search config used with --estimate.
        #[arg(long, requires = "estimate")]
        config: Option<PathBuf>,
    },
    /// Check every closed form against brute-force evaluation.
    Verify {
        #[arg(value_parser = parse_scope)]
        scope: Scope,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, env = "WCONCUR_SEED", default_value_t = 7)]
        seed: u64,
    },
    /// Upper estimate of a mixed-state concurrence by decomposition search.
    Roof {
        file: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// full, bipartite:<block>, or partition:<partition>.
        #[arg(long, default_value = "full")]
        functional: String,
        /// Write the best decomposition found to this file.
        #[arg(long)]
        decomposition_out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum WOp {
    Concurrence,
    /// Concurrence for the partition pairing parties i and j.
    Pair {
        i: usize,
        j: usize,
    },
    Tilde,
    Theorem3,
    Balance,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Eq5,
    Eq6,
    Thm4,
}

fn parse_scope(s: &str) -> Result<Scope, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Verify(Box<RunReport>),
    Parse(String),
    Invariant(String),
    Uncertifiable(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(msg) => Failure::Parse(msg),
            other => Failure::Invariant(other.to_string()),
        }
    }
}

type Outcome = Result<RunReport, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<LoadedState, Failure> {
    Ok(parse_state(&read(path)?)?)
}

fn require_pure(state: &LoadedState, path: &Path) -> Result<PureState, Failure> {
    state
        .as_pure()
        .ok_or_else(|| Failure::Parse(format!("{} does not hold a pure state", path.display())))
}

fn describe(state: &LoadedState) -> Value {
    let (kind, dims) = match state {
        LoadedState::Pure(p) => ("pure", p.dims().to_vec()),
        LoadedState::Mixed(m) => ("mixed", m.dims().to_vec()),
        LoadedState::W(w) => ("wstate", vec![2; w.n()]),
    };
    json!({ "kind": kind, "dims": dims })
}

fn cmd_pure(file: &Path, partition: Option<&str>, block: Option<&str>) -> Outcome {
    let state = load(file)?;
    let psi = require_pure(&state, file)?;
    let n = psi.n_parties();
    let (target, value) = match (partition, block) {
        (Some(text), _) => {
            let p = Partition::parse(text, n)?;
            (
                json!({ "partition": p.to_string() }),
                partition_concurrence_pure(&psi, &p)?,
            )
        }
        (None, Some(text)) => {
            let b = parse_block(text, n)?;
            (
                json!({ "block": format_block(b, n) }),
                bipartite_concurrence_pure(&psi, b)?,
            )
        }
        (None, None) => (json!({ "parties": n }), concurrence_pure(&psi)?),
    };
    let inputs = json!({ "file": file, "state": describe(&state), "target": target });
    Ok(RunReport::new(
        "pure",
        inputs,
        json!({ "value": value, "value_sq": value * value }),
    ))
}

fn cmd_wstate(file: &Path, op: &WOp) -> Outcome {
    let state = load(file)?;
    let LoadedState::W(a) = &state else {
        return Err(Failure::Parse(format!(
            "{} does not hold W coefficients",
            file.display()
        )));
    };
    let mut residuals = Vec::new();
    let (name, results) = match op {
        WOp::Concurrence => {
            let sq = w_concurrence_sq(a);
            ("concurrence", json!({ "value": sq.sqrt(), "value_sq": sq }))
        }
        WOp::Pair { i, j } => {
            let sq = w_pair_partition_concurrence_sq(a, *i, *j)?;
            let p = Partition::pair_with_singletons(a.n(), *i, *j)?;
            (
                "pair",
                json!({ "partition": p.to_string(), "value": sq.sqrt(), "value_sq": sq }),
            )
        }
        WOp::Tilde => ("tilde", json!({ "tilde_sq": w_tilde_sum_sq(a)? })),
        WOp::Theorem3 => {
            let r = verify_theorem3(a)?;
            residuals.push(Residual::new("theorem3", r.residual, TAU_IDENTITY));
            ("theorem3", serde_json::to_value(r).expect("serializable"))
        }
        WOp::Balance => (
            "balance",
            serde_json::to_value(w_balance_identity(a)?).expect("serializable"),
        ),
    };
    let inputs = json!({ "file": file, "op": name, "n": a.n() });
    Ok(RunReport::new("wstate", inputs, results).with_residuals(residuals))
}

fn load_config(path: Option<&Path>) -> Result<EstimatorConfig, Failure> {
    match path {
        None => Ok(EstimatorConfig::default()),
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Failure::Parse(format!("{}: {e}", p.display()))),
    }
}

fn estimate(rho: &DensityMatrix, functional: &Functional, cfg: &EstimatorConfig) -> Result<f64, Failure> {
    Ok(roof_upper_bound(rho, &|psi: &PureState| functional.evaluate(psi), cfg)?.value)
}

fn mixed_bipartite_estimates(
    rho: &DensityMatrix,
    cfg: &EstimatorConfig,
) -> Result<BTreeMap<SubsystemSet, f64>, Failure> {
    let mut out = BTreeMap::new();
    for block in proper_subsets(rho.n_parties())? {
        out.insert(block, estimate(rho, &Functional::Bipartite(block), cfg)?);
    }
    Ok(out)
}

fn cmd_bounds(
    file: &Path,
    which: Which,
    sub_values: Option<&Path>,
    estimate_flag: bool,
    config: Option<&Path>,
) -> Outcome {
    let state = load(file)?;
    let n = state.n_parties();
    let which_name = match which {
        Which::Eq5 => "eq5",
        Which::Eq6 => "eq6",
        Which::Thm4 => "thm4",
    };
    let mut inputs = json!({ "file": file, "state": describe(&state), "which": which_name });

    if let Some(psi) = state.as_pure() {
        inputs["source"] = json!("exact");
        let results = match which {
            Which::Eq5 => serde_json::to_value(bound_eq5(n, &pure_bipartite_values(&psi)?)?),
            Which::Eq6 => serde_json::to_value(bound_eq6(n, &max_per_block_size(&pure_bipartite_values(&psi)?))?),
            Which::Thm4 => {
                let (bound, condition) = theorem4_pure(&psi)?;
                Ok(json!({ "bound": bound, "condition": condition }))
            }
        }
        .expect("serializable");
        return Ok(RunReport::new("bounds", inputs, results));
    }

    let rho = state.to_density();
    let report: BoundReport = if let Some(path) = sub_values {
        inputs["source"] = json!("sub_values");
        inputs["sub_values"] = json!(path);
        let values = parse_sub_values(&read(path)?, n)?;
        match which {
            Which::Eq5 => bound_eq5(n, &values.bipartite)?,
            Which::Eq6 => bound_eq6(n, &max_per_block_size(&values.bipartite))?,
            Which::Thm4 => theorem4_report(&values.tripartite_sq, true, false)?,
        }
    } else if estimate_flag {
        let cfg = load_config(config)?;
        inputs["source"] = json!("estimate");
        inputs["config"] = serde_json::to_value(&cfg).expect("serializable");
        let mut report = match which {
            Which::Eq5 => bound_eq5(n, &mixed_bipartite_estimates(&rho, &cfg)?)?,
            Which::Eq6 => bound_eq6(n, &max_per_block_size(&mixed_bipartite_estimates(&rho, &cfg)?))?,
            Which::Thm4 => {
                if n != 4 {
                    return Err(Failure::Invariant(format!("thm4 needs 4 parties, got {n}")));
                }
                let mut values = BTreeMap::new();
                for p in set_partitions(4, 3)? {
                    let c = estimate(&rho, &Functional::Partition(p.clone()), &cfg)?;
                    values.insert(p, c * c);
                }
                theorem4_report(&values, true, true)?
            }
        };
        report.heuristic = true;
        report
    } else {
        return Err(Failure::Uncertifiable(
            "cannot certify: mixed input needs --sub-values or --estimate".into(),
        ));
    };
    Ok(RunReport::new("bounds", inputs, json!({ "bound": report })))
}

fn cmd_verify(scope: Scope, n_max: Option<usize>, samples: Option<usize>, seed: u64) -> Outcome {
    let opts = VerifyOptions {
        scope,
        n_max,
        samples,
        seed,
    };
    let result = verify::run(&opts)?;
    let residuals = result
        .checks
        .iter()
        .map(|c| Residual {
            name: c.name.clone(),
            value: c.max_residual,
            tolerance: c.tolerance,
            passed: c.passed,
        })
        .collect();
    let inputs = json!({ "scope": scope, "n_max": n_max, "samples": samples, "seed": seed });
    let passed = result.passed;
    let report = RunReport::new("verify", inputs, serde_json::to_value(&result).expect("serializable"))
        .with_residuals(residuals);
    if passed {
        Ok(report)
    } else {
        Err(Failure::Verify(Box::new(report)))
    }
}

fn parse_functional(text: &str, n: usize) -> Result<Functional, Failure> {
    match text.split_once(':') {
        None if text == "full" => Ok(Functional::Full),
        Some(("bipartite", b)) => Ok(Functional::Bipartite(parse_block(b, n)?)),
        Some(("partition", p)) => Ok(Functional::Partition(Partition::parse(p, n)?)),
        _ => Err(Failure::Parse(format!(
            "unknown functional {text:?}; expected full, bipartite:<block> or partition:<partition>"
        ))),
    }
}

fn cmd_roof(file: &Path, config: Option<&Path>, functional: &str, out: Option<&Path>) -> Outcome {
    let state = load(file)?;
    let rho = state.to_density();
    let f = parse_functional(functional, rho.n_parties())?;
    let cfg = load_config(config)?;
    let report = roof_upper_bound(&rho, &|psi: &PureState| f.evaluate(psi), &cfg)?;
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&report.decomposition).expect("serializable");
        fs::write(path, text).map_err(|e| Failure::Invariant(format!("{}: {e}", path.display())))?;
    }
    let inputs = json!({
        "file": file,
        "state": describe(&state),
        "functional": functional,
        "config": cfg,
        "decomposition_out": out,
    });
    let results = json!({
        "value": report.value,
        "label": report.label,
        "members": report.decomposition.len(),
        "reconstruction_error": report.decomposition.reconstruction_error(&rho),
    });
    Ok(RunReport::new("roof", inputs, results))
}

fn dispatch(command: &Command) -> Outcome {
    match command {
        Command::Pure { file, partition, block } => cmd_pure(file, partition.as_deref(), block.as_deref()),
        Command::Wstate { file, op } => cmd_wstate(file, op),
        Command::Bounds {
            file,
            which,
            sub_values,
            estimate,
            config,
        } => cmd_bounds(file, *which, sub_values.as_deref(), *estimate, config.as_deref()),
        Command::Verify {
            scope,
            n_max,
            samples,
            seed,
        } => cmd_verify(*scope, *n_max, *samples, *seed),
        Command::Roof {
            file,
            config,
            functional,
            decomposition_out,
        } => cmd_roof(file, config.as_deref(), functional, decomposition_out.as_deref()),
    }
}

fn emit(cli: &Cli, mut report: RunReport) {
    if !cli.no_timestamp {
        report.stamp();
    }
    let text = if cli.human {
        report.to_human()
    } else {
        report.to_json() + "\n"
    };
    // A closed pipe downstream is not an error worth reporting.
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(report) => {
            emit(&cli, report);
            ExitCode::SUCCESS
        }
        Err(Failure::Verify(report)) => {
            if let Some(failures) = report.results.get("failures") {
                eprintln!("verification failed; replay cases:\n{failures}");
            }
            emit(&cli, *report);
            ExitCode::from(1)
        }
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Uncertifiable(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
