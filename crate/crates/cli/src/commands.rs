use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tubeplan::abstraction::{build_cached, Abstraction, CacheFile, TransitionSystem};
use tubeplan::ltl::{plan, Plan};
use tubeplan::runtime::{periodic_count, simulate, Guide, RunLog, RuntimeError};
use tubeplan::semantics::{check_run, Verdict};

use crate::config::Scenario;
use crate::report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Unrealizable(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Unrealizable(_) => 3,
            CliError::Runtime(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// Output of `abstract`.
#[derive(Debug)]
pub struct AbstractSummary {
    pub abstraction: Abstraction,
    pub cache_hit: bool,
    pub seconds: f64,
    pub text: String,
}

pub fn describe_abstraction(abs: &Abstraction) -> String {
    let mut out = String::new();
    let loops = abs.system.edges.iter().filter(|(a, b)| a == b).count();
    let _ = writeln!(out, "states: {}", abs.system.states);
    let _ =
        writeln!(out, "transitions: {} ({} between regions, {} self-loops)", abs.system.edges.len(), abs.system.edges.len() - loops, loops);
    for r in &abs.reports {
        let status = if r.certified { "certified" } else { "not certified" };
        let _ = writeln!(out, "  R{} -> R{}: {status}", r.source + 1, r.target + 1);
        for d in &r.diagnostics {
            let _ = writeln!(out, "      {d}");
        }
    }
    out
}

pub fn cmd_abstract(config: &Path, out_cache: &Path) -> Result<AbstractSummary, CliError> {
    let scenario = Scenario::load(config)?;
    let t0 = Instant::now();
    let (abstraction, cache_hit) =
        build_cached(&scenario.model, &scenario.workspace, scenario.init_region, &scenario.options, out_cache).map_err(io)?;
    let seconds = t0.elapsed().as_secs_f64();
    let mut text = describe_abstraction(&abstraction);
    if cache_hit {
        let _ = writeln!(text, "cache hit: {}", out_cache.display());
    } else {
        let _ = writeln!(text, "built in {seconds:.1} s, cached at {}", out_cache.display());
    }
    Ok(AbstractSummary { abstraction, cache_hit, seconds, text })
}

/// Loads a cache and checks that it belongs to the scenario.
pub fn load_cache(scenario: &Scenario, cache: &Path) -> Result<Abstraction, CliError> {
    let file = CacheFile::load(cache).map_err(|e| CliError::Validation(format!("{}: {e}", cache.display())))?;
    if file.key != scenario.cache_key() {
        return Err(CliError::Validation(format!("{}: cache was built from a different scenario; rerun `abstract`", cache.display())));
    }
    Ok(file.abstraction)
}

/// `plan.json`, written next to the run CSV. Regions are numbered from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub formula_name: String,
    pub formula: String,
    pub states: usize,
    pub prefix: Vec<usize>,
    pub suffix: Vec<usize>,
}

impl PlanFile {
    pub fn new(name: &str, formula: &str, ts: &TransitionSystem, plan: &Plan) -> Self {
        PlanFile {
            formula_name: name.to_string(),
            formula: formula.to_string(),
            states: ts.states,
            prefix: plan.prefix.iter().map(|s| ts.region(*s) + 1).collect(),
            suffix: plan.suffix.iter().map(|s| ts.region(*s) + 1).collect(),
        }
    }

    pub fn plan(&self) -> Result<Plan, CliError> {
        let back = |v: &[usize]| -> Result<Vec<usize>, CliError> {
            v.iter()
                .map(|&r| {
                    if r >= 1 && r <= self.states {
                        Ok(r - 1)
                    } else {
                        Err(CliError::Validation(format!("plan.json: region {r} out of range")))
                    }
                })
                .collect()
        };
        let (prefix, suffix) = (back(&self.prefix)?, back(&self.suffix)?);
        if prefix.is_empty() || suffix.is_empty() {
            return Err(CliError::Validation("plan.json: empty prefix or suffix".into()));
        }
        Ok(Plan { prefix, suffix })
    }
}

#[derive(Debug)]
pub struct SimulateSummary {
    pub plan: Plan,
    pub log: RunLog,
    pub csv: PathBuf,
    pub svg: PathBuf,
    pub text: String,
}

pub struct SimulateArgs<'a> {
    pub config: &'a Path,
    pub cache: &'a Path,
    pub formula: &'a str,
    pub seed: u64,
    pub steps: Option<usize>,
    pub out_dir: &'a Path,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulateSummary, CliError> {
    let scenario = Scenario::load(args.config)?;
    let abs = load_cache(&scenario, args.cache)?;
    let (text, phi) = scenario.formula(args.formula)?;
    let plan = plan(&abs.system, &phi).map_err(|e| CliError::Unrealizable(format!("{}: {e}", args.formula)))?;
    let steps = args.steps.unwrap_or(scenario.config.runtime.steps);
    if steps == 0 {
        return Err(CliError::Validation("steps: must be at least 1".into()));
    }
    let guide = Guide::new(&scenario.workspace, &abs.system, &abs.library, &plan).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::create_dir_all(args.out_dir).map_err(io)?;
    let csv = args.out_dir.join("run.csv");
    let svg = args.out_dir.join("run.svg");
    let plan_path = args.out_dir.join("plan.json");
    let plan_file = PlanFile::new(args.formula, &text, &abs.system, &plan);
    std::fs::write(&plan_path, serde_json::to_string_pretty(&plan_file).map_err(io)? + "\n").map_err(io)?;

    let rt = &scenario.config.runtime;
    let result =
        simulate(&scenario.model, &scenario.workspace, guide, &scenario.initial_state, rt.horizon, steps, args.seed, rt.disturbance);
    let mut log = match result {
        Ok(log) => log,
        Err(RuntimeError::TubeExit { k, margin, log }) => {
            let mut log = *log;
            log.config_hash = scenario.cache_key();
            // the partial log is still useful for diagnosis
            if log.inputs.len() == log.states.len() {
                report::write_run_csv(&csv, &log)?;
            }
            return Err(CliError::Runtime(format!("tube exit at k={k} (margin {margin:e}); partial log in {}", csv.display())));
        }
        Err(e) => return Err(CliError::Runtime(e.to_string())),
    };
    log.config_hash = scenario.cache_key();
    report::write_run_csv(&csv, &log)?;
    std::fs::write(&svg, report::render_svg(&scenario.workspace, &abs.system, &abs.library, &plan, &log)?).map_err(io)?;

    let mut out = String::new();
    let show = |v: &[usize]| v.iter().map(|s| format!("R{}", s + 1)).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "formula {}: {text}", args.formula);
    let _ = writeln!(out, "plan: prefix {} | suffix ({})", show(&plan.prefix), show(&plan.suffix));
    let _ = writeln!(out, "steps: {steps}, seed: {}, horizon: {}", args.seed, rt.horizon);
    let _ = writeln!(out, "communications: {} (periodic = {})", log.comm_count(), periodic_count(steps));
    let _ = writeln!(out, "wrote {}, {}, {}", csv.display(), svg.display(), plan_path.display());
    Ok(SimulateSummary { plan, log, csv, svg, text: out })
}

/// Recomputes the trace of a logged run and checks it against the plan
/// stored next to it (`plan.json`).
pub fn cmd_verify(run_csv: &Path, config: &Path, formula: &str) -> Result<Verdict, CliError> {
    let scenario = Scenario::load(config)?;
    let (text, phi) = scenario.formula(formula)?;
    let plan_path = run_csv.with_file_name("plan.json");
    let plan_text = std::fs::read_to_string(&plan_path).map_err(|e| CliError::Validation(format!("{}: {e}", plan_path.display())))?;
    let plan_file: PlanFile =
        serde_json::from_str(&plan_text).map_err(|e| CliError::Validation(format!("{}: {e}", plan_path.display())))?;
    if plan_file.formula != text {
        return Err(CliError::Validation(format!("{}: plan was made for `{}`, not `{text}`", plan_path.display(), plan_file.formula)));
    }
    if plan_file.states != scenario.workspace.regions.len() {
        return Err(CliError::Validation(format!("{}: region count does not match the scenario", plan_path.display())));
    }
    let plan = plan_file.plan()?;
    let states = report::read_run_states(run_csv)?;
    if states.iter().any(|x| x.len() != scenario.workspace.dim()) {
        return Err(CliError::Validation(format!("{}: state dimension does not match the scenario", run_csv.display())));
    }
    let ts = TransitionSystem::new(plan_file.states, scenario.init_region, std::iter::empty());
    Ok(check_run(&phi, &ts, &plan, &scenario.workspace, &states))
}
