use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use rayon::prelude::*;
use stlmon_core::engine::{evaluate_spec, robustness_profile, RobustnessResult};
use stlmon_core::metrics::{compare_fleets, fleet_report, CompareReport, FleetReport};
use stlmon_core::parser::parse_spec;
use stlmon_core::sim::{simulate_fleet, EpisodeEntry, FleetManifest, Outcome, SimConfig};
use stlmon_core::trace::{load_trace_file, write_trace_csv, Trace};
use stlmon_core::Specification;

use crate::manifest::{is_trace_file, list_traces, RunManifest, TraceSource};
use crate::{render, Format, Policy};

pub fn load_spec(path: &Path) -> anyhow::Result<Specification> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read spec {}", path.display()))?;
    parse_spec(&text).map_err(|e| anyhow::anyhow!("{}:{e}", path.display()))
}

pub struct Evaluated {
    pub path: PathBuf,
    pub trace: Trace,
    pub results: Vec<RobustnessResult>,
}

/// Loads and evaluates every file in parallel; results keep input order and
/// the first failing file (in that order) is reported.
pub fn evaluate_files(spec: &Specification, files: &[PathBuf]) -> anyhow::Result<Vec<Evaluated>> {
    let outcomes: Vec<anyhow::Result<Evaluated>> = files
        .par_iter()
        .map(|path| {
            let trace = load_trace_file(path, spec).with_context(|| format!("{}", path.display()))?;
            let results = evaluate_spec(spec, &trace).with_context(|| format!("{}", path.display()))?;
            Ok(Evaluated { path: path.clone(), trace, results })
        })
        .collect();
    outcomes.into_iter().collect()
}

fn fleet_reports(spec: &Specification, evaluated: &[Evaluated]) -> anyhow::Result<Vec<FleetReport>> {
    spec.rules
        .iter()
        .enumerate()
        .map(|(i, rule)| {
            let results: Vec<RobustnessResult> = evaluated.iter().map(|e| e.results[i].clone()).collect();
            Ok(fleet_report(&rule.name, &results)?)
        })
        .collect()
}

fn emit(run: &RunManifest, text: &str) -> anyhow::Result<()> {
    match &run.output_path {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn check(run: &RunManifest, profile_dir: Option<&Path>) -> anyhow::Result<ExitCode> {
    let spec = load_spec(&run.spec_path)?;
    let TraceSource::Files(files) = &run.traces else { unreachable!("check takes trace files") };
    for f in files {
        if !f.is_file() {
            bail!("trace file {} does not exist", f.display());
        }
    }
    let evaluated = evaluate_files(&spec, files)?;
    if let Some(dir) = profile_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for e in &evaluated {
            let csv = profile_csv(&spec, &e.trace)?;
            let path = dir.join(format!("{}.profile.csv", e.trace.id()));
            std::fs::write(&path, csv).with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    let text = match run.format {
        Format::Json => render::check_json(&evaluated),
        Format::Table => render::check_table(&evaluated),
    };
    emit(run, &text)?;
    let compliant = evaluated.iter().flat_map(|e| &e.results).all(|r| r.verdict.is_compliant());
    Ok(if compliant { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// One column per formula node, named `rule$.path`.
fn profile_csv(spec: &Specification, trace: &Trace) -> anyhow::Result<String> {
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for rule in &spec.rules {
        let profile = robustness_profile(&rule.formula, trace)?;
        for (path, series) in profile.series {
            columns.push((format!("{}{path}", rule.name), series));
        }
    }
    let mut out = String::from("time");
    for (name, _) in &columns {
        write!(out, ",{name}")?;
    }
    out.push('\n');
    for (i, t) in trace.times().iter().enumerate() {
        write!(out, "{t}")?;
        for (_, series) in &columns {
            write!(out, ",{}", series[i])?;
        }
        out.push('\n');
    }
    Ok(out)
}

fn dir_files(dirs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for dir in dirs {
        files.extend(list_traces(dir)?);
    }
    Ok(files)
}

pub fn report(run: &RunManifest) -> anyhow::Result<ExitCode> {
    let spec = load_spec(&run.spec_path)?;
    let TraceSource::Dirs(dirs) = &run.traces else { unreachable!("report takes directories") };
    let evaluated = evaluate_files(&spec, &dir_files(dirs)?)?;
    let reports = fleet_reports(&spec, &evaluated)?;
    let text = match run.format {
        Format::Json => render::report_json(&reports),
        Format::Table => render::report_table(&reports),
    };
    emit(run, &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn compare(run: &RunManifest) -> anyhow::Result<ExitCode> {
    let spec = load_spec(&run.spec_path)?;
    let TraceSource::Pair { pre, post } = &run.traces else { unreachable!("compare takes two directories") };
    let pre = fleet_reports(&spec, &evaluate_files(&spec, &list_traces(pre)?)?)?;
    let post = fleet_reports(&spec, &evaluate_files(&spec, &list_traces(post)?)?)?;
    let rows: Vec<(FleetReport, FleetReport, CompareReport)> = pre
        .into_iter()
        .zip(post)
        .map(|(a, b)| {
            let cmp = compare_fleets(&a.rule_name, &a, &b, run.alpha)?;
            Ok((a, b, cmp))
        })
        .collect::<anyhow::Result<_>>()?;
    let text = match run.format {
        Format::Json => render::compare_json(&rows),
        Format::Table => render::compare_table(&rows),
    };
    emit(run, &text)?;
    Ok(ExitCode::SUCCESS)
}

pub const MANIFEST_FILE: &str = "manifest.toml";

pub fn simulate(
    config: Option<&Path>,
    policy: Policy,
    n: usize,
    seed: u64,
    out: &Path,
    force: bool,
) -> anyhow::Result<ExitCode> {
    let (cfg, source) = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let cfg = SimConfig::from_toml(&text).with_context(|| format!("{}", path.display()))?;
            (cfg, path.display().to_string())
        }
        None => (SimConfig::preset(), "preset".to_string()),
    };
    let params = cfg.policy(policy.name()).expect("pre and post are always configured").clone();
    let episodes = simulate_fleet(&cfg.scenario, &params, n, seed)?;

    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let existing: Vec<PathBuf> = std::fs::read_dir(out)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_trace_file(p))
        .collect();
    if !existing.is_empty() {
        if !force {
            bail!("{} already contains traces; pass --force to replace them", out.display());
        }
        for path in existing {
            std::fs::remove_file(&path).with_context(|| format!("cannot remove {}", path.display()))?;
        }
    }

    let width = (n - 1).to_string().len().max(4);
    let mut entries = Vec::with_capacity(n);
    for (i, ep) in episodes.iter().enumerate() {
        let file = format!("trace_{i:0width$}.csv");
        let path = out.join(&file);
        std::fs::write(&path, write_trace_csv(&ep.trace)).with_context(|| format!("cannot write {}", path.display()))?;
        entries.push(EpisodeEntry {
            file,
            seed: ep.seed,
            goal_x: ep.goal.0,
            goal_y: ep.goal.1,
            outcome: ep.outcome,
            steps: ep.steps,
        });
    }
    let manifest = FleetManifest {
        config_source: source,
        policy: policy.name().to_string(),
        n,
        base_seed: seed,
        step_seconds: cfg.scenario.dt,
        scenario: cfg.scenario.clone(),
        params,
        episodes: entries,
    };
    std::fs::write(out.join(MANIFEST_FILE), manifest.to_toml())?;

    let count = |o: Outcome| episodes.iter().filter(|e| e.outcome == o).count();
    println!(
        "wrote {n} traces to {} (goal reached {}, collision {}, timeout {})",
        out.display(),
        count(Outcome::GoalReached),
        count(Outcome::Collision),
        count(Outcome::Timeout)
    );
    Ok(ExitCode::SUCCESS)
}
