//! Instance generation, single runs and batch benchmarks for `mtsp-core`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use mtsp_core::{evaluate, run, Error, Instance, IterationRecord, Params, Route, RunConfig, Solution};

/// Process exit codes.
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID_M: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Input that could not be read as an instance, params file or glob.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// Maps an error chain to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<InputError>().is_some() {
            return EXIT_PARSE;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Parse { .. } | Error::InvalidInstance(_) | Error::Json(_) | Error::InvalidParams(_) => {
                    EXIT_PARSE
                }
                Error::InvalidM { .. } => EXIT_INVALID_M,
                Error::Infeasible(_) | Error::TooLarge { .. } => EXIT_INTERNAL,
            };
        }
    }
    1
}

/// One solver run as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub time_limit_s: f64,
    pub params: Params,
    pub best_value: f64,
    pub time_to_best_s: f64,
    pub iterations: usize,
    pub resets: u32,
    pub routes: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<IterationRecord>>,
}

impl RunRecord {
    /// Copy with every wall-clock field zeroed.
    pub fn without_timing(&self) -> RunRecord {
        let mut r = self.clone();
        r.time_to_best_s = 0.0;
        if let Some(trace) = &mut r.trace {
            for it in trace {
                it.elapsed_s = 0.0;
            }
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serialization cannot fail")
    }

    /// Checks that the routes partition the cities and `best_value` matches
    /// recomputation.
    pub fn validate(&self, inst: &Instance) -> mtsp_core::Result<()> {
        let sol = Solution::new(self.routes.iter().map(|s| Route::new(s.clone(), inst)).collect());
        let (z, _) = evaluate(&sol, inst)?;
        if (z - self.best_value).abs() > mtsp_core::TOLERANCE {
            return Err(Error::Infeasible(format!(
                "best_value {} does not match recomputed {z}",
                self.best_value
            )));
        }
        Ok(())
    }
}

/// Reads a TSPLIB file, or the native JSON format for `.json` paths.
pub fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let inst = if is_json {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Instance::parse_json(&text).map(|i| i.with_name(stem))
    } else {
        Instance::parse_tsplib(&text)
    };
    inst.with_context(|| format!("parsing {}", path.display()))
}

pub fn load_params(path: &Path) -> anyhow::Result<Params> {
    let text = fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let params: Params = serde_json::from_str(&text)
        .map_err(Error::from)
        .with_context(|| format!("parsing {}", path.display()))?;
    params.validate()?;
    Ok(params)
}

/// Nearest-integer salesmen count for a percentage of the `n_nodes` nodes
/// (depot included).
pub fn m_from_percent(percent: f64, n_nodes: usize) -> usize {
    (percent / 100.0 * n_nodes as f64).round() as usize
}

/// Writes `count` random instances with seeds `seed + index`. Returns the
/// written paths.
pub fn cmd_generate(n: usize, count: usize, seed: u64, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    if count == 0 {
        bail!(InputError("count must be at least 1".into()));
    }
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut paths = Vec::with_capacity(count);
    for k in 0..count {
        let s = seed + k as u64;
        let inst = Instance::generate_random(n, s)?;
        let path = out_dir.join(format!("random_n{n}_s{s}.json"));
        fs::write(&path, inst.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub m: usize,
    pub seed: u64,
    /// Defaults to one second per node, depot included.
    pub time_limit: Option<f64>,
    pub params: Option<Params>,
    pub max_iterations: Option<u64>,
    pub trace: bool,
    pub parallel: bool,
}

pub fn default_time_limit(inst: &Instance) -> f64 {
    inst.size() as f64
}

/// One engine run on a loaded instance.
pub fn solve_instance(inst: &Instance, id: &str, opts: &SolveOptions) -> anyhow::Result<RunRecord> {
    let n = inst.n_cities();
    if opts.m == 0 || opts.m > n {
        return Err(Error::InvalidM { m: opts.m, n_cities: n }.into());
    }
    let params = opts.params.unwrap_or_else(|| Params::for_ratio(opts.m, n));
    let limit = opts.time_limit.unwrap_or_else(|| default_time_limit(inst));
    if limit.is_nan() || limit <= 0.0 {
        bail!(InputError(format!("time limit must be positive, got {limit}")));
    }
    let mut config = match opts.max_iterations {
        Some(k) => RunConfig::deterministic(opts.seed, k),
        None => RunConfig::timed(opts.seed, Duration::ZERO),
    };
    config.time_limit = Duration::from_secs_f64(limit);
    config.parallel = opts.parallel;
    let (best, log) = run(inst, opts.m, &params, &config)?;
    let record = RunRecord {
        instance: id.to_string(),
        n,
        m: opts.m,
        seed: opts.seed,
        time_limit_s: limit,
        params,
        best_value: best.z,
        time_to_best_s: log.time_to_best_s,
        iterations: log.iterations.len(),
        resets: log.resets,
        routes: log.routes,
        trace: opts.trace.then_some(log.iterations),
    };
    record.validate(inst)?;
    Ok(record)
}

pub fn cmd_solve(instance: &Path, opts: &SolveOptions, out: Option<&Path>) -> anyhow::Result<RunRecord> {
    let inst = load_instance(instance)?;
    let record = solve_instance(&inst, &instance.display().to_string(), opts)?;
    match out {
        Some(path) => fs::write(path, record.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{}", record.to_json()),
    }
    Ok(record)
}

/// One row of the bench summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub m: usize,
    pub runs: usize,
    pub mean: f64,
    pub best: f64,
    pub num_best: usize,
    pub mean_time_to_best_s: f64,
}

pub const SUMMARY_HEADER: &str = "instance,m,runs,mean,best,num_best,mean_time_to_best_s";

/// Aggregates runs per (instance, m). `num_best` counts runs within 1e-9 of
/// the best value among the given runs.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(String, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.instance.clone(), r.m)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((instance, m), runs)| {
            let k = runs.len() as f64;
            let best = runs.iter().map(|r| r.best_value).fold(f64::INFINITY, f64::min);
            SummaryRow {
                instance,
                m,
                runs: runs.len(),
                mean: runs.iter().map(|r| r.best_value).sum::<f64>() / k,
                best,
                num_best: runs.iter().filter(|r| r.best_value - best <= 1e-9).count(),
                mean_time_to_best_s: runs.iter().map(|r| r.time_to_best_s).sum::<f64>() / k,
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.instance, r.m, r.runs, r.mean, r.best, r.num_best, r.mean_time_to_best_s
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub m_list: Vec<usize>,
    pub runs: usize,
    pub time_limit: Option<f64>,
    pub max_iterations: Option<u64>,
    pub seed: u64,
}

/// Runs every (instance, m, run) cell, writes each RunRecord under
/// `out/runs/`, and `summary.csv` plus `summary.json` under `out/`.
pub fn cmd_bench(pattern: &str, opts: &BenchOptions, out: &Path) -> anyhow::Result<Vec<SummaryRow>> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| InputError(format!("bad glob {pattern:?}: {e}")))?
        .filter_map(|p| p.ok())
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!(InputError(format!("no instance matches {pattern:?}")));
    }
    if opts.runs == 0 {
        bail!(InputError("runs must be at least 1".into()));
    }
    let runs_dir = out.join("runs");
    fs::create_dir_all(&runs_dir).with_context(|| format!("creating {}", runs_dir.display()))?;
    let mut records = Vec::new();
    for path in &paths {
        let inst = load_instance(path)?;
        let id = path.display().to_string();
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for &m in &opts.m_list {
            for k in 0..opts.runs {
                let solve = SolveOptions {
                    m,
                    seed: opts.seed + k as u64,
                    time_limit: opts.time_limit,
                    params: None,
                    max_iterations: opts.max_iterations,
                    trace: false,
                    parallel: false,
                };
                let record = solve_instance(&inst, &id, &solve)
                    .with_context(|| format!("{id}, m = {m}, run {k}"))?;
                let file = runs_dir.join(format!("{stem}_m{m}_r{k}.json"));
                fs::write(&file, record.to_json() + "\n").with_context(|| format!("writing {}", file.display()))?;
                records.push(record);
            }
        }
    }
    let rows = summarize(&records);
    fs::write(out.join("summary.csv"), summary_csv(&rows))?;
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&rows)? + "\n")?;
    Ok(rows)
}
