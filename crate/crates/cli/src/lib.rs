//! Commands behind the `causalqa` binary. Each returns a [`CliError`] whose
//! [`CliError::exit_code`] the binary hands to the shell.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use causalqa_core::datagen::{generate, GenSpec, GoldenLabel};
use causalqa_core::engine::EngineConfig;
use causalqa_core::eval::{end_to_end, CaseData, EvalReport};
use causalqa_core::forge::{generate_interpret_bench, generate_retrieval_bench, QueryBenchRecord, TopicHierarchy};
use causalqa_core::llm::{LlmClient, LlmConfig};
use causalqa_core::narrator::Backend;
use causalqa_core::parser::LlmInterpreter;
use causalqa_core::rng::derive_seed;
use causalqa_core::{serialize_query, Pipeline, PipelineError, TabularDataset, Task};
use serde_json::{json, Value};
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_ROWS: usize = 10_000;
pub const DEFAULT_EVAL_PER_TASK: usize = 30;
pub const DEFAULT_BENCH_PER_TASK: usize = 300;
pub const INTERPRET_BENCH_SIZE: usize = 400;

pub const BENCH_FILE: &str = "bench.jsonl";
pub const INTERPRET_BENCH_FILE: &str = "interpret_bench.jsonl";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Interpretation(String),
    #[error("{0}")]
    BadParams(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Interpretation(_) | CliError::BadParams(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Interpret(_) => CliError::Interpretation(e.to_string()),
            PipelineError::Engine(_) | PipelineError::Narrate(_) => CliError::Data(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub alpha: f64,
    pub n: usize,
    /// Cases per task for `eval`, records per task for `bench`.
    pub per_task: Option<usize>,
    pub tasks: Vec<Task>,
    pub llm_endpoint: Option<String>,
    pub out: PathBuf,
    pub trace: bool,
    pub json: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            alpha: EngineConfig::default().alpha,
            n: DEFAULT_ROWS,
            per_task: None,
            tasks: Task::ALL.to_vec(),
            llm_endpoint: None,
            out: PathBuf::from("."),
            trace: false,
            json: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::BadParams(format!("--alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.n == 0 {
            return Err(CliError::BadParams("--n must be positive".into()));
        }
        if self.per_task == Some(0) {
            return Err(CliError::BadParams("per-task count must be positive".into()));
        }
        if self.tasks.is_empty() {
            return Err(CliError::BadParams("--tasks selects no task".into()));
        }
        Ok(())
    }

    pub fn pipeline(&self) -> Pipeline {
        let mut p = Pipeline { engine: EngineConfig { alpha: self.alpha }, ..Pipeline::default() };
        if let Some(url) = &self.llm_endpoint {
            let client = LlmClient::new(LlmConfig::new(url.clone()));
            p.interpreter = Box::new(LlmInterpreter { client: client.clone() });
            p.narrator = Backend::Llm(client);
        }
        p
    }
}

/// Parses a comma-separated task list such as `ATE,cgl`.
pub fn parse_tasks(s: &str) -> Result<Vec<Task>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            Task::ALL
                .into_iter()
                .find(|k| k.as_str().eq_ignore_ascii_case(t))
                .ok_or_else(|| CliError::BadParams(format!("unknown task `{t}`")))
        })
        .collect()
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(contents).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

fn query_value(q: &causalqa_core::CausalQuery) -> Value {
    serialize_query(q).ok().and_then(|s| serde_json::from_str(&s).ok()).unwrap_or(Value::Null)
}

/// Answers one question about a CSV file.
pub fn cmd_ask(question: &str, data: &Path, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    cfg.validate()?;
    let d = TabularDataset::read_csv(data).map_err(|e| CliError::Data(format!("data: {e}")))?;
    let run = cfg.pipeline().run(question, &d)?;
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(|e| CliError::Io(e.to_string()));
    if cfg.json {
        let envelope = json!({
            "intent": query_value(&run.intent),
            "method": run.method,
            "result": run.result,
            "interpretation": run.interpretation,
        });
        return w(out, serde_json::to_string_pretty(&envelope).expect("serializable"));
    }
    if cfg.trace {
        w(out, format!("[step 1] intent: {}", serialize_query(&run.intent).unwrap_or_default()))?;
        w(out, format!("[step 2] {}: {}", run.method, serde_json::to_string(&run.result).expect("serializable")))?;
    }
    w(out, run.interpretation.text)
}

/// Generates one synthetic table plus its golden sidecar.
pub fn cmd_datagen(task: Task, spec: &GenSpec, seed: u64, out_dir: &Path, out: &mut dyn Write) -> Result<(PathBuf, PathBuf), CliError> {
    let g = generate(task, spec, seed).map_err(|e| CliError::BadParams(e.to_string()))?;
    let stem = task.as_str().to_lowercase();
    let csv = out_dir.join(format!("{stem}.csv"));
    let sidecar = out_dir.join(format!("{stem}.golden.json"));
    write_atomic(&csv, g.dataset.to_csv_string().as_bytes())?;
    let side = serde_json::to_string_pretty(&g.sidecar()).expect("serializable") + "\n";
    write_atomic(&sidecar, side.as_bytes())?;
    let at =
        |cs: &[causalqa_core::ConditionClause]| cs.iter().map(|c| format!("{} = {}", c.variable, c.value)).collect::<Vec<_>>().join(", ");
    let summary = match &g.truth {
        GoldenLabel::Graph(t) => format!("{} edges over {} nodes", t.edges().len(), t.len()),
        GoldenLabel::Ate { value } => format!("ATE = {value:.4}"),
        GoldenLabel::Hte { value, conditions } => format!("HTE = {value:.4} at {}", at(conditions)),
        GoldenLabel::Mediation(m) => format!("direct = {:.4}, indirect = {:.4}, total = {:.4}", m.direct, m.indirect, m.total),
        GoldenLabel::Policy { action, conditions, .. } => format!("optimal action = {action} at {}", at(conditions)),
    };
    writeln!(out, "{task}: {} rows x {} columns; {summary}", g.dataset.n_rows(), g.dataset.n_cols())
        .map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out, "wrote {} and {}", csv.display(), sidecar.display()).map_err(|e| CliError::Io(e.to_string()))?;
    Ok((csv, sidecar))
}

fn jsonl<T: serde::Serialize>(rows: &[T]) -> String {
    rows.iter().map(|r| serde_json::to_string(r).expect("serializable") + "\n").collect()
}

/// Writes the question bench and the interpretation bench into `cfg.out`.
pub fn cmd_bench(cfg: &RunConfig, out: &mut dyn Write) -> Result<PathBuf, CliError> {
    cfg.validate()?;
    let h = TopicHierarchy::shipped();
    let per = cfg.per_task.unwrap_or(DEFAULT_BENCH_PER_TASK);
    let records: Vec<QueryBenchRecord> =
        generate_retrieval_bench(per, &h, cfg.seed).into_iter().filter(|r| cfg.tasks.contains(&r.golden.task)).collect();
    let share = INTERPRET_BENCH_SIZE.div_ceil(cfg.tasks.len());
    let mut sample: Vec<QueryBenchRecord> = Vec::new();
    for &task in &cfg.tasks {
        sample.extend(records.iter().filter(|r| r.golden.task == task).take(share).cloned());
    }
    sample.truncate(INTERPRET_BENCH_SIZE);
    let interp = generate_interpret_bench(&sample, &h, derive_seed(cfg.seed, 1)).map_err(|e| CliError::Data(e.to_string()))?;
    let bench = cfg.out.join(BENCH_FILE);
    write_atomic(&bench, jsonl(&records).as_bytes())?;
    write_atomic(&cfg.out.join(INTERPRET_BENCH_FILE), jsonl(&interp).as_bytes())?;
    writeln!(out, "wrote {} questions to {} and {} interpretation pairs", records.len(), bench.display(), interp.len())
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(bench)
}

pub fn read_bench(path: &Path) -> Result<Vec<QueryBenchRecord>, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: QueryBenchRecord =
            serde_json::from_str(&line).map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(r);
    }
    Ok(out)
}

/// Runs the full pipeline over the first `per_task` records of each selected
/// task on freshly generated tables; writes the JSON and text reports.
pub fn cmd_eval(bench: &Path, cfg: &RunConfig, out: &mut dyn Write) -> Result<EvalReport, CliError> {
    cfg.validate()?;
    let per = cfg.per_task.unwrap_or(DEFAULT_EVAL_PER_TASK);
    let all = read_bench(bench)?;
    let mut picked: Vec<QueryBenchRecord> = Vec::new();
    for &task in &cfg.tasks {
        picked.extend(all.iter().filter(|r| r.golden.task == task).take(per).cloned());
    }
    let h = TopicHierarchy::shipped();
    let data = CaseData { spec: GenSpec { n: cfg.n, ..GenSpec::default() }, seed: derive_seed(cfg.seed, 2) };
    let report = end_to_end(&picked, &h, &data, &cfg.pipeline());
    let table = report.table();
    write_atomic(&cfg.out.join(REPORT_JSON), (serde_json::to_string_pretty(&report).expect("serializable") + "\n").as_bytes())?;
    write_atomic(&cfg.out.join(REPORT_TXT), table.as_bytes())?;
    write!(out, "{table}").map_err(|e| CliError::Io(e.to_string()))?;
    Ok(report)
}
