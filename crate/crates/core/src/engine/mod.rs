//! Estimator assignment and execution.
//!
//! Each task routes to one method; a [`Registry`] maps method ids to
//! callables so a method can be replaced or a new one registered and routed.

pub mod effects;
pub mod linalg;
pub mod pc;
pub mod policy;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DataError, TabularDataset};
use crate::result::ToolResult;
use crate::schema::{validate_query, CausalQuery, ConditionClause, Nodes, Task};
use crate::text::{contains_tokens, normalize_identifier, normalized_levenshtein};

/// Largest normalized edit distance accepted by fuzzy column matching.
pub const COLUMN_FUZZY_THRESHOLD: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("no column matches `{0}`")]
    ColumnNotFound(String),
    #[error("`{name}` matches several columns: {}", candidates.join(", "))]
    AmbiguousColumn { name: String, candidates: Vec<String> },
    #[error("estimation failed: {0}")]
    EstimationFailed(String),
    #[error("treatment `{column}` has {levels} distinct values, expected 2")]
    NonBinaryTreatment { column: String, levels: usize },
    #[error("condition variable `{0}` is not a covariate")]
    UnknownConditionVariable(String),
    #[error("treatment `{column}` has {levels} levels (at most 10 supported)")]
    TooManyLevels { column: String, levels: usize },
    #[error("malformed stage schema: {0}")]
    MalformedStageSchema(String),
    #[error("{rows} rows are too few for {nodes} nodes")]
    InsufficientSamples { rows: usize, nodes: usize },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("no method registered for {0}")]
    NoMethod(String),
    #[error(transparent)]
    Data(#[from] DataErrorRepr),
}

/// Cloneable wrapper for dataset access errors.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct DataErrorRepr(pub String);

impl From<DataError> for EngineError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::NoSuchColumn(c) => EngineError::ColumnNotFound(c),
            other => EngineError::Data(DataErrorRepr(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MethodId {
    #[serde(rename = "PC")]
    Pc,
    DoublyRobust,
    SLearner,
    #[serde(rename = "MediationPoC")]
    MediationPoc,
    QLearning,
    Custom(String),
}

impl MethodId {
    pub fn for_task(task: Task) -> MethodId {
        match task {
            Task::Cgl => MethodId::Pc,
            Task::Ate => MethodId::DoublyRobust,
            Task::Hte => MethodId::SLearner,
            Task::Ma => MethodId::MediationPoc,
            Task::Opo => MethodId::QLearning,
        }
    }

    /// Name used in narrated text.
    pub fn display_name(&self) -> &str {
        match self {
            MethodId::Pc => "the PC algorithm",
            MethodId::DoublyRobust => "the doubly robust estimator",
            MethodId::SLearner => "the S-learner",
            MethodId::MediationPoc => "causal mediation analysis",
            MethodId::QLearning => "Q-learning",
            MethodId::Custom(s) => s,
        }
    }

    pub fn canonical() -> [MethodId; 5] {
        Task::ALL.map(MethodId::for_task)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub alpha: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { alpha: pc::DEFAULT_ALPHA }
    }
}

/// Callable estimator. Receives a query whose variables already name
/// columns of the table.
pub type Method = Arc<dyn Fn(&CausalQuery, &TabularDataset, &EngineConfig) -> Result<ToolResult, EngineError> + Send + Sync>;

#[derive(Clone)]
pub struct Registry {
    methods: BTreeMap<MethodId, Method>,
    routes: BTreeMap<Task, MethodId>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry").field("methods", &self.methods.keys().collect::<Vec<_>>()).field("routes", &self.routes).finish()
    }
}

fn required<'a>(v: &'a Option<String>, slot: &str) -> Result<&'a str, EngineError> {
    v.as_deref().ok_or_else(|| EngineError::InvalidQuery(format!("missing {slot}")))
}

fn run_pc(q: &CausalQuery, d: &TabularDataset, cfg: &EngineConfig) -> Result<ToolResult, EngineError> {
    let names: Vec<String> = match &q.nodes {
        Some(Nodes::Named(v)) => v.clone(),
        _ => d.names().iter().filter(|n| d.numeric(n).is_ok()).cloned().collect(),
    };
    let cols = names.iter().map(|n| Ok(d.numeric(n)?.to_vec())).collect::<Result<Vec<_>, EngineError>>()?;
    Ok(ToolResult::Graph(pc::learn_graph(&cols, &names, cfg.alpha)?))
}

fn run_dr(q: &CausalQuery, d: &TabularDataset, _: &EngineConfig) -> Result<ToolResult, EngineError> {
    let e = effects::estimate_ate(d, required(&q.treatment, "treatment")?, required(&q.response, "response")?)?;
    Ok(ToolResult::Effect { value: e.value })
}

fn run_slearner(q: &CausalQuery, d: &TabularDataset, _: &EngineConfig) -> Result<ToolResult, EngineError> {
    let value = effects::estimate_hte(d, required(&q.treatment, "treatment")?, required(&q.response, "response")?, &q.conditions)?;
    Ok(ToolResult::Effect { value })
}

fn run_mediation(q: &CausalQuery, d: &TabularDataset, _: &EngineConfig) -> Result<ToolResult, EngineError> {
    let m = effects::estimate_mediation(
        d,
        required(&q.treatment, "treatment")?,
        required(&q.response, "response")?,
        required(&q.mediator, "mediator")?,
    )?;
    Ok(ToolResult::mediation(m.direct, m.indirect))
}

fn run_qlearning(q: &CausalQuery, d: &TabularDataset, _: &EngineConfig) -> Result<ToolResult, EngineError> {
    let level = policy::optimize_policy(d, required(&q.treatment, "treatment")?, required(&q.response, "response")?, &q.conditions)?;
    Ok(ToolResult::Action { level })
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry { methods: BTreeMap::new(), routes: BTreeMap::new() };
        r.register(MethodId::Pc, Arc::new(run_pc));
        r.register(MethodId::DoublyRobust, Arc::new(run_dr));
        r.register(MethodId::SLearner, Arc::new(run_slearner));
        r.register(MethodId::MediationPoc, Arc::new(run_mediation));
        r.register(MethodId::QLearning, Arc::new(run_qlearning));
        for t in Task::ALL {
            r.route(t, MethodId::for_task(t));
        }
        r
    }
}

impl Registry {
    /// Adds or replaces the callable for `id`.
    pub fn register(&mut self, id: MethodId, method: Method) {
        self.methods.insert(id, method);
    }

    pub fn route(&mut self, task: Task, id: MethodId) {
        self.routes.insert(task, id);
    }

    pub fn method_for(&self, task: Task) -> Option<&MethodId> {
        self.routes.get(&task)
    }

    /// Validates `q`, resolves its variables to columns of `d` and runs the
    /// routed method.
    pub fn dispatch(&self, q: &CausalQuery, d: &TabularDataset, cfg: &EngineConfig) -> Result<(MethodId, ToolResult), EngineError> {
        let issues = validate_query(q);
        if !issues.is_empty() {
            return Err(EngineError::InvalidQuery(issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")));
        }
        let id = self.routes.get(&q.task).ok_or_else(|| EngineError::NoMethod(q.task.to_string()))?;
        let method = self.methods.get(id).ok_or_else(|| EngineError::NoMethod(id.to_string()))?;
        let resolved = resolve_query(q, d)?;
        let result = method(&resolved, d, cfg)?;
        if !result.fits(q.task) {
            return Err(EngineError::EstimationFailed(format!("{id} returned the wrong output kind for {}", q.task)));
        }
        Ok((id.clone(), result))
    }
}

/// Runs the canonical method for `q` on `d` with default settings.
pub fn dispatch(q: &CausalQuery, d: &TabularDataset) -> Result<ToolResult, EngineError> {
    Registry::default().dispatch(q, d, &EngineConfig::default()).map(|(_, r)| r)
}

/// Column for `name`: exact, then case/underscore-insensitive, then the
/// unique fuzzy match (edit distance, else token containment).
pub fn resolve_column(d: &TabularDataset, name: &str) -> Result<String, EngineError> {
    let names = d.names();
    if names.iter().any(|n| n == name) {
        return Ok(name.to_string());
    }
    let norm = normalize_identifier(name);
    let exactish: Vec<&String> = names.iter().filter(|n| normalize_identifier(n) == norm).collect();
    let pick = |hits: Vec<&String>| -> Option<Result<String, EngineError>> {
        match hits.len() {
            0 => None,
            1 => Some(Ok(hits[0].clone())),
            _ => Some(Err(EngineError::AmbiguousColumn { name: name.to_string(), candidates: hits.into_iter().cloned().collect() })),
        }
    };
    if let Some(r) = pick(exactish) {
        return r;
    }
    let close: Vec<&String> =
        names.iter().filter(|n| normalized_levenshtein(&norm, &normalize_identifier(n)) <= COLUMN_FUZZY_THRESHOLD).collect();
    if let Some(r) = pick(close) {
        return r;
    }
    let containing: Vec<&String> = names
        .iter()
        .filter(|n| {
            let c = normalize_identifier(n);
            contains_tokens(&c, &norm) || contains_tokens(&norm, &c)
        })
        .collect();
    pick(containing).unwrap_or_else(|| Err(EngineError::ColumnNotFound(name.to_string())))
}

/// Copy of `q` with every variable replaced by its resolved column.
pub fn resolve_query(q: &CausalQuery, d: &TabularDataset) -> Result<CausalQuery, EngineError> {
    let opt = |v: &Option<String>| v.as_deref().map(|n| resolve_column(d, n)).transpose();
    let nodes = match &q.nodes {
        Some(Nodes::Named(v)) => Some(Nodes::Named(v.iter().map(|n| resolve_column(d, n)).collect::<Result<_, _>>()?)),
        other => other.clone(),
    };
    let conditions = q
        .conditions
        .iter()
        .map(|c| Ok(ConditionClause { variable: resolve_column(d, &c.variable)?, value: c.value.clone() }))
        .collect::<Result<Vec<_>, EngineError>>()?;
    Ok(CausalQuery {
        nodes,
        treatment: opt(&q.treatment).or_else(|e| multi_stage_fallback(d, q.treatment.as_deref(), e))?,
        response: opt(&q.response).or_else(|e| multi_stage_fallback(d, q.response.as_deref(), e))?,
        mediator: opt(&q.mediator)?,
        conditions,
        ..q.clone()
    })
}

/// Multi-stage tables carry `{name}1`, `{name}2`, ... instead of `name`.
fn multi_stage_fallback(d: &TabularDataset, name: Option<&str>, err: EngineError) -> Result<Option<String>, EngineError> {
    match (name, &err) {
        (Some(n), EngineError::ColumnNotFound(_)) if d.index_of(&format!("{n}1")).is_some() => Ok(Some(n.to_string())),
        _ => Err(err),
    }
}
