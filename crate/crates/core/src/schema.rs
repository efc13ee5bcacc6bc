//! Structured causal intent and its canonical JSON form.
//!
//! A [`CausalQuery`] is the record the interpreter produces from a question
//! and the engine consumes. Its canonical serialization is a JSON object whose
//! first key is always `causal_problem`, followed by `dataset` and then the
//! task-specific slots in a fixed order. Scalar slots are written as
//! single-element lists and conditions as `[name, value]` pairs:
//!
//! ```text
//! {"causal_problem": ["CEL", "ATE"], "dataset": ["employment.csv"], "treatment": ["labor_participation_rate"], "response": ["wage_increase"]}
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Placeholder node list meaning "every column of the dataset".
pub const ALL_VARIABLES: &str = "all_variables";

/// Broad family a task belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    /// Causal structure learning.
    #[serde(rename = "CSL")]
    Csl,
    /// Causal effect learning.
    #[serde(rename = "CEL")]
    Cel,
    /// Causal policy learning.
    #[serde(rename = "CPL")]
    Cpl,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Csl => "CSL",
            Category::Cel => "CEL",
            Category::Cpl => "CPL",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The five supported causal tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "CGL")]
    Cgl,
    #[serde(rename = "ATE")]
    Ate,
    #[serde(rename = "HTE")]
    Hte,
    #[serde(rename = "MA")]
    Ma,
    #[serde(rename = "OPO")]
    Opo,
}

impl Task {
    pub const ALL: [Task; 5] = [Task::Cgl, Task::Ate, Task::Hte, Task::Ma, Task::Opo];

    pub fn category(self) -> Category {
        match self {
            Task::Cgl => Category::Csl,
            Task::Ate | Task::Hte | Task::Ma => Category::Cel,
            Task::Opo => Category::Cpl,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Cgl => "CGL",
            Task::Ate => "ATE",
            Task::Hte => "HTE",
            Task::Ma => "MA",
            Task::Opo => "OPO",
        }
    }

    /// Slots (besides `dataset`) this task requires, in canonical order.
    pub fn required_slots(self) -> &'static [Slot] {
        match self {
            Task::Cgl => &[Slot::Nodes],
            Task::Ate => &[Slot::Treatment, Slot::Response],
            Task::Hte | Task::Opo => &[Slot::Treatment, Slot::Response, Slot::Condition],
            Task::Ma => &[Slot::Treatment, Slot::Response, Slot::Mediator],
        }
    }

    pub fn requires(self, slot: Slot) -> bool {
        slot == Slot::Dataset || self.required_slots().contains(&slot)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CGL" => Ok(Task::Cgl),
            "ATE" => Ok(Task::Ate),
            "HTE" => Ok(Task::Hte),
            "MA" => Ok(Task::Ma),
            "OPO" => Ok(Task::Opo),
            _ => Err(SchemaError::UnknownTask(s.to_string())),
        }
    }
}

/// Named JSON keys of a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Dataset,
    Nodes,
    Treatment,
    Response,
    Mediator,
    Condition,
}

impl Slot {
    pub fn key(self) -> &'static str {
        match self {
            Slot::Dataset => "dataset",
            Slot::Nodes => "nodes",
            Slot::Treatment => "treatment",
            Slot::Response => "response",
            Slot::Mediator => "mediator",
            Slot::Condition => "condition",
        }
    }

    fn from_key(key: &str) -> Option<Slot> {
        Some(match key {
            "dataset" => Slot::Dataset,
            "nodes" => Slot::Nodes,
            "treatment" => Slot::Treatment,
            "response" => Slot::Response,
            "mediator" => Slot::Mediator,
            "condition" => Slot::Condition,
            _ => return None,
        })
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A condition value or treatment level: numeric when it parses, text otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Text(String),
}

impl Scalar {
    /// Numeric parse with verbatim fallback.
    pub fn parse(raw: &str) -> Scalar {
        let t = raw.trim();
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Scalar::Num(v),
            _ => Scalar::Text(t.to_string()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Num(v) => Some(*v),
            Scalar::Text(s) => s.trim().parse().ok().filter(|v: &f64| v.is_finite()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Scalar::Num(v) => serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Scalar::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Shortest decimal form; integral values print without a fractional part.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Num(v) => write!(f, "{v}"),
            Scalar::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Num(v)
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::parse(s)
    }
}

/// A subpopulation constraint `variable = value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionClause {
    pub variable: String,
    pub value: Scalar,
}

impl ConditionClause {
    pub fn new(variable: impl Into<String>, value: impl Into<Scalar>) -> Self {
        Self { variable: variable.into(), value: value.into() }
    }
}

/// Variables of interest for graph learning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Nodes {
    /// Every column of the dataset.
    AllVariables,
    Named(Vec<String>),
}

impl Nodes {
    pub fn names(&self) -> &[String] {
        match self {
            Nodes::AllVariables => &[],
            Nodes::Named(v) => v,
        }
    }
}

/// Structured intent extracted from a causal question.
///
/// Slots that the task does not use must be empty (`None` / empty list);
/// see [`validate_query`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalQuery {
    pub task: Task,
    pub dataset: String,
    pub nodes: Option<Nodes>,
    pub treatment: Option<String>,
    pub response: Option<String>,
    pub mediator: Option<String>,
    pub conditions: Vec<ConditionClause>,
}

impl CausalQuery {
    pub fn cgl(dataset: impl Into<String>, nodes: Nodes) -> Self {
        Self::empty(Task::Cgl, dataset).with_nodes(nodes)
    }

    pub fn ate(dataset: impl Into<String>, treatment: &str, response: &str) -> Self {
        Self::empty(Task::Ate, dataset).with_roles(treatment, response)
    }

    pub fn hte(dataset: impl Into<String>, treatment: &str, response: &str, conditions: Vec<ConditionClause>) -> Self {
        let mut q = Self::empty(Task::Hte, dataset).with_roles(treatment, response);
        q.conditions = conditions;
        q
    }

    pub fn ma(dataset: impl Into<String>, treatment: &str, response: &str, mediator: &str) -> Self {
        let mut q = Self::empty(Task::Ma, dataset).with_roles(treatment, response);
        q.mediator = Some(mediator.to_string());
        q
    }

    pub fn opo(dataset: impl Into<String>, treatment: &str, response: &str, conditions: Vec<ConditionClause>) -> Self {
        let mut q = Self::empty(Task::Opo, dataset).with_roles(treatment, response);
        q.conditions = conditions;
        q
    }

    /// A query with only task and dataset set.
    pub fn empty(task: Task, dataset: impl Into<String>) -> Self {
        Self { task, dataset: dataset.into(), nodes: None, treatment: None, response: None, mediator: None, conditions: Vec::new() }
    }

    fn with_nodes(mut self, nodes: Nodes) -> Self {
        self.nodes = Some(nodes);
        self
    }

    fn with_roles(mut self, treatment: &str, response: &str) -> Self {
        self.treatment = Some(treatment.to_string());
        self.response = Some(response.to_string());
        self
    }

    /// Every variable the query names, in slot order.
    pub fn variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        if let Some(n) = &self.nodes {
            out.extend(n.names().iter().map(String::as_str));
        }
        out.extend(self.treatment.as_deref());
        out.extend(self.response.as_deref());
        out.extend(self.mediator.as_deref());
        out.extend(self.conditions.iter().map(|c| c.variable.as_str()));
        out
    }

    fn has_slot(&self, slot: Slot) -> bool {
        match slot {
            Slot::Dataset => true,
            Slot::Nodes => self.nodes.is_some(),
            Slot::Treatment => self.treatment.is_some(),
            Slot::Response => self.response.is_some(),
            Slot::Mediator => self.mediator.is_some(),
            Slot::Condition => !self.conditions.is_empty(),
        }
    }
}

/// One broken slot rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
pub enum Violation {
    #[error("{task} query is missing required key `{key}`")]
    MissingRequiredKey { task: Task, key: Slot },
    #[error("{task} query must not carry key `{key}`")]
    UnexpectedKey { task: Task, key: Slot },
    #[error("node list is empty")]
    EmptyNodes,
    #[error("dataset name is empty")]
    EmptyDataset,
    #[error("`{value}` in `{slot}` is not a valid identifier")]
    InvalidIdentifier { slot: Slot, value: String },
    #[error("condition on `{variable}` has a non-finite value")]
    NonFiniteCondition { variable: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemaError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("unknown causal task `{0}`")]
    UnknownTask(String),
    #[error("category `{category}` does not match task {task}")]
    CategoryMismatch { category: String, task: Task },
    #[error("{task} query is missing required key `{key}`")]
    MissingRequiredKey { task: Task, key: Slot },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid query: {}", join_violations(.0))]
    InvalidQuery(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Letters, digits, underscores and hyphens; at least one character.
pub fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

/// Checks the per-task slot table. Empty output means the query is valid.
pub fn validate_query(q: &CausalQuery) -> Vec<Violation> {
    let mut out = Vec::new();
    let task = q.task;
    if q.dataset.trim().is_empty() {
        out.push(Violation::EmptyDataset);
    }
    for slot in [Slot::Nodes, Slot::Treatment, Slot::Response, Slot::Mediator, Slot::Condition] {
        match (task.requires(slot), q.has_slot(slot)) {
            (true, false) => out.push(Violation::MissingRequiredKey { task, key: slot }),
            (false, true) => out.push(Violation::UnexpectedKey { task, key: slot }),
            _ => {}
        }
    }
    if let Some(Nodes::Named(names)) = &q.nodes {
        if names.is_empty() {
            out.push(Violation::EmptyNodes);
        }
        for n in names {
            if !is_identifier(n) {
                out.push(Violation::InvalidIdentifier { slot: Slot::Nodes, value: n.clone() });
            }
        }
    }
    let roles = [(Slot::Treatment, &q.treatment), (Slot::Response, &q.response), (Slot::Mediator, &q.mediator)];
    for (slot, v) in roles {
        if let Some(v) = v {
            if !is_identifier(v) {
                out.push(Violation::InvalidIdentifier { slot, value: v.clone() });
            }
        }
    }
    for c in &q.conditions {
        if !is_identifier(&c.variable) {
            out.push(Violation::InvalidIdentifier { slot: Slot::Condition, value: c.variable.clone() });
        }
        if matches!(c.value, Scalar::Num(v) if !v.is_finite()) {
            out.push(Violation::NonFiniteCondition { variable: c.variable.clone() });
        }
    }
    out
}

fn push_key(out: &mut String, key: &str, value: &Value) {
    if out.len() > 1 {
        out.push_str(", ");
    }
    out.push_str(&Value::String(key.to_string()).to_string());
    out.push_str(": ");
    write_value(out, value);
}

// `", "` and `": "` separators throughout, like the dict reprs in the original
// output table.
fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Array(items) => {
            out.push('[');
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, it);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn single(s: &str) -> Value {
    Value::Array(vec![Value::String(s.to_string())])
}

/// Canonical JSON text for a valid query.
pub fn serialize_query(q: &CausalQuery) -> Result<String, SchemaError> {
    let violations = validate_query(q);
    if !violations.is_empty() {
        return Err(SchemaError::InvalidQuery(violations));
    }
    let mut out = String::from("{");
    let problem = Value::Array(vec![Value::String(q.task.category().as_str().into()), Value::String(q.task.as_str().into())]);
    push_key(&mut out, "causal_problem", &problem);
    push_key(&mut out, "dataset", &single(&q.dataset));
    for &slot in q.task.required_slots() {
        let value = match slot {
            Slot::Nodes => match q.nodes.as_ref().expect("validated") {
                Nodes::AllVariables => single(ALL_VARIABLES),
                Nodes::Named(names) => Value::Array(names.iter().cloned().map(Value::String).collect()),
            },
            Slot::Treatment => single(q.treatment.as_deref().expect("validated")),
            Slot::Response => single(q.response.as_deref().expect("validated")),
            Slot::Mediator => single(q.mediator.as_deref().expect("validated")),
            Slot::Condition => Value::Array(
                q.conditions.iter().map(|c| Value::Array(vec![Value::String(c.variable.clone()), c.value.to_json()])).collect(),
            ),
            Slot::Dataset => unreachable!(),
        };
        push_key(&mut out, slot.key(), &value);
    }
    out.push('}');
    Ok(out)
}

/// A scalar slot given as `["x"]`, `"x"` or a bare number.
fn scalar_slot(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Array(items) if items.len() == 1 => scalar_slot(&items[0]),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn string_list(v: &Value) -> Option<Vec<String>> {
    match v {
        // Function-call style: comma-separated names in one string.
        Value::String(s) => Some(s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(str::to_string).collect()),
        Value::Array(items) => items.iter().map(|i| i.as_str().map(|s| s.trim().to_string())).collect(),
        _ => None,
    }
}

fn scalar_value(v: &Value) -> Option<Scalar> {
    match v {
        Value::Number(n) => n.as_f64().map(Scalar::Num),
        Value::String(s) => Some(Scalar::parse(s)),
        _ => None,
    }
}

fn condition_list(v: &Value) -> Option<Vec<ConditionClause>> {
    let items = match v {
        Value::Array(items) => items,
        Value::Object(map) => {
            return map.iter().map(|(k, v)| scalar_value(v).map(|value| ConditionClause { variable: k.clone(), value })).collect();
        }
        _ => return None,
    };
    // A lone pair `["x", 0.5]` is accepted as a one-element list.
    if items.len() == 2 && items[0].is_string() && !items[1].is_array() {
        return Some(vec![ConditionClause { variable: items[0].as_str()?.trim().to_string(), value: scalar_value(&items[1])? }]);
    }
    items
        .iter()
        .map(|pair| match pair {
            Value::Array(p) if p.len() == 2 => {
                Some(ConditionClause { variable: p[0].as_str()?.trim().to_string(), value: scalar_value(&p[1])? })
            }
            _ => None,
        })
        .collect()
}

fn parse_task(v: &Value) -> Result<Task, SchemaError> {
    match v {
        Value::Array(items) if items.len() == 2 => {
            let cat = items[0].as_str().unwrap_or_default();
            let task_raw = items[1].as_str().ok_or_else(|| SchemaError::UnknownTask(items[1].to_string()))?;
            let task: Task = task_raw.parse()?;
            if !cat.eq_ignore_ascii_case(task.category().as_str()) {
                return Err(SchemaError::CategoryMismatch { category: cat.to_string(), task });
            }
            Ok(task)
        }
        Value::Array(items) if items.len() == 1 => parse_task(&items[0]),
        Value::String(s) => s.parse(),
        other => Err(SchemaError::UnknownTask(other.to_string())),
    }
}

/// Parses a JSON object (already decoded) into a query.
pub fn query_from_value(v: &Value) -> Result<CausalQuery, SchemaError> {
    let obj: &Map<String, Value> = v.as_object().ok_or_else(|| SchemaError::MalformedJson("top-level value is not an object".into()))?;
    let problem = obj.get("causal_problem").ok_or_else(|| SchemaError::MalformedJson("missing `causal_problem`".into()))?;
    let task = parse_task(problem)?;
    for key in obj.keys() {
        if key != "causal_problem" && Slot::from_key(key).is_none() {
            return Err(SchemaError::UnknownKey(key.clone()));
        }
    }
    let missing = |key: Slot| SchemaError::MissingRequiredKey { task, key };
    let bad = |key: Slot| SchemaError::MalformedJson(format!("`{key}` has an unsupported shape"));

    let dataset = obj.get("dataset").ok_or_else(|| missing(Slot::Dataset))?;
    let dataset = scalar_slot(dataset).ok_or_else(|| bad(Slot::Dataset))?;
    let mut q = CausalQuery::empty(task, dataset);

    for &slot in task.required_slots() {
        let raw = obj.get(slot.key()).ok_or_else(|| missing(slot))?;
        match slot {
            Slot::Nodes => {
                let names = string_list(raw).ok_or_else(|| bad(slot))?;
                q.nodes = Some(if names.len() == 1 && names[0] == ALL_VARIABLES { Nodes::AllVariables } else { Nodes::Named(names) });
            }
            Slot::Treatment => q.treatment = Some(scalar_slot(raw).ok_or_else(|| bad(slot))?),
            Slot::Response => q.response = Some(scalar_slot(raw).ok_or_else(|| bad(slot))?),
            Slot::Mediator => q.mediator = Some(scalar_slot(raw).ok_or_else(|| bad(slot))?),
            Slot::Condition => q.conditions = condition_list(raw).ok_or_else(|| bad(slot))?,
            Slot::Dataset => unreachable!(),
        }
    }
    for key in obj.keys() {
        if let Some(slot) = Slot::from_key(key) {
            if !task.requires(slot) {
                return Err(SchemaError::InvalidQuery(vec![Violation::UnexpectedKey { task, key: slot }]));
            }
        }
    }
    let violations = validate_query(&q);
    if violations.is_empty() {
        Ok(q)
    } else {
        Err(SchemaError::InvalidQuery(violations))
    }
}

/// Parses query JSON text; numeric-looking condition values become numbers.
pub fn parse_query_json(text: &str) -> Result<CausalQuery, SchemaError> {
    let v: Value = serde_json::from_str(text).map_err(|e| SchemaError::MalformedJson(e.to_string()))?;
    query_from_value(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ate_row_serializes_like_the_table() {
        let q = CausalQuery::ate("employment.csv", "labor_participation_rate", "wage_increase");
        assert_eq!(
            serialize_query(&q).unwrap(),
            r#"{"causal_problem": ["CEL", "ATE"], "dataset": ["employment.csv"], "treatment": ["labor_participation_rate"], "response": ["wage_increase"]}"#
        );
    }

    #[test]
    fn cgl_row_serializes_nodes() {
        let q = CausalQuery::cgl(
            "disaster_risk_reduction.csv",
            Nodes::Named(vec!["building_code_compliance_rate".into(), "disaster_preparedness_campaigns".into()]),
        );
        let s = serialize_query(&q).unwrap();
        assert!(s.starts_with(r#"{"causal_problem": ["CSL", "CGL"]"#));
        assert!(s.contains(r#""nodes": ["building_code_compliance_rate", "disaster_preparedness_campaigns"]"#));
    }

    #[test]
    fn hte_row_parses_condition() {
        let text = r#"{"causal_problem": ["CEL", "HTE"], "dataset": ["cybersecurity.csv"], "treatment": ["data_breach_incidents"], "response": ["cybersecurity_investment"], "condition": [["readiness_index", 0.5]]}"#;
        let q = parse_query_json(text).unwrap();
        assert_eq!(q.conditions, vec![ConditionClause::new("readiness_index", 0.5)]);
    }

    #[test]
    fn opo_string_condition_becomes_numeric() {
        let text = r#"{"causal_problem": ["CPL", "OPO"], "dataset": ["poverty.csv"], "treatment": ["social_assistance_coverage"], "response": ["gini_coefficient"], "condition": [["poverty_ratio", "0.32"]]}"#;
        let q = parse_query_json(text).unwrap();
        assert_eq!(q.conditions[0].value, Scalar::Num(0.32));
    }

    #[test]
    fn missing_dataset_is_reported() {
        let err = parse_query_json(r#"{"causal_problem": ["CEL","ATE"]}"#).unwrap_err();
        assert_eq!(err, SchemaError::MissingRequiredKey { task: Task::Ate, key: Slot::Dataset });
    }

    #[test]
    fn unknown_keys_and_tasks_rejected() {
        let err = parse_query_json(
            r#"{"causal_problem": ["CEL","ATE"], "dataset": ["a.csv"], "treatment": ["x"], "response": ["y"], "outcome": ["y"]}"#,
        )
        .unwrap_err();
        assert_eq!(err, SchemaError::UnknownKey("outcome".into()));
        let err = parse_query_json(r#"{"causal_problem": ["CEL","IV"], "dataset": ["a.csv"]}"#).unwrap_err();
        assert!(matches!(err, SchemaError::UnknownTask(_)));
        let err = parse_query_json(r#"{"causal_problem": ["CSL","ATE"], "dataset": ["a.csv"]}"#).unwrap_err();
        assert!(matches!(err, SchemaError::CategoryMismatch { .. }));
        assert!(matches!(parse_query_json("{"), Err(SchemaError::MalformedJson(_))));
    }

    #[test]
    fn extra_slot_for_task_is_rejected() {
        let err = parse_query_json(
            r#"{"causal_problem": ["CEL","ATE"], "dataset": ["a.csv"], "treatment": ["x"], "response": ["y"], "mediator": ["m"]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, SchemaError::InvalidQuery(_)));
    }

    #[test]
    fn validate_reports_each_rule() {
        assert!(validate_query(&CausalQuery::ma("r.csv", "a", "y", "m")).is_empty());
        let mut q = CausalQuery::ma("r.csv", "a", "y", "m");
        q.mediator = None;
        assert_eq!(validate_query(&q), vec![Violation::MissingRequiredKey { task: Task::Ma, key: Slot::Mediator }]);
        let q = CausalQuery::cgl("a.csv", Nodes::Named(vec![]));
        assert_eq!(validate_query(&q), vec![Violation::EmptyNodes]);
        assert!(validate_query(&CausalQuery::cgl("a.csv", Nodes::AllVariables)).is_empty());
        let q = CausalQuery::hte("a.csv", "t", "y", vec![]);
        assert_eq!(validate_query(&q), vec![Violation::MissingRequiredKey { task: Task::Hte, key: Slot::Condition }]);
        let q = CausalQuery::ate("a.csv", "bad name", "y");
        assert!(matches!(validate_query(&q)[0], Violation::InvalidIdentifier { .. }));
    }

    #[test]
    fn function_call_shapes_are_accepted() {
        let q = parse_query_json(r#"{"causal_problem": "CGL", "dataset": "a.csv", "nodes": "x, y"}"#).unwrap();
        assert_eq!(q.nodes, Some(Nodes::Named(vec!["x".into(), "y".into()])));
        let q = parse_query_json(r#"{"causal_problem": ["CSL","CGL"], "dataset": ["a.csv"], "nodes": ["all_variables"]}"#).unwrap();
        assert_eq!(q.nodes, Some(Nodes::AllVariables));
    }

    #[test]
    fn serialize_rejects_invalid() {
        let q = CausalQuery::empty(Task::Ate, "a.csv");
        assert!(matches!(serialize_query(&q), Err(SchemaError::InvalidQuery(_))));
    }
}
