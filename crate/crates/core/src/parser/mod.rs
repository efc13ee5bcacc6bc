//! Rule-based interpreter from a natural-language causal question to a
//! [`CausalQuery`].
//!
//! Interpretation runs in one pass: classify the task from weighted lexical
//! cues, pick out the dataset file, conditions and variable mentions, then
//! bind mentions to roles through syntactic frames ("effect of _",
//! "mediated by _", "on _"). Mentions that no frame claims fill the
//! remaining roles in order of appearance.
//!
//! An optional [`LlmInterpreter`] sends the question to an HTTP endpoint
//! instead; its reply is decoded with [`parse_query_json`].

pub mod lexicon;
pub mod scan;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde_json::{json, Value};
use thiserror::Error;

pub use lexicon::{Cue, CueTable, TIE_PRIORITY};
use scan::{find_conditions, find_dataset, find_mentions, match_column, tokenize, ConditionSpan, TokenKind};

use crate::llm::{LlmClient, LlmError};
use crate::schema::{parse_query_json, query_from_value, validate_query, CausalQuery, ConditionClause, Nodes, SchemaError, Slot, Task};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("question is empty")]
    EmptyQuestion,
    #[error("no `<name>.csv` dataset is mentioned in the question")]
    DatasetNotFound,
    #[error("could not bind the `{0}` slot")]
    RoleAmbiguity(Slot),
    #[error("interpretation failed: {0}")]
    InterpretationFailed(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Backend(#[from] LlmError),
}

/// Tunables for the interpreter.
#[derive(Debug, Clone)]
pub struct ParseConfig {
    pub cues: CueTable,
    /// Maximum normalized edit distance for a fuzzy column match.
    pub fuzzy_threshold: f64,
}

impl Default for ParseConfig {
    fn default() -> Self {
        Self { cues: CueTable::default(), fuzzy_threshold: 0.25 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseContext {
    /// Dataset header, when the data is at hand.
    pub known_columns: Option<Vec<String>>,
    pub config: ParseConfig,
}

impl ParseContext {
    pub fn with_columns(columns: Vec<String>) -> Self {
        Self { known_columns: Some(columns), ..Self::default() }
    }
}

/// A variable mention and its byte span in the question.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableMention {
    pub ident: String,
    pub span: (usize, usize),
}

/// Anything that turns a question into a query.
pub trait Interpreter {
    fn interpret(&self, question: &str, ctx: &ParseContext) -> Result<CausalQuery, ParseError>;
}

/// The deterministic, offline interpreter.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleInterpreter;

impl Interpreter for RuleInterpreter {
    fn interpret(&self, question: &str, ctx: &ParseContext) -> Result<CausalQuery, ParseError> {
        interpret(question, ctx)
    }
}

/// Classifies the question; returns the winning task and its share of the
/// total cue weight. Ties go to the more specific task.
pub fn classify_task(question: &str, ctx: &ParseContext) -> Result<(Task, f64), ParseError> {
    if question.trim().is_empty() {
        return Err(ParseError::EmptyQuestion);
    }
    let has_condition = !extract_conditions(question).is_empty();
    let scores = ctx.config.cues.scores(question, has_condition);
    Ok(pick_task(&scores))
}

fn pick_task(scores: &BTreeMap<Task, f64>) -> (Task, f64) {
    let total: f64 = scores.values().sum();
    let mut best = (Task::Ate, 0.0);
    for &task in TIE_PRIORITY.iter().rev() {
        let s = scores[&task];
        if s >= best.1 {
            best = (task, s);
        }
    }
    if total > 0.0 {
        (best.0, best.1 / total)
    } else {
        (Task::Ate, 0.0)
    }
}

/// First `identifier.csv` token in the question.
pub fn extract_dataset(question: &str) -> Result<String, ParseError> {
    find_dataset(question).map(|(d, _, _)| d).ok_or(ParseError::DatasetNotFound)
}

/// Condition clauses stated in the question.
pub fn extract_conditions(question: &str) -> Vec<ConditionClause> {
    let tokens = tokenize(question);
    find_conditions(question, &tokens).into_iter().map(|c| c.clause).collect()
}

struct Scan {
    conditions: Vec<ConditionSpan>,
    mentions: Vec<VariableMention>,
    skeleton: String,
}

/// Words adjacent to the dataset token that describe it rather than a variable.
const DATASET_NOUNS: [&str; 5] = ["dataset", "data", "file", "table", "records"];

fn scan(question: &str, ctx: &ParseContext) -> Scan {
    let tokens = tokenize(question);
    let conditions = find_conditions(question, &tokens);
    let mut blocked: Vec<(usize, usize)> = conditions.iter().map(|c| (c.start, c.end)).collect();
    if let Some((_, s, e)) = find_dataset(question) {
        let mut end = e;
        if let Some(next) = tokens.iter().find(|t| t.start >= e) {
            if DATASET_NOUNS.contains(&next.lower.as_str()) {
                end = next.end;
            }
        }
        blocked.push((s, end));
    }
    let raw = find_mentions(&tokens, &blocked, ctx.known_columns.as_deref().unwrap_or(&[]));

    let mut mentions: Vec<VariableMention> = Vec::new();
    let mut ids: Vec<usize> = Vec::with_capacity(raw.len());
    for m in &raw {
        let ident = match &ctx.known_columns {
            Some(cols) => match_column(&m.ident, cols, ctx.config.fuzzy_threshold).unwrap_or_else(|| m.ident.clone()),
            None => m.ident.clone(),
        };
        let k = match mentions.iter().position(|x| x.ident == ident) {
            Some(k) => k,
            None => {
                mentions.push(VariableMention { ident, span: (m.start, m.end) });
                mentions.len() - 1
            }
        };
        ids.push(k);
    }

    // Skeleton: lowercase text with mentions as `@k`, dataset as `@d`,
    // conditions as `@c`.
    let mut skeleton = String::new();
    let mut ti = 0;
    let ds = find_dataset(question).map(|(_, s, e)| (s, e));
    while ti < tokens.len() {
        let t = &tokens[ti];
        let piece: String;
        if let Some(c) = conditions.iter().find(|c| t.start >= c.start && t.start < c.end) {
            piece = "@c".into();
            while ti < tokens.len() && tokens[ti].start < c.end {
                ti += 1;
            }
        } else if let Some((mi, m)) = raw.iter().enumerate().find(|(_, m)| t.start >= m.start && t.start < m.end) {
            piece = format!("@{}", ids[mi]);
            while ti < tokens.len() && tokens[ti].start < m.end {
                ti += 1;
            }
        } else if ds.is_some_and(|(s, e)| t.start >= s && t.start < e) {
            piece = "@d".into();
            ti += 1;
        } else {
            piece = if t.kind == TokenKind::Number { "#".into() } else { t.lower.clone() };
            ti += 1;
        }
        if !skeleton.is_empty() {
            skeleton.push(' ');
        }
        skeleton.push_str(&piece);
    }
    Scan { conditions, mentions, skeleton }
}

/// Candidate variable mentions in order of appearance, duplicates removed.
pub fn extract_variables(question: &str, ctx: &ParseContext) -> Vec<VariableMention> {
    scan(question, ctx).mentions
}

const CAUSE_VERBS: &str = r"(?:affects?|affecting|influences?|influencing|impacts?|impacting|drives?|driving|changes?|alters?|altering|shapes?|shaping|contributes? to|causes?|leads? to|modif(?:y|ies)|shifts?|raises?|lowers?|improves?|boosts?|reduces?|increases?|decreases?|determines?)";

fn frames(src: &[&str]) -> Vec<Regex> {
    src.iter().map(|p| Regex::new(p).expect("frame")).collect()
}

fn mediator_frames() -> &'static [Regex] {
    static F: OnceLock<Vec<Regex>> = OnceLock::new();
    F.get_or_init(|| {
        frames(&[
            r"mediat\w* (?:by|through|via) (?:the )?@(\d+)",
            r"(?:mediating|mediation|intermediary) (?:role|effect|influence) of (?:the )?@(\d+)",
            r"@(\d+) (?:as|is|acts as|serves as) (?:a |an |the )?(?:mediator|mediating|intermediary)",
            r"(?:passes|pass|flows?|goes|travels?|channell?ed|transmitted|operates?|works?|runs?) (?:through|via) (?:the )?@(\d+)",
            r"by way of (?:the )?@(\d+)",
            r"(?:through|via) (?:the )?(?:(?:channel|pathway|route) of (?:the )?)?@(\d+)",
        ])
    })
}

fn treatment_frames() -> &'static [Regex] {
    static F: OnceLock<Vec<Regex>> = OnceLock::new();
    F.get_or_init(|| {
        frames(&[
            r"from (?:the )?@(\d+) to",
            r"(?:if|when|once|whether) (?:the )?@(\d+) (?:is|are|were|was|gets?) (?:increased|decreased|changed|raised|lowered|adjusted|switched|turned|altered|modified|set)",
            r"(?:respond|responds|react|reacts) to (?:changes in |shifts in )?(?:the )?@(\d+)",
            r"(?:effects?|impacts?|influences?|consequences?|contribution|role) (?:of|from) (?:the )?(?:(?:levels?|values?|amount|presence|changes?|shifts?) (?:of|in) )?(?:the )?@(\d+)",
            r"(?:effects?|impacts?|influences?|difference) (?:does|do|did|would|will|can|could|might) (?:[a-z']+ ){0,4}?@(\d+)",
            r"(?:adjusting|setting|changing|modifying|increasing|raising|lowering|altering|intervening on|choosing|selecting|manipulating|tuning|managing) (?:the )?(?:(?:level|value|amount) of (?:the )?)?@(\d+)",
            &format!(r"@(\d+) (?:[a-z']+ )?{CAUSE_VERBS}\b"),
            r"(?:treatment|intervention|exposure|action)(?: variable)? (?:is |of )?(?:the )?@(\d+)",
            r"(?:action|choice|option|level|value|setting|decision)s? (?:for|of|on) (?:the )?@(\d+)",
        ])
    })
}

fn response_frames() -> &'static [Regex] {
    static F: OnceLock<Vec<Regex>> = OnceLock::new();
    F.get_or_init(|| {
        frames(&[
            r"from (?:the )?@\d+ to (?:the )?@(\d+)",
            r"(?:does|do|would|will|did|can|could|might) (?:the )?@(\d+) (?:respond|react|change|shift|move|vary)",
            r"(?:on|upon|for) (?:the )?(?:(?:changes?|levels?|values?|variations?|shifts?|movements?|amount) (?:in|of) (?:the )?)?@(\d+)",
            r"(?:changes?|levels?|variations?|shifts?|differences?|movements?) in (?:the )?@(\d+)",
            &format!(r"{CAUSE_VERBS} (?:the )?(?:(?:level|value|amount) of (?:the )?)?@(\d+)"),
            r"(?:maximi[sz]e|maximi[sz]ing|minimi[sz]e|minimi[sz]ing|optimi[sz]e|optimi[sz]ing|benefits?|benefiting|boosting|improving) (?:the )?@(\d+)",
            r"(?:outcome|response|target)(?: variable)? (?:of |is )?(?:the )?@(\d+)",
        ])
    })
}

/// First mention index claimed by any frame, skipping those in `taken`.
fn bind(skeleton: &str, frames: &[Regex], taken: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None; // (frame index, mention)
    for (fi, re) in frames.iter().enumerate() {
        for cap in re.captures_iter(skeleton) {
            let Some(k) = cap.get(1).and_then(|m| m.as_str().parse::<usize>().ok()) else { continue };
            if !taken.contains(&k) {
                if best.is_none() {
                    best = Some((fi, k));
                }
                break;
            }
        }
        if best.is_some() {
            break;
        }
    }
    best.map(|(_, k)| k)
}

/// Role slots bound for one query.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoleSlots {
    pub nodes: Option<Nodes>,
    pub treatment: Option<String>,
    pub response: Option<String>,
    pub mediator: Option<String>,
}

fn assign_scanned(task: Task, s: &Scan) -> Result<RoleSlots, ParseError> {
    let condition_vars: Vec<&str> = s.conditions.iter().map(|c| c.clause.variable.as_str()).collect();
    let candidates: Vec<usize> = (0..s.mentions.len()).filter(|&k| !condition_vars.contains(&s.mentions[k].ident.as_str())).collect();
    let excluded: Vec<usize> = (0..s.mentions.len()).filter(|k| !candidates.contains(k)).collect();
    let name = |k: usize| s.mentions[k].ident.clone();

    if task == Task::Cgl {
        let names: Vec<String> = candidates.iter().map(|&k| name(k)).collect();
        let nodes = if names.is_empty() { Nodes::AllVariables } else { Nodes::Named(names) };
        return Ok(RoleSlots { nodes: Some(nodes), ..RoleSlots::default() });
    }

    let mut taken = excluded.clone();
    let mediator = if task == Task::Ma {
        let m = bind(&s.skeleton, mediator_frames(), &taken);
        taken.extend(m);
        m
    } else {
        None
    };
    let treatment = bind(&s.skeleton, treatment_frames(), &taken);
    taken.extend(treatment);
    let response = bind(&s.skeleton, response_frames(), &taken);
    taken.extend(response);

    let mut free = candidates.iter().copied().filter(|k| !taken.contains(k));
    let treatment = treatment.or_else(|| free.next());
    let response = response.or_else(|| free.next());
    let mediator = if task == Task::Ma { mediator.or_else(|| free.next()) } else { None };

    let treatment = treatment.ok_or(ParseError::RoleAmbiguity(Slot::Treatment))?;
    let response = response.ok_or(ParseError::RoleAmbiguity(Slot::Response))?;
    if task == Task::Ma && mediator.is_none() {
        return Err(ParseError::RoleAmbiguity(Slot::Mediator));
    }
    if matches!(task, Task::Hte | Task::Opo) && s.conditions.is_empty() {
        return Err(ParseError::RoleAmbiguity(Slot::Condition));
    }
    Ok(RoleSlots { nodes: None, treatment: Some(name(treatment)), response: Some(name(response)), mediator: mediator.map(name) })
}

/// Binds variable mentions to the task's role slots.
pub fn assign_roles(task: Task, question: &str, ctx: &ParseContext) -> Result<RoleSlots, ParseError> {
    assign_scanned(task, &scan(question, ctx))
}

/// Full interpretation: task, dataset, conditions and roles.
pub fn interpret(question: &str, ctx: &ParseContext) -> Result<CausalQuery, ParseError> {
    let (task, score) = classify_task(question, ctx)?;
    if score == 0.0 {
        return Err(ParseError::InterpretationFailed("no causal task cue in the question".into()));
    }
    let dataset = extract_dataset(question)?;
    let s = scan(question, ctx);
    let roles = assign_scanned(task, &s).map_err(|e| ParseError::InterpretationFailed(e.to_string()))?;

    let mut q = CausalQuery::empty(task, dataset);
    q.nodes = roles.nodes;
    q.treatment = roles.treatment;
    q.response = roles.response;
    q.mediator = roles.mediator;
    if matches!(task, Task::Hte | Task::Opo) {
        q.conditions = s.conditions.into_iter().map(|c| c.clause).collect();
        if let Some(cols) = &ctx.known_columns {
            for c in &mut q.conditions {
                if let Some(col) = match_column(&c.variable, cols, ctx.config.fuzzy_threshold) {
                    c.variable = col;
                }
            }
        }
    }
    let violations = validate_query(&q);
    if !violations.is_empty() {
        return Err(ParseError::InterpretationFailed(SchemaError::InvalidQuery(violations).to_string()));
    }
    Ok(q)
}

/// Function schemas offered to an LLM backend, one per task.
pub fn function_schemas() -> Value {
    let string = |d: &str| json!({"type": "string", "description": d});
    let dataset = string("The name of the input dataset");
    let treatment = string("name of the treatment variable");
    let response = string("name of the response variable");
    let condition = string("the condition of the subpopulation as name=value pairs separated by commas");
    let f = |name: &str, desc: &str, props: Value, required: Vec<&str>| {
        json!({
            "type": "function",
            "function": {
                "name": name,
                "description": desc,
                "parameters": {"type": "object", "properties": props, "required": required}
            }
        })
    };
    json!([
        f(
            "causal_graph_learning",
            "Return the causal structure from a dataset with variables of interest",
            json!({"dataset": dataset, "nodes": string("name of the interested variable separated by commas, if no variable name is specified then put all_variables as the placeholder")}),
            vec!["dataset", "nodes"]
        ),
        f(
            "average_treatment_effect",
            "Return the average treatment effect of a treatment on a response",
            json!({"dataset": dataset, "treatment": treatment, "response": response}),
            vec!["dataset", "treatment", "response"]
        ),
        f(
            "heterogeneous_treatment_effect",
            "Return the treatment effect for a subpopulation with a specific condition",
            json!({"dataset": dataset, "treatment": treatment, "response": response, "condition": condition}),
            vec!["dataset", "treatment", "response", "condition"]
        ),
        f(
            "mediation_analysis",
            "Return the total, direct and indirect effects through a mediator",
            json!({"dataset": dataset, "treatment": treatment, "response": response, "mediator": string("name of the mediator variable")}),
            vec!["dataset", "treatment", "response", "mediator"]
        ),
        f(
            "policy_optimization",
            "Return the best treatment level for a subpopulation with a specific condition",
            json!({"dataset": dataset, "treatment": treatment, "response": response, "condition": condition}),
            vec!["dataset", "treatment", "response", "condition"]
        ),
    ])
}

fn task_for_function(name: &str) -> Option<Task> {
    Some(match name {
        "causal_graph_learning" => Task::Cgl,
        "average_treatment_effect" => Task::Ate,
        "heterogeneous_treatment_effect" => Task::Hte,
        "mediation_analysis" => Task::Ma,
        "policy_optimization" => Task::Opo,
        _ => return None,
    })
}

/// Decodes a backend reply: either a query object or a function call
/// `{"name": ..., "arguments": {...}}` (arguments may be a JSON string).
pub fn decode_backend_reply(reply: &Value) -> Result<CausalQuery, ParseError> {
    let reply = match reply {
        Value::String(s) => serde_json::from_str(s).map_err(|e| SchemaError::MalformedJson(e.to_string()))?,
        other => other.clone(),
    };
    if reply.get("causal_problem").is_some() {
        return Ok(query_from_value(&reply)?);
    }
    let call = reply
        .pointer("/choices/0/message/function_call")
        .or_else(|| reply.pointer("/choices/0/message/tool_calls/0/function"))
        .unwrap_or(&reply);
    let name = call
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| SchemaError::MalformedJson("reply has neither `causal_problem` nor a function name".into()))?;
    let task = task_for_function(name).ok_or_else(|| SchemaError::UnknownTask(name.to_string()))?;
    let args = match call.get("arguments") {
        Some(Value::String(s)) => serde_json::from_str(s).map_err(|e| SchemaError::MalformedJson(e.to_string()))?,
        Some(v) => v.clone(),
        None => Value::Object(Default::default()),
    };
    let mut obj = args.as_object().cloned().unwrap_or_default();
    if let Some(Value::String(c)) = obj.get("condition").cloned() {
        let pairs: Vec<Value> = c.split(',').filter_map(|p| p.split_once('=')).map(|(k, v)| json!([k.trim(), v.trim()])).collect();
        obj.insert("condition".into(), Value::Array(pairs));
    }
    obj.insert("causal_problem".into(), json!([task.category().as_str(), task.as_str()]));
    Ok(parse_query_json(&Value::Object(obj).to_string())?)
}

/// Interpreter backed by an HTTP LLM endpoint.
#[derive(Debug, Clone)]
pub struct LlmInterpreter {
    pub client: LlmClient,
}

impl Interpreter for LlmInterpreter {
    fn interpret(&self, question: &str, _ctx: &ParseContext) -> Result<CausalQuery, ParseError> {
        if question.trim().is_empty() {
            return Err(ParseError::EmptyQuestion);
        }
        let body = json!({"question": question, "functions": function_schemas()});
        let reply = self.client.post(&body)?;
        decode_backend_reply(&reply)
    }
}
