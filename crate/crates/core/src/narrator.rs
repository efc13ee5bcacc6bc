//! Turns a tool result into text: fixed one-line templates, an optional LLM
//! rewrite, and a rubric lint that gates the rewrite.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::engine::MethodId;
use crate::llm::{LlmClient, LlmError};
use crate::result::ToolResult;
use crate::schema::{CausalQuery, Nodes, Task};
use crate::text::fmt2;

/// Most edges named in a graph summary.
pub const MAX_LISTED_EDGES: usize = 3;
/// Sentence limit handed to the LLM.
pub const PROMPT_SENTENCES: usize = 4;
/// Sentence count above which text is flagged as non-fluent.
pub const MAX_SENTENCES: usize = 6;

#[derive(Debug, Error)]
pub enum NarrateError {
    #[error("{result} output cannot be narrated as {task}")]
    FormatMismatch { task: Task, result: String },
    #[error(transparent)]
    Backend(#[from] LlmError),
}

fn kind(r: &ToolResult) -> &'static str {
    match r {
        ToolResult::Graph(_) => "graph",
        ToolResult::Effect { .. } => "effect",
        ToolResult::Mediation { .. } => "mediation",
        ToolResult::Action { .. } => "action",
    }
}

fn slot(v: &Option<String>) -> &str {
    v.as_deref().unwrap_or("")
}

/// The task's one- or two-sentence summary.
pub fn template_summary(task: Task, result: &ToolResult, q: &CausalQuery) -> Result<String, NarrateError> {
    let mismatch = || NarrateError::FormatMismatch { task, result: kind(result).to_string() };
    let (a, y) = (slot(&q.treatment), slot(&q.response));
    Ok(match (task, result) {
        (Task::Cgl, ToolResult::Graph(g)) => {
            let edges = g.ranked_edges();
            let k = edges.len().min(MAX_LISTED_EDGES);
            let mut s = format!("There are {k} pairs of significant causal relationships.");
            for &(i, j) in &edges[..k] {
                s.push_str(&format!(" The {} would causally influence the {}.", g.nodes[i], g.nodes[j]));
            }
            s
        }
        (Task::Ate, ToolResult::Effect { value }) => {
            format!("The average treatment effect of setting {a} as 1 on the {y} is {}.", fmt2(*value))
        }
        (Task::Hte, ToolResult::Effect { value }) => {
            let cond = conditions_text(q);
            format!(
                "The heterogeneous treatment effect of setting {a} as 1 on the {y} is {} for those having {cond}.",
                fmt2(*value)
            )
        }
        (Task::Ma, ToolResult::Mediation { total, direct, indirect }) => format!(
            "The overall impact of the {a} on the {y} is {}. This comprises a direct effect of {} from the {a} to the {y}, and an indirect effect of {}, mediated by the {}.",
            fmt2(*total),
            fmt2(*direct),
            fmt2(*indirect),
            slot(&q.mediator)
        ),
        (Task::Opo, ToolResult::Action { level }) => format!("The best action of the {a} is {a} = {level}."),
        _ => return Err(mismatch()),
    })
}

/// Sentence naming the method and dataset, plus whatever query variables
/// the task template leaves out (graph nodes; the policy response and
/// conditions).
pub fn completeness_sentence(q: &CausalQuery, method: &MethodId) -> String {
    let mut s = format!("This result was obtained by applying {method} to {}", q.dataset);
    if let Some(Nodes::Named(v)) = &q.nodes {
        s.push_str(&format!(" over {}", join_names(v)));
    }
    if q.task == Task::Opo {
        s.push_str(&format!(" to maximize the {}", slot(&q.response)));
        if !q.conditions.is_empty() {
            s.push_str(&format!(" for those having {}", conditions_text(q)));
        }
    }
    s.push('.');
    s
}

fn conditions_text(q: &CausalQuery) -> String {
    q.conditions.iter().map(|c| format!("{} = {}", c.variable, c.value)).collect::<Vec<_>>().join(" and ")
}

fn join_names(v: &[String]) -> String {
    match v {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn problem_label(task: Task) -> &'static str {
    match task {
        Task::Cgl => "causal graph learning (CGL)",
        Task::Ate => "average treatment effect estimation (ATE)",
        Task::Hte => "heterogeneous treatment effect estimation (HTE)",
        Task::Ma => "mediation analysis (MA)",
        Task::Opo => "off-policy optimization (OPO)",
    }
}

const PROMPT: &str = "(A) is a list of information that includes i) the original causal problem, ii) the class identification of the causal problem, iii) the used method, and iv) the outcomes.
Interpret the results in (A) in response to the original causal problem, using neutral language to paraphrase it more fluently and engagingly.
The output summary is (I)
Guidelines:
1: (I) must concentrate on interpreting the result provided in (A) in response to the problem.
2: (I) must include all the results, methods, and dataset name in (A).
3: (I) may include jargon from (A), but it should not include any other technical terms not mentioned in (A).
4: The problem in (A) is a causal problem, thus (I) should not interpret the results as correlation or association.
5: (I) should use a diversified sentence structure that is also reader-friendly and concise, rather than listing information one by one.
6: Instead of including the problems, (I) should use the original problem to develop a more informative interpretation of the result.
7: (I) has to avoid using strong qualifiers such as 'significant'.
8: (I) has to be {n_sentences} sentences or less long, with no repetition of contents.
9: (I) must not comment on the results.
(A):
i) original causal problem: {query}
ii) class identification of the causal problem: {problem}
iii) used method: {method}
iv) outcomes: {function_out}
(I):
";

/// The interpretation prompt with its context slots filled; the outcomes
/// slot carries the template summary.
pub fn build_interpretation_prompt(question: &str, task: Task, method: &MethodId, outcomes: &str) -> String {
    PROMPT
        .replace("{n_sentences}", &PROMPT_SENTENCES.to_string())
        .replace("{query}", question)
        .replace("{problem}", problem_label(task))
        .replace("{method}", method.display_name())
        .replace("{function_out}", outcomes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Template,
    Llm,
}

/// Automated rubric findings. Unexplained variable names are not checked.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RubricReport {
    pub hallucination_flags: Vec<String>,
    pub incompleteness_flags: Vec<String>,
    pub fluency_flags: Vec<String>,
}

impl RubricReport {
    pub fn is_empty(&self) -> bool {
        self.hallucination_flags.is_empty() && self.incompleteness_flags.is_empty() && self.fluency_flags.is_empty()
    }
}

/// What an interpretation is checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct LintContext<'a> {
    pub question: &'a str,
    pub query: &'a CausalQuery,
    pub method: &'a MethodId,
    pub result: &'a ToolResult,
}

fn association_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)correlat|associat").unwrap())
}

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z0-9_.\-]+").unwrap())
}

/// Standalone numbers in `text` (identifier digits are ignored).
pub fn numbers_in(text: &str) -> Vec<f64> {
    word_re()
        .find_iter(text)
        .filter_map(|m| {
            let w = m.as_str().trim_end_matches('.');
            if w.chars().any(|c| c.is_ascii_alphabetic() || c == '_') {
                return None;
            }
            w.parse::<f64>().ok()
        })
        .collect()
}

pub fn sentences(text: &str) -> Vec<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"[.!?]+(?:\s+|$)").unwrap());
    re.split(text).map(|s| s.split_whitespace().collect::<Vec<_>>().join(" ")).filter(|s| !s.is_empty()).collect()
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 0.005 + 1e-9
}

pub fn lint(text: &str, ctx: &LintContext<'_>) -> RubricReport {
    let mut report = RubricReport::default();
    let lower = text.to_lowercase();

    if let Some(m) = association_re().find(text) {
        report.hallucination_flags.push(format!("uses non-causal wording `{}`", m.as_str()));
    }
    let mut allowed = ctx.result.numbers();
    allowed.extend(numbers_in(ctx.question));
    allowed.extend(ctx.query.conditions.iter().filter_map(|c| c.value.as_f64()));
    allowed.push(1.0);
    if let ToolResult::Graph(g) = ctx.result {
        allowed.push(g.edges().len().min(MAX_LISTED_EDGES) as f64);
        allowed.push(g.edges().len() as f64);
    }
    for x in numbers_in(text) {
        if !allowed.iter().any(|a| near(*a, x)) {
            report.hallucination_flags.push(format!("number {x} is not in the result"));
        }
    }

    if !lower.contains(&ctx.query.dataset.to_lowercase()) {
        report.incompleteness_flags.push(format!("dataset {} not named", ctx.query.dataset));
    }
    if !lower.contains(&ctx.method.display_name().to_lowercase()) {
        report.incompleteness_flags.push(format!("method {} not named", ctx.method));
    }
    let found = numbers_in(text);
    for v in ctx.result.numbers() {
        if !found.iter().any(|x| near(*x, v)) {
            report.incompleteness_flags.push(format!("result value {} missing", fmt2(v)));
        }
    }
    if let ToolResult::Action { level } = ctx.result {
        if !text.contains(&level.to_string()) {
            report.incompleteness_flags.push(format!("recommended level {level} missing"));
        }
    }
    for v in ctx.query.variables() {
        if !lower.contains(&v.to_lowercase()) {
            report.incompleteness_flags.push(format!("variable {v} not mentioned"));
        }
    }

    let s = sentences(text);
    for (i, a) in s.iter().enumerate() {
        if s[..i].contains(a) {
            report.fluency_flags.push(format!("repeated sentence `{a}`"));
        }
    }
    if s.len() > MAX_SENTENCES {
        report.fluency_flags.push(format!("{} sentences (limit {MAX_SENTENCES})", s.len()));
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpretation {
    pub text: String,
    pub source: Source,
    /// Lint findings of a rejected LLM reply, if the text fell back.
    #[serde(default, skip_serializing_if = "RubricReport::is_empty")]
    pub rejected_flags: RubricReport,
}

#[derive(Debug, Clone, Default)]
pub enum Backend {
    #[default]
    Template,
    Llm(LlmClient),
}

/// Template summary followed by the completeness sentence.
pub fn template_text(q: &CausalQuery, result: &ToolResult, method: &MethodId) -> Result<String, NarrateError> {
    Ok(format!("{} {}", template_summary(q.task, result, q)?, completeness_sentence(q, method)))
}

pub fn narrate(
    question: &str,
    q: &CausalQuery,
    result: &ToolResult,
    method: &MethodId,
    backend: &Backend,
) -> Result<Interpretation, NarrateError> {
    let fallback = template_text(q, result, method)?;
    let Backend::Llm(client) = backend else {
        return Ok(Interpretation { text: fallback, source: Source::Template, rejected_flags: RubricReport::default() });
    };
    let prompt = build_interpretation_prompt(question, q.task, method, &template_summary(q.task, result, q)?);
    let reply = client.complete(&json!({ "prompt": prompt }))?;
    let reply = reply.trim().to_string();
    let report = lint(&reply, &LintContext { question, query: q, method, result });
    if report.is_empty() && !reply.is_empty() {
        Ok(Interpretation { text: reply, source: Source::Llm, rejected_flags: report })
    } else {
        Ok(Interpretation { text: fallback, source: Source::Template, rejected_flags: report })
    }
}
