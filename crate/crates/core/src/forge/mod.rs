//! Synthetic benchmark construction: sample structured queries from a
//! topic → variable → type pool, render them as questions, and pair them
//! with random tool outputs for interpretation checks.

mod templates;

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::MethodId;
use crate::narrator::{template_summary, NarrateError};
use crate::result::{Graph, ToolResult};
use crate::rng::{derive_seed, from_seed, Rng};
use crate::schema::{CausalQuery, ConditionClause, Nodes, Scalar, Task};

const SHIPPED: &str = include_str!("../../data/topics.json");

pub const MIN_VARIABLES: usize = 4;
/// Chance that a sampled graph query covers every variable.
pub const ALL_VARIABLES_P: f64 = 0.3;
/// Chance that a variable is written as "long form (identifier)".
pub const LONG_FORM_P: f64 = 0.25;
/// Resampling budget per requested record before giving up on new text.
const MAX_ATTEMPTS_PER_RECORD: u64 = 50;

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("malformed topic hierarchy: {0}")]
    MalformedHierarchy(String),
    #[error("no template {id} for {task} (have {count})")]
    UnknownTemplate { task: Task, id: usize, count: usize },
    #[error(transparent)]
    Narrate(#[from] NarrateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarType {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub vtype: VarType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub name: String,
    pub variables: Vec<Variable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicHierarchy {
    pub topics: Vec<Topic>,
}

impl TopicHierarchy {
    /// The pool bundled with the crate.
    pub fn shipped() -> Self {
        load_hierarchy(SHIPPED).expect("bundled topic file is valid")
    }

    pub fn topic(&self, name: &str) -> Option<&Topic> {
        self.topics.iter().find(|t| t.name == name)
    }

    fn validate(&self) -> Result<(), ForgeError> {
        let bad = |m: String| Err(ForgeError::MalformedHierarchy(m));
        if self.topics.is_empty() {
            return bad("no topics".into());
        }
        let mut seen = HashSet::new();
        for t in &self.topics {
            if !crate::schema::is_identifier(&t.name) {
                return bad(format!("topic name `{}` is not an identifier", t.name));
            }
            if !seen.insert(t.name.as_str()) {
                return bad(format!("duplicate topic `{}`", t.name));
            }
            if t.variables.len() < MIN_VARIABLES {
                return bad(format!("topic `{}` has {} variables, need {MIN_VARIABLES}", t.name, t.variables.len()));
            }
            let mut vars = HashSet::new();
            for v in &t.variables {
                if !crate::schema::is_identifier(&v.name) {
                    return bad(format!("variable `{}` is not an identifier", v.name));
                }
                if !vars.insert(v.name.as_str()) {
                    return bad(format!("duplicate variable `{}` in `{}`", v.name, t.name));
                }
            }
        }
        Ok(())
    }
}

/// Parses and checks a hierarchy in JSON form.
pub fn load_hierarchy(json: &str) -> Result<TopicHierarchy, ForgeError> {
    if json.trim().is_empty() {
        return Err(ForgeError::MalformedHierarchy("empty input".into()));
    }
    let h: TopicHierarchy = serde_json::from_str(json).map_err(|e| ForgeError::MalformedHierarchy(e.to_string()))?;
    h.validate()?;
    Ok(h)
}

fn sample_value(v: &Variable, rng: &mut Rng) -> Scalar {
    match v.vtype {
        VarType::Discrete => Scalar::Num(f64::from(rng.random_range(0..=4u8))),
        VarType::Continuous => Scalar::Num((rng.random::<f64>() * 100.0).round() / 100.0),
    }
}

/// A random valid query for `task`, all variables from one topic.
pub fn sample_query(task: Task, h: &TopicHierarchy, rng: &mut Rng) -> CausalQuery {
    let topic = h.topics.choose(rng).expect("non-empty hierarchy");
    let dataset = format!("{}.csv", topic.name);
    let mut vars: Vec<&Variable> = topic.variables.iter().collect();
    vars.shuffle(rng);
    let name = |k: usize| vars[k].name.as_str();
    match task {
        Task::Cgl => {
            if rng.random_bool(ALL_VARIABLES_P) {
                CausalQuery::cgl(dataset, Nodes::AllVariables)
            } else {
                let k = rng.random_range(2..=5.min(vars.len()));
                CausalQuery::cgl(dataset, Nodes::Named(vars[..k].iter().map(|v| v.name.clone()).collect()))
            }
        }
        Task::Ate => CausalQuery::ate(dataset, name(0), name(1)),
        Task::Ma => CausalQuery::ma(dataset, name(0), name(1), name(2)),
        Task::Hte | Task::Opo => {
            let c = vec![ConditionClause { variable: name(2).to_string(), value: sample_value(vars[2], rng) }];
            if task == Task::Hte {
                CausalQuery::hte(dataset, name(0), name(1), c)
            } else {
                CausalQuery::opo(dataset, name(0), name(1), c)
            }
        }
    }
}

pub fn template_count(task: Task) -> usize {
    match task {
        Task::Cgl => templates::CGL.len(),
        Task::Ate => templates::ATE.len(),
        Task::Hte => templates::HTE.len(),
        Task::Ma => templates::MA.len(),
        Task::Opo => templates::OPO.len(),
    }
}

fn variable_text(name: &str, rng: &mut Rng) -> String {
    if name.contains('_') && rng.random_bool(LONG_FORM_P) {
        format!("{} ({name})", name.replace('_', " "))
    } else {
        name.to_string()
    }
}

const CONDITION_LINKS: [&str; 4] = ["=", "is set to", "is equal to", "is fixed at"];

fn condition_text(conditions: &[ConditionClause], rng: &mut Rng) -> String {
    conditions
        .iter()
        .map(|c| format!("{} {} {}", c.variable, CONDITION_LINKS.choose(rng).unwrap(), c.value))
        .collect::<Vec<_>>()
        .join(" and ")
}

fn node_list(names: &[String], rng: &mut Rng) -> String {
    let parts: Vec<String> = names.iter().map(|n| variable_text(n, rng)).collect();
    match parts.as_slice() {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

/// Renders `q` through template `template_id`. Slot values appear
/// verbatim; the `rng` drives synonym and long-form choices.
pub fn render_question(q: &CausalQuery, template_id: usize, rng: &mut Rng) -> Result<String, ForgeError> {
    let count = template_count(q.task);
    if template_id >= count {
        return Err(ForgeError::UnknownTemplate { task: q.task, id: template_id, count });
    }
    let pattern = match q.task {
        Task::Cgl => {
            let (all, named) = templates::CGL[template_id];
            if matches!(q.nodes, Some(Nodes::AllVariables) | None) {
                all
            } else {
                named
            }
        }
        Task::Ate => templates::ATE[template_id],
        Task::Hte => templates::HTE[template_id],
        Task::Ma => templates::MA[template_id],
        Task::Opo => templates::OPO[template_id],
    };
    let noun = *templates::EFFECT_NOUNS.choose(rng).unwrap();
    let verb = *templates::EFFECT_VERBS.choose(rng).unwrap();
    let slot = |v: &Option<String>, rng: &mut Rng| v.as_deref().map(|n| variable_text(n, rng)).unwrap_or_default();
    let t = slot(&q.treatment, rng);
    let y = slot(&q.response, rng);
    let m = slot(&q.mediator, rng);
    let c = condition_text(&q.conditions, rng);
    let n = q.nodes.as_ref().map(|n| node_list(n.names(), rng)).unwrap_or_default();
    Ok(pattern
        .replace("{D}", &q.dataset)
        .replace("{T}", &t)
        .replace("{Y}", &y)
        .replace("{M}", &m)
        .replace("{C}", &c)
        .replace("{N}", &n)
        .replace("{noun}", noun)
        .replace("{verb}", verb))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryBenchRecord {
    pub question: String,
    pub golden: CausalQuery,
    pub template_id: usize,
    pub seed: u64,
}

/// One record drawn from its own seed.
pub fn record_from_seed(task: Task, h: &TopicHierarchy, seed: u64) -> QueryBenchRecord {
    let mut rng = from_seed(seed);
    let golden = sample_query(task, h, &mut rng);
    let template_id = rng.random_range(0..template_count(task));
    let question = render_question(&golden, template_id, &mut rng).expect("template id in range");
    QueryBenchRecord { question, golden, template_id, seed }
}

/// `n_per_task` distinct questions per task, tasks in [`Task::ALL`] order.
/// Task `k` draws record seeds from `derive_seed(root, k)`.
pub fn generate_retrieval_bench(n_per_task: usize, h: &TopicHierarchy, root: u64) -> Vec<QueryBenchRecord> {
    let mut out = Vec::with_capacity(n_per_task * Task::ALL.len());
    let mut seen: HashSet<String> = HashSet::new();
    for (k, &task) in Task::ALL.iter().enumerate() {
        let task_seed = derive_seed(root, k as u64);
        let mut made = 0;
        let budget = n_per_task as u64 * MAX_ATTEMPTS_PER_RECORD;
        for attempt in 0..budget {
            if made == n_per_task {
                break;
            }
            let r = record_from_seed(task, h, derive_seed(task_seed, attempt));
            if seen.insert(r.question.clone()) {
                out.push(r);
                made += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretBenchRecord {
    pub question: String,
    pub task: Task,
    pub method: MethodId,
    pub function_output: ToolResult,
    pub template_summary: String,
}

fn effect(rng: &mut Rng) -> f64 {
    (rng.random_range(-2.0..2.0f64) * 100.0).round() / 100.0
}

fn random_graph(nodes: Vec<String>, rng: &mut Rng) -> Graph {
    let mut g = Graph::empty(nodes);
    let mut pairs: Vec<(usize, usize)> = (0..g.len()).flat_map(|i| (0..g.len()).map(move |j| (i, j))).filter(|(i, j)| i < j).collect();
    pairs.shuffle(rng);
    let k = rng.random_range(1..=3).min(pairs.len());
    for &(i, j) in &pairs[..k] {
        let (a, b) = if rng.random_bool(0.5) { (i, j) } else { (j, i) };
        g.adjacency[a][b] = 1;
    }
    g
}

const LETTER_LEVELS: [&str; 3] = ["A", "B", "C"];

/// A random tool output in `q.task`'s format.
pub fn random_tool_result(q: &CausalQuery, h: &TopicHierarchy, rng: &mut Rng) -> ToolResult {
    match q.task {
        Task::Cgl => {
            let nodes = match &q.nodes {
                Some(Nodes::Named(v)) => v.clone(),
                _ => {
                    let topic = q.dataset.strip_suffix(".csv").and_then(|t| h.topic(t));
                    match topic {
                        Some(t) => t.variables.iter().map(|v| v.name.clone()).collect(),
                        None => (1..=4).map(|i| format!("x{i}")).collect(),
                    }
                }
            };
            ToolResult::Graph(random_graph(nodes, rng))
        }
        Task::Ate | Task::Hte => ToolResult::Effect { value: effect(rng) },
        Task::Ma => ToolResult::mediation(effect(rng), effect(rng)),
        Task::Opo => {
            let level = if rng.random_bool(0.5) {
                Scalar::Num(f64::from(rng.random_range(0..=1u8)))
            } else {
                Scalar::Text(LETTER_LEVELS.choose(rng).unwrap().to_string())
            };
            ToolResult::Action { level }
        }
    }
}

/// Pairs each record with a random output and its template summary.
pub fn generate_interpret_bench(
    records: &[QueryBenchRecord],
    h: &TopicHierarchy,
    seed: u64,
) -> Result<Vec<InterpretBenchRecord>, ForgeError> {
    records
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let mut rng = from_seed(derive_seed(seed, k as u64));
            let task = r.golden.task;
            let function_output = random_tool_result(&r.golden, h, &mut rng);
            let template_summary = template_summary(task, &function_output, &r.golden)?;
            Ok(InterpretBenchRecord {
                question: r.question.clone(),
                task,
                method: MethodId::for_task(task),
                function_output,
                template_summary,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::validate_query;

    #[test]
    fn shipped_pool_is_large_enough() {
        let h = TopicHierarchy::shipped();
        assert!(h.topics.len() >= 30);
        assert!(h.topics.iter().all(|t| t.variables.len() >= 5));
        let emp = h.topic("employment").unwrap();
        let v = emp.variables.iter().find(|v| v.name == "labor_participation_rate").unwrap();
        assert_eq!(v.vtype, VarType::Continuous);
    }

    #[test]
    fn malformed_hierarchies() {
        assert!(matches!(load_hierarchy(""), Err(ForgeError::MalformedHierarchy(_))));
        let vars = r#"[{"name":"a","vtype":"discrete"},{"name":"b","vtype":"discrete"},{"name":"c","vtype":"discrete"},{"name":"d","vtype":"continuous"}]"#;
        let dup = format!(r#"{{"topics":[{{"name":"t","variables":{vars}}},{{"name":"t","variables":{vars}}}]}}"#);
        assert!(matches!(load_hierarchy(&dup), Err(ForgeError::MalformedHierarchy(_))));
        let small = r#"{"topics":[{"name":"t","variables":[{"name":"a","vtype":"discrete"}]}]}"#;
        assert!(matches!(load_hierarchy(small), Err(ForgeError::MalformedHierarchy(_))));
    }

    #[test]
    fn sampled_queries_are_valid() {
        let h = TopicHierarchy::shipped();
        let mut rng = from_seed(7);
        for task in Task::ALL {
            for _ in 0..1000 {
                let q = sample_query(task, &h, &mut rng);
                assert!(validate_query(&q).is_empty(), "{q:?}");
                let topic = h.topic(q.dataset.strip_suffix(".csv").unwrap()).unwrap();
                let vars = q.variables();
                assert!(vars.iter().all(|v| topic.variables.iter().any(|t| t.name == *v)));
                let distinct: HashSet<&str> = vars.iter().copied().collect();
                assert_eq!(distinct.len(), vars.len());
                for c in &q.conditions {
                    let x = c.value.as_f64().unwrap();
                    assert!((0.0..=4.0).contains(&x));
                    assert_eq!((x * 100.0).round() / 100.0, x);
                }
            }
        }
    }

    #[test]
    fn graph_template_zero_reads_as_expected() {
        let q = CausalQuery::cgl("employee_data.csv", Nodes::AllVariables);
        assert_eq!(
            render_question(&q, 0, &mut from_seed(1)).unwrap(),
            "Is there a method to discover every direct influence present in the employee_data.csv dataset?"
        );
    }

    #[test]
    fn unknown_template() {
        let q = CausalQuery::ate("a.csv", "x", "y");
        assert!(matches!(render_question(&q, 99, &mut from_seed(1)), Err(ForgeError::UnknownTemplate { id: 99, .. })));
    }

    #[test]
    fn bench_sizes_and_determinism() {
        let h = TopicHierarchy::shipped();
        assert_eq!(generate_retrieval_bench(1, &h, 3).len(), 5);
        let a = generate_retrieval_bench(40, &h, 11);
        assert_eq!(a.len(), 200);
        assert_eq!(a, generate_retrieval_bench(40, &h, 11));
        let texts: HashSet<&str> = a.iter().map(|r| r.question.as_str()).collect();
        assert_eq!(texts.len(), a.len());
    }

    #[test]
    fn interpret_bench_matches_summaries() {
        let h = TopicHierarchy::shipped();
        let recs = generate_retrieval_bench(80, &h, 5);
        let bench = generate_interpret_bench(&recs[..400], &h, 9).unwrap();
        assert_eq!(bench.len(), 400);
        assert_eq!(bench, generate_interpret_bench(&recs[..400], &h, 9).unwrap());
        for (b, r) in bench.iter().zip(&recs) {
            assert!(b.function_output.fits(b.task));
            assert_eq!(b.template_summary, template_summary(b.task, &b.function_output, &r.golden).unwrap());
            if let ToolResult::Mediation { total, direct, indirect } = b.function_output {
                assert_eq!(total, direct + indirect);
            }
        }
    }
}
