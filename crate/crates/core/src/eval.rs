//! Extraction accuracy and end-to-end pass / relevance / win rates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{generate_for_query, GenSpec, GoldenLabel};
use crate::forge::{QueryBenchRecord, TopicHierarchy};
use crate::pipeline::{Pipeline, PipelineOutput};
use crate::result::{Graph, ToolResult};
use crate::rng::derive_seed;
use crate::schema::{CausalQuery, ConditionClause, Nodes, Scalar, Task, ALL_VARIABLES};
use crate::text::{contains_tokens, normalize_identifier};

pub const KEYS: [&str; 7] = ["causal_task", "dataset", "nodes", "treatment", "response", "mediator", "condition"];
pub const ABS_TOLERANCE: f64 = 0.1;
pub const REL_TOLERANCE: f64 = 0.05;
pub const MIN_SKELETON_F1: f64 = 0.8;
pub const CONDITION_VALUE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{predictions} predictions for {golds} golds")]
    LengthMismatch { predictions: usize, golds: usize },
}

/// Either normalized identifier is a whole-token substring of the other.
pub fn soft_match(predicted: &str, gold: &str) -> bool {
    let (p, g) = (normalize_identifier(predicted), normalize_identifier(gold));
    if p.is_empty() || g.is_empty() {
        return p == g;
    }
    contains_tokens(&p, &g) || contains_tokens(&g, &p)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub hits: usize,
    pub total: usize,
}

impl Tally {
    fn add(&mut self, hit: bool) {
        self.total += 1;
        self.hits += usize::from(hit);
    }

    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.hits as f64 / self.total as f64
        }
    }
}

/// Per-key tallies; a key is scored only on cases whose gold carries it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KeyAccuracy {
    pub keys: BTreeMap<String, Tally>,
}

impl KeyAccuracy {
    pub fn rate(&self, key: &str) -> Option<f64> {
        self.keys.get(key).filter(|t| t.total > 0).map(Tally::rate)
    }

    fn add(&mut self, key: &str, hit: bool) {
        self.keys.entry(key.to_string()).or_default().add(hit);
    }

    fn score(&mut self, pred: Option<&CausalQuery>, gold: &CausalQuery) {
        self.add("causal_task", pred.is_some_and(|p| p.task == gold.task));
        self.add("dataset", pred.is_some_and(|p| p.dataset == gold.dataset));
        if let Some(g) = &gold.nodes {
            self.add("nodes", pred.is_some_and(|p| nodes_match(p.nodes.as_ref(), g)));
        }
        for (key, g, p) in [
            ("treatment", &gold.treatment, pred.and_then(|p| p.treatment.as_deref())),
            ("response", &gold.response, pred.and_then(|p| p.response.as_deref())),
            ("mediator", &gold.mediator, pred.and_then(|p| p.mediator.as_deref())),
        ] {
            if let Some(g) = g {
                self.add(key, p.is_some_and(|p| soft_match(p, g)));
            }
        }
        if !gold.conditions.is_empty() {
            let hit = pred.is_some_and(|p| gold.conditions.iter().all(|g| p.conditions.iter().any(|c| condition_match(c, g))));
            self.add("condition", hit);
        }
    }
}

fn node_names(n: &Nodes) -> Vec<String> {
    match n {
        Nodes::AllVariables => vec![ALL_VARIABLES.to_string()],
        Nodes::Named(v) => v.clone(),
    }
}

fn nodes_match(pred: Option<&Nodes>, gold: &Nodes) -> bool {
    let Some(pred) = pred else { return false };
    let p = node_names(pred);
    node_names(gold).iter().all(|g| p.iter().any(|x| soft_match(x, g)))
}

fn condition_match(pred: &ConditionClause, gold: &ConditionClause) -> bool {
    let value = match (&pred.value, &gold.value) {
        (Scalar::Num(a), Scalar::Num(b)) => (a - b).abs() <= CONDITION_VALUE_TOL,
        (a, b) => a.to_string() == b.to_string(),
    };
    value && soft_match(&pred.variable, &gold.variable)
}

pub fn key_accuracy(predictions: &[CausalQuery], golds: &[CausalQuery]) -> Result<KeyAccuracy, EvalError> {
    let preds: Vec<Option<&CausalQuery>> = predictions.iter().map(Some).collect();
    key_accuracy_partial(&preds, golds)
}

/// As [`key_accuracy`]; a missing prediction misses every key.
pub fn key_accuracy_partial(predictions: &[Option<&CausalQuery>], golds: &[CausalQuery]) -> Result<KeyAccuracy, EvalError> {
    if predictions.len() != golds.len() {
        return Err(EvalError::LengthMismatch { predictions: predictions.len(), golds: golds.len() });
    }
    let mut acc = KeyAccuracy::default();
    for k in KEYS {
        acc.keys.insert(k.to_string(), Tally::default());
    }
    for (p, g) in predictions.iter().zip(golds) {
        acc.score(*p, g);
    }
    Ok(acc)
}

pub fn within_tolerance(estimate: f64, truth: f64) -> bool {
    (estimate - truth).abs() <= ABS_TOLERANCE.max(REL_TOLERANCE * truth.abs())
}

/// F1 of the undirected skeletons, matching nodes by name. Two empty
/// skeletons score 1.
pub fn skeleton_f1(estimate: &Graph, truth: &Graph) -> f64 {
    let named = |g: &Graph| -> Vec<(String, String)> {
        g.skeleton()
            .into_iter()
            .map(|(i, j)| {
                let (a, b) = (g.nodes[i].clone(), g.nodes[j].clone());
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect()
    };
    let (e, t) = (named(estimate), named(truth));
    if e.is_empty() && t.is_empty() {
        return 1.0;
    }
    let tp = e.iter().filter(|x| t.contains(x)).count() as f64;
    if tp == 0.0 {
        return 0.0;
    }
    let (p, r) = (tp / e.len() as f64, tp / t.len() as f64);
    2.0 * p * r / (p + r)
}

/// Whether `result` is accurate against the golden label.
pub fn judge(result: &ToolResult, truth: &GoldenLabel) -> bool {
    match (result, truth) {
        (ToolResult::Graph(g), GoldenLabel::Graph(t)) => skeleton_f1(g, t) >= MIN_SKELETON_F1,
        (ToolResult::Effect { value }, GoldenLabel::Ate { value: t } | GoldenLabel::Hte { value: t, .. }) => within_tolerance(*value, *t),
        (ToolResult::Mediation { total, direct, indirect }, GoldenLabel::Mediation(t)) => {
            within_tolerance(*total, t.total) && within_tolerance(*direct, t.direct) && within_tolerance(*indirect, t.indirect)
        }
        (ToolResult::Action { level }, GoldenLabel::Policy { action, .. }) => level.as_f64() == Some(f64::from(*action)),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseTrace {
    pub index: usize,
    pub task: Task,
    pub question: String,
    pub data_seed: u64,
    pub pass: bool,
    pub relevance: bool,
    pub win: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intent: Option<CausalQuery>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ToolResult>,
    pub truth: Option<GoldenLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskRates {
    pub cases: usize,
    pub pass: usize,
    pub relevance: usize,
    pub win: usize,
}

impl TaskRates {
    fn ratio(&self, k: usize) -> f64 {
        if self.cases == 0 {
            0.0
        } else {
            k as f64 / self.cases as f64
        }
    }

    pub fn pass_rate(&self) -> f64 {
        self.ratio(self.pass)
    }

    pub fn relevance_rate(&self) -> f64 {
        self.ratio(self.relevance)
    }

    pub fn win_rate(&self) -> f64 {
        self.ratio(self.win)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub key_accuracy: KeyAccuracy,
    pub tasks: BTreeMap<Task, TaskRates>,
    pub cases: Vec<CaseTrace>,
}

impl EvalReport {
    pub fn from_cases(cases: Vec<CaseTrace>, golds: &[CausalQuery]) -> Self {
        let mut tasks: BTreeMap<Task, TaskRates> = BTreeMap::new();
        for c in &cases {
            let t = tasks.entry(c.task).or_default();
            t.cases += 1;
            t.pass += usize::from(c.pass);
            t.relevance += usize::from(c.relevance);
            t.win += usize::from(c.win);
        }
        let preds: Vec<Option<&CausalQuery>> = cases.iter().map(|c| c.intent.as_ref()).collect();
        let key_accuracy = key_accuracy_partial(&preds, golds).expect("one trace per gold");
        Self { key_accuracy, tasks, cases }
    }

    /// Plain-text table: one column per task, rows for the three rates,
    /// then the key accuracies.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<12}", "");
        for t in self.tasks.keys() {
            let _ = write!(out, "{:>8}", t.as_str());
        }
        out.push('\n');
        let rows: [(&str, fn(&TaskRates) -> f64); 3] =
            [("pass", TaskRates::pass_rate), ("relevance", TaskRates::relevance_rate), ("win", TaskRates::win_rate)];
        for (name, f) in rows {
            let _ = write!(out, "{name:<12}");
            for r in self.tasks.values() {
                let _ = write!(out, "{:>8.3}", f(r));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<12}", "cases");
        for r in self.tasks.values() {
            let _ = write!(out, "{:>8}", r.cases);
        }
        out.push('\n');
        out.push('\n');
        for k in KEYS {
            if let Some(r) = self.key_accuracy.rate(k) {
                let _ = writeln!(out, "{k:<12}{r:>8.3}");
            }
        }
        out
    }
}

/// How each case's table is built.
#[derive(Debug, Clone)]
pub struct CaseData {
    pub spec: GenSpec,
    /// Root seed; case `i` uses `derive_seed(seed, i)`.
    pub seed: u64,
}

fn run_case(i: usize, r: &QueryBenchRecord, pool: &[String], data: &CaseData, pipeline: &Pipeline) -> CaseTrace {
    let data_seed = derive_seed(data.seed, i as u64);
    let mut trace = CaseTrace {
        index: i,
        task: r.golden.task,
        question: r.question.clone(),
        data_seed,
        pass: false,
        relevance: false,
        win: false,
        intent: None,
        result: None,
        truth: None,
        error: None,
    };
    let generated = match generate_for_query(&r.golden, pool, &data.spec, data_seed) {
        Ok(g) => g,
        Err(e) => {
            trace.error = Some(format!("data generation: {e}"));
            return trace;
        }
    };
    trace.truth = Some(generated.truth.clone());
    let intent = match pipeline.intent(&r.question, &generated.dataset) {
        Ok(q) => q,
        Err(e) => {
            trace.error = Some(e.to_string());
            return trace;
        }
    };
    trace.intent = Some(intent.clone());
    match pipeline.run_intent(&r.question, intent, &generated.dataset) {
        Ok(PipelineOutput { intent, result, .. }) => {
            trace.pass = true;
            trace.relevance = intent.task == r.golden.task;
            trace.win = trace.relevance && judge(&result, &generated.truth);
            trace.result = Some(result);
        }
        Err(e) => trace.error = Some(e.to_string()),
    }
    trace
}

/// Runs `pipeline` over every record on freshly generated data. Cases run
/// in parallel; traces keep record order.
pub fn end_to_end(records: &[QueryBenchRecord], h: &TopicHierarchy, data: &CaseData, pipeline: &Pipeline) -> EvalReport {
    let cases: Vec<CaseTrace> = records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let pool: Vec<String> = r
                .golden
                .dataset
                .strip_suffix(".csv")
                .and_then(|t| h.topic(t))
                .map(|t| t.variables.iter().map(|v| v.name.clone()).collect())
                .unwrap_or_default();
            run_case(i, r, &pool, data, pipeline)
        })
        .collect();
    let golds: Vec<CausalQuery> = records.iter().map(|r| r.golden.clone()).collect();
    EvalReport::from_cases(cases, &golds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_match_examples() {
        assert!(soft_match("satisfaction", "satisfaction_rate"));
        assert!(soft_match("customer_satisfaction_rate", "satisfaction_rate"));
        assert!(soft_match("rate", "satisfaction_rate"));
        assert!(!soft_match("ration", "satisfaction_rate"));
    }

    #[test]
    fn key_independence() {
        let gold = CausalQuery::ate("d.csv", "x", "y");
        let mut pred = gold.clone();
        pred.task = Task::Hte;
        let acc = key_accuracy(&[pred], &[gold]).unwrap();
        assert_eq!(acc.rate("causal_task"), Some(0.0));
        assert_eq!(acc.rate("dataset"), Some(1.0));
        assert_eq!(acc.rate("mediator"), None);
    }

    #[test]
    fn identical_lists_score_one() {
        let g = vec![
            CausalQuery::ma("d.csv", "x", "y", "m"),
            CausalQuery::hte("d.csv", "x", "y", vec![ConditionClause::new("z", 0.3)]),
            CausalQuery::cgl("d.csv", Nodes::AllVariables),
        ];
        let acc = key_accuracy(&g, &g).unwrap();
        for k in KEYS {
            assert_eq!(acc.rate(k), Some(1.0), "{k}");
        }
        assert_eq!(key_accuracy(&g[..1], &g), Err(EvalError::LengthMismatch { predictions: 1, golds: 3 }));
    }

    #[test]
    fn failing_pipeline_scores_zero() {
        let h = TopicHierarchy::shipped();
        let mut recs = crate::forge::generate_retrieval_bench(1, &h, 1);
        for r in &mut recs {
            r.question = "hello".into();
        }
        let data = CaseData { spec: GenSpec { n: 200, ..GenSpec::default() }, seed: 1 };
        let rep = end_to_end(&recs, &h, &data, &Pipeline::default());
        assert_eq!(rep.tasks.len(), 5);
        for r in rep.tasks.values() {
            assert_eq!((r.pass, r.relevance, r.win), (0, 0, 0));
        }
    }

    #[test]
    fn skeleton_f1_oracle() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut t = Graph::empty(names.clone());
        t.adjacency[0][1] = 1;
        t.adjacency[1][2] = 1;
        let mut e = Graph::empty(names);
        e.adjacency[1][0] = 1;
        e.adjacency[0][2] = 1;
        // tp = 1, precision 1/2, recall 1/2
        assert!((skeleton_f1(&e, &t) - 0.5).abs() < 1e-12);
        assert_eq!(skeleton_f1(&Graph::empty(vec!["a".into()]), &Graph::empty(vec!["a".into()])), 1.0);
    }
}
