//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use causalqa_cli::{cmd_bench, cmd_eval, RunConfig, BENCH_FILE, INTERPRET_BENCH_FILE, REPORT_JSON, REPORT_TXT};
use causalqa_core::datagen::{generate, simulate_sem, GenParams, GenSpec, GoldenLabel, SemParams};
use causalqa_core::engine::effects::{estimate_ate, estimate_hte, estimate_mediation};
use causalqa_core::engine::pc::{learn_graph, DEFAULT_ALPHA};
use causalqa_core::engine::policy::optimize_policy;
use causalqa_core::eval::{key_accuracy_partial, skeleton_f1, within_tolerance, MIN_SKELETON_F1};
use causalqa_core::forge::{generate_retrieval_bench, random_tool_result, TopicHierarchy};
use causalqa_core::narrator::{lint, narrate, template_summary, Backend, LintContext};
use causalqa_core::rng::{derive_seed, from_seed};
use causalqa_core::{
    interpret, parse_query_json, serialize_query, CausalQuery, ConditionClause, Graph, MethodId, Nodes, ParseContext, Scalar, Task,
    ToolResult,
};

const ROOT: u64 = 20_240_601;
const N_ROWS: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: &str, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let mut o = f();
    let took = t0.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
            o.detail.push_str(&format!("; over the {limit:?} budget"));
        }
    }
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id:<3} {name}: {} ({:.1}s)", o.detail, took.as_secs_f64());
    o.pass
}

const PARSER_EXAMPLES: [(&str, &str); 5] = [
    (
        "Does the disaster_risk_reduction.csv dataset provide evidence of a direct link between building code compliance rate and the effectiveness of disaster preparedness campaigns?",
        r#"{"causal_problem": ["CSL", "CGL"], "dataset": ["disaster_risk_reduction.csv"], "nodes": ["building_code_compliance_rate", "disaster_preparedness_campaigns"]}"#,
    ),
    (
        "How does the labor force participation rate (labor_participation_rate) in employment.csv contribute to changes in wage growth (wage_increase)?",
        r#"{"causal_problem": ["CEL", "ATE"], "dataset": ["employment.csv"], "treatment": ["labor_participation_rate"], "response": ["wage_increase"]}"#,
    ),
    (
        "Based on the findings in the cybersecurity.csv dataset, what impact does the presence of data breach incidents have on cybersecurity investment under a group condition where the cybersecurity readiness index is set at 0.5 (readiness_index=0.5)?",
        r#"{"causal_problem": ["CEL", "HTE"], "dataset": ["cybersecurity.csv"], "treatment": ["data_breach_incidents"], "response": ["cybersecurity_investment"], "condition": [["readiness_index", 0.5]]}"#,
    ),
    (
        "Is there substantial evidence in retail.csv indicating that the pathway from retail employment to the e-commerce penetration rate is mediated by the consumer confidence index?",
        r#"{"causal_problem": ["CEL", "MA"], "dataset": ["retail.csv"], "treatment": ["retail_employment"], "response": ["e-commerce_penetration_rate"], "mediator": ["consumer_confidence_index"]}"#,
    ),
    (
        "If the poverty rate stands at 0.32 (poverty_ratio = 0.32), what recommendations can be derived from the poverty.csv dataset on adjusting social assistance coverage to positively impact the gini coefficient?",
        r#"{"causal_problem": ["CPL", "OPO"], "dataset": ["poverty.csv"], "treatment": ["social_assistance_coverage"], "response": ["gini_coefficient"], "condition": [["poverty_ratio", "0.32"]]}"#,
    ),
];

fn c1_parser_examples() -> Outcome {
    let ctx = ParseContext::default();
    let mut exact = 0;
    for (q, want) in PARSER_EXAMPLES {
        let want = serialize_query(&parse_query_json(want).unwrap()).unwrap();
        if interpret(q, &ctx).ok().and_then(|g| serialize_query(&g).ok()).as_deref() == Some(want.as_str()) {
            exact += 1;
        }
    }
    Outcome { pass: exact == 5, detail: format!("{exact}/5 exact") }
}

fn c2_round_trip() -> Outcome {
    let recs = generate_retrieval_bench(300, &TopicHierarchy::shipped(), ROOT);
    let ctx = ParseContext::default();
    let preds: Vec<Option<CausalQuery>> = recs.iter().map(|r| interpret(&r.question, &ctx).ok()).collect();
    let refs: Vec<Option<&CausalQuery>> = preds.iter().map(Option::as_ref).collect();
    let golds: Vec<CausalQuery> = recs.iter().map(|r| r.golden.clone()).collect();
    let acc = key_accuracy_partial(&refs, &golds).unwrap();
    let mut pass = recs.len() == 1500;
    let mut parts = Vec::new();
    for (key, tally) in &acc.keys {
        let need = match key.as_str() {
            "causal_task" => 0.95,
            "dataset" => 0.99,
            _ => 0.90,
        };
        pass &= tally.total > 0 && tally.rate() >= need;
        parts.push(format!("{key}={:.3}", tally.rate()));
    }
    Outcome { pass, detail: format!("{} questions; {}", recs.len(), parts.join(" ")) }
}

fn seeds(stream: u64, k: usize) -> impl Iterator<Item = u64> {
    let base = derive_seed(ROOT, stream);
    (0..k as u64).map(move |i| derive_seed(base, i))
}

fn c3_ate() -> Outcome {
    let spec = GenSpec { n: N_ROWS, ..GenSpec::default() };
    let hits = seeds(3, 50)
        .filter(|&s| {
            let g = generate(Task::Ate, &spec, s).unwrap();
            let GoldenLabel::Ate { value } = g.truth else { unreachable!() };
            within_tolerance(estimate_ate(&g.dataset, "a", "y").unwrap().value, value)
        })
        .count();
    Outcome { pass: hits >= 45, detail: format!("{hits}/50 within max(0.1, 5%) (need 45)") }
}

fn c4_hte() -> Outcome {
    let spec = GenSpec { n: N_ROWS, ..GenSpec::default() };
    let hits = seeds(4, 50)
        .filter(|&s| {
            let g = generate(Task::Hte, &spec, s).unwrap();
            let GoldenLabel::Hte { value, conditions } = g.truth else { unreachable!() };
            within_tolerance(estimate_hte(&g.dataset, "a", "y", &conditions).unwrap(), value)
        })
        .count();
    Outcome { pass: hits >= 45, detail: format!("{hits}/50 within max(0.1, 5%) (need 45)") }
}

fn c5_mediation() -> Outcome {
    let spec = GenSpec { n: N_ROWS, ..GenSpec::default() };
    let (mut hits, mut additive) = (0, 0);
    for s in seeds(5, 50) {
        let g = generate(Task::Ma, &spec, s).unwrap();
        let GoldenLabel::Mediation(t) = g.truth else { unreachable!() };
        let e = estimate_mediation(&g.dataset, "a", "y", "m").unwrap();
        if within_tolerance(e.direct, t.direct) && within_tolerance(e.indirect, t.indirect) && within_tolerance(e.total, t.total) {
            hits += 1;
        }
        if let ToolResult::Mediation { total, direct, indirect } = ToolResult::mediation(e.direct, e.indirect) {
            additive += usize::from(total == direct + indirect);
        }
    }
    Outcome { pass: hits >= 45 && additive == 50, detail: format!("{hits}/50 within tolerance (need 45); additive {additive}/50") }
}

fn collider_oriented(seed: u64) -> bool {
    let b = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![0.0; 3]];
    let p = SemParams { b, p_mask: 0.0, noise_sd: vec![1.0; 3], n: 2000 };
    let names: Vec<String> = ["x1", "x2", "x3"].iter().map(|s| s.to_string()).collect();
    let d = simulate_sem(&p, &names, &mut from_seed(seed)).unwrap();
    let cols: Vec<Vec<f64>> = names.iter().map(|n| d.numeric(n).unwrap().to_vec()).collect();
    let g: Graph = learn_graph(&cols, &names, DEFAULT_ALPHA).unwrap();
    g.is_directed(0, 2) && g.is_directed(1, 2) && !g.has_edge(0, 1) && !g.has_edge(1, 0)
}

fn c6_cgl() -> Outcome {
    let spec = GenSpec { j: 5, n: 2000, p_mask: 0.5, ..GenSpec::default() };
    let mut good = 0;
    for s in seeds(6, 30) {
        let g = generate(Task::Cgl, &spec, s).unwrap();
        let GoldenLabel::Graph(truth) = &g.truth else { unreachable!() };
        let names = g.dataset.names().to_vec();
        let cols: Vec<Vec<f64>> = names.iter().map(|n| g.dataset.numeric(n).unwrap().to_vec()).collect();
        let est = learn_graph(&cols, &names, DEFAULT_ALPHA).unwrap();
        good += usize::from(skeleton_f1(&est, truth) >= MIN_SKELETON_F1);
    }
    let colliders = seeds(60, 30).filter(|&s| collider_oriented(s)).count();
    Outcome {
        pass: good >= 27 && colliders >= 27,
        detail: format!("skeleton F1 >= 0.8 in {good}/30; collider oriented in {colliders}/30 (need 27 each)"),
    }
}

fn c7_policy() -> Outcome {
    let one = GenSpec { n: N_ROWS, ..GenSpec::default() };
    let mut single = 0;
    for s in seeds(7, 30) {
        let g = generate(Task::Opo, &one, s).unwrap();
        let (GoldenLabel::Policy { conditions, state, .. }, GenParams::Mdp(p)) = (&g.truth, &g.params) else { unreachable!() };
        let hte: f64 = p.reward.beta10 + p.reward.beta2.iter().zip(state).map(|(b, x)| b * x).sum::<f64>();
        let want = Scalar::Num(if hte > 0.0 { 1.0 } else { 0.0 });
        single += usize::from(optimize_policy(&g.dataset, "a", "y", conditions).unwrap() == want);
    }
    let two = GenSpec { stages: 2, ..one };
    let mut multi = 0;
    for s in seeds(70, 30) {
        let g = generate(Task::Opo, &two, s).unwrap();
        let GoldenLabel::Policy { action, conditions, .. } = &g.truth else { unreachable!() };
        multi += usize::from(optimize_policy(&g.dataset, "a", "y", conditions).unwrap() == Scalar::Num(f64::from(*action)));
    }
    Outcome {
        pass: single >= 27 && multi >= 27,
        detail: format!("single-stage {single}/30, two-stage vs exact DP {multi}/30 (need 27 each)"),
    }
}

fn c8_end_to_end(dir: &Path) -> Outcome {
    let cfg = RunConfig { out: dir.to_path_buf(), ..RunConfig::default() };
    cmd_bench(&cfg, &mut std::io::sink()).unwrap();
    let report = cmd_eval(&dir.join(BENCH_FILE), &cfg, &mut std::io::sink()).unwrap();
    let mut pass = report.tasks.len() == 5;
    let mut parts = Vec::new();
    for (task, r) in &report.tasks {
        let (p, rel, w) = (r.pass_rate(), r.relevance_rate(), r.win_rate());
        pass &= r.cases == 30 && p >= 0.95 && rel >= 0.95 && w >= 0.85 && w <= rel && rel <= p;
        parts.push(format!("{task} {p:.2}/{rel:.2}/{w:.2}"));
    }
    Outcome { pass, detail: format!("pass/relevance/win: {}", parts.join(", ")) }
}

fn c9_narrator() -> Outcome {
    let g = {
        let nodes: Vec<String> =
            ["gender_index", "diversity_index", "LGBTQ_inclusion", "disability_inclusion_index"].iter().map(|s| s.to_string()).collect();
        let mut g = Graph::empty(nodes);
        g.adjacency[0][1] = 1;
        g.adjacency[0][2] = 1;
        g.adjacency[3][2] = 1;
        g
    };
    let examples: [(CausalQuery, ToolResult, &str); 5] = [
        (
            CausalQuery::cgl("d.csv", Nodes::AllVariables),
            ToolResult::Graph(g),
            "There are 3 pairs of significant causal relationships. The gender_index would causally influence the diversity_index. The gender_index would causally influence the LGBTQ_inclusion. The disability_inclusion_index would causally influence the LGBTQ_inclusion.",
        ),
        (
            CausalQuery::ate("housing.csv", "homeownership_rate", "affordability_index"),
            ToolResult::Effect { value: 0.45 },
            "The average treatment effect of setting homeownership_rate as 1 on the affordability_index is 0.45.",
        ),
        (
            CausalQuery::hte("sports.csv", "professional_athlete_salaries", "event_attendance", vec![ConditionClause::new("medal_tally", 0.79)]),
            ToolResult::Effect { value: -1.41 },
            "The heterogeneous treatment effect of setting professional_athlete_salaries as 1 on the event_attendance is -1.41 for those having medal_tally = 0.79.",
        ),
        (
            CausalQuery::ma("d.csv", "age_distribution", "gender_ratio", "migration_speed"),
            ToolResult::Mediation { total: 16.17, direct: 9.43, indirect: 6.74 },
            "The overall impact of the age_distribution on the gender_ratio is 16.17. This comprises a direct effect of 9.43 from the age_distribution to the gender_ratio, and an indirect effect of 6.74, mediated by the migration_speed.",
        ),
        (
            CausalQuery::opo("d.csv", "professional_athlete_salaries", "y", vec![ConditionClause::new("x", 1.0)]),
            ToolResult::Action { level: Scalar::Text("C".into()) },
            "The best action of the professional_athlete_salaries is professional_athlete_salaries = C.",
        ),
    ];
    let exact = examples.iter().filter(|(q, r, want)| template_summary(q.task, r, q).ok().as_deref() == Some(*want)).count();

    let h = TopicHierarchy::shipped();
    let recs = generate_retrieval_bench(200, &h, derive_seed(ROOT, 9));
    let mut flagged = 0;
    for (i, r) in recs.iter().enumerate() {
        let result = random_tool_result(&r.golden, &h, &mut from_seed(derive_seed(ROOT, 900 + i as u64)));
        let method = MethodId::for_task(r.golden.task);
        let text = narrate(&r.question, &r.golden, &result, &method, &Backend::Template).unwrap().text;
        let report = lint(&text, &LintContext { question: &r.question, query: &r.golden, method: &method, result: &result });
        flagged += usize::from(!report.is_empty());
    }
    Outcome {
        pass: exact == 5 && flagged == 0 && recs.len() == 1000,
        detail: format!("{exact}/5 examples byte-exact; {flagged}/{} template narrations flagged by lint", recs.len()),
    }
}

fn c10_determinism(first: &Path, second: &Path) -> Outcome {
    let cfg = RunConfig { out: second.to_path_buf(), ..RunConfig::default() };
    cmd_bench(&cfg, &mut std::io::sink()).unwrap();
    cmd_eval(&second.join(BENCH_FILE), &cfg, &mut std::io::sink()).unwrap();
    let same: Vec<&str> = [BENCH_FILE, INTERPRET_BENCH_FILE, REPORT_JSON, REPORT_TXT]
        .into_iter()
        .filter(|f| std::fs::read(first.join(f)).unwrap() == std::fs::read(second.join(f)).unwrap())
        .collect();
    Outcome { pass: same.len() == 4, detail: format!("{}/4 files byte-identical across runs", same.len()) }
}

fn main() {
    let run1 = tempfile::tempdir().unwrap();
    let run2 = tempfile::tempdir().unwrap();
    let secs = Duration::from_secs;
    let results = [
        check("1", "parser exactness on reference questions", Some(secs(1)), c1_parser_examples),
        check("2", "round-trip bench key accuracy", Some(secs(30)), c2_round_trip),
        check("3", "ATE oracle", Some(secs(120)), c3_ate),
        check("4", "HTE oracle", None, c4_hte),
        check("5", "mediation oracle", None, c5_mediation),
        check("6", "CGL recovery and collider orientation", None, c6_cgl),
        check("7", "OPO oracle", None, c7_policy),
        check("8", "end-to-end rates", Some(secs(300)), || c8_end_to_end(run1.path())),
        check("9", "narrator fidelity and lint", None, c9_narrator),
        check("10", "determinism of bench and eval", None, || c10_determinism(run1.path(), run2.path())),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
