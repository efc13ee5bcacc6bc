//! Synthetic tables with analytic golden labels for the five tasks.
//!
//! Coefficients are drawn as ±U[0.5, 2], means U(−2, 2), standard
//! deviations U(0.5, 1.5). Graph data follow a linear SEM generated in
//! topological order with unit-variance Gaussian noise.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::TabularDataset;
use crate::result::Graph;
use crate::rng::Rng;
use crate::schema::{CausalQuery, ConditionClause, Nodes, Scalar, Task};

pub const DEFAULT_P_MASK: f64 = 0.5;
pub const SEM_NOISE_SD: f64 = 1.0;
/// Row-sum bound applied to transition matrices; bounds the spectral radius.
pub const TRANSITION_NORM: f64 = 0.9;
/// Chance that a sampled mediation design has a negligible mediator path.
pub const NEGLIGIBLE_MEDIATION_P: f64 = 0.2;

#[derive(Debug, Error, PartialEq)]
pub enum DataGenError {
    #[error("bad dimensions: {0}")]
    BadDims(String),
    #[error("unknown condition variable `{0}`")]
    UnknownConditionVariable(String),
    #[error("condition value for `{0}` is not numeric")]
    NonNumericCondition(String),
}

fn coefficient(rng: &mut Rng) -> f64 {
    let m = rng.random_range(0.5..=2.0);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

fn gaussian(rng: &mut Rng, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("positive sd").sample(rng)
}

fn bernoulli(rng: &mut Rng) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemParams {
    /// Strictly upper-triangular weights; `b[i][j]` is the effect of node i on node j.
    pub b: Vec<Vec<f64>>,
    pub p_mask: f64,
    pub noise_sd: Vec<f64>,
    pub n: usize,
}

impl SemParams {
    pub fn sample(j: usize, n: usize, p_mask: f64, rng: &mut Rng) -> Result<Self, DataGenError> {
        if j < 2 {
            return Err(DataGenError::BadDims(format!("graph needs at least 2 nodes, got {j}")));
        }
        if n < 1 {
            return Err(DataGenError::BadDims("n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&p_mask) {
            return Err(DataGenError::BadDims(format!("p_mask {p_mask} outside [0, 1]")));
        }
        let mut b = vec![vec![0.0; j]; j];
        for (r, row) in b.iter_mut().enumerate() {
            for w in row.iter_mut().skip(r + 1) {
                let c = coefficient(rng);
                if !rng.random_bool(p_mask) {
                    *w = c;
                }
            }
        }
        Ok(Self { b, p_mask, noise_sd: vec![SEM_NOISE_SD; j], n })
    }

    pub fn j(&self) -> usize {
        self.b.len()
    }

    /// Nonzero pattern of `b` as a directed graph.
    pub fn truth(&self, names: &[String]) -> Graph {
        let mut g = Graph::empty(names.to_vec());
        for (i, row) in self.b.iter().enumerate() {
            for (k, w) in row.iter().enumerate() {
                if *w != 0.0 {
                    g.adjacency[i][k] = 1;
                }
            }
        }
        g
    }
}

pub fn default_node_names(j: usize) -> Vec<String> {
    (1..=j).map(|i| format!("x{i}")).collect()
}

pub fn simulate_sem(p: &SemParams, names: &[String], rng: &mut Rng) -> Result<TabularDataset, DataGenError> {
    let j = p.j();
    if names.len() != j {
        return Err(DataGenError::BadDims(format!("{} names for {j} nodes", names.len())));
    }
    let mut cols = vec![Vec::with_capacity(p.n); j];
    for _ in 0..p.n {
        let mut x = vec![0.0; j];
        for k in 0..j {
            let parents: f64 = (0..k).map(|i| p.b[i][k] * x[i]).sum();
            x[k] = parents + gaussian(rng, 0.0, p.noise_sd[k]);
        }
        for (c, v) in cols.iter_mut().zip(x) {
            c.push(v);
        }
    }
    Ok(TabularDataset::from_numeric(names.to_vec(), cols).expect("consistent shape"))
}

pub fn gen_cgl(j: usize, n: usize, p_mask: f64, rng: &mut Rng) -> Result<(TabularDataset, Graph, SemParams), DataGenError> {
    let p = SemParams::sample(j, n, p_mask, rng)?;
    let names = default_node_names(j);
    let d = simulate_sem(&p, &names, rng)?;
    Ok((d, p.truth(&names), p))
}

/// Outcome model `Y = Aβ₁₀ + Σ Sⱼβ₁ⱼ + Σ A·Sⱼβ₂ⱼ + ε`, `ε ~ N(noise_mean, noise_sd²)`,
/// with independent `Sⱼ ~ N(μⱼ, σⱼ²)` and `A ~ Bernoulli(0.5)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectParams {
    pub covariates: Vec<String>,
    pub beta10: f64,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub noise_mean: f64,
    pub noise_sd: f64,
}

pub fn default_covariate_names(j: usize) -> Vec<String> {
    (1..=j).map(|i| format!("s{i}")).collect()
}

impl EffectParams {
    pub fn sample(j: usize, rng: &mut Rng) -> Result<Self, DataGenError> {
        if j < 1 {
            return Err(DataGenError::BadDims("need at least one covariate".into()));
        }
        let beta10 = coefficient(rng);
        let beta1 = (0..j).map(|_| coefficient(rng)).collect();
        let beta2 = (0..j).map(|_| coefficient(rng)).collect();
        let mu = (0..j).map(|_| rng.random_range(-2.0..2.0)).collect();
        let sigma = (0..j).map(|_| rng.random_range(0.5..1.5)).collect();
        let noise_mean = rng.random_range(-2.0..2.0);
        let noise_sd = rng.random_range(0.5..1.5);
        Ok(Self { covariates: default_covariate_names(j), beta10, beta1, beta2, mu, sigma, noise_mean, noise_sd })
    }

    pub fn j(&self) -> usize {
        self.covariates.len()
    }

    pub fn validate(&self) -> Result<(), DataGenError> {
        let j = self.j();
        if [self.beta1.len(), self.beta2.len(), self.mu.len(), self.sigma.len()].iter().any(|&l| l != j) {
            return Err(DataGenError::BadDims("effect parameter lengths disagree".into()));
        }
        if self.sigma.iter().chain([&self.noise_sd]).any(|s| s.is_nan() || *s <= 0.0) {
            return Err(DataGenError::BadDims("standard deviations must be positive".into()));
        }
        Ok(())
    }

    /// `E[Y | A = a, S = s]`.
    pub fn expected_outcome(&self, a: f64, s: &[f64]) -> f64 {
        let lin: f64 = s.iter().zip(&self.beta1).map(|(x, b)| x * b).sum();
        let int: f64 = s.iter().zip(&self.beta2).map(|(x, b)| x * b).sum();
        self.noise_mean + a * self.beta10 + lin + a * int
    }

    /// Covariate point with conditions pinned and the rest at their means.
    pub fn query_point(&self, conditions: &[ConditionClause]) -> Result<Vec<f64>, DataGenError> {
        let mut s = self.mu.clone();
        for c in conditions {
            let k = self
                .covariates
                .iter()
                .position(|n| *n == c.variable)
                .ok_or_else(|| DataGenError::UnknownConditionVariable(c.variable.clone()))?;
            s[k] = c.value.as_f64().ok_or_else(|| DataGenError::NonNumericCondition(c.variable.clone()))?;
        }
        Ok(s)
    }
}

pub fn true_ate(p: &EffectParams) -> f64 {
    p.beta10 + p.beta2.iter().zip(&p.mu).map(|(b, m)| b * m).sum::<f64>()
}

pub fn true_hte(p: &EffectParams, conditions: &[ConditionClause]) -> Result<f64, DataGenError> {
    let s = p.query_point(conditions)?;
    Ok(p.beta10 + p.beta2.iter().zip(&s).map(|(b, x)| b * x).sum::<f64>())
}

fn draw_state(p: &EffectParams, rng: &mut Rng) -> Vec<f64> {
    p.mu.iter().zip(&p.sigma).map(|(m, s)| gaussian(rng, *m, *s)).collect()
}

/// One row per unit: covariates, treatment, response.
pub fn simulate_effect(p: &EffectParams, n: usize, treatment: &str, response: &str, rng: &mut Rng) -> Result<TabularDataset, DataGenError> {
    p.validate()?;
    if n < 2 {
        return Err(DataGenError::BadDims("n must be at least 2".into()));
    }
    let j = p.j();
    let mut cols = vec![Vec::with_capacity(n); j + 2];
    for _ in 0..n {
        let s = draw_state(p, rng);
        let a = bernoulli(rng);
        let y = p.expected_outcome(a, &s) - p.noise_mean + gaussian(rng, p.noise_mean, p.noise_sd);
        for (k, v) in s.into_iter().enumerate() {
            cols[k].push(v);
        }
        cols[j].push(a);
        cols[j + 1].push(y);
    }
    let mut names = p.covariates.clone();
    names.push(treatment.to_string());
    names.push(response.to_string());
    TabularDataset::from_numeric(names, cols).map_err(|e| DataGenError::BadDims(e.to_string()))
}

pub fn gen_effect(j: usize, n: usize, rng: &mut Rng) -> Result<(TabularDataset, EffectParams), DataGenError> {
    let p = EffectParams::sample(j, rng)?;
    let d = simulate_effect(&p, n, "a", "y", rng)?;
    Ok((d, p))
}

/// Multi-stage decision process: rewards follow the effect model at every
/// stage and states move deterministically as `S_{t+1} = B_a S_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpParams {
    pub reward: EffectParams,
    pub b_s0: Vec<Vec<f64>>,
    pub b_s1: Vec<Vec<f64>>,
    pub stages: usize,
}

fn transition_matrix(j: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = (0..j).map(|_| (0..j).map(|_| coefficient(rng)).collect()).collect();
    let norm = m.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    if norm > TRANSITION_NORM {
        let k = TRANSITION_NORM / norm;
        m.iter_mut().flatten().for_each(|v| *v *= k);
    }
    m
}

fn mat_vec(m: &[Vec<f64>], s: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(s).map(|(a, b)| a * b).sum()).collect()
}

impl MdpParams {
    pub fn sample(j: usize, stages: usize, rng: &mut Rng) -> Result<Self, DataGenError> {
        if stages < 1 {
            return Err(DataGenError::BadDims("need at least one stage".into()));
        }
        let mut reward = EffectParams::sample(j, rng)?;
        reward.covariates = state_names(1, j, stages);
        let b_s0 = transition_matrix(j, rng);
        let b_s1 = transition_matrix(j, rng);
        Ok(Self { reward, b_s0, b_s1, stages })
    }

    pub fn transition(&self, a: f64, s: &[f64]) -> Vec<f64> {
        mat_vec(if a == 0.0 { &self.b_s0 } else { &self.b_s1 }, s)
    }

    /// Exact `Q_t(s, a)` for `a ∈ {0, 1}` at 1-based stage `t`.
    pub fn q_values(&self, s: &[f64], t: usize) -> [f64; 2] {
        [0.0, 1.0].map(|a| {
            let r = self.reward.expected_outcome(a, s);
            if t >= self.stages {
                r
            } else {
                let q = self.q_values(&self.transition(a, s), t + 1);
                r + q[0].max(q[1])
            }
        })
    }

    /// Optimal first action by backward induction; ties go to 0.
    pub fn optimal_first_action(&self, s: &[f64]) -> u8 {
        let q = self.q_values(s, 1);
        u8::from(q[1] > q[0])
    }
}

/// Names of the state columns at stage `t` (1-based).
pub fn state_names(t: usize, j: usize, stages: usize) -> Vec<String> {
    if stages == 1 {
        default_covariate_names(j)
    } else {
        (1..=j).map(|k| format!("s{t}_{k}")).collect()
    }
}

/// Action and reward column names at stage `t` for base names `a`, `y`.
pub fn stage_column(base: &str, t: usize, stages: usize) -> String {
    if stages == 1 {
        base.to_string()
    } else {
        format!("{base}{t}")
    }
}

pub fn simulate_mdp(p: &MdpParams, n: usize, treatment: &str, response: &str, rng: &mut Rng) -> Result<TabularDataset, DataGenError> {
    p.reward.validate()?;
    if n < 2 {
        return Err(DataGenError::BadDims("n must be at least 2".into()));
    }
    let j = p.reward.j();
    let per = j + 2;
    let mut cols = vec![Vec::with_capacity(n); per * p.stages];
    let mut names = Vec::with_capacity(cols.len());
    for t in 1..=p.stages {
        names.extend(state_names(t, j, p.stages));
        names.push(stage_column(treatment, t, p.stages));
        names.push(stage_column(response, t, p.stages));
    }
    for _ in 0..n {
        let mut s = draw_state(&p.reward, rng);
        for t in 0..p.stages {
            let a = bernoulli(rng);
            let y = p.reward.expected_outcome(a, &s) - p.reward.noise_mean + gaussian(rng, p.reward.noise_mean, p.reward.noise_sd);
            for (k, v) in s.iter().enumerate() {
                cols[t * per + k].push(*v);
            }
            cols[t * per + j].push(a);
            cols[t * per + j + 1].push(y);
            s = p.transition(a, &s);
        }
    }
    TabularDataset::from_numeric(names, cols).map_err(|e| DataGenError::BadDims(e.to_string()))
}

pub fn gen_opo(j: usize, n: usize, stages: usize, rng: &mut Rng) -> Result<(TabularDataset, MdpParams), DataGenError> {
    let p = MdpParams::sample(j, stages, rng)?;
    let d = simulate_mdp(&p, n, "a", "y", rng)?;
    Ok((d, p))
}

/// `M = Aβ_m + ε_m`, `Y = Aβ₁ + Mβ₂ + ε_y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediationParams {
    pub beta1: f64,
    pub beta2: f64,
    pub beta_m: f64,
    pub mu_y: f64,
    pub sigma_y: f64,
    pub mu_m: f64,
    pub sigma_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediationTruth {
    pub direct: f64,
    pub indirect: f64,
    pub total: f64,
}

impl MediationParams {
    pub fn sample(rng: &mut Rng) -> Self {
        let beta1 = coefficient(rng);
        let beta2 = coefficient(rng);
        let beta_m = if rng.random_bool(NEGLIGIBLE_MEDIATION_P) { rng.random_range(-0.05..0.05) } else { coefficient(rng) };
        Self {
            beta1,
            beta2,
            beta_m,
            mu_y: rng.random_range(-2.0..2.0),
            sigma_y: rng.random_range(0.5..1.5),
            mu_m: rng.random_range(-2.0..2.0),
            sigma_m: rng.random_range(0.5..1.5),
        }
    }

    pub fn truth(&self) -> MediationTruth {
        let indirect = self.beta_m * self.beta2;
        MediationTruth { direct: self.beta1, indirect, total: self.beta1 + indirect }
    }
}

/// Columns: treatment, mediator, response.
pub fn simulate_mediation(p: &MediationParams, n: usize, names: [&str; 3], rng: &mut Rng) -> Result<TabularDataset, DataGenError> {
    if n < 3 {
        return Err(DataGenError::BadDims("n must be at least 3".into()));
    }
    if !(p.sigma_y > 0.0 && p.sigma_m > 0.0) {
        return Err(DataGenError::BadDims("standard deviations must be positive".into()));
    }
    let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let a = bernoulli(rng);
        let m = a * p.beta_m + gaussian(rng, p.mu_m, p.sigma_m);
        let y = a * p.beta1 + m * p.beta2 + gaussian(rng, p.mu_y, p.sigma_y);
        cols[0].push(a);
        cols[1].push(m);
        cols[2].push(y);
    }
    TabularDataset::from_numeric(names.iter().map(|s| s.to_string()).collect(), cols).map_err(|e| DataGenError::BadDims(e.to_string()))
}

pub fn gen_mediation(n: usize, rng: &mut Rng) -> Result<(TabularDataset, MediationParams, MediationTruth), DataGenError> {
    let p = MediationParams::sample(rng);
    let d = simulate_mediation(&p, n, ["a", "m", "y"], rng)?;
    let t = p.truth();
    Ok((d, p, t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoldenLabel {
    Graph(Graph),
    Ate { value: f64 },
    Hte { value: f64, conditions: Vec<ConditionClause> },
    Mediation(MediationTruth),
    Policy { action: u8, state: Vec<f64>, conditions: Vec<ConditionClause> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenParams {
    Sem(SemParams),
    Effect(EffectParams),
    Mdp(MdpParams),
    Mediation(MediationParams),
}

/// Knobs for [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub j: usize,
    pub n: usize,
    pub p_mask: f64,
    pub stages: usize,
    /// Overrides the sampled β_m of mediation data.
    pub beta_m: Option<f64>,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self { j: 3, n: 10_000, p_mask: DEFAULT_P_MASK, stages: 1, beta_m: None }
    }
}

/// A generated table with its truth and parameters; the JSON sidecar is
/// `{task, seed, truth, params}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub task: Task,
    pub seed: u64,
    pub dataset: TabularDataset,
    pub truth: GoldenLabel,
    pub params: GenParams,
}

impl Generated {
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "task": self.task,
            "seed": self.seed,
            "truth": self.truth,
            "params": self.params,
        })
    }
}

/// One condition on a covariate, at a value drawn from its distribution and
/// rounded to two decimals.
fn sample_condition(p: &EffectParams, rng: &mut Rng) -> ConditionClause {
    let k = rng.random_range(0..p.j());
    let v = gaussian(rng, p.mu[k], p.sigma[k]);
    ConditionClause::new(p.covariates[k].clone(), Scalar::Num((v * 100.0).round() / 100.0))
}

/// Generates data and truth for `task` from `seed`.
pub fn generate(task: Task, spec: &GenSpec, seed: u64) -> Result<Generated, DataGenError> {
    let mut rng = crate::rng::from_seed(seed);
    let rng = &mut rng;
    let (dataset, truth, params) = match task {
        Task::Cgl => {
            let (d, g, p) = gen_cgl(spec.j, spec.n, spec.p_mask, rng)?;
            (d, GoldenLabel::Graph(g), GenParams::Sem(p))
        }
        Task::Ate => {
            let (d, p) = gen_effect(spec.j, spec.n, rng)?;
            (d, GoldenLabel::Ate { value: true_ate(&p) }, GenParams::Effect(p))
        }
        Task::Hte => {
            let p = EffectParams::sample(spec.j, rng)?;
            let c = sample_condition(&p, rng);
            let d = simulate_effect(&p, spec.n, "a", "y", rng)?;
            let value = true_hte(&p, std::slice::from_ref(&c))?;
            (d, GoldenLabel::Hte { value, conditions: vec![c] }, GenParams::Effect(p))
        }
        Task::Ma => {
            let mut p = MediationParams::sample(rng);
            if let Some(b) = spec.beta_m {
                p.beta_m = b;
            }
            let d = simulate_mediation(&p, spec.n, ["a", "m", "y"], rng)?;
            (d, GoldenLabel::Mediation(p.truth()), GenParams::Mediation(p))
        }
        Task::Opo => {
            let p = MdpParams::sample(spec.j, spec.stages, rng)?;
            let c = sample_condition(&p.reward, rng);
            let d = simulate_mdp(&p, spec.n, "a", "y", rng)?;
            let state = p.reward.query_point(std::slice::from_ref(&c))?;
            let action = p.optimal_first_action(&state);
            (d, GoldenLabel::Policy { action, state, conditions: vec![c] }, GenParams::Mdp(p))
        }
    };
    Ok(Generated { task, seed, dataset, truth, params })
}

/// Data for a concrete query: columns carry the query's variable names and
/// the truth is evaluated at the query's own conditions. `pool` lists the
/// dataset's variables; effect and policy tables use every pool variable
/// outside the treatment and response as a covariate, graph tables use the
/// query's nodes (or the whole pool for `all_variables`).
pub fn generate_for_query(q: &CausalQuery, pool: &[String], spec: &GenSpec, seed: u64) -> Result<Generated, DataGenError> {
    let mut rng = crate::rng::from_seed(seed);
    let rng = &mut rng;
    let slot = |v: &Option<String>| v.clone().ok_or_else(|| DataGenError::BadDims(format!("{} query lacks a role", q.task)));
    let covariates = |t: &str, y: &str| -> Vec<String> {
        let mut c: Vec<String> = pool.iter().filter(|n| *n != t && *n != y).cloned().collect();
        for cond in &q.conditions {
            if !c.contains(&cond.variable) {
                c.push(cond.variable.clone());
            }
        }
        if c.is_empty() {
            c = default_covariate_names(spec.j);
        }
        c
    };
    let (dataset, truth, params) = match q.task {
        Task::Cgl => {
            let names: Vec<String> = match &q.nodes {
                Some(Nodes::Named(v)) => v.clone(),
                _ => pool.to_vec(),
            };
            let p = SemParams::sample(names.len(), spec.n, spec.p_mask, rng)?;
            let d = simulate_sem(&p, &names, rng)?;
            (d, GoldenLabel::Graph(p.truth(&names)), GenParams::Sem(p))
        }
        Task::Ate | Task::Hte => {
            let (t, y) = (slot(&q.treatment)?, slot(&q.response)?);
            let mut p = EffectParams::sample(covariates(&t, &y).len(), rng)?;
            p.covariates = covariates(&t, &y);
            let d = simulate_effect(&p, spec.n, &t, &y, rng)?;
            let truth = if q.task == Task::Ate {
                GoldenLabel::Ate { value: true_ate(&p) }
            } else {
                GoldenLabel::Hte { value: true_hte(&p, &q.conditions)?, conditions: q.conditions.clone() }
            };
            (d, truth, GenParams::Effect(p))
        }
        Task::Ma => {
            let (t, y, m) = (slot(&q.treatment)?, slot(&q.response)?, slot(&q.mediator)?);
            let mut p = MediationParams::sample(rng);
            if let Some(b) = spec.beta_m {
                p.beta_m = b;
            }
            let d = simulate_mediation(&p, spec.n, [&t, &m, &y], rng)?;
            (d, GoldenLabel::Mediation(p.truth()), GenParams::Mediation(p))
        }
        Task::Opo => {
            let (t, y) = (slot(&q.treatment)?, slot(&q.response)?);
            let names = covariates(&t, &y);
            let mut p = MdpParams::sample(names.len(), 1, rng)?;
            let generic = std::mem::replace(&mut p.reward.covariates, names.clone());
            let mut d = simulate_mdp(&p, spec.n, &t, &y, rng)?;
            for (from, to) in generic.iter().zip(&names) {
                d.rename(from, to).map_err(|e| DataGenError::BadDims(e.to_string()))?;
            }
            let state = p.reward.query_point(&q.conditions)?;
            let action = p.optimal_first_action(&state);
            (d, GoldenLabel::Policy { action, state, conditions: q.conditions.clone() }, GenParams::Mdp(p))
        }
    };
    Ok(Generated { task: q.task, seed, dataset, truth, params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;

    #[test]
    fn sem_weights_are_upper_triangular_and_bounded() {
        let p = SemParams::sample(6, 10, 0.3, &mut from_seed(1)).unwrap();
        for i in 0..6 {
            for k in 0..6 {
                let w = p.b[i][k];
                if k <= i {
                    assert_eq!(w, 0.0);
                } else if w != 0.0 {
                    assert!((0.5..=2.0).contains(&w.abs()));
                }
            }
        }
    }

    #[test]
    fn full_mask_gives_empty_graph() {
        let (_, g, p) = gen_cgl(4, 50, 1.0, &mut from_seed(2)).unwrap();
        assert!(g.skeleton().is_empty());
        assert!(p.b.iter().flatten().all(|w| *w == 0.0));
    }

    #[test]
    fn bad_dims() {
        assert!(matches!(gen_cgl(1, 10, 0.5, &mut from_seed(0)), Err(DataGenError::BadDims(_))));
        assert!(matches!(gen_effect(0, 10, &mut from_seed(0)), Err(DataGenError::BadDims(_))));
        assert!(matches!(gen_opo(2, 10, 0, &mut from_seed(0)), Err(DataGenError::BadDims(_))));
        assert!(matches!(gen_mediation(2, &mut from_seed(0)), Err(DataGenError::BadDims(_))));
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate(Task::Hte, &GenSpec { n: 200, ..GenSpec::default() }, 9).unwrap();
        let b = generate(Task::Hte, &GenSpec { n: 200, ..GenSpec::default() }, 9).unwrap();
        assert_eq!(a.dataset.to_csv_string(), b.dataset.to_csv_string());
        assert_eq!(a.sidecar(), b.sidecar());
        let c = generate(Task::Hte, &GenSpec { n: 200, ..GenSpec::default() }, 10).unwrap();
        assert_ne!(a.dataset.to_csv_string(), c.dataset.to_csv_string());
    }

    #[test]
    fn ate_and_hte_formulas() {
        let mut p = EffectParams::sample(1, &mut from_seed(3)).unwrap();
        p.beta10 = 2.0;
        p.beta2 = vec![0.5];
        p.mu = vec![1.0];
        assert!((true_ate(&p) - 2.5).abs() < 1e-12);
        let c = [ConditionClause::new("s1", 3.0)];
        assert!((true_hte(&p, &c).unwrap() - 3.5).abs() < 1e-12);
        let at_mean = [ConditionClause::new("s1", 1.0)];
        assert_eq!(true_hte(&p, &at_mean).unwrap(), true_ate(&p));
        assert_eq!(true_hte(&p, &[ConditionClause::new("zz", 1.0)]), Err(DataGenError::UnknownConditionVariable("zz".into())));
        p.beta2 = vec![0.0];
        assert_eq!(true_hte(&p, &c).unwrap(), p.beta10);
    }

    #[test]
    fn opo_schemas() {
        let (d1, _) = gen_opo(3, 20, 1, &mut from_seed(4)).unwrap();
        let (de, _) = gen_effect(3, 20, &mut from_seed(4)).unwrap();
        assert_eq!(d1.names(), de.names());
        let (d2, _) = gen_opo(2, 20, 2, &mut from_seed(4)).unwrap();
        assert_eq!(d2.names(), ["s1_1", "s1_2", "a1", "y1", "s2_1", "s2_2", "a2", "y2"]);
    }

    #[test]
    fn transitions_have_bounded_row_sums() {
        let p = MdpParams::sample(5, 3, &mut from_seed(5)).unwrap();
        for m in [&p.b_s0, &p.b_s1] {
            for r in m {
                assert!(r.iter().map(|v| v.abs()).sum::<f64>() <= TRANSITION_NORM + 1e-12);
            }
        }
    }

    #[test]
    fn mediation_truth_is_additive() {
        for seed in 0..50 {
            let (_, p, t) = gen_mediation(3, &mut from_seed(seed)).unwrap();
            assert_eq!(t.total - (t.direct + t.indirect), 0.0);
            assert_eq!(t.direct, p.beta1);
        }
        let p = MediationParams { beta1: 1.0, beta2: 2.0, beta_m: 3.0, mu_y: 0.0, sigma_y: 1.0, mu_m: 0.0, sigma_m: 1.0 };
        assert_eq!(p.truth(), MediationTruth { direct: 1.0, indirect: 6.0, total: 7.0 });
        let z = MediationParams { beta_m: 0.0, ..p };
        assert_eq!(z.truth().indirect, 0.0);
        assert_eq!(z.truth().total, z.truth().direct);
    }
}
