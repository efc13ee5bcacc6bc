//! Q-learning policy optimization, single- or multi-stage.
//!
//! Multi-stage tables use the columns `s{t}_{j}`, `{A}{t}`, `{Y}{t}` for
//! stage `t = 1..T`; a table containing the treatment column itself is
//! treated as single-stage.

use regex::Regex;

use super::effects::{covariate_names, level_codes, pinned_point, sorted_levels};
use super::linalg::{mean, ols_with_fallback, OlsFit};
use super::EngineError;
use crate::dataset::TabularDataset;
use crate::schema::{ConditionClause, Scalar};

pub const MAX_LEVELS: usize = 10;
/// Relative gap below which two Q-values count as tied.
pub const TIE_TOL: f64 = 1e-9;

/// Linear Q-model: per-level indicators (first level is the baseline) and
/// level × covariate interactions.
#[derive(Debug, Clone)]
pub struct QModel {
    pub levels: Vec<Scalar>,
    fit: OlsFit,
    n_cov: usize,
}

fn design(codes: &[usize], s: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let mut x = Vec::with_capacity((k - 1) * (s.len() + 1) + s.len());
    x.extend(s.iter().cloned());
    for l in 1..k {
        let ind: Vec<f64> = codes.iter().map(|&c| f64::from(u8::from(c == l))).collect();
        x.extend(s.iter().map(|c| c.iter().zip(&ind).map(|(v, i)| v * i).collect()));
        x.push(ind);
    }
    x
}

impl QModel {
    pub fn fit(levels: Vec<Scalar>, codes: &[usize], s: &[Vec<f64>], y: &[f64]) -> Result<Self, EngineError> {
        let k = levels.len();
        let x = design(codes, s, k);
        let fit = ols_with_fallback(&x, y).map_err(|e| EngineError::EstimationFailed(e.to_string()))?;
        Ok(Self { levels, fit, n_cov: s.len() })
    }

    pub fn q(&self, state: &[f64], level: usize) -> f64 {
        let j = self.n_cov;
        let b = &self.fit.coefficients;
        let mut v = self.fit.intercept + state.iter().zip(&b[..j]).map(|(x, c)| x * c).sum::<f64>();
        if level > 0 {
            let off = j + (level - 1) * (j + 1);
            v += state.iter().zip(&b[off..off + j]).map(|(x, c)| x * c).sum::<f64>() + b[off + j];
        }
        v
    }

    /// Index of the best level; near-ties go to the smallest level.
    pub fn best(&self, state: &[f64]) -> usize {
        let q: Vec<f64> = (0..self.levels.len()).map(|l| self.q(state, l)).collect();
        let top = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = TIE_TOL * top.abs().max(1.0);
        q.iter().position(|v| top - v <= tol).expect("non-empty")
    }

    pub fn max_q(&self, state: &[f64]) -> f64 {
        self.q(state, self.best(state))
    }
}

fn levels_of(d: &TabularDataset, name: &str) -> Result<(Vec<Scalar>, Vec<usize>), EngineError> {
    let col = d.column(name)?;
    let levels = sorted_levels(col);
    if levels.len() > MAX_LEVELS {
        return Err(EngineError::TooManyLevels { column: name.to_string(), levels: levels.len() });
    }
    if levels.len() < 2 {
        return Err(EngineError::EstimationFailed(format!("`{name}` takes a single value")));
    }
    let codes = level_codes(col, &levels);
    Ok((levels, codes))
}

fn numeric_cols(d: &TabularDataset, names: &[String]) -> Result<Vec<Vec<f64>>, EngineError> {
    names.iter().map(|n| Ok(d.numeric(n)?.to_vec())).collect()
}

fn row(cols: &[Vec<f64>], i: usize) -> Vec<f64> {
    cols.iter().map(|c| c[i]).collect()
}

/// Stage layout of a multi-stage table.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSchema {
    pub states: Vec<Vec<String>>,
    pub actions: Vec<String>,
    pub rewards: Vec<String>,
}

impl StageSchema {
    pub fn detect(d: &TabularDataset, treatment: &str, response: &str) -> Result<Self, EngineError> {
        let mut stages = 0;
        while d.index_of(&format!("{treatment}{}", stages + 1)).is_some() {
            stages += 1;
        }
        if stages == 0 {
            return Err(EngineError::ColumnNotFound(treatment.to_string()));
        }
        let mut out = StageSchema { states: Vec::new(), actions: Vec::new(), rewards: Vec::new() };
        for t in 1..=stages {
            let reward = format!("{response}{t}");
            if d.index_of(&reward).is_none() {
                return Err(EngineError::MalformedStageSchema(format!("missing reward column `{reward}`")));
            }
            let re = Regex::new(&format!(r"^s{t}_\d+$")).expect("stage pattern");
            let states: Vec<String> = d.names().iter().filter(|n| re.is_match(n)).cloned().collect();
            if states.is_empty() {
                return Err(EngineError::MalformedStageSchema(format!("no state columns s{t}_<j>")));
            }
            if let Some(first) = out.states.first() {
                if first.len() != states.len() {
                    return Err(EngineError::MalformedStageSchema(format!(
                        "stage {t} has {} states, stage 1 has {}",
                        states.len(),
                        first.len()
                    )));
                }
            }
            out.states.push(states);
            out.actions.push(format!("{treatment}{t}"));
            out.rewards.push(reward);
        }
        Ok(out)
    }
}

/// Recommended treatment level at the query point (conditions pinned, other
/// first-stage covariates at their sample means).
pub fn optimize_policy(d: &TabularDataset, treatment: &str, response: &str, conditions: &[ConditionClause]) -> Result<Scalar, EngineError> {
    if d.index_of(treatment).is_some() {
        let (levels, codes) = levels_of(d, treatment)?;
        let names = covariate_names(d, &[treatment, response]);
        let s = numeric_cols(d, &names)?;
        let model = QModel::fit(levels, &codes, &s, d.numeric(response)?)?;
        let means: Vec<f64> = s.iter().map(|c| mean(c)).collect();
        let point = pinned_point(&names, &means, conditions)?;
        return Ok(model.levels[model.best(&point)].clone());
    }

    let schema = StageSchema::detect(d, treatment, response)?;
    let stages = schema.actions.len();
    let mut pseudo: Option<Vec<f64>> = None;
    let mut first: Option<(QModel, Vec<Vec<f64>>)> = None;
    for t in (0..stages).rev() {
        let (levels, codes) = levels_of(d, &schema.actions[t])?;
        let s = numeric_cols(d, &schema.states[t])?;
        let mut y = d.numeric(&schema.rewards[t])?.to_vec();
        if let Some(p) = &pseudo {
            y.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        }
        let model = QModel::fit(levels, &codes, &s, &y)?;
        if t > 0 {
            pseudo = Some((0..y.len()).map(|i| model.max_q(&row(&s, i))).collect());
        } else {
            first = Some((model, s));
        }
    }
    let (model, s) = first.expect("at least one stage");
    let means: Vec<f64> = s.iter().map(|c| mean(c)).collect();
    let point = pinned_point(&schema.states[0], &means, conditions)?;
    Ok(model.levels[model.best(&point)].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(names: &[&str], cols: Vec<Vec<f64>>) -> TabularDataset {
        TabularDataset::from_numeric(names.iter().map(|s| s.to_string()).collect(), cols).unwrap()
    }

    #[test]
    fn identical_arms_tie_to_smallest_level() {
        let a: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
        let s: Vec<f64> = (0..20).map(|i| (i / 2) as f64).collect();
        let y = s.clone();
        let d = table(&["s", "a", "y"], vec![s, a, y]);
        assert_eq!(optimize_policy(&d, "a", "y", &[]).unwrap(), Scalar::Num(0.0));
    }

    #[test]
    fn too_many_levels() {
        let a: Vec<f64> = (0..30).map(|i| (i % 11) as f64).collect();
        let y: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let d = table(&["a", "y"], vec![a, y]);
        assert!(matches!(optimize_policy(&d, "a", "y", &[]), Err(EngineError::TooManyLevels { levels: 11, .. })));
    }

    #[test]
    fn malformed_stage_schema() {
        let d = table(&["s1_1", "a1", "y1", "a2"], vec![vec![1.0, 2.0, 3.0]; 4]);
        assert!(matches!(optimize_policy(&d, "a", "y", &[]), Err(EngineError::MalformedStageSchema(_))));
    }
}
