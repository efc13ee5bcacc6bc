//! Effect estimators: doubly robust ATE, S-learner HTE, product-of-coefficients
//! mediation.

use super::linalg::{logistic, mean, ols_with_fallback, LinalgError};
use super::EngineError;
use crate::dataset::{Column, TabularDataset};
use crate::schema::{ConditionClause, Scalar};

/// Treatment coded 0/1 by sorted distinct level, with the two levels.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTreatment {
    pub coded: Vec<f64>,
    pub levels: [Scalar; 2],
}

/// Distinct levels of a column in ascending order (numeric or lexical).
pub fn sorted_levels(col: &Column) -> Vec<Scalar> {
    match col {
        Column::Numeric(v) => {
            let mut u = v.clone();
            u.sort_by(f64::total_cmp);
            u.dedup();
            u.into_iter().map(Scalar::Num).collect()
        }
        Column::Text(v) => {
            let mut u = v.clone();
            u.sort();
            u.dedup();
            u.into_iter().map(Scalar::Text).collect()
        }
    }
}

fn level_index(col: &Column, row: usize, levels: &[Scalar]) -> usize {
    let cell = match col {
        Column::Numeric(v) => Scalar::Num(v[row]),
        Column::Text(v) => Scalar::Text(v[row].clone()),
    };
    levels.iter().position(|l| *l == cell).expect("level present")
}

/// Row-wise level index of every cell in `col`.
pub fn level_codes(col: &Column, levels: &[Scalar]) -> Vec<usize> {
    (0..col.len()).map(|r| level_index(col, r, levels)).collect()
}

pub fn binary_treatment(d: &TabularDataset, name: &str) -> Result<BinaryTreatment, EngineError> {
    let col = d.column(name)?;
    let levels = sorted_levels(col);
    if levels.len() != 2 {
        return Err(EngineError::NonBinaryTreatment { column: name.to_string(), levels: levels.len() });
    }
    let coded = level_codes(col, &levels).into_iter().map(|i| i as f64).collect();
    let [a, b]: [Scalar; 2] = levels.try_into().expect("two levels");
    Ok(BinaryTreatment { coded, levels: [a, b] })
}

/// Numeric columns other than `exclude`, in table order. Text columns are
/// not used as covariates.
pub fn covariate_names(d: &TabularDataset, exclude: &[&str]) -> Vec<String> {
    d.names().iter().filter(|n| !exclude.contains(&n.as_str())).filter(|n| d.numeric(n).is_ok()).cloned().collect()
}

fn columns(d: &TabularDataset, names: &[String]) -> Result<Vec<Vec<f64>>, EngineError> {
    names.iter().map(|n| Ok(d.numeric(n)?.to_vec())).collect()
}

fn rows_where(cols: &[Vec<f64>], keep: &[bool]) -> Vec<Vec<f64>> {
    cols.iter().map(|c| c.iter().zip(keep).filter(|(_, k)| **k).map(|(v, _)| *v).collect()).collect()
}

fn fit_err(e: LinalgError) -> EngineError {
    EngineError::EstimationFailed(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Augmented inverse-propensity-weighted ATE with per-arm OLS outcome models
/// and a logistic propensity, clipped to [0.01, 0.99].
pub fn estimate_ate(d: &TabularDataset, treatment: &str, response: &str) -> Result<Estimate, EngineError> {
    let a = binary_treatment(d, treatment)?.coded;
    let y = d.numeric(response)?;
    let names = covariate_names(d, &[treatment, response]);
    let s = columns(d, &names)?;
    let n = y.len();

    let treated: Vec<bool> = a.iter().map(|v| *v == 1.0).collect();
    let control: Vec<bool> = treated.iter().map(|t| !t).collect();
    let ysub = |keep: &[bool]| -> Vec<f64> { y.iter().zip(keep).filter(|(_, k)| **k).map(|(v, _)| *v).collect() };
    let mu1 = ols_with_fallback(&rows_where(&s, &treated), &ysub(&treated)).map_err(fit_err)?;
    let mu0 = ols_with_fallback(&rows_where(&s, &control), &ysub(&control)).map_err(fit_err)?;
    let ps = logistic(&s, &a).map_err(fit_err)?;

    let psi: Vec<f64> = (0..n)
        .map(|i| {
            let row: Vec<f64> = s.iter().map(|c| c[i]).collect();
            let (m1, m0, e) = (mu1.predict(&row), mu0.predict(&row), ps.propensity(&row));
            m1 - m0 + a[i] * (y[i] - m1) / e - (1.0 - a[i]) * (y[i] - m0) / (1.0 - e)
        })
        .collect();
    let value = mean(&psi);
    let var = psi.iter().map(|p| (p - value).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    Ok(Estimate { value, std_error: (var / n as f64).sqrt() })
}

/// Fitted S-learner `Y ~ A + S + A×S`.
#[derive(Debug, Clone)]
pub struct SLearner {
    pub covariates: Vec<String>,
    pub means: Vec<f64>,
    /// Coefficient of A, then of each A×Sⱼ.
    pub treatment_coef: f64,
    pub interaction_coefs: Vec<f64>,
}

impl SLearner {
    pub fn fit(d: &TabularDataset, treatment: &str, response: &str) -> Result<Self, EngineError> {
        let a = binary_treatment(d, treatment)?.coded;
        let y = d.numeric(response)?;
        let covariates = covariate_names(d, &[treatment, response]);
        let s = columns(d, &covariates)?;
        let mut x = Vec::with_capacity(1 + 2 * s.len());
        x.push(a.clone());
        x.extend(s.iter().cloned());
        x.extend(s.iter().map(|c| c.iter().zip(&a).map(|(v, t)| v * t).collect()));
        let fit = ols_with_fallback(&x, y).map_err(fit_err)?;
        let j = s.len();
        Ok(Self {
            means: s.iter().map(|c| mean(c)).collect(),
            covariates,
            treatment_coef: fit.coefficients[0],
            interaction_coefs: fit.coefficients[1 + j..].to_vec(),
        })
    }

    /// Predicted `Y(1) − Y(0)` at a covariate point.
    pub fn effect_at(&self, s: &[f64]) -> f64 {
        self.treatment_coef + self.interaction_coefs.iter().zip(s).map(|(b, v)| b * v).sum::<f64>()
    }

    /// Query point: conditions pinned, the rest at sample means.
    pub fn query_point(&self, conditions: &[ConditionClause]) -> Result<Vec<f64>, EngineError> {
        pinned_point(&self.covariates, &self.means, conditions)
    }

    /// Mean fitted effect over the sample.
    pub fn implied_ate(&self) -> f64 {
        self.effect_at(&self.means)
    }
}

pub(crate) fn pinned_point(names: &[String], means: &[f64], conditions: &[ConditionClause]) -> Result<Vec<f64>, EngineError> {
    let mut s = means.to_vec();
    for c in conditions {
        let k = names.iter().position(|n| *n == c.variable).ok_or_else(|| EngineError::UnknownConditionVariable(c.variable.clone()))?;
        s[k] = c
            .value
            .as_f64()
            .ok_or_else(|| EngineError::EstimationFailed(format!("condition value for `{}` is not numeric", c.variable)))?;
    }
    Ok(s)
}

pub fn estimate_hte(d: &TabularDataset, treatment: &str, response: &str, conditions: &[ConditionClause]) -> Result<f64, EngineError> {
    for c in conditions {
        if d.index_of(&c.variable).is_none() || c.variable == treatment || c.variable == response {
            return Err(EngineError::UnknownConditionVariable(c.variable.clone()));
        }
    }
    let model = SLearner::fit(d, treatment, response)?;
    Ok(model.effect_at(&model.query_point(conditions)?))
}

/// Direct, indirect and total effect; `total = direct + indirect` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediationEstimate {
    pub direct: f64,
    pub indirect: f64,
    pub total: f64,
    pub direct_se: f64,
    pub beta_m: f64,
    pub beta_m_se: f64,
    pub beta2: f64,
    pub beta2_se: f64,
}

pub fn estimate_mediation(d: &TabularDataset, treatment: &str, response: &str, mediator: &str) -> Result<MediationEstimate, EngineError> {
    let a = binary_treatment(d, treatment)?.coded;
    let m = d.numeric(mediator)?;
    let y = d.numeric(response)?;
    let fm = ols_with_fallback(std::slice::from_ref(&a), m).map_err(fit_err)?;
    let fy = ols_with_fallback(&[a, m.to_vec()], y).map_err(fit_err)?;
    let direct = fy.coefficients[0];
    let indirect = fm.coefficients[0] * fy.coefficients[1];
    Ok(MediationEstimate {
        direct,
        indirect,
        total: direct + indirect,
        direct_se: fy.std_errors[0],
        beta_m: fm.coefficients[0],
        beta_m_se: fm.std_errors[0],
        beta2: fy.coefficients[1],
        beta2_se: fy.std_errors[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(names: &[&str], cols: Vec<Vec<f64>>) -> TabularDataset {
        TabularDataset::from_numeric(names.iter().map(|s| s.to_string()).collect(), cols).unwrap()
    }

    #[test]
    fn response_equal_to_treatment() {
        let a: Vec<f64> = (0..40).map(|i| (i % 2) as f64).collect();
        let s: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64).collect();
        let d = table(&["s", "a", "y"], vec![s, a.clone(), a]);
        assert!((estimate_ate(&d, "a", "y").unwrap().value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn non_binary_treatment() {
        let d = table(&["a", "y"], vec![vec![0.0, 1.0, 2.0, 1.0], vec![1.0, 2.0, 3.0, 4.0]]);
        assert!(matches!(estimate_ate(&d, "a", "y"), Err(EngineError::NonBinaryTreatment { levels: 3, .. })));
    }

    #[test]
    fn text_levels_map_by_sorted_order() {
        let d = TabularDataset::new(
            vec!["t".into(), "y".into()],
            vec![Column::Text(vec!["yes".into(), "no".into(), "yes".into()]), Column::Numeric(vec![1.0, 2.0, 3.0])],
        )
        .unwrap();
        let b = binary_treatment(&d, "t").unwrap();
        assert_eq!(b.coded, vec![1.0, 0.0, 1.0]);
        assert_eq!(b.levels, [Scalar::Text("no".into()), Scalar::Text("yes".into())]);
    }

    #[test]
    fn unknown_condition_variable() {
        let d = table(
            &["s", "a", "y"],
            vec![vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0], vec![1.0, 3.0, 2.0, 5.0, 3.0, 8.0]],
        );
        let c = [ConditionClause::new("zz", 1.0)];
        assert!(matches!(estimate_hte(&d, "a", "y", &c), Err(EngineError::UnknownConditionVariable(_))));
    }
}
