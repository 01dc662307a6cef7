use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{BnError, Dag, DataMatrix};

/// Lower bound on the residual variance; keeps constant or perfectly
/// explained columns at a finite likelihood.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// BIC contribution of one node given its parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyScore {
    pub child: usize,
    pub parents: Vec<usize>,
    pub log_likelihood: f64,
    pub penalty: f64,
    /// Free parameters: one slope per parent, the intercept and the variance.
    pub params: usize,
    pub residual_variance: f64,
    pub score: f64,
    /// Parent columns were collinear (or constant) and the pseudo-inverse was used.
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub total_bic: f64,
    pub family_scores: Vec<f64>,
    pub log_likelihood: f64,
    pub penalty: f64,
    /// Total free parameters across families.
    pub d: usize,
    pub n_rows: usize,
    pub singular_families: Vec<usize>,
}

/// Regresses `child` on an intercept plus `parents` by least squares and
/// returns the Gaussian log-likelihood at the MLE variance minus
/// `(k/2)·ln N`.
pub fn family_bic(
    data: &DataMatrix,
    child: usize,
    parents: &[usize],
) -> Result<FamilyScore, BnError> {
    let n_vars = data.n_vars();
    if child >= n_vars {
        return Err(BnError::UnknownNode(child));
    }
    if let Some(&bad) = parents.iter().find(|&&p| p >= n_vars) {
        return Err(BnError::UnknownNode(bad));
    }
    if parents.contains(&child) {
        return Err(BnError::SelfParent(child));
    }
    let n = data.n_rows();
    let needed = parents.len() + 3;
    if n < needed {
        return Err(BnError::InsufficientRows { needed, got: n });
    }

    let y = centered(data.column(child));
    let (rss, singular) = if parents.is_empty() {
        (y.iter().map(|v| v * v).sum::<f64>(), false)
    } else {
        let cols: Vec<Vec<f64>> = parents.iter().map(|&p| centered(data.column(p))).collect();
        let x = DMatrix::from_fn(n, parents.len(), |i, j| cols[j][i]);
        let yv = DVector::from_vec(y);
        let svd = x.clone().svd(true, true);
        let s_max = svd.singular_values.max();
        let tol = (s_max * n.max(parents.len()) as f64 * f64::EPSILON).max(f64::MIN_POSITIVE);
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        let beta = svd.solve(&yv, tol).expect("u and v were computed");
        let resid = yv - x * beta;
        (resid.norm_squared(), rank < parents.len())
    };

    let nf = n as f64;
    let variance = (rss / nf).max(VARIANCE_FLOOR);
    let log_likelihood =
        -0.5 * nf * (2.0 * std::f64::consts::PI * variance).ln() - rss / (2.0 * variance);
    let params = parents.len() + 2;
    let penalty = 0.5 * params as f64 * nf.ln();
    let mut sorted = parents.to_vec();
    sorted.sort_unstable();
    Ok(FamilyScore {
        child,
        parents: sorted,
        log_likelihood,
        penalty,
        params,
        residual_variance: variance,
        score: log_likelihood - penalty,
        singular,
    })
}

fn centered(col: &[f64]) -> Vec<f64> {
    let mean = col.iter().sum::<f64>() / col.len() as f64;
    col.iter().map(|v| v - mean).collect()
}

/// Sum of family scores of `dag` on `data`.
pub fn bic_score(data: &DataMatrix, dag: &Dag) -> Result<ScoreReport, BnError> {
    if dag.n_nodes() != data.n_vars() {
        return Err(BnError::NodeCountMismatch {
            expected: data.n_vars(),
            got: dag.n_nodes(),
        });
    }
    let families = (0..dag.n_nodes())
        .map(|v| family_bic(data, v, &dag.parents_of(v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScoreReport::from_families(&families, data.n_rows()))
}

impl ScoreReport {
    pub(crate) fn from_families(families: &[FamilyScore], n_rows: usize) -> ScoreReport {
        ScoreReport {
            total_bic: families.iter().map(|f| f.score).sum(),
            family_scores: families.iter().map(|f| f.score).collect(),
            log_likelihood: families.iter().map(|f| f.log_likelihood).sum(),
            penalty: families.iter().map(|f| f.penalty).sum(),
            d: families.iter().map(|f| f.params).sum(),
            n_rows,
            singular_families: families
                .iter()
                .filter(|f| f.singular)
                .map(|f| f.child)
                .collect(),
        }
    }
}
