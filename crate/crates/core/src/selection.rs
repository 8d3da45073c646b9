//! Model comparison over the pointwise log-likelihood matrix: WAIC and
//! PSIS-LOO on the deviance scale (lower is better), with generalized-Pareto
//! tail smoothing of the importance ratios and per-individual shape
//! diagnostics (k > 0.7 flags an unreliable contribution).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{log_sum_exp, pairwise_sum};

/// S×m matrix of log p(y_i | θ^s), draws in rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseLogLik {
    num_draws: usize,
    num_individuals: usize,
    values: Vec<f64>,
}

impl PointwiseLogLik {
    pub fn new(num_draws: usize, num_individuals: usize, values: Vec<f64>) -> Result<Self> {
        if num_draws == 0 || num_individuals == 0 {
            return Err(Error::Selection(
                "pointwise log-likelihood matrix must be non-empty".into(),
            ));
        }
        if values.len() != num_draws * num_individuals {
            return Err(Error::DimensionMismatch(format!(
                "expected {}×{} = {} entries, got {}",
                num_draws,
                num_individuals,
                num_draws * num_individuals,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Selection(
                "pointwise log-likelihood contains non-finite entries".into(),
            ));
        }
        Ok(Self {
            num_draws,
            num_individuals,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_draws = rows.len();
        let num_individuals = rows.first().map_or(0, |r| r.len());
        let mut values = Vec::with_capacity(num_draws * num_individuals);
        for r in rows {
            if r.len() != num_individuals {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            values.extend_from_slice(r);
        }
        Self::new(num_draws, num_individuals, values)
    }

    pub fn num_draws(&self) -> usize {
        self.num_draws
    }

    pub fn num_individuals(&self) -> usize {
        self.num_individuals
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column for individual `i`, one entry per draw.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.num_draws)
            .map(|s| self.values[s * self.num_individuals + i])
            .collect()
    }

    /// Fewer than 100 draws makes the criteria noisy; surfaced as a warning
    /// rather than an error.
    pub fn low_draw_warning(&self) -> bool {
        self.num_draws < 100
    }
}

/// Which criterion a report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    Waic,
    PsisLoo,
}

/// A model-selection criterion on the deviance scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    /// −2·elpd; lower is better.
    pub value: f64,
    /// Effective number of parameters (WAIC only).
    pub effective_params: Option<f64>,
    /// Per-individual elpd contributions (value = −2·sum).
    pub pointwise_elpd: Vec<f64>,
    /// Per-individual Pareto shape estimates (PSIS-LOO only); NaN where the
    /// tail was too degenerate to fit.
    pub pareto_k: Option<Vec<f64>>,
    /// Individuals with k > 0.7 or an undefined k.
    pub flagged: Vec<usize>,
    pub num_draws: usize,
    pub low_draw_warning: bool,
}

/// Widely applicable information criterion: −2·lppd + 2·p_W with
/// p_W = 2 Σ_i (log-mean − mean-log), which is nonnegative by Jensen.
pub fn waic(ll: &PointwiseLogLik) -> Result<CriterionReport> {
    if ll.num_draws < 2 {
        return Err(Error::Selection("WAIC needs at least 2 draws".into()));
    }
    let s = ll.num_draws as f64;
    let m = ll.num_individuals;
    let mut pointwise_elpd = Vec::with_capacity(m);
    let mut p_w_total = 0.0;
    let mut lppd_total = 0.0;
    for i in 0..m {
        let col = ll.column(i);
        let lppd_i = log_sum_exp(&col) - s.ln();
        let mean_log = pairwise_sum(&col) / s;
        let p_i = (2.0 * (lppd_i - mean_log)).max(0.0);
        lppd_total += lppd_i;
        p_w_total += p_i;
        pointwise_elpd.push(lppd_i - p_i);
    }
    Ok(CriterionReport {
        criterion: Criterion::Waic,
        value: -2.0 * lppd_total + 2.0 * p_w_total,
        effective_params: Some(p_w_total),
        pointwise_elpd,
        pareto_k: None,
        flagged: Vec::new(),
        num_draws: ll.num_draws,
        low_draw_warning: ll.low_draw_warning(),
    })
}

/// Pareto-smoothed importance-sampling leave-one-out criterion.
///
/// Raw ratios r_i^s = 1/p(y_i|θ^s); the largest M = min(0.2·S, 3√S) ratios
/// per individual are replaced by generalized-Pareto quantiles fitted to the
/// exceedances over the (M+1)-largest ratio, order preserved and capped at
/// the maximum raw ratio.
pub fn psis_loo(ll: &PointwiseLogLik) -> Result<CriterionReport> {
    let s = ll.num_draws;
    if s < 5 {
        return Err(Error::Selection(
            "PSIS-LOO needs at least 5 draws for the tail fit".into(),
        ));
    }
    let m = ll.num_individuals;
    let tail_len = (0.2 * s as f64).min(3.0 * (s as f64).sqrt()).floor() as usize;
    let mut pointwise_elpd = Vec::with_capacity(m);
    let mut pareto_k = Vec::with_capacity(m);
    let mut flagged = Vec::new();

    for i in 0..m {
        let col = ll.column(i);
        let (log_weights, k) = smooth_importance_weights(&col, tail_len);
        let num: Vec<f64> = log_weights.iter().zip(&col).map(|(w, l)| w + l).collect();
        let elpd = log_sum_exp(&num) - log_sum_exp(&log_weights);
        pointwise_elpd.push(elpd);
        if k.is_nan() || k > 0.7 {
            flagged.push(i);
        }
        pareto_k.push(k);
    }

    Ok(CriterionReport {
        criterion: Criterion::PsisLoo,
        value: -2.0 * pairwise_sum(&pointwise_elpd),
        effective_params: None,
        pointwise_elpd,
        pareto_k: Some(pareto_k),
        flagged,
        num_draws: s,
        low_draw_warning: ll.low_draw_warning(),
    })
}

/// Smoothed log importance weights (shifted so the maximum raw log-ratio is
/// zero, which cancels in the self-normalized estimate) and the fitted
/// Pareto shape, NaN when the tail is degenerate.
fn smooth_importance_weights(loglik_col: &[f64], tail_len: usize) -> (Vec<f64>, f64) {
    let s = loglik_col.len();
    let max_lr = loglik_col.iter().map(|l| -l).fold(f64::NEG_INFINITY, f64::max);
    // raw ratios in (0, 1]
    let mut ratios: Vec<f64> = loglik_col.iter().map(|l| (-l - max_lr).exp()).collect();
    if tail_len < 5 || tail_len >= s {
        return (ratios.iter().map(|r| r.ln()).collect(), f64::NAN);
    }
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| ratios[a].partial_cmp(&ratios[b]).unwrap());
    let cutoff = ratios[order[s - tail_len - 1]];
    let exceedances: Vec<f64> = order[s - tail_len..]
        .iter()
        .map(|&idx| ratios[idx] - cutoff)
        .collect();
    if exceedances.last().copied().unwrap_or(0.0) <= 0.0 {
        // flat column: every weight equal, nothing to smooth
        return (ratios.iter().map(|r| r.ln()).collect(), f64::NAN);
    }
    let Some((k, sigma)) = gpd_fit(&exceedances) else {
        return (ratios.iter().map(|r| r.ln()).collect(), f64::NAN);
    };
    let max_raw = ratios[order[s - 1]];
    for (rank, &idx) in order[s - tail_len..].iter().enumerate() {
        let p = (rank as f64 + 0.5) / tail_len as f64;
        ratios[idx] = (cutoff + gpd_quantile(k, sigma, p)).min(max_raw);
    }
    (ratios.iter().map(|r| r.ln()).collect(), k)
}

/// Zhang–Stephens profile-posterior estimate of the generalized-Pareto shape
/// and scale from sorted exceedances (location fixed at zero). Returns None
/// when the sample is degenerate.
pub fn gpd_fit(sorted_exceedances: &[f64]) -> Option<(f64, f64)> {
    let x = sorted_exceedances;
    let n = x.len();
    if n < 5 {
        return None;
    }
    let x_max = x[n - 1];
    let quartile = x[(n as f64 / 4.0 + 0.5).floor() as usize - 1];
    if !(x_max > 0.0) || !(quartile > 0.0) {
        return None;
    }
    let grid_len = 30 + (n as f64).sqrt().floor() as usize;
    let mut grid = Vec::with_capacity(grid_len);
    let mut profile = Vec::with_capacity(grid_len);
    for j in 1..=grid_len {
        let b = 1.0 / x_max + (1.0 - (grid_len as f64 / (j as f64 - 0.5)).sqrt()) / (3.0 * quartile);
        let k = x.iter().map(|&v| (-b * v).ln_1p()).sum::<f64>() / n as f64;
        grid.push(b);
        profile.push(n as f64 * ((-b / k).ln() - k - 1.0));
    }
    let lse = log_sum_exp(&profile);
    let b_hat: f64 = grid
        .iter()
        .zip(&profile)
        .map(|(b, l)| b * (l - lse).exp())
        .sum();
    let k_hat = x.iter().map(|&v| (-b_hat * v).ln_1p()).sum::<f64>() / n as f64;
    let sigma = -k_hat / b_hat;
    if !k_hat.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
        return None;
    }
    // weakly informative shrinkage of the shape toward 0.5
    let k_hat = (k_hat * n as f64 + 5.0) / (n as f64 + 10.0);
    Some((k_hat, sigma))
}

/// Generalized-Pareto quantile with location zero.
pub fn gpd_quantile(shape: f64, scale: f64, p: f64) -> f64 {
    if shape.abs() < 1e-12 {
        -scale * (-p).ln_1p()
    } else {
        scale * (-shape * (-p).ln_1p()).exp_m1() / shape
    }
}

/// One model's standing in a comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub value: f64,
    pub effective_params: Option<f64>,
    pub num_flagged: usize,
    /// Deviance-scale difference to the best model (0 for the best).
    pub value_diff: f64,
    /// Standard error of the difference from per-point elpd differences.
    pub se_diff: f64,
}

/// Ranking of models by a criterion, best first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelComparison {
    pub rows: Vec<ComparisonRow>,
}

/// Ranks reports (ascending criterion value) and attaches pairwise
/// differences to the best model with their standard errors. All reports
/// must cover the same individuals.
pub fn compare_models(entries: &[(String, CriterionReport)]) -> Result<ModelComparison> {
    if entries.is_empty() {
        return Err(Error::Selection("nothing to compare".into()));
    }
    let m = entries[0].1.pointwise_elpd.len();
    for (label, report) in entries {
        if report.pointwise_elpd.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "report `{label}` covers {} individuals, expected {m}",
                report.pointwise_elpd.len()
            )));
        }
    }
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[a].1.value.partial_cmp(&entries[b].1.value).unwrap());
    let best = &entries[order[0]].1;
    let rows = order
        .iter()
        .map(|&idx| {
            let (label, report) = &entries[idx];
            let diffs: Vec<f64> = report
                .pointwise_elpd
                .iter()
                .zip(&best.pointwise_elpd)
                .map(|(a, b)| a - b)
                .collect();
            let mean = pairwise_sum(&diffs) / m as f64;
            let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>()
                / (m as f64 - 1.0).max(1.0);
            ComparisonRow {
                label: label.clone(),
                value: report.value,
                effective_params: report.effective_params,
                num_flagged: report.flagged.len(),
                value_diff: report.value - best.value,
                se_diff: 2.0 * (m as f64 * var).sqrt(),
            }
        })
        .collect();
    Ok(ModelComparison { rows })
}
