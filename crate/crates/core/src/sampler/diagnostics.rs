//! Convergence diagnostics and posterior summaries: rank-normalized split
//! R-hat, bulk effective sample size with Geyer-paired autocorrelations, and
//! empirical summary tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{inv_normal_cdf, pairwise_sum};

use super::PosteriorSample;

/// Splits each chain into halves (the middle draw of an odd-length chain is
/// dropped).
fn split_chains(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(chains.len() * 2);
    for c in chains {
        let half = c.len() / 2;
        out.push(c[..half].to_vec());
        out.push(c[c.len() - half..].to_vec());
    }
    out
}

/// Replaces values by normal scores of their pooled fractional ranks
/// (average ranks on ties).
fn rank_normalize(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut indexed: Vec<(f64, usize, usize)> = Vec::new();
    for (ci, c) in chains.iter().enumerate() {
        for (di, &v) in c.iter().enumerate() {
            indexed.push((v, ci, di));
        }
    }
    let total = indexed.len();
    indexed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut z = vec![vec![0.0; 0]; chains.len()];
    for (ci, c) in chains.iter().enumerate() {
        z[ci] = vec![0.0; c.len()];
    }
    let mut i = 0;
    while i < total {
        let mut j = i;
        while j + 1 < total && indexed[j + 1].0 == indexed[i].0 {
            j += 1;
        }
        // average rank of the tie group, 1-based
        let rank = (i + j) as f64 / 2.0 + 1.0;
        let score = inv_normal_cdf((rank - 0.375) / (total as f64 + 0.25));
        for item in &indexed[i..=j] {
            z[item.1][item.2] = score;
        }
        i = j + 1;
    }
    z
}

fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Classic potential scale reduction on already-split chains.
fn rhat_basic(chains: &[Vec<f64>]) -> f64 {
    let n = chains[0].len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let vars: Vec<f64> = chains.iter().map(|c| sample_variance(c)).collect();
    let between = n * sample_variance(&means);
    let within = mean(&vars);
    if within <= 0.0 {
        return f64::NAN;
    }
    (((n - 1.0) / n * within + between / n) / within).sqrt()
}

/// Rank-normalized split R-hat: the larger of the bulk statistic and the
/// statistic on absolute deviations from the pooled median. Returns NaN for
/// zero-variance (constant) draws, which callers flag rather than fail.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<f64> {
    validate_chains(chains)?;
    let pooled: Vec<f64> = chains.iter().flatten().cloned().collect();
    let first = pooled[0];
    if pooled.iter().all(|&v| v == first) {
        return Ok(f64::NAN);
    }
    let split = split_chains(chains);
    let bulk = rhat_basic(&rank_normalize(&split));
    let med = median(&pooled);
    let folded: Vec<Vec<f64>> = split
        .iter()
        .map(|c| c.iter().map(|v| (v - med).abs()).collect())
        .collect();
    let tail = rhat_basic(&rank_normalize(&folded));
    Ok(bulk.max(tail))
}

/// Bulk effective sample size on rank-normalized split chains, with
/// Geyer-paired monotone autocorrelation sums.
pub fn ess_bulk(chains: &[Vec<f64>]) -> Result<f64> {
    validate_chains(chains)?;
    let pooled: Vec<f64> = chains.iter().flatten().cloned().collect();
    let first = pooled[0];
    if pooled.iter().all(|&v| v == first) {
        return Ok(f64::NAN);
    }
    let z = rank_normalize(&split_chains(chains));
    Ok(ess_core(&z))
}

fn ess_core(chains: &[Vec<f64>]) -> f64 {
    let num_chains = chains.len();
    let n = chains.iter().map(|c| c.len()).min().unwrap();
    let acov: Vec<Vec<f64>> = chains.iter().map(|c| autocovariance(&c[..n])).collect();
    let chain_means: Vec<f64> = chains.iter().map(|c| mean(&c[..n])).collect();
    let nf = n as f64;
    let mean_var = acov.iter().map(|a| a[0]).sum::<f64>() / num_chains as f64 * nf / (nf - 1.0);
    let mut var_plus = mean_var * (nf - 1.0) / nf;
    if num_chains > 1 {
        var_plus += sample_variance(&chain_means);
    }
    if var_plus <= 0.0 {
        return f64::NAN;
    }

    let mean_acov = |t: usize| acov.iter().map(|a| a[t]).sum::<f64>() / num_chains as f64;

    let mut rho = vec![0.0; n];
    rho[0] = 1.0;
    let mut rho_even = 1.0;
    let mut rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
    rho[1] = rho_odd;
    let mut s = 1usize;
    while s < n.saturating_sub(4) && rho_even + rho_odd > 0.0 {
        rho_even = 1.0 - (mean_var - mean_acov(s + 1)) / var_plus;
        rho_odd = 1.0 - (mean_var - mean_acov(s + 2)) / var_plus;
        if rho_even + rho_odd >= 0.0 {
            rho[s + 1] = rho_even;
            rho[s + 2] = rho_odd;
        }
        s += 2;
    }
    let max_s = s;
    if rho_even > 0.0 && max_s + 1 < n {
        rho[max_s + 1] = rho_even;
    }
    // enforce a monotone nonincreasing sequence of pair sums
    let mut k = 1usize;
    while k + 2 <= max_s.saturating_sub(1) {
        if rho[k + 1] + rho[k + 2] > rho[k - 1] + rho[k] {
            let avg = (rho[k - 1] + rho[k]) / 2.0;
            rho[k + 1] = avg;
            rho[k + 2] = avg;
        }
        k += 2;
    }
    let total = (num_chains * n) as f64;
    let tau = -1.0 + 2.0 * rho[..max_s].iter().sum::<f64>() + rho[max_s.min(n - 1)];
    (total / tau).min(total * total.log10()).max(0.0)
}

fn autocovariance(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let m = mean(xs);
    let centered: Vec<f64> = xs.iter().map(|x| x - m).collect();
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            for i in 0..n - t {
                acc += centered[i] * centered[i + t];
            }
            acc / n as f64
        })
        .collect()
}

fn validate_chains(chains: &[Vec<f64>]) -> Result<()> {
    if chains.is_empty() {
        return Err(Error::Selection("no chains supplied".into()));
    }
    let n = chains.iter().map(|c| c.len()).min().unwrap();
    if n < 8 {
        return Err(Error::Selection(format!(
            "need at least 8 draws per chain for split diagnostics, got {n}"
        )));
    }
    Ok(())
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Linear-interpolation quantile (type 7) of a sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n as f64 - 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-parameter posterior summary over pooled kept draws.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q2_5: f64,
    pub median: f64,
    pub q97_5: f64,
    pub rhat: f64,
    pub ess: f64,
}

/// Summarizes every parameter of a posterior sample (pooled chains).
pub fn summarize(sample: &PosteriorSample) -> Vec<ParamSummary> {
    (0..sample.num_params())
        .map(|j| {
            let pooled = sample.pooled_parameter(j);
            let mut sorted = pooled.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let m = mean(&pooled);
            let sd = if pooled.len() > 1 {
                sample_variance(&pooled).sqrt()
            } else {
                0.0
            };
            ParamSummary {
                name: sample.names[j].clone(),
                mean: m,
                sd,
                q2_5: quantile_sorted(&sorted, 0.025),
                median: quantile_sorted(&sorted, 0.5),
                q97_5: quantile_sorted(&sorted, 0.975),
                rhat: sample.rhat[j],
                ess: sample.ess[j],
            }
        })
        .collect()
}
