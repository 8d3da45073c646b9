//! Pointwise and total log-likelihood with analytic gradient for all six
//! model variants.
//!
//! The zero-inflation indicator is marginalized: an individual with events
//! contributes Σ_j log λ_i(t_ij) − Λ_i(y_i) + log π_i, while a zero-event
//! individual contributes log(π_i e^{−Λ_i(y_i)} + 1 − π_i), evaluated as a
//! log-sum-exp so large Λ cannot underflow. Constants dropped from the NHPP
//! density are fixed to the ordered-times convention (no n! term) for every
//! variant, so criterion values stay comparable across models.
//!
//! [`PreparedModel`] flattens the dataset once (covariates, per-individual
//! event statistics, and precomputed Bernstein basis rows), after which each
//! evaluation is cheap and allocation-light.

use crate::data::RecurrentDataset;
use crate::error::{Error, Result};
use crate::model::{BaselineFamily, ModelSpec};
use crate::params::{Block, ParameterLayout};
use crate::special::{log_sigmoid, log_sum_exp2, pairwise_sum, sigmoid};
use crate::intensity::{bernstein_basis, bernstein_cumulative_basis};

/// Events closer to zero than this fraction of the time horizon are clamped
/// before taking logs under a power-law baseline (λ0 diverges at 0 when
/// α2 < 1); occurrences are counted and surfaced as a data warning.
const EVENT_TIME_GUARD_FRACTION: f64 = 1e-12;

/// Total and per-individual log-likelihood plus the gradient with respect to
/// the unconstrained coordinates.
#[derive(Debug, Clone)]
pub struct LogLikResult {
    pub total: f64,
    pub pointwise: Vec<f64>,
    pub gradient: Vec<f64>,
}

/// A dataset/model pair flattened for fast repeated evaluation.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    spec: ModelSpec,
    layout: ParameterLayout,
    m: usize,
    p: usize,
    q: usize,
    zeta: f64,
    y: Vec<f64>,
    n_events: Vec<usize>,
    stratum: Vec<usize>,
    x: Vec<f64>,
    z: Vec<f64>,
    /// Per individual: Σ_j ln t_ij (guarded), used by the power-law path.
    sum_log_t: Vec<f64>,
    /// Prefix offsets into the grouped event arrays (length m + 1).
    event_offset: Vec<usize>,
    /// Bernstein basis rows per event (E × d, row-major); empty for power law.
    event_basis: Vec<f64>,
    /// Integrated basis per individual at its follow-up end (m × d).
    cum_basis: Vec<f64>,
    clamped_events: usize,
}

impl PreparedModel {
    pub fn new(data: &RecurrentDataset, spec: ModelSpec) -> Result<Self> {
        spec.validate(data.intensity_dim(), data.zero_dim())?;
        let m = data.len();
        let p = data.intensity_dim();
        let q = data.zero_dim();
        let zeta = data.time_horizon();
        let layout = ParameterLayout::for_model(&spec, p, q, data.num_strata());

        let mut y = Vec::with_capacity(m);
        let mut n_events = Vec::with_capacity(m);
        let mut stratum = Vec::with_capacity(m);
        let mut x = Vec::with_capacity(m * p);
        let mut z = Vec::with_capacity(m * q);
        let mut sum_log_t = Vec::with_capacity(m);
        let mut event_offset = Vec::with_capacity(m + 1);
        let mut event_basis = Vec::new();
        let mut cum_basis = Vec::new();
        let mut clamped = 0usize;

        let degree = match spec.baseline {
            BaselineFamily::Bernstein { degree } => degree,
            BaselineFamily::PowerLaw => 0,
        };
        let guard = EVENT_TIME_GUARD_FRACTION * zeta;

        event_offset.push(0);
        for ind in data.individuals() {
            y.push(ind.follow_up_end);
            n_events.push(ind.event_count());
            stratum.push(ind.stratum);
            x.extend_from_slice(&ind.intensity_covariates);
            z.extend_from_slice(&ind.zero_covariates);
            let mut slt = 0.0;
            for &t in &ind.event_times {
                let t_eval = if t < guard {
                    clamped += 1;
                    guard
                } else {
                    t
                };
                slt += t_eval.ln();
                if degree > 0 {
                    if t > zeta {
                        return Err(Error::Domain(format!(
                            "event time {t} outside the baseline support [0, {zeta}]"
                        )));
                    }
                    event_basis.extend(bernstein_basis(degree, zeta, t)?);
                }
            }
            sum_log_t.push(slt);
            event_offset.push(event_offset.last().unwrap() + ind.event_count());
            if degree > 0 {
                cum_basis.extend(bernstein_cumulative_basis(degree, zeta, ind.follow_up_end)?);
            }
        }

        Ok(Self {
            spec,
            layout,
            m,
            p,
            q,
            zeta,
            y,
            n_events,
            stratum,
            x,
            z,
            sum_log_t,
            event_offset,
            event_basis,
            cum_basis,
            clamped_events: clamped,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layout(&self) -> &ParameterLayout {
        &self.layout
    }

    pub fn num_individuals(&self) -> usize {
        self.m
    }

    /// Bernstein support bound ζ (the dataset time horizon).
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Number of event times clamped away from zero for log evaluation.
    pub fn clamped_events(&self) -> usize {
        self.clamped_events
    }

    /// Total and pointwise log-likelihood together with the analytic
    /// gradient in unconstrained coordinates.
    pub fn loglik(&self, coords: &[f64]) -> LogLikResult {
        let mut pointwise = vec![0.0; self.m];
        let mut gradient = vec![0.0; self.layout.dim()];
        let total = self.evaluate(coords, &mut pointwise, Some(&mut gradient));
        LogLikResult {
            total,
            pointwise,
            gradient,
        }
    }

    /// Pointwise log-likelihood without the gradient; returns the total.
    pub fn pointwise_loglik(&self, coords: &[f64], out: &mut [f64]) -> f64 {
        assert_eq!(out.len(), self.m);
        self.evaluate(coords, out, None)
    }

    /// Log-likelihood contribution of one individual.
    pub fn individual_loglik(&self, idx: usize, coords: &[f64]) -> f64 {
        let mut pointwise = vec![0.0; self.m];
        self.evaluate(coords, &mut pointwise, None);
        pointwise[idx]
    }

    /// Zero-inflation probability π_i for one individual: 1 for NHPP, the
    /// constant π for non-COV variants, the logistic value otherwise.
    pub fn pi_value(&self, idx: usize, coords: &[f64]) -> f64 {
        assert!(idx < self.m);
        if !self.spec.variant.has_zero_inflation() {
            return 1.0;
        }
        if let Some(r) = self.layout.block(Block::Psi) {
            let psi = &coords[r];
            let z_row = &self.z[idx * self.q..(idx + 1) * self.q];
            let mut u = psi[0];
            for (zr, pr) in z_row.iter().zip(&psi[1..]) {
                u += zr * pr;
            }
            sigmoid(u)
        } else {
            let r = self.layout.block(Block::LogitPi).expect("constant pi block");
            sigmoid(coords[r.start])
        }
    }

    fn evaluate(&self, coords: &[f64], pointwise: &mut [f64], mut gradient: Option<&mut [f64]>) -> f64 {
        assert_eq!(coords.len(), self.layout.dim());
        let variant = self.spec.variant;
        let alpha_r = self.layout.block(Block::Alpha);
        let gamma_r = self.layout.block(Block::LogGamma);
        let beta_r = self.layout.block(Block::Beta);
        let psi_r = self.layout.block(Block::Psi);
        let pi_r = self.layout.block(Block::LogitPi);
        let omega_r = self.layout.block(Block::Omega);

        let (alpha1, alpha2) = alpha_r
            .as_ref()
            .map(|r| (coords[r.start].exp(), coords[r.start + 1].exp()))
            .unwrap_or((f64::NAN, f64::NAN));
        let gamma: Vec<f64> = gamma_r
            .as_ref()
            .map(|r| coords[r.clone()].iter().map(|&g| g.exp()).collect())
            .unwrap_or_default();
        let beta = beta_r.as_ref().map(|r| &coords[r.clone()]).unwrap_or(&[]);
        let psi = psi_r.as_ref().map(|r| &coords[r.clone()]).unwrap_or(&[]);
        let logit_pi = pi_r.as_ref().map(|r| coords[r.start]);
        let omega = omega_r.as_ref().map(|r| &coords[r.clone()]).unwrap_or(&[]);
        let d = gamma.len();

        for i in 0..self.m {
            let n_i = self.n_events[i];
            let y_i = self.y[i];
            let x_row = &self.x[i * self.p..(i + 1) * self.p];

            let mut eta = 0.0;
            for (xv, bv) in x_row.iter().zip(beta) {
                eta += xv * bv;
            }
            if variant.has_spatial_effects() {
                eta += omega[self.stratum[i]];
            }
            let scale = eta.exp();

            // baseline cumulative at y_i, events log-sum, and their partials
            let (cum0, sum_log_lam0) = match self.spec.baseline {
                BaselineFamily::PowerLaw => {
                    let cum0 = alpha1 * y_i.powf(alpha2);
                    let sl = if n_i > 0 {
                        n_i as f64 * (alpha1.ln() + alpha2.ln())
                            + (alpha2 - 1.0) * self.sum_log_t[i]
                    } else {
                        0.0
                    };
                    (cum0, sl)
                }
                BaselineFamily::Bernstein { .. } => {
                    let cb = &self.cum_basis[i * d..(i + 1) * d];
                    let cum0: f64 = cb.iter().zip(&gamma).map(|(g, c)| g * c).sum();
                    let mut sl = 0.0;
                    for e in self.event_offset[i]..self.event_offset[i + 1] {
                        let row = &self.event_basis[e * d..(e + 1) * d];
                        let lam0: f64 = row.iter().zip(&gamma).map(|(g, c)| g * c).sum();
                        sl += lam0.ln();
                    }
                    (cum0, sl)
                }
            };
            let lam = scale * cum0;

            // zero-inflation probability on the log scale
            let (log_pi, log_1mpi, pi_i) = if !variant.has_zero_inflation() {
                (0.0, f64::NEG_INFINITY, 1.0)
            } else if variant.has_zero_covariates() {
                let z_row = &self.z[i * self.q..(i + 1) * self.q];
                let mut u = psi[0];
                for (zv, pv) in z_row.iter().zip(&psi[1..]) {
                    u += zv * pv;
                }
                (log_sigmoid(u), log_sigmoid(-u), sigmoid(u))
            } else {
                let c = logit_pi.expect("constant pi coordinate");
                (log_sigmoid(c), log_sigmoid(-c), sigmoid(c))
            };

            // branch log-likelihood and the zero-branch softmax weight
            let (ll, w) = if n_i > 0 {
                (sum_log_lam0 + n_i as f64 * eta - lam + log_pi, 1.0)
            } else {
                let a = log_pi - lam;
                let b = log_1mpi;
                let ll = log_sum_exp2(a, b);
                let w = if ll == f64::NEG_INFINITY {
                    1.0
                } else {
                    (a - ll).exp()
                };
                (ll, w)
            };
            pointwise[i] = ll;

            let Some(grad) = gradient.as_deref_mut() else {
                continue;
            };

            // weighted cumulative term, guarded against 0·inf
            let wl = if w > 0.0 && lam.is_finite() {
                w * lam
            } else {
                0.0
            };
            let g_eta = n_i as f64 - wl;

            if let Some(r) = &beta_r {
                for (slot, xv) in grad[r.clone()].iter_mut().zip(x_row) {
                    *slot += g_eta * xv;
                }
            }
            if let Some(r) = &omega_r {
                grad[r.start + self.stratum[i]] += g_eta;
            }
            match self.spec.baseline {
                BaselineFamily::PowerLaw => {
                    let r = alpha_r.as_ref().expect("power-law block");
                    // ∂/∂ log α1: n_i − w·Λ
                    grad[r.start] += n_i as f64 - wl;
                    // ∂/∂ log α2: n_i + α2 Σ ln t − w·Λ·α2 ln y
                    let events = if n_i > 0 {
                        n_i as f64 + alpha2 * self.sum_log_t[i]
                    } else {
                        0.0
                    };
                    grad[r.start + 1] += events - wl * alpha2 * y_i.ln();
                }
                BaselineFamily::Bernstein { .. } => {
                    let r = gamma_r.as_ref().expect("bernstein block");
                    let cb = &self.cum_basis[i * d..(i + 1) * d];
                    let wscale = if w > 0.0 && scale.is_finite() {
                        w * scale
                    } else {
                        0.0
                    };
                    for k in 0..d {
                        grad[r.start + k] -= wscale * gamma[k] * cb[k];
                    }
                    for e in self.event_offset[i]..self.event_offset[i + 1] {
                        let row = &self.event_basis[e * d..(e + 1) * d];
                        let lam0: f64 = row.iter().zip(&gamma).map(|(g, c)| g * c).sum();
                        for k in 0..d {
                            grad[r.start + k] += gamma[k] * row[k] / lam0;
                        }
                    }
                }
            }
            if variant.has_zero_inflation() {
                let s = if n_i > 0 {
                    1.0 - pi_i
                } else {
                    w * (1.0 - pi_i) - (1.0 - w) * pi_i
                };
                if let Some(r) = &psi_r {
                    let z_row = &self.z[i * self.q..(i + 1) * self.q];
                    grad[r.start] += s;
                    for (slot, zv) in grad[r.start + 1..r.end].iter_mut().zip(z_row) {
                        *slot += s * zv;
                    }
                } else if let Some(r) = &pi_r {
                    grad[r.start] += s;
                }
            }
        }

        pairwise_sum(pointwise)
    }
}
