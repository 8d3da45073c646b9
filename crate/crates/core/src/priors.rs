//! Log-priors for every parameter block and the joint ICAR density of the
//! spatial frailties; together with the likelihood these form the posterior
//! kernel the sampler targets.
//!
//! The ICAR density is evaluated in the joint pairwise-difference form
//!   (L_eff/2)·log τ − (τ/2)·Σ_{(l,r)∈E} (ω_l − ω_r)²,
//! with L_eff = L − #components, plus a soft sum-to-zero penalty
//! N(mean(ω) | 0, 0.001/√L) applied per connected component to keep the
//! otherwise improper density integrable and differentiable.

use crate::data::SpatialGraph;
use crate::error::{Error, Result};
use crate::likelihood::{LogLikResult, PreparedModel};
use crate::model::PriorConfig;
use crate::params::{Block, ParameterLayout};
use crate::special::{ln_beta, ln_gamma, log_sigmoid, sigmoid, HALF_LN_TWO_PI};

/// Frailty field with its precision: the state the ICAR prior evaluates.
#[derive(Debug, Clone, PartialEq)]
pub struct IcarState {
    pub omega: Vec<f64>,
    pub tau: f64,
}

/// Value and gradient of the ICAR log-density.
#[derive(Debug, Clone)]
pub struct IcarEval {
    pub log_density: f64,
    pub grad_omega: Vec<f64>,
    pub grad_log_tau: f64,
}

/// Σ_{(l,r)∈E} (ω_l − ω_r)², the quadratic form of the joint ICAR density.
pub fn pairwise_quadratic(omega: &[f64], graph: &SpatialGraph) -> f64 {
    graph
        .edges()
        .iter()
        .map(|&(l, r)| {
            let d = omega[l] - omega[r];
            d * d
        })
        .sum()
}

/// Joint ICAR log-density of the frailty field, with gradients with respect
/// to ω and log τ. Rank correction and the sum-to-zero penalty are applied
/// per connected component.
pub fn icar_log_density(state: &IcarState, graph: &SpatialGraph) -> Result<IcarEval> {
    let num_areas = graph.num_areas();
    if num_areas < 2 {
        return Err(Error::InvalidSpec(
            "spatial effects need at least two areas".to_string(),
        ));
    }
    if graph.edges().is_empty() {
        return Err(Error::InvalidSpec(
            "spatial effects need a non-empty adjacency".to_string(),
        ));
    }
    if state.omega.len() != num_areas {
        return Err(Error::DimensionMismatch(format!(
            "{} frailties for {} areas",
            state.omega.len(),
            num_areas
        )));
    }
    if !(state.tau > 0.0) {
        return Err(Error::Domain(format!(
            "ICAR precision must be positive, got {}",
            state.tau
        )));
    }
    let omega = &state.omega;
    let tau = state.tau;

    let labels = graph.connected_components();
    let num_components = labels.iter().max().map_or(0, |&m| m + 1);
    let effective_rank = (num_areas - num_components) as f64;

    let quad = pairwise_quadratic(omega, graph);
    let mut grad_omega = vec![0.0; num_areas];
    for &(l, r) in graph.edges() {
        let d = omega[l] - omega[r];
        grad_omega[l] -= tau * d;
        grad_omega[r] += tau * d;
    }

    let mut log_density = 0.5 * effective_rank * tau.ln() - 0.5 * tau * quad;
    let mut comp_sum = vec![0.0; num_components];
    let mut comp_size = vec![0usize; num_components];
    for (l, &c) in labels.iter().enumerate() {
        comp_sum[c] += omega[l];
        comp_size[c] += 1;
    }
    for c in 0..num_components {
        let size = comp_size[c] as f64;
        let mean = comp_sum[c] / size;
        let sd = 1e-3 / size.sqrt();
        log_density += -HALF_LN_TWO_PI - sd.ln() - 0.5 * (mean / sd).powi(2);
        let d_mean = -mean / (sd * sd);
        for (l, &lab) in labels.iter().enumerate() {
            if lab == c {
                grad_omega[l] += d_mean / size;
            }
        }
    }
    let grad_log_tau = 0.5 * effective_rank - 0.5 * tau * quad;

    Ok(IcarEval {
        log_density,
        grad_omega,
        grad_log_tau,
    })
}

/// Sum of the block log-priors in unconstrained coordinates, Jacobians of
/// the constraining transforms included, plus its gradient. Frailties are
/// covered by [`icar_log_density`], not here.
pub fn block_log_priors(
    coords: &[f64],
    layout: &ParameterLayout,
    priors: &PriorConfig,
) -> (f64, Vec<f64>) {
    assert_eq!(coords.len(), layout.dim());
    let mut lp = 0.0;
    let mut grad = vec![0.0; layout.dim()];
    for (block, range) in layout.blocks() {
        match block {
            Block::Alpha => {
                let (l1, g1) = gamma_on_log_scale(
                    coords[range.start],
                    priors.alpha1_shape,
                    priors.alpha1_rate,
                );
                let (l2, g2) = gamma_on_log_scale(
                    coords[range.start + 1],
                    priors.alpha2_shape,
                    priors.alpha2_rate,
                );
                lp += l1 + l2;
                grad[range.start] += g1;
                grad[range.start + 1] += g2;
            }
            Block::LogGamma => {
                for i in range.clone() {
                    let (l, g) = normal_prior(coords[i], priors.log_gamma_mean, priors.log_gamma_sd);
                    lp += l;
                    grad[i] += g;
                }
            }
            Block::Beta => {
                for i in range.clone() {
                    let (l, g) = normal_prior(coords[i], priors.beta_mean, priors.beta_sd);
                    lp += l;
                    grad[i] += g;
                }
            }
            Block::Psi => {
                for i in range.clone() {
                    let (l, g) = normal_prior(coords[i], priors.psi_mean, priors.psi_sd);
                    lp += l;
                    grad[i] += g;
                }
            }
            Block::LogitPi => {
                let c = coords[range.start];
                let (a, b) = (priors.pi_alpha, priors.pi_beta);
                let pi = sigmoid(c);
                lp += -ln_beta(a, b) + a * log_sigmoid(c) + b * log_sigmoid(-c);
                grad[range.start] += a * (1.0 - pi) - b * pi;
            }
            Block::LogTau => {
                let (l, g) =
                    gamma_on_log_scale(coords[range.start], priors.tau_shape, priors.tau_rate);
                lp += l;
                grad[range.start] += g;
            }
            Block::Omega => {}
        }
    }
    (lp, grad)
}

/// Gamma(shape, rate) prior on x > 0 evaluated at v = log x, with the
/// exp-transform Jacobian folded in: a·log b − ln Γ(a) + a·v − b·e^v.
fn gamma_on_log_scale(v: f64, shape: f64, rate: f64) -> (f64, f64) {
    let ev = v.exp();
    let lp = shape * rate.ln() - ln_gamma(shape) + shape * v - rate * ev;
    (lp, shape - rate * ev)
}

fn normal_prior(x: f64, mean: f64, sd: f64) -> (f64, f64) {
    let z = (x - mean) / sd;
    (-HALF_LN_TWO_PI - sd.ln() - 0.5 * z * z, -z / sd)
}

/// The sampler target: likelihood + block priors + ICAR, as one scalar with
/// its gradient in unconstrained coordinates.
#[derive(Debug, Clone)]
pub struct PosteriorKernel {
    prepared: PreparedModel,
    graph: Option<SpatialGraph>,
}

impl PosteriorKernel {
    pub fn new(prepared: PreparedModel, graph: Option<&SpatialGraph>) -> Result<Self> {
        let variant = prepared.spec().variant;
        let graph = if variant.has_spatial_effects() {
            let g = graph.ok_or_else(|| {
                Error::InvalidSpec(format!("{variant} requires an adjacency graph"))
            })?;
            if g.num_areas() > 1 && g.edges().is_empty() {
                return Err(Error::InvalidSpec(
                    "adjacency graph has no edges".to_string(),
                ));
            }
            Some(g.clone())
        } else {
            None
        };
        Ok(Self { prepared, graph })
    }

    pub fn prepared(&self) -> &PreparedModel {
        &self.prepared
    }

    pub fn graph(&self) -> Option<&SpatialGraph> {
        self.graph.as_ref()
    }

    pub fn layout(&self) -> &ParameterLayout {
        self.prepared.layout()
    }

    pub fn dim(&self) -> usize {
        self.prepared.layout().dim()
    }

    /// Kernel value and gradient; `grad` must have length `dim()`.
    pub fn logp_grad(&self, coords: &[f64], grad: &mut [f64]) -> f64 {
        let layout = self.prepared.layout();
        let LogLikResult {
            total,
            gradient,
            ..
        } = self.prepared.loglik(coords);
        grad.copy_from_slice(&gradient);
        let (prior_lp, prior_grad) = block_log_priors(coords, layout, &self.prepared.spec().priors);
        for (g, pg) in grad.iter_mut().zip(&prior_grad) {
            *g += pg;
        }
        let mut lp = total + prior_lp;
        if let Some(graph) = &self.graph {
            let omega_r = layout.block(Block::Omega).expect("spatial layout");
            let tau_r = layout.block(Block::LogTau).expect("spatial layout");
            let state = IcarState {
                omega: coords[omega_r.clone()].to_vec(),
                tau: coords[tau_r.start].exp(),
            };
            match icar_log_density(&state, graph) {
                Ok(eval) => {
                    lp += eval.log_density;
                    for (g, io) in grad[omega_r].iter_mut().zip(&eval.grad_omega) {
                        *g += io;
                    }
                    grad[tau_r.start] += eval.grad_log_tau;
                }
                Err(_) => return f64::NEG_INFINITY,
            }
        }
        lp
    }

    /// Kernel value only.
    pub fn logp(&self, coords: &[f64]) -> f64 {
        let mut grad = vec![0.0; self.dim()];
        self.logp_grad(coords, &mut grad)
    }
}
