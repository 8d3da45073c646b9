//! Synthetic dataset generation: covariates, ICAR-correlated frailties,
//! zero-inflation, and NHPP event times on the total-time scale under a
//! power-law or sinusoidal baseline.
//!
//! Scenario design: x1 ~ Bernoulli(0.7), x2 and z1 standard normal, strata
//! uniform over the areas, every individual censored at the end of the
//! follow-up window. Power-law event times come from exact inversion of the
//! cumulative; other baselines use Lewis–Shedler thinning with a gridded
//! bound.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Individual, RecurrentDataset, SpatialGraph};
use crate::error::{Error, Result};
use crate::sampler::stream_rng;
use crate::special::sigmoid;

/// Baseline intensity used to generate event times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BaselineGenerator {
    PowerLaw { alpha1: f64, alpha2: f64 },
    /// λ(t) = 1 + b(1 + sin(0.25 π t)); strictly positive for b > −0.5.
    Sinusoid { b: f64 },
}

/// 1 + b(1 + sin(0.25 π t)).
pub fn sinusoid_intensity(b: f64, t: f64) -> f64 {
    1.0 + b * (1.0 + (0.25 * std::f64::consts::PI * t).sin())
}

impl BaselineGenerator {
    pub fn intensity(&self, t: f64) -> f64 {
        match *self {
            BaselineGenerator::PowerLaw { alpha1, alpha2 } => {
                if t <= 0.0 {
                    0.0
                } else {
                    alpha1 * alpha2 * t.powf(alpha2 - 1.0)
                }
            }
            BaselineGenerator::Sinusoid { b } => sinusoid_intensity(b, t),
        }
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        match *self {
            BaselineGenerator::PowerLaw { alpha1, alpha2 } => alpha1 * t.powf(alpha2),
            BaselineGenerator::Sinusoid { b } => {
                let pi4 = 0.25 * std::f64::consts::PI;
                (1.0 + b) * t + b / pi4 * (1.0 - (pi4 * t).cos())
            }
        }
    }

    /// Window T with Λ0(T) = `target_events`, mirroring the expected-count
    /// labels used when reporting scenarios.
    pub fn solve_window(&self, target_events: f64) -> Result<f64> {
        if !(target_events > 0.0) {
            return Err(Error::Domain(format!(
                "target event count must be positive, got {target_events}"
            )));
        }
        match *self {
            BaselineGenerator::PowerLaw { alpha1, alpha2 } => {
                Ok((target_events / alpha1).powf(1.0 / alpha2))
            }
            BaselineGenerator::Sinusoid { b } => {
                if b <= -0.5 {
                    return Err(Error::Domain(
                        "sinusoid amplitude must exceed -0.5".into(),
                    ));
                }
                let mut lo = 0.0;
                let mut hi = 1.0;
                while self.cumulative(hi) < target_events {
                    hi *= 2.0;
                    if hi > 1e12 {
                        return Err(Error::Domain("window solve diverged".into()));
                    }
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cumulative(mid) < target_events {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }
}

/// True zero-inflation mechanism of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ZeroInflationTruth {
    /// Constant at-risk probability π.
    Constant { pi: f64 },
    /// π_i = logistic(ψ0 + ψ1 z_{i1}).
    Logistic { psi0: f64, psi1: f64 },
}

/// Full simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub sample_size: usize,
    /// Follow-up window T shared by every individual.
    pub window: f64,
    pub baseline: BaselineGenerator,
    /// Coefficients for (x1, x2).
    pub beta: Vec<f64>,
    pub zero_inflation: ZeroInflationTruth,
    pub tau: f64,
    pub graph: SpatialGraph,
    pub replications: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_size < 1 {
            return Err(Error::InvalidSpec("sample size must be at least 1".into()));
        }
        if !(self.window > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "follow-up window must be positive, got {}",
                self.window
            )));
        }
        if self.replications < 1 {
            return Err(Error::InvalidSpec("need at least one replication".into()));
        }
        if self.beta.len() != 2 {
            return Err(Error::InvalidSpec(
                "scenario design has two intensity covariates (x1, x2)".into(),
            ));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "spatial precision must be positive, got {}",
                self.tau
            )));
        }
        if let ZeroInflationTruth::Constant { pi } = self.zero_inflation {
            if !(0.0..=1.0).contains(&pi) {
                return Err(Error::InvalidSpec(format!(
                    "constant at-risk probability must lie in [0, 1], got {pi}"
                )));
            }
        }
        if let BaselineGenerator::Sinusoid { b } = self.baseline {
            if b <= -0.5 {
                return Err(Error::InvalidSpec(
                    "sinusoid amplitude must exceed -0.5 for positivity".into(),
                ));
            }
        }
        Ok(())
    }
}

/// True parameter record written alongside every simulated replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub replicate: usize,
    pub window: f64,
    pub baseline: BaselineGenerator,
    pub beta: Vec<f64>,
    pub zero_inflation: ZeroInflationTruth,
    pub tau: f64,
    pub omega: Vec<f64>,
}

/// Draws the frailty field from the ICAR pseudo-density with precision
/// τ(D − A), restricted to the orthogonal complement of the per-component
/// constant vectors; component means are projected to exactly zero.
pub fn sample_icar_field(
    graph: &SpatialGraph,
    tau: f64,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<f64>> {
    let n = graph.num_areas();
    if n < 2 {
        return Err(Error::InvalidSpec(
            "spatial field needs at least two areas".into(),
        ));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("precision must be positive, got {tau}")));
    }
    let mut precision = DMatrix::<f64>::zeros(n, n);
    for &(a, b) in graph.edges() {
        precision[(a, a)] += tau;
        precision[(b, b)] += tau;
        precision[(a, b)] -= tau;
        precision[(b, a)] -= tau;
    }
    let eig = precision.symmetric_eigen();
    let tol = 1e-9 * tau * n as f64;
    let mut field = DVector::<f64>::zeros(n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > tol {
            let z: f64 = rng.sample(StandardNormal);
            field += eig.eigenvectors.column(k) * (z / lam.sqrt());
        }
    }
    // exact sum-to-zero per connected component
    let labels = graph.connected_components();
    let num_components = labels.iter().max().map_or(0, |&m| m + 1);
    let mut sums = vec![0.0; num_components];
    let mut counts = vec![0usize; num_components];
    for (l, &c) in labels.iter().enumerate() {
        sums[c] += field[l];
        counts[c] += 1;
    }
    let mut omega = vec![0.0; n];
    for (l, &c) in labels.iter().enumerate() {
        omega[l] = field[l] - sums[c] / counts[c] as f64;
    }
    Ok(omega)
}

/// NHPP event times on (0, window] under a power-law baseline scaled by
/// exp(`log_scale`), by exact inversion of the cumulative intensity.
pub fn simulate_plp_event_times(
    alpha1: f64,
    alpha2: f64,
    log_scale: f64,
    window: f64,
    rng: &mut ChaCha12Rng,
) -> Vec<f64> {
    let rate = alpha1 * log_scale.exp();
    let mut events = Vec::new();
    let mut cum = 0.0; // Λ(s) of the previous event
    loop {
        let u: f64 = rng.random();
        cum -= u.ln();
        let t = (cum / rate).powf(1.0 / alpha2);
        if t > window {
            break;
        }
        events.push(t);
    }
    events
}

/// NHPP event times by Lewis–Shedler thinning. The dominating rate defaults
/// to 1.2 × the maximum of `intensity` on a 1,024-point grid.
pub fn simulate_thinned_event_times(
    intensity: impl Fn(f64) -> f64,
    window: f64,
    bound: Option<f64>,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<f64>> {
    let bound = match bound {
        Some(b) => b,
        None => {
            let mut max = 0.0f64;
            for i in 0..=1024 {
                let t = window * i as f64 / 1024.0;
                let v = intensity(t);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Domain(format!(
                        "intensity must be finite and nonnegative on the window, got {v} at t={t}"
                    )));
                }
                max = max.max(v);
            }
            1.2 * max
        }
    };
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::Domain(format!("invalid thinning bound {bound}")));
    }
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        let u: f64 = rng.random();
        t -= u.ln() / bound;
        if t > window {
            break;
        }
        let v: f64 = rng.random();
        if v * bound <= intensity(t) {
            events.push(t);
        }
    }
    Ok(events)
}

/// Event times for one individual under the scenario baseline scaled by
/// exp(`log_scale`).
pub fn simulate_event_times(
    baseline: &BaselineGenerator,
    log_scale: f64,
    window: f64,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<f64>> {
    match *baseline {
        BaselineGenerator::PowerLaw { alpha1, alpha2 } => {
            Ok(simulate_plp_event_times(alpha1, alpha2, log_scale, window, rng))
        }
        BaselineGenerator::Sinusoid { b } => {
            let scale = log_scale.exp();
            simulate_thinned_event_times(
                |t| sinusoid_intensity(b, t) * scale,
                window,
                None,
                rng,
            )
        }
    }
}

/// Generates one replica: covariates, a fresh ICAR frailty field, latent
/// at-risk indicators, and event times, with every individual censored at
/// the end of the window. Replicas are independent streams keyed by
/// (seed, replicate).
pub fn generate_dataset(
    cfg: &ScenarioConfig,
    replicate: usize,
) -> Result<(RecurrentDataset, GroundTruth)> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, replicate as u64);
    let num_areas = cfg.graph.num_areas();
    let omega = sample_icar_field(&cfg.graph, cfg.tau, &mut rng)?;

    let mut individuals = Vec::with_capacity(cfg.sample_size);
    for i in 0..cfg.sample_size {
        let x1 = if rng.random::<f64>() < 0.7 { 1.0 } else { 0.0 };
        let x2: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let stratum = rng.random_range(0..num_areas);
        let pi = match cfg.zero_inflation {
            ZeroInflationTruth::Constant { pi } => pi,
            ZeroInflationTruth::Logistic { psi0, psi1 } => sigmoid(psi0 + psi1 * z1),
        };
        let at_risk = rng.random::<f64>() < pi;
        let event_times = if at_risk {
            let log_scale = cfg.beta[0] * x1 + cfg.beta[1] * x2 + omega[stratum];
            simulate_event_times(&cfg.baseline, log_scale, cfg.window, &mut rng)?
        } else {
            Vec::new()
        };
        individuals.push(Individual {
            id: format!("{:06}", i + 1),
            follow_up_end: cfg.window,
            event_times,
            intensity_covariates: vec![x1, x2],
            zero_covariates: vec![z1],
            stratum,
        });
    }
    let data = RecurrentDataset::new(individuals, 2, 1, num_areas)?;
    let truth = GroundTruth {
        replicate,
        window: cfg.window,
        baseline: cfg.baseline,
        beta: cfg.beta.clone(),
        zero_inflation: cfg.zero_inflation,
        tau: cfg.tau,
        omega,
    };
    Ok((data, truth))
}
