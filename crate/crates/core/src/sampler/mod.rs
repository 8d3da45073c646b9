//! Self-contained Hamiltonian Monte Carlo.
//!
//! Static-trajectory HMC with a jittered leapfrog count (uniform over
//! [1, cap]), dual-averaging step-size adaptation toward a target acceptance
//! rate, and a diagonal mass matrix estimated from warmup draws in
//! doubling windows. Chains run concurrently with private RNG streams
//! derived from (seed, chain index) and are merged in chain order, so runs
//! with the same seed are bit-identical.

pub mod diagnostics;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::priors::PosteriorKernel;

/// A differentiable unnormalized log-density.
pub trait Target: Sync {
    fn dim(&self) -> usize;
    /// Writes the gradient into `gradient` and returns the log-density.
    fn logp_grad(&self, position: &[f64], gradient: &mut [f64]) -> f64;
}

impl Target for PosteriorKernel {
    fn dim(&self) -> usize {
        PosteriorKernel::dim(self)
    }

    fn logp_grad(&self, position: &[f64], gradient: &mut [f64]) -> f64 {
        PosteriorKernel::logp_grad(self, position, gradient)
    }
}

/// Sampler settings. Defaults: 2 chains of 2,000 iterations with a warmup
/// of 1,000, targeting 80% acceptance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub chains: usize,
    /// Total iterations per chain, warmup included.
    pub iterations: usize,
    pub warmup: usize,
    pub target_accept: f64,
    /// Leapfrog steps are drawn uniformly from [1, max_leapfrog].
    pub max_leapfrog: usize,
    /// Base length of the first mass-matrix adaptation window.
    pub mass_window: usize,
    /// Energy error beyond which a trajectory is flagged divergent.
    pub divergence_threshold: f64,
    /// Initial coordinates are drawn uniformly from ±init_jitter.
    pub init_jitter: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            chains: 2,
            iterations: 2000,
            warmup: 1000,
            target_accept: 0.8,
            max_leapfrog: 256,
            mass_window: 25,
            divergence_threshold: 1000.0,
            init_jitter: 2.0,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains < 1 {
            return Err(Error::InvalidSpec("need at least one chain".into()));
        }
        if self.warmup >= self.iterations {
            return Err(Error::InvalidSpec(format!(
                "warmup ({}) must be smaller than iterations ({})",
                self.warmup, self.iterations
            )));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::InvalidSpec(
                "target acceptance must lie in (0, 1)".into(),
            ));
        }
        if self.max_leapfrog < 1 {
            return Err(Error::InvalidSpec("leapfrog cap must be at least 1".into()));
        }
        Ok(())
    }

    /// Draws kept per chain.
    pub fn kept(&self) -> usize {
        self.iterations - self.warmup
    }
}

/// Deterministic per-stream RNG derived from a base seed and stream index.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&stream.to_le_bytes());
    ChaCha12Rng::from_seed(bytes)
}

/// One chain's kept draws (unconstrained coordinates) and statistics.
#[derive(Debug, Clone)]
pub struct ChainRun {
    pub draws: Vec<Vec<f64>>,
    pub logp: Vec<f64>,
    pub accept_rate: f64,
    pub divergences: usize,
    pub step_size: f64,
}

/// Draws from all chains, merged deterministically by chain index.
#[derive(Debug, Clone)]
pub struct RawSample {
    pub dim: usize,
    pub chains: Vec<ChainRun>,
}

impl RawSample {
    /// Kept draws of coordinate `j`, one vector per chain.
    pub fn coordinate_chains(&self, j: usize) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c.draws.iter().map(|d| d[j]).collect())
            .collect()
    }

    pub fn pooled_coordinate(&self, j: usize) -> Vec<f64> {
        self.chains
            .iter()
            .flat_map(|c| c.draws.iter().map(|d| d[j]))
            .collect()
    }

    pub fn total_divergences(&self) -> usize {
        self.chains.iter().map(|c| c.divergences).sum()
    }

    pub fn mean_accept_rate(&self) -> f64 {
        let s: f64 = self.chains.iter().map(|c| c.accept_rate).sum();
        s / self.chains.len() as f64
    }
}

/// Runs HMC with the default initialization (coordinates iid uniform over
/// ±`init_jitter`).
pub fn run_hmc<T: Target>(target: &T, config: &SamplerConfig) -> Result<RawSample> {
    let jitter = config.init_jitter;
    let dim = target.dim();
    run_hmc_with_init(target, config, move |_chain, rng| {
        (0..dim).map(|_| rng.random_range(-jitter..jitter)).collect()
    })
}

/// Runs HMC with a custom per-chain initializer. The initializer is called
/// repeatedly (up to 100 times per chain) until the target is finite.
pub fn run_hmc_with_init<T, F>(target: &T, config: &SamplerConfig, init: F) -> Result<RawSample>
where
    T: Target,
    F: Fn(usize, &mut ChaCha12Rng) -> Vec<f64> + Sync,
{
    config.validate()?;
    let runs: Vec<Result<ChainRun>> = (0..config.chains)
        .into_par_iter()
        .map(|chain| run_chain(target, config, chain, &init))
        .collect();
    let mut chains = Vec::with_capacity(config.chains);
    for r in runs {
        chains.push(r?);
    }
    Ok(RawSample {
        dim: target.dim(),
        chains,
    })
}

/// One leapfrog trajectory of `steps` steps. Updates position, momentum and
/// gradient buffers in place and returns the log-density at the endpoint.
pub fn leapfrog<T: Target>(
    target: &T,
    position: &mut [f64],
    momentum: &mut [f64],
    gradient: &mut [f64],
    step_size: f64,
    steps: usize,
    inv_mass: &[f64],
) -> f64 {
    let mut logp = f64::NAN;
    for _ in 0..steps {
        for (p, g) in momentum.iter_mut().zip(gradient.iter()) {
            *p += 0.5 * step_size * g;
        }
        for ((q, p), im) in position.iter_mut().zip(momentum.iter()).zip(inv_mass) {
            *q += step_size * p * im;
        }
        logp = target.logp_grad(position, gradient);
        if !logp.is_finite() {
            return logp;
        }
        for (p, g) in momentum.iter_mut().zip(gradient.iter()) {
            *p += 0.5 * step_size * g;
        }
    }
    logp
}

fn kinetic_energy(momentum: &[f64], inv_mass: &[f64]) -> f64 {
    0.5 * momentum
        .iter()
        .zip(inv_mass)
        .map(|(p, im)| p * p * im)
        .sum::<f64>()
}

/// Nesterov dual averaging of the log step size (Hoffman & Gelman 2014).
struct DualAveraging {
    mu: f64,
    log_eps: f64,
    log_eps_bar: f64,
    h_bar: f64,
    count: f64,
    delta: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(eps0: f64, delta: f64) -> Self {
        Self {
            mu: (10.0 * eps0).ln(),
            log_eps: eps0.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            count: 0.0,
            delta,
        }
    }

    fn update(&mut self, accept_prob: f64) -> f64 {
        self.count += 1.0;
        let t = self.count;
        let w = 1.0 / (t + Self::T0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.delta - accept_prob);
        self.log_eps = self.mu - t.sqrt() / Self::GAMMA * self.h_bar;
        let k = t.powf(-Self::KAPPA);
        self.log_eps_bar = k * self.log_eps + (1.0 - k) * self.log_eps_bar;
        self.log_eps.exp()
    }

    fn adapted(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

/// Streaming mean/variance for the mass-matrix windows.
struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((mean, m2), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *mean;
            *mean += d / n;
            *m2 += d * (v - *mean);
        }
    }

    /// Regularized variance estimate, shrunk toward 1e-3 for stability.
    fn regularized_variance(&self) -> Option<Vec<f64>> {
        if self.n < 10 {
            return None;
        }
        let n = self.n as f64;
        Some(
            self.m2
                .iter()
                .map(|m2| {
                    let var = m2 / (n - 1.0);
                    (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
                })
                .collect(),
        )
    }
}

/// Mass-adaptation window boundaries within warmup: an initial fast phase,
/// doubling slow windows, and a terminal fast phase, after Stan's schedule.
fn adaptation_windows(warmup: usize, base_window: usize) -> Vec<(usize, usize)> {
    const INIT_BUFFER: usize = 75;
    const TERM_BUFFER: usize = 150;
    if warmup < INIT_BUFFER + TERM_BUFFER + base_window.max(1) {
        return Vec::new();
    }
    let mut windows = Vec::new();
    let mut start = INIT_BUFFER;
    let mut size = base_window.max(1);
    let end_limit = warmup - TERM_BUFFER;
    while start < end_limit {
        let mut end = start + size;
        // absorb a remainder too small to form the next window
        if end + 2 * size > end_limit {
            end = end_limit;
        }
        windows.push((start, end.min(end_limit)));
        start = end;
        size *= 2;
    }
    windows
}

fn run_chain<T, F>(target: &T, config: &SamplerConfig, chain: usize, init: &F) -> Result<ChainRun>
where
    T: Target,
    F: Fn(usize, &mut ChaCha12Rng) -> Vec<f64>,
{
    let dim = target.dim();
    let mut rng = stream_rng(config.seed, chain as u64);

    // initialization with jittered retries
    let mut position = vec![0.0; dim];
    let mut gradient = vec![0.0; dim];
    let mut logp = f64::NEG_INFINITY;
    let mut ok = false;
    for _ in 0..100 {
        position = init(chain, &mut rng);
        assert_eq!(position.len(), dim, "initializer dimension mismatch");
        logp = target.logp_grad(&position, &mut gradient);
        if logp.is_finite() && gradient.iter().all(|g| g.is_finite()) {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(Error::Sampler(format!(
            "chain {chain}: non-finite target after 100 jittered initializations"
        )));
    }

    let mut inv_mass = vec![1.0; dim];
    let mut eps = find_reasonable_step_size(
        target,
        &position,
        &gradient,
        logp,
        &inv_mass,
        &mut rng,
    );
    let mut averaging = DualAveraging::new(eps, config.target_accept);
    let windows = adaptation_windows(config.warmup, config.mass_window);
    let mut window_idx = 0usize;
    let mut welford = Welford::new(dim);

    let kept = config.kept();
    let mut draws = Vec::with_capacity(kept);
    let mut logps = Vec::with_capacity(kept);
    let mut accept_sum = 0.0;
    let mut divergences = 0usize;
    let mut warmup_divergences = 0usize;

    let mut prop_pos = vec![0.0; dim];
    let mut prop_grad = vec![0.0; dim];
    let mut momentum = vec![0.0; dim];

    for iter in 0..config.iterations {
        let steps = rng.random_range(1..=config.max_leapfrog);
        for (p, im) in momentum.iter_mut().zip(&inv_mass) {
            let z: f64 = rng.sample(StandardNormal);
            *p = z / im.sqrt();
        }
        let h0 = -logp + kinetic_energy(&momentum, &inv_mass);

        prop_pos.copy_from_slice(&position);
        prop_grad.copy_from_slice(&gradient);
        let prop_logp = leapfrog(
            target,
            &mut prop_pos,
            &mut momentum,
            &mut prop_grad,
            eps,
            steps,
            &inv_mass,
        );

        let (delta, divergent) = if prop_logp.is_finite() {
            let h1 = -prop_logp + kinetic_energy(&momentum, &inv_mass);
            let delta = h0 - h1;
            (delta, h1 - h0 > config.divergence_threshold)
        } else {
            (f64::NEG_INFINITY, true)
        };
        let accept_prob = if delta >= 0.0 { 1.0 } else { delta.exp() };
        let u: f64 = rng.random();
        if !divergent && u < accept_prob {
            position.copy_from_slice(&prop_pos);
            gradient.copy_from_slice(&prop_grad);
            logp = prop_logp;
        }

        if iter < config.warmup {
            if divergent {
                warmup_divergences += 1;
            }
            eps = averaging.update(accept_prob);
            if let Some(&(start, end)) = windows.get(window_idx) {
                if iter >= start && iter < end {
                    welford.push(&position);
                }
                if iter + 1 == end {
                    if let Some(var) = welford.regularized_variance() {
                        inv_mass = var;
                        eps = find_reasonable_step_size(
                            target,
                            &position,
                            &gradient,
                            logp,
                            &inv_mass,
                            &mut rng,
                        );
                        averaging = DualAveraging::new(eps, config.target_accept);
                    }
                    welford = Welford::new(dim);
                    window_idx += 1;
                }
            }
            if iter + 1 == config.warmup {
                if warmup_divergences == config.warmup {
                    return Err(Error::Sampler(format!(
                        "chain {chain}: every warmup iteration diverged"
                    )));
                }
                eps = averaging.adapted();
            }
        } else {
            if divergent {
                divergences += 1;
            }
            accept_sum += accept_prob;
            draws.push(position.clone());
            logps.push(logp);
        }
    }

    Ok(ChainRun {
        draws,
        logp: logps,
        accept_rate: accept_sum / kept as f64,
        divergences,
        step_size: eps,
    })
}

/// Doubles or halves the step size until a single leapfrog step crosses 50%
/// acceptance (Hoffman & Gelman 2014, Algorithm 4).
fn find_reasonable_step_size<T: Target>(
    target: &T,
    position: &[f64],
    gradient: &[f64],
    logp: f64,
    inv_mass: &[f64],
    rng: &mut ChaCha12Rng,
) -> f64 {
    let dim = position.len();
    let mut eps = 1.0;
    let mut momentum = vec![0.0; dim];
    for (p, im) in momentum.iter_mut().zip(inv_mass) {
        let z: f64 = rng.sample(StandardNormal);
        *p = z / im.sqrt();
    }
    let h0 = -logp + kinetic_energy(&momentum, inv_mass);

    // probe with a short trajectory rather than a single step so the
    // returned size is stable for the long jittered trajectories used later
    let delta_for = |eps: f64, momentum: &[f64]| -> f64 {
        let mut pos = position.to_vec();
        let mut grad = gradient.to_vec();
        let mut mom = momentum.to_vec();
        let lp = leapfrog(target, &mut pos, &mut mom, &mut grad, eps, 4, inv_mass);
        if lp.is_finite() {
            h0 - (-lp + kinetic_energy(&mom, inv_mass))
        } else {
            f64::NEG_INFINITY
        }
    };

    let mut delta = delta_for(eps, &momentum);
    // shrink first if the very first try is unstable
    while !delta.is_finite() && eps > 1e-10 {
        eps *= 0.5;
        delta = delta_for(eps, &momentum);
    }
    let dir: f64 = if delta > (0.5f64).ln() { 1.0 } else { -1.0 };
    for _ in 0..100 {
        if dir * delta <= -dir * (2.0f64).ln() {
            break;
        }
        eps *= 2.0f64.powf(dir);
        if !(1e-10..=1e3).contains(&eps) {
            break;
        }
        delta = delta_for(eps, &momentum);
    }
    eps.clamp(1e-10, 1e3)
}

/// Draws plus diagnostics for a fitted model: constrained parameter values,
/// the pointwise log-likelihood needed for model selection, and
/// per-parameter convergence statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorSample {
    pub names: Vec<String>,
    /// chain → draw → constrained parameter values.
    pub draws: Vec<Vec<Vec<f64>>>,
    /// chain → draw → per-individual log-likelihood.
    pub pointwise_loglik: Vec<Vec<Vec<f64>>>,
    /// chain → draw → total log-likelihood (row sums of the pointwise matrix).
    pub total_loglik: Vec<Vec<f64>>,
    pub accept_rate: f64,
    pub divergences: usize,
    pub rhat: Vec<f64>,
    pub ess: Vec<f64>,
    pub step_sizes: Vec<f64>,
    pub runtime_secs: f64,
}

impl PosteriorSample {
    pub fn num_chains(&self) -> usize {
        self.draws.len()
    }

    pub fn kept_per_chain(&self) -> usize {
        self.draws.first().map_or(0, |c| c.len())
    }

    pub fn num_params(&self) -> usize {
        self.names.len()
    }

    /// Kept draws of parameter `j`, one vector per chain.
    pub fn parameter_chains(&self, j: usize) -> Vec<Vec<f64>> {
        self.draws
            .iter()
            .map(|c| c.iter().map(|d| d[j]).collect())
            .collect()
    }

    pub fn pooled_parameter(&self, j: usize) -> Vec<f64> {
        self.draws
            .iter()
            .flat_map(|c| c.iter().map(|d| d[j]))
            .collect()
    }

    /// Pooled posterior mean of parameter `j`.
    pub fn mean(&self, j: usize) -> f64 {
        let pooled = self.pooled_parameter(j);
        crate::special::pairwise_sum(&pooled) / pooled.len() as f64
    }

    pub fn max_rhat(&self) -> f64 {
        self.rhat.iter().cloned().fold(f64::NAN, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::diagnostics::{ess_bulk, split_rhat};
    use crate::special::normal_cdf;

    struct StdGaussian {
        dim: usize,
    }

    impl Target for StdGaussian {
        fn dim(&self) -> usize {
            self.dim
        }

        fn logp_grad(&self, position: &[f64], gradient: &mut [f64]) -> f64 {
            let mut lp = 0.0;
            for (g, &x) in gradient.iter_mut().zip(position) {
                *g = -x;
                lp -= 0.5 * x * x;
            }
            lp
        }
    }

    struct CorrelatedGaussian {
        rho: f64,
    }

    impl Target for CorrelatedGaussian {
        fn dim(&self) -> usize {
            2
        }

        fn logp_grad(&self, position: &[f64], gradient: &mut [f64]) -> f64 {
            let (x, y) = (position[0], position[1]);
            let s = 1.0 - self.rho * self.rho;
            gradient[0] = -(x - self.rho * y) / s;
            gradient[1] = -(y - self.rho * x) / s;
            -0.5 * (x * x - 2.0 * self.rho * x * y + y * y) / s
        }
    }

    fn config(seed: u64) -> SamplerConfig {
        SamplerConfig {
            seed,
            max_leapfrog: 32,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn five_dim_gaussian_calibration() {
        let target = StdGaussian { dim: 5 };
        let sample = run_hmc(&target, &config(41)).unwrap();
        for j in 0..5 {
            let chains = sample.coordinate_chains(j);
            let pooled = sample.pooled_coordinate(j);
            let n = pooled.len() as f64;
            let mean = pooled.iter().sum::<f64>() / n;
            let var = pooled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let ess = ess_bulk(&chains).unwrap();
            let mcse = var.sqrt() / ess.sqrt();
            assert!(mean.abs() < 3.0 * mcse, "coord {j}: mean {mean}, mcse {mcse}");
            assert!((var - 1.0).abs() < 0.10, "coord {j}: var {var}");
            let rhat = split_rhat(&chains).unwrap();
            assert!(rhat < 1.01, "coord {j}: rhat {rhat}");
        }
        assert!(
            (sample.mean_accept_rate() - 0.8).abs() < 0.1,
            "accept rate {}",
            sample.mean_accept_rate()
        );
    }

    #[test]
    fn correlated_gaussian_recovers_rho() {
        let target = CorrelatedGaussian { rho: 0.9 };
        let mut cfg = config(7);
        cfg.iterations = 3000;
        cfg.warmup = 1000;
        let sample = run_hmc(&target, &cfg).unwrap();
        let xs = sample.pooled_coordinate(0);
        let ys = sample.pooled_coordinate(1);
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        let mut sxy = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            sxx += (x - mx).powi(2);
            syy += (y - my).powi(2);
            sxy += (x - mx) * (y - my);
        }
        let rho = sxy / (sxx * syy).sqrt();
        assert!((rho - 0.9).abs() < 0.05, "rho {rho}");
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let target = StdGaussian { dim: 3 };
        let mut cfg = config(1234);
        cfg.iterations = 300;
        cfg.warmup = 150;
        let a = run_hmc(&target, &cfg).unwrap();
        let b = run_hmc(&target, &cfg).unwrap();
        for (ca, cb) in a.chains.iter().zip(&b.chains) {
            assert_eq!(ca.draws, cb.draws);
            assert_eq!(ca.logp, cb.logp);
        }
    }

    #[test]
    fn energy_drift_vanishes_with_tiny_steps() {
        let target = StdGaussian { dim: 1 };
        let mut position = vec![0.7];
        let mut gradient = vec![0.0];
        let logp = target.logp_grad(&position, &mut gradient);
        let mut momentum = vec![0.45];
        let inv_mass = vec![1.0];
        let h0 = -logp + kinetic_energy(&momentum, &inv_mass);
        let lp =
            leapfrog(&target, &mut position, &mut momentum, &mut gradient, 1e-4, 10, &inv_mass);
        let h1 = -lp + kinetic_energy(&momentum, &inv_mass);
        assert!((h1 - h0).abs() < 1e-6, "drift {}", h1 - h0);
    }

    #[test]
    fn one_dim_draws_pass_kolmogorov_smirnov() {
        let target = StdGaussian { dim: 1 };
        let mut cfg = config(2024);
        cfg.chains = 2;
        cfg.iterations = 3000;
        cfg.warmup = 1000;
        let sample = run_hmc(&target, &cfg).unwrap();
        let mut pooled = sample.pooled_coordinate(0);
        assert_eq!(pooled.len(), 4000);
        let ess = ess_bulk(&sample.coordinate_chains(0)).unwrap();
        pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = pooled.len();
        let mut d: f64 = 0.0;
        for (i, x) in pooled.iter().enumerate() {
            let cdf = normal_cdf(*x);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((cdf - lo).abs()).max((hi - cdf).abs());
        }
        // α = 0.01 critical value, with the effective sample size standing
        // in for n because of autocorrelation
        let n_eff = ess.min(n as f64);
        assert!(
            d < 1.628 / n_eff.sqrt(),
            "KS statistic {d}, n_eff {n_eff}"
        );
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = SamplerConfig::default();
        cfg.warmup = cfg.iterations;
        assert!(cfg.validate().is_err());
        let mut cfg = SamplerConfig::default();
        cfg.chains = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn init_failure_reported() {
        struct Hostile;
        impl Target for Hostile {
            fn dim(&self) -> usize {
                1
            }
            fn logp_grad(&self, _p: &[f64], g: &mut [f64]) -> f64 {
                g[0] = 0.0;
                f64::NEG_INFINITY
            }
        }
        let err = run_hmc(&Hostile, &config(1)).unwrap_err();
        assert!(matches!(err, Error::Sampler(_)));
    }

    #[test]
    fn adaptation_windows_cover_slow_phase() {
        let w = adaptation_windows(1000, 25);
        assert!(!w.is_empty());
        assert_eq!(w.first().unwrap().0, 75);
        assert_eq!(w.last().unwrap().1, 850);
        for pair in w.windows(2) {
            assert_eq!(pair[0].1, pair[1].0);
        }
        // too-short warmup: no mass adaptation
        assert!(adaptation_windows(100, 25).is_empty());
    }
}
