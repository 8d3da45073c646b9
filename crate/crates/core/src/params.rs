//! Parameter bookkeeping: the flat unconstrained sampler coordinates and the
//! bijection to named constrained parameters.
//!
//! Positive parameters (α1, α2, γ_k, τ) live on the log scale, a constant π
//! on the logit scale; regression coefficients and frailties are unchanged.
//! The layout records which contiguous slice of the flat vector each block
//! occupies for the given model.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BaselineFamily, ModelSpec};
use crate::special::{logit, sigmoid};

/// Parameter blocks, in layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    /// (log α1, log α2) for the power-law baseline.
    Alpha,
    /// log γ_1..log γ_d for the Bernstein baseline.
    LogGamma,
    /// Intensity regression coefficients β_1..β_p.
    Beta,
    /// Zero-inflation regression coefficients ψ_0..ψ_q (intercept first).
    Psi,
    /// logit π for a constant zero-inflation probability.
    LogitPi,
    /// log τ, the ICAR precision.
    LogTau,
    /// Frailties ω_1..ω_L.
    Omega,
}

/// Constrained, named parameter values for one model configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedParams {
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    /// Bernstein coefficients γ_k > 0 (constrained scale).
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub psi: Vec<f64>,
    pub pi: Option<f64>,
    pub tau: Option<f64>,
    pub omega: Vec<f64>,
}

impl NamedParams {
    pub fn empty() -> Self {
        Self {
            alpha1: None,
            alpha2: None,
            gamma: Vec::new(),
            beta: Vec::new(),
            psi: Vec::new(),
            pi: None,
            tau: None,
            omega: Vec::new(),
        }
    }
}

/// Maps named blocks to contiguous slices of the flat unconstrained vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterLayout {
    blocks: Vec<(Block, Range<usize>)>,
    names: Vec<String>,
    dim: usize,
}

impl ParameterLayout {
    /// Layout for `spec` on a dataset with p intensity covariates, q
    /// zero-inflation covariates and L spatial strata.
    pub fn for_model(spec: &ModelSpec, p: usize, q: usize, num_areas: usize) -> Self {
        let mut blocks = Vec::new();
        let mut names = Vec::new();
        let mut at = 0usize;
        let push = |block: Block, block_names: Vec<String>, blocks: &mut Vec<_>, names: &mut Vec<String>, at: &mut usize| {
            let len = block_names.len();
            blocks.push((block, *at..*at + len));
            names.extend(block_names);
            *at += len;
        };

        match spec.baseline {
            BaselineFamily::PowerLaw => push(
                Block::Alpha,
                vec!["alpha1".into(), "alpha2".into()],
                &mut blocks,
                &mut names,
                &mut at,
            ),
            BaselineFamily::Bernstein { degree } => push(
                Block::LogGamma,
                (1..=degree).map(|k| format!("gamma{k}")).collect(),
                &mut blocks,
                &mut names,
                &mut at,
            ),
        }
        if p > 0 {
            push(
                Block::Beta,
                (1..=p).map(|j| format!("beta{j}")).collect(),
                &mut blocks,
                &mut names,
                &mut at,
            );
        }
        if spec.variant.has_zero_covariates() {
            push(
                Block::Psi,
                (0..=q).map(|j| format!("psi{j}")).collect(),
                &mut blocks,
                &mut names,
                &mut at,
            );
        } else if spec.variant.has_zero_inflation() {
            push(Block::LogitPi, vec!["pi".into()], &mut blocks, &mut names, &mut at);
        }
        if spec.variant.has_spatial_effects() {
            push(Block::LogTau, vec!["tau".into()], &mut blocks, &mut names, &mut at);
            push(
                Block::Omega,
                (1..=num_areas).map(|l| format!("omega{l}")).collect(),
                &mut blocks,
                &mut names,
                &mut at,
            );
        }
        Self {
            blocks,
            names,
            dim: at,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Display names of the constrained parameters, aligned with coordinates.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn block(&self, block: Block) -> Option<Range<usize>> {
        self.blocks
            .iter()
            .find(|(b, _)| *b == block)
            .map(|(_, r)| r.clone())
    }

    pub fn blocks(&self) -> &[(Block, Range<usize>)] {
        &self.blocks
    }

    /// Named constrained parameters → flat unconstrained coordinates.
    /// Fails if any value violates its support.
    pub fn to_unconstrained(&self, named: &NamedParams) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.dim];
        for (block, range) in &self.blocks {
            match block {
                Block::Alpha => {
                    let a1 = named
                        .alpha1
                        .ok_or_else(|| Error::InvalidSpec("alpha1 missing".into()))?;
                    let a2 = named
                        .alpha2
                        .ok_or_else(|| Error::InvalidSpec("alpha2 missing".into()))?;
                    require_positive("alpha1", a1)?;
                    require_positive("alpha2", a2)?;
                    v[range.start] = a1.ln();
                    v[range.start + 1] = a2.ln();
                }
                Block::LogGamma => {
                    expect_len("gamma", named.gamma.len(), range.len())?;
                    for (slot, &g) in v[range.clone()].iter_mut().zip(&named.gamma) {
                        require_positive("gamma", g)?;
                        *slot = g.ln();
                    }
                }
                Block::Beta => {
                    expect_len("beta", named.beta.len(), range.len())?;
                    v[range.clone()].copy_from_slice(&named.beta);
                }
                Block::Psi => {
                    expect_len("psi", named.psi.len(), range.len())?;
                    v[range.clone()].copy_from_slice(&named.psi);
                }
                Block::LogitPi => {
                    let pi = named
                        .pi
                        .ok_or_else(|| Error::InvalidSpec("pi missing".into()))?;
                    if !(pi > 0.0 && pi < 1.0) {
                        return Err(Error::Domain(format!("pi must lie in (0,1), got {pi}")));
                    }
                    v[range.start] = logit(pi);
                }
                Block::LogTau => {
                    let tau = named
                        .tau
                        .ok_or_else(|| Error::InvalidSpec("tau missing".into()))?;
                    require_positive("tau", tau)?;
                    v[range.start] = tau.ln();
                }
                Block::Omega => {
                    expect_len("omega", named.omega.len(), range.len())?;
                    v[range.clone()].copy_from_slice(&named.omega);
                }
            }
        }
        Ok(v)
    }

    /// Flat unconstrained coordinates → named constrained parameters, plus
    /// the log-Jacobian of the constraining transform,
    /// log |d constrained / d unconstrained|, summed over coordinates.
    pub fn to_constrained(&self, v: &[f64]) -> (NamedParams, f64) {
        assert_eq!(v.len(), self.dim, "coordinate vector length mismatch");
        let mut named = NamedParams::empty();
        let mut log_jac = 0.0;
        for (block, range) in &self.blocks {
            let s = &v[range.clone()];
            match block {
                Block::Alpha => {
                    named.alpha1 = Some(s[0].exp());
                    named.alpha2 = Some(s[1].exp());
                    log_jac += s[0] + s[1];
                }
                Block::LogGamma => {
                    named.gamma = s.iter().map(|&x| x.exp()).collect();
                    log_jac += s.iter().sum::<f64>();
                }
                Block::Beta => named.beta = s.to_vec(),
                Block::Psi => named.psi = s.to_vec(),
                Block::LogitPi => {
                    let pi = sigmoid(s[0]);
                    named.pi = Some(pi);
                    log_jac += pi.ln() + (1.0 - pi).ln();
                }
                Block::LogTau => {
                    named.tau = Some(s[0].exp());
                    log_jac += s[0];
                }
                Block::Omega => named.omega = s.to_vec(),
            }
        }
        (named, log_jac)
    }

    /// Constrained values aligned with `names()` for a coordinate vector.
    pub fn constrained_values(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        let mut out = v.to_vec();
        for (block, range) in &self.blocks {
            match block {
                Block::Alpha | Block::LogGamma | Block::LogTau => {
                    for x in &mut out[range.clone()] {
                        *x = x.exp();
                    }
                }
                Block::LogitPi => out[range.start] = sigmoid(out[range.start]),
                Block::Beta | Block::Psi | Block::Omega => {}
            }
        }
        out
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be strictly positive, got {v}"
        )))
    }
}

fn expect_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{name}: expected {want} value(s), got {got}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Variant;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn layout_for(variant: Variant, degree: usize) -> ParameterLayout {
        let spec = if variant.is_semiparametric() {
            ModelSpec::new(variant).with_degree(degree)
        } else {
            ModelSpec::new(variant)
        };
        ParameterLayout::for_model(&spec, 2, 1, 4)
    }

    fn random_named(layout: &ParameterLayout, rng: &mut ChaCha12Rng) -> NamedParams {
        let mut named = NamedParams::empty();
        for (block, range) in layout.blocks() {
            match block {
                Block::Alpha => {
                    named.alpha1 = Some(rng.random_range(0.05..5.0));
                    named.alpha2 = Some(rng.random_range(0.05..5.0));
                }
                Block::LogGamma => {
                    named.gamma = (0..range.len()).map(|_| rng.random_range(0.05..5.0)).collect();
                }
                Block::Beta => {
                    named.beta = (0..range.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
                }
                Block::Psi => {
                    named.psi = (0..range.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
                }
                Block::LogitPi => named.pi = Some(rng.random_range(0.01..0.99)),
                Block::LogTau => named.tau = Some(rng.random_range(0.05..10.0)),
                Block::Omega => {
                    named.omega = (0..range.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
                }
            }
        }
        named
    }

    #[test]
    fn layout_dimensions_per_variant() {
        assert_eq!(layout_for(Variant::Nhpp, 0).dim(), 2 + 2);
        assert_eq!(layout_for(Variant::ZiNhpp, 0).dim(), 2 + 2 + 1);
        assert_eq!(layout_for(Variant::ZiNhppSe, 0).dim(), 2 + 2 + 1 + 1 + 4);
        assert_eq!(layout_for(Variant::ZiNhppSeCov, 0).dim(), 2 + 2 + 2 + 1 + 4);
        assert_eq!(layout_for(Variant::SziNhppSe, 5).dim(), 5 + 2 + 1 + 1 + 4);
        assert_eq!(layout_for(Variant::SziNhppSeCov, 3).dim(), 3 + 2 + 2 + 1 + 4);
    }

    #[test]
    fn round_trip_is_identity_for_all_variants() {
        // 1,000 random draws per variant, max abs error below 1e-12.
        for variant in Variant::ALL {
            let layout = layout_for(variant, 5);
            let mut rng = ChaCha12Rng::seed_from_u64(97);
            for _ in 0..1000 {
                let named = random_named(&layout, &mut rng);
                let v = layout.to_unconstrained(&named).unwrap();
                let (back, _) = layout.to_constrained(&v);
                let v2 = layout.to_unconstrained(&back).unwrap();
                for (a, b) in v.iter().zip(&v2) {
                    assert!((a - b).abs() < 1e-12, "{variant}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn trivial_coordinates() {
        let layout = layout_for(Variant::ZiNhppSe, 0);
        let mut named = random_named(&layout, &mut ChaCha12Rng::seed_from_u64(3));
        named.alpha1 = Some(1.0);
        named.pi = Some(0.5);
        named.tau = Some(2.0);
        let v = layout.to_unconstrained(&named).unwrap();
        let alpha = layout.block(Block::Alpha).unwrap();
        assert_eq!(v[alpha.start], 0.0); // log 1
        let pi = layout.block(Block::LogitPi).unwrap();
        assert!(v[pi.start].abs() < 1e-15); // logit 0.5
        let tau = layout.block(Block::LogTau).unwrap();
        assert!((v[tau.start] - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_jacobian_matches_finite_differences() {
        // d(constrained)/d(unconstrained) per coordinate, against a central
        // difference of the transform itself.
        for variant in Variant::ALL {
            let layout = layout_for(variant, 4);
            let mut rng = ChaCha12Rng::seed_from_u64(11);
            let named = random_named(&layout, &mut rng);
            let v = layout.to_unconstrained(&named).unwrap();
            let (_, log_jac) = layout.to_constrained(&v);
            let h = 1e-6;
            let mut fd_log_jac = 0.0;
            for i in 0..layout.dim() {
                let mut vp = v.clone();
                vp[i] += h;
                let mut vm = v.clone();
                vm[i] -= h;
                let cp = layout.constrained_values(&vp)[i];
                let cm = layout.constrained_values(&vm)[i];
                let deriv = (cp - cm) / (2.0 * h);
                fd_log_jac += deriv.ln();
            }
            let rel = (log_jac - fd_log_jac).abs() / fd_log_jac.abs().max(1.0);
            assert!(rel < 1e-6, "{variant}: analytic {log_jac} vs fd {fd_log_jac}");
        }
    }

    #[test]
    fn support_violations_rejected() {
        let layout = layout_for(Variant::ZiNhppSe, 0);
        let mut named = random_named(&layout, &mut ChaCha12Rng::seed_from_u64(5));
        named.alpha1 = Some(-1.0);
        assert!(layout.to_unconstrained(&named).is_err());
        named.alpha1 = Some(1.0);
        named.pi = Some(1.0);
        assert!(layout.to_unconstrained(&named).is_err());
    }

    #[test]
    fn tau_log_jacobian_example() {
        // τ = 2 → coordinate log 2, Jacobian contribution log 2.
        let spec = ModelSpec::new(Variant::ZiNhppSe);
        let layout = ParameterLayout::for_model(&spec, 0, 0, 2);
        let mut named = NamedParams::empty();
        named.alpha1 = Some(1.0);
        named.alpha2 = Some(1.0);
        named.pi = Some(0.5);
        named.tau = Some(2.0);
        named.omega = vec![0.0, 0.0];
        let v = layout.to_unconstrained(&named).unwrap();
        let tau_range = layout.block(Block::LogTau).unwrap();
        assert!((v[tau_range.start] - std::f64::consts::LN_2).abs() < 1e-15);
        // With α's at 1 and π at 1/2, the only nonzero exp-jacobian term is τ's;
        // logit π contributes log(1/4).
        let (_, log_jac) = layout.to_constrained(&v);
        let expect = std::f64::consts::LN_2 + (0.25f64).ln();
        assert!((log_jac - expect).abs() < 1e-12);
    }
}
