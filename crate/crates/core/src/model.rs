//! Model specification: variant, baseline family, covariate placement and
//! prior hyperparameters.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// The six model variants.
///
/// `Se` marks spatially structured frailties, `Cov` a logistic regression on
/// the zero-inflation probability, and the `Szi*` variants swap the
/// parametric baseline for a Bernstein-polynomial one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Nhpp,
    ZiNhpp,
    ZiNhppSe,
    ZiNhppSeCov,
    SziNhppSe,
    SziNhppSeCov,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Nhpp,
        Variant::ZiNhpp,
        Variant::ZiNhppSe,
        Variant::ZiNhppSeCov,
        Variant::SziNhppSe,
        Variant::SziNhppSeCov,
    ];

    /// Whether a zero-inflation mixture is present (all variants but NHPP).
    pub fn has_zero_inflation(self) -> bool {
        !matches!(self, Variant::Nhpp)
    }

    /// Whether area-level frailties with an ICAR prior are present.
    pub fn has_spatial_effects(self) -> bool {
        matches!(
            self,
            Variant::ZiNhppSe | Variant::ZiNhppSeCov | Variant::SziNhppSe | Variant::SziNhppSeCov
        )
    }

    /// Whether π is modelled by a logistic regression (otherwise constant).
    pub fn has_zero_covariates(self) -> bool {
        matches!(self, Variant::ZiNhppSeCov | Variant::SziNhppSeCov)
    }

    /// Whether the baseline is the Bernstein-polynomial expansion.
    pub fn is_semiparametric(self) -> bool {
        matches!(self, Variant::SziNhppSe | Variant::SziNhppSeCov)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NHPP" => Ok(Variant::Nhpp),
            "ZI-NHPP" => Ok(Variant::ZiNhpp),
            "ZI-NHPP-SE" => Ok(Variant::ZiNhppSe),
            "ZI-NHPP-SE-COV" => Ok(Variant::ZiNhppSeCov),
            "SZI-NHPP-SE" => Ok(Variant::SziNhppSe),
            "SZI-NHPP-SE-COV" => Ok(Variant::SziNhppSeCov),
            other => Err(Error::InvalidSpec(format!("unknown variant `{other}`"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Nhpp => "NHPP",
            Variant::ZiNhpp => "ZI-NHPP",
            Variant::ZiNhppSe => "ZI-NHPP-SE",
            Variant::ZiNhppSeCov => "ZI-NHPP-SE-COV",
            Variant::SziNhppSe => "SZI-NHPP-SE",
            Variant::SziNhppSeCov => "SZI-NHPP-SE-COV",
        };
        f.write_str(s)
    }
}

/// Baseline intensity family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineFamily {
    PowerLaw,
    Bernstein { degree: usize },
}

impl fmt::Display for BaselineFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineFamily::PowerLaw => write!(f, "power-law"),
            BaselineFamily::Bernstein { degree } => write!(f, "bernstein(d={degree})"),
        }
    }
}

/// Prior hyperparameters for every parameter block.
///
/// Defaults mirror the simulation-study choices: Gamma(0.1, 0.1) on the
/// power-law parameters, N(0, 4) (variance) on regression coefficients and
/// log-polynomial coefficients, Gamma(0.01, 0.01) on the spatial precision
/// and Beta(1, 1) on a constant π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub alpha1_shape: f64,
    pub alpha1_rate: f64,
    pub alpha2_shape: f64,
    pub alpha2_rate: f64,
    pub beta_mean: f64,
    pub beta_sd: f64,
    pub psi_mean: f64,
    pub psi_sd: f64,
    pub log_gamma_mean: f64,
    pub log_gamma_sd: f64,
    pub tau_shape: f64,
    pub tau_rate: f64,
    pub pi_alpha: f64,
    pub pi_beta: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            alpha1_shape: 0.1,
            alpha1_rate: 0.1,
            alpha2_shape: 0.1,
            alpha2_rate: 0.1,
            beta_mean: 0.0,
            beta_sd: 2.0,
            psi_mean: 0.0,
            psi_sd: 2.0,
            log_gamma_mean: 0.0,
            log_gamma_sd: 2.0,
            tau_shape: 0.01,
            tau_rate: 0.01,
            pi_alpha: 1.0,
            pi_beta: 1.0,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("alpha1_shape", self.alpha1_shape),
            ("alpha1_rate", self.alpha1_rate),
            ("alpha2_shape", self.alpha2_shape),
            ("alpha2_rate", self.alpha2_rate),
            ("beta_sd", self.beta_sd),
            ("psi_sd", self.psi_sd),
            ("log_gamma_sd", self.log_gamma_sd),
            ("tau_shape", self.tau_shape),
            ("tau_rate", self.tau_rate),
            ("pi_alpha", self.pi_alpha),
            ("pi_beta", self.pi_beta),
        ];
        for (name, v) in checks {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "prior hyperparameter {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Declares which named covariate columns enter the intensity linear
/// predictor and which enter the zero-inflation logit. A column may appear
/// on at most one side (identifiability).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovariatePlacement {
    pub intensity: Vec<String>,
    pub zero: Vec<String>,
}

impl CovariatePlacement {
    pub fn new(
        intensity: impl IntoIterator<Item = String>,
        zero: impl IntoIterator<Item = String>,
    ) -> Self {
        Self {
            intensity: intensity.into_iter().collect(),
            zero: zero.into_iter().collect(),
        }
    }
}

/// Full model specification: variant, baseline and priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    pub baseline: BaselineFamily,
    pub priors: PriorConfig,
    pub placement: CovariatePlacement,
}

impl ModelSpec {
    /// Spec with the default baseline for the variant: Bernstein(5) for the
    /// semiparametric variants, power-law otherwise.
    pub fn new(variant: Variant) -> Self {
        let baseline = if variant.is_semiparametric() {
            BaselineFamily::Bernstein { degree: 5 }
        } else {
            BaselineFamily::PowerLaw
        };
        Self {
            variant,
            baseline,
            priors: PriorConfig::default(),
            placement: CovariatePlacement::default(),
        }
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.baseline = BaselineFamily::Bernstein { degree };
        self
    }

    /// Checks internal consistency and compatibility with covariate
    /// dimensions (p, q) of the dataset.
    pub fn validate(&self, intensity_dim: usize, zero_dim: usize) -> Result<()> {
        self.priors.validate()?;
        match (self.variant.is_semiparametric(), self.baseline) {
            (true, BaselineFamily::PowerLaw) => {
                return Err(Error::InvalidSpec(format!(
                    "{} requires a Bernstein baseline",
                    self.variant
                )));
            }
            (false, BaselineFamily::Bernstein { .. }) => {
                return Err(Error::InvalidSpec(format!(
                    "{} requires the power-law baseline",
                    self.variant
                )));
            }
            _ => {}
        }
        if let BaselineFamily::Bernstein { degree } = self.baseline {
            if degree < 1 {
                return Err(Error::InvalidSpec(
                    "Bernstein degree must be at least 1".to_string(),
                ));
            }
        }
        if self.variant.has_zero_covariates() && zero_dim == 0 {
            return Err(Error::InvalidSpec(format!(
                "{} requires at least one zero-inflation covariate",
                self.variant
            )));
        }
        for name in &self.placement.intensity {
            if self.placement.zero.contains(name) {
                return Err(Error::InvalidSpec(format!(
                    "covariate `{name}` cannot enter both the intensity and the zero-inflation logit"
                )));
            }
        }
        if !self.placement.intensity.is_empty() && self.placement.intensity.len() != intensity_dim
        {
            return Err(Error::DimensionMismatch(format!(
                "placement declares {} intensity covariate(s), dataset has {}",
                self.placement.intensity.len(),
                intensity_dim
            )));
        }
        if !self.placement.zero.is_empty() && self.placement.zero.len() != zero_dim {
            return Err(Error::DimensionMismatch(format!(
                "placement declares {} zero-inflation covariate(s), dataset has {}",
                self.placement.zero.len(),
                zero_dim
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_flags() {
        assert!(!Variant::Nhpp.has_zero_inflation());
        assert!(Variant::ZiNhpp.has_zero_inflation());
        assert!(!Variant::ZiNhpp.has_spatial_effects());
        assert!(Variant::SziNhppSeCov.has_spatial_effects());
        assert!(Variant::SziNhppSeCov.has_zero_covariates());
        assert!(Variant::SziNhppSe.is_semiparametric());
    }

    #[test]
    fn variant_round_trips_through_display() {
        for v in Variant::ALL {
            assert_eq!(Variant::parse(&v.to_string()).unwrap(), v);
        }
        assert!(Variant::parse("ZIP").is_err());
    }

    #[test]
    fn baseline_variant_pairing_enforced() {
        let mut spec = ModelSpec::new(Variant::ZiNhppSe);
        assert!(spec.validate(2, 0).is_ok());
        spec.baseline = BaselineFamily::Bernstein { degree: 4 };
        assert!(spec.validate(2, 0).is_err());

        let mut szi = ModelSpec::new(Variant::SziNhppSe);
        assert!(szi.validate(2, 0).is_ok());
        szi.baseline = BaselineFamily::PowerLaw;
        assert!(szi.validate(2, 0).is_err());
    }

    #[test]
    fn cov_variant_requires_zero_covariates() {
        let spec = ModelSpec::new(Variant::ZiNhppSeCov);
        assert!(spec.validate(2, 0).is_err());
        assert!(spec.validate(2, 1).is_ok());
    }

    #[test]
    fn a_covariate_cannot_enter_both_predictors() {
        let mut spec = ModelSpec::new(Variant::SziNhppSeCov);
        spec.placement = CovariatePlacement::new(
            ["sex".to_string()],
            ["sex".to_string()],
        );
        assert!(spec.validate(1, 1).is_err());
    }

    #[test]
    fn degree_zero_rejected() {
        let spec = ModelSpec::new(Variant::SziNhppSe).with_degree(0);
        assert!(spec.validate(0, 0).is_err());
    }

    #[test]
    fn priors_must_be_positive() {
        let mut p = PriorConfig::default();
        p.tau_rate = 0.0;
        assert!(p.validate().is_err());
    }
}
