//! Baseline intensity families and the multiplicative covariate/frailty link.
//!
//! Two baselines: the power law λ0(t) = α1 α2 t^{α2−1}, and a
//! Bernstein-polynomial expansion λ_d(t|γ) = Σ_k γ_k g_{d,k}(t) whose basis
//! g_{d,k}(t) = f_Beta(t/ζ | k, d−k+1)/ζ integrates in closed form to the
//! regularized incomplete beta. Analytic partial derivatives with respect to
//! the log-scale parameters back the likelihood gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{inc_beta_reg, ln_beta};

/// Power-law baseline: λ0(t) = α1 α2 t^{α2−1}, Λ0(t) = α1 t^{α2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawBaseline {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl PowerLawBaseline {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha1 > 0.0) || !(alpha2 > 0.0) {
            return Err(Error::Domain(format!(
                "power-law parameters must be positive, got ({alpha1}, {alpha2})"
            )));
        }
        Ok(Self { alpha1, alpha2 })
    }

    pub fn intensity(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("intensity requires t > 0, got {t}")));
        }
        Ok(self.alpha1 * self.alpha2 * t.powf(self.alpha2 - 1.0))
    }

    pub fn cumulative(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::Domain(format!(
                "cumulative requires t >= 0, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(self.alpha1 * t.powf(self.alpha2))
    }

    /// (∂ log λ0/∂ log α1, ∂ log λ0/∂ log α2) at t.
    pub fn d_log_intensity(&self, t: f64) -> (f64, f64) {
        (1.0, 1.0 + self.alpha2 * t.ln())
    }

    /// (∂ Λ0/∂ log α1, ∂ Λ0/∂ log α2) at t.
    pub fn d_cumulative(&self, t: f64) -> (f64, f64) {
        if t == 0.0 {
            return (0.0, 0.0);
        }
        let cum = self.alpha1 * t.powf(self.alpha2);
        (cum, cum * self.alpha2 * t.ln())
    }
}

/// Scaled Beta-density basis g_{d,k}(t) = f_Beta(t/ζ | k, d−k+1)/ζ for
/// k = 1..d, evaluated at t in [0, ζ].
pub fn bernstein_basis(degree: usize, support: f64, t: f64) -> Result<Vec<f64>> {
    check_basis_args(degree, support, t)?;
    let u = t / support;
    let d = degree as f64;
    let mut out = vec![0.0; degree];
    if u == 0.0 {
        // only k = 1 is nonzero: f_Beta(0 | 1, d) = d
        out[0] = d / support;
        return Ok(out);
    }
    if u == 1.0 {
        // only k = d: f_Beta(1 | d, 1) = d
        out[degree - 1] = d / support;
        return Ok(out);
    }
    let ln_u = u.ln();
    let ln_1mu = (-u).ln_1p();
    for (i, slot) in out.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        let a = k;
        let b = d - k + 1.0;
        let ln_pdf = (a - 1.0) * ln_u + (b - 1.0) * ln_1mu - ln_beta(a, b);
        *slot = ln_pdf.exp() / support;
    }
    Ok(out)
}

/// Integrated basis G_{d,k}(t) = F_Beta(t/ζ | k, d−k+1), k = 1..d.
pub fn bernstein_cumulative_basis(degree: usize, support: f64, t: f64) -> Result<Vec<f64>> {
    check_basis_args(degree, support, t)?;
    let u = t / support;
    let d = degree as f64;
    Ok((1..=degree)
        .map(|k| inc_beta_reg(k as f64, d - k as f64 + 1.0, u))
        .collect())
}

fn check_basis_args(degree: usize, support: f64, t: f64) -> Result<()> {
    if degree < 1 {
        return Err(Error::Domain("Bernstein degree must be at least 1".into()));
    }
    if !(support > 0.0) {
        return Err(Error::Domain(format!(
            "Bernstein support must be positive, got {support}"
        )));
    }
    if !(0.0..=support).contains(&t) {
        return Err(Error::Domain(format!(
            "t = {t} outside the baseline support [0, {support}]"
        )));
    }
    Ok(())
}

/// Bernstein-polynomial baseline with coefficients stored on the log scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinBaseline {
    gamma_log: Vec<f64>,
    support: f64,
}

impl BernsteinBaseline {
    pub fn new(gamma_log: Vec<f64>, support: f64) -> Result<Self> {
        if gamma_log.is_empty() {
            return Err(Error::Domain("Bernstein degree must be at least 1".into()));
        }
        if !(support > 0.0) {
            return Err(Error::Domain(format!(
                "Bernstein support must be positive, got {support}"
            )));
        }
        Ok(Self { gamma_log, support })
    }

    pub fn degree(&self) -> usize {
        self.gamma_log.len()
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn gamma_log(&self) -> &[f64] {
        &self.gamma_log
    }

    /// γ_k = exp(log γ_k).
    pub fn gamma(&self) -> Vec<f64> {
        self.gamma_log.iter().map(|&x| x.exp()).collect()
    }

    pub fn intensity(&self, t: f64) -> Result<f64> {
        let basis = bernstein_basis(self.degree(), self.support, t)?;
        Ok(basis
            .iter()
            .zip(&self.gamma_log)
            .map(|(g, lg)| g * lg.exp())
            .sum())
    }

    pub fn cumulative(&self, t: f64) -> Result<f64> {
        let basis = bernstein_cumulative_basis(self.degree(), self.support, t)?;
        Ok(basis
            .iter()
            .zip(&self.gamma_log)
            .map(|(g, lg)| g * lg.exp())
            .sum())
    }

    /// ∂λ_d/∂ log γ_k = γ_k g_{d,k}(t) for every k.
    pub fn d_intensity_dlog_gamma(&self, t: f64) -> Result<Vec<f64>> {
        let basis = bernstein_basis(self.degree(), self.support, t)?;
        Ok(basis
            .iter()
            .zip(&self.gamma_log)
            .map(|(g, lg)| g * lg.exp())
            .collect())
    }

    /// ∂Λ_d/∂ log γ_k = γ_k G_{d,k}(t) for every k.
    pub fn d_cumulative_dlog_gamma(&self, t: f64) -> Result<Vec<f64>> {
        let basis = bernstein_cumulative_basis(self.degree(), self.support, t)?;
        Ok(basis
            .iter()
            .zip(&self.gamma_log)
            .map(|(g, lg)| g * lg.exp())
            .collect())
    }
}

/// Either baseline family behind one interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Baseline {
    PowerLaw(PowerLawBaseline),
    Bernstein(BernsteinBaseline),
}

impl Baseline {
    pub fn intensity(&self, t: f64) -> Result<f64> {
        match self {
            Baseline::PowerLaw(b) => b.intensity(t),
            Baseline::Bernstein(b) => b.intensity(t),
        }
    }

    pub fn cumulative(&self, t: f64) -> Result<f64> {
        match self {
            Baseline::PowerLaw(b) => b.cumulative(t),
            Baseline::Bernstein(b) => b.cumulative(t),
        }
    }
}

/// λ(t) = λ0(t) exp(x'β + ω): the baseline scaled by a time-constant factor,
/// so the cumulative scales by the same factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkedIntensity {
    baseline: Baseline,
    log_scale: f64,
}

impl LinkedIntensity {
    pub fn new(baseline: Baseline, covariates: &[f64], coefficients: &[f64], frailty: f64) -> Result<Self> {
        if covariates.len() != coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate(s) vs {} coefficient(s)",
                covariates.len(),
                coefficients.len()
            )));
        }
        let linear: f64 = covariates
            .iter()
            .zip(coefficients)
            .map(|(x, b)| x * b)
            .sum();
        Ok(Self {
            baseline,
            log_scale: linear + frailty,
        })
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn intensity(&self, t: f64) -> Result<f64> {
        Ok(self.baseline.intensity(t)? * self.log_scale.exp())
    }

    pub fn cumulative(&self, t: f64) -> Result<f64> {
        Ok(self.baseline.cumulative(t)? * self.log_scale.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson_quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        // composite Simpson with n (even) panels
        let n = if n % 2 == 0 { n } else { n + 1 };
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn plp_intensity_examples() {
        let hpp = PowerLawBaseline::new(2.0, 1.0).unwrap();
        assert!((hpp.intensity(5.0).unwrap() - 2.0).abs() < 1e-15);

        let b = PowerLawBaseline::new(0.5, 1.3).unwrap();
        assert!((b.intensity(1.0).unwrap() - 0.65).abs() < 1e-15);
        let expect = 0.5 * 1.3 * 4f64.powf(0.3);
        assert!((b.intensity(4.0).unwrap() - expect).abs() < 1e-12);

        // cross-check against the numerical derivative of Λ0 at t = 4
        let h = 1e-6;
        let num = (b.cumulative(4.0 + h).unwrap() - b.cumulative(4.0 - h).unwrap()) / (2.0 * h);
        assert!((b.intensity(4.0).unwrap() - num).abs() < 1e-7);

        assert!(b.intensity(0.0).is_err());
        assert!(b.intensity(-1.0).is_err());
    }

    #[test]
    fn plp_cumulative_examples() {
        let b = PowerLawBaseline::new(0.5, 1.3).unwrap();
        assert_eq!(b.cumulative(0.0).unwrap(), 0.0);
        // 0.5·t^1.3 = 6.3 at t ≈ 7.0175
        let t = (6.3f64 / 0.5).powf(1.0 / 1.3);
        assert!((b.cumulative(t).unwrap() - 6.3).abs() < 1e-10);
        assert!((b.cumulative(7.02).unwrap() - 6.3).abs() < 0.01);

        let sq = PowerLawBaseline::new(1.0, 2.0).unwrap();
        assert!((sq.cumulative(3.0).unwrap() - 9.0).abs() < 1e-12);
        assert!(sq.cumulative(-0.1).is_err());
    }

    #[test]
    fn basis_examples() {
        // Beta(1,1) is uniform
        let v = bernstein_basis(1, 1.0, 0.3).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0] - 1.0).abs() < 1e-14);

        // Beta(1,2) and Beta(2,1) densities at 0.5 both equal 1.0
        let v = bernstein_basis(2, 1.0, 0.5).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-13);
        assert!((v[1] - 1.0).abs() < 1e-13);

        // left endpoint, d=3, ζ=2: only k=1 nonzero, value 3/2
        let v = bernstein_basis(3, 2.0, 0.0).unwrap();
        assert_eq!(v, vec![1.5, 0.0, 0.0]);

        // right endpoint: only k=d, value d/ζ
        let v = bernstein_basis(4, 2.0, 2.0).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0, 2.0]);

        assert!(bernstein_basis(3, 2.0, 2.5).is_err());
        assert!(bernstein_basis(3, 2.0, -0.1).is_err());
    }

    #[test]
    fn basis_matches_statrs_beta_pdf() {
        use statrs::distribution::{Beta, Continuous};
        let (d, zeta) = (6usize, 3.0);
        for i in 1..30 {
            let t = zeta * i as f64 / 30.0;
            let v = bernstein_basis(d, zeta, t).unwrap();
            for k in 1..=d {
                let beta = Beta::new(k as f64, (d - k + 1) as f64).unwrap();
                let want = beta.pdf(t / zeta) / zeta;
                assert!((v[k - 1] - want).abs() < 1e-11, "k={k} t={t}");
            }
        }
    }

    #[test]
    fn each_basis_function_integrates_to_one() {
        let (d, zeta) = (7usize, 2.5);
        for k in 0..d {
            let integral = simpson_quadrature(
                |t| bernstein_basis(d, zeta, t).unwrap()[k],
                0.0,
                zeta,
                4096,
            );
            assert!((integral - 1.0).abs() < 1e-8, "k={} got {integral}", k + 1);
        }
    }

    #[test]
    fn cumulative_basis_is_a_cdf() {
        let (d, zeta) = (5usize, 4.0);
        let at_zero = bernstein_cumulative_basis(d, zeta, 0.0).unwrap();
        assert!(at_zero.iter().all(|&g| g == 0.0));
        let at_end = bernstein_cumulative_basis(d, zeta, zeta).unwrap();
        assert!(at_end.iter().all(|&g| (g - 1.0).abs() < 1e-12));
        let mut prev = at_zero;
        for i in 1..=64 {
            let t = zeta * i as f64 / 64.0;
            let cur = bernstein_cumulative_basis(d, zeta, t).unwrap();
            for (p, c) in prev.iter().zip(&cur) {
                assert!(c >= p, "G must be nondecreasing");
            }
            prev = cur;
        }
    }

    #[test]
    fn degree_one_baseline_is_constant() {
        // d=1, γ=[2], ζ=4: intensity 0.5, cumulative 0.5·t
        let b = BernsteinBaseline::new(vec![2f64.ln()], 4.0).unwrap();
        for &t in &[0.3, 1.0, 2.2, 3.9] {
            assert!((b.intensity(t).unwrap() - 0.5).abs() < 1e-13);
            assert!((b.cumulative(t).unwrap() - 0.5 * t).abs() < 1e-13);
        }
        assert_eq!(b.cumulative(0.0).unwrap(), 0.0);
    }

    #[test]
    fn bernstein_cumulative_matches_quadrature() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let d = 5usize;
        let zeta = 1.0;
        let gamma_log: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = BernsteinBaseline::new(gamma_log, zeta).unwrap();
        let t = 0.7;
        let quad = simpson_quadrature(|s| b.intensity(s).unwrap(), 0.0, t, 8192);
        assert!((b.cumulative(t).unwrap() - quad).abs() < 1e-8);
    }

    #[test]
    fn analytic_partials_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let h = 1e-6;
        // power law, 100 random points
        for _ in 0..100 {
            let a1 = rng.random_range(0.2..3.0);
            let a2 = rng.random_range(0.3..2.5);
            let t = rng.random_range(0.05..8.0);
            let b = PowerLawBaseline::new(a1, a2).unwrap();
            let (d1, d2) = b.d_log_intensity(t);
            let (c1, c2) = b.d_cumulative(t);
            let up1 = PowerLawBaseline::new((a1.ln() + h).exp(), a2).unwrap();
            let dn1 = PowerLawBaseline::new((a1.ln() - h).exp(), a2).unwrap();
            let up2 = PowerLawBaseline::new(a1, (a2.ln() + h).exp()).unwrap();
            let dn2 = PowerLawBaseline::new(a1, (a2.ln() - h).exp()).unwrap();
            let fd_li1 = (up1.intensity(t).unwrap().ln() - dn1.intensity(t).unwrap().ln()) / (2.0 * h);
            let fd_li2 = (up2.intensity(t).unwrap().ln() - dn2.intensity(t).unwrap().ln()) / (2.0 * h);
            let fd_c1 = (up1.cumulative(t).unwrap() - dn1.cumulative(t).unwrap()) / (2.0 * h);
            let fd_c2 = (up2.cumulative(t).unwrap() - dn2.cumulative(t).unwrap()) / (2.0 * h);
            for (an, fd) in [(d1, fd_li1), (d2, fd_li2), (c1, fd_c1), (c2, fd_c2)] {
                assert!(
                    (an - fd).abs() <= 1e-6 * (1.0 + an.abs()),
                    "analytic {an} vs fd {fd}"
                );
            }
        }
        // Bernstein, 100 random points
        for _ in 0..100 {
            let d = rng.random_range(1..=8usize);
            let zeta = rng.random_range(0.5..5.0);
            let gl: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let t = rng.random_range(0.0..=zeta);
            let b = BernsteinBaseline::new(gl.clone(), zeta).unwrap();
            let di = b.d_intensity_dlog_gamma(t).unwrap();
            let dc = b.d_cumulative_dlog_gamma(t).unwrap();
            for k in 0..d {
                let mut up = gl.clone();
                up[k] += h;
                let mut dn = gl.clone();
                dn[k] -= h;
                let bu = BernsteinBaseline::new(up, zeta).unwrap();
                let bd = BernsteinBaseline::new(dn, zeta).unwrap();
                let fd_i = (bu.intensity(t).unwrap() - bd.intensity(t).unwrap()) / (2.0 * h);
                let fd_c = (bu.cumulative(t).unwrap() - bd.cumulative(t).unwrap()) / (2.0 * h);
                assert!((di[k] - fd_i).abs() <= 1e-6 * (1.0 + di[k].abs()));
                assert!((dc[k] - fd_c).abs() <= 1e-6 * (1.0 + dc[k].abs()));
            }
        }
    }

    #[test]
    fn link_is_proportional() {
        let base = Baseline::PowerLaw(PowerLawBaseline::new(0.5, 1.3).unwrap());
        let plain = LinkedIntensity::new(base.clone(), &[], &[], 0.0).unwrap();
        for &t in &[0.5, 1.0, 3.0] {
            assert_eq!(plain.intensity(t).unwrap(), base.intensity(t).unwrap());
        }

        // x'β + ω = log 2 doubles both functions everywhere
        let doubled = LinkedIntensity::new(base.clone(), &[1.0], &[2f64.ln()], 0.0).unwrap();
        for &t in &[0.5, 1.0, 3.0] {
            let r = doubled.intensity(t).unwrap() / base.intensity(t).unwrap();
            assert!((r - 2.0).abs() < 1e-12);
            let rc = doubled.cumulative(t).unwrap() / base.cumulative(t).unwrap();
            assert!((rc - 2.0).abs() < 1e-12);
        }

        // frailty contrast on the log scale: exp(ω_B)=1.1064, exp(ω_A)=0.9919
        // gives a rate ratio of ≈ 1.1154 at every t
        let delta = (1.1064f64).ln() - (0.9919f64).ln();
        let a = LinkedIntensity::new(base.clone(), &[], &[], 0.0).unwrap();
        let b = LinkedIntensity::new(base, &[], &[], delta).unwrap();
        for &t in &[0.4, 2.0, 6.5] {
            let ratio = b.intensity(t).unwrap() / a.intensity(t).unwrap();
            assert!((ratio - 1.1154).abs() < 1e-3);
            assert!((ratio - delta.exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn link_rejects_dimension_mismatch() {
        let base = Baseline::PowerLaw(PowerLawBaseline::new(1.0, 1.0).unwrap());
        assert!(LinkedIntensity::new(base, &[1.0, 2.0], &[0.5], 0.0).is_err());
    }

    proptest::proptest! {
        // intensity ratio between two linear-predictor shifts is exactly exp(δ)
        #[test]
        fn proportional_intensity_property(
            delta in -3.0f64..3.0,
            t in 0.01f64..4.0,
            a1 in 0.1f64..3.0,
            a2 in 0.3f64..2.0,
        ) {
            let base = Baseline::PowerLaw(PowerLawBaseline::new(a1, a2).unwrap());
            let lo = LinkedIntensity::new(base.clone(), &[], &[], 0.0).unwrap();
            let hi = LinkedIntensity::new(base, &[], &[], delta).unwrap();
            let ratio = hi.intensity(t).unwrap() / lo.intensity(t).unwrap();
            proptest::prop_assert!((ratio - delta.exp()).abs() <= 1e-12 * delta.exp());
        }
    }
}
