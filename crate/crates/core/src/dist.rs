//! Normal-distribution toolkit: CDF, quantile and truncated mean for the
//! threshold distribution used by the mean-field solvers.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("quantile requires p in (0,1), got {0}")]
    QuantileOutOfRange(f64),
    #[error("truncated mean requires X in (0,1], got {0}")]
    TruncatedMeanOutOfRange(f64),
}

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

/// Regularized lower incomplete gamma P(a,x) by series expansion.
/// Converges quickly for x < a + 1.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma_half(a)).exp()
}

/// Regularized upper incomplete gamma Q(a,x) by Lentz continued fraction.
/// Converges quickly for x > a + 1.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma_half(a)).exp() * h
}

// Only a = 1/2 is ever needed; ln Γ(1/2) = ln √π.
fn ln_gamma_half(a: f64) -> f64 {
    debug_assert_eq!(a, 0.5);
    LN_SQRT_PI
}

/// Error function via the regularized incomplete gamma function:
/// erf(x) = P(1/2, x²) for x ≥ 0.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    let x2 = x * x;
    if x2 < 1.5 {
        gamma_p_series(0.5, x2)
    } else {
        1.0 - gamma_q_cf(0.5, x2)
    }
}

/// Complementary error function, accurate in the far tail.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    let x2 = x * x;
    if x2 < 1.5 {
        1.0 - gamma_p_series(0.5, x2)
    } else {
        gamma_q_cf(0.5, x2)
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Normal threshold distribution N(mu, sigma). The only family in scope;
/// sigma is the heterogeneity of the initial net fragility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdDistribution {
    mu: f64,
    sigma: f64,
}

impl ThresholdDistribution {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self, DistError> {
        if !(sigma > 0.0) {
            return Err(DistError::NonPositiveSigma(sigma));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// P_θ(x): probability that a threshold lies at or below x.
    pub fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf((x - self.mu) / self.sigma)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        std_normal_pdf((x - self.mu) / self.sigma) / self.sigma
    }

    /// q_p with cdf(q_p) = p, solved by bisection on the CDF.
    pub fn quantile(&self, p: f64) -> Result<f64, DistError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistError::QuantileOutOfRange(p));
        }
        // Bracket generously; the CDF saturates well inside +-10 sigma.
        let mut lo = self.mu - 42.0 * self.sigma;
        let mut hi = self.mu + 42.0 * self.sigma;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * (self.sigma + mid.abs()) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Mean threshold of the failed fraction: first moment of θ below the
    /// X-quantile, normalized by X. Always at or below mu.
    ///
    /// Closed form for the normal family: mu - sigma * φ(Φ⁻¹(X)) / X.
    pub fn truncated_mean_below(&self, x_frac: f64) -> Result<f64, DistError> {
        if !(x_frac > 0.0 && x_frac <= 1.0) {
            return Err(DistError::TruncatedMeanOutOfRange(x_frac));
        }
        if x_frac == 1.0 {
            return Ok(self.mu);
        }
        let q = self.quantile(x_frac)?;
        let z = (q - self.mu) / self.sigma;
        Ok(self.mu - self.sigma * std_normal_pdf(z) / x_frac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Adaptive Simpson quadrature, the independent oracle for the CDF and
    // truncated-mean routines.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, m: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    fn adaptive(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(f, a, lm, m, fa, flm, fm);
        let right = simpson(f, m, rm, b, fm, frm, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
            left + right + (left + right - whole) / 15.0
        } else {
            adaptive(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
                + adaptive(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
        }
    }

    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let f: &dyn Fn(f64) -> f64 = &f;
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = simpson(f, a, m, b, fa, fm, fb);
        adaptive(f, a, b, fa, fm, fb, whole, 1e-13, 48)
    }

    fn oracle_cdf(dist: &ThresholdDistribution, x: f64) -> f64 {
        let lo = dist.mu() - 14.0 * dist.sigma();
        if x <= lo {
            return 0.0;
        }
        integrate(|t| dist.pdf(t), lo, x)
    }

    #[test]
    fn cdf_at_mean_is_half() {
        let d = ThresholdDistribution::normal(0.7, 0.3).unwrap();
        assert!((d.cdf(0.7) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cdf_matches_quadrature_oracle() {
        let d = ThresholdDistribution::normal(0.0, 1.0).unwrap();
        assert!((d.cdf(1.96) - 0.9750).abs() < 1e-4);
        assert!((d.cdf(1.96) - oracle_cdf(&d, 1.96)).abs() < 1e-10);

        let d2 = ThresholdDistribution::normal(0.2, 0.1).unwrap();
        assert!((d2.cdf(0.0) - 0.02275).abs() < 1e-5);
        assert!((d2.cdf(0.0) - oracle_cdf(&d2, 0.0)).abs() < 1e-10);
    }

    #[test]
    fn cdf_monotone_and_bounded() {
        let d = ThresholdDistribution::normal(0.3, 0.4).unwrap();
        let mut prev = 0.0;
        for i in 0..=200 {
            let x = -5.0 + 10.0 * i as f64 / 200.0;
            let c = d.cdf(x);
            assert!((0.0..=1.0).contains(&c));
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn erf_known_values() {
        // erf(1) = 0.8427007929497149, erf(2) = 0.9953222650189527
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-14);
        assert!((erf(2.0) - 0.995_322_265_018_952_7).abs() < 1e-14);
        assert!((erfc(3.0) - 2.209_049_699_858_544e-5).abs() < 1e-18);
        assert!(erf(0.0) == 0.0);
        assert!((erf(-1.0) + erf(1.0)).abs() < 1e-16);
    }

    #[test]
    fn quantile_median_is_mu() {
        let d = ThresholdDistribution::normal(1.3, 0.25).unwrap();
        assert!((d.quantile(0.5).unwrap() - 1.3).abs() < 1e-10);
    }

    #[test]
    fn quantile_matches_oracle() {
        let d = ThresholdDistribution::normal(0.0, 1.0).unwrap();
        let q = d.quantile(0.975).unwrap();
        assert!((q - 1.96).abs() < 1e-2);
        assert!((q - 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn quantile_cdf_round_trip() {
        let d = ThresholdDistribution::normal(-0.4, 2.1).unwrap();
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let q = d.quantile(p).unwrap();
            assert!((d.cdf(q) - p).abs() < 1e-6, "round trip failed at p={p}");
        }
    }

    #[test]
    fn quantile_rejects_out_of_range() {
        let d = ThresholdDistribution::normal(0.0, 1.0).unwrap();
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(-0.2).is_err());
    }

    #[test]
    fn truncated_mean_full_mass_is_mu() {
        let d = ThresholdDistribution::normal(0.6, 0.2).unwrap();
        assert_eq!(d.truncated_mean_below(1.0).unwrap(), 0.6);
    }

    #[test]
    fn truncated_mean_half_standard_normal() {
        let d = ThresholdDistribution::normal(0.0, 1.0).unwrap();
        // -phi(0)/0.5 = -sqrt(2/pi)
        let expected = -(2.0 / std::f64::consts::PI).sqrt();
        assert!((d.truncated_mean_below(0.5).unwrap() - expected).abs() < 1e-10);
        assert!((expected + 0.7979).abs() < 1e-4);
    }

    #[test]
    fn truncated_mean_matches_quadrature_oracle() {
        let d = ThresholdDistribution::normal(0.3, 0.7).unwrap();
        for &x in &[0.05, 0.2, 0.5, 0.8, 0.99] {
            let q = d.quantile(x).unwrap();
            let lo = d.mu() - 14.0 * d.sigma();
            let oracle = integrate(|t| t * d.pdf(t), lo, q) / x;
            let got = d.truncated_mean_below(x).unwrap();
            assert!(
                (got - oracle).abs() < 1e-9,
                "X={x}: got {got}, oracle {oracle}"
            );
            assert!(got <= d.mu());
        }
    }

    #[test]
    fn truncated_mean_monotone_in_x() {
        let d = ThresholdDistribution::normal(0.1, 0.5).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=100 {
            let x = i as f64 / 100.0;
            let m = d.truncated_mean_below(x).unwrap();
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(ThresholdDistribution::normal(0.0, 0.0).is_err());
        assert!(ThresholdDistribution::normal(0.0, -1.0).is_err());
    }
}
