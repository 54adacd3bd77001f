//! Deviation bounds for the missing mass.
//!
//! For `0 < ε < 1` and `n >= ⌈γ_ε⌉ - 1`,
//!
//! ```text
//! P(Y - E[Y] >= ε) <= exp(-c(ε) n ε)      P(Y - E[Y] <= -ε) <= exp(-c(ε) n ε)
//! γ_ε = -2 W_-1(-ε / (2 √e)),   c(ε) = 3 (γ_ε - 1) / (5 γ_ε²)
//! ```
//!
//! `γ_ε` maximizes the pre-optimization exponent
//! `c(γ, ε) = 3 (γ - 1)² / (10 γ² ln(γ/ε))` (per unit `n ε`), which is
//! available here as [`c_general`] together with an independent numeric
//! maximizer, [`optimize_gamma`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambert::lambert_w_minus1;
use crate::real::Real;

/// Upper end of the golden-section bracket for `γ`.
pub const GAMMA_SEARCH_MAX: f64 = 200.0;
/// Absolute tolerance on bisection roots (`γ` and crossover `ε*`).
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// Search interval for crossovers.
pub const CROSSOVER_INTERVAL: (f64, f64) = (1e-6, 0.99);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    Upper,
    Lower,
    TwoSided,
}

impl BoundSide {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundSide::Upper => "upper",
            BoundSide::Lower => "lower",
            BoundSide::TwoSided => "two_sided",
        }
    }
}

/// One evaluation of the missing-mass bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult<T: Real> {
    pub epsilon: T,
    pub n: u64,
    pub gamma: T,
    pub c: T,
    /// `c(ε) n ε`
    pub exponent: T,
    /// Natural log of `bound`.
    pub log_bound: T,
    pub bound: T,
    pub n_min: u64,
    pub domain_ok: bool,
    pub side: BoundSide,
}

impl<T: Real> BoundResult<T> {
    pub const CSV_HEADER: &'static str = "epsilon,n,gamma,c,exponent,bound,n_min,side";

    /// CSV row in [`Self::CSV_HEADER`] order; floats carry 17 significant digits.
    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            self.epsilon.as_f64(),
            self.n,
            self.gamma.as_f64(),
            self.c.as_f64(),
            self.exponent.as_f64(),
            self.bound.as_f64(),
            self.n_min,
            self.side.as_str()
        )
    }
}

/// Comparator bound of the form `exp(-a n ε²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = ""))]
pub struct ComparatorSpec<T: Real> {
    pub coefficient: T,
    pub exponent_power: u32,
    pub side: BoundSide,
    pub source_label: String,
}

const BEREND_KONTOROVICH: &str = "Berend-Kontorovich (2013)";

impl<T: Real> ComparatorSpec<T> {
    pub fn new(coefficient: T, side: BoundSide, source_label: impl Into<String>) -> Result<Self> {
        if !(coefficient > T::zero()) || !coefficient.is_finite() {
            return Err(Error::BadParam(format!("comparator coefficient must be positive, got {coefficient}")));
        }
        Ok(Self { coefficient, exponent_power: 2, side, source_label: source_label.into() })
    }

    /// Default upper-deviation comparator, `a = 1`.
    pub fn default_upper() -> Self {
        Self::new(T::one(), BoundSide::Upper, BEREND_KONTOROVICH).unwrap()
    }

    /// Default lower-deviation comparator, `a = 1.89`.
    pub fn default_lower() -> Self {
        Self::new(T::lit(1.89), BoundSide::Lower, BEREND_KONTOROVICH).unwrap()
    }

    pub fn default_for(side: BoundSide) -> Self {
        match side {
            BoundSide::Lower => Self::default_lower(),
            _ => Self::default_upper(),
        }
    }

    /// `exp(-a n ε²)`
    pub fn bound(&self, epsilon: T, n: u64) -> T {
        (-self.coefficient * T::lit(n as f64) * epsilon.powi(self.exponent_power as i32)).exp()
    }
}

fn check_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::EpsilonOutOfRange { epsilon: epsilon.as_f64() });
    }
    Ok(())
}

fn lambert_argument<T: Real>(epsilon: T) -> T {
    -epsilon / (T::lit(2.0) * T::E().sqrt())
}

/// `γ_ε = -2 W_-1(-ε / (2 √e))`, the root of `γ - 1 - 2 ln(γ/ε) = 0` above 2.
pub fn gamma_eps<T: Real>(epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    Ok(-T::lit(2.0) * lambert_w_minus1(lambert_argument(epsilon))?.value)
}

/// `c(ε) = 3 (γ_ε - 1) / (5 γ_ε²)`
pub fn c_eps<T: Real>(epsilon: T) -> Result<T> {
    let g = gamma_eps(epsilon)?;
    Ok(T::lit(3.0) * (g - T::one()) / (T::lit(5.0) * g * g))
}

/// `3 (γ - 1)² / (10 γ² ln(γ/ε))`, defined for `γ > max(1, e ε)`.
pub fn c_general<T: Real>(gamma: T, epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    if !(gamma > T::one() && gamma > T::E() * epsilon) || !gamma.is_finite() {
        return Err(Error::GammaOutOfDomain { gamma: gamma.as_f64(), epsilon: epsilon.as_f64() });
    }
    let gm1 = gamma - T::one();
    Ok(T::lit(3.0) * gm1 * gm1 / (T::lit(10.0) * gamma * gamma * (gamma / epsilon).ln()))
}

/// `γ - 1 - 2 ln(γ/ε)`; `∂c/∂γ` has the opposite sign for `γ > 1`.
pub fn stationarity_residual<T: Real>(gamma: T, epsilon: T) -> T {
    gamma - T::one() - T::lit(2.0) * (gamma / epsilon).ln()
}

/// Lower end of the admissible `γ` range: `max(e ε, 2)`.
pub fn gamma_lower_limit<T: Real>(epsilon: T) -> T {
    (T::E() * epsilon).max(T::lit(2.0))
}

/// Rejects `γ` outside `max(e ε, 2) < γ < e^n`.
pub fn check_gamma_domain<T: Real>(gamma: T, epsilon: T, n: u64) -> Result<()> {
    check_epsilon(epsilon)?;
    if !(gamma > gamma_lower_limit(epsilon)) || !(gamma.ln() < T::lit(n as f64)) {
        return Err(Error::GammaOutOfDomain { gamma: gamma.as_f64(), epsilon: epsilon.as_f64() });
    }
    Ok(())
}

/// Maximizer of [`c_general`] in `γ` found numerically: golden-section
/// search on `(max(e ε, 2) + 1e-9, 200)`, then bisection on the sign of the
/// derivative around the golden-section estimate.
pub fn optimize_gamma<T: Real>(epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    let objective = |g: T| c_general(g, epsilon).unwrap_or(T::neg_infinity());
    let mut lo = gamma_lower_limit(epsilon) + T::lit(1e-9);
    let mut hi = T::lit(GAMMA_SEARCH_MAX);
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (objective(a), objective(b));
    for _ in 0..200 {
        if hi - lo <= T::tolerance(ROOT_TOLERANCE) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = objective(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = objective(a);
        }
    }
    let estimate = (lo + hi) / T::lit(2.0);

    // Grow a bracket around the estimate on which the stationarity residual
    // changes sign (negative below the maximizer, positive above).
    let floor = gamma_lower_limit(epsilon);
    let mut width = T::lit(1e-6) * estimate;
    let (mut left, mut right) = (estimate - width, estimate + width);
    for _ in 0..60 {
        if stationarity_residual(left, epsilon) < T::zero() && stationarity_residual(right, epsilon) > T::zero() {
            break;
        }
        width = width * T::lit(2.0);
        left = (estimate - width).max(floor);
        right = (estimate + width).min(T::lit(GAMMA_SEARCH_MAX));
    }
    if !(stationarity_residual(left, epsilon) <= T::zero() && stationarity_residual(right, epsilon) >= T::zero()) {
        return Ok(estimate);
    }
    for _ in 0..200 {
        if right - left <= T::tolerance(ROOT_TOLERANCE) * T::lit(1e-3) {
            break;
        }
        let mid = (left + right) / T::lit(2.0);
        if stationarity_residual(mid, epsilon) < T::zero() {
            left = mid;
        } else {
            right = mid;
        }
    }
    Ok((left + right) / T::lit(2.0))
}

/// `⌈γ_ε⌉ - 1`
pub fn min_sample_size<T: Real>(epsilon: T) -> Result<u64> {
    let g = gamma_eps(epsilon)?;
    Ok(g.ceil().to_u64().expect("gamma is finite") - 1)
}

/// Evaluates the bound for one `(ε, n)`; the two-sided bound doubles the
/// one-sided value and caps it at 1. All arithmetic is done on the exponent.
pub fn missing_mass_bound<T: Real>(epsilon: T, n: u64, side: BoundSide) -> Result<BoundResult<T>> {
    let gamma = gamma_eps(epsilon)?;
    let c = T::lit(3.0) * (gamma - T::one()) / (T::lit(5.0) * gamma * gamma);
    let exponent = c * T::lit(n as f64) * epsilon;
    let (log_bound, bound) = match side {
        BoundSide::TwoSided => {
            ((T::LN_2() - exponent).min(T::zero()), (T::lit(2.0) * (-exponent).exp()).min(T::one()))
        }
        _ => (-exponent, (-exponent).exp()),
    };
    let n_min = gamma.ceil().to_u64().expect("gamma is finite") - 1;
    let domain_ok = n >= n_min && gamma.ln() < T::lit(n as f64);
    Ok(BoundResult { epsilon, n, gamma, c, exponent, log_bound, bound, n_min, domain_ok, side })
}

/// `√e exp(W_-1(-ε / (2 √e)))`, which equals `ε / γ_ε`.
pub fn compensation_gap_bound<T: Real>(epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    let w = lambert_w_minus1(lambert_argument(epsilon))?.value;
    Ok(T::E().sqrt() * w.exp())
}

/// Bernstein tail `exp(-ε² / (2 (V + α ε / 3)))`.
pub fn bernstein_bound<T: Real>(variance: T, alpha: T, epsilon: T) -> Result<T> {
    if variance < T::zero() {
        return Err(Error::NegativeVariance(variance.as_f64()));
    }
    if !(alpha > T::zero()) || !(epsilon > T::zero()) {
        return Err(Error::BadParam(format!("need alpha > 0 and epsilon > 0, got {alpha}, {epsilon}")));
    }
    let denom = T::lit(2.0) * (variance + alpha * epsilon / T::lit(3.0));
    Ok((-epsilon * epsilon / denom).exp())
}

/// `(θ/n) e^{-θ}`, the bound on the variance proxy of the absorbed bins.
/// Requires `1 < θ < n` and `e^{-θ} < ε`.
pub fn variance_proxy_bound<T: Real>(theta: T, n: u64, epsilon: T) -> Result<T> {
    let nf = T::lit(n as f64);
    if !(theta > T::one() && theta < nf) || !((-theta).exp() < epsilon) {
        return Err(Error::ThetaOutOfRange { theta: theta.as_f64(), n });
    }
    Ok(theta / nf * (-theta).exp())
}

/// Deviation size `ε*` where `c(ε) n ε = a n ε²`: below `ε*` the bound
/// above is the smaller of the two.
pub fn crossover<T: Real>(comparator: &ComparatorSpec<T>) -> Result<T> {
    let a = comparator.coefficient;
    if !(a > T::zero()) {
        return Err(Error::BadParam(format!("comparator coefficient must be positive, got {a}")));
    }
    let ratio = |e: T| c_eps(e).map(|c| c / e);
    let (lo_end, hi_end) = (T::lit(CROSSOVER_INTERVAL.0), T::lit(CROSSOVER_INTERVAL.1));

    // c(ε)/ε must be strictly decreasing for the root to be unique.
    let grid = 256;
    let mut prev = ratio(lo_end)?;
    for k in 1..=grid {
        let e = lo_end * (hi_end / lo_end).powf(T::count(k) / T::count(grid));
        let r = ratio(e)?;
        if !(r < prev) {
            return Err(Error::NoCrossover { coefficient: a.as_f64() });
        }
        prev = r;
    }

    let f = |e: T| ratio(e).map(|r| r - a);
    let (mut lo, mut hi) = (lo_end, hi_end);
    if !(f(lo)? > T::zero() && f(hi)? < T::zero()) {
        return Err(Error::NoCrossover { coefficient: a.as_f64() });
    }
    while hi - lo > T::tolerance(ROOT_TOLERANCE) {
        let mid = (lo + hi) / T::lit(2.0);
        if f(mid)? > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma_eps(e: f64) -> Result<f64> {
        super::gamma_eps(e)
    }
    fn c_eps(e: f64) -> Result<f64> {
        super::c_eps(e)
    }
    fn c_general(g: f64, e: f64) -> Result<f64> {
        super::c_general(g, e)
    }
    fn missing_mass_bound(e: f64, n: u64, side: BoundSide) -> Result<BoundResult<f64>> {
        super::missing_mass_bound(e, n, side)
    }
    fn min_sample_size(e: f64) -> Result<u64> {
        super::min_sample_size(e)
    }
    fn compensation_gap_bound(e: f64) -> Result<f64> {
        super::compensation_gap_bound(e)
    }
    fn bernstein_bound(v: f64, a: f64, e: f64) -> Result<f64> {
        super::bernstein_bound(v, a, e)
    }
    fn variance_proxy_bound(t: f64, n: u64, e: f64) -> Result<f64> {
        super::variance_proxy_bound(t, n, e)
    }

    /// Bisection on the stationarity equation; independent of Lambert W.
    fn gamma_by_bisection(eps: f64) -> f64 {
        let (mut lo, mut hi) = (gamma_lower_limit(eps) + 1e-12, 1e4);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if stationarity_residual(mid, eps) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_eps(0.1).unwrap();
        assert!((g - 10.26208159291659).abs() < 1e-9 && (g - gamma_by_bisection(0.1)).abs() < 1e-9);
        assert!((gamma_eps(0.3).unwrap() - 7.414939146011516).abs() < 1e-9);
        for eps in [0.0, 1.0, -0.2, 1.5] {
            assert!(matches!(gamma_eps(eps), Err(Error::EpsilonOutOfRange { .. })));
        }
    }

    #[test]
    fn c_examples() {
        assert!((c_eps(0.1).unwrap() - 0.05277022260106967).abs() < 1e-12);
        assert!((c_eps(0.045).unwrap() / 0.045 - 1.002861688115486).abs() < 1e-9);
        assert!((c_eps(0.021).unwrap() / 0.021 - 1.8943762982277221).abs() < 1e-9);
    }

    #[test]
    fn c_general_limits() {
        let eps = 0.2;
        let g = gamma_eps(eps).unwrap();
        let c = c_eps(eps).unwrap();
        assert!((c_general(g, eps).unwrap() - c).abs() <= 1e-12 * c);
        assert!(c_general(1.0 + 1e-9, eps).unwrap() < 1e-15);
        assert!(c_general(1e12, eps).unwrap() < 0.02);
        assert!(matches!(c_general(1.0, eps), Err(Error::GammaOutOfDomain { .. })));
        assert!(matches!(c_general(2.5, 0.95), Err(Error::GammaOutOfDomain { .. })));
    }

    #[test]
    fn optimizer_agrees_and_dominates() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for &eps in &[1e-4, 0.01, 0.1, 0.5, 0.99] {
            let opt = optimize_gamma(eps).unwrap();
            let g = gamma_eps(eps).unwrap();
            assert!((opt - g).abs() <= 1e-6 * g, "eps={eps}: {opt} vs {g}");
            let best = c_general(opt, eps).unwrap();
            for _ in 0..100 {
                let candidate = rng.random_range(gamma_lower_limit(eps) + 1e-6..GAMMA_SEARCH_MAX);
                assert!(best >= c_general(candidate, eps).unwrap());
            }
        }
    }

    #[test]
    fn c_general_is_concave_around_its_peak() {
        // Concave from the domain edge to well past the maximizer; the far
        // tail behaves like 1 / ln(gamma) and turns convex.
        let h = 0.01;
        for &eps in &[1e-4, 0.01, 0.1, 0.5, 0.9, 0.99] {
            let f = |x: f64| c_general(x, eps).unwrap();
            let peak = gamma_eps(eps).unwrap();
            let mut g = gamma_lower_limit::<f64>(eps).max(2.0) + 2.0 * h;
            while g < 1.5 * peak {
                let d2 = f(g + h) - 2.0 * f(g) + f(g - h);
                assert!(d2 < 0.0, "eps={eps} gamma={g} d2={d2}");
                g += 0.05;
            }
            let far = 3.0 * peak;
            assert!(f(far + 1.0) - 2.0 * f(far) + f(far - 1.0) > 0.0, "eps={eps}");
        }
    }

    #[test]
    fn bound_examples() {
        let b = missing_mass_bound(0.1, 100, BoundSide::Upper).unwrap();
        assert!((b.exponent - 0.5277022260106968).abs() < 1e-12);
        assert!((b.bound - 0.5899590059065202).abs() < 1e-12);
        assert!(b.domain_ok && b.n_min == 10);
        assert!(!missing_mass_bound(0.1, 9, BoundSide::Upper).unwrap().domain_ok);
        let two = missing_mass_bound(0.1, 1, BoundSide::TwoSided).unwrap();
        assert_eq!(two.bound, 1.0);
        assert_eq!(missing_mass_bound(0.1, 100, BoundSide::TwoSided).unwrap().bound, 1.0);
        let one = missing_mass_bound(0.1, 400, BoundSide::Upper).unwrap();
        let two = missing_mass_bound(0.1, 400, BoundSide::TwoSided).unwrap();
        assert_eq!(two.bound, 2.0 * one.bound);
        // Far tails stay finite in log space.
        let far = missing_mass_bound(0.5, 1_000_000_000, BoundSide::Lower).unwrap();
        assert!(far.log_bound < -1e6 && far.bound == 0.0);
    }

    #[test]
    fn csv_row_layout() {
        let b = missing_mass_bound(0.1, 100, BoundSide::TwoSided).unwrap();
        let row = b.csv_row();
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), BoundResult::<f64>::CSV_HEADER.split(',').count());
        assert_eq!(cols[1], "100");
        assert_eq!(cols[7], "two_sided");
        assert_eq!(cols[2].parse::<f64>().unwrap(), b.gamma);
    }

    #[test]
    fn min_sample_size_examples() {
        assert_eq!(min_sample_size(0.1).unwrap(), 10);
        assert_eq!(min_sample_size(0.3).unwrap(), 7);
        let mut prev = u64::MAX;
        for k in 1..100 {
            let m = min_sample_size(k as f64 / 100.0).unwrap();
            assert!(m <= prev);
            prev = m;
        }
    }

    #[test]
    fn gap_examples() {
        let gap = compensation_gap_bound(0.1).unwrap();
        assert!((gap - 0.00974461166524198).abs() < 1e-12);
        let mut prev_ratio = f64::INFINITY;
        for k in (1..100).rev() {
            let eps = k as f64 / 100.0;
            let gap = compensation_gap_bound(eps).unwrap();
            assert!(gap < eps);
            assert!(gap / eps < prev_ratio);
            prev_ratio = gap / eps;
        }
        assert!(compensation_gap_bound(1e-8).unwrap() / 1e-8 < 0.05);
    }

    #[test]
    fn bernstein_examples() {
        assert!((bernstein_bound(1.0, 1.0, 1.0).unwrap() - 0.6872892787909722).abs() < 1e-15);
        assert!(bernstein_bound(1.0, 1.0, 1e-9).unwrap() > 1.0 - 1e-15);
        let eps = 0.3;
        assert!((bernstein_bound(0.0, 2.0, eps).unwrap() - (-3.0 * eps / 4.0f64).exp()).abs() < 1e-15);
        assert!(matches!(bernstein_bound(-1.0, 1.0, 1.0), Err(Error::NegativeVariance(_))));
    }

    #[test]
    fn variance_proxy_bound_examples() {
        let eps = 0.1;
        let g = gamma_eps(eps).unwrap();
        let theta = (g / eps).ln();
        let v = variance_proxy_bound(theta, 100, eps).unwrap();
        assert!((v - theta / 100.0 * eps / g).abs() < 1e-15);
        assert!(v < theta / 100.0 * eps);
        assert!(variance_proxy_bound(49.0, 50, 0.1).unwrap() < 1e-20);
        assert!(variance_proxy_bound(0.5, 50, 0.9).is_err());
        assert!(variance_proxy_bound(2.0, 50, 0.1).is_err());
    }

    #[test]
    fn crossover_examples() {
        let up = crossover(&ComparatorSpec::<f64>::default_upper()).unwrap();
        assert!((up - 0.04515681371298963).abs() < 1e-9);
        let low = crossover(&ComparatorSpec::<f64>::default_lower()).unwrap();
        assert!((low - 0.021057476897344697).abs() < 1e-9);
        let strong = crossover(&ComparatorSpec::new(1000.0, BoundSide::Upper, "x").unwrap()).unwrap();
        assert!(strong < 1e-3);
        let too_strong = ComparatorSpec::new(1e9, BoundSide::Upper, "x").unwrap();
        assert!(matches!(crossover(&too_strong), Err(Error::NoCrossover { .. })));
        let too_weak = ComparatorSpec::new(1e-3, BoundSide::Upper, "x").unwrap();
        assert!(matches!(crossover(&too_weak), Err(Error::NoCrossover { .. })));
    }

    #[test]
    fn domain_guard() {
        assert!(check_gamma_domain(10.0, 0.1, 10).is_ok());
        assert!(check_gamma_domain(1.5, 0.1, 10).is_err());
        assert!(check_gamma_domain(10.0, 0.1, 2).is_err());
    }

    #[test]
    fn f32_bound() {
        let b = super::missing_mass_bound(0.1f32, 100, BoundSide::Upper).unwrap();
        assert!((b.bound - 0.58995897).abs() < 1e-4);
    }
}
