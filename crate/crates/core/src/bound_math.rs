//! Cost, rate, and efficiency of the exponential-family level-drop
//! distribution, and the payload -> upper-bound-efficiency map.
//!
//! A write consumes `V` voltage levels per cell, where `V` takes values in
//! `{0..K-1}`. Minimizing expected consumption subject to an entropy floor
//! yields a Gibbs-form optimum `P(V=j) = exp(-beta*j) / Z` with
//! `Z = sum_{s=0}^{K-1} exp(-beta*s)`. Its two moments,
//!
//! ```text
//!     cost(beta) = E[V]           (levels consumed per write)
//!     rate(beta) = H(V)           (nats recorded per write)
//! ```
//!
//! have closed forms, and `rate/cost` bounds the coding efficiency a scheme
//! can reach at a given payload.
//!
//! All internal entropy computation is in nats (the identity
//! `d(rate)/d(cost) = beta` only holds there); external interfaces speak bits
//! and convert by `ln 2`.

use serde::Serialize;

use crate::{Error, Result};

/// Above this beta the distribution is numerically a point mass at `V = 0`:
/// `exp(-700)` is within a few hundred ulps of the smallest normal f64, so
/// every `j >= 1` term underflows out of the moments.
const POINT_MASS_BETA: f64 = 700.0;

/// Bisection tolerance on the rate, in bits.
const RATE_TOL_BITS: f64 = 1e-10;

/// Bisection iteration cap; the bracket halves each step so this is generous.
const MAX_BISECTION_ITERS: usize = 200;

/// Parameters of the Gibbs-form level-drop distribution
/// `P(V=j) = exp(-beta*j) / sum_s exp(-beta*s)`, `j in {0..K-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GibbsParams {
    beta: f64,
    levels: u32,
}

impl GibbsParams {
    /// Validates `beta >= 0` (finite) and `levels >= 2`.
    pub fn new(beta: f64, levels: u32) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidBeta(beta));
        }
        if levels < 2 {
            return Err(Error::InvalidLevels(levels as u64));
        }
        Ok(Self { beta, levels })
    }

    /// Inverse-temperature parameter, in nats per level.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of cell levels `K`.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Tail sum `s = sum_{j>=1} exp(-beta*j)` and first moment
    /// `m = sum_j j exp(-beta*j)`. The partition sum is `1 + s` (the `j = 0`
    /// term is exactly 1); keeping `s` separate lets `ln(1+s)` retain full
    /// relative precision at large beta, where adding `s` to 1 first would
    /// round it away entirely.
    fn tail_moments(&self) -> (f64, f64) {
        let mut tail = 0.0;
        let mut first_moment = 0.0;
        for j in 1..self.levels as usize {
            let w = (-self.beta * j as f64).exp();
            tail += w;
            first_moment += j as f64 * w;
        }
        (tail, first_moment)
    }

    /// The probability mass function of `V` over `{0..K-1}`.
    ///
    /// Terms are `exp(-beta*j)` with the largest term (`j = 0`) equal to 1,
    /// so the sum neither overflows nor degenerates for any valid beta.
    pub fn level_drop_pmf(&self) -> Vec<f64> {
        let k = self.levels as usize;
        if self.beta > POINT_MASS_BETA {
            let mut pmf = vec![0.0; k];
            pmf[0] = 1.0;
            return pmf;
        }
        let (tail, _) = self.tail_moments();
        let z = 1.0 + tail;
        (0..k).map(|j| (-self.beta * j as f64).exp() / z).collect()
    }

    /// Expected level drop `E[V] = sum_j j exp(-beta*j) / Z`, in levels.
    ///
    /// Ranges over `[0, (K-1)/2]`: uniform at `beta = 0`, point mass at
    /// `V = 0` as beta grows.
    pub fn cost(&self) -> f64 {
        if self.beta > POINT_MASS_BETA {
            return 0.0;
        }
        let (tail, first_moment) = self.tail_moments();
        first_moment / (1.0 + tail)
    }

    /// Entropy of `V` in nats: `rate(beta) = beta*cost(beta) + ln Z`.
    pub fn rate_nats(&self) -> f64 {
        if self.beta > POINT_MASS_BETA {
            return 0.0;
        }
        let (tail, first_moment) = self.tail_moments();
        self.beta * (first_moment / (1.0 + tail)) + tail.ln_1p()
    }

    /// Entropy of `V` in bits.
    pub fn rate_bits(&self) -> f64 {
        self.rate_nats() / std::f64::consts::LN_2
    }

    /// Stage coding efficiency `f(beta) = rate(beta) / cost(beta)`, in nats
    /// per level. Strictly increasing in beta; returns `+inf` in the
    /// point-mass regime where both moments underflow to zero.
    pub fn stage_efficiency_nats(&self) -> f64 {
        let c = self.cost();
        if c == 0.0 {
            return f64::INFINITY;
        }
        self.rate_nats() / c
    }

    /// Stage coding efficiency in bits per level.
    pub fn stage_efficiency_bits(&self) -> f64 {
        let c = self.cost();
        if c == 0.0 {
            return f64::INFINITY;
        }
        self.rate_bits() / c
    }
}

/// One point of the payload -> efficiency upper-bound curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPoint {
    /// Payload in bits per cell per write.
    pub payload: f64,
    /// Solution parameter: the beta at which the rate equals the payload.
    pub beta: f64,
    /// Expected levels consumed per write at that beta.
    pub cost: f64,
    /// `alpha * payload / cost`, in bits per consumed level times alpha.
    pub efficiency_upper: f64,
    /// Cost constant of the memory type.
    pub alpha: f64,
}

/// Maximum feasible payload for `K` levels, in bits.
pub fn max_payload_bits(levels: u32) -> f64 {
    (levels as f64).log2()
}

/// Finds the beta at which `rate_bits(beta) = p_bits`, by bisection.
///
/// The rate is strictly decreasing in beta (it falls from `log2 K` at
/// `beta = 0` toward 0), so the bracket `[0, 700]` always contains the root;
/// at the upper end the rate has underflowed to essentially zero. Stops when
/// the rate matches within 1e-10 bits.
pub fn solve_beta_for_payload(p_bits: f64, levels: u32) -> Result<f64> {
    if levels < 2 {
        return Err(Error::InvalidLevels(levels as u64));
    }
    let max = max_payload_bits(levels);
    if !p_bits.is_finite() || p_bits <= 0.0 || p_bits > max {
        return Err(Error::InfeasiblePayload {
            payload: p_bits,
            max,
        });
    }

    let rate_at = |beta: f64| GibbsParams { beta, levels }.rate_bits();
    let mut lo = 0.0;
    let mut hi = POINT_MASS_BETA;
    if (rate_at(lo) - p_bits).abs() <= RATE_TOL_BITS {
        return Ok(lo);
    }
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        let r = rate_at(mid);
        if (r - p_bits).abs() <= RATE_TOL_BITS {
            return Ok(mid);
        }
        if r > p_bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Evaluates the efficiency upper bound at payload `p_bits` for a `K`-level
/// cell: solve for beta, evaluate the cost there, and report
/// `alpha * p_bits / cost`.
pub fn upper_bound_efficiency(p_bits: f64, levels: u32, alpha: f64) -> Result<BoundPoint> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let beta = solve_beta_for_payload(p_bits, levels)?;
    let cost = GibbsParams { beta, levels }.cost();
    Ok(BoundPoint {
        payload: p_bits,
        beta,
        cost,
        efficiency_upper: alpha * p_bits / cost,
        alpha,
    })
}

/// Central finite difference of the rate (nats) with respect to the cost
/// across `[beta-h, beta+h]`, paired with beta itself. The two should agree:
/// the rate/cost curve has slope exactly beta.
pub fn derivative_check(beta: f64, levels: u32, h: f64) -> Result<(f64, f64)> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidBeta(beta));
    }
    if !h.is_finite() || h <= 0.0 || h >= beta {
        return Err(Error::InvalidBeta(h));
    }
    let lo = GibbsParams::new(beta - h, levels)?;
    let hi = GibbsParams::new(beta + h, levels)?;
    let slope = (hi.rate_nats() - lo.rate_nats()) / (hi.cost() - lo.cost());
    Ok((slope, beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN_8: f64 = 2.0794415416798357;

    fn params(beta: f64, levels: u32) -> GibbsParams {
        GibbsParams::new(beta, levels).unwrap()
    }

    #[test]
    fn cost_uniform_limits() {
        // beta = 0 is the uniform distribution with mean (K-1)/2.
        assert!((params(0.0, 8).cost() - 3.5).abs() < 1e-12);
        assert!((params(0.0, 2).cost() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cost_two_level_closed_form() {
        // Direct two-term evaluation: e^-2 / (1 + e^-2).
        let expected = (-2.0f64).exp() / (1.0 + (-2.0f64).exp());
        assert!((params(2.0, 2).cost() - expected).abs() < 1e-15);
        assert!((expected - 0.119203).abs() < 1e-6);
    }

    #[test]
    fn rate_uniform_and_point_mass() {
        assert!((params(0.0, 8).rate_nats() - LN_8).abs() < 1e-12);
        assert!((params(0.0, 8).rate_bits() - 3.0).abs() < 1e-12);
        // Very large beta: point mass at V=0, zero entropy.
        assert!(params(750.0, 8).rate_nats() == 0.0);
        assert!(params(50.0, 16).rate_nats() < 1e-18);
    }

    #[test]
    fn rate_two_level_closed_form() {
        // Two-term evaluation, cross-checked against the binary entropy of
        // the induced q = P(V=1).
        let q = (-2.0f64).exp() / (1.0 + (-2.0f64).exp());
        let expected = 2.0 * q + (1.0 + (-2.0f64).exp()).ln();
        let binary_entropy = -q * q.ln() - (1.0 - q) * (1.0 - q).ln();
        let got = params(2.0, 2).rate_nats();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - binary_entropy).abs() < 1e-12);
        assert!((got - 0.365334).abs() < 1e-6);
    }

    #[test]
    fn stage_efficiency_ratios() {
        assert!((params(0.0, 8).stage_efficiency_nats() - LN_8 / 3.5).abs() < 1e-12);
        let two = params(0.0, 2).stage_efficiency_nats();
        assert!((two - std::f64::consts::LN_2 / 0.5).abs() < 1e-12);
        // Monotonicity probe.
        assert!(params(1.0, 8).stage_efficiency_nats() < params(2.0, 8).stage_efficiency_nats());
        assert!(params(750.0, 8).stage_efficiency_nats().is_infinite());
    }

    #[test]
    fn pmf_normalizes_and_orders() {
        for &(beta, levels) in &[(0.0, 8u32), (0.7, 4), (3.0, 16), (50.0, 2)] {
            let pmf = params(beta, levels).level_drop_pmf();
            let total: f64 = pmf.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "beta={beta} levels={levels}");
            for w in pmf.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
        let uniform = params(0.0, 8).level_drop_pmf();
        for p in uniform {
            assert!((p - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GibbsParams::new(-0.1, 8).is_err());
        assert!(GibbsParams::new(f64::NAN, 8).is_err());
        assert!(GibbsParams::new(f64::INFINITY, 8).is_err());
        assert!(GibbsParams::new(1.0, 1).is_err());
        assert!(GibbsParams::new(1.0, 0).is_err());
    }

    #[test]
    fn solve_beta_boundary_payloads() {
        // Maximum-entropy payloads force the uniform distribution.
        assert_eq!(solve_beta_for_payload(3.0, 8).unwrap(), 0.0);
        assert_eq!(solve_beta_for_payload(1.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn solve_beta_half_bit() {
        // Frozen from the entropy-inversion oracle: h2(q) = 0.5 bits at
        // q = 0.110027864438360, hence beta = ln((1-q)/q) = 2.090456507088.
        let beta = solve_beta_for_payload(0.5, 2).unwrap();
        assert!((beta - 2.0904565070882893).abs() < 1e-6);
        assert!((params(beta, 2).rate_bits() - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn solve_beta_rejects_out_of_range() {
        let err = solve_beta_for_payload(3.1, 8).unwrap_err();
        assert_eq!(err.to_string(), "payload must lie in (0, 3.0]");
        assert!(solve_beta_for_payload(0.0, 8).is_err());
        assert!(solve_beta_for_payload(-1.0, 8).is_err());
        assert!(solve_beta_for_payload(f64::NAN, 8).is_err());
    }

    #[test]
    fn upper_bound_analytic_endpoints() {
        // At full payload beta = 0 and the cost is (K-1)/2.
        let p = upper_bound_efficiency(3.0, 8, 1.0).unwrap();
        assert!((p.efficiency_upper - 6.0 / 7.0).abs() < 1e-9);
        let p = upper_bound_efficiency(1.0, 2, 1.0).unwrap();
        assert!((p.efficiency_upper - 2.0).abs() < 1e-9);
    }

    #[test]
    fn upper_bound_half_bit() {
        // Frozen from the entropy-inversion oracle: cost at the solution is
        // q = 0.110027864438360, so the bound is 0.5/q = 4.544303413978.
        let p = upper_bound_efficiency(0.5, 2, 1.0).unwrap();
        assert!((p.cost - 0.1100278644383596).abs() < 1e-6);
        assert!((p.efficiency_upper - 4.544303413978492).abs() < 1e-4);
        // BoundPoint internal consistency.
        assert!((p.efficiency_upper - p.alpha * p.payload / p.cost).abs() < 1e-9);
    }

    #[test]
    fn upper_bound_rejects_bad_alpha() {
        assert!(upper_bound_efficiency(1.0, 8, 0.0).is_err());
        assert!(upper_bound_efficiency(1.0, 8, -2.0).is_err());
        assert!(upper_bound_efficiency(1.0, 8, f64::NAN).is_err());
    }

    #[test]
    fn derivative_matches_beta() {
        let (slope, beta) = derivative_check(1.0, 8, 1e-5).unwrap();
        assert!((slope - beta).abs() < 1e-6);
        let (slope, beta) = derivative_check(0.3, 4, 1e-5).unwrap();
        assert!((slope - beta).abs() < 1e-6);
        // Both moments are tiny at beta = 5; the quotient is noisier.
        let (slope, beta) = derivative_check(5.0, 2, 1e-6).unwrap();
        assert!((slope - beta).abs() < 1e-4);
    }

    #[test]
    fn derivative_check_rejects_bad_step() {
        assert!(derivative_check(0.0, 8, 1e-5).is_err());
        assert!(derivative_check(1.0, 8, 2.0).is_err());
        assert!(derivative_check(1.0, 8, 0.0).is_err());
    }
}
