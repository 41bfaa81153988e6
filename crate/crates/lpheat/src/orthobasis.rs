//! Hermite and Laguerre functions, the modified Bessel function I_β, and the
//! quadrature rules used by every other module.

use crate::error::{Error, Result};
use statrs::function::gamma::{gamma, ln_gamma};

pub const SQRT_PI: f64 = 1.772453850905516027298;

/// Multi-index k ∈ ℕⁿ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Order β > −1/2 of a Laguerre family / modified Bessel function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(beta: f64) -> Result<BesselOrder> {
        if !beta.is_finite() || beta <= -0.5 {
            return Err(Error::invalid(format!(
                "Bessel/Laguerre order must be finite and > -1/2, got {beta}"
            )));
        }
        Ok(BesselOrder(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

// ---------------------------------------------------------------------------
// Gauss–Legendre quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1],
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..64 {
            let (p, d) = legendre_p_dp(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_p_dp(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Domain tag of a quadrature rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadDomain {
    /// Σ wᵢ f(xᵢ) ≈ ∫ₐᵇ f(x) dx.
    FiniteInterval(f64, f64),
    /// Σ wᵢ f(xᵢ) ≈ ∫₀^∞ f(x) dx via the substitution x = eᵘ.
    HalfLineExp,
    /// Σ wᵢ f(tᵢ) ≈ ∫ f(t) dt/t over [t_min, t_max] via t = eˢ.
    LogTime(f64, f64),
}

/// A quadrature rule: `Σ weights[i] · f(nodes[i])` approximates the integral
/// indicated by the domain tag.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub domain: QuadDomain,
}

impl QuadratureRule {
    /// Composite Gauss–Legendre on [a, b] with `panels` equal panels.
    pub fn finite(a: f64, b: f64, panels: usize, nodes_per_panel: usize) -> Result<QuadratureRule> {
        if !(b > a) || panels == 0 || nodes_per_panel < 2 {
            return Err(Error::invalid("finite rule needs b > a, panels >= 1, nodes >= 2"));
        }
        let (xs, ws) = gauss_legendre(nodes_per_panel);
        let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
        let mut weights = Vec::with_capacity(panels * nodes_per_panel);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let pa = a + h * p as f64;
            for (x, w) in xs.iter().zip(&ws) {
                nodes.push(pa + h * (x + 1.0) / 2.0);
                weights.push(w * h / 2.0);
            }
        }
        Ok(QuadratureRule {
            nodes,
            weights,
            domain: QuadDomain::FiniteInterval(a, b),
        })
    }

    /// Half-line rule for ∫₀^∞ f dx: x = eᵘ on u ∈ [u_min, u_max] with
    /// composite Gauss–Legendre panels in u; the Jacobian eᵘ is folded into
    /// the weights. Suited to integrands decaying fast at both ends in u.
    pub fn half_line(
        u_min: f64,
        u_max: f64,
        panels: usize,
        nodes_per_panel: usize,
    ) -> Result<QuadratureRule> {
        let base = QuadratureRule::finite(u_min, u_max, panels, nodes_per_panel)?;
        let nodes: Vec<f64> = base.nodes.iter().map(|u| u.exp()).collect();
        let weights = base
            .weights
            .iter()
            .zip(&nodes)
            .map(|(w, x)| w * x)
            .collect();
        Ok(QuadratureRule {
            nodes,
            weights,
            domain: QuadDomain::HalfLineExp,
        })
    }

    /// Default half-line rule, accurate for integrands with Gaussian decay
    /// and endpoint behavior x^γ, γ > −1.
    pub fn half_line_default() -> QuadratureRule {
        QuadratureRule::half_line(-24.0, 5.0, 200, 14).unwrap()
    }

    /// Log-time rule for ∫ f(t) dt/t over [t_min, t_max]: t = eˢ, the
    /// measure dt/t is uniform in s.
    pub fn log_time(
        t_min: f64,
        t_max: f64,
        panels: usize,
        nodes_per_panel: usize,
    ) -> Result<QuadratureRule> {
        if !(t_min > 0.0) || !(t_max > t_min) {
            return Err(Error::invalid("log-time rule needs 0 < t_min < t_max"));
        }
        let base = QuadratureRule::finite(t_min.ln(), t_max.ln(), panels, nodes_per_panel)?;
        let nodes: Vec<f64> = base.nodes.iter().map(|s| s.exp()).collect();
        Ok(QuadratureRule {
            nodes,
            weights: base.weights,
            domain: QuadDomain::LogTime(t_min, t_max),
        })
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Hermite functions
// ---------------------------------------------------------------------------

/// Normalized Hermite functions h_0(z), …, h_max_l(z), by the three-term
/// recurrence on the normalized functions (no factorials):
///   h_0 = π^{−1/4} e^{−z²/2},  h_{l+1} = z √(2/(l+1)) h_l − √(l/(l+1)) h_{l−1}.
pub fn hermite_values(max_l: usize, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_l + 1);
    let h0 = SQRT_PI.sqrt().recip() * (-z * z / 2.0).exp();
    out.push(h0);
    if max_l == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * z * h0);
    for l in 1..max_l {
        let lf = l as f64;
        let next = z * (2.0 / (lf + 1.0)).sqrt() * out[l] - (lf / (lf + 1.0)).sqrt() * out[l - 1];
        out.push(next);
    }
    out
}

/// Normalized Hermite function h_l(z) = (√π 2^l l!)^{−1/2} e^{−z²/2} p_l(z).
pub fn hermite_fn(l: usize, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::invalid("hermite_fn requires finite argument"));
    }
    Ok(hermite_values(l, z)[l])
}

// ---------------------------------------------------------------------------
// Laguerre functions
// ---------------------------------------------------------------------------

/// Normalized Laguerre functions φ_0^β(x), …, φ_max_k^β(x) on (0, ∞):
/// φ_k^β(x) = (2Γ(k+1)/Γ(k+1+β))^{1/2} e^{−x²/2} x^{β+1/2} L_k^β(x²),
/// by the recurrence on L̃_k = (Γ(k+1)/Γ(k+1+β))^{1/2} L_k^β.
pub fn laguerre_values(max_k: usize, beta: BesselOrder, x: f64) -> Vec<f64> {
    let b = beta.value();
    let y = x * x;
    // envelope √2 e^{−x²/2} x^{β+1/2}, assembled in log space for safety
    let env = (0.5 * std::f64::consts::LN_2 - y / 2.0 + (b + 0.5) * x.ln()).exp();
    let mut lt = Vec::with_capacity(max_k + 1);
    lt.push((-0.5 * ln_gamma(b + 1.0)).exp());
    if max_k >= 1 {
        // L_1^β(y) = 1 + β − y
        lt.push((1.0 + b - y) * lt[0] / (1.0 + b).sqrt());
    }
    for k in 1..max_k {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + b - y) * lt[k] - (kf * (kf + b)).sqrt() * lt[k - 1])
            / ((kf + 1.0) * (kf + 1.0 + b)).sqrt();
        lt.push(next);
    }
    lt.into_iter().map(|v| env * v).collect()
}

/// Normalized Laguerre function φ_k^β(x), x > 0.
pub fn laguerre_fn(k: usize, beta: BesselOrder, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid("laguerre_fn requires x > 0"));
    }
    Ok(laguerre_values(k, beta, x)[k])
}

// ---------------------------------------------------------------------------
// Modified Bessel function I_β
// ---------------------------------------------------------------------------

/// Crossover between the power series and the large-argument expansion.
pub fn bessel_crossover(beta: BesselOrder) -> f64 {
    let b = beta.value();
    (2.0 * b * b).max(15.0)
}

/// Scaled power-series branch: e^{−z} I_β(z). All series terms are positive,
/// so there is no cancellation; usable for z below the crossover.
pub fn bessel_i_series_scaled(beta: BesselOrder, z: f64) -> Result<f64> {
    let b = beta.value();
    let ln_t0 = b * (z / 2.0).ln() - ln_gamma(b + 1.0);
    let r = z * z / 4.0;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for j in 0..600 {
        let jf = j as f64;
        term *= r / ((jf + 1.0) * (jf + 1.0 + b));
        sum += term;
        if term < 1e-18 * sum {
            let v = (ln_t0 - z + sum.ln()).exp();
            return Ok(v);
        }
    }
    Err(Error::PrecisionLoss(format!(
        "Bessel series did not converge at beta={b}, z={z}"
    )))
}

/// Scaled large-argument branch:
/// √(2πz) e^{−z} I_β(z) ~ Σ_l (−1)^l [β,l]/(2z)^l with
/// [β,l] = (4β²−1)(4β²−3²)···(4β²−(2l−1)²)/(2^{2l} l!).
/// The alternating tail is truncated adaptively at its smallest term.
pub fn bessel_i_asymptotic_scaled(beta: BesselOrder, z: f64) -> f64 {
    let b = beta.value();
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut prev = f64::INFINITY;
    for l in 1..=40 {
        let lf = l as f64;
        let num = 4.0 * b * b - (2.0 * lf - 1.0) * (2.0 * lf - 1.0);
        term *= -num / (4.0 * lf * 2.0 * z);
        if term.abs() >= prev {
            break; // divergent tail reached; stop at its smallest term
        }
        sum += term;
        prev = term.abs();
        if prev < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * z).sqrt()
}

/// Modified Bessel function of the first kind, I_β(z) for z > 0.
/// With `scaled` set, returns e^{−z} I_β(z) (never overflows).
pub fn bessel_i(beta: BesselOrder, z: f64, scaled: bool) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::invalid("bessel_i requires z > 0"));
    }
    let s = if z < bessel_crossover(beta) {
        bessel_i_series_scaled(beta, z)?
    } else {
        bessel_i_asymptotic_scaled(beta, z)
    };
    if scaled {
        Ok(s)
    } else {
        let v = s * z.exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::PrecisionLoss(format!(
                "unscaled I_beta overflows at z={z}; request the scaled value"
            )))
        }
    }
}

/// Coefficient [β,l] of the large-argument expansion.
pub fn bessel_asymptotic_coeff(beta: BesselOrder, l: usize) -> f64 {
    let b = beta.value();
    let mut prod = 1.0;
    for j in 1..=l {
        let jf = j as f64;
        prod *= 4.0 * b * b - (2.0 * jf - 1.0) * (2.0 * jf - 1.0);
    }
    prod / (4.0_f64.powi(l as i32) * gamma(l as f64 + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x: f64) -> BesselOrder {
        BesselOrder::new(x).unwrap()
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        // n-point rule is exact up to degree 2n−1
        let rule = QuadratureRule::finite(-1.0, 2.0, 1, 8).unwrap();
        let exact = (2.0_f64.powi(15) - (-1.0_f64).powi(15)) / 15.0;
        let got = rule.integrate(|x| x.powi(14));
        assert!((got - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn finite_rule_integrates_one_to_domain_measure() {
        let rule = QuadratureRule::finite(-3.0, 7.5, 13, 6).unwrap();
        assert!((rule.integrate(|_| 1.0) - 10.5).abs() < 1e-12);
    }

    #[test]
    fn half_line_rule_gamma_integral() {
        // ∫₀^∞ x^{3/2} e^{−x} dx = Γ(5/2) = 3√π/4
        let rule = QuadratureRule::half_line_default();
        let got = rule.integrate(|x| x.powf(1.5) * (-x).exp());
        let exact = 0.75 * SQRT_PI;
        assert!((got - exact).abs() < 1e-12, "got {got}, want {exact}");
    }

    #[test]
    fn log_time_rule_single_mode_integral() {
        // ∫₀^∞ t^{2α} λ^{2α} e^{−2λt} dt/t = Γ(2α)/2^{2α}, independent of λ
        for lambda in [0.5, 1.0, 10.0] {
            for alpha in [0.5, 1.0] {
                let rule = QuadratureRule::log_time(1e-10, 80.0 / lambda, 64, 8).unwrap();
                let got = rule.integrate(|t| {
                    (t * lambda).powf(2.0 * alpha) * (-2.0 * lambda * t).exp()
                });
                let exact = gamma(2.0 * alpha) / 4.0_f64.powf(alpha);
                assert!(
                    ((got - exact) / exact).abs() < 1e-8,
                    "lambda={lambda}, alpha={alpha}: got {got}, want {exact}"
                );
            }
        }
    }

    #[test]
    fn hermite_small_l_closed_forms() {
        // h_0(0) = π^{−1/4}
        let h0 = hermite_fn(0, 0.0).unwrap();
        assert!((h0 - SQRT_PI.sqrt().recip()).abs() < 1e-15);
        // h_1(1) = √2 π^{−1/4} e^{−1/2}
        let h1 = hermite_fn(1, 1.0).unwrap();
        let want = std::f64::consts::SQRT_2 * SQRT_PI.sqrt().recip() * (-0.5_f64).exp();
        assert!((h1 - want).abs() < 1e-13);
        // p_2(z) = 4z² − 2, p_3(z) = 8z³ − 12z, against the recurrence
        for z in [-1.7, 0.3, 2.2] {
            let e = (-z * z / 2.0_f64).exp();
            let n2 = (SQRT_PI * 8.0).sqrt();
            let n3 = (SQRT_PI * 48.0).sqrt();
            let want2 = (4.0 * z * z - 2.0) * e / n2;
            let want3 = (8.0 * z * z * z - 12.0 * z) * e / n3;
            assert!((hermite_fn(2, z).unwrap() - want2).abs() < 1e-13);
            assert!((hermite_fn(3, z).unwrap() - want3).abs() < 1e-13);
        }
    }

    #[test]
    fn hermite_orthonormality_under_own_quadrature() {
        let grid = QuadratureRule::finite(-14.0, 14.0, 56, 8).unwrap();
        let table: Vec<Vec<f64>> = grid.nodes.iter().map(|&z| hermite_values(20, z)).collect();
        for l in 0..=20 {
            for lp in l..=20 {
                let dot: f64 = grid
                    .weights
                    .iter()
                    .zip(&table)
                    .map(|(w, h)| w * h[l] * h[lp])
                    .sum();
                let want = if l == lp { 1.0 } else { 0.0 };
                assert!(
                    (dot - want).abs() < 1e-10,
                    "l={l}, l'={lp}: got {dot}"
                );
            }
        }
    }

    #[test]
    fn hermite_rejects_non_finite() {
        assert!(hermite_fn(3, f64::NAN).is_err());
        assert!(hermite_fn(3, f64::INFINITY).is_err());
    }

    #[test]
    fn laguerre_k0_closed_form() {
        for beta in [-0.4, 0.5, 1.0, 2.5] {
            for x in [0.3, 1.0, 2.7] {
                let got = laguerre_fn(0, b(beta), x).unwrap();
                let want =
                    (2.0 / gamma(beta + 1.0)).sqrt() * (-x * x / 2.0_f64).exp() * x.powf(beta + 0.5);
                assert!((got - want).abs() < 1e-13 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn laguerre_orthonormality_half_line() {
        let rule = QuadratureRule::half_line_default();
        for beta in [-0.4, 0.5, 1.0, 2.5] {
            let table: Vec<Vec<f64>> = rule
                .nodes
                .iter()
                .map(|&x| laguerre_values(20, b(beta), x))
                .collect();
            for k in 0..=20 {
                for kp in k..=20 {
                    let dot: f64 = rule
                        .weights
                        .iter()
                        .zip(&table)
                        .map(|(w, p)| w * p[k] * p[kp])
                        .sum();
                    let want = if k == kp { 1.0 } else { 0.0 };
                    assert!(
                        (dot - want).abs() < 1e-10,
                        "beta={beta}, k={k}, k'={kp}: got {dot}"
                    );
                }
            }
        }
    }

    #[test]
    fn laguerre_rejects_nonpositive() {
        assert!(laguerre_fn(1, b(0.5), 0.0).is_err());
        assert!(laguerre_fn(1, b(0.5), -1.0).is_err());
    }

    #[test]
    fn bessel_half_integer_closed_form() {
        // I_{1/2}(z) = √(2/(πz)) sinh z
        let got = bessel_i(b(0.5), 1.0, false).unwrap();
        let want = (2.0 / (std::f64::consts::PI)).sqrt() * 1.0_f64.sinh();
        assert!((got - want).abs() < 1e-13, "got {got}, want {want}");
        // frozen reference decimal
        assert!((got - 0.93767488824548764672).abs() < 1e-13);
    }

    #[test]
    fn bessel_small_argument_limit_of_i0() {
        let got = bessel_i(b(0.0), 1e-8, false).unwrap();
        assert!((got - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bessel_scaled_large_argument_oracle() {
        // e^{−30} I_{2.5}(30), frozen from a 50-digit series summation
        let got = bessel_i(b(2.5), 30.0, true).unwrap();
        assert!(
            (got - 0.065795694375656317359).abs() < 1e-12,
            "got {got}"
        );
    }

    #[test]
    fn bessel_half_integer_closed_form_matches_asymptotic_branch() {
        // e^{−z} I_{5/2}(z) = (2πz)^{−1/2}[(3/z²+1)(1−e^{−2z}) − (3/z)(1+e^{−2z})]
        let beta = b(2.5);
        for z in [20.0, 30.0, 80.0, 400.0] {
            let got = bessel_i(beta, z, true).unwrap();
            let e = (-2.0 * z_f(z)).exp();
            let want = ((3.0 / (z * z) + 1.0) * (1.0 - e) - (3.0 / z) * (1.0 + e))
                / (2.0 * std::f64::consts::PI * z).sqrt();
            assert!(
                ((got - want) / want).abs() < 1e-12,
                "z={z}: got {got}, want {want}"
            );
        }
    }

    fn z_f(z: f64) -> f64 {
        z
    }

    #[test]
    fn bessel_branches_agree_on_overlap_window() {
        for beta in [-0.4, 0.0, 0.5, 1.0, 2.5] {
            let ord = b(beta);
            let zc = bessel_crossover(ord);
            for frac in [1.0, 1.1, 1.3] {
                let z = zc * frac;
                let s = bessel_i_series_scaled(ord, z).unwrap();
                let a = bessel_i_asymptotic_scaled(ord, z);
                assert!(
                    ((s - a) / s).abs() < 1e-12,
                    "beta={beta}, z={z}: series {s}, asymptotic {a}"
                );
            }
        }
    }

    #[test]
    fn bessel_expansion_coefficients_match_product_formula() {
        // [β,1] = (4β²−1)/4, [β,2] = (4β²−1)(4β²−9)/32
        for beta in [0.3, 0.5, 2.5] {
            let bb = 4.0 * beta * beta;
            let c1 = bessel_asymptotic_coeff(b(beta), 1);
            let c2 = bessel_asymptotic_coeff(b(beta), 2);
            assert!((c1 - (bb - 1.0) / 4.0).abs() < 1e-14);
            assert!((c2 - (bb - 1.0) * (bb - 9.0) / 32.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bessel_order_constructor_guards() {
        assert!(BesselOrder::new(-0.5).is_err());
        assert!(BesselOrder::new(f64::NAN).is_err());
        assert!(BesselOrder::new(-0.49).is_ok());
    }

    #[test]
    fn multi_index_degree() {
        assert_eq!(MultiIndex(vec![2, 0, 3]).degree(), 5);
    }

    proptest! {
        #[test]
        fn quadrature_weights_positive(panels in 1usize..12, nodes in 2usize..10) {
            let rule = QuadratureRule::finite(0.0, 1.0, panels, nodes).unwrap();
            prop_assert!(rule.weights.iter().all(|w| *w > 0.0));
            prop_assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn hermite_recurrence_consistent_with_parity(l in 0usize..40, z in -5.0f64..5.0) {
            // h_l(−z) = (−1)^l h_l(z)
            let a = hermite_fn(l, z).unwrap();
            let c = hermite_fn(l, -z).unwrap();
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - sign * c).abs() < 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn bessel_scaled_bounded_by_one_for_nonneg_order(
            beta in 0.0f64..4.0,
            z in 0.01f64..200.0,
        ) {
            // e^{−z} I_β(z) ≤ e^{−z} I_0(z) ≤ 1 for β ≥ 0
            let v = bessel_i(b(beta), z, true).unwrap();
            prop_assert!(v >= 0.0 && v <= 1.0 + 1e-12);
        }
    }
}
