//! Closed-form heat kernels (classical Gaussian, Mehler, Hille–Hardy), the
//! classical Poisson kernel, the Markov defect T_t(1), and certification of
//! Gaussian-type kernel bounds.

use crate::error::{Error, Result};
use crate::orthobasis::{bessel_i, BesselOrder, QuadratureRule, SQRT_PI};
use serde::Serialize;

/// Selects one of the three semigroups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SemigroupId {
    /// Classical heat semigroup on ℝⁿ.
    Classical { dim: usize },
    /// Hermite (harmonic-oscillator) heat semigroup on ℝⁿ.
    Hermite { dim: usize },
    /// Laguerre heat semigroup of order β on (0, ∞).
    Laguerre { beta: BesselOrder },
}

impl SemigroupId {
    pub fn classical(dim: usize) -> Result<SemigroupId> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        Ok(SemigroupId::Classical { dim })
    }

    pub fn hermite(dim: usize) -> Result<SemigroupId> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        Ok(SemigroupId::Hermite { dim })
    }

    pub fn laguerre(beta: f64) -> Result<SemigroupId> {
        Ok(SemigroupId::Laguerre {
            beta: BesselOrder::new(beta)?,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            SemigroupId::Classical { dim } | SemigroupId::Hermite { dim } => *dim,
            SemigroupId::Laguerre { .. } => 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SemigroupId::Classical { dim } => format!("classical({dim})"),
            SemigroupId::Hermite { dim } => format!("hermite({dim})"),
            SemigroupId::Laguerre { beta } => format!("laguerre({})", beta.value()),
        }
    }
}

fn check_point(id: &SemigroupId, p: &[f64], name: &str) -> Result<()> {
    if p.len() != id.dim() {
        return Err(Error::invalid(format!(
            "{name} has dimension {}, semigroup expects {}",
            p.len(),
            id.dim()
        )));
    }
    if matches!(id, SemigroupId::Laguerre { .. }) && p[0] <= 0.0 {
        return Err(Error::invalid(format!("{name} must be positive on the half-line")));
    }
    Ok(())
}

/// Heat kernel K_t(x, y) of the selected semigroup.
pub fn heat_kernel(id: &SemigroupId, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("heat_kernel requires t > 0"));
    }
    check_point(id, x, "x")?;
    check_point(id, y, "y")?;
    match id {
        SemigroupId::Classical { dim } => {
            let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            let n = *dim as f64;
            Ok((4.0 * std::f64::consts::PI * t).powf(-n / 2.0) * (-r2 / (4.0 * t)).exp())
        }
        SemigroupId::Hermite { dim } => {
            // Mehler kernel: π^{−n/2} (e^{−2t}/(1−e^{−4t}))^{n/2}
            //   · exp(−¼[|x−y|²(1+e^{−2t})/(1−e^{−2t}) + |x+y|²(1−e^{−2t})/(1+e^{−2t})])
            let n = *dim as f64;
            let e2 = (-2.0 * t).exp();
            let dm: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            let dp: f64 = x.iter().zip(y).map(|(a, b)| (a + b) * (a + b)).sum();
            let coth = (1.0 + e2) / (1.0 - e2);
            let tanh = (1.0 - e2) / (1.0 + e2);
            let ln_pref = (n / 2.0) * ((e2 / (1.0 - e2 * e2)).ln() - SQRT_PI.ln() * 2.0);
            Ok((ln_pref - 0.25 * (dm * coth + dp * tanh)).exp())
        }
        SemigroupId::Laguerre { beta } => {
            // Hille–Hardy kernel, assembled in log space with the scaled
            // Bessel factor e^{−z} I_β(z), z = 2xy e^{−t}/(1−e^{−2t}).
            let (xv, yv) = (x[0], y[0]);
            let e1 = (-t).exp();
            let e2 = (-2.0 * t).exp();
            let z = 2.0 * xv * yv * e1 / (1.0 - e2);
            let scaled = bessel_i(*beta, z, true)?;
            let ln_k = (2.0 * e1 / (1.0 - e2)).ln() + 0.5 * (xv * yv).ln() + z
                + scaled.ln()
                - 0.5 * (xv * xv + yv * yv) * (1.0 + e2) / (1.0 - e2);
            Ok(ln_k.exp())
        }
    }
}

/// Classical Poisson kernel P_t(z) on ℝⁿ.
pub fn poisson_kernel_classical(n: usize, t: f64, z: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("poisson kernel requires t > 0"));
    }
    if z.len() != n {
        return Err(Error::invalid("point dimension mismatch"));
    }
    let nf = n as f64;
    let r2: f64 = z.iter().map(|a| a * a).sum();
    let c = statrs::function::gamma::gamma((nf + 1.0) / 2.0)
        / std::f64::consts::PI.powf((nf + 1.0) / 2.0);
    Ok(c * t / (t * t + r2).powf((nf + 1.0) / 2.0))
}

/// One-dimensional Markov defect: ∫ K_t(x, y) dy by quadrature with tail
/// control. The window is widened until the last shell contributes below
/// `tol`; non-convergence is signalled if that never happens.
fn markov_defect_1d(id: &SemigroupId, t: f64, x: f64, tol: f64) -> Result<f64> {
    let half_line = matches!(id, SemigroupId::Laguerre { .. });
    let mut total = 0.0;
    let mut shell_err = f64::INFINITY;
    // shells [x−2^{j+1}, x−2^j] ∪ [x+2^j, x+2^{j+1}] around the core window
    let mut lo = x - 1.0;
    let mut hi = x + 1.0;
    let core_lo = if half_line { lo.max(1e-12) } else { lo };
    let core = QuadratureRule::finite(core_lo, hi, 16, 10)?;
    total += core.integrate(|y| heat_kernel(id, t, &[x], &[y]).unwrap_or(0.0));
    for _ in 0..40 {
        let new_lo = x - 2.0 * (x - lo);
        let new_hi = x + 2.0 * (hi - x);
        let mut shell = 0.0;
        let left_lo = if half_line { new_lo.max(1e-12) } else { new_lo };
        if left_lo < lo {
            let rule = QuadratureRule::finite(left_lo, lo, 12, 10)?;
            shell += rule.integrate(|y| heat_kernel(id, t, &[x], &[y]).unwrap_or(0.0));
        }
        let rule = QuadratureRule::finite(hi, new_hi, 12, 10)?;
        shell += rule.integrate(|y| heat_kernel(id, t, &[x], &[y]).unwrap_or(0.0));
        total += shell;
        lo = new_lo;
        hi = new_hi;
        shell_err = shell;
        if shell < tol {
            return Ok(total);
        }
    }
    Err(Error::NonConvergent(format!(
        "markov defect tail did not fall below {tol} (last shell {shell_err})"
    )))
}

/// Markov defect T_t(1)(x). Equals 1 identically only for the classical
/// semigroup. Product structure across coordinates is used for n > 1.
pub fn markov_defect(id: &SemigroupId, t: f64, x: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("markov_defect requires t > 0"));
    }
    check_point(id, x, "x")?;
    match id {
        SemigroupId::Laguerre { .. } => markov_defect_1d(id, t, x[0], 1e-12),
        SemigroupId::Classical { dim } => {
            let one = SemigroupId::Classical { dim: 1 };
            let mut prod = 1.0;
            for i in 0..*dim {
                prod *= markov_defect_1d(&one, t, x[i], 1e-12)?;
            }
            Ok(prod)
        }
        SemigroupId::Hermite { dim } => {
            let one = SemigroupId::Hermite { dim: 1 };
            let mut prod = 1.0;
            for i in 0..*dim {
                prod *= markov_defect_1d(&one, t, x[i], 1e-12)?;
            }
            Ok(prod)
        }
    }
}

/// Closed form of the Hermite Markov defect, used as an oracle:
/// (cosh 2t)^{−n/2} exp(−tanh(2t)|x|²/2). Completing the square in the
/// Mehler kernel gives exactly this; it also has the correct t → 0 limit
/// T_t(1) → 1 and agrees with the spectral series.
pub fn hermite_markov_defect_closed(n: usize, t: f64, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|a| a * a).sum();
    (2.0 * t).cosh().powf(-(n as f64) / 2.0) * (-(2.0 * t).tanh() * r2 / 2.0).exp()
}

// ---------------------------------------------------------------------------
// Time derivatives of kernels
// ---------------------------------------------------------------------------

/// k-th time derivative ∂_t^k K_t(x, y). Classical and Hermite use analytic
/// formulas for k ≤ 1; everything else falls back to Richardson-extrapolated
/// central differences with step control.
pub fn heat_kernel_dt(id: &SemigroupId, k: usize, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    match (id, k) {
        (_, 0) => heat_kernel(id, t, x, y),
        (SemigroupId::Classical { dim }, 1) => {
            let n = *dim as f64;
            let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            let kv = heat_kernel(id, t, x, y)?;
            Ok(kv * (r2 / (4.0 * t * t) - n / (2.0 * t)))
        }
        (SemigroupId::Hermite { dim }, 1) => {
            // differentiate ln K: ln K = (n/2)[−2t − ln(1−e^{−4t})] + const
            //   − ¼[dm·coth(t) + dp·tanh(t)] with coth = (1+e^{−2t})/(1−e^{−2t})
            let n = *dim as f64;
            let e2 = (-2.0 * t).exp();
            let e4 = (-4.0 * t).exp();
            let dm: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            let dp: f64 = x.iter().zip(y).map(|(a, b)| (a + b) * (a + b)).sum();
            // d/dt coth = −4e^{−2t}/(1−e^{−2t})², d/dt tanh = +4e^{−2t}/(1+e^{−2t})²
            let dcoth = -4.0 * e2 / ((1.0 - e2) * (1.0 - e2));
            let dtanh = 4.0 * e2 / ((1.0 + e2) * (1.0 + e2));
            let dln = (n / 2.0) * (-2.0 - 4.0 * e4 / (1.0 - e4)) - 0.25 * (dm * dcoth + dp * dtanh);
            Ok(heat_kernel(id, t, x, y)? * dln)
        }
        _ => kernel_dt_fd(id, k, t, x, y),
    }
}

/// Richardson-extrapolated central finite difference of order k ∈ {1, 2}.
fn kernel_dt_fd(id: &SemigroupId, k: usize, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if k > 2 {
        return Err(Error::invalid("kernel time derivatives supported up to order 2"));
    }
    let f = |u: f64| heat_kernel(id, u, x, y);
    let diff = |h: f64| -> Result<f64> {
        match k {
            1 => Ok((f(t + h)? - f(t - h)?) / (2.0 * h)),
            _ => Ok((f(t + h)? - 2.0 * f(t)? + f(t - h)?) / (h * h)),
        }
    };
    let h = (t * 1e-3).max(1e-7);
    let d1 = diff(h)?;
    let d2 = diff(h / 2.0)?;
    // central differences are O(h²): eliminate the leading term
    Ok((4.0 * d2 - d1) / 3.0)
}

// ---------------------------------------------------------------------------
// Bound certification
// ---------------------------------------------------------------------------

/// Grid over which a kernel bound is certified.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationGrid {
    pub times: Vec<f64>,
    pub points: Vec<f64>,
}

impl CertificationGrid {
    /// Standard grid: t log-spaced in [t_lo, t_hi], points uniform in
    /// [lo, hi] (clipped away from 0 on the half-line by the caller).
    pub fn standard(t_lo: f64, t_hi: f64, nt: usize, lo: f64, hi: f64, nx: usize) -> Result<Self> {
        if nt < 2 || nx < 2 || !(t_hi > t_lo) || !(t_lo > 0.0) || !(hi > lo) {
            return Err(Error::invalid("bad certification grid parameters"));
        }
        let lr = (t_hi / t_lo).ln() / (nt - 1) as f64;
        let times = (0..nt).map(|i| t_lo * (lr * i as f64).exp()).collect();
        let h = (hi - lo) / (nx - 1) as f64;
        let points = (0..nx).map(|i| lo + h * i as f64).collect();
        Ok(CertificationGrid { times, points })
    }
}

/// Result of fitting C in |∂_t^k K_t(x,y)| ≤ C t^{−n/2−k} e^{−c|x−y|²/t}
/// over a sampled grid.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    pub semigroup: String,
    pub derivative_order: usize,
    pub decay_rate: f64,
    pub constant: f64,
    pub grid: CertificationGrid,
    pub argmax_t: f64,
    pub argmax_x: f64,
    pub argmax_y: f64,
}

/// Fit the constant C = sup |∂_t^k K_t(x,y)| · t^{n/2+k} · e^{+c|x−y|²/t}
/// over the grid; the decay rate c is a fixed input.
pub fn certify_bound(
    id: &SemigroupId,
    k: usize,
    c: f64,
    grid: &CertificationGrid,
) -> Result<BoundCertificate> {
    if grid.times.is_empty() || grid.points.is_empty() {
        return Err(Error::invalid("certification grid is empty"));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("decay rate must be positive"));
    }
    let n = id.dim() as f64;
    let mut best = f64::NEG_INFINITY;
    let mut arg = (0.0, 0.0, 0.0);
    for &t in &grid.times {
        for &x in &grid.points {
            for &y in &grid.points {
                let d = heat_kernel_dt(id, k, t, &[x], &[y])?;
                if !d.is_finite() {
                    return Err(Error::PrecisionLoss(format!(
                        "non-finite kernel derivative at t={t}, x={x}, y={y}"
                    )));
                }
                // skip points where the kernel value has underflowed: the
                // Gaussian reweighting factor would amplify denormal noise
                if d.abs() < 1e-280 {
                    continue;
                }
                let r2 = (x - y) * (x - y);
                // assemble in log space; e^{+c r²/t} alone can overflow
                let ratio =
                    (d.abs().ln() + (n / 2.0 + k as f64) * t.ln() + c * r2 / t).exp();
                if !ratio.is_finite() {
                    return Err(Error::PrecisionLoss(format!(
                        "non-finite bound ratio at t={t}, x={x}, y={y}"
                    )));
                }
                if ratio > best {
                    best = ratio;
                    arg = (t, x, y);
                }
            }
        }
    }
    Ok(BoundCertificate {
        semigroup: id.label(),
        derivative_order: k,
        decay_rate: c,
        constant: best,
        grid: grid.clone(),
        argmax_t: arg.0,
        argmax_x: arg.1,
        argmax_y: arg.2,
    })
}
