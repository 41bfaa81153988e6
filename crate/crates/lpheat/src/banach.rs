//! Finite-dimensional Banach-space geometry: norms, moduli of convexity and
//! smoothness by multi-start local search, martingale q-square functions on
//! dyadic filtrations, and empirical Lusin cotype/type ratio probes.

use crate::error::{Error, Result};
use crate::grid::SampledField;
use crate::lpfun::{g_function_field, GFunctionSpec};
use crate::spectral::{spectral_apply, CoefficientVector, Modes, SpectralBasis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Norm oracle of a finite-dimensional space.
#[derive(Clone)]
pub enum NormKind {
    /// ℓ^r norm, 1 ≤ r < ∞.
    Lp(f64),
    /// ℓ^∞ norm.
    Linf,
    /// User-supplied oracle.
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

/// A finite-dimensional normed space (B, ‖·‖).
#[derive(Clone)]
pub struct NormedSpace {
    pub dim: usize,
    pub kind: NormKind,
    pub label: String,
}

impl std::fmt::Debug for NormedSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NormedSpace({}, dim {})", self.label, self.dim)
    }
}

impl NormedSpace {
    pub fn lp(dim: usize, r: f64) -> Result<NormedSpace> {
        if dim == 0 || !(r >= 1.0) {
            return Err(Error::invalid("lp space needs dim >= 1 and r >= 1"));
        }
        Ok(NormedSpace {
            dim,
            kind: NormKind::Lp(r),
            label: format!("l{r}_{dim}"),
        })
    }

    pub fn linf(dim: usize) -> Result<NormedSpace> {
        if dim == 0 {
            return Err(Error::invalid("space needs dim >= 1"));
        }
        Ok(NormedSpace {
            dim,
            kind: NormKind::Linf,
            label: format!("linf_{dim}"),
        })
    }

    pub fn custom(
        dim: usize,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> NormedSpace {
        NormedSpace {
            dim,
            kind: NormKind::Custom(Arc::new(f)),
            label: label.into(),
        }
    }

    pub fn real_line() -> NormedSpace {
        NormedSpace::lp(1, 2.0).unwrap()
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Lp(r) => {
                if *r == 2.0 {
                    v.iter().map(|x| x * x).sum::<f64>().sqrt()
                } else if *r == 1.0 {
                    v.iter().map(|x| x.abs()).sum()
                } else {
                    v.iter().map(|x| x.abs().powf(*r)).sum::<f64>().powf(1.0 / r)
                }
            }
            NormKind::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            NormKind::Custom(f) => f(v),
        }
    }
}

// ---------------------------------------------------------------------------
// Moduli of convexity and smoothness
// ---------------------------------------------------------------------------

/// Result of a modulus optimization.
#[derive(Debug, Clone)]
pub struct ModulusEstimate {
    pub value: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// max deviation of the reported pair from its constraints
    pub constraint_residual: f64,
}

fn random_unit(space: &NormedSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..space.dim)
            .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
            .collect();
        let n = space.norm(&v);
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Alternating retraction onto {‖b‖ = 1} ∩ {‖a − b‖ = ε}; `a` is assumed unit.
fn retract_pair(space: &NormedSpace, a: &[f64], b: &mut [f64], eps: f64) {
    for _ in 0..200 {
        let n = space.norm(b);
        if n > 1e-12 {
            for x in b.iter_mut() {
                *x /= n;
            }
        }
        let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
        let dn = space.norm(&d);
        if dn < 1e-12 {
            return;
        }
        for (i, x) in b.iter_mut().enumerate() {
            *x = a[i] + eps * d[i] / dn;
        }
    }
}

fn convexity_residual(space: &NormedSpace, a: &[f64], b: &[f64], eps: f64) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (space.norm(a) - 1.0)
        .abs()
        .max((space.norm(b) - 1.0).abs())
        .max((space.norm(&d) - eps).abs())
}

/// Modulus of convexity δ_B(ε) = inf{1 − ‖(a+b)/2‖ : ‖a‖=‖b‖=1, ‖a−b‖=ε},
/// by local search with ≥ 64 random restarts and constraint retraction.
pub fn modulus_convexity(space: &NormedSpace, eps: f64, seed: u64) -> Result<ModulusEstimate> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::invalid("modulus_convexity needs 0 < eps < 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mid_defect = |a: &[f64], b: &[f64]| {
        let m: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).collect();
        1.0 - space.norm(&m)
    };
    let restarts = 64;
    let steps = 400;
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for _ in 0..restarts {
        let a = random_unit(space, &mut rng);
        let mut b = random_unit(space, &mut rng);
        retract_pair(space, &a, &mut b, eps);
        let mut cur_a = a;
        let mut cur_b = b;
        let mut cur = mid_defect(&cur_a, &cur_b);
        for s in 0..steps {
            let sigma = 0.3 * (1e-8_f64 / 0.3).powf(s as f64 / steps as f64);
            let mut na: Vec<f64> = cur_a
                .iter()
                .map(|x| x + sigma * (rng.gen::<f64>() * 2.0 - 1.0))
                .collect();
            let n = space.norm(&na);
            if n < 1e-9 {
                continue;
            }
            for x in na.iter_mut() {
                *x /= n;
            }
            let mut nb: Vec<f64> = cur_b
                .iter()
                .map(|x| x + sigma * (rng.gen::<f64>() * 2.0 - 1.0))
                .collect();
            retract_pair(space, &na, &mut nb, eps);
            if convexity_residual(space, &na, &nb, eps) > 1e-9 {
                continue;
            }
            let val = mid_defect(&na, &nb);
            if val < cur {
                cur = val;
                cur_a = na;
                cur_b = nb;
            }
        }
        if best.as_ref().map(|(v, _, _)| cur < *v).unwrap_or(true) {
            best = Some((cur, cur_a, cur_b));
        }
    }
    let (value, a, b) = best.unwrap();
    let residual = convexity_residual(space, &a, &b, eps);
    if residual > 1e-8 {
        return Err(Error::NonConvergent(format!(
            "constraint residual {residual:.3e} at reported minimizer"
        )));
    }
    Ok(ModulusEstimate {
        value,
        a,
        b,
        constraint_residual: residual,
    })
}

/// Modulus of smoothness ρ_B(t) = sup{(‖a+tb‖+‖a−tb‖)/2 − 1 : ‖a‖=‖b‖=1},
/// by multi-start maximization.
pub fn modulus_smoothness(space: &NormedSpace, t: f64, seed: u64) -> Result<ModulusEstimate> {
    if !(t > 0.0) {
        return Err(Error::invalid("modulus_smoothness needs t > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objective = |a: &[f64], b: &[f64]| {
        let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * y).collect();
        let q: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - t * y).collect();
        (space.norm(&p) + space.norm(&q)) / 2.0 - 1.0
    };
    let restarts = 64;
    let steps = 400;
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for _ in 0..restarts {
        let mut cur_a = random_unit(space, &mut rng);
        let mut cur_b = random_unit(space, &mut rng);
        let mut cur = objective(&cur_a, &cur_b);
        for s in 0..steps {
            let sigma = 0.3 * (1e-8_f64 / 0.3).powf(s as f64 / steps as f64);
            let perturb = |v: &[f64], rng: &mut ChaCha8Rng| -> Option<Vec<f64>> {
                let mut w: Vec<f64> = v
                    .iter()
                    .map(|x| x + sigma * (rng.gen::<f64>() * 2.0 - 1.0))
                    .collect();
                let n = space.norm(&w);
                if n < 1e-9 {
                    return None;
                }
                for x in w.iter_mut() {
                    *x /= n;
                }
                Some(w)
            };
            let (Some(na), Some(nb)) = (perturb(&cur_a, &mut rng), perturb(&cur_b, &mut rng))
            else {
                continue;
            };
            let val = objective(&na, &nb);
            if val > cur {
                cur = val;
                cur_a = na;
                cur_b = nb;
            }
        }
        if best.as_ref().map(|(v, _, _)| cur > *v).unwrap_or(true) {
            best = Some((cur, cur_a, cur_b));
        }
    }
    let (value, a, b) = best.unwrap();
    let residual = (space.norm(&a) - 1.0).abs().max((space.norm(&b) - 1.0).abs());
    if residual > 1e-8 {
        return Err(Error::NonConvergent(format!(
            "constraint residual {residual:.3e} at reported maximizer"
        )));
    }
    Ok(ModulusEstimate {
        value,
        a,
        b,
        constraint_residual: residual,
    })
}

// ---------------------------------------------------------------------------
// Dyadic martingales
// ---------------------------------------------------------------------------

/// A B-valued martingale M_0, …, M_N on the dyadic filtration of 2^N atoms
/// with uniform probability. `values[n][atom]` is the value of M_n on the
/// atom; M_n must be constant on blocks of 2^{N−n} atoms and equal to the
/// average of its children.
#[derive(Debug, Clone)]
pub struct FiniteMartingale {
    pub depth: usize,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl FiniteMartingale {
    pub fn new(depth: usize, values: Vec<Vec<Vec<f64>>>) -> Result<FiniteMartingale> {
        let atoms = 1usize << depth;
        if values.len() != depth + 1 {
            return Err(Error::invalid("need values for M_0 … M_N"));
        }
        let dim = values[0]
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::invalid("empty martingale"))?;
        for (n, level) in values.iter().enumerate() {
            if level.len() != atoms || level.iter().any(|v| v.len() != dim) {
                return Err(Error::invalid(
                    "each level must assign a value of fixed dimension to every atom",
                ));
            }
            // adaptedness: constant on blocks of size 2^{N−n}
            let block = 1usize << (depth - n);
            for start in (0..atoms).step_by(block) {
                for i in start..start + block {
                    if level[i] != level[start] {
                        return Err(Error::invalid(format!(
                            "M_{n} is not measurable at level {n}"
                        )));
                    }
                }
            }
        }
        // martingale property: block average of M_{n+1} equals M_n
        for n in 0..depth {
            let block = 1usize << (depth - n);
            for start in (0..atoms).step_by(block) {
                for j in 0..dim {
                    let avg: f64 = (start..start + block)
                        .map(|i| values[n + 1][i][j])
                        .sum::<f64>()
                        / block as f64;
                    if (avg - values[n][start][j]).abs() > 1e-10 {
                        return Err(Error::invalid(format!(
                            "martingale property fails at level {n}"
                        )));
                    }
                }
            }
        }
        Ok(FiniteMartingale { depth, values })
    }

    /// Random martingale: symmetric ± increments on each dyadic split.
    pub fn random(depth: usize, dim: usize, seed: u64) -> FiniteMartingale {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = 1usize << depth;
        let m0: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let mut values = vec![vec![m0; atoms]];
        for n in 0..depth {
            let block = 1usize << (depth - n);
            let half = block / 2;
            let mut next = values[n].clone();
            for start in (0..atoms).step_by(block) {
                let xi: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                for i in start..start + half {
                    for j in 0..dim {
                        next[i][j] += xi[j];
                    }
                }
                for i in start + half..start + block {
                    for j in 0..dim {
                        next[i][j] -= xi[j];
                    }
                }
            }
            values.push(next);
        }
        FiniteMartingale { depth, values }
    }

    pub fn atoms(&self) -> usize {
        1usize << self.depth
    }

    pub fn dim(&self) -> usize {
        self.values[0][0].len()
    }

    /// E[‖M_N‖²] with the Euclidean norm (used by the L² identity).
    pub fn final_second_moment(&self) -> f64 {
        let atoms = self.atoms();
        self.values[self.depth]
            .iter()
            .map(|v| v.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            / atoms as f64
    }
}

/// q-square function S_q(M) = (Σ_{n≥1} ‖M_n − M_{n−1}‖^q + ‖M_0‖^q)^{1/q},
/// one value per atom, with the space's norm.
pub fn martingale_square_fn(
    mart: &FiniteMartingale,
    space: &NormedSpace,
    q: f64,
) -> Result<Vec<f64>> {
    if !(q > 1.0) {
        return Err(Error::invalid("martingale square function needs q > 1"));
    }
    if space.dim != mart.dim() {
        return Err(Error::invalid("space dimension does not match martingale"));
    }
    let atoms = mart.atoms();
    let mut out = Vec::with_capacity(atoms);
    for atom in 0..atoms {
        let mut acc = space.norm(&mart.values[0][atom]).powf(q);
        for n in 1..=mart.depth {
            let d: Vec<f64> = mart.values[n][atom]
                .iter()
                .zip(&mart.values[n - 1][atom])
                .map(|(a, b)| a - b)
                .collect();
            acc += space.norm(&d).powf(q);
        }
        out.push(acc.powf(1.0 / q));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lusin cotype / type ratio probe
// ---------------------------------------------------------------------------

/// Observed range of the cotype and type ratios over random trials.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub trials: usize,
    pub cotype_min: f64,
    pub cotype_median: f64,
    pub cotype_max: f64,
    pub type_min: f64,
    pub type_median: f64,
    pub type_max: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Draw random band-limited B-valued fields and report the observed range of
/// r_cotype = ‖g(f)‖_{L^p} / ‖f‖_{L^p(B)} and its reciprocal r_type.
/// An empirical probe of the Lusin cotype/type inequalities, not a proof.
pub fn lusin_ratio_probe(
    basis: &SpectralBasis,
    spec: &GFunctionSpec,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<RatioReport> {
    if !(p > 1.0) || trials == 0 {
        return Err(Error::invalid("probe needs p > 1 and at least one trial"));
    }
    let space = &spec.space;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cotype = Vec::with_capacity(trials);
    let kmax = basis.mode_count();
    let band = kmax.min(12);
    for _ in 0..trials {
        let f = match basis {
            SpectralBasis::FourierBox { half_width, .. } => {
                // random low-band trig sums, DC excluded so 𝓕f = 0
                let l = *half_width;
                let n_freq = 12usize;
                let mut a = vec![vec![0.0; n_freq]; space.dim];
                let mut b = vec![vec![0.0; n_freq]; space.dim];
                for comp in 0..space.dim {
                    for j in 0..n_freq {
                        a[comp][j] = rng.gen::<f64>() * 2.0 - 1.0;
                        b[comp][j] = rng.gen::<f64>() * 2.0 - 1.0;
                    }
                }
                let grid = basis.default_grid()?;
                let values = grid
                    .points
                    .iter()
                    .map(|&x| {
                        (0..space.dim)
                            .map(|comp| {
                                (0..n_freq)
                                    .map(|j| {
                                        let th = std::f64::consts::PI
                                            * (j + 1) as f64
                                            * x
                                            / l;
                                        a[comp][j] * th.cos() + b[comp][j] * th.sin()
                                    })
                                    .sum()
                            })
                            .collect()
                    })
                    .collect();
                SampledField::new(grid, values)?
            }
            _ => {
                // random real coefficients on the low band of the
                // eigenfunction basis
                let mut coeffs = vec![vec![0.0; space.dim]; kmax];
                for item in coeffs.iter_mut().take(band) {
                    for c in item.iter_mut() {
                        *c = rng.gen::<f64>() * 2.0 - 1.0;
                    }
                }
                let cv = CoefficientVector {
                    modes: Modes::Real(coeffs),
                    tail_energy: 0.0,
                };
                spectral_apply(&cv, basis, 0.0, None)?
            }
        };
        let g = g_function_field(basis, &f, spec)?;
        let fnorm = f.lq_norm(p, |v| space.norm(v));
        let gnorm = g.lq_norm(p, |v| v[0]);
        if fnorm == 0.0 {
            continue;
        }
        cotype.push(gnorm / fnorm);
    }
    if cotype.is_empty() {
        return Err(Error::NonConvergent("all probe trials degenerated".into()));
    }
    cotype.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let types: Vec<f64> = cotype.iter().rev().map(|r| 1.0 / r).collect();
    Ok(RatioReport {
        trials: cotype.len(),
        cotype_min: cotype[0],
        cotype_median: median(&cotype),
        cotype_max: *cotype.last().unwrap(),
        type_min: types[0],
        type_median: median(&types),
        type_max: *types.last().unwrap(),
    })
}

/// Pointwise g-norm of a B-valued field under the space norm, convenience
/// for tests that compare coordinatewise square-sums.
pub fn field_bnorms(f: &SampledField, space: &NormedSpace) -> Vec<f64> {
    f.values.iter().map(|v| space.norm(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::FractionalOrder;

    #[test]
    fn lusin_probe_hilbert_ratio_is_exact_constant() {
        // B = ℝ, p = q = 2, α = 1: orthogonality collapses the cotype ratio
        // to (Γ(2)/4)^{1/2} = 1/2 for every draw
        let basis = SpectralBasis::hermite(16).unwrap();
        let spec = GFunctionSpec::new(
            FractionalOrder::new(1.0).unwrap(),
            2.0,
            NormedSpace::real_line(),
        )
        .unwrap();
        let rep = lusin_ratio_probe(&basis, &spec, 2.0, 8, 11).unwrap();
        assert!(rep.trials == 8);
        assert!((rep.cotype_min - 0.5).abs() < 1e-4, "min {}", rep.cotype_min);
        assert!((rep.cotype_max - 0.5).abs() < 1e-4, "max {}", rep.cotype_max);
        assert!((rep.type_median - 2.0).abs() < 1e-3, "type {}", rep.type_median);
    }

    #[test]
    fn lusin_probe_fourier_box_trig_draws() {
        // same Hilbert collapse for the box engine; the low band has
        // λ_min = (π/L)², so the window must stretch far to the right
        let basis = SpectralBasis::fourier_box(20.0, 1024).unwrap();
        let spec = GFunctionSpec::with_window(
            FractionalOrder::new(1.0).unwrap(),
            2.0,
            NormedSpace::real_line(),
            1e-6,
            4000.0,
            96,
        )
        .unwrap();
        let rep = lusin_ratio_probe(&basis, &spec, 2.0, 6, 3).unwrap();
        assert!((rep.cotype_min - 0.5).abs() < 1e-3, "min {}", rep.cotype_min);
        assert!((rep.cotype_max - 0.5).abs() < 1e-3, "max {}", rep.cotype_max);
    }

    #[test]
    fn norms_satisfy_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for space in [
            NormedSpace::lp(4, 1.0).unwrap(),
            NormedSpace::lp(4, 1.5).unwrap(),
            NormedSpace::lp(4, 2.0).unwrap(),
            NormedSpace::lp(4, 4.0).unwrap(),
            NormedSpace::linf(4).unwrap(),
        ] {
            for _ in 0..200 {
                let u: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                let v: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                let s: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
                let c: f64 = rng.gen::<f64>() * 4.0 - 2.0;
                let cu: Vec<f64> = u.iter().map(|a| c * a).collect();
                assert!(space.norm(&u) >= 0.0);
                assert!(space.norm(&s) <= space.norm(&u) + space.norm(&v) + 1e-12);
                assert!((space.norm(&cu) - c.abs() * space.norm(&u)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn convexity_hilbert_closed_form() {
        let space = NormedSpace::lp(2, 2.0).unwrap();
        for eps in [0.5, 1.0, 1.5] {
            let est = modulus_convexity(&space, eps, 11).unwrap();
            let want = 1.0 - (1.0 - eps * eps / 4.0).sqrt();
            assert!(
                (est.value - want).abs() < 1e-4,
                "eps={eps}: got {}, want {want}",
                est.value
            );
        }
    }

    #[test]
    fn convexity_l1_flat_face() {
        let space = NormedSpace::lp(2, 1.0).unwrap();
        let est = modulus_convexity(&space, 1.0, 3).unwrap();
        assert!(est.value.abs() < 1e-6, "got {}", est.value);
    }

    #[test]
    fn convexity_l4_matches_random_search_oracle() {
        let space = NormedSpace::lp(3, 4.0).unwrap();
        let eps = 0.8;
        let est = modulus_convexity(&space, eps, 5).unwrap();
        // brute force random pairs with the constraints enforced by retraction
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut best = f64::INFINITY;
        for _ in 0..200_000 {
            let a = random_unit(&space, &mut rng);
            let mut b = random_unit(&space, &mut rng);
            retract_pair(&space, &a, &mut b, eps);
            if convexity_residual(&space, &a, &b, eps) > 1e-8 {
                continue;
            }
            let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect();
            best = best.min(1.0 - space.norm(&m));
        }
        assert!(
            est.value <= best + 1e-6 && (est.value - best).abs() < 1e-3,
            "optimizer {}, oracle {best}",
            est.value
        );
    }

    #[test]
    fn smoothness_hilbert_closed_form() {
        let space = NormedSpace::lp(2, 2.0).unwrap();
        for t in [0.25, 1.0] {
            let est = modulus_smoothness(&space, t, 13).unwrap();
            let want = (1.0 + t * t).sqrt() - 1.0;
            assert!(
                (est.value - want).abs() < 1e-4,
                "t={t}: got {}, want {want}",
                est.value
            );
        }
    }

    #[test]
    fn smoothness_vanishing_slope_at_zero_for_hilbert() {
        let space = NormedSpace::lp(3, 2.0).unwrap();
        let mut prev_ratio = f64::INFINITY;
        for t in [0.1, 0.01, 0.001] {
            let est = modulus_smoothness(&space, t, 17).unwrap();
            let ratio = est.value / t;
            assert!(ratio < prev_ratio + 1e-6);
            prev_ratio = ratio;
        }
        assert!(prev_ratio < 1e-2);
    }

    #[test]
    fn smoothness_l15_matches_random_search_oracle() {
        let space = NormedSpace::lp(3, 1.5).unwrap();
        let t = 0.5;
        let est = modulus_smoothness(&space, t, 23).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(321);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..200_000 {
            let a = random_unit(&space, &mut rng);
            let b = random_unit(&space, &mut rng);
            let p: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + t * y).collect();
            let q: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - t * y).collect();
            best = best.max((space.norm(&p) + space.norm(&q)) / 2.0 - 1.0);
        }
        assert!(
            est.value >= best - 1e-6 && (est.value - best).abs() < 1e-3,
            "optimizer {}, oracle {best}",
            est.value
        );
    }

    #[test]
    fn convexity_monotone_in_eps() {
        let space = NormedSpace::lp(3, 3.0).unwrap();
        let mut prev = -1.0;
        for eps in [0.4, 0.8, 1.2, 1.6] {
            let est = modulus_convexity(&space, eps, 29).unwrap();
            assert!(est.value >= prev - 1e-5, "eps={eps}");
            prev = est.value;
        }
    }

    #[test]
    fn empirical_uniform_convexity_and_smoothness_exponents() {
        // inf δ(ε)/ε^max(q,2) > 0 and sup ρ(t)/t^min(q,2) < ∞ for ℓ^q
        for q in [1.5, 2.0, 3.0, 4.0] {
            let space = NormedSpace::lp(3, q).unwrap();
            let qc = q.max(2.0);
            let mut inf_fit = f64::INFINITY;
            for eps in [0.2, 0.6, 1.0, 1.4, 1.8] {
                let est = modulus_convexity(&space, eps, 31).unwrap();
                inf_fit = inf_fit.min(est.value / eps.powf(qc));
            }
            assert!(inf_fit > 1e-4, "q={q}: inf fit {inf_fit}");

            let qs = q.min(2.0);
            let mut sup_fit: f64 = 0.0;
            for t in [0.05, 0.2, 0.5, 1.0] {
                let est = modulus_smoothness(&space, t, 37).unwrap();
                sup_fit = sup_fit.max(est.value / t.powf(qs));
            }
            assert!(sup_fit.is_finite() && sup_fit < 10.0, "q={q}: sup fit {sup_fit}");
        }
    }

    #[test]
    fn constant_martingale_square_function() {
        let mart = {
            let m0 = vec![vec![0.6, -0.8]; 8];
            FiniteMartingale::new(3, vec![m0.clone(), m0.clone(), m0.clone(), m0]).unwrap()
        };
        let space = NormedSpace::lp(2, 2.0).unwrap();
        let s = martingale_square_fn(&mart, &space, 2.0).unwrap();
        for v in s {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn l2_identity_random_real_martingales() {
        let space = NormedSpace::real_line();
        for seed in 0..100 {
            let mart = FiniteMartingale::random(6, 1, seed);
            let s = martingale_square_fn(&mart, &space, 2.0).unwrap();
            let lhs: f64 = s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
            let rhs = mart.final_second_moment();
            assert!(
                (lhs - rhs).abs() < 1e-12 * rhs.max(1.0),
                "seed {seed}: E[S²] {lhs}, E[M_N²] {rhs}"
            );
        }
    }

    #[test]
    fn square_function_matches_independent_resummation() {
        let mart = FiniteMartingale::random(6, 4, 42);
        let space = NormedSpace::lp(4, 2.0).unwrap();
        let got = martingale_square_fn(&mart, &space, 2.0).unwrap();
        for atom in 0..mart.atoms() {
            let mut acc: f64 = mart.values[0][atom].iter().map(|x| x * x).sum();
            for n in 1..=mart.depth {
                acc += mart.values[n][atom]
                    .iter()
                    .zip(&mart.values[n - 1][atom])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
            }
            // summation order differs between the two accumulations
            assert!(
                (got[atom] - acc.sqrt()).abs() < 1e-13 * acc.sqrt().max(1.0),
                "atom {atom}: {} vs {}",
                got[atom],
                acc.sqrt()
            );
        }
    }

    #[test]
    fn martingale_constructor_rejects_broken_property() {
        let atoms = 4;
        let m0 = vec![vec![0.0]; atoms];
        let mut m1 = vec![vec![1.0]; atoms];
        m1[2] = vec![0.5];
        m1[3] = vec![0.5]; // averages no longer match M_0
        let m2 = m1.clone();
        assert!(FiniteMartingale::new(2, vec![m0, m1, m2]).is_err());
    }

    #[test]
    fn martingale_constructor_rejects_non_adapted() {
        let atoms = 4;
        let mut m0 = vec![vec![0.0]; atoms];
        m0[0] = vec![1.0]; // M_0 must be constant on everything
        let m1 = m0.clone();
        let m2 = m0.clone();
        assert!(FiniteMartingale::new(2, vec![m0, m1, m2]).is_err());
    }
}
