//! Named experiments, one per acceptance criterion, with CSV + JSON
//! report emission.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;
use statrs::function::gamma::gamma;

use crate::banach::{
    martingale_square_fn, modulus_convexity, modulus_smoothness, FiniteMartingale, NormedSpace,
};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::frac::{FractionalOrder, TimeProfile};
use crate::grid::{Domain, Grid, SampledField};
use crate::kernels::{
    certify_bound, heat_kernel, hermite_markov_defect_closed, markov_defect,
    poisson_kernel_classical, BoundCertificate, CertificationGrid, SemigroupId,
};
use crate::lpfun::{
    area_integral_field, covering, g_function_field, hardy_transform, subordinate_poisson_kernel,
    subordination_weight, GFunctionSpec, HardyDirection,
};
use crate::orthobasis::{hermite_values, laguerre_values, BesselOrder};
use crate::spectral::{polarization_pairing, SpectralBasis};

pub const EXPERIMENTS: &[&str] = &[
    "mehler_vs_series",
    "hille_hardy_vs_series",
    "markov_defect",
    "subordination",
    "weyl_eigenfunction",
    "composition",
    "polarization_hermite",
    "polarization_classical",
    "monotonicity",
    "area_vs_g",
    "bound_certificates",
    "moduli",
    "martingale_identity",
    "hardy",
    "covering",
    "determinism",
];

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
    pub csv_header: String,
    pub csv_rows: Vec<String>,
    /// structured payloads (e.g. serialized bound certificates)
    pub artifacts: serde_json::Value,
}

impl ExperimentResult {
    fn new(header: &str) -> ExperimentResult {
        ExperimentResult {
            metrics: BTreeMap::new(),
            pass: true,
            csv_header: header.to_string(),
            csv_rows: Vec::new(),
            artifacts: serde_json::Value::Null,
        }
    }

    fn require(&mut self, ok: bool) {
        self.pass = self.pass && ok;
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    match cfg.experiment.as_str() {
        "mehler_vs_series" => mehler_vs_series(cfg),
        "hille_hardy_vs_series" => hille_hardy_vs_series(cfg),
        "markov_defect" => markov_defect_exp(cfg),
        "subordination" => subordination_exp(cfg),
        "weyl_eigenfunction" => weyl_eigenfunction(cfg),
        "composition" => composition(cfg),
        "polarization_hermite" => polarization_hermite(cfg),
        "polarization_classical" => polarization_classical(cfg),
        "monotonicity" => monotonicity(cfg),
        "area_vs_g" => area_vs_g(cfg),
        "bound_certificates" => bound_certificates(cfg),
        "moduli" => moduli(cfg),
        "martingale_identity" => martingale_identity(cfg),
        "hardy" => hardy(cfg),
        "covering" => covering_exp(cfg),
        "determinism" => determinism(cfg),
        other => Err(Error::config(
            "experiment",
            format!("unknown experiment '{other}'; see --list"),
        )),
    }
}

/// Resolved-config echo + metrics + verdict; `runtime_seconds` sits at the
/// top level so determinism checks can strip that single line.
pub fn summary_json(
    cfg: &ExperimentConfig,
    res: &ExperimentResult,
    runtime_seconds: f64,
) -> serde_json::Value {
    json!({
        "experiment": cfg.experiment,
        "parameters": cfg,
        "metrics": res.metrics,
        "pass": res.pass,
        "seed": cfg.seed,
        "artifacts": res.artifacts,
        "runtime_seconds": runtime_seconds,
    })
}

/// Run, then write `<out>/<experiment>.csv` and `<out>/<experiment>.json`.
pub fn run_and_write(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(ExperimentResult, PathBuf)> {
    let start = std::time::Instant::now();
    let res = run_experiment(cfg)?;
    let runtime = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", cfg.experiment));
    let mut csv = String::with_capacity(64 * (res.csv_rows.len() + 1));
    csv.push_str(&res.csv_header);
    csv.push('\n');
    for row in &res.csv_rows {
        csv.push_str(row);
        csv.push('\n');
    }
    std::fs::write(&csv_path, csv)?;
    let json_path = out_dir.join(format!("{}.json", cfg.experiment));
    let text = serde_json::to_string_pretty(&summary_json(cfg, &res, runtime))
        .map_err(|e| Error::config("summary", format!("serialization failed: {e}")))?;
    std::fs::write(&json_path, text + "\n")?;
    Ok((res, json_path))
}

// ---------------------------------------------------------------------------
// kernels vs spectral series
// ---------------------------------------------------------------------------

/// Truncation so the dropped spectral tail sits below ~1e−10 of the value.
fn series_truncation(t: f64) -> usize {
    ((14.0 / t).ceil() as usize).max(60)
}

fn mehler_vs_series(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let tol = cfg.tolerances.rel.unwrap_or(1e-8);
    let id = SemigroupId::hermite(1)?;
    let mut res = ExperimentResult::new("t,x,y,closed_form,series,rel_err");
    let mut max_err: f64 = 0.0;
    let mut checked = 0usize;
    let pts: Vec<f64> = (0..13).map(|i| -3.0 + 0.5 * i as f64).collect();
    for t in [0.05, 0.2, 1.0, 2.0] {
        let k_max = series_truncation(t);
        for &x in &pts {
            let hx = hermite_values(k_max, x);
            for &y in &pts {
                let hy = hermite_values(k_max, y);
                let mut series = 0.0;
                let mut abs_sum = 0.0;
                for k in 0..=k_max {
                    let term = (-((2 * k + 1) as f64) * t).exp() * hx[k] * hy[k];
                    series += term;
                    abs_sum += term.abs();
                }
                // skip points below the series' own round-off floor; the
                // truncated sum carries cancellation plus recurrence error
                // of order ~1e−13 of the absolute sum at K ≈ 300
                if abs_sum * 1e-12 > tol * series.abs() {
                    continue;
                }
                checked += 1;
                let closed = heat_kernel(&id, t, &[x], &[y])?;
                let rel = ((closed - series) / series).abs();
                max_err = max_err.max(rel);
                res.csv_rows
                    .push(format!("{t},{x},{y},{closed},{series},{rel}"));
            }
        }
    }
    res.metrics.insert("max_rel_err".into(), max_err);
    res.metrics.insert("checked_points".into(), checked as f64);
    res.require(max_err <= tol && checked > 60);
    Ok(res)
}

fn hille_hardy_vs_series(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let tol = cfg.tolerances.rel.unwrap_or(1e-6);
    let mut res = ExperimentResult::new("beta,t,x,y,closed_form,series,rel_err");
    let mut max_err: f64 = 0.0;
    let mut checked = 0usize;
    for beta in [-0.4, 0.5, 1.0, 2.5] {
        let id = SemigroupId::laguerre(beta)?;
        let ord = BesselOrder::new(beta)?;
        for t in [0.05, 0.2, 1.0, 2.0] {
            let k_max = series_truncation(t);
            for x in [0.1, 0.8, 2.0, 4.0] {
                let px = laguerre_values(k_max, ord, x);
                for y in [0.3, 1.5, 3.0] {
                    let py = laguerre_values(k_max, ord, y);
                    let mut series = 0.0;
                    let mut abs_sum = 0.0;
                    for k in 0..=k_max {
                        let term = (-(2.0 * k as f64 + beta + 1.0) * t).exp() * px[k] * py[k];
                        series += term;
                        abs_sum += term.abs();
                    }
                    if abs_sum * 1e-12 > tol * series.abs() {
                        continue;
                    }
                    checked += 1;
                    let closed = heat_kernel(&id, t, &[x], &[y])?;
                    let rel = ((closed - series) / series).abs();
                    max_err = max_err.max(rel);
                    res.csv_rows
                        .push(format!("{beta},{t},{x},{y},{closed},{series},{rel}"));
                }
            }
        }
    }
    res.metrics.insert("max_rel_err".into(), max_err);
    res.metrics.insert("checked_points".into(), checked as f64);
    res.require(max_err <= tol && checked > 100);
    Ok(res)
}

fn markov_defect_exp(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let tol = cfg.tolerances.rel.unwrap_or(1e-6);
    let id = SemigroupId::hermite(1)?;
    let mut res = ExperimentResult::new("t,x,defect,closed_form,rel_err");
    let mut max_err: f64 = 0.0;
    let mut max_val: f64 = 0.0;
    for t in [0.25, 0.5, 1.0] {
        for x in [0.0, 1.0, 2.0] {
            let got = markov_defect(&id, t, &[x])?;
            let want = hermite_markov_defect_closed(1, t, &[x]);
            let rel = ((got - want) / want).abs();
            max_err = max_err.max(rel);
            max_val = max_val.max(got);
            res.csv_rows.push(format!("{t},{x},{got},{want},{rel}"));
        }
    }
    res.metrics.insert("max_rel_err".into(), max_err);
    res.metrics.insert("max_defect_value".into(), max_val);
    res.require(max_err <= tol && max_val < 1.0);
    Ok(res)
}

fn subordination_exp(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let kernel_tol = cfg.tolerances.rel.unwrap_or(1e-6);
    let scalar_tol = 1e-8;
    let id = SemigroupId::classical(1)?;
    let mut res = ExperimentResult::new("kind,t,param,got,want,rel_err");
    let mut max_kernel: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        for z in [0.0, 1.0, 3.0] {
            let got = subordinate_poisson_kernel(&id, t, &[z], &[0.0])?;
            let want = poisson_kernel_classical(1, t, &[z])?;
            let rel = ((got - want) / want).abs();
            max_kernel = max_kernel.max(rel);
            res.csv_rows.push(format!("kernel,{t},{z},{got},{want},{rel}"));
        }
    }
    let mut max_scalar: f64 = 0.0;
    for lambda in [1.0_f64, 4.0] {
        for t in [0.5, 1.0, 2.0] {
            let got = subordination_weight(lambda, t);
            let want = (-t * lambda.sqrt()).exp();
            let rel = ((got - want) / want).abs();
            max_scalar = max_scalar.max(rel);
            res.csv_rows
                .push(format!("scalar,{t},{lambda},{got},{want},{rel}"));
        }
    }
    res.metrics.insert("max_kernel_rel_err".into(), max_kernel);
    res.metrics.insert("max_scalar_rel_err".into(), max_scalar);
    res.require(max_kernel <= kernel_tol && max_scalar <= scalar_tol);
    Ok(res)
}

fn weyl_eigenfunction(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let tol = cfg.tolerances.rel.unwrap_or(1e-7);
    let mut res = ExperimentResult::new("alpha,lambda,t,got,want,rel_err");
    let mut max_err: f64 = 0.0;
    for alpha in [0.3, 0.5, 1.0, 1.7] {
        let ord = FractionalOrder::new(alpha)?;
        for lambda in [0.5_f64, 1.0, 4.0] {
            let phi = TimeProfile::exponential(1.0, lambda);
            for t in [0.2, 1.0] {
                let got = crate::frac::weyl_derivative_fn(&phi, &ord, t)?.value;
                let want = ord.sign() * lambda.powf(alpha) * (-lambda * t).exp();
                let rel = ((got - want) / want).abs();
                max_err = max_err.max(rel);
                res.csv_rows
                    .push(format!("{alpha},{lambda},{t},{got},{want},{rel}"));
            }
        }
    }
    res.metrics.insert("max_rel_err".into(), max_err);
    res.require(max_err <= tol);
    Ok(res)
}

fn composition(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    // ∂^γ ∂^β e^{−λt} vs ∂^{γ+β} e^{−λt}: inner derivative applied through
    // the eigenfunction law, outer by the defining quadrature; eigenvalues
    // drawn from both engines' spectra (classical ξ², hermite 2k+1)
    let tol = cfg.tolerances.rel.unwrap_or(1e-6);
    let mut res = ExperimentResult::new("engine,lambda,gamma,beta,t,got,want,rel_err");
    let mut max_err: f64 = 0.0;
    for (engine, lambda) in [("classical", 0.25_f64), ("classical", 1.0), ("hermite", 1.0), ("hermite", 3.0)] {
        for gamma_o in [0.3, 0.7, 1.2] {
            for beta_o in [0.3, 0.7, 1.2] {
                let ob = FractionalOrder::new(beta_o)?;
                let og = FractionalOrder::new(gamma_o)?;
                let inner_scale = ob.sign() * lambda.powf(beta_o);
                let phi = TimeProfile::exponential(inner_scale, lambda);
                for t in [0.4, 1.0] {
                    let got = crate::frac::weyl_derivative_fn(&phi, &og, t)?.value;
                    let os = FractionalOrder::new(gamma_o + beta_o)?;
                    let want = os.sign() * lambda.powf(gamma_o + beta_o) * (-lambda * t).exp();
                    // signs compose as (−1)^{m_γ+m_β} vs (−1)^{m_{γ+β}};
                    // the square functions only consume magnitudes
                    let rel = ((got.abs() - want.abs()) / want.abs()).abs();
                    max_err = max_err.max(rel);
                    res.csv_rows.push(format!(
                        "{engine},{lambda},{gamma_o},{beta_o},{t},{got},{want},{rel}"
                    ));
                }
            }
        }
    }
    res.metrics.insert("max_rel_err".into(), max_err);
    res.require(max_err <= tol);
    Ok(res)
}

fn hermite_field(basis: &SpectralBasis, weights: &[(usize, f64)]) -> Result<SampledField> {
    let grid = basis.default_grid()?;
    let kmax = weights.iter().map(|(k, _)| *k).max().unwrap_or(0);
    let values = grid
        .points
        .iter()
        .map(|&x| {
            let h = hermite_values(kmax, x);
            vec![weights.iter().map(|(k, a)| a * h[*k]).sum()]
        })
        .collect();
    SampledField::new(grid, values)
}

fn polarization_hermite(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let tol = cfg.tolerances.rel.unwrap_or(1e-6);
    let basis = SpectralBasis::hermite(8)?;
    let f = hermite_field(&basis, &[(0, 1.0), (2, 0.3)])?;
    let g = hermite_field(&basis, &[(0, 1.0), (1, -1.0)])?;
    let mut res = ExperimentResult::new("alpha,lhs,rhs,relative_gap");
    let mut max_gap: f64 = 0.0;
    for alpha in [0.5, 1.0] {
        let ord = FractionalOrder::new(alpha)?;
        let rep = polarization_pairing(&f, &g, &basis, &ord)?;
        max_gap = max_gap.max(rep.relative_gap);
        res.csv_rows
            .push(format!("{alpha},{},{},{}", rep.lhs, rep.rhs, rep.relative_gap));
    }
    res.metrics.insert("relative_gap".into(), max_gap);
    res.require(max_gap <= tol);
    Ok(res)
}

fn polarization_classical(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let tol = cfg.tolerances.rel.unwrap_or(1e-4);
    let basis = SpectralBasis::fourier_box(30.0, 4096)?;
    let grid = basis.default_grid()?;
    let f = SampledField::from_fn(grid, |x| (-x * x / 2.0).exp());
    let mut res = ExperimentResult::new("alpha,lhs,rhs,relative_gap");
    let mut max_gap: f64 = 0.0;
    for alpha in [0.5, 1.0] {
        let ord = FractionalOrder::new(alpha)?;
        let rep = polarization_pairing(&f, &f, &basis, &ord)?;
        max_gap = max_gap.max(rep.relative_gap);
        res.csv_rows
            .push(format!("{alpha},{},{},{}", rep.lhs, rep.rhs, rep.relative_gap));
    }
    res.metrics.insert("relative_gap".into(), max_gap);
    res.require(max_gap <= tol);
    Ok(res)
}

fn monotonicity(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    // Γ-normalized order comparison g^α/Γ(α) ≤ g^β/Γ(β): the normalization
    // is forced by the sharp constant Γ(α)/Γ(β) from the composition
    // identity plus Minkowski (a bare single mode has g^0.5 > g^1.2)
    let slack = cfg.tolerances.rel.unwrap_or(1e-8);
    let (alpha, beta) = (0.5, 1.2);
    let (na, nb) = (gamma(alpha), gamma(beta));
    let mut res = ExperimentResult::new("engine,x,g_alpha_normalized,g_beta_normalized,margin");
    let mut worst: f64 = f64::INFINITY;

    let check = |engine: &str,
                     res: &mut ExperimentResult,
                     worst: &mut f64,
                     basis: &SpectralBasis,
                     f: &SampledField,
                     spec_a: &GFunctionSpec,
                     spec_b: &GFunctionSpec|
     -> Result<()> {
        let ga = g_function_field(basis, f, spec_a)?;
        let gb = g_function_field(basis, f, spec_b)?;
        let n = ga.len();
        for j in 0..41 {
            let i = j * (n - 1) / 40;
            let a = ga.values[i][0] / na;
            let b = gb.values[i][0] / nb;
            let margin = b - a;
            *worst = worst.min(margin);
            res.csv_rows
                .push(format!("{engine},{},{a},{b},{margin}", ga.grid.points[i]));
        }
        Ok(())
    };

    let hb = SpectralBasis::hermite(10)?;
    let hf = hermite_field(&hb, &[(0, 1.0), (3, -0.6), (7, 0.2)])?;
    let sa = GFunctionSpec::new(FractionalOrder::new(alpha)?, 2.0, NormedSpace::real_line())?;
    let sb = GFunctionSpec::new(FractionalOrder::new(beta)?, 2.0, NormedSpace::real_line())?;
    check("hermite", &mut res, &mut worst, &hb, &hf, &sa, &sb)?;

    let cb = SpectralBasis::fourier_box(20.0, 1024)?;
    let cf = SampledField::from_fn(cb.default_grid()?, |x| (-x * x / 2.0).exp());
    // the box's lowest eigenvalue is (π/20)², so the window stretches right
    let ca = GFunctionSpec::with_window(
        FractionalOrder::new(alpha)?,
        2.0,
        NormedSpace::real_line(),
        1e-4,
        600.0,
        72,
    )?;
    let cbeta = GFunctionSpec::with_window(
        FractionalOrder::new(beta)?,
        2.0,
        NormedSpace::real_line(),
        1e-4,
        600.0,
        72,
    )?;
    check("classical", &mut res, &mut worst, &cb, &cf, &ca, &cbeta)?;

    res.metrics.insert("worst_margin".into(), worst);
    res.require(worst >= -slack);
    Ok(res)
}

fn area_vs_g(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let tol = cfg.tolerances.rel.unwrap_or(0.02);
    let basis = SpectralBasis::hermite(8)?;
    let f = hermite_field(&basis, &[(0, 1.0), (2, 0.4)])?;
    let mut res = ExperimentResult::new("q,area_norm_q,g_norm_q,rel_gap");
    let mut max_gap: f64 = 0.0;
    for q in [2.0, 3.0] {
        let spec = GFunctionSpec::new(FractionalOrder::new(1.0)?, q, NormedSpace::real_line())?;
        let g = g_function_field(&basis, &f, &spec)?;
        let a = area_integral_field(&basis, &f, &spec)?;
        let gq: f64 = g
            .grid
            .weights
            .iter()
            .zip(&g.values)
            .map(|(w, v)| w * v[0].powf(q))
            .sum();
        let aq: f64 = a
            .grid
            .weights
            .iter()
            .zip(&a.values)
            .map(|(w, v)| w * v[0].powf(q))
            .sum();
        let gap = ((aq - gq) / gq).abs();
        max_gap = max_gap.max(gap);
        res.csv_rows.push(format!("{q},{aq},{gq},{gap}"));
    }
    res.metrics.insert("max_rel_gap".into(), max_gap);
    res.require(max_gap <= tol);
    Ok(res)
}

fn bound_certificates(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let c = 0.125;
    let mut res = ExperimentResult::new("semigroup,k,decay_rate,constant,argmax_t,argmax_x,argmax_y");
    let mut certs: Vec<BoundCertificate> = Vec::new();
    let cases: Vec<(SemigroupId, CertificationGrid)> = vec![
        (
            SemigroupId::classical(1)?,
            CertificationGrid::standard(0.05, 2.0, 12, -3.0, 3.0, 15)?,
        ),
        (
            SemigroupId::hermite(1)?,
            CertificationGrid::standard(0.05, 2.0, 12, -3.0, 3.0, 15)?,
        ),
        (
            SemigroupId::laguerre(cfg.semigroup.beta)?,
            CertificationGrid::standard(0.05, 2.0, 12, 0.2, 4.0, 15)?,
        ),
    ];
    let mut all_finite = true;
    for (id, grid) in &cases {
        for k in [0usize, 1] {
            let cert = certify_bound(id, k, c, grid)?;
            all_finite = all_finite && cert.constant.is_finite() && cert.constant > 0.0;
            res.csv_rows.push(format!(
                "{},{k},{},{},{},{},{}",
                cert.semigroup,
                cert.decay_rate,
                cert.constant,
                cert.argmax_t,
                cert.argmax_x,
                cert.argmax_y
            ));
            res.metrics
                .insert(format!("constant_{}_k{k}", id.label()), cert.constant);
            certs.push(cert);
        }
    }
    res.artifacts = serde_json::to_value(&certs)
        .map_err(|e| Error::config("certificates", format!("serialization failed: {e}")))?;
    res.require(all_finite);
    Ok(res)
}

fn moduli(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let tol = cfg.tolerances.rel.unwrap_or(1e-4);
    let seed = cfg.seed;
    let mut res = ExperimentResult::new("quantity,parameter,got,reference");
    let l2 = NormedSpace::lp(4, 2.0)?;

    let mut max_l2_err: f64 = 0.0;
    for (i, eps) in [0.5, 1.0, 1.5].into_iter().enumerate() {
        let d = modulus_convexity(&l2, eps, seed + i as u64)?;
        let want = 1.0 - (1.0 - eps * eps / 4.0).sqrt();
        max_l2_err = max_l2_err.max((d.value - want).abs());
        res.csv_rows
            .push(format!("delta_l2,{eps},{},{want}", d.value));
    }
    for (i, t) in [0.25, 1.0].into_iter().enumerate() {
        let r = modulus_smoothness(&l2, t, seed + 10 + i as u64)?;
        let want = (1.0 + t * t).sqrt() - 1.0;
        max_l2_err = max_l2_err.max((r.value - want).abs());
        res.csv_rows.push(format!("rho_l2,{t},{},{want}", r.value));
    }

    let l1 = NormedSpace::lp(2, 1.0)?;
    let flat = modulus_convexity(&l1, 1.0, seed + 20)?;
    res.csv_rows.push(format!("delta_l1,1,{},0", flat.value));

    // empirical q-uniform convexity: inf δ_{ℓ^q}(ε)/ε^q > 0 for q ≥ 2
    let mut min_conv_fit = f64::INFINITY;
    for (iq, q) in [2.0, 3.0, 4.0].into_iter().enumerate() {
        let sp = NormedSpace::lp(4, q)?;
        let mut fit = f64::INFINITY;
        for (ie, eps) in (1..=9).map(|i| 0.2 * i as f64).enumerate() {
            let d = modulus_convexity(&sp, eps, seed + 100 + (iq * 16 + ie) as u64)?;
            fit = fit.min(d.value / eps.powf(q));
        }
        min_conv_fit = min_conv_fit.min(fit);
        res.csv_rows.push(format!("convexity_fit,{q},{fit},0"));
    }

    // empirical q-uniform smoothness: sup ρ_{ℓ^q}(t)/t^q finite for q ≤ 2
    let mut max_smooth_fit: f64 = 0.0;
    for (iq, q) in [1.5, 2.0].into_iter().enumerate() {
        let sp = NormedSpace::lp(4, q)?;
        let mut fit: f64 = 0.0;
        for (it, t) in [0.05, 0.1, 0.2, 0.5, 1.0].into_iter().enumerate() {
            let r = modulus_smoothness(&sp, t, seed + 200 + (iq * 16 + it) as u64)?;
            fit = fit.max(r.value / t.powf(q));
        }
        max_smooth_fit = max_smooth_fit.max(fit);
        res.csv_rows.push(format!("smoothness_fit,{q},{fit},0"));
    }

    res.metrics.insert("max_l2_closed_form_err".into(), max_l2_err);
    res.metrics.insert("delta_l1_at_1".into(), flat.value);
    res.metrics.insert("min_convexity_fit".into(), min_conv_fit);
    res.metrics.insert("max_smoothness_fit".into(), max_smooth_fit);
    res.require(max_l2_err <= tol);
    res.require(flat.value <= 1e-6);
    res.require(min_conv_fit > 0.0);
    res.require(max_smooth_fit.is_finite());
    Ok(res)
}

fn martingale_identity(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let tol = cfg.tolerances.rel.unwrap_or(1e-12);
    let space = NormedSpace::real_line();
    let mut res = ExperimentResult::new("seed,e_s2,e_mn2,abs_err");
    let mut max_err: f64 = 0.0;
    for i in 0..cfg.trials {
        let seed = cfg.seed + i as u64;
        let mart = FiniteMartingale::random(6, 1, seed);
        let s = martingale_square_fn(&mart, &space, 2.0)?;
        let lhs = s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
        let rhs = mart.final_second_moment();
        let err = (lhs - rhs).abs() / rhs.max(1.0);
        max_err = max_err.max(err);
        res.csv_rows.push(format!("{seed},{lhs},{rhs},{err}"));
    }
    res.metrics.insert("max_rel_err".into(), max_err);
    res.metrics.insert("trials".into(), cfg.trials as f64);
    res.require(max_err <= tol);
    Ok(res)
}

fn hardy(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let exact_tol = cfg.tolerances.rel.unwrap_or(1e-10);
    let mut res = ExperimentResult::new("check,parameter,got,want");
    // closed-form examples on a jump-resolving grid
    let mut pts = vec![1e-6];
    let mut x = 0.05;
    while x < 0.9999 {
        pts.push(x);
        x += 0.05;
    }
    pts.push(1.0);
    pts.push(1.0 + 1e-12);
    let mut y = 1.05;
    while y <= 4.0 {
        pts.push(y);
        y += 0.05;
    }
    pts.push(std::f64::consts::E.recip());
    pts.push(2.0);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let grid = Grid::from_points(pts, Domain::HalfLine)?;
    let chi = SampledField::from_fn(grid, |x| if x <= 1.0 { 1.0 } else { 0.0 });

    let h0 = hardy_transform(&chi, HardyDirection::FromZero)?;
    let i2 = h0.grid.points.iter().position(|&p| p == 2.0).unwrap();
    let e0 = (h0.values[i2][0] - 0.5).abs();
    res.csv_rows.push(format!("h0_indicator,2,{},0.5", h0.values[i2][0]));

    let hinf = hardy_transform(&chi, HardyDirection::ToInfinity)?;
    let e_inv = std::f64::consts::E.recip();
    let ie = hinf
        .grid
        .points
        .iter()
        .position(|&p| (p - e_inv).abs() < 1e-14)
        .unwrap();
    let e1 = (hinf.values[ie][0] - 1.0).abs();
    res.csv_rows
        .push(format!("hinf_indicator,{e_inv},{},1", hinf.values[ie][0]));

    // near-extremal lower-bound family (R must reach 1e7 before p = 2
    // clears 0.9·p/(p−1); the approach to the operator norm is logarithmic)
    let mut min_frac = f64::INFINITY;
    for p in [2.0_f64, 4.0] {
        let want = p / (p - 1.0);
        let mut best: f64 = 0.0;
        for r_max in [1e4, 1e7] {
            let n = 6000;
            let lo = 0.5_f64;
            let lr = (r_max * 100.0 / lo).ln() / (n - 1) as f64;
            let pts: Vec<f64> = (0..n).map(|i| lo * (lr * i as f64).exp()).collect();
            let grid = Grid::from_points(pts, Domain::HalfLine)?;
            let g = SampledField::from_fn(grid, move |y| {
                if y > 1.0 && y < r_max {
                    y.powf(-1.0 / p)
                } else {
                    0.0
                }
            });
            let h = hardy_transform(&g, HardyDirection::FromZero)?;
            let norm = |f: &SampledField| f.lq_norm(p, |v| v[0].abs());
            let ratio = norm(&h) / norm(&g);
            best = best.max(ratio);
            res.csv_rows.push(format!("lower_bound_p{p},{r_max},{ratio},{want}"));
        }
        min_frac = min_frac.min(best / want);
    }
    res.metrics.insert("max_closed_form_err".into(), e0.max(e1));
    res.metrics.insert("min_norm_fraction".into(), min_frac);
    res.require(e0.max(e1) <= exact_tol);
    res.require(min_frac >= 0.9);
    Ok(res)
}

fn covering_exp(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let _ = cfg;
    let window = (-20.0, 20.0);
    let fam = covering(window, 2.0)?;
    let mut res = ExperimentResult::new("center,radius");
    for (c, r) in fam.centers.iter().zip(&fam.radii) {
        res.csv_rows.push(format!("{c},{r}"));
    }
    let covers = fam.covers(window, 1e-2);
    // ρ-ratio sup, independently of the family, at two sweep resolutions
    let sweep = |step: f64| -> f64 {
        let m = 2.0;
        let mut sup: f64 = 0.0;
        let mut x = window.0;
        while x <= window.1 {
            let rx = crate::lpfun::critical_radius(&[x]);
            let mut y = x - m * rx;
            while y <= x + m * rx {
                sup = sup.max(rx / crate::lpfun::critical_radius(&[y]));
                y += step;
            }
            x += step;
        }
        sup
    };
    let sup_coarse = sweep(5e-2);
    let sup_fine = sweep(2.5e-2);
    res.metrics.insert("balls".into(), fam.centers.len() as f64);
    res.metrics.insert("multiplicity".into(), fam.multiplicity as f64);
    res.metrics.insert("ratio_sup_coarse".into(), sup_coarse);
    res.metrics.insert("ratio_sup_fine".into(), sup_fine);
    res.metrics.insert("covers".into(), if covers { 1.0 } else { 0.0 });
    res.require(covers);
    res.require(fam.multiplicity >= 1 && fam.multiplicity < 100);
    res.require(sup_coarse.is_finite() && sup_fine.is_finite());
    res.require((sup_fine - sup_coarse).abs() <= 0.01 * sup_coarse);
    Ok(res)
}

fn determinism(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    // run a reference experiment twice with the same seed and compare the
    // serialized summaries byte for byte (runtime excluded by construction)
    let mut inner = cfg.clone();
    inner.experiment = "polarization_hermite".into();
    let a = run_experiment(&inner)?;
    let b = run_experiment(&inner)?;
    let ja = serde_json::to_string_pretty(&summary_json(&inner, &a, 0.0))
        .map_err(|e| Error::config("summary", format!("serialization failed: {e}")))?;
    let jb = serde_json::to_string_pretty(&summary_json(&inner, &b, 0.0))
        .map_err(|e| Error::config("summary", format!("serialization failed: {e}")))?;
    let identical = ja == jb && a.csv_rows == b.csv_rows;
    let mut res = ExperimentResult::new("run,summary_bytes");
    res.csv_rows.push(format!("1,{}", ja.len()));
    res.csv_rows.push(format!("2,{}", jb.len()));
    res.metrics
        .insert("byte_identical".into(), if identical { 1.0 } else { 0.0 });
    res.metrics.insert("inner_pass".into(), if a.pass { 1.0 } else { 0.0 });
    res.require(identical && a.pass);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(name: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.experiment = name.into();
        c
    }

    #[test]
    fn unknown_experiment_is_config_error() {
        let err = run_experiment(&cfg("no_such_probe")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn polarization_hermite_passes_and_reports_gap() {
        let res = run_experiment(&cfg("polarization_hermite")).unwrap();
        assert!(res.pass);
        assert!(res.metrics["relative_gap"] <= 1e-6);
        assert_eq!(res.csv_rows.len(), 2);
    }

    #[test]
    fn determinism_wrapper_passes() {
        let res = run_experiment(&cfg("determinism")).unwrap();
        assert!(res.pass);
        assert_eq!(res.metrics["byte_identical"], 1.0);
    }

    #[test]
    fn run_and_write_emits_csv_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let (res, json_path) = run_and_write(&cfg("markov_defect"), dir.path()).unwrap();
        assert!(res.pass);
        let text = std::fs::read_to_string(json_path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["experiment"], "markov_defect");
        assert_eq!(v["pass"], true);
        assert_eq!(v["seed"], 7);
        assert!(v["runtime_seconds"].as_f64().unwrap() >= 0.0);
        let csv = std::fs::read_to_string(dir.path().join("markov_defect.csv")).unwrap();
        assert!(csv.starts_with("t,x,defect,closed_form,rel_err\n"));
        assert_eq!(csv.lines().count(), 10);
    }
}
