//! Error norms against reference quadrature, stability-bound audits, and
//! the experiment harness that produces the error tables and sweep data.

use crate::connection::{fibonacci_sphere, AlphaScalar};
use crate::hyperinterp::{
    classical_hyperinterpolation, efficient_hyperinterpolation, efficient_weights,
    sample_function, Expansion,
};
use crate::moments::KernelDescriptor;
use crate::orthopoly::{Point, RegionKind, SphericalPoint};
use crate::quadrature::{
    estimate_mz_eta, gauss_legendre, load_spherical_design, sphere_product_rule, QuadratureRule,
};
use crate::reference::{self, ReferenceGrid};
use crate::scalar::Scalar;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Named smooth factors used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// `(1.2 - x^2)^(-1)` on the interval.
    RungeShifted,
    /// `exp(-x^2)` on the interval.
    Gauss,
    /// `cos(cosh(x z) - 2 y)` on the sphere.
    SphereCos,
    /// `exp(x + y + z)` on the sphere.
    SphereExp,
}

impl TestFunction {
    pub fn eval(&self, p: &Point) -> f64 {
        match (self, p) {
            (TestFunction::RungeShifted, Point::Interval(x)) => (1.2 - x * x).recip(),
            (TestFunction::Gauss, Point::Interval(x)) => (-x * x).exp(),
            (TestFunction::SphereCos, Point::Sphere(q)) => ((q.x * q.z).cosh() - 2.0 * q.y).cos(),
            (TestFunction::SphereExp, Point::Sphere(q)) => (q.x + q.y + q.z).exp(),
            _ => panic!("test function/region mismatch"),
        }
    }

    pub fn region_kind(&self) -> RegionKind {
        match self {
            TestFunction::RungeShifted | TestFunction::Gauss => RegionKind::Interval,
            TestFunction::SphereCos | TestFunction::SphereExp => RegionKind::Sphere,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::RungeShifted => "runge_shifted",
            TestFunction::Gauss => "gauss",
            TestFunction::SphereCos => "sphere_cos",
            TestFunction::SphereExp => "sphere_exp",
        }
    }

    pub fn parse(name: &str) -> Option<TestFunction> {
        match name {
            "runge_shifted" => Some(TestFunction::RungeShifted),
            "gauss" => Some(TestFunction::Gauss),
            "sphere_cos" => Some(TestFunction::SphereCos),
            "sphere_exp" => Some(TestFunction::SphereExp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    L2,
}

impl NormKind {
    pub fn order(&self) -> u32 {
        match self {
            NormKind::L1 => 1,
            NormKind::L2 => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormKind::L1 => "L1",
            NormKind::L2 => "L2",
        }
    }
}

/// How the quadrature rule of a configuration is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleSpec {
    GaussLegendre(usize),
    SphereProduct(usize),
    DesignFile(PathBuf, usize),
}

impl RuleSpec {
    pub fn build(&self) -> Result<QuadratureRule> {
        match self {
            RuleSpec::GaussLegendre(m) => gauss_legendre(*m),
            RuleSpec::SphereProduct(t) => Ok(sphere_product_rule(*t)),
            RuleSpec::DesignFile(path, t) => load_spherical_design(path, *t),
        }
    }

    pub fn region_kind(&self) -> RegionKind {
        match self {
            RuleSpec::GaussLegendre(_) => RegionKind::Interval,
            _ => RegionKind::Sphere,
        }
    }
}

/// One experiment: approximate `F = K f` at degree `n` with both schemes.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kernel: KernelDescriptor,
    pub f: TestFunction,
    pub n: usize,
    pub rule: RuleSpec,
    pub norm: NormKind,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        let rk = self.kernel.region_kind();
        if self.f.region_kind() != rk || self.rule.region_kind() != rk {
            return Err(Error::KernelRegionMismatch {
                op: "ExperimentConfig",
            });
        }
        Ok(())
    }
}

/// One output row of a table or sweep.
#[derive(Debug, Clone)]
pub struct ErrorRow {
    pub region: &'static str,
    pub kernel: String,
    pub kappa_or_nu: f64,
    pub n: usize,
    pub m: usize,
    pub exactness: usize,
    pub eta: f64,
    pub a_n: f64,
    pub err_classical: f64,
    pub err_efficient: f64,
    pub norm: &'static str,
    pub rule_source: String,
    pub seconds: f64,
}

pub const CSV_HEADER: &str =
    "region,kernel,kappa_or_nu,n,m,exactness,eta,A_n,err_classical,err_efficient,norm,rule_source,seconds";

impl ErrorRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{},{:.3}",
            self.region,
            self.kernel,
            self.kappa_or_nu,
            self.n,
            self.m,
            self.exactness,
            self.eta,
            self.a_n,
            self.err_classical,
            self.err_efficient,
            self.norm,
            self.rule_source,
            self.seconds
        )
    }
}

pub fn rows_to_csv(rows: &[ErrorRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// error norms
// ---------------------------------------------------------------------------

/// `||approx - K f||_p` over the kernel-refined reference grid.
pub fn error_norm<T: Scalar>(
    approx: &Expansion<T>,
    kernel: &KernelDescriptor,
    f: &TestFunction,
    norm: NormKind,
    oversample: usize,
) -> Result<f64> {
    let grid = reference::build(kernel, approx.basis.max_degree, oversample)?;
    let norms = error_norms_on_grid(&[approx], kernel, f, norm, &grid)?;
    Ok(norms[0])
}

/// Shared-grid variant: evaluates several expansions over one grid so a
/// table row pays the reference cost once.
pub fn error_norms_on_grid<T: Scalar>(
    approximants: &[&Expansion<T>],
    _kernel: &KernelDescriptor,
    f: &TestFunction,
    norm: NormKind,
    grid: &ReferenceGrid,
) -> Result<Vec<f64>> {
    let f_vals: Vec<f64> = grid.points.iter().map(|p| f.eval(p)).collect();
    let mut out = Vec::with_capacity(approximants.len());
    for approx in approximants {
        let approx_vals = approx.evaluate_batch(&grid.points)?;
        let integrand: Vec<f64> = approx_vals
            .iter()
            .zip(grid.kernel_values.iter())
            .zip(&f_vals)
            .map(|((a, k), fv)| {
                let diff = a.to_complex() - k * fv;
                match norm {
                    NormKind::L1 => diff.norm(),
                    NormKind::L2 => diff.norm_sqr(),
                }
            })
            .collect();
        if integrand.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand);
        }
        let total = grid.integrate(&integrand);
        out.push(match norm {
            NormKind::L1 => total,
            NormKind::L2 => total.sqrt(),
        });
    }
    Ok(out)
}

/// Quasi-uniform estimate of a sup norm on the interval.
pub fn sup_norm_interval<F: Fn(f64) -> f64>(f: F) -> f64 {
    let n = 100_000usize;
    let mut best = 0.0f64;
    for i in 0..=n {
        let x = -1.0 + 2.0 * i as f64 / n as f64;
        best = best.max(f(x).abs());
    }
    best
}

/// Quasi-uniform estimate of a sup norm on the sphere.
pub fn sup_norm_sphere<F: Fn(&SphericalPoint) -> f64>(f: F) -> f64 {
    fibonacci_sphere(100_000)
        .iter()
        .map(|p| f(p).abs())
        .fold(0.0, f64::max)
}

fn sup_norm_test_function(f: &TestFunction) -> f64 {
    match f.region_kind() {
        RegionKind::Interval => sup_norm_interval(|x| f.eval(&Point::Interval(x))),
        RegionKind::Sphere => sup_norm_sphere(|q| f.eval(&Point::Sphere(*q))),
    }
}

// ---------------------------------------------------------------------------
// single-configuration pipeline
// ---------------------------------------------------------------------------

/// Everything one configuration produces: both expansions, the rule, the
/// MZ estimate and the stability constant.
pub struct ConfigRun<T: Scalar> {
    pub rule: QuadratureRule,
    pub classical: Expansion<T>,
    pub efficient: Expansion<T>,
    pub eta: f64,
    pub rank_deficient: bool,
    pub a_n: f64,
}

pub fn run_pipeline<T: AlphaScalar>(cfg: &ExperimentConfig) -> Result<ConfigRun<T>> {
    cfg.validate()?;
    let rule = cfg.rule.build()?;
    let alpha = T::alpha_cached(cfg.n, &cfg.kernel)?;
    let classical =
        classical_hyperinterpolation(&cfg.kernel, |p| cfg.f.eval(p), &rule, cfg.n)?;
    let weights = efficient_weights(&rule, cfg.n, &alpha)?;
    let samples = sample_function(&rule, |p| cfg.f.eval(p));
    let efficient = efficient_hyperinterpolation(&samples, &weights)?;
    let mz = estimate_mz_eta(&rule, cfg.n);
    Ok(ConfigRun {
        rule,
        classical,
        efficient,
        eta: mz.eta,
        rank_deficient: mz.rank_deficient,
        a_n: alpha.a_n,
    })
}

fn run_config_t<T: AlphaScalar>(cfg: &ExperimentConfig, oversample: usize) -> Result<ErrorRow> {
    let start = Instant::now();
    let run = run_pipeline::<T>(cfg)?;
    let grid = reference::build(&cfg.kernel, cfg.n, oversample)?;
    let errs = error_norms_on_grid(
        &[&run.classical, &run.efficient],
        &cfg.kernel,
        &cfg.f,
        cfg.norm,
        &grid,
    )?;
    Ok(ErrorRow {
        region: match cfg.kernel.region_kind() {
            RegionKind::Interval => "interval",
            RegionKind::Sphere => "sphere",
        },
        kernel: cfg.kernel.label(),
        kappa_or_nu: cfg.kernel.primary_parameter(),
        n: cfg.n,
        m: run.rule.len(),
        exactness: run.rule.exactness,
        eta: run.eta,
        a_n: run.a_n,
        err_classical: errs[0],
        err_efficient: errs[1],
        norm: match cfg.norm {
            NormKind::L1 => "L1",
            NormKind::L2 => "L2",
        },
        rule_source: run.rule.source.clone(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs one configuration end to end, dispatching to the complex pipeline
/// for oscillatory kernels.
pub fn run_config(cfg: &ExperimentConfig) -> Result<ErrorRow> {
    run_config_oversampled(cfg, 1)
}

pub fn run_config_oversampled(cfg: &ExperimentConfig, oversample: usize) -> Result<ErrorRow> {
    if cfg.kernel.is_complex() {
        run_config_t::<Complex64>(cfg, oversample)
    } else {
        run_config_t::<f64>(cfg, oversample)
    }
}

fn run_rows(configs: Vec<ExperimentConfig>) -> Result<Vec<ErrorRow>> {
    // warm per-n alpha caches sequentially so parallel rows only read
    for cfg in &configs {
        if cfg.kernel.is_complex() {
            Complex64::alpha_cached(cfg.n, &cfg.kernel)?;
        } else {
            f64::alpha_cached(cfg.n, &cfg.kernel)?;
        }
    }
    configs
        .par_iter()
        .map(run_config)
        .collect::<Result<Vec<_>>>()
}

// ---------------------------------------------------------------------------
// tables and sweeps
// ---------------------------------------------------------------------------

/// Oscillatory-kernel table on the interval: the full `(n, m)` grid of
/// `L^2` errors for `F = exp(i kappa x) (1.2 - x^2)^(-1)`.
pub fn run_interval_table(
    kappa: f64,
    n_list: &[usize],
    m_list: &[usize],
) -> Result<Vec<ErrorRow>> {
    let mut configs = Vec::new();
    for &n in n_list {
        for &m in m_list {
            configs.push(ExperimentConfig {
                kernel: KernelDescriptor::IntervalOscillatory { kappa },
                f: TestFunction::RungeShifted,
                n,
                rule: RuleSpec::GaussLegendre(m),
                norm: NormKind::L2,
            });
        }
    }
    run_rows(configs)
}

/// Resolves the rule for a sphere row: a design file `sd_t{t}_m{m}.txt`
/// under `designs` when present, otherwise the product-rule fallback of
/// the same exactness (marked in the row's `rule_source`).
pub fn sphere_rule_spec(m: usize, designs: Option<&Path>) -> Result<RuleSpec> {
    let t = (m as f64).sqrt().round() as usize;
    if t * t != m || t == 0 {
        return Err(Error::Index(format!(
            "sphere rule size m = {m} is not a perfect square (t+1)^2"
        )));
    }
    let t = t - 1;
    if let Some(dir) = designs {
        let path = dir.join(format!("sd_t{t}_m{m}.txt"));
        if path.is_file() {
            return Ok(RuleSpec::DesignFile(path, t));
        }
    }
    Ok(RuleSpec::SphereProduct(t))
}

/// Harmonic-kernel table on the sphere (`L^2` errors, `f = cos(cosh(xz) - 2y)`).
pub fn run_sphere_table(
    lbar: usize,
    kbar: i64,
    n_list: &[usize],
    m_list: &[usize],
    designs: Option<&Path>,
) -> Result<Vec<ErrorRow>> {
    let mut configs = Vec::new();
    for &n in n_list {
        for &m in m_list {
            configs.push(ExperimentConfig {
                kernel: KernelDescriptor::SphereHarmonic { lbar, kbar },
                f: TestFunction::SphereCos,
                n,
                rule: sphere_rule_spec(m, designs)?,
                norm: NormKind::L2,
            });
        }
    }
    run_rows(configs)
}

/// Interval singular sweep: `L^1` errors of `F = K exp(-x^2)` over a
/// degree range with `m = ceil(factor * n / 2)` quadrature points.
pub fn run_interval_singular_sweep(
    kernel: &KernelDescriptor,
    n_list: &[usize],
    m_factor: f64,
) -> Result<Vec<ErrorRow>> {
    let configs: Vec<ExperimentConfig> = n_list
        .iter()
        .map(|&n| ExperimentConfig {
            kernel: *kernel,
            f: TestFunction::Gauss,
            n,
            rule: RuleSpec::GaussLegendre(((m_factor * n as f64) / 2.0).ceil() as usize),
            norm: NormKind::L1,
        })
        .collect();
    run_rows(configs)
}

/// Sphere singular sweep: `L^1` errors of `F = K exp(x+y+z)` with
/// `m = (ceil(factor * n) + 1)^2` design points (or the product fallback).
pub fn run_sphere_singular_sweep(
    kernel: &KernelDescriptor,
    n_list: &[usize],
    m_factor: f64,
    designs: Option<&Path>,
) -> Result<Vec<ErrorRow>> {
    let mut configs = Vec::new();
    for &n in n_list {
        let t = (m_factor * n as f64).ceil() as usize;
        let m = (t + 1) * (t + 1);
        configs.push(ExperimentConfig {
            kernel: *kernel,
            f: TestFunction::SphereExp,
            n,
            rule: sphere_rule_spec(m, designs)?,
            norm: NormKind::L1,
        });
    }
    run_rows(configs)
}

// ---------------------------------------------------------------------------
// stability-bound audits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremId {
    /// `||S_n F||_2 <= sqrt(V) A_n / sqrt(1 - eta) ||f||_inf`.
    L1Stability,
    /// `||S_n F||_2 <= sqrt(V) / sqrt(1 - eta) ||K||_inf ||f||_inf`,
    /// continuous kernels only.
    ContinuousStability,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub status: BoundStatus,
    pub eta: f64,
    pub a_n: f64,
}

fn kernel_sup_norm(kernel: &KernelDescriptor) -> Option<f64> {
    use KernelDescriptor::*;
    match kernel {
        IntervalOscillatory { .. } | Unit { .. } => Some(1.0),
        SphereHarmonic { lbar, kbar } => Some(sup_norm_sphere(|q| {
            crate::orthopoly::eval_spherical_harmonic(*lbar, *kbar, q).unwrap()
        })),
        _ => None,
    }
}

fn check_stability_bound_t<T: AlphaScalar>(
    cfg: &ExperimentConfig,
    theorem: TheoremId,
) -> Result<BoundReport> {
    let k_sup = kernel_sup_norm(&cfg.kernel);
    if theorem == TheoremId::ContinuousStability && k_sup.is_none() {
        return Err(Error::KernelRegionMismatch {
            op: "continuous-kernel bound on an unbounded kernel",
        });
    }
    let run = run_pipeline::<T>(cfg)?;
    if run.rank_deficient || run.eta >= 1.0 - 1e-12 {
        return Ok(BoundReport {
            theorem,
            lhs: run.efficient.l2_norm(),
            rhs: f64::INFINITY,
            margin: f64::INFINITY,
            status: BoundStatus::Skipped,
            eta: run.eta,
            a_n: run.a_n,
        });
    }
    let f_sup = sup_norm_test_function(&cfg.f);
    let v = cfg.kernel.region().measure_total;
    let lhs = run.efficient.l2_norm();
    let rhs = match theorem {
        TheoremId::L1Stability => v.sqrt() * run.a_n / (1.0 - run.eta).sqrt() * f_sup,
        TheoremId::ContinuousStability => {
            v.sqrt() / (1.0 - run.eta).sqrt() * k_sup.unwrap() * f_sup
        }
    };
    let margin = rhs - lhs;
    Ok(BoundReport {
        theorem,
        lhs,
        rhs,
        margin,
        status: if margin >= -1e-9 {
            BoundStatus::Pass
        } else {
            BoundStatus::Fail
        },
        eta: run.eta,
        a_n: run.a_n,
    })
}

/// Audits a stability inequality on one configuration; `Skipped` when the
/// Marcinkiewicz-Zygmund constant is vacuous (`eta >= 1`).
pub fn check_stability_bound(cfg: &ExperimentConfig, theorem: TheoremId) -> Result<BoundReport> {
    if cfg.kernel.is_complex() {
        check_stability_bound_t::<Complex64>(cfg, theorem)
    } else {
        check_stability_bound_t::<f64>(cfg, theorem)
    }
}

// ---------------------------------------------------------------------------
// SVG sweep plots
// ---------------------------------------------------------------------------

/// Minimal log-scale line plot of a sweep: classical and efficient error
/// against the degree `n`.
pub fn sweep_svg(rows: &[ErrorRow], title: &str) -> String {
    let (w, h) = (720.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys_c: Vec<f64> = rows.iter().map(|r| r.err_classical.max(1e-300).log10()).collect();
    let ys_e: Vec<f64> = rows.iter().map(|r| r.err_efficient.max(1e-300).log10()).collect();
    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_min = ys_c.iter().chain(&ys_e).cloned().fold(f64::INFINITY, f64::min) - 0.5;
    let y_max = ys_c.iter().chain(&ys_e).cloned().fold(f64::NEG_INFINITY, f64::max) + 0.5;
    let sx = |x: f64| ml + (x - x_min) / (x_max - x_min).max(1e-12) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y_min) / (y_max - y_min).max(1e-12) * (h - mt - mb);
    let path = |ys: &[f64]| {
        xs.iter()
            .zip(ys)
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut ticks = String::new();
    let mut level = y_min.ceil() as i64;
    while (level as f64) <= y_max {
        let y = sy(level as f64);
        ticks.push_str(&format!(
            "<line x1='{ml}' y1='{y:.2}' x2='{:.2}' y2='{y:.2}' stroke='#ddd'/>\
             <text x='{:.2}' y='{:.2}' font-size='11' text-anchor='end'>1e{level}</text>\n",
            w - mr,
            ml - 6.0,
            y + 4.0
        ));
        level += 1;
    }
    format!(
        "<svg xmlns='http://www.w3.org/2000/svg' width='{w}' height='{h}'>\n\
         <rect width='{w}' height='{h}' fill='white'/>\n\
         <text x='{:.2}' y='24' font-size='14' text-anchor='middle'>{title}</text>\n\
         {ticks}\
         <polyline fill='none' stroke='#1f77b4' stroke-width='1.5' points='{}'/>\n\
         <polyline fill='none' stroke='#d62728' stroke-width='1.5' stroke-dasharray='6,3' points='{}'/>\n\
         <text x='{ml}' y='{:.2}' font-size='12' fill='#1f77b4'>classical</text>\n\
         <text x='{:.2}' y='{:.2}' font-size='12' fill='#d62728'>efficient</text>\n\
         <text x='{:.2}' y='{:.2}' font-size='12' text-anchor='middle'>n</text>\n\
         </svg>\n",
        0.5 * w,
        path(&ys_c),
        path(&ys_e),
        h - 8.0,
        ml + 80.0,
        h - 8.0,
        0.5 * w,
        h - 28.0,
    )
}
