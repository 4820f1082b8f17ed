//! Kernel descriptors and their modified moments `beta_r = int K q_r`,
//! where the auxiliary family `q_r` is Chebyshev on the interval and the
//! orthonormal real spherical harmonics on the sphere.
//!
//! Every closed-form or recurrence path has an independent adaptive
//! quadrature oracle ([`oracle_moment`]) with singularity-aware
//! substitutions; the two are cross-checked in the test suites.

use crate::adaptive;
use crate::orthopoly::{
    eval_legendre_raw, eval_spherical_harmonic, sphere_row, BasisSet, Point, Region, RegionKind,
    SphericalPoint,
};
use crate::quadrature::{jacobi::gauss_jacobi, sphere_product_rule};
use crate::scalar::Scalar;
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

pub(crate) mod special;

/// Default absolute tolerance of the 1-D adaptive moment integrals.
pub const MOMENT_TOL: f64 = 1e-13;
const MAX_EVALS: usize = 1_000_000;

/// The kernel `K` of the product `F = K f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelDescriptor {
    /// `K(x) = exp(i kappa x)` on the interval, `kappa > 0`.
    IntervalOscillatory { kappa: f64 },
    /// `K(x) = (1 + x)^a`, `a > -1`; singular at `x = -1` for `a < 0`.
    IntervalAlgebraicLeft { a: f64 },
    /// `K(x) = |x - 1|^a = (1 - x)^a` on `[-1, 1]`, `a > -1`.
    IntervalAlgebraicRight { a: f64 },
    /// `K(x) = (1 - x^2)^(-1/2)`, the Chebyshev weight.
    IntervalChebyshevWeight,
    /// `K = Y_{lbar, kbar}` on the sphere.
    SphereHarmonic { lbar: usize, kbar: i64 },
    /// `K(x) = |xi - x|^nu`, `nu > -1`.
    SphereAlgebraic { xi: SphericalPoint, nu: f64 },
    /// `K(x) = log |xi - x|`.
    SphereLog { xi: SphericalPoint },
    /// `K(x) = |xi - x|^nu1 |xi + x|^nu2`, `nu1, nu2 > -1`.
    SphereDoubleAlgebraic {
        xi: SphericalPoint,
        nu1: f64,
        nu2: f64,
    },
    /// `K = 1`, for degeneracy checks.
    Unit { region: RegionKind },
}

impl KernelDescriptor {
    pub fn region(&self) -> Region {
        match self.region_kind() {
            RegionKind::Interval => Region::interval(),
            RegionKind::Sphere => Region::sphere(),
        }
    }

    pub fn region_kind(&self) -> RegionKind {
        use KernelDescriptor::*;
        match self {
            IntervalOscillatory { .. }
            | IntervalAlgebraicLeft { .. }
            | IntervalAlgebraicRight { .. }
            | IntervalChebyshevWeight => RegionKind::Interval,
            SphereHarmonic { .. }
            | SphereAlgebraic { .. }
            | SphereLog { .. }
            | SphereDoubleAlgebraic { .. } => RegionKind::Sphere,
            Unit { region } => *region,
        }
    }

    /// Complex-valued kernels need the complex pipeline.
    pub fn is_complex(&self) -> bool {
        matches!(self, KernelDescriptor::IntervalOscillatory { .. })
    }

    pub fn validate(&self) -> Result<()> {
        use KernelDescriptor::*;
        let bad = |name: &'static str, value: f64, constraint: &'static str| {
            Err(Error::Domain {
                name,
                value,
                constraint,
            })
        };
        match self {
            IntervalOscillatory { kappa } if !(*kappa > 0.0 && kappa.is_finite()) => {
                bad("kappa", *kappa, "kappa > 0")
            }
            IntervalAlgebraicLeft { a } | IntervalAlgebraicRight { a } if *a <= -1.0 => {
                bad("a", *a, "a > -1")
            }
            SphereAlgebraic { nu, .. } if *nu <= -1.0 => bad("nu", *nu, "nu > -1"),
            SphereDoubleAlgebraic { nu1, nu2, .. } if *nu1 <= -1.0 || *nu2 <= -1.0 => {
                bad("nu", nu1.min(*nu2), "nu1, nu2 > -1")
            }
            SphereHarmonic { lbar, kbar } if kbar.unsigned_abs() as usize > *lbar => Err(
                Error::Index(format!("harmonic kernel |kbar| = {} > lbar = {lbar}", kbar.abs()))
            ),
            _ => Ok(()),
        }
    }

    /// Kernel value at a point; real kernels return a zero imaginary part.
    pub fn eval(&self, p: &Point) -> Complex64 {
        use KernelDescriptor::*;
        match (self, p) {
            (IntervalOscillatory { kappa }, Point::Interval(x)) => {
                Complex64::new(0.0, kappa * x).exp()
            }
            (IntervalAlgebraicLeft { a }, Point::Interval(x)) => {
                Complex64::new((1.0 + x).powf(*a), 0.0)
            }
            (IntervalAlgebraicRight { a }, Point::Interval(x)) => {
                Complex64::new((1.0 - x).abs().powf(*a), 0.0)
            }
            (IntervalChebyshevWeight, Point::Interval(x)) => {
                Complex64::new(1.0 / (1.0 - x * x).sqrt(), 0.0)
            }
            (SphereHarmonic { lbar, kbar }, Point::Sphere(q)) => Complex64::new(
                eval_spherical_harmonic(*lbar, *kbar, q).expect("validated harmonic index"),
                0.0,
            ),
            (SphereAlgebraic { xi, nu }, Point::Sphere(q)) => {
                Complex64::new((2.0 * (1.0 - xi.dot(q))).max(0.0).powf(0.5 * nu), 0.0)
            }
            (SphereLog { xi }, Point::Sphere(q)) => {
                Complex64::new(0.5 * (2.0 * (1.0 - xi.dot(q))).max(0.0).ln(), 0.0)
            }
            (SphereDoubleAlgebraic { xi, nu1, nu2 }, Point::Sphere(q)) => {
                let d1 = (2.0 * (1.0 - xi.dot(q))).max(0.0);
                let d2 = (2.0 * (1.0 + xi.dot(q))).max(0.0);
                Complex64::new(d1.powf(0.5 * nu1) * d2.powf(0.5 * nu2), 0.0)
            }
            (Unit { .. }, _) => Complex64::new(1.0, 0.0),
            _ => panic!("kernel/point region mismatch"),
        }
    }

    /// Locations where the kernel is unbounded (empty for bounded kernels).
    pub fn singular_points(&self) -> Vec<Point> {
        use KernelDescriptor::*;
        match self {
            IntervalAlgebraicLeft { a } if *a < 0.0 => vec![Point::Interval(-1.0)],
            IntervalAlgebraicRight { a } if *a < 0.0 => vec![Point::Interval(1.0)],
            IntervalChebyshevWeight => vec![Point::Interval(-1.0), Point::Interval(1.0)],
            SphereAlgebraic { xi, nu } if *nu < 0.0 => vec![Point::Sphere(*xi)],
            SphereLog { xi } => vec![Point::Sphere(*xi)],
            SphereDoubleAlgebraic { xi, nu1, nu2 } => {
                let mut v = Vec::new();
                if *nu1 < 0.0 {
                    v.push(Point::Sphere(*xi));
                }
                if *nu2 < 0.0 {
                    v.push(Point::Sphere(xi.antipode()));
                }
                v
            }
            _ => Vec::new(),
        }
    }

    /// Short label for CSV/provenance output.
    pub fn label(&self) -> String {
        use KernelDescriptor::*;
        match self {
            IntervalOscillatory { .. } => "osc".into(),
            IntervalAlgebraicLeft { .. } => "alg_left".into(),
            IntervalAlgebraicRight { .. } => "alg_right".into(),
            IntervalChebyshevWeight => "cheb_weight".into(),
            SphereHarmonic { lbar, kbar } => format!("harmonic({lbar},{kbar})"),
            SphereAlgebraic { .. } => "sph_alg".into(),
            SphereLog { .. } => "sph_log".into(),
            SphereDoubleAlgebraic { .. } => "sph_double".into(),
            Unit { .. } => "unit".into(),
        }
    }

    /// Primary numeric parameter for the CSV `kappa_or_nu` column.
    pub fn primary_parameter(&self) -> f64 {
        use KernelDescriptor::*;
        match self {
            IntervalOscillatory { kappa } => *kappa,
            IntervalAlgebraicLeft { a } | IntervalAlgebraicRight { a } => *a,
            SphereAlgebraic { nu, .. } => *nu,
            SphereDoubleAlgebraic { nu1, .. } => *nu1,
            SphereHarmonic { lbar, .. } => *lbar as f64,
            _ => 0.0,
        }
    }

    fn cache_key(&self) -> (u8, [u64; 5]) {
        use KernelDescriptor::*;
        let b = f64::to_bits;
        match self {
            IntervalOscillatory { kappa } => (0, [b(*kappa), 0, 0, 0, 0]),
            IntervalAlgebraicLeft { a } => (1, [b(*a), 0, 0, 0, 0]),
            IntervalAlgebraicRight { a } => (2, [b(*a), 0, 0, 0, 0]),
            IntervalChebyshevWeight => (3, [0; 5]),
            SphereHarmonic { lbar, kbar } => (4, [*lbar as u64, *kbar as u64, 0, 0, 0]),
            SphereAlgebraic { xi, nu } => (5, [b(xi.x), b(xi.y), b(xi.z), b(*nu), 0]),
            SphereLog { xi } => (6, [b(xi.x), b(xi.y), b(xi.z), 0, 0]),
            SphereDoubleAlgebraic { xi, nu1, nu2 } => {
                (7, [b(xi.x), b(xi.y), b(xi.z), b(*nu1), b(*nu2)])
            }
            Unit { region } => (8, [*region as u64, 0, 0, 0, 0]),
        }
    }
}

/// Modified moments of one kernel against the auxiliary family, flat
/// indices `1..=dim`.
#[derive(Debug, Clone)]
pub struct MomentVector<T: Scalar> {
    pub kernel: KernelDescriptor,
    pub basis: BasisSet,
    pub values: Vec<T>,
}

impl<T: Scalar> MomentVector<T> {
    /// Highest q-family degree carrying a nonzero moment; bounds the
    /// polynomial degree of the kernel's projection onto the q-span.
    pub fn max_active_degree(&self) -> usize {
        let mut max_deg = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > 0.0 {
                let (deg, _) = self.basis.degree_order(i + 1).unwrap();
                max_deg = max_deg.max(deg);
            }
        }
        max_deg
    }

    /// CSV dump, columns `r,re,im` with `r` the 1-based flat index.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{:.17e},{:.17e}\n", i + 1, v.re(), v.im()));
        }
        out
    }
}

/// Scalar types that can carry the moments of a given kernel.
pub trait MomentScalar: Scalar {
    fn modified_moments(kernel: &KernelDescriptor, max_q_degree: usize) -> Result<MomentVector<Self>>;

    /// Cached variant; idempotent under concurrent insertion.
    fn modified_moments_cached(
        kernel: &KernelDescriptor,
        max_q_degree: usize,
    ) -> Result<Arc<MomentVector<Self>>>;
}

type MomentCacheMap<T> = HashMap<(u8, [u64; 5]), Arc<MomentVector<T>>>;

fn cached_lookup<T: MomentScalar>(
    cache: &'static OnceLock<Mutex<MomentCacheMap<T>>>,
    kernel: &KernelDescriptor,
    max_q_degree: usize,
) -> Result<Arc<MomentVector<T>>> {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let key = kernel.cache_key();
    let needed_dim = match kernel.region_kind() {
        RegionKind::Interval => max_q_degree + 1,
        RegionKind::Sphere => (max_q_degree + 1) * (max_q_degree + 1),
    };
    if let Some(hit) = map.lock().unwrap().get(&key) {
        if hit.values.len() >= needed_dim {
            if hit.values.len() == needed_dim {
                return Ok(hit.clone());
            }
            let sliced = MomentVector {
                kernel: *kernel,
                basis: match kernel.region_kind() {
                    RegionKind::Interval => BasisSet::chebyshev(max_q_degree),
                    RegionKind::Sphere => BasisSet::spherical(max_q_degree),
                },
                values: hit.values[..needed_dim].to_vec(),
            };
            return Ok(Arc::new(sliced));
        }
    }
    let fresh = Arc::new(T::modified_moments(kernel, max_q_degree)?);
    let mut guard = map.lock().unwrap();
    let entry = guard.entry(key).or_insert_with(|| fresh.clone());
    if entry.values.len() < fresh.values.len() {
        *entry = fresh.clone();
    }
    Ok(fresh)
}

impl MomentScalar for f64 {
    fn modified_moments(kernel: &KernelDescriptor, max_q_degree: usize) -> Result<MomentVector<f64>> {
        kernel.validate()?;
        use KernelDescriptor::*;
        match kernel {
            IntervalOscillatory { .. } => Err(Error::KernelRegionMismatch {
                op: "real moments of a complex kernel",
            }),
            IntervalAlgebraicLeft { .. } | IntervalAlgebraicRight { .. }
            | IntervalChebyshevWeight => moments_algebraic_interval(kernel, max_q_degree),
            SphereHarmonic { lbar, kbar } => moments_sphere_harmonic(*lbar, *kbar, max_q_degree),
            SphereAlgebraic { xi, nu } => moments_sphere_algebraic(xi, *nu, max_q_degree),
            SphereLog { xi } => moments_sphere_log(xi, max_q_degree),
            SphereDoubleAlgebraic { xi, nu1, nu2 } => {
                moments_sphere_double_algebraic(xi, *nu1, *nu2, max_q_degree)
            }
            Unit { region } => moments_unit(*region, max_q_degree),
        }
    }

    fn modified_moments_cached(
        kernel: &KernelDescriptor,
        max_q_degree: usize,
    ) -> Result<Arc<MomentVector<f64>>> {
        static CACHE: OnceLock<Mutex<MomentCacheMap<f64>>> = OnceLock::new();
        cached_lookup(&CACHE, kernel, max_q_degree)
    }
}

impl MomentScalar for Complex64 {
    fn modified_moments(
        kernel: &KernelDescriptor,
        max_q_degree: usize,
    ) -> Result<MomentVector<Complex64>> {
        kernel.validate()?;
        if let KernelDescriptor::IntervalOscillatory { kappa } = kernel {
            return moments_oscillatory_interval(*kappa, max_q_degree);
        }
        let real = f64::modified_moments(kernel, max_q_degree)?;
        Ok(MomentVector {
            kernel: real.kernel,
            basis: real.basis,
            values: real.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        })
    }

    fn modified_moments_cached(
        kernel: &KernelDescriptor,
        max_q_degree: usize,
    ) -> Result<Arc<MomentVector<Complex64>>> {
        static CACHE: OnceLock<Mutex<MomentCacheMap<Complex64>>> = OnceLock::new();
        cached_lookup(&CACHE, kernel, max_q_degree)
    }
}

// ---------------------------------------------------------------------------
// interval: oscillatory kernel
// ---------------------------------------------------------------------------

/// Moments `beta_r = int exp(i kappa x) T_r(x) dx` for `r = 0..=r_max`.
///
/// The moments satisfy the three-term relation obtained by integrating
/// `2 T_r = T_{r+1}'/(r+1) - T_{r-1}'/(r-1)` by parts. The forward
/// recurrence is stable only up to `r ~ kappa`; past the crossover the
/// relation is solved as a boundary-value system (Oliver's method) with a
/// truncated zero tail, which selects the decaying solution.
pub fn moments_oscillatory_interval(kappa: f64, r_max: usize) -> Result<MomentVector<Complex64>> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Domain {
            name: "kappa",
            value: kappa,
            constraint: "kappa > 0 and finite",
        });
    }
    let i = Complex64::new(0.0, 1.0);
    let mut beta = vec![Complex64::new(0.0, 0.0); r_max + 1];
    beta[0] = Complex64::new(2.0 * kappa.sin() / kappa, 0.0);
    if r_max >= 1 {
        beta[1] = i.scale(2.0 * (kappa.sin() / (kappa * kappa) - kappa.cos() / kappa));
    }
    if r_max >= 2 {
        // from int exp(i kappa x) T_2' dx with T_2' = 4 T_1
        beta[2] = Complex64::new(2.0 * kappa.sin() / kappa, 0.0)
            + (i * beta[1]).scale(4.0 / kappa);
    }
    if r_max <= 2 {
        return Ok(MomentVector {
            kernel: KernelDescriptor::IntervalOscillatory { kappa },
            basis: BasisSet::chebyshev(r_max),
            values: beta,
        });
    }

    let gamma = |r: usize| -> Complex64 {
        if r % 2 == 0 {
            Complex64::new(2.0 * kappa.cos(), 0.0)
        } else {
            Complex64::new(0.0, 2.0 * kappa.sin())
        }
    };
    let delta = |r: usize| 1.0 / (r as f64 + 1.0) - 1.0 / (r as f64 - 1.0);

    let crossover = (kappa.ceil() as usize).clamp(2, r_max);
    // stable forward sweep: beta_{r+1} from (beta_r, beta_{r-1})
    for r in 2..crossover {
        let rhs = gamma(r).scale(delta(r)) - beta[r].scale(2.0);
        beta[r + 1] = (rhs * (r as f64 + 1.0) / (i * kappa))
            + beta[r - 1].scale((r as f64 + 1.0) / (r as f64 - 1.0));
    }
    if crossover >= r_max {
        return Ok(MomentVector {
            kernel: KernelDescriptor::IntervalOscillatory { kappa },
            basis: BasisSet::chebyshev(r_max),
            values: beta,
        });
    }

    // boundary-value sweep for r in (crossover, r_max]: rows
    //   i k/(s+1) beta_{s+1} + 2 beta_s - i k/(s-1) beta_{s-1} = gamma_s delta_s
    // with beta_crossover known and a zero tail beyond r_max + buffer
    let buffer = 50usize.max((kappa / 4.0).ceil() as usize);
    let r_tail = r_max + buffer;
    let unknowns = r_tail - crossover; // beta_{crossover+1} ..= beta_{r_tail}
    let mut a = vec![Complex64::new(0.0, 0.0); unknowns * unknowns];
    let mut rhs = vec![Complex64::new(0.0, 0.0); unknowns];
    for (row, s) in (crossover + 1..=r_tail).enumerate() {
        let idx = |r: usize| r - (crossover + 1);
        a[row * unknowns + idx(s)] = Complex64::new(2.0, 0.0);
        let sup = (i * kappa).scale(1.0 / (s as f64 + 1.0));
        let sub = -(i * kappa).scale(1.0 / (s as f64 - 1.0));
        rhs[row] = gamma(s).scale(delta(s));
        if s + 1 <= r_tail {
            a[row * unknowns + idx(s + 1)] = sup;
        } // else: truncated tail, beta_{r_tail + 1} = 0
        if s - 1 >= crossover + 1 {
            a[row * unknowns + idx(s - 1)] = sub;
        } else {
            rhs[row] -= sub * beta[crossover];
        }
    }
    lu_solve_complex(&mut a, &mut rhs, unknowns)?;
    for (k, value) in rhs.iter().take(r_max - crossover).enumerate() {
        beta[crossover + 1 + k] = *value;
    }

    Ok(MomentVector {
        kernel: KernelDescriptor::IntervalOscillatory { kappa },
        basis: BasisSet::chebyshev(r_max),
        values: beta,
    })
}

/// In-place LU solve with partial pivoting for a dense complex system.
fn lu_solve_complex(a: &mut [Complex64], b: &mut [Complex64], n: usize) -> Result<()> {
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].norm();
        for row in (col + 1)..n {
            let mag = a[row * n + col].norm();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Err(Error::AdaptiveNoConvergence {
                tol: 0.0,
                estimate: f64::INFINITY,
                evals: 0,
            });
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / diag;
            if factor.norm() == 0.0 {
                continue;
            }
            a[row * n + col] = factor;
            for j in (col + 1)..n {
                let sub = factor * a[col * n + j];
                a[row * n + j] -= sub;
            }
            let sub = factor * b[col];
            b[row] -= sub;
        }
    }
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in (row + 1)..n {
            acc -= a[row * n + j] * b[j];
        }
        b[row] = acc / a[row * n + row];
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// interval: algebraic / Chebyshev-weight kernels
// ---------------------------------------------------------------------------

/// Moments of the interval algebraic and Chebyshev-weight kernels against
/// `T_r`, `r = 0..=r_max`.
///
/// The Chebyshev weight integrates in closed form (`pi, 0, 0, ...`). The
/// algebraic kernels use adaptive quadrature after the substitution
/// `u = (1 +- x)^(1+a)`, which removes the endpoint singularity.
pub fn moments_algebraic_interval(
    kernel: &KernelDescriptor,
    r_max: usize,
) -> Result<MomentVector<f64>> {
    kernel.validate()?;
    let values = match kernel {
        KernelDescriptor::IntervalChebyshevWeight => {
            let mut v = vec![0.0; r_max + 1];
            v[0] = PI;
            v
        }
        KernelDescriptor::IntervalAlgebraicLeft { a } => {
            (0..=r_max).map(|r| algebraic_moment(*a, r, false)).collect::<Result<Vec<_>>>()?
        }
        KernelDescriptor::IntervalAlgebraicRight { a } => {
            (0..=r_max).map(|r| algebraic_moment(*a, r, true)).collect::<Result<Vec<_>>>()?
        }
        _ => {
            return Err(Error::KernelRegionMismatch {
                op: "moments_algebraic_interval",
            })
        }
    };
    Ok(MomentVector {
        kernel: *kernel,
        basis: BasisSet::chebyshev(r_max),
        values,
    })
}

/// `int (1 +- x)^a T_r(x) dx` via `u = (1 +- x)^(1+a)`; with
/// `x = u^(1/(1+a)) - 1` the weight and Jacobian cancel to `1/(1+a)`.
fn algebraic_moment(a: f64, r: usize, right: bool) -> Result<f64> {
    let p = 1.0 + a;
    let u_max = 2f64.powf(p);
    let inv = 1.0 / p;
    let f = move |u: f64| {
        let x = u.max(0.0).powf(inv) - 1.0;
        let x = if right { -x } else { x };
        let t = crate::orthopoly::eval_chebyshev(r, x.clamp(-1.0, 1.0)).unwrap();
        t * inv * if right { 1.0 } else { 1.0 }
    };
    // pre-split: T_r oscillates ~r times over the interval
    let panels = (r / 2 + 4).min(512);
    let breaks: Vec<f64> = (0..=panels)
        .map(|k| u_max * k as f64 / panels as f64)
        .collect();
    adaptive::integrate_panels(f, &breaks, MOMENT_TOL, MAX_EVALS)
}

fn moments_unit(region: RegionKind, max_q_degree: usize) -> Result<MomentVector<f64>> {
    match region {
        RegionKind::Interval => {
            let values = (0..=max_q_degree)
                .map(|r| {
                    if r % 2 == 1 {
                        0.0
                    } else {
                        2.0 / (1.0 - (r * r) as f64)
                    }
                })
                .collect();
            Ok(MomentVector {
                kernel: KernelDescriptor::Unit { region },
                basis: BasisSet::chebyshev(max_q_degree),
                values,
            })
        }
        RegionKind::Sphere => {
            let basis = BasisSet::spherical(max_q_degree);
            let mut values = vec![0.0; basis.dim()];
            values[0] = (4.0 * PI).sqrt();
            Ok(MomentVector {
                kernel: KernelDescriptor::Unit { region },
                basis,
                values,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// sphere kernels
// ---------------------------------------------------------------------------

/// Delta moments of `K = Y_{lbar, kbar}`: the unit coordinate vector at the
/// flat index of `(lbar, kbar)`.
pub fn moments_sphere_harmonic(
    lbar: usize,
    kbar: i64,
    max_degree: usize,
) -> Result<MomentVector<f64>> {
    let basis = BasisSet::spherical(max_degree);
    if lbar > max_degree {
        return Err(Error::Index(format!(
            "kernel degree lbar = {lbar} exceeds moment degree {max_degree}"
        )));
    }
    let flat = basis.flat_index(lbar, kbar)?;
    let mut values = vec![0.0; basis.dim()];
    values[flat - 1] = 1.0;
    Ok(MomentVector {
        kernel: KernelDescriptor::SphereHarmonic { lbar, kbar },
        basis,
        values,
    })
}

/// Zonal moment factors applied to the harmonic values at the singular
/// point: `beta_{l k} = lambda_l Y_{l,k}(xi)`.
fn zonal_moments(
    kernel: KernelDescriptor,
    xi: &SphericalPoint,
    max_degree: usize,
    lambda: &[f64],
) -> MomentVector<f64> {
    let basis = BasisSet::spherical(max_degree);
    let mut row = vec![0.0; basis.dim()];
    sphere_row(max_degree, xi, &mut row);
    let values = row
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let (l, _) = basis.degree_order(i + 1).unwrap();
            lambda[l] * y
        })
        .collect();
    MomentVector {
        kernel,
        basis,
        values,
    }
}

/// Moments of `K = |xi - x|^nu`:
/// `beta_{l k} = 2^(nu+2) pi (-nu/2)_l Gamma((nu+2)/2) / Gamma(l + nu/2 + 2) Y_{l,k}(xi)`.
///
/// The Pochhammer/Gamma ratio is accumulated multiplicatively so large
/// degrees neither overflow nor lose the cancellation structure.
pub fn moments_sphere_algebraic(
    xi: &SphericalPoint,
    nu: f64,
    max_degree: usize,
) -> Result<MomentVector<f64>> {
    let kernel = KernelDescriptor::SphereAlgebraic { xi: *xi, nu };
    kernel.validate()?;
    let front = 2f64.powf(nu + 2.0) * PI * special::gamma(0.5 * (nu + 2.0));
    let mut lambda = Vec::with_capacity(max_degree + 1);
    // ratio_l = (-nu/2)_l / Gamma(l + nu/2 + 2)
    let mut ratio = 1.0 / special::gamma(0.5 * nu + 2.0);
    for l in 0..=max_degree {
        lambda.push(front * ratio);
        let lf = l as f64;
        ratio *= (lf - 0.5 * nu) / (lf + 0.5 * nu + 2.0);
    }
    Ok(zonal_moments(kernel, xi, max_degree, &lambda))
}

/// Moments of the logarithmic kernel `K = log |xi - x|`.
///
/// By the zonal factorization, `beta_{l k} = lambda_l Y_{l,k}(xi)` with
/// `lambda_l = pi int_{-1}^{1} (log 2 + log(1 - t)) P_l(t) dt`; the
/// `log 2` term only feeds the constant mode `l = 0` because
/// `int P_l = 0` for `l >= 1`. Each 1-D integral is evaluated adaptively
/// after the substitution `u = 1 - t`.
pub fn moments_sphere_log(xi: &SphericalPoint, max_degree: usize) -> Result<MomentVector<f64>> {
    let kernel = KernelDescriptor::SphereLog { xi: *xi };
    let two_ln2 = 2.0f64.ln();
    let mut lambda = Vec::with_capacity(max_degree + 1);
    for l in 0..=max_degree {
        let integral = adaptive::integrate(
            move |u: f64| (two_ln2 + u.max(1e-300).ln()) * eval_legendre_raw(l, 1.0 - u),
            0.0,
            2.0,
            MOMENT_TOL,
            MAX_EVALS,
        )?;
        lambda.push(PI * integral);
    }
    Ok(zonal_moments(kernel, xi, max_degree, &lambda))
}

/// Moments of `K = |xi - x|^nu1 |xi + x|^nu2`:
/// `beta_{l k} = 2^((nu1+nu2)/2) * 2 pi * J_l * Y_{l,k}(xi)` with
/// `J_l = int (1-t)^(nu1/2) (1+t)^(nu2/2) P_l(t) dt`.
///
/// `J_l` is computed with a Gauss-Jacobi rule for the weight exponents
/// `(nu1/2, nu2/2)`, exact because the remaining factor is the polynomial
/// `P_l`. The Rodrigues-derivative form of the same integral explodes the
/// coefficients by `l!` and is only used as a small-degree cross-check in
/// tests.
pub fn moments_sphere_double_algebraic(
    xi: &SphericalPoint,
    nu1: f64,
    nu2: f64,
    max_degree: usize,
) -> Result<MomentVector<f64>> {
    let kernel = KernelDescriptor::SphereDoubleAlgebraic {
        xi: *xi,
        nu1,
        nu2,
    };
    kernel.validate()?;
    let n_nodes = max_degree / 2 + 5;
    let (nodes, weights) = gauss_jacobi(n_nodes, 0.5 * nu1, 0.5 * nu2)?;
    let front = 2f64.powf(0.5 * (nu1 + nu2)) * 2.0 * PI;
    let mut lambda = vec![0.0; max_degree + 1];
    // accumulate P_l at all nodes by one recurrence pass per node
    for (x, w) in nodes.iter().zip(&weights) {
        let (mut prev, mut cur) = (1.0, *x);
        lambda[0] += w;
        if max_degree >= 1 {
            lambda[1] += w * cur;
        }
        for l in 1..max_degree {
            let next = ((2 * l + 1) as f64 * x * cur - l as f64 * prev) / (l + 1) as f64;
            prev = cur;
            cur = next;
            lambda[l + 1] += w * cur;
        }
    }
    for v in lambda.iter_mut() {
        *v *= front;
    }
    Ok(zonal_moments(kernel, xi, max_degree, &lambda))
}

// ---------------------------------------------------------------------------
// adaptive oracle
// ---------------------------------------------------------------------------

/// Independent adaptive evaluation of `int K q_r d omega` for the q-family
/// element with 1-based flat index `q_flat`.
///
/// Interval integrals run in the Chebyshev angle (`x = cos theta`), which
/// bounds the oscillation of `T_r` and turns endpoint algebraic factors
/// into mild power kinks. Zonal sphere kernels integrate in a rotated
/// frame with `xi` at the pole: the longitude integral of the degree-`l`
/// harmonic is an exact trapezoid sum, and the polar integral is adaptive.
pub fn oracle_moment(
    kernel: &KernelDescriptor,
    q_flat: usize,
    tol: f64,
) -> Result<Complex64> {
    kernel.validate()?;
    use KernelDescriptor::*;
    match kernel {
        IntervalOscillatory { kappa } => oracle_oscillatory(*kappa, q_flat - 1, tol),
        IntervalAlgebraicLeft { a } => oracle_algebraic_theta(*a, q_flat - 1, false, tol),
        IntervalAlgebraicRight { a } => oracle_algebraic_theta(*a, q_flat - 1, true, tol),
        IntervalChebyshevWeight => {
            let r = q_flat - 1;
            let panels = (r / 2 + 4).min(600);
            let breaks: Vec<f64> = (0..=panels).map(|k| PI * k as f64 / panels as f64).collect();
            let v = adaptive::integrate_panels(
                move |th: f64| (r as f64 * th).cos(),
                &breaks,
                tol,
                MAX_EVALS,
            )?;
            Ok(Complex64::new(v, 0.0))
        }
        Unit { region: RegionKind::Interval } => {
            let r = q_flat - 1;
            let v = adaptive::integrate(
                move |x: f64| crate::orthopoly::eval_chebyshev(r, x).unwrap(),
                -1.0,
                1.0,
                tol,
                MAX_EVALS,
            )?;
            Ok(Complex64::new(v, 0.0))
        }
        Unit { region: RegionKind::Sphere } => {
            let basis = BasisSet::spherical(64);
            let (l, k) = basis.degree_order(q_flat)?;
            let rule = sphere_product_rule(l + 1);
            let vals: Vec<f64> = rule
                .points
                .iter()
                .map(|p| match p {
                    Point::Sphere(q) => eval_spherical_harmonic(l, k, q).unwrap(),
                    _ => unreachable!(),
                })
                .collect();
            Ok(Complex64::new(rule.apply_values(&vals), 0.0))
        }
        SphereHarmonic { lbar, kbar } => {
            let basis = BasisSet::spherical(64);
            let (l, k) = basis.degree_order(q_flat)?;
            let rule = sphere_product_rule(lbar + l + 2);
            let vals: Vec<f64> = rule
                .points
                .iter()
                .map(|p| match p {
                    Point::Sphere(q) => {
                        eval_spherical_harmonic(*lbar, *kbar, q).unwrap()
                            * eval_spherical_harmonic(l, k, q).unwrap()
                    }
                    _ => unreachable!(),
                })
                .collect();
            Ok(Complex64::new(rule.apply_values(&vals), 0.0))
        }
        SphereAlgebraic { xi, nu } => {
            let nu = *nu;
            oracle_zonal_sphere(xi, q_flat, tol, move |theta| {
                (2.0 * (0.5 * theta).sin()).powf(nu)
            })
        }
        SphereLog { xi } => oracle_zonal_sphere(xi, q_flat, tol, |theta| {
            (2.0 * (0.5 * theta).sin()).ln()
        }),
        SphereDoubleAlgebraic { xi, nu1, nu2 } => {
            let (n1, n2) = (*nu1, *nu2);
            oracle_zonal_sphere(xi, q_flat, tol, move |theta| {
                (2.0 * (0.5 * theta).sin()).powf(n1) * (2.0 * (0.5 * theta).cos()).powf(n2)
            })
        }
    }
}

/// `int exp(i kappa cos theta) cos(r theta) sin theta d theta` over
/// `[0, pi]`, panels sized to the combined oscillation `kappa + r`.
fn oracle_oscillatory(kappa: f64, r: usize, tol: f64) -> Result<Complex64> {
    let panels = (((kappa + r as f64) / 1.5).ceil() as usize + 4).min(4000);
    let breaks: Vec<f64> = (0..=panels).map(|k| PI * k as f64 / panels as f64).collect();
    adaptive::integrate_panels(
        move |th: f64| {
            let x = th.cos();
            Complex64::new(0.0, kappa * x).exp().scale((r as f64 * th).cos() * th.sin())
        },
        &breaks,
        tol,
        MAX_EVALS,
    )
}

fn oracle_algebraic_theta(a: f64, r: usize, right: bool, tol: f64) -> Result<Complex64> {
    // (1 + x)^a with x = cos(theta) is (2 cos^2(theta/2))^a; the half-angle
    // form stays accurate into the endpoint, where 1 + cos(theta) cancels
    let panels = (r / 2 + 8).min(600);
    let breaks: Vec<f64> = (0..=panels).map(|k| PI * k as f64 / panels as f64).collect();
    let v = adaptive::integrate_panels(
        move |th: f64| {
            let base = if right {
                2.0 * (0.5 * th).sin().powi(2)
            } else {
                2.0 * (0.5 * th).cos().powi(2)
            };
            base.powf(a) * (r as f64 * th).cos() * th.sin()
        },
        &breaks,
        tol,
        MAX_EVALS,
    )?;
    Ok(Complex64::new(v, 0.0))
}

/// Rotation matrix taking the north pole to `xi` (Rodrigues form).
pub(crate) fn rotation_to(xi: &SphericalPoint) -> [[f64; 3]; 3] {
    let (ax, ay) = (-xi.y, xi.x); // z-hat cross xi
    let s = (ax * ax + ay * ay).sqrt();
    if s < 1e-14 {
        if xi.z > 0.0 {
            return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        }
        return [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
    }
    let (ux, uy) = (ax / s, ay / s);
    let c = xi.z;
    let omc = 1.0 - c;
    [
        [c + ux * ux * omc, ux * uy * omc, uy * s],
        [ux * uy * omc, c + uy * uy * omc, -ux * s],
        [-uy * s, ux * s, c],
    ]
}

pub(crate) fn rotate(r: &[[f64; 3]; 3], p: &SphericalPoint) -> SphericalPoint {
    SphericalPoint {
        x: r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z,
        y: r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z,
        z: r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z,
    }
}

/// Rotated-frame sphere oracle for a zonal kernel: the longitude sum of
/// the degree-`l` harmonic is an exact trapezoid, the polar integral (in
/// the angle, where the singular profile is stable) is adaptive.
fn oracle_zonal_sphere<G: Fn(f64) -> f64>(
    xi: &SphericalPoint,
    q_flat: usize,
    tol: f64,
    profile: G,
) -> Result<Complex64> {
    let basis = BasisSet::spherical(64);
    let (l, k) = basis.degree_order(q_flat)?;
    let rot = rotation_to(xi);
    let n_phi = 2 * l + 8;
    let f = move |theta: f64| {
        let (s, u) = (theta.sin(), theta.cos());
        let mut vals = Vec::with_capacity(n_phi);
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            let local = SphericalPoint {
                x: s * phi.cos(),
                y: s * phi.sin(),
                z: u,
            };
            let world = rotate(&rot, &local);
            vals.push(eval_spherical_harmonic(l, k, &world).unwrap());
        }
        let mean = crate::scalar::pairwise_sum(&vals) * (2.0 * PI / n_phi as f64);
        profile(theta) * mean * s
    };
    let v = adaptive::integrate_panels(f, &[0.0, 0.5 * PI, PI], tol, MAX_EVALS)?;
    Ok(Complex64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi_paper() -> SphericalPoint {
        SphericalPoint::new(0.5f64.sqrt(), 0.5f64.sqrt(), 0.0).unwrap()
    }

    #[test]
    fn oscillatory_beta0() {
        for kappa in [0.5, 3.0, 50.0, 100.0] {
            let m = moments_oscillatory_interval(kappa, 0).unwrap();
            let expect = 2.0 * kappa.sin() / kappa;
            assert!((m.values[0].re - expect).abs() < 1e-14);
            assert!(m.values[0].im.abs() < 1e-14);
        }
    }

    #[test]
    fn oscillatory_beta1_matches_oracle() {
        let kappa = 100.0;
        let m = moments_oscillatory_interval(kappa, 4).unwrap();
        let kernel = KernelDescriptor::IntervalOscillatory { kappa };
        let oracle = oracle_moment(&kernel, 2, 1e-13).unwrap();
        assert!((m.values[1] - oracle).norm() < 1e-12);
    }

    #[test]
    fn oscillatory_sampled_against_oracle() {
        let kappa = 100.0;
        let m = moments_oscillatory_interval(kappa, 240).unwrap();
        let kernel = KernelDescriptor::IntervalOscillatory { kappa };
        for r in [0usize, 5, 47, 99, 100, 101, 130, 180, 239, 240] {
            let oracle = oracle_moment(&kernel, r + 1, 1e-13).unwrap();
            let diff = (m.values[r] - oracle).norm();
            let scale = oracle.norm().max(1e-13);
            assert!(
                diff / scale < 1e-10 || diff < 2e-13,
                "r={r}: impl {:?} oracle {:?} rel {:.3e}",
                m.values[r],
                oracle,
                diff / scale
            );
        }
    }

    #[test]
    fn oscillatory_decay_past_crossover() {
        for kappa in [50.0, 100.0, 160.0] {
            let r_max = (2.0 * kappa) as usize;
            let m = moments_oscillatory_interval(kappa, r_max).unwrap();
            let at_k = m.values[kappa as usize].norm();
            let at_2k = m.values[r_max].norm();
            assert!(at_2k < at_k, "kappa={kappa}: {at_2k} !< {at_k}");
        }
    }

    #[test]
    fn chebyshev_weight_moments_are_pi_then_zero() {
        let m =
            moments_algebraic_interval(&KernelDescriptor::IntervalChebyshevWeight, 12).unwrap();
        assert_eq!(m.values[0], PI);
        assert!(m.values[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn algebraic_left_a0_gives_chebyshev_integrals() {
        let m =
            moments_algebraic_interval(&KernelDescriptor::IntervalAlgebraicLeft { a: 0.0 }, 10)
                .unwrap();
        for (r, v) in m.values.iter().enumerate() {
            let expect = if r % 2 == 1 {
                0.0
            } else {
                2.0 / (1.0 - (r * r) as f64)
            };
            assert!((v - expect).abs() < 1e-12, "r={r}: {v} vs {expect}");
        }
    }

    #[test]
    fn algebraic_left_third_root_closed_form() {
        let m = moments_algebraic_interval(
            &KernelDescriptor::IntervalAlgebraicLeft { a: -1.0 / 3.0 },
            0,
        )
        .unwrap();
        let expect = 1.5 * 2f64.powf(2.0 / 3.0);
        assert!((m.values[0] - expect).abs() < 1e-11, "{}", m.values[0]);
    }

    #[test]
    fn algebraic_right_matches_parity_of_left() {
        let a = -0.2;
        let right = moments_algebraic_interval(&KernelDescriptor::IntervalAlgebraicRight { a }, 9)
            .unwrap();
        let left =
            moments_algebraic_interval(&KernelDescriptor::IntervalAlgebraicLeft { a }, 9).unwrap();
        for r in 0..=9usize {
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                (right.values[r] - sign * left.values[r]).abs() < 1e-11,
                "r={r}"
            );
        }
    }

    #[test]
    fn harmonic_delta_vector() {
        let m = moments_sphere_harmonic(12, 8, 40).unwrap();
        let basis = BasisSet::spherical(40);
        let flat = basis.flat_index(12, 8).unwrap();
        assert_eq!(flat, 165);
        for (i, v) in m.values.iter().enumerate() {
            let expect = if i + 1 == flat { 1.0 } else { 0.0 };
            assert_eq!(*v, expect);
        }
        assert_eq!(m.max_active_degree(), 12);
        let trivial = moments_sphere_harmonic(0, 0, 0).unwrap();
        assert_eq!(trivial.values, vec![1.0]);
        assert!(moments_sphere_harmonic(3, 0, 2).is_err());
    }

    #[test]
    fn sphere_algebraic_nu0_reduces_to_unit_moments() {
        let m = moments_sphere_algebraic(&xi_paper(), 0.0, 6).unwrap();
        assert!((m.values[0] - (4.0 * PI).sqrt()).abs() < 1e-12);
        assert!(m.values[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sphere_algebraic_nu2_matches_exact_quadrature() {
        // |xi - x|^2 Y_{l,k} has degree l + 2: integrate exactly
        let xi = xi_paper();
        let m = moments_sphere_algebraic(&xi, 2.0, 6).unwrap();
        let kernel = KernelDescriptor::SphereAlgebraic { xi, nu: 2.0 };
        let basis = BasisSet::spherical(6);
        let rule = sphere_product_rule(10);
        for l in 0..=6usize {
            for k in [-(l as i64), 0, l as i64] {
                let flat = basis.flat_index(l, k).unwrap();
                let vals: Vec<f64> = rule
                    .points
                    .iter()
                    .map(|p| match p {
                        Point::Sphere(q) => {
                            kernel.eval(p).re * eval_spherical_harmonic(l, k, q).unwrap()
                        }
                        _ => unreachable!(),
                    })
                    .collect();
                let direct = rule.apply_values(&vals);
                assert!(
                    (m.values[flat - 1] - direct).abs() < 1e-10,
                    "l={l} k={k}: {} vs {direct}",
                    m.values[flat - 1]
                );
            }
        }
    }

    #[test]
    fn sphere_algebraic_formula_matches_explicit_special_functions() {
        let xi = xi_paper();
        let nu = -0.5;
        let m = moments_sphere_algebraic(&xi, nu, 8).unwrap();
        let basis = BasisSet::spherical(8);
        for l in [0usize, 1, 3, 8] {
            let explicit = 2f64.powf(nu + 2.0)
                * PI
                * special::pochhammer(-0.5 * nu, l)
                * special::gamma(0.5 * (nu + 2.0))
                / special::gamma(l as f64 + 0.5 * nu + 2.0);
            let flat = basis.flat_index(l, 0).unwrap();
            let y = eval_spherical_harmonic(l, 0, &xi).unwrap();
            assert!(
                (m.values[flat - 1] - explicit * y).abs() < 1e-12,
                "l={l}"
            );
        }
    }

    #[test]
    fn log_moment_level_zero_and_closed_form() {
        // 1-D pieces: int log(1-t) dt = 2 ln 2 - 2, and for l >= 1 the
        // integral is -2/(l(l+1))
        let raw = adaptive::integrate(
            |u: f64| u.max(1e-300).ln(),
            0.0,
            2.0,
            1e-13,
            MAX_EVALS,
        )
        .unwrap();
        assert!((raw - (2.0 * 2f64.ln() - 2.0)).abs() < 1e-12);

        let xi = xi_paper();
        let m = moments_sphere_log(&xi, 10).unwrap();
        let basis = BasisSet::spherical(10);
        for l in 1..=10usize {
            let lambda = -2.0 * PI / (l * (l + 1)) as f64;
            let flat = basis.flat_index(l, 0).unwrap();
            let y = eval_spherical_harmonic(l, 0, &xi).unwrap();
            assert!(
                (m.values[flat - 1] - lambda * y).abs() < 1e-11,
                "l={l}: {} vs {}",
                m.values[flat - 1],
                lambda * y
            );
        }
        // constant mode carries the full zonal profile of log|xi - x|
        let lambda0 = PI * (4.0 * 2f64.ln() - 2.0);
        let y00 = 1.0 / (4.0 * PI).sqrt();
        assert!((m.values[0] - lambda0 * y00).abs() < 1e-10);
    }

    #[test]
    fn log_moments_zonal_at_pole() {
        let pole = SphericalPoint::new(0.0, 0.0, 1.0).unwrap();
        let m = moments_sphere_log(&pole, 8).unwrap();
        let basis = BasisSet::spherical(8);
        for l in 0..=8usize {
            for k in -(l as i64)..=(l as i64) {
                let flat = basis.flat_index(l, k).unwrap();
                if k != 0 {
                    assert_eq!(m.values[flat - 1], 0.0, "l={l} k={k}");
                }
            }
        }
    }

    #[test]
    fn double_algebraic_zero_exponents_reduce_to_unit() {
        let m = moments_sphere_double_algebraic(&xi_paper(), 0.0, 0.0, 5).unwrap();
        assert!((m.values[0] - (4.0 * PI).sqrt()).abs() < 1e-12);
        assert!(m.values[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn double_algebraic_level_zero_against_adaptive() {
        // J_0 = int (1-t^2)^(-1/4) dt
        let (_nodes, weights) = gauss_jacobi(8, -0.25, -0.25).unwrap();
        let gj: f64 = weights.iter().sum::<f64>();
        let adaptive_j = adaptive::integrate(
            |t: f64| (1.0 - t * t).max(0.0).powf(-0.25),
            -1.0 + 1e-14,
            1.0 - 1e-14,
            1e-11,
            MAX_EVALS,
        )
        .unwrap();
        assert!((gj - adaptive_j).abs() < 1e-9, "{gj} vs {adaptive_j}");
    }

    #[test]
    fn double_algebraic_rodrigues_form_cross_check() {
        // the pre-simplification form ((-1)^l 2^((nu1+nu2)/2) |S^1| R_{l,3}
        // times the derivative integral) must agree at small degree
        let xi = xi_paper();
        let (nu1, nu2) = (-0.5, -0.4);
        let l_max = 6usize;
        let m = moments_sphere_double_algebraic(&xi, nu1, nu2, l_max).unwrap();
        let basis = BasisSet::spherical(l_max);
        let (nodes, weights) = gauss_jacobi(l_max + 6, 0.5 * nu1, 0.5 * nu2).unwrap();
        for l in 0..=l_max {
            // coefficients of (d/dt)^l (1 - t^2)^l
            // (1-t^2)^l = sum_j C(l,j) (-1)^j t^(2j)
            let mut deriv = vec![0.0f64; 2 * l + 1];
            for j in 0..=l {
                if 2 * j < l {
                    continue;
                }
                let mut c = binomial(l, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
                // falling factorial (2j)(2j-1)...(2j-l+1)
                for step in 0..l {
                    c *= (2 * j - step) as f64;
                }
                deriv[2 * j - l] += c;
            }
            let integral: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(t, w)| {
                    let poly: f64 = deriv
                        .iter()
                        .enumerate()
                        .map(|(p, c)| c * t.powi(p as i32))
                        .sum();
                    w * poly
                })
                .sum();
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let r_l3 = special::r_ns(l, 3.0);
            let lambda_rodrigues =
                sign * 2f64.powf(0.5 * (nu1 + nu2)) * 2.0 * PI * r_l3 * integral;
            let flat = basis.flat_index(l, 0).unwrap();
            let y = eval_spherical_harmonic(l, 0, &xi).unwrap();
            if y.abs() > 1e-12 {
                let simplified = m.values[flat - 1] / y;
                assert!(
                    (lambda_rodrigues - simplified).abs() < 1e-9 * simplified.abs().max(1.0),
                    "l={l}: rodrigues {lambda_rodrigues} vs simplified {simplified}"
                );
            }
        }
    }

    fn binomial(n: usize, k: usize) -> f64 {
        let mut v = 1.0;
        for i in 0..k {
            v *= (n - i) as f64 / (i + 1) as f64;
        }
        v
    }

    #[test]
    fn oracle_trivial_values() {
        let unit = KernelDescriptor::Unit {
            region: RegionKind::Interval,
        };
        let v = oracle_moment(&unit, 1, 1e-13).unwrap();
        assert!((v.re - 2.0).abs() < 1e-13);

        let osc = KernelDescriptor::IntervalOscillatory { kappa: 100.0 };
        let v = oracle_moment(&osc, 1, 1e-13).unwrap();
        assert!((v.re - 2.0 * 100f64.sin() / 100.0).abs() < 1e-12);
        assert!(v.im.abs() < 1e-12);

        let harm = KernelDescriptor::SphereHarmonic { lbar: 2, kbar: 1 };
        let basis = BasisSet::spherical(4);
        let flat = basis.flat_index(2, 1).unwrap();
        let v = oracle_moment(&harm, flat, 1e-12).unwrap();
        assert!((v.re - 1.0).abs() < 1e-11);
    }

    #[test]
    fn oracle_zonal_sphere_matches_formula_smooth_case() {
        let xi = xi_paper();
        let m = moments_sphere_algebraic(&xi, 1.0, 4).unwrap();
        let kernel = KernelDescriptor::SphereAlgebraic { xi, nu: 1.0 };
        let basis = BasisSet::spherical(4);
        for (l, k) in [(0usize, 0i64), (1, 1), (2, -2), (4, 3)] {
            let flat = basis.flat_index(l, k).unwrap();
            let oracle = oracle_moment(&kernel, flat, 1e-11).unwrap();
            assert!(
                (oracle.re - m.values[flat - 1]).abs() < 1e-9,
                "l={l} k={k}: {} vs {}",
                oracle.re,
                m.values[flat - 1]
            );
        }
    }

    #[test]
    fn moment_cache_slices_longest() {
        let kernel = KernelDescriptor::IntervalAlgebraicLeft { a: -1.0 / 3.0 };
        let long = f64::modified_moments_cached(&kernel, 12).unwrap();
        let short = f64::modified_moments_cached(&kernel, 5).unwrap();
        assert_eq!(short.values.len(), 6);
        assert_eq!(short.values[..], long.values[..6]);
    }

    #[test]
    fn unit_kernel_csv_shape() {
        let m = moments_unit(RegionKind::Interval, 3).unwrap();
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("r,re,im"));
    }
}
