//! Expansion of basis products `p_{l'} p_l` in the auxiliary family, and
//! assembly of `alpha_{l' l} = sum_r c_r beta_r` together with the
//! stability constant `A_n` (the Frobenius norm of alpha).
//!
//! The assembled value equals `int Ktilde p_{l'} p_l d omega`, where
//! `Ktilde = sum_r beta_r q_r` is the kernel's projection onto the
//! q-span (on the interval, the finite Chebyshev series reconstructed
//! from the moments). That integrand is a polynomial, so one exact
//! quadrature pass assembles the whole matrix; the reordering is an
//! algebraic identity with the pairwise `sum_r c_r beta_r` form, which
//! stays available through [`ProductExpansion`] and is what the tests
//! compare against.

use crate::linalg::{basis_matrix, weighted_gram};
use crate::moments::{KernelDescriptor, MomentScalar, MomentVector};
use crate::orthopoly::{
    clenshaw_chebyshev, BasisSet, Point, RegionKind, SphericalPoint,
};
use crate::quadrature::sphere_product_rule;
use crate::scalar::Scalar;
use crate::{Error, Result};
use ndarray::Array2;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Sparse expansion of one basis product over the auxiliary family.
#[derive(Debug, Clone)]
pub struct ProductExpansion {
    pub region: RegionKind,
    /// `(degree, order)` of the two factors; orders are 0 on the interval.
    pub pair: ((usize, i64), (usize, i64)),
    /// `(flat q-index, coefficient)` terms, 1-based indices.
    pub terms: Vec<(usize, f64)>,
    /// q-family the flat indices refer to.
    pub q_basis: BasisSet,
}

impl ProductExpansion {
    /// Evaluates `sum_r c_r q_r` at a point.
    pub fn reconstruct_at(&self, p: &Point) -> f64 {
        let row = self
            .q_basis
            .eval_row_vec(p)
            .expect("point/region mismatch in reconstruct_at");
        self.terms.iter().map(|(idx, c)| c * row[idx - 1]).sum()
    }
}

/// Chebyshev coefficients of the product of two normalized Legendre
/// polynomials: `c_0 = (1/pi) int prod T_0 w dx`, `c_r = (2/pi) int prod
/// T_r w dx`, by Gauss-Chebyshev quadrature with `l1 + l2 + 1` nodes
/// (exact for the polynomial integrand).
pub fn product_expansion_interval(l1: usize, l2: usize) -> ProductExpansion {
    let deg = l1 + l2;
    let n_nodes = deg + 1;
    let basis = BasisSet::legendre(l1.max(l2));
    let mut prods = Vec::with_capacity(n_nodes);
    let mut thetas = Vec::with_capacity(n_nodes);
    for k in 0..n_nodes {
        let theta = PI * (2.0 * k as f64 + 1.0) / (2.0 * n_nodes as f64);
        let x = theta.cos();
        let row = basis.eval_row_vec(&Point::Interval(x)).unwrap();
        prods.push(row[l1] * row[l2]);
        thetas.push(theta);
    }
    let mut terms = Vec::with_capacity(deg + 1);
    for r in 0..=deg {
        let mut acc = 0.0;
        for (prod, theta) in prods.iter().zip(&thetas) {
            acc += prod * (r as f64 * theta).cos();
        }
        let factor = if r == 0 { 1.0 } else { 2.0 } / n_nodes as f64;
        terms.push((r + 1, factor * acc));
    }
    ProductExpansion {
        region: RegionKind::Interval,
        pair: ((l1, 0), (l2, 0)),
        terms,
        q_basis: BasisSet::chebyshev(deg),
    }
}

/// Harmonic coefficients of `Y_{l1,k1} Y_{l2,k2}` up to degree `l1 + l2`,
/// computed with a product rule of exactness `2 (l1 + l2)`; entries below
/// 1e-13 in magnitude (the selection-rule zeros) are dropped.
pub fn product_expansion_sphere(l1: usize, k1: i64, l2: usize, k2: i64) -> ProductExpansion {
    let deg = l1 + l2;
    let rule = sphere_product_rule(2 * deg);
    let q_basis = BasisSet::spherical(deg);
    let b: Array2<f64> = basis_matrix(&q_basis, &rule.points);
    let fac1 = BasisSet::spherical(l1);
    let fac2 = BasisSet::spherical(l2);
    let i1 = fac1.flat_index(l1, k1).expect("factor index") - 1;
    let i2 = fac2.flat_index(l2, k2).expect("factor index") - 1;
    let weighted: Vec<f64> = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(p, w)| {
            let r1 = fac1.eval_row_vec(p).unwrap();
            let r2 = fac2.eval_row_vec(p).unwrap();
            w * r1[i1] * r2[i2]
        })
        .collect();
    let coeffs = crate::linalg::tr_apply(&b, &weighted);
    let terms: Vec<(usize, f64)> = coeffs
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > 1e-13)
        .map(|(i, c)| (i + 1, c))
        .collect();
    ProductExpansion {
        region: RegionKind::Sphere,
        pair: ((l1, k1), (l2, k2)),
        terms,
        q_basis,
    }
}

/// Kernel-weighted basis Gram matrix `alpha_{l' l}` of degree `n`, with
/// the Frobenius stability constant `A_n = sqrt(sum |alpha|^2)`.
#[derive(Debug, Clone)]
pub struct AlphaMatrix<T: Scalar> {
    pub n: usize,
    pub kernel: KernelDescriptor,
    pub basis: BasisSet,
    pub entries: Array2<T>,
    pub a_n: f64,
}

impl<T: Scalar> AlphaMatrix<T> {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Assembles `alpha_{l' l} = sum_r c_r beta_r` for every pair up to degree
/// `n` from the kernel's modified moments.
pub fn assemble_alpha<T: MomentScalar>(
    n: usize,
    kernel: &KernelDescriptor,
    moments: &MomentVector<T>,
) -> Result<AlphaMatrix<T>> {
    match kernel.region_kind() {
        RegionKind::Interval => assemble_alpha_interval(n, kernel, moments),
        RegionKind::Sphere => assemble_alpha_sphere(n, kernel, moments),
    }
}

fn frobenius<T: Scalar>(entries: &Array2<T>) -> f64 {
    entries.iter().map(|v| v.abs_sq()).sum::<f64>().sqrt()
}

fn assemble_alpha_interval<T: MomentScalar>(
    n: usize,
    kernel: &KernelDescriptor,
    moments: &MomentVector<T>,
) -> Result<AlphaMatrix<T>> {
    if moments.values.len() < 2 * n + 1 {
        return Err(Error::MomentVectorTooShort {
            have: moments.values.len(),
            need: 2 * n + 1,
        });
    }
    // Gauss-Chebyshev nodes: 2n + 1 of them integrate products of degree
    // up to 4n + 1 exactly against the Chebyshev weight
    let n_nodes = 2 * n + 1;
    let basis = BasisSet::legendre(n);
    // fold the quadrature factors into the moment coefficients:
    // g_k = beta_0/N + (2/N) sum_{r>=1} beta_r T_r(x_k)
    let scaled: Vec<T> = moments.values[..=2 * n]
        .iter()
        .enumerate()
        .map(|(r, b)| b.scale(if r == 0 { 1.0 } else { 2.0 } / n_nodes as f64))
        .collect();
    let points: Vec<Point> = (0..n_nodes)
        .map(|k| {
            let theta = PI * (2.0 * k as f64 + 1.0) / (2.0 * n_nodes as f64);
            Point::Interval(theta.cos())
        })
        .collect();
    let g: Vec<T> = points
        .iter()
        .map(|p| match p {
            Point::Interval(x) => clenshaw_chebyshev(&scaled, *x),
            _ => unreachable!(),
        })
        .collect();
    let b: Array2<T> = basis_matrix(&basis, &points);
    let entries = weighted_gram(&b, &g);
    let a_n = frobenius(&entries);
    Ok(AlphaMatrix {
        n,
        kernel: *kernel,
        basis,
        entries,
        a_n,
    })
}

fn assemble_alpha_sphere<T: MomentScalar>(
    n: usize,
    kernel: &KernelDescriptor,
    moments: &MomentVector<T>,
) -> Result<AlphaMatrix<T>> {
    let need = (2 * n + 1) * (2 * n + 1);
    if moments.values.len() < need {
        return Err(Error::MomentVectorTooShort {
            have: moments.values.len(),
            need,
        });
    }
    let q_deg = moments.max_active_degree().min(2 * n);
    let rule = sphere_product_rule(2 * n + q_deg);
    let basis = BasisSet::spherical(n);
    let q_basis = BasisSet::spherical(q_deg);
    let q_dim = q_basis.dim();
    // g_j = w_j * Ktilde(x_j), Ktilde the q-span projection of the kernel
    let g: Vec<T> = rule
        .points
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(p, w)| {
            let q = match p {
                Point::Sphere(q) => q,
                _ => unreachable!(),
            };
            let mut row = vec![0.0f64; q_dim];
            crate::orthopoly::sphere_row(q_deg, q, &mut row);
            let mut acc = T::ZERO;
            for (val, b) in row.iter().zip(moments.values.iter()) {
                acc += b.scale(*val);
            }
            acc.scale(*w)
        })
        .collect();
    let b: Array2<T> = basis_matrix(&basis, &rule.points);
    let entries = weighted_gram(&b, &g);
    let a_n = frobenius(&entries);
    Ok(AlphaMatrix {
        n,
        kernel: *kernel,
        basis,
        entries,
        a_n,
    })
}

type AlphaCacheMap<T> = HashMap<((u8, [u64; 5]), usize), Arc<AlphaMatrix<T>>>;

/// Scalar hook providing the per-(kernel, n) alpha cache.
pub trait AlphaScalar: MomentScalar {
    fn alpha_cached(n: usize, kernel: &KernelDescriptor) -> Result<Arc<AlphaMatrix<Self>>>;
}

fn alpha_cached_impl<T: AlphaScalar>(
    cache: &'static OnceLock<Mutex<AlphaCacheMap<T>>>,
    n: usize,
    kernel: &KernelDescriptor,
) -> Result<Arc<AlphaMatrix<T>>> {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (kernel_cache_key(kernel), n);
    if let Some(hit) = map.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let moments = T::modified_moments_cached(kernel, 2 * n)?;
    let fresh = Arc::new(assemble_alpha(n, kernel, &moments)?);
    let mut guard = map.lock().unwrap();
    let entry = guard.entry(key).or_insert_with(|| fresh.clone());
    Ok(entry.clone())
}

fn kernel_cache_key(kernel: &KernelDescriptor) -> (u8, [u64; 5]) {
    // reuse the moment cache key layout
    use KernelDescriptor::*;
    let b = f64::to_bits;
    match kernel {
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

impl AlphaScalar for f64 {
    fn alpha_cached(n: usize, kernel: &KernelDescriptor) -> Result<Arc<AlphaMatrix<f64>>> {
        static CACHE: OnceLock<Mutex<AlphaCacheMap<f64>>> = OnceLock::new();
        alpha_cached_impl(&CACHE, n, kernel)
    }
}

impl AlphaScalar for num_complex::Complex64 {
    fn alpha_cached(
        n: usize,
        kernel: &KernelDescriptor,
    ) -> Result<Arc<AlphaMatrix<num_complex::Complex64>>> {
        static CACHE: OnceLock<Mutex<AlphaCacheMap<num_complex::Complex64>>> = OnceLock::new();
        alpha_cached_impl(&CACHE, n, kernel)
    }
}

/// Deterministic quasi-uniform sphere points (golden-angle lattice).
pub fn fibonacci_sphere(count: usize) -> Vec<SphericalPoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let s = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            SphericalPoint {
                x: s * phi.cos(),
                y: s * phi.sin(),
                z,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::oracle_moment;

    #[test]
    fn interval_product_zero_zero() {
        let exp = product_expansion_interval(0, 0);
        assert!((exp.terms[0].1 - 0.5).abs() < 1e-14);
        for (_, c) in &exp.terms[1..] {
            assert!(c.abs() < 1e-14);
        }
    }

    #[test]
    fn interval_product_one_one() {
        // Pt_1^2 = (3/2) x^2 = (3/4)(T_0 + T_2)
        let exp = product_expansion_interval(1, 1);
        let c: Vec<f64> = exp.terms.iter().map(|(_, c)| *c).collect();
        assert!((c[0] - 0.75).abs() < 1e-14);
        assert!(c[1].abs() < 1e-14);
        assert!((c[2] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn interval_product_reconstructs() {
        let exp = product_expansion_interval(5, 7);
        let basis = BasisSet::legendre(7);
        for i in 0..1000 {
            let x = -1.0 + 2.0 * i as f64 / 999.0;
            let row = basis.eval_row_vec(&Point::Interval(x)).unwrap();
            let direct = row[5] * row[7];
            let rec = exp.reconstruct_at(&Point::Interval(x));
            assert!((direct - rec).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn sphere_product_constant_pair() {
        let exp = product_expansion_sphere(0, 0, 0, 0);
        assert_eq!(exp.terms.len(), 1);
        assert_eq!(exp.terms[0].0, 1);
        assert!((exp.terms[0].1 - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn sphere_product_selection_rules() {
        let (l1, k1, l2, k2) = (3usize, 2i64, 4usize, -1i64);
        let exp = product_expansion_sphere(l1, k1, l2, k2);
        for (idx, c) in &exp.terms {
            let (ld, _) = exp.q_basis.degree_order(*idx).unwrap();
            assert!(ld <= l1 + l2, "term above degree cap");
            // parity: l1 + l2 + l'' must be even for a nonzero coefficient
            if (l1 + l2 + ld) % 2 == 1 {
                assert!(c.abs() < 1e-12, "parity violation at l''={ld}: {c}");
            }
        }
    }

    #[test]
    fn sphere_product_reconstructs() {
        let (l1, k1, l2, k2) = (2usize, 1i64, 3usize, -2i64);
        let exp = product_expansion_sphere(l1, k1, l2, k2);
        for p in fibonacci_sphere(500) {
            let y1 = crate::orthopoly::eval_spherical_harmonic(l1, k1, &p).unwrap();
            let y2 = crate::orthopoly::eval_spherical_harmonic(l2, k2, &p).unwrap();
            let rec = exp.reconstruct_at(&Point::Sphere(p));
            assert!((y1 * y2 - rec).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_unit_kernel_is_identity() {
        for (kernel, n) in [
            (
                KernelDescriptor::Unit {
                    region: RegionKind::Interval,
                },
                12usize,
            ),
            (
                KernelDescriptor::Unit {
                    region: RegionKind::Sphere,
                },
                5,
            ),
        ] {
            let moments = f64::modified_moments(&kernel, 2 * n).unwrap();
            let alpha = assemble_alpha(n, &kernel, &moments).unwrap();
            let d = alpha.dim();
            for i in 0..d {
                for j in 0..d {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (alpha.entries[(i, j)] - expect).abs() < 1e-12,
                        "({i},{j})"
                    );
                }
            }
            assert!((alpha.a_n - (d as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_chebyshev_weight_is_pi_times_c0() {
        let kernel = KernelDescriptor::IntervalChebyshevWeight;
        let n = 6;
        let moments = f64::modified_moments(&kernel, 2 * n).unwrap();
        let alpha = assemble_alpha(n, &kernel, &moments).unwrap();
        for l1 in 0..=n {
            for l2 in 0..=n {
                let exp = product_expansion_interval(l1, l2);
                let expect = PI * exp.terms[0].1;
                assert!(
                    (alpha.entries[(l1, l2)] - expect).abs() < 1e-12,
                    "({l1},{l2}): {} vs {expect}",
                    alpha.entries[(l1, l2)]
                );
            }
        }
    }

    #[test]
    fn alpha_matches_pairwise_moment_sum_interval() {
        // same numbers along the two algebraic routes: fused quadrature vs
        // explicit sum over the product expansion
        let kernel = KernelDescriptor::IntervalAlgebraicLeft { a: -1.0 / 3.0 };
        let n = 5;
        let moments = f64::modified_moments(&kernel, 2 * n).unwrap();
        let alpha = assemble_alpha(n, &kernel, &moments).unwrap();
        for l1 in 0..=n {
            for l2 in l1..=n {
                let exp = product_expansion_interval(l1, l2);
                let pairwise: f64 = exp
                    .terms
                    .iter()
                    .map(|(idx, c)| c * moments.values[idx - 1])
                    .sum();
                assert!(
                    (alpha.entries[(l1, l2)] - pairwise).abs() < 1e-12,
                    "({l1},{l2})"
                );
            }
        }
    }

    #[test]
    fn alpha_sphere_harmonic_matches_triple_product_quadrature() {
        let kernel = KernelDescriptor::SphereHarmonic { lbar: 2, kbar: 1 };
        let n = 3;
        let moments = f64::modified_moments(&kernel, 2 * n).unwrap();
        let alpha = assemble_alpha(n, &kernel, &moments).unwrap();
        let basis = BasisSet::spherical(n);
        let rule = sphere_product_rule(2 + 2 * n);
        for i in 0..basis.dim() {
            for j in i..basis.dim() {
                let (li, ki) = basis.degree_order(i + 1).unwrap();
                let (lj, kj) = basis.degree_order(j + 1).unwrap();
                let vals: Vec<f64> = rule
                    .points
                    .iter()
                    .map(|p| match p {
                        Point::Sphere(q) => {
                            crate::orthopoly::eval_spherical_harmonic(2, 1, q).unwrap()
                                * crate::orthopoly::eval_spherical_harmonic(li, ki, q).unwrap()
                                * crate::orthopoly::eval_spherical_harmonic(lj, kj, q).unwrap()
                        }
                        _ => unreachable!(),
                    })
                    .collect();
                let direct = rule.apply_values(&vals);
                assert!(
                    (alpha.entries[(i, j)] - direct).abs() < 1e-11,
                    "({li},{ki})x({lj},{kj})"
                );
            }
        }
    }

    #[test]
    fn alpha_sphere_selection_rules_for_harmonic_kernel() {
        let lbar = 3usize;
        let kernel = KernelDescriptor::SphereHarmonic { lbar, kbar: -2 };
        let n = 4;
        let moments = f64::modified_moments(&kernel, 2 * n).unwrap();
        let alpha = assemble_alpha(n, &kernel, &moments).unwrap();
        let basis = BasisSet::spherical(n);
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                let (li, _) = basis.degree_order(i + 1).unwrap();
                let (lj, _) = basis.degree_order(j + 1).unwrap();
                let banned = (li.abs_diff(lj) > lbar) || ((li + lj + lbar) % 2 == 1);
                if banned {
                    assert!(
                        alpha.entries[(i, j)].abs() < 1e-10,
                        "({li},{lj}) should vanish: {}",
                        alpha.entries[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn alpha_is_exactly_symmetric() {
        let kernel = KernelDescriptor::IntervalOscillatory { kappa: 30.0 };
        let n = 14;
        let moments =
            num_complex::Complex64::modified_moments(&kernel, 2 * n).unwrap();
        let alpha = assemble_alpha(n, &kernel, &moments).unwrap();
        for i in 0..alpha.dim() {
            for j in 0..alpha.dim() {
                assert_eq!(alpha.entries[(i, j)], alpha.entries[(j, i)]);
            }
        }
    }

    #[test]
    fn alpha_entry_against_direct_oracle() {
        // alpha_{l' l} = int K p_{l'} p_l dx checked entrywise through the
        // moment oracle route: sum_r c_r oracle(beta_r)
        let kernel = KernelDescriptor::IntervalAlgebraicRight { a: -0.2 };
        let n = 4;
        let moments = f64::modified_moments(&kernel, 2 * n).unwrap();
        let alpha = assemble_alpha(n, &kernel, &moments).unwrap();
        let exp = product_expansion_interval(3, 4);
        let mut direct = 0.0;
        for (idx, c) in &exp.terms {
            direct += c * oracle_moment(&kernel, *idx, 1e-12).unwrap().re;
        }
        assert!((alpha.entries[(3, 4)] - direct).abs() < 1e-9);
    }

    #[test]
    fn alpha_cache_returns_shared_instance() {
        let kernel = KernelDescriptor::IntervalChebyshevWeight;
        let a = f64::alpha_cached(4, &kernel).unwrap();
        let b = f64::alpha_cached(4, &kernel).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn alpha_rejects_short_moment_vector() {
        let kernel = KernelDescriptor::IntervalChebyshevWeight;
        let moments = f64::modified_moments(&kernel, 5).unwrap();
        assert!(matches!(
            assemble_alpha(4, &kernel, &moments),
            Err(Error::MomentVectorTooShort { .. })
        ));
    }
}
