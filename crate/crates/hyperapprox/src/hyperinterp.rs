//! The approximation operators: classical hyperinterpolation `L_n F`
//! (quadrature of the full product `K f`), efficient hyperinterpolation
//! `S_n F` (the kernel enters only through its moments, via the weight
//! matrix `W`), and a near-exact orthogonal projection reference `P_n F`.

use crate::connection::AlphaMatrix;
use crate::linalg::{basis_matrix, par_matmul, tr_apply};
use crate::moments::{KernelDescriptor, MomentScalar};
use crate::orthopoly::{BasisSet, Point, RegionKind};
use crate::quadrature::QuadratureRule;
use crate::reference;
use crate::scalar::Scalar;
use crate::{Error, Result};
use ndarray::Array2;
use rayon::prelude::*;

/// Which operator produced an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Classical,
    Efficient,
    Projection,
}

/// Coefficient vector over the orthonormal degree-`n` basis.
#[derive(Debug, Clone)]
pub struct Expansion<T: Scalar> {
    pub basis: BasisSet,
    pub coefficients: Vec<T>,
    pub provenance: Provenance,
    /// Set when the rule had fewer points than `dim P_n`.
    pub rank_deficient: bool,
}

impl<T: Scalar> Expansion<T> {
    pub fn zero(basis: BasisSet, provenance: Provenance) -> Self {
        Expansion {
            coefficients: vec![T::ZERO; basis.dim()],
            basis,
            provenance,
            rank_deficient: false,
        }
    }

    /// Pointwise value `sum_l c_l p_l(x)`.
    pub fn evaluate(&self, p: &Point) -> Result<T> {
        self.check_point(p)?;
        let row = self.basis.eval_row_vec(p)?;
        Ok(self
            .coefficients
            .iter()
            .zip(&row)
            .map(|(c, r)| c.scale(*r))
            .sum())
    }

    /// Batch evaluation with a shared per-chunk scratch row.
    pub fn evaluate_batch(&self, points: &[Point]) -> Result<Vec<T>> {
        for p in points {
            self.check_point(p)?;
        }
        let d = self.basis.dim();
        let out: Vec<T> = points
            .par_chunks(1024)
            .flat_map_iter(|chunk| {
                let mut row = vec![0.0f64; d];
                chunk
                    .iter()
                    .map(|p| {
                        self.basis.eval_row(p, &mut row).expect("checked above");
                        self.coefficients
                            .iter()
                            .zip(&row)
                            .map(|(c, r)| c.scale(*r))
                            .sum()
                    })
                    .collect::<Vec<T>>()
            })
            .collect();
        Ok(out)
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        let ok = matches!(
            (self.basis.region.kind, p),
            (RegionKind::Interval, Point::Interval(_)) | (RegionKind::Sphere, Point::Sphere(_))
        );
        if !ok {
            return Err(Error::KernelRegionMismatch {
                op: "Expansion::evaluate",
            });
        }
        if let Point::Interval(x) = p {
            if x.abs() > 1.0 + 1e-12 {
                return Err(Error::Domain {
                    name: "x",
                    value: *x,
                    constraint: "|x| <= 1",
                });
            }
        }
        Ok(())
    }

    /// `L^2` norm by Parseval over the orthonormal basis.
    pub fn l2_norm(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| c.abs_sq())
            .sum::<f64>()
            .sqrt()
    }

    /// CSV dump, columns `ell,degree,order,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ell,degree,order,re,im\n");
        for (i, c) in self.coefficients.iter().enumerate() {
            let (deg, ord) = self.basis.degree_order(i + 1).unwrap();
            out.push_str(&format!(
                "{},{},{},{:.17e},{:.17e}\n",
                i + 1,
                deg,
                ord,
                c.re(),
                c.im()
            ));
        }
        out
    }
}

/// Free-function form of expansion evaluation.
pub fn evaluate_expansion<T: Scalar>(e: &Expansion<T>, points: &[Point]) -> Result<Vec<T>> {
    e.evaluate_batch(points)
}

/// The product-integration weights `W_{j l} = w_j sum_{l'} p_{l'}(x_j)
/// alpha_{l' l}` of one (rule, degree, kernel) triple.
#[derive(Debug)]
pub struct EfficientWeights<T: Scalar> {
    pub rule: QuadratureRule,
    pub n: usize,
    pub w: Array2<T>,
}

fn orthonormal_basis(rule: &QuadratureRule, n: usize) -> BasisSet {
    match rule.region.kind {
        RegionKind::Interval => BasisSet::legendre(n),
        RegionKind::Sphere => BasisSet::spherical(n),
    }
}

/// Kernel values at the rule nodes in the pipeline scalar, guarding
/// against nodes that collide with a kernel singularity.
fn kernel_values_at<T: Scalar>(
    kernel: &KernelDescriptor,
    points: &[Point],
) -> Result<Vec<T>> {
    if kernel.is_complex() && !T::IS_COMPLEX {
        return Err(Error::KernelRegionMismatch {
            op: "complex kernel in a real pipeline",
        });
    }
    let singular = kernel.singular_points();
    if !singular.is_empty() {
        for p in points {
            for s in &singular {
                let dist = match (p, s) {
                    (Point::Interval(x), Point::Interval(y)) => (x - y).abs(),
                    (Point::Sphere(a), Point::Sphere(b)) => a.dist(b),
                    _ => f64::INFINITY,
                };
                if dist <= 1e-14 {
                    return Err(Error::NodeOnSingularity { dist });
                }
            }
        }
    }
    Ok(points.iter().map(|p| T::from_complex(kernel.eval(p))).collect())
}

/// Samples a real-valued function at the rule nodes.
pub fn sample_function<F: Fn(&Point) -> f64>(rule: &QuadratureRule, f: F) -> Vec<f64> {
    rule.points.iter().map(f).collect()
}

/// Classical hyperinterpolation: coefficients `<K f, p_l>_m`.
pub fn classical_hyperinterpolation<T: MomentScalar, F: Fn(&Point) -> f64>(
    kernel: &KernelDescriptor,
    f: F,
    rule: &QuadratureRule,
    n: usize,
) -> Result<Expansion<T>> {
    let basis = orthonormal_basis(rule, n);
    let kv: Vec<T> = kernel_values_at(kernel, &rule.points)?;
    let weighted: Vec<T> = rule
        .points
        .iter()
        .zip(rule.weights.iter())
        .zip(kv.iter())
        .map(|((p, w), k)| k.scale(w * f(p)))
        .collect();
    let b: Array2<T> = basis_matrix(&basis, &rule.points);
    let coefficients = tr_apply(&b, &weighted);
    Ok(Expansion {
        basis,
        coefficients,
        provenance: Provenance::Classical,
        rank_deficient: rule.len() < basis.dim(),
    })
}

/// Assembles the `m x d_n` weight matrix `W = diag(w) B alpha`.
pub fn efficient_weights<T: MomentScalar>(
    rule: &QuadratureRule,
    n: usize,
    alpha: &AlphaMatrix<T>,
) -> Result<EfficientWeights<T>> {
    assert_eq!(alpha.n, n, "alpha degree mismatch");
    let basis = orthonormal_basis(rule, n);
    let b: Array2<T> = basis_matrix(&basis, &rule.points);
    let mut w = par_matmul(b.view(), alpha.entries.view());
    for (mut row, wj) in w.rows_mut().into_iter().zip(rule.weights.iter()) {
        for v in row.iter_mut() {
            *v = v.scale(*wj);
        }
    }
    Ok(EfficientWeights {
        rule: rule.clone(),
        n,
        w,
    })
}

/// Efficient hyperinterpolation from samples of the smooth factor only:
/// coefficient `l` is `sum_j W_{j l} f(x_j)`. The kernel is never
/// evaluated here; it entered through the moments behind `alpha`.
pub fn efficient_hyperinterpolation<T: MomentScalar>(
    f_samples: &[f64],
    weights: &EfficientWeights<T>,
) -> Result<Expansion<T>> {
    if f_samples.len() != weights.rule.len() {
        return Err(Error::SampleMismatch {
            expected: weights.rule.len(),
            got: f_samples.len(),
        });
    }
    let fv: Vec<T> = f_samples.iter().map(|x| T::from_re(*x)).collect();
    let coefficients = tr_apply(&weights.w, &fv);
    let basis = orthonormal_basis(&weights.rule, weights.n);
    Ok(Expansion {
        rank_deficient: weights.rule.len() < basis.dim(),
        basis,
        coefficients,
        provenance: Provenance::Efficient,
    })
}

/// Near-exact `L^2` projection `P_n(K f)` through the kernel-refined
/// reference grid; the independent yardstick for the operator identities.
pub fn orthogonal_projection_reference<T: MomentScalar, F: Fn(&Point) -> f64 + Sync>(
    kernel: &KernelDescriptor,
    f: F,
    n: usize,
    oversample: usize,
) -> Result<Expansion<T>> {
    if kernel.is_complex() && !T::IS_COMPLEX {
        return Err(Error::KernelRegionMismatch {
            op: "complex kernel in a real pipeline",
        });
    }
    let basis = match kernel.region_kind() {
        RegionKind::Interval => BasisSet::legendre(n),
        RegionKind::Sphere => BasisSet::spherical(n),
    };
    let grid = reference::build(kernel, n, oversample)?;
    let weighted: Vec<T> = grid
        .points
        .iter()
        .zip(grid.weights.iter())
        .zip(grid.kernel_values.iter())
        .map(|((p, w), kv)| T::from_complex(*kv).scale(w * f(p)))
        .collect();
    let b: Array2<T> = basis_matrix(&basis, &grid.points);
    let coefficients = tr_apply(&b, &weighted);
    Ok(Expansion {
        basis,
        coefficients,
        provenance: Provenance::Projection,
        rank_deficient: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::MomentScalar;
    use crate::orthopoly::clenshaw_legendre_normalized;
    use crate::quadrature::gauss_legendre;
    use num_complex::Complex64;

    fn unit_interval() -> KernelDescriptor {
        KernelDescriptor::Unit {
            region: RegionKind::Interval,
        }
    }

    #[test]
    fn classical_reproduces_basis_function() {
        // K = 1, f = p_3, rule exact to 2n: coefficients = e_4
        let n = 6;
        let rule = gauss_legendre(n + 1).unwrap();
        let basis = BasisSet::legendre(n);
        let f = |p: &Point| basis.eval_row_vec(p).unwrap()[3];
        let exp: Expansion<f64> =
            classical_hyperinterpolation(&unit_interval(), f, &rule, n).unwrap();
        for (i, c) in exp.coefficients.iter().enumerate() {
            let expect = if i == 3 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-12, "i={i}: {c}");
        }
    }

    #[test]
    fn classical_t2_coefficients_from_projection_oracle() {
        // F = T_2, n = 2, three-point rule (exactness 5): the projection
        // integrals are exact, frozen here by an in-test quadrature oracle
        let n = 2;
        let rule = gauss_legendre(3).unwrap();
        let f = |p: &Point| match p {
            Point::Interval(x) => 2.0 * x * x - 1.0,
            _ => unreachable!(),
        };
        let exp: Expansion<f64> =
            classical_hyperinterpolation(&unit_interval(), f, &rule, n).unwrap();

        // oracle: exact integrals int T_2 Pt_l dx with a 5-point rule
        let oracle_rule = gauss_legendre(5).unwrap();
        let basis = BasisSet::legendre(n);
        for l in 0..=n {
            let vals: Vec<f64> = oracle_rule
                .points
                .iter()
                .map(|p| match p {
                    Point::Interval(x) => {
                        (2.0 * x * x - 1.0) * basis.eval_row_vec(p).unwrap()[l]
                    }
                    _ => unreachable!(),
                })
                .collect();
            let expect = oracle_rule.apply_values(&vals);
            assert!((exp.coefficients[l] - expect).abs() < 1e-13, "l={l}");
        }
        // frozen values: (-sqrt(2)/3, 0, (4/3) sqrt(2/5))
        assert!((exp.coefficients[0] + 2f64.sqrt() / 3.0).abs() < 1e-13);
        assert!(exp.coefficients[1].abs() < 1e-13);
        assert!((exp.coefficients[2] - 4.0 / 3.0 * (2.0f64 / 5.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn unit_kernel_collapses_efficient_to_classical() {
        let n = 9;
        let rule = gauss_legendre(12).unwrap();
        let kernel = unit_interval();
        let f = |p: &Point| match p {
            Point::Interval(x) => (1.2 - x * x).recip() + (3.0 * x).sin(),
            _ => unreachable!(),
        };
        let classical: Expansion<f64> =
            classical_hyperinterpolation(&kernel, f, &rule, n).unwrap();
        let moments = f64::modified_moments_cached(&kernel, 2 * n).unwrap();
        let alpha = crate::connection::assemble_alpha(n, &kernel, &moments).unwrap();
        let w = efficient_weights(&rule, n, &alpha).unwrap();
        let efficient = efficient_hyperinterpolation(&sample_function(&rule, f), &w).unwrap();
        for (a, b) in classical.coefficients.iter().zip(&efficient.coefficients) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn efficient_weights_collapse_for_unit_kernel() {
        // alpha = I: W_{j l} = w_j p_l(x_j)
        let n = 4;
        let rule = gauss_legendre(6).unwrap();
        let kernel = unit_interval();
        let moments = f64::modified_moments_cached(&kernel, 2 * n).unwrap();
        let alpha = crate::connection::assemble_alpha(n, &kernel, &moments).unwrap();
        let w = efficient_weights(&rule, n, &alpha).unwrap();
        let basis = BasisSet::legendre(n);
        for (j, p) in rule.points.iter().enumerate() {
            let row = basis.eval_row_vec(p).unwrap();
            for l in 0..basis.dim() {
                let expect = rule.weights[j] * row[l];
                assert!((w.w[(j, l)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weight_matrix_reproducible_from_factors() {
        let n = 5;
        let kernel = KernelDescriptor::IntervalChebyshevWeight;
        let rule = gauss_legendre(8).unwrap();
        let moments = f64::modified_moments_cached(&kernel, 2 * n).unwrap();
        let alpha = crate::connection::assemble_alpha(n, &kernel, &moments).unwrap();
        let w = efficient_weights(&rule, n, &alpha).unwrap();
        let basis = BasisSet::legendre(n);
        for (j, p) in rule.points.iter().enumerate() {
            let row = basis.eval_row_vec(p).unwrap();
            for l in 0..basis.dim() {
                let direct: f64 = (0..basis.dim())
                    .map(|lp| row[lp] * alpha.entries[(lp, l)])
                    .sum::<f64>()
                    * rule.weights[j];
                assert!((w.w[(j, l)] - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sample_mismatch_is_reported() {
        let n = 3;
        let kernel = unit_interval();
        let rule = gauss_legendre(5).unwrap();
        let moments = f64::modified_moments_cached(&kernel, 2 * n).unwrap();
        let alpha = crate::connection::assemble_alpha(n, &kernel, &moments).unwrap();
        let w = efficient_weights(&rule, n, &alpha).unwrap();
        let bad = vec![0.0; 4];
        assert!(matches!(
            efficient_hyperinterpolation::<f64>(&bad, &w),
            Err(Error::SampleMismatch { .. })
        ));
    }

    #[test]
    fn rank_deficiency_is_flagged_not_rejected() {
        let n = 10; // d_n = 11 > m = 6
        let rule = gauss_legendre(6).unwrap();
        let exp: Expansion<f64> =
            classical_hyperinterpolation(&unit_interval(), |_| 1.0, &rule, n).unwrap();
        assert!(exp.rank_deficient);
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let n = 8;
        let basis = BasisSet::legendre(n);
        let f = |p: &Point| basis.eval_row_vec(p).unwrap()[5];
        let proj: Expansion<f64> =
            orthogonal_projection_reference(&unit_interval(), f, n, 1).unwrap();
        for (i, c) in proj.coefficients.iter().enumerate() {
            let expect = if i == 5 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-12, "i={i}: {c}");
        }
    }

    #[test]
    fn projection_stable_under_refinement() {
        let n = 10;
        let f = |p: &Point| match p {
            Point::Interval(x) => (-x * x).exp(),
            _ => unreachable!(),
        };
        let p1: Expansion<f64> =
            orthogonal_projection_reference(&unit_interval(), f, n, 1).unwrap();
        let p2: Expansion<f64> =
            orthogonal_projection_reference(&unit_interval(), f, n, 2).unwrap();
        for (a, b) in p1.coefficients.iter().zip(&p2.coefficients) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn evaluate_expansion_paths_agree() {
        let basis = BasisSet::legendre(12);
        let coeffs: Vec<f64> = (0..13).map(|k| ((k * 31 + 7) % 13) as f64 / 6.5 - 1.0).collect();
        let e = Expansion {
            basis,
            coefficients: coeffs.clone(),
            provenance: Provenance::Projection,
            rank_deficient: false,
        };
        for &x in &[-0.97, -0.21, 0.0, 0.55, 0.99] {
            let v = e.evaluate(&Point::Interval(x)).unwrap();
            let clen = clenshaw_legendre_normalized(&coeffs, x);
            assert!((v - clen).abs() < 1e-12);
        }
        // zero coefficients evaluate to zero; a lone constant coefficient
        // evaluates to 1/sqrt(2)
        let zero = Expansion::<f64>::zero(BasisSet::legendre(4), Provenance::Projection);
        assert_eq!(zero.evaluate(&Point::Interval(0.3)).unwrap(), 0.0);
        let mut e1 = Expansion::<f64>::zero(BasisSet::legendre(4), Provenance::Projection);
        e1.coefficients[0] = 1.0;
        let v = e1.evaluate(&Point::Interval(-0.8)).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn complex_pipeline_round_trip() {
        let kernel = KernelDescriptor::IntervalOscillatory { kappa: 12.0 };
        let n = 10;
        let rule = gauss_legendre(16).unwrap();
        let f = |p: &Point| match p {
            Point::Interval(x) => (1.2 - x * x).recip(),
            _ => unreachable!(),
        };
        let classical: Expansion<Complex64> =
            classical_hyperinterpolation(&kernel, f, &rule, n).unwrap();
        assert!(classical.coefficients.iter().any(|c| c.im.abs() > 1e-6));
        let v = classical.evaluate(&Point::Interval(0.4)).unwrap();
        assert!(v.norm() < 10.0);
    }

    #[test]
    fn node_on_singularity_detected() {
        // a synthetic rule with a node exactly at the singular endpoint
        let mut rule = gauss_legendre(4).unwrap();
        rule.points[0] = Point::Interval(-1.0);
        let kernel = KernelDescriptor::IntervalAlgebraicLeft { a: -1.0 / 3.0 };
        let res: Result<Expansion<f64>> =
            classical_hyperinterpolation(&kernel, |_| 1.0, &rule, 3);
        assert!(matches!(res, Err(Error::NodeOnSingularity { .. })));
    }

    #[test]
    fn expansion_csv_layout() {
        let e = Expansion::<f64>::zero(BasisSet::spherical(1), Provenance::Classical);
        let csv = e.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "ell,degree,order,re,im");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("2,1,-1,"));
    }
}
