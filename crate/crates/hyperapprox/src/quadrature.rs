//! Positive-weight quadrature rules with declared polynomial exactness,
//! plus the Marcinkiewicz-Zygmund constant `eta` of a rule at degree `n`.

use crate::linalg::{basis_matrix, weighted_gram};
use crate::orthopoly::{legendre_with_derivative, BasisSet, Point, Region, RegionKind, SphericalPoint};
use crate::{Error, Result};
use ndarray::Array2;
use std::f64::consts::PI;
use std::io::BufRead;
use std::path::Path;

pub(crate) mod jacobi;

/// Quadrature rule `sum_j w_j g(x_j) ~ int g d omega` with `w_j > 0` and a
/// declared exactness degree.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub region: Region,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness: usize,
    /// Provenance label, e.g. `gl:70`, `sphere_product:24`, `design:...`.
    pub source: String,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Interval nodes as plain reals.
    pub fn interval_nodes(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| match p {
                Point::Interval(x) => *x,
                Point::Sphere(_) => panic!("interval_nodes on a sphere rule"),
            })
            .collect()
    }

    /// Applies the rule to a function given by its values at the nodes.
    pub fn apply_values(&self, values: &[f64]) -> f64 {
        let prods: Vec<f64> = self
            .weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .collect();
        crate::scalar::pairwise_sum(&prods)
    }
}

/// Marcinkiewicz-Zygmund estimate at degree `n` for a rule: the tightest
/// `eta` with `|sum w chi^2 - int chi^2| <= eta int chi^2` over `chi` in
/// `P_n`, which equals the largest-magnitude eigenvalue of `G - I` for the
/// orthonormal-basis Gram matrix `G` of the rule.
#[derive(Debug, Clone, Copy)]
pub struct MZEstimate {
    pub n: usize,
    pub eta: f64,
    /// Set when the rule has fewer points than `dim P_n`; some nonzero
    /// polynomial then vanishes at every node and `eta` is reported as 1.
    pub rank_deficient: bool,
}

/// The `m`-point Gauss-Legendre rule on `[-1, 1]`, exactness `2m - 1`.
///
/// Nodes are the roots of `P_m`, found by Newton iteration from the
/// Chebyshev-angle initial guesses; weights are `2 / ((1-x^2) P_m'(x)^2)`.
pub fn gauss_legendre(m: usize) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::Domain {
            name: "m",
            value: 0.0,
            constraint: "m >= 1",
        });
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m / 2;
    for i in 0..half {
        // descending initial guess for the (i+1)-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                converged = true;
                // one polishing step
                let (p2, d2) = legendre_with_derivative(m, x);
                x -= p2 / d2;
                break;
            }
        }
        if !converged {
            return Err(Error::NewtonNoConvergence { m, node: i });
        }
        let (_, dp) = legendre_with_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[m - 1 - i] = w;
        weights[i] = w;
    }
    if m % 2 == 1 {
        let (_, dp) = legendre_with_derivative(m, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    Ok(QuadratureRule {
        region: Region::interval(),
        points: nodes.into_iter().map(Point::Interval).collect(),
        weights,
        exactness: 2 * m - 1,
        source: format!("gl:{m}"),
    })
}

/// Tensor rule on the sphere, exact for all spherical polynomials of degree
/// at most `t`: Gauss-Legendre in `z = cos theta` crossed with `t + 1`
/// equispaced longitudes.
pub fn sphere_product_rule(t: usize) -> QuadratureRule {
    let nz = (t + 2) / 2; // ceil((t+1)/2)
    let nphi = t + 1;
    let gl = gauss_legendre(nz).expect("Gauss-Legendre construction");
    let zs = gl.interval_nodes();
    let mut points = Vec::with_capacity(nz * nphi);
    let mut weights = Vec::with_capacity(nz * nphi);
    let wphi = 2.0 * PI / nphi as f64;
    for (z, wz) in zs.iter().zip(&gl.weights) {
        let s = (1.0 - z * z).max(0.0).sqrt();
        for k in 0..nphi {
            let phi = 2.0 * PI * k as f64 / nphi as f64;
            points.push(Point::Sphere(SphericalPoint {
                x: s * phi.cos(),
                y: s * phi.sin(),
                z: *z,
            }));
            weights.push(wphi * wz);
        }
    }
    QuadratureRule {
        region: Region::sphere(),
        points,
        weights,
        exactness: t,
        source: format!("sphere_product:{t}"),
    }
}

/// Loads an equal-weight spherical point set (one `x y z` triple per line,
/// `#` comments allowed) claimed to be a spherical `t`-design, and verifies
/// the claim before declaring the exactness.
pub fn load_spherical_design<P: AsRef<Path>>(path: P, t: usize) -> Result<QuadratureRule> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: display.clone(),
        source,
    })?;
    let mut points = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: display.clone(),
            source,
        })?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut it = body.split_whitespace();
        let mut next = |name| {
            it.next()
                .ok_or_else(|| Error::DesignFormat {
                    path: display.clone(),
                    reason: format!("line {}: missing {name}", lineno + 1),
                })?
                .parse::<f64>()
                .map_err(|e| Error::DesignFormat {
                    path: display.clone(),
                    reason: format!("line {}: {e}", lineno + 1),
                })
        };
        let (x, y, z) = (next("x")?, next("y")?, next("z")?);
        if it.next().is_some() {
            return Err(Error::DesignFormat {
                path: display.clone(),
                reason: format!("line {}: more than three columns", lineno + 1),
            });
        }
        points.push(Point::Sphere(SphericalPoint::normalized(x, y, z, 1e-8)?));
    }
    if points.is_empty() {
        return Err(Error::DesignFormat {
            path: display,
            reason: "no points".into(),
        });
    }
    let m = points.len();
    let rule = QuadratureRule {
        region: Region::sphere(),
        points,
        weights: vec![4.0 * PI / m as f64; m],
        exactness: t,
        source: format!("design:{display}:{t}"),
    };
    let defect = verify_exactness(&rule, t, &BasisSet::spherical(t));
    if defect > 1e-8 {
        return Err(Error::ExactnessVerification {
            degree: t,
            max_defect: defect,
        });
    }
    Ok(rule)
}

/// Maximum deviation of the rule's Gram matrix from the exact one over all
/// basis pairs of combined degree at most `degree`. The exact Gram of an
/// orthonormal family is the identity, and those pair products span the
/// polynomials of degree `<= degree`.
pub fn verify_exactness(rule: &QuadratureRule, degree: usize, basis: &BasisSet) -> f64 {
    let capped = BasisSet {
        max_degree: basis.max_degree.min(degree),
        ..*basis
    };
    let b: Array2<f64> = basis_matrix(&capped, &rule.points);
    let gram = weighted_gram(&b, &rule.weights);
    let d = capped.dim();
    let mut max_defect = 0.0f64;
    for i in 0..d {
        let (li, _) = capped.degree_order(i + 1).unwrap();
        for j in i..d {
            let (lj, _) = capped.degree_order(j + 1).unwrap();
            if li + lj > degree {
                continue;
            }
            let exact = if i == j { 1.0 } else { 0.0 };
            let defect = (gram[(i, j)] - exact).abs();
            if defect > max_defect {
                max_defect = defect;
            }
        }
    }
    max_defect
}

fn orthonormal_basis(region: &Region, n: usize) -> BasisSet {
    match region.kind {
        RegionKind::Interval => BasisSet::legendre(n),
        RegionKind::Sphere => BasisSet::spherical(n),
    }
}

/// Marcinkiewicz-Zygmund constant of `rule` at degree `n`: the spectral
/// norm of `G - I`, found by power iteration on `(G - I)^T (G - I)` (200
/// iterations or relative change below 1e-12).
pub fn estimate_mz_eta(rule: &QuadratureRule, n: usize) -> MZEstimate {
    let basis = orthonormal_basis(&rule.region, n);
    let d = basis.dim();
    if rule.len() < d {
        return MZEstimate {
            n,
            eta: 1.0,
            rank_deficient: true,
        };
    }
    let b: Array2<f64> = basis_matrix(&basis, &rule.points);
    let mut a = weighted_gram(&b, &rule.weights);
    for i in 0..d {
        a[(i, i)] -= 1.0;
    }
    let eta = spectral_norm_symmetric(&a);
    MZEstimate {
        n,
        eta,
        rank_deficient: false,
    }
}

/// Spectral norm of a symmetric matrix by power iteration on `A^T A`.
pub(crate) fn spectral_norm_symmetric(a: &Array2<f64>) -> f64 {
    let d = a.nrows();
    if d == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..d).map(|i| 1.1 + (0.7 * i as f64 + 0.3).sin()).collect();
    let norm = |x: &[f64]| x.iter().map(|t| t * t).sum::<f64>().sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|t| *t /= nv);
    let mut est = 0.0f64;
    for _ in 0..200 {
        let u = mat_vec(a, &v);
        let w = mat_vec(a, &u);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let new_est = norm(&u); // ||A v|| with ||v|| = 1
        v = w.iter().map(|t| t / nw).collect();
        if (new_est - est).abs() <= 1e-12 * new_est.max(1e-300) {
            return new_est;
        }
        est = new_est;
    }
    est
}

fn mat_vec(a: &Array2<f64>, v: &[f64]) -> Vec<f64> {
    a.rows()
        .into_iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}
