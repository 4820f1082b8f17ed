//! Reference integration grids, well resolved against each kernel's
//! difficulty: Chebyshev-angle composite Gauss panels on the interval
//! (quarter-wavelength sizing for oscillation, geometric grading into
//! singular endpoints), and for the sphere either a high-exactness product
//! rule or, for singular kernels, a rotated frame with the singularity at
//! the pole and a geometrically graded polar cap.
//!
//! These grids define the `L^p` norms the experiment tables report; a
//! doubling self-check guards the resolution choices.

use crate::moments::{rotate, rotation_to, KernelDescriptor};
use crate::orthopoly::{Point, RegionKind, SphericalPoint};
use crate::quadrature::{gauss_legendre, sphere_product_rule};
use crate::Result;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Geometric grading ratio into each singularity.
const GRADE_RATIO: f64 = 0.15;
/// Number of graded levels.
const GRADE_LEVELS: usize = 40;
/// Gauss order per panel.
const PANEL_ORDER: usize = 16;
/// Extra frequency margin covering the smooth factor `f`.
const SMOOTH_MARGIN: usize = 128;

/// A fixed reference grid with kernel values cached at the nodes.
#[derive(Debug, Clone)]
pub struct ReferenceGrid {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub kernel_values: Vec<Complex64>,
}

impl ReferenceGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates a real integrand given by its node values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let prods: Vec<f64> = self
            .weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .collect();
        crate::scalar::pairwise_sum(&prods)
    }
}

/// Builds the reference grid for a kernel, resolving polynomial content up
/// to `max_poly_degree`. `oversample >= 1` scales the density; doubling it
/// is the self-check knob.
pub fn build(
    kernel: &KernelDescriptor,
    max_poly_degree: usize,
    oversample: usize,
) -> Result<ReferenceGrid> {
    let os = oversample.max(1);
    match kernel.region_kind() {
        RegionKind::Interval => interval_grid(kernel, max_poly_degree, os),
        RegionKind::Sphere => sphere_grid(kernel, max_poly_degree, os),
    }
}

/// Panel edges in the Chebyshev angle for the interval: uniform panels at
/// quarter-wavelength of the combined frequency, with geometric caps into
/// the singular ends.
fn interval_theta_edges(kernel: &KernelDescriptor, max_poly_degree: usize, os: usize) -> Vec<f64> {
    let kappa_freq = match kernel {
        KernelDescriptor::IntervalOscillatory { kappa } => *kappa,
        _ => 0.0,
    };
    let freq = 2.0 * max_poly_degree as f64 + kappa_freq + SMOOTH_MARGIN as f64;
    let n_uniform = ((freq / 4.0).ceil() as usize).max(8) * os;
    let mut edges: Vec<f64> = (0..=n_uniform)
        .map(|k| PI * k as f64 / n_uniform as f64)
        .collect();
    // x = 1 is theta = 0; x = -1 is theta = pi
    let singular_left = kernel
        .singular_points()
        .iter()
        .any(|p| matches!(p, Point::Interval(x) if *x > 0.0));
    let singular_right = kernel
        .singular_points()
        .iter()
        .any(|p| matches!(p, Point::Interval(x) if *x < 0.0));
    let h = PI / n_uniform as f64;
    if singular_left {
        let mut cap: Vec<f64> = (1..=GRADE_LEVELS)
            .map(|k| h * GRADE_RATIO.powi(k as i32))
            .collect();
        cap.reverse();
        let mut new_edges = vec![0.0];
        new_edges.extend(cap);
        new_edges.extend(edges.iter().skip(1).copied());
        edges = new_edges;
    }
    if singular_right {
        let before = edges.len();
        edges.truncate(before - 1);
        edges.extend((1..=GRADE_LEVELS).map(|k| PI - h * GRADE_RATIO.powi(k as i32)));
        edges.push(PI);
    }
    edges
}

/// Kernel value from the Chebyshev angle. Half-angle forms keep the
/// endpoint factors accurate where `1 - cos(theta)` would cancel.
fn interval_kernel_at_theta(kernel: &KernelDescriptor, theta: f64) -> Complex64 {
    match kernel {
        KernelDescriptor::IntervalAlgebraicLeft { a } => {
            let base = 2.0 * (0.5 * theta).cos().powi(2);
            Complex64::new(base.powf(*a), 0.0)
        }
        KernelDescriptor::IntervalAlgebraicRight { a } => {
            let base = 2.0 * (0.5 * theta).sin().powi(2);
            Complex64::new(base.powf(*a), 0.0)
        }
        KernelDescriptor::IntervalChebyshevWeight => Complex64::new(theta.sin().recip(), 0.0),
        other => other.eval(&Point::Interval(theta.cos())),
    }
}

fn interval_grid(
    kernel: &KernelDescriptor,
    max_poly_degree: usize,
    os: usize,
) -> Result<ReferenceGrid> {
    let edges = interval_theta_edges(kernel, max_poly_degree, os);
    let gl = gauss_legendre(PANEL_ORDER)?;
    let gl_nodes = gl.interval_nodes();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut kernel_values = Vec::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (t, gw) in gl_nodes.iter().zip(&gl.weights) {
            let theta = mid + half * t;
            // d omega = dx = sin(theta) d theta
            points.push(Point::Interval(theta.cos()));
            weights.push(half * gw * theta.sin());
            kernel_values.push(interval_kernel_at_theta(kernel, theta));
        }
    }
    Ok(ReferenceGrid {
        points,
        weights,
        kernel_values,
    })
}

fn sphere_grid(
    kernel: &KernelDescriptor,
    max_poly_degree: usize,
    os: usize,
) -> Result<ReferenceGrid> {
    let zonal = matches!(
        kernel,
        KernelDescriptor::SphereAlgebraic { .. }
            | KernelDescriptor::SphereLog { .. }
            | KernelDescriptor::SphereDoubleAlgebraic { .. }
    );
    if !zonal {
        let kdeg = match kernel {
            KernelDescriptor::SphereHarmonic { lbar, .. } => *lbar,
            _ => 0,
        };
        let t = (2 * max_poly_degree + 2 * kdeg + SMOOTH_MARGIN) * os;
        let rule = sphere_product_rule(t);
        let kernel_values = rule.points.iter().map(|p| kernel.eval(p)).collect();
        return Ok(ReferenceGrid {
            points: rule.points,
            weights: rule.weights,
            kernel_values,
        });
    }

    // rotated frame: the kernel's zonal axis sits at the poles, longitude
    // is an equispaced (spectrally exact) trapezoid, the polar angle gets
    // quarter-wavelength panels plus graded caps into the singular pole(s)
    let (xi, north_singular, south_singular) = match kernel {
        KernelDescriptor::SphereAlgebraic { xi, .. } => (*xi, true, false),
        KernelDescriptor::SphereLog { xi } => (*xi, true, false),
        KernelDescriptor::SphereDoubleAlgebraic { xi, .. } => (*xi, true, true),
        _ => unreachable!("smooth kernels use the product-rule branch"),
    };
    let rot = rotation_to(&xi);
    let freq = 2 * max_poly_degree + SMOOTH_MARGIN;
    let n_theta = (freq / 4 + 8) * os;
    let n_phi = (freq + 16) * os;
    let mut edges: Vec<f64> = (0..=n_theta)
        .map(|k| PI * k as f64 / n_theta as f64)
        .collect();
    let h = PI / n_theta as f64;
    if north_singular {
        let mut cap: Vec<f64> = (1..=GRADE_LEVELS)
            .map(|k| h * GRADE_RATIO.powi(k as i32))
            .collect();
        cap.reverse();
        let mut new_edges = vec![0.0];
        new_edges.extend(cap);
        new_edges.extend(edges.iter().skip(1).copied());
        edges = new_edges;
    }
    if south_singular {
        let before = edges.len();
        edges.truncate(before - 1);
        edges.extend((1..=GRADE_LEVELS).map(|k| PI - h * GRADE_RATIO.powi(k as i32)));
        edges.push(PI);
    }
    let gl = gauss_legendre(PANEL_ORDER)?;
    let gl_nodes = gl.interval_nodes();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut kernel_values = Vec::new();
    let wphi = 2.0 * PI / n_phi as f64;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (t, gw) in gl_nodes.iter().zip(&gl.weights) {
            let theta = mid + half * t;
            let (s, u) = (theta.sin(), theta.cos());
            let w_theta = half * gw * s;
            let kv = zonal_kernel_at_polar(kernel, theta);
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                let local = SphericalPoint {
                    x: s * phi.cos(),
                    y: s * phi.sin(),
                    z: u,
                };
                points.push(Point::Sphere(rotate(&rot, &local)));
                weights.push(w_theta * wphi);
                kernel_values.push(kv);
            }
        }
    }
    Ok(ReferenceGrid {
        points,
        weights,
        kernel_values,
    })
}

/// Zonal singular-kernel value at polar angle `theta` from the singular
/// axis: `|xi - x| = 2 sin(theta/2)` and `|xi + x| = 2 cos(theta/2)`,
/// stable arbitrarily close to the poles.
fn zonal_kernel_at_polar(kernel: &KernelDescriptor, theta: f64) -> Complex64 {
    let near = 2.0 * (0.5 * theta).sin();
    let far = 2.0 * (0.5 * theta).cos();
    match kernel {
        KernelDescriptor::SphereAlgebraic { nu, .. } => Complex64::new(near.powf(*nu), 0.0),
        KernelDescriptor::SphereLog { .. } => Complex64::new(near.ln(), 0.0),
        KernelDescriptor::SphereDoubleAlgebraic { nu1, nu2, .. } => {
            Complex64::new(near.powf(*nu1) * far.powf(*nu2), 0.0)
        }
        _ => unreachable!("smooth kernels use the product-rule branch"),
    }
}
