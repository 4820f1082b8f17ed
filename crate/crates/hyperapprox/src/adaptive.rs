//! Adaptive 1-D quadrature on embedded Gauss(7)/Kronrod(15) pairs with
//! bisection of the worst panel. Real- and complex-valued integrands share
//! the engine through [`Scalar`].

use crate::scalar::Scalar;
use crate::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 15-point Kronrod abscissae (positive half, descending).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

// Kronrod weights matching XGK.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Embedded 7-point Gauss weights (for XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct PanelEstimate<T> {
    pub value: T,
    pub error: f64,
    pub resabs: f64,
}

/// One Gauss-Kronrod pass over `[a, b]`.
pub fn gk15<T: Scalar, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> PanelEstimate<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc.scale(WGK[7]);
    let mut resg = fc.scale(WG[3]);
    let mut resabs = Scalar::abs(fc) * WGK[7];
    let mut fv = [T::ZERO; 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[13 - j] = f2;
        let sum = f1 + f2;
        resk += sum.scale(WGK[j]);
        resabs += (Scalar::abs(f1) + Scalar::abs(f2)) * WGK[j];
        if j % 2 == 1 {
            resg += sum.scale(WG[j / 2]);
        }
    }
    let mean = resk.scale(0.5);
    let mut resasc = Scalar::abs(fc - mean) * WGK[7];
    for j in 0..7 {
        resasc += (Scalar::abs(fv[j] - mean) + Scalar::abs(fv[13 - j] - mean)) * WGK[j];
    }
    resasc *= half.abs();
    resabs *= half.abs();
    let raw_err = Scalar::abs(resk - resg) * half.abs();
    PanelEstimate {
        value: resk.scale(half),
        error: rescale_error(raw_err, resabs, resasc),
        resabs,
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut scaled = err;
    if resasc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / resasc).powf(1.5);
        scaled = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * resabs);
    }
    scaled
}

struct Panel<T> {
    a: f64,
    b: f64,
    est: PanelEstimate<T>,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Adaptive integration over `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate<T: Scalar, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<T> {
    integrate_panels(f, &[a, b], abs_tol, max_evals)
}

/// Adaptive integration starting from a given panel decomposition; the
/// breakpoints let callers pre-split around known oscillation scales or
/// singular endpoints.
pub fn integrate_panels<T: Scalar, F: Fn(f64) -> T>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    max_evals: usize,
) -> Result<T> {
    assert!(breakpoints.len() >= 2);
    let mut heap: BinaryHeap<Panel<T>> = BinaryHeap::new();
    let mut evals = 0usize;
    let mut total_err = 0.0;
    let mut total_abs = 0.0;
    for w in breakpoints.windows(2) {
        let est = gk15(&f, w[0], w[1]);
        evals += 15;
        total_err += est.error;
        total_abs += est.resabs;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            est,
        });
    }
    loop {
        // accept at the rounding floor: the per-panel estimates are already
        // floored at 50 eps resabs, so their sum cannot go below this
        let floor = 100.0 * f64::EPSILON * total_abs;
        if total_err <= abs_tol.max(floor) {
            break;
        }
        if evals >= max_evals {
            return Err(Error::AdaptiveNoConvergence {
                tol: abs_tol,
                estimate: total_err,
                evals,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel collapsed to machine width; keep its estimate
            total_err -= worst.est.error;
            total_abs -= worst.est.resabs;
            let mut est = worst.est;
            est.error = 0.0;
            heap.push(Panel {
                a: worst.a,
                b: worst.b,
                est,
            });
            continue;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        evals += 30;
        total_err += left.error + right.error - worst.est.error;
        total_abs += left.resabs + right.resabs - worst.est.resabs;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            est: right,
        });
    }
    // deterministic summation: order panels by left endpoint
    let mut panels: Vec<Panel<T>> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let values: Vec<T> = panels.iter().map(|p| p.est.value).collect();
    Ok(crate::scalar::pairwise_sum(&values))
}
