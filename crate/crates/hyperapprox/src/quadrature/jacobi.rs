//! Gauss-Jacobi rules for the weight `(1-x)^a (1+x)^b` on `[-1, 1]`,
//! computed by the Golub-Welsch method: eigenvalues of the symmetric
//! tridiagonal Jacobi matrix give the nodes, and the squared first
//! eigenvector components scaled by the zeroth weight moment give the
//! weights. Used internally for Jacobi-weighted Legendre integrals.

use crate::moments::special;
use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Jacobi rule with exponents
/// `a, b > -1`. Exact for polynomial factors of degree up to `2n - 1`.
pub(crate) fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || a <= -1.0 || b <= -1.0 {
        return Err(Error::Domain {
            name: "gauss_jacobi",
            value: a.min(b),
            constraint: "n >= 1 and a, b > -1",
        });
    }
    let ab = a + b;
    // total weight: int (1-x)^a (1+x)^b dx = 2^(a+b+1) B(a+1, b+1)
    let mu0 = 2f64.powf(ab + 1.0) * special::beta_fn(a + 1.0, b + 1.0);

    // recurrence coefficients of the monic Jacobi polynomials
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n]; // off[k] couples rows k-1 and k, off[0] unused
    diag[0] = (b - a) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let den = 2.0 * kf + ab;
        diag[k] = (b * b - a * a) / (den * (den + 2.0));
        let bk = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab)
                / (den * den * (den + 1.0) * (den - 1.0))
        };
        off[k] = bk.sqrt();
    }

    let mut first = vec![0.0; n];
    first[0] = 1.0;
    tridiag_ql(&mut diag, &mut off, &mut first)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let nodes: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let weights: Vec<f64> = order.iter().map(|&i| mu0 * first[i] * first[i]).collect();
    Ok((nodes, weights))
}

/// QL with implicit shifts for a symmetric tridiagonal matrix, tracking
/// only the first row of the accumulated eigenvector matrix in `z`.
/// On exit `d` holds eigenvalues (unsorted) and `z` the first components.
fn tridiag_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    // shift couplings so e[i] links d[i] and d[i+1]
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NewtonNoConvergence { m: n, node: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let bb = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
