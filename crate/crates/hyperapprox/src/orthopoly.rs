//! Orthonormal bases on the interval and the sphere.
//!
//! Interval `[-1, 1]` with plain Lebesgue measure: normalized Legendre
//! polynomials `Pt_l = sqrt((2l+1)/2) P_l`, so that
//! `int Pt_l Pt_l' dx = delta_{ll'}`. Chebyshev polynomials `T_r` serve as
//! the auxiliary (non-orthonormal) expansion family.
//!
//! Unit sphere with surface measure: real orthonormal spherical harmonics
//! `Y_{l,k}`, `|k| <= l`, built from fully normalized associated Legendre
//! functions with the normalization folded into the recurrence.

use crate::{Error, Result};

const SQRT_4PI: f64 = 3.5449077018110318; // sqrt(4 pi)

/// Domain tolerance used by the 1-D evaluators.
const INTERVAL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Interval,
    Sphere,
}

/// Integration region with its total measure `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub kind: RegionKind,
    pub measure_total: f64,
}

impl Region {
    pub fn interval() -> Self {
        Region {
            kind: RegionKind::Interval,
            measure_total: 2.0,
        }
    }

    pub fn sphere() -> Self {
        Region {
            kind: RegionKind::Sphere,
            measure_total: 4.0 * std::f64::consts::PI,
        }
    }
}

/// Point on the unit sphere, Cartesian coordinates with unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SphericalPoint {
    /// Accepts a point within `1e-12` of the unit sphere.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        let defect = (r2 - 1.0).abs();
        if defect > 1e-12 {
            return Err(Error::PointOffSphere {
                defect,
                tol: 1e-12,
            });
        }
        Ok(SphericalPoint { x, y, z })
    }

    /// Renormalizes a point whose radius is within `tol` of 1.
    pub fn normalized(x: f64, y: f64, z: f64, tol: f64) -> Result<Self> {
        let r = (x * x + y * y + z * z).sqrt();
        if (r - 1.0).abs() > tol {
            return Err(Error::PointOffSphere {
                defect: (r - 1.0).abs(),
                tol,
            });
        }
        Ok(SphericalPoint {
            x: x / r,
            y: y / r,
            z: z / r,
        })
    }

    pub fn dot(&self, other: &SphericalPoint) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Euclidean distance `|p - q| = sqrt(2 (1 - p.q))` between sphere points.
    pub fn dist(&self, other: &SphericalPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn antipode(&self) -> SphericalPoint {
        SphericalPoint {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// Evaluation point in either region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Interval(f64),
    Sphere(SphericalPoint),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFamily {
    LegendreNormalized,
    Chebyshev,
    SphericalHarmonic,
}

/// Indexed basis family of bounded degree on a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSet {
    pub region: Region,
    pub family: BasisFamily,
    pub max_degree: usize,
}

impl BasisSet {
    pub fn legendre(max_degree: usize) -> Self {
        BasisSet {
            region: Region::interval(),
            family: BasisFamily::LegendreNormalized,
            max_degree,
        }
    }

    pub fn chebyshev(max_degree: usize) -> Self {
        BasisSet {
            region: Region::interval(),
            family: BasisFamily::Chebyshev,
            max_degree,
        }
    }

    pub fn spherical(max_degree: usize) -> Self {
        BasisSet {
            region: Region::sphere(),
            family: BasisFamily::SphericalHarmonic,
            max_degree,
        }
    }

    /// Number of indexed functions: `n+1` on the interval, `(n+1)^2` on the
    /// sphere.
    pub fn dim(&self) -> usize {
        match self.family {
            BasisFamily::LegendreNormalized | BasisFamily::Chebyshev => self.max_degree + 1,
            BasisFamily::SphericalHarmonic => (self.max_degree + 1) * (self.max_degree + 1),
        }
    }

    /// 1-based flat index. Interval: `degree + 1`. Sphere: degree-major with
    /// `k` running from `-l` to `l`, i.e. `l^2 + l + k + 1`.
    pub fn flat_index(&self, degree: usize, order: i64) -> Result<usize> {
        match self.family {
            BasisFamily::LegendreNormalized | BasisFamily::Chebyshev => {
                if order != 0 {
                    return Err(Error::Index(format!(
                        "interval family has no order (got {order})"
                    )));
                }
                if degree > self.max_degree {
                    return Err(Error::Index(format!(
                        "degree {degree} exceeds max_degree {}",
                        self.max_degree
                    )));
                }
                Ok(degree + 1)
            }
            BasisFamily::SphericalHarmonic => {
                if degree > self.max_degree || order.unsigned_abs() as usize > degree {
                    return Err(Error::Index(format!(
                        "harmonic index (l, k) = ({degree}, {order}) out of range for max degree {}",
                        self.max_degree
                    )));
                }
                let l = degree as i64;
                Ok((l * l + l + order + 1) as usize)
            }
        }
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn degree_order(&self, flat: usize) -> Result<(usize, i64)> {
        if flat == 0 || flat > self.dim() {
            return Err(Error::Index(format!(
                "flat index {flat} out of range 1..={}",
                self.dim()
            )));
        }
        match self.family {
            BasisFamily::LegendreNormalized | BasisFamily::Chebyshev => Ok((flat - 1, 0)),
            BasisFamily::SphericalHarmonic => {
                let l = ((flat - 1) as f64).sqrt().floor() as usize;
                // guard against rounding at perfect squares
                let l = if (l + 1) * (l + 1) <= flat - 1 { l + 1 } else { l };
                let k = (flat - 1) as i64 - (l * l + l) as i64;
                Ok((l, k))
            }
        }
    }

    /// Evaluates every basis function at `p`, filling `out` (length
    /// [`dim`](Self::dim)) in flat order.
    pub fn eval_row(&self, p: &Point, out: &mut [f64]) -> Result<()> {
        assert_eq!(out.len(), self.dim(), "output row length mismatch");
        match (self.family, p) {
            (BasisFamily::LegendreNormalized, Point::Interval(x)) => {
                legendre_normalized_row(self.max_degree, *x, out)
            }
            (BasisFamily::Chebyshev, Point::Interval(x)) => {
                chebyshev_row(self.max_degree, *x, out)
            }
            (BasisFamily::SphericalHarmonic, Point::Sphere(q)) => {
                sphere_row(self.max_degree, q, out);
                Ok(())
            }
            _ => Err(Error::KernelRegionMismatch {
                op: "BasisSet::eval_row",
            }),
        }
    }

    pub fn eval_row_vec(&self, p: &Point) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.eval_row(p, &mut out)?;
        Ok(out)
    }
}

fn check_interval(x: f64) -> Result<()> {
    if x.abs() > 1.0 + INTERVAL_SLACK || !x.is_finite() {
        return Err(Error::Domain {
            name: "x",
            value: x,
            constraint: "|x| <= 1",
        });
    }
    Ok(())
}

/// Raw Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn eval_legendre_raw(l: usize, x: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..l {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_l(x)` and `P_l'(x)` in one recurrence pass.
pub fn legendre_with_derivative(l: usize, x: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..l {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        let sign = if x > 0.0 || l % 2 == 1 { 1.0 } else { -1.0 };
        sign * (l * (l + 1)) as f64 / 2.0
    } else {
        l as f64 * (x * cur - prev) / (x * x - 1.0)
    };
    (cur, dp)
}

/// Normalized Legendre polynomial `Pt_l(x) = sqrt((2l+1)/2) P_l(x)`,
/// orthonormal on `[-1, 1]` with unit weight.
pub fn eval_legendre_normalized(l: usize, x: f64) -> Result<f64> {
    check_interval(x)?;
    Ok(((2 * l + 1) as f64 / 2.0).sqrt() * eval_legendre_raw(l, x))
}

/// Chebyshev polynomial `T_r(x) = cos(r arccos x)` via the recurrence
/// `T_{r+1} = 2 x T_r - T_{r-1}`.
pub fn eval_chebyshev(r: usize, x: f64) -> Result<f64> {
    check_interval(x)?;
    if r == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut cur = x;
    for _ in 1..r {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn legendre_normalized_row(max_degree: usize, x: f64, out: &mut [f64]) -> Result<()> {
    check_interval(x)?;
    out[0] = std::f64::consts::FRAC_1_SQRT_2;
    if max_degree == 0 {
        return Ok(());
    }
    out[1] = (1.5_f64).sqrt() * x;
    let mut prev = 1.0; // raw P_{k-1}
    let mut cur = x; // raw P_k
    for k in 1..max_degree {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
        out[k + 1] = ((2 * (k + 1) + 1) as f64 / 2.0).sqrt() * cur;
    }
    Ok(())
}

fn chebyshev_row(max_degree: usize, x: f64, out: &mut [f64]) -> Result<()> {
    check_interval(x)?;
    out[0] = 1.0;
    if max_degree == 0 {
        return Ok(());
    }
    out[1] = x;
    for r in 2..=max_degree {
        out[r] = 2.0 * x * out[r - 1] - out[r - 2];
    }
    Ok(())
}

/// Real orthonormal spherical harmonic `Y_{l,k}` at a sphere point.
///
/// Longitude convention: `k > 0` pairs with `cos(k phi)`, `k < 0` with
/// `sin(|k| phi)`; no Condon-Shortley phase. All quadratic functionals
/// (Gram matrices, addition-theorem sums) are independent of this choice.
pub fn eval_spherical_harmonic(l: usize, k: i64, p: &SphericalPoint) -> Result<f64> {
    if k.unsigned_abs() as usize > l {
        return Err(Error::Index(format!("|k| = {} exceeds l = {l}", k.abs())));
    }
    let m = k.unsigned_abs() as usize;
    let z = p.z;
    let s = (p.x * p.x + p.y * p.y).sqrt();

    // climb P-bar_m^m -> P-bar_l^m with normalization folded in
    let mut pmm = 1.0 / SQRT_4PI;
    for mm in 1..=m {
        pmm *= ((2 * mm + 1) as f64 / (2 * mm) as f64).sqrt() * s;
    }
    let mut val = pmm;
    if l > m {
        let mut pm1 = pmm; // P-bar_{l-1}^m
        let mut pl = ((2 * m + 3) as f64).sqrt() * z * pmm; // P-bar_{m+1}^m
        for ll in (m + 2)..=l {
            let a = a_coeff(ll, m);
            let next = a * (z * pl - pm1 / a_coeff(ll - 1, m));
            pm1 = pl;
            pl = next;
        }
        val = if l == m { pmm } else { pl };
    }

    if k == 0 {
        return Ok(val);
    }
    // cos(m phi), sin(m phi) from the point's Cartesian coordinates
    let (c1, s1) = if s > 0.0 {
        (p.x / s, p.y / s)
    } else {
        (1.0, 0.0) // at the poles the |k| > 0 part vanishes through pmm = 0
    };
    let (mut c, mut sn) = (c1, s1);
    for _ in 1..m {
        let cn = c * c1 - sn * s1;
        sn = sn * c1 + c * s1;
        c = cn;
    }
    let lon = if k > 0 { c } else { sn };
    Ok(std::f64::consts::SQRT_2 * val * lon)
}

fn a_coeff(l: usize, m: usize) -> f64 {
    ((4 * l * l - 1) as f64 / (l * l - m * m) as f64).sqrt()
}

/// Fills `out` with all `Y_{l,k}`, `l <= max_degree`, in flat order.
///
/// Cost is O(dim) per point; this is the hot path for assembling basis
/// matrices over quadrature grids.
pub fn sphere_row(max_degree: usize, p: &SphericalPoint, out: &mut [f64]) {
    let n = max_degree;
    debug_assert_eq!(out.len(), (n + 1) * (n + 1));
    let z = p.z;
    let s = (p.x * p.x + p.y * p.y).sqrt();
    let (c1, s1) = if s > 0.0 { (p.x / s, p.y / s) } else { (1.0, 0.0) };

    // longitude factors sqrt(2) cos(m phi), sqrt(2) sin(m phi)
    let mut cosm = vec![0.0; n + 1];
    let mut sinm = vec![0.0; n + 1];
    cosm[0] = 1.0;
    for m in 1..=n {
        cosm[m] = cosm[m - 1] * c1 - sinm[m - 1] * s1;
        sinm[m] = sinm[m - 1] * c1 + cosm[m - 1] * s1;
    }

    let flat = |l: usize, k: i64| -> usize { ((l * l + l) as i64 + k) as usize };

    let mut pmm = 1.0 / SQRT_4PI;
    for m in 0..=n {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        let sq2 = std::f64::consts::SQRT_2;
        // l = m
        let write = |out: &mut [f64], l: usize, v: f64| {
            if m == 0 {
                out[flat(l, 0)] = v;
            } else {
                out[flat(l, m as i64)] = sq2 * v * cosm[m];
                out[flat(l, -(m as i64))] = sq2 * v * sinm[m];
            }
        };
        write(out, m, pmm);
        if m == n {
            break;
        }
        let mut pprev = pmm;
        let mut pcur = ((2 * m + 3) as f64).sqrt() * z * pmm;
        write(out, m + 1, pcur);
        for l in (m + 2)..=n {
            let a = a_coeff(l, m);
            let next = a * (z * pcur - pprev / a_coeff(l - 1, m));
            pprev = pcur;
            pcur = next;
            write(out, l, pcur);
        }
    }
}

/// Clenshaw evaluation of `sum_l c_l Pt_l(x)` over the normalized Legendre
/// basis; the independent second path used to check expansion evaluation.
pub fn clenshaw_legendre_normalized<T: crate::Scalar>(coeffs: &[T], x: f64) -> T {
    // Pt_{k+1} = alpha_k x Pt_k + beta_k Pt_{k-1}
    let alpha = |k: usize| (((2 * k + 1) * (2 * k + 3)) as f64).sqrt() / (k + 1) as f64;
    let beta = |k: usize| {
        -(k as f64 / (k + 1) as f64) * ((2 * k + 3) as f64 / (2 * k - 1) as f64).sqrt()
    };
    let n = coeffs.len();
    if n == 0 {
        return T::ZERO;
    }
    let mut b1 = T::ZERO;
    let mut b2 = T::ZERO;
    for k in (0..n).rev() {
        let mut b = coeffs[k] + b1.scale(alpha(k) * x);
        if k + 1 < n && k + 1 >= 1 {
            b += b2.scale(beta(k + 1));
        }
        b2 = b1;
        b1 = b;
    }
    // Pt_1(x) = alpha_0 x Pt_0(x), so the correction term vanishes
    b1.scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Clenshaw evaluation of `sum_r c_r T_r(x)`.
pub fn clenshaw_chebyshev<T: crate::Scalar>(coeffs: &[T], x: f64) -> T {
    let n = coeffs.len();
    if n == 0 {
        return T::ZERO;
    }
    if n == 1 {
        return coeffs[0];
    }
    let mut b1 = T::ZERO;
    let mut b2 = T::ZERO;
    for k in (1..n).rev() {
        let b = coeffs[k] + b1.scale(2.0 * x) - b2;
        b2 = b1;
        b1 = b;
    }
    coeffs[0] + b1.scale(x) - b2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn legendre_normalized_constants() {
        // degree 0 is 1/sqrt(2) everywhere
        for &x in &[-1.0, -0.3, 0.0, 0.9, 1.0] {
            assert!((eval_legendre_normalized(0, x).unwrap() - 0.7071067811865476).abs() < 1e-15);
        }
        // Pt_1(1) = sqrt(3/2)
        assert!((eval_legendre_normalized(1, 1.0).unwrap() - 1.224744871391589).abs() < 1e-15);
    }

    #[test]
    fn legendre_normalized_degree_five_vs_recurrence_oracle() {
        // independent oracle: raw recurrence written out separately
        let x = 0.3;
        let (mut p0, mut p1) = (1.0, x);
        for k in 1..5 {
            let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
            p0 = p1;
            p1 = p2;
        }
        let expect = (11.0_f64 / 2.0).sqrt() * p1;
        assert!((eval_legendre_normalized(5, 0.3).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn legendre_low_degree_closed_forms() {
        for &x in &[-0.95f64, -0.4, 0.1, 0.77] {
            let scale = |l: usize| ((2 * l + 1) as f64 / 2.0).sqrt();
            let closed = [
                1.0,
                x,
                0.5 * (3.0 * x * x - 1.0),
                0.5 * (5.0 * x * x * x - 3.0 * x),
                0.125 * (35.0 * x.powi(4) - 30.0 * x * x + 3.0),
            ];
            for (l, c) in closed.iter().enumerate() {
                let got = eval_legendre_normalized(l, x).unwrap();
                assert!((got - scale(l) * c).abs() < 1e-12, "l={l} x={x}");
            }
        }
    }

    #[test]
    fn chebyshev_values() {
        assert_eq!(eval_chebyshev(0, 0.7).unwrap(), 1.0);
        assert!((eval_chebyshev(2, 0.5).unwrap() + 0.5).abs() < 1e-15);
        let expect = (7.0 * (-0.3_f64).acos()).cos();
        assert!((eval_chebyshev(7, -0.3).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn domain_error_outside_interval() {
        assert!(eval_chebyshev(3, 1.1).is_err());
        assert!(eval_legendre_normalized(3, -1.0 - 1e-9).is_err());
    }

    #[test]
    fn harmonic_constant_is_inverse_sqrt_4pi() {
        let p = SphericalPoint::new(0.6, 0.8, 0.0).unwrap();
        let y = eval_spherical_harmonic(0, 0, &p).unwrap();
        assert!((y - 0.28209479177387814).abs() < 1e-15);
    }

    #[test]
    fn addition_theorem_at_degree_12() {
        let p = SphericalPoint::new(0.6, 0.8, 0.0).unwrap();
        let l = 12;
        let mut sum = 0.0;
        for k in -(l as i64)..=(l as i64) {
            let y = eval_spherical_harmonic(l, k, &p).unwrap();
            sum += y * y;
        }
        let expect = (2 * l + 1) as f64 / (4.0 * std::f64::consts::PI);
        assert!((sum - expect).abs() < 1e-12, "sum {sum} expect {expect}");
    }

    #[test]
    fn sphere_row_matches_single_eval() {
        let p = SphericalPoint::normalized(0.3, -1.2, 0.8, 1.0).unwrap();
        let n = 9;
        let basis = BasisSet::spherical(n);
        let row = basis.eval_row_vec(&Point::Sphere(p)).unwrap();
        for l in 0..=n {
            for k in -(l as i64)..=(l as i64) {
                let idx = basis.flat_index(l, k).unwrap();
                let single = eval_spherical_harmonic(l, k, &p).unwrap();
                assert!(
                    (row[idx - 1] - single).abs() < 1e-13,
                    "l={l} k={k}: {} vs {}",
                    row[idx - 1],
                    single
                );
            }
        }
    }

    #[test]
    fn harmonic_index_error() {
        let p = SphericalPoint::new(0.0, 0.0, 1.0).unwrap();
        assert!(eval_spherical_harmonic(3, 4, &p).is_err());
    }

    #[test]
    fn row_at_pole_is_finite() {
        let p = SphericalPoint::new(0.0, 0.0, 1.0).unwrap();
        let basis = BasisSet::spherical(20);
        let row = basis.eval_row_vec(&Point::Sphere(p)).unwrap();
        assert!(row.iter().all(|v| v.is_finite()));
        // zonal values only: Y_{l,k}(pole) = 0 for k != 0
        for l in 0..=20usize {
            for k in -(l as i64)..=(l as i64) {
                let idx = basis.flat_index(l, k).unwrap() - 1;
                if k != 0 {
                    assert_eq!(row[idx], 0.0);
                }
            }
        }
    }

    #[test]
    fn flat_index_examples() {
        let basis = BasisSet::spherical(20);
        assert_eq!(basis.flat_index(0, 0).unwrap(), 1);
        assert_eq!(basis.flat_index(1, -1).unwrap(), 2);
        // count of preceding (l, k) pairs: degrees 0..11 hold 144 entries,
        // then k runs -12..=8, i.e. 21 more
        let mut count = 0usize;
        for l in 0..=12usize {
            for k in -(l as i64)..=(l as i64) {
                count += 1;
                if l == 12 && k == 8 {
                    break;
                }
            }
        }
        assert_eq!(count, 165);
        assert_eq!(basis.flat_index(12, 8).unwrap(), count);
    }

    #[test]
    fn clenshaw_matches_direct_row_dot() {
        let basis = BasisSet::legendre(14);
        let coeffs: Vec<f64> = (0..15).map(|k| ((k * 37 + 11) % 17) as f64 / 7.0 - 1.0).collect();
        for &x in &[-0.99, -0.5, 0.03, 0.72, 1.0] {
            let row = basis.eval_row_vec(&Point::Interval(x)).unwrap();
            let direct: f64 = row.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
            let clen = clenshaw_legendre_normalized(&coeffs, x);
            assert!((direct - clen).abs() < 1e-11, "x={x}: {direct} vs {clen}");
        }
    }

    #[test]
    fn clenshaw_chebyshev_matches_row() {
        let basis = BasisSet::chebyshev(10);
        let coeffs: Vec<f64> = (0..11).map(|k| (k as f64 * 0.7).sin()).collect();
        for &x in &[-0.9, 0.0, 0.35, 0.99] {
            let row = basis.eval_row_vec(&Point::Interval(x)).unwrap();
            let direct: f64 = row.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
            let clen = clenshaw_chebyshev(&coeffs, x);
            assert!((direct - clen).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn chebyshev_recurrence_matches_cos_form(r in 0usize..64, x in -1.0f64..1.0) {
            let rec = eval_chebyshev(r, x).unwrap();
            let trig = ((r as f64) * x.acos()).cos();
            prop_assert!((rec - trig).abs() < 1e-11);
        }

        #[test]
        fn sphere_flat_index_round_trips(l in 0usize..=60, frac in 0.0f64..1.0) {
            let k = -(l as i64) + ((frac * (2 * l + 1) as f64).floor() as i64).min(2 * l as i64);
            let basis = BasisSet::spherical(60);
            let flat = basis.flat_index(l, k).unwrap();
            let (l2, k2) = basis.degree_order(flat).unwrap();
            prop_assert_eq!((l, k), (l2, k2));
        }

        #[test]
        fn interval_flat_index_round_trips(d in 0usize..=60) {
            let basis = BasisSet::legendre(60);
            let flat = basis.flat_index(d, 0).unwrap();
            prop_assert_eq!(basis.degree_order(flat).unwrap(), (d, 0));
        }
    }
}
