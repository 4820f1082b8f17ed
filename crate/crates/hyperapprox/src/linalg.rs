//! Small deterministic parallel dense kernels shared by the assembly and
//! evaluation paths. Parallel work is split over fixed-size blocks and the
//! results are written to disjoint outputs or merged in block order, so a
//! rerun produces bitwise-identical numbers regardless of thread count.

use crate::orthopoly::{BasisSet, Point};
use crate::scalar::{pairwise_sum, Scalar};
use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2, ArrayViewMut2, Axis};
use rayon::prelude::*;

/// Row-block parallel `a * b`.
pub fn par_matmul<T: Scalar>(a: ArrayView2<T>, b: ArrayView2<T>) -> Array2<T> {
    let m = a.nrows();
    let n = b.ncols();
    assert_eq!(a.ncols(), b.nrows());
    let mut out = Array2::<T>::zeros((m, n));
    if m == 0 || n == 0 {
        return out;
    }
    let chunk = block_rows(m);
    let views: Vec<(usize, ArrayViewMut2<T>)> = out
        .axis_chunks_iter_mut(Axis(0), chunk)
        .enumerate()
        .collect();
    views.into_par_iter().for_each(|(i, mut blk)| {
        let r0 = i * chunk;
        let a_blk = a.slice(s![r0..r0 + blk.nrows(), ..]);
        general_mat_mul(T::ONE, &a_blk, &b, T::ZERO, &mut blk);
    });
    out
}

fn block_rows(m: usize) -> usize {
    let threads = rayon::current_num_threads().max(1);
    (m / (4 * threads)).max(64).min(m)
}

/// `B^T diag(g) B` accumulated over fixed row blocks of `B`, then mirrored
/// so the result is exactly symmetric entry-by-entry.
pub fn weighted_gram<T: Scalar>(b: &Array2<T>, g: &[T]) -> Array2<T> {
    let m = b.nrows();
    let d = b.ncols();
    assert_eq!(g.len(), m);
    let mut acc = Array2::<T>::zeros((d, d));
    let block = 8192usize;
    let mut r0 = 0;
    while r0 < m {
        let r1 = (r0 + block).min(m);
        let b_blk = b.slice(s![r0..r1, ..]);
        let mut scaled = b_blk.to_owned();
        for (mut row, &gj) in scaled.rows_mut().into_iter().zip(&g[r0..r1]) {
            for v in row.iter_mut() {
                *v = *v * gj;
            }
        }
        let partial = par_matmul(b_blk.t(), scaled.view());
        acc += &partial;
        r0 = r1;
    }
    // the (l, l') and (l', l) sums are identical up to rounding; mirror the
    // upper triangle so symmetry holds exactly
    for i in 0..d {
        for j in 0..i {
            let v = acc[(j, i)];
            acc[(i, j)] = v;
        }
    }
    acc
}

/// `B^T v` with column-parallel deterministic reduction.
pub fn tr_apply<T: Scalar>(b: &Array2<T>, v: &[T]) -> Vec<T> {
    assert_eq!(b.nrows(), v.len());
    let d = b.ncols();
    (0..d)
        .into_par_iter()
        .map(|j| {
            let col = b.column(j);
            let prods: Vec<T> = col.iter().zip(v).map(|(&bij, &vi)| bij * vi).collect();
            pairwise_sum(&prods)
        })
        .collect()
}

/// Basis evaluation matrix: row `j` holds every basis function at point `j`.
pub fn basis_matrix<T: Scalar>(basis: &BasisSet, points: &[Point]) -> Array2<T> {
    let d = basis.dim();
    let m = points.len();
    let mut out = Array2::<T>::zeros((m, d));
    let chunk = block_rows(m.max(1));
    let views: Vec<(usize, ArrayViewMut2<T>)> = out
        .axis_chunks_iter_mut(Axis(0), chunk)
        .enumerate()
        .collect();
    views.into_par_iter().for_each(|(i, mut blk)| {
        let r0 = i * chunk;
        let mut row = vec![0.0f64; d];
        for (local, mut out_row) in blk.rows_mut().into_iter().enumerate() {
            basis
                .eval_row(&points[r0 + local], &mut row)
                .expect("basis/point region mismatch in basis_matrix");
            for (o, &r) in out_row.iter_mut().zip(&row) {
                *o = T::from_re(r);
            }
        }
    });
    out
}
