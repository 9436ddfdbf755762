//! Dense complex linear algebra used throughout the crate.
//!
//! Everything rank-related goes through one SVD path so that "full rank",
//! "linearly independent" and "null space" all mean the same thing at a given
//! relative tolerance.

use nalgebra::{Complex, DMatrix};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Default relative tolerance for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Minimum ratio between the smallest retained and the largest discarded
/// singular value for a rank decision to count as well conditioned.
pub const RANK_GAP_RATIO: f64 = 1e6;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Builds a complex matrix from a row-major slice of real integers.
pub fn from_int_rows(rows: usize, cols: usize, data: &[i32]) -> CMat {
    assert_eq!(data.len(), rows * cols);
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| c(x as f64, 0.0)))
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

fn threshold(sv: &[f64], rows: usize, cols: usize, tol: f64) -> f64 {
    let smax = sv.first().copied().unwrap_or(0.0);
    tol * smax * rows.max(cols) as f64
}

/// Rank decision together with the singular values on either side of the cut.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    /// Smallest singular value counted in the rank (0 when rank is 0).
    pub retained_min: f64,
    /// Largest singular value below the cut (0 when the matrix has full rank).
    pub discarded_max: f64,
}

impl RankReport {
    /// Ratio between retained and discarded singular values; infinite when
    /// nothing was discarded or nothing retained.
    pub fn gap_ratio(&self) -> f64 {
        if self.rank == 0 || self.discarded_max == 0.0 {
            f64::INFINITY
        } else {
            self.retained_min / self.discarded_max
        }
    }

    pub fn well_conditioned(&self) -> bool {
        self.gap_ratio() >= RANK_GAP_RATIO
    }
}

pub fn rank_report(a: &CMat, tol: f64) -> RankReport {
    let sv = singular_values(a);
    let thr = threshold(&sv, a.nrows(), a.ncols(), tol);
    let rank = sv.iter().filter(|&&s| s > thr).count();
    RankReport {
        rank,
        retained_min: if rank > 0 { sv[rank - 1] } else { 0.0 },
        discarded_max: sv.get(rank).copied().unwrap_or(0.0),
    }
}

/// Number of singular values above `tol * sigma_max * max(rows, cols)`.
pub fn numeric_rank(a: &CMat, tol: f64) -> usize {
    rank_report(a, tol).rank
}

/// Full right singular basis of `a`, ordered by descending singular value.
/// Returns (singular values padded with zeros to `ncols`, V with V[:, i] the
/// i-th right singular vector).
fn full_right_svd(a: &CMat) -> (Vec<f64>, CMat) {
    let (m, n) = a.shape();
    let padded = if m < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap()
    });
    let mut v = CMat::zeros(n, n);
    let mut sv = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        sv.push(svd.singular_values[src]);
        for r in 0..n {
            v[(r, dst)] = v_t[(src, r)].conj();
        }
    }
    (sv, v)
}

/// Orthonormal basis (as columns) of the null space of `a`.
pub fn null_space(a: &CMat, tol: f64) -> CMat {
    let n = a.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMat::identity(n, n);
    }
    let (sv, v) = full_right_svd(a);
    let thr = threshold(&sv, a.nrows(), a.ncols(), tol);
    let rank = sv.iter().filter(|&&s| s > thr).count();
    v.columns(rank, n - rank).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the column space of `a`.
pub fn orthogonal_complement(a: &CMat, tol: f64) -> CMat {
    null_space(&a.adjoint(), tol)
}

/// Orthonormal basis of the column space of `a`.
pub fn column_basis(a: &CMat, tol: f64) -> CMat {
    if a.ncols() == 0 || a.nrows() == 0 {
        return CMat::zeros(a.nrows(), 0);
    }
    let (sv, v) = full_right_svd(&a.adjoint());
    let thr = threshold(&sv, a.nrows(), a.ncols(), tol);
    let rank = sv.iter().filter(|&&s| s > thr).count();
    v.columns(0, rank).into_owned()
}

/// Moore-Penrose pseudo-inverse at relative tolerance `tol`.
pub fn pinv(a: &CMat, tol: f64) -> CMat {
    let sv = singular_values(a);
    let thr = threshold(&sv, a.nrows(), a.ncols(), tol).max(f64::MIN_POSITIVE);
    a.clone()
        .svd(true, true)
        .pseudo_inverse(thr)
        .expect("u and v_t requested")
}

/// Horizontal concatenation. All blocks must share the row count `rows`.
pub fn hstack(rows: usize, blocks: &[&CMat]) -> CMat {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Determinant of a square complex matrix via LU.
pub fn det(a: &CMat) -> C64 {
    a.clone().determinant()
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &CMat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Scalar `s` minimising ||a - s b||_F, or None if `b` is zero.
pub fn best_scalar(a: &CMat, b: &CMat) -> Option<C64> {
    let bb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    if bb == 0.0 {
        return None;
    }
    let ab: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    Some(ab / bb)
}

/// |<a, b>| / (||a|| ||b||) over the vectorised matrices.
pub fn collinearity(a: &CMat, b: &CMat) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let ip: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    ip.norm() / (na * nb)
}
