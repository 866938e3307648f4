//! Dense three-way tensors, slabs, matrix unfoldings and the
//! Khatri-Rao/Hadamard kernels used by the factorization solvers.
//!
//! # Memory layout
//!
//! A `Tensor3` with dimensions `I x J x K` stores element `(i, j, k)` at
//! linear index `i + I*j + I*J*k` (first index fastest). Matrices are
//! column-major (`nalgebra::DMatrix`). With `vec(M)` denoting the
//! column-major vectorization, the three slab types and unfoldings are
//! oriented so that for an exact rank-R model with factors `A (I x R)`,
//! `B (J x R)`, `C (K x R)`:
//!
//! - lateral slab (fix `j`):    `K x I`,  `S[k, i] = X(i, j, k) = (C Diag(B(j,:)) A^T)[k, i]`
//! - frontal slab (fix `k`):    `I x J`,  `S[i, j] = X(i, j, k) = (A Diag(C(k,:)) B^T)[i, j]`
//! - horizontal slab (fix `i`): `J x K`,  `S[j, k] = X(i, j, k) = (B Diag(A(i,:)) C^T)[j, k]`
//!
//! Each unfolding stacks the column-major vectorizations of one slab type
//! as columns, which makes the Khatri-Rao identities hold literally:
//!
//! - mode 1: `KI x J`, row `(i, k) -> i*K + k`, `X1 = (A ⊙ C) B^T`
//! - mode 2: `IJ x K`, row `(j, i) -> j*I + i`, `X2 = (B ⊙ A) C^T`
//! - mode 3: `JK x I`, row `(k, j) -> k*J + j`, `X3 = (C ⊙ B) A^T`
//!
//! The mode-2 unfolding coincides with the raw storage order, so it is a
//! straight copy; the other two are permuted copies. Other vectorization
//! orders would be equivalent up to a row permutation; this one is frozen
//! so the identities above are exact.

use crate::error::{Error, Result};

/// Dense real matrix, column-major.
pub type Mat = nalgebra::DMatrix<f64>;

/// Slab/unfolding mode. The discriminants follow the superscripts of the
/// slab identities: lateral slabs feed the mode-1 unfolding, frontal the
/// mode-2, horizontal the mode-3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Fix the second index `j`; slabs are `K x I`.
    Lateral = 1,
    /// Fix the third index `k`; slabs are `I x J`.
    Frontal = 2,
    /// Fix the first index `i`; slabs are `J x K`.
    Horizontal = 3,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Lateral, Mode::Frontal, Mode::Horizontal];

    pub fn from_index(mode: usize) -> Result<Mode> {
        match mode {
            1 => Ok(Mode::Lateral),
            2 => Ok(Mode::Frontal),
            3 => Ok(Mode::Horizontal),
            _ => Err(Error::InvalidParameter(format!(
                "mode must be 1, 2 or 3, got {mode}"
            ))),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Dense three-way tensor with the layout documented at module level.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl Tensor3 {
    /// Builds a tensor from its dimensions and linearized data
    /// (index `i + I*j + I*J*k`). All entries must be finite.
    pub fn new(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Tensor3> {
        let (i, j, k) = dims;
        if i == 0 || j == 0 || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "tensor dimensions must be positive, got {dims:?}"
            )));
        }
        if data.len() != i * j * k {
            return Err(Error::DimensionMismatch(format!(
                "data length {} does not match dims {:?} (expected {})",
                data.len(),
                dims,
                i * j * k
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tensor data".into()));
        }
        Ok(Tensor3 { dims, data })
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Result<Tensor3> {
        let len = dims.0 * dims.1 * dims.2;
        Tensor3::new(dims, vec![0.0; len])
    }

    /// Fills element `(i, j, k)` with `f(i, j, k)`.
    pub fn from_fn(
        dims: (usize, usize, usize),
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Tensor3> {
        let (ni, nj, nk) = dims;
        let mut data = Vec::with_capacity(ni * nj * nk);
        for k in 0..nk {
            for j in 0..nj {
                for i in 0..ni {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3::new(dims, data)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        i + self.dims.0 * (j + self.dims.1 * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.idx(i, j, k);
        self.data[idx] = value;
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Extracts one slab of `t` with the orientation documented at module level.
pub fn slab(t: &Tensor3, mode: Mode, index: usize) -> Result<Mat> {
    let (ni, nj, nk) = t.dims();
    let bound = match mode {
        Mode::Lateral => nj,
        Mode::Frontal => nk,
        Mode::Horizontal => ni,
    };
    if index >= bound {
        return Err(Error::IndexOutOfRange { index, size: bound });
    }
    let out = match mode {
        Mode::Lateral => Mat::from_fn(nk, ni, |k, i| t.get(i, index, k)),
        Mode::Frontal => Mat::from_fn(ni, nj, |i, j| t.get(i, j, index)),
        Mode::Horizontal => Mat::from_fn(nj, nk, |j, k| t.get(index, j, k)),
    };
    Ok(out)
}

/// Matrix unfolding of `t`; columns are column-major vectorizations of the
/// slabs of the matching type.
pub fn unfold(t: &Tensor3, mode: Mode) -> Mat {
    let (ni, nj, nk) = t.dims();
    match mode {
        // row (i, k) -> i*K + k, column j
        Mode::Lateral => {
            let mut m = Mat::zeros(nk * ni, nj);
            for j in 0..nj {
                for i in 0..ni {
                    for k in 0..nk {
                        m[(i * nk + k, j)] = t.get(i, j, k);
                    }
                }
            }
            m
        }
        // row (j, i) -> j*I + i, column k: identical to the raw layout
        Mode::Frontal => Mat::from_column_slice(ni * nj, nk, t.data()),
        // row (k, j) -> k*J + j, column i
        Mode::Horizontal => {
            let mut m = Mat::zeros(nj * nk, ni);
            for i in 0..ni {
                for k in 0..nk {
                    for j in 0..nj {
                        m[(k * nj + j, i)] = t.get(i, j, k);
                    }
                }
            }
            m
        }
    }
}

/// Inverse of [`unfold`]: rebuilds the tensor of dimensions `dims` from its
/// mode-`mode` unfolding.
pub fn fold(m: &Mat, mode: Mode, dims: (usize, usize, usize)) -> Result<Tensor3> {
    let (ni, nj, nk) = dims;
    let expected = match mode {
        Mode::Lateral => (nk * ni, nj),
        Mode::Frontal => (ni * nj, nk),
        Mode::Horizontal => (nj * nk, ni),
    };
    if (m.nrows(), m.ncols()) != expected {
        return Err(Error::DimensionMismatch(format!(
            "unfolding shape {}x{} inconsistent with mode {:?} of dims {:?} (expected {}x{})",
            m.nrows(),
            m.ncols(),
            mode,
            dims,
            expected.0,
            expected.1
        )));
    }
    match mode {
        Mode::Lateral => Tensor3::from_fn(dims, |i, j, k| m[(i * nk + k, j)]),
        Mode::Frontal => Tensor3::new(dims, m.as_slice().to_vec()),
        Mode::Horizontal => Tensor3::from_fn(dims, |i, j, k| m[(k * nj + j, i)]),
    }
}

/// Khatri-Rao (column-wise Kronecker) product: column `r` of the result is
/// `U(:,r) ⊗ V(:,r)`, so element `(u_row, v_row)` lands at row
/// `u_row * V.nrows() + v_row`.
pub fn khatri_rao(u: &Mat, v: &Mat) -> Result<Mat> {
    if u.ncols() != v.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Khatri-Rao column counts differ: {} vs {}",
            u.ncols(),
            v.ncols()
        )));
    }
    let (un, vn, r) = (u.nrows(), v.nrows(), u.ncols());
    let mut out = Mat::zeros(un * vn, r);
    for c in 0..r {
        for ui in 0..un {
            let s = u[(ui, c)];
            for vi in 0..vn {
                out[(ui * vn + vi, c)] = s * v[(vi, c)];
            }
        }
    }
    Ok(out)
}

/// Matricized-tensor times Khatri-Rao product: `(U ⊙ V)^T * unfold(t, mode)`
/// without materializing the `U.nrows()*V.nrows() x R` Khatri-Rao factor.
///
/// Row-factor pairing per mode: 1 -> `(A, C)`, 2 -> `(B, A)`, 3 -> `(C, B)`.
pub fn mttkrp(t: &Tensor3, u: &Mat, v: &Mat, mode: Mode) -> Result<Mat> {
    let r = u.ncols();
    if v.ncols() != r {
        return Err(Error::DimensionMismatch(format!(
            "mttkrp column counts differ: {} vs {}",
            r,
            v.ncols()
        )));
    }
    let (ni, nj, nk) = t.dims();
    let (un, vn, cols) = match mode {
        Mode::Lateral => (ni, nk, nj),
        Mode::Frontal => (nj, ni, nk),
        Mode::Horizontal => (nk, nj, ni),
    };
    if u.nrows() != un || v.nrows() != vn {
        return Err(Error::DimensionMismatch(format!(
            "mttkrp row factors {}x{} do not match mode {:?} of dims {:?} (expected {} and {})",
            u.nrows(),
            v.nrows(),
            mode,
            t.dims(),
            un,
            vn
        )));
    }
    let unf = unfold(t, mode);
    let vt = v.transpose();
    let mut out = Mat::zeros(r, cols);
    for ui in 0..un {
        let tmp = &vt * unf.view((ui * vn, 0), (vn, cols));
        for rr in 0..r {
            let w = u[(ui, rr)];
            for c in 0..cols {
                out[(rr, c)] += w * tmp[(rr, c)];
            }
        }
    }
    Ok(out)
}

/// Column limit for the combinatorial Kruskal-rank search.
pub const KRUSKAL_COL_LIMIT: usize = 12;

/// Kruskal rank: the largest `k` such that every set of `k` columns is
/// linearly independent. Numerical rank uses the threshold
/// `1e-9 * sigma_max` on singular values. Guarded to small matrices; this
/// exists to check uniqueness conditions, not for production-scale use.
pub fn kruskal_rank(m: &Mat) -> Result<usize> {
    let n = m.ncols();
    if n > KRUSKAL_COL_LIMIT {
        return Err(Error::KruskalGuard {
            cols: n,
            limit: KRUSKAL_COL_LIMIT,
        });
    }
    let max_k = n.min(m.nrows());
    for k in 1..=max_k {
        if !every_subset_independent(m, k) {
            return Ok(k - 1);
        }
    }
    Ok(max_k)
}

fn every_subset_independent(m: &Mat, k: usize) -> bool {
    let mut subset = vec![0usize; k];
    all_combinations(m.ncols(), k, 0, 0, &mut subset, &mut |cols| {
        numerical_rank(&m.select_columns(cols.iter())) == k
    })
}

fn all_combinations(
    n: usize,
    k: usize,
    start: usize,
    depth: usize,
    subset: &mut [usize],
    check: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if depth == k {
        return check(subset);
    }
    for c in start..n {
        subset[depth] = c;
        if !all_combinations(n, k, c + 1, depth + 1, subset, check) {
            return false;
        }
    }
    true
}

fn numerical_rank(m: &Mat) -> usize {
    let svals = m.clone().singular_values();
    let smax = svals.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svals.iter().filter(|&&s| s > 1e-9 * smax).count()
}

/// Solves `G X = Rhs` for symmetric positive (semi)definite `G` by Cholesky,
/// escalating a diagonal jitter `delta * trace(G)/n * I` over
/// `delta in {0, 1e-12, 1e-8}` before signaling failure. `base_jitter` is an
/// always-applied extra multiple of the mean diagonal. A zero right-hand
/// side short-circuits to the zero solution (minimum-norm answer for a
/// consistent singular system).
pub fn solve_spd(g: &Mat, rhs: &Mat, base_jitter: f64) -> Result<Mat> {
    if g.nrows() != g.ncols() || g.nrows() != rhs.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "solve_spd: gram {}x{} vs rhs {}x{}",
            g.nrows(),
            g.ncols(),
            rhs.nrows(),
            rhs.ncols()
        )));
    }
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(Mat::zeros(rhs.nrows(), rhs.ncols()));
    }
    let mean_diag = g.trace() / g.nrows() as f64;
    for delta in [0.0, 1e-12, 1e-8] {
        let jitter = (base_jitter + delta) * mean_diag;
        let mut shifted = g.clone();
        if jitter != 0.0 {
            for d in 0..shifted.nrows() {
                shifted[(d, d)] += jitter;
            }
        }
        if let Some(chol) = nalgebra::linalg::Cholesky::new(shifted) {
            let x = chol.solve(rhs);
            if x.iter().all(|v| v.is_finite()) {
                return Ok(x);
            }
        }
    }
    Err(Error::SingularGram)
}
