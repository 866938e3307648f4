//! CPD factor container, model reconstruction, the smoothed lp slab cost
//! and its weighted reformulation, and the per-slab weight rule.
//!
//! For residual columns `r_i = X3(:,i) - (C ⊙ B) A(i,:)^T` of the mode-3
//! unfolding, the two costs are
//!
//! - `Psi1 = sum_i (||r_i||^2 + eps)^(p/2)`  (smoothed lp group penalty)
//! - `Psi2 = sum_i w_i ||r_i||^2 + sum_i phi_p(w_i)`
//!
//! with `phi_p(w) = (2-p)/2 * ((2/p) w)^(p/(p-2)) + eps*w`. Minimizing
//! `Psi2` over `w_i >= 0` recovers `Psi1` exactly, the minimizer being
//! `w_opt = (p/2)(||r_i||^2 + eps)^((p-2)/2)`; that conjugate pair is what
//! lets an alternating scheme downweight outlying slabs with closed-form
//! updates throughout.

use crate::error::{Error, Result};
use crate::tensor::{khatri_rao, unfold, Mat, Mode, Tensor3};

/// Loading matrices of a rank-R PARAFAC model: `A (I x R)`, `B (J x R)`,
/// `C (K x R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTriple {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
}

impl FactorTriple {
    pub fn new(a: Mat, b: Mat, c: Mat) -> Result<FactorTriple> {
        let r = a.ncols();
        if r == 0 || b.ncols() != r || c.ncols() != r {
            return Err(Error::DimensionMismatch(format!(
                "factor column counts must be equal and >= 1: {} / {} / {}",
                a.ncols(),
                b.ncols(),
                c.ncols()
            )));
        }
        if a.nrows() == 0 || b.nrows() == 0 || c.nrows() == 0 {
            return Err(Error::InvalidParameter("factor with zero rows".into()));
        }
        for (name, m) in [("A", &a), ("B", &b), ("C", &c)] {
            if !m.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite(format!("factor {name}")));
            }
        }
        Ok(FactorTriple { a, b, c })
    }

    pub fn rank(&self) -> usize {
        self.a.ncols()
    }

    /// Tensor dimensions `(I, J, K)` implied by the factor row counts.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.nrows(), self.b.nrows(), self.c.nrows())
    }
}

/// Per-horizontal-slab weights `w_i >= 0`. The diagonal weighting matrix
/// `W = Diag(sqrt(w_1), ..., sqrt(w_I))` is never materialized; solvers
/// consume `w_i` directly through the Hadamard-gram identities.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabWeights {
    w: Vec<f64>,
}

impl SlabWeights {
    pub fn new(w: Vec<f64>) -> Result<SlabWeights> {
        if w.is_empty() {
            return Err(Error::InvalidParameter("empty weight vector".into()));
        }
        if !w.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::InvalidParameter(
                "slab weights must be finite and nonnegative".into(),
            ));
        }
        Ok(SlabWeights { w })
    }

    pub fn ones(len: usize) -> SlabWeights {
        SlabWeights { w: vec![1.0; len] }
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Dense rank-R model tensor `X(i,j,k) = sum_r A(i,r) B(j,r) C(k,r)`.
pub fn reconstruct(f: &FactorTriple) -> Tensor3 {
    // (B ⊙ A) C^T is the mode-2 unfolding, which coincides with the raw
    // tensor layout.
    let m = khatri_rao(&f.b, &f.a).expect("factor ranks agree") * f.c.transpose();
    Tensor3::new(f.dims(), m.as_slice().to_vec()).expect("model tensor is finite")
}

/// Euclidean norms of the horizontal-slab residuals, i.e. of the columns of
/// `unfold(t, 3) - (C ⊙ B) A^T`.
pub fn slab_residual_norms(t: &Tensor3, f: &FactorTriple) -> Result<Vec<f64>> {
    if t.dims() != f.dims() {
        return Err(Error::DimensionMismatch(format!(
            "tensor dims {:?} vs factor dims {:?}",
            t.dims(),
            f.dims()
        )));
    }
    let res = unfold(t, Mode::Horizontal) - khatri_rao(&f.c, &f.b)? * f.a.transpose();
    Ok(res.column_iter().map(|col| col.norm()).collect())
}

fn validate_p_eps(p: f64, eps: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "p must lie in (0, 1], got {p}"
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    Ok(())
}

/// Smoothed lp slab cost `Psi1` (see module docs). Strictly positive,
/// bounded below by `I * eps^(p/2)`.
pub fn cost_lp(t: &Tensor3, f: &FactorTriple, p: f64, eps: f64) -> Result<f64> {
    validate_p_eps(p, eps)?;
    let norms = slab_residual_norms(t, f)?;
    Ok(norms
        .iter()
        .map(|r| (r * r + eps).powf(p / 2.0))
        .sum())
}

/// Weighted reformulation `Psi2` (see module docs). Weights must be
/// strictly positive: `phi_p` diverges as `w -> 0+`, so zero weights are
/// rejected rather than silently floored.
pub fn cost_weighted(
    t: &Tensor3,
    f: &FactorTriple,
    w: &SlabWeights,
    p: f64,
    eps: f64,
) -> Result<f64> {
    validate_p_eps(p, eps)?;
    let norms = slab_residual_norms(t, f)?;
    if w.len() != norms.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} slabs",
            w.len(),
            norms.len()
        )));
    }
    let mut total = 0.0;
    for (wi, r) in w.values().iter().zip(&norms) {
        total += wi * r * r + phi_p(*wi, p, eps)?;
    }
    Ok(total)
}

/// Conjugate-style penalty `phi_p(w) = (2-p)/2 * ((2/p) w)^(p/(p-2)) + eps*w`,
/// strictly convex on `w > 0`.
pub fn phi_p(w: f64, p: f64, eps: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "phi_p requires w > 0, got {w}"
        )));
    }
    if !(p > 0.0 && p < 2.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "phi_p requires 0 < p < 2, got {p}"
        )));
    }
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "phi_p requires eps >= 0, got {eps}"
        )));
    }
    Ok((2.0 - p) / 2.0 * ((2.0 / p) * w).powf(p / (p - 2.0)) + eps * w)
}

/// Optimal slab weight `w_opt = (p/2)(x^2 + eps)^((p-2)/2)` for a squared
/// residual norm `x^2`. Strictly positive and decreasing in the residual;
/// `eps > 0` keeps the exponent away from the singularity at zero residual.
pub fn weight_update(x_norm_sq: f64, p: f64, eps: f64) -> f64 {
    debug_assert!(x_norm_sq >= 0.0 && p > 0.0 && p < 2.0 && eps > 0.0);
    p / 2.0 * (x_norm_sq + eps).powf((p - 2.0) / 2.0)
}
