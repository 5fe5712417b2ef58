//! Measure networks: a symmetric similarity matrix paired with a probability
//! mass vector over its nodes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigenvalues, Mat};
use crate::scalar::Real;

/// Relative tolerance used when certifying positive semi-definiteness.
pub const PSD_CERTIFY_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct MeasureNetwork<T: Real = f64> {
    similarity: Mat<T>,
    masses: Vec<T>,
    psd_checked: bool,
}

impl<T: Real> MeasureNetwork<T> {
    /// Validates `similarity` and normalizes `masses` onto the simplex.
    ///
    /// Asymmetry up to `1e-12 · max(1, max|s_ij|)` is absorbed by taking the
    /// symmetric part; anything larger is rejected.
    pub fn new(similarity: Mat<T>, masses: Vec<T>) -> Result<Self> {
        if !similarity.is_square() {
            return Err(Error::DimensionMismatch {
                what: "similarity columns",
                expected: similarity.rows(),
                found: similarity.cols(),
            });
        }
        let n = similarity.rows();
        if n == 0 {
            return Err(Error::InvariantViolation("measure network needs at least one node".into()));
        }
        if masses.len() != n {
            return Err(Error::DimensionMismatch {
                what: "mass vector",
                expected: n,
                found: masses.len(),
            });
        }
        if similarity.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvariantViolation("similarity has non-finite entries".into()));
        }
        let scale = similarity.max_abs().max(T::one());
        let asym = similarity.asymmetry();
        if asym > T::tol(1e-12) * scale {
            return Err(Error::NotSymmetric {
                asymmetry: asym.as_f64(),
            });
        }
        let similarity = if asym > T::zero() {
            similarity.symmetrized()
        } else {
            similarity
        };
        let masses = normalize_masses(masses)?;
        Ok(Self {
            similarity,
            masses,
            psd_checked: false,
        })
    }

    /// Single-node network, convenient for tests and degenerate inputs.
    pub fn singleton(s: T) -> Self {
        Self {
            similarity: Mat::from_vec(1, 1, vec![s]),
            masses: vec![T::one()],
            psd_checked: false,
        }
    }

    /// Certifies `λ_min(S) ≥ −1e-8 · λ_max(S)` and records it.
    pub fn certify_psd(mut self) -> Result<Self> {
        check_psd(&self.similarity, PSD_CERTIFY_REL_TOL)?;
        self.psd_checked = true;
        Ok(self)
    }

    /// Records PSD-ness known from construction, e.g. a graph Laplacian.
    pub(crate) fn assume_psd(mut self) -> Self {
        self.psd_checked = true;
        self
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.masses.len()
    }

    #[inline]
    pub fn similarity(&self) -> &Mat<T> {
        &self.similarity
    }

    #[inline]
    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    #[inline]
    pub fn psd_checked(&self) -> bool {
        self.psd_checked
    }

    /// `U = W^{1/2} S W^{1/2}`.
    pub fn weighted_similarity(&self) -> Mat<T> {
        let sq: Vec<T> = self.masses.iter().map(|m| m.sqrt()).collect();
        self.similarity.scale_rows_cols(&sq, &sq)
    }
}

/// Scales positive masses to sum to one.
pub fn normalize_masses<T: Real>(masses: Vec<T>) -> Result<Vec<T>> {
    if let Some(index) = masses.iter().position(|&m| !(m > T::zero()) || !m.is_finite()) {
        return Err(Error::InvariantViolation(format!(
            "mass {index} is not a positive finite number"
        )));
    }
    let total: T = masses.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::ZeroTotalMass);
    }
    Ok(masses.into_iter().map(|m| m / total).collect())
}

/// Returns the sorted spectrum if `λ_min ≥ −rel_tol · max(λ_max, 0)`.
pub(crate) fn check_psd<T: Real>(s: &Mat<T>, rel_tol: f64) -> Result<Vec<T>> {
    let vals = sym_eigenvalues(s)?;
    let max = vals.first().copied().unwrap_or(T::zero());
    let min = vals.last().copied().unwrap_or(T::zero());
    if min < -T::lit(rel_tol) * max.max(s.frobenius_norm() * T::epsilon()) {
        return Err(Error::NotPsd {
            min_eigenvalue: min.as_f64(),
            max_eigenvalue: max.as_f64(),
        });
    }
    Ok(vals)
}
