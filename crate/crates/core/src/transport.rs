//! Couplings between two probability vectors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Marginal tolerance (max-norm) for feasible plans.
pub const PLAN_FEASIBILITY_TOL: f64 = 1e-8;

/// Nonnegative `N₁ × N₂` matrix with prescribed row and column sums.
#[derive(Debug, Clone, Serialize)]
pub struct TransportPlan<T: Real = f64> {
    plan: Mat<T>,
    source_mass: Vec<T>,
    target_mass: Vec<T>,
}

impl<T: Real> TransportPlan<T> {
    /// Validates nonnegativity and both marginals against `1e-8`.
    pub fn new(plan: Mat<T>, source_mass: Vec<T>, target_mass: Vec<T>) -> Result<Self> {
        check_plan(&plan, &source_mass, &target_mass)?;
        Ok(Self {
            plan,
            source_mass,
            target_mass,
        })
    }

    /// Wraps a plan without validation; marginals are read off the matrix.
    pub(crate) fn from_matrix_unchecked(plan: Mat<T>) -> Self {
        let source_mass = plan.row_sums();
        let target_mass = plan.col_sums();
        Self {
            plan,
            source_mass,
            target_mass,
        }
    }

    /// Independent coupling `m₁ m₂ᵀ`.
    pub fn product(source: &[T], target: &[T]) -> Self {
        let plan = Mat::from_fn(source.len(), target.len(), |i, j| source[i] * target[j]);
        Self {
            plan,
            source_mass: source.to_vec(),
            target_mass: target.to_vec(),
        }
    }

    /// `diag(m)`, the identity coupling of a measure with itself.
    pub fn diagonal(masses: &[T]) -> Self {
        Self {
            plan: Mat::diag(masses),
            source_mass: masses.to_vec(),
            target_mass: masses.to_vec(),
        }
    }

    #[inline]
    pub fn matrix(&self) -> &Mat<T> {
        &self.plan
    }

    pub fn into_matrix(self) -> Mat<T> {
        self.plan
    }

    #[inline]
    pub fn source_mass(&self) -> &[T] {
        &self.source_mass
    }

    #[inline]
    pub fn target_mass(&self) -> &[T] {
        &self.target_mass
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.plan.rows(), self.plan.cols())
    }

    pub fn transpose(&self) -> Self {
        Self {
            plan: self.plan.transpose(),
            source_mass: self.target_mass.clone(),
            target_mass: self.source_mass.clone(),
        }
    }

    /// Max-norm marginal residual against the stored masses.
    pub fn marginal_residual(&self) -> T {
        marginal_residual(&self.plan, &self.source_mass, &self.target_mass)
    }

    /// Checks this plan couples exactly `source` and `target`.
    pub fn check_couples(&self, source: &[T], target: &[T]) -> Result<()> {
        check_plan(&self.plan, source, target)
    }
}

pub(crate) fn marginal_residual<T: Real>(plan: &Mat<T>, source: &[T], target: &[T]) -> T {
    let rows = plan.row_sums();
    let cols = plan.col_sums();
    let r = rows
        .iter()
        .zip(source)
        .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
    cols.iter()
        .zip(target)
        .fold(r, |m, (&a, &b)| m.max((a - b).abs()))
}

pub(crate) fn check_plan<T: Real>(plan: &Mat<T>, source: &[T], target: &[T]) -> Result<()> {
    if plan.rows() != source.len() {
        return Err(Error::DimensionMismatch {
            what: "plan rows",
            expected: source.len(),
            found: plan.rows(),
        });
    }
    if plan.cols() != target.len() {
        return Err(Error::DimensionMismatch {
            what: "plan columns",
            expected: target.len(),
            found: plan.cols(),
        });
    }
    let most_negative = plan.as_slice().iter().fold(T::zero(), |m, &x| m.min(x));
    if most_negative < T::zero() || plan.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::InfeasiblePlan {
            residual: most_negative.abs().as_f64(),
        });
    }
    let residual = marginal_residual(plan, source, target);
    if residual > T::tol(PLAN_FEASIBILITY_TOL) {
        return Err(Error::InfeasiblePlan {
            residual: residual.as_f64(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_plan_is_feasible() {
        let p = TransportPlan::product(&[0.25, 0.75], &[0.5, 0.3, 0.2]);
        assert!(p.marginal_residual() < 1e-15);
        assert!(TransportPlan::new(p.matrix().clone(), vec![0.25, 0.75], vec![0.5, 0.3, 0.2]).is_ok());
    }

    #[test]
    fn rejects_bad_marginals() {
        let m = Mat::from_rows(&[[0.5, 0.0], [0.0, 0.4]]);
        assert!(matches!(
            TransportPlan::new(m, vec![0.5, 0.5], vec![0.5, 0.5]),
            Err(Error::InfeasiblePlan { .. })
        ));
    }

    #[test]
    fn rejects_negative_entries() {
        let m = Mat::from_rows(&[[0.6, -0.1], [-0.1, 0.6]]);
        assert!(TransportPlan::new(m, vec![0.5, 0.5], vec![0.5, 0.5]).is_err());
    }
}
