//! Spectra of `U = W^{1/2} S W^{1/2}` and its compression `U⁽ᶜ⁾ = C_w U C_wᵀ`,
//! the spectral difference `Δ`, and the GW distance-preservation bounds.

use serde::Serialize;

use crate::coarsening::CoarseningOperators;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Mat};
use crate::network::MeasureNetwork;
use crate::scalar::Real;
use crate::transport::TransportPlan;

/// `λ_min ≥ −1e-6 · λ_max` is treated as floating-point noise and clamped.
pub const PSD_CLAMP_REL_TOL: f64 = 1e-6;

/// Eigenvalues sorted in descending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Spectrum<T: Real = f64> {
    values: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    /// Sorts descending; ties keep their input order.
    pub fn from_unsorted(mut values: Vec<T>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One-based access matching the usual `λ₁ ≥ λ₂ ≥ …` convention.
    #[inline]
    pub fn nth(&self, i: usize) -> T {
        self.values[i - 1]
    }

    pub fn max(&self) -> T {
        self.values.first().copied().unwrap_or(T::zero())
    }

    pub fn min(&self) -> T {
        self.values.last().copied().unwrap_or(T::zero())
    }

    fn clamped_nonnegative(&self) -> Self {
        Self {
            values: self.values.iter().map(|&v| v.max(T::zero())).collect(),
        }
    }
}

/// Spectrum of a symmetric matrix, plus eigenvectors on request.
pub fn sym_eig<T: Real>(m: &Mat<T>, want_vectors: bool) -> Result<(Spectrum<T>, Option<Mat<T>>)> {
    let eig = sym_eigen(m, want_vectors)?;
    Ok((Spectrum { values: eig.values }, eig.vectors))
}

/// PSD spectrum with mild negative noise clamped to zero.
///
/// Noise is measured against `λ_max` or `scale`, whichever is larger; a
/// compression passes the norm of the matrix it came from, since it may
/// itself be numerically zero.
fn psd_spectrum<T: Real>(m: &Mat<T>, scale: T) -> Result<Spectrum<T>> {
    let (spec, _) = sym_eig(m, false)?;
    let max = spec.max();
    let min = spec.min();
    if min < -T::lit(PSD_CLAMP_REL_TOL) * max.max(scale).max(T::zero()) {
        return Err(Error::NotPsd {
            min_eigenvalue: min.as_f64(),
            max_eigenvalue: max.as_f64(),
        });
    }
    if min < T::zero() {
        log::debug!("clamping eigenvalues down to {} to zero", min.as_f64());
        return Ok(spec.clamped_nonnegative());
    }
    Ok(spec)
}

/// Spectra of `U` and of its compression under the projection coarsening matrix.
#[derive(Debug, Clone, Serialize)]
pub struct CompressionSpectra<T: Real = f64> {
    pub lambda: Spectrum<T>,
    pub lambda_c: Spectrum<T>,
}

pub fn compression_spectra<T: Real>(
    net: &MeasureNetwork<T>,
    ops: &CoarseningOperators<T>,
) -> Result<CompressionSpectra<T>> {
    check_ops(net, ops)?;
    let u = net.weighted_similarity();
    let scale = u.frobenius_norm();
    let lambda = psd_spectrum(&u, scale)?;
    let lambda_c = psd_spectrum(&u.congruence(ops.projection()), scale)?;
    Ok(CompressionSpectra { lambda, lambda_c })
}

fn check_ops<T: Real>(net: &MeasureNetwork<T>, ops: &CoarseningOperators<T>) -> Result<()> {
    if ops.n_nodes() != net.size() {
        return Err(Error::DimensionMismatch {
            what: "network size vs. partition",
            expected: ops.n_nodes(),
            found: net.size(),
        });
    }
    let drift = net
        .masses()
        .iter()
        .zip(ops.masses())
        .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
    if drift > T::tol(1e-12) {
        return Err(Error::InvalidConfig(
            "coarsening operators were built from different node masses".into(),
        ));
    }
    Ok(())
}

/// Largest violation of `λ_i ≥ λ⁽ᶜ⁾_i ≥ λ_{N−n+i}`; nonpositive when interlacing holds.
pub fn interlacing_violation<T: Real>(lambda: &Spectrum<T>, lambda_c: &Spectrum<T>) -> T {
    let big_n = lambda.len();
    let n = lambda_c.len();
    let mut worst = T::neg_infinity();
    for i in 1..=n {
        worst = worst.max(lambda_c.nth(i) - lambda.nth(i));
        worst = worst.max(lambda.nth(big_n - n + i) - lambda_c.nth(i));
    }
    worst
}

/// `Δ` together with the trace form `Tr(U) − Tr(U⁽ᶜ⁾) − Σ_{i>n} λ_i`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDifference<T: Real = f64> {
    pub delta: T,
    pub trace_form: T,
    pub spectra: CompressionSpectra<T>,
}

pub fn spectral_difference<T: Real>(
    net: &MeasureNetwork<T>,
    ops: &CoarseningOperators<T>,
) -> Result<SpectralDifference<T>> {
    check_ops(net, ops)?;
    let u = net.weighted_similarity();
    let u_c = u.congruence(ops.projection());
    let scale = u.frobenius_norm();
    let lambda = psd_spectrum(&u, scale)?;
    let lambda_c = psd_spectrum(&u_c, scale)?;
    let n = lambda_c.len();
    let delta = delta_from(&lambda, &lambda_c);
    let tail: T = lambda.values()[n..].iter().copied().sum();
    let trace_form = u.trace() - u_c.trace() - tail;
    Ok(SpectralDifference {
        delta,
        trace_form,
        spectra: CompressionSpectra { lambda, lambda_c },
    })
}

fn delta_from<T: Real>(lambda: &Spectrum<T>, lambda_c: &Spectrum<T>) -> T {
    lambda
        .values()
        .iter()
        .zip(lambda_c.values())
        .map(|(&a, &b)| a - b)
        .sum()
}

/// `C_{U,n} = Σ_{i≤n} λ_i(λ_i − λ_{N−n+i}) + Σ_{i>n} λ_i²`.
pub fn self_constant<T: Real>(lambda: &Spectrum<T>, n: usize) -> T {
    let big_n = lambda.len();
    let head: T = (1..=n)
        .map(|i| lambda.nth(i) * (lambda.nth(i) - lambda.nth(big_n - n + i)))
        .sum();
    let tail: T = ((n + 1)..=big_n).map(|i| lambda.nth(i) * lambda.nth(i)).sum();
    head + tail
}

/// `C_{U,V,n} = Σ_{i≤n} λ_i(ν_i − ν_{N−i+1}) + Σ_{i>n} λ_i ν_i`.
pub fn cross_constant<T: Real>(lambda: &Spectrum<T>, nu: &Spectrum<T>, n: usize) -> T {
    let big_n = lambda.len();
    let head: T = (1..=n)
        .map(|i| lambda.nth(i) * (nu.nth(i) - nu.nth(big_n - i + 1)))
        .sum();
    let tail: T = ((n + 1)..=big_n).map(|i| lambda.nth(i) * nu.nth(i)).sum();
    head + tail
}

/// Single-graph bound `GW₂²(G, G⁽ᶜ⁾) ≤ λ_{N−n+1} Δ + C_{U,n}` with realized costs.
#[derive(Debug, Clone, Serialize)]
pub struct SingleBoundReport<T: Real = f64> {
    pub lambda: Spectrum<T>,
    pub lambda_c: Spectrum<T>,
    pub delta: T,
    pub c_un: T,
    pub bound_rhs: T,
    /// `I₁ − I₁′ = Tr(U²) − Tr((U⁽ᶜ⁾)²)`, the GW cost of the membership plan.
    pub membership_cost: T,
    /// `‖U − Π_w U Π_w‖_F²`, an independent evaluation of the same quantity.
    pub membership_cost_frobenius: T,
    pub solver_cost: Option<T>,
    /// `bound_rhs` minus the solver cost when present, else minus the membership cost.
    pub gap: T,
}

impl<T: Real> SingleBoundReport<T> {
    pub fn with_solver_cost(mut self, cost: T) -> Self {
        self.solver_cost = Some(cost);
        self.gap = self.bound_rhs - cost;
        self
    }

    /// Best realized upper estimate of `GW₂²(G, G⁽ᶜ⁾)`.
    pub fn realized_cost(&self) -> T {
        self.solver_cost.unwrap_or(self.membership_cost)
    }
}

pub fn bound_single<T: Real>(
    net: &MeasureNetwork<T>,
    ops: &CoarseningOperators<T>,
) -> Result<SingleBoundReport<T>> {
    check_ops(net, ops)?;
    let u = net.weighted_similarity();
    let u_c = u.congruence(ops.projection());
    let scale = u.frobenius_norm();
    let lambda = psd_spectrum(&u, scale)?;
    let lambda_c = psd_spectrum(&u_c, scale)?;
    let big_n = lambda.len();
    let n = lambda_c.len();
    let delta = delta_from(&lambda, &lambda_c);
    let c_un = self_constant(&lambda, n);
    let bound_rhs = lambda.nth(big_n - n + 1) * delta + c_un;

    let fro2 = |m: &Mat<T>| {
        let f = m.frobenius_norm();
        f * f
    };
    let membership_cost = fro2(&u) - fro2(&u_c);
    let pi = ops.projector();
    let membership_cost_frobenius = fro2(&(&u - &u.congruence(&pi)));
    Ok(SingleBoundReport {
        lambda,
        lambda_c,
        delta,
        c_un,
        bound_rhs,
        membership_cost,
        membership_cost_frobenius,
        solver_cost: None,
        gap: bound_rhs - membership_cost,
    })
}

/// Per-graph terms entering the two-graph bound.
#[derive(Debug, Clone, Serialize)]
pub struct PairSide<T: Real = f64> {
    pub lambda: Spectrum<T>,
    pub nu: Spectrum<T>,
    pub delta: T,
    pub c_un: T,
    pub c_uvn: T,
}

/// Bound on `|GW₂²(G₁⁽ᶜ⁾, G₂⁽ᶜ⁾) − GW₂²(G₁, G₂)|` evaluated at a given plan.
#[derive(Debug, Clone, Serialize)]
pub struct PairBoundReport<T: Real = f64> {
    pub first: PairSide<T>,
    pub second: PairSide<T>,
    /// `λ_{1,N₁−n₁+1} Δ₁ + C_{U₁,n₁} + λ_{2,N₂−n₂+1} Δ₂ + C_{U₂,n₂}`.
    pub self_branch: T,
    /// `2 [ν_{1,N₁−n₁+1} Δ₁ + C_{U₁,V₁,n₁} + ν_{2,N₂−n₂+1} Δ₂ + C_{U₂,V₂,n₂}]`.
    pub cross_branch: T,
    pub bound_rhs: T,
    /// Realized `|GW₂²(G₁⁽ᶜ⁾, G₂⁽ᶜ⁾) − GW₂²(G₁, G₂)|`, when solver values are attached.
    pub lhs: Option<T>,
    /// Solver tolerance the check is qualified by.
    pub solver_tolerance: Option<T>,
}

impl<T: Real> PairBoundReport<T> {
    pub fn with_realized(mut self, gw_original: T, gw_coarse: T, solver_tolerance: T) -> Self {
        self.lhs = Some((gw_coarse - gw_original).abs());
        self.solver_tolerance = Some(solver_tolerance);
        self
    }
}

/// Evaluates the two-graph bound with `P = W₁^{-1/2} T W₂^{-1/2}`,
/// `V₁ = P U₂ Pᵀ` and `V₂ = Pᵀ U₁ P`.
pub fn bound_pair<T: Real>(
    net1: &MeasureNetwork<T>,
    ops1: &CoarseningOperators<T>,
    net2: &MeasureNetwork<T>,
    ops2: &CoarseningOperators<T>,
    plan: &TransportPlan<T>,
) -> Result<PairBoundReport<T>> {
    check_ops(net1, ops1)?;
    check_ops(net2, ops2)?;
    plan.check_couples(net1.masses(), net2.masses())?;
    let p = normalized_plan(plan.matrix(), net1.masses(), net2.masses())?;
    let u1 = net1.weighted_similarity();
    let u2 = net2.weighted_similarity();
    let v1 = u2.congruence(&p).symmetrized();
    let v2 = u1.congruence(&p.transpose()).symmetrized();

    let side = |u: &Mat<T>, v: &Mat<T>, ops: &CoarseningOperators<T>| -> Result<PairSide<T>> {
        let scale = u.frobenius_norm().max(v.frobenius_norm());
        let lambda = psd_spectrum(u, scale)?;
        let lambda_c = psd_spectrum(&u.congruence(ops.projection()), scale)?;
        let nu = psd_spectrum(v, scale)?;
        let n = lambda_c.len();
        Ok(PairSide {
            delta: delta_from(&lambda, &lambda_c),
            c_un: self_constant(&lambda, n),
            c_uvn: cross_constant(&lambda, &nu, n),
            lambda,
            nu,
        })
    };
    let first = side(&u1, &v1, ops1)?;
    let second = side(&u2, &v2, ops2)?;

    let tail_index = |s: &PairSide<T>, ops: &CoarseningOperators<T>| s.lambda.len() - ops.n_clusters() + 1;
    let k1 = tail_index(&first, ops1);
    let k2 = tail_index(&second, ops2);
    let self_branch = first.lambda.nth(k1) * first.delta
        + first.c_un
        + second.lambda.nth(k2) * second.delta
        + second.c_un;
    let cross_branch = T::lit(2.0)
        * (first.nu.nth(k1) * first.delta + first.c_uvn + second.nu.nth(k2) * second.delta + second.c_uvn);
    Ok(PairBoundReport {
        first,
        second,
        self_branch,
        cross_branch,
        bound_rhs: self_branch.max(cross_branch),
        lhs: None,
        solver_tolerance: None,
    })
}

/// `P = W₁^{-1/2} T W₂^{-1/2}`.
pub(crate) fn normalized_plan<T: Real>(t: &Mat<T>, m1: &[T], m2: &[T]) -> Result<Mat<T>> {
    let inv_sqrt = |m: &[T], side: &'static str| -> Result<Vec<T>> {
        m.iter()
            .enumerate()
            .map(|(index, &x)| {
                if x > T::zero() {
                    Ok(T::one() / x.sqrt())
                } else {
                    Err(Error::DegenerateMarginal { side, index })
                }
            })
            .collect()
    };
    Ok(t.scale_rows_cols(&inv_sqrt(m1, "source")?, &inv_sqrt(m2, "target")?))
}

/// Mean relative error of the top-`k` eigenvalues, `(1/k) Σ_{i≤k} (λ_i − λ⁽ᶜ⁾_i)/λ_i`.
pub fn spectrum_error_top_k<T: Real>(
    net: &MeasureNetwork<T>,
    ops: &CoarseningOperators<T>,
    k: usize,
) -> Result<T> {
    let spectra = compression_spectra(net, ops)?;
    top_k_relative_error(&spectra.lambda, &spectra.lambda_c, k)
}

pub fn top_k_relative_error<T: Real>(lambda: &Spectrum<T>, lambda_c: &Spectrum<T>, k: usize) -> Result<T> {
    if k == 0 || k > lambda_c.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {k} must lie in [1, {}]",
            lambda_c.len()
        )));
    }
    let mut acc = T::zero();
    for i in 1..=k {
        let l = lambda.nth(i);
        if l == T::zero() {
            return Err(Error::ZeroEigenvalue { index: i });
        }
        acc += (l - lambda_c.nth(i)) / l;
    }
    Ok(acc / T::of_usize(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarsening::{build_operators, Partition};
    use crate::graph::{to_measure_network, Graph, MassScheme, SimilarityKind};

    fn toy() -> (MeasureNetwork, CoarseningOperators) {
        let g: Graph = Graph::unweighted(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let net = to_measure_network(&g, SimilarityKind::SignlessLaplacian, MassScheme::Uniform).unwrap();
        let ops = build_operators(&Partition::new(vec![0, 1, 1], 2).unwrap(), net.masses()).unwrap();
        (net, ops)
    }

    #[test]
    fn toy_delta_vanishes() {
        let (net, ops) = toy();
        let sd = spectral_difference(&net, &ops).unwrap();
        assert!(sd.delta.abs() < 1e-12);
        let lam = sd.spectra.lambda.values();
        assert!((lam[0] - 4.0 / 3.0).abs() < 1e-12 && (lam[2] - 1.0 / 3.0).abs() < 1e-12);
        assert!((sd.delta + lam[2] - sd.trace_form - lam[2]).abs() < 1e-9);
    }

    #[test]
    fn toy_bound_values() {
        let (net, ops) = toy();
        let r = bound_single(&net, &ops).unwrap();
        assert!((r.bound_rhs - 13.0 / 9.0).abs() < 1e-9);
        assert!((r.membership_cost - 1.0 / 9.0).abs() < 1e-9);
        assert!((r.membership_cost_frobenius - 1.0 / 9.0).abs() < 1e-9);
        assert!(r.gap > 0.0);
    }

    #[test]
    fn identity_partition_is_tight() {
        let (net, _) = toy();
        let ops = build_operators(&Partition::identity(3), net.masses()).unwrap();
        let r = bound_single(&net, &ops).unwrap();
        assert!(r.delta.abs() < 1e-12);
        assert!(r.bound_rhs.abs() < 1e-12);
        assert!(r.membership_cost.abs() < 1e-12);
        assert!(spectrum_error_top_k(&net, &ops, 3).unwrap().abs() < 1e-12);
    }

    #[test]
    fn toy_top_two_preserved() {
        let (net, ops) = toy();
        assert!(spectrum_error_top_k(&net, &ops, 2).unwrap().abs() < 1e-12);
        assert!(spectrum_error_top_k(&net, &ops, 3).is_err());
    }

    #[test]
    fn zero_eigenvalue_is_reported() {
        let net = MeasureNetwork::new(Mat::from_rows(&[[0.0, 0.0], [0.0, 0.0]]), vec![1.0, 1.0]).unwrap();
        let ops = build_operators(&Partition::identity(2), net.masses()).unwrap();
        assert!(matches!(
            spectrum_error_top_k(&net, &ops, 1),
            Err(Error::ZeroEigenvalue { index: 1 })
        ));
    }

    #[test]
    fn not_psd_is_rejected() {
        let net = MeasureNetwork::new(Mat::from_rows(&[[0.0, 1.0], [1.0, 0.0]]), vec![1.0, 1.0]).unwrap();
        let ops = build_operators(&Partition::single(2), net.masses()).unwrap();
        assert!(matches!(bound_single(&net, &ops), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn identical_pair_with_diagonal_plan() {
        let (net, ops) = toy();
        let plan = TransportPlan::diagonal(net.masses());
        let r = bound_pair(&net, &ops, &net, &ops, &plan).unwrap();
        for (a, b) in r.first.nu.values().iter().zip(r.first.lambda.values()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(r.self_branch >= -1e-8 && r.cross_branch >= -1e-8);
        assert!(r.bound_rhs >= r.self_branch && r.bound_rhs >= r.cross_branch);
    }

    #[test]
    fn infeasible_plan_is_rejected() {
        let (net, ops) = toy();
        let plan = TransportPlan::from_matrix_unchecked(Mat::diag(&[0.5, 0.25, 0.25]));
        assert!(matches!(
            bound_pair(&net, &ops, &net, &ops, &plan),
            Err(Error::InfeasiblePlan { .. })
        ));
    }
}
