//! Squared-loss Gromov–Wasserstein cost and its conditional-gradient solver.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ot::solve_inner_ot;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, Mat};
use crate::network::MeasureNetwork;
use crate::scalar::Real;
use crate::spectral::normalized_plan;
use crate::transport::TransportPlan;

/// Plan-independent and plan-dependent parts of the squared GW cost,
/// `cost = I₁ + I₂ − 2 I₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GwTerms<T: Real = f64> {
    /// `Tr((W₁^{1/2} S₁ W₁^{1/2})²)`.
    pub i1: T,
    /// `Tr((W₂^{1/2} S₂ W₂^{1/2})²)`.
    pub i2: T,
    /// `Tr(S₁ T S₂ Tᵀ)`.
    pub i3: T,
}

impl<T: Real> GwTerms<T> {
    pub fn cost(&self) -> T {
        self.i1 + self.i2 - T::lit(2.0) * self.i3
    }
}

/// `Σ_ij m_i m_j s_ij²`, equal to `Tr(U²)`.
fn self_term<T: Real>(net: &MeasureNetwork<T>) -> T {
    let s = net.similarity();
    let m = net.masses();
    let mut acc = T::zero();
    for i in 0..s.rows() {
        let mut row = T::zero();
        for j in 0..s.cols() {
            row += m[j] * s[(i, j)] * s[(i, j)];
        }
        acc += m[i] * row;
    }
    acc
}

/// `Tr(S₁ T S₂ Tᵀ) = ⟨S₁ T, T S₂⟩`.
fn cross_term<T: Real>(s1: &Mat<T>, t: &Mat<T>, s2: &Mat<T>) -> T {
    s1.matmul(t).dot(&t.matmul(s2))
}

pub fn decompose_i123<T: Real>(
    net1: &MeasureNetwork<T>,
    net2: &MeasureNetwork<T>,
    plan: &TransportPlan<T>,
) -> Result<GwTerms<T>> {
    plan.check_couples(net1.masses(), net2.masses())?;
    Ok(GwTerms {
        i1: self_term(net1),
        i2: self_term(net2),
        i3: cross_term(net1.similarity(), plan.matrix(), net2.similarity()),
    })
}

/// Cross-graph dissimilarity for the squared loss written as
/// `L(a, b) = f₁(a) + f₂(b) − h₁(a) h₂(b)` with `f₁ = a²`, `f₂ = b²`,
/// `h₁ = a`, `h₂ = 2b`:
///
/// `M(T) = f₁(S₁) m₁ 1ᵀ + 1 m₂ᵀ f₂(S₂)ᵀ − h₁(S₁) T h₂(S₂)ᵀ`.
///
/// `⟨M(T), T⟩` is the GW cost and `2 M(T)` its gradient.
pub fn dissimilarity_matrix<T: Real>(
    net1: &MeasureNetwork<T>,
    net2: &MeasureNetwork<T>,
    plan: &Mat<T>,
) -> Mat<T> {
    let (row_part, col_part) = constant_parts(net1, net2);
    let coupling = net1.similarity().matmul(plan).matmul(net2.similarity());
    let two = T::lit(2.0);
    Mat::from_fn(net1.size(), net2.size(), |i, j| row_part[i] + col_part[j] - two * coupling[(i, j)])
}

/// `(f₁(S₁) m₁, f₂(S₂) m₂)`.
fn constant_parts<T: Real>(net1: &MeasureNetwork<T>, net2: &MeasureNetwork<T>) -> (Vec<T>, Vec<T>) {
    let part = |net: &MeasureNetwork<T>| -> Vec<T> {
        let s = net.similarity();
        let m = net.masses();
        (0..s.rows())
            .map(|i| (0..s.cols()).map(|j| s[(i, j)] * s[(i, j)] * m[j]).sum())
            .collect()
    };
    (part(net1), part(net2))
}

/// `Σ (s¹_ij − s²_{i'j'})² T_{ii'} T_{jj'}` for a feasible plan.
pub fn gw_cost<T: Real>(
    net1: &MeasureNetwork<T>,
    net2: &MeasureNetwork<T>,
    plan: &TransportPlan<T>,
) -> Result<T> {
    plan.check_couples(net1.masses(), net2.masses())?;
    Ok(dissimilarity_matrix(net1, net2, plan.matrix()).dot(plan.matrix()))
}

/// Starting plan of a conditional-gradient run.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GwInit<T: Real = f64> {
    /// `m₁ m₂ᵀ`.
    Product,
    /// `diag(m)`; needs equal sizes and masses.
    Identity,
    /// A caller-supplied feasible plan, typically the membership plan `W C_pᵀ`.
    Membership(TransportPlan<T>),
    /// Random vertex of the coupling polytope blended with the product plan.
    Random(u64),
}

#[derive(Debug, Clone, Serialize)]
pub struct GwConfig<T: Real = f64> {
    pub max_iter: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tol: T,
    /// Total number of starts, the configured `init` first.
    pub restarts: usize,
    pub init: GwInit<T>,
    /// Seed for the random starts filling the restart schedule.
    pub seed: u64,
}

impl<T: Real> Default for GwConfig<T> {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: T::lit(1e-9),
            restarts: 4,
            init: GwInit::Product,
            seed: 0,
        }
    }
}

impl<T: Real> GwConfig<T> {
    pub fn with_init(mut self, init: GwInit<T>) -> Self {
        self.init = init;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The configured start, then the product plan, then seeded random starts.
    pub fn schedule(&self) -> Vec<GwInit<T>> {
        let mut out = vec![self.init.clone()];
        let total = self.restarts.max(1);
        if out.len() < total && !matches!(self.init, GwInit::Product) {
            out.push(GwInit::Product);
        }
        let mut k = 0u64;
        while out.len() < total {
            out.push(GwInit::Random(self.seed.wrapping_add(k)));
            k += 1;
        }
        out
    }
}

/// Outcome of a restarted conditional-gradient solve.
#[derive(Debug, Clone, Serialize)]
pub struct GwResult<T: Real = f64> {
    /// Squared GW₂ value of the best plan found.
    pub value: T,
    pub plan: TransportPlan<T>,
    /// Iterations of the best restart.
    pub iterations: usize,
    pub restarts_used: usize,
    /// Whether the best restart met the stopping rule before `max_iter`.
    pub converged: bool,
    /// Objective per iteration of the best restart.
    pub trace: Vec<T>,
    /// Final objective of every restart, in schedule order.
    pub restart_values: Vec<T>,
}

impl<T: Real> GwResult<T> {
    /// Largest minus smallest final value across restarts.
    pub fn restart_spread(&self) -> T {
        let lo = self.restart_values.iter().copied().fold(T::infinity(), T::min);
        let hi = self.restart_values.iter().copied().fold(T::neg_infinity(), T::max);
        hi - lo
    }
}

struct RunOutcome<T: Real> {
    value: T,
    plan: Mat<T>,
    iterations: usize,
    converged: bool,
    trace: Vec<T>,
}

/// Squared GW₂ distance by Frank–Wolfe with exact line search and restarts.
///
/// The pair is always solved in a canonical orientation and the plan
/// transposed back, so `solve_gw(a, b)` and `solve_gw(b, a)` agree exactly.
pub fn solve_gw<T: Real>(
    net1: &MeasureNetwork<T>,
    net2: &MeasureNetwork<T>,
    cfg: &GwConfig<T>,
) -> Result<GwResult<T>> {
    if cfg.max_iter == 0 {
        return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
    }
    if orientation(net1, net2) != Ordering::Greater {
        return solve_oriented(net1, net2, cfg);
    }
    let mut swapped = cfg.clone();
    if let GwInit::Membership(plan) = &cfg.init {
        swapped.init = GwInit::Membership(plan.transpose());
    }
    let res = solve_oriented(net2, net1, &swapped)?;
    Ok(GwResult {
        plan: res.plan.transpose(),
        ..res
    })
}

/// Orders networks by size, then masses, then similarity entries.
fn orientation<T: Real>(a: &MeasureNetwork<T>, b: &MeasureNetwork<T>) -> Ordering {
    let cmp = |x: &[T], y: &[T]| {
        x.iter()
            .zip(y)
            .map(|(p, q)| p.as_f64().total_cmp(&q.as_f64()))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    };
    a.size()
        .cmp(&b.size())
        .then_with(|| cmp(a.masses(), b.masses()))
        .then_with(|| cmp(a.similarity().as_slice(), b.similarity().as_slice()))
}

fn solve_oriented<T: Real>(
    net1: &MeasureNetwork<T>,
    net2: &MeasureNetwork<T>,
    cfg: &GwConfig<T>,
) -> Result<GwResult<T>> {
    let i1 = self_term(net1);
    let i2 = self_term(net2);
    let schedule = cfg.schedule();
    let mut best: Option<RunOutcome<T>> = None;
    let mut restart_values = Vec::with_capacity(schedule.len());
    for init in &schedule {
        let start = initial_plan(net1, net2, init)?;
        let run = frank_wolfe(net1, net2, start, i1 + i2, cfg)?;
        restart_values.push(run.value);
        if best.as_ref().map_or(true, |b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("schedule is never empty");
    if !best.converged {
        log::warn!(
            "GW solve reached max_iter = {} without meeting the stopping rule",
            cfg.max_iter
        );
    }
    Ok(GwResult {
        value: best.value,
        plan: TransportPlan::new(best.plan, net1.masses().to_vec(), net2.masses().to_vec())?,
        iterations: best.iterations,
        restarts_used: schedule.len(),
        converged: best.converged,
        trace: best.trace,
        restart_values,
    })
}

fn initial_plan<T: Real>(net1: &MeasureNetwork<T>, net2: &MeasureNetwork<T>, init: &GwInit<T>) -> Result<Mat<T>> {
    let (m1, m2) = (net1.masses(), net2.masses());
    match init {
        GwInit::Product => Ok(TransportPlan::product(m1, m2).into_matrix()),
        GwInit::Identity => {
            if m1.len() != m2.len() {
                return Err(Error::InvalidConfig("identity init needs equal network sizes".into()));
            }
            let drift = m1.iter().zip(m2).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
            if drift > T::tol(1e-12) {
                return Err(Error::InvalidConfig("identity init needs equal node masses".into()));
            }
            Ok(Mat::diag(m1))
        }
        GwInit::Membership(plan) => {
            plan.check_couples(m1, m2)?;
            Ok(plan.matrix().clone())
        }
        GwInit::Random(seed) => {
            let cost = transpose_consistent_noise::<T>(*seed, m1.len(), m2.len());
            let vertex = solve_inner_ot(&cost, m1, m2)?.into_matrix();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let w = T::lit(rng.gen_range(0.5..1.0));
            let product = TransportPlan::product(m1, m2).into_matrix();
            Ok(&vertex.scale(w) + &product.scale(T::one() - w))
        }
    }
}

/// Random cost whose entry `(i, j)` depends only on `{i, j}`, so swapping the
/// two networks transposes the random start.
fn transpose_consistent_noise<T: Real>(seed: u64, rows: usize, cols: usize) -> Mat<T> {
    Mat::from_fn(rows, cols, |i, j| {
        let (lo, hi) = (i.min(j) as u64, i.max(j) as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((lo << 32) | hi);
        T::lit(rng.gen::<f64>())
    })
}

fn frank_wolfe<T: Real>(
    net1: &MeasureNetwork<T>,
    net2: &MeasureNetwork<T>,
    start: Mat<T>,
    constant: T,
    cfg: &GwConfig<T>,
) -> Result<RunOutcome<T>> {
    let s1 = net1.similarity();
    let s2 = net2.similarity();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut plan = start;
    let mut value = constant - two * cross_term(s1, &plan, s2);
    let mut trace = vec![value];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let gradient = dissimilarity_matrix(net1, net2, &plan);
        let target = solve_inner_ot(&gradient, net1.masses(), net2.masses())?.into_matrix();
        let direction = &target - &plan;

        // J(T + γD) = J(T) + bγ + aγ²
        let s1d = s1.matmul(&direction);
        let a = -two * s1d.dot(&direction.matmul(s2));
        let b = -four * s1d.dot(&plan.matmul(s2));
        let gamma = if a > T::zero() {
            (-b / (two * a)).max(T::zero()).min(T::one())
        } else if a + b < T::zero() {
            T::one()
        } else {
            T::zero()
        };
        if gamma == T::zero() || b >= T::zero() {
            converged = true;
            trace.push(value);
            break;
        }
        let candidate = &plan + &direction.scale(gamma);
        let new_value = constant - two * cross_term(s1, &candidate, s2);
        if new_value > value {
            // Rounding made the step useless; the quadratic says it cannot ascend.
            converged = true;
            trace.push(value);
            break;
        }
        let decrease = value - new_value;
        plan = candidate;
        value = new_value;
        trace.push(value);
        if decrease <= cfg.tol * value.abs().max(T::epsilon()) {
            converged = true;
            break;
        }
    }
    // Clean up rounding so the plan passes feasibility checks.
    let plan = plan.map(|x| x.max(T::zero()));
    Ok(RunOutcome {
        value,
        plan,
        iterations,
        converged,
        trace,
    })
}

/// Closed-form optimal coarse similarity for a fixed plan,
/// `diag(m⁽ᶜ⁾)⁻¹ Tᵀ S T diag(m⁽ᶜ⁾)⁻¹` with `m⁽ᶜ⁾ = Tᵀ 1`.
pub fn srgw_optimal_similarity<T: Real>(net: &MeasureNetwork<T>, plan: &TransportPlan<T>) -> Result<Mat<T>> {
    let t = plan.matrix();
    if t.rows() != net.size() {
        return Err(Error::DimensionMismatch {
            what: "plan rows vs. network size",
            expected: net.size(),
            found: t.rows(),
        });
    }
    let col = t.col_sums();
    let mut inv = Vec::with_capacity(col.len());
    for (cluster, &c) in col.iter().enumerate() {
        if !(c > T::zero()) {
            return Err(Error::ZeroClusterMass { cluster });
        }
        inv.push(T::one() / c);
    }
    let inner = t.transpose().matmul(net.similarity()).matmul(t);
    Ok(inner.scale_rows_cols(&inv, &inv).symmetrized())
}

/// Spectral norm of `P = W₁^{-1/2} T W₂^{-1/2}` with `W₁, W₂` the plan's own marginals.
pub fn normalized_plan_norm<T: Real>(plan: &Mat<T>) -> Result<T> {
    let rows = plan.row_sums();
    let cols = plan.col_sums();
    if rows.iter().chain(&cols).any(|&x| !(x > T::zero())) {
        return Err(Error::DegenerateMarginal {
            side: if rows.iter().any(|&x| !(x > T::zero())) { "source" } else { "target" },
            index: rows
                .iter()
                .position(|&x| !(x > T::zero()))
                .or_else(|| cols.iter().position(|&x| !(x > T::zero())))
                .unwrap_or(0),
        });
    }
    spectral_norm(&normalized_plan(plan, &rows, &cols)?)
}
