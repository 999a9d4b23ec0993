//! Multi-block measures on `ℝ^{n₀} × ℝ^{n₁} × … × ℝ^{n_k}` with density
//! `ρ(x₀, |x₁|_{B₁}, …, |x_k|_{B_k})`.
//!
//! The radial marginal `ν(dx₀ dr) ∝ ρ(x₀, r) ∏ r_i^{n_i−1}` is log-concave and
//! is sampled by hit-and-run; block `i` is then `r_i·θ_i` with `θ_i` drawn from
//! the cone measure of `B_i`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{fill_cone, hit_and_run_log_concave, McmcOptions, UniformSampler};
use crate::batch::{Provenance, SampleBatch};
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::rng::RngStream;

type LogRho = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Joint profile `ρ(x₀, r₁, …, r_k)` with block dimensions.
#[derive(Clone)]
pub struct JointProfile {
    pub n0: usize,
    /// `n_i` for each radial block.
    pub block_dims: Vec<usize>,
    log_rho: LogRho,
    /// A point `(x₀, r)` with finite density, used as the chain start.
    pub start: Vec<f64>,
}

impl fmt::Debug for JointProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JointProfile")
            .field("n0", &self.n0)
            .field("block_dims", &self.block_dims)
            .field("start", &self.start)
            .finish()
    }
}

impl JointProfile {
    pub fn new<L>(n0: usize, block_dims: Vec<usize>, log_rho: L, start: Vec<f64>) -> Result<Self>
    where
        L: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(Error::InvalidParameter("need at least one block of positive dimension".into()));
        }
        let k = block_dims.len();
        if start.len() != n0 + k {
            return Err(Error::DimensionMismatch { expected: n0 + k, got: start.len() });
        }
        let joint = Self { n0, block_dims, log_rho: Arc::new(log_rho), start };
        if !joint.log_nu(&joint.start).is_finite() {
            return Err(Error::InvalidParameter("start point has zero density".into()));
        }
        Ok(joint)
    }

    pub fn k(&self) -> usize {
        self.block_dims.len()
    }

    /// `N = n₀ + Σ n_i`.
    pub fn total_dim(&self) -> usize {
        self.n0 + self.block_dims.iter().sum::<usize>()
    }

    pub fn log_rho(&self, x0: &[f64], r: &[f64]) -> f64 {
        (self.log_rho)(x0, r)
    }

    /// Unnormalized log density of `ν` at `y = (x₀, r)`.
    pub fn log_nu(&self, y: &[f64]) -> f64 {
        let (x0, r) = y.split_at(self.n0);
        let mut acc = 0.0;
        for (ri, ni) in r.iter().zip(&self.block_dims) {
            if *ri <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += (*ni as f64 - 1.0) * ri.ln();
        }
        acc + self.log_rho(x0, r)
    }
}

/// Draws of `(x₀, r)` from `ν`.
pub fn sample_nu(joint: &JointProfile, count: usize, rng: &mut RngStream, opts: &McmcOptions) -> Result<SampleBatch> {
    let n0 = joint.n0;
    let (data, diag) = hit_and_run_log_concave(
        |y| joint.log_nu(y),
        joint.start.clone(),
        count,
        rng,
        opts,
        |y| y[n0..].iter().sum(),
    )?;
    let mut prov = Provenance::exact("multiblock-nu", rng);
    prov.approximate = true;
    prov.mcmc = Some(diag);
    SampleBatch::new(n0 + joint.k(), data, prov)
}

/// Output of [`sample_multiblock`].
#[derive(Debug, Clone)]
pub struct MultiblockDraws {
    /// Full draws `(x₀, r₁θ₁, …, r_kθ_k)` in `ℝᴺ`.
    pub x: SampleBatch,
    /// The radial coordinates `(x₀, r)` used for each row.
    pub nu: SampleBatch,
}

/// Draws from the multi-block measure.
pub fn sample_multiblock(
    joint: &JointProfile,
    bodies: &[ConvexBody],
    count: usize,
    rng: &mut RngStream,
    opts: &McmcOptions,
) -> Result<MultiblockDraws> {
    if bodies.len() != joint.k() {
        return Err(Error::DimensionMismatch { expected: joint.k(), got: bodies.len() });
    }
    for (b, n) in bodies.iter().zip(&joint.block_dims) {
        if b.dim() != *n {
            return Err(Error::DimensionMismatch { expected: *n, got: b.dim() });
        }
    }
    let mut nu_rng = rng.derive("nu");
    let nu = sample_nu(joint, count, &mut nu_rng, opts)?;
    let mut thetas = Vec::with_capacity(bodies.len());
    let mut theta_rngs = Vec::new();
    for (i, b) in bodies.iter().enumerate() {
        let mut r = rng.derive(&format!("theta{i}"));
        let sampler = UniformSampler::new(b)?;
        thetas.push(fill_cone(&sampler, b, count, &mut r)?.0);
        theta_rngs.push(r);
    }
    let n0 = joint.n0;
    let dim = joint.total_dim();
    let mut data = Vec::with_capacity(count * dim);
    for (row, y) in nu.rows().enumerate() {
        data.extend_from_slice(&y[..n0]);
        for (i, ni) in joint.block_dims.iter().enumerate() {
            let r = y[n0 + i];
            data.extend(thetas[i][row * ni..(row + 1) * ni].iter().map(|t| r * t));
        }
    }
    let mut prov = Provenance::exact("multiblock", rng);
    prov.sub_streams.push(nu_rng.snapshot());
    prov.sub_streams.extend(theta_rngs.iter().map(|r| r.snapshot()));
    prov.approximate = true;
    prov.mcmc = nu.provenance.mcmc.clone();
    Ok(MultiblockDraws { x: SampleBatch::new(dim, data, prov)?, nu })
}

/// Central-difference estimate of `∂^{|idx|} f / ∂y_{idx}` at `y`.
fn mixed_partial<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], idx: &[usize], h: f64) -> f64 {
    let m = idx.len();
    let mut z = y.to_vec();
    let mut acc = 0.0;
    for mask in 0..(1u32 << m) {
        let mut sign = 1.0;
        for (b, &j) in idx.iter().enumerate() {
            if mask >> b & 1 == 1 {
                z[j] = y[j] - h;
                sign = -sign;
            } else {
                z[j] = y[j] + h;
            }
        }
        acc += sign * f(&z);
    }
    acc / (2.0 * h).powi(m as i32)
}

/// Unnormalized density of `(X₀, S)` in the `S·U` form of the multi-block
/// measure: `(−1)^k ∏ s_i^{n_i} ∂^k_{r₁…r_k} ρ(x₀, s)`, by finite differences.
pub fn scale_law_density(joint: &JointProfile, x0: &[f64], s: &[f64]) -> f64 {
    let k = joint.k();
    let y: Vec<f64> = x0.iter().chain(s).copied().collect();
    let rho = |z: &[f64]| {
        let (a, b) = z.split_at(joint.n0);
        joint.log_rho(a, b).exp()
    };
    let idx: Vec<usize> = (joint.n0..joint.n0 + k).collect();
    let h = finite_difference_step(k) * s.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let d = mixed_partial(&rho, &y, &idx, h);
    let weight: f64 = s.iter().zip(&joint.block_dims).map(|(si, ni)| si.powi(*ni as i32)).product();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    (sign * d * weight).max(0.0)
}

fn finite_difference_step(order: usize) -> f64 {
    f64::EPSILON.powf(1.0 / (order as f64 + 2.0)).max(1e-4)
}

/// Violations of one sign condition on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCount {
    pub label: String,
    pub checked: usize,
    pub violations: usize,
    /// Most negative value of the quantity required to be `≥ 0`.
    pub worst: f64,
    pub first_violation: Option<Vec<f64>>,
}

impl SignCount {
    pub fn fraction(&self) -> f64 {
        if self.checked == 0 { 0.0 } else { self.violations as f64 / self.checked as f64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub grid: usize,
    pub tolerance: f64,
    /// `−∂_j ρ ≥ 0` for each `j`.
    pub decreasing: Vec<SignCount>,
    /// `(−1)^j ∂^j_{k−j+1,…,k} ρ ≥ 0` for `j = 1..k`.
    pub alternating: Vec<SignCount>,
}

impl ConditionReport {
    pub fn condition_i_holds(&self) -> bool {
        self.decreasing.iter().all(|c| c.violations == 0)
    }

    pub fn condition_ii_holds(&self) -> bool {
        self.alternating.iter().all(|c| c.violations == 0)
    }

    pub fn passed(&self) -> bool {
        self.condition_i_holds() && self.condition_ii_holds()
    }
}

pub const SIGN_TOLERANCE: f64 = 1e-6;

/// Finite-difference sign checks of conditions (i) and (ii) for
/// `ρ(r₁, …, r_k)` on cell centres of a `grid^k` lattice over `domain`.
pub fn check_mixed_partial_signs<R>(rho: R, domain: &[(f64, f64)], grid: usize) -> ConditionReport
where
    R: Fn(&[f64]) -> f64,
{
    let k = domain.len();
    let scale = domain.iter().fold(0.0f64, |m, (a, b)| m.max(b - a));
    let mut decreasing: Vec<SignCount> = (0..k).map(|j| new_count(format!("-d{}", j + 1))).collect();
    let mut alternating: Vec<SignCount> = (1..=k)
        .map(|j| {
            let idx: Vec<String> = (k - j + 1..=k).map(|i| i.to_string()).collect();
            new_count(format!("(-1)^{j} d^{j}[{}]", idx.join(",")))
        })
        .collect();
    let total = grid.pow(k as u32);
    let mut y = vec![0.0; k];
    for cell in 0..total {
        let mut c = cell;
        for (yi, (a, b)) in y.iter_mut().zip(domain) {
            *yi = a + (b - a) * ((c % grid) as f64 + 0.5) / grid as f64;
            c /= grid;
        }
        for (j, count) in decreasing.iter_mut().enumerate() {
            let v = -mixed_partial(&rho, &y, &[j], finite_difference_step(1) * scale);
            record(count, v, &y);
        }
        for (j, count) in alternating.iter_mut().enumerate() {
            let order = j + 1;
            let idx: Vec<usize> = (k - order..k).collect();
            let d = mixed_partial(&rho, &y, &idx, finite_difference_step(order) * scale);
            let v = if order % 2 == 0 { d } else { -d };
            record(count, v, &y);
        }
    }
    ConditionReport { grid, tolerance: SIGN_TOLERANCE, decreasing, alternating }
}

fn new_count(label: String) -> SignCount {
    SignCount { label, checked: 0, violations: 0, worst: f64::INFINITY, first_violation: None }
}

fn record(count: &mut SignCount, v: f64, y: &[f64]) {
    count.checked += 1;
    count.worst = count.worst.min(v);
    if v < -SIGN_TOLERANCE {
        count.violations += 1;
        if count.first_violation.is_none() {
            count.first_violation = Some(y.to_vec());
        }
    }
}
