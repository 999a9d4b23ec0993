//! Streaming moments, isotropy diagnostics and whitening.

use serde::{Deserialize, Serialize};

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::hexfloat::hex_mirror;
use crate::linalg::{jacobi_eigen, mat_vec};
use crate::scalar::Field;

/// Number of sub-batches used for batch-means standard errors.
pub const SUB_BATCHES: usize = 32;

/// Single-pass accumulator of count, mean, scatter matrix and the first two
/// moments of `|X|²`.
///
/// `merge` uses the pairwise update of Chan et al. Over an exact field the
/// state after any sequence of pushes and merges is the exact sample mean and
/// scatter of the union, so merging is associative and commutative exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator<F: Field = f64> {
    dim: usize,
    count: u64,
    mean: Vec<F>,
    /// `Σ (x − m)(x − m)ᵀ`, row-major.
    scatter: Vec<F>,
    norm_mean: F,
    norm_scatter: F,
}

impl<F: Field> MomentAccumulator<F> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            count: 0,
            mean: vec![F::zero(); dim],
            scatter: vec![F::zero(); dim * dim],
            norm_mean: F::zero(),
            norm_scatter: F::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.dim, "row width");
        self.count += 1;
        let n = F::from_count(self.count);
        let xs: Vec<F> = x.iter().map(|&v| F::from_sample(v)).collect();
        let delta: Vec<F> = xs.iter().zip(&self.mean).map(|(a, m)| a.clone() - m.clone()).collect();
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m = m.clone() + d.clone() / n.clone();
        }
        let after: Vec<F> = xs.iter().zip(&self.mean).map(|(a, m)| a.clone() - m.clone()).collect();
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                let s = &mut self.scatter[i * d + j];
                *s = s.clone() + delta[i].clone() * after[j].clone();
            }
        }
        let q = xs.iter().fold(F::zero(), |s, v| s + v.clone() * v.clone());
        let dq = q.clone() - self.norm_mean.clone();
        self.norm_mean = self.norm_mean.clone() + dq.clone() / n;
        self.norm_scatter = self.norm_scatter.clone() + dq * (q - self.norm_mean.clone());
    }

    pub fn merge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "merge of different dimensions");
        if other.count == 0 {
            return self.clone();
        }
        if self.count == 0 {
            return other.clone();
        }
        let (na, nb) = (F::from_count(self.count), F::from_count(other.count));
        let n = na.clone() + nb.clone();
        let w = na.clone() * nb.clone() / n.clone();
        let delta: Vec<F> = other.mean.iter().zip(&self.mean).map(|(b, a)| b.clone() - a.clone()).collect();
        let mean = self
            .mean
            .iter()
            .zip(&delta)
            .map(|(a, d)| a.clone() + d.clone() * nb.clone() / n.clone())
            .collect();
        let d = self.dim;
        let mut scatter = vec![F::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                scatter[i * d + j] = self.scatter[i * d + j].clone()
                    + other.scatter[i * d + j].clone()
                    + delta[i].clone() * delta[j].clone() * w.clone();
            }
        }
        let dq = other.norm_mean.clone() - self.norm_mean.clone();
        Self {
            dim: d,
            count: self.count + other.count,
            mean,
            scatter,
            norm_mean: self.norm_mean.clone() + dq.clone() * nb / n,
            norm_scatter: self.norm_scatter.clone() + other.norm_scatter.clone() + dq.clone() * dq * w,
        }
    }

    pub fn mean(&self) -> &[F] {
        &self.mean
    }

    /// Population covariance `scatter / count`.
    pub fn covariance(&self) -> Vec<F> {
        let n = F::from_count(self.count.max(1));
        self.scatter.iter().map(|s| s.clone() / n.clone()).collect()
    }

    /// `E|X|²`.
    pub fn second_moment(&self) -> F {
        self.norm_mean.clone()
    }

    /// Population variance of `|X|²`.
    pub fn var_norm_sq(&self) -> F {
        self.norm_scatter.clone() / F::from_count(self.count.max(1))
    }

    fn point(&self) -> Point {
        let f = |v: &F| v.to_f64_lossy();
        Point {
            mean: self.mean.iter().map(f).collect(),
            covariance: self.covariance().iter().map(f).collect(),
            second_moment: f(&self.second_moment()),
            var_norm_sq: f(&self.var_norm_sq()),
        }
    }
}

struct Point {
    mean: Vec<f64>,
    covariance: Vec<f64>,
    second_moment: f64,
    var_norm_sq: f64,
}

/// Standard errors matching the fields of [`MomentSummary`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentErrors {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub second_moment: f64,
    pub var_norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub count: usize,
    pub dim: usize,
    pub mean: Vec<f64>,
    /// Population covariance.
    pub covariance: Vec<Vec<f64>>,
    /// `E|X|²`.
    pub second_moment: f64,
    /// `Var(|X|²)`.
    pub var_norm_sq: f64,
    pub std_errors: MomentErrors,
}

impl MomentSummary {
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.covariance[i][i]).sum()
    }

    pub fn covariance_flat(&self) -> Vec<f64> {
        self.covariance.iter().flatten().copied().collect()
    }

    /// JSON with decimal values and a `hex` mirror of every float.
    pub fn to_json(&self) -> serde_json::Value {
        let dec = serde_json::to_value(self).expect("summary serializes");
        serde_json::json!({ "decimal": dec, "hex": hex_mirror(&dec) })
    }
}

fn rows_of(flat: &[f64], n: usize) -> Vec<Vec<f64>> {
    flat.chunks(n).map(|c| c.to_vec()).collect()
}

/// Standard error of the mean of `values` (treated as batch means).
pub fn se_of_batch_means(values: &[f64]) -> f64 {
    let b = values.len() as f64;
    if b < 2.0 {
        return f64::NAN;
    }
    let m = values.iter().sum::<f64>() / b;
    let v = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1.0);
    (v / b).sqrt()
}

/// Mean of per-row values and its batch-means standard error.
pub fn batch_means(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let b = SUB_BATCHES.min(n);
    let size = n / b;
    let means: Vec<f64> = (0..b)
        .map(|i| values[i * size..(i + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    (mean, se_of_batch_means(&means))
}

/// Single-pass summary with batch-means standard errors over 32 sub-batches.
pub fn summarize(batch: &SampleBatch) -> Result<MomentSummary> {
    let count = batch.count();
    if count < 2 {
        return Err(Error::TooFewSamples { need: 2, got: count });
    }
    let n = batch.dim();
    let b = SUB_BATCHES.min(count);
    let size = count / b;
    let mut total = MomentAccumulator::<f64>::new(n);
    let mut parts = Vec::with_capacity(b);
    let mut current = MomentAccumulator::<f64>::new(n);
    for (i, row) in batch.rows().enumerate() {
        total.push(row);
        if i < b * size {
            current.push(row);
            if current.count() as usize == size {
                parts.push(current.point());
                current = MomentAccumulator::new(n);
            }
        }
    }
    let p = total.point();
    let se = |f: &dyn Fn(&Point) -> f64| se_of_batch_means(&parts.iter().map(f).collect::<Vec<_>>());
    let errors = MomentErrors {
        mean: (0..n).map(|j| se(&|q| q.mean[j])).collect(),
        covariance: (0..n).map(|i| (0..n).map(|j| se(&|q| q.covariance[i * n + j])).collect()).collect(),
        second_moment: se(&|q| q.second_moment),
        var_norm_sq: se(&|q| q.var_norm_sq),
    };
    Ok(MomentSummary {
        count,
        dim: n,
        mean: p.mean,
        covariance: rows_of(&p.covariance, n),
        second_moment: p.second_moment,
        var_norm_sq: p.var_norm_sq,
        std_errors: errors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyDiagnostic {
    pub mean_norm: f64,
    /// Largest over smallest covariance eigenvalue.
    pub diag_spread: f64,
    /// Largest `|off-diagonal|` over the mean diagonal entry.
    pub offdiag_ratio: f64,
    /// Largest deviation from isotropy in standard-error units, over mean
    /// components, diagonal entries and off-diagonal entries.
    pub max_deviation_se: f64,
    pub se_gate: f64,
    pub isotropic: bool,
}

/// Isotropy verdict under `se_gate` standard-error gates.
pub fn isotropy_check(s: &MomentSummary, se_gate: f64) -> IsotropyDiagnostic {
    let n = s.dim;
    let diag_mean = s.trace() / n as f64;
    let z = |v: f64, se: f64| if se > 0.0 { v.abs() / se } else if v == 0.0 { 0.0 } else { f64::INFINITY };
    let mut worst = 0.0f64;
    let mut offdiag = 0.0f64;
    for i in 0..n {
        worst = worst.max(z(s.mean[i], s.std_errors.mean[i]));
        for j in 0..n {
            let se = s.std_errors.covariance[i][j];
            if i == j {
                worst = worst.max(z(s.covariance[i][i] - diag_mean, se));
            } else {
                offdiag = offdiag.max(s.covariance[i][j].abs());
                worst = worst.max(z(s.covariance[i][j], se));
            }
        }
    }
    let eig = jacobi_eigen(&s.covariance_flat(), n, 1e-12).expect("square covariance");
    let (lo, hi) = (eig.values[0], eig.values[n - 1]);
    IsotropyDiagnostic {
        mean_norm: s.mean.iter().map(|v| v * v).sum::<f64>().sqrt(),
        diag_spread: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        offdiag_ratio: offdiag / diag_mean,
        max_deviation_se: worst,
        se_gate,
        isotropic: worst <= se_gate,
    }
}

/// Affine map `x ↦ M (x − mean)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub mean: Vec<f64>,
    /// Row-major `n×n`.
    pub matrix: Vec<f64>,
}

impl LinearMap {
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let c: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        mat_vec(&self.matrix, &c, out);
    }
}

/// Smallest admissible eigenvalue ratio for whitening.
pub const SINGULAR_RATIO: f64 = 1e-10;

/// Recentre and map by `c·Σ^{−1/2}` with `c² = tr Σ / n`, so the output has
/// covariance `(tr Σ / n)·I`.
pub fn whiten(batch: &SampleBatch) -> Result<(SampleBatch, LinearMap)> {
    let n = batch.dim();
    let mut acc = MomentAccumulator::<f64>::new(n);
    for row in batch.rows() {
        acc.push(row);
    }
    if acc.count() < 2 {
        return Err(Error::TooFewSamples { need: 2, got: acc.count() as usize });
    }
    let cov = acc.covariance();
    let eig = jacobi_eigen(&cov, n, 1e-14)?;
    let (lo, hi) = (eig.values[0], eig.values[n - 1]);
    if !(lo > SINGULAR_RATIO * hi) {
        return Err(Error::SingularCovariance { ratio: lo / hi });
    }
    let c = ((0..n).map(|i| cov[i * n + i]).sum::<f64>() / n as f64).sqrt();
    let map = LinearMap { mean: acc.mean().to_vec(), matrix: eig.map_values(|l| c / l.sqrt()) };
    let out = batch.map_rows(n, |x, o| map.apply(x, o))?;
    Ok((out, map))
}

/// One ratio of the block identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRatio {
    pub label: String,
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockIsotropyReport {
    /// `E|X₀|²/n₀` (when `n₀ > 0`), `E(S_i²)/n_i` for each block, `E|X|²/N`.
    pub ratios: Vec<BlockRatio>,
    /// `E|U_i|²`, which the identity assumes equal to 1.
    pub unit_norms: Vec<BlockRatio>,
    /// Largest pairwise `|r_a − r_b| / se(r_a − r_b)`.
    pub max_discrepancy_se: f64,
    pub se_gate: f64,
    pub passed: bool,
}

/// Compare `E|X₀|²/n₀`, `E(S_i²)/n_i` and `E|X|²/N` for `X = (X₀, S₁U₁, …, S_kU_k)`.
///
/// `x0` may be `None` when `n₀ = 0`. Batch-means errors of each pairwise
/// difference account for the dependence between the ratios.
pub fn block_isotropy_check(
    x0: Option<&SampleBatch>,
    scales: &[SampleBatch],
    uniforms: &[SampleBatch],
    se_gate: f64,
) -> Result<BlockIsotropyReport> {
    if scales.len() != uniforms.len() || scales.is_empty() {
        return Err(Error::InvalidParameter("need one scale batch per uniform block".into()));
    }
    let count = scales[0].count();
    let all_counts = x0.iter().map(|b| b.count()).chain(scales.iter().chain(uniforms).map(|b| b.count()));
    for c in all_counts {
        if c != count {
            return Err(Error::DimensionMismatch { expected: count, got: c });
        }
    }
    if let Some(s) = scales.iter().find(|s| s.dim() != 1) {
        return Err(Error::DimensionMismatch { expected: 1, got: s.dim() });
    }
    let n0 = x0.map_or(0, |b| b.dim());
    let total = n0 + uniforms.iter().map(|u| u.dim()).sum::<usize>();
    let mut labels = Vec::new();
    let mut series: Vec<Vec<f64>> = Vec::new();
    let sq = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    if let Some(b) = x0 {
        labels.push("E|X0|^2/n0".to_string());
        series.push(b.rows().map(|r| sq(r) / n0 as f64).collect());
    }
    for (i, (s, u)) in scales.iter().zip(uniforms).enumerate() {
        labels.push(format!("E(S{}^2)/n{}", i + 1, i + 1));
        series.push(s.data().iter().map(|v| v * v / u.dim() as f64).collect());
    }
    let xnorm: Vec<f64> = (0..count)
        .map(|r| {
            let mut q = x0.map_or(0.0, |b| sq(b.row(r)));
            for (s, u) in scales.iter().zip(uniforms) {
                q += s.data()[r].powi(2) * sq(u.row(r));
            }
            q / total as f64
        })
        .collect();
    labels.push("E|X|^2/N".to_string());
    series.push(xnorm);

    let ratios: Vec<BlockRatio> = labels
        .into_iter()
        .zip(&series)
        .map(|(label, v)| {
            let (value, se) = batch_means(v);
            BlockRatio { label, value, se }
        })
        .collect();
    let unit_norms = uniforms
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let (value, se) = batch_means(&u.rows().map(sq).collect::<Vec<_>>());
            BlockRatio { label: format!("E|U{}|^2", i + 1), value, se }
        })
        .collect();
    let mut worst = 0.0f64;
    for a in 0..series.len() {
        for b in a + 1..series.len() {
            let diff: Vec<f64> = series[a].iter().zip(&series[b]).map(|(x, y)| x - y).collect();
            let (d, se) = batch_means(&diff);
            worst = worst.max(if se > 0.0 { d.abs() / se } else { 0.0 });
        }
    }
    Ok(BlockIsotropyReport { ratios, unit_norms, max_discrepancy_se: worst, se_gate, passed: worst <= se_gate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::Provenance;
    use crate::geometry::{make_hypercube, make_lp_ball, make_simplex};
    use crate::rng::RngStream;
    use crate::samplers::sample_uniform_body;
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, count: usize, scales: &[f64], seed: u64) -> SampleBatch {
        let mut rng = RngStream::new(seed, 0);
        let data = (0..count * n).map(|i| scales[i % n] * rng.sample::<f64, _>(StandardNormal)).collect();
        SampleBatch::new(n, data, Provenance::exact("gauss", &rng)).unwrap()
    }

    #[test]
    fn hypercube_covariance() {
        let b = sample_uniform_body(&make_hypercube(3).unwrap(), 200_000, &mut RngStream::new(1, 0)).unwrap();
        let s = summarize(&b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((s.covariance[i][j] - target).abs() < 4.0 * s.std_errors.covariance[i][j]);
            }
        }
        let m2 = s.mean.iter().map(|v| v * v).sum::<f64>();
        assert!(((s.trace() + m2) - s.second_moment).abs() <= 1e-9 * s.second_moment);
        assert!(isotropy_check(&s, 4.0).isotropic);
    }

    #[test]
    fn ball_second_moment() {
        let b = sample_uniform_body(&make_lp_ball(4, 2.0).unwrap(), 200_000, &mut RngStream::new(2, 0)).unwrap();
        let s = summarize(&b).unwrap();
        assert!((s.second_moment - 4.0 / 6.0).abs() < 4.0 * s.std_errors.second_moment);
    }

    #[test]
    fn constant_batch() {
        let b = SampleBatch::new(2, [1.5, -2.0].repeat(100), Provenance::exact("c", &RngStream::new(0, 0))).unwrap();
        let s = summarize(&b).unwrap();
        assert_eq!(s.mean, vec![1.5, -2.0]);
        assert!(s.covariance.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(s.var_norm_sq, 0.0);
        let one = SampleBatch::new(2, vec![1.0, 2.0], Provenance::exact("c", &RngStream::new(0, 0))).unwrap();
        assert!(summarize(&one).is_err());
    }

    #[test]
    fn isotropy_verdicts() {
        for (body, seed) in [(make_lp_ball(3, 1.0).unwrap(), 3), (make_lp_ball(3, 4.0).unwrap(), 4), (make_simplex(3).unwrap(), 5)] {
            let b = sample_uniform_body(&body, 200_000, &mut RngStream::new(seed, 0)).unwrap();
            let d = isotropy_check(&summarize(&b).unwrap(), 4.0);
            assert!(d.isotropic, "{body:?} {d:?}");
        }
        let ellipse = gaussian(2, 100_000, &[1.0, 2.0], 6);
        let d = isotropy_check(&summarize(&ellipse).unwrap(), 4.0);
        assert!(!d.isotropic);
        assert!((d.diag_spread - 4.0).abs() < 0.1, "{}", d.diag_spread);
    }

    #[test]
    fn whitening() {
        let b = gaussian(2, 100_000, &[1.0, 2.0], 7);
        let (w, map) = whiten(&b).unwrap();
        let c = map.matrix[0];
        assert!((map.matrix[3] - c / 2.0).abs() < 0.02 * c);
        assert!(map.matrix[1].abs() < 0.02 * c);
        let s = summarize(&w).unwrap();
        let target = summarize(&b).unwrap().trace() / 2.0;
        for i in 0..2 {
            assert!(s.mean[i].abs() < 1e-9);
            for j in 0..2 {
                let t = if i == j { target } else { 0.0 };
                assert!((s.covariance[i][j] - t).abs() < 1e-9 * target);
            }
        }
        // idempotent
        let (_, again) = whiten(&w).unwrap();
        for (k, v) in again.matrix.iter().enumerate() {
            let id = if k % 3 == 0 { 1.0 } else { 0.0 };
            assert!((v - id).abs() < 1e-9);
        }
        let flat = SampleBatch::new(2, (0..200).map(|i| (i / 2) as f64).collect(), b.provenance.clone()).unwrap();
        assert!(matches!(whiten(&flat), Err(Error::SingularCovariance { .. })));
    }

    #[test]
    fn gaussian_block_ratios() {
        let count = 100_000;
        let x0 = gaussian(1, count, &[1.0], 8);
        let u = gaussian(3, count, &[1.0, 1.0, 1.0], 9);
        // write the Gaussian block as S·U with U uniform-free: S = |Y|, U = Y/|Y|
        let s_data: Vec<f64> = u.rows().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        let dirs = u.map_rows(3, |r, o| {
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            o.iter_mut().zip(r).for_each(|(o, v)| *o = v / norm);
        })
        .unwrap();
        let s = SampleBatch::new(1, s_data, u.provenance.clone()).unwrap();
        let rep = block_isotropy_check(Some(&x0), std::slice::from_ref(&s), std::slice::from_ref(&dirs), 4.0).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.ratios.iter().all(|r| (r.value - 1.0).abs() < 4.0 * r.se + 1e-12));
        let unscaled = s.scaled(1.5);
        assert!(!block_isotropy_check(Some(&x0), &[unscaled], &[dirs], 4.0).unwrap().passed);
    }

    #[test]
    fn summary_json_has_hex_mirror() {
        let b = gaussian(2, 64, &[1.0, 1.0], 10);
        let j = summarize(&b).unwrap().to_json();
        let dec = j["decimal"]["second_moment"].as_f64().unwrap();
        let hex = j["hex"]["second_moment"].as_str().unwrap();
        assert_eq!(crate::hexfloat::from_hex(hex).unwrap(), dec);
    }

    fn exact_of(rows: &[Vec<f64>]) -> MomentAccumulator<BigRational> {
        let mut a = MomentAccumulator::new(2);
        rows.iter().for_each(|r| a.push(r));
        a
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn exact_merge_is_associative(
            rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 2), 3..24),
            cut in (0.0f64..1.0, 0.0f64..1.0),
        ) {
            let n = rows.len();
            let (mut i, mut j) = (((cut.0 * n as f64) as usize).min(n), ((cut.1 * n as f64) as usize).min(n));
            if i > j { std::mem::swap(&mut i, &mut j); }
            let (a, b, c) = (exact_of(&rows[..i]), exact_of(&rows[i..j]), exact_of(&rows[j..]));
            let left = a.merge(&b).merge(&c);
            let right = a.merge(&b.merge(&c));
            prop_assert_eq!(&left, &right);
            prop_assert_eq!(&left, &exact_of(&rows));
            prop_assert_eq!(&c.merge(&a), &a.merge(&c));
        }

        #[test]
        fn float_merge_matches_sequential(rows in prop::collection::vec(prop::collection::vec(-10f64..10.0, 3), 2..50), k in 1usize..49) {
            let k = k.min(rows.len() - 1);
            let mut whole = MomentAccumulator::<f64>::new(3);
            let mut a = MomentAccumulator::<f64>::new(3);
            let mut b = MomentAccumulator::<f64>::new(3);
            for (i, r) in rows.iter().enumerate() {
                whole.push(r);
                if i < k { a.push(r) } else { b.push(r) }
            }
            let m = a.merge(&b);
            for (x, y) in m.covariance().iter().zip(whole.covariance()) {
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()));
            }
            prop_assert!((m.second_moment() - whole.second_moment()).abs() <= 1e-9 * (1.0 + whole.second_moment()));
        }
    }
}
