//! Two-sample comparisons: Kolmogorov–Smirnov and mixed moments.

use serde::{Deserialize, Serialize};

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::moments::{se_of_batch_means, SUB_BATCHES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
    pub alpha: f64,
    pub passed: bool,
}

/// Asymptotic critical value `√(−ln(α/2)/2)·√((n+m)/(nm))`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> KsResult {
    let statistic = ks_statistic(a, b);
    let critical = ks_critical(alpha, a.len(), b.len());
    KsResult { statistic, critical, alpha, passed: statistic < critical }
}

/// Exponent vectors of all monomials in `n` variables with total degree `1..=order`.
pub fn monomials(n: usize, order: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n {
            if prefix.iter().sum::<u32>() > 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(n, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, order, &mut Vec::new(), &mut out);
    out
}

/// Standard-error method for a batch of draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeMethod {
    /// Independent draws.
    Iid,
    /// Correlated draws (MCMC): means of 32 contiguous sub-batches.
    BatchMeans,
}

impl SeMethod {
    pub fn for_batch(batch: &SampleBatch) -> Self {
        if batch.provenance.approximate { Self::BatchMeans } else { Self::Iid }
    }
}

/// Empirical means and i.i.d. standard errors of each monomial.
pub fn monomial_means(batch: &SampleBatch, monos: &[Vec<u32>]) -> Vec<(f64, f64)> {
    monomial_means_with(batch, monos, SeMethod::Iid)
}

pub fn monomial_means_with(batch: &SampleBatch, monos: &[Vec<u32>], method: SeMethod) -> Vec<(f64, f64)> {
    let n = batch.dim();
    let count = batch.count();
    let order = monos.iter().flatten().copied().max().unwrap_or(0) as usize;
    let factors: Vec<Vec<(usize, usize)>> = monos
        .iter()
        .map(|m| m.iter().enumerate().filter(|(_, e)| **e > 0).map(|(j, e)| (j, *e as usize)).collect())
        .collect();
    let groups = match method {
        SeMethod::Iid => 1,
        SeMethod::BatchMeans => SUB_BATCHES.min(count).max(1),
    };
    let size = count / groups;
    let mut sum = vec![0.0; monos.len()];
    let mut sumsq = vec![0.0; monos.len()];
    let mut group = vec![vec![0.0; monos.len()]; groups];
    let mut pow = vec![1.0; n * (order + 1)];
    for (r, row) in batch.rows().enumerate() {
        for (j, x) in row.iter().enumerate() {
            for e in 1..=order {
                pow[j * (order + 1) + e] = pow[j * (order + 1) + e - 1] * x;
            }
        }
        let g = (r / size.max(1)).min(groups - 1);
        for (k, f) in factors.iter().enumerate() {
            let v = f.iter().fold(1.0, |p, (j, e)| p * pow[j * (order + 1) + e]);
            sum[k] += v;
            sumsq[k] += v * v;
            group[g][k] += v;
        }
    }
    let c = count as f64;
    (0..monos.len())
        .map(|k| {
            let m = sum[k] / c;
            let se = match method {
                SeMethod::Iid => {
                    let var = ((sumsq[k] / c - m * m) * c / (c - 1.0)).max(0.0);
                    (var / c).sqrt()
                }
                SeMethod::BatchMeans => {
                    // the last group absorbs the remainder
                    let means: Vec<f64> = (0..groups)
                        .map(|g| {
                            let len = if g + 1 == groups { count - g * size } else { size };
                            group[g][k] / len as f64
                        })
                        .collect();
                    se_of_batch_means(&means)
                }
            };
            (m, se)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentComparison {
    pub monomials: usize,
    /// Largest `|m_a − m_b| / √(se_a² + se_b²)`.
    pub max_z: f64,
    pub worst_monomial: Vec<u32>,
    pub se_gate: f64,
    pub passed: bool,
}

/// Compare all mixed moments up to `order` of two independent batches, with
/// i.i.d. errors for exact draws and batch-means errors for MCMC draws.
pub fn compare_mixed_moments(a: &SampleBatch, b: &SampleBatch, order: u32, se_gate: f64) -> Result<MomentComparison> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let monos = monomials(a.dim(), order);
    let ma = monomial_means_with(a, &monos, SeMethod::for_batch(a));
    let mb = monomial_means_with(b, &monos, SeMethod::for_batch(b));
    let mut max_z = 0.0f64;
    let mut worst = monos[0].clone();
    for ((x, y), m) in ma.iter().zip(&mb).zip(&monos) {
        let se = (x.1 * x.1 + y.1 * y.1).sqrt();
        let z = if se > 0.0 { (x.0 - y.0).abs() / se } else if x.0 == y.0 { 0.0 } else { f64::INFINITY };
        if z > max_z {
            max_z = z;
            worst = m.clone();
        }
    }
    Ok(MomentComparison { monomials: monos.len(), max_z, worst_monomial: worst, se_gate, passed: max_z <= se_gate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::Provenance;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn critical_value_at_one_in_a_thousand() {
        let c = ks_critical(0.001, 1, 1) / 2f64.sqrt();
        assert!((c - 1.9495).abs() < 1e-4, "{c}");
    }

    #[test]
    fn ks_on_known_samples() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_statistic(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_separates_shifted_uniforms() {
        let mut rng = RngStream::new(1, 0);
        let a: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
        let c: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>() + 0.05).collect();
        assert!(ks_two_sample(&a, &b, 0.001).passed);
        assert!(!ks_two_sample(&a, &c, 0.001).passed);
    }

    #[test]
    fn monomial_count() {
        // C(n + 4, 4) − 1
        assert_eq!(monomials(2, 4).len(), 14);
        assert_eq!(monomials(3, 4).len(), 34);
        assert_eq!(monomials(5, 4).len(), 125);
    }

    #[test]
    fn moments_of_constant_rows() {
        let b = SampleBatch::new(2, [2.0, -1.0].repeat(10), Provenance::exact("c", &RngStream::new(0, 0))).unwrap();
        let m = monomial_means(&b, &[vec![2, 1], vec![0, 3]]);
        assert_eq!(m, vec![(-4.0, 0.0), (-1.0, 0.0)]);
        assert!(compare_mixed_moments(&b, &b, 4, 4.0).unwrap().passed);
    }

    #[test]
    fn batch_means_errors_see_autocorrelation() {
        // AR(1) with coefficient 0.9: the i.i.d. error understates by about √19
        let mut rng = RngStream::new(2, 0);
        let mut x = 0.0;
        let data: Vec<f64> = (0..64_000)
            .map(|_| {
                x = 0.9 * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        let b = SampleBatch::new(1, data, Provenance::exact("ar", &RngStream::new(0, 0))).unwrap();
        let monos = vec![vec![1]];
        let iid = monomial_means_with(&b, &monos, SeMethod::Iid)[0];
        let bm = monomial_means_with(&b, &monos, SeMethod::BatchMeans)[0];
        assert_eq!(iid.0, bm.0);
        assert!(bm.1 > 2.5 * iid.1, "{iid:?} {bm:?}");
    }
}
