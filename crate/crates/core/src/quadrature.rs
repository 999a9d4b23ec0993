//! One-dimensional quadrature and tabulated inverse-CDF sampling.

use crate::error::{Error, Result};

const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Fixed 8-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL8_NODES
        .iter()
        .zip(GL8_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

const PANELS: usize = 64;
const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature with a relative tolerance on the total.
///
/// The interval is first split into 64 panels so that narrow features are not
/// missed by the initial five-point estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let width = (b - a) / PANELS as f64;
    let mut panels = Vec::with_capacity(PANELS);
    let mut coarse = 0.0;
    for i in 0..PANELS {
        let lo = a + width * i as f64;
        let hi = if i + 1 == PANELS { b } else { lo + width };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        coarse += whole;
        panels.push((lo, hi, flo, fmid, fhi, whole));
    }
    let eps = rel_tol * coarse.abs().max(f64::MIN_POSITIVE);
    panels
        .into_iter()
        .map(|(lo, hi, flo, fmid, fhi, whole)| {
            simpson_step(&f, lo, hi, flo, fmid, fhi, whole, eps / PANELS as f64, MAX_DEPTH)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// Locate the maximum of a log-concave log-density on `[lo, hi]` by grid scan
/// followed by golden-section refinement. Returns `(argmax, max)`.
pub fn log_density_peak<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> (f64, f64) {
    const GRID: usize = 1024;
    let step = (hi - lo) / GRID as f64;
    let mut best = (lo, g(lo));
    for i in 1..=GRID {
        let x = lo + step * i as f64;
        let v = g(x);
        if v > best.1 || best.1.is_nan() {
            best = (x, v);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if g(c) >= g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    let v = g(x);
    if v > best.1 {
        (x, v)
    } else {
        best
    }
}

/// Find an upper limit `q` for a unimodal log-density on `[0, ∞)` such that the
/// mass beyond `q` is below `tail_tol` relative to the mass on `[0, q]`.
pub fn find_tail_limit<G: Fn(f64) -> f64>(g: &G, start: f64, tail_tol: f64) -> Result<f64> {
    let mut q = start.max(1e-3);
    for _ in 0..200 {
        let (_, peak) = log_density_peak(g, 0.0, 4.0 * q);
        if !peak.is_finite() {
            return Err(Error::Tabulation(format!("non-finite log density near {q}")));
        }
        let h = |r: f64| scaled_exp(g(r), peak);
        let body = adaptive_simpson(h, 0.0, q, 1e-6);
        let tail = adaptive_simpson(h, q, 4.0 * q, 1e-6);
        // An increasing integrand on [q, 4q] means the density is not yet decaying.
        if body > 0.0 && tail <= tail_tol * body && g(4.0 * q) < g(q) {
            return Ok(q);
        }
        q *= 2.0;
    }
    Err(Error::Tabulation(
        "tail mass stays above tolerance after 200 doublings".into(),
    ))
}

#[inline]
pub(crate) fn scaled_exp(log_value: f64, shift: f64) -> f64 {
    if log_value == f64::NEG_INFINITY || log_value.is_nan() {
        0.0
    } else {
        (log_value - shift).exp()
    }
}

/// ln ∫₀^∞ r^(n−1) exp(log_rho(r)) dr, integrated numerically.
pub fn radial_log_moment<G: Fn(f64) -> f64>(n: usize, log_rho: G, cutoff: f64, rel_tol: f64) -> Result<f64> {
    let power = (n as f64) - 1.0;
    let g = |r: f64| {
        if r < 0.0 || r > cutoff {
            f64::NEG_INFINITY
        } else if r == 0.0 {
            if power == 0.0 {
                log_rho(0.0)
            } else {
                f64::NEG_INFINITY
            }
        } else {
            power * r.ln() + log_rho(r)
        }
    };
    let upper = if cutoff.is_finite() {
        cutoff
    } else {
        find_tail_limit(&g, 1.0, 1e-16).map_err(|_| Error::DivergentIntegral { n })?
    };
    let (_, peak) = log_density_peak(&g, 0.0, upper);
    if !peak.is_finite() {
        return Err(Error::DivergentIntegral { n });
    }
    let integral = adaptive_simpson(|r| scaled_exp(g(r), peak), 0.0, upper, rel_tol);
    Ok(peak + integral.ln())
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson).
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` must be strictly increasing; `ys` monotone.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::Tabulation("need at least two interpolation nodes".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Tabulation("interpolation abscissae not increasing".into()));
        }
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = secants[0];
            slopes[1] = secants[0];
        } else {
            for i in 1..n - 1 {
                let (d0, d1) = (secants[i - 1], secants[i]);
                if d0 * d1 <= 0.0 {
                    slopes[i] = 0.0;
                } else {
                    let h0 = xs[i] - xs[i - 1];
                    let h1 = xs[i + 1] - xs[i];
                    let w1 = 2.0 * h1 + h0;
                    let w2 = h1 + 2.0 * h0;
                    slopes[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = end_slope(xs[1] - xs[0], xs[2] - xs[1], secants[0], secants[1]);
            slopes[n - 1] = end_slope(
                xs[n - 1] - xs[n - 2],
                xs[n - 2] - xs[n - 3],
                secants[n - 2],
                secants[n - 3],
            );
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// Node placement for [`InverseCdf`] tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSpacing {
    /// 0 followed by geometric nodes from `hi·1e−6` to `hi`; `lo` must be 0.
    Logarithmic,
    Uniform,
}

pub const TABLE_NODES: usize = 2048;

/// Inverse CDF tabulated from an unnormalized log-density on a bounded range.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    interp: MonotoneCubic,
    lo: f64,
    hi: f64,
}

impl InverseCdf {
    pub fn from_log_density<G: Fn(f64) -> f64>(
        log_density: G,
        lo: f64,
        hi: f64,
        nodes: usize,
        spacing: NodeSpacing,
    ) -> Result<Self> {
        if !(hi > lo) || nodes < 3 {
            return Err(Error::Tabulation(format!("bad table range [{lo}, {hi}]")));
        }
        let grid: Vec<f64> = match spacing {
            NodeSpacing::Uniform => (0..nodes)
                .map(|i| lo + (hi - lo) * i as f64 / (nodes - 1) as f64)
                .collect(),
            NodeSpacing::Logarithmic => {
                let decades = 6.0;
                std::iter::once(lo)
                    .chain((1..nodes).map(|i| {
                        let frac = (nodes - 1 - i) as f64 / (nodes - 2) as f64;
                        hi * 10f64.powf(-decades * frac)
                    }))
                    .collect()
            }
        };
        let (_, peak) = log_density_peak(&log_density, lo, hi);
        if !peak.is_finite() {
            return Err(Error::Tabulation("density vanishes on the table range".into()));
        }
        let density = |r: f64| scaled_exp(log_density(r), peak);
        let mut cdf = Vec::with_capacity(nodes);
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in grid.windows(2) {
            acc += gauss_legendre(&density, w[0], w[1]);
            cdf.push(acc);
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(Error::Tabulation("zero or non-finite total mass".into()));
        }
        // Keep strictly increasing cdf values: the last node of a flat run at the
        // bottom, the first node of a flat run at the top.
        let mut xs = Vec::with_capacity(nodes);
        let mut ys = Vec::with_capacity(nodes);
        for (i, (&c, &r)) in cdf.iter().zip(grid.iter()).enumerate() {
            let f = c / acc;
            if let Some(&last) = xs.last() {
                if f <= last {
                    if last == 0.0 && i > 0 {
                        *ys.last_mut().unwrap() = r;
                    }
                    continue;
                }
            }
            xs.push(f);
            ys.push(r);
        }
        Ok(Self {
            interp: MonotoneCubic::new(xs, ys)?,
            lo,
            hi,
        })
    }

    /// Quantile at probability `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.interp.eval(u).clamp(self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    #[test]
    fn simpson_polynomial_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((v - 0.0).abs() < 1e-12);
        let v = adaptive_simpson(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn gamma_moment_by_quadrature() {
        for n in [1usize, 2, 3, 10, 50] {
            let got = radial_log_moment(n, |r| -r, f64::INFINITY, 1e-12).unwrap();
            let want = ln_gamma(n as f64);
            assert!((got - want).abs() < 1e-9, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn divergent_is_reported() {
        assert!(matches!(
            radial_log_moment(2, |_| 0.0, f64::INFINITY, 1e-10),
            Err(Error::DivergentIntegral { .. })
        ));
    }

    #[test]
    fn monotone_cubic_preserves_order() {
        let xs = vec![0.0, 0.1, 0.5, 0.51, 1.0];
        let ys = vec![0.0, 2.0, 2.1, 5.0, 6.0];
        let m = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=1000 {
            let v = m.eval(i as f64 / 1000.0);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        assert_eq!(m.eval(0.5), 2.1);
    }

    #[test]
    fn inverse_cdf_of_exponential() {
        let q = find_tail_limit(&|r: f64| -r, 1.0, 1e-12).unwrap();
        let inv = InverseCdf::from_log_density(|r| -r, 0.0, q, TABLE_NODES, NodeSpacing::Logarithmic).unwrap();
        for u in [0.01, 0.25, 0.5, 0.9, 0.999] {
            let want = -(1.0f64 - u).ln();
            assert!((inv.quantile(u) - want).abs() < 1e-5 * want.max(1.0), "u={u}");
        }
    }
}
