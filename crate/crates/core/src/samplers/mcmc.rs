//! Hit-and-run chains: uniform on a convex body (chord sampling) and on a
//! log-concave density (slice sampling along the chord direction).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::batch::McmcDiagnostics;
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy)]
pub struct McmcOptions {
    /// Burn-in steps per dimension.
    pub burn_in_per_dim: usize,
    /// Steps between retained draws, per dimension.
    pub thin_per_dim: usize,
    /// Chains whose ESS falls below this fraction of the draw count are
    /// reported as not converged.
    pub min_ess_fraction: f64,
    /// Initial slice width for log-concave targets.
    pub slice_width: f64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        Self {
            burn_in_per_dim: 1000,
            thin_per_dim: 1,
            min_ess_fraction: 0.01,
            slice_width: 1.0,
        }
    }
}

fn random_direction(rng: &mut RngStream, d: &mut [f64]) {
    loop {
        let mut norm = 0.0;
        for v in d.iter_mut() {
            *v = rng.sample(StandardNormal);
            norm += *v * *v;
        }
        if norm > 0.0 {
            let inv = norm.sqrt().recip();
            d.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}

/// Largest `t ∈ [0, span]` with `x + t·d ∈ B`, for `x ∈ B`.
fn chord_end(body: &ConvexBody, x: &[f64], d: &[f64], span: f64, sign: f64, buf: &mut [f64]) -> f64 {
    let inside = |t: f64, buf: &mut [f64]| {
        for ((b, xi), di) in buf.iter_mut().zip(x).zip(d) {
            *b = xi + sign * t * di;
        }
        body.contains(buf)
    };
    let (mut lo, mut hi) = (0.0, span);
    while hi - lo > 1e-12 * span {
        let mid = 0.5 * (lo + hi);
        if inside(mid, buf) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Uniform draws on `B` by hit-and-run from the origin.
pub fn hit_and_run_uniform(
    body: &ConvexBody,
    count: usize,
    rng: &mut RngStream,
    opts: &McmcOptions,
) -> Result<(Vec<f64>, McmcDiagnostics)> {
    let n = body.dim();
    let span = 2.0 * body.bounding_radius() * (1.0 + 1e-9);
    let burn_in = opts.burn_in_per_dim * n;
    let thinning = (opts.thin_per_dim * n).max(1);
    let mut x = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut buf = vec![0.0; n];
    let mut step = |x: &mut Vec<f64>, rng: &mut RngStream| {
        random_direction(rng, &mut d);
        let fwd = chord_end(body, x, &d, span, 1.0, &mut buf);
        let back = chord_end(body, x, &d, span, -1.0, &mut buf);
        let t = rng.random_range(-back..=fwd);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += t * di;
        }
    };
    for _ in 0..burn_in {
        step(&mut x, rng);
    }
    let mut data = Vec::with_capacity(count * n);
    let mut monitor = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..thinning {
            step(&mut x, rng);
        }
        monitor.push(body.gauge_unchecked(&x));
        data.extend_from_slice(&x);
    }
    let ess = effective_sample_size(&monitor);
    Ok((
        data,
        McmcDiagnostics {
            burn_in,
            thinning,
            ess,
            converged: ess >= opts.min_ess_fraction * count as f64,
        },
    ))
}

/// Draws from an unnormalized log-concave density on `ℝᵈ` by hit-and-run with
/// a stepping-out/shrinkage slice update along each random direction.
pub fn hit_and_run_log_concave<L: Fn(&[f64]) -> f64>(
    log_density: L,
    start: Vec<f64>,
    count: usize,
    rng: &mut RngStream,
    opts: &McmcOptions,
    monitor_fn: impl Fn(&[f64]) -> f64,
) -> Result<(Vec<f64>, McmcDiagnostics)> {
    let dim = start.len();
    let mut x = start;
    let mut lx = log_density(&x);
    if !lx.is_finite() {
        return Err(Error::InvalidParameter("MCMC start point has zero density".into()));
    }
    let burn_in = opts.burn_in_per_dim * dim;
    let thinning = (opts.thin_per_dim * dim).max(1);
    let w = opts.slice_width;
    let mut d = vec![0.0; dim];
    let mut y = vec![0.0; dim];

    let mut step = |x: &mut Vec<f64>, lx: &mut f64, rng: &mut RngStream| {
        random_direction(rng, &mut d);
        let eval = |t: f64, y: &mut Vec<f64>| {
            for ((yi, xi), di) in y.iter_mut().zip(x.iter()).zip(&d) {
                *yi = xi + t * di;
            }
            log_density(y)
        };
        let level = *lx + rng.random::<f64>().ln();
        let u: f64 = rng.random();
        let mut lo = -w * u;
        let mut hi = lo + w;
        let mut guard = 0;
        while eval(lo, &mut y) > level && guard < 10_000 {
            lo -= w;
            guard += 1;
        }
        guard = 0;
        while eval(hi, &mut y) > level && guard < 10_000 {
            hi += w;
            guard += 1;
        }
        loop {
            let t = rng.random_range(lo..hi);
            let lt = eval(t, &mut y);
            if lt > level {
                x.copy_from_slice(&y);
                *lx = lt;
                return;
            }
            if t < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            if hi - lo < 1e-300 {
                return;
            }
        }
    };

    for _ in 0..burn_in {
        step(&mut x, &mut lx, rng);
    }
    let mut data = Vec::with_capacity(count * dim);
    let mut monitor = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..thinning {
            step(&mut x, &mut lx, rng);
        }
        monitor.push(monitor_fn(&x));
        data.extend_from_slice(&x);
    }
    let ess = effective_sample_size(&monitor);
    Ok((
        data,
        McmcDiagnostics {
            burn_in,
            thinning,
            ess,
            converged: ess >= opts.min_ess_fraction * count as f64,
        },
    ))
}

/// ESS by Geyer's initial positive sequence on the autocorrelations.
pub fn effective_sample_size(chain: &[f64]) -> f64 {
    let n = chain.len();
    if n < 4 {
        return n as f64;
    }
    let mean = chain.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = chain.iter().map(|v| v - mean).collect();
    let var = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if var == 0.0 {
        return n as f64;
    }
    let autocorr = |lag: usize| {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / (n as f64 * var)
    };
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n / 2 {
        let pair = autocorr(lag) + autocorr(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    n as f64 / tau.max(1.0 / n as f64)
}
