use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{FunctionClass, TestFunction};
use crate::batch::SampleBatch;
use crate::geometry::{ConvexBody, GradientKind};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DictionaryOptions {
    /// Profile cutoff; the median gauge of the batch is used when infinite.
    pub cutoff: f64,
    pub random_directions: usize,
    pub seed: u64,
}

impl Default for DictionaryOptions {
    fn default() -> Self {
        Self { cutoff: f64::INFINITY, random_directions: 8, seed: 0 }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}

/// `x ↦ g(|x|_B)` with `∇ = g′(|x|_B) ∇|x|_B`.
fn radial<G, D>(body: &ConvexBody, name: String, g: G, dg: D, dg_sup: f64) -> TestFunction
where
    G: Fn(f64) -> f64 + Send + Sync + 'static,
    D: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let (b1, b2, b3) = (body.clone(), body.clone(), body.clone());
    let probe = vec![1.0; body.dim()];
    let mut scratch = vec![0.0; body.dim()];
    let exact = body.gauge_gradient(&probe, &mut scratch) == GradientKind::Exact;
    let mut f = TestFunction::new(
        name,
        FunctionClass::Radial,
        move |x| g(b1.gauge_unchecked(x)),
        move |x, out| {
            b2.gauge_gradient(x, out);
            let d = dg(b2.gauge_unchecked(x));
            out.iter_mut().for_each(|v| *v *= d);
        },
        dg_sup / body.inner_radius(),
    )
    .with_singular_set(move |x, tol| b3.near_singular(x, tol));
    f.exact_gradient = exact;
    f
}

/// Coordinates, pairwise products, centred `|x|²`, radial functions of the
/// gauge and random linear forms.
pub fn builtin_dictionary(body: &ConvexBody, batch: &SampleBatch, opts: &DictionaryOptions) -> Vec<TestFunction> {
    let n = body.dim();
    let mut dict: Vec<TestFunction> = (0..n).map(TestFunction::coordinate).collect();
    for i in 0..n {
        for j in i..n {
            dict.push(TestFunction::product(i, j));
        }
    }
    let mean_sq = batch.rows().map(|r| r.iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / batch.count().max(1) as f64;
    dict.push(TestFunction::centered_norm_sq(mean_sq));

    let scale = if opts.cutoff.is_finite() {
        opts.cutoff
    } else {
        median(batch.rows().map(|r| body.gauge_unchecked(r)).collect())
    };
    dict.push(radial(body, "s".into(), |s| s, |_| 1.0, 1.0));
    dict.push(radial(body, "s^2".into(), |s| s * s, |s| 2.0 * s, f64::INFINITY));
    let k = FRAC_PI_2 / scale;
    dict.push(radial(
        body,
        format!("sin(pi*s/{})", 2.0 * scale),
        move |s| (k * s).sin(),
        move |s| k * (k * s).cos(),
        k,
    ));

    let mut rng = RngStream::new(opts.seed, 0).derive("dictionary-directions");
    for d in 0..opts.random_directions {
        let mut theta: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        theta.iter_mut().for_each(|v| *v /= norm);
        dict.push(TestFunction::linear(format!("dir{}", d + 1), theta));
    }
    dict
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub name: String,
    pub checked: usize,
    pub skipped: usize,
    pub max_rel_error: f64,
    pub passed: bool,
}

pub const GRADIENT_REL_TOL: f64 = 1e-4;

/// Compare `f.gradient` with central differences (`h = 1e-6·scale`) at the
/// given points, skipping points within the stencil width (at least `1e-8`)
/// of the singular set.
pub fn check_gradient(f: &TestFunction, points: &[Vec<f64>]) -> GradientCheck {
    let mut checked = 0;
    let mut skipped = 0;
    let mut worst = 0.0f64;
    for x in points {
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let h = 1e-6 * scale;
        if f.near_singular(x, (4.0 * h).max(1e-8)) {
            skipped += 1;
            continue;
        }
        let mut g = vec![0.0; x.len()];
        f.gradient(x, &mut g);
        let mut y = x.clone();
        let mut err = 0.0f64;
        for i in 0..x.len() {
            y[i] = x[i] + h;
            let up = f.value(&y);
            y[i] = x[i] - h;
            let down = f.value(&y);
            y[i] = x[i];
            err = err.max(((up - down) / (2.0 * h) - g[i]).abs());
        }
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(err / gnorm.max(1e-3));
        checked += 1;
    }
    GradientCheck {
        name: f.name.clone(),
        checked,
        skipped,
        max_rel_error: worst,
        passed: worst <= GRADIENT_REL_TOL,
    }
}
