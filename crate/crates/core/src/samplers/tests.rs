use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::geometry::{make_generic, make_hypercube, make_lp_ball, make_revolution, make_simplex, RadiusProfile};
use crate::profiles::normalize;

/// Mean and standard error of `f` over the rows.
fn mean_se(batch: &SampleBatch, f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let vals: Vec<f64> = batch.rows().map(f).collect();
    let n = vals.len() as f64;
    let m = vals.iter().sum::<f64>() / n;
    let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn assert_close(batch: &SampleBatch, f: impl Fn(&[f64]) -> f64, expected: f64, k: f64) {
    let (m, se) = mean_se(batch, f);
    assert!((m - expected).abs() <= k * se + 1e-12, "{m} vs {expected} (se {se})");
}

fn sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[test]
fn hypercube_marginals() {
    let b = make_hypercube(3).unwrap();
    let batch = sample_uniform_body(&b, 100_000, &mut RngStream::new(1, 0)).unwrap();
    assert!(batch.data().iter().all(|v| v.abs() <= 1.0));
    for j in 0..3 {
        assert_close(&batch, |x| x[j], 0.0, 4.0);
        assert_close(&batch, |x| x[j] * x[j], 1.0 / 3.0, 4.0);
    }
    assert!(!batch.provenance.approximate);
}

#[test]
fn euclidean_disc_second_moment() {
    let b = make_lp_ball(2, 2.0).unwrap();
    let batch = sample_uniform_body(&b, 200_000, &mut RngStream::new(2, 0)).unwrap();
    assert_close(&batch, sq, 0.5, 4.0);
}

#[test]
fn l1_ball_gauge_fraction() {
    let b = make_lp_ball(3, 1.0).unwrap();
    let batch = sample_uniform_body(&b, 200_000, &mut RngStream::new(3, 0)).unwrap();
    assert_close(&batch, |x| (b.gauge_unchecked(x) <= 0.5) as u8 as f64, 0.125, 4.0);
}

#[test]
fn uniform_draws_stay_inside() {
    let bodies = [
        make_lp_ball(4, 1.5).unwrap(),
        make_lp_ball(3, 3.0).unwrap(),
        make_simplex(3).unwrap(),
        make_simplex(1).unwrap(),
    ];
    for b in &bodies {
        let batch = sample_uniform_body(b, 10_000, &mut RngStream::new(4, 0)).unwrap();
        assert!(batch.rows().all(|x| b.gauge_unchecked(x) <= 1.0 + 1e-12), "{b:?}");
        // gauge of a uniform point is distributed as V^{1/n}: E gauge² = n/(n+2)
        let n = b.dim() as f64;
        assert_close(&batch, |x| b.gauge_unchecked(x).powi(2), n / (n + 2.0), 4.0);
    }
}

#[test]
fn simplex_barycenter() {
    let b = make_simplex(3).unwrap();
    let batch = sample_uniform_body(&b, 100_000, &mut RngStream::new(5, 0)).unwrap();
    for j in 0..3 {
        assert_close(&batch, |x| x[j], 0.0, 4.0);
    }
}

#[test]
fn radius_and_scale_moments() {
    let n3 = normalize(&make_lp_ball(3, 2.0).unwrap(), &RadialProfile::exponential(1.0).unwrap()).unwrap();
    let mut rng = RngStream::new(6, 0);
    assert_close(&sample_radius(&n3, 200_000, &mut rng).unwrap(), |x| x[0] * x[0], 12.0, 4.0);
    assert_close(&sample_scale(&n3, 200_000, &mut rng).unwrap(), |x| x[0] * x[0], 20.0, 4.0);

    let disc = make_lp_ball(2, 2.0).unwrap();
    let unif = normalize(&disc, &RadialProfile::uniform_cutoff(1.0).unwrap()).unwrap();
    assert_close(&sample_radius(&unif, 200_000, &mut rng).unwrap(), |x| x[0] * x[0], 0.5, 4.0);
    assert!(sample_scale(&unif, 100, &mut rng).unwrap().data().iter().all(|&s| s == 1.0));

    let gauss = normalize(&disc, &RadialProfile::gaussian(1.0).unwrap()).unwrap();
    assert_close(&sample_scale(&gauss, 200_000, &mut rng).unwrap(), |x| x[0] * x[0], 4.0, 4.0);
    let half = normalize(&make_lp_ball(1, 2.0).unwrap(), &RadialProfile::gaussian(1.0).unwrap()).unwrap();
    assert_close(&sample_radius(&half, 200_000, &mut rng).unwrap(), |x| x[0] * x[0], 1.0, 4.0);
}

#[test]
fn power_exp_laws_reduce_to_exponential() {
    // p = 1 is the exponential profile, sampled through the power-Gamma route.
    let b = make_lp_ball(2, 1.0).unwrap();
    let pe = normalize(&b, &RadialProfile::power_exp(1.0, 1.0).unwrap()).unwrap();
    let mut rng = RngStream::new(7, 0);
    assert_close(&sample_radius(&pe, 200_000, &mut rng).unwrap(), |x| x[0], 2.0, 4.0);
    assert_close(&sample_scale(&pe, 200_000, &mut rng).unwrap(), |x| x[0], 3.0, 4.0);
    // p = 2, β = 1/2 is the standard Gaussian: R² ∼ χ²_n.
    let g = normalize(&b, &RadialProfile::power_exp(2.0, 0.5).unwrap()).unwrap();
    assert_close(&sample_radius(&g, 200_000, &mut rng).unwrap(), |x| x[0] * x[0], 2.0, 4.0);
}

fn exp_custom(cutoff: f64, atom: bool) -> RadialProfile {
    RadialProfile::custom(
        Arc::new(|s: f64| -s),
        Some(Arc::new(|s: f64| -(-s).exp())),
        cutoff,
        atom,
    )
    .unwrap()
}

#[test]
fn tabulated_laws_match_closed_forms() {
    let b = make_lp_ball(3, 2.0).unwrap();
    let pair = normalize(&b, &exp_custom(f64::INFINITY, false)).unwrap();
    let mut rng = RngStream::new(8, 0);
    assert_close(&sample_radius(&pair, 200_000, &mut rng).unwrap(), |x| x[0] * x[0], 12.0, 4.0);
    assert_close(&sample_scale(&pair, 200_000, &mut rng).unwrap(), |x| x[0] * x[0], 20.0, 4.0);
}

#[test]
fn truncated_custom_scale_has_atom() {
    let b = make_lp_ball(1, 2.0).unwrap();
    let pair = normalize(&b, &exp_custom(1.0, true)).unwrap();
    let e = std::f64::consts::E;
    // continuous part s·e^{−s} on (0,1) plus the atom e^{−1} at 1
    let expected = (2.0 - 4.0 / e) / (1.0 - 1.0 / e);
    let batch = sample_scale(&pair, 200_000, &mut RngStream::new(9, 0)).unwrap();
    assert_close(&batch, |x| x[0], expected, 4.0);
    let atom = (1.0 / e) / (1.0 - 1.0 / e);
    assert_close(&batch, |x| (x[0] == 1.0) as u8 as f64, atom, 4.0);
}

#[test]
fn custom_scale_needs_derivative() {
    let p = RadialProfile::custom(Arc::new(|s: f64| -s), None, f64::INFINITY, false).unwrap();
    let pair = normalize(&make_lp_ball(2, 2.0).unwrap(), &p).unwrap();
    assert!(matches!(sample_scale(&pair, 10, &mut RngStream::new(0, 0)), Err(Error::MissingDerivative)));
}

#[test]
fn gaussian_su_and_polar_are_standard_normal() {
    let b = make_lp_ball(3, 2.0).unwrap();
    let pair = normalize(&b, &RadialProfile::gaussian(1.0).unwrap()).unwrap();
    for batch in [
        sample_su(&pair, 200_000, &mut RngStream::new(10, 0)).unwrap(),
        sample_polar(&pair, 200_000, &mut RngStream::new(11, 0)).unwrap(),
    ] {
        assert_close(&batch, |x| x[0] * x[0], 1.0, 4.0);
        assert_close(&batch, |x| x[1].powi(4), 3.0, 4.0);
        assert_close(&batch, |x| x[0] * x[2], 0.0, 4.0);
        assert_eq!(batch.provenance.sub_streams.len(), 2);
    }
}

#[test]
fn cone_measure_lies_on_boundary() {
    let bodies = [
        make_lp_ball(3, 1.0).unwrap(),
        make_lp_ball(2, 2.0).unwrap(),
        make_lp_ball(4, 1.7).unwrap(),
        make_hypercube(3).unwrap(),
        make_simplex(4).unwrap(),
    ];
    for b in &bodies {
        let batch = sample_cone_measure(b, 20_000, &mut RngStream::new(12, 0)).unwrap();
        assert!(batch.rows().all(|x| (b.gauge_unchecked(x) - 1.0).abs() <= 1e-9));
    }
    let sphere = sample_cone_measure(&make_lp_ball(5, 2.0).unwrap(), 100_000, &mut RngStream::new(13, 0)).unwrap();
    assert_close(&sphere, |x| x[0] * x[0], 0.2, 4.0);
}

#[test]
fn revolution_uniform_laws() {
    let disc = make_lp_ball(2, 2.0).unwrap();
    let cone = make_revolution(0.0, 1.0, RadiusProfile::Linear { intercept: 1.0, slope: -1.0 }, disc.clone()).unwrap();
    let batch = sample_revolution(&cone, 200_000, &mut RngStream::new(14, 0)).unwrap();
    assert_close(&batch, |y| y[0], 0.25, 4.0);
    assert!(batch.rows().all(|y| cone.contains(y)));

    let ball = make_revolution(-1.0, 1.0, RadiusProfile::Semicircle { radius: 1.0 }, disc.clone()).unwrap();
    let batch = sample_revolution(&ball, 200_000, &mut RngStream::new(15, 0)).unwrap();
    assert_close(&batch, sq, 3.0 / 5.0, 4.0);

    let cyl = make_revolution(-1.0, 1.0, RadiusProfile::Constant { value: 1.0 }, disc).unwrap();
    let batch = sample_revolution(&cyl, 200_000, &mut RngStream::new(16, 0)).unwrap();
    assert_close(&batch, |y| y[0] * y[0], 1.0 / 3.0, 4.0);
    assert_close(&batch, |y| y[0] * y[0] * (y[1] * y[1] + y[2] * y[2]), 1.0 / 6.0, 4.0);
}

#[test]
fn hit_and_run_on_generic_ball() {
    let b = make_generic(3, Arc::new(|x: &[f64]| sq(x) <= 1.0), 1.0, 1.0, (4.0 * PI / 3.0).ln(), true).unwrap();
    let batch = sample_uniform_body(&b, 20_000, &mut RngStream::new(17, 0)).unwrap();
    assert!(batch.provenance.approximate);
    let diag = batch.provenance.mcmc.clone().unwrap();
    assert_eq!(diag.burn_in, 3000);
    assert_eq!(diag.thinning, 3);
    assert!(diag.converged && diag.ess > 1000.0, "{diag:?}");
    let (m, _) = mean_se(&batch, sq);
    assert!((m - 0.6).abs() < 0.02, "{m}");
}

#[test]
fn batches_are_reproducible() {
    let b = make_lp_ball(3, 1.0).unwrap();
    let pair = normalize(&b, &RadialProfile::exponential(1.0).unwrap()).unwrap();
    let a = sample_su(&pair, 1000, &mut RngStream::new(42, 7)).unwrap();
    let c = sample_su(&pair, 1000, &mut RngStream::new(42, 7)).unwrap();
    assert_eq!(a, c);
    let d = sample_su(&pair, 1000, &mut RngStream::new(42, 8)).unwrap();
    assert_ne!(a.data(), d.data());
}

#[test]
fn parallel_chunks_ignore_thread_count() {
    let b = make_lp_ball(2, 1.0).unwrap();
    let pair = normalize(&b, &RadialProfile::gaussian(1.0).unwrap()).unwrap();
    let rng = RngStream::new(3, 1);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_parallel(10_000, 1024, &rng, |m, r| sample_polar(&pair, m, r)).unwrap())
    };
    let one = run(1);
    assert_eq!(one.count(), 10_000);
    assert_eq!(one.data(), run(8).data());
}

#[test]
fn multiblock_blocks_and_reductions() {
    let disc = make_lp_ball(2, 2.0).unwrap();
    let joint = JointProfile::new(0, vec![2, 2], |_, r| -r[0] - r[1], vec![1.0, 1.0]).unwrap();
    let draws = sample_multiblock(&joint, &[disc.clone(), disc], 40_000, &mut RngStream::new(18, 0), &McmcOptions::default())
        .unwrap();
    assert_eq!(draws.x.dim(), 4);
    // each block has |x_i| ∼ Gamma(2, 1): E|x_i|² = 6
    let (m, _) = mean_se(&draws.x, |x| x[0] * x[0] + x[1] * x[1]);
    assert!((m - 6.0).abs() < 0.3, "{m}");
    assert_close(&draws.x, |x| x[0] * x[2], 0.0, 5.0);

    let ball3 = make_lp_ball(3, 2.0).unwrap();
    let single = JointProfile::new(0, vec![3], |_, r| -r[0], vec![1.0]).unwrap();
    let draws = sample_multiblock(&single, std::slice::from_ref(&ball3), 40_000, &mut RngStream::new(19, 0), &McmcOptions::default())
        .unwrap();
    for (y, x) in draws.nu.rows().zip(draws.x.rows()) {
        assert!((ball3.gauge_unchecked(x) - y[0]).abs() <= 1e-9 * y[0].max(1.0));
    }
    let (m, _) = mean_se(&draws.x, sq);
    assert!((m - 12.0).abs() < 0.6, "{m}");
}
