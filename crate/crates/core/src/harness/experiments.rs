use serde_json::json;
use statrs::function::gamma::ln_gamma;

use super::{BodySpec, BuiltBody, ExperimentConfig, ExperimentKind, Exponent, KlsRow, ProfileSpec, Row, Verdict};
use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::geometry::{dilate, make_lp_ball, ConvexBody, RevolutionBody};
use crate::moments::{batch_means, block_isotropy_check, isotropy_check, se_of_batch_means, summarize, whiten, SUB_BATCHES};
use crate::poincare::{builtin_dictionary, radial_variance_functional, poincare_lower_bound, DictionaryOptions, PoincareEstimate, TestFunction};
use crate::profiles::{normalize, NormalizedPair};
use crate::quadrature::adaptive_simpson;
use crate::rng::RngStream;
use crate::samplers::{
    check_mixed_partial_signs, sample_multiblock, sample_parallel, sample_radius, sample_revolution, sample_scale, sample_su,
    sample_polar, sample_uniform_body, JointProfile, McmcOptions, CHUNK_DRAWS,
};
use crate::stats::{compare_mixed_moments, ks_two_sample};

pub(super) struct Output {
    pub rows: Vec<Row>,
    pub kls_table: Vec<KlsRow>,
    pub details: Vec<serde_json::Value>,
}

/// Identifies the (body, profile, n) cell a row belongs to.
struct Key {
    body: String,
    profile: String,
    n: usize,
    count: usize,
}

impl Key {
    fn new(body: impl ToString, profile: impl ToString, n: usize, count: usize) -> Self {
        Self { body: body.to_string(), profile: profile.to_string(), n, count }
    }

    fn label(&self, what: &str) -> String {
        format!("{}/{}/{}/{what}", self.body, self.profile, self.n)
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    out: Output,
}

impl<'a> Ctx<'a> {
    fn gate(&self) -> f64 {
        self.cfg.gates.se_gate
    }

    /// Draws on the stream `label`, chunked so that the result does not depend
    /// on the worker count.
    fn draw<S>(&self, key: &Key, what: &str, count: usize, sampler: S) -> Result<SampleBatch>
    where
        S: Fn(usize, &mut RngStream) -> Result<SampleBatch> + Sync,
    {
        let label = format!("{}/{}", self.cfg.experiment, key.label(what));
        let stream = RngStream::new(self.cfg.seed, 0).derive(&label);
        sample_parallel(count, CHUNK_DRAWS, &stream, sampler)
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        key: &Key,
        quantity: impl Into<String>,
        value: f64,
        se: Option<f64>,
        expected: Option<f64>,
        threshold: Option<f64>,
        verdict: Verdict,
    ) {
        self.out.rows.push(Row {
            experiment: self.cfg.experiment.to_string(),
            body: key.body.clone(),
            profile: key.profile.clone(),
            n: key.n,
            count: key.count,
            seed: self.cfg.seed,
            quantity: quantity.into(),
            value,
            se,
            expected,
            threshold,
            verdict,
        });
    }

    /// `|value − expected| ≤ gate·se`.
    fn z_row(&mut self, key: &Key, quantity: impl Into<String>, value: f64, se: f64, expected: f64) {
        let tol = self.gate() * se;
        let ok = (value - expected).abs() <= tol;
        self.push(key, quantity, value, Some(se), Some(expected), Some(tol), Verdict::of(ok));
    }

    fn info(&mut self, key: &Key, quantity: impl Into<String>, value: f64, se: Option<f64>) {
        self.push(key, quantity, value, se, None, None, Verdict::Info);
    }

    fn detail(&mut self, key: &Key, kind: &str, value: impl serde::Serialize) -> Result<()> {
        self.out.details.push(json!({
            "body": key.body,
            "profile": key.profile,
            "n": key.n,
            "kind": kind,
            "value": serde_json::to_value(value)?,
        }));
        Ok(())
    }
}

pub(super) fn dispatch(cfg: &ExperimentConfig) -> Result<Output> {
    let mut ctx = Ctx { cfg, out: Output { rows: Vec::new(), kls_table: Vec::new(), details: Vec::new() } };
    match cfg.experiment {
        ExperimentKind::VerifyRadial => verify_radial(&mut ctx)?,
        ExperimentKind::VerifyScaleIdentity => verify_scale_identity(&mut ctx)?,
        ExperimentKind::VerifyDecomposition => verify_decomposition(&mut ctx)?,
        ExperimentKind::KlsTable => kls_table(&mut ctx)?,
        ExperimentKind::RevolutionSuite => revolution_suite(&mut ctx)?,
        ExperimentKind::MultiblockSuite => multiblock_suite(&mut ctx)?,
        ExperimentKind::BoundsComparison => bounds_comparison(&mut ctx)?,
        ExperimentKind::ConditionCheck => condition_check(&mut ctx)?,
    }
    Ok(ctx.out)
}

fn lp(p: f64) -> BodySpec {
    let p = if p.is_infinite() { Exponent::Named(super::InfName::Inf) } else { Exponent::Finite(p) };
    BodySpec::Lp { p, n: None, lambda: 1.0 }
}

fn or_default<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() { default.to_vec() } else { given.to_vec() }
}

fn profiles(cfg: &ExperimentConfig) -> Vec<ProfileSpec> {
    or_default(
        &cfg.profiles,
        &[
            ProfileSpec::Uniform { cutoff: 1.0 },
            ProfileSpec::Exponential { beta: 1.0 },
            ProfileSpec::Gaussian { sigma: 1.0 },
        ],
    )
}

/// (body, n) cells with the body built.
fn cells(cfg: &ExperimentConfig, bodies: &[BodySpec], dims: &[usize]) -> Result<Vec<(BodySpec, usize, BuiltBody)>> {
    let dims = or_default(&cfg.dims, dims);
    let mut out = Vec::new();
    for b in or_default(&cfg.bodies, bodies) {
        for n in b.dims(&dims) {
            let built = b.build(n)?;
            out.push((b.clone(), n, built));
        }
    }
    Ok(out)
}

fn gauge_body(spec: &BodySpec, built: &BuiltBody, what: &str) -> Result<ConvexBody> {
    match built {
        BuiltBody::Gauge(b) => Ok(b.clone()),
        BuiltBody::Revolution(_) => Err(Error::InvalidParameter(format!("{what} needs a gauge body, got {spec}"))),
    }
}

/// `E Rᵏ` for the law `∝ r^{m−1} ρ(r)` of a catalog profile, `m` real.
fn radial_moment_real(profile: ProfileSpec, m: f64, k: f64) -> f64 {
    let g = |a: f64, b: f64| (ln_gamma(a) - ln_gamma(b)).exp();
    match profile {
        ProfileSpec::Uniform { cutoff } => cutoff.powf(k) * m / (m + k),
        ProfileSpec::Exponential { beta } => g(m + k, m) * beta.powf(-k),
        ProfileSpec::Gaussian { sigma } => (sigma * sigma * 2.0).powf(0.5 * k) * g(0.5 * (m + k), 0.5 * m),
        ProfileSpec::PowerExp { p, beta } => g((m + k) / p, m / p) * beta.powf(-k / p),
    }
}

/// `E Rᵏ` for `R = |X|_B` in dimension `n`.
pub fn radial_moment(profile: ProfileSpec, n: usize, k: u32) -> f64 {
    radial_moment_real(profile, n as f64, k as f64)
}

/// `E Sᵏ` for the law `∝ sⁿ (−ρ′(s))`; the uniform profile gives the atom at the cutoff.
pub fn scale_moment(profile: ProfileSpec, n: usize, k: u32) -> f64 {
    let (n, k) = (n as f64, k as f64);
    match profile {
        ProfileSpec::Uniform { cutoff } => cutoff.powf(k),
        ProfileSpec::Exponential { .. } => radial_moment_real(profile, n + 1.0, k),
        ProfileSpec::Gaussian { .. } => radial_moment_real(profile, n + 2.0, k),
        ProfileSpec::PowerExp { p, .. } => radial_moment_real(profile, n + p, k),
    }
}

fn mean_sq(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}

/// `n·Var(R)/E(R²)`.
fn radial_ratio(values: &[f64], n: usize) -> f64 {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    let m2 = mean_sq(values);
    n as f64 * (m2 - m * m) / m2
}

fn sub_batch_se(values: &[f64], stat: impl Fn(&[f64]) -> f64) -> f64 {
    let size = values.len() / SUB_BATCHES;
    let subs: Vec<f64> = values.chunks_exact(size).take(SUB_BATCHES).map(stat).collect();
    se_of_batch_means(&subs)
}

fn pair_for(body: &ConvexBody, profile: ProfileSpec) -> Result<NormalizedPair> {
    normalize(body, &profile.build()?)
}

fn verify_radial(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    for (spec, n, built) in cells(cfg, &[lp(2.0)], &[1, 2, 3, 5, 10, 20, 50])? {
        let body = gauge_body(&spec, &built, "verify-radial")?;
        for profile in profiles(cfg) {
            let key = Key::new(&spec, profile, n, cfg.count);
            let pair = pair_for(&body, profile)?;
            let r = ctx.draw(&key, "R", cfg.count, |m, rng| sample_radius(&pair, m, rng))?;
            let values = r.data();
            let ratio = radial_ratio(values, n);
            let se = sub_batch_se(values, |v| radial_ratio(v, n));
            let (m1, m2) = (radial_moment(profile, n, 1), radial_moment(profile, n, 2));
            let expected = n as f64 * (m2 - m1 * m1) / m2;
            let g = ctx.gate();
            let ok = ratio <= 1.0 + g * se && (ratio - expected).abs() <= g * se;
            ctx.push(&key, "n*Var(R)/E(R^2)", ratio, Some(se), Some(expected), Some(1.0), Verdict::of(ok));
            let (v, se) = batch_means(&values.iter().map(|x| x * x).collect::<Vec<_>>());
            ctx.z_row(&key, "E(R^2)", v, se, m2);
        }
    }
    Ok(())
}

fn verify_scale_identity(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    for (spec, n, built) in cells(cfg, &[lp(2.0)], &[1, 2, 3, 5, 10, 20, 50])? {
        let body = gauge_body(&spec, &built, "verify-scale-identity")?;
        for profile in profiles(cfg) {
            let key = Key::new(&spec, profile, n, cfg.count);
            let pair = pair_for(&body, profile)?;
            let r = ctx.draw(&key, "R", cfg.count, |m, rng| sample_radius(&pair, m, rng))?;
            let s = ctx.draw(&key, "S", cfg.count, |m, rng| sample_scale(&pair, m, rng))?;
            let c = (n as f64 + 2.0) / n as f64;
            let (a, sa) = batch_means(&r.data().iter().map(|x| c * x * x).collect::<Vec<_>>());
            let (b, sb) = batch_means(&s.data().iter().map(|x| x * x).collect::<Vec<_>>());
            ctx.z_row(&key, "E(R^2)(n+2)/n - E(S^2)", a - b, sa.hypot(sb), 0.0);
            ctx.z_row(&key, "E(S^2)", b, sb, scale_moment(profile, n, 2));
        }
    }
    Ok(())
}

fn is_unit_euclidean(spec: &BodySpec) -> bool {
    matches!(spec, BodySpec::Lp { p: Exponent::Finite(p), lambda, .. } if *p == 2.0 && *lambda == 1.0)
}

fn verify_decomposition(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    for (spec, n, built) in cells(cfg, &[lp(1.0), lp(2.0), lp(f64::INFINITY)], &[2, 3, 5])? {
        let body = gauge_body(&spec, &built, "verify-decomposition")?;
        for profile in profiles(cfg) {
            let key = Key::new(&spec, profile, n, cfg.count);
            let pair = pair_for(&body, profile)?;
            let su = ctx.draw(&key, "SU", cfg.count, |m, rng| sample_su(&pair, m, rng))?;
            let polar = ctx.draw(&key, "polar", cfg.count, |m, rng| sample_polar(&pair, m, rng))?;
            let cmp = compare_mixed_moments(&su, &polar, 4, ctx.gate())?;
            ctx.push(
                &key,
                "max z mixed moments (order<=4)",
                cmp.max_z,
                None,
                None,
                Some(cmp.se_gate),
                Verdict::of(cmp.passed),
            );
            let gauges = |b: &SampleBatch| b.rows().map(|x| body.gauge_unchecked(x)).collect::<Vec<_>>();
            let ks = ks_two_sample(&gauges(&su), &gauges(&polar), 0.001);
            ctx.push(&key, "KS D (gauge)", ks.statistic, None, None, Some(ks.critical), Verdict::of(ks.passed));
            if let (true, ProfileSpec::Gaussian { sigma }) = (is_unit_euclidean(&spec), profile) {
                for (name, batch) in [("SU", &su), ("polar", &polar)] {
                    let x1 = batch.column(0);
                    let (m2, se2) = batch_means(&x1.iter().map(|x| x * x).collect::<Vec<_>>());
                    ctx.z_row(&key, format!("E(X1^2) {name}"), m2, se2, sigma * sigma);
                    let (m4, se4) = batch_means(&x1.iter().map(|x| x.powi(4)).collect::<Vec<_>>());
                    ctx.z_row(&key, format!("E(X1^4) {name}"), m4, se4, 3.0 * sigma.powi(4));
                }
            }
            ctx.detail(&key, "mixed-moments", &cmp)?;
            ctx.detail(&key, "ks", &ks)?;
        }
    }
    Ok(())
}

/// Draws from `profile` on a gauge body, or uniform draws on a body of
/// revolution mapped to isotropic position (with the Euclidean ball as the
/// dictionary's body). `None` for non-uniform profiles on revolution bodies.
fn estimate_cell(ctx: &Ctx, key: &Key, built: &BuiltBody, profile: ProfileSpec) -> Result<Option<(SampleBatch, PoincareEstimate)>> {
    let cfg = ctx.cfg;
    let (batch, body, cutoff) = match built {
        BuiltBody::Gauge(body) => {
            let pair = pair_for(body, profile)?;
            let x = ctx.draw(key, "X", cfg.count, |m, rng| sample_su(&pair, m, rng))?;
            let cutoff = match profile {
                ProfileSpec::Uniform { cutoff } => cutoff,
                _ => f64::INFINITY,
            };
            (x, body.clone(), cutoff)
        }
        BuiltBody::Revolution(k) => {
            if !profile.is_uniform() {
                return Ok(None);
            }
            let x = ctx.draw(key, "X", cfg.count, |m, rng| sample_revolution(k, m, rng))?;
            (whiten(&x)?.0, make_lp_ball(k.total_dim(), 2.0)?, f64::INFINITY)
        }
    };
    let opts = DictionaryOptions { cutoff, seed: cfg.seed, ..Default::default() };
    let dict = builtin_dictionary(&body, &batch, &opts);
    let est = poincare_lower_bound(&dict, &batch)?;
    Ok(Some((batch, est)))
}

fn kls_table(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let bodies = [
        lp(1.0),
        lp(2.0),
        lp(f64::INFINITY),
        BodySpec::Simplex { n: None },
        BodySpec::Cone { n: None },
        BodySpec::Cylinder { n: None },
    ];
    for (spec, n, built) in cells(cfg, &bodies, &[2, 3, 4, 5, 6, 7, 8])? {
        for profile in profiles(cfg) {
            let key = Key::new(&spec, profile, n, cfg.count);
            let Some((_, est)) = estimate_cell(ctx, &key, &built, profile)? else {
                continue;
            };
            let gate = cfg.gates.ratio_gate;
            ctx.push(
                &key,
                "kls_ratio",
                est.kls_ratio,
                Some(est.kls_se),
                None,
                Some(gate),
                Verdict::of(est.kls_ratio <= gate),
            );
            ctx.info(&key, "lower_bound", est.lower_bound, Some(est.se));
            ctx.detail(&key, "argmax", json!({ "function": est.argmax_function, "class": est.argmax_class }))?;
            ctx.out.kls_table.push(KlsRow {
                body: key.body.clone(),
                profile: key.profile.clone(),
                n,
                count: cfg.count,
                seed: cfg.seed,
                lower_bound: est.lower_bound,
                se: est.se,
                kls_ratio: est.kls_ratio,
                argmax_function: est.argmax_function.clone(),
                sum_var_bound: est.comparison_bounds.sum_var,
                bobkov_bound: est.comparison_bounds.bobkov_sqrt,
                argmax_class: est.argmax_class.to_string(),
            });
        }
    }
    Ok(())
}

fn revolution_body(spec: &BodySpec, built: &BuiltBody) -> Result<RevolutionBody> {
    match built {
        BuiltBody::Revolution(k) => Ok(k.clone()),
        BuiltBody::Gauge(_) => Err(Error::InvalidParameter(format!("revolution-suite needs a body of revolution, got {spec}"))),
    }
}

/// `(ν, ball)` for the uniform measure on `K` as a one-block measure:
/// `ρ(t, r) = 1{t ∈ I, r ≤ R(t)}` over the unit Euclidean ball.
fn revolution_joint(k: &RevolutionBody) -> Result<JointProfile> {
    let (lo, hi) = k.interval();
    let kk = k.clone();
    let t0 = 0.5 * (lo + hi);
    let log_rho = move |x0: &[f64], r: &[f64]| {
        let t = x0[0];
        if t >= lo && t <= hi && r[0] <= kk.radius(t) { 0.0 } else { f64::NEG_INFINITY }
    };
    JointProfile::new(1, vec![k.base().dim()], log_rho, vec![t0, 0.5 * k.radius(t0)])
}

fn revolution_suite(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let bodies = [BodySpec::Cone { n: None }, BodySpec::Cylinder { n: None }];
    let uniform = ProfileSpec::Uniform { cutoff: 1.0 };
    for (spec, n, built) in cells(cfg, &bodies, &[3])? {
        let k = revolution_body(&spec, &built)?;
        let key = Key::new(&spec, uniform, n, cfg.count);
        let x = ctx.draw(&key, "X", cfg.count, |m, rng| sample_revolution(&k, m, rng))?;

        let inside = x.rows().filter(|y| k.contains(y)).count() as f64 / x.count() as f64;
        ctx.push(&key, "fraction in K", inside, None, Some(1.0), None, Verdict::of(inside == 1.0));

        // moments of t against quadrature of R(t)^{n-1}
        let (lo, hi) = k.interval();
        let nb = k.base().dim() as i32;
        let w = |t: f64, p: i32| t.powi(p) * k.radius(t).powi(nb);
        let mass = adaptive_simpson(|t| w(t, 0), lo, hi, 1e-12);
        let t = x.column(0);
        for p in [1, 2] {
            let want = adaptive_simpson(|s| w(s, p), lo, hi, 1e-12) / mass;
            let (v, se) = batch_means(&t.iter().map(|s| s.powi(p)).collect::<Vec<_>>());
            ctx.z_row(&key, format!("E(t^{p})"), v, se, want);
        }

        let joint = revolution_joint(&k)?;
        let ball = make_lp_ball(k.base().dim(), 2.0)?;
        let opts = McmcOptions::default();
        let mb = ctx.draw(&key, "multiblock", cfg.count, |m, rng| {
            Ok(sample_multiblock(&joint, std::slice::from_ref(&ball), m, rng, &opts)?.x)
        })?;
        let cmp = compare_mixed_moments(&x, &mb, 4, ctx.gate())?;
        ctx.push(
            &key,
            "max z mixed moments vs multiblock (order<=4)",
            cmp.max_z,
            None,
            None,
            Some(cmp.se_gate),
            Verdict::of(cmp.passed),
        );
        ctx.detail(&key, "multiblock-moments", &cmp)?;
        if let Some(d) = &mb.provenance.mcmc {
            ctx.info(&key, "multiblock ESS", d.ess, None);
        }

        // whitening map from one batch, isotropy checked on an independent one
        let (white, map) = whiten(&x)?;
        let fresh = ctx.draw(&key, "X-check", cfg.count, |m, rng| sample_revolution(&k, m, rng))?;
        let mapped = fresh.map_rows(n, |y, o| map.apply(y, o))?;
        let iso = isotropy_check(&summarize(&mapped)?, ctx.gate());
        ctx.push(
            &key,
            "isotropy max deviation (se) after whitening",
            iso.max_deviation_se,
            None,
            None,
            Some(iso.se_gate),
            Verdict::of(iso.isotropic),
        );
        ctx.detail(&key, "isotropy", &iso)?;

        let ball_n = make_lp_ball(n, 2.0)?;
        let dopts = DictionaryOptions { seed: cfg.seed, ..Default::default() };
        let est = poincare_lower_bound(&builtin_dictionary(&ball_n, &white, &dopts), &white)?;
        let gate = cfg.gates.ratio_gate;
        ctx.push(&key, "kls_ratio", est.kls_ratio, Some(est.kls_se), None, Some(gate), Verdict::of(est.kls_ratio <= gate));
    }
    Ok(())
}

fn push_block_report(ctx: &mut Ctx, key: &Key, x0: &SampleBatch, s: &SampleBatch, u: &SampleBatch, target: Option<f64>) -> Result<()> {
    let rep = block_isotropy_check(Some(x0), std::slice::from_ref(s), std::slice::from_ref(u), ctx.gate())?;
    for r in &rep.ratios {
        match target {
            Some(t) => ctx.z_row(key, r.label.clone(), r.value, r.se, t),
            None => ctx.info(key, r.label.clone(), r.value, Some(r.se)),
        }
    }
    for r in &rep.unit_norms {
        ctx.z_row(key, r.label.clone(), r.value, r.se, 1.0);
    }
    ctx.push(
        key,
        "max pairwise block discrepancy (se)",
        rep.max_discrepancy_se,
        None,
        None,
        Some(rep.se_gate),
        Verdict::of(rep.passed),
    );
    ctx.detail(key, "block-isotropy", &rep)?;

    // radial functional on ν = (X₀, S)
    let nu = SampleBatch::new(
        2,
        x0.data().iter().zip(s.data()).flat_map(|(a, b)| [*a, *b]).collect(),
        x0.provenance.clone(),
    )?;
    let x = assemble(x0, s, u)?;
    for (i, name) in [(0, "t"), (1, "s")] {
        let v = radial_variance_functional(&nu, &x, 1, &TestFunction::coordinate(i))?;
        ctx.info(key, format!("radial functional f={name}"), v, None);
    }
    Ok(())
}

/// Rows `(x₀, s·u)`.
fn assemble(x0: &SampleBatch, s: &SampleBatch, u: &SampleBatch) -> Result<SampleBatch> {
    let nb = u.dim();
    let mut data = Vec::with_capacity(x0.count() * (1 + nb));
    for ((a, sv), uv) in x0.data().iter().zip(s.data()).zip(u.rows()) {
        data.push(*a);
        data.extend(uv.iter().map(|v| sv * v));
    }
    SampleBatch::new(1 + nb, data, x0.provenance.clone())
}

fn multiblock_suite(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    for n in or_default(&cfg.dims, &[3]) {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("multiblock-suite needs N >= 2, got {n}")));
        }
        let nb = n - 1;
        // dilation giving E|U|² = 1 for U uniform on λB₂
        let lambda = ((nb as f64 + 2.0) / nb as f64).sqrt();
        let block = dilate(&make_lp_ball(nb, 2.0)?, lambda)?;

        // X₀ ∼ N(0, 1) and a standard Gaussian block written as S·U
        let gauss = ProfileSpec::Gaussian { sigma: 1.0 / lambda };
        let key = Key::new("gaussian-product", gauss, n, cfg.count);
        let line = pair_for(&make_lp_ball(1, 2.0)?, ProfileSpec::Gaussian { sigma: 1.0 })?;
        let pair = pair_for(&block, gauss)?;
        let x0 = ctx.draw(&key, "X0", cfg.count, |m, rng| sample_su(&line, m, rng))?;
        let s = ctx.draw(&key, "S", cfg.count, |m, rng| sample_scale(&pair, m, rng))?;
        let u = ctx.draw(&key, "U", cfg.count, |m, rng| sample_uniform_body(&block, m, rng))?;
        push_block_report(ctx, &key, &x0, &s, &u, Some(1.0))?;

        // the same measure through the ν-sampler
        let l2 = lambda * lambda;
        let joint = JointProfile::new(1, vec![nb], move |x0, r| -0.5 * (x0[0] * x0[0] + l2 * r[0] * r[0]), vec![0.0, 1.0])?;
        let opts = McmcOptions::default();
        let mb = ctx.draw(&key, "nu", cfg.count, |m, rng| {
            Ok(sample_multiblock(&joint, std::slice::from_ref(&block), m, rng, &opts)?.x)
        })?;
        let direct = assemble(&x0, &s, &u)?;
        let cmp = compare_mixed_moments(&direct, &mb, 4, ctx.gate())?;
        ctx.push(
            &key,
            "max z mixed moments S*U vs nu-sampler (order<=4)",
            cmp.max_z,
            None,
            None,
            Some(cmp.se_gate),
            Verdict::of(cmp.passed),
        );
        let (v, se) = batch_means(&mb.rows().map(|r| r.iter().map(|x| x * x).sum::<f64>() / n as f64).collect::<Vec<_>>());
        ctx.z_row(&key, "E|X|^2/N nu-sampler", v, se, 1.0);

        // cone in isotropic position, split as (t, S·U)
        let BuiltBody::Revolution(cone) = (BodySpec::Cone { n: None }).build(n)? else {
            unreachable!("cone is a body of revolution")
        };
        let key = Key::new("cone", ProfileSpec::Uniform { cutoff: 1.0 }, n, cfg.count);
        let xc = ctx.draw(&key, "X", cfg.count, |m, rng| sample_revolution(&cone, m, rng))?;
        let (white, map) = whiten(&xc)?;
        let b = ((1..n).map(|i| map.matrix[i * n + i].powi(2)).sum::<f64>() / nb as f64).sqrt();
        let s = SampleBatch::new(
            1,
            xc.column(0).iter().map(|t| b * cone.radius(*t) / lambda).collect(),
            xc.provenance.clone(),
        )?;
        let u = ctx.draw(&key, "U", cfg.count, |m, rng| sample_uniform_body(&block, m, rng))?;
        push_block_report(ctx, &key, &white.columns(0..1), &s, &u, None)?;
    }
    Ok(())
}

fn bounds_comparison(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    for (spec, n, built) in cells(cfg, &[lp(1.0), lp(2.0), lp(f64::INFINITY)], &[2, 3, 5])? {
        let body = gauge_body(&spec, &built, "bounds-comparison")?;
        for profile in profiles(cfg) {
            let key = Key::new(&spec, profile, n, cfg.count);
            let Some((_, est)) = estimate_cell(ctx, &key, &built, profile)? else {
                continue;
            };
            let b = &est.comparison_bounds;
            ctx.info(&key, "lower_bound", est.lower_bound, Some(est.se));
            ctx.info(&key, "lower_bound/sum_var", est.lower_bound / b.sum_var, Some(est.se / b.sum_var));
            ctx.info(&key, "lower_bound/sqrt(Var|X|^2)", est.lower_bound / b.bobkov_sqrt, Some(est.se / b.bobkov_sqrt));
            ctx.info(&key, "kls_ratio", est.kls_ratio, Some(est.kls_se));

            let pair = pair_for(&body, profile)?;
            let s = ctx.draw(&key, "S", cfg.count, |m, rng| sample_scale(&pair, m, rng))?;
            // Var(S)·n/E(S²), tabulated against the constant 12
            let stat = |v: &[f64]| {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                let m2 = mean_sq(v);
                (m2 - m * m) * n as f64 / m2
            };
            let se = sub_batch_se(s.data(), stat);
            ctx.push(&key, "n*Var(S)/E(S^2)", stat(s.data()), Some(se), None, Some(12.0), Verdict::Info);
            let r = ctx.draw(&key, "R", cfg.count, |m, rng| sample_radius(&pair, m, rng))?;
            let se = sub_batch_se(r.data(), |v| radial_ratio(v, n));
            ctx.push(&key, "n*Var(R)/E(R^2)", radial_ratio(r.data(), n), Some(se), None, Some(1.0), Verdict::Info);
        }
    }
    Ok(())
}

/// Joint profiles `ρ(r₁, …, r_k)` for `condition-check`: name, domain and
/// whether conditions (i) and (ii) should hold.
pub const JOINT_CATALOG: &[(&str, &[(f64, f64)], bool)] = &[
    ("exp-1d", &[(0.0, 4.0)], true),
    ("product-exp", &[(0.0, 4.0), (0.0, 4.0)], true),
    ("gaussian-product", &[(0.0, 3.0), (0.0, 3.0)], true),
    ("squared-sum", &[(0.0, 2.0), (0.0, 2.0)], false),
];

fn joint_rho(name: &str) -> fn(&[f64]) -> f64 {
    match name {
        "exp-1d" => |r| (-r[0]).exp(),
        "product-exp" => |r| (-r[0] - r[1]).exp(),
        "gaussian-product" => |r| (-0.5 * (r[0] * r[0] + r[1] * r[1])).exp(),
        "squared-sum" => |r| (-(r[0] + r[1]).powi(2)).exp(),
        _ => unreachable!("catalog entry without a density"),
    }
}

fn condition_check(ctx: &mut Ctx) -> Result<()> {
    let grid = ctx.cfg.grid.unwrap_or(50);
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must be positive".into()));
    }
    for (name, domain, expect) in JOINT_CATALOG {
        let k = domain.len();
        let key = Key::new(name, "joint", k, grid.pow(k as u32));
        let rep = check_mixed_partial_signs(joint_rho(name), domain, grid);
        for c in rep.decreasing.iter().chain(&rep.alternating) {
            ctx.info(&key, format!("violations {}", c.label), c.violations as f64, None);
        }
        let observed = rep.passed();
        ctx.push(
            &key,
            "conditions hold",
            f64::from(u8::from(observed)),
            None,
            Some(f64::from(u8::from(*expect))),
            None,
            Verdict::of(observed == *expect),
        );
        ctx.detail(&key, "condition-report", &rep)?;
    }
    Ok(())
}
