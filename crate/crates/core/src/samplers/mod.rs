//! Samplers for the structured log-concave families.
//!
//! For `μ(dx) = ρ(|x|_B)dx` on `ℝⁿ` two exact constructions are provided:
//!
//! * polar: `X = R·θ` with `R ∼ n Vol(B) r^{n−1} ρ(r) dr` and `θ` cone-measure
//!   distributed on `∂B` (obtained as `U/|U|_B` for `U` uniform on `B`);
//! * scale × uniform: `X = S·U` with `U` uniform on `B` and
//!   `S ∼ −Vol(B) sⁿ ρ′(s) ds`, independent of `U`.
//!
//! Both must produce the same law; the test suites use each as the oracle of
//! the other.

mod mcmc;
mod multiblock;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::batch::{McmcDiagnostics, Provenance, SampleBatch};
use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Family, RevolutionBody};
use crate::profiles::{NormalizedPair, ProfileFamily, RadialProfile};
use crate::quadrature::{find_tail_limit, radial_log_moment, InverseCdf, NodeSpacing, TABLE_NODES};
use crate::rng::RngStream;

pub use mcmc::{effective_sample_size, hit_and_run_log_concave, hit_and_run_uniform, McmcOptions};
pub use multiblock::{
    check_mixed_partial_signs, sample_multiblock, sample_nu, scale_law_density, ConditionReport, JointProfile,
    MultiblockDraws, SignCount, SIGN_TOLERANCE,
};

/// Tail mass allowed beyond an inverse-CDF table.
const TABLE_TAIL: f64 = 1e-12;

/// Exact one-dimensional law on `ℝ⁺`.
#[derive(Debug, Clone)]
pub enum RadialLaw {
    /// `Gamma(shape, scale)`.
    Gamma(Gamma<f64>),
    /// `σ·χ_k`, via `χ²_k = Gamma(k/2, 2)`.
    ScaledChi { sigma: f64, chi2: Gamma<f64> },
    /// `c·V^{1/n}` for `V` uniform on `[0, 1]`.
    UniformPower { cutoff: f64, n: f64 },
    /// `(G/β)^{1/p}` for `G ∼ Gamma(shape, 1)`.
    PowerGamma { gamma: Gamma<f64>, beta: f64, p: f64 },
    /// Point mass.
    Atom(f64),
    /// Tabulated continuous part with an optional atom of the given weight.
    Table { table: Option<InverseCdf>, atom: Option<(f64, f64)> },
}

fn gamma(shape: f64, scale: f64) -> Result<Gamma<f64>> {
    Gamma::new(shape, scale).map_err(|e| Error::InvalidParameter(e.to_string()))
}

impl RadialLaw {
    /// Law of `R = |X|_B`: density proportional to `r^{n−1} ρ(r)`.
    pub fn radius(n: usize, profile: &RadialProfile) -> Result<Self> {
        let nf = n as f64;
        Ok(match profile.family() {
            ProfileFamily::Exponential { beta } => Self::Gamma(gamma(nf, 1.0 / beta)?),
            ProfileFamily::Gaussian { sigma } => Self::ScaledChi { sigma, chi2: gamma(0.5 * nf, 2.0)? },
            ProfileFamily::UniformCutoff { cutoff } => Self::UniformPower { cutoff, n: nf },
            ProfileFamily::PowerExp { p, beta } => Self::PowerGamma { gamma: gamma(nf / p, 1.0)?, beta, p },
            ProfileFamily::Custom => {
                let power = nf - 1.0;
                let log_density = |r: f64| {
                    if r <= 0.0 {
                        if power == 0.0 { profile.log_rho(0.0) } else { f64::NEG_INFINITY }
                    } else {
                        power * r.ln() + profile.log_rho(r)
                    }
                };
                let hi = table_limit(&log_density, profile)?;
                Self::Table {
                    table: Some(InverseCdf::from_log_density(
                        log_density,
                        0.0,
                        hi,
                        TABLE_NODES,
                        NodeSpacing::Logarithmic,
                    )?),
                    atom: None,
                }
            }
        })
    }

    /// Law of `S`: density proportional to `−sⁿ ρ′(s)`, plus a point mass at the
    /// cutoff when `ρ` jumps to zero there.
    pub fn scale(n: usize, profile: &RadialProfile) -> Result<Self> {
        let nf = n as f64;
        Ok(match profile.family() {
            ProfileFamily::Exponential { beta } => Self::Gamma(gamma(nf + 1.0, 1.0 / beta)?),
            ProfileFamily::Gaussian { sigma } => Self::ScaledChi { sigma, chi2: gamma(0.5 * (nf + 2.0), 2.0)? },
            ProfileFamily::UniformCutoff { cutoff } => Self::Atom(cutoff),
            ProfileFamily::PowerExp { p, beta } => Self::PowerGamma {
                gamma: gamma((nf + p) / p, 1.0)?,
                beta,
                p,
            },
            ProfileFamily::Custom => {
                if profile.rho_prime(1.0).is_none() {
                    return Err(Error::MissingDerivative);
                }
                let log_density = |s: f64| {
                    let d = profile.rho_prime(s).unwrap_or(0.0);
                    if s <= 0.0 || !(d < 0.0) {
                        f64::NEG_INFINITY
                    } else {
                        nf * s.ln() + (-d).ln()
                    }
                };
                let cutoff = profile.cutoff();
                let log_continuous =
                    radial_log_moment(n + 1, |s| log_density(s) - nf * s.ln(), cutoff, 1e-12).ok();
                let log_atom = if profile.has_terminal_atom() {
                    Some(nf * cutoff.ln() + profile.log_rho(cutoff))
                } else {
                    None
                };
                match (log_continuous, log_atom) {
                    (None, Some(_)) => Self::Atom(cutoff),
                    (None, None) => {
                        return Err(Error::Tabulation("law of S has no mass".into()));
                    }
                    (Some(lc), atom) => {
                        let hi = table_limit(&log_density, profile)?;
                        let table = InverseCdf::from_log_density(
                            log_density,
                            0.0,
                            hi,
                            TABLE_NODES,
                            NodeSpacing::Logarithmic,
                        )?;
                        let atom = atom.map(|la| (cutoff, 1.0 / (1.0 + (lc - la).exp())));
                        Self::Table { table: Some(table), atom }
                    }
                }
            }
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gamma(g) => g.sample(rng),
            Self::ScaledChi { sigma, chi2 } => sigma * chi2.sample(rng).sqrt(),
            Self::UniformPower { cutoff, n } => cutoff * rng.random::<f64>().powf(n.recip()),
            Self::PowerGamma { gamma, beta, p } => (gamma.sample(rng) / beta).powf(p.recip()),
            Self::Atom(c) => *c,
            Self::Table { table, atom } => {
                let u: f64 = rng.random();
                match (atom, table) {
                    (Some((c, w)), _) if u < *w => *c,
                    (Some((_, w)), Some(t)) => t.quantile((u - w) / (1.0 - w)),
                    (None, Some(t)) => t.quantile(u),
                    (_, None) => unreachable!("table law without continuous part or atom"),
                }
            }
        }
    }
}

fn table_limit<G: Fn(f64) -> f64>(log_density: &G, profile: &RadialProfile) -> Result<f64> {
    let cutoff = profile.cutoff();
    if cutoff.is_finite() {
        Ok(cutoff)
    } else {
        find_tail_limit(log_density, profile.scale(), TABLE_TAIL)
            .map_err(|e| Error::Tabulation(format!("tail mass above {TABLE_TAIL:e} beyond grid: {e}")))
    }
}

/// Precomputed exact sampler for the uniform measure on a body.
#[derive(Debug, Clone)]
enum Plan {
    Lp { n: usize, p: f64, coord: Option<Gamma<f64>> },
    Cube,
    Simplex { vertices: Vec<Vec<f64>> },
    Product(Vec<(usize, Plan)>),
    Dilated(Box<Plan>, f64),
    Revolution { t_law: InverseCdf, body: Box<RevolutionBody>, base: Box<Plan> },
}

impl Plan {
    /// `None` when the body has no exact sampler.
    fn build(body: &ConvexBody) -> Result<Option<Plan>> {
        let n = body.dim();
        Ok(Some(match body.family() {
            Family::LpBall { p } => Plan::Lp {
                n,
                p,
                coord: if p == 1.0 || p == 2.0 { None } else { Some(gamma(1.0 / p, 1.0)?) },
            },
            Family::Hypercube => Plan::Cube,
            Family::Simplex => Plan::Simplex {
                vertices: body.simplex_vertices().expect("simplex").to_vec(),
            },
            Family::Product => {
                let mut parts = Vec::new();
                for f in body.factors().expect("product") {
                    match Plan::build(f)? {
                        Some(p) => parts.push((f.dim(), p)),
                        None => return Ok(None),
                    }
                }
                Plan::Product(parts)
            }
            Family::Dilated => {
                let (inner, lambda) = body.dilation().expect("dilated");
                match Plan::build(inner)? {
                    Some(p) => Plan::Dilated(Box::new(p), lambda),
                    None => return Ok(None),
                }
            }
            Family::Revolution => return Plan::revolution(body.revolution().expect("revolution")).map(Some),
            Family::Generic => return Ok(None),
        }))
    }

    fn revolution(k: &RevolutionBody) -> Result<Plan> {
        let (lo, hi) = k.interval();
        let n = k.base().dim() as f64;
        let t_law = InverseCdf::from_log_density(
            |t| n * k.radius(t).max(0.0).ln(),
            lo,
            hi,
            TABLE_NODES,
            NodeSpacing::Uniform,
        )?;
        let base = Plan::build(k.base())?
            .ok_or_else(|| Error::InvalidParameter("base body of revolution needs an exact sampler".into()))?;
        Ok(Plan::Revolution { t_law, body: Box::new(k.clone()), base: Box::new(base) })
    }

    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) {
        match self {
            Plan::Lp { n, p, coord } => {
                // Coordinates with density ∝ e^{−|t|^p}, projected to the ℓᵖ
                // sphere (cone measure), then scaled by V^{1/n}.
                let mut norm = 0.0;
                for o in out.iter_mut() {
                    let v = match coord {
                        None if *p == 2.0 => rng.sample::<f64, _>(StandardNormal),
                        None => {
                            let e = -rng.random::<f64>().ln();
                            if rng.random::<bool>() { e } else { -e }
                        }
                        Some(g) => {
                            let e = g.sample(rng).powf(p.recip());
                            if rng.random::<bool>() { e } else { -e }
                        }
                    };
                    norm += if *p == 2.0 { v * v } else { v.abs().powf(*p) };
                    *o = v;
                }
                let norm = norm.powf(p.recip());
                let radius = rng.random::<f64>().powf((*n as f64).recip());
                let scale = if norm > 0.0 { radius / norm } else { 0.0 };
                out.iter_mut().for_each(|o| *o *= scale);
            }
            Plan::Cube => out.iter_mut().for_each(|o| *o = rng.random_range(-1.0..1.0)),
            Plan::Simplex { vertices } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let weights: Vec<f64> = vertices.iter().map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                let total: f64 = weights.iter().sum();
                for (w, v) in weights.iter().zip(vertices) {
                    for (o, c) in out.iter_mut().zip(v) {
                        *o += w / total * c;
                    }
                }
            }
            Plan::Product(parts) => {
                let mut offset = 0;
                for (d, plan) in parts {
                    plan.draw(rng, &mut out[offset..offset + d]);
                    offset += d;
                }
            }
            Plan::Dilated(inner, lambda) => {
                inner.draw(rng, out);
                out.iter_mut().for_each(|o| *o *= lambda);
            }
            Plan::Revolution { t_law, body, base } => {
                let t = t_law.quantile(rng.random());
                out[0] = t;
                base.draw(rng, &mut out[1..]);
                let r = body.radius(t).max(0.0);
                out[1..].iter_mut().for_each(|o| *o *= r);
            }
        }
    }
}

/// Uniform sampler for a body: exact where a construction exists, hit-and-run otherwise.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    body: ConvexBody,
    plan: Option<Plan>,
    pub mcmc: McmcOptions,
}

impl UniformSampler {
    pub fn new(body: &ConvexBody) -> Result<Self> {
        Ok(Self { body: body.clone(), plan: Plan::build(body)?, mcmc: McmcOptions::default() })
    }

    pub fn is_exact(&self) -> bool {
        self.plan.is_some()
    }

    /// `count` rows into a fresh buffer.
    pub fn fill(&self, count: usize, rng: &mut RngStream) -> Result<(Vec<f64>, Option<McmcDiagnostics>)> {
        let n = self.body.dim();
        match &self.plan {
            Some(plan) => {
                let mut data = vec![0.0; count * n];
                for row in data.chunks_exact_mut(n) {
                    plan.draw(rng, row);
                }
                Ok((data, None))
            }
            None => {
                let (data, diag) = hit_and_run_uniform(&self.body, count, rng, &self.mcmc)?;
                Ok((data, Some(diag)))
            }
        }
    }
}

fn batch_from(
    dim: usize,
    data: Vec<f64>,
    generator: &str,
    rng: &RngStream,
    subs: Vec<&RngStream>,
    mcmc: Option<McmcDiagnostics>,
) -> Result<SampleBatch> {
    let mut prov = Provenance::exact(generator, rng);
    prov.sub_streams = subs.into_iter().map(|s| s.snapshot()).collect();
    prov.approximate = mcmc.is_some();
    prov.mcmc = mcmc;
    SampleBatch::new(dim, data, prov)
}

/// I.i.d. uniform draws on `B`.
pub fn sample_uniform_body(body: &ConvexBody, count: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let sampler = UniformSampler::new(body)?;
    let (data, diag) = sampler.fill(count, rng)?;
    let name = if sampler.is_exact() { "uniform-exact" } else { "uniform-hit-and-run" };
    batch_from(body.dim(), data, name, rng, vec![], diag)
}

/// Draws of `R = |X|_B` under the normalized pair.
pub fn sample_radius(pair: &NormalizedPair, count: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let law = RadialLaw::radius(pair.dim(), &pair.profile)?;
    let data = (0..count).map(|_| law.draw(rng)).collect();
    batch_from(1, data, "radius", rng, vec![], None)
}

/// Draws of the scale variable `S` of the `S·U` decomposition.
pub fn sample_scale(pair: &NormalizedPair, count: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let law = RadialLaw::scale(pair.dim(), &pair.profile)?;
    let data = (0..count).map(|_| law.draw(rng)).collect();
    batch_from(1, data, "scale", rng, vec![], None)
}

/// `X = S·U` with `S` and `U` drawn from independent sub-streams.
pub fn sample_su(pair: &NormalizedPair, count: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let mut s_rng = rng.derive("S");
    let mut u_rng = rng.derive("U");
    let law = RadialLaw::scale(pair.dim(), &pair.profile)?;
    let (mut data, diag) = UniformSampler::new(&pair.body)?.fill(count, &mut u_rng)?;
    for row in data.chunks_exact_mut(pair.dim()) {
        let s = law.draw(&mut s_rng);
        row.iter_mut().for_each(|v| *v *= s);
    }
    batch_from(pair.dim(), data, "scale-times-uniform", rng, vec![&s_rng, &u_rng], diag)
}

/// Cone-measure draws `θ = U/|U|_B` into a buffer, re-drawing degenerate `U = 0`.
fn fill_cone(sampler: &UniformSampler, body: &ConvexBody, count: usize, rng: &mut RngStream)
    -> Result<(Vec<f64>, Option<McmcDiagnostics>)> {
    let n = body.dim();
    let (mut data, diag) = sampler.fill(count, rng)?;
    let mut rows_ok = Vec::with_capacity(count * n);
    loop {
        for row in data.chunks_exact(n) {
            let g = body.gauge_unchecked(row);
            if g > 0.0 && rows_ok.len() < count * n {
                rows_ok.extend(row.iter().map(|v| v / g));
            }
        }
        if rows_ok.len() == count * n {
            return Ok((rows_ok, diag));
        }
        data = sampler.fill(count - rows_ok.len() / n, rng)?.0;
    }
}

/// Draws from the normalized cone measure on `∂B`.
pub fn sample_cone_measure(body: &ConvexBody, count: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let sampler = UniformSampler::new(body)?;
    let (data, diag) = fill_cone(&sampler, body, count, rng)?;
    batch_from(body.dim(), data, "cone-measure", rng, vec![], diag)
}

/// `X = R·θ` (polar decomposition) with `R` and `θ` from independent sub-streams.
pub fn sample_polar(pair: &NormalizedPair, count: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let mut r_rng = rng.derive("R");
    let mut t_rng = rng.derive("theta");
    let law = RadialLaw::radius(pair.dim(), &pair.profile)?;
    let sampler = UniformSampler::new(&pair.body)?;
    let (mut data, diag) = fill_cone(&sampler, &pair.body, count, &mut t_rng)?;
    for row in data.chunks_exact_mut(pair.dim()) {
        let r = law.draw(&mut r_rng);
        row.iter_mut().for_each(|v| *v *= r);
    }
    batch_from(pair.dim(), data, "polar", rng, vec![&r_rng, &t_rng], diag)
}

/// Uniform draws on a body of revolution: `t ∝ R(t)ⁿ`, then `x = R(t)·U`.
pub fn sample_revolution(k: &RevolutionBody, count: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    let plan = Plan::revolution(k)?;
    let dim = k.total_dim();
    let mut data = vec![0.0; count * dim];
    for row in data.chunks_exact_mut(dim) {
        plan.draw(rng, row);
    }
    batch_from(dim, data, "revolution", rng, vec![], None)
}

/// Default number of draws per work chunk in [`sample_parallel`].
pub const CHUNK_DRAWS: usize = 1 << 16;

/// Run `sampler` over fixed-size chunks on the current rayon pool.
///
/// Chunk `i` uses `rng.derive_index(i)`, so the result depends only on
/// `(count, chunk, rng)` and not on the number of worker threads.
pub fn sample_parallel<S>(count: usize, chunk: usize, rng: &RngStream, sampler: S) -> Result<SampleBatch>
where
    S: Fn(usize, &mut RngStream) -> Result<SampleBatch> + Sync,
{
    let chunk = chunk.max(1);
    let chunks = count.div_ceil(chunk).max(1);
    let parts: Result<Vec<SampleBatch>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let m = chunk.min(count - i * chunk);
            let mut r = rng.derive_index(i as u64);
            sampler(m, &mut r)
        })
        .collect();
    SampleBatch::concat(parts?)
}

#[cfg(test)]
mod tests;
