use std::f64::consts::FRAC_1_SQRT_2;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::{Exp1, Gamma, StandardNormal};

use super::{DistributionSpec, McRng};
use crate::error::{domain, Error, Result};
use crate::twopoint::ComponentSpec;

/// A distribution prepared for one dimension.
pub(crate) struct Sampler {
    n: usize,
    kind: Kind,
}

enum Kind {
    Ball,
    Layer { ln_inner_pow: f64 },
    Normal,
    Exponential(Gamma<f64>),
    Radial(super::RadialSampler),
    Cube,
    Iid(ComponentSpec),
    Components(Vec<ComponentSpec>),
    Slc { scale: f64 },
    Mixture { pick: WeightedIndex<f64>, means: Vec<Vec<f64>>, scales: Vec<f64> },
    Laplace,
    Perturbed { eps: f64, bases: Vec<Vec<f64>> },
    HalfCube,
}

pub(crate) fn sample_component(c: &ComponentSpec, rng: &mut McRng) -> f64 {
    match c {
        ComponentSpec::Uniform01 => rng.gen::<f64>(),
        ComponentSpec::SymmetricBernoulli => {
            if rng.gen::<bool>() {
                1.0
            } else {
                0.0
            }
        }
        ComponentSpec::ThreePoint { sigma0 } => {
            let p = 2.0 * sigma0 * sigma0;
            let u = rng.gen::<f64>();
            if u < p {
                0.0
            } else if u < 1.0 - p {
                0.5
            } else {
                1.0
            }
        }
        ComponentSpec::Laplace { scale } => laplace(rng, *scale),
        ComponentSpec::StandardNormal => rng.sample(StandardNormal),
        ComponentSpec::Tabulated(t) => t.quantile(rng.gen::<f64>()),
    }
}

fn laplace(rng: &mut McRng, scale: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    if rng.gen::<bool>() {
        scale * e
    } else {
        -scale * e
    }
}

/// Fills `out` with a uniform direction times `radius`.
fn direction(rng: &mut McRng, radius: f64, out: &mut [f64]) {
    loop {
        let mut s = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
            s += *v * *v;
        }
        if s > 0.0 {
            let k = radius / s.sqrt();
            out.iter_mut().for_each(|v| *v *= k);
            return;
        }
    }
}

fn uniform_ball(rng: &mut McRng, n: usize, out: &mut [f64]) {
    let u: f64 = 1.0 - rng.gen::<f64>();
    direction(rng, (u.ln() / n as f64).exp(), out);
}

impl Sampler {
    pub(crate) fn new(spec: &DistributionSpec, n: usize) -> Result<Sampler> {
        spec.validate(n)?;
        let kind = match spec {
            DistributionSpec::UniformBall => Kind::Ball,
            DistributionSpec::SphericalLayer { inner } => Kind::Layer { ln_inner_pow: n as f64 * inner.ln() },
            DistributionSpec::StandardNormal => Kind::Normal,
            DistributionSpec::SphericalExponential => {
                Kind::Exponential(Gamma::new(n as f64, 1.0).map_err(|e| Error::Domain(e.to_string()))?)
            }
            DistributionSpec::SphericalRadial(r) => Kind::Radial(r.clone()),
            DistributionSpec::UniformCube => Kind::Cube,
            DistributionSpec::ProductIid(c) => Kind::Iid(c.clone()),
            DistributionSpec::ProductGeneral(cs) => Kind::Components(cs.clone()),
            DistributionSpec::GaussianSlc { gamma } => Kind::Slc { scale: 1.0 / gamma.sqrt() },
            DistributionSpec::SlcMixture { weights, means, gammas } => Kind::Mixture {
                pick: WeightedIndex::new(weights).map_err(|e| Error::Domain(format!("mixture weights: {e}")))?,
                means: means.clone(),
                scales: gammas.iter().map(|g| 1.0 / g.sqrt()).collect(),
            },
            DistributionSpec::LaplaceProduct => Kind::Laplace,
            DistributionSpec::PerturbedModel { epsilon, base_points } => {
                Kind::Perturbed { eps: *epsilon, bases: base_points.clone() }
            }
            DistributionSpec::DependentHalfCube => Kind::HalfCube,
        };
        Ok(Sampler { n, kind })
    }

    /// Whether points come in dependent (x, y) pairs.
    pub(crate) fn is_paired(&self) -> bool {
        matches!(self.kind, Kind::HalfCube)
    }

    pub(crate) fn base_point(&self, index: usize) -> Option<&[f64]> {
        match &self.kind {
            Kind::Perturbed { bases, .. } => bases.get(index).map(|b| b.as_slice()),
            _ => None,
        }
    }

    pub(crate) fn base_count(&self) -> Option<usize> {
        match &self.kind {
            Kind::Perturbed { bases, .. } => Some(bases.len()),
            _ => None,
        }
    }

    /// One point; `index` selects the base point of the perturbed model.
    pub(crate) fn fill(&self, rng: &mut McRng, index: usize, out: &mut [f64]) -> Result<()> {
        let n = self.n;
        match &self.kind {
            Kind::Ball => uniform_ball(rng, n, out),
            Kind::Layer { ln_inner_pow } => {
                // r^n is uniform on [Rⁿ, 1]
                let inner_pow = ln_inner_pow.exp();
                let u: f64 = rng.gen();
                let rn = inner_pow + u * (1.0 - inner_pow);
                direction(rng, (rn.ln() / n as f64).exp(), out);
            }
            Kind::Normal => out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)),
            Kind::Exponential(g) => {
                let r = g.sample(rng);
                direction(rng, r, out);
            }
            Kind::Radial(r) => {
                let radius = (r.draw)(rng, n);
                direction(rng, radius, out);
            }
            Kind::Cube => out.iter_mut().for_each(|v| *v = rng.gen::<f64>()),
            Kind::Iid(c) => out.iter_mut().for_each(|v| *v = sample_component(c, rng)),
            Kind::Components(cs) => {
                for (v, c) in out.iter_mut().zip(cs) {
                    *v = sample_component(c, rng);
                }
            }
            Kind::Slc { scale } => out.iter_mut().for_each(|v| *v = scale * rng.sample::<f64, _>(StandardNormal)),
            Kind::Mixture { pick, means, scales } => {
                let m = pick.sample(rng);
                for (v, mu) in out.iter_mut().zip(&means[m]) {
                    *v = mu + scales[m] * rng.sample::<f64, _>(StandardNormal);
                }
            }
            Kind::Laplace => out.iter_mut().for_each(|v| *v = laplace(rng, FRAC_1_SQRT_2)),
            Kind::Perturbed { eps, bases } => {
                let base = bases.get(index).ok_or_else(|| {
                    Error::Domain(format!("perturbed model has {} base points, point {index} requested", bases.len()))
                })?;
                uniform_ball(rng, n, out);
                for (v, b) in out.iter_mut().zip(base) {
                    *v = b + eps * *v;
                }
            }
            Kind::HalfCube => return domain("half-cube points come in pairs; use fill_pair"),
        }
        Ok(())
    }

    /// A dependent pair: y a random cube vertex, x a random vertex of the
    /// half-size cube spanned by the centre and y.
    pub(crate) fn fill_pair(&self, rng: &mut McRng, x: &mut [f64], y: &mut [f64]) {
        for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
            *yi = if rng.gen::<bool>() { 1.0 } else { 0.0 };
            *xi = if rng.gen::<bool>() { *yi } else { 0.5 };
        }
    }

    /// `count` points into a flat row-major buffer; paired families emit
    /// (x, y) pairs back to back.
    pub(crate) fn fill_set(&self, rng: &mut McRng, count: usize, out: &mut Vec<f64>) -> Result<()> {
        let n = self.n;
        out.clear();
        out.resize(count * n, 0.0);
        if self.is_paired() {
            let mut i = 0;
            while i + 1 < count {
                let (a, b) = out[i * n..(i + 2) * n].split_at_mut(n);
                self.fill_pair(rng, a, b);
                i += 2;
            }
            if i < count {
                let mut spare = vec![0.0; n];
                self.fill_pair(rng, &mut out[i * n..(i + 1) * n], &mut spare);
            }
            return Ok(());
        }
        for i in 0..count {
            self.fill(rng, i, &mut out[i * n..(i + 1) * n])?;
        }
        Ok(())
    }
}
