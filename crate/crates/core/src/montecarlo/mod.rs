//! Samplers for every family, the ordered Fisher check, and estimators that
//! compare simulated frequencies against the computed probabilities.
//!
//! Every trial draws from its own ChaCha stream keyed by (seed, index), so
//! results do not depend on how the work is split across threads.

mod pairs;
mod sampler;

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

pub use pairs::{
    count_inseparable_pairs, count_inseparable_pairs_fast, count_inseparable_pairs_flat, count_inseparable_pairs_perturbed,
    count_with_each_kernel, is_inseparable_ordered,
};
pub(crate) use sampler::Sampler;

use crate::error::{domain, Error, Result};
use crate::twopoint::ComponentSpec;

pub type McRng = rand_chacha::ChaCha8Rng;

pub const DEFAULT_CONFIDENCE: f64 = 0.997;
pub const DEFAULT_MAX_BUDGET: f64 = 5e12;
pub const MIN_TWO_POINT_TRIALS: u64 = 10_000;
const CHUNK: u64 = 1 << 16;

pub type RadialDraw = dyn Fn(&mut McRng, usize) -> f64 + Send + Sync;

/// A user-supplied law for the norm ‖x‖ of a spherically invariant family.
/// The closure receives the stream and the dimension.
#[derive(Clone)]
pub struct RadialSampler {
    pub name: String,
    pub draw: Arc<RadialDraw>,
}

impl RadialSampler {
    pub fn new(name: impl Into<String>, draw: impl Fn(&mut McRng, usize) -> f64 + Send + Sync + 'static) -> Self {
        RadialSampler { name: name.into(), draw: Arc::new(draw) }
    }
}

impl fmt::Debug for RadialSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialSampler({})", self.name)
    }
}

impl PartialEq for RadialSampler {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.draw, &other.draw)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    UniformBall,
    /// Uniform on {inner ≤ ‖x‖ ≤ 1}.
    SphericalLayer {
        inner: f64,
    },
    StandardNormal,
    /// Density ∝ e^{−‖x‖}; the norm is Gamma(n, 1).
    SphericalExponential,
    SphericalRadial(RadialSampler),
    UniformCube,
    ProductIid(ComponentSpec),
    ProductGeneral(Vec<ComponentSpec>),
    /// N(0, I/γ).
    GaussianSlc {
        gamma: f64,
    },
    SlcMixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        gammas: Vec<f64>,
    },
    /// i.i.d. coordinates with density (√2/2)e^{−√2|t|}.
    LaplaceProduct,
    /// Point i is uniform in the ε-ball around `base_points[i]`.
    PerturbedModel {
        epsilon: f64,
        base_points: Vec<Vec<f64>>,
    },
    /// Interleaved dependent pairs: y a cube vertex, x a vertex of the cube
    /// spanned by the centre and y.
    DependentHalfCube,
}

impl DistributionSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return domain("dimension must be at least 1");
        }
        match self {
            DistributionSpec::SphericalLayer { inner } if !(*inner > 0.0 && *inner < 1.0) => {
                domain(format!("layer inner radius must be in (0,1), got {inner}"))
            }
            DistributionSpec::ProductIid(c) => c.validate(),
            DistributionSpec::ProductGeneral(cs) => {
                if cs.len() != n {
                    return domain(format!("{} components given for dimension {n}", cs.len()));
                }
                cs.iter().try_for_each(|c| c.validate())
            }
            DistributionSpec::GaussianSlc { gamma } if !(*gamma > 0.0 && gamma.is_finite()) => {
                domain(format!("gamma must be positive, got {gamma}"))
            }
            DistributionSpec::SlcMixture { weights, means, gammas } => {
                if weights.is_empty() || weights.len() != means.len() || weights.len() != gammas.len() {
                    return domain("mixture needs equally many weights, means and gammas");
                }
                if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return domain("mixture weights must be nonnegative and sum to 1");
                }
                if means.iter().any(|m| m.len() != n || m.iter().any(|v| !v.is_finite())) {
                    return domain(format!("mixture means must be finite points of dimension {n}"));
                }
                if gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
                    return domain("mixture gammas must be positive");
                }
                Ok(())
            }
            DistributionSpec::PerturbedModel { epsilon, base_points } => {
                if !(*epsilon > 0.0 && *epsilon < 1.0) {
                    return domain(format!("epsilon must be in (0,1), got {epsilon}"));
                }
                for b in base_points {
                    if b.len() != n {
                        return domain(format!("base point of dimension {} in dimension {n}", b.len()));
                    }
                    let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if !(norm <= 1.0 - epsilon) {
                        return domain(format!("base point norm {norm} exceeds 1 − ε"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The centre the bounds for this family refer to: the mean, or the cube
    /// centre for the half-cube pairs. `None` for the perturbed model, whose
    /// centres are the base points.
    pub fn default_center(&self, n: usize) -> Option<Vec<f64>> {
        match self {
            DistributionSpec::UniformCube | DistributionSpec::DependentHalfCube => Some(vec![0.5; n]),
            DistributionSpec::ProductIid(c) => Some(vec![c.mean(); n]),
            DistributionSpec::ProductGeneral(cs) => Some(cs.iter().map(|c| c.mean()).collect()),
            DistributionSpec::SlcMixture { weights, means, .. } => {
                let mut c = vec![0.0; n];
                for (w, m) in weights.iter().zip(means) {
                    c.iter_mut().zip(m).for_each(|(ck, mk)| *ck += w * mk);
                }
                Some(c)
            }
            DistributionSpec::PerturbedModel { .. } => None,
            _ => Some(vec![0.0; n]),
        }
    }
}

/// A binomial frequency with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MCEstimate {
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub confidence: f64,
}

impl MCEstimate {
    pub fn new(hits: u64, trials: u64, seed: u64, confidence: f64) -> Result<MCEstimate> {
        if trials == 0 || hits > trials {
            return domain(format!("{hits} hits in {trials} trials"));
        }
        if !(confidence > 0.0 && confidence < 1.0) {
            return domain(format!("confidence must be in (0,1), got {confidence}"));
        }
        let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + 0.5 * confidence);
        let (nt, p) = (trials as f64, hits as f64 / trials as f64);
        let z2 = z * z;
        let denom = 1.0 + z2 / nt;
        let mid = (p + z2 / (2.0 * nt)) / denom;
        let half = z / denom * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt();
        Ok(MCEstimate {
            trials,
            hits,
            p_hat: p,
            ci_low: (mid - half).clamp(0.0, p),
            ci_high: (mid + half).clamp(p, 1.0),
            seed,
            confidence,
        })
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

fn stream(seed: u64, index: u64) -> McRng {
    let mut rng = McRng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `count` points drawn from one seeded stream.
pub fn sample(spec: &DistributionSpec, n: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let s = Sampler::new(spec, n)?;
    let mut buf = Vec::new();
    s.fill_set(&mut McRng::seed_from_u64(seed), count, &mut buf)?;
    Ok(buf.chunks(n).map(|p| p.to_vec()).collect())
}

fn resolve_center(spec: &DistributionSpec, n: usize, c: Option<&[f64]>) -> Result<Option<Vec<f64>>> {
    match c {
        Some(c) if c.len() != n => domain(format!("centre has dimension {}, expected {n}", c.len())),
        Some(c) => Ok(Some(c.to_vec())),
        None => Ok(spec.default_center(n)),
    }
}

fn sum_chunks(chunks: u64, f: impl Fn(u64) -> Result<u64> + Sync + Send) -> Result<u64> {
    #[cfg(feature = "parallel")]
    {
        (0..chunks).into_par_iter().map(f).try_reduce(|| 0, |a, b| Ok(a + b))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..chunks).map(f).sum()
    }
}

/// Frequency of the ordered check failing for an independent pair (x, y).
/// For the half-cube family the pair is the dependent one; for the perturbed
/// model x and y come from the first two base points and the check is taken
/// relative to the first.
pub fn estimate_two_point(
    spec: &DistributionSpec,
    n: usize,
    alpha: f64,
    c: Option<&[f64]>,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    if trials < MIN_TWO_POINT_TRIALS {
        return domain(format!("need at least {MIN_TWO_POINT_TRIALS} trials, got {trials}"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must be in (0,1], got {alpha}"));
    }
    let s = Sampler::new(spec, n)?;
    let center = match resolve_center(spec, n, c)? {
        Some(c) => c,
        None => {
            if s.base_count().unwrap_or(0) < 2 {
                return domain("perturbed two-point estimate needs two base points");
            }
            s.base_point(0).expect("checked").to_vec()
        }
    };
    let chunks = trials.div_ceil(CHUNK);
    let hits = sum_chunks(chunks, |k| {
        let mut rng = stream(seed, k);
        let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
        let len = CHUNK.min(trials - k * CHUNK);
        let mut hits = 0;
        for _ in 0..len {
            if s.is_paired() {
                s.fill_pair(&mut rng, &mut x, &mut y);
            } else {
                s.fill(&mut rng, 0, &mut x)?;
                s.fill(&mut rng, 1, &mut y)?;
            }
            hits += pairs::inseparable_raw(&x, &y, alpha, &center) as u64;
        }
        Ok(hits)
    })?;
    MCEstimate::new(hits, trials, seed, DEFAULT_CONFIDENCE)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SetEstimate {
    /// Fraction of sets with no inseparable ordered pair.
    pub p_separable: MCEstimate,
    pub mean_inseparable_pairs: f64,
    /// Standard error of the mean pair count.
    pub pairs_std_error: f64,
}

/// The pair-evaluation limit: `SEPBOUND_MAX_BUDGET` if set, else
/// [`DEFAULT_MAX_BUDGET`].
pub fn max_budget() -> f64 {
    std::env::var("SEPBOUND_MAX_BUDGET").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_BUDGET)
}

/// Draws `trials` independent M-point sets and counts inseparable ordered
/// pairs in each. Refuses when trials·M² exceeds `budget`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_set_separability_with_budget(
    spec: &DistributionSpec,
    n: usize,
    m: usize,
    alpha: f64,
    c: Option<&[f64]>,
    trials: u64,
    seed: u64,
    budget: f64,
) -> Result<SetEstimate> {
    if m < 2 {
        return domain(format!("need at least two points per set, got {m}"));
    }
    if trials == 0 {
        return domain("need at least one trial");
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must be in (0,1], got {alpha}"));
    }
    let required = trials as f64 * (m as f64).powi(2);
    if required > budget {
        return Err(Error::Budget { required, limit: budget });
    }
    let s = Sampler::new(spec, n)?;
    let center = resolve_center(spec, n, c)?;
    if center.is_none() && s.base_count().unwrap_or(0) < m {
        return domain(format!("perturbed model needs {m} base points"));
    }
    let one = |t: u64| -> Result<u64> {
        let mut buf = Vec::new();
        s.fill_set(&mut stream(seed, t), m, &mut buf)?;
        match &center {
            Some(c) => count_inseparable_pairs_fast(&buf, n, alpha, c),
            None => {
                let bases: Vec<Vec<f64>> = (0..m).map(|i| s.base_point(i).expect("checked").to_vec()).collect();
                count_inseparable_pairs_perturbed(&buf, &bases, n, alpha)
            }
        }
    };
    #[cfg(feature = "parallel")]
    let counts: Vec<u64> = (0..trials).into_par_iter().map(one).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let counts: Vec<u64> = (0..trials).map(one).collect::<Result<_>>()?;
    let separable = counts.iter().filter(|&&k| k == 0).count() as u64;
    let nt = trials as f64;
    let mean = counts.iter().map(|&k| k as f64).sum::<f64>() / nt;
    let var = if trials > 1 { counts.iter().map(|&k| (k as f64 - mean).powi(2)).sum::<f64>() / (nt - 1.0) } else { 0.0 };
    Ok(SetEstimate {
        p_separable: MCEstimate::new(separable, trials, seed, DEFAULT_CONFIDENCE)?,
        mean_inseparable_pairs: mean,
        pairs_std_error: (var / nt).sqrt(),
    })
}

/// [`estimate_set_separability_with_budget`] with the budget from
/// [`max_budget`].
pub fn estimate_set_separability(
    spec: &DistributionSpec,
    n: usize,
    m: usize,
    alpha: f64,
    c: Option<&[f64]>,
    trials: u64,
    seed: u64,
) -> Result<SetEstimate> {
    estimate_set_separability_with_budget(spec, n, m, alpha, c, trials, seed, max_budget())
}
