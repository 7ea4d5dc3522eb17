//! Theorem registry: turns two-point probabilities (or direct closed forms)
//! into the largest admissible sample size M.
//!
//! With f the probability that an ordered pair is inseparable, the expected
//! number of inseparable ordered pairs among M points is M(M−1)f. Keeping it
//! below δ gives M < ½ + √(¼ + δ/f), or the simpler M ≤ √(δ/f).

mod exponent;
mod perturbed;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

pub use exponent::{exponent_b, exponent_b_numeric, NumericExponent};
pub use perturbed::{perturbed_ln_m, perturbed_probability, PerturbedBound};

use crate::error::{domain, hypothesis, Error, Result};
use crate::specfun::LogProb;
use crate::twopoint::{
    self, indbound_exponent, CenterChoice, ComponentSpec, Kind, LayerRadial, RadialModel, SlcParams, TwoPointResult,
};

/// Where the Fisher centre sits relative to the distribution.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Center {
    Origin,
    CubeCenter,
    #[default]
    Mean,
    /// Worst case over every centre in the unit cube.
    AnyPoint,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityQuery {
    pub n: usize,
    pub alpha: f64,
    pub delta: f64,
    pub center: Center,
}

impl SeparabilityQuery {
    pub fn new(n: usize, alpha: f64, delta: f64) -> SeparabilityQuery {
        SeparabilityQuery { n, alpha, delta, center: Center::Mean }
    }

    pub fn with_center(mut self, center: Center) -> SeparabilityQuery {
        self.center = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return domain("dimension n must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return domain(format!("alpha must be in (0,1], got {}", self.alpha));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return domain(format!("delta must be in (0,1), got {}", self.delta));
        }
        if let Center::Explicit(c) = &self.center {
            if c.len() != self.n {
                return domain(format!("explicit centre has length {}, expected {}", c.len(), self.n));
            }
        }
        Ok(())
    }
}

/// Which conversion from f to M to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// M < ½ + √(¼ + δ/f).
    Exact,
    /// M ≤ √(δ/f).
    Simple,
}

/// Whether the bound is necessary and sufficient or only sufficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Guarantee {
    ExactNecessarySufficient,
    Sufficient,
}

impl Guarantee {
    pub fn as_str(self) -> &'static str {
        match self {
            Guarantee::ExactNecessarySufficient => "exact_necessary_sufficient",
            Guarantee::Sufficient => "sufficient",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub theorem_id: String,
    /// log₁₀ of the bound; −∞ when the bound is not positive.
    pub log10_m: f64,
    /// ⌊M⌋ when M < 2⁵³.
    pub m_exact: Option<u64>,
    pub mode: Guarantee,
    pub b_exponent: Option<f64>,
    pub validity_notes: Vec<String>,
    /// log₁₀ of the two-point function, when the bound goes through one.
    pub log10_f: Option<f64>,
}

impl BoundResult {
    fn from_ln_m(theorem_id: &str, ln_m: f64, mode: Guarantee) -> BoundResult {
        let log10_m = ln_m / std::f64::consts::LN_10;
        let m = ln_m.exp();
        let m_exact = (ln_m.is_finite() && m < 9_007_199_254_740_992.0).then(|| m.floor() as u64);
        let mut notes = Vec::new();
        if !(m >= 1.0) {
            notes.push("vacuous: bound is below 1".to_string());
        }
        BoundResult {
            theorem_id: theorem_id.to_string(),
            log10_m,
            m_exact,
            mode,
            b_exponent: None,
            validity_notes: notes,
            log10_f: None,
        }
    }

    /// The bound as a float (may be infinite for huge values).
    pub fn m(&self) -> f64 {
        10f64.powf(self.log10_m)
    }
}

/// ln M from ln f and δ.
pub fn ln_m_from_ln_f(ln_f: f64, delta: f64, mode: BoundMode) -> f64 {
    let l = delta.ln() - ln_f;
    match mode {
        BoundMode::Simple => 0.5 * l,
        BoundMode::Exact => {
            if l < 0.0 {
                (0.5 + (0.25 + l.exp()).sqrt()).ln()
            } else {
                // ½ + √(¼ + e^l) = e^{l/2}(½e^{−l/2} + √(1 + ¼e^{−l}))
                let x = (-0.5 * l).exp();
                0.5 * l + (0.5 * x + (1.0 + 0.25 * x * x).sqrt()).ln()
            }
        }
    }
}

pub fn m_from_f(f: LogProb, delta: f64, mode: BoundMode) -> Result<BoundResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must be in (0,1), got {delta}"));
    }
    if f.ln() == f64::NEG_INFINITY {
        return domain("f must be positive");
    }
    let mut r = BoundResult::from_ln_m("master_principle", ln_m_from_ln_f(f.ln(), delta, mode), Guarantee::Sufficient);
    r.log10_f = Some(f.log10());
    Ok(r)
}

macro_rules! theorem_ids {
    ($($variant:ident => $s:literal, $iff:literal;)*) => {
        /// Stable public identifiers of the registry entries.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
        pub enum TheoremId { $($variant,)* }

        impl TheoremId {
            pub const ALL: &'static [TheoremId] = &[$(TheoremId::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self { $(TheoremId::$variant => $s,)* }
            }

            /// Entries whose bound is necessary and sufficient.
            pub fn is_iff(self) -> bool {
                match self { $(TheoremId::$variant => $iff,)* }
            }
        }

        impl FromStr for TheoremId {
            type Err = Error;
            fn from_str(s: &str) -> Result<TheoremId> {
                match s {
                    $($s => Ok(TheoremId::$variant),)*
                    _ => Err(Error::Input(format!("unknown theorem id '{s}'"))),
                }
            }
        }
    };
}

theorem_ids! {
    Prototype => "prototype", false;
    PrototypeSet => "prototype_set", false;
    BallKnown => "ball_known", false;
    BallOptimal => "ball_optimal", true;
    BallSimple => "ball_simple", false;
    LayerOptimal => "layer_optimal", true;
    Slc => "slc", false;
    SlcImproved => "slc_improved", false;
    IndependentSlc => "independent_slc", false;
    MixtureSlc => "mixture_slc", false;
    NormalKnown => "normal_known", false;
    NormalOptimal => "normal_optimal", true;
    NormalSimple => "normal_simple", false;
    SphericalCustom => "spherical_custom", true;
    ExponentialOptimal => "exponential_optimal", true;
    ExponentialSimple => "exponential_simple", false;
    RotSimple => "rot_simple", false;
    RotGeneral => "rot_general", false;
    RotAlpha1 => "rot_alpha1", false;
    ProductHoeffding => "product_hoeffding", false;
    ProductBernstein => "product_bernstein", false;
    ProductChernoff => "product_chernoff", false;
    ProductLegacy => "product_legacy", false;
    Dependent => "dependent", false;
    Perturbed => "perturbed", false;
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A caller-supplied radial model.
#[derive(Clone)]
pub struct CustomRadial(pub Arc<dyn RadialModel>);

impl fmt::Debug for CustomRadial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomRadial({})", self.0.description())
    }
}

/// A registry entry together with its family parameters.
#[derive(Debug, Clone)]
pub enum Theorem {
    /// One point against a set Y; `r` is the ratio of the excluded ball's
    /// radius bound and `c` the density constant.
    Prototype {
        r: f64,
        c: f64,
    },
    PrototypeSet {
        r: f64,
        c: f64,
    },
    BallKnown,
    BallOptimal,
    BallSimple,
    LayerOptimal {
        inner: f64,
    },
    Slc(SlcParams),
    SlcImproved(SlcParams),
    IndependentSlc(Vec<SlcParams>),
    MixtureSlc(Vec<SlcParams>),
    NormalKnown,
    NormalOptimal,
    NormalSimple,
    SphericalCustom(CustomRadial),
    ExponentialOptimal,
    ExponentialSimple,
    RotSimple,
    RotGeneral,
    RotAlpha1,
    ProductHoeffding {
        sigma0: f64,
    },
    ProductBernstein {
        sigma0: f64,
    },
    /// One component is repeated across all coordinates; otherwise the list
    /// length must equal n.
    ProductChernoff(Vec<ComponentSpec>),
    ProductLegacy {
        sigma0: f64,
    },
    Dependent {
        sigma0: f64,
    },
    Perturbed {
        epsilon: f64,
    },
}

/// Loose parameter bag for building a [`Theorem`] from an id.
#[derive(Debug, Clone, Default)]
pub struct TheoremParams {
    pub r: Option<f64>,
    pub c: Option<f64>,
    pub inner: Option<f64>,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub slc_components: Vec<SlcParams>,
    pub sigma0: Option<f64>,
    pub components: Vec<ComponentSpec>,
    pub epsilon: Option<f64>,
    pub radial: Option<CustomRadial>,
}

fn need(v: Option<f64>, name: &str, id: TheoremId) -> Result<f64> {
    v.ok_or_else(|| Error::Input(format!("theorem {id} needs parameter --{name}")))
}

impl Theorem {
    pub fn build(id: TheoremId, p: &TheoremParams) -> Result<Theorem> {
        use TheoremId as T;
        let slc = || -> Result<SlcParams> { Ok(SlcParams { gamma: need(p.gamma, "gamma", id)?, mu: p.mu, x0_norm: 0.0 }) };
        let slc_list = || -> Result<Vec<SlcParams>> {
            if p.slc_components.is_empty() {
                return Err(Error::Input(format!("theorem {id} needs a list of SLC components")));
            }
            Ok(p.slc_components.clone())
        };
        Ok(match id {
            T::Prototype => Theorem::Prototype { r: need(p.r, "r", id)?, c: p.c.unwrap_or(1.0) },
            T::PrototypeSet => Theorem::PrototypeSet { r: need(p.r, "r", id)?, c: p.c.unwrap_or(1.0) },
            T::BallKnown => Theorem::BallKnown,
            T::BallOptimal => Theorem::BallOptimal,
            T::BallSimple => Theorem::BallSimple,
            T::LayerOptimal => Theorem::LayerOptimal { inner: need(p.inner, "R", id)? },
            T::Slc => Theorem::Slc(slc()?),
            T::SlcImproved => Theorem::SlcImproved(slc()?),
            T::IndependentSlc => Theorem::IndependentSlc(slc_list()?),
            T::MixtureSlc => Theorem::MixtureSlc(slc_list()?),
            T::NormalKnown => Theorem::NormalKnown,
            T::NormalOptimal => Theorem::NormalOptimal,
            T::NormalSimple => Theorem::NormalSimple,
            T::SphericalCustom => Theorem::SphericalCustom(
                p.radial.clone().ok_or_else(|| Error::Input("spherical_custom needs a radial model".into()))?,
            ),
            T::ExponentialOptimal => Theorem::ExponentialOptimal,
            T::ExponentialSimple => Theorem::ExponentialSimple,
            T::RotSimple => Theorem::RotSimple,
            T::RotGeneral => Theorem::RotGeneral,
            T::RotAlpha1 => Theorem::RotAlpha1,
            T::ProductHoeffding => Theorem::ProductHoeffding { sigma0: need(p.sigma0, "sigma0", id)? },
            T::ProductBernstein => Theorem::ProductBernstein { sigma0: need(p.sigma0, "sigma0", id)? },
            T::ProductChernoff => {
                if p.components.is_empty() {
                    return Err(Error::Input("product_chernoff needs at least one component".into()));
                }
                Theorem::ProductChernoff(p.components.clone())
            }
            T::ProductLegacy => Theorem::ProductLegacy { sigma0: need(p.sigma0, "sigma0", id)? },
            T::Dependent => Theorem::Dependent { sigma0: need(p.sigma0, "sigma0", id)? },
            T::Perturbed => Theorem::Perturbed { epsilon: need(p.epsilon, "epsilon", id)? },
        })
    }

    pub fn id(&self) -> TheoremId {
        use TheoremId as T;
        match self {
            Theorem::Prototype { .. } => T::Prototype,
            Theorem::PrototypeSet { .. } => T::PrototypeSet,
            Theorem::BallKnown => T::BallKnown,
            Theorem::BallOptimal => T::BallOptimal,
            Theorem::BallSimple => T::BallSimple,
            Theorem::LayerOptimal { .. } => T::LayerOptimal,
            Theorem::Slc(_) => T::Slc,
            Theorem::SlcImproved(_) => T::SlcImproved,
            Theorem::IndependentSlc(_) => T::IndependentSlc,
            Theorem::MixtureSlc(_) => T::MixtureSlc,
            Theorem::NormalKnown => T::NormalKnown,
            Theorem::NormalOptimal => T::NormalOptimal,
            Theorem::NormalSimple => T::NormalSimple,
            Theorem::SphericalCustom(_) => T::SphericalCustom,
            Theorem::ExponentialOptimal => T::ExponentialOptimal,
            Theorem::ExponentialSimple => T::ExponentialSimple,
            Theorem::RotSimple => T::RotSimple,
            Theorem::RotGeneral => T::RotGeneral,
            Theorem::RotAlpha1 => T::RotAlpha1,
            Theorem::ProductHoeffding { .. } => T::ProductHoeffding,
            Theorem::ProductBernstein { .. } => T::ProductBernstein,
            Theorem::ProductChernoff(_) => T::ProductChernoff,
            Theorem::ProductLegacy { .. } => T::ProductLegacy,
            Theorem::Dependent { .. } => T::Dependent,
            Theorem::Perturbed { .. } => T::Perturbed,
        }
    }
}

fn require_alpha_one(id: TheoremId, alpha: f64) -> Result<()> {
    if alpha != 1.0 {
        return hypothesis(format!("{id} is stated for alpha = 1, got {alpha}"));
    }
    Ok(())
}

/// Families centred at their mean (spherical, SLC) accept only that centre.
fn require_mean_center(id: TheoremId, center: &Center) -> Result<()> {
    match center {
        Center::Origin | Center::Mean => Ok(()),
        other => hypothesis(format!("{id} needs the centre at the distribution mean, got {other:?}")),
    }
}

/// Product theorems with the mean at the cube centre.
fn require_cube_center(id: TheoremId, center: &Center) -> Result<()> {
    match center {
        Center::CubeCenter | Center::Mean => Ok(()),
        other => hypothesis(format!("{id} needs the centre at the cube centre (= mean), got {other:?}")),
    }
}

fn hoeffding_center(center: &Center, n: usize) -> CenterChoice {
    match center {
        Center::Origin => CenterChoice::Explicit { c: vec![0.0; n], mu: None },
        Center::CubeCenter => CenterChoice::CubeCenter,
        Center::Mean => CenterChoice::Mean,
        Center::AnyPoint => CenterChoice::AnyPoint,
        Center::Explicit(c) => CenterChoice::Explicit { c: c.clone(), mu: None },
    }
}

fn chernoff_components(components: &[ComponentSpec], n: usize) -> Result<Vec<ComponentSpec>> {
    match components.len() {
        1 => Ok(vec![components[0].clone(); n]),
        k if k == n => Ok(components.to_vec()),
        k => domain(format!("product_chernoff has {k} components, expected 1 or n = {n}")),
    }
}

/// The two-point function of a registry entry; entries that bound M
/// directly return [`Error::Unsupported`].
pub fn two_point(q: &SeparabilityQuery, theorem: &Theorem) -> Result<TwoPointResult> {
    let (n, alpha) = (q.n, q.alpha);
    let id = theorem.id();
    match theorem {
        Theorem::BallKnown => {
            require_mean_center(id, &q.center)?;
            twopoint::ball_upper(n, alpha)
        }
        Theorem::BallOptimal => {
            require_mean_center(id, &q.center)?;
            twopoint::ball_exact(n, alpha)
        }
        Theorem::BallSimple => {
            require_mean_center(id, &q.center)?;
            if !(alpha < std::f64::consts::FRAC_1_SQRT_2) {
                return hypothesis(format!("ball_simple needs alpha < 1/√2, got {alpha}"));
            }
            if n <= 3 {
                return hypothesis(format!("ball_simple needs n > 3, got {n}"));
            }
            twopoint::ball_asymptotic(n, alpha)
        }
        Theorem::LayerOptimal { inner } => {
            require_mean_center(id, &q.center)?;
            twopoint::spherical_generic(n, alpha, &LayerRadial::new(*inner)?)
        }
        Theorem::Slc(p) => {
            require_mean_center(id, &q.center)?;
            twopoint::slc_f(n, alpha, p, false)
        }
        Theorem::SlcImproved(p) => {
            require_mean_center(id, &q.center)?;
            twopoint::slc_f(n, alpha, p, true)
        }
        Theorem::NormalKnown => {
            require_mean_center(id, &q.center)?;
            Ok(TwoPointResult::closed(-0.5 * n as f64 * (alpha * alpha).ln_1p(), Kind::UpperBound))
        }
        Theorem::NormalOptimal => {
            require_mean_center(id, &q.center)?;
            twopoint::normal_exact(n, alpha)
        }
        Theorem::NormalSimple => {
            require_mean_center(id, &q.center)?;
            twopoint::normal_asymptotic_upper(n, alpha)
        }
        Theorem::SphericalCustom(radial) => {
            require_mean_center(id, &q.center)?;
            twopoint::spherical_generic(n, alpha, radial.0.as_ref())
        }
        Theorem::ExponentialOptimal => {
            require_mean_center(id, &q.center)?;
            twopoint::exponential_exact(n, alpha)
        }
        Theorem::ExponentialSimple => {
            require_mean_center(id, &q.center)?;
            twopoint::exponential_asymptotic(n, alpha)
        }
        Theorem::RotSimple => {
            require_mean_center(id, &q.center)?;
            twopoint::rotsimple_f(n, alpha)
        }
        Theorem::RotGeneral => {
            require_mean_center(id, &q.center)?;
            twopoint::rotgeneral_f(n, alpha)
        }
        Theorem::RotAlpha1 => {
            require_mean_center(id, &q.center)?;
            require_alpha_one(id, alpha)?;
            if !(1..=4000).contains(&n) {
                return hypothesis(format!("rot_alpha1 is established for 1 ≤ n ≤ 4000, got {n}"));
            }
            Ok(TwoPointResult::closed(-0.14 * n as f64, Kind::UpperBound))
        }
        Theorem::ProductHoeffding { sigma0 } => twopoint::product_hoeffding_f(n, alpha, *sigma0, &hoeffding_center(&q.center, n)),
        Theorem::ProductBernstein { sigma0 } => {
            require_cube_center(id, &q.center)?;
            twopoint::product_bernstein_f(n, alpha, *sigma0)
        }
        Theorem::ProductChernoff(components) => {
            let comps = chernoff_components(components, n)?;
            let gamma_n = twopoint::chernoff_gamma_n(&comps, alpha)?;
            Ok(TwoPointResult::closed(-2.0 * gamma_n, Kind::UpperBound))
        }
        Theorem::Dependent { sigma0 } => {
            require_cube_center(id, &q.center)?;
            twopoint::dependent_f(n, alpha, *sigma0)
        }
        Theorem::Prototype { .. }
        | Theorem::PrototypeSet { .. }
        | Theorem::IndependentSlc(_)
        | Theorem::MixtureSlc(_)
        | Theorem::ProductLegacy { .. }
        | Theorem::Perturbed { .. } => Err(Error::Unsupported(format!("{id} bounds M directly, without a two-point function"))),
    }
}

fn check_prototype(alpha: f64, r: f64, c: f64) -> Result<()> {
    if !(alpha > 0.5) {
        return hypothesis(format!("prototype needs alpha > 1/2, got {alpha}"));
    }
    if !(r > 1.0 / (2.0 * alpha) && r < 1.0) {
        return hypothesis(format!("prototype needs 1/(2α) < r < 1, got r = {r}"));
    }
    if !(c > 0.0) {
        return domain(format!("density constant C must be positive, got {c}"));
    }
    Ok(())
}

/// The bound with the entry's default conversion: the exact formula for
/// necessary-and-sufficient entries, the simple one otherwise.
pub fn bound(q: &SeparabilityQuery, theorem: &Theorem) -> Result<BoundResult> {
    bound_with(q, theorem, None)
}

/// As [`bound`], optionally forcing the conversion from f to M.
pub fn bound_with(q: &SeparabilityQuery, theorem: &Theorem, conversion: Option<BoundMode>) -> Result<BoundResult> {
    q.validate()?;
    let id = theorem.id();
    let guarantee = if id.is_iff() { Guarantee::ExactNecessarySufficient } else { Guarantee::Sufficient };
    let conversion = conversion.unwrap_or(if id.is_iff() { BoundMode::Exact } else { BoundMode::Simple });
    let (n, alpha, delta) = (q.n as f64, q.alpha, q.delta);
    let mut extra_notes = Vec::new();
    let mut log10_f = None;
    let ln_m = match theorem {
        Theorem::Prototype { r, c } => {
            require_mean_center(id, &q.center)?;
            check_prototype(alpha, *r, *c)?;
            extra_notes.push("bounds |Y| for a single point x".to_string());
            delta.ln() + n * (2.0 * r * alpha).ln() - c.ln()
        }
        Theorem::PrototypeSet { r, c } => {
            require_mean_center(id, &q.center)?;
            check_prototype(alpha, *r, *c)?;
            0.5 * (delta / c).ln() + 0.5 * n * (2.0 * r * alpha).ln()
        }
        Theorem::IndependentSlc(points) | Theorem::MixtureSlc(points) => {
            let e = indbound_exponent(points, alpha)?;
            0.5 * (delta / 2.0).ln() + 0.5 * e
        }
        Theorem::ProductLegacy { sigma0 } => {
            require_alpha_one(id, alpha)?;
            if !(*sigma0 > 0.0 && *sigma0 <= 0.5) {
                return domain(format!("sigma0 must be in (0, 0.5], got {sigma0}"));
            }
            let ln_root = 0.5 * (delta / 3.0).ln() + 0.25 * n * sigma0.powi(4);
            // M = root − 1
            if ln_root > 0.0 {
                ln_root + (-(-ln_root).exp()).ln_1p()
            } else {
                f64::NEG_INFINITY
            }
        }
        Theorem::Perturbed { epsilon } => {
            require_alpha_one(id, alpha)?;
            match perturbed_ln_m(q.n, delta, *epsilon)? {
                Some(v) => v,
                None => {
                    extra_notes.push("no M ≥ 1 reaches the requested probability".to_string());
                    0.0
                }
            }
        }
        _ => {
            let tp = two_point(q, theorem)?;
            if tp.kind == Kind::Asymptotic {
                extra_notes.push("asymptotic form; not a rigorous bound at finite n".to_string());
            }
            if tp.numeric_error > 1e-6 {
                extra_notes.push(format!("two-point integral relative error {:.1e}", tp.numeric_error));
            }
            if tp.raw_ln > 0.0 {
                extra_notes.push("two-point bound exceeds 1".to_string());
            }
            log10_f = Some(tp.raw_ln / std::f64::consts::LN_10);
            ln_m_from_ln_f(tp.raw_ln, delta, conversion)
        }
    };
    let mut r = BoundResult::from_ln_m(id.as_str(), ln_m, guarantee);
    r.validity_notes.extend(extra_notes);
    r.log10_f = log10_f;
    r.b_exponent = exponent_b(theorem, alpha, &q.center).ok();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(n: usize, alpha: f64) -> SeparabilityQuery {
        SeparabilityQuery::new(n, alpha, 0.01)
    }

    fn m(n: usize, alpha: f64, th: Theorem) -> f64 {
        bound(&q(n, alpha), &th).unwrap().m()
    }

    #[test]
    fn golden_ratio_identity() {
        let r = m_from_f(LogProb::from_prob(0.3).unwrap(), 0.3, BoundMode::Exact).unwrap();
        assert_relative_eq!(r.m(), (1.0 + 5f64.sqrt()) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn exact_conversion_reproduces_ball_corollary() {
        for n in [5usize, 20, 60] {
            let f = LogProb::from_ln(-std::f64::consts::LN_2 * (n as f64 + 1.0)).unwrap();
            let r = m_from_f(f, 0.01, BoundMode::Exact).unwrap();
            let want = 0.5 + (0.25 + 0.01 * 2f64.powi(n as i32 + 1)).sqrt();
            assert_relative_eq!(r.m(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn exact_conversion_log_domain() {
        let ln_m = ln_m_from_ln_f(-5000.0, 0.01, BoundMode::Exact);
        assert_relative_eq!(ln_m, 0.5 * (0.01f64.ln() + 5000.0), max_relative = 1e-15);
        let f = twopoint::normal_exact(100, 0.9).unwrap().f;
        let r = m_from_f(f, 0.01, BoundMode::Exact).unwrap();
        assert_eq!(r.m_exact, Some(1_141_060));
    }

    #[test]
    fn registry_examples() {
        assert_relative_eq!(m(100, 0.8, Theorem::Prototype { r: 0.75, c: 1.0 }), 828_180.0, max_relative = 1e-6);
        assert_eq!(bound(&q(100, 0.8), &Theorem::PrototypeSet { r: 0.75, c: 1.0 }).unwrap().m_exact, Some(910));
        assert_relative_eq!(m(100, 1.0, Theorem::BallKnown), 1.6e14, max_relative = 0.01);
        assert_eq!(bound(&q(100, 0.9), &Theorem::NormalKnown).unwrap().m_exact, Some(276_671));
        assert_eq!(bound(&q(100, 0.9), &Theorem::NormalSimple).unwrap().m_exact, Some(1_132_950));
        assert_eq!(bound(&q(100, 0.9), &Theorem::NormalOptimal).unwrap().m_exact, Some(1_141_060));
        assert!((1.4e7..1.5e7).contains(&m(100, 1.0, Theorem::NormalOptimal)));
        assert!((4.3e14..4.4e14).contains(&m(500, 1.0, Theorem::SlcImproved(SlcParams::new(0.6)))));
        assert_relative_eq!(m(200, 0.6, Theorem::ExponentialOptimal), 154_501.0, max_relative = 0.01);
        assert_eq!(bound(&q(400, 1.0), &Theorem::RotAlpha1).unwrap().m_exact, Some(144_625_706_429));
        assert!((1.3e9..1.4e9).contains(&m(100, 1.0, Theorem::ProductChernoff(vec![ComponentSpec::Uniform01]))));
        let legacy = m(500, 1.0, Theorem::ProductLegacy { sigma0: 0.5 });
        assert!((legacy / 141.7 - 1.0).abs() < 1e-3, "{legacy}");
        let dep = m(1000, 1.0, Theorem::Dependent { sigma0: 0.45 });
        // printed with one significant digit
        assert!((7.5e25..9e25).contains(&dep), "{dep}");
    }

    #[test]
    fn ball_simple_example() {
        let v = m(200, 0.5, Theorem::BallSimple);
        assert!((v / 642_465.0 - 1.0).abs() < 1e-3, "{v}");
        let opt = m(200, 0.5, Theorem::BallOptimal);
        assert!((opt / 661_243.0 - 1.0).abs() < 0.01, "{opt}");
    }

    #[test]
    fn modes_and_notes() {
        let r = bound(&q(100, 1.0), &Theorem::BallOptimal).unwrap();
        assert_eq!(r.mode, Guarantee::ExactNecessarySufficient);
        let r = bound(&q(100, 1.0), &Theorem::ExponentialSimple).unwrap();
        assert_eq!(r.mode, Guarantee::Sufficient);
        assert!(r.validity_notes.iter().any(|s| s.contains("asymptotic")));
        let r = bound(&q(10, 0.8), &Theorem::Prototype { r: 0.75, c: 1.0 }).unwrap();
        assert!(r.m() < 1.0 && r.validity_notes.iter().any(|s| s.contains("vacuous")));
    }

    #[test]
    fn hypotheses_are_named() {
        let err = bound(&q(100, 0.5), &Theorem::Prototype { r: 0.9, c: 1.0 }).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
        assert!(bound(&q(5000, 1.0), &Theorem::RotAlpha1).is_err());
        assert!(bound(&q(100, 0.9), &Theorem::RotAlpha1).is_err());
        assert!(bound(&q(100, 0.8), &Theorem::BallSimple).is_err());
        assert!("nonsense".parse::<TheoremId>().is_err());
        let cube = q(100, 1.0).with_center(Center::CubeCenter);
        assert!(bound(&cube, &Theorem::NormalOptimal).is_err());
    }

    #[test]
    fn hoeffding_centres() {
        let at = |c: Center, n: usize, a: f64| {
            bound(&q(n, a).with_center(c), &Theorem::ProductHoeffding { sigma0: 0.5 }).unwrap().m_exact
        };
        assert_eq!(at(Center::AnyPoint, 500, 1.0), Some(48_516_519));
        assert_eq!(at(Center::CubeCenter, 100, 1.0), Some(37_901_503));
        assert_eq!(at(Center::Mean, 500, 0.9), Some(8_411_607));
        let b = bound(&q(1000, 1.0).with_center(Center::CubeCenter), &Theorem::ProductBernstein { sigma0: 0.2 }).unwrap();
        assert_eq!(b.m_exact, Some(21_799_877));
    }

    #[test]
    fn independent_slc_matches_single_family() {
        let (n, a, g) = (400usize, 1.0, 1.0);
        let p = SlcParams::isotropic(g, n).unwrap();
        let ind = bound(&q(n, a), &Theorem::IndependentSlc(vec![p, p])).unwrap();
        let one = bound(&q(n, a), &Theorem::Slc(SlcParams::new(g))).unwrap();
        assert_relative_eq!(ind.log10_m, one.log10_m, max_relative = 1e-12);
    }

    #[test]
    fn every_id_resolves() {
        let radial = CustomRadial(Arc::new(twopoint::BallRadial));
        let params = TheoremParams {
            r: Some(0.75),
            c: Some(1.0),
            inner: Some(0.5),
            gamma: Some(1.0),
            mu: None,
            slc_components: vec![SlcParams::isotropic(1.0, 100).unwrap()],
            sigma0: Some(0.45),
            components: vec![ComponentSpec::Uniform01],
            epsilon: Some(0.5),
            radial: Some(radial),
        };
        for &id in TheoremId::ALL {
            assert_eq!(id.as_str().parse::<TheoremId>().unwrap(), id);
            let th = Theorem::build(id, &params).unwrap();
            assert_eq!(th.id(), id);
            let (n, alpha, center) = match id {
                TheoremId::Prototype | TheoremId::PrototypeSet => (100, 0.8, Center::Mean),
                TheoremId::BallSimple => (200, 0.5, Center::Mean),
                TheoremId::Perturbed | TheoremId::ProductLegacy => (2000, 1.0, Center::Mean),
                TheoremId::ProductHoeffding => (500, 1.0, Center::AnyPoint),
                _ => (100, 1.0, Center::Mean),
            };
            let r = bound(&q(n, alpha).with_center(center), &th).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert!(r.log10_m.is_finite(), "{id}");
        }
    }
}
