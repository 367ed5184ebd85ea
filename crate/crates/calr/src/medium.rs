//! Transformation-optics algebra for radial isotropic media.
//!
//! A [`RadialProfile`] is a closed-form evaluator `r ↦ a(r)`. Push-forwards
//! under Kelvin inversions and dilations compose lazily, so nested pull-backs
//! never resample. For a power law `C r^m` the push-forward is again a power
//! law, which the spectral solver exploits to use exact fundamental pairs.
//!
//! [`build_doubly_complementary`] assembles the four-region medium
//!
//! ```text
//!   identity        on [0, r1²/r2]
//!   (G∘F)⁻¹_* a     on [r1²/r2, r1]      core transition
//!   F⁻¹_* a         on [r1, r2]          plasmonic shell, sign -1 + iδ
//!   a               on [r2, r3]
//!   identity        on [r3, R_Ω]
//! ```
//!
//! with `F` the Kelvin map at `r2`, `G` the Kelvin map at `r3` and `r1 = r2²/r3`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CalrError, Result};

/// Relative slack used when testing whether a radius lies inside a domain.
const DOMAIN_SLACK: f64 = 1e-12;

/// Samples used to bound a profile away from 0 and infinity.
const ELLIPTICITY_SAMPLES: usize = 257;

/// Kelvin inversion `x ↦ R² x / |x|²` for a point in any dimension.
pub fn kelvin_map(x: &[f64], radius: f64) -> Result<Vec<f64>> {
    let n2: f64 = x.iter().map(|v| v * v).sum();
    if n2 == 0.0 || !n2.is_finite() {
        return Err(CalrError::Domain("Kelvin map is undefined at the origin".into()));
    }
    if !(radius > 0.0) {
        return Err(CalrError::Domain(format!("Kelvin radius must be positive, got {radius}")));
    }
    let s = radius * radius / n2;
    Ok(x.iter().map(|v| v * s).collect())
}

/// Radial diffeomorphisms used by the complementary constructions.
///
/// A `Composition` applies its members left to right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialMap {
    Kelvin { radius: f64 },
    Dilation { factor: f64 },
    Composition { maps: Vec<RadialMap> },
}

impl RadialMap {
    pub fn kelvin(radius: f64) -> Self {
        RadialMap::Kelvin { radius }
    }

    pub fn dilation(factor: f64) -> Self {
        RadialMap::Dilation { factor }
    }

    /// `self` followed by `next`.
    pub fn then(self, next: RadialMap) -> Self {
        let mut maps = match self {
            RadialMap::Composition { maps } => maps,
            m => vec![m],
        };
        match next {
            RadialMap::Composition { maps: more } => maps.extend(more),
            m => maps.push(m),
        }
        RadialMap::Composition { maps }
    }

    /// `G∘F` for the canonical pair: Kelvin at `r2` followed by Kelvin at `r3`.
    pub fn canonical_pair(r2: f64, r3: f64) -> Self {
        RadialMap::kelvin(r2).then(RadialMap::kelvin(r3))
    }

    pub fn inverse(&self) -> Self {
        match self {
            RadialMap::Kelvin { radius } => RadialMap::Kelvin { radius: *radius },
            RadialMap::Dilation { factor } => RadialMap::Dilation { factor: 1.0 / factor },
            RadialMap::Composition { maps } => RadialMap::Composition {
                maps: maps.iter().rev().map(|m| m.inverse()).collect(),
            },
        }
    }

    pub fn forward_radius(&self, r: f64) -> f64 {
        match self {
            RadialMap::Kelvin { radius } => radius * radius / r,
            RadialMap::Dilation { factor } => factor * r,
            RadialMap::Composition { maps } => maps.iter().fold(r, |acc, m| m.forward_radius(acc)),
        }
    }

    pub fn inverse_radius(&self, rho: f64) -> f64 {
        self.inverse().forward_radius(rho)
    }

    /// Applies the map to a point (Kelvin maps reject the origin).
    pub fn forward_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            RadialMap::Kelvin { radius } => kelvin_map(x, *radius),
            RadialMap::Dilation { factor } => Ok(x.iter().map(|v| v * factor).collect()),
            RadialMap::Composition { maps } => {
                let mut y = x.to_vec();
                for m in maps {
                    y = m.forward_point(&y)?;
                }
                Ok(y)
            }
        }
    }

    /// Image of the radial interval `[lo, hi]`, sorted.
    pub fn map_interval(&self, lo: f64, hi: f64) -> (f64, f64) {
        let a = self.forward_radius(lo);
        let b = self.forward_radius(hi);
        (a.min(b), a.max(b))
    }

    /// Net dilation factor when the map is radially linear (even number of inversions).
    pub fn as_dilation(&self) -> Option<f64> {
        match self {
            RadialMap::Kelvin { .. } => None,
            RadialMap::Dilation { factor } => Some(*factor),
            RadialMap::Composition { .. } => {
                // r ↦ κ r iff the image of two radii has the same ratio.
                let a = self.forward_radius(1.0);
                let b = self.forward_radius(2.0);
                let linear = ((b / a) - 2.0).abs() < 1e-12;
                linear.then_some(a)
            }
        }
    }
}

enum ProfileKind {
    PowerLaw { coeff: f64, exponent: f64 },
    Closure { label: String, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
    Expression { source: String, node: evalexpr::Node },
    Pushforward { base: RadialProfile, map: RadialMap, dimension: usize },
    Offset { base: RadialProfile, offset: f64 },
}

/// Positive radial coefficient `a(r)` with an optional radial domain.
#[derive(Clone)]
pub struct RadialProfile {
    kind: Arc<ProfileKind>,
    domain: Option<(f64, f64)>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("label", &self.label())
            .field("domain", &self.domain)
            .finish()
    }
}

thread_local! {
    static EXPR_CONTEXT: std::cell::RefCell<Option<evalexpr::HashMapContext>> =
        const { std::cell::RefCell::new(None) };
}

fn expression_context() -> evalexpr::HashMapContext {
    use evalexpr::{ContextWithMutableFunctions, Function, Value};
    let mut ctx = evalexpr::HashMapContext::new();
    let unary: [(&str, fn(f64) -> f64); 14] = [
        ("sin", f64::sin),
        ("cos", f64::cos),
        ("tan", f64::tan),
        ("exp", f64::exp),
        ("ln", f64::ln),
        ("log", f64::ln),
        ("sqrt", f64::sqrt),
        ("abs", f64::abs),
        ("sinh", f64::sinh),
        ("cosh", f64::cosh),
        ("tanh", f64::tanh),
        ("atan", f64::atan),
        ("asin", f64::asin),
        ("acos", f64::acos),
    ];
    for (name, f) in unary {
        ctx.set_function(
            name.to_string(),
            Function::new(move |arg| Ok(Value::Float(f(arg.as_number()?)))),
        )
        .expect("hash map contexts accept functions");
    }
    ctx.set_function(
        "pow".to_string(),
        Function::new(|arg| {
            let t = arg.as_fixed_len_tuple(2)?;
            let (x, y): (f64, f64) = (t[0].as_number()?, t[1].as_number()?);
            Ok(Value::Float(x.powf(y)))
        }),
    )
    .expect("hash map contexts accept functions");
    ctx
}

fn eval_expression(node: &evalexpr::Node, r: f64) -> f64 {
    use evalexpr::{ContextWithMutableVariables, Value};
    EXPR_CONTEXT.with(|cell| {
        let mut slot = cell.borrow_mut();
        let ctx = slot.get_or_insert_with(expression_context);
        ctx.set_value("r".to_string(), Value::Float(r)).expect("variables are mutable");
        node.eval_number_with_context(ctx).unwrap_or(f64::NAN)
    })
}

impl RadialProfile {
    pub fn constant(value: f64) -> Self {
        Self::power_law(value, 0.0)
    }

    /// `a(r) = coeff · r^exponent`.
    pub fn power_law(coeff: f64, exponent: f64) -> Self {
        RadialProfile { kind: Arc::new(ProfileKind::PowerLaw { coeff, exponent }), domain: None }
    }

    /// Profile backed by a native closure; `label` is used for reports and serialization.
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RadialProfile {
            kind: Arc::new(ProfileKind::Closure { label: label.into(), f: Arc::new(f) }),
            domain: None,
        }
    }

    /// Parses an expression in the variable `r`, e.g. `2 + sin(r)`.
    pub fn expression(source: &str) -> Result<Self> {
        let node = evalexpr::build_operator_tree(source)
            .map_err(|e| CalrError::Validation(format!("profile expression `{source}`: {e}")))?;
        let p = RadialProfile {
            kind: Arc::new(ProfileKind::Expression { source: source.to_string(), node }),
            domain: None,
        };
        let probe = p.evaluate(1.0);
        if !probe.is_finite() {
            return Err(CalrError::Validation(format!(
                "profile expression `{source}` does not evaluate to a number at r = 1"
            )));
        }
        Ok(p)
    }

    /// Restricts the profile to `[lo, hi]`; checked evaluation outside fails.
    pub fn on_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = Some((lo, hi));
        self
    }

    pub fn domain(&self) -> Option<(f64, f64)> {
        self.domain
    }

    /// Adds a constant to the profile (used to inject defects in tests and demos).
    pub fn offset(&self, offset: f64) -> Self {
        RadialProfile {
            kind: Arc::new(ProfileKind::Offset { base: self.clone(), offset }),
            domain: self.domain,
        }
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        match &*self.kind {
            ProfileKind::PowerLaw { coeff, exponent } => {
                if *exponent == 0.0 {
                    *coeff
                } else {
                    coeff * r.powf(*exponent)
                }
            }
            ProfileKind::Closure { f, .. } => f(r),
            ProfileKind::Expression { node, .. } => eval_expression(node, r),
            ProfileKind::Pushforward { base, map, dimension } => {
                pushforward_value(base, map, *dimension, r)
            }
            ProfileKind::Offset { base, offset } => base.evaluate(r) + offset,
        }
    }

    /// Evaluation that rejects radii outside the declared domain.
    pub fn evaluate_checked(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(CalrError::Domain(format!("profile evaluated at non-positive radius {r}")));
        }
        if let Some((lo, hi)) = self.domain {
            let slack = DOMAIN_SLACK * hi.abs().max(1.0);
            if r < lo - slack || r > hi + slack {
                return Err(CalrError::Domain(format!(
                    "radius {r} outside profile domain [{lo}, {hi}]"
                )));
            }
        }
        Ok(self.evaluate(r))
    }

    /// `(coeff, exponent)` when the profile is exactly a power law.
    pub fn power_law_parts(&self) -> Option<(f64, f64)> {
        match &*self.kind {
            ProfileKind::PowerLaw { coeff, exponent } => Some((*coeff, *exponent)),
            ProfileKind::Pushforward { base, map, dimension } => {
                let (c, m) = base.power_law_parts()?;
                Some(pushforward_power_law(c, m, map, *dimension))
            }
            ProfileKind::Offset { base, offset } => {
                if *offset == 0.0 {
                    base.power_law_parts()
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self.power_law_parts() {
            Some((c, m)) if m == 0.0 => Some(c),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match &*self.kind {
            ProfileKind::PowerLaw { coeff, exponent } => {
                if *exponent == 0.0 {
                    format!("{coeff}")
                } else {
                    format!("{coeff}*r^{exponent}")
                }
            }
            ProfileKind::Closure { label, .. } => label.clone(),
            ProfileKind::Expression { source, .. } => source.clone(),
            ProfileKind::Pushforward { base, map, dimension } => {
                format!("push[{}; d={dimension}]({})", map_label(map), base.label())
            }
            ProfileKind::Offset { base, offset } => format!("({}) + {offset}", base.label()),
        }
    }

    /// Ellipticity constant Λ ≥ 1 with `1/Λ ≤ a ≤ Λ` on `[lo, hi]`, sampled.
    pub fn ellipticity(&self, lo: f64, hi: f64) -> Result<f64> {
        let mut lam: f64 = 1.0;
        for k in 0..ELLIPTICITY_SAMPLES {
            let s = k as f64 / (ELLIPTICITY_SAMPLES - 1) as f64;
            let r = lo * (hi / lo).powf(s);
            let a = self.evaluate(r);
            if !(a.is_finite() && a > 0.0) {
                return Err(CalrError::Validation(format!(
                    "profile `{}` is not positive at r = {r} (value {a})",
                    self.label()
                )));
            }
            lam = lam.max(a).max(1.0 / a);
        }
        Ok(lam)
    }
}

fn map_label(map: &RadialMap) -> String {
    match map {
        RadialMap::Kelvin { radius } => format!("kelvin({radius})"),
        RadialMap::Dilation { factor } => format!("dilation({factor})"),
        RadialMap::Composition { maps } => {
            maps.iter().map(map_label).collect::<Vec<_>>().join("∘")
        }
    }
}

fn pushforward_value(base: &RadialProfile, map: &RadialMap, d: usize, rho: f64) -> f64 {
    match map {
        RadialMap::Kelvin { radius } => {
            let r2 = radius * radius;
            (r2 / (rho * rho)).powi(d as i32 - 2) * base.evaluate(r2 / rho)
        }
        RadialMap::Dilation { factor } => factor.powi(2 - d as i32) * base.evaluate(rho / factor),
        RadialMap::Composition { maps } => {
            // (T_n ∘ … ∘ T_1)_* a = T_n* ( … T_1* a); unwind from the outermost map.
            match maps.split_last() {
                None => base.evaluate(rho),
                Some((last, rest)) => {
                    let inner = RadialProfile {
                        kind: Arc::new(ProfileKind::Pushforward {
                            base: base.clone(),
                            map: RadialMap::Composition { maps: rest.to_vec() },
                            dimension: d,
                        }),
                        domain: None,
                    };
                    pushforward_value(&inner, last, d, rho)
                }
            }
        }
    }
}

fn pushforward_power_law(c: f64, m: f64, map: &RadialMap, d: usize) -> (f64, f64) {
    let k = d as f64 - 2.0;
    match map {
        // (R²/ρ²)^{d-2} C (R²/ρ)^m = C R^{2(d-2+m)} ρ^{-(2(d-2)+m)}
        RadialMap::Kelvin { radius } => {
            (c * radius.powf(2.0 * (k + m)), -(2.0 * k + m))
        }
        // λ^{2-d} C (ρ/λ)^m
        RadialMap::Dilation { factor } => (c * factor.powf(-k - m), m),
        RadialMap::Composition { maps } => {
            maps.iter().fold((c, m), |(c, m), mp| pushforward_power_law(c, m, mp, d))
        }
    }
}

/// Radial profile of `T_*(a I)` for an isotropic radial coefficient.
///
/// Kelvin(R): `(R²/ρ²)^{d-2} a(R²/ρ)`; Dilation(λ): `λ^{2-d} a(ρ/λ)`. In two
/// dimensions both are pure compositions.
pub fn pushforward_isotropic(a: &RadialProfile, map: &RadialMap, d: usize) -> Result<RadialProfile> {
    if d != 2 && d != 3 {
        return Err(CalrError::Validation(format!("dimension must be 2 or 3, got {d}")));
    }
    if let RadialMap::Kelvin { radius } | RadialMap::Dilation { factor: radius } = map {
        if !(*radius > 0.0) {
            return Err(CalrError::Domain(format!("map parameter must be positive, got {radius}")));
        }
    }
    let domain = a.domain.map(|(lo, hi)| map.map_interval(lo, hi));
    Ok(RadialProfile {
        kind: Arc::new(ProfileKind::Pushforward { base: a.clone(), map: map.clone(), dimension: d }),
        domain,
    })
}

/// What a layer represents inside a doubly complementary medium.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerRole {
    Inner,
    CoreTransition,
    Shell,
    Annulus,
    Exterior,
    Custom,
}

/// One radial layer `[inner, outer]` with its coefficient and sign slot.
#[derive(Clone, Debug)]
pub struct Layer {
    pub inner: f64,
    pub outer: f64,
    pub profile: RadialProfile,
    /// The layer carries `-1 + iδ` instead of `1`.
    pub plasmonic: bool,
    pub role: LayerRole,
}

/// Radii of the canonical doubly complementary construction.
#[derive(Clone, Debug)]
pub struct ComplementaryGeometry {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub annulus_profile: RadialProfile,
}

impl ComplementaryGeometry {
    /// Inner radius of the core transition layer, `r1²/r2`.
    pub fn core_radius(&self) -> f64 {
        self.r1 * self.r1 / self.r2
    }
}

/// Radially layered medium on the ball `B_{R_Ω}` with Dirichlet data on its boundary.
#[derive(Clone, Debug)]
pub struct LayeredMedium {
    dimension: usize,
    layers: Vec<Layer>,
    omega_radius: f64,
    geometry: Option<ComplementaryGeometry>,
}

impl LayeredMedium {
    /// Validates contiguity from the origin to `omega_radius` and ellipticity of every layer.
    pub fn new(dimension: usize, layers: Vec<Layer>, omega_radius: f64) -> Result<Self> {
        if dimension != 2 && dimension != 3 {
            return Err(CalrError::Validation(format!("dimension must be 2 or 3, got {dimension}")));
        }
        if layers.is_empty() {
            return Err(CalrError::Validation("medium needs at least one layer".into()));
        }
        if layers[0].inner != 0.0 {
            return Err(CalrError::Validation("first layer must start at the origin".into()));
        }
        for w in layers.windows(2) {
            let gap = (w[0].outer - w[1].inner).abs();
            if gap > 1e-12 * w[0].outer.max(1.0) {
                return Err(CalrError::Validation(format!(
                    "layers are not contiguous at r = {} / {}",
                    w[0].outer, w[1].inner
                )));
            }
        }
        for l in &layers {
            if !(l.outer > l.inner) {
                return Err(CalrError::Validation(format!(
                    "empty layer [{}, {}]",
                    l.inner, l.outer
                )));
            }
            let lo = if l.inner > 0.0 { l.inner } else { l.outer * 1e-3 };
            l.profile.ellipticity(lo, l.outer)?;
        }
        let last = layers.last().expect("non-empty").outer;
        if (last - omega_radius).abs() > 1e-12 * omega_radius.max(1.0) {
            return Err(CalrError::Validation(format!(
                "last layer ends at {last}, expected the domain radius {omega_radius}"
            )));
        }
        Ok(LayeredMedium { dimension, layers, omega_radius, geometry: None })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn omega_radius(&self) -> f64 {
        self.omega_radius
    }

    pub fn geometry(&self) -> Option<&ComplementaryGeometry> {
        self.geometry.as_ref()
    }

    /// Interior interface radii, ascending.
    pub fn interfaces(&self) -> Vec<f64> {
        self.layers[..self.layers.len() - 1].iter().map(|l| l.outer).collect()
    }

    /// Index of the layer containing `r` (interfaces belong to the outer layer).
    pub fn layer_index(&self, r: f64) -> usize {
        self.layers
            .iter()
            .position(|l| r < l.outer)
            .unwrap_or(self.layers.len() - 1)
    }

    pub fn coefficient(&self, r: f64) -> f64 {
        self.layers[self.layer_index(r)].profile.evaluate(r)
    }

    /// Radial intervals of the plasmonic layers.
    pub fn shell_intervals(&self) -> Vec<(f64, f64)> {
        self.layers
            .iter()
            .filter(|l| l.plasmonic)
            .map(|l| (l.inner, l.outer))
            .collect()
    }

    /// Copy with every sign slot forced to `+1` (the all-positive sanity medium).
    pub fn with_positive_shell(&self) -> Self {
        let mut m = self.clone();
        for l in &mut m.layers {
            l.plasmonic = false;
        }
        m
    }

    /// Copy with the profile of the layer playing `role` replaced.
    pub fn with_layer_profile(&self, role: LayerRole, profile: RadialProfile) -> Self {
        let mut m = self.clone();
        for l in &mut m.layers {
            if l.role == role {
                l.profile = profile.clone();
            }
        }
        m
    }

    /// Layer playing `role`, if any.
    pub fn layer(&self, role: LayerRole) -> Option<&Layer> {
        self.layers.iter().find(|l| l.role == role)
    }
}

/// Serializable description of a layered medium: layer table plus sampled
/// coefficient values, enough to compare two media byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumSummary {
    pub dimension: usize,
    pub omega_radius: f64,
    pub layers: Vec<LayerSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub inner: f64,
    pub outer: f64,
    pub role: LayerRole,
    pub plasmonic: bool,
    pub profile: String,
    /// `(r, a(r))` at equispaced interior radii.
    pub samples: Vec<(f64, f64)>,
}

impl LayeredMedium {
    pub fn summary(&self, samples_per_layer: usize) -> MediumSummary {
        let n = samples_per_layer.max(1);
        let layers = self
            .layers
            .iter()
            .map(|l| LayerSummary {
                inner: l.inner,
                outer: l.outer,
                role: l.role,
                plasmonic: l.plasmonic,
                profile: l.profile.label(),
                samples: (1..=n)
                    .map(|k| {
                        let r = l.inner + (l.outer - l.inner) * k as f64 / (n + 1) as f64;
                        (r, l.profile.evaluate(r))
                    })
                    .collect(),
            })
            .collect();
        MediumSummary { dimension: self.dimension, omega_radius: self.omega_radius, layers }
    }
}

/// Builds the doubly complementary medium around the annulus `[r2, r3]`.
pub fn build_doubly_complementary(
    a: &RadialProfile,
    r2: f64,
    r3: f64,
    omega_radius: f64,
    d: usize,
) -> Result<LayeredMedium> {
    if !(r2 > 0.0 && r2 < r3 && r3 < omega_radius) {
        return Err(CalrError::Validation(format!(
            "radii must satisfy 0 < r2 < r3 < R_Ω, got r2={r2}, r3={r3}, R_Ω={omega_radius}"
        )));
    }
    a.ellipticity(r2, r3)?;
    let r1 = r2 * r2 / r3;
    let core = r1 * r1 / r2;
    let annulus = a.clone().on_domain(r2, r3);
    let shell = pushforward_isotropic(&annulus, &RadialMap::kelvin(r2), d)?;
    // (G∘F)⁻¹ is the dilation by r1²/r2² = r2²/r3².
    let core_profile = pushforward_isotropic(&annulus, &RadialMap::dilation(r1 * r1 / (r2 * r2)), d)?;
    let id = RadialProfile::constant(1.0);
    let layers = vec![
        Layer { inner: 0.0, outer: core, profile: id.clone(), plasmonic: false, role: LayerRole::Inner },
        Layer { inner: core, outer: r1, profile: core_profile, plasmonic: false, role: LayerRole::CoreTransition },
        Layer { inner: r1, outer: r2, profile: shell, plasmonic: true, role: LayerRole::Shell },
        Layer { inner: r2, outer: r3, profile: annulus, plasmonic: false, role: LayerRole::Annulus },
        Layer { inner: r3, outer: omega_radius, profile: id, plasmonic: false, role: LayerRole::Exterior },
    ];
    let mut m = LayeredMedium::new(d, layers, omega_radius)?;
    m.geometry = Some(ComplementaryGeometry { r1, r2, r3, annulus_profile: a.clone() });
    Ok(m)
}

/// Outcome of [`verify_complementarity`].
#[derive(Clone, Debug, Serialize)]
pub struct ComplementarityReport {
    /// max |F_*A − A| over the samples.
    pub max_error_reflection: f64,
    /// max |G_*F_*A − A| over the samples.
    pub max_error_double: f64,
    pub samples: usize,
    pub tolerance: f64,
    pub passed: bool,
}

impl ComplementarityReport {
    pub fn max_error(&self) -> f64 {
        self.max_error_reflection.max(self.max_error_double)
    }
}

/// Checks `F_*A = A` and `G_*F_*A = A` on `[r2, r3]` from the stored layer profiles.
pub fn verify_complementarity(
    m: &LayeredMedium,
    sample_count: usize,
    tol: f64,
) -> Result<ComplementarityReport> {
    let g = m
        .geometry()
        .ok_or_else(|| CalrError::Validation("medium was not built as doubly complementary".into()))?;
    let find = |role| {
        m.layer(role)
            .ok_or_else(|| CalrError::Validation(format!("medium has no {role:?} layer")))
    };
    let shell = find(LayerRole::Shell)?;
    let core = find(LayerRole::CoreTransition)?;
    let annulus = find(LayerRole::Annulus)?;
    let d = m.dimension();
    let f_shell = pushforward_isotropic(&shell.profile, &RadialMap::kelvin(g.r2), d)?;
    let gf = RadialMap::dilation(g.r2 * g.r2 / (g.r1 * g.r1));
    let gf_core = pushforward_isotropic(&core.profile, &gf, d)?;
    let n = sample_count.max(2);
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for k in 0..n {
        let r = g.r2 + (g.r3 - g.r2) * k as f64 / (n - 1) as f64;
        let a = annulus.profile.evaluate(r);
        e1 = e1.max((f_shell.evaluate(r) - a).abs());
        e2 = e2.max((gf_core.evaluate(r) - a).abs());
    }
    Ok(ComplementarityReport {
        max_error_reflection: e1,
        max_error_double: e2,
        samples: n,
        tolerance: tol,
        passed: e1 <= tol && e2 <= tol,
    })
}
