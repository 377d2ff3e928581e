//! Componentwise output maps `g(s) = [g_1(s_1), …, g_p(s_p)]`.
//!
//! Every component must be continuous, nondecreasing, strictly increasing
//! on a band `[-h, h]` with slope at least `ϱ` there, locally Lipschitz and
//! zero exactly at the origin. Identity and saturation satisfy this by
//! construction; user maps can be checked by sampling with
//! [`validate_assumption`].

mod quad;
mod validate;

use std::fmt;
use std::sync::Arc;

pub use validate::{validate_assumption, ComponentReport, PartCheck, ValidationReport};

use crate::{Error, Result};

/// Absolute tolerance for antiderivatives of user-supplied maps.
pub const QUADRATURE_TOL: f64 = 1e-10;

pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ComponentKind {
    Identity,
    /// Clamp to `[-h, h]`.
    Saturation,
    Custom {
        name: String,
        map: ScalarMap,
        /// Declared global Lipschitz bound; when absent it is estimated by
        /// sampling, which is advisory only.
        lipschitz: Option<f64>,
        /// Constant outside `[-h, h]`.
        saturating: bool,
    },
}

impl fmt::Debug for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentKind::Identity => f.write_str("Identity"),
            ComponentKind::Saturation => f.write_str("Saturation"),
            ComponentKind::Custom {
                name,
                lipschitz,
                saturating,
                ..
            } => f
                .debug_struct("Custom")
                .field("name", name)
                .field("lipschitz", lipschitz)
                .field("saturating", saturating)
                .finish(),
        }
    }
}

/// One scalar map `g_l` with its band radius `h` and lower slope `ϱ`.
#[derive(Debug, Clone)]
pub struct Component {
    pub kind: ComponentKind,
    pub h: f64,
    pub varrho: f64,
}

impl Component {
    pub fn identity() -> Self {
        Self {
            kind: ComponentKind::Identity,
            h: f64::INFINITY,
            varrho: 1.0,
        }
    }

    pub fn saturation(h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidOutput(format!(
                "saturation level must be positive, got {h}"
            )));
        }
        Ok(Self {
            kind: ComponentKind::Saturation,
            h,
            varrho: 1.0,
        })
    }

    pub fn custom(
        name: impl Into<String>,
        map: impl Fn(f64) -> f64 + Send + Sync + 'static,
        h: f64,
        varrho: f64,
    ) -> Self {
        Self {
            kind: ComponentKind::Custom {
                name: name.into(),
                map: Arc::new(map),
                lipschitz: None,
                saturating: false,
            },
            h,
            varrho,
        }
    }

    pub fn with_lipschitz(mut self, k: f64) -> Self {
        if let ComponentKind::Custom { lipschitz, .. } = &mut self.kind {
            *lipschitz = Some(k);
        }
        self
    }

    pub fn saturating(mut self, yes: bool) -> Self {
        if let ComponentKind::Custom { saturating, .. } = &mut self.kind {
            *saturating = yes;
        }
        self
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match &self.kind {
            ComponentKind::Identity => x,
            ComponentKind::Saturation => x.clamp(-self.h, self.h),
            ComponentKind::Custom { map, .. } => map(x),
        }
    }

    pub fn is_saturation_like(&self) -> bool {
        match &self.kind {
            ComponentKind::Identity => false,
            ComponentKind::Saturation => true,
            ComponentKind::Custom { saturating, .. } => *saturating,
        }
    }

    /// `G(x) = ∫_a^x (g(s) - g(a)) ds`.
    pub fn antiderivative(&self, a: f64, x: f64) -> Result<f64> {
        if !(a.is_finite() && x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "antiderivative bounds a = {a}, x = {x}"
            )));
        }
        match &self.kind {
            ComponentKind::Identity | ComponentKind::Saturation => {
                Ok(piecewise_linear_gap(a, x, self.h))
            }
            ComponentKind::Custom { map, .. } => {
                let ga = map(a);
                let q = quad::adaptive_simpson(&|s| map(s) - ga, a, x, QUADRATURE_TOL);
                if !q.converged || !q.value.is_finite() {
                    return Err(Error::Numeric {
                        message: format!("quadrature of G on [{a}, {x}] did not converge"),
                        residual: q.error,
                    });
                }
                Ok(q.value.max(0.0))
            }
        }
    }

    /// Lipschitz bound of this component on `[lo, hi]`.
    pub fn lipschitz_on(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        match &self.kind {
            ComponentKind::Identity => 1.0,
            ComponentKind::Saturation => {
                if lo >= self.h || hi <= -self.h {
                    0.0
                } else {
                    1.0
                }
            }
            ComponentKind::Custom { map, lipschitz, .. } => {
                if let Some(k) = lipschitz {
                    return *k;
                }
                sampled_slope(map.as_ref(), lo, hi, 128) * 1.5
            }
        }
    }

    fn tag(&self) -> String {
        match &self.kind {
            ComponentKind::Identity => "identity".into(),
            ComponentKind::Saturation => format!("saturation({})", self.h),
            ComponentKind::Custom { name, .. } => format!("custom({name})"),
        }
    }
}

fn sampled_slope(map: &(dyn Fn(f64) -> f64 + Send + Sync), lo: f64, hi: f64, points: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let step = (hi - lo) / points as f64;
    let mut prev = map(lo);
    let mut k = 0.0_f64;
    for s in 1..=points {
        let x = lo + step * s as f64;
        let v = map(x);
        k = k.max((v - prev).abs() / step);
        prev = v;
    }
    k
}

/// `∫ |clamp(s) - clamp(a)| ds` between `a` and `x`, exact for the
/// piecewise-linear integrand (trapezoid on each linear piece).
fn piecewise_linear_gap(a: f64, x: f64, h: f64) -> f64 {
    if a == x {
        return 0.0;
    }
    let c = a.clamp(-h, h);
    let f = |s: f64| (s.clamp(-h, h) - c).abs();
    let (lo, hi) = if a < x { (a, x) } else { (x, a) };
    let mut knots = [lo, -h, c, h, hi];
    knots.sort_by(f64::total_cmp);
    knots
        .windows(2)
        .filter(|w| w[0] >= lo && w[1] <= hi && w[1] > w[0])
        .map(|w| 0.5 * (f(w[0]) + f(w[1])) * (w[1] - w[0]))
        .sum()
}

/// Output map for one agent: `p` scalar components.
#[derive(Debug, Clone)]
pub struct OutputFunction {
    components: Vec<Component>,
}

/// Summary tag of an output map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputKind {
    Identity,
    Saturation(f64),
    Custom,
}

impl OutputFunction {
    pub fn identity(p: usize) -> Self {
        Self {
            components: vec![Component::identity(); p],
        }
    }

    /// `sat_h` on every component.
    ///
    /// # Panics
    /// If `h` is not a positive finite number.
    pub fn saturation(p: usize, h: f64) -> Self {
        let c = Component::saturation(h).expect("saturation level must be positive and finite");
        Self {
            components: vec![c; p],
        }
    }

    pub fn from_components(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidOutput(
                "output map needs at least one component".into(),
            ));
        }
        for (l, c) in components.iter().enumerate() {
            if c.h.is_nan()
                || c.h <= 0.0
                || c.varrho.is_nan()
                || c.varrho <= 0.0
                || c.varrho.is_infinite()
            {
                return Err(Error::InvalidOutput(format!(
                    "component {l}: need h > 0 and finite ϱ > 0, got h = {}, ϱ = {}",
                    c.h, c.varrho
                )));
            }
        }
        Ok(Self { components })
    }

    /// Parses `identity` or `saturation(<h>)`.
    pub fn parse_tag(tag: &str, p: usize) -> Result<Self> {
        let t = tag.trim();
        if t == "identity" {
            return Ok(Self::identity(p));
        }
        if let Some(inner) = t
            .strip_prefix("saturation(")
            .and_then(|r| r.strip_suffix(')'))
        {
            let h: f64 = inner
                .trim()
                .parse()
                .map_err(|_| Error::InvalidOutput(format!("bad saturation level in `{tag}`")))?;
            let c = Component::saturation(h)?;
            return Ok(Self {
                components: vec![c; p],
            });
        }
        Err(Error::InvalidOutput(format!(
            "unknown output function `{tag}` (expected `identity` or `saturation(h)`)"
        )))
    }

    /// `identity`, `saturation(h)` or a `custom(..)` description.
    pub fn tag(&self) -> String {
        let first = self.components[0].tag();
        if self.components.iter().all(|c| c.tag() == first) {
            first
        } else {
            let parts: Vec<String> = self.components.iter().map(Component::tag).collect();
            format!("[{}]", parts.join(", "))
        }
    }

    pub fn kind(&self) -> OutputKind {
        let first = &self.components[0];
        let uniform = self.components.iter().all(|c| c.tag() == first.tag());
        match (&first.kind, uniform) {
            (ComponentKind::Identity, true) => OutputKind::Identity,
            (ComponentKind::Saturation, true) => OutputKind::Saturation(first.h),
            _ => OutputKind::Custom,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, l: usize) -> &Component {
        &self.components[l]
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// `min_l h_l`.
    pub fn h(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.h)
            .fold(f64::INFINITY, f64::min)
    }

    /// `min_l ϱ_l`.
    pub fn varrho(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.varrho)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_saturation_like(&self) -> bool {
        self.components.iter().all(Component::is_saturation_like)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "input has {} components, map has {}",
                x.len(),
                self.dim()
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("output map input {v}")));
        }
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for ((o, &v), c) in out.iter_mut().zip(x).zip(&self.components) {
            *o = c.apply(v);
        }
    }

    pub fn antiderivative(&self, l: usize, a: f64, x: f64) -> Result<f64> {
        let c = self.components.get(l).ok_or_else(|| {
            Error::Dimension(format!(
                "component {l} out of range for dimension {}",
                self.dim()
            ))
        })?;
        c.antiderivative(a, x)
    }
}

/// Output maps for all agents: shared, or one per agent.
#[derive(Debug, Clone)]
pub enum Outputs {
    Shared(OutputFunction),
    PerAgent(Vec<OutputFunction>),
}

impl Outputs {
    #[inline]
    pub fn for_agent(&self, i: usize) -> &OutputFunction {
        match self {
            Outputs::Shared(f) => f,
            Outputs::PerAgent(v) => &v[i],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Outputs::Shared(f) => f.dim(),
            Outputs::PerAgent(v) => v.first().map_or(0, OutputFunction::dim),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let Outputs::PerAgent(v) = self {
            if v.len() != n {
                return Err(Error::Dimension(format!(
                    "{} output maps for {n} agents",
                    v.len()
                )));
            }
            let p = self.dim();
            if v.iter().any(|f| f.dim() != p) {
                return Err(Error::Dimension(
                    "per-agent output maps disagree on dimension".into(),
                ));
            }
        }
        Ok(())
    }

    /// Smallest band radius over the given agents and all components.
    pub fn h_over(&self, agents: impl IntoIterator<Item = usize>) -> f64 {
        agents
            .into_iter()
            .map(|i| self.for_agent(i).h())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn varrho_over(&self, agents: impl IntoIterator<Item = usize>) -> f64 {
        agents
            .into_iter()
            .map(|i| self.for_agent(i).varrho())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_saturation_like(&self) -> bool {
        match self {
            Outputs::Shared(f) => f.is_saturation_like(),
            Outputs::PerAgent(v) => v.iter().all(OutputFunction::is_saturation_like),
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Outputs::Shared(f) => f.tag(),
            Outputs::PerAgent(v) => {
                let tags: Vec<String> = v.iter().map(OutputFunction::tag).collect();
                format!("per-agent[{}]", tags.join("; "))
            }
        }
    }
}

impl From<OutputFunction> for Outputs {
    fn from(f: OutputFunction) -> Self {
        Outputs::Shared(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturation_clamps() {
        let f = OutputFunction::saturation(3, 1.0);
        assert_eq!(
            f.evaluate(&[2.0, -0.5, -3.0]).unwrap(),
            vec![1.0, -0.5, -1.0]
        );
        assert_eq!(f.evaluate(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn identity_passes_through() {
        let f = OutputFunction::identity(2);
        assert_eq!(f.evaluate(&[3.25, -7.0]).unwrap(), vec![3.25, -7.0]);
    }

    #[test]
    fn rejects_non_finite_input() {
        let f = OutputFunction::identity(1);
        assert!(matches!(f.evaluate(&[f64::NAN]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn antiderivative_examples() {
        let id = OutputFunction::identity(1);
        assert_eq!(id.antiderivative(0, 0.0, 2.0).unwrap(), 2.0);
        let sat = OutputFunction::saturation(1, 1.0);
        assert!((sat.antiderivative(0, 0.0, 2.0).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(sat.antiderivative(0, 0.3, 0.3).unwrap(), 0.0);
        // cross-check the closed form against quadrature of the same map
        let custom = OutputFunction::from_components(vec![Component::custom(
            "sat",
            |x: f64| x.clamp(-1.0, 1.0),
            1.0,
            1.0,
        )])
        .unwrap();
        for &(a, x) in &[(0.0, 2.0), (0.4, -3.0), (-2.0, 5.0), (1.5, 0.2)] {
            let exact = sat.antiderivative(0, a, x).unwrap();
            let quad = custom.antiderivative(0, a, x).unwrap();
            assert!(
                (exact - quad).abs() < 1e-9,
                "a={a} x={x}: {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn saturated_reference_flat_side_is_zero() {
        let sat = OutputFunction::saturation(1, 1.0);
        assert_eq!(sat.antiderivative(0, 3.0, 7.0).unwrap(), 0.0);
        // from a = 3 (g = 1) down to 0: ∫_0^1 (1 - s) ds = 0.5
        assert!((sat.antiderivative(0, 3.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tags_round_trip() {
        for tag in ["identity", "saturation(1)", "saturation(2.5)"] {
            assert_eq!(OutputFunction::parse_tag(tag, 2).unwrap().tag(), tag);
        }
        assert!(OutputFunction::parse_tag("saturation(-1)", 1).is_err());
        assert!(OutputFunction::parse_tag("tanh", 1).is_err());
    }

    #[test]
    fn saturation_lipschitz_vanishes_outside_band() {
        let c = Component::saturation(1.0).unwrap();
        assert_eq!(c.lipschitz_on(1.0, 5.0), 0.0);
        assert_eq!(c.lipschitz_on(-4.0, -1.0), 0.0);
        assert_eq!(c.lipschitz_on(-4.0, 4.0), 1.0);
        assert_eq!(c.lipschitz_on(0.99, 4.0), 1.0);
    }
}
