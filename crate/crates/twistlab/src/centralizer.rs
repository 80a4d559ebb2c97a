//! Centralizers on finitely supported sequences.
//!
//! Every centralizer here has the form `Φ(x) = x · φ(log(‖x‖_p/|x|), log r_x)`
//! for a Lipschitz `φ` vanishing at the origin, or is obtained from one by
//! shifting it to a smaller exponent `q`. The Kalton–Peck map `Ω` takes
//! `φ(s, t) = s` and the rank map `Γ` takes `φ(s, t) = t`; both have
//! dedicated evaluators.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seq::{polar_decomposition, rank_order, CSeq, PExp, SeqError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CentralizerError {
    #[error("lipschitz function `{0}` has no declared Lipschitz constant")]
    MissingLipschitzConstant(String),
    #[error("lipschitz function `{0}` does not vanish at the origin")]
    NonzeroAtOrigin(String),
    #[error("unknown lipschitz preset `{0}`")]
    UnknownPreset(String),
    #[error("unknown centralizer kind `{0}`")]
    UnknownKind(String),
    #[error("shift needs q < p (got q = {q}, p = {p})")]
    ShiftOrder { p: f64, q: f64 },
    #[error("{0}")]
    Malformed(String),
    #[error("expected a lipschitz-family spec")]
    NotLipschitz,
    #[error("custom lipschitz functions cannot be serialized")]
    NotSerializable,
    #[error(transparent)]
    Seq(#[from] SeqError),
}

/// A homogeneous map on finitely supported sequences together with the
/// scale `p` whose norm it is measured in.
pub trait QuasilinearMap: Send + Sync {
    fn apply(&self, x: &CSeq) -> CSeq;
    fn scale(&self) -> PExp;
    fn label(&self) -> String {
        "map".to_string()
    }
}

pub type QMapHandle = Arc<dyn QuasilinearMap>;

/// Linear map `x ↦ d·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMultiplier {
    pub d: CSeq,
    pub p: PExp,
}

impl QuasilinearMap for DiagonalMultiplier {
    fn apply(&self, x: &CSeq) -> CSeq {
        CSeq::from_map_unchecked(
            x.dim(),
            x.iter().map(|(k, v)| (k, v * self.d.get(k))).collect(),
        )
    }

    fn scale(&self) -> PExp {
        self.p
    }

    fn label(&self) -> String {
        "diagonal".to_string()
    }
}

/// Named Lipschitz functions `φ: ℝ²₊ → ℝ` with `φ(0, 0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LipschitzPreset {
    /// `φ(s, t) = s`
    S,
    /// `φ(s, t) = t`
    T,
    /// `φ(s, t) = s + t`
    SPlusT,
    /// `φ(s, t) = min(s, t)`
    Min,
    /// `φ(s, t) = sin(s)·e^{-t}`
    SinDamped,
}

impl LipschitzPreset {
    pub const ALL: [LipschitzPreset; 5] = [
        LipschitzPreset::S,
        LipschitzPreset::T,
        LipschitzPreset::SPlusT,
        LipschitzPreset::Min,
        LipschitzPreset::SinDamped,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LipschitzPreset::S => "s",
            LipschitzPreset::T => "t",
            LipschitzPreset::SPlusT => "s+t",
            LipschitzPreset::Min => "min",
            LipschitzPreset::SinDamped => "sin-damped",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, CentralizerError> {
        LipschitzPreset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| CentralizerError::UnknownPreset(name.to_string()))
    }

    /// Lipschitz constant with respect to the Euclidean norm on ℝ².
    pub fn lipschitz_constant(self) -> f64 {
        match self {
            LipschitzPreset::SPlusT => std::f64::consts::SQRT_2,
            _ => 1.0,
        }
    }

    pub fn eval(self, s: f64, t: f64) -> f64 {
        match self {
            LipschitzPreset::S => s,
            LipschitzPreset::T => t,
            LipschitzPreset::SPlusT => s + t,
            LipschitzPreset::Min => s.min(t),
            LipschitzPreset::SinDamped => s.sin() * (-t).exp(),
        }
    }
}

type CustomFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum LipschitzFn {
    Preset(LipschitzPreset),
    Custom { name: String, f: CustomFn, lipschitz: Option<f64> },
}

impl LipschitzFn {
    pub fn custom<F>(name: &str, lipschitz: Option<f64>, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        LipschitzFn::Custom { name: name.to_string(), f: Arc::new(f), lipschitz }
    }

    pub fn name(&self) -> &str {
        match self {
            LipschitzFn::Preset(p) => p.name(),
            LipschitzFn::Custom { name, .. } => name,
        }
    }

    pub fn lipschitz_constant(&self) -> Option<f64> {
        match self {
            LipschitzFn::Preset(p) => Some(p.lipschitz_constant()),
            LipschitzFn::Custom { lipschitz, .. } => *lipschitz,
        }
    }

    fn eval(&self, s: f64, t: f64) -> Complex64 {
        match self {
            LipschitzFn::Preset(p) => Complex64::new(p.eval(s, t), 0.0),
            LipschitzFn::Custom { f, .. } => f(s, t),
        }
    }
}

impl fmt::Debug for LipschitzFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LipschitzFn::Preset(p) => write!(f, "Preset({})", p.name()),
            LipschitzFn::Custom { name, lipschitz, .. } => {
                write!(f, "Custom({name}, L = {lipschitz:?})")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum CentralizerKind {
    KaltonPeck,
    KaltonRank,
    Lipschitz(LipschitzFn),
    Shifted { base: Box<CentralizerSpec>, q: PExp },
}

/// A selectable centralizer. For `Shifted`, `p` is the scale of the base
/// map and the shifted map acts on `ℓ_q`; [`CentralizerSpec::scale`] gives
/// the exponent the map is measured in.
#[derive(Debug, Clone)]
pub struct CentralizerSpec {
    pub kind: CentralizerKind,
    pub p: PExp,
}

impl CentralizerSpec {
    pub fn kalton_peck(p: PExp) -> Self {
        CentralizerSpec { kind: CentralizerKind::KaltonPeck, p }
    }

    pub fn kalton_rank(p: PExp) -> Self {
        CentralizerSpec { kind: CentralizerKind::KaltonRank, p }
    }

    pub fn lipschitz(f: LipschitzFn, p: PExp) -> Result<Self, CentralizerError> {
        let Some(lip) = f.lipschitz_constant() else {
            return Err(CentralizerError::MissingLipschitzConstant(f.name().to_string()));
        };
        if !(lip.is_finite() && lip >= 0.0) {
            return Err(CentralizerError::MissingLipschitzConstant(f.name().to_string()));
        }
        if f.eval(0.0, 0.0) != Complex64::new(0.0, 0.0) {
            return Err(CentralizerError::NonzeroAtOrigin(f.name().to_string()));
        }
        Ok(CentralizerSpec { kind: CentralizerKind::Lipschitz(f), p })
    }

    pub fn preset(preset: LipschitzPreset, p: PExp) -> Self {
        CentralizerSpec { kind: CentralizerKind::Lipschitz(LipschitzFn::Preset(preset)), p }
    }

    /// The exponent of the space the map acts on.
    pub fn scale(&self) -> PExp {
        match &self.kind {
            CentralizerKind::Shifted { q, .. } => *q,
            _ => self.p,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            CentralizerKind::KaltonPeck => format!("kp(p={})", self.p),
            CentralizerKind::KaltonRank => format!("rank(p={})", self.p),
            CentralizerKind::Lipschitz(f) => format!("lipschitz:{}(p={})", f.name(), self.p),
            CentralizerKind::Shifted { base, q } => format!("shift[{} -> q={}]", base.label(), q),
        }
    }

    pub fn eval(&self, x: &CSeq) -> CSeq {
        match &self.kind {
            CentralizerKind::KaltonPeck => eval_kalton_peck(x, self.p),
            CentralizerKind::KaltonRank => eval_kalton_rank(x, self.p),
            CentralizerKind::Lipschitz(f) => eval_family(x, self.p, |s, t| f.eval(s, t)),
            CentralizerKind::Shifted { base, q } => eval_shifted(base, *q, x),
        }
    }

    pub fn handle(&self) -> QMapHandle {
        Arc::new(self.clone())
    }
}

impl QuasilinearMap for CentralizerSpec {
    fn apply(&self, x: &CSeq) -> CSeq {
        self.eval(x)
    }

    fn scale(&self) -> PExp {
        CentralizerSpec::scale(self)
    }

    fn label(&self) -> String {
        CentralizerSpec::label(self)
    }
}

#[inline]
fn log_ratio(norm: f64, modulus: f64) -> f64 {
    (norm / modulus).ln()
}

/// `Ω(x) = x · log(‖x‖_p / |x|)` on the support of `x`.
pub fn eval_kalton_peck(x: &CSeq, p: PExp) -> CSeq {
    let norm = x.norm(p);
    CSeq::from_map_unchecked(
        x.dim(),
        x.iter().map(|(k, v)| (k, v * log_ratio(norm, v.norm()))).collect(),
    )
}

/// `Γ(x) = x · log r_x` on the support of `x`.
pub fn eval_kalton_rank(x: &CSeq, _p: PExp) -> CSeq {
    let out: BTreeMap<usize, Complex64> = rank_order(x)
        .into_iter()
        .enumerate()
        .map(|(pos, (k, _))| (k, x.get(k) * ((pos + 1) as f64).ln()))
        .collect();
    CSeq::from_map_unchecked(x.dim(), out)
}

fn eval_family<F: Fn(f64, f64) -> Complex64>(x: &CSeq, p: PExp, phi: F) -> CSeq {
    let norm = x.norm(p);
    let out: BTreeMap<usize, Complex64> = rank_order(x)
        .into_iter()
        .enumerate()
        .map(|(pos, (k, m))| {
            let v = x.get(k);
            let w = phi(log_ratio(norm, m), ((pos + 1) as f64).ln());
            let y = if w.im == 0.0 { v * w.re } else { v * w };
            (k, y)
        })
        .collect();
    CSeq::from_map_unchecked(x.dim(), out)
}

/// `Φ(x) = x · φ(log(‖x‖_p/|x|), log r_x)` for a Lipschitz-family spec.
pub fn eval_lipschitz_centralizer(
    x: &CSeq,
    spec: &CentralizerSpec,
    p: PExp,
) -> Result<CSeq, CentralizerError> {
    match &spec.kind {
        CentralizerKind::Lipschitz(f) => {
            if f.lipschitz_constant().is_none() {
                return Err(CentralizerError::MissingLipschitzConstant(f.name().to_string()));
            }
            Ok(eval_family(x, p, |s, t| f.eval(s, t)))
        }
        _ => Err(CentralizerError::NotLipschitz),
    }
}

/// Shifts a centralizer on `ℓ_p` to `ℓ_q`, `q < p`:
/// `Φ_q(x) = u |x|^{q/s} Φ(|x|^{q/p})` with `1/q = 1/p + 1/s`.
pub fn shift_centralizer(base: &CentralizerSpec, q: PExp) -> Result<CentralizerSpec, CentralizerError> {
    let p = base.scale();
    // also rejects q so close to p or to 0 that s is not a finite positive number
    if PExp::conjugate_for_shift(p, q).is_err() {
        return Err(CentralizerError::ShiftOrder { p: p.value(), q: q.value() });
    }
    // the stored p of a shifted spec is the scale of its base
    Ok(CentralizerSpec { kind: CentralizerKind::Shifted { base: Box::new(base.clone()), q }, p })
}

fn eval_shifted(base: &CentralizerSpec, q: PExp, x: &CSeq) -> CSeq {
    let p = base.scale();
    let s = PExp::conjugate_for_shift(p, q).expect("shift order checked at construction");
    let (ea, eb) = (q.value() / s.value(), q.value() / p.value());
    let polar = polar_decomposition(x);
    let inner = polar.modulus.map(|_, m| Complex64::new(m.re.powf(eb), 0.0));
    let phi = base.eval(&inner);
    let out: BTreeMap<usize, Complex64> = polar
        .modulus
        .iter()
        .map(|(k, m)| (k, polar.phase(k) * m.re.powf(ea) * phi.get(k)))
        .collect();
    CSeq::from_map_unchecked(x.dim(), out)
}

/// The scalar functional `x ↦ ⟨1, Φ₁(x)⟩` generating a minimal extension
/// of `ℓ₁`, where `Φ₁` is `base` shifted to `q = 1`. Needs `base.scale() > 1`.
pub fn minimal_extension_functional(x: &CSeq, base: &CentralizerSpec) -> Result<Complex64, CentralizerError> {
    let shifted = shift_centralizer(base, PExp::new(1.0)?)?;
    Ok(shifted.eval(x).iter().map(|(_, v)| v).sum())
}

/// Wire form: `{"kind": "kp"|"rank"|"lipschitz:<preset>"|"shift", "p": f, "q": f?, "base": spec?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    kind: String,
    p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Box<SpecRepr>>,
}

const MAX_SHIFT_DEPTH: usize = 16;

impl SpecRepr {
    fn from_spec(spec: &CentralizerSpec) -> Result<Self, CentralizerError> {
        Ok(match &spec.kind {
            CentralizerKind::KaltonPeck => SpecRepr { kind: "kp".into(), p: spec.p.value(), q: None, base: None },
            CentralizerKind::KaltonRank => SpecRepr { kind: "rank".into(), p: spec.p.value(), q: None, base: None },
            CentralizerKind::Lipschitz(LipschitzFn::Preset(pr)) => SpecRepr {
                kind: format!("lipschitz:{}", pr.name()),
                p: spec.p.value(),
                q: None,
                base: None,
            },
            CentralizerKind::Lipschitz(LipschitzFn::Custom { .. }) => {
                return Err(CentralizerError::NotSerializable)
            }
            CentralizerKind::Shifted { base, q } => SpecRepr {
                kind: "shift".into(),
                p: spec.p.value(),
                q: Some(q.value()),
                base: Some(Box::new(SpecRepr::from_spec(base)?)),
            },
        })
    }

    fn into_spec(self, depth: usize) -> Result<CentralizerSpec, CentralizerError> {
        if depth > MAX_SHIFT_DEPTH {
            return Err(CentralizerError::Malformed("shift nesting too deep".into()));
        }
        let p = PExp::new(self.p)?;
        let plain = |what: &str| -> Result<(), CentralizerError> {
            if self.q.is_some() || self.base.is_some() {
                Err(CentralizerError::Malformed(format!("`{what}` takes no q/base")))
            } else {
                Ok(())
            }
        };
        match self.kind.as_str() {
            "kp" => {
                plain("kp")?;
                Ok(CentralizerSpec::kalton_peck(p))
            }
            "rank" => {
                plain("rank")?;
                Ok(CentralizerSpec::kalton_rank(p))
            }
            "shift" => {
                let q = self.q.ok_or_else(|| CentralizerError::Malformed("shift needs q".into()))?;
                let base = self
                    .base
                    .ok_or_else(|| CentralizerError::Malformed("shift needs base".into()))?
                    .into_spec(depth + 1)?;
                if base.scale() != p {
                    return Err(CentralizerError::Malformed(format!(
                        "shift p = {} differs from the base scale {}",
                        p,
                        base.scale()
                    )));
                }
                shift_centralizer(&base, PExp::new(q)?)
            }
            other => match other.strip_prefix("lipschitz:") {
                Some(name) => {
                    plain("lipschitz")?;
                    Ok(CentralizerSpec::preset(LipschitzPreset::from_name(name)?, p))
                }
                None => Err(CentralizerError::UnknownKind(other.to_string())),
            },
        }
    }
}

impl Serialize for CentralizerSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        SpecRepr::from_spec(self).map_err(serde::ser::Error::custom)?.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CentralizerSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        SpecRepr::deserialize(de)?.into_spec(0).map_err(serde::de::Error::custom)
    }
}
