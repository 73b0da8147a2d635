//! Symbolic dependence engine: maps radial and angular tail descriptions to
//! the limits `chi` and `eta` of `X = R (W1, W2)`.
//!
//! Every result carries a rule identifier naming the branch that produced it.

use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use libm::pow;

use crate::distmodel::{AngularModel, ConstructionSpec, UnivariateModel};
use crate::error::{invalid, Error, Result};
use crate::normgeom::{NormProfile, NormSpec};
use crate::quad::{integrate_breaks, QuadError, QuadOptions};
use crate::tailclass::{dominates, log_transform, scaled_rate, squared_tail, Dominance, Mda, TailClass};

/// Tolerance for comparing supplied side data against derived values.
pub const SIDE_DATA_TOL: f64 = 1e-9;

/// A dependence coefficient: a number in `[0, 1]`, undefined, or not
/// determined by the available information.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Coefficient {
    Defined { value: f64 },
    NotDefined,
    Unknown { reason: String },
}

impl Coefficient {
    pub fn defined(value: f64) -> Self {
        Coefficient::Defined {
            value: value.clamp(0.0, 1.0),
        }
    }

    pub fn unknown(reason: impl Into<String>) -> Self {
        Coefficient::Unknown { reason: reason.into() }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Coefficient::Defined { value } => Some(*value),
            _ => None,
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Coefficient::Unknown { .. })
    }

    fn positive(&self) -> bool {
        self.value().map(|v| v > 0.0).unwrap_or(false)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Defined { value } => write!(f, "{value}"),
            Coefficient::NotDefined => write!(f, "not defined"),
            Coefficient::Unknown { reason } => write!(f, "unknown ({reason})"),
        }
    }
}

/// `(chi, eta)` with the rule that produced them.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DependenceSummary {
    pub chi: Coefficient,
    pub eta: Coefficient,
    pub rule: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub notes: String,
}

impl DependenceSummary {
    fn new(chi: Coefficient, eta: Coefficient, rule: &str) -> Self {
        // positive chi forces eta = 1
        let eta = if chi.positive() { Coefficient::defined(1.0) } else { eta };
        DependenceSummary {
            chi,
            eta,
            rule: rule.to_string(),
            notes: String::new(),
        }
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(&n.into());
        self
    }

    /// Both coefficients are determined (defined or provably undefined).
    pub fn is_resolved(&self) -> bool {
        !self.chi.is_unknown() && !self.eta.is_unknown()
    }
}

fn d(v: f64) -> Coefficient {
    Coefficient::defined(v)
}

fn nd() -> Coefficient {
    Coefficient::NotDefined
}

fn unk(r: &str) -> Coefficient {
    Coefficient::unknown(r)
}

/// Radial tail behaviour as consumed by the constrained-sphere rules.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum RadialTail {
    /// Regularly varying with index `alpha`; `alpha = 0` covers slowly varying
    /// and heavier tails.
    Frechet { alpha: f64 },
    /// Gumbel domain; `-log P(R > r)` is regularly varying with index `delta`
    /// when known (`inf` for doubly exponential decay). `None` endpoint is `+inf`.
    Gumbel { endpoint: Option<f64>, delta: Option<f64> },
    NegWeibull { endpoint: f64, alpha: f64 },
}

impl RadialTail {
    pub fn from_class(c: &TailClass) -> Self {
        match c {
            TailClass::RegVarInf { alpha, .. } => RadialTail::Frechet { alpha: *alpha },
            TailClass::SuperHeavy { .. } => RadialTail::Frechet { alpha: 0.0 },
            TailClass::LogWeibullType { alpha, beta, .. } => {
                if *beta < 1.0 {
                    RadialTail::Frechet { alpha: 0.0 }
                } else if *beta == 1.0 {
                    RadialTail::Frechet { alpha: *alpha }
                } else {
                    RadialTail::Gumbel {
                        endpoint: None,
                        delta: Some(0.0),
                    }
                }
            }
            TailClass::WeibullType { beta, .. } => RadialTail::Gumbel {
                endpoint: None,
                delta: Some(*beta),
            },
            TailClass::ExpTailed { .. } => RadialTail::Gumbel {
                endpoint: None,
                delta: Some(1.0),
            },
            TailClass::ConvEquiv { alpha } => RadialTail::Gumbel {
                endpoint: None,
                delta: if *alpha > 0.0 { Some(1.0) } else { None },
            },
            TailClass::NegWeibull { endpoint, alpha, .. } => RadialTail::NegWeibull {
                endpoint: *endpoint,
                alpha: *alpha,
            },
            TailClass::GumbelGeneric { endpoint } => RadialTail::Gumbel {
                endpoint: *endpoint,
                delta: None,
            },
        }
    }
}

/// `P(W > 0)` for the angular margin.
fn positive_mass(angular: &AngularModel) -> f64 {
    match angular {
        AngularModel::ConstrainedSphere { .. } => 1.0,
        _ => {
            let m = angular.margin().unwrap();
            match m.atom() {
                Some(v) if v <= 0.0 => 0.0,
                Some(_) => 1.0,
                None => m.survival(0.0),
            }
        }
    }
}

/// `chi` for a regularly varying radial law with index `alpha`:
/// `E[min(W1, W2)^alpha] / E[W^alpha]`.
pub fn chi_frechet(alpha: f64, angular: &AngularModel) -> Result<(Coefficient, String)> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(invalid(format!("radial index must be finite and >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok((d(1.0), String::from("slowly varying radial tail")));
    }
    if positive_mass(angular) < 1.0 {
        return Ok((nd(), String::from("P(W = 0) > 0")));
    }
    if let Some(m) = angular.margin() {
        if m.moment_index() <= alpha {
            return Ok((unk("E[W^alpha] is infinite"), String::new()));
        }
    }
    let num = angular.min_moment(alpha)?;
    let den = angular.margin_moment(alpha)?;
    Ok((d(num / den), String::from("evaluated by quadrature")))
}

/// Rules for an angular pair on the unit sphere of a norm.
///
/// `pw1` is `P(W = 1)`; `angular` is needed only for a regularly varying radial tail.
pub fn coefficients_constrained(
    radial: &RadialTail,
    profile: &NormProfile,
    pw1: f64,
    angular: Option<&AngularModel>,
) -> Result<DependenceSummary> {
    if !(0.0..=1.0).contains(&pw1) {
        return Err(invalid(format!("P(W = 1) must lie in [0, 1], got {pw1}")));
    }
    let sharp = profile.zeta < 1.0;
    let pointed_chi = || match (profile.slope_increasing, profile.slope_decreasing) {
        (Some(up), Some(down)) => d(2.0 * down.abs() / (down.abs() + up.abs())),
        _ => unk("one-sided slopes of tau at 1/2 unavailable"),
    };
    let s = match *radial {
        RadialTail::Frechet { alpha } => {
            let Some(a) = angular else {
                return Ok(DependenceSummary::new(
                    unk("angular law needed for the moment ratio"),
                    d(1.0),
                    "constrained.frechet",
                ));
            };
            let (chi, note) = chi_frechet(alpha, a)?;
            let eta = if chi == Coefficient::NotDefined { nd() } else { d(1.0) };
            DependenceSummary::new(chi, eta, "constrained.frechet").note(note)
        }
        RadialTail::Gumbel { endpoint, delta } => {
            if sharp {
                match (endpoint, delta) {
                    (Some(_), _) => DependenceSummary::new(d(0.0), nd(), "constrained.gumbel.finite-endpoint"),
                    (None, Some(dl)) => {
                        let eta = if dl == 0.0 {
                            1.0
                        } else if dl.is_infinite() {
                            0.0
                        } else {
                            pow(profile.zeta, dl)
                        };
                        DependenceSummary::new(d(0.0), d(eta), "constrained.gumbel.zeta-power")
                    }
                    (None, None) => DependenceSummary::new(
                        d(0.0),
                        unk("auxiliary function unspecified"),
                        "constrained.gumbel.zeta-power",
                    ),
                }
            } else if pw1 > 0.0 {
                DependenceSummary::new(d(0.0), d(1.0), "constrained.gumbel.plateau")
            } else {
                DependenceSummary::new(pointed_chi(), d(1.0), "constrained.gumbel.kink")
            }
        }
        RadialTail::NegWeibull { alpha, .. } => {
            if sharp {
                DependenceSummary::new(d(0.0), nd(), "constrained.negweibull.sharp")
            } else if pw1 > 0.0 {
                DependenceSummary::new(d(0.0), d(alpha / (1.0 + alpha)), "constrained.negweibull.plateau")
            } else {
                DependenceSummary::new(pointed_chi(), d(1.0), "constrained.negweibull.kink")
            }
        }
    };
    Ok(s)
}

/// Moments at the common regular-variation index, `inf` when divergent.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Moments {
    pub r_alpha: Option<f64>,
    pub w_alpha: Option<f64>,
    pub wmin_alpha: Option<f64>,
}

/// Side information for an unconstrained angular pair.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnconstrainedInput {
    pub r_class: TailClass,
    pub w_class: TailClass,
    pub wmin_class: TailClass,
    #[cfg_attr(feature = "serde", serde(default))]
    pub chi_w: Option<Coefficient>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub eta_w: Option<Coefficient>,
    /// Limit of `P(W > x) / P(R > x)`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub tail_ratio_c: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub moments: Moments,
}

impl UnconstrainedInput {
    pub fn new(r_class: TailClass, w_class: TailClass, wmin_class: TailClass) -> Self {
        UnconstrainedInput {
            r_class,
            w_class,
            wmin_class,
            chi_w: None,
            eta_w: None,
            tail_ratio_c: None,
            moments: Moments::default(),
        }
    }

    /// Independent angular components: the minimum has the squared tail.
    pub fn independent(r_class: TailClass, w_class: TailClass) -> Self {
        let wmin = squared_tail(&w_class);
        let mut s = Self::new(r_class, w_class, wmin);
        s.chi_w = Some(d(0.0));
        s.eta_w = Some(d(0.5));
        s
    }

    /// Gaussian copula angular pair with correlation `rho < 1`.
    pub fn gaussian_copula(r_class: TailClass, w_class: TailClass, rho: f64) -> Self {
        let eta = (1.0 + rho) / 2.0;
        let wmin = scaled_rate(&w_class, eta);
        let mut s = Self::new(r_class, w_class, wmin);
        s.chi_w = Some(d(0.0));
        s.eta_w = Some(d(eta));
        s
    }
}

/// `lim log P(A > x) / log P(B > x)` at the resolution of class parameters.
fn log_ratio_limit(a: &TailClass, b: &TailClass) -> Option<f64> {
    use TailClass::*;
    match (a, b) {
        (SuperHeavy { log_class: x }, SuperHeavy { log_class: y }) => log_ratio_limit(x, y),
        (WeibullType { alpha: a1, beta: b1, .. }, WeibullType { alpha: a2, beta: b2, .. })
        | (LogWeibullType { alpha: a1, beta: b1, .. }, LogWeibullType { alpha: a2, beta: b2, .. }) => {
            if b1 == b2 {
                Some(a1 / a2)
            } else if b1 < b2 {
                Some(0.0)
            } else {
                None
            }
        }
        (RegVarInf { alpha: a1, .. }, RegVarInf { alpha: a2, .. })
        | (ExpTailed { alpha: a1, .. }, ExpTailed { alpha: a2, .. })
        | (NegWeibull { alpha: a1, .. }, NegWeibull { alpha: a2, .. })
            if *a2 > 0.0 =>
        {
            Some(a1 / a2)
        }
        (ConvEquiv { alpha: a1 }, ConvEquiv { alpha: a2 }) if *a1 > 0.0 && *a2 > 0.0 => Some(a1 / a2),
        (RegVarInf { alpha: a1, .. }, LogWeibullType { alpha: a2, beta: b2, .. }) if *b2 == 1.0 => Some(a1 / a2),
        (LogWeibullType { alpha: a1, beta: b1, .. }, RegVarInf { alpha: a2, .. }) if *b1 == 1.0 => Some(a1 / a2),
        _ => None,
    }
}

/// `(chi_W, eta_W)` read off the classes of `W` and `min(W1, W2)`.
pub fn pair_coefficients(w: &TailClass, wmin: &TailClass) -> (Coefficient, Coefficient) {
    use TailClass::*;
    let ell_ratio = |l1: Option<f64>, l2: Option<f64>| match (l1, l2) {
        (Some(a), Some(b)) if a > 0.0 => d(b / a),
        _ => unk("slowly varying factors of W and its minimum not given"),
    };
    match (w, wmin) {
        (SuperHeavy { log_class: a }, SuperHeavy { log_class: b }) => pair_coefficients(a, b),
        (LogWeibullType { .. }, LogWeibullType { .. }) => match (log_transform(w), log_transform(wmin)) {
            (Ok(a), Ok(b)) => pair_coefficients(&a, &b),
            _ => (unk("log classes unavailable"), unk("log classes unavailable")),
        },
        (
            WeibullType {
                alpha: a1,
                beta: b1,
                gamma: g1,
                ell_limit: l1,
            },
            WeibullType {
                alpha: a2,
                beta: b2,
                gamma: g2,
                ell_limit: l2,
            },
        ) => {
            if b2 > b1 {
                (d(0.0), nd())
            } else if b2 < b1 || a2 < a1 {
                (unk("minimum heavier than margin"), unk("minimum heavier than margin"))
            } else if a2 > a1 {
                (d(0.0), d(a1 / a2))
            } else if g2 < g1 {
                (d(0.0), d(1.0))
            } else if g2 > g1 {
                (unk("minimum heavier than margin"), unk("minimum heavier than margin"))
            } else {
                (ell_ratio(*l1, *l2), d(1.0))
            }
        }
        (ExpTailed { alpha: a1, beta: p1 }, ExpTailed { alpha: a2, beta: p2 })
        | (RegVarInf { alpha: a1, beta: p1 }, RegVarInf { alpha: a2, beta: p2 }) => {
            if a2 > a1 {
                if *a1 == 0.0 {
                    (d(0.0), unk("slowly varying margin"))
                } else {
                    (d(0.0), d(a1 / a2))
                }
            } else if a2 < a1 {
                (unk("minimum heavier than margin"), unk("minimum heavier than margin"))
            } else {
                match (p1, p2) {
                    (Some(x), Some(y)) if y < x => (d(0.0), d(1.0)),
                    _ => (unk("tail constants of W and its minimum not given"), d(1.0)),
                }
            }
        }
        (
            NegWeibull {
                endpoint: e1,
                alpha: a1,
                ell_limit: l1,
            },
            NegWeibull {
                endpoint: e2,
                alpha: a2,
                ell_limit: l2,
            },
        ) => {
            if e2 < e1 {
                (d(0.0), nd())
            } else if a2 > a1 {
                (d(0.0), d(a1 / a2))
            } else if a2 < a1 || e2 > e1 {
                (unk("minimum heavier than margin"), unk("minimum heavier than margin"))
            } else {
                (ell_ratio(*l1, *l2), d(1.0))
            }
        }
        (ConvEquiv { alpha: a1 }, ConvEquiv { alpha: a2 }) if *a1 > 0.0 && a2 > a1 => (d(0.0), d(a1 / a2)),
        _ => match dominates(wmin, w) {
            Dominance::StrictlyLighter => match log_ratio_limit(w, wmin) {
                Some(r) if r > 0.0 => (d(0.0), d(r)),
                Some(_) => (d(0.0), nd()),
                None => (d(0.0), unk("log-survival ratio of W and its minimum undetermined")),
            },
            _ => (unk("class pair not covered"), unk("class pair not covered")),
        },
    }
}

fn reconcile(derived: Coefficient, supplied: &Option<Coefficient>, name: &str) -> Result<Coefficient> {
    match supplied {
        None => Ok(derived),
        Some(s) => match (&derived, s) {
            (Coefficient::Unknown { .. }, _) => Ok(s.clone()),
            (Coefficient::Defined { value: a }, Coefficient::Defined { value: b }) => {
                if (a - b).abs() > SIDE_DATA_TOL {
                    Err(Error::SideDataConflict(format!("{name}: supplied {b}, implied by classes {a}")))
                } else {
                    Ok(s.clone())
                }
            }
            (_, Coefficient::Unknown { .. }) => Ok(derived),
            (a, b) if a == b => Ok(derived),
            (a, b) => Err(Error::SideDataConflict(format!("{name}: supplied {b}, implied by classes {a}"))),
        },
    }
}

/// Regular-variation index of a tail, if it is regularly varying with positive index.
fn rv_index(c: &TailClass) -> Option<f64> {
    match c {
        TailClass::RegVarInf { alpha, .. } if *alpha > 0.0 => Some(*alpha),
        TailClass::LogWeibullType { alpha, beta, .. } if *beta == 1.0 => Some(*alpha),
        _ => None,
    }
}

/// Exponential-tail second parameter of `log X` for a regularly varying class.
fn log_et_beta(c: &TailClass) -> Option<f64> {
    match c {
        TailClass::RegVarInf { beta, .. } => *beta,
        TailClass::LogWeibullType { gamma, beta, .. } if *beta == 1.0 => Some(*gamma),
        _ => None,
    }
}

// Weibull-type parameters, with exponential tails read as index 1.
fn wt_params(c: &TailClass) -> Option<(f64, f64, Option<f64>)> {
    match c {
        TailClass::WeibullType { alpha, beta, gamma, .. } => Some((*alpha, *beta, Some(*gamma))),
        TailClass::ExpTailed { alpha, beta } => Some((*alpha, 1.0, *beta)),
        _ => None,
    }
}

fn lwt_light(c: &TailClass) -> Option<(f64, f64)> {
    match c {
        TailClass::LogWeibullType { alpha, beta, .. } if *beta > 1.0 => Some((*alpha, *beta)),
        _ => None,
    }
}

fn nw_params(c: &TailClass) -> Option<(f64, f64)> {
    match c {
        TailClass::NegWeibull { endpoint, alpha, .. } => Some((*endpoint, *alpha)),
        _ => None,
    }
}

fn moment_ratio(num: Option<f64>, den: Option<f64>) -> Coefficient {
    match (num, den) {
        (Some(n), Some(m)) if m.is_finite() && m > 0.0 && n.is_finite() => d(n / m),
        (Some(_), Some(_)) => unk("moments must be finite and positive"),
        _ => unk("E[W^alpha] and E[min(W1,W2)^alpha] required"),
    }
}

/// Rules for an unconstrained angular pair; the first matching rule wins.
pub fn coefficients_unconstrained(input: &UnconstrainedInput) -> Result<DependenceSummary> {
    let r = &input.r_class;
    let w = &input.w_class;
    let wm = &input.wmin_class;
    for c in [r, w, wm] {
        c.validate()?;
    }
    if dominates(wm, w) == Dominance::StrictlyHeavier {
        return Err(invalid("minimum of the angular pair cannot be heavier than its margin"));
    }
    let (chi_d, eta_d) = pair_coefficients(w, wm);
    let chi_w = reconcile(chi_d, &input.chi_w, "chi_W")?;
    let eta_w = reconcile(eta_d, &input.eta_w, "eta_W")?;
    let w_vs_r = dominates(w, r);

    // superheavy radial tail not dominated by the angular one
    if r.is_super_heavy() && w_vs_r != Dominance::StrictlyHeavier {
        let c = match (w_vs_r, input.tail_ratio_c) {
            (Dominance::StrictlyLighter, _) => Some(0.0),
            (_, c) => c,
        };
        let chi = match c {
            Some(0.0) => d(1.0),
            Some(c) if c.is_finite() && c > 0.0 => match chi_w.value() {
                Some(x) => d((1.0 + c * x) / (1.0 + c)),
                None => unk("chi_W required"),
            },
            Some(_) => return Err(invalid("tail ratio c must be finite and >= 0")),
            None => unk("tail ratio c = lim P(W > x)/P(R > x) required"),
        };
        return Ok(DependenceSummary::new(chi, d(1.0), "unconstrained.superheavy-radial"));
    }

    // superheavy angular tail dominating the radial one
    if w.is_super_heavy() && w_vs_r == Dominance::StrictlyHeavier {
        let eta = if chi_w.positive() {
            d(1.0)
        } else {
            match dominates(r, wm) {
                Dominance::StrictlyLighter | Dominance::SameScale => eta_w.clone(),
                Dominance::StrictlyHeavier => match log_ratio_limit(w, r) {
                    Some(v) if v > 0.0 && v <= 1.0 => d(v),
                    _ => unk("limit of log P(W > x) / log P(R > x) undetermined"),
                },
                Dominance::Incomparable => unk("radial and minimum tails incomparable"),
            }
        };
        return Ok(DependenceSummary::new(chi_w, eta, "unconstrained.superheavy-angular")
            .note("radial tail compared with the minimum by class parameters"));
    }

    let alpha_r = rv_index(r);
    let alpha_w = rv_index(w);

    // regularly varying radial tail, lighter angular tail
    if let Some(a) = alpha_r {
        if w_vs_r == Dominance::StrictlyLighter {
            let chi = moment_ratio(input.moments.wmin_alpha, input.moments.w_alpha);
            if chi.value() == Some(0.0) {
                return Ok(DependenceSummary::new(d(0.0), nd(), "unconstrained.rv-radial").note("E[min^alpha] = 0"));
            }
            return Ok(DependenceSummary::new(chi, d(1.0), "unconstrained.rv-radial").note(format!("alpha = {a}")));
        }
    }

    // regularly varying angular tail, lighter radial tail
    if let Some(aw) = alpha_w {
        let radial_light = match (alpha_r, r.mda()) {
            (Some(ar), _) if ar > aw => Some(ar),
            (None, Mda::Gumbel { .. } | Mda::NegWeibull { .. }) => Some(f64::INFINITY),
            _ => None,
        };
        if let Some(ar) = radial_light {
            let eta = if chi_w.positive() {
                d(1.0)
            } else {
                match &eta_w {
                    Coefficient::Defined { value: e } if *e > 0.0 => {
                        let threshold = aw / e;
                        if ar.is_infinite() || ar > threshold {
                            d(*e)
                        } else if ar < threshold {
                            d(aw / ar)
                        } else {
                            unk("radial index on the boundary alpha_W / eta_W")
                        }
                    }
                    Coefficient::Defined { .. } => d(aw / ar),
                    Coefficient::NotDefined => {
                        if ar.is_infinite() {
                            nd()
                        } else {
                            d(aw / ar)
                        }
                    }
                    Coefficient::Unknown { .. } => unk("eta_W required"),
                }
            };
            return Ok(DependenceSummary::new(chi_w, eta, "unconstrained.rv-angular"));
        }
    }

    // regularly varying radial and angular tails with the same index
    if let (Some(ar), Some(aw)) = (alpha_r, alpha_w) {
        if ar == aw {
            let chi = same_index_chi(input, &chi_w);
            return Ok(DependenceSummary::new(chi.0, d(1.0), chi.1));
        }
    }

    // log-Weibull type everywhere with a common index above one
    if let (Some((a_r, b_r)), Some((a_w, b_w)), Some((a_m, b_m))) = (lwt_light(r), lwt_light(w), lwt_light(wm)) {
        if b_r == b_w && b_w == b_m {
            let rule = "unconstrained.log-weibull";
            if chi_w.positive() {
                return Ok(DependenceSummary::new(chi_w, d(1.0), rule));
            }
            if chi_w.is_unknown() {
                return Ok(DependenceSummary::new(chi_w, unk("chi_W required"), rule));
            }
            let k = 1.0 / (b_r - 1.0);
            let factor = pow((pow(a_m, k) + pow(a_r, k)) / (pow(a_w, k) + pow(a_r, k)), b_r - 1.0);
            let eta = match eta_w.value() {
                Some(e) => d(e * factor),
                None => unk("eta_W required"),
            };
            return Ok(DependenceSummary::new(d(0.0), eta, rule).note("slowly varying factors taken as constant"));
        }
    }

    // Weibull type everywhere
    if let (Some((_, b_r, _)), Some((a_w, b_w, g_w)), Some((a_m, b_m, g_m))) = (wt_params(r), wt_params(w), wt_params(wm)) {
        if b_m > b_w {
            return Ok(DependenceSummary::new(d(0.0), d(0.0), "unconstrained.weibull.faster-minimum"));
        }
        if b_m == b_w {
            if a_m > a_w {
                let eta = pow(a_w / a_m, b_r / (b_r + b_w));
                return Ok(DependenceSummary::new(d(0.0), d(eta), "unconstrained.weibull.rate"));
            }
            if a_m == a_w {
                return Ok(match (g_w, g_m) {
                    (Some(gw), Some(gm)) if gm < gw => {
                        DependenceSummary::new(d(0.0), d(1.0), "unconstrained.weibull.prefactor")
                    }
                    (Some(gw), Some(gm)) if gm == gw => {
                        DependenceSummary::new(chi_w, d(1.0), "unconstrained.weibull.equal")
                    }
                    _ => DependenceSummary::new(
                        unk("power prefactors of W and its minimum required"),
                        d(1.0),
                        "unconstrained.weibull.equal",
                    ),
                });
            }
        }
    }

    // finite angular endpoint or finite radial endpoint
    let r_mda = r.mda();
    let (w_nw, m_nw) = (nw_params(w), nw_params(wm));
    if let (Mda::Gumbel { .. }, Some((ew, _)), Some((em, _))) = (r_mda, w_nw, m_nw) {
        if ew == em {
            return Ok(DependenceSummary::new(chi_w, d(1.0), "unconstrained.gumbel-radial.negweibull-angular"));
        }
    }
    if let Mda::NegWeibull { alpha: a_r, .. } = r_mda {
        if let (Mda::Gumbel { endpoint: e1 }, Mda::Gumbel { endpoint: e2 }) = (w.mda(), wm.mda()) {
            if e1 == e2 {
                return Ok(DependenceSummary::new(chi_w, eta_w, "unconstrained.negweibull-radial.gumbel-angular"));
            }
        }
        if let (Some((ew, a_w)), Some((em, a_m))) = (w_nw, m_nw) {
            if ew == em {
                let rule = "unconstrained.negweibull";
                if a_m == a_w {
                    return Ok(DependenceSummary::new(chi_w, d(1.0), rule));
                }
                return Ok(DependenceSummary::new(d(0.0), d((a_w + a_r) / (a_m + a_r)), rule));
            }
        }
    }

    let is_wt = |c: &TailClass| wt_params(c).is_some();
    let is_lwt = |c: &TailClass| lwt_light(c).is_some();
    let reason = if (is_wt(r) && is_lwt(w)) || (is_lwt(r) && is_wt(w)) {
        "open problem: Weibull and log-Weibull tails combined"
    } else {
        "open problem: class combination not covered"
    };
    Ok(DependenceSummary::new(unk(reason), unk(reason), "unconstrained.open"))
}

// Equal regular-variation indices: subcases keyed on the exponential-tail
// parameters of log R and log W.
fn same_index_chi(input: &UnconstrainedInput, chi_w: &Coefficient) -> (Coefficient, &'static str) {
    let m = &input.moments;
    let (Some(br), Some(bw)) = (log_et_beta(&input.r_class), log_et_beta(&input.w_class)) else {
        return (
            unk("second-order parameters of log R and log W required"),
            "unconstrained.same-index",
        );
    };
    let finite = |v: Option<f64>| v.map(|x| x.is_finite());
    // log R convolution equivalent
    if br < -1.0 {
        if bw > br {
            if bw < -1.0 {
                return (chi_w.clone(), "unconstrained.same-index.ce-angular");
            }
        } else {
            let c = if bw < br { Some(0.0) } else { input.tail_ratio_c };
            let Some(c) = c else {
                return (unk("tail ratio c required"), "unconstrained.same-index.ce-radial");
            };
            let (Some(ew), Some(em), Some(er)) = (m.w_alpha, m.wmin_alpha, m.r_alpha) else {
                if c == 0.0 {
                    return (moment_ratio(m.wmin_alpha, m.w_alpha), "unconstrained.same-index.ce-radial");
                }
                return (unk("E[R^alpha], E[W^alpha], E[min^alpha] required"), "unconstrained.same-index.ce-radial");
            };
            let chi = match chi_w.value() {
                Some(x) => d((em + c * x * er) / (ew + c * er)),
                None if c == 0.0 => d(em / ew),
                None => unk("chi_W required"),
            };
            return (chi, "unconstrained.same-index.ce-radial");
        }
    }
    if bw < -1.0 && br > bw && br < -1.0 {
        return (chi_w.clone(), "unconstrained.same-index.ce-angular");
    }
    // heavier radial tail: E[R^alpha] infinite
    let r_heavy = br > -1.0 || (br == -1.0 && finite(m.r_alpha) == Some(false));
    if !r_heavy {
        return (
            unk("moment finiteness on the boundary beta = -1 unspecified"),
            "unconstrained.same-index",
        );
    }
    let w_heavy = bw > -1.0 || (bw == -1.0 && finite(m.w_alpha) == Some(false));
    let w_light = bw < -1.0 || (bw == -1.0 && br > -1.0 && finite(m.w_alpha) == Some(true));
    if chi_w.positive() && w_heavy {
        return (chi_w.clone(), "unconstrained.same-index.heavy-angular");
    }
    if w_light {
        return (moment_ratio(m.wmin_alpha, m.w_alpha), "unconstrained.same-index.light-angular");
    }
    if br > -1.0 && bw > -1.0 {
        let alpha = rv_index(&input.w_class).unwrap_or(0.0);
        match rv_index(&input.wmin_class) {
            Some(am) if am > alpha => return (d(0.0), "unconstrained.same-index.lighter-minimum"),
            None if dominates(&input.wmin_class, &input.w_class) == Dominance::StrictlyLighter => {
                return (d(0.0), "unconstrained.same-index.lighter-minimum")
            }
            _ => {}
        }
    }
    (unk("moment finiteness on the boundary beta = -1 unspecified"), "unconstrained.same-index")
}

/// The theta-mixture norm with a Gumbel-domain radial law, `-log P(R > r)`
/// regularly varying with index `delta`.
pub fn coefficients_model1(theta: f64, delta: f64) -> Result<DependenceSummary> {
    if !(theta.is_finite() && theta >= 0.5) {
        return Err(invalid(format!("theta must be >= 1/2, got {theta}")));
    }
    if !(delta >= 0.0) {
        return Err(invalid(format!("delta must be >= 0, got {delta}")));
    }
    let chi = (2.0 * (theta - 1.0) / (2.0 * theta - 1.0)).max(0.0);
    let eta = pow(theta.min(1.0), delta);
    Ok(DependenceSummary::new(d(chi), d(eta), "model1"))
}

/// Generalized Pareto radial law with shape `xi` and independent `Beta(alpha, alpha)` angles.
pub fn coefficients_model2(xi: f64, alpha: f64) -> Result<DependenceSummary> {
    if !xi.is_finite() {
        return Err(invalid("xi must be finite"));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid(format!("alpha must be > 0, got {alpha}")));
    }
    if xi > 0.0 {
        let chi = if alpha == 1.0 {
            2.0 * xi / (2.0 * xi + 1.0)
        } else {
            let w = UnivariateModel::Beta { a: alpha, b: alpha };
            let pair = AngularModel::IndependentPair(w);
            pair.min_moment(1.0 / xi)? / pair.margin_moment(1.0 / xi)?
        };
        Ok(DependenceSummary::new(d(chi), d(1.0), "model2.frechet"))
    } else if xi == 0.0 {
        Ok(DependenceSummary::new(d(0.0), d(1.0), "model2.gumbel"))
    } else {
        let eta = (1.0 - xi * alpha) / (1.0 - 2.0 * xi * alpha);
        Ok(DependenceSummary::new(d(0.0), d(eta), "model2.negweibull"))
    }
}

/// Closed-form exponent function of the generalized Pareto model with uniform angles, `xi > 0`.
pub fn model2_exponent(xi: f64, x1: f64, x2: f64) -> Result<f64> {
    if !(xi > 0.0 && xi.is_finite() && x1 > 0.0 && x2 > 0.0) {
        return Err(invalid("model 2 exponent function needs xi > 0 and positive arguments"));
    }
    let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    Ok(1.0 / lo + pow(lo / hi, xi) / ((2.0 * xi + 1.0) * hi))
}

/// `V(x1, x2) = E[max(W1^a / (E W^a x1), W2^a / (E W^a x2))]` for a regularly
/// varying radial law with index `a`.
pub fn exponent_function(angular: &AngularModel, alpha: f64, x1: f64, x2: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite() && x1 > 0.0 && x2 > 0.0) {
        return Err(invalid("exponent function needs alpha > 0 and positive arguments"));
    }
    let m = angular.margin_moment(alpha)?;
    if !(m.is_finite() && m > 0.0) {
        return Err(invalid("E[W^alpha] must be finite and positive"));
    }
    let (a, b) = (1.0 / (m * x1), 1.0 / (m * x2));
    // E max = E[aU] + E[bV] - E min(aU, bV), U = W1^alpha
    let top = angular.upper();
    let t_max = if top.is_finite() { a.min(b) * pow(top, alpha) } else { f64::INFINITY };
    let inv = 1.0 / alpha;
    let f = |t: f64| angular.joint_survival(pow(t / a, inv), pow(t / b, inv));
    let opts = QuadOptions::rel(1e-11).graded(30);
    let q = if t_max.is_finite() {
        let mut breaks = alloc::vec![0.0, t_max];
        if let Some(p) = angular.norm_profile() {
            for w in [p.zeta, 0.5] {
                let t = a.min(b) * pow(w, alpha);
                if t > 0.0 && t < t_max {
                    breaks.push(t);
                }
            }
            breaks.sort_by(|x, y| x.total_cmp(y));
        }
        integrate_breaks(f, &breaks, opts)
    } else {
        crate::quad::integrate(f, 0.0, t_max, opts)
    };
    let emin = match q {
        Ok(q) => q.value,
        Err(QuadError::NonConvergent { value, abs_err }) => {
            return Err(Error::NonConvergent {
                what: String::from("exponent function"),
                value,
                abs_err,
            })
        }
        Err(QuadError::NonFinite { at }) => return Err(invalid(format!("non-finite integrand at {at}"))),
    };
    Ok(1.0 / x1 + 1.0 / x2 - emin)
}

/// Bounds on `chi(q)` for margins that differ: evaluates the ratio bounds at
/// the smaller and larger of the two marginal `q`-quantiles.
pub fn chi_bounds(
    surv1: &dyn Fn(f64) -> f64,
    surv2: &dyn Fn(f64) -> f64,
    joint: &dyn Fn(f64) -> f64,
    q: f64,
) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("q must lie in (0, 1), got {q}")));
    }
    let p = 1.0 - q;
    let x1 = tail_root(surv1, p)?;
    let x2 = tail_root(surv2, p)?;
    let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    let lower = joint(hi) / surv1(hi).max(surv2(hi));
    let upper = joint(lo) / surv1(lo).min(surv2(lo));
    Ok((lower, upper))
}

// Generalized inverse of a survival function: smallest x with surv(x) <= p.
fn tail_root(surv: &dyn Fn(f64) -> f64, p: f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while surv(hi) > p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(invalid("quantile bracket not found"));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if surv(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Symbolic coefficients of a construction, dispatching on its structure.
pub fn summarize(spec: &ConstructionSpec) -> Result<DependenceSummary> {
    let radial = &spec.radial;
    let angular = &spec.angular;
    if let AngularModel::ComonotonePair(_) = angular {
        return Ok(DependenceSummary::new(d(1.0), d(1.0), "comonotone"));
    }
    if let AngularModel::GaussianCopulaPair { rho, .. } = angular {
        if *rho == 1.0 {
            return Ok(DependenceSummary::new(d(1.0), d(1.0), "comonotone"));
        }
    }
    if let Some(s) = detect_models(spec)? {
        return Ok(s);
    }
    if radial.atom().is_some() {
        return angular_only(angular);
    }
    let r_class = radial
        .tail_class()
        .ok_or_else(|| Error::MappingUndefined(String::from("radial law has no known tail class")))?;
    match angular {
        AngularModel::ConstrainedSphere { profile, .. } => {
            let rt = RadialTail::from_class(&r_class);
            coefficients_constrained(&rt, profile, angular.prob_at_upper(), Some(angular))
        }
        _ => {
            let input = unconstrained_input(spec, r_class)?;
            coefficients_unconstrained(&input)
        }
    }
}

// Radial law degenerate: X has the dependence of W itself.
fn angular_only(angular: &AngularModel) -> Result<DependenceSummary> {
    let (chi, eta) = match angular {
        AngularModel::IndependentPair(_) => (d(0.0), d(0.5)),
        AngularModel::GaussianCopulaPair { rho, .. } => (d(0.0), d((1.0 + rho) / 2.0)),
        AngularModel::ComonotonePair(_) => (d(1.0), d(1.0)),
        AngularModel::ConstrainedSphere { profile, .. } => {
            if profile.zeta < 1.0 {
                (d(0.0), nd())
            } else {
                (unk("degenerate radial law on a sphere with zeta = 1"), unk("degenerate radial law"))
            }
        }
    };
    Ok(DependenceSummary::new(chi, eta, "degenerate-radial"))
}

fn detect_models(spec: &ConstructionSpec) -> Result<Option<DependenceSummary>> {
    use UnivariateModel as U;
    match (&spec.radial, &spec.angular) {
        (U::Gpd { xi, scale }, AngularModel::IndependentPair(U::Beta { a, b })) if a == b && *scale > 0.0 => {
            Ok(Some(coefficients_model2(*xi, *a)?))
        }
        (U::Weibull { shape, .. }, AngularModel::ConstrainedSphere { norm, z: U::Beta { a, b }, .. }) if a == b => {
            match norm.spec() {
                NormSpec::ThetaMix { theta } => Ok(Some(coefficients_model1(*theta, *shape)?)),
                _ => Ok(None),
            }
        }
        _ => Ok(None),
    }
}

fn unconstrained_input(spec: &ConstructionSpec, r_class: TailClass) -> Result<UnconstrainedInput> {
    let angular = &spec.angular;
    let margin = angular.margin().unwrap();
    let w_class = margin
        .tail_class()
        .ok_or_else(|| Error::MappingUndefined(String::from("angular margin has no known tail class")))?;
    let mut input = match angular {
        AngularModel::IndependentPair(_) => UnconstrainedInput::independent(r_class, w_class),
        AngularModel::GaussianCopulaPair { rho, .. } => UnconstrainedInput::gaussian_copula(r_class, w_class, *rho),
        _ => unreachable!("handled by the caller"),
    };
    if let Some(a) = rv_index(&input.r_class).or_else(|| rv_index(&input.w_class)) {
        let mom = |m: Result<f64>| m.ok();
        input.moments = Moments {
            r_alpha: mom(spec.radial.moment(a)),
            w_alpha: mom(angular.margin_moment(a)),
            wmin_alpha: mom(angular.min_moment(a)),
        };
        if input.moments.w_alpha.map(|v| v.is_infinite()).unwrap_or(false) {
            input.moments.wmin_alpha = None;
        }
    }
    Ok(input)
}
