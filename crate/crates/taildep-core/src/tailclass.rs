//! Univariate tail classes, their heaviness order and the catalog of
//! parametric family memberships.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{invalid, Error, Result};
use crate::special::{ln_beta, ln_gamma};

/// Tail class of a univariate law on a right-unbounded or bounded support.
///
/// Survival forms, with `ell` slowly varying:
/// * `RegVarInf`: `ell(x) (log x)^beta x^-alpha`
/// * `ExpTailed`: `F(x + t) / F(x) -> exp(-alpha t)`, optional prefactor index `beta`
/// * `WeibullType`: `ell x^gamma exp(-alpha x^beta)`
/// * `LogWeibullType`: `ell (log x)^gamma exp(-alpha (log x)^beta)`
/// * `NegWeibull`: `F(endpoint - s) = ell s^alpha`
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum TailClass {
    RegVarInf {
        alpha: f64,
        #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
        beta: Option<f64>,
    },
    ExpTailed {
        alpha: f64,
        #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
        beta: Option<f64>,
    },
    ConvEquiv {
        alpha: f64,
    },
    WeibullType {
        alpha: f64,
        beta: f64,
        gamma: f64,
        #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
        ell_limit: Option<f64>,
    },
    LogWeibullType {
        alpha: f64,
        beta: f64,
        gamma: f64,
        #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
        ell_limit: Option<f64>,
    },
    NegWeibull {
        endpoint: f64,
        alpha: f64,
        #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
        ell_limit: Option<f64>,
    },
    /// Gumbel domain of attraction known only abstractly; `None` endpoint is `+inf`.
    GumbelGeneric {
        #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
        endpoint: Option<f64>,
    },
    /// `log X` is heavy tailed; carries the class of `log X`.
    SuperHeavy {
        log_class: Box<TailClass>,
    },
}

/// Outcome of comparing two tails, read as "first argument is ... than the second".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Dominance {
    StrictlyLighter,
    SameScale,
    StrictlyHeavier,
    Incomparable,
}

impl Dominance {
    pub fn flip(self) -> Self {
        match self {
            Dominance::StrictlyLighter => Dominance::StrictlyHeavier,
            Dominance::StrictlyHeavier => Dominance::StrictlyLighter,
            d => d,
        }
    }

    fn from_ord(o: Ordering) -> Self {
        match o {
            Ordering::Less => Dominance::StrictlyLighter,
            Ordering::Equal => Dominance::SameScale,
            Ordering::Greater => Dominance::StrictlyHeavier,
        }
    }
}

/// Maximum domain of attraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mda {
    Frechet { alpha: f64 },
    Gumbel { endpoint: Option<f64> },
    NegWeibull { endpoint: f64, alpha: f64 },
    /// Slowly varying or lighter-than-slow heavy tails with no MDA.
    None,
}

fn finite_pos(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

fn ell_ok(ell: Option<f64>) -> Result<()> {
    match ell {
        Some(l) => finite_pos("ell_limit", l),
        None => Ok(()),
    }
}

impl TailClass {
    pub fn validate(&self) -> Result<()> {
        match self {
            TailClass::RegVarInf { alpha, beta } => {
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    return Err(invalid(format!("alpha must be >= 0, got {alpha}")));
                }
                if let Some(b) = beta {
                    finite("beta", *b)?;
                }
                Ok(())
            }
            TailClass::ExpTailed { alpha, beta } => {
                finite_pos("alpha", *alpha)?;
                if let Some(b) = beta {
                    finite("beta", *b)?;
                }
                Ok(())
            }
            TailClass::ConvEquiv { alpha } => {
                if alpha.is_finite() && *alpha >= 0.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("alpha must be >= 0, got {alpha}")))
                }
            }
            TailClass::WeibullType { alpha, beta, gamma, ell_limit }
            | TailClass::LogWeibullType { alpha, beta, gamma, ell_limit } => {
                finite_pos("alpha", *alpha)?;
                finite_pos("beta", *beta)?;
                finite("gamma", *gamma)?;
                ell_ok(*ell_limit)
            }
            TailClass::NegWeibull { endpoint, alpha, ell_limit } => {
                finite("endpoint", *endpoint)?;
                finite_pos("alpha", *alpha)?;
                ell_ok(*ell_limit)
            }
            TailClass::GumbelGeneric { endpoint } => match endpoint {
                Some(e) => finite("endpoint", *e),
                None => Ok(()),
            },
            TailClass::SuperHeavy { log_class } => {
                log_class.validate()?;
                if log_class.is_heavy() {
                    Ok(())
                } else {
                    Err(invalid("log_class of a super-heavy tail must itself be heavy tailed"))
                }
            }
        }
    }

    /// Heavy tailed in the sense `exp(lambda x) F(x) -> inf` for all `lambda > 0`.
    pub fn is_heavy(&self) -> bool {
        match self {
            TailClass::RegVarInf { .. } | TailClass::LogWeibullType { .. } | TailClass::SuperHeavy { .. } => true,
            TailClass::ConvEquiv { alpha } => *alpha == 0.0,
            TailClass::WeibullType { beta, .. } => *beta < 1.0,
            _ => false,
        }
    }

    /// Right endpoint (`None` for `+inf`).
    pub fn endpoint(&self) -> Option<f64> {
        match self {
            TailClass::NegWeibull { endpoint, .. } => Some(*endpoint),
            TailClass::GumbelGeneric { endpoint } => *endpoint,
            _ => None,
        }
    }

    pub fn mda(&self) -> Mda {
        match self.canonical() {
            Canon::Bounded { endpoint, alpha: Some(a) } => Mda::NegWeibull { endpoint, alpha: a },
            Canon::Bounded { endpoint, alpha: None } => Mda::Gumbel { endpoint: Some(endpoint) },
            Canon::Light { .. } | Canon::CeLight { .. } | Canon::LogLight { .. } | Canon::GumbelInf => {
                Mda::Gumbel { endpoint: None }
            }
            Canon::Rv { alpha, .. } => Mda::Frechet { alpha },
            Canon::CeHeavy => Mda::None,
            Canon::Rv0 { .. } | Canon::Sht(_) => Mda::None,
        }
    }

    /// Super-heavy: slowly varying survival function or heavier.
    pub fn is_super_heavy(&self) -> bool {
        matches!(self.canonical(), Canon::Sht(_) | Canon::Rv0 { .. })
    }

    /// Whether every parameter that pins the tail down to a constant factor is present.
    pub fn is_fully_specified(&self) -> bool {
        match self {
            TailClass::GumbelGeneric { .. } | TailClass::ConvEquiv { .. } => false,
            TailClass::SuperHeavy { log_class } => log_class.is_fully_specified(),
            _ => true,
        }
    }

    fn canonical(&self) -> Canon {
        match self {
            TailClass::RegVarInf { alpha, beta } => {
                if *alpha == 0.0 {
                    Canon::Rv0 { beta: *beta }
                } else {
                    Canon::Rv { alpha: *alpha, beta: *beta }
                }
            }
            TailClass::ExpTailed { alpha, beta } => Canon::Light {
                beta: 1.0,
                alpha: *alpha,
                gamma: *beta,
            },
            TailClass::ConvEquiv { alpha } => {
                if *alpha == 0.0 {
                    Canon::CeHeavy
                } else {
                    Canon::CeLight { alpha: *alpha }
                }
            }
            TailClass::WeibullType { alpha, beta, gamma, .. } => Canon::Light {
                beta: *beta,
                alpha: *alpha,
                gamma: Some(*gamma),
            },
            TailClass::LogWeibullType { alpha, beta, gamma, .. } => {
                if *beta > 1.0 {
                    Canon::LogLight {
                        beta: *beta,
                        alpha: *alpha,
                        gamma: Some(*gamma),
                    }
                } else if *beta == 1.0 {
                    Canon::Rv {
                        alpha: *alpha,
                        beta: Some(*gamma),
                    }
                } else {
                    Canon::Sht(Box::new(TailClass::WeibullType {
                        alpha: *alpha,
                        beta: *beta,
                        gamma: *gamma,
                        ell_limit: None,
                    }))
                }
            }
            TailClass::NegWeibull { endpoint, alpha, .. } => Canon::Bounded {
                endpoint: *endpoint,
                alpha: Some(*alpha),
            },
            TailClass::GumbelGeneric { endpoint } => match endpoint {
                Some(e) => Canon::Bounded {
                    endpoint: *e,
                    alpha: None,
                },
                None => Canon::GumbelInf,
            },
            TailClass::SuperHeavy { log_class } => Canon::Sht(log_class.clone()),
        }
    }
}

// Canonical representative used for the heaviness order.
#[derive(Clone, Debug, PartialEq)]
enum Canon {
    Bounded { endpoint: f64, alpha: Option<f64> },
    Light { beta: f64, alpha: f64, gamma: Option<f64> },
    CeLight { alpha: f64 },
    CeHeavy,
    GumbelInf,
    LogLight { beta: f64, alpha: f64, gamma: Option<f64> },
    Rv { alpha: f64, beta: Option<f64> },
    Rv0 { beta: Option<f64> },
    Sht(Box<TailClass>),
}

impl Canon {
    // Position on the main heaviness chain; `None` for classes handled pairwise.
    fn rank(&self) -> Option<u8> {
        match self {
            Canon::Bounded { .. } => Some(0),
            Canon::Light { .. } => Some(1),
            Canon::LogLight { .. } => Some(2),
            Canon::Rv { .. } => Some(3),
            Canon::Rv0 { .. } | Canon::Sht(_) => Some(4),
            _ => None,
        }
    }
}

/// Prefactor-style comparison: smaller index is lighter.
fn cmp_opt_index(a: Option<f64>, b: Option<f64>) -> Dominance {
    match (a, b) {
        (Some(x), Some(y)) => Dominance::from_ord(x.total_cmp(&y)),
        (None, None) => Dominance::SameScale,
        _ => Dominance::Incomparable,
    }
}

/// "Larger is lighter" comparison.
fn cmp_rate(a: f64, b: f64) -> Option<Dominance> {
    match a.total_cmp(&b) {
        Ordering::Greater => Some(Dominance::StrictlyLighter),
        Ordering::Less => Some(Dominance::StrictlyHeavier),
        Ordering::Equal => None,
    }
}

fn dominates_canon(a: &Canon, b: &Canon) -> Dominance {
    use Canon::*;
    match (a, b) {
        (Bounded { endpoint: e1, alpha: a1 }, Bounded { endpoint: e2, alpha: a2 }) => {
            match e1.total_cmp(e2) {
                Ordering::Less => Dominance::StrictlyLighter,
                Ordering::Greater => Dominance::StrictlyHeavier,
                Ordering::Equal => match (a1, a2) {
                    (Some(x), Some(y)) => cmp_rate(*x, *y).unwrap_or(Dominance::SameScale),
                    _ => Dominance::Incomparable,
                },
            }
        }
        (Light { beta: b1, alpha: a1, gamma: g1 }, Light { beta: b2, alpha: a2, gamma: g2 })
        | (LogLight { beta: b1, alpha: a1, gamma: g1 }, LogLight { beta: b2, alpha: a2, gamma: g2 }) => {
            cmp_rate(*b1, *b2)
                .or_else(|| cmp_rate(*a1, *a2))
                .unwrap_or_else(|| cmp_opt_index(*g1, *g2))
        }
        (Rv { alpha: a1, beta: p1 }, Rv { alpha: a2, beta: p2 }) => {
            cmp_rate(*a1, *a2).unwrap_or_else(|| cmp_opt_index(*p1, *p2))
        }
        (Rv0 { beta: p1 }, Rv0 { beta: p2 }) => cmp_opt_index(*p1, *p2),
        (Sht(c1), Sht(c2)) => dominates(c1, c2),
        (Rv0 { .. }, Sht(_)) | (Sht(_), Rv0 { .. }) => Dominance::Incomparable,

        (GumbelInf, GumbelInf) => Dominance::Incomparable,
        (GumbelInf, Bounded { .. }) => Dominance::StrictlyHeavier,
        (GumbelInf, Rv { .. } | Rv0 { .. } | Sht(_)) => Dominance::StrictlyLighter,
        (GumbelInf, _) => Dominance::Incomparable,

        (CeHeavy, Bounded { .. } | CeLight { .. }) => Dominance::StrictlyHeavier,
        (CeHeavy, Light { beta, .. }) if *beta >= 1.0 => Dominance::StrictlyHeavier,
        (CeHeavy, _) => Dominance::Incomparable,

        (CeLight { alpha: a1 }, CeLight { alpha: a2 }) => cmp_rate(*a1, *a2).unwrap_or(Dominance::Incomparable),
        (CeLight { .. }, Bounded { .. }) => Dominance::StrictlyHeavier,
        (CeLight { alpha }, Light { beta, alpha: a2, gamma }) => {
            if *beta > 1.0 {
                Dominance::StrictlyHeavier
            } else if *beta < 1.0 {
                Dominance::StrictlyLighter
            } else {
                match cmp_rate(*alpha, *a2) {
                    Some(d) => d,
                    None => match gamma {
                        Some(g) if *g > 0.0 => Dominance::StrictlyLighter,
                        _ => Dominance::Incomparable,
                    },
                }
            }
        }
        (CeLight { .. }, LogLight { .. } | Rv { .. } | Rv0 { .. } | Sht(_)) => Dominance::StrictlyLighter,

        (x, y) if x.rank().is_some() && y.rank().is_some() => {
            // Different positions on the main chain.
            Dominance::from_ord(x.rank().cmp(&y.rank()))
        }
        (x, y) => dominates_canon(y, x).flip(),
    }
}

/// Compare the tails of two classes: `StrictlyLighter` means `F_a = o(F_b)`.
///
/// Comparisons work at the resolution of class parameters; slowly varying
/// factors are ignored, so equal parameters give `SameScale`.
pub fn dominates(a: &TailClass, b: &TailClass) -> Dominance {
    dominates_canon(&a.canonical(), &b.canonical())
}

/// Class of the variable under the log/exp correspondence.
///
/// Heavy classes map to the class of `log X`; the light counterparts map
/// back, so the map is an involution on `RegVarInf <-> ExpTailed` and
/// `LogWeibullType <-> WeibullType`. `SuperHeavy` unwraps its log class.
pub fn log_transform(c: &TailClass) -> Result<TailClass> {
    match c {
        TailClass::RegVarInf { alpha, beta } if *alpha > 0.0 => Ok(TailClass::ExpTailed {
            alpha: *alpha,
            beta: *beta,
        }),
        TailClass::ExpTailed { alpha, beta } => Ok(TailClass::RegVarInf {
            alpha: *alpha,
            beta: *beta,
        }),
        TailClass::LogWeibullType { alpha, beta, gamma, ell_limit } => Ok(TailClass::WeibullType {
            alpha: *alpha,
            beta: *beta,
            gamma: *gamma,
            ell_limit: *ell_limit,
        }),
        TailClass::WeibullType { alpha, beta, gamma, ell_limit } => Ok(TailClass::LogWeibullType {
            alpha: *alpha,
            beta: *beta,
            gamma: *gamma,
            ell_limit: *ell_limit,
        }),
        TailClass::SuperHeavy { log_class } => Ok((**log_class).clone()),
        other => Err(Error::MappingUndefined(format!("{other:?}"))),
    }
}

/// Class of `min(W1, W2)` for independent copies of a law in class `c`
/// (the survival function is squared).
pub fn squared_tail(c: &TailClass) -> TailClass {
    let sq = |l: Option<f64>| l.map(|v| v * v);
    match c {
        TailClass::RegVarInf { alpha, beta } => TailClass::RegVarInf {
            alpha: 2.0 * alpha,
            beta: beta.map(|b| 2.0 * b),
        },
        TailClass::ExpTailed { alpha, beta } => TailClass::ExpTailed {
            alpha: 2.0 * alpha,
            beta: beta.map(|b| 2.0 * b),
        },
        TailClass::ConvEquiv { alpha } => {
            if *alpha == 0.0 {
                TailClass::ConvEquiv { alpha: 0.0 }
            } else {
                TailClass::ExpTailed {
                    alpha: 2.0 * alpha,
                    beta: None,
                }
            }
        }
        TailClass::WeibullType { alpha, beta, gamma, ell_limit } => TailClass::WeibullType {
            alpha: 2.0 * alpha,
            beta: *beta,
            gamma: 2.0 * gamma,
            ell_limit: sq(*ell_limit),
        },
        TailClass::LogWeibullType { alpha, beta, gamma, ell_limit } => TailClass::LogWeibullType {
            alpha: 2.0 * alpha,
            beta: *beta,
            gamma: 2.0 * gamma,
            ell_limit: sq(*ell_limit),
        },
        TailClass::NegWeibull { endpoint, alpha, ell_limit } => TailClass::NegWeibull {
            endpoint: *endpoint,
            alpha: 2.0 * alpha,
            ell_limit: sq(*ell_limit),
        },
        TailClass::GumbelGeneric { endpoint } => TailClass::GumbelGeneric { endpoint: *endpoint },
        TailClass::SuperHeavy { log_class } => TailClass::SuperHeavy {
            log_class: Box::new(squared_tail(log_class)),
        },
    }
}

/// Same tail with the rate-type parameter divided by `eta` (`0 < eta <= 1`).
///
/// Used for the minimum of a pair whose log-survival ratio tends to `eta`.
pub fn scaled_rate(c: &TailClass, eta: f64) -> TailClass {
    let k = 1.0 / eta;
    match c {
        TailClass::RegVarInf { alpha, .. } => TailClass::RegVarInf {
            alpha: alpha * k,
            beta: None,
        },
        TailClass::ExpTailed { alpha, .. } => TailClass::ExpTailed {
            alpha: alpha * k,
            beta: None,
        },
        TailClass::ConvEquiv { alpha } => TailClass::ConvEquiv { alpha: alpha * k },
        TailClass::WeibullType { alpha, beta, gamma, .. } => TailClass::WeibullType {
            alpha: alpha * k,
            beta: *beta,
            gamma: *gamma,
            ell_limit: None,
        },
        TailClass::LogWeibullType { alpha, beta, gamma, .. } => TailClass::LogWeibullType {
            alpha: alpha * k,
            beta: *beta,
            gamma: *gamma,
            ell_limit: None,
        },
        TailClass::NegWeibull { endpoint, alpha, .. } => TailClass::NegWeibull {
            endpoint: *endpoint,
            alpha: alpha * k,
            ell_limit: None,
        },
        other => other.clone(),
    }
}

fn normalize_family(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, '-' | '_' | ' '))
        .flat_map(|c| c.to_lowercase())
        .collect()
}

/// Named parameter lookup for catalog families.
pub struct Params<'a>(pub &'a [(&'a str, f64)]);

impl Params<'_> {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    fn req(&self, key: &str) -> Result<f64> {
        self.get(key).ok_or_else(|| invalid(format!("missing parameter `{key}`")))
    }

    fn or(&self, key: &str, default: f64) -> f64 {
        self.get(key).unwrap_or(default)
    }

    fn pos(&self, key: &str, default: Option<f64>) -> Result<f64> {
        let v = match default {
            Some(d) => self.or(key, d),
            None => self.req(key)?,
        };
        finite_pos(key, v)?;
        Ok(v)
    }

    /// Rate from `rate`, or `1 / scl`, defaulting to 1.
    fn rate(&self) -> Result<f64> {
        match (self.get("rate"), self.get("scl")) {
            (Some(_), Some(_)) => Err(invalid("give either `rate` or `scl`, not both")),
            (Some(r), None) => {
                finite_pos("rate", r)?;
                Ok(r)
            }
            (None, Some(s)) => {
                finite_pos("scl", s)?;
                Ok(1.0 / s)
            }
            (None, None) => Ok(1.0),
        }
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Tail-class memberships of a named parametric family.
///
/// Scale parameters enter rates as `1 / scl`.
pub fn classify_parametric(family: &str, params: &[(&str, f64)]) -> Result<Vec<TailClass>> {
    use libm::{exp, pow};
    let p = Params(params);
    let fam = normalize_family(family);
    let wt = |alpha, beta, gamma, ell: Option<f64>| TailClass::WeibullType {
        alpha,
        beta,
        gamma,
        ell_limit: ell,
    };
    let lwt = |alpha, beta, gamma, ell: Option<f64>| TailClass::LogWeibullType {
        alpha,
        beta,
        gamma,
        ell_limit: ell,
    };
    let out = match fam.as_str() {
        "normal" | "gaussian" => {
            let loc = p.or("loc", 0.0);
            finite("loc", loc)?;
            let s = p.pos("scl", Some(1.0))?;
            let ell = if loc == 0.0 {
                Some(s * exp(-LN_SQRT_2PI))
            } else {
                None
            };
            vec![wt(0.5 / (s * s), 2.0, -1.0, ell)]
        }
        "lognormal" => {
            let mu = p.or("loc", 0.0);
            finite("loc", mu)?;
            let s = p.pos("scl", Some(1.0))?;
            let ell = if mu == 0.0 {
                Some(s * exp(-LN_SQRT_2PI))
            } else {
                None
            };
            vec![lwt(0.5 / (s * s), 2.0, -1.0, ell)]
        }
        "exponential" | "exp" => {
            let r = p.rate()?;
            vec![wt(r, 1.0, 0.0, Some(1.0)), TailClass::ExpTailed { alpha: r, beta: Some(0.0) }]
        }
        "gamma" => {
            let k = p.pos("shp", None)?;
            let r = p.rate()?;
            let ell = exp((k - 1.0) * libm::log(r) - ln_gamma(k));
            vec![
                wt(r, 1.0, k - 1.0, Some(ell)),
                TailClass::ExpTailed {
                    alpha: r,
                    beta: Some(k - 1.0),
                },
            ]
        }
        "inversenormal" | "inversegaussian" | "wald" => {
            let mean = p.pos("mean", Some(1.0))?;
            let shp = p.pos("shp", None)?;
            let a = shp / (2.0 * mean * mean);
            vec![
                wt(a, 1.0, -1.5, None),
                TailClass::ExpTailed { alpha: a, beta: Some(-1.5) },
                TailClass::ConvEquiv { alpha: a },
            ]
        }
        "logistic" => {
            let loc = p.or("loc", 0.0);
            finite("loc", loc)?;
            let s = p.pos("scl", Some(1.0))?;
            vec![
                wt(1.0 / s, 1.0, 0.0, Some(exp(loc / s))),
                TailClass::ExpTailed {
                    alpha: 1.0 / s,
                    beta: Some(0.0),
                },
            ]
        }
        "loglogistic" => {
            let k = p.pos("shp", None)?;
            let s = p.pos("scl", Some(1.0))?;
            vec![
                lwt(k, 1.0, 0.0, Some(pow(s, k))),
                TailClass::RegVarInf { alpha: k, beta: Some(0.0) },
            ]
        }
        "gumbel" => {
            let loc = p.or("loc", 0.0);
            finite("loc", loc)?;
            let s = p.pos("scl", Some(1.0))?;
            vec![
                wt(1.0 / s, 1.0, 0.0, Some(exp(loc / s))),
                TailClass::ExpTailed {
                    alpha: 1.0 / s,
                    beta: Some(0.0),
                },
            ]
        }
        "weibull" => {
            let k = p.pos("shp", None)?;
            let s = p.pos("scl", Some(1.0))?;
            let mut v = vec![wt(pow(s, -k), k, 0.0, Some(1.0))];
            if k == 1.0 {
                v.push(TailClass::ExpTailed {
                    alpha: 1.0 / s,
                    beta: Some(0.0),
                });
            }
            v
        }
        "t" | "student" | "studentt" => {
            let nu = p.pos("shp", None)?;
            vec![lwt(nu, 1.0, 0.0, None), TailClass::RegVarInf { alpha: nu, beta: Some(0.0) }]
        }
        "pareto" => {
            let a = p.pos("shp", None)?;
            let s = p.pos("scl", Some(1.0))?;
            vec![
                lwt(a, 1.0, 0.0, Some(pow(s, a))),
                TailClass::RegVarInf { alpha: a, beta: Some(0.0) },
            ]
        }
        "frechet" => {
            let a = p.pos("shp", None)?;
            let s = p.pos("scl", Some(1.0))?;
            vec![
                lwt(a, 1.0, 0.0, Some(pow(s, a))),
                TailClass::RegVarInf { alpha: a, beta: Some(0.0) },
            ]
        }
        "stable" => {
            let a = p.pos("shp", None)?;
            if a > 2.0 {
                return Err(invalid("stability parameter `shp` must lie in (0, 2]"));
            }
            let s = p.pos("scl", Some(1.0))?;
            if a == 2.0 {
                vec![wt(0.25 / (s * s), 2.0, -1.0, None)]
            } else {
                vec![lwt(a, 1.0, 0.0, None), TailClass::RegVarInf { alpha: a, beta: Some(0.0) }]
            }
        }
        "f" | "fisher" => {
            let _ = p.pos("shp1", None)?;
            let d2 = p.pos("shp2", None)?;
            vec![TailClass::RegVarInf {
                alpha: 0.5 * d2,
                beta: Some(0.0),
            }]
        }
        "uniform" => {
            let lo = p.or("lo", 0.0);
            let hi = p.or("hi", 1.0);
            finite("lo", lo)?;
            finite("hi", hi)?;
            if !(hi > lo) {
                return Err(invalid("uniform requires hi > lo"));
            }
            vec![TailClass::NegWeibull {
                endpoint: hi,
                alpha: 1.0,
                ell_limit: Some(1.0 / (hi - lo)),
            }]
        }
        "beta" => {
            let a = p.pos("shp1", None)?;
            let b = p.pos("shp2", None)?;
            vec![TailClass::NegWeibull {
                endpoint: 1.0,
                alpha: b,
                ell_limit: Some(exp(-ln_beta(a, b)) / b),
            }]
        }
        "triangular" => {
            let lo = p.or("lo", 0.0);
            let hi = p.or("hi", 1.0);
            let mode = p.or("mode", 0.5 * (lo + hi));
            if !(hi > lo && mode >= lo && mode <= hi) {
                return Err(invalid("triangular requires lo <= mode <= hi, lo < hi"));
            }
            let (alpha, ell) = if mode < hi {
                (2.0, 1.0 / ((hi - lo) * (hi - mode)))
            } else {
                (1.0, 2.0 / (hi - lo))
            };
            vec![TailClass::NegWeibull {
                endpoint: hi,
                alpha,
                ell_limit: Some(ell),
            }]
        }
        "gev" => {
            let xi = p.req("shp")?;
            finite("shp", xi)?;
            let loc = p.or("loc", 0.0);
            finite("loc", loc)?;
            let s = p.pos("scl", Some(1.0))?;
            if xi < 0.0 {
                vec![TailClass::NegWeibull {
                    endpoint: loc - s / xi,
                    alpha: -1.0 / xi,
                    ell_limit: Some(pow(-xi / s, -1.0 / xi)),
                }]
            } else if xi == 0.0 {
                vec![
                    wt(1.0 / s, 1.0, 0.0, Some(exp(loc / s))),
                    TailClass::ExpTailed {
                        alpha: 1.0 / s,
                        beta: Some(0.0),
                    },
                ]
            } else {
                let a = 1.0 / xi;
                vec![
                    lwt(a, 1.0, 0.0, Some(pow(s / xi, a))),
                    TailClass::RegVarInf { alpha: a, beta: Some(0.0) },
                ]
            }
        }
        _ => return Err(Error::UnknownFamily(String::from(family))),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wt(alpha: f64, beta: f64) -> TailClass {
        TailClass::WeibullType {
            alpha,
            beta,
            gamma: 0.0,
            ell_limit: None,
        }
    }

    #[test]
    fn heaviness_chain() {
        let chain = [
            TailClass::NegWeibull {
                endpoint: 1.0,
                alpha: 1.0,
                ell_limit: None,
            },
            wt(1.0, 2.0),
            TailClass::ExpTailed {
                alpha: 2.0,
                beta: Some(0.0),
            },
            TailClass::ExpTailed {
                alpha: 1.0,
                beta: Some(0.0),
            },
            wt(1.0, 0.5),
            TailClass::LogWeibullType {
                alpha: 1.0,
                beta: 2.0,
                gamma: 0.0,
                ell_limit: None,
            },
            TailClass::RegVarInf { alpha: 2.0, beta: None },
            TailClass::RegVarInf { alpha: 1.0, beta: None },
            TailClass::SuperHeavy {
                log_class: Box::new(TailClass::RegVarInf { alpha: 1.0, beta: None }),
            },
        ];
        for i in 0..chain.len() {
            for j in 0..chain.len() {
                let d = dominates(&chain[i], &chain[j]);
                let want = Dominance::from_ord(i.cmp(&j));
                assert_eq!(d, want, "{i} vs {j}");
            }
        }
    }

    #[test]
    fn gumbel_generic_pairs_are_incomparable() {
        let g = TailClass::GumbelGeneric { endpoint: None };
        assert_eq!(dominates(&g, &g), Dominance::Incomparable);
        assert_eq!(
            dominates(&g, &TailClass::RegVarInf { alpha: 3.0, beta: None }),
            Dominance::StrictlyLighter
        );
    }

    #[test]
    fn weibull_shape_one_matches_exponential() {
        let s = 2.5;
        let w = classify_parametric("weibull", &[("shp", 1.0), ("scl", s)]).unwrap();
        let e = classify_parametric("exponential", &[("rate", 1.0 / s)]).unwrap();
        assert_eq!(dominates(&w[0], &e[0]), Dominance::SameScale);
        assert_eq!(dominates(&w[1], &e[1]), Dominance::SameScale);
        assert_eq!(dominates(&w[0], &e[1]), Dominance::SameScale);
    }

    #[test]
    fn catalog_examples() {
        let p = classify_parametric("Pareto", &[("shp", 3.0)]).unwrap();
        assert!(p.contains(&TailClass::RegVarInf {
            alpha: 3.0,
            beta: Some(0.0)
        }));
        assert!(p.iter().any(|c| matches!(c, TailClass::LogWeibullType { beta, .. } if *beta == 1.0)));
        let u = classify_parametric("uniform", &[]).unwrap();
        assert_eq!(
            u,
            vec![TailClass::NegWeibull {
                endpoint: 1.0,
                alpha: 1.0,
                ell_limit: Some(1.0)
            }]
        );
        let g = classify_parametric("GEV", &[("shp", 0.0), ("scl", 1.0)]).unwrap();
        assert!(matches!(g[0], TailClass::WeibullType { beta, .. } if beta == 1.0));
        assert!(matches!(g[1], TailClass::ExpTailed { alpha, .. } if alpha == 1.0));
        let g = classify_parametric("gev", &[("shp", -0.5)]).unwrap();
        assert!(matches!(g[0], TailClass::NegWeibull { alpha, endpoint, .. } if alpha == 2.0 && endpoint == 2.0));
        assert!(matches!(classify_parametric("nope", &[]), Err(Error::UnknownFamily(_))));
        assert!(matches!(
            classify_parametric("weibull", &[("shp", -1.0)]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn log_transform_pairs() {
        let rv = TailClass::RegVarInf {
            alpha: 2.0,
            beta: Some(1.0),
        };
        let et = log_transform(&rv).unwrap();
        assert_eq!(
            et,
            TailClass::ExpTailed {
                alpha: 2.0,
                beta: Some(1.0)
            }
        );
        assert_eq!(log_transform(&et).unwrap(), rv);
        let nw = TailClass::NegWeibull {
            endpoint: 1.0,
            alpha: 1.0,
            ell_limit: None,
        };
        assert!(matches!(log_transform(&nw), Err(Error::MappingUndefined(_))));
    }
}
