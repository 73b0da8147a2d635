//! Univariate laws, angular laws and the radial-angular construction
//! `X = R * W`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use libm::{exp, expm1, fabs, log, log1p, pow, sqrt};

use crate::error::{invalid, Error, Result};
use crate::normgeom::{self, Norm, NormProfile, NormSpec};
use crate::quad::{integrate, integrate_breaks, integrate_scan, QuadError, QuadOptions, Quadrature};
use crate::special::{beta_inc, beta_inc_upper, gamma_inc, ln_beta, ln_gamma, norm_cdf, norm_isf, norm_pdf, norm_ppf, norm_sf};
use rand_core::RngCore;
use crate::tailclass::TailClass;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Archimedean generator `psi`; the radial law has survival
/// `psi(r) - r psi'(r)`.
#[derive(Clone)]
pub enum Generator {
    /// `psi(x) = exp(-x^theta)`, `0 < theta <= 1`.
    Gumbel { theta: f64 },
    /// `psi(x) = (1 + theta x)^(-1/theta)`, `theta > 0`.
    Clayton { theta: f64 },
    Custom { psi: ScalarFn, dpsi: ScalarFn },
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Gumbel { theta } => write!(f, "Gumbel {{ theta: {theta} }}"),
            Generator::Clayton { theta } => write!(f, "Clayton {{ theta: {theta} }}"),
            Generator::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl Generator {
    fn survival(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        match self {
            Generator::Gumbel { theta } => {
                let t = pow(r, *theta);
                exp(-t) * (1.0 + theta * t)
            }
            Generator::Clayton { theta } => {
                let b = 1.0 + theta * r;
                pow(b, -1.0 / theta - 1.0) * (b + r)
            }
            Generator::Custom { psi, dpsi } => psi(r) - r * dpsi(r),
        }
    }
}

/// A univariate law with survival function, inverse survival and (where it
/// exists) a density.
#[derive(Clone, Debug)]
pub enum UnivariateModel {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Normal { loc: f64, scale: f64 },
    Gumbel { loc: f64, scale: f64 },
    Logistic { loc: f64, scale: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Pareto { shape: f64, scale: f64 },
    Frechet { shape: f64, scale: f64 },
    LogLogistic { shape: f64, scale: f64 },
    /// Generalized Pareto with location 0: survival `(1 + xi x / scale)^(-1/xi)`.
    Gpd { xi: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
    Beta { a: f64, b: f64 },
    Degenerate { value: f64 },
    /// Symmetric law on `(0, 1)` whose pair `(Z, 1 - Z)` is the spectral
    /// measure of the logistic extreme-value model, `0 < theta < 1`.
    LogisticSpectral { theta: f64 },
    Archimedean(Generator),
    /// The law conditioned on `(0, inf)`.
    PositivePart(Box<UnivariateModel>),
}

fn pos(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn fin(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

impl UnivariateModel {
    pub fn validate(&self) -> Result<()> {
        use UnivariateModel::*;
        match self {
            Exponential { rate } => pos("rate", *rate),
            Gamma { shape, rate } => pos("shape", *shape).and(pos("rate", *rate)),
            Weibull { shape, scale } | Pareto { shape, scale } | Frechet { shape, scale } | LogLogistic { shape, scale } => {
                pos("shape", *shape).and(pos("scale", *scale))
            }
            Normal { loc, scale } | Gumbel { loc, scale } | Logistic { loc, scale } => {
                fin("loc", *loc).and(pos("scale", *scale))
            }
            LogNormal { mu, sigma } => fin("mu", *mu).and(pos("sigma", *sigma)),
            Gpd { xi, scale } => fin("xi", *xi).and(pos("scale", *scale)),
            Uniform { lo, hi } => {
                fin("lo", *lo)?;
                fin("hi", *hi)?;
                if hi > lo {
                    Ok(())
                } else {
                    Err(invalid("uniform requires hi > lo"))
                }
            }
            Beta { a, b } => pos("a", *a).and(pos("b", *b)),
            Degenerate { value } => fin("value", *value),
            LogisticSpectral { theta } => {
                if theta.is_finite() && *theta > 0.0 && *theta < 1.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("theta must lie in (0, 1), got {theta}")))
                }
            }
            Archimedean(g) => match g {
                Generator::Gumbel { theta } => {
                    if theta.is_finite() && *theta > 0.0 && *theta <= 1.0 {
                        Ok(())
                    } else {
                        Err(invalid(format!("Gumbel generator requires 0 < theta <= 1, got {theta}")))
                    }
                }
                Generator::Clayton { theta } => pos("theta", *theta),
                Generator::Custom { psi, dpsi } => {
                    if fabs(psi(0.0) - 1.0) > 1e-9 {
                        return Err(invalid("generator must satisfy psi(0) = 1"));
                    }
                    let mut prev = 1.0;
                    for i in 0..=60 {
                        let r = pow(10.0, -3.0 + 0.1 * i as f64);
                        let s = g.survival(r);
                        if !(s.is_finite() && (-1e-12..=1.0 + 1e-12).contains(&s)) || s > prev + 1e-12 {
                            return Err(invalid(format!("generator does not yield a survival function near r = {r}")));
                        }
                        prev = s;
                        if i % 10 == 5 {
                            let h = 1e-5 * r;
                            let fd = (psi(r + h) - psi(r - h)) / (2.0 * h);
                            let d = dpsi(r);
                            if fabs(fd - d) > 1e-4 * fabs(d).max(1e-8) {
                                return Err(invalid(format!("generator derivative disagrees with psi at r = {r}")));
                            }
                        }
                    }
                    Ok(())
                }
            },
            PositivePart(base) => {
                base.validate()?;
                if base.survival(0.0) > 0.0 {
                    Ok(())
                } else {
                    Err(invalid("law has no mass on (0, inf)"))
                }
            }
        }
    }

    /// Support `[lo, hi]` (bounds may be infinite).
    pub fn support(&self) -> (f64, f64) {
        use UnivariateModel::*;
        let inf = f64::INFINITY;
        match self {
            Exponential { .. } | Gamma { .. } | Weibull { .. } | LogNormal { .. } | Frechet { .. } | LogLogistic { .. } => {
                (0.0, inf)
            }
            Archimedean(_) => (0.0, inf),
            Normal { .. } | Gumbel { .. } | Logistic { .. } => (-inf, inf),
            Pareto { scale, .. } => (*scale, inf),
            Gpd { xi, scale } => {
                if *xi < 0.0 {
                    (0.0, -scale / xi)
                } else {
                    (0.0, inf)
                }
            }
            Uniform { lo, hi } => (*lo, *hi),
            Beta { .. } | LogisticSpectral { .. } => (0.0, 1.0),
            Degenerate { value } => (*value, *value),
            PositivePart(base) => (base.support().0.max(0.0), base.support().1),
        }
    }

    pub fn atom(&self) -> Option<f64> {
        match self {
            UnivariateModel::Degenerate { value } => Some(*value),
            _ => None,
        }
    }

    /// `P(X > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        use UnivariateModel::*;
        let (lo, hi) = self.support();
        if x >= hi {
            return 0.0;
        }
        if x < lo {
            return 1.0;
        }
        match self {
            Exponential { rate } => exp(-rate * x),
            Gamma { shape, rate } => gamma_inc(*shape, rate * x).1,
            Weibull { shape, scale } => exp(-pow(x / scale, *shape)),
            Normal { loc, scale } => norm_sf((x - loc) / scale),
            Gumbel { loc, scale } => -expm1(-exp(-(x - loc) / scale)),
            Logistic { loc, scale } => {
                let t = (x - loc) / scale;
                if t > 0.0 {
                    let e = exp(-t);
                    e / (1.0 + e)
                } else {
                    1.0 / (1.0 + exp(t))
                }
            }
            LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    norm_sf((log(x) - mu) / sigma)
                }
            }
            Pareto { shape, scale } => pow(x / scale, -shape),
            Frechet { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    -expm1(-pow(x / scale, -shape))
                }
            }
            LogLogistic { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    let t = pow(x / scale, -shape);
                    t / (1.0 + t)
                }
            }
            Gpd { xi, scale } => gpd_survival(*xi, *scale, x),
            Uniform { lo, hi } => (hi - x) / (hi - lo),
            Beta { a, b } => beta_inc_upper(*a, *b, x),
            Degenerate { .. } => 0.0,
            LogisticSpectral { theta } => {
                if x >= 0.5 {
                    spectral_cdf(*theta, 1.0 - x)
                } else {
                    1.0 - spectral_cdf(*theta, x)
                }
            }
            Archimedean(g) => g.survival(x),
            PositivePart(base) => base.survival(x.max(0.0)) / base.survival(0.0),
        }
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        use UnivariateModel::*;
        let (lo, hi) = self.support();
        if x >= hi {
            return 1.0;
        }
        if x < lo {
            return 0.0;
        }
        match self {
            Normal { loc, scale } => norm_cdf((x - loc) / scale),
            Beta { a, b } => beta_inc(*a, *b, x),
            LogisticSpectral { theta } => spectral_cdf(*theta, x),
            Gamma { shape, rate } => gamma_inc(*shape, rate * x).0,
            Exponential { rate } => -expm1(-rate * x),
            Weibull { shape, scale } => -expm1(-pow(x / scale, *shape)),
            Uniform { lo, hi } => (x - lo) / (hi - lo),
            _ => 1.0 - self.survival(x),
        }
    }

    pub fn density(&self, x: f64) -> Option<f64> {
        use UnivariateModel::*;
        let (lo, hi) = self.support();
        if matches!(self, Degenerate { .. } | Archimedean(_)) {
            return None;
        }
        if x < lo || x > hi {
            return Some(0.0);
        }
        let d = match self {
            Exponential { rate } => rate * exp(-rate * x),
            Gamma { shape, rate } => {
                if x == 0.0 {
                    return Some(if *shape < 1.0 {
                        f64::INFINITY
                    } else if *shape == 1.0 {
                        *rate
                    } else {
                        0.0
                    });
                }
                exp(shape * log(*rate) + (shape - 1.0) * log(x) - rate * x - ln_gamma(*shape))
            }
            Weibull { shape, scale } => {
                let t = x / scale;
                shape / scale * pow(t, shape - 1.0) * exp(-pow(t, *shape))
            }
            Normal { loc, scale } => norm_pdf((x - loc) / scale) / scale,
            Gumbel { loc, scale } => {
                let t = (x - loc) / scale;
                exp(-t - exp(-t)) / scale
            }
            Logistic { loc, scale } => {
                let t = -fabs((x - loc) / scale);
                let e = exp(t);
                e / (scale * (1.0 + e) * (1.0 + e))
            }
            LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    norm_pdf((log(x) - mu) / sigma) / (sigma * x)
                }
            }
            Pareto { shape, scale } => shape / scale * pow(x / scale, -shape - 1.0),
            Frechet { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let t = pow(x / scale, -shape);
                    shape / x * t * exp(-t)
                }
            }
            LogLogistic { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let t = pow(x / scale, *shape);
                    shape / x * t / ((1.0 + t) * (1.0 + t))
                }
            }
            Gpd { xi, scale } => {
                let s = gpd_survival(*xi, *scale, x);
                if *xi == 0.0 {
                    s / scale
                } else {
                    let base = 1.0 + xi * x / scale;
                    if base <= 0.0 {
                        0.0
                    } else {
                        s / (scale * base)
                    }
                }
            }
            Uniform { lo, hi } => 1.0 / (hi - lo),
            Beta { a, b } => {
                if x <= 0.0 || x >= 1.0 {
                    let edge_a = if x <= 0.0 { *a } else { *b };
                    return Some(if edge_a < 1.0 {
                        f64::INFINITY
                    } else if edge_a == 1.0 {
                        exp(-ln_beta(*a, *b))
                    } else {
                        0.0
                    });
                }
                exp((a - 1.0) * log(x) + (b - 1.0) * log1p(-x) - ln_beta(*a, *b))
            }
            LogisticSpectral { theta } => spectral_density(*theta, x),
            PositivePart(base) => return base.density(x).map(|d| d / base.survival(0.0)),
            Degenerate { .. } | Archimedean(_) => unreachable!(),
        };
        Some(d)
    }

    /// Inverse survival: `x` with `P(X > x) = p`.
    pub fn isf(&self, p: f64) -> f64 {
        use UnivariateModel::*;
        let (lo, hi) = self.support();
        if p >= 1.0 {
            return lo;
        }
        if p <= 0.0 {
            return hi;
        }
        match self {
            Exponential { rate } => -log(p) / rate,
            Weibull { shape, scale } => scale * pow(-log(p), 1.0 / shape),
            Normal { loc, scale } => loc + scale * norm_isf(p),
            Gumbel { loc, scale } => loc - scale * log(-log1p(-p)),
            Logistic { loc, scale } => loc + scale * (log1p(-p) - log(p)),
            LogNormal { mu, sigma } => exp(mu + sigma * norm_isf(p)),
            Pareto { shape, scale } => scale * pow(p, -1.0 / shape),
            Frechet { shape, scale } => scale * pow(-log1p(-p), -1.0 / shape),
            LogLogistic { shape, scale } => scale * pow(p / (1.0 - p), -1.0 / shape),
            Gpd { xi, scale } => {
                if *xi == 0.0 {
                    -scale * log(p)
                } else {
                    scale * expm1(-xi * log(p)) / xi
                }
            }
            Uniform { lo, hi } => hi - p * (hi - lo),
            Beta { a, b } if *a == 1.0 && *b == 1.0 => 1.0 - p,
            Degenerate { value } => *value,
            PositivePart(base) => base.isf(p * base.survival(0.0)),
            _ => self.invert_tail(p, true),
        }
    }

    /// `x` with `P(X <= x) = u`; uses the upper tail for `u > 1/2`.
    pub fn quantile(&self, u: f64) -> f64 {
        use UnivariateModel::*;
        if u > 0.5 {
            return self.isf(1.0 - u);
        }
        let (lo, hi) = self.support();
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 {
            return hi;
        }
        match self {
            Exponential { rate } => -log1p(-u) / rate,
            Weibull { shape, scale } => scale * pow(-log1p(-u), 1.0 / shape),
            Normal { loc, scale } => loc + scale * norm_ppf(u),
            LogNormal { mu, sigma } => exp(mu + sigma * norm_ppf(u)),
            Uniform { lo, hi } => lo + u * (hi - lo),
            Beta { a, b } if *a == 1.0 && *b == 1.0 => u,
            Beta { .. } | Gamma { .. } | LogisticSpectral { .. } | Archimedean(_) => self.invert_tail(u, false),
            _ => self.isf(1.0 - u),
        }
    }

    // Safeguarded Newton on the log tail probability, bisection fallback.
    // `upper` selects the survival side, otherwise the cdf side.
    fn invert_tail(&self, p: f64, upper: bool) -> f64 {
        let (lo, hi) = self.support();
        let target = log(p);
        let tail = |x: f64| if upper { self.survival(x) } else { self.cdf(x) };
        // g is increasing in x
        let g = |x: f64| {
            let v = log(tail(x)) - target;
            if upper {
                -v
            } else {
                v
            }
        };
        let mut a = if lo.is_finite() { lo } else { -1.0 };
        while lo.is_infinite() && g(a) > 0.0 {
            a *= 2.0;
        }
        let mut b = if hi.is_finite() {
            hi
        } else {
            let mut b = a.abs().max(1.0);
            while g(b) < 0.0 && b < 1e300 {
                b *= 2.0;
            }
            b
        };
        let mut x = 0.5 * (a + b);
        for _ in 0..400 {
            let gx = g(x);
            if gx == 0.0 {
                return x;
            }
            if gx < 0.0 {
                a = x;
            } else {
                b = x;
            }
            let mut next = 0.5 * (a + b);
            if let Some(d) = self.density(x) {
                let slope = d / tail(x);
                if slope.is_finite() && slope > 0.0 {
                    let newton = x - gx / slope;
                    if newton > a && newton < b {
                        next = newton;
                    }
                }
            }
            if fabs(next - x) <= f64::EPSILON * fabs(x).max(1e-300) || b - a <= f64::EPSILON * fabs(a).max(fabs(b)) {
                return next;
            }
            x = next;
        }
        x
    }

    /// Principal tail class, when it is determined by the family.
    pub fn tail_class(&self) -> Option<TailClass> {
        use UnivariateModel::*;
        let wt = |alpha: f64, beta: f64, gamma: f64, ell: Option<f64>| TailClass::WeibullType {
            alpha,
            beta,
            gamma,
            ell_limit: ell,
        };
        let c = match self {
            Exponential { rate } => wt(*rate, 1.0, 0.0, Some(1.0)),
            Gamma { shape, rate } => wt(
                *rate,
                1.0,
                shape - 1.0,
                Some(exp((shape - 1.0) * log(*rate) - ln_gamma(*shape))),
            ),
            Weibull { shape, scale } => wt(pow(*scale, -shape), *shape, 0.0, Some(1.0)),
            Normal { loc, scale } => {
                let ell = if *loc == 0.0 {
                    Some(scale / sqrt(2.0 * core::f64::consts::PI))
                } else {
                    None
                };
                wt(0.5 / (scale * scale), 2.0, -1.0, ell)
            }
            Gumbel { loc, scale } | Logistic { loc, scale } => wt(1.0 / scale, 1.0, 0.0, Some(exp(loc / scale))),
            LogNormal { mu, sigma } => TailClass::LogWeibullType {
                alpha: 0.5 / (sigma * sigma),
                beta: 2.0,
                gamma: -1.0,
                ell_limit: if *mu == 0.0 {
                    Some(sigma / sqrt(2.0 * core::f64::consts::PI))
                } else {
                    None
                },
            },
            Pareto { shape, .. } | Frechet { shape, .. } | LogLogistic { shape, .. } => TailClass::RegVarInf {
                alpha: *shape,
                beta: Some(0.0),
            },
            Gpd { xi, scale } => {
                if *xi > 0.0 {
                    TailClass::RegVarInf {
                        alpha: 1.0 / xi,
                        beta: Some(0.0),
                    }
                } else if *xi == 0.0 {
                    wt(1.0 / scale, 1.0, 0.0, Some(1.0))
                } else {
                    TailClass::NegWeibull {
                        endpoint: -scale / xi,
                        alpha: -1.0 / xi,
                        ell_limit: Some(pow(-xi / scale, -1.0 / xi)),
                    }
                }
            }
            Uniform { lo, hi } => TailClass::NegWeibull {
                endpoint: *hi,
                alpha: 1.0,
                ell_limit: Some(1.0 / (hi - lo)),
            },
            Beta { a, b } => TailClass::NegWeibull {
                endpoint: 1.0,
                alpha: *b,
                ell_limit: Some(exp(-ln_beta(*a, *b)) / b),
            },
            LogisticSpectral { theta } => TailClass::NegWeibull {
                endpoint: 1.0,
                alpha: 1.0 / theta - 1.0,
                ell_limit: None,
            },
            Degenerate { .. } => return None,
            Archimedean(Generator::Gumbel { theta }) => wt(1.0, *theta, *theta, Some(*theta)),
            Archimedean(Generator::Clayton { theta }) => TailClass::RegVarInf {
                alpha: 1.0 / theta,
                beta: Some(0.0),
            },
            Archimedean(Generator::Custom { .. }) => return None,
            PositivePart(base) => {
                let s0 = base.survival(0.0);
                return base.tail_class().map(|c| scale_ell(c, 1.0 / s0));
            }
        };
        Some(c)
    }

    /// Hazard rate `f(x) / P(X > x)`, the auxiliary function of a Gumbel-domain law.
    pub fn hazard(&self, x: f64) -> Option<f64> {
        use UnivariateModel::*;
        match self {
            Exponential { rate } => Some(*rate),
            Weibull { shape, scale } => Some(shape / scale * pow(x / scale, shape - 1.0)),
            Gpd { xi, scale } => Some(1.0 / (scale + xi * x)),
            _ => {
                let d = self.density(x)?;
                let s = self.survival(x);
                if s > 0.0 {
                    Some(d / s)
                } else {
                    None
                }
            }
        }
    }

    /// Finite `E[X^p]` exponent bound: `Some(a)` means moments of order `< a`
    /// exist and of order `> a` do not.
    pub fn moment_index(&self) -> f64 {
        match self.tail_class() {
            Some(TailClass::RegVarInf { alpha, .. }) => alpha,
            _ => f64::INFINITY,
        }
    }

    /// `P(X >= x)`.
    pub fn survival_ge(&self, x: f64) -> f64 {
        match self.atom() {
            Some(v) => {
                if x <= v {
                    1.0
                } else {
                    0.0
                }
            }
            None => self.survival(x),
        }
    }

    /// One draw by inversion of the upper tail.
    pub fn sample<G: RngCore + ?Sized>(&self, rng: &mut G) -> f64 {
        self.isf(uniform(rng))
    }

    /// `E[X^p]` for `p >= 0` and a law on `[0, inf)`; `inf` when the moment diverges.
    pub fn moment(&self, p: f64) -> Result<f64> {
        use core::f64::consts::PI;
        use UnivariateModel::*;
        if !(p.is_finite() && p >= 0.0) {
            return Err(invalid(format!("moment order must be finite and >= 0, got {p}")));
        }
        if p == 0.0 {
            return Ok(1.0);
        }
        let (lo, hi) = self.support();
        if lo < 0.0 {
            return Err(invalid("power moments need a law on [0, inf)"));
        }
        if p >= self.moment_index() {
            return Ok(f64::INFINITY);
        }
        let v = match self {
            Exponential { rate } => exp(ln_gamma(1.0 + p)) / pow(*rate, p),
            Gamma { shape, rate } => exp(ln_gamma(shape + p) - ln_gamma(*shape)) / pow(*rate, p),
            Weibull { shape, scale } => pow(*scale, p) * exp(ln_gamma(1.0 + p / shape)),
            LogNormal { mu, sigma } => exp(p * mu + 0.5 * p * p * sigma * sigma),
            Pareto { shape, scale } => shape * pow(*scale, p) / (shape - p),
            Frechet { shape, scale } => pow(*scale, p) * exp(ln_gamma(1.0 - p / shape)),
            LogLogistic { shape, scale } => {
                let t = PI * p / shape;
                pow(*scale, p) * t / libm::sin(t)
            }
            Uniform { lo, hi } => (pow(*hi, p + 1.0) - pow(*lo, p + 1.0)) / ((p + 1.0) * (hi - lo)),
            Beta { a, b } => exp(ln_beta(a + p, *b) - ln_beta(*a, *b)),
            Degenerate { value } => pow(*value, p),
            _ => {
                // E X^p = lo^p + int_lo^hi p x^(p-1) P(X > x) dx
                let f = |x: f64| {
                    if x <= 0.0 {
                        return if p < 1.0 { 0.0 } else { p * pow(x, p - 1.0) };
                    }
                    p * exp((p - 1.0) * log(x)) * self.survival(x)
                };
                let opts = QuadOptions::rel(1e-10).graded(GRADE);
                let base = if lo > 0.0 { pow(lo, p) } else { 0.0 };
                return match integrate(f, lo, hi, opts) {
                    Ok(q) if q.abs_err <= 1e-8 * q.value.abs().max(1e-300) => Ok(base + q.value),
                    Ok(q) => Err(nonconvergent("moment", base + q.value, q.abs_err)),
                    Err(QuadError::NonConvergent { value, abs_err }) => Err(nonconvergent("moment", base + value, abs_err)),
                    Err(QuadError::NonFinite { at }) => Err(nonconvergent("moment", f64::NAN, at)),
                };
            }
        };
        Ok(v)
    }
}

/// Uniform draw on `(0, 1)` from the top 53 bits, never 0 or 1.
pub fn uniform<G: RngCore + ?Sized>(rng: &mut G) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

fn scale_ell(c: TailClass, k: f64) -> TailClass {
    match c {
        TailClass::WeibullType { alpha, beta, gamma, ell_limit } => TailClass::WeibullType {
            alpha,
            beta,
            gamma,
            ell_limit: ell_limit.map(|l| l * k),
        },
        TailClass::LogWeibullType { alpha, beta, gamma, ell_limit } => TailClass::LogWeibullType {
            alpha,
            beta,
            gamma,
            ell_limit: ell_limit.map(|l| l * k),
        },
        TailClass::NegWeibull { endpoint, alpha, ell_limit } => TailClass::NegWeibull {
            endpoint,
            alpha,
            ell_limit: ell_limit.map(|l| l * k),
        },
        other => other,
    }
}

fn gpd_survival(xi: f64, scale: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if xi == 0.0 {
        return exp(-x / scale);
    }
    let t = xi * x / scale;
    if t <= -1.0 {
        return 0.0;
    }
    exp(-log1p(t) / xi)
}

fn spectral_cdf(theta: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if w >= 1.0 {
        return 1.0;
    }
    if w > 0.5 {
        return 1.0 - spectral_cdf(theta, 1.0 - w);
    }
    // H(w) = (1 - (1+r)^(theta-1) + (1+r)^(theta-1) t^(k-1)) / 2 with
    // t = w / (1 - w), r = t^k, k = 1 / theta
    let k = 1.0 / theta;
    let t = w / (1.0 - w);
    let e = (theta - 1.0) * log1p(pow(t, k));
    0.5 * (-expm1(e) + exp(e) * pow(t, k - 1.0))
}

fn spectral_density(theta: f64, w: f64) -> f64 {
    if w <= 0.0 || w >= 1.0 {
        return 0.0;
    }
    let k = 1.0 / theta;
    pow(w * (1.0 - w), k - 2.0) * pow(pow(w, k) + pow(1.0 - w, k), theta - 2.0) * (1.0 - theta) / (2.0 * theta)
}

/// Law of the angular pair `W = (W1, W2)`.
#[derive(Clone, Debug)]
pub enum AngularModel {
    /// `W = (tau(Z), tau(1 - Z))` on the unit sphere of a standardized norm.
    ConstrainedSphere {
        norm: Norm,
        z: UnivariateModel,
        profile: NormProfile,
    },
    IndependentPair(UnivariateModel),
    ComonotonePair(UnivariateModel),
    /// Gaussian copula with correlation `rho` and common margin.
    GaussianCopulaPair { rho: f64, margin: UnivariateModel },
}

/// Scan range of the log-probability variable `s = -log P(W > w)`.
const S_RANGE: f64 = 745.0;
/// Scan range of the latent standard normal variable.
const N_RANGE: f64 = 38.0;
const GRADE: u32 = 40;

type QuadResult = core::result::Result<Quadrature, QuadError>;
type Integrand<'a> = &'a dyn Fn(f64) -> f64;

impl AngularModel {
    pub fn constrained(norm: NormSpec, z: UnivariateModel) -> Result<Self> {
        let norm = normgeom::standardize(norm)?;
        let profile = normgeom::profile(&norm)?;
        let m = AngularModel::ConstrainedSphere { norm, z, profile };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AngularModel::ConstrainedSphere { z, .. } => {
                z.validate()?;
                let (lo, hi) = z.support();
                if lo < 0.0 || hi > 1.0 {
                    return Err(invalid("Z must live on [0, 1]"));
                }
                if z.atom().is_some() || z.density(0.5).is_none() {
                    return Err(invalid("Z must have a density"));
                }
                for &t in &[0.05, 0.17, 0.31, 0.42] {
                    let left = z.cdf(0.5 - t);
                    let right = z.survival(0.5 + t);
                    if fabs(left - right) > 1e-9 {
                        return Err(invalid("Z must be symmetric about 1/2"));
                    }
                }
                Ok(())
            }
            AngularModel::IndependentPair(m) | AngularModel::ComonotonePair(m) => {
                m.validate()?;
                check_positive_margin(m)
            }
            AngularModel::GaussianCopulaPair { rho, margin } => {
                if !(rho.is_finite() && *rho > -1.0 && *rho <= 1.0) {
                    return Err(invalid(format!("rho must lie in (-1, 1], got {rho}")));
                }
                margin.validate()?;
                if margin.atom().is_some() {
                    return Err(invalid("Gaussian copula margin must be continuous"));
                }
                check_positive_margin(margin)
            }
        }
    }

    /// Law of each margin `W_j` where it is a named family.
    pub fn margin(&self) -> Option<&UnivariateModel> {
        match self {
            AngularModel::IndependentPair(m) | AngularModel::ComonotonePair(m) => Some(m),
            AngularModel::GaussianCopulaPair { margin, .. } => Some(margin),
            AngularModel::ConstrainedSphere { .. } => None,
        }
    }

    pub fn norm_profile(&self) -> Option<&NormProfile> {
        match self {
            AngularModel::ConstrainedSphere { profile, .. } => Some(profile),
            _ => None,
        }
    }

    /// Upper end of the support of `W_j`.
    pub fn upper(&self) -> f64 {
        match self {
            AngularModel::ConstrainedSphere { .. } => 1.0,
            _ => self.margin().map(|m| m.support().1).unwrap_or(f64::INFINITY),
        }
    }

    /// Upper end of the support of `min(W1, W2)`.
    pub fn min_upper(&self) -> f64 {
        match self {
            AngularModel::ConstrainedSphere { profile, .. } => profile.zeta,
            _ => self.upper(),
        }
    }

    /// `P(W_j = w*)` at the upper endpoint.
    pub fn prob_at_upper(&self) -> f64 {
        match self {
            AngularModel::ConstrainedSphere { z, profile, .. } => {
                if profile.b2 > profile.b1 {
                    z.survival(profile.b1) - z.survival(profile.b2)
                } else {
                    0.0
                }
            }
            _ => match self.margin().and_then(|m| m.atom()) {
                Some(_) => 1.0,
                None => 0.0,
            },
        }
    }

    /// `P(W_j >= x)`.
    pub fn margin_survival(&self, x: f64) -> f64 {
        match self {
            AngularModel::ConstrainedSphere { norm, z, profile } => {
                if x <= 0.0 {
                    return 1.0;
                }
                if x > 1.0 {
                    return 0.0;
                }
                let (lo, hi) = norm.level_set(1.0 - x, profile.b1, profile.b2);
                (z.survival(lo) - z.survival(hi)).max(0.0)
            }
            _ => self.margin().map(|m| m.survival_ge(x)).unwrap_or(0.0),
        }
    }

    /// `P(min(W1, W2) >= x)`.
    pub fn min_survival(&self, x: f64) -> f64 {
        match self {
            AngularModel::IndependentPair(m) => {
                let s = m.survival_ge(x);
                s * s
            }
            AngularModel::ComonotonePair(m) => m.survival_ge(x),
            AngularModel::ConstrainedSphere { norm, z, profile } => {
                if x <= 0.0 {
                    return 1.0;
                }
                if x > profile.zeta {
                    return 0.0;
                }
                let (lo, _) = norm.level_set(1.0 - x, profile.b1, profile.b2);
                let lo = lo.min(0.5);
                (1.0 - 2.0 * z.cdf(lo)).max(0.0)
            }
            AngularModel::GaussianCopulaPair { rho, margin } => {
                let s = margin.survival_ge(x);
                if s <= 0.0 {
                    return 0.0;
                }
                if *rho == 1.0 {
                    return s;
                }
                let h = norm_isf(s);
                normal_orthant(h, *rho)
            }
        }
    }

    /// `P(W1 >= x1, W2 >= x2)`.
    pub fn joint_survival(&self, x1: f64, x2: f64) -> f64 {
        match self {
            AngularModel::IndependentPair(m) => m.survival_ge(x1) * m.survival_ge(x2),
            AngularModel::ComonotonePair(m) => m.survival_ge(x1.max(x2)),
            AngularModel::ConstrainedSphere { norm, z, profile } => {
                // tau(Z) >= x1 on [lo1, hi1]; tau(1 - Z) >= x2 on [1 - hi2, 1 - lo2]
                let window = |x: f64| -> Option<(f64, f64)> {
                    if x <= 0.0 {
                        Some((0.0, 1.0))
                    } else if x > 1.0 {
                        None
                    } else {
                        Some(norm.level_set(1.0 - x, profile.b1, profile.b2))
                    }
                };
                let (Some((lo1, hi1)), Some((lo2, hi2))) = (window(x1), window(x2)) else {
                    return 0.0;
                };
                let lo = lo1.max(1.0 - hi2);
                let hi = hi1.min(1.0 - lo2);
                if hi <= lo {
                    0.0
                } else {
                    (z.survival(lo) - z.survival(hi)).max(0.0)
                }
            }
            AngularModel::GaussianCopulaPair { rho, margin } => {
                let (s1, s2) = (margin.survival_ge(x1), margin.survival_ge(x2));
                if s1 <= 0.0 || s2 <= 0.0 {
                    return 0.0;
                }
                if *rho == 1.0 {
                    return s1.min(s2);
                }
                normal_orthant2(norm_isf(s1), norm_isf(s2), *rho)
            }
        }
    }

    /// `E[W_j^p]`.
    pub fn margin_moment(&self, p: f64) -> Result<f64> {
        match self {
            AngularModel::ConstrainedSphere { .. } => {
                let g = |w: f64| pow(w, p);
                quad_value(self.expect_margin(&g, &[], QuadOptions::rel(1e-12)), "angular moment")
            }
            _ => self.margin().unwrap().moment(p),
        }
    }

    /// `E[min(W1, W2)^p]`.
    pub fn min_moment(&self, p: f64) -> Result<f64> {
        if p == 0.0 {
            return Ok(1.0);
        }
        if let AngularModel::ComonotonePair(m) = self {
            return m.moment(p);
        }
        let g = |w: f64| pow(w, p);
        quad_value(self.expect_min(&g, &[], QuadOptions::rel(1e-12)), "angular min moment")
    }

    /// `E[g(W_j)]` for a non-decreasing `g`; `kinks` are points where `g`
    /// is not smooth.
    pub fn expect_margin(&self, g: Integrand<'_>, kinks: &[f64], opts: QuadOptions) -> QuadResult {
        match self {
            AngularModel::ConstrainedSphere { norm, z, profile } => {
                let f = |t: f64| {
                    let d = z.density(t).unwrap_or(0.0);
                    if d == 0.0 || !d.is_finite() {
                        0.0
                    } else {
                        g(norm.tau(t)) * d
                    }
                };
                let mut breaks = alloc::vec![0.0, 0.5, profile.b1, profile.b2, 1.0];
                push_level_kinks(&mut breaks, norm, profile, kinks);
                breaks.sort_by(|a, b| a.total_cmp(b));
                breaks.dedup();
                integrate_breaks(f, &breaks, opts.graded(GRADE))
            }
            AngularModel::IndependentPair(m) | AngularModel::ComonotonePair(m) => expect_law(m, g, kinks, false, opts),
            AngularModel::GaussianCopulaPair { margin, .. } => {
                let f = |n: f64| g(latent_to_margin(margin, n)) * norm_pdf(n);
                let nk = latent_kinks(margin, kinks);
                integrate_scan(f, -N_RANGE, N_RANGE, &nk, opts)
            }
        }
    }

    /// `E[g(min(W1, W2))]` for a non-decreasing `g`.
    pub fn expect_min(&self, g: Integrand<'_>, kinks: &[f64], opts: QuadOptions) -> QuadResult {
        match self {
            AngularModel::ConstrainedSphere { norm, z, profile } => {
                let f = |t: f64| {
                    let d = z.density(t).unwrap_or(0.0);
                    if d == 0.0 || !d.is_finite() {
                        0.0
                    } else {
                        2.0 * g(norm.tau(t)) * d
                    }
                };
                let mut breaks = alloc::vec![0.0, 0.5];
                push_level_kinks(&mut breaks, norm, profile, kinks);
                breaks.retain(|b| *b <= 0.5);
                breaks.sort_by(|a, b| a.total_cmp(b));
                breaks.dedup();
                integrate_breaks(f, &breaks, opts.graded(GRADE))
            }
            AngularModel::IndependentPair(m) => expect_law(m, g, kinks, true, opts),
            AngularModel::ComonotonePair(m) => expect_law(m, g, kinks, false, opts),
            AngularModel::GaussianCopulaPair { rho, margin } => {
                if *rho == 1.0 {
                    return expect_law(margin, g, kinks, false, opts);
                }
                let k = sqrt((1.0 - rho) / (1.0 + rho));
                let f = |n: f64| g(latent_to_margin(margin, n)) * 2.0 * norm_pdf(n) * norm_sf(n * k);
                let nk = latent_kinks(margin, kinks);
                integrate_scan(f, -N_RANGE, N_RANGE, &nk, opts)
            }
        }
    }

    /// One draw of `(W1, W2)`.
    pub fn sample_pair<G: RngCore + ?Sized>(&self, rng: &mut G) -> (f64, f64) {
        match self {
            AngularModel::IndependentPair(m) => (m.sample(rng), m.sample(rng)),
            AngularModel::ComonotonePair(m) => {
                let w = m.sample(rng);
                (w, w)
            }
            AngularModel::ConstrainedSphere { norm, z, .. } => {
                let u = uniform(rng);
                // draw the half closest to 0 so that 1 - z is carried exactly
                let small = z.quantile(u.min(1.0 - u));
                let big = 1.0 - small;
                if u < 0.5 {
                    (norm.tau(small), norm.tau(big))
                } else {
                    (norm.tau(big), norm.tau(small))
                }
            }
            AngularModel::GaussianCopulaPair { rho, margin } => {
                let n1 = norm_ppf(uniform(rng));
                let e = norm_ppf(uniform(rng));
                let n2 = rho * n1 + sqrt((1.0 - rho * rho).max(0.0)) * e;
                (latent_to_margin(margin, n1), latent_to_margin(margin, n2))
            }
        }
    }
}

fn quad_value(r: core::result::Result<Quadrature, QuadError>, what: &str) -> Result<f64> {
    match r {
        Ok(q) => Ok(q.value),
        Err(QuadError::NonConvergent { value, abs_err }) => Err(nonconvergent(what, value, abs_err)),
        Err(QuadError::NonFinite { at }) => Err(nonconvergent(what, f64::NAN, at)),
    }
}

fn push_level_kinks(breaks: &mut Vec<f64>, norm: &Norm, profile: &NormProfile, kinks: &[f64]) {
    for &w in kinks {
        if w > 0.0 && w < 1.0 {
            let (lo, hi) = norm.level_set(1.0 - w, profile.b1, profile.b2);
            breaks.push(lo);
            if hi < 1.0 {
                breaks.push(hi);
            }
        }
    }
}

/// Map a latent standard normal value to the margin with the same upper-tail probability.
fn latent_to_margin(margin: &UnivariateModel, n: f64) -> f64 {
    match margin {
        UnivariateModel::LogNormal { mu, sigma } => exp(mu + sigma * n),
        _ => margin.isf(norm_sf(n)),
    }
}

fn latent_kinks(margin: &UnivariateModel, kinks: &[f64]) -> Vec<f64> {
    kinks
        .iter()
        .map(|&w| margin.survival(w))
        .filter(|s| *s > 0.0 && *s < 1.0)
        .map(norm_isf)
        .collect()
}

/// `E[g(V)]` where `V` is one draw of `m` or, with `squared`, the minimum of two
/// independent draws.
fn expect_law(
    m: &UnivariateModel,
    g: Integrand<'_>,
    kinks: &[f64],
    squared: bool,
    opts: QuadOptions,
) -> core::result::Result<Quadrature, QuadError> {
    if let Some(v) = m.atom() {
        return Ok(Quadrature {
            value: g(v),
            abs_err: 0.0,
            intervals: 0,
        });
    }
    let (lo, hi) = m.support();
    if hi.is_finite() && m.density(0.5 * (lo + hi)).is_some() {
        let f = |w: f64| {
            let d = m.density(w).unwrap_or(0.0);
            if d == 0.0 || !d.is_finite() {
                return 0.0;
            }
            let weight = if squared { 2.0 * d * m.survival(w) } else { d };
            g(w) * weight
        };
        let breaks = breaks_within(lo, hi, kinks);
        return integrate_breaks(f, &breaks, opts.graded(GRADE));
    }
    // s = -log P(V1 > w): V = isf(exp(-s)).
    let f = |s: f64| {
        let u = exp(-s);
        let w = m.isf(u);
        if squared {
            g(w) * 2.0 * u * u
        } else {
            g(w) * u
        }
    };
    let sk: Vec<f64> = kinks
        .iter()
        .map(|&w| m.survival(w))
        .filter(|p| *p > 0.0 && *p < 1.0)
        .map(|p| -log(p))
        .collect();
    integrate_scan(f, 0.0, S_RANGE, &sk, opts)
}

/// `P(N1 >= h, N2 >= h)` for a standard bivariate normal pair with correlation `rho`.
pub fn normal_orthant(h: f64, rho: f64) -> f64 {
    normal_orthant2(h, h, rho)
}

/// `P(N1 >= h1, N2 >= h2)` for a standard bivariate normal pair with correlation `rho`.
pub fn normal_orthant2(h1: f64, h2: f64, rho: f64) -> f64 {
    if rho >= 1.0 {
        return norm_sf(h1.max(h2));
    }
    if rho == 0.0 {
        return norm_sf(h1) * norm_sf(h2);
    }
    let s = sqrt(1.0 - rho * rho);
    let f = |n: f64| norm_pdf(n) * norm_sf((h2 - rho * n) / s);
    match integrate(f, h1, f64::INFINITY, QuadOptions::rel(1e-12).with_abs(1e-300).graded(30)) {
        Ok(q) => q.value,
        Err(QuadError::NonConvergent { value, .. }) => value,
        Err(QuadError::NonFinite { .. }) => f64::NAN,
    }
}

fn check_positive_margin(m: &UnivariateModel) -> Result<()> {
    if m.support().0 < 0.0 {
        Err(invalid("angular margins must be non-negative"))
    } else {
        Ok(())
    }
}

/// The bivariate law `X = R * W` with `R` independent of `W`.
#[derive(Clone, Debug)]
pub struct ConstructionSpec {
    pub radial: UnivariateModel,
    pub angular: AngularModel,
}

impl ConstructionSpec {
    /// Validates both parts; radial laws with mass on the negative axis are
    /// conditioned to `(0, inf)`.
    pub fn new(radial: UnivariateModel, angular: AngularModel) -> Result<Self> {
        radial.validate()?;
        angular.validate()?;
        let radial = if radial.support().0 < 0.0 {
            let r = UnivariateModel::PositivePart(Box::new(radial));
            r.validate()?;
            r
        } else {
            radial
        };
        if radial.atom().map(|v| v <= 0.0).unwrap_or(false) {
            return Err(invalid("radial law must be positive"));
        }
        Ok(Self { radial, angular })
    }

    /// Upper endpoint of each margin of `X`.
    pub fn upper(&self) -> f64 {
        let r = self.radial.support().1;
        let w = self.angular.upper();
        if r.is_infinite() || w.is_infinite() {
            f64::INFINITY
        } else {
            r * w
        }
    }

    pub fn describe(&self) -> String {
        format!("R ~ {:?}, W ~ {:?}", self.radial, self.angular)
    }
}

/// `R` with survival `exp(-r^delta)`, the `theta`-mixture norm and
/// `Z ~ Beta(alpha, alpha)`.
pub fn model1(theta: f64, delta: f64, alpha: f64) -> Result<ConstructionSpec> {
    ConstructionSpec::new(
        UnivariateModel::Weibull {
            shape: delta,
            scale: 1.0,
        },
        AngularModel::constrained(NormSpec::ThetaMix { theta }, UnivariateModel::Beta { a: alpha, b: alpha })?,
    )
}

/// Generalized Pareto `R` (unit scale) with independent `Beta(alpha, alpha)` angular margins.
pub fn model2(xi: f64, alpha: f64) -> Result<ConstructionSpec> {
    ConstructionSpec::new(
        UnivariateModel::Gpd { xi, scale: 1.0 },
        AngularModel::IndependentPair(UnivariateModel::Beta { a: alpha, b: alpha }),
    )
}

/// `exp(S) * (exp(V1), exp(V2))` with standard normal `S` and a Gaussian pair `V` with correlation `rho`.
pub fn gaussian_factor(rho: f64) -> Result<ConstructionSpec> {
    let ln = UnivariateModel::LogNormal { mu: 0.0, sigma: 1.0 };
    ConstructionSpec::new(ln.clone(), AngularModel::GaussianCopulaPair { rho, margin: ln })
}

/// Radial law of an Archimedean copula generator.
pub fn radial_from_generator(g: Generator) -> Result<UnivariateModel> {
    let m = UnivariateModel::Archimedean(g);
    m.validate()?;
    Ok(m)
}

pub(crate) fn nonconvergent(what: &str, value: f64, abs_err: f64) -> Error {
    Error::NonConvergent {
        what: String::from(what),
        value,
        abs_err,
    }
}

/// Sorted, de-duplicated finite breakpoints inside `[lo, hi]`.
pub(crate) fn breaks_within(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::with_capacity(extra.len() + 2);
    v.push(lo);
    v.extend(extra.iter().copied().filter(|p| *p > lo && *p < hi && p.is_finite()));
    v.push(hi);
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<UnivariateModel> {
        use UnivariateModel::*;
        alloc::vec![
            Exponential { rate: 2.0 },
            Gamma { shape: 2.5, rate: 1.5 },
            Weibull { shape: 0.7, scale: 2.0 },
            Normal { loc: 0.3, scale: 1.2 },
            Gumbel { loc: 0.0, scale: 1.0 },
            Logistic { loc: 1.0, scale: 0.5 },
            LogNormal { mu: 0.1, sigma: 0.8 },
            Pareto { shape: 1.5, scale: 1.0 },
            Frechet { shape: 2.0, scale: 1.0 },
            LogLogistic { shape: 3.0, scale: 2.0 },
            Gpd { xi: 0.5, scale: 1.0 },
            Gpd { xi: -0.5, scale: 1.0 },
            Gpd { xi: 0.0, scale: 2.0 },
            Uniform { lo: 0.5, hi: 2.0 },
            Beta { a: 0.6, b: 0.6 },
            Beta { a: 2.0, b: 3.0 },
            LogisticSpectral { theta: 0.4 },
            Archimedean(Generator::Gumbel { theta: 0.6 }),
            Archimedean(Generator::Clayton { theta: 1.5 }),
            PositivePart(Box::new(Normal { loc: 0.0, scale: 1.0 })),
        ]
    }

    fn ulp_step(x: f64, k: i64) -> f64 {
        if x == 0.0 {
            return (k as f64) * f64::MIN_POSITIVE;
        }
        let b = x.to_bits() as i64;
        let b = if x > 0.0 { b + k } else { b - k };
        f64::from_bits(b as u64)
    }

    #[test]
    fn isf_inverts_survival() {
        for m in families() {
            m.validate().unwrap();
            for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9] {
                let x = m.isf(p);
                let s = m.survival(x);
                // near a finite endpoint x itself carries the rounding
                let (dn, up) = (ulp_step(x, -2), ulp_step(x, 2));
                let grain = (m.survival(dn) - m.survival(up)).abs();
                assert!((s - p).abs() < 1e-8 * p + grain, "{m:?} p={p} got {s}");
            }
            for &u in &[1e-9, 0.2, 0.5] {
                let x = m.quantile(u);
                assert!((m.cdf(x) - u).abs() < 1e-9 * u.max(1e-3), "{m:?} u={u}");
            }
        }
    }

    #[test]
    fn densities_match_survival_differences() {
        for m in families() {
            let Some(_) = m.density(1.0) else { continue };
            for &p in &[0.2, 0.5, 0.8] {
                let x = m.isf(p);
                let h = 1e-5 * x.abs().max(1e-3);
                let fd = (m.survival(x - h) - m.survival(x + h)) / (2.0 * h);
                let d = m.density(x).unwrap();
                assert!((fd - d).abs() < 1e-5 * d.max(1e-3), "{m:?} at {x}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn spectral_cdf_is_integral_of_density() {
        let theta = 0.4;
        let q = crate::quad::integrate_breaks(
            |w| spectral_density(theta, w),
            &[0.0, 0.3],
            crate::quad::QuadOptions::rel(1e-12).graded(40),
        )
        .unwrap();
        assert!((q.value - spectral_cdf(theta, 0.3)).abs() < 1e-10);
    }

    #[test]
    fn radial_normal_is_conditioned() {
        let s = ConstructionSpec::new(
            UnivariateModel::Normal { loc: 0.0, scale: 1.0 },
            AngularModel::ComonotonePair(UnivariateModel::Degenerate { value: 1.0 }),
        )
        .unwrap();
        assert!((s.radial.survival(0.0) - 1.0).abs() < 1e-15);
        assert!((s.radial.survival(1.0) - 2.0 * norm_sf(1.0)).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_z_rejected() {
        let r = AngularModel::constrained(NormSpec::Lp { p: 2.0 }, UnivariateModel::Beta { a: 2.0, b: 1.0 });
        assert!(r.is_err());
    }

    fn rng(seed: u64) -> rand_chacha::ChaCha20Rng {
        use rand_core::SeedableRng;
        rand_chacha::ChaCha20Rng::seed_from_u64(seed)
    }

    fn angular_models() -> Vec<AngularModel> {
        use UnivariateModel::*;
        alloc::vec![
            AngularModel::IndependentPair(Uniform { lo: 0.0, hi: 1.0 }),
            AngularModel::IndependentPair(Exponential { rate: 1.0 }),
            AngularModel::ComonotonePair(Weibull { shape: 2.0, scale: 1.0 }),
            AngularModel::GaussianCopulaPair { rho: 0.5, margin: LogNormal { mu: 0.0, sigma: 1.0 } },
            AngularModel::GaussianCopulaPair { rho: -0.3, margin: Exponential { rate: 2.0 } },
            AngularModel::constrained(NormSpec::Lp { p: 1.0 }, Uniform { lo: 0.0, hi: 1.0 }).unwrap(),
            AngularModel::constrained(NormSpec::Lp { p: 2.0 }, Beta { a: 2.0, b: 2.0 }).unwrap(),
            AngularModel::constrained(NormSpec::Linf, Beta { a: 0.7, b: 0.7 }).unwrap(),
            AngularModel::constrained(NormSpec::ThetaMix { theta: 2.0 }, Beta { a: 1.5, b: 1.5 }).unwrap(),
        ]
    }

    #[test]
    fn closed_form_moments_match_quadrature() {
        use UnivariateModel::*;
        let laws = [
            Exponential { rate: 2.0 },
            Gamma { shape: 2.5, rate: 1.5 },
            Weibull { shape: 0.7, scale: 2.0 },
            LogNormal { mu: 0.1, sigma: 0.5 },
            Pareto { shape: 3.5, scale: 1.0 },
            Frechet { shape: 4.0, scale: 1.5 },
            LogLogistic { shape: 5.0, scale: 1.0 },
            Uniform { lo: 0.5, hi: 2.0 },
            Beta { a: 0.8, b: 2.5 },
        ];
        for m in laws {
            for p in [0.5, 1.0, 2.0] {
                let closed = m.moment(p).unwrap();
                let (lo, hi) = m.support();
                let f = |x: f64| p * pow(x, p - 1.0) * m.survival(x);
                let q = crate::quad::integrate(f, lo, hi, QuadOptions::rel(1e-11).graded(40)).unwrap();
                let brute = pow(lo, p) + q.value;
                assert!((closed - brute).abs() < 1e-8 * closed, "{m:?} p={p}: {closed} vs {brute}");
            }
        }
    }

    #[test]
    fn numeric_moment_of_half_normal() {
        let m = UnivariateModel::PositivePart(Box::new(UnivariateModel::Normal { loc: 0.0, scale: 1.0 }));
        assert!((m.moment(1.0).unwrap() - sqrt(2.0 / core::f64::consts::PI)).abs() < 1e-9);
        assert!((m.moment(2.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn divergent_moment_is_infinite() {
        let m = UnivariateModel::Pareto { shape: 1.5, scale: 1.0 };
        assert_eq!(m.moment(1.5).unwrap(), f64::INFINITY);
        assert_eq!(m.moment(2.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn min_moments_known_values() {
        let u = AngularModel::IndependentPair(UnivariateModel::Uniform { lo: 0.0, hi: 1.0 });
        assert!((u.min_moment(1.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((u.min_moment(2.0).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        let e = AngularModel::IndependentPair(UnivariateModel::Exponential { rate: 1.0 });
        assert!((e.min_moment(1.0).unwrap() - 0.5).abs() < 1e-10);
        let g = AngularModel::GaussianCopulaPair { rho: 0.0, margin: UnivariateModel::Exponential { rate: 1.0 } };
        assert!((g.min_moment(1.0).unwrap() - 0.5).abs() < 1e-9);
        assert!((g.margin_moment(2.0).unwrap() - 2.0).abs() < 1e-9);
        let l1 = AngularModel::constrained(NormSpec::Lp { p: 1.0 }, UnivariateModel::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        assert!((l1.min_moment(1.0).unwrap() - 0.25).abs() < 1e-12);
        assert!((l1.margin_moment(1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((l1.min_survival(0.3) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn sup_norm_has_mass_at_one() {
        let m = AngularModel::constrained(NormSpec::Linf, UnivariateModel::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        assert!((m.prob_at_upper() - 0.5).abs() < 1e-12);
        assert!((m.min_survival(1.0) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn normal_orthant_at_zero() {
        for rho in [-0.7, -0.2, 0.3, 0.9] {
            let want = 0.25 + libm::asin(rho) / (2.0 * core::f64::consts::PI);
            assert!((normal_orthant(0.0, rho) - want).abs() < 1e-12, "rho={rho}");
        }
    }

    #[test]
    fn min_survival_matches_simulation() {
        let n = 200_000;
        for (k, m) in angular_models().iter().enumerate() {
            let mut r = rng(k as u64 + 7);
            let draws: Vec<(f64, f64)> = (0..n).map(|_| m.sample_pair(&mut r)).collect();
            let mut mins: Vec<f64> = draws.iter().map(|p| p.0.min(p.1)).collect();
            mins.sort_by(|a, b| a.total_cmp(b));
            for q in [0.3, 0.7, 0.95] {
                let x = mins[(q * n as f64) as usize];
                let emp = draws.iter().filter(|p| p.0.min(p.1) >= x).count() as f64 / n as f64;
                let exact = m.min_survival(x);
                let se = sqrt(exact * (1.0 - exact) / n as f64);
                assert!((emp - exact).abs() < 5.0 * se + 1e-12, "model {k} q={q}: {emp} vs {exact}");
                let mg = draws.iter().filter(|p| p.0 >= x).count() as f64 / n as f64;
                let exact_m = m.margin_survival(x);
                let se = sqrt(exact_m * (1.0 - exact_m) / n as f64);
                assert!((mg - exact_m).abs() < 5.0 * se + 1e-12, "model {k} margin q={q}: {mg} vs {exact_m}");
            }
        }
    }

    #[test]
    fn expectations_agree_with_survival() {
        // E[1{min >= x}] through the integrator against the direct probability
        for (k, m) in angular_models().iter().enumerate() {
            let x = if m.upper() <= 1.0 { 0.35 * m.min_upper() } else { 1.3 };
            let g = |w: f64| if w >= x { 1.0 } else { 0.0 };
            let e = m.expect_min(&g, &[x], QuadOptions::rel(1e-11)).unwrap().value;
            assert!((e - m.min_survival(x)).abs() < 1e-8, "model {k}: {e} vs {}", m.min_survival(x));
            let e = m.expect_margin(&g, &[x], QuadOptions::rel(1e-11)).unwrap().value;
            assert!((e - m.margin_survival(x)).abs() < 1e-8, "model {k} margin");
        }
    }
}

