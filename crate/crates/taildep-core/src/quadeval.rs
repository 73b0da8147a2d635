//! Quadrature evaluation of the tails of `X = R (W1, W2)`: marginal and joint
//! survival, quantiles, sub-asymptotic `chi(q)`, `eta` diagnostics and the
//! product-tail approximations.

use alloc::format;
use alloc::vec::Vec;
use libm::{exp, log, pow};

use crate::distmodel::{AngularModel, ConstructionSpec, UnivariateModel};
use crate::error::{invalid, Error, Result};
use crate::quad::{QuadError, QuadOptions, Quadrature};
use crate::special::{gamma, ln_gamma};
use crate::tailclass::{Mda, TailClass};

/// Relative tolerance requested from every tail integral.
pub const REL_TOL: f64 = 1e-10;
/// Accepted when the adaptive budget runs out before `REL_TOL` is met.
const REL_FALLBACK: f64 = 1e-7;
/// Survival values below this are dropped from log-scale diagnostics.
pub const UNDERFLOW: f64 = 1e-300;

/// A probability with its quadrature error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailProb {
    pub value: f64,
    pub abs_err: f64,
}

fn accept(r: core::result::Result<Quadrature, QuadError>, what: &str, x: f64) -> Result<TailProb> {
    let what = || format!("{what} at x = {x}");
    match r {
        Ok(q) => Ok(TailProb {
            value: q.value.clamp(0.0, 1.0),
            abs_err: q.abs_err,
        }),
        Err(QuadError::NonConvergent { value, abs_err }) if abs_err <= REL_FALLBACK * value.abs() => Ok(TailProb {
            value: value.clamp(0.0, 1.0),
            abs_err,
        }),
        Err(QuadError::NonConvergent { value, abs_err }) => Err(Error::NonConvergent {
            what: what(),
            value,
            abs_err,
        }),
        Err(QuadError::NonFinite { at }) => Err(Error::NonConvergent {
            what: format!("{} (non-finite integrand at {at})", what()),
            value: f64::NAN,
            abs_err: f64::INFINITY,
        }),
    }
}

// Angular values where `w -> P(R > x / w)` has a kink or jump.
fn radial_kinks(radial: &UnivariateModel, x: f64) -> Vec<f64> {
    let (lo, hi) = radial.support();
    let mut k = Vec::new();
    if lo > 0.0 {
        k.push(x / lo);
    }
    if hi.is_finite() && hi > lo {
        k.push(x / hi);
    }
    k
}

fn check_level(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("tail level must be finite and > 0, got {x}")))
    }
}

/// `P(X1 > x)` with its error estimate.
pub fn marginal_survival_est(spec: &ConstructionSpec, x: f64) -> Result<TailProb> {
    check_level(x)?;
    let r = &spec.radial;
    let g = |w: f64| if w > 0.0 { r.survival(x / w) } else { 0.0 };
    let q = spec
        .angular
        .expect_margin(&g, &radial_kinks(r, x), QuadOptions::rel(REL_TOL));
    accept(q, "marginal survival", x)
}

/// `P(min(X1, X2) > x)` with its error estimate.
pub fn joint_min_survival_est(spec: &ConstructionSpec, x: f64) -> Result<TailProb> {
    check_level(x)?;
    let r = &spec.radial;
    let g = |w: f64| if w > 0.0 { r.survival(x / w) } else { 0.0 };
    let q = spec.angular.expect_min(&g, &radial_kinks(r, x), QuadOptions::rel(REL_TOL));
    accept(q, "joint survival", x)
}

/// `P(X1 > x)`.
pub fn marginal_survival(spec: &ConstructionSpec, x: f64) -> Result<f64> {
    marginal_survival_est(spec, x).map(|p| p.value)
}

/// `P(X1 > x, X2 > x)`.
pub fn joint_min_survival(spec: &ConstructionSpec, x: f64) -> Result<f64> {
    joint_min_survival_est(spec, x).map(|p| p.value)
}

/// `x` with `P(X1 <= x) = q`.
pub fn quantile(spec: &ConstructionSpec, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("probability must lie in (0, 1), got {q}")));
    }
    tail_quantile(spec, 1.0 - q)
}

/// `x` with `P(X1 > x) = p`, solved on the log-probability scale.
pub fn tail_quantile(spec: &ConstructionSpec, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("tail probability must lie in (0, 1), got {p}")));
    }
    let target = log(p);
    let top = spec.upper();
    // u parametrizes x: exp(u) for an infinite endpoint, top - exp(-u) otherwise
    let to_x = |u: f64| if top.is_finite() { top - exp(-u) } else { exp(u) };
    let u_floor = if top.is_finite() { -log(top) } else { f64::NEG_INFINITY };
    let h = |u: f64| -> Result<f64> {
        let x = to_x(u);
        if x <= 0.0 {
            return Ok(f64::INFINITY);
        }
        if x >= top {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(log(marginal_survival(spec, x)?) - target)
    };

    let mid = spec.radial.isf(0.5) * 0.5;
    let x0 = if top.is_finite() { mid.min(0.5 * top) } else { mid };
    let mut u0 = if top.is_finite() { -log(top - x0) } else { log(x0) };
    let mut h0 = h(u0)?;
    let mut step = 1.0;
    let (mut a, mut ha, mut b, mut hb);
    if h0 > 0.0 {
        loop {
            let u1 = u0 + step;
            let h1 = h(u1)?;
            if h1 <= 0.0 {
                (a, ha, b, hb) = (u0, h0, u1, h1);
                break;
            }
            (u0, h0) = (u1, h1);
            step *= 2.0;
            if u0 > 745.0 {
                return Err(nonconvergent_quantile(p, to_x(u0)));
            }
        }
    } else {
        loop {
            let mut u1 = u0 - step;
            if u1 <= u_floor {
                u1 = 0.5 * (u0 + u_floor);
            }
            let h1 = h(u1)?;
            if h1 >= 0.0 {
                (a, ha, b, hb) = (u1, h1, u0, h0);
                break;
            }
            (u0, h0) = (u1, h1);
            step *= 2.0;
            if u0 < -745.0 {
                return Err(nonconvergent_quantile(p, to_x(u0)));
            }
        }
    }
    if ha == 0.0 {
        return Ok(to_x(a));
    }
    if hb == 0.0 {
        return Ok(to_x(b));
    }

    // Illinois regula falsi with a bisection fallback
    let mut side = 0i32;
    for it in 0..300 {
        let secant = ha.is_finite() && hb.is_finite() && it % 8 != 7;
        let mut c = if secant { b - hb * (b - a) / (hb - ha) } else { 0.5 * (a + b) };
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let hc = h(c)?;
        if hc.abs() <= 1e-11 || (b - a) <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
            return Ok(to_x(c));
        }
        if hc > 0.0 {
            (a, ha) = (c, hc);
            if side == 1 {
                hb *= 0.5;
            }
            side = 1;
        } else {
            (b, hb) = (c, hc);
            if side == -1 {
                ha *= 0.5;
            }
            side = -1;
        }
    }
    Err(nonconvergent_quantile(p, to_x(0.5 * (a + b))))
}

fn nonconvergent_quantile(p: f64, x: f64) -> Error {
    Error::NonConvergent {
        what: format!("quantile for tail probability {p}"),
        value: x,
        abs_err: f64::INFINITY,
    }
}

/// One point of a `chi(q)` curve.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChiPoint {
    pub q: f64,
    pub one_minus_q: f64,
    pub chi_q: f64,
    pub abs_err_est: f64,
}

/// `chi(q) = P(X1 > x_q, X2 > x_q) / (1 - q)` over a grid.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChiCurve {
    pub points: Vec<ChiPoint>,
    pub method: &'static str,
    pub rel_tol: f64,
}

/// `chi` at tail probability `tail = 1 - q`; taking `tail` directly avoids
/// the rounding of `q` near 1.
pub fn chi_point(spec: &ConstructionSpec, tail: f64) -> Result<ChiPoint> {
    let x = tail_quantile(spec, tail)?;
    let joint = joint_min_survival_est(spec, x)?;
    let chi = (joint.value / tail).clamp(0.0, 1.0 / tail);
    Ok(ChiPoint {
        q: 1.0 - tail,
        one_minus_q: tail,
        chi_q: chi,
        abs_err_est: joint.abs_err / tail + chi * 1e-10,
    })
}

/// Joint survival `P(X1 > x_p, X2 > x_p)` at marginal tail probability `p`.
fn joint_at_tail(spec: &ConstructionSpec, p: f64) -> Result<f64> {
    joint_min_survival(spec, tail_quantile(spec, p)?)
}

/// Population value of the Hill estimator of `eta` when a fraction `top` of
/// the structure variable `T = min(1/(1 - U1), 1/(1 - U2))` lies above the
/// threshold: `int_0^inf J(p_k e^-s) ds / top`, where `J(p)` is the joint
/// survival at marginal tail `p` and `J(p_k) = top`. Equals `eta` when `J`
/// is an exact power and differs from it by the finite-level bias otherwise.
pub fn hill_target(spec: &ConstructionSpec, top: f64) -> Result<f64> {
    if !(top > 0.0 && top < 0.5) {
        return Err(invalid(format!("exceedance fraction must lie in (0, 1/2), got {top}")));
    }
    // J(p) <= p, so p_k >= top; bisect log p on [log top, log hi]
    let hi = 0.5;
    let target = log(top);
    let g = |lp: f64| -> Result<f64> {
        let j = joint_at_tail(spec, exp(lp))?;
        Ok(if j > 0.0 { log(j) - target } else { f64::NEG_INFINITY })
    };
    let (mut a, mut b) = (target, log(hi));
    if g(b)? < 0.0 {
        return Err(invalid(format!("joint exceedance below {top} at marginal tail {hi}")));
    }
    if g(a)? < 0.0 {
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if g(m)? < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
    }
    let pk = exp(b);
    let base = joint_at_tail(spec, pk)?;
    // J(p) <= p bounds the dropped tail by 1e-40 / top
    let s_max = log(pk / 1e-40).max(1.0);
    let fail = core::cell::Cell::new(None);
    let f = |s: f64| match joint_at_tail(spec, pk * exp(-s)) {
        Ok(j) => j / base,
        Err(e) => {
            fail.set(Some(e));
            0.0
        }
    };
    let r = crate::quad::integrate(f, 0.0, s_max, QuadOptions::rel(1e-7));
    if let Some(e) = fail.take() {
        return Err(e);
    }
    match r {
        Ok(q) => Ok(q.value),
        Err(QuadError::NonConvergent { value, abs_err }) if abs_err <= 1e-5 * value.abs() => Ok(value),
        Err(QuadError::NonConvergent { value, abs_err }) => Err(Error::NonConvergent {
            what: format!("Hill target at fraction {top}"),
            value,
            abs_err,
        }),
        Err(QuadError::NonFinite { at }) => Err(Error::NonConvergent {
            what: format!("Hill target at fraction {top} (non-finite integrand at {at})"),
            value: f64::NAN,
            abs_err: f64::INFINITY,
        }),
    }
}

impl ChiCurve {
    pub fn from_points(points: Vec<ChiPoint>) -> Self {
        ChiCurve {
            points,
            method: "quadrature",
            rel_tol: REL_TOL,
        }
    }
}

/// Checks that `grid` is strictly ascending inside `(lo, hi)`.
pub fn check_grid(grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("grid is empty"));
    }
    for (i, &v) in grid.iter().enumerate() {
        if !(v > lo && v < hi) {
            return Err(invalid(format!("grid value {v} outside ({lo}, {hi})")));
        }
        if i > 0 && v <= grid[i - 1] {
            return Err(invalid("grid must be strictly ascending"));
        }
    }
    Ok(())
}

/// `chi(q)` for each `q` in an ascending grid.
pub fn chi_curve(spec: &ConstructionSpec, q_grid: &[f64]) -> Result<ChiCurve> {
    check_grid(q_grid, 0.0, 1.0)?;
    let points = q_grid
        .iter()
        .map(|&q| chi_point(spec, 1.0 - q))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChiCurve::from_points(points))
}

/// `n` tail probabilities log-spaced from `hi` down to `lo` (so `q` ascends).
pub fn log_tail_grid(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![hi];
    }
    let (a, b) = (log(hi), log(lo));
    (0..n).map(|i| exp(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EtaPoint {
    pub x: f64,
    pub log_marginal: f64,
    pub log_joint: f64,
    /// `log P(X1 > x) / log P(X1 > x, X2 > x)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EtaDiagnostic {
    pub points: Vec<EtaPoint>,
    /// Grid values whose survival underflowed or left `(0, 1)`.
    pub dropped: Vec<f64>,
    /// Slope of `log P(X1 > x)` against `log P(min > x)` over the last two points.
    pub last_slope: Option<f64>,
    pub extrapolated: Option<f64>,
    pub method: &'static str,
}

const ETA_METHOD: &str =
    "local log-survival slopes fitted as eta + c1/L + c2/L^2 over the last three, L = -log P(X1 > x)";

/// Pointwise log-survival ratios over `x_grid` and an extrapolated limit.
pub fn eta_diagnostic(spec: &ConstructionSpec, x_grid: &[f64]) -> Result<EtaDiagnostic> {
    check_grid(x_grid, 0.0, f64::INFINITY)?;
    let mut points = Vec::with_capacity(x_grid.len());
    let mut dropped = Vec::new();
    for &x in x_grid {
        let sx = marginal_survival(spec, x)?;
        let sm = joint_min_survival(spec, x)?;
        if sx < UNDERFLOW || sm < UNDERFLOW || sx >= 1.0 || sm >= 1.0 {
            dropped.push(x);
            continue;
        }
        let (lx, lm) = (log(sx), log(sm));
        points.push(EtaPoint {
            x,
            log_marginal: lx,
            log_joint: lm,
            ratio: lx / lm,
        });
    }
    let (last_slope, extrapolated) = extrapolate(&points);
    Ok(EtaDiagnostic {
        points,
        dropped,
        last_slope,
        extrapolated,
        method: ETA_METHOD,
    })
}

/// Ascending `x` grid at the marginal quantiles of the given tail probabilities.
pub fn quantile_grid(spec: &ConstructionSpec, tails: &[f64]) -> Result<Vec<f64>> {
    tails.iter().map(|&p| tail_quantile(spec, p)).collect()
}

fn extrapolate(points: &[EtaPoint]) -> (Option<f64>, Option<f64>) {
    let mut slopes: Vec<(f64, f64)> = Vec::new();
    for w in points.windows(2) {
        let dm = w[1].log_joint - w[0].log_joint;
        let dx = w[1].log_marginal - w[0].log_marginal;
        if dm < 0.0 && dx.is_finite() {
            let inv_l = -2.0 / (w[0].log_marginal + w[1].log_marginal);
            slopes.push((inv_l, dx / dm));
        }
    }
    let last = slopes.last().map(|s| s.1);
    let est = match slopes.len() {
        0 => points.last().map(|p| p.ratio),
        1 => last,
        2 => {
            let (t0, s0) = slopes[0];
            let (t1, s1) = slopes[1];
            if t0 == t1 {
                Some(s1)
            } else {
                Some(s1 - t1 * (s1 - s0) / (t1 - t0))
            }
        }
        n => {
            // quadratic in 1/L through the last three slopes, evaluated at 1/L = 0
            let pts = &slopes[n - 3..];
            let mut v = 0.0;
            for i in 0..3 {
                let mut w = 1.0;
                for j in 0..3 {
                    if i != j {
                        w *= pts[j].0 / (pts[j].0 - pts[i].0);
                    }
                }
                v += w * pts[i].1;
            }
            if v.is_finite() {
                Some(v)
            } else {
                last
            }
        }
    };
    (last, est)
}

/// Behaviour of a factor `S` at its upper endpoint: `P(S > endpoint - t) ~ ell t^alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointTail {
    pub endpoint: f64,
    pub alpha: f64,
    pub ell: f64,
}

impl EndpointTail {
    pub fn new(endpoint: f64, alpha: f64, ell: f64) -> Result<Self> {
        if !(endpoint.is_finite() && endpoint > 0.0 && alpha.is_finite() && alpha >= 0.0 && ell.is_finite() && ell > 0.0) {
            return Err(invalid("endpoint tail needs endpoint > 0, alpha >= 0, ell > 0"));
        }
        Ok(Self { endpoint, alpha, ell })
    }

    /// Reads the endpoint behaviour from a bounded law's tail class.
    pub fn of(m: &UnivariateModel) -> Result<Self> {
        if let Some(v) = m.atom() {
            return Self::new(v, 0.0, 1.0);
        }
        match m.tail_class() {
            Some(TailClass::NegWeibull {
                endpoint,
                alpha,
                ell_limit: Some(ell),
            }) => Self::new(endpoint, alpha, ell),
            _ => Err(invalid("factor needs a finite endpoint with known slowly varying limit")),
        }
    }

    fn survival_below(&self, t: f64) -> f64 {
        if self.alpha == 0.0 {
            self.ell
        } else {
            self.ell * pow(t, self.alpha)
        }
    }
}

/// Asymptotic approximation of `P(R S > x)` for `R` in the Gumbel or negative
/// Weibull domain and `S` bounded with power behaviour at its endpoint.
pub fn product_tail_approx(r: &UnivariateModel, s: &EndpointTail, x: f64) -> Result<f64> {
    let class = r
        .tail_class()
        .ok_or_else(|| invalid("radial law has no known tail class"))?;
    let sk = s.endpoint;
    match class.mda() {
        Mda::Gumbel { .. } => {
            // s* R has auxiliary function b(t / s*) / s*
            let b = r
                .hazard(x / sk)
                .ok_or_else(|| invalid("auxiliary function unavailable"))?
                / sk;
            let t = 1.0 / (x * b);
            Ok(gamma(1.0 + s.alpha) * s.survival_below(sk * t) * r.survival(x / sk))
        }
        Mda::NegWeibull { endpoint, alpha } => {
            let top = sk * endpoint;
            let gap = top - x;
            if gap <= 0.0 {
                return Ok(0.0);
            }
            let c = exp(ln_gamma(1.0 + s.alpha) + ln_gamma(1.0 + alpha) - ln_gamma(1.0 + s.alpha + alpha));
            Ok(c * s.survival_below(gap / endpoint) * r.survival(endpoint - gap / sk))
        }
        _ => Err(invalid("product tail approximation needs a Gumbel or negative Weibull radial law")),
    }
}

/// `P(R W > x) / (E[W^alpha] P(R > x))` for regularly varying `R`.
pub fn breiman_ratio(r: &UnivariateModel, w: &UnivariateModel, x: f64) -> Result<f64> {
    let alpha = match r.tail_class() {
        Some(TailClass::RegVarInf { alpha, .. }) if alpha > 0.0 => alpha,
        _ => return Err(invalid("Breiman ratio needs a regularly varying radial law")),
    };
    let spec = ConstructionSpec::new(r.clone(), AngularModel::ComonotonePair(w.clone()))?;
    let m = w.moment(alpha)?;
    if !m.is_finite() {
        return Err(invalid("E[W^alpha] diverges"));
    }
    Ok(marginal_survival(&spec, x)? / (m * r.survival(x)))
}
