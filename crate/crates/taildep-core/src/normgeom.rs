//! Norms on the positive quadrant, their standardization and the shape of
//! the angular map `tau(z) = z / nu(z, 1 - z)`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use libm::{expm1, fabs, log, log1p, pow, sqrt};

use crate::error::{invalid, Error, Result};

pub type NormFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A symmetric, convex, positively homogeneous function on the positive quadrant.
#[derive(Clone)]
pub enum NormSpec {
    Lp { p: f64 },
    Linf,
    /// `theta * max + (1 - theta) * min`, `theta >= 1/2`.
    ThetaMix { theta: f64 },
    /// `sqrt(v' S^-1 v)` for the unit-diagonal correlation matrix `S`.
    Mahalanobis { rho: f64 },
    Custom { label: String, nu: NormFn },
    /// Values of `nu(z, 1 - z)` on an increasing grid of `z` in `[0, 1]`,
    /// linearly interpolated and extended by homogeneity.
    Tabulated(TabulatedNorm),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedNorm {
    z: Vec<f64>,
    nu: Vec<f64>,
}

impl TabulatedNorm {
    pub fn new(z: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if z.len() != nu.len() || z.len() < 3 {
            return Err(Error::NotANorm(String::from("table needs at least 3 matching (z, nu) pairs")));
        }
        if fabs(z[0]) > 1e-12 || fabs(z[z.len() - 1] - 1.0) > 1e-12 {
            return Err(Error::NotANorm(String::from("table must span z in [0, 1]")));
        }
        if z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NotANorm(String::from("z grid must be strictly increasing")));
        }
        if nu.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::NotANorm(String::from("nu values must be finite and positive")));
        }
        Ok(Self { z, nu })
    }

    fn on_simplex(&self, z: f64) -> f64 {
        let n = self.z.len();
        if z <= self.z[0] {
            return self.nu[0];
        }
        if z >= self.z[n - 1] {
            return self.nu[n - 1];
        }
        let i = self.z.partition_point(|&v| v <= z) - 1;
        let t = (z - self.z[i]) / (self.z[i + 1] - self.z[i]);
        self.nu[i] + t * (self.nu[i + 1] - self.nu[i])
    }
}

impl fmt::Debug for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Lp { p } => write!(f, "Lp {{ p: {p} }}"),
            NormSpec::Linf => write!(f, "Linf"),
            NormSpec::ThetaMix { theta } => write!(f, "ThetaMix {{ theta: {theta} }}"),
            NormSpec::Mahalanobis { rho } => write!(f, "Mahalanobis {{ rho: {rho} }}"),
            NormSpec::Custom { label, .. } => write!(f, "Custom({label})"),
            NormSpec::Tabulated(t) => write!(f, "Tabulated({} points)", t.z.len()),
        }
    }
}

impl NormSpec {
    /// Raw (unstandardized) value.
    pub fn raw(&self, x: f64, y: f64) -> f64 {
        match self {
            NormSpec::Lp { p } => {
                let m = x.max(y);
                if m == 0.0 {
                    return 0.0;
                }
                let r = x.min(y) / m;
                m * pow(1.0 + pow(r, *p), 1.0 / p)
            }
            NormSpec::Linf => x.max(y),
            NormSpec::ThetaMix { theta } => theta * x.max(y) + (1.0 - theta) * x.min(y),
            NormSpec::Mahalanobis { rho } => sqrt((x * x - 2.0 * rho * x * y + y * y) / (1.0 - rho * rho)),
            NormSpec::Custom { nu, .. } => nu(x, y),
            NormSpec::Tabulated(t) => {
                let s = x + y;
                if s == 0.0 {
                    0.0
                } else {
                    s * t.on_simplex(x / s)
                }
            }
        }
    }

    fn check_params(&self) -> Result<()> {
        match self {
            NormSpec::Lp { p } if !(p.is_finite() && *p >= 1.0) => {
                Err(invalid(format!("Lp norm requires p >= 1, got {p}")))
            }
            NormSpec::ThetaMix { theta } if !(theta.is_finite() && *theta >= 0.5) => {
                Err(invalid(format!("theta must be >= 1/2, got {theta}")))
            }
            NormSpec::Mahalanobis { rho } if !(rho.is_finite() && *rho > -1.0 && *rho < 1.0) => {
                Err(invalid(format!("rho must lie in (-1, 1), got {rho}")))
            }
            _ => Ok(()),
        }
    }

    fn is_catalog(&self) -> bool {
        !matches!(self, NormSpec::Custom { .. } | NormSpec::Tabulated(_))
    }
}

/// A norm rescaled so that `nu >= max` with equality somewhere on the sphere.
#[derive(Clone, Debug)]
pub struct Norm {
    spec: NormSpec,
    scale: f64,
}

const VALIDATION_GRID: usize = 400;

/// Validate a norm and rescale it so that `tau` attains 1.
pub fn standardize(spec: NormSpec) -> Result<Norm> {
    spec.check_params()?;
    let scale = match &spec {
        NormSpec::Lp { .. } | NormSpec::Linf => 1.0,
        NormSpec::ThetaMix { theta } => theta.min(1.0),
        NormSpec::Mahalanobis { rho } => {
            if *rho >= 0.0 {
                1.0
            } else {
                1.0 / sqrt(1.0 - rho * rho)
            }
        }
        _ => {
            validate_shape(&spec)?;
            min_on_max_sphere(&spec)
        }
    };
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::NotANorm(String::from("norm vanishes on the max-sphere")));
    }
    Ok(Norm { spec, scale })
}

fn validate_shape(spec: &NormSpec) -> Result<()> {
    let n = VALIDATION_GRID;
    let vals: Vec<f64> = (0..=n)
        .map(|i| {
            let z = i as f64 / n as f64;
            spec.raw(z, 1.0 - z)
        })
        .collect();
    for (i, v) in vals.iter().enumerate() {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::NotANorm(format!("nu(z, 1 - z) not positive at z = {}", i as f64 / n as f64)));
        }
        let mirror = vals[n - i];
        if fabs(v - mirror) > 1e-9 * v.max(mirror) {
            return Err(Error::NotANorm(String::from("nu is not symmetric")));
        }
    }
    for w in vals.windows(3) {
        if w[1] > 0.5 * (w[0] + w[2]) + 1e-12 * w[1] {
            return Err(Error::NotANorm(String::from("nu is not convex")));
        }
    }
    for &(x, y) in &[(0.3, 0.9), (1.0, 0.25), (2.0, 2.0)] {
        let a = spec.raw(3.0 * x, 3.0 * y);
        let b = 3.0 * spec.raw(x, y);
        if fabs(a - b) > 1e-9 * b {
            return Err(Error::NotANorm(String::from("nu is not positively homogeneous")));
        }
    }
    Ok(())
}

// min over y in [0, 1] of nu(1, y); convex in y so golden section applies.
fn min_on_max_sphere(spec: &NormSpec) -> f64 {
    let f = |y: f64| spec.raw(1.0, y);
    let n = 200;
    let mut best: usize = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..=n {
        let v = f(i as f64 / n as f64);
        if v < best_v {
            best_v = v;
            best = i;
        }
    }
    let lo = (best.saturating_sub(1)) as f64 / n as f64;
    let hi = ((best + 1).min(n)) as f64 / n as f64;
    let (_, v) = golden_min(f, lo, hi, 1e-15);
    v.min(best_v)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const R: f64 = 0.618_033_988_749_894_9;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

impl Norm {
    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    /// Multiplier applied to the raw norm (`nu* = nu / scale`).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.spec.raw(x, y) / self.scale
    }

    pub fn tau(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        match &self.spec {
            NormSpec::Linf if z >= 0.5 => 1.0,
            _ => 1.0 - self.one_minus_tau(z),
        }
    }

    /// `1 - tau(z)` with full relative precision near the plateau for the
    /// catalog norms.
    pub fn one_minus_tau(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 1.0;
        }
        let w = 1.0 - z;
        match &self.spec {
            NormSpec::Lp { p } => {
                if z >= 0.5 {
                    let u = pow(w / z, *p);
                    -expm1(-log1p(u) / p)
                } else {
                    1.0 - z / self.eval(z, w)
                }
            }
            NormSpec::Linf => {
                if z >= 0.5 {
                    0.0
                } else {
                    (1.0 - 2.0 * z) / w
                }
            }
            NormSpec::ThetaMix { theta } => {
                let t = *theta;
                if t >= 1.0 {
                    if z <= 0.5 {
                        t * (1.0 - 2.0 * z) / (t - (2.0 * t - 1.0) * z)
                    } else {
                        (t - 1.0) * (2.0 * z - 1.0) / ((1.0 - t) + (2.0 * t - 1.0) * z)
                    }
                } else {
                    let c = (1.0 - t) / t;
                    if z >= 0.5 {
                        c * w / (z + c * w)
                    } else {
                        (w - z + c * z) / (w + c * z)
                    }
                }
            }
            NormSpec::Mahalanobis { rho } => {
                let r = *rho;
                let nu = self.eval(z, w);
                let excess = if r >= 0.0 {
                    let d = r * z - w;
                    d * d / ((1.0 - r * r) * (nu + z))
                } else {
                    w * (w - 2.0 * r * z) / (nu + z)
                };
                excess / nu
            }
            _ => {
                let nu = self.eval(z, w);
                (nu - z) / nu
            }
        }
    }

    /// Interval `[lo, hi]` of `z` with `1 - tau(z) <= deficit`, given the
    /// plateau `[b1, b2]`.
    pub fn level_set(&self, deficit: f64, b1: f64, b2: f64) -> (f64, f64) {
        if deficit >= 1.0 {
            return (0.0, 1.0);
        }
        let g = |z: f64| self.one_minus_tau(z);
        // increasing piece on [0, b1]: g decreasing
        let lo = {
            let (mut a, mut b) = (0.0, b1);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if !(m > a && m < b) {
                    break;
                }
                if g(m) <= deficit {
                    b = m;
                } else {
                    a = m;
                }
            }
            b
        };
        let hi = if g(1.0) <= deficit {
            1.0
        } else {
            let (mut a, mut b) = (b2, 1.0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if !(m > a && m < b) {
                    break;
                }
                if g(m) <= deficit {
                    a = m;
                } else {
                    b = m;
                }
            }
            a
        };
        (lo, hi)
    }
}

/// Shape summary of `tau` on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormProfile {
    /// `tau(1/2)`.
    pub zeta: f64,
    /// Plateau `{tau = 1} = [b1, b2]`, always inside `[1/2, 1]`.
    pub b1: f64,
    pub b2: f64,
    /// `1 - tau(b1 - s)` is regularly varying with index `1 / gamma_left`.
    pub gamma_left: Option<f64>,
    /// Same to the right of `b2`; absent when `b2 = 1`.
    pub gamma_right: Option<f64>,
    /// One-sided slope of the increasing piece at 1/2 (only when `b1 = b2 = 1/2`).
    pub slope_increasing: Option<f64>,
    /// One-sided slope of the decreasing piece at 1/2 (negative).
    pub slope_decreasing: Option<f64>,
}

impl NormProfile {
    pub fn is_pointed(&self) -> bool {
        self.b1 == self.b2
    }
}

const PLATEAU_TOL: f64 = 1e-12;
const PLATEAU_TOL_FINE: f64 = 1e-14;
const MIN_PLATEAU_WIDTH: f64 = 1e-9;
const REG_POINTS: usize = 20;
const REG_LO: f64 = 1e-8;
const REG_HI: f64 = 1e-3;
const MIN_R2: f64 = 0.999;
const NOISE_FLOOR: f64 = 1e-11;
const DIFF_STEPS: [f64; 3] = [1e-4, 5e-5, 2.5e-5];

/// Profile of a standardized norm: closed form for the catalog, numeric otherwise.
pub fn profile(norm: &Norm) -> Result<NormProfile> {
    match profile_analytic(norm.spec()) {
        Some(p) => Ok(p),
        None => profile_numeric(norm),
    }
}

/// Closed-form profile for the catalog norms.
pub fn profile_analytic(spec: &NormSpec) -> Option<NormProfile> {
    if !spec.is_catalog() || spec.check_params().is_err() {
        return None;
    }
    let linf = NormProfile {
        zeta: 1.0,
        b1: 0.5,
        b2: 1.0,
        gamma_left: Some(1.0),
        gamma_right: None,
        slope_increasing: None,
        slope_decreasing: None,
    };
    let p = match spec {
        NormSpec::Lp { p } => NormProfile {
            zeta: pow(2.0, -1.0 / p),
            b1: 1.0,
            b2: 1.0,
            gamma_left: Some(1.0 / p),
            gamma_right: None,
            slope_increasing: None,
            slope_decreasing: None,
        },
        NormSpec::Linf => linf,
        NormSpec::ThetaMix { theta } => {
            let t = *theta;
            if t == 1.0 {
                linf
            } else if t > 1.0 {
                NormProfile {
                    zeta: 1.0,
                    b1: 0.5,
                    b2: 0.5,
                    gamma_left: Some(1.0),
                    gamma_right: Some(1.0),
                    slope_increasing: Some(4.0 * t),
                    slope_decreasing: Some(-4.0 * (t - 1.0)),
                }
            } else {
                NormProfile {
                    zeta: t,
                    b1: 1.0,
                    b2: 1.0,
                    gamma_left: Some(1.0),
                    gamma_right: None,
                    slope_increasing: None,
                    slope_decreasing: None,
                }
            }
        }
        NormSpec::Mahalanobis { rho } => {
            let r = *rho;
            if r > 0.0 {
                let b = 1.0 / (1.0 + r);
                NormProfile {
                    zeta: sqrt(0.5 * (1.0 + r)),
                    b1: b,
                    b2: b,
                    gamma_left: Some(0.5),
                    gamma_right: Some(0.5),
                    slope_increasing: None,
                    slope_decreasing: None,
                }
            } else {
                NormProfile {
                    zeta: 1.0 / sqrt(2.0 * (1.0 - r)),
                    b1: 1.0,
                    b2: 1.0,
                    gamma_left: Some(if r == 0.0 { 0.5 } else { 1.0 }),
                    gamma_right: None,
                    slope_increasing: None,
                    slope_decreasing: None,
                }
            }
        }
        _ => return None,
    };
    Some(p)
}

fn plateau(g: &dyn Fn(f64) -> f64, zmax: f64, tol: f64) -> (f64, f64) {
    let b1 = if g(0.5) <= tol {
        0.5
    } else {
        let (mut a, mut b) = (0.5, zmax);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if !(m > a && m < b) {
                break;
            }
            if g(m) <= tol {
                b = m;
            } else {
                a = m;
            }
        }
        b
    };
    let b2 = if g(1.0) <= tol {
        1.0
    } else {
        let (mut a, mut b) = (zmax, 1.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if !(m > a && m < b) {
                break;
            }
            if g(m) <= tol {
                a = m;
            } else {
                b = m;
            }
        }
        a
    };
    (b1, b2)
}

/// Numeric profile; used for custom norms and to cross-check the catalog.
pub fn profile_numeric(norm: &Norm) -> Result<NormProfile> {
    let g = |z: f64| norm.one_minus_tau(z);
    let zeta = norm.tau(0.5);
    // locate the minimum of 1 - tau on [1/2, 1]
    let n = 400;
    let mut best: usize = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..=n {
        let v = g(0.5 + 0.5 * i as f64 / n as f64);
        if v < best_v {
            best_v = v;
            best = i;
        }
    }
    let lo = 0.5 + 0.5 * (best.saturating_sub(1)) as f64 / n as f64;
    let hi = 0.5 + 0.5 * ((best + 1).min(n)) as f64 / n as f64;
    let (zg, vg) = golden_min(g, lo, hi, 1e-15);
    let (zmax, vmax) = if vg < best_v {
        (zg, vg)
    } else {
        (0.5 + 0.5 * best as f64 / n as f64, best_v)
    };
    if vmax > PLATEAU_TOL {
        return Err(Error::ProfileUnresolved(format!(
            "tau does not reach 1 (max deficit {vmax:e}); the norm is not standardized"
        )));
    }
    let (c1, c2) = plateau(&g, zmax, PLATEAU_TOL);
    let (f1, f2) = plateau(&g, zmax, PLATEAU_TOL_FINE.max(vmax));
    let coarse = c2 - c1;
    let fine = f2 - f1;
    // A genuine flat piece keeps its width when the tolerance shrinks; a
    // tangential touch contracts with it.
    let (b1, b2) = if fine >= MIN_PLATEAU_WIDTH && fine >= 0.9 * coarse {
        (f1, f2)
    } else if f1 <= 0.5 {
        (0.5, 0.5)
    } else if f2 >= 1.0 {
        (1.0, 1.0)
    } else {
        let m = 0.5 * (f1 + f2);
        (m, m)
    };

    let gamma_left = Some(regress_gamma(&|s| g(b1 - s), b1)?);
    let gamma_right = if b2 < 1.0 {
        Some(regress_gamma(&|s| g(b2 + s), 1.0 - b2)?)
    } else {
        None
    };
    let (slope_increasing, slope_decreasing) = if b1 == 0.5 && b2 == 0.5 {
        let inc = richardson(&|h| g(0.5 - h) / h);
        let dec = richardson(&|h| -g(0.5 + h) / h);
        (Some(inc), Some(dec))
    } else {
        (None, None)
    };
    Ok(NormProfile {
        zeta,
        b1,
        b2,
        gamma_left,
        gamma_right,
        slope_increasing,
        slope_decreasing,
    })
}

fn regress_gamma(deficit: &dyn Fn(f64) -> f64, room: f64) -> Result<f64> {
    let mut xs = Vec::with_capacity(REG_POINTS);
    let mut ys = Vec::with_capacity(REG_POINTS);
    let ratio = log(REG_HI / REG_LO) / (REG_POINTS - 1) as f64;
    for i in 0..REG_POINTS {
        let s = REG_LO * libm::exp(ratio * i as f64);
        if s >= room {
            continue;
        }
        let d = deficit(s);
        if !(d > NOISE_FLOOR) || !d.is_finite() {
            continue;
        }
        xs.push(log(s));
        ys.push(log(d));
    }
    if xs.len() < 8 {
        return Err(Error::ProfileUnresolved(String::from(
            "too few resolvable points to estimate the approach rate to the plateau",
        )));
    }
    let (slope, r2) = linear_fit(&xs, &ys);
    if r2 < MIN_R2 || !(slope > 0.0) {
        return Err(Error::ProfileUnresolved(format!(
            "approach to the plateau is not regularly varying (R^2 = {r2:.6})"
        )));
    }
    Ok(1.0 / slope)
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

fn richardson(d: &dyn Fn(f64) -> f64) -> f64 {
    let [h0, h1, h2] = DIFF_STEPS;
    let (d0, d1, d2) = (d(h0), d(h1), d(h2));
    let r0 = (h0 * d1 - h1 * d0) / (h0 - h1);
    let r1 = (h1 * d2 - h2 * d1) / (h1 - h2);
    (h0 * r1 - h2 * r0) / (h0 - h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn catalog_zeta() {
        let p = profile(&standardize(NormSpec::Lp { p: 2.0 }).unwrap()).unwrap();
        assert!((p.zeta - libm::sqrt(0.5)).abs() < 1e-15);
        assert_eq!((p.b1, p.b2), (1.0, 1.0));
        let p = profile(&standardize(NormSpec::ThetaMix { theta: 2.0 }).unwrap()).unwrap();
        assert_eq!(p.zeta, 1.0);
        assert_eq!(p.slope_increasing, Some(8.0));
        assert_eq!(p.slope_decreasing, Some(-4.0));
        let p = profile(&standardize(NormSpec::Mahalanobis { rho: 0.0 }).unwrap()).unwrap();
        assert!((p.zeta - libm::sqrt(0.5)).abs() < 1e-15);
    }

    #[test]
    fn tau_matches_direct_formula() {
        for spec in [
            NormSpec::Lp { p: 3.0 },
            NormSpec::ThetaMix { theta: 1.7 },
            NormSpec::ThetaMix { theta: 0.7 },
            NormSpec::Mahalanobis { rho: 0.4 },
            NormSpec::Mahalanobis { rho: -0.6 },
            NormSpec::Linf,
        ] {
            let n = standardize(spec).unwrap();
            for i in 1..100 {
                let z = i as f64 / 100.0;
                let direct = z / n.eval(z, 1.0 - z);
                assert!((n.tau(z) - direct).abs() < 1e-14, "{:?} at {z}", n.spec());
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(standardize(NormSpec::Lp { p: 0.5 }).is_err());
        assert!(standardize(NormSpec::ThetaMix { theta: 0.3 }).is_err());
        assert!(standardize(NormSpec::Mahalanobis { rho: 1.0 }).is_err());
        let concave = NormSpec::Custom {
            label: "concave".into(),
            nu: Arc::new(|x: f64, y: f64| libm::sqrt(x * y) + 0.5 * (x + y)),
        };
        assert!(matches!(standardize(concave), Err(Error::NotANorm(_))));
    }

    #[test]
    fn tabulated_l1_scaled() {
        let z: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let nu = vec![2.0; 11];
        let n = standardize(NormSpec::Tabulated(TabulatedNorm::new(z, nu).unwrap())).unwrap();
        assert!((n.scale() - 2.0).abs() < 1e-12);
        assert!((n.tau(0.3) - 0.3).abs() < 1e-12);
    }
}
