//! JSON model documents, version 1.
//!
//! A document is one of
//!
//! ```json
//! {"spec_version": 1, "radial": {"family": "weibull", "params": {"shape": 2}},
//!  "angular": {"kind": "constrained", "norm": {"kind": "theta_mix", "theta": 1.25},
//!              "z": {"family": "beta", "params": {"a": 1, "b": 1}}}}
//! {"spec_version": 1, "preset": "model2", "params": {"xi": 1, "alpha": 1}}
//! {"spec_version": 1, "classes": {"radial": {"kind": "weibull_type", ...},
//!                                 "angular": {...}, "pair": {"kind": "independent"}}}
//! ```
//!
//! The first two describe a full construction; the last works on tail classes only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use taildep_core::depcalc::{Coefficient, Moments, UnconstrainedInput};
use taildep_core::distmodel::{
    gaussian_factor, model1, model2, radial_from_generator, AngularModel, ConstructionSpec, Generator,
    UnivariateModel,
};
use taildep_core::normgeom::{NormSpec, TabulatedNorm};
use taildep_core::tailclass::TailClass;

use crate::error::CliError;

pub const SPEC_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Univariate {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Norm {
    Lp { p: f64 },
    Linf,
    ThetaMix { theta: f64 },
    Mahalanobis { rho: f64 },
    /// `nu(z, 1 - z)` tabulated on an increasing `z` grid.
    Tabulated { z: Vec<f64>, nu: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Angular {
    Constrained {
        norm: Norm,
        #[serde(default)]
        z: Option<Univariate>,
    },
    Independent { margin: Univariate },
    Comonotone { margin: Univariate },
    Gaussian { rho: f64, margin: Univariate },
}

/// How the minimum of the angular pair is obtained in a class-level document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Pair {
    Independent,
    Gaussian { rho: f64 },
    Explicit { min: TailClass },
    /// Angular pair on the unit sphere of `norm`; `z` defaults to uniform.
    Sphere {
        norm: Norm,
        #[serde(default)]
        z: Option<Univariate>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Classes {
    pub radial: TailClass,
    #[serde(default)]
    pub angular: Option<TailClass>,
    pub pair: Pair,
    #[serde(default)]
    pub chi_w: Option<Coefficient>,
    #[serde(default)]
    pub eta_w: Option<Coefficient>,
    #[serde(default)]
    pub tail_ratio_c: Option<f64>,
    #[serde(default)]
    pub moments: Option<Moments>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub spec_version: u32,
    #[serde(default)]
    pub radial: Option<Univariate>,
    #[serde(default)]
    pub angular: Option<Angular>,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub classes: Option<Classes>,
}

/// A parsed document.
pub enum Model {
    Construction(ConstructionSpec),
    Unconstrained(UnconstrainedInput),
    Constrained { radial: TailClass, angular: AngularModel },
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

struct ParamReader<'a> {
    what: &'a str,
    params: &'a BTreeMap<String, f64>,
}

impl ParamReader<'_> {
    fn req(&self, key: &str) -> Result<f64, CliError> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| bad(format!("{}: missing parameter `{key}`", self.what)))
    }

    fn or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn only(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(bad(format!("{}: unknown parameter `{k}` (expected {allowed:?})", self.what))),
            None => Ok(()),
        }
    }
}

fn family_key(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, '-' | '_' | ' '))
        .flat_map(|c| c.to_lowercase())
        .collect()
}

pub fn univariate(u: &Univariate) -> Result<UnivariateModel, CliError> {
    use UnivariateModel as M;
    let p = ParamReader {
        what: &u.family,
        params: &u.params,
    };
    let shape_scale = |p: &ParamReader| -> Result<(f64, f64), CliError> {
        p.only(&["shape", "scale"])?;
        Ok((p.req("shape")?, p.or("scale", 1.0)))
    };
    let loc_scale = |p: &ParamReader| -> Result<(f64, f64), CliError> {
        p.only(&["loc", "scale"])?;
        Ok((p.or("loc", 0.0), p.or("scale", 1.0)))
    };
    let m = match family_key(&u.family).as_str() {
        "exponential" => {
            p.only(&["rate"])?;
            M::Exponential { rate: p.or("rate", 1.0) }
        }
        "gamma" => {
            p.only(&["shape", "rate"])?;
            M::Gamma {
                shape: p.req("shape")?,
                rate: p.or("rate", 1.0),
            }
        }
        "weibull" => {
            let (shape, scale) = shape_scale(&p)?;
            M::Weibull { shape, scale }
        }
        "pareto" => {
            let (shape, scale) = shape_scale(&p)?;
            M::Pareto { shape, scale }
        }
        "frechet" => {
            let (shape, scale) = shape_scale(&p)?;
            M::Frechet { shape, scale }
        }
        "loglogistic" => {
            let (shape, scale) = shape_scale(&p)?;
            M::LogLogistic { shape, scale }
        }
        "normal" => {
            let (loc, scale) = loc_scale(&p)?;
            M::Normal { loc, scale }
        }
        "gumbel" => {
            let (loc, scale) = loc_scale(&p)?;
            M::Gumbel { loc, scale }
        }
        "logistic" => {
            let (loc, scale) = loc_scale(&p)?;
            M::Logistic { loc, scale }
        }
        "lognormal" => {
            p.only(&["mu", "sigma"])?;
            M::LogNormal {
                mu: p.or("mu", 0.0),
                sigma: p.or("sigma", 1.0),
            }
        }
        "gpd" | "generalizedpareto" => {
            p.only(&["xi", "scale"])?;
            M::Gpd {
                xi: p.req("xi")?,
                scale: p.or("scale", 1.0),
            }
        }
        "uniform" => {
            p.only(&["lo", "hi"])?;
            M::Uniform {
                lo: p.or("lo", 0.0),
                hi: p.or("hi", 1.0),
            }
        }
        "beta" => {
            p.only(&["a", "b"])?;
            M::Beta {
                a: p.req("a")?,
                b: p.req("b")?,
            }
        }
        "degenerate" | "point" => {
            p.only(&["value"])?;
            M::Degenerate { value: p.req("value")? }
        }
        "logisticspectral" => {
            p.only(&["theta"])?;
            M::LogisticSpectral { theta: p.req("theta")? }
        }
        "archimedeangumbel" => {
            p.only(&["theta"])?;
            radial_from_generator(Generator::Gumbel { theta: p.req("theta")? })?
        }
        "archimedeanclayton" => {
            p.only(&["theta"])?;
            radial_from_generator(Generator::Clayton { theta: p.req("theta")? })?
        }
        other => return Err(CliError::Invalid(format!("unknown distribution family `{other}`"))),
    };
    m.validate()?;
    Ok(m)
}

pub fn norm(n: &Norm) -> Result<NormSpec, CliError> {
    Ok(match n {
        Norm::Lp { p } => NormSpec::Lp { p: *p },
        Norm::Linf => NormSpec::Linf,
        Norm::ThetaMix { theta } => NormSpec::ThetaMix { theta: *theta },
        Norm::Mahalanobis { rho } => NormSpec::Mahalanobis { rho: *rho },
        Norm::Tabulated { z, nu } => NormSpec::Tabulated(TabulatedNorm::new(z.clone(), nu.clone())?),
    })
}

fn sphere(n: &Norm, z: &Option<Univariate>) -> Result<AngularModel, CliError> {
    let z = match z {
        Some(u) => univariate(u)?,
        None => UnivariateModel::Uniform { lo: 0.0, hi: 1.0 },
    };
    Ok(AngularModel::constrained(norm(n)?, z)?)
}

pub fn angular(a: &Angular) -> Result<AngularModel, CliError> {
    let m = match a {
        Angular::Constrained { norm, z } => sphere(norm, z)?,
        Angular::Independent { margin } => AngularModel::IndependentPair(univariate(margin)?),
        Angular::Comonotone { margin } => AngularModel::ComonotonePair(univariate(margin)?),
        Angular::Gaussian { rho, margin } => AngularModel::GaussianCopulaPair {
            rho: *rho,
            margin: univariate(margin)?,
        },
    };
    m.validate()?;
    Ok(m)
}

fn preset(name: &str, params: &BTreeMap<String, f64>) -> Result<ConstructionSpec, CliError> {
    let p = ParamReader { what: name, params };
    Ok(match family_key(name).as_str() {
        "model1" => {
            p.only(&["theta", "delta", "alpha"])?;
            model1(p.req("theta")?, p.req("delta")?, p.or("alpha", 1.0))?
        }
        "model2" => {
            p.only(&["xi", "alpha"])?;
            model2(p.req("xi")?, p.or("alpha", 1.0))?
        }
        "gaussianfactor" => {
            p.only(&["rho"])?;
            gaussian_factor(p.req("rho")?)?
        }
        other => return Err(bad(format!("unknown preset `{other}` (model1, model2, gaussian_factor)"))),
    })
}

fn classes(c: &Classes) -> Result<Model, CliError> {
    let need_w = || c.angular.clone().ok_or_else(|| bad("classes: `angular` tail class required"));
    let mut input = match &c.pair {
        Pair::Sphere { norm, z } => {
            return Ok(Model::Constrained {
                radial: c.radial.clone(),
                angular: sphere(norm, z)?,
            })
        }
        Pair::Independent => UnconstrainedInput::independent(c.radial.clone(), need_w()?),
        Pair::Gaussian { rho } => {
            if !(*rho > -1.0 && *rho < 1.0) {
                return Err(bad(format!("rho must lie in (-1, 1), got {rho}")));
            }
            UnconstrainedInput::gaussian_copula(c.radial.clone(), need_w()?, *rho)
        }
        Pair::Explicit { min } => UnconstrainedInput::new(c.radial.clone(), need_w()?, min.clone()),
    };
    if c.chi_w.is_some() {
        input.chi_w = c.chi_w.clone();
    }
    if c.eta_w.is_some() {
        input.eta_w = c.eta_w.clone();
    }
    input.tail_ratio_c = c.tail_ratio_c;
    if let Some(m) = c.moments {
        input.moments = m;
    }
    Ok(Model::Unconstrained(input))
}

impl Document {
    pub fn model(&self) -> Result<Model, CliError> {
        if self.spec_version != SPEC_VERSION {
            return Err(bad(format!(
                "unsupported spec_version {} (expected {SPEC_VERSION})",
                self.spec_version
            )));
        }
        match (&self.preset, &self.classes, &self.radial, &self.angular) {
            (Some(name), None, None, None) => Ok(Model::Construction(preset(name, &self.params)?)),
            (None, Some(c), None, None) if self.params.is_empty() => classes(c),
            (None, None, Some(r), Some(a)) if self.params.is_empty() => {
                Ok(Model::Construction(ConstructionSpec::new(univariate(r)?, angular(a)?)?))
            }
            _ => Err(bad(
                "document needs exactly one of: `radial` + `angular`, `preset` (+ `params`), or `classes`",
            )),
        }
    }

    pub fn construction(&self) -> Result<ConstructionSpec, CliError> {
        match self.model()? {
            Model::Construction(s) => Ok(s),
            _ => Err(bad("this command needs a full construction, not tail classes")),
        }
    }
}

pub fn parse(text: &str) -> Result<Document, CliError> {
    serde_json::from_str(text).map_err(|e| bad(format!("spec JSON: {e}")))
}

/// Preset document from `name` and `key=value` pairs.
pub fn preset_document(name: &str, params: &[(String, f64)]) -> Document {
    Document {
        spec_version: SPEC_VERSION,
        radial: None,
        angular: None,
        preset: Some(name.to_string()),
        params: params.iter().cloned().collect(),
        classes: None,
    }
}
