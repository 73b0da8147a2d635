use taildep_core::depcalc::*;
use taildep_core::distmodel::{AngularModel, UnivariateModel};
use taildep_core::normgeom::NormSpec;
use taildep_core::tailclass::TailClass;

const EPS: f64 = 1e-12;

fn close(c: &Coefficient, want: f64, tol: f64) {
    match c.value() {
        Some(v) => assert!((v - want).abs() <= tol, "got {v}, want {want}"),
        None => panic!("expected {want}, got {c}"),
    }
}

fn sphere(norm: NormSpec) -> AngularModel {
    AngularModel::constrained(norm, UnivariateModel::Uniform { lo: 0.0, hi: 1.0 }).unwrap()
}

fn run(radial: RadialTail, ang: &AngularModel) -> DependenceSummary {
    coefficients_constrained(&radial, ang.norm_profile().unwrap(), ang.prob_at_upper(), Some(ang)).unwrap()
}

fn wt(alpha: f64, beta: f64) -> TailClass {
    TailClass::WeibullType {
        alpha,
        beta,
        gamma: 0.0,
        ell_limit: Some(1.0),
    }
}

fn lwt(alpha: f64, beta: f64) -> TailClass {
    TailClass::LogWeibullType {
        alpha,
        beta,
        gamma: 0.0,
        ell_limit: Some(1.0),
    }
}

fn rv(alpha: f64) -> TailClass {
    TailClass::RegVarInf { alpha, beta: Some(0.0) }
}

fn nw(alpha: f64) -> TailClass {
    TailClass::NegWeibull {
        endpoint: 1.0,
        alpha,
        ell_limit: Some(1.0),
    }
}

fn sh() -> TailClass {
    TailClass::SuperHeavy {
        log_class: Box::new(rv(1.0)),
    }
}

#[test]
fn linf_sphere_puts_half_mass_on_upper_edge() {
    assert!((sphere(NormSpec::Linf).prob_at_upper() - 0.5).abs() < 1e-12);
    assert_eq!(sphere(NormSpec::ThetaMix { theta: 2.0 }).prob_at_upper(), 0.0);
}

#[test]
fn constrained_rows_across_norm_columns() {
    let theta = 2.0;
    let mix_chi = 2.0 * (theta - 1.0) / (2.0 * theta - 1.0);
    let lnorm = UnivariateModel::LogNormal { mu: 0.0, sigma: 1.0 }.tail_class().unwrap();
    let expo = UnivariateModel::Exponential { rate: 1.0 }.tail_class().unwrap();
    let unif = UnivariateModel::Uniform { lo: 0.0, hi: 1.0 }.tail_class().unwrap();
    // (radial, eta on L_p as a function of p, None = not defined)
    type Row = (RadialTail, Box<dyn Fn(f64) -> Option<f64>>, Option<f64>);
    let rows: Vec<Row> = vec![
        (RadialTail::from_class(&lnorm), Box::new(|_| Some(1.0)), Some(1.0)),
        (RadialTail::from_class(&wt(1.0, 1.5)), Box::new(|p| Some(2f64.powf(-1.5 / p))), Some(1.0)),
        (RadialTail::from_class(&expo), Box::new(|p| Some(2f64.powf(-1.0 / p))), Some(1.0)),
        (RadialTail::from_class(&wt(0.5, 2.0)), Box::new(|p| Some(2f64.powf(-2.0 / p))), Some(1.0)),
        (
            RadialTail::Gumbel {
                endpoint: None,
                delta: Some(f64::INFINITY),
            },
            Box::new(|_| Some(0.0)),
            Some(1.0),
        ),
        (RadialTail::from_class(&TailClass::GumbelGeneric { endpoint: Some(1.0) }), Box::new(|_| None), Some(1.0)),
        (RadialTail::from_class(&nw(2.0)), Box::new(|_| None), Some(2.0 / 3.0)),
        (RadialTail::from_class(&unif), Box::new(|_| None), Some(0.5)),
    ];
    for (radial, lp_eta, linf_eta) in &rows {
        for p in [1.5, 2.0, 3.0] {
            let s = run(*radial, &sphere(NormSpec::Lp { p }));
            close(&s.chi, 0.0, EPS);
            match lp_eta(p) {
                Some(e) => close(&s.eta, e, EPS),
                None => assert_eq!(s.eta, Coefficient::NotDefined, "{radial:?}"),
            }
        }
        let s = run(*radial, &sphere(NormSpec::Linf));
        close(&s.chi, 0.0, EPS);
        close(&s.eta, linf_eta.unwrap(), EPS);
        let s = run(*radial, &sphere(NormSpec::ThetaMix { theta }));
        close(&s.chi, mix_chi, 1e-9);
        close(&s.eta, 1.0, EPS);
    }
}

#[test]
fn regularly_varying_row_has_positive_chi_and_unit_eta() {
    let radial = RadialTail::Frechet { alpha: 1.0 };
    // W1 = Z, W2 = 1 - Z with uniform Z: E min = 1/4, E W = 1/2
    let s = run(radial, &sphere(NormSpec::Lp { p: 1.0 }));
    close(&s.chi, 0.5, 1e-9);
    close(&s.eta, 1.0, EPS);
    for norm in [NormSpec::Lp { p: 2.0 }, NormSpec::Linf, NormSpec::ThetaMix { theta: 1.5 }] {
        let s = run(radial, &sphere(norm));
        assert!(s.chi.value().unwrap() > 0.0);
        close(&s.eta, 1.0, EPS);
    }
}

#[test]
fn generic_gumbel_needs_auxiliary_function() {
    let s = run(
        RadialTail::from_class(&TailClass::GumbelGeneric { endpoint: None }),
        &sphere(NormSpec::Lp { p: 2.0 }),
    );
    close(&s.chi, 0.0, EPS);
    assert!(s.eta.is_unknown());
}

#[test]
fn slowly_varying_radial_gives_full_dependence() {
    let s = chi_frechet(0.0, &sphere(NormSpec::Lp { p: 2.0 })).unwrap();
    close(&s.0, 1.0, EPS);
}

#[test]
fn logistic_spectral_chi() {
    let ang =
        AngularModel::constrained(NormSpec::Lp { p: 1.0 }, UnivariateModel::LogisticSpectral { theta: 0.5 }).unwrap();
    let (chi, _) = chi_frechet(1.0, &ang).unwrap();
    close(&chi, 2.0 - 2f64.sqrt(), 1e-8);
    let v = exponent_function(&ang, 1.0, 1.0, 1.0).unwrap();
    assert!((v - 2f64.sqrt()).abs() < 1e-8, "{v}");
}

fn indep(r: TailClass, w: TailClass) -> DependenceSummary {
    coefficients_unconstrained(&UnconstrainedInput::independent(r, w)).unwrap()
}

fn is_star(s: &DependenceSummary) {
    close(&s.chi, 0.0, EPS);
    close(&s.eta, 0.5, EPS);
}

#[test]
fn independent_superheavy_row() {
    for w in [rv(2.0), lwt(1.0, 2.0), wt(1.0, 1.0), nw(1.0)] {
        let s = indep(sh(), w);
        close(&s.chi, 1.0, EPS);
        close(&s.eta, 1.0, EPS);
    }
    let mut input = UnconstrainedInput::independent(sh(), sh());
    input.tail_ratio_c = Some(3.0);
    let s = coefficients_unconstrained(&input).unwrap();
    close(&s.chi, 0.25, EPS);
}

#[test]
fn independent_starred_cells() {
    is_star(&indep(rv(1.0), sh()));
    for r in [lwt(1.0, 2.0), wt(1.0, 1.5), nw(2.0)] {
        is_star(&indep(r.clone(), sh()));
        is_star(&indep(r.clone(), rv(3.0)));
    }
    is_star(&indep(nw(2.0), lwt(1.0, 2.0)));
    is_star(&indep(nw(2.0), wt(1.0, 2.0)));
}

#[test]
fn independent_regularly_varying_row() {
    // lighter angular tail: moment ratio
    for w in [lwt(1.0, 2.0), wt(1.0, 1.0), nw(1.0), rv(5.0)] {
        let mut input = UnconstrainedInput::independent(rv(2.0), w);
        input.moments = Moments {
            r_alpha: Some(f64::INFINITY),
            w_alpha: Some(0.5),
            wmin_alpha: Some(0.2),
        };
        let s = coefficients_unconstrained(&input).unwrap();
        close(&s.chi, 0.4, EPS);
        close(&s.eta, 1.0, EPS);
    }
    // heavier angular tail
    let s = indep(rv(3.0), rv(2.0));
    close(&s.chi, 0.0, EPS);
    close(&s.eta, 2.0 / 3.0, EPS);
    is_star(&indep(rv(5.0), rv(2.0)));
    assert!(indep(rv(4.0), rv(2.0)).eta.is_unknown());
    // same index with pure Pareto tails
    let s = indep(rv(2.0), rv(2.0));
    close(&s.chi, 0.0, EPS);
    close(&s.eta, 1.0, EPS);
}

#[test]
fn independent_log_weibull_row() {
    let s = indep(lwt(1.0, 2.0), lwt(1.0, 2.0));
    close(&s.chi, 0.0, EPS);
    // eta_W * ((2 + 1) / (1 + 1))^(beta - 1) with eta_W = 1/2
    close(&s.eta, 0.75, EPS);
    let s = indep(lwt(1.0, 2.0), nw(1.0));
    close(&s.chi, 0.0, EPS);
    close(&s.eta, 1.0, EPS);
    let s = indep(lwt(1.0, 2.0), wt(1.0, 1.0));
    assert!(s.chi.is_unknown() && s.eta.is_unknown());
}

#[test]
fn independent_weibull_row() {
    for (br, bw) in [(1.0, 1.0), (2.0, 1.0), (0.5, 3.0)] {
        let s = indep(wt(1.0, br), wt(2.0, bw));
        close(&s.chi, 0.0, EPS);
        close(&s.eta, 2f64.powf(-br / (br + bw)), EPS);
    }
    let s = indep(wt(1.0, 1.0), nw(3.0));
    close(&s.chi, 0.0, EPS);
    close(&s.eta, 1.0, EPS);
    let s = indep(wt(1.0, 1.0), lwt(1.0, 2.0));
    assert!(s.chi.is_unknown() && s.eta.is_unknown());
}

#[test]
fn independent_negative_weibull_row() {
    for (ar, aw) in [(1.0, 1.0), (2.0, 0.5), (0.3, 4.0)] {
        let s = indep(nw(ar), nw(aw));
        close(&s.chi, 0.0, EPS);
        close(&s.eta, (aw + ar) / (2.0 * aw + ar), EPS);
    }
}

#[test]
fn log_weibull_with_gaussian_angular() {
    for rho in [0.0, 0.4, -0.3] {
        let mut input = UnconstrainedInput::gaussian_copula(lwt(0.5, 2.0), lwt(0.5, 2.0), rho);
        input.wmin_class = lwt(1.0 / (1.0 + rho), 2.0);
        let s = coefficients_unconstrained(&input).unwrap();
        close(&s.eta, (3.0 + rho) / 4.0, 1e-12);
    }
}

#[test]
fn weibull_radial_with_gaussian_angular() {
    for (rho, br) in [(0.3, 1.0), (-0.5, 2.0), (0.0, 0.7)] {
        let input = UnconstrainedInput::gaussian_copula(wt(1.0, br), wt(0.5, 2.0), rho);
        let s = coefficients_unconstrained(&input).unwrap();
        close(&s.chi, 0.0, EPS);
        close(&s.eta, ((1.0 + rho) / 2.0).powf(br / (br + 2.0)), 1e-12);
    }
}

#[test]
fn superheavy_angular_between_radial_and_minimum() {
    let sh_of = |a: f64, b: f64| TailClass::SuperHeavy {
        log_class: Box::new(wt(a, b)),
    };
    let c = 0.5;
    // log W: exp(-x^b); log R: exp(-(1+c)x^b); log of min: exp(-2x^b)
    let mut input = UnconstrainedInput::new(sh_of(1.0 + c, 0.5), sh_of(1.0, 0.5), sh_of(2.0, 0.5));
    input.chi_w = Some(Coefficient::defined(0.0));
    let s = coefficients_unconstrained(&input).unwrap();
    close(&s.chi, 0.0, EPS);
    close(&s.eta, 1.0 / (1.0 + c), 1e-12);
}

#[test]
fn conflicting_side_data_is_rejected() {
    let mut input = UnconstrainedInput::independent(wt(1.0, 1.0), wt(1.0, 1.0));
    input.eta_w = Some(Coefficient::defined(0.7));
    assert!(coefficients_unconstrained(&input).is_err());
}

#[test]
fn minimum_heavier_than_margin_is_rejected() {
    let input = UnconstrainedInput::new(wt(1.0, 1.0), wt(2.0, 1.0), wt(1.0, 1.0));
    assert!(coefficients_unconstrained(&input).is_err());
}

#[test]
fn boundary_is_unknown_not_guessed() {
    let input = UnconstrainedInput::new(rv(2.0), rv(1.0), rv(2.0));
    let s = coefficients_unconstrained(&input).unwrap();
    assert!(s.eta.is_unknown());
}
