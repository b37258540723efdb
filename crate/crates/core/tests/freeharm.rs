use std::f64::consts::PI;
use std::sync::Arc;

use infband::freeharm::{
    deformed_typeb, evaluate_typeb, free_convolve, nu_j, nu_j_mass, typeb_convolve, wigner_nu, Density, FreeSum, GridSpec, Measure,
    PerturbationSpec, SignedMeasure, Transform, TypeBDistribution, WignerMomentParams, C,
};

/// Density of semicircle(1) ⊞ ½(δ₋₁ + δ₁), from the cubic satisfied by its
/// Cauchy transform.
fn semicircle_rademacher_density(t: f64) -> f64 {
    if t.abs() >= 27f64.sqrt() / 2.0 {
        return 0.0;
    }
    let a = 27.0 * t - 2.0 * t.powi(3) + 3.0 * 3f64.sqrt() * t.abs() * (27.0 - 4.0 * t * t).sqrt();
    let (ca, c2) = (a.cbrt(), 2f64.cbrt());
    if ca == 0.0 {
        return 0.0;
    }
    (ca / c2 - c2 * t * t / ca) / (2.0 * PI * 3f64.sqrt())
}

#[test]
fn closed_form_oracle_is_a_probability_density() {
    let h = 1e-4;
    let mass: f64 = (0..(5.2 / h) as usize).map(|i| semicircle_rademacher_density(-2.6 + (i as f64 + 0.5) * h) * h).sum();
    assert!((mass - 1.0).abs() < 1e-4, "{mass}");
    assert!((semicircle_rademacher_density(0.7) - semicircle_rademacher_density(-0.7)).abs() < 1e-14);
}

#[test]
fn semicircle_plus_rademacher_matches_closed_form() {
    let grid = GridSpec::new(-2.0, 2.0, 100).unwrap();
    let out = free_convolve(&Measure::semicircle(1.0).unwrap(), &Measure::rademacher(), &grid).unwrap();
    let worst = out.density.iter().map(|p| (p.density - semicircle_rademacher_density(p.x)).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "max error {worst}");
    assert!(out.max_residual < 1e-10);
    assert!(out.atoms.is_empty());
}

#[test]
fn residuals_and_herglotz_on_test_grid() {
    let sum = FreeSum::new(Arc::new(Measure::semicircle(1.0).unwrap()), Arc::new(Measure::rademacher()));
    for i in 0..50 {
        let x = -3.0 + 6.0 * (i as f64 + 0.5) / 50.0;
        for eta in [0.01, 0.1, 1.0] {
            let z = C::new(x, eta);
            let p = sum.checked_point(z).unwrap();
            assert!(p.residual_g < 1e-10 && p.residual_sum < 1e-10, "{z}: {p:?}");
            assert!(p.omega1.im >= eta * (1.0 - 1e-9) && p.omega2.im >= eta * (1.0 - 1e-9));
        }
    }
}

#[test]
fn semicircle_sum_moments() {
    let grid = GridSpec::new(-3.0, 3.0, 1200).unwrap();
    let out = free_convolve(&Measure::semicircle(0.6).unwrap(), &Measure::semicircle(0.8).unwrap(), &grid).unwrap();
    let h = grid.spacing();
    let catalan = [1.0, 1.0, 2.0, 5.0, 14.0];
    for (ell, cat) in catalan.iter().enumerate() {
        let m: f64 = out.density.iter().map(|p| p.x.powi(2 * ell as i32) * p.density * h).sum();
        assert!((m - cat).abs() < 1e-3 * cat.max(1.0), "order {}: {m}", 2 * ell);
    }
    // moments from a contour integral of z^k G(z) avoid the grid's edge error
    let radius = 3.0;
    let n = 256;
    for k in [2, 4, 6, 8] {
        let mut acc = C::new(0.0, 0.0);
        for j in 0..n {
            let phi = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            let z = C::from_polar(radius, phi);
            let g = if z.im > 0.0 { out.sum.cauchy_at(z).unwrap() } else { out.sum.cauchy_at(z.conj()).unwrap().conj() };
            acc += z.powu(k + 1) * g;
        }
        let moment = (acc / n as f64).re;
        let expected = catalan[k as usize / 2];
        assert!((moment - expected).abs() < 1e-4, "order {k}: {moment}");
    }
}

#[test]
fn deformed_semicircle_outlier() {
    let grid = GridSpec::new(-1.9, 1.9, 100).unwrap();
    let pert = PerturbationSpec::new(vec![2.0], None).unwrap();
    let report = deformed_typeb(1.0, &SignedMeasure::zero(), &pert, &grid).unwrap();
    assert!(report.max_discrepancy < 1e-3, "{}", report.max_discrepancy);
    let wide = GridSpec::new(-3.0, 3.0, 60).unwrap();
    let report = deformed_typeb(1.0, &SignedMeasure::zero(), &pert, &wide).unwrap();
    assert_eq!(report.atoms.len(), 1, "{:?}", report.atoms);
    assert!((report.atoms[0].loc - 2.5).abs() < 1e-6);
    assert!((report.atoms[0].weight - 1.0).abs() < 1e-6);
}

#[test]
fn delocalized_spike_doubles_the_contribution() {
    let grid = GridSpec::new(-3.0, 3.0, 60).unwrap();
    let pert = PerturbationSpec::new(vec![2.0], Some(2.0)).unwrap();
    let report = deformed_typeb(1.0, &SignedMeasure::zero(), &pert, &grid).unwrap();
    assert_eq!(report.atoms.len(), 1);
    assert!((report.atoms[0].weight - 2.0).abs() < 1e-6);
    let t: f64 = 0.3;
    let nu2 = nu_j(2.0, 1.0).unwrap().density(t);
    assert!((report.closed_form.density(t) + 2.0 * nu2).abs() < 1e-14);
}

#[test]
fn subcritical_spike_has_no_outlier() {
    let grid = GridSpec::new(-3.0, 3.0, 60).unwrap();
    let pert = PerturbationSpec::new(vec![0.5], None).unwrap();
    let report = deformed_typeb(1.0, &SignedMeasure::zero(), &pert, &grid).unwrap();
    assert!(report.atoms.is_empty(), "{:?}", report.atoms);
    assert!(report.closed_form.total_mass().abs() < 1e-9);
}

#[test]
fn goe_base_is_carried_additively() {
    let goe = wigner_nu(&WignerMomentParams::goe(1.0)).unwrap();
    let grid = GridSpec::new(-1.8, 1.8, 40).unwrap();
    let pert = PerturbationSpec::new(vec![2.0], None).unwrap();
    let report = deformed_typeb(1.0, &goe, &pert, &grid).unwrap();
    assert!(report.max_discrepancy < 1e-3, "{}", report.max_discrepancy);
    let t: f64 = 0.4;
    let expected = -0.5 / (PI * (4.0 - t * t).sqrt()) - nu_j(2.0, 1.0).unwrap().density(t);
    assert!((report.closed_form.density(t) - expected).abs() < 1e-14);
}

#[test]
fn empty_perturbation_returns_the_semicircle() {
    let grid = GridSpec::new(-1.5, 1.5, 10).unwrap();
    let report = deformed_typeb(1.0, &SignedMeasure::zero(), &PerturbationSpec::default(), &grid).unwrap();
    assert!(report.closed_form.is_zero());
    assert!(report.grid.iter().all(|p| p.density.abs() < 1e-9));
}

#[test]
fn typeb_output_has_zero_mass() {
    let dist = typeb_convolve(
        &TypeBDistribution::new(Measure::semicircle(1.0).unwrap(), SignedMeasure::zero()),
        &TypeBDistribution::new(Measure::dirac(0.0), SignedMeasure::from_atoms(&[(2.0, 1.0), (0.0, -1.0)])),
    );
    let grid = GridSpec::new(-3.0, 3.0, 3000).unwrap();
    let report = evaluate_typeb(&dist, &grid).unwrap();
    let h = grid.spacing();
    let ac: f64 = report.nu_density.iter().filter(|p| p.x.abs() < 2.0).map(|p| p.density * h).sum();
    let atoms: f64 = report.nu_atoms.iter().map(|a| a.weight).sum();
    // the inverse-square-root edges make the Riemann sum converge slowly
    assert!((ac + atoms).abs() < 2e-2, "ac {ac}, atoms {atoms}");
    let mu_mass: f64 = report.mu_density.iter().map(|p| p.density * h).sum();
    assert!((mu_mass - 1.0).abs() < 1e-4);
}

#[test]
fn compensator_mass_dichotomy() {
    for theta in [0.25f64, 0.5, 1.5, 2.0, 4.0] {
        for sign in [1.0, -1.0] {
            let t = sign * theta;
            let expected = if theta >= 1.0 { 1.0 } else { 0.0 };
            assert!((nu_j_mass(t, 1.0).unwrap() - expected).abs() < 1e-6, "θ = {t}");
        }
    }
    // at |θ| = σ the density is half the arcsine law
    for t in [1.0, -1.0] {
        assert!((nu_j_mass(t, 1.0).unwrap() - 0.5).abs() < 1e-6);
    }
}

#[test]
fn wigner_nu_pointwise() {
    let gue = wigner_nu(&WignerMomentParams::gue(1.0)).unwrap();
    let goe = wigner_nu(&WignerMomentParams::goe(1.0)).unwrap();
    for i in 0..100 {
        let t = -2.0 + 4.0 * (i as f64 + 0.5) / 100.0;
        assert!(gue.density(t).abs() < 1e-12);
        let johansson = 0.5 * (-1.0 / (PI * (4.0 - t * t).sqrt()));
        assert!((goe.density(t) - johansson).abs() < 1e-10);
    }
    for sigma2 in [0.5, 1.0, 3.0] {
        for params in [
            WignerMomentParams::goe(sigma2),
            WignerMomentParams { beta: 2, sigma2, s2: 0.3, alpha: 4.0 * sigma2 * sigma2 },
            WignerMomentParams { beta: 1, sigma2, s2: 0.0, alpha: sigma2 * sigma2 },
        ] {
            let nu = wigner_nu(&params).unwrap();
            let rule = infband::freeharm::quad::GaussLegendre::standard();
            let ac: f64 = nu.parts.iter().map(|c| c.coef * c.density.mass_by_quadrature(rule)).sum();
            let atoms: f64 = nu.atoms.iter().map(|a| a.weight).sum();
            assert!((ac + atoms).abs() < 1e-6, "{params:?}");
        }
    }
}

#[test]
fn cauchy_quadrature_agrees_for_semicircle() {
    let rule = infband::freeharm::quad::GaussLegendre::standard();
    let d = Density::Semicircle { sigma: 1.0 };
    let z = C::new(0.0, 3.0);
    assert!((d.cauchy(z) - d.cauchy_by_quadrature(z, rule)).norm() < 1e-10);
}
