mod common;

use infband::counting::{BandGeometry, DistanceMode};
use infband::moments::{
    correction_sandwich_holds, exact_trace_moment, full_band_moment, infinitesimal_correction_limit, mixed_trace_moment, regime_classify,
    trace_moment, two_color_geoms, Trend,
};
use infband::rmtsim::{esd_moments, sample_banded_gue, EnsembleSpec, Perturbation};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(geom: BandGeometry) -> EnsembleSpec {
    EnsembleSpec { band: geom, sigma2: 1.0, perturbation: Perturbation::None, seed: 0, reps: 0 }
}

#[test]
fn regular_second_moment_closed_form() {
    for (n, b) in [(50usize, 5usize), (100, 10), (9, 3)] {
        let m = exact_trace_moment(1, &BandGeometry::regular(n, b).unwrap(), 1.0).unwrap();
        let expected = BigRational::from_integer(n.into()) - BigRational::new((b * (b + 1)).into(), (2 * b + 1).into());
        assert_eq!(m.exact, expected);
    }
}

#[test]
fn full_band_is_harer_zagier() {
    // E Tr X⁴ = 2N + 1/N and E Tr X⁶ = 5N + 10/N for GUE normalised by N
    let n = 7usize;
    assert_eq!(full_band_moment(2, n).unwrap(), BigRational::new((2 * n * n + 1).into(), n.into()));
    assert_eq!(full_band_moment(3, n).unwrap(), BigRational::new((5 * n * n + 10).into(), n.into()));
    let periodic = exact_trace_moment(3, &BandGeometry::periodic(n, 3).unwrap(), 1.0).unwrap();
    assert_eq!(periodic.exact, full_band_moment(3, n).unwrap());
}

#[test]
fn odd_moments_vanish_and_variance_scales() {
    let g = BandGeometry::periodic(30, 4).unwrap();
    assert_eq!(trace_moment(5, &g, 2.0).unwrap().value(), 0.0);
    let one = trace_moment(4, &g, 1.0).unwrap().value();
    let two = trace_moment(4, &g, 2.0).unwrap().value();
    assert!((two - 4.0 * one).abs() < 1e-9 * two);
}

#[test]
fn sandwich_holds_in_finite_bands() {
    for ell in 2..=4 {
        for (n, b) in [(40, 3), (100, 10), (64, 8)] {
            assert!(correction_sandwich_holds(ell, &BandGeometry::periodic(n, b).unwrap()).unwrap());
        }
    }
}

#[test]
fn limit_matches_finite_correction_trend() {
    // Δ₄ = N/ξ² exactly for periodic bands, so b = c√N gives 1/(4c²) + O(1/b)
    let lim = infinitesimal_correction_limit(2, 1.0, 1.0, 1000, 3).unwrap();
    assert_eq!(lim.value, 0.25);
    let finite = exact_trace_moment(2, &BandGeometry::periodic(40_000, 200).unwrap(), 1.0).unwrap().correction();
    assert!((finite - 0.25).abs() < 5e-3, "{finite}");
}

#[test]
fn regimes() {
    let to_zero = regime_classify(2, &[(100, 20), (400, 80), (1600, 320)], 1.0).unwrap();
    assert_eq!(to_zero.trend, Trend::ToZero);
    let diverging = regime_classify(2, &[(400, 5), (1600, 5), (6400, 5)], 1.0).unwrap();
    assert_eq!(diverging.trend, Trend::Diverging);
    let stable = regime_classify(2, &[(100, 10), (400, 20), (1600, 40)], 1.0).unwrap();
    assert!(matches!(stable.trend, Trend::Stabilizing(v) if (v - 0.25).abs() < 0.01));
}

#[test]
fn simulated_fourth_moment_matches_exact() {
    let g = BandGeometry::periodic(60, 6).unwrap();
    let s = spec(g);
    let mut gen = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<f64> = (0..1500).map(|_| esd_moments(&sample_banded_gue(&s, &mut gen), 4).unwrap()[3]).collect();
    let (mean, se) = common::mean_and_stderr(&samples);
    let exact = exact_trace_moment(2, &g, 1.0).unwrap().value();
    assert!((mean - exact).abs() <= 4.0 * se, "{mean} ± {se} vs {exact}");
}

#[test]
fn simulated_mixed_moments_match_engine() {
    let n = 80;
    let geoms = two_color_geoms(n, 40, 40, DistanceMode::Periodic).unwrap();
    let mut gen = ChaCha8Rng::seed_from_u64(5);
    let mut aabb = Vec::new();
    let mut abab = Vec::new();
    for _ in 0..600 {
        let a = sample_banded_gue(&spec(geoms[0]), &mut gen).to_dmatrix();
        let b = sample_banded_gue(&spec(geoms[1]), &mut gen).to_dmatrix();
        let (ab, aa, bb) = (&a * &b, &a * &a, &b * &b);
        aabb.push((&aa * &bb).trace().re);
        abab.push((&ab * &ab).trace().re);
    }
    for (colors, xs) in [([1, 1, 2, 2], aabb), ([1, 2, 1, 2], abab)] {
        let (mean, se) = common::mean_and_stderr(&xs);
        let exact = mixed_trace_moment(&colors, &geoms, 1.0).unwrap();
        assert!((mean - exact).abs() <= 4.0 * se, "{colors:?}: {mean} ± {se} vs {exact}");
    }
}

#[test]
fn mixed_moment_rejects_odd_color_counts() {
    let geoms = two_color_geoms(20, 2, 3, DistanceMode::Periodic).unwrap();
    assert_eq!(mixed_trace_moment(&[1, 2, 2], &geoms, 1.0).unwrap(), 0.0);
    assert!(mixed_trace_moment(&[1, 3], &geoms, 1.0).is_err());
}
