//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the report is always printed by `cargo test`.
//! Exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use infband::combinat::{
    catalan, cycles_gamma_pi, enumerate_pair_partitions, epsilon_one_closed_form, genus_census, is_noncrossing, pair_partition_count,
    PairPartition,
};
use infband::counting::{count_admissible, integral_i, BandGeometry, DistanceMode};
use infband::freeharm::{
    deformed_typeb, free_convolve, nu_j_mass, wigner_nu, GridSpec, Measure, PerturbationSpec, SignedMeasure, WignerMomentParams,
};
use infband::moments::{exact_trace_moment, infinitesimal_correction_limit, mixed_trace_moment, two_color_geoms};
use infband::rmtsim::{esd_moments, run_experiment, sample_banded_gue, EnsembleSpec, Perturbation};
use num_bigint::BigUint;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn genus_census_closed_forms() -> Outcome {
    let mut eps1 = Vec::new();
    for ell in 2..=6usize {
        let census = genus_census(ell, 8).map_err(|e| e.to_string())?;
        let e1 = census.get(1).copied().unwrap_or(0);
        if BigUint::from(e1) != epsilon_one_closed_form(ell as u64) {
            return Err(format!("ε₁({ell}) = {e1} disagrees with the closed form"));
        }
        if BigUint::from(census[0]) != catalan(ell as u64) {
            return Err(format!("ε₀({ell}) = {} is not Cat({ell})", census[0]));
        }
        if BigUint::from(census.iter().sum::<u64>()) != pair_partition_count(ell as u64) {
            return Err(format!("Σ_g ε_g({ell}) is not (2ℓ−1)!!"));
        }
        eps1.push(e1);
    }
    ensure(eps1 == [1, 10, 70, 420, 2310], format!("ε₁(2..6) = {eps1:?}"))
}

fn worked_cycle_structure() -> Outcome {
    let pp: PairPartition = "(1,5)(2,8)(3,7)(4,6)".parse().map_err(|e: infband::Error| e.to_string())?;
    let cycles = cycles_gamma_pi(&pp);
    ensure(cycles == vec![vec![1, 6, 5, 2], vec![3, 8], vec![4, 7]], format!("cycles {cycles:?}"))
}

fn counting_matches_brute_force() -> Outcome {
    let mut checked = 0;
    for ell in 1..=3 {
        for pp in enumerate_pair_partitions(ell).map_err(|e| e.to_string())? {
            for mode in [DistanceMode::Periodic, DistanceMode::Regular] {
                for n in [10, 20, 30] {
                    for b in [1, 2, 5] {
                        let g = BandGeometry::new(n, b, mode).map_err(|e| e.to_string())?;
                        let fast = count_admissible(&pp, &g).map_err(|e| e.to_string())?.value;
                        let slow = common::brute_force_count(&pp, &g);
                        if fast != slow {
                            return Err(format!("{pp} {mode} N={n} b={b}: {fast} vs brute force {slow}"));
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checked} (π, N, b, mode) cases agree exactly"))
}

fn double_tree_formula() -> Outcome {
    let mut checked = 0;
    for ell in 1..=4 {
        for pp in enumerate_pair_partitions(ell).map_err(|e| e.to_string())?.filter(is_noncrossing) {
            for (n, b) in [(3, 1), (10, 2), (25, 12), (40, 5), (101, 50), (500, 7)] {
                let g = BandGeometry::periodic(n, b).map_err(|e| e.to_string())?;
                let count = count_admissible(&pp, &g).map_err(|e| e.to_string())?.value;
                let expected = n as u128 * (2 * b as u128 + 1).pow(ell as u32);
                if count != expected {
                    return Err(format!("{pp} N={n} b={b}: {count} vs N·ξ^ℓ = {expected}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} non-crossing cases equal N·ξ^ℓ"))
}

fn worked_integral() -> Outcome {
    let pp: PairPartition = "(1,5)(2,8)(3,7)(4,6)".parse().map_err(|e: infband::Error| e.to_string())?;
    let est = integral_i(&pp, 1_000_000, 20_240_601, None).map_err(|e| e.to_string())?;
    let mut detail = format!("I = {:.5} ± {:.5} (contribution {:.5})", est.mean, est.stderr, est.mean / 16.0);
    let mut ok = (est.mean - 3.0).abs() <= 3.0 * est.stderr;
    for ell in 3..=5 {
        let star =
            integral_i(&PairPartition::star(ell).map_err(|e| e.to_string())?, 1_000_000, ell as u64, None).map_err(|e| e.to_string())?;
        let expected = 2f64.powi(ell as i32 - 2);
        ok &= (star.mean - expected).abs() <= 3.0 * star.stderr + 1e-12;
        detail += &format!("; star ℓ={ell}: {:.5} ± {:.5}", star.mean, star.stderr);
    }
    ensure(ok, detail)
}

fn limit_corrections() -> Outcome {
    let m2 = infinitesimal_correction_limit(1, 1.0, 1.0, 1000, 1).map_err(|e| e.to_string())?;
    let m4 = infinitesimal_correction_limit(2, 1.0, 1.0, 1000, 1).map_err(|e| e.to_string())?;
    let mut ok = m2.value == 0.0 && (m4.value - 0.25).abs() < 1e-12;
    let mut detail = format!("m₂ = {}, m₄ = {}", m2.value, m4.value);
    for ell in 3..=5 {
        let m = infinitesimal_correction_limit(ell, 1.0, 1.0, 20_000, 77).map_err(|e| e.to_string())?;
        let (lo, hi) = m.sandwich().map_err(|e| e.to_string())?;
        ok &= m.value >= lo - 3.0 * m.stderr && m.value <= hi + 3.0 * m.stderr;
        detail += &format!("; m_{} = {:.4} ± {:.4} in [{lo:.4}, {hi:.4}]", 2 * ell, m.value, m.stderr);
    }
    ensure(ok, detail)
}

fn simulated_moments() -> Outcome {
    let geom = BandGeometry::periodic(200, 20).map_err(|e| e.to_string())?;
    let spec = EnsembleSpec { band: geom, sigma2: 1.0, perturbation: Perturbation::None, seed: 0, reps: 0 };
    let mut gen = ChaCha8Rng::seed_from_u64(2000);
    let (mut tr2, mut tr4) = (Vec::new(), Vec::new());
    for _ in 0..2000 {
        let m = esd_moments(&sample_banded_gue(&spec, &mut gen), 4).map_err(|e| e.to_string())?;
        tr2.push(m[1]);
        tr4.push(m[3]);
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (ell, xs) in [(1, tr2), (2, tr4)] {
        let (mean, se) = common::mean_and_stderr(&xs);
        let exact = exact_trace_moment(ell, &geom, 1.0).map_err(|e| e.to_string())?.value();
        ok &= (mean - exact).abs() <= 3.0 * se;
        parts.push(format!("Tr Ξ^{}: {mean:.4} ± {se:.4} vs {exact:.4}", 2 * ell));
    }
    ensure(ok, parts.join("; "))
}

fn regular_second_moment() -> Outcome {
    let mut parts = Vec::new();
    for (n, b) in [(50usize, 5usize), (100, 10)] {
        let m = exact_trace_moment(1, &BandGeometry::regular(n, b).map_err(|e| e.to_string())?, 1.0).map_err(|e| e.to_string())?;
        let expected = BigRational::from_integer(n.into()) - BigRational::new((b * (b + 1)).into(), (2 * b + 1).into());
        if m.exact != expected {
            return Err(format!("N={n} b={b}: {} vs {expected}", m.exact));
        }
        parts.push(format!("N={n} b={b}: {}", m.exact));
    }
    Ok(parts.join("; "))
}

fn mixed_moment() -> Outcome {
    let mut values = Vec::new();
    for b in [50usize, 100, 200] {
        let geoms = two_color_geoms(b * b, b, b, DistanceMode::Periodic).map_err(|e| e.to_string())?;
        values.push(mixed_trace_moment(&[1, 2, 1, 2], &geoms, 1.0).map_err(|e| e.to_string())?);
    }
    let gaps: Vec<f64> = values.iter().map(|v| (v - 0.25).abs()).collect();
    let ok = gaps[1] <= 0.05 * 0.25 && gaps.windows(2).all(|w| w[1] < w[0]);
    ensure(ok, format!("b = 50, 100, 200: {values:.5?}"))
}

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

fn free_convolution_closed_form() -> Outcome {
    let grid = GridSpec::new(-2.0, 2.0, 100).map_err(|e| e.to_string())?;
    let semicircle = Measure::semicircle(1.0).map_err(|e| e.to_string())?;
    let out = free_convolve(&semicircle, &Measure::rademacher(), &grid).map_err(|e| e.to_string())?;
    let worst = out.density.iter().map(|p| (p.density - semicircle_rademacher_density(p.x)).abs()).fold(0.0, f64::max);
    ensure(worst < 1e-4 && out.max_residual < 1e-10, format!("max error {worst:.2e}, max residual {:.2e}", out.max_residual))
}

fn typeb_outlier() -> Outcome {
    let pert = PerturbationSpec::new(vec![2.0], None).map_err(|e| e.to_string())?;
    let inner = GridSpec::new(-1.9, 1.9, 100).map_err(|e| e.to_string())?;
    let near = deformed_typeb(1.0, &SignedMeasure::zero(), &pert, &inner).map_err(|e| e.to_string())?;
    let wide = GridSpec::new(-3.0, 3.0, 120).map_err(|e| e.to_string())?;
    let far = deformed_typeb(1.0, &SignedMeasure::zero(), &pert, &wide).map_err(|e| e.to_string())?;
    let atom_ok = far.atoms.len() == 1 && (far.atoms[0].loc - 2.5).abs() < 1e-6 && (far.atoms[0].weight - 1.0).abs() < 1e-6;
    let mass2 = nu_j_mass(2.0, 1.0).map_err(|e| e.to_string())?;
    let mass05 = nu_j_mass(0.5, 1.0).map_err(|e| e.to_string())?;
    let ok = atom_ok && near.max_discrepancy < 1e-3 && far.max_discrepancy < 1e-3 && (mass2 - 1.0).abs() < 1e-6 && mass05.abs() < 1e-6;
    ensure(
        ok,
        format!(
            "atoms {:?}; discrepancy {:.2e} on (−1.9, 1.9), {:.2e} on (−3, 3); ∫ν₂ = {mass2:.8}, ∫ν₀.₅ = {mass05:.1e}",
            far.atoms.iter().map(|a| (a.loc, a.weight)).collect::<Vec<_>>(),
            near.max_discrepancy,
            far.max_discrepancy
        ),
    )
}

fn wigner_nu_formula() -> Outcome {
    let mut worst_gue: f64 = 0.0;
    let mut worst_goe: f64 = 0.0;
    let mut atoms_ok = true;
    for sigma2 in [1.0f64, 2.5] {
        let sigma = sigma2.sqrt();
        let gue = wigner_nu(&WignerMomentParams::gue(sigma2)).map_err(|e| e.to_string())?;
        let goe = wigner_nu(&WignerMomentParams::goe(sigma2)).map_err(|e| e.to_string())?;
        atoms_ok &= gue.atoms.is_empty();
        let mut locs: Vec<(f64, f64)> = goe.atoms.iter().map(|a| (a.loc, a.weight)).collect();
        locs.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms_ok &= locs.len() == 2
            && locs
                .iter()
                .zip([-2.0 * sigma, 2.0 * sigma])
                .all(|(&(loc, w), target)| (loc - target).abs() < 1e-12 && (w - 0.25).abs() < 1e-12);
        for i in 0..400 {
            let t = 2.0 * sigma * (-1.0 + 2.0 * (i as f64 + 0.5) / 400.0);
            worst_gue = worst_gue.max(gue.density(t).abs());
            let johansson = -0.5 / (PI * (4.0 * sigma2 - t * t).sqrt());
            worst_goe = worst_goe.max((goe.density(t) - johansson).abs());
        }
    }
    ensure(
        atoms_ok && worst_gue < 1e-12 && worst_goe < 1e-10,
        format!("GUE max |ν| {worst_gue:.1e}; GOE max ac error {worst_goe:.1e}; atoms ok: {atoms_ok}"),
    )
}

fn simulation_statistics() -> Outcome {
    let spec = EnsembleSpec {
        band: BandGeometry::periodic(2000, 1000).map_err(|e| e.to_string())?,
        sigma2: 1.0,
        perturbation: Perturbation::Diagonal(vec![2.0]),
        seed: 13,
        reps: 300,
    };
    let run = run_experiment(&spec, 1).map_err(|e| e.to_string())?;
    let agg = run.aggregates.ok_or("no realizations")?;
    let ok = (agg.lambda1_mean - 2.5).abs() < 0.05 && agg.f_mean.abs() <= 0.15 && (0.7..=1.3).contains(&agg.f_variance);
    ensure(
        ok,
        format!("mean λ₁ {:.4}, F mean {:.4}, F variance {:.4}, KS {:.4}", agg.lambda1_mean, agg.f_mean, agg.f_variance, agg.ks_distance),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("genus census", genus_census_closed_forms),
        ("worked cycle structure", worked_cycle_structure),
        ("counting oracle", counting_matches_brute_force),
        ("double-tree formula", double_tree_formula),
        ("worked integral", worked_integral),
        ("limit corrections", limit_corrections),
        ("exact vs simulated moments", simulated_moments),
        ("regular-band second moment", regular_second_moment),
        ("mixed moment", mixed_moment),
        ("free convolution closed form", free_convolution_closed_form),
        ("deformed outlier", typeb_outlier),
        ("Wigner ν formula", wigner_nu_formula),
        ("simulation statistics", simulation_statistics),
    ];
    // `cargo test -- <filter>` passes a name filter; run everything regardless
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} ({name}, {secs:.1}s): {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {:>2} ({name}, {secs:.1}s): {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
