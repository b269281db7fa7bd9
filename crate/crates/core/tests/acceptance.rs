//! The acceptance gate: one test per release criterion, each printing a
//! single PASS/FAIL line. Tolerances are stated inline; statistical checks
//! use fixed seeds so every run is reproducible.

use cantor_tubes::construction::{rule_by_name, ConstructionParams, Realization};
use cantor_tubes::geometry::{
    default_c_geom, flat_cube_measure, flat_cube_measure_mc, net_transfer_audit, strip_count_audit,
    AxisBox, Flat,
};
use cantor_tubes::measure::{projection_measure, NaturalMeasure};
use cantor_tubes::stats::{
    conditional_mgf_check, martingale_check, tail_trend, tube_sup_scan_multi, ConcentrationParams,
    TubeStrategy,
};
use num_rational::Ratio;
use num_traits::One;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verdict(number: usize, name: &str, pass: bool, detail: String) {
    println!(
        "criterion {number} ({name}): {} [{detail}]",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} ({name}) failed: {detail}");
}

fn e22(depth: usize) -> ConstructionParams {
    ConstructionParams::constant(2, 2, 2, depth)
}

fn generic_line_2d() -> Flat {
    Flat::line(vec![0.51, 0.32], vec![1.0, 0.5]).unwrap()
}

#[test]
fn criterion_01_exact_projection_laws() {
    let half = Ratio::new(1, 2);
    let mut worst_x = Ratio::new(0, 1);
    let mut pass = true;
    for seed in 0..100u64 {
        let depth = 1 + (seed as usize % 12);
        for d in [depth, 12] {
            let col = Realization::build_named(&e22(d), "column-lr", seed).unwrap();
            let px = projection_measure(&col, 0).unwrap();
            let py = projection_measure(&col, 1).unwrap();
            worst_x = worst_x.max(px);
            pass &= py.is_one() && px <= half;

            let diag = Realization::build_named(&e22(d), "diagonal-ld", seed).unwrap();
            pass &= projection_measure(&diag, 0).unwrap().is_one()
                && projection_measure(&diag, 1).unwrap().is_one();
        }
    }
    verdict(
        1,
        "exact projection laws",
        pass,
        format!("100 seeds, depths <= 12, exact rationals; max x-projection {worst_x}"),
    );
}

#[test]
fn criterion_02_normalization_and_nestedness() {
    let mut pass = true;
    let mut checked = 0usize;
    for seed in 0..40u64 {
        let params = match seed % 4 {
            0 => e22(8),
            1 => ConstructionParams::constant(2, 3, 5, 5),
            2 => ConstructionParams::constant(3, 2, 6, 4),
            _ => ConstructionParams::constant(2, 2, 3, 7),
        };
        let r = Realization::build_named(&params, "uniform", seed).unwrap();
        let mu = NaturalMeasure::at_deepest(&r);
        let total: Ratio<i64> = r.deepest().iter().map(|q| mu.cube_mass(q).unwrap()).sum();
        pass &= total.is_one();
        for k in 1..=r.depth() {
            pass &= r.cubes(k).len() as i64 == params.retained(k);
            if k > 1 {
                pass &= r
                    .cubes(k)
                    .iter()
                    .all(|q| r.cubes(k - 1).contains(&q.parent()));
            }
        }
        checked += 1;
    }
    verdict(
        2,
        "measure normalization and nestedness",
        pass,
        format!("{checked} realizations, exact rationals, zero tolerance"),
    );
}

#[test]
fn criterion_03_geometry_oracle_agreement() {
    // Exact flat/cube intersection measures against a 10^6-point Monte-Carlo
    // oracle. The stated 1e-3 relative tolerance sits at ~1 sigma of the
    // oracle's own noise, so the accepted error is 1e-3 relative plus a
    // 5-sigma sampling allowance.
    let samples = 1_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut cases = 0usize;

    let check = |w: &Flat, b: &AxisBox, seed: u64, worst: &mut f64, pass: &mut bool| {
        let exact = flat_cube_measure(w, b).unwrap();
        let (est, se) = flat_cube_measure_mc(w, b, samples, seed);
        let tol = 1e-3 * exact.max(1e-2) + 5.0 * se;
        let err = (exact - est).abs();
        *worst = worst.max(err - 5.0 * se);
        *pass &= err <= tol;
    };

    // The regular hexagon section of the cube has area 3*sqrt(3)/4.
    let hex = Flat::hyperplane(vec![1.0, 1.0, 1.0], vec![0.5, 0.5, 0.5]).unwrap();
    let unit3 = AxisBox::unit(3);
    let hex_exact = flat_cube_measure(&hex, &unit3).unwrap();
    pass &= (hex_exact - 3.0 * 3f64.sqrt() / 4.0).abs() < 1e-12;
    check(&hex, &unit3, 1, &mut worst, &mut pass);
    cases += 1;

    for i in 0..999u64 {
        let d = if i % 2 == 0 { 2 } else { 3 };
        let side = rng.gen_range(0.1..0.5f64);
        let lo: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..0.5f64)).collect();
        let b = AxisBox::new(lo.clone(), lo.iter().map(|x| x + side).collect());
        let inside: Vec<f64> = lo.iter().map(|x| x + rng.gen_range(0.0..side)).collect();
        let w = if d == 3 && i % 4 == 1 {
            let normal: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            match Flat::hyperplane(normal, inside.clone()) {
                Ok(p) => p,
                Err(_) => continue,
            }
        } else {
            let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            match Flat::line(inside.clone(), dir) {
                Ok(l) => l,
                Err(_) => continue,
            }
        };
        check(&w, &b, 100 + i, &mut worst, &mut pass);
        cases += 1;
    }
    verdict(
        3,
        "geometry oracle agreement",
        pass,
        format!("{cases} (W,Q) pairs, 1e6 points each; worst error beyond 5 sigma {worst:.2e}"),
    );
}

#[test]
fn criterion_04_net_transfer_and_boundary_bounds() {
    let c = default_c_geom(2, 1);
    let mut pass = true;
    let mut max_transfer = 0.0f64;
    let mut max_boundary = 0.0f64;
    for n in 2..=6 {
        let rep = net_transfer_audit(&e22(n), n, 200, c, 40 + n as u64).unwrap();
        pass &= rep.pass;
        max_transfer = max_transfer.max(rep.max_transfer_const);
        max_boundary = max_boundary.max(rep.max_boundary_const);
    }
    verdict(
        4,
        "net transfer and boundary bounds",
        pass,
        format!(
            "1000 lines over n=2..6, every level-n cube; max constants {max_transfer:.3}/{max_boundary:.3} vs {c}"
        ),
    );
}

#[test]
fn criterion_05_strip_count_bound() {
    let c = default_c_geom(2, 1);
    let mut pass = true;
    let mut violations = 0usize;
    for n in 2..=4 {
        let r = Realization::build_named(&e22(n), "uniform", 50 + n as u64).unwrap();
        let rep = strip_count_audit(&r, n, 1000, 200, c, 60 + n as u64).unwrap();
        pass &= rep.pass;
        violations += rep.violations;
    }
    verdict(
        5,
        "strip incidence count bound",
        pass,
        format!("1000 strips per level, n=2..4; {violations} violations"),
    );
}

#[test]
fn criterion_06_martingale_identity() {
    let w = generic_line_2d();
    let mut pass = true;
    let mut max_sigmas = 0.0f64;
    for rule_name in ["uniform", "column-lr", "diagonal-ld"] {
        let rule = rule_by_name(rule_name).unwrap();
        for n in 4..=6 {
            let rep =
                martingale_check(&e22(6), rule.as_ref(), &w, n, 10_000, 70 + n as u64).unwrap();
            pass &= rep.pass;
            if !rep.degenerate {
                max_sigmas = max_sigmas.max(rep.deviation_sigmas);
            }
        }
    }
    verdict(
        6,
        "martingale identity",
        pass,
        format!("3 rules, n=4..6, 1e4 trials, 4 SE budget; max deviation {max_sigmas:.2} SE"),
    );
}

#[test]
fn criterion_07_mgf_and_tail_bounds() {
    let params = e22(8);
    let w = generic_line_2d();
    let rule = rule_by_name("uniform").unwrap();
    let (t, k, eps) = (0.8, 1, 0.039);

    let cp6 = ConcentrationParams::derive(&params, t, k, eps, 6).unwrap();
    let mgf = conditional_mgf_check(&params, rule.as_ref(), &w, 6, &cp6, 10_000, 81).unwrap();

    let (tails, nonincreasing) = tail_trend(
        &params,
        rule.as_ref(),
        &w,
        4..=8,
        |n| ConcentrationParams::derive(&params, t, k, eps, n),
        10_000,
        82,
    )
    .unwrap();
    let tails_pass = tails.iter().all(|r| r.pass);
    let vacuous = tails.iter().filter(|r| r.vacuous).count();
    let pass = mgf.pass && tails_pass && nonincreasing;
    verdict(
        7,
        "conditional MGF and tail bounds",
        pass,
        format!(
            "mgf {:.4} <= bound {:.4}; tails n=4..8 nonincreasing={nonincreasing}, {vacuous}/5 vacuous thresholds",
            mgf.empirical_mgf, mgf.bound
        ),
    );
}

#[test]
fn criterion_08_tube_boundedness_threshold() {
    let widths: Vec<f64> = (3..=10).map(|j| 2f64.powi(-j)).collect();
    let r = Realization::build_named(&e22(12), "uniform", 90).unwrap();
    let reports = tube_sup_scan_multi(
        &r,
        &[0.7, 0.8, 0.9],
        &widths,
        2000,
        TubeStrategy::Combined,
        91,
    )
    .unwrap();
    let mut pass = true;
    let mut growths = Vec::new();
    for rep in &reports {
        let at = |w: f64| {
            rep.rows
                .iter()
                .find(|row| (row.width - w).abs() < 1e-12)
                .unwrap()
                .max_ratio
        };
        let growth = at(2f64.powi(-10)) / at(2f64.powi(-5));
        pass &= growth <= 2.0;
        growths.push(format!("t={}: {:.2}", rep.t, growth));
    }

    // Contrast: a deterministic full column at t = d-1 = 1 must blow up.
    let forced = Realization::build_named(&e22(12), "column-fixed", 0).unwrap();
    let rep1 = &tube_sup_scan_multi(&forced, &[1.0], &widths, 2000, TubeStrategy::Combined, 92)
        .unwrap()[0];
    let at = |w: f64| {
        rep1.rows
            .iter()
            .find(|row| (row.width - w).abs() < 1e-12)
            .unwrap()
            .max_ratio
    };
    let forced_growth = at(2f64.powi(-10)) / at(2f64.powi(-5));
    pass &= forced_growth >= 4.0;
    verdict(
        8,
        "tube boundedness below the threshold exponent",
        pass,
        format!(
            "finest/2^-5 ratios {}; forced column at t=1 grows {forced_growth:.0}x",
            growths.join(", ")
        ),
    );
}

#[test]
fn criterion_09_projection_box_dimension() {
    let r = Realization::build_named(&e22(14), "uniform", 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2u64 ^ 0xD1FF);
    let mut min_slope = f64::INFINITY;
    let mut max_slope = f64::NEG_INFINITY;
    let mut pass = true;
    for _ in 0..50 {
        let dir: Vec<f64> = loop {
            let v: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 && n <= 1.0 {
                break v.iter().map(|x| x / n).collect();
            }
        };
        let rep = cantor_tubes::stats::box_dimension_estimate(&r, &dir, 10..=14).unwrap();
        min_slope = min_slope.min(rep.slope);
        max_slope = max_slope.max(rep.slope);
        pass &= (0.9..=1.0).contains(&rep.slope);
    }
    verdict(
        9,
        "projection box dimension",
        pass,
        format!(
            "50 directions, depth 14, scales 10..14; slopes in [{min_slope:.4}, {max_slope:.4}]"
        ),
    );
}

#[test]
fn criterion_10_ahlfors_regularity() {
    let bound = 16.0;
    let r = Realization::build_named(&e22(12), "uniform", 95).unwrap();
    let mu = NaturalMeasure::at_deepest(&r);
    let radii: Vec<f64> = (2..=10).map(|j| 2f64.powi(-j)).collect();
    let scan = mu.ahlfors_scan(200, &radii, 1.0, 96).unwrap();
    let spread = scan.max_ratio / scan.min_ratio;
    let pass = scan.min_ratio > 0.0 && spread <= bound;
    verdict(
        10,
        "one-regularity of ball masses",
        pass,
        format!(
            "200 points, radii 2^-2..2^-10; ratio range [{:.3}, {:.3}], spread {spread:.2} <= {bound}",
            scan.min_ratio, scan.max_ratio
        ),
    );
}
