//! Randomized audits of the geometric inequalities: net transfer inequality,
//! boundary-part bound and strip incidence counts, with the observed
//! constants reported so the frozen `c_geom` can be checked (or recalibrated).

use super::{
    boundary_measure, distance_box_line_2d, flat_cube_measure, gamma_membership, projection_metric,
    realization_flat_measure, strip_cube_count, AxisBox, Flat, Net, NetParams, Strip,
};
use crate::construction::{ConstructionParams, Realization};
use crate::error::Error;
use crate::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A uniformly random line meeting the unit square, rejected into the
/// angle-bounded family when `alpha` is positive.
pub fn sample_line_2d(alpha: f64, rng: &mut ChaCha8Rng) -> Flat {
    let radius = 2f64.sqrt() / 2.0;
    loop {
        let phi = rng.gen_range(0.0..PI);
        let c = rng.gen_range(-radius..radius);
        let nu = [-phi.sin(), phi.cos()];
        let line = Flat::line(
            vec![0.5 + c * nu[0], 0.5 + c * nu[1]],
            vec![phi.cos(), phi.sin()],
        )
        .expect("valid direction");
        if alpha <= 0.0 || gamma_membership(&line, alpha) {
            return line;
        }
    }
}

/// All grid cubes of side `r_n` in `[0,1]^2`.
fn grid_boxes_2d(params: &ConstructionParams, n: usize) -> Vec<AxisBox> {
    let r = params.scale_f64(n);
    let cells = (1.0 / r).round() as usize;
    let mut out = Vec::with_capacity(cells * cells);
    for i in 0..cells {
        for j in 0..cells {
            out.push(AxisBox::new(
                vec![i as f64 * r, j as f64 * r],
                vec![(i + 1) as f64 * r, (j + 1) as f64 * r],
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetAuditReport {
    pub level: usize,
    pub trials: usize,
    pub eps: f64,
    pub alpha: f64,
    pub c_geom: f64,
    /// Largest snap distance observed (must stay below `eps`).
    pub max_rho: f64,
    /// Max of `(|W∩Q| - |W'∩Q|) / r_n^{d+m}` over all trials and cubes.
    pub max_transfer_const: f64,
    /// Max of `H^m(B(Q, W, 2eps)) / r_n^{d+m}`.
    pub max_boundary_const: f64,
    pub net_cardinality: f64,
    pub density_exponent: f64,
    pub pass: bool,
}

/// Audit the net transfer inequality and the boundary bound for lines in the
/// plane: `trials` random members of the angle-bounded family, checked
/// against every grid cube of level `n`.
pub fn net_transfer_audit(
    params: &ConstructionParams,
    n: usize,
    trials: usize,
    c_geom: f64,
    seed: u64,
) -> Result<NetAuditReport> {
    if params.dim != 2 {
        return Err(Error::UnsupportedFlatShape {
            dim: params.dim,
            m: 1,
            what: "net audit".into(),
        });
    }
    let np = NetParams::for_level(params, n, c_geom);
    let net = Net::build(np, 2, 1)?;
    let boxes = grid_boxes_2d(params, n);
    let r_n = params.scale_f64(n);
    let scale_dm = r_n.powi(3); // r_n^{d+m} with d=2, m=1
    let reach = 2f64.sqrt() * r_n; // cube diameter: skip cubes missed by both lines

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rho = 0.0f64;
    let mut max_transfer = 0.0f64;
    let mut max_boundary = 0.0f64;
    for _ in 0..trials {
        let w = sample_line_2d(np.alpha, &mut rng);
        let w2 = net.nearest(&w)?;
        max_rho = max_rho.max(projection_metric(&w, &w2)?);

        let nu = [-w.basis[0][1], w.basis[0][0]];
        let off = nu[0] * w.base[0] + nu[1] * w.base[1];
        for b in &boxes {
            if distance_box_line_2d([b.lo[0], b.lo[1]], [b.hi[0], b.hi[1]], nu, off) > reach {
                continue;
            }
            let mw = flat_cube_measure(&w, b)?;
            if mw == 0.0 {
                continue;
            }
            let mw2 = flat_cube_measure(&w2, b)?;
            max_transfer = max_transfer.max((mw - mw2) / scale_dm);
            let bm = boundary_measure(&w, b, 2.0 * np.eps)?;
            max_boundary = max_boundary.max(bm / scale_dm);
        }
    }
    let pass = max_rho <= np.eps && max_transfer <= c_geom && max_boundary <= c_geom;
    Ok(NetAuditReport {
        level: n,
        trials,
        eps: np.eps,
        alpha: np.alpha,
        c_geom,
        max_rho,
        max_transfer_const: max_transfer,
        max_boundary_const: max_boundary,
        net_cardinality: net.cardinality(),
        density_exponent: net.density_exponent(),
        pass,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripAuditReport {
    pub level: usize,
    pub strips: usize,
    /// Max sampled `|W ∩ E_n|` over the angle-bounded family.
    pub h: f64,
    /// Max of `Z(S,n) / (r_n^{k-d} h)` over the sampled strips.
    pub max_strip_const: f64,
    pub c_geom: f64,
    pub violations: usize,
    pub pass: bool,
}

/// Audit `Z(S,n) <= C r_n^{k-d} h` on a realization: `h` is the sampled max
/// of `|W ∩ E_n|` over the angle-bounded family, strips have width at most
/// `r_n` and arbitrary direction.
pub fn strip_count_audit(
    r: &Realization,
    n: usize,
    strips: usize,
    gamma_samples: usize,
    c_geom: f64,
    seed: u64,
) -> Result<StripAuditReport> {
    if r.params.dim != 2 {
        return Err(Error::UnsupportedFlatShape {
            dim: r.params.dim,
            m: 1,
            what: "strip audit".into(),
        });
    }
    let alpha = r.params.scale_f64(n).powi(2);
    let r_n = r.params.scale_f64(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = 0.0f64;
    for _ in 0..gamma_samples {
        let w = sample_line_2d(alpha, &mut rng);
        h = h.max(realization_flat_measure(r, &w, n)?);
    }
    let budget = c_geom / r_n * h; // c_geom r_n^{k-d} h with d=2, k=1
    let mut max_const = 0.0f64;
    let mut violations = 0usize;
    for _ in 0..strips {
        let line = sample_line_2d(-1.0, &mut rng);
        let width = rng.gen_range(0.0..r_n).max(r_n * 1e-6);
        let z = strip_cube_count(r, &Strip::new(line.clone(), width)?, n)? as f64;
        max_const = max_const.max(z / (h / r_n));
        if z > budget {
            violations += 1;
        }
    }
    Ok(StripAuditReport {
        level: n,
        strips,
        h,
        max_strip_const: max_const,
        c_geom,
        violations,
        pass: violations == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::default_c_geom;

    #[test]
    fn sampled_lines_respect_the_angle_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let w = sample_line_2d(0.05, &mut rng);
            assert!(gamma_membership(&w, 0.05));
        }
    }

    #[test]
    fn grid_covers_the_square_exactly() {
        let p = ConstructionParams::constant(2, 2, 2, 3);
        let boxes = grid_boxes_2d(&p, 2);
        assert_eq!(boxes.len(), 16);
        let total: f64 = boxes
            .iter()
            .map(|b| (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn net_audit_passes_with_the_frozen_constant() {
        let p = ConstructionParams::constant(2, 2, 2, 3);
        let rep = net_transfer_audit(&p, 3, 100, default_c_geom(2, 1), 7).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.max_rho <= rep.eps);
        assert!(rep.max_transfer_const <= rep.c_geom);
        assert!(rep.max_boundary_const <= rep.c_geom);
    }

    #[test]
    fn strip_audit_passes_on_a_realization() {
        let p = ConstructionParams::constant(2, 2, 2, 4);
        let r = Realization::build_named(&p, "uniform", 5).unwrap();
        let rep = strip_count_audit(&r, 4, 200, 50, default_c_geom(2, 1), 3).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.h > 0.0);
    }

    #[test]
    fn audits_are_limited_to_the_planar_case() {
        let p3 = ConstructionParams::constant(3, 2, 4, 2);
        assert!(net_transfer_audit(&p3, 2, 10, 6.0, 0).is_err());
        let r3 = Realization::build_named(&p3, "uniform", 0).unwrap();
        assert!(strip_count_audit(&r3, 2, 10, 10, 6.0, 0).is_err());
    }
}
