//! Exact affine geometry against M-adic cubes.

mod audit;
mod clip;
mod flat;
mod net;

pub use audit::{
    net_transfer_audit, sample_line_2d, strip_count_audit, NetAuditReport, StripAuditReport,
};
pub use clip::{
    boundary_measure, distance_box_flat, distance_box_line_2d, flat_cube_measure,
    flat_cube_measure_mc, flat_point, line_box_interval, plane_through,
};
pub use flat::{
    gamma_membership, min_coordinate_angle, plane_angle, projection_metric, Flat, Strip,
};
pub use net::{default_c_geom, Net, NetParams};

use crate::construction::Realization;
use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Closed axis-aligned box `∏ [lo_i, hi_i]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    /// The unit cube `[0,1]^d`.
    pub fn unit(d: usize) -> Self {
        Self::new(vec![0.0; d], vec![1.0; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(xi, (lo, hi))| *xi >= lo - tol && *xi <= hi + tol)
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(xi, (lo, hi))| xi.clamp(*lo, *hi))
            .collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let d = self.dim();
        (0usize..(1 << d)).map(move |mask| {
            (0..d)
                .map(|i| {
                    if (mask >> i) & 1 == 1 {
                        self.hi[i]
                    } else {
                        self.lo[i]
                    }
                })
                .collect()
        })
    }
}

/// Outward rounding applied to cube/strip incidence so the count is
/// reproducible across platforms.
pub const INCIDENCE_TOL: f64 = 1e-12;

/// `|W ∩ E_n| = Σ_Q H^m(W ∩ Q)` over the retained level-n cubes.
pub fn realization_flat_measure(r: &Realization, w: &Flat, n: usize) -> Result<f64> {
    if n > r.depth() {
        return Err(Error::DepthExceeded {
            requested: n,
            depth: r.depth(),
        });
    }
    if n == 0 {
        return flat_cube_measure(w, &AxisBox::unit(r.params.dim));
    }
    let mut total = 0.0;
    for q in r.cubes(n) {
        total += flat_cube_measure(w, &q.to_box(&r.params))?;
    }
    Ok(total)
}

/// `Z(S, n)`: number of retained level-n closed cubes meeting the open strip.
pub fn strip_cube_count(r: &Realization, s: &Strip, n: usize) -> Result<usize> {
    if n > r.depth() {
        return Err(Error::DepthExceeded {
            requested: n,
            depth: r.depth(),
        });
    }
    let half = s.width / 2.0;
    let mut count = 0;
    for q in r.cubes(n) {
        let b = q.to_box(&r.params);
        if distance_box_flat(&b, &s.flat) < half + INCIDENCE_TOL {
            count += 1;
        }
    }
    Ok(count)
}
