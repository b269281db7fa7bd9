//! Lattice discretizations of the angle-bounded flat families.
//!
//! The net for level `n` is a regular lattice in chart parameters (angles of
//! the direction/normal plus offsets from the cube center), with spacings
//! chosen from Lipschitz bounds of the projection sup-metric in those
//! parameters. The lattice is kept implicit: `nearest` snaps an arbitrary
//! flat to its closest member in O(1), so density checks and transfer
//! audits never need to materialize the (possibly enormous) member list.

use super::flat::{cross3, dot, norm, sub, Flat};
use crate::construction::ConstructionParams;
use crate::error::Error;
use crate::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Level-derived net parameters: the angle floor `alpha = r_n^d`, the
/// density `eps = r_n^{2d+1}` and the calibrated geometric constant.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NetParams {
    pub level: usize,
    pub alpha: f64,
    pub eps: f64,
    pub c_geom: f64,
}

impl NetParams {
    pub fn for_level(params: &ConstructionParams, n: usize, c_geom: f64) -> Self {
        let r = params.scale_f64(n);
        let d = params.dim as i32;
        Self {
            level: n,
            alpha: r.powi(d),
            eps: r.powi(2 * d + 1),
            c_geom,
        }
    }
}

/// Frozen geometric constant per `(d, m)`, calibrated as twice the empirical
/// maximum over the randomized net/boundary/strip audits.
pub fn default_c_geom(dim: usize, m: usize) -> f64 {
    match (dim, m) {
        (2, 1) => 6.0,
        (3, 1) => 16.0,
        (3, 2) => 24.0,
        _ => 64.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum ChartKind {
    Line2,
    Line3,
    Plane3,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct Axis {
    min: f64,
    range: f64,
    step: f64,
    count: u64,
}

impl Axis {
    fn new(min: f64, range: f64, budget: f64, lipschitz: f64) -> Self {
        let step = 2.0 * budget / lipschitz;
        let count = (range / step).ceil().max(1.0) as u64;
        Self {
            min,
            range,
            step,
            count,
        }
    }

    /// Lattice values sit at half-step offsets so no member lands exactly on
    /// a chart boundary (where lines/planes degenerate to axis-parallel).
    fn value(&self, i: u64) -> f64 {
        self.min + (i as f64 + 0.5) * self.step
    }

    fn snap(&self, v: f64) -> u64 {
        let i = ((v - self.min) / self.step).floor();
        (i.max(0.0) as u64).min(self.count - 1)
    }
}

/// An implicit eps-dense lattice net over the flats of dimension `m` meeting
/// the unit cube, for ambient dimension `d ∈ {2, 3}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Net {
    pub params: NetParams,
    pub dim: usize,
    pub m: usize,
    kind: ChartKind,
    axes: Vec<Axis>,
}

const SAFETY: f64 = 0.9;
const OFFSET_MARGIN: f64 = 0.05;

fn offset_radius(dim: usize) -> f64 {
    (dim as f64).sqrt() / 2.0 + OFFSET_MARGIN
}

fn angle_lipschitz(dim: usize) -> f64 {
    // Conservative bound on |dρ/dangle|; validated by the sampled density
    // audit in the test suite.
    match dim {
        2 => 6.0,
        _ => 10.0,
    }
}

impl Net {
    /// Supported shapes: `(d, m) ∈ {(2,1), (3,1), (3,2)}`.
    pub fn build(params: NetParams, dim: usize, m: usize) -> Result<Self> {
        let kind = match (dim, m) {
            (2, 1) => ChartKind::Line2,
            (3, 1) => ChartKind::Line3,
            (3, 2) => ChartKind::Plane3,
            _ => {
                return Err(Error::UnsupportedFlatShape {
                    dim,
                    m,
                    what: "net construction".into(),
                })
            }
        };
        let r = offset_radius(dim);
        let la = angle_lipschitz(dim);
        let axes = match kind {
            ChartKind::Line2 => {
                let share = SAFETY * params.eps / 2.0;
                vec![
                    Axis::new(0.0, PI, share, la),
                    Axis::new(-r, 2.0 * r, share, 1.0),
                ]
            }
            ChartKind::Line3 => {
                let share = SAFETY * params.eps / 4.0;
                vec![
                    Axis::new(0.0, 2.0 * PI, share, la),
                    Axis::new(0.0, PI / 2.0, share, la),
                    Axis::new(-r, 2.0 * r, share, 1.0),
                    Axis::new(-r, 2.0 * r, share, 1.0),
                ]
            }
            ChartKind::Plane3 => {
                let share = SAFETY * params.eps / 3.0;
                vec![
                    Axis::new(0.0, 2.0 * PI, share, la),
                    Axis::new(0.0, PI / 2.0, share, la),
                    Axis::new(-r, 2.0 * r, share, 1.0),
                ]
            }
        };
        Ok(Self {
            params,
            dim,
            m,
            kind,
            axes,
        })
    }

    fn center(&self) -> Vec<f64> {
        vec![0.5; self.dim]
    }

    /// Number of lattice members (as f64; nets at deep levels are enormous).
    pub fn cardinality(&self) -> f64 {
        self.axes.iter().map(|a| a.count as f64).product()
    }

    pub fn log_cardinality(&self) -> f64 {
        self.axes.iter().map(|a| (a.count as f64).ln()).sum()
    }

    /// Reported growth exponent `log #Net / log(1/eps)`.
    pub fn density_exponent(&self) -> f64 {
        self.log_cardinality() / (1.0 / self.params.eps).ln()
    }

    fn member_from_values(&self, vals: &[f64]) -> Flat {
        let c = self.center();
        match self.kind {
            ChartKind::Line2 => {
                let (phi, off) = (vals[0], vals[1]);
                let u = vec![phi.cos(), phi.sin()];
                let nu = [-phi.sin(), phi.cos()];
                let base = vec![c[0] + off * nu[0], c[1] + off * nu[1]];
                Flat::new(base, vec![u]).expect("lattice line is valid")
            }
            ChartKind::Line3 => {
                let (phi, psi, c1, c2) = (vals[0], vals[1], vals[2], vals[3]);
                let u = vec![psi.sin() * phi.cos(), psi.sin() * phi.sin(), psi.cos()];
                let (v1, v2) = line3_frame(&u, phi);
                let base: Vec<f64> = (0..3).map(|i| c[i] + c1 * v1[i] + c2 * v2[i]).collect();
                Flat::new(base, vec![u]).expect("lattice line is valid")
            }
            ChartKind::Plane3 => {
                let (phi, psi, h) = (vals[0], vals[1], vals[2]);
                let nu = vec![psi.sin() * phi.cos(), psi.sin() * phi.sin(), psi.cos()];
                let base: Vec<f64> = (0..3).map(|i| c[i] + h * nu[i]).collect();
                Flat::hyperplane(nu, base).expect("lattice plane is valid")
            }
        }
    }

    pub fn member_at(&self, idx: &[u64]) -> Flat {
        let vals: Vec<f64> = idx
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.value(i))
            .collect();
        self.member_from_values(&vals)
    }

    /// The net member closest to `w` in chart parameters; by the spacing
    /// construction its ρ-distance to `w` is at most `eps`.
    pub fn nearest(&self, w: &Flat) -> Result<Flat> {
        let idx = self.snap_indices(w)?;
        Ok(self.member_at(&idx))
    }

    /// Lattice indices of the member nearest to `w`.
    pub fn snap_indices(&self, w: &Flat) -> Result<Vec<u64>> {
        if w.ambient_dim() != self.dim || w.dim() != self.m {
            return Err(Error::DimensionMismatch(
                "flat shape does not match net".into(),
            ));
        }
        let c = self.center();
        let rel = sub(&w.base, &c);
        match self.kind {
            ChartKind::Line2 => {
                let mut u = w.basis[0].clone();
                if u[1] < 0.0 || (u[1] == 0.0 && u[0] < 0.0) {
                    u = vec![-u[0], -u[1]];
                }
                let phi = u[1].atan2(u[0]).rem_euclid(PI);
                let i_phi = self.axes[0].snap(phi);
                let phi_s = self.axes[0].value(i_phi);
                // Offset measured against the snapped direction's normal.
                let off = -phi_s.sin() * rel[0] + phi_s.cos() * rel[1];
                Ok(vec![i_phi, self.axes[1].snap(off)])
            }
            ChartKind::Line3 => {
                let mut u = w.basis[0].clone();
                if u[2] < 0.0 || (u[2] == 0.0 && (u[1] < 0.0 || (u[1] == 0.0 && u[0] < 0.0))) {
                    u = u.iter().map(|x| -x).collect();
                }
                let psi = u[2].clamp(-1.0, 1.0).acos();
                let phi = u[1].atan2(u[0]).rem_euclid(2.0 * PI);
                let i_phi = self.axes[0].snap(phi);
                let i_psi = self.axes[1].snap(psi);
                let (phi_s, psi_s) = (self.axes[0].value(i_phi), self.axes[1].value(i_psi));
                let us = vec![
                    psi_s.sin() * phi_s.cos(),
                    psi_s.sin() * phi_s.sin(),
                    psi_s.cos(),
                ];
                let (v1, v2) = line3_frame(&us, phi_s);
                let c1 = dot(&v1, &rel);
                let c2 = dot(&v2, &rel);
                Ok(vec![
                    i_phi,
                    i_psi,
                    self.axes[2].snap(c1),
                    self.axes[3].snap(c2),
                ])
            }
            ChartKind::Plane3 => {
                let mut nu = w.normal()?;
                if nu[2] < 0.0 || (nu[2] == 0.0 && (nu[1] < 0.0 || (nu[1] == 0.0 && nu[0] < 0.0))) {
                    nu = nu.iter().map(|x| -x).collect();
                }
                let psi = nu[2].clamp(-1.0, 1.0).acos();
                let phi = nu[1].atan2(nu[0]).rem_euclid(2.0 * PI);
                let i_phi = self.axes[0].snap(phi);
                let i_psi = self.axes[1].snap(psi);
                let (phi_s, psi_s) = (self.axes[0].value(i_phi), self.axes[1].value(i_psi));
                let nus = vec![
                    psi_s.sin() * phi_s.cos(),
                    psi_s.sin() * phi_s.sin(),
                    psi_s.cos(),
                ];
                let h = dot(&nus, &rel);
                Ok(vec![i_phi, i_psi, self.axes[2].snap(h)])
            }
        }
    }

    /// A uniformly random lattice member.
    pub fn sample_member(&self, rng: &mut ChaCha8Rng) -> Flat {
        let idx: Vec<u64> = self
            .axes
            .iter()
            .map(|a| rng.gen_range(0..a.count))
            .collect();
        self.member_at(&idx)
    }

    /// Materialize all members; refused above `cap`.
    pub fn members(&self, cap: usize) -> Result<Vec<Flat>> {
        let n = self.cardinality();
        if n > cap as f64 {
            return Err(Error::InvalidArgument(format!(
                "net has {n:.3e} members, above the cap of {cap}"
            )));
        }
        let mut out = Vec::with_capacity(n as usize);
        let mut idx = vec![0u64; self.axes.len()];
        loop {
            out.push(self.member_at(&idx));
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < self.axes[k].count {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == self.axes.len() {
                    return Ok(out);
                }
            }
        }
    }
}

/// Deterministic orthonormal frame of the orthocomplement of a 3D direction.
fn line3_frame(u: &[f64], phi: f64) -> (Vec<f64>, Vec<f64>) {
    let e3 = [0.0, 0.0, 1.0];
    let c = cross3(u, &e3);
    let n = norm(&c);
    let v1 = if n > 1e-9 {
        c.iter().map(|x| x / n).collect::<Vec<f64>>()
    } else {
        // Direction along the z-axis: fall back to the azimuth frame.
        vec![phi.sin(), -phi.cos(), 0.0]
    };
    let v2 = cross3(u, &v1);
    (v1, v2)
}
