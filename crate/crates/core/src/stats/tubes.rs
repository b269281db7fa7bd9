//! Tube scans: the scanned maximum of `μ(E ∩ T) / w(T)^t`.
//!
//! The strip mass is the outer cube approximation at the deepest level
//! (total mass of retained cubes meeting the strip). Candidate tubes are
//! stratified random (uniform direction x offset through the cube) plus
//! adversarial families: axis-parallel tubes through the densest columns and
//! rows, and tubes through the two densest deepest-level cube clusters.

use crate::construction::Realization;
use crate::error::Error;
use crate::geometry::{distance_box_flat, distance_box_line_2d, AxisBox, Flat, INCIDENCE_TOL};
use crate::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TubeStrategy {
    /// Uniform direction and offset only.
    Stratified,
    /// Adversarial families only.
    Adversarial,
    /// Both (the default for acceptance scans).
    Combined,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidthScanRow {
    pub width: f64,
    pub tubes: usize,
    pub max_mass: f64,
    pub max_ratio: f64,
    pub resolution_limited: bool,
    pub argmax: Flat,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TubeScanReport {
    pub t: f64,
    pub rows: Vec<WidthScanRow>,
    pub overall_max: f64,
}

struct CubeSet {
    dim: usize,
    boxes: Vec<AxisBox>,
    mass: f64,
}

impl CubeSet {
    fn from_realization(r: &Realization) -> Self {
        let boxes: Vec<AxisBox> = r.deepest().iter().map(|q| q.to_box(&r.params)).collect();
        let mass = 1.0 / r.params.retained_f64(r.depth());
        Self {
            dim: r.params.dim,
            boxes,
            mass,
        }
    }

    /// Mass of cubes meeting the open strip around `line` of width `w`.
    fn strip_mass(&self, line: &Flat, width: f64) -> f64 {
        let half = width / 2.0 + INCIDENCE_TOL;
        let count = if self.dim == 2 {
            let u = &line.basis[0];
            let nu = [-u[1], u[0]];
            let off = nu[0] * line.base[0] + nu[1] * line.base[1];
            self.boxes
                .iter()
                .filter(|b| {
                    distance_box_line_2d([b.lo[0], b.lo[1]], [b.hi[0], b.hi[1]], nu, off) < half
                })
                .count()
        } else {
            self.boxes
                .iter()
                .filter(|b| distance_box_flat(b, line) < half)
                .count()
        };
        count as f64 * self.mass
    }
}

fn stratified_tubes(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Flat> {
    let radius = (dim as f64).sqrt() / 2.0;
    let center = vec![0.5; dim];
    (0..count)
        .map(|_| {
            if dim == 2 {
                let phi = rng.gen_range(0.0..PI);
                let c = rng.gen_range(-radius..radius);
                let nu = [-phi.sin(), phi.cos()];
                Flat::line(
                    vec![center[0] + c * nu[0], center[1] + c * nu[1]],
                    vec![phi.cos(), phi.sin()],
                )
                .expect("valid tube direction")
            } else {
                // Random direction on the sphere and offset in the
                // orthocomplement ball.
                loop {
                    let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let n: f64 = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if !(1e-3..=1.0).contains(&n) {
                        continue;
                    }
                    let dir: Vec<f64> = dir.iter().map(|x| x / n).collect();
                    let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..radius)).collect();
                    let along: f64 = raw.iter().zip(&dir).map(|(r, u)| r * u).sum();
                    let base: Vec<f64> = (0..dim)
                        .map(|i| center[i] + raw[i] - along * dir[i])
                        .collect();
                    break Flat::line(base, dir).expect("valid tube direction");
                }
            }
        })
        .collect()
}

/// Axis-parallel tubes through the densest columns/rows plus a line through
/// the two densest cube clusters, d = 2 only.
fn adversarial_tubes(cubes: &CubeSet) -> Vec<Flat> {
    if cubes.dim != 2 {
        return Vec::new();
    }
    let side = cubes
        .boxes
        .first()
        .map(|b| b.hi[0] - b.lo[0])
        .unwrap_or(1.0);
    let mut out = Vec::new();
    for axis in 0..2 {
        // Occupancy per grid slot along this axis.
        let mut counts: HashMap<i64, usize> = HashMap::new();
        for b in &cubes.boxes {
            *counts
                .entry((b.lo[axis] / side).round() as i64)
                .or_insert(0) += 1;
        }
        let mut slots: Vec<(i64, usize)> = counts.into_iter().collect();
        slots.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (slot, _) in slots.into_iter().take(10) {
            let c = (slot as f64 + 0.5) * side;
            let (base, dir) = if axis == 0 {
                (vec![c, 0.5], vec![0.0, 1.0])
            } else {
                (vec![0.5, c], vec![1.0, 0.0])
            };
            out.push(Flat::line(base, dir).expect("axis tube"));
        }
    }
    // Greedy densest clusters: score each cube by neighbors within 4 sides,
    // take the top two separated centers and run a tube through both.
    let centers: Vec<Vec<f64>> = cubes.boxes.iter().map(|b| b.center()).collect();
    let radius = 4.0 * side;
    let mut scored: Vec<(usize, usize)> = centers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let n = centers
                .iter()
                .filter(|o| (o[0] - c[0]).abs() <= radius && (o[1] - c[1]).abs() <= radius)
                .count();
            (n, i)
        })
        .map(|(n, i)| (i, n))
        .collect();
    scored.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    if let Some(&(first, _)) = scored.first() {
        if let Some(&(second, _)) = scored.iter().find(|(i, _)| {
            let (a, b) = (&centers[first], &centers[*i]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() > 8.0 * side
        }) {
            let a = centers[first].clone();
            let d = vec![centers[second][0] - a[0], centers[second][1] - a[1]];
            if let Ok(line) = Flat::line(a, d) {
                out.push(line);
            }
        }
    }
    out
}

/// Scan the maximum of `μ(E ∩ T) / w^t` over candidate tubes per width.
pub fn tube_sup_scan(
    r: &Realization,
    t: f64,
    widths: &[f64],
    tubes_per_width: usize,
    strategy: TubeStrategy,
    seed: u64,
) -> Result<TubeScanReport> {
    Ok(
        tube_sup_scan_multi(r, &[t], widths, tubes_per_width, strategy, seed)?
            .pop()
            .expect("one report per exponent"),
    )
}

/// Same scan evaluated for several exponents at once; the per-width argmax
/// tube maximizes the mass and is shared across exponents.
pub fn tube_sup_scan_multi(
    r: &Realization,
    t_values: &[f64],
    widths: &[f64],
    tubes_per_width: usize,
    strategy: TubeStrategy,
    seed: u64,
) -> Result<Vec<TubeScanReport>> {
    if widths.is_empty() || t_values.is_empty() {
        return Err(Error::InvalidArgument("need widths and exponents".into()));
    }
    for &w in widths {
        if !(w > 0.0 && w <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "widths must lie in (0, 1], got {w}"
            )));
        }
    }
    let cubes = CubeSet::from_realization(r);
    let r_depth = r.params.scale_f64(r.depth());
    let adversarial = match strategy {
        TubeStrategy::Stratified => Vec::new(),
        _ => adversarial_tubes(&cubes),
    };

    let per_width: Vec<(f64, f64, Flat)> = widths
        .par_iter()
        .enumerate()
        .map(|(wi, &width)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((wi as u64) << 32));
            let mut candidates = match strategy {
                TubeStrategy::Adversarial => Vec::new(),
                _ => stratified_tubes(cubes.dim, tubes_per_width, &mut rng),
            };
            candidates.extend(adversarial.iter().cloned());
            let mut best_mass = -1.0;
            let mut best: Option<&Flat> = None;
            for tube in &candidates {
                let mass = cubes.strip_mass(tube, width);
                if mass > best_mass {
                    best_mass = mass;
                    best = Some(tube);
                }
            }
            (
                width,
                best_mass,
                best.expect("at least one candidate").clone(),
            )
        })
        .collect();

    Ok(t_values
        .iter()
        .map(|&t| {
            let rows: Vec<WidthScanRow> = per_width
                .iter()
                .map(|(width, mass, argmax)| WidthScanRow {
                    width: *width,
                    tubes: tubes_per_width + adversarial.len(),
                    max_mass: *mass,
                    max_ratio: mass / width.powf(t),
                    resolution_limited: *width < r_depth,
                    argmax: argmax.clone(),
                })
                .collect();
            let overall = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
            TubeScanReport {
                t,
                rows,
                overall_max: overall,
            }
        })
        .collect())
}
