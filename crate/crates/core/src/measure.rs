//! The natural measure on a realization.
//!
//! Every retained level-n cube carries mass `P_n^{-1}`, exactly. Ball
//! measures are evaluated against the deepest level with an explicit
//! all-in/all-out bracket around the point estimate; planar projection
//! measures are exact interval unions on rational endpoints.

use crate::construction::{ratio_to_f64, CubeAddress, Rational, Realization};
use crate::error::Error;
use crate::geometry::AxisBox;
use crate::Result;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The natural measure of a realization, read at a fixed depth.
pub struct NaturalMeasure<'a> {
    realization: &'a Realization,
    depth: usize,
}

/// Ball mass with its all-in/all-out bracket. Boundary cubes contribute
/// `mass * clipped fraction` to the estimate, all of their mass to the upper
/// bracket and none to the lower.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BallMass {
    pub lower: f64,
    pub estimate: f64,
    pub upper: f64,
}

/// One evaluated (point, radius) pair of a regularity scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub point: Vec<f64>,
    pub radius: f64,
    pub mass: BallMass,
    pub ratio: f64,
}

/// Extremal ratios `μ(B(x,r)) / r^q` over a point/radius grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AhlforsScan {
    pub exponent: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub max_bracket_width: f64,
    pub rows: Vec<ScanRow>,
}

impl<'a> NaturalMeasure<'a> {
    pub fn new(realization: &'a Realization, depth: usize) -> Result<Self> {
        if depth == 0 || depth > realization.depth() {
            return Err(Error::DepthExceeded {
                requested: depth,
                depth: realization.depth(),
            });
        }
        Ok(Self { realization, depth })
    }

    pub fn at_deepest(realization: &'a Realization) -> Self {
        Self {
            realization,
            depth: realization.depth(),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `μ_0(Q)`: `P_level^{-1}` if the cube is retained, zero otherwise.
    pub fn cube_mass(&self, q: &CubeAddress) -> Result<Rational> {
        if q.level() > self.depth {
            return Err(Error::DepthExceeded {
                requested: q.level(),
                depth: self.depth,
            });
        }
        if q.level() == 0 {
            return Ok(Rational::new(1, 1));
        }
        if self.realization.contains(q) {
            Ok(Rational::new(
                1,
                self.realization.params.retained(q.level()),
            ))
        } else {
            Ok(Rational::zero())
        }
    }

    /// `μ(B(x, r))` evaluated by whole-cube inclusion/exclusion at this
    /// depth. Boundary cubes are resolved by 4^d-point subsampling and the
    /// all-in/all-out bracket is returned alongside.
    pub fn ball_mass(&self, x: &[f64], radius: f64) -> Result<BallMass> {
        let params = &self.realization.params;
        let resolution = params.scale_f64(self.depth);
        if radius < resolution {
            return Err(Error::InsufficientResolution { radius, resolution });
        }
        let mass = 1.0 / params.retained_f64(self.depth);
        let mut lower = 0.0;
        let mut estimate = 0.0;
        let mut upper = 0.0;
        for q in self.realization.cubes(self.depth) {
            let b = q.to_box(params);
            let near = point_box_distance(x, &b);
            if near >= radius {
                continue;
            }
            let far = max_vertex_distance(x, &b);
            if far <= radius {
                lower += mass;
                estimate += mass;
                upper += mass;
            } else {
                upper += mass;
                estimate += mass * clipped_fraction(x, radius, &b);
            }
        }
        Ok(BallMass {
            lower,
            estimate,
            upper,
        })
    }

    /// Extremal `μ(B(x,r))/r^exponent` over randomly chosen deepest-level
    /// cube centers and the given radii.
    pub fn ahlfors_scan(
        &self,
        samples: usize,
        radii: &[f64],
        exponent: f64,
        seed: u64,
    ) -> Result<AhlforsScan> {
        if radii.is_empty() {
            return Err(Error::EmptyRadii);
        }
        let params = &self.realization.params;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cubes: Vec<&CubeAddress> = self.realization.cubes(self.depth).iter().collect();
        cubes.shuffle(&mut rng);
        cubes.truncate(samples.max(1));

        let mut rows = Vec::with_capacity(cubes.len() * radii.len());
        let mut min_ratio = f64::INFINITY;
        let mut max_ratio = f64::NEG_INFINITY;
        let mut max_bracket = 0.0f64;
        for q in cubes {
            let x = q.to_box(params).center();
            for &r in radii {
                let mass = self.ball_mass(&x, r)?;
                let ratio = mass.estimate / r.powf(exponent);
                min_ratio = min_ratio.min(ratio);
                max_ratio = max_ratio.max(ratio);
                max_bracket = max_bracket.max(mass.upper - mass.lower);
                rows.push(ScanRow {
                    point: x.clone(),
                    radius: r,
                    mass,
                    ratio,
                });
            }
        }
        Ok(AhlforsScan {
            exponent,
            min_ratio,
            max_ratio,
            max_bracket_width: max_bracket,
            rows,
        })
    }
}

fn point_box_distance(x: &[f64], b: &AxisBox) -> f64 {
    x.iter()
        .zip(b.lo.iter().zip(&b.hi))
        .map(|(xi, (lo, hi))| {
            let d = (lo - xi).max(xi - hi).max(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn max_vertex_distance(x: &[f64], b: &AxisBox) -> f64 {
    x.iter()
        .zip(b.lo.iter().zip(&b.hi))
        .map(|(xi, (lo, hi))| {
            let d = (xi - lo).abs().max((xi - hi).abs());
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Fraction of the cube inside the ball, by a fixed 4-per-axis midpoint grid.
fn clipped_fraction(x: &[f64], radius: f64, b: &AxisBox) -> f64 {
    let d = b.dim();
    let per_axis = 4usize;
    let total = per_axis.pow(d as u32);
    let mut hits = 0usize;
    let r2 = radius * radius;
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let mut dist2 = 0.0;
        for i in 0..d {
            let f = (idx[i] as f64 + 0.5) / per_axis as f64;
            let p = b.lo[i] + f * (b.hi[i] - b.lo[i]);
            dist2 += (p - x[i]) * (p - x[i]);
        }
        if dist2 <= r2 {
            hits += 1;
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < per_axis {
                break;
            }
            *slot = 0;
        }
    }
    hits as f64 / total as f64
}

/// Exact Lebesgue measure of the coordinate projection of the deepest-level
/// cube set, d = 2 only: sorted union of the projected M-adic intervals.
pub fn projection_measure(r: &Realization, axis: usize) -> Result<Rational> {
    if r.params.dim != 2 {
        return Err(Error::ProjectionUnsupported(r.params.dim));
    }
    if axis > 1 {
        return Err(Error::InvalidArgument(format!(
            "axis must be 0 (x) or 1 (y), got {axis}"
        )));
    }
    let depth = r.depth();
    let side = r.params.scale(depth);
    let mut intervals: Vec<Rational> = r
        .cubes(depth)
        .iter()
        .map(|q| q.lower_corner(&r.params)[axis])
        .collect();
    intervals.sort_unstable();
    intervals.dedup();

    let mut total = Rational::zero();
    let mut cur_start: Option<(Rational, Rational)> = None;
    for a in intervals {
        let b = a + side;
        match cur_start {
            None => cur_start = Some((a, b)),
            Some((s, e)) => {
                if a <= e {
                    cur_start = Some((s, e.max(b)));
                } else {
                    total += e - s;
                    cur_start = Some((a, b));
                }
            }
        }
    }
    if let Some((s, e)) = cur_start {
        total += e - s;
    }
    Ok(total)
}

/// Convenience: the projection measure as f64.
pub fn projection_measure_f64(r: &Realization, axis: usize) -> Result<f64> {
    Ok(ratio_to_f64(&projection_measure(r, axis)?))
}
