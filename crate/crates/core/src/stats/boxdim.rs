//! Box-counting dimension of coordinate-line projections.

use crate::construction::Realization;
use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxDimReport {
    pub direction: Vec<f64>,
    /// (delta, N(delta)) per tested scale.
    pub counts: Vec<(f64, usize)>,
    pub slope: f64,
    pub residual: f64,
}

/// Least-squares slope of `log N(δ)` against `log(1/δ)` for the projection
/// of the deepest-level cube set onto the line through the origin with the
/// given direction, counted on δ-grids for `δ = r_j`, `j ∈ depths`.
pub fn box_dimension_estimate(
    r: &Realization,
    direction: &[f64],
    depths: std::ops::RangeInclusive<usize>,
) -> Result<BoxDimReport> {
    let d = r.params.dim;
    if direction.len() != d {
        return Err(Error::DimensionMismatch(
            "direction length must match ambient dimension".into(),
        ));
    }
    let norm: f64 = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::InvalidArgument("zero direction".into()));
    }
    let v: Vec<f64> = direction.iter().map(|x| x / norm).collect();
    let depths: Vec<usize> = depths.filter(|&j| j <= r.depth()).collect();
    if depths.len() < 3 {
        return Err(Error::InsufficientScales(depths.len()));
    }

    // Projection interval of each deepest cube onto the line coordinate.
    let side = r.params.scale_f64(r.depth());
    let spread: f64 = v.iter().map(|vi| vi.abs()).sum::<f64>() * side;
    let intervals: Vec<(f64, f64)> = r
        .deepest()
        .iter()
        .map(|q| {
            let corner = q.to_box(&r.params).lo;
            let base: f64 = corner.iter().zip(&v).map(|(c, vi)| c * vi).sum();
            let lo = base + v.iter().map(|vi| vi.min(0.0)).sum::<f64>() * side;
            (lo, lo + spread)
        })
        .collect();

    let mut counts = Vec::with_capacity(depths.len());
    for &j in &depths {
        let delta = r.params.scale_f64(j);
        let mut cells: HashSet<i64> = HashSet::new();
        for &(lo, hi) in &intervals {
            // Count half-open grid cells [c delta, (c+1) delta) meeting
            // [lo, hi): a cell touched only at its boundary is not counted.
            let a = (lo / delta).floor() as i64;
            let b = ((hi / delta).ceil() as i64 - 1).max(a);
            for c in a..=b {
                cells.insert(c);
            }
        }
        counts.push((delta, cells.len()));
    }

    // Fit log N = slope * log(1/δ) + intercept.
    let xs: Vec<f64> = counts.iter().map(|(d, _)| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(BoxDimReport {
        direction: v,
        counts,
        slope,
        residual,
    })
}
