//! Exact flat/cube intersection measures.
//!
//! Supported exactly: segment length of a line clipped to an axis-aligned box
//! (slab method, any dimension) and the polygon area of a hyperplane slice of
//! a cube in d = 3. Everything else goes through the Monte-Carlo estimator,
//! which doubles as the independent oracle for the exact paths.

use super::flat::{add, cross3, dot, norm, scale, sub, Flat};
use super::AxisBox;
use crate::error::Error;
use crate::Result;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PARALLEL_TOL: f64 = 1e-14;
const POINT_DEDUP_TOL: f64 = 1e-10;

/// Parameter interval of `{base + t·dir}` inside the closed box, if any.
pub fn line_box_interval(line: &Flat, b: &AxisBox) -> Option<(f64, f64)> {
    let p = &line.base;
    let u = &line.basis[0];
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for i in 0..b.dim() {
        if u[i].abs() < PARALLEL_TOL {
            if p[i] < b.lo[i] || p[i] > b.hi[i] {
                return None;
            }
        } else {
            let a = (b.lo[i] - p[i]) / u[i];
            let c = (b.hi[i] - p[i]) / u[i];
            t0 = t0.max(a.min(c));
            t1 = t1.min(a.max(c));
        }
    }
    if t1 >= t0 {
        Some((t0, t1))
    } else {
        None
    }
}

fn segment_length(line: &Flat, b: &AxisBox) -> f64 {
    match line_box_interval(line, b) {
        Some((t0, t1)) => t1 - t0,
        None => 0.0,
    }
}

/// Vertices (in plane-chart coordinates) of the convex polygon cut from the
/// box by a hyperplane in d = 3.
fn plane_box_polygon(plane: &Flat, b: &AxisBox) -> Result<Vec<[f64; 2]>> {
    let nu = plane.normal()?;
    let h = dot(&nu, &plane.base);
    let verts: Vec<Vec<f64>> = b.vertices().collect();
    let signed: Vec<f64> = verts.iter().map(|v| dot(&nu, v) - h).collect();

    let mut pts: Vec<Vec<f64>> = Vec::new();
    let push = |p: Vec<f64>, pts: &mut Vec<Vec<f64>>| {
        if !pts.iter().any(|q| norm(&sub(q, &p)) < POINT_DEDUP_TOL) {
            pts.push(p);
        }
    };
    // Cube vertices on the plane count as polygon vertices.
    for (v, s) in verts.iter().zip(&signed) {
        if s.abs() < POINT_DEDUP_TOL {
            push(v.clone(), &mut pts);
        }
    }
    // Each box edge differs in exactly one coordinate bit.
    let n = verts.len();
    for a in 0..n {
        for bit in 0..b.dim() {
            let c = a ^ (1 << bit);
            if c <= a {
                continue;
            }
            let (sa, sc) = (signed[a], signed[c]);
            if sa.abs() < POINT_DEDUP_TOL || sc.abs() < POINT_DEDUP_TOL {
                continue;
            }
            if sa * sc < 0.0 {
                let t = sa / (sa - sc);
                let p: Vec<f64> = verts[a]
                    .iter()
                    .zip(&verts[c])
                    .map(|(x, y)| x + t * (y - x))
                    .collect();
                push(p, &mut pts);
            }
        }
    }
    if pts.len() < 3 {
        return Ok(Vec::new());
    }
    // Chart coordinates in the plane basis, sorted around the centroid.
    let m = pts.len() as f64;
    let chart: Vec<[f64; 2]> = pts
        .iter()
        .map(|p| {
            let rel = sub(p, &plane.base);
            [dot(&rel, &plane.basis[0]), dot(&rel, &plane.basis[1])]
        })
        .collect();
    let cx = chart.iter().map(|p| p[0]).sum::<f64>() / m;
    let cy = chart.iter().map(|p| p[1]).sum::<f64>() / m;
    let mut chart = chart;
    chart.sort_by(|a, b| {
        let ta = (a[1] - cy).atan2(a[0] - cx);
        let tb = (b[1] - cy).atan2(b[0] - cx);
        ta.partial_cmp(&tb).unwrap()
    });
    Ok(chart)
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        twice += poly[i][0] * poly[j][1] - poly[j][0] * poly[i][1];
    }
    twice.abs() / 2.0
}

/// Clip a convex polygon (chart coords) to the half-plane `g(p) >= 0` with
/// `g(p) = a·p + c` (Sutherland-Hodgman step).
fn clip_halfplane(poly: &[[f64; 2]], a: [f64; 2], c: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let g = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] + c;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (gp, gq) = (g(&p), g(&q));
        if gp >= 0.0 {
            out.push(p);
        }
        if (gp > 0.0 && gq < 0.0) || (gp < 0.0 && gq > 0.0) {
            let t = gp / (gp - gq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// `H^m(W ∩ Q)`, exact. Supported: m = 1 in any dimension and m = d-1 for
/// d <= 3; other shapes return `UnsupportedFlatShape` (use the Monte-Carlo
/// estimator for those).
pub fn flat_cube_measure(w: &Flat, b: &AxisBox) -> Result<f64> {
    let d = w.ambient_dim();
    if d != b.dim() {
        return Err(Error::DimensionMismatch(
            "flat and box ambient dimensions differ".into(),
        ));
    }
    match (d, w.dim()) {
        (_, 1) => Ok(segment_length(w, b)),
        (3, 2) => Ok(polygon_area(&plane_box_polygon(w, b)?)),
        (d, m) => Err(Error::UnsupportedFlatShape {
            dim: d,
            m,
            what: "exact flat/cube measure".into(),
        }),
    }
}

/// Monte-Carlo estimate of `H^m(W ∩ Q)` with its standard error.
///
/// The flat is parameterized isometrically by its orthonormal basis; the
/// parameter box is the bounding box of the cube's vertices in chart
/// coordinates, so chart Lebesgue measure equals Hausdorff measure.
pub fn flat_cube_measure_mc(w: &Flat, b: &AxisBox, samples: usize, seed: u64) -> (f64, f64) {
    let m = w.dim();
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for v in b.vertices() {
        let rel = sub(&v, &w.base);
        for (j, bj) in w.basis.iter().enumerate() {
            let c = dot(&rel, bj);
            lo[j] = lo[j].min(c);
            hi[j] = hi[j].max(c);
        }
    }
    let vol: f64 = lo.iter().zip(&hi).map(|(a, c)| (c - a).max(0.0)).product();
    if vol == 0.0 {
        return (0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut x = w.base.clone();
        for (j, bj) in w.basis.iter().enumerate() {
            let c = rng.gen_range(lo[j]..hi[j]);
            for (xi, bi) in x.iter_mut().zip(bj) {
                *xi += c * bi;
            }
        }
        if b.contains(&x, 0.0) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let est = vol * p;
    let se = vol * (p * (1.0 - p) / samples as f64).sqrt();
    (est, se)
}

/// `H^m` of the boundary part `{x ∈ Q ∩ W : dist(x, ∂Q) <= eps}`, exact for
/// the same shapes as [`flat_cube_measure`].
pub fn boundary_measure(w: &Flat, b: &AxisBox, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let d = w.ambient_dim();
    match (d, w.dim()) {
        (_, 1) => {
            let Some((t0, t1)) = line_box_interval(w, b) else {
                return Ok(0.0);
            };
            let total = t1 - t0;
            // Interior set {dist(x, ∂Q) > eps} along the segment is an
            // interval: each face gives a linear constraint in t.
            let p = &w.base;
            let u = &w.basis[0];
            let mut i0 = t0;
            let mut i1 = t1;
            for i in 0..b.dim() {
                let (lo, hi) = (b.lo[i] + eps, b.hi[i] - eps);
                if lo > hi {
                    return Ok(total);
                }
                if u[i].abs() < PARALLEL_TOL {
                    if p[i] <= lo || p[i] >= hi {
                        return Ok(total);
                    }
                } else {
                    let a = (lo - p[i]) / u[i];
                    let c = (hi - p[i]) / u[i];
                    i0 = i0.max(a.min(c));
                    i1 = i1.min(a.max(c));
                }
            }
            Ok(total - (i1 - i0).max(0.0))
        }
        (3, 2) => {
            let poly = plane_box_polygon(w, b)?;
            let total = polygon_area(&poly);
            if poly.is_empty() {
                return Ok(0.0);
            }
            // Shrink each face constraint by eps and clip in chart coords:
            // x_i(α,β) = base_i + α b1_i + β b2_i.
            let mut inner = poly;
            for i in 0..3 {
                let a = [w.basis[0][i], w.basis[1][i]];
                inner = clip_halfplane(&inner, a, w.base[i] - (b.lo[i] + eps));
                inner = clip_halfplane(&inner, [-a[0], -a[1]], (b.hi[i] - eps) - w.base[i]);
                if inner.len() < 3 {
                    return Ok(total);
                }
            }
            Ok(total - polygon_area(&inner))
        }
        (d, m) => Err(Error::UnsupportedFlatShape {
            dim: d,
            m,
            what: "exact boundary measure".into(),
        }),
    }
}

/// Euclidean distance between an axis-aligned box and a flat.
pub fn distance_box_flat(b: &AxisBox, w: &Flat) -> f64 {
    if w.is_hyperplane() {
        // Signed vertex distances: mixed signs mean the hyperplane crosses.
        let nu = w.normal().expect("hyperplane");
        let h = dot(&nu, &w.base);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in b.vertices() {
            let s = dot(&nu, &v) - h;
            min = min.min(s);
            max = max.max(s);
        }
        if min <= 0.0 && max >= 0.0 {
            return 0.0;
        }
        return min.abs().min(max.abs());
    }
    if w.dim() == 1 && line_box_interval(w, b).is_some() {
        return 0.0;
    }
    // Alternating projections between the box and the flat.
    let mut x = b.center();
    let mut dist = f64::INFINITY;
    for _ in 0..500 {
        let y = w.project(&x);
        x = b.clamp(&y);
        let nd = norm(&sub(&x, &y));
        if (dist - nd).abs() < 1e-14 {
            return nd;
        }
        dist = nd;
    }
    dist
}

/// Distance between a box and a line in 2D, closed form (a line is a
/// hyperplane there); kept as a fast path for strip scans.
pub fn distance_box_line_2d(lo: [f64; 2], hi: [f64; 2], nu: [f64; 2], offset: f64) -> f64 {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in &[lo[0], hi[0]] {
        for &y in &[lo[1], hi[1]] {
            let s = nu[0] * x + nu[1] * y - offset;
            min = min.min(s);
            max = max.max(s);
        }
    }
    if min <= 0.0 && max >= 0.0 {
        0.0
    } else {
        min.abs().min(max.abs())
    }
}

/// Orientation helper for 3D tests: a plane through three points.
pub fn plane_through(p0: &[f64], p1: &[f64], p2: &[f64]) -> Result<Flat> {
    let n = cross3(&sub(p1, p0), &sub(p2, p0));
    Flat::hyperplane(n, p0.to_vec())
}

/// A point of the flat offset by chart coordinates, used by samplers.
pub fn flat_point(w: &Flat, coords: &[f64]) -> Vec<f64> {
    let mut x = w.base.clone();
    for (c, bj) in coords.iter().zip(&w.basis) {
        x = add(&x, &scale(bj, *c));
    }
    x
}
