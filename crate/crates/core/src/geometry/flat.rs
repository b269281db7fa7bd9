//! Affine flats, strips, plane angles and the projection sup-metric.

use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub(crate) fn cross3(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

const ORTHO_TOL: f64 = 1e-12;

/// An affine m-plane `W` in `R^d`: base point plus an orthonormal basis of
/// its direction space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Flat {
    pub base: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl Flat {
    /// Requires `basis` orthonormal within 1e-12 and `1 <= m <= d-1`.
    pub fn new(base: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self> {
        let d = base.len();
        let m = basis.len();
        if d < 2 || m == 0 || m > d - 1 {
            return Err(Error::InvalidFlat(format!(
                "need 1 <= m <= d-1, got m={m}, d={d}"
            )));
        }
        for b in &basis {
            if b.len() != d {
                return Err(Error::InvalidFlat("basis vector of wrong length".into()));
            }
        }
        for i in 0..m {
            for j in i..m {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot(&basis[i], &basis[j]) - expect).abs() > ORTHO_TOL {
                    return Err(Error::InvalidFlat("basis not orthonormal".into()));
                }
            }
        }
        Ok(Self { base, basis })
    }

    /// Gram-Schmidt a spanning set into an orthonormal basis.
    pub fn from_spanning(base: Vec<f64>, spanning: Vec<Vec<f64>>) -> Result<Self> {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(spanning.len());
        for v in spanning {
            let mut w = v;
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
            let n = norm(&w);
            if n < 1e-10 {
                return Err(Error::InvalidFlat("degenerate spanning set".into()));
            }
            basis.push(scale(&w, 1.0 / n));
        }
        Self::new(base, basis)
    }

    /// A line through `point` with direction `dir` (normalized here).
    pub fn line(point: Vec<f64>, dir: Vec<f64>) -> Result<Self> {
        let n = norm(&dir);
        if n < 1e-12 {
            return Err(Error::InvalidFlat("zero direction".into()));
        }
        Self::new(point, vec![scale(&dir, 1.0 / n)])
    }

    /// A hyperplane through `point` with the given normal.
    pub fn hyperplane(normal: Vec<f64>, point: Vec<f64>) -> Result<Self> {
        let d = normal.len();
        let n = norm(&normal);
        if n < 1e-12 {
            return Err(Error::InvalidFlat("zero normal".into()));
        }
        let nu = scale(&normal, 1.0 / n);
        // Orthonormal complement of the normal from the standard basis.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let mut w = sub(&e, &scale(&nu, dot(&e, &nu)));
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
            let nw = norm(&w);
            if nw > 1e-6 {
                basis.push(scale(&w, 1.0 / nw));
                if basis.len() == d - 1 {
                    break;
                }
            }
        }
        Self::new(point, basis)
    }

    /// The coordinate hyperplane `{x_i = 0}`.
    pub fn coordinate_hyperplane(d: usize, i: usize) -> Self {
        let mut normal = vec![0.0; d];
        normal[i] = 1.0;
        Self::hyperplane(normal, vec![0.0; d]).expect("coordinate hyperplane is valid")
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_hyperplane(&self) -> bool {
        self.dim() == self.ambient_dim() - 1
    }

    /// Orthogonal projection of `x` onto the affine flat.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let rel = sub(x, &self.base);
        let mut out = self.base.clone();
        for b in &self.basis {
            let c = dot(&rel, b);
            for (oi, bi) in out.iter_mut().zip(b) {
                *oi += c * bi;
            }
        }
        out
    }

    /// Projection of a vector onto the direction space `P_W v`.
    pub fn direction_component(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for b in &self.basis {
            let c = dot(v, b);
            for (oi, bi) in out.iter_mut().zip(b) {
                *oi += c * bi;
            }
        }
        out
    }

    /// Euclidean distance from `x` to the flat.
    pub fn distance(&self, x: &[f64]) -> f64 {
        norm(&sub(x, &self.project(x)))
    }

    /// Unit normal; only defined for hyperplanes.
    pub fn normal(&self) -> Result<Vec<f64>> {
        if !self.is_hyperplane() {
            return Err(Error::DimensionMismatch(
                "normal defined only for hyperplanes".into(),
            ));
        }
        let d = self.ambient_dim();
        // Residual of the standard basis vector least aligned with the flat.
        let mut best: Option<Vec<f64>> = None;
        let mut best_norm = 0.0;
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let res = sub(&e, &self.direction_component(&e));
            let n = norm(&res);
            if n > best_norm {
                best_norm = n;
                best = Some(res);
            }
        }
        let res = best.expect("d >= 2");
        Ok(scale(&res, 1.0 / best_norm))
    }
}

/// The width-`w` open neighborhood of a flat; tubes are the `m = 1` case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Strip {
    pub flat: Flat,
    pub width: f64,
}

impl Strip {
    pub fn new(flat: Flat, width: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::InvalidArgument(
                "strip width must be positive".into(),
            ));
        }
        Ok(Self { flat, width })
    }

    /// True iff `x` lies in the open strip.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.flat.distance(x) < self.width / 2.0
    }
}

/// Angle `θ(H, W) ∈ [0, π/2]` between a hyperplane `H` and a flat `W`,
/// depending only on direction spaces. Zero iff the direction space of `W`
/// is contained in that of `H`; computed as `arcsin ‖P_W ν‖` for the unit
/// normal `ν` of `H`.
pub fn plane_angle(h: &Flat, w: &Flat) -> Result<f64> {
    if !h.is_hyperplane() {
        return Err(Error::DimensionMismatch(
            "first argument must be a hyperplane".into(),
        ));
    }
    if h.ambient_dim() != w.ambient_dim() {
        return Err(Error::DimensionMismatch("ambient dimensions differ".into()));
    }
    let nu = h.normal()?;
    let s = norm(&w.direction_component(&nu)).clamp(0.0, 1.0);
    Ok(s.asin())
}

/// Minimum angle of `w` against the `d` coordinate hyperplanes.
pub fn min_coordinate_angle(w: &Flat) -> f64 {
    let d = w.ambient_dim();
    let mut min = f64::INFINITY;
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        let s = norm(&w.direction_component(&e)).clamp(0.0, 1.0);
        min = min.min(s.asin());
    }
    min
}

/// Membership in the angle-bounded family at level `n`: every coordinate
/// hyperplane angle is at least `alpha = r_n^d`.
pub fn gamma_membership(w: &Flat, alpha: f64) -> bool {
    min_coordinate_angle(w) >= alpha
}

/// The projection sup-metric `ρ(V, W) = sup_{x ∈ [0,1]^d} |π_V(x) − π_W(x)|`.
///
/// The difference of the two projections is affine in `x` and `|·|` is
/// convex, so the sup over the cube is attained at a vertex; all `2^d`
/// vertices are evaluated.
pub fn projection_metric(v: &Flat, w: &Flat) -> Result<f64> {
    if v.dim() != w.dim() || v.ambient_dim() != w.ambient_dim() {
        return Err(Error::DimensionMismatch(
            "flats must share dimension and ambient space".into(),
        ));
    }
    let d = v.ambient_dim();
    let mut sup = 0.0f64;
    for mask in 0u32..(1 << d) {
        let x: Vec<f64> = (0..d).map(|i| ((mask >> i) & 1) as f64).collect();
        let diff = norm(&sub(&v.project(&x), &w.project(&x)));
        sup = sup.max(diff);
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn new_rejects_non_orthonormal_and_bad_shapes() {
        assert!(Flat::new(vec![0.0, 0.0], vec![vec![1.0, 1.0]]).is_err());
        assert!(Flat::new(vec![0.0, 0.0], vec![]).is_err());
        assert!(Flat::new(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).is_err()); // m = d not allowed
        assert!(Flat::new(vec![0.0, 0.0], vec![vec![1.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn from_spanning_orthonormalizes() {
        let w = Flat::from_spanning(
            vec![0.0, 0.0, 0.0],
            vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(w.dim(), 2);
        assert_abs_diff_eq!(dot(&w.basis[0], &w.basis[1]), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(norm(&w.basis[0]), 1.0, epsilon = 1e-12);
        assert!(Flat::from_spanning(
            vec![0.0, 0.0, 0.0],
            vec![vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]]
        )
        .is_err());
    }

    #[test]
    fn project_and_distance() {
        let line = Flat::line(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let p = line.project(&[1.0, 0.0]);
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(line.distance(&[1.0, 0.0]), 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn hyperplane_basis_spans_the_orthocomplement() {
        let h = Flat::hyperplane(vec![1.0, 2.0, -1.0], vec![0.5, 0.5, 0.5]).unwrap();
        assert_eq!(h.dim(), 2);
        let nu = h.normal().unwrap();
        let expected = 6f64.sqrt();
        assert_abs_diff_eq!(nu[0].abs() * expected, 1.0, epsilon = 1e-9);
        for b in &h.basis {
            assert_abs_diff_eq!(dot(b, &nu), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn plane_angle_known_values() {
        // Vertical line against the horizontal axis line in d=2.
        let h = Flat::coordinate_hyperplane(2, 1); // {y = 0}
        let vertical = Flat::line(vec![0.3, 0.0], vec![0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(
            plane_angle(&h, &vertical).unwrap(),
            FRAC_PI_2,
            epsilon = 1e-12
        );
        let diagonal = Flat::line(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(
            plane_angle(&h, &diagonal).unwrap(),
            FRAC_PI_4,
            epsilon = 1e-12
        );
        // Zero iff the direction space lies inside the hyperplane.
        let horizontal = Flat::line(vec![0.0, 0.7], vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(plane_angle(&h, &horizontal).unwrap(), 0.0, epsilon = 1e-12);
        assert!(plane_angle(&horizontal, &h).is_ok()); // a 2D line is a hyperplane
        let line3 = Flat::line(vec![0.0; 3], vec![1.0, 0.0, 0.0]).unwrap();
        assert!(plane_angle(&line3, &line3).is_err());
    }

    #[test]
    fn plane_angle_matches_direction_maximization_oracle() {
        // sin θ(H, W) must equal the maximum of |<u, ν>| over unit vectors u
        // in the direction space of W, sampled densely on its unit circle.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let h = Flat::hyperplane(
                (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                vec![0.0; 3],
            );
            let w = Flat::from_spanning(
                vec![0.0; 3],
                vec![
                    (0..3).map(|_| rng.gen_range(-1.0..1.0f64)).collect(),
                    (0..3).map(|_| rng.gen_range(-1.0..1.0f64)).collect(),
                ],
            );
            let (Ok(h), Ok(w)) = (h, w) else { continue };
            let nu = h.normal().unwrap();
            let mut best = 0.0f64;
            for k in 0..4000 {
                let t = k as f64 / 4000.0 * std::f64::consts::TAU;
                let u: Vec<f64> = (0..3)
                    .map(|i| t.cos() * w.basis[0][i] + t.sin() * w.basis[1][i])
                    .collect();
                best = best.max(dot(&u, &nu).abs());
            }
            let theta = plane_angle(&h, &w).unwrap();
            assert_abs_diff_eq!(theta.sin(), best, epsilon = 1e-6);
        }
    }

    #[test]
    fn min_coordinate_angle_flags_axis_parallel_flats() {
        let horizontal = Flat::line(vec![0.0, 0.5], vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(min_coordinate_angle(&horizontal), 0.0, epsilon = 1e-12);
        assert!(!gamma_membership(&horizontal, 1e-6));
        let diagonal = Flat::line(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(min_coordinate_angle(&diagonal), FRAC_PI_4, epsilon = 1e-12);
        assert!(gamma_membership(&diagonal, 0.5));
    }

    #[test]
    fn strip_contains_respects_open_width() {
        let line = Flat::line(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        let s = Strip::new(line, 0.2).unwrap();
        assert!(s.contains(&[0.5, 0.0999]));
        assert!(!s.contains(&[0.5, 0.1])); // boundary excluded
        assert!(Strip::new(s.flat.clone(), 0.0).is_err());
    }

    #[test]
    fn projection_metric_matches_grid_search_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let v = Flat::line(
                vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
                vec![rng.gen_range(-1.0..1.0), rng.gen_range(0.1..1.0)],
            )
            .unwrap();
            let w = Flat::line(
                vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
                vec![rng.gen_range(-1.0..1.0), rng.gen_range(0.1..1.0)],
            )
            .unwrap();
            let rho = projection_metric(&v, &w).unwrap();
            let mut grid_max = 0.0f64;
            for i in 0..=20 {
                for j in 0..=20 {
                    let x = [i as f64 / 20.0, j as f64 / 20.0];
                    let diff = norm(&sub(&v.project(&x), &w.project(&x)));
                    grid_max = grid_max.max(diff);
                }
            }
            // Convexity: the vertex sup dominates every interior point and
            // is attained on the grid boundary.
            assert!(rho >= grid_max - 1e-12);
            assert!(rho <= grid_max + 1e-9 || (rho - grid_max) / rho.max(1e-12) < 1e-9);
        }
    }

    #[test]
    fn projection_metric_is_symmetric_and_zero_on_self() {
        let v = Flat::line(vec![0.1, 0.2], vec![3.0, 1.0]).unwrap();
        let w = Flat::line(vec![0.4, 0.0], vec![1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(projection_metric(&v, &v).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            projection_metric(&v, &w).unwrap(),
            projection_metric(&w, &v).unwrap(),
            epsilon = 1e-12
        );
        let u3 = Flat::line(vec![0.0; 3], vec![1.0, 1.0, 0.0]).unwrap();
        assert!(projection_metric(&v, &u3).is_err());
    }
}
