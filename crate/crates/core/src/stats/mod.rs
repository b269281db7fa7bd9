//! Monte-Carlo experiments on intersection statistics.

mod boxdim;
mod concentration;
mod tubes;

pub use boxdim::{box_dimension_estimate, BoxDimReport};
pub use concentration::{
    conditional_mgf_check, good_event_frequency, martingale_check, tail_probability_check,
    tail_trend, GoodEventReport, MartingaleReport, MgfReport, TailReport,
};
pub use tubes::{tube_sup_scan, tube_sup_scan_multi, TubeScanReport, TubeStrategy, WidthScanRow};

use crate::construction::{ConstructionParams, CubeAddress, Realization};
use crate::error::Error;
use crate::geometry::{flat_cube_measure, realization_flat_measure, Flat};
use crate::Result;
use serde::{Deserialize, Serialize};

/// Statistical error budgets, fixed globally: means are accepted within
/// 4 standard errors, frequencies within 3.
pub const MEAN_SIGMA: f64 = 4.0;
pub const FREQ_SIGMA: f64 = 3.0;

/// Parameters of the concentration argument for a target exponent `t` and
/// codimension `k` (flats of dimension `m = d - k`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationParams {
    /// Exponent target, `t < s`.
    pub t: f64,
    /// Codimension: strips around flats of dimension `d - k`.
    pub k: usize,
    /// Slack with `0 < 5 eps <= s - t`.
    pub eps: f64,
    /// Index from which the dimension sandwich holds.
    pub n0: usize,
    /// Level-`n0` intersection bound constant (`> 1`).
    pub r0: f64,
    /// Tail threshold constant, `> 2 r0 c_n0`.
    pub big_r: f64,
    /// MGF parameter for the target level.
    pub lambda: f64,
    /// MGF linearization parameter, `<= 1`.
    pub lambda0: f64,
    /// `(2 sqrt(d) M)^{d-k} * prod_{i>n0} (1 + r_i^eps)`, evaluated with the
    /// finite product to `depth` times the geometric tail bracket.
    pub c_n0: f64,
}

impl ConcentrationParams {
    /// Derive all constants for level `n` of the given model: find the
    /// smallest `n0` where the dimension sandwich holds through `depth`,
    /// bound the level-`n0` intersections deterministically, and take the
    /// canonical `lambda = c_n0^{-1} P_n r_n^{k+3 eps}`, `lambda0 = r_n^eps`.
    pub fn derive(
        params: &ConstructionParams,
        t: f64,
        k: usize,
        eps: f64,
        n: usize,
    ) -> Result<Self> {
        let d = params.dim;
        if k == 0 || k >= d {
            return Err(Error::InvalidArgument(format!(
                "codimension k must satisfy 1 <= k <= d-1, got {k}"
            )));
        }
        let s = params.dimension_value(params.depth());
        if !(eps > 0.0 && 5.0 * eps <= s - t) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < 5 eps <= s - t; got eps = {eps}, s - t = {}",
                s - t
            )));
        }
        if n == 0 || n > params.depth() {
            return Err(Error::DepthExceeded {
                requested: n,
                depth: params.depth(),
            });
        }
        let depth = params.depth();
        let sandwich = |m: usize| -> bool {
            let r = params.scale_f64(m);
            let p = params.retained_f64(m);
            let tol = 1.0 + 1e-12;
            r.powf(-t - 4.0 * eps) <= r.powf(-s + eps) * tol
                && r.powf(-s + eps) <= p * tol
                && p <= r.powf(-s - eps) * tol
        };
        let n0 = (1..depth)
            .find(|&cand| (cand..=depth).all(sandwich))
            .ok_or_else(|| {
                Error::InvalidArgument("dimension sandwich fails at every level".into())
            })?;
        if n <= n0 {
            return Err(Error::InvalidArgument(format!(
                "level n = {n} must exceed n0 = {n0}"
            )));
        }

        let m_flat = d - k;
        let slice_bound = max_flat_cube_measure(d, m_flat);
        let r_n0 = params.scale_f64(n0);
        let p_n0 = params.retained_f64(n0);
        let r0 = (slice_bound / (p_n0 * r_n0.powf(t + (d - k) as f64))).max(1.0 + 1e-9);

        // Finite product with the geometric tail bracket.
        let mut log_prod = 0.0;
        for i in (n0 + 1)..=depth {
            log_prod += (1.0 + params.scale_f64(i).powf(eps)).ln();
        }
        let r_depth = params.scale_f64(depth);
        let tail = r_depth.powf(eps) / (1.0 - 2f64.powf(-eps));
        let c_n0 = (2.0 * (d as f64).sqrt() * params.bound() as f64).powi(m_flat as i32)
            * (log_prod + tail).exp();

        let big_r = 2.1 * r0 * c_n0;
        let r_n = params.scale_f64(n);
        let p_n = params.retained_f64(n);
        let lambda = p_n * r_n.powf(k as f64 + 3.0 * eps) / c_n0;
        let lambda0 = r_n.powf(eps);
        let cp = Self {
            t,
            k,
            eps,
            n0,
            r0,
            big_r,
            lambda,
            lambda0,
            c_n0,
        };
        cp.check_mgf_hypothesis(params, n)?;
        Ok(cp)
    }

    /// The MGF admissibility hypothesis
    /// `lambda (2 sqrt(d) r_{n-1})^{d-k} (P_n r_n^d)^{-1} <= lambda0 <= 1`.
    pub fn check_mgf_hypothesis(&self, params: &ConstructionParams, n: usize) -> Result<()> {
        let lhs = self.lambda * self.x_max(params, n);
        if !(lhs <= self.lambda0 && self.lambda0 <= 1.0) {
            return Err(Error::InvalidMgfParams {
                lhs,
                lambda0: self.lambda0,
            });
        }
        Ok(())
    }

    /// Deterministic bound on one parent's contribution
    /// `(2 sqrt(d) r_{n-1})^{d-k} (P_n r_n^d)^{-1}`.
    pub fn x_max(&self, params: &ConstructionParams, n: usize) -> f64 {
        let d = params.dim;
        let r_prev = params.scale_f64(n - 1);
        let r_n = params.scale_f64(n);
        let p_n = params.retained_f64(n);
        (2.0 * (d as f64).sqrt() * r_prev).powi((d - self.k) as i32) / (p_n * r_n.powi(d as i32))
    }

    /// Tail threshold `R r_n^{t-k}` at level `n`.
    pub fn tail_threshold(&self, params: &ConstructionParams, n: usize) -> f64 {
        self.big_r * params.scale_f64(n).powf(self.t - self.k as f64)
    }

    /// Tail probability bound `exp(-r_n^{-eps})`.
    pub fn tail_bound(&self, params: &ConstructionParams, n: usize) -> f64 {
        (-params.scale_f64(n).powf(-self.eps)).exp()
    }
}

/// Deterministic upper bound for `H^m(W ∩ [0,1]^d)`: the section lies in an
/// m-ball of radius `sqrt(d)/2`.
pub fn max_flat_cube_measure(d: usize, m: usize) -> f64 {
    let r = (d as f64).sqrt() / 2.0;
    unit_ball_volume(m) * r.powi(m as i32)
}

fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => {
            // Γ-recursion v_m = v_{m-2} * 2π/m.
            let mut v = if m.is_multiple_of(2) {
                std::f64::consts::PI
            } else {
                4.0 * std::f64::consts::PI / 3.0
            };
            let mut i = if m.is_multiple_of(2) { 2 } else { 3 };
            while i < m {
                i += 2;
                v *= 2.0 * std::f64::consts::PI / i as f64;
            }
            v
        }
    }
}

/// `Y_n^W = (P_n r_n^d)^{-1} |W ∩ E_n|`.
pub fn y_statistic(r: &Realization, w: &Flat, n: usize) -> Result<f64> {
    let norm = normalizer(&r.params, n);
    Ok(norm * realization_flat_measure(r, w, n)?)
}

/// `(P_n r_n^d)^{-1}`; equals 1 at level 0.
pub fn normalizer(params: &ConstructionParams, n: usize) -> f64 {
    1.0 / (params.retained_f64(n) * params.scale_f64(n).powi(params.dim as i32))
}

/// Y evaluated over an explicit cube list (used for freshly grown levels).
pub(crate) fn y_from_cubes(
    params: &ConstructionParams,
    cubes: &[CubeAddress],
    w: &Flat,
    n: usize,
) -> Result<f64> {
    let mut total = 0.0;
    for q in cubes {
        total += flat_cube_measure(w, &q.to_box(params))?;
    }
    Ok(normalizer(params, n) * total)
}

/// Derived per-trial seed, stable across thread counts.
pub(crate) fn trial_seed(root: u64, trial: usize) -> u64 {
    let mut z = root ^ (trial as u64).wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}
