//! Finite-depth construction of the random subdivision trees.
//!
//! A realization is the nested family `E_1 ⊇ E_2 ⊇ … ⊇ E_n` of unions of
//! M-adic closed cubes inside `[0,1]^d`. At level `k` every retained cube of
//! level `k-1` is split into `M_k^d` subcubes of which a selection rule keeps
//! exactly `N_k`, independently per parent. Randomness is splittable: each
//! parent cube hashes `(root seed, address)` into its own stream, so the tree
//! is reproducible regardless of construction order or thread count.

mod rules;

pub use rules::{
    builtin_rule_names, rule_by_name, ColumnRule, DiagonalRule, FixedColumnRule, SelectionRule,
    UniformSubsetRule,
};

use crate::error::Error;
use crate::Result;
use num_rational::Ratio;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Exact coordinate type: all cube corners are rationals with denominator
/// `∏ M_k`.
pub type Rational = Ratio<i64>;

/// One subdivision level: split each retained cube into `branching^d`
/// subcubes and keep `keep` of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSpec {
    /// Branching factor `M_k >= 2`.
    pub branching: u32,
    /// Retained count `N_k` with `1 <= N_k <= M_k^d`.
    pub keep: u32,
}

impl LevelSpec {
    pub fn new(branching: u32, keep: u32) -> Self {
        Self { branching, keep }
    }
}

/// Parameters of the subdivision model: ambient dimension, the finite level
/// sequence `(M_k, N_k)` and the uniform branching bound `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub dim: usize,
    pub levels: Vec<LevelSpec>,
    /// Uniform bound on the branching factors; 0 means "largest in `levels`"
    /// and is resolved on first use, so configs may omit the field.
    #[serde(default)]
    pub branching_bound: u32,
}

impl ConstructionParams {
    pub fn new(dim: usize, levels: Vec<LevelSpec>) -> Self {
        let bound = levels.iter().map(|l| l.branching).max().unwrap_or(2);
        Self {
            dim,
            levels,
            branching_bound: bound,
        }
    }

    /// Constant model: `depth` copies of `(branching, keep)`.
    pub fn constant(dim: usize, branching: u32, keep: u32, depth: usize) -> Self {
        Self::new(dim, vec![LevelSpec::new(branching, keep); depth])
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// The resolved branching bound: `branching_bound`, or the largest
    /// branching factor in `levels` when the field was left at 0.
    pub fn bound(&self) -> u32 {
        if self.branching_bound > 0 {
            self.branching_bound
        } else {
            self.levels.iter().map(|l| l.branching).max().unwrap_or(2)
        }
    }

    /// Number of subcells `M_k^d` of one parent at level `k` (1-based).
    pub fn cells(&self, level: usize) -> u64 {
        (self.levels[level - 1].branching as u64).pow(self.dim as u32)
    }

    /// Side length `r_k = ∏_{j<=k} M_j^{-1}` as an exact rational; `r_0 = 1`.
    pub fn scale(&self, level: usize) -> Rational {
        let mut denom: i64 = 1;
        for l in &self.levels[..level] {
            denom = denom
                .checked_mul(l.branching as i64)
                .expect("scale denominator overflows i64");
        }
        Ratio::new(1, denom)
    }

    pub fn scale_f64(&self, level: usize) -> f64 {
        self.levels[..level]
            .iter()
            .fold(1.0, |r, l| r / l.branching as f64)
    }

    /// Retained cube count `P_k = ∏_{j<=k} N_j`; `P_0 = 1`.
    pub fn retained(&self, level: usize) -> i64 {
        self.levels[..level].iter().fold(1i64, |p, l| {
            p.checked_mul(l.keep as i64)
                .expect("retained count overflows i64")
        })
    }

    pub fn retained_f64(&self, level: usize) -> f64 {
        self.retained(level) as f64
    }

    /// Structural parameter validation; rule applicability is checked level by
    /// level. Reports the first violated constraint.
    pub fn validate(&self, rule: &dyn SelectionRule) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::BadDimension(self.dim));
        }
        if self.levels.is_empty() {
            return Err(Error::EmptyLevels);
        }
        for (i, l) in self.levels.iter().enumerate() {
            let level = i + 1;
            if l.branching < 2 {
                return Err(Error::DegenerateBranching {
                    level,
                    branching: l.branching,
                });
            }
            if l.branching > self.bound() {
                return Err(Error::BranchingBound {
                    level,
                    branching: l.branching,
                    bound: self.bound(),
                });
            }
            let cells = (l.branching as u64).pow(self.dim as u32);
            if l.keep == 0 || l.keep as u64 > cells {
                return Err(Error::OverfullLevel {
                    level,
                    keep: l.keep,
                    cells,
                });
            }
            rule.check_level(self.dim, l.branching, l.keep)?;
        }
        Ok(())
    }

    /// The dimension value `liminf log P_n / -log r_n` of the eventually
    /// periodic extension of the level sequence. The caller declares the
    /// repeating unit as the first `period` levels; for such sequences the
    /// liminf is the plain limit `Σ log N_k / Σ log M_k` over one period.
    pub fn dimension_value(&self, period: usize) -> f64 {
        assert!(period >= 1 && period <= self.depth(), "invalid period");
        let num: f64 = self.levels[..period]
            .iter()
            .map(|l| (l.keep as f64).ln())
            .sum();
        let den: f64 = self.levels[..period]
            .iter()
            .map(|l| (l.branching as f64).ln())
            .sum();
        num / den
    }
}

/// Address of an M-adic cube: one digit d-tuple per level. The cube it
/// denotes is `∏_i [x_i, x_i + r_level]` with `x_i = Σ_k a_k(i) r_k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CubeAddress {
    digits: Vec<Vec<u32>>,
}

impl CubeAddress {
    pub fn root() -> Self {
        Self { digits: Vec::new() }
    }

    pub fn from_digits(digits: Vec<Vec<u32>>) -> Self {
        Self { digits }
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[Vec<u32>] {
        &self.digits
    }

    /// Truncation by one level; the root is its own parent.
    pub fn parent(&self) -> Self {
        let mut digits = self.digits.clone();
        digits.pop();
        Self { digits }
    }

    pub fn child(&self, tuple: Vec<u32>) -> Self {
        let mut digits = self.digits.clone();
        digits.push(tuple);
        Self { digits }
    }

    /// Exact lower corner `x_i = Σ_k a_k(i) r_k`.
    pub fn lower_corner(&self, params: &ConstructionParams) -> Vec<Rational> {
        let mut corner = vec![Rational::new(0, 1); params.dim];
        for (k, tuple) in self.digits.iter().enumerate() {
            let r = params.scale(k + 1);
            for (i, &d) in tuple.iter().enumerate() {
                corner[i] += r * Rational::from_integer(d as i64);
            }
        }
        corner
    }

    /// Floating-point box `[lo, lo + side]^d` of this cube.
    pub fn to_box(&self, params: &ConstructionParams) -> crate::geometry::AxisBox {
        let corner = self.lower_corner(params);
        let side = params.scale(self.level());
        let lo: Vec<f64> = corner.iter().map(ratio_to_f64).collect();
        let hi: Vec<f64> = corner.iter().map(|c| ratio_to_f64(&(*c + side))).collect();
        crate::geometry::AxisBox::new(lo, hi)
    }
}

pub(crate) fn ratio_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A finite-depth realization: the per-level sets of retained cube addresses,
/// in canonical (sorted) order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Realization {
    pub params: ConstructionParams,
    pub rule: String,
    pub seed: u64,
    pub levels: Vec<Vec<CubeAddress>>,
}

impl Realization {
    /// Build the full-depth tree. Identical `(params, rule, seed)` yield a
    /// bit-identical tree; selections in distinct parent cubes use
    /// independent streams.
    pub fn build(params: &ConstructionParams, rule: &dyn SelectionRule, seed: u64) -> Result<Self> {
        params.validate(rule)?;
        let mut levels: Vec<Vec<CubeAddress>> = Vec::with_capacity(params.depth());
        let mut parents = vec![CubeAddress::root()];
        for (i, spec) in params.levels.iter().enumerate() {
            let level = grow_level(&parents, *spec, params.dim, rule, seed, i + 1);
            parents = level.clone();
            levels.push(level);
        }
        Ok(Self {
            params: params.clone(),
            rule: rule.name().to_string(),
            seed,
            levels,
        })
    }

    /// Convenience constructor resolving the rule by name.
    pub fn build_named(params: &ConstructionParams, rule: &str, seed: u64) -> Result<Self> {
        let rule = rule_by_name(rule)?;
        Self::build(params, rule.as_ref(), seed)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn cubes(&self, level: usize) -> &[CubeAddress] {
        assert!(level >= 1 && level <= self.depth());
        &self.levels[level - 1]
    }

    pub fn deepest(&self) -> &[CubeAddress] {
        self.levels
            .last()
            .expect("realization has at least one level")
    }

    /// True iff `q` is one of the retained cubes of its level.
    pub fn contains(&self, q: &CubeAddress) -> bool {
        if q.level() == 0 {
            return true;
        }
        if q.level() > self.depth() {
            return false;
        }
        self.levels[q.level() - 1].binary_search(q).is_ok()
    }

    /// Grow one extra level from the deepest cubes, with its own seed.
    /// Used by conditional (fixed-prefix) experiments; the receiver is not
    /// modified.
    pub fn extended_level(
        &self,
        spec: LevelSpec,
        rule: &dyn SelectionRule,
        seed: u64,
    ) -> Vec<CubeAddress> {
        grow_level(
            self.deepest(),
            spec,
            self.params.dim,
            rule,
            seed,
            self.depth() + 1,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// The selection rule this realization was built with.
    pub fn rule(&self) -> Result<Arc<dyn SelectionRule>> {
        rule_by_name(&self.rule)
    }
}

fn grow_level(
    parents: &[CubeAddress],
    spec: LevelSpec,
    dim: usize,
    rule: &dyn SelectionRule,
    seed: u64,
    level: usize,
) -> Vec<CubeAddress> {
    let mut out: Vec<CubeAddress> = parents
        .par_iter()
        .flat_map_iter(|parent| {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, parent, level));
            rule.select(dim, spec.branching, spec.keep, &mut rng)
                .into_iter()
                .map(move |tuple| parent.child(tuple))
        })
        .collect();
    out.sort_unstable();
    out
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-parent stream seed: a stable hash of `(root seed, address, level)`.
fn stream_seed(root: u64, addr: &CubeAddress, level: usize) -> u64 {
    let mut state = root ^ 0xD1B54A32D192ED03;
    let mut h = splitmix64(&mut state);
    for tuple in addr.digits() {
        for &d in tuple {
            state ^= (d as u64).wrapping_add(0xA24BAED4963EE407);
            h ^= splitmix64(&mut state);
        }
        state ^= 0x9FB21C651E98DF25;
        h ^= splitmix64(&mut state);
    }
    state ^= level as u64;
    h ^ splitmix64(&mut state)
}
