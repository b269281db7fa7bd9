//! Subset-selection strategies.
//!
//! Every rule returns exactly `keep` distinct subcube digit tuples in
//! `{0,…,M-1}^d` and (apart from the diagnostic fixed-column rule) gives every
//! subcube the same inclusion probability `N/M^d`. Rules are trait objects
//! registered by name so configs and the CLI can pick them at runtime.

use crate::error::Error;
use crate::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A subset-selection strategy: given a level shape `(d, M, N)` and a
/// per-parent random stream, choose `N` distinct subcubes.
pub trait SelectionRule: Send + Sync {
    /// Registry name, also stored in serialized realizations.
    fn name(&self) -> &'static str;

    /// Err iff the rule cannot serve a level with this shape.
    fn check_level(&self, dim: usize, branching: u32, keep: u32) -> Result<()>;

    /// Exactly `keep` distinct digit tuples in `{0..branching}^dim`.
    fn select(&self, dim: usize, branching: u32, keep: u32, rng: &mut ChaCha8Rng) -> Vec<Vec<u32>>;
}

/// Flat cell index -> digit tuple, coordinate i least significant.
fn unflatten(index: u64, dim: usize, branching: u32) -> Vec<u32> {
    let mut tuple = Vec::with_capacity(dim);
    let mut rest = index;
    for _ in 0..dim {
        tuple.push((rest % branching as u64) as u32);
        rest /= branching as u64;
    }
    tuple
}

/// Uniformly random `N`-subset of the `M^d` cells, drawn by sequential
/// without-replacement picks (partial Fisher-Yates). Marginal inclusion
/// probability of every cell is exactly `N/M^d`.
pub struct UniformSubsetRule;

impl SelectionRule for UniformSubsetRule {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn check_level(&self, _dim: usize, _branching: u32, _keep: u32) -> Result<()> {
        Ok(())
    }

    fn select(&self, dim: usize, branching: u32, keep: u32, rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
        let cells = (branching as u64).pow(dim as u32);
        let mut pool: Vec<u64> = (0..cells).collect();
        let mut chosen = Vec::with_capacity(keep as usize);
        for i in 0..keep as usize {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
            chosen.push(unflatten(pool[i], dim, branching));
        }
        chosen
    }
}

fn require_shape(rule: &'static str, dim: usize, branching: u32, keep: u32) -> Result<()> {
    if dim != 2 || branching != 2 || keep != 2 {
        return Err(Error::RuleShapeMismatch {
            rule: rule.to_string(),
            dim,
            branching,
            keep,
        });
    }
    Ok(())
}

/// The planar column model: keep the left column `{(0,0),(0,1)}` or the right
/// column `{(1,0),(1,1)}` with probability 1/2 each. Requires
/// `(d, M, N) = (2, 2, 2)`.
pub struct ColumnRule;

impl SelectionRule for ColumnRule {
    fn name(&self) -> &'static str {
        "column-lr"
    }

    fn check_level(&self, dim: usize, branching: u32, keep: u32) -> Result<()> {
        require_shape(self.name(), dim, branching, keep)
    }

    fn select(
        &self,
        _dim: usize,
        _branching: u32,
        _keep: u32,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Vec<u32>> {
        let x = rng.gen_range(0u32..2);
        vec![vec![x, 0], vec![x, 1]]
    }
}

/// The planar diagonal model: keep `{(0,0),(1,1)}` or `{(1,0),(0,1)}` with
/// probability 1/2 each. Requires `(d, M, N) = (2, 2, 2)`.
pub struct DiagonalRule;

impl SelectionRule for DiagonalRule {
    fn name(&self) -> &'static str {
        "diagonal-ld"
    }

    fn check_level(&self, dim: usize, branching: u32, keep: u32) -> Result<()> {
        require_shape(self.name(), dim, branching, keep)
    }

    fn select(
        &self,
        _dim: usize,
        _branching: u32,
        _keep: u32,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Vec<u32>> {
        if rng.gen_range(0u32..2) == 0 {
            vec![vec![0, 0], vec![1, 1]]
        } else {
            vec![vec![1, 0], vec![0, 1]]
        }
    }
}

/// Diagnostic rule: always keep the left column. Deterministic and NOT
/// marginal-uniform; it forces the realization to contain the full segment
/// `{0} x [0,1]` in the limit, which the tube-scan experiments use as a
/// contrast configuration. Requires `(d, M, N) = (2, 2, 2)`.
pub struct FixedColumnRule;

impl SelectionRule for FixedColumnRule {
    fn name(&self) -> &'static str {
        "column-fixed"
    }

    fn check_level(&self, dim: usize, branching: u32, keep: u32) -> Result<()> {
        require_shape(self.name(), dim, branching, keep)
    }

    fn select(
        &self,
        _dim: usize,
        _branching: u32,
        _keep: u32,
        _rng: &mut ChaCha8Rng,
    ) -> Vec<Vec<u32>> {
        vec![vec![0, 0], vec![0, 1]]
    }
}

/// Names of all registered rules, in registry order.
pub fn builtin_rule_names() -> &'static [&'static str] {
    &["uniform", "column-lr", "diagonal-ld", "column-fixed"]
}

/// Resolve a rule by registry name.
pub fn rule_by_name(name: &str) -> Result<Arc<dyn SelectionRule>> {
    match name {
        "uniform" => Ok(Arc::new(UniformSubsetRule)),
        "column-lr" => Ok(Arc::new(ColumnRule)),
        "diagonal-ld" => Ok(Arc::new(DiagonalRule)),
        "column-fixed" => Ok(Arc::new(FixedColumnRule)),
        other => Err(Error::UnknownRule(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn registry_resolves_every_builtin() {
        for name in builtin_rule_names() {
            assert_eq!(rule_by_name(name).unwrap().name(), *name);
        }
        assert!(matches!(rule_by_name("nope"), Err(Error::UnknownRule(_))));
    }

    #[test]
    fn uniform_returns_distinct_tuples_of_requested_count() {
        let mut r = rng(1);
        for _ in 0..100 {
            let sel = UniformSubsetRule.select(2, 3, 5, &mut r);
            assert_eq!(sel.len(), 5);
            let distinct: std::collections::HashSet<_> = sel.iter().collect();
            assert_eq!(distinct.len(), 5);
            for t in &sel {
                assert!(t.iter().all(|&d| d < 3));
            }
        }
    }

    #[test]
    fn uniform_marginals_match_binomial_bounds() {
        // d=2, M=2, N=2: every cell must appear with probability 1/2.
        let trials = 20_000usize;
        let mut counts = [0usize; 4];
        let mut r = rng(2);
        for _ in 0..trials {
            for t in UniformSubsetRule.select(2, 2, 2, &mut r) {
                counts[(t[0] * 2 + t[1]) as usize] += 1;
            }
        }
        let p = 0.5;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for c in counts {
            let freq = c as f64 / trials as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma,
                "marginal {freq} deviates from {p} beyond 3 sigma {sigma}"
            );
        }
    }

    #[test]
    fn uniform_pair_distribution_is_uniform_over_subsets() {
        // All 6 two-element subsets of the 4 cells must be equally likely.
        let trials = 30_000usize;
        let mut counts = std::collections::HashMap::new();
        let mut r = rng(3);
        for _ in 0..trials {
            let mut sel: Vec<u32> = UniformSubsetRule
                .select(2, 2, 2, &mut r)
                .into_iter()
                .map(|t| t[0] * 2 + t[1])
                .collect();
            sel.sort_unstable();
            *counts.entry((sel[0], sel[1])).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for (_, c) in counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - p).abs() <= 4.0 * sigma, "subset freq {freq} vs {p}");
        }
    }

    #[test]
    fn column_rule_keeps_one_full_column_with_even_sides() {
        let trials = 20_000usize;
        let mut left = 0usize;
        let mut r = rng(4);
        for _ in 0..trials {
            let sel = ColumnRule.select(2, 2, 2, &mut r);
            assert_eq!(sel[0][0], sel[1][0], "children must share the x digit");
            assert_eq!((sel[0][1], sel[1][1]), (0, 1));
            if sel[0][0] == 0 {
                left += 1;
            }
        }
        let freq = left as f64 / trials as f64;
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * sigma);
    }

    #[test]
    fn diagonal_rule_picks_each_diagonal_with_even_odds() {
        let trials = 20_000usize;
        let mut main = 0usize;
        let mut r = rng(5);
        for _ in 0..trials {
            let sel = DiagonalRule.select(2, 2, 2, &mut r);
            let set: std::collections::HashSet<_> = sel.into_iter().collect();
            if set.contains(&vec![0, 0]) {
                assert!(set.contains(&vec![1, 1]));
                main += 1;
            } else {
                assert!(set.contains(&vec![1, 0]) && set.contains(&vec![0, 1]));
            }
        }
        let freq = main as f64 / trials as f64;
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * sigma);
    }

    #[test]
    fn fixed_column_rule_is_deterministic() {
        let mut r = rng(6);
        assert_eq!(
            FixedColumnRule.select(2, 2, 2, &mut r),
            vec![vec![0, 0], vec![0, 1]]
        );
    }

    #[test]
    fn shaped_rules_reject_other_levels() {
        for name in ["column-lr", "diagonal-ld", "column-fixed"] {
            let rule = rule_by_name(name).unwrap();
            assert!(rule.check_level(2, 2, 2).is_ok());
            assert!(matches!(
                rule.check_level(3, 2, 2),
                Err(Error::RuleShapeMismatch { .. })
            ));
            assert!(matches!(
                rule.check_level(2, 3, 2),
                Err(Error::RuleShapeMismatch { .. })
            ));
        }
    }
}
