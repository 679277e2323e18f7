//! Formula corpora for differential testing: exhaustive enumeration by depth,
//! direct indexing into that enumeration, and seeded random formulae.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::Formula;

const UNARY: usize = 4;
const BINARY: usize = 3;

fn leaves(atoms: &[&str]) -> Vec<Formula> {
    let mut out = vec![Formula::True];
    for a in atoms {
        out.push(Formula::atom(*a));
        out.push(Formula::neg_atom(*a));
    }
    out
}

fn unary(op: usize, f: Formula) -> Formula {
    match op {
        0 => f.next(),
        1 => f.weak_next(),
        2 => f.eventually(),
        _ => f.always(),
    }
}

fn binary(op: usize, l: Formula, r: Formula) -> Formula {
    match op {
        0 => l.or(r),
        1 => l.and(r),
        _ => l.until(r),
    }
}

/// Every formula of depth at most `max_depth` over `atoms`, each once.
///
/// Order: the leaves (`true`, then `a`, `!a` per atom), then `X`, `W`, `F`,
/// `G` applied to the previous level, then `|`, `&`, `U` over all pairs of
/// the previous level.
pub fn enumerate_formulas(max_depth: usize, atoms: &[&str]) -> Vec<Formula> {
    let mut level = leaves(atoms);
    for _ in 0..max_depth {
        let mut next = leaves(atoms);
        for op in 0..UNARY {
            next.extend(level.iter().map(|f| unary(op, f.clone())));
        }
        for op in 0..BINARY {
            for l in &level {
                next.extend(level.iter().map(|r| binary(op, l.clone(), r.clone())));
            }
        }
        level = next;
    }
    level
}

/// Size of [`enumerate_formulas`]: `|F(d)| = |leaves| + 4|F(d−1)| + 3|F(d−1)|²`.
/// `None` on overflow.
pub fn count_formulas(max_depth: usize, atom_count: usize) -> Option<u128> {
    let leaves = 1 + 2 * atom_count as u128;
    let mut n = leaves;
    for _ in 0..max_depth {
        n = leaves
            .checked_add(n.checked_mul(UNARY as u128)?)?
            .checked_add(n.checked_mul(n)?.checked_mul(BINARY as u128)?)?;
    }
    Some(n)
}

/// The formula at position `index` of `enumerate_formulas(max_depth, atoms)`,
/// without building the list.
pub fn nth_formula(max_depth: usize, atoms: &[&str], index: u128) -> Option<Formula> {
    let total = count_formulas(max_depth, atoms.len())?;
    if index >= total {
        return None;
    }
    Some(unrank(max_depth, atoms, index))
}

fn unrank(depth: usize, atoms: &[&str], mut index: u128) -> Formula {
    let leaf_count = 1 + 2 * atoms.len() as u128;
    if index < leaf_count {
        return leaves(atoms).swap_remove(index as usize);
    }
    index -= leaf_count;
    let prev = count_formulas(depth - 1, atoms.len()).expect("smaller than the total");
    if index < UNARY as u128 * prev {
        let op = (index / prev) as usize;
        return unary(op, unrank(depth - 1, atoms, index % prev));
    }
    index -= UNARY as u128 * prev;
    let pairs = prev * prev;
    let op = (index / pairs) as usize;
    let pair = index % pairs;
    binary(op, unrank(depth - 1, atoms, pair / prev), unrank(depth - 1, atoms, pair % prev))
}

/// Shape of formulae drawn by [`random_formula_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub max_depth: usize,
    /// Whether `F` and `G` may appear.
    pub eventually_always: bool,
    /// Chance of stopping at a leaf before the depth bound.
    pub leaf_probability: f64,
}

impl SamplerConfig {
    pub fn new(max_depth: usize) -> Self {
        SamplerConfig { max_depth, eventually_always: true, leaf_probability: 0.25 }
    }
}

/// A random formula of depth at most `max_depth`, deterministic in `seed`.
pub fn random_formula(max_depth: usize, atoms: &[&str], seed: u64) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_formula_with(&SamplerConfig::new(max_depth), atoms, &mut rng)
}

pub fn random_formula_with(config: &SamplerConfig, atoms: &[&str], rng: &mut impl Rng) -> Formula {
    grow(config, atoms, config.max_depth, rng)
}

fn grow(config: &SamplerConfig, atoms: &[&str], depth: usize, rng: &mut impl Rng) -> Formula {
    if depth == 0 || rng.gen_bool(config.leaf_probability) {
        let mut all = leaves(atoms);
        return all.swap_remove(rng.gen_range(0..all.len()));
    }
    let unary_ops: &[usize] = if config.eventually_always { &[0, 1, 2, 3] } else { &[0, 1] };
    let choice = rng.gen_range(0..unary_ops.len() + BINARY);
    if choice < unary_ops.len() {
        unary(unary_ops[choice], grow(config, atoms, depth - 1, rng))
    } else {
        let l = grow(config, atoms, depth - 1, rng);
        let r = grow(config, atoms, depth - 1, rng);
        binary(choice - unary_ops.len(), l, r)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn depth_zero() {
        let shown: Vec<String> = enumerate_formulas(0, &["a"]).iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, ["true", "a", "!a"]);
    }

    #[test]
    fn depth_one_contains_every_operator() {
        let all = enumerate_formulas(1, &["a"]);
        for text in ["X a", "W a", "F a", "G a", "a U a", "a | !a", "true & a"] {
            assert!(all.contains(&parse_formula(text).unwrap()), "{text}");
        }
        assert_eq!(all.len(), 3 + 4 * 3 + 3 * 9);
    }

    #[test]
    fn counts_follow_the_recurrence() {
        let all = enumerate_formulas(2, &["a", "b"]);
        assert_eq!(all.len() as u128, count_formulas(2, 2).unwrap());
        assert_eq!(all.len(), 30405);
        let distinct: HashSet<&Formula> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
        assert_eq!(count_formulas(3, 2), Some(2_773_513_700));
        assert!(count_formulas(6, 2).is_none());
    }

    #[test]
    fn indexing_matches_enumeration() {
        let all = enumerate_formulas(2, &["a"]);
        for (i, f) in all.iter().enumerate() {
            assert_eq!(nth_formula(2, &["a"], i as u128).as_ref(), Some(f));
        }
        assert_eq!(nth_formula(2, &["a"], all.len() as u128), None);
    }

    #[test]
    fn random_is_deterministic_and_bounded() {
        for seed in 0..200 {
            let f = random_formula(4, &["a", "b"], seed);
            assert_eq!(f, random_formula(4, &["a", "b"], seed));
            assert!(f.depth() <= 4);
        }
        assert_eq!(random_formula(0, &["a"], 3).depth(), 0);
    }

    #[test]
    fn sampler_can_exclude_eventually_always() {
        let config = SamplerConfig { eventually_always: false, ..SamplerConfig::new(3) };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            assert!(!random_formula_with(&config, &["a", "b"], &mut rng).has_eventually_or_always());
        }
    }
}
