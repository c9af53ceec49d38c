//! Finest Cartesian-product decomposition of a finite relation.
//!
//! A set of variables `S` separates a nonempty relation `R` when
//! `R = π_S(R) × π_rest(R)`. Separators are closed under union, intersection
//! and complement, so `R` has a unique finest decomposition. It is built one
//! variable at a time: when variable `x` joins, the blocks found so far stay
//! blocks of the projection, and the block of `x` absorbs exactly those old
//! blocks that cannot be split off. Pairwise dependence is not enough here
//! (three variables related by parity are pairwise independent).

use std::collections::HashSet;

/// A relation over `vars`; `tuples[i][j]` is the value of `vars[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Block {
    pub vars: Vec<usize>,
    pub tuples: Vec<Vec<usize>>,
}

impl Block {
    pub fn new(vars: Vec<usize>, tuples: Vec<Vec<usize>>) -> Self {
        Block { vars, tuples }
    }

    /// Keep only the columns at `positions`, deduplicated and sorted.
    pub fn project(&self, positions: &[usize]) -> Block {
        let vars = positions.iter().map(|&p| self.vars[p]).collect();
        let mut tuples: Vec<Vec<usize>> =
            self.tuples.iter().map(|t| positions.iter().map(|&p| t[p]).collect()).collect();
        tuples.sort();
        tuples.dedup();
        Block { vars, tuples }
    }

    /// Same relation with variables in ascending order.
    pub fn sorted(&self) -> Block {
        let mut positions: Vec<usize> = (0..self.vars.len()).collect();
        positions.sort_by_key(|&p| self.vars[p]);
        self.project(&positions)
    }
}

fn distinct(tuples: &[Vec<usize>], positions: &[usize]) -> usize {
    tuples
        .iter()
        .map(|t| positions.iter().map(|&p| t[p]).collect::<Vec<_>>())
        .collect::<HashSet<_>>()
        .len()
}

/// The finest decomposition of a nonempty relation, each block with sorted
/// variables and sorted distinct tuples, blocks ordered by first variable.
pub(crate) fn finest(block: &Block) -> Vec<Block> {
    assert!(!block.tuples.is_empty(), "cannot factor an empty relation");
    let width = block.vars.len();
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for x in 0..width {
        let prefix: Vec<usize> = (0..=x).collect();
        let total = distinct(&block.tuples, &prefix);
        let mut joined: Vec<usize> = (0..parts.len()).collect();
        for candidate in 0..parts.len() {
            let trial: Vec<usize> = joined.iter().copied().filter(|&p| p != candidate).collect();
            let mut inside: Vec<usize> = vec![x];
            inside.extend(trial.iter().flat_map(|&p| parts[p].iter().copied()));
            let outside: Vec<usize> = prefix.iter().copied().filter(|v| !inside.contains(v)).collect();
            if distinct(&block.tuples, &inside) * distinct(&block.tuples, &outside) == total {
                joined = trial;
            }
        }
        let mut merged = vec![x];
        let mut kept = Vec::with_capacity(parts.len());
        for (i, part) in parts.into_iter().enumerate() {
            if joined.contains(&i) {
                merged.extend(part);
            } else {
                kept.push(part);
            }
        }
        kept.push(merged);
        parts = kept;
    }
    let mut blocks: Vec<Block> = parts.iter().map(|p| block.project(p).sorted()).collect();
    blocks.sort_by_key(|b| b.vars[0]);
    blocks
}
