//! A small finite-domain solver for binary constraint networks.
//!
//! Every variable ranges over `0..universe`; every constraint is a support
//! table from the values of one variable to the allowed values of another.
//! Solving runs AC-3, drops constraints that the pruned domains already
//! entail, splits the network into connected components and enumerates each
//! component depth-first. The solution set is returned factored: the full set
//! is the Cartesian product of the component relations.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use petgraph::unionfind::UnionFind;

#[derive(Clone, Debug)]
struct Constraint {
    a: usize,
    b: usize,
    /// For each value of `a`, the allowed values of `b`.
    forward: Vec<FixedBitSet>,
    /// For each value of `b`, the allowed values of `a`.
    backward: Vec<FixedBitSet>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Csp {
    domains: Vec<FixedBitSet>,
    constraints: Vec<Constraint>,
}

/// The solutions of one connected component, over `vars` (ascending).
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Component {
    pub vars: Vec<usize>,
    /// Distinct tuples in lexicographic order; `tuple[i]` is the value of `vars[i]`.
    pub tuples: Vec<Vec<usize>>,
}

impl Csp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, domain: FixedBitSet) -> usize {
        self.domains.push(domain);
        self.domains.len() - 1
    }

    #[cfg(test)]
    pub fn restrict(&mut self, var: usize, allowed: &FixedBitSet) {
        self.domains[var].intersect_with(allowed);
    }

    /// `allowed(x)` gives the values of `b` compatible with value `x` of `a`.
    pub fn add_constraint(&mut self, a: usize, b: usize, allowed: impl Fn(usize) -> FixedBitSet) {
        let a_size = self.domains[a].len();
        let b_size = self.domains[b].len();
        let forward: Vec<FixedBitSet> = (0..a_size)
            .map(|x| {
                let mut row = allowed(x);
                row.grow(b_size);
                row
            })
            .collect();
        if a == b {
            let keep: FixedBitSet = (0..a_size).filter(|&x| forward[x].contains(x)).collect();
            let mut keep_sized = FixedBitSet::with_capacity(a_size);
            keep_sized.union_with(&keep);
            self.domains[a].intersect_with(&keep_sized);
            return;
        }
        let mut backward = vec![FixedBitSet::with_capacity(a_size); b_size];
        for (x, row) in forward.iter().enumerate() {
            for y in row.ones() {
                if y < b_size {
                    backward[y].insert(x);
                }
            }
        }
        self.constraints.push(Constraint { a, b, forward, backward });
    }

    /// AC-3. Returns `false` when some domain is wiped out.
    pub fn propagate(&mut self) -> bool {
        if self.domains.iter().any(|d| d.is_clear()) {
            return false;
        }
        let mut watching: Vec<Vec<usize>> = vec![Vec::new(); self.domains.len()];
        for (i, c) in self.constraints.iter().enumerate() {
            watching[c.a].push(i);
            watching[c.b].push(i);
        }
        // (constraint, revise the `a` side?)
        let mut queue: VecDeque<(usize, bool)> =
            (0..self.constraints.len()).flat_map(|i| [(i, true), (i, false)]).collect();
        let mut queued = vec![[true, true]; self.constraints.len()];
        while let Some((ci, revise_a)) = queue.pop_front() {
            queued[ci][usize::from(revise_a)] = false;
            let c = &self.constraints[ci];
            let (target, other, table) =
                if revise_a { (c.a, c.b, &c.forward) } else { (c.b, c.a, &c.backward) };
            let removed: Vec<usize> = self.domains[target]
                .ones()
                .filter(|&x| table[x].is_disjoint(&self.domains[other]))
                .collect();
            if removed.is_empty() {
                continue;
            }
            for x in removed {
                self.domains[target].set(x, false);
            }
            if self.domains[target].is_clear() {
                return false;
            }
            for &cj in &watching[target] {
                let d = &self.constraints[cj];
                // revise the neighbour of `target` in constraint cj
                let revise_other_a = d.b == target;
                if cj == ci && revise_other_a == revise_a {
                    continue;
                }
                let slot = &mut queued[cj][usize::from(revise_other_a)];
                if !*slot {
                    *slot = true;
                    queue.push_back((cj, revise_other_a));
                }
            }
        }
        true
    }

    fn entailed(&self, c: &Constraint) -> bool {
        self.domains[c.a].ones().all(|x| self.domains[c.b].is_subset(&c.forward[x]))
    }

    /// All solutions, factored into independent components. `None` when the
    /// network is unsatisfiable.
    pub fn solve(mut self) -> Option<Vec<Component>> {
        if !self.propagate() {
            return None;
        }
        let live: Vec<Constraint> = std::mem::take(&mut self.constraints)
            .into_iter()
            .filter(|c| !self.entailed(c))
            .collect();
        self.constraints = live;

        let n = self.domains.len();
        let mut classes: UnionFind<usize> = UnionFind::new(n);
        for c in &self.constraints {
            classes.union(c.a, c.b);
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            members[classes.find_mut(v)].push(v);
        }
        let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, c) in self.constraints.iter().enumerate() {
            by_var[c.a].push(i);
            by_var[c.b].push(i);
        }

        let mut components = Vec::new();
        for vars in members.into_iter().filter(|m| !m.is_empty()) {
            let tuples = self.enumerate(&vars, &by_var);
            if tuples.is_empty() {
                return None;
            }
            components.push(Component { vars, tuples });
        }
        components.sort_by_key(|c| c.vars[0]);
        Some(components)
    }

    /// Whether any solution exists.
    pub fn satisfiable(mut self) -> bool {
        if !self.propagate() {
            return false;
        }
        let n = self.domains.len();
        let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, c) in self.constraints.iter().enumerate() {
            by_var[c.a].push(i);
            by_var[c.b].push(i);
        }
        let vars: Vec<usize> = (0..n).collect();
        let mut found = false;
        self.search(&vars, &by_var, &mut |_| {
            found = true;
            false
        });
        found
    }

    fn enumerate(&self, vars: &[usize], by_var: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let mut tuples = Vec::new();
        self.search(vars, by_var, &mut |assignment| {
            tuples.push(vars.iter().map(|&v| assignment[v].unwrap()).collect());
            true
        });
        tuples.sort();
        tuples
    }

    /// Depth-first search over `vars`, smallest domain first (ties by index).
    /// `emit` returns whether to keep searching.
    fn search(
        &self,
        vars: &[usize],
        by_var: &[Vec<usize>],
        emit: &mut dyn FnMut(&[Option<usize>]) -> bool,
    ) {
        let mut order = vars.to_vec();
        order.sort_by_key(|&v| (self.domains[v].count_ones(..), v));
        let mut assignment: Vec<Option<usize>> = vec![None; self.domains.len()];
        let values: Vec<Vec<usize>> = order.iter().map(|&v| self.domains[v].ones().collect()).collect();
        let mut cursor = vec![0usize; order.len()];
        let mut depth = 0usize;
        if order.is_empty() {
            emit(&assignment);
            return;
        }
        loop {
            let var = order[depth];
            if cursor[depth] == values[depth].len() {
                cursor[depth] = 0;
                assignment[var] = None;
                if depth == 0 {
                    return;
                }
                depth -= 1;
                continue;
            }
            let value = values[depth][cursor[depth]];
            cursor[depth] += 1;
            if !self.consistent(var, value, &assignment, by_var) {
                continue;
            }
            assignment[var] = Some(value);
            if depth + 1 == order.len() {
                if !emit(&assignment) {
                    return;
                }
                assignment[var] = None;
            } else {
                depth += 1;
            }
        }
    }

    fn consistent(&self, var: usize, value: usize, assignment: &[Option<usize>], by_var: &[Vec<usize>]) -> bool {
        by_var[var].iter().all(|&ci| {
            let c = &self.constraints[ci];
            if c.a == var {
                assignment[c.b].is_none_or(|y| c.forward[value].contains(y))
            } else {
                assignment[c.a].is_none_or(|x| c.backward[value].contains(x))
            }
        })
    }
}

/// Multiply out factored components into full tuples over `0..var_count`.
pub(crate) fn product(var_count: usize, components: &[Component]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; var_count]];
    for comp in components {
        let mut next = Vec::with_capacity(out.len() * comp.tuples.len());
        for partial in &out {
            for tuple in &comp.tuples {
                let mut row = partial.clone();
                for (&v, &x) in comp.vars.iter().zip(tuple) {
                    row[v] = x;
                }
                next.push(row);
            }
        }
        out = next;
    }
    out.sort();
    out
}
