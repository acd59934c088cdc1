//! Equivalence classes of executions under square swaps.
//!
//! Two bottom-to-top paths are equivalent when one is obtained from the other
//! by repeatedly exchanging two adjacent steps `i, j` around an admissible
//! unit square. Classes are computed state by state: the classes of paths
//! ending at `x` are the classes at each predecessor `x - e_c` extended by
//! `c`, glued along the admissible squares ending at `x`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::geometry::search::{live_states, Indexer};
use crate::geometry::{enumerate_dipaths, Grid, LatticePath, SearchError, SearchLimits, State};
use crate::model::Program;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class_count: usize,
    /// Lexicographically least path of each class, in ascending order.
    pub representatives: Vec<LatticePath>,
    /// Classes containing at least one serial path.
    pub serial_classes_covered: usize,
    /// Number of serial paths (one per thread order).
    pub serial_paths: u128,
    /// Every class contains a serial path.
    pub serializable: bool,
}

/// Per-state class tables for one program.
pub struct Classifier {
    grid: Grid,
    indexer: Indexer,
    /// Classes of paths from the bottom to each state; 0 off the live set.
    count: Vec<u32>,
    /// Bitmask of directions entering each state from a state with classes.
    incoming: Vec<u32>,
    /// Start of each state's block in `ext` and in `best`.
    ext_start: Vec<u64>,
    best_start: Vec<u64>,
    /// For each entering direction `c` (ascending) and each class `k` of
    /// `x - e_c`: the class at `x` of those paths extended by `c`.
    ext: Vec<u32>,
    /// For each class at `x`: last step and predecessor class of its least path.
    best: Vec<(u16, u32)>,
    /// Top classes ranked by their least path.
    top_rank: Vec<u32>,
}

impl Classifier {
    /// Builds the tables. `limit` bounds the classes at any single state;
    /// `limits.max_states` bounds the grid and the total table size.
    pub fn build(p: &Program, limit: u64, limits: &SearchLimits) -> Result<Self, SearchError> {
        let grid = Grid::new(p);
        let n = grid.dims();
        assert!(n <= 32, "at most 32 threads");
        let (indexer, live) = live_states(&grid, limits)?;
        let size = indexer.size;
        let mut c = Classifier {
            count: vec![0; size],
            incoming: vec![0; size],
            ext_start: vec![0; size],
            best_start: vec![0; size],
            ext: Vec::new(),
            best: Vec::new(),
            top_rank: Vec::new(),
            grid,
            indexer,
        };
        if !live[0] {
            return Ok(c);
        }
        c.count[0] = 1;
        c.best.push((u16::MAX, 0));
        let mut x = vec![0usize; n];
        let mut y = vec![0usize; n];
        let mut usage = vec![0u32; c.grid.resource_count()];
        let mut items: Vec<(usize, u32)> = Vec::new();
        for idx in 1..size {
            if !live[idx] {
                continue;
            }
            c.indexer.decode_into(idx, &mut x);
            items.clear();
            let mut mask = 0u32;
            for d in 0..n {
                if x[d] == 0 {
                    continue;
                }
                let pred = idx - c.indexer.strides[d];
                if c.count[pred] == 0 {
                    continue;
                }
                y.copy_from_slice(&x);
                y[d] -= 1;
                c.grid.add_usage(&y, &mut usage);
                if c.grid.can_step(&y, &usage, d) {
                    mask |= 1 << d;
                    items.extend((0..c.count[pred]).map(|k| (d, k)));
                }
            }
            c.incoming[idx] = mask;
            if items.is_empty() {
                continue;
            }
            let mut uf = UnionFind::<u32>::new(items.len());
            let offsets = c.offsets(idx);
            for d in 0..n {
                for e in d + 1..n {
                    if mask & (1 << d) == 0 || mask & (1 << e) == 0 {
                        continue;
                    }
                    let z = idx - c.indexer.strides[d] - c.indexer.strides[e];
                    if c.count[z] == 0 {
                        continue;
                    }
                    c.indexer.decode_into(z, &mut y);
                    if !c.grid.square_admissible(&y, d, e) {
                        continue;
                    }
                    // z -> z+e_d -> x ends with e; z -> z+e_e -> x ends with d
                    let via_d = z + c.indexer.strides[d];
                    let via_e = z + c.indexer.strides[e];
                    for k in 0..c.count[z] {
                        let a = c.lookup(via_d, d, k);
                        let b = c.lookup(via_e, e, k);
                        uf.union(offsets[e] + a, offsets[d] + b);
                    }
                }
            }
            let mut label: HashMap<u32, u32> = HashMap::new();
            let start = c.ext.len();
            for i in 0..items.len() as u32 {
                let root = uf.find(i);
                let next = label.len() as u32;
                let l = *label.entry(root).or_insert(next);
                c.ext.push(l);
            }
            let classes = label.len();
            if classes as u64 > limit {
                return Err(SearchError::ItemLimit { limit });
            }
            if c.ext.len() as u64 + c.best.len() as u64 > limits.max_states {
                return Err(SearchError::StateLimit {
                    needed: c.ext.len() as u128 + c.best.len() as u128,
                    limit: limits.max_states,
                });
            }
            c.ext_start[idx] = start as u64;
            c.best_start[idx] = c.best.len() as u64;
            c.count[idx] = classes as u32;
            let best_base = c.best.len();
            c.best.extend(std::iter::repeat_n((u16::MAX, 0), classes));
            for (i, &(d, k)) in items.iter().enumerate() {
                let l = c.ext[start + i] as usize;
                let slot = best_base + l;
                if c.best[slot].0 == u16::MAX
                    || c.compare_tail(idx - c.indexer.strides[d], d, k, c.best[slot], idx) == Ordering::Less
                {
                    c.best[slot] = (d as u16, k);
                }
            }
        }
        let top = size - 1;
        let mut reps: Vec<(LatticePath, u32)> = (0..c.count[top])
            .map(|k| (c.least_path(top, k), k))
            .collect();
        reps.sort();
        c.top_rank = vec![0; reps.len()];
        for (rank, (_, k)) in reps.iter().enumerate() {
            c.top_rank[*k as usize] = rank as u32;
        }
        Ok(c)
    }

    /// Start of each entering direction's run inside the state's block.
    fn offsets(&self, idx: usize) -> Vec<u32> {
        let mask = self.incoming[idx];
        let mut off = vec![0u32; self.indexer.radix.len()];
        let mut acc = 0;
        for (d, o) in off.iter_mut().enumerate() {
            *o = acc;
            if mask & (1 << d) != 0 {
                acc += self.count[idx - self.indexer.strides[d]];
            }
        }
        off
    }

    /// Class at `idx` of paths entering by direction `d` from class `k`.
    fn lookup(&self, idx: usize, d: usize, k: u32) -> u32 {
        debug_assert!(self.incoming[idx] & (1 << d) != 0);
        let mut off = 0;
        for e in 0..d {
            if self.incoming[idx] & (1 << e) != 0 {
                off += self.count[idx - self.indexer.strides[e]];
            }
        }
        self.ext[self.ext_start[idx] as usize + (off + k) as usize]
    }

    /// Steps of the least path of class `k` at `idx`, last step first.
    fn reversed_least(&self, mut idx: usize, mut k: u32) -> Vec<usize> {
        let mut out = Vec::new();
        while idx != 0 {
            let (d, prev) = self.best[self.best_start[idx] as usize + k as usize];
            out.push(d as usize);
            idx -= self.indexer.strides[d as usize];
            k = prev;
        }
        out
    }

    fn least_path(&self, idx: usize, k: u32) -> LatticePath {
        let mut steps = self.reversed_least(idx, k);
        steps.reverse();
        LatticePath::new(self.indexer.radix.len(), steps)
    }

    /// Orders `least(pred, k) + d` against the current best entry at `idx`.
    fn compare_tail(&self, pred: usize, d: usize, k: u32, best: (u16, u32), idx: usize) -> Ordering {
        let mut a = self.reversed_least(pred, k);
        a.reverse();
        a.push(d);
        let bd = best.0 as usize;
        let mut b = self.reversed_least(idx - self.indexer.strides[bd], best.1);
        b.reverse();
        b.push(bd);
        a.cmp(&b)
    }

    /// Number of classes of bottom-to-top paths.
    pub fn class_count(&self) -> usize {
        self.count[self.indexer.size - 1] as usize
    }

    /// Classes of paths from the bottom to `x`.
    pub fn classes_at(&self, x: &State) -> usize {
        if !self.indexer.contains(x) {
            return 0;
        }
        self.count[self.indexer.index(x)] as usize
    }

    /// Raw class index at the path's end, `None` if it leaves the live set.
    fn raw_class(&self, path: &LatticePath) -> Option<(usize, u32)> {
        let mut idx = 0;
        let mut k = 0u32;
        if self.count[0] == 0 {
            return None;
        }
        let mut x = vec![0usize; self.indexer.radix.len()];
        for &d in path.steps() {
            x[d] += 1;
            if x[d] >= self.indexer.radix[d] {
                return None;
            }
            idx += self.indexer.strides[d];
            if self.incoming[idx] & (1 << d) == 0 {
                return None;
            }
            k = self.lookup(idx, d, k);
        }
        Some((idx, k))
    }

    /// Class of a bottom-to-top path, numbered by ascending least member.
    /// `None` for paths that are not admissible or do not end at the top.
    pub fn class_of(&self, path: &LatticePath) -> Option<usize> {
        let (idx, k) = self.raw_class(path)?;
        (idx == self.indexer.size - 1).then(|| self.top_rank[k as usize] as usize)
    }

    /// Two admissible paths with the same end are equivalent.
    pub fn equivalent(&self, a: &LatticePath, b: &LatticePath) -> Option<bool> {
        let (ia, ka) = self.raw_class(a)?;
        let (ib, kb) = self.raw_class(b)?;
        (ia == ib).then_some(ka == kb)
    }

    /// Lexicographically least path of every class, ascending.
    pub fn representatives(&self) -> Vec<LatticePath> {
        let top = self.indexer.size - 1;
        let mut reps: Vec<LatticePath> = (0..self.count[top]).map(|k| self.least_path(top, k)).collect();
        reps.sort();
        reps
    }

    /// Classes (numbered as in [`Self::class_of`]) reached by serial paths.
    /// Serial prefixes are shared across thread orders by walking one subset
    /// of finished threads at a time.
    pub fn serial_classes(&self) -> BTreeSet<usize> {
        let n = self.indexer.radix.len();
        let tops: Vec<usize> = self.indexer.radix.iter().map(|r| r - 1).collect();
        let mut out = BTreeSet::new();
        if self.count[0] == 0 {
            return out;
        }
        // classes at the state where exactly the threads in `set` are finished
        let mut frontier: HashMap<u64, BTreeSet<u32>> = HashMap::new();
        frontier.insert(0, BTreeSet::from([0]));
        for _ in 0..n {
            let mut next: HashMap<u64, BTreeSet<u32>> = HashMap::new();
            for (set, classes) in &frontier {
                let base: usize = (0..n)
                    .filter(|&i| set & (1 << i) != 0)
                    .map(|i| tops[i] * self.indexer.strides[i])
                    .sum();
                for i in (0..n).filter(|&i| set & (1 << i) == 0) {
                    for &k0 in classes {
                        let mut idx = base;
                        let mut k = k0;
                        for _ in 0..tops[i] {
                            idx += self.indexer.strides[i];
                            if self.incoming[idx] & (1 << i) == 0 {
                                unreachable!("serial runs are admissible");
                            }
                            k = self.lookup(idx, i, k);
                        }
                        next.entry(set | (1 << i)).or_default().insert(k);
                    }
                }
            }
            frontier = next;
        }
        for classes in frontier.values() {
            out.extend(classes.iter().map(|&k| self.top_rank[k as usize] as usize));
        }
        out
    }

    pub fn report(&self) -> ClassReport {
        let n = self.indexer.radix.len();
        let covered = self.serial_classes().len();
        let class_count = self.class_count();
        ClassReport {
            class_count,
            representatives: self.representatives(),
            serial_classes_covered: covered,
            serial_paths: (1..=n as u128).product(),
            serializable: covered == class_count,
        }
    }
}

/// Classes of executions of `p`. `limit` bounds the number of classes at
/// any state.
pub fn dihomotopy_classes(p: &Program, limit: u64, limits: &SearchLimits) -> Result<ClassReport, SearchError> {
    Ok(Classifier::build(p, limit, limits)?.report())
}

/// Every path listed with its class, by brute force.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumeratedClasses {
    /// All bottom-to-top paths, lexicographic.
    pub paths: Vec<LatticePath>,
    /// Class of each path, numbered by first occurrence.
    pub class_of: Vec<usize>,
    pub class_count: usize,
}

/// Enumerates every path and merges paths differing by one swap across an
/// admissible square. At most `limit` paths.
pub fn classes_by_enumeration(
    p: &Program,
    limit: u64,
    limits: &SearchLimits,
) -> Result<EnumeratedClasses, SearchError> {
    let grid = Grid::new(p);
    let paths: Vec<LatticePath> = enumerate_dipaths(p, limit, limits)?.collect::<Result<_, _>>()?;
    let index: HashMap<&[usize], usize> = paths.iter().enumerate().map(|(i, q)| (q.steps(), i)).collect();
    let mut uf = UnionFind::<usize>::new(paths.len());
    for (i, path) in paths.iter().enumerate() {
        let steps = path.steps();
        let mut x = vec![0usize; p.len()];
        let mut swapped = steps.to_vec();
        for t in 0..steps.len().saturating_sub(1) {
            let (a, b) = (steps[t], steps[t + 1]);
            if a != b && grid.square_admissible(&x, a, b) {
                swapped.swap(t, t + 1);
                if let Some(&j) = index.get(swapped.as_slice()) {
                    uf.union(i, j);
                }
                swapped.swap(t, t + 1);
            }
            x[a] += 1;
        }
    }
    let mut label = HashMap::new();
    let class_of: Vec<usize> = (0..paths.len())
        .map(|i| {
            let next = label.len();
            *label.entry(uf.find(i)).or_insert(next)
        })
        .collect();
    Ok(EnumeratedClasses {
        class_count: label.len(),
        paths,
        class_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_source;

    fn program(src: &str) -> Program {
        parse_source(src).unwrap().program("m").unwrap()
    }

    fn pv(n: usize, cap: u32) -> Program {
        program(&format!("resource a cap {cap}\nthread T = Pa Va\nprogram m = T^{n}"))
    }

    const LIM: SearchLimits = SearchLimits { max_states: 1_000_000 };

    #[test]
    fn mutex_classes_are_thread_orders() {
        for (n, fact) in [(2, 2), (3, 6), (4, 24)] {
            let r = dihomotopy_classes(&pv(n, 1), 1000, &LIM).unwrap();
            assert_eq!(r.class_count, fact);
            assert_eq!(r.serial_classes_covered, fact);
            assert!(r.serializable);
        }
    }

    #[test]
    fn free_grid_has_one_class() {
        let r = dihomotopy_classes(&pv(2, 2), 1000, &LIM).unwrap();
        assert_eq!(r.class_count, 1);
        assert_eq!(r.representatives, vec![LatticePath::new(2, vec![0, 0, 0, 1, 1, 1])]);
    }

    #[test]
    fn matches_enumeration() {
        let srcs = [
            "resource a cap 1\nresource b cap 1\nthread T1 = Pa Pb Vb Va\nthread T2 = Pb Pa Va Vb\nprogram m = T1 | T2",
            "resource a cap 1\nresource b cap 1\nthread T = Pa Pb Vb Va Pb Pa Va Vb\nprogram m = T^2",
            "resource a cap 2\nresource b cap 1\nthread T = Pa Pb Va Pa Vb Va\nprogram m = T^2",
            "resource a cap 1\nthread T = Pa Va Pa Va\nprogram m = T^2",
            "resource a cap 1\nthread T = Pa Va\nprogram m = T^3",
            "resource a cap 2\nthread T = Pa Va\nprogram m = T^3",
        ];
        for src in srcs {
            let p = program(src);
            let dp = Classifier::build(&p, 100_000, &LIM).unwrap();
            let en = classes_by_enumeration(&p, 1_000_000, &LIM).unwrap();
            assert_eq!(dp.class_count(), en.class_count, "{src}");
            for (path, &k) in en.paths.iter().zip(&en.class_of) {
                assert_eq!(dp.class_of(path), Some(k), "{src}");
            }
        }
    }

    #[test]
    fn unreachable_top_has_no_classes() {
        // the deadlock lies on no complete path
        let p = program("resource a cap 1\nresource b cap 1\nthread T1 = Pa Pb Vb Va\nthread T2 = Pb Pa Va Vb\nprogram m = T1 | T2");
        let c = Classifier::build(&p, 100, &LIM).unwrap();
        assert_eq!(c.class_count(), 2);
        assert_eq!(c.classes_at(&State(vec![2, 2])), 0);
    }
}
