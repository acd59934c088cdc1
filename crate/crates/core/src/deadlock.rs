//! Deadlocks and potential deadlocks, the copy-count cut-off for deadlock
//! freedom, and the family of threads showing that cut-off is sharp.
//!
//! A state is blocked when every thread not yet finished sits at an acquire
//! whose resource is already at capacity. Blocked states are enumerated
//! combinatorially (each coordinate at an acquire position or at the end)
//! and then checked for reachability with one bounded search.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Grid, LatticePath, Reachability, SearchError, SearchLimits, State};
use crate::model::{Action, CapacityMap, Program, ResourceId, Thread};
use crate::verdict::{Answer, FamilyVerdict, Property, Theorem};

/// Size of the analysed instance and the work done on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchedInstance {
    pub threads: usize,
    pub grid_states: u128,
    pub candidates: usize,
    pub explored_states: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeadlockReport {
    /// Reachable blocked states with a witness path, in lexicographic order.
    pub deadlocks: Vec<(State, LatticePath)>,
    /// Blocked states regardless of admissibility or reachability.
    pub potential_deadlocks: Vec<State>,
    pub searched: SearchedInstance,
}

impl DeadlockReport {
    pub fn deadlock_states(&self) -> Vec<State> {
        self.deadlocks.iter().map(|(s, _)| s.clone()).collect()
    }

    pub fn is_deadlock_free(&self) -> bool {
        self.deadlocks.is_empty()
    }
}

/// Depth-first product over per-coordinate options (acquire positions, then
/// the end), pruned on resource use, calling `leaf` with each state, its
/// point use and the number of requests per resource. With `admissible`
/// every resource must stay within capacity; otherwise only the requested
/// ones are constrained.
pub(crate) fn acquire_states(
    grid: &Grid,
    admissible: bool,
    limits: &SearchLimits,
    leaf: &mut dyn FnMut(&[usize], &[u32], &[u32]),
) -> Result<(), SearchError> {
    let n = grid.dims();
    let options: Vec<Vec<usize>> = (0..n)
        .map(|c| {
            let top = grid.top(c);
            (1..top)
                .filter(|&p| grid.request(c, p).is_some())
                .chain(std::iter::once(top))
                .collect()
        })
        .collect();
    let needed = options
        .iter()
        .fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128));

    struct Walk<'a> {
        grid: &'a Grid,
        options: &'a [Vec<usize>],
        admissible: bool,
        usage: Vec<u32>,
        requested: Vec<u32>,
        x: Vec<usize>,
        leaf: &'a mut dyn FnMut(&[usize], &[u32], &[u32]),
        nodes: u64,
        budget: u64,
    }

    impl Walk<'_> {
        fn over(&self) -> bool {
            self.usage.iter().enumerate().any(|(r, &u)| {
                u > self.grid.capacity(r) && (self.admissible || self.requested[r] > 0)
            })
        }

        fn go(&mut self, c: usize) -> bool {
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            if c == self.x.len() {
                (self.leaf)(&self.x, &self.usage, &self.requested);
                return true;
            }
            for k in 0..self.options[c].len() {
                let p = self.options[c][k];
                self.x[c] = p;
                for &r in self.grid.held_at(c, p) {
                    self.usage[r] += 1;
                }
                let req = self.grid.request(c, p);
                if let Some(r) = req {
                    self.requested[r] += 1;
                }
                let ok = self.over() || self.go(c + 1);
                if let Some(r) = req {
                    self.requested[r] -= 1;
                }
                for &r in self.grid.held_at(c, p) {
                    self.usage[r] -= 1;
                }
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let mut walk = Walk {
        grid,
        options: &options,
        admissible,
        usage: vec![0; grid.resource_count()],
        requested: vec![0; grid.resource_count()],
        x: vec![0; n],
        leaf,
        nodes: 0,
        budget: limits.max_states,
    };
    if walk.go(0) {
        Ok(())
    } else {
        Err(SearchError::StateLimit {
            needed,
            limit: limits.max_states,
        })
    }
}

/// States other than the end where every unfinished thread requests a
/// resource at exactly full capacity.
fn blocked_states(grid: &Grid, admissible: bool, limits: &SearchLimits) -> Result<Vec<State>, SearchError> {
    let mut out = Vec::new();
    acquire_states(grid, admissible, limits, &mut |x, usage, requested| {
        let all_top = x.iter().enumerate().all(|(i, &v)| v == grid.top(i));
        let saturated = requested
            .iter()
            .enumerate()
            .all(|(r, &q)| q == 0 || usage[r] == grid.capacity(r));
        if !all_top && saturated {
            out.push(State(x.to_vec()));
        }
    })?;
    Ok(out)
}

/// Admissible states other than the end where each unfinished thread waits
/// on a resource at full capacity. Reachable ones are exactly the deadlocks.
pub fn deadlock_candidates(p: &Program, limits: &SearchLimits) -> Result<Vec<State>, SearchError> {
    blocked_states(&Grid::new(p), true, limits)
}

/// Like [`deadlock_candidates`] but without requiring the state itself to be
/// admissible.
pub fn potential_deadlocks(p: &Program, limits: &SearchLimits) -> Result<Vec<State>, SearchError> {
    blocked_states(&Grid::new(p), false, limits)
}

/// Direct check of the potential deadlock conditions at one state.
pub fn is_potential_deadlock(grid: &Grid, x: &[usize]) -> bool {
    if !grid.in_range(x) || (0..x.len()).all(|c| x[c] == grid.top(c)) {
        return false;
    }
    let usage = grid.usage(x);
    (0..x.len()).all(|c| {
        x[c] == grid.top(c)
            || grid
                .request(c, x[c])
                .is_some_and(|r| usage[r] == grid.capacity(r))
    })
}

/// All reachable deadlocks, each with a breadth-first witness path.
pub fn find_deadlocks(p: &Program, limits: &SearchLimits) -> Result<DeadlockReport, SearchError> {
    let grid = Grid::new(p);
    let potential = blocked_states(&grid, false, limits)?;
    let candidates: Vec<&State> = potential
        .iter()
        .filter(|s| grid.state_admissible(s))
        .collect();
    let mut deadlocks = Vec::new();
    let mut explored = 0;
    if !candidates.is_empty() {
        let mut upper = vec![0; p.len()];
        for s in &candidates {
            for (u, &v) in upper.iter_mut().zip(s.iter()) {
                *u = (*u).max(v);
            }
        }
        let reach = Reachability::explore(&grid, &upper, limits)?;
        explored = reach.visited();
        for s in &candidates {
            if let Some(path) = reach.path_to(s) {
                assert!(grid.steppable(s).is_empty(), "deadlock {s} can step");
                assert!(
                    path.is_admissible(&grid) && path.end() == **s,
                    "bad witness path for {s}"
                );
                deadlocks.push(((*s).clone(), path));
            }
        }
    }
    Ok(DeadlockReport {
        searched: SearchedInstance {
            threads: p.len(),
            grid_states: p.grid_size(),
            candidates: candidates.len(),
            explored_states: explored,
        },
        deadlocks,
        potential_deadlocks: potential,
    })
}

/// Extends `s` with one coordinate per entry of `tops`, each at that end
/// position.
pub fn pad_top(s: &State, tops: &[usize]) -> State {
    let mut x = s.0.clone();
    x.extend_from_slice(tops);
    State(x)
}

/// Number of copies that decides deadlock freedom for every copy count.
pub fn deadlock_cutoff(caps: &CapacityMap) -> usize {
    caps.total()
}

/// Cut-off counted over the resources `t` actually uses.
pub fn thread_deadlock_cutoff(t: &Thread, caps: &CapacityMap) -> usize {
    caps.total_of(t.used_resources())
}

fn power(t: &Thread, caps: &CapacityMap, n: usize) -> Program {
    Program::power(caps.clone(), t, n).expect("thread validated against caps")
}

/// Deadlock freedom of `T^n` for all `n`.
pub fn family_deadlock_verdict(t: &Thread, caps: &CapacityMap, limits: &SearchLimits) -> FamilyVerdict {
    let m = thread_deadlock_cutoff(t, caps);
    let dl = Property::DeadlockFreedom;
    if t.single_access() {
        let theorem = if t.is_trivial() {
            Theorem::TrivialThread
        } else {
            Theorem::SingleAccess
        };
        return FamilyVerdict::new(dl, Answer::Yes, m, theorem);
    }
    let mut manifests_at = None;
    for n in 2..m {
        match find_deadlocks(&power(t, caps, n), limits) {
            Ok(r) if !r.is_deadlock_free() => {
                manifests_at = Some(n);
                break;
            }
            Ok(_) => {}
            Err(e) => {
                return FamilyVerdict::new(dl, Answer::Inconclusive, m, Theorem::DeadlockCutoff)
                    .with_note(format!("{n} copies: {e}"))
            }
        }
    }
    match find_deadlocks(&power(t, caps, m), limits) {
        Ok(r) if r.is_deadlock_free() => FamilyVerdict::new(dl, Answer::Yes, m, Theorem::DeadlockCutoff),
        Ok(r) => {
            let mut v = FamilyVerdict::new(dl, Answer::No, m, Theorem::DeadlockCutoff);
            v.witness_path = r.deadlocks.first().map(|(_, path)| path.clone());
            v.witnesses = r.deadlock_states();
            v.manifests_at = Some(manifests_at.unwrap_or(m));
            v
        }
        Err(e) => FamilyVerdict::new(dl, Answer::Inconclusive, m, Theorem::DeadlockCutoff)
            .with_note(format!("{m} copies: {e}")),
    }
}

/// Order-preserving index selections of size `m` whose thread sequences are
/// pairwise distinct, each using the earliest indices available.
fn distinct_selections(p: &Program, m: usize, budget: u64) -> Option<Vec<Vec<usize>>> {
    let n = p.len();
    let mut kind = vec![0usize; n];
    for i in 0..n {
        kind[i] = (0..i).find(|&j| p.thread(j) == p.thread(i)).map_or(i, |j| kind[j]);
    }
    fn go(
        kind: &[usize],
        m: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        budget: u64,
    ) -> bool {
        if chosen.len() == m {
            out.push(chosen.clone());
            return out.len() as u64 <= budget;
        }
        let mut seen = Vec::new();
        for i in start..=kind.len() - (m - chosen.len()) {
            if seen.contains(&kind[i]) {
                continue;
            }
            seen.push(kind[i]);
            chosen.push(i);
            let ok = go(kind, m, i + 1, chosen, out, budget);
            chosen.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut out = Vec::new();
    go(&kind, m, 0, &mut Vec::new(), &mut out, budget).then_some(out)
}

/// Deadlock freedom of one program, deciding large programs through their
/// sub-programs with as many threads as the capacity sum.
pub fn program_deadlock_verdict(p: &Program, limits: &SearchLimits) -> FamilyVerdict {
    let m = p.caps().total_of(p.used_resources());
    let dl = Property::DeadlockFreedom;
    let theorem = Theorem::SubprogramCutoff;
    let n = p.len();
    if p.threads().iter().all(Thread::single_access) && n > 0 && p.threads().windows(2).all(|w| w[0] == w[1]) {
        return FamilyVerdict::new(dl, Answer::Yes, m, Theorem::SingleAccess);
    }
    if n <= m.max(1) {
        return match find_deadlocks(p, limits) {
            Ok(r) if r.is_deadlock_free() => FamilyVerdict::new(dl, Answer::Yes, m, theorem),
            Ok(r) => {
                let mut v = FamilyVerdict::new(dl, Answer::No, m, theorem);
                v.witness_path = r.deadlocks.first().map(|(_, path)| path.clone());
                v.witnesses = r.deadlock_states();
                v
            }
            Err(e) => FamilyVerdict::new(dl, Answer::Inconclusive, m, theorem).with_note(e.to_string()),
        };
    }
    let Some(selections) = distinct_selections(p, m, limits.max_states) else {
        return FamilyVerdict::new(dl, Answer::Inconclusive, m, theorem)
            .with_note("too many distinct sub-programs");
    };
    let full = Grid::new(p);
    for sel in selections {
        let sub = p.select(&sel).expect("selection of a valid program");
        let report = match find_deadlocks(&sub, limits) {
            Ok(r) => r,
            Err(e) => {
                return FamilyVerdict::new(dl, Answer::Inconclusive, m, theorem)
                    .with_note(format!("sub-program {sel:?}: {e}"))
            }
        };
        let Some((s, sub_path)) = report.deadlocks.first() else {
            continue;
        };
        // finished threads hold nothing, so run the others to the end first
        let mut x = vec![0; n];
        let mut steps = Vec::new();
        for i in (0..n).filter(|i| !sel.contains(i)) {
            x[i] = p.thread(i).top();
            steps.extend(std::iter::repeat_n(i, x[i]));
        }
        for (k, &i) in sel.iter().enumerate() {
            x[i] = s[k];
        }
        steps.extend(sub_path.steps().iter().map(|&k| sel[k]));
        let path = LatticePath::new(n, steps);
        let state = State(x);
        assert!(path.is_admissible(&full) && path.end() == state);
        assert!(full.steppable(&state).is_empty());
        let mut v = FamilyVerdict::new(dl, Answer::No, m, theorem);
        v.witnesses = vec![state];
        v.witness_path = Some(path);
        v.note = Some(format!("deadlock in the sub-program of threads {sel:?}"));
        return v;
    }
    FamilyVerdict::new(dl, Answer::Yes, m, theorem)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("the construction needs at least two resources, got {0}")]
    TooFewResources(usize),
    #[error("resource {0} needs capacity at least 2")]
    CapacityBelowTwo(String),
}

/// Generated thread together with the state it is built to exhibit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharpWitness {
    pub thread: Thread,
    /// Number of copies the expected state lives in.
    pub copies: usize,
    pub expected: State,
}

/// `P r1 P r2 V r1 P r3 V r2 ... P rk V r(k-1) P r1 V rk V r1` over the
/// resources in declaration order.
pub(crate) fn chain_actions(caps: &CapacityMap) -> Vec<Action> {
    let r: Vec<ResourceId> = caps.ids().collect();
    let k = r.len();
    let mut a = vec![Action::acquire(r[0]), Action::acquire(r[1])];
    a.push(Action::release(r[0]));
    for j in 2..k {
        a.push(Action::acquire(r[j]));
        a.push(Action::release(r[j - 1]));
    }
    a.push(Action::acquire(r[0]));
    a.push(Action::release(r[k - 1]));
    a.push(Action::release(r[0]));
    a
}

/// Copies of position `2j` for each resource `r_j`, `j < k`, after
/// `first` copies of position `2k`.
pub(crate) fn chain_blocks(caps: &CapacityMap, first: u32) -> State {
    let k = caps.len();
    let mut x = vec![2 * k; first as usize];
    for (j, (_, _, cap)) in caps.iter().take(k - 1).enumerate() {
        x.extend(std::iter::repeat_n(2 * (j + 1), cap as usize));
    }
    State(x)
}

/// Thread whose `M`-th power deadlocks while no smaller power does.
pub fn deadsharp_witness(caps: &CapacityMap) -> Result<SharpWitness, WitnessError> {
    if caps.len() < 2 {
        return Err(WitnessError::TooFewResources(caps.len()));
    }
    let thread = Thread::new(chain_actions(caps), caps).expect("chain thread is valid");
    let last = caps.capacity(ResourceId(caps.len() - 1));
    Ok(SharpWitness {
        thread,
        copies: caps.total(),
        expected: chain_blocks(caps, last),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_source;

    fn program(src: &str, name: &str) -> Program {
        parse_source(src).unwrap().program(name).unwrap()
    }

    fn states(v: &[&[usize]]) -> Vec<State> {
        v.iter().map(|s| State(s.to_vec())).collect()
    }

    const EX3: &str = "resource a cap 1\nresource b cap 1\nthread T1 = Pa Pb Vb Va\nthread T2 = Pb Pa Va Vb\nprogram m = T1 | T2\n";
    const FIG2: &str = "resource a cap 1\nresource b cap 1\nresource c cap 1\nthread T = Pa Pb Va Pc Vb Pa Vc Va\nprogram m2 = T^2\nprogram m3 = T^3\n";
    const LIM: SearchLimits = SearchLimits {
        max_states: 10_000_000,
    };

    /// Every reachable state without admissible steps, except the end.
    fn scan_deadlocks(p: &Program) -> Vec<State> {
        let grid = Grid::new(p);
        let reach = Reachability::full(&grid, &LIM).unwrap();
        reach
            .states()
            .filter(|s| !s.is_top(p) && grid.steppable(s).is_empty())
            .collect()
    }

    #[test]
    fn crossed_pair_has_one_deadlock() {
        let p = program(EX3, "m");
        assert_eq!(deadlock_candidates(&p, &LIM).unwrap(), states(&[&[2, 2]]));
        let r = find_deadlocks(&p, &LIM).unwrap();
        assert_eq!(r.deadlock_states(), states(&[&[2, 2]]));
        assert!(r.potential_deadlocks.contains(&State(vec![2, 2])));
    }

    #[test]
    fn concatenated_pair_has_two_deadlocks() {
        let src = format!("{EX3}thread C = Pa Pb Vb Va Pb Pa Va Vb\nprogram cc = C^2\n");
        let p = program(&src, "cc");
        assert_eq!(deadlock_candidates(&p, &LIM).unwrap(), states(&[&[2, 6], &[6, 2]]));
        assert_eq!(find_deadlocks(&p, &LIM).unwrap().deadlock_states(), states(&[&[2, 6], &[6, 2]]));
    }

    #[test]
    fn mutex_has_no_candidates() {
        let p = program("resource a cap 1\nthread T = Pa Va\nprogram m = T^2", "m");
        assert!(deadlock_candidates(&p, &LIM).unwrap().is_empty());
    }

    #[test]
    fn three_copies_deadlock_at_permutations() {
        let src = parse_source(FIG2).unwrap();
        assert!(find_deadlocks(&src.program("m2").unwrap(), &LIM).unwrap().is_deadlock_free());
        let r = find_deadlocks(&src.program("m3").unwrap(), &LIM).unwrap();
        assert_eq!(
            r.deadlock_states(),
            states(&[&[2, 4, 6], &[2, 6, 4], &[4, 2, 6], &[4, 6, 2], &[6, 2, 4], &[6, 4, 2]])
        );
    }

    #[test]
    fn lone_thread_never_deadlocks() {
        let src = parse_source(FIG2).unwrap();
        let p = Program::power(src.caps.clone(), src.thread("T").unwrap(), 1).unwrap();
        assert!(find_deadlocks(&p, &LIM).unwrap().is_deadlock_free());
    }

    #[test]
    fn agrees_with_full_scan() {
        for (src, name) in [(EX3, "m"), (FIG2, "m2"), (FIG2, "m3")] {
            let p = program(src, name);
            assert_eq!(find_deadlocks(&p, &LIM).unwrap().deadlock_states(), scan_deadlocks(&p));
        }
    }

    #[test]
    fn potential_deadlocks_exclude_top() {
        let p = program(EX3, "m");
        let pot = potential_deadlocks(&p, &LIM).unwrap();
        assert!(!pot.contains(&State::top(&p)));
        let grid = Grid::new(&p);
        assert!(pot.iter().all(|s| is_potential_deadlock(&grid, s)));
        assert!(!is_potential_deadlock(&grid, &State::top(&p)));
    }

    #[test]
    fn padding() {
        let s = State(vec![2, 2]);
        assert_eq!(pad_top(&s, &[5]), State(vec![2, 2, 5]));
        assert_eq!(pad_top(&s, &[]), s);
        assert_eq!(pad_top(&State(vec![0, 0]), &[3, 3]), State(vec![0, 0, 3, 3]));
    }

    #[test]
    fn cutoffs() {
        let caps = |v: &[(&str, u32)]| CapacityMap::from_pairs(v.iter().copied()).unwrap();
        assert_eq!(deadlock_cutoff(&caps(&[("a", 1), ("b", 1)])), 2);
        assert_eq!(deadlock_cutoff(&caps(&[("a", 1), ("b", 1), ("c", 1)])), 3);
        assert_eq!(deadlock_cutoff(&caps(&[("a", 2), ("b", 3)])), 5);
    }

    #[test]
    fn family_verdicts() {
        let src = parse_source(FIG2).unwrap();
        let v = family_deadlock_verdict(src.thread("T").unwrap(), &src.caps, &LIM);
        assert_eq!(v.holds_for_all_n, Answer::No);
        assert_eq!(v.cutoff, 3);
        assert_eq!(v.witnesses.len(), 6);
        assert_eq!(v.manifests_at, Some(3));

        let src = parse_source(EX3).unwrap();
        let v = family_deadlock_verdict(src.thread("T1").unwrap(), &src.caps, &LIM);
        assert_eq!(v.holds_for_all_n, Answer::Yes);
        assert_eq!(v.cutoff, 2);
        assert_eq!(v.theorem, Theorem::SingleAccess);
        let p = Program::power(src.caps.clone(), src.thread("T1").unwrap(), 2).unwrap();
        assert!(find_deadlocks(&p, &LIM).unwrap().is_deadlock_free());

        let src = parse_source("resource a cap 3\nresource b cap 2\nthread T = Pa Pb Vb Va").unwrap();
        let v = family_deadlock_verdict(src.thread("T").unwrap(), &src.caps, &SearchLimits::with_max_states(1));
        assert_eq!(v.holds_for_all_n, Answer::Yes);
        assert_eq!(v.theorem, Theorem::SingleAccess);
    }

    #[test]
    fn program_verdicts() {
        let v = program_deadlock_verdict(&program(EX3, "m"), &LIM);
        assert_eq!(v.holds_for_all_n, Answer::No);
        assert_eq!(v.witnesses, states(&[&[2, 2]]));

        let src = format!("{EX3}program t = T1 | T2 | T1\n");
        let p = program(&src, "t");
        let v = program_deadlock_verdict(&p, &LIM);
        assert_eq!(v.holds_for_all_n, Answer::No);
        assert_eq!(v.witnesses, states(&[&[2, 2, 5]]));
        assert!(v.witness_path.unwrap().is_admissible(&Grid::new(&p)));

        let p = program("resource a cap 1\nthread T = Pa Va\nprogram m = T^5", "m");
        assert_eq!(program_deadlock_verdict(&p, &LIM).holds_for_all_n, Answer::Yes);
    }

    #[test]
    fn distinct_selections_dedupe() {
        let src = format!("{EX3}program t = T1 | T2 | T1\n");
        let p = program(&src, "t");
        assert_eq!(
            distinct_selections(&p, 2, 100).unwrap(),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        let p = program(FIG2, "m3");
        assert_eq!(distinct_selections(&p, 2, 100).unwrap(), vec![vec![0, 1]]);
    }

    #[test]
    fn sharp_witness_shapes() {
        let caps = |v: &[(&str, u32)]| CapacityMap::from_pairs(v.iter().copied()).unwrap();
        let c = caps(&[("a", 1), ("b", 1)]);
        let w = deadsharp_witness(&c).unwrap();
        assert_eq!(w.thread.display(&c), "Pa Pb Va Pa Vb Va");
        assert_eq!((w.copies, w.expected.clone()), (2, State(vec![4, 2])));

        let c = caps(&[("a", 1), ("b", 1), ("c", 1)]);
        let w = deadsharp_witness(&c).unwrap();
        assert_eq!(w.thread.display(&c), "Pa Pb Va Pc Vb Pa Vc Va");
        assert_eq!(w.expected, State(vec![6, 2, 4]));

        let c = caps(&[("a", 2), ("b", 1)]);
        let w = deadsharp_witness(&c).unwrap();
        assert_eq!(w.copies, 3);
        assert_eq!(w.expected, State(vec![4, 2, 2]));
        let p = Program::power(c.clone(), &w.thread, 3).unwrap();
        assert!(find_deadlocks(&p, &LIM).unwrap().deadlock_states().contains(&w.expected));
        let p = Program::power(c.clone(), &w.thread, 2).unwrap();
        assert!(find_deadlocks(&p, &LIM).unwrap().is_deadlock_free());

        assert_eq!(deadsharp_witness(&caps(&[("a", 1)])), Err(WitnessError::TooFewResources(1)));
    }
}
