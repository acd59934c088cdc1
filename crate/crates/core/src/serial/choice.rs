//! Local choice points: states where two threads may each proceed but no
//! chain of admissible squares connects the two moves, so the choice
//! between them cannot be undone later.

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deadlock::{acquire_states, chain_actions, chain_blocks, is_potential_deadlock, SharpWitness, WitnessError};
use crate::geometry::{Grid, LatticePath, Reachability, SearchError, SearchLimits, State};
use crate::model::{Action, CapacityMap, Program, ResourceId, Thread};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoicePoint {
    pub state: State,
    /// The contested resource, one unit short of capacity.
    pub resource: ResourceId,
    /// Threads requesting it.
    pub contenders: Vec<usize>,
    /// `None` when the reachability search exceeded its limits.
    pub reachable: Option<bool>,
    pub path: Option<LatticePath>,
}

/// Combinatorial test at one state: some resource is one unit below
/// capacity and requested by at least two threads, and every other thread
/// is finished or waiting on a full resource. Returns the resource and the
/// requesting threads.
pub fn choice_point_at(grid: &Grid, x: &[usize]) -> Option<(ResourceId, Vec<usize>)> {
    if !grid.in_range(x) || !grid.state_admissible(x) {
        return None;
    }
    let usage = grid.usage(x);
    let mut requested = vec![0u32; grid.resource_count()];
    for (c, &v) in x.iter().enumerate() {
        if v != grid.top(c) {
            requested[grid.request(c, v)?] += 1;
        }
    }
    contested(grid, x, &usage, &requested)
}

fn contested(grid: &Grid, x: &[usize], usage: &[u32], requested: &[u32]) -> Option<(ResourceId, Vec<usize>)> {
    let mut open = (0..requested.len()).filter(|&r| requested[r] > 0 && usage[r] != grid.capacity(r));
    let r = open.next()?;
    if open.next().is_some() || requested[r] < 2 || usage[r] + 1 != grid.capacity(r) {
        return None;
    }
    let s = (0..x.len())
        .filter(|&c| x[c] != grid.top(c) && grid.request(c, x[c]) == Some(r))
        .collect();
    Some((ResourceId(r), s))
}

/// Direct test: at least two threads can step and the graph on them, with
/// an edge wherever the spanned square is admissible, is disconnected.
pub fn lcp_definition_check(grid: &Grid, x: &[usize]) -> bool {
    if !grid.in_range(x) || !grid.state_admissible(x) {
        return false;
    }
    let steps = grid.steppable(x);
    if steps.len() < 2 {
        return false;
    }
    let mut uf = UnionFind::<usize>::new(steps.len());
    for i in 0..steps.len() {
        for j in i + 1..steps.len() {
            if grid.square_admissible(x, steps[i], steps[j]) {
                uf.union(i, j);
            }
        }
    }
    (1..steps.len()).any(|i| !uf.equiv(0, i))
}

/// Every local choice point of `p`, found among states whose threads sit at
/// acquires or at their end, with reachability and a witness path.
pub fn local_choice_points(p: &Program, limits: &SearchLimits) -> Result<Vec<ChoicePoint>, SearchError> {
    let grid = Grid::new(p);
    let mut found = Vec::new();
    acquire_states(&grid, true, limits, &mut |x, usage, requested| {
        if let Some((r, s)) = contested(&grid, x, usage, requested) {
            found.push((State(x.to_vec()), r, s));
        }
    })?;
    let mut upper = vec![0; p.len()];
    for (s, _, _) in &found {
        for (u, &v) in upper.iter_mut().zip(s.iter()) {
            *u = (*u).max(v);
        }
    }
    let reach = if found.is_empty() {
        None
    } else {
        Reachability::explore(&grid, &upper, limits).ok()
    };
    Ok(found
        .into_iter()
        .map(|(state, resource, contenders)| {
            let path = reach.as_ref().and_then(|r| r.path_to(&state));
            ChoicePoint {
                reachable: reach.as_ref().map(|_| path.is_some()),
                path,
                state,
                resource,
                contenders,
            }
        })
        .collect())
}

/// Copies needed to decide absence of local choice points for every copy
/// count.
pub fn lcp_cutoff(caps: &CapacityMap) -> usize {
    caps.total() + 1
}

/// Cut-off counted over the resources `t` actually uses.
pub fn thread_lcp_cutoff(t: &Thread, caps: &CapacityMap) -> usize {
    caps.total_of(t.used_resources()) + 1
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("no thread holds the contested resource")]
    NoHolder,
    #[error("no copy of a holder of the contested resource gives a potential deadlock (tried threads {0:?})")]
    NoneQualifies(Vec<usize>),
}

/// A local choice point turned into a potential deadlock of the program
/// with one more thread.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedChoicePoint {
    /// Thread duplicated and placed first.
    pub copied: usize,
    pub program: Program,
    pub state: State,
}

/// Prepends a copy of a thread holding the contested resource, at the same
/// position, which fills the resource to capacity. Holders are tried in
/// index order; the first one giving a potential deadlock is returned.
pub fn lcp_to_potential_deadlock(p: &Program, cp: &ChoicePoint) -> Result<LiftedChoicePoint, LiftError> {
    let grid = Grid::new(p);
    let x = &cp.state;
    let holders: Vec<usize> = (0..p.len())
        .filter(|&c| grid.held_at(c, x[c]).contains(&cp.resource.0))
        .collect();
    if holders.is_empty() {
        return Err(LiftError::NoHolder);
    }
    for &k in &holders {
        let mut threads = vec![p.thread(k).clone()];
        threads.extend_from_slice(p.threads());
        let q = Program::new(p.caps().clone(), threads).expect("same capacity map");
        let mut y = vec![x[k]];
        y.extend_from_slice(x);
        if is_potential_deadlock(&Grid::new(&q), &y) {
            return Ok(LiftedChoicePoint {
                copied: k,
                program: q,
                state: State(y),
            });
        }
    }
    Err(LiftError::NoneQualifies(holders))
}

/// Thread with a reachable local choice point at `Σκ - 1` copies, built for
/// capacities of at least 2.
pub fn sharpserializable_witness(caps: &CapacityMap) -> Result<SharpWitness, WitnessError> {
    if caps.len() < 2 {
        return Err(WitnessError::TooFewResources(caps.len()));
    }
    if let Some((_, name, _)) = caps.iter().find(|&(_, _, c)| c < 2) {
        return Err(WitnessError::CapacityBelowTwo(name.to_string()));
    }
    let mut actions = chain_actions(caps);
    actions.push(Action::acquire(ResourceId(0)));
    actions.push(Action::release(ResourceId(0)));
    let thread = Thread::new(actions, caps).expect("chain thread is valid");
    let last = caps.capacity(ResourceId(caps.len() - 1));
    Ok(SharpWitness {
        thread,
        copies: caps.total() - 1,
        expected: chain_blocks(caps, last - 1),
    })
}
