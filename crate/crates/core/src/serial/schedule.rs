//! Schedules: for each forbidden box, the thread that enters its hold last.
//!
//! Choosing leg `s` of a box replaces it by the region where thread `s` is
//! inside its hold interval while every other leg has not yet released:
//! `(a_s, b_s)` on coordinate `s`, `[0, b_k)` on the other legs. A path obeys
//! a schedule when it avoids every such region.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geometry::search::Indexer;
use crate::geometry::{forbidden_rectangles, ForbiddenRectangle, Grid, LatticePath, SearchError, SearchLimits};
use crate::model::{CapacityMap, Program, Thread};

use super::classes::Classifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    /// Open interval `]a, b[`.
    Open(usize, usize),
    /// Half-open interval `[0, b[`.
    Below(usize),
}

impl Bound {
    fn contains(self, v: usize) -> bool {
        match self {
            Bound::Open(a, b) => a < v && v < b,
            Bound::Below(b) => v < b,
        }
    }

    /// The open segment `]v, v + 1[` meets the interval.
    fn meets_segment(self, v: usize) -> bool {
        match self {
            Bound::Open(a, b) => a <= v && v < b,
            Bound::Below(b) => v < b,
        }
    }
}

/// Product region over the listed coordinates, unconstrained elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub legs: Vec<(usize, Bound)>,
}

impl Region {
    pub fn contains(&self, x: &[usize]) -> bool {
        self.legs.iter().all(|&(c, b)| b.contains(x[c]))
    }

    /// The open edge from `x` in direction `dir` meets the region.
    pub fn meets_edge(&self, x: &[usize], dir: usize) -> bool {
        self.legs.iter().all(|&(c, b)| {
            if c == dir {
                b.meets_segment(x[c])
            } else {
                b.contains(x[c])
            }
        })
    }

    /// Some visited state or traversed edge of the path meets the region.
    pub fn meets_path(&self, path: &LatticePath) -> bool {
        let mut x = vec![0; path.dims()];
        if self.contains(&x) {
            return true;
        }
        for &c in path.steps() {
            if self.meets_edge(&x, c) {
                return true;
            }
            x[c] += 1;
            if self.contains(&x) {
                return true;
            }
        }
        false
    }
}

/// Box `r` extended down to 0 along every leg except `s`. `None` when `s`
/// is not a leg of `r`.
pub fn extended_rectangle(r: &ForbiddenRectangle, s: usize) -> Option<Region> {
    r.leg(s)?;
    Some(Region {
        legs: r
            .legs
            .iter()
            .map(|&(c, h)| {
                let b = if c == s {
                    Bound::Open(h.acquire, h.release)
                } else {
                    Bound::Below(h.release)
                };
                (c, b)
            })
            .collect(),
    })
}

/// A chosen leg for each forbidden box of a program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub choices: Vec<(ForbiddenRectangle, usize)>,
}

impl Schedule {
    /// The same leg position (`0` = lowest thread) chosen in every box.
    pub fn uniform(p: &Program, leg: usize) -> Self {
        Schedule {
            choices: forbidden_rectangles(p)
                .into_iter()
                .map(|r| {
                    let s = r.legs[leg.min(r.legs.len() - 1)].0;
                    (r, s)
                })
                .collect(),
        }
    }

    pub fn regions(&self) -> Vec<Region> {
        self.choices
            .iter()
            .map(|(r, s)| extended_rectangle(r, *s).expect("chosen coordinate is a leg"))
            .collect()
    }

    /// The path avoids every extended box of the schedule.
    pub fn obeyed_by(&self, path: &LatticePath) -> bool {
        self.regions().iter().all(|g| !g.meets_path(path))
    }
}

/// For each forbidden box of `p` (in enumeration order), the legs whose
/// extended box `path` avoids.
pub fn obeyed_choices(p: &Program, path: &LatticePath) -> Vec<(ForbiddenRectangle, Vec<usize>)> {
    forbidden_rectangles(p)
        .into_iter()
        .map(|r| {
            let legs = r
                .legs
                .iter()
                .map(|&(c, _)| c)
                .filter(|&c| !extended_rectangle(&r, c).unwrap().meets_path(path))
                .collect();
            (r, legs)
        })
        .collect()
}

/// A bottom-to-top path obeying the schedule, found breadth-first, or `None`.
pub fn schedule_feasible(
    p: &Program,
    sch: &Schedule,
    limits: &SearchLimits,
) -> Result<Option<LatticePath>, SearchError> {
    let grid = Grid::new(p);
    let regions = sch.regions();
    let n = grid.dims();
    let indexer = Indexer::new(grid.tops(), limits)?;
    let mut parent = vec![u16::MAX; indexer.size];
    let mut x = vec![0usize; n];
    let mut usage = vec![0u32; grid.resource_count()];
    if regions.iter().any(|g| g.contains(&x)) {
        return Ok(None);
    }
    let mut queue = VecDeque::from([0usize]);
    parent[0] = n as u16;
    while let Some(idx) = queue.pop_front() {
        indexer.decode_into(idx, &mut x);
        grid.add_usage(&x, &mut usage);
        for c in 0..n {
            if !grid.can_step(&x, &usage, c) {
                continue;
            }
            let next = idx + indexer.strides[c];
            if parent[next] != u16::MAX {
                continue;
            }
            if regions.iter().any(|g| g.meets_edge(&x, c)) {
                continue;
            }
            x[c] += 1;
            let inside = regions.iter().any(|g| g.contains(&x));
            x[c] -= 1;
            if inside {
                continue;
            }
            parent[next] = c as u16;
            queue.push_back(next);
        }
    }
    let top = indexer.size - 1;
    if parent[top] == u16::MAX {
        return Ok(None);
    }
    let mut steps = Vec::new();
    let mut idx = top;
    while idx != 0 {
        let c = parent[idx] as usize;
        steps.push(c);
        idx -= indexer.strides[c];
    }
    steps.reverse();
    Ok(Some(LatticePath::new(n, steps)))
}

/// Every feasible schedule with a witness path. Fails when there are more
/// than `max_schedules` schedules to try.
pub fn feasible_schedules(
    p: &Program,
    max_schedules: u64,
    limits: &SearchLimits,
) -> Result<Vec<(Schedule, LatticePath)>, SearchError> {
    let rects = forbidden_rectangles(p);
    let radix: Vec<usize> = rects.iter().map(|r| r.legs.len()).collect();
    let total = radix.iter().fold(1u128, |a, &r| a.saturating_mul(r as u128));
    if total > max_schedules as u128 {
        return Err(SearchError::ItemLimit { limit: max_schedules });
    }
    let mut digits = vec![0; rects.len()];
    let mut out = Vec::new();
    loop {
        let sch = Schedule {
            choices: rects
                .iter()
                .zip(&digits)
                .map(|(r, &d)| (r.clone(), r.legs[d].0))
                .collect(),
        };
        if let Some(path) = schedule_feasible(p, &sch, limits)? {
            out.push((sch, path));
        }
        if !crate::geometry::advance_odometer(&mut digits, &radix) {
            return Ok(out);
        }
    }
}

/// Largest number of schedules tried before switching to class counting.
const PAIR_SCHEDULE_LIMIT: u64 = 1 << 14;

/// Serializability of `T^2` with unit capacities: the only feasible
/// schedules are the two uniform ones. Large instances are decided by
/// counting classes instead, which is equivalent.
pub fn kappa1_pair_serializable(t: &Thread, caps: &CapacityMap, limits: &SearchLimits) -> Result<bool, SearchError> {
    let p = Program::power(caps.clone(), t, 2).expect("thread validated against caps");
    match feasible_schedules(&p, PAIR_SCHEDULE_LIMIT, limits) {
        Ok(feasible) => {
            let first = Schedule::uniform(&p, 0);
            let second = Schedule::uniform(&p, 1);
            Ok(feasible.len() <= 2 && feasible.iter().all(|(s, _)| *s == first || *s == second))
        }
        Err(SearchError::ItemLimit { .. }) => {
            let report = Classifier::build(&p, u64::from(u32::MAX), limits)?.report();
            Ok(report.serializable)
        }
        Err(e) => Err(e),
    }
}
