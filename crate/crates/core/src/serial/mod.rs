//! Serializability: whether every execution is equivalent to one running
//! the threads one after another.

mod choice;
mod classes;
mod schedule;

pub use choice::{
    choice_point_at, lcp_cutoff, lcp_definition_check, lcp_to_potential_deadlock, local_choice_points,
    sharpserializable_witness, thread_lcp_cutoff, ChoicePoint, LiftError, LiftedChoicePoint,
};
pub use classes::{classes_by_enumeration, dihomotopy_classes, ClassReport, Classifier, EnumeratedClasses};
pub use schedule::{
    extended_rectangle, feasible_schedules, kappa1_pair_serializable, obeyed_choices, schedule_feasible, Bound,
    Region, Schedule,
};

use crate::deadlock::potential_deadlocks;
use crate::geometry::{LatticePath, SearchError, SearchLimits};
use crate::model::{CapacityMap, Program, Thread};
use crate::verdict::{Answer, FamilyVerdict, PerCopyResult, Property, Theorem};

/// Classes allowed at a single state during class counting.
pub const DEFAULT_CLASS_LIMIT: u64 = 1_000_000;

/// Each thread's steps are contiguous, i.e. the threads run one at a time.
/// Meant for complete paths, where every thread runs to its end.
pub fn is_serial(path: &LatticePath) -> bool {
    let mut done = vec![false; path.dims()];
    let mut current = None;
    for &c in path.steps() {
        if current != Some(c) {
            if done[c] {
                return false;
            }
            if let Some(prev) = current {
                done[prev] = true;
            }
            current = Some(c);
        }
    }
    true
}

/// With all capacities at least 2: serializable iff all executions are
/// equivalent.
pub fn connectivity_serializable(p: &Program, limit: u64, limits: &SearchLimits) -> Result<bool, SearchError> {
    Ok(dihomotopy_classes(p, limit, limits)?.class_count == 1)
}

fn power(t: &Thread, caps: &CapacityMap, n: usize) -> Program {
    Program::power(caps.clone(), t, n).expect("thread validated against caps")
}

/// Serializability of `T^n` for small `n`, where the grid allows it.
fn per_copy(t: &Thread, caps: &CapacityMap, ns: &[usize], limits: &SearchLimits) -> Vec<PerCopyResult> {
    ns.iter()
        .map(|&n| match dihomotopy_classes(&power(t, caps, n), DEFAULT_CLASS_LIMIT, limits) {
            Ok(r) => PerCopyResult {
                copies: n,
                serializable: Some(r.serializable),
                classes: Some(r.class_count),
            },
            Err(_) => PerCopyResult {
                copies: n,
                serializable: None,
                classes: None,
            },
        })
        .collect()
}

/// A class of `T^n` without a serial member, when there is one.
fn non_serial_class(t: &Thread, caps: &CapacityMap, n: usize, limits: &SearchLimits) -> Option<LatticePath> {
    let c = Classifier::build(&power(t, caps, n), DEFAULT_CLASS_LIMIT, limits).ok()?;
    let serial = c.serial_classes();
    c.representatives()
        .into_iter()
        .enumerate()
        .find(|(k, _)| !serial.contains(k))
        .map(|(_, path)| path)
}

/// Serializability of `T^n` for all `n`.
pub fn family_serializability_verdict(t: &Thread, caps: &CapacityMap, limits: &SearchLimits) -> FamilyVerdict {
    let sr = Property::Serializability;
    let used: Vec<u32> = t.used_resources().map(|r| caps.capacity(r)).collect();
    let m = thread_lcp_cutoff(t, caps);
    if used.is_empty() {
        return FamilyVerdict::new(sr, Answer::Yes, m, Theorem::TrivialThread);
    }
    if used.iter().all(|&c| c == 1) {
        return match kappa1_pair_serializable(t, caps, limits) {
            Ok(true) => FamilyVerdict::new(sr, Answer::Yes, 2, Theorem::PairCutoff),
            Ok(false) => {
                let mut v = FamilyVerdict::new(sr, Answer::No, 2, Theorem::PairCutoff);
                v.manifests_at = Some(2);
                v.witness_path = non_serial_class(t, caps, 2, limits);
                v
            }
            Err(e) => FamilyVerdict::new(sr, Answer::Inconclusive, 2, Theorem::PairCutoff).with_note(e.to_string()),
        };
    }
    if used.contains(&1) {
        let mut v = FamilyVerdict::new(sr, Answer::Inconclusive, m, Theorem::MixedCapacity).with_note(
            "unit and larger capacities are mixed; serializability of one copy count does not carry over to others",
        );
        v.per_n = per_copy(t, caps, &[2, 3], limits);
        if let Some(bad) = v.per_n.iter().find(|r| r.serializable == Some(false)) {
            v.holds_for_all_n = Answer::No;
            v.manifests_at = Some(bad.copies);
            v.witness_path = non_serial_class(t, caps, bad.copies, limits);
        }
        return v;
    }
    let lcps = match local_choice_points(&power(t, caps, m), limits) {
        Ok(l) => l,
        Err(e) => {
            return FamilyVerdict::new(sr, Answer::Inconclusive, m, Theorem::ChoicePointCutoff)
                .with_note(e.to_string())
        }
    };
    if lcps.is_empty() {
        return FamilyVerdict::new(sr, Answer::Yes, m, Theorem::ChoicePointCutoff);
    }
    let mut v = FamilyVerdict::new(sr, Answer::Inconclusive, m, Theorem::ChoicePointCutoff).with_note(
        "local choice points found; they can block serializability but do not always do so",
    );
    v.witness_path = lcps.iter().find_map(|cp| cp.path.clone());
    v.witnesses = lcps.into_iter().map(|cp| cp.state).collect();
    v.per_n = per_copy(t, caps, &[2, 3], limits);
    if let Some(bad) = v.per_n.iter().find(|r| r.serializable == Some(false)) {
        v.holds_for_all_n = Answer::No;
        v.manifests_at = Some(bad.copies);
        v.note = Some(format!("{} copies are not serializable", bad.copies));
    }
    v
}

/// Serializability for all `n` through the absence of potential deadlocks
/// in `T^(Σκ+2)`; capacities must all be at least 2.
pub fn family_serializability_by_potential_deadlocks(
    t: &Thread,
    caps: &CapacityMap,
    limits: &SearchLimits,
) -> FamilyVerdict {
    let sr = Property::Serializability;
    let big = Theorem::PotentialDeadlockCutoff;
    let n = caps.total_of(t.used_resources()) + 2;
    if t.used_resources().any(|r| caps.capacity(r) < 2) {
        return FamilyVerdict::new(sr, Answer::Inconclusive, n, big)
            .with_note("needs every used capacity to be at least 2");
    }
    match potential_deadlocks(&power(t, caps, n), limits) {
        Ok(found) if found.is_empty() => FamilyVerdict::new(sr, Answer::Yes, n, big),
        Ok(found) => {
            let mut v = FamilyVerdict::new(sr, Answer::Inconclusive, n, big)
                .with_note("potential deadlocks found; the criterion does not apply");
            v.witnesses = found;
            v
        }
        Err(e) => FamilyVerdict::new(sr, Answer::Inconclusive, n, big).with_note(e.to_string()),
    }
}
