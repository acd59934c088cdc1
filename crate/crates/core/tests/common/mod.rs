#![allow(dead_code)]

use pvguard_core::model::{Action, CapacityMap, Program, ResourceId, Thread};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random valid thread over `caps` with at most `max_len` actions and at
/// least one acquire.
pub fn random_thread<R: Rng>(rng: &mut R, caps: &CapacityMap, max_len: usize) -> Thread {
    let nres = caps.len();
    let pairs = rng.gen_range(1..=(max_len / 2).max(1));
    let mut held: Vec<usize> = Vec::new();
    let mut acquired = 0;
    let mut actions = Vec::new();
    loop {
        let mut moves = Vec::new();
        if acquired < pairs {
            moves.extend((0..nres).filter(|r| !held.contains(r)).map(|r| (true, r)));
        }
        moves.extend(held.iter().map(|&r| (false, r)));
        let Some(&(acq, r)) = moves.choose(rng) else { break };
        if acq {
            held.push(r);
            acquired += 1;
            actions.push(Action::acquire(ResourceId(r)));
        } else {
            held.retain(|&h| h != r);
            actions.push(Action::release(ResourceId(r)));
        }
    }
    Thread::new(actions, caps).expect("generated thread is valid")
}

pub fn random_caps<R: Rng>(rng: &mut R, nres: usize, lo: u32, hi: u32) -> CapacityMap {
    let names = ["a", "b", "c", "d"];
    CapacityMap::from_pairs((0..nres).map(|i| (names[i], rng.gen_range(lo..=hi)))).unwrap()
}

pub fn power(t: &Thread, caps: &CapacityMap, n: usize) -> Program {
    Program::power(caps.clone(), t, n).unwrap()
}

pub fn caps(v: &[(&str, u32)]) -> CapacityMap {
    CapacityMap::from_pairs(v.iter().copied()).unwrap()
}

pub fn program(src: &str, name: &str) -> Program {
    pvguard_core::parse_source(src).unwrap().program(name).unwrap()
}
