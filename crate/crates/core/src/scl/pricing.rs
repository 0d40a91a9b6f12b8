//! Exact search for heavy directed cycles in the turn graph.
//!
//! Node weights are the duals of the turn-node rows. A polygon column with
//! node multiset `C` improves the LP iff `Σ_{v∈C} π_v` exceeds a threshold
//! (`0` in phase one, `−1/2` in phase two). Any closed walk above a
//! nonpositive threshold contains a simple cycle above it, so only simple
//! cycles are returned.

use std::collections::BTreeSet;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

/// Most cycles handed back per pricing round.
const MAX_CYCLES: usize = 64;

/// Simple directed cycles whose total node weight exceeds `threshold`
/// (which must be `≤ 0`), heaviest first, each rotated to start at its
/// smallest node.
pub fn improving_cycles(successors: &[Vec<usize>], weights: &[Rational], threshold: &Rational) -> Vec<Vec<usize>> {
    assert!(!threshold.is_positive(), "threshold must be nonpositive");
    let n = successors.len();
    if n == 0 {
        return Vec::new();
    }
    let scale = weights.iter().chain(std::iter::once(threshold)).fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let scaled: Vec<BigInt> = weights.iter().map(|w| (w * Rational::from_integer(scale.clone())).to_integer()).collect();
    let limit = (threshold * Rational::from_integer(scale)).to_integer();
    let bound = scaled.iter().map(|w| w.abs()).max().unwrap_or_default() + limit.abs();
    let fits = (bound * BigInt::from(4 * n as u64 + 4)).bits() < 120;
    if fits {
        let small: Vec<i128> = scaled.iter().map(|w| w.to_i128().unwrap()).collect();
        search(successors, &small, &limit.to_i128().unwrap())
    } else {
        search(successors, &scaled, &limit)
    }
}

trait Weight: Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> {}

impl<T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>> Weight for T {}

fn search<W: Weight>(successors: &[Vec<usize>], w: &[W], limit: &W) -> Vec<Vec<usize>> {
    if let Some(cycle) = positive_cycle(successors, w) {
        return vec![canonical_rotation(cycle)];
    }
    heaviest_cycles(successors, w, limit)
}

fn weight_of<W: Weight>(cycle: &[usize], w: &[W]) -> W {
    cycle.iter().fold(W::zero(), |acc, &v| acc + w[v].clone())
}

/// Bellman–Ford longest-path relaxation; returns a cycle of positive weight
/// if one exists.
fn positive_cycle<W: Weight>(successors: &[Vec<usize>], w: &[W]) -> Option<Vec<usize>> {
    let n = successors.len();
    let mut dist = vec![W::zero(); n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    for _ in 0..=n {
        let mut last = None;
        for u in 0..n {
            for &v in &successors[u] {
                let cand = dist[u].clone() + w[v].clone();
                if cand > dist[v] {
                    dist[v] = cand;
                    pred[v] = Some(u);
                    last = Some(v);
                }
            }
        }
        let v = last?;
        // every cycle of the predecessor graph is positive; look for one
        // reachable from the last updated node
        let mut x = v;
        for _ in 0..n {
            match pred[x] {
                Some(p) => x = p,
                None => break,
            }
        }
        if let Some(cycle) = pred_cycle(&pred, x) {
            if weight_of(&cycle, w) > W::zero() {
                return Some(cycle);
            }
        }
    }
    None
}

fn pred_cycle(pred: &[Option<usize>], start: usize) -> Option<Vec<usize>> {
    let mut seen = vec![false; pred.len()];
    let mut x = start;
    while !seen[x] {
        seen[x] = true;
        x = pred[x]?;
    }
    let mut cycle = vec![x];
    let mut y = pred[x]?;
    while y != x {
        cycle.push(y);
        y = pred[y]?;
    }
    cycle.reverse();
    Some(cycle)
}

/// Max-plus Floyd–Warshall, valid once no positive cycle exists.
fn heaviest_cycles<W: Weight>(successors: &[Vec<usize>], w: &[W], limit: &W) -> Vec<Vec<usize>> {
    let n = successors.len();
    let mut d: Vec<Vec<Option<W>>> = vec![vec![None; n]; n];
    let mut next = vec![vec![usize::MAX; n]; n];
    for (u, succ) in successors.iter().enumerate() {
        for &v in succ {
            d[u][v] = Some(w[v].clone());
            next[u][v] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = d[i][k].clone() else { continue };
            for j in 0..n {
                let Some(dkj) = &d[k][j] else { continue };
                let cand = dik.clone() + dkj.clone();
                if d[i][j].as_ref().is_none_or(|cur| cand > *cur) {
                    d[i][j] = Some(cand);
                    next[i][j] = next[i][k];
                }
            }
        }
    }
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut ranked: Vec<(W, Vec<usize>)> = Vec::new();
    for i in 0..n {
        match &d[i][i] {
            Some(total) if total > limit => {}
            _ => continue,
        }
        let mut walk = vec![i];
        let mut x = next[i][i];
        while x != i && walk.len() <= n {
            walk.push(x);
            x = next[x][i];
        }
        if x != i {
            continue;
        }
        for cycle in simple_cycles(&walk) {
            let total = weight_of(&cycle, w);
            if total > *limit {
                let cycle = canonical_rotation(cycle);
                if found.insert(cycle.clone()) {
                    ranked.push((total, cycle));
                }
            }
        }
    }
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    ranked.into_iter().take(MAX_CYCLES).map(|(_, c)| c).collect()
}

/// Splits a closed walk into simple cycles.
fn simple_cycles(walk: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for &v in walk.iter().chain(std::iter::once(&walk[0])) {
        if let Some(pos) = stack.iter().position(|&x| x == v) {
            out.push(stack.split_off(pos));
        }
        stack.push(v);
    }
    out
}

fn canonical_rotation(mut cycle: Vec<usize>) -> Vec<usize> {
    let start = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap_or(0);
    cycle.rotate_left(start);
    cycle
}
