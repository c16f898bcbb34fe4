//! Slow, independent reference implementations for tests. Nothing here is
//! shared with the fast paths.

use std::collections::{BinaryHeap, HashSet, VecDeque};

use crate::mesh::{Triangulation, VertexId};
use crate::order::{OrderField, ScalarField};
use crate::persistence::{PersistencePair, Polarity};
use crate::{Error, Result};

fn root(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        x = parent[x];
    }
    x
}

/// Classical union-find sweep over decreasing order (increasing for minima).
/// Includes the global pair.
pub fn oracle_pairs_sweep(mesh: &Triangulation, f: &ScalarField, order: &OrderField, polarity: Polarity) -> Vec<PersistencePair> {
    let n = order.len();
    let sweep: Vec<VertexId> = match polarity {
        Polarity::MaxSaddle => order.sorted().iter().rev().copied().collect(),
        Polarity::MinSaddle => order.sorted().to_vec(),
    };
    let mut position = vec![0; n];
    for (i, &v) in sweep.iter().enumerate() {
        position[v] = i;
    }
    // component root -> the extremum it was born at (earliest in the sweep)
    let mut parent: Vec<usize> = (0..n).collect();
    let born: Vec<usize> = (0..n).collect();
    let mut pairs = Vec::new();
    let pair = |e: VertexId, s: Option<VertexId>, other: VertexId| {
        let birth = f.get(e);
        let death = f.get(s.unwrap_or(other));
        PersistencePair { extremum_vertex: e, saddle_vertex: s, birth, death, persistence: (birth - death).abs(), polarity }
    };
    for (i, &v) in sweep.iter().enumerate() {
        let mut roots: Vec<usize> = mesh
            .neighbors(v)
            .into_iter()
            .filter(|&u| position[u] < i)
            .map(|u| root(&mut parent, u))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        if roots.is_empty() {
            continue;
        }
        // the elder (earliest born) survives
        roots.sort_by_key(|&r| position[born[r]]);
        let elder = roots[0];
        for &r in &roots[1..] {
            pairs.push(pair(born[r], Some(v), v));
            parent[r] = elder;
        }
        parent[v] = elder;
    }
    if n > 0 {
        let last = *sweep.last().unwrap();
        let e = born[root(&mut parent, sweep[0])];
        pairs.push(pair(e, None, last));
    }
    pairs
}

/// Connected components of `{v : value(v) > w}`.
pub fn count_superlevel_components(mesh: &Triangulation, values: &[f64], w: f64) -> usize {
    let mut seen = vec![false; values.len()];
    let mut count = 0;
    for start in 0..values.len() {
        if seen[start] || values[start] <= w {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for u in mesh.neighbors(v) {
                if !seen[u] && values[u] > w {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    count
}

/// Direct single-maximum flattening: grow the superlevel component of `m` until
/// the first vertex with an unvisited higher neighbor, alternate local max and
/// min sweeps until the saddle is the only maximum and every minimum drains
/// outside, then sort everything by integration key.
pub fn reference_remove_single_maximum(mesh: &Triangulation, order: &OrderField, m: VertexId) -> Result<OrderField> {
    let n = order.len();
    if m >= n {
        return Err(Error::VertexOutOfRange { vertex: m, n });
    }
    let r = |v: VertexId| order.rank(v);
    if mesh.neighbors(m).iter().any(|&u| r(u) > r(m)) {
        return Err(Error::NotAnExtremum(m));
    }
    if r(m) as usize == n - 1 {
        return Err(Error::GlobalExtremum(m));
    }

    // step 1: superlevel propagation
    let mut region: HashSet<VertexId> = HashSet::new();
    let mut heap = BinaryHeap::from([(r(m), m)]);
    let saddle = loop {
        let Some((_, v)) = heap.pop() else {
            return Err(Error::UnboundedRegion(m));
        };
        if region.contains(&v) {
            continue;
        }
        if mesh.neighbors(v).iter().any(|&u| r(u) > r(v) && !region.contains(&u)) {
            break v;
        }
        region.insert(v);
        for u in mesh.neighbors(v) {
            if !region.contains(&u) {
                heap.push((r(u), u));
            }
        }
    };
    let mut members: Vec<VertexId> = region.iter().copied().collect();
    members.push(saddle);
    members.sort_unstable();
    let inside: HashSet<VertexId> = members.iter().copied().collect();
    let exits: HashSet<VertexId> = members
        .iter()
        .copied()
        .filter(|&v| v != saddle && mesh.neighbors(v).iter().any(|&u| !inside.contains(&u) && r(u) < r(saddle)))
        .collect();
    let nbrs = |v: VertexId| -> Vec<VertexId> { mesh.neighbors(v).into_iter().filter(|u| inside.contains(u)).collect() };

    // step 2: local order, as a map vertex -> local rank
    let mut local: std::collections::HashMap<VertexId, i64> = {
        let mut by = members.clone();
        by.sort_by_key(|&v| r(v));
        by.iter().enumerate().map(|(i, &v)| (v, i as i64)).collect()
    };
    let minima = |l: &std::collections::HashMap<VertexId, i64>| -> Vec<VertexId> {
        members.iter().copied().filter(|&v| v != saddle && nbrs(v).iter().all(|u| l[u] > l[&v])).collect()
    };
    let maxima = |l: &std::collections::HashMap<VertexId, i64>| -> Vec<VertexId> {
        members.iter().copied().filter(|&v| v != saddle && nbrs(v).iter().all(|u| l[u] < l[&v])).collect()
    };
    let k = members.len() as i64;
    let mut authorized: Vec<VertexId> = {
        let mut by = members.clone();
        by.sort_by_key(|&v| r(v));
        by.into_iter().find(|v| exits.contains(v)).into_iter().collect()
    };
    let mut rounds = 0;
    loop {
        // maximum pass: priorities with the saddle at +inf, authorized at -inf
        let prio = |v: VertexId, l: &std::collections::HashMap<VertexId, i64>| -> i64 {
            if v == saddle {
                i64::MAX
            } else if authorized.contains(&v) {
                i64::MIN + l[&v]
            } else {
                l[&v]
            }
        };
        let mut next = std::collections::HashMap::new();
        let mut heap = BinaryHeap::from([(prio(saddle, &local), saddle)]);
        let mut queued: HashSet<VertexId> = HashSet::from([saddle]);
        let mut idx = k;
        while let Some((_, v)) = heap.pop() {
            idx -= 1;
            next.insert(v, idx);
            for u in nbrs(v) {
                if queued.insert(u) {
                    heap.push((prio(u, &local), u));
                }
            }
        }
        local = next;
        let mins = minima(&local);
        if mins.iter().all(|v| exits.contains(v)) {
            break;
        }
        authorized = mins.into_iter().filter(|v| exits.contains(v)).collect();
        if authorized.is_empty() {
            authorized.extend(exits.iter().copied().min_by_key(|v| local[v]));
        }

        // minimum pass: sublevel sweep from the authorized minima
        let prio = |v: VertexId, l: &std::collections::HashMap<VertexId, i64>| -> i64 {
            if v == saddle {
                i64::MIN
            } else if authorized.contains(&v) {
                i64::MAX / 2 - l[&v]
            } else {
                -l[&v]
            }
        };
        let mut next = std::collections::HashMap::new();
        let mut heap: BinaryHeap<(i64, VertexId)> = authorized.iter().map(|&v| (prio(v, &local), v)).collect();
        let mut queued: HashSet<VertexId> = authorized.iter().copied().collect();
        let mut idx = 0;
        while let Some((_, v)) = heap.pop() {
            next.insert(v, idx);
            idx += 1;
            for u in nbrs(v) {
                if queued.insert(u) {
                    heap.push((prio(u, &local), u));
                }
            }
        }
        local = next;
        if maxima(&local).is_empty() {
            break;
        }
        authorized = minima(&local).into_iter().filter(|v| exits.contains(v)).collect();
        if authorized.is_empty() {
            authorized.extend(exits.iter().copied().min_by_key(|v| local[v]));
        }
        rounds += 1;
        if rounds == 100 {
            return Err(Error::IterationCapExceeded { saddle, cap: 100 });
        }
    }

    // step 3: global sort by (rank of saddle or own rank, local rank)
    let rs = r(saddle);
    let mut all: Vec<VertexId> = (0..n).collect();
    all.sort_by_key(|&v| {
        if v == saddle {
            (rs, i64::MAX)
        } else if inside.contains(&v) {
            (rs, local[&v])
        } else {
            (r(v), -1)
        }
    });
    OrderField::from_sorted(all)
}
