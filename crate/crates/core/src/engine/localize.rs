//! Per-region iterative simplification of the local order.

use std::cmp::Reverse;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BinaryHeap, HashSet};
use std::hash::{Hash, Hasher};

use crate::mesh::{Triangulation, VertexId};
use crate::order::Rank;
use crate::{Error, Result};

use super::Region;

/// Local ranks of a region's vertices; the saddle holds the top rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalOrder {
    /// Sorted, same as `Region::vertices`.
    pub vertices: Vec<VertexId>,
    pub ranks: Vec<u32>,
}

impl LocalOrder {
    pub fn get(&self, v: VertexId) -> Option<u32> {
        self.vertices.binary_search(&v).ok().map(|i| self.ranks[i])
    }

    /// Region vertices by increasing local rank.
    pub fn sorted(&self) -> Vec<VertexId> {
        let mut out = vec![0; self.vertices.len()];
        for (i, &r) in self.ranks.iter().enumerate() {
            out[r as usize] = self.vertices[i];
        }
        out
    }
}

/// Region graph in local indices.
struct Local {
    adj: Vec<u32>,
    offsets: Vec<usize>,
    /// Has a neighbor outside the region ranked below the saddle.
    exit: Vec<bool>,
    pinned: Vec<bool>,
    s: usize,
}

impl Local {
    fn build(mesh: &Triangulation, rank: &[Rank], region: &Region, pinned: &dyn Fn(VertexId) -> bool) -> Self {
        let verts = &region.vertices;
        let rs = rank[region.saddle];
        let mut adj = Vec::with_capacity(verts.len() * 6);
        let mut offsets = Vec::with_capacity(verts.len() + 1);
        let mut exit = vec![false; verts.len()];
        offsets.push(0);
        for (i, &v) in verts.iter().enumerate() {
            mesh.for_each_neighbor(v, |u| match verts.binary_search(&u) {
                Ok(j) => adj.push(j as u32),
                Err(_) => exit[i] |= rank[u] < rs,
            });
            offsets.push(adj.len());
        }
        let s = verts.binary_search(&region.saddle).expect("saddle belongs to its region");
        exit[s] = false;
        let pinned = verts.iter().enumerate().map(|(i, &v)| i != s && pinned(v)).collect();
        Self { adj, offsets, exit, pinned, s }
    }

    fn len(&self) -> usize {
        self.exit.len()
    }

    fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[self.offsets[i]..self.offsets[i + 1]]
    }

    fn is_min(&self, l: &[u32], i: usize) -> bool {
        i != self.s && self.neighbors(i).iter().all(|&j| l[j as usize] > l[i])
    }

    fn is_max(&self, l: &[u32], i: usize) -> bool {
        i != self.s && self.neighbors(i).iter().all(|&j| l[j as usize] < l[i])
    }

    /// Superlevel sweep from the saddle. Authorized minima and pinned vertices
    /// are held back to the very end.
    fn max_pass(&self, l: &[u32], authorized: &[bool]) -> Vec<u32> {
        let k = self.len();
        let class = |i: usize| -> i8 {
            if i == self.s {
                2
            } else if self.pinned[i] {
                -1
            } else if authorized[i] {
                0
            } else {
                1
            }
        };
        let mut out = vec![u32::MAX; k];
        let mut queued = vec![false; k];
        let mut heap = BinaryHeap::new();
        heap.push((class(self.s), l[self.s], self.s as u32));
        queued[self.s] = true;
        let mut next = k as u32;
        while let Some((_, _, i)) = heap.pop() {
            next -= 1;
            out[i as usize] = next;
            for &j in self.neighbors(i as usize) {
                if !queued[j as usize] {
                    queued[j as usize] = true;
                    heap.push((class(j as usize), l[j as usize], j));
                }
            }
        }
        debug_assert_eq!(next, 0, "region is connected");
        out
    }

    /// Sublevel sweep from the authorized minima (pinned ones first). The
    /// saddle comes last.
    fn min_pass(&self, l: &[u32], authorized: &[bool]) -> Vec<u32> {
        let k = self.len();
        let class = |i: usize| -> i8 {
            if i == self.s {
                1
            } else if self.pinned[i] {
                -2
            } else if authorized[i] {
                -1
            } else {
                0
            }
        };
        let mut out = vec![u32::MAX; k];
        let mut queued = vec![false; k];
        let mut heap = BinaryHeap::new();
        for i in 0..k {
            if class(i) < 0 {
                queued[i] = true;
                heap.push(Reverse((class(i), l[i], i as u32)));
            }
        }
        if heap.is_empty() {
            queued[self.s] = true;
            heap.push(Reverse((class(self.s), l[self.s], self.s as u32)));
        }
        let mut next = 0u32;
        while let Some(Reverse((_, _, i))) = heap.pop() {
            out[i as usize] = next;
            next += 1;
            for &j in self.neighbors(i as usize) {
                if !queued[j as usize] {
                    queued[j as usize] = true;
                    heap.push(Reverse((class(j as usize), l[j as usize], j)));
                }
            }
        }
        debug_assert_eq!(next as usize, k, "region is connected");
        out
    }

    /// Saddle is the only maximum and every unpinned minimum is an exit.
    fn valid(&self, l: &[u32]) -> bool {
        (0..self.len()).all(|i| !self.is_max(l, i) && (!self.is_min(l, i) || self.exit[i] || self.pinned[i]))
    }

    /// Bipolar order from an st-numbering: the saddle on top, a virtual sink
    /// below every anchor and every neighbor of a pinned vertex, pinned
    /// vertices at the very bottom. `None` if some vertex is cut off.
    fn st_order(&self, l: &[u32], anchors: &[usize]) -> Option<Vec<u32>> {
        let k = self.len();
        let t = k;
        let mut sink = vec![false; k];
        for &a in anchors {
            sink[a] = true;
        }
        for i in (0..k).filter(|&i| self.pinned[i]) {
            for &j in self.neighbors(i) {
                sink[j as usize] = true;
            }
        }
        sink[self.s] = true;
        let free = |i: usize| i == t || !self.pinned[i];
        let nbrs = |i: usize| -> Vec<usize> {
            if i == t {
                // the saddle first so the first tree edge is (s, t)
                std::iter::once(self.s).chain((0..k).filter(|&j| j != self.s && sink[j] && !self.pinned[j])).collect()
            } else {
                let mut v: Vec<usize> = self.neighbors(i).iter().map(|&j| j as usize).filter(|&j| free(j)).collect();
                if sink[i] {
                    if i == self.s {
                        v.insert(0, t);
                    } else {
                        v.push(t);
                    }
                }
                v
            }
        };

        // iterative dfs from s recording preorder, parent and low vertex
        const NONE: usize = usize::MAX;
        let mut pre = vec![NONE; k + 1];
        let mut parent = vec![NONE; k + 1];
        let mut low = vec![NONE; k + 1];
        let mut order = Vec::with_capacity(k + 1);
        let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        pre[self.s] = 0;
        low[self.s] = self.s;
        order.push(self.s);
        stack.push((self.s, nbrs(self.s), 0));
        while let Some((v, adj, pos)) = stack.last_mut() {
            let v = *v;
            if *pos < adj.len() {
                let w = adj[*pos];
                *pos += 1;
                if pre[w] == NONE {
                    pre[w] = order.len();
                    parent[w] = v;
                    low[w] = w;
                    order.push(w);
                    let a = nbrs(w);
                    stack.push((w, a, 0));
                } else if w != parent[v] && pre[w] < pre[low[v]] {
                    low[v] = w;
                }
            } else {
                stack.pop();
                let p = parent[v];
                if p != NONE && pre[low[v]] < pre[low[p]] {
                    low[p] = low[v];
                }
            }
        }
        let reachable = (0..k).filter(|&i| !self.pinned[i]).all(|i| pre[i] != NONE);
        if !reachable || pre[t] != 1 {
            return None;
        }

        // streamlined numbering on a doubly linked list
        let mut next = vec![NONE; k + 1];
        let mut prev = vec![NONE; k + 1];
        next[self.s] = t;
        prev[t] = self.s;
        let mut plus = vec![false; k + 1];
        for &v in &order[2..] {
            let p = parent[v];
            if !plus[low[v]] {
                let before = prev[p];
                if before != NONE {
                    next[before] = v;
                }
                prev[v] = before;
                next[v] = p;
                prev[p] = v;
                plus[p] = true;
            } else {
                let after = next[p];
                if after != NONE {
                    prev[after] = v;
                }
                next[v] = after;
                prev[v] = p;
                next[p] = v;
                plus[p] = false;
            }
        }

        // pinned first by current rank, then the list from t up to s
        let mut out = vec![u32::MAX; k];
        let mut r = 0u32;
        let mut pinned: Vec<usize> = (0..k).filter(|&i| self.pinned[i]).collect();
        pinned.sort_unstable_by_key(|&i| l[i]);
        for i in pinned {
            out[i] = r;
            r += 1;
        }
        let mut head = t;
        while prev[head] != NONE {
            head = prev[head];
        }
        let mut list = Vec::with_capacity(k + 1);
        while head != NONE {
            list.push(head);
            head = next[head];
        }
        for &v in list.iter().rev().filter(|&&v| v != t) {
            out[v] = r;
            r += 1;
        }
        (r as usize == k).then_some(out)
    }

    /// Local minima that qualify as exits.
    fn authorized(&self, l: &[u32]) -> Vec<bool> {
        (0..self.len()).map(|i| self.exit[i] && self.is_min(l, i)).collect()
    }
}

fn hash(l: &[u32]) -> u64 {
    let mut h = DefaultHasher::new();
    l.hash(&mut h);
    h.finish()
}

/// Returns the local order and the number of passes.
pub(crate) fn localize(
    mesh: &Triangulation,
    rank: &[Rank],
    region: &Region,
    pinned: &dyn Fn(VertexId) -> bool,
    cap: usize,
) -> Result<(LocalOrder, usize)> {
    let local = Local::build(mesh, rank, region, pinned);
    let k = local.len();
    let verts = &region.vertices;

    // initial local order from the global one
    let mut by_rank: Vec<usize> = (0..k).collect();
    by_rank.sort_unstable_by_key(|&i| rank[verts[i]]);
    let mut l = vec![0u32; k];
    for (r, &i) in by_rank.iter().enumerate() {
        l[i] = r as u32;
    }

    // vertices allowed to drain the region: its exits or, without any, the
    // lowest vertex touching the outside
    let mut anchors: Vec<usize> = (0..k).filter(|&i| local.exit[i]).collect();
    if anchors.is_empty() {
        anchors.extend(by_rank.iter().copied().find(|&i| i != local.s && local.neighbors(i).len() < mesh.neighbors(verts[i]).len()));
    }
    // with no anchor among the local minima, the lowest one is authorized
    let authorize = |l: &[u32]| {
        let mut a = local.authorized(l);
        if !a.contains(&true) {
            if let Some(&i) = anchors.iter().min_by_key(|&&i| l[i]) {
                a[i] = true;
            }
        }
        a
    };
    // start from the lowest anchor alone
    let mut authorized = vec![false; k];
    if let Some(&i) = anchors.iter().min_by_key(|&&i| l[i]) {
        authorized[i] = true;
    }

    let mut passes = 0;
    let fail = || Error::IterationCapExceeded { saddle: region.saddle, cap };
    let mut seen = HashSet::new();
    let mut tried_st = false;
    loop {
        passes += 1;
        if passes > cap {
            return Err(fail());
        }
        l = local.max_pass(&l, &authorized);
        let stray = (0..k).any(|i| local.is_min(&l, i) && !local.exit[i] && !local.pinned[i]);
        if !stray {
            break;
        }
        // the alternation can cycle near the mesh boundary
        if !seen.insert(hash(&l)) && !tried_st {
            tried_st = true;
            if let Some(st) = local.st_order(&l, &anchors).filter(|st| local.valid(st)) {
                l = st;
                break;
            }
        }
        authorized = authorize(&l);

        passes += 1;
        if passes > cap {
            return Err(fail());
        }
        l = local.min_pass(&l, &authorized);
        if !(0..k).any(|i| local.is_max(&l, i)) {
            break;
        }
        authorized = authorize(&l);
    }
    Ok((LocalOrder { vertices: verts.clone(), ranks: l }, passes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criticality::extrema;
    use crate::io::{synth_field, SynthKind, SynthSpec};
    use crate::order::compute_order_field;

    fn connected_without(local: &Local, cut: usize, sinks: &[bool]) -> bool {
        // region plus the sink node k, minus `cut`
        let k = local.len();
        let nbrs = |i: usize| -> Vec<usize> {
            if i == k {
                (0..k).filter(|&j| sinks[j]).collect()
            } else {
                let mut v: Vec<usize> = local.neighbors(i).iter().map(|&j| j as usize).collect();
                if sinks[i] {
                    v.push(k);
                }
                v
            }
        };
        let start = if cut == 0 { 1 } else { 0 };
        let mut seen = vec![false; k + 1];
        seen[cut] = true;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in nbrs(i) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|&b| b)
    }

    #[test]
    fn st_order_is_bipolar_on_biconnected_regions() {
        let mut checked = 0;
        for seed in 0..40 {
            let g = synth_field(&SynthSpec { dims: vec![10, 10], kind: SynthKind::UniformRandom { seed } }).unwrap();
            let mesh = g.mesh();
            let order = compute_order_field(&g.field);
            let (_, maxima) = extrema(&mesh, &order);
            let top = order.vertex_at(99);
            let seeds: Vec<_> = maxima.into_iter().filter(|&m| m != top).collect();
            let regions = super::super::discover_regions(&mesh, &order, &seeds).unwrap();
            for r in &regions {
                let local = Local::build(&mesh, order.ranks(), r, &|_| false);
                let k = local.len();
                let anchors: Vec<usize> = (0..k).filter(|&i| local.exit[i]).collect();
                let mut sinks = local.exit.clone();
                sinks[local.s] = true;
                let l: Vec<u32> = (0..k as u32).collect();
                let biconnected = (0..=k).all(|c| connected_without(&local, c, &sinks));
                let st = local.st_order(&l, &anchors);
                if biconnected {
                    let st = st.expect("numbering exists");
                    let mut sorted = st.clone();
                    sorted.sort_unstable();
                    assert_eq!(sorted, (0..k as u32).collect::<Vec<_>>());
                    assert_eq!(st[local.s] as usize, k - 1);
                    assert!(local.valid(&st), "seed {seed} saddle {}", r.saddle);
                    checked += 1;
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn st_order_keeps_pinned_at_bottom() {
        // 5x5 grid, saddle in a corner, everything else in the region
        let mesh = Triangulation::grid(&[5, 5]).unwrap();
        let rank: Vec<Rank> = (0..25).map(|v| if v == 0 { 24 } else { v as Rank - 1 }).collect();
        let region = Region { id: 0, saddle: 0, vertices: (0..25).collect(), seeds: vec![24], top: 24 };
        let local = Local::build(&mesh, &rank, &region, &|v| v == 12);
        let l: Vec<u32> = (0..25).collect();
        // no exits: the far corner drains the region
        let st = local.st_order(&l, &[24]).unwrap();
        assert_eq!(st[12], 0);
        assert!(local.valid(&st) || local.is_min(&st, 24));
        assert!((0..25).all(|i| i == 24 || i == 12 || !local.is_min(&st, i)));
        assert!((0..25).all(|i| !local.is_max(&st, i)));
    }
}
