//! Concurrent superlevel-set propagations with saddle merging.
//!
//! Every seed maximum grows a region by repeatedly extracting the highest
//! vertex on its boundary. A propagation may absorb `v` only once all higher
//! neighbors of `v` belong to it. Otherwise it parks at `v` and subtracts the
//! higher neighbors it does own from a per-vertex counter. Whichever
//! propagation brings that counter to zero merges every parked propagation
//! (heaps in O(1), ids through a union-find) and carries on. Propagations that
//! stay parked forever end at `v`, their terminal saddle.
//!
//! Which task wins a merge depends on the schedule, but every counter receives
//! the same decrements in any schedule, so the set of merges and halts, and
//! hence the result, does not.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering::*};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::collections::MergeableHeap;
use crate::mesh::{Triangulation, VertexId};
use crate::order::Rank;

const SHARDS: usize = 64;

/// Early termination for persistence-limited propagations.
pub(crate) struct Stop<'a> {
    /// Values oriented like the ranks (negated for minima).
    pub values: &'a [f64],
    pub epsilon: f64,
}

pub(crate) struct Group {
    id: u32,
    heap: MergeableHeap<Rank, VertexId>,
    pub vertices: Vec<VertexId>,
    pub seeds: Vec<VertexId>,
    /// Highest seed by rank.
    pub top: VertexId,
}

#[derive(Default)]
struct SaddleEntry {
    remaining: u32,
    parked: Vec<Group>,
}

pub(crate) enum End {
    /// Parked forever at a saddle.
    Halted { saddle: VertexId, group: Group },
    /// Exceeded the persistence threshold at `at` (not absorbed).
    Terminated { group: Group },
    /// Ran out of boundary.
    Exhausted { group: Group },
}

pub(crate) struct Merge {
    pub saddle: VertexId,
    pub tops: Vec<VertexId>,
}

pub(crate) struct Outcome {
    pub ends: Vec<End>,
    pub merges: Vec<Merge>,
}

struct Shared<'a> {
    mesh: &'a Triangulation,
    rank: &'a [Rank],
    stop: Option<Stop<'a>>,
    owner: Vec<AtomicU32>,
    parent: Vec<AtomicU32>,
    shards: Vec<Mutex<HashMap<VertexId, SaddleEntry>>>,
    ends: Mutex<Vec<End>>,
    merges: Mutex<Vec<Merge>>,
}

impl Shared<'_> {
    fn find(&self, mut x: u32) -> u32 {
        loop {
            let p = self.parent[x as usize].load(Acquire);
            if p == x {
                return x;
            }
            let gp = self.parent[p as usize].load(Acquire);
            // halving; any ancestor is a valid parent
            self.parent[x as usize].store(gp, Release);
            x = p;
        }
    }

    fn owned_by(&self, v: VertexId, id: u32) -> bool {
        let o = self.owner[v].load(Acquire);
        o != 0 && self.find(o - 1) == id
    }

    fn visit(&self, g: &mut Group, v: VertexId) {
        self.owner[v].store(g.id + 1, Release);
        g.vertices.push(v);
        let rv = self.rank[v];
        self.mesh.for_each_neighbor(v, |u| {
            if self.rank[u] < rv && self.owner[u].load(Acquire) == 0 {
                g.heap.insert(self.rank[u], u);
            }
        });
    }

    fn run(&self, mut g: Group) {
        loop {
            let Some((_, v)) = g.heap.pop() else {
                self.ends.lock().unwrap().push(End::Exhausted { group: g });
                return;
            };
            if self.owner[v].load(Acquire) != 0 {
                // duplicate entry left over from a heap merge
                continue;
            }
            if let Some(stop) = &self.stop {
                if stop.values[g.top] - stop.values[v] >= stop.epsilon {
                    self.ends.lock().unwrap().push(End::Terminated { group: g });
                    return;
                }
            }
            let rv = self.rank[v];
            let (mut higher, mut mine) = (0u32, 0u32);
            self.mesh.for_each_neighbor(v, |u| {
                if self.rank[u] > rv {
                    higher += 1;
                    mine += self.owned_by(u, g.id) as u32;
                }
            });
            if mine < higher {
                let parked = {
                    let mut shard = self.shards[v % SHARDS].lock().unwrap();
                    let entry = shard.entry(v).or_insert_with(|| SaddleEntry { remaining: higher, parked: Vec::new() });
                    entry.remaining -= mine;
                    if entry.remaining > 0 {
                        entry.parked.push(g);
                        return;
                    }
                    shard.remove(&v).expect("entry present").parked
                };
                let mut tops = Vec::with_capacity(parked.len() + 1);
                tops.push(g.top);
                for mut p in parked {
                    tops.push(p.top);
                    self.parent[p.id as usize].store(g.id, Release);
                    g.heap.merge(std::mem::take(&mut p.heap));
                    if p.vertices.len() > g.vertices.len() {
                        std::mem::swap(&mut p.vertices, &mut g.vertices);
                    }
                    g.vertices.append(&mut p.vertices);
                    g.seeds.append(&mut p.seeds);
                    if self.rank[p.top] > self.rank[g.top] {
                        g.top = p.top;
                    }
                }
                self.merges.lock().unwrap().push(Merge { saddle: v, tops });
            }
            self.visit(&mut g, v);
        }
    }
}

/// Runs one propagation per seed (seeds must be maxima of `rank`) on the
/// current rayon pool.
pub(crate) fn propagate(mesh: &Triangulation, rank: &[Rank], seeds: &[VertexId], stop: Option<Stop<'_>>) -> Outcome {
    let n = mesh.vertex_count();
    let shared = Shared {
        mesh,
        rank,
        stop,
        owner: (0..n).map(|_| AtomicU32::new(0)).collect(),
        parent: (0..seeds.len() as u32).map(AtomicU32::new).collect(),
        shards: (0..SHARDS).map(|_| Mutex::new(HashMap::new())).collect(),
        ends: Mutex::new(Vec::new()),
        merges: Mutex::new(Vec::new()),
    };
    seeds.par_iter().enumerate().for_each(|(i, &m)| {
        let mut heap = MergeableHeap::new();
        heap.insert(rank[m], m);
        shared.run(Group { id: i as u32, heap, vertices: Vec::new(), seeds: vec![m], top: m });
    });
    let Shared { shards, ends, merges, .. } = shared;
    let mut ends = ends.into_inner().unwrap();
    for shard in shards {
        for (saddle, entry) in shard.into_inner().unwrap() {
            ends.extend(entry.parked.into_iter().map(|group| End::Halted { saddle, group }));
        }
    }
    let mut merges = merges.into_inner().unwrap();
    merges.sort_by_key(|m| m.saddle);
    Outcome { ends, merges }
}
