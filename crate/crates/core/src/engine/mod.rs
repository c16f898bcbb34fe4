//! Removal of selected extrema from an order field.
//!
//! A maxima pass discovers one region per chain of discarded hills, reorders
//! every region locally so its saddle is its only maximum and every local
//! minimum can drain outside, then splices the regions in right below their
//! saddles. Minima are handled by the same code on the reversed order.

mod integrate;
mod localize;
pub(crate) mod propagation;

use std::collections::BTreeSet;
use crate::clock::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criticality::{extrema, is_maximum, is_minimum};
use crate::mesh::{Triangulation, VertexId};
use crate::order::{compute_order_field, realize_numeric_step, OrderField, Rank, ScalarField, Sweep, ZetaPolicy};
use crate::{Error, Result};

pub use integrate::{integrate_by_keys, integrate_local_orders, integration_keys, IntegrationKey};
pub use localize::LocalOrder;
use propagation::{propagate, End};

/// One chain of discarded hills together with its terminal saddle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    /// Rank of the highest seed; orders sibling regions sharing a saddle.
    pub id: Rank,
    pub saddle: VertexId,
    /// Sorted; includes the saddle.
    pub vertices: Vec<VertexId>,
    /// Sorted discarded extrema merged into this region.
    pub seeds: Vec<VertexId>,
    /// Highest seed.
    pub top: VertexId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintSet {
    pub preserve_minima: BTreeSet<VertexId>,
    pub preserve_maxima: BTreeSet<VertexId>,
}

impl ConstraintSet {
    pub fn new(minima: impl IntoIterator<Item = VertexId>, maxima: impl IntoIterator<Item = VertexId>) -> Self {
        Self { preserve_minima: minima.into_iter().collect(), preserve_maxima: maxima.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SimplifyOptions {
    pub zeta: ZetaPolicy,
    pub restore_interior_extrema: bool,
    /// Cap on passes per region and on whole-field rounds.
    pub max_iterations: usize,
    /// `None` uses the global rayon pool.
    pub thread_count: Option<usize>,
}

impl Default for SimplifyOptions {
    fn default() -> Self {
        Self { zeta: ZetaPolicy::default(), restore_interior_extrema: true, max_iterations: 100, thread_count: None }
    }
}

impl SimplifyOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidOption("maxIterations must be at least 1".into()));
        }
        if self.thread_count == Some(0) {
            return Err(Error::InvalidOption("threadCount must be at least 1".into()));
        }
        Ok(())
    }

    /// Runs `op` on a pool with the requested number of threads.
    pub fn install<T: Send>(&self, op: impl FnOnce() -> T + Send) -> Result<T> {
        match self.thread_count {
            None => Ok(op()),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::InvalidOption(e.to_string()))?;
                Ok(pool.install(op))
            }
        }
    }
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseTimings {
    pub order: f64,
    pub discover: f64,
    pub localize: f64,
    pub integrate: f64,
    pub restore: f64,
    pub verify: f64,
    pub realize: f64,
    pub total: f64,
}

impl PhaseTimings {
    /// Discovery, localization and integration: the parallel engine core.
    pub fn engine(&self) -> f64 {
        self.discover + self.localize + self.integrate
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimplifyReport {
    pub region_count: usize,
    pub largest_region_size: usize,
    /// Passes needed by each region, in discovery order.
    pub iterations: Vec<usize>,
    pub max_iteration_count: usize,
    pub mean_iteration_count: f64,
    /// Whole-field rounds (more than one only when a round leaves strays).
    pub rounds: usize,
    pub restored: usize,
    /// Largest `f(top) - f(saddle)` over regions, in field units.
    pub max_region_height: f64,
    pub max_infinity_deviation: f64,
    pub timings: PhaseTimings,
}

impl SimplifyReport {
    fn add_regions(&mut self, regions: &[Region], passes: &[usize]) {
        self.region_count += regions.len();
        self.largest_region_size =
            regions.iter().map(|r| r.vertices.len()).chain([self.largest_region_size]).max().unwrap_or(0);
        self.iterations.extend_from_slice(passes);
        self.max_iteration_count = self.iterations.iter().copied().max().unwrap_or(0);
        self.mean_iteration_count = if self.iterations.is_empty() {
            0.0
        } else {
            self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
        };
    }
}

impl SimplifyReport {
    /// Folds a later simplification of the same field into this report.
    pub(crate) fn absorb(&mut self, other: SimplifyReport) {
        self.region_count += other.region_count;
        self.largest_region_size = self.largest_region_size.max(other.largest_region_size);
        self.iterations.extend(other.iterations);
        self.max_iteration_count = self.iterations.iter().copied().max().unwrap_or(0);
        self.mean_iteration_count = if self.iterations.is_empty() {
            0.0
        } else {
            self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
        };
        self.rounds += other.rounds;
        self.restored += other.restored;
        self.max_region_height = self.max_region_height.max(other.max_region_height);
        let (a, b) = (&mut self.timings, other.timings);
        a.order += b.order;
        a.discover += b.discover;
        a.localize += b.localize;
        a.integrate += b.integrate;
        a.restore += b.restore;
        a.verify += b.verify;
        a.realize += b.realize;
        a.total += b.total;
    }
}

/// One reordering step, in the order it must be realized numerically.
#[derive(Debug, Clone)]
pub struct Stage {
    pub sweep: Sweep,
    pub order: OrderField,
    /// Regions flattened by this stage (empty for restoration stages).
    pub regions: Vec<Region>,
}

/// Full outcome of the order-level pipeline.
#[derive(Debug, Clone)]
pub struct Removal {
    pub order: OrderField,
    pub stages: Vec<Stage>,
    pub report: SimplifyReport,
}

impl Removal {
    pub fn regions(&self) -> impl Iterator<Item = &Region> {
        self.stages.iter().flat_map(|s| &s.regions)
    }

    /// Sorted union of all region vertices.
    pub fn touched(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self.regions().flat_map(|r| r.vertices.iter().copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn check_discards(rank: &[Rank], mesh: &Triangulation, discard: &[VertexId], maxima: bool) -> Result<()> {
    let n = mesh.vertex_count();
    for &m in discard {
        mesh.check_vertex(m)?;
        let ok = if maxima { is_maximum(mesh, rank, m) } else { is_minimum(mesh, rank, m) };
        if !ok {
            return Err(Error::NotAnExtremum(m));
        }
        let global = if maxima { rank[m] as usize == n - 1 } else { rank[m] == 0 };
        if global {
            return Err(Error::GlobalExtremum(m));
        }
    }
    Ok(())
}

fn sorted_unique(v: &[VertexId]) -> Vec<VertexId> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// One region per chain of discarded maxima, sorted by region id.
pub fn discover_regions(mesh: &Triangulation, f: &OrderField, discard_maxima: &[VertexId]) -> Result<Vec<Region>> {
    if f.len() != mesh.vertex_count() {
        return Err(Error::SizeMismatch { expected: mesh.vertex_count(), got: f.len() });
    }
    let seeds = sorted_unique(discard_maxima);
    check_discards(f.ranks(), mesh, &seeds, true)?;
    discover_unchecked(mesh, f.ranks(), &seeds)
}

fn discover_unchecked(mesh: &Triangulation, rank: &[Rank], seeds: &[VertexId]) -> Result<Vec<Region>> {
    let outcome = propagate(mesh, rank, seeds, None);
    let mut regions = Vec::with_capacity(outcome.ends.len());
    for end in outcome.ends {
        match end {
            End::Halted { saddle, group } => {
                let mut vertices = group.vertices;
                vertices.push(saddle);
                vertices.par_sort_unstable();
                let mut seeds = group.seeds;
                seeds.sort_unstable();
                regions.push(Region { id: rank[group.top], saddle, vertices, seeds, top: group.top });
            }
            End::Terminated { group } | End::Exhausted { group } => return Err(Error::UnboundedRegion(group.top)),
        }
    }
    regions.sort_unstable_by_key(|r| r.id);
    Ok(regions)
}

/// Local order of a region whose only maximum is its saddle and whose minima
/// all touch lower ground outside the region, plus the number of passes.
pub fn localize_simplify_region(mesh: &Triangulation, f: &OrderField, region: &Region) -> Result<(LocalOrder, usize)> {
    localize::localize(mesh, f.ranks(), region, &|_| false, SimplifyOptions::default().max_iterations)
}

/// Re-ranks each listed minimum just below its lowest neighbor and each listed
/// maximum just above its highest one. Vertices that already are extrema of
/// the right kind are left alone.
pub fn restore_interior_extrema(
    mesh: &Triangulation,
    g: &OrderField,
    minima: &[VertexId],
    maxima: &[VertexId],
) -> Result<OrderField> {
    let mut order = g.clone();
    let keep_min = sorted_unique(minima);
    let keep_max = sorted_unique(maxima);
    for &v in keep_min.iter().chain(&keep_max) {
        mesh.check_vertex(v)?;
    }
    for (list, lower) in [(&keep_min, true), (&keep_max, false)] {
        for &p in list {
            let rank = order.ranks();
            let done = if lower { is_minimum(mesh, rank, p) } else { is_maximum(mesh, rank, p) };
            if done {
                continue;
            }
            let rp = rank[p];
            let mut target = rp;
            let mut passed = Vec::new();
            mesh.for_each_neighbor(p, |u| {
                let ru = rank[u];
                if (lower && ru < rp) || (!lower && ru > rp) {
                    passed.push(u);
                    target = if lower { target.min(ru) } else { target.max(ru) };
                }
            });
            // a passed neighbor that is itself a kept extremum of the same kind
            // loses that status; a kept extremum of the other kind cannot be
            // passed because p sits on its wrong side already
            let same = if lower { &keep_min } else { &keep_max };
            if let Some(&w) = passed.iter().find(|w| same.binary_search(w).is_ok()) {
                return Err(Error::RestorationConflict { vertex: p, other: w });
            }
            let mut sorted = order.sorted().to_vec();
            sorted.remove(rp as usize);
            // inserting at the target's old rank lands p right below it for
            // minima and, since the removal shifted it down, right above it
            // for maxima
            sorted.insert(target as usize, p);
            order = OrderField::from_sorted(sorted)?;
        }
    }
    Ok(order)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintReport {
    pub passed: bool,
    /// Extrema of `g` that are not in the preserve sets.
    pub spurious_minima: Vec<VertexId>,
    pub spurious_maxima: Vec<VertexId>,
    /// Preserved vertices that are not extrema of `g`.
    pub missing_minima: Vec<VertexId>,
    pub missing_maxima: Vec<VertexId>,
}

pub fn verify_constraints(mesh: &Triangulation, g: &OrderField, constraints: &ConstraintSet) -> ConstraintReport {
    let (minima, maxima) = extrema(mesh, g);
    let diff = |a: &[VertexId], b: &BTreeSet<VertexId>| a.iter().copied().filter(|v| !b.contains(v)).collect();
    let missing = |b: &BTreeSet<VertexId>, a: &[VertexId]| b.iter().copied().filter(|v| a.binary_search(v).is_err()).collect();
    let mut r = ConstraintReport {
        passed: false,
        spurious_minima: diff(&minima, &constraints.preserve_minima),
        spurious_maxima: diff(&maxima, &constraints.preserve_maxima),
        missing_minima: missing(&constraints.preserve_minima, &minima),
        missing_maxima: missing(&constraints.preserve_maxima, &maxima),
    };
    r.passed = r.spurious_minima.is_empty()
        && r.spurious_maxima.is_empty()
        && r.missing_minima.is_empty()
        && r.missing_maxima.is_empty();
    r
}

struct Pass<'a> {
    mesh: &'a Triangulation,
    options: &'a SimplifyOptions,
    keep_min: Vec<VertexId>,
    keep_max: Vec<VertexId>,
    stages: Vec<Stage>,
    report: SimplifyReport,
}

impl Pass<'_> {
    /// Flattens the hills of `seeds` in `order` (already oriented so they are
    /// maxima); `pinned` stay extrema of the opposite kind.
    fn flatten(&mut self, order: &OrderField, seeds: &[VertexId], pinned: &[VertexId]) -> Result<(OrderField, Vec<Region>)> {
        let t = Instant::now();
        let regions = discover_unchecked(self.mesh, order.ranks(), seeds)?;
        self.report.timings.discover += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let cap = self.options.max_iterations;
        let rank = order.ranks();
        let is_pinned = |v: VertexId| pinned.binary_search(&v).is_ok();
        let results: Vec<(LocalOrder, usize)> = regions
            .par_iter()
            .map(|r| localize::localize(self.mesh, rank, r, &is_pinned, cap))
            .collect::<Result<_>>()?;
        self.report.timings.localize += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let (locals, passes): (Vec<LocalOrder>, Vec<usize>) = results.into_iter().unzip();
        let g = integrate_local_orders(order, &regions, &locals)?;
        self.report.timings.integrate += t.elapsed().as_secs_f64();
        self.report.add_regions(&regions, &passes);
        Ok((g, regions))
    }

    fn restore(&mut self, order: OrderField, minima: bool) -> Result<OrderField> {
        if !self.options.restore_interior_extrema {
            return Ok(order);
        }
        let t = Instant::now();
        let (list, sweep) = if minima { (&self.keep_min, Sweep::Lower) } else { (&self.keep_max, Sweep::Raise) };
        let rank = order.ranks();
        let todo: Vec<VertexId> = list
            .iter()
            .copied()
            .filter(|&v| if minima { !is_minimum(self.mesh, rank, v) } else { !is_maximum(self.mesh, rank, v) })
            .collect();
        let out = if todo.is_empty() {
            order
        } else {
            let (mn, mx): (&[VertexId], &[VertexId]) = if minima { (&self.keep_min, &[]) } else { (&[], &self.keep_max) };
            let restored = restore_interior_extrema(self.mesh, &order, mn, mx)?;
            self.report.restored += todo.len();
            self.stages.push(Stage { sweep, order: restored.clone(), regions: Vec::new() });
            restored
        };
        self.report.timings.restore += t.elapsed().as_secs_f64();
        Ok(out)
    }

    fn round(&mut self, mut order: OrderField, dmax: &[VertexId], dmin: &[VertexId]) -> Result<OrderField> {
        let restore = self.options.restore_interior_extrema;
        if !dmax.is_empty() {
            let pinned = if restore { self.keep_min.clone() } else { Vec::new() };
            let (g, regions) = self.flatten(&order, dmax, &pinned)?;
            self.stages.push(Stage { sweep: Sweep::Lower, order: g.clone(), regions });
            order = g;
        }
        order = self.restore(order, true)?;

        let rank = order.ranks();
        let dmin: Vec<VertexId> = dmin.iter().copied().filter(|&v| is_minimum(self.mesh, rank, v)).collect();
        if !dmin.is_empty() {
            let pinned = if restore { self.keep_max.clone() } else { Vec::new() };
            let (g, regions) = self.flatten(&order.reversed(), &dmin, &pinned)?;
            let g = g.reversed();
            self.stages.push(Stage { sweep: Sweep::Raise, order: g.clone(), regions });
            order = g;
        }
        self.restore(order, false)
    }
}

/// Order-level pipeline with every intermediate stage, used by
/// [`simplify_field`] and the persistence-driven variant.
pub fn remove_extrema_staged(
    mesh: &Triangulation,
    f: &OrderField,
    discard_maxima: &[VertexId],
    discard_minima: &[VertexId],
    options: &SimplifyOptions,
) -> Result<Removal> {
    options.validate()?;
    if f.len() != mesh.vertex_count() {
        return Err(Error::SizeMismatch { expected: mesh.vertex_count(), got: f.len() });
    }
    let dmax = sorted_unique(discard_maxima);
    let dmin = sorted_unique(discard_minima);
    check_discards(f.ranks(), mesh, &dmax, true)?;
    check_discards(f.ranks(), mesh, &dmin, false)?;
    options.install(|| {
        let start = Instant::now();
        let (minima, maxima) = extrema(mesh, f);
        let keep = |all: Vec<VertexId>, drop: &[VertexId]| -> Vec<VertexId> {
            all.into_iter().filter(|v| drop.binary_search(v).is_err()).collect()
        };
        let mut pass = Pass {
            mesh,
            options,
            keep_min: keep(minima, &dmin),
            keep_max: keep(maxima, &dmax),
            stages: Vec::new(),
            report: SimplifyReport::default(),
        };
        let constraints = ConstraintSet::new(pass.keep_min.clone(), pass.keep_max.clone());
        let mut order = f.clone();
        let (mut dmax, mut dmin) = (dmax, dmin);
        loop {
            pass.report.rounds += 1;
            order = pass.round(order, &dmax, &dmin)?;
            let t = Instant::now();
            let check = verify_constraints(mesh, &order, &constraints);
            pass.report.timings.verify += t.elapsed().as_secs_f64();
            let strays = !check.spurious_maxima.is_empty() || !check.spurious_minima.is_empty();
            if !strays {
                if options.restore_interior_extrema && !check.passed {
                    return Err(Error::ConstraintsUnsatisfied { passes: pass.report.rounds });
                }
                break;
            }
            if pass.report.rounds >= options.max_iterations {
                return Err(Error::ConstraintsUnsatisfied { passes: pass.report.rounds });
            }
            dmax = check.spurious_maxima;
            dmin = check.spurious_minima;
        }
        pass.report.timings.total = start.elapsed().as_secs_f64();
        Ok(Removal { order, stages: pass.stages, report: pass.report })
    })?
}

/// Removes the given maxima and minima from `f` and returns the simplified
/// order with its report.
pub fn remove_extrema(
    mesh: &Triangulation,
    f: &OrderField,
    discard_maxima: &[VertexId],
    discard_minima: &[VertexId],
    options: &SimplifyOptions,
) -> Result<(OrderField, SimplifyReport)> {
    let r = remove_extrema_staged(mesh, f, discard_maxima, discard_minima, options)?;
    Ok((r.order, r.report))
}

/// Numeric result of a simplification.
#[derive(Debug, Clone)]
pub struct Simplified {
    pub field: ScalarField,
    pub order: OrderField,
    pub report: SimplifyReport,
    /// Every region flattened, in stage order.
    pub regions: Vec<Region>,
}

/// Realizes each stage in turn, starting from `f`. `step` is the absolute
/// offset between reordered neighbors in the order.
pub(crate) fn realize_stages(f: &ScalarField, removal: Removal, step: f64) -> Result<Simplified> {
    let t = Instant::now();
    let mut g = f.clone();
    let mut report = removal.report;
    let mut regions = Vec::new();
    for stage in removal.stages {
        for r in &stage.regions {
            let h = (g.get(r.top) - g.get(r.saddle)).abs();
            report.max_region_height = report.max_region_height.max(h);
        }
        g = realize_numeric_step(&g, &stage.order, step, stage.sweep)?;
        regions.extend(stage.regions);
    }
    report.max_infinity_deviation = f.max_abs_diff(&g);
    report.timings.realize = t.elapsed().as_secs_f64();
    report.timings.total += report.timings.realize;
    Ok(Simplified { field: g, order: removal.order, report, regions })
}

/// Keeps exactly the extrema in `constraints` (plus the global minimum and
/// maximum) and flattens everything else.
pub fn simplify_field(
    mesh: &Triangulation,
    f: &ScalarField,
    constraints: &ConstraintSet,
    options: &SimplifyOptions,
) -> Result<Simplified> {
    if f.len() != mesh.vertex_count() {
        return Err(Error::SizeMismatch { expected: mesh.vertex_count(), got: f.len() });
    }
    let t = Instant::now();
    let order = options.install(|| compute_order_field(f))?;
    let order_time = t.elapsed().as_secs_f64();
    let (minima, maxima) = extrema(mesh, &order);
    for &v in &constraints.preserve_minima {
        mesh.check_vertex(v)?;
        if minima.binary_search(&v).is_err() {
            return Err(Error::ConstraintNotExtremum(v));
        }
    }
    for &v in &constraints.preserve_maxima {
        mesh.check_vertex(v)?;
        if maxima.binary_search(&v).is_err() {
            return Err(Error::ConstraintNotExtremum(v));
        }
    }
    let n = f.len() as Rank;
    let (gmin, gmax) = (order.vertex_at(0), order.vertex_at(n - 1));
    let dmax: Vec<VertexId> =
        maxima.into_iter().filter(|&v| v != gmax && !constraints.preserve_maxima.contains(&v)).collect();
    let dmin: Vec<VertexId> =
        minima.into_iter().filter(|&v| v != gmin && !constraints.preserve_minima.contains(&v)).collect();
    let removal = remove_extrema_staged(mesh, &order, &dmax, &dmin, options)?;
    let mut out = realize_stages(f, removal, options.zeta.step(f.range()))?;
    out.report.timings.order = order_time;
    out.report.timings.total += order_time;
    Ok(out)
}
