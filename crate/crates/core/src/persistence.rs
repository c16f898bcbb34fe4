//! Extremum-saddle persistence pairs, curves and threshold-driven
//! simplification.
//!
//! Pairs come from the same saddle-merging propagations as region discovery,
//! seeded at every extremum. At a merge the propagation holding the highest
//! extremum lives on and the others pair with the saddle (Elder rule). With a
//! finite threshold a propagation stops as soon as it has descended `epsilon`
//! below its extremum, so only the low-persistence part of the diagram is
//! ever computed.

use serde::{Deserialize, Serialize};

use crate::criticality::extrema;
use crate::engine::{self, propagation, SimplifyOptions, Simplified};
use crate::mesh::{Triangulation, VertexId};
use crate::order::{compute_order_field, OrderField, ScalarField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    MaxSaddle,
    MinSaddle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PersistencePair {
    pub extremum_vertex: VertexId,
    /// `None` for the global pair.
    pub saddle_vertex: Option<VertexId>,
    pub birth: f64,
    pub death: f64,
    pub persistence: f64,
    pub polarity: Polarity,
}

impl PersistencePair {
    fn new(f: &ScalarField, extremum: VertexId, saddle: Option<VertexId>, other: VertexId, polarity: Polarity) -> Self {
        let birth = f.get(extremum);
        let death = f.get(saddle.unwrap_or(other));
        Self { extremum_vertex: extremum, saddle_vertex: saddle, birth, death, persistence: (birth - death).abs(), polarity }
    }
}

/// Pairs below the threshold and the extrema that reached it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialDiagram {
    pub pairs: Vec<PersistencePair>,
    pub survivors: Vec<VertexId>,
}

fn sort_pairs(pairs: &mut [PersistencePair]) {
    pairs.sort_by(|a, b| {
        (a.polarity, a.extremum_vertex, a.saddle_vertex).cmp(&(b.polarity, b.extremum_vertex, b.saddle_vertex))
    });
}

/// Extremum-saddle pairs of one polarity with persistence below `epsilon`
/// (`f64::INFINITY` for the whole half-diagram minus the global pair).
/// Extrema whose propagation descends `epsilon` survive.
pub fn compute_extremum_saddle_pairs(
    mesh: &Triangulation,
    f: &ScalarField,
    order: &OrderField,
    polarity: Polarity,
    epsilon: f64,
) -> Result<PartialDiagram> {
    if f.len() != mesh.vertex_count() || order.len() != f.len() {
        return Err(Error::SizeMismatch { expected: mesh.vertex_count(), got: f.len().min(order.len()) });
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidOption(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let (minima, maxima) = extrema(mesh, order);
    let (oriented, seeds, values): (OrderField, Vec<VertexId>, Vec<f64>) = match polarity {
        Polarity::MaxSaddle => (order.clone(), maxima, f.values().to_vec()),
        Polarity::MinSaddle => (order.reversed(), minima, f.values().iter().map(|v| -v).collect()),
    };
    let stop = propagation::Stop { values: &values, epsilon };
    let outcome = propagation::propagate(mesh, oriented.ranks(), &seeds, Some(stop));
    let rank = oriented.ranks();
    let mut pairs = Vec::new();
    for m in &outcome.merges {
        let mut tops = m.tops.clone();
        tops.sort_unstable_by_key(|&t| std::cmp::Reverse(rank[t]));
        for &t in &tops[1..] {
            pairs.push(PersistencePair::new(f, t, Some(m.saddle), m.saddle, polarity));
        }
    }
    let mut survivors = Vec::new();
    for end in outcome.ends {
        match end {
            propagation::End::Halted { saddle, group } => {
                pairs.push(PersistencePair::new(f, group.top, Some(saddle), saddle, polarity))
            }
            propagation::End::Terminated { group } | propagation::End::Exhausted { group } => survivors.push(group.top),
        }
    }
    sort_pairs(&mut pairs);
    survivors.sort_unstable();
    Ok(PartialDiagram { pairs, survivors })
}

/// Both half-diagrams plus the global pair (global maximum with global
/// minimum), which is reported once with `MaxSaddle` polarity.
pub fn full_diagram(mesh: &Triangulation, f: &ScalarField) -> Result<Vec<PersistencePair>> {
    let order = compute_order_field(f);
    let mut pairs = compute_extremum_saddle_pairs(mesh, f, &order, Polarity::MaxSaddle, f64::INFINITY)?.pairs;
    pairs.extend(compute_extremum_saddle_pairs(mesh, f, &order, Polarity::MinSaddle, f64::INFINITY)?.pairs);
    if !f.is_empty() {
        let (lo, hi) = (order.vertex_at(0), order.vertex_at(f.len() as u64 - 1));
        pairs.push(PersistencePair::new(f, hi, None, lo, Polarity::MaxSaddle));
    }
    sort_pairs(&mut pairs);
    Ok(pairs)
}

/// Number of pairs with persistence at least each distinct persistence value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PersistenceCurve {
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub count: usize,
}

impl PersistenceCurve {
    /// Pairs with persistence `>= threshold`.
    pub fn count_at(&self, threshold: f64) -> usize {
        let i = self.points.partition_point(|p| p.threshold < threshold);
        self.points.get(i).map_or(0, |p| p.count)
    }
}

pub fn persistence_curve(pairs: &[PersistencePair]) -> PersistenceCurve {
    let mut ps: Vec<f64> = pairs.iter().map(|p| p.persistence).collect();
    ps.sort_by(f64::total_cmp);
    let n = ps.len();
    let mut points: Vec<CurvePoint> = Vec::new();
    for (i, &p) in ps.iter().enumerate() {
        if points.last().is_some_and(|q| q.threshold == p) {
            continue;
        }
        points.push(CurvePoint { threshold: p, count: n - i });
    }
    PersistenceCurve { points }
}

/// Outcome of [`persistence_simplify`].
#[derive(Debug, Clone)]
pub struct PersistenceSimplified {
    pub simplified: Simplified,
    /// Pairs below `epsilon`, both polarities.
    pub pairs: Vec<PersistencePair>,
}

/// Removes every extremum-saddle pair less persistent than `epsilon`; the
/// result stays within `epsilon` of `f`.
///
/// Filling a valley can lift the saddle of a neighboring hill and leave it
/// less persistent than before, so the diagram of the output is recomputed
/// and the new low pairs removed in turn.
pub fn persistence_simplify(
    mesh: &Triangulation,
    f: &ScalarField,
    epsilon: f64,
    options: &SimplifyOptions,
) -> Result<PersistenceSimplified> {
    if f.len() != mesh.vertex_count() {
        return Err(Error::SizeMismatch { expected: mesh.vertex_count(), got: f.len() });
    }
    let range = f.range();
    options.install(|| -> Result<PersistenceSimplified> {
        let mut current = f.clone();
        let mut order = compute_order_field(f);
        let mut first_pairs = None;
        let mut result: Option<Simplified> = None;
        let mut clean = false;
        for _ in 0..options.max_iterations {
            let t = crate::clock::Instant::now();
            let max_side = compute_extremum_saddle_pairs(mesh, &current, &order, Polarity::MaxSaddle, epsilon)?;
            let min_side = compute_extremum_saddle_pairs(mesh, &current, &order, Polarity::MinSaddle, epsilon)?;
            let pair_time = t.elapsed().as_secs_f64();
            let mut pairs = max_side.pairs;
            pairs.extend(min_side.pairs);
            sort_pairs(&mut pairs);
            if pairs.is_empty() && result.is_some() {
                clean = true;
                break;
            }
            let dmax: Vec<VertexId> =
                pairs.iter().filter(|p| p.polarity == Polarity::MaxSaddle).map(|p| p.extremum_vertex).collect();
            let dmin: Vec<VertexId> =
                pairs.iter().filter(|p| p.polarity == Polarity::MinSaddle).map(|p| p.extremum_vertex).collect();
            let removal = engine::remove_extrema_staged(mesh, &order, &dmax, &dmin, options)?;
            // keep the accumulated offsets inside the slack the pairs leave
            let worst = pairs.iter().map(|p| p.persistence).fold(0.0, f64::max);
            let largest = removal.report.largest_region_size as f64;
            let mut step = options.zeta.step(range);
            if epsilon.is_finite() && step > 0.0 {
                step = step.min((epsilon - worst) / (largest + 1.0));
            }
            let mut out = engine::realize_stages(&current, removal, step)?;
            out.report.timings.order = pair_time;
            out.report.timings.total += pair_time;
            current = out.field.clone();
            order = out.order.clone();
            let done = pairs.is_empty();
            first_pairs.get_or_insert(pairs);
            match &mut result {
                None => result = Some(out),
                Some(acc) => {
                    acc.report.absorb(out.report);
                    acc.regions.extend(out.regions);
                    acc.field = out.field;
                    acc.order = out.order;
                }
            }
            if done {
                clean = true;
                break;
            }
        }
        if !clean {
            return Err(Error::ConstraintsUnsatisfied { passes: options.max_iterations });
        }
        let mut simplified = result.expect("at least one round runs");
        simplified.report.max_infinity_deviation = f.max_abs_diff(&simplified.field);
        Ok(PersistenceSimplified { simplified, pairs: first_pairs.unwrap_or_default() })
    })?
}
