//! Injective vertex orders and their numeric realization.
//!
//! Ties in `f` are broken by vertex id, which is the lexicographic flavour of
//! simulation of simplicity: `u` precedes `v` iff `(f(u), u) < (f(v), v)`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mesh::VertexId;
use crate::{Error, Result};

pub type Rank = u64;

/// One finite value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.values[v]
    }

    /// `(min, max)`; `(0, 0)` for an empty field.
    pub fn bounds(&self) -> (f64, f64) {
        self.values.iter().fold(None, |acc: Option<(f64, f64)>, &x| match acc {
            None => Some((x, x)),
            Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
        })
        .unwrap_or((0.0, 0.0))
    }

    pub fn range(&self) -> f64 {
        let (lo, hi) = self.bounds();
        hi - lo
    }

    /// Largest absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `(value, id)` comparison. `-0.0` and `0.0` compare equal, so the id decides.
#[inline]
pub fn lex_cmp(a: (f64, VertexId), b: (f64, VertexId)) -> Ordering {
    match a.0.partial_cmp(&b.0) {
        Some(Ordering::Equal) | None => a.1.cmp(&b.1),
        Some(o) => o,
    }
}

/// A bijection vertex -> rank together with its inverse (the sorted vertex list).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderField {
    rank: Vec<Rank>,
    inverse: Vec<VertexId>,
}

impl OrderField {
    /// Validates that `rank` is a permutation of `0..n`.
    pub fn from_ranks(rank: Vec<Rank>) -> Result<Self> {
        let n = rank.len();
        let mut inverse = vec![usize::MAX; n];
        for (v, &r) in rank.iter().enumerate() {
            let r = r as usize;
            if r >= n {
                return Err(Error::InvalidOption(format!("rank {r} of vertex {v} out of range")));
            }
            if inverse[r] != usize::MAX {
                return Err(Error::InvalidOption(format!("rank {r} assigned twice")));
            }
            inverse[r] = v;
        }
        Ok(Self { rank, inverse })
    }

    /// Builds the order from the sorted vertex list.
    pub fn from_sorted(inverse: Vec<VertexId>) -> Result<Self> {
        let n = inverse.len();
        let mut rank = vec![Rank::MAX; n];
        for (r, &v) in inverse.iter().enumerate() {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if rank[v] != Rank::MAX {
                return Err(Error::InvalidOption(format!("vertex {v} listed twice")));
            }
            rank[v] = r as Rank;
        }
        Ok(Self { rank, inverse })
    }

    /// The identity order 0, 1, ..., n-1.
    pub fn identity(n: usize) -> Self {
        Self { rank: (0..n as Rank).collect(), inverse: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    #[inline]
    pub fn rank(&self, v: VertexId) -> Rank {
        self.rank[v]
    }

    #[inline]
    pub fn vertex_at(&self, r: Rank) -> VertexId {
        self.inverse[r as usize]
    }

    pub fn ranks(&self) -> &[Rank] {
        &self.rank
    }

    /// Vertices by increasing rank.
    pub fn sorted(&self) -> &[VertexId] {
        &self.inverse
    }

    /// The mirrored order `n - 1 - rank`; minima become maxima.
    pub fn reversed(&self) -> Self {
        let n = self.len() as Rank;
        Self {
            rank: self.rank.iter().map(|&r| n - 1 - r).collect(),
            inverse: self.inverse.iter().rev().copied().collect(),
        }
    }

    /// Rank array as little-endian bytes, for byte-level comparisons.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.rank.iter().flat_map(|r| r.to_le_bytes()).collect()
    }
}

pub fn compute_order_field(field: &ScalarField) -> OrderField {
    let values = field.values();
    let mut inverse: Vec<VertexId> = (0..values.len()).collect();
    inverse.par_sort_unstable_by(|&a, &b| lex_cmp((values[a], a), (values[b], b)));
    let mut rank = vec![0; values.len()];
    for (r, &v) in inverse.iter().enumerate() {
        rank[v] = r as Rank;
    }
    OrderField { rank, inverse }
}

/// How far below its predecessor a reordered vertex is placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "mode")]
pub enum ZetaPolicy {
    /// `factor * (max f - min f)`, falling back to one ulp when that is lost to
    /// rounding.
    RelativeEpsilon { factor: f64 },
    UlpDecrement,
}

impl Default for ZetaPolicy {
    fn default() -> Self {
        ZetaPolicy::RelativeEpsilon { factor: 1e-12 }
    }
}

impl ZetaPolicy {
    /// The absolute step for a field of the given value range.
    pub fn step(&self, range: f64) -> f64 {
        match *self {
            ZetaPolicy::RelativeEpsilon { factor } if factor > 0.0 && range > 0.0 => factor * range,
            _ => 0.0,
        }
    }
}

/// Direction of the realization sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Decreasing rank; vertices that sit too high are lowered just below their
    /// predecessor. Flattens hills.
    Lower,
    /// Increasing rank; vertices that sit too low are raised just above their
    /// predecessor. Fills valleys.
    Raise,
}

fn below(x: f64, zeta: f64) -> f64 {
    let y = x - zeta;
    if y < x {
        y
    } else {
        x.next_down()
    }
}

fn above(x: f64, zeta: f64) -> f64 {
    let y = x + zeta;
    if y > x {
        y
    } else {
        x.next_up()
    }
}

/// Numeric field whose `(value, id)` order is `g_order`, lowering only what
/// has to move.
pub fn realize_numeric(f: &ScalarField, g_order: &OrderField, zeta: ZetaPolicy) -> Result<ScalarField> {
    realize_numeric_step(f, g_order, zeta.step(f.range()), Sweep::Lower)
}

/// Like [`realize_numeric`] with an absolute step (0 means one ulp) and an
/// explicit sweep direction.
pub fn realize_numeric_step(f: &ScalarField, g_order: &OrderField, step: f64, sweep: Sweep) -> Result<ScalarField> {
    if f.len() != g_order.len() {
        return Err(Error::SizeMismatch { expected: f.len(), got: g_order.len() });
    }
    let mut g = f.values().to_vec();
    let order = g_order.sorted();
    match sweep {
        Sweep::Lower => {
            for w in (0..order.len().saturating_sub(1)).rev() {
                let (prev, v) = (order[w + 1], order[w]);
                if lex_cmp((g[v], v), (g[prev], prev)) != Ordering::Less {
                    g[v] = below(g[prev], step);
                }
            }
        }
        Sweep::Raise => {
            for w in 1..order.len() {
                let (prev, v) = (order[w - 1], order[w]);
                if lex_cmp((g[v], v), (g[prev], prev)) != Ordering::Greater {
                    g[v] = above(g[prev], step);
                }
            }
        }
    }
    ScalarField::new(g)
}
