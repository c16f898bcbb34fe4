use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use bytes::Bytes;
use lru::LruCache;
use lts_core::criticality::{critical_point_records, extract_critical_points, CriticalKind, CriticalPointRecord};
use lts_core::engine::SimplifyOptions;
use lts_core::io::read_field;
use lts_core::order::compute_order_field;
use lts_core::persistence::{full_diagram, persistence_curve, persistence_simplify};
use lts_core::{ScalarField, Triangulation};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::ApiError;

/// Thresholds closer than this fraction of the range share a cache entry.
const QUANTUM: f64 = 1e-6;

pub(crate) fn content_id(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..16])
}

/// An uploaded field with everything that does not depend on the threshold.
pub struct Dataset {
    pub id: String,
    pub dims: Vec<usize>,
    pub mesh: Triangulation,
    pub field: ScalarField,
    counts: ExtremumCounts,
    pub curve_body: Bytes,
    pub critical_body: Bytes,
    pub(crate) compute: tokio::sync::Mutex<()>,
    cache: Mutex<LruCache<u64, Arc<Simplification>>>,
}

/// A simplified field and its pre-serialized response bodies.
pub struct Simplification {
    pub epsilon: f64,
    pub field: ScalarField,
    pub body: Bytes,
    pub critical_body: Bytes,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtremumCounts {
    pub minima: usize,
    pub maxima: usize,
    pub saddles: usize,
}

#[derive(Serialize)]
pub struct DatasetSummary {
    pub id: String,
    pub dims: Vec<usize>,
    pub range: [f64; 2],
    #[serde(rename = "extremumCounts")]
    pub extremum_counts: ExtremumCounts,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReportSummary {
    region_count: usize,
    largest_region_size: usize,
    max_iteration_count: usize,
    mean_iteration_count: f64,
    rounds: usize,
    restored: usize,
    removed_pairs: usize,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SimplifyBody<'a> {
    epsilon: f64,
    max_infinity_deviation: f64,
    critical_points: &'a [CriticalPointRecord],
    report_summary: ReportSummary,
}

#[derive(Debug, Serialize)]
pub struct Slice {
    pub dims: [usize; 2],
    pub values: Vec<f64>,
}

fn counts(records: &[CriticalPointRecord]) -> ExtremumCounts {
    let n = |k| records.iter().filter(|r| r.kind == k).count();
    ExtremumCounts { minima: n(CriticalKind::Minimum), maxima: n(CriticalKind::Maximum), saddles: n(CriticalKind::Saddle) }
}

impl Dataset {
    pub(crate) fn from_bytes(id: String, bytes: &[u8], max_vertices: usize, cache: usize) -> Result<Self, ApiError> {
        let grid = read_field(bytes)?;
        let n = grid.field.len();
        if n > max_vertices {
            return Err(ApiError::too_large(format!("{n} vertices exceeds the cap of {max_vertices}")));
        }
        let mesh = grid.mesh();
        let order = compute_order_field(&grid.field);
        let records = critical_point_records(&extract_critical_points(&mesh, &order), &order, &grid.field);
        let curve = persistence_curve(&full_diagram(&mesh, &grid.field)?);
        let cap = NonZeroUsize::new(cache.max(1)).expect("nonzero");
        Ok(Self {
            id,
            dims: grid.dims,
            mesh,
            field: grid.field,
            counts: counts(&records),
            curve_body: serde_json::to_vec(&curve.points).expect("curve serializes").into(),
            critical_body: serde_json::to_vec(&records).expect("records serialize").into(),
            compute: tokio::sync::Mutex::new(()),
            cache: Mutex::new(LruCache::new(cap)),
        })
    }

    pub fn summary(&self) -> DatasetSummary {
        let (lo, hi) = self.field.bounds();
        DatasetSummary { id: self.id.clone(), dims: self.dims.clone(), range: [lo, hi], extremum_counts: self.counts }
    }

    /// Cache key and the threshold actually used for `epsilon`.
    pub(crate) fn quantize(&self, epsilon: f64) -> Result<(u64, f64), ApiError> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(ApiError::bad_request(format!("epsilon must be finite and non-negative, got {epsilon}")));
        }
        let step = self.field.range() * QUANTUM;
        if step == 0.0 {
            return Ok((0, 0.0));
        }
        let q = (epsilon / step).round() as u64;
        Ok((q, q as f64 * step))
    }

    pub(crate) fn cached(&self, key: u64) -> Option<Arc<Simplification>> {
        self.cache.lock().expect("cache lock").get(&key).cloned()
    }

    pub(crate) fn store(&self, key: u64, s: Arc<Simplification>) {
        self.cache.lock().expect("cache lock").put(key, s);
    }

    pub(crate) fn simplify(&self, epsilon: f64) -> Result<Simplification, ApiError> {
        let out = persistence_simplify(&self.mesh, &self.field, epsilon, &SimplifyOptions::default())?;
        let s = &out.simplified;
        let records = critical_point_records(&extract_critical_points(&self.mesh, &s.order), &s.order, &s.field);
        let r = &s.report;
        let body = SimplifyBody {
            epsilon,
            max_infinity_deviation: r.max_infinity_deviation,
            critical_points: &records,
            report_summary: ReportSummary {
                region_count: r.region_count,
                largest_region_size: r.largest_region_size,
                max_iteration_count: r.max_iteration_count,
                mean_iteration_count: r.mean_iteration_count,
                rounds: r.rounds,
                restored: r.restored,
                removed_pairs: out.pairs.len(),
            },
        };
        Ok(Simplification {
            epsilon,
            body: serde_json::to_vec(&body).expect("body serializes").into(),
            critical_body: serde_json::to_vec(&records).expect("records serialize").into(),
            field: out.simplified.field,
        })
    }

    /// Max-pooled slice `z` of `values`, at most `max_dim` samples per axis.
    pub fn slice(&self, values: &[f64], z: usize, max_dim: usize) -> Result<Slice, ApiError> {
        let (nx, ny) = (self.dims[0], self.dims[1]);
        let nz = self.dims.get(2).copied().unwrap_or(1);
        if z >= nz {
            return Err(ApiError::bad_request(format!("z = {z} outside 0..{nz}")));
        }
        if max_dim == 0 {
            return Err(ApiError::bad_request("maxDim must be at least 1"));
        }
        let (fx, fy) = (nx.div_ceil(max_dim), ny.div_ceil(max_dim));
        let (w, h) = (nx.div_ceil(fx), ny.div_ceil(fy));
        let plane = &values[z * nx * ny..(z + 1) * nx * ny];
        let mut out = vec![f64::NEG_INFINITY; w * h];
        for y in 0..ny {
            for x in 0..nx {
                let o = &mut out[(y / fy) * w + x / fx];
                *o = o.max(plane[y * nx + x]);
            }
        }
        Ok(Slice { dims: [w, h], values: out })
    }
}
