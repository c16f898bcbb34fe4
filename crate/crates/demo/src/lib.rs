//! WebAssembly bindings for the browser demo in `www/`.
//!
//! [`Session`] holds a 2D field and its latest simplification and is plain
//! Rust so it can be tested natively; [`Demo`] wraps it for JavaScript.

use lts_core::criticality::{extract_critical_points, CriticalSet};
use lts_core::engine::SimplifyOptions;
use lts_core::io::{read_sfg, synth_field, Bump, GridField, SynthKind, SynthSpec};
use lts_core::order::compute_order_field;
use lts_core::persistence::{full_diagram, persistence_curve, persistence_simplify, PersistenceCurve};
use lts_core::{Result, Triangulation};
use wasm_bindgen::prelude::*;

/// Kind codes in [`Session::critical_points`].
pub const MINIMUM: u32 = 0;
pub const SADDLE: u32 = 1;
pub const MAXIMUM: u32 = 2;

pub struct Session {
    grid: GridField,
    mesh: Triangulation,
    curve: PersistenceCurve,
    simplified: Vec<f64>,
    epsilon: f64,
    deviation: f64,
}

/// Deterministic bump centers, heights and radii scattered over the grid.
fn scatter(width: usize, height: usize, count: usize, seed: u32) -> Vec<Bump> {
    let mut rng = lts_core::io::SplitMix64::new(seed as u64);
    (0..count)
        .map(|_| Bump {
            center: vec![rng.next_f64() * (width - 1) as f64, rng.next_f64() * (height - 1) as f64],
            height: 0.2 + 0.8 * rng.next_f64(),
            radius: (width.min(height) as f64) * (0.04 + 0.08 * rng.next_f64()),
        })
        .collect()
}

fn flatten(set: &CriticalSet) -> Vec<u32> {
    let mut out = Vec::with_capacity(2 * (set.minima.len() + set.maxima.len() + set.saddles.len()));
    for &v in &set.minima {
        out.extend([v as u32, MINIMUM]);
    }
    for &(v, _, _) in &set.saddles {
        out.extend([v as u32, SADDLE]);
    }
    for &v in &set.maxima {
        out.extend([v as u32, MAXIMUM]);
    }
    out
}

impl Session {
    pub fn new(grid: GridField) -> Result<Self> {
        if grid.dims.len() != 2 {
            return Err(lts_core::Error::InvalidDims(grid.dims));
        }
        let mesh = grid.mesh();
        let curve = persistence_curve(&full_diagram(&mesh, &grid.field)?);
        let simplified = grid.field.values().to_vec();
        Ok(Self { grid, mesh, curve, simplified, epsilon: 0.0, deviation: 0.0 })
    }

    /// Random bumps plus uniform noise on a `width` by `height` grid.
    pub fn synth(width: usize, height: usize, bumps: usize, noise: f64, seed: u32) -> Result<Self> {
        let kind = SynthKind::BumpsPlusNoise {
            bumps: scatter(width.max(2), height.max(2), bumps, seed),
            noise_amplitude: noise,
            seed: seed as u64 ^ 0x9e37_79b9,
        };
        Self::new(synth_field(&SynthSpec { dims: vec![width, height], kind })?)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.grid.dims[0], self.grid.dims[1])
    }

    pub fn range(&self) -> f64 {
        self.grid.field.range()
    }

    pub fn original(&self) -> &[f64] {
        self.grid.field.values()
    }

    pub fn simplified(&self) -> &[f64] {
        &self.simplified
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn deviation(&self) -> f64 {
        self.deviation
    }

    /// `[threshold, count, threshold, count, ...]`
    pub fn curve(&self) -> Vec<f64> {
        self.curve.points.iter().flat_map(|p| [p.threshold, p.count as f64]).collect()
    }

    pub fn simplify(&mut self, epsilon: f64) -> Result<()> {
        let out = persistence_simplify(&self.mesh, &self.grid.field, epsilon, &SimplifyOptions::default())?;
        self.deviation = out.simplified.report.max_infinity_deviation;
        self.simplified = out.simplified.field.into_values();
        self.epsilon = epsilon;
        Ok(())
    }

    /// `[vertex, kind, vertex, kind, ...]` for the current simplification.
    pub fn critical_points(&self) -> Vec<u32> {
        let f = lts_core::ScalarField::new(self.simplified.clone()).expect("simplified values are finite");
        flatten(&extract_critical_points(&self.mesh, &compute_order_field(&f)))
    }
}

fn js(e: lts_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo(Session);

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(width: usize, height: usize, bumps: usize, noise: f64, seed: u32) -> std::result::Result<Demo, JsError> {
        Session::synth(width, height, bumps, noise, seed).map(Demo).map_err(js)
    }

    #[wasm_bindgen(js_name = fromSfg)]
    pub fn from_sfg(text: &str) -> std::result::Result<Demo, JsError> {
        read_sfg(text).and_then(Session::new).map(Demo).map_err(js)
    }

    pub fn width(&self) -> usize {
        self.0.dims().0
    }

    pub fn height(&self) -> usize {
        self.0.dims().1
    }

    pub fn range(&self) -> f64 {
        self.0.range()
    }

    pub fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }

    pub fn deviation(&self) -> f64 {
        self.0.deviation()
    }

    pub fn original(&self) -> Vec<f64> {
        self.0.original().to_vec()
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.simplified().to_vec()
    }

    pub fn curve(&self) -> Vec<f64> {
        self.0.curve()
    }

    pub fn simplify(&mut self, epsilon: f64) -> std::result::Result<(), JsError> {
        self.0.simplify(epsilon).map_err(js)
    }

    #[wasm_bindgen(js_name = criticalPoints)]
    pub fn critical_points(&self) -> Vec<u32> {
        self.0.critical_points()
    }
}
