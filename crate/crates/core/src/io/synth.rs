use serde::{Deserialize, Serialize};

use super::GridField;
use crate::{Error, Result};

/// SplitMix64 (Steele, Lea and Flood). The sequence is fixed by the seed on
/// every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    /// Grid coordinates (x, y[, z]).
    pub center: Vec<f64>,
    pub height: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum SynthKind {
    /// Independent uniform values in `[0, 1)`.
    UniformRandom { seed: u64 },
    /// Sum of `height * exp(-d^2 / (2 radius^2))`.
    Bumps { bumps: Vec<Bump> },
    /// Bumps plus uniform noise in `[-amplitude, amplitude)`.
    BumpsPlusNoise { bumps: Vec<Bump>, noise_amplitude: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub dims: Vec<usize>,
    #[serde(flatten)]
    pub kind: SynthKind,
}

fn bumps_at(bumps: &[Bump], p: [f64; 3]) -> f64 {
    bumps
        .iter()
        .map(|b| {
            let d2: f64 = b.center.iter().zip(p).map(|(c, x)| (c - x) * (c - x)).sum();
            b.height * (-d2 / (2.0 * b.radius * b.radius)).exp()
        })
        .sum()
}

fn check_bumps(bumps: &[Bump], d: usize) -> Result<()> {
    for b in bumps {
        if !(b.radius.is_finite() && b.radius > 0.0) {
            return Err(Error::InvalidSynth(format!("bump radius must be positive, got {}", b.radius)));
        }
        if b.center.len() != d {
            return Err(Error::InvalidSynth(format!("bump center needs {d} coordinates")));
        }
        if !b.height.is_finite() || b.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSynth("bump parameters must be finite".into()));
        }
    }
    Ok(())
}

pub fn synth_field(spec: &SynthSpec) -> Result<GridField> {
    crate::Triangulation::grid(&spec.dims)?;
    let n: usize = spec.dims.iter().product();
    let d = spec.dims.len();
    let (nx, ny) = (spec.dims[0], spec.dims[1]);
    let coords = |v: usize| [(v % nx) as f64, ((v / nx) % ny) as f64, (v / (nx * ny)) as f64];
    let values = match &spec.kind {
        SynthKind::UniformRandom { seed } => {
            let mut rng = SplitMix64::new(*seed);
            (0..n).map(|_| rng.next_f64()).collect()
        }
        SynthKind::Bumps { bumps } => {
            check_bumps(bumps, d)?;
            (0..n).map(|v| bumps_at(bumps, coords(v))).collect()
        }
        SynthKind::BumpsPlusNoise { bumps, noise_amplitude, seed } => {
            check_bumps(bumps, d)?;
            if !noise_amplitude.is_finite() || *noise_amplitude < 0.0 {
                return Err(Error::InvalidSynth("noise amplitude must be a non-negative number".into()));
            }
            let mut rng = SplitMix64::new(*seed);
            (0..n).map(|v| bumps_at(bumps, coords(v)) + noise_amplitude * (2.0 * rng.next_f64() - 1.0)).collect()
        }
    };
    GridField::new(spec.dims.clone(), values)
}
