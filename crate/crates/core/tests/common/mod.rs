#![allow(dead_code)]

use lts_core::io::{synth_field, SynthKind, SynthSpec};
use lts_core::mesh::shapes;
use lts_core::{OrderField, ScalarField, Triangulation};

/// 5x5 ramp `(x + y) / 4` with peaks 9 at (1,1) and 6 at (3,3), a saddle of
/// height 4 at (2,2) and the single minimum 0 at (0,0).
pub fn two_bumps() -> (Triangulation, ScalarField) {
    let mut vals = vec![0.0; 25];
    for y in 0..5 {
        for x in 0..5 {
            vals[x + 5 * y] = 0.25 * (x + y) as f64;
        }
    }
    vals[6] = 9.0;
    vals[18] = 6.0;
    vals[12] = 4.0;
    (Triangulation::grid(&[5, 5]).unwrap(), ScalarField::new(vals).unwrap())
}

pub const BIG: usize = 6;
pub const SMALL: usize = 18;
pub const SADDLE: usize = 12;

/// Orders of the 24-vertex hexagonal patch, vertices A..X, before and after
/// removing the maximum ranked 22.
pub const PATCH_INPUT: [u64; 24] = [3, 2, 1, 0, 4, 17, 16, 15, 14, 23, 10, 18, 12, 19, 13, 9, 11, 20, 21, 22, 8, 7, 6, 5];
pub const PATCH_OUTPUT: [u64; 24] = [3, 2, 1, 0, 4, 20, 19, 18, 13, 23, 22, 21, 12, 17, 14, 9, 10, 11, 16, 15, 8, 7, 6, 5];
pub const PATCH_MAX: usize = 19; // T
pub const PATCH_SADDLE: usize = 10; // K

pub fn patch() -> (Triangulation, OrderField) {
    (shapes::hexagon_patch(), OrderField::from_ranks(PATCH_INPUT.to_vec()).unwrap())
}

pub fn random_field(dims: &[usize], seed: u64) -> (Triangulation, ScalarField) {
    let g = synth_field(&SynthSpec { dims: dims.to_vec(), kind: SynthKind::UniformRandom { seed } }).unwrap();
    (g.mesh(), g.field)
}

/// Small deterministic generator for picking subsets in tests.
pub struct Picker(u64);

impl Picker {
    pub fn new(seed: u64) -> Self {
        Self(seed ^ 0x5851_f42d_4c95_7f2d)
    }
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 33
    }
    pub fn coin(&mut self) -> bool {
        self.next() & 1 == 1
    }
}
