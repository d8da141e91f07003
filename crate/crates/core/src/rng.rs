//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`), seeded
//! with `SeedableRng::seed_from_u64(seed)` and then moved to a 64-bit stream
//! id with `set_stream`. The stream id packs a purpose tag in the high 32 bits
//! and an index (usually a class) in the low 32 bits, so independent draws
//! never share keystream and results are identical across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::Matrix;

/// Purpose tags for [`stream`].
pub mod purpose {
    pub const SYNTH_BASIS: u32 = 1;
    pub const SYNTH_LATENT: u32 = 2;
    pub const SYNTH_NOISE: u32 = 3;
    pub const ADDITIVE_NOISE: u32 = 4;
    pub const SPLIT: u32 = 5;
    pub const INIT_DICTIONARY: u32 = 6;
    pub const INIT_PROJECTION: u32 = 7;
    pub const INIT_CLASSIFIER: u32 = 8;
}

pub fn stream(seed: u64, purpose: u32, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | index as u64);
    rng
}

/// Matrix of i.i.d. standard normal entries drawn in column-major order.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_iterator(rows, cols, (0..rows * cols).map(|_| StandardNormal.sample(rng)))
}
