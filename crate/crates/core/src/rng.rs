//! Seeded random streams.
//!
//! Every Monte-Carlo draw belongs to a fixed chunk of [`CHUNK`] samples and
//! chunk `c` is generated by a ChaCha8 stream keyed on `(seed, c)`. Results
//! therefore depend only on the seed and the sample count, never on how the
//! chunks are scheduled across threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;

pub const CHUNK: usize = 1024;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One draw from CN(0, 1).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// `rows x cols` matrix with i.i.d. CN(0, variance) entries, filled column-major.
pub fn complex_normal_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> DMatrix<Complex64> {
    let scale = variance.sqrt();
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng) * scale)
}

/// Sample ranges `[start, end)` of each chunk covering `samples` draws.
pub fn chunks(samples: usize) -> impl Iterator<Item = (u64, std::ops::Range<usize>)> {
    (0..samples.div_ceil(CHUNK)).map(move |c| {
        let start = c * CHUNK;
        (c as u64, start..(start + CHUNK).min(samples))
    })
}
