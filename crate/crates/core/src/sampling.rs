//! Seeded sampling with deterministic parallel chunking.
//!
//! A scan of `n` samples is split into chunks of [`CHUNK`] consecutive
//! indices. Chunk `c` draws from a ChaCha8 stream seeded with
//! `splitmix64(master ⊕ splitmix64(c))`, so results depend only on
//! `(master, n)` and never on the number of worker threads. Chunk results
//! are concatenated in chunk order.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::geometry::{project, SpherePoint, TangentVector};

pub const CHUNK: usize = 64;

/// One step of the splitmix64 generator.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn chunk_seed(master: u64, chunk: u64) -> u64 {
    splitmix64(master ^ splitmix64(chunk))
}

/// Calls `f(rng, index)` for every index in `0..n`, in parallel, returning
/// results in index order.
pub fn par_sample<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(chunk_seed(seed, c as u64));
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            (start..end).map(|i| f(&mut rng, i)).collect()
        })
        .collect();
    per_chunk.into_iter().flatten().collect()
}

pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Uniform point on S^{dim−1}.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = random_gaussian(rng, dim);
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Gaussian tangent vector at x.
pub fn random_tangent<R: Rng + ?Sized>(rng: &mut R, x: &SpherePoint) -> TangentVector {
    let w = random_gaussian(rng, x.ambient_dim());
    TangentVector {
        base: x.clone(),
        v: project(x.as_vector(), &w),
    }
}

/// Uniform point on the sphere outside the caps of angular radius `eps`
/// around ±pole.
pub fn random_point_outside_caps<R: Rng + ?Sized>(rng: &mut R, pole: &DVector<f64>, eps: f64) -> SpherePoint {
    let limit = eps.cos();
    loop {
        let x = random_unit(rng, pole.len());
        if x.dot(pole).abs() < limit {
            return SpherePoint::new(x).expect("unit vector");
        }
    }
}

/// Orthogonal matrix from the QR factor of a Gaussian matrix, with the sign
/// ambiguity of QR fixed so that R has a positive diagonal.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}
