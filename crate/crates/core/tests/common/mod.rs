#![allow(dead_code)]

use std::path::PathBuf;

use ekm::{synthetic, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small random instance: clustered mixtures for most seeds, with every
/// fourth seed snapped to a coarse integer grid so that objective ties occur.
pub fn random_instance(seed: u64) -> (Dataset, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(8..=40);
    let d = rng.random_range(1..=5);
    let k = rng.random_range(1..=4);
    let ds = if seed.is_multiple_of(4) {
        let values = (0..n * d)
            .map(|_| f64::from(rng.random_range(0..4u8)))
            .collect();
        Dataset::from_flat(values, d, format!("grid-{seed}")).unwrap()
    } else {
        synthetic(n, d, rng.random_range(1..=5), rng.random()).unwrap()
    };
    (ds, k)
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}
