//! Fixtures shared by the benchmarks.

use causalqa_core::datagen::{gen_cgl, gen_effect};
use causalqa_core::rng::from_seed;
use causalqa_core::TabularDataset;

/// Effect table with `j` covariates and `n` rows (columns `s1..sj`, `a`, `y`).
pub fn effect_table(j: usize, n: usize, seed: u64) -> TabularDataset {
    gen_effect(j, n, &mut from_seed(seed)).expect("valid dims").0
}

/// Columns and names of a random linear SEM.
pub fn sem_columns(j: usize, n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<String>) {
    let (d, _, _) = gen_cgl(j, n, 0.5, &mut from_seed(seed)).expect("valid dims");
    let names = d.names().to_vec();
    let cols = names.iter().map(|c| d.numeric(c).expect("numeric").to_vec()).collect();
    (cols, names)
}
