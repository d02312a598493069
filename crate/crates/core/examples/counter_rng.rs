//! Counter-based streams: draws depend on (seed, domain, indices) only.

use rayon::prelude::*;
use rmtlab::rng::{derive_key, trial_seed, CounterRng, Domain};

fn main() {
    let first: Vec<f64> = (0..4).map(|t| CounterRng::from_key(trial_seed(1, t)).uniform()).collect();
    // Parallel evaluation gives the same values whatever the scheduling.
    let parallel: Vec<f64> = (0..4usize)
        .into_par_iter()
        .map(|t| CounterRng::from_key(trial_seed(1, t as u64)).uniform())
        .collect();
    println!("sequential {first:?}");
    println!("parallel   {parallel:?}");
    assert_eq!(first, parallel);

    let mut rng = CounterRng::new(1, Domain::Auxiliary, 3, 0);
    println!("auxiliary stream: {:.6} {:.6}", rng.uniform(), rng.uniform());
    println!("derived key (seed 1, trial domain, 3, 0): {:#018x}", derive_key(1, Domain::Trial, 3, 0));
}
