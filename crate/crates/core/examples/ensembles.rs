//! Entry laws and the matrix ensembles built from them.
//!
//! Run with `cargo run --example ensembles`.

use rmtlab::ensembles::{
    atom_moments, sample_col, sample_sym, sample_zeroed, xi_atoms, Distribution, ZeroedMatrixParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let laws = [
        Distribution::rademacher(),
        Distribution::lazy_signed(0.25)?,
        Distribution::sparse_rademacher(0.1)?,
        Distribution::uniform_pm1_zero([0.25, 0.5, 0.25])?,
    ];
    for law in &laws {
        let (mass, mean, var) = atom_moments(law.atoms().unwrap());
        println!("{:<28} mass {mass:.3} mean {mean:+.3} var {var:.3}", law.short_name());
    }

    // The same seed gives the same matrix on every run and thread count.
    let a = sample_sym(&Distribution::gaussian(), 4, 42)?;
    println!("\n4x4 Wigner matrix, seed 42:");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:+.3}", a.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }

    let x = sample_col(&Distribution::rademacher(), 8, 7)?;
    println!("\nrademacher column: {x:?}");

    let xi = xi_atoms(&Distribution::rademacher(), 0.25)?;
    println!("xi atoms at nu = 1/4: {xi:?}");

    // Diagonal blocks of size d and n - d are zero.
    let p = ZeroedMatrixParams::new(6, 2, 0.5, Distribution::rademacher())?;
    let m = sample_zeroed(&p, 3)?;
    println!("\nzeroed 6x6 matrix with d = 2:");
    for i in 0..6 {
        let row: Vec<String> = (0..6).map(|j| format!("{:+.0}", m.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
