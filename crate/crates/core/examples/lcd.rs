//! Least common denominators, subvector LCDs and compressibility.

use rmtlab::arithmetic::{
    compress_dist, flat_count, lcd, subvector_lcd, witness_holds, LcdParams, SubvectorMode,
};

fn unit(v: &[f64]) -> Vec<f64> {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / s).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = LcdParams::new(0.25, 0.5).with_cap(200.0);
    let vectors = [
        ("e1", unit(&[1.0, 0.0, 0.0, 0.0])),
        ("constant", unit(&[1.0; 4])),
        ("two-level", unit(&[1.0, 1.0, 2.0, 2.0])),
        ("irrational", unit(&[1.0, 2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt()])),
    ];
    println!("{:<11} {:>10} {:>8} {:>9}", "vector", "lcd", "finite", "witness");
    for (name, v) in &vectors {
        let r = lcd(v, &params)?;
        println!(
            "{name:<11} {:>10.6} {:>8} {:>9}",
            r.value.bound(),
            r.value.is_finite(),
            witness_holds(v, &params, v.len(), &r)
        );
    }

    let v = unit(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 3.0]);
    let sub = subvector_lcd(&v, &params, 0.1, SubvectorMode::Exact, false)?;
    println!("\nsubvector lcd {:.6} keeping {:?}", sub.value.bound(), sub.subset);
    println!("distance to 2-sparse vectors {:.4}", compress_dist(&v, 0.25));
    println!("coordinates above 0.2/sqrt(n): {}", flat_count(&v, 0.2));
    Ok(())
}
