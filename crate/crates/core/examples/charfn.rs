//! Characteristic functions and the Fourier-side inequalities.

use rmtlab::ensembles::{Distribution, SymMatrix};
use rmtlab::smallball::{
    charfn_exact, charfn_xi, cosine_bounds_check, decoupling_check, esseen_bound_check, xi_bounds_check,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dist = Distribution::rademacher();
    let phi = charfn_exact(&dist)?;
    let xi = charfn_xi(&dist, 0.25)?;
    println!("{:>6} {:>10} {:>10}", "t", "phi(t)", "phi_xi(t)");
    for k in 0..=8 {
        let t = k as f64 * 0.125;
        println!("{t:>6.2} {:>10.5} {:>10.5}", phi.eval_real(t), xi.eval_real(t));
    }

    let grid: Vec<f64> = (0..1000).map(|k| 4.0 * k as f64 / 999.0).collect();
    let r = xi_bounds_check(&dist, 0.25, &grid)?;
    println!("\nxi bounds: {} lower, {} upper violations", r.lower_violations, r.upper_violations);
    let a_grid: Vec<f64> = (0..1000).map(|k| -1.0 + 2.0 * k as f64 / 999.0).collect();
    println!("cosine bounds: {} violations", cosine_bounds_check(&a_grid).violations);

    let v = vec![0.5; 4];
    let e = esseen_bound_check(&dist, &v, 0.1, 20_000)?;
    println!("\nsmall ball {:.4} <= delta * integral {:.4} (ratio {:.3})", e.lhs, e.rhs, e.ratio);

    let m = SymMatrix::from_upper_fn(5, |i, j| ((i + 2 * j) as f64).sin());
    let d = decoupling_check(&dist, &m, &[0.1, -0.2, 0.3, 0.0, 0.2], 0.7, &[0, 2])?;
    println!("decoupling: lhs {:.4} rhs {:.4} holds {}", d.lhs, d.rhs, d.holds());
    Ok(())
}
