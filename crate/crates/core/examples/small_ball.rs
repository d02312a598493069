//! Small-ball probabilities of `<X, v>`: Monte Carlo against the exact law.

use rmtlab::ensembles::Distribution;
use rmtlab::smallball::{levy_atoms, linear_form_atoms, small_ball};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dist = Distribution::rademacher();
    let n = 16;
    let constant = vec![1.0 / (n as f64).sqrt(); n];
    let spread: Vec<f64> = {
        let raw: Vec<f64> = (1..=n).map(|k| (k as f64).sqrt()).collect();
        let s = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        raw.iter().map(|x| x / s).collect()
    };
    for (name, v) in [("constant", &constant), ("sqrt-spread", &spread)] {
        let exact = linear_form_atoms(&dist, v)?;
        println!("{name}:");
        for eps in [0.01, 0.05, 0.2] {
            let est = small_ball(v, &dist, eps, 20_000, 5)?;
            println!(
                "  eps {eps:<5} centered {:.4} [{:.4}, {:.4}]  swept {:.4}  exact swept {:.4}",
                est.centered.p_hat,
                est.centered.ci_low,
                est.centered.ci_high,
                est.swept.p_hat,
                levy_atoms(&exact, eps)
            );
        }
    }
    Ok(())
}
