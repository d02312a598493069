//! Eigenvalues, singular values and the distance identity for one sample.

use rmtlab::ensembles::{sample_sym, Distribution};
use rmtlab::spectral::{dist_identity_check, eigen_sym, min_gap, perturbation_check, PairSelection};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 50;
    let a = sample_sym(&Distribution::rademacher(), n, 1)?;
    let spectrum = eigen_sym(&a)?;
    let profile = spectrum.singular_profile();

    println!("n = {n}");
    println!("sigma_min          {:.6}", profile.sigma_min());
    println!("sigma_min * sqrt n {:.6}", profile.sigma_min() * (n as f64).sqrt());
    println!("largest sigma      {:.6}", profile.sigma(1));
    println!("smallest gap       {:.6}", min_gap(&spectrum.eigenvalues));
    println!("eigenvalues in [-1, 1]: {}", spectrum.count_interval(-1.0, 1.0)?);
    println!("residual {:.2e}, orthogonality {:.2e}", spectrum.max_residual(&a), spectrum.orthogonality_error());

    let d = dist_identity_check(&a)?;
    println!("\ndistance of column 1 to the span of the others: {:.12}", d.lhs);
    println!("closed form through the inverse of the minor:   {:.12}", d.rhs);

    let r = perturbation_check(&a, 0, PairSelection::All)?;
    println!(
        "\neigenvector perturbation bound: {} pairs, {} violations, max ratio {:.4}",
        r.pairs_checked, r.violations, r.max_ratio
    );
    Ok(())
}
