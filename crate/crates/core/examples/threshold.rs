//! Threshold of a vector against the zeroed-block matrix.

use rmtlab::ensembles::{Distribution, ZeroedMatrixParams};
use rmtlab::smallball::{threshold, ThresholdParams};
use rmtlab::stats::log_grid_count;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 12;
    let zeroed = ZeroedMatrixParams::new(n, 3, 0.25, Distribution::rademacher())?;
    let v = vec![1.0 / (n as f64).sqrt(); n];
    for l in [2.0, 4.0, 8.0] {
        let params = ThresholdParams {
            l,
            trials: 20_000,
            t_grid: log_grid_count(1e-3, 1.0, 31),
        };
        let r = threshold(&v, &zeroed, &params, 9)?;
        println!("L = {l}: T_L = {:.4}", r.t_l);
    }
    Ok(())
}
