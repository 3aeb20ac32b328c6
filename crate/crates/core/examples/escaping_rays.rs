//! Number of half-rays reaching the boundary of `[0, N]²`.

use gilbert_tess::experiments::escaping_expectation;

fn main() -> gilbert_tess::Result<()> {
    for lambda in [1.0, 4.0] {
        for row in escaping_expectation(lambda, &[10.0, 20.0, 40.0], 100, 5)? {
            println!(
                "λ = {lambda}, N = {:>3}: E R_N ≈ {:>7.2} ± {:.2}, divided by √λ N: {:.3}",
                row.n, row.mean, row.std_error, row.normalized
            );
        }
    }
    Ok(())
}
