//! Sparse least squares with thresholded rank cap and residual certificate.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spars::sparse::{dense_lsq, sparse_lsq, sparsify_matrix, thresholded_rank};

fn main() -> spars::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = DMatrix::from_fn(30, 8, |_, _| rng.random_range(-1.0..1.0));
    let mut x = DMatrix::zeros(8, 1);
    x[(2, 0)] = 1.5;
    x[(6, 0)] = -0.7;
    let y = &a * &x;

    let rep = sparse_lsq(&a, &y, 1e-10, None)?;
    println!("supports {:?}, nnz {}", rep.supports, rep.nnz);
    println!(
        "residual {:.2e} <= {:.2e} * delta + {} * {:.2e}: {}",
        rep.residual_frobenius,
        rep.certificate_alpha,
        rep.certificate_beta,
        rep.projected_residual,
        rep.certificate_holds()
    );

    let dense = dense_lsq(&a, &y)?;
    let dense_nnz = dense.iter().filter(|v| v.abs() > 0.0).count();
    println!("dense solution has {dense_nnz} nonzeros");

    // Rank-3 data matrix: any 4-column map collapses to at most 4 * 3 nonzeros.
    let u = DMatrix::from_fn(10, 3, |_, _| rng.random_range(-1.0..1.0));
    let v = DMatrix::from_fn(3, 50, |_, _| rng.random_range(-1.0..1.0));
    let h = u * v;
    let m = DMatrix::from_fn(10, 4, |_, _| rng.random_range(-1.0..1.0));
    let rk = thresholded_rank(&h, 1e-8)?.rank;
    let sp = sparsify_matrix(&h, &m, 1e-8)?;
    println!("rk = {rk}, sparsified nnz {} (was {})", sp.nnz, m.len());
    Ok(())
}
