//! Builds each constraint graph on a small sample and reports its scatter spectrum.

use gessvdd::graph::{laplacian_between, laplacian_total, laplacian_within, scatter, LaplacianSpec};
use gessvdd::linalg::sym_eig;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gessvdd::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = DMatrix::from_fn(3, 30, |r, c| rng.random_range(-1.0..1.0) + if c < 15 { 2.0 * r as f64 } else { 0.0 });

    let specs = [
        LaplacianSpec::Zero,
        LaplacianSpec::Identity,
        LaplacianSpec::Pca,
        LaplacianSpec::WithinCluster { clusters: 2 },
        LaplacianSpec::BetweenCluster { clusters: 2 },
        LaplacianSpec::Knn { neighbors: 4 },
    ];
    for spec in specs {
        let lap = spec.realize(&x, 0)?;
        let s = scatter(&x, &lap)?;
        let values = sym_eig(&s)?.values;
        println!("{:<4} scatter eigenvalues {:.3?}", spec.token(), values.as_slice());
    }

    // within + between = total for any labeling
    let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
    let sum = laplacian_within(&labels, 30)?.matrix + laplacian_between(&labels, 30)?.matrix;
    println!("|L_w + L_b - L_t| = {:.1e}", (sum - laplacian_total(30).matrix).amax());
    Ok(())
}
