//! Deterministic k-means++ on three separated blobs.

use gessvdd::cluster::kmeans;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> gessvdd::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let centers = [(0.0, 0.0), (4.0, 0.0), (2.0, 3.0)];
    let x = DMatrix::from_fn(2, 90, |r, c| {
        let (cx, cy) = centers[c / 30];
        (if r == 0 { cx } else { cy }) + noise.sample(&mut rng)
    });
    let fit = kmeans(&x, 3, 0)?;
    println!("inertia per step {:.3?}", fit.inertia_trace);
    for (k, row) in fit.centroids.row_iter().enumerate() {
        let size = fit.labels.iter().filter(|&&l| l == k).count();
        println!("cluster {k}: {size} points around ({:.2}, {:.2})", row[0], row[1]);
    }
    Ok(())
}
