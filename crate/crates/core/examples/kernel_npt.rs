//! Nonlinear projection trick: explicit features whose Gram matrix is the centered RBF kernel.

use gessvdd::npt::NptState;
use gessvdd::{predict, train, Hyperparams, Kernel};
use nalgebra::DMatrix;

fn main() -> gessvdd::Result<()> {
    // points on a ring of radius 2
    let n = 60;
    let ring = DMatrix::from_fn(2, n, |r, c| {
        let t = c as f64 / n as f64 * std::f64::consts::TAU;
        if r == 0 { 2.0 * t.cos() } else { 2.0 * t.sin() }
    });

    let state = NptState::fit(&ring, 1.0)?;
    let gram = state.basis.transpose() * &state.basis;
    println!(
        "retained rank {} of {n}; |Phi^T Phi - K| = {:.1e}",
        state.retained_rank,
        (gram - &state.centered_kernel).amax()
    );

    let mut p = Hyperparams::new("pca-s-min".parse()?);
    p.kernel = Kernel::Rbf { sigma: 1.0 };
    p.d = 3;
    p.c = 0.2;
    let model = train(&ring, &p)?;
    // scores along a ray from the center through a training point
    let radii = [0.0, 1.0, 1.5, 2.0, 2.5, 3.0, 6.0];
    let probes = DMatrix::from_fn(2, radii.len(), |r, c| if r == 0 { radii[c] } else { 0.0 });
    for (r, d) in radii.iter().zip(predict(&model, &probes)?) {
        println!("radius {r:.1}: score {:+.4} {}", d.score, if d.positive { "inside" } else { "outside" });
    }
    Ok(())
}
