//! Plain SVDD on a 2-D blob: solve the dual, build the sphere, score a few points.

use gessvdd::svdd::{classify, solve_dual, sphere_from_dual, SampleCategory};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> gessvdd::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let z = DMatrix::from_fn(2, 40, |_, _| StandardNormal.sample(&mut rng));
    let c = 0.1;
    let sol = solve_dual(&z, c)?;
    let sphere = sphere_from_dual(&z, &sol, c)?;

    let count = |k: SampleCategory| sol.categories.iter().filter(|&&x| x == k).count();
    println!(
        "{} SMO steps, KKT residual {:.1e}; interior {}, boundary {}, outside {}",
        sol.iterations,
        sol.kkt_violation,
        count(SampleCategory::Interior),
        count(SampleCategory::Boundary),
        count(SampleCategory::Outlier),
    );
    println!("center {:.3?}, R = {:.3}", sphere.center.as_slice(), sphere.radius);
    for p in [[0.0, 0.0], [1.0, 1.0], [3.0, 0.0]] {
        let d = classify(&DVector::from_row_slice(&p), &sphere)?;
        println!("{p:?} -> {} ({:+.3})", if d.positive { "inside" } else { "outside" }, d.score);
    }
    Ok(())
}
