//! Saves a model as JSON, reloads it and checks the predictions match bit for bit.

use gessvdd::{predict, train, GessvddModel, Hyperparams, Kernel};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = DMatrix::from_fn(4, 30, |_, _| rng.random_range(-1.0..1.0));
    let probes = DMatrix::from_fn(4, 10, |_, _| rng.random_range(-1.5..1.5));

    let mut p = Hyperparams::new("sb-sr-max".parse()?);
    p.kernel = Kernel::Rbf { sigma: 0.8 };
    p.d = 3;
    p.c = 0.3;
    let model = train(&x, &p)?;

    let path = std::env::temp_dir().join("gessvdd-roundtrip.json");
    model.save(&path)?;
    let loaded = GessvddModel::load(&path)?;
    let same = predict(&model, &probes)?
        .iter()
        .zip(predict(&loaded, &probes)?.iter())
        .all(|(a, b)| a.positive == b.positive && a.score.to_bits() == b.score.to_bits());
    println!("{} bytes at {}; identical predictions: {same}", std::fs::metadata(&path)?.len(), path.display());
    std::fs::remove_file(path)?;
    Ok(())
}
