//! Corrupts every sample with clamped Gaussian noise and measures the effect on one model.

use gessvdd::data::load_csv;
use gessvdd::eval::{inject_noise, metrics, OneClassTask};
use gessvdd::{predict, train, Hyperparams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clean = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"))?;
    let positive = clean.class_index("setosa").ok_or("no setosa")?;
    let noisy = inject_noise(&clean, &clean.members(positive), 11)?;

    let mut p = Hyperparams::new("0-gr-min".parse()?);
    p.c = 0.3;
    p.d = 2;
    let all: Vec<usize> = (0..clean.len()).collect();
    for (name, data) in [("clean", clean), ("noisy", noisy)] {
        let task = OneClassTask::new(data, "setosa")?;
        let model = train(&task.data.columns(&task.positives(&all)), &p)?;
        let pred: Vec<bool> = predict(&model, &task.data.features)?.iter().map(|d| d.positive).collect();
        let m = metrics(&pred, &task.truth(&all))?;
        println!("{name}: TPR {:.3} TNR {:.3} Gmean {:.3}", m.tpr, m.tnr, m.gmean);
    }
    Ok(())
}
