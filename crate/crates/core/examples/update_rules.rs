//! Compares the three projection updates and both directions on one class.

use gessvdd::data::load_csv;
use gessvdd::eval::{metrics, OneClassTask};
use gessvdd::trainer::{DIRECTION_TOKENS, UPDATE_TOKENS};
use gessvdd::{predict, train, Hyperparams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"))?;
    let task = OneClassTask::new(data, "versicolor")?;
    let all: Vec<usize> = (0..task.data.len()).collect();
    let x = task.data.columns(&task.positives(&all));
    for update in UPDATE_TOKENS {
        for direction in DIRECTION_TOKENS {
            let mut p = Hyperparams::new(format!("pca-{update}-{direction}").parse()?);
            p.c = 0.2;
            p.d = 2;
            p.eta = if update == "gr" { 0.1 } else { 1.0 };
            let model = train(&x, &p)?;
            let pred: Vec<bool> = predict(&model, &task.data.features)?.iter().map(|d| d.positive).collect();
            let m = metrics(&pred, &task.truth(&all))?;
            let objectives: Vec<String> =
                model.diagnostics.iterations.iter().map(|r| format!("{:.3}", r.objective)).collect();
            println!("{:<12} Gmean {:.3}  objective per round [{}]", p.variant(), m.gmean, objectives.join(", "));
        }
    }
    Ok(())
}
