//! Trains one linear model per class of the bundled iris file and scores it on the rest.

use gessvdd::data::load_csv;
use gessvdd::eval::{metrics, OneClassTask};
use gessvdd::{predict, train, Hyperparams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"))?;
    let all: Vec<usize> = (0..data.len()).collect();
    for class in data.class_names.clone() {
        let task = OneClassTask::new(data.clone(), &class)?;
        let mut p = Hyperparams::new("knn-gr-min".parse()?);
        p.c = 0.3;
        p.d = 2;
        p.eta = 0.1;
        let model = train(&task.data.columns(&task.positives(&all)), &p)?;
        let pred: Vec<bool> = predict(&model, &data.features)?.iter().map(|d| d.positive).collect();
        let m = metrics(&pred, &task.truth(&all))?;
        let last = model.diagnostics.iterations.last().map(|r| r.objective).unwrap_or(f64::NAN);
        println!("{class:<11} objective {last:.4}  TPR {:.3} TNR {:.3} Gmean {:.3}", m.tpr, m.tnr, m.gmean);
    }
    Ok(())
}
