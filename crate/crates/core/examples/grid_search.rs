//! Cross-validated search over a reduced grid for one class.

use gessvdd::data::load_csv;
use gessvdd::eval::{grid_search, write_grid_table, Grid, KernelMode, OneClassTask, SearchSpec, SplitPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv"))?;
    let task = OneClassTask::new(data, "virginica")?;
    let grid = Grid { c: vec![0.1, 0.3, 0.5], d: vec![1, 2, 3], eta: vec![0.1, 1.0], sigma: vec![], iterations: 3 };
    let spec = SearchSpec { variant: "sw-gr-max".parse()?, kernel: KernelMode::Linear, grid, seed: 0 };
    let plan = SplitPlan::default();
    let all: Vec<usize> = (0..task.data.len()).collect();
    let result = grid_search(&task, &all, &plan, 0, &spec)?;
    write_grid_table(&result, std::io::stdout())?;
    println!("best {} (CV Gmean {:.3})", result.best, result.best_score);
    Ok(())
}
