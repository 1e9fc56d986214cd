//! Runs the full split / search / test protocol on a CSV dataset.
//!
//! cargo run --release --example bench_protocol -- data/iris.csv 0-gr-min

use std::time::Instant;

use gessvdd::data::load_csv;
use gessvdd::eval::{run_benchmark, BenchConfig, Grid, KernelMode, SearchSpec, SplitPlan};
use gessvdd::Variant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/iris.csv").into());
    let variant: Variant = args.next().as_deref().unwrap_or("0-gr-min").parse()?;
    let kernel = match args.next().as_deref() {
        Some("rbf") => KernelMode::Rbf,
        _ => KernelMode::Linear,
    };

    let data = load_csv(&path)?;
    let config = BenchConfig {
        search: SearchSpec { variant, kernel, grid: Grid::standard(), seed: 0 },
        plan: SplitPlan::default(),
        targets: None,
    };
    let started = Instant::now();
    let report = run_benchmark(&data, &config)?;
    for a in &report.aggregates {
        let (m, s) = a.summary.gmean;
        println!("{:<12} {variant} Gmean {m:.3} +- {s:.3}", a.target_class);
    }
    println!("average Gmean {:.3} ({:.1?})", report.average_gmean(), started.elapsed());
    Ok(())
}
