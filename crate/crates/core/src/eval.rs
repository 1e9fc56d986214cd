//! Evaluation protocol: repeated stratified splits, cross-validated grid
//! search on positive-only training folds, one-class metrics, bounded noise
//! injection, and the Wilcoxon signed-rank comparison.

use std::fmt;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::trainer::{predict, train, Hyperparams, Kernel, UpdateRule, Variant};

/// One class of a dataset treated as the target, everything else as outliers.
#[derive(Debug, Clone, PartialEq)]
pub struct OneClassTask {
    pub data: Dataset,
    pub positive_class: usize,
}

impl OneClassTask {
    pub fn new(data: Dataset, positive: &str) -> Result<Self> {
        let positive_class = data.class_index(positive).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "class {positive:?} not found; available: {}",
                data.class_names.join(", ")
            ))
        })?;
        Ok(OneClassTask { data, positive_class })
    }

    pub fn positive_name(&self) -> &str {
        &self.data.class_names[self.positive_class]
    }

    pub fn is_positive(&self, i: usize) -> bool {
        self.data.labels[i] == self.positive_class
    }

    pub fn truth(&self, indices: &[usize]) -> Vec<bool> {
        indices.iter().map(|&i| self.is_positive(i)).collect()
    }

    pub fn positives(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().copied().filter(|&i| self.is_positive(i)).collect()
    }
}

/// How the data is split into train/test and train into CV folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub repeats: usize,
    pub train_fraction: f64,
    pub cv_folds: usize,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan { repeats: 5, train_fraction: 0.7, cv_folds: 5, seed: 0 }
    }
}

impl SplitPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("repeats must be >= 1".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidParameter("cv folds must be >= 2".into()));
        }
        Ok(())
    }

    /// Seed driving repeat `r`.
    pub fn repeat_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }
}

/// One train/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub repeat: usize,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `round_half_up(fraction * count)`, kept in `[1, count - 1]`.
pub fn train_count(count: usize, fraction: f64) -> usize {
    let raw = (fraction * count as f64 + 0.5 + 1e-9).floor() as usize;
    raw.clamp(1, count - 1)
}

/// Per-class shuffled splits; every class keeps its share on both sides.
pub fn stratified_split(data: &Dataset, plan: &SplitPlan) -> Result<Vec<Split>> {
    plan.validate()?;
    let counts = data.class_counts();
    for (c, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(Error::TooFewSamples { class: data.class_names[c].clone(), count });
        }
    }
    (0..plan.repeats)
        .map(|repeat| {
            let seed = plan.repeat_seed(repeat);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut train = Vec::new();
            let mut test = Vec::new();
            for class in 0..counts.len() {
                let mut members = data.members(class);
                members.shuffle(&mut rng);
                let k = train_count(members.len(), plan.train_fraction);
                train.extend_from_slice(&members[..k]);
                test.extend_from_slice(&members[k..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            Ok(Split { repeat, seed, train, test })
        })
        .collect()
}

/// A cross-validation fold: fit on positives only, validate on both classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub fit: Vec<usize>,
    pub validate: Vec<usize>,
}

/// Shuffles training positives with `seed` and deals them round-robin;
/// training negatives are dealt round-robin, class by class, onto the
/// validation folds only.
pub fn cv_folds(task: &OneClassTask, train: &[usize], folds: usize, seed: u64) -> Result<Vec<Fold>> {
    let mut positives = task.positives(train);
    if positives.len() < folds {
        return Err(Error::TooFewSamples { class: task.positive_name().to_owned(), count: positives.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    positives.shuffle(&mut rng);
    let mut pos_folds = vec![Vec::new(); folds];
    for (i, &p) in positives.iter().enumerate() {
        pos_folds[i % folds].push(p);
    }
    let mut neg_folds = vec![Vec::new(); folds];
    let mut slot = 0;
    for class in 0..task.data.class_names.len() {
        if class == task.positive_class {
            continue;
        }
        for &i in train.iter().filter(|&&i| task.data.labels[i] == class) {
            neg_folds[slot % folds].push(i);
            slot += 1;
        }
    }
    Ok((0..folds)
        .map(|f| {
            let mut fit: Vec<usize> = (0..folds).filter(|&g| g != f).flat_map(|g| pos_folds[g].clone()).collect();
            fit.sort_unstable();
            let mut validate = pos_folds[f].clone();
            validate.extend_from_slice(&neg_folds[f]);
            validate.sort_unstable();
            Fold { fit, validate }
        })
        .collect())
}

/// Confusion-derived rates for a positive/negative decision vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
    pub tpr: f64,
    pub tnr: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub gmean: f64,
}

impl Metrics {
    pub fn from_rates(tpr: f64, tnr: f64) -> Self {
        Metrics {
            tp: 0,
            fn_: 0,
            tn: 0,
            fp: 0,
            tpr,
            tnr,
            fpr: 1.0 - tnr,
            fnr: 1.0 - tpr,
            gmean: (tpr * tnr).sqrt(),
        }
    }
}

pub fn metrics(predicted: &[bool], truth: &[bool]) -> Result<Metrics> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch { left: predicted.len(), right: truth.len() });
    }
    let (mut tp, mut fn_, mut tn, mut fp) = (0, 0, 0, 0);
    for (&p, &t) in predicted.iter().zip(truth) {
        match (t, p) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
            (false, true) => fp += 1,
        }
    }
    let pos = tp + fn_;
    let neg = tn + fp;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateTruth);
    }
    let tpr = tp as f64 / pos as f64;
    let tnr = tn as f64 / neg as f64;
    Ok(Metrics {
        tp,
        fn_,
        tn,
        fp,
        tpr,
        tnr,
        fpr: fp as f64 / neg as f64,
        fnr: fn_ as f64 / pos as f64,
        gmean: (tpr * tnr).sqrt(),
    })
}

/// Per-feature `[min, max]` box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureBounds {
    /// Bounds over the columns of `x`; `x` must have at least one column.
    pub fn of_columns(x: &DMatrix<f64>) -> Result<Self> {
        if x.ncols() == 0 {
            return Err(Error::TooFewSamples { class: "bounds".into(), count: 0 });
        }
        Ok(FeatureBounds {
            min: x.row_iter().map(|r| r.min()).collect(),
            max: x.row_iter().map(|r| r.max()).collect(),
        })
    }

    pub fn contains(&self, x: &DMatrix<f64>) -> bool {
        x.column_iter()
            .all(|c| c.iter().enumerate().all(|(r, &v)| v >= self.min[r] && v <= self.max[r]))
    }
}

/// Adds a standard-normal draw to every entry, then clamps each feature to `bounds`.
pub fn inject_noise_matrix(x: &DMatrix<f64>, bounds: &FeatureBounds, seed: u64) -> Result<DMatrix<f64>> {
    if bounds.min.len() != x.nrows() {
        return Err(Error::DimensionMismatch { context: "noise bounds", expected: x.nrows(), found: bounds.min.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        for (r, v) in col.iter_mut().enumerate() {
            let noise: f64 = StandardNormal.sample(&mut rng);
            *v = (*v + noise).clamp(bounds.min[r], bounds.max[r]);
        }
    }
    Ok(out)
}

/// Corrupts every sample of `data`, bounded by the ranges of `bound_samples`.
pub fn inject_noise(data: &Dataset, bound_samples: &[usize], seed: u64) -> Result<Dataset> {
    inject_noise_within(data, &FeatureBounds::of_columns(&data.columns(bound_samples))?, seed)
}

/// Corrupts every sample of `data` within explicit bounds.
pub fn inject_noise_within(data: &Dataset, bounds: &FeatureBounds, seed: u64) -> Result<Dataset> {
    let mut out = data.clone();
    out.features = inject_noise_matrix(&data.features, bounds, seed)?;
    Ok(out)
}

/// Linear or RBF-embedded input, as swept by the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    Linear,
    Rbf,
}

impl fmt::Display for KernelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelMode::Linear => "linear",
            KernelMode::Rbf => "rbf",
        })
    }
}

/// Value lists swept by the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    pub d: Vec<usize>,
    pub eta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub iterations: usize,
}

/// `eta` handed to rules that ignore it.
pub const UNUSED_ETA: f64 = 1.0;

impl Grid {
    /// Default search ranges for the benchmark protocol.
    pub fn standard() -> Self {
        Grid {
            c: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            d: vec![1, 2, 3, 4, 5, 10, 20],
            eta: vec![0.1, 1.0, 10.0, 100.0, 1000.0],
            sigma: vec![0.1, 1.0, 10.0, 100.0, 1000.0],
            iterations: 5,
        }
    }

    /// Points in lexicographic `(C, d, eta, sigma)` order. Sigma is omitted
    /// for linear input and eta for the spectral rule.
    pub fn points(&self, update: UpdateRule, kernel: KernelMode) -> Vec<GridPoint> {
        let etas: Vec<Option<f64>> =
            if update.uses_eta() { self.eta.iter().copied().map(Some).collect() } else { vec![None] };
        let sigmas: Vec<Option<f64>> = match kernel {
            KernelMode::Linear => vec![None],
            KernelMode::Rbf => self.sigma.iter().copied().map(Some).collect(),
        };
        let mut out = Vec::new();
        for &c in &self.c {
            for &d in &self.d {
                for &eta in &etas {
                    for &sigma in &sigmas {
                        out.push(GridPoint { c, d, eta, sigma });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(rename = "C")]
    pub c: f64,
    pub d: usize,
    pub eta: Option<f64>,
    pub sigma: Option<f64>,
}

impl GridPoint {
    pub fn hyperparams(&self, variant: Variant, iterations: usize, seed: u64) -> Hyperparams {
        let mut p = Hyperparams::new(variant);
        p.c = self.c;
        p.d = self.d;
        p.eta = self.eta.unwrap_or(UNUSED_ETA);
        p.iterations = iterations;
        p.kernel = match self.sigma {
            Some(sigma) => Kernel::Rbf { sigma },
            None => Kernel::Linear,
        };
        p.seed = seed;
        p
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C={} d={}", self.c, self.d)?;
        if let Some(eta) = self.eta {
            write!(f, " eta={eta}")?;
        }
        if let Some(sigma) = self.sigma {
            write!(f, " sigma={sigma}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum PointStatus {
    Scored,
    Skipped(String),
    Failed(String),
}

/// Cross-validation outcome for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    pub point: GridPoint,
    /// Mean fold Gmean; zero for skipped or failed points.
    pub score: f64,
    pub fold_scores: Vec<f64>,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: GridPoint,
    pub best_score: f64,
    pub table: Vec<GridScore>,
    pub warnings: Vec<String>,
}

/// What to search over.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec {
    pub variant: Variant,
    pub kernel: KernelMode,
    pub grid: Grid,
    /// Seed for graph construction inside training.
    pub seed: u64,
}

fn evaluate_point(task: &OneClassTask, folds: &[Fold], point: GridPoint, spec: &SearchSpec) -> GridScore {
    let scored = |score, fold_scores, status| GridScore { point, score, fold_scores, status };
    let smallest_fit = folds.iter().map(|f| f.fit.len()).min().unwrap_or(0);
    if point.c * (smallest_fit as f64) < 1.0 {
        return scored(0.0, vec![], PointStatus::Skipped(format!("C < 1/{smallest_fit}")));
    }
    let dim_limit = match spec.kernel {
        KernelMode::Linear => task.data.dim(),
        KernelMode::Rbf => smallest_fit.saturating_sub(1),
    };
    if point.d > dim_limit {
        return scored(0.0, vec![], PointStatus::Skipped(format!("d > {dim_limit}")));
    }
    let params = point.hyperparams(spec.variant, spec.grid.iterations, spec.seed);
    let mut fold_scores = Vec::with_capacity(folds.len());
    for fold in folds {
        let outcome = train(&task.data.columns(&fold.fit), &params).and_then(|model| {
            let decisions = predict(&model, &task.data.columns(&fold.validate))?;
            let predicted: Vec<bool> = decisions.iter().map(|d| d.positive).collect();
            metrics(&predicted, &task.truth(&fold.validate))
        });
        match outcome {
            Ok(m) => fold_scores.push(m.gmean),
            Err(Error::DegenerateTruth) => {}
            Err(e) => return scored(0.0, fold_scores, PointStatus::Failed(e.to_string())),
        }
    }
    if fold_scores.is_empty() {
        return scored(0.0, fold_scores, PointStatus::Failed("no fold had both classes".into()));
    }
    let mean = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
    scored(mean, fold_scores, PointStatus::Scored)
}

/// Cross-validated search on the training indices of `task`.
pub fn grid_search(
    task: &OneClassTask,
    train_indices: &[usize],
    plan: &SplitPlan,
    fold_seed: u64,
    spec: &SearchSpec,
) -> Result<GridSearchResult> {
    plan.validate()?;
    let folds = cv_folds(task, train_indices, plan.cv_folds, fold_seed)?;
    let points = spec.grid.points(spec.variant.update, spec.kernel);
    let table: Vec<GridScore> = points.par_iter().map(|&p| evaluate_point(task, &folds, p, spec)).collect();

    let mut warnings = Vec::new();
    let mut best: Option<usize> = None;
    for (i, row) in table.iter().enumerate() {
        match &row.status {
            PointStatus::Scored => {
                if best.is_none_or(|b| row.score > table[b].score) {
                    best = Some(i);
                }
            }
            PointStatus::Skipped(why) => warnings.push(format!("skipped {}: {why}", row.point)),
            PointStatus::Failed(why) => warnings.push(format!("failed {}: {why}", row.point)),
        }
    }
    let best = best.ok_or(Error::NoViableGridPoint)?;
    Ok(GridSearchResult { best: table[best].point, best_score: table[best].score, table, warnings })
}

/// Writes a search table as CSV (one row per grid point).
pub fn write_grid_table<W: Write>(result: &GridSearchResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["C", "d", "eta", "sigma", "status", "cv_gmean", "folds_scored"])?;
    for row in &result.table {
        let status = match &row.status {
            PointStatus::Scored => "scored".to_owned(),
            PointStatus::Skipped(r) => format!("skipped: {r}"),
            PointStatus::Failed(r) => format!("failed: {r}"),
        };
        w.write_record([
            row.point.c.to_string(),
            row.point.d.to_string(),
            opt(row.point.eta),
            opt(row.point.sigma),
            status,
            row.score.to_string(),
            row.fold_scores.len().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<grid table>", e))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Test metrics of one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub target_class: String,
    pub variant: String,
    pub split: usize,
    pub point: GridPoint,
    pub cv_score: f64,
    pub metrics: Metrics,
}

/// Mean and sample standard deviation (n - 1) of each rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub tpr: (f64, f64),
    pub tnr: (f64, f64),
    pub fpr: (f64, f64),
    pub fnr: (f64, f64),
    pub gmean: (f64, f64),
}

/// `(mean, sample std)`; the std of a single value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl Aggregate {
    pub fn of(rows: &[&Metrics]) -> Self {
        let pick = |f: fn(&Metrics) -> f64| mean_std(&rows.iter().map(|m| f(m)).collect::<Vec<_>>());
        Aggregate {
            tpr: pick(|m| m.tpr),
            tnr: pick(|m| m.tnr),
            fpr: pick(|m| m.fpr),
            fnr: pick(|m| m.fnr),
            gmean: pick(|m| m.gmean),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub dataset: String,
    pub target_class: String,
    pub variant: String,
    pub summary: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<AggregateRow>,
    pub split_seeds: Vec<u64>,
    pub warnings: Vec<String>,
}

pub const REPORT_COLUMNS: [&str; 13] =
    ["dataset", "target_class", "variant", "split", "C", "d", "eta", "sigma", "TPR", "TNR", "FPR", "FNR", "Gmean"];

impl EvalReport {
    /// Mean over target classes of the per-class mean Gmean.
    pub fn average_gmean(&self) -> f64 {
        if self.aggregates.is_empty() {
            return f64::NAN;
        }
        self.aggregates.iter().map(|a| a.summary.gmean.0).sum::<f64>() / self.aggregates.len() as f64
    }

    pub fn write_csv_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(REPORT_COLUMNS)?;
        for r in &self.rows {
            let m = &r.metrics;
            w.write_record([
                r.dataset.clone(),
                r.target_class.clone(),
                r.variant.clone(),
                r.split.to_string(),
                r.point.c.to_string(),
                r.point.d.to_string(),
                opt(r.point.eta),
                opt(r.point.sigma),
                m.tpr.to_string(),
                m.tnr.to_string(),
                m.fpr.to_string(),
                m.fnr.to_string(),
                m.gmean.to_string(),
            ])?;
        }
        for a in &self.aggregates {
            let s = &a.summary;
            for (label, pick) in [("mean", 0usize), ("std", 1)] {
                let get = |p: (f64, f64)| if pick == 0 { p.0 } else { p.1 };
                w.write_record([
                    a.dataset.clone(),
                    a.target_class.clone(),
                    a.variant.clone(),
                    label.to_owned(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    get(s.tpr).to_string(),
                    get(s.tnr).to_string(),
                    get(s.fpr).to_string(),
                    get(s.fnr).to_string(),
                    get(s.gmean).to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file)
    }
}

/// Full protocol configuration for one variant.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub search: SearchSpec,
    pub plan: SplitPlan,
    /// Target classes to evaluate; all classes when `None`.
    pub targets: Option<Vec<String>>,
}

/// Splits, searches, trains, and tests every target class.
///
/// The same splits (derived from the plan seed) are used for every target
/// class and every variant so that results are paired.
pub fn run_benchmark(data: &Dataset, config: &BenchConfig) -> Result<EvalReport> {
    let splits = stratified_split(data, &config.plan)?;
    let targets = match &config.targets {
        Some(t) => t.clone(),
        None => data.class_names.clone(),
    };
    let variant_name = config.search.variant.to_string();
    let mut report = EvalReport {
        rows: Vec::new(),
        aggregates: Vec::new(),
        split_seeds: splits.iter().map(|s| s.seed).collect(),
        warnings: Vec::new(),
    };
    for target in &targets {
        let task = OneClassTask::new(data.clone(), target)?;
        let mut class_rows = Vec::new();
        for split in &splits {
            let search = grid_search(&task, &split.train, &config.plan, split.seed, &config.search)?;
            report.warnings.extend(search.warnings.iter().map(|w| format!("{target} split {}: {w}", split.repeat)));
            let params = search.best.hyperparams(config.search.variant, config.search.grid.iterations, config.search.seed);
            let model = train(&data.columns(&task.positives(&split.train)), &params)?;
            report.warnings.extend(
                model.diagnostics.warnings.iter().map(|w| format!("{target} split {}: {w}", split.repeat)),
            );
            let decisions = predict(&model, &data.columns(&split.test))?;
            let predicted: Vec<bool> = decisions.iter().map(|d| d.positive).collect();
            let m = metrics(&predicted, &task.truth(&split.test))?;
            class_rows.push(ReportRow {
                dataset: data.name.clone(),
                target_class: target.clone(),
                variant: variant_name.clone(),
                split: split.repeat,
                point: search.best,
                cv_score: search.best_score,
                metrics: m,
            });
        }
        let ms: Vec<&Metrics> = class_rows.iter().map(|r| &r.metrics).collect();
        report.aggregates.push(AggregateRow {
            dataset: data.name.clone(),
            target_class: target.clone(),
            variant: variant_name.clone(),
            summary: Aggregate::of(&ms),
        });
        report.rows.extend(class_rows);
    }
    Ok(report)
}

/// Outcome of a paired signed-rank comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Nonzero differences ranked.
    pub n: usize,
    /// Rank sum of differences where `a > b`.
    pub r_plus: f64,
    pub r_minus: f64,
    /// `min(r_plus, r_minus)`.
    pub t: f64,
    /// Two-tailed 0.05 critical value when tabulated for `n`.
    pub critical: Option<u32>,
    /// Normal-approximation z for `n` beyond the table.
    pub z: Option<f64>,
    pub significant: bool,
}

/// Two-tailed 0.05 critical values of `T` for `n = 6..=25`.
const CRITICAL_05: [u32; 20] = [0, 2, 3, 5, 8, 10, 13, 17, 21, 25, 29, 34, 40, 46, 52, 58, 65, 73, 81, 89];

pub fn critical_value(n: usize) -> Option<u32> {
    (6..=25).contains(&n).then(|| CRITICAL_05[n - 6])
}

/// Differences within this of zero are dropped; magnitudes within it tie.
pub const WILCOXON_ZERO_TOL: f64 = 1e-12;

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    let mut diffs: Vec<f64> =
        a.iter().zip(b).map(|(x, y)| x - y).filter(|d| d.abs() > WILCOXON_ZERO_TOL).collect();
    if diffs.is_empty() {
        return Err(Error::AllZeroDifferences);
    }
    diffs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let n = diffs.len();
    let (mut r_plus, mut r_minus) = (0.0, 0.0);
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && (diffs[j + 1].abs() - diffs[i].abs()).abs() <= WILCOXON_ZERO_TOL {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for d in &diffs[i..=j] {
            if *d > 0.0 {
                r_plus += rank;
            } else {
                r_minus += rank;
            }
        }
        i = j + 1;
    }
    let t = r_plus.min(r_minus);
    let critical = critical_value(n);
    let (z, significant) = match critical {
        Some(cv) => (None, t <= cv as f64),
        None if n > 25 => {
            let nf = n as f64;
            let mean = nf * (nf + 1.0) / 4.0;
            let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
            let z = (t - mean) / sd;
            (Some(z), z.abs() > 1.959963984540054)
        }
        None => (None, false),
    };
    Ok(WilcoxonResult { n, r_plus, r_minus, t, critical, z, significant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn two_class(pos: usize, neg: usize) -> Dataset {
        let n = pos + neg;
        let features = DMatrix::from_fn(2, n, |r, c| (c * 2 + r) as f64);
        let labels = (0..n).map(|i| if i < pos { "p".to_owned() } else { "n".to_owned() }).collect();
        Dataset::new("toy", features, labels).unwrap()
    }

    #[test]
    fn split_counts() {
        let ds = two_class(10, 10);
        let splits = stratified_split(&ds, &SplitPlan::default()).unwrap();
        for s in &splits {
            assert_eq!(s.train.len(), 14);
            assert_eq!(s.test.len(), 6);
            let pos_train = s.train.iter().filter(|&&i| i < 10).count();
            assert_eq!(pos_train, 7);
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..20).collect::<Vec<_>>());
        }
        assert!(splits.windows(2).any(|w| w[0].train != w[1].train));

        let tiny = two_class(2, 3);
        let s = &stratified_split(&tiny, &SplitPlan::default()).unwrap()[0];
        assert_eq!(s.train.iter().filter(|&&i| i < 2).count(), 1);
        assert!(stratified_split(&two_class(1, 3), &SplitPlan::default()).is_err());
        assert_eq!(train_count(5, 0.7), 4);
        assert_eq!(train_count(15, 0.7), 11);
    }

    #[test]
    fn folds_keep_negatives_out_of_fitting() {
        let ds = two_class(20, 9);
        let task = OneClassTask::new(ds, "p").unwrap();
        let train: Vec<usize> = (0..29).collect();
        let folds = cv_folds(&task, &train, 5, 3).unwrap();
        let mut validated = Vec::new();
        for f in &folds {
            assert_eq!(f.fit.len(), 16);
            assert!(f.fit.iter().all(|&i| task.is_positive(i)));
            assert!(f.fit.iter().all(|i| !f.validate.contains(i)));
            validated.extend_from_slice(&f.validate);
        }
        validated.sort_unstable();
        assert_eq!(validated, train);
    }

    #[test]
    fn metric_cases() {
        let truth = [true, true, false, false];
        let m = metrics(&truth, &truth).unwrap();
        assert_eq!((m.tpr, m.tnr, m.fpr, m.fnr, m.gmean), (1.0, 1.0, 0.0, 0.0, 1.0));
        let m = metrics(&[true; 4], &truth).unwrap();
        assert_eq!((m.tnr, m.gmean), (0.0, 0.0));
        assert!(matches!(metrics(&[true, false], &[true, true]), Err(Error::DegenerateTruth)));
        assert!((Metrics::from_rates(0.82, 0.85).gmean - 0.8349).abs() < 1e-3);
    }

    #[test]
    fn noise_respects_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DMatrix::from_fn(3, 12, |r, _| if r == 2 { 4.0 } else { rng.random_range(-1.0..1.0) });
        let bounds = FeatureBounds::of_columns(&x.columns(0, 6).into_owned()).unwrap();
        let y = inject_noise_matrix(&x, &bounds, 7).unwrap();
        assert!(bounds.contains(&y));
        assert!(y.row(2).iter().all(|&v| v == 4.0));
        assert_eq!(y, inject_noise_matrix(&x, &bounds, 7).unwrap());
        assert_ne!(y, inject_noise_matrix(&x, &bounds, 8).unwrap());
    }

    #[test]
    fn grid_order_and_pruning() {
        let g = Grid::standard();
        let lin = g.points(UpdateRule::Gradient, KernelMode::Linear);
        assert_eq!(lin.len(), 6 * 7 * 5);
        assert_eq!(g.points(UpdateRule::Spectral, KernelMode::Linear).len(), 6 * 7);
        assert_eq!(g.points(UpdateRule::SpectralRegression, KernelMode::Rbf).len(), 6 * 7 * 5 * 5);
        assert_eq!(lin[0], GridPoint { c: 0.1, d: 1, eta: Some(0.1), sigma: None });
        assert_eq!(lin[1].eta, Some(1.0));
        assert_eq!(lin[5].d, 2);
    }

    #[test]
    fn wilcoxon_cases() {
        let zeros = [0.0; 9];
        assert!(matches!(wilcoxon_signed_rank(&[0.5; 9], &[0.5; 9]), Err(Error::AllZeroDifferences)));
        let up: Vec<f64> = (1..=9).map(f64::from).collect();
        let r = wilcoxon_signed_rank(&up, &zeros).unwrap();
        assert_eq!((r.t, r.critical, r.significant), (0.0, Some(5), true));
        let d = [3.0, -1.0, 2.0, -4.0, 5.0, 6.0, -2.0, 7.0, 8.0];
        let r = wilcoxon_signed_rank(&d, &zeros).unwrap();
        assert_eq!((r.r_minus, r.r_plus, r.t), (8.5, 36.5, 8.5));
        assert!(!r.significant);
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
    }
}
