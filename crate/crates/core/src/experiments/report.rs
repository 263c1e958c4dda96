//! CSV emission and report regeneration.
//!
//! `emit_results` writes five files into the output directory:
//!
//! - `runs.csv` — one row per (scenario, scoring, strategy, seed);
//! - `epochs.csv` — per-epoch validation error and subset size per run;
//! - `classf1.csv` — per-class test F1 per run;
//! - `aggregate.csv` — the wide comparison table, one row per
//!   (scenario, scoring source) with mean error per strategy column and a
//!   `*` marking Welch p < 0.05 against the scenario baseline;
//! - `curves.csv` — mean validation error per epoch per strategy.
//!
//! All numbers use fixed formatting, so rerunning an identical grid
//! produces byte-identical files. `regenerate_reports` rebuilds the two
//! derived files from the persisted per-run CSVs.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::stats::{mean, welch_t_test};
use super::{GridResults, RunResult, Summary};

/// Aggregated outcome of one grid cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub scenario: String,
    /// `prior`, `uncertainty`, or `-` for source-independent cells.
    pub scoring: String,
    pub strategy: String,
    pub summary: Summary,
    pub runs: Vec<RunResult>,
}

impl CellResult {
    pub fn error_rates(&self) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| r.failed.is_none())
            .map(|r| r.test.error_rate)
            .collect()
    }

    pub fn mean_error(&self) -> f64 {
        self.summary.mean
    }
}

/// The nine strategy columns of the aggregate table, in order.
pub const STRATEGY_COLUMNS: [&str; 9] = [
    "baseline",
    "reorder-anti",
    "reorder-cl",
    "subsets-random",
    "subsets-anti",
    "subsets-cl",
    "weights-random",
    "weights-anti",
    "weights-cl",
];

fn fmt_f(v: f64) -> String {
    format!("{v:.4}")
}

fn write_runs_csv(results: &GridResults, path: &Path) -> Result<()> {
    let mut out = String::from(
        "scenario,scoring,strategy,seed,config_hash,epochs_run,best_epoch,stopped_early,\
         failed_epoch,val_best_error,test_error,test_macro_f1,weight_corrupted_mean,\
         weight_clean_mean\n",
    );
    for cell in &results.cells {
        for run in &cell.runs {
            let val_best = run
                .val_error_curve
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            let (wc, wl) = run
                .weight_audit
                .map_or((String::new(), String::new()), |a| {
                    (fmt_f(a.corrupted_mean), fmt_f(a.clean_mean))
                });
            out.push_str(&format!(
                "{},{},{},{},{:016x},{},{},{},{},{},{},{},{},{}\n",
                cell.scenario,
                cell.scoring,
                cell.strategy,
                run.seed,
                run.config_hash,
                run.epochs_run,
                run.best_epoch,
                run.stopped_early,
                run.failed.map_or(String::new(), |e| e.to_string()),
                fmt_f(val_best),
                fmt_f(run.test.error_rate),
                fmt_f(run.test.macro_f1),
                wc,
                wl,
            ));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_epochs_csv(results: &GridResults, path: &Path) -> Result<()> {
    let mut out = String::from("scenario,scoring,strategy,seed,epoch,val_error,subset_size\n");
    for cell in &results.cells {
        for run in &cell.runs {
            for (i, &err) in run.val_error_curve.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    cell.scenario,
                    cell.scoring,
                    cell.strategy,
                    run.seed,
                    i + 1,
                    fmt_f(err),
                    run.subset_sizes[i],
                ));
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_classf1_csv(results: &GridResults, path: &Path) -> Result<()> {
    let mut out = String::from("scenario,scoring,strategy,seed,class,test_f1\n");
    for cell in &results.cells {
        for run in &cell.runs {
            for (class, &f1) in run.test.per_class_f1.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    cell.scenario,
                    cell.scoring,
                    cell.strategy,
                    run.seed,
                    class,
                    fmt_f(f1),
                ));
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Rows grouped as (scenario, scoring, strategy) -> per-seed error rates,
/// preserving first-seen order.
struct CellTable {
    keys: Vec<(String, String, String)>,
    errors: Vec<Vec<f64>>,
    curves: Vec<Vec<(usize, f64)>>,
}

impl CellTable {
    fn new() -> Self {
        CellTable {
            keys: Vec::new(),
            errors: Vec::new(),
            curves: Vec::new(),
        }
    }

    fn index(&mut self, scenario: &str, scoring: &str, strategy: &str) -> usize {
        let key = (
            scenario.to_string(),
            scoring.to_string(),
            strategy.to_string(),
        );
        if let Some(pos) = self.keys.iter().position(|k| *k == key) {
            return pos;
        }
        self.keys.push(key);
        self.errors.push(Vec::new());
        self.curves.push(Vec::new());
        self.keys.len() - 1
    }

    fn find(&self, scenario: &str, scoring: &str, strategy: &str) -> Option<usize> {
        self.keys
            .iter()
            .position(|k| k.0 == scenario && k.1 == scoring && k.2 == strategy)
    }

    fn scenarios(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (s, _, _) in &self.keys {
            if !out.contains(s) {
                out.push(s.clone());
            }
        }
        out
    }
}

fn table_from_results(results: &GridResults) -> CellTable {
    let mut table = CellTable::new();
    for cell in &results.cells {
        let idx = table.index(&cell.scenario, &cell.scoring, &cell.strategy);
        for run in &cell.runs {
            if run.failed.is_none() {
                table.errors[idx].push(run.test.error_rate);
            }
            for (i, &err) in run.val_error_curve.iter().enumerate() {
                table.curves[idx].push((i + 1, err));
            }
        }
    }
    table
}

fn aggregate_text(table: &CellTable) -> String {
    let mut out = String::from("scenario,scoring");
    for col in STRATEGY_COLUMNS {
        out.push(',');
        out.push_str(col);
    }
    out.push('\n');

    for scenario in table.scenarios() {
        let baseline_errors = table
            .find(&scenario, "-", "baseline")
            .map(|i| table.errors[i].clone())
            .unwrap_or_default();
        for scoring in ["prior", "uncertainty"] {
            out.push_str(&scenario);
            out.push(',');
            out.push_str(scoring);
            for col in STRATEGY_COLUMNS {
                out.push(',');
                // shared cells live under scoring `-`
                let idx = table
                    .find(&scenario, scoring, col)
                    .or_else(|| table.find(&scenario, "-", col));
                let Some(idx) = idx else {
                    continue;
                };
                let errors = &table.errors[idx];
                if errors.is_empty() {
                    continue;
                }
                let cell_mean = mean(errors);
                let mut text = format!("{cell_mean:.2}");
                if col != "baseline" && errors.len() >= 2 && baseline_errors.len() >= 2 {
                    if let Ok((_, p)) = welch_t_test(errors, &baseline_errors) {
                        if p < 0.05 {
                            text.push('*');
                        }
                    }
                }
                out.push_str(&text);
            }
            out.push('\n');
        }
    }
    out
}

fn curves_text(table: &CellTable) -> String {
    let mut out = String::from("scenario,scoring,strategy,epoch,mean_val_error\n");
    for (idx, (scenario, scoring, strategy)) in table.keys.iter().enumerate() {
        let points = &table.curves[idx];
        if points.is_empty() {
            continue;
        }
        let max_epoch = points.iter().map(|&(e, _)| e).max().unwrap_or(0);
        for epoch in 1..=max_epoch {
            let values: Vec<f64> = points
                .iter()
                .filter(|&&(e, _)| e == epoch)
                .map(|&(_, v)| v)
                .collect();
            if values.is_empty() {
                continue;
            }
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                scenario,
                scoring,
                strategy,
                epoch,
                fmt_f(mean(&values)),
            ));
        }
    }
    out
}

/// Write all result CSVs into `out_dir` (created if missing).
pub fn emit_results(results: &GridResults, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    write_runs_csv(results, &out_dir.join("runs.csv"))?;
    write_epochs_csv(results, &out_dir.join("epochs.csv"))?;
    write_classf1_csv(results, &out_dir.join("classf1.csv"))?;
    let table = table_from_results(results);
    fs::write(out_dir.join("aggregate.csv"), aggregate_text(&table))?;
    fs::write(out_dir.join("curves.csv"), curves_text(&table))?;
    Ok(())
}

fn parse_csv_line(line: &str) -> Vec<&str> {
    line.split(',').collect()
}

/// Rebuild `aggregate.csv` and `curves.csv` from the persisted
/// `runs.csv` / `epochs.csv` in `dir`.
pub fn regenerate_reports(dir: &Path) -> Result<()> {
    let runs_text = fs::read_to_string(dir.join("runs.csv"))
        .map_err(|e| Error::Harness(format!("cannot read runs.csv: {e}")))?;
    let epochs_text = fs::read_to_string(dir.join("epochs.csv"))
        .map_err(|e| Error::Harness(format!("cannot read epochs.csv: {e}")))?;

    let mut table = CellTable::new();
    for line in runs_text.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields = parse_csv_line(line);
        if fields.len() < 12 {
            return Err(Error::Harness(format!("malformed runs.csv row: {line}")));
        }
        let idx = table.index(fields[0], fields[1], fields[2]);
        let failed = !fields[8].is_empty();
        if !failed {
            let err: f64 = fields[10]
                .parse()
                .map_err(|_| Error::Harness(format!("bad test_error in: {line}")))?;
            table.errors[idx].push(err);
        }
    }
    for line in epochs_text.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields = parse_csv_line(line);
        if fields.len() < 7 {
            return Err(Error::Harness(format!("malformed epochs.csv row: {line}")));
        }
        let idx = table.index(fields[0], fields[1], fields[2]);
        let epoch: usize = fields[4]
            .parse()
            .map_err(|_| Error::Harness(format!("bad epoch in: {line}")))?;
        let err: f64 = fields[5]
            .parse()
            .map_err(|_| Error::Harness(format!("bad val_error in: {line}")))?;
        table.curves[idx].push((epoch, err));
    }

    fs::write(dir.join("aggregate.csv"), aggregate_text(&table))?;
    fs::write(dir.join("curves.csv"), curves_text(&table))?;
    Ok(())
}

/// Write one provenance block per (scenario, seed) describing how the
/// training split of that run was derived.
pub fn emit_provenance(
    bundle: &super::DataBundle,
    scenarios: &[super::Scenario],
    seeds: &[u64],
    out_dir: &Path,
) -> Result<()> {
    use crate::rng::RunStreams;
    let mut out = String::new();
    for scenario in scenarios {
        for &seed in seeds {
            let mut streams = RunStreams::new(seed);
            let train = scenario.apply(&bundle.train, &mut streams)?;
            let label = scenario.label();
            for line in train.provenance_text().lines() {
                out.push_str(&format!("{label}.seed{seed}.{line}\n"));
            }
        }
    }
    fs::write(out_dir.join("provenance.txt"), out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Metrics;

    fn fake_run(seed: u64, err: f64) -> RunResult {
        RunResult {
            seed,
            config_hash: 0xABCD,
            val_error_curve: vec![50.0, err],
            best_epoch: 2,
            epochs_run: 2,
            stopped_early: false,
            test: Metrics {
                error_rate: err,
                macro_f1: 100.0 - err,
                per_class_f1: vec![100.0 - err; 3],
                confusion: vec![vec![0; 3]; 3],
            },
            failed: None,
            wall_secs: 0.1,
            subset_sizes: vec![10, 10],
            weight_audit: None,
        }
    }

    fn fake_results() -> GridResults {
        let mk = |scoring: &str, strategy: &str, errs: &[f64]| CellResult {
            scenario: "full".to_string(),
            scoring: scoring.to_string(),
            strategy: strategy.to_string(),
            summary: crate::experiments::summarize(errs).unwrap(),
            runs: errs
                .iter()
                .enumerate()
                .map(|(i, &e)| fake_run(i as u64, e))
                .collect(),
        };
        GridResults {
            cells: vec![
                mk("-", "baseline", &[10.0, 11.0, 12.0]),
                mk("prior", "subsets-cl", &[5.0, 5.5, 6.0]),
                mk("prior", "reorder-cl", &[10.0, 11.5, 11.5]),
            ],
        }
    }

    #[test]
    fn emit_is_deterministic_and_regeneration_matches() {
        let dir = std::env::temp_dir().join(format!("curricle-report-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let results = fake_results();
        emit_results(&results, &dir).unwrap();
        let agg1 = fs::read_to_string(dir.join("aggregate.csv")).unwrap();
        let curves1 = fs::read_to_string(dir.join("curves.csv")).unwrap();

        emit_results(&results, &dir).unwrap();
        let agg2 = fs::read_to_string(dir.join("aggregate.csv")).unwrap();
        assert_eq!(agg1, agg2);

        // regeneration from the persisted CSVs is byte-identical
        fs::remove_file(dir.join("aggregate.csv")).unwrap();
        fs::remove_file(dir.join("curves.csv")).unwrap();
        regenerate_reports(&dir).unwrap();
        assert_eq!(fs::read_to_string(dir.join("aggregate.csv")).unwrap(), agg1);
        assert_eq!(fs::read_to_string(dir.join("curves.csv")).unwrap(), curves1);
    }

    #[test]
    fn aggregate_marks_significant_cells() {
        let dir = std::env::temp_dir().join(format!("curricle-agg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        emit_results(&fake_results(), &dir).unwrap();
        let agg = fs::read_to_string(dir.join("aggregate.csv")).unwrap();
        let prior_row: Vec<&str> = agg
            .lines()
            .find(|l| l.starts_with("full,prior"))
            .unwrap()
            .split(',')
            .collect();
        // columns: scenario,scoring,baseline,reorder-anti,reorder-cl,subsets-random,
        //          subsets-anti,subsets-cl,...
        assert_eq!(prior_row[2], "11.00");
        // subsets-cl clearly separated from baseline -> starred
        assert_eq!(prior_row[7], "5.50*");
        // reorder-cl overlaps baseline -> no star
        assert!(!prior_row[4].contains('*'));
    }

    #[test]
    fn empty_results_emit_headers_only() {
        let dir = std::env::temp_dir().join(format!("curricle-empty-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let results = GridResults { cells: Vec::new() };
        emit_results(&results, &dir).unwrap();
        let runs = fs::read_to_string(dir.join("runs.csv")).unwrap();
        assert_eq!(runs.lines().count(), 1);
        let agg = fs::read_to_string(dir.join("aggregate.csv")).unwrap();
        assert_eq!(agg.lines().count(), 1);
    }
}
