//! Batch subcommands: detect, eval, synth, entropy.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use trident_core::data::{generate_synthetic, load_csv, write_csv, Series};
use trident_core::diagnostics::{entropy_overlay, permutation_entropy, windowed_prf, EvalResult};
use trident_core::ensemble::{fit, Detection};
use trident_core::evt::Verdict;

use crate::config::{OutputFormat, RunConfig, RunMeta};
use crate::failure::{CliResult, Failure};

/// One detections-file line: a per-point record tagged with its KPI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionRecord {
    #[serde(default)]
    pub kpi: Option<String>,
    #[serde(flatten)]
    pub detection: Detection,
}

pub fn detect(config: &RunConfig, train: &Path, test: &Path, out: &Path) -> CliResult<()> {
    config.ensemble.validate().map_err(Failure::from)?;
    let train_series = load_csv(train, &config.csv).map_err(Failure::from)?;
    let test_series = load_csv(test, &config.csv).map_err(Failure::from)?;

    let train_map: BTreeMap<&str, &Series> =
        train_series.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut pairs = Vec::new();
    for t in &test_series {
        match train_map.get(t.id.as_str()) {
            Some(tr) => pairs.push((*tr, t)),
            None => {
                return Err(Failure::config(format!(
                    "test KPI '{}' has no training series",
                    t.id
                )))
            }
        }
    }

    // One independent pipeline per KPI; results keyed for stable output order.
    let results: Result<BTreeMap<String, Vec<Detection>>, Failure> = pairs
        .par_iter()
        .map(|(tr, te)| {
            let mut pipeline = fit(tr, config.ensemble.clone())?;
            let detections = pipeline.detect_batch(te)?;
            Ok((te.id.clone(), detections))
        })
        .collect();
    let results = results?;

    let meta = RunMeta::new(config);
    let learner_names: Vec<&str> = config.ensemble.learners.iter().map(|k| k.name()).collect();
    let mut file = std::fs::File::create(out)
        .map_err(|e| Failure::io(format!("cannot create {}: {e}", out.display())))?;
    match config.format {
        OutputFormat::Jsonl => {
            writeln!(file, "{}", serde_json::to_string(&meta).unwrap())?;
            for (kpi, detections) in &results {
                for d in detections {
                    let record = DetectionRecord {
                        kpi: Some(kpi.clone()),
                        detection: d.clone(),
                    };
                    writeln!(file, "{}", serde_json::to_string(&record).unwrap())?;
                }
            }
        }
        OutputFormat::Csv => {
            writeln!(file, "{}", meta.csv_comment())?;
            writeln!(file, "kpi,{}", Detection::csv_header(&learner_names))?;
            for (kpi, detections) in &results {
                for d in detections {
                    writeln!(file, "{kpi},{}", d.csv_row(&learner_names))?;
                }
            }
        }
    }
    Ok(())
}

/// Read a JSON-lines detections file, skipping the metadata header.
pub fn read_detections(path: &Path) -> CliResult<Vec<DetectionRecord>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Failure::io(format!("{}:{}: bad JSON: {e}", path.display(), i + 1)))?;
        if value.get("meta").is_some() {
            continue;
        }
        let record: DetectionRecord = serde_json::from_value(value)
            .map_err(|e| Failure::io(format!("{}:{}: bad record: {e}", path.display(), i + 1)))?;
        records.push(record);
    }
    Ok(records)
}

#[derive(Debug, Serialize)]
struct ScopeReport {
    scope: String,
    overall: EvalResult,
    per_kpi: BTreeMap<String, EvalResult>,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    t_window: usize,
    results: Vec<ScopeReport>,
}

/// Indices of flagged points under a scope: the ensemble verdict, or one
/// learner's own anomaly verdicts.
fn flagged_positions(records: &[(usize, &DetectionRecord)], scope: &str) -> Vec<usize> {
    records
        .iter()
        .filter(|(_, r)| match scope {
            "ensemble" => r.detection.ensemble,
            name => r
                .detection
                .learners
                .get(name)
                .map(|l| l.verdict == Verdict::Anomaly)
                .unwrap_or(false),
        })
        .map(|(pos, _)| *pos)
        .collect()
}

pub fn eval(
    config: &RunConfig,
    detections_path: &Path,
    labels_path: &Path,
    ablation: bool,
    out: Option<&Path>,
) -> CliResult<()> {
    let records = read_detections(detections_path)?;
    let labels = load_csv(labels_path, &config.csv).map_err(Failure::from)?;

    // Group detection records by KPI; a missing tag binds to the sole label
    // series when that is unambiguous.
    let mut grouped: BTreeMap<String, Vec<&DetectionRecord>> = BTreeMap::new();
    for r in &records {
        let kpi = match (&r.kpi, labels.len()) {
            (Some(k), _) => k.clone(),
            (None, 1) => labels[0].id.clone(),
            (None, n) => {
                return Err(Failure::compute(format!(
                    "untagged detection cannot be matched against {n} labelled series"
                )))
            }
        };
        grouped.entry(kpi).or_default().push(r);
    }

    let mut scopes = vec!["ensemble".to_string()];
    if ablation {
        for k in &config.ensemble.learners {
            scopes.push(k.name().to_string());
        }
    }

    let mut results = Vec::new();
    for scope in scopes {
        let mut per_kpi = BTreeMap::new();
        let mut totals = (0usize, 0usize, 0usize);
        for (kpi, recs) in &grouped {
            let series = labels
                .iter()
                .find(|s| &s.id == kpi)
                .ok_or_else(|| Failure::compute(format!("no labelled series for KPI '{kpi}'")))?;
            let ts_to_pos: BTreeMap<i64, usize> = series
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| (p.timestamp, i))
                .collect();
            // Every detection must land on a labelled timestamp.
            let mut positioned = Vec::with_capacity(recs.len());
            for r in recs.iter() {
                let pos = ts_to_pos.get(&r.detection.timestamp).ok_or_else(|| {
                    Failure::compute(format!(
                        "detection timestamp {} not present in labels for '{kpi}'",
                        r.detection.timestamp
                    ))
                })?;
                positioned.push((*pos, *r));
            }
            let lo = positioned.iter().map(|(p, _)| *p).min().unwrap_or(0);
            let hi = positioned.iter().map(|(p, _)| *p).max().unwrap_or(0);
            // Truth restricted to the evaluated span.
            let truth: Vec<usize> = series
                .labeled_indices()
                .into_iter()
                .filter(|i| (lo..=hi).contains(i))
                .collect();
            let pred = flagged_positions(&positioned, &scope);
            let result = windowed_prf(&pred, &truth, config.t_window).map_err(Failure::from)?;
            totals.0 += result.true_positives;
            totals.1 += result.false_positives;
            totals.2 += result.false_negatives;
            per_kpi.insert(kpi.clone(), result);
        }
        results.push(ScopeReport {
            scope,
            overall: EvalResult::from_counts(totals.0, totals.1, totals.2, config.t_window),
            per_kpi,
        });
    }

    let report = EvalReport {
        t_window: config.t_window,
        results,
    };
    let text = serde_json::to_string_pretty(&report).unwrap();
    match out {
        Some(p) => std::fs::write(p, text + "\n")
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", p.display())))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn parse_anomaly_spec(spec: &str) -> CliResult<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (idx, mag) = part.split_once(':').ok_or_else(|| {
            Failure::config(format!("bad anomaly '{part}', expected index:magnitude"))
        })?;
        let idx = idx
            .trim()
            .parse::<usize>()
            .map_err(|e| Failure::config(format!("bad anomaly index '{idx}': {e}")))?;
        let mag = mag
            .trim()
            .parse::<f64>()
            .map_err(|e| Failure::config(format!("bad anomaly magnitude '{mag}': {e}")))?;
        out.push((idx, mag));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn synth(
    config: &RunConfig,
    periods: usize,
    period_len: usize,
    noise_sigma: f64,
    anomalies: &str,
    out: &Path,
    split_at: Option<usize>,
    train_out: Option<&Path>,
    test_out: Option<&Path>,
) -> CliResult<()> {
    let spec = parse_anomaly_spec(anomalies)?;
    let series = generate_synthetic(periods, period_len, noise_sigma, &spec, config.seed)
        .map_err(Failure::from)?;
    write_csv(out, std::slice::from_ref(&series), &config.csv).map_err(Failure::from)?;
    if let Some(split) = split_at {
        if split == 0 || split >= series.len() {
            return Err(Failure::config(format!(
                "split index {split} outside 1..{}",
                series.len()
            )));
        }
        let train = series.slice(0..split).map_err(Failure::from)?;
        let test = series.slice(split..series.len()).map_err(Failure::from)?;
        write_csv(train_out.unwrap(), &[train], &config.csv).map_err(Failure::from)?;
        write_csv(test_out.unwrap(), &[test], &config.csv).map_err(Failure::from)?;
    }
    Ok(())
}

/// Pick one series from a file, by KPI id when given.
pub fn select_series(mut series: Vec<Series>, kpi: Option<&str>) -> CliResult<Series> {
    match kpi {
        Some(id) => series
            .into_iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Failure::config(format!("no series with KPI id '{id}'"))),
        None if series.len() == 1 => Ok(series.pop().unwrap()),
        None => Err(Failure::config(format!(
            "file holds {} series; pick one with --kpi",
            series.len()
        ))),
    }
}

pub fn entropy(
    config: &RunConfig,
    input: &Path,
    kpi: Option<&str>,
    window: usize,
    order: usize,
    out: &Path,
) -> CliResult<()> {
    let series = select_series(load_csv(input, &config.csv).map_err(Failure::from)?, kpi)?;
    let profile = permutation_entropy(&series.values(), order, window).map_err(Failure::from)?;
    let rows = entropy_overlay(&series, &profile).map_err(Failure::from)?;
    let mut file = std::fs::File::create(out)
        .map_err(|e| Failure::io(format!("cannot create {}: {e}", out.display())))?;
    writeln!(file, "{}", RunMeta::new(config).csv_comment())?;
    writeln!(file, "timestamp,value,entropy")?;
    for r in rows {
        writeln!(file, "{},{},{}", r.timestamp, r.value, r.entropy)?;
    }
    Ok(())
}
