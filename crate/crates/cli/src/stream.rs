//! Streaming detection over pipes: one JSON point in, one detection out,
//! flushed per point, with checkpoint/resume support.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use trident_core::data::{load_csv, TimePoint};
use trident_core::ensemble::{fit, EnsemblePipeline};
use trident_core::Error as CoreError;

use crate::commands::select_series;
use crate::config::{RunConfig, RunMeta};
use crate::failure::{CliResult, Failure};

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

extern "C" fn on_sigint(_: libc::c_int) {
    INTERRUPTED.store(true, Ordering::SeqCst);
}

fn install_sigint_handler() {
    unsafe {
        libc::signal(libc::SIGINT, on_sigint as *const () as libc::sighandler_t);
    }
}

/// Input line protocol.
#[derive(Debug, Deserialize)]
struct InputPoint {
    timestamp: i64,
    value: f64,
}

/// End-of-run summary, written to stderr.
#[derive(Debug, Serialize)]
struct StreamSummary {
    points: u64,
    seconds: f64,
    points_per_second: f64,
    skipped_malformed: u64,
    rejected_out_of_order: u64,
    interrupted: bool,
}

pub fn stream(
    config: &RunConfig,
    train: Option<&Path>,
    kpi: Option<&str>,
    resume: Option<&Path>,
    input: &str,
    checkpoint_out: Option<&Path>,
) -> CliResult<()> {
    let mut pipeline = build_pipeline(config, train, kpi, resume)?;
    install_sigint_handler();

    let reader: Box<dyn Read> = if input == "-" {
        Box::new(std::io::stdin())
    } else {
        Box::new(
            std::fs::File::open(input)
                .map_err(|e| Failure::io(format!("cannot open input {input}: {e}")))?,
        )
    };
    let reader = BufReader::new(reader);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let stderr = std::io::stderr();

    let mut points = 0u64;
    let mut skipped = 0u64;
    let mut rejected = 0u64;
    let started = Instant::now();

    for line in reader.lines() {
        if INTERRUPTED.load(Ordering::SeqCst) {
            break;
        }
        let line = line.map_err(|e| Failure::io(format!("stream read failed: {e}")))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let point: InputPoint = match serde_json::from_str(trimmed) {
            Ok(p) => p,
            Err(e) => {
                skipped += 1;
                writeln!(stderr.lock(), "warning: skipping malformed line: {e}").ok();
                continue;
            }
        };
        let tp = TimePoint {
            timestamp: point.timestamp,
            value: point.value,
            label: None,
        };
        match pipeline.stream_push(tp) {
            Ok(detection) => {
                points += 1;
                writeln!(out, "{}", serde_json::to_string(&detection).unwrap())
                    .map_err(|e| Failure::io(format!("stdout write failed: {e}")))?;
                out.flush().ok();
            }
            Err(
                e @ (CoreError::OutOfOrderTimestamp { .. } | CoreError::MisalignedTimestamp { .. }),
            ) => {
                rejected += 1;
                writeln!(stderr.lock(), "warning: rejected point: {e}").ok();
            }
            Err(e) => return Err(Failure::from(e)),
        }
    }

    if let Some(path) = checkpoint_out {
        let doc = pipeline.checkpoint().map_err(Failure::from)?;
        std::fs::write(path, doc)
            .map_err(|e| Failure::io(format!("cannot write checkpoint {}: {e}", path.display())))?;
    }

    let seconds = started.elapsed().as_secs_f64();
    let summary = StreamSummary {
        points,
        seconds,
        points_per_second: if seconds > 0.0 {
            points as f64 / seconds
        } else {
            f64::INFINITY
        },
        skipped_malformed: skipped,
        rejected_out_of_order: rejected,
        interrupted: INTERRUPTED.load(Ordering::SeqCst),
    };
    writeln!(
        stderr.lock(),
        "{}",
        serde_json::to_string(&summary).unwrap()
    )
    .ok();
    Ok(())
}

fn build_pipeline(
    config: &RunConfig,
    train: Option<&Path>,
    kpi: Option<&str>,
    resume: Option<&Path>,
) -> CliResult<EnsemblePipeline> {
    match (train, resume) {
        (_, Some(path)) => {
            let doc = std::fs::read_to_string(path).map_err(|e| {
                Failure::io(format!("cannot read checkpoint {}: {e}", path.display()))
            })?;
            EnsemblePipeline::restore(&doc).map_err(Failure::from)
        }
        (Some(path), None) => {
            config.ensemble.validate().map_err(Failure::from)?;
            let series = select_series(load_csv(path, &config.csv).map_err(Failure::from)?, kpi)?;
            eprintln!("{}", RunMeta::new(config).csv_comment());
            fit(&series, config.ensemble.clone()).map_err(Failure::from)
        }
        (None, None) => Err(Failure::config("stream needs either --train or --resume")),
    }
}
