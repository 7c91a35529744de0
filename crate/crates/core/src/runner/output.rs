use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ExperimentKind, ExperimentPlan, ExperimentResult, ReplicaRecord};
use crate::engine::FptStatus;
use crate::error::{Error, Result};

/// One row of a sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRow {
    pub x: f64,
    pub replica: u64,
    pub tau: Option<u64>,
    /// `hit`, `extinct`, `timeout` or `failed`.
    pub status: String,
    pub peak_size: Option<usize>,
    pub purge_events: Option<u64>,
    pub restarts: u32,
}

impl From<&ReplicaRecord> for ReplicaRow {
    fn from(rec: &ReplicaRecord) -> Self {
        match &rec.outcome {
            Ok(o) => {
                let (tau, status) = match o.status {
                    FptStatus::Hit { tau, .. } => (Some(tau), "hit"),
                    FptStatus::Extinct { .. } => (None, "extinct"),
                    FptStatus::Timeout { .. } => (None, "timeout"),
                };
                ReplicaRow {
                    x: rec.x,
                    replica: rec.replica,
                    tau,
                    status: status.into(),
                    peak_size: Some(o.peak_size),
                    purge_events: Some(o.purge_events),
                    restarts: o.restarts,
                }
            }
            Err(e) => ReplicaRow {
                x: rec.x,
                replica: rec.replica,
                tau: None,
                status: "failed".into(),
                peak_size: None,
                purge_events: None,
                restarts: e.restart.unwrap_or(0),
            },
        }
    }
}

pub fn read_replica_csv(path: &Path) -> Result<Vec<ReplicaRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    reader
        .deserialize()
        .map(|row| {
            row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        })
        .collect()
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    stem.with_file_name(name)
}

pub(super) fn write_all(plan: &ExperimentPlan, result: &ExperimentResult) -> Result<Vec<PathBuf>> {
    if let Some(dir) = plan.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut files = Vec::new();
    match plan.kind {
        ExperimentKind::FptSweep => {
            let path = with_suffix(&plan.output, ".csv");
            let mut w = writer(&path)?;
            for rec in &result.records {
                w.serialize(ReplicaRow::from(rec))?;
            }
            w.flush()?;
            files.push(path);

            let path = with_suffix(&plan.output, "_summary.csv");
            let mut w = writer(&path)?;
            w.write_record([
                "x",
                "n_hits",
                "n_extinct",
                "n_timeout",
                "n_failed",
                "mean",
                "std",
                "q05",
                "q25",
                "q50",
                "q75",
                "q95",
                "prediction",
                "gap_mean",
                "gap_median",
            ])?;
            for s in &result.summaries {
                let opt = |v: Option<String>| v.unwrap_or_default();
                let mut row = vec![
                    s.x.to_string(),
                    s.n_hits.to_string(),
                    s.n_extinct.to_string(),
                    s.n_timeout.to_string(),
                    s.n_failed.to_string(),
                    opt(s.summary.as_ref().map(|m| m.mean.to_string())),
                    opt(s.summary.as_ref().map(|m| m.std.to_string())),
                ];
                for level in crate::stats::QUANTILE_LEVELS {
                    row.push(opt(s
                        .summary
                        .as_ref()
                        .and_then(|m| m.quantile(level))
                        .map(|q| q.to_string())));
                }
                row.push(opt(s.prediction.map(|p| p.to_string())));
                row.push(opt(s.gap.map(|g| g.gap_mean.to_string())));
                row.push(opt(s.gap.map(|g| g.gap_median.to_string())));
                w.write_record(&row)?;
            }
            w.flush()?;
            files.push(path);
        }
        ExperimentKind::TheoryOnly => {
            if let Some(theory) = &result.theory {
                let path = with_suffix(&plan.output, "_theory.csv");
                let mut w = writer(&path)?;
                w.write_record(["x", "leading", "log_correction", "total"])?;
                for p in &theory.predictions {
                    w.write_record([
                        p.x.to_string(),
                        p.leading.to_string(),
                        p.log_correction.to_string(),
                        p.total.to_string(),
                    ])?;
                }
                w.flush()?;
                files.push(path);
            }
        }
        ExperimentKind::FrontierCount => {
            if let Some(frontier) = &result.frontier {
                let path = with_suffix(&plan.output, ".csv");
                let mut w = writer(&path)?;
                w.write_record(["replica", "x", "count", "population", "restarts"])?;
                for (r, c) in frontier.replicas.iter().enumerate() {
                    for (x, count) in &c.counts {
                        w.write_record([
                            r.to_string(),
                            x.to_string(),
                            count.to_string(),
                            c.population.to_string(),
                            c.restarts.to_string(),
                        ])?;
                    }
                }
                w.flush()?;
                files.push(path);
            }
        }
    }

    let path = with_suffix(&plan.output, ".json");
    let created_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let sidecar = json!({
        "kind": plan.kind,
        "provenance": {
            "master_seed": plan.master_seed,
            "config_sha256": plan.config_hash,
            "version": env!("CARGO_PKG_VERSION"),
            "created_unix": created_unix,
        },
        "model": plan.model_spec,
        "offspring": {
            "p0": plan.offspring.p0(),
            "p1": plan.offspring.p1(),
            "p3": plan.offspring.p3(),
            "mode": plan.offspring.mode(),
        },
        "d": plan.d,
        "x_values": plan.x_values,
        "radius": plan.radius,
        "q_c": plan.purge.map(|r| r.q_c()),
        "samples": plan.samples,
        "max_steps": plan.max_steps,
        "count_pending_hits": plan.count_pending_hits,
        "extinction": plan.extinction,
        "max_restarts": plan.max_restarts,
        "theory": result.theory,
        "summaries": result.summaries,
        "frontier": result.frontier.as_ref().map(|f| json!({
            "steps": f.steps,
            "m_n": f.m_n,
            "c1": f.c1,
            "c2": f.c2,
            "surviving_replicas": f.replicas.len(),
            "mean_counts": f.mean_counts,
            "slope": f.slope,
        })),
        "errors": result.errors,
    });
    std::fs::write(&path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    files.push(path);
    Ok(files)
}
