//! Artifact writers: metrics.csv, sweep_summary.csv, atlas CSVs, the eval
//! JSON dump, and the emitted plot script.
//!
//! Floats are written with Rust's shortest round-trip formatting, so files
//! are byte-identical across runs of the same seed and parse back exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use emcom_core::atlas::MessageAtlas;
use emcom_core::training::{EpochRecord, EvalReport};
use emcom_core::Result;

pub const METRICS_HEADER: &str = "epoch,actor_loss,value_loss,batch_accuracy,seen_acc,unseen_acc";
pub const SWEEP_HEADER: &str = "r_a,seed,final_seen_acc,final_unseen_acc,epochs_run";
/// Marker for an undefined metric (no unseen tasks at r_a = 1).
pub const NOT_APPLICABLE: &str = "NA";

pub struct MetricsWriter {
    out: BufWriter<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path)?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{METRICS_HEADER}")?;
        Ok(Self { out })
    }

    /// One row per epoch; the accuracy columns stay empty on epochs without
    /// an evaluation and show `NA` when evaluated but undefined.
    pub fn write_record(&mut self, record: &EpochRecord) -> Result<()> {
        let (seen, unseen) = match &record.eval {
            Some(eval) => (
                eval.seen_accuracy.to_string(),
                eval.unseen_accuracy
                    .map(|u| u.to_string())
                    .unwrap_or_else(|| NOT_APPLICABLE.to_string()),
            ),
            None => (String::new(), String::new()),
        };
        writeln!(
            self.out,
            "{},{},{},{},{},{}",
            record.epoch,
            record.metrics.actor_loss,
            record.metrics.value_loss,
            record.metrics.batch_accuracy,
            seen,
            unseen
        )?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Outcome of one sweep cell, as written to sweep_summary.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r_a: f64,
    pub seed: u64,
    pub final_seen_acc: f64,
    pub final_unseen_acc: Option<f64>,
    pub epochs_run: usize,
}

pub fn write_sweep_summary(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{SWEEP_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.r_a,
            row.seed,
            row.final_seen_acc,
            row.final_unseen_acc
                .map(|u| u.to_string())
                .unwrap_or_else(|| NOT_APPLICABLE.to_string()),
            row.epochs_run
        )?;
    }
    out.flush()?;
    Ok(())
}

/// atlas.csv: `task_index,owner,m00..` with one row per task.
pub fn write_atlas(path: &Path, atlas: &MessageAtlas) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let width = atlas.rows.first().map_or(0, |r| r.values.len());
    write!(out, "task_index,owner")?;
    for i in 0..width {
        write!(out, ",m{i:02}")?;
    }
    writeln!(out)?;
    for row in &atlas.rows {
        write!(out, "{},{}", row.task_index, row.owner)?;
        for v in &row.values {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// similarity.csv: a bare num_tasks x num_tasks matrix, no header.
pub fn write_similarity(path: &Path, atlas: &MessageAtlas) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let n = atlas.num_tasks();
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                write!(out, ",")?;
            }
            write!(out, "{}", atlas.similarity(i, j))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_eval_json(path: &Path, report: &EvalReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Renders unseen (and seen) accuracy against r_a from sweep_summary.csv.
const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Render final accuracy against r_a from sweep_summary.csv."""
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "sweep_summary.csv"
unseen = defaultdict(list)
seen = defaultdict(list)
with open(path) as fh:
    for row in csv.DictReader(fh):
        r_a = float(row["r_a"])
        seen[r_a].append(float(row["final_seen_acc"]))
        if row["final_unseen_acc"] != "NA":
            unseen[r_a].append(float(row["final_unseen_acc"]))

fig, ax = plt.subplots(figsize=(6.4, 4.2))
xs = sorted(unseen)
means = [sum(unseen[x]) / len(unseen[x]) for x in xs]
ax.plot(xs, means, marker="o", color="tab:blue", label="unseen accuracy (mean)")
ax.fill_between(
    xs,
    [min(unseen[x]) for x in xs],
    [max(unseen[x]) for x in xs],
    color="tab:blue",
    alpha=0.2,
    label="seed range",
)
sx = sorted(seen)
ax.plot(
    sx,
    [sum(seen[x]) / len(seen[x]) for x in sx],
    marker="s",
    linestyle="--",
    color="tab:orange",
    label="seen accuracy (mean)",
)
ax.axhline(0.5, linestyle=":", linewidth=1, color="gray", label="chance")
ax.set_xlabel("r_a (actor overlap beyond owned tasks)")
ax.set_ylabel("final accuracy")
ax.set_ylim(0.0, 1.05)
ax.legend(loc="lower right")
fig.tight_layout()
fig.savefig("sweep_plot.png", dpi=150)
print("wrote sweep_plot.png")
"#;

pub fn write_plot_script(path: &Path) -> Result<()> {
    std::fs::write(path, PLOT_SCRIPT)?;
    Ok(())
}
