//! The four subcommands.

use std::path::{Path, PathBuf};

use emcom_core::atlas::build_message_atlas;
use emcom_core::checkpoint::load_checkpoint;
use emcom_core::config::{load_run_config, load_sweep_config, RunConfig};
use emcom_core::task_family::enumerate_tables;
use emcom_core::training::{evaluate, EvalReport};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::args::{Command, CommonOpts};
use crate::artifacts::{self, SweepRow};
use crate::runner::{run_one, RunSummary};
use crate::CliError;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Train { config, opts } => cmd_train(&config, &opts),
        Command::Sweep { config, opts } => cmd_sweep(&config, &opts),
        Command::Eval { checkpoint, opts } => cmd_eval(&checkpoint, &opts),
        Command::Messages { checkpoint, opts } => cmd_messages(&checkpoint, &opts),
    }
}

fn cmd_train(config_path: &Path, opts: &CommonOpts) -> Result<(), CliError> {
    let mut config = load_run_config(config_path)?;
    if let Some(out) = &opts.out {
        config.out_dir = out.display().to_string();
    }
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    let summary = run_one(&config, opts.quiet)?;
    if !opts.quiet {
        println!(
            "done: final seen={} unseen={} ({} epochs); artifacts in {}",
            summary.final_seen_acc,
            summary
                .final_unseen_acc
                .map(|u| u.to_string())
                .unwrap_or_else(|| artifacts::NOT_APPLICABLE.into()),
            summary.epochs_run,
            summary.out_dir.display()
        );
    }
    Ok(())
}

fn cmd_sweep(config_path: &Path, opts: &CommonOpts) -> Result<(), CliError> {
    let mut sweep = load_sweep_config(config_path)?;
    if let Some(out) = &opts.out {
        sweep.base.out_dir = out.display().to_string();
    }
    if let Some(seed) = opts.seed {
        sweep.seeds = vec![seed];
    }
    sweep.validate()?;

    let root = PathBuf::from(&sweep.base.out_dir);
    std::fs::create_dir_all(&root).map_err(emcom_core::Error::from)?;
    std::fs::write(root.join("sweep_config.json"), sweep.to_json_pretty())
        .map_err(emcom_core::Error::from)?;

    let mut cells: Vec<RunConfig> = Vec::new();
    for &r_a in &sweep.r_a_values {
        for &seed in &sweep.seeds {
            let mut cell = sweep.base.clone();
            cell.r_a = r_a;
            cell.seed = seed;
            cell.out_dir = root
                .join(format!("ra{r_a}_seed{seed}"))
                .display()
                .to_string();
            cells.push(cell);
        }
    }

    let quiet = opts.quiet;
    let run_cell = |cell: &RunConfig| -> (f64, u64, emcom_core::Result<RunSummary>) {
        (cell.r_a, cell.seed, run_one(cell, quiet))
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<(f64, u64, emcom_core::Result<RunSummary>)> =
        cells.par_iter().map(run_cell).collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<(f64, u64, emcom_core::Result<RunSummary>)> =
        cells.iter().map(run_cell).collect();

    let mut rows: Vec<SweepRow> = Vec::new();
    let mut failures: Vec<String> = Vec::new();
    for (r_a, seed, outcome) in outcomes {
        match outcome {
            Ok(summary) => rows.push(SweepRow {
                r_a,
                seed,
                final_seen_acc: summary.final_seen_acc,
                final_unseen_acc: summary.final_unseen_acc,
                epochs_run: summary.epochs_run,
            }),
            Err(e) => {
                eprintln!("sweep cell r_a={r_a} seed={seed} failed: {e}");
                failures.push(format!("r_a={r_a} seed={seed}: {e}"));
            }
        }
    }
    rows.sort_by(|a, b| {
        a.r_a
            .partial_cmp(&b.r_a)
            .expect("validated r_a values")
            .then(a.seed.cmp(&b.seed))
    });

    artifacts::write_sweep_summary(&root.join("sweep_summary.csv"), &rows)?;
    artifacts::write_plot_script(&root.join("plot_sweep.py"))?;

    if !quiet {
        println!("sweep summary ({} of {} cells):", rows.len(), cells.len());
        println!("  {}", artifacts::SWEEP_HEADER);
        for row in &rows {
            println!(
                "  {},{},{},{},{}",
                row.r_a,
                row.seed,
                row.final_seen_acc,
                row.final_unseen_acc
                    .map(|u| u.to_string())
                    .unwrap_or_else(|| artifacts::NOT_APPLICABLE.into()),
                row.epochs_run
            );
        }
        println!("artifacts in {}", root.display());
    }

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::PartialSweep(failures))
    }
}

fn print_report(report: &EvalReport) {
    println!(
        "seen accuracy:   {} over {} rows",
        report.seen_accuracy, report.seen_count
    );
    match report.unseen_accuracy {
        Some(u) => println!("unseen accuracy: {} over {} rows", u, report.unseen_count),
        None => println!(
            "unseen accuracy: {} (no unseen tasks)",
            artifacts::NOT_APPLICABLE
        ),
    }
    for agent in &report.per_agent {
        println!(
            "  agent {}: seen {} ({} rows), unseen {} ({} rows)",
            agent.agent_id,
            agent.seen_accuracy,
            agent.seen_count,
            agent
                .unseen_accuracy
                .map(|u| u.to_string())
                .unwrap_or_else(|| artifacts::NOT_APPLICABLE.into()),
            agent.unseen_count
        );
    }
}

fn artifact_dir(checkpoint_path: &Path, opts: &CommonOpts) -> Result<PathBuf, CliError> {
    let dir = match &opts.out {
        Some(out) => out.clone(),
        None => checkpoint_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    std::fs::create_dir_all(&dir).map_err(emcom_core::Error::from)?;
    Ok(dir)
}

fn cmd_eval(checkpoint_path: &Path, opts: &CommonOpts) -> Result<(), CliError> {
    let checkpoint = load_checkpoint(checkpoint_path)?;
    let tables = enumerate_tables(checkpoint.config.n_inputs)?;
    let report = evaluate(
        &checkpoint.agents,
        &checkpoint.allocation,
        &tables,
        &checkpoint.task_ids,
    )?;
    if !opts.quiet {
        print_report(&report);
    }
    let dir = artifact_dir(checkpoint_path, opts)?;
    artifacts::write_eval_json(&dir.join("eval_report.json"), &report)?;
    Ok(())
}

fn cmd_messages(checkpoint_path: &Path, opts: &CommonOpts) -> Result<(), CliError> {
    let checkpoint = load_checkpoint(checkpoint_path)?;
    let atlas = build_message_atlas(
        &checkpoint.agents,
        &checkpoint.allocation,
        &checkpoint.task_ids,
    )?;
    let dir = artifact_dir(checkpoint_path, opts)?;
    artifacts::write_atlas(&dir.join("atlas.csv"), &atlas)?;
    artifacts::write_similarity(&dir.join("similarity.csv"), &atlas)?;
    if !opts.quiet {
        let contrast = atlas.similarity_contrast();
        println!(
            "{} tasks; mean cosine similarity: complementary pairs {}, all pairs {}",
            atlas.num_tasks(),
            contrast.complementary_mean,
            contrast.all_pairs_mean
        );
        println!("wrote atlas.csv and similarity.csv to {}", dir.display());
    }
    Ok(())
}
