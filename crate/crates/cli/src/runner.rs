//! One full training run: state construction, the loop, and every artifact.

use std::path::{Path, PathBuf};

use emcom_core::agents::Agent;
use emcom_core::atlas::build_message_atlas;
use emcom_core::checkpoint::{save_checkpoint, Checkpoint};
use emcom_core::config::RunConfig;
use emcom_core::protocol::{allocate, Allocation};
use emcom_core::rng::{substream, STREAM_ALLOCATION, STREAM_BATCHES, STREAM_INIT, STREAM_TASK_IDS};
use emcom_core::task_family::{
    assign_task_ids, build_dataset, enumerate_tables, TaskId, TrainingExample, TruthTable,
};
use emcom_core::training::{run_training, TrainOptions};
use emcom_core::Result;

use crate::artifacts::{self, MetricsWriter};

/// Everything a run derives from its config and seed before training starts.
pub struct RunState {
    pub tables: Vec<TruthTable>,
    pub task_ids: Vec<TaskId>,
    pub allocation: Allocation,
    pub agents: Vec<Agent>,
    pub dataset: Vec<TrainingExample>,
}

/// Deterministic state from config alone: one ChaCha stream per concern.
pub fn build_run_state(config: &RunConfig) -> Result<RunState> {
    let tables = enumerate_tables(config.n_inputs)?;
    let num_tasks = tables.len();
    let task_ids = assign_task_ids(num_tasks, &mut substream(config.seed, STREAM_TASK_IDS))?;
    let allocation = allocate(
        config.num_agents,
        num_tasks,
        config.r_a,
        &mut substream(config.seed, STREAM_ALLOCATION),
    )?;
    let mut init_rng = substream(config.seed, STREAM_INIT);
    let agents = (0..config.num_agents)
        .map(|a| {
            Agent::new(
                a,
                config.n_inputs,
                num_tasks,
                config.hidden_width,
                config.message_width,
                config.learning_rate,
                allocation.contextualise_set(a).clone(),
                allocation.actor_set(a).clone(),
                &mut init_rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let dataset = build_dataset(&tables)?;
    Ok(RunState {
        tables,
        task_ids,
        allocation,
        agents,
        dataset,
    })
}

/// Final metrics of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_seen_acc: f64,
    pub final_unseen_acc: Option<f64>,
    pub epochs_run: usize,
    pub out_dir: PathBuf,
}

/// Trains one config and writes metrics.csv, checkpoint.bin, atlas.csv,
/// similarity.csv and resolved_config.json into its output directory.
pub fn run_one(config: &RunConfig, quiet: bool) -> Result<RunSummary> {
    config.validate()?;
    let out_dir = Path::new(&config.out_dir);
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("resolved_config.json"),
        config.to_json_pretty(),
    )?;

    let mut state = build_run_state(config)?;
    let mut metrics = MetricsWriter::create(&out_dir.join("metrics.csv"))?;
    let mut train_rng = substream(config.seed, STREAM_BATCHES);
    let options = TrainOptions {
        epochs: config.epochs,
        batch_size: config.batch_size,
        eval_every: config.eval_every,
    };

    let mut write_error: Option<emcom_core::Error> = None;
    let records = run_training(
        &mut state.agents,
        &state.allocation,
        &state.tables,
        &state.task_ids,
        &state.dataset,
        &options,
        &mut train_rng,
        |record| {
            if write_error.is_none() {
                if let Err(e) = metrics.write_record(record) {
                    write_error = Some(e);
                }
            }
            if !quiet {
                if let Some(eval) = &record.eval {
                    println!(
                        "[{}] epoch {}/{}: actor_loss={:.4} seen={:.4} unseen={}",
                        config.out_dir,
                        record.epoch,
                        config.epochs,
                        record.metrics.actor_loss,
                        eval.seen_accuracy,
                        eval.unseen_accuracy
                            .map(|u| format!("{u:.4}"))
                            .unwrap_or_else(|| artifacts::NOT_APPLICABLE.into()),
                    );
                }
            }
        },
    )?;
    if let Some(e) = write_error {
        return Err(e);
    }
    metrics.finish()?;

    let atlas = build_message_atlas(&state.agents, &state.allocation, &state.task_ids)?;
    artifacts::write_atlas(&out_dir.join("atlas.csv"), &atlas)?;
    artifacts::write_similarity(&out_dir.join("similarity.csv"), &atlas)?;

    let checkpoint = Checkpoint {
        config: config.clone(),
        task_ids: state.task_ids,
        allocation: state.allocation,
        agents: state.agents,
    };
    save_checkpoint(&out_dir.join("checkpoint.bin"), &checkpoint)?;

    let final_eval = records
        .last()
        .and_then(|r| r.eval.as_ref())
        .expect("run_training always evaluates the final epoch");
    Ok(RunSummary {
        final_seen_acc: final_eval.seen_accuracy,
        final_unseen_acc: final_eval.unseen_accuracy,
        epochs_run: config.epochs,
        out_dir: out_dir.to_path_buf(),
    })
}
