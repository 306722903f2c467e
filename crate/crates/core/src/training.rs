//! The training loop over sampled triples and the seen/unseen evaluation.
//!
//! Training is sequential and deterministic: a batch accumulates per-agent
//! gradients (mean over the batch per receiving network), then each agent
//! that contributed takes exactly one Adam step per network. Evaluation is
//! read-only over the agents and fans out across (agent, task) pairs; with
//! the `parallel` feature it runs on rayon with a fixed reduction order, so
//! results are identical to the sequential path.

use rand::Rng;
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::agents::{backward_pair_into, forward_pair, Agent, CtxGradients, Message};
use crate::error::{Error, Result};
use crate::nn::NetworkGradients;
use crate::protocol::{sample_batch, unseen_pairs, Allocation, TrainingTriple};
use crate::task_family::{eval_table, TaskId, TrainingExample, TruthTable};

/// Batch means from one training step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepMetrics {
    /// Mean cross-entropy over the batch.
    pub actor_loss: f64,
    /// Mean reward-prediction MSE over the batch.
    pub value_loss: f64,
    /// Fraction of batch examples the actor answered correctly.
    pub batch_accuracy: f64,
}

/// One agent's slice of an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentEval {
    pub agent_id: usize,
    pub seen_accuracy: f64,
    /// Rows evaluated over the agent's actor set.
    pub seen_count: usize,
    /// Absent when the agent has no unseen tasks (r_a = 1).
    pub unseen_accuracy: Option<f64>,
    pub unseen_count: usize,
}

/// Seen/unseen accuracy per agent and in aggregate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_agent: Vec<AgentEval>,
    pub seen_accuracy: f64,
    pub seen_count: usize,
    pub unseen_accuracy: Option<f64>,
    pub unseen_count: usize,
}

/// Per-epoch record from [`run_training`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean step metrics over the epoch.
    pub metrics: StepMetrics,
    /// Present every `eval_every` epochs and at the final epoch.
    pub eval: Option<EvalReport>,
}

/// Loop controls for [`run_training`].
#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub eval_every: usize,
}

struct AgentAccum {
    ctx: CtxGradients,
    actor: NetworkGradients,
    ctx_count: usize,
    actor_count: usize,
}

impl AgentAccum {
    fn new(agent: &Agent) -> Self {
        Self {
            ctx: CtxGradients::zeros_like(agent.contextualiser()),
            actor: NetworkGradients::zeros_like(&agent.actor().net),
            ctx_count: 0,
            actor_count: 0,
        }
    }
}

/// Runs every triple of a batch forward and backward, then applies one Adam
/// step per participating network using the batch-mean gradients. Agents
/// absent from the batch are untouched.
pub fn train_step(
    agents: &mut [Agent],
    task_ids: &[TaskId],
    batch: &[TrainingTriple],
) -> Result<StepMetrics> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("batch must be nonempty".into()));
    }
    let num_tasks = task_ids.len();
    let mut accums: Vec<AgentAccum> = agents.iter().map(AgentAccum::new).collect();
    let mut sum_actor_loss = 0.0;
    let mut sum_value_loss = 0.0;
    let mut sum_reward = 0.0;

    for triple in batch {
        let c = triple.contextualiser_id;
        let a = triple.actor_id;
        if c >= agents.len() || a >= agents.len() {
            return Err(Error::InvalidArgument(format!(
                "triple references agent {} outside the population",
                c.max(a)
            )));
        }
        let task = task_ids.get(triple.example.task_index).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "example references task {} without an ID",
                triple.example.task_index
            ))
        })?;
        let fwd = forward_pair(
            &agents[c],
            &agents[a],
            task,
            num_tasks,
            &triple.example.input_bits,
            triple.example.target_bit,
        )?;
        sum_actor_loss += fwd.actor_loss;
        sum_value_loss += fwd.value_loss;
        sum_reward += fwd.reward;

        if c == a {
            let accum = &mut accums[c];
            backward_pair_into(
                &agents[c],
                &agents[a],
                &fwd,
                &mut accum.ctx,
                &mut accum.actor,
            )?;
        } else {
            let (ctx_accum, actor_accum) = if c < a {
                let (lo, hi) = accums.split_at_mut(a);
                (&mut lo[c], &mut hi[0])
            } else {
                let (lo, hi) = accums.split_at_mut(c);
                (&mut hi[0], &mut lo[a])
            };
            backward_pair_into(
                &agents[c],
                &agents[a],
                &fwd,
                &mut ctx_accum.ctx,
                &mut actor_accum.actor,
            )?;
        }
        accums[c].ctx_count += 1;
        accums[a].actor_count += 1;
    }

    let scale = 1.0 / batch.len() as f64;
    for (agent, accum) in agents.iter_mut().zip(accums.iter_mut()) {
        if accum.ctx_count > 0 {
            accum.ctx.scale(scale);
            agent.apply_ctx_step(&accum.ctx)?;
        }
        if accum.actor_count > 0 {
            accum.actor.scale(scale);
            agent.apply_actor_step(&accum.actor)?;
        }
    }

    let b = batch.len() as f64;
    Ok(StepMetrics {
        actor_loss: sum_actor_loss / b,
        value_loss: sum_value_loss / b,
        batch_accuracy: sum_reward / b,
    })
}

#[derive(Debug, Clone, Copy)]
struct PairJob {
    agent: usize,
    task: usize,
    seen: bool,
}

fn check_eval_inputs(
    agents: &[Agent],
    allocation: &Allocation,
    tables: &[TruthTable],
    task_ids: &[TaskId],
) -> Result<()> {
    if agents.len() != allocation.num_agents() {
        return Err(Error::Shape(format!(
            "allocation covers {} agents, got {}",
            allocation.num_agents(),
            agents.len()
        )));
    }
    if tables.len() != allocation.num_tasks() || task_ids.len() != allocation.num_tasks() {
        return Err(Error::Shape(format!(
            "allocation covers {} tasks, got {} tables / {} ids",
            allocation.num_tasks(),
            tables.len(),
            task_ids.len()
        )));
    }
    Ok(())
}

fn build_jobs(allocation: &Allocation) -> Vec<PairJob> {
    let mut jobs = Vec::new();
    for agent in 0..allocation.num_agents() {
        for &task in allocation.actor_set(agent) {
            jobs.push(PairJob {
                agent,
                task,
                seen: true,
            });
        }
    }
    for (agent, task) in unseen_pairs(allocation) {
        jobs.push(PairJob {
            agent,
            task,
            seen: false,
        });
    }
    jobs
}

/// Messages for every task, produced by each task's owning contextualiser.
pub fn owner_messages(
    agents: &[Agent],
    allocation: &Allocation,
    task_ids: &[TaskId],
) -> Result<Vec<Message>> {
    let num_tasks = allocation.num_tasks();
    (0..num_tasks)
        .map(|t| {
            let owner = allocation.owner_of(t);
            Ok(agents[owner].contextualise(&task_ids[t], num_tasks)?.0)
        })
        .collect()
}

/// Evaluates one (agent, task) pair over all rows of the table.
fn eval_pair<F>(
    agents: &[Agent],
    tables: &[TruthTable],
    messages: &[Message],
    job: PairJob,
    act_fn: &F,
) -> Result<(usize, usize)>
where
    F: Fn(&Agent, &Message, &[u8]) -> Result<u8>,
{
    let table = &tables[job.task];
    let n_inputs = table.n_inputs();
    let rows = 1usize << n_inputs;
    let mut correct = 0;
    for row in 0..rows {
        let bits: Vec<u8> = (0..n_inputs)
            .map(|i| ((row >> (n_inputs - 1 - i)) & 1) as u8)
            .collect();
        let chosen = act_fn(&agents[job.agent], &messages[job.task], &bits)?;
        if chosen == eval_table(table, &bits)? {
            correct += 1;
        }
    }
    Ok((correct, rows))
}

fn aggregate(allocation: &Allocation, jobs: &[PairJob], results: &[(usize, usize)]) -> EvalReport {
    let num_agents = allocation.num_agents();
    let mut seen_correct = vec![0usize; num_agents];
    let mut seen_rows = vec![0usize; num_agents];
    let mut unseen_correct = vec![0usize; num_agents];
    let mut unseen_rows = vec![0usize; num_agents];
    for (job, &(correct, rows)) in jobs.iter().zip(results) {
        if job.seen {
            seen_correct[job.agent] += correct;
            seen_rows[job.agent] += rows;
        } else {
            unseen_correct[job.agent] += correct;
            unseen_rows[job.agent] += rows;
        }
    }
    let ratio = |c: usize, n: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let per_agent = (0..num_agents)
        .map(|a| AgentEval {
            agent_id: a,
            seen_accuracy: ratio(seen_correct[a], seen_rows[a]),
            seen_count: seen_rows[a],
            unseen_accuracy: if unseen_rows[a] == 0 {
                None
            } else {
                Some(ratio(unseen_correct[a], unseen_rows[a]))
            },
            unseen_count: unseen_rows[a],
        })
        .collect();
    let total_seen_rows: usize = seen_rows.iter().sum();
    let total_unseen_rows: usize = unseen_rows.iter().sum();
    EvalReport {
        per_agent,
        seen_accuracy: ratio(seen_correct.iter().sum(), total_seen_rows),
        seen_count: total_seen_rows,
        unseen_accuracy: if total_unseen_rows == 0 {
            None
        } else {
            Some(ratio(unseen_correct.iter().sum(), total_unseen_rows))
        },
        unseen_count: total_unseen_rows,
    }
}

/// Evaluation core, generic over the acting function so tests can substitute
/// a hand-wired oracle actor.
pub(crate) fn evaluate_with_actor<F>(
    agents: &[Agent],
    allocation: &Allocation,
    tables: &[TruthTable],
    task_ids: &[TaskId],
    act_fn: F,
) -> Result<EvalReport>
where
    F: Fn(&Agent, &Message, &[u8]) -> Result<u8> + Sync,
{
    check_eval_inputs(agents, allocation, tables, task_ids)?;
    let messages = owner_messages(agents, allocation, task_ids)?;
    let jobs = build_jobs(allocation);
    let results: Vec<(usize, usize)> = run_jobs(agents, tables, &messages, &jobs, &act_fn)?;
    Ok(aggregate(allocation, &jobs, &results))
}

#[cfg(feature = "parallel")]
fn run_jobs<F>(
    agents: &[Agent],
    tables: &[TruthTable],
    messages: &[Message],
    jobs: &[PairJob],
    act_fn: &F,
) -> Result<Vec<(usize, usize)>>
where
    F: Fn(&Agent, &Message, &[u8]) -> Result<u8> + Sync,
{
    jobs.par_iter()
        .map(|&job| eval_pair(agents, tables, messages, job, act_fn))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_jobs<F>(
    agents: &[Agent],
    tables: &[TruthTable],
    messages: &[Message],
    jobs: &[PairJob],
    act_fn: &F,
) -> Result<Vec<(usize, usize)>>
where
    F: Fn(&Agent, &Message, &[u8]) -> Result<u8> + Sync,
{
    jobs.iter()
        .map(|&job| eval_pair(agents, tables, messages, job, act_fn))
        .collect()
}

fn net_actor(agent: &Agent, message: &Message, bits: &[u8]) -> Result<u8> {
    Ok(agent.act(message, bits)?.1)
}

/// Deterministic argmax evaluation of every (agent, task) pair.
///
/// Seen accuracy covers each agent's actor set; unseen accuracy covers the
/// complement. Messages always come from the task's owning contextualiser.
/// Uses the parallel fan-out when the `parallel` feature is enabled.
pub fn evaluate(
    agents: &[Agent],
    allocation: &Allocation,
    tables: &[TruthTable],
    task_ids: &[TaskId],
) -> Result<EvalReport> {
    evaluate_with_actor(agents, allocation, tables, task_ids, net_actor)
}

/// `evaluate` pinned to the single-threaded path regardless of features.
pub fn evaluate_sequential(
    agents: &[Agent],
    allocation: &Allocation,
    tables: &[TruthTable],
    task_ids: &[TaskId],
) -> Result<EvalReport> {
    check_eval_inputs(agents, allocation, tables, task_ids)?;
    let messages = owner_messages(agents, allocation, task_ids)?;
    let jobs = build_jobs(allocation);
    let results: Vec<(usize, usize)> = jobs
        .iter()
        .map(|&job| eval_pair(agents, tables, &messages, job, &net_actor))
        .collect::<Result<_>>()?;
    Ok(aggregate(allocation, &jobs, &results))
}

/// `evaluate` pinned to the rayon fan-out.
#[cfg(feature = "parallel")]
pub fn evaluate_parallel(
    agents: &[Agent],
    allocation: &Allocation,
    tables: &[TruthTable],
    task_ids: &[TaskId],
) -> Result<EvalReport> {
    check_eval_inputs(agents, allocation, tables, task_ids)?;
    let messages = owner_messages(agents, allocation, task_ids)?;
    let jobs = build_jobs(allocation);
    let results: Vec<(usize, usize)> = jobs
        .par_iter()
        .map(|&job| eval_pair(agents, tables, &messages, job, &net_actor))
        .collect::<Result<_>>()?;
    Ok(aggregate(allocation, &jobs, &results))
}

/// Runs `ceil(|dataset| / batch_size)` steps per epoch for `epochs` epochs,
/// evaluating every `eval_every` epochs and at the final epoch. Deterministic
/// for a fixed rng state. `on_record` fires after each epoch.
#[allow(clippy::too_many_arguments)]
pub fn run_training<R: Rng>(
    agents: &mut [Agent],
    allocation: &Allocation,
    tables: &[TruthTable],
    task_ids: &[TaskId],
    dataset: &[TrainingExample],
    options: &TrainOptions,
    rng: &mut R,
    mut on_record: impl FnMut(&EpochRecord),
) -> Result<Vec<EpochRecord>> {
    if options.epochs < 1 {
        return Err(Error::InvalidArgument("epochs must be at least 1".into()));
    }
    if options.eval_every < 1 {
        return Err(Error::InvalidArgument(
            "eval_every must be at least 1".into(),
        ));
    }
    if options.batch_size < 1 {
        return Err(Error::InvalidArgument(
            "batch_size must be at least 1".into(),
        ));
    }
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("dataset must be nonempty".into()));
    }

    let steps_per_epoch = dataset.len().div_ceil(options.batch_size);
    let mut records = Vec::new();
    for epoch in 1..=options.epochs {
        let mut sums = (0.0, 0.0, 0.0);
        for _ in 0..steps_per_epoch {
            let batch = sample_batch(dataset, allocation, options.batch_size, rng)?;
            let m = train_step(agents, task_ids, &batch)?;
            sums.0 += m.actor_loss;
            sums.1 += m.value_loss;
            sums.2 += m.batch_accuracy;
        }
        let denom = steps_per_epoch as f64;
        let metrics = StepMetrics {
            actor_loss: sums.0 / denom,
            value_loss: sums.1 / denom,
            batch_accuracy: sums.2 / denom,
        };
        let eval = if epoch % options.eval_every == 0 || epoch == options.epochs {
            Some(evaluate(agents, allocation, tables, task_ids)?)
        } else {
            None
        };
        let record = EpochRecord {
            epoch,
            metrics,
            eval,
        };
        on_record(&record);
        records.push(record);
    }
    Ok(records)
}

/// Number of training steps one epoch runs.
pub fn steps_per_epoch(dataset_len: usize, batch_size: usize) -> usize {
    dataset_len.div_ceil(batch_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::allocate;
    use crate::rng::{seeded, substream};
    use crate::task_family::{assign_task_ids, build_dataset, enumerate_tables};

    fn setup(
        n_inputs: usize,
        num_agents: usize,
        r_a: f64,
        hidden: usize,
        message: usize,
        seed: u64,
    ) -> (
        Vec<Agent>,
        Allocation,
        Vec<TruthTable>,
        Vec<TaskId>,
        Vec<TrainingExample>,
    ) {
        let tables = enumerate_tables(n_inputs).unwrap();
        let num_tasks = tables.len();
        let task_ids = assign_task_ids(num_tasks, &mut substream(seed, 0)).unwrap();
        let allocation = allocate(num_agents, num_tasks, r_a, &mut substream(seed, 1)).unwrap();
        let mut init_rng = substream(seed, 2);
        let agents: Vec<Agent> = (0..num_agents)
            .map(|a| {
                Agent::new(
                    a,
                    n_inputs,
                    num_tasks,
                    hidden,
                    message,
                    0.001,
                    allocation.contextualise_set(a).clone(),
                    allocation.actor_set(a).clone(),
                    &mut init_rng,
                )
                .unwrap()
            })
            .collect();
        let dataset = build_dataset(&tables).unwrap();
        (agents, allocation, tables, task_ids, dataset)
    }

    fn agent_params(agent: &Agent) -> Vec<f64> {
        let mut p = agent.contextualiser().trunk.params_flat();
        p.extend(agent.contextualiser().value_head.params_flat());
        p.extend(agent.actor().net.params_flat());
        p
    }

    #[test]
    fn repeated_triple_batch_equals_single_triple_step() {
        let (agents, allocation, _, task_ids, dataset) = setup(2, 2, 0.5, 8, 4, 100);
        let batch1 = sample_batch(&dataset, &allocation, 1, &mut seeded(5)).unwrap();
        let batch4: Vec<TrainingTriple> = std::iter::repeat_n(batch1[0].clone(), 4).collect();

        let mut once = agents.clone();
        train_step(&mut once, &task_ids, &batch1).unwrap();
        let mut four = agents.clone();
        train_step(&mut four, &task_ids, &batch4).unwrap();

        for (a, b) in once.iter().zip(four.iter()) {
            assert_eq!(agent_params(a), agent_params(b));
        }
    }

    #[test]
    fn untrained_actor_loss_is_near_ln2() {
        let (mut agents, allocation, _, task_ids, dataset) = setup(3, 4, 0.5, 128, 32, 7);
        let batch = sample_batch(&dataset, &allocation, 512, &mut seeded(8)).unwrap();
        let metrics = train_step(&mut agents, &task_ids, &batch).unwrap();
        assert!(
            (metrics.actor_loss - std::f64::consts::LN_2).abs() < 0.15,
            "actor loss {}",
            metrics.actor_loss
        );
        assert!(metrics.batch_accuracy >= 0.0 && metrics.batch_accuracy <= 1.0);
        assert!(metrics.value_loss.is_finite());
    }

    #[test]
    fn train_step_touches_only_participating_agents() {
        let (agents, allocation, _, task_ids, dataset) = setup(2, 4, 0.0, 8, 4, 9);
        // r_a = 0 makes every triple self-play; craft a batch touching agent 0 only.
        let task0 = *allocation.contextualise_set(0).iter().next().unwrap();
        let triples: Vec<TrainingTriple> = dataset
            .iter()
            .filter(|ex| ex.task_index == task0)
            .map(|ex| TrainingTriple {
                example: ex.clone(),
                contextualiser_id: 0,
                actor_id: 0,
            })
            .collect();
        assert!(!triples.is_empty());

        let mut trained = agents.clone();
        train_step(&mut trained, &task_ids, &triples).unwrap();
        assert_ne!(agent_params(&agents[0]), agent_params(&trained[0]));
        for a in 1..4 {
            assert_eq!(agent_params(&agents[a]), agent_params(&trained[a]));
            assert_eq!(trained[a].ctx_opt().t(), 0);
            assert_eq!(trained[a].actor_opt().t(), 0);
        }
        assert_eq!(trained[0].ctx_opt().t(), 1);
        assert_eq!(trained[0].actor_opt().t(), 1);
    }

    #[test]
    fn eval_counts_match_allocation_arithmetic() {
        let (agents, allocation, tables, task_ids, _) = setup(2, 4, 0.0, 8, 4, 10);
        let report = evaluate(&agents, &allocation, &tables, &task_ids).unwrap();
        for (a, agent_eval) in report.per_agent.iter().enumerate() {
            assert_eq!(agent_eval.seen_count, allocation.actor_set(a).len() * 4);
            assert_eq!(
                agent_eval.unseen_count,
                (16 - allocation.actor_set(a).len()) * 4
            );
        }
        assert_eq!(report.seen_count, 4 * 4 * 4);
        assert_eq!(report.unseen_count, 4 * 12 * 4);
        assert_eq!(report.unseen_count, unseen_pairs(&allocation).len() * 4);
    }

    #[test]
    fn r_a_one_reports_no_unseen_accuracy() {
        let (agents, allocation, tables, task_ids, _) = setup(2, 4, 1.0, 8, 4, 11);
        let report = evaluate(&agents, &allocation, &tables, &task_ids).unwrap();
        assert_eq!(report.unseen_count, 0);
        assert!(report.unseen_accuracy.is_none());
        for agent_eval in &report.per_agent {
            assert!(agent_eval.unseen_accuracy.is_none());
        }
    }

    #[test]
    fn oracle_actor_scores_perfectly() {
        let (agents, allocation, tables, task_ids, _) = setup(2, 4, 0.25, 8, 4, 12);
        let report =
            evaluate_with_actor(&agents, &allocation, &tables, &task_ids, |_, msg, bits| {
                eval_table(&tables[msg.task_index], bits)
            })
            .unwrap();
        assert_eq!(report.seen_accuracy, 1.0);
        assert_eq!(report.unseen_accuracy, Some(1.0));
    }

    #[test]
    fn untrained_unseen_accuracy_is_chance_level() {
        let (agents, allocation, tables, task_ids, _) = setup(3, 4, 0.0, 128, 32, 13);
        let report = evaluate(&agents, &allocation, &tables, &task_ids).unwrap();
        let unseen = report.unseen_accuracy.unwrap();
        assert_eq!(report.unseen_count, 4 * 192 * 8);
        assert!(
            (0.45..=0.55).contains(&unseen),
            "untrained unseen accuracy {unseen}"
        );
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_eval_agree() {
        let (agents, allocation, tables, task_ids, _) = setup(2, 3, 0.5, 8, 4, 14);
        let a = evaluate_parallel(&agents, &allocation, &tables, &task_ids).unwrap();
        let b = evaluate_sequential(&agents, &allocation, &tables, &task_ids).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn run_training_step_count_and_determinism() {
        let run = |seed: u64| {
            let (mut agents, allocation, tables, task_ids, dataset) = setup(2, 2, 0.5, 8, 4, seed);
            let options = TrainOptions {
                epochs: 3,
                batch_size: 24,
                eval_every: 2,
            };
            let mut rng = substream(seed, 3);
            run_training(
                &mut agents,
                &allocation,
                &tables,
                &task_ids,
                &dataset,
                &options,
                &mut rng,
                |_| {},
            )
            .unwrap()
        };
        let a = run(21);
        let b = run(21);
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        // Evals at epoch 2 (eval_every) and 3 (final).
        assert!(a[0].eval.is_none());
        assert!(a[1].eval.is_some());
        assert!(a[2].eval.is_some());
        // 64-example dataset, batch 24 -> 3 steps per epoch.
        assert_eq!(steps_per_epoch(64, 24), 3);
    }

    #[test]
    fn full_family_epoch_runs_four_steps() {
        assert_eq!(steps_per_epoch(2048, 512), 4);
    }

    #[test]
    fn loss_decreases_over_fifty_epochs() {
        let (mut agents, allocation, tables, task_ids, dataset) = setup(3, 4, 0.5, 128, 32, 31);
        let options = TrainOptions {
            epochs: 50,
            batch_size: 512,
            eval_every: 50,
        };
        let mut rng = substream(31, 3);
        let records = run_training(
            &mut agents,
            &allocation,
            &tables,
            &task_ids,
            &dataset,
            &options,
            &mut rng,
            |_| {},
        )
        .unwrap();
        let first = records[0].metrics.actor_loss;
        let last = records[49].metrics.actor_loss;
        assert!(last < first, "epoch 1 loss {first}, epoch 50 loss {last}");
    }
}
