//! Data-distribution protocol: who may contextualise and act on which task.
//!
//! Tasks are dealt into pairwise-disjoint contextualise sets (an equal
//! partition), and each agent's actor set extends its own share by a fraction
//! `r_a` of the remaining tasks. Tasks outside an agent's actor set stay
//! unseen by it for the whole run and exist only for evaluation.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{random_permutation, sample_distinct};
use crate::task_family::TrainingExample;

/// The full eligibility structure for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    num_agents: usize,
    num_tasks: usize,
    r_a: f64,
    contextualise_sets: Vec<BTreeSet<usize>>,
    actor_sets: Vec<BTreeSet<usize>>,
    /// task -> the unique agent that contextualises it.
    owner: Vec<usize>,
    /// task -> sorted agents eligible to act on it.
    eligible_actors: Vec<Vec<usize>>,
}

/// One training assignment: an example, who produces the message, who acts.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTriple {
    pub example: TrainingExample,
    pub contextualiser_id: usize,
    pub actor_id: usize,
}

impl Allocation {
    /// Validates the defining invariants and derives the lookup tables.
    pub fn from_sets(
        num_agents: usize,
        num_tasks: usize,
        r_a: f64,
        contextualise_sets: Vec<BTreeSet<usize>>,
        actor_sets: Vec<BTreeSet<usize>>,
    ) -> Result<Self> {
        if contextualise_sets.len() != num_agents || actor_sets.len() != num_agents {
            return Err(Error::InvalidArgument(format!(
                "expected {num_agents} per-agent sets"
            )));
        }
        let mut owner = vec![usize::MAX; num_tasks];
        for (agent, set) in contextualise_sets.iter().enumerate() {
            for &t in set {
                if t >= num_tasks {
                    return Err(Error::InvalidArgument(format!(
                        "task {t} out of range ({num_tasks} tasks)"
                    )));
                }
                if owner[t] != usize::MAX {
                    return Err(Error::InvalidArgument(format!(
                        "task {t} contextualised by both agent {} and {agent}",
                        owner[t]
                    )));
                }
                owner[t] = agent;
            }
        }
        if let Some(t) = owner.iter().position(|&a| a == usize::MAX) {
            return Err(Error::InvalidArgument(format!(
                "task {t} has no contextualiser; the sets must partition all tasks"
            )));
        }
        let mut eligible_actors = vec![Vec::new(); num_tasks];
        for (agent, set) in actor_sets.iter().enumerate() {
            if !contextualise_sets[agent].is_subset(set) {
                return Err(Error::InvalidArgument(format!(
                    "agent {agent}: contextualise set must be a subset of its actor set"
                )));
            }
            for &t in set {
                if t >= num_tasks {
                    return Err(Error::InvalidArgument(format!(
                        "task {t} out of range ({num_tasks} tasks)"
                    )));
                }
                eligible_actors[t].push(agent);
            }
        }
        Ok(Self {
            num_agents,
            num_tasks,
            r_a,
            contextualise_sets,
            actor_sets,
            owner,
            eligible_actors,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    pub fn r_a(&self) -> f64 {
        self.r_a
    }

    pub fn contextualise_set(&self, agent: usize) -> &BTreeSet<usize> {
        &self.contextualise_sets[agent]
    }

    pub fn actor_set(&self, agent: usize) -> &BTreeSet<usize> {
        &self.actor_sets[agent]
    }

    /// The unique agent whose contextualise set contains `task`.
    pub fn owner_of(&self, task: usize) -> usize {
        self.owner[task]
    }

    /// Tasks an agent never acts on, in ascending task order.
    pub fn unseen_set(&self, agent: usize) -> BTreeSet<usize> {
        (0..self.num_tasks)
            .filter(|t| !self.actor_sets[agent].contains(t))
            .collect()
    }
}

/// Round-half-up, the documented rounding for actor-extension sizes.
fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Partitions tasks round-robin over a shuffled order, then extends each
/// agent's actor set with a uniform sample of `round(r_a * remaining)` tasks
/// it does not own. Deterministic for a fixed rng state.
pub fn allocate<R: Rng>(
    num_agents: usize,
    num_tasks: usize,
    r_a: f64,
    rng: &mut R,
) -> Result<Allocation> {
    if num_agents < 1 {
        return Err(Error::InvalidArgument("need at least one agent".into()));
    }
    if num_tasks < num_agents {
        return Err(Error::InvalidArgument(format!(
            "{num_tasks} tasks cannot cover {num_agents} agents"
        )));
    }
    if !(0.0..=1.0).contains(&r_a) {
        return Err(Error::InvalidArgument(format!(
            "r_a must lie in [0, 1], got {r_a}"
        )));
    }

    let shuffled = random_permutation(num_tasks, rng);
    let mut contextualise_sets = vec![BTreeSet::new(); num_agents];
    for (i, &task) in shuffled.iter().enumerate() {
        contextualise_sets[i % num_agents].insert(task);
    }

    let mut actor_sets = Vec::with_capacity(num_agents);
    for set in &contextualise_sets {
        let remaining: Vec<usize> = (0..num_tasks).filter(|t| !set.contains(t)).collect();
        let extension_size = round_half_up(r_a * remaining.len() as f64);
        let extension = sample_distinct(&remaining, extension_size, rng);
        let mut actor_set = set.clone();
        actor_set.extend(extension);
        actor_sets.push(actor_set);
    }

    Allocation::from_sets(num_agents, num_tasks, r_a, contextualise_sets, actor_sets)
}

/// Draws `batch_size` examples uniformly with replacement and assigns each
/// its owning contextualiser and a uniformly chosen eligible actor.
pub fn sample_batch<R: Rng>(
    dataset: &[TrainingExample],
    allocation: &Allocation,
    batch_size: usize,
    rng: &mut R,
) -> Result<Vec<TrainingTriple>> {
    if batch_size < 1 {
        return Err(Error::InvalidArgument(
            "batch_size must be at least 1".into(),
        ));
    }
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("dataset must be nonempty".into()));
    }
    let mut batch = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let example = dataset[rng.gen_range(0..dataset.len())].clone();
        if example.task_index >= allocation.num_tasks {
            return Err(Error::InvalidArgument(format!(
                "example references task {} outside the allocation",
                example.task_index
            )));
        }
        let contextualiser_id = allocation.owner[example.task_index];
        let actors = &allocation.eligible_actors[example.task_index];
        if actors.is_empty() {
            return Err(Error::Internal(format!(
                "task {} has no eligible actor",
                example.task_index
            )));
        }
        let actor_id = actors[rng.gen_range(0..actors.len())];
        batch.push(TrainingTriple {
            example,
            contextualiser_id,
            actor_id,
        });
    }
    Ok(batch)
}

/// All (agent, task) pairs the agent never acts on, ordered by agent then
/// task. Empty exactly when `r_a == 1`.
pub fn unseen_pairs(allocation: &Allocation) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for agent in 0..allocation.num_agents {
        for task in 0..allocation.num_tasks {
            if !allocation.actor_sets[agent].contains(&task) {
                pairs.push((agent, task));
            }
        }
    }
    pairs
}
