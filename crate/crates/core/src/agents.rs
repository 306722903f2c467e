//! Agents: a contextualiser network paired with an actor network.
//!
//! The contextualiser turns a task's one-hot ID into a message (the ReLU
//! activations of its final, narrow layer) plus a scalar reward prediction
//! from a single dense value head. The actor consumes the task input bits
//! concatenated with a message and emits two class logits.
//!
//! Gradients never cross agents: a message handed to another agent carries
//! values only. Only when one agent plays both roles does the actor's loss
//! flow back through the message into the contextualiser trunk, alongside the
//! reward-prediction loss which always shapes the whole trunk.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{
    cross_entropy_with_logits, init_network, mse, Activation, AdamState, ForwardTrace, Network,
    NetworkGradients,
};
use crate::task_family::TaskId;

/// The communicated context: the contextualiser's final-layer activations.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub values: Vec<f64>,
    pub origin_agent: usize,
    pub task_index: usize,
}

impl Message {
    pub fn new(values: Vec<f64>, origin_agent: usize, task_index: usize) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite(
                "message values must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            values,
            origin_agent,
            task_index,
        })
    }
}

/// Task-ID-to-message trunk plus the reward-prediction head that reads the
/// message.
#[derive(Debug, Clone)]
pub struct ContextualiserNet {
    pub trunk: Network,
    pub value_head: Network,
}

/// The task-solving network: `(input bits, message) -> 2 logits`.
#[derive(Debug, Clone)]
pub struct ActorNet {
    pub net: Network,
}

/// One agent: both networks, its task-eligibility sets, and optimizer state.
#[derive(Debug, Clone)]
pub struct Agent {
    agent_id: usize,
    n_inputs: usize,
    message_width: usize,
    contextualiser: ContextualiserNet,
    actor: ActorNet,
    contextualise_set: BTreeSet<usize>,
    actor_set: BTreeSet<usize>,
    ctx_opt: AdamState,
    actor_opt: AdamState,
}

/// Gradients for a contextualiser: trunk and value head together, matching
/// the tensor order of [`Agent::apply_ctx_step`].
#[derive(Debug, Clone)]
pub struct CtxGradients {
    pub trunk: NetworkGradients,
    pub value_head: NetworkGradients,
}

impl CtxGradients {
    pub fn zeros_like(ctx: &ContextualiserNet) -> Self {
        Self {
            trunk: NetworkGradients::zeros_like(&ctx.trunk),
            value_head: NetworkGradients::zeros_like(&ctx.value_head),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.trunk.scale(factor);
        self.value_head.scale(factor);
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.trunk.flatten();
        out.extend(self.value_head.flatten());
        out
    }
}

/// Everything one (contextualiser, actor) forward pass produced, retained so
/// [`backward_pair`] can run later.
#[derive(Debug, Clone)]
pub struct PairForward {
    pub task_index: usize,
    pub target_bit: u8,
    pub message: Message,
    pub predicted_reward: f64,
    pub logits: Vec<f64>,
    pub chosen_class: u8,
    pub reward: f64,
    pub actor_loss: f64,
    pub value_loss: f64,
    ce_grad: Vec<f64>,
    value_grad: f64,
    trunk_trace: ForwardTrace,
    value_trace: ForwardTrace,
    actor_trace: ForwardTrace,
}

/// Per-example reward: 1.0 when the actor picked the target bit.
pub fn actor_reward(chosen_class: u8, target_bit: u8) -> f64 {
    if chosen_class == target_bit {
        1.0
    } else {
        0.0
    }
}

impl Agent {
    /// Builds a freshly initialized agent.
    ///
    /// Trunk: `num_tasks -> hidden -> hidden -> message_width`, all ReLU.
    /// Value head: `message_width -> 1`, identity.
    /// Actor: `n_inputs + message_width -> hidden -> hidden -> 2`, logits.
    #[allow(clippy::too_many_arguments)]
    pub fn new<R: Rng>(
        agent_id: usize,
        n_inputs: usize,
        num_tasks: usize,
        hidden_width: usize,
        message_width: usize,
        learning_rate: f64,
        contextualise_set: BTreeSet<usize>,
        actor_set: BTreeSet<usize>,
        rng: &mut R,
    ) -> Result<Self> {
        let trunk = init_network(
            &[num_tasks, hidden_width, hidden_width, message_width],
            &[Activation::Relu, Activation::Relu, Activation::Relu],
            rng,
        )?;
        let value_head = init_network(&[message_width, 1], &[Activation::Identity], rng)?;
        let actor = init_network(
            &[n_inputs + message_width, hidden_width, hidden_width, 2],
            &[Activation::Relu, Activation::Relu, Activation::Identity],
            rng,
        )?;
        let mut ctx_sizes = trunk.tensor_sizes();
        ctx_sizes.extend(value_head.tensor_sizes());
        let ctx_opt = AdamState::new(learning_rate, &ctx_sizes);
        let actor_opt = AdamState::new(learning_rate, &actor.tensor_sizes());
        Self::from_parts(
            agent_id,
            n_inputs,
            message_width,
            ContextualiserNet { trunk, value_head },
            ActorNet { net: actor },
            contextualise_set,
            actor_set,
            ctx_opt,
            actor_opt,
        )
    }

    /// Assembles an agent from existing parts (checkpoint load, tests).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        agent_id: usize,
        n_inputs: usize,
        message_width: usize,
        contextualiser: ContextualiserNet,
        actor: ActorNet,
        contextualise_set: BTreeSet<usize>,
        actor_set: BTreeSet<usize>,
        ctx_opt: AdamState,
        actor_opt: AdamState,
    ) -> Result<Self> {
        if !contextualise_set.is_subset(&actor_set) {
            return Err(Error::InvalidArgument(format!(
                "agent {agent_id}: contextualise set must be a subset of the actor set"
            )));
        }
        if contextualiser.trunk.output_dim() != message_width
            || contextualiser.value_head.input_dim() != message_width
            || contextualiser.value_head.output_dim() != 1
        {
            return Err(Error::Shape(format!(
                "agent {agent_id}: contextualiser widths do not match message width {message_width}"
            )));
        }
        if actor.net.input_dim() != n_inputs + message_width || actor.net.output_dim() != 2 {
            return Err(Error::Shape(format!(
                "agent {agent_id}: actor must map {} inputs to 2 logits",
                n_inputs + message_width
            )));
        }
        let mut ctx_sizes = contextualiser.trunk.tensor_sizes();
        ctx_sizes.extend(contextualiser.value_head.tensor_sizes());
        let opt_sizes = |opt: &AdamState| -> Vec<usize> {
            opt.first_moments().iter().map(|m| m.len()).collect()
        };
        if opt_sizes(&ctx_opt) != ctx_sizes || opt_sizes(&actor_opt) != actor.net.tensor_sizes() {
            return Err(Error::Shape(format!(
                "agent {agent_id}: optimizer state does not match network shapes"
            )));
        }
        Ok(Self {
            agent_id,
            n_inputs,
            message_width,
            contextualiser,
            actor,
            contextualise_set,
            actor_set,
            ctx_opt,
            actor_opt,
        })
    }

    pub fn agent_id(&self) -> usize {
        self.agent_id
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn message_width(&self) -> usize {
        self.message_width
    }

    pub fn contextualiser(&self) -> &ContextualiserNet {
        &self.contextualiser
    }

    /// Mutable network access for parameter surgery in tests and tools.
    pub fn contextualiser_mut(&mut self) -> &mut ContextualiserNet {
        &mut self.contextualiser
    }

    pub fn actor(&self) -> &ActorNet {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut ActorNet {
        &mut self.actor
    }

    pub fn contextualise_set(&self) -> &BTreeSet<usize> {
        &self.contextualise_set
    }

    pub fn actor_set(&self) -> &BTreeSet<usize> {
        &self.actor_set
    }

    pub fn ctx_opt(&self) -> &AdamState {
        &self.ctx_opt
    }

    pub fn actor_opt(&self) -> &AdamState {
        &self.actor_opt
    }

    fn check_task(&self, task: &TaskId, num_tasks: usize) -> Result<()> {
        if num_tasks != self.contextualiser.trunk.input_dim() {
            return Err(Error::Shape(format!(
                "contextualiser takes {} tasks, got num_tasks={num_tasks}",
                self.contextualiser.trunk.input_dim()
            )));
        }
        if task.onehot_index >= num_tasks {
            return Err(Error::Shape(format!(
                "one-hot index {} out of range for {num_tasks} tasks",
                task.onehot_index
            )));
        }
        Ok(())
    }

    /// Message and predicted reward for a task, no trace (evaluation path).
    pub fn contextualise(&self, task: &TaskId, num_tasks: usize) -> Result<(Message, f64)> {
        self.check_task(task, num_tasks)?;
        let values = self.contextualiser.trunk.infer_onehot(task.onehot_index)?;
        let predicted = self.contextualiser.value_head.infer(&values)?[0];
        Ok((
            Message::new(values, self.agent_id, task.task_index)?,
            predicted,
        ))
    }

    /// `contextualise` retaining traces for a later backward pass.
    pub fn contextualise_traced(
        &self,
        task: &TaskId,
        num_tasks: usize,
    ) -> Result<(Message, f64, ForwardTrace, ForwardTrace)> {
        self.check_task(task, num_tasks)?;
        let trunk_trace = self
            .contextualiser
            .trunk
            .forward_onehot(task.onehot_index)?;
        let values = trunk_trace.output().to_vec();
        let value_trace = self.contextualiser.value_head.forward(&values)?;
        let predicted = value_trace.output()[0];
        Ok((
            Message::new(values, self.agent_id, task.task_index)?,
            predicted,
            trunk_trace,
            value_trace,
        ))
    }

    fn actor_input(&self, message: &Message, input_bits: &[u8]) -> Result<Vec<f64>> {
        if message.values.len() != self.message_width {
            return Err(Error::Shape(format!(
                "message has {} values, agent expects {}",
                message.values.len(),
                self.message_width
            )));
        }
        if input_bits.len() != self.n_inputs {
            return Err(Error::Shape(format!(
                "expected {} input bits, got {}",
                self.n_inputs,
                input_bits.len()
            )));
        }
        if let Some(b) = input_bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "input bits must be 0 or 1, got {b}"
            )));
        }
        let mut input = Vec::with_capacity(self.n_inputs + self.message_width);
        input.extend(input_bits.iter().map(|&b| b as f64));
        input.extend_from_slice(&message.values);
        Ok(input)
    }

    /// Runs the actor on (input bits, message); ties in the argmax break
    /// toward class 0.
    pub fn act(&self, message: &Message, input_bits: &[u8]) -> Result<(Vec<f64>, u8)> {
        let input = self.actor_input(message, input_bits)?;
        let logits = self.actor.net.infer(&input)?;
        let chosen = choose_class(&logits);
        Ok((logits, chosen))
    }

    /// `act` retaining the trace for a later backward pass.
    pub fn act_traced(
        &self,
        message: &Message,
        input_bits: &[u8],
    ) -> Result<(Vec<f64>, u8, ForwardTrace)> {
        let input = self.actor_input(message, input_bits)?;
        let trace = self.actor.net.forward(&input)?;
        let logits = trace.output().to_vec();
        let chosen = choose_class(&logits);
        Ok((logits, chosen, trace))
    }

    /// One Adam step over trunk + value head from already-averaged gradients.
    pub fn apply_ctx_step(&mut self, grads: &CtxGradients) -> Result<()> {
        let ContextualiserNet { trunk, value_head } = &mut self.contextualiser;
        let mut params = trunk.tensors_mut();
        params.extend(value_head.tensors_mut());
        let mut grad_slices = grads.trunk.tensors();
        grad_slices.extend(grads.value_head.tensors());
        self.ctx_opt.step(&mut params, &grad_slices)
    }

    /// One Adam step over the actor from already-averaged gradients.
    pub fn apply_actor_step(&mut self, grads: &NetworkGradients) -> Result<()> {
        let mut params = self.actor.net.tensors_mut();
        self.actor_opt.step(&mut params, &grads.tensors())
    }
}

fn choose_class(logits: &[f64]) -> u8 {
    // Tie-break toward class 0 for reproducibility.
    if logits[1] > logits[0] {
        1
    } else {
        0
    }
}

/// Runs contextualiser and actor forward on one example and computes both
/// losses. The actual reward is the 0/1 correctness of the actor's argmax.
pub fn forward_pair(
    ctx_agent: &Agent,
    actor_agent: &Agent,
    task: &TaskId,
    num_tasks: usize,
    input_bits: &[u8],
    target_bit: u8,
) -> Result<PairForward> {
    if target_bit > 1 {
        return Err(Error::InvalidArgument(format!(
            "target bit must be 0 or 1, got {target_bit}"
        )));
    }
    let (message, predicted_reward, trunk_trace, value_trace) =
        ctx_agent.contextualise_traced(task, num_tasks)?;
    let (logits, chosen_class, actor_trace) = actor_agent.act_traced(&message, input_bits)?;
    let (actor_loss, ce_grad) = cross_entropy_with_logits(&logits, target_bit as usize)?;
    let reward = actor_reward(chosen_class, target_bit);
    let (value_loss, value_grad) = mse(predicted_reward, reward)?;
    Ok(PairForward {
        task_index: task.task_index,
        target_bit,
        message,
        predicted_reward,
        logits,
        chosen_class,
        reward,
        actor_loss,
        value_loss,
        ce_grad,
        value_grad,
        trunk_trace,
        value_trace,
        actor_trace,
    })
}

/// Backward for one example, accumulating into the callers' buffers.
///
/// Actor gradients come from the cross-entropy loss. Contextualiser gradients
/// come from the reward-prediction MSE through the value head and the whole
/// trunk. When both roles are the same agent, the actor's input gradient over
/// the message entries is added to the trunk's context-layer gradient; across
/// distinct agents that path is severed and the message acts as a constant.
pub fn backward_pair_into(
    ctx_agent: &Agent,
    actor_agent: &Agent,
    fwd: &PairForward,
    ctx_accum: &mut CtxGradients,
    actor_accum: &mut NetworkGradients,
) -> Result<()> {
    let self_play = ctx_agent.agent_id == actor_agent.agent_id;

    let actor_input_grad = actor_agent.actor.net.backward_into(
        &fwd.actor_trace,
        &fwd.ce_grad,
        actor_accum,
        self_play,
    )?;

    let value_input_grad = ctx_agent
        .contextualiser
        .value_head
        .backward_into(
            &fwd.value_trace,
            &[fwd.value_grad],
            &mut ctx_accum.value_head,
            true,
        )?
        .expect("value head input gradient was requested");

    let mut context_grad = value_input_grad;
    if self_play {
        let actor_input_grad = actor_input_grad.expect("requested for self-play");
        let message_slice = &actor_input_grad[ctx_agent.n_inputs..];
        for (c, a) in context_grad.iter_mut().zip(message_slice) {
            *c += a;
        }
    }

    ctx_agent.contextualiser.trunk.backward_into(
        &fwd.trunk_trace,
        &context_grad,
        &mut ctx_accum.trunk,
        false,
    )?;
    Ok(())
}

/// Single-example backward returning fresh gradient sets for both agents.
pub fn backward_pair(
    ctx_agent: &Agent,
    actor_agent: &Agent,
    fwd: &PairForward,
) -> Result<(CtxGradients, NetworkGradients)> {
    let mut ctx = CtxGradients::zeros_like(&ctx_agent.contextualiser);
    let mut actor = NetworkGradients::zeros_like(&actor_agent.actor.net);
    backward_pair_into(ctx_agent, actor_agent, fwd, &mut ctx, &mut actor)?;
    Ok((ctx, actor))
}
