//! Versioned binary checkpoint: everything needed to rebuild a run.
//!
//! Layout, all little-endian:
//!
//! ```text
//! [8]  magic "EMCOMCKP"
//! [4]  format version (u32)
//! [8+] resolved config JSON (u64 length + bytes)
//! [8+] task-ID permutation (u64 count + u32 one-hot index per task)
//! [..] allocation (u32 num_agents, f64 r_a, per agent: two task lists)
//! [..] per agent: u32 id, two task lists, trunk / value-head / actor
//!      network blobs, contextualiser + actor optimizer blobs
//! [4]  crc32 of everything above
//! ```
//!
//! Network blobs use the flat parameter layout: a u32 blob version, then a
//! header of layer sizes and activations, then per layer row-major weights
//! followed by biases as f64. A task list is a u64 count plus u32 entries.
//! The checksum covers every payload byte, so truncation or corruption
//! surfaces as a checksum error before any field is interpreted.

use std::collections::BTreeSet;
use std::path::Path;

use crate::agents::{ActorNet, Agent, ContextualiserNet};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::nn::{Activation, AdamState, DenseLayer, Network};
use crate::protocol::Allocation;
use crate::task_family::TaskId;

pub const MAGIC: &[u8; 8] = b"EMCOMCKP";
pub const FORMAT_VERSION: u32 = 1;
/// Version of the flat network-parameter layout.
pub const NN_FORMAT_VERSION: u32 = 1;

/// A complete run state.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub task_ids: Vec<TaskId>,
    pub allocation: Allocation,
    pub agents: Vec<Agent>,
}

// ---------------------------------------------------------------- writing

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Self { buf: Vec::new() }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64_slice(&mut self, values: &[f64]) {
        self.buf.reserve(values.len() * 8);
        for &v in values {
            self.f64(v);
        }
    }

    fn bytes(&mut self, bytes: &[u8]) {
        self.u64(bytes.len() as u64);
        self.buf.extend_from_slice(bytes);
    }

    fn task_list(&mut self, set: &BTreeSet<usize>) {
        self.u64(set.len() as u64);
        for &t in set {
            self.u32(t as u32);
        }
    }

    fn network(&mut self, net: &Network) {
        self.u32(NN_FORMAT_VERSION);
        self.u32(net.layers().len() as u32);
        for layer in net.layers() {
            self.u32(layer.in_dim() as u32);
            self.u32(layer.out_dim() as u32);
            self.u8(match layer.activation() {
                Activation::Relu => 0,
                Activation::Identity => 1,
            });
        }
        for layer in net.layers() {
            self.f64_slice(layer.weights());
            self.f64_slice(layer.biases());
        }
    }

    fn adam(&mut self, state: &AdamState) {
        self.u64(state.t());
        self.f64(state.learning_rate());
        self.f64(state.beta1());
        self.f64(state.beta2());
        self.f64(state.epsilon());
        self.u32(state.first_moments().len() as u32);
        for m in state.first_moments() {
            self.u64(m.len() as u64);
        }
        for m in state.first_moments() {
            self.f64_slice(m);
        }
        for v in state.second_moments() {
            self.f64_slice(v);
        }
    }
}

/// Serializes a checkpoint to bytes, checksum included.
pub fn serialize_checkpoint(checkpoint: &Checkpoint) -> Vec<u8> {
    let mut w = Writer::new();
    w.buf.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    w.bytes(checkpoint.config.to_json_pretty().as_bytes());

    let alloc = &checkpoint.allocation;
    w.u32(alloc.num_agents() as u32);
    w.f64(alloc.r_a());
    for a in 0..alloc.num_agents() {
        w.task_list(alloc.contextualise_set(a));
        w.task_list(alloc.actor_set(a));
    }

    w.u64(checkpoint.task_ids.len() as u64);
    for id in &checkpoint.task_ids {
        w.u32(id.onehot_index as u32);
    }

    for agent in &checkpoint.agents {
        w.u32(agent.agent_id() as u32);
        w.task_list(agent.contextualise_set());
        w.task_list(agent.actor_set());
        w.network(&agent.contextualiser().trunk);
        w.network(&agent.contextualiser().value_head);
        w.network(&agent.actor().net);
        w.adam(agent.ctx_opt());
        w.adam(agent.actor_opt());
    }

    let crc = crc32fast::hash(&w.buf);
    w.u32(crc);
    w.buf
}

// ---------------------------------------------------------------- reading

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::CheckpointFormat(format!(
                "payload ends at byte {} but {} more bytes were expected",
                self.data.len(),
                self.pos + n - self.data.len()
            )));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn bytes(&mut self) -> Result<&'a [u8]> {
        let len = self.u64()? as usize;
        self.take(len)
    }

    fn task_list(&mut self) -> Result<BTreeSet<usize>> {
        let len = self.u64()? as usize;
        let mut set = BTreeSet::new();
        for _ in 0..len {
            set.insert(self.u32()? as usize);
        }
        if set.len() != len {
            return Err(Error::CheckpointFormat(
                "task list contains duplicates".into(),
            ));
        }
        Ok(set)
    }

    fn network(&mut self) -> Result<Network> {
        let version = self.u32()?;
        if version != NN_FORMAT_VERSION {
            return Err(Error::Incompatible(format!(
                "network payload version {version}, this build reads {NN_FORMAT_VERSION}"
            )));
        }
        let n_layers = self.u32()? as usize;
        let mut headers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let in_dim = self.u32()? as usize;
            let out_dim = self.u32()? as usize;
            let activation = match self.u8()? {
                0 => Activation::Relu,
                1 => Activation::Identity,
                tag => {
                    return Err(Error::CheckpointFormat(format!(
                        "unknown activation tag {tag}"
                    )))
                }
            };
            headers.push((in_dim, out_dim, activation));
        }
        let mut layers = Vec::with_capacity(n_layers);
        for (in_dim, out_dim, activation) in headers {
            let weights = self.f64_vec(in_dim * out_dim)?;
            let biases = self.f64_vec(out_dim)?;
            layers.push(
                DenseLayer::new(in_dim, out_dim, weights, biases, activation)
                    .map_err(|e| Error::CheckpointFormat(e.to_string()))?,
            );
        }
        Network::new(layers).map_err(|e| Error::CheckpointFormat(e.to_string()))
    }

    fn adam(&mut self) -> Result<AdamState> {
        let t = self.u64()?;
        let lr = self.f64()?;
        let beta1 = self.f64()?;
        let beta2 = self.f64()?;
        let epsilon = self.f64()?;
        let n_tensors = self.u32()? as usize;
        let mut sizes = Vec::with_capacity(n_tensors);
        for _ in 0..n_tensors {
            sizes.push(self.u64()? as usize);
        }
        let mut m = Vec::with_capacity(n_tensors);
        for &s in &sizes {
            m.push(self.f64_vec(s)?);
        }
        let mut v = Vec::with_capacity(n_tensors);
        for &s in &sizes {
            v.push(self.f64_vec(s)?);
        }
        AdamState::from_parts(lr, beta1, beta2, epsilon, t, m, v)
            .map_err(|e| Error::CheckpointFormat(e.to_string()))
    }
}

/// Parses checkpoint bytes; the checksum is verified before anything else.
pub fn deserialize_checkpoint(data: &[u8]) -> Result<Checkpoint> {
    if data.len() < MAGIC.len() + 8 {
        return Err(Error::ChecksumMismatch(format!(
            "file holds {} bytes, too short for a checkpoint",
            data.len()
        )));
    }
    let (payload, tail) = data.split_at(data.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::ChecksumMismatch(format!(
            "stored crc32 {stored:#010x}, computed {computed:#010x}"
        )));
    }

    let mut r = Reader::new(payload);
    let magic = r.take(MAGIC.len())?;
    if magic != MAGIC {
        return Err(Error::Incompatible("not a checkpoint (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Incompatible(format!(
            "checkpoint format version {version}, this build reads {FORMAT_VERSION}"
        )));
    }

    let config_json = std::str::from_utf8(r.bytes()?)
        .map_err(|e| Error::CheckpointFormat(format!("config block is not utf-8: {e}")))?;
    let config = RunConfig::from_json(config_json)
        .map_err(|e| Error::CheckpointFormat(format!("embedded config: {e}")))?;
    let num_tasks = config.num_tasks();

    let num_agents = r.u32()? as usize;
    if num_agents != config.num_agents {
        return Err(Error::CheckpointFormat(format!(
            "allocation covers {num_agents} agents, config says {}",
            config.num_agents
        )));
    }
    let r_a = r.f64()?;
    let mut ctx_sets = Vec::with_capacity(num_agents);
    let mut actor_sets = Vec::with_capacity(num_agents);
    for _ in 0..num_agents {
        ctx_sets.push(r.task_list()?);
        actor_sets.push(r.task_list()?);
    }
    let allocation = Allocation::from_sets(num_agents, num_tasks, r_a, ctx_sets, actor_sets)
        .map_err(|e| Error::CheckpointFormat(e.to_string()))?;

    let id_count = r.u64()? as usize;
    if id_count != num_tasks {
        return Err(Error::CheckpointFormat(format!(
            "task-ID count {id_count} does not match config family size {num_tasks}"
        )));
    }
    let mut task_ids = Vec::with_capacity(num_tasks);
    for task_index in 0..num_tasks {
        task_ids.push(TaskId {
            task_index,
            onehot_index: r.u32()? as usize,
        });
    }
    let mut onehots: Vec<usize> = task_ids.iter().map(|t| t.onehot_index).collect();
    onehots.sort_unstable();
    if onehots != (0..num_tasks).collect::<Vec<_>>() {
        return Err(Error::CheckpointFormat(
            "task-ID permutation is not a bijection".into(),
        ));
    }

    let mut agents = Vec::with_capacity(num_agents);
    for expected_id in 0..num_agents {
        let agent_id = r.u32()? as usize;
        if agent_id != expected_id {
            return Err(Error::CheckpointFormat(format!(
                "agent payload {expected_id} carries id {agent_id}"
            )));
        }
        let contextualise_set = r.task_list()?;
        let actor_set = r.task_list()?;
        if &contextualise_set != allocation.contextualise_set(agent_id)
            || &actor_set != allocation.actor_set(agent_id)
        {
            return Err(Error::CheckpointFormat(format!(
                "agent {agent_id} eligibility sets disagree with the allocation"
            )));
        }
        let trunk = r.network()?;
        let value_head = r.network()?;
        let actor = r.network()?;
        let ctx_opt = r.adam()?;
        let actor_opt = r.adam()?;
        let agent = Agent::from_parts(
            agent_id,
            config.n_inputs,
            config.message_width,
            ContextualiserNet { trunk, value_head },
            ActorNet { net: actor },
            contextualise_set,
            actor_set,
            ctx_opt,
            actor_opt,
        )
        .map_err(|e| Error::CheckpointFormat(e.to_string()))?;
        agents.push(agent);
    }

    if r.pos != payload.len() {
        return Err(Error::CheckpointFormat(format!(
            "{} trailing bytes after the last agent payload",
            payload.len() - r.pos
        )));
    }

    Ok(Checkpoint {
        config,
        task_ids,
        allocation,
        agents,
    })
}

/// Writes a checkpoint atomically (temp file + rename).
pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    let bytes = serialize_checkpoint(checkpoint);
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, &bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path)?;
    deserialize_checkpoint(&bytes)
}
