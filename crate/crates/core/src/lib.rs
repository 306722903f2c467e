//! Task-conditioned emergent communication on boolean truth-table tasks.
//!
//! A family of tasks (all truth tables over `n` inputs) is split among agents.
//! Each agent owns a contextualiser network that turns a task's randomized
//! one-hot ID into a 32-value message plus a predicted reward, and an actor
//! network that answers a task row given that message. Agents teach each other
//! only through the messages: gradients never cross agent boundaries, except
//! through the message when one agent plays both roles.
//!
//! The crate provides the task family, the dense-network engine, the agents,
//! the eligibility protocol, the training/evaluation loop, and the checkpoint
//! format; the `emcom` binary in this workspace drives experiments on top.

pub mod agents;
pub mod atlas;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod fdcheck;
pub mod nn;
pub mod protocol;
pub mod rng;
pub mod task_family;
pub mod training;

pub use error::{Error, Result};
