//! The family of boolean truth-table tasks.
//!
//! A task is one boolean function over `n_inputs` bits, represented by its
//! full truth table. Conventions, fixed for reproducibility:
//! - row index `r` of a table is the input whose bits read most-significant
//!   first, i.e. input `(b0, .., b_{n-1})` selects `r = sum b_i << (n-1-i)`;
//! - table `k` of the enumeration has `bits[r] = (k >> r) & 1`, so row 0 is
//!   the least-significant bit of `k` and the index doubles as a canonical
//!   table identifier.

use crate::error::{Error, Result};
use rand::Rng;

/// One boolean function over `n_inputs` inputs; the unit of "task".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    n_inputs: usize,
    bits: Vec<u8>,
}

impl TruthTable {
    pub fn new(n_inputs: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != 1 << n_inputs {
            return Err(Error::Shape(format!(
                "truth table over {} inputs needs {} rows, got {}",
                n_inputs,
                1usize << n_inputs,
                bits.len()
            )));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "truth table entries must be 0 or 1, got {b}"
            )));
        }
        Ok(Self { n_inputs, bits })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
}

/// A task's position in the family plus its randomized one-hot slot.
///
/// The one-hot index is randomized so the ID itself carries no structure;
/// everything the actor learns about a task must come through the message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskId {
    pub task_index: usize,
    pub onehot_index: usize,
}

/// One row of one truth table, as a supervised example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingExample {
    pub task_index: usize,
    pub input_bits: Vec<u8>,
    pub target_bit: u8,
}

/// Largest supported `n_inputs`; 4 already gives 65 536 tables.
pub const MAX_N_INPUTS: usize = 4;

/// All `2^(2^n_inputs)` truth tables over `n_inputs` inputs, in index order.
pub fn enumerate_tables(n_inputs: usize) -> Result<Vec<TruthTable>> {
    if !(1..=MAX_N_INPUTS).contains(&n_inputs) {
        return Err(Error::Bounds(format!(
            "n_inputs must be in 1..={MAX_N_INPUTS}, got {n_inputs}"
        )));
    }
    let rows = 1usize << n_inputs;
    let num_tables = 1usize << rows;
    let tables = (0..num_tables)
        .map(|k| TruthTable {
            n_inputs,
            bits: (0..rows).map(|r| ((k >> r) & 1) as u8).collect(),
        })
        .collect();
    Ok(tables)
}

/// Looks up `table` at the row selected by `input_bits` (first bit most
/// significant).
pub fn eval_table(table: &TruthTable, input_bits: &[u8]) -> Result<u8> {
    if input_bits.len() != table.n_inputs {
        return Err(Error::Shape(format!(
            "table takes {} inputs, got {}",
            table.n_inputs,
            input_bits.len()
        )));
    }
    let mut row = 0usize;
    for &b in input_bits {
        if b > 1 {
            return Err(Error::InvalidArgument(format!(
                "input bits must be 0 or 1, got {b}"
            )));
        }
        row = (row << 1) | b as usize;
    }
    Ok(table.bits[row])
}

/// Assigns each task a slot in a uniformly random permutation of one-hot
/// positions. Deterministic for a fixed rng state.
pub fn assign_task_ids<R: Rng>(num_tasks: usize, rng: &mut R) -> Result<Vec<TaskId>> {
    if num_tasks == 0 {
        return Err(Error::Bounds("num_tasks must be at least 1".into()));
    }
    let perm = crate::rng::random_permutation(num_tasks, rng);
    Ok(perm
        .into_iter()
        .enumerate()
        .map(|(task_index, onehot_index)| TaskId {
            task_index,
            onehot_index,
        })
        .collect())
}

/// One supervised example per (table, input row) pair, table-major, rows in
/// ascending row-index order.
pub fn build_dataset(tables: &[TruthTable]) -> Result<Vec<TrainingExample>> {
    let n_inputs = match tables.first() {
        Some(t) => t.n_inputs,
        None => return Err(Error::InvalidArgument("tables must be nonempty".into())),
    };
    if let Some(t) = tables.iter().find(|t| t.n_inputs != n_inputs) {
        return Err(Error::Shape(format!(
            "mixed table arities: expected {} inputs, found {}",
            n_inputs, t.n_inputs
        )));
    }
    let rows = 1usize << n_inputs;
    let mut examples = Vec::with_capacity(tables.len() * rows);
    for (task_index, table) in tables.iter().enumerate() {
        for row in 0..rows {
            // Row index back to its input bits, most-significant first.
            let input_bits: Vec<u8> = (0..n_inputs)
                .map(|i| ((row >> (n_inputs - 1 - i)) & 1) as u8)
                .collect();
            examples.push(TrainingExample {
                task_index,
                input_bits,
                target_bit: table.bits[row],
            });
        }
    }
    Ok(examples)
}
