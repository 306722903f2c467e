//! Message atlas: every task's message plus pairwise cosine similarities,
//! for offline inspection of the emergent code.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::agents::Agent;
use crate::error::Result;
use crate::protocol::Allocation;
use crate::task_family::TaskId;
use crate::training::owner_messages;

/// One task's message as produced by its owning contextualiser.
#[derive(Debug, Clone, PartialEq)]
pub struct AtlasRow {
    pub task_index: usize,
    pub owner: usize,
    pub values: Vec<f64>,
}

/// All messages and their cosine-similarity matrix (row-major, square).
#[derive(Debug, Clone, PartialEq)]
pub struct MessageAtlas {
    pub rows: Vec<AtlasRow>,
    similarity: Vec<f64>,
}

/// Summary statistic contrasting complementary-table message pairs with the
/// population; reported, never asserted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityContrast {
    pub complementary_mean: f64,
    pub all_pairs_mean: f64,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

impl MessageAtlas {
    pub fn num_tasks(&self) -> usize {
        self.rows.len()
    }

    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        self.similarity[i * self.rows.len() + j]
    }

    pub fn similarity_matrix(&self) -> &[f64] {
        &self.similarity
    }

    /// Mean similarity among complementary pairs (task `k` vs its bitwise
    /// complement `n-1-k`) against the mean over all distinct pairs.
    pub fn similarity_contrast(&self) -> SimilarityContrast {
        let n = self.rows.len();
        let mut comp_sum = 0.0;
        let mut comp_count = 0usize;
        for k in 0..n / 2 {
            comp_sum += self.similarity(k, n - 1 - k);
            comp_count += 1;
        }
        let mut all_sum = 0.0;
        let mut all_count = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                all_sum += self.similarity(i, j);
                all_count += 1;
            }
        }
        let mean = |s: f64, c: usize| if c == 0 { 0.0 } else { s / c as f64 };
        SimilarityContrast {
            complementary_mean: mean(comp_sum, comp_count),
            all_pairs_mean: mean(all_sum, all_count),
        }
    }
}

/// One message per task from its owner, plus the symmetric cosine matrix.
/// The diagonal is exactly 1 for nonzero messages and 0 for zero messages.
pub fn build_message_atlas(
    agents: &[Agent],
    allocation: &Allocation,
    task_ids: &[TaskId],
) -> Result<MessageAtlas> {
    let messages = owner_messages(agents, allocation, task_ids)?;
    let n = messages.len();
    let rows: Vec<AtlasRow> = messages
        .iter()
        .enumerate()
        .map(|(t, m)| AtlasRow {
            task_index: t,
            owner: m.origin_agent,
            values: m.values.clone(),
        })
        .collect();

    let mut similarity = vec![0.0; n * n];
    let upper = |i: usize, j: usize| -> f64 { cosine(&rows[i].values, &rows[j].values) };

    #[cfg(feature = "parallel")]
    let entries: Vec<(usize, usize, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, upper(i, j)))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let entries: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, upper(i, j)))
        .collect();

    for (i, j, s) in entries {
        similarity[i * n + j] = s;
        similarity[j * n + i] = s;
    }
    for (i, row) in rows.iter().enumerate() {
        let nonzero = row.values.iter().any(|&v| v != 0.0);
        similarity[i * n + i] = if nonzero { 1.0 } else { 0.0 };
    }

    Ok(MessageAtlas { rows, similarity })
}
