use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dendrogram::{Dendrogram, SlotMerge};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPurity {
    pub label: usize,
    pub pure_merges: usize,
    /// Impure merges with at least one participant still carrying this label.
    pub impure_merges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityScore {
    pub value: f64,
    /// Number of merges evaluated: `min(merges made, p - #blocks)`.
    pub level: usize,
    pub pure_merges: usize,
    pub per_block: Vec<BlockPurity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlotLabel {
    Block(usize),
    Mixed,
}

/// Fraction of the first `p - #blocks` merges that join two participants of
/// the same block. A pure merge passes its label to the surviving slot; an
/// impure one marks the survivor mixed, and every later merge involving a
/// mixed participant is impure.
pub fn merge_purity_slots(merges: &[SlotMerge], labels: &[usize]) -> PurityScore {
    let blocks: BTreeSet<usize> = labels.iter().copied().collect();
    let budget = labels.len().saturating_sub(blocks.len());
    let evaluated = budget.min(merges.len());

    let mut state: Vec<SlotLabel> = labels.iter().map(|&l| SlotLabel::Block(l)).collect();
    let mut per_block: BTreeMap<usize, BlockPurity> = blocks
        .iter()
        .map(|&label| {
            (
                label,
                BlockPurity {
                    label,
                    pure_merges: 0,
                    impure_merges: 0,
                },
            )
        })
        .collect();
    let mut pure = 0;
    for m in &merges[..evaluated] {
        let (a, b) = (state[m.left], state[m.right]);
        let next = match (a, b) {
            (SlotLabel::Block(x), SlotLabel::Block(y)) if x == y => {
                pure += 1;
                per_block.get_mut(&x).expect("known label").pure_merges += 1;
                SlotLabel::Block(x)
            }
            _ => {
                let touched: BTreeSet<usize> = [a, b]
                    .into_iter()
                    .filter_map(|s| match s {
                        SlotLabel::Block(l) => Some(l),
                        SlotLabel::Mixed => None,
                    })
                    .collect();
                for l in touched {
                    per_block.get_mut(&l).expect("known label").impure_merges += 1;
                }
                SlotLabel::Mixed
            }
        };
        state[m.survivor] = next;
    }
    let value = if evaluated == 0 {
        1.0
    } else {
        pure as f64 / evaluated as f64
    };
    PurityScore {
        value,
        level: evaluated,
        pure_merges: pure,
        per_block: per_block.into_values().collect(),
    }
}

pub fn merge_purity(dend: &Dendrogram, labels: &[usize]) -> Result<PurityScore> {
    if labels.len() != dend.p() {
        return Err(Error::LabelMismatch {
            labels: labels.len(),
            p: dend.p(),
        });
    }
    Ok(merge_purity_slots(&dend.slot_merges(), labels))
}
