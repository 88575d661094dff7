//! Merge trees and their Newick / JSON export.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One treelet merge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeNode {
    pub level: usize,
    pub alpha: usize,
    pub beta: usize,
    pub sum_index: usize,
    /// Similarity of the pair at selection time (signed for covariance).
    pub similarity: f64,
    pub theta: f64,
    pub var_sum: f64,
    pub var_diff: f64,
}

impl MergeNode {
    pub fn diff_index(&self) -> usize {
        if self.sum_index == self.alpha {
            self.beta
        } else {
            self.alpha
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    leaf_names: Vec<String>,
    nodes: Vec<MergeNode>,
}

impl Dendrogram {
    pub fn new(leaf_names: Vec<String>, nodes: Vec<MergeNode>) -> Result<Self> {
        let p = leaf_names.len();
        let mut active = vec![true; p];
        for (i, node) in nodes.iter().enumerate() {
            let ok = node.level == i + 1
                && node.alpha < node.beta
                && node.beta < p
                && active[node.alpha]
                && active[node.beta]
                && (node.sum_index == node.alpha || node.sum_index == node.beta);
            if !ok {
                return Err(Error::InvalidMatrix(format!(
                    "inconsistent merge record at position {i}"
                )));
            }
            active[node.diff_index()] = false;
        }
        Ok(Dendrogram { leaf_names, nodes })
    }

    pub fn leaf_names(&self) -> &[String] {
        &self.leaf_names
    }

    pub fn nodes(&self) -> &[MergeNode] {
        &self.nodes
    }

    pub fn p(&self) -> usize {
        self.leaf_names.len()
    }

    /// Merges in slot form: `(left, right, survivor)`.
    pub fn slot_merges(&self) -> Vec<SlotMerge> {
        self.nodes
            .iter()
            .map(|n| SlotMerge {
                left: n.alpha,
                right: n.beta,
                survivor: n.sum_index,
            })
            .collect()
    }

    /// Newick with each internal node labelled by its merge similarity. If
    /// fewer than `p - 1` merges were made, the remaining subtrees hang off
    /// an unlabelled root.
    pub fn to_newick(&self) -> String {
        let labels: Vec<f64> = self.nodes.iter().map(|n| n.similarity).collect();
        newick(&self.leaf_names, &self.slot_merges(), &labels)
    }
}

/// A merge expressed over variable slots: clusters `left` and `right` join
/// and the result occupies slot `survivor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotMerge {
    pub left: usize,
    pub right: usize,
    pub survivor: usize,
}

fn quote_name(name: &str) -> String {
    let special = |c: char| c.is_whitespace() || "()[]':;,".contains(c);
    if name.is_empty() || name.chars().any(special) {
        format!("'{}'", name.replace('\'', "''"))
    } else {
        name.to_string()
    }
}

pub(crate) fn newick(leaf_names: &[String], merges: &[SlotMerge], labels: &[f64]) -> String {
    let mut subtree: Vec<Option<String>> = leaf_names.iter().map(|n| Some(quote_name(n))).collect();
    for (m, label) in merges.iter().zip(labels) {
        let left = subtree[m.left].take().unwrap_or_default();
        let right = subtree[m.right].take().unwrap_or_default();
        subtree[m.survivor] = Some(format!("({left},{right}){label}"));
    }
    let roots: Vec<String> = subtree.into_iter().flatten().collect();
    if roots.len() == 1 {
        format!("{};", roots[0])
    } else {
        format!("({});", roots.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(level: usize, alpha: usize, beta: usize, sum: usize, sim: f64) -> MergeNode {
        MergeNode {
            level,
            alpha,
            beta,
            sum_index: sum,
            similarity: sim,
            theta: 0.0,
            var_sum: 1.0,
            var_diff: 0.0,
        }
    }

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|i| format!("g{i}")).collect()
    }

    #[test]
    fn newick_full_tree() {
        let d = Dendrogram::new(
            names(3),
            vec![node(1, 0, 2, 2, 0.9), node(2, 1, 2, 1, 0.25)],
        )
        .unwrap();
        assert_eq!(d.to_newick(), "(g1,(g0,g2)0.9)0.25;");
    }

    #[test]
    fn newick_partial_tree_and_quoting() {
        let leaves = vec!["a b".to_string(), "c".into(), "it's".into()];
        let d = Dendrogram::new(leaves, vec![node(1, 0, 1, 0, 0.5)]).unwrap();
        assert_eq!(d.to_newick(), "(('a b',c)0.5,'it''s');");
    }

    #[test]
    fn rejects_merge_of_frozen_variable() {
        let err = Dendrogram::new(names(3), vec![node(1, 0, 1, 0, 0.5), node(2, 1, 2, 2, 0.1)]);
        assert!(err.is_err());
        let err = Dendrogram::new(names(3), vec![node(2, 0, 1, 0, 0.5)]);
        assert!(err.is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = Dendrogram::new(names(2), vec![node(1, 0, 1, 0, 0.75)]).unwrap();
        let back: Dendrogram = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }
}
