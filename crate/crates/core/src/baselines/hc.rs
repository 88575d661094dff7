//! Agglomerative hierarchical clustering (average and complete linkage).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::{Metric, SimilarityMatrix};
use crate::dendrogram::{newick, SlotMerge};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    #[default]
    Average,
    Complete,
}

/// One merge. Leaves are clusters `0..p`; the cluster created by merge `k`
/// gets id `p + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HcMerge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HcTree {
    pub linkage: Linkage,
    pub merges: Vec<HcMerge>,
    #[serde(skip)]
    slots: Vec<SlotMerge>,
}

impl HcTree {
    pub fn p(&self) -> usize {
        self.merges.len() + 1
    }

    /// Merges over leaf slots; a merged cluster occupies the lower slot of
    /// its two children.
    pub fn slot_merges(&self) -> &[SlotMerge] {
        &self.slots
    }

    pub fn to_newick(&self, leaf_names: &[String]) -> String {
        let labels: Vec<f64> = self.merges.iter().map(|m| m.distance).collect();
        newick(leaf_names, &self.slots, &labels)
    }

    /// Height at which each pair of leaves first shares a cluster.
    pub fn cophenetic(&self) -> Array2<f64> {
        let p = self.p();
        let mut members: Vec<Vec<usize>> = (0..p).map(|i| vec![i]).collect();
        let mut out = Array2::zeros((p, p));
        for (m, s) in self.merges.iter().zip(&self.slots) {
            let right = std::mem::take(&mut members[s.right]);
            let left = std::mem::take(&mut members[s.left]);
            for &a in &left {
                for &b in &right {
                    out[[a, b]] = m.distance;
                    out[[b, a]] = m.distance;
                }
            }
            members[s.survivor] = left.into_iter().chain(right).collect();
        }
        out
    }
}

/// `1 - |corr|` with a zero diagonal.
pub fn dissimilarity_from_similarity(s: &SimilarityMatrix) -> Result<Array2<f64>> {
    if s.metric() != Metric::AbsCorrelation {
        return Err(Error::WrongMetric {
            expected: "abs_correlation",
        });
    }
    let mut d = s.entries().mapv(|v| (1.0 - v).max(0.0));
    d.diag_mut().fill(0.0);
    Ok(d)
}

fn validate(d: &Array2<f64>) -> Result<()> {
    let (r, c) = d.dim();
    if r != c {
        return Err(Error::InvalidDissimilarity(format!("not square: {r}x{c}")));
    }
    if r < 2 {
        return Err(Error::InvalidDissimilarity("need at least 2 items".into()));
    }
    for i in 0..r {
        if d[[i, i]] != 0.0 {
            return Err(Error::InvalidDissimilarity(format!(
                "nonzero diagonal at {i}"
            )));
        }
        for j in 0..r {
            let v = d[[i, j]];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDissimilarity(format!(
                    "entry ({i}, {j}) = {v}"
                )));
            }
            if (v - d[[j, i]]).abs() > 1e-12 * v.abs().max(1.0) {
                return Err(Error::InvalidDissimilarity(format!(
                    "asymmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Naive O(p^3) agglomeration with Lance-Williams updates. The closest pair
/// of active slots is merged first; ties go to the smallest `(i, j)`.
pub fn hc_fit(d: &Array2<f64>, linkage: Linkage) -> Result<HcTree> {
    validate(d)?;
    let p = d.nrows();
    let mut dist = d.clone();
    let mut active = vec![true; p];
    let mut ids: Vec<usize> = (0..p).collect();
    let mut sizes = vec![1usize; p];
    let mut merges = Vec::with_capacity(p - 1);
    let mut slots = Vec::with_capacity(p - 1);

    for step in 0..p - 1 {
        let mut best = (usize::MAX, usize::MAX);
        let mut best_d = f64::INFINITY;
        for i in 0..p {
            if !active[i] {
                continue;
            }
            for j in i + 1..p {
                if active[j] && (dist[[i, j]] < best_d || best.0 == usize::MAX) {
                    best_d = dist[[i, j]];
                    best = (i, j);
                }
            }
        }
        let (i, j) = best;
        let (ni, nj) = (sizes[i] as f64, sizes[j] as f64);
        for k in 0..p {
            if !active[k] || k == i || k == j {
                continue;
            }
            let v = match linkage {
                Linkage::Average => (ni * dist[[i, k]] + nj * dist[[j, k]]) / (ni + nj),
                Linkage::Complete => dist[[i, k]].max(dist[[j, k]]),
            };
            dist[[i, k]] = v;
            dist[[k, i]] = v;
        }
        active[j] = false;
        sizes[i] += sizes[j];
        merges.push(HcMerge {
            left: ids[i].min(ids[j]),
            right: ids[i].max(ids[j]),
            distance: best_d,
            size: sizes[i],
        });
        slots.push(SlotMerge {
            left: i,
            right: j,
            survivor: i,
        });
        ids[i] = p + step;
    }

    Ok(HcTree {
        linkage,
        merges,
        slots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_items() {
        let t = hc_fit(&array![[0.0, 0.3], [0.3, 0.0]], Linkage::Average).unwrap();
        assert_eq!(t.merges.len(), 1);
        assert_eq!(t.merges[0].distance, 0.3);
        assert_eq!((t.merges[0].left, t.merges[0].right), (0, 1));
    }

    #[test]
    fn three_items_hand_computed() {
        let d = array![[0.0, 0.1, 0.9], [0.1, 0.0, 0.9], [0.9, 0.9, 0.0]];
        for linkage in [Linkage::Average, Linkage::Complete] {
            let t = hc_fit(&d, linkage).unwrap();
            assert_eq!((t.merges[0].left, t.merges[0].right), (0, 1));
            assert_eq!(t.merges[0].distance, 0.1);
            assert_eq!((t.merges[1].left, t.merges[1].right), (2, 3));
            assert_eq!(t.merges[1].distance, 0.9);
            assert_eq!(t.merges[1].size, 3);
        }
    }

    #[test]
    fn average_and_complete_differ() {
        let d = array![[0.0, 0.1, 0.5], [0.1, 0.0, 0.7], [0.5, 0.7, 0.0]];
        let avg = hc_fit(&d, Linkage::Average).unwrap();
        let cmp = hc_fit(&d, Linkage::Complete).unwrap();
        assert!((avg.merges[1].distance - 0.6).abs() < 1e-15);
        assert_eq!(cmp.merges[1].distance, 0.7);
    }

    #[test]
    fn ties_are_lexicographic() {
        let d = array![
            [0.0, 0.5, 0.2, 0.9],
            [0.5, 0.0, 0.9, 0.2],
            [0.2, 0.9, 0.0, 0.9],
            [0.9, 0.2, 0.9, 0.0]
        ];
        let t = hc_fit(&d, Linkage::Complete).unwrap();
        assert_eq!((t.merges[0].left, t.merges[0].right), (0, 2));
        assert_eq!((t.merges[1].left, t.merges[1].right), (1, 3));
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            hc_fit(&array![[0.0, -0.1], [-0.1, 0.0]], Linkage::Average),
            Err(Error::InvalidDissimilarity(_))
        ));
        assert!(matches!(
            hc_fit(&array![[0.1, 0.2], [0.2, 0.0]], Linkage::Average),
            Err(Error::InvalidDissimilarity(_))
        ));
        assert!(matches!(
            hc_fit(&array![[0.0, 0.2], [0.3, 0.0]], Linkage::Average),
            Err(Error::InvalidDissimilarity(_))
        ));
    }

    #[test]
    fn newick_and_cophenetic() {
        let d = array![[0.0, 0.1, 0.9], [0.1, 0.0, 0.9], [0.9, 0.9, 0.0]];
        let t = hc_fit(&d, Linkage::Average).unwrap();
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(t.to_newick(&names), "((a,b)0.1,c)0.9;");
        assert_eq!(t.cophenetic(), d);
    }
}
