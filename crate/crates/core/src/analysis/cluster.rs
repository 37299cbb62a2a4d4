use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SimilarityMatrix;

/// Cluster-distance update rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

impl Linkage {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "single" => Some(Linkage::Single),
            "complete" => Some(Linkage::Complete),
            "average" => Some(Linkage::Average),
            _ => None,
        }
    }
}

/// One agglomeration step. Leaves are nodes `0..n`; the cluster created by
/// merge `i` is node `n + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub size: usize,
}

impl Serialize for Merge {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(4))?;
        seq.serialize_element(&self.a)?;
        seq.serialize_element(&self.b)?;
        seq.serialize_element(&self.distance)?;
        seq.serialize_element(&self.size)?;
        seq.end()
    }
}

/// Merge list in the layout of common plotting libraries: rows
/// `[a, b, distance, size]`, `a < b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Leaves left to right, drawing the first child of every merge first.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.leaves.len();
        if self.merges.is_empty() {
            return (0..n).collect();
        }
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![n + self.merges.len() - 1];
        while let Some(node) = stack.pop() {
            if node < n {
                order.push(node);
            } else {
                let m = &self.merges[node - n];
                stack.push(m.b);
                stack.push(m.a);
            }
        }
        order
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("dendrogram serializes");
        s.push('\n');
        s
    }
}

const TIE: f64 = 1e-12;

/// Average-linkage clustering on `1 − S`.
pub fn hierarchical_cluster(s: &SimilarityMatrix) -> Result<Dendrogram> {
    hierarchical_cluster_with(s, Linkage::Average)
}

/// Agglomerative clustering on `d = 1 − S`.
///
/// Each step merges the closest pair of active clusters; pairs within
/// `1e-12` of the minimum count as tied and the smallest `(a, b)` node pair
/// wins.
pub fn hierarchical_cluster_with(s: &SimilarityMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = s.len();
    if n < 2 {
        return Err(Error::argument("clustering needs at least 2 concepts"));
    }
    // slot i holds a live cluster; dist is indexed by slot
    let mut dist: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 1.0 - s.get(i, j)).collect()).collect();
    let mut node: Vec<usize> = (0..n).collect();
    let mut size: Vec<usize> = vec![1; n];
    let mut alive: Vec<bool> = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let live: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        let mut min = f64::INFINITY;
        for (x, &i) in live.iter().enumerate() {
            for &j in &live[x + 1..] {
                min = min.min(dist[i][j]);
            }
        }
        let mut pick: Option<(usize, usize, usize, usize)> = None;
        for (x, &i) in live.iter().enumerate() {
            for &j in &live[x + 1..] {
                if dist[i][j] > min + TIE {
                    continue;
                }
                let ids = (node[i].min(node[j]), node[i].max(node[j]));
                if pick.is_none_or(|(a, b, _, _)| ids < (a, b)) {
                    pick = Some((ids.0, ids.1, i, j));
                }
            }
        }
        let (a, b, i, j) = pick.expect("at least two live clusters");
        let d = dist[i][j];
        let (si, sj) = (size[i] as f64, size[j] as f64);
        for &k in &live {
            if k == i || k == j {
                continue;
            }
            let updated = match linkage {
                Linkage::Single => dist[i][k].min(dist[j][k]),
                Linkage::Complete => dist[i][k].max(dist[j][k]),
                Linkage::Average => (si * dist[i][k] + sj * dist[j][k]) / (si + sj),
            };
            dist[i][k] = updated;
            dist[k][i] = updated;
        }
        alive[j] = false;
        size[i] += size[j];
        node[i] = n + step;
        merges.push(Merge {
            a,
            b,
            distance: d,
            size: size[i],
        });
    }
    Ok(Dendrogram {
        leaves: s.ids().to_vec(),
        merges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(n: usize, v: &[f64]) -> SimilarityMatrix {
        SimilarityMatrix::new((0..n).map(|i| format!("c{i}")).collect(), v.to_vec()).unwrap()
    }

    #[test]
    fn two_concepts() {
        let d = hierarchical_cluster(&sim(2, &[1.0, 0.25, 0.25, 1.0])).unwrap();
        assert_eq!(
            d.merges,
            vec![Merge {
                a: 0,
                b: 1,
                distance: 0.75,
                size: 2
            }]
        );
        assert!(hierarchical_cluster(&sim(1, &[1.0])).is_err());
    }

    #[test]
    fn average_linkage_by_hand() {
        // d(0,1)=0.1, d(2,3)=0.2, others: d(0,2)=0.6 d(0,3)=0.8 d(1,2)=0.7 d(1,3)=0.9
        #[rustfmt::skip]
        let s = sim(4, &[
            1.0, 0.9, 0.4, 0.2,
            0.9, 1.0, 0.3, 0.1,
            0.4, 0.3, 1.0, 0.8,
            0.2, 0.1, 0.8, 1.0,
        ]);
        let d = hierarchical_cluster(&s).unwrap();
        let rows: Vec<(usize, usize, usize)> = d.merges.iter().map(|m| (m.a, m.b, m.size)).collect();
        assert_eq!(rows, vec![(0, 1, 2), (2, 3, 2), (4, 5, 4)]);
        assert!((d.merges[0].distance - 0.1).abs() < 1e-12);
        assert!((d.merges[1].distance - 0.2).abs() < 1e-12);
        assert!((d.merges[2].distance - 0.75).abs() < 1e-12);
        let single = hierarchical_cluster_with(&s, Linkage::Single).unwrap();
        assert!((single.merges[2].distance - 0.6).abs() < 1e-12);
        let complete = hierarchical_cluster_with(&s, Linkage::Complete).unwrap();
        assert!((complete.merges[2].distance - 0.9).abs() < 1e-12);
        assert_eq!(d.leaf_order(), vec![0, 1, 2, 3]);
        assert_eq!(
            d.to_json(),
            "{\"leaves\":[\"c0\",\"c1\",\"c2\",\"c3\"],\"merges\":[[0,1,0.09999999999999998,2],[2,3,0.19999999999999996,2],[4,5,0.75,4]]}\n"
        );
    }

    #[test]
    fn ties_pick_smallest_pair() {
        let s = sim(3, &[1.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 1.0]);
        let d = hierarchical_cluster(&s).unwrap();
        assert_eq!((d.merges[0].a, d.merges[0].b), (0, 1));
        assert_eq!((d.merges[1].a, d.merges[1].b), (2, 3));
    }
}
