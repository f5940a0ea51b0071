use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::tensor::{BondId, Tensor};
use crate::error::{input_err, Result};

/// A collection of tensors; a bond carried by two tensors is summed over,
/// a bond carried by one tensor is open.
#[derive(Debug, Clone, Default)]
pub struct TensorNetwork {
    tensors: Vec<Tensor>,
    labels: Vec<String>,
    next_bond: u32,
}

/// Bond structure of one tensor, enough for planning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorShape {
    pub bonds: Vec<BondId>,
    pub dims: Vec<usize>,
}

impl TensorShape {
    pub fn size(&self) -> f64 {
        self.dims.iter().map(|&d| d as f64).product()
    }
}

#[derive(Serialize)]
struct DebugTensor<'a> {
    id: usize,
    label: &'a str,
    bonds: Vec<u32>,
    dims: &'a [usize],
}

#[derive(Serialize)]
struct DebugNetwork<'a> {
    tensors: Vec<DebugTensor<'a>>,
    open_bonds: Vec<u32>,
    /// bond -> ids of the tensors carrying it
    adjacency: BTreeMap<u32, Vec<usize>>,
}

impl TensorNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_bond(&mut self) -> BondId {
        let b = BondId(self.next_bond);
        self.next_bond += 1;
        b
    }

    pub fn push(&mut self, tensor: Tensor, label: impl Into<String>) -> usize {
        for b in tensor.bonds() {
            self.next_bond = self.next_bond.max(b.0 + 1);
        }
        self.tensors.push(tensor);
        self.labels.push(label.into());
        self.tensors.len() - 1
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn into_tensors(self) -> Vec<Tensor> {
        self.tensors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn shapes(&self) -> Vec<TensorShape> {
        self.tensors
            .iter()
            .map(|t| TensorShape { bonds: t.bonds().to_vec(), dims: t.dims().to_vec() })
            .collect()
    }

    fn incidence(&self) -> HashMap<BondId, Vec<usize>> {
        let mut inc: HashMap<BondId, Vec<usize>> = HashMap::new();
        for (k, t) in self.tensors.iter().enumerate() {
            for &b in t.bonds() {
                inc.entry(b).or_default().push(k);
            }
        }
        inc
    }

    /// Every bond is carried by one or two tensors with matching dimension.
    pub fn validate(&self) -> Result<()> {
        for (bond, owners) in self.incidence() {
            if owners.len() > 2 {
                return input_err(format!("{bond} is carried by {} tensors", owners.len()));
            }
            if owners.len() == 2 {
                let d0 = self.tensors[owners[0]].dim_of(bond);
                let d1 = self.tensors[owners[1]].dim_of(bond);
                if d0 != d1 {
                    return input_err(format!("{bond} has mismatched dimensions {d0:?} / {d1:?}"));
                }
            }
        }
        Ok(())
    }

    pub fn open_bonds(&self) -> Vec<BondId> {
        let mut open: Vec<BondId> = self
            .incidence()
            .into_iter()
            .filter(|(_, o)| o.len() == 1)
            .map(|(b, _)| b)
            .collect();
        open.sort_unstable();
        open
    }

    pub fn is_closed(&self) -> bool {
        self.open_bonds().is_empty()
    }

    /// Replace every group of bonds joining the same pair of tensors with a
    /// single bond of product dimension.
    pub fn fuse_multibonds(&mut self) -> Result<usize> {
        let mut by_pair: BTreeMap<(usize, usize), Vec<BondId>> = BTreeMap::new();
        for (bond, owners) in self.incidence() {
            if let [a, b] = owners[..] {
                by_pair.entry((a.min(b), a.max(b))).or_default().push(bond);
            }
        }
        let mut fused = 0;
        for ((a, b), mut group) in by_pair {
            if group.len() < 2 {
                continue;
            }
            group.sort_unstable();
            let new = self.new_bond();
            self.tensors[a] = self.tensors[a].fuse(&group, new)?;
            self.tensors[b] = self.tensors[b].fuse(&group, new)?;
            fused += 1;
        }
        Ok(fused)
    }

    /// Shapes and bond adjacency as JSON, for inspecting plans.
    pub fn debug_json(&self) -> Result<String> {
        let adjacency = self
            .incidence()
            .into_iter()
            .map(|(b, mut o)| {
                o.sort_unstable();
                (b.0, o)
            })
            .collect();
        let dump = DebugNetwork {
            tensors: self
                .tensors
                .iter()
                .zip(&self.labels)
                .enumerate()
                .map(|(id, (t, label))| DebugTensor {
                    id,
                    label,
                    bonds: t.bonds().iter().map(|b| b.0).collect(),
                    dims: t.dims(),
                })
                .collect(),
            open_bonds: self.open_bonds().iter().map(|b| b.0).collect(),
            adjacency,
        };
        Ok(serde_json::to_string_pretty(&dump)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensornet::tensor::contract_pair;
    use num_complex::Complex64;

    fn t(bonds: &[u32], dims: &[usize], seed: f64) -> Tensor {
        let size: usize = dims.iter().product();
        let data = (0..size).map(|k| Complex64::new(seed + k as f64, 0.5 * k as f64)).collect();
        Tensor::new(bonds.iter().map(|&b| BondId(b)).collect(), dims.to_vec(), data).unwrap()
    }

    #[test]
    fn validate_and_open_bonds() {
        let mut net = TensorNetwork::new();
        net.push(t(&[0, 1], &[2, 3], 1.0), "a");
        net.push(t(&[1, 2], &[3, 2], 2.0), "b");
        net.validate().unwrap();
        assert_eq!(net.open_bonds(), vec![BondId(0), BondId(2)]);
        assert!(!net.is_closed());
        net.push(t(&[1], &[3], 0.0), "c");
        assert!(net.validate().is_err());

        let mut bad = TensorNetwork::new();
        bad.push(t(&[0], &[2], 1.0), "a");
        bad.push(t(&[0], &[3], 1.0), "b");
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fusion_preserves_contraction_value() {
        let mut net = TensorNetwork::new();
        net.push(t(&[0, 1, 2], &[2, 3, 4], 1.0), "a");
        net.push(t(&[2, 0, 1], &[4, 2, 3], -1.0), "b");
        let before = contract_pair(&net.tensors()[0], &net.tensors()[1]).into_scalar().unwrap();
        assert_eq!(net.fuse_multibonds().unwrap(), 1);
        assert_eq!(net.tensors()[0].rank(), 1);
        assert_eq!(net.tensors()[0].dims(), &[24]);
        let after = contract_pair(&net.tensors()[0], &net.tensors()[1]).into_scalar().unwrap();
        assert!((before - after).norm() < 1e-9 * before.norm());
    }

    #[test]
    fn debug_dump_lists_adjacency() {
        let mut net = TensorNetwork::new();
        net.push(t(&[0], &[4], 1.0), "t");
        net.push(t(&[0], &[4], 1.0), "m");
        let v: serde_json::Value = serde_json::from_str(&net.debug_json().unwrap()).unwrap();
        assert_eq!(v["adjacency"]["0"], serde_json::json!([0, 1]));
        assert_eq!(v["tensors"][1]["label"], "m");
    }
}
