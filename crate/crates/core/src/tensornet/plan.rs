//! Pairwise contraction ordering by randomized greedy search.
//!
//! Each step contracts the connected pair that minimizes
//! `size(result) - size(a) - size(b)`. The first run is purely greedy; later
//! runs draw the step from the best few candidates with Boltzmann weights.
//! The cheapest plan (by the `d^(r1 + r2 + 1)` cost model) that fits the
//! memory cap wins.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::network::{TensorNetwork, TensorShape};
use super::tensor::BondId;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Bytes of one complex double.
pub const ELEMENT_BYTES: usize = 16;

/// Default intermediate-tensor memory cap: 8 GiB.
pub const DEFAULT_MEMORY_CAP: usize = 8 << 30;

const BOND_DIM: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Candidates considered per randomized step.
    pub top_k: usize,
    pub temperature: f64,
    pub memory_cap_bytes: usize,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            restarts: 8,
            seed: 0,
            top_k: 4,
            temperature: 0.5,
            memory_cap_bytes: DEFAULT_MEMORY_CAP,
        }
    }
}

/// Ordered pairwise contractions over SSA ids: the network's tensors are
/// `0..n_inputs`, step `s` produces tensor `n_inputs + s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionPlan {
    pub n_inputs: usize,
    pub steps: Vec<(usize, usize)>,
    /// Sum over steps of `4^(r1 + r2 + 1)`, with `r` the rank measured in
    /// dimension-4 bond equivalents.
    pub estimated_cost: f64,
    /// Complex multiply-adds.
    pub flops: f64,
    /// Largest tensor (inputs included), in elements.
    pub peak_elements: f64,
    /// `ceil(log4(peak_elements))`.
    pub peak_rank: usize,
}

/// Planner statistics reported alongside results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub tensors: usize,
    pub steps: usize,
    pub estimated_cost: f64,
    pub flops: f64,
    pub peak_rank: usize,
    pub peak_bytes: f64,
}

impl ContractionPlan {
    pub fn stats(&self) -> PlanStats {
        PlanStats {
            tensors: self.n_inputs,
            steps: self.steps.len(),
            estimated_cost: self.estimated_cost,
            flops: self.flops,
            peak_rank: self.peak_rank,
            peak_bytes: self.peak_elements * ELEMENT_BYTES as f64,
        }
    }

    /// Replay the plan on bond structure only; checks every id is consumed
    /// exactly once and no bond is left uncontracted between live tensors.
    pub fn validate(&self, shapes: &[TensorShape]) -> Result<()> {
        if shapes.len() != self.n_inputs {
            return Err(Error::Input(format!(
                "plan expects {} tensors, network has {}",
                self.n_inputs,
                shapes.len()
            )));
        }
        let mut live: Vec<Option<Vec<BondId>>> =
            shapes.iter().map(|s| Some(s.bonds.clone())).collect();
        for (step, &(a, b)) in self.steps.iter().enumerate() {
            let err = || Error::Input(format!("plan step {step} uses a consumed or unknown tensor"));
            if a == b {
                return Err(err());
            }
            let ta = live.get_mut(a).and_then(Option::take).ok_or_else(err)?;
            let tb = live.get_mut(b).and_then(Option::take).ok_or_else(err)?;
            let merged: Vec<BondId> = ta
                .iter()
                .filter(|x| !tb.contains(x))
                .chain(tb.iter().filter(|x| !ta.contains(x)))
                .copied()
                .collect();
            live.push(Some(merged));
        }
        let remaining: Vec<&Vec<BondId>> = live.iter().flatten().collect();
        if remaining.len() > 1 {
            return Err(Error::Input(format!("plan leaves {} tensors", remaining.len())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Node {
    bonds: Vec<BondId>,
    size: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    score: f64,
    tie: u64,
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Reversed: BinaryHeap pops the lowest score first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| other.tie.cmp(&self.tie))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Greedy<'a> {
    dims: &'a HashMap<BondId, usize>,
    nodes: Vec<Option<Node>>,
    owners: HashMap<BondId, Vec<usize>>,
    heap: BinaryHeap<Candidate>,
    counter: u64,
    plan: ContractionPlan,
}

impl<'a> Greedy<'a> {
    fn new(shapes: &[TensorShape], dims: &'a HashMap<BondId, usize>) -> Self {
        let mut owners: HashMap<BondId, Vec<usize>> = HashMap::new();
        let nodes: Vec<Option<Node>> = shapes
            .iter()
            .enumerate()
            .map(|(k, s)| {
                for &b in &s.bonds {
                    owners.entry(b).or_default().push(k);
                }
                Some(Node { bonds: s.bonds.clone(), size: s.size() })
            })
            .collect();
        let peak = nodes.iter().flatten().map(|n| n.size).fold(1.0, f64::max);
        let mut g = Greedy {
            dims,
            nodes,
            owners,
            heap: BinaryHeap::new(),
            counter: 0,
            plan: ContractionPlan {
                n_inputs: shapes.len(),
                steps: Vec::new(),
                estimated_cost: 0.0,
                flops: 0.0,
                peak_elements: peak,
                peak_rank: 0,
            },
        };
        for k in 0..g.nodes.len() {
            g.push_candidates(k);
        }
        g
    }

    fn merged_bonds(&self, a: usize, b: usize) -> (Vec<BondId>, f64, f64) {
        let na = self.nodes[a].as_ref().unwrap();
        let nb = self.nodes[b].as_ref().unwrap();
        let mut out = Vec::with_capacity(na.bonds.len() + nb.bonds.len());
        let mut out_size = 1.0;
        let mut shared_size = 1.0;
        for &x in &na.bonds {
            if nb.bonds.contains(&x) {
                shared_size *= self.dims[&x] as f64;
            } else {
                out.push(x);
                out_size *= self.dims[&x] as f64;
            }
        }
        for &x in &nb.bonds {
            if !na.bonds.contains(&x) {
                out.push(x);
                out_size *= self.dims[&x] as f64;
            }
        }
        (out, out_size, shared_size)
    }

    fn score(&self, a: usize, b: usize) -> f64 {
        let (_, out, _) = self.merged_bonds(a, b);
        out - self.nodes[a].as_ref().unwrap().size - self.nodes[b].as_ref().unwrap().size
    }

    fn push_candidates(&mut self, k: usize) {
        let Some(node) = self.nodes[k].as_ref() else { return };
        let mut neighbours: Vec<usize> = node
            .bonds
            .iter()
            .flat_map(|b| self.owners[b].iter().copied())
            .filter(|&o| o != k)
            .collect();
        neighbours.sort_unstable();
        neighbours.dedup();
        for o in neighbours {
            let score = self.score(k, o);
            self.counter += 1;
            self.heap.push(Candidate { score, tie: self.counter, a: k.min(o), b: k.max(o) });
        }
    }

    fn alive(&self, c: &Candidate) -> bool {
        self.nodes[c.a].is_some() && self.nodes[c.b].is_some()
    }

    fn contract(&mut self, a: usize, b: usize) {
        let (bonds, out_size, shared_size) = self.merged_bonds(a, b);
        let sa = self.nodes[a].as_ref().unwrap().size;
        let sb = self.nodes[b].as_ref().unwrap().size;
        // d^(r1 + r2 + 1) with r = log_d(size)
        self.plan.estimated_cost += BOND_DIM * sa * sb;
        self.plan.flops += out_size * shared_size;
        self.plan.peak_elements = self.plan.peak_elements.max(out_size);
        self.plan.steps.push((a, b));
        let new = self.nodes.len();
        for x in &self.nodes[a].as_ref().unwrap().bonds.clone() {
            self.owners.get_mut(x).unwrap().retain(|&o| o != a);
        }
        for x in &self.nodes[b].as_ref().unwrap().bonds.clone() {
            self.owners.get_mut(x).unwrap().retain(|&o| o != b);
        }
        for &x in &bonds {
            self.owners.get_mut(&x).unwrap().push(new);
        }
        self.nodes[a] = None;
        self.nodes[b] = None;
        self.nodes.push(Some(Node { bonds, size: out_size }));
        self.push_candidates(new);
    }

    fn pick(&mut self, rng: Option<(&mut impl Rng, usize, f64)>) -> Option<Candidate> {
        let mut pool = Vec::new();
        let want = rng.as_ref().map_or(1, |r| r.1.max(1));
        while pool.len() < want {
            match self.heap.pop() {
                Some(c) if self.alive(&c) => pool.push(c),
                Some(_) => continue,
                None => break,
            }
        }
        if pool.is_empty() {
            return None;
        }
        let chosen = match rng {
            Some((rng, _, temp)) if pool.len() > 1 && temp > 0.0 => {
                let best = pool[0].score;
                let scale = temp * (best.abs() + 1.0);
                let weights: Vec<f64> = pool.iter().map(|c| (-(c.score - best) / scale).exp()).collect();
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let mut idx = pool.len() - 1;
                for (k, w) in weights.iter().enumerate() {
                    if u < *w {
                        idx = k;
                        break;
                    }
                    u -= w;
                }
                idx
            }
            _ => 0,
        };
        let c = pool.swap_remove(chosen);
        for rest in pool {
            self.heap.push(rest);
        }
        Some(c)
    }

    fn run(mut self, mut rng: Option<(&mut impl Rng, usize, f64)>) -> ContractionPlan {
        loop {
            let r = rng.as_mut().map(|(g, k, t)| (&mut **g, *k, *t));
            match self.pick(r) {
                Some(c) => self.contract(c.a, c.b),
                None => break,
            }
        }
        // Disconnected components: combine the leftovers smallest first.
        let mut rest: Vec<usize> = (0..self.nodes.len()).filter(|&k| self.nodes[k].is_some()).collect();
        while rest.len() > 1 {
            rest.sort_by(|&x, &y| {
                let sx = self.nodes[x].as_ref().unwrap().size;
                let sy = self.nodes[y].as_ref().unwrap().size;
                sy.total_cmp(&sx)
            });
            let a = rest.pop().unwrap();
            let b = rest.pop().unwrap();
            self.contract(a.min(b), a.max(b));
            rest.push(self.nodes.len() - 1);
        }
        self.plan.peak_rank = rank_equivalent(self.plan.peak_elements);
        self.plan
    }
}

fn rank_equivalent(elements: f64) -> usize {
    (elements.log(BOND_DIM) - 1e-9).ceil().max(0.0) as usize
}

/// Best of `opts.restarts` greedy runs over the network's bond structure.
pub fn plan_contraction_with(net: &TensorNetwork, opts: &PlannerOptions) -> Result<ContractionPlan> {
    net.validate()?;
    let shapes = net.shapes();
    plan_shapes(&shapes, opts)
}

pub fn plan_contraction(net: &TensorNetwork, restarts: usize, seed: u64) -> Result<ContractionPlan> {
    plan_contraction_with(net, &PlannerOptions { restarts, seed, ..Default::default() })
}

pub(crate) fn plan_shapes(shapes: &[TensorShape], opts: &PlannerOptions) -> Result<ContractionPlan> {
    if shapes.is_empty() {
        return Err(Error::Input("cannot plan an empty network".into()));
    }
    let mut dims = HashMap::new();
    for s in shapes {
        for (&b, &d) in s.bonds.iter().zip(&s.dims) {
            dims.insert(b, d);
        }
    }
    let cap_elements = (opts.memory_cap_bytes / ELEMENT_BYTES) as f64;
    let mut best: Option<ContractionPlan> = None;
    let mut rng = stream_rng(opts.seed, 0x706c_616e);
    for run in 0..opts.restarts.max(1) {
        let greedy = Greedy::new(shapes, &dims);
        let plan = if run == 0 {
            greedy.run(None::<(&mut rand_chacha::ChaCha8Rng, usize, f64)>)
        } else {
            greedy.run(Some((&mut rng, opts.top_k, opts.temperature)))
        };
        let better = match &best {
            None => true,
            Some(b) => {
                let fits = plan.peak_elements <= cap_elements;
                let best_fits = b.peak_elements <= cap_elements;
                match (fits, best_fits) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => plan.estimated_cost < b.estimated_cost,
                    (false, false) => plan.peak_elements < b.peak_elements,
                }
            }
        };
        if better {
            best = Some(plan);
        }
    }
    Ok(best.expect("at least one planner run"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensornet::tensor::Tensor;
    use num_complex::Complex64;

    fn vec_tensor(bonds: &[u32], dim: usize) -> Tensor {
        let size = dim.pow(bonds.len() as u32);
        Tensor::new(
            bonds.iter().map(|&b| BondId(b)).collect(),
            vec![dim; bonds.len()],
            vec![Complex64::new(1.0, 0.0); size],
        )
        .unwrap()
    }

    #[test]
    fn two_vectors_single_step() {
        let mut net = TensorNetwork::new();
        net.push(vec_tensor(&[0], 4), "x");
        net.push(vec_tensor(&[0], 4), "y");
        let plan = plan_contraction(&net, 1, 0).unwrap();
        assert_eq!(plan.steps, vec![(0, 1)]);
        assert_eq!(plan.estimated_cost, 64.0);
        plan.validate(&net.shapes()).unwrap();
    }

    #[test]
    fn chain_of_three_has_two_steps() {
        let mut net = TensorNetwork::new();
        net.push(vec_tensor(&[0], 4), "x");
        net.push(vec_tensor(&[0, 1], 4), "m");
        net.push(vec_tensor(&[1], 4), "y");
        let plan = plan_contraction(&net, 3, 1).unwrap();
        assert_eq!(plan.steps.len(), 2);
        plan.validate(&net.shapes()).unwrap();
    }

    #[test]
    fn disconnected_components_are_joined() {
        let mut net = TensorNetwork::new();
        for k in 0..3 {
            net.push(vec_tensor(&[k], 4), "x");
            net.push(vec_tensor(&[k], 4), "y");
        }
        let plan = plan_contraction(&net, 2, 5).unwrap();
        assert_eq!(plan.steps.len(), 5);
        plan.validate(&net.shapes()).unwrap();
    }

    #[test]
    fn planning_is_deterministic_per_seed() {
        let mut net = TensorNetwork::new();
        for k in 0..10u32 {
            net.push(vec_tensor(&[k, k + 1], 4), "m");
        }
        net.push(vec_tensor(&[0], 4), "l");
        net.push(vec_tensor(&[10], 4), "r");
        let a = plan_contraction(&net, 6, 42).unwrap();
        let b = plan_contraction(&net, 6, 42).unwrap();
        assert_eq!(a, b);
        a.validate(&net.shapes()).unwrap();
    }

    #[test]
    fn validate_rejects_reuse() {
        let mut net = TensorNetwork::new();
        net.push(vec_tensor(&[0], 4), "x");
        net.push(vec_tensor(&[0], 4), "y");
        let mut plan = plan_contraction(&net, 1, 0).unwrap();
        plan.steps.push((0, 2));
        assert!(plan.validate(&net.shapes()).is_err());
    }
}
