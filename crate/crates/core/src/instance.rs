//! Spin-glass problem instances and the random families used in the
//! experiments.
//!
//! The Hamiltonian is always stored in the canonical diagonal form
//!
//! ```text
//! H_P = sum_(i,j) J_ij s_i s_j + sum_i h_i s_i + c
//! ```
//!
//! with spin `s = +1` for bit 0 and `s = -1` for bit 1. Qubit `k` is bit `k`
//! of a basis index (least significant bit is qubit 0), and the `k`-th
//! character of an assignment string.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Largest instance [`SpinGlass::spectrum`] will enumerate.
pub const MAX_SPECTRUM_SPINS: usize = 26;

/// Pairings tried by the configuration model before switching sub-seed.
const PAIRING_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, f64)", into = "(usize, usize, f64)")]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub coupling: f64,
}

impl From<(usize, usize, f64)> for Edge {
    fn from((i, j, coupling): (usize, usize, f64)) -> Self {
        Edge { i, j, coupling }
    }
}

impl From<Edge> for (usize, usize, f64) {
    fn from(e: Edge) -> Self {
        (e.i, e.j, e.coupling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[serde(rename = "maxcut3reg")]
    MaxCutRegular,
    #[serde(rename = "grid2d")]
    Grid2d,
    /// Random 4-regular graph with `+-1` couplings.
    #[serde(rename = "glass4reg")]
    RegularGlass,
    Tree,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::MaxCutRegular => "maxcut3reg",
            Family::Grid2d => "grid2d",
            Family::RegularGlass => "glass4reg",
            Family::Tree => "tree",
            Family::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxcut3reg" | "maxcut" => Ok(Family::MaxCutRegular),
            "grid2d" | "grid" => Ok(Family::Grid2d),
            "glass4reg" | "glass" => Ok(Family::RegularGlass),
            "tree" => Ok(Family::Tree),
            "custom" => Ok(Family::Custom),
            other => input_err(format!("unknown family `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub family: Family,
    pub seed: u64,
}

/// A weighted interaction graph with local fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpinGlassFile", into = "SpinGlassFile")]
pub struct SpinGlass {
    n: usize,
    edges: Vec<Edge>,
    fields: Vec<f64>,
    constant: f64,
    meta: Option<InstanceMeta>,
}

#[derive(Serialize, Deserialize)]
struct SpinGlassFile {
    n: usize,
    edges: Vec<Edge>,
    fields: Vec<f64>,
    constant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<InstanceMeta>,
}

impl TryFrom<SpinGlassFile> for SpinGlass {
    type Error = Error;

    fn try_from(f: SpinGlassFile) -> Result<Self> {
        let mut sg = SpinGlass::new(f.n, f.edges, f.fields, f.constant)?;
        sg.meta = f.meta;
        Ok(sg)
    }
}

impl From<SpinGlass> for SpinGlassFile {
    fn from(sg: SpinGlass) -> Self {
        SpinGlassFile {
            n: sg.n,
            edges: sg.edges,
            fields: sg.fields,
            constant: sg.constant,
            meta: sg.meta,
        }
    }
}

impl SpinGlass {
    /// Validates and normalizes the edge list so that `i < j` for every edge.
    pub fn new(n: usize, edges: Vec<Edge>, fields: Vec<f64>, constant: f64) -> Result<Self> {
        if n == 0 {
            return input_err("a spin glass needs at least one spin");
        }
        if fields.len() != n {
            return input_err(format!("expected {n} local fields, got {}", fields.len()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            let (i, j) = (e.i.min(e.j), e.i.max(e.j));
            if i == j {
                return input_err(format!("self-loop on vertex {i}"));
            }
            if j >= n {
                return input_err(format!("edge ({i}, {j}) references a vertex >= {n}"));
            }
            if e.coupling == 0.0 || !e.coupling.is_finite() {
                return input_err(format!("edge ({i}, {j}) has coupling {}", e.coupling));
            }
            if !seen.insert((i, j)) {
                return input_err(format!("duplicate edge ({i}, {j})"));
            }
            normalized.push(Edge { i, j, coupling: e.coupling });
        }
        if fields.iter().any(|h| !h.is_finite()) || !constant.is_finite() {
            return input_err("non-finite field or constant");
        }
        Ok(SpinGlass { n, edges: normalized, fields, constant, meta: None })
    }

    /// Max-Cut encoding: every edge contributes `1/2 + 1/2 s_i s_j`, so the
    /// energy of an assignment is `|E| - cut`.
    pub fn maxcut(n: usize, graph_edges: &[(usize, usize)]) -> Result<Self> {
        let edges = graph_edges
            .iter()
            .map(|&(i, j)| Edge { i, j, coupling: 0.5 })
            .collect();
        SpinGlass::new(n, edges, vec![0.0; n], 0.5 * graph_edges.len() as f64)
    }

    pub fn with_meta(mut self, family: Family, seed: u64) -> Self {
        self.meta = Some(InstanceMeta { family, seed });
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn meta(&self) -> Option<&InstanceMeta> {
        self.meta.as_ref()
    }

    pub fn has_fields(&self) -> bool {
        self.fields.iter().any(|&h| h != 0.0)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.i == v || e.j == v).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.i] += 1;
            deg[e.j] += 1;
        }
        deg
    }

    /// Neighbor lists in edge order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        adj
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let (i, j) = (a.min(b), a.max(b));
        self.edges.iter().position(|e| e.i == i && e.j == j)
    }

    pub fn classical_energy(&self, assignment: &Assignment) -> Result<f64> {
        if assignment.len() != self.n {
            return input_err(format!(
                "assignment has {} bits, instance has {} spins",
                assignment.len(),
                self.n
            ));
        }
        Ok(self.energy_of_index(assignment.to_index()))
    }

    /// Energy of the computational basis state `index`. No bounds checks.
    #[inline]
    pub fn energy_of_index(&self, index: u64) -> f64 {
        let spin = |k: usize| if (index >> k) & 1 == 0 { 1.0 } else { -1.0 };
        let mut e = self.constant;
        for edge in &self.edges {
            e += edge.coupling * spin(edge.i) * spin(edge.j);
        }
        for (k, &h) in self.fields.iter().enumerate() {
            if h != 0.0 {
                e += h * spin(k);
            }
        }
        e
    }

    /// Diagonal of `H_P` over all `2^n` basis states.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..1u64 << self.n)
            .into_par_iter()
            .map(|idx| self.energy_of_index(idx))
            .collect()
    }

    /// Exhaustive ground/maximum energy search over all `2^n` assignments.
    pub fn spectrum(&self) -> Result<EnergySpectrum> {
        if self.n > MAX_SPECTRUM_SPINS {
            return Err(Error::Capacity(format!(
                "spectrum enumeration limited to {MAX_SPECTRUM_SPINS} spins, instance has {}",
                self.n
            )));
        }
        let total = 1u64 << self.n;
        let chunk = 1u64 << 14.min(self.n);
        let (e0, emax) = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for idx in c * chunk..((c + 1) * chunk).min(total) {
                    let e = self.energy_of_index(idx);
                    lo = lo.min(e);
                    hi = hi.max(e);
                }
                (lo, hi)
            })
            .reduce(
                || (f64::INFINITY, f64::NEG_INFINITY),
                |a, b| (a.0.min(b.0), a.1.max(b.1)),
            );
        let tol = degeneracy_tolerance(e0);
        let ground_states: Vec<u64> = (0..total.div_ceil(chunk))
            .into_par_iter()
            .flat_map_iter(|c| {
                (c * chunk..((c + 1) * chunk).min(total))
                    .filter(move |&idx| self.energy_of_index(idx) <= e0 + tol)
            })
            .collect();
        Ok(EnergySpectrum { n: self.n, e0, emax, ground_states })
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn degeneracy_tolerance(e0: f64) -> f64 {
    1e-9 * (1.0 + e0.abs())
}

/// A classical spin configuration, one bit per spin.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn from_index(index: u64, n: usize) -> Self {
        Assignment((0..n).map(|k| (index >> k) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &b)| acc | ((b as u64) << k))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Spin value of site `k`: `+1` for bit 0, `-1` for bit 1.
    pub fn spin(&self, k: usize) -> f64 {
        if self.0[k] {
            -1.0
        } else {
            1.0
        }
    }

    pub fn flipped(&self) -> Self {
        Assignment(self.0.iter().map(|b| !b).collect())
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => input_err(format!("invalid assignment character `{other}`")),
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Exact ground energy, maximum energy and the degenerate ground manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    pub n: usize,
    pub e0: f64,
    pub emax: f64,
    /// Basis indices of all assignments at energy `e0`, ascending.
    pub ground_states: Vec<u64>,
}

impl EnergySpectrum {
    pub fn ground_assignments(&self) -> Vec<Assignment> {
        self.ground_states
            .iter()
            .map(|&idx| Assignment::from_index(idx, self.n))
            .collect()
    }

    /// `(E - E0) / (Emax - E0)`, with round-off below zero clamped.
    pub fn residual_energy(&self, energy_expectation: f64) -> Result<f64> {
        let width = self.emax - self.e0;
        if width <= degeneracy_tolerance(self.e0) {
            return Err(Error::DegenerateInstance(self.e0));
        }
        let r = (energy_expectation - self.e0) / width;
        Ok(if (-1e-9..0.0).contains(&r) { 0.0 } else { r })
    }
}

/// Uniformly sampled simple `degree`-regular graph, Max-Cut encoded.
///
/// Stubs are paired by the configuration model; pairings containing a loop
/// or a repeated edge are rejected. After [`PAIRING_ATTEMPTS`] rejections the
/// sampler moves to a sub-seed derived from `seed`.
pub fn gen_regular_maxcut(n: usize, degree: usize, seed: u64) -> Result<SpinGlass> {
    if degree == 0 || n <= degree {
        return input_err(format!("need n > degree >= 1, got n={n}, degree={degree}"));
    }
    if (n * degree) % 2 != 0 {
        return input_err(format!("n * degree must be even, got {n} * {degree}"));
    }
    for round in 0u64.. {
        let mut rng = rng_from_seed(derive_seed(seed, round));
        for _ in 0..PAIRING_ATTEMPTS {
            if let Some(edges) = try_pairing(n, degree, &mut rng) {
                return Ok(SpinGlass::maxcut(n, &edges)?.with_meta(Family::MaxCutRegular, seed));
            }
        }
    }
    unreachable!("sub-seed rounds are unbounded")
}

fn try_pairing(n: usize, degree: usize, rng: &mut impl Rng) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    stubs.shuffle(rng);
    let mut seen = HashSet::with_capacity(stubs.len() / 2);
    let mut edges = Vec::with_capacity(stubs.len() / 2);
    for pair in stubs.chunks_exact(2) {
        let (i, j) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        if i == j || !seen.insert((i, j)) {
            return None;
        }
        edges.push((i, j));
    }
    edges.sort_unstable();
    Some(edges)
}

/// Open-boundary square grid with couplings drawn uniformly from `{-1, +1}`.
///
/// The family is defined as `H = -sum J_ij s_i s_j`; the stored coupling is
/// therefore `-J_ij`.
pub fn gen_grid_spinglass(rows: usize, cols: usize, seed: u64) -> Result<SpinGlass> {
    if rows < 2 || cols < 2 {
        return input_err(format!("grid needs at least 2x2, got {rows}x{cols}"));
    }
    let mut rng = rng_from_seed(seed);
    let idx = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((idx(r, c), idx(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((idx(r, c), idx(r + 1, c)));
            }
        }
    }
    let edges = edges
        .into_iter()
        .map(|(i, j)| {
            let j_ij: f64 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            Edge { i, j, coupling: -j_ij }
        })
        .collect();
    let n = rows * cols;
    Ok(SpinGlass::new(n, edges, vec![0.0; n], 0.0)?.with_meta(Family::Grid2d, seed))
}

/// Random `degree`-regular graph with couplings drawn uniformly from
/// `{-1, +1}` (no constant, no fields).
pub fn gen_regular_pm_glass(n: usize, degree: usize, seed: u64) -> Result<SpinGlass> {
    let graph = gen_regular_maxcut(n, degree, seed)?;
    let mut rng = rng_from_seed(derive_seed(seed, u64::MAX));
    let edges = graph
        .edges()
        .iter()
        .map(|e| Edge {
            coupling: if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            ..*e
        })
        .collect();
    let family = if degree == 4 { Family::RegularGlass } else { Family::Custom };
    Ok(SpinGlass::new(n, edges, vec![0.0; n], 0.0)?.with_meta(family, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_edge() -> SpinGlass {
        SpinGlass::new(2, vec![Edge { i: 0, j: 1, coupling: 1.0 }], vec![0.0; 2], 0.0).unwrap()
    }

    pub(crate) fn triangle_maxcut() -> SpinGlass {
        SpinGlass::maxcut(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn a(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    fn cut_size(edges: &[(usize, usize)], idx: u64) -> usize {
        edges
            .iter()
            .filter(|&&(i, j)| ((idx >> i) ^ (idx >> j)) & 1 == 1)
            .count()
    }

    #[test]
    fn classical_energy_examples() {
        let sg = single_edge();
        assert_eq!(sg.classical_energy(&a("00")).unwrap(), 1.0);
        assert_eq!(sg.classical_energy(&a("01")).unwrap(), -1.0);
        assert_eq!(triangle_maxcut().classical_energy(&a("001")).unwrap(), 1.0);
    }

    #[test]
    fn classical_energy_rejects_wrong_length() {
        assert!(matches!(
            single_edge().classical_energy(&a("000")),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn assignment_parsing() {
        assert!("01x".parse::<Assignment>().is_err());
        assert_eq!(a("001").to_index(), 4);
        assert_eq!(Assignment::from_index(4, 3).to_string(), "001");
    }

    #[test]
    fn constructor_validation() {
        let e = |i, j, c| Edge { i, j, coupling: c };
        assert!(SpinGlass::new(2, vec![e(0, 0, 1.0)], vec![0.0; 2], 0.0).is_err());
        assert!(SpinGlass::new(2, vec![e(0, 2, 1.0)], vec![0.0; 2], 0.0).is_err());
        assert!(SpinGlass::new(2, vec![e(0, 1, 1.0), e(1, 0, 1.0)], vec![0.0; 2], 0.0).is_err());
        assert!(SpinGlass::new(2, vec![e(0, 1, 0.0)], vec![0.0; 2], 0.0).is_err());
        assert!(SpinGlass::new(2, vec![e(0, 1, 1.0)], vec![0.0; 3], 0.0).is_err());
        let sg = SpinGlass::new(2, vec![e(1, 0, 2.0)], vec![0.0; 2], 0.0).unwrap();
        assert_eq!((sg.edges()[0].i, sg.edges()[0].j), (0, 1));
    }

    #[test]
    fn spectrum_examples() {
        let s = single_edge().spectrum().unwrap();
        assert_eq!((s.e0, s.emax), (-1.0, 1.0));
        let gs: Vec<String> = s.ground_assignments().iter().map(|x| x.to_string()).collect();
        assert_eq!(gs, vec!["10", "01"]);

        let t = triangle_maxcut().spectrum().unwrap();
        assert_eq!((t.e0, t.emax, t.ground_states.len()), (1.0, 3.0, 6));

        let mut edges = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                if c < 2 {
                    edges.push(Edge { i: 3 * r + c, j: 3 * r + c + 1, coupling: -1.0 });
                }
                if r < 2 {
                    edges.push(Edge { i: 3 * r + c, j: 3 * r + c + 3, coupling: -1.0 });
                }
            }
        }
        let ferro = SpinGlass::new(9, edges, vec![0.0; 9], 0.0).unwrap();
        let gs: Vec<String> = ferro
            .spectrum()
            .unwrap()
            .ground_assignments()
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(gs, vec!["000000000", "111111111"]);
    }

    #[test]
    fn spectrum_capacity() {
        let sg = SpinGlass::new(27, vec![], vec![0.0; 27], 0.0).unwrap();
        assert!(matches!(sg.spectrum(), Err(Error::Capacity(_))));
    }

    #[test]
    fn residual_energy_examples() {
        let s = triangle_maxcut().spectrum().unwrap();
        assert_eq!(s.residual_energy(s.e0).unwrap(), 0.0);
        assert_eq!(s.residual_energy(s.emax).unwrap(), 1.0);
        assert!((s.residual_energy(1.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(s.residual_energy(s.e0 - 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn residual_energy_rejects_constant_hamiltonian() {
        let sg = SpinGlass::new(2, vec![], vec![0.0; 2], 3.0).unwrap();
        let s = sg.spectrum().unwrap();
        assert!(matches!(s.residual_energy(3.0), Err(Error::DegenerateInstance(_))));
    }

    #[test]
    fn regular_maxcut_examples() {
        let k4 = gen_regular_maxcut(4, 3, 11).unwrap();
        assert_eq!(k4.edges().len(), 6);
        assert_eq!(k4.constant(), 3.0);
        let g = gen_regular_maxcut(10, 3, 5).unwrap();
        assert_eq!(g.edges().len(), 15);
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert_eq!(g, gen_regular_maxcut(10, 3, 5).unwrap());
        assert_ne!(g.edges(), gen_regular_maxcut(10, 3, 6).unwrap().edges());
        assert!(gen_regular_maxcut(5, 3, 0).is_err());
        assert!(gen_regular_maxcut(3, 3, 0).is_err());
    }

    #[test]
    fn grid_examples() {
        let count4 = |sg: &SpinGlass| sg.degrees().iter().filter(|&&d| d == 4).count();
        let g3 = gen_grid_spinglass(3, 3, 1).unwrap();
        assert_eq!((g3.n(), g3.edges().len(), count4(&g3)), (9, 12, 1));
        let g4 = gen_grid_spinglass(4, 4, 1).unwrap();
        assert_eq!((g4.n(), g4.edges().len(), count4(&g4)), (16, 24, 4));
        let g2 = gen_grid_spinglass(2, 2, 1).unwrap();
        assert_eq!(g2.edges().len(), 4);
        assert!(g2.degrees().iter().all(|&d| d == 2));
        assert!(g4.edges().iter().all(|e| e.coupling.abs() == 1.0));
        assert!(gen_grid_spinglass(1, 4, 0).is_err());
    }

    #[test]
    fn json_round_trip_keeps_meta() {
        let g = gen_regular_maxcut(8, 3, 3).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"family\":\"maxcut3reg\""));
        assert!(text.contains("\"edges\":[["));
        let back: SpinGlass = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"n":2,"edges":[[0,0,1.0]],"fields":[0,0],"constant":0}"#;
        assert!(serde_json::from_str::<SpinGlass>(bad).is_err());
    }

    proptest! {
        #[test]
        fn maxcut_energy_is_edges_minus_cut(n in 5usize..=12, seed in 0u64..500) {
            let n = if n % 2 == 1 { n + 1 } else { n };
            let sg = gen_regular_maxcut(n, 3, seed).unwrap();
            let pairs: Vec<(usize, usize)> = sg.edges().iter().map(|e| (e.i, e.j)).collect();
            prop_assert_eq!(sg.degrees().iter().sum::<usize>(), 2 * pairs.len());
            prop_assert_eq!(2 * pairs.len(), 3 * n);
            for idx in 0..1u64 << n {
                let expected = (pairs.len() - cut_size(&pairs, idx)) as f64;
                prop_assert!((sg.energy_of_index(idx) - expected).abs() < 1e-12);
            }
        }

        #[test]
        fn zero_field_energy_is_flip_symmetric(seed in 0u64..1000) {
            let sg = gen_grid_spinglass(3, 3, seed).unwrap();
            for idx in 0..1u64 << 9 {
                let s = Assignment::from_index(idx, 9);
                prop_assert_eq!(
                    sg.classical_energy(&s).unwrap(),
                    sg.classical_energy(&s.flipped()).unwrap()
                );
            }
            let spec = sg.spectrum().unwrap();
            for g in &spec.ground_states {
                prop_assert!(spec.ground_states.contains(&(!g & 0x1ff)));
            }
        }

        #[test]
        fn residual_energy_is_monotone(e1 in 1.0f64..3.0, e2 in 1.0f64..3.0) {
            let s = triangle_maxcut().spectrum().unwrap();
            prop_assume!(e1 < e2);
            prop_assert!(s.residual_energy(e1).unwrap() < s.residual_energy(e2).unwrap());
        }
    }
}
