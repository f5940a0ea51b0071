//! Dense statevector simulation of vanilla QAOA circuits.
//!
//! Serves as the ground truth for the tensor network and as the backend for
//! per-instance (vanilla) training and the disorder study.

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::instance::{EnergySpectrum, SpinGlass};
use crate::rng::rng_from_seed;

/// Largest register simulated densely.
pub const MAX_STATEVECTOR_QUBITS: usize = 24;

const PAR_THRESHOLD: usize = 1 << 14;

/// Variational angles, one `(beta, gamma)` pair per QAOA block, in circuit
/// order (block 1 acts first on `|+>`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(betas: Vec<f64>, gammas: Vec<f64>) -> Result<Self> {
        if betas.len() != gammas.len() {
            return input_err(format!(
                "{} betas but {} gammas",
                betas.len(),
                gammas.len()
            ));
        }
        Ok(QaoaParams { betas, gammas })
    }

    pub fn zeros(p: usize) -> Self {
        QaoaParams { betas: vec![0.0; p], gammas: vec![0.0; p] }
    }

    pub fn depth(&self) -> usize {
        self.betas.len()
    }

    /// `[beta_1..beta_p, gamma_1..gamma_p]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.betas.iter().chain(&self.gammas).copied().collect()
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.len() % 2 != 0 {
            return input_err(format!("flat parameter vector of odd length {}", x.len()));
        }
        let p = x.len() / 2;
        Ok(QaoaParams { betas: x[..p].to_vec(), gammas: x[p..].to_vec() })
    }

    pub fn negated(&self) -> Self {
        QaoaParams {
            betas: self.betas.iter().map(|b| -b).collect(),
            gammas: self.gammas.iter().map(|g| -g).collect(),
        }
    }
}

/// How often the disorder offsets are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderMode {
    /// One offset per Hamiltonian term, reused by every block.
    #[default]
    PerTerm,
    /// Fresh offsets for every block.
    PerBlock,
}

/// Relative over/under-rotation of every coupling and mixer term.
///
/// `delta_zz[b][e]` scales edge `e` in block `b`; with [`DisorderMode::PerTerm`]
/// there is a single row shared by all blocks. Same for `delta_x` per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub delta_zz: Vec<Vec<f64>>,
    pub delta_x: Vec<Vec<f64>>,
    pub sigma: f64,
    pub seed: u64,
    pub mode: DisorderMode,
}

impl DisorderRealization {
    /// Draw `Delta ~ N(0, sigma)` for every edge and qubit of `sg`.
    pub fn sample(
        sg: &SpinGlass,
        sigma: f64,
        seed: u64,
        depth: usize,
        mode: DisorderMode,
    ) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return input_err(format!("disorder sigma must be finite and >= 0, got {sigma}"));
        }
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::Input(e.to_string()))?;
        let mut rng = rng_from_seed(seed);
        let rows = match mode {
            DisorderMode::PerTerm => 1,
            DisorderMode::PerBlock => depth.max(1),
        };
        let mut delta_zz = Vec::with_capacity(rows);
        let mut delta_x = Vec::with_capacity(rows);
        for _ in 0..rows {
            delta_zz.push((0..sg.edges().len()).map(|_| normal.sample(&mut rng)).collect());
            delta_x.push((0..sg.n()).map(|_| normal.sample(&mut rng)).collect());
        }
        Ok(DisorderRealization { delta_zz, delta_x, sigma, seed, mode })
    }

    fn row(&self, block: usize) -> usize {
        match self.mode {
            DisorderMode::PerTerm => 0,
            DisorderMode::PerBlock => block,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn plus(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(StateVector { n, amps: vec![a; dim] })
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        check_capacity(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        let idx = index as usize;
        if idx >= amps.len() {
            return input_err(format!("basis index {index} out of range for {n} qubits"));
        }
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Takes ownership of raw amplitudes; the caller is responsible for the
    /// norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return input_err(format!("{} amplitudes is not a power of two", amps.len()));
        }
        let n = amps.len().trailing_zeros() as usize;
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probability(&self, index: u64) -> f64 {
        self.amps[index as usize].norm_sqr()
    }

    /// Multiply amplitude `k` by `exp(-i * angle * diag[k])`.
    pub fn apply_diagonal_phase(&mut self, diag: &[f64], angle: f64) {
        let f = |(a, &e): (&mut Complex64, &f64)| *a *= Complex64::from_polar(1.0, -angle * e);
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter_mut().zip(diag.par_iter()).for_each(f);
        } else {
            self.amps.iter_mut().zip(diag.iter()).for_each(f);
        }
    }

    /// Apply `exp(-i * angle * X)` to `qubit`.
    pub fn apply_rx(&mut self, qubit: usize, angle: f64) {
        let (s, c) = angle.sin_cos();
        let ms = Complex64::new(0.0, -s);
        let stride = 1usize << qubit;
        let butterfly = |chunk: &mut [Complex64]| {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x * c + y * ms;
                *b = x * ms + y * c;
            }
        };
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_chunks_mut(2 * stride).for_each(butterfly);
        } else {
            self.amps.chunks_mut(2 * stride).for_each(butterfly);
        }
    }

    pub fn expectation_z(&self, i: usize) -> Result<f64> {
        if i >= self.n {
            return input_err(format!("qubit {i} out of range"));
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| if (k >> i) & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::Capacity(format!(
            "dense simulation limited to {MAX_STATEVECTOR_QUBITS} qubits, requested {n}"
        )));
    }
    Ok(())
}

/// Diagonal of the problem Hamiltonian with every coupling scaled by
/// `1 + delta[e]`.
fn scaled_diagonal(sg: &SpinGlass, delta: Option<&[f64]>) -> Vec<f64> {
    let couplings: Vec<f64> = sg
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| e.coupling * (1.0 + delta.map_or(0.0, |d| d[k])))
        .collect();
    let edges = sg.edges();
    let fields = sg.fields();
    let constant = sg.constant();
    let eval = |idx: usize| {
        let spin = |k: usize| if (idx >> k) & 1 == 0 { 1.0 } else { -1.0 };
        let mut e = constant;
        for (edge, &j) in edges.iter().zip(&couplings) {
            e += j * spin(edge.i) * spin(edge.j);
        }
        for (k, &h) in fields.iter().enumerate() {
            if h != 0.0 {
                e += h * spin(k);
            }
        }
        e
    };
    let dim = 1usize << sg.n();
    if dim >= PAR_THRESHOLD {
        (0..dim).into_par_iter().map(eval).collect()
    } else {
        (0..dim).map(eval).collect()
    }
}

/// `U_M(beta_p) U_P(gamma_p) ... U_M(beta_1) U_P(gamma_1) |+>`.
///
/// With disorder, the ZZ rotation of edge `e` is scaled by `1 + delta_zz[e]`
/// and the mixer on qubit `q` by `1 + delta_x[q]`. Local fields and the
/// constant are left untouched.
pub fn qaoa_state(
    sg: &SpinGlass,
    params: &QaoaParams,
    disorder: Option<&DisorderRealization>,
) -> Result<StateVector> {
    let mut psi = StateVector::plus(sg.n())?;
    if let Some(d) = disorder {
        let rows_needed = match d.mode {
            DisorderMode::PerTerm => 1,
            DisorderMode::PerBlock => params.depth(),
        };
        if d.delta_zz.len() < rows_needed
            || d.delta_zz.iter().any(|r| r.len() != sg.edges().len())
            || d.delta_x.iter().any(|r| r.len() != sg.n())
        {
            return input_err("disorder realization does not match the instance");
        }
    }
    let mut cached: Option<(usize, Vec<f64>)> = None;
    for (block, (&beta, &gamma)) in params.betas.iter().zip(&params.gammas).enumerate() {
        let row = disorder.map_or(0, |d| d.row(block));
        if cached.as_ref().map(|c| c.0) != Some(row) {
            let delta = disorder.map(|d| d.delta_zz[row].as_slice());
            cached = Some((row, scaled_diagonal(sg, delta)));
        }
        let diag = &cached.as_ref().expect("diagonal cached above").1;
        psi.apply_diagonal_phase(diag, gamma);
        for q in 0..sg.n() {
            let scale = 1.0 + disorder.map_or(0.0, |d| d.delta_x[row][q]);
            psi.apply_rx(q, beta * scale);
        }
    }
    Ok(psi)
}

/// `<psi| H_P |psi>` for the undisturbed Hamiltonian.
pub fn energy_expectation(sg: &SpinGlass, psi: &StateVector) -> Result<f64> {
    if sg.n() != psi.n() {
        return input_err(format!("instance has {} spins, state {} qubits", sg.n(), psi.n()));
    }
    let f = |(k, a): (usize, &Complex64)| a.norm_sqr() * sg.energy_of_index(k as u64);
    Ok(if psi.amps.len() >= PAR_THRESHOLD {
        psi.amps.par_iter().enumerate().map(f).sum()
    } else {
        psi.amps.iter().enumerate().map(f).sum()
    })
}

/// Repeated QAOA simulation of one instance with the problem diagonals
/// precomputed, as needed by per-instance training loops.
#[derive(Debug, Clone)]
pub struct QaoaSimulator {
    sg: SpinGlass,
    diagonal: Vec<f64>,
    disorder: Option<(DisorderRealization, Vec<Vec<f64>>)>,
}

impl QaoaSimulator {
    pub fn new(sg: SpinGlass) -> Result<Self> {
        check_capacity(sg.n())?;
        let diagonal = scaled_diagonal(&sg, None);
        Ok(QaoaSimulator { sg, diagonal, disorder: None })
    }

    /// Simulate the circuit under a fixed disorder realization. Energies are
    /// still measured against the undisturbed Hamiltonian.
    pub fn with_disorder(sg: SpinGlass, disorder: DisorderRealization) -> Result<Self> {
        let mut sim = Self::new(sg)?;
        if disorder.delta_zz.iter().any(|r| r.len() != sim.sg.edges().len())
            || disorder.delta_x.iter().any(|r| r.len() != sim.sg.n())
            || disorder.delta_zz.is_empty()
        {
            return input_err("disorder realization does not match the instance");
        }
        let rows = disorder.delta_zz.iter().map(|d| scaled_diagonal(&sim.sg, Some(d))).collect();
        sim.disorder = Some((disorder, rows));
        Ok(sim)
    }

    pub fn instance(&self) -> &SpinGlass {
        &self.sg
    }

    pub fn disorder(&self) -> Option<&DisorderRealization> {
        self.disorder.as_ref().map(|d| &d.0)
    }

    /// Same state as [`qaoa_state`] with the stored disorder.
    pub fn state(&self, params: &QaoaParams) -> Result<StateVector> {
        let mut psi = StateVector::plus(self.sg.n())?;
        for (block, (&beta, &gamma)) in params.betas.iter().zip(&params.gammas).enumerate() {
            match &self.disorder {
                None => {
                    psi.apply_diagonal_phase(&self.diagonal, gamma);
                    for q in 0..self.sg.n() {
                        psi.apply_rx(q, beta);
                    }
                }
                Some((d, diags)) => {
                    let row = d.row(block);
                    if row >= diags.len() {
                        return input_err(format!("disorder has no offsets for block {}", block + 1));
                    }
                    psi.apply_diagonal_phase(&diags[row], gamma);
                    for q in 0..self.sg.n() {
                        psi.apply_rx(q, beta * (1.0 + d.delta_x[row][q]));
                    }
                }
            }
        }
        Ok(psi)
    }

    /// `<H_P>` of the (possibly disturbed) QAOA state.
    pub fn energy(&self, params: &QaoaParams) -> Result<f64> {
        let psi = self.state(params)?;
        Ok(self.energy_of(&psi))
    }

    /// `<psi| H_P |psi>` using the cached diagonal.
    pub fn energy_of(&self, psi: &StateVector) -> f64 {
        let f = |(a, e): (&Complex64, &f64)| a.norm_sqr() * e;
        if psi.amps.len() >= PAR_THRESHOLD {
            psi.amps.par_iter().zip(self.diagonal.par_iter()).map(f).sum()
        } else {
            psi.amps.iter().zip(&self.diagonal).map(f).sum()
        }
    }
}

/// Total probability on the degenerate ground manifold.
pub fn ground_state_overlap(spectrum: &EnergySpectrum, psi: &StateVector) -> Result<f64> {
    if spectrum.n != psi.n() {
        return input_err("spectrum and state sizes differ");
    }
    Ok(spectrum.ground_states.iter().map(|&g| psi.probability(g)).sum())
}

/// `<psi| Z_i Z_j |psi>`.
pub fn correlation(psi: &StateVector, i: usize, j: usize) -> Result<f64> {
    if i == j || i >= psi.n() || j >= psi.n() {
        return input_err(format!("invalid qubit pair ({i}, {j}) for {} qubits", psi.n()));
    }
    Ok(psi
        .amps
        .iter()
        .enumerate()
        .map(|(k, a)| {
            if ((k >> i) ^ (k >> j)) & 1 == 0 {
                a.norm_sqr()
            } else {
                -a.norm_sqr()
            }
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_grid_spinglass, gen_regular_maxcut, Edge};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn single_edge() -> SpinGlass {
        SpinGlass::new(2, vec![Edge { i: 0, j: 1, coupling: 1.0 }], vec![0.0; 2], 0.0).unwrap()
    }

    fn triangle() -> SpinGlass {
        SpinGlass::maxcut(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn params_validation_and_flattening() {
        assert!(QaoaParams::new(vec![0.1], vec![]).is_err());
        let p = QaoaParams::new(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap();
        assert_eq!(p.to_flat(), vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(QaoaParams::from_flat(&p.to_flat()).unwrap(), p);
        assert!(QaoaParams::from_flat(&[1.0]).is_err());
    }

    #[test]
    fn zero_beta_keeps_uniform_probabilities() {
        let sg = gen_regular_maxcut(8, 3, 1).unwrap();
        let psi = qaoa_state(&sg, &QaoaParams::new(vec![0.0], vec![0.77]).unwrap(), None).unwrap();
        for k in 0..256 {
            assert!((psi.probability(k) - 1.0 / 256.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_edge_closed_form() {
        // <ZZ> = sin(4 beta) sin(2 gamma) for one edge with J = 1.
        let zz = |b: f64, g: f64| {
            let psi = qaoa_state(&single_edge(), &QaoaParams::new(vec![b], vec![g]).unwrap(), None)
                .unwrap();
            correlation(&psi, 0, 1).unwrap()
        };
        assert!((zz(FRAC_PI_4 / 2.0, FRAC_PI_4) - 1.0).abs() < 1e-12);
        assert!(zz(FRAC_PI_4, FRAC_PI_4).abs() < 1e-12);
        assert!((zz(0.3, 0.7) - 0.9184776656050944).abs() < 1e-12);
    }

    #[test]
    fn simulator_matches_free_functions() {
        let sg = gen_regular_maxcut(10, 3, 6).unwrap();
        let params = QaoaParams::new(vec![0.3, 0.2], vec![0.5, 0.9]).unwrap();
        let sim = QaoaSimulator::new(sg.clone()).unwrap();
        let psi = qaoa_state(&sg, &params, None).unwrap();
        assert_eq!(sim.state(&params).unwrap(), psi);
        let e = energy_expectation(&sg, &psi).unwrap();
        assert!((sim.energy(&params).unwrap() - e).abs() < 1e-12);

        let d = DisorderRealization::sample(&sg, 0.1, 2, 2, DisorderMode::PerBlock).unwrap();
        let noisy = QaoaSimulator::with_disorder(sg.clone(), d.clone()).unwrap();
        assert_eq!(noisy.state(&params).unwrap(), qaoa_state(&sg, &params, Some(&d)).unwrap());
    }

    #[test]
    fn zero_sigma_disorder_is_bitwise_identity() {
        let sg = gen_regular_maxcut(10, 3, 4).unwrap();
        let params = QaoaParams::new(vec![0.3, 0.2], vec![0.5, 0.9]).unwrap();
        let clean = qaoa_state(&sg, &params, None).unwrap();
        for mode in [DisorderMode::PerTerm, DisorderMode::PerBlock] {
            let d = DisorderRealization::sample(&sg, 0.0, 3, 2, mode).unwrap();
            assert_eq!(qaoa_state(&sg, &params, Some(&d)).unwrap(), clean);
        }
    }

    #[test]
    fn disorder_is_reproducible_and_effective() {
        let sg = gen_regular_maxcut(10, 3, 4).unwrap();
        let params = QaoaParams::new(vec![0.3], vec![0.5]).unwrap();
        let d1 = DisorderRealization::sample(&sg, 0.1, 9, 1, DisorderMode::PerTerm).unwrap();
        let d2 = DisorderRealization::sample(&sg, 0.1, 9, 1, DisorderMode::PerTerm).unwrap();
        assert_eq!(d1, d2);
        let clean = qaoa_state(&sg, &params, None).unwrap();
        let noisy = qaoa_state(&sg, &params, Some(&d1)).unwrap();
        assert_ne!(clean, noisy);
        assert!((noisy.norm() - 1.0).abs() < 1e-10);
        assert!(DisorderRealization::sample(&sg, -1.0, 0, 1, DisorderMode::PerTerm).is_err());
    }

    #[test]
    fn energy_examples() {
        let t = triangle();
        let plus = StateVector::plus(3).unwrap();
        assert!((energy_expectation(&t, &plus).unwrap() - 1.5).abs() < 1e-14);
        let spec = t.spectrum().unwrap();
        let g = StateVector::basis(3, spec.ground_states[0]).unwrap();
        assert_eq!(energy_expectation(&t, &g).unwrap(), spec.e0);
        assert!(energy_expectation(&single_edge(), &plus).is_err());
    }

    #[test]
    fn overlap_examples() {
        let e = single_edge();
        let spec = e.spectrum().unwrap();
        let plus = StateVector::plus(2).unwrap();
        assert!((ground_state_overlap(&spec, &plus).unwrap() - 0.5).abs() < 1e-15);
        let g = StateVector::basis(2, spec.ground_states[1]).unwrap();
        assert_eq!(ground_state_overlap(&spec, &g).unwrap(), 1.0);
        let tspec = triangle().spectrum().unwrap();
        let plus3 = StateVector::plus(3).unwrap();
        assert!((ground_state_overlap(&tspec, &plus3).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn correlation_examples() {
        let plus = StateVector::plus(3).unwrap();
        assert!(correlation(&plus, 0, 2).unwrap().abs() < 1e-15);
        let zero = StateVector::basis(3, 0).unwrap();
        assert_eq!(correlation(&zero, 1, 2).unwrap(), 1.0);
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let bell = StateVector::from_amplitudes(vec![z, r, r, z]).unwrap();
        assert!((correlation(&bell, 0, 1).unwrap() + 1.0).abs() < 1e-15);
        assert!(correlation(&bell, 0, 0).is_err());
        assert!(correlation(&bell, 0, 2).is_err());
    }

    #[test]
    fn capacity_error() {
        assert!(matches!(StateVector::plus(25), Err(Error::Capacity(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn qaoa_invariants(
            seed in 0u64..200,
            angles in proptest::collection::vec(-3.0f64..3.0, 6),
        ) {
            let sg = gen_grid_spinglass(3, 3, seed).unwrap();
            let params = QaoaParams::from_flat(&angles).unwrap();
            let psi = qaoa_state(&sg, &params, None).unwrap();
            prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
            for q in 0..9 {
                prop_assert!(psi.expectation_z(q).unwrap().abs() < 1e-10);
            }
            let direct = energy_expectation(&sg, &psi).unwrap();
            let by_terms: f64 = sg.constant() + sg.edges().iter()
                .map(|e| e.coupling * correlation(&psi, e.i, e.j).unwrap())
                .sum::<f64>();
            prop_assert!((direct - by_terms).abs() < 1e-10);
            let spec = sg.spectrum().unwrap();
            prop_assert!(direct >= spec.e0 - 1e-10 && direct <= spec.emax + 1e-10);
        }

        #[test]
        fn energy_decomposition_with_fields(
            h in proptest::collection::vec(-1.0f64..1.0, 4),
            angles in proptest::collection::vec(-2.0f64..2.0, 4),
        ) {
            let edges = vec![
                Edge { i: 0, j: 1, coupling: 0.7 },
                Edge { i: 1, j: 2, coupling: -1.2 },
                Edge { i: 2, j: 3, coupling: 0.4 },
            ];
            let sg = SpinGlass::new(4, edges, h.clone(), 0.25).unwrap();
            let psi = qaoa_state(&sg, &QaoaParams::from_flat(&angles).unwrap(), None).unwrap();
            let direct = energy_expectation(&sg, &psi).unwrap();
            let by_terms = 0.25
                + sg.edges().iter().map(|e| e.coupling * correlation(&psi, e.i, e.j).unwrap()).sum::<f64>()
                + h.iter().enumerate().map(|(k, hk)| hk * psi.expectation_z(k).unwrap()).sum::<f64>();
            prop_assert!((direct - by_terms).abs() < 1e-10);
        }
    }
}
