//! Superoperator-picture network of a causal-cone correlation function.
//!
//! A one-qubit density matrix is vectorized column-major, `mu = row + 2 col`,
//! and a unitary acts as `conj(U) (x) U`. Under this convention the boundary
//! vectors are
//!
//! * `t    = (1/2, 1/2, 1/2, 1/2)`, the initial `|+><+|`,
//! * `M_z  = (1, 0, 0, -1)`, closing a measured qubit with `Z`,
//! * `M_tr = (1, 0, 0, 1)`, tracing out every other qubit.
//!
//! Every one-qubit gate is a `[in, out]` tensor, and every ZZ gate is split
//! into two rank-3 tensors joined by a virtual bond of dimension 4 that
//! carries the superoperator index of the first qubit.

use num_complex::Complex64;

use super::network::TensorNetwork;
use super::tensor::{BondId, Tensor};
use crate::error::{input_err, Result};
use crate::rcc::CausalCone;
use crate::statevector::QaoaParams;

const D: usize = 4;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Row and column bit of superoperator index `mu`.
fn row_col(mu: usize) -> (usize, usize) {
    (mu & 1, mu >> 1)
}

fn spin(bit: usize) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `conj(U) (x) U` for a 2x2 unitary, as a 4x4 row-major matrix.
pub fn superoperator(u: [[Complex64; 2]; 2]) -> [[Complex64; 4]; 4] {
    let mut s = [[c(0.0, 0.0); 4]; 4];
    for (mu, row) in s.iter_mut().enumerate() {
        let (r, col) = row_col(mu);
        for (nu, x) in row.iter_mut().enumerate() {
            let (r2, col2) = row_col(nu);
            *x = u[col][col2].conj() * u[r][r2];
        }
    }
    s
}

/// `exp(-i beta X)`.
pub fn rx(beta: f64) -> [[Complex64; 2]; 2] {
    let (s, co) = beta.sin_cos();
    [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
}

/// `exp(-i theta Z)`.
pub fn rz(theta: f64) -> [[Complex64; 2]; 2] {
    [[Complex64::from_polar(1.0, -theta), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, theta)]]
}

pub const PLUS: [f64; 4] = [0.5, 0.5, 0.5, 0.5];
pub const MEASURE_Z: [f64; 4] = [1.0, 0.0, 0.0, -1.0];
pub const MEASURE_TRACE: [f64; 4] = [1.0, 0.0, 0.0, 1.0];

/// Which observable closes the marked qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Observable {
    /// `Z_i Z_j` on the marked edge.
    #[default]
    ZZ,
    /// Identity everywhere; the network evaluates the trace of the state.
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub observable: Observable,
    /// Keep every gate of every block instead of only the cone's gates.
    pub unpruned: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { observable: Observable::ZZ, unpruned: false }
    }
}

fn vector(bond: BondId, v: [f64; 4]) -> Tensor {
    Tensor::new(vec![bond], vec![D], v.iter().map(|&x| c(x, 0.0)).collect())
        .expect("boundary vector shape")
}

/// One-qubit channel tensor with bonds `[in, out]`: `T[in, out] = S[out][in]`.
fn one_qubit(input: BondId, output: BondId, s: &[[Complex64; 4]; 4]) -> Tensor {
    let mut data = Vec::with_capacity(D * D);
    for i in 0..D {
        for o in 0..D {
            data.push(s[o][i]);
        }
    }
    Tensor::new(vec![input, output], vec![D, D], data).expect("gate shape")
}

/// Copy half of a ZZ gate on the first qubit: `a[in, out, v] = [in == out == v]`.
fn zz_copy(input: BondId, output: BondId, virt: BondId) -> Tensor {
    let mut data = vec![c(0.0, 0.0); D * D * D];
    for mu in 0..D {
        data[(mu * D + mu) * D + mu] = c(1.0, 0.0);
    }
    Tensor::new(vec![input, output, virt], vec![D, D, D], data).expect("zz copy shape")
}

/// Phase half of `exp(-i theta Z Z)` on the second qubit, conditioned on the
/// first qubit's superoperator index `v`:
/// `b[in, out, v] = [in == out] exp(i theta s(c_v) s(c_in) - i theta s(r_v) s(r_in))`.
fn zz_phase(input: BondId, output: BondId, virt: BondId, theta: f64) -> Tensor {
    let mut data = vec![c(0.0, 0.0); D * D * D];
    for nu in 0..D {
        let (rn, cn) = row_col(nu);
        for v in 0..D {
            let (rv, cv) = row_col(v);
            let phase = theta * (spin(cv) * spin(cn) - spin(rv) * spin(rn));
            data[(nu * D + nu) * D + v] = Complex64::from_polar(1.0, phase);
        }
    }
    Tensor::new(vec![input, output, virt], vec![D, D, D], data).expect("zz phase shape")
}

/// Closed network for `tr[O rho_cone]` with `O = Z_i Z_j` (or identity).
///
/// Gates outside the reverse causal cone are dropped unless
/// `opts.unpruned` is set.
pub fn build_network_with(
    cone: &CausalCone,
    params: &QaoaParams,
    opts: BuildOptions,
) -> Result<TensorNetwork> {
    let p = params.depth();
    if p != cone.depth {
        return input_err(format!("parameters have depth {p}, cone has depth {}", cone.depth));
    }
    let n = cone.n();
    let mut net = TensorNetwork::new();
    let mut line: Vec<BondId> = Vec::with_capacity(n);
    for v in 0..n {
        let b = net.new_bond();
        net.push(vector(b, PLUS), format!("t[{v}]"));
        line.push(b);
    }
    let advance = |net: &mut TensorNetwork, line: &mut Vec<BondId>, v: usize| {
        let input = line[v];
        let output = net.new_bond();
        line[v] = output;
        (input, output)
    };

    for block in 0..p {
        // k counts blocks from the measurement end.
        let k = p - block;
        let gamma = params.gammas[block];
        let beta = params.betas[block];
        for e in cone.graph.edges() {
            if !opts.unpruned && !cone.keeps_edge(e.i, e.j, k) {
                continue;
            }
            let virt = net.new_bond();
            let (ia, oa) = advance(&mut net, &mut line, e.i);
            net.push(zz_copy(ia, oa, virt), format!("zz_a[{},{}]@{}", e.i, e.j, block + 1));
            let (ib, ob) = advance(&mut net, &mut line, e.j);
            net.push(
                zz_phase(ib, ob, virt, gamma * e.coupling),
                format!("zz_b[{},{}]@{}", e.i, e.j, block + 1),
            );
        }
        for (v, &h) in cone.graph.fields().iter().enumerate() {
            if h == 0.0 || (!opts.unpruned && !cone.keeps_vertex(v, k)) {
                continue;
            }
            let s = superoperator(rz(gamma * h));
            let (i, o) = advance(&mut net, &mut line, v);
            net.push(one_qubit(i, o, &s), format!("rz[{v}]@{}", block + 1));
        }
        let mixer = superoperator(rx(beta));
        for v in 0..n {
            if !opts.unpruned && !cone.keeps_vertex(v, k) {
                continue;
            }
            let (i, o) = advance(&mut net, &mut line, v);
            net.push(one_qubit(i, o, &mixer), format!("rx[{v}]@{}", block + 1));
        }
    }

    let (mi, mj) = cone.marked_edge;
    for (v, &b) in line.iter().enumerate() {
        let measured = opts.observable == Observable::ZZ && (v == mi || v == mj);
        let (vec, label) = if measured { (MEASURE_Z, "m_z") } else { (MEASURE_TRACE, "m_tr") };
        net.push(vector(b, vec), format!("{label}[{v}]"));
    }
    net.validate()?;
    Ok(net)
}

/// Pruned `Z_i Z_j` network of `cone` at `params`.
pub fn build_network(cone: &CausalCone, params: &QaoaParams) -> Result<TensorNetwork> {
    build_network_with(cone, params, BuildOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rcc::{build_tree_cone, TreeSpec};

    fn apply(s: &[[Complex64; 4]; 4], v: [Complex64; 4]) -> [Complex64; 4] {
        let mut out = [c(0.0, 0.0); 4];
        for (o, row) in out.iter_mut().zip(s) {
            *o = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// vec(rho) column-major.
    fn vec_of(rho: [[Complex64; 2]; 2]) -> [Complex64; 4] {
        [rho[0][0], rho[1][0], rho[0][1], rho[1][1]]
    }

    #[test]
    fn superoperator_matches_conjugation() {
        let u = rx(0.37);
        let rho = [[c(0.6, 0.0), c(0.1, 0.2)], [c(0.1, -0.2), c(0.4, 0.0)]];
        let mut want = [[c(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for col in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        want[r][col] += u[r][a] * rho[a][b] * u[col][b].conj();
                    }
                }
            }
        }
        let got = apply(&superoperator(u), vec_of(rho));
        for (g, w) in got.iter().zip(vec_of(want)) {
            assert!((g - w).norm() < 1e-14);
        }
    }

    #[test]
    fn boundary_vectors() {
        let plus = [[c(0.5, 0.0); 2]; 2];
        assert_eq!(vec_of(plus), PLUS.map(|x| c(x, 0.0)));
        let trace: Complex64 = vec_of(plus).iter().zip(MEASURE_TRACE).map(|(a, b)| a * b).sum();
        assert_eq!(trace, c(1.0, 0.0));
    }

    #[test]
    fn tensor_count_degree3_p1() {
        let cone = build_tree_cone(&TreeSpec::maxcut(3, 1).unwrap()).unwrap();
        let net = build_network(&cone, &QaoaParams::new(vec![0.3], vec![0.55]).unwrap()).unwrap();
        assert_eq!(net.len(), 6 + 10 + 2 + 6);
        assert!(net.is_closed());
        let ranks: Vec<usize> = net.tensors().iter().map(|t| t.rank()).collect();
        assert_eq!(*ranks.iter().max().unwrap(), 3);

        let full = build_network_with(
            &cone,
            &QaoaParams::new(vec![0.3], vec![0.55]).unwrap(),
            BuildOptions { unpruned: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(full.len(), 6 + 10 + 6 + 6);
    }

    #[test]
    fn depth_mismatch_is_rejected() {
        let cone = build_tree_cone(&TreeSpec::maxcut(3, 2).unwrap()).unwrap();
        assert!(build_network(&cone, &QaoaParams::zeros(1)).is_err());
    }
}
