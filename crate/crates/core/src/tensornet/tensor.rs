use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

/// Network-wide bond identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BondId(pub u32);

impl fmt::Display for BondId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// Dense complex tensor, row-major over `bonds` (first bond slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    bonds: Vec<BondId>,
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

const PAR_PERMUTE_THRESHOLD: usize = 1 << 16;

impl Tensor {
    pub fn new(bonds: Vec<BondId>, dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        if bonds.len() != dims.len() {
            return input_err("tensor bond and dimension lists differ in length");
        }
        let size: usize = dims.iter().product();
        if size != data.len() {
            return input_err(format!(
                "tensor dims {dims:?} need {size} elements, got {}",
                data.len()
            ));
        }
        let mut sorted = bonds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return input_err(format!("repeated bond on a tensor: {bonds:?}"));
        }
        Ok(Tensor { bonds, dims, data })
    }

    pub fn scalar(value: Complex64) -> Self {
        Tensor { bonds: Vec::new(), dims: Vec::new(), data: vec![value] }
    }

    pub fn bonds(&self) -> &[BondId] {
        &self.bonds
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.bonds.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim_of(&self, bond: BondId) -> Option<usize> {
        self.bonds.iter().position(|&b| b == bond).map(|k| self.dims[k])
    }

    pub fn into_scalar(self) -> Option<Complex64> {
        (self.bonds.is_empty()).then(|| self.data[0])
    }

    /// Reorder axes so that new axis `k` is old axis `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Tensor {
        if order.iter().enumerate().all(|(k, &o)| k == o) {
            return self.clone();
        }
        Tensor {
            bonds: order.iter().map(|&k| self.bonds[k]).collect(),
            dims: order.iter().map(|&k| self.dims[k]).collect(),
            data: permute_data(&self.data, &self.dims, order),
        }
    }

    /// Replace the listed bonds (which must be adjacent and in this order
    /// somewhere in the tensor after permutation) by one bond of product
    /// dimension.
    pub fn fuse(&self, group: &[BondId], fused: BondId) -> Result<Tensor> {
        let pos: Vec<usize> = group
            .iter()
            .map(|b| self.bonds.iter().position(|x| x == b))
            .collect::<Option<_>>()
            .ok_or_else(|| crate::Error::Input("fusing a bond the tensor does not carry".into()))?;
        let mut order: Vec<usize> = (0..self.rank()).filter(|k| !pos.contains(k)).collect();
        order.extend(&pos);
        let t = self.permuted(&order);
        let keep = t.rank() - group.len();
        let mut bonds = t.bonds[..keep].to_vec();
        let mut dims = t.dims[..keep].to_vec();
        bonds.push(fused);
        dims.push(t.dims[keep..].iter().product());
        Ok(Tensor { bonds, dims, data: t.data })
    }
}

/// Copy `data` (row-major with `dims`) into the axis order `order`.
fn permute_data(data: &[Complex64], dims: &[usize], order: &[usize]) -> Vec<Complex64> {
    // Merge runs of axes that stay adjacent; this usually collapses the
    // problem to rank 2 or 3.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &ax in order {
        match groups.last_mut() {
            Some(g) if *g.last().unwrap() + 1 == ax => g.push(ax),
            _ => groups.push(vec![ax]),
        }
    }
    let mut src_order: Vec<usize> = (0..groups.len()).collect();
    src_order.sort_by_key(|&g| groups[g][0]);
    let gdim: Vec<usize> = groups.iter().map(|g| g.iter().map(|&a| dims[a]).product()).collect();
    // Source stride of every group in its row-major source layout.
    let mut gstride = vec![0usize; groups.len()];
    let mut acc = 1;
    for &g in src_order.iter().rev() {
        gstride[g] = acc;
        acc *= gdim[g];
    }
    let total = data.len();
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    let rank = groups.len();
    let inner_dim = gdim[rank - 1];
    let inner_stride = gstride[rank - 1];
    let outer_dims = &gdim[..rank - 1];
    let outer_strides = &gstride[..rank - 1];

    let fill_rows = |first_row: usize, rows: &mut [Complex64]| {
        let mut idx = vec![0usize; outer_dims.len()];
        let mut rem = first_row;
        for k in (0..outer_dims.len()).rev() {
            idx[k] = rem % outer_dims[k];
            rem /= outer_dims[k];
        }
        let mut base: usize = idx.iter().zip(outer_strides).map(|(i, s)| i * s).sum();
        for row in rows.chunks_mut(inner_dim) {
            if inner_stride == 1 {
                row.copy_from_slice(&data[base..base + inner_dim]);
            } else {
                for (x, o) in row.iter_mut().enumerate() {
                    *o = data[base + x * inner_stride];
                }
            }
            for k in (0..outer_dims.len()).rev() {
                idx[k] += 1;
                base += outer_strides[k];
                if idx[k] < outer_dims[k] {
                    break;
                }
                base -= outer_strides[k] * outer_dims[k];
                idx[k] = 0;
            }
        }
    };

    if total >= PAR_PERMUTE_THRESHOLD && rank > 1 {
        let rows_per_chunk = (PAR_PERMUTE_THRESHOLD / inner_dim).max(1);
        out.par_chunks_mut(rows_per_chunk * inner_dim)
            .enumerate()
            .for_each(|(c, chunk)| fill_rows(c * rows_per_chunk, chunk));
    } else {
        fill_rows(0, &mut out);
    }
    out
}

/// Sum over every bond the two tensors share. Output bonds are the free
/// bonds of `a` followed by the free bonds of `b`, each in original order.
pub fn contract_pair(a: &Tensor, b: &Tensor) -> Tensor {
    let shared: Vec<BondId> = a.bonds.iter().copied().filter(|x| b.bonds.contains(x)).collect();
    let a_free: Vec<usize> = (0..a.rank()).filter(|&k| !shared.contains(&a.bonds[k])).collect();
    let b_free: Vec<usize> = (0..b.rank()).filter(|&k| !shared.contains(&b.bonds[k])).collect();
    let a_shared: Vec<usize> =
        shared.iter().map(|s| a.bonds.iter().position(|x| x == s).unwrap()).collect();
    let b_shared: Vec<usize> =
        shared.iter().map(|s| b.bonds.iter().position(|x| x == s).unwrap()).collect();

    let order_a: Vec<usize> = a_free.iter().chain(&a_shared).copied().collect();
    let order_b: Vec<usize> = b_shared.iter().chain(&b_free).copied().collect();
    let pa = a.permuted(&order_a);
    let pb = b.permuted(&order_b);

    let m: usize = a_free.iter().map(|&k| a.dims[k]).product();
    let k: usize = a_shared.iter().map(|&x| a.dims[x]).product();
    let n: usize = b_free.iter().map(|&x| b.dims[x]).product();
    let mut out = vec![Complex64::new(0.0, 0.0); m * n];
    matmul(&pa.data, &pb.data, &mut out, m, k, n);

    Tensor {
        bonds: a_free.iter().map(|&x| a.bonds[x]).chain(b_free.iter().map(|&x| b.bonds[x])).collect(),
        dims: a_free.iter().map(|&x| a.dims[x]).chain(b_free.iter().map(|&x| b.dims[x])).collect(),
        data: out,
    }
}

/// `c = a (m x k) * b (k x n)`, all row-major.
fn matmul(a: &[Complex64], b: &[Complex64], c: &mut [Complex64], m: usize, k: usize, n: usize) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 1 || m * n * k <= 512 {
        for i in 0..m {
            let row = &mut c[i * n..(i + 1) * n];
            for l in 0..k {
                let x = a[i * k + l];
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &y) in row.iter_mut().zip(&b[l * n..(l + 1) * n]) {
                    *o += x * y;
                }
            }
        }
        return;
    }
    // SAFETY: Complex64 is repr(C) { re, im }, layout-identical to [f64; 2];
    // the slices hold exactly m*k, k*n and m*n elements.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            k as isize,
            1,
            b.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
}
