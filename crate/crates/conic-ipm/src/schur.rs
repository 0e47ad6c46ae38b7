//! Normal-equation matrix `M = A H⁻¹ Aᵀ` with a fixed sparsity pattern.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::{Mat, Side};

use crate::cones::ConeState;
use crate::problem::Matrix;

/// A group of variables whose contribution to `M` is computed together:
/// one coordinate of a nonnegative block, or a whole conic block.
#[derive(Debug)]
struct Unit {
    cone: usize,
    /// First variable of the unit, relative to the start of its cone.
    local_start: usize,
    /// Rows touching the unit, ascending.
    rows: Vec<usize>,
    /// Row entries restricted to the unit, offsets relative to the cone start.
    entries: Vec<Vec<(usize, f64)>>,
    /// Position in `values` of each local lower-triangle pair `(i, j)`, `i ≥ j`.
    slots: Vec<usize>,
}

pub(crate) struct Schur {
    m: usize,
    units: Vec<Unit>,
    symbolic: SymbolicSparseColMat<usize>,
    llt_symbolic: Option<SymbolicLlt<usize>>,
    values: Vec<f64>,
    diag_slot: Vec<usize>,
    factor: Option<Llt<usize, f64>>,
    pub regularization: f64,
}

impl Schur {
    pub fn new(a: &Matrix, cones: &[ConeState]) -> Self {
        let m = a.nrows;
        let mut units = Vec::new();
        let mut start = 0;
        for (ci, cone) in cones.iter().enumerate() {
            let dim = cone.dim();
            let ranges: Vec<(usize, usize)> = match cone {
                ConeState::Nonneg(_) => (0..dim).map(|k| (k, k + 1)).collect(),
                _ => vec![(0, dim)],
            };
            for (lo, hi) in ranges {
                let mut touched: Vec<(usize, usize, f64)> = Vec::new();
                for local in lo..hi {
                    let col = start + local;
                    for k in a.col_ptr[col]..a.col_ptr[col + 1] {
                        touched.push((a.col_row[k], local, a.col_val[k]));
                    }
                }
                if touched.is_empty() {
                    continue;
                }
                touched.sort_by_key(|&(r, l, _)| (r, l));
                let mut rows = Vec::new();
                let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
                for (r, l, v) in touched {
                    if rows.last() != Some(&r) {
                        rows.push(r);
                        entries.push(Vec::new());
                    }
                    entries.last_mut().unwrap().push((l, v));
                }
                units.push(Unit {
                    cone: ci,
                    local_start: lo,
                    rows,
                    entries,
                    slots: Vec::new(),
                });
            }
            start += dim;
        }

        // Lower-triangular pattern as sorted (col, row) pairs.
        let mut pairs: Vec<(usize, usize)> = (0..m).map(|i| (i, i)).collect();
        for u in &units {
            for (i, &ri) in u.rows.iter().enumerate() {
                for &rj in &u.rows[..=i] {
                    pairs.push((rj, ri));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut col_ptr = vec![0usize; m + 1];
        for &(c, _) in &pairs {
            col_ptr[c + 1] += 1;
        }
        for j in 0..m {
            col_ptr[j + 1] += col_ptr[j];
        }
        let row_idx: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let find = |col: usize, row: usize| -> usize {
            let seg = &row_idx[col_ptr[col]..col_ptr[col + 1]];
            col_ptr[col] + seg.binary_search(&row).expect("pattern entry")
        };
        for u in &mut units {
            let mut slots = Vec::with_capacity(u.rows.len() * (u.rows.len() + 1) / 2);
            for (i, &ri) in u.rows.iter().enumerate() {
                for &rj in &u.rows[..=i] {
                    slots.push(find(rj, ri));
                }
            }
            u.slots = slots;
        }
        let diag_slot = (0..m).map(|i| find(i, i)).collect();
        let nnz = row_idx.len();
        let symbolic = SymbolicSparseColMat::new_checked(m, m, col_ptr, None, row_idx);
        let llt_symbolic = SymbolicLlt::try_new(symbolic.as_ref(), Side::Lower).ok();
        Self {
            m,
            units,
            symbolic,
            llt_symbolic,
            values: vec![0.0; nnz],
            diag_slot,
            factor: None,
            regularization: 0.0,
        }
    }

    /// Rebuilds `M` for the current scaling and factors it.
    pub fn factor(&mut self, cones: &[ConeState]) -> bool {
        self.values.fill(0.0);
        for u in &self.units {
            let cone = &cones[u.cone];
            let entries = &u.entries;
            let values = &mut self.values;
            match cone {
                ConeState::Nonneg(c) => {
                    let h = c.h_inv_diag(u.local_start);
                    for (i, ei) in entries.iter().enumerate() {
                        for (j, ej) in entries.iter().enumerate().take(i + 1) {
                            values[u.slots[i * (i + 1) / 2 + j]] += ei[0].1 * ej[0].1 * h;
                        }
                    }
                }
                _ => cone.schur(entries, |i, j, v| {
                    values[u.slots[i * (i + 1) / 2 + j]] += v;
                }),
            }
        }
        if self.m == 0 {
            return true;
        }
        let Some(sym) = self.llt_symbolic.clone() else {
            return false;
        };
        let max_diag = self
            .diag_slot
            .iter()
            .fold(0.0f64, |acc, &k| acc.max(self.values[k].abs()))
            .max(1e-300);
        let mut delta = 1e-14 * max_diag;
        for _ in 0..8 {
            let mut vals = self.values.clone();
            for &k in &self.diag_slot {
                vals[k] += delta;
            }
            let mat = SparseColMatRef::new(self.symbolic.as_ref(), &vals);
            if let Ok(f) = Llt::try_new_with_symbolic(sym.clone(), mat, Side::Lower) {
                self.factor = Some(f);
                self.regularization = delta;
                return true;
            }
            delta *= 100.0;
        }
        false
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let cp = self.symbolic.col_ptr();
        let ri = self.symbolic.row_idx();
        for j in 0..self.m {
            for k in cp[j]..cp[j + 1] {
                let i = ri[k];
                let v = self.values[k];
                out[i] += v * x[j];
                if i != j {
                    out[j] += v * x[i];
                }
            }
        }
    }

    /// Solves `M z = r` with a few steps of iterative refinement.
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        if self.m == 0 {
            return Vec::new();
        }
        let f = self.factor.as_ref().expect("factor before solving");
        let mut rhs = Mat::<f64>::from_fn(self.m, 1, |i, _| r[i]);
        let mut z: Vec<f64> = f.solve(&rhs).col(0).iter().copied().collect();
        let mut mz = vec![0.0; self.m];
        let rnorm = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for _ in 0..3 {
            self.mul(&z, &mut mz);
            let mut res = 0.0f64;
            for i in 0..self.m {
                rhs[(i, 0)] = r[i] - mz[i];
                res = res.max(rhs[(i, 0)].abs());
            }
            if res <= 1e-14 * (1.0 + rnorm) {
                break;
            }
            let dz = f.solve(&rhs);
            for i in 0..self.m {
                z[i] += dz[(i, 0)];
            }
        }
        z
    }
}
