mod nonneg;
mod psd;
mod soc;

use nonneg::NonnegCone;
use psd::PsdCone;
use soc::SocCone;

use crate::problem::Cone;

/// Per-block scaling state used by the interior-point iterations.
#[derive(Debug, Clone)]
pub(crate) enum ConeState {
    Nonneg(NonnegCone),
    Soc(SocCone),
    Psd(PsdCone),
}

impl ConeState {
    pub fn new(cone: &Cone) -> Self {
        match *cone {
            Cone::Nonnegative(n) => ConeState::Nonneg(NonnegCone::new(n)),
            Cone::SecondOrder(n) => ConeState::Soc(SocCone::new(n)),
            Cone::Psd(n) => ConeState::Psd(PsdCone::new(n)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConeState::Nonneg(c) => c.dim,
            ConeState::Soc(c) => c.dim,
            ConeState::Psd(c) => c.dim,
        }
    }

    /// Barrier degree.
    pub fn degree(&self) -> usize {
        match self {
            ConeState::Nonneg(c) => c.dim,
            ConeState::Soc(_) => 1,
            ConeState::Psd(c) => c.side,
        }
    }

    pub fn identity(&self, out: &mut [f64]) {
        match self {
            ConeState::Nonneg(c) => c.identity(out),
            ConeState::Soc(c) => c.identity(out),
            ConeState::Psd(c) => c.identity(out),
        }
    }

    pub fn update(&mut self, x: &[f64], s: &[f64]) -> bool {
        match self {
            ConeState::Nonneg(c) => c.update(x, s),
            ConeState::Soc(c) => c.update(x, s),
            ConeState::Psd(c) => c.update(x, s),
        }
    }

    pub fn lambda(&self, out: &mut [f64]) {
        match self {
            ConeState::Nonneg(c) => out.copy_from_slice(&c.lambda),
            ConeState::Soc(c) => out.copy_from_slice(&c.lambda),
            ConeState::Psd(c) => c.lambda(out),
        }
    }

    pub fn w(&self, v: &[f64], out: &mut [f64]) {
        match self {
            ConeState::Nonneg(c) => c.w(v, out),
            ConeState::Soc(c) => c.w(v, out),
            ConeState::Psd(c) => c.w(v, out),
        }
    }

    pub fn w_inv_t(&self, v: &[f64], out: &mut [f64]) {
        match self {
            ConeState::Nonneg(c) => c.w_inv_t(v, out),
            ConeState::Soc(c) => c.w_inv_t(v, out),
            ConeState::Psd(c) => c.w_inv_t(v, out),
        }
    }

    pub fn w_t(&self, v: &[f64], out: &mut [f64]) {
        match self {
            ConeState::Nonneg(c) => c.w_t(v, out),
            ConeState::Soc(c) => c.w_t(v, out),
            ConeState::Psd(c) => c.w_t(v, out),
        }
    }

    pub fn h_inv(&self, v: &[f64], out: &mut [f64]) {
        match self {
            ConeState::Nonneg(c) => c.h_inv(v, out),
            ConeState::Soc(c) => c.h_inv(v, out),
            ConeState::Psd(c) => c.h_inv(v, out),
        }
    }

    pub fn jordan(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        match self {
            ConeState::Nonneg(_) => NonnegCone::jordan(u, v, out),
            ConeState::Soc(_) => SocCone::jordan(u, v, out),
            ConeState::Psd(c) => PsdCone::jordan(u, v, out, c.side),
        }
    }

    pub fn lambda_inv_jordan(&self, v: &[f64], out: &mut [f64]) {
        match self {
            ConeState::Nonneg(c) => c.lambda_inv_jordan(v, out),
            ConeState::Soc(c) => c.lambda_inv_jordan(v, out),
            ConeState::Psd(c) => c.lambda_inv_jordan(v, out),
        }
    }

    /// Largest step `α` keeping `λ + α d` in the cone, `d` in scaled coordinates.
    pub fn step_limit(&self, d: &[f64]) -> f64 {
        match self {
            ConeState::Nonneg(c) => c.step_limit(d),
            ConeState::Soc(c) => c.step_limit(d),
            ConeState::Psd(c) => c.step_limit(d),
        }
    }

    /// Adds this block's contribution `A_B H⁻¹ A_Bᵀ` to the Schur complement.
    ///
    /// `rows[r]` lists the `(offset within block, value)` entries of the `r`-th
    /// row touching the block; `sink(r1, r2, v)` receives lower-triangle terms.
    pub fn schur(&self, rows: &[Vec<(usize, f64)>], mut sink: impl FnMut(usize, usize, f64)) {
        match self {
            ConeState::Nonneg(c) => {
                for (i, ri) in rows.iter().enumerate() {
                    for (j, rj) in rows.iter().enumerate().take(i + 1) {
                        let acc = sparse_dot_weighted(ri, rj, |k| c.h_inv_diag(k));
                        if acc != 0.0 {
                            sink(i, j, acc);
                        }
                    }
                }
            }
            ConeState::Soc(c) => {
                if c.dim <= 8 {
                    let q = c.dim;
                    let h = c.h_inv_dense();
                    let dense: Vec<Vec<f64>> = rows
                        .iter()
                        .map(|r| {
                            let mut d = vec![0.0; q];
                            for &(k, v) in r {
                                d[k] += v;
                            }
                            d
                        })
                        .collect();
                    let hd: Vec<Vec<f64>> = dense
                        .iter()
                        .map(|d| (0..q).map(|a| (0..q).map(|b| h[a * q + b] * d[b]).sum()).collect())
                        .collect();
                    for i in 0..rows.len() {
                        for j in 0..=i {
                            let acc: f64 = rows[j].iter().map(|&(k, v)| v * hd[i][k]).sum();
                            sink(i, j, acc);
                        }
                    }
                } else {
                    let (jw, beta2) = c.low_rank();
                    let proj: Vec<f64> = rows
                        .iter()
                        .map(|r| r.iter().map(|&(k, v)| v * jw[k]).sum())
                        .collect();
                    for i in 0..rows.len() {
                        for j in 0..=i {
                            let jdot = sparse_dot_weighted(&rows[i], &rows[j], |k| {
                                if k == 0 {
                                    1.0
                                } else {
                                    -1.0
                                }
                            });
                            sink(i, j, (2.0 * proj[i] * proj[j] - jdot) / beta2);
                        }
                    }
                }
            }
            ConeState::Psd(c) => c.schur(rows, sink),
        }
    }
}

/// `Σ_k a_k b_k w(k)` for two sparse vectors sorted by offset.
fn sparse_dot_weighted(a: &[(usize, f64)], b: &[(usize, f64)], w: impl Fn(usize) -> f64) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1 * w(a[i].0);
                i += 1;
                j += 1;
            }
        }
    }
    acc
}
