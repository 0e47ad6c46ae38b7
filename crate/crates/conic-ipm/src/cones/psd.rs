use faer::{Mat, Side};

use crate::svec::{smat, svec_dim, svec_into, SQRT2};

/// Cone of positive semidefinite `n × n` matrices in packed storage.
///
/// The NT scaling is `W(v) = G⁻¹ V G⁻ᵀ` with `G Gᵀ` the NT scaling point, so
/// that `W(x) = W⁻ᵀ(s) = Σ` is diagonal.
#[derive(Debug, Clone)]
pub(crate) struct PsdCone {
    pub side: usize,
    pub dim: usize,
    g: Mat<f64>,
    ginv: Mat<f64>,
    /// `G Gᵀ`
    pub wnt: Mat<f64>,
    pub sigma: Vec<f64>,
}

impl PsdCone {
    pub fn new(side: usize) -> Self {
        Self {
            side,
            dim: svec_dim(side),
            g: Mat::identity(side, side),
            ginv: Mat::identity(side, side),
            wnt: Mat::identity(side, side),
            sigma: vec![1.0; side],
        }
    }

    pub fn identity(&self, out: &mut [f64]) {
        out.fill(0.0);
        let n = self.side;
        for j in 0..n {
            out[crate::svec::svec_index(n, j, j)] = 1.0;
        }
    }

    pub fn update(&mut self, x: &[f64], s: &[f64]) -> bool {
        let n = self.side;
        let xm = smat(x, n);
        let sm = smat(s, n);
        let (Ok(lx), Ok(ls)) = (xm.llt(Side::Lower), sm.llt(Side::Lower)) else {
            return false;
        };
        let l = lx.L().to_owned();
        let r = ls.L().to_owned();
        let rtl = r.transpose() * &l;
        let Ok(svd) = rtl.svd() else {
            return false;
        };
        let sig: Vec<f64> = svd.S().column_vector().iter().copied().collect();
        if sig.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return false;
        }
        let u = svd.U();
        let v = svd.V();
        let isq = Mat::<f64>::from_fn(n, n, |i, j| if i == j { 1.0 / sig[i].sqrt() } else { 0.0 });
        self.g = &l * v * &isq;
        self.ginv = &isq * u.transpose() * r.transpose();
        self.wnt = &self.g * self.g.transpose();
        self.sigma = sig;
        true
    }

    fn apply(&self, left: &Mat<f64>, v: &[f64], out: &mut [f64], transpose_left: bool) {
        let vm = smat(v, self.side);
        let res = if transpose_left {
            left.transpose() * &vm * left
        } else {
            left * &vm * left.transpose()
        };
        svec_into(&res, out);
    }

    pub fn w(&self, v: &[f64], out: &mut [f64]) {
        self.apply(&self.ginv, v, out, false)
    }

    pub fn w_inv_t(&self, v: &[f64], out: &mut [f64]) {
        self.apply(&self.g, v, out, true)
    }

    pub fn w_t(&self, v: &[f64], out: &mut [f64]) {
        self.apply(&self.ginv, v, out, true)
    }

    pub fn h_inv(&self, v: &[f64], out: &mut [f64]) {
        let vm = smat(v, self.side);
        let res = &self.wnt * &vm * &self.wnt;
        svec_into(&res, out);
    }

    pub fn jordan(u: &[f64], v: &[f64], out: &mut [f64], side: usize) {
        let um = smat(u, side);
        let vm = smat(v, side);
        let p = &um * &vm;
        let sym = Mat::<f64>::from_fn(side, side, |i, j| 0.5 * (p[(i, j)] + p[(j, i)]));
        svec_into(&sym, out);
    }

    /// Solves `(Λ U + U Λ) / 2 = V` with `Λ = diag(σ)`.
    pub fn lambda_inv_jordan(&self, v: &[f64], out: &mut [f64]) {
        let n = self.side;
        let mut k = 0;
        for j in 0..n {
            for i in j..n {
                out[k] = 2.0 * v[k] / (self.sigma[i] + self.sigma[j]);
                k += 1;
            }
        }
    }

    pub fn lambda(&self, out: &mut [f64]) {
        out.fill(0.0);
        let n = self.side;
        for j in 0..n {
            out[crate::svec::svec_index(n, j, j)] = self.sigma[j];
        }
    }

    pub fn step_limit(&self, d: &[f64]) -> f64 {
        let n = self.side;
        let dm = smat(d, n);
        let isq: Vec<f64> = self.sigma.iter().map(|s| 1.0 / s.sqrt()).collect();
        let scaled = Mat::<f64>::from_fn(n, n, |i, j| isq[i] * dm[(i, j)] * isq[j]);
        let Ok(eigs) = scaled.self_adjoint_eigenvalues(Side::Lower) else {
            return 0.0;
        };
        let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        if min >= 0.0 {
            f64::INFINITY
        } else {
            -1.0 / min
        }
    }

    /// Accumulates `a_iᵀ H⁻¹ a_j` for every pair of rows restricted to this block.
    ///
    /// `rows[r]` holds the packed entries `(offset, value)` of one row of `A`
    /// within the block. The lower triangle of the result is written through `sink`.
    pub fn schur(&self, rows: &[Vec<(usize, f64)>], mut sink: impl FnMut(usize, usize, f64)) {
        let n = self.side;
        let w = &self.wnt;
        let positions: Vec<Vec<(usize, usize, f64)>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&(k, v)| {
                        let (i, j) = crate::svec::svec_position(n, k);
                        (i, j, v)
                    })
                    .collect()
            })
            .collect();
        let mut t = Mat::<f64>::zeros(n, n);
        for (ri, pi) in positions.iter().enumerate() {
            if pi.len() * 4 > n {
                // Dense path: T = W A_i W
                let mut ai = Mat::<f64>::zeros(n, n);
                for &(p, q, v) in pi {
                    if p == q {
                        ai[(p, p)] += v;
                    } else {
                        ai[(p, q)] += v / SQRT2;
                        ai[(q, p)] += v / SQRT2;
                    }
                }
                t = w * &ai * w;
            } else {
                t.fill(0.0);
                for &(p, q, v) in pi {
                    if p == q {
                        for c in 0..n {
                            let wc = w[(p, c)] * v;
                            for r in 0..n {
                                t[(r, c)] += w[(r, p)] * wc;
                            }
                        }
                    } else {
                        let v = v / SQRT2;
                        for c in 0..n {
                            let wq = w[(q, c)] * v;
                            let wp = w[(p, c)] * v;
                            for r in 0..n {
                                t[(r, c)] += w[(r, p)] * wq + w[(r, q)] * wp;
                            }
                        }
                    }
                }
            }
            for (rj, pj) in positions.iter().enumerate().take(ri + 1) {
                let mut acc = 0.0;
                for &(p, q, v) in pj {
                    if p == q {
                        acc += v * t[(p, p)];
                    } else {
                        acc += v * SQRT2 * t[(p, q)];
                    }
                }
                sink(ri, rj, acc);
            }
        }
    }
}
