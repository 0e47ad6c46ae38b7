/// Nonnegative orthant `R^n_+` with the diagonal NT scaling `W = diag(√(s/x))`.
#[derive(Debug, Clone)]
pub(crate) struct NonnegCone {
    pub dim: usize,
    /// `√(s/x)`
    pub w: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl NonnegCone {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            w: vec![1.0; dim],
            lambda: vec![1.0; dim],
        }
    }

    pub fn identity(&self, out: &mut [f64]) {
        out.fill(1.0);
    }

    pub fn update(&mut self, x: &[f64], s: &[f64]) -> bool {
        for i in 0..self.dim {
            if !(x[i] > 0.0 && s[i] > 0.0) {
                return false;
            }
            self.w[i] = (s[i] / x[i]).sqrt();
            self.lambda[i] = (x[i] * s[i]).sqrt();
        }
        true
    }

    pub fn w(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            out[i] = self.w[i] * v[i];
        }
    }

    pub fn w_inv_t(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            out[i] = v[i] / self.w[i];
        }
    }

    pub fn w_t(&self, v: &[f64], out: &mut [f64]) {
        self.w(v, out)
    }

    pub fn h_inv(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            out[i] = v[i] / (self.w[i] * self.w[i]);
        }
    }

    /// Diagonal of `H⁻¹`, i.e. `x / s`.
    pub fn h_inv_diag(&self, i: usize) -> f64 {
        1.0 / (self.w[i] * self.w[i])
    }

    pub fn jordan(u: &[f64], v: &[f64], out: &mut [f64]) {
        for i in 0..u.len() {
            out[i] = u[i] * v[i];
        }
    }

    pub fn lambda_inv_jordan(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            out[i] = v[i] / self.lambda[i];
        }
    }

    pub fn step_limit(&self, d: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.dim {
            if d[i] < 0.0 {
                alpha = alpha.min(-self.lambda[i] / d[i]);
            }
        }
        alpha
    }
}
