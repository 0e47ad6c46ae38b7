/// Second-order cone `{(t, x) : t ≥ ‖x‖}` with Nesterov–Todd scaling
/// `W = β (2 v vᵀ − J)`, `J = diag(1, −1, …, −1)`.
#[derive(Debug, Clone)]
pub(crate) struct SocCone {
    pub dim: usize,
    beta: f64,
    v: Vec<f64>,
    /// Normalized scaling point `w̄` with `w̄ᵀ J w̄ = 1`; `W² = β² (2 w̄ w̄ᵀ − J)`.
    wbar: Vec<f64>,
    pub lambda: Vec<f64>,
}

fn jdot(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] - a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SocCone {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        Self {
            dim,
            beta: 1.0,
            v: e.clone(),
            wbar: e.clone(),
            lambda: e,
        }
    }

    pub fn identity(&self, out: &mut [f64]) {
        out.fill(0.0);
        out[0] = 1.0;
    }

    pub fn update(&mut self, x: &[f64], s: &[f64]) -> bool {
        let xjx = jdot(x, x);
        let sjs = jdot(s, s);
        if !(x[0] > 0.0 && s[0] > 0.0 && xjx > 0.0 && sjs > 0.0) {
            return false;
        }
        let a = xjx.sqrt();
        let b = sjs.sqrt();
        let xbar: Vec<f64> = x.iter().map(|v| v / a).collect();
        let sbar: Vec<f64> = s.iter().map(|v| v / b).collect();
        let gamma = ((1.0 + dot(&xbar, &sbar)) / 2.0).sqrt();
        self.wbar[0] = (sbar[0] + xbar[0]) / (2.0 * gamma);
        for i in 1..self.dim {
            self.wbar[i] = (sbar[i] - xbar[i]) / (2.0 * gamma);
        }
        self.beta = (b / a).sqrt();
        let denom = (2.0 * (self.wbar[0] + 1.0)).sqrt();
        self.v[0] = (self.wbar[0] + 1.0) / denom;
        for i in 1..self.dim {
            self.v[i] = self.wbar[i] / denom;
        }
        let mut lambda = vec![0.0; self.dim];
        self.w(x, &mut lambda);
        self.lambda = lambda;
        true
    }

    /// `W u = β (2 v (vᵀu) − J u)`
    pub fn w(&self, u: &[f64], out: &mut [f64]) {
        let vu = dot(&self.v, u);
        out[0] = self.beta * (2.0 * self.v[0] * vu - u[0]);
        for i in 1..self.dim {
            out[i] = self.beta * (2.0 * self.v[i] * vu + u[i]);
        }
    }

    /// `W⁻¹ u = β⁻¹ (2 J v (vᵀ J u) − J u)`; `W` is symmetric so this is also `W⁻ᵀ`.
    pub fn w_inv_t(&self, u: &[f64], out: &mut [f64]) {
        let vju = jdot(&self.v, u);
        out[0] = (2.0 * self.v[0] * vju - u[0]) / self.beta;
        for i in 1..self.dim {
            out[i] = (-2.0 * self.v[i] * vju + u[i]) / self.beta;
        }
    }

    pub fn w_t(&self, u: &[f64], out: &mut [f64]) {
        self.w(u, out)
    }

    /// `H⁻¹ u = W⁻² u = β⁻² (2 J w̄ (w̄ᵀ J u) − J u)`
    pub fn h_inv(&self, u: &[f64], out: &mut [f64]) {
        let b2 = self.beta * self.beta;
        let wju = jdot(&self.wbar, u);
        out[0] = (2.0 * self.wbar[0] * wju - u[0]) / b2;
        for i in 1..self.dim {
            out[i] = (-2.0 * self.wbar[i] * wju + u[i]) / b2;
        }
    }

    /// Dense `H⁻¹`, row-major.
    pub fn h_inv_dense(&self) -> Vec<f64> {
        let q = self.dim;
        let b2 = self.beta * self.beta;
        let jw: Vec<f64> = (0..q)
            .map(|i| if i == 0 { self.wbar[0] } else { -self.wbar[i] })
            .collect();
        let mut h = vec![0.0; q * q];
        for i in 0..q {
            for j in 0..q {
                let mut val = 2.0 * jw[i] * jw[j];
                if i == j {
                    val -= if i == 0 { 1.0 } else { -1.0 };
                }
                h[i * q + j] = val / b2;
            }
        }
        h
    }

    /// `(J w̄, β²)` such that `H⁻¹ = (2 J w̄ w̄ᵀ J − J) / β²`.
    pub fn low_rank(&self) -> (Vec<f64>, f64) {
        let jw = (0..self.dim)
            .map(|i| if i == 0 { self.wbar[0] } else { -self.wbar[i] })
            .collect();
        (jw, self.beta * self.beta)
    }

    pub fn jordan(u: &[f64], v: &[f64], out: &mut [f64]) {
        out[0] = dot(u, v);
        for i in 1..u.len() {
            out[i] = u[0] * v[i] + v[0] * u[i];
        }
    }

    /// Solves `λ ∘ u = v` for `u`.
    pub fn lambda_inv_jordan(&self, v: &[f64], out: &mut [f64]) {
        let l = &self.lambda;
        let det = jdot(l, l);
        let l1v1: f64 = l[1..].iter().zip(&v[1..]).map(|(a, b)| a * b).sum();
        let u0 = (l[0] * v[0] - l1v1) / det;
        out[0] = u0;
        for i in 1..self.dim {
            out[i] = (v[i] - l[i] * u0) / l[0];
        }
    }

    /// Largest `α ≥ 0` with `λ + α d` in the cone.
    pub fn step_limit(&self, d: &[f64]) -> f64 {
        step_to_boundary(&self.lambda, d)
    }
}

/// Largest `α ≥ 0` such that `p + α d` stays in the second-order cone, for `p` interior.
pub(crate) fn step_to_boundary(p: &[f64], d: &[f64]) -> f64 {
    let d1 = d[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    if d[0] >= d1 {
        return f64::INFINITY;
    }
    let c0 = jdot(p, p);
    let b = jdot(p, d);
    let a = jdot(d, d);
    if a < 0.0 {
        let disc = (b * b - a * c0).max(0.0).sqrt();
        if b >= 0.0 {
            (b + disc) / (-a)
        } else {
            c0 / (-b + disc)
        }
    } else {
        // d lies in −Q: the boundary is met at the smaller of two positive roots.
        let disc = (b * b - a * c0).max(0.0).sqrt();
        c0 / (-b + disc)
    }
}
