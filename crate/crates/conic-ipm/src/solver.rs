use std::time::{Duration, Instant};

use log::debug;

use crate::cones::ConeState;
use crate::problem::{Matrix, Problem, ProblemError};
use crate::schur::Schur;

#[derive(Debug, Clone)]
pub struct Settings {
    /// Relative tolerance on primal/dual residuals and the duality gap.
    pub tol: f64,
    pub max_iter: usize,
    pub time_limit: Option<Duration>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: 1.49e-8,
            max_iter: 200,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    /// Progress stopped but all measures are within `1e3 · tol`.
    NearOptimal,
    /// Progress stopped away from optimality; the best iterate is returned.
    Stalled,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    TimeLimit,
    NumericalError,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    /// `‖Ax − b‖∞ / (1 + ‖b‖∞)`
    pub primal: f64,
    /// `‖Aᵀy + s − c‖∞ / (1 + ‖c‖∞)`
    pub dual: f64,
    /// `|cᵀx − bᵀy| / (1 + |cᵀx| + |bᵀy|)`
    pub gap: f64,
}

impl Residuals {
    fn worst(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: Status,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub solve_time: Duration,
}

struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    ds: Vec<f64>,
    dtau: f64,
    dkappa: f64,
    /// `W dx`
    sx: Vec<f64>,
    /// `W⁻ᵀ ds`
    ss: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Workspace {
    a: Matrix,
    b: Vec<f64>,
    c: Vec<f64>,
    cones: Vec<ConeState>,
    offsets: Vec<usize>,
    schur: Schur,
}

impl Workspace {
    fn blocks(&self) -> impl Iterator<Item = (usize, std::ops::Range<usize>)> + '_ {
        self.cones
            .iter()
            .enumerate()
            .map(|(k, c)| (k, self.offsets[k]..self.offsets[k] + c.dim()))
    }

    fn map_blocks(&self, v: &[f64], out: &mut [f64], f: impl Fn(&ConeState, &[f64], &mut [f64])) {
        for (k, r) in self.blocks() {
            f(&self.cones[k], &v[r.clone()], &mut out[r]);
        }
    }

    fn update_scaling(&mut self, x: &[f64], s: &[f64]) -> bool {
        let offsets = &self.offsets;
        self.cones.iter_mut().enumerate().all(|(k, c)| {
            let r = offsets[k]..offsets[k] + c.dim();
            c.update(&x[r.clone()], &s[r])
        })
    }

    fn lambda(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.c.len()];
        for (k, r) in self.blocks() {
            self.cones[k].lambda(&mut out[r]);
        }
        out
    }

    /// Solves the linearized homogeneous system for the given right-hand side.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        it: &Iterate,
        p: &[f64],
        hinv_c_v: &[f64],
        r_p: &[f64],
        r_d: &[f64],
        r_g: f64,
        eta: f64,
        r_c: &[f64],
        r_tau: f64,
    ) -> Direction {
        let n = self.c.len();
        let m = self.b.len();
        // g = Wᵀ r_c − η r_d
        let mut g = vec![0.0; n];
        self.map_blocks(r_c, &mut g, |c, v, o| c.w_t(v, o));
        for i in 0..n {
            g[i] -= eta * r_d[i];
        }
        let mut hg = vec![0.0; n];
        self.map_blocks(&g, &mut hg, |c, v, o| c.h_inv(v, o));
        let mut ahg = vec![0.0; m];
        self.a.mul(&hg, &mut ahg);
        let rhs: Vec<f64> = (0..m).map(|i| eta * r_p[i] - ahg[i]).collect();
        let q = self.schur.solve(&rhs);
        // u = H⁻¹(Aᵀq + g)
        let mut atq = vec![0.0; n];
        self.a.mul_t(&q, &mut atq);
        for i in 0..n {
            atq[i] += g[i];
        }
        let mut u = vec![0.0; n];
        self.map_blocks(&atq, &mut u, |c, v, o| c.h_inv(v, o));

        let num = eta * r_g + dot(&self.c, &u) - dot(&self.b, &q) + r_tau / it.tau;
        let den = dot(&self.b, p) - dot(&self.c, hinv_c_v) + it.kappa / it.tau;
        let dtau = num / den;
        let dkappa = (r_tau - it.kappa * dtau) / it.tau;
        let mut dy: Vec<f64> = (0..m).map(|i| q[i] + p[i] * dtau).collect();
        let mut dx: Vec<f64> = (0..n).map(|i| u[i] + hinv_c_v[i] * dtau).collect();
        // Near the boundary the assembled Schur matrix loses accuracy. Moving
        // along (H⁻¹Aᵀδ, δ, −Aᵀδ) leaves the dual and complementarity
        // equations intact, so use it to remove the primal equation error.
        let target: Vec<f64> = (0..m).map(|i| eta * r_p[i] + self.b[i] * dtau).collect();
        let tnorm = inf_norm(&target);
        let mut adx = vec![0.0; m];
        for _ in 0..2 {
            self.a.mul(&dx, &mut adx);
            let err: Vec<f64> = (0..m).map(|i| target[i] - adx[i]).collect();
            if inf_norm(&err) <= 1e-13 * (1.0 + tnorm) {
                break;
            }
            let dq = self.schur.solve(&err);
            let mut atd = vec![0.0; n];
            self.a.mul_t(&dq, &mut atd);
            let mut hd = vec![0.0; n];
            self.map_blocks(&atd, &mut hd, |c, v, o| c.h_inv(v, o));
            for i in 0..n {
                dx[i] += hd[i];
            }
            for i in 0..m {
                dy[i] += dq[i];
            }
        }
        let mut sx = vec![0.0; n];
        self.map_blocks(&dx, &mut sx, |c, v, o| c.w(v, o));
        // ds from the linearized dual equation keeps the dual residual exact
        // even when the scaling is badly conditioned.
        let mut atdy = vec![0.0; n];
        self.a.mul_t(&dy, &mut atdy);
        let ds: Vec<f64> = (0..n)
            .map(|i| eta * r_d[i] - atdy[i] + self.c[i] * dtau)
            .collect();
        let mut ss = vec![0.0; n];
        self.map_blocks(&ds, &mut ss, |c, v, o| c.w_inv_t(v, o));
        Direction {
            dx,
            dy,
            ds,
            dtau,
            dkappa,
            sx,
            ss,
        }
    }

    fn max_step(&self, it: &Iterate, d: &Direction) -> f64 {
        let mut alpha = f64::INFINITY;
        for (k, r) in self.blocks() {
            alpha = alpha
                .min(self.cones[k].step_limit(&d.sx[r.clone()]))
                .min(self.cones[k].step_limit(&d.ss[r]));
        }
        if d.dtau < 0.0 {
            alpha = alpha.min(-it.tau / d.dtau);
        }
        if d.dkappa < 0.0 {
            alpha = alpha.min(-it.kappa / d.dkappa);
        }
        alpha
    }
}

/// Solves a conic program with a homogeneous self-dual interior-point method.
pub fn solve(problem: &Problem, settings: &Settings) -> Result<Solution, ProblemError> {
    problem.validate()?;
    let start = Instant::now();
    let n = problem.num_vars();
    let m = problem.num_rows;
    let original = Matrix::from_triplets(m, n, &problem.entries);

    // Row equilibration and objective / rhs scaling.
    let mut a = original.clone();
    let d: Vec<f64> = (0..m)
        .map(|i| {
            let r = a.row_inf_norm(i);
            if r > 0.0 {
                1.0 / r
            } else {
                1.0
            }
        })
        .collect();
    a.scale_rows(&d);
    let db: Vec<f64> = (0..m).map(|i| d[i] * problem.b[i]).collect();
    let scale_b = positive_or_one(inf_norm(&db));
    let scale_c = positive_or_one(inf_norm(&problem.c));
    let b: Vec<f64> = db.iter().map(|v| v / scale_b).collect();
    let c: Vec<f64> = problem.c.iter().map(|v| v / scale_c).collect();

    let cones: Vec<ConeState> = problem.cones.iter().map(ConeState::new).collect();
    let mut offsets = Vec::with_capacity(cones.len());
    let mut off = 0;
    for cone in &cones {
        offsets.push(off);
        off += cone.dim();
    }
    let schur = Schur::new(&a, &cones);
    let mut ws = Workspace {
        a,
        b,
        c,
        cones,
        offsets,
        schur,
    };
    let nu: f64 = ws.cones.iter().map(|c| c.degree() as f64).sum();

    let mut e = vec![0.0; n];
    for (k, r) in ws.blocks() {
        ws.cones[k].identity(&mut e[r]);
    }
    let mut it = Iterate {
        x: e.clone(),
        y: vec![0.0; m],
        s: e.clone(),
        tau: 1.0,
        kappa: 1.0,
    };
    ws.update_scaling(&it.x, &it.s);

    let unscale = |it: &Iterate| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let x = it.x.iter().map(|v| v * scale_b).collect();
        let y = (0..m).map(|i| it.y[i] * d[i] * scale_c).collect();
        let s = it.s.iter().map(|v| v * scale_c).collect();
        (x, y, s)
    };
    let b_norm = inf_norm(&problem.b);
    let c_norm = inf_norm(&problem.c);
    let measure = |x: &[f64], y: &[f64], s: &[f64], tau: f64| -> (Residuals, f64, f64) {
        let mut ax = vec![0.0; m];
        original.mul(x, &mut ax);
        let mut aty = vec![0.0; n];
        original.mul_t(y, &mut aty);
        let pres = (0..m).fold(0.0f64, |acc, i| acc.max((ax[i] / tau - problem.b[i]).abs()));
        let dres = (0..n).fold(0.0f64, |acc, i| acc.max(((aty[i] + s[i]) / tau - problem.c[i]).abs()));
        let pobj = dot(&problem.c, x) / tau;
        let dobj = dot(&problem.b, y) / tau;
        let res = Residuals {
            primal: pres / (1.0 + b_norm),
            dual: dres / (1.0 + c_norm),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
        };
        (res, pobj, dobj)
    };
    let certificates = |x: &[f64], y: &[f64], s: &[f64], tol: f64| -> Option<Status> {
        let bty = dot(&problem.b, y);
        if bty > 0.0 {
            let mut aty = vec![0.0; n];
            original.mul_t(y, &mut aty);
            let r = (0..n).fold(0.0f64, |acc, i| acc.max((aty[i] + s[i]).abs()));
            if r / bty <= tol {
                return Some(Status::PrimalInfeasible);
            }
        }
        let ctx = dot(&problem.c, x);
        if ctx < 0.0 {
            let mut ax = vec![0.0; m];
            original.mul(x, &mut ax);
            if inf_norm(&ax) / (-ctx) <= tol {
                return Some(Status::DualInfeasible);
            }
        }
        None
    };

    let mut best: Option<(f64, Solution)> = None;
    let mut since_best = 0usize;
    let mut status = Status::MaxIterations;
    let mut iterations = 0;
    for iter in 0..=settings.max_iter {
        iterations = iter;
        let (x_u, y_u, s_u) = unscale(&it);
        let (res, pobj, dobj) = measure(&x_u, &y_u, &s_u, it.tau);
        let mu = (dot(&it.x, &it.s) + it.tau * it.kappa) / (nu + 1.0);
        debug!(
            "iter {iter:3} pobj {pobj:+.8e} dobj {dobj:+.8e} pres {:.2e} dres {:.2e} gap {:.2e} tau {:.2e} kappa {:.2e} mu {:.2e}",
            res.primal, res.dual, res.gap, it.tau, it.kappa, mu
        );
        let snapshot = |status: Status| Solution {
            status,
            x: x_u.iter().map(|v| v / it.tau).collect(),
            y: y_u.iter().map(|v| v / it.tau).collect(),
            s: s_u.iter().map(|v| v / it.tau).collect(),
            primal_objective: pobj,
            dual_objective: dobj,
            residuals: res,
            iterations: iter,
            solve_time: start.elapsed(),
        };
        if res.worst() <= settings.tol {
            status = Status::Optimal;
            best = Some((res.worst(), snapshot(Status::Optimal)));
            break;
        }
        if let Some(cert) = certificates(&x_u, &y_u, &s_u, settings.tol) {
            status = cert;
            best = Some((0.0, certificate_solution(cert, &x_u, &y_u, &s_u, problem, iter, start)));
            break;
        }
        if best.as_ref().is_none_or(|(w, _)| res.worst() < *w) {
            best = Some((res.worst(), snapshot(Status::Stalled)));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if iter == settings.max_iter {
            break;
        }
        if since_best > 15 {
            status = Status::Stalled;
            break;
        }
        if settings.time_limit.is_some_and(|t| start.elapsed() > t) {
            status = Status::TimeLimit;
            break;
        }

        if !ws.schur.factor(&ws.cones) {
            status = Status::NumericalError;
            break;
        }
        // Residuals of the homogeneous embedding in scaled space.
        let mut ax = vec![0.0; m];
        ws.a.mul(&it.x, &mut ax);
        let r_p: Vec<f64> = (0..m).map(|i| ws.b[i] * it.tau - ax[i]).collect();
        let mut aty = vec![0.0; n];
        ws.a.mul_t(&it.y, &mut aty);
        let r_d: Vec<f64> = (0..n).map(|i| ws.c[i] * it.tau - aty[i] - it.s[i]).collect();
        let r_g = it.kappa + dot(&ws.c, &it.x) - dot(&ws.b, &it.y);

        // p solves M p = b + A H⁻¹ c; v = H⁻¹(Aᵀp − c)
        let mut hc = vec![0.0; n];
        ws.map_blocks(&ws.c, &mut hc, |c, v, o| c.h_inv(v, o));
        let mut ahc = vec![0.0; m];
        ws.a.mul(&hc, &mut ahc);
        let rhs: Vec<f64> = (0..m).map(|i| ws.b[i] + ahc[i]).collect();
        let p = ws.schur.solve(&rhs);
        let mut atp = vec![0.0; n];
        ws.a.mul_t(&p, &mut atp);
        for i in 0..n {
            atp[i] -= ws.c[i];
        }
        let mut v = vec![0.0; n];
        ws.map_blocks(&atp, &mut v, |c, u, o| c.h_inv(u, o));

        let lambda = ws.lambda();
        let neg_lambda: Vec<f64> = lambda.iter().map(|l| -l).collect();
        let tk = it.tau * it.kappa;
        let aff = ws.direction(&it, &p, &v, &r_p, &r_d, r_g, 1.0, &neg_lambda, -tk);
        let alpha_aff = ws.max_step(&it, &aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3);

        // Corrector: λ ∘ (W dx + W⁻ᵀ ds) = σμe − λ∘λ − (W dx_a)∘(W⁻ᵀ ds_a)
        let mut ll = vec![0.0; n];
        let mut cross = vec![0.0; n];
        let mut target = vec![0.0; n];
        for (k, r) in ws.blocks() {
            let cone = &ws.cones[k];
            cone.jordan(&lambda[r.clone()], &lambda[r.clone()], &mut ll[r.clone()]);
            cone.jordan(&aff.sx[r.clone()], &aff.ss[r.clone()], &mut cross[r.clone()]);
        }
        for i in 0..n {
            target[i] = sigma * mu * e[i] - ll[i] - cross[i];
        }
        let mut r_c = vec![0.0; n];
        ws.map_blocks(&target, &mut r_c, |c, v, o| c.lambda_inv_jordan(v, o));
        let r_tau = sigma * mu - tk - aff.dtau * aff.dkappa;
        let dir = ws.direction(&it, &p, &v, &r_p, &r_d, r_g, 1.0 - sigma, &r_c, r_tau);
        let alpha = (0.99 * ws.max_step(&it, &dir)).min(1.0);
        if alpha < 1e-10 {
            status = Status::Stalled;
            break;
        }
        for i in 0..n {
            it.x[i] += alpha * dir.dx[i];
            it.s[i] += alpha * dir.ds[i];
        }
        for i in 0..m {
            it.y[i] += alpha * dir.dy[i];
        }
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
        if !ws.update_scaling(&it.x, &it.s) {
            status = Status::NumericalError;
            break;
        }
    }

    // A stalled run whose tau has collapsed against kappa is usually an
    // infeasibility certificate that ran out of numerical room; accept it at a
    // looser tolerance rather than report the best (far from feasible) iterate.
    if !matches!(status, Status::Optimal | Status::PrimalInfeasible | Status::DualInfeasible)
        && it.tau < 1e-6 * it.kappa
    {
        let (x_u, y_u, s_u) = unscale(&it);
        if let Some(cert) = certificates(&x_u, &y_u, &s_u, settings.tol.sqrt()) {
            debug!("accepting {cert:?} certificate at loose tolerance");
            return Ok(certificate_solution(cert, &x_u, &y_u, &s_u, problem, iterations, start));
        }
    }
    let (worst, mut sol) = best.expect("at least one iterate is measured");
    sol.iterations = iterations;
    sol.solve_time = start.elapsed();
    if status != Status::Optimal && !matches!(status, Status::PrimalInfeasible | Status::DualInfeasible) {
        status = if worst <= 1e3 * settings.tol {
            Status::NearOptimal
        } else {
            status
        };
    }
    sol.status = status;
    Ok(sol)
}

fn positive_or_one(v: f64) -> f64 {
    if v > 0.0 && v.is_finite() {
        v
    } else {
        1.0
    }
}

fn certificate_solution(
    status: Status,
    x: &[f64],
    y: &[f64],
    s: &[f64],
    problem: &Problem,
    iterations: usize,
    start: Instant,
) -> Solution {
    let (x, y, s, pobj, dobj) = match status {
        Status::PrimalInfeasible => {
            let scale = dot(&problem.b, y);
            (
                vec![f64::NAN; x.len()],
                y.iter().map(|v| v / scale).collect(),
                s.iter().map(|v| v / scale).collect(),
                f64::INFINITY,
                f64::INFINITY,
            )
        }
        _ => {
            let scale = -dot(&problem.c, x);
            (
                x.iter().map(|v| v / scale).collect(),
                vec![f64::NAN; y.len()],
                vec![f64::NAN; s.len()],
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
            )
        }
    };
    Solution {
        status,
        x,
        y,
        s,
        primal_objective: pobj,
        dual_objective: dobj,
        residuals: Residuals::default(),
        iterations,
        solve_time: start.elapsed(),
    }
}
