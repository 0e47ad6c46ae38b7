use conic_ipm::svec::{svec, svec_dim};
use conic_ipm::{solve, Cone, Problem, Settings, Status};
use faer::{Mat, Side};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

#[test]
fn trivial_lp() {
    // minimize x subject to x - t = 1
    let p = Problem {
        num_rows: 1,
        entries: vec![(0, 0, 1.0), (0, 1, -1.0)],
        b: vec![1.0],
        c: vec![1.0, 0.0],
        cones: vec![Cone::Nonnegative(2)],
    };
    let sol = solve(&p, &Settings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(rel(sol.primal_objective, 1.0) < 1e-7);
    assert!(rel(sol.x[0], 1.0) < 1e-6);
}

#[test]
fn infeasible_box() {
    // x - t1 = 2, x + t2 = 1, x, t ≥ 0
    let p = Problem {
        num_rows: 2,
        entries: vec![(0, 0, 1.0), (0, 1, -1.0), (1, 0, 1.0), (1, 2, 1.0)],
        b: vec![2.0, 1.0],
        c: vec![0.0, 0.0, 0.0],
        cones: vec![Cone::Nonnegative(3)],
    };
    let sol = solve(&p, &Settings::default()).unwrap();
    assert_eq!(sol.status, Status::PrimalInfeasible);
    // Farkas certificate: bᵀy = 1, Aᵀy ≤ 0 on the cone
    assert!(rel(p.b[0] * sol.y[0] + p.b[1] * sol.y[1], 1.0) < 1e-9);
}

#[test]
fn unbounded_lp() {
    // minimize -x subject to x - t = 1
    let p = Problem {
        num_rows: 1,
        entries: vec![(0, 0, 1.0), (0, 1, -1.0)],
        b: vec![1.0],
        c: vec![-1.0, 0.0],
        cones: vec![Cone::Nonnegative(2)],
    };
    let sol = solve(&p, &Settings::default()).unwrap();
    assert_eq!(sol.status, Status::DualInfeasible);
}

#[test]
fn distance_to_point_socp() {
    // minimize t subject to (t, u) ∈ SOC, u = (3, 4)
    let p = Problem {
        num_rows: 2,
        entries: vec![(0, 1, 1.0), (1, 2, 1.0)],
        b: vec![3.0, 4.0],
        c: vec![1.0, 0.0, 0.0],
        cones: vec![Cone::SecondOrder(3)],
    };
    let sol = solve(&p, &Settings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(rel(sol.primal_objective, 5.0) < 1e-7);
}

#[test]
fn smallest_eigenvalue_sdp() {
    // minimize <C, X> subject to trace X = 1, X ⪰ 0  →  λ_min(C)
    let n = 5;
    let c = Mat::<f64>::from_fn(n, n, |i, j| ((i + 2 * j) as f64).cos() + ((2 * i + j) as f64).cos());
    let cv = svec(&c);
    let entries = (0..n)
        .map(|j| (0, conic_ipm::svec::svec_index(n, j, j), 1.0))
        .collect();
    let p = Problem {
        num_rows: 1,
        entries,
        b: vec![1.0],
        c: cv,
        cones: vec![Cone::Psd(n)],
    };
    let sol = solve(&p, &Settings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    let eig = c.self_adjoint_eigenvalues(Side::Lower).unwrap();
    assert!(rel(sol.primal_objective, eig[0]) < 1e-7, "{} vs {}", sol.primal_objective, eig[0]);
}

#[test]
fn dimension_mismatch_is_rejected() {
    let p = Problem {
        num_rows: 1,
        entries: vec![],
        b: vec![1.0],
        c: vec![1.0, 2.0],
        cones: vec![Cone::Nonnegative(3)],
    };
    assert!(solve(&p, &Settings::default()).is_err());
}

/// Random instance with a planted strictly complementary primal-dual pair.
fn planted(seed: u64, cones: &[Cone], m: usize) -> (Problem, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut s = Vec::new();
    for cone in cones {
        match *cone {
            Cone::Nonnegative(k) => {
                for _ in 0..k {
                    let v: f64 = rng.gen_range(0.5..2.0);
                    if rng.gen_bool(0.5) {
                        x.push(v);
                        s.push(0.0);
                    } else {
                        x.push(0.0);
                        s.push(v);
                    }
                }
            }
            Cone::SecondOrder(k) => {
                let u: Vec<f64> = (1..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                let (a, b): (f64, f64) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
                x.push(a);
                s.push(b);
                for v in &u {
                    x.push(a * v / norm);
                    s.push(-b * v / norm);
                }
            }
            Cone::Psd(k) => {
                let g = Mat::<f64>::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
                let q = g.qr().compute_Q();
                let r = rng.gen_range(1..k);
                let dx = Mat::<f64>::from_fn(k, k, |i, j| {
                    if i == j && i < r {
                        rng.gen_range(0.5..2.0)
                    } else {
                        0.0
                    }
                });
                let ds = Mat::<f64>::from_fn(k, k, |i, j| {
                    if i == j && i >= r {
                        rng.gen_range(0.5..2.0)
                    } else {
                        0.0
                    }
                });
                x.extend(svec(&(&q * &dx * q.transpose())));
                s.extend(svec(&(&q * &ds * q.transpose())));
            }
        }
    }
    let n = x.len();
    let mut entries = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.gen_bool(0.6) {
                entries.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut b = vec![0.0; m];
    let mut c = s.clone();
    for &(i, j, v) in &entries {
        b[i] += v * x[j];
        c[j] += v * y[i];
    }
    let opt = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    (
        Problem {
            num_rows: m,
            entries,
            b,
            c,
            cones: cones.to_vec(),
        },
        opt,
    )
}

#[test]
fn planted_mixed_problem() {
    let cones = [Cone::Nonnegative(4), Cone::SecondOrder(4), Cone::Psd(4), Cone::SecondOrder(3)];
    let n: usize = cones.iter().map(Cone::dim).sum();
    assert_eq!(n, 4 + 4 + svec_dim(4) + 3);
    let (p, opt) = planted(7, &cones, 9);
    let sol = solve(&p, &Settings::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(rel(sol.primal_objective, opt) < 1e-7, "{} vs {opt}", sol.primal_objective);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn planted_problems_reach_the_planted_value(
        seed in any::<u64>(),
        k_lp in 1usize..6,
        k_soc in 2usize..6,
        k_psd in 2usize..5,
        m in 1usize..8,
    ) {
        let cones = [Cone::Nonnegative(k_lp), Cone::SecondOrder(k_soc), Cone::Psd(k_psd)];
        let (p, opt) = planted(seed, &cones, m);
        let sol = solve(&p, &Settings::default()).unwrap();
        prop_assert!(matches!(sol.status, Status::Optimal | Status::NearOptimal), "{:?}", sol.status);
        prop_assert!(rel(sol.primal_objective, opt) < 1e-5, "{} vs {}", sol.primal_objective, opt);
    }
}
