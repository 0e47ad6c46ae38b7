use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opf_relax::case_io::{bundled, parse_case};
use opf_relax::conic_form::{
    add_apparent_power_limit, add_hermitian_psd, add_quadratic_cost_epigraph, add_rotated_2x2, add_socr_3x3,
    hermitian_eigenvalues, real_embedding, symmetric_eigenvalues, ConeKind, ConicProgram, HermitianBlockMap,
    HermitianEntry, LinExpr, ModelError,
};
use opf_relax::network_model::{apply_objective, ObjectiveMode};
use opf_relax::solve_report::{solve, SolveStatus, SolverSettings};

fn vars(prog: &mut ConicProgram, names: &[&str]) -> Vec<usize> {
    names.iter().map(|n| prog.add_var(*n).unwrap()).collect()
}

/// Hermitian block of side 2 over `[v11, v22, re12, im12]`.
fn two_by_two(prog: &mut ConicProgram) -> Vec<usize> {
    let v = vars(prog, &["v11", "v22", "re12", "im12"]);
    let map = HermitianBlockMap::from_fn(2, |i, j| match (i, j) {
        (0, 0) => HermitianEntry { re: LinExpr::var(v[0]), im: None },
        (1, 1) => HermitianEntry { re: LinExpr::var(v[1]), im: None },
        _ => HermitianEntry {
            re: LinExpr::var(v[2]),
            // Entry (1, 0) is V_21 = conj(V_12).
            im: Some(-LinExpr::var(v[3])),
        },
    });
    add_hermitian_psd(prog, map, "H").unwrap();
    v
}

#[test]
fn side_one_block_is_a_sign_constraint() {
    let mut prog = ConicProgram::new();
    let v = prog.add_var("v11").unwrap();
    let id = add_hermitian_psd(
        &mut prog,
        HermitianBlockMap::from_fn(1, |_, _| HermitianEntry { re: LinExpr::var(v), im: None }),
        "H",
    )
    .unwrap();
    let block = prog.block(id);
    assert_eq!(block.kind, ConeKind::Psd { side: 2 });
    assert_eq!(block.violation(&[0.3]), 0.0);
    assert!((block.violation(&[-0.3]) - 0.3).abs() < 1e-12);
}

#[test]
fn two_by_two_membership() {
    let mut prog = ConicProgram::new();
    two_by_two(&mut prog);
    let block = &prog.blocks()[0];
    assert_eq!(block.violation(&[1.0, 1.0, 0.0, 0.0]), 0.0);
    assert!(block.violation(&[1.0, 1.0, 1.1, 0.0]) > 0.09);
    assert!(block.violation(&[1.0, 1.0, 0.6, 0.8]) < 1e-12);
    assert!(block.violation(&[1.0, 1.0, 0.6, 0.81]) > 0.0);
}

#[test]
fn hermitian_blocks_reject_bad_placements() {
    let mut prog = ConicProgram::new();
    let v = prog.add_var("v").unwrap();
    let diag_im = HermitianBlockMap::from_fn(1, |_, _| HermitianEntry {
        re: LinExpr::var(v),
        im: Some(LinExpr::zero()),
    });
    assert!(matches!(
        add_hermitian_psd(&mut prog, diag_im, "bad"),
        Err(ModelError::InconsistentPlacement { .. })
    ));
    let repeated = HermitianBlockMap::from_fn(2, |_, _| HermitianEntry { re: LinExpr::var(v), im: None });
    assert!(add_hermitian_psd(&mut prog, repeated, "bad").is_err());
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> (Mat<f64>, Mat<f64>) {
    let mut re = Mat::zeros(n, n);
    let mut im = Mat::zeros(n, n);
    for i in 0..n {
        re[(i, i)] = rng.gen_range(-1.0..2.0);
        for j in 0..i {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            re[(i, j)] = z.re;
            re[(j, i)] = z.re;
            im[(i, j)] = z.im;
            im[(j, i)] = -z.im;
        }
    }
    (re, im)
}

/// Smallest eigenvalue of the complex matrix by power iteration, independent of
/// the real embedding.
fn min_eig_complex(re: &Mat<f64>, im: &Mat<f64>) -> f64 {
    let n = re.nrows();
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| (0..n).map(|j| Complex64::new(re[(i, j)], im[(i, j)]) * x[j]).sum())
            .collect()
    };
    let shift: f64 = (0..n)
        .map(|i| (0..n).map(|j| Complex64::new(re[(i, j)], im[(i, j)]).norm()).sum::<f64>())
        .fold(0.0, f64::max);
    // Power iteration on shift·I − H converges to shift − λ_min.
    let mut x: Vec<Complex64> = (0..n).map(|k| Complex64::new(1.0 + k as f64, 0.5)).collect();
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let hx = apply(&x);
        let y: Vec<Complex64> = x.iter().zip(&hx).map(|(a, b)| a * shift - b).collect();
        let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x = y.iter().map(|z| z / norm).collect();
        let hx = apply(&x);
        lambda = x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum();
    }
    lambda
}

#[test]
fn real_embedding_preserves_psd_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let n = rng.gen_range(1..=4);
        let (re, im) = random_hermitian(&mut rng, n);
        let embedded = symmetric_eigenvalues(&real_embedding(&re, &im))[0];
        let direct = hermitian_eigenvalues(&re, &im)[0];
        assert!((embedded - direct).abs() < 1e-10);
        let oracle = min_eig_complex(&re, &im);
        if oracle.abs() > 1e-6 {
            assert_eq!(embedded > 0.0, oracle > 0.0, "embedded {embedded}, oracle {oracle}");
        }
    }
}

#[test]
fn embedding_eigenvalues_come_in_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (re, im) = random_hermitian(&mut rng, 3);
    let e = symmetric_eigenvalues(&real_embedding(&re, &im));
    for pair in e.chunks(2) {
        assert!((pair[0] - pair[1]).abs() < 1e-10);
    }
}

#[test]
fn linear_cost_adds_no_cone() {
    let mut prog = ConicProgram::new();
    let p = prog.add_var("p").unwrap();
    assert_eq!(add_quadratic_cost_epigraph(&mut prog, p, 0.0, 1.0, 0.0, "s").unwrap(), None);
    assert!(prog.blocks().is_empty());
    assert_eq!(prog.evaluate_objective(&[2.5]), 2.5);
    assert!(matches!(
        add_quadratic_cost_epigraph(&mut prog, p, -1.0, 0.0, 0.0, "s"),
        Err(ModelError::NonConvexCost(_))
    ));
}

#[test]
fn quadratic_epigraph_is_tight_at_the_optimum() {
    let mut prog = ConicProgram::new();
    let p = prog.add_var("p").unwrap();
    let s = add_quadratic_cost_epigraph(&mut prog, p, 1.0, 0.0, 0.0, "s").unwrap().unwrap();
    let block = &prog.blocks()[0];
    assert_eq!(block.violation(&[2.0, 4.0]), 0.0);
    assert!(block.violation(&[2.0, 3.9]) > 0.0);
    prog.add_equality(LinExpr::var(p) - 2.0, "fix p").unwrap();
    let sol = solve(&prog, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.x[s] - 4.0).abs() < 1e-6, "{}", sol.x[s]);
    assert!((sol.objective - 4.0).abs() < 1e-6);
}

#[test]
fn case9_costs_match_direct_evaluation() {
    let net = bundled::load("case9").unwrap();
    let raw = parse_case(bundled::CASE9).unwrap();
    let spec = apply_objective(&net, ObjectiveMode::Cost);
    let mut prog = ConicProgram::new();
    let mut x = Vec::new();
    let pg = [0.897, 1.343, 0.941];
    let mut direct = 0.0;
    for (g, k) in spec.costs.iter().enumerate() {
        let p = prog.add_var(format!("p{g}")).unwrap();
        x.push(pg[g]);
        if let Some(s) = add_quadratic_cost_epigraph(&mut prog, p, k.c2, k.c1, k.c0, &format!("s{g}")).unwrap() {
            assert_eq!(s, x.len());
            x.push(k.c2 * pg[g] * pg[g]);
        }
        // The file's coefficients are in $/MW²h, $/MWh and $/h.
        let c = &raw.gencost[g].coefficients;
        let mw = pg[g] * net.base_mva;
        direct += c[0] * mw * mw + c[1] * mw + c[2];
    }
    assert!(prog.max_violation(&x).max() < 1e-12);
    assert!((prog.evaluate_objective(&x) - direct).abs() < 1e-9 * direct);
}

#[test]
fn apparent_power_limit() {
    let mut prog = ConicProgram::new();
    let v = vars(&mut prog, &["p", "q"]);
    assert_eq!(add_apparent_power_limit(&mut prog, v[0], v[1], f64::INFINITY, "inf").unwrap(), None);
    assert!(prog.blocks().is_empty());
    let five = add_apparent_power_limit(&mut prog, v[0], v[1], 5.0, "five").unwrap().unwrap();
    assert_eq!(prog.block(five).violation(&[3.0, 4.0]), 0.0);
    let less = add_apparent_power_limit(&mut prog, v[0], v[1], 4.9, "less").unwrap().unwrap();
    assert!(prog.block(less).violation(&[3.0, 4.0]) > 0.09);
    assert!(add_apparent_power_limit(&mut prog, v[0], v[1], 0.0, "zero").is_err());
}

#[test]
fn rotated_pair_membership() {
    let mut prog = ConicProgram::new();
    let v = vars(&mut prog, &["vkk", "vmm", "re", "im"]);
    let id = add_rotated_2x2(&mut prog, v[0], v[1], v[2], v[3], "pair").unwrap();
    let block = prog.block(id);
    assert!(block.violation(&[1.0, 1.0, 1.0, 0.0]) < 1e-15);
    assert!(block.violation(&[1.0, 1.0, 1.01, 0.0]) > 0.0);
    assert_eq!(block.violation(&[0.0, 1.0, 0.0, 0.0]), 0.0);
}

#[test]
fn pair_encodings_agree_with_the_hermitian_test() {
    let mut prog = ConicProgram::new();
    let v = vars(&mut prog, &["vkk", "vmm", "re", "im"]);
    let rot = add_rotated_2x2(&mut prog, v[0], v[1], v[2], v[3], "rot").unwrap();
    let three = add_socr_3x3(&mut prog, v[0], v[1], v[2], v[3], "3x3").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut inside = 0;
    for _ in 0..1000 {
        let x = [
            rng.gen_range(-0.2..1.5),
            rng.gen_range(-0.2..1.5),
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-1.2..1.2),
        ];
        let (re, im) = (
            Mat::from_fn(2, 2, |i, j| [[x[0], x[2]], [x[2], x[1]]][i][j]),
            Mat::from_fn(2, 2, |i, j| [[0.0, x[3]], [-x[3], 0.0]][i][j]),
        );
        let lmin = hermitian_eigenvalues(&re, &im)[0];
        if lmin.abs() < 1e-9 {
            continue;
        }
        let psd = lmin > 0.0;
        inside += psd as usize;
        assert_eq!(prog.block(rot).violation(&x) == 0.0, psd, "{x:?}");
        assert_eq!(prog.block(three).violation(&x) < 1e-12, psd, "{x:?}");
    }
    assert!(inside > 100 && inside < 900, "{inside} inside");
}

#[test]
fn orphans_are_reported() {
    let mut prog = ConicProgram::new();
    let v = vars(&mut prog, &["a", "b", "c"]);
    prog.add_equality(LinExpr::var(v[0]) - 1.0, "a").unwrap();
    prog.add_objective(&LinExpr::var(v[2])).unwrap();
    assert_eq!(prog.orphans(), vec![v[1]]);
}

#[test]
fn program_rejects_unknown_and_duplicate_variables() {
    let mut prog = ConicProgram::new();
    prog.add_var("x").unwrap();
    assert!(matches!(prog.add_var("x"), Err(ModelError::DuplicateName(_))));
    assert!(matches!(
        prog.add_equality(LinExpr::var(3), "bad"),
        Err(ModelError::UnknownVariable(3))
    ));
    assert!(matches!(
        prog.add_equality(LinExpr::constant(f64::NAN), "nan"),
        Err(ModelError::NonFinite(_))
    ));
    assert_eq!(prog.find("x"), Some(0));
    assert!(prog.to_text().contains("var 0 x"));
}

#[test]
fn linear_expressions_combine() {
    let e = (LinExpr::var(0) * 2.0 + LinExpr::term(1, 3.0) - LinExpr::var(0) + 1.5).simplified();
    assert_eq!(e.eval(&[10.0, 1.0]), 10.0 + 3.0 + 1.5);
    assert_eq!(e.terms.len(), 2);
    assert_eq!((LinExpr::var(4) * 0.5).single(), Some((4, 0.5)));
    assert_eq!((LinExpr::var(4) + 1.0).single(), Some((4, 1.0)));
    assert_eq!((LinExpr::var(4) + LinExpr::var(5)).single(), None);
}
