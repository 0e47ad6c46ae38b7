mod common;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opf_relax::case_io::{bundled, Branch, Bus, Generator, Network};
use opf_relax::network_model::{apply_objective, branch_coefficients, incidence, NetworkError, ObjectiveMode};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn branch(r: f64, x: f64, b: f64, tap: Complex64) -> Branch {
    Branch {
        from: 0,
        to: 1,
        series_admittance: c(r, x).inv(),
        charging_b: b,
        tap,
        s_limit: None,
    }
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-14
}

#[test]
fn pure_reactance_unit_tap() {
    let k = branch_coefficients(&branch(0.0, 1.0, 0.0, c(1.0, 0.0))).unwrap();
    assert!(close(k.c_ff, c(0.0, 1.0)));
    assert!(close(k.c_ft, c(0.0, -1.0)));
    assert!(close(k.c_tf, c(0.0, -1.0)));
    assert!(close(k.c_tt, c(0.0, 1.0)));
}

#[test]
fn real_tap_scales_the_from_side() {
    let k = branch_coefficients(&branch(0.0, 1.0, 0.0, c(2.0, 0.0))).unwrap();
    assert!(close(k.c_ff, c(0.0, 0.25)));
    assert!(close(k.c_ft, c(0.0, -0.5)));
    assert!(close(k.c_tt, c(0.0, 1.0)));
}

#[test]
fn charging_enters_the_diagonal_terms() {
    let k = branch_coefficients(&branch(1.0, 0.0, 0.2, c(1.0, 0.0))).unwrap();
    assert!(close(k.c_ff, c(1.0, -0.1)));
    assert!(close(k.c_tt, c(1.0, -0.1)));
}

#[test]
fn degenerate_branches_are_rejected() {
    let mut br = branch(0.0, 1.0, 0.0, c(1.0, 0.0));
    br.series_admittance = c(0.0, 0.0);
    assert_eq!(branch_coefficients(&br), Err(NetworkError::DegenerateBranch));
    let br = branch(0.0, 1.0, 0.0, c(0.0, 0.0));
    assert_eq!(branch_coefficients(&br), Err(NetworkError::ZeroTap));
}

#[test]
fn lifted_flows_agree_with_the_two_port_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let br = branch(
            rng.gen_range(0.0..0.2),
            rng.gen_range(0.01..0.8),
            rng.gen_range(0.0..0.5),
            Complex64::from_polar(rng.gen_range(0.85..1.15), rng.gen_range(-0.5..0.5)),
        );
        let vf = Complex64::from_polar(rng.gen_range(0.8..1.2), rng.gen_range(-0.8..0.8));
        let vt = Complex64::from_polar(rng.gen_range(0.8..1.2), rng.gen_range(-0.8..0.8));
        let k = branch_coefficients(&br).unwrap();
        let (vkk, vkm, vmm) = (vf * vf.conj(), vf * vt.conj(), vt * vt.conj());
        let s_from = k.c_ff * vkk + k.c_ft * vkm;
        let s_to = k.c_tf * vkm.conj() + k.c_tt * vmm;
        let (want_from, want_to) = common::two_port_flows(&br, vf, vt);
        for (got, want) in [(s_from, want_from), (s_to, want_to)] {
            let scale = want.norm().max(k.c_ff.norm() * vkk.norm()).max(1.0);
            worst = worst.max((got - want).norm() / scale);
        }
    }
    assert!(worst <= 1e-12, "worst relative error {worst:e}");
}

fn toy(branches: &[(usize, usize)]) -> Network {
    let n = branches.iter().map(|&(a, b)| a.max(b)).max().unwrap() + 1;
    Network {
        name: "toy".into(),
        base_mva: 100.0,
        buses: (0..n)
            .map(|k| Bus {
                id: k + 1,
                p_demand: 0.1,
                q_demand: 0.0,
                shunt_g: 0.0,
                shunt_b: 0.0,
                v_min: 0.9,
                v_max: 1.1,
            })
            .collect(),
        generators: vec![Generator {
            bus: 0,
            p_min: 0.0,
            p_max: 1.0,
            q_min: -1.0,
            q_max: 1.0,
            c2: 3.0,
            c1: 2.0,
            c0: 1.0,
        }],
        branches: branches
            .iter()
            .map(|&(from, to)| Branch {
                from,
                to,
                ..branch(0.01, 0.1, 0.0, c(1.0, 0.0))
            })
            .collect(),
        reference_bus: 0,
        warnings: Vec::new(),
    }
}

#[test]
fn incidence_of_a_single_branch() {
    let maps = incidence(&toy(&[(0, 1)]));
    assert_eq!(maps.from_branches, vec![vec![0], vec![]]);
    assert_eq!(maps.to_branches, vec![vec![], vec![0]]);
    assert_eq!(maps.generators, vec![vec![0], vec![]]);
}

#[test]
fn parallel_branches_share_the_from_set() {
    let maps = incidence(&toy(&[(0, 1), (0, 1)]));
    assert_eq!(maps.from_branches[0], vec![0, 1]);
    assert_eq!(maps.to_branches[1], vec![0, 1]);
}

#[test]
fn case9_generator_buses() {
    let net = bundled::load("case9").unwrap();
    let maps = incidence(&net);
    let with_gen: Vec<usize> = (0..9)
        .filter(|&k| !maps.generators[k].is_empty())
        .map(|k| net.buses[k].id)
        .collect();
    assert_eq!(with_gen, vec![1, 2, 3]);
}

#[test]
fn loss_mode_uses_unit_linear_costs() {
    let net = bundled::load("case5").unwrap();
    let spec = apply_objective(&net, ObjectiveMode::Loss);
    assert_eq!(spec.costs.len(), net.generators.len());
    for k in &spec.costs {
        assert_eq!((k.c2, k.c1, k.c0), (0.0, 1.0, 0.0));
    }
    assert_eq!(spec.report_scale, net.base_mva);
}

#[test]
fn cost_mode_keeps_per_unit_coefficients() {
    let net = bundled::load("case9").unwrap();
    let spec = apply_objective(&net, ObjectiveMode::Cost);
    assert_eq!(spec.report_scale, 1.0);
    let k = spec.costs[1];
    assert!((k.c2 - 0.085 * 1e4).abs() < 1e-9);
    assert!((k.c1 - 120.0).abs() < 1e-12);
    assert_eq!(k.c0, 600.0);
}

#[test]
fn loss_objective_is_total_generation() {
    let net = toy(&[(0, 1)]);
    let spec = apply_objective(&net, ObjectiveMode::Loss);
    let pg = [0.37];
    let value: f64 = spec
        .costs
        .iter()
        .zip(pg)
        .map(|(k, p)| k.c2 * p * p + k.c1 * p + k.c0)
        .sum();
    assert!((value * spec.report_scale - 37.0).abs() < 1e-12);
}

#[test]
fn objective_modes_parse() {
    assert_eq!("cost".parse::<ObjectiveMode>().unwrap(), ObjectiveMode::Cost);
    assert_eq!("LOSS".parse::<ObjectiveMode>().unwrap(), ObjectiveMode::Loss);
    assert!("money".parse::<ObjectiveMode>().is_err());
    assert_eq!(ObjectiveMode::Loss.unit(), "MW");
}
