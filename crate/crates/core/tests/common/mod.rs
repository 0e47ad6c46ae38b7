//! Small hand-built networks and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use opf_relax::case_io::{Branch, Bus, Generator, Network};
use opf_relax::chordal::SparsityGraph;

pub fn bus(id: usize, pd: f64, qd: f64) -> Bus {
    Bus {
        id,
        p_demand: pd,
        q_demand: qd,
        shunt_g: 0.0,
        shunt_b: 0.0,
        v_min: 0.94,
        v_max: 1.06,
    }
}

pub fn generator(bus: usize, p_max: f64, c2: f64, c1: f64) -> Generator {
    Generator {
        bus,
        p_min: 0.0,
        p_max,
        q_min: -1.0,
        q_max: 1.0,
        c2,
        c1,
        c0: 0.0,
    }
}

pub fn line(from: usize, to: usize, r: f64, x: f64, b: f64) -> Branch {
    Branch {
        from,
        to,
        series_admittance: Complex64::new(r, x).inv(),
        charging_b: b,
        tap: Complex64::new(1.0, 0.0),
        s_limit: None,
    }
}

pub fn network(name: &str, buses: Vec<Bus>, generators: Vec<Generator>, branches: Vec<Branch>) -> Network {
    let net = Network {
        name: name.into(),
        base_mva: 100.0,
        buses,
        generators,
        branches,
        reference_bus: 0,
        warnings: Vec::new(),
    };
    net.check().expect("valid toy network");
    net
}

/// Reference bus feeding a load over one line.
pub fn two_bus() -> Network {
    network(
        "two_bus",
        vec![bus(1, 0.0, 0.0), bus(2, 0.9, 0.3)],
        vec![generator(0, 3.0, 120.0, 1500.0)],
        vec![line(0, 1, 0.04, 0.2, 0.05)],
    )
}

/// A tree: 1-2, 2-3, 2-4, with a tap-changing transformer and a binding line limit.
pub fn radial() -> Network {
    let mut branches = vec![
        line(0, 1, 0.02, 0.08, 0.03),
        line(1, 2, 0.03, 0.12, 0.02),
        line(1, 3, 0.01, 0.15, 0.0),
    ];
    branches[2].tap = Complex64::from_polar(0.98, 0.03);
    branches[1].s_limit = Some(0.35);
    network(
        "radial",
        vec![bus(1, 0.0, 0.0), bus(2, 0.6, 0.2), bus(3, 0.5, 0.1), bus(4, 0.4, 0.15)],
        vec![generator(0, 2.0, 900.0, 2000.0), generator(2, 0.4, 400.0, 1000.0)],
        branches,
    )
}

/// Meshed, but removing the reference bus leaves the path 2-3-4-5.
pub fn acyclic_slack() -> Network {
    let mut branches = vec![
        line(0, 1, 0.02, 0.1, 0.02),
        line(0, 2, 0.03, 0.12, 0.02),
        line(0, 3, 0.04, 0.2, 0.03),
        line(0, 4, 0.02, 0.08, 0.01),
        line(1, 2, 0.05, 0.25, 0.0),
        line(2, 3, 0.01, 0.06, 0.02),
        line(3, 4, 0.03, 0.1, 0.0),
    ];
    branches[3].s_limit = Some(0.5);
    branches[5].s_limit = Some(0.4);
    network(
        "acyclic_slack",
        vec![
            bus(1, 0.0, 0.0),
            bus(2, 0.7, 0.2),
            bus(3, 0.4, 0.25),
            bus(4, 0.2, 0.0),
            bus(5, 0.6, 0.3),
        ],
        vec![generator(0, 3.0, 1100.0, 1800.0), generator(3, 0.8, 200.0, 900.0)],
        branches,
    )
}

/// Flows from the two-port admittance matrix, written in the nonlifted form.
pub fn two_port_flows(br: &Branch, vf: Complex64, vt: Complex64) -> (Complex64, Complex64) {
    let ys = br.series_admittance;
    let t = br.tap;
    let sh = Complex64::new(0.0, br.charging_b / 2.0);
    let yff = (ys + sh) / (t * t.conj());
    let yft = -ys / t.conj();
    let ytf = -ys / t;
    let ytt = ys + sh;
    let i_f = yff * vf + yft * vt;
    let i_t = ytf * vf + ytt * vt;
    (vf * i_f.conj(), vt * i_t.conj())
}

/// Every maximal clique, by checking all vertex subsets.
pub fn brute_force_cliques(g: &SparsityGraph) -> BTreeSet<Vec<usize>> {
    let n = g.num_vertices();
    let is_clique = |mask: u32| {
        (0..n).all(|a| (a + 1..n).all(|b| mask & (1 << a) == 0 || mask & (1 << b) == 0 || g.has_edge(a, b)))
    };
    let cliques: Vec<u32> = (1u32..1 << n).filter(|&m| is_clique(m)).collect();
    cliques
        .iter()
        .filter(|&&m| !cliques.iter().any(|&o| o != m && o & m == m))
        .map(|&m| (0..n).filter(|&v| m & (1 << v) != 0).collect())
        .collect()
}

pub fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> SparsityGraph {
    let mut g = SparsityGraph::new(n);
    for v in 1..n {
        g.add_edge(v, rng.gen_range(0..v));
    }
    let p = rng.gen_range(0.0..0.6);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(a, b);
            }
        }
    }
    g
}
