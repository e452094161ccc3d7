//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use num_complex::Complex64;
use qnlp::pregroup::{Cup, SimpleType};
use qnlp::{BoundCircuit, Circuit, Gate};
use rand::Rng;

type Dense = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bit(i: usize, q: usize) -> usize {
    (i >> q) & 1
}

/// Full `2^n × 2^n` matrix of one gate, written out entry by entry.
fn gate_matrix(g: &Gate<f64>, n: usize) -> Dense {
    let dim = 1 << n;
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    let single = |q: usize, u: [[Complex64; 2]; 2], m: &mut Dense| {
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                if i & !(1 << q) == j & !(1 << q) {
                    *e = u[bit(i, q)][bit(j, q)];
                }
            }
        }
    };
    match *g {
        Gate::H(q) => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            single(q, [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]], &mut m);
        }
        Gate::Rx(q, t) => {
            let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
            single(q, [[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]], &mut m);
        }
        Gate::Rz(q, t) => {
            let p = c(0.0, t / 2.0).exp();
            single(q, [[p.conj(), c(0.0, 0.0)], [c(0.0, 0.0), p]], &mut m);
        }
        Gate::CRz { control, target, angle } => {
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = if bit(i, control) == 0 {
                    c(1.0, 0.0)
                } else if bit(i, target) == 0 {
                    c(0.0, -angle / 2.0).exp()
                } else {
                    c(0.0, angle / 2.0).exp()
                };
            }
        }
        Gate::Cnot { control, target } => {
            for (i, row) in m.iter_mut().enumerate() {
                let j = if bit(i, control) == 1 { i ^ (1 << target) } else { i };
                row[j] = c(1.0, 0.0);
            }
        }
    }
    m
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn dense_unitary(circuit: &BoundCircuit) -> Dense {
    let dim = 1 << circuit.num_qubits;
    let mut u: Dense = (0..dim)
        .map(|i| (0..dim).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    for g in &circuit.gates {
        u = matmul(&gate_matrix(g, circuit.num_qubits), &u);
    }
    u
}

/// Final state: first column of the circuit unitary.
pub fn oracle_state(circuit: &BoundCircuit) -> Vec<Complex64> {
    dense_unitary(circuit).iter().map(|row| row[0]).collect()
}

/// `⟨0…0|_post ⟨b|_out U |0…0⟩` for `b = 0, 1` on a single-output circuit.
pub fn oracle_output(circuit: &BoundCircuit) -> [Complex64; 2] {
    let state = oracle_state(circuit);
    let out = circuit.output_qubits[0];
    let mut amps = [c(0.0, 0.0); 2];
    for (i, a) in state.iter().enumerate() {
        if circuit.postselect.iter().all(|&q| bit(i, q) == 0) {
            amps[bit(i, out)] += a;
        }
    }
    amps
}

/// Random circuit on at most `max_qubits` qubits with one output qubit and
/// a random post-selected subset of the rest.
pub fn random_circuit(rng: &mut impl Rng, max_qubits: usize) -> BoundCircuit {
    let n = rng.random_range(1..=max_qubits);
    let mut gates = Vec::new();
    for _ in 0..rng.random_range(1..=30) {
        let q = rng.random_range(0..n);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let kind = if n > 1 { rng.random_range(0..5) } else { rng.random_range(0..3) };
        let other = if n > 1 { (q + rng.random_range(1..n)) % n } else { q };
        gates.push(match kind {
            0 => Gate::H(q),
            1 => Gate::Rx(q, angle),
            2 => Gate::Rz(q, angle),
            3 => Gate::CRz { control: q, target: other, angle },
            _ => Gate::Cnot { control: q, target: other },
        });
    }
    let output = rng.random_range(0..n);
    let postselect = (0..n).filter(|&q| q != output && rng.random_bool(0.5)).collect();
    Circuit {
        num_qubits: n,
        gates,
        postselect,
        output_qubits: vec![output],
    }
}

/// Every planar reduction of `flat` to `target` by exhaustive enumeration of
/// partial matchings. Returned as sorted cup lists, sorted.
pub fn brute_force_reductions(flat: &[SimpleType], target: &[SimpleType]) -> Vec<Vec<Cup>> {
    fn go(flat: &[SimpleType], partner: &mut Vec<Option<usize>>, seen: &mut Vec<bool>, i: usize, out: &mut Vec<Vec<Cup>>) {
        if i == flat.len() {
            let cups: Vec<Cup> = (0..flat.len()).filter_map(|a| partner[a].filter(|&b| b > a).map(|b| (a, b))).collect();
            out.push(cups);
            return;
        }
        if seen[i] {
            return go(flat, partner, seen, i + 1, out);
        }
        // Leave i unmatched.
        seen[i] = true;
        go(flat, partner, seen, i + 1, out);
        for j in i + 1..flat.len() {
            if !seen[j] {
                seen[j] = true;
                partner[i] = Some(j);
                partner[j] = Some(i);
                go(flat, partner, seen, i + 1, out);
                partner[i] = None;
                partner[j] = None;
                seen[j] = false;
            }
        }
        seen[i] = false;
    }
    let mut all = Vec::new();
    go(flat, &mut vec![None; flat.len()], &mut vec![false; flat.len()], 0, &mut all);

    let mut ok: Vec<Vec<Cup>> = all
        .into_iter()
        .filter(|cups| {
            let cancels = cups.iter().all(|&(a, b)| flat[a].base == flat[b].base && flat[b].z == flat[a].z + 1);
            let crossing = cups.iter().any(|&(a, b)| cups.iter().any(|&(x, y)| a < x && x < b && b < y));
            let used: Vec<usize> = cups.iter().flat_map(|&(a, b)| [a, b]).collect();
            let residual: Vec<usize> = (0..flat.len()).filter(|p| !used.contains(p)).collect();
            let enclosed = residual.iter().any(|&r| cups.iter().any(|&(a, b)| a < r && r < b));
            let types: Vec<SimpleType> = residual.iter().map(|&r| flat[r]).collect();
            cancels && !crossing && !enclosed && types == target
        })
        .collect();
    ok.sort();
    ok
}
