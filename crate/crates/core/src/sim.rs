//! Statevector evaluation of bound circuits, exact and shot-sampled.
//!
//! Qubit `q` is bit `q` of a basis-state index. Bitstrings are written with
//! qubit 0 first, so index `0b001` on three qubits prints as `100`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ansatz::{BoundCircuit, Gate};
use crate::error::{Error, Result};

type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn hadamard() -> Matrix2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn rx(theta: f64) -> Matrix2 {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(theta / 2.0).sin());
    [[c, s], [s, c]]
}

pub fn rz(theta: f64) -> Matrix2 {
    [
        [Complex64::from_polar(1.0, -theta / 2.0), ZERO],
        [ZERO, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

fn apply_single(state: &mut [Complex64], q: usize, m: &Matrix2, control: Option<usize>) {
    let bit = 1usize << q;
    let cmask = control.map_or(0, |c| 1usize << c);
    for i0 in 0..state.len() {
        if i0 & bit != 0 || i0 & cmask != cmask {
            continue;
        }
        let i1 = i0 | bit;
        let (a, b) = (state[i0], state[i1]);
        state[i0] = m[0][0] * a + m[0][1] * b;
        state[i1] = m[1][0] * a + m[1][1] * b;
    }
}

fn apply_cnot(state: &mut [Complex64], control: usize, target: usize) {
    let (c, t) = (1usize << control, 1usize << target);
    for i in 0..state.len() {
        if i & c != 0 && i & t == 0 {
            state.swap(i, i | t);
        }
    }
}

pub fn apply_gate(state: &mut [Complex64], gate: &Gate<f64>) {
    match *gate {
        Gate::H(q) => apply_single(state, q, &hadamard(), None),
        Gate::Rx(q, t) => apply_single(state, q, &rx(t), None),
        Gate::Rz(q, t) => apply_single(state, q, &rz(t), None),
        Gate::CRz {
            control,
            target,
            angle,
        } => apply_single(state, target, &rz(angle), Some(control)),
        Gate::Cnot { control, target } => apply_cnot(state, control, target),
    }
}

/// The full final state `U|0…0⟩`, gate by gate.
pub fn statevector(c: &BoundCircuit) -> Vec<Complex64> {
    let mut state = vec![ZERO; 1 << c.num_qubits];
    state[0] = ONE;
    for g in &c.gates {
        apply_gate(&mut state, g);
    }
    state
}

/// Born-rule distribution over all `2^q` outcomes.
pub fn probabilities(c: &BoundCircuit) -> Vec<f64> {
    statevector(c).iter().map(|a| a.norm_sqr()).collect()
}

/// Contract `⟨0|` onto every post-selected qubit and return the remaining
/// (unnormalised) amplitudes, indexed by the output qubits in order.
pub fn project(c: &BoundCircuit) -> Vec<Complex64> {
    let state = statevector(c);
    let post_mask: usize = c.postselect.iter().map(|&q| 1usize << q).sum();
    let mut out = vec![ZERO; 1 << c.output_qubits.len()];
    for (i, amp) in state.iter().enumerate() {
        if i & post_mask != 0 {
            continue;
        }
        let key = c
            .output_qubits
            .iter()
            .enumerate()
            .fold(0, |k, (pos, &q)| k | (((i >> q) & 1) << pos));
        out[key] += amp;
    }
    out
}

/// `⟨0|P(Θ)⟩` and `⟨1|P(Θ)⟩` for a single-output circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputAmplitudes {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl OutputAmplitudes {
    /// `(|a0|², |a1|²)`.
    pub fn raw(&self) -> (f64, f64) {
        (self.a0.norm_sqr(), self.a1.norm_sqr())
    }
}

pub fn exact_output(c: &BoundCircuit) -> Result<OutputAmplitudes> {
    if c.output_qubits.len() != 1 {
        return Err(Error::InvalidConfig(format!(
            "exact_output needs one output qubit, circuit has {}",
            c.output_qubits.len()
        )));
    }
    let v = project(c);
    Ok(OutputAmplitudes { a0: v[0], a1: v[1] })
}

/// Shot counts per full basis outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub num_qubits: usize,
    /// Dense, indexed by basis state.
    pub counts: Vec<u64>,
    pub shots: u64,
}

impl OutcomeCounts {
    pub fn from_bitstrings<'a>(
        num_qubits: usize,
        items: impl IntoIterator<Item = (&'a str, u64)>,
    ) -> Result<Self> {
        let mut counts = vec![0; 1 << num_qubits];
        let mut shots = 0;
        for (bits, n) in items {
            if bits.len() != num_qubits {
                return Err(Error::InvalidConfig(format!(
                    "bitstring `{bits}` is not {num_qubits} long"
                )));
            }
            let mut idx = 0;
            for (q, ch) in bits.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => idx |= 1 << q,
                    _ => return Err(Error::InvalidConfig(format!("bad bitstring `{bits}`"))),
                }
            }
            counts[idx] += n;
            shots += n;
        }
        Ok(Self {
            num_qubits,
            counts,
            shots,
        })
    }

    pub fn bitstring(&self, index: usize) -> String {
        (0..self.num_qubits)
            .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.iter()
            .find(|(b, _)| b == bits)
            .map_or(0, |(_, n)| n)
    }

    /// Non-zero entries in index order.
    pub fn iter(&self) -> impl Iterator<Item = (String, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| (self.bitstring(i), n))
    }

    /// `bitstring<TAB>count` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (b, n) in self.iter() {
            let _ = writeln!(out, "{b}\t{n}");
        }
        out
    }
}

/// Measure every qubit `shots` times. Post-selection effects are not applied
/// here; they become measurements whose outcomes are filtered afterwards.
pub fn sample(c: &BoundCircuit, shots: u64, seed: u64) -> OutcomeCounts {
    let probs = probabilities(c);
    let mut counts = vec![0u64; probs.len()];
    // Weights are a normalised state, so at least one is positive.
    let dist = WeightedIndex::new(&probs).expect("statevector has positive norm");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    OutcomeCounts {
        num_qubits: c.num_qubits,
        counts,
        shots,
    }
}

/// Relative output frequencies among shots where every masked qubit read 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub p0: f64,
    pub p1: f64,
    pub survivors: u64,
}

pub fn postselect_estimate(
    counts: &OutcomeCounts,
    mask: &[usize],
    output_qubit: usize,
) -> Result<Estimate> {
    if mask.contains(&output_qubit) {
        return Err(Error::InvalidConfig(format!(
            "output qubit {output_qubit} is also post-selected"
        )));
    }
    let post_mask: usize = mask.iter().map(|&q| 1usize << q).sum();
    let mut tally = [0u64; 2];
    for (i, &n) in counts.counts.iter().enumerate() {
        if i & post_mask == 0 {
            tally[(i >> output_qubit) & 1] += n;
        }
    }
    let survivors = tally[0] + tally[1];
    if survivors == 0 {
        return Err(Error::EmptyPostselection);
    }
    Ok(Estimate {
        p0: tally[0] as f64 / survivors as f64,
        p1: tally[1] as f64 / survivors as f64,
        survivors,
    })
}

/// Derive an independent RNG seed from a base seed and a position, so that
/// every circuit evaluation owns its own stream regardless of order.
pub fn stream_seed(base: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}
