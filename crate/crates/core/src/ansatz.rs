//! Mapping bent diagrams onto parameterised circuits.
//!
//! An ansatz is the triple `(q_s, p_n, d)` with one qubit per noun wire:
//!
//! * nouns are effects `⟨0|Rx(θ)` (`p_n = 1`) or `⟨0|Rx(θ₁)Rz(θ₂)Rx(θ₃)` (`p_n = 3`);
//! * adjectives and verbs on `m` qubits are `d` IQP layers, each a Hadamard on
//!   every qubit followed by a chain of `m − 1` controlled-Rz gates;
//! * relative pronouns are a parameter-free GHZ state;
//! * a cup is a Bell effect: `CNOT(a, b)`, `H(a)`, then both qubits
//!   post-selected on 0.
//!
//! Gate conventions are `Rx(θ) = exp(−iθX/2)`, `Rz(θ) = exp(−iθZ/2)` and
//! `CRz` applies `Rz(θ)` to the target when the control reads 1.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{Diagram, Polarity, WordBox};
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, LexiconEntry, WordClass};
use crate::pregroup::{Base, PregroupType};

/// `(q_s, p_n, d)` with `q_n` fixed to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnsatzConfig {
    pub q_n: usize,
    pub q_s: usize,
    pub p_n: usize,
    pub d: usize,
}

impl AnsatzConfig {
    pub fn new(q_s: usize, p_n: usize, d: usize) -> Result<Self> {
        if q_s > 1 {
            return Err(Error::InvalidConfig(format!("q_s must be 0 or 1, got {q_s}")));
        }
        if p_n != 1 && p_n != 3 {
            return Err(Error::InvalidConfig(format!("p_n must be 1 or 3, got {p_n}")));
        }
        if d == 0 {
            return Err(Error::InvalidConfig("d must be at least 1".into()));
        }
        Ok(Self { q_n: 1, q_s, p_n, d })
    }

    pub fn qubits_per_wire(&self, base: Base) -> usize {
        match base {
            Base::N => self.q_n,
            Base::S => self.q_s,
        }
    }

    pub fn triple(&self) -> (usize, usize, usize) {
        (self.q_s, self.p_n, self.d)
    }
}

impl fmt::Display for AnsatzConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.q_s, self.p_n, self.d)
    }
}

impl FromStr for AnsatzConfig {
    type Err = Error;

    /// `"q_s,p_n,d"`, optionally parenthesised.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(',')
            .map(str::trim)
            .collect();
        let nums: Option<Vec<usize>> = parts.iter().map(|p| p.parse().ok()).collect();
        match nums.as_deref() {
            Some(&[q_s, p_n, d]) => AnsatzConfig::new(q_s, p_n, d),
            _ => Err(Error::InvalidConfig(format!("expected `q_s,p_n,d`, got `{s}`"))),
        }
    }
}

/// Qubits the word's state occupies: the sum over its wires.
pub fn word_qubit_count(entry: &LexiconEntry, cfg: &AnsatzConfig) -> usize {
    type_qubits(&entry.ptype, cfg)
}

pub fn type_qubits(t: &PregroupType, cfg: &AnsatzConfig) -> usize {
    t.simples().iter().map(|s| cfg.qubits_per_wire(s.base)).sum()
}

/// Parameters owned by one word of the given class.
pub fn word_param_count(entry: &LexiconEntry, cfg: &AnsatzConfig) -> usize {
    match entry.class {
        WordClass::Noun => cfg.p_n,
        WordClass::Adjective | WordClass::TransitiveVerb => {
            cfg.d * word_qubit_count(entry, cfg).saturating_sub(1)
        }
        WordClass::RelPronSubj | WordClass::RelPronObj => 0,
    }
}

/// Index into the global parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamRef(pub usize);

/// The parameter vector together with each word's slice of it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamRegistry {
    pub theta: Vec<f64>,
    slices: Vec<(String, WordClass, Range<usize>)>,
    index: HashMap<String, usize>,
}

impl ParamRegistry {
    /// Lay out contiguous slices in lexicon order. Angles start at zero.
    pub fn layout(lexicon: &Lexicon, cfg: &AnsatzConfig) -> Result<Self> {
        let mut slices: Vec<(String, WordClass, Range<usize>)> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut next = 0;
        for entry in lexicon.entries() {
            let len = word_param_count(entry, cfg);
            if let Some(&i) = index.get(&entry.word) {
                let existing = &slices[i].2;
                if existing.len() != len {
                    return Err(Error::InvalidConfig(format!(
                        "word `{}` has classes with different parameter counts",
                        entry.word
                    )));
                }
                continue;
            }
            index.insert(entry.word.clone(), slices.len());
            slices.push((entry.word.clone(), entry.class, next..next + len));
            next += len;
        }
        Ok(Self {
            theta: vec![0.0; next],
            slices,
            index,
        })
    }

    /// Layout plus uniform angles from [`init_params`].
    pub fn random(lexicon: &Lexicon, cfg: &AnsatzConfig, seed: u64) -> Result<Self> {
        let mut reg = Self::layout(lexicon, cfg)?;
        reg.theta = init_params(reg.len(), seed);
        Ok(reg)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn slice(&self, word: &str) -> Option<Range<usize>> {
        self.index.get(word).map(|&i| self.slices[i].2.clone())
    }

    /// `(word, class, range)` in layout order.
    pub fn slices(&self) -> impl Iterator<Item = (&str, WordClass, Range<usize>)> {
        self.slices.iter().map(|(w, c, r)| (w.as_str(), *c, r.clone()))
    }

    fn refs(&self, word: &str) -> Result<Vec<ParamRef>> {
        self.slice(word)
            .map(|r| r.map(ParamRef).collect())
            .ok_or_else(|| Error::UnknownWord(word.to_owned()))
    }
}

/// `k` for the whole vocabulary.
pub fn param_count(lexicon: &Lexicon, cfg: &AnsatzConfig) -> Result<usize> {
    ParamRegistry::layout(lexicon, cfg).map(|r| r.len())
}

/// `k` i.i.d. uniform angles in `[0, 2π]`.
pub fn init_params(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| rng.random_range(0.0..=TAU)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<A> {
    H(usize),
    Rx(usize, A),
    Rz(usize, A),
    CRz { control: usize, target: usize, angle: A },
    Cnot { control: usize, target: usize },
}

impl<A: Copy> Gate<A> {
    pub fn map<B>(&self, mut f: impl FnMut(A) -> B) -> Gate<B> {
        match *self {
            Gate::H(q) => Gate::H(q),
            Gate::Rx(q, a) => Gate::Rx(q, f(a)),
            Gate::Rz(q, a) => Gate::Rz(q, f(a)),
            Gate::CRz {
                control,
                target,
                angle,
            } => Gate::CRz {
                control,
                target,
                angle: f(angle),
            },
            Gate::Cnot { control, target } => Gate::Cnot { control, target },
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::CRz { control, target, .. } | Gate::Cnot { control, target } => {
                vec![control, target]
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::Rx(..) => "Rx",
            Gate::Rz(..) => "Rz",
            Gate::CRz { .. } => "CRz",
            Gate::Cnot { .. } => "CNOT",
        }
    }
}

/// Gate list plus post-selection bookkeeping. Every post-selected qubit must
/// read 0; the remaining qubits carry the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<A> {
    pub num_qubits: usize,
    pub gates: Vec<Gate<A>>,
    /// Ascending.
    pub postselect: Vec<usize>,
    pub output_qubits: Vec<usize>,
}

pub type ParamCircuit = Circuit<ParamRef>;
pub type BoundCircuit = Circuit<f64>;

impl ParamCircuit {
    pub fn bind(&self, theta: &[f64]) -> BoundCircuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().map(|g| g.map(|r| theta[r.0])).collect(),
            postselect: self.postselect.clone(),
            output_qubits: self.output_qubits.clone(),
        }
    }

    pub fn param_refs(&self) -> Vec<ParamRef> {
        let mut refs = Vec::new();
        for g in &self.gates {
            g.map(|r| refs.push(r));
        }
        refs
    }
}

impl<A> Circuit<A> {
    pub fn gate_counts(&self) -> Vec<(&'static str, usize)>
    where
        A: Copy,
    {
        let mut counts: Vec<(&'static str, usize)> = Vec::new();
        for g in &self.gates {
            match counts.iter_mut().find(|(n, _)| *n == g.name()) {
                Some((_, c)) => *c += 1,
                None => counts.push((g.name(), 1)),
            }
        }
        counts
    }
}

/// Gates preparing a state word on `qubits` (in wire order).
pub fn word_state_circuit(
    entry: &LexiconEntry,
    cfg: &AnsatzConfig,
    registry: &ParamRegistry,
    qubits: &[usize],
) -> Result<Vec<Gate<ParamRef>>> {
    let refs = registry.refs(&entry.word)?;
    let mut gates = Vec::new();
    match entry.class {
        WordClass::Noun => {
            let &[q] = qubits else {
                return Err(Error::UnsupportedDiagram(format!(
                    "noun `{}` on {} qubits",
                    entry.word,
                    qubits.len()
                )));
            };
            // Transpose of the effect: against a Bell effect it contracts to
            // exactly the bent form.
            match *refs.as_slice() {
                [t] => gates.push(Gate::Rx(q, t)),
                [t1, t2, t3] => {
                    gates.push(Gate::Rx(q, t1));
                    gates.push(Gate::Rz(q, t2));
                    gates.push(Gate::Rx(q, t3));
                }
                _ => return Err(bad_slice(entry, refs.len())),
            }
        }
        WordClass::Adjective | WordClass::TransitiveVerb => {
            let m = qubits.len();
            if refs.len() != cfg.d * m.saturating_sub(1) {
                return Err(bad_slice(entry, refs.len()));
            }
            let mut next = refs.iter();
            for _ in 0..cfg.d {
                gates.extend(qubits.iter().map(|&q| Gate::H(q)));
                for pair in qubits.windows(2) {
                    gates.push(Gate::CRz {
                        control: pair[0],
                        target: pair[1],
                        angle: *next.next().unwrap(),
                    });
                }
            }
        }
        WordClass::RelPronSubj | WordClass::RelPronObj => {
            if let Some(&first) = qubits.first() {
                gates.push(Gate::H(first));
            }
            for pair in qubits.windows(2) {
                gates.push(Gate::Cnot {
                    control: pair[0],
                    target: pair[1],
                });
            }
        }
    }
    Ok(gates)
}

/// Gates that, followed by post-selecting `qubit` on 0, realise the noun
/// effect `⟨0|Rx(θ)` or `⟨0|Rx(θ₁)Rz(θ₂)Rx(θ₃)`.
pub fn noun_effect_circuit(
    entry: &LexiconEntry,
    registry: &ParamRegistry,
    qubit: usize,
) -> Result<Vec<Gate<ParamRef>>> {
    if entry.class != WordClass::Noun {
        return Err(Error::UnsupportedDiagram(format!(
            "{} effect `{}`",
            entry.class, entry.word
        )));
    }
    let refs = registry.refs(&entry.word)?;
    match *refs.as_slice() {
        [t] => Ok(vec![Gate::Rx(qubit, t)]),
        [t1, t2, t3] => Ok(vec![
            Gate::Rx(qubit, t3),
            Gate::Rz(qubit, t2),
            Gate::Rx(qubit, t1),
        ]),
        _ => Err(bad_slice(entry, refs.len())),
    }
}

fn bad_slice(entry: &LexiconEntry, len: usize) -> Error {
    Error::UnsupportedDiagram(format!(
        "{} `{}` with {len} parameters",
        entry.class, entry.word
    ))
}

/// Compile a (bent or unbent) diagram.
///
/// Qubits are allocated left to right over state boxes, wire by wire. Order
/// of emission: word states, noun effects, Bell effects.
pub fn compile(d: &Diagram, cfg: &AnsatzConfig, registry: &ParamRegistry) -> Result<ParamCircuit> {
    let mut wire_qubits: Vec<Vec<usize>> = vec![Vec::new(); d.wire_types.len()];
    let mut next = 0;
    for b in d.boxes.iter().filter(|b| b.polarity == Polarity::State) {
        for &w in &b.wires {
            let q = cfg.qubits_per_wire(d.wire_types[w].base);
            wire_qubits[w] = (next..next + q).collect();
            next += q;
        }
    }
    let num_qubits = next;

    let mut gates = Vec::new();
    let mut postselect = Vec::new();
    for b in d.boxes.iter().filter(|b| b.polarity == Polarity::State) {
        let qubits: Vec<usize> = b.wires.iter().flat_map(|&w| wire_qubits[w].clone()).collect();
        gates.extend(word_state_circuit(&entry_of(b), cfg, registry, &qubits)?);
    }
    for b in d.boxes.iter().filter(|b| b.polarity == Polarity::Effect) {
        let qubits = &wire_qubits[b.wires[0]];
        let &[q] = qubits.as_slice() else {
            return Err(Error::UnsupportedDiagram(format!(
                "effect `{}` on {} qubits",
                b.word,
                qubits.len()
            )));
        };
        gates.extend(noun_effect_circuit(&entry_of(b), registry, q)?);
        postselect.push(q);
    }
    for &(i, j) in &d.cups {
        let (left, right) = (&wire_qubits[i], &wire_qubits[j]);
        if left.len() != right.len() {
            return Err(Error::UnsupportedDiagram(format!("cup {i}-{j} joins unequal wires")));
        }
        // Nested pairing: the outermost qubits meet.
        for (&a, &b) in left.iter().zip(right.iter().rev()) {
            gates.push(Gate::Cnot { control: a, target: b });
            gates.push(Gate::H(a));
            postselect.push(a);
            postselect.push(b);
        }
    }
    postselect.sort_unstable();
    let output_qubits = d.outputs.iter().flat_map(|&w| wire_qubits[w].clone()).collect();
    Ok(Circuit {
        num_qubits,
        gates,
        postselect,
        output_qubits,
    })
}

fn entry_of(b: &WordBox) -> LexiconEntry {
    LexiconEntry {
        word: b.word.clone(),
        class: b.class,
        ptype: b.class.ptype(),
    }
}

/// Trained (or initial) parameters with the run that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub task: String,
    pub cfg: AnsatzConfig,
    pub seed: u64,
    pub registry: ParamRegistry,
}

impl Checkpoint {
    /// Header line, then `word<TAB>class<TAB>angles` per word.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# checkpoint task={} q_s={} p_n={} d={} k={} seed={}\n",
            self.task,
            self.cfg.q_s,
            self.cfg.p_n,
            self.cfg.d,
            self.registry.len(),
            self.seed
        );
        for (word, class, range) in self.registry.slices() {
            let class = if class.is_pronoun() { "relpron" } else { class.name() };
            let angles: Vec<String> = self.registry.theta[range].iter().map(f64::to_string).collect();
            out.push_str(&format!("{word}\t{class}\t{}\n", angles.join(",")));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    /// The vocabulary this checkpoint covers.
    pub fn lexicon(&self) -> Lexicon {
        let mut lex = Lexicon::new();
        for (word, class, _) in self.registry.slices() {
            if class.is_pronoun() {
                lex.push(word, WordClass::RelPronSubj);
                lex.push(word, WordClass::RelPronObj);
            } else {
                lex.push(word, class);
            }
        }
        lex
    }
}

impl FromStr for Checkpoint {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let err = |line: usize, msg: String| Error::Parse { line, msg };
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty checkpoint".into()))?;
        let fields: HashMap<&str, &str> = header
            .trim_start_matches('#')
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .collect();
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| err(1, format!("checkpoint header lacks `{key}`")))
        };
        let num = |key: &str| -> Result<u64> {
            get(key)?
                .parse()
                .map_err(|_| err(1, format!("bad `{key}` in checkpoint header")))
        };
        let cfg = AnsatzConfig::new(num("q_s")? as usize, num("p_n")? as usize, num("d")? as usize)?;
        let k = num("k")? as usize;
        let seed = num("seed")?;
        let task = get("task")?.to_owned();

        let mut lex = Lexicon::new();
        let mut theta = Vec::with_capacity(k);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [word, class, angles] = cols[..] else {
                return Err(err(i + 1, format!("expected 3 columns, got `{line}`")));
            };
            let row: Lexicon = format!("{word}\t{class}\n")
                .parse()
                .map_err(|_| err(i + 1, format!("unknown word class `{class}`")))?;
            for e in row.entries() {
                lex.push(&e.word, e.class);
            }
            for a in angles.split(',').filter(|a| !a.is_empty()) {
                theta.push(
                    a.parse::<f64>()
                        .map_err(|_| err(i + 1, format!("bad angle `{a}`")))?,
                );
            }
        }
        let mut registry = ParamRegistry::layout(&lex, &cfg)?;
        if registry.len() != k || theta.len() != k {
            return Err(err(
                1,
                format!(
                    "checkpoint declares k={k} but lists {} angles for a layout of {}",
                    theta.len(),
                    registry.len()
                ),
            ));
        }
        registry.theta = theta;
        Ok(Checkpoint {
            task,
            cfg,
            seed,
            registry,
        })
    }
}
