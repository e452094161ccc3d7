//! String diagrams built from reductions, and the noun-bending rewrite.
//!
//! Wires are numbered left to right over the simple types of the diagram's
//! state boxes. A state box owns a contiguous run of wires; an effect box owns
//! none and sits on exactly one wire of another box.

use std::fmt::{self, Write as _};

use crate::lexicon::{LexiconEntry, Parse, WordClass};
use crate::pregroup::{is_planar, Cup, PregroupType, Reduction, SimpleType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    State,
    Effect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordBox {
    pub word: String,
    pub class: WordClass,
    /// For states, the word's type. For effects, the type of the wire consumed.
    pub ptype: PregroupType,
    pub polarity: Polarity,
    /// Owned wires (state) or the single wire the effect is applied to.
    pub wires: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    pub boxes: Vec<WordBox>,
    /// Type of every wire, by wire index.
    pub wire_types: Vec<SimpleType>,
    pub cups: Vec<Cup>,
    pub outputs: Vec<usize>,
}

/// One state box per word, one cup per reduction pair.
pub fn build_diagram(sentence: &[LexiconEntry], reduction: &Reduction) -> Diagram {
    let mut boxes = Vec::with_capacity(sentence.len());
    let mut wire_types = Vec::new();
    for entry in sentence {
        let start = wire_types.len();
        wire_types.extend_from_slice(entry.ptype.simples());
        boxes.push(WordBox {
            word: entry.word.clone(),
            class: entry.class,
            ptype: entry.ptype.clone(),
            polarity: Polarity::State,
            wires: (start..wire_types.len()).collect(),
        });
    }
    debug_assert!(reduction
        .cups
        .iter()
        .all(|&(i, j)| j < wire_types.len() && wire_types[i].cancels_with(wire_types[j])));
    Diagram {
        boxes,
        wire_types,
        cups: reduction.cups.clone(),
        outputs: reduction.residual_positions.clone(),
    }
}

impl From<&Parse> for Diagram {
    fn from(p: &Parse) -> Self {
        build_diagram(&p.entries, &p.reduction)
    }
}

/// Replace every noun state and its cup by a noun effect on the partner wire.
///
/// Nouns whose wire is not in a cup (bare noun phrases) stay states.
pub fn bend_nouns(d: &Diagram) -> Diagram {
    let mut removed = vec![false; d.wire_types.len()];
    let mut dropped_cups = vec![false; d.cups.len()];
    let mut boxes = d.boxes.clone();

    for b in boxes.iter_mut() {
        if b.class != WordClass::Noun || b.polarity != Polarity::State || b.wires.len() != 1 {
            continue;
        }
        let w = b.wires[0];
        let Some(ci) = d.cups.iter().position(|&(i, j)| i == w || j == w) else {
            continue;
        };
        let (i, j) = d.cups[ci];
        let partner = if i == w { j } else { i };
        dropped_cups[ci] = true;
        removed[w] = true;
        b.polarity = Polarity::Effect;
        b.ptype = PregroupType::simple(d.wire_types[partner]);
        b.wires = vec![partner];
    }

    // Old wire index -> new wire index.
    let mut remap = Vec::with_capacity(removed.len());
    let mut next = 0;
    for &r in &removed {
        remap.push(next);
        if !r {
            next += 1;
        }
    }
    for b in boxes.iter_mut() {
        for w in b.wires.iter_mut() {
            *w = remap[*w];
        }
    }
    let wire_types = d
        .wire_types
        .iter()
        .zip(&removed)
        .filter(|(_, &r)| !r)
        .map(|(t, _)| *t)
        .collect();
    let cups = d
        .cups
        .iter()
        .zip(&dropped_cups)
        .filter(|(_, &dropped)| !dropped)
        .map(|(&(i, j), _)| (remap[i], remap[j]))
        .collect();
    let outputs = d.outputs.iter().map(|&w| remap[w]).collect();
    Diagram {
        boxes,
        wire_types,
        cups,
        outputs,
    }
}

impl Diagram {
    pub fn output_type(&self) -> PregroupType {
        self.outputs.iter().map(|&w| self.wire_types[w]).collect()
    }

    pub fn num_effects(&self) -> usize {
        self.boxes
            .iter()
            .filter(|b| b.polarity == Polarity::Effect)
            .count()
    }

    /// Noun states with a cup on their wire, i.e. what [`bend_nouns`] will bend.
    pub fn bendable_nouns(&self) -> usize {
        self.boxes
            .iter()
            .filter(|b| {
                b.class == WordClass::Noun
                    && b.polarity == Polarity::State
                    && b.wires.len() == 1
                    && self.cups.iter().any(|&(i, j)| i == b.wires[0] || j == b.wires[0])
            })
            .count()
    }

    pub fn is_planar(&self) -> bool {
        is_planar(&self.cups)
    }

    /// Deterministic text form used for golden tests and the `parse` command.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, b) in self.boxes.iter().enumerate() {
            let pol = match b.polarity {
                Polarity::State => "state",
                Polarity::Effect => "effect",
            };
            let wires: Vec<String> = b.wires.iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "box {i} {} {} {pol} [{}] wires {}",
                b.word,
                b.class,
                b.ptype,
                wires.join(" ")
            );
        }
        for &(i, j) in &self.cups {
            let _ = writeln!(out, "cup {i} {j} {} {}", self.wire_types[i], self.wire_types[j]);
        }
        for &w in &self.outputs {
            let _ = writeln!(out, "output {w} {}", self.wire_types[w]);
        }
        out
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;
    use crate::pregroup::AmbiguityPolicy;

    fn lexicon() -> Lexicon {
        "person\tnoun\ndinner\tnoun\nprepares\tverb\ntasty\tadjective\n\
         device\tnoun\nplanets\tnoun\ndetects\tverb\nthat\trelpron\n"
            .parse()
            .unwrap()
    }

    fn diagram(sentence: &str, target: SimpleType) -> Diagram {
        let tokens: Vec<&str> = sentence.split(' ').collect();
        let p = lexicon()
            .parse(&tokens, &target.into(), AmbiguityPolicy::Strict)
            .unwrap();
        Diagram::from(&p)
    }

    #[test]
    fn transitive_sentence_with_adjective() {
        let d = diagram("person prepares tasty dinner", SimpleType::s());
        assert_eq!(d.boxes.len(), 4);
        assert_eq!(d.cups.len(), 3);
        assert_eq!(d.output_type().to_string(), "s");
        assert!(d.boxes.iter().all(|b| b.polarity == Polarity::State));

        let bent = bend_nouns(&d);
        assert_eq!(bent.cups.len(), 1);
        assert_eq!(bent.num_effects(), 2);
        assert_eq!(bent.wire_types.len(), 5);
        assert_eq!(bent.output_type().to_string(), "s");
        assert_eq!(
            bent.dump(),
            "box 0 person noun effect [n^r] wires 0\n\
             box 1 prepares verb state [n^r · s · n^l] wires 0 1 2\n\
             box 2 tasty adjective state [n · n^l] wires 3 4\n\
             box 3 dinner noun effect [n^l] wires 4\n\
             cup 2 3 n^l n\n\
             output 1 s\n"
        );
    }

    #[test]
    fn bare_noun_is_not_bent() {
        let d = diagram("person", SimpleType::n());
        assert_eq!((d.boxes.len(), d.cups.len()), (1, 0));
        assert_eq!(bend_nouns(&d), d);
    }

    #[test]
    fn subject_relative_clause() {
        let d = diagram("device that detects planets", SimpleType::n());
        assert_eq!(d.boxes.len(), 4);
        assert_eq!(d.cups.len(), 4);
        assert_eq!(d.output_type().to_string(), "n");
        let bent = bend_nouns(&d);
        assert_eq!(bent.cups.len(), 2);
        assert!(bent.is_planar());
        let effects: Vec<&str> = bent
            .boxes
            .iter()
            .filter(|b| b.polarity == Polarity::Effect)
            .map(|b| b.word.as_str())
            .collect();
        assert_eq!(effects, ["device", "planets"]);
    }

    #[test]
    fn no_nouns_unchanged() {
        let lex: Lexicon = "tasty\tadjective\n".parse().unwrap();
        let p = lex
            .parse(&["tasty"], &"n n^l".parse().unwrap(), AmbiguityPolicy::Strict)
            .unwrap();
        let d = Diagram::from(&p);
        assert_eq!(bend_nouns(&d), d);
    }
}
