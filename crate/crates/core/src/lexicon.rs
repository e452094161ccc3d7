//! Word classes, their pregroup types, and the lexicon text format.
//!
//! ```text
//! # word <TAB> class [<TAB> topic]
//! chef    noun    food
//! prepares    verb    shared
//! that    relpron
//! ```
//!
//! `relpron` registers both relative-pronoun types for the word; parsing picks
//! whichever one reduces.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pregroup::{all_reductions, flatten, AmbiguityPolicy, PregroupType, Reduction, SimpleType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WordClass {
    Noun,
    Adjective,
    TransitiveVerb,
    RelPronSubj,
    RelPronObj,
}

impl WordClass {
    pub fn ptype(self) -> PregroupType {
        let n = SimpleType::n();
        let s = SimpleType::s();
        PregroupType(match self {
            WordClass::Noun => vec![n],
            WordClass::Adjective => vec![n, n.left()],
            WordClass::TransitiveVerb => vec![n.right(), s, n.left()],
            WordClass::RelPronSubj => vec![n.right(), n, s.left(), n],
            WordClass::RelPronObj => vec![n.right(), n, n.left().left(), s.left()],
        })
    }

    pub fn is_pronoun(self) -> bool {
        matches!(self, WordClass::RelPronSubj | WordClass::RelPronObj)
    }

    pub fn name(self) -> &'static str {
        match self {
            WordClass::Noun => "noun",
            WordClass::Adjective => "adjective",
            WordClass::TransitiveVerb => "verb",
            WordClass::RelPronSubj => "relpron_subj",
            WordClass::RelPronObj => "relpron_obj",
        }
    }

    /// Classes named by a lexicon-file token.
    fn from_token(token: &str) -> Option<&'static [WordClass]> {
        Some(match token {
            "noun" => &[WordClass::Noun],
            "adjective" | "adj" => &[WordClass::Adjective],
            "verb" | "transitive_verb" => &[WordClass::TransitiveVerb],
            "relpron" => &[WordClass::RelPronSubj, WordClass::RelPronObj],
            "relpron_subj" => &[WordClass::RelPronSubj],
            "relpron_obj" => &[WordClass::RelPronObj],
            _ => return None,
        })
    }
}

impl fmt::Display for WordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WordClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match WordClass::from_token(s) {
            Some([one]) => Ok(*one),
            _ => Err(Error::Parse {
                line: 0,
                msg: format!("unknown word class `{s}`"),
            }),
        }
    }
}

/// Topic tag used when generating topic-classification data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topic {
    /// Label index 0, one-hot `[1, 0]`.
    It,
    /// Label index 1, one-hot `[0, 1]`.
    Food,
    Shared,
}

impl Topic {
    pub fn label(self) -> Option<usize> {
        match self {
            Topic::It => Some(0),
            Topic::Food => Some(1),
            Topic::Shared => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Topic::It => "it",
            Topic::Food => "food",
            Topic::Shared => "shared",
        }
    }
}

impl FromStr for Topic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "it" | "IT" => Ok(Topic::It),
            "food" => Ok(Topic::Food),
            "shared" => Ok(Topic::Shared),
            _ => Err(Error::Parse {
                line: 0,
                msg: format!("unknown topic `{s}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LexiconEntry {
    pub word: String,
    pub class: WordClass,
    pub ptype: PregroupType,
}

impl LexiconEntry {
    pub fn new(word: impl Into<String>, class: WordClass) -> Self {
        Self {
            word: word.into(),
            class,
            ptype: class.ptype(),
        }
    }
}

/// Ordered vocabulary. A word may carry several classes (relative pronouns).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    topics: HashMap<String, Topic>,
}

/// A sentence with the lexicon entries chosen for each token and its reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Parse {
    pub entries: Vec<LexiconEntry>,
    pub reduction: Reduction,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, word: &str, class: WordClass) {
        let entry = LexiconEntry::new(word, class);
        if !self.entries.contains(&entry) {
            self.entries.push(entry);
        }
    }

    pub fn push_tagged(&mut self, word: &str, class: WordClass, topic: Topic) {
        self.push(word, class);
        self.topics.insert(word.to_owned(), topic);
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.iter().any(|e| e.word == word)
    }

    pub fn candidates(&self, word: &str) -> Vec<&LexiconEntry> {
        self.entries.iter().filter(|e| e.word == word).collect()
    }

    pub fn topic(&self, word: &str) -> Option<Topic> {
        self.topics.get(word).copied()
    }

    /// Distinct words in first-appearance order.
    pub fn words(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for e in &self.entries {
            if !seen.contains(&e.word.as_str()) {
                seen.push(e.word.as_str());
            }
        }
        seen
    }

    /// Words of one class in lexicon order.
    pub fn words_of(&self, class: WordClass) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.class == class)
            .map(|e| e.word.as_str())
            .collect()
    }

    pub fn count(&self, class: WordClass) -> usize {
        self.entries.iter().filter(|e| e.class == class).count()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut written: Vec<&str> = Vec::new();
        for e in &self.entries {
            if written.contains(&e.word.as_str()) {
                continue;
            }
            written.push(&e.word);
            let classes: Vec<WordClass> = self
                .entries
                .iter()
                .filter(|o| o.word == e.word)
                .map(|o| o.class)
                .collect();
            let class = if classes.len() == 2 && classes.iter().all(|c| c.is_pronoun()) {
                "relpron"
            } else {
                e.class.name()
            };
            out.push_str(&e.word);
            out.push('\t');
            out.push_str(class);
            if let Some(t) = self.topic(&e.word) {
                out.push('\t');
                out.push_str(t.name());
            }
            out.push('\n');
        }
        out
    }

    /// Assign types to `tokens` and reduce them to `target`.
    ///
    /// Every combination of candidate classes is tried; ambiguity is counted
    /// across all of them.
    pub fn parse(
        &self,
        tokens: &[&str],
        target: &PregroupType,
        policy: AmbiguityPolicy,
    ) -> Result<Parse> {
        let mut options = Vec::with_capacity(tokens.len());
        for t in tokens {
            let c = self.candidates(t);
            if c.is_empty() {
                return Err(Error::UnknownWord((*t).to_owned()));
            }
            options.push(c);
        }

        let mut found: Vec<Parse> = Vec::new();
        let mut choice = vec![0usize; options.len()];
        loop {
            let entries: Vec<LexiconEntry> = choice
                .iter()
                .zip(&options)
                .map(|(&i, o)| o[i].clone())
                .collect();
            let flat = flatten(&types_of(&entries));
            for reduction in all_reductions(&flat, target) {
                found.push(Parse {
                    entries: entries.clone(),
                    reduction,
                });
            }
            // Odometer over candidate indices.
            let mut pos = 0;
            loop {
                if pos == choice.len() {
                    return finish(found, tokens, target, policy);
                }
                choice[pos] += 1;
                if choice[pos] < options[pos].len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
        }
    }
}

fn types_of(entries: &[LexiconEntry]) -> Vec<PregroupType> {
    entries.iter().map(|e| e.ptype.clone()).collect()
}

fn finish(
    mut found: Vec<Parse>,
    tokens: &[&str],
    target: &PregroupType,
    policy: AmbiguityPolicy,
) -> Result<Parse> {
    match found.len() {
        0 => Err(Error::NoReduction {
            types: tokens.join(" "),
            target: target.to_string(),
        }),
        1 => Ok(found.pop().unwrap()),
        count => {
            if policy == AmbiguityPolicy::Strict {
                return Err(Error::AmbiguousReduction {
                    types: tokens.join(" "),
                    target: target.to_string(),
                    count,
                });
            }
            log::warn!("{count} parses of `{}`, using the first", tokens.join(" "));
            Ok(found.swap_remove(0))
        }
    }
}

impl FromStr for Lexicon {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lex = Lexicon::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            if cols.len() < 2 || cols.len() > 3 || cols[0].is_empty() {
                return Err(err(format!("expected `word<TAB>class[<TAB>topic]`, got `{line}`")));
            }
            let classes = WordClass::from_token(cols[1])
                .ok_or_else(|| err(format!("unknown word class `{}`", cols[1])))?;
            for &class in classes {
                lex.push(cols[0], class);
            }
            if let Some(t) = cols.get(2) {
                let topic = t.parse().map_err(|_| err(format!("unknown topic `{t}`")))?;
                lex.topics.insert(cols[0].to_owned(), topic);
            }
        }
        Ok(lex)
    }
}
