//! Datasets for the two classification tasks and their balanced splits.
//!
//! The topic task (`mc`) is generated from the grammar
//!
//! ```text
//! sentence    → noun_phrase verb_phrase
//! verb_phrase → verb noun_phrase
//! noun_phrase → noun | adjective noun
//! ```
//!
//! over a topic-tagged vocabulary. The relative-clause task (`rp`) is loaded
//! from TSV, or produced synthetically by [`generate_rp`].

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, Topic, WordClass};
use crate::pregroup::{PregroupType, SimpleType};

const MC_LEXICON: &str = include_str!("../data/mc_lexicon.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    /// Topic classification of sentences (food vs IT).
    Mc,
    /// Subject vs object relative clauses in noun phrases.
    Rp,
}

impl Task {
    /// Type every item of the task reduces to.
    pub fn target(self) -> PregroupType {
        match self {
            Task::Mc => SimpleType::s().into(),
            Task::Rp => SimpleType::n().into(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Mc => "mc",
            Task::Rp => "rp",
        }
    }

    /// Human names of label 0 and label 1.
    pub fn class_names(self) -> [&'static str; 2] {
        match self {
            Task::Mc => ["it", "food"],
            Task::Rp => ["object", "subject"],
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mc" => Ok(Task::Mc),
            "rp" => Ok(Task::Rp),
            _ => Err(Error::InvalidConfig(format!("unknown task `{s}`"))),
        }
    }
}

/// A sentence and its class. Class `i` is the one-hot vector with a 1 at
/// position `i`: `[1, 0]` for class 0, `[0, 1]` for class 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledSentence {
    pub tokens: Vec<String>,
    pub label: usize,
}

impl LabeledSentence {
    pub fn new(text: &str, label: usize) -> Self {
        Self {
            tokens: text.split_whitespace().map(str::to_owned).collect(),
            label,
        }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn token_refs(&self) -> Vec<&str> {
        self.tokens.iter().map(String::as_str).collect()
    }

    pub fn one_hot(&self) -> [u8; 2] {
        if self.label == 0 {
            [1, 0]
        } else {
            [0, 1]
        }
    }
}

/// The shipped topic-task vocabulary.
pub fn mc_lexicon() -> Lexicon {
    MC_LEXICON.parse().expect("bundled lexicon is well formed")
}

fn noun_phrases<'a>(nouns: &[&'a str], adjectives: &[&'a str]) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = nouns.iter().map(|n| vec![*n]).collect();
    for a in adjectives {
        for n in nouns {
            out.push(vec![a, n]);
        }
    }
    out
}

/// Topic of a sentence: the one non-shared tag among its words, if unique.
fn sentence_topic(lexicon: &Lexicon, tokens: &[&str]) -> Option<Topic> {
    let mut found = None;
    for t in tokens {
        match lexicon.topic(t) {
            Some(Topic::Shared) => {}
            Some(topic) => match found {
                None => found = Some(topic),
                Some(f) if f == topic => {}
                Some(_) => return None,
            },
            None => return None,
        }
    }
    found
}

/// Every single-topic sentence of the grammar over `lexicon`, split by label.
pub fn mc_language(lexicon: &Lexicon) -> [Vec<Vec<String>>; 2] {
    let nouns = lexicon.words_of(WordClass::Noun);
    let adjectives = lexicon.words_of(WordClass::Adjective);
    let verbs = lexicon.words_of(WordClass::TransitiveVerb);
    let phrases = noun_phrases(&nouns, &adjectives);
    let mut by_label: [Vec<Vec<String>>; 2] = [Vec::new(), Vec::new()];
    for subj in &phrases {
        for v in &verbs {
            for obj in &phrases {
                let tokens: Vec<&str> = subj.iter().chain([v]).chain(obj).copied().collect();
                if let Some(label) = sentence_topic(lexicon, &tokens).and_then(Topic::label) {
                    by_label[label].push(tokens.iter().map(|t| t.to_string()).collect());
                }
            }
        }
    }
    by_label
}

/// Sample `per_class` distinct sentences of each topic without replacement.
pub fn generate_mc(seed: u64, lexicon: &Lexicon, per_class: usize) -> Result<Vec<LabeledSentence>> {
    let language = mc_language(lexicon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * per_class);
    for (label, mut pool) in language.into_iter().enumerate() {
        if pool.len() < per_class {
            return Err(Error::InsufficientLanguage {
                topic: Task::Mc.class_names()[label].to_owned(),
                available: pool.len(),
                requested: per_class,
            });
        }
        let (chosen, _) = pool.partial_shuffle(&mut rng, per_class);
        out.extend(chosen.iter().map(|tokens| LabeledSentence {
            tokens: tokens.clone(),
            label,
        }));
    }
    out.shuffle(&mut rng);
    Ok(out)
}

/// Recognise the topic grammar directly (independent of type reduction).
pub fn derivable_mc(lexicon: &Lexicon, tokens: &[&str]) -> bool {
    let is = |w: &str, c: WordClass| lexicon.candidates(w).iter().any(|e| e.class == c);
    let np_len = |at: usize| -> Option<usize> {
        match tokens.get(at) {
            Some(w) if is(w, WordClass::Noun) => Some(1),
            Some(w) if is(w, WordClass::Adjective) => tokens
                .get(at + 1)
                .filter(|n| is(n, WordClass::Noun))
                .map(|_| 2),
            _ => None,
        }
    };
    let Some(subj) = np_len(0) else { return false };
    if !tokens.get(subj).is_some_and(|v| is(v, WordClass::TransitiveVerb)) {
        return false;
    }
    np_len(subj + 1).is_some_and(|obj| subj + 1 + obj == tokens.len())
}

/// Synthetic relative-clause vocabulary: 60 nouns, 54 verbs and `that`.
pub fn rp_lexicon() -> Lexicon {
    let mut lex = Lexicon::new();
    for i in 0..RP_NOUNS {
        lex.push(&format!("noun{i:02}"), WordClass::Noun);
    }
    for i in 0..RP_VERBS {
        lex.push(&format!("verb{i:02}"), WordClass::TransitiveVerb);
    }
    lex.push("that", WordClass::RelPronSubj);
    lex.push("that", WordClass::RelPronObj);
    lex
}

const RP_NOUNS: usize = 60;
const RP_VERBS: usize = 54;
pub const RP_PHRASES: usize = 105;

/// 105 synthetic phrases over [`rp_lexicon`]: `head that verb noun` (subject,
/// label 1) and `head that noun verb` (object, label 0), 53 and 52 of each.
///
/// Every noun occurs at least three times and every verb at least once.
pub fn generate_rp(seed: u64) -> Vec<LabeledSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nouns: Vec<String> = (0..RP_NOUNS).map(|i| format!("noun{i:02}")).collect();
    let verbs: Vec<String> = (0..RP_VERBS).map(|i| format!("verb{i:02}")).collect();

    loop {
        let mut noun_slots: Vec<&str> = nouns
            .iter()
            .flat_map(|n| std::iter::repeat_n(n.as_str(), 3))
            .collect();
        while noun_slots.len() < 2 * RP_PHRASES {
            noun_slots.push(nouns.choose(&mut rng).unwrap());
        }
        noun_slots.shuffle(&mut rng);
        let mut verb_slots: Vec<&str> = verbs.iter().map(String::as_str).collect();
        while verb_slots.len() < RP_PHRASES {
            verb_slots.push(verbs.choose(&mut rng).unwrap());
        }
        verb_slots.shuffle(&mut rng);

        let phrases: Vec<LabeledSentence> = (0..RP_PHRASES)
            .map(|i| {
                let (head, other, verb) = (noun_slots[2 * i], noun_slots[2 * i + 1], verb_slots[i]);
                let subject = i % 2 == 0;
                let text = if subject {
                    format!("{head} that {verb} {other}")
                } else {
                    format!("{head} that {other} {verb}")
                };
                LabeledSentence::new(&text, usize::from(subject))
            })
            .collect();
        let distinct: HashSet<String> = phrases.iter().map(LabeledSentence::text).collect();
        let repeated_noun = phrases.iter().any(|p| p.tokens[0] == p.tokens[2] || p.tokens[0] == p.tokens[3]);
        if distinct.len() == RP_PHRASES && !repeated_noun {
            let mut phrases = phrases;
            phrases.shuffle(&mut rng);
            return phrases;
        }
    }
}

/// `label<TAB>tokens` lines; every token must be in `lexicon`.
pub fn parse_dataset(text: &str, lexicon: &Lexicon) -> Result<Vec<LabeledSentence>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let (label, sentence) = line
            .split_once('\t')
            .ok_or_else(|| err(format!("expected `label<TAB>sentence`, got `{line}`")))?;
        let label = match label.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(err(format!("label must be 0 or 1, got `{other}`"))),
        };
        let s = LabeledSentence::new(sentence, label);
        if s.tokens.is_empty() {
            return Err(err("empty sentence".into()));
        }
        if let Some(unknown) = s.tokens.iter().find(|t| !lexicon.contains(t)) {
            return Err(Error::UnknownWord(unknown.clone()));
        }
        out.push(s);
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>, lexicon: &Lexicon) -> Result<Vec<LabeledSentence>> {
    parse_dataset(&std::fs::read_to_string(path)?, lexicon)
}

pub fn dataset_to_tsv(data: &[LabeledSentence]) -> String {
    let mut out = String::new();
    for s in data {
        let _ = writeln!(out, "{}\t{}", s.label, s.text());
    }
    out
}

/// Indices into the source dataset for each subset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetSplit {
    pub train: Vec<LabeledSentence>,
    pub dev: Vec<LabeledSentence>,
    pub test: Vec<LabeledSentence>,
    pub indices: SplitIndices,
}

fn class_counts(data: &[LabeledSentence]) -> [usize; 2] {
    let mut c = [0; 2];
    for s in data {
        c[s.label] += 1;
    }
    c
}

impl DatasetSplit {
    pub fn counts(&self) -> [[usize; 2]; 3] {
        [
            class_counts(&self.train),
            class_counts(&self.dev),
            class_counts(&self.test),
        ]
    }

    /// Rebuild the subsets of `dataset` from stored indices.
    pub fn from_indices(dataset: &[LabeledSentence], indices: SplitIndices) -> Result<Self> {
        let pick = |idx: &[usize]| -> Result<Vec<LabeledSentence>> {
            idx.iter()
                .map(|&i| {
                    dataset.get(i).cloned().ok_or_else(|| {
                        Error::InvalidConfig(format!("split index {i} outside dataset of {}", dataset.len()))
                    })
                })
                .collect()
        };
        Ok(Self {
            train: pick(&indices.train)?,
            dev: pick(&indices.dev)?,
            test: pick(&indices.test)?,
            indices,
        })
    }

    /// One line per subset: `name<TAB>class0<TAB>class1<TAB>indices`.
    pub fn manifest(&self, seed: u64) -> String {
        let mut out = format!("# split seed={seed} subset\tclass0\tclass1\tline indices\n");
        let counts = self.counts();
        let subsets = [&self.indices.train, &self.indices.dev, &self.indices.test];
        for ((name, c), idx) in ["train", "dev", "test"].iter().zip(counts).zip(subsets) {
            let idx: Vec<String> = idx.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{name}\t{}\t{}\t{}", c[0], c[1], idx.join(","));
        }
        out
    }

    pub fn parse_manifest(text: &str) -> Result<SplitIndices> {
        let mut ind = SplitIndices::default();
        for (i, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(err(format!("expected 4 columns, got `{line}`")));
            }
            let idx = cols[3]
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| err(format!("bad index `{s}`"))))
                .collect::<Result<Vec<usize>>>()?;
            match cols[0] {
                "train" => ind.train = idx,
                "dev" => ind.dev = idx,
                "test" => ind.test = idx,
                other => return Err(err(format!("unknown subset `{other}`"))),
            }
        }
        Ok(ind)
    }
}

/// Random class-balanced partition into train/dev/test.
///
/// An odd subset size takes its extra item from the class with more items
/// still unassigned (class 1 on a tie).
pub fn split(dataset: &[LabeledSentence], sizes: (usize, usize, usize), seed: u64) -> Result<DatasetSplit> {
    let (train, dev, test) = sizes;
    if train + dev + test > dataset.len() {
        return Err(Error::ImbalancedRequest(format!(
            "{} items requested from a dataset of {}",
            train + dev + test,
            dataset.len()
        )));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = dataset.iter().find(|s| !seen.insert(s.text())) {
        return Err(Error::InvalidConfig(format!("duplicate sentence `{}`", dup.text())));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pools: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, s) in dataset.iter().enumerate() {
        pools[s.label].push(i);
    }
    for p in pools.iter_mut() {
        p.shuffle(&mut rng);
    }

    let mut take = |size: usize, name: &str| -> Result<Vec<usize>> {
        let mut want = [size / 2, size / 2];
        if size % 2 == 1 {
            let extra = if pools[0].len() > pools[1].len() { 0 } else { 1 };
            want[extra] += 1;
        }
        for c in 0..2 {
            if pools[c].len() < want[c] {
                return Err(Error::ImbalancedRequest(format!(
                    "{name} needs {} of class {c}, only {} left",
                    want[c],
                    pools[c].len()
                )));
            }
        }
        let mut subset: Vec<usize> = Vec::with_capacity(size);
        for c in 0..2 {
            let rest = pools[c].split_off(want[c]);
            subset.append(&mut std::mem::replace(&mut pools[c], rest));
        }
        subset.shuffle(&mut rng);
        Ok(subset)
    };
    let indices = SplitIndices {
        train: take(train, "train")?,
        dev: take(dev, "dev")?,
        test: take(test, "test")?,
    };
    DatasetSplit::from_indices(dataset, indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pregroup::AmbiguityPolicy;

    #[test]
    fn mc_generation_counts() {
        let lex = mc_lexicon();
        let data = generate_mc(7, &lex, 65).unwrap();
        assert_eq!(data.len(), 130);
        assert_eq!(class_counts(&data), [65, 65]);
        let distinct: HashSet<String> = data.iter().map(LabeledSentence::text).collect();
        assert_eq!(distinct.len(), 130);
        assert_eq!(data, generate_mc(7, &lex, 65).unwrap());
        assert_ne!(data, generate_mc(8, &lex, 65).unwrap());
    }

    #[test]
    fn generated_sentences_parse() {
        let lex = mc_lexicon();
        for s in generate_mc(3, &lex, 65).unwrap() {
            let toks = s.token_refs();
            assert!(derivable_mc(&lex, &toks), "{}", s.text());
            assert!(toks.len() <= 5);
            lex.parse(&toks, &Task::Mc.target(), AmbiguityPolicy::Strict).unwrap();
        }
    }

    #[test]
    fn smallest_grammar_instance() {
        let lex: Lexicon = "pasta\tnoun\tfood\neats\tverb\tfood\ncode\tnoun\tit\nwrites\tverb\tit\n"
            .parse()
            .unwrap();
        let mut data = generate_mc(0, &lex, 1).unwrap();
        data.sort_by_key(|s| s.label);
        assert_eq!(data[0].text(), "code writes code");
        assert_eq!(data[1].text(), "pasta eats pasta");
        assert!(matches!(
            generate_mc(0, &lex, 2),
            Err(Error::InsufficientLanguage { available: 1, requested: 2, .. })
        ));
    }

    #[test]
    fn recogniser_rejects_non_sentences() {
        let lex = mc_lexicon();
        assert!(derivable_mc(&lex, &["skillful", "chef", "cooks", "tasty", "dinner"]));
        assert!(!derivable_mc(&lex, &["chef", "cooks"]));
        assert!(!derivable_mc(&lex, &["tasty", "cooks", "dinner"]));
        assert!(!derivable_mc(&lex, &["chef", "cooks", "dinner", "sauce"]));
    }

    #[test]
    fn dataset_tsv() {
        let lex: Lexicon = "device\tnoun\nplanets\tnoun\nobservatory\tnoun\n\
                            detects\tverb\nhas\tverb\nthat\trelpron\n"
            .parse()
            .unwrap();
        let data = parse_dataset(
            "1\tdevice that detects planets\n0\tdevice that observatory has\n",
            &lex,
        )
        .unwrap();
        assert_eq!(data[0].tokens, ["device", "that", "detects", "planets"]);
        assert_eq!(data[0].one_hot(), [0, 1]);
        assert_eq!(data[1].one_hot(), [1, 0]);
        assert!(parse_dataset("", &lex).unwrap().is_empty());
        assert!(matches!(parse_dataset("2\tdevice", &lex), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_dataset("device that", &lex), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_dataset("1\tdevice that eats planets", &lex),
            Err(Error::UnknownWord(w)) if w == "eats"
        ));
        assert_eq!(parse_dataset(&dataset_to_tsv(&data), &lex).unwrap(), data);
    }

    #[test]
    fn mc_split_sizes() {
        let data = generate_mc(7, &mc_lexicon(), 65).unwrap();
        let s = split(&data, (70, 30, 30), 1).unwrap();
        assert_eq!(s.counts(), [[35, 35], [15, 15], [15, 15]]);
        assert_eq!(s, split(&data, (70, 30, 30), 1).unwrap());
        let all: HashSet<String> = s.train.iter().chain(&s.dev).chain(&s.test).map(|x| x.text()).collect();
        assert_eq!(all.len(), 130);
    }

    #[test]
    fn rp_split_with_odd_test_size() {
        let data = generate_rp(5);
        assert_eq!(class_counts(&data), [52, 53]);
        let s = split(&data, (74, 0, 31), 2).unwrap();
        let c = s.counts();
        assert_eq!(c[0], [37, 37]);
        assert_eq!(c[1], [0, 0]);
        assert_eq!(c[2][0] + c[2][1], 31);
        assert!(c[2][0].abs_diff(c[2][1]) == 1);
    }

    #[test]
    fn empty_and_impossible_splits() {
        let data = generate_rp(5);
        let s = split(&data, (0, 0, 0), 0).unwrap();
        assert!(s.train.is_empty() && s.dev.is_empty() && s.test.is_empty());
        assert!(matches!(split(&data, (106, 0, 0), 0), Err(Error::ImbalancedRequest(_))));
        assert_eq!(split(&data, (105, 0, 0), 0).unwrap().counts()[0], [52, 53]);
        let one_class: Vec<_> = data.into_iter().filter(|s| s.label == 1).collect();
        assert!(matches!(split(&one_class, (2, 0, 0), 0), Err(Error::ImbalancedRequest(_))));
    }

    #[test]
    fn manifest_round_trip() {
        let data = generate_mc(7, &mc_lexicon(), 65).unwrap();
        let s = split(&data, (70, 30, 30), 4).unwrap();
        let text = s.manifest(4);
        assert!(text.contains("\ntrain\t35\t35\t"));
        let back = DatasetSplit::from_indices(&data, DatasetSplit::parse_manifest(&text).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rp_generator_constraints() {
        let lex = rp_lexicon();
        let data = generate_rp(11);
        assert_eq!(data.len(), RP_PHRASES);
        assert_eq!(lex.words().len(), 115);
        let mut freq = std::collections::HashMap::new();
        for s in &data {
            for t in &s.tokens {
                *freq.entry(t.as_str()).or_insert(0) += 1;
            }
            let p = lex.parse(&s.token_refs(), &Task::Rp.target(), AmbiguityPolicy::Strict).unwrap();
            let want = if s.label == 1 { WordClass::RelPronSubj } else { WordClass::RelPronObj };
            assert_eq!(p.entries[1].class, want);
        }
        for n in lex.words_of(WordClass::Noun) {
            assert!(freq[n] >= 3, "{n}");
        }
        for v in lex.words_of(WordClass::TransitiveVerb) {
            assert!(freq[v] >= 1, "{v}");
        }
        assert_eq!(data, generate_rp(11));
    }
}
