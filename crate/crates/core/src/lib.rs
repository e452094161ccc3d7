//! Compositional sentence classification with parameterised quantum circuits.
//!
//! Sentences are parsed with a pregroup grammar, turned into string diagrams,
//! rewritten so nouns become effects, compiled to circuits by an IQP ansatz,
//! simulated, and trained with SPSA.
//!
//! ```
//! use qnlp::{corpus, AmbiguityPolicy, AnsatzConfig, Diagram, ParamRegistry};
//!
//! let lexicon = corpus::mc_lexicon();
//! let parse = lexicon
//!     .parse(&["woman", "cooks", "tasty", "sauce"], &corpus::Task::Mc.target(), AmbiguityPolicy::Strict)
//!     .unwrap();
//! let bent = qnlp::bend_nouns(&Diagram::from(&parse));
//! let cfg = AnsatzConfig::new(1, 1, 1).unwrap();
//! let registry = ParamRegistry::random(&lexicon, &cfg, 7).unwrap();
//! let circuit = qnlp::compile(&bent, &cfg, &registry).unwrap();
//! let out = qnlp::sim::exact_output(&circuit.bind(&registry.theta)).unwrap();
//! assert!(out.a0.norm_sqr() + out.a1.norm_sqr() <= 1.0 + 1e-12);
//! ```

pub mod ansatz;
pub mod corpus;
pub mod diagram;
pub mod error;
pub mod lexicon;
pub mod pregroup;
pub mod sim;
pub mod train;

pub use ansatz::{
    compile, init_params, param_count, AnsatzConfig, BoundCircuit, Checkpoint, Circuit, Gate, ParamCircuit,
    ParamRef, ParamRegistry,
};
pub use corpus::{DatasetSplit, LabeledSentence, Task};
pub use diagram::{bend_nouns, build_diagram, Diagram, Polarity, WordBox};
pub use error::{Error, Result};
pub use lexicon::{Lexicon, LexiconEntry, Parse, Topic, WordClass};
pub use pregroup::{reduce, reduce_with, AmbiguityPolicy, PregroupType, Reduction, SimpleType};
pub use train::{Evaluator, Experiment, PredictionRecord, SpsaConfig, TrainHistory};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/pregroups.md")]
    mod pregroups {}
    #[doc = include_str!("../../../book/src/diagrams.md")]
    mod diagrams {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
}
