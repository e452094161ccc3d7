use proptest::prelude::*;
use qnlp::corpus::{self, Task};
use qnlp::pregroup::{Base, SimpleType};
use qnlp::sim::{exact_output, probabilities};
use qnlp::train::{predict, Evaluator, Experiment, SpsaConfig, EPSILON};
use qnlp::{bend_nouns, compile, AmbiguityPolicy, AnsatzConfig, Checkpoint, Diagram, LabeledSentence, Lexicon, ParamRegistry};

fn simple_type() -> impl Strategy<Value = SimpleType> {
    (prop_oneof![Just(Base::N), Just(Base::S)], -3i32..=3).prop_map(|(base, z)| SimpleType { base, z })
}

fn task_data(task: Task) -> (Lexicon, Vec<LabeledSentence>, Vec<AnsatzConfig>) {
    let triples: &[(usize, usize, usize)] = match task {
        Task::Mc => &[(1, 1, 1), (1, 1, 2), (1, 3, 1), (1, 3, 2)],
        Task::Rp => &[(0, 1, 1), (0, 1, 2), (0, 3, 1), (0, 3, 2), (1, 3, 1)],
    };
    let cfgs = triples.iter().map(|&(s, p, d)| AnsatzConfig::new(s, p, d).unwrap()).collect();
    match task {
        Task::Mc => {
            let lex = corpus::mc_lexicon();
            let data = corpus::generate_mc(0, &lex, 65).unwrap();
            (lex, data, cfgs)
        }
        Task::Rp => (corpus::rp_lexicon(), corpus::generate_rp(0), cfgs),
    }
}

/// Raw outputs of the bent and unbent circuits and the number of bent nouns.
fn both_outputs(task: Task, sentence: usize, cfg: usize, seed: u64) -> ((f64, f64), (f64, f64), usize, f64) {
    let (lex, data, cfgs) = task_data(task);
    let s = &data[sentence % data.len()];
    let cfg = cfgs[cfg % cfgs.len()];
    let parse = lex.parse(&s.token_refs(), &task.target(), AmbiguityPolicy::Strict).unwrap();
    let unbent = Diagram::from(&parse);
    let bent = bend_nouns(&unbent);
    let reg = ParamRegistry::random(&lex, &cfg, seed).unwrap();
    let run = |d: &Diagram| exact_output(&compile(d, &cfg, &reg).unwrap().bind(&reg.theta)).unwrap();
    let (b, u) = (run(&bent), run(&unbent));
    let m = unbent.bendable_nouns();
    // Bending drops a 1/√2 per noun from the cup normalisation.
    let scale = 2f64.sqrt().powi(m as i32);
    let amp_err = ((u.a0 * scale - b.a0).norm() + (u.a1 * scale - b.a1).norm()) / (b.a0.norm() + b.a1.norm()).max(1e-300);
    (b.raw(), u.raw(), m, amp_err)
}

fn normalised(r: (f64, f64)) -> (f64, f64) {
    let s = r.0 + r.1;
    (r.0 / s, r.1 / s)
}

proptest! {
    #[test]
    fn adjoints_invert(t in simple_type()) {
        prop_assert_eq!(t.left().right(), t);
        prop_assert_eq!(t.right().left(), t);
        prop_assert!(t.cancels_with(t.right()));
        prop_assert!(t.left().cancels_with(t));
        prop_assert!(!t.cancels_with(t));
    }

    #[test]
    fn type_text_round_trips(ts in prop::collection::vec(simple_type(), 0..6)) {
        let p = qnlp::PregroupType(ts);
        prop_assert_eq!(p.to_string().parse::<qnlp::PregroupType>().unwrap(), p);
    }

    #[test]
    fn bending_preserves_outputs(rp in any::<bool>(), sentence in 0usize..200, cfg in 0usize..5, seed in any::<u64>()) {
        let task = if rp { Task::Rp } else { Task::Mc };
        let (b, u, m, amp_err) = both_outputs(task, sentence, cfg, seed);
        prop_assert!(m >= 1);
        prop_assert!(amp_err < 1e-10, "amplitudes differ by {}", amp_err);
        let (nb, nu) = (normalised(b), normalised(u));
        prop_assert!((nb.0 - nu.0).abs() < 1e-9 && (nb.1 - nu.1).abs() < 1e-9);
        prop_assert_eq!(predict(b, EPSILON).label, predict(u, EPSILON).label);
    }

    #[test]
    fn dataset_circuits_obey_born_rule(rp in any::<bool>(), sentence in 0usize..200, cfg in 0usize..5, seed in any::<u64>()) {
        let task = if rp { Task::Rp } else { Task::Mc };
        let (lex, data, cfgs) = task_data(task);
        let s = &data[sentence % data.len()];
        let cfg = cfgs[cfg % cfgs.len()];
        let parse = lex.parse(&s.token_refs(), &task.target(), AmbiguityPolicy::Strict).unwrap();
        let diagram = bend_nouns(&Diagram::from(&parse));
        prop_assert!(diagram.is_planar());
        let reg = ParamRegistry::random(&lex, &cfg, seed).unwrap();
        let c = compile(&diagram, &cfg, &reg).unwrap().bind(&reg.theta);
        let total: f64 = probabilities(&c).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        let (r0, r1) = exact_output(&c).unwrap().raw();
        prop_assert!(r0 + r1 <= 1.0 + 1e-10);
    }

    #[test]
    fn label_ignores_scale(r0 in 1e-6f64..1.0, r1 in 1e-6f64..1.0, k in 1e-3f64..1e3) {
        prop_assume!((r0 - r1).abs() > 1e-9 * (r0 + r1));
        prop_assert_eq!(predict((r0, r1), EPSILON).label, predict((k * r0, k * r1), EPSILON).label);
    }

    #[test]
    fn predictions_are_distributions(r0 in 0f64..1.0, r1 in 0f64..1.0) {
        let p = predict((r0, r1), EPSILON);
        prop_assert!((p.l[0] + p.l[1] - 1.0).abs() < 1e-12);
        prop_assert!(p.l.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn splits_are_deterministic_and_balanced(seed in any::<u64>()) {
        let lex = corpus::mc_lexicon();
        let data = corpus::generate_mc(seed, &lex, 65).unwrap();
        let a = corpus::split(&data, (70, 30, 30), seed).unwrap();
        let b = corpus::split(&data, (70, 30, 30), seed).unwrap();
        prop_assert_eq!(&a.indices, &b.indices);
        prop_assert_eq!(a.counts(), [[35, 35], [15, 15], [15, 15]]);
        let mut all: Vec<usize> = a.indices.train.iter().chain(&a.indices.dev).chain(&a.indices.test).copied().collect();
        all.sort();
        all.dedup();
        prop_assert_eq!(all.len(), 130);
    }

    #[test]
    fn checkpoints_round_trip(seed in any::<u64>()) {
        let lex = corpus::rp_lexicon();
        let cfg = AnsatzConfig::new(0, 3, 2).unwrap();
        let ck = Checkpoint {
            task: "rp".into(),
            cfg,
            seed,
            registry: ParamRegistry::random(&lex, &cfg, seed).unwrap(),
        };
        prop_assert_eq!(ck.to_text().parse::<Checkpoint>().unwrap(), ck);
    }
}

#[test]
fn shot_training_is_reproducible() {
    let lex = corpus::mc_lexicon();
    let data = corpus::generate_mc(1, &lex, 65).unwrap();
    let split = corpus::split(&data, (10, 4, 4), 1).unwrap();
    let ex = Experiment::new(Task::Mc, AnsatzConfig::new(1, 1, 1).unwrap(), lex, &split).unwrap();
    let spsa = SpsaConfig::new(12, 5);
    let shots = Evaluator::Shots { shots: 256, seed: 9 };
    let a = ex.train_seed(5, &spsa, shots).unwrap();
    let b = ex.train_seed(5, &spsa, shots).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.cost.len(), 13);
    assert_eq!(a.test_error.iter().map(|t| t.0).collect::<Vec<_>>(), [0, 10, 12]);

    let many = ex.train_many(&[5, 6], &spsa, Evaluator::Exact).unwrap();
    assert_eq!(many[0], ex.train_seed(5, &spsa, Evaluator::Exact).unwrap());
}

#[test]
fn zero_iterations_record_only_the_start() {
    let lex = corpus::mc_lexicon();
    let data = corpus::generate_mc(2, &lex, 65).unwrap();
    let split = corpus::split(&data, (6, 0, 2), 2).unwrap();
    let h = qnlp::train::train(&split, &lex, Task::Mc, AnsatzConfig::new(1, 1, 1).unwrap(), &SpsaConfig::new(0, 3), Evaluator::Exact).unwrap();
    assert_eq!(h.cost.len(), 1);
    assert!(h.dev_error.is_empty());
    assert_eq!(h.initial_theta, h.final_theta);
}
