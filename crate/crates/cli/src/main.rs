use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qnlp::corpus::{self, DatasetSplit, LabeledSentence, Task};
use qnlp::train::{self, mean_history, metrics, permutation_test, Evaluator, Experiment, SpsaConfig};
use qnlp::{bend_nouns, compile, AmbiguityPolicy, AnsatzConfig, Checkpoint, Diagram, Error, Lexicon, ParamRegistry};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "qnlp", version, about = "Compile sentences to circuits, simulate and train them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the topic-classification dataset as TSV.
    GenMc(GenMcArgs),
    /// Print reductions and diagrams.
    Parse(ParseArgs),
    /// Print circuit statistics per sentence.
    Compile(CompileArgs),
    /// Train one ansatz; writes the log CSV and a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset subset.
    Eval(EvalArgs),
    /// Average training curves over seeds for several ansätze.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenMcArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 65)]
    per_class: usize,
    /// Vocabulary file (`word<TAB>class<TAB>topic`); defaults to the shipped one.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Write the dataset here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a split manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value = "70,30,30", value_parser = parse_sizes)]
    split: (usize, usize, usize),
    #[arg(long)]
    split_seed: Option<u64>,
}

#[derive(Args)]
struct SentenceArgs {
    #[arg(long, default_value = "mc")]
    task: Task,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// A single sentence.
    #[arg(long, conflicts_with = "data")]
    sentence: Option<String>,
    /// A dataset TSV.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Fail instead of warning when a sentence has several reductions.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    input: SentenceArgs,
    /// Show the diagram after nouns are bent into effects.
    #[arg(long)]
    bent: bool,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    input: SentenceArgs,
    #[arg(long)]
    ansatz: AnsatzConfig,
    /// Compile without bending nouns.
    #[arg(long)]
    unbent: bool,
    #[arg(long)]
    unchecked: bool,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long, default_value = "mc")]
    task: Task,
    /// Dataset TSV; generated from `--data-seed` when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    /// Split sizes train,dev,test; defaults to 70,30,30 (mc) or 74,0,31 (rp).
    #[arg(long, value_parser = parse_sizes)]
    split: Option<(usize, usize, usize)>,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Use the subsets listed in an existing manifest instead of splitting.
    #[arg(long, conflicts_with = "split")]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct SpsaArgs {
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Stability offset; defaults to 1% of the iterations.
    #[arg(long)]
    big_a: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

impl SpsaArgs {
    fn config(&self, seed: u64) -> SpsaConfig {
        let d = SpsaConfig::new(self.iterations, seed);
        SpsaConfig {
            a: self.a.unwrap_or(d.a),
            c: self.c.unwrap_or(d.c),
            big_a: self.big_a.unwrap_or(d.big_a),
            alpha: self.alpha.unwrap_or(d.alpha),
            gamma: self.gamma.unwrap_or(d.gamma),
            ..d
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Init {
    Random,
    Warmup,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    ansatz: AnsatzConfig,
    #[arg(long)]
    unchecked: bool,
    /// `exact`, `shots:N` or `shots:N:SEED`.
    #[arg(long, default_value = "exact", value_parser = parse_evaluator)]
    evaluator: Evaluator,
    #[command(flatten)]
    spsa: SpsaArgs,
    /// Number of independent runs; seeds are `seed-start..seed-start+seeds`.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed_start: u64,
    /// `warmup` picks the starting point from short exact runs.
    #[arg(long, value_enum, default_value = "random")]
    init: Init,
    #[arg(long, default_value_t = 10)]
    warmup_seeds: u64,
    #[arg(long, default_value_t = 50)]
    warmup_iterations: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Subset {
    Train,
    Dev,
    Test,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    subset: Subset,
    #[arg(long, default_value = "exact", value_parser = parse_evaluator)]
    evaluator: Evaluator,
    #[arg(long, default_value_t = 10_000)]
    permutations: usize,
    #[arg(long, default_value_t = 0)]
    permutation_seed: u64,
    /// Write per-sentence predictions as CSV.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Space-separated triples; defaults to the four rows for the task.
    #[arg(long, num_args = 1..)]
    ansatze: Vec<AnsatzConfig>,
    #[arg(long)]
    unchecked: bool,
    #[arg(long, default_value = "exact", value_parser = parse_evaluator)]
    evaluator: Evaluator,
    #[command(flatten)]
    spsa: SpsaArgs,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed_start: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Failures mapped to process exit codes.
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn parse_sizes(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad size `{p}`")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err("expected train,dev,test".into()),
    }
}

fn parse_evaluator(s: &str) -> Result<Evaluator, String> {
    let mut parts = s.split(':');
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some("exact"), None, None, None) => Ok(Evaluator::Exact),
        (Some("shots"), Some(n), seed, None) => {
            let shots = n.parse().map_err(|_| format!("bad shot count `{n}`"))?;
            let seed = seed.map_or(Ok(0), |v| v.parse().map_err(|_| format!("bad seed `{v}`")))?;
            if shots == 0 {
                return Err("shot count must be positive".into());
            }
            Ok(Evaluator::Shots { shots, seed })
        }
        _ => Err(format!("expected `exact` or `shots:N[:SEED]`, got `{s}`")),
    }
}

fn table_rows(task: Task) -> Vec<AnsatzConfig> {
    let q_s = match task {
        Task::Mc => 1,
        Task::Rp => 0,
    };
    [(1, 1), (1, 2), (3, 1), (3, 2)]
        .iter()
        .map(|&(p, d)| AnsatzConfig::new(q_s, p, d).expect("valid table row"))
        .collect()
}

fn check_ansatz(task: Task, cfg: &AnsatzConfig, unchecked: bool) -> CliResult {
    if unchecked || table_rows(task).contains(cfg) {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "ansatz ({cfg}) is not a standard row for task {}; pass --unchecked to use it anyway",
            task.name()
        )))
    }
}

fn load_lexicon(task: Task, path: Option<&Path>) -> CliResult<Lexicon> {
    Ok(match (path, task) {
        (Some(p), _) => Lexicon::load(p)?,
        (None, Task::Mc) => corpus::mc_lexicon(),
        (None, Task::Rp) => corpus::rp_lexicon(),
    })
}

fn write(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| Failure::Lib(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn sentences(args: &SentenceArgs, lexicon: &Lexicon) -> CliResult<Vec<LabeledSentence>> {
    match (&args.sentence, &args.data) {
        (Some(s), None) => Ok(vec![LabeledSentence::new(s, 0)]),
        (None, Some(p)) => Ok(corpus::load_dataset(p, lexicon)?),
        _ => Err(Failure::Usage("give either --sentence or --data".into())),
    }
}

fn policy(strict: bool) -> AmbiguityPolicy {
    if strict {
        AmbiguityPolicy::Strict
    } else {
        AmbiguityPolicy::FirstFound
    }
}

fn gen_mc(args: GenMcArgs) -> CliResult {
    let lexicon = load_lexicon(Task::Mc, args.lexicon.as_deref())?;
    let data = corpus::generate_mc(args.seed, &lexicon, args.per_class)?;
    let tsv = corpus::dataset_to_tsv(&data);
    match &args.out {
        Some(p) => write(p, &tsv)?,
        None => print!("{tsv}"),
    }
    if let Some(m) = &args.manifest {
        let seed = args.split_seed.unwrap_or(args.seed);
        write(m, &corpus::split(&data, args.split, seed)?.manifest(seed))?;
    }
    Ok(())
}

fn parse_cmd(args: ParseArgs) -> CliResult {
    let lexicon = load_lexicon(args.input.task, args.input.lexicon.as_deref())?;
    let target = args.input.task.target();
    for s in sentences(&args.input, &lexicon)? {
        let parse = lexicon.parse(&s.token_refs(), &target, policy(args.input.strict))?;
        let mut d = Diagram::from(&parse);
        if args.bent {
            d = bend_nouns(&d);
        }
        let types: Vec<String> = parse.entries.iter().map(|e| format!("{}:{}", e.word, e.ptype)).collect();
        println!("# {}", s.text());
        println!("types {}", types.join(" "));
        print!("{}", d.dump());
    }
    Ok(())
}

fn compile_cmd(args: CompileArgs) -> CliResult {
    check_ansatz(args.input.task, &args.ansatz, args.unchecked)?;
    let lexicon = load_lexicon(args.input.task, args.input.lexicon.as_deref())?;
    let registry = ParamRegistry::layout(&lexicon, &args.ansatz)?;
    let target = args.input.task.target();
    let mode = if args.unbent { "unbent" } else { "bent" };
    println!("# qnlp {VERSION} ansatz={} {mode}", args.ansatz);
    println!("qubits\tpostselected\tparams\tgates\tsentence");
    for s in sentences(&args.input, &lexicon)? {
        let parse = lexicon.parse(&s.token_refs(), &target, policy(args.input.strict))?;
        let mut d = Diagram::from(&parse);
        if !args.unbent {
            d = bend_nouns(&d);
        }
        let c = compile(&d, &args.ansatz, &registry)?;
        let mut refs = c.param_refs();
        refs.sort();
        refs.dedup();
        let gates: Vec<String> = c.gate_counts().iter().map(|(g, n)| format!("{g}={n}")).collect();
        println!(
            "{}\t{}\t{}\t{}\t{}",
            c.num_qubits,
            c.postselect.len(),
            refs.len(),
            gates.join(","),
            s.text()
        );
    }
    Ok(())
}

/// Dataset, split and the manifest seed used to write it.
fn load_split(args: &DataArgs, lexicon: &Lexicon) -> CliResult<(Vec<LabeledSentence>, DatasetSplit)> {
    let data = match (&args.data, args.task) {
        (Some(p), _) => corpus::load_dataset(p, lexicon)?,
        (None, Task::Mc) => corpus::generate_mc(args.data_seed, lexicon, 65)?,
        (None, Task::Rp) => corpus::generate_rp(args.data_seed),
    };
    let split = match &args.manifest {
        Some(m) => {
            let text = fs::read_to_string(m)?;
            DatasetSplit::from_indices(&data, DatasetSplit::parse_manifest(&text)?)?
        }
        None => {
            let sizes = args.split.unwrap_or(match args.task {
                Task::Mc => (70, 30, 30),
                Task::Rp => (74, 0, 31),
            });
            corpus::split(&data, sizes, args.split_seed)?
        }
    };
    Ok((data, split))
}

fn summary(label: &str, cost: &[f64], train_err: &[f64], dev_err: &[f64], test_err: &[(usize, f64)]) {
    let last = |v: &[f64]| v.last().map_or("-".to_string(), |x| format!("{x:.4}"));
    let test = test_err.last().map_or("-".to_string(), |(_, e)| format!("{e:.4}"));
    println!(
        "{label}\tinitial_cost {:.4}\tfinal_cost {}\ttrain_error {}\tdev_error {}\ttest_error {test}",
        cost.first().copied().unwrap_or(f64::NAN),
        last(cost),
        last(train_err),
        last(dev_err)
    );
}

fn train_cmd(args: TrainArgs) -> CliResult {
    let task = args.data.task;
    check_ansatz(task, &args.ansatz, args.unchecked)?;
    if args.seeds == 0 {
        return Err(Failure::Usage("--seeds must be at least 1".into()));
    }
    if args.init == Init::Warmup && args.seeds != 1 {
        return Err(Failure::Usage("--init warmup trains a single run; drop --seeds".into()));
    }
    let lexicon = load_lexicon(task, args.data.lexicon.as_deref())?;
    let (data, split) = load_split(&args.data, &lexicon)?;
    let ex = Experiment::new(task, args.ansatz, lexicon, &split)?;
    let spsa = args.spsa.config(args.seed_start);
    spsa.validate()?;
    fs::create_dir_all(&args.out)?;
    write(&args.out.join("data.tsv"), &corpus::dataset_to_tsv(&data))?;
    write(&args.out.join("split.tsv"), &split.manifest(args.data.split_seed))?;

    let (runs, seeds) = match args.init {
        Init::Random => {
            let seeds: Vec<u64> = (args.seed_start..args.seed_start + args.seeds).collect();
            (ex.train_many(&seeds, &spsa, args.evaluator)?, seeds)
        }
        Init::Warmup => {
            let pool: Vec<u64> = (args.seed_start..args.seed_start + args.warmup_seeds).collect();
            let (seed, theta) = ex.warmup_initial_point(&pool, args.warmup_iterations, &spsa)?;
            log::info!("warm-up picked seed {seed}");
            let spsa = SpsaConfig { seed, ..spsa };
            (vec![ex.train_from(theta, args.warmup_iterations, &spsa, args.evaluator)?], vec![seed])
        }
    };

    let empty: u64 = runs.iter().map(|h| h.empty_postselections).sum();
    if empty > 0 {
        log::warn!("{empty} sampled evaluations lost every shot to post-selection");
    }
    if runs.len() == 1 {
        let h = &runs[0];
        write(&args.out.join("history.csv"), &h.to_csv(VERSION))?;
        summary(&format!("seed {}", seeds[0]), &h.cost, &h.train_error, &h.dev_error, &h.test_error);
    } else {
        for (h, s) in runs.iter().zip(&seeds) {
            write(&args.out.join(format!("seed-{s}.csv")), &h.to_csv(VERSION))?;
        }
        let m = mean_history(&runs);
        write(&args.out.join("history.csv"), &m.to_csv(VERSION))?;
        summary(&format!("mean of {}", runs.len()), &m.cost, &m.train_error, &m.dev_error, &m.test_error);
    }

    // Keep the run with the lowest final training cost.
    let best = (0..runs.len())
        .min_by(|&a, &b| runs[a].cost.last().unwrap().total_cmp(runs[b].cost.last().unwrap()))
        .expect("at least one run");
    let ck = Checkpoint {
        task: task.name().to_string(),
        cfg: args.ansatz,
        seed: seeds[best],
        registry: ex.registry(runs[best].final_theta.clone()),
    };
    ck.save(args.out.join("checkpoint.txt"))?;
    Ok(())
}

fn eval_cmd(args: EvalArgs) -> CliResult {
    let ck = Checkpoint::load(&args.checkpoint)?;
    let task: Task = ck.task.parse()?;
    let lexicon = ck.lexicon();
    let data = corpus::load_dataset(&args.data, &lexicon)?;
    let manifest = fs::read_to_string(&args.manifest)?;
    let split = DatasetSplit::from_indices(&data, DatasetSplit::parse_manifest(&manifest)?)?;
    let ex = Experiment::new(task, ck.cfg, lexicon, &split)?;
    if ex.registry(ck.registry.theta.clone()) != ck.registry {
        return Err(Error::InvalidConfig("checkpoint layout does not match its vocabulary".into()).into());
    }
    let (name, set) = match args.subset {
        Subset::Train => ("train", &ex.train),
        Subset::Dev => ("dev", &ex.dev),
        Subset::Test => ("test", &ex.test),
    };
    if set.is_empty() {
        return Err(Failure::Usage(format!("the {name} subset is empty")));
    }
    let records = ex.predict_set(set, &ck.registry.theta, args.evaluator)?;
    let m = metrics(&records)?;
    let p = permutation_test(&records, args.permutations.max(1), args.permutation_seed);
    let [c0, c1] = task.class_names();
    println!("# qnlp {VERSION}");
    println!("subset\t{name}");
    println!("sentences\t{}", records.len());
    println!("cost\t{}", train::cost(&records));
    println!("error\t{}", m.error);
    println!("f_{c0}\t{}", m.f_scores[0]);
    println!("f_{c1}\t{}", m.f_scores[1]);
    println!("macro_f\t{}", m.macro_f);
    println!("permutation_p\t{p}");
    if let Some(path) = &args.predictions {
        let mut csv = format!("# qnlp {VERSION}\nindex,gold,predicted,l0,l1,sentence\n");
        for r in &records {
            let idx = match args.subset {
                Subset::Train => split.indices.train[r.id],
                Subset::Dev => split.indices.dev[r.id],
                Subset::Test => split.indices.test[r.id],
            };
            csv.push_str(&format!(
                "{idx},{},{},{},{},{}\n",
                r.gold,
                r.predicted,
                r.l[0],
                r.l[1],
                data[idx].text()
            ));
        }
        write(path, &csv)?;
    }
    Ok(())
}

fn sweep_cmd(args: SweepArgs) -> CliResult {
    let task = args.data.task;
    let ansatze = if args.ansatze.is_empty() {
        table_rows(task)
    } else {
        args.ansatze.clone()
    };
    for a in &ansatze {
        check_ansatz(task, a, args.unchecked)?;
    }
    if args.seeds == 0 {
        return Err(Failure::Usage("--seeds must be at least 1".into()));
    }
    let lexicon = load_lexicon(task, args.data.lexicon.as_deref())?;
    let (_, split) = load_split(&args.data, &lexicon)?;
    let seeds: Vec<u64> = (args.seed_start..args.seed_start + args.seeds).collect();
    let spsa = args.spsa.config(args.seed_start);
    spsa.validate()?;
    fs::create_dir_all(&args.out)?;
    let mut table = format!(
        "# qnlp {VERSION}\nq_s,p_n,d,params,initial_cost,final_cost,final_cost_std,train_error,dev_error,test_error\n"
    );
    for cfg in ansatze {
        let ex = Experiment::new(task, cfg, lexicon.clone(), &split)?;
        let m = mean_history(&ex.train_many(&seeds, &spsa, args.evaluator)?);
        let (q_s, p_n, d) = cfg.triple();
        write(&args.out.join(format!("curve-{q_s}-{p_n}-{d}.csv")), &m.to_csv(VERSION))?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        table.push_str(&format!(
            "{q_s},{p_n},{d},{},{},{},{},{},{},{}\n",
            ex.num_params(),
            m.cost[0],
            m.cost.last().unwrap(),
            m.cost_std.last().unwrap(),
            m.train_error.last().unwrap(),
            opt(m.dev_error.last().copied()),
            opt(m.test_error.last().map(|t| t.1)),
        ));
        summary(&format!("({cfg}) k={}", ex.num_params()), &m.cost, &m.train_error, &m.dev_error, &m.test_error);
    }
    write(&args.out.join("sweep.csv"), &table)?;
    Ok(())
}

fn configure_threads() -> CliResult {
    let Ok(v) = std::env::var("QNLP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("QNLP_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    match cli.command {
        Command::GenMc(a) => gen_mc(a),
        Command::Parse(a) => parse_cmd(a),
        Command::Compile(a) => compile_cmd(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            let code = if e.is_numerical() {
                3
            } else if matches!(e, Error::InvalidConfig(_)) {
                1
            } else {
                2
            };
            ExitCode::from(code)
        }
    }
}
