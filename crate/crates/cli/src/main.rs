//! `plancorpus` command-line tool.

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use plancorpus::catalog;
use plancorpus::config::RunConfig;
use plancorpus::corpus::{generate_splits, read_corpus, read_jsonl, read_manifest, reaugment, write_corpus, CorpusInstance, Split, SplitOutput};
use plancorpus::eval::{continuation_prompt, evaluate_outputs, metric_rows, render_table, ModelOutput, MIN_EXECUTABLE_LEN};
use plancorpus::exec::{judge, Plan};
use plancorpus::pddl::{parse_domain, parse_problem, Domain};
use plancorpus::reward::{respond, serve, serve_tcp, ServeContext};

const EX_USAGE: u8 = 64;
const EX_DATAERR: u8 = 65;
const EX_CONFIG: u8 = 78;

#[derive(Parser, Debug)]
#[command(name = "plancorpus", version, about = "Plan judging, corpus synthesis, LCCS reward and evaluation")]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every seeded subsystem (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (or file, for single-file outputs)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated domain filter
    #[arg(long, global = true, value_delimiter = ',')]
    domains: Vec<String>,
    /// Restrict to one split
    #[arg(long, global = true)]
    split: Option<Split>,
    /// Corpus directory (overrides `paths.corpus`)
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Judge a plan; exits 0 when valid, 1 when only executable, 2 otherwise
    Validate {
        /// Domain PDDL file, or the name of a built-in domain
        domain: String,
        problem: PathBuf,
        /// One `(action args)` per line
        plan: PathBuf,
    },
    /// Generate the train and test splits
    GenCorpus {
        #[arg(long)]
        train_count: Option<usize>,
        #[arg(long)]
        test_count: Option<usize>,
    },
    /// Rebuild the training instances of a corpus under the configured strategies
    Augment,
    /// Score requests from a file, or serve them over stdin/stdout or TCP
    Reward {
        /// Newline-delimited JSON requests
        requests: Option<PathBuf>,
        #[arg(long)]
        serve: bool,
        /// Listen on this address instead of stdin/stdout
        #[arg(long, requires = "serve")]
        listen: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Judge model outputs (`{id, sample, response}` lines) and report metrics
    Eval {
        outputs: PathBuf,
        /// pass@k values
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
    },
    /// Emit continuation prompts opened with a reference prefix
    Continue {
        #[arg(long)]
        prefix: Option<usize>,
    },
}

/// Error with the exit status it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

trait Classify<T> {
    fn data(self) -> Result<T, Failure>;
    fn config(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: EX_DATAERR, err: e.into() })
    }
    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: EX_CONFIG, err: e.into() })
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EX_USAGE, err: anyhow!(msg.into()) }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EX_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(f) => {
            report(&f);
            return ExitCode::from(f.code);
        }
    };
    env_logger::Builder::new().parse_filters(&cfg.log).parse_default_env().target(env_logger::Target::Stderr).init();
    match run(&cli, &cfg) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            report(&f);
            ExitCode::from(f.code)
        }
    }
}

/// Prints the error chain, skipping causes already spelled out by an outer message.
fn report(f: &Failure) {
    let mut msg = String::new();
    for cause in f.err.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    eprintln!("error: {msg}");
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).config()?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(c) = &cli.corpus {
        cfg.paths.corpus = Some(c.clone());
    }
    if let Some(o) = &cli.out {
        cfg.paths.out = Some(o.clone());
    }
    if !cli.domains.is_empty() {
        cfg.corpus.restrict_domains(&cli.domains);
    }
    cfg.finish().config()?;
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<u8, Failure> {
    match &cli.command {
        Command::Validate { domain, problem, plan } => validate(domain, problem, plan),
        Command::GenCorpus { train_count, test_count } => gen_corpus(cli, cfg, *train_count, *test_count),
        Command::Augment => augment(cli, cfg),
        Command::Reward { requests, serve, listen, workers } => reward(cfg, requests.as_deref(), *serve, listen.as_deref(), *workers),
        Command::Eval { outputs, k } => eval(cli, cfg, outputs, k),
        Command::Continue { prefix } => continuation(cli, cfg, prefix.unwrap_or(cfg.eval.prefix)),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).data()
}

fn load_domain(arg: &str) -> Result<Domain, Failure> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(e) = catalog::entry(arg) {
            return Ok(e.domain.clone());
        }
    }
    parse_domain(&read(path)?).with_context(|| format!("parsing {arg}")).data()
}

fn validate(domain: &str, problem: &Path, plan: &Path) -> Result<u8, Failure> {
    let domain = load_domain(domain)?;
    let problem = parse_problem(&read(problem)?, &domain).with_context(|| format!("parsing {}", problem.display())).data()?;
    let plan = Plan::from_val(&read(plan)?).with_context(|| format!("parsing {}", plan.display())).data()?;
    let v = judge(&domain, &problem, &plan);
    // "executable" follows the metric's rule: too-short plans do not count
    let (label, code) = if v.valid {
        ("valid", 0)
    } else if v.executable && plan.len() >= MIN_EXECUTABLE_LEN {
        ("executable", 1)
    } else {
        ("neither", 2)
    };
    println!("{label}");
    print!("executable={} valid={} goal_satisfiable={} actions={}", v.executable, v.valid, v.goal_satisfiable, plan.len());
    match &v.first_failure {
        Some(fail) => println!(" first_failure={fail}"),
        None => println!(),
    }
    Ok(code)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, Failure> {
    cfg.paths.out.as_deref().ok_or_else(|| usage("no output directory: pass --out or set paths.out"))
}

fn corpus_dir(cfg: &RunConfig) -> Result<&Path, Failure> {
    cfg.paths.corpus.as_deref().ok_or_else(|| usage("no corpus directory: pass --corpus or set paths.corpus"))
}

fn gen_corpus(cli: &Cli, cfg: &RunConfig, train: Option<usize>, test: Option<usize>) -> Result<u8, Failure> {
    let mut spec = cfg.corpus.clone();
    spec.train_count = train.unwrap_or(spec.train_count);
    spec.test_count = test.unwrap_or(spec.test_count);
    let syntax = cfg.response_syntax().config()?;
    let mut outputs = generate_splits(&spec, &cfg.augment, &syntax).data()?;
    if let Some(s) = cli.split {
        outputs.retain(|o| o.split == s);
    }
    let dir = out_dir(cfg)?;
    let manifest = write_corpus(dir, spec.seed, &outputs).data()?;
    let total: usize = manifest.files.iter().map(|f| f.count).sum();
    log::info!("wrote {total} instances in {} files to {}", manifest.files.len(), dir.display());
    Ok(0)
}

fn augment(cli: &Cli, cfg: &RunConfig) -> Result<u8, Failure> {
    let src = corpus_dir(cfg)?;
    let dst = out_dir(cfg)?;
    if src == dst {
        return Err(usage("--out must differ from the corpus directory"));
    }
    let syntax = cfg.response_syntax().config()?;
    let manifest = read_manifest(src).data()?;
    let mut outputs = Vec::new();
    for f in &manifest.files {
        if cli.split.is_some_and(|s| s != f.split) || (!cli.domains.is_empty() && !cli.domains.contains(&f.domain)) {
            continue;
        }
        let mut instances = read_jsonl(&src.join(&f.file)).data()?;
        if f.split == Split::Train {
            instances = instances.iter().map(|i| reaugment(i, &cfg.augment, &syntax)).collect::<Result<_, _>>().data()?;
        }
        outputs.push(SplitOutput { domain: f.domain.clone(), split: f.split, instances });
    }
    write_corpus(dst, manifest.seed, &outputs).data()?;
    Ok(0)
}

fn serve_context(cfg: &RunConfig) -> Result<ServeContext, Failure> {
    let instances = match &cfg.paths.corpus {
        Some(dir) => read_corpus(dir).data()?,
        None => Vec::new(),
    };
    Ok(ServeContext::new(instances, cfg.response_syntax().config()?))
}

fn output_writer(cfg: &RunConfig) -> Result<Box<dyn Write + Send>, Failure> {
    Ok(match &cfg.paths.out {
        Some(p) if !p.is_dir() => Box::new(io::BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display())).data()?)),
        _ => Box::new(io::stdout()),
    })
}

fn reward(cfg: &RunConfig, requests: Option<&Path>, serve_mode: bool, listen: Option<&str>, workers: Option<usize>) -> Result<u8, Failure> {
    let ctx = serve_context(cfg)?;
    let workers = workers.unwrap_or(cfg.workers);
    match (requests, serve_mode) {
        (Some(_), true) => Err(usage("give a request file or --serve, not both")),
        (None, false) => Err(usage("give a request file or --serve")),
        (None, true) => {
            if let Some(addr) = listen {
                let listener = TcpListener::bind(addr).with_context(|| format!("binding {addr}")).data()?;
                log::info!("listening on {}", listener.local_addr().map(|a| a.to_string()).unwrap_or_default());
                serve_tcp(&listener, &ctx, workers, None).data()?;
            } else {
                let n = serve(BufReader::new(io::stdin()), io::stdout(), &ctx, workers).data()?;
                log::info!("answered {n} requests");
            }
            Ok(0)
        }
        (Some(path), false) => {
            let mut out = output_writer(cfg)?;
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display())).data()?;
            // sequential, so responses keep request order
            for line in BufReader::new(file).lines() {
                let line = line.data()?;
                if line.trim().is_empty() {
                    continue;
                }
                let resp = respond(&line, &ctx);
                writeln!(out, "{}", serde_json::to_string(&resp).data()?).data()?;
            }
            out.flush().data()?;
            Ok(0)
        }
    }
}

fn instance_map(cfg: &RunConfig) -> Result<HashMap<String, CorpusInstance>, Failure> {
    Ok(read_corpus(corpus_dir(cfg)?).data()?.into_iter().map(|i| (i.id.clone(), i)).collect())
}

fn eval(cli: &Cli, cfg: &RunConfig, outputs: &Path, k: &[usize]) -> Result<u8, Failure> {
    let ks = if k.is_empty() { cfg.eval.ks.clone() } else { k.to_vec() };
    if ks.contains(&0) {
        return Err(usage("--k values must be positive"));
    }
    let instances = instance_map(cfg)?;
    let text = read(outputs)?;
    let outputs: Vec<ModelOutput> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", outputs.display(), i + 1)))
        .collect::<Result<_, _>>()
        .data()?;
    let syntax = cfg.response_syntax().config()?;
    let mut records = evaluate_outputs(&outputs, &instances, &syntax).data()?;
    records.retain(|r| cli.split.is_none_or(|s| r.split == s.as_str()) && (cli.domains.is_empty() || cli.domains.contains(&r.domain)));
    let rows = metric_rows(&records, &ks, cfg.eval.parse_failures).data()?;
    let table = render_table(&rows);
    if let Some(dir) = &cfg.paths.out {
        fs::create_dir_all(dir).data()?;
        let jsonl = |items: Vec<String>| items.into_iter().map(|l| l + "\n").collect::<String>();
        let rec_lines = records.iter().map(|r| serde_json::to_string(r).expect("records serialize")).collect();
        let row_lines = rows.iter().map(|r| serde_json::to_string(r).expect("rows serialize")).collect();
        fs::write(dir.join("records.jsonl"), jsonl(rec_lines)).data()?;
        fs::write(dir.join("metrics.jsonl"), jsonl(row_lines)).data()?;
        fs::write(dir.join("metrics.txt"), &table).data()?;
    }
    print!("{table}");
    Ok(0)
}

fn continuation(cli: &Cli, cfg: &RunConfig, prefix: usize) -> Result<u8, Failure> {
    let split = cli.split.unwrap_or(Split::Long);
    let syntax = cfg.response_syntax().config()?;
    let mut instances: Vec<CorpusInstance> =
        read_corpus(corpus_dir(cfg)?).data()?.into_iter().filter(|i| i.split == split && (cli.domains.is_empty() || cli.domains.contains(&i.domain))).collect();
    instances.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = output_writer(cfg)?;
    let mut skipped = 0;
    for inst in &instances {
        if inst.plan_length <= prefix {
            skipped += 1;
            continue;
        }
        let c = continuation_prompt(inst, prefix, &syntax).with_context(|| format!("instance {}", inst.id)).data()?;
        let line = serde_json::json!({
            "id": inst.id,
            "prefix": prefix,
            "query": c.query,
            "check_problem": c.check.to_string(),
        });
        writeln!(out, "{line}").data()?;
    }
    out.flush().data()?;
    if skipped > 0 {
        log::warn!("skipped {skipped} instances with at most {prefix} reference actions");
    }
    Ok(0)
}
