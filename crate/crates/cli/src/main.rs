use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use closurekb::ablation::{ablate, AblationConfig, GeneratorChoice, RetrievalMode};
use closurekb::battery::{
    self, check_load_reduction, incentive_payment, objective_baseline, objective_dr, starvation_feasible,
    BatteryInstance, Optimum, Schedule,
};
use closurekb::closure::closure;
use closurekb::codegen::{
    repair_loop, validate, CodegenError, ExternalGenerator, Generator, Script, TemplateGenerator, ValidationReport,
    DEFAULT_MAX_ROUNDS,
};
use closurekb::corpus::{Corpus, KnowledgeSources};
use closurekb::fjsp::{self, FjspInstance, FjspSolution, Variant, BEHNKE_DIMS};
use closurekb::knowledge_graph::{paper_id, KnowledgeGraph};
use closurekb::model_dsl::{emit_model, parse_model, Dialect};
use closurekb::par::Exec;
use closurekb::retrieval::{retrieve, SemanticIndex};
use rand::SeedableRng;
use serde::Serialize;

/// Exit codes: 0 success, 1 validation or feasibility failure, 2 usage or
/// parse error, 3 generator unavailable.
const FAILED: u8 = 1;
const USAGE: u8 = 2;
const UNAVAILABLE: u8 = 3;

#[derive(Parser)]
#[command(name = "closurekb", version, about = "Typed knowledge graph and dependency-closed model generation")]
struct Cli {
    /// Knowledge-unit graph file
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a graph from model files, card files and corpus directories
    Ingest {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Parse a query and show both retrieval streams
    Query {
        text: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Dependency closure of an entity (id, solver symbol or concept name)
    Closure { target: String },
    /// Retrieve, generate, validate and repair
    Generate(GenerateArgs),
    /// Check model code for symbolic completeness
    Validate { code: PathBuf },
    /// Evaluate a case instance against a solution or the brute-force oracle
    Eval(EvalArgs),
    /// Closure versus window retrieval over a corpus
    Ablate(AblateArgs),
    /// Generate an FJSP instance, or emit the model of one
    FjspGen(FjspGenArgs),
}

#[derive(Args)]
struct GenerateArgs {
    query: String,
    #[arg(long, default_value = "canonical")]
    dialect: String,
    /// template, external, or script:<file>; defaults to external when
    /// CLOSUREKB_GENERATOR_ENDPOINT is set
    #[arg(long)]
    generator: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    max_rounds: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Report file; defaults to <out>.report.json when --out is given
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    Battery,
    Fjsp,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(value_enum)]
    case: Case,
    instance: PathBuf,
    #[arg(long, conflicts_with = "brute_force", required_unless_present = "brute_force")]
    solution: Option<PathBuf>,
    #[arg(long)]
    brute_force: bool,
    /// FJSP windows side file
    #[arg(long)]
    windows: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    corpus: PathBuf,
    /// JSON configuration; replaces the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Sources::Heterogeneous)]
    sources: Sources,
    #[arg(long, value_enum, default_value_t = Mode::Closure)]
    mode: Mode,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Scripted generator file instead of the template generator
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    max_rounds: usize,
    /// Overrides the corpus query
    #[arg(long)]
    query: Option<String>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sources {
    PapersOnly,
    CodeOnly,
    Heterogeneous,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Closure,
    Window,
}

#[derive(Args)]
struct FjspGenArgs {
    /// Seeded stand-in with the dimensions of a named benchmark
    #[arg(long, conflicts_with = "from")]
    behnke: Option<String>,
    /// Existing .fjs file (with --model)
    #[arg(long)]
    from: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    jobs: usize,
    #[arg(long, default_value_t = 3)]
    machines: usize,
    #[arg(long, default_value_t = 1)]
    min_ops: usize,
    #[arg(long, default_value_t = 3)]
    max_ops: usize,
    #[arg(long, default_value_t = 2)]
    max_eligible: usize,
    #[arg(long, default_value_t = 9)]
    max_time: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Up to this many windows per machine
    #[arg(long, default_value_t = 0)]
    windows: usize,
    #[arg(long, default_value_t = 30)]
    horizon: u64,
    /// Windows side file (input with --from, output otherwise)
    #[arg(long)]
    windows_file: Option<PathBuf>,
    /// Emit the model (baseline, unavailability, alt_terms) instead of the instance
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value = "canonical")]
    dialect: String,
}

/// Error carrying its exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Exit(USAGE, msg.into()).into()
}

struct Ctx {
    graph: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Text or JSON rendering of a result.
    fn render<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> String {
        match self.format {
            Format::Json => serde_json::to_string_pretty(value).expect("serializable") + "\n",
            Format::Text => text(),
        }
    }

    fn load_graph(&self) -> Result<KnowledgeGraph> {
        let p = self.graph.as_ref().ok_or_else(|| usage("--graph <file> is required"))?;
        KnowledgeGraph::load(p).map_err(|e| usage(format!("{}: {e}", p.display())))
    }
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { graph: cli.graph, out: cli.out, format: cli.format };
    match run(&ctx, cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Exit>().map_or(USAGE, |x| x.0);
            ExitCode::from(code)
        }
    }
}

fn run(ctx: &Ctx, cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Ingest { paths } => ingest(ctx, &paths),
        Cmd::Query { text, k } => query(ctx, &text, k),
        Cmd::Closure { target } => closure_cmd(ctx, &target),
        Cmd::Generate(a) => generate(ctx, a),
        Cmd::Validate { code } => validate_cmd(ctx, &code),
        Cmd::Eval(a) => match a.case {
            Case::Battery => eval_battery(ctx, &a),
            Case::Fjsp => eval_fjsp(ctx, &a),
        },
        Cmd::Ablate(a) => ablate_cmd(ctx, a),
        Cmd::FjspGen(a) => fjsp_gen(ctx, a),
    }
}

fn ingest(ctx: &Ctx, paths: &[PathBuf]) -> Result<u8> {
    let mut corpus = Corpus::default();
    for p in paths {
        if p.is_dir() {
            let c = Corpus::load(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            corpus.models.extend(c.models);
            corpus.cards.extend(c.cards);
            corpus.links.extend(c.links);
            continue;
        }
        let text = read(p)?;
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        if name == "links.json" {
            let links: Vec<closurekb::corpus::Link> =
                serde_json::from_str(&text).map_err(|e| usage(format!("{name}: {e}")))?;
            corpus.links.extend(links);
        } else if name.ends_with(".json") {
            let cards = closurekb::knowledge_graph::parse_cards(&text).map_err(|e| usage(format!("{name}: {e}")))?;
            corpus.cards.extend(cards);
        } else {
            corpus.models.push((name, text));
        }
    }
    let g = corpus.graph(KnowledgeSources::Heterogeneous).map_err(|e| usage(e.to_string()))?;
    let json = g.to_json();
    let target = ctx.out.as_ref().or(ctx.graph.as_ref());
    match target {
        Some(p) => {
            fs::write(p, &json).with_context(|| format!("writing {}", p.display()))?;
            let aligned = g.edges().iter().filter(|e| e.kind == closurekb::knowledge_graph::EdgeKind::AlignsTo).count();
            println!("entities={} edges={} aligned={} file={}", g.len(), g.edge_count(), aligned, p.display());
        }
        None => print!("{json}"),
    }
    Ok(0)
}

fn query(ctx: &Ctx, text: &str, k: usize) -> Result<u8> {
    let g = ctx.load_graph()?;
    let index = SemanticIndex::from_graph(&g).map_err(|e| usage(e.to_string()))?;
    let (parsed, result) = retrieve(text, &g, &index, k).map_err(|e| usage(e.to_string()))?;
    #[derive(Serialize)]
    struct Out<'a> {
        parsed: &'a closurekb::retrieval::ParsedQuery,
        result: &'a closurekb::retrieval::RetrievalResult,
    }
    let body = ctx.render(&Out { parsed: &parsed, result: &result }, || {
        let mut s = String::new();
        let intents: Vec<&str> = parsed.intents.iter().map(|i| i.as_str()).collect();
        let _ = writeln!(s, "intents: {}", intents.join(", "));
        for e in &parsed.entities {
            let _ = writeln!(s, "entity: {} -> {}", e.surface, e.resolved.as_deref().unwrap_or("-"));
        }
        let _ = writeln!(s, "seeds: {}", result.seed_ids.join(", "));
        let _ = writeln!(s, "structural ({}):", result.structural.len());
        for m in &result.structural {
            let _ = writeln!(s, "  {m}");
        }
        let _ = writeln!(s, "snippets:");
        for sn in &result.snippets {
            let _ = writeln!(s, "  {:.4} {} {}", sn.score, sn.id, sn.text);
        }
        s
    });
    ctx.emit(&body)?;
    Ok(0)
}

fn resolve_target(g: &KnowledgeGraph, target: &str) -> Result<String> {
    if g.contains(target) {
        return Ok(target.to_string());
    }
    if let Some(e) = g.find_code_symbol(target) {
        return Ok(e.id.clone());
    }
    let pid = paper_id(target);
    if g.contains(&pid) {
        return Ok(pid);
    }
    Err(usage(format!("unknown entity `{target}`")))
}

fn closure_cmd(ctx: &Ctx, target: &str) -> Result<u8> {
    let g = ctx.load_graph()?;
    let id = resolve_target(&g, target)?;
    let c = closure(&g, &id).map_err(|e| usage(e.to_string()))?;
    let body = ctx.render(&c, || {
        let mut s = format!("target: {}\nmembers ({}), internal edges {}:\n", c.target, c.members.len(), c.edge_count);
        for m in &c.members {
            let _ = writeln!(s, "  {m}");
        }
        s
    });
    ctx.emit(&body)?;
    Ok(0)
}

fn dialect(s: &str) -> Result<Dialect> {
    s.parse::<Dialect>().map_err(usage)
}

fn generator(choice: Option<&str>) -> Result<Box<dyn Generator>> {
    let env = ExternalGenerator::from_env();
    match choice {
        None => Ok(match env {
            Some(g) => Box::new(g),
            None => Box::new(TemplateGenerator),
        }),
        Some("template") => Ok(Box::new(TemplateGenerator)),
        Some("external") => match env {
            Some(g) => Ok(Box::new(g)),
            None => Err(Exit(UNAVAILABLE, format!("{} is not set", closurekb::codegen::ENDPOINT_ENV)).into()),
        },
        Some(other) => match other.strip_prefix("script:") {
            Some(path) => {
                let script = Script::parse(&read(Path::new(path))?).map_err(|e| usage(e.to_string()))?;
                Ok(Box::new(script.run(0)))
            }
            None => Err(usage(format!("unknown generator `{other}` (template, external, script:<file>)"))),
        },
    }
}

fn report_text(r: &ValidationReport) -> String {
    r.to_text()
}

fn generate(ctx: &Ctx, a: GenerateArgs) -> Result<u8> {
    let d = dialect(&a.dialect)?;
    if a.max_rounds == 0 {
        return Err(usage("--max-rounds must be at least 1"));
    }
    let gen = generator(a.generator.as_deref())?;
    let g = ctx.load_graph()?;
    let index = SemanticIndex::from_graph(&g).map_err(|e| usage(e.to_string()))?;
    let out = match repair_loop(&a.query, &g, &index, gen.as_ref(), a.max_rounds, a.k) {
        Ok(o) => o,
        Err(CodegenError::GeneratorUnavailable(m)) => return Err(Exit(UNAVAILABLE, m).into()),
        Err(e) => return Err(usage(e.to_string())),
    };
    let code = match d {
        Dialect::Canonical => out.code.clone(),
        _ => match parse_model(&out.code).and_then(|ast| emit_model(&ast, d)) {
            Ok(c) => c,
            // unparseable output is kept verbatim; the report says why
            Err(_) => out.code.clone(),
        },
    };
    #[derive(Serialize)]
    struct Report<'a> {
        query: &'a str,
        rounds: usize,
        context_sizes: &'a [usize],
        flags: &'a [String],
        report: &'a ValidationReport,
    }
    let rep = Report {
        query: &a.query,
        rounds: out.rounds,
        context_sizes: &out.context_sizes,
        flags: &out.package.flags,
        report: &out.report,
    };
    let rep_json = serde_json::to_string_pretty(&rep).expect("serializable") + "\n";
    let rep_path = a.report.clone().or_else(|| ctx.out.as_ref().map(|p| PathBuf::from(format!("{}.report.json", p.display()))));
    ctx.emit(&code)?;
    if let Some(p) = &rep_path {
        fs::write(p, &rep_json).with_context(|| format!("writing {}", p.display()))?;
    }
    let summary = ctx.render(&rep, || {
        format!("rounds={} flags={}\n{}", out.rounds, out.package.flags.join(","), report_text(&out.report))
    });
    if ctx.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(if out.report.is_ok() { 0 } else { FAILED })
}

fn validate_cmd(ctx: &Ctx, code: &Path) -> Result<u8> {
    let text = read(code)?;
    let env = match &ctx.graph {
        Some(_) => ctx.load_graph()?,
        None => KnowledgeGraph::new(),
    };
    let r = validate(&text, &env);
    ctx.emit(&ctx.render(&r, || report_text(&r)))?;
    Ok(if r.is_ok() { 0 } else { FAILED })
}

fn eval_battery(ctx: &Ctx, a: &EvalArgs) -> Result<u8> {
    let inst: BatteryInstance =
        serde_json::from_str(&read(&a.instance)?).map_err(|e| usage(format!("{}: {e}", a.instance.display())))?;
    inst.data.validate().map_err(|e| usage(e.to_string()))?;
    if let Some(ev) = &inst.event {
        ev.validate(&inst.data).map_err(|e| usage(e.to_string()))?;
    }
    if a.brute_force {
        let buffers = Default::default();
        let opt = battery::brute_force_optimum(&inst.data, inst.event.as_ref(), &buffers, Exec::available())
            .map_err(|e| usage(e.to_string()))?;
        let body = ctx.render(&opt, || match &opt {
            Optimum::Optimal { schedule, value } => {
                let rows: Vec<String> = schedule
                    .y
                    .iter()
                    .flatten()
                    .map(|r| r.iter().map(|v| v.to_string()).collect::<String>())
                    .collect();
                format!("status=optimal objective={value}\nschedule={}\n", rows.join(" "))
            }
            Optimum::Infeasible => "status=infeasible\n".to_string(),
        });
        ctx.emit(&body)?;
        return Ok(if matches!(opt, Optimum::Optimal { .. }) { 0 } else { FAILED });
    }
    let path = a.solution.as_ref().expect("clap requires one");
    let sched: Schedule = serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let bad = |e: battery::BatteryError| usage(e.to_string());
    #[derive(Serialize)]
    struct Out {
        objective: f64,
        baseline: f64,
        incentive: Option<f64>,
        load_reduction_ok: Option<bool>,
        starvation: battery::StarvationCheck,
        feasible: bool,
    }
    let baseline = objective_baseline(&inst.data, &sched).map_err(bad)?;
    let (objective, incentive, lr) = match &inst.event {
        Some(ev) => (
            objective_dr(&inst.data, &sched, ev).map_err(bad)?,
            Some(incentive_payment(&inst.data, &sched, ev).map_err(bad)?),
            Some(check_load_reduction(&inst.data, &sched, ev).map_err(bad)?),
        ),
        None => (baseline, None, None),
    };
    let starvation = starvation_feasible(&inst.data, &sched).map_err(bad)?;
    let feasible = starvation.feasible && lr.unwrap_or(true);
    let out = Out { objective, baseline, incentive, load_reduction_ok: lr, starvation, feasible };
    let body = ctx.render(&out, || {
        let mut s = format!("objective={}\nbaseline={}\n", out.objective, out.baseline);
        if let Some(i) = out.incentive {
            let _ = writeln!(s, "incentive={i}");
        }
        if let Some(l) = out.load_reduction_ok {
            let _ = writeln!(s, "load_reduction={}", if l { "ok" } else { "violated" });
        }
        match &out.starvation.first_violation {
            None => s.push_str("starvation=ok\n"),
            Some(v) => {
                let _ = writeln!(s, "starvation=violated at {v:?}");
            }
        }
        let _ = writeln!(s, "feasible={}", out.feasible);
        s
    });
    ctx.emit(&body)?;
    Ok(if feasible { 0 } else { FAILED })
}

fn load_fjsp(instance: &Path, windows: Option<&PathBuf>) -> Result<FjspInstance> {
    let inst = fjsp::parse_fjs(&read(instance)?).map_err(|e| usage(format!("{}: {e}", instance.display())))?;
    match windows {
        None => Ok(inst),
        Some(w) => {
            let ws = fjsp::parse_windows(&read(w)?).map_err(|e| usage(format!("{}: {e}", w.display())))?;
            inst.with_windows(ws).map_err(|e| usage(e.to_string()))
        }
    }
}

fn eval_fjsp(ctx: &Ctx, a: &EvalArgs) -> Result<u8> {
    let inst = load_fjsp(&a.instance, a.windows.as_ref())?;
    if a.brute_force {
        let opt = fjsp::brute_force_optimum(&inst, Exec::available()).map_err(|e| usage(e.to_string()))?;
        let body = ctx.render(&opt, || {
            let mut s = format!("makespan={}\n", opt.makespan);
            for (i, (ms, ss)) in opt.machine.iter().zip(&opt.start).enumerate() {
                for (j, (m, t)) in ms.iter().zip(ss).enumerate() {
                    let _ = writeln!(s, "J{}.O{} machine={m} start={t}", i + 1, j + 1);
                }
            }
            s
        });
        ctx.emit(&body)?;
        return Ok(0);
    }
    let path = a.solution.as_ref().expect("clap requires one");
    let sol: FjspSolution = serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let r = fjsp::check_solution(&inst, &sol).map_err(|e| usage(e.to_string()))?;
    let body = ctx.render(&r, || {
        let mut s = format!("feasible={}\nmakespan={}\n", r.feasible, r.makespan);
        for v in &r.violations {
            let _ = writeln!(s, "violation: {v}");
        }
        s
    });
    ctx.emit(&body)?;
    Ok(if r.feasible { 0 } else { FAILED })
}

fn ablate_cmd(ctx: &Ctx, a: AblateArgs) -> Result<u8> {
    let config = match &a.config {
        Some(p) => serde_json::from_str::<AblationConfig>(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => AblationConfig {
            knowledge_sources: match a.sources {
                Sources::PapersOnly => KnowledgeSources::PapersOnly,
                Sources::CodeOnly => KnowledgeSources::CodeOnly,
                Sources::Heterogeneous => KnowledgeSources::Heterogeneous,
            },
            retrieval_mode: match a.mode {
                Mode::Closure => RetrievalMode::Closure,
                Mode::Window => RetrievalMode::Window,
            },
            window_k: a.k,
            runs: a.runs,
            generator: match &a.script {
                Some(p) => GeneratorChoice::Script { script: Script::parse(&read(p)?).map_err(|e| usage(e.to_string()))? },
                None => GeneratorChoice::Template,
            },
            max_rounds: a.max_rounds,
        },
    };
    let corpus = Corpus::load(&a.corpus).map_err(|e| usage(format!("{}: {e}", a.corpus.display())))?;
    let exec = if a.sequential { Exec::Sequential } else { Exec::available() };
    let report = ablate(&config, &corpus, a.query.as_deref(), exec).map_err(|e| usage(e.to_string()))?;
    let body = match ctx.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    ctx.emit(&body)?;
    Ok(0)
}

fn fjsp_gen(ctx: &Ctx, a: FjspGenArgs) -> Result<u8> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
    let mut inst = match (&a.behnke, &a.from) {
        (Some(name), _) => {
            let idx = BEHNKE_DIMS
                .iter()
                .position(|(n, _, _)| n.eq_ignore_ascii_case(name))
                .ok_or_else(|| usage(format!("unknown benchmark `{name}`")))?;
            fjsp::behnke_like(idx)
        }
        (None, Some(p)) => load_fjsp(p, a.windows_file.as_ref())?,
        (None, None) => {
            if a.jobs == 0 || a.machines == 0 || a.min_ops == 0 || a.min_ops > a.max_ops || a.max_time == 0 {
                bail!(usage("need jobs, machines, max-time >= 1 and 1 <= min-ops <= max-ops"));
            }
            fjsp::random_instance(&mut rng, a.jobs, a.machines, a.min_ops..=a.max_ops, a.max_eligible, a.max_time)
        }
    };
    if a.from.is_none() && a.windows > 0 {
        let w = fjsp::random_windows(&mut rng, &inst, a.windows, a.horizon);
        inst = inst.with_windows(w).map_err(|e| anyhow!(e))?;
        if let Some(p) = &a.windows_file {
            let json = serde_json::to_string_pretty(&inst.windows).expect("serializable") + "\n";
            fs::write(p, json).with_context(|| format!("writing {}", p.display()))?;
        }
    }
    let body = match &a.model {
        None => fjsp::write_fjs(&inst),
        Some(v) => {
            let variant = match v.as_str() {
                "baseline" => Variant::Baseline,
                "unavailability" => Variant::Unavailability,
                "alt_terms" | "alt-terms" => Variant::AltTerms,
                other => return Err(usage(format!("unknown variant `{other}`"))),
            };
            let ast = fjsp::build_fjsp_model(&inst, variant).map_err(|e| usage(e.to_string()))?;
            emit_model(&ast, dialect(&a.dialect)?).map_err(|e| usage(e.to_string()))?
        }
    };
    ctx.emit(&body)?;
    Ok(0)
}
