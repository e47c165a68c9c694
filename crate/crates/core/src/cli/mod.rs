//! Command-line pipeline: scenario -> plan -> tasks -> policies ->
//! metrics, plus oracle certification and the random-goal planner study.
//! Every stage reads the previous stage's artifact from the output
//! directory and writes its own atomically.

pub mod study;

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::decomposition::{attach_boundary_violations, decompose, TaskLasso};
use crate::environment::{n_bar_for, DynamicsModel, EnvConfig, RewardSpec};
use crate::ltl::{parse_ltl, translate, Nba};
use crate::planner::{grid_oracle_plan, plan_lasso, LassoPlan, PlanError, PlanParams};
use crate::policy_search::{concatenate, evaluate, mix_seed, success_rate, train_subtask, Budget, Policy};
use crate::workspace::Workspace;

/// Failure bucket of a command run; maps onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs, missing artifacts.
    Usage(String),
    /// The planner exhausted its budget without an accepting lasso.
    NoPlan(String),
    /// Filesystem or other environmental failure mid-run.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::NoPlan(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::NoPlan(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "minviol",
    version,
    about = "Minimum-violation LTL planning and reach-avoid control synthesis"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario JSON file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Specification formula over the scenario's atoms.
    #[arg(long, global = true)]
    formula: Option<String>,
    /// Master seed; every stochastic stage derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Artifact directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Cap on worker threads for parallel sections.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Search for a minimum-violation lasso plan; writes plan.json and
    /// automaton.json.
    Plan(PlanArgs),
    /// Exact lattice optimum for small scenarios; writes oracle_plan.json
    /// and a planner-vs-oracle report.
    Oracle(OracleArgs),
    /// Split plan.json into reach-avoid sub-tasks; writes tasks.json.
    Decompose(DecomposeArgs),
    /// Train one controller per sub-task; writes policies/ and logs/.
    Train(TrainArgs),
    /// Evaluate the concatenated controller; writes metrics.json.
    Eval(EvalArgs),
    /// Planner success-rate study over random multi-goal scenarios;
    /// writes study.csv.
    RandomStudy(StudyArgs),
    /// Convert training logs into plot-ready whitespace-delimited .dat
    /// files under report/.
    Report,
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Step bound of the workspace transition relation.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Sampling iterations for the prefix tree (suffix trees share it).
    #[arg(long, default_value_t = 30000)]
    iters: usize,
    /// Override for the violation weight.
    #[arg(long)]
    beta: Option<f64>,
    /// Reject violating transitions instead of pricing them.
    #[arg(long)]
    feasible_only: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Lattice spacing; must satisfy step * sqrt(dim) <= eta.
    #[arg(long, default_value_t = 0.5)]
    grid_step: f64,
    /// Refusal threshold on lattice-point x automaton-state count.
    #[arg(long, default_value_t = 2_000_000)]
    max_cells: usize,
    /// Iterations for the sampling planner being certified.
    #[arg(long, default_value_t = 30000)]
    iters: usize,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    /// Plan artifact; defaults to <out>/plan.json.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Goal-ball radius attached to every waypoint; defaults to 2 * eta.
    #[arg(long)]
    ball_radius: Option<f64>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Task artifact; defaults to <out>/tasks.json.
    #[arg(long)]
    tasks: Option<PathBuf>,
    /// Environment config JSON; defaults apply when absent.
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long, default_value_t = 48)]
    pop: usize,
    #[arg(long, default_value_t = 8)]
    elites: usize,
    #[arg(long, default_value_t = 40)]
    generations: usize,
    #[arg(long, default_value_t = 4)]
    episodes_per_candidate: usize,
    /// Fresh episodes for the post-training success check.
    #[arg(long, default_value_t = 50)]
    check_episodes: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Task artifact; defaults to <out>/tasks.json.
    #[arg(long)]
    tasks: Option<PathBuf>,
    /// Environment config JSON; defaults apply when absent.
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    /// Suffix repetitions per episode.
    #[arg(long, default_value_t = 2)]
    cycles: usize,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 12)]
    goals: usize,
    /// Planner iterations per trial and mode.
    #[arg(long, default_value_t = 30000)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = StudyMode::Both)]
    mode: StudyMode,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
pub enum StudyMode {
    Relaxed,
    FeasibleOnly,
    Both,
}

/// Parses and dispatches; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };
    if let Some(jobs) = cli.common.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 1;
        }
        // Fails when a pool already exists (e.g. repeated in-process runs);
        // the existing pool then serves the run.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let result = match &cli.cmd {
        Cmd::Plan(a) => cmd_plan(&cli.common, a),
        Cmd::Oracle(a) => cmd_oracle(&cli.common, a),
        Cmd::Decompose(a) => cmd_decompose(&cli.common, a),
        Cmd::Train(a) => cmd_train(&cli.common, a),
        Cmd::Eval(a) => cmd_eval(&cli.common, a),
        Cmd::RandomStudy(a) => cmd_random_study(&cli.common, a),
        Cmd::Report => cmd_report(&cli.common),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

// ---------------------------------------------------------------- helpers

fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::Internal(format!("cannot move {} into place: {e}", tmp.display())))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_atomic(path, &text)
}

/// Reads a pipeline artifact; a missing file names the command that
/// produces it.
fn read_artifact(path: &Path, producer: &str) -> Result<serde_json::Value, CliError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::Usage(format!(
                "{} not found; produce it with `minviol {producer}`",
                path.display()
            )))
        }
        Err(e) => {
            return Err(CliError::Internal(format!("cannot read {}: {e}", path.display())))
        }
    };
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{} is not valid JSON: {e}", path.display())))
}

fn scenario_path(common: &Common, artifact: Option<&serde_json::Value>) -> Result<PathBuf, CliError> {
    if let Some(p) = &common.scenario {
        return Ok(p.clone());
    }
    if let Some(v) = artifact {
        if let Some(s) = v.get("scenario").and_then(|s| s.as_str()) {
            return Ok(PathBuf::from(s));
        }
    }
    Err(CliError::Usage("--scenario is required".into()))
}

fn formula_of(common: &Common, artifact: Option<&serde_json::Value>) -> Result<String, CliError> {
    if let Some(f) = &common.formula {
        return Ok(f.clone());
    }
    if let Some(v) = artifact {
        if let Some(s) = v.get("formula").and_then(|s| s.as_str()) {
            return Ok(s.to_string());
        }
    }
    Err(CliError::Usage("--formula is required".into()))
}

fn load_workspace(path: &Path) -> Result<Workspace, CliError> {
    Workspace::load(path)
        .map_err(|e| CliError::Usage(format!("scenario {}: {e}", path.display())))
}

fn build_nba(ws: &Workspace, formula: &str) -> Result<Nba, CliError> {
    let ast = parse_ltl(formula, ws.ap().names())
        .map_err(|e| CliError::Usage(format!("formula: {e}")))?;
    Ok(translate(&ast, ws.ap()))
}

fn load_env_config(path: &Option<PathBuf>) -> Result<EnvConfig, CliError> {
    match path {
        None => Ok(EnvConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("env config {}: {e}", p.display())))
        }
    }
}

fn plan_error(e: PlanError) -> CliError {
    match e {
        PlanError::BadStart(m) => CliError::Usage(format!("initial state rejected: {m}")),
        other => CliError::NoPlan(format!("planning failed: {other}")),
    }
}

/// Builds the dynamics model plus a reward spec valid for every task in
/// the lasso (the sufficiency bound is monotone in both n and n_bar, so
/// the maxima cover each task).
fn model_and_shared_spec(
    cfg: &EnvConfig,
    ws: &Workspace,
    tasks: &TaskLasso,
) -> Result<(DynamicsModel, RewardSpec), CliError> {
    let model = cfg.model(ws.dimension()).map_err(CliError::Usage)?;
    let all = tasks.prefix_tasks.iter().chain(&tasks.suffix_tasks);
    let mut n = 1;
    let mut n_bar = 1;
    let mut ball = f64::INFINITY;
    for t in all {
        n = n.max(t.waypoints.len());
        n_bar = n_bar.max(n_bar_for(t, &model));
        ball = ball.min(t.ball_radius);
    }
    if !ball.is_finite() {
        return Err(CliError::Usage("task list is empty".into()));
    }
    let spec = cfg.reward_spec(ball, n, n_bar).map_err(CliError::Usage)?;
    Ok((model, spec))
}

// --------------------------------------------------------------- commands

fn cmd_plan(common: &Common, args: &PlanArgs) -> Result<(), CliError> {
    if args.eta <= 0.0 {
        return Err(CliError::Usage("--eta must be positive".into()));
    }
    let scenario = scenario_path(common, None)?;
    let formula = formula_of(common, None)?;
    let ws = load_workspace(&scenario)?;
    let nba = build_nba(&ws, &formula)?;

    let mut params = PlanParams::for_workspace(&ws, args.eta, args.iters, common.seed);
    if let Some(beta) = args.beta {
        if beta <= 0.0 {
            return Err(CliError::Usage("--beta must be positive".into()));
        }
        params.beta = beta;
    }
    params.forbid_violation = args.feasible_only;

    let plan = plan_lasso(&ws, &nba, &params).map_err(plan_error)?;

    write_json(&common.out.join("automaton.json"), &nba.to_json(&formula))?;
    let artifact = plan_artifact(&scenario, &formula, args.eta, &plan, ws.dimension());
    write_json(&common.out.join("plan.json"), &artifact)?;
    print_plan_summary("plan", &plan);
    Ok(())
}

fn plan_artifact(
    scenario: &Path,
    formula: &str,
    eta: f64,
    plan: &LassoPlan,
    dim: usize,
) -> serde_json::Value {
    serde_json::json!({
        "scenario": scenario.to_string_lossy(),
        "formula": formula,
        "eta": eta,
        "plan": plan.to_json(dim),
    })
}

fn print_plan_summary(tag: &str, plan: &LassoPlan) {
    println!(
        "{tag}: violation prefix {} suffix {}, length prefix {:.3} suffix {:.3}, \
         states {}+{}",
        plan.prefix_violation,
        plan.suffix_violation,
        plan.prefix_length,
        plan.suffix_length,
        plan.prefix.len(),
        plan.suffix.len(),
    );
}

fn cmd_oracle(common: &Common, args: &OracleArgs) -> Result<(), CliError> {
    if args.eta <= 0.0 || args.grid_step <= 0.0 {
        return Err(CliError::Usage("--eta and --grid-step must be positive".into()));
    }
    let scenario = scenario_path(common, None)?;
    let formula = formula_of(common, None)?;
    let ws = load_workspace(&scenario)?;
    let nba = build_nba(&ws, &formula)?;

    let dim = ws.dimension();
    let diag = args.grid_step * (dim as f64).sqrt();
    if diag > args.eta + 1e-12 {
        return Err(CliError::Usage(format!(
            "--grid-step {} breaks the step bound: step * sqrt({dim}) = {:.4} > eta {}; \
             use --grid-step <= {:.4}",
            args.grid_step,
            diag,
            args.eta,
            args.eta / (dim as f64).sqrt()
        )));
    }

    let (lo, hi) = ws.bounds();
    let mut points = 1usize;
    let mut widest = 0.0f64;
    for i in 0..dim {
        let extent = hi.0[i] - lo.0[i];
        widest = widest.max(extent);
        let along = (extent / args.grid_step).floor() as usize + 1;
        points = points.saturating_mul(along);
    }
    let cells = points.saturating_mul(nba.n_states().max(1));
    if cells > args.max_cells {
        let per_dim = ((args.max_cells as f64 / nba.n_states().max(1) as f64)
            .powf(1.0 / dim as f64))
        .max(2.0);
        let suggested = widest / (per_dim - 1.0);
        return Err(CliError::Usage(format!(
            "grid of {cells} product cells exceeds the limit of {}; \
             retry with --grid-step {suggested:.3} or larger",
            args.max_cells
        )));
    }

    let oracle = grid_oracle_plan(&ws, &nba, args.eta, args.grid_step).map_err(plan_error)?;
    let params = PlanParams::for_workspace(&ws, args.eta, args.iters, common.seed);
    let planned = plan_lasso(&ws, &nba, &params).map_err(plan_error)?;

    let o_len = oracle.prefix_length + oracle.suffix_length;
    let p_len = planned.prefix_length + planned.suffix_length;
    let ratio = if o_len > 0.0 { p_len / o_len } else { 1.0 };
    let report = serde_json::json!({
        "scenario": scenario.to_string_lossy(),
        "formula": formula,
        "eta": args.eta,
        "grid_step": args.grid_step,
        "planner": {
            "violation": {"prefix": planned.prefix_violation, "suffix": planned.suffix_violation},
            "length": p_len,
        },
        "oracle": {
            "violation": {"prefix": oracle.prefix_violation, "suffix": oracle.suffix_violation},
            "length": o_len,
        },
        "length_ratio": ratio,
    });
    write_json(&common.out.join("oracle_plan.json"),
               &plan_artifact(&scenario, &formula, args.eta, &oracle, dim))?;
    write_json(&common.out.join("oracle_report.json"), &report)?;
    print_plan_summary("oracle", &oracle);
    print_plan_summary("planner", &planned);
    println!("length ratio (planner / oracle): {ratio:.4}");
    Ok(())
}

fn cmd_decompose(common: &Common, args: &DecomposeArgs) -> Result<(), CliError> {
    let plan_path = args.plan.clone().unwrap_or_else(|| common.out.join("plan.json"));
    let artifact = read_artifact(&plan_path, "plan")?;
    let scenario = scenario_path(common, Some(&artifact))?;
    let formula = formula_of(common, Some(&artifact))?;
    let eta = artifact
        .get("eta")
        .and_then(|e| e.as_f64())
        .ok_or_else(|| CliError::Usage(format!("{} lacks an eta field", plan_path.display())))?;
    let plan_value = artifact
        .get("plan")
        .ok_or_else(|| CliError::Usage(format!("{} lacks a plan field", plan_path.display())))?;
    let plan = LassoPlan::from_json(plan_value)
        .map_err(|e| CliError::Usage(format!("{}: {e}", plan_path.display())))?;

    let ws = load_workspace(&scenario)?;
    let nba = build_nba(&ws, &formula)?;
    plan.validate(&ws, &nba, eta)
        .map_err(|e| CliError::Usage(format!("{} fails validation: {e}", plan_path.display())))?;

    let r = args.ball_radius.unwrap_or(2.0 * eta);
    if r <= 0.0 {
        return Err(CliError::Usage("--ball-radius must be positive".into()));
    }
    let mut tasks = decompose(&plan, r);
    attach_boundary_violations(&mut tasks, &plan, &nba, &ws);

    let value = serde_json::json!({
        "scenario": scenario.to_string_lossy(),
        "formula": formula,
        "eta": eta,
        "ball_radius": r,
        "violation": {"prefix": plan.prefix_violation, "suffix": plan.suffix_violation},
        "tasks": tasks.to_json(ws.dimension()),
    });
    write_json(&common.out.join("tasks.json"), &value)?;

    for t in tasks.prefix_tasks.iter().chain(&tasks.suffix_tasks) {
        println!(
            "task {}: q={} {} waypoints={} boundary_violation={}",
            t.index,
            t.q,
            if t.is_suffix { "suffix" } else { "prefix" },
            t.waypoints.len(),
            t.boundary_violation,
        );
    }
    Ok(())
}

/// Loads tasks.json plus the workspace it references.
fn load_tasks(
    common: &Common,
    flag: &Option<PathBuf>,
) -> Result<(TaskLasso, Workspace, PathBuf), CliError> {
    let tasks_path = flag.clone().unwrap_or_else(|| common.out.join("tasks.json"));
    let artifact = read_artifact(&tasks_path, "decompose")?;
    let scenario = scenario_path(common, Some(&artifact))?;
    let ws = load_workspace(&scenario)?;
    let tasks_value = artifact
        .get("tasks")
        .ok_or_else(|| CliError::Usage(format!("{} lacks a tasks field", tasks_path.display())))?;
    let tasks = TaskLasso::from_json(tasks_value)
        .map_err(|e| CliError::Usage(format!("{}: {e}", tasks_path.display())))?;
    if tasks.prefix_tasks.is_empty() && tasks.suffix_tasks.is_empty() {
        return Err(CliError::Usage(format!("{} holds no tasks", tasks_path.display())));
    }
    Ok((tasks, ws, tasks_path))
}

fn cmd_train(common: &Common, args: &TrainArgs) -> Result<(), CliError> {
    if args.pop == 0 || args.elites == 0 || args.elites > args.pop || args.generations == 0 {
        return Err(CliError::Usage(
            "--pop, --elites, --generations must be positive with elites <= pop".into(),
        ));
    }
    let (tasks, ws, _) = load_tasks(common, &args.tasks)?;
    let cfg = load_env_config(&args.env)?;
    let model = cfg.model(ws.dimension()).map_err(CliError::Usage)?;

    for task in tasks.prefix_tasks.iter().chain(&tasks.suffix_tasks) {
        let n_bar = n_bar_for(task, &model);
        let spec = cfg
            .reward_spec(task.ball_radius, task.waypoints.len(), n_bar)
            .map_err(CliError::Usage)?;
        let budget = Budget {
            pop: args.pop,
            elites: args.elites,
            generations: args.generations,
            episodes_per_candidate: args.episodes_per_candidate,
            seed: mix_seed(common.seed, 0x7A51, task.index as u64),
        };
        let outcome = train_subtask(&ws, task, &spec, &model, &budget);
        let check = success_rate(
            &ws,
            task,
            &spec,
            &model,
            &outcome.policy,
            args.check_episodes,
            mix_seed(common.seed, 0xC4EC, task.index as u64),
        );
        if !outcome.log.reached_goal {
            println!("warning: task {} never reached its goal during training", task.index);
        }

        let policy_value = serde_json::json!({
            "task": task.index,
            "q": task.q,
            "is_suffix": task.is_suffix,
            "success_rate": check,
            "policy": outcome.policy.to_json(),
        });
        write_json(
            &common.out.join("policies").join(format!("task_{}.json", task.index)),
            &policy_value,
        )?;
        write_atomic(
            &common.out.join("logs").join(format!("task_{}.csv", task.index)),
            &outcome.log.to_csv(),
        )?;
        let last = outcome.log.stats.last();
        println!(
            "task {}: trained {} generations, best return {:.3}, success rate {:.2}",
            task.index,
            outcome.log.stats.len(),
            last.map(|s| s.max).unwrap_or(f64::NAN),
            check,
        );
    }
    Ok(())
}

fn cmd_eval(common: &Common, args: &EvalArgs) -> Result<(), CliError> {
    let (tasks, ws, _) = load_tasks(common, &args.tasks)?;
    let cfg = load_env_config(&args.env)?;
    let (model, spec) = model_and_shared_spec(&cfg, &ws, &tasks)?;

    let mut policies = Vec::new();
    for task in tasks.prefix_tasks.iter().chain(&tasks.suffix_tasks) {
        let path = common.out.join("policies").join(format!("task_{}.json", task.index));
        let value = read_artifact(&path, "train")?;
        let policy_value = value
            .get("policy")
            .ok_or_else(|| CliError::Usage(format!("{} lacks a policy field", path.display())))?;
        let policy = Policy::from_json(policy_value)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        policies.push(policy);
    }

    let gp = concatenate(tasks, policies).map_err(CliError::Usage)?;
    let metrics = evaluate(&gp, &ws, &spec, &model, args.episodes, args.cycles, common.seed);
    let value = serde_json::json!({
        "episodes": args.episodes,
        "cycles": args.cycles,
        "seed": common.seed,
        "metrics": metrics.to_json(),
    });
    write_json(&common.out.join("metrics.json"), &value)?;
    println!(
        "eval: success {:.3}, collision {:.3}, handoff-failure {:.3}, \
         violation/cycle {}, mean return {:.3}",
        metrics.success_rate,
        metrics.collision_rate,
        metrics.handoff_failure_rate,
        if metrics.mean_violation_per_cycle.is_nan() {
            "n/a".to_string()
        } else {
            format!("{:.3}", metrics.mean_violation_per_cycle)
        },
        metrics.mean_return,
    );
    Ok(())
}

fn cmd_random_study(common: &Common, args: &StudyArgs) -> Result<(), CliError> {
    if args.trials == 0 || args.goals == 0 {
        return Err(CliError::Usage("--trials and --goals must be positive".into()));
    }
    let rows = study::run_study(common.seed, args.trials, args.goals, args.iters, args.mode);

    let mut csv = String::from("mode,seed,planned,violation,enclosed\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.mode, row.seed, row.planned, row.violation, row.enclosed
        ));
    }
    write_atomic(&common.out.join("study.csv"), &csv)?;

    for mode in ["relaxed", "feasible-only"] {
        let of_mode: Vec<_> = rows.iter().filter(|r| r.mode == mode).collect();
        if of_mode.is_empty() {
            continue;
        }
        let ok = of_mode.iter().filter(|r| r.planned).count();
        println!(
            "{mode}: {ok}/{} planned ({:.1}%)",
            of_mode.len(),
            100.0 * ok as f64 / of_mode.len() as f64
        );
        if mode == "feasible-only" {
            let sealed: Vec<_> = of_mode.iter().filter(|r| r.enclosed > 0).collect();
            let failed_all = sealed.iter().all(|r| !r.planned);
            println!(
                "feasible-only failed on all {} enclosed-goal trials: {}",
                sealed.len(),
                failed_all
            );
        }
    }
    Ok(())
}

fn cmd_report(common: &Common) -> Result<(), CliError> {
    let logs_dir = common.out.join("logs");
    let entries = match fs::read_dir(&logs_dir) {
        Ok(e) => e,
        Err(_) => {
            return Err(CliError::Usage(format!(
                "{} not found; produce training logs with `minviol train`",
                logs_dir.display()
            )))
        }
    };
    let mut log_files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "csv")
                && p.file_stem()
                    .and_then(|s| s.to_str())
                    .is_some_and(|s| s.starts_with("task_"))
        })
        .collect();
    log_files.sort();
    if log_files.is_empty() {
        return Err(CliError::Usage(format!(
            "no task_*.csv under {}; produce training logs with `minviol train`",
            logs_dir.display()
        )));
    }

    for log in &log_files {
        let text = fs::read_to_string(log)
            .map_err(|e| CliError::Internal(format!("cannot read {}: {e}", log.display())))?;
        let mut out = String::from("# generation mean max elite best\n");
        let mut best = f64::NEG_INFINITY;
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(CliError::Usage(format!(
                    "{} is not a training log (bad row {line:?})",
                    log.display()
                )));
            }
            let max: f64 = fields[2]
                .parse()
                .map_err(|_| CliError::Usage(format!("{}: bad number in {line:?}", log.display())))?;
            best = best.max(max);
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                fields[0], fields[1], fields[2], fields[3], best
            ));
        }
        let stem = log.file_stem().and_then(|s| s.to_str()).unwrap_or("task");
        write_atomic(&common.out.join("report").join(format!("{stem}.dat")), &out)?;
    }
    println!("report: wrote {} .dat files", log_files.len());
    Ok(())
}
