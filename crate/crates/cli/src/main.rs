use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use nonclassical::bases::LambdaSolver;
use nonclassical::io::{self, ArrayFile, RecipeFile, WitnessFile};
use nonclassical::multipartite::{classify_three_qubit, rank_signature, run_recipe, QutritCase};
use nonclassical::potential::{apply_cd_state, cd_conversion_check, schmidt_decomposition, BeamSplitter, COUNT_TOL};
use nonclassical::reproduce::{reproduce, Report};
use nonclassical::state::{cat_state, coherent_state, fock_state, squeezed_vacuum, su2_coherent_state};
use nonclassical::witness::{build_witness_with, witness_expectation};
use nonclassical::{Error, PureState, QuantumState, Spin, State, TruncationConfig};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Parser)]
#[command(name = "ncw", version, about = "Nonclassicality witnesses and controlled-displacement entanglement")]
struct Cli {
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a state file.
    State(StateArgs),
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// Maximal classical expectation of an observable.
    Lambda {
        #[arg(long)]
        observable: PathBuf,
        #[arg(long)]
        family: PathBuf,
        /// Skip closed forms and use the generic optimizer.
        #[arg(long)]
        numeric: bool,
    },
    #[command(subcommand)]
    Potential(PotentialCmd),
    #[command(subcommand)]
    Multi(MultiCmd),
    /// Recompute the worked examples and compare with expected values.
    Reproduce {
        /// Comma-separated groups to run.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StateKind {
    Fock,
    Coherent,
    Su2,
    Squeezed,
    Cat,
    Custom,
}

#[derive(clap::Args)]
struct StateArgs {
    #[arg(long, value_enum)]
    kind: StateKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 40)]
    nmax: usize,
    #[arg(long, default_value_t = 1e-10)]
    tail_tol: f64,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long)]
    q: Option<f64>,
    /// Comma-separated amplitudes for custom states, normalized on construction.
    #[arg(long, allow_hyphen_values = true)]
    amplitudes: Option<String>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum WitnessCmd {
    /// Build W = lambda I - M for an observable and a classical family.
    Build {
        #[arg(long)]
        observable: PathBuf,
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        numeric: bool,
    },
    /// Evaluate a witness on a state.
    Eval {
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
}

#[derive(Subcommand)]
enum PotentialCmd {
    /// Apply a CD gate. A single-system input is paired with an ancilla in |0>.
    Cd {
        #[arg(long)]
        state: PathBuf,
        /// Expected dimension of a single-system input.
        #[arg(long)]
        d: Option<usize>,
        /// 1-based control party for multipartite inputs.
        #[arg(long, default_value_t = 1)]
        control: usize,
        #[arg(long, default_value_t = 2)]
        target: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 50:50 beam splitter on two single-mode states of equal truncation.
    Bs {
        #[arg(long)]
        state1: PathBuf,
        #[arg(long)]
        state2: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tail_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Schmidt {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum MultiCmd {
    Recipe {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Classify {
        #[arg(long)]
        state: PathBuf,
    },
    /// Representative of one of the two-qutrit-and-qubit classes.
    Qutrit {
        #[arg(long)]
        case: String,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        c: String,
        /// Output the recipe result instead of the displayed class representative.
        #[arg(long)]
        from_recipe: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct InputHash {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    inputs: Vec<InputHash>,
    seed: u64,
    version: String,
    wall_time_ms: u128,
}

struct Ctx {
    command: String,
    seed: u64,
    inputs: Vec<InputHash>,
    start: Instant,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> anyhow::Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputHash { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    fn manifest(&mut self) -> RunManifest {
        RunManifest {
            command: self.command.clone(),
            inputs: std::mem::take(&mut self.inputs),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: self.start.elapsed().as_millis(),
        }
    }

    fn emit<T: Serialize>(&mut self, result: T) -> anyhow::Result<()> {
        #[derive(Serialize)]
        struct Out<T> {
            manifest: RunManifest,
            result: T,
        }
        let json = serde_json::to_string_pretty(&Out { manifest: self.manifest(), result })?;
        say(&json)
    }
}

fn say(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn complex(s: &str) -> anyhow::Result<C64> {
    Ok(io::parse_complex(s)?)
}

fn need<T>(v: Option<T>, flag: &str, kind: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow!(Error::Invalid(format!("--{flag} is required for --kind {kind}"))))
}

fn read_state(ctx: &mut Ctx, path: &Path) -> anyhow::Result<State> {
    Ok(io::parse_state(&ctx.read(path)?)?)
}

fn read_pure(ctx: &mut Ctx, path: &Path) -> anyhow::Result<PureState> {
    match read_state(ctx, path)? {
        State::Pure(p) => Ok(p),
        State::Mixed(_) => Err(Error::Invalid(format!("{} must hold a pure state", path.display())).into()),
    }
}

/// Writes the state to `out` and reports, or prints the state file itself when there is no `out`.
fn output_state<T: Serialize>(ctx: &mut Ctx, state: &State, out: Option<&Path>, report: T) -> anyhow::Result<()> {
    let json = io::state_to_json(state)?;
    match out {
        Some(p) => {
            write_file(p, &json)?;
            ctx.emit(report)
        }
        None => say(&json),
    }
}

fn cmd_state(ctx: &mut Ctx, a: StateArgs) -> anyhow::Result<()> {
    let trunc = TruncationConfig::new(a.nmax, a.tail_tol)?;
    let (psi, tail) = match a.kind {
        StateKind::Fock => (fock_state(need(a.n, "n", "fock")?, &trunc)?, 0.0),
        StateKind::Coherent => {
            let t = coherent_state(complex(&need(a.alpha, "alpha", "coherent")?)?, &trunc)?;
            (t.state, t.tail_mass)
        }
        StateKind::Squeezed => {
            let t = squeezed_vacuum(need(a.q, "q", "squeezed")?, &trunc)?;
            (t.state, t.tail_mass)
        }
        StateKind::Cat => {
            let t = cat_state(complex(&need(a.alpha, "alpha", "cat")?)?, &trunc)?;
            (t.state, t.tail_mass)
        }
        StateKind::Su2 => {
            let spin = Spin::from_j(need(a.j, "j", "su2")?)?;
            (su2_coherent_state(complex(&need(a.z, "z", "su2")?)?, spin), 0.0)
        }
        StateKind::Custom => {
            let amps = need(a.amplitudes, "amplitudes", "custom")?
                .split(',')
                .map(complex)
                .collect::<anyhow::Result<Vec<_>>>()?;
            let dims = a.dims.unwrap_or_else(|| vec![amps.len()]);
            (PureState::normalized(dims, nonclassical::CVector::from_vec(amps))?, 0.0)
        }
    };
    #[derive(Serialize)]
    struct R {
        dims: Vec<usize>,
        tail_mass: f64,
    }
    let r = R { dims: psi.dims().to_vec(), tail_mass: tail };
    output_state(ctx, &State::Pure(psi), a.out.as_deref(), r)
}

fn solver(seed: u64, numeric: bool) -> LambdaSolver {
    LambdaSolver { seed, analytic: !numeric, ..LambdaSolver::default() }
}

fn cmd_witness(ctx: &mut Ctx, cmd: WitnessCmd) -> anyhow::Result<()> {
    match cmd {
        WitnessCmd::Build { observable, family, out, numeric } => {
            let (dims, m) = io::parse_observable(&ctx.read(&observable)?)?;
            let fam = io::parse_family(&ctx.read(&family)?)?;
            let w = build_witness_with(&m, &fam, &solver(ctx.seed, numeric))?;
            let file = WitnessFile::new(&w, dims);
            write_file(&out, &serde_json::to_string_pretty(&file)?)?;
            #[derive(Serialize)]
            struct R {
                lambda: f64,
                method: nonclassical::LambdaMethod,
                certified_tolerance: f64,
            }
            ctx.emit(R { lambda: w.lambda, method: w.method, certified_tolerance: w.certified_tolerance })
        }
        WitnessCmd::Eval { witness, state } => {
            let file: WitnessFile = serde_json::from_str(&ctx.read(&witness)?).map_err(Error::from)?;
            let w = file.into_witness()?;
            let rho = read_state(ctx, &state)?;
            let report = witness_expectation(&w, &rho)?;
            ctx.emit(report)
        }
    }
}

fn cmd_lambda(ctx: &mut Ctx, observable: &Path, family: &Path, numeric: bool) -> anyhow::Result<()> {
    let (_, m) = io::parse_observable(&ctx.read(observable)?)?;
    let fam = io::parse_family(&ctx.read(family)?)?;
    let r = solver(ctx.seed, numeric).solve(&fam, &m)?;
    ctx.emit(r)
}

fn one_based(k: usize) -> anyhow::Result<usize> {
    k.checked_sub(1).ok_or_else(|| anyhow!(Error::Invalid("party indices start at 1".into())))
}

fn cmd_potential(ctx: &mut Ctx, cmd: PotentialCmd) -> anyhow::Result<()> {
    match cmd {
        PotentialCmd::Cd { state, d, control, target, out } => {
            let input = read_state(ctx, &state)?;
            if input.dims().len() == 1 {
                let dim = input.dims()[0];
                if let Some(d) = d {
                    if d != dim {
                        return Err(Error::DimensionMismatch { expected: d, found: dim }.into());
                    }
                }
                let conversion = cd_conversion_check(&input)?;
                let anc = PureState::basis(&[dim], &[0])?;
                let paired = match &input {
                    State::Pure(p) => State::Pure(p.tensor(&anc)),
                    State::Mixed(r) => State::Mixed(r.tensor(&anc.to_density())),
                };
                let output = apply_cd_state(&paired, 0, 1)?;
                let state_json: serde_json::Value = serde_json::to_value(ArrayFile::from_state(&output))?;
                if let Some(p) = &out {
                    write_file(p, &io::state_to_json(&output)?)?;
                }
                #[derive(Serialize)]
                struct R {
                    conversion: nonclassical::potential::ConversionReport,
                    output: serde_json::Value,
                }
                ctx.emit(R { conversion, output: state_json })
            } else {
                let output = apply_cd_state(&input, one_based(control)?, one_based(target)?)?;
                #[derive(Serialize)]
                struct R {
                    dims: Vec<usize>,
                }
                output_state(ctx, &output, out.as_deref(), R { dims: output.dims().to_vec() })
            }
        }
        PotentialCmd::Bs { state1, state2, tail_tol, out } => {
            let a = read_pure(ctx, &state1)?;
            let b = read_pure(ctx, &state2)?;
            if a.dims().len() != 1 || a.dims() != b.dims() {
                return Err(Error::Invalid("beam splitter takes two single-mode states of equal dimension".into()).into());
            }
            let trunc = TruncationConfig::new(a.dim() - 1, tail_tol)?;
            let output = BeamSplitter::new(trunc)?.apply(&a, &b)?;
            let d = a.dim();
            let sn = schmidt_decomposition(&output, [d, d])?.coefficients.iter().filter(|&&c| c > COUNT_TOL).count();
            #[derive(Serialize)]
            struct R {
                dims: Vec<usize>,
                schmidt_number: usize,
            }
            output_state(ctx, &State::Pure(output), out.as_deref(), R { dims: vec![d, d], schmidt_number: sn })
        }
        PotentialCmd::Schmidt { state, dims } => {
            let psi = read_pure(ctx, &state)?;
            let [d1, d2] = dims[..] else {
                return Err(Error::Invalid("--dims takes two dimensions, e.g. 2,2".into()).into());
            };
            let dec = schmidt_decomposition(&psi, [d1, d2])?;
            #[derive(Serialize)]
            struct R {
                coefficients: Vec<f64>,
                schmidt_number: usize,
            }
            let sn = dec.coefficients.iter().filter(|&&c| c > COUNT_TOL).count();
            ctx.emit(R { coefficients: dec.coefficients, schmidt_number: sn })
        }
    }
}

fn cmd_multi(ctx: &mut Ctx, cmd: MultiCmd) -> anyhow::Result<()> {
    match cmd {
        MultiCmd::Recipe { file, out } => {
            let text = ctx.read(&file)?;
            let recipe: RecipeFile = serde_json::from_str(&text).map_err(Error::from)?;
            let run = run_recipe(&recipe.into_recipe()?)?;
            #[derive(Serialize)]
            struct R {
                dims: Vec<usize>,
                intermediates: Vec<ArrayFile>,
            }
            let intermediates = run.intermediates.iter().map(|s| ArrayFile::from_state(&State::Pure(s.clone()))).collect();
            let r = R { dims: run.state.dims().to_vec(), intermediates };
            output_state(ctx, &State::Pure(run.state), out.as_deref(), r)
        }
        MultiCmd::Classify { state } => {
            let psi = read_pure(ctx, &state)?;
            #[derive(Serialize)]
            struct R {
                #[serde(skip_serializing_if = "Option::is_none")]
                classification: Option<nonclassical::multipartite::Classification>,
                rank_signature: nonclassical::multipartite::RankSignature,
            }
            let classification = if psi.dims() == [2, 2, 2] { Some(classify_three_qubit(&psi)?) } else { None };
            ctx.emit(R { classification, rank_signature: rank_signature(&psi)? })
        }
        MultiCmd::Qutrit { case, a, b, c, from_recipe, out } => {
            let case: QutritCase = case.parse()?;
            let (a, b, c) = (complex(&a)?, complex(&b)?, complex(&c)?);
            let psi = if from_recipe { run_recipe(&case.recipe(a, b, c)?)?.state } else { case.display_state(a, b, c)? };
            let rank_signature = rank_signature(&psi)?;
            let state = State::Pure(psi);
            if let Some(p) = &out {
                write_file(p, &io::state_to_json(&state)?)?;
            }
            #[derive(Serialize)]
            struct R {
                case: String,
                rank_signature: nonclassical::multipartite::RankSignature,
                state: ArrayFile,
            }
            ctx.emit(R { case: case.to_string(), rank_signature, state: ArrayFile::from_state(&state) })
        }
    }
}

fn table(report: &Report) -> String {
    let mut lines = Vec::new();
    for r in &report.rows {
        lines.push(format!(
            "{:>2} {:<14} {:<46} computed {:<24} expected {:<24} {}",
            r.criterion,
            r.group,
            r.check,
            format!("{:.12e}", r.computed),
            format!("{:?} {:.12e}", r.relation, r.expected),
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    for f in &report.findings {
        lines.push(format!("finding: {f}"));
    }
    let failed: Vec<_> = report.failures().collect();
    if failed.is_empty() {
        lines.push(format!("all {} checks passed", report.rows.len()));
    } else {
        lines.push(format!("{} of {} checks failed:", failed.len(), report.rows.len()));
        for r in failed {
            lines.push(format!("  [{}] {}: {}", r.criterion, r.group, r.check));
        }
    }
    lines.join("\n")
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let command = match &cli.command {
        Command::State(_) => "state",
        Command::Witness(WitnessCmd::Build { .. }) => "witness build",
        Command::Witness(WitnessCmd::Eval { .. }) => "witness eval",
        Command::Lambda { .. } => "lambda",
        Command::Potential(PotentialCmd::Cd { .. }) => "potential cd",
        Command::Potential(PotentialCmd::Bs { .. }) => "potential bs",
        Command::Potential(PotentialCmd::Schmidt { .. }) => "potential schmidt",
        Command::Multi(MultiCmd::Recipe { .. }) => "multi recipe",
        Command::Multi(MultiCmd::Classify { .. }) => "multi classify",
        Command::Multi(MultiCmd::Qutrit { .. }) => "multi qutrit",
        Command::Reproduce { .. } => "reproduce",
    };
    let mut ctx = Ctx { command: command.to_string(), seed: cli.seed, inputs: Vec::new(), start: Instant::now() };
    match cli.command {
        Command::State(a) => cmd_state(&mut ctx, a)?,
        Command::Witness(w) => cmd_witness(&mut ctx, w)?,
        Command::Lambda { observable, family, numeric } => cmd_lambda(&mut ctx, &observable, &family, numeric)?,
        Command::Potential(p) => cmd_potential(&mut ctx, p)?,
        Command::Multi(m) => cmd_multi(&mut ctx, m)?,
        Command::Reproduce { only, json } => {
            let report = reproduce(ctx.seed, only.as_deref())?;
            let passed = report.passed;
            if json {
                ctx.emit(&report)?;
            } else {
                say(&table(&report))?;
            }
            return Ok(passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_ACCEPTANCE),
        Err(e) => {
            eprintln!("error: {e:#}");
            let numeric = e.downcast_ref::<Error>().is_some_and(Error::is_numeric_guard);
            ExitCode::from(if numeric { EXIT_NUMERIC } else { EXIT_VALIDATION })
        }
    }
}
