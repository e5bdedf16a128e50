//! `cohenmv`: build, decode, verify and render blockchain matrices, run
//! surgery and exact-pair constructions, and decide sentences of the
//! existential theory.
//!
//! Exit status is 0 on success, 1 when a verifier or decoder found a
//! violation, and 2 when the command could not run.

mod io;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use cohenmv_core::blockchain::{self, BlockchainResult, BuildOptions};
use cohenmv_core::gen::{self, ScheduleShape};
use cohenmv_core::theory::{
    check_star_embedding, decide_with_bound, downset_embedding, parse_sentence, FinitePoset,
    ObstacleFamily, Verdict,
};
use cohenmv_core::{
    build_exact_pair, build_exact_partner, build_mutable_blockchain, graft, immunize, prime,
    render_blockchain, render_matrix, render_primed, substitute, verify_exact_pair,
    verify_mutable, BitString, ExactPairResult, FiniteName, IndexSet, MatrixCondition,
    MutableBlockchain, PrimedFamily, Registry, RenderFormat, Report, RequirementSchedule,
    RequirementSpec, Tower,
};

use io::{emit, load, parse_bits, parse_list, Failure};

#[derive(Parser)]
#[command(name = "cohenmv", version, about = "Generic objects for binary-string Cohen forcing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a blockchain matrix.
    #[command(subcommand)]
    Build(BuildCommand),
    /// Read the payload coded across a set of columns.
    Decode(DecodeArgs),
    /// Re-check a built blockchain.
    Verify(VerifyArgs),
    #[command(subcommand)]
    Surgery(SurgeryCommand),
    #[command(subcommand)]
    Exactpair(ExactCommand),
    #[command(subcommand)]
    Theory(TheoryCommand),
    /// Draw a matrix, a built blockchain or a primed family.
    Render(RenderArgs),
}

#[derive(Subcommand)]
enum BuildCommand {
    /// Two columns, payload coded after every dense step.
    Pair(BuildArgs),
    /// Columns 0..=l with a subset-closed family.
    Mostowski(BuildArgs),
    /// Any obstacle family, with obstacle and separation steps.
    General(BuildArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Schedule JSON, inline or a file. Without it a schedule is drawn from --seed.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long, default_value = "")]
    payload: String,
    /// Obstacle family JSON such as '{"I":[0,1,2],"B":[[0,1]]}', inline or a file.
    #[arg(long)]
    obstacles: Option<String>,
    /// Bits per bounded search in separation steps.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Steps in a drawn schedule; defaults to the payload length, or 20 for general builds.
    #[arg(long)]
    steps: Option<usize>,
    /// Size of a drawn family when --obstacles is absent.
    #[arg(long, default_value_t = 4)]
    columns: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    /// A build result, or a bare matrix together with --obstacles.
    #[arg(long)]
    matrix: String,
    #[arg(long)]
    columns: String,
    #[arg(long)]
    obstacles: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, alias = "result")]
    matrix: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Svg,
}

impl From<Format> for RenderFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Ascii => RenderFormat::Ascii,
            Format::Svg => RenderFormat::Svg,
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, alias = "input")]
    matrix: String,
    #[arg(long, value_enum, default_value_t = Format::Ascii)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SurgeryCommand {
    /// Replace the bits of f at the given positions by g.
    Graft {
        #[arg(long)]
        f: String,
        #[arg(long, default_value = "")]
        g: String,
        #[arg(long, default_value = "")]
        positions: String,
    },
    /// Extend p so that every change to its own bits stays in the requirement.
    Immunize {
        #[arg(long, default_value = "")]
        p: String,
        /// Requirement JSON such as '{"kind":"min_length","n":2}'.
        #[arg(long)]
        requirement: String,
        #[arg(long, default_value_t = 0)]
        column: usize,
    },
    /// Prime comma-separated reals against y.
    Prime {
        #[arg(long)]
        xs: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Graft z onto x at the coding positions of y.
    Substitute {
        #[arg(long)]
        x: String,
        #[arg(long, default_value = "")]
        z: String,
        #[arg(long)]
        y: String,
    },
    /// Build the mutable blockchain on n columns from seeded rows.
    Mutable {
        #[arg(long)]
        n: usize,
        /// Family over 0..n; defaults to the one whose only obstacle is every column.
        #[arg(long)]
        obstacles: Option<String>,
        #[arg(long, default_value = "")]
        payload: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check the decode contract of a mutable blockchain bundle.
    Verify {
        #[arg(long)]
        input: String,
    },
}

#[derive(Args)]
struct ExactArgs {
    /// Tower JSON, or a matrix whose columns are the tower. Give --tower,
    /// --dense and --names together, or none of them to draw an instance from --seed.
    #[arg(long)]
    tower: Option<String>,
    /// Schedule of dense steps.
    #[arg(long)]
    dense: Option<String>,
    /// Array of [sigma, tau] name pairs.
    #[arg(long)]
    names: Option<String>,
    #[arg(short = 'K', long = "horizon", default_value_t = 8)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tower columns in a drawn instance.
    #[arg(long, default_value_t = 3)]
    columns: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExactCommand {
    Build(ExactArgs),
    /// Build d1 against a given upper bound d0 (default: the tower's own matrix).
    Partner {
        #[command(flatten)]
        args: ExactArgs,
        #[arg(long)]
        d0: Option<String>,
    },
    Verify {
        #[arg(long)]
        input: String,
    },
}

#[derive(Subcommand)]
enum TheoryCommand {
    /// Decide an existential sentence, e.g. "EXISTS x0,x1 : NOT A(x0,x1)".
    Decide {
        sentence: String,
        #[arg(long, default_value_t = 4)]
        max_variables: usize,
    },
    /// Represent a bottomed poset as a family of column sets.
    Embed {
        #[arg(long)]
        poset: String,
    },
    /// Check a map between posets, given as {"source": "target", ...}.
    CheckEmbedding {
        #[arg(long)]
        poset: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        map: String,
    },
}

#[derive(Serialize, Deserialize)]
struct MutableBundle {
    family: ObstacleFamily,
    payload: BitString,
    blockchain: MutableBlockchain,
}

#[derive(Serialize, Deserialize)]
struct ExactBundle {
    tower: Tower,
    dense: RequirementSchedule,
    names: Vec<(FiniteName, FiniteName)>,
    horizon: usize,
    result: ExactPairResult,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn report_outcome(report: &Report, out: Option<&PathBuf>) -> Result<(), Failure> {
    emit(out, &format!("{report}\n"))?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verify(String::new()))
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Build(b) => build(b),
        Command::Decode(a) => decode(a),
        Command::Verify(a) => {
            let result: BlockchainResult = load(&a.matrix, "build result")?;
            report_outcome(&blockchain::verify_generic(&result, &Registry::default()), a.out.as_ref())
        }
        Command::Surgery(s) => surgery(s),
        Command::Exactpair(e) => exact(e),
        Command::Theory(t) => theory(t),
        Command::Render(a) => render(a),
    }
}

fn build(cmd: BuildCommand) -> Result<(), Failure> {
    let (kind, a) = match cmd {
        BuildCommand::Pair(a) => ("pair", a),
        BuildCommand::Mostowski(a) => ("mostowski", a),
        BuildCommand::General(a) => ("general", a),
    };
    let payload = parse_bits(&a.payload)?;
    let mut rng = gen::rng(a.seed);
    let opts = BuildOptions {
        depth: a.depth,
        ..BuildOptions::default()
    };
    let family = |rng: &mut _| -> Result<ObstacleFamily, Failure> {
        match &a.obstacles {
            Some(text) => load(text, "obstacle family"),
            None => Ok(gen::random_family(rng, a.columns, 4)),
        }
    };
    let given: Option<RequirementSchedule> = a.schedule.as_deref().map(|s| load(s, "schedule")).transpose()?;
    let result = match kind {
        "pair" => {
            let schedule = given.unwrap_or_else(|| gen::random_pair_schedule(&mut rng, a.steps.unwrap_or(payload.len())));
            blockchain::build_pair(&schedule, &payload, &opts)?
        }
        "mostowski" => {
            let fam = family(&mut rng)?;
            let schedule = given
                .unwrap_or_else(|| gen::random_mostowski_schedule(&mut rng, &fam, a.steps.unwrap_or(payload.len())));
            blockchain::build_mostowski(&fam, &schedule, &payload, &opts)?
        }
        _ => {
            let fam = family(&mut rng)?;
            let schedule = given.unwrap_or_else(|| {
                let shape = ScheduleShape {
                    steps: a.steps.unwrap_or(20),
                    payload_len: payload.len(),
                    separation_percent: 10,
                };
                gen::random_schedule(&mut rng, &fam, shape)
            });
            blockchain::build_general(&fam, &schedule, &payload, &opts)?
        }
    };
    emit(a.out.as_ref(), &io::canonical(&result)?)
}

fn decode(a: DecodeArgs) -> Result<(), Failure> {
    let value: serde_json::Value = load(&a.matrix, "matrix")?;
    let columns: IndexSet = parse_list(&a.columns)?.into_iter().collect();
    let (matrix, family) = if value.get("family").is_some() {
        let r: BlockchainResult = io::from_value(value, "build result")?;
        (r.matrix, r.family)
    } else {
        let m: MatrixCondition = io::from_value(value, "matrix")?;
        let Some(text) = &a.obstacles else {
            return Err(Failure::Usage("a bare matrix needs --obstacles".into()));
        };
        (m, load(text, "obstacle family")?)
    };
    let bits = blockchain::decode(&matrix, &columns, &family)?;
    emit(None, &format!("{bits}\n"))
}

fn render(a: RenderArgs) -> Result<(), Failure> {
    let value: serde_json::Value = load(&a.matrix, "render input")?;
    let format = a.format.into();
    let text = if value.get("step_log").is_some() {
        render_blockchain(&io::from_value(value, "build result")?, format)?
    } else if value.get("reference").is_some() {
        render_primed(&io::from_value::<PrimedFamily>(value, "primed family")?, format)?
    } else {
        render_matrix(&io::from_value(value, "matrix")?, format)?
    };
    emit(a.out.as_ref(), &text)
}

fn surgery(cmd: SurgeryCommand) -> Result<(), Failure> {
    match cmd {
        SurgeryCommand::Graft { f, g, positions } => {
            let out = graft(&parse_bits(&f)?, &parse_bits(&g)?, &parse_list(&positions)?)?;
            emit(None, &format!("{out}\n"))
        }
        SurgeryCommand::Immunize { p, requirement, column } => {
            let spec: RequirementSpec = load(&requirement, "requirement")?;
            let d = spec.instantiate(&IndexSet::from([column]), &Registry::default())?;
            emit(None, &format!("{}\n", immunize(&parse_bits(&p)?, &d)?))
        }
        SurgeryCommand::Prime { xs, y, out } => {
            let xs = xs.split(',').map(parse_bits).collect::<Result<Vec<_>, _>>()?;
            emit(out.as_ref(), &io::canonical(&prime(&xs, &parse_bits(&y)?)?)?)
        }
        SurgeryCommand::Substitute { x, z, y } => {
            let out = substitute(&parse_bits(&x)?, &parse_bits(&z)?, &parse_bits(&y)?);
            emit(None, &format!("{out}\n"))
        }
        SurgeryCommand::Mutable { n, obstacles, payload, seed, out } => {
            let family = match obstacles {
                Some(text) => load(&text, "obstacle family")?,
                None => ObstacleFamily::new(IndexSet::range(n), if n >= 2 { vec![IndexSet::range(n)] } else { vec![] })?,
            };
            let payload = parse_bits(&payload)?;
            let rows = gen::random_mutable_rows(&mut gen::rng(seed), n, payload.len());
            let blockchain = build_mutable_blockchain(n, &rows, &family, &payload)?;
            emit(out.as_ref(), &io::canonical(&MutableBundle { family, payload, blockchain })?)
        }
        SurgeryCommand::Verify { input } => {
            let b: MutableBundle = load(&input, "mutable blockchain bundle")?;
            report_outcome(&verify_mutable(&b.blockchain, &b.family, &b.payload), None)
        }
    }
}

struct ExactInputs {
    tower: Tower,
    dense: RequirementSchedule,
    names: Vec<(FiniteName, FiniteName)>,
}

fn exact_inputs(a: &ExactArgs) -> Result<ExactInputs, Failure> {
    match (&a.tower, &a.dense, &a.names) {
        (Some(t), Some(d), Some(n)) => {
            let value: serde_json::Value = load(t, "tower")?;
            let tower = if value.get("columns").is_some_and(|c| c.is_array()) {
                io::from_value(value, "tower")?
            } else {
                cohenmv_core::tower_from_matrix(&io::from_value(value, "tower matrix")?)?
            };
            Ok(ExactInputs {
                tower,
                dense: load(d, "dense schedule")?,
                names: load(n, "name pairs")?,
            })
        }
        (None, None, None) => {
            let inst = gen::random_exact_instance(&mut gen::rng(a.seed), a.columns, 20, 10, a.horizon)?;
            Ok(ExactInputs {
                tower: inst.tower,
                dense: RequirementSchedule::new(
                    inst.dense
                        .into_iter()
                        .map(|(columns, requirement)| cohenmv_core::ScheduleStep::Dense { columns, requirement })
                        .collect(),
                ),
                names: inst.pairs,
            })
        }
        _ => Err(Failure::Usage("give --tower, --dense and --names together, or none of them".into())),
    }
}

fn exact(cmd: ExactCommand) -> Result<(), Failure> {
    let finish = |inputs: ExactInputs, horizon: usize, result: ExactPairResult, out: Option<&PathBuf>| {
        let bundle = ExactBundle {
            tower: inputs.tower,
            dense: inputs.dense,
            names: inputs.names,
            horizon,
            result,
        };
        emit(out, &io::canonical(&bundle)?)
    };
    match cmd {
        ExactCommand::Build(a) => {
            let inputs = exact_inputs(&a)?;
            let family = dense_family(&inputs.dense)?;
            let result = build_exact_pair(&inputs.tower, &family, &inputs.names, a.horizon)?;
            finish(inputs, a.horizon, result, a.out.as_ref())
        }
        ExactCommand::Partner { args: a, d0 } => {
            let inputs = exact_inputs(&a)?;
            let family = dense_family(&inputs.dense)?;
            let d0 = match d0 {
                Some(text) => load(&text, "d0 matrix")?,
                None => inputs.tower.as_matrix(),
            };
            let result = build_exact_partner(&inputs.tower, &d0, &family, &inputs.names, a.horizon)?;
            finish(inputs, a.horizon, result, a.out.as_ref())
        }
        ExactCommand::Verify { input } => {
            let b: ExactBundle = load(&input, "exact pair bundle")?;
            let family = dense_family(&b.dense)?;
            report_outcome(&verify_exact_pair(&b.result, &b.tower, &family, &b.names, b.horizon), None)
        }
    }
}

fn dense_family(schedule: &RequirementSchedule) -> Result<Vec<cohenmv_core::DenseRequirement>, Failure> {
    let registry = Registry::default();
    schedule
        .dense_pairs()
        .iter()
        .map(|(c, s)| s.instantiate(c, &registry).map_err(Failure::from))
        .collect()
}

fn theory(cmd: TheoryCommand) -> Result<(), Failure> {
    match cmd {
        TheoryCommand::Decide { sentence, max_variables } => {
            let s = parse_sentence(&sentence)?;
            match decide_with_bound(&s, max_variables)? {
                Verdict::Unsat => emit(None, "UNSAT\n"),
                Verdict::Sat { witness } => emit(None, &format!("SAT\n{}", io::canonical(&witness)?)),
            }
        }
        TheoryCommand::Embed { poset } => {
            let p: FinitePoset = load(&poset, "poset")?;
            let e = downset_embedding(&p)?;
            let (q, _, f) = e.target()?;
            let report = check_star_embedding(&f, &p, &q)?;
            let images: BTreeMap<&str, &IndexSet> = e.named_images(&p);
            let out = serde_json::json!({
                "family": serde_json::to_value(&e.family).map_err(io::json_failure)?,
                "images": serde_json::to_value(&images).map_err(io::json_failure)?,
                "report": serde_json::to_value(&report).map_err(io::json_failure)?,
            });
            emit(None, &io::canonical(&out)?)?;
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Verify("not a *-embedding".into()))
            }
        }
        TheoryCommand::CheckEmbedding { poset, target, map } => {
            let p: FinitePoset = load(&poset, "poset")?;
            let q: FinitePoset = load(&target, "target poset")?;
            let m: BTreeMap<String, String> = load(&map, "map")?;
            let f = p
                .names()
                .iter()
                .map(|name| {
                    let image = m
                        .get(name)
                        .ok_or_else(|| Failure::Usage(format!("map has no image for `{name}`")))?;
                    q.index_of(image)
                        .ok_or_else(|| Failure::Usage(format!("`{image}` is not an element of the target")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let report = check_star_embedding(&f, &p, &q)?;
            emit(None, &io::canonical(&report)?)?;
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Verify("not a *-embedding".into()))
            }
        }
    }
}
