//! Command-line front end for the `prefsem` library: train self-organising
//! maps, check strict / defeasible / graded queries against models built
//! from maps, networks, or model files, and extract weighted knowledge
//! bases from networks while verifying coherence.
//!
//! Exit codes form the command's contract:
//!
//! * `0` — success; every checked property holds.
//! * `1` — the run finished but a checked property fails.
//! * `2` — malformed input: unreadable files, parse errors, bad flags.
//! * `3` — name or shape errors: unknown concepts, units or categories,
//!   dimension mismatches.
//! * `4` — a recurrent network reached no stationary state on some stimulus.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use prefsem::fuzzy::{check_fuzzy_inclusion, FuzzyError, FuzzyLogic, FuzzyModel};
use prefsem::kb::{check_coherence, extract_kb, KbError};
use prefsem::model::{ModelError, MultiPrefModel, TypicalityMode};
use prefsem::network::{
    build_fuzzy_model, build_fuzzy_model_rescaling_tanh, build_two_valued_model, FixpointConfig,
    Network, NetworkError,
};
use prefsem::snapshot::{
    self, ModelSnapshot, NetworkSnapshot, SnapshotError, SomSnapshot,
};
use prefsem::som::{
    build_som_model, check_category_inclusion, quantization_error, random_initial_map, train_map,
    CategoryGeometry, SomError, SomMap, SomModel, TrainingConfig,
};
use prefsem::syntax::{parse_query, render_kb, Axiom, Concept, ParseError};

/// In text output, cap how many counterexamples or violations one line lists.
const MAX_LISTED: usize = 12;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((code, text)) => {
            // One buffered write; a closed pipe (`prefsem ... | head`) is
            // not an error.
            let mut stdout = io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            let _ = stdout.flush();
            ExitCode::from(code)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

// ---- command line -----------------------------------------------------------

/// Build preferential models of trained networks and check conditional
/// queries against them.
#[derive(Parser)]
#[command(name = "prefsem", version, about)]
struct Cli {
    /// Fuzzy logic for graded connectives: goedel, product, or lukasiewicz.
    #[arg(long, global = true, default_value = "goedel", value_parser = parse_logic)]
    logic: FuzzyLogic,

    /// Tolerance for comparing scores, degrees, weights, and thresholds.
    #[arg(long, global = true, default_value_t = prefsem::DEFAULT_EPSILON)]
    epsilon: f64,

    /// Activation cut: an element belongs to a unit's concept when the
    /// unit's value exceeds this.
    #[arg(long, global = true, default_value_t = 0.0)]
    threshold: f64,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a rectangular map on labelled stimuli and save it as JSON.
    TrainSom(TrainSomArgs),
    /// Check query axioms against a model built from a map, a network, or a
    /// model file.
    Check(CheckArgs),
    /// Extract a weighted knowledge base from a network, save it, and verify
    /// that the network's fuzzy model ranks stimuli the way the extracted
    /// weights do.
    ExtractVerify(ExtractVerifyArgs),
}

#[derive(Args)]
struct TrainSomArgs {
    /// Labelled training data: one `label, x1, x2, ...` row per stimulus.
    data: PathBuf,

    /// Grid shape, e.g. `10x10`.
    #[arg(long, default_value = "10x10")]
    grid: String,

    /// Training epochs.
    #[arg(long, default_value_t = 50)]
    epochs: usize,

    /// Seed for the deterministic generator; equal seeds give
    /// byte-identical maps.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Initial learning rate (default 0.5).
    #[arg(long)]
    rate: Option<f64>,

    /// Initial neighbourhood radius (default: half the longer grid side).
    #[arg(long)]
    radius: Option<f64>,

    /// Where to write the trained map.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
#[command(group = ArgGroup::new("source").required(true).args(["som", "network", "model"]))]
struct CheckArgs {
    /// Query file: one axiom per line, `#` comments allowed.
    #[arg(long)]
    query: PathBuf,

    /// A trained map (needs --data).
    #[arg(long, requires = "data")]
    som: Option<PathBuf>,

    /// Labelled stimuli defining the map's categories.
    #[arg(long, requires = "som")]
    data: Option<PathBuf>,

    /// Extra unlabelled rows to adjoin to a map's domain.
    #[arg(long, requires = "som")]
    probes: Option<PathBuf>,

    /// A network file (needs --stimuli).
    #[arg(long, requires = "stimuli")]
    network: Option<PathBuf>,

    /// Stimulus rows fed to the network; row i becomes element `si`.
    #[arg(long, requires = "network")]
    stimuli: Option<PathBuf>,

    /// Comma-separated units that get preference relations
    /// (default: every non-input unit).
    #[arg(long, value_delimiter = ',', requires = "network")]
    focus: Option<Vec<String>>,

    /// Map `tanh`-family activations onto [0, 1] when building the fuzzy
    /// model for graded axioms.
    #[arg(long, requires = "network")]
    rescale_tanh: bool,

    /// A model file, as written by the library's model snapshots.
    #[arg(long)]
    model: Option<PathBuf>,

    /// How `T(...)` picks its preference order.
    #[arg(long, value_enum, default_value_t = TypicalityArg::Auto)]
    typicality: TypicalityArg,
}

#[derive(Args)]
struct ExtractVerifyArgs {
    /// The network file.
    #[arg(long)]
    network: PathBuf,

    /// Stimulus rows the coherence check ranges over; row i becomes
    /// element `si`.
    #[arg(long)]
    stimuli: PathBuf,

    /// Comma-separated units to extract blocks for
    /// (default: every non-input unit).
    #[arg(long, value_delimiter = ',')]
    focus: Option<Vec<String>>,

    /// Map `tanh`-family activations onto [0, 1] when building the fuzzy
    /// model.
    #[arg(long)]
    rescale_tanh: bool,

    /// Where to write the knowledge-base text.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Human-readable lines.
    Text,
    /// A single JSON document on stdout.
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TypicalityArg {
    /// Per-concept for atomic arguments; global when any `T(...)` argument
    /// is compound.
    Auto,
    /// Always the argument concept's own preference relation.
    PerConcept,
    /// Always the combined global order.
    Global,
}

fn parse_logic(name: &str) -> Result<FuzzyLogic, String> {
    FuzzyLogic::from_name(name)
        .ok_or_else(|| format!("unknown logic `{name}` (want goedel, product, or lukasiewicz)"))
}

// ---- failures and exit codes --------------------------------------------------

/// A diagnostic plus the process exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn model_code(e: &ModelError) -> u8 {
    match e {
        ModelError::UnknownConcept(_)
        | ModelError::UnknownRole(_)
        | ModelError::UnknownIndividual(_)
        | ModelError::NotDistinguished(_) => 3,
        _ => 2,
    }
}

fn fuzzy_code(e: &FuzzyError) -> u8 {
    match e {
        FuzzyError::UnknownConcept(_) => 3,
        FuzzyError::Preference(inner) => model_code(inner),
        _ => 2,
    }
}

fn network_code(e: &NetworkError) -> u8 {
    match e {
        NetworkError::AtRow { source, .. } => network_code(source),
        NetworkError::NoStationaryState { .. } => 4,
        NetworkError::UnknownUnit(_) | NetworkError::DimensionMismatch { .. } => 3,
        NetworkError::Model(inner) => model_code(inner),
        _ => 2,
    }
}

fn som_code(e: &SomError) -> u8 {
    match e {
        SomError::DimensionMismatch { .. } | SomError::UnknownCategory(_) => 3,
        SomError::Model(inner) => model_code(inner),
        _ => 2,
    }
}

fn kb_code(e: &KbError) -> u8 {
    match e {
        KbError::UnknownUnit(_) | KbError::NoBlock(_) => 3,
        KbError::Model(inner) => model_code(inner),
        KbError::Fuzzy(inner) => fuzzy_code(inner),
        _ => 2,
    }
}

fn snapshot_code(e: &SnapshotError) -> u8 {
    match e {
        SnapshotError::Som(inner) => som_code(inner),
        SnapshotError::Network(inner) => network_code(inner),
        SnapshotError::Model(inner) => model_code(inner),
        SnapshotError::Fuzzy(inner) => fuzzy_code(inner),
        _ => 2,
    }
}

macro_rules! classify {
    ($($ty:ty => $code:expr),* $(,)?) => {$(
        impl From<$ty> for Failure {
            fn from(e: $ty) -> Self {
                #[allow(clippy::redundant_closure_call)]
                Failure::new(($code)(&e), e.to_string())
            }
        }
    )*};
}

classify! {
    ModelError => model_code,
    FuzzyError => fuzzy_code,
    NetworkError => network_code,
    SomError => som_code,
    KbError => kb_code,
    SnapshotError => snapshot_code,
    ParseError => |_: &ParseError| 2,
    std::io::Error => |_: &std::io::Error| 2,
    serde_json::Error => |_: &serde_json::Error| 2,
}

// ---- dispatch ---------------------------------------------------------------

/// Flags shared by every subcommand.
struct Common {
    logic: FuzzyLogic,
    epsilon: f64,
    threshold: f64,
    format: OutputFormat,
}

/// Run one subcommand; on success, the exit code plus the full stdout text.
fn run(cli: Cli) -> Result<(u8, String), Failure> {
    let Cli {
        logic,
        epsilon,
        threshold,
        format,
        command,
    } = cli;
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Failure::new(2, "--epsilon must be finite and non-negative"));
    }
    if !threshold.is_finite() {
        return Err(Failure::new(2, "--threshold must be finite"));
    }
    let common = Common {
        logic,
        epsilon,
        threshold,
        format,
    };
    match command {
        Command::TrainSom(args) => run_train_som(&common, args),
        Command::Check(args) => run_check(&common, args),
        Command::ExtractVerify(args) => run_extract_verify(&common, args),
    }
}

// ---- train-som ---------------------------------------------------------------

#[derive(Serialize)]
struct CategorySummary {
    name: String,
    /// Best-matching units as grid coordinates `rRcC`.
    bmus: Vec<String>,
    max_distance: f64,
}

#[derive(Serialize)]
struct TrainReport {
    rows: usize,
    cols: usize,
    epochs: usize,
    seed: u64,
    stimuli: usize,
    quantization_error_before: f64,
    quantization_error_after: f64,
    categories: Vec<CategorySummary>,
    output: String,
}

fn parse_grid(text: &str) -> Result<(usize, usize), Failure> {
    if let Some((rows, cols)) = text.split_once('x') {
        if let (Ok(rows), Ok(cols)) = (rows.trim().parse(), cols.trim().parse()) {
            if rows > 0 && cols > 0 {
                return Ok((rows, cols));
            }
        }
    }
    Err(Failure::new(
        2,
        format!("grid `{text}` is not of the form ROWSxCOLS, e.g. `10x10`"),
    ))
}

fn run_train_som(common: &Common, args: TrainSomArgs) -> Result<(u8, String), Failure> {
    let (rows, cols) = parse_grid(&args.grid)?;
    let data = snapshot::read_labeled_csv(&args.data)?;

    let mut config = TrainingConfig::for_grid(rows, cols, args.epochs, args.seed);
    if let Some(rate) = args.rate {
        config.initial_learning_rate = rate;
    }
    if let Some(radius) = args.radius {
        config.initial_radius = radius;
        let epochs = (args.epochs as f64).max(1.0);
        config.radius_time_constant = if radius > 1.0 {
            epochs / radius.ln()
        } else {
            epochs
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut map = random_initial_map(rows, cols, &data, &mut rng)?;
    let before = quantization_error(&map, &data);
    train_map(&mut map, &data, &config, &mut rng)?;
    let after = quantization_error(&map, &data);

    let categories: Vec<CategorySummary> = data
        .categories()
        .iter()
        .map(|cat| {
            let geometry = CategoryGeometry::of(&map, cat);
            CategorySummary {
                name: cat.name.clone(),
                bmus: geometry
                    .bmus
                    .iter()
                    .map(|&unit| {
                        let (r, c) = map.position(unit);
                        format!("r{r}c{c}")
                    })
                    .collect(),
                max_distance: geometry.max_distance,
            }
        })
        .collect();

    snapshot::write_json(&args.output, &SomSnapshot::from(&map))?;

    let report = TrainReport {
        rows,
        cols,
        epochs: args.epochs,
        seed: args.seed,
        stimuli: data.all_stimuli().count(),
        quantization_error_before: before,
        quantization_error_after: after,
        categories,
        output: args.output.display().to_string(),
    };
    let mut out = String::new();
    match common.format {
        OutputFormat::Structured => out = json_document(&report)?,
        OutputFormat::Text => {
            let _ = writeln!(
                out,
                "trained a {rows}x{cols} map on {} stimuli in {} categories ({} epochs, seed {})",
                report.stimuli,
                report.categories.len(),
                report.epochs,
                report.seed
            );
            let _ = writeln!(out, "quantization error: {before:.6} -> {after:.6}");
            for cat in &report.categories {
                let _ = writeln!(
                    out,
                    "{}: bmus {} (max distance {:.6})",
                    cat.name,
                    cat.bmus.join(" "),
                    cat.max_distance
                );
            }
            let _ = writeln!(out, "wrote map to {}", report.output);
        }
    }
    Ok((0, out))
}

// ---- check --------------------------------------------------------------------

#[derive(Serialize)]
struct Counterexample {
    element: String,
    /// The implication value for graded axioms; absent for two-valued ones.
    value: Option<f64>,
}

#[derive(Serialize)]
struct Statistic {
    value: f64,
    cut: f64,
    holds: bool,
}

#[derive(Serialize)]
struct AxiomReport {
    axiom: String,
    holds: bool,
    counterexamples: Vec<Counterexample>,
    /// The infimum of the implication values, for graded axioms.
    infimum: Option<f64>,
    /// The relative-distance summary for category-to-category inclusions
    /// over a map.
    statistic: Option<Statistic>,
}

#[derive(Serialize)]
struct CheckOutput {
    axioms: Vec<AxiomReport>,
    total: usize,
    holding: usize,
    all_hold: bool,
}

/// One loaded query source: a plain two-valued model (optionally with a
/// fuzzy companion for graded axioms) or a map model with its category
/// geometry.
enum Checker {
    Plain {
        two: MultiPrefModel,
        fuzzy: Option<FuzzyModel>,
    },
    Som(Box<SomModel>),
}

impl Checker {
    fn two(&self) -> &MultiPrefModel {
        match self {
            Checker::Plain { two, .. } => two,
            Checker::Som(som) => &som.model,
        }
    }

    fn two_mut(&mut self) -> &mut MultiPrefModel {
        match self {
            Checker::Plain { two, .. } => two,
            Checker::Som(som) => &mut som.model,
        }
    }

    fn fuzzy(&self) -> Option<&FuzzyModel> {
        match self {
            Checker::Plain { fuzzy, .. } => fuzzy.as_ref(),
            Checker::Som(_) => None,
        }
    }

    fn som(&self) -> Option<&SomModel> {
        match self {
            Checker::Plain { .. } => None,
            Checker::Som(som) => Some(som),
        }
    }
}

/// Does the axiom mention `T(...)` over a compound argument, forcing the
/// global order?
fn needs_global(axiom: &Axiom) -> bool {
    match axiom {
        Axiom::Strict { lhs, rhs }
        | Axiom::Typicality { lhs, rhs, .. }
        | Axiom::Fuzzy { lhs, rhs, .. } => lhs.has_compound_typ() || rhs.has_compound_typ(),
        Axiom::Assertion { concept, .. } => concept.has_compound_typ(),
    }
}

fn resolve_mode(arg: TypicalityArg, axiom: &Axiom) -> TypicalityMode {
    match arg {
        TypicalityArg::PerConcept => TypicalityMode::PerConcept,
        TypicalityArg::Global => TypicalityMode::Global,
        TypicalityArg::Auto => {
            if needs_global(axiom) {
                TypicalityMode::Global
            } else {
                TypicalityMode::PerConcept
            }
        }
    }
}

fn non_input_names(network: &Network) -> Vec<String> {
    network
        .units()
        .iter()
        .enumerate()
        .filter(|&(id, _)| !network.is_input(id))
        .map(|(_, unit)| unit.name.clone())
        .collect()
}

fn load_checker(common: &Common, args: &CheckArgs, wants_fuzzy: bool) -> Result<Checker, Failure> {
    if let Some(som_path) = &args.som {
        if wants_fuzzy {
            return Err(Failure::new(
                2,
                "graded axioms need membership degrees; a map model is two-valued \
                 (check them against a network or a model file instead)",
            ));
        }
        let snap: SomSnapshot = snapshot::read_json(som_path)?;
        let map = SomMap::try_from(snap)?;
        let data = snapshot::read_labeled_csv(args.data.as_ref().expect("clap ties --data to --som"))?;
        let probes = match &args.probes {
            Some(path) => snapshot::read_row_csv(path)?,
            None => Vec::new(),
        };
        let som = build_som_model(&map, &data, &probes, common.epsilon)?;
        return Ok(Checker::Som(Box::new(som)));
    }

    if let Some(net_path) = &args.network {
        let snap: NetworkSnapshot = snapshot::read_json(net_path)?;
        let network = Network::try_from(snap)?;
        let stimuli =
            snapshot::read_row_csv(args.stimuli.as_ref().expect("clap ties --stimuli to --network"))?;
        let focus = match &args.focus {
            Some(units) => units.clone(),
            None => non_input_names(&network),
        };
        let cfg = FixpointConfig::default();
        let two = build_two_valued_model(
            &network,
            &stimuli,
            &focus,
            common.threshold,
            common.epsilon,
            &cfg,
        )?;
        let fuzzy = if wants_fuzzy {
            Some(if args.rescale_tanh {
                build_fuzzy_model_rescaling_tanh(&network, &stimuli, &cfg)?
            } else {
                build_fuzzy_model(&network, &stimuli, &cfg)?
            })
        } else {
            None
        };
        return Ok(Checker::Plain { two, fuzzy });
    }

    let model_path = args.model.as_ref().expect("clap requires one source");
    let snap: ModelSnapshot = snapshot::read_json(model_path)?;
    let two = snap.to_model(common.threshold, common.epsilon)?;
    let fuzzy = if wants_fuzzy {
        Some(snap.to_fuzzy()?)
    } else {
        None
    };
    Ok(Checker::Plain { two, fuzzy })
}

fn element_labels(model: &MultiPrefModel, ids: &[usize]) -> Vec<Counterexample> {
    ids.iter()
        .map(|&x| Counterexample {
            element: model.label(x).to_string(),
            value: None,
        })
        .collect()
}

/// For `T(A) <= B` over a map with categories `A` and `B`, model-check the
/// inclusion and report the relative-distance statistic alongside.
fn som_category_report(
    som: &SomModel,
    axiom: &Axiom,
    mode: TypicalityMode,
    epsilon: f64,
) -> Result<Option<AxiomReport>, Failure> {
    if mode != TypicalityMode::PerConcept {
        return Ok(None);
    }
    let Axiom::Typicality {
        lhs: Concept::Typ(inner),
        rhs: Concept::Atomic(rhs),
        weight: None,
    } = axiom
    else {
        return Ok(None);
    };
    let Concept::Atomic(lhs) = &**inner else {
        return Ok(None);
    };
    if !som.bmu_elements.contains_key(lhs) || !som.bmu_elements.contains_key(rhs) {
        return Ok(None);
    }
    let check = check_category_inclusion(som, lhs, rhs, epsilon)?;
    Ok(Some(AxiomReport {
        axiom: axiom.to_string(),
        holds: check.report.holds,
        counterexamples: element_labels(&som.model, &check.report.counterexamples),
        infimum: None,
        statistic: Some(Statistic {
            value: check.statistic,
            cut: check.statistic_threshold,
            holds: check.statistic_holds,
        }),
    }))
}

fn run_check(common: &Common, args: CheckArgs) -> Result<(u8, String), Failure> {
    let text = fs::read_to_string(&args.query)
        .map_err(|e| Failure::new(2, format!("{}: {e}", args.query.display())))?;
    let axioms = parse_query(&text)?;
    if axioms.is_empty() {
        return Err(Failure::new(
            2,
            format!("{}: the query file has no axioms", args.query.display()),
        ));
    }

    let wants_fuzzy = axioms.iter().any(|a| matches!(a, Axiom::Fuzzy { .. }));
    let mut checker = load_checker(common, &args, wants_fuzzy)?;

    if axioms
        .iter()
        .any(|a| resolve_mode(args.typicality, a) == TypicalityMode::Global)
    {
        checker.two_mut().combine_global()?;
    }

    let mut reports = Vec::with_capacity(axioms.len());
    for axiom in &axioms {
        let mode = resolve_mode(args.typicality, axiom);
        let report = if let Axiom::Fuzzy { .. } = axiom {
            let fuzzy = checker.fuzzy().expect("built for graded axioms");
            let check = check_fuzzy_inclusion(fuzzy, axiom, common.logic, common.epsilon)?;
            AxiomReport {
                axiom: axiom.to_string(),
                holds: check.holds,
                counterexamples: check
                    .counterexamples
                    .iter()
                    .map(|&(x, value)| Counterexample {
                        element: fuzzy.label(x).to_string(),
                        value: Some(value),
                    })
                    .collect(),
                infimum: Some(check.infimum),
                statistic: None,
            }
        } else if let Some(report) = checker
            .som()
            .map(|som| som_category_report(som, axiom, mode, common.epsilon))
            .transpose()?
            .flatten()
        {
            report
        } else {
            let check = checker.two().check(axiom, mode)?;
            AxiomReport {
                axiom: axiom.to_string(),
                holds: check.holds,
                counterexamples: element_labels(checker.two(), &check.counterexamples),
                infimum: None,
                statistic: None,
            }
        };
        reports.push(report);
    }

    let holding = reports.iter().filter(|r| r.holds).count();
    let output = CheckOutput {
        total: reports.len(),
        holding,
        all_hold: holding == reports.len(),
        axioms: reports,
    };

    let mut out = String::new();
    match common.format {
        OutputFormat::Structured => out = json_document(&output)?,
        OutputFormat::Text => {
            for report in &output.axioms {
                let _ = writeln!(out, "{}", render_axiom_line(report));
            }
            let _ = writeln!(out, "{} of {} axioms hold", output.holding, output.total);
        }
    }
    Ok((if output.all_hold { 0 } else { 1 }, out))
}

fn render_axiom_line(report: &AxiomReport) -> String {
    let mut line = String::new();
    let verdict = if report.holds { "HOLDS" } else { "FAILS" };
    let _ = write!(line, "{verdict}  {}", report.axiom);
    if let Some(infimum) = report.infimum {
        let _ = write!(line, "  infimum {infimum}");
    }
    if let Some(stat) = &report.statistic {
        let _ = write!(
            line,
            "  statistic {} (cut {}, {})",
            stat.value,
            stat.cut,
            if stat.holds { "holds" } else { "fails" }
        );
    }
    if !report.counterexamples.is_empty() {
        let shown: Vec<String> = report
            .counterexamples
            .iter()
            .take(MAX_LISTED)
            .map(|c| match c.value {
                Some(value) => format!("{} ({value})", c.element),
                None => c.element.clone(),
            })
            .collect();
        let _ = write!(line, "  counterexamples: {}", shown.join(", "));
        if report.counterexamples.len() > MAX_LISTED {
            let _ = write!(line, " (+{} more)", report.counterexamples.len() - MAX_LISTED);
        }
    }
    line
}

// ---- extract-verify ------------------------------------------------------------

#[derive(Serialize)]
struct ViolationReport {
    concept: String,
    x: String,
    y: String,
    degree_x: f64,
    degree_y: f64,
    weight_x: f64,
    weight_y: f64,
}

#[derive(Serialize)]
struct VerifyOutput {
    output: String,
    blocks: Vec<String>,
    logic: &'static str,
    stimuli: usize,
    coherent: bool,
    violations: Vec<ViolationReport>,
}

fn run_extract_verify(common: &Common, args: ExtractVerifyArgs) -> Result<(u8, String), Failure> {
    let snap: NetworkSnapshot = snapshot::read_json(&args.network)?;
    let network = Network::try_from(snap)?;
    let stimuli = snapshot::read_row_csv(&args.stimuli)?;

    let focus = match &args.focus {
        Some(units) => units.clone(),
        None => non_input_names(&network),
    };
    let kb = extract_kb(&network, &focus)?;
    fs::write(&args.output, render_kb(&kb))
        .map_err(|e| Failure::new(2, format!("{}: {e}", args.output.display())))?;

    let cfg = FixpointConfig::default();
    let fuzzy = if args.rescale_tanh {
        build_fuzzy_model_rescaling_tanh(&network, &stimuli, &cfg)?
    } else {
        build_fuzzy_model(&network, &stimuli, &cfg)?
    };
    let coherence = check_coherence(&fuzzy, &kb, common.logic, common.epsilon)?;

    let output = VerifyOutput {
        output: args.output.display().to_string(),
        blocks: focus,
        logic: common.logic.name(),
        stimuli: stimuli.len(),
        coherent: coherence.holds,
        violations: coherence
            .violations
            .iter()
            .map(|v| ViolationReport {
                concept: v.concept.clone(),
                x: fuzzy.label(v.x).to_string(),
                y: fuzzy.label(v.y).to_string(),
                degree_x: v.degree_x,
                degree_y: v.degree_y,
                weight_x: v.weight_x,
                weight_y: v.weight_y,
            })
            .collect(),
    };

    let mut out = String::new();
    match common.format {
        OutputFormat::Structured => out = json_document(&output)?,
        OutputFormat::Text => {
            let _ = writeln!(
                out,
                "extracted {} blocks ({}) to {}",
                output.blocks.len(),
                output.blocks.join(", "),
                output.output
            );
            if output.coherent {
                let _ = writeln!(
                    out,
                    "coherent: yes ({} logic, epsilon {}, {} stimuli)",
                    output.logic, common.epsilon, output.stimuli
                );
            } else {
                let _ = writeln!(
                    out,
                    "coherent: no, {} violating pairs ({} logic, epsilon {})",
                    output.violations.len(),
                    output.logic,
                    common.epsilon
                );
                for v in output.violations.iter().take(MAX_LISTED) {
                    let _ = writeln!(
                        out,
                        "{}: {} vs {}  degrees {} vs {}, weights {} vs {}",
                        v.concept, v.x, v.y, v.degree_x, v.degree_y, v.weight_x, v.weight_y
                    );
                }
                if output.violations.len() > MAX_LISTED {
                    let _ = writeln!(out, "(+{} more)", output.violations.len() - MAX_LISTED);
                }
            }
        }
    }
    Ok((if output.coherent { 0 } else { 1 }, out))
}

// ---- shared output helpers -------------------------------------------------------

fn json_document<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
