use std::io::{Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crossset_core::api::{self, to_json_bytes, GenVariant, GenerateRequest, ViewRequest};
use crossset_core::brushing::{brushed_aggregate, Brush};
use crossset_core::datagen::DriveRuleTable;
use crossset_core::drilldown::{format_tooltip, DetailSelection};
use crossset_core::io::{read_table, write_aggregate, write_table, AggregateFormat, TableFormat, TableFormatSpec};
use crossset_core::svg::{render_svg, SvgRenderSpec};
use crossset_core::{aggregate, CellKey, Counting, Dim, SetPairTable, Transform};
use crossset_service::AppState;

#[derive(Parser)]
#[command(
    name = "crossset",
    version,
    about = "Aggregate and explore pairs of set-typed columns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic table.
    Generate(GenerateArgs),
    /// Aggregate a table into the binned matrix.
    Aggregate(AggregateArgs),
    /// Per-cardinality detail views for one element pair.
    Detail(DetailArgs),
    /// List the set combinations behind one cell.
    Combinations(CombinationsArgs),
    /// Render the matrix as SVG.
    Render(RenderArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// S1..S6 or drives.
    #[arg(long)]
    variant: GenVariant,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Rule table for drives, as JSON.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Defaults to the output file extension, else JSON.
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct InputArgs {
    /// Table file, CSV or JSON; `-` reads stdin.
    #[arg(long, short)]
    input: PathBuf,
    /// Column and delimiter settings, as JSON.
    #[arg(long)]
    table_format: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountingArg {
    Item,
    Element,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    Raw,
    #[value(alias = "rank-std")]
    RankStandard,
    RankDense,
    Deviation,
}

/// `A:value` or `B:value`.
#[derive(Clone, Debug)]
struct DimArg<T> {
    dim: Dim,
    value: T,
}

fn parse_dim(s: &str) -> std::result::Result<(Dim, &str), String> {
    let (dim, rest) = s
        .split_once(':')
        .ok_or_else(|| format!("expected A:... or B:..., got {s:?}"))?;
    let dim = match dim {
        "A" | "a" => Dim::A,
        "B" | "b" => Dim::B,
        _ => return Err(format!("unknown dimension {dim:?}, expected A or B")),
    };
    Ok((dim, rest))
}

fn parse_dim_usize(s: &str) -> std::result::Result<DimArg<usize>, String> {
    let (dim, rest) = parse_dim(s)?;
    let value = rest
        .parse()
        .map_err(|_| format!("expected a number after {dim}:, got {rest:?}"))?;
    Ok(DimArg { dim, value })
}

fn parse_dim_bool(s: &str) -> std::result::Result<DimArg<bool>, String> {
    let (dim, rest) = parse_dim(s)?;
    let value = rest
        .parse()
        .map_err(|_| format!("expected true or false after {dim}:, got {rest:?}"))?;
    Ok(DimArg { dim, value })
}

fn parse_dim_list(s: &str) -> std::result::Result<DimArg<Vec<String>>, String> {
    let (dim, rest) = parse_dim(s)?;
    let value = rest
        .split(',')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(String::from)
        .collect();
    Ok(DimArg { dim, value })
}

#[derive(Args)]
struct ViewArgs {
    /// View settings as JSON; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    counting: Option<CountingArg>,
    /// Cap cardinalities above t into one bin, e.g. `A:2`.
    #[arg(long, value_parser = parse_dim_usize)]
    cap: Vec<DimArg<usize>>,
    /// Collapse elements to a single bin, e.g. `A:Music,Sport`.
    #[arg(long, value_parser = parse_dim_list)]
    collapse: Vec<DimArg<Vec<String>>>,
    /// Collapse every element of both dimensions.
    #[arg(long)]
    collapse_all: bool,
    /// Show or hide the empty-set bin, e.g. `A:false`.
    #[arg(long, value_parser = parse_dim_bool)]
    show_empty: Vec<DimArg<bool>>,
    #[arg(long, value_enum)]
    transform: Option<TransformArg>,
    /// Negate elements, e.g. `B:Fun`.
    #[arg(long, value_parser = parse_dim_list)]
    negate: Vec<DimArg<Vec<String>>>,
    /// Display order of all elements of a dimension, e.g. `A:Sport,Music,...`.
    #[arg(long, value_parser = parse_dim_list)]
    order: Vec<DimArg<Vec<String>>>,
}

#[derive(Args)]
struct AggregateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    view: ViewArgs,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DetailArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    view: ViewArgs,
    /// Element of A, by name or index.
    #[arg(long = "ea")]
    e_a: String,
    /// Element of B, by name or index.
    #[arg(long = "eb")]
    e_b: String,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CombinationsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    view: ViewArgs,
    /// Column element, or `-` for the empty set.
    #[arg(long)]
    col: String,
    /// Row element, or `-` for the empty set.
    #[arg(long)]
    row: String,
    /// Cardinality bin index of the column element.
    #[arg(long)]
    k: Option<usize>,
    /// Cardinality bin index of the row element.
    #[arg(long)]
    l: Option<usize>,
    /// Print the plain-text tooltip instead of JSON.
    #[arg(long)]
    tooltip: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    view: ViewArgs,
    /// Brush expression as JSON; its items are overlaid.
    #[arg(long)]
    brush: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    cell_pixel: u32,
    #[arg(long, default_value = "blues")]
    palette: String,
    #[arg(long)]
    no_labels: bool,
    #[arg(long)]
    no_marginals: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "CROSSSET_HOST", default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, env = "CROSSSET_PORT", default_value_t = 8080)]
    port: u16,
    /// Persist datasets here and reload them at startup.
    #[arg(long, env = "CROSSSET_DATA_DIR")]
    data_dir: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Core(crossset_core::Error),
    Io(PathBuf, std::io::Error),
    Json(PathBuf, serde_json::Error),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io(..) => "IoError",
            CliError::Json(..) => "ParseError",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Json(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<crossset_core::Error> for CliError {
    fn from(e: crossset_core::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| CliError::Io(path.into(), e))?;
        return Ok(buf);
    }
    std::fs::read(path).map_err(|e| CliError::Io(path.into(), e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_slice(&read_bytes(path)?).map_err(|e| CliError::Json(path.into(), e))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(p.into(), e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io("<stdout>".into(), e)),
    }
}

fn load_table(args: &InputArgs) -> Result<SetPairTable> {
    let spec = match &args.table_format {
        Some(p) => read_json(p)?,
        None => TableFormatSpec::default(),
    };
    Ok(read_table(&read_bytes(&args.input)?, &spec)?)
}

fn resolve(table: &SetPairTable, dim: Dim, reference: &str) -> Result<usize> {
    table.universe(dim).resolve(reference).ok_or_else(|| {
        CliError::Core(crossset_core::Error::InvalidReference(format!(
            "{reference:?} is not an element of {}",
            table.universe(dim).name()
        )))
    })
}

fn resolve_cell_element(table: &SetPairTable, dim: Dim, reference: &str) -> Result<Option<usize>> {
    match reference {
        "-" | "∅" => Ok(None),
        r => resolve(table, dim, r).map(Some),
    }
}

/// The config file with every flag applied on top.
fn build_request(table: &SetPairTable, args: &ViewArgs) -> Result<ViewRequest> {
    let mut req: ViewRequest = match &args.config {
        Some(p) => read_json(p)?,
        None => ViewRequest::default(),
    };
    let config = &mut req.config;
    if let Some(c) = args.counting {
        config.counting = match c {
            CountingArg::Item => Counting::ItemCentric,
            CountingArg::Element => Counting::ElementCentric,
        };
    }
    for cap in &args.cap {
        match cap.dim {
            Dim::A => config.cap_a = Some(cap.value),
            Dim::B => config.cap_b = Some(cap.value),
        }
    }
    if args.collapse_all {
        *config = std::mem::take(config).collapse_all(table);
    }
    for c in &args.collapse {
        for r in &c.value {
            let e = resolve(table, c.dim, r)?;
            *config = std::mem::take(config).with_collapsed(c.dim, e);
        }
    }
    for s in &args.show_empty {
        match s.dim {
            Dim::A => config.show_empty_a = s.value,
            Dim::B => config.show_empty_b = s.value,
        }
    }
    if let Some(t) = args.transform {
        config.transform = match t {
            TransformArg::Raw => Transform::Raw,
            TransformArg::RankStandard => Transform::RankStandard,
            TransformArg::RankDense => Transform::RankDense,
            TransformArg::Deviation => Transform::Deviation,
        };
    }
    for n in &args.negate {
        for r in &n.value {
            let e = resolve(table, n.dim, r)?;
            match n.dim {
                Dim::A => req.edits.negate_a.push(e),
                Dim::B => req.edits.negate_b.push(e),
            }
        }
    }
    for o in &args.order {
        let perm = o
            .value
            .iter()
            .map(|r| resolve(table, o.dim, r))
            .collect::<Result<Vec<_>>>()?;
        match o.dim {
            Dim::A => req.edits.order_a = Some(perm),
            Dim::B => req.edits.order_b = Some(perm),
        }
    }
    Ok(req)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(args) => {
            let rules: Option<DriveRuleTable> = args.rules.as_deref().map(read_json).transpose()?;
            let table = api::generate(&GenerateRequest {
                variant: args.variant,
                n: args.n,
                seed: args.seed,
                rules,
            })?;
            let by_extension = args
                .output
                .as_deref()
                .and_then(Path::extension)
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            let format = match args.format {
                Some(OutFormat::Csv) => TableFormat::Csv,
                None if by_extension => TableFormat::Csv,
                _ => TableFormat::Json,
            };
            let bytes = write_table(&table, format, &TableFormatSpec::default())?;
            write_output(args.output.as_deref(), &bytes)
        }
        Command::Aggregate(args) => {
            let table = load_table(&args.input)?;
            let req = build_request(&table, &args.view)?;
            let response = api::view(&table, &req)?;
            let bytes = match args.format {
                OutFormat::Json => to_json_bytes(&response),
                OutFormat::Csv => write_aggregate(&response.aggregate, AggregateFormat::Csv),
            };
            write_output(args.output.as_deref(), &bytes)
        }
        Command::Detail(args) => {
            let table = load_table(&args.input)?;
            let req = build_request(&table, &args.view)?;
            let request = api::DetailRequest {
                selection: DetailSelection {
                    e_a: resolve(&table, Dim::A, &args.e_a)?,
                    e_b: resolve(&table, Dim::B, &args.e_b)?,
                    config: req.config,
                },
                edits: req.edits,
            };
            write_output(args.output.as_deref(), &to_json_bytes(&api::detail(&table, &request)?))
        }
        Command::Combinations(args) => {
            let table = load_table(&args.input)?;
            let req = build_request(&table, &args.view)?;
            let request = api::CombinationsRequest {
                cell: CellKey {
                    col: resolve_cell_element(&table, Dim::A, &args.col)?,
                    row: resolve_cell_element(&table, Dim::B, &args.row)?,
                    k: args.k,
                    l: args.l,
                },
                config: req.config,
                edits: req.edits,
            };
            let list = api::combinations(&table, &request)?;
            let bytes = if args.tooltip {
                format_tooltip(&list).into_bytes()
            } else {
                to_json_bytes(&list)
            };
            write_output(args.output.as_deref(), &bytes)
        }
        Command::Render(args) => {
            let table = load_table(&args.input)?;
            let req = build_request(&table, &args.view)?;
            let table = req.edits.apply(&table)?;
            let spec = SvgRenderSpec {
                cell_pixel: args.cell_pixel,
                palette: args.palette,
                show_labels: !args.no_labels,
                show_marginals: !args.no_marginals,
            };
            let svg = match &args.brush {
                Some(p) => {
                    let brush: Brush = read_json(p)?;
                    let overlay = brushed_aggregate(&table, &req.config, &brush)?;
                    render_svg(&overlay.base, Some(&overlay.brushed), &req.config, &spec)?
                }
                None => render_svg(&aggregate(&table, &req.config)?, None, &req.config, &spec)?,
            };
            write_output(args.output.as_deref(), svg.as_bytes())
        }
        Command::Serve(args) => serve(args),
    }
}

fn serve(args: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io("<runtime>".into(), e))?;
    let data_dir = args.data_dir.clone();
    runtime.block_on(async move {
        let state = match &data_dir {
            Some(dir) => AppState::with_data_dir(dir)
                .await
                .map_err(|e| CliError::Io(dir.clone(), e))?,
            None => AppState::new(),
        };
        crossset_service::serve(SocketAddr::new(args.host, args.port), state)
            .await
            .map_err(|e| CliError::Io("<listener>".into(), e))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
