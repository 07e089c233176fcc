use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use engelset::clusters::{cluster_group, count_classes_padded, representative_cluster};
use engelset::construct::csv_header;
use engelset::figure::{render_svg, FigureOptions};
use engelset::onedim::{line_clusters_equal, make_1d_counterexample, make_ab_set, LineSet};
use engelset::regularity::{
    choose_parameters, enreg_check, is_regular, onecluster_hypothesis, predict_group, radius_2dr_minus, verify_covering,
    verify_packing,
};
use engelset::tables::table_csv;
use engelset::{generate_window, EngelParams, Error, Limits, RadiusSq, Rational, ShiftSequence};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "engelset", version, about = "Construct Engel sets and count their cluster classes")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the points of a window as CSV.
    Generate {
        #[command(flatten)]
        source: Source,
        /// First and last layer; an empty range gives a header-only CSV.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-6, 6])]
        layers: Vec<i64>,
        #[arg(long, default_value_t = 4)]
        lattice_radius: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count equivalence classes of clusters of one radius.
    Count {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        radius: RadiusArgs,
        /// Extra layers and lattice steps around the required window.
        #[arg(long, default_value_t = 0)]
        padding: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetry group of the cluster at a layer origin.
    Group {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        radius: RadiusArgs,
        /// Use the radius 2kR and include the predicted group.
        #[arg(long, conflicts_with_all = ["rho", "rho_sq"])]
        k: Option<i64>,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        layer: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regularity verdict, consistency with the class count at 2dR, and the
    /// one-cluster hypothesis for a given eps.
    Regularity {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pick a, b, delta for a target covering radius R and margin eps.
    ChooseParams {
        #[arg(long)]
        d: usize,
        #[arg(long = "big-r-sq")]
        big_r_sq: String,
        #[arg(long)]
        eps: String,
        /// One period of the sequence, e.g. "1,2,-1,-2"; defaults to all plus signs.
        #[arg(long, allow_hyphen_values = true)]
        sequence: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check packing and covering radii on a window.
    VerifyDelone {
        #[command(flatten)]
        source: Source,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-3, 3])]
        layers: Vec<i64>,
        #[arg(long, default_value_t = 4)]
        lattice_radius: i64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Point sets on the line.
    Onedim {
        #[command(subcommand)]
        kind: LineKind,
    },
    /// Scatter plot of a window with highlighted clusters.
    Svg {
        #[command(flatten)]
        source: Source,
        /// Cluster radii, one highlighted family each.
        #[arg(long = "rho")]
        radii: Vec<String>,
        #[arg(long = "center", allow_negative_numbers = true)]
        centers: Vec<i64>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-6, 6])]
        layers: Vec<i64>,
        #[arg(long, default_value_t = 8)]
        lattice_radius: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Layer coset table of a built-in example.
    ReproduceTable {
        example: Example,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-6, 6])]
        layers: Vec<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LineKind {
    /// Gaps alternating a, b around the origin.
    Ab {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Radii to test; defaults to b.
        #[arg(long = "check")]
        checks: Vec<String>,
    },
    /// Gaps rho, g0, rho, g1, ... with distinct free gaps.
    Counterexample {
        #[arg(long)]
        rho: String,
        #[arg(long = "big-r")]
        big_r: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Radii to test; defaults to rho and 2R.
        #[arg(long = "check")]
        checks: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    Planar,
    Spatial,
}

impl Example {
    fn params(self) -> EngelParams {
        match self {
            Example::Planar => EngelParams::planar_example(),
            Example::Spatial => EngelParams::spatial_example(),
        }
    }
}

#[derive(Args)]
struct Source {
    #[arg(long, value_enum, conflicts_with = "params")]
    example: Option<Example>,
    /// JSON parameter file.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct RadiusArgs {
    /// Radius as a decimal or fraction, or "2dR" / "2dR-eps" (with --eps).
    #[arg(long, conflicts_with = "rho_sq")]
    rho: Option<String>,
    /// Squared radius.
    #[arg(long)]
    rho_sq: Option<String>,
    #[arg(long)]
    eps: Option<String>,
}

enum Failure {
    Usage(String),
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn rational(s: &str) -> CliResult<Rational> {
    Ok(Rational::parse(s)?)
}

fn load(source: &Source) -> CliResult<EngelParams> {
    match (&source.example, &source.params) {
        (Some(e), None) => Ok(e.params()),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok(EngelParams::from_json(&text)?)
        }
        _ => Err(Failure::Usage("give --example or --params".into())),
    }
}

fn resolve_radius(r: &RadiusArgs, params: &EngelParams) -> CliResult<RadiusSq> {
    let d = params.d() as i64;
    let radius = match (&r.rho, &r.rho_sq) {
        (_, Some(sq)) => RadiusSq::exact(rational(sq)?),
        (Some(s), None) if s == "2dR-eps" => {
            let eps = r.eps.as_deref().ok_or_else(|| Failure::Usage("2dR-eps needs --eps".into()))?;
            radius_2dr_minus(params.d(), &params.big_r_sq(), &rational(eps)?)?
        }
        (Some(s), None) if s == "2dR" => RadiusSq::exact(Rational::from(4 * d * d) * params.big_r_sq()),
        (Some(s), None) => RadiusSq::from_radius(&rational(s)?),
        (None, None) => return Err(Failure::Usage("give --rho or --rho-sq".into())),
    };
    if !radius.is_positive() {
        return Err(Failure::Usage("radius must be positive".into()));
    }
    Ok(radius)
}

fn range(v: &[i64]) -> (i64, i64) {
    (v[0], v[1])
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    emit(out, &text)
}

fn line_report(set: &LineSet, checks: &[Rational]) -> CliResult<Value> {
    let mut results = Vec::new();
    for rho in checks {
        results.push(json!({ "rho": rho, "clusters_equal": line_clusters_equal(set, rho)? }));
    }
    Ok(json!({ "points": set, "gaps": set.gaps(), "checks": results }))
}

fn run(cli: Cli, limits: Limits) -> CliResult<()> {
    match cli.cmd {
        Command::Generate { source, layers, lattice_radius, out } => {
            let params = load(&source)?;
            let (lo, hi) = range(&layers);
            let csv = if lo > hi {
                csv_header(params.d())
            } else {
                generate_window(&params, (lo, hi), lattice_radius, limits)?.to_csv()
            };
            emit(out.as_deref(), &csv)
        }
        Command::Count { source, radius, padding, out } => {
            let params = load(&source)?;
            let rho_sq = resolve_radius(&radius, &params)?;
            let report = count_classes_padded(&params, &rho_sq, padding, limits)?;
            eprintln!("N = {} over {} representatives (rho^2 = {})", report.n, report.representatives.len(), rho_sq);
            emit_json(out.as_deref(), &json!(&report))
        }
        Command::Group { source, radius, k, layer, out } => {
            let params = load(&source)?;
            let rho_sq = match k {
                Some(k) if k >= 1 => RadiusSq::exact(Rational::from(4 * k * k) * params.big_r_sq()),
                Some(k) => return Err(Failure::Usage(format!("k must be positive, got {k}"))),
                None => resolve_radius(&radius, &params)?,
            };
            let cluster = representative_cluster(&params, layer, &rho_sq, 0, limits)?;
            let group = cluster_group(&cluster)?;
            let prediction = match k {
                Some(k) => json!(&predict_group(&params, k, layer)?),
                None => Value::Null,
            };
            emit_json(
                out.as_deref(),
                &json!({
                    "layer": layer,
                    "rho_sq": rho_sq,
                    "cluster_size": cluster.len(),
                    "order": group.order(),
                    "elements": group.maps(),
                    "prediction": prediction,
                }),
            )
        }
        Command::Regularity { source, eps, out } => {
            let params = load(&source)?;
            let hypothesis = match eps {
                Some(e) => json!(&onecluster_hypothesis(&params, &rational(&e)?)?),
                None => Value::Null,
            };
            emit_json(
                out.as_deref(),
                &json!({
                    "sequence": params.seq.terms(),
                    "regularity": is_regular(&params.seq),
                    "enreg": enreg_check(&params, limits)?,
                    "hypothesis": hypothesis,
                }),
            )
        }
        Command::ChooseParams { d, big_r_sq, eps, sequence, out } => {
            let eps = rational(&eps)?;
            let chosen = choose_parameters(d, &rational(&big_r_sq)?, &eps)?;
            let seq = match sequence {
                Some(s) => {
                    let terms = s
                        .split(',')
                        .map(|t| t.trim().parse::<i64>().map_err(|e| Failure::Usage(format!("bad term {t:?}: {e}"))))
                        .collect::<CliResult<Vec<_>>>()?;
                    ShiftSequence::from_terms(d, &terms)?
                }
                None => ShiftSequence::new(d, (1..d).collect(), vec![1; d.saturating_sub(1)])?,
            };
            let params = chosen.with_sequence(seq)?;
            emit_json(
                out.as_deref(),
                &json!({
                    "chosen": chosen,
                    "params": params.to_file(),
                    "hypothesis": onecluster_hypothesis(&params, &eps)?,
                    "regularity": is_regular(&params.seq),
                }),
            )
        }
        Command::VerifyDelone { source, layers, lattice_radius, samples, seed, out } => {
            let params = load(&source)?;
            let window = generate_window(&params, range(&layers), lattice_radius, limits)?;
            let (r, big_r_sq) = params.r_big_r();
            let packing = verify_packing(&window, &r.square());
            let covering = verify_covering(&window, &big_r_sq, samples, seed)?;
            emit_json(
                out.as_deref(),
                &json!({
                    "holds": packing.holds && covering.holds,
                    "packing": packing,
                    "covering": covering,
                }),
            )
        }
        Command::Onedim { kind } => {
            let report = match kind {
                LineKind::Ab { a, b, n, checks } => {
                    let b = rational(&b)?;
                    let set = make_ab_set(&rational(&a)?, &b, n)?;
                    let checks = if checks.is_empty() { vec![b] } else { parse_all(&checks)? };
                    line_report(&set, &checks)?
                }
                LineKind::Counterexample { rho, big_r, n, checks } => {
                    let (rho, big_r) = (rational(&rho)?, rational(&big_r)?);
                    let set = make_1d_counterexample(&rho, &big_r, n)?;
                    let checks = if checks.is_empty() { vec![rho, Rational::from(2) * big_r] } else { parse_all(&checks)? };
                    line_report(&set, &checks)?
                }
            };
            emit_json(None, &report)
        }
        Command::Svg { source, radii, centers, layers, lattice_radius, out } => {
            let params = load(&source)?;
            let mut opts = FigureOptions::new(range(&layers), lattice_radius);
            opts.radii = radii
                .iter()
                .map(|s| resolve_radius(&RadiusArgs { rho: Some(s.clone()), rho_sq: None, eps: None }, &params))
                .collect::<CliResult<_>>()?;
            if !centers.is_empty() {
                opts.centers = centers;
            }
            emit(out.as_deref(), &render_svg(&params, &opts, limits)?)
        }
        Command::ReproduceTable { example, layers, out } => emit(out.as_deref(), &table_csv(&example.params(), range(&layers))?),
    }
}

fn parse_all(values: &[String]) -> CliResult<Vec<Rational>> {
    values.iter().map(|s| rational(s)).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Limits::from_env().map_err(Failure::from).and_then(|limits| run(cli, limits));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_window_error() { 3 } else { 2 })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
