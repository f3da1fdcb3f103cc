use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use elliptic::battery::{run_battery, run_corpus, verdict_table, BatteryOptions};
use elliptic::descriptor::{parse_descriptor, ManifoldDescriptor, Pi1Descriptor};
use elliptic::embed::{self, SearchOutcome, RESIDUAL_TOLERANCE};
use elliptic::geom2d::{self, ahlfors_classify, milnor_classify, RadialProfile};
use elliptic::nilcoh::{Bracket, NilLieAlgebra};
use elliptic::wrapmaps::{self, EvaluableMap, Region, SampleSet};
use elliptic::{Error, Rational};

#[derive(Parser)]
#[command(
    name = "elliptic",
    version,
    about = "Obstructions to ellipticity and checks of wrapping maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the obstruction battery on a descriptor.
    Check {
        descriptor: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Skip the embedding search.
        #[arg(long)]
        no_search: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Search for an injective ring map from the descriptor's cohomology into Λ*ℝⁿ.
    Embed {
        descriptor: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Growth, cohomology and Nomizu data of a nilpotent Lie algebra.
    Lie {
        #[arg(long, value_enum, conflicts_with_all = ["brackets", "descriptor"])]
        family: Option<LieFamily>,
        /// Brackets as "i,j,k[,c];..." meaning [e_i, e_j] = c e_k, indices from 1.
        #[arg(long, conflicts_with = "descriptor")]
        brackets: Option<String>,
        /// Dimension of the algebra.
        #[arg(long)]
        dim: Option<usize>,
        /// Read the Lie algebra from a descriptor's pi1 block.
        #[arg(long)]
        descriptor: Option<PathBuf>,
        /// Manifold dimension for the growth verdict.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Conformal type of a rotationally symmetric plane.
    Surface {
        #[arg(long, value_enum, required_unless_present = "samples")]
        family: Option<SurfaceFamily>,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Whitespace or comma delimited "r L(r)" rows.
        #[arg(long, conflicts_with = "family")]
        samples: Option<PathBuf>,
        /// Write the window trace as tab-delimited text.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Numerical checks of an explicit map: degree growth, Lipschitz bound, Jacobian floor.
    Map {
        #[arg(long, value_enum)]
        map: MapName,
        /// Dimension for torus-collapse, join and identity.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Comma separated radii for the normalized degree integral.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        /// Quadrature grid step.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the degree table as tab-delimited text.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the battery on every descriptor in a directory and print the verdict table.
    Corpus {
        dir: PathBuf,
        /// Compare against a committed verdict table; exit 1 on any difference.
        #[arg(long)]
        golden: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// Target dimension; defaults to the manifold dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Random restarts for the floating search.
    #[arg(long, default_value_t = 32)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest relation residual accepted from the floating search.
    #[arg(long, default_value_t = RESIDUAL_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Copy, Clone, ValueEnum)]
enum LieFamily {
    Heisenberg,
    Filiform,
    Abelian,
}

#[derive(Copy, Clone, ValueEnum)]
enum SurfaceFamily {
    Euclidean,
    Hyperbolic,
    PowerLog,
    InverseSquare,
    SpikyPlane,
}

#[derive(Copy, Clone, ValueEnum)]
enum MapName {
    F0,
    SphereWrap,
    TorusCollapse,
    Join,
    RadialStretch,
    Identity,
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Descriptor(_) | Error::InvalidInput(_) => Failure::Usage(e.to_string()),
            e => Failure::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}

/// Returns whether the input was excluded.
fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Check {
            descriptor,
            search,
            no_search,
            output,
        } => {
            let d = load(&descriptor)?;
            let report = run_battery(&d, &options(&search, !no_search))?;
            emit(&output, &report.to_text(), &report.to_json())?;
            Ok(report.excluded())
        }
        Command::Embed {
            descriptor,
            search,
            output,
        } => embed_command(&load(&descriptor)?, &search, &output),
        Command::Lie {
            family,
            brackets,
            dim,
            descriptor,
            n,
            output,
        } => {
            let g = lie_algebra(family, brackets.as_deref(), dim, descriptor.as_deref())?;
            lie_command(&g, n, &output)
        }
        Command::Surface {
            family,
            epsilon,
            samples,
            plot_data,
            output,
        } => surface_command(family, epsilon, samples.as_deref(), plot_data.as_deref(), &output),
        Command::Map {
            map,
            dim,
            alpha,
            radii,
            step,
            samples,
            seed,
            plot_data,
            output,
        } => map_command(
            map,
            dim,
            alpha,
            radii,
            step,
            samples,
            seed,
            plot_data.as_deref(),
            &output,
        ),
        Command::Corpus {
            dir,
            golden,
            search,
            output,
        } => corpus_command(&dir, golden.as_deref(), &search, &output),
    }
}

fn options(s: &SearchArgs, search: bool) -> BatteryOptions {
    BatteryOptions {
        target_n: s.n,
        search,
        budget: s.budget,
        seed: s.seed,
        tolerance: s.tolerance,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ManifoldDescriptor, Failure> {
    parse_descriptor(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(output: &OutputArgs, text: &str, structured: &str) -> Result<(), Failure> {
    let body = match output.format {
        Format::Text => text.to_string(),
        Format::Structured => format!("{structured}\n"),
    };
    match &output.out {
        Some(p) => fs::write(p, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn embed_command(d: &ManifoldDescriptor, s: &SearchArgs, output: &OutputArgs) -> Outcome {
    let n = s.n.unwrap_or(d.n as usize);
    let outcome = embed::search_embedding_with(&d.cohomology, n, s.budget, s.seed, s.tolerance).map_err(Error::from)?;
    let mut text = format!("{} into Λ*ℝ^{n}: {}\n", d.name, outcome.status());
    let value = match &outcome {
        SearchOutcome::Certified { morphism, stage, trial } => {
            let _ = writeln!(text, "stage: {stage}");
            for l in morphism.describe() {
                let _ = writeln!(text, "    {l}");
            }
            json!({ "status": outcome.status(), "n": n, "stage": stage, "trial": trial, "assignment": morphism.describe() })
        }
        SearchOutcome::Numerical {
            morphism,
            residual,
            fundamental_norm,
            trial,
        } => {
            let _ = writeln!(
                text,
                "trial {trial}: residual {residual:.3e}, |image of [M]| {fundamental_norm:.3e}"
            );
            for l in morphism.describe() {
                let _ = writeln!(text, "    {l}");
            }
            json!({ "status": outcome.status(), "n": n, "trial": trial, "residual": residual,
                    "fundamental_norm": fundamental_norm, "assignment": morphism.describe() })
        }
        SearchOutcome::NotFound {
            best_residual,
            obstruction,
        } => {
            if let Some(c) = obstruction {
                let _ = writeln!(text, "obstruction {}: {}", c.name, c.detail);
                if let Some(w) = &c.witness {
                    let _ = writeln!(text, "    witness: {w}");
                }
                let _ = writeln!(text, "    by: {}", c.citation);
            } else if let Some(r) = best_residual {
                let _ = writeln!(text, "best residual {r:.3e}; no conclusion");
            }
            json!({ "status": outcome.status(), "n": n, "best_residual": best_residual, "obstruction": obstruction })
        }
    };
    emit(output, &text, &serde_json::to_string_pretty(&value).expect("json"))?;
    Ok(matches!(
        outcome,
        SearchOutcome::NotFound {
            obstruction: Some(_),
            ..
        }
    ))
}

fn parse_brackets(text: &str) -> Result<Vec<Bracket>, Failure> {
    let mut out = Vec::new();
    for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(',').map(str::trim).collect();
        let bad = || Failure::Usage(format!("malformed bracket `{item}`, expected i,j,k or i,j,k,c"));
        if parts.len() != 3 && parts.len() != 4 {
            return Err(bad());
        }
        let idx: Vec<usize> = parts[..3]
            .iter()
            .map(|p| p.parse::<usize>().ok().filter(|&v| v >= 1).map(|v| v - 1))
            .collect::<Option<_>>()
            .ok_or_else(bad)?;
        let coeff = match parts.get(3) {
            Some(c) => elliptic::algebra::parse_rational(c).ok_or_else(bad)?,
            None => Rational::from_integer(1.into()),
        };
        out.push(Bracket {
            i: idx[0],
            j: idx[1],
            k: idx[2],
            coeff,
        });
    }
    Ok(out)
}

fn lie_algebra(
    family: Option<LieFamily>,
    brackets: Option<&str>,
    dim: Option<usize>,
    descriptor: Option<&Path>,
) -> Result<NilLieAlgebra, Failure> {
    let usage = |m: String| Failure::Usage(m);
    if let Some(p) = descriptor {
        return match load(p)?.pi1 {
            Pi1Descriptor::Lie(g) => Ok(g),
            Pi1Descriptor::FreeAbelian(k) => Ok(NilLieAlgebra::abelian(k)),
            other => Err(usage(format!("pi1 `{}` has no Lie algebra model", other.describe()))),
        };
    }
    let nil = |e: elliptic::nilcoh::NilError| usage(e.to_string());
    match (family, brackets) {
        (Some(LieFamily::Heisenberg), _) => Ok(NilLieAlgebra::heisenberg()),
        (Some(f), _) => {
            let m = dim.ok_or_else(|| usage("--dim is required for this family".into()))?;
            if m == 0 || m > 12 {
                return Err(usage(format!("dimension {m} out of range")));
            }
            Ok(match f {
                LieFamily::Filiform => NilLieAlgebra::filiform(m),
                _ => NilLieAlgebra::abelian(m),
            })
        }
        (None, Some(b)) => {
            let m = dim.ok_or_else(|| usage("--dim is required with --brackets".into()))?;
            NilLieAlgebra::new(m, &parse_brackets(b)?).map_err(nil)
        }
        (None, None) => Err(usage("give --family, --brackets or --descriptor".into())),
    }
}

fn lie_command(g: &NilLieAlgebra, n: usize, output: &OutputArgs) -> Outcome {
    let usage = |e: elliptic::nilcoh::NilError| Failure::Usage(e.to_string());
    let lcs = g.lower_central_series().map_err(usage)?;
    let betti = g.lie_cohomology_dims().map_err(usage)?;
    let nomizu = g.nomizu_kernel().map_err(usage)?;
    let v = g.pi1_verdict(n).map_err(usage)?;
    let mut text = String::new();
    let _ = writeln!(text, "dimension {}, nilpotency class {}", g.dim(), v.nilpotency_class);
    let _ = writeln!(text, "lower central series dims: {lcs:?}");
    let _ = writeln!(text, "Lie algebra cohomology dims: {betti:?}");
    let _ = writeln!(
        text,
        "kernel of d on 𝔤*: {} (expected {}){}",
        nomizu.kernel_dim,
        nomizu.expected,
        if nomizu.matches() { "" } else { " MISMATCH" }
    );
    let _ = writeln!(text, "Bass growth degree: {}", v.growth_degree);
    let _ = writeln!(text, "verdict at n = {n}: {}", if v.pass { "pass" } else { "excluded" });
    for r in &v.reasons {
        let _ = writeln!(text, "    {r}");
    }
    let value = json!({
        "dim": g.dim(),
        "lower_central_series": lcs,
        "cohomology_dims": betti,
        "nomizu": nomizu,
        "n": n,
        "verdict": v,
    });
    emit(output, &text, &serde_json::to_string_pretty(&value).expect("json"))?;
    Ok(!v.pass)
}

fn spiky_plane_samples() -> Vec<(f64, f64)> {
    let (a, b) = (1.0_f64, 12.0_f64);
    let count = 4000;
    (0..count)
        .map(|i| {
            let u = a + (b - a) * i as f64 / (count - 1) as f64;
            let r = u.exp();
            (r, 2.0 * std::f64::consts::PI * r * u)
        })
        .collect()
}

fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::Usage(format!("{}:{}: expected two numbers", path.display(), i + 1)))?;
        if nums.len() != 2 {
            return Err(Failure::Usage(format!(
                "{}:{}: expected two numbers",
                path.display(),
                i + 1
            )));
        }
        out.push((nums[0], nums[1]));
    }
    Ok(out)
}

fn surface_command(
    family: Option<SurfaceFamily>,
    epsilon: f64,
    samples: Option<&Path>,
    plot_data: Option<&Path>,
    output: &OutputArgs,
) -> Outcome {
    let geom = |e: geom2d::GeomError| Failure::Usage(e.to_string());
    let (profile, milnor_profile) = match (family, samples) {
        (_, Some(p)) => (RadialProfile::tabulated(read_samples(p)?).map_err(geom)?, None),
        (Some(SurfaceFamily::Euclidean), _) => (RadialProfile::Euclidean, None),
        (Some(SurfaceFamily::Hyperbolic), _) => (RadialProfile::Hyperbolic, None),
        (Some(SurfaceFamily::PowerLog), _) => (RadialProfile::PowerLog { epsilon }, None),
        (Some(SurfaceFamily::InverseSquare), _) => (RadialProfile::InverseSquare, None),
        // sampled circumference for the integral test, the closed form r log r for curvature
        (Some(SurfaceFamily::SpikyPlane), _) => (
            RadialProfile::tabulated(spiky_plane_samples()).map_err(geom)?,
            Some(RadialProfile::PowerLog { epsilon: 0.0 }),
        ),
        (None, None) => return Err(Failure::Usage("give --family or --samples".into())),
    };
    let ahlfors = ahlfors_classify(&profile);
    let curvature_source = milnor_profile.as_ref().unwrap_or(&profile);
    let milnor = match geom2d::sample_curvature(curvature_source, 3.0, 1e6, 400) {
        Some(k) => Some(milnor_classify(&k).map_err(geom)?),
        None => None,
    };
    let mut text = format!("profile: {}\n", profile.name());
    let _ = writeln!(text, "ahlfors: {} (windows: {})", ahlfors.verdict, ahlfors.numerical);
    match &milnor {
        Some(m) => {
            let _ = writeln!(
                text,
                "milnor: {} (min of −K r² log r − 1 on r ≥ {:.1}: {:.4})",
                m.verdict, m.tail_start, m.fitted_epsilon
            );
        }
        None => {
            let _ = writeln!(text, "milnor: not applicable to tabulated data");
        }
    }
    let _ = writeln!(text, "classification: {}", ahlfors.verdict);
    if let Some(p) = plot_data {
        fs::write(p, ahlfors.trace_table())?;
    }
    let value =
        json!({ "profile": profile.name(), "ahlfors": ahlfors, "milnor": milnor, "classification": ahlfors.verdict });
    emit(output, &text, &serde_json::to_string_pretty(&value).expect("json"))?;
    Ok(false)
}

#[allow(clippy::too_many_arguments)]
fn map_command(
    name: MapName,
    dim: Option<usize>,
    alpha: f64,
    radii: Option<Vec<f64>>,
    step: Option<f64>,
    samples: usize,
    seed: u64,
    plot_data: Option<&Path>,
    output: &OutputArgs,
) -> Outcome {
    let map = match name {
        MapName::F0 => EvaluableMap::F0,
        MapName::SphereWrap => EvaluableMap::SphereWrap,
        MapName::TorusCollapse => EvaluableMap::TorusCollapse { d: dim.unwrap_or(2) },
        MapName::Join => EvaluableMap::JoinMap { n: dim.unwrap_or(3) },
        MapName::RadialStretch => EvaluableMap::RadialStretch { alpha },
        MapName::Identity => EvaluableMap::Identity { n: dim.unwrap_or(2) },
    };
    let bad = |e: wrapmaps::MapError| Failure::Usage(e.to_string());
    map.validate().map_err(bad)?;
    let d = map.domain_dim();
    let is_join = matches!(map, EvaluableMap::JoinMap { .. });
    let (lip_region, lip_step) = match (&map, d) {
        (EvaluableMap::F0, _) => (
            Region {
                lo: vec![-1.0, 0.0],
                hi: vec![1.0, 8.0],
            },
            1e-2,
        ),
        (_, 2) => (
            Region {
                lo: vec![-4.0; 2],
                hi: vec![4.0; 2],
            },
            1e-2,
        ),
        _ => (
            Region {
                lo: vec![-2.0; d],
                hi: vec![2.0; d],
            },
            0.1,
        ),
    };
    let set = match &map {
        EvaluableMap::SphereWrap => SampleSet::Strips {
            x_lo: -4.0,
            x_hi: 4.0,
            y_lo: 1.0,
            y_hi: 20.0,
        },
        _ => SampleSet::Box(lip_region.clone()),
    };
    let lipschitz = wrapmaps::estimate_lipschitz(&map, &lip_region, lip_step).map_err(bad)?;
    let floor = wrapmaps::jacobian_floor(&map, &set, samples, seed).map_err(bad)?;
    let degree = if matches!(map, EvaluableMap::F0) {
        None
    } else {
        let radii = radii.unwrap_or_else(|| {
            if is_join {
                vec![5.0, 10.0, 15.0, 20.0]
            } else {
                (1..=10).map(|k| 10.0 * k as f64).collect()
            }
        });
        let h = step.unwrap_or(if is_join { 0.25 } else { 0.1 });
        Some(wrapmaps::asymptotic_degree(&map, &radii, h).map_err(bad)?)
    };
    let mut text = format!("map: {}\n", map.name());
    let _ = writeln!(
        text,
        "lipschitz estimate: {:.6} (step {}, {} pairs)",
        lipschitz.value, lipschitz.step, lipschitz.pairs
    );
    let _ = writeln!(
        text,
        "jacobian floor: {:.6} over {} samples ({} skipped at seams)",
        floor.floor, floor.samples, floor.skipped_seam_points
    );
    if let Some(r) = &degree {
        let _ = writeln!(text, "normalized degree integrals (step {}):", r.step);
        for (radius, v) in r.radii.iter().zip(&r.normalized) {
            let _ = writeln!(text, "    R = {radius:<6} {v:.6}");
        }
        let _ = writeln!(text, "floor {:.6}, trend slope {:+.3e}", r.floor(), r.trend_slope);
        if let Some(p) = plot_data {
            fs::write(p, r.table())?;
        }
    }
    let value = json!({ "map": map, "lipschitz": lipschitz, "jacobian_floor": floor, "degree": degree });
    emit(output, &text, &serde_json::to_string_pretty(&value).expect("json"))?;
    Ok(false)
}

fn corpus_command(dir: &Path, golden: Option<&Path>, s: &SearchArgs, output: &OutputArgs) -> Outcome {
    let reports = run_corpus(dir, &options(s, true))?;
    let table = verdict_table(&reports);
    let value = json!(reports
        .iter()
        .map(|(stem, r)| json!({ "file": stem, "report": r }))
        .collect::<Vec<_>>());
    emit(output, &table, &serde_json::to_string_pretty(&value).expect("json"))?;
    if let Some(g) = golden {
        let expected = read(g)?;
        if expected != table {
            eprintln!("verdict table differs from {}", g.display());
            for (a, b) in expected.lines().zip(table.lines()).filter(|(a, b)| a != b) {
                eprintln!("-{a}\n+{b}");
            }
            return Ok(true);
        }
    }
    Ok(false)
}
