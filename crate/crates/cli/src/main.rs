mod figures;
mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use maxstab::coeffs::associated_choquet;
use maxstab::grid::{default_density, simplex_grid};
use maxstab::json::{model_to_json, parse_model, parse_table_or_model, table_to_json};
use maxstab::montecarlo::{estimate_ell, sample_choquet_maxstable, sample_generator};
use maxstab::orders::check;
use maxstab::projections::{log_space, ProjectionKernel, ProjectionKind, Scale};
use maxstab::zonoid::{polylines_to_svg, zonoid_polyline};
use maxstab::{Direction, Error, EvalOptions, ModelSpec, Relation, SubsetMask, TableKind};
use serde_json::{json, Value};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "maxstab", version, about = "Max-stable dependence models and their stochastic orders")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Base seed for every Monte Carlo stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo sample size.
    #[arg(long, global = true, default_value_t = 100_000)]
    mc_n: usize,
    /// Simplex grid density (points k/m); defaults by dimension.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Output file (stdout when absent); for `figures`, the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Ell,
    Exponent,
    Cdf,
    Pickands,
    Theta,
    Chi,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Tau,
    Theta,
    Chi,
}

impl From<KindArg> for TableKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Tau => TableKind::Tau,
            KindArg::Theta => TableKind::Theta,
            KindArg::Chi => TableKind::Chi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RelArg {
    Lo,
    Uo,
    Pqd,
}

impl From<RelArg> for Relation {
    fn from(r: RelArg) -> Self {
        match r {
            RelArg::Lo => Relation::Lo,
            RelArg::Uo => Relation::Uo,
            RelArg::Pqd => Relation::Pqd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindOfProjection {
    Min,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Frechet,
    Gumbel,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Frechet => Scale::Frechet,
            ScaleArg::Gumbel => Scale::Gumbel,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a model document.
    Validate { model: PathBuf },
    /// Evaluate a model functional at a point or on a subset.
    Eval {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Quantity::Ell)]
        what: Quantity,
        /// Comma-separated point (ell, exponent, cdf, pickands).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        /// Subset key such as `[1,3]` (theta, chi).
        #[arg(long)]
        subset: Option<String>,
    },
    /// Convert between tau, theta and chi tables; non-Choquet models are
    /// first replaced by their associated Choquet model.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        to: KindArg,
    },
    /// Check an orthant or concordance order between two models.
    Order {
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long, value_enum)]
        relation: RelArg,
    },
    /// Distribution functions or return levels of min/max projections.
    Project {
        model: PathBuf,
        /// Comma-separated positive weights.
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ScaleArg::Frechet)]
        scale: ScaleArg,
        #[arg(long, default_value_t = 0.05)]
        t_min: f64,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        /// Tabulate return levels for periods 10..100 instead of CDFs.
        #[arg(long)]
        return_levels: bool,
        /// Projection used for return levels.
        #[arg(long, value_enum, default_value_t = KindOfProjection::Max)]
        kind: KindOfProjection,
        #[arg(long, default_value_t = 50)]
        periods: usize,
    },
    /// Bivariate zonoid boundary.
    Zonoid {
        model: PathBuf,
        #[arg(long, default_value_t = 720)]
        angles: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Draw from the spectral generator (or the Choquet max-stable vector).
    Sample {
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Choquet models only: exact draws of the max-stable vector.
        #[arg(long)]
        maxstable: bool,
    },
    /// Monte Carlo estimate of the stable tail dependence function.
    Estimate {
        model: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
    },
    /// Regenerate the data behind a figure.
    Figures {
        #[arg(long)]
        id: u32,
    },
}

struct Ctx {
    g: Global,
    opts: EvalOptions,
    manifest: RunManifest,
}

impl Ctx {
    fn load_text(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.manifest.record_input(path, &bytes);
        String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{} is not UTF-8", path.display())).into())
    }

    fn load_model(&mut self, path: &Path) -> Result<ModelSpec> {
        let text = self.load_text(path)?;
        parse_model(&text).with_context(|| format!("model {}", path.display()))
    }

    /// JSON gets the manifest embedded; CSV stays deterministic and the
    /// manifest goes to a sidecar.
    fn emit(&mut self, json_body: Value, csv_body: Option<String>) -> Result<()> {
        self.manifest.finish();
        let text = match (self.g.format, csv_body) {
            (Format::Csv, Some(csv)) => csv,
            (Format::Csv, None) => bail!("this command has no CSV output"),
            (Format::Json, _) => {
                let mut body = json_body;
                body["manifest"] = serde_json::to_value(&self.manifest)?;
                serde_json::to_string_pretty(&body)? + "\n"
            }
        };
        match &self.g.out {
            Some(p) => {
                fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
                write_sidecar(p, &self.manifest)?;
            }
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn write_sidecar(out: &Path, m: &RunManifest) -> Result<()> {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    fs::write(&name, serde_json::to_string_pretty(m)? + "\n")
        .with_context(|| format!("writing {}", Path::new(&name).display()))?;
    Ok(())
}

fn point(x: &[f64], d: usize) -> Result<Vec<f64>> {
    if x.is_empty() {
        bail!("--x is required");
    }
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() }.into());
    }
    Ok(x.to_vec())
}

fn run(cli: Cli) -> Result<i32> {
    let opts = EvalOptions {
        mc_n: cli.global.mc_n,
        seed: cli.global.seed,
        quad_tol: cli.global.tol,
    };
    let manifest = RunManifest::new(opts.seed, opts.mc_n);
    let mut ctx = Ctx {
        g: cli.global,
        opts,
        manifest,
    };
    let opts = ctx.opts;
    match cli.cmd {
        Cmd::Validate { model } => {
            let m = ctx.load_model(&model)?;
            ctx.emit(
                json!({"valid": true, "family": m.family(), "d": m.dim(), "model": model_to_json(&m)}),
                None,
            )?;
        }
        Cmd::Eval { model, what, x, subset } => {
            let m = ctx.load_model(&model)?;
            let d = m.dim();
            let (value, accuracy) = match what {
                Quantity::Theta | Quantity::Chi => {
                    let key = subset.ok_or_else(|| anyhow!("--subset is required for {}", quantity_name(what)))?;
                    let a = SubsetMask::parse_key(&key, d)?;
                    let v = if matches!(what, Quantity::Theta) {
                        m.extremal_coefficient(a, &opts)?
                    } else {
                        m.tail_dependence_coefficient(a, &opts)?
                    };
                    (v.value, serde_json::to_value(v.accuracy)?)
                }
                Quantity::Cdf => (m.cdf(&point(&x, d)?, &opts)?, Value::Null),
                _ => {
                    let p = point(&x, d)?;
                    let v = match what {
                        Quantity::Ell => m.ell(&p, &opts)?,
                        Quantity::Exponent => m.exponent(&p, &opts)?,
                        _ => m.pickands(&p, &opts)?,
                    };
                    (v.value, serde_json::to_value(v.accuracy)?)
                }
            };
            let mut csv = String::from("quantity,value\n");
            writeln!(csv, "{},{}", quantity_name(what), value)?;
            ctx.emit(
                json!({"quantity": quantity_name(what), "family": m.family(), "value": value, "accuracy": accuracy}),
                Some(csv),
            )?;
        }
        Cmd::Convert { input, to } => {
            let text = ctx.load_text(&input)?;
            let table = match parse_table_or_model(&text) {
                Err(Error::Unsupported(_)) => {
                    let m = parse_model(&text)?;
                    associated_choquet(&m, &opts)?.theta_table().expect("Choquet family")
                }
                other => other?,
            };
            let out = table.convert(to.into());
            let mut csv = String::from("subset,value\n");
            for (a, v) in out.iter() {
                writeln!(csv, "\"{}\",{}", a.to_key(), v)?;
            }
            ctx.emit(table_to_json(&out), Some(csv))?;
        }
        Cmd::Order { lhs, rhs, relation } => {
            let m1 = ctx.load_model(&lhs)?;
            let m2 = ctx.load_model(&rhs)?;
            if m1.dim() != m2.dim() {
                return Err(Error::DimensionMismatch {
                    expected: m1.dim(),
                    got: m2.dim(),
                }
                .into());
            }
            let d = m1.dim();
            let grid = simplex_grid(d, ctx.g.grid.unwrap_or_else(|| default_density(d)))?.with_barycenter();
            let verdict = check(relation.into(), &m1, &m2, &grid, &opts)?;
            ctx.manifest.grid = Some(json!({"dim": grid.dim, "m": grid.m, "points": grid.len()}));
            let code = verdict.outcome.exit_code();
            let mut csv = String::from("relation,outcome,exactness,comparisons,violations,reverse\n");
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                verdict.relation.name(),
                verdict.outcome.name(),
                serde_json::to_value(verdict.exactness)?.as_str().unwrap_or_default(),
                verdict.comparisons,
                verdict.violations,
                verdict.reverse
            )?;
            ctx.emit(serde_json::to_value(&verdict)?, Some(csv))?;
            return Ok(code);
        }
        Cmd::Project {
            model,
            weights,
            scale,
            t_min,
            t_max,
            return_levels,
            kind,
            periods,
        } => {
            let m = ctx.load_model(&model)?;
            let a = if weights.is_empty() {
                Direction::ones(m.dim())
            } else {
                Direction::new(point(&weights, m.dim())?)?
            };
            let scale: Scale = scale.into();
            let k = ProjectionKernel::new(&m, &a, &opts)?;
            let mut csv = String::new();
            let body = if return_levels {
                if periods == 0 {
                    bail!("--periods must be positive");
                }
                let kind = match kind {
                    KindOfProjection::Min => ProjectionKind::Min,
                    KindOfProjection::Max => ProjectionKind::Max,
                };
                csv.push_str("return_period,level\n");
                let mut rows = Vec::new();
                for r in log_space(10.0, 100.0, periods) {
                    let level = k.return_level(kind, 1.0 / r, scale)?;
                    let (lo, hi) = k.return_level_band(kind, 1.0 / r, scale)?;
                    writeln!(csv, "{r},{level}")?;
                    rows.push(json!({"return_period": r, "level": level, "lower": lo, "upper": hi}));
                }
                json!({"family": m.family(), "weights": a.as_slice(), "kind": kind, "scale": scale, "rows": rows})
            } else {
                if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
                    return Err(Error::Domain("need 0 < t_min < t_max".into()).into());
                }
                csv.push_str("t,F_min,F_max\n");
                let mut rows = Vec::new();
                for t in log_space(t_min, t_max, maxstab::projections::CURVE_POINTS) {
                    let ts = match scale {
                        Scale::Frechet => t,
                        Scale::Gumbel => t.ln(),
                    };
                    let fmin = 1.0 - k.survival_min(t);
                    let fmax = k.cdf_max(t);
                    writeln!(csv, "{ts},{fmin},{fmax}")?;
                    rows.push(json!({"t": ts, "F_min": fmin, "F_max": fmax}));
                }
                json!({"family": m.family(), "weights": a.as_slice(), "scale": scale, "rows": rows})
            };
            ctx.emit(body, Some(csv))?;
        }
        Cmd::Zonoid { model, angles, svg } => {
            let m = ctx.load_model(&model)?;
            let poly = zonoid_polyline(&m, angles, &opts)?;
            if let Some(p) = svg {
                fs::write(&p, polylines_to_svg(&[(m.family(), &poly)], 400))
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            ctx.emit(
                json!({"family": m.family(), "polyline": poly, "vertices": poly.vertices()}),
                Some(figures::polyline_csv(&poly)),
            )?;
        }
        Cmd::Sample { model, n, maxstable } => {
            let m = ctx.load_model(&model)?;
            let (prefix, s) = if maxstable {
                let ModelSpec::Choquet(c) = &m else {
                    return Err(Error::Unsupported("--maxstable needs a Choquet model".into()).into());
                };
                ("X", sample_choquet_maxstable(c.tau(), n, opts.seed)?)
            } else {
                ("Z", sample_generator(&m, n, opts.seed)?)
            };
            let header: Vec<String> = (1..=s.dim).map(|j| format!("{prefix}{j}")).collect();
            let mut csv = header.join(",") + "\n";
            let mut rows = Vec::with_capacity(n);
            for r in s.rows() {
                let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                csv.push_str(&line.join(","));
                csv.push('\n');
                rows.push(r.to_vec());
            }
            ctx.emit(json!({"family": s.family, "columns": header, "rows": rows}), Some(csv))?;
        }
        Cmd::Estimate { model, x } => {
            let m = ctx.load_model(&model)?;
            let p = point(&x, m.dim())?;
            let e = estimate_ell(&m, &p, opts.mc_n, opts.seed)?;
            let mut csv = String::from("estimand,mean,stderr,n,seed\n");
            writeln!(csv, "\"{}\",{},{},{},{}", e.estimand, e.mean, e.stderr, e.n, e.seed)?;
            let exact = if m.needs_monte_carlo() { None } else { Some(m.ell(&p, &opts)?.value) };
            ctx.emit(
                json!({"estimand": e.estimand, "mean": e.mean, "stderr": e.stderr, "n": e.n, "seed": e.seed, "reference": exact}),
                Some(csv),
            )?;
        }
        Cmd::Figures { id } => {
            let dir = ctx.g.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
            let files = figures::write_figure(id, &dir, &opts)?;
            ctx.manifest.finish();
            let listing = json!({
                "figure": id,
                "files": files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>(),
                "manifest": &ctx.manifest,
            });
            fs::write(
                dir.join(format!("fig{id}.manifest.json")),
                serde_json::to_string_pretty(&listing)? + "\n",
            )?;
            for f in files {
                println!("{}", f.display());
            }
        }
    }
    Ok(0)
}

fn quantity_name(q: Quantity) -> &'static str {
    match q {
        Quantity::Ell => "ell",
        Quantity::Exponent => "exponent",
        Quantity::Cdf => "cdf",
        Quantity::Pickands => "pickands",
        Quantity::Theta => "theta",
        Quantity::Chi => "chi",
    }
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Parse(_)) => 3,
        Some(
            Error::InvalidParameter { .. }
            | Error::InvalidVariogram(_)
            | Error::NegativeMass { .. }
            | Error::MarginalConstraint { .. }
            | Error::MissingEntry(_)
            | Error::DimensionMismatch { .. }
            | Error::DimensionOutOfRange { .. },
        ) => 2,
        _ => 5,
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MAXSTAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow!("MAXSTAB_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 5 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|_| run(cli));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
