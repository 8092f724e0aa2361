use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use leafscope::elliptic::random_point;
use leafscope::linalg::{CVector, RankDecision, C64};
use leafscope::poisson::{PoissonStructure, DEFAULT_OVERSAMPLING};
use leafscope::verify::{self, CheckRecord, CheckStatus, Level, VerificationReport};
use leafscope::{enumerate_leaf_families, BundleDescriptor, Classification, Curve, CurveSpec, Error, PoissonCache};
use num_complex::Complex;
use serde_json::json;

// A closed stdout (e.g. piped into `head`) ends the process quietly.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($arg)*) {
            if e.kind() != std::io::ErrorKind::BrokenPipe {
                eprintln!("error: {e}");
                std::process::exit(2);
            }
            std::process::exit(0);
        }
    }};
}

const BAD_INPUT: u8 = 2;
const SOLVER: u8 = 3;
const AMBIGUOUS: u8 = 4;
const VERIFICATION: u8 = 5;

#[derive(Parser)]
#[command(name = "leafscope", version, about = "Symplectic leaves of elliptic Poisson structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create or inspect a curve specification.
    #[command(subcommand)]
    Curve(CurveCommand),
    /// Build and cache the Poisson bracket.
    #[command(subcommand)]
    Poisson(PoissonCommand),
    /// Classify a point, or a sampled point of a given leaf.
    Classify(ClassifyArgs),
    /// Run the property battery and write a report.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum CurveCommand {
    New(NewArgs),
    Show {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct NewArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau_re: f64,
    #[arg(long, allow_negative_numbers = true)]
    tau_im: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    l_sum_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    l_sum_im: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PoissonCommand {
    Build {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Oversampling factor of the interpolation system (odd n).
        #[arg(long, default_value_t = DEFAULT_OVERSAMPLING)]
        samples: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Adds the bracket rank and the consistency check to the output.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Homogeneous coordinates "re,im;re,im;...".
    #[arg(long, conflicts_with = "sample_leaf", required_unless_present = "sample_leaf", allow_hyphen_values = true)]
    point: Option<String>,
    /// `point[:X]`, `split:D[:X]`, `odd`, `omega:K`, `split-omega:K` with X = "re,im"
    /// and K an index into Ω; or a descriptor as JSON.
    #[arg(long, allow_hyphen_values = true)]
    sample_leaf: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    level: LevelArg,
    #[arg(long)]
    report: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Self { code, message: message.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidCurve(_) | Error::InvalidInput(_) | Error::Cache(_) | Error::Json(_) | Error::Io(_) => BAD_INPUT,
            _ => SOLVER,
        };
        Self::new(code, e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Curve(CurveCommand::New(a)) => curve_new(a),
        Command::Curve(CurveCommand::Show { spec, json }) => curve_show(&spec, json),
        Command::Poisson(PoissonCommand::Build { spec, out, samples, seed }) => poisson_build(&spec, &out, samples, seed),
        Command::Classify(a) => classify(a),
        Command::Verify(a) => run_verify(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var("LEAFSCOPE_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| Failure::new(BAD_INPUT, format!("LEAFSCOPE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::new(BAD_INPUT, e))
}

fn read_json(path: &Path) -> Result<serde_json::Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(BAD_INPUT, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::new(BAD_INPUT, format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::new(BAD_INPUT, format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<CurveSpec, Failure> {
    Ok(CurveSpec::from_json(read_json(path)?)?)
}

fn load_curve(path: &Path, seed: Option<u64>) -> Result<Curve, Failure> {
    let mut spec = load_spec(path)?;
    if let Some(s) = seed {
        spec.tolerances.seed = s;
    }
    Ok(Curve::new(spec)?)
}

fn load_cache(path: &Path, spec: &CurveSpec) -> Result<PoissonCache, Failure> {
    let cache = PoissonCache::load(path)?;
    if cache.spec.tau != spec.tau || cache.spec.n != spec.n || cache.spec.l_sum != spec.l_sum {
        return Err(Failure::new(BAD_INPUT, "cache was built for a different curve"));
    }
    Ok(cache)
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn fmt_c(z: C64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

fn curve_new(a: NewArgs) -> Outcome {
    let mut spec = CurveSpec::new(Complex::new(a.tau_re, a.tau_im), a.n, Complex::new(a.l_sum_re, a.l_sum_im))?;
    if let Some(s) = a.seed {
        spec.tolerances.seed = s;
    }
    let text = pretty(&spec.to_json());
    match a.out {
        Some(path) => {
            write_text(&path, &text)?;
            eprintln!("wrote {}", path.display());
        }
        None => out!("{text}"),
    }
    Ok(())
}

fn curve_show(path: &Path, as_json: bool) -> Outcome {
    let spec = load_spec(path)?;
    let families = enumerate_leaf_families(&spec);
    let omega: Vec<C64> = spec.omega_coset().iter().map(|w| w.z()).collect();
    if as_json {
        let table: Vec<_> = families
            .iter()
            .map(|f| json!({ "family": f, "name": f.name(), "leaf_dim": f.leaf_dim(&spec), "parameter_dim": f.parameter_dim() }))
            .collect();
        let out = json!({
            "n": spec.n,
            "tau": [spec.tau.re, spec.tau.im],
            "l_sum": [spec.l_sum.z().re, spec.l_sum.z().im],
            "omega": omega.iter().map(|w| [w.re, w.im]).collect::<Vec<_>>(),
            "families": table,
        });
        out!("{}", pretty(&out));
        return Ok(());
    }
    out!("n      {}", spec.n);
    out!("tau    {}", fmt_c(spec.tau));
    out!("l_sum  {}", fmt_c(spec.l_sum.z()));
    out!("omega  {}", omega.iter().map(|w| fmt_c(*w)).collect::<Vec<_>>().join("  "));
    out!("{:<32} {:>8} {:>10}", "family", "leaf dim", "parameters");
    for f in &families {
        out!("{:<32} {:>8} {:>10}", f.name(), f.leaf_dim(&spec), f.parameter_dim());
    }
    Ok(())
}

fn poisson_build(spec_path: &Path, out: &Path, samples: f64, seed: Option<u64>) -> Outcome {
    if !(samples >= 1.0 && samples.is_finite()) {
        return Err(Failure::new(BAD_INPUT, "--samples must be at least 1"));
    }
    let curve = load_curve(spec_path, seed)?;
    let mut rng = curve.spec().rng();
    let ps = curve.poisson_structure(samples, &mut rng).map_err(|e| {
        let f = Failure::from(e);
        Failure { message: format!("bracket construction failed: {}", f.message), ..f }
    })?;
    let cache = PoissonCache::new(curve.spec(), &ps, &mut rng);
    cache.save(out)?;
    let d = &ps.diagnostics;
    if let Some(i) = &d.interpolation {
        eprintln!("interpolation: null gap {:.3e}, tail {:?}", i.gap, tail(&i.singular_values));
    }
    eprintln!("syzygy: null gap {:.3e}, tail {:?}", d.syzygy.gap, tail(&d.syzygy.singular_values));
    eprintln!("built in {:.2}s, wrote {}", d.seconds, out.display());
    Ok(())
}

fn tail(s: &[f64]) -> Vec<String> {
    s[s.len().saturating_sub(3)..].iter().map(|v| format!("{v:.3e}")).collect()
}

fn parse_complex(s: &str) -> Result<C64, Failure> {
    let bad = || Failure::new(BAD_INPUT, format!("expected \"re,im\", got {s:?}"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

fn parse_point(s: &str, n: usize) -> Result<CVector, Failure> {
    let coords = s.split(';').filter(|c| !c.trim().is_empty()).map(parse_complex).collect::<Result<Vec<_>, _>>()?;
    if coords.len() != n {
        return Err(Failure::new(BAD_INPUT, format!("point has {} coordinates, the curve needs {n}", coords.len())));
    }
    let p = CVector::from_vec(coords);
    if p.norm() == 0.0 {
        return Err(Failure::new(BAD_INPUT, "the zero vector is not a projective point"));
    }
    Ok(p.normalize())
}

fn parse_descriptor(s: &str, curve: &Curve, rng: &mut impl rand::Rng) -> Result<BundleDescriptor, Failure> {
    let spec = curve.spec();
    let bad = |why: &str| Failure::new(BAD_INPUT, format!("leaf descriptor {s:?}: {why}"));
    let omega = |k: &str| -> Result<leafscope::EPoint, Failure> {
        let k: usize = k.parse().map_err(|_| bad("Ω index must be 0..3"))?;
        spec.omega_coset().get(k).copied().ok_or_else(|| bad("Ω index must be 0..3"))
    };
    let b = if s.trim_start().starts_with('{') {
        serde_json::from_str(s).map_err(|e| bad(&e.to_string()))?
    } else {
        let parts: Vec<&str> = s.splitn(3, ':').collect();
        let mut x = |i: usize| -> Result<leafscope::EPoint, Failure> {
            match parts.get(i) {
                Some(t) => Ok(curve.lattice().reduce(parse_complex(t)?)),
                None => loop {
                    let x = random_point(curve.lattice(), rng);
                    if !spec.omega_coset().iter().any(|w| curve.lattice().distance(&x, w) < 0.05) {
                        break Ok(x);
                    }
                },
            }
        };
        match parts[0] {
            "point" => BundleDescriptor::DecomposableSum { d: 1, x: x(1)? },
            "split" => {
                let d = parts.get(1).and_then(|d| d.parse().ok()).ok_or_else(|| bad("split needs a degree"))?;
                BundleDescriptor::DecomposableSum { d, x: x(2)? }
            }
            "odd" => BundleDescriptor::IndecomposableOdd,
            "omega" => BundleDescriptor::IndecomposableOmega { omega: omega(parts.get(1).ok_or_else(|| bad("missing index"))?)? },
            "split-omega" => BundleDescriptor::DecomposableSum {
                d: spec.n / 2,
                x: omega(parts.get(1).ok_or_else(|| bad("missing index"))?)?,
            },
            _ => return Err(bad("unknown kind")),
        }
    };
    if !b.leaf_nonempty(spec) {
        return Err(bad("no such leaf on this curve"));
    }
    Ok(b)
}

fn classify(a: ClassifyArgs) -> Outcome {
    let curve = load_curve(&a.spec, a.seed)?;
    let cache = a.cache.as_deref().map(|p| load_cache(p, curve.spec())).transpose()?;
    let mut rng = curve.spec().rng();
    let (p, requested) = match (&a.point, &a.sample_leaf) {
        (Some(s), _) => (parse_point(s, curve.n())?, None),
        (None, Some(desc)) => {
            let b = parse_descriptor(desc, &curve, &mut rng)?;
            (curve.sample_leaf(&b, &mut rng)?, Some(b))
        }
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let classification = curve.classify(&p)?;
    let mut out = serde_json::to_value(&classification).expect("serializable");
    out["point"] = json!(p.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
    if let Some(b) = &requested {
        out["requested"] = serde_json::to_value(b).expect("serializable");
    }
    let mut mismatch = None;
    let mut rank_text = None;
    if let Some(cache) = &cache {
        let rec = curve.consistency_check(&cache.omega_matrix, &p)?;
        rank_text = Some(match rec.poisson_rank {
            RankDecision::Exact(k) => k.to_string(),
            RankDecision::Ambiguous { lo, hi } => format!("{lo}..{hi} (ambiguous)"),
        });
        out["poisson_rank"] = serde_json::to_value(rec.poisson_rank).expect("serializable");
        out["leaf_dim"] = json!(rec.leaf_dim);
        out["agree"] = json!(rec.agree);
        if classification.label().is_some() && !rec.agree {
            mismatch = Some(format!("bracket rank {:?} differs from leaf dimension {:?}", rec.poisson_rank, rec.leaf_dim));
        }
    }
    if a.json {
        out!("{}", pretty(&out));
    } else {
        match &classification {
            Classification::Leaf(l) => {
                let mut line = l.bundle.short_name(curve.spec());
                if let Some(c) = l.secant_count {
                    line += &format!(", {c:?} secant");
                }
                if let Some(k) = &rank_text {
                    line += &format!(", bracket rank {k}");
                }
                out!("{line}");
            }
            Classification::Ambiguous(amb) => out!("ambiguous: {}", amb.reason),
        }
    }
    if let Classification::Ambiguous(amb) = &classification {
        let candidates: Vec<String> = amb
            .candidates
            .iter()
            .map(|c| format!("d = {} at x = {} (indicator {:.3e})", c.d, fmt_c(c.x.z()), c.indicator))
            .collect();
        return Err(Failure::new(AMBIGUOUS, format!("{}; candidates: {}", amb.reason, candidates.join(", "))));
    }
    if let Some(b) = &requested {
        if !verify::same_bundle(&curve, classification.bundle().expect("leaf"), b) {
            return Err(Failure::new(VERIFICATION, "the sampled point classified into a different leaf"));
        }
    }
    match mismatch {
        Some(m) => Err(Failure::new(VERIFICATION, m)),
        None => Ok(()),
    }
}

fn cache_record(name: &str, pass: bool, residual: f64, detail: String) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
        residual,
        tolerance: leafscope::poisson::PROBE_TOL,
        samples: leafscope::poisson::PROBE_COUNT,
        ambiguous: 0,
        seconds: 0.0,
        detail,
    }
}

fn run_verify(a: VerifyArgs) -> Outcome {
    let curve = load_curve(&a.spec, None)?;
    let level = match a.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let mut leading = Vec::new();
    let built: Result<PoissonStructure, String> = match &a.cache {
        Some(path) => match load_cache(path, curve.spec()) {
            Ok(cache) => {
                let dev = cache.probe_deviation();
                leading.push(cache_record("cache_probes", true, dev, format!("stored probes reproduce to {dev:.3e}")));
                Ok(cache.structure())
            }
            Err(f) => {
                leading.push(cache_record("cache_probes", false, f64::INFINITY, f.message.clone()));
                Err(f.message)
            }
        },
        None => curve
            .poisson_structure(DEFAULT_OVERSAMPLING, &mut curve.spec().rng())
            .map_err(|e| e.to_string()),
    };
    let report = match built {
        Ok(ps) => {
            let mut r = verify::run_battery(&curve, &ps, level);
            leading.append(&mut r.checks);
            VerificationReport::new(curve.spec(), level, leading)
        }
        Err(msg) => {
            if a.cache.is_none() {
                leading.push(cache_record("bracket_build", false, f64::INFINITY, msg));
            }
            VerificationReport::new(curve.spec(), level, leading)
        }
    };
    for c in &report.checks {
        out!(
            "{:<22} {:<4} residual {:>10.3e}  tol {:>8.1e}  samples {:>4}  ambiguous {:>2}  {:>6.2}s",
            c.name,
            if c.passed() { "pass" } else { "FAIL" },
            c.residual,
            c.tolerance,
            c.samples,
            c.ambiguous,
            c.seconds
        );
        if !c.passed() {
            out!("    {}", c.detail);
        }
    }
    if let Some(path) = &a.report {
        write_text(path, &pretty(&report))?;
    }
    if report.passed {
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed()).count();
        Err(Failure::new(VERIFICATION, format!("{failed} check(s) failed")))
    }
}
