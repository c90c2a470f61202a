//! `errbound` — error-bound moduli, Hoffman-constant bounds, and tilt
//! stability for finite max-affine systems and the built-in scalar
//! functions.
//!
//! Reports go to stdout and are byte-identical across repeated runs with
//! the same inputs and environment; diagnostics go to stderr.  Exit codes:
//! 0 success, 1 invalid input or an undefined request, 2 numeric failure
//! or an oracle discrepancy, 3 inconclusive certification.

mod report;
mod spec_file;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use errbound_core::convex::{ConvexFunction, MaxAffineSystem};
use errbound_core::geometry::min_norm_point;
use errbound_core::hoffman::{self, AnalyzeOptions, SweepConfig};
use errbound_core::moduli::{self, ModulusEstimate, RegionSpec, SamplerSpec};
use errbound_core::oracle::{self, OracleConfig};
use errbound_core::sphere;
use errbound_core::stability::{self, Destabilizer, StabilityVerdict, WitnessRecord};
use errbound_core::{Error, Result, Vector};

use report::{ext, labels, num, opt_vector, sweep_csv, vector, yes_no};

#[derive(Parser)]
#[command(
    name = "errbound",
    version,
    about = "Error-bound moduli, Hoffman constants, and tilt stability for max-affine systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate active sets, bound the Hoffman constant, and sample sigma.
    Hoffman(HoffmanArgs),
    /// Minimize the directional derivative over the unit sphere at a point.
    Phi(PhiArgs),
    /// Estimate the error-bound modulus by the ratio and sphere routes.
    Modulus(ModulusArgs),
    /// Certify or refute stability of the error bound under tilts.
    Stability(StabilityArgs),
    /// Cross-check the fast kernels against brute-force oracles.
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct HoffmanArgs {
    /// Path to a JSON system description.
    spec: PathBuf,
    /// Largest active-set size to enumerate (default: every size).
    #[arg(long, value_name = "K")]
    max_size: Option<usize>,
    /// Comma-separated tilt magnitudes; runs a perturbation sweep.
    #[arg(long, value_name = "EPS[,EPS...]")]
    sweep: Option<String>,
    /// Seed for every sampling stage.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Samples per sampling stage.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Write the sweep grid to this CSV file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhiArgs {
    /// Path to a JSON system description.
    spec: Option<PathBuf>,
    /// Built-in scalar function: exp_minus_one, zero, or abs.
    #[arg(long, value_name = "NAME", conflicts_with = "spec")]
    function: Option<String>,
    /// Evaluation point, comma-separated coordinates.
    #[arg(long, value_name = "X[,X...]")]
    at: String,
    /// Seed for the heuristic sphere searches.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct ModulusArgs {
    /// Path to a JSON system description.
    spec: Option<PathBuf>,
    /// Built-in scalar function: exp_minus_one, zero, or abs.
    #[arg(long, value_name = "NAME", conflicts_with = "spec")]
    function: Option<String>,
    /// Estimate the global modulus over origin-centered shells.
    #[arg(long, conflicts_with_all = ["local", "at", "radius"])]
    global: bool,
    /// Estimate the local modulus on balls around --at.
    #[arg(long, requires = "at")]
    local: bool,
    /// Anchor point, comma-separated coordinates.
    #[arg(long, value_name = "X[,X...]")]
    at: Option<String>,
    /// Largest local ball radius; tenths of it fill out the region list.
    #[arg(long, value_name = "R")]
    radius: Option<f64>,
    /// Comma-separated region radii overriding the defaults.
    #[arg(long, value_name = "R[,R...]")]
    shells: Option<String>,
    /// Samples per region component.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Seed for the region sampler.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct StabilityArgs {
    /// Path to a JSON system description.
    spec: Option<PathBuf>,
    /// Built-in scalar function: exp_minus_one, zero, or abs.
    #[arg(long, value_name = "NAME", conflicts_with = "spec")]
    function: Option<String>,
    /// Zero-level anchor for the pointwise verdict, comma-separated.
    #[arg(long, value_name = "X[,X...]", conflicts_with = "global")]
    at: Option<String>,
    /// Assess the error bound over the whole zero level.
    #[arg(long)]
    global: bool,
    /// Stability level to require of the certificate.
    #[arg(long, value_name = "T")]
    tau: Option<f64>,
    /// Tilt magnitude for the destabilizer search in unstable cases.
    #[arg(long, default_value_t = 0.1, value_name = "E")]
    eps: f64,
    /// Seed for boundary sampling and heuristic sphere searches.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct OracleArgs {
    /// Path to a JSON system description.
    spec: PathBuf,
    /// Seed shared by the fast kernels and the oracles.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Oracle grid density per axis.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Sample count for the randomized oracle searches.
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::NotApplicable(_) => 1,
        Error::NumericFailure { .. } => 2,
        Error::Inconclusive { .. } => 3,
    }
}

fn dispatch(cmd: &Command) -> Result<(String, i32)> {
    match cmd {
        Command::Hoffman(a) => cmd_hoffman(a),
        Command::Phi(a) => cmd_phi(a),
        Command::Modulus(a) => cmd_modulus(a),
        Command::Stability(a) => cmd_stability(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
    }
}

fn threads_line() -> String {
    match std::env::var("ERRBOUND_THREADS") {
        Ok(v) => format!("threads: 1 (ERRBOUND_THREADS={v}; the kernels are single-threaded)"),
        Err(_) => String::from("threads: 1 (ERRBOUND_THREADS unset)"),
    }
}

fn parse_coords(text: &str) -> Result<Vector> {
    let mut coords = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let v: f64 = part
            .parse()
            .map_err(|_| Error::invalid_input(format!("cannot parse coordinate {part:?}")))?;
        if !v.is_finite() {
            return Err(Error::invalid_input("coordinates must be finite"));
        }
        coords.push(v);
    }
    Ok(Vector::from_slice(&coords))
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let v: f64 = part
            .parse()
            .map_err(|_| Error::invalid_input(format!("cannot parse {what} {part:?}")))?;
        if !v.is_finite() {
            return Err(Error::invalid_input(format!("{what} must be finite")));
        }
        values.push(v);
    }
    Ok(values)
}

fn check_dim(x: &Vector, f: &ConvexFunction) -> Result<()> {
    if x.dim() != f.dim() {
        return Err(Error::invalid_input(format!(
            "the point has dimension {} but the function has dimension {}",
            x.dim(),
            f.dim()
        )));
    }
    Ok(())
}

fn describe_system(path: &Path, sys: &MaxAffineSystem) -> String {
    format!(
        "{} ({} rows, dimension {}, {} norm)",
        path.display(),
        sys.rows().len(),
        sys.dim(),
        sys.norm().name()
    )
}

fn load_source(spec: Option<&Path>, function: Option<&str>) -> Result<(ConvexFunction, String)> {
    match (spec, function) {
        (Some(path), None) => {
            let sys = spec_file::load_system(path)?;
            let desc = describe_system(path, &sys);
            Ok((ConvexFunction::from_system(sys), desc))
        }
        (None, Some(name)) => {
            let f = ConvexFunction::named(name)?;
            Ok((f, format!("built-in {name} (dimension 1)")))
        }
        (Some(_), Some(_)) => {
            Err(Error::invalid_input("give either a spec path or --function, not both"))
        }
        (None, None) => Err(Error::invalid_input("give a spec path or --function")),
    }
}

fn cmd_hoffman(a: &HoffmanArgs) -> Result<(String, i32)> {
    let sys = spec_file::load_system(&a.spec)?;
    let sweep_cfg = match &a.sweep {
        Some(text) => {
            let eps_grid = parse_f64_list(text, "tilt magnitude")?;
            if eps_grid.is_empty() || eps_grid.iter().any(|e| *e < 0.0) {
                return Err(Error::invalid_input("tilt magnitudes must be nonnegative"));
            }
            Some(SweepConfig {
                eps_grid,
                random_directions: 2,
                seed: a.seed,
                max_size: a.max_size,
                sample_count: a.samples,
            })
        }
        None => None,
    };
    if a.out.is_some() && sweep_cfg.is_none() {
        return Err(Error::invalid_input("--out needs --sweep to produce a grid"));
    }
    let opts = AnalyzeOptions {
        max_size: a.max_size,
        seed: a.seed,
        sample_count: a.samples,
        sweep: sweep_cfg,
    };
    let r = hoffman::analyze(&sys, &opts)?;

    let mut out = String::new();
    let _ = writeln!(out, "system: {}", describe_system(&a.spec, &sys));
    let _ = writeln!(out, "seed: {}", a.seed);
    let _ = writeln!(out, "samples: {}", a.samples);
    let _ = writeln!(out, "{}", threads_line());
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "active sets ({} found, sizes searched up to {}):",
        r.catalog.entries.len(),
        r.catalog.max_size_searched
    );
    for e in &r.catalog.entries {
        let _ = writeln!(
            out,
            "  {}: op = {}, certified = {}, witness = {}",
            labels(&e.labels),
            num(e.op_value),
            yes_no(e.op_certified),
            vector(&e.witness)
        );
    }
    for n in &r.catalog.notes {
        let _ = writeln!(out, "  note: {n}");
    }
    let _ = writeln!(
        out,
        "hoffman lower bound: {} (certified = {})",
        ext(r.lower_bound.value),
        yes_no(r.lower_bound.certified)
    );
    let _ = writeln!(
        out,
        "sampled sigma: {} over {} admitted samples",
        ext(r.sampled.value),
        r.sampled.sample_count
    );
    let _ = writeln!(out, "  sigma witness: {}", opt_vector(r.sampled.witness.as_ref()));
    for n in &r.sampled.notes {
        let _ = writeln!(out, "  note: {n}");
    }
    let _ = writeln!(out, "stability verdict: {}", r.stability.certificate.verdict.name());
    if let Some(t) = r.stability.certificate.tau {
        let _ = writeln!(out, "stability level tau: {}", num(t));
    }
    if let Some(table) = &r.sweep {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "perturbation sweep ({} anchors x {} directions):",
            table.anchors.len(),
            table.directions.len()
        );
        for (eps, lower, sigma) in &table.summaries {
            let _ = writeln!(
                out,
                "  eps = {}: min lower bound = {}, min sampled sigma = {}",
                num(*eps),
                ext(*lower),
                ext(*sigma)
            );
        }
        let failed = table.cells.iter().filter(|c| c.error.is_some()).count();
        if failed > 0 {
            let _ = writeln!(out, "  failed cells: {failed}");
        }
        if let Some(path) = &a.out {
            std::fs::write(path, sweep_csv(table)).map_err(|e| {
                Error::invalid_input(format!("cannot write {}: {e}", path.display()))
            })?;
            let _ = writeln!(out, "  csv written: {} ({} cells)", path.display(), table.cells.len());
        }
    }
    let code = if r.lower_bound.certified { 0 } else { 3 };
    Ok((out, code))
}

fn cmd_phi(a: &PhiArgs) -> Result<(String, i32)> {
    let (f, desc) = load_source(a.spec.as_deref(), a.function.as_deref())?;
    let x = parse_coords(&a.at)?;
    check_dim(&x, &f)?;
    let r = sphere::phi(&f, &x, a.seed)?;
    let mut out = String::new();
    let _ = writeln!(out, "function: {desc}");
    let _ = writeln!(out, "at: {}", vector(&x));
    let _ = writeln!(out, "seed: {}", a.seed);
    let _ = writeln!(out, "{}", threads_line());
    let _ = writeln!(out);
    let _ = writeln!(out, "phi: {}", num(r.value));
    let _ = writeln!(out, "argmin: {}", vector(&r.argmin));
    let _ = writeln!(out, "method: {}", r.method.name());
    let _ = writeln!(out, "certified: {}", yes_no(r.certified));
    let _ = writeln!(out, "value at point: {}", ext(f.value(&x)?));
    if let Some(sys) = f.as_system() {
        let _ = writeln!(out, "active rows: {}", labels(&sys.active_labels(&x, None)));
    }
    Ok((out, 0))
}

fn push_estimate(out: &mut String, est: &ModulusEstimate) {
    let _ = writeln!(
        out,
        "{} route: value = {}, admitted samples = {}, witness = {}",
        est.route.name(),
        ext(est.value),
        est.sample_count,
        opt_vector(est.infimum_witness.as_ref())
    );
    for n in &est.notes {
        let _ = writeln!(out, "  note: {n}");
    }
}

fn cmd_modulus(a: &ModulusArgs) -> Result<(String, i32)> {
    let (f, desc) = load_source(a.spec.as_deref(), a.function.as_deref())?;
    if a.global == a.local {
        return Err(Error::invalid_input("choose exactly one of --global or --local"));
    }
    let shells = match &a.shells {
        Some(text) => {
            let radii = parse_f64_list(text, "region radius")?;
            if radii.is_empty() || radii.iter().any(|r| *r <= 0.0) {
                return Err(Error::invalid_input("region radii must be positive"));
            }
            Some(radii)
        }
        None => None,
    };

    let mut out = String::new();
    let _ = writeln!(out, "function: {desc}");

    let report = if a.global {
        let radii = shells.unwrap_or_else(|| vec![1.0, 10.0, 100.0]);
        let spec = SamplerSpec {
            seed: a.seed,
            count: a.samples,
            region: RegionSpec::Shells { center: Vector::zeros(f.dim()), radii },
        };
        moduli::global_modulus(&f, &spec)?
    } else {
        let at = a.at.as_ref().ok_or_else(|| Error::invalid_input("--local needs --at"))?;
        let anchor = parse_coords(at)?;
        check_dim(&anchor, &f)?;
        let radii = match (shells, a.radius) {
            (Some(radii), _) => radii,
            (None, Some(r)) => {
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::invalid_input("--radius must be positive"));
                }
                vec![r, r / 10.0, r / 100.0]
            }
            (None, None) => vec![1e-1, 1e-2, 1e-3],
        };
        let _ = writeln!(out, "anchor: {}", vector(&anchor));
        let spec = SamplerSpec {
            seed: a.seed,
            count: a.samples,
            region: RegionSpec::Balls { center: anchor.clone(), radii },
        };
        moduli::local_modulus(&f, &anchor, Some(&spec))?
    };

    let _ = writeln!(out, "kind: {}", report.kind.name());
    let _ = writeln!(out, "region: {}", report.direct.region);
    if report.primal.region != report.direct.region {
        let _ = writeln!(out, "primal region: {}", report.primal.region);
    }
    let _ = writeln!(out, "samples per region: {}", a.samples);
    let _ = writeln!(out, "seed: {}", a.seed);
    let _ = writeln!(out, "{}", threads_line());
    let _ = writeln!(out);
    push_estimate(&mut out, &report.direct);
    push_estimate(&mut out, &report.primal);
    match report.agreement_gap() {
        Some(g) => {
            let _ = writeln!(out, "agreement gap: {}", num(g));
        }
        None => {
            let _ = writeln!(out, "agreement gap: none (a route is infinite)");
        }
    }
    Ok((out, 0))
}

fn push_witness(out: &mut String, w: &WitnessRecord) {
    match &w.tilt {
        Some(t) => {
            let _ = writeln!(
                out,
                "witness: point = {}, phi = {}, tilt direction = {}, tilt magnitude = {}",
                vector(&w.point),
                num(w.phi_value),
                vector(&t.direction),
                num(t.magnitude)
            );
        }
        None => {
            let _ = writeln!(out, "witness: point = {}, phi = {}", vector(&w.point), num(w.phi_value));
        }
    }
}

fn push_destabilizer(out: &mut String, d: &Destabilizer, eps: f64) -> Result<()> {
    let _ = writeln!(out);
    let _ = writeln!(out, "destabilizer (eps = {}):", num(eps));
    let _ = writeln!(
        out,
        "  mode: {} (guaranteed -phi at the witness <= {} * eps plus slack)",
        d.mode.name(),
        num(d.mode.guarantee_factor())
    );
    let _ = writeln!(out, "  tilt anchor: {}", vector(&d.tilt.anchor));
    let _ = writeln!(out, "  tilt direction: {}", vector(&d.tilt.direction));
    let _ = writeln!(out, "  tilt magnitude: {}", num(d.tilt.magnitude));
    let _ = writeln!(out, "  witness: {}", vector(&d.witness));
    let _ = writeln!(out, "  phi at witness: {}", num(d.phi_at_witness));
    let value = d.perturbed.value(&d.witness)?;
    let dist = moduli::distance_to_solution(&d.perturbed, &d.witness)?;
    match (value.finite(), dist.distance.finite()) {
        (Some(v), Some(dd)) if v > 0.0 && dd > 0.0 => {
            let _ = writeln!(out, "  perturbed value at witness: {}", num(v));
            let _ = writeln!(out, "  distance to perturbed solution set: {}", num(dd));
            let _ = writeln!(out, "  modulus upper bound from witness: {}", num(v / dd));
        }
        _ => {
            let _ = writeln!(out, "  modulus upper bound from witness: unavailable");
        }
    }
    for n in &d.notes {
        let _ = writeln!(out, "  note: {n}");
    }
    Ok(())
}

fn cmd_stability(a: &StabilityArgs) -> Result<(String, i32)> {
    let (f, desc) = load_source(a.spec.as_deref(), a.function.as_deref())?;
    let mut out = String::new();
    let _ = writeln!(out, "function: {desc}");

    if let Some(at) = &a.at {
        let anchor = parse_coords(at)?;
        check_dim(&anchor, &f)?;
        let cert = stability::point_stability(&f, &anchor, a.tau)?;
        let _ = writeln!(out, "scope: point");
        let _ = writeln!(out, "anchor: {}", vector(&anchor));
        let _ = writeln!(out, "seed: {}", a.seed);
        let _ = writeln!(out, "{}", threads_line());
        let _ = writeln!(out);
        let _ = writeln!(out, "verdict: {}", cert.verdict.name());
        if let Some(p) = cert.phi_at_anchor {
            let _ = writeln!(out, "phi at anchor: {}", num(p));
        }
        let tol = a.tau.unwrap_or_else(|| stability::instability_tol(&f, &anchor));
        let _ = writeln!(out, "instability tolerance: {}", num(tol));
        match cert.tau {
            Some(t) => {
                let _ = writeln!(out, "tau: {}", num(t));
            }
            None => {
                let _ = writeln!(out, "tau: none");
            }
        }
        for w in &cert.witnesses {
            push_witness(&mut out, w);
        }
        for n in &cert.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let code = match cert.verdict {
            StabilityVerdict::Stable => {
                if let Some(t) = cert.tau {
                    let _ = writeln!(
                        out,
                        "tilt-robust margin: a tilt of magnitude eps below {} keeps the bound, leaving |phi| at or above {} minus eps",
                        num(t),
                        num(t)
                    );
                }
                0
            }
            StabilityVerdict::Unstable => {
                let d = stability::destabilizer_search(&f, Some(&anchor), a.eps)?;
                push_destabilizer(&mut out, &d, a.eps)?;
                0
            }
            StabilityVerdict::Inconclusive => 3,
        };
        return Ok((out, code));
    }
    if !a.global {
        return Err(Error::invalid_input("give --at or --global"));
    }

    let r = stability::global_stability(&f, a.seed)?;
    let cert = &r.certificate;
    let _ = writeln!(out, "scope: global");
    let _ = writeln!(out, "seed: {}", a.seed);
    let _ = writeln!(out, "{}", threads_line());
    let _ = writeln!(out);
    let _ = writeln!(out, "verdict: {}", cert.verdict.name());
    match cert.tau {
        Some(t) => {
            let _ = writeln!(out, "tau: {}", num(t));
        }
        None => {
            let _ = writeln!(out, "tau: none");
        }
    }
    if let Some(m) = cert.min_phi_over_boundary {
        let _ = writeln!(out, "min phi over the boundary: {}", num(m));
    }
    for w in &cert.witnesses {
        push_witness(&mut out, w);
    }
    for n in &cert.notes {
        let _ = writeln!(out, "note: {n}");
    }
    if let Some(b) = &r.boundary {
        let _ = writeln!(
            out,
            "boundary floor: min |phi| = {}, exact = {}",
            num(b.min_abs_phi),
            yes_no(b.exact)
        );
        for w in &b.witnesses {
            let _ = writeln!(out, "  at {} phi = {}", vector(&w.point), num(w.phi_value));
        }
        for n in &b.notes {
            let _ = writeln!(out, "  note: {n}");
        }
    }
    if let Some(i) = &r.interior {
        let mu = match i.mu_interior {
            Some(m) => num(m),
            None => String::from("none"),
        };
        let _ = writeln!(
            out,
            "interior flatness: holds = {}, exact = {}, interior floor = {mu}",
            yes_no(i.holds),
            yes_no(i.exact)
        );
        for w in &i.witnesses {
            let _ = writeln!(
                out,
                "  slope tier {}: phi = {} at {}",
                num(w.target),
                num(w.phi),
                vector(&w.point)
            );
        }
        for n in &i.notes {
            let _ = writeln!(out, "  note: {n}");
        }
    }
    if let Some(t) = a.tau {
        let met = cert.tau.is_some_and(|ct| ct >= t);
        let _ = writeln!(out, "tau threshold {}: {}", num(t), if met { "met" } else { "not met" });
    }
    let code = match cert.verdict {
        StabilityVerdict::Stable => 0,
        StabilityVerdict::Unstable => {
            let d = stability::destabilizer_search(&f, None, a.eps)?;
            push_destabilizer(&mut out, &d, a.eps)?;
            0
        }
        StabilityVerdict::Inconclusive => 3,
    };
    Ok((out, code))
}

/// Deterministic probe points: a Kronecker lattice on the centered cube
/// with side `2 * radius`, so no random-number dependency enters the
/// binary and repeated runs compare the oracles at identical points.
fn probe_points(dim: usize, count: usize, radius: f64) -> Vec<Vector> {
    let steps: &[f64] = match dim {
        1 => &[0.618_033_988_749_894_9],
        2 => &[0.754_877_666_246_692_7, 0.569_840_290_998_053_2],
        _ => &[0.819_172_513_396_164_4, 0.671_043_606_703_789_3, 0.549_700_477_901_970_3],
    };
    (1..=count)
        .map(|k| {
            let coords: Vec<f64> = (0..dim)
                .map(|j| radius * (2.0 * (k as f64 * steps[j]).fract() - 1.0))
                .collect();
            Vector::from_slice(&coords)
        })
        .collect()
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "[pass]"
    } else {
        "[fail]"
    }
}

fn gradients_for(sys: &MaxAffineSystem, set: &[String]) -> Vec<Vector> {
    sys.rows()
        .iter()
        .filter(|r| set.iter().any(|l| *l == r.label))
        .map(|r| r.gradient.clone())
        .collect()
}

fn cmd_oracle_check(a: &OracleArgs) -> Result<(String, i32)> {
    const TOL: f64 = 1e-3;
    let sys = spec_file::load_system(&a.spec)?;
    let f = ConvexFunction::from_system(sys.clone());
    let cfg = OracleConfig {
        seed: a.seed,
        resolution: a.resolution,
        sample_count: a.samples,
        radius: 4.0,
    };

    let mut out = String::new();
    let _ = writeln!(out, "system: {}", describe_system(&a.spec, &sys));
    let _ = writeln!(out, "seed: {}", a.seed);
    let _ = writeln!(out, "resolution: {}", a.resolution);
    let _ = writeln!(out, "samples: {}", a.samples);
    let _ = writeln!(out, "{}", threads_line());
    let _ = writeln!(out);

    let poly = sys.polyhedron();
    let points = probe_points(sys.dim(), 20, 2.5);
    let mut max_distance_gap = 0.0_f64;
    let mut low_confidence = 0_usize;
    for x in &points {
        let fast = moduli::distance_to_solution(&f, x)?;
        let brute = oracle::brute_distance(x, &poly, &cfg)?;
        if brute.low_confidence {
            low_confidence += 1;
        }
        let gap = match (fast.distance.finite(), brute.value.finite()) {
            (Some(u), Some(v)) => (u - v).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        max_distance_gap = max_distance_gap.max(gap);
    }
    let distance_ok = max_distance_gap <= TOL;
    let _ = writeln!(
        out,
        "distance oracle ({} probe points): max discrepancy = {} {}",
        points.len(),
        num(max_distance_gap),
        pass_fail(distance_ok)
    );
    if low_confidence > 0 {
        let _ = writeln!(out, "  low-confidence oracle results: {low_confidence}");
    }

    let catalog = hoffman::enumerate_active_sets(&sys, None)?;
    let mut sets: Vec<Vec<Vector>> =
        catalog.entries.iter().map(|e| gradients_for(&sys, &e.labels)).collect();
    sets.push(sys.rows().iter().map(|r| r.gradient.clone()).collect());
    let mut max_sphere_gap = 0.0_f64;
    let mut max_minnorm_gap = 0.0_f64;
    for grads in &sets {
        let fast = sphere::sphere_min_over_set(grads, sys.norm(), a.seed)?;
        let brute = oracle::brute_sphere_min(grads, sys.norm(), &cfg)?;
        max_sphere_gap = max_sphere_gap.max((fast.value - brute).abs());
        let fast_mn = min_norm_point(grads)?.distance;
        let brute_mn = oracle::brute_min_norm(grads, &cfg)?;
        max_minnorm_gap = max_minnorm_gap.max((fast_mn - brute_mn).abs());
    }
    let sphere_ok = max_sphere_gap <= TOL;
    let minnorm_ok = max_minnorm_gap <= TOL;
    let _ = writeln!(
        out,
        "sphere oracle ({} gradient sets): max discrepancy = {} {}",
        sets.len(),
        num(max_sphere_gap),
        pass_fail(sphere_ok)
    );
    let _ = writeln!(
        out,
        "min-norm oracle ({} gradient sets): max discrepancy = {} {}",
        sets.len(),
        num(max_minnorm_gap),
        pass_fail(minnorm_ok)
    );

    let violation = oracle::convexity_probe(&f, &cfg)?;
    match &violation {
        None => {
            let _ = writeln!(out, "convexity probe: no violation {}", pass_fail(true));
        }
        Some(v) => {
            let _ = writeln!(
                out,
                "convexity probe: gap = {} between {} and {} {}",
                num(v.gap),
                vector(&v.a),
                vector(&v.b),
                pass_fail(false)
            );
        }
    }

    let all_ok = distance_ok && sphere_ok && minnorm_ok && violation.is_none();
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "result: {} (tolerance {})",
        if all_ok { "pass" } else { "fail" },
        num(TOL)
    );
    Ok((out, if all_ok { 0 } else { 2 }))
}
