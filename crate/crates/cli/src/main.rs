//! `skylink`: linking values of event skies, wave-front export, causal
//! queries, and the acceptance suite, all driven by TOML scenario files.

mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use report::{point_str, sig, CliError, Report};
use scenario::Scenario;
use skylink::alk::{AlkEngine, Orientation, TimelikeCurve};
use skylink::wavefront::{front_to_csv, front_to_svg, propagate_front, refocus_detect};
use skylink::{
    causality_from_alk, coefficient_group, is_good, run_all, sighting_count, suite_passed,
    AlkComputation, CausalVerdict, CoefficientGroup, Error, Event, LinkVerdict, StaticSpacetime,
    SurfaceModel, TimeOrder, VerifyLevel,
};

#[derive(Parser)]
#[command(
    name = "skylink",
    version,
    about = "Affine linking numbers of event skies in static spacetimes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Counting,
    Intersection,
    Homotopy,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Level {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Cmd {
    /// Linking value of the skies of two events
    Alk {
        #[arg(short, long)]
        scenario: PathBuf,
        /// Names of the two events in the scenario
        #[arg(default_value = "x")]
        x: String,
        #[arg(default_value = "y")]
        y: String,
        /// Engine to run; `all` cross-checks every applicable engine
        #[arg(short, long, value_enum, default_value_t = Method::All)]
        method: Method,
    },
    /// Export wave fronts of an event at chosen slice offsets
    Front {
        #[arg(short, long)]
        scenario: PathBuf,
        #[arg(default_value = "x")]
        x: String,
        /// Comma-separated nonnegative time offsets
        #[arg(short, long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(short, long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Directory receiving one file per time
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
    /// Ground-truth causal relation of two events
    Causal {
        #[arg(short, long)]
        scenario: PathBuf,
        #[arg(default_value = "x")]
        x: String,
        #[arg(default_value = "y")]
        y: String,
    },
    /// Number of times an observer travelling from y to z sees the flash at x
    Sight {
        #[arg(short, long)]
        scenario: PathBuf,
        #[arg(default_value = "x")]
        x: String,
        #[arg(default_value = "y")]
        y: String,
        #[arg(default_value = "z")]
        z: String,
    },
    /// Coefficient group of the slice and whether it is good
    Group {
        #[arg(short, long)]
        scenario: PathBuf,
    },
    /// First path parameter at which two event paths become null related
    Nullmoment {
        #[arg(short, long)]
        scenario: PathBuf,
        /// Curve names holding the two event paths
        #[arg(default_value = "path1")]
        path1: String,
        #[arg(default_value = "path2")]
        path2: String,
        /// Report every boundary crossing instead of the first
        #[arg(long)]
        exhaustive: bool,
    },
    /// Run the acceptance criteria
    Verify {
        #[arg(short, long, value_enum, default_value_t = Level::Quick)]
        level: Level,
        /// Seed for the randomized suites
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Test hook: run with the flipped sign convention (must fail)
        #[arg(long, hide = true)]
        reversed: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let wants_out = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if wants_out {
                ExitCode::SUCCESS
            } else {
                // Usage problems share the configuration exit code.
                ExitCode::from(64)
            };
        }
    };
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => e.report(),
    }
}

fn run(cmd: Cmd) -> Result<ExitCode, CliError> {
    match cmd {
        Cmd::Alk { scenario, x, y, method } => cmd_alk(&scenario, &x, &y, method),
        Cmd::Front { scenario, x, times, format, out } => {
            cmd_front(&scenario, &x, &times, format, &out)
        }
        Cmd::Causal { scenario, x, y } => cmd_causal(&scenario, &x, &y),
        Cmd::Sight { scenario, x, y, z } => cmd_sight(&scenario, &x, &y, &z),
        Cmd::Group { scenario } => cmd_group(&scenario),
        Cmd::Nullmoment { scenario, path1, path2, exhaustive } => {
            cmd_nullmoment(&scenario, &path1, &path2, exhaustive)
        }
        Cmd::Verify { level, seed, reversed } => Ok(cmd_verify(level, seed, reversed)),
    }
}

fn open(path: &Path) -> Result<(Scenario, SurfaceModel, StaticSpacetime), CliError> {
    let sc = scenario::load(path)?;
    let model = sc.build_model()?;
    let st = StaticSpacetime::with_policy(model.clone(), sc.policy());
    Ok((sc, model, st))
}

fn echo_header(rep: &mut Report, sc: &Scenario, path: &Path) {
    rep.kv("schema", scenario::SCHEMA);
    rep.kv("scenario", path.display());
    rep.kv("model", sc.model_line());
}

fn echo_event(rep: &mut Report, model: &SurfaceModel, role: &str, name: &str, e: &Event) {
    rep.kv(
        &format!("event {role}"),
        format!("{name} point={} time={}", point_str(model, &e.point), sig(e.time)),
    );
}

fn verdict_str(model: &SurfaceModel, v: &CausalVerdict) -> String {
    match v {
        CausalVerdict::Unrelated => "unrelated".into(),
        CausalVerdict::ChronologicallyRelated { direction, identical } => {
            let dir = match direction {
                TimeOrder::Future => "future",
                TimeOrder::Past => "past",
            };
            if *identical {
                format!("identical events ({dir})")
            } else {
                format!("chronologically related ({dir})")
            }
        }
        CausalVerdict::NullRelated { connections } => {
            let mut s = format!("null related through {} connection", connections.len());
            if connections.len() != 1 {
                s.push('s');
            }
            for (i, c) in connections.iter().enumerate() {
                s.push_str(&format!("; [{i}] length={}", sig(c.length)));
            }
            let _ = model;
            s
        }
    }
}

fn cmd_alk(path: &Path, xn: &str, yn: &str, method: Method) -> Result<ExitCode, CliError> {
    let (sc, model, st) = open(path)?;
    let x = sc.event(&model, xn)?;
    let y = sc.event(&model, yn)?;
    let mut rep = Report::new("alk");
    echo_header(&mut rep, &sc, path);
    echo_event(&mut rep, &model, "x", xn, &x);
    echo_event(&mut rep, &model, "y", yn, &y);
    rep.kv(
        "method",
        match method {
            Method::Counting => "counting",
            Method::Intersection => "intersection",
            Method::Homotopy => "homotopy",
            Method::All => "all",
        },
    );

    // Null pairs have no linking value; surface the connection list and the
    // dedicated exit code before any engine runs.
    let verdict = st.causal_relation(&x, &y)?;
    rep.kv("oracle", verdict_str(&model, &verdict));
    if matches!(verdict, CausalVerdict::NullRelated { .. }) {
        rep.print();
        return Err(CliError::NullRelated(
            "the events lie on a common null geodesic; no linking value exists".into(),
        ));
    }

    let desc = sc.descriptor(&model)?;
    let group = coefficient_group(&desc)?;
    rep.kv("group", group_str(&group));
    let engine = AlkEngine::new(st.clone(), group);
    let mut computed: Vec<(&str, AlkComputation)> = Vec::new();

    if matches!(method, Method::Counting | Method::All) {
        computed.push(("counting", engine.alk_by_counting(&x, &y)?));
    }
    if matches!(method, Method::Intersection | Method::All) {
        // The crossing engine wants the window in slice order and a curve
        // arriving at the later event.
        let (a, b) = if y.time >= x.time { (&x, &y) } else { (&y, &x) };
        let named = sc.curves.contains_key("observer");
        let curve = if named {
            sc.curve(&model, "observer")?
        } else {
            TimelikeCurve::vertical(&model, &b.point, a.time - 0.5, b.time, 64)?
        };
        match engine.alk_by_intersection(a, b, &curve) {
            Ok(c) => computed.push(("intersection", c)),
            Err(Error::NonGenericCurve(why)) if method == Method::All && !named => {
                // The fallback static observer can land on a caustic; a
                // scenario [curves.observer] picks the path explicitly.
                rep.kv("note[intersection]", format!("skipped: {why}"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if matches!(method, Method::Homotopy | Method::All) {
        match engine.alk_by_homotopy(&x, &y) {
            Ok(c) => computed.push(("homotopy", c)),
            Err(Error::ChartOverflow(why)) if method == Method::All => {
                // The separating-translation engine is chart-bound; on a
                // closed curved slice it declines rather than guesses.
                rep.kv("note[homotopy]", format!("skipped: {why}"));
            }
            Err(e) => return Err(e.into()),
        }
    }

    for (label, comp) in &computed {
        rep.kv(&format!("alk[{label}]"), comp.value.representative);
    }
    for (label, comp) in &computed {
        rep.ledger(label, comp, &model);
    }

    if method == Method::All {
        let first = computed[0].1.value.representative;
        if computed.iter().all(|(_, c)| c.value.representative == first) {
            rep.kv("cross-method", "agree");
        } else {
            rep.kv("cross-method", "MISMATCH");
            rep.print();
            return Err(CliError::Numeric(
                "the engines disagree; see the ledgers above".into(),
            ));
        }
    }

    // What the value certifies, with the ground-truth oracle as audit trail.
    let class = causality_from_alk(&st, &desc, &x, &y)?;
    let definite = match class.verdict {
        LinkVerdict::Related => {
            rep.kv("link-verdict", "related");
            true
        }
        LinkVerdict::Unrelated => {
            rep.kv("link-verdict", "unrelated");
            true
        }
        LinkVerdict::Inconclusive => {
            rep.kv("link-verdict", "inconclusive (zero on a slice that is not good)");
            false
        }
    };
    if definite {
        rep.kv("oracle-confirmed", class.oracle_confirmed);
        if !class.oracle_confirmed {
            rep.print();
            return Err(CliError::Numeric(
                "the certified verdict contradicts the causal oracle".into(),
            ));
        }
    }
    rep.print();
    Ok(ExitCode::SUCCESS)
}

fn group_str(g: &CoefficientGroup) -> String {
    match g {
        CoefficientGroup::Integers => "Z".to_string(),
        CoefficientGroup::Trivial => "trivial".to_string(),
        CoefficientGroup::ModN(n) => format!("Z/{n}"),
        CoefficientGroup::UnknownQuotient { pi1_divides } => {
            format!("an unknown quotient of Z (order divides {pi1_divides})")
        }
    }
}

fn cmd_front(
    path: &Path,
    xn: &str,
    times: &[f64],
    format: Format,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let (sc, model, st) = open(path)?;
    let x = sc.event(&model, xn)?;
    let mut rep = Report::new("front");
    echo_header(&mut rep, &sc, path);
    echo_event(&mut rep, &model, "x", xn, &x);
    rep.kv("samples", st.policy.n_samples);

    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
    for &t in times {
        let front = propagate_front(&st, &x, t, st.policy.n_samples)?;
        let (body, ext) = match format {
            Format::Csv => (front_to_csv(&model, &front)?, "csv"),
            Format::Svg => (front_to_svg(&model, &front)?, "svg"),
        };
        let name = format!("front_{xn}_t{t:.6}.{ext}");
        let target = out.join(&name);
        std::fs::write(&target, body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", target.display())))?;
        rep.kv(&format!("file[{}]", sig(t)), name);
        if let Some(center) = refocus_detect(&st, &front)? {
            rep.kv(
                &format!("refocus[{}]", sig(t)),
                format!("front gathered at {}", point_str(&model, &center)),
            );
        }
    }
    rep.print();
    Ok(ExitCode::SUCCESS)
}

fn cmd_causal(path: &Path, xn: &str, yn: &str) -> Result<ExitCode, CliError> {
    let (sc, model, st) = open(path)?;
    let x = sc.event(&model, xn)?;
    let y = sc.event(&model, yn)?;
    let mut rep = Report::new("causal");
    echo_header(&mut rep, &sc, path);
    echo_event(&mut rep, &model, "x", xn, &x);
    echo_event(&mut rep, &model, "y", yn, &y);
    let verdict = st.causal_relation(&x, &y)?;
    rep.kv("verdict", verdict_str(&model, &verdict));
    if verdict.is_related() {
        rep.num("lorentz-distance", st.lorentz_distance(&x, &y)?);
    }
    let null = matches!(verdict, CausalVerdict::NullRelated { .. });
    rep.print();
    Ok(if null { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_sight(path: &Path, xn: &str, yn: &str, zn: &str) -> Result<ExitCode, CliError> {
    let (sc, model, st) = open(path)?;
    let x = sc.event(&model, xn)?;
    let y = sc.event(&model, yn)?;
    let z = sc.event(&model, zn)?;
    let mut rep = Report::new("sight");
    echo_header(&mut rep, &sc, path);
    echo_event(&mut rep, &model, "flash", xn, &x);
    echo_event(&mut rep, &model, "from", yn, &y);
    echo_event(&mut rep, &model, "to", zn, &z);
    let n = sighting_count(&st, &x, &y, &z)?;
    rep.kv("sightings", n);
    rep.print();
    Ok(ExitCode::SUCCESS)
}

fn cmd_group(path: &Path) -> Result<ExitCode, CliError> {
    let (sc, model, _st) = open(path)?;
    let desc = sc.descriptor(&model)?;
    let mut rep = Report::new("group");
    echo_header(&mut rep, &sc, path);
    rep.kv(
        "descriptor",
        format!(
            "dimension={} closed={} pi1={:?} degree-image={:?}",
            desc.dimension, desc.closed, desc.pi1_order, desc.degree_image
        ),
    );
    let group = coefficient_group(&desc)?;
    let good = is_good(&desc)?;
    rep.line(format!(
        "A(M) = {}; {}",
        group_str(&group),
        if good { "good" } else { "not good" }
    ));
    rep.print();
    Ok(ExitCode::SUCCESS)
}

fn cmd_nullmoment(
    path: &Path,
    p1: &str,
    p2: &str,
    exhaustive: bool,
) -> Result<ExitCode, CliError> {
    let (sc, model, st) = open(path)?;
    let path1 = sc.path(&model, p1)?;
    let path2 = sc.path(&model, p2)?;
    let mut rep = Report::new("nullmoment");
    echo_header(&mut rep, &sc, path);
    rep.kv("path1", format!("{p1} ({} samples)", path1.len()));
    rep.kv("path2", format!("{p2} ({} samples)", path2.len()));
    if exhaustive {
        let taus = st.null_moments_exhaustive(&path1, &path2)?;
        rep.kv("null-moments", taus.len());
        for (i, tau) in taus.iter().enumerate() {
            rep.num(&format!("tau[{i}]"), *tau);
        }
    } else {
        match st.null_moment_detector(&path1, &path2)? {
            Some(tau) => rep.num("null-moment", tau),
            None => rep.kv("null-moment", "none"),
        }
    }
    rep.print();
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(level: Level, seed: u64, reversed: bool) -> ExitCode {
    let lv = match level {
        Level::Quick => VerifyLevel::Quick,
        Level::Full => VerifyLevel::Full,
    };
    let mut rep = Report::new("verify");
    rep.kv("level", if lv == VerifyLevel::Quick { "quick" } else { "full" });
    rep.kv("seed", seed);
    let results = if reversed {
        rep.kv("sign-convention", "reversed (test hook)");
        skylink::verify::run_all_with(lv, seed, Orientation::Reversed)
    } else {
        run_all(lv, seed)
    };
    for r in &results {
        rep.line(r.to_string());
    }
    let ok = suite_passed(&results);
    rep.kv(
        "verdict",
        if ok {
            "all criteria passed".to_string()
        } else {
            format!(
                "{} of {} criteria FAILED",
                results.iter().filter(|r| !r.passed).count(),
                results.len()
            )
        },
    );
    rep.print();
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
