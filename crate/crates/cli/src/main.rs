//! `sclkit`: exact stable commutator length and Gromov–Thurston norms from
//! the command line.
//!
//! Exit codes: 0 success (including witness and norm-zero outcomes),
//! 1 failed check or certificate, 2 malformed input, 3 chain not
//! null-homologous, 4 class not in the kernel, 5 computation gave up.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use sclkit::checks::{run_checks, CheckConfig};
use sclkit::gluing::{build_closed_surface, summary, GlueError, GlueExport, GlueOutcome};
use sclkit::graph::{unit_ball_2d, GraphError, GraphOfGroups, H2Class};
use sclkit::oracle::{oracle_scl, DEFAULT_LIMIT};
use sclkit::scl::{compute, scl, SclError, SclValue};
use sclkit::surface::{assemble, CombinatorialSurface, SurfaceExport};
use sclkit::words::{parse_chain, Alphabet, Chain};
use sclkit::Rational;

/// `println!` that exits quietly once stdout is closed, e.g. by `head`.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(name = "sclkit", version, about = "Exact scl in free groups and norms on graphs of free groups")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ChainArgs {
    /// Generator letters, e.g. `a,b`.
    #[arg(long, default_value = "a,b")]
    gens: String,
    /// Chain expression such as `abAB` or `ab + B + A` or `2*aab - 1/2*ab`.
    chain: String,
}

#[derive(Args)]
struct ClassArgs {
    /// Graph file.
    graph: String,
    /// Class in edge-end coordinates, e.g. `e1.from=1,e1.to=-1` (repeatable).
    #[arg(long = "class")]
    class: Vec<String>,
    /// Index into the computed H2 basis (repeatable).
    #[arg(long = "class-basis")]
    class_basis: Vec<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// scl of a chain with its extremal surface and dual certificate.
    Scl(ChainArgs),
    /// The extremal surface of a chain.
    Surface(ChainArgs),
    /// Brute-force upper bound from all pairings of a given degree.
    Oracle {
        #[command(flatten)]
        chain: ChainArgs,
        /// Number of formal copies of the chain.
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Cap on the number of pairings examined.
        #[arg(long, default_value_t = DEFAULT_LIMIT, value_parser = clap::value_parser!(u64).range(1..))]
        limit: u64,
    },
    /// Group presentation of a graph of groups.
    Present { graph: String },
    /// Basis of second homology in edge-end coordinates.
    H2 { graph: String },
    /// Gromov–Thurston norm of a class.
    Norm(ClassArgs),
    /// Unit ball of the norm on the plane spanned by two classes.
    Ball {
        #[command(flatten)]
        class: ClassArgs,
        /// Subdivision depth guard.
        #[arg(long, default_value_t = sclkit::graph::DEFAULT_DEPTH as u64, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
    },
    /// Closed surface realizing the norm of a class, or a witness.
    Glue {
        #[command(flatten)]
        class: ClassArgs,
        /// Print the step-by-step plan.
        #[arg(long)]
        plan: bool,
    },
    /// Seeded randomized property suites.
    Check {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Corpus sizes, one suite run per entry; `0` runs nothing.
        #[arg(long, value_delimiter = ',', default_value = "25")]
        sizes: Vec<usize>,
        /// Longest random word.
        #[arg(long, default_value_t = 5)]
        max_len: usize,
        /// Deliberately perturb scl (negative control).
        #[arg(long, hide = true)]
        corrupt: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl ToString) -> Failure {
    Failure { code, message: message.to_string() }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        let code = match e {
            GraphError::NotInKernel => 4,
            GraphError::DepthExceeded(_) => 5,
            _ => 2,
        };
        fail(code, e)
    }
}

impl From<GlueError> for Failure {
    fn from(e: GlueError) -> Self {
        let code = match e {
            GlueError::NotInKernel | GlueError::ZeroClass => 4,
            _ => 5,
        };
        fail(code, e)
    }
}

fn print_json<T: Serialize>(value: &T) {
    out!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn read_chain(args: &ChainArgs) -> Result<Chain, Failure> {
    let al = Alphabet::parse(&args.gens).map_err(|e| fail(2, e))?;
    parse_chain(&args.chain, &al).map_err(|e| fail(2, e))
}

fn read_graph(path: &str) -> Result<GraphOfGroups, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(2, format!("{path}: {e}")))?;
    Ok(GraphOfGroups::parse(&text)?)
}

/// Explicit classes first, then basis indices, then `default` basis indices.
fn read_classes(g: &GraphOfGroups, args: &ClassArgs, default: &[usize]) -> Result<Vec<H2Class>, Failure> {
    let mut out = Vec::new();
    for c in &args.class {
        out.push(g.parse_class(c)?);
    }
    let basis = g.h2_lattice();
    let indices = if args.class.is_empty() && args.class_basis.is_empty() { default } else { &args.class_basis[..] };
    for &k in indices {
        let c = basis.get(k).ok_or_else(|| fail(4, format!("H2 has rank {}, no basis vector {k}", basis.len())))?;
        out.push(c.clone());
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct SclJson {
    chain: String,
    scl: String,
    dual_value: Option<String>,
    surface: Option<SurfaceExport>,
}

/// Extremal surface of a chain together with the degree relative to the chain.
fn extremal_surface(c: &Chain) -> Result<Option<(CombinatorialSurface, num_bigint::BigInt, Rational, Rational)>, Failure> {
    if c.is_empty() {
        return Ok(None);
    }
    let comp = match compute(c) {
        Ok(comp) => comp,
        Err(SclError::NotNullHomologous) => return Err(fail(3, "scl = infinity (not null-homologous)")),
        Err(e) => return Err(fail(5, e)),
    };
    let s = assemble(&comp.problem, &comp.result.extremal).map_err(|e| fail(5, e))?;
    let n = &comp.result.extremal.degree * &comp.denominator;
    let dual = &comp.result.dual_value / Rational::from_integer(comp.denominator.clone());
    Ok(Some((s, n, comp.value(), dual)))
}

fn describe_surface(s: &CombinatorialSurface, n: &num_bigint::BigInt) -> String {
    let genera: Vec<String> = s.genera().iter().map(i64::to_string).collect();
    let boundary: Vec<String> =
        s.boundary_components().iter().map(|b| format!("{}^{}", s.targets()[b.target].text, b.degree)).collect();
    format!(
        "extremal surface: n = {n}, chi = {}, {} component(s) of genus {}, boundary {}",
        s.euler_characteristic(),
        genera.len(),
        genera.join(","),
        boundary.join(" ")
    )
}

fn cmd_scl(args: &ChainArgs, json: bool) -> Result<u8, Failure> {
    let c = read_chain(args)?;
    let found = match extremal_surface(&c) {
        Err(f) if f.code == 3 => {
            if json {
                print_json(&SclJson { chain: c.render(), scl: "infinity".into(), dual_value: None, surface: None });
            } else {
                out!("{}", f.message);
            }
            return Ok(3);
        }
        other => other?,
    };
    let (value, dual) = found.as_ref().map_or((Rational::default(), None), |(_, _, v, d)| (v.clone(), Some(d.clone())));
    if json {
        print_json(&SclJson {
            chain: c.render(),
            scl: value.to_string(),
            dual_value: dual.map(|d| d.to_string()),
            surface: found.as_ref().map(|(s, _, _, _)| s.export()),
        });
        return Ok(0);
    }
    out!("scl = {value}");
    if let Some((s, n, _, dual)) = &found {
        out!("{}", describe_surface(s, n));
        out!("dual certificate = {dual}");
    }
    Ok(0)
}

fn cmd_surface(args: &ChainArgs, json: bool) -> Result<u8, Failure> {
    let c = read_chain(args)?;
    let Some((s, n, _, _)) = extremal_surface(&c)? else {
        return Err(fail(2, "empty chain"));
    };
    if json {
        print_json(&s.export());
    } else {
        out!("{}", describe_surface(&s, &n));
        for b in s.boundary_components() {
            out!("  boundary: {} with degree {} on component {}", s.targets()[b.target].text, b.degree, b.component);
        }
        for (i, comp) in s.components().iter().enumerate() {
            out!("  component {i}: chi = {}, genus {}, {} face(s)", comp.euler_characteristic, comp.genus, comp.faces.len());
        }
    }
    Ok(0)
}

#[derive(Serialize, Deserialize)]
struct OracleJson {
    chain: String,
    degree: usize,
    bound: Option<String>,
    examined: u64,
    scl: String,
}

fn cmd_oracle(args: &ChainArgs, degree: usize, limit: u64, json: bool) -> Result<u8, Failure> {
    let c = read_chain(args)?;
    if !c.is_null_homologous() {
        out!("scl = infinity (not null-homologous)");
        return Ok(3);
    }
    let (terms, d) = c.integral_terms();
    let r = oracle_scl(&terms, degree, limit).map_err(|e| fail(5, e))?;
    let bound = r.bound.map(|b| b / Rational::from_integer(d));
    let lp = scl(&c);
    if json {
        print_json(&OracleJson {
            chain: c.render(),
            degree,
            bound: bound.as_ref().map(ToString::to_string),
            examined: r.examined,
            scl: lp.to_string(),
        });
    } else {
        match &bound {
            Some(b) => out!("oracle bound (n = {degree}) = {b}"),
            None => out!("oracle bound (n = {degree}): no pairing"),
        }
        out!("pairings examined = {}", r.examined);
        out!("scl = {lp}");
    }
    let dominated = match (&bound, &lp) {
        (Some(b), SclValue::Finite(x)) => b >= x,
        _ => true,
    };
    Ok(if dominated { 0 } else { 1 })
}

#[derive(Serialize, Deserialize)]
struct H2Json {
    coordinates: Vec<String>,
    rank: usize,
    basis: Vec<Vec<String>>,
}

fn cmd_h2(path: &str, json: bool) -> Result<u8, Failure> {
    let g = read_graph(path)?;
    let basis = g.h2_lattice();
    if json {
        print_json(&H2Json {
            coordinates: g.ends().map(|e| g.end_name(e)).collect(),
            rank: basis.len(),
            basis: basis.iter().map(|b| b.coords.iter().map(ToString::to_string).collect()).collect(),
        });
    } else {
        out!("H2 rank = {}", basis.len());
        for (i, b) in basis.iter().enumerate() {
            out!("  [{i}] {}", g.render_class(b));
        }
    }
    Ok(0)
}

#[derive(Serialize, Deserialize)]
struct NormJson {
    class: String,
    norm: String,
}

fn cmd_norm(args: &ClassArgs, json: bool) -> Result<u8, Failure> {
    let g = read_graph(&args.graph)?;
    let classes = read_classes(&g, args, &[0])?;
    for a in &classes {
        let norm = g.gt_norm(a)?;
        if json {
            print_json(&NormJson { class: g.render_class(a), norm: norm.to_string() });
        } else {
            out!("norm = {norm}");
        }
    }
    Ok(0)
}

fn cmd_ball(args: &ClassArgs, depth: usize, json: bool) -> Result<u8, Failure> {
    let g = read_graph(&args.graph)?;
    let classes = read_classes(&g, args, &[0, 1])?;
    let [a1, a2] = &classes[..] else {
        return Err(fail(2, format!("a ball needs exactly two classes, got {}", classes.len())));
    };
    let fan = unit_ball_2d(&g, a1, a2, depth)?;
    if json {
        print_json(&fan.export());
        return Ok(0);
    }
    out!("basis: A1 = {}, A2 = {}", g.render_class(a1), g.render_class(a2));
    for c in &fan.cones {
        out!(
            "cone ({},{})..({},{}): N = {}*x + {}*y",
            c.from.0, c.from.1, c.to.0, c.to.1, c.functional.0, c.functional.1
        );
    }
    let vertices: Vec<String> = fan.vertices.iter().map(|(x, y)| format!("({x}, {y})")).collect();
    out!("vertices: {}", vertices.join(" "));
    if fan.is_bounded() {
        out!("bounded: yes");
    } else {
        let rays: Vec<String> = fan.lineality.iter().map(|(x, y)| format!("({x}, {y})")).collect();
        out!("bounded: no, norm vanishes along {}", rays.join(" "));
    }
    Ok(0)
}

fn cmd_glue(args: &ClassArgs, plan: bool, json: bool) -> Result<u8, Failure> {
    let g = read_graph(&args.graph)?;
    let basis_empty = g.h2_lattice().is_empty();
    let a = if basis_empty && args.class.is_empty() {
        // nothing to glue; look for a Baumslag–Solitar subgroup instead
        H2Class::zero(g.dimension())
    } else {
        read_classes(&g, args, &[0])?.remove(0)
    };
    let outcome = build_closed_surface(&g, &a)?;
    if json {
        print_json(&GlueExport::new(&g, &outcome));
    } else {
        if plan {
            for line in outcome.log() {
                out!("{line}");
            }
        }
        out!("{}", summary(&outcome));
    }
    Ok(match &outcome {
        GlueOutcome::Closed(r) if !r.certificate_holds() => 1,
        _ => 0,
    })
}

fn cmd_present(path: &str) -> Result<u8, Failure> {
    out!("{}", read_graph(path)?.presentation());
    Ok(0)
}

fn cmd_check(seed: u64, sizes: &[usize], max_len: usize, corrupt: bool) -> Result<u8, Failure> {
    let broken = |c: &Chain| match scl(c) {
        SclValue::Finite(x) if x.is_positive() => SclValue::Finite(x * Rational::new(3.into(), 2.into()) - Rational::new(1.into(), 7.into())),
        v => v,
    };
    let mut ok = true;
    for (i, &size) in sizes.iter().enumerate() {
        if size == 0 {
            continue;
        }
        let config = CheckConfig { seed: seed.wrapping_add(i as u64), size, max_len, ..CheckConfig::default() };
        let report = if corrupt { run_checks(&config, &broken) } else { run_checks(&config, &scl) };
        out!("corpus {i}: {size} chains, seed {}", config.seed);
        out!("{}", report.render().trim_end());
        ok &= report.passed();
    }
    Ok(if ok { 0 } else { 1 })
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global().map_err(|e| fail(2, e))?;
    }
    let json = cli.json;
    match &cli.command {
        Command::Scl(args) => cmd_scl(args, json),
        Command::Surface(args) => cmd_surface(args, json),
        Command::Oracle { chain, degree, limit } => cmd_oracle(chain, *degree, *limit, json),
        Command::Present { graph } => cmd_present(graph),
        Command::H2 { graph } => cmd_h2(graph, json),
        Command::Norm(args) => cmd_norm(args, json),
        Command::Ball { class, depth } => cmd_ball(class, *depth as usize, json),
        Command::Glue { class, plan } => cmd_glue(class, *plan, json),
        Command::Check { seed, sizes, max_len, corrupt } => cmd_check(*seed, sizes, *max_len, *corrupt),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
