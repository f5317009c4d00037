use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use serde_json::{json, Value};

use roughforge::action::{act, solve_translation, ActionOptions, HolderFamily, DELTA_TOLERANCE};
use roughforge::basis::{bck_truncation, shuffle_truncation, HopfKey};
use roughforge::bcfp::{bcfp_to_action, m_v, CharacterInput, DEFAULT_BOUND_LIMIT};
use roughforge::bch::{bch, bch_term, descent_coefficients};
use roughforge::construct::{
    build_anisotropic, build_bck, build_shuffle, character_residual, chen_residual, holder_report, ConstructionConfig,
    DyadicGroupPath, HolderReport,
};
use roughforge::dual::{DualElement, FLOAT_TOLERANCE};
use roughforge::forest::{enumerate_trees, DecoratedForest, DEFAULT_MAX_BASIS};
use roughforge::hairer_kelly::{psi, psi_via_partitions};
use roughforge::io::{holder_report_json, path_from_json, path_to_json, read_sampled_path, StoredPath};
use roughforge::scalar::{format_rational, parse_small_rational, Rational};
use roughforge::shuffle::Alphabet;
use roughforge::{Error, Result};

/// Deepest grid on which `verify` checks Chen's rule over all triples.
const CHEN_CHECK_DEPTH: u32 = 7;

#[derive(Parser)]
#[command(
    name = "roughforge",
    version,
    about = "Branched and geometric rough paths on dyadic grids"
)]
struct Cli {
    /// Human-readable tables instead of compact JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgebraArg {
    Bck,
    Shuffle,
    Aniso,
}

#[derive(Subcommand)]
enum Command {
    /// Rooted trees with at most N nodes and decorations 1..=d.
    Trees {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
    },
    /// Descent-coefficient table as CSV, or BCH of two functionals.
    Bch {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        alpha: Option<PathBuf>,
        #[arg(long)]
        beta: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "bck")]
        algebra: AlgebraArg,
        #[arg(long, visible_alias = "N")]
        n: Option<usize>,
        #[arg(long)]
        d: Option<u32>,
    },
    /// Lifts a sampled path (CSV) to a grid rough path.
    Lift {
        #[arg(long)]
        input: PathBuf,
        /// Exponent `p/q`; a comma-separated list per letter for `aniso`.
        #[arg(long)]
        gamma: String,
        /// Truncation order; defaults to floor(1/gamma).
        #[arg(long, visible_alias = "N")]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "bck")]
        algebra: AlgebraArg,
        #[arg(long, default_value_t = 0.0)]
        z_init: f64,
        #[arg(long, default_value_t = 0.5)]
        split_weight: f64,
        /// Writes the path here and prints only the Hölder report.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Expansion of the Hairer–Kelly map on a forest.
    Psi {
        #[arg(long)]
        tree: String,
        /// Uses the extended-decoration sum instead of the cut recursion.
        #[arg(long)]
        partitions: bool,
    },
    /// Translates a branched path by a tree-indexed family.
    Act {
        #[arg(long)]
        rp: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long, default_value_t = DELTA_TOLERANCE)]
        tolerance: f64,
    },
    /// Family translating the first branched path into the second.
    Solve {
        #[arg(long)]
        rp: PathBuf,
        #[arg(long)]
        rp2: PathBuf,
        #[arg(long, default_value_t = DELTA_TOLERANCE)]
        tolerance: f64,
    },
    /// Renormalisation by a constant character and the equivalent family.
    Bcfp {
        #[arg(long)]
        rp: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BOUND_LIMIT)]
        limit: f64,
        #[arg(long, default_value_t = DELTA_TOLERANCE)]
        tolerance: f64,
    },
    /// Chen, character and Hölder checks on a stored path.
    Verify {
        #[arg(long)]
        rp: PathBuf,
        #[arg(long, default_value_t = FLOAT_TOLERANCE)]
        tolerance: f64,
    },
}

/// Failure carried to `main`: a library error or a failed check.
enum Failure {
    Lib(Error),
    Io(String),
    Check {
        message: String,
        name: String,
        report: Value,
    },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<String, Failure>;

fn max_basis() -> std::result::Result<usize, Failure> {
    match std::env::var("ROUGHFORGE_MAX_BASIS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Lib(Error::Invalid(format!("ROUGHFORGE_MAX_BASIS={v:?} is not a count")))),
        Err(_) => Ok(DEFAULT_MAX_BASIS),
    }
}

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> std::result::Result<Value, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Lib(Error::Parse {
            position: e.column(),
            message: format!("{}: {e}", path.display()),
        })
    })
}

fn render(value: &Value, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(value).expect("JSON values serialize")
    } else {
        value.to_string()
    }
}

fn report_table(report: &HolderReport) -> String {
    let mut out = format!("{:<24} {:>10} {:>14}\n", "key", "exponent", "constant");
    for ((k, e), c) in report.keys.iter().zip(&report.exponents).zip(&report.constants) {
        out.push_str(&format!("{k:<24} {e:>10.4} {c:>14.6e}\n"));
    }
    out
}

fn trees(n: usize, d: u32, pretty: bool) -> Outcome {
    let list = enumerate_trees(n, d, max_basis()?)?;
    if pretty {
        return Ok(list.iter().map(|t| format!("{t}\n")).collect());
    }
    Ok(Value::from(list.iter().map(|t| t.to_string()).collect::<Vec<_>>()).to_string())
}

fn bch_functionals<K: HopfKey>(
    basis: &std::sync::Arc<roughforge::basis::Truncation<K>>,
    alpha: &Path,
    beta: &Path,
    k: Option<usize>,
) -> std::result::Result<Value, Failure> {
    let a = DualElement::<Rational, K>::from_json(basis, &read_json(alpha)?)?;
    let b = DualElement::<Rational, K>::from_json(basis, &read_json(beta)?)?;
    let out = match k {
        Some(k) => bch_term(&a, &b, k)?,
        None => bch(&a, &b)?,
    };
    Ok(out.to_json())
}

fn bch_command(
    k: Option<usize>,
    alpha: Option<PathBuf>,
    beta: Option<PathBuf>,
    algebra: AlgebraArg,
    n: Option<usize>,
    d: Option<u32>,
    pretty: bool,
) -> Outcome {
    match (alpha, beta) {
        (None, None) => {
            let k = k.ok_or_else(|| Error::Precondition("--k is required to dump a table".into()))?;
            Ok(descent_coefficients(k)?.to_csv())
        }
        (Some(a), Some(b)) => {
            let n = n.ok_or_else(|| Error::Precondition("--n is required with functionals".into()))?;
            let d = d.ok_or_else(|| Error::Precondition("--d is required with functionals".into()))?;
            let cap = max_basis()?;
            let value = match algebra {
                AlgebraArg::Bck => bch_functionals(&bck_truncation(n, d, cap)?, &a, &b, k)?,
                AlgebraArg::Shuffle => bch_functionals(&shuffle_truncation(n, d, cap)?, &a, &b, k)?,
                AlgebraArg::Aniso => {
                    return Err(Error::Precondition("bch supports the bck and shuffle algebras".into()).into())
                }
            };
            Ok(render(&value, pretty))
        }
        _ => Err(Error::Precondition("--alpha and --beta must be given together".into()).into()),
    }
}

fn default_order(gamma: Rational64) -> usize {
    (Rational64::from(1) / gamma).to_integer() as usize
}

fn emit_lift<K: HopfKey>(path: &DyadicGroupPath<K>, output: Option<PathBuf>, pretty: bool) -> Outcome {
    let report = holder_report(path);
    let report_json = holder_report_json(&report);
    match output {
        Some(file) => {
            fs::write(&file, path_to_json(path).to_string())
                .map_err(|e| Failure::Io(format!("{}: {e}", file.display())))?;
            if pretty {
                Ok(report_table(&report))
            } else {
                Ok(json!({ "holder_report": report_json }).to_string())
            }
        }
        None => {
            let value = json!({ "path": path_to_json(path), "holder_report": report_json });
            Ok(render(&value, pretty))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn lift(
    input: &Path,
    gamma: &str,
    n: Option<usize>,
    algebra: AlgebraArg,
    z_init: f64,
    split_weight: f64,
    output: Option<PathBuf>,
    pretty: bool,
) -> Outcome {
    let x = read_sampled_path(&read_text(input)?)?;
    let config = ConstructionConfig { z_init, split_weight };
    config.validate()?;
    let cap = max_basis()?;
    match algebra {
        AlgebraArg::Bck | AlgebraArg::Shuffle => {
            let g = parse_small_rational(gamma)?;
            roughforge::construct::check_isotropic_gamma(g)?;
            let n = n.unwrap_or_else(|| default_order(g));
            if let AlgebraArg::Bck = algebra {
                emit_lift(&build_bck(&x, g, n, config, cap)?.0, output, pretty)
            } else {
                emit_lift(&build_shuffle(&x, g, n, config, cap)?.0, output, pretty)
            }
        }
        AlgebraArg::Aniso => {
            let weights = gamma.split(',').map(parse_small_rational).collect::<Result<Vec<_>>>()?;
            if weights.len() != x.dimension() {
                return Err(
                    Error::Precondition(format!("{} exponents for {} channels", weights.len(), x.dimension())).into(),
                );
            }
            let alphabet = Alphabet::new((1..=x.dimension() as u32).collect(), weights)?;
            emit_lift(&build_anisotropic(&x, &alphabet, config, cap)?.0, output, pretty)
        }
    }
}

fn psi_command(tree: &str, partitions: bool, pretty: bool) -> Outcome {
    let forest: DecoratedForest = tree.parse()?;
    let n = forest.size();
    let expansion = if partitions {
        psi_via_partitions(&forest, n)?
    } else {
        psi(&forest, n)?
    };
    if pretty {
        return Ok(expansion
            .iter()
            .map(|(w, c)| format!("{:>6}  {}\n", format_rational(c), w))
            .collect());
    }
    let terms: Vec<Value> = expansion
        .iter()
        .map(|(w, c)| json!({"word": w.to_string(), "coefficient": format_rational(c)}))
        .collect();
    Ok(json!({"forest": forest.to_string(), "terms": terms}).to_string())
}

fn load_branched(path: &Path) -> std::result::Result<roughforge::action::BranchedRP, Failure> {
    Ok(path_from_json(&read_json(path)?, max_basis()?)?.branched()?)
}

fn options(tolerance: f64) -> std::result::Result<ActionOptions, Failure> {
    if !(tolerance > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()).into());
    }
    Ok(ActionOptions {
        tolerance,
        cap: max_basis()?,
    })
}

fn verify_path<K: HopfKey>(path: &DyadicGroupPath<K>, tolerance: f64, pretty: bool) -> Outcome {
    let coarse = path.coarsened(path.depth().min(CHEN_CHECK_DEPTH))?;
    let chen = chen_residual(&coarse);
    let character = character_residual(path);
    let start = path.state(0).max_abs_diff(&DualElement::counit(path.basis()));
    let report = holder_report(path);
    let checks = [
        ("chen", chen, tolerance),
        ("character", character, tolerance),
        ("starts_at_unit", start, tolerance),
        (
            "holder_finite",
            if report.all_finite() { 0.0 } else { f64::INFINITY },
            0.0,
        ),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !(c.1 <= c.2)).map(|c| c.0).collect();
    let value = json!({
        "pass": failed.is_empty(),
        "chen_depth": coarse.depth(),
        "checks": checks
            .iter()
            .map(|(name, value, limit)| json!({"name": name, "value": value, "limit": limit, "pass": value <= limit}))
            .collect::<Vec<_>>(),
        "holder_report": holder_report_json(&report),
    });
    let text = if pretty {
        let mut out = String::new();
        for (name, value, limit) in &checks {
            let mark = if value <= limit { "pass" } else { "FAIL" };
            out.push_str(&format!("{name:<16} {value:>12.3e} ≤ {limit:<10.3e} {mark}\n"));
        }
        out.push_str(&report_table(&report));
        out
    } else {
        value.to_string()
    };
    if failed.is_empty() {
        Ok(text)
    } else {
        Err(Failure::Check {
            message: format!("verification failed: {}", failed.join(", ")),
            name: failed[0].to_string(),
            report: value,
        })
    }
}

fn run(cli: Cli) -> Outcome {
    let pretty = cli.pretty;
    match cli.command {
        Command::Trees { n, d } => trees(n, d, pretty),
        Command::Bch {
            k,
            alpha,
            beta,
            algebra,
            n,
            d,
        } => bch_command(k, alpha, beta, algebra, n, d, pretty),
        Command::Lift {
            input,
            gamma,
            n,
            algebra,
            z_init,
            split_weight,
            output,
        } => lift(&input, &gamma, n, algebra, z_init, split_weight, output, pretty),
        Command::Psi { tree, partitions } => psi_command(&tree, partitions, pretty),
        Command::Act { rp, g, tolerance } => {
            let x = load_branched(&rp)?;
            let family = HolderFamily::from_json(&read_json(&g)?)?;
            let y = act(&family, &x, options(tolerance)?)?;
            Ok(render(&path_to_json(&y), pretty))
        }
        Command::Solve { rp, rp2, tolerance } => {
            let x = load_branched(&rp)?;
            let y = load_branched(&rp2)?;
            let g = solve_translation(&x, &y, options(tolerance)?)?;
            Ok(render(&g.to_json(), pretty))
        }
        Command::Bcfp {
            rp,
            v,
            limit,
            tolerance,
        } => {
            let x = load_branched(&rp)?;
            let v = CharacterInput::from_json(&read_json(&v)?)?;
            let y = m_v(&x, &v, limit)?;
            let g = bcfp_to_action(&x, &v, limit, options(tolerance)?)?;
            Ok(render(
                &json!({"path": path_to_json(&y), "family": g.to_json()}),
                pretty,
            ))
        }
        Command::Verify { rp, tolerance } => match path_from_json(&read_json(&rp)?, max_basis()?)? {
            StoredPath::Branched(p) => verify_path(&p, tolerance, pretty),
            StoredPath::Words(p) => verify_path(&p, tolerance, pretty),
        },
    }
}

fn fail(message: String, precondition: &str) -> ExitCode {
    eprintln!("{}", json!({"error": message, "precondition": precondition}));
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(e.to_string().trim().to_string(), "arguments"),
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Lib(e)) => fail(e.to_string(), e.kind()),
        Err(Failure::Io(message)) => fail(message, "io"),
        Err(Failure::Check { message, name, report }) => {
            println!("{report}");
            fail(message, &name)
        }
    }
}
