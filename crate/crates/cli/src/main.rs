//! `rankwb`: command-line surface of the rank-metric workbench.
//!
//! Every invocation emits exactly one JSON document on standard output.
//! Exit codes: 0 for certified/successful verdicts, 1 for a failed
//! certification (for example a rank collapse under an excluded prime),
//! 2 for input errors. The row budget for amplification-style constructions
//! comes from `--budget`, then the `RANKWB_BUDGET` environment variable,
//! then the built-in default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rankwb_core::amplify::{boost_separation, tensor_square_iterate, weighted_combine};
use rankwb_core::certify::{align_basis, defect_report, group_algebra_apply, AlmostRep};
use rankwb_core::construct::{
    amenable_extension_rep, commutator_witnesses, regular_rep, ExtensionData,
};
use rankwb_core::field::{parse_rational, Field, FieldSpec, Rational, Value};
use rankwb_core::jordan::jordan_profile_at;
use rankwb_core::matrix::Matrix;
use rankwb_core::perm::{embed_sofic_rep, Permutation};
use rankwb_core::reduce::{reduce_mod_p, select_good_prime};
use rankwb_core::DEFAULT_BUDGET;

mod demo;

#[derive(Parser)]
#[command(
    name = "rankwb",
    about = "Exact rank-metric workbench for almost-representations"
)]
struct Cli {
    /// Row budget for amplification, boosting, and combining.
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RepArg {
    /// Almost-representation JSON file.
    #[arg(long)]
    rep: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Exact defect/separation report with the quarter-threshold verdict.
    Certify {
        /// Almost-representation JSON file.
        #[arg(long, conflicts_with_all = ["perms", "table"])]
        rep: Option<PathBuf>,
        /// Permutation assignment {"g": {"perm": [...]}, ...}; embedded as
        /// permutation matrices before certification. Needs --table.
        #[arg(long, requires = "table")]
        perms: Option<PathBuf>,
        /// Group table for --perms.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Field for the embedding (with --perms).
        #[arg(long, default_value = "Q")]
        field: String,
    },

    /// Conjugate a representation so defined products agree on the leading
    /// columns.
    Align {
        #[command(flatten)]
        rep: RepArg,
        /// Column-agreement tolerance (rational, e.g. "1/4").
        #[arg(long)]
        epsilon: String,
        /// Write the conjugated representation here.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Tensor-square amplification: trace a matrix or boost a representation.
    Amplify {
        /// Matrix JSON file (trace mode).
        #[arg(long, conflicts_with = "rep")]
        matrix: Option<PathBuf>,
        /// Representation JSON file (booster mode).
        #[arg(long)]
        rep: Option<PathBuf>,
        /// Amplification level m >= 1.
        #[arg(long)]
        level: usize,
        /// Bound constant c for the f-chain (rational).
        #[arg(long)]
        bound_constant: Option<String>,
        /// Write the boosted representation here (booster mode).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Weighted combiner with the exact 2^{-i} rank identity.
    Combine {
        /// Representation file; combined with --element and --levels.
        #[arg(long, requires = "element")]
        rep: Option<PathBuf>,
        /// Group-algebra element file {"coeffs": {label: value}}.
        #[arg(long)]
        element: Option<PathBuf>,
        /// Number of tensor levels (group-algebra mode).
        #[arg(long, default_value_t = 2)]
        levels: usize,
        /// Raw mode: square matrix files, one per level.
        #[arg(long, num_args = 1.., conflicts_with = "rep")]
        matrices: Vec<PathBuf>,
        /// Trailing-block scalar (raw mode), parsed in the matrices' field.
        #[arg(long)]
        epsilon: Option<String>,
    },

    /// Reduce a rational representation modulo a prime, with certificate.
    Reduce {
        #[command(flatten)]
        rep: RepArg,
        /// Use this prime (validated against the exclusions).
        #[arg(long, conflicts_with = "start")]
        prime: Option<u64>,
        /// Search for the smallest good prime >= start.
        #[arg(long)]
        start: Option<u64>,
        /// Write the reduced representation here when the certificate holds.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Jordan profile of a matrix at a given eigenvalue.
    Jordan {
        #[arg(long)]
        matrix: PathBuf,
        /// Eigenvalue; rational string, or comma-separated coefficients
        /// over a number field.
        #[arg(long)]
        lambda: String,
    },

    /// Commutator witness pairs in GL_n with the pairwise distance table.
    Witness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        /// Field: Q, Fp:<p>, or NF:<c0,c1,...>.
        #[arg(long, default_value = "Q")]
        field: String,
    },

    /// Block representation of an extension from validated cocycle data.
    Extend {
        /// ExtensionData JSON file.
        #[arg(long)]
        data: PathBuf,
        /// Fragment group table JSON file.
        #[arg(long)]
        fragment: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Left-translation representation of a total finite group.
    Regular {
        /// Group table JSON file.
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value = "Q")]
        field: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Run the bundled corpus end-to-end and print the summary table.
    Demo {
        /// Field for the corpus representations (reduction rows always run
        /// over Q).
        #[arg(long, default_value = "Q")]
        field: String,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            if e.use_stderr() {
                std::process::exit(fail(e.to_string()));
            }
            e.print().ok();
            std::process::exit(0);
        }
    };
    let budget = cli
        .budget
        .or_else(|| {
            std::env::var("RANKWB_BUDGET")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(DEFAULT_BUDGET);
    std::process::exit(run(cli.command, budget));
}

/// Input-level failures: print a structured error object and exit 2.
fn fail(message: String) -> i32 {
    let doc = json!({ "error": { "message": message } });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    2
}

fn emit<T: serde::Serialize>(doc: &T, ok: bool) -> i32 {
    println!("{}", serde_json::to_string_pretty(doc).unwrap());
    if ok {
        0
    } else {
        1
    }
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&raw).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn save<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let raw = serde_json::to_string_pretty(value).unwrap();
    std::fs::write(path, raw + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn parse_field_flag(raw: &str) -> Result<Field, String> {
    let spec = if raw == "Q" {
        FieldSpec::Rationals
    } else if let Some(p) = raw.strip_prefix("Fp:") {
        FieldSpec::Prime {
            p: p.parse().map_err(|_| format!("bad prime {p:?}"))?,
        }
    } else if let Some(coeffs) = raw.strip_prefix("NF:") {
        let minpoly: Result<Vec<i64>, _> = coeffs.split(',').map(|c| c.trim().parse()).collect();
        FieldSpec::NumberField {
            minpoly: minpoly.map_err(|_| format!("bad minimal polynomial {coeffs:?}"))?,
        }
    } else {
        return Err(format!(
            "unknown field {raw:?}; use Q, Fp:<p>, or NF:<coeffs>"
        ));
    };
    Field::new(&spec).map_err(|e| e.to_string())
}

fn parse_rational_flag(raw: &str) -> Result<Rational, String> {
    parse_rational(raw).ok_or_else(|| format!("bad rational {raw:?}"))
}

fn parse_scalar(field: &Field, raw: &str) -> Result<Value, String> {
    if raw.contains(',') {
        let coeffs: Vec<String> = raw.split(',').map(|c| c.trim().to_string()).collect();
        field.value_from_coeffs(&coeffs).map_err(|e| e.to_string())
    } else {
        field.parse_value(raw).map_err(|e| e.to_string())
    }
}

#[derive(serde::Deserialize)]
struct ElementFile {
    coeffs: BTreeMap<String, String>,
}

fn run(command: Command, budget: usize) -> i32 {
    match dispatch(command, budget) {
        Ok(code) => code,
        Err(message) => fail(message),
    }
}

fn dispatch(command: Command, budget: usize) -> Result<i32, String> {
    match command {
        Command::Certify {
            rep,
            perms,
            table,
            field,
        } => match (rep, perms, table) {
            (Some(rep_path), None, None) => {
                let rep: AlmostRep = load(&rep_path)?;
                let report = defect_report(&rep).map_err(|e| e.to_string())?;
                let ok = report.quarter_certified;
                Ok(emit(&serde_json::to_value(&report).unwrap(), ok))
            }
            (None, Some(perms_path), Some(table_path)) => {
                let perms: BTreeMap<String, Permutation> = load(&perms_path)?;
                let table = load(&table_path)?;
                let f = parse_field_flag(&field)?;
                let (rep, embed) =
                    embed_sofic_rep(&table, &perms, &f).map_err(|e| e.to_string())?;
                let report = defect_report(&rep).map_err(|e| e.to_string())?;
                let ok = report.quarter_certified;
                let doc = json!({
                    "embedding": serde_json::to_value(&embed).unwrap(),
                    "report": serde_json::to_value(&report).unwrap(),
                });
                Ok(emit(&doc, ok))
            }
            _ => Err("pass --rep, or --perms together with --table".into()),
        },

        Command::Align { rep, epsilon, out } => {
            let rep: AlmostRep = load(&rep.rep)?;
            let eps = parse_rational_flag(&epsilon)?;
            let aligned = align_basis(&rep, &eps).map_err(|e| e.to_string())?;
            let report = defect_report(&aligned.rep).map_err(|e| e.to_string())?;
            if let Some(path) = out {
                save(&path, &aligned.rep)?;
            }
            let doc = json!({
                "agreement_columns": aligned.agreement_columns,
                "dim": aligned.rep.dim(),
                "report": serde_json::to_value(&report).unwrap(),
            });
            Ok(emit(&doc, true))
        }

        Command::Amplify {
            matrix,
            rep,
            level,
            bound_constant,
            out,
        } => {
            let c = bound_constant
                .as_deref()
                .map(parse_rational_flag)
                .transpose()?;
            match (matrix, rep) {
                (Some(path), None) => {
                    let m: Matrix = load(&path)?;
                    let trace = tensor_square_iterate(&m, level, budget, c.as_ref())
                        .map_err(|e| e.to_string())?;
                    let ok =
                        trace.m1_chain_holds.unwrap_or(true) && trace.j_chain_holds.unwrap_or(true);
                    Ok(emit(&serde_json::to_value(&trace).unwrap(), ok))
                }
                (None, Some(path)) => {
                    let rep: AlmostRep = load(&path)?;
                    let (boosted, report) = boost_separation(&rep, level, budget, c.as_ref())
                        .map_err(|e| e.to_string())?;
                    if let Some(out_path) = out {
                        save(&out_path, &boosted)?;
                    }
                    let ok = report.defect_bound_holds
                        && report
                            .per_element
                            .iter()
                            .all(|e| e.min_bound_holds && e.chain_bound_holds.unwrap_or(true));
                    Ok(emit(&serde_json::to_value(&report).unwrap(), ok))
                }
                _ => Err("pass exactly one of --matrix or --rep".into()),
            }
        }

        Command::Combine {
            rep,
            element,
            levels,
            matrices,
            epsilon,
        } => {
            if let Some(rep_path) = rep {
                let rep: AlmostRep = load(&rep_path)?;
                let element_path = element.ok_or("missing --element")?;
                let file: ElementFile = load(&element_path)?;
                let field = rep.field().clone();
                let mut coeffs = BTreeMap::new();
                let mut augmentation = field.zero();
                for (label, raw) in &file.coeffs {
                    let v = parse_scalar(&field, raw)?;
                    augmentation = field.add(&augmentation, &v);
                    coeffs.insert(label.clone(), v);
                }
                let mut level_matrices = Vec::new();
                for depth in 1..=levels {
                    level_matrices.push(
                        group_algebra_apply(&rep, &coeffs, depth).map_err(|e| e.to_string())?,
                    );
                }
                let per_depth_rho: Vec<String> = level_matrices
                    .iter()
                    .map(|m| m.normalized_rank().to_string())
                    .collect();
                let (_, report) = weighted_combine(&level_matrices, &augmentation, budget)
                    .map_err(|e| e.to_string())?;
                let doc = json!({
                    "levels": levels,
                    "augmentation": field.format_value(&augmentation),
                    "per_depth_rho": per_depth_rho,
                    "combine": serde_json::to_value(&report).unwrap(),
                });
                Ok(emit(&doc, report.identity_holds))
            } else {
                if matrices.is_empty() {
                    return Err("pass --rep/--element or --matrices".into());
                }
                let mats: Vec<Matrix> = matrices
                    .iter()
                    .map(|p| load::<Matrix>(p))
                    .collect::<Result<_, _>>()?;
                let field = mats[0].field().clone();
                let eps_value = match epsilon {
                    Some(raw) => parse_scalar(&field, &raw)?,
                    None => field.zero(),
                };
                let (_, report) =
                    weighted_combine(&mats, &eps_value, budget).map_err(|e| e.to_string())?;
                Ok(emit(
                    &serde_json::to_value(&report).unwrap(),
                    report.identity_holds,
                ))
            }
        }

        Command::Reduce {
            rep,
            prime,
            start,
            out,
        } => {
            let rep: AlmostRep = load(&rep.rep)?;
            let (selection, p) = match prime {
                Some(p) => (None, p),
                None => {
                    let sel =
                        select_good_prime(&rep, start.unwrap_or(2)).map_err(|e| e.to_string())?;
                    let p = sel.prime;
                    (Some(sel), p)
                }
            };
            let reduction = reduce_mod_p(&rep, p).map_err(|e| e.to_string())?;
            if let (Some(path), Some(reduced)) = (out, reduction.rep.as_ref()) {
                save(&path, reduced)?;
            }
            let doc = json!({
                "selection": selection.map(|s| serde_json::to_value(&s).unwrap()),
                "certificate": serde_json::to_value(&reduction.certificate).unwrap(),
            });
            Ok(emit(&doc, reduction.certificate.valid))
        }

        Command::Jordan { matrix, lambda } => {
            let m: Matrix = load(&matrix)?;
            let value = parse_scalar(m.field(), &lambda)?;
            let profile = jordan_profile_at(&m, &value).map_err(|e| e.to_string())?;
            #[derive(serde::Serialize)]
            struct ProfileDoc {
                lambda: String,
                blocks: Vec<usize>,
            }
            let doc = ProfileDoc {
                lambda: profile.eigenvalue,
                blocks: profile.blocks,
            };
            Ok(emit(&doc, true))
        }

        Command::Witness { n, l, field } => {
            let f = parse_field_flag(&field)?;
            let family = commutator_witnesses(n, l, &f).map_err(|e| e.to_string())?;
            let ok = family.table.iter().all(|row| row.verdict);
            let doc = json!({
                "n": family.n,
                "l": family.l,
                "table": serde_json::to_value(&family.table).unwrap(),
            });
            Ok(emit(&doc, ok))
        }

        Command::Extend {
            data,
            fragment,
            out,
        } => {
            let data: ExtensionData = load(&data)?;
            let fragment = load(&fragment)?;
            let (rep, report) =
                amenable_extension_rep(&data, &fragment).map_err(|e| e.to_string())?;
            if let Some(path) = out {
                save(&path, &rep)?;
            }
            let ok = report.defect_bound_holds
                && report.full_rank
                && report.per_element.iter().all(|r| r.bound_holds);
            Ok(emit(&serde_json::to_value(&report).unwrap(), ok))
        }

        Command::Regular { table, field, out } => {
            let table = load(&table)?;
            let f = parse_field_flag(&field)?;
            let rep = regular_rep(&table, &f).map_err(|e| e.to_string())?;
            if let Some(path) = out {
                save(&path, &rep)?;
            }
            Ok(emit(&serde_json::to_value(&rep).unwrap(), true))
        }

        Command::Demo { field } => {
            let f = parse_field_flag(&field)?;
            let summary = demo::run_demo(&f, budget).map_err(|e| e.to_string())?;
            let ok = summary.all_pass;
            Ok(emit(&serde_json::to_value(&summary).unwrap(), ok))
        }
    }
}
