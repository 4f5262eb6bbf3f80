//! The `magic` command line.
//!
//! Exit codes: 0 when the checked property holds, 1 when it does not, 2 on
//! usage or input errors. Results go to stdout, diagnostics to stderr.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::analysis::{ergodic_compression_check, vn_check, Polynomial};
use crate::census::{count_magic, write_csv, CensusConfig};
use crate::dilation::{egervary, halmos, random_vector, FinSuppSequence, SzNagyOperator};
use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, DEFAULT_PRECISION};
use crate::io;
use crate::linalg::{check_axioms, Matrix, Vector};
use crate::magic::{find_witness, is_magic_1x1, search_witnesses_with, verify_magic, MagicWitness, SearchConfig, DEFAULT_BUDGET};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "magic", version, about = "Magic contractions and their unitary dilations over F_p and Q_p")]
pub struct Cli {
    /// Field used when the input JSON carries no "field" object.
    #[arg(long, global = true, value_enum)]
    pub field: Option<FieldArg>,
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Relative precision for Q_p.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Candidate budget for witness searches and census runs.
    #[arg(long, global = true, env = "MAGIC_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    #[value(name = "Fp")]
    Fp,
    #[value(name = "Qp")]
    Qp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DilationKind {
    Halmos,
    Egervary,
    Sznagy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Predicate {
    Unitary,
    Isometry,
    SelfAdjoint,
    Projection,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a witness, or search for one when none is given.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// List every witness for T over F_p.
    Search {
        #[arg(long)]
        input: PathBuf,
        /// Stop at the first witness.
        #[arg(long)]
        first: bool,
    },
    /// Build a unitary dilation.
    Dilate {
        #[arg(long, value_enum)]
        kind: DilationKind,
        /// Dilation order for egervary; number of steps for sznagy.
        #[arg(long = "N")]
        order: Option<usize>,
        /// Index window for the sznagy unitarity check.
        #[arg(long)]
        window: Option<u32>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Sequence traced through the sznagy operator.
        #[arg(long)]
        sequence: Option<PathBuf>,
        /// Random sequence pairs for the sznagy adjoint check.
        #[arg(long, default_value_t = 16)]
        pairs: usize,
    },
    /// Compare ||f(T)|| with ||f(U)|| for the order-N dilation U.
    Vn {
        /// Coefficients a0,a1,...,aN.
        #[arg(long)]
        poly: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long = "N")]
        order: usize,
    },
    /// Check the Cesàro compression identity on a vector.
    Ergodic {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long = "N")]
        order: u64,
        #[arg(long)]
        vector: PathBuf,
    },
    /// Count magic n x n matrices over F_p.
    Census {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count_only: bool,
        #[arg(long)]
        full_witness_count: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        partitions: usize,
    },
    /// Check the inner-product axioms and operator predicates.
    Axioms {
        /// Operator whose predicates are reported.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Dimension when no operator is given.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Random samples on top of the standard basis.
        #[arg(long, default_value_t = 8)]
        samples: usize,
        /// Predicates that must hold for exit code 0.
        #[arg(long, value_enum, value_delimiter = ',')]
        require: Vec<Predicate>,
    },
}

struct Outcome {
    holds: bool,
    json: Value,
    plain: String,
    csv: Option<String>,
}

impl Outcome {
    fn new(holds: bool, json: Value) -> Self {
        let plain = plain_of(&json);
        Self {
            holds,
            json,
            plain,
            csv: None,
        }
    }
}

fn plain_of(v: &Value) -> String {
    match v {
        Value::Object(m) => m.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k}: {}", compact(v));
            s
        }),
        other => format!("{}\n", compact(other)),
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn located<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

struct Ctx {
    fallback: Option<FieldDescriptor>,
    seed: u64,
    budget: u64,
}

impl Ctx {
    fn from_cli(cli: &Cli) -> Result<Self> {
        let fallback = match cli.p {
            None => None,
            Some(p) => Some(match cli.field.unwrap_or(FieldArg::Fp) {
                FieldArg::Fp => FieldDescriptor::prime_field(p)?,
                FieldArg::Qp => FieldDescriptor::padic(p, cli.precision.unwrap_or(DEFAULT_PRECISION))?,
            }),
        };
        Ok(Self {
            fallback,
            seed: cli.seed,
            budget: cli.budget,
        })
    }

    fn matrix(&self, path: &Path) -> Result<Matrix> {
        located(path, io::parse_matrix(&read(path)?, self.fallback))
    }

    fn vector(&self, path: &Path, desc: FieldDescriptor) -> Result<Vector> {
        located(path, io::parse_vector(&read(path)?, Some(desc)))
    }

    fn sequence(&self, path: &Path, desc: FieldDescriptor) -> Result<FinSuppSequence> {
        located(path, io::parse_sequence(&read(path)?, Some(desc)))
    }

    /// The witness from `path`, or else the first one found by search.
    fn witness(&self, t: &Matrix, path: Option<&Path>) -> Result<Option<MagicWitness>> {
        match path {
            Some(path) => Ok(Some(located(path, io::parse_witness(&read(path)?, Some(t.descriptor())))?)),
            None => self.find(t),
        }
    }

    fn find(&self, t: &Matrix) -> Result<Option<MagicWitness>> {
        if !t.descriptor().is_prime_field() && t.shape() == (1, 1) {
            let m = is_magic_1x1(t.get(0, 0))?;
            return Ok(m.map(|m| MagicWitness::symmetric(Matrix::new(t.descriptor(), 1, 1, vec![m]).unwrap())));
        }
        find_witness(t, self.budget)
    }
}

fn not_magic() -> Outcome {
    Outcome::new(false, json!({ "magic": false }))
}

fn rational(r: &num_rational::BigRational) -> Value {
    Value::String(r.to_string())
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn matrix_outcome(m: &Matrix) -> Outcome {
    let csv = (0..m.rows()).fold(String::new(), |mut s, i| {
        let row: Vec<String> = m.row_vec(i).iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "{}", row.join(","));
        s
    });
    Outcome {
        holds: true,
        json: io::matrix_to_json(m),
        plain: with_newline(m.to_string()),
        csv: Some(csv),
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let ctx = Ctx::from_cli(cli)?;
    match &cli.command {
        Command::Verify { input, witness } => {
            let t = ctx.matrix(input)?;
            match witness {
                Some(path) => {
                    let w = ctx.witness(&t, Some(path))?.expect("witness given");
                    let report = verify_magic(&t, &w)?;
                    Ok(Outcome::new(
                        report.holds(),
                        json!({ "magic": report.holds(), "checks": io::magic_report_to_json(&report) }),
                    ))
                }
                None => Ok(match ctx.find(&t)? {
                    Some(w) => Outcome::new(true, json!({ "magic": true, "witness": io::witness_to_json(&w) })),
                    None => not_magic(),
                }),
            }
        }
        Command::Search { input, first } => {
            let t = ctx.matrix(input)?;
            let config = SearchConfig {
                budget: ctx.budget,
                early_exit: *first,
            };
            let ws = search_witnesses_with(&t, &config)?;
            let list: Vec<Value> = ws.iter().map(io::witness_to_json).collect();
            Ok(Outcome::new(
                !ws.is_empty(),
                json!({ "magic": !ws.is_empty(), "count": ws.len(), "witnesses": list }),
            ))
        }
        Command::Dilate {
            kind,
            order,
            window,
            input,
            witness,
            sequence,
            pairs,
        } => {
            let t = ctx.matrix(input)?;
            let Some(w) = ctx.witness(&t, witness.as_deref())? else {
                return Ok(not_magic());
            };
            match kind {
                DilationKind::Halmos => Ok(matrix_outcome(&halmos(&t, &w)?)),
                DilationKind::Egervary => {
                    let n = order.ok_or_else(|| Error::Precondition("egervary needs --N".into()))?;
                    Ok(matrix_outcome(&egervary(&t, &w, n)?))
                }
                DilationKind::Sznagy => sznagy(&ctx, t, w, *order, *window, sequence.as_deref(), *pairs),
            }
        }
        Command::Vn {
            poly,
            input,
            witness,
            order,
        } => {
            let t = ctx.matrix(input)?;
            let f = Polynomial::parse(poly, t.descriptor())?;
            let Some(w) = ctx.witness(&t, witness.as_deref())? else {
                return Ok(not_magic());
            };
            let r = vn_check(&f, &t, &w, *order)?;
            Ok(Outcome::new(
                r.holds,
                json!({ "lhs": rational(&r.lhs), "rhs": rational(&r.rhs), "holds": r.holds }),
            ))
        }
        Command::Ergodic {
            input,
            witness,
            order,
            vector,
        } => {
            let t = ctx.matrix(input)?;
            let v = ctx.vector(vector, t.descriptor())?;
            let Some(w) = ctx.witness(&t, witness.as_deref())? else {
                return Ok(not_magic());
            };
            let r = ergodic_compression_check(&t, &w, *order, &v)?;
            Ok(Outcome::new(
                r.equal,
                json!({
                    "lhs_vector": io::vector_to_json(&r.lhs_vector),
                    "rhs_vector": io::vector_to_json(&r.rhs_vector),
                    "equal": r.equal,
                }),
            ))
        }
        Command::Census {
            n,
            count_only,
            full_witness_count,
            out,
            partitions,
        } => {
            let p = cli
                .p
                .ok_or_else(|| Error::Precondition("census needs --p".into()))?;
            if cli.field == Some(FieldArg::Qp) {
                return Err(Error::Precondition("census runs over F_p only".into()));
            }
            let config = CensusConfig {
                budget: ctx.budget,
                full_witness_count: *full_witness_count,
                partitions: *partitions,
            };
            let result = count_magic(*n, p, &config)?;
            let summary = json!({
                "n": result.n,
                "p": result.p,
                "total_matrices": result.total_matrices,
                "magic_count": result.magic_count,
            });
            let mut buf = Vec::new();
            if !count_only {
                write_csv(&result, &mut buf)?;
            }
            let csv = String::from_utf8(buf).expect("csv is utf-8");
            match out {
                Some(path) if !count_only => {
                    std::fs::write(path, &csv).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                    Ok(Outcome::new(true, summary))
                }
                _ if *count_only => Ok(Outcome::new(true, summary)),
                _ => {
                    let mut o = Outcome::new(true, summary);
                    o.csv = Some(csv.clone());
                    o.plain = csv;
                    Ok(o)
                }
            }
        }
        Command::Axioms {
            input,
            dim,
            samples,
            require,
        } => axioms(&ctx, input.as_deref(), *dim, *samples, require),
    }
}

fn sznagy(
    ctx: &Ctx,
    t: Matrix,
    w: MagicWitness,
    steps: Option<usize>,
    window: Option<u32>,
    sequence: Option<&Path>,
    pairs: usize,
) -> Result<Outcome> {
    if sequence.is_none() && window.is_none() {
        return Err(Error::Precondition("sznagy needs --sequence, --window or both".into()));
    }
    let desc = t.descriptor();
    let op = SzNagyOperator::new(t, w)?;
    let mut out = Map::new();
    let mut holds = true;
    if let Some(path) = sequence {
        let mut x = ctx.sequence(path, desc)?;
        if x.dim() != op.dim() {
            return Err(Error::InvalidDimension(format!(
                "sequence has dimension {}, operator has {}",
                x.dim(),
                op.dim()
            )));
        }
        let mut trace = vec![json!({ "step": 0, "sequence": io::sequence_to_json(&x) })];
        for k in 1..=steps.unwrap_or(1) {
            x = op.apply(&x)?;
            trace.push(json!({ "step": k, "sequence": io::sequence_to_json(&x) }));
        }
        out.insert("trace".into(), Value::Array(trace));
    }
    if let Some(window) = window {
        let r = op.verify_unitary_window(window, pairs, ctx.seed)?;
        holds = r.passed();
        out.insert(
            "window".into(),
            json!({
                "window": window,
                "basis_checked": r.basis_checked,
                "pairs_checked": r.pairs_checked,
                "passed": r.passed(),
                "failure": r.failure.map(|f| json!({
                    "check": f.check,
                    "index": f.index,
                    "coordinate": f.coordinate,
                })),
            }),
        );
    }
    Ok(Outcome::new(holds, Value::Object(out)))
}

fn axioms(ctx: &Ctx, input: Option<&Path>, dim: usize, samples: usize, require: &[Predicate]) -> Result<Outcome> {
    let operator = input.map(|p| ctx.matrix(p)).transpose()?;
    let desc = match &operator {
        Some(m) => m.descriptor(),
        None => ctx
            .fallback
            .ok_or_else(|| Error::Precondition("axioms needs --p or --input".into()))?,
    };
    let d = operator.as_ref().map_or(dim, Matrix::cols);
    if d == 0 {
        return Err(Error::InvalidDimension("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut vs: Vec<Vector> = (0..d).map(|j| Vector::basis(d, j, desc)).collect();
    vs.extend((0..samples).map(|_| random_vector(&mut rng, d, desc)));
    let report = check_axioms(desc, &vs)?;

    let mut out = Map::new();
    let checks: Map<String, Value> = report
        .checks
        .iter()
        .map(|c| {
            (
                c.axiom.name().to_string(),
                json!({ "passed": c.passed, "counterexample": c.counterexample }),
            )
        })
        .collect();
    out.insert("axioms".into(), Value::Object(checks));
    out.insert("gram_is_identity".into(), json!(report.gram_is_identity));
    out.insert("samples".into(), json!(vs.len()));
    let mut holds = report.all_passed();
    if let Some(m) = &operator {
        let preds = [
            (Predicate::Unitary, "is_unitary", m.is_unitary()),
            (Predicate::Isometry, "is_isometry", m.is_isometry()),
            (Predicate::SelfAdjoint, "is_self_adjoint", m.is_self_adjoint()),
            (Predicate::Projection, "is_projection", m.is_projection()),
        ];
        let mut ops = Map::new();
        for (pred, name, value) in preds {
            ops.insert(name.into(), json!(value));
            if require.contains(&pred) && !value {
                holds = false;
            }
        }
        ops.insert("op_norm".into(), rational(&m.op_norm()));
        out.insert("operator".into(), Value::Object(ops));
    } else if !require.is_empty() {
        return Err(Error::Precondition("--require needs --input".into()));
    }
    Ok(Outcome::new(holds, Value::Object(out)))
}

/// Runs one invocation and returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_HOLDS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_ERROR;
        }
    };
    let text = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcome.json).expect("json serializes");
            s.push('\n');
            s
        }
        Format::Plain => outcome.plain,
        Format::Csv => match outcome.csv {
            Some(csv) => csv,
            None => {
                let _ = writeln!(stderr, "error: csv output is only available for dilate and census");
                return EXIT_ERROR;
            }
        },
    };
    if stdout.write_all(text.as_bytes()).is_err() {
        return EXIT_ERROR;
    }
    if outcome.holds {
        EXIT_HOLDS
    } else {
        let _ = writeln!(stderr, "property does not hold");
        EXIT_FAILS
    }
}
