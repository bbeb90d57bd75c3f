//! Command implementations behind the `respl` binary.
//!
//! Every command returns an [`Outcome`] holding the exit code and the rendered
//! output, so the binary and the tests share one code path.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use respl_core::grassmannian::{
    act_left, cell_dimension, cell_index_of, census, gamma_plus_operator, CellIndex, CellRecord,
    GrassPoint, DEFAULT_RANK_TOL,
};
use respl_core::io::MatrixFile;
use respl_core::lie::{verify_manin_triple, ManinReport};
use respl_core::operator::{Op, SchattenExponent, Sign, Window, C64};
use respl_core::poisson::{
    group_cocycle_residual, jacobi_residual, pi_r, tangent_bracket_check, Derivative, GroupElement,
    GroupKind, QuotientCovector, Structure,
};
use respl_core::truncation::{growth_experiment, GrowthRow, TruncationKind};
use respl_core::{rng, Error};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MAX_N: usize = 1024;
pub const MAX_TRIALS: usize = 1_000_000;
pub const MAX_CENSUS_N: usize = 5;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_BREACH: u8 = 2;
pub const EXIT_AMBIGUOUS: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "respl",
    version,
    about = "Verifiers and experiments for restricted Poisson-Lie structures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the Iwasawa Manin triples for both signs.
    VerifyManin(ManinArgs),
    /// Check the cocycle law, Jacobi identity and tangent bracket of one Poisson-Lie group.
    VerifyPoisson(PoissonArgs),
    /// Norm ratios of triangular truncation on the witness family.
    TruncationGrowth(GrowthArgs),
    /// Schubert cell census or classification of a frame.
    Schubert(SchubertArgs),
    /// Trajectory of a point under the Γ+ flow.
    GammaFlow(GammaArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Window half size N (matrices are 2N x 2N).
    #[arg(long = "n", default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides every residual tolerance of the command.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ManinArgs {
    #[command(flatten)]
    pub common: Common,
    /// Norm used to normalize random draws: 1, 2, inf, res, 1,2 or a real p >= 1.
    #[arg(long, default_value = "2")]
    pub p: String,
}

#[derive(Args, Debug)]
pub struct PoissonArgs {
    #[command(flatten)]
    pub common: Common,
    /// UnitaryP, BPlus, BMinus, URes or BResPlus.
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Finite-difference step for the tangent check.
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TruncArg {
    Lower,
    StrictUpper,
    Upper,
    StrictLower,
}

impl From<TruncArg> for TruncationKind {
    fn from(t: TruncArg) -> Self {
        match t {
            TruncArg::Lower => TruncationKind::Lower,
            TruncArg::StrictUpper => TruncationKind::StrictUpper,
            TruncArg::Upper => TruncationKind::Upper,
            TruncArg::StrictLower => TruncationKind::StrictLower,
        }
    }
}

#[derive(Args, Debug)]
pub struct GrowthArgs {
    #[command(flatten)]
    pub common: Common,
    /// Strictly ascending comma-separated window half sizes.
    #[arg(long, default_value = "8,16,32,64,128,256")]
    pub n_list: String,
    #[arg(long, value_enum, default_value_t = TruncArg::Lower)]
    pub trunc: TruncArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchubertMode {
    Census,
    Classify,
}

#[derive(Args, Debug)]
pub struct SchubertArgs {
    #[arg(value_enum)]
    pub mode: SchubertMode,
    #[command(flatten)]
    pub common: Common,
    /// Frame file `{"N": n, "rows": [[[re, im], ...], ...]}` of shape 2N x N.
    #[arg(long)]
    pub frame: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GammaArgs {
    #[command(flatten)]
    pub common: Common,
    /// Coefficients f_1,...,f_K; each entry is `re` or `re:im`.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: String,
    /// Starting cell index S as comma-separated integers (default: {-N,...,-1}).
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    /// Starting frame file; overrides --start.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
}

/// Exit code, rendered report, and an optional message for stderr.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub output: String,
    pub diagnostics: Option<String>,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            output: String::new(),
            diagnostics: Some(msg.into()),
        }
    }
}

struct UsageError(String);

impl From<Error> for UsageError {
    fn from(e: Error) -> Self {
        UsageError(e.to_string())
    }
}

type CmdResult = std::result::Result<Outcome, UsageError>;

pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::VerifyManin(a) => cmd_verify_manin(a),
        Command::VerifyPoisson(a) => cmd_verify_poisson(a),
        Command::TruncationGrowth(a) => cmd_truncation_growth(a),
        Command::Schubert(a) => cmd_schubert(a),
        Command::GammaFlow(a) => cmd_gamma_flow(a),
    };
    result.unwrap_or_else(|UsageError(msg)| Outcome::usage(msg))
}

fn validate(c: &Common) -> std::result::Result<Window, UsageError> {
    if c.n == 0 || c.n > MAX_N {
        return Err(UsageError(format!(
            "--n must be in 1..={MAX_N}, got {}",
            c.n
        )));
    }
    if c.trials == 0 || c.trials > MAX_TRIALS {
        return Err(UsageError(format!(
            "--trials must be in 1..={MAX_TRIALS}, got {}",
            c.trials
        )));
    }
    if let Some(t) = c.tol {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(UsageError(format!(
                "--tol must be a finite nonnegative number, got {t}"
            )));
        }
    }
    Ok(Window::new(c.n)?)
}

/// Fields every JSON report starts with.
#[derive(Serialize)]
struct Envelope<T: Serialize> {
    command: &'static str,
    version: &'static str,
    seed: u64,
    #[serde(rename = "N")]
    n: usize,
    tolerances: BTreeMap<&'static str, f64>,
    #[serde(flatten)]
    body: T,
    pass: bool,
}

fn render_json<T: Serialize>(env: &Envelope<T>) -> String {
    let mut s = serde_json::to_string_pretty(env).expect("report serializes");
    s.push('\n');
    s
}

fn render_csv<R: Serialize>(rows: &[R]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

fn verdict(pass: bool) -> u8 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_BREACH
    }
}

// ---------------------------------------------------------------- verify-manin

pub const MANIN_TOL: f64 = 1e-9;
pub const NONDEGENERACY_MIN: f64 = 1e-6;

#[derive(Serialize)]
struct ManinBody {
    trials: usize,
    p: String,
    reports: Vec<ManinReport>,
}

#[derive(Serialize)]
struct ManinRow {
    sign: String,
    #[serde(rename = "N")]
    n: usize,
    trials: usize,
    seed: u64,
    p: String,
    invariance: f64,
    isotropy_u: f64,
    isotropy_b: f64,
    decomposition: f64,
    closure: f64,
    nondegeneracy_min_sv: f64,
    pass: bool,
}

fn cmd_verify_manin(a: &ManinArgs) -> CmdResult {
    let window = validate(&a.common)?;
    let p: SchattenExponent = a.p.parse()?;
    let tol = a.common.tol.unwrap_or(MANIN_TOL);
    let reports = [Sign::Plus, Sign::Minus]
        .into_iter()
        .map(|s| verify_manin_triple(window, s, p, a.common.trials, a.common.seed))
        .collect::<respl_core::Result<Vec<_>>>()?;
    let ok =
        |r: &ManinReport| r.max_residual() <= tol && r.nondegeneracy_min_sv > NONDEGENERACY_MIN;
    let pass = reports.iter().all(ok);
    let output = match a.common.format {
        Format::Json => render_json(&Envelope {
            command: "verify-manin",
            version: VERSION,
            seed: a.common.seed,
            n: a.common.n,
            tolerances: BTreeMap::from([
                ("residual", tol),
                ("nondegeneracy_min_sv", NONDEGENERACY_MIN),
            ]),
            body: ManinBody {
                trials: a.common.trials,
                p: p.label(),
                reports: reports.clone(),
            },
            pass,
        }),
        Format::Csv => render_csv(
            &reports
                .iter()
                .map(|r| ManinRow {
                    sign: format!("{:?}", r.sign).to_lowercase(),
                    n: r.n,
                    trials: r.trials,
                    seed: r.seed,
                    p: p.label(),
                    invariance: r.invariance_residual,
                    isotropy_u: r.isotropy_residual_u,
                    isotropy_b: r.isotropy_residual_b,
                    decomposition: r.decomposition_residual,
                    closure: r.closure_residual,
                    nondegeneracy_min_sv: r.nondegeneracy_min_sv,
                    pass: ok(r),
                })
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Outcome {
        code: verdict(pass),
        output,
        diagnostics: None,
    })
}

// -------------------------------------------------------------- verify-poisson

pub const COCYCLE_TOL: f64 = 1e-8;
pub const JACOBI_TOL: f64 = 1e-8;
pub const TANGENT_TOL: f64 = 1e-6;

/// Per-trial residuals of the Poisson-Lie checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PoissonTrial {
    /// `|Π_r(e)(c1, c2)|`; zero when exact.
    pub identity_value: f64,
    pub cocycle: f64,
    pub jacobi: f64,
    /// `|closed − finite difference|` for unit-norm direction and covectors.
    pub tangent: f64,
}

fn unit(a: &Op) -> Op {
    let f = a.frobenius();
    if f > 0.0 {
        a.scale_re(1.0 / f)
    } else {
        a.clone()
    }
}

fn unit_covector(st: &Structure, window: Window, r: &mut rng::Rng64) -> QuotientCovector {
    let c = st.random_covector(window, r);
    QuotientCovector::canonical(&unit(c.representative()), st.quotient_kind())
}

/// Residuals of one randomized trial; deterministic in `(seed, trial)`.
pub fn poisson_trial(
    st: &Structure,
    window: Window,
    seed: u64,
    trial: u64,
    h: f64,
) -> respl_core::Result<PoissonTrial> {
    let mut r = rng::trial(seed, trial);
    let g = st.random_element(window, &mut r);
    let u = st.random_element(window, &mut r);
    let cs: Vec<QuotientCovector> = (0..3).map(|_| unit_covector(st, window, &mut r)).collect();
    let x = unit(&st.random_direction(window, &mut r));
    let e = GroupElement::identity(st.kind, window);
    let identity_value = pi_r(st, &e, &cs[0], &cs[1])?.abs();
    let cocycle = group_cocycle_residual(st, &g, &u, &cs)?.normalized();
    let jacobi =
        jacobi_residual(st, &g, [&cs[0], &cs[1], &cs[2]], Derivative::ClosedForm)?.normalized();
    let (closed, fd) = tangent_bracket_check(st, &x, &cs[0], &cs[1], h)?;
    Ok(PoissonTrial {
        identity_value,
        cocycle,
        jacobi,
        tangent: (closed - fd).abs(),
    })
}

#[derive(Serialize)]
struct PoissonBody {
    kind: &'static str,
    p: String,
    sign: String,
    trials: usize,
    h: f64,
    identity_max_abs: f64,
    max_cocycle_residual: f64,
    max_jacobi_residual: f64,
    max_tangent_residual: f64,
}

fn cmd_verify_poisson(a: &PoissonArgs) -> CmdResult {
    let window = validate(&a.common)?;
    let kind = GroupKind::parse(&a.kind)
        .ok_or_else(|| UsageError(format!("unknown group kind '{}'", a.kind)))?;
    let p: SchattenExponent = a.p.parse()?;
    let st = Structure::with_sign(kind, a.sign.into())?;
    if !(a.h > 0.0) || !a.h.is_finite() {
        return Err(UsageError(format!("--h must be positive, got {}", a.h)));
    }
    let trials: Vec<PoissonTrial> = (0..a.common.trials as u64)
        .into_par_iter()
        .map(|t| poisson_trial(&st, window, a.common.seed, t, a.h))
        .collect::<respl_core::Result<_>>()?;
    let max = |f: fn(&PoissonTrial) -> f64| trials.iter().map(f).fold(0.0, f64::max);
    let body = PoissonBody {
        kind: kind.name(),
        p: p.label(),
        sign: format!("{:?}", st.sign).to_lowercase(),
        trials: a.common.trials,
        h: a.h,
        identity_max_abs: max(|t| t.identity_value),
        max_cocycle_residual: max(|t| t.cocycle),
        max_jacobi_residual: max(|t| t.jacobi),
        max_tangent_residual: max(|t| t.tangent),
    };
    let (ct, jt, tt) = match a.common.tol {
        Some(t) => (t, t, t),
        None => (COCYCLE_TOL, JACOBI_TOL, TANGENT_TOL),
    };
    let pass = body.identity_max_abs == 0.0
        && body.max_cocycle_residual <= ct
        && body.max_jacobi_residual <= jt
        && body.max_tangent_residual <= tt;
    let output = match a.common.format {
        Format::Json => render_json(&Envelope {
            command: "verify-poisson",
            version: VERSION,
            seed: a.common.seed,
            n: a.common.n,
            tolerances: BTreeMap::from([("cocycle", ct), ("jacobi", jt), ("tangent", tt)]),
            body,
            pass,
        }),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                #[serde(rename = "N")]
                n: usize,
                seed: u64,
                #[serde(flatten)]
                body: &'a PoissonBody,
                pass: bool,
            }
            render_csv_flat(&Row {
                n: a.common.n,
                seed: a.common.seed,
                body: &body,
                pass,
            })
        }
    };
    Ok(Outcome {
        code: verdict(pass),
        output,
        diagnostics: None,
    })
}

/// One-row CSV for a struct with flattened fields (the `csv` serializer does not
/// support `#[serde(flatten)]`, so go through a JSON object).
fn render_csv_flat<R: Serialize>(row: &R) -> String {
    let v = serde_json::to_value(row).expect("row serializes");
    let obj = v.as_object().expect("row is an object");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(obj.keys()).expect("header");
    w.write_record(obj.values().map(|v| match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }))
    .expect("record");
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

// ----------------------------------------------------------- truncation-growth

pub const HS_BOUND_TOL: f64 = 1e-9;

fn parse_n_list(s: &str) -> std::result::Result<Vec<usize>, UsageError> {
    let list = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| UsageError(format!("bad --n-list entry '{t}'")))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if list.is_empty() {
        return Err(UsageError("--n-list is empty".into()));
    }
    if let Some(&n) = list.iter().find(|&&n| n == 0 || n > MAX_N) {
        return Err(UsageError(format!(
            "--n-list entries must be in 1..={MAX_N}, got {n}"
        )));
    }
    Ok(list)
}

fn strictly_increasing(rows: &[GrowthRow]) -> bool {
    rows.windows(2).all(|w| w[1].ratio > w[0].ratio)
}

#[derive(Serialize)]
struct GrowthChecks {
    e2_bounded: bool,
    e1_strictly_increasing: bool,
    einf_strictly_increasing: bool,
    /// Last ratio over first ratio for `e = 1` and `e = ∞`.
    e1_growth_factor: f64,
    einf_growth_factor: f64,
}

#[derive(Serialize)]
struct GrowthBody {
    n_list: Vec<usize>,
    trunc_kind: &'static str,
    rows: Vec<GrowthRow>,
    checks: GrowthChecks,
}

fn cmd_truncation_growth(a: &GrowthArgs) -> CmdResult {
    validate(&a.common)?;
    let list = parse_n_list(&a.n_list)?;
    let k: TruncationKind = a.trunc.into();
    let seed = a.common.seed;
    let one = growth_experiment(&list, SchattenExponent::One, k, seed)?;
    let two = growth_experiment(&list, SchattenExponent::Two, k, seed)?;
    let inf = growth_experiment(&list, SchattenExponent::Inf, k, seed)?;
    let bound = 1.0 + a.common.tol.unwrap_or(HS_BOUND_TOL);
    let factor = |rows: &[GrowthRow]| rows.last().unwrap().ratio / rows[0].ratio;
    let checks = GrowthChecks {
        e2_bounded: two.iter().all(|r| r.ratio <= bound),
        e1_strictly_increasing: strictly_increasing(&one),
        einf_strictly_increasing: strictly_increasing(&inf),
        e1_growth_factor: factor(&one),
        einf_growth_factor: factor(&inf),
    };
    let pass =
        checks.e2_bounded && checks.e1_strictly_increasing && checks.einf_strictly_increasing;
    let rows: Vec<GrowthRow> = one.into_iter().chain(two).chain(inf).collect();
    let output = match a.common.format {
        Format::Json => render_json(&Envelope {
            command: "truncation-growth",
            version: VERSION,
            seed,
            n: *list.last().unwrap(),
            tolerances: BTreeMap::from([("e2_bound", bound - 1.0)]),
            body: GrowthBody {
                n_list: list.clone(),
                trunc_kind: k.label(),
                rows,
                checks,
            },
            pass,
        }),
        Format::Csv => render_csv(&rows),
    };
    Ok(Outcome {
        code: verdict(pass),
        output,
        diagnostics: None,
    })
}

// -------------------------------------------------------------------- schubert

fn join_s(s: &[i64]) -> String {
    s.iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Serialize)]
struct CensusBody {
    cells: Vec<CellRecord>,
}

#[derive(Serialize)]
struct CensusRow {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "S")]
    s: String,
    dim: usize,
    dim_minus: usize,
    intersection_dim: usize,
}

#[derive(Serialize)]
struct ClassifyBody {
    ambiguous: bool,
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    s: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
}

fn read_frame(path: &PathBuf) -> std::result::Result<GrassPoint, UsageError> {
    let file = MatrixFile::read(path)?;
    let window = file.window()?;
    Ok(GrassPoint::from_columns(window, &file.to_matrix()?)?)
}

fn cmd_schubert(a: &SchubertArgs) -> CmdResult {
    match a.mode {
        SchubertMode::Census => {
            let window = validate(&a.common)?;
            if a.common.n > MAX_CENSUS_N {
                return Err(UsageError(format!(
                    "census supports N <= {MAX_CENSUS_N}, got {}",
                    a.common.n
                )));
            }
            let cells = census(window)?;
            let nn = a.common.n * a.common.n;
            let pass = cells
                .iter()
                .all(|c| c.intersection_dim == 0 && c.dim + c.dim_minus == nn);
            let output = match a.common.format {
                Format::Json => render_json(&Envelope {
                    command: "schubert-census",
                    version: VERSION,
                    seed: a.common.seed,
                    n: a.common.n,
                    tolerances: BTreeMap::from([("tangent_rank_rel", 1e-10)]),
                    body: CensusBody {
                        cells: cells.clone(),
                    },
                    pass,
                }),
                Format::Csv => render_csv(
                    &cells
                        .iter()
                        .map(|c| CensusRow {
                            n: c.n,
                            s: join_s(&c.s),
                            dim: c.dim,
                            dim_minus: c.dim_minus,
                            intersection_dim: c.intersection_dim,
                        })
                        .collect::<Vec<_>>(),
                ),
            };
            Ok(Outcome {
                code: verdict(pass),
                output,
                diagnostics: None,
            })
        }
        SchubertMode::Classify => {
            let path = a
                .frame
                .as_ref()
                .ok_or_else(|| UsageError("classify needs --frame".into()))?;
            let point = read_frame(path)?;
            let n = point.window().half_size();
            let tol = a.common.tol.unwrap_or(DEFAULT_RANK_TOL);
            if !(tol > 0.0) {
                return Err(UsageError("rank tolerance must be positive".into()));
            }
            let (body, code, diag) = match cell_index_of(&point, tol) {
                Ok(s) => {
                    let dim = cell_dimension(&s, point.window());
                    (
                        ClassifyBody {
                            ambiguous: false,
                            s: Some(s.elements().to_vec()),
                            dim: Some(dim),
                            sigma: None,
                        },
                        EXIT_PASS,
                        None,
                    )
                }
                Err(e @ Error::AmbiguousCell { sigma, .. }) => (
                    ClassifyBody {
                        ambiguous: true,
                        s: None,
                        dim: None,
                        sigma: Some(sigma),
                    },
                    EXIT_AMBIGUOUS,
                    Some(e.to_string()),
                ),
                Err(e) => return Err(e.into()),
            };
            let output = match a.common.format {
                Format::Json => render_json(&Envelope {
                    command: "schubert-classify",
                    version: VERSION,
                    seed: a.common.seed,
                    n,
                    tolerances: BTreeMap::from([("rank_rel", tol)]),
                    body,
                    pass: code == EXIT_PASS,
                }),
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row {
                        #[serde(rename = "N")]
                        n: usize,
                        ambiguous: bool,
                        #[serde(rename = "S")]
                        s: String,
                        dim: String,
                        sigma: String,
                    }
                    render_csv(&[Row {
                        n,
                        ambiguous: body.ambiguous,
                        s: body.s.as_deref().map(join_s).unwrap_or_default(),
                        dim: body.dim.map(|d| d.to_string()).unwrap_or_default(),
                        sigma: body.sigma.map(|s| s.to_string()).unwrap_or_default(),
                    }])
                }
            };
            Ok(Outcome {
                code,
                output,
                diagnostics: diag,
            })
        }
    }
}

// ------------------------------------------------------------------ gamma-flow

fn parse_coeffs(s: &str) -> std::result::Result<Vec<C64>, UsageError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let bad = || UsageError(format!("bad coefficient '{t}' (use re or re:im)"));
            let mut parts = t.trim().splitn(2, ':');
            let re = parts
                .next()
                .ok_or_else(bad)?
                .trim()
                .parse::<f64>()
                .map_err(|_| bad())?;
            let im = match parts.next() {
                Some(x) => x.trim().parse::<f64>().map_err(|_| bad())?,
                None => 0.0,
            };
            if !re.is_finite() || !im.is_finite() {
                return Err(bad());
            }
            Ok(C64::new(re, im))
        })
        .collect()
}

fn parse_cell(s: &str) -> std::result::Result<CellIndex, UsageError> {
    let v = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| UsageError(format!("bad cell index entry '{t}'")))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(CellIndex::new(v))
}

#[derive(Serialize)]
struct FlowSample {
    t: f64,
    #[serde(rename = "S")]
    s: Vec<i64>,
    distance: f64,
}

#[derive(Serialize)]
struct FlowBody {
    coeffs: Vec<[f64; 2]>,
    start: Vec<i64>,
    cell_constant: bool,
    trajectory: Vec<FlowSample>,
}

fn cmd_gamma_flow(a: &GammaArgs) -> CmdResult {
    let mut window = validate(&a.common)?;
    let coeffs = parse_coeffs(&a.coeffs)?;
    let start = match (&a.frame, &a.start) {
        (Some(path), _) => {
            let p = read_frame(path)?;
            window = p.window();
            p
        }
        (None, Some(s)) => GrassPoint::basepoint(window, &parse_cell(s)?)?,
        (None, None) => GrassPoint::basepoint(window, &CellIndex::top(window).reflected())?,
    };
    if coeffs.len() >= window.dim() {
        return Err(UsageError(format!(
            "need K < 2N = {}, got K = {}",
            window.dim(),
            coeffs.len()
        )));
    }
    if a.steps == 0 || a.steps > MAX_TRIALS || !a.t_max.is_finite() {
        return Err(UsageError(
            "--steps must be positive and --t-max finite".into(),
        ));
    }
    let tol = a.common.tol.unwrap_or(DEFAULT_RANK_TOL);
    if !(tol > 0.0) {
        return Err(UsageError("rank tolerance must be positive".into()));
    }
    let start_cell = match cell_index_of(&start, tol) {
        Ok(s) => s,
        Err(e @ Error::AmbiguousCell { .. }) => {
            return Ok(Outcome {
                code: EXIT_AMBIGUOUS,
                output: String::new(),
                diagnostics: Some(e.to_string()),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mut trajectory = Vec::with_capacity(a.steps + 1);
    for j in 0..=a.steps {
        let t = a.t_max * j as f64 / a.steps as f64;
        let scaled: Vec<C64> = coeffs.iter().map(|f| f * t).collect();
        let g = gamma_plus_operator(&scaled, window)?;
        let p = act_left(g.matrix(), &start)?;
        let s = match cell_index_of(&p, tol) {
            Ok(s) => s,
            Err(e @ Error::AmbiguousCell { .. }) => {
                return Ok(Outcome {
                    code: EXIT_AMBIGUOUS,
                    output: String::new(),
                    diagnostics: Some(e.to_string()),
                })
            }
            Err(e) => return Err(e.into()),
        };
        trajectory.push(FlowSample {
            t,
            s: s.elements().to_vec(),
            distance: start.distance(&p),
        });
    }
    let cell_constant = trajectory.iter().all(|x| x.s == start_cell.elements());
    let output = match a.common.format {
        Format::Json => render_json(&Envelope {
            command: "gamma-flow",
            version: VERSION,
            seed: a.common.seed,
            n: window.half_size(),
            tolerances: BTreeMap::from([("rank_rel", tol)]),
            body: FlowBody {
                coeffs: coeffs.iter().map(|z| [z.re, z.im]).collect(),
                start: start_cell.elements().to_vec(),
                cell_constant,
                trajectory,
            },
            pass: cell_constant,
        }),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                t: f64,
                #[serde(rename = "S")]
                s: String,
                distance: f64,
            }
            render_csv(
                &trajectory
                    .iter()
                    .map(|x| Row {
                        t: x.t,
                        s: join_s(&x.s),
                        distance: x.distance,
                    })
                    .collect::<Vec<_>>(),
            )
        }
    };
    Ok(Outcome {
        code: verdict(cell_constant),
        output,
        diagnostics: None,
    })
}
