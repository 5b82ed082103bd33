//! Command-line front end: argument and config parsing, verb dispatch,
//! JSON/CSV/SVG emission.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::certifier::{self, Certificate, CertifyError, Verdict};
use crate::empirics::{self, EmpiricsError, DEFAULT_RECT_BUDGET};
use crate::exactnum::Rational;
use crate::exprfn::{Expr, ExprError};
use crate::ifs_core::{CylinderWord, HomogeneousIfs, IfsError, InfiniteCode, Point};
use crate::qexp::{self, Base, Decision, DigitSeq, QexpError, QuasiGreedy, DEFAULT_BUDGET};
use crate::union::IntervalUnion;

pub const BUDGET_ENV: &str = "FRACTARITH_BUDGET";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_ESTABLISHED: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{what}: {msg}")]
    Json { what: String, msg: String },
    #[error(transparent)]
    Ifs(#[from] IfsError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Qexp(#[from] QexpError),
    #[error(transparent)]
    Empirics(#[from] EmpiricsError),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "fractarith", version, about = "Exact interval certificates for images of self-similar sets")]
struct Cli {
    /// RunConfig JSON file; flags take precedence over its entries.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Human-readable table instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Rectangle / node budget (overrides FRACTARITH_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Convex hull, gaps and largest gap of an IFS.
    Gaps(SingleIfsArgs),
    /// Newhouse thickness lower bound of an IFS.
    Thickness(SingleIfsArgs),
    /// Pointwise ratio condition at a point of K1 × K2.
    Check(CheckArgs),
    /// Global conditions λ(b-a) > κ2 and κ1 < d-c.
    CheckCor2(PairArgs),
    /// Certificate for one cylinder rectangle.
    Certify(CertifyArgs),
    /// Searches cylinder rectangles along two codes for a certificate.
    AutoCertify(AutoArgs),
    /// Re-checks a certificate.
    Replay(CertArgs),
    /// Brute-force image cover of f over a rectangle.
    Cover(CoverArgs),
    /// Compares a certificate with a brute-force cover.
    OracleCheck(OracleArgs),
    /// Box-counting dimension estimate from level covers.
    Boxdim(BoxdimArgs),
    /// Quasi-greedy expansion of 1 in base q.
    Qg(QgArgs),
    /// Lexicographic uniqueness test for a digit sequence.
    Univoque(UnivoqueArgs),
    /// Decides K_q ⊆ U_q and prints the K_q data.
    Kq(QArgs),
    /// Outer cover of U_q from digit prefixes.
    UqCover(UqCoverArgs),
    /// Certificate for an interval inside f(U_q, U_q).
    UqCertify(UqCertifyArgs),
    /// The threshold base q* as an algebraic number.
    Qstar,
}

#[derive(Args, Debug, Default)]
struct SingleIfsArgs {
    /// `cantor`, `kq:<q>`, inline JSON, or a JSON file.
    #[arg(long)]
    ifs: Option<String>,
    /// Base q; selects K_q when --ifs is absent.
    #[arg(long)]
    q: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Default)]
struct PairArgs {
    /// `cantor`, `kq:<q>`, inline JSON, or a JSON file.
    #[arg(long)]
    ifs1: Option<String>,
    /// Defaults to --ifs1.
    #[arg(long)]
    ifs2: Option<String>,
    /// Base q; selects K_q × K_q when no IFS is given.
    #[arg(long)]
    q: Option<String>,
}

#[derive(Args, Debug, Default)]
struct PointArgs {
    /// Extreme points of the two hulls, e.g. `left-right`.
    #[arg(long, value_enum)]
    point_corner: Option<Corner>,
    /// Address of the first coordinate, e.g. `21(1)`.
    #[arg(long)]
    code1: Option<String>,
    #[arg(long)]
    code2: Option<String>,
    /// Exact first coordinate.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
}

#[derive(Args, Debug, Default)]
struct OutputArgs {
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[command(flatten)]
    point: PointArgs,
    /// Rank of the rectangle the gradient is enclosed over.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    /// e.g. `212`, `2,1,2` or `()`.
    #[arg(long)]
    word1: Option<String>,
    #[arg(long)]
    word2: Option<String>,
    /// Certificate output file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AutoArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[command(flatten)]
    point: PointArgs,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertArgs {
    /// Certificate file, or `-` for stdin.
    #[arg(long)]
    cert: Option<String>,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long)]
    word1: Option<String>,
    #[arg(long)]
    word2: Option<String>,
    /// Rank of the enumerated rectangles.
    #[arg(long)]
    depth: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    cert: CertArgs,
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args, Debug)]
struct BoxdimArgs {
    #[command(flatten)]
    ifs: SingleIfsArgs,
    /// First rank of the fit.
    #[arg(long)]
    from: Option<usize>,
    /// Last rank of the fit.
    #[arg(long)]
    to: Option<usize>,
}

#[derive(Args, Debug)]
struct QArgs {
    #[arg(long)]
    q: Option<String>,
}

#[derive(Args, Debug)]
struct QgArgs {
    #[arg(long)]
    q: Option<String>,
    /// Digits shown in the prefix.
    #[arg(long)]
    digits: Option<usize>,
}

#[derive(Args, Debug)]
struct UnivoqueArgs {
    #[arg(long)]
    q: Option<String>,
    /// Eventually periodic 0-1 sequence, e.g. `1(10)`.
    #[arg(long)]
    seq: Option<String>,
}

#[derive(Args, Debug)]
struct UqCoverArgs {
    #[arg(long)]
    q: Option<String>,
    /// Prefix length.
    #[arg(long)]
    depth: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct UqCertifyArgs {
    #[arg(long)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Corner {
    LeftLeft,
    LeftRight,
    RightLeft,
    RightRight,
}

/// An IFS given in a config file: a preset name / path, or the IFS object.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum IfsSource {
    Named(String),
    Inline(Value),
}

/// File-based counterpart of the command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(alias = "ifs")]
    pub ifs1: Option<IfsSource>,
    pub ifs2: Option<IfsSource>,
    pub q: Option<String>,
    pub f: Option<String>,
    pub word1: Option<String>,
    pub word2: Option<String>,
    pub code1: Option<String>,
    pub code2: Option<String>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub point_corner: Option<Corner>,
    pub depth: Option<usize>,
    pub max_depth: Option<usize>,
    pub rank_from: Option<usize>,
    pub rank_to: Option<usize>,
    pub digits: Option<usize>,
    pub budget: Option<u64>,
    pub seq: Option<String>,
    pub cert: Option<String>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub pretty: Option<bool>,
    #[serde(skip)]
    budget_flag: Option<u64>,
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<RunConfig, CliError> {
        let text = read_text(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Json { what: format!("config {}", path.display()), msg: e.to_string() })
    }

    fn apply_pair(&mut self, a: PairArgs) {
        set(&mut self.ifs1, a.ifs1.map(IfsSource::Named));
        set(&mut self.ifs2, a.ifs2.map(IfsSource::Named));
        set(&mut self.q, a.q);
    }

    fn apply_single(&mut self, a: SingleIfsArgs) {
        set(&mut self.ifs1, a.ifs.map(IfsSource::Named));
        set(&mut self.q, a.q);
        self.apply_output(a.out);
    }

    fn apply_point(&mut self, a: PointArgs) {
        set(&mut self.point_corner, a.point_corner);
        set(&mut self.code1, a.code1);
        set(&mut self.code2, a.code2);
        set(&mut self.x, a.x);
        set(&mut self.y, a.y);
    }

    fn apply_output(&mut self, a: OutputArgs) {
        set(&mut self.csv, a.csv);
        set(&mut self.svg, a.svg);
    }

    fn apply_verb(&mut self, verb: Verb) -> VerbKind {
        use VerbKind as K;
        match verb {
            Verb::Gaps(a) => {
                self.apply_single(a);
                K::Gaps
            }
            Verb::Thickness(a) => {
                self.apply_single(a);
                K::Thickness
            }
            Verb::Check(a) => {
                self.apply_pair(a.pair);
                set(&mut self.f, a.f);
                self.apply_point(a.point);
                set(&mut self.depth, a.depth);
                K::Check
            }
            Verb::CheckCor2(a) => {
                self.apply_pair(a);
                K::CheckCor2
            }
            Verb::Certify(a) => {
                self.apply_pair(a.pair);
                set(&mut self.f, a.f);
                set(&mut self.word1, a.word1);
                set(&mut self.word2, a.word2);
                set(&mut self.out, a.out);
                K::Certify
            }
            Verb::AutoCertify(a) => {
                self.apply_pair(a.pair);
                set(&mut self.f, a.f);
                self.apply_point(a.point);
                set(&mut self.max_depth, a.max_depth);
                set(&mut self.out, a.out);
                K::AutoCertify
            }
            Verb::Replay(a) => {
                set(&mut self.cert, a.cert);
                K::Replay
            }
            Verb::Cover(a) => {
                self.apply_pair(a.pair);
                set(&mut self.f, a.f);
                set(&mut self.word1, a.word1);
                set(&mut self.word2, a.word2);
                set(&mut self.depth, a.depth);
                self.apply_output(a.out);
                K::Cover
            }
            Verb::OracleCheck(a) => {
                set(&mut self.cert, a.cert.cert);
                set(&mut self.depth, a.depth);
                K::OracleCheck
            }
            Verb::Boxdim(a) => {
                self.apply_single(a.ifs);
                set(&mut self.rank_from, a.from);
                set(&mut self.rank_to, a.to);
                K::Boxdim
            }
            Verb::Qg(a) => {
                set(&mut self.q, a.q);
                set(&mut self.digits, a.digits);
                K::Qg
            }
            Verb::Univoque(a) => {
                set(&mut self.q, a.q);
                set(&mut self.seq, a.seq);
                K::Univoque
            }
            Verb::Kq(a) => {
                set(&mut self.q, a.q);
                K::Kq
            }
            Verb::UqCover(a) => {
                set(&mut self.q, a.q);
                set(&mut self.depth, a.depth);
                self.apply_output(a.out);
                K::UqCover
            }
            Verb::UqCertify(a) => {
                set(&mut self.q, a.q);
                set(&mut self.f, a.f);
                set(&mut self.max_depth, a.max_depth);
                set(&mut self.out, a.out);
                K::UqCertify
            }
            Verb::Qstar => K::Qstar,
        }
    }

    /// Parses every present entry; nothing is computed before this succeeds.
    pub fn validate(&self) -> Result<Settings, CliError> {
        let q = self.q.as_deref().map(str::parse::<Base>).transpose()?;
        let ifs1 = self.ifs1.as_ref().map(load_ifs).transpose()?;
        let ifs2 = self.ifs2.as_ref().map(load_ifs).transpose()?;
        let (ifs1, ifs2) = match (ifs1, ifs2, &q) {
            (Some(a), Some(b), _) => (Some(a), Some(b)),
            (Some(a), None, _) => (Some(a.clone()), Some(a)),
            (None, Some(_), _) => return Err(usage("--ifs2 needs --ifs1")),
            (None, None, Some(q)) => match q.as_rational() {
                Some(_) => {
                    let kq = qexp::kq_ifs(q)?;
                    (Some(kq.clone()), Some(kq))
                }
                None => (None, None),
            },
            (None, None, None) => (None, None),
        };
        let f = self.f.as_deref().map(str::parse::<Expr>).transpose()?;
        let word = |w: &Option<String>| -> Result<CylinderWord, CliError> {
            Ok(w.as_deref().map(str::parse).transpose()?.unwrap_or_default())
        };
        let (word1, word2) = (word(&self.word1)?, word(&self.word2)?);
        let code = |c: &Option<String>| -> Result<Option<InfiniteCode>, CliError> {
            Ok(c.as_deref().map(str::parse).transpose()?)
        };
        let (code1, code2) = (code(&self.code1)?, code(&self.code2)?);
        let scalar = |s: &Option<String>| -> Result<Option<Rational>, CliError> {
            s.as_deref()
                .map(|t| t.parse::<Rational>().map_err(|e| usage(format!("coordinate {t:?}: {e}"))))
                .transpose()
        };
        let (x, y) = (scalar(&self.x)?, scalar(&self.y)?);

        let codes = match (self.point_corner, code1, code2) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(usage("--point-corner and --code1/--code2 are exclusive"))
            }
            (Some(corner), None, None) => {
                let (a, b) = ifs1.as_ref().zip(ifs2.as_ref()).ok_or_else(|| usage("--point-corner needs an IFS"))?;
                let pick = |k: &HomogeneousIfs, right: bool| if right { k.right_code() } else { k.left_code() };
                let (r1, r2) = match corner {
                    Corner::LeftLeft => (false, false),
                    Corner::LeftRight => (false, true),
                    Corner::RightLeft => (true, false),
                    Corner::RightRight => (true, true),
                };
                Some((pick(a, r1), pick(b, r2)))
            }
            (None, Some(a), Some(b)) => Some((a, b)),
            (None, None, None) => None,
            _ => return Err(usage("--code1 and --code2 go together")),
        };
        let point = match (&codes, x, y) {
            (Some((a, b)), None, None) => Some((Point::Code(a.clone()), Point::Code(b.clone()))),
            (None, Some(x), Some(y)) => Some((Point::Scalar(x), Point::Scalar(y))),
            (None, None, None) => None,
            (Some(_), _, _) => return Err(usage("give the point either as codes or as --x/--y")),
            _ => return Err(usage("--x and --y go together")),
        };
        let seq = self
            .seq
            .as_deref()
            .map(|s| s.parse::<DigitSeq>().map_err(|e| usage(format!("sequence {s:?}: {e}"))))
            .transpose()?;
        let cert = self.cert.as_deref().map(load_certificate).transpose()?;
        let budget = match (self.budget_flag, std::env::var(BUDGET_ENV)) {
            (Some(b), _) => b,
            (None, Ok(v)) => v.trim().parse().map_err(|_| usage(format!("{BUDGET_ENV}={v:?} is not an integer")))?,
            (None, Err(_)) => self.budget.unwrap_or(DEFAULT_RECT_BUDGET),
        };
        if let (Some(a), Some(b)) = (self.rank_from, self.rank_to) {
            if a > b {
                return Err(usage(format!("empty rank range {a}..={b}")));
            }
        }
        Ok(Settings {
            ifs1,
            ifs2,
            q,
            f,
            word1,
            word2,
            codes,
            point,
            depth: self.depth,
            max_depth: self.max_depth,
            rank_from: self.rank_from,
            rank_to: self.rank_to,
            digits: self.digits,
            budget,
            seq,
            cert,
            out: self.out.clone(),
            csv: self.csv.clone(),
            svg: self.svg.clone(),
            pretty: self.pretty.unwrap_or(false),
        })
    }
}

/// A validated [`RunConfig`].
#[derive(Clone, Debug)]
pub struct Settings {
    pub ifs1: Option<HomogeneousIfs>,
    pub ifs2: Option<HomogeneousIfs>,
    pub q: Option<Base>,
    pub f: Option<Expr>,
    pub word1: CylinderWord,
    pub word2: CylinderWord,
    pub codes: Option<(InfiniteCode, InfiniteCode)>,
    pub point: Option<(Point, Point)>,
    pub depth: Option<usize>,
    pub max_depth: Option<usize>,
    pub rank_from: Option<usize>,
    pub rank_to: Option<usize>,
    pub digits: Option<usize>,
    pub budget: u64,
    pub seq: Option<DigitSeq>,
    pub cert: Option<Certificate>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub pretty: bool,
}

impl Settings {
    fn pair(&self) -> Result<(&HomogeneousIfs, &HomogeneousIfs), CliError> {
        self.ifs1.as_ref().zip(self.ifs2.as_ref()).ok_or_else(|| usage("missing --ifs1 (or a rational --q)"))
    }

    fn single(&self) -> Result<&HomogeneousIfs, CliError> {
        self.ifs1.as_ref().ok_or_else(|| usage("missing --ifs (or a rational --q)"))
    }

    fn f(&self) -> Result<&Expr, CliError> {
        self.f.as_ref().ok_or_else(|| usage("missing --f"))
    }

    fn q(&self) -> Result<&Base, CliError> {
        self.q.as_ref().ok_or_else(|| usage("missing --q"))
    }

    fn cert(&self) -> Result<&Certificate, CliError> {
        self.cert.as_ref().ok_or_else(|| usage("missing --cert"))
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// `cantor`, `kq:<q>`, inline JSON, or a path to a JSON file.
pub fn load_ifs(src: &IfsSource) -> Result<HomogeneousIfs, CliError> {
    let json_err = |what: &str, e: serde_json::Error| CliError::Json { what: format!("IFS {what}"), msg: e.to_string() };
    match src {
        IfsSource::Inline(v) => serde_json::from_value(v.clone()).map_err(|e| json_err("object", e)),
        IfsSource::Named(s) => {
            let s = s.trim();
            if s == "cantor" {
                Ok(HomogeneousIfs::cantor())
            } else if let Some(q) = s.strip_prefix("kq:") {
                Ok(qexp::kq_ifs(&q.parse()?)?)
            } else if s.starts_with('{') {
                serde_json::from_str(s).map_err(|e| json_err("inline JSON", e))
            } else {
                serde_json::from_str(&read_text(Path::new(s))?).map_err(|e| json_err(s, e))
            }
        }
    }
}

/// A certificate file, inline JSON, or `-` for stdin.
pub fn load_certificate(src: &str) -> Result<Certificate, CliError> {
    let text = if src == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf).map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
        buf
    } else if src.trim_start().starts_with('{') {
        src.to_string()
    } else {
        read_text(Path::new(src))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Json { what: "certificate".into(), msg: e.to_string() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VerbKind {
    Gaps,
    Thickness,
    Check,
    CheckCor2,
    Certify,
    AutoCertify,
    Replay,
    Cover,
    OracleCheck,
    Boxdim,
    Qg,
    Univoque,
    Kq,
    UqCover,
    UqCertify,
    Qstar,
}

/// What a verb produced.
#[derive(Debug, Default)]
struct Outcome {
    report: Value,
    established: bool,
    csv: Option<String>,
    svg: Option<String>,
    certificate: Option<Certificate>,
}

impl Outcome {
    fn new(report: impl serde::Serialize, established: bool) -> Outcome {
        Outcome { report: to_json(&report), established, ..Outcome::default() }
    }

    fn failed(reason: impl std::fmt::Display) -> Outcome {
        Outcome::new(json!({ "established": false, "reason": reason.to_string() }), false)
    }
}

fn to_json(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Input problems stay errors; failed conditions become a report.
fn certification(result: Result<Certificate, CertifyError>) -> Result<Outcome, CliError> {
    match result {
        Ok(cert) => Ok(Outcome { certificate: Some(cert.clone()), ..Outcome::new(&cert, true) }),
        Err(e @ (CertifyError::Ifs(_) | CertifyError::RatioMismatch(..))) => Err(e.into()),
        Err(e) => Ok(Outcome::failed(e)),
    }
}

fn stack_rows<E>(ranks: impl Iterator<Item = usize>, cover: impl Fn(usize) -> Result<IntervalUnion, E>) -> Result<String, E> {
    let rows = ranks.map(|k| Ok((format!("k={k}"), cover(k)?))).collect::<Result<Vec<_>, E>>()?;
    Ok(empirics::union_stack_svg(&rows))
}

fn run_verb(kind: VerbKind, s: &Settings) -> Result<Outcome, CliError> {
    Ok(match kind {
        VerbKind::Gaps => {
            let k = s.single()?;
            let profile = k.gap_profile();
            let gaps = empirics::gap_report(&k.level_cover(1, s.budget)?, &k.convex_hull());
            let mut out = Outcome::new(json!({ "gap_profile": profile, "gaps": gaps }), true);
            out.csv = Some(IntervalUnion::from_intervals(gaps).to_csv());
            out
        }
        VerbKind::Thickness => {
            let k = s.single()?;
            Outcome::new(
                json!({ "thickness_lb": k.thickness_lower_bound(), "kappa": k.kappa(), "hull": k.convex_hull() }),
                true,
            )
        }
        VerbKind::Check => {
            let (k1, k2) = s.pair()?;
            let (p1, p2) = s.point.as_ref().ok_or_else(|| usage("missing point (--point-corner, --code1/2 or --x/--y)"))?;
            match certifier::check_pointwise(k1, k2, s.f()?, (p1, p2), s.depth.unwrap_or(8)) {
                Ok(r) => Outcome::new(&r, r.holds == Verdict::Yes),
                Err(e @ CertifyError::Expr(_)) => Outcome::failed(e),
                Err(e) => return Err(e.into()),
            }
        }
        VerbKind::CheckCor2 => {
            let (k1, k2) = s.pair()?;
            let r = certifier::check_global_conditions(k1, k2);
            Outcome::new(&r, r.holds)
        }
        VerbKind::Certify => {
            let (k1, k2) = s.pair()?;
            certification(certifier::certify_rectangle(k1, k2, s.f()?, &s.word1, &s.word2))?
        }
        VerbKind::AutoCertify => {
            let (k1, k2) = s.pair()?;
            let (c1, c2) = s.codes.as_ref().ok_or_else(|| usage("missing codes (--point-corner or --code1/--code2)"))?;
            certification(certifier::auto_certify(k1, k2, s.f()?, (c1, c2), s.max_depth.unwrap_or(12)))?
        }
        VerbKind::Replay => {
            let r = certifier::replay(s.cert()?);
            Outcome::new(&r, r.valid)
        }
        VerbKind::Cover => {
            let (k1, k2) = s.pair()?;
            let f = s.f()?;
            let base = s.word1.len().max(s.word2.len());
            let rank = s.depth.unwrap_or(base + 6);
            let cover = |k| empirics::image_cover(k1, k2, f, (&s.word1, &s.word2), k, s.budget);
            let u = cover(rank)?;
            let gaps = u.hull().map(|h| empirics::gap_report(&u, &h)).unwrap_or_default();
            let mut out = Outcome::new(
                json!({
                    "rank": rank,
                    "components": u.len(),
                    "hull": u.hull(),
                    "total_length": u.total_length(),
                    "gaps": gaps,
                    "intervals": u,
                }),
                true,
            );
            out.csv = Some(u.to_csv());
            if s.svg.is_some() {
                out.svg = Some(stack_rows(base..=rank.max(base), cover)?);
            }
            out
        }
        VerbKind::OracleCheck => {
            let r = empirics::oracle_check(s.cert()?, s.depth.unwrap_or(8), s.budget)?;
            Outcome::new(&r, r.contained)
        }
        VerbKind::Boxdim => {
            let k = s.single()?;
            let ranks = s.rank_from.unwrap_or(4)..=s.rank_to.unwrap_or(10);
            let covers = ranks.clone().map(|r| Ok((r, k.level_cover(r, s.budget)?))).collect::<Result<Vec<_>, IfsError>>()?;
            let similarity = (k.len() as f64).ln() / -k.ratio().to_f64().ln();
            match empirics::box_dim_estimate(&covers, k.ratio(), &k.hull_length()) {
                Ok(est) => {
                    let mut out = Outcome::new(json!({ "estimate": est, "similarity_dimension": similarity }), true);
                    out.csv = Some(empirics::counts_csv(&est));
                    if s.svg.is_some() {
                        out.svg = Some(stack_rows(ranks, |r| k.level_cover(r, s.budget))?);
                    }
                    out
                }
                Err(e @ EmpiricsError::DegenerateFit(_)) => Outcome::failed(e),
                Err(e) => return Err(e.into()),
            }
        }
        VerbKind::Qg => {
            let q = s.q()?;
            let mut qg = QuasiGreedy::new(q, DEFAULT_BUDGET);
            let eta = qg.run().ok();
            let prefix = qg.prefix_text(s.digits.unwrap_or(32));
            Outcome::new(json!({ "q": q, "eta": eta, "prefix": prefix }), true)
        }
        VerbKind::Univoque => {
            let q = s.q()?;
            let seq = s.seq.as_ref().ok_or_else(|| usage("missing --seq"))?;
            let d = qexp::is_univoque_seq(seq, &mut QuasiGreedy::new(q, DEFAULT_BUDGET));
            Outcome::new(json!({ "q": q, "seq": seq, "univoque": d }), d == Decision::Yes)
        }
        VerbKind::Kq => {
            let q = s.q()?;
            let report = qexp::verify_kq_in_uq(q, DEFAULT_BUDGET);
            let established = report.verdict == Decision::Yes;
            let mut v = to_json(&report);
            if q.as_rational().is_some() {
                let k = qexp::kq_ifs(q)?;
                let width = k.hull_length();
                v["ifs"] = to_json(&k);
                v["hull"] = to_json(&k.convex_hull());
                v["kappa"] = to_json(&k.kappa());
                v["kappa_over_width"] = to_json(&(k.kappa() / width));
            }
            Outcome::new(v, established)
        }
        VerbKind::UqCover => {
            let q = s.q()?;
            let depth = s.depth.unwrap_or(8);
            let u = empirics::uq_cover(q, depth, s.budget)?;
            let mut out = Outcome::new(
                json!({
                    "q": q,
                    "depth": depth,
                    "components": u.len(),
                    "hull": u.hull(),
                    "total_length": u.total_length(),
                }),
                true,
            );
            out.csv = Some(u.to_csv());
            if s.svg.is_some() {
                out.svg = Some(stack_rows(0..=depth, |d| empirics::uq_cover(q, d, s.budget))?);
            }
            out
        }
        VerbKind::UqCertify => {
            match qexp::certify_uq_arith(s.q()?, s.f()?, s.max_depth.unwrap_or(12)) {
                Ok(c) => Outcome { certificate: Some(c.certificate.clone()), ..Outcome::new(&c, true) },
                Err(e @ (QexpError::NotContained { .. } | QexpError::Certify(_))) => Outcome::failed(e),
                Err(e) => return Err(e.into()),
            }
        }
        VerbKind::Qstar => Outcome::new(qexp::qstar(), true),
    })
}

/// One `path  value` line per leaf.
fn pretty_table(v: &Value) -> String {
    fn walk(v: &Value, path: &str, rows: &mut Vec<(String, String)>) {
        let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
        match v {
            Value::Object(m) if !m.is_empty() => m.iter().for_each(|(k, x)| walk(x, &join(k), rows)),
            Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
                a.iter().enumerate().for_each(|(i, x)| walk(x, &join(&i.to_string()), rows))
            }
            Value::String(s) => rows.push((path.to_string(), s.clone())),
            other => rows.push((path.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk(v, "", &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, x) in rows {
        let _ = writeln!(s, "{k:<width$}  {x}");
    }
    s
}

fn write_artifact(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if cli.pretty {
        config.pretty = Some(true);
    }
    config.budget_flag = cli.budget;
    let kind = config.apply_verb(cli.verb);
    let settings = config.validate()?;
    let outcome = run_verb(kind, &settings)?;

    if let (Some(path), Some(text)) = (&settings.csv, &outcome.csv) {
        write_artifact(path, text)?;
    }
    if let (Some(path), Some(text)) = (&settings.svg, &outcome.svg) {
        write_artifact(path, text)?;
    }
    if let (Some(path), Some(cert)) = (&settings.out, &outcome.certificate) {
        write_artifact(path, &serde_json::to_string_pretty(cert).expect("certificate serializes"))?;
    }
    if settings.pretty {
        print!("{}", pretty_table(&outcome.report));
    } else {
        println!("{}", outcome.report);
    }
    Ok(if outcome.established { EXIT_OK } else { EXIT_NOT_ESTABLISHED })
}

/// Runs the command line and returns the process exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> Result<RunConfig, serde_json::Error> {
        serde_json::from_str(text)
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(config(r#"{"ifs1":"cantor","f":"x+y"}"#).is_ok());
        assert!(config(r#"{"ifs1":"cantor","fn":"x+y"}"#).is_err());
        let inline = config(r#"{"ifs":{"ratio":"1/3","translations":["0","2/3"]}}"#).unwrap();
        assert_eq!(inline.validate().unwrap().ifs1, Some(HomogeneousIfs::cantor()));
    }

    #[test]
    fn validation_catches_bad_entries() {
        let bad = [
            r#"{"f":"x+"}"#,
            r#"{"ifs1":"kq:3"}"#,
            r#"{"word1":"2a"}"#,
            r#"{"ifs1":"cantor","code1":"2"}"#,
            r#"{"x":"1/2"}"#,
            r#"{"ifs1":"/nonexistent/file.json"}"#,
            r#"{"rank_from":5,"rank_to":4}"#,
        ];
        for text in bad {
            assert!(config(text).unwrap().validate().is_err(), "{text}");
        }
    }

    #[test]
    fn corner_codes_follow_the_ifs() {
        let c = config(r#"{"q":"19/10","point_corner":"left-right"}"#).unwrap().validate().unwrap();
        let (a, b) = c.codes.unwrap();
        assert_eq!((a.to_string(), b.to_string()), ("(1)".to_string(), "(2)".to_string()));
        assert!(c.ifs1.is_some());
    }

    #[test]
    fn pretty_table_flattens() {
        let t = pretty_table(&json!({ "a": { "b": "1/3" }, "c": [1, 2] }));
        assert!(t.contains("a.b  1/3"));
        assert!(t.contains("c    [1,2]"));
    }
}
