//! Batch front end for the `braidq` engine.
//!
//! Exit codes: 0 when every requested check holds, 2 when a check is
//! unverified (or a condition fails), 1 for input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use braidq::algebra::{parse_expr, Index};
use braidq::fusion::{check_fusion_ring, dimension, dims_table, fuse, Irrep};
use braidq::graphalg::{
    check_dagger, check_gauge_equivariance, kms_table, DaggerOutcome, GraphData,
};
use braidq::matrix::Matrix;
use braidq::simplify::{verify_identity_in, SuiteReport};
use braidq::uqf::{
    build_bosonization, build_uqf, cuntz_action, derive_action_constraints, derive_boso_coproduct,
    graph_universal_presentation, solve_admissible, verify_coproduct, verify_fundamental_rep,
    verify_kms_preservation, verify_quotient, AdmissibilityDatum,
};
use braidq::{LegLayout, RelationSet, Scalar, ZetaSpec};
use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

#[derive(Parser, Debug)]
#[command(
    name = "braidq",
    version,
    about = "Exact verification for braided free unitary quantum groups"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve for admissible degree data (d', d0) given F and d.
    Admissible {
        #[arg(long = "F", value_name = "FILE")]
        f: PathBuf,
        #[arg(long, allow_hyphen_values = true, value_name = "LIST")]
        d: Option<String>,
    },
    /// Build the presentation of C(U+_zeta(F)).
    Presentation {
        #[command(flatten)]
        mat: MatrixArgs,
        #[arg(long)]
        dump: bool,
    },
    /// Bosonization presentation and its derived coproduct.
    Bosonize {
        #[command(flatten)]
        mat: MatrixArgs,
        #[arg(long, default_value = "formal")]
        zeta: ZetaSpec,
        #[arg(long)]
        trace: bool,
    },
    /// Condition (†), the critical KMS state and its values on paths.
    Kms {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        len: usize,
        /// Also print the graph presentation and its checks.
        #[arg(long)]
        presentation: bool,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        prop: Prop,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        mat: MatrixArgs,
        #[arg(long, default_value_t = 3)]
        len: usize,
        #[arg(long, default_value = "formal")]
        zeta: ZetaSpec,
        #[arg(long)]
        trace: bool,
        /// Left side for `--prop identity`.
        #[arg(long, allow_hyphen_values = true)]
        lhs: Option<String>,
        /// Right side for `--prop identity`.
        #[arg(long, allow_hyphen_values = true)]
        rhs: Option<String>,
        /// Number of braided legs for `--prop identity`.
        #[arg(long, default_value_t = 1)]
        legs: usize,
    },
    /// Decompose a tensor product of two irreps.
    Fusion {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "check")]
        left: Option<String>,
        #[arg(long, allow_hyphen_values = true, required_unless_present = "check")]
        right: Option<String>,
        #[arg(long, default_value_t = 2)]
        n: u64,
        /// Run the exhaustive ring checks up to this word length instead.
        #[arg(long)]
        check: Option<usize>,
    },
    /// Dimensions of all irreps up to a word length.
    Dims {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        maxlen: usize,
    },
}

#[derive(clap::Args, Debug, Clone)]
pub struct MatrixArgs {
    /// Matrix file: one row per line, entries like `3/2` or `sqrt(2)*1/3`.
    #[arg(long = "F", value_name = "FILE", conflicts_with = "fdiag")]
    pub f: Option<PathBuf>,
    /// Diagonal F given inline, e.g. `1,2,sqrt(3)`.
    #[arg(long, allow_hyphen_values = true, value_name = "LIST")]
    pub fdiag: Option<String>,
    /// Degree tuple, e.g. `0,1` or `-1,2`.
    #[arg(long, allow_hyphen_values = true, value_name = "LIST")]
    pub d: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Prop {
    Coproduct,
    Fundamental,
    CuntzAction,
    KmsPreserve,
    Matricial,
    Quotient,
    Identity,
}

/// Input problems; reported with exit code 1.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Res<T> = Result<T, InputError>;

pub fn parse_list(s: &str) -> Res<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| InputError(format!("bad integer `{}` in list `{s}`", t.trim())))
        })
        .collect()
}

pub fn parse_matrix(text: &str) -> Res<Matrix<Scalar>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<Scalar>()
                    .map_err(|e| InputError(format!("entry `{t}`: {e}")))
            })
            .collect::<Res<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(InputError("matrix file is empty".into()));
    }
    Ok(Matrix::from_rows(rows)?)
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

impl MatrixArgs {
    /// `F` and `d`; missing `F` means the identity, missing `d` means zeros.
    fn resolve(&self, n: Option<usize>) -> Res<(Matrix<Scalar>, Vec<i64>)> {
        let d = self.d.as_deref().map(parse_list).transpose()?;
        let f = match (&self.f, &self.fdiag) {
            (Some(p), _) => Some(parse_matrix(&read(p)?)?),
            (None, Some(list)) => {
                let entries = list
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<Scalar>()
                            .map_err(|e| InputError(format!("`{t}`: {e}")))
                    })
                    .collect::<Res<Vec<_>>>()?;
                Some(Matrix::diagonal(&entries))
            }
            (None, None) => None,
        };
        let size = n
            .or(f.as_ref().map(Matrix::rows))
            .or(d.as_ref().map(Vec::len))
            .ok_or_else(|| InputError("give --n, --d or a matrix".into()))?;
        if size == 0 {
            return Err(InputError("n must be at least 1".into()));
        }
        let d = d.unwrap_or_else(|| vec![0; size]);
        let f = f.unwrap_or_else(|| Matrix::identity(size));
        if d.len() != size || f.rows() != size || f.cols() != size {
            return Err(InputError(format!(
                "sizes disagree: n = {size}, d has {} entries, F is {}x{}",
                d.len(),
                f.rows(),
                f.cols()
            )));
        }
        Ok((f, d))
    }
}

/// `F̃ = F*F` for a diagonal `F`, which must have rational positive squares.
fn ftilde_of(f: &Matrix<Scalar>) -> Res<Vec<BigRational>> {
    if !f.is_diagonal() {
        return Err(InputError("this property needs a diagonal F".into()));
    }
    (0..f.rows())
        .map(|i| {
            let x = f.get(i, i);
            (&x.star() * x)
                .as_rational()
                .ok_or_else(|| InputError(format!("|F[{0},{0}]|^2 is not rational", i + 1)))
        })
        .collect()
}

fn emit(out: &mut dyn Write, s: &str) -> Res<()> {
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn report_code(rep: &SuiteReport) -> i32 {
    if rep.is_verified() {
        0
    } else {
        2
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Res<i32> {
    match cmd {
        Command::Admissible { f, d } => {
            let f = parse_matrix(&read(f)?)?;
            let d = match d {
                Some(s) => parse_list(s)?,
                None => vec![0; f.rows()],
            };
            match solve_admissible(&f, &d) {
                Ok(a) => {
                    emit(out, &format_datum(&a))?;
                    Ok(0)
                }
                Err(braidq::uqf::UqfError::NoSolution(why)) => {
                    emit(out, &format!("NoSolution: {why}\n"))?;
                    Ok(2)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Presentation { mat, dump } => {
            let (f, d) = mat.resolve(None)?;
            let datum = solve_admissible(&f, &d)?;
            let pres = build_uqf(&datum)?;
            if *dump {
                emit(out, &pres.presentation.dump())?;
            } else {
                emit(out, &format_datum(&datum))?;
                let count: usize = pres
                    .presentation
                    .relations
                    .iter()
                    .map(|r| r.expand().len())
                    .sum();
                emit(
                    out,
                    &format!(
                        "generators: {}\nrelations: {count}\n",
                        pres.presentation.generators.len()
                    ),
                )?;
            }
            Ok(0)
        }
        Command::Bosonize { mat, zeta, trace } => {
            let (f, d) = mat.resolve(None)?;
            let datum = solve_admissible(&f, &d)?;
            let boso = build_bosonization(&datum)?;
            emit(out, &boso.dump())?;
            let rep = derive_boso_coproduct(&datum, *zeta)?;
            emit(out, &rep.render(*trace))?;
            Ok(report_code(&rep))
        }
        Command::Kms {
            graph,
            len,
            presentation,
        } => run_kms(&read(graph)?, *len, *presentation, out),
        Command::Verify {
            prop,
            n,
            mat,
            len,
            zeta,
            trace,
            lhs,
            rhs,
            legs,
        } => {
            let (f, d) = mat.resolve(*n)?;
            let rep = run_verify(
                *prop,
                &f,
                &d,
                *len,
                *zeta,
                lhs.as_deref(),
                rhs.as_deref(),
                *legs,
            )?;
            emit(
                out,
                &format!(
                    "prop {} n={} d={} zeta={zeta}\n",
                    prop_name(*prop),
                    d.len(),
                    braidq::algebra::join_ints(&d)
                ),
            )?;
            emit(out, &rep.render(*trace))?;
            Ok(report_code(&rep))
        }
        Command::Fusion {
            left,
            right,
            n,
            check,
        } => {
            if let Some(max_len) = check {
                let rep = check_fusion_ring(*n, *max_len);
                emit(out, &rep.render(false))?;
                return Ok(report_code(&rep));
            }
            let (Some(left), Some(right)) = (left, right) else {
                return Err(InputError("fusion needs --left and --right".into()));
            };
            let r: Irrep = left.parse()?;
            let s: Irrep = right.parse()?;
            let res = fuse(&r, &s);
            emit(out, &res.to_string())?;
            let lhs = dimension(&r.w, *n) * dimension(&s.w, *n);
            let parts: Vec<String> = res
                .iter()
                .map(|(t, &m)| {
                    let dim = dimension(&t.w, *n);
                    if m == 1 {
                        dim.to_string()
                    } else {
                        format!("{m}*{dim}")
                    }
                })
                .collect();
            let ok = res.dimension(*n) == lhs;
            emit(out, &format!("dims: {lhs} = {}\n", parts.join("+")))?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::Dims { n, maxlen } => {
            if *n == 0 {
                return Err(InputError("n must be at least 1".into()));
            }
            emit(out, &dims_table(*n, *maxlen))?;
            Ok(0)
        }
    }
}

fn prop_name(p: Prop) -> &'static str {
    match p {
        Prop::Coproduct => "coproduct",
        Prop::Fundamental => "fundamental",
        Prop::CuntzAction => "cuntz-action",
        Prop::KmsPreserve => "kms-preserve",
        Prop::Matricial => "matricial",
        Prop::Quotient => "quotient",
        Prop::Identity => "identity",
    }
}

fn format_datum(a: &AdmissibilityDatum) -> String {
    use braidq::algebra::join_ints;
    format!(
        "d = {}\nd' = {}\nd0 = {}\n",
        join_ints(&a.d),
        join_ints(&a.d_prime),
        a.d0
    )
}

/// Runs one verification suite.
#[allow(clippy::too_many_arguments)]
pub fn run_verify(
    prop: Prop,
    f: &Matrix<Scalar>,
    d: &[i64],
    len: usize,
    zeta: ZetaSpec,
    lhs: Option<&str>,
    rhs: Option<&str>,
    legs: usize,
) -> Res<SuiteReport> {
    let n = d.len();
    Ok(match prop {
        Prop::Coproduct => verify_coproduct(&build_uqf(&solve_admissible(f, d)?)?, zeta),
        Prop::Fundamental => verify_fundamental_rep(&solve_admissible(f, d)?, zeta)?,
        Prop::CuntzAction => cuntz_action(&build_uqf(&solve_admissible(f, d)?)?, zeta)?.1,
        Prop::KmsPreserve => {
            if !f.is_identity() {
                return Err(InputError("kms-preserve is stated for F = I".into()));
            }
            if len == 0 {
                return Err(InputError("--len must be at least 1".into()));
            }
            verify_kms_preservation(n, d, len, zeta)?
        }
        Prop::Matricial => derive_action_constraints(&ftilde_of(f)?, d, zeta)?.report,
        Prop::Quotient => verify_quotient(&ftilde_of(f)?, d, zeta)?,
        Prop::Identity => {
            let (Some(l), Some(r)) = (lhs, rhs) else {
                return Err(InputError("--prop identity needs --lhs and --rhs".into()));
            };
            if legs == 0 {
                return Err(InputError("--legs must be at least 1".into()));
            }
            let pres = build_uqf(&solve_admissible(f, d)?)?;
            let mut rels: RelationSet = pres.relations.clone();
            rels.add_cuntz_family("S", d)?;
            let lookup = |name: &str, idx: &Index| -> Option<i64> {
                match (name, idx) {
                    ("u", Index::Two(i, j)) => {
                        let (i, j) = (*i as usize, *j as usize);
                        let ok = (1..=n).contains(&i) && (1..=n).contains(&j);
                        ok.then(|| d[j - 1] - d[i - 1])
                    }
                    ("S", Index::One(i)) => d.get((*i as usize).checked_sub(1)?).copied(),
                    _ => None,
                }
            };
            let lay = LegLayout::braided(legs);
            let le = parse_expr(l, &lookup)?.to_legged(&lay)?;
            let re = parse_expr(r, &lookup)?.to_legged(&lay)?;
            let mut rep = SuiteReport::new("identity");
            rep.push(
                format!("{l} = {r}"),
                verify_identity_in(&le, &re, &rels, zeta),
            );
            rep
        }
    })
}

fn run_kms(text: &str, len: usize, presentation: bool, out: &mut dyn Write) -> Res<i32> {
    let g = GraphData::parse(text)?;
    let k = match check_dagger(&g) {
        DaggerOutcome::Satisfied(k) => k,
        DaggerOutcome::NotSatisfied(why) => {
            emit(out, &format!("condition (†): not satisfied ({why})\n"))?;
            return Ok(2);
        }
    };
    let mode = if k.exact {
        "exact".to_string()
    } else {
        format!("float mode, residual {:.3e}", k.residual)
    };
    emit(out, &format!("condition (†): satisfied ({mode})\n"))?;
    emit(out, &format!("rho = {}\n", k.rho))?;
    let w: Vec<String> = k.weights.iter().map(|x| x.to_string()).collect();
    emit(out, &format!("weights = {}\n", w.join(",")))?;
    let mut code = 0;
    if k.exact {
        let mut samples = Vec::new();
        for l in 1..=len.max(1) {
            for a in g.paths(l) {
                samples.push((a.clone(), a));
            }
        }
        let rep = check_gauge_equivariance(&g, &k, &samples)?;
        emit(
            out,
            &format!(
                "gauge equivariance: {} ({} paths)\n",
                rep.verdict(),
                samples.len()
            ),
        )?;
        code = report_code(&rep);
    }
    if len > 0 {
        emit(out, &kms_table(&g, &k, len)?)?;
    }
    if presentation {
        let (p, rep) = graph_universal_presentation(&g, &k, ZetaSpec::Formal)?;
        emit(out, &p.dump())?;
        emit(out, &rep.render(false))?;
        code = code.max(report_code(&rep));
    }
    Ok(code)
}
