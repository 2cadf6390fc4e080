//! The `gtssm` command line.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage or input
//! error, 3 group not solvable. Results go to stdout, diagnostics to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::compiler::{self, CompileError, CompileOptions};
use crate::dynamics::{self, AffineMap1D, NEUTRAL_TOLERANCE};
use crate::group::{FiniteGroup, GroupError};
use crate::s3;
use crate::ssm::{DcdSsm, FinitePrecisionConfig};
use crate::tasks;
use crate::verifier::{self, TrackingReport, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_SOLVABLE: i32 = 3;

/// Overrides the number of decimal digits kept per state component.
pub const PRECISION_ENV: &str = "GTSSM_PRECISION_DIGITS";

#[derive(Parser, Debug)]
#[command(name = "gtssm", version, about = "Compile finite solvable groups into diagonal state-space models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Order, commutativity and derived series of a group.
    GroupInfo {
        spec: String,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Compile a group into a model and write it as JSON.
    Synthesize {
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a model against running products of its group.
    Verify {
        #[arg(long)]
        model: PathBuf,
        /// Check every sequence up to this length.
        #[arg(long, conflicts_with = "random")]
        exhaustive: Option<usize>,
        /// Number of random sequences.
        #[arg(long, requires = "len")]
        random: Option<usize>,
        #[arg(long)]
        len: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Classify the affine map x -> λx + b.
    Classify {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        b: Complex64,
        #[arg(long, default_value_t = NEUTRAL_TOLERANCE)]
        tol: f64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Generate a word-problem dataset.
    GenData {
        #[arg(long)]
        group: String,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the S3 reference Cayley table and state decoding.
    S3Demo,
    /// Repeat a block of two neutral rotations with distinct centers.
    DivergenceDemo {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda1: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        c1: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda2: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        c2: Complex64,
        #[arg(long, default_value_t = 100)]
        repeats: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

/// `re,im` or a bare real.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let z = match s.split_once(',') {
        Some((re, im)) => Complex64::new(parse(re)?, parse(im)?),
        None => Complex64::new(parse(s)?, 0.0),
    };
    if z.is_finite() {
        Ok(z)
    } else {
        Err("value must be finite".into())
    }
}

fn precision_from_env() -> Result<FinitePrecisionConfig, String> {
    let base = FinitePrecisionConfig::default();
    match std::env::var(PRECISION_ENV) {
        Err(_) => Ok(base),
        Ok(v) => {
            let digits: u32 = v.trim().parse().map_err(|_| format!("{PRECISION_ENV}={v:?} is not an integer"))?;
            base.with_digits(digits).map_err(|e| format!("{PRECISION_ENV}: {e}"))
        }
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn json<T: Serialize>(&mut self, value: &T) -> std::io::Result<()> {
        writeln!(self.out, "{}", serde_json::to_string_pretty(value).expect("serializable"))
    }

    fn fail(&mut self, code: i32, msg: impl std::fmt::Display) -> i32 {
        let _ = writeln!(self.err, "gtssm: {msg}");
        code
    }
}

/// Runs the CLI on `argv` (including the program name).
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut io = Io { out, err };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(io.out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(io.err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(e) => io.fail(EXIT_USAGE, format!("i/o error: {e}")),
    }
}

fn parse_group(io: &mut Io, spec: &str) -> Result<FiniteGroup, i32> {
    FiniteGroup::parse(spec).map_err(|e| io.fail(EXIT_USAGE, format!("group {spec:?}: {e}")))
}

fn dispatch(command: Command, io: &mut Io) -> std::io::Result<i32> {
    macro_rules! tryc {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(code) => return Ok(code),
            }
        };
    }
    match command {
        Command::GroupInfo { spec, format } => {
            let g = tryc!(parse_group(io, &spec));
            group_info(io, &g, format)
        }
        Command::Synthesize { spec, out } => {
            let g = tryc!(parse_group(io, &spec));
            let precision = tryc!(precision_from_env().map_err(|e| io.fail(EXIT_USAGE, e)));
            let opts = CompileOptions { precision, ..Default::default() };
            match compiler::compile_with(&g, None, &opts) {
                Ok(model) => {
                    if let Err(e) = std::fs::write(&out, model.to_json()) {
                        return Ok(io.fail(EXIT_USAGE, format!("{}: {e}", out.display())));
                    }
                    writeln!(
                        io.out,
                        "wrote {} ({} layers, {} decoder states, pre-verified to length {})",
                        out.display(),
                        model.num_layers(),
                        model.decoder().len(),
                        opts.pre_verify_depth
                    )?;
                    Ok(EXIT_OK)
                }
                Err(e @ CompileError::NotSolvable { .. }) => Ok(io.fail(EXIT_NOT_SOLVABLE, e)),
                Err(e @ CompileError::PreVerification(_)) => Ok(io.fail(EXIT_FAIL, e)),
                Err(e) => Ok(io.fail(EXIT_USAGE, e)),
            }
        }
        Command::Verify { model, exhaustive, random, len, seed, format } => {
            let text = tryc!(std::fs::read_to_string(&model)
                .map_err(|e| io.fail(EXIT_USAGE, format!("{}: {e}", model.display()))));
            let mut m = tryc!(DcdSsm::from_json(&text).map_err(|e| io.fail(EXIT_USAGE, e)));
            if std::env::var_os(PRECISION_ENV).is_some() {
                let p = tryc!(precision_from_env().map_err(|e| io.fail(EXIT_USAGE, e)));
                let p = FinitePrecisionConfig { round_digits: p.round_digits, ..*m.precision() };
                m = tryc!(m.with_precision(p).map_err(|e| io.fail(EXIT_USAGE, e)));
            }
            let g = tryc!(parse_group(io, m.group_spec()));
            let result = match (exhaustive, random) {
                (_, Some(count)) => verifier::verify_random(&m, &g, count, len.unwrap_or(0), seed),
                (depth, None) => verifier::verify_exhaustive(&m, &g, depth.unwrap_or(compiler::PRE_VERIFY_DEPTH)),
            };
            let report = tryc!(result.map_err(|e| io.fail(EXIT_USAGE, e)));
            match format {
                Format::Json => io.json(&report)?,
                Format::Table => render_report(io, &report)?,
            }
            Ok(if report.verdict == Verdict::Pass { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Classify { lambda, b, tol, format } => {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Ok(io.fail(EXIT_USAGE, "tol must be a finite non-negative number"));
            }
            let m = AffineMap1D { lambda, b };
            let class = dynamics::classify(&m, tol);
            match format {
                Format::Json => io.json(&class)?,
                Format::Table => {
                    writeln!(io.out, "class   {:?}", class.kind)?;
                    match class.center {
                        Some(c) => writeln!(io.out, "center  {} {:+}i", c.re, c.im)?,
                        None => writeln!(io.out, "center  none")?,
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::GenData { group, count, len, seed, out } => {
            let g = tryc!(parse_group(io, &group));
            let (header, records) = tryc!(tasks::gen_dataset(&g, count, len, seed).map_err(|e| io.fail(EXIT_USAGE, e)));
            if let Err(e) = tasks::write_dataset(&out, &header, &records) {
                return Ok(io.fail(EXIT_USAGE, e));
            }
            writeln!(io.out, "wrote {count} records of length {len} to {}", out.display())?;
            Ok(EXIT_OK)
        }
        Command::S3Demo => s3_demo(io),
        Command::DivergenceDemo { lambda1, c1, lambda2, c2, repeats, format } => {
            let d = match verifier::divergence_demo(lambda1, c1, lambda2, c2, repeats) {
                Ok(d) => d,
                Err(e) => return Ok(io.fail(EXIT_FAIL, e)),
            };
            match format {
                Format::Json => io.json(&d)?,
                Format::Table => {
                    writeln!(io.out, "witness           α1={} α2={} (residual {:.3e})", d.witness.alpha1, d.witness.alpha2, d.witness.residual)?;
                    writeln!(io.out, "block length      {}", d.block_len)?;
                    writeln!(io.out, "block translation {:.12} {:+.12}i", d.block.b.re, d.block.b.im)?;
                    writeln!(io.out, "repeats           {}", d.repeats)?;
                    writeln!(io.out, "displacement      {:.12}", d.final_displacement())?;
                    writeln!(io.out, "monotone          {}", d.monotone)?;
                    let how = if d.crossing_projected { "projected" } else { "observed" };
                    writeln!(io.out, "inf crossing step {} ({how})", d.inf_crossing_step)?;
                }
            }
            Ok(EXIT_OK)
        }
    }
}

#[derive(Serialize)]
struct GroupInfo {
    spec: String,
    order: usize,
    abelian: bool,
    solvable: bool,
    derived_length: Option<usize>,
    /// Subgroup orders down the derived series, or the perfect residual.
    series_orders: Vec<usize>,
}

fn group_info(io: &mut Io, g: &FiniteGroup, format: Format) -> std::io::Result<i32> {
    let (solvable, series_orders, derived_length) = match g.derived_series() {
        Ok(s) => (true, s.chain().iter().map(|m| m.order()).collect(), Some(s.len())),
        Err(GroupError::NotSolvable { residual }) => (false, vec![g.order(), residual.order()], None),
        Err(e) => return Ok(io.fail(EXIT_USAGE, e)),
    };
    let info = GroupInfo {
        spec: g.spec().to_string(),
        order: g.order(),
        abelian: g.is_abelian(),
        solvable,
        derived_length,
        series_orders,
    };
    match format {
        Format::Json => io.json(&info)?,
        Format::Table => {
            writeln!(io.out, "group          {}", info.spec)?;
            writeln!(io.out, "order          {}", info.order)?;
            writeln!(io.out, "abelian        {}", info.abelian)?;
            match info.derived_length {
                Some(k) => writeln!(io.out, "derived length {k}")?,
                None => writeln!(io.out, "derived length not solvable")?,
            }
            let chain: Vec<String> = info.series_orders.iter().map(|o| o.to_string()).collect();
            let arrow = if solvable { " ⊵ " } else { " ⊵ … ⊵ " };
            writeln!(io.out, "series orders  {}", chain.join(arrow))?;
        }
    }
    Ok(if solvable { EXIT_OK } else { EXIT_NOT_SOLVABLE })
}

fn render_report(io: &mut Io, r: &TrackingReport) -> std::io::Result<()> {
    let verdict = match r.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "FAIL",
    };
    writeln!(io.out, "verdict             {verdict}")?;
    writeln!(io.out, "sequences checked   {}", r.sequences_checked)?;
    writeln!(io.out, "steps evaluated     {}", r.steps_evaluated)?;
    writeln!(io.out, "max modulus drift   {:.3e}", r.max_modulus_drift)?;
    writeln!(io.out, "max decode distance {:.3e}", r.max_decode_distance)?;
    if let Some(cx) = &r.first_counterexample {
        let decoded = cx.decoded.map_or("⊥".to_string(), |d| d.to_string());
        writeln!(
            io.out,
            "counterexample      {:?} step {} expected {} decoded {}",
            cx.sequence, cx.step, cx.expected, decoded
        )?;
    }
    Ok(())
}

fn s3_demo(io: &mut Io) -> std::io::Result<i32> {
    let g = s3::s3();
    let table = s3::reproduce_cayley();
    let published = s3::published_cayley();
    writeln!(io.out, "Cayley table from the two-automaton cascade (row applied first):")?;
    write!(io.out, "{:>6} |", "⊙")?;
    for b in g.elements() {
        write!(io.out, "{:>6}", g.label(b))?;
    }
    writeln!(io.out)?;
    let mut differ = 0;
    for a in g.elements() {
        write!(io.out, "{:>6} |", g.label(a))?;
        for b in g.elements() {
            let x = table[a.index()][b.index()];
            let mark = if x == published[a.index()][b.index()] { ' ' } else { '*' };
            differ += usize::from(mark == '*');
            write!(io.out, "{:>5}{mark}", g.label(x))?;
        }
        writeln!(io.out)?;
    }
    writeln!(io.out, "{differ} entries (*) differ from the tabulated products, which are not associative.")?;
    writeln!(io.out)?;
    writeln!(io.out, "Automaton states:")?;
    for q1 in [1i8, -1] {
        for p in [0i32, 4, 2] {
            let q2 = s3::sixth_turn(p);
            let st = s3::CascadeState::from_complex(Complex64::new(q1 as f64, 0.0), q2, 1e-12)
                .expect("cube roots are automaton states");
            let x = s3::cascade_decode(st);
            let enc = s3::encode_s3(x);
            writeln!(
                io.out,
                "  ({:>2}, exp({:>2}·2πi/6))  ->  {:<5}  α={} β={}",
                q1,
                p,
                g.label(x),
                enc.alpha(),
                enc.beta()
            )?;
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("gtssm").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("1,-2.5").unwrap(), Complex64::new(1.0, -2.5));
        assert_eq!(parse_complex("-1").unwrap(), Complex64::new(-1.0, 0.0));
        assert!(parse_complex("x").is_err());
        assert!(parse_complex("inf,0").is_err());
    }

    #[test]
    fn group_info_codes() {
        let (code, out, _) = call(&["group-info", "symmetric:3"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("order          6"));
        assert!(out.contains("derived length 2"));
        let (code, out, _) = call(&["group-info", "alternating:5"]);
        assert_eq!(code, EXIT_NOT_SOLVABLE);
        assert!(out.contains("not solvable"));
        assert_eq!(call(&["group-info", "nope:3"]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn classify_output() {
        let (code, out, _) = call(&["classify", "--lambda", "0.5,0", "--b", "0,0", "--format", "json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["kind"], "Contraction");
    }

    #[test]
    fn demos_run() {
        let (code, out, _) = call(&["s3-demo"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("6 entries"));
        let (code, out, _) = call(&[
            "divergence-demo", "--lambda1", "-1", "--c1", "0", "--lambda2", "-1", "--c2", "1", "--repeats", "5",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("α1=1 α2=1"));
    }
}
