//! `hif4` command-line tool: quantize tensors, run the error sweep, check the
//! fixed-point dot products and dump decode tables.
//!
//! The binary is a thin wrapper over [`run`], which other crates can call to
//! drive a command in-process.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use hif4::bench::run_sweep;
use hif4::dot::{run_dot_check, DotFormat};
use hif4::scalar::ScalarFormat;
use hif4::tensor::Format;
use hif4::{Error, Pipeline, QuantizedTensor, TensorBuffer};

#[derive(Parser, Debug)]
#[command(
    name = "hif4",
    version,
    about = "HiF4, NVFP4 and MXFP4 quantization tools"
)]
struct Cli {
    /// Seed for every stochastic command.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output path; commands that print CSV fall back to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Element or scalar format, depending on the command.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Per-tensor scaling before the cast (nvfp4 only).
    #[arg(long, global = true)]
    pts: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quantize a BFPT tensor into a HIF4/NVF4/MXF4 container.
    Quantize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Decode a quantized container back to a binary32 BFPT tensor.
    Dequantize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// MSE of each format on Gaussian matrices with sigma = 0.01 * 2^x.
    Sweep {
        #[arg(long, default_value_t = 1024)]
        rows: usize,
        #[arg(long, default_value_t = 1024)]
        cols: usize,
        /// Inclusive range `lo..hi`.
        #[arg(long, default_value = "0..17")]
        x: String,
    },
    /// Compare the fixed-point dot product against the reference.
    DotCheck {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Dump every code of a scalar format as `code_hex,value`.
    Tables,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invariant(_) => 1,
        _ => 2,
    }
}

fn emit(cli: &Cli, stdout: &mut dyn Write, text: &str) -> hif4::Result<()> {
    match cli.out.as_deref() {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn require_out(out: Option<&Path>) -> hif4::Result<&Path> {
    out.ok_or_else(|| usage("--out is required"))
}

fn has_magic(path: &Path, magic: &[u8; 4]) -> hif4::Result<bool> {
    let bytes = fs::read(path)?;
    Ok(bytes.starts_with(magic))
}

fn parse_range(s: &str) -> hif4::Result<(i32, i32)> {
    let (lo, hi) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| usage(format!("--x expects lo..hi, got {s:?}")))?;
    let num = |t: &str| {
        t.trim()
            .parse::<i32>()
            .map_err(|_| usage(format!("bad --x bound {t:?}")))
    };
    Ok((num(lo)?, num(hi)?))
}

fn quantize(cli: &Cli, input: &Path) -> hif4::Result<()> {
    let out = require_out(cli.out.as_deref())?;
    let name = cli
        .format
        .as_deref()
        .ok_or_else(|| usage("--format is required"))?;
    let format = Format::parse(name).ok_or_else(|| usage(format!("unknown format {name:?}")))?;
    let pipeline = match (format, cli.pts) {
        (Format::Hif4, false) => Pipeline::Hif4,
        (Format::Nvfp4, false) => Pipeline::Nvfp4Direct,
        (Format::Nvfp4, true) => Pipeline::Nvfp4Pts,
        (Format::Mxfp4, false) => Pipeline::Mxfp4,
        (_, true) => return Err(usage("--pts is only valid with --format nvfp4")),
    };
    if !has_magic(input, b"BFPT")? && QuantizedTensor::read(input).is_ok() {
        return Err(usage("input is already a quantized container"));
    }
    let t = TensorBuffer::read(input)?;
    QuantizedTensor::quantize(&t, pipeline)?.write(out)
}

fn dequantize(cli: &Cli, input: &Path) -> hif4::Result<()> {
    let out = require_out(cli.out.as_deref())?;
    if has_magic(input, b"BFPT")? {
        return Err(usage("input is a BFPT tensor, not a quantized container"));
    }
    let q = QuantizedTensor::read(input)?;
    if let Some(name) = cli.format.as_deref() {
        let want = Format::parse(name).ok_or_else(|| usage(format!("unknown format {name:?}")))?;
        if want != q.format() {
            return Err(usage(format!(
                "--format {name} does not match a {:?} container",
                q.format()
            )));
        }
    }
    if cli.pts && q.pts().is_none() {
        return Err(usage("--pts given but the container has no PTS factor"));
    }
    q.dequantize().write(out)
}

fn sweep(cli: &Cli, stdout: &mut dyn Write, rows: usize, cols: usize, x: &str) -> hif4::Result<()> {
    if rows == 0 || cols == 0 {
        return Err(usage("--rows and --cols must be positive"));
    }
    let (lo, hi) = parse_range(x)?;
    let report = run_sweep(cli.seed, lo, hi, rows, cols)?;
    emit(cli, stdout, &report.to_csv())
}

fn dot_check(cli: &Cli, stdout: &mut dyn Write, trials: u64) -> hif4::Result<()> {
    let format = match cli
        .format
        .as_deref()
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("hif4") | None => DotFormat::Hif4,
        Some("nvfp4") => DotFormat::Nvfp4,
        Some(other) => {
            return Err(usage(format!(
                "dot-check supports hif4 and nvfp4, not {other:?}"
            )))
        }
    };
    if trials == 0 {
        return Err(usage("--trials must be positive"));
    }
    let summary = run_dot_check(format, trials, cli.seed);
    let name = if format == DotFormat::Hif4 {
        "hif4"
    } else {
        "nvfp4"
    };
    let text = format!(
        "# format={name} seed={}\n{}\n",
        cli.seed,
        summary.summary_line()
    );
    emit(cli, stdout, &text)?;
    if !summary.passed() {
        return Err(Error::Invariant(format!(
            "{} of {} dot products violated equivalence or width bounds",
            summary.violations,
            trials + 1
        )));
    }
    Ok(())
}

fn tables(cli: &Cli, stdout: &mut dyn Write) -> hif4::Result<()> {
    let name = cli
        .format
        .as_deref()
        .ok_or_else(|| usage("--format is required"))?;
    let format = ScalarFormat::parse(name)
        .ok_or_else(|| usage(format!("unknown scalar format {name:?}")))?;
    let width = (format.code_bits() / 4) as usize;
    let mut text = String::from("code_hex,value\n");
    for (code, value) in format.decode_table() {
        text.push_str(&format!("{code:0width$x},{value:?}\n"));
    }
    emit(cli, stdout, &text)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> hif4::Result<()> {
    match &cli.command {
        Command::Quantize { input } => quantize(cli, input),
        Command::Dequantize { input } => dequantize(cli, input),
        Command::Sweep { rows, cols, x } => sweep(cli, stdout, *rows, *cols, x),
        Command::DotCheck { trials } => dot_check(cli, stdout, *trials),
        Command::Tables => tables(cli, stdout),
    }
}

/// Parse `args` (program name first) and run the command. Normal output goes
/// to `stdout`, errors to standard error as `ERROR <code>: ...`. Returns the
/// exit code: 0 on success, 1 on a violated invariant, 2 on a usage error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("ERROR 2: {}", e.to_string().trim_end());
            return 2;
        }
        Err(e) => {
            // --help and --version
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("ERROR {code}: {e}");
            code
        }
    }
}
