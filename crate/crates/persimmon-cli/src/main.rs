//! Command-line front end: barcodes, Wasserstein distances, matrix
//! reduction. Exit codes: 0 ok, 1 usage, 2 input error, 3 capacity error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use persimmon_core::diagram::{read_diagram, write_diagram};
use persimmon_core::metric::{load_metric_input, InputFormat};
use persimmon_core::reduction::{
    anti_transpose_reduce, compress, scan_metadata, standard_reduce, twist_reduce, BoundaryMatrix,
    PivotTable,
};
use persimmon_core::vr::{vr_barcode, ReductionMode, VrOptions};
use persimmon_core::wasserstein::{approx_w1, exact_w1};
use persimmon_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "persimmon",
    version,
    about = "Vietoris-Rips persistence barcodes and Wasserstein distances between persistence diagrams",
    disable_help_subcommand = true
)]
struct Cli {
    /// Worker count for parallel stages (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    LowerDistance,
    PointCloud,
    Sparse,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Oblivious,
    Vmatrix,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Standard,
    Twist,
    Compress,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Vietoris-Rips persistence barcodes and write one diagram
    /// file per dimension
    Barcode {
        /// Metric input file
        file: PathBuf,
        /// Largest homology dimension to compute
        #[arg(long, default_value_t = 1)]
        dim: u32,
        /// Diameter threshold (defaults to the enclosing radius for dense
        /// input; required for sparse input)
        #[arg(long)]
        threshold: Option<f64>,
        /// Input format
        #[arg(long, value_enum, default_value_t = FormatArg::LowerDistance)]
        format: FormatArg,
        /// Submatrix reduction strategy
        #[arg(long, value_enum, default_value_t = ModeArg::Oblivious)]
        mode: ModeArg,
        /// Report zero-persistence pairs as well
        #[arg(long)]
        include_zero: bool,
        /// Output stem; diagram files are written as <STEM>.dim<k>.txt
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 1-Wasserstein distance between two persistence diagram files
    Wasserstein {
        diagram_a: PathBuf,
        diagram_b: PathBuf,
        /// Well-separation sparsity parameter of the approximation
        #[arg(long, default_value_t = 40.0)]
        s: f64,
        /// Solve the exact dense transport problem instead
        #[arg(long)]
        exact: bool,
        /// Seed of the condensation perturbation
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Print a machine-readable report after the distance
        #[arg(long)]
        report: bool,
    },
    /// Reduce an explicit boundary matrix and print its pivots
    Reduce {
        matrix_file: PathBuf,
        #[arg(long, value_enum, default_value_t = AlgorithmArg::Standard)]
        algorithm: AlgorithmArg,
        /// Reduce the anti-transposed matrix and map the pivots back
        #[arg(long)]
        anti_transpose: bool,
    },
}

struct CliError {
    code: u8,
    msg: String,
}

fn usage_err(msg: impl Into<String>) -> CliError {
    CliError {
        code: 1,
        msg: msg.into(),
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::Capacity(_) => 3,
            _ => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 2,
            msg: e.to_string(),
        }
    }
}

/// Formats with 9 significant digits, positional where reasonable.
fn fmt9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("numeric exponent");
    if !(-4..9).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}e{exp}");
    }
    // shift into positional form and drop trailing zeros
    let digits = 8 - exp;
    let s = format!("{:.*}", digits.max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError {
        code: 2,
        msg: format!("{}: {e}", path.display()),
    })
}

#[allow(clippy::too_many_arguments)]
fn run_barcode(
    file: &Path,
    dim: u32,
    threshold: Option<f64>,
    format: FormatArg,
    mode: ModeArg,
    include_zero: bool,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let format = match format {
        FormatArg::LowerDistance => InputFormat::LowerDistance,
        FormatArg::PointCloud => InputFormat::PointCloud,
        FormatArg::Sparse => InputFormat::Sparse,
    };
    if matches!(format, InputFormat::Sparse) && threshold.is_none() {
        return Err(usage_err("sparse input requires an explicit --threshold"));
    }
    let dist = load_metric_input(&read_to_string(file)?, format)?;
    let opts = VrOptions {
        max_dim: dim,
        threshold,
        mode: match mode {
            ModeArg::Oblivious => ReductionMode::Oblivious,
            ModeArg::Vmatrix => ReductionMode::VMatrix,
        },
        include_zero,
    };
    let barcode = vr_barcode(&dist, &opts)?;

    println!("points {}", dist.n());
    println!("threshold {}", fmt9(barcode.threshold));
    for c in &barcode.counters {
        if c.dim == 0 {
            println!(
                "dim 0: columns {}, pairs {}, essential {}",
                c.columns, c.reduced_pairs, c.essential
            );
        } else {
            println!(
                "dim {}: columns {}, apparent {}, shortcut {}, reduced {}, essential {}, additions {}",
                c.dim, c.columns, c.apparent, c.emergent_shortcut, c.reduced_pairs, c.essential,
                c.additions
            );
        }
    }

    let stem = out.unwrap_or_else(|| file.with_extension(""));
    for diagram in &barcode.diagrams {
        let path = PathBuf::from(format!("{}.dim{}.txt", stem.display(), diagram.dim));
        std::fs::write(&path, write_diagram(diagram))?;
        println!(
            "wrote {} ({} bars)",
            path.display(),
            diagram.finite.len() + diagram.infinite.len()
        );
    }
    Ok(())
}

fn run_wasserstein(
    path_a: &Path,
    path_b: &Path,
    s: f64,
    exact: bool,
    seed: u64,
    report: bool,
) -> Result<(), CliError> {
    let a = read_diagram(&read_to_string(path_a)?, 0)?;
    let b = read_diagram(&read_to_string(path_b)?, 0)?;
    if a.infinite.len() != b.infinite.len() {
        eprintln!(
            "warning: infinite bar counts differ ({} vs {}); the distance covers finite pairs only",
            a.infinite.len(),
            b.infinite.len()
        );
    }
    if exact {
        let value = exact_w1(&a.finite, &b.finite)?;
        println!("{}", fmt9(value));
        if report {
            println!("mode exact");
            println!("value {}", fmt9(value));
        }
    } else {
        if s <= 2.0 {
            return Err(usage_err(format!("--s must exceed 2, got {s}")));
        }
        let r = approx_w1(&a.finite, &b.finite, s, seed)?;
        println!("{}", fmt9(r.value));
        if report {
            println!("mode approx");
            println!("value {}", fmt9(r.value));
            println!("s {}", fmt9(s));
            println!("epsilon {}", fmt9(r.epsilon));
            println!("delta {}", fmt9(r.delta));
            println!("nodes {}", r.nodes);
            println!("arcs {}", r.arcs);
            println!("wspd-pairs {}", r.wspd_pairs);
            println!("pivots {}", r.pivots);
            println!("optimal {}", r.optimal);
        }
    }
    Ok(())
}

fn run_reduce(
    matrix_file: &Path,
    algorithm: AlgorithmArg,
    anti_transpose: bool,
) -> Result<(), CliError> {
    let matrix = BoundaryMatrix::parse(&read_to_string(matrix_file)?)?;
    let needs_boundary_property = anti_transpose || !matches!(algorithm, AlgorithmArg::Standard);
    if needs_boundary_property && !matrix.is_boundary_like() {
        return Err(CliError {
            code: 2,
            msg: "matrix does not square to zero over Z2; twist, compression and \
                  anti-transpose reduction require a simplicial boundary matrix"
                .into(),
        });
    }
    let pivots: PivotTable = if anti_transpose {
        anti_transpose_reduce(&matrix)
    } else {
        match algorithm {
            AlgorithmArg::Standard => standard_reduce(&matrix).1,
            AlgorithmArg::Twist => twist_reduce(&matrix).1,
            AlgorithmArg::Compress => {
                let meta = scan_metadata(&matrix);
                let compressed = compress(&matrix, &meta);
                standard_reduce(&compressed).1
            }
        }
    };
    for (row, col) in pivots.pairs() {
        println!("{row} {col}");
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| usage_err(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Barcode {
            file,
            dim,
            threshold,
            format,
            mode,
            include_zero,
            out,
        } => run_barcode(&file, dim, threshold, format, mode, include_zero, out),
        Command::Wasserstein {
            diagram_a,
            diagram_b,
            s,
            exact,
            seed,
            report,
        } => run_wasserstein(&diagram_a, &diagram_b, s, exact, seed, report),
        Command::Reduce {
            matrix_file,
            algorithm,
            anti_transpose,
        } => run_reduce(&matrix_file, algorithm, anti_transpose),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version leave through the error path with success
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
