//! The `rg-spectra` command line.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage error, 3 data error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::coeff::{norm_r, CoefficientVector, InteractionFile, LatticeTag};
use crate::error::Error;
use crate::kernel::{KernelSpec, TransformKind};
use crate::lattice::{block_cover, canonical_set, region, Geometry, Site, SiteSet};
use crate::report::{Check, Comparison, Report};
use crate::rg_exact::{jacobian_bruteforce, jacobian_fd, rg_map_full, FiniteVolume, DEFAULT_FD_STEP};
use crate::rg_linear::{jacobian_closed_form, ChiTable, Direction, MAX_TABLE_BLOCK};
use crate::scalar::{format_rational, rational_to_f64, Complex64};
use crate::spectral::{
    eigenvector_certificate, norm_certificate, norm_equality_witness, operator_norm_bound, operator_norm_probe,
    stirling_ratios_decrease, stirling_report, stirling_table, witness_certificate, LambdaValue,
};
use crate::spin::{EnumerationCap, DEFAULT_ENUMERATION_CAP};
use crate::verify::{run_suite, Suite, VerifyOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

/// Renormalized couplings below this magnitude are dropped from `rgmap` output.
pub const PRUNE_BELOW: f64 = 1e-14;

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "RG_SPECTRA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "rg-spectra", version, about = "Exact block-spin renormalization maps and spectral certificates")]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for randomized checks; echoed in reports.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Worker threads (default: RG_SPECTRA_THREADS, then available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    Decimation,
    Majority,
}

impl From<TransformArg> for TransformKind {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::Decimation => TransformKind::Decimation,
            TransformArg::Majority => TransformKind::Majority,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Adjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Kernels,
    Rgmap,
    Jacobian,
    Spectral,
    Witness,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Kernels => Suite::Kernels,
            SuiteArg::Rgmap => Suite::Rgmap,
            SuiteArg::Jacobian => Suite::Jacobian,
            SuiteArg::Spectral => Suite::Spectral,
            SuiteArg::Witness => Suite::Witness,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = TransformArg::Decimation)]
    pub transform: TransformArg,
    #[arg(long, default_value_t = 3)]
    pub b: i64,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
}

impl KernelArgs {
    fn spec(&self) -> Result<KernelSpec, Error> {
        KernelSpec::new(self.transform.into(), Geometry::new(self.d, self.b)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a verification suite and emit a JSON report.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, value_enum)]
        transform: Option<TransformArg>,
        #[arg(long)]
        b: Option<i64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        image_sites: Option<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Largest number of spins enumerated exhaustively.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Majority-rule χ coefficients as CSV.
    Chi {
        #[arg(long)]
        b: i64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// A single pattern inside the origin block, as JSON, e.g. "[[0]]".
        #[arg(long)]
        pattern: Option<String>,
    },
    /// Infinite-temperature Jacobian on a finite volume as CSV.
    Jacobian {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 1)]
        image_sites: usize,
    },
    /// Apply the exact RG map to an interaction file.
    Rgmap {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Image sites as JSON, e.g. "[[0],[1]]"; defaults to the blocks touched by the input.
        #[arg(long)]
        window: Option<String>,
        /// Also report the constant (empty-set) term.
        #[arg(long)]
        free_energy: bool,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Build the displayed eigenvector for λ and certify its residual.
    Eigvec {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Real part, parsed exactly when possible ("1/2", "0.5").
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda_im: f64,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Minimum residual-witness distance over seeded random vectors.
    Witness {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda_im: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0.0)]
        r: f64,
    },
    /// sν against √(2s/π) as CSV.
    Stirling {
        /// Odd block sizes, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "b")]
        s: Vec<usize>,
        /// Odd blocking factors, comma separated (with --d).
        #[arg(long, value_delimiter = ',')]
        b: Vec<i64>,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Operator-norm probes with equality witnesses.
    Norms {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
        direction: DirectionArg,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5")]
        r: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Iterate the exact map on translation-averaged windows (findings only).
    Flow {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Number of image sites along the first axis.
        #[arg(long, default_value_t = 2)]
        window_sites: usize,
        #[arg(long, default_value_t = 4)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidSpec(_) | Error::InvalidParameter(_) | Error::OutOfDisk { .. } => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// What a command produced and whether its checks passed.
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("outputs always serialize");
    text.push('\n');
    text
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory writer");
    for row in rows {
        writer.write_record(&row).expect("in-memory writer");
    }
    String::from_utf8(writer.into_inner().expect("in-memory writer")).expect("csv output is utf-8")
}

fn set_literal(set: &SiteSet) -> String {
    serde_json::to_string(set).expect("sets always serialize")
}

fn parse_sites(text: &str, what: &str) -> CliResult<SiteSet> {
    let sites: Vec<Site> =
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("{what} `{text}` is not a JSON site list: {e}")))?;
    Ok(canonical_set(sites)?)
}

fn read_interaction(path: &Path) -> CliResult<InteractionFile> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(format!("{} is not an interaction file: {e}", path.display())))
}

fn configure_threads(requested: Option<usize>) -> CliResult<()> {
    let threads = match requested {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::usage(format!("{THREADS_ENV}={v} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        // a pool that already exists (tests, repeated calls) is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Verify { suite, transform, b, d, image_sites, samples, depth, cap } => {
            let opts = VerifyOptions {
                transform: transform.map(Into::into),
                b: *b,
                d: *d,
                image_sites: *image_sites,
                samples: *samples,
                seed: cli.seed,
                depth: *depth,
                cap: EnumerationCap(*cap),
            };
            let report = run_suite((*suite).into(), &opts)?;
            Ok(Outcome { text: json(&report), pass: report.pass })
        }
        Command::Chi { b, d, pattern } => chi(*b, *d, pattern.as_deref()),
        Command::Jacobian { kernel, image_sites } => jacobian(&kernel.spec()?, *image_sites),
        Command::Rgmap { input, kernel, window, free_energy, cap } => {
            rgmap(input, &kernel.spec()?, window.as_deref(), *free_energy, EnumerationCap(*cap))
        }
        Command::Eigvec { kernel, lambda, lambda_im, depth } => {
            let cert = eigenvector_certificate(&kernel.spec()?, &LambdaValue::parse(lambda, *lambda_im)?, *depth)?;
            Ok(Outcome { text: json(&cert), pass: cert.passed() })
        }
        Command::Witness { kernel, lambda, lambda_im, samples, r } => {
            let lambda = Complex64::new(*lambda, *lambda_im);
            let cert = witness_certificate(&kernel.spec()?, lambda, *samples, cli.seed, *r)?;
            Ok(Outcome { text: json(&cert), pass: cert.passed() })
        }
        Command::Stirling { s, b, d } => {
            let rows = match (s.is_empty(), b.is_empty()) {
                (false, _) => stirling_table(s)?,
                (true, false) => stirling_report(b, *d)?,
                (true, true) => stirling_table(&[3, 5, 7, 9, 25])?,
            };
            let body = rows
                .iter()
                .map(|r| {
                    vec![r.s.to_string(), r.nu_text(), r.s_nu.to_string(), r.asymptote.to_string(), r.ratio.to_string()]
                })
                .collect();
            Ok(Outcome {
                text: csv_text(&["s", "nu", "s_nu", "sqrt_2s_over_pi", "ratio"], body),
                pass: stirling_ratios_decrease(&rows),
            })
        }
        Command::Norms { kernel, direction, r, samples } => norms(&kernel.spec()?, *direction, r, *samples, cli.seed),
        Command::Flow { input, kernel, window_sites, steps, cap } => {
            flow(input, &kernel.spec()?, *window_sites, *steps, EnumerationCap(*cap))
        }
    }
}

fn chi(b: i64, d: usize, pattern: Option<&str>) -> CliResult<Outcome> {
    let spec = KernelSpec::majority(d, b)?;
    let table = ChiTable::shared(&spec)?;
    let row = |set: &SiteSet, value: &num::BigRational| {
        vec![set_literal(set), set.len().to_string(), format_rational(value), rational_to_f64(value).to_string()]
    };
    let rows = match pattern {
        Some(text) => {
            let set = parse_sites(text, "pattern")?;
            vec![row(&set, &table.at_origin(&set)?)]
        }
        None if spec.s() <= MAX_TABLE_BLOCK => table
            .odd_patterns()?
            .iter()
            .map(|(mask, v)| row(&table.origin_block().subset_from_mask(*mask), v))
            .collect(),
        None => {
            return Err(CliError::usage(format!(
                "block size {} exceeds {MAX_TABLE_BLOCK}; query one --pattern instead",
                spec.s()
            )))
        }
    };
    Ok(Outcome { text: csv_text(&["pattern", "size", "chi", "chi_float"], rows), pass: true })
}

/// Largest original volume dumped by `jacobian`.
const MAX_JACOBIAN_DUMP_SITES: usize = 12;

fn jacobian(spec: &KernelSpec, image_sites: usize) -> CliResult<Outcome> {
    let window = crate::verify::axis_window(spec.geom(), image_sites);
    let vol = FiniteVolume::new(window, spec, EnumerationCap::default())?;
    if vol.original_sites().len() > MAX_JACOBIAN_DUMP_SITES {
        return Err(CliError::usage(format!(
            "{} original sites exceed the dump limit of {MAX_JACOBIAN_DUMP_SITES}",
            vol.original_sites().len()
        )));
    }
    let mut rows = Vec::new();
    let mut pass = true;
    for z in vol.image_sites().nonempty_subsets() {
        for w in vol.original_sites().nonempty_subsets() {
            let closed = jacobian_closed_form(spec, &z, &w)?;
            let brute = jacobian_bruteforce(spec, &vol, &z, &w)?;
            let fd = jacobian_fd(spec, &vol, &z, &w, DEFAULT_FD_STEP)?;
            pass &= closed == brute && (fd - rational_to_f64(&closed)).abs() <= 1e-6;
            rows.push(vec![set_literal(&z), set_literal(&w), format_rational(&closed), format_rational(&brute), fd.to_string()]);
        }
    }
    Ok(Outcome { text: csv_text(&["z", "w", "closed_form", "brute_force", "finite_difference"], rows), pass })
}

#[derive(Serialize)]
struct RgmapOutput {
    #[serde(flatten)]
    interaction: InteractionFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    free_energy: Option<f64>,
}

fn rgmap(
    input: &Path,
    spec: &KernelSpec,
    window: Option<&str>,
    free_energy: bool,
    cap: EnumerationCap,
) -> CliResult<Outcome> {
    let file = read_interaction(input)?;
    if file.lattice != LatticeTag::Original {
        return Err(CliError::data("rgmap input must live on the original lattice"));
    }
    if file.dimension != spec.geom().dimension() {
        return Err(CliError::data(format!(
            "input dimension {} does not match d = {}",
            file.dimension,
            spec.geom().dimension()
        )));
    }
    let j = file.to_real_vector()?;
    let window = match window {
        Some(text) => parse_sites(text, "window")?,
        None if j.is_zero() => return Err(CliError::usage("an empty input needs an explicit --window")),
        None => block_cover(&j.support_sites(), spec.geom()),
    };
    let volume_sites = region(&window, spec.geom())?;
    if let Some(set) = j.support().find(|set| !set.is_subset(&volume_sites)) {
        return Err(CliError::data(format!("interaction set {} escapes the window region", set_literal(set))));
    }
    let out = rg_map_full(&j, spec, &FiniteVolume::new(window, spec, cap)?)?;
    let mut pruned = CoefficientVector::new(out.couplings.dimension(), LatticeTag::Image);
    for (z, v) in out.couplings.iter() {
        if v.abs() >= PRUNE_BELOW {
            pruned.insert(z.clone(), *v)?;
        }
    }
    let output = RgmapOutput {
        interaction: InteractionFile::from_vector(&pruned),
        free_energy: free_energy.then_some(out.free_energy),
    };
    Ok(Outcome { text: json(&output), pass: true })
}

fn norms(spec: &KernelSpec, direction: DirectionArg, rs: &[f64], samples: usize, seed: u64) -> CliResult<Outcome> {
    let direction = match direction {
        DirectionArg::Forward => Direction::Forward,
        DirectionArg::Adjoint => Direction::Adjoint,
    };
    let mut checks = Vec::new();
    for &r in rs {
        let (_, witness) = norm_equality_witness(spec, direction, r)?;
        match operator_norm_bound(spec, direction)? {
            Some(bound) => {
                let cert = norm_certificate(spec, direction, r, samples, seed)?;
                checks.push(Check::from_certificate(format!("probe r={r} {spec}"), &cert));
                checks.push(Check::compare(
                    format!("equality witness r={r} {spec}"),
                    cert.claim.clone(),
                    witness,
                    Comparison::AtLeast,
                    bound * (1.0 - crate::spectral::FLOAT_TOLERANCE),
                ));
            }
            None => {
                let probe = operator_norm_probe(spec, direction, r, samples, seed)?;
                let claim = "no norm bound is claimed for the majority-rule adjoint";
                checks.push(Check::finding(format!("probe r={r} {spec}"), claim, probe.max_ratio).with_seed(seed));
                checks.push(Check::finding(format!("constant field r={r} {spec}"), claim, witness));
            }
        }
    }
    let report = Report::new("norms", checks);
    Ok(Outcome { text: json(&report), pass: report.pass })
}

/// Averages `J'` over translations inside the window and tiles it over the next original volume.
fn retile(
    averaged: &std::collections::BTreeMap<SiteSet, (f64, usize)>,
    volume: &SiteSet,
    dimension: usize,
) -> crate::error::Result<CoefficientVector<f64>> {
    let mut next = CoefficientVector::new(dimension, LatticeTag::Original);
    for (rep, (sum, count)) in averaged {
        let value = sum / *count as f64;
        for x in volume.iter() {
            let shifted = rep.translated(x);
            if shifted.is_subset(volume) {
                next.insert(shifted, value)?;
            }
        }
    }
    Ok(next)
}

fn flow(input: &Path, spec: &KernelSpec, window_sites: usize, steps: usize, cap: EnumerationCap) -> CliResult<Outcome> {
    let file = read_interaction(input)?;
    let d = spec.geom().dimension();
    if file.dimension != d {
        return Err(CliError::data(format!("input dimension {} does not match d = {d}", file.dimension)));
    }
    let window = crate::verify::axis_window(spec.geom(), window_sites);
    let volume = FiniteVolume::new(window.clone(), spec, cap)?;
    let mut j = file.to_real_vector()?.with_tag(LatticeTag::Original);
    if let Some(set) = j.support().find(|set| !set.is_subset(volume.original_sites())) {
        return Err(CliError::data(format!("interaction set {} escapes the window region", set_literal(set))));
    }
    let claim = "the exact map is almost a contraction on translation-averaged even interactions";
    let mut checks = Vec::new();
    let mut previous = norm_r(&j, 0.0)?;
    checks.push(Check::finding("step 0 norm", claim, previous));
    for step in 1..=steps {
        let image = rg_map_full(&j, spec, &volume)?.couplings;
        let mut averaged: std::collections::BTreeMap<SiteSet, (f64, usize)> = Default::default();
        for (z, v) in image.iter() {
            let entry = averaged.entry(crate::coeff::orbit_rep(z)?).or_insert((0.0, 0));
            entry.0 += v;
            entry.1 += 1;
        }
        averaged.retain(|_, (sum, count)| (*sum / *count as f64).abs() >= PRUNE_BELOW);
        j = retile(&averaged, volume.original_sites(), d)?;
        let current = norm_r(&j, 0.0)?;
        checks.push(Check::finding(format!("step {step} norm"), claim, current));
        if previous > 0.0 {
            checks.push(Check::finding(format!("step {step} ratio"), claim, current / previous));
        }
        previous = current;
    }
    let report = Report::new("flow", checks);
    Ok(Outcome { text: json(&report), pass: report.pass })
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::data(e.to_string()))
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|outcome| {
        write_output(cli.out.as_deref(), &outcome.text)?;
        Ok(outcome.pass)
    });
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
