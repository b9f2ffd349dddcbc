//! Command-line front end. [`run`] returns the process exit code:
//! 0 success, 2 usage or argument error, 3 construction failure (including a
//! missing cache), 4 stream or cache format error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::bch::ColumnGenerator;
use crate::cache::{self, CodeSpec, Construction};
use crate::codec::{DecoderConfig, Schedule};
use crate::error::Error;
use crate::ff::FfCode;
use crate::floor::{self, InjectionOutcome, StallPattern};
use crate::params::{CodeParams, Family};
use crate::pff::PffCode;
use crate::sim::{self, SimConfig, SimReport};
use crate::staircase::StaircaseCode;
use crate::stream::{self, StreamHeader};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONSTRUCTION: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;

/// Parameter rows of the feed-forward and partial feed-forward tables.
pub const FF_TABLE: [(u32, usize, usize); 4] = [(8, 3, 63), (8, 3, 15), (9, 3, 187), (10, 3, 183)];
pub const PFF_TABLE: [(u32, usize, usize); 4] = [(8, 3, 15), (9, 3, 187), (9, 3, 133), (10, 3, 123)];

#[derive(Debug, Parser)]
#[command(name = "staircase", version, about = "Staircase, feed-forward and partial feed-forward staircase codes")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Build a construction and write it to the cache.
    Construct(ConstructArgs),
    /// Encode a payload file into a framed stream.
    Encode(EncodeArgs),
    /// Decode a framed stream back to its payload.
    Decode(DecodeArgs),
    /// Pass a stream through a BSC, or run a minimal-stall injection test.
    Inject(InjectArgs),
    /// Monte Carlo BER/BKER over a BSC.
    Simulate(SimulateArgs),
    /// Closed-form error-floor estimates.
    Floor(FloorArgs),
    /// Gap to capacity in dB.
    Ncg(NcgArgs),
    /// Derived code parameters.
    Params(ParamsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColumnArg {
    Reciprocal,
    Same,
}

#[derive(Debug, Clone, Args)]
pub struct CodeArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub s: usize,
    /// Propagation length (PFF).
    #[arg(long = "L", alias = "l", default_value_t = 1)]
    pub l: usize,
    /// Permutation search seed (FF, PFF).
    #[arg(long, default_value_t = 1)]
    pub search_seed: u64,
    /// Permutation search budget; defaults to 64 (FF) or 256 (PFF).
    #[arg(long)]
    pub attempts: Option<usize>,
    /// FF column-code generator.
    #[arg(long, value_enum, default_value_t = ColumnArg::Reciprocal)]
    pub column: ColumnArg,
}

impl CodeArgs {
    fn spec(&self) -> CodeSpec {
        let base = CodeSpec::new(self.family, self.m, self.t, self.s);
        CodeSpec {
            l: self.l,
            column: match self.column {
                ColumnArg::Reciprocal => ColumnGenerator::Reciprocal,
                ColumnArg::Same => ColumnGenerator::Same,
            },
            seed: self.search_seed,
            attempts: self.attempts.unwrap_or(base.attempts),
            ..base
        }
        .normalized()
    }
}

#[derive(Debug, Clone, Args)]
pub struct FrameArgs {
    /// Blocks per frame (Λ); defaults to 8 for SC and FF, 4(L+1) for PFF.
    #[arg(long)]
    pub lambda: Option<usize>,
    /// Decoder window, in block pairs.
    #[arg(long, default_value_t = 7)]
    pub window: usize,
    /// Maximum passes per window position.
    #[arg(long, default_value_t = 8)]
    pub iterations: usize,
    #[arg(long, value_parser = parse_schedule, default_value = "columns-first")]
    pub schedule: Schedule,
}

impl FrameArgs {
    fn config(&self) -> DecoderConfig {
        DecoderConfig { window: self.window, iterations: self.iterations, schedule: self.schedule }
    }

    fn lambda(&self, spec: &CodeSpec) -> usize {
        self.lambda.unwrap_or(match spec.family {
            Family::Pff => 4 * (spec.l + 1),
            _ => 8,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct CacheArgs {
    /// Directory of construction cache files.
    #[arg(long, default_value = ".staircase-cache")]
    pub cache_dir: PathBuf,
    /// Explicit cache file, overriding the directory lookup.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

impl CacheArgs {
    fn path(&self, spec: &CodeSpec) -> PathBuf {
        self.cache.clone().unwrap_or_else(|| spec.cache_path(&self.cache_dir))
    }
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub cache: CacheArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub frame: FrameArgs,
    #[command(flatten)]
    pub cache: CacheArgs,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub cache: CacheArgs,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out")]
    pub output: PathBuf,
    /// Permutation search seed the stream was encoded with.
    #[arg(long, default_value_t = 1)]
    pub search_seed: u64,
    #[arg(long)]
    pub attempts: Option<usize>,
    #[arg(long, value_enum, default_value_t = ColumnArg::Reciprocal)]
    pub column: ColumnArg,
    #[arg(long, default_value_t = 7)]
    pub window: usize,
    #[arg(long, default_value_t = 8)]
    pub iterations: usize,
    #[arg(long, value_parser = parse_schedule, default_value = "columns-first")]
    pub schedule: Schedule,
    /// Extract the payload without running the decoder.
    #[arg(long)]
    pub no_decode: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub frame: FrameArgs,
    #[command(flatten)]
    pub cache: CacheArgs,
    /// Stream to corrupt; without it a minimal stall pattern is injected.
    #[arg(long = "in", requires = "output")]
    pub input: Option<PathBuf>,
    #[arg(long = "out")]
    pub output: Option<PathBuf>,
    /// BSC crossover probability for stream corruption.
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    /// Channel or pattern seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Remove this error (by index) from the generated stall pattern.
    #[arg(long)]
    pub drop: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub frame: FrameArgs,
    #[command(flatten)]
    pub cache: CacheArgs,
    /// Crossover probabilities, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub min_errors: u64,
    #[arg(long, default_value_t = 10_000)]
    pub max_frames: u64,
    #[arg(long, default_value_t = 32)]
    pub batch: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Write the final CSV summary here instead of stdout.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FloorArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct NcgArgs {
    /// Code rate, as a fraction `a/b` or a decimal.
    #[arg(long, value_parser = parse_rate)]
    pub rate: f64,
    /// Input BER at which the output BER reaches 1e-15.
    #[arg(long)]
    pub p15: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[arg(long, value_parser = parse_family, required_unless_present = "tables")]
    pub family: Option<Family>,
    #[arg(long, required_unless_present = "tables")]
    pub m: Option<u32>,
    #[arg(long, required_unless_present = "tables")]
    pub t: Option<usize>,
    #[arg(long, required_unless_present = "tables")]
    pub s: Option<usize>,
    /// Print every row of the FF and PFF parameter tables.
    #[arg(long)]
    pub tables: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn parse_rate(s: &str) -> Result<f64, String> {
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad rate {s:?}"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad rate {s:?}"))?;
            if b == 0.0 {
                return Err("rate denominator is zero".into());
            }
            Ok(a / b)
        }
        None => s.trim().parse().map_err(|_| format!("bad rate {s:?}")),
    }
}

/// Failure of a verb with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParams(_) | Error::DimensionMismatch { .. } => EXIT_USAGE,
            Error::Singular { .. } | Error::NotPrimitive { .. } | Error::Construction(_) => EXIT_CONSTRUCTION,
            Error::Format(_) => EXIT_FORMAT,
            Error::Io(_) => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type VerbResult = std::result::Result<(), Failure>;

/// Parses arguments and runs one verb, writing results to `out` and
/// diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match cli.verb {
        Verb::Construct(a) => construct(a, out),
        Verb::Encode(a) => encode(a, out),
        Verb::Decode(a) => decode(a, out),
        Verb::Inject(a) => inject(a, out),
        Verb::Simulate(a) => simulate(a, out),
        Verb::Floor(a) => floor_verb(a, out),
        Verb::Ncg(a) => ncg(a, out),
        Verb::Params(a) => params(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    fail(EXIT_USAGE, e.to_string())
}

/// Echoes the resolved configuration: a `# config:` comment for CSV, a
/// `{"config": …}` line for JSON.
fn echo_config(out: &mut dyn Write, format: OutputFormat, verb: &str, config: serde_json::Value) -> VerbResult {
    let line = json!({ "verb": verb, "config": config });
    match format {
        OutputFormat::Csv => writeln!(out, "# config: {line}"),
        OutputFormat::Json => writeln!(out, "{line}"),
    }
    .map_err(io)
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> VerbResult {
    writeln!(out, "{}", serde_json::to_string(value).map_err(|e| fail(EXIT_FORMAT, e.to_string()))?).map_err(io)
}

fn spec_json(spec: &CodeSpec) -> serde_json::Value {
    serde_json::to_value(spec).unwrap_or_default()
}

fn load_cached(spec: &CodeSpec, cache: &CacheArgs) -> std::result::Result<Construction, Failure> {
    let path = cache.path(spec);
    if !path.exists() {
        return Err(fail(
            EXIT_CONSTRUCTION,
            format!("missing construction cache {} (run `construct` first)", path.display()),
        ));
    }
    let (found, cons) = cache::load(&path)?;
    if found != *spec {
        return Err(fail(EXIT_FORMAT, format!("cache {} holds a different construction", path.display())));
    }
    Ok(cons)
}

/// Cached construction when present, otherwise built in memory.
fn cached_or_built(spec: &CodeSpec, cache: &CacheArgs) -> std::result::Result<Construction, Failure> {
    if cache.path(spec).exists() {
        load_cached(spec, cache)
    } else {
        Ok(Construction::build(spec)?)
    }
}

fn construct(a: ConstructArgs, out: &mut dyn Write) -> VerbResult {
    let spec = a.code.spec();
    let path = a.cache.path(&spec);
    echo_config(out, a.format, "construct", json!({ "spec": spec_json(&spec), "cache": path }))?;
    let cons = Construction::build(&spec)?;
    cache::save(&path, &spec, &cons)?;
    let mut summary = json!({ "key": spec.key(), "path": path, "family": spec.family });
    match &cons {
        Construction::Sc(_) => {}
        Construction::Ff(c) => {
            summary["permutation_source"] = serde_json::to_value(c.source()).unwrap_or_default();
            summary["a_inverse_dim"] = json!(c.a_inverse().rows());
        }
        Construction::Pff(c) => {
            summary["pi_attempt"] = json!(c.search_origin().0);
            summary["b_inverse_dim"] = json!(c.b_inverse().rows());
        }
    }
    match a.format {
        OutputFormat::Json => emit_json(out, &summary),
        OutputFormat::Csv => writeln!(out, "key,path\n{},{}", spec.key(), path.display()).map_err(io),
    }
}

fn stream_header(spec: &CodeSpec, lambda: usize) -> std::result::Result<StreamHeader, Failure> {
    let narrow = |v: usize, what: &str| u8::try_from(v).map_err(|_| fail(EXIT_USAGE, format!("{what} too large for the stream header")));
    Ok(StreamHeader {
        family: spec.family,
        m: narrow(spec.m as usize, "m")?,
        t: narrow(spec.t, "t")?,
        l: narrow(spec.l, "L")?,
        s: u16::try_from(spec.s).map_err(|_| fail(EXIT_USAGE, "s too large for the stream header"))?,
        lambda: u32::try_from(lambda).map_err(|_| fail(EXIT_USAGE, "Λ too large"))?,
        payload_len: 0,
    })
}

fn encode(a: EncodeArgs, out: &mut dyn Write) -> VerbResult {
    let spec = a.code.spec();
    spec.params()?;
    let lambda = a.frame.lambda(&spec);
    spec.check_lambda(lambda)?;
    echo_config(
        out,
        a.format,
        "encode",
        json!({ "spec": spec_json(&spec), "lambda": lambda, "in": a.input, "out": a.output }),
    )?;
    let cons = match spec.family {
        Family::Sc => Construction::build(&spec)?,
        _ => load_cached(&spec, &a.cache)?,
    };
    let codec = cons.codec(lambda, a.frame.config())?;
    let payload = std::fs::read(&a.input).map_err(io)?;
    let bytes = stream::encode_stream(codec.as_ref(), stream_header(&spec, lambda)?, &payload)?;
    std::fs::write(&a.output, &bytes).map_err(io)?;
    let frames = stream::frames_needed(codec.as_ref(), payload.len());
    emit_summary(out, a.format, &[("payload_bytes", payload.len()), ("frames", frames), ("stream_bytes", bytes.len())])
}

fn emit_summary(out: &mut dyn Write, format: OutputFormat, fields: &[(&str, usize)]) -> VerbResult {
    match format {
        OutputFormat::Json => {
            let map: serde_json::Map<String, serde_json::Value> = fields.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            emit_json(out, &map)
        }
        OutputFormat::Csv => {
            let keys: Vec<&str> = fields.iter().map(|f| f.0).collect();
            let vals: Vec<String> = fields.iter().map(|f| f.1.to_string()).collect();
            writeln!(out, "{}\n{}", keys.join(","), vals.join(",")).map_err(io)
        }
    }
}

fn decode(a: DecodeArgs, out: &mut dyn Write) -> VerbResult {
    let bytes = std::fs::read(&a.input).map_err(io)?;
    let header = StreamHeader::from_bytes(&bytes)?;
    let mut spec = CodeSpec::new(header.family, header.m as u32, header.t as usize, header.s as usize);
    spec.l = header.l as usize;
    spec.seed = a.search_seed;
    if let Some(n) = a.attempts {
        spec.attempts = n;
    }
    spec.column = match a.column {
        ColumnArg::Reciprocal => ColumnGenerator::Reciprocal,
        ColumnArg::Same => ColumnGenerator::Same,
    };
    let spec = spec.normalized();
    let config = DecoderConfig { window: a.window, iterations: a.iterations, schedule: a.schedule };
    let lambda = header.lambda as usize;
    echo_config(
        out,
        a.format,
        "decode",
        json!({ "spec": spec_json(&spec), "lambda": lambda, "decoder": config, "in": a.input, "out": a.output, "decode": !a.no_decode }),
    )?;
    spec.check_lambda(lambda).map_err(|e| fail(EXIT_FORMAT, e.to_string()))?;
    let cons = match spec.family {
        Family::Sc => Construction::build(&spec)?,
        _ => load_cached(&spec, &a.cache)?,
    };
    let codec = cons.codec(lambda, config)?;
    let (header, payload) = stream::decode_stream(codec.as_ref(), &bytes, !a.no_decode)?;
    std::fs::write(&a.output, &payload).map_err(io)?;
    emit_summary(out, a.format, &[("payload_bytes", header.payload_len as usize)])
}

fn stall_for(cons: &Construction, lambda: usize, config: DecoderConfig, seed: u64) -> std::result::Result<StallPattern, Failure> {
    Ok(match cons {
        Construction::Sc(code) => floor::sc_minimal_stall(&StaircaseCode::with_code((**code).clone(), lambda, config)?, seed)?,
        Construction::Ff(c) => floor::ff_minimal_stall(&FfCode::new(c.clone(), lambda / 2, config)?, seed)?,
        Construction::Pff(c) => {
            floor::pff_minimal_stall(&PffCode::new(c.clone(), lambda / (c.propagation() + 1), config)?, seed)?
        }
    })
}

fn inject(a: InjectArgs, out: &mut dyn Write) -> VerbResult {
    let spec = a.code.spec();
    spec.params()?;
    let lambda = a.frame.lambda(&spec);
    spec.check_lambda(lambda)?;
    let config = a.frame.config();
    if let (Some(input), Some(output)) = (&a.input, &a.output) {
        echo_config(
            out,
            a.format,
            "inject",
            json!({ "mode": "bsc", "spec": spec_json(&spec), "lambda": lambda, "p": a.p, "seed": a.seed, "in": input, "out": output }),
        )?;
        let cons = cached_or_built(&spec, &a.cache)?;
        let codec = cons.codec(lambda, config)?;
        let bytes = std::fs::read(input).map_err(io)?;
        let (header, mut frames) = stream::read_stream(codec.as_ref(), &bytes)?;
        let mut flips = 0;
        for (i, f) in frames.iter_mut().enumerate() {
            flips += sim::bsc_apply_frame(f, a.p, &mut sim::frame_rng(a.seed, i as u64))?;
        }
        std::fs::write(output, stream::write_stream(header, &frames)).map_err(io)?;
        return emit_summary(out, a.format, &[("frames", frames.len()), ("flips", flips)]);
    }
    echo_config(
        out,
        a.format,
        "inject",
        json!({ "mode": "stall", "spec": spec_json(&spec), "lambda": lambda, "decoder": config, "seed": a.seed, "drop": a.drop }),
    )?;
    let cons = cached_or_built(&spec, &a.cache)?;
    let codec = cons.codec(lambda, config)?;
    let mut pattern = stall_for(&cons, lambda, config, a.seed)?;
    let full_weight = pattern.weight();
    if let Some(d) = a.drop {
        if d >= full_weight {
            return Err(fail(EXIT_USAGE, format!("--drop {d} outside pattern of weight {full_weight}")));
        }
        pattern = pattern.without(d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let info: Vec<u8> = (0..codec.info_len()).map(|_| rand::Rng::gen_range(&mut rng, 0..2u8)).collect();
    let clean = codec.encode(&info)?;
    let outcome = floor::inject_and_decode(codec.as_ref(), &clean, &pattern);
    let (name, residual) = match &outcome {
        InjectionOutcome::Stalled => ("stalled", pattern.weight()),
        InjectionOutcome::Corrected(r) => ("corrected", r.len()),
    };
    match a.format {
        OutputFormat::Json => emit_json(
            out,
            &json!({ "family": spec.family, "weight": pattern.weight(), "outcome": name, "residual": residual, "errors": pattern.errors }),
        ),
        OutputFormat::Csv => writeln!(out, "family,weight,outcome,residual\n{},{},{name},{residual}", spec.family, pattern.weight()).map_err(io),
    }
}

fn report_csv_row(r: &SimReport) -> String {
    format!(
        "{},{:e},{},{},{},{},{},{:e},{:e},{:e},{:e}",
        r.family, r.p, r.frames, r.bits, r.bit_errs, r.blocks, r.blk_errs, r.ber, r.bker, r.ci95.ber, r.ci95.bker
    )
}

pub const SIM_CSV_HEADER: &str = "family,p,frames,bits,bit_errs,blocks,blk_errs,ber,bker,ci95_ber,ci95_bker";

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> VerbResult {
    let spec = a.code.spec();
    spec.params()?;
    let lambda = a.frame.lambda(&spec);
    spec.check_lambda(lambda)?;
    let config = a.frame.config();
    echo_config(
        out,
        OutputFormat::Json,
        "simulate",
        json!({
            "spec": spec_json(&spec), "lambda": lambda, "decoder": config, "p": a.p, "seed": a.seed,
            "min_errors": a.min_errors, "max_frames": a.max_frames, "batch": a.batch, "workers": a.workers,
        }),
    )?;
    let cons = cached_or_built(&spec, &a.cache)?;
    let codec = cons.codec(lambda, config)?;
    let mut reports = Vec::new();
    for &p in &a.p {
        let cfg = SimConfig {
            p,
            seed: a.seed,
            min_bit_errors: a.min_errors,
            max_frames: a.max_frames,
            batch: a.batch,
            workers: a.workers,
        };
        let mut write_err = None;
        let report = sim::run_monte_carlo(codec.as_ref(), &cfg, |r| {
            if let Err(e) = emit_json(out, r) {
                write_err.get_or_insert(e);
            }
        })?;
        if let Some(e) = write_err {
            return Err(e);
        }
        reports.push(report);
    }
    let mut csv = format!("{SIM_CSV_HEADER}\n");
    for r in &reports {
        csv.push_str(&report_csv_row(r));
        csv.push('\n');
    }
    match &a.summary {
        Some(path) => std::fs::write(path, csv).map_err(io),
        None => write!(out, "{csv}").map_err(io),
    }
}

fn floor_verb(a: FloorArgs, out: &mut dyn Write) -> VerbResult {
    let params = CodeParams::derive(a.family, a.m, a.t, a.s)?;
    echo_config(out, a.format, "floor", json!({ "family": a.family, "m": a.m, "t": a.t, "s": a.s, "p": a.p }))?;
    let rows: Vec<floor::FloorEstimate> = a
        .p
        .iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return Err(fail(EXIT_USAGE, format!("p = {p} outside [0, 1]")));
            }
            Ok(match a.family {
                Family::Ff => floor::ff_floor(params.block, params.r, a.t, p),
                Family::Pff => floor::pff_floor(params.block, a.t, p),
                Family::Sc => floor::sc_floor(params.block, a.t, p),
            })
        })
        .collect::<std::result::Result<_, _>>()?;
    match a.format {
        OutputFormat::Csv => {
            writeln!(out, "family,M,r,t,p,BKER,BER").map_err(io)?;
            for f in rows {
                writeln!(out, "{},{},{},{},{:e},{:.4e},{:.4e}", f.family, params.block, params.r, a.t, f.p, f.bker, f.ber).map_err(io)?;
            }
            Ok(())
        }
        OutputFormat::Json => {
            for f in rows {
                emit_json(out, &json!({ "family": f.family, "M": params.block, "r": params.r, "t": a.t, "p": f.p, "bker": f.bker, "ber": f.ber, "t_i": f.t_i, "t_r": f.t_r }))?;
            }
            Ok(())
        }
    }
}

fn ncg(a: NcgArgs, out: &mut dyn Write) -> VerbResult {
    echo_config(out, a.format, "ncg", json!({ "rate": a.rate, "p15": a.p15 }))?;
    let gap = floor::ncg_gap(a.rate, a.p15)?;
    match a.format {
        OutputFormat::Csv => writeln!(out, "rate,p15,gap_db\n{},{:e},{gap:.3}", a.rate, a.p15).map_err(io),
        OutputFormat::Json => emit_json(out, &json!({ "rate": a.rate, "p15": a.p15, "gap_db": gap })),
    }
}

fn params(a: ParamsArgs, out: &mut dyn Write) -> VerbResult {
    let rows: Vec<CodeParams> = if a.tables {
        echo_config(out, a.format, "params", json!({ "tables": true }))?;
        FF_TABLE
            .iter()
            .map(|&(m, t, s)| CodeParams::derive(Family::Ff, m, t, s))
            .chain(PFF_TABLE.iter().map(|&(m, t, s)| CodeParams::derive(Family::Pff, m, t, s)))
            .collect::<crate::Result<_>>()?
    } else {
        let (family, m, t, s) = (a.family.expect("required"), a.m.expect("required"), a.t.expect("required"), a.s.expect("required"));
        echo_config(out, a.format, "params", json!({ "family": family, "m": m, "t": t, "s": s }))?;
        vec![CodeParams::derive(family, m, t, s)?]
    };
    match a.format {
        OutputFormat::Csv => {
            writeln!(out, "family,m,t,s,n,k,r,M,R,OH%").map_err(io)?;
            for p in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}/{},{}",
                    p.family, p.m, p.t, p.s, p.n, p.k, p.r, p.block, p.rate.numer(), p.rate.denom(), p.overhead_display()
                )
                .map_err(io)?;
            }
            Ok(())
        }
        OutputFormat::Json => {
            for p in &rows {
                let mut v = serde_json::to_value(p).unwrap_or_default();
                v["overhead_percent"] = json!(p.overhead_display());
                emit_json(out, &v)?;
            }
            Ok(())
        }
    }
}
