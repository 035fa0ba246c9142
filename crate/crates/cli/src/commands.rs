// SPDX-License-Identifier: Apache-2.0

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use bsdsynth::distance::{cluster_outputs, distance_matrix, Clustering, DistanceMatrix};
use bsdsynth::emit::{
    check_equivalence, counterexamples, load_design, save_design, to_dot, to_netlist, CheckMode, DesignFile,
    EquivalenceVerdict, NetlistStyle,
};
use bsdsynth::ios::ios_line;
use bsdsynth::sampling::RngStream;
use bsdsynth::{builtin, Bsd, Error, LearnConfig, LearnReport, Provenance, SampleSet, Scorer};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::manifest::{with_suffix, Recorder};
use crate::source::OracleSource;
use crate::{CmdResult, Failure};

#[derive(Args, Clone, Debug, Serialize)]
pub struct LearnOptions {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub max_clusters: usize,
    #[arg(long, default_value_t = 10_000)]
    pub width_cap: usize,
    #[arg(long, default_value_t = 10_000)]
    pub spec_samples: u64,
    #[arg(long = "order-samples", default_value_t = 400)]
    pub ordering_samples: u64,
    #[arg(long, default_value_t = 10_000)]
    pub merge_samples: u64,
    /// Total oracle probes allowed; unlimited when absent.
    #[arg(long)]
    pub max_probes: Option<u64>,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    /// hamming, error-reduction or random.
    #[arg(long, default_value = "hamming")]
    pub scorer: String,
    /// Do not merge equivalent leaves.
    #[arg(long)]
    pub no_merge: bool,
    /// Grow a plain tree instead of sharing nodes while learning.
    #[arg(long)]
    pub tree: bool,
}

impl LearnOptions {
    pub fn config(&self) -> Result<LearnConfig, Failure> {
        let cfg = LearnConfig {
            seed: self.seed,
            max_clusters: self.max_clusters,
            width_cap: self.width_cap,
            spec_samples: self.spec_samples,
            ordering_samples: self.ordering_samples,
            merge_samples: self.merge_samples,
            max_probes: self.max_probes,
            epsilon: self.epsilon,
            scorer: self.scorer.parse::<Scorer>()?,
            merging: !self.no_merge,
            sharing: !self.tree,
            ..LearnConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct LearnArgs {
    #[command(flatten)]
    pub source: OracleSource,
    /// Samples the design must reproduce (.ios).
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Output prefix; writes <out>.bsd.json, <out>.report.json and <out>.manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub options: LearnOptions,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    std::fs::write(path, text).map_err(Error::from)?;
    Ok(())
}

fn write_outputs(
    rec: &mut Recorder,
    out: &Path,
    diagram: &Bsd,
    report: &LearnReport,
    cfg: &LearnConfig,
    given: &SampleSet,
) -> Result<(), Failure> {
    let design = with_suffix(out, ".bsd.json");
    let rep = with_suffix(out, ".report.json");
    save_design(&design, &DesignFile::new(diagram, Some(cfg), Some(given)))?;
    write_json(&rep, report)?;
    rec.output(&design);
    rec.output(&rep);
    Ok(())
}

fn print_summary(report: &LearnReport) {
    println!(
        "learned {} -> {} nodes ({} learned), {} clusters, {} merges, {} probes",
        report.oracle,
        report.final_nodes,
        report.learned_nodes,
        report.clustering.len(),
        report.merges,
        report.probes_used
    );
    match &report.accuracy {
        Some(a) => println!(
            "accuracy {:.6} ± {:.6} ({:?}, {} inputs)",
            a.aggregate, a.half_width, a.mode, a.inputs_checked
        ),
        None => println!("accuracy not measured"),
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
}

fn learn_outcome(
    rec: &mut Recorder,
    out: &Path,
    result: bsdsynth::Result<(Bsd, LearnReport)>,
    cfg: &LearnConfig,
    given: &SampleSet,
) -> CmdResult {
    match result {
        Ok((diagram, report)) => {
            write_outputs(rec, out, &diagram, &report, cfg, given)?;
            print_summary(&report);
            Ok(0)
        }
        Err(Error::PartialResult { reason, partial }) => {
            let (diagram, report) = *partial;
            write_outputs(rec, out, &diagram, &report, cfg, given)?;
            print_summary(&report);
            Err(Failure {
                code: 3,
                message: format!("partial result written: {reason}"),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn finish_manifest(rec: Recorder, out: &Path, result: CmdResult) -> CmdResult {
    let code = match &result {
        Ok(c) => *c,
        Err(f) => f.code,
    };
    rec.finish(&with_suffix(out, ".manifest.json"), code)
        .map_err(|e| Failure::from(Error::from(e)))?;
    result
}

pub fn learn(args: LearnArgs) -> CmdResult {
    let mut rec = Recorder::new("learn", &args);
    let result = (|| {
        let cfg = args.options.config()?;
        rec.config(&cfg);
        let oracle = args.source.open()?;
        if let Some(t) = &args.source.table {
            rec.input(t);
        }
        let given = match &args.train {
            Some(p) => {
                rec.input(p);
                SampleSet::read_ios(p, Provenance::Given)?
            }
            None => SampleSet::new(oracle.inputs(), oracle.outputs()),
        };
        let result = bsdsynth::learn(&oracle, &given, &cfg);
        learn_outcome(&mut rec, &args.out, result, &cfg, &given)
    })();
    finish_manifest(rec, &args.out, result)
}

#[derive(Args, Debug, Serialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub design: PathBuf,
    #[command(flatten)]
    pub source: OracleSource,
    /// Check every input.
    #[arg(long, conflicts_with_all = ["samples", "rows"])]
    pub exact: bool,
    /// Check this many uniform random inputs.
    #[arg(long, conflicts_with = "rows")]
    pub samples: Option<u64>,
    /// Check every row of a --table oracle.
    #[arg(long)]
    pub rows: bool,
    /// Largest input space --exact will enumerate.
    #[arg(long, default_value_t = 1 << 20)]
    pub cap: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the worst mismatches here as .ios.
    #[arg(long)]
    pub counterexamples: Option<PathBuf>,
    /// How many mismatches --counterexamples keeps.
    #[arg(long, default_value_t = 10)]
    pub limit: usize,
    /// Write the verdict as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn print_verdict(v: &EquivalenceVerdict) {
    println!("mode {:?}, {} inputs checked", v.mode, v.inputs_checked);
    for (j, (p, c)) in v.per_bit.iter().zip(&v.correct).enumerate() {
        println!("y{j} {p:.6} ({c}/{})", v.inputs_checked);
    }
    println!("aggregate {:.6} ± {:.6}", v.aggregate, v.half_width);
}

pub fn validate(args: ValidateArgs) -> CmdResult {
    let (diagram, _) = load_design(&args.design)?;
    let oracle = args.source.open()?;
    let mode = if args.rows {
        CheckMode::Table
    } else if let Some(k) = args.samples {
        CheckMode::Sampled(k)
    } else {
        CheckMode::Exhaustive
    };
    let stream = RngStream::new(args.seed, "validate", &[]);
    let v = check_equivalence(&diagram, &oracle, mode, args.cap, &stream)?;
    print_verdict(&v);
    if let Some(p) = &args.report {
        write_json(p, &v)?;
    }
    if let Some(p) = &args.counterexamples {
        let set = counterexamples(&diagram, &oracle, mode, args.cap, &stream, args.limit)?;
        set.write_ios(p)?;
    }
    match &v.counterexample {
        None => {
            println!("equivalent over {} inputs", v.inputs_checked);
            Ok(0)
        }
        Some(cx) => {
            println!("counterexample:");
            println!("{}", ios_line(&cx.input, &cx.expected));
            Err(Failure::mismatch(format!(
                "{} of {} inputs differ",
                v.inputs_checked - v.inputs_correct,
                v.inputs_checked
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
pub enum Style {
    Basis,
    Mux,
}

#[derive(Args, Debug, Serialize)]
pub struct EmitArgs {
    #[arg(long)]
    pub design: PathBuf,
    /// dot, netlist or json.
    #[arg(long)]
    pub format: String,
    #[arg(long, value_enum, default_value_t = Style::Basis)]
    pub style: Style,
    /// Module name for netlists.
    #[arg(long, default_value = "bsd")]
    pub name: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn emit(args: EmitArgs) -> CmdResult {
    if !matches!(args.format.as_str(), "dot" | "netlist" | "json") {
        return Err(Failure::usage(format!(
            "unknown format {:?}; expected dot, netlist or json",
            args.format
        )));
    }
    let (diagram, file) = load_design(&args.design)?;
    let text = match args.format.as_str() {
        "dot" => to_dot(&diagram),
        "netlist" => {
            let style = match args.style {
                Style::Basis => NetlistStyle::Basis,
                Style::Mux => NetlistStyle::Mux,
            };
            let mut net = to_netlist(&diagram, style)?;
            net.name = args.name.clone();
            net.to_text()
        }
        _ => file.to_json(),
    };
    match &args.out {
        Some(p) => std::fs::write(p, text).map_err(Error::from)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Error::from)?;
        }
    }
    Ok(0)
}

#[derive(Args, Debug, Serialize)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub source: OracleSource,
    #[arg(long, default_value_t = 10)]
    pub max_clusters: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write matrix and clustering as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Serialize)]
struct DistanceReport {
    oracle: String,
    matrix: DistanceMatrix,
    clustering: Clustering,
}

pub fn distance(args: DistanceArgs) -> CmdResult {
    let oracle = args.source.open()?;
    let cfg = LearnConfig::default();
    let stream = RngStream::new(args.seed, "partition", &[]);
    let matrix = distance_matrix(&oracle, args.samples, cfg.exhaustive_cap, cfg.complexity_floor, &stream)?;
    let clustering = cluster_outputs(&matrix, args.max_clusters)?;
    print!("{}", matrix.to_text());
    println!(
        "{} over {} inputs",
        if matrix.exhaustive { "exhaustive" } else { "sampled" },
        matrix.sample_count
    );
    for (i, g) in clustering.groups.iter().enumerate() {
        let names: Vec<String> = g.iter().map(|b| format!("c{b}")).collect();
        println!("cluster {i}: {}", names.join(" "));
    }
    if let Some(p) = &args.report {
        write_json(
            p,
            &DistanceReport {
                oracle: oracle.describe(),
                matrix,
                clustering,
            },
        )?;
    }
    Ok(0)
}

#[derive(Args, Debug, Serialize)]
pub struct RefineArgs {
    #[arg(long)]
    pub design: PathBuf,
    /// Counterexamples to add (.ios), e.g. from validate --counterexamples.
    #[arg(long)]
    pub counterexamples: PathBuf,
    /// Report of the run that produced the design.
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub source: OracleSource,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn refine(args: RefineArgs) -> CmdResult {
    let mut rec = Recorder::new("refine", &args);
    let result = (|| {
        rec.input(&args.design);
        rec.input(&args.counterexamples);
        rec.input(&args.report);
        let (diagram, file) = load_design(&args.design)?;
        let prior: LearnReport = serde_json::from_str(&std::fs::read_to_string(&args.report).map_err(Error::from)?)
            .map_err(Error::from)?;
        let cfg = file.config.clone().unwrap_or_else(|| prior.config.clone());
        rec.config(&cfg);
        let mut given = SampleSet::new(file.inputs, file.outputs);
        if !file.mandatory.is_empty() {
            let text = format!(
                "{}\n{}\n",
                bsdsynth::ios::ios_header(file.inputs, file.outputs),
                file.mandatory.join("\n")
            );
            given = SampleSet::parse_ios(&text, Provenance::Given)?;
        }
        let cx = SampleSet::read_ios(&args.counterexamples, Provenance::Counterexample)?;
        let oracle = args.source.open()?;
        let result = bsdsynth::refine(&diagram, &prior, &given, &cx, &oracle, &cfg);
        let mut all = given.clone();
        all.extend(&cx)?;
        learn_outcome(&mut rec, &args.out, result, &cfg, &all)
    })();
    finish_manifest(rec, &args.out, result)
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// Builtin circuit to serve.
    pub spec: String,
}

/// Answers queries for a builtin over stdin/stdout until `EXIT` or EOF.
pub fn serve(args: ServeArgs) -> CmdResult {
    let oracle = builtin(&args.spec)?;
    let stdin = std::io::stdin().lock();
    let mut out = std::io::BufWriter::new(std::io::stdout().lock());
    let io = |e: std::io::Error| Failure::from(Error::from(e));
    writeln!(out, "WIDTHS {} {}", oracle.inputs(), oracle.outputs()).map_err(io)?;
    out.flush().map_err(io)?;
    for line in stdin.lines() {
        let line = line.map_err(io)?;
        let line = line.trim();
        if line == "EXIT" {
            break;
        }
        let x = bsdsynth::BitVec::parse(line)?;
        let y = oracle.query_one(&x)?;
        writeln!(out, "{y}").map_err(io)?;
        out.flush().map_err(io)?;
    }
    Ok(0)
}
