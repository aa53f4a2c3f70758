use std::collections::BTreeSet;
use std::fs;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use tausat::bounds::{
    delta_shifts, hedden_interval, pattern_shift_bounds, satellite_framing, twist_bounds, BoundReport, BoundSource,
    CompanionStats, Correction, Interval, PatternStats, Shift, det3, mat3_mul, mat3_transpose,
};
use tausat::cone::{
    cobordism_verdict, cone_homology_rank, correction, correction_at, predicted_verdict, reference_surgery,
    verdict_grid, PredictedVerdict, SurgeryParams,
};
use tausat::knot::{builtin, connect_sum, mirror, tau, validate_knot, width, Builtin, KnotComplex};

#[derive(Parser)]
#[command(name = "tausat", version, about = "Knot Floer tau, surgery cobordism verdicts and satellite tau bounds")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Knots are written `builtin:<name>`, `file:<path>` or `mirror:<knot>`,
/// joined with `#` for connected sums. Builtin names: unknot, figure-eight,
/// 4_1, torus:<p>:<q>.
#[derive(Subcommand)]
enum Command {
    /// Compute tau of a knot.
    Tau { knot: String },
    /// Check that a complex satisfies the knot-complex laws.
    Validate { knot: String },
    /// The correction term, optionally also at a given surgery coefficient.
    Correction {
        knot: String,
        #[arg(long, allow_negative_numbers = true)]
        r: Option<i64>,
    },
    /// Cobordism verdict for one surgery coefficient and index.
    Surgery {
        knot: String,
        #[arg(long, allow_negative_numbers = true)]
        r: i64,
        #[arg(long, allow_negative_numbers = true)]
        s: i64,
        /// Truncation window; defaults to width + |r|.
        #[arg(long)]
        b: Option<i64>,
    },
    /// Computed against predicted verdicts over ranges of r.
    Grid {
        knot: String,
        /// Comma-separated inclusive ranges, e.g. -6..-1,1..6.
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        #[arg(long)]
        b: Option<i64>,
        /// Worker threads for the cone computations.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Bounds on tau of a twisted satellite from supplied invariants.
    Bounds(BoundsArgs),
    /// Bounds on the change of tau under added twists.
    Twist {
        #[arg(long)]
        nplus: i64,
        #[arg(long)]
        nminus: i64,
        #[arg(long, allow_negative_numbers = true)]
        s: i64,
        #[arg(long, allow_negative_numbers = true)]
        r: i64,
    },
    /// Framing and linking matrices for the satellite surgery.
    Framing {
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
        #[arg(long, allow_negative_numbers = true)]
        l: i64,
        #[arg(long, allow_negative_numbers = true)]
        r: i64,
    },
    /// Full satellite analysis over a range of twists.
    Report(ReportArgs),
}

#[derive(Args)]
struct PatternArgs {
    #[arg(long = "tauP", allow_negative_numbers = true)]
    tau_p: Option<i64>,
    /// Algebraic winding number.
    #[arg(long)]
    l: i64,
    #[arg(long)]
    nplus: i64,
    /// Defaults to nplus - l.
    #[arg(long)]
    nminus: Option<i64>,
    #[arg(long = "corrP", value_parser = parse_correction)]
    corr_p: Option<Correction>,
    #[arg(long = "corrPbar", value_parser = parse_correction)]
    corr_p_bar: Option<Correction>,
}

#[derive(Args)]
struct CompanionArgs {
    #[arg(long = "tauC", allow_negative_numbers = true)]
    tau_c: Option<i64>,
    #[arg(long = "corrC", value_parser = parse_correction)]
    corr_c: Option<Correction>,
    #[arg(long = "corrCbar", value_parser = parse_correction)]
    corr_c_bar: Option<Correction>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    pattern: PatternArgs,
    #[command(flatten)]
    companion: CompanionArgs,
    #[arg(long, allow_negative_numbers = true)]
    r: i64,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    pattern_args: PatternArgs,
    #[command(flatten)]
    companion_args: CompanionArgs,
    /// Comma-separated inclusive ranges of twists.
    #[arg(long, allow_hyphen_values = true)]
    r: String,
    /// Compute tau(P) and the pattern corrections from this knot.
    #[arg(long = "pattern", conflicts_with_all = ["tau_p", "corr_p", "corr_p_bar"])]
    pattern_knot: Option<String>,
    /// Compute tau(C) and the companion corrections from this knot.
    #[arg(long = "companion", conflicts_with_all = ["tau_c", "corr_c", "corr_c_bar"])]
    companion_knot: Option<String>,
    /// The pattern is the (l, 1) cable pattern; adds the cable interval.
    #[arg(long)]
    cable: bool,
}

fn parse_correction(text: &str) -> Result<Correction, String> {
    match text {
        "unknown" => Ok(Correction::Unknown),
        _ => text
            .parse::<u8>()
            .ok()
            .and_then(Correction::from_value)
            .ok_or_else(|| format!("correction must be 0, 1 or unknown, got `{text}`")),
    }
}

struct Outcome {
    inputs: Value,
    results: Value,
    warnings: Vec<String>,
    status: u8,
}

impl Outcome {
    fn ok(inputs: Value, results: Value) -> Self {
        Outcome { inputs, results, warnings: Vec::new(), status: 0 }
    }
}

fn parse_term(term: &str) -> Result<KnotComplex> {
    let term = term.trim();
    if let Some(rest) = term.strip_prefix("mirror:") {
        return Ok(mirror(&parse_term(rest)?));
    }
    if let Some(name) = term.strip_prefix("builtin:") {
        return Ok(builtin(Builtin::parse(name)?)?);
    }
    if let Some(path) = term.strip_prefix("file:") {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read `{path}`"))?;
        return KnotComplex::from_json(&text).with_context(|| format!("cannot parse `{path}`"));
    }
    bail!("unknown knot `{term}`; expected builtin:, file: or mirror:")
}

fn parse_knot(knot_arg: &str) -> Result<KnotComplex> {
    let mut terms = knot_arg.split('#');
    let first = parse_term(terms.next().unwrap_or_default())?;
    terms.try_fold(first, |acc, t| Ok(connect_sum(&acc, &parse_term(t)?)))
}

fn load_knot(knot_arg: &str) -> Result<KnotComplex> {
    let k = parse_knot(knot_arg)?;
    validate_knot(&k).map_err(|d| anyhow!("knot `{knot_arg}` is invalid: {d}"))?;
    Ok(k)
}

/// Inclusive ranges `a..b` or single values, comma separated; zero dropped.
fn parse_twists(text: &str, warnings: &mut Vec<String>) -> Result<Vec<i64>> {
    let mut out = BTreeSet::new();
    for seg in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let num = |s: &str| s.trim().parse::<i64>().with_context(|| format!("bad twist `{s}` in `{seg}`"));
        let (lo, hi) = match seg.split_once("..") {
            Some((a, b)) => (num(a)?, num(b)?),
            None => (num(seg)?, num(seg)?),
        };
        if lo > hi {
            bail!("empty twist range `{seg}`");
        }
        out.extend(lo..=hi);
    }
    if out.remove(&0) {
        warnings.push("r = 0 excluded".to_string());
    }
    if out.is_empty() {
        bail!("no nonzero twists in `{text}`");
    }
    Ok(out.into_iter().collect())
}

fn interval(i: Interval) -> Value {
    json!({ "lo": i.lo, "hi": i.hi })
}

fn cmd_tau(knot_arg: &str) -> Result<Outcome> {
    let k = load_knot(knot_arg)?;
    Ok(Outcome::ok(
        json!({ "knot": knot_arg }),
        json!({ "name": k.name(), "tau": tau(&k)?, "width": width(&k), "generators": k.len() }),
    ))
}

fn cmd_validate(knot_arg: &str) -> Result<Outcome> {
    let k = parse_knot(knot_arg)?;
    let diag = validate_knot(&k).err();
    let mut out = Outcome::ok(
        json!({ "knot": knot_arg }),
        json!({ "name": k.name(), "valid": diag.is_none(), "diagnostic": diag.as_ref().map(|d| d.to_string()) }),
    );
    if diag.is_some() {
        out.status = 1;
    }
    Ok(out)
}

fn cmd_correction(knot_arg: &str, r: Option<i64>) -> Result<Outcome> {
    let k = load_knot(knot_arg)?;
    let mut results = json!({
        "name": k.name(),
        "tau": tau(&k)?,
        "reference_r": reference_surgery(&k),
        "correction": correction(&k)?,
        "mirror_correction": correction(&mirror(&k))?,
    });
    if let Some(r) = r {
        results["correction_at"] = json!({ "r": r, "value": correction_at(&k, r)? });
    }
    Ok(Outcome::ok(json!({ "knot": knot_arg, "r": r }), results))
}

fn cmd_surgery(knot_arg: &str, r: i64, s: i64, b: Option<i64>) -> Result<Outcome> {
    let k = load_knot(knot_arg)?;
    let b = match b {
        Some(b) => b,
        None => SurgeryParams::minimal(&k, r)?.b(),
    };
    let t = tau(&k)?;
    let verdict = cobordism_verdict(&k, r, s, b)?;
    let predicted = predicted_verdict(t, r, s);
    let class = s.rem_euclid(r.abs());
    let mut out = Outcome::ok(
        json!({ "knot": knot_arg, "r": r, "s": s, "b": b }),
        json!({
            "tau": t,
            "class": class,
            "cone_rank": cone_homology_rank(&k, r, class, b)?,
            "verdict": verdict.to_string(),
            "predicted": predicted.to_string(),
            "agrees": predicted.agrees_with(verdict),
        }),
    );
    if predicted == PredictedVerdict::Indeterminate {
        out.warnings.push(format!("prediction indeterminate at r = {r}, s = {s}"));
    }
    if !predicted.agrees_with(verdict) {
        out.status = 2;
    }
    Ok(out)
}

fn cmd_grid(knot_arg: &str, r: &str, b: Option<i64>, threads: Option<usize>) -> Result<Outcome> {
    let mut warnings = Vec::new();
    let twists = parse_twists(r, &mut warnings)?;
    let k = load_knot(knot_arg)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let grid = pool.build()?.install(|| verdict_grid(&k, &twists, b))?;
    let cells: Vec<Value> = grid
        .cells
        .iter()
        .map(|c| {
            json!({
                "r": c.r, "s": c.s, "b": c.b,
                "computed": c.computed.to_string(),
                "predicted": c.predicted.to_string(),
                "mismatch": c.mismatch,
            })
        })
        .collect();
    for c in grid.indeterminate() {
        warnings.push(format!("prediction indeterminate at r = {}, s = {} (computed {})", c.r, c.s, c.computed));
    }
    let mismatches = grid.mismatches().count();
    let indeterminate = grid.indeterminate().count();
    Ok(Outcome {
        inputs: json!({ "knot": knot_arg, "r": twists, "b": b }),
        results: json!({
            "tau": grid.tau,
            "cells": cells,
            "determinate": grid.cells.len() - indeterminate,
            "indeterminate": indeterminate,
            "mismatches": mismatches,
        }),
        warnings,
        status: if mismatches > 0 { 2 } else { 0 },
    })
}

fn pattern_stats(a: &PatternArgs, tau_p: Option<i64>) -> Result<PatternStats> {
    let tau_p = tau_p.or(a.tau_p).ok_or_else(|| anyhow!("--tauP is required"))?;
    let nminus = a.nminus.unwrap_or(a.nplus - a.l);
    Ok(PatternStats::new(tau_p, a.l, a.nplus, nminus)?
        .with_corrections(a.corr_p.unwrap_or_default(), a.corr_p_bar.unwrap_or_default()))
}

fn companion_stats(a: &CompanionArgs) -> Result<CompanionStats> {
    let tau_c = a.tau_c.ok_or_else(|| anyhow!("--tauC is required"))?;
    Ok(CompanionStats::new(tau_c).with_corrections(a.corr_c.unwrap_or_default(), a.corr_c_bar.unwrap_or_default()))
}

fn known(k: &KnotComplex) -> Result<(i64, Correction, Correction)> {
    let c = |x: u8| Correction::from_value(x).ok_or_else(|| anyhow!("correction out of range"));
    Ok((tau(k)?, c(correction(k)?)?, c(correction(&mirror(k))?)?))
}

fn pattern_json(p: &PatternStats) -> Value {
    json!({
        "tauP": p.tau_p, "l": p.l, "nplus": p.n_plus, "nminus": p.n_minus,
        "corrP": p.corr_p.to_string(), "corrPbar": p.corr_p_mirror.to_string(),
    })
}

fn companion_json(c: &CompanionStats) -> Value {
    json!({ "tauC": c.tau_c, "corrC": c.corr_c.to_string(), "corrCbar": c.corr_c_mirror.to_string() })
}

/// Every bound applicable at `r`, the pattern-shift bounds where admissible,
/// and their intersection.
fn analyse(p: &PatternStats, c: &CompanionStats, r: i64, cable: bool) -> Result<(BoundReport, Value, bool)> {
    let mut rep = BoundReport::new(p, c, r)?;
    let d = pattern_shift_bounds(p, c, r, Shift::Delta).ok();
    let dp = pattern_shift_bounds(p, c, r, Shift::DeltaPrime).ok();
    if let (Some(d), Some(dp)) = (d, dp) {
        rep.push(BoundSource::TwoSided, tausat::bounds::raw_two_sided_bounds(p, c, r, d, dp)?);
    }
    if cable {
        rep.push_tau(BoundSource::Hedden, hedden_interval(c.tau_c, p.l, r)?);
    }
    let (delta, delta_prime) = delta_shifts(c, r);
    let combined = rep.combined().ok();
    let entries: Vec<Value> = rep
        .entries
        .iter()
        .map(|e| json!({ "source": e.source.to_string(), "deviation": interval(e.deviation), "tau": interval(e.tau) }))
        .collect();
    let value = json!({
        "r": r,
        "central": rep.central,
        "delta": delta,
        "delta_prime": delta_prime,
        "pattern_shift": { "delta": d.map(interval), "delta_prime": dp.map(interval) },
        "bounds": entries,
        "combined": combined.map(|i| json!({ "deviation": interval(i), "tau": interval(i.shift(rep.central)) })),
        "notes": rep.notes,
    });
    Ok((rep, value, combined.is_none()))
}

fn cmd_bounds(a: &BoundsArgs) -> Result<Outcome> {
    let p = pattern_stats(&a.pattern, None)?;
    let c = companion_stats(&a.companion)?;
    let (rep, results, empty) = analyse(&p, &c, a.r, false)?;
    let mut inputs = pattern_json(&p);
    merge(&mut inputs, companion_json(&c));
    inputs["r"] = json!(a.r);
    let mut warnings = rep.warnings;
    if empty {
        warnings.push("bounds have empty intersection".into());
    }
    Ok(Outcome { inputs, results, warnings, status: if empty { 2 } else { 0 } })
}

fn cmd_report(a: &ReportArgs) -> Result<Outcome> {
    let mut warnings = Vec::new();
    let twists = parse_twists(&a.r, &mut warnings)?;
    let mut p = match &a.pattern_knot {
        Some(knot_arg) => {
            let (t, cp, cpm) = known(&load_knot(knot_arg)?)?;
            pattern_stats(&a.pattern_args, Some(t))?.with_corrections(cp, cpm)
        }
        None => pattern_stats(&a.pattern_args, None)?,
    };
    let c = match &a.companion_knot {
        Some(knot_arg) => {
            let (t, cc, ccm) = known(&load_knot(knot_arg)?)?;
            CompanionStats::new(t).with_corrections(cc, ccm)
        }
        None => companion_stats(&a.companion_args)?,
    };
    if a.cable {
        if p.l < 1 || p.n_plus != p.l || p.n_minus != 0 || p.tau_p != 0 {
            bail!("--cable needs tauP = 0, l >= 1, nplus = l and nminus = 0");
        }
        // the (l, 1) cable pattern is an l-braid closure and an unknot in S^3
        if p.corr_p.is_unknown() && p.corr_p_mirror.is_unknown() {
            p = p.with_corrections(Correction::Zero, Correction::Zero);
        }
    }
    let mut rows = Vec::new();
    let mut contradictions = 0;
    let mut defaults = BTreeSet::new();
    for &r in &twists {
        let (rep, row, empty) = analyse(&p, &c, r, a.cable)?;
        defaults.extend(rep.warnings);
        if empty {
            contradictions += 1;
            warnings.push(format!("bounds have empty intersection at r = {r}"));
        }
        rows.push(row);
    }
    warnings.splice(0..0, defaults);
    let mut inputs = pattern_json(&p);
    merge(&mut inputs, companion_json(&c));
    inputs["r"] = json!(twists);
    inputs["cable"] = json!(a.cable);
    inputs["pattern_knot"] = json!(a.pattern_knot);
    inputs["companion_knot"] = json!(a.companion_knot);
    Ok(Outcome {
        inputs,
        results: json!({ "twists": rows, "contradictions": contradictions }),
        warnings,
        status: if contradictions > 0 { 2 } else { 0 },
    })
}

fn cmd_twist(nplus: i64, nminus: i64, s: i64, r: i64) -> Result<Outcome> {
    let i = twist_bounds(nplus, nminus, s, r)?;
    Ok(Outcome::ok(json!({ "nplus": nplus, "nminus": nminus, "s": s, "r": r }), json!({ "interval": interval(i) })))
}

fn cmd_framing(n: i64, l: i64, r: i64) -> Result<Outcome> {
    let f = satellite_framing(n, l, r);
    let congruent = mat3_mul(&mat3_mul(&mat3_transpose(&f.slide), &f.original), &f.slide) == f.matrix;
    Ok(Outcome::ok(
        json!({ "n": n, "l": l, "r": r }),
        json!({
            "framing": f.framing,
            "original": f.original,
            "slide": f.slide,
            "matrix": f.matrix,
            "det_original": det3(&f.original),
            "det_matrix": det3(&f.matrix),
            "congruent": congruent,
        }),
    ))
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Tau { .. } => "tau",
        Command::Validate { .. } => "validate",
        Command::Correction { .. } => "correction",
        Command::Surgery { .. } => "surgery",
        Command::Grid { .. } => "grid",
        Command::Bounds(_) => "bounds",
        Command::Twist { .. } => "twist",
        Command::Framing { .. } => "framing",
        Command::Report(_) => "report",
    }
}

fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Tau { knot } => cmd_tau(knot),
        Command::Validate { knot } => cmd_validate(knot),
        Command::Correction { knot, r } => cmd_correction(knot, *r),
        Command::Surgery { knot, r, s, b } => cmd_surgery(knot, *r, *s, *b),
        Command::Grid { knot, r, b, threads } => cmd_grid(knot, r, *b, *threads),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Twist { nplus, nminus, s, r } => cmd_twist(*nplus, *nminus, *s, *r),
        Command::Framing { n, l, r } => cmd_framing(*n, *l, *r),
        Command::Report(a) => cmd_report(a),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "none".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One `key = value` line per leaf; `{lo, hi}` pairs print as intervals and
/// arrays of numbers inline.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) if m.len() == 2 && m.contains_key("lo") && m.contains_key("hi") => {
            out.push(format!("{prefix} = [{}, {}]", m["lo"], m["hi"]));
        }
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(xs) if xs.iter().all(Value::is_number) => {
            let items: Vec<String> = xs.iter().map(Value::to_string).collect();
            out.push(format!("{prefix} = [{}]", items.join(", ")));
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        leaf => out.push(format!("{prefix} = {}", scalar(leaf))),
    }
}

fn emit(format: Format, doc: &Value) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(doc).expect("json values serialize")),
        Format::Text => {
            let mut lines = Vec::new();
            flatten("", doc, &mut lines);
            println!("{}", lines.join("\n"));
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut doc = Map::new();
    doc.insert("command".into(), json!(command_name(&cli.command)));
    let status = match run(&cli.command) {
        Ok(out) => {
            doc.insert("inputs".into(), out.inputs);
            doc.insert("results".into(), out.results);
            doc.insert("warnings".into(), json!(out.warnings));
            out.status
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            doc.insert("error".into(), json!(format!("{e:#}")));
            1
        }
    };
    doc.insert("status".into(), json!(status));
    emit(cli.format, &Value::Object(doc));
    ExitCode::from(status)
}
