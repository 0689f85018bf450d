mod table;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use tiebound::classify::{measure_table, theorem_report};
use tiebound::harness::{run_suite_with_limit, FUZZ_MAX_M, FUZZ_MAX_N};
use tiebound::model::{BitWord, DEFAULT_ENUM_LIMIT};
use tiebound::partitions::mass;
use tiebound::{
    estimate_metrics, run_fuzz, Analysis, Classification, FuzzConfig, Instance, InstanceFile, Label, Outcome, Rational,
    WeightStyle,
};

use table::Table;

#[derive(Parser)]
#[command(
    name = "tiebound",
    version,
    about = "Exact tie and error analysis of MAP decoding over a binary symmetric channel"
)]
struct Cli {
    #[command(flatten)]
    format: Format,
    /// Largest blocklength that will be enumerated exhaustively.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_LIMIT)]
    limit: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Format {
    /// Markdown tables (default).
    #[arg(long, global = true, conflicts_with_all = ["csv", "json"])]
    md: bool,
    #[arg(long, global = true, conflicts_with = "json")]
    csv: bool,
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy)]
enum Style {
    Md,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exact a, b, delta, their ratios and the bound checks.
    Analyze { file: PathBuf },
    /// Shifted distances and tie sets for every output.
    Classify {
        file: PathBuf,
        /// Restrict to codeword I (1-based) and show its region.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        i: Option<u32>,
    },
    /// Tie families T(j|i), T~(j|i), N(j|i) with their probabilities.
    Partitions {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        i: Option<u32>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        j: Option<u32>,
    },
    /// Run every property check; exit 1 on any violation.
    Verify { file: PathBuf },
    /// Run the property suite over random instances.
    Fuzz {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        #[arg(long, default_value_t = 6)]
        max_m: usize,
        /// rational, laurent, mixed or uniform.
        #[arg(long, default_value = "mixed")]
        style: WeightStyle,
    },
    /// Sampling estimates of a, b, delta.
    Montecarlo {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
}

/// Bad input; reported on stderr with exit status 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Run = Result<bool, InputError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = match (cli.format.csv, cli.format.json) {
        (true, _) => Style::Csv,
        (_, true) => Style::Json,
        _ => Style::Md,
    };
    let mut out = io::stdout().lock();
    let result = match cli.command {
        Command::Analyze { file } => analyze(&file, cli.limit, style, &mut out),
        Command::Classify { file, i } => classify(&file, i, cli.limit, style, &mut out),
        Command::Partitions { file, i, j } => partitions(&file, i, j, cli.limit, style, &mut out),
        Command::Verify { file } => verify(&file, cli.limit, style, &mut out),
        Command::Fuzz {
            seed,
            trials,
            max_n,
            max_m,
            style: weight_style,
        } => fuzz(
            FuzzConfig {
                seed,
                trials,
                max_n,
                max_m,
                weight_style,
                ..Default::default()
            },
            style,
            &mut out,
        ),
        Command::Montecarlo { file, samples, seed } => montecarlo(&file, samples, seed, style, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<(InstanceFile, Instance), InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| InputError(format!("{}: malformed instance file: {e}", path.display())))?;
    let inst = file
        .to_instance()
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Ok((file, inst))
}

fn emit(table: &Table, style: Style, out: &mut impl Write) -> Result<(), InputError> {
    match style {
        Style::Csv => table.write_csv(out)?,
        _ => table.write_md(out)?,
    }
    Ok(())
}

fn emit_json(value: &Value, out: &mut impl Write) -> Result<(), InputError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn opt_rat(r: &Option<Rational>) -> String {
    r.as_ref().map_or_else(|| "undefined".to_string(), Rational::to_string)
}

/// `{2,3}` with 1-based indices, or `{}`.
fn index_set(ix: &[usize]) -> String {
    let inner: Vec<String> = ix.iter().map(|h| (h + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

fn word_set(inst: &Instance, words: &[BitWord]) -> String {
    let inner: Vec<String> = words.iter().map(|&y| inst.word(y)).collect();
    format!("{{{}}}", inner.join(" "))
}

fn check_pick(inst: &Instance, idx: Option<u32>) -> Result<Option<usize>, InputError> {
    match idx {
        None => Ok(None),
        Some(i) => {
            let i = i as usize - 1;
            inst.check_index(i)?;
            Ok(Some(i))
        }
    }
}

fn analyze(path: &Path, limit: usize, style: Style, out: &mut impl Write) -> Run {
    let (file, inst) = load(path)?;
    let cls = Classification::with_limit(&inst, limit)?;
    let t = theorem_report(&inst, cls.metrics());
    let m = &t.metrics;
    let ok = t.holds();
    if let Style::Json = style {
        emit_json(
            &json!({
                "instance": file,
                "n": inst.n(),
                "m": inst.m(),
                "p": inst.p().to_string(),
                "q": t.q.to_string(),
                "a": m.a.to_string(),
                "b": m.b.to_string(),
                "delta": m.delta.to_string(),
                "a_over_b": t.a_over_b.as_ref().map(Rational::to_string),
                "delta_over_b": t.delta_over_b.as_ref().map(Rational::to_string),
                "theorem_factor": t.theorem_factor.to_string(),
                "checks": {
                    "sandwich": t.sandwich,
                    "delta_bound": t.delta_bound,
                    "theorem": t.theorem,
                    "uniform_theorem": t.uniform_theorem,
                },
                "tie_free": t.tie_free,
                "bound_ok": ok,
            }),
            out,
        )?;
        return Ok(ok);
    }
    let mut tab = Table::new(["quantity", "value"]).titled(path.display().to_string());
    let uniform = t.uniform_theorem.map_or("n/a (priors differ)", yes_no);
    for (k, v) in [
        ("n", inst.n().to_string()),
        ("M", inst.m().to_string()),
        ("p", inst.p().to_string()),
        ("q", t.q.to_string()),
        ("a", m.a.to_string()),
        ("b", m.b.to_string()),
        ("delta", m.delta.to_string()),
        ("a/b", opt_rat(&t.a_over_b)),
        ("delta/b", opt_rat(&t.delta_over_b)),
        ("1+2qn", t.theorem_factor.to_string()),
        ("b <= a <= b+delta", yes_no(t.sandwich).into()),
        ("delta <= 2qn b", yes_no(t.delta_bound).into()),
        ("a <= (1+2qn) b", yes_no(t.theorem).into()),
        ("a <= (1+qn) b", uniform.into()),
        ("bound_ok", yes_no(ok).into()),
    ] {
        tab.push([k.to_string(), v]);
    }
    emit(&tab, style, out)?;
    Ok(ok)
}

fn classify(path: &Path, i: Option<u32>, limit: usize, style: Style, out: &mut impl Write) -> Run {
    let (_, inst) = load(path)?;
    let pick = check_pick(&inst, i)?;
    let cls = Classification::with_limit(&inst, limit)?;
    let mt = measure_table(&cls);
    let cols: Vec<usize> = pick.map_or_else(|| (0..inst.m()).collect(), |i| vec![i]);
    if let Style::Json = style {
        let rows: Vec<Value> = mt
            .rows
            .iter()
            .map(|r| {
                let ties: Vec<Vec<usize>> = cols
                    .iter()
                    .map(|&c| r.ties[c].iter().map(|h| h + 1).collect())
                    .collect();
                let mut v =
                    json!({ "y": inst.word(r.y), "scores": r.scores, "ties": ties, "decoded": cls.decode(r.y) + 1 });
                if let Some(i) = pick {
                    v["region"] = json!(region(cls.label(i, r.y)));
                }
                v
            })
            .collect();
        let cw: Vec<usize> = cols.iter().map(|c| c + 1).collect();
        emit_json(
            &json!({ "shifted": mt.shifted, "headers": mt.headers, "codewords": cw, "rows": rows }),
            out,
        )?;
        return Ok(true);
    }
    let mut headers = vec!["y".to_string()];
    headers.extend(mt.headers.iter().cloned());
    headers.extend(cols.iter().map(|c| format!("I_{}(y)", c + 1)));
    match pick {
        Some(i) => headers.push(format!("region of c_{}", i + 1)),
        None => headers.push("decoded".into()),
    }
    let mut tab = Table::new(headers);
    for r in &mt.rows {
        let mut row = vec![inst.word(r.y)];
        row.extend(r.scores.iter().map(i64::to_string));
        row.extend(cols.iter().map(|&c| index_set(&r.ties[c])));
        match pick {
            Some(i) => row.push(region(cls.label(i, r.y)).into()),
            None => row.push((cls.decode(r.y) + 1).to_string()),
        }
        tab.push(row);
    }
    emit(&tab, style, out)?;
    Ok(true)
}

fn region(l: Label) -> &'static str {
    match l {
        Label::Tie => "T",
        Label::Error => "N",
        Label::Correct => "-",
    }
}

fn partitions(path: &Path, i: Option<u32>, j: Option<u32>, limit: usize, style: Style, out: &mut impl Write) -> Run {
    let (_, inst) = load(path)?;
    let pi = check_pick(&inst, i)?;
    let pj = check_pick(&inst, j)?;
    if let (Some(a), Some(b)) = (pi, pj) {
        if a == b {
            return Err(InputError(format!("--i and --j must differ (both are {})", a + 1)));
        }
    }
    let an = Analysis::with_limit(&inst, limit)?;
    let fam = an.families();
    let cls = an.classification();
    let pairs: Vec<(usize, usize)> = fam
        .pairs()
        .filter(|&(a, b)| pi.is_none_or(|x| x == a) && pj.is_none_or(|x| x == b))
        .collect();
    if let Style::Json = style {
        let list: Vec<Value> = pairs
            .iter()
            .map(|&(a, b)| {
                let words = |ws: &[BitWord]| ws.iter().map(|&y| inst.word(y)).collect::<Vec<_>>();
                let lp = &an.pair(a, b).levels;
                let levels: Vec<Value> = (0..lp.t_levels.len())
                    .map(|k| {
                        json!({
                            "k": k,
                            "tied": words(&lp.t_levels[k]),
                            "matched": words(&lp.n_levels[k]),
                            "atoms": lp.atoms[k].len(),
                        })
                    })
                    .collect();
                json!({
                    "i": a + 1,
                    "j": b + 1,
                    "tied": words(fam.tied(a, b)),
                    "residual": words(fam.residual(a, b)),
                    "matched": words(fam.matched(a, b)),
                    "tied_mass": mass(cls, a, fam.tied(a, b)).to_string(),
                    "residual_mass": mass(cls, a, fam.residual(a, b)).to_string(),
                    "matched_mass": mass(cls, a, fam.matched(a, b)).to_string(),
                    "levels": levels,
                })
            })
            .collect();
        emit_json(&Value::Array(list), out)?;
        return Ok(true);
    }
    let mut tab = Table::new(["family", "size", "P(c_i, .)", "words"]);
    for &(a, b) in &pairs {
        for (name, ws) in [
            ("T", fam.tied(a, b)),
            ("T~", fam.residual(a, b)),
            ("N", fam.matched(a, b)),
        ] {
            tab.push([
                format!("{name}({}|{})", b + 1, a + 1),
                ws.len().to_string(),
                mass(cls, a, ws).to_string(),
                word_set(&inst, ws),
            ]);
        }
    }
    emit(&tab, style, out)?;
    Ok(true)
}

fn outcome(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Vacuous => "vacuous",
        Outcome::Fail => "FAIL",
    }
}

fn verify(path: &Path, limit: usize, style: Style, out: &mut impl Write) -> Run {
    let (_, inst) = load(path)?;
    let rep = run_suite_with_limit(&inst, limit)?;
    let ok = rep.passed();
    if let Style::Json = style {
        let mut v = serde_json::to_value(&rep)?;
        v["passed"] = json!(ok);
        emit_json(&v, out)?;
        return Ok(ok);
    }
    let mut tab = Table::new(["property", "outcome", "checked", "violations", "first violation"]);
    for c in &rep.checks {
        tab.push([
            c.property.clone(),
            outcome(c.outcome).into(),
            c.checked.to_string(),
            c.violation_count.to_string(),
            c.violations.first().cloned().unwrap_or_default(),
        ]);
    }
    emit(&tab, style, out)?;
    if let Style::Md = style {
        let mut links = Table::new(["link", "value"]).titled("bound chain");
        for l in &rep.chain.links {
            links.push([l.name.clone(), opt_rat(&l.value)]);
        }
        emit(&links, style, out)?;
    }
    Ok(ok)
}

fn fuzz(cfg: FuzzConfig, style: Style, out: &mut impl Write) -> Run {
    if cfg.max_n > FUZZ_MAX_N || cfg.max_m > FUZZ_MAX_M {
        return Err(InputError(format!(
            "--max-n is capped at {FUZZ_MAX_N} and --max-m at {FUZZ_MAX_M}"
        )));
    }
    let rep = run_fuzz(&cfg)?;
    let ok = rep.passed();
    if let Style::Json = style {
        emit_json(&serde_json::to_value(&rep)?, out)?;
        return Ok(ok);
    }
    let title = format!(
        "seed {}, {} trials ({} style), {} with ties, {} uniform",
        rep.seed, rep.trials, rep.weight_style, rep.tie_trials, rep.uniform_trials
    );
    let mut tab = Table::new(["property", "pass", "vacuous", "fail"]).titled(title);
    for t in &rep.tallies {
        tab.push([
            t.property.clone(),
            t.pass.to_string(),
            t.vacuous.to_string(),
            t.fail.to_string(),
        ]);
    }
    emit(&tab, style, out)?;
    if let Style::Md = style {
        if !rep.failures.is_empty() {
            let mut f = Table::new(["trial", "property", "reproducer"]).titled("failures");
            for x in &rep.failures {
                f.push([
                    x.trial.to_string(),
                    x.reproducer.property.clone(),
                    serde_json::to_string(&x.reproducer.instance)?,
                ]);
            }
            emit(&f, style, out)?;
        }
    }
    Ok(ok)
}

fn montecarlo(path: &Path, samples: u64, seed: u64, style: Style, out: &mut impl Write) -> Run {
    let (_, inst) = load(path)?;
    let est = estimate_metrics(&inst, samples, seed)?;
    if let Style::Json = style {
        emit_json(&serde_json::to_value(est.all())?, out)?;
        return Ok(true);
    }
    let mut tab = Table::new(["metric", "point", "stderr", "samples", "seed"]);
    for e in est.all() {
        tab.push([
            e.metric.clone(),
            format!("{:.6}", e.point),
            format!("{:.6}", e.stderr),
            e.samples.to_string(),
            e.seed.to_string(),
        ]);
    }
    emit(&tab, style, out)?;
    Ok(true)
}
