use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use multibin::flusight::parse_week;
use multibin::{
    blur as blur_forecast, default_windows, evaluate_season, hedge_season, load_submission,
    load_submissions, optimize_hedged, pad_support, parse_truth, parse_windows, season_table,
    validate_forecast, worked_examples, write_submission, EpiWeek, EvaluationWindow, ForecastRecord,
    HedgedRecord, OptimizerConfig, RuleSet, Season, SeasonMilestones, TargetId,
};

use crate::output::{csv_table, num, text_table};
use crate::{
    BlurArgs, ExamplesArgs, Format, HedgeArgs, OptimizerFlags, RuleArg, RuleFlags, ScoreArgs,
    Table1Args,
};

/// Some forecast did not converge and `--strict` was given.
#[derive(Debug)]
pub struct NotConverged(pub usize);

impl std::fmt::Display for NotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} forecast(s) did not converge", self.0)
    }
}

impl std::error::Error for NotConverged {}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn load(paths: &[PathBuf], tol: f64) -> Result<Vec<ForecastRecord>> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            let records = load_submissions(path, tol)
                .with_context(|| format!("loading submissions from {}", path.display()))?;
            ensure!(!records.is_empty(), "no EW*.csv submission files in {}", path.display());
            out.extend(records);
        } else if path.exists() {
            out.extend(load_submission(path, tol).with_context(|| format!("loading {}", path.display()))?);
        } else {
            bail!("{}: no such file or directory", path.display());
        }
    }
    Ok(out)
}

fn season_of(records: &[ForecastRecord]) -> Result<Season> {
    let seasons: BTreeSet<Season> = records.iter().map(|r| r.issue_week.season()).collect();
    match seasons.len() {
        0 => bail!("no forecasts to process"),
        1 => Ok(*seasons.first().unwrap()),
        _ => bail!("submissions span several seasons: {seasons:?}"),
    }
}

fn rule_set(flags: &RuleFlags) -> RuleSet {
    let mut rules = match flags.rule {
        RuleArg::Log => RuleSet::log(),
        RuleArg::Mblog => RuleSet::multibin(),
    };
    rules.floor = flags.floor;
    if let Some(d) = flags.d {
        if flags.rule == RuleArg::Log {
            eprintln!("warning: --d {d} is ignored with --rule log");
        }
        rules.d_override = TargetId::ALL.iter().map(|&t| (t, d)).collect();
    }
    rules
}

fn optimizer(flags: &OptimizerFlags) -> Result<OptimizerConfig> {
    let cfg = OptimizerConfig {
        max_iterations: flags.max_iterations,
        rel_tol: flags.rel_tol,
        ..OptimizerConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn check_converged(hedged: &[HedgedRecord], strict: bool) -> Result<()> {
    let failed = hedged.iter().filter(|h| !h.hedged.converged).count();
    if failed > 0 {
        if strict {
            return Err(NotConverged(failed).into());
        }
        eprintln!("warning: {failed} forecast(s) did not converge");
    }
    Ok(())
}

/// One window per target covering every submitted issue week.
fn submitted_windows(records: &[ForecastRecord]) -> Result<Vec<EvaluationWindow>> {
    let mut weeks: BTreeMap<TargetId, BTreeSet<EpiWeek>> = BTreeMap::new();
    for r in records {
        weeks.entry(r.target).or_default().insert(r.issue_week);
    }
    Ok(weeks
        .into_iter()
        .map(|(t, w)| EvaluationWindow::new(t, w))
        .collect::<multibin::Result<_>>()?)
}

pub fn score(args: &ScoreArgs) -> Result<()> {
    let forecasts = load(&args.submissions, args.input.tol)?;
    let season = season_of(&forecasts)?;
    let truth = parse_truth(&read(&args.truth)?, season)
        .with_context(|| format!("parsing {}", args.truth.display()))?;
    let windows = match &args.windows {
        Some(p) => parse_windows(&read(p)?, season).with_context(|| format!("parsing {}", p.display()))?,
        None => submitted_windows(&forecasts)?,
    };
    let row = evaluate_season(&forecasts, &truth, &windows, &rule_set(&args.rule))?;

    let p = args.output.precision;
    let per_forecast: Vec<Vec<String>> = row
        .scored
        .iter()
        .map(|s| {
            vec![
                s.team.clone(),
                s.location.clone(),
                s.target.id().to_string(),
                s.issue_week.to_string(),
                num(s.score, p),
            ]
        })
        .collect();
    let averages: Vec<Vec<String>> = row
        .cells
        .iter()
        .map(|(t, c)| vec![t.id().to_string(), num(c.mean, p), c.count.to_string()])
        .collect();
    let forecast_header = ["team", "location", "target", "week", "score"];
    let average_header = ["target", "mean", "count"];
    let out = match args.output.format {
        Format::Csv => format!(
            "{}\n{}",
            csv_table(&forecast_header, &per_forecast),
            csv_table(&average_header, &averages)
        ),
        Format::Text => format!(
            "{}\n{}",
            text_table(&forecast_header, &per_forecast),
            text_table(&average_header, &averages)
        ),
    };
    write_out(None, &out)
}

pub fn hedge(args: &HedgeArgs) -> Result<()> {
    if !args.submission.exists() {
        bail!("{}: no such file or directory", args.submission.display());
    }
    let records = load_submission(&args.submission, args.input.tol)
        .with_context(|| format!("loading {}", args.submission.display()))?;
    let mut rules = RuleSet::multibin();
    if let Some(d) = args.d {
        rules.d_override = TargetId::ALL.iter().map(|&t| (t, d)).collect();
    }
    let hedged = hedge_season(&records, &rules, &optimizer(&args.optimizer)?)?;
    check_converged(&hedged, args.optimizer.strict)?;

    let out: Vec<ForecastRecord> = hedged.iter().map(HedgedRecord::record).collect();
    write_out(args.output.as_deref(), &write_submission(&out))?;

    let rows: Vec<Vec<String>> = hedged
        .iter()
        .map(|h| {
            let r = &h.original;
            vec![
                r.location.clone(),
                r.target.id().to_string(),
                r.issue_week.to_string(),
                rules.d_for(r.target).to_string(),
                h.hedged.method.map_or("none", |m| m.as_str()).to_string(),
                h.hedged.iterations.to_string(),
                h.hedged.converged.to_string(),
                num(h.hedged.expected_gain, args.precision),
            ]
        })
        .collect();
    let report = csv_table(
        &["location", "target", "week", "d", "method", "iterations", "converged", "expected_gain"],
        &rows,
    );
    match &args.report {
        Some(p) => write_out(Some(p), &report),
        None => {
            eprint!("{report}");
            Ok(())
        }
    }
}

pub fn blur(args: &BlurArgs) -> Result<()> {
    let probs: Vec<f64> = args
        .probs
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("not a number: {s:?}")))
        .collect::<Result<_>>()?;
    let f = pad_support(&validate_forecast(&probs, 1e-6)?, args.d);
    let f_blur = blur_forecast(&f, args.d)?;
    let mut series = vec![("F", f.probs().to_vec()), ("F_blur", f_blur.probs().to_vec())];
    if args.hedge {
        let r = optimize_hedged(&f, args.d, &optimizer(&args.optimizer)?)?;
        if args.optimizer.strict && !r.converged {
            return Err(NotConverged(1).into());
        }
        series.push(("G_blur", blur_forecast(&r.g, args.d)?.probs().to_vec()));
        series.insert(2, ("G", r.g.probs().to_vec()));
    }

    let p = args.output.precision;
    let mut header = vec!["bin"];
    header.extend(series.iter().map(|(name, _)| *name));
    let rows: Vec<Vec<String>> = f
        .labels()
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let mut row = vec![label.to_string()];
            row.extend(series.iter().map(|(_, v)| num(v[i], p)));
            row
        })
        .collect();
    let out = match args.output.format {
        Format::Csv => csv_table(&header, &rows),
        Format::Text => text_table(&header, &rows),
    };
    write_out(None, &out)
}

pub fn examples(args: &ExamplesArgs) -> Result<()> {
    let ex = worked_examples(&OptimizerConfig::default())?;
    let p = args.output.precision;
    let mut out = String::new();
    match args.output.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = ex
                .iter()
                .map(|e| {
                    vec![
                        e.number.to_string(),
                        e.d.to_string(),
                        e.hedge.method.as_str().to_string(),
                        num(e.honest_score, p),
                        num(e.hedged_score, p),
                    ]
                })
                .collect();
            out = csv_table(&["example", "d", "method", "score_F", "score_G"], &rows);
        }
        Format::Text => {
            for e in &ex {
                writeln!(out, "Example {} (d = {}, {})", e.number, e.d, e.hedge.method.as_str())?;
                let rows: Vec<Vec<String>> = (0..e.belief.len())
                    .map(|i| {
                        vec![
                            e.belief.labels()[i].to_string(),
                            num(e.belief.probs()[i], p),
                            num(e.report().probs()[i], p),
                            num(e.belief_blurred.probs()[i], p),
                            num(e.report_blurred.probs()[i], p),
                        ]
                    })
                    .collect();
                out.push_str(&text_table(&["week", "F", "G", "F_blur", "G_blur"], &rows));
                writeln!(out, "E[MBlogS(F, Y) | F] = {}", num(e.honest_score, p))?;
                writeln!(out, "E[MBlogS(G, Y) | F] = {}", num(e.hedged_score, p))?;
                writeln!(out)?;
            }
        }
    }
    write_out(None, &out)?;

    if let Some(path) = &args.plot_data {
        let mut rows = Vec::new();
        for e in &ex {
            let series = [
                ("F", e.belief.probs()),
                ("G", e.report().probs()),
                ("F_blur", e.belief_blurred.probs()),
                ("G_blur", e.report_blurred.probs()),
            ];
            for (name, probs) in series {
                for (label, v) in e.belief.labels().iter().zip(probs) {
                    rows.push(vec![e.number.to_string(), label.to_string(), name.to_string(), v.to_string()]);
                }
            }
        }
        write_out(Some(path), &csv_table(&["example", "bin", "series", "probability"], &rows))?;
    }
    Ok(())
}

pub fn table1(args: &Table1Args) -> Result<()> {
    if !args.submissions.is_dir() {
        bail!("{}: not a directory", args.submissions.display());
    }
    let forecasts = load(std::slice::from_ref(&args.submissions), args.input.tol)?;
    let season = season_of(&forecasts)?;
    let truth = parse_truth(&read(&args.truth)?, season)
        .with_context(|| format!("parsing {}", args.truth.display()))?;
    let windows = match &args.windows {
        Some(p) => parse_windows(&read(p)?, season).with_context(|| format!("parsing {}", p.display()))?,
        None => {
            let locations: BTreeSet<&str> = forecasts.iter().map(|r| r.location.as_str()).collect();
            if locations.len() > 1 {
                eprintln!("warning: default windows follow the onset of {}", locations.first().unwrap());
            }
            let mut milestones = SeasonMilestones::from_truth(&truth, locations.first().unwrap());
            if let Some(end) = &args.season_end {
                milestones.season_end = Some(parse_week(end, season)?);
            }
            let weeks: Vec<EpiWeek> = forecasts.iter().map(|r| r.issue_week).collect();
            default_windows(&milestones, &weeks)
        }
    };
    let rules = rule_set(&args.rule);
    let (table, hedged) = season_table(&forecasts, &truth, &windows, &rules, &optimizer(&args.optimizer)?)?;
    check_converged(&hedged, args.optimizer.strict)?;

    let p = args.output.precision;
    let out = match args.output.format {
        Format::Csv => table.to_csv(p),
        Format::Text => table.to_text(p),
    };
    write_out(None, &out)?;

    if let Some(path) = &args.scores_log {
        write_out(Some(path), &table.score_log_csv())?;
    }
    if let Some(path) = &args.plot_data {
        write_out(Some(path), &plot_data(&hedged))?;
    }
    Ok(())
}

fn plot_data(hedged: &[HedgedRecord]) -> String {
    let mut out = String::from("location,target,week,bin,series,probability\n");
    for h in hedged {
        let r = &h.original;
        let spec = r.spec();
        let series = [("original", r.forecast.probs()), ("optimized", h.hedged.forecast.probs())];
        for (name, probs) in series {
            for (bin, v) in spec.bins.iter().zip(probs) {
                writeln!(out, "{},{},{},{bin},{name},{v}", r.location, r.target.id(), r.issue_week).unwrap();
            }
        }
    }
    out
}
