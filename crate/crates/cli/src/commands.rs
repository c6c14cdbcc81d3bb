use std::fmt;
use std::io::BufReader;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use beamcast_core::fixture::{synthetic_series, SyntheticSpec, SAMPLE_RAW_TSV, SAMPLE_SECTOR_MAP};
use beamcast_core::gru::{deserialize_model, predict as gru_predict, serialize_model, GruDims, GruParams};
use beamcast_core::ingest::{
    aggregate, load_sector_series, make_windows, parse_raw, write_sector_series, CountMode,
    SectorMap, SectorSeries, WindowedDataset,
};
use beamcast_core::sim::{
    compare, named_policy, replay_config, simulate_many, summarize, write_paired_csv,
    write_reports_csv, write_summary_csv,
};
use beamcast_core::sweep::{build_schedule, rank_sectors};
use beamcast_core::train::{check_cases, evaluate, fit, Normalizer, OptimizerKind, TrainConfig};
use beamcast_core::SECTORS;

use crate::error::CliError;
use crate::output::OutDir;
use crate::settings::{List, Settings};
use crate::{
    DataArgs, EvalArgs, FixtureArgs, GradcheckArgs, IngestArgs, PredictArgs, ScheduleArgs,
    SimulateArgs, TrainArgs,
};

pub struct Ctx {
    pub seed: u64,
    pub out: OutDir,
}

/// Rejects leftover config keys and prints the resolved values.
fn begin(s: &Settings, command: &str) -> Result<(), CliError> {
    s.finish()?;
    print!("{}", s.render(command));
    Ok(())
}

fn read_text(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(Path::new(path), e))
}

fn load_series(path: &str) -> Result<SectorSeries, CliError> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(Path::new(path), e))?;
    Ok(load_sector_series(BufReader::new(f))?)
}

fn load_model(path: &str) -> Result<(GruParams, Normalizer), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(Path::new(path), e))?;
    let (p, norm) = deserialize_model(&bytes)?;
    let dims = p.dims();
    if dims.input != 4 || dims.output != 4 || norm.len() != 4 {
        return Err(CliError::Invalid(format!(
            "dimension mismatch: model maps {} inputs to {} outputs, series has 4 sectors",
            dims.input, dims.output
        )));
    }
    Ok((p, norm))
}

fn fmt_row(v: &[f64; 4]) -> String {
    SECTORS.iter().zip(v).map(|(s, x)| format!("{}={:.3}", s, x)).collect::<Vec<_>>().join(" ")
}

struct Data {
    series: String,
    window: usize,
    train_fraction: f64,
}

fn resolve_data(s: &mut Settings, a: DataArgs) -> Result<Data, CliError> {
    Ok(Data {
        series: s.required("series", a.series)?,
        window: s.value("window", a.window, 144usize)?,
        train_fraction: s.value("train_fraction", a.train_fraction, 0.9)?,
    })
}

fn windows(d: &Data) -> Result<WindowedDataset, CliError> {
    Ok(make_windows(&load_series(&d.series)?, d.window, d.train_fraction)?)
}

fn parse_delimiter(text: &str) -> Result<char, CliError> {
    match text {
        "tab" | "\\t" => Ok('\t'),
        "comma" => Ok(','),
        other => {
            let mut chars = other.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(CliError::Invalid(format!("delimiter {:?} is not a single character", other))),
            }
        }
    }
}

pub fn ingest(s: &mut Settings, ctx: &Ctx, a: IngestArgs) -> Result<(), CliError> {
    let raw = s.required("raw", a.raw)?;
    let map = s.required("map", a.map)?;
    let delimiter = s.value("delimiter", a.delimiter, "tab".to_string())?;
    let mode = s.value("count_mode", a.count_mode, CountMode::RecordCount)?;
    let out = s.value("out", a.out, "series.csv".to_string())?;
    begin(s, "ingest")?;

    let delimiter = parse_delimiter(&delimiter)?;
    let map = SectorMap::parse(&read_text(&map)?)?;
    let text = read_text(&raw)?;
    let parsed = parse_raw(text.lines(), delimiter)?;
    for d in parsed.diagnostics.iter().take(20) {
        eprintln!("skipped {}", d);
    }
    if parsed.diagnostics.len() > 20 {
        eprintln!("… {} more lines skipped", parsed.diagnostics.len() - 20);
    }
    let agg = aggregate(&parsed.records, &map, mode)?;
    let path = ctx.out.write(&out, |w| write_sector_series(&agg.series, w))?;

    let mut totals = [0u64; 4];
    for row in &agg.series.counts {
        for k in 0..4 {
            totals[k] += row[k];
        }
    }
    println!("records accepted: {}", parsed.records.len());
    println!("lines skipped: {}", parsed.diagnostics.len());
    println!("slots: {}", agg.series.len());
    println!(
        "totals: {}",
        SECTORS.iter().zip(totals).map(|(s, t)| format!("{}={}", s, t)).collect::<Vec<_>>().join(" ")
    );
    println!("empty slots: {}", agg.missing_slots.len());
    println!("wrote {}", path.display());
    Ok(())
}

pub fn train(s: &mut Settings, ctx: &Ctx, a: TrainArgs) -> Result<(), CliError> {
    let data = resolve_data(s, a.data)?;
    let defaults = TrainConfig::default();
    let hidden = s.value("hidden", a.hidden, 512usize)?;
    let epochs = s.value("epochs", a.epochs, defaults.epochs)?;
    let steps = s.value("steps", a.steps, defaults.steps_per_epoch)?;
    let batch = s.value("batch", a.batch, defaults.batch_size)?;
    let lr = s.value("lr", a.lr, defaults.learning_rate)?;
    let optimizer = s.value("optimizer", a.optimizer, OptimizerKind::Adam)?;
    let clip = s.value("clip", a.clip, 5.0)?;
    let model_out = s.value("model_out", a.model_out, "model.gru".to_string())?;
    let history_out = s.value("history_out", a.history_out, "loss_history.csv".to_string())?;
    begin(s, "train")?;

    if !(clip >= 0.0) {
        return Err(CliError::Invalid("clip must be >= 0".into()));
    }
    let ds = windows(&data)?;
    let cfg = TrainConfig {
        epochs,
        steps_per_epoch: steps,
        batch_size: batch,
        learning_rate: lr,
        optimizer,
        gradient_clip_norm: (clip > 0.0).then_some(clip),
        seed: ctx.seed,
        ..defaults
    };
    let (params, norm, report) = fit(&ds, &cfg, GruDims::sectors(hidden))?;
    let bytes = serialize_model(&params, &norm)?;
    let model_path = ctx.out.write(&model_out, |w| w.write_all(&bytes))?;
    let history_path = ctx.out.write(&history_out, |w| report.write_history_csv(w))?;

    let last = report.history.last().map_or(f64::NAN, |h| h.loss);
    println!("train sequences: {}, test sequences: {}", ds.train_range().len(), ds.test_range().len());
    println!("final batch loss (normalized): {:.6}", last);
    println!("test mse: {:.4}", report.test.mse);
    println!("persistence mse: {:.4}", report.test.persistence_mse);
    println!("wrote {}", model_path.display());
    println!("wrote {}", history_path.display());
    eprintln!("training took {:.1?}", report.duration);
    Ok(())
}

pub fn eval(s: &mut Settings, ctx: &Ctx, a: EvalArgs) -> Result<(), CliError> {
    let model = s.required("model", a.model)?;
    let data = resolve_data(s, a.data)?;
    let out = s.value("out", a.out, "eval.csv".to_string())?;
    begin(s, "eval")?;

    let (params, norm) = load_model(&model)?;
    let ev = evaluate(&params, &norm, &windows(&data)?)?;
    let path = ctx.out.write(&out, |w| ev.write_csv(w))?;
    println!("test sequences: {}", ev.len());
    println!("sector,mse,persistence_mse");
    for (k, sector) in SECTORS.iter().enumerate() {
        println!("{},{:.4},{:.4}", sector, ev.mse_per_sector[k], ev.persistence_mse_per_sector[k]);
    }
    println!("all,{:.4},{:.4}", ev.mse, ev.persistence_mse);
    println!("wrote {}", path.display());
    Ok(())
}

/// Forecast of slot `at_slot` from the `window` slots before it.
fn forecast(model: &str, series: &str, at_slot: usize, window: usize) -> Result<[f64; 4], CliError> {
    let (params, norm) = load_model(model)?;
    let series = load_series(series)?;
    if window == 0 {
        return Err(CliError::Invalid("window must be positive".into()));
    }
    if at_slot < window || at_slot > series.len() {
        return Err(CliError::Invalid(format!(
            "slot {} needs {} slots of history inside a series of {} slots",
            at_slot,
            window,
            series.len()
        )));
    }
    let xs: Vec<[f64; 4]> =
        series.rows_f64()[at_slot - window..at_slot].iter().map(|r| norm.normalize(r)).collect();
    Ok(norm.denormalize(&gru_predict(&params, &xs)?))
}

pub fn predict(s: &mut Settings, ctx: &Ctx, a: PredictArgs) -> Result<(), CliError> {
    let model = s.required("model", a.model)?;
    let series = s.required("series", a.series)?;
    let at_slot = s.required("at_slot", a.at_slot)?;
    let window = s.value("window", a.window, 144usize)?;
    let out = s.value("out", a.out, "prediction.csv".to_string())?;
    begin(s, "predict")?;

    let pred = forecast(&model, &series, at_slot, window)?;
    let path = ctx.out.write(&out, |w| {
        writeln!(w, "slot,sector,prediction")?;
        for (sector, v) in SECTORS.iter().zip(pred) {
            writeln!(w, "{},{},{}", at_slot, sector, v)?;
        }
        Ok(())
    })?;
    println!("prediction for slot {}: {}", at_slot, fmt_row(&pred));
    println!("wrote {}", path.display());
    Ok(())
}

pub fn schedule(s: &mut Settings, ctx: &Ctx, a: ScheduleArgs) -> Result<(), CliError> {
    let given = s.optional("prediction", a.prediction)?;
    let (model, series, at_slot) = if given.is_some() {
        (None, None, None)
    } else {
        (
            Some(s.required("model", a.model)?),
            Some(s.required("series", a.series)?),
            Some(s.required("at_slot", a.at_slot)?),
        )
    };
    let window = s.value("window", a.window, 144usize)?;
    let out = s.value("out", a.out, "schedule.csv".to_string())?;
    begin(s, "schedule")?;

    let pred: [f64; 4] = match (given, model, series, at_slot) {
        (Some(List(v)), ..) => v.try_into().map_err(|v: Vec<f64>| {
            CliError::Invalid(format!("prediction needs 4 values, got {}", v.len()))
        })?,
        (None, Some(m), Some(sr), Some(t)) => forecast(&m, &sr, t, window)?,
        _ => unreachable!("resolved above"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let ranking = rank_sectors(&pred, &mut rng)?;
    let schedule = build_schedule(&ranking);
    let path = ctx.out.write(&out, |w| schedule.write_csv(w))?;
    println!("prediction: {}", fmt_row(&pred));
    println!(
        "order: {}",
        ranking.order.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    );
    println!("wrote {}", path.display());
    Ok(())
}

pub fn simulate(s: &mut Settings, ctx: &Ctx, a: SimulateArgs) -> Result<(), CliError> {
    let data = resolve_data(s, a.data)?;
    let model = s.optional("model", a.model)?;
    let policies = s.value(
        "policies",
        a.policies,
        List(vec!["sequential".into(), "predicted".into(), "oracle".into()]),
    )?;
    let n_seeds = s.value("seeds", a.seeds, 30usize)?;
    let ues_per_cdr = s.value("ues_per_cdr", a.ues_per_cdr, 10.0)?;
    let period = s.value("burst_period_us", a.burst_period_us, 20_000.0)?;
    let detect_prob = s.value("detect_prob", a.detect_prob, 1.0)?;
    let write_ues = s.value("write_ues", a.write_ues, false)?;
    begin(s, "simulate")?;

    if n_seeds == 0 {
        return Err(CliError::Invalid("seeds must be positive".into()));
    }
    let ds = windows(&data)?;
    let truths: Vec<[f64; 4]> = ds.test_range().map(|i| ds.target(i)).collect();
    let predictions = match &model {
        Some(m) => {
            let (params, norm) = load_model(m)?;
            Some(evaluate(&params, &norm, &ds)?.predictions)
        }
        None => None,
    };
    let policies = policies
        .0
        .iter()
        .map(|name| named_policy(name, predictions.as_deref(), &truths))
        .collect::<Result<Vec<_>, _>>()?;
    let mut base = replay_config(&truths, ues_per_cdr, ctx.seed)?;
    base.burst_period_us = period;
    base.detect_prob = detect_prob;
    base.validate()?;

    let seeds: Vec<u64> = (0..n_seeds as u64).map(|k| ctx.seed.wrapping_add(k)).collect();
    let reports = simulate_many(&base, &policies, &seeds)?;
    let summary = summarize(&reports);
    let cmp = compare(&reports)?;

    ctx.out.write("sim_summary.csv", |w| write_summary_csv(&summary, w))?;
    ctx.out.write("sim_comparison.csv", |w| cmp.write_csv(w))?;
    ctx.out.write("sim_paired.csv", |w| write_paired_csv(&cmp, w))?;
    if write_ues {
        ctx.out.write("sim_ues.csv", |w| write_reports_csv(&reports, w))?;
    }

    println!("replayed slots: {}, seeds: {}", truths.len(), n_seeds);
    println!("policy,mean_us,n");
    for p in &summary {
        println!("{},{},{}", p.policy, p.stats.mean.map_or(String::new(), |m| format!("{:.3}", m)), p.stats.n);
    }
    for row in cmp.rows.iter().skip(1) {
        println!(
            "{} vs {}: lower in {} of {} seeds, mean diff {} us",
            row.policy,
            cmp.baseline,
            row.lower,
            cmp.seeds.len(),
            row.mean_diff.map_or("n/a".into(), |d| format!("{:.3}", d))
        );
    }
    println!("wrote sim_summary.csv, sim_comparison.csv, sim_paired.csv{}", if write_ues { ", sim_ues.csv" } else { "" });
    Ok(())
}

pub fn gradcheck(s: &mut Settings, ctx: &Ctx, a: GradcheckArgs) -> Result<(), CliError> {
    let models = s.value("models", a.models, 20usize)?;
    let hidden = s.value("hidden", a.hidden, List(vec![4usize, 8]))?;
    let max_len = s.value("max_len", a.max_len, 10usize)?;
    let epsilon = s.value("epsilon", a.epsilon, 1e-5)?;
    let threshold = s.value("threshold", a.threshold, 1e-4)?;
    let out = s.value("out", a.out, "gradcheck.csv".to_string())?;
    begin(s, "gradcheck")?;

    if hidden.0.contains(&0) || max_len == 0 || !(epsilon > 0.0) {
        return Err(CliError::Invalid("hidden sizes, max_len and epsilon must be positive".into()));
    }
    let cases = check_cases(models, &hidden.0, max_len, ctx.seed);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (i, case) in cases.iter().enumerate() {
        for t in case.check(epsilon)? {
            worst = worst.max(t.max_relative_error);
            rows.push((i, case, t));
        }
    }
    let path = ctx.out.write(&out, |w| {
        writeln!(w, "model,seed,hidden,seq_len,tensor,max_relative_error,max_abs_gradient")?;
        for (i, case, t) in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{:e},{:e}",
                i,
                case.seed,
                case.params.dims().hidden,
                case.inputs.len(),
                t.name,
                t.max_relative_error,
                t.max_abs_gradient
            )?;
        }
        Ok(())
    })?;
    println!("models checked: {}", cases.len());
    println!("worst relative error: {:e}", worst);
    println!("wrote {}", path.display());
    if worst < threshold {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("gradient check error {:e} exceeds {:e}", worst, threshold)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    Sample,
    Milan,
    DHeavy,
}

impl FromStr for FixtureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sample" => Ok(FixtureKind::Sample),
            "milan" => Ok(FixtureKind::Milan),
            "d-heavy" | "d_heavy" => Ok(FixtureKind::DHeavy),
            other => Err(format!("unknown fixture {:?} (sample, milan or d-heavy)", other)),
        }
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixtureKind::Sample => "sample",
            FixtureKind::Milan => "milan",
            FixtureKind::DHeavy => "d-heavy",
        })
    }
}

pub fn fixture(s: &mut Settings, ctx: &Ctx, a: FixtureArgs) -> Result<(), CliError> {
    let kind = s.value("kind", a.kind, FixtureKind::Milan)?;
    let slots = s.value("slots", a.slots, 14 * 144usize)?;
    let default_out = if kind == FixtureKind::Sample { "sample_raw.tsv" } else { "series.csv" };
    let out = s.value("out", a.out, default_out.to_string())?;
    begin(s, "fixture")?;

    match kind {
        FixtureKind::Sample => {
            let raw = ctx.out.write(&out, |w| w.write_all(SAMPLE_RAW_TSV.as_bytes()))?;
            let map = ctx.out.write("sector_map.txt", |w| w.write_all(SAMPLE_SECTOR_MAP.as_bytes()))?;
            println!("wrote {}", raw.display());
            println!("wrote {}", map.display());
        }
        FixtureKind::Milan | FixtureKind::DHeavy => {
            if slots == 0 {
                return Err(CliError::Invalid("slots must be positive".into()));
            }
            let base = match kind {
                FixtureKind::DHeavy => SyntheticSpec::d_heavy(ctx.seed),
                _ => SyntheticSpec::milan_like(ctx.seed),
            };
            let series = synthetic_series(&SyntheticSpec { slots, ..base });
            let path = ctx.out.write(&out, |w| write_sector_series(&series, w))?;
            println!("slots: {}", series.len());
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
