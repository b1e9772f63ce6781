use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ecofollower::data::{
    descriptive_stats, fit_lognormal_headway, load_events, split_dataset, write_events,
    ColumnMapping, ExtractionConfig,
};
use ecofollower::ddpg::{train as train_policy, Policy, PolicyController};
use ecofollower::env::{Controller, EnvConfig, ReplayController};
use ecofollower::eval::{
    compare as build_report, evaluate_controller, export_distributions, write_traces, Evaluation,
    IndicatorSummary,
};
use ecofollower::fuel::FuelModel;
use ecofollower::idm::{calibrate_idm, IdmController, IdmParams, SearchSpace};
use ecofollower::objectives::HeadwayModel;
use ecofollower::seed::derive_seed;
use ecofollower::synthetic::synthetic_events;
use ecofollower::CarFollowingEvent;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::{
    CalibrateArgs, CompareArgs, EvalArgs, HeadwayFit, PrepareArgs, StatsArgs, SynthArgs, TrainArgs,
};

fn out_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn save_events(path: &Path, events: &[CarFollowingEvent]) -> CliResult<()> {
    let mut w = create(path)?;
    write_events(&mut w, events)?;
    w.flush()?;
    Ok(())
}

/// Loads an already-normalized event file; an empty result is exit code 3.
fn read_event_file(path: &Path) -> CliResult<Vec<CarFollowingEvent>> {
    let config = ExtractionConfig {
        min_duration: 0.0,
        expected_dt: None,
    };
    let extraction = load_events(path, &ColumnMapping::default(), &config)?;
    if extraction.events.is_empty() {
        return Err(CliError::empty(format!(
            "{} contains no usable events",
            path.display()
        )));
    }
    Ok(extraction.events)
}

fn fuel_model(path: Option<&Path>) -> CliResult<FuelModel> {
    Ok(match path {
        Some(p) => FuelModel::load(p)?,
        None => FuelModel::reference(),
    })
}

pub fn prepare(a: &PrepareArgs) -> CliResult<()> {
    let mapping = match &a.mapping {
        Some(p) => ColumnMapping::from_json(
            &std::fs::read_to_string(p)
                .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?,
        )?,
        None => ColumnMapping::default(),
    };
    if !(a.min_duration >= 0.0 && a.dt > 0.0) {
        return Err(CliError::usage("--min-duration must be ≥ 0 and --dt > 0"));
    }
    let config = ExtractionConfig {
        min_duration: a.min_duration,
        expected_dt: Some(a.dt),
    };
    let extraction = load_events(&a.input, &mapping, &config)?;
    out_dir(&a.out)?;
    let summary = json!({
        "events": extraction.events.len(),
        "rejected": extraction.rejected.len(),
        "rejections": extraction.rejected,
        "min_duration": a.min_duration,
        "dt": a.dt,
    });
    write_json(&a.out.join("extraction_summary.json"), &summary)?;
    RunManifest::new(
        "prepare",
        &json!({ "mapping": mapping, "extraction": config }),
        None,
        &[&a.input],
    )?
    .write(&a.out)?;
    if extraction.events.is_empty() {
        return Err(CliError::empty(format!(
            "no events of at least {} s ({} rejected)",
            a.min_duration,
            extraction.rejected.len()
        )));
    }
    save_events(&a.out.join("events.csv"), &extraction.events)?;
    println!(
        "{} events extracted, {} rejected",
        extraction.events.len(),
        extraction.rejected.len()
    );
    Ok(())
}

pub fn stats(a: &StatsArgs) -> CliResult<()> {
    if a.bins == 0 {
        return Err(CliError::usage("--bins must be positive"));
    }
    let events = read_event_file(&a.events)?;
    let report = descriptive_stats(&events, a.bins, a.ttc_cap)?;
    let fit = fit_lognormal_headway(&events)?;
    out_dir(&a.out)?;
    write_json(
        &a.out.join("stats.json"),
        &json!({ "stats": report, "headway_lognormal": fit }),
    )?;
    for (name, h) in &report.histograms {
        let mut w = create(&a.out.join(format!("hist_{name}.csv")))?;
        h.write_csv(&mut w)?;
        w.flush()?;
    }
    RunManifest::new(
        "stats",
        &json!({ "bins": a.bins, "ttc_cap": a.ttc_cap }),
        None,
        &[&a.events],
    )?
    .write(&a.out)?;
    println!(
        "{} events, {} samples; mean lead {:.3} m/s, follow {:.3} m/s, gap {:.3} m; headway lognormal mu {:.4} sigma {:.4}",
        report.events, report.samples, report.lead_speed.mean, report.follow_speed.mean, report.gap.mean, fit.mu, fit.sigma
    );
    Ok(())
}

pub fn synth(a: &SynthArgs) -> CliResult<()> {
    if a.count == 0 || !(a.dt > 0.0) || !(a.duration >= a.dt) {
        return Err(CliError::usage(
            "--count must be positive and --duration ≥ --dt > 0",
        ));
    }
    let events = synthetic_events(a.count, a.seed, a.duration, a.dt);
    out_dir(&a.out)?;
    save_events(&a.out.join("events.csv"), &events)?;
    RunManifest::new(
        "synth",
        &json!({ "count": a.count, "duration": a.duration, "dt": a.dt }),
        Some(a.seed),
        &[],
    )?
    .write(&a.out)?;
    println!("{} synthetic events written", events.len());
    Ok(())
}

fn default_search() -> SearchSpace {
    SearchSpace {
        a_max: vec![0.5, 1.0, 1.5, 2.0],
        v_desired: vec![10.0, 15.0, 20.0, 25.0],
        beta: vec![4.0],
        s_jam: vec![1.0, 2.0, 3.0],
        t_headway: vec![0.8, 1.2, 1.6],
        a_comf: vec![1.5, 2.0, 3.0],
        random_samples: None,
        seed: 0,
    }
}

pub fn calibrate(a: &CalibrateArgs) -> CliResult<()> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let space = match &a.search {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?,
        None => default_search(),
    };
    let events = read_event_file(&a.events)?;
    let best = calibrate_idm(&events, &space, &cfg.env)?;
    out_dir(&a.out)?;
    write_json(&a.out.join("idm_params.json"), &best.params)?;
    write_json(&a.out.join("calibration.json"), &best)?;
    let mut inputs: Vec<&Path> = vec![&a.events];
    inputs.extend(a.search.as_deref());
    RunManifest::new(
        "calibrate",
        &json!({ "search": space, "env": cfg.env }),
        Some(space.seed),
        &inputs,
    )?
    .write(&a.out)?;
    println!(
        "best IDM {:?}: spacing MSE {:.6} m², {} colliding events",
        best.params, best.spacing_mse, best.collided_events
    );
    Ok(())
}

pub fn train(a: &TrainArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load(a.config.as_deref())?;
    if let Some(seed) = a.seed {
        cfg.train.seed = seed;
    }
    if let Some(n) = a.episodes {
        cfg.train.episodes = n;
    }
    cfg.train.validate()?;
    let fuel = fuel_model(a.vt_micro.as_deref())?;
    let events = read_event_file(&a.events)?;
    let seed = cfg.train.seed;
    let split = split_dataset(&events, a.split, derive_seed(seed, "split"))?;
    if split.train.is_empty() {
        return Err(CliError::empty("training split is empty"));
    }
    match a.headway_fit {
        HeadwayFit::Fixed => {}
        HeadwayFit::All | HeadwayFit::Train => {
            let fit = fit_lognormal_headway(if a.headway_fit == HeadwayFit::All {
                &events
            } else {
                &split.train
            })?;
            cfg.reward.headway = HeadwayModel::new(fit.mu, fit.sigma)
                .map_err(|e| CliError::numeric(e.to_string()))?;
            println!(
                "headway lognormal refit: mu {:.4} sigma {:.4} ({} samples)",
                fit.mu, fit.sigma, fit.samples
            );
        }
    }
    out_dir(&a.out)?;
    let every = 10;
    let total = cfg.train.episodes;
    let outcome = train_policy(
        &split.train,
        &cfg.env,
        &cfg.reward,
        &fuel,
        &cfg.train,
        |r| {
            if (r.episode + 1) % every == 0 || r.episode + 1 == total {
                println!(
                    "episode {:>5}/{total}  rolling reward {:+.4}  collisions {}",
                    r.episode + 1,
                    r.rolling_reward,
                    r.collisions_cum
                );
            }
        },
    )?;
    outcome.policy.save(a.out.join("policy.json"))?;
    let mut w = create(&a.out.join("train_log.csv"))?;
    outcome.log.write_csv(&mut w)?;
    w.flush()?;
    save_events(&a.out.join("train_events.csv"), &split.train)?;
    save_events(&a.out.join("test_events.csv"), &split.test)?;
    let echo = json!({ "run": cfg, "split": a.split, "headway_fit": format!("{:?}", a.headway_fit).to_lowercase(), "vt_micro": a.vt_micro });
    let mut inputs: Vec<&Path> = vec![&a.events];
    inputs.extend(a.config.as_deref());
    inputs.extend(a.vt_micro.as_deref());
    RunManifest::new("train", &echo, Some(seed), &inputs)?.write(&a.out)?;
    println!(
        "policy written to {} ({} train / {} test events)",
        a.out.join("policy.json").display(),
        split.train.len(),
        split.test.len()
    );
    Ok(())
}

fn safe_name(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn eval(a: &EvalArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load(a.config.as_deref())?;
    cfg.indicators.per_event_means |= a.per_event_means;
    if let Some(b) = a.bins {
        cfg.indicators.bins = b;
    }
    if cfg.indicators.bins == 0 {
        return Err(CliError::usage("--bins must be positive"));
    }
    let mut controllers: Vec<(Box<dyn Controller>, EnvConfig)> = Vec::new();
    if let Some(p) = &a.policy {
        let policy = Policy::load(p)?;
        controllers.push((Box::new(PolicyController::new(policy)), cfg.env));
    }
    if let Some(p) = &a.idm_params {
        let text = std::fs::read_to_string(p)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        let params: IdmParams = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        params.validate()?;
        controllers.push((Box::new(IdmController::new(params)), cfg.env));
    } else if a.idm {
        cfg.idm.validate()?;
        controllers.push((Box::new(IdmController::new(cfg.idm)), cfg.env));
    }
    if a.ground_truth {
        controllers.push((Box::new(ReplayController), EnvConfig::unbounded()));
    }
    if controllers.is_empty() {
        return Err(CliError::usage(
            "no controllers selected: pass --policy, --idm-params, --idm and/or --ground-truth",
        ));
    }
    let fuel = fuel_model(a.vt_micro.as_deref())?;
    let events = read_event_file(&a.events)?;
    out_dir(&a.out)?;

    let mut results: Vec<Evaluation> = Vec::new();
    for (ctl, env) in &controllers {
        let e = evaluate_controller(ctl.as_ref(), &events, env, &fuel, &cfg.indicators)?;
        for (id, err) in &e.failures {
            eprintln!("warning: {} failed on event {id}: {err}", ctl.name());
        }
        write_json(
            &a.out
                .join(format!("summary_{}.json", safe_name(ctl.name()))),
            &e.summary,
        )?;
        if !a.no_traces {
            write_traces(&e.traces, &a.out.join("traces").join(safe_name(ctl.name())))?;
        }
        results.push(e);
    }
    let inputs: Vec<(&str, &ecofollower::eval::StepIndicators)> = results
        .iter()
        .map(|e| (e.summary.controller.as_str(), &e.steps))
        .collect();
    export_distributions(&inputs, cfg.indicators.bins, &a.out)?;

    let echo = json!({ "indicators": cfg.indicators, "env": cfg.env, "idm": cfg.idm, "vt_micro": a.vt_micro, "events": a.events });
    let summaries: Vec<IndicatorSummary> = results.iter().map(|e| e.summary.clone()).collect();
    if a.ground_truth {
        let report = build_report(&summaries, "ground_truth", echo.clone())?;
        write_json(&a.out.join("report.json"), &report)?;
        let table = report.render_table();
        std::fs::write(a.out.join("report.txt"), &table)?;
        print!("{table}");
    } else {
        for s in &summaries {
            println!(
                "{}: fuel {:.4} mL/s over {} events ({} collisions)",
                s.controller, s.mean_fuel_rate, s.events_evaluated, s.collisions
            );
        }
    }
    let mut paths: Vec<&Path> = vec![&a.events];
    paths.extend(a.policy.as_deref());
    paths.extend(a.idm_params.as_deref());
    paths.extend(a.vt_micro.as_deref());
    paths.extend(a.config.as_deref());
    RunManifest::new("eval", &echo, None, &paths)?.write(&a.out)?;
    Ok(())
}

pub fn compare(a: &CompareArgs) -> CliResult<()> {
    let mut summaries = Vec::new();
    for p in &a.summaries {
        let text = std::fs::read_to_string(p)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        let s: IndicatorSummary = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        summaries.push(s);
    }
    let echo = json!({ "summaries": a.summaries, "baseline": a.baseline });
    let report = build_report(&summaries, &a.baseline, echo.clone())?;
    out_dir(&a.out)?;
    write_json(&a.out.join("report.json"), &report)?;
    let table = report.render_table();
    std::fs::write(a.out.join("report.txt"), &table)?;
    print!("{table}");
    let paths: Vec<PathBuf> = a.summaries.clone();
    let refs: Vec<&Path> = paths.iter().map(PathBuf::as_path).collect();
    RunManifest::new("compare", &echo, None, &refs)?.write(&a.out)?;
    Ok(())
}
