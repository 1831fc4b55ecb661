// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use relgraph_core::dataset::{
    examples, load_labels, load_samples, make_samples, save_labels, save_samples,
    split_design_dataset, split_self_referencing, split_single_design, Label, LabelRecord,
    LabelValue, LabeledSample, Scenario, Split, Target,
};
use relgraph_core::graph::extract_timing_paths;
use relgraph_core::netlist::{write_canonical, CellCatalog};
use relgraph_core::pna::{checkpoint, fit, mae, mape, EpochRecord, PnaConfig, TrainConfig};
use relgraph_core::sta::{
    baseline_delays, compute_arrivals, generate_synthetic_netlist, label_aging,
    label_process_variation, AgingParams, SynthConfig,
};
use serde::{Deserialize, Serialize};

use crate::files::{
    create, load_design, read_library, read_netlist, read_paths, write_json, write_json_lines,
    write_text, PathList,
};
use crate::{
    AllArgs, ConvertArgs, EvalArgs, ExtractArgs, LabelArgs, LabelMode, LabelOpts, PathsArgs,
    PredictArgs, SplitArgs, SynthOpts, TrainOpts,
};

pub fn convert(args: &ConvertArgs) -> Result<()> {
    let net = read_netlist(&args.netlist, &CellCatalog::default())?;
    write_text(&args.out, &write_canonical(&net))
}

/// Design `i` uses seed `seed + i`; returns the written files.
pub fn synth(opts: &SynthOpts, out: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    ensure!(
        opts.designs >= 1 && opts.gates >= 1,
        "--designs and --gates must be at least 1"
    );
    let cat = CellCatalog::default();
    (0..opts.designs as u64)
        .map(|i| {
            let cfg = SynthConfig::new(opts.gates, opts.depth, seed.wrapping_add(i));
            let net = generate_synthetic_netlist(&cfg, &cat);
            let path = out.join(format!("{}.json", net.name));
            write_text(&path, &write_canonical(&net))?;
            Ok(path)
        })
        .collect()
}

pub fn paths(args: &PathsArgs) -> Result<()> {
    let cat = CellCatalog::default();
    let lib = read_library(args.library.as_deref())?;
    let design = load_design(&args.netlist, &cat)?;
    let list = select_paths(&design, &lib, args.count as usize, args.flops_only)?;
    write_json(&args.out, &list)
}

fn select_paths(
    design: &crate::files::Design,
    lib: &relgraph_core::sta::DelayLibrary,
    count: usize,
    flops_only: bool,
) -> Result<PathList> {
    let arrival = compute_arrivals(&design.graph, lib, None)?;
    let endpoints = design.graph.endpoints(flops_only).len();
    if count > endpoints {
        eprintln!(
            "warning: {} has {endpoints} end points, fewer than the {count} paths requested",
            design.netlist.name
        );
    }
    let paths = extract_timing_paths(&design.graph, &arrival, count, flops_only)?;
    Ok(PathList {
        design: design.netlist.name.clone(),
        flops_only,
        paths,
    })
}

pub fn label(args: &LabelArgs, seed: u64) -> Result<()> {
    let cat = CellCatalog::default();
    let lib = read_library(args.library.as_deref())?;
    let design = load_design(&args.netlist, &cat)?;
    let list = read_paths(&args.paths, &design)?;
    let records = label_paths(&design, &lib, &list, &args.label, seed)?;
    save_labels(&args.out, &records).with_context(|| format!("writing {}", args.out.display()))
}

fn label_paths(
    design: &crate::files::Design,
    lib: &relgraph_core::sta::DelayLibrary,
    list: &PathList,
    opts: &LabelOpts,
    seed: u64,
) -> Result<Vec<LabelRecord>> {
    let measure = opts.measure.into();
    let (net, graph) = (&design.netlist, &design.graph);
    let baseline = baseline_delays(graph, lib, &list.paths, measure)?;
    let values: Vec<LabelValue> = match opts.mode {
        LabelMode::Variation => label_process_variation(
            net,
            graph,
            lib,
            &list.paths,
            opts.instances as usize,
            seed,
            measure,
        )?
        .into_iter()
        .map(LabelValue::Variation)
        .collect(),
        LabelMode::Aging => {
            let params = AgingParams {
                stress_mode: opts.stress.into(),
                global_scale: opts.aging_scale,
            };
            label_aging(net, graph, lib, &list.paths, &params, seed, measure)?
                .into_iter()
                .map(LabelValue::Aging)
                .collect()
        }
    };
    Ok(values
        .into_iter()
        .zip(baseline)
        .enumerate()
        .map(|(i, (value, baseline_ps))| LabelRecord {
            design: net.name.clone(),
            path_index: i,
            baseline_ps,
            value,
        })
        .collect())
}

pub fn extract(args: &ExtractArgs) -> Result<()> {
    let design = load_design(&args.netlist, &CellCatalog::default())?;
    let list = read_paths(&args.paths, &design)?;
    let labels = match &args.labels {
        Some(p) => Some(aligned_labels(
            &load_labels(p).with_context(|| format!("reading {}", p.display()))?,
            &list,
        )?),
        None => None,
    };
    let samples = make_samples(
        &design.netlist.name,
        &design.graph,
        &design.features,
        &list.paths,
        labels.as_deref(),
        args.hop,
    );
    save_samples(&args.out, &samples).with_context(|| format!("writing {}", args.out.display()))
}

/// Orders label records by path index; every path needs exactly one.
fn aligned_labels(records: &[LabelRecord], list: &PathList) -> Result<Vec<Label>> {
    let mut out: Vec<Option<Label>> = vec![None; list.paths.len()];
    for (line, r) in records.iter().enumerate() {
        let record = format!(
            "label record {} ({} path {})",
            line + 1,
            r.design,
            r.path_index
        );
        ensure!(
            r.design == list.design,
            "{record} belongs to another design than `{}`",
            list.design
        );
        let slot = out
            .get_mut(r.path_index)
            .ok_or_else(|| anyhow!("{record} has no matching path"))?;
        ensure!(slot.is_none(), "{record} duplicates an earlier record");
        *slot = Some(r.value.into());
    }
    out.into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| anyhow!("path {i} of {} has no label", list.design)))
        .collect()
}

pub fn split(args: &SplitArgs, seed: u64) -> Result<()> {
    let mut samples = Vec::new();
    for p in &args.samples {
        samples.extend(load_samples(p).with_context(|| format!("reading {}", p.display()))?);
    }
    let split = make_split(samples, args.scenario, args.held_out.as_deref(), seed)?;
    write_split(&split, &args.out)
}

fn designs_of(samples: &[LabeledSample]) -> Vec<String> {
    let mut names: Vec<String> = samples.iter().map(|s| s.design.clone()).collect();
    names.sort_unstable();
    names.dedup();
    names
}

fn make_split(
    samples: Vec<LabeledSample>,
    scenario: Scenario,
    held_out: Option<&str>,
    seed: u64,
) -> Result<Split> {
    let designs = designs_of(&samples);
    if let Some(h) = held_out {
        ensure!(
            designs.iter().any(|d| d == h),
            "held-out design `{h}` is not in the samples"
        );
    }
    let split = match scenario {
        Scenario::SelfReferencing => {
            let design = match held_out {
                Some(h) => h.to_string(),
                None if designs.len() == 1 => designs[0].clone(),
                None => bail!(
                    "self_referencing over {} designs needs --held-out",
                    designs.len()
                ),
            };
            let own = samples.into_iter().filter(|s| s.design == design).collect();
            split_self_referencing(own, seed)?
        }
        Scenario::SingleDesign => {
            let h = held_out.ok_or_else(|| anyhow!("single_design needs --held-out"))?;
            ensure!(
                designs.len() == 2,
                "single_design needs exactly two designs, got {}",
                designs.len()
            );
            let (test, train) = samples.into_iter().partition(|s| s.design == h);
            split_single_design(train, test, seed)?
        }
        Scenario::DesignDataset => {
            let h = held_out.ok_or_else(|| anyhow!("design_dataset needs --held-out"))?;
            split_design_dataset(samples, h, seed)?
        }
    };
    Ok(split)
}

fn write_split(split: &Split, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (name, set) in [
        ("train", &split.train),
        ("val", &split.val),
        ("test", &split.test),
    ] {
        let path = out.join(format!("{name}.jsonl"));
        save_samples(&path, set).with_context(|| format!("writing {}", path.display()))?;
    }
    write_json(&out.join("manifest.json"), &split.manifest())
}

/// Contents of `report.json`; wall time is printed, not stored, so that
/// reruns write identical files.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub target: Target,
    pub train_size: usize,
    pub val_size: usize,
    pub parameters: usize,
    pub best_epoch: usize,
    pub best_val_mae: f64,
    pub config: TrainConfig,
}

pub fn train(split_dir: &Path, opts: &TrainOpts, out: &Path, seed: u64) -> Result<()> {
    let load = |name: &str| {
        let p = split_dir.join(format!("{name}.jsonl"));
        load_samples(&p).with_context(|| format!("reading {}", p.display()))
    };
    let (train_samples, val_samples) = (load("train")?, load("val")?);
    let train_set = examples(&train_samples, opts.target)?;
    let val_set = examples(&val_samples, opts.target)?;
    ensure!(
        !train_set.is_empty(),
        "training set in {} is empty",
        split_dir.display()
    );
    let cfg = TrainConfig {
        epochs: opts.epochs as usize,
        lr: opts.lr,
        batch_size: opts.batch_size as usize,
        seed,
        standardize: opts.standardize,
        ..TrainConfig::default()
    };
    let log_path = out.join("train_log.jsonl");
    let mut log = BufWriter::new(create(&log_path)?);
    let mut log_error = None;
    let (model, report) = fit(
        PnaConfig::new(train_set[0].0.feature_width, 1.0),
        &train_set,
        &val_set,
        &cfg,
        |r: &EpochRecord| {
            let line = serde_json::to_string(r).expect("epoch record serializes");
            if let Err(e) = writeln!(log, "{line}").and_then(|_| log.flush()) {
                log_error.get_or_insert(e);
            }
            if r.epoch.is_multiple_of(10) || r.epoch == cfg.epochs {
                eprintln!(
                    "epoch {:>4}  train MAE {:.4}  val MAE {:.4}",
                    r.epoch, r.train_mae, r.val_mae
                );
            }
        },
    )?;
    if let Some(e) = log_error {
        return Err(e).with_context(|| format!("writing {}", log_path.display()));
    }
    checkpoint::save(&model, out.join("model.ckpt"))?;
    write_json(
        &out.join("report.json"),
        &RunReport {
            target: opts.target,
            train_size: train_set.len(),
            val_size: val_set.len(),
            parameters: model.parameter_count(),
            best_epoch: report.best_epoch,
            best_val_mae: report.best_val_mae,
            config: cfg,
        },
    )?;
    eprintln!(
        "kept epoch {} (val MAE {:.4}) after {:.1} s",
        report.best_epoch, report.best_val_mae, report.wall_time_s
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub design: String,
    pub path_index: usize,
    pub prediction: f64,
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    ensure!(
        args.model.is_file(),
        "checkpoint {} does not exist",
        args.model.display()
    );
    let model = checkpoint::load(&args.model)
        .with_context(|| format!("loading {}", args.model.display()))?;
    let samples = load_samples(&args.samples)
        .with_context(|| format!("reading {}", args.samples.display()))?;
    let graphs: Vec<_> = samples.iter().map(|s| &s.subgraph).collect();
    let preds = model.predict_graphs(&graphs)?;
    write_json_lines(
        &args.out,
        samples.iter().zip(preds).map(|(s, p)| Prediction {
            design: s.design.clone(),
            path_index: s.path_index,
            prediction: p,
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub target: Target,
    pub count: usize,
    pub mae: f64,
    /// Absent when some label is zero.
    pub mape_pct: Option<f64>,
}

fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .with_context(|| format!("{} line {}", path.display(), i + 1))?,
        );
    }
    Ok(out)
}

pub fn eval(args: &EvalArgs) -> Result<Metrics> {
    let preds = read_predictions(&args.predictions)?;
    ensure!(
        !preds.is_empty(),
        "{} holds no predictions",
        args.predictions.display()
    );
    let mut labels = BTreeMap::new();
    for p in &args.labels {
        for r in load_labels(p).with_context(|| format!("reading {}", p.display()))? {
            labels.insert((r.design.clone(), r.path_index), Label::from(r.value));
        }
    }
    let mut truth = Vec::with_capacity(preds.len());
    for p in &preds {
        let label = labels
            .get(&(p.design.clone(), p.path_index))
            .ok_or_else(|| anyhow!("no label for {} path {}", p.design, p.path_index))?;
        truth.push(label.get(args.target).ok_or_else(|| {
            anyhow!(
                "label of {} path {} has no `{}` value",
                p.design,
                p.path_index,
                args.target
            )
        })?);
    }
    let yhat: Vec<f64> = preds.iter().map(|p| p.prediction).collect();
    let metrics = Metrics {
        target: args.target,
        count: truth.len(),
        mae: mae(&truth, &yhat)?,
        mape_pct: match mape(&truth, &yhat) {
            Ok(v) => Some(v),
            Err(e) => {
                eprintln!("warning: MAPE undefined: {e}");
                None
            }
        },
    };
    let text = serde_json::to_string_pretty(&metrics)? + "\n";
    print!("{text}");
    if let Some(out) = &args.out {
        write_text(out, &text)?;
    }
    Ok(metrics)
}

pub fn all(args: &AllArgs, seed: u64) -> Result<()> {
    let out = &args.out;
    let netlists = if args.netlist.is_empty() {
        synth(&args.synth, &out.join("netlists"), seed)?
    } else {
        args.netlist.clone()
    };
    let cat = CellCatalog::default();
    let lib = read_library(args.library.as_deref())?;
    let mut sample_files = Vec::new();
    let mut label_files = Vec::new();
    let mut last = None;
    for path in &netlists {
        let design = load_design(path, &cat)?;
        let dir = out.join(&design.netlist.name);
        eprintln!("{}: paths, labels and subgraphs", design.netlist.name);
        let list = select_paths(&design, &lib, args.count as usize, false)?;
        write_json(&dir.join("paths.json"), &list)?;
        let records = label_paths(&design, &lib, &list, &args.label, seed)?;
        save_labels(dir.join("labels.jsonl"), &records)?;
        label_files.push(dir.join("labels.jsonl"));
        let labels: Vec<Label> = records.iter().map(|r| r.value.into()).collect();
        let samples = make_samples(
            &design.netlist.name,
            &design.graph,
            &design.features,
            &list.paths,
            Some(&labels),
            args.hop,
        );
        save_samples(dir.join("samples.jsonl"), &samples)?;
        sample_files.push(dir.join("samples.jsonl"));
        last = Some(design.netlist.name);
    }
    let held_out = args.held_out.clone().or(last);
    let mut samples = Vec::new();
    for p in &sample_files {
        samples.extend(load_samples(p)?);
    }
    let split = make_split(samples, args.scenario, held_out.as_deref(), seed)?;
    write_split(&split, &out.join("split"))?;
    train(&out.join("split"), &args.train, &out.join("model"), seed)?;
    predict(&PredictArgs {
        model: out.join("model").join("model.ckpt"),
        samples: out.join("split").join("test.jsonl"),
        out: out.join("predictions.jsonl"),
    })?;
    eval(&EvalArgs {
        predictions: out.join("predictions.jsonl"),
        labels: label_files,
        target: args.train.target,
        out: Some(out.join("metrics.json")),
    })?;
    Ok(())
}
