// SPDX-License-Identifier: Apache-2.0

//! Synthesizes one design, labels its worst paths under process variation,
//! trains a small PNA model on the self-referencing split and reports test
//! MAE against the predict-the-mean baseline.
//!
//! `cargo run --release -p relgraph-core --example quickstart`

use relgraph_core::dataset::{examples, make_samples, split_self_referencing, Label, Target};
use relgraph_core::graph::{build_graph, encode_features, extract_timing_paths, PathSubgraph};
use relgraph_core::netlist::CellCatalog;
use relgraph_core::pna::{fit, mae, PnaConfig, TrainConfig};
use relgraph_core::sta::{
    compute_arrivals, generate_synthetic_netlist, label_process_variation, DelayLibrary,
    DelayMeasure, SynthConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cat = CellCatalog::default();
    let lib = DelayLibrary::default();
    let net = generate_synthetic_netlist(&SynthConfig::new(800, 10, 7), &cat);
    let graph = build_graph(&net, &cat)?;
    let features = encode_features(&graph, &cat)?;
    let arrival = compute_arrivals(&graph, &lib, None)?;
    let paths = extract_timing_paths(&graph, &arrival, 400, false)?;
    let labels: Vec<Label> =
        label_process_variation(&net, &graph, &lib, &paths, 50, 7, DelayMeasure::Endpoint)?
            .into_iter()
            .map(Label::from)
            .collect();
    let samples = make_samples(&net.name, &graph, &features, &paths, Some(&labels), 1);
    let split = split_self_referencing(samples, 7)?;
    println!("{}: split {:?}", net.name, split.sizes());

    let train = examples(&split.train, Target::Mu)?;
    let val = examples(&split.val, Target::Mu)?;
    let test = examples(&split.test, Target::Mu)?;
    let model_cfg = PnaConfig {
        hidden: 30,
        layers: 3,
        towers: 3,
        ..PnaConfig::new(features.width, 1.0)
    };
    let cfg = TrainConfig {
        epochs: 30,
        seed: 7,
        standardize: true,
        ..TrainConfig::default()
    };
    let (model, report) = fit(model_cfg, &train, &val, &cfg, |r| {
        println!(
            "epoch {:>3}  train {:.4}  val {:.4}",
            r.epoch, r.train_mae, r.val_mae
        );
    })?;

    let graphs: Vec<&PathSubgraph> = test.iter().map(|e| e.0).collect();
    let truth: Vec<f64> = test.iter().map(|e| e.1).collect();
    let preds = model.predict_graphs(&graphs)?;
    let mean = train.iter().map(|e| e.1).sum::<f64>() / train.len() as f64;
    println!(
        "best epoch {}: test MAE {:.4}, mean baseline {:.4}",
        report.best_epoch,
        mae(&truth, &preds)?,
        mae(&truth, &vec![mean; truth.len()])?
    );
    Ok(())
}
