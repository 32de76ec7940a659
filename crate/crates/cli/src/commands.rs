use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use serde_json::{json, Value};

use dpg_core::constraints::{constraint_table, evaluate_constraints, extract_all};
use dpg_core::dataset::Dataset;
use dpg_core::dpg::{build_dpg, load_dpg, Dpg};
use dpg_core::ensemble::{load_ensemble, CanonicalizationPolicy, ClassSchema, FeatureSchema};
use dpg_core::io::{
    communities_csv, config_digest, constraints_csv, export_dot, load_csv, manifest_path, ranked, ranking_csv, report,
    write_atomic, DotOptions, ReportRequest, RunManifest,
};
use dpg_core::metrics::{betweenness_centrality, community_classes, detect_communities, local_reaching_centrality};
use dpg_core::trainer::{evaluate, feature_importance_mdi, fit_forest, train_test_split, MaxFeatures, TrainConfig};

use crate::{
    BuildArgs, Command, CommunitiesArgs, ConstraintsArgs, DotArgs, Metric, MetricsArgs, ReportArgs, TrainArgs,
};

pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "usage: {msg}"),
            Failure::Data(e) => {
                // Library errors often embed their source in their own message.
                let mut shown = String::new();
                for cause in e.chain() {
                    let msg = cause.to_string();
                    if shown.contains(&msg) {
                        continue;
                    }
                    if !shown.is_empty() {
                        shown.push_str(": ");
                    }
                    shown.push_str(&msg);
                }
                f.write_str(&shown)
            }
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = Result<(), Failure>;

/// Collects what a command read and wrote, then records it in a manifest
/// beside the first output.
struct Run {
    command: &'static str,
    inputs: Vec<PathBuf>,
    config: Value,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl Run {
    fn new(command: &'static str, inputs: &[&Path], config: Value) -> Self {
        Run {
            command,
            inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
            config,
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Outcome {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
        write_atomic(path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn finish(self) -> Outcome {
        let digest = config_digest(self.command, &self.inputs, &self.config).context("cannot digest inputs")?;
        let manifest = RunManifest {
            command: self.command.to_string(),
            inputs: self.inputs,
            config_digest: digest,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: self.started.elapsed().as_millis() as u64,
            outputs: self.outputs,
        };
        let path = manifest_path(&manifest.outputs[0]);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_atomic(&path, text.as_bytes()).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

fn seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var("DPG_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("DPG_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

/// `dir/model.json` with `suffix` `eval.json` gives `dir/model.eval.json`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn pretty(v: &impl serde::Serialize) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON serializes");
    text.push('\n');
    text.into_bytes()
}

fn graph(path: &Path) -> Result<Dpg, Failure> {
    let g = load_dpg(path)?;
    for d in g.diagnostics() {
        eprintln!("dpg: warning: {d}");
    }
    Ok(g)
}

pub fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Train(a) => train(a),
        Command::Build(a) => build(a),
        Command::Metrics(a) => metrics(a),
        Command::Communities(a) => communities(a),
        Command::Constraints(a) => constraints(a),
        Command::Dot(a) => dot(a),
        Command::Report(a) => run_report(a),
    }
}

fn train(a: TrainArgs) -> Outcome {
    if !(a.test_fraction > 0.0 && a.test_fraction < 1.0) {
        return Err(Failure::Usage(format!("--test-fraction must lie in (0, 1), got {}", a.test_fraction)));
    }
    let max_features: MaxFeatures = a.max_features.parse::<MaxFeatures>().map_err(|e| Failure::Usage(e.to_string()))?;
    let cfg = TrainConfig {
        n_trees: a.trees,
        max_depth: a.max_depth,
        min_samples_split: a.min_samples_split,
        max_features,
        bootstrap: true,
        seed: seed(a.seed)?,
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut run = Run::new("train", &[&a.data], json!({"config": cfg, "test_fraction": a.test_fraction}));

    let d = load_csv(&a.data)?;
    if !d.is_labeled() {
        return Err(anyhow!("{} has no label column", a.data.display()).into());
    }
    let split = train_test_split(&d, a.test_fraction, cfg.seed)?;
    let train = d.subset(&split.train_indices);
    let test = d.subset(&split.test_indices);
    let m = fit_forest(&train, &cfg)?;
    let all_test: Vec<usize> = (0..test.n_rows()).collect();
    let eval = evaluate(&m, &test, &all_test)?;
    let importance = feature_importance_mdi(&m, &train)?;
    let importance: serde_json::Map<String, Value> =
        m.features().names().iter().cloned().zip(importance.into_iter().map(Value::from)).collect();

    run.write(&a.out, m.to_json().as_bytes())?;
    let summary = json!({
        "classes": eval.classes,
        "confusion": eval.confusion,
        "accuracy": eval.accuracy,
        "train_rows": train.n_rows(),
        "test_rows": test.n_rows(),
        "feature_importance": importance,
        "config": cfg,
        "test_fraction": a.test_fraction,
        "split": split,
    });
    run.write(&sibling(&a.out, "eval.json"), &pretty(&summary))?;
    run.write(&sibling(&a.out, "train.csv"), dpg_core::io::csv_string(&train)?.as_bytes())?;
    run.write(&sibling(&a.out, "test.csv"), dpg_core::io::csv_string(&test)?.as_bytes())?;
    eprintln!("dpg: {} trees, test accuracy {:.4} on {} rows", cfg.n_trees, eval.accuracy, test.n_rows());
    run.finish()
}

fn build(a: BuildArgs) -> Outcome {
    let mut run = Run::new("build", &[&a.model, &a.data], json!({"precision": a.precision}));
    let m = load_ensemble(&a.model)?;
    let d = load_csv(&a.data)?;
    let g = build_dpg(&m, &d, &CanonicalizationPolicy::new(a.precision))?;
    for w in g.diagnostics() {
        eprintln!("dpg: warning: {w}");
    }
    let mut text = g.to_json();
    text.push('\n');
    run.write(&a.out, text.as_bytes())?;
    eprintln!("dpg: {} nodes, {} edges", g.len(), g.edges().len());
    run.finish()
}

fn metrics(a: MetricsArgs) -> Outcome {
    let name = match a.metric {
        Metric::Bc => "bc",
        Metric::Lrc => "lrc",
    };
    let mut run = Run::new("metrics", &[&a.dpg], json!({"metric": name, "top": a.top}));
    let g = graph(&a.dpg)?;
    let r = match a.metric {
        Metric::Bc => betweenness_centrality(&g),
        Metric::Lrc => local_reaching_centrality(&g),
    };
    run.write(&a.out, ranking_csv(&ranked(&g, &r, a.top)).as_bytes())?;
    run.finish()
}

fn communities(a: CommunitiesArgs) -> Outcome {
    let seed = seed(a.seed)?;
    let mut run = Run::new("communities", &[&a.dpg], json!({"seed": seed, "max_iters": a.max_iters}));
    let g = graph(&a.dpg)?;
    let r = detect_communities(&g, seed, a.max_iters);
    let rows: Vec<Value> = community_classes(&r, &g)
        .into_iter()
        .zip(&r.communities)
        .map(|(s, members)| {
            json!({
                "community": s.community,
                "predicates": s.predicates,
                "features": s.features,
                "class": s.class_label,
                "nodes": members,
                "labels": members.iter().map(|&v| g.label(v)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = json!({"seed": seed, "sweeps": r.sweeps, "converged": r.converged, "communities": rows});
    run.write(&a.out, &pretty(&doc))?;
    if !r.converged {
        eprintln!("dpg: warning: label propagation stopped after {} sweeps without settling", r.sweeps);
    }
    run.finish()
}

fn constraints(a: ConstraintsArgs) -> Outcome {
    let mut inputs: Vec<&Path> = vec![&a.dpg];
    if let Some(p) = &a.evaluate {
        inputs.push(p);
    }
    let mut run = Run::new("constraints", &inputs, json!({"evaluate": a.evaluate.is_some()}));
    let g = graph(&a.dpg)?;
    let all = extract_all(&g)?;
    let mut doc = json!({"constraints": constraint_table(&g, &all)});
    if let Some(path) = &a.evaluate {
        let p = g.provenance();
        let d: Dataset = load_csv(path)?;
        d.check_features(&FeatureSchema::numeric(p.features.clone())?)?;
        let d = d.align_classes(&ClassSchema::new(p.classes.clone())?)?;
        let rows: Vec<usize> = (0..d.n_rows()).collect();
        let evals = all
            .iter()
            .map(|cc| evaluate_constraints(&d, &rows, cc).map(|e| json!({"class": p.classes[cc.class], "report": e})))
            .collect::<Result<Vec<_>, _>>()?;
        doc["evaluation"] = Value::Array(evals);
    }
    run.write(&a.out, &pretty(&doc))?;
    run.finish()
}

fn dot(a: DotArgs) -> Outcome {
    let seed = seed(a.seed)?;
    let mut run = Run::new(
        "dot",
        &[&a.dpg],
        json!({
            "color_by_community": a.color_by_community,
            "highlight_classes": a.highlight_classes,
            "seed": seed,
            "max_iters": a.max_iters,
        }),
    );
    let g = graph(&a.dpg)?;
    let r = a.color_by_community.then(|| detect_communities(&g, seed, a.max_iters));
    let doc = export_dot(&g, &DotOptions { communities: r.as_ref(), highlight_classes: a.highlight_classes })?;
    run.write(&a.out, doc.text.as_bytes())?;
    run.finish()
}

fn run_report(a: ReportArgs) -> Outcome {
    let seed = seed(a.seed)?;
    let mut req = ReportRequest::default();
    for s in a.sections.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        match s {
            "constraints" => req.constraints = true,
            "bc" => req.betweenness = Some(a.top),
            "lrc" => req.local_reaching = Some(a.top),
            "communities" => req.communities = Some((seed, a.max_iters)),
            other => return Err(Failure::Usage(format!("unknown report section {other:?}"))),
        }
    }
    let mut run = Run::new(
        "report",
        &[&a.dpg],
        json!({"sections": a.sections, "top": a.top, "seed": seed, "max_iters": a.max_iters}),
    );
    let g = graph(&a.dpg)?;
    let bundle = report(&g, &req);
    run.write(&a.out, &pretty(&bundle))?;
    if let Some(t) = &bundle.constraints {
        run.write(&sibling(&a.out, "constraints.csv"), constraints_csv(t).as_bytes())?;
    }
    if let Some(t) = &bundle.betweenness {
        run.write(&sibling(&a.out, "bc.csv"), ranking_csv(t).as_bytes())?;
    }
    if let Some(t) = &bundle.local_reaching {
        run.write(&sibling(&a.out, "lrc.csv"), ranking_csv(t).as_bytes())?;
    }
    if let Some(t) = &bundle.communities {
        run.write(&sibling(&a.out, "communities.csv"), communities_csv(t).as_bytes())?;
    }
    run.finish()
}
