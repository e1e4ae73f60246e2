//! `analyze` and `baseline` reports.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;
use std::time::Instant;

use homophily_core::coloring::random_coloring_like;
use homophily_core::{
    covariance_structure, load_coloring, load_edge_list, Coloring, CovarianceStructure, Graph,
    GraphSummary, IndexOptions, IndexReport, LoadOptions, MomentSummary, Nu, Preset, Quantity,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub presets: Vec<Preset>,
    pub nu: Nu,
    pub dedupe: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            presets: Preset::ALL.to_vec(),
            nu: Nu::default(),
            dedupe: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphStats {
    pub n: u64,
    pub m: u64,
    pub density: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub dispersion: Quantity,
    pub pi3: u64,
    pub gamma: Quantity,
}

impl GraphStats {
    fn new(s: &GraphSummary) -> Self {
        GraphStats {
            n: s.n,
            m: s.m,
            density: s.density,
            delta1: s.delta1,
            delta2: s.delta2,
            dispersion: match s.dispersion {
                Some(u) => Quantity::from(u),
                None => Quantity::Undefined("graph has no edges".into()),
            },
            pi3: s.pi3,
            gamma: match s.gamma() {
                Some(g) => Quantity::from(g),
                None => Quantity::Undefined("fewer than 4 vertices".into()),
            },
        }
    }
}

/// The index values, with the complements used for significance-style reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexBlock {
    pub a: Quantity,
    pub one_minus_a: Quantity,
    /// `(1 - a) * 1e6`, derived from `one_minus_a`.
    pub one_minus_a_e6: Quantity,
    pub r: Quantity,
    pub one_minus_r: Quantity,
    pub h: Quantity,
    pub j_theta: BTreeMap<String, Quantity>,
    pub newman_q: Quantity,
    pub descriptive_ratio: Quantity,
}

impl IndexBlock {
    pub fn new(r: &IndexReport) -> Self {
        let one_minus_a = r.a.map(|a| 1.0 - a);
        IndexBlock {
            a: r.a.clone(),
            one_minus_a_e6: one_minus_a.map(|x| x * 1e6),
            one_minus_a,
            r: r.r.clone(),
            one_minus_r: r.r.map(|x| 1.0 - x),
            h: r.h.clone(),
            j_theta: r
                .j_theta
                .iter()
                .map(|p| (p.preset.name().to_string(), p.value.clone()))
                .collect(),
            newman_q: r.newman_q.clone(),
            descriptive_ratio: r.descriptive_ratio.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub load_ms: f64,
    pub compute_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub tool_version: &'static str,
    pub seeds: Vec<u64>,
    pub graph: GraphStats,
    pub profile: Vec<u64>,
    pub class_labels: Vec<String>,
    pub nu: Nu,
    pub observed: Vec<u64>,
    pub mbar: Vec<f64>,
    pub var: Vec<f64>,
    pub z: Vec<Quantity>,
    pub indices: IndexBlock,
    pub notes: Vec<String>,
    pub timing: Timing,
}

pub fn load_graph(path: &Path, dedupe: bool) -> Result<Graph, CliError> {
    let wrap = |source| CliError::Graph {
        path: path.display().to_string(),
        source,
    };
    let file = File::open(path).map_err(|e| wrap(homophily_core::GraphError::Io(e.to_string())))?;
    load_edge_list(file, LoadOptions { dedupe }).map_err(wrap)
}

pub fn load_coloring_file(path: &Path, g: &Graph) -> Result<Coloring, CliError> {
    let wrap = |source| CliError::Coloring {
        path: path.display().to_string(),
        source,
    };
    let file = File::open(path).map_err(|e| wrap(homophily_core::ColoringError::Io(e.to_string())))?;
    load_coloring(file, g).map_err(wrap)
}

struct Model {
    summary: GraphSummary,
    ms: MomentSummary,
    cs: CovarianceStructure,
}

impl Model {
    fn new(g: &Graph, f: &Coloring) -> Self {
        let summary = g.summarize();
        let ms = MomentSummary::compute(&summary, f.profile());
        let cs = covariance_structure(&summary, f.profile(), &ms);
        Model { summary, ms, cs }
    }

    fn indices(&self, g: &Graph, f: &Coloring, opts: &AnalyzeOptions) -> IndexReport {
        let io = IndexOptions {
            presets: opts.presets.clone(),
            nu: opts.nu,
        };
        IndexReport::compute(g, f, &self.summary, &self.ms, &self.cs, &io)
    }
}

/// Builds the full report for an in-memory graph and coloring.
pub fn analyze(g: &Graph, f: &Coloring, opts: &AnalyzeOptions) -> AnalyzeReport {
    let start = Instant::now();
    let model = Model::new(g, f);
    let idx = model.indices(g, f, opts);
    let z = idx
        .z
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            if idx.active_set.binary_search(&i).is_ok() {
                Quantity::from(z)
            } else {
                Quantity::Undefined("zero variance".into())
            }
        })
        .collect();
    let compute_ms = ms_since(start);
    AnalyzeReport {
        tool_version: TOOL_VERSION,
        seeds: Vec::new(),
        graph: GraphStats::new(&model.summary),
        profile: f.profile().sizes().to_vec(),
        class_labels: f.class_labels().to_vec(),
        nu: opts.nu,
        observed: idx.observed.0.clone(),
        mbar: model.ms.mbar.clone(),
        var: model.ms.var.clone(),
        z,
        indices: IndexBlock::new(&idx),
        notes: idx.notes,
        timing: Timing {
            load_ms: 0.0,
            compute_ms,
            total_ms: compute_ms,
        },
    }
}

pub fn analyze_files(graph: &Path, coloring: &Path, opts: &AnalyzeOptions) -> Result<AnalyzeReport, CliError> {
    let start = Instant::now();
    let g = load_graph(graph, opts.dedupe)?;
    let f = load_coloring_file(coloring, &g)?;
    let load_ms = ms_since(start);
    let mut report = analyze(&g, &f, opts);
    report.timing.load_ms = load_ms;
    report.timing.total_ms = ms_since(start);
    Ok(report)
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub seed: u64,
    pub observed: Vec<u64>,
    pub indices: IndexBlock,
}

/// Indices under random recolorings. Contains no timing, so a fixed seed
/// reproduces the report byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineReport {
    pub tool_version: &'static str,
    pub seeds: Vec<u64>,
    pub samples: u64,
    pub profile: Vec<u64>,
    pub class_labels: Vec<String>,
    pub per_sample: Vec<Sample>,
    /// Means over the samples in which each index is defined.
    pub means: IndexBlock,
}

/// Draws `samples` colorings with seeds `seed, seed + 1, ...` in parallel.
pub fn baseline(g: &Graph, f: &Coloring, samples: u64, seed: u64, opts: &AnalyzeOptions) -> BaselineReport {
    assert!(samples >= 1, "need at least one sample");
    let model = Model::new(g, f);
    let seeds: Vec<u64> = (0..samples).map(|k| seed.wrapping_add(k)).collect();
    let per_sample: Vec<Sample> = seeds
        .par_iter()
        .map(|&s| {
            let sample = random_coloring_like(f, s);
            let idx = model.indices(g, &sample, opts);
            Sample {
                seed: s,
                observed: idx.observed.0.clone(),
                indices: IndexBlock::new(&idx),
            }
        })
        .collect();
    let blocks: Vec<&IndexBlock> = per_sample.iter().map(|s| &s.indices).collect();
    BaselineReport {
        tool_version: TOOL_VERSION,
        samples,
        profile: f.profile().sizes().to_vec(),
        class_labels: f.class_labels().to_vec(),
        means: mean_block(&blocks),
        per_sample,
        seeds,
    }
}

pub fn baseline_files(
    graph: &Path,
    coloring: &Path,
    samples: u64,
    seed: u64,
    opts: &AnalyzeOptions,
) -> Result<BaselineReport, CliError> {
    let g = load_graph(graph, opts.dedupe)?;
    let f = load_coloring_file(coloring, &g)?;
    Ok(baseline(&g, &f, samples, seed, opts))
}

fn mean<'a>(values: impl Iterator<Item = &'a Quantity>) -> Quantity {
    let (sum, count) = values
        .filter_map(Quantity::value)
        .fold((0.0, 0u64), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        Quantity::Undefined("undefined in every sample".into())
    } else {
        Quantity::from(sum / count as f64)
    }
}

fn mean_block(blocks: &[&IndexBlock]) -> IndexBlock {
    let field = |get: fn(&IndexBlock) -> &Quantity| mean(blocks.iter().map(|b| get(b)));
    let j_theta = blocks[0]
        .j_theta
        .keys()
        .map(|k| (k.clone(), mean(blocks.iter().filter_map(|b| b.j_theta.get(k)))))
        .collect();
    IndexBlock {
        a: field(|b| &b.a),
        one_minus_a: field(|b| &b.one_minus_a),
        one_minus_a_e6: field(|b| &b.one_minus_a_e6),
        r: field(|b| &b.r),
        one_minus_r: field(|b| &b.one_minus_r),
        h: field(|b| &b.h),
        j_theta,
        newman_q: field(|b| &b.newman_q),
        descriptive_ratio: field(|b| &b.descriptive_ratio),
    }
}

/// Flattens any serializable report into `path<TAB>value` lines. Nested
/// keys are joined with `.`, array elements are addressed by index.
pub fn to_tsv<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let json = serde_json::to_value(value)?;
    let mut out = String::from("field\tvalue\n");
    flatten("", &json, &mut out);
    Ok(out)
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&join(k), child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), child, out);
            }
        }
        Value::String(s) => {
            out.push_str(prefix);
            out.push('\t');
            out.push_str(&s.replace(['\t', '\n'], " "));
            out.push('\n');
        }
        other => {
            out.push_str(prefix);
            out.push('\t');
            out.push_str(&other.to_string());
            out.push('\n');
        }
    }
}

/// Every key path in a JSON value, with array positions collapsed to `[]`.
pub fn field_paths(v: &Value) -> std::collections::BTreeSet<String> {
    fn walk(prefix: &str, v: &Value, out: &mut std::collections::BTreeSet<String>) {
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    out.insert(path.clone());
                    walk(&path, child, out);
                }
            }
            Value::Array(items) => {
                let path = format!("{prefix}[]");
                for child in items {
                    walk(&path, child, out);
                }
            }
            _ => {}
        }
    }
    let mut out = std::collections::BTreeSet::new();
    walk("", v, &mut out);
    out
}
