//! Homophily quantifiers built on the exact moments.
//!
//! The score-based indices (`a`, `r`, and the weighted family `j`) all share
//! one shape: for a centred score `t` with variance `v`, the one-sided
//! Cantelli bound gives `P(score >= t) <= v / (t^2 + v)`, and the index is
//! `sgn(t) * t^2 / (t^2 + v)`, the complement of that bound.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::coloring::{Coloring, ObservedOutcome, Profile};
use crate::graph::{Graph, GraphSummary};
use crate::moments::{CovarianceStructure, MomentSummary, DEGENERACY_TOL};

/// An index that has no value on the given input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("undefined: {0}")]
pub struct Undefined(pub String);

impl Undefined {
    fn new(reason: impl Into<String>) -> Self {
        Undefined(reason.into())
    }
}

pub const ALL_DEGENERATE: &str = "all classes degenerate";

/// A reported number, or the reason it does not exist.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Value(f64),
    Undefined(String),
}

impl Quantity {
    pub fn value(&self) -> Option<f64> {
        match self {
            Quantity::Value(v) => Some(*v),
            Quantity::Undefined(_) => None,
        }
    }

    pub fn map(&self, f: impl FnOnce(f64) -> f64) -> Quantity {
        match self {
            Quantity::Value(v) => Quantity::from(f(*v)),
            Quantity::Undefined(r) => Quantity::Undefined(r.clone()),
        }
    }
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Quantity::Value(v)
        } else {
            Quantity::Undefined(format!("non-finite result {v}"))
        }
    }
}

impl From<Option<f64>> for Quantity {
    fn from(v: Option<f64>) -> Self {
        match v {
            Some(v) => Quantity::from(v),
            None => Quantity::Undefined("not applicable".into()),
        }
    }
}

impl From<Result<f64, Undefined>> for Quantity {
    fn from(r: Result<f64, Undefined>) -> Self {
        match r {
            Ok(v) => Quantity::from(v),
            Err(Undefined(reason)) => Quantity::Undefined(reason),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Quantity::Value(v) => serializer.serialize_f64(*v),
            Quantity::Undefined(reason) => serializer.serialize_str(&format!("undefined: {reason}")),
        }
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `sgn(t) t^2 / (t^2 + v)`; a vanishing variance saturates at `sgn(t)`.
fn cantelli_index(t: f64, v: f64, v_tol: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if v <= v_tol {
        return sgn(t);
    }
    let t2 = t * t;
    sgn(t) * t2 / (t2 + v)
}

/// Observed z-scores. Classes outside `active_set` have zero variance and
/// carry `z = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZScores {
    pub z: Vec<f64>,
    pub active_set: Vec<usize>,
}

impl ZScores {
    pub fn active_values(&self) -> Vec<f64> {
        self.active_set.iter().map(|&i| self.z[i]).collect()
    }

    pub fn is_active(&self, class: usize) -> bool {
        self.active_set.binary_search(&class).is_ok()
    }
}

pub fn z_scores(o: &ObservedOutcome, ms: &MomentSummary) -> ZScores {
    assert_eq!(o.counts().len(), ms.classes(), "dimension mismatch");
    let active_set = ms.active_set();
    let sd = ms.std_dev();
    let mut z = vec![0.0; ms.classes()];
    for &i in &active_set {
        z[i] = (o.counts()[i] as f64 - ms.mbar[i]) / sd[i];
    }
    ZScores { z, active_set }
}

/// Index `a`: Cantelli complement for the mean z-score over the active set.
pub fn index_a(z: &ZScores, cs: &CovarianceStructure) -> Result<f64, Undefined> {
    let sa = z.active_set.len();
    if sa == 0 {
        return Err(Undefined::new(ALL_DEGENERATE));
    }
    // s_a * A(z) is just the sum of the active z-scores.
    let active = z.active_values();
    let mut total: f64 = active.iter().sum();
    if total.abs() <= DEGENERACY_TOL * active.iter().map(|x| x.abs()).sum::<f64>() {
        total = 0.0;
    }
    let g = cs.corr.total();
    Ok(cantelli_index(total, g, DEGENERACY_TOL * sa as f64))
}

/// Index `h`: Chebyshev complement for the Mahalanobis norm of `z`.
pub fn index_h(z: &ZScores, cs: &CovarianceStructure) -> Result<f64, Undefined> {
    let sa = z.active_set.len();
    if sa == 0 {
        return Err(Undefined::new(ALL_DEGENERATE));
    }
    let inv = cs.corr_inv.as_ref().ok_or_else(|| {
        Undefined::new("correlation matrix is singular on the active set")
    })?;
    let norm2 = mahalanobis_sq(&z.active_values(), inv);
    if norm2 <= 0.0 {
        return Ok(0.0);
    }
    Ok(((norm2 - sa as f64) / norm2).max(0.0))
}

/// `x' A x`, the squared norm induced by `A`.
pub fn mahalanobis_sq(x: &[f64], inv: &crate::matrix::Matrix) -> f64 {
    inv.quadratic_form(x)
}

/// Which built-in weighting a [`WeightVector`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Ratio,
    AvgInternalDegree,
    Dyadicity,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Ratio, Preset::AvgInternalDegree, Preset::Dyadicity];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Ratio => "ratio",
            Preset::AvgInternalDegree => "avg_internal_degree",
            Preset::Dyadicity => "dyadicity",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ratio" => Ok(Preset::Ratio),
            "avgdeg" | "avg_internal_degree" => Ok(Preset::AvgInternalDegree),
            "dyadicity" => Ok(Preset::Dyadicity),
            other => Err(format!("unknown preset {other:?}")),
        }
    }
}

/// Scale `nu` for the average-internal-degree weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Nu {
    /// `1 / max degree`
    #[default]
    MaxDegree,
    /// `1 / s`
    Classes,
    /// `1 / average degree = n / 2m`
    AvgDegree,
}

impl FromStr for Nu {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "maxdeg" => Ok(Nu::MaxDegree),
            "classes" => Ok(Nu::Classes),
            "avgdeg" => Ok(Nu::AvgDegree),
            other => Err(format!("unknown nu choice {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTag {
    Preset(Preset),
    Custom,
}

/// Nonnegative, not-all-zero class weights defining a linear score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    pub w: Vec<f64>,
    pub tag: WeightTag,
}

impl WeightVector {
    pub fn custom(w: Vec<f64>) -> Result<Self, Undefined> {
        Self::tagged(w, WeightTag::Custom)
    }

    fn tagged(w: Vec<f64>, tag: WeightTag) -> Result<Self, Undefined> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Undefined::new("weights must be finite and nonnegative"));
        }
        if w.iter().all(|&x| x == 0.0) {
            return Err(Undefined::new("all weights are zero"));
        }
        Ok(WeightVector { w, tag })
    }
}

pub fn weight_preset(
    preset: Preset,
    s: &GraphSummary,
    p: &Profile,
    nu: Nu,
) -> Result<WeightVector, Undefined> {
    let classes = p.classes() as f64;
    let w = match preset {
        Preset::Ratio => {
            if s.m == 0 {
                return Err(Undefined::new("graph has no edges"));
            }
            vec![1.0 / s.m as f64; p.classes()]
        }
        Preset::AvgInternalDegree => {
            let scale = match nu {
                Nu::MaxDegree if s.max_degree > 0 => 1.0 / s.max_degree as f64,
                Nu::AvgDegree if s.m > 0 => s.n as f64 / (2.0 * s.m as f64),
                Nu::Classes => 1.0 / classes,
                _ => return Err(Undefined::new("graph has no edges")),
            };
            p.sizes().iter().map(|&c| scale * 2.0 / c as f64).collect()
        }
        Preset::Dyadicity => p
            .sizes()
            .iter()
            .map(|&c| {
                if c < 2 {
                    0.0
                } else {
                    2.0 / (classes * (c * (c - 1)) as f64)
                }
            })
            .collect(),
    };
    WeightVector::tagged(w, WeightTag::Preset(preset))
}

/// Index `j` for the linear score `w'(m - E[M])`.
///
/// Weights are rescaled by their largest entry first, so the value does not
/// depend on the overall scale of `w`.
pub fn index_j_theta(
    o: &ObservedOutcome,
    ms: &MomentSummary,
    cs: &CovarianceStructure,
    w: &WeightVector,
) -> f64 {
    let max = w.w.iter().fold(0.0f64, |a, &x| a.max(x));
    let wn: Vec<f64> = w.w.iter().map(|&x| x / max).collect();
    linear_score_index(o, ms, cs, &wn)
}

/// Index `r`: the unit-weight score `sum_i (m_i - E[M_i])`.
pub fn index_r(o: &ObservedOutcome, ms: &MomentSummary, cs: &CovarianceStructure) -> f64 {
    linear_score_index(o, ms, cs, &vec![1.0; ms.classes()])
}

fn linear_score_index(
    o: &ObservedOutcome,
    ms: &MomentSummary,
    cs: &CovarianceStructure,
    w: &[f64],
) -> f64 {
    assert_eq!(w.len(), ms.classes(), "dimension mismatch");
    let mut theta = 0.0;
    let mut magnitude = 0.0;
    for ((&wi, &mi), &mbar) in w.iter().zip(o.counts()).zip(&ms.mbar) {
        let term = wi * (mi as f64 - mbar);
        theta += term;
        magnitude += term.abs();
    }
    if theta.abs() <= DEGENERACY_TOL * magnitude {
        theta = 0.0;
    }
    let v = cs.sigma.quadratic_form(w);
    let wsum: f64 = w.iter().sum();
    cantelli_index(theta, v, cs.tolerance * wsum * wsum)
}

/// Newman modularity `sum_i (m_i/m - (D_i / 2m)^2)`.
pub fn newman_modularity(g: &Graph, f: &Coloring, o: &ObservedOutcome) -> Result<f64, Undefined> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Undefined::new("graph has no edges"));
    }
    let mut volume = vec![0u64; f.classes()];
    for (v, &d) in g.degrees().iter().enumerate() {
        volume[f.class_of(v)] += d as u64;
    }
    let m = m as f64;
    Ok(o
        .counts()
        .iter()
        .zip(&volume)
        .map(|(&mi, &di)| {
            let share = di as f64 / (2.0 * m);
            mi as f64 / m - share * share
        })
        .sum())
}

/// Fraction of edges that are homophilic.
pub fn descriptive_ratio(o: &ObservedOutcome, m: u64) -> Result<f64, Undefined> {
    if m == 0 {
        return Err(Undefined::new("graph has no edges"));
    }
    Ok(o.total() as f64 / m as f64)
}

/// Settings for [`IndexReport::compute`].
#[derive(Debug, Clone)]
pub struct IndexOptions {
    pub presets: Vec<Preset>,
    pub nu: Nu,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            presets: Preset::ALL.to_vec(),
            nu: Nu::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetIndex {
    pub preset: Preset,
    pub weights: Option<Vec<f64>>,
    pub value: Quantity,
}

/// Every index for one (graph, coloring) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    pub observed: ObservedOutcome,
    pub mbar: Vec<f64>,
    pub z: Vec<f64>,
    pub active_set: Vec<usize>,
    pub gamma: Quantity,
    pub a: Quantity,
    pub r: Quantity,
    pub h: Quantity,
    pub j_theta: Vec<PresetIndex>,
    pub newman_q: Quantity,
    pub descriptive_ratio: Quantity,
    pub notes: Vec<String>,
}

impl IndexReport {
    pub fn compute(
        g: &Graph,
        f: &Coloring,
        summary: &GraphSummary,
        ms: &MomentSummary,
        cs: &CovarianceStructure,
        opts: &IndexOptions,
    ) -> Self {
        let observed = crate::coloring::homophilic_counts(g, f);
        let z = z_scores(&observed, ms);
        let j_theta = opts
            .presets
            .iter()
            .map(|&preset| match weight_preset(preset, summary, f.profile(), opts.nu) {
                Ok(w) => PresetIndex {
                    preset,
                    value: Quantity::from(index_j_theta(&observed, ms, cs, &w)),
                    weights: Some(w.w),
                },
                Err(Undefined(reason)) => PresetIndex {
                    preset,
                    weights: None,
                    value: Quantity::Undefined(reason),
                },
            })
            .collect();
        let r = if summary.m == 0 {
            Quantity::Undefined("graph has no edges".into())
        } else {
            Quantity::from(index_r(&observed, ms, cs))
        };
        IndexReport {
            mbar: ms.mbar.clone(),
            z: z.z.clone(),
            active_set: z.active_set.clone(),
            gamma: match cs.gamma {
                Some(g) => Quantity::from(g),
                None => Quantity::Undefined("fewer than 4 vertices".into()),
            },
            a: index_a(&z, cs).into(),
            r,
            h: index_h(&z, cs).into(),
            j_theta,
            newman_q: newman_modularity(g, f, &observed).into(),
            descriptive_ratio: descriptive_ratio(&observed, summary.m).into(),
            notes: degeneracy_notes(f, cs),
            observed,
        }
    }

    pub fn j_theta_for(&self, preset: Preset) -> Option<&Quantity> {
        self.j_theta.iter().find(|p| p.preset == preset).map(|p| &p.value)
    }
}

fn degeneracy_notes(f: &Coloring, cs: &CovarianceStructure) -> Vec<String> {
    let mut notes = Vec::new();
    if cs.gamma.is_none() {
        notes.push("gamma undefined for fewer than 4 vertices; covariances use the direct fallback".into());
    }
    for i in 0..cs.classes() {
        if cs.active_set.binary_search(&i).is_err() {
            notes.push(format!(
                "class {} ({}) has zero variance and is excluded from z-based indices",
                i + 1,
                f.class_labels()[i]
            ));
        }
    }
    if cs.active_set.is_empty() {
        notes.push(ALL_DEGENERATE.into());
    }
    if cs.degenerate {
        notes.push("covariance matrix is not invertible through the rank-one route".into());
    }
    if !cs.active_set.is_empty() && cs.corr_inv.is_none() {
        notes.push("correlation matrix is singular on the active set".into());
    }
    notes
}
