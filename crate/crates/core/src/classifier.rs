//! Gradient-boosted tree classifiers that predict principle adherence from
//! rule feature vectors.
//!
//! One binary model per principle, trained with a second-order boosting
//! objective on logistic loss: soft-thresholded L1 (`alpha_l1`) and L2
//! (`lambda_l2`) leaf regularization, a `gamma` split penalty, a
//! `min_child_weight` hessian floor per child, per-tree feature subsampling,
//! and positive-class weighting (`sample_weight_scaling`). Trees store raw
//! leaf values; `learning_rate` scales their sum at prediction time.
//!
//! Model selection follows a repeated stratified-CV grid search scored by a
//! precision-weighted F1. Everything is deterministic for a given seed.

use crate::checkers::{Confidence, PrincipleAssessment};
use crate::features::{schema_hash, vectorize, FeatureVector, VECTOR_DIM};
use crate::principles::{Principle, PrincipleSet};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use thiserror::Error;

/// A rule joined with its comparison group and per-principle adherence
/// labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRule {
    pub sid: u32,
    pub rev: u32,
    pub group: String,
    pub features: FeatureVector,
    pub labels: PrincipleSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub n_trees: usize,
    pub eta: f64,
    pub feature_sampling_rate: f64,
    pub sample_weight_scaling: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub gamma: f64,
    pub lambda_l2: f64,
    pub alpha_l1: f64,
}

impl Default for HyperParams {
    fn default() -> HyperParams {
        HyperParams {
            n_trees: 200,
            eta: 0.3,
            feature_sampling_rate: 1.0,
            sample_weight_scaling: 1.0,
            max_depth: 3,
            min_child_weight: 1.0,
            gamma: 0.0,
            lambda_l2: 0.1,
            alpha_l1: 0.0,
        }
    }
}

/// Regression-tree node. Samples with `x[feature] < threshold` descend left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
    Leaf { leaf_value: f64 },
}

impl Node {
    pub fn output(&self, x: &[f64; VECTOR_DIM]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { leaf_value } => return *leaf_value,
                Node::Split { feature, threshold, left, right } => {
                    node = if x[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    fn collect_features(&self, used: &mut Vec<usize>) {
        if let Node::Split { feature, left, right, .. } = self {
            used.push(*feature);
            left.collect_features(used);
            right.collect_features(used);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub trees: Vec<Node>,
    pub learning_rate: f64,
    /// Initial log-odds.
    pub base_score: f64,
    /// Feature schema hash the model was fitted against.
    pub trained_on: String,
}

impl BoostedModel {
    pub fn empty() -> BoostedModel {
        BoostedModel {
            trees: Vec::new(),
            learning_rate: 0.3,
            base_score: 0.0,
            trained_on: schema_hash(),
        }
    }

    fn check_schema(&self) -> Result<(), PredictError> {
        let current = schema_hash();
        if self.trained_on != current {
            return Err(PredictError::SchemaMismatch { model: self.trained_on.clone(), current });
        }
        Ok(())
    }

    /// Adherence probability for one feature vector.
    pub fn predict(&self, fv: &FeatureVector) -> Result<f64, PredictError> {
        self.check_schema()?;
        Ok(self.predict_vec(&vectorize(fv)))
    }

    /// Probability, thresholded at 0.5.
    pub fn predict_label(&self, fv: &FeatureVector) -> Result<bool, PredictError> {
        Ok(self.predict(fv)? >= 0.5)
    }

    fn predict_vec(&self, x: &[f64; VECTOR_DIM]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.output(x)).sum();
        sigmoid(self.base_score + self.learning_rate * sum)
    }

    /// Feature indices referenced by any split, deduplicated.
    pub fn used_features(&self) -> Vec<usize> {
        let mut used = Vec::new();
        for t in &self.trees {
            t.collect_features(&mut used);
        }
        used.sort_unstable();
        used.dedup();
        used
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("degenerate class: no {class} samples in the training data")]
    DegenerateClass { class: &'static str },
    #[error("no training samples")]
    NoData,
    #[error("empty hyperparameter grid")]
    EmptyGrid,
}

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("feature schema mismatch: model trained on {model}, current schema is {current}")]
    SchemaMismatch { model: String, current: String },
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// log(1 + e^m), computed without overflow.
fn softplus(m: f64) -> f64 {
    m.max(0.0) + (-m.abs()).exp().ln_1p()
}

/// Soft-thresholding used for L1 leaf regularization.
fn soft_threshold(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

fn leaf_score(g: f64, h: f64, hp: &HyperParams) -> f64 {
    let denom = h + hp.lambda_l2;
    if denom <= 0.0 {
        return 0.0;
    }
    let s = soft_threshold(g, hp.alpha_l1);
    s * s / denom
}

fn leaf_value(g: f64, h: f64, hp: &HyperParams) -> f64 {
    let denom = h + hp.lambda_l2;
    if denom <= 0.0 {
        return 0.0;
    }
    -soft_threshold(g, hp.alpha_l1) / denom
}

fn build_tree(
    x: &[[f64; VECTOR_DIM]],
    g: &[f64],
    h: &[f64],
    samples: &[usize],
    features: &[usize],
    depth_left: usize,
    hp: &HyperParams,
) -> Node {
    let g_sum: f64 = samples.iter().map(|&i| g[i]).sum();
    let h_sum: f64 = samples.iter().map(|&i| h[i]).sum();

    let mut best: Option<(f64, usize, f64)> = None;
    if depth_left > 0 && samples.len() >= 2 {
        let parent_score = leaf_score(g_sum, h_sum, hp);
        for &f in features {
            let mut ordered: Vec<usize> = samples.to_vec();
            ordered.sort_by(|&a, &b| {
                x[a][f].partial_cmp(&x[b][f]).expect("finite feature values").then(a.cmp(&b))
            });
            let mut g_left = 0.0;
            let mut h_left = 0.0;
            for w in 0..ordered.len() - 1 {
                let i = ordered[w];
                g_left += g[i];
                h_left += h[i];
                let v = x[i][f];
                let v_next = x[ordered[w + 1]][f];
                if v == v_next {
                    continue;
                }
                let g_right = g_sum - g_left;
                let h_right = h_sum - h_left;
                if h_left < hp.min_child_weight || h_right < hp.min_child_weight {
                    continue;
                }
                let gain = 0.5
                    * (leaf_score(g_left, h_left, hp) + leaf_score(g_right, h_right, hp)
                        - parent_score)
                    - hp.gamma;
                if best.map_or(true, |(bg, _, _)| gain > bg) {
                    best = Some((gain, f, 0.5 * (v + v_next)));
                }
            }
        }
    }

    match best {
        Some((gain, feature, threshold)) if gain > 0.0 => {
            let (left_samples, right_samples): (Vec<usize>, Vec<usize>) =
                samples.iter().partition(|&&i| x[i][feature] < threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(build_tree(x, g, h, &left_samples, features, depth_left - 1, hp)),
                right: Box::new(build_tree(x, g, h, &right_samples, features, depth_left - 1, hp)),
            }
        }
        _ => Node::Leaf { leaf_value: leaf_value(g_sum, h_sum, hp) },
    }
}

/// Consecutive trees with a loss improvement below this are counted as
/// stalled; ten in a row end training early unless strict mode is on.
const STALL_EPS: f64 = 1e-12;
const STALL_LIMIT: usize = 10;

fn fit_full(
    x: &[[f64; VECTOR_DIM]],
    y: &[bool],
    hp: &HyperParams,
    seed: u64,
    strict: bool,
) -> Result<(BoostedModel, Vec<f64>), TrainError> {
    let n = x.len();
    if n == 0 {
        return Err(TrainError::NoData);
    }
    if y.iter().all(|&v| v) {
        return Err(TrainError::DegenerateClass { class: "negative" });
    }
    if y.iter().all(|&v| !v) {
        return Err(TrainError::DegenerateClass { class: "positive" });
    }

    let w: Vec<f64> =
        y.iter().map(|&v| if v { hp.sample_weight_scaling } else { 1.0 }).collect();
    let mut margins = vec![0.0f64; n];
    let mut g = vec![0.0f64; n];
    let mut h = vec![0.0f64; n];
    let all_samples: Vec<usize> = (0..n).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = ((hp.feature_sampling_rate * VECTOR_DIM as f64).ceil() as usize).clamp(1, VECTOR_DIM);

    let loss = |margins: &[f64]| -> f64 {
        margins
            .iter()
            .zip(y.iter().zip(w.iter()))
            .map(|(&m, (&yv, &wv))| wv * (softplus(m) - if yv { m } else { 0.0 }))
            .sum()
    };

    let mut losses = Vec::with_capacity(hp.n_trees);
    let mut prev_loss = loss(&margins);
    let mut stall = 0usize;
    let mut trees = Vec::new();

    for _ in 0..hp.n_trees {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            let yv = if y[i] { 1.0 } else { 0.0 };
            g[i] = w[i] * (p - yv);
            h[i] = w[i] * p * (1.0 - p);
        }
        let mut feats = rand::seq::index::sample(&mut rng, VECTOR_DIM, k).into_vec();
        feats.sort_unstable();

        let tree = build_tree(x, &g, &h, &all_samples, &feats, hp.max_depth, hp);
        for i in 0..n {
            margins[i] += hp.eta * tree.output(&x[i]);
        }
        trees.push(tree);

        let l = loss(&margins);
        losses.push(l);
        if !strict {
            if prev_loss - l < STALL_EPS {
                stall += 1;
                if stall >= STALL_LIMIT {
                    break;
                }
            } else {
                stall = 0;
            }
        }
        prev_loss = l;
    }

    let model = BoostedModel {
        trees,
        learning_rate: hp.eta,
        base_score: 0.0,
        trained_on: schema_hash(),
    };
    Ok((model, losses))
}

/// Fits a model on raw vectors; training ends early once the loss plateaus.
pub fn train_matrix(
    x: &[[f64; VECTOR_DIM]],
    y: &[bool],
    hp: &HyperParams,
    seed: u64,
) -> Result<BoostedModel, TrainError> {
    fit_full(x, y, hp, seed, false).map(|(m, _)| m)
}

/// Like [`train_matrix`] but always fits the full `n_trees`.
pub fn train_matrix_strict(
    x: &[[f64; VECTOR_DIM]],
    y: &[bool],
    hp: &HyperParams,
    seed: u64,
) -> Result<BoostedModel, TrainError> {
    fit_full(x, y, hp, seed, true).map(|(m, _)| m)
}

fn design(data: &[LabeledRule], principle: Principle) -> (Vec<[f64; VECTOR_DIM]>, Vec<bool>) {
    let x = data.iter().map(|r| vectorize(&r.features)).collect();
    let y = data.iter().map(|r| r.labels.get(principle)).collect();
    (x, y)
}

/// Fits one model predicting adherence to `principle`.
pub fn train(
    data: &[LabeledRule],
    principle: Principle,
    hp: &HyperParams,
    seed: u64,
) -> Result<BoostedModel, TrainError> {
    let (x, y) = design(data, principle);
    train_matrix(&x, &y, hp, seed)
}

/// Precision-weighted harmonic F-score; precision carries `w_p` and recall
/// `w_r`. Zero when either component is zero.
pub fn weighted_f1(precision: f64, recall: f64, w_p: f64, w_r: f64) -> f64 {
    if precision == 0.0 || recall == 0.0 {
        return 0.0;
    }
    (w_p + w_r) / (w_p / precision + w_r / recall)
}

pub const F1_PRECISION_WEIGHT: f64 = 10.0;
pub const F1_RECALL_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub principle: Principle,
    pub precision: f64,
    pub recall: f64,
    pub weighted_f1: f64,
    pub folds: usize,
    pub repeats: usize,
    pub stratified: bool,
}

/// Assigns each sample a fold, round-robin within each class, so fold class
/// counts differ by at most one sample.
fn stratified_folds(y: &[bool], folds: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let mut neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    pos.shuffle(rng);
    neg.shuffle(rng);
    let mut fold_of = vec![0usize; y.len()];
    for (j, &i) in pos.iter().enumerate() {
        fold_of[i] = j % folds;
    }
    for (j, &i) in neg.iter().enumerate() {
        fold_of[i] = j % folds;
    }
    fold_of
}

/// Repeated stratified k-fold cross-validation; precision, recall, and the
/// weighted F1 are each averaged over every repeat×fold test partition.
pub fn cross_validate(
    data: &[LabeledRule],
    principle: Principle,
    hp: &HyperParams,
    repeats: usize,
    folds: usize,
    seed: u64,
) -> Result<CVReport, TrainError> {
    let (x, y) = design(data, principle);
    cross_validate_matrix(&x, &y, hp, repeats, folds, seed).map(|(p, r, f)| CVReport {
        principle,
        precision: p,
        recall: r,
        weighted_f1: f,
        folds,
        repeats,
        stratified: true,
    })
}

fn cross_validate_matrix(
    x: &[[f64; VECTOR_DIM]],
    y: &[bool],
    hp: &HyperParams,
    repeats: usize,
    folds: usize,
    seed: u64,
) -> Result<(f64, f64, f64), TrainError> {
    if x.is_empty() {
        return Err(TrainError::NoData);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = (0.0f64, 0.0f64, 0.0f64);
    let mut partitions = 0usize;

    for _ in 0..repeats {
        let fold_of = stratified_folds(y, folds, &mut rng);
        for fold in 0..folds {
            let train_seed = rng.next_u64();
            let mut xt = Vec::new();
            let mut yt = Vec::new();
            let mut xv = Vec::new();
            let mut yv = Vec::new();
            for i in 0..x.len() {
                if fold_of[i] == fold {
                    xv.push(x[i]);
                    yv.push(y[i]);
                } else {
                    xt.push(x[i]);
                    yt.push(y[i]);
                }
            }
            let model = train_matrix(&xt, &yt, hp, train_seed)?;
            let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
            for (xi, &yi) in xv.iter().zip(yv.iter()) {
                let pred = model.predict_vec(xi) >= 0.5;
                match (pred, yi) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
            let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
            let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
            sums.0 += precision;
            sums.1 += recall;
            sums.2 += weighted_f1(precision, recall, F1_PRECISION_WEIGHT, F1_RECALL_WEIGHT);
            partitions += 1;
        }
    }

    let d = partitions as f64;
    Ok((sums.0 / d, sums.1 / d, sums.2 / d))
}

/// Exhaustive sweep crossing every tuned axis: 3024 combinations, 1000 trees.
pub fn full_grid() -> Vec<HyperParams> {
    let mut grid = Vec::new();
    for &eta in &[0.01, 0.1, 0.3] {
        for &feature_sampling_rate in &[0.25, 0.5, 0.75, 1.0] {
            for &sample_weight_scaling in &[0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0] {
                for &max_depth in &[1usize, 3] {
                    for &min_child_weight in &[1.0] {
                        for &gamma in &[0.0, 0.1] {
                            for &lambda_l2 in &[0.0, 0.01, 0.1] {
                                for &alpha_l1 in &[0.0, 0.01, 0.1] {
                                    grid.push(HyperParams {
                                        n_trees: 1000,
                                        eta,
                                        feature_sampling_rate,
                                        sample_weight_scaling,
                                        max_depth,
                                        min_child_weight,
                                        gamma,
                                        lambda_l2,
                                        alpha_l1,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    grid
}

/// Small preset covering the eta × lambda × class-weight corners of the full
/// grid (27 points, 200 trees); the other axes stay at their defaults.
pub fn quick_grid() -> Vec<HyperParams> {
    let mut grid = Vec::new();
    for &eta in &[0.01, 0.1, 0.3] {
        for &lambda_l2 in &[0.0, 0.01, 0.1] {
            for &sample_weight_scaling in &[0.1, 1.0, 10.0] {
                grid.push(HyperParams {
                    n_trees: 200,
                    eta,
                    feature_sampling_rate: 1.0,
                    sample_weight_scaling,
                    max_depth: 3,
                    min_child_weight: 1.0,
                    gamma: 0.0,
                    lambda_l2,
                    alpha_l1: 0.0,
                });
            }
        }
    }
    grid
}

/// Cross-validates every grid point with shared fold splits (same seed), so
/// scores are comparable across points. Order matches the grid.
pub fn grid_evaluate(
    data: &[LabeledRule],
    principle: Principle,
    grid: &[HyperParams],
    seed: u64,
) -> Result<Vec<CVReport>, TrainError> {
    grid.par_iter().map(|hp| cross_validate(data, principle, hp, 10, 2, seed)).collect()
}

/// Returns the grid point maximizing weighted F1. Ties prefer the smaller
/// max_depth, then the larger lambda_l2, then the earlier grid position.
pub fn grid_search(
    data: &[LabeledRule],
    principle: Principle,
    grid: &[HyperParams],
    seed: u64,
) -> Result<(HyperParams, CVReport), TrainError> {
    if grid.is_empty() {
        return Err(TrainError::EmptyGrid);
    }
    let reports = grid_evaluate(data, principle, grid, seed)?;
    let mut best = 0usize;
    for i in 1..grid.len() {
        let (a, b) = (&reports[i], &reports[best]);
        let better = a.weighted_f1 > b.weighted_f1
            || (a.weighted_f1 == b.weighted_f1
                && (grid[i].max_depth < grid[best].max_depth
                    || (grid[i].max_depth == grid[best].max_depth
                        && grid[i].lambda_l2 > grid[best].lambda_l2)));
        if better {
            best = i;
        }
    }
    Ok((grid[best], reports[best]))
}

/// Replaces a heuristic verdict with the model's prediction. Deterministic
/// verdicts are never overridden.
pub fn merge_assessment(
    assessment: &mut PrincipleAssessment,
    principle: Principle,
    adherence_probability: f64,
) {
    let v = assessment.verdict_mut(principle);
    if v.confidence != Confidence::Heuristic {
        return;
    }
    v.adheres = adherence_probability >= 0.5;
    v.evidence = vec![format!(
        "model override: predicted adherence probability {adherence_probability:.4}"
    )];
}

/// One trained model per principle, bound to a feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub schema: String,
    /// Keyed by principle name.
    pub models: BTreeMap<String, BoostedModel>,
}

impl ModelBundle {
    pub fn new() -> ModelBundle {
        ModelBundle { schema: schema_hash(), models: BTreeMap::new() }
    }

    pub fn insert(&mut self, principle: Principle, model: BoostedModel) {
        self.models.insert(principle.name().to_string(), model);
    }

    pub fn get(&self, principle: Principle) -> Option<&BoostedModel> {
        self.models.get(principle.name())
    }
}

impl Default for ModelBundle {
    fn default() -> ModelBundle {
        ModelBundle::new()
    }
}

#[derive(Debug, Error)]
pub enum LabelsError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("label row {sid}:{rev} has no matching rule")]
    UnmatchedLabel { sid: u32, rev: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRow {
    pub sid: u32,
    pub rev: u32,
    pub group: String,
    pub labels: PrincipleSet,
}

pub const LABELS_HEADER: [&str; 9] = [
    "sid",
    "rev",
    "group",
    "limited_proxy",
    "successful_action",
    "exceptions",
    "alert_throttling",
    "generalized_characteristic",
    "generalized_position",
];

/// Reads the labels CSV: sid,rev,group followed by one 0/1 cell per
/// principle in canonical order.
pub fn read_labels_csv<R: Read>(reader: R) -> Result<Vec<LabelRow>, LabelsError> {
    let mut rdr = csv::Reader::from_reader(reader);
    {
        let headers = rdr.headers()?;
        let got: Vec<&str> = headers.iter().collect();
        if got != LABELS_HEADER {
            return Err(LabelsError::Malformed {
                row: 1,
                message: format!("expected header {:?}, got {:?}", LABELS_HEADER.join(","), got.join(",")),
            });
        }
    }
    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = idx + 2;
        let field = |i: usize| -> Result<&str, LabelsError> {
            record.get(i).ok_or(LabelsError::Malformed {
                row: row_no,
                message: format!("missing column {}", LABELS_HEADER[i]),
            })
        };
        let parse_u32 = |i: usize| -> Result<u32, LabelsError> {
            field(i)?.trim().parse().map_err(|_| LabelsError::Malformed {
                row: row_no,
                message: format!("column {} is not an integer", LABELS_HEADER[i]),
            })
        };
        let sid = parse_u32(0)?;
        let rev = parse_u32(1)?;
        let group = field(2)?.trim().to_string();
        if group.is_empty() {
            return Err(LabelsError::Malformed { row: row_no, message: "empty group".to_string() });
        }
        let mut labels = PrincipleSet::default();
        for (j, p) in Principle::ALL.iter().enumerate() {
            let cell = field(3 + j)?.trim();
            let value = match cell {
                "0" => false,
                "1" => true,
                other => {
                    return Err(LabelsError::Malformed {
                        row: row_no,
                        message: format!("column {} must be 0 or 1, got {other:?}", LABELS_HEADER[3 + j]),
                    })
                }
            };
            labels.set(*p, value);
        }
        rows.push(LabelRow { sid, rev, group, labels });
    }
    Ok(rows)
}

pub fn write_labels_csv<W: Write>(writer: W, rows: &[LabelRow]) -> Result<(), LabelsError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(LABELS_HEADER)?;
    for row in rows {
        let mut record = vec![row.sid.to_string(), row.rev.to_string(), row.group.clone()];
        for p in Principle::ALL {
            record.push(if row.labels.get(p) { "1" } else { "0" }.to_string());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Joins label rows with parsed rules by (sid, rev); every label row must
/// find its rule.
pub fn join_labels(
    rules: &[crate::parser::Rule],
    rows: &[LabelRow],
) -> Result<Vec<LabeledRule>, LabelsError> {
    let by_key: BTreeMap<(u32, u32), &crate::parser::Rule> =
        rules.iter().map(|r| ((r.sid, r.rev), r)).collect();
    rows.iter()
        .map(|row| {
            let rule = by_key
                .get(&(row.sid, row.rev))
                .ok_or(LabelsError::UnmatchedLabel { sid: row.sid, rev: row.rev })?;
            Ok(LabeledRule {
                sid: row.sid,
                rev: row.rev,
                group: row.group.clone(),
                features: crate::features::extract_features(rule),
                labels: row.labels,
            })
        })
        .collect()
}
