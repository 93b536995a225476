//! First-order linear-chain CRF.
//!
//! Parameters are a dense `[feature x label]` state matrix plus a
//! `[label x label]` transition matrix. Training maximizes the conditional
//! log-likelihood with an L2 penalty in the objective and an L1 penalty handled
//! orthant-wise by the optimizer.

pub mod inference;
pub mod optimizer;

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
pub use inference::{path_score, viterbi, Lattice};
pub use optimizer::{IterationInfo, OptimConfig};

/// Maps feature strings to dense ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureDict {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl FeatureDict {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (k, n) in names.iter().enumerate() {
            if index.insert(n.clone(), k as u32).is_some() {
                return Err(Error::Model(format!("duplicate feature {n:?}")));
            }
        }
        Ok(Self { names, index })
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn get_or_insert(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Sparse `(feature id, value)` lists, one per position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Instance {
    pub positions: Vec<Vec<(u32, f64)>>,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// An instance with its gold label indices.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledInstance {
    pub instance: Instance,
    pub gold: Vec<usize>,
}

/// Elastic-net coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyper {
    pub l1: f64,
    pub l2: f64,
}

pub const DEFAULT_L1: f64 = 0.000015;
pub const DEFAULT_L2: f64 = 0.0025;

impl Default for Hyper {
    fn default() -> Self {
        Self { l1: DEFAULT_L1, l2: DEFAULT_L2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrfModel {
    pub num_labels: usize,
    pub dict: FeatureDict,
    /// `state[f * num_labels + y]`.
    pub state: Vec<f64>,
    /// `trans[prev * num_labels + cur]`.
    pub trans: Vec<f64>,
    pub hyper: Hyper,
}

impl CrfModel {
    pub fn zeros(num_labels: usize, dict: FeatureDict, hyper: Hyper) -> Self {
        let state = vec![0.0; dict.len() * num_labels];
        Self { num_labels, dict, state, trans: vec![0.0; num_labels * num_labels], hyper }
    }

    pub fn num_params(&self) -> usize {
        self.state.len() + self.trans.len()
    }

    /// State weights followed by transition weights.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.state.clone();
        p.extend_from_slice(&self.trans);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let (s, t) = params.split_at(self.state.len());
        self.state.copy_from_slice(s);
        self.trans.copy_from_slice(t);
    }

    /// Dense `[position x label]` state scores. Feature ids outside the
    /// dictionary contribute nothing.
    pub fn state_scores(&self, instance: &Instance) -> Vec<f64> {
        state_scores(&self.state, self.num_labels, instance)
    }

    pub fn partition(&self, instance: &Instance) -> Result<Lattice> {
        Lattice::new(&self.state_scores(instance), &self.trans, self.num_labels)
    }

    /// Best label sequence and its score.
    pub fn viterbi(&self, instance: &Instance) -> (Vec<usize>, f64) {
        viterbi(&self.state_scores(instance), &self.trans, self.num_labels)
    }

    /// Fraction of parameters that are exactly zero.
    pub fn zero_fraction(&self) -> f64 {
        let zeros = self.state.iter().chain(&self.trans).filter(|w| **w == 0.0).count();
        zeros as f64 / self.num_params().max(1) as f64
    }
}

fn state_scores(weights: &[f64], l: usize, instance: &Instance) -> Vec<f64> {
    let num_features = weights.len() / l;
    let mut out = vec![0.0; instance.len() * l];
    for (t, feats) in instance.positions.iter().enumerate() {
        let row = &mut out[t * l..(t + 1) * l];
        for &(f, v) in feats {
            let f = f as usize;
            if f >= num_features {
                continue;
            }
            for (r, w) in row.iter_mut().zip(&weights[f * l..(f + 1) * l]) {
                *r += v * w;
            }
        }
    }
    out
}

fn check_gold(batch: &[LabeledInstance], l: usize) -> Result<()> {
    for inst in batch {
        if inst.gold.len() != inst.instance.len() {
            return Err(Error::Alignment(format!(
                "{} gold labels for {} positions",
                inst.gold.len(),
                inst.instance.len()
            )));
        }
        if let Some(&bad) = inst.gold.iter().find(|&&y| y >= l) {
            return Err(Error::UnknownLabel(format!("label index {bad}")));
        }
    }
    Ok(())
}

/// Number of fixed reduction chunks. Independent of the thread count so the
/// floating-point summation order, and therefore the trained model, is
/// reproducible.
const CHUNKS: usize = 8;

/// Negative log-likelihood plus `l2 / 2 * |w|^2` and its gradient.
fn loss_and_gradient(params: &[f64], l: usize, batch: &[LabeledInstance], l2: f64, grad: &mut [f64]) -> Result<f64> {
    let n_state = params.len() - l * l;
    let (state_w, trans_w) = params.split_at(n_state);
    let chunk = batch.len().div_ceil(CHUNKS).max(1);
    let partials: Vec<(f64, Vec<f64>)> = batch
        .par_chunks(chunk)
        .map(|part| {
            let mut g = vec![0.0; params.len()];
            let mut loss = 0.0;
            for inst in part {
                let scores = state_scores(state_w, l, &inst.instance);
                let lattice = Lattice::new(&scores, trans_w, l)?;
                loss += lattice.log_z - path_score(&scores, trans_w, l, &inst.gold);
                let (gs, gt) = g.split_at_mut(n_state);
                for (t, feats) in inst.instance.positions.iter().enumerate() {
                    let marg: Vec<f64> = (0..l).map(|y| lattice.marginal(t, y)).collect();
                    let gold = inst.gold[t];
                    for &(f, v) in feats {
                        let row = &mut gs[f as usize * l..(f as usize + 1) * l];
                        for (r, m) in row.iter_mut().zip(&marg) {
                            *r += v * m;
                        }
                        row[gold] -= v;
                    }
                    if t > 0 {
                        for prev in 0..l {
                            for cur in 0..l {
                                gt[prev * l + cur] += lattice.edge_marginal(&scores, trans_w, t, prev, cur);
                            }
                        }
                        gt[inst.gold[t - 1] * l + gold] -= 1.0;
                    }
                }
            }
            Ok((loss, g))
        })
        .collect::<Result<_>>()?;

    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for (pl, pg) in partials {
        loss += pl;
        for (a, b) in grad.iter_mut().zip(pg) {
            *a += b;
        }
    }
    if l2 != 0.0 {
        loss += 0.5 * l2 * params.iter().map(|w| w * w).sum::<f64>();
        for (g, w) in grad.iter_mut().zip(params) {
            *g += l2 * w;
        }
    }
    Ok(loss)
}

/// Penalized log-likelihood `sum log p(y|x) - l2/2 |w|^2` and its gradient
/// (empirical minus expected counts minus `l2 * w`), in [`CrfModel::params`]
/// layout. The L1 term is left to the optimizer.
pub fn objective_and_gradient(model: &CrfModel, batch: &[LabeledInstance]) -> Result<(f64, Vec<f64>)> {
    check_gold(batch, model.num_labels)?;
    let params = model.params();
    let mut grad = vec![0.0; params.len()];
    let loss = loss_and_gradient(&params, model.num_labels, batch, model.hyper.l2, &mut grad)?;
    grad.iter_mut().for_each(|g| *g = -*g);
    Ok((-loss, grad))
}

/// Fits a model to `batch`. Feature ids in `batch` must index `dict`.
pub fn train(
    batch: &[LabeledInstance],
    num_labels: usize,
    dict: FeatureDict,
    hyper: Hyper,
    config: &OptimConfig,
    log: &mut dyn FnMut(&IterationInfo),
) -> Result<CrfModel> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("training corpus is empty"));
    }
    check_gold(batch, num_labels)?;
    let nf = dict.len();
    if let Some(bad) = batch
        .iter()
        .flat_map(|b| b.instance.positions.iter().flatten())
        .find(|(f, _)| *f as usize >= nf)
    {
        return Err(Error::Model(format!("feature id {} outside dictionary", bad.0)));
    }
    if !(hyper.l1 >= 0.0 && hyper.l2 >= 0.0) {
        return Err(Error::InvalidArgument("regularization coefficients must be non-negative".into()));
    }
    let mut model = CrfModel::zeros(num_labels, dict, hyper);
    let x0 = model.params();
    let outcome = optimizer::minimize(
        x0,
        hyper.l1,
        config,
        |x, g| loss_and_gradient(x, num_labels, batch, hyper.l2, g).map_err(|e| match e {
            Error::NonFinite(_) => Error::Diverged(0),
            other => other,
        }),
        log,
    )?;
    if outcome.x.iter().any(|w| !w.is_finite()) {
        return Err(Error::Diverged(outcome.iterations));
    }
    model.set_params(&outcome.x);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_batch() -> (Vec<LabeledInstance>, FeatureDict) {
        // Feature 0 fires with label 0, feature 1 with label 1.
        let mut dict = FeatureDict::new();
        let a = dict.get_or_insert("a");
        let b = dict.get_or_insert("b");
        let inst = LabeledInstance {
            instance: Instance { positions: vec![vec![(a, 1.0)], vec![(b, 1.0)], vec![(a, 1.0)]] },
            gold: vec![0, 1, 0],
        };
        (vec![inst], dict)
    }

    #[test]
    fn zero_model_transition_gradient() {
        // Length 2, two labels, uniform model: every edge has marginal 1/4.
        let mut dict = FeatureDict::new();
        let f = dict.get_or_insert("x");
        let batch = vec![LabeledInstance {
            instance: Instance { positions: vec![vec![(f, 1.0)], vec![(f, 1.0)]] },
            gold: vec![0, 1],
        }];
        let model = CrfModel::zeros(2, dict, Hyper { l1: 0.0, l2: 0.0 });
        let (value, grad) = objective_and_gradient(&model, &batch).unwrap();
        assert!((value + 4f64.ln()).abs() < 1e-12);
        let trans = &grad[2..];
        assert!((trans[0] + 0.25).abs() < 1e-12);
        assert!((trans[1] - 0.75).abs() < 1e-12);
        assert!((trans[2] + 0.25).abs() < 1e-12);
        assert!((trans[3] + 0.25).abs() < 1e-12);
        // State: feature x seen once with each label, expected 1 per label.
        assert!(grad[0].abs() < 1e-12 && grad[1].abs() < 1e-12);
    }

    #[test]
    fn memorizes() {
        let (batch, dict) = tiny_batch();
        let model = train(&batch, 2, dict, Hyper { l1: 0.0, l2: 0.0 }, &OptimConfig::default(), &mut |_| {}).unwrap();
        assert_eq!(model.viterbi(&batch[0].instance).0, vec![0, 1, 0]);
        let (value, _) = objective_and_gradient(&model, &batch).unwrap();
        assert!(value > -1e-3, "log-likelihood {value}");
    }

    #[test]
    fn rejects_bad_gold() {
        let (mut batch, dict) = tiny_batch();
        batch[0].gold[1] = 5;
        let model = CrfModel::zeros(2, dict.clone(), Hyper::default());
        assert!(matches!(objective_and_gradient(&model, &batch), Err(Error::UnknownLabel(_))));
        assert!(train(&batch, 2, dict, Hyper::default(), &OptimConfig::default(), &mut |_| {}).is_err());
    }

    #[test]
    fn unknown_feature_ids_score_zero() {
        let (batch, dict) = tiny_batch();
        let model = CrfModel::zeros(2, dict, Hyper::default());
        let inst = Instance { positions: vec![vec![(99, 1.0)]] };
        assert_eq!(model.state_scores(&inst), vec![0.0, 0.0]);
        let _ = batch;
    }
}
