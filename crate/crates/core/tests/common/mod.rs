//! Oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use charseg::corpus::Sentence;
use charseg::crf::{CrfModel, FeatureDict, Hyper, Instance, LabeledInstance};
use rand::Rng;

/// Characters drawn from several scripts.
pub const MIXED_POOL: &str = "あいうかきくアイウカキク日本語学生abcXYZ019０１！。、?-";

pub fn random_dict(nf: usize) -> FeatureDict {
    FeatureDict::from_names((0..nf).map(|k| format!("f{k}")).collect()).unwrap()
}

/// A model with every weight uniform in [-1, 1].
pub fn random_model<R: Rng>(rng: &mut R, num_labels: usize, nf: usize, hyper: Hyper) -> CrfModel {
    let mut model = CrfModel::zeros(num_labels, random_dict(nf), hyper);
    let params: Vec<f64> = (0..model.num_params()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    model.set_params(&params);
    model
}

pub fn random_instance<R: Rng>(rng: &mut R, len: usize, nf: usize) -> Instance {
    let positions = (0..len)
        .map(|_| {
            let k = rng.gen_range(1..=3usize);
            (0..k).map(|_| (rng.gen_range(0..nf) as u32, rng.gen_range(0.5..2.0))).collect()
        })
        .collect();
    Instance { positions }
}

pub fn random_labeled<R: Rng>(rng: &mut R, len: usize, nf: usize, num_labels: usize) -> LabeledInstance {
    LabeledInstance {
        instance: random_instance(rng, len, nf),
        gold: (0..len).map(|_| rng.gen_range(0..num_labels)).collect(),
    }
}

/// Score of one label path, computed directly from the weights.
pub fn direct_score(model: &CrfModel, inst: &Instance, path: &[usize]) -> f64 {
    let l = model.num_labels;
    let mut s = 0.0;
    for (t, feats) in inst.positions.iter().enumerate() {
        for &(f, v) in feats {
            s += model.state[f as usize * l + path[t]] * v;
        }
        if t > 0 {
            s += model.trans[path[t - 1] * l + path[t]];
        }
    }
    s
}

/// Enumerates every path: returns log Z and the first path (in lexicographic
/// order) with the highest score.
pub fn brute_force(model: &CrfModel, inst: &Instance) -> (f64, Vec<usize>) {
    let l = model.num_labels;
    let n = inst.len();
    let total = l.pow(n as u32);
    let mut scores = Vec::with_capacity(total);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut path = vec![0usize; n];
    for code in 0..total {
        let mut c = code;
        for t in (0..n).rev() {
            path[t] = c % l;
            c /= l;
        }
        let s = direct_score(model, inst, &path);
        if s > best.0 {
            best = (s, path.clone());
        }
        scores.push(s);
    }
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_z = m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln();
    (log_z, best.1)
}

/// A random segmentation of a random mixed-script string.
pub fn random_sentence<R: Rng>(rng: &mut R, max_len: usize) -> Sentence {
    let pool: Vec<char> = MIXED_POOL.chars().collect();
    let len = rng.gen_range(1..=max_len);
    let chars: Vec<char> = (0..len).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
    let boundaries = (1..len).filter(|_| rng.gen_bool(0.4)).collect();
    Sentence::from_boundaries(chars, boundaries).unwrap()
}

/// Goodman-Kruskal tau through Gini variations: `(V(Y) - E[V(Y|X)]) / V(Y)`.
/// Returns `None` when `V(Y)` is zero.
pub fn gini_tau(counts: &[Vec<f64>]) -> Option<f64> {
    let n: f64 = counts.iter().flatten().sum();
    if n == 0.0 {
        return None;
    }
    let width = counts[0].len();
    let gini = |cells: &[f64], total: f64| 1.0 - cells.iter().map(|c| (c / total).powi(2)).sum::<f64>();
    let cols: Vec<f64> = (0..width).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
    let v_y = gini(&cols, n);
    if v_y <= 0.0 {
        return None;
    }
    let mut cond = 0.0;
    for row in counts {
        let nx: f64 = row.iter().sum();
        if nx > 0.0 {
            cond += nx / n * gini(row, nx);
        }
    }
    Some((v_y - cond) / v_y)
}
