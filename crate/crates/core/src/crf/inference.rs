//! Forward-backward and Viterbi over a dense score lattice.
//!
//! Scores are row-major: `state[t * L + y]` and `trans[prev * L + cur]`.

use crate::error::{Error, Result};

#[inline]
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Result of the forward-backward pass.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub len: usize,
    pub num_labels: usize,
    pub log_z: f64,
    /// Log forward scores, `len * num_labels`.
    pub alpha: Vec<f64>,
    /// Log backward scores, `len * num_labels`.
    pub beta: Vec<f64>,
}

impl Lattice {
    /// Runs forward-backward. Fails on an empty lattice or a non-finite score.
    pub fn new(state: &[f64], trans: &[f64], num_labels: usize) -> Result<Self> {
        let l = num_labels;
        if l == 0 || state.is_empty() || !state.len().is_multiple_of(l) {
            return Err(Error::EmptyInput("lattice needs at least one position and label"));
        }
        let n = state.len() / l;
        for t in 0..n {
            if state[t * l..(t + 1) * l].iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(t));
            }
        }
        if trans.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(0));
        }

        let mut alpha = vec![0.0; n * l];
        let mut beta = vec![0.0; n * l];
        let mut buf = vec![0.0; l];
        alpha[..l].copy_from_slice(&state[..l]);
        for t in 1..n {
            for y in 0..l {
                for (p, b) in buf.iter_mut().enumerate() {
                    *b = alpha[(t - 1) * l + p] + trans[p * l + y];
                }
                alpha[t * l + y] = state[t * l + y] + log_sum_exp(&buf);
            }
        }
        for t in (0..n - 1).rev() {
            for y in 0..l {
                for (q, b) in buf.iter_mut().enumerate() {
                    *b = trans[y * l + q] + state[(t + 1) * l + q] + beta[(t + 1) * l + q];
                }
                beta[t * l + y] = log_sum_exp(&buf);
            }
        }
        let log_z = log_sum_exp(&alpha[(n - 1) * l..]);
        if !log_z.is_finite() {
            return Err(Error::NonFinite(n - 1));
        }
        Ok(Self { len: n, num_labels: l, log_z, alpha, beta })
    }

    /// `p(y_t = y)`.
    pub fn marginal(&self, t: usize, y: usize) -> f64 {
        let k = t * self.num_labels + y;
        (self.alpha[k] + self.beta[k] - self.log_z).exp()
    }

    /// Per-position marginals, `len * num_labels`.
    pub fn marginals(&self) -> Vec<f64> {
        (0..self.len * self.num_labels)
            .map(|k| (self.alpha[k] + self.beta[k] - self.log_z).exp())
            .collect()
    }

    /// `p(y_{t-1} = prev, y_t = cur)` for `t >= 1`.
    pub fn edge_marginal(&self, state: &[f64], trans: &[f64], t: usize, prev: usize, cur: usize) -> f64 {
        let l = self.num_labels;
        (self.alpha[(t - 1) * l + prev] + trans[prev * l + cur] + state[t * l + cur] + self.beta[t * l + cur]
            - self.log_z)
            .exp()
    }

    /// Edge marginals for every `t >= 1`, `(len - 1) * L * L`, indexed
    /// `[(t - 1) * L * L + prev * L + cur]`.
    pub fn edge_marginals(&self, state: &[f64], trans: &[f64]) -> Vec<f64> {
        let l = self.num_labels;
        let mut out = Vec::with_capacity(self.len.saturating_sub(1) * l * l);
        for t in 1..self.len {
            for prev in 0..l {
                for cur in 0..l {
                    out.push(self.edge_marginal(state, trans, t, prev, cur));
                }
            }
        }
        out
    }
}

/// Score of one label path.
pub fn path_score(state: &[f64], trans: &[f64], num_labels: usize, path: &[usize]) -> f64 {
    let l = num_labels;
    let mut s = 0.0;
    for (t, &y) in path.iter().enumerate() {
        s += state[t * l + y];
        if t > 0 {
            s += trans[path[t - 1] * l + y];
        }
    }
    s
}

/// Best label path and its score.
///
/// Ties go to the lowest label index, both for the final label and for
/// every back-pointer.
pub fn viterbi(state: &[f64], trans: &[f64], num_labels: usize) -> (Vec<usize>, f64) {
    let l = num_labels;
    let n = state.len() / l;
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut delta = state[..l].to_vec();
    let mut next = vec![0.0; l];
    let mut back = vec![0usize; n * l];
    for t in 1..n {
        for y in 0..l {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (p, d) in delta.iter().enumerate() {
                let v = d + trans[p * l + y];
                if v > best {
                    best = v;
                    arg = p;
                }
            }
            next[y] = best + state[t * l + y];
            back[t * l + y] = arg;
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut best = f64::NEG_INFINITY;
    let mut last = 0;
    for (y, &d) in delta.iter().enumerate() {
        if d > best {
            best = d;
            last = y;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = back[t * l + path[t]];
    }
    (path, best)
}
