//! Versioned binary model container.
//!
//! Layout: the 8-byte magic `CHSEGMDL`, a little-endian `u32` format version,
//! then a fixed sequence of fields. Strings are `u32` length-prefixed UTF-8,
//! lists are `u32` count-prefixed, floats are IEEE-754 little-endian `f64`.
//! Writing is deterministic: identical models produce identical bytes.

use std::io::{Read, Write};
use std::path::Path;

use crate::crf::{CrfModel, FeatureDict, Hyper, OptimConfig};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, Scaling, Species, SpeciesScale};
use crate::labels::{Label, LabelScheme};
use crate::segmenter::SegmenterModel;

pub const MAGIC: &[u8; 8] = b"CHSEGMDL";
pub const FORMAT_VERSION: u32 = 1;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn len(&mut self, n: usize) {
        self.u32(n as u32);
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.len(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }
    fn strs<S: AsRef<str>>(&mut self, items: &[S]) {
        self.len(items.len());
        for s in items {
            self.str(s.as_ref());
        }
    }
    fn f64s(&mut self, items: &[f64]) {
        self.len(items.len());
        for &v in items {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| Error::Model("truncated model file".into()))?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn len(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Model("invalid UTF-8 string".into()))
    }
    fn strs(&mut self) -> Result<Vec<String>> {
        let n = self.len()?;
        (0..n).map(|_| self.str()).collect()
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        if n.saturating_mul(8) > self.data.len() - self.pos {
            return Err(Error::Model("truncated model file".into()));
        }
        (0..n).map(|_| self.f64()).collect()
    }
}

/// Serializes a model.
pub fn to_bytes(model: &SegmenterModel) -> Vec<u8> {
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);

    w.str(&model.scheme.name());
    w.strs(&model.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>());
    w.strs(&model.features.species.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    w.u8(model.features.wc_include_char as u8);
    match &model.features.scaling {
        Scaling::Unit => w.u8(0),
        Scaling::Boost => w.u8(1),
        Scaling::Learned(rows) => {
            w.u8(2);
            w.len(rows.len());
            for r in rows {
                w.str(&r.species.to_string());
                w.f64(r.recall_iv);
                w.f64(r.recall_oov);
                w.f64(r.interpolated);
                w.f64(r.standardized);
                w.f64(r.alpha);
                w.u8(r.zero_oov_support as u8);
            }
        }
    }
    w.f64(model.crf.hyper.l1);
    w.f64(model.crf.hyper.l2);
    w.f64(model.optim.tol);
    w.u32(model.optim.max_iter as u32);
    w.u32(model.optim.memory as u32);
    w.strs(&model.vocab);
    w.strs(&model.supplementary);
    w.str(&model.lexicon_fingerprint);

    w.u32(model.crf.num_labels as u32);
    w.strs(model.crf.dict.names());
    w.f64s(&model.crf.state);
    w.f64s(&model.crf.trans);
    w.buf
}

/// Deserializes a model, failing on a bad magic or a different format version.
pub fn from_bytes(data: &[u8]) -> Result<SegmenterModel> {
    let mut r = Reader { data, pos: 0 };
    if r.take(8).ok() != Some(MAGIC.as_slice()) {
        return Err(Error::Model("not a model file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Model(format!(
            "unsupported model format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let scheme: LabelScheme = r.str()?.parse()?;
    let labels = r.strs()?.iter().map(|s| s.parse()).collect::<Result<Vec<Label>>>()?;
    if labels != scheme.inventory() {
        return Err(Error::Model("label inventory does not match scheme".into()));
    }
    let species = r.strs()?.iter().map(|s| s.parse()).collect::<Result<Vec<Species>>>()?;
    let wc_include_char = r.u8()? != 0;
    let scaling = match r.u8()? {
        0 => Scaling::Unit,
        1 => Scaling::Boost,
        2 => {
            let n = r.len()?;
            let mut rows = Vec::with_capacity(n.min(1024));
            for _ in 0..n {
                rows.push(SpeciesScale {
                    species: r.str()?.parse()?,
                    recall_iv: r.f64()?,
                    recall_oov: r.f64()?,
                    interpolated: r.f64()?,
                    standardized: r.f64()?,
                    alpha: r.f64()?,
                    zero_oov_support: r.u8()? != 0,
                });
            }
            Scaling::Learned(rows)
        }
        k => return Err(Error::Model(format!("unknown scaling tag {k}"))),
    };
    let hyper = Hyper { l1: r.f64()?, l2: r.f64()? };
    let optim = OptimConfig { tol: r.f64()?, max_iter: r.u32()? as usize, memory: r.u32()? as usize };
    let vocab = r.strs()?;
    let supplementary = r.strs()?;
    let lexicon_fingerprint = r.str()?;

    let num_labels = r.u32()? as usize;
    if num_labels != labels.len() {
        return Err(Error::Model("label count mismatch".into()));
    }
    let dict = FeatureDict::from_names(r.strs()?)?;
    let state = r.f64s()?;
    let trans = r.f64s()?;
    if state.len() != dict.len() * num_labels || trans.len() != num_labels * num_labels {
        return Err(Error::Model("weight matrix shape mismatch".into()));
    }
    if state.iter().chain(&trans).any(|w| !w.is_finite()) {
        return Err(Error::Model("non-finite weight".into()));
    }
    if r.pos != data.len() {
        return Err(Error::Model("trailing bytes after model".into()));
    }
    Ok(SegmenterModel {
        scheme,
        labels,
        features: FeatureConfig { species, wc_include_char, scaling },
        crf: CrfModel { num_labels, dict, state, trans, hyper },
        optim,
        vocab,
        supplementary,
        lexicon_fingerprint,
    })
}

pub fn save(model: &SegmenterModel, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&to_bytes(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<SegmenterModel> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    from_bytes(&data)
}
