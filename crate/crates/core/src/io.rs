//! JSON specification files for semigroups and bundles.
//!
//! ```json
//! {
//!   "format": 1,
//!   "semigroup": {"corpus": "i2"},
//!   "kind": "trivial-line",
//!   "zero_fiber": "zero",
//!   "analysis": {"seed": 0, "sections": [{"label": "g", "coeffs": {"1": [[1.0, 0.0]]}}]}
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs. Explicit tensors use string keys:
//! `mu["s,t"]` is flat with index `(i*d_t + j)*d_st + k`, `star["s"]` is
//! `d_{s*} x d_s` row-major and `j["t,s"]` is `d_t x d_s` row-major. Missing
//! keys mean zero.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::{
    bundle_from_partial_action, trivial_line_bundle, BundleError, FellBundle, PartialActionSpec, ZeroFiber,
};
use crate::conv::SectionFile;
use crate::corpus::{self, ActionData};
use crate::fdalg::{FdCStarFile, FdError};
use crate::isg::{Group, InverseSemigroup, IsgError, MulTable};
use crate::linalg::{c, zeros, CMat, CVec, Tolerances};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported format version {0}")]
    Format(u32),
    #[error("unknown corpus entry '{0}'")]
    UnknownCorpus(String),
    #[error("invalid specification: {0}")]
    Schema(String),
    #[error(transparent)]
    Semigroup(#[from] IsgError),
    #[error(transparent)]
    Algebra(#[from] FdError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

/// A semigroup given by corpus name or by its Cayley table.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SemigroupSpec {
    Corpus {
        corpus: String,
    },
    Table {
        table: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

impl SemigroupSpec {
    pub fn from_semigroup(s: &InverseSemigroup) -> Self {
        SemigroupSpec::Table {
            table: s.table().rows(),
            labels: Some(s.labels().to_vec()),
        }
    }

    pub fn build(&self) -> Result<InverseSemigroup, SpecError> {
        match self {
            SemigroupSpec::Corpus { corpus: name } => {
                corpus::semigroup_by_name(name).ok_or_else(|| SpecError::UnknownCorpus(name.clone()))
            }
            SemigroupSpec::Table { table, labels } => {
                let s = InverseSemigroup::new(MulTable::new(table)?)?;
                match labels {
                    Some(l) if l.len() != s.size() => Err(SpecError::Schema(format!(
                        "{} labels for {} elements",
                        l.len(),
                        s.size()
                    ))),
                    Some(l) => Ok(s.with_labels(l.clone())),
                    None => Ok(s),
                }
            }
        }
    }
}

/// Standalone group file: `{"format": 1, "group": {"table": ..., "labels": ...}}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroupFile {
    pub format: u32,
    pub group: GroupTable,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroupTable {
    pub table: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl GroupFile {
    pub fn from_group(g: &Group) -> Self {
        GroupFile {
            format: FORMAT_VERSION,
            group: GroupTable {
                table: g.table().rows(),
                labels: Some((0..g.order()).map(|x| g.label(x).to_string()).collect()),
            },
        }
    }

    pub fn build(&self) -> Result<Group, SpecError> {
        if self.format != FORMAT_VERSION {
            return Err(SpecError::Format(self.format));
        }
        let g = Group::new(MulTable::new(&self.group.table)?)?;
        match &self.group.labels {
            Some(l) if l.len() != g.order() => Err(SpecError::Schema(format!(
                "{} labels for {} elements",
                l.len(),
                g.order()
            ))),
            Some(l) => Ok(g.with_labels(l.clone())),
            None => Ok(g),
        }
    }
}

/// A corpus group name such as `z3`, or the path of a group file.
pub fn resolve_group(name_or_path: &str) -> Result<Group, SpecError> {
    if let Some(g) = corpus::group_by_name(name_or_path) {
        return Ok(g);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(SpecError::UnknownCorpus(name_or_path.into()));
    }
    let f: GroupFile = serde_json::from_str(&read(path)?)?;
    f.build()
}

/// Standalone semigroup file: `{"format": 1, "semigroup": ...}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SemigroupFile {
    pub format: u32,
    pub semigroup: SemigroupSpec,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum BundleKind {
    TrivialLine,
    Explicit,
    PartialAction,
    Corpus,
}

type Pairs = Vec<[f64; 2]>;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct ExplicitTensors {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub mu: BTreeMap<String, Pairs>,
    #[serde(default)]
    pub star: BTreeMap<String, Pairs>,
    #[serde(default)]
    pub j: BTreeMap<String, Pairs>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ActionSpec {
    pub algebra: FdCStarFile,
    /// Generators of `J_s`, keyed by element; missing means `J_s = 0`.
    #[serde(default)]
    pub ideals: BTreeMap<String, Vec<Pairs>>,
    /// `beta_s` as a row-major `d x d` matrix on the algebra; missing means zero.
    #[serde(default)]
    pub beta: BTreeMap<String, Pairs>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NamedSection {
    pub label: String,
    #[serde(flatten)]
    pub section: SectionFile,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct AnalysisOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sections: Vec<NamedSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading_group: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BundleSpecFile {
    pub format: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semigroup: Option<SemigroupSpec>,
    pub kind: BundleKind,
    /// Corpus bundle name for `kind = "corpus"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_fiber: Option<ZeroFiber>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<ExplicitTensors>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionSpec>,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

/// A bundle with the analysis options that came with it.
#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub bundle: FellBundle,
    pub analysis: AnalysisOptions,
}

fn read(path: &Path) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmat(rows: usize, cols: usize, data: Option<&Pairs>, what: &str) -> Result<CMat, SpecError> {
    let Some(data) = data else {
        return Ok(zeros(rows, cols));
    };
    if data.len() != rows * cols {
        return Err(SpecError::Schema(format!(
            "{what} has {} entries, expected {}",
            data.len(),
            rows * cols
        )));
    }
    Ok(CMat::from_fn(rows, cols, |r, k| {
        let p = data[r * cols + k];
        c(p[0], p[1])
    }))
}

fn pairs_row_major(m: &CMat) -> Pairs {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for k in 0..m.ncols() {
            out.push([m[(r, k)].re, m[(r, k)].im]);
        }
    }
    out
}

fn check_keys<V>(map: &BTreeMap<String, V>, n: usize, arity: usize, what: &str) -> Result<(), SpecError> {
    for key in map.keys() {
        let parts: Vec<&str> = key.split(',').map(str::trim).collect();
        let ok = parts.len() == arity && parts.iter().all(|p| p.parse::<usize>().is_ok_and(|x| x < n));
        if !ok {
            return Err(SpecError::Schema(format!("bad {what} key '{key}'")));
        }
    }
    Ok(())
}

impl ExplicitTensors {
    pub fn from_bundle(b: &FellBundle) -> Self {
        let s = b.base();
        let n = s.size();
        let mut mu = BTreeMap::new();
        let mut star = BTreeMap::new();
        let mut j = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                let m = b.mu_matrix(x, y);
                if m.iter().any(|z| z.norm() > 0.0) {
                    // flat (i*d_t + j)*d_st + k  <->  m[(k, i*d_t + j)]
                    let flat = (0..m.ncols())
                        .flat_map(|col| (0..m.nrows()).map(move |k| (k, col)))
                        .map(|(k, col)| [m[(k, col)].re, m[(k, col)].im])
                        .collect();
                    mu.insert(format!("{x},{y}"), flat);
                }
                if let Some(m) = b.j_matrix(x, y) {
                    if m.iter().any(|z| z.norm() > 0.0) {
                        j.insert(format!("{x},{y}"), pairs_row_major(m));
                    }
                }
            }
            let m = b.star_matrix(x);
            if m.iter().any(|z| z.norm() > 0.0) {
                star.insert(x.to_string(), pairs_row_major(m));
            }
        }
        ExplicitTensors {
            dims: b.dims().to_vec(),
            mu,
            star,
            j,
        }
    }

    pub fn build(&self, s: InverseSemigroup, tol: Tolerances) -> Result<FellBundle, SpecError> {
        let n = s.size();
        if self.dims.len() != n {
            return Err(SpecError::Schema(format!("{} dims for {n} elements", self.dims.len())));
        }
        check_keys(&self.mu, n, 2, "mu")?;
        check_keys(&self.star, n, 1, "star")?;
        check_keys(&self.j, n, 2, "j")?;
        let d = &self.dims;
        let mut mu = Vec::with_capacity(n * n);
        let mut js = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let xy = s.mul(x, y);
                let key = format!("{x},{y}");
                let mut m = zeros(d[xy], d[x] * d[y]);
                if let Some(flat) = self.mu.get(&key) {
                    if flat.len() != m.len() {
                        return Err(SpecError::Schema(format!(
                            "mu[{key}] has {} entries, expected {}",
                            flat.len(),
                            m.len()
                        )));
                    }
                    for (idx, p) in flat.iter().enumerate() {
                        m[(idx % d[xy].max(1), idx / d[xy].max(1))] = c(p[0], p[1]);
                    }
                }
                mu.push(m);
                if s.natural_leq(y, x) {
                    js.push(Some(cmat(d[x], d[y], self.j.get(&key), &format!("j[{key}]"))?));
                } else if self.j.contains_key(&key) {
                    return Err(SpecError::Schema(format!("j[{key}] given but {y} is not below {x}")));
                } else {
                    js.push(None);
                }
            }
        }
        let star = (0..n)
            .map(|x| cmat(d[s.inv(x)], d[x], self.star.get(&x.to_string()), &format!("star[{x}]")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FellBundle::new(s, d.clone(), mu, star, js, tol)?)
    }
}

impl ActionSpec {
    pub fn from_data(data: &ActionData) -> Self {
        let row = |v: &CVec| v.iter().map(|z| [z.re, z.im]).collect::<Pairs>();
        let mut ideals = BTreeMap::new();
        let mut beta = BTreeMap::new();
        for (x, gens) in data.ideal_gens.iter().enumerate() {
            if !gens.is_empty() {
                ideals.insert(x.to_string(), gens.iter().map(row).collect());
            }
            if data.beta[x].iter().any(|z| z.norm() > 0.0) {
                beta.insert(x.to_string(), pairs_row_major(&data.beta[x]));
            }
        }
        ActionSpec {
            algebra: FdCStarFile::from_algebra(&data.algebra),
            ideals,
            beta,
        }
    }

    pub fn build(&self, s: &InverseSemigroup, tol: Tolerances) -> Result<FellBundle, SpecError> {
        let n = s.size();
        check_keys(&self.ideals, n, 1, "ideals")?;
        check_keys(&self.beta, n, 1, "beta")?;
        let algebra = self.algebra.build(tol)?;
        let d = algebra.dim();
        let mut gens = Vec::with_capacity(n);
        let mut beta = Vec::with_capacity(n);
        for x in 0..n {
            let key = x.to_string();
            let g = self.ideals.get(&key).map(Vec::as_slice).unwrap_or_default();
            let mut vs = Vec::with_capacity(g.len());
            for v in g {
                if v.len() != d {
                    return Err(SpecError::Schema(format!(
                        "ideal generator for {x} has length {}",
                        v.len()
                    )));
                }
                vs.push(CVec::from_iterator(d, v.iter().map(|p| c(p[0], p[1]))));
            }
            gens.push(vs);
            beta.push(cmat(d, d, self.beta.get(&key), &format!("beta[{x}]"))?);
        }
        let spec = PartialActionSpec::new(algebra, &gens, beta);
        Ok(bundle_from_partial_action(s, &spec)?)
    }
}

impl BundleSpecFile {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let f: BundleSpecFile = serde_json::from_str(text)?;
        if f.format != FORMAT_VERSION {
            return Err(SpecError::Format(f.format));
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self, SpecError> {
        Self::from_json(&read(path)?)
    }

    /// An explicit-tensor file reproducing `b` exactly.
    pub fn explicit(b: &FellBundle) -> Self {
        BundleSpecFile {
            format: FORMAT_VERSION,
            semigroup: Some(SemigroupSpec::from_semigroup(b.base())),
            kind: BundleKind::Explicit,
            name: None,
            zero_fiber: None,
            explicit: Some(ExplicitTensors::from_bundle(b)),
            action: None,
            analysis: AnalysisOptions::default(),
        }
    }

    pub fn partial_action(data: &ActionData) -> Self {
        BundleSpecFile {
            semigroup: Some(SemigroupSpec::from_semigroup(&data.semigroup)),
            kind: BundleKind::PartialAction,
            explicit: None,
            action: Some(ActionSpec::from_data(data)),
            ..Self::blank()
        }
    }

    pub fn trivial_line(semigroup: SemigroupSpec, zero: ZeroFiber) -> Self {
        BundleSpecFile {
            semigroup: Some(semigroup),
            kind: BundleKind::TrivialLine,
            zero_fiber: Some(zero),
            ..Self::blank()
        }
    }

    pub fn corpus(name: &str) -> Self {
        BundleSpecFile {
            name: Some(name.into()),
            ..Self::blank()
        }
    }

    fn blank() -> Self {
        BundleSpecFile {
            format: FORMAT_VERSION,
            semigroup: None,
            kind: BundleKind::Corpus,
            name: None,
            zero_fiber: None,
            explicit: None,
            action: None,
            analysis: AnalysisOptions::default(),
        }
    }

    fn semigroup(&self) -> Result<InverseSemigroup, SpecError> {
        self.semigroup
            .as_ref()
            .ok_or_else(|| SpecError::Schema("missing semigroup".into()))?
            .build()
    }

    /// Builds the bundle; `tol` overrides the file's tolerance.
    pub fn build(&self, tol: Option<f64>) -> Result<LoadedSpec, SpecError> {
        let tol = tol.or(self.analysis.tol).map(Tolerances::with_rank).unwrap_or_default();
        if !(tol.rank > 0.0 && tol.rank < 1.0) {
            return Err(SpecError::Schema(format!("tolerance {} out of range", tol.rank)));
        }
        let bundle = match self.kind {
            BundleKind::TrivialLine => {
                trivial_line_bundle(&self.semigroup()?, self.zero_fiber.unwrap_or(ZeroFiber::Full)).with_tol(tol)
            }
            BundleKind::Explicit => self
                .explicit
                .as_ref()
                .ok_or_else(|| SpecError::Schema("kind 'explicit' needs an 'explicit' object".into()))?
                .build(self.semigroup()?, tol)?,
            BundleKind::PartialAction => self
                .action
                .as_ref()
                .ok_or_else(|| SpecError::Schema("kind 'partial-action' needs an 'action' object".into()))?
                .build(&self.semigroup()?, tol)?,
            BundleKind::Corpus => {
                let name = self
                    .name
                    .as_deref()
                    .ok_or_else(|| SpecError::Schema("kind 'corpus' needs a 'name'".into()))?;
                corpus::bundle_by_name(name)
                    .ok_or_else(|| SpecError::UnknownCorpus(name.into()))?
                    .with_tol(tol)
            }
        };
        Ok(LoadedSpec {
            bundle,
            analysis: self.analysis.clone(),
        })
    }
}

impl LoadedSpec {
    /// Requested sections as coordinate vectors.
    pub fn sections(&self) -> Result<Vec<(String, CVec)>, SpecError> {
        self.analysis
            .sections
            .iter()
            .map(|s| Ok((s.label.clone(), s.section.to_section(&self.bundle)?.coords().clone())))
            .collect()
    }

    pub fn grading_group(&self) -> Result<Option<Group>, SpecError> {
        self.analysis.grading_group.as_deref().map(resolve_group).transpose()
    }
}

/// Loads either a semigroup file or the base of a bundle file.
pub fn load_semigroup(path: &Path) -> Result<InverseSemigroup, SpecError> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("kind").is_some() {
        let spec = BundleSpecFile::from_json(&text)?;
        return Ok(spec.build(None)?.bundle.base().clone());
    }
    let f: SemigroupFile = serde_json::from_value(value)?;
    if f.format != FORMAT_VERSION {
        return Err(SpecError::Format(f.format));
    }
    f.semigroup.build()
}
