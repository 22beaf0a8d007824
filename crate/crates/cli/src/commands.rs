use std::path::Path;

use fbl_core::algebras::{ExpectationReport, FaithfulnessReport, NormRow};
use fbl_core::bundle::{saturation_failures, CheckOutcome};
use fbl_core::conv::Section;
use fbl_core::corpus;
use fbl_core::io::{load_semigroup, resolve_group, LoadedSpec, NamedSection};
use fbl_core::isg::IsgError;
use fbl_core::linalg::{re, CVec};
use fbl_core::regrep::BlockOperatorFile;
use fbl_core::{
    faithfulness, group_grading_decomposition, search_idempotent_pure_grading, validate_bundle, AlgebraError,
    BundleError, BundleReport, BundleSpecFile, CrossSectional, CrossSectionalReport, FdError, FellBundle,
    GradingDecomposition, InverseSemigroup, RegularRepresentation, ReportOptions, SpecError, ValidationOptions,
    WordinghamReport,
};
use serde::Serialize;

use crate::render;

/// Random samples for the expectation and faithfulness checks.
const SAMPLES: usize = 20;
/// Largest deviation accepted from an identity that holds exactly.
const PROPERTY_TOL: f64 = 1e-8;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Failed(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

fn semigroup_error(e: &IsgError) -> bool {
    !matches!(
        e,
        IsgError::Empty | IsgError::NotSquare { .. } | IsgError::NotTotal { .. }
    )
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        let failed = match &e {
            SpecError::Semigroup(s) | SpecError::Bundle(BundleError::Semigroup(s)) => semigroup_error(s),
            SpecError::Bundle(BundleError::Dimension(_)) => false,
            SpecError::Bundle(_) => true,
            SpecError::Algebra(FdError::DimensionMismatch(_)) => false,
            SpecError::Algebra(_) => true,
            _ => false,
        };
        if failed {
            CliError::Failed(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        CliError::Failed(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Settings {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

pub struct Outcome {
    pub passed: bool,
    pub report: serde_json::Value,
    pub text: String,
}

impl Outcome {
    fn new<T: Serialize>(passed: bool, report: &T, text: String) -> Self {
        Outcome {
            passed,
            report: serde_json::to_value(report).expect("reports serialize"),
            text,
        }
    }
}

/// Reads a bundle file; a missing path falls back to the built-in bundle of the same stem.
fn spec_file(input: &str) -> Result<BundleSpecFile, CliError> {
    let path = Path::new(input);
    if path.exists() {
        return Ok(BundleSpecFile::load(path)?);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(input);
    if corpus::bundle_by_name(stem).is_some() {
        return Ok(BundleSpecFile::corpus(stem));
    }
    Err(CliError::Input(format!("{input}: no such file or built-in bundle")))
}

fn load(input: &str, settings: &Settings) -> Result<LoadedSpec, CliError> {
    Ok(spec_file(input)?.build(settings.tol)?)
}

fn seed(settings: &Settings, spec: &LoadedSpec) -> u64 {
    settings.seed.or(spec.analysis.seed).unwrap_or(0)
}

fn semigroup(input: &str) -> Result<InverseSemigroup, CliError> {
    let path = Path::new(input);
    if path.exists() {
        return Ok(load_semigroup(path)?);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(input);
    corpus::semigroup_by_name(stem)
        .or_else(|| corpus::bundle_by_name(stem).map(|b| b.base().clone()))
        .ok_or_else(|| CliError::Input(format!("{input}: no such file or built-in semigroup")))
}

/// Sections from the file plus an optional extra list; basis deltas when both are empty.
fn sections(spec: &LoadedSpec, extra: Option<&str>) -> Result<Vec<(String, CVec)>, CliError> {
    let input = |e: BundleError| CliError::Input(format!("section: {e}"));
    let b = &spec.bundle;
    let mut out = spec.sections().map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(path) = extra {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
        let list: Vec<NamedSection> =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
        for s in list {
            out.push((s.label, s.section.to_section(b).map_err(input)?.coords().clone()));
        }
    }
    if out.is_empty() {
        let s = b.base();
        for x in (0..s.size()).filter(|&x| b.dim(x) > 0) {
            let mut a = CVec::zeros(b.dim(x));
            a[0] = re(1.0);
            out.push((
                format!("delta_{}", s.label(x)),
                Section::delta(b, x, &a).coords().clone(),
            ));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct SemigroupSummary {
    pub size: usize,
    pub labels: Vec<String>,
    pub idempotents: Vec<String>,
    pub zero: Option<String>,
    pub semilattice: bool,
    pub e_star_unitary: bool,
    pub e_star_witness: Option<[String; 2]>,
}

impl SemigroupSummary {
    fn new(s: &InverseSemigroup) -> Self {
        SemigroupSummary {
            size: s.size(),
            labels: s.labels().to_vec(),
            idempotents: s.idempotents().iter().map(|&e| s.label(e).to_string()).collect(),
            zero: s.zero().map(|z| s.label(z).to_string()),
            semilattice: s.is_semilattice(),
            e_star_unitary: s.is_e_star_unitary(),
            e_star_witness: s
                .e_star_unitary_witness()
                .map(|(e, u)| [s.label(e).to_string(), s.label(u).to_string()]),
        }
    }
}

#[derive(Serialize)]
pub struct ValidateReport {
    pub input: String,
    pub valid: bool,
    pub error: Option<String>,
    pub semigroup: Option<SemigroupSummary>,
    pub dims: Vec<usize>,
    pub checks: Vec<CheckOutcome>,
    pub saturated: Option<bool>,
    pub seed: u64,
    pub samples: usize,
}

pub fn validate(input: &str, settings: &Settings, samples: usize) -> Result<Outcome, CliError> {
    let spec = match load(input, settings) {
        Ok(spec) => spec,
        Err(CliError::Failed(msg)) => {
            let r = ValidateReport {
                input: input.into(),
                valid: false,
                error: Some(msg),
                semigroup: None,
                dims: vec![],
                checks: vec![],
                saturated: None,
                seed: settings.seed.unwrap_or(0),
                samples,
            };
            let text = render::validate(&r, None);
            return Ok(Outcome::new(false, &r, text));
        }
        Err(e) => return Err(e),
    };
    let b = &spec.bundle;
    let seed = seed(settings, &spec);
    let report: BundleReport = validate_bundle(b, ValidationOptions { seed, samples });
    let valid = report.passed();
    let r = ValidateReport {
        input: input.into(),
        valid,
        error: None,
        semigroup: Some(SemigroupSummary::new(b.base())),
        dims: b.dims().to_vec(),
        checks: report.checks,
        saturated: valid.then(|| saturation_failures(b).is_empty()),
        seed,
        samples,
    };
    let text = render::validate(&r, Some(b.base()));
    Ok(Outcome::new(valid, &r, text))
}

#[derive(Serialize)]
pub struct FiberInfo {
    pub element: String,
    pub dim: usize,
}

#[derive(Serialize)]
pub struct InfoReport {
    pub input: String,
    pub semigroup: SemigroupSummary,
    pub fibers: Vec<FiberInfo>,
    pub total_dim: usize,
    pub a0_zero: bool,
    pub filters: usize,
    pub saturation_failures: Vec<[String; 2]>,
}

pub fn info(input: &str, settings: &Settings) -> Result<Outcome, CliError> {
    let spec = load(input, settings)?;
    let b = &spec.bundle;
    let s = b.base();
    let r = InfoReport {
        input: input.into(),
        semigroup: SemigroupSummary::new(s),
        fibers: (0..s.size())
            .map(|x| FiberInfo {
                element: s.label(x).to_string(),
                dim: b.dim(x),
            })
            .collect(),
        total_dim: b.total_dim(),
        a0_zero: b.zero_fiber_is_zero(),
        filters: s.filters().len(),
        saturation_failures: saturation_failures(b)
            .into_iter()
            .map(|(x, y)| [s.label(x).to_string(), s.label(y).to_string()])
            .collect(),
    };
    let text = render::info(&r);
    Ok(Outcome::new(true, &r, text))
}

fn require_valid(b: &FellBundle, seed: u64) -> Result<(), CliError> {
    let report = validate_bundle(
        b,
        ValidationOptions {
            seed,
            ..Default::default()
        },
    );
    let failure = report.failures().next().map(|f| {
        format!(
            "not a Fell bundle: axiom ({}) fails at {:?}; run `fbl validate` for details",
            f.numeral,
            f.witness.clone().unwrap_or_default()
        )
    });
    failure.map_or(Ok(()), |m| Err(CliError::Failed(m)))
}

#[derive(Serialize)]
pub struct ModuleInfo {
    pub idempotent: String,
    pub elements: Vec<String>,
    pub dim: usize,
}

#[derive(Serialize)]
pub struct SectionOperator {
    pub label: String,
    pub reduced_norm: f64,
    pub operator: BlockOperatorFile,
}

#[derive(Serialize)]
pub struct RegrepReport {
    pub input: String,
    pub modules: Vec<ModuleInfo>,
    pub wordingham: WordinghamReport,
    pub faithfulness: FaithfulnessReport,
    pub sections: Vec<SectionOperator>,
    pub seed: u64,
}

pub fn regrep(input: &str, settings: &Settings, extra: Option<&str>) -> Result<Outcome, CliError> {
    let spec = load(input, settings)?;
    let b = &spec.bundle;
    let seed = seed(settings, &spec);
    require_valid(b, seed)?;
    let rep = RegularRepresentation::new(b).map_err(AlgebraError::from)?;
    let s = b.base();
    let idems = s.idempotents();
    let modules = idems
        .iter()
        .map(|&e| {
            let m = rep.module(e);
            ModuleInfo {
                idempotent: s.label(e).to_string(),
                elements: m.elements.iter().map(|&x| s.label(x).to_string()).collect(),
                dim: m.dim(),
            }
        })
        .collect();
    let sections = sections(&spec, extra)?
        .into_iter()
        .map(|(label, coords)| {
            let op = rep.phi_coords(&coords);
            SectionOperator {
                label,
                reduced_norm: op.norm(),
                operator: BlockOperatorFile::new(&op, idems),
            }
        })
        .collect();
    let wordingham = rep.wordingham_check();
    let r = RegrepReport {
        input: input.into(),
        modules,
        faithfulness: faithfulness(&rep, seed, SAMPLES),
        wordingham,
        sections,
        seed,
    };
    let text = render::regrep(&r);
    Ok(Outcome::new(r.wordingham.injective, &r, text))
}

#[derive(Serialize)]
pub struct NormsReport {
    pub input: String,
    pub rows: Vec<NormRow>,
    pub notes: Vec<String>,
    pub seed: u64,
    pub tol: f64,
}

pub fn norms(input: &str, settings: &Settings, extra: Option<&str>) -> Result<Outcome, CliError> {
    let spec = load(input, settings)?;
    let b = &spec.bundle;
    let seed = seed(settings, &spec);
    require_valid(b, seed)?;
    let sections = sections(&spec, extra)?;
    let cs = CrossSectional::new(b)?;
    let report = cs.report(&sections, ReportOptions { seed, oracle: true })?;
    let r = NormsReport {
        input: input.into(),
        rows: report.norms,
        notes: report.notes,
        seed,
        tol: report.tol,
    };
    let text = render::norms(&r);
    Ok(Outcome::new(true, &r, text))
}

#[derive(Serialize)]
pub struct GradingReport {
    pub input: String,
    pub group: Vec<String>,
    pub found: bool,
    /// Degree of each element; `null` for the zero element.
    pub degrees: Option<Vec<(String, Option<String>)>>,
    pub decomposition: Option<GradingDecomposition>,
    pub notes: Vec<String>,
}

fn grading_report(input: &str, cs: &CrossSectional, group: &str) -> Result<GradingReport, CliError> {
    let g = resolve_group(group)?;
    let s = cs.bundle().base();
    let mut notes = Vec::new();
    let sigma = search_idempotent_pure_grading(s, &g);
    let decomposition = match &sigma {
        Some(sigma) => match group_grading_decomposition(cs, &g, sigma) {
            Ok(d) => Some(d),
            Err(AlgebraError::HypothesisViolated(m)) => {
                notes.push(format!("decomposition skipped: {m}"));
                None
            }
            Err(e) => return Err(e.into()),
        },
        None => {
            notes.push(format!(
                "no idempotent pure grading onto a group of order {}",
                g.order()
            ));
            None
        }
    };
    Ok(GradingReport {
        input: input.into(),
        group: (0..g.order()).map(|h| g.label(h).to_string()).collect(),
        found: sigma.is_some(),
        degrees: sigma.map(|sigma| {
            (0..s.size())
                .map(|x| (s.label(x).to_string(), sigma.sigma[x].map(|h| g.label(h).to_string())))
                .collect()
        }),
        decomposition,
        notes,
    })
}

pub fn grading(input: &str, settings: &Settings, group: Option<&str>) -> Result<Outcome, CliError> {
    let spec = load(input, settings)?;
    let group = group
        .map(String::from)
        .or_else(|| spec.analysis.grading_group.clone())
        .ok_or_else(|| CliError::Input("no grading group given; pass --grading-group".into()))?;
    require_valid(&spec.bundle, seed(settings, &spec))?;
    let cs = CrossSectional::new(&spec.bundle)?;
    let r = grading_report(input, &cs, &group)?;
    let passed = r.decomposition.as_ref().is_none_or(GradingDecomposition::laws_hold);
    let text = render::grading(&r);
    Ok(Outcome::new(passed, &r, text))
}

#[derive(Serialize)]
pub struct FilterInfo {
    pub minimum: String,
    pub elements: Vec<String>,
}

#[derive(Serialize)]
pub struct FiltersReport {
    pub input: String,
    pub idempotents: Vec<String>,
    pub filters: Vec<FilterInfo>,
}

pub fn filters(input: &str, _settings: &Settings) -> Result<Outcome, CliError> {
    let s = semigroup(input)?;
    let label = |x: usize| s.label(x).to_string();
    let r = FiltersReport {
        input: input.into(),
        idempotents: s.idempotents().iter().map(|&e| label(e)).collect(),
        filters: s
            .filters()
            .iter()
            .map(|f| FilterInfo {
                minimum: label(f.minimum(&s)),
                elements: f.elements.iter().map(|&e| label(e)).collect(),
            })
            .collect(),
    };
    let text = render::filters(&r);
    Ok(Outcome::new(true, &r, text))
}

#[derive(Serialize)]
pub struct AnalyzeReport {
    pub input: String,
    pub dims: Vec<usize>,
    pub semigroup: SemigroupSummary,
    pub wordingham: WordinghamReport,
    pub faithfulness: FaithfulnessReport,
    pub expectation: Option<ExpectationReport>,
    pub cross_sectional: CrossSectionalReport,
    pub grading: Option<GradingReport>,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

pub fn analyze(
    input: &str,
    settings: &Settings,
    extra: Option<&str>,
    oracle: bool,
    group: Option<&str>,
) -> Result<Outcome, CliError> {
    let spec = load(input, settings)?;
    let b = &spec.bundle;
    let seed = seed(settings, &spec);
    require_valid(b, seed)?;
    let sections = sections(&spec, extra)?;
    let cs = CrossSectional::new(b)?;
    let mut notes = Vec::new();
    let mut failures = Vec::new();

    let wordingham = cs.wordingham();
    if !wordingham.injective {
        failures.push(format!(
            "regular representation has rank {} of {}",
            wordingham.rank, wordingham.dim
        ));
    }
    let faith = faithfulness(cs.rep(), seed, SAMPLES);
    if !faith.exact {
        failures.push("diagonal compression is not faithful".into());
    }
    let expectation = match cs.expectation_checks(seed, SAMPLES) {
        Ok(e) => {
            let worst = [e.formula, e.covariance, e.idempotent, e.bimodule, e.contraction_excess]
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            if worst > PROPERTY_TOL {
                failures.push(format!("conditional expectation identities deviate by {worst:.3e}"));
            }
            Some(e)
        }
        Err(AlgebraError::HypothesisViolated(m)) => {
            notes.push(format!("expectation checks skipped: {m}"));
            None
        }
        Err(e) => return Err(e.into()),
    };
    let report = cs.report(&sections, ReportOptions { seed, oracle })?;
    if report.ja_routes_agree == Some(false) {
        failures.push("the two constructions of the reduced kernel disagree".into());
    }
    if report.ia_in_ja == Some(false) {
        failures.push("the order ideal is not contained in the reduced kernel".into());
    }
    let group = group.map(String::from).or_else(|| spec.analysis.grading_group.clone());
    let grading = group.map(|g| grading_report(input, &cs, &g)).transpose()?;
    if let Some(d) = grading.as_ref().and_then(|g| g.decomposition.as_ref()) {
        if !d.laws_hold() {
            failures.push("grading decomposition violates a law".into());
        }
    }
    let r = AnalyzeReport {
        input: input.into(),
        dims: b.dims().to_vec(),
        semigroup: SemigroupSummary::new(b.base()),
        wordingham,
        faithfulness: faith,
        expectation,
        cross_sectional: report,
        grading,
        failures,
        notes,
    };
    let text = render::analyze(&r);
    Ok(Outcome::new(r.failures.is_empty(), &r, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_errors_map_to_exit_codes() {
        let parse = SpecError::from(serde_json::from_str::<u8>("x").unwrap_err());
        assert_eq!(CliError::from(parse).exit_code(), 2);
        assert_eq!(CliError::from(SpecError::Schema("x".into())).exit_code(), 2);
        let shape = SpecError::Semigroup(IsgError::NotSquare { row: 0, len: 1, n: 2 });
        assert_eq!(CliError::from(shape).exit_code(), 2);
        let law = SpecError::Semigroup(IsgError::NoInverse { s: 0 });
        assert_eq!(CliError::from(law).exit_code(), 1);
        let dims = SpecError::Bundle(BundleError::Dimension("x".into()));
        assert_eq!(CliError::from(dims).exit_code(), 2);
    }

    #[test]
    fn built_in_names_resolve_with_or_without_extension() {
        assert!(spec_file("z2_trivial").is_ok());
        assert!(spec_file("somewhere/i2_action.json").is_ok());
        assert!(matches!(spec_file("nothing_here"), Err(CliError::Input(_))));
        assert_eq!(semigroup("i2").unwrap().size(), 7);
        assert_eq!(semigroup("e3_partial").unwrap().size(), 3);
    }

    #[test]
    fn default_sections_are_basis_deltas() {
        let spec = spec_file("e3_partial").unwrap().build(None).unwrap();
        let s = sections(&spec, None).unwrap();
        let labels: Vec<&str> = s.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["delta_1", "delta_e"]);
    }

    #[test]
    fn seed_precedence() {
        let mut spec = spec_file("z2_trivial").unwrap().build(None).unwrap();
        assert_eq!(seed(&Settings::default(), &spec), 0);
        spec.analysis.seed = Some(4);
        assert_eq!(seed(&Settings::default(), &spec), 4);
        assert_eq!(
            seed(
                &Settings {
                    tol: None,
                    seed: Some(9)
                },
                &spec
            ),
            9
        );
    }
}
