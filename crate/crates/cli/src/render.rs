//! Plain-text views of the JSON reports.

use std::fmt::Write;

use fbl_core::InverseSemigroup;

use crate::commands::{
    AnalyzeReport, FiltersReport, GradingReport, InfoReport, NormsReport, RegrepReport, SemigroupSummary,
    ValidateReport,
};

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn opt_bool(b: Option<bool>) -> &'static str {
    b.map_or("n/a", yes)
}

fn num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

fn semigroup(out: &mut String, s: &SemigroupSummary) {
    let _ = writeln!(
        out,
        "semigroup: {} elements, {} idempotents",
        s.size,
        s.idempotents.len()
    );
    let _ = writeln!(out, "  zero: {}", s.zero.as_deref().unwrap_or("none"));
    let _ = writeln!(out, "  semilattice: {}", yes(s.semilattice));
    match &s.e_star_witness {
        None => {
            let _ = writeln!(out, "  E*-unitary: yes");
        }
        Some([e, u]) => {
            let _ = writeln!(out, "  E*-unitary: no ({e} <= {u}, {u} not idempotent)");
        }
    }
}

pub fn validate(r: &ValidateReport, s: Option<&InverseSemigroup>) -> String {
    let mut out = String::new();
    let width = r.checks.iter().map(|c| c.numeral.len() + 2).max().unwrap_or(0);
    if let Some(err) = &r.error {
        let _ = writeln!(out, "{}: INVALID\n  {err}", r.input);
        return out;
    }
    let _ = writeln!(
        out,
        "{}: {}",
        r.input,
        if r.valid { "valid Fell bundle" } else { "INVALID" }
    );
    let _ = writeln!(out, "fiber dimensions: {:?}", r.dims);
    for c in &r.checks {
        let _ = write!(
            out,
            "  {:<width$} {:<4} max deviation {:.2e}",
            format!("({})", c.numeral),
            if c.passed { "ok" } else { "FAIL" },
            c.max_deviation
        );
        if let Some(w) = &c.witness {
            let names: Vec<&str> = match s {
                Some(s) => w.iter().map(|&x| s.label(x)).collect(),
                None => vec![],
            };
            let _ = write!(out, "  witness {:?} = {:?}", w, names);
        }
        if let Some(d) = &c.detail {
            let _ = write!(out, "  {d}");
        }
        out.push('\n');
    }
    if let Some(sat) = r.saturated {
        let _ = writeln!(out, "saturated: {}", yes(sat));
    }
    out
}

pub fn info(r: &InfoReport) -> String {
    let mut out = String::new();
    semigroup(&mut out, &r.semigroup);
    let _ = writeln!(out, "fibers (total dimension {}):", r.total_dim);
    for f in &r.fibers {
        let _ = writeln!(out, "  {:<12} {}", f.element, f.dim);
    }
    let _ = writeln!(out, "zero fiber vanishes: {}", yes(r.a0_zero));
    let _ = writeln!(out, "filters: {}", r.filters);
    if r.saturation_failures.is_empty() {
        let _ = writeln!(out, "saturated: yes");
    } else {
        let _ = writeln!(out, "saturated: no, e.g. at {:?}", r.saturation_failures[0]);
    }
    out
}

pub fn regrep(r: &RegrepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "modules:");
    for m in &r.modules {
        let _ = writeln!(
            out,
            "  K_{:<10} dim {:<4} over {}",
            m.idempotent,
            m.dim,
            m.elements.join(" ")
        );
    }
    let w = &r.wordingham;
    let _ = writeln!(out, "rank {} of {}, injective: {}", w.rank, w.dim, yes(w.injective));
    let _ = writeln!(
        out,
        "diagonal compression faithful: {} (relative Gram floor {:.3e})",
        yes(r.faithfulness.exact),
        r.faithfulness.gram_min_relative
    );
    for s in &r.sections {
        let _ = writeln!(out, "section {}: reduced norm {:.6}", s.label, s.reduced_norm);
    }
    out
}

pub fn norms(r: &NormsReport) -> String {
    let mut out = String::new();
    let width = r.rows.iter().map(|row| row.label.len()).max().unwrap_or(0).max(7);
    let _ = writeln!(
        out,
        "{:<width$} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "section", "l1", "reduced", "mod I", "mod J", "oracle"
    );
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{:<width$} {:>10.6} {:>10.6} {:>10.6} {:>10} {:>10}",
            row.label,
            row.ell1,
            row.reduced,
            row.ia_quotient,
            num(row.ja_quotient),
            num(row.oracle)
        );
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

pub fn grading(r: &GradingReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "group of order {}: grading {}",
        r.group.len(),
        if r.found { "found" } else { "not found" }
    );
    if let Some(deg) = &r.degrees {
        for (x, g) in deg {
            let _ = writeln!(out, "  {:<12} -> {}", x, g.as_deref().unwrap_or("-"));
        }
    }
    if let Some(d) = &r.decomposition {
        let _ = writeln!(out, "graded pieces: {:?}", d.dims);
        let _ = writeln!(
            out,
            "products {} adjoints {} direct sum {} unit diagonal {}",
            yes(d.product_law),
            yes(d.adjoint_law),
            yes(d.direct_sum),
            yes(d.unit_is_diagonal)
        );
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

pub fn filters(r: &FiltersReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} idempotents, {} filters", r.idempotents.len(), r.filters.len());
    for f in &r.filters {
        let _ = writeln!(out, "  up({}) = {{{}}}", f.minimum, f.elements.join(", "));
    }
    out
}

pub fn analyze(r: &AnalyzeReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}: fiber dimensions {:?}", r.input, r.dims);
    semigroup(&mut out, &r.semigroup);
    let c = &r.cross_sectional;
    let d = &c.dims;
    let _ = writeln!(out, "injective: {} (rank {} of {})", yes(c.injective), d.crks, d.cc);
    let _ = writeln!(out, "zero fiber vanishes: {}", yes(c.a0_zero));
    let _ = writeln!(out, "diagonal compression faithful: {}", yes(r.faithfulness.exact));
    if let Some(e) = &r.expectation {
        let worst = [e.formula, e.covariance, e.idempotent, e.bimodule]
            .into_iter()
            .fold(0.0, f64::max);
        let _ = writeln!(
            out,
            "conditional expectation: worst deviation {worst:.2e}, {} samples",
            e.samples
        );
    }
    let ja = d.ja.map_or_else(|| "-".into(), |v| v.to_string());
    let reduced = d.reduced.map_or_else(|| "-".into(), |v| v.to_string());
    let _ = writeln!(
        out,
        "dimensions: full {} diagonal ideal {} order ideal {} reduced kernel {}",
        d.crks, d.ie, d.ia, ja
    );
    let _ = writeln!(out, "quotients: by order ideal {} by reduced kernel {}", d.alt, reduced);
    let _ = writeln!(out, "order ideal inside reduced kernel: {}", opt_bool(c.ia_in_ja));
    let _ = writeln!(out, "ideals coincide: {}", opt_bool(c.ia_equals_ja));
    let _ = writeln!(out, "kernel routes agree: {}", opt_bool(c.ja_routes_agree));
    let _ = writeln!(out, "positivity on the complement: {}", opt_bool(c.condition_iii));
    if !c.norms.is_empty() {
        out.push_str(&norms(&NormsReport {
            input: r.input.clone(),
            rows: c.norms.clone(),
            notes: vec![],
            seed: c.seed,
            tol: c.tol,
        }));
    }
    if let Some(g) = &r.grading {
        out.push_str(&grading(g));
    }
    for n in r.notes.iter().chain(&c.notes) {
        let _ = writeln!(out, "note: {n}");
    }
    for f in &r.failures {
        let _ = writeln!(out, "FAILURE: {f}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fbl_core::algebras::NormRow;

    #[test]
    fn missing_norms_print_as_dashes() {
        let r = NormsReport {
            input: "x".into(),
            rows: vec![NormRow {
                label: "a_long_label".into(),
                ell1: 1.0,
                reduced: 0.5,
                ia_quotient: 0.25,
                ja_quotient: None,
                oracle: Some(0.25),
            }],
            notes: vec!["skipped".into()],
            seed: 0,
            tol: 1e-9,
        };
        let text = norms(&r);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("a_long_label "));
        assert!(lines[1].contains(" - ") || lines[1].contains("         -"));
        assert_eq!(lines[2], "note: skipped");
        assert_eq!(opt_bool(None), "n/a");
    }
}
