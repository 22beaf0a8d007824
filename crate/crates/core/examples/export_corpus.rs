//! Regenerates the JSON fixtures under `corpus/`.
//!
//! `cargo run -p fbl-core --example export_corpus -- corpus`

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use fbl_core::bundle::ZeroFiber;
use fbl_core::conv::SectionFile;
use fbl_core::corpus;
use fbl_core::io::{AnalysisOptions, NamedSection, SemigroupFile, SemigroupSpec, FORMAT_VERSION};
use fbl_core::{BundleSpecFile, GroupFile};

fn write<T: serde::Serialize>(dir: &Path, name: &str, value: &T) {
    let path = dir.join(format!("{name}.json"));
    let mut text = collapse_leaf_arrays(&serde_json::to_string_pretty(value).expect("fixtures serialize"));
    text.push('\n');
    fs::write(&path, text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
}

/// Puts arrays of plain numbers on one line.
fn collapse_leaf_arrays(pretty: &str) -> String {
    let is_leaf = |t: &str| {
        let t = t.trim_end_matches(',');
        t.parse::<f64>().is_ok() || (t.starts_with('"') && t.ends_with('"') && !t.contains(','))
    };
    let mut out: Vec<String> = Vec::new();
    let mut open: Option<(String, Vec<String>)> = None;
    for line in pretty.lines() {
        let t = line.trim();
        match open.take() {
            Some((head, items)) if t.starts_with(']') => {
                out.push(format!("{head}{}{t}", items.join(", ")));
            }
            Some((head, mut items)) if is_leaf(t) => {
                items.push(t.trim_end_matches(',').to_string());
                open = Some((head, items));
            }
            Some((head, items)) => {
                let indent = " ".repeat(head.len() - head.trim_start().len() + 2);
                out.push(head);
                out.extend(items.iter().map(|i| format!("{indent}{i},")));
                if t.ends_with('[') {
                    open = Some((line.to_string(), Vec::new()));
                } else {
                    out.push(line.to_string());
                }
            }
            None if t.ends_with('[') => open = Some((line.to_string(), Vec::new())),
            None => out.push(line.to_string()),
        }
    }
    out.join("\n")
}

fn section(label: &str, coeffs: &[(usize, &[f64])]) -> NamedSection {
    let coeffs: BTreeMap<String, Vec<[f64; 2]>> = coeffs
        .iter()
        .map(|(x, v)| (x.to_string(), v.iter().map(|&r| [r, 0.0]).collect()))
        .collect();
    NamedSection {
        label: label.into(),
        section: SectionFile { coeffs },
    }
}

fn analysis(sections: Vec<NamedSection>, grading_group: Option<&str>) -> AnalysisOptions {
    AnalysisOptions {
        tol: None,
        seed: Some(0),
        sections,
        grading_group: grading_group.map(String::from),
    }
}

fn table(name: &str) -> SemigroupSpec {
    SemigroupSpec::from_semigroup(&corpus::semigroup_by_name(name).expect("corpus semigroup"))
}

fn main() {
    let root = std::env::args().nth(1).unwrap_or_else(|| "corpus".into());
    let root = Path::new(&root);
    let (sg, gr, bu) = (root.join("semigroups"), root.join("groups"), root.join("bundles"));
    for d in [&sg, &gr, &bu] {
        fs::create_dir_all(d).expect("create corpus directories");
    }

    for name in ["z2", "z3", "e3", "chain3", "i2", "i3"] {
        let f = SemigroupFile {
            format: FORMAT_VERSION,
            semigroup: table(name),
        };
        write(&sg, name, &f);
    }
    for name in ["z2", "z3"] {
        write(
            &gr,
            name,
            &GroupFile::from_group(&corpus::group_by_name(name).expect("corpus group")),
        );
    }

    let trivial = |sg: &str, zero, a| BundleSpecFile {
        analysis: a,
        ..BundleSpecFile::trivial_line(table(sg), zero)
    };
    let action = |name: &str, a| BundleSpecFile {
        analysis: a,
        ..BundleSpecFile::partial_action(&corpus::action_by_name(name).expect("corpus action"))
    };

    let z2_sections = vec![
        section("sum", &[(0, &[1.0]), (1, &[1.0])]),
        section("difference", &[(0, &[1.0]), (1, &[-1.0])]),
        section("zero", &[]),
    ];
    write(
        &bu,
        "z2_trivial",
        &trivial("z2", ZeroFiber::Full, analysis(z2_sections, Some("z2"))),
    );

    // E3 = {1, e, 0}
    let e3_sections = vec![
        section("zero_minus_e", &[(2, &[1.0]), (1, &[-1.0])]),
        section("e_minus_one", &[(1, &[1.0]), (0, &[-1.0])]),
        section("one", &[(0, &[1.0])]),
    ];
    write(
        &bu,
        "e3_trivial",
        &trivial("e3", ZeroFiber::Full, analysis(e3_sections, None)),
    );
    let e3_contracted = vec![
        section("e_minus_one", &[(1, &[1.0]), (0, &[-1.0])]),
        section("one", &[(0, &[1.0])]),
    ];
    write(
        &bu,
        "e3_trivial_contracted",
        &trivial("e3", ZeroFiber::Zero, analysis(e3_contracted, None)),
    );

    let i2 = corpus::i2();
    let i2_sections = || {
        let swap = (0..i2.size())
            .find(|&x| !i2.is_idempotent(x) && i2.inv(x) == x)
            .expect("I_2 has a swap");
        let ones: Vec<(usize, &[f64])> = (0..i2.size()).map(|x| (x, &[1.0][..])).collect();
        vec![section("swap", &[(swap, &[1.0])]), section("ones", &ones)]
    };
    write(
        &bu,
        "i2_trivial",
        &trivial("i2", ZeroFiber::Full, analysis(i2_sections(), Some("z2"))),
    );
    write(
        &bu,
        "i2_trivial_contracted",
        &trivial("i2", ZeroFiber::Zero, analysis(vec![], None)),
    );
    write(
        &bu,
        "i3_trivial",
        &trivial("i3", ZeroFiber::Full, analysis(vec![], None)),
    );

    let b = corpus::i2_action();
    let ones: Vec<f64> = vec![1.0; 2];
    let full: Vec<(usize, &[f64])> = (0..b.base().size()).map(|x| (x, &ones[..b.dim(x)])).collect();
    write(
        &bu,
        "i2_action",
        &action("i2_action", analysis(vec![section("ones", &full)], Some("z2"))),
    );
    write(&bu, "i3_action", &action("i3_action", analysis(vec![], None)));

    let e3p = vec![
        section("one", &[(0, &[1.0, 0.0])]),
        section("corner", &[(0, &[1.0, 0.0]), (1, &[-1.0])]),
    ];
    write(&bu, "e3_partial", &action("e3_partial", analysis(e3p, None)));
    let swap = vec![
        section("flip", &[(1, &[1.0, 0.0])]),
        section("sum", &[(0, &[1.0, 1.0]), (1, &[1.0, 1.0])]),
    ];
    write(
        &bu,
        "z2_swap_action",
        &action("z2_swap_action", analysis(swap, Some("z2"))),
    );
    write(
        &bu,
        "z2_partial",
        &action("z2_partial", analysis(vec![section("g", &[(1, &[1.0])])], Some("z2"))),
    );
}
