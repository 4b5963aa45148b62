//! Stage functions and the full enumerate → classify → group → generators →
//! report pipeline.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use magic_core::classify::{Classifier, Trigg, ORDER4_TOTAL};
use magic_core::constraints::build_system;
use magic_core::generators::{
    census_class_with_group, decompose, verify_partition, Census, ClassCensus, OrbitPartition,
    PartitionVerdict, Selection,
};
use magic_core::group::{candidate_universe, preserves, TransformationGroup};
use magic_core::{Error as CoreError, Square, Transformation};
use rayon::prelude::*;
use serde::Serialize;

use crate::format::{
    render_catalog, render_classification, render_classification_kv, render_group, write_atomic,
    CatalogRecord, FORMAT_HEADER,
};
use crate::report::{emit_report, render_generators};
use crate::shards::enumerate_parallel;
use crate::{Error, Result, StageExt};

/// Classifies a complete order-4 catalog. Orbit columns are left empty.
pub fn classify_catalog(catalog: &[Square]) -> Result<Vec<CatalogRecord>> {
    let classifier = Classifier::from_catalog(catalog)?;
    catalog
        .par_iter()
        .enumerate()
        .map(|(i, square)| {
            let label = classifier.classify(square)?;
            Ok(CatalogRecord {
                line: i + 1,
                square: square.clone(),
                dudeney: label.dudeney,
                trigg: label.trigg,
                vi_split: label.vi_split,
                broken_diagonals: square.magic_broken_diagonals(),
                orbit_id: None,
                is_generator: false,
            })
        })
        .collect()
}

/// Symmetry group of `squares`, filtering the candidate universe on the
/// rayon pool.
pub fn parallel_group(squares: &[Square]) -> Result<TransformationGroup> {
    let order = squares.first().ok_or(CoreError::EmptySet)?.order();
    if let Some(s) = squares.iter().find(|s| s.order() != order) {
        return Err(CoreError::OrderMismatch {
            expected: order,
            found: s.order(),
        }
        .into());
    }
    let subject: BTreeSet<Square> = squares.iter().cloned().collect();
    let members: Vec<Transformation> = candidate_universe(order)?
        .into_par_iter()
        .filter(|t| preserves(t, &subject))
        .collect();
    Ok(TransformationGroup::from_parts(members, subject)?)
}

pub fn squares_of(records: &[CatalogRecord], trigg: Trigg) -> Vec<Square> {
    records
        .iter()
        .filter(|r| r.trigg == trigg)
        .map(|r| r.square.clone())
        .collect()
}

/// Groups and orbit partitions for the four classes, with orbit ids written
/// back into `records`. Ids run from 1 over classes A to D, in peeling order
/// within a class.
pub fn census_records(records: &mut [CatalogRecord]) -> Result<Census> {
    let classes = Trigg::ALL
        .par_iter()
        .filter_map(|&trigg| {
            let squares = squares_of(records, trigg);
            (!squares.is_empty()).then_some((trigg, squares))
        })
        .map(|(trigg, squares)| {
            let group = parallel_group(&squares)?;
            Ok(census_class_with_group(trigg, &squares, group)?)
        })
        .collect::<Result<Vec<ClassCensus>>>()?;

    let mut ids: BTreeMap<&Square, (usize, bool)> = BTreeMap::new();
    let mut next = 1;
    for class in &classes {
        for orbit in &class.partition.orbits {
            for s in orbit.members() {
                ids.insert(s, (next, s == orbit.generator()));
            }
            next += 1;
        }
    }
    for r in records.iter_mut() {
        let (id, generator) = ids.get(&r.square).copied().ok_or(CoreError::NotInSubject)?;
        r.orbit_id = Some(id);
        r.is_generator = generator;
    }
    Ok(Census { classes })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub subject: String,
    pub expected: String,
    pub computed: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_orbits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub computed_orbits: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyReport {
    pub format: u32,
    pub order: usize,
    pub discrepancies: Vec<Finding>,
}

pub fn histogram_text(h: &BTreeMap<usize, usize>) -> String {
    let parts: Vec<String> = h.iter().rev().map(|(s, n)| format!("{s}:{n}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Pandiagonal squares (all broken diagonals magic) and the union of the
/// three 384-member classes, as catalog line sets.
pub fn pandiagonal_check(records: &[CatalogRecord]) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let mut sizes: BTreeMap<_, usize> = BTreeMap::new();
    for r in records {
        *sizes.entry(r.dudeney).or_default() += 1;
    }
    let pandiagonal = records
        .iter()
        .filter(|r| r.broken_diagonals == 6)
        .map(|r| r.line)
        .collect();
    let union = records
        .iter()
        .filter(|r| sizes[&r.dudeney] == 384)
        .map(|r| r.line)
        .collect();
    (pandiagonal, union)
}

/// Reference free-cell counts per order.
pub fn expected_free_cells(order: usize) -> Option<usize> {
    match order {
        4 => Some(7),
        5 => Some(13),
        _ => None,
    }
}

pub fn order4_findings(records: &[CatalogRecord], census: &Census) -> Result<Vec<Finding>> {
    let mut out = Vec::new();
    for order in [4, 5] {
        let free = build_system(order)?.free_cells().len();
        let expected = expected_free_cells(order).expect("listed");
        if free != expected {
            out.push(Finding {
                subject: format!("free cells, order {order}"),
                expected: expected.to_string(),
                computed: free.to_string(),
                expected_orbits: None,
                computed_orbits: None,
            });
        }
    }
    let (pandiagonal, union) = pandiagonal_check(records);
    if pandiagonal != union {
        out.push(Finding {
            subject: "pandiagonal squares".into(),
            expected: format!("the three 384-member classes ({} squares)", union.len()),
            computed: format!(
                "{} squares, {} of them inside those classes",
                pandiagonal.len(),
                pandiagonal.intersection(&union).count()
            ),
            expected_orbits: None,
            computed_orbits: None,
        });
    }
    for d in census.discrepancies() {
        out.push(Finding {
            subject: match d.class {
                Some(t) => format!("orbit histogram {t}"),
                None => "generator total".into(),
            },
            expected: if d.class.is_some() {
                histogram_text(&d.expected)
            } else {
                d.expected_orbits.to_string()
            },
            computed: if d.class.is_some() {
                histogram_text(&d.computed)
            } else {
                d.computed_orbits.to_string()
            },
            expected_orbits: Some(d.expected_orbits),
            computed_orbits: Some(d.computed_orbits),
        });
    }
    Ok(out)
}

pub fn render_discrepancies(order: usize, findings: &[Finding]) -> String {
    let report = DiscrepancyReport {
        format: 1,
        order,
        discrepancies: findings.to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("plain data serializes");
    s.push('\n');
    s
}

/// Analysis of one complete catalog.
#[derive(Debug, Clone)]
pub enum Analysis {
    /// Order 3: the whole catalog under one group.
    Single {
        group: TransformationGroup,
        partition: OrbitPartition,
    },
    Order4 {
        records: Vec<CatalogRecord>,
        census: Census,
        findings: Vec<Finding>,
    },
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub order: usize,
    pub catalog: Vec<Square>,
    pub analysis: Analysis,
}

impl Artifacts {
    pub fn generators(&self) -> usize {
        match &self.analysis {
            Analysis::Single { partition, .. } => partition.orbits.len(),
            Analysis::Order4 { census, .. } => census.total_generators(),
        }
    }

    pub fn findings(&self) -> &[Finding] {
        match &self.analysis {
            Analysis::Single { .. } => &[],
            Analysis::Order4 { findings, .. } => findings,
        }
    }

    /// Partition checks for every subject, including a reversed peel.
    pub fn verify(&self) -> Result<Vec<(String, PartitionVerdict, bool)>> {
        let check =
            |label: String, squares: &[Square], group: &TransformationGroup, p: &OrbitPartition| {
                let verdict = verify_partition(p, squares, group);
                let reversed = decompose(&label, squares, group, Selection::Descending)?;
                let same = reversed.as_set() == p.as_set();
                Ok::<_, Error>((label, verdict, same))
            };
        match &self.analysis {
            Analysis::Single { group, partition } => Ok(vec![check(
                format!("order {}", self.order),
                &self.catalog,
                group,
                partition,
            )?]),
            Analysis::Order4 { census, .. } => census
                .classes
                .par_iter()
                .map(|c| {
                    let squares: Vec<Square> = c.group.subject().iter().cloned().collect();
                    check(c.trigg.to_string(), &squares, &c.group, &c.partition)
                })
                .collect(),
        }
    }
}

/// Runs every stage in memory.
pub fn analyze(order: usize) -> Result<Artifacts> {
    if !(3..=4).contains(&order) {
        return Err(Error::Usage(format!(
            "the full pipeline runs for orders 3 and 4; order {order} needs `enumerate --long-run`"
        )));
    }
    let catalog = enumerate_parallel(order).stage("enumerate")?;
    let analysis = if order == 3 {
        let group = parallel_group(&catalog).stage("group")?;
        let partition =
            decompose("order 3", &catalog, &group, Selection::Ascending).stage("generators")?;
        Analysis::Single { group, partition }
    } else {
        if catalog.len() != ORDER4_TOTAL {
            return Err(CoreError::IncompleteCatalog {
                found: catalog.len(),
                expected: ORDER4_TOTAL,
            })
            .stage("enumerate");
        }
        let mut records = classify_catalog(&catalog).stage("classify")?;
        let census = census_records(&mut records).stage("generators")?;
        let findings = order4_findings(&records, &census).stage("report")?;
        Analysis::Order4 {
            records,
            census,
            findings,
        }
    };
    Ok(Artifacts {
        order,
        catalog,
        analysis,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub order: usize,
    pub squares: usize,
    pub generators: usize,
    pub discrepancies: usize,
    pub files: Vec<PathBuf>,
    pub text: String,
}

pub fn summary_text(artifacts: &Artifacts) -> Result<String> {
    let n = artifacts.order;
    let mut lines = vec![
        FORMAT_HEADER.to_string(),
        "# kind=summary".into(),
        format!("order={n}"),
        format!("squares={}", artifacts.catalog.len()),
        format!("free_cells={}", build_system(n)?.free_cells().len()),
    ];
    if n == 4 {
        lines.push(format!(
            "free_cells_order5={}",
            build_system(5)?.free_cells().len()
        ));
    }
    match &artifacts.analysis {
        Analysis::Single { group, partition } => {
            lines.push(format!("group_order={}", group.order()));
            lines.push(format!(
                "orbit_histogram={}",
                histogram_text(&partition.histogram())
            ));
        }
        Analysis::Order4 {
            records, census, ..
        } => {
            let mut pops: BTreeMap<String, usize> = BTreeMap::new();
            for r in records {
                *pops.entry(r.dudeney.to_string()).or_default() += 1;
            }
            let mut sizes: Vec<usize> = pops.values().copied().collect();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            lines.push(format!("signature_classes={}", pops.len()));
            lines.push(format!(
                "class_populations={}",
                sizes
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ));
            let (pandiagonal, union) = pandiagonal_check(records);
            lines.push(format!("pandiagonal={}", pandiagonal.len()));
            lines.push(format!("three_384_classes={}", union.len()));
            for c in &census.classes {
                lines.push(format!(
                    "class {}: population={} group={} pair_view={} orbits={} histogram={}",
                    c.trigg,
                    c.population(),
                    c.group.order(),
                    c.pair_view_order,
                    c.partition.orbits.len(),
                    histogram_text(&c.partition.histogram())
                ));
            }
        }
    }
    lines.push(format!("generators={}", artifacts.generators()));
    lines.push(format!("discrepancies={}", artifacts.findings().len()));
    Ok(lines.join("\n") + "\n")
}

/// Writes every artifact of `artifacts` into `out_dir`.
pub fn write_artifacts(artifacts: &Artifacts, out_dir: &Path) -> Result<Summary> {
    let n = artifacts.order;
    let mut files: Vec<(PathBuf, String)> = vec![(
        out_dir.join("catalog.txt"),
        render_catalog(n, &artifacts.catalog),
    )];
    match &artifacts.analysis {
        Analysis::Single { group, .. } => {
            files.push((
                out_dir.join("group.txt"),
                render_group(None, n, group.members(), group.pair_view().len()),
            ));
        }
        Analysis::Order4 {
            records, census, ..
        } => {
            files.push((out_dir.join("classes.tsv"), render_classification(records)));
            files.push((
                out_dir.join("classes.kv"),
                render_classification_kv(records),
            ));
            for c in &census.classes {
                files.push((
                    out_dir.join(format!("group-{}.txt", c.trigg)),
                    render_group(Some(c.trigg), n, c.group.members(), c.pair_view_order),
                ));
            }
        }
    }
    files.push((out_dir.join("generators.txt"), render_generators(artifacts)));
    files.push((
        out_dir.join("discrepancies.json"),
        render_discrepancies(n, artifacts.findings()),
    ));
    files.push((out_dir.join("report.txt"), emit_report(artifacts)));
    let text = summary_text(artifacts)?;
    files.push((out_dir.join("summary.txt"), text.clone()));

    for (path, contents) in &files {
        write_atomic(path, contents).stage("write")?;
    }
    Ok(Summary {
        order: n,
        squares: artifacts.catalog.len(),
        generators: artifacts.generators(),
        discrepancies: artifacts.findings().len(),
        files: files.into_iter().map(|(p, _)| p).collect(),
        text,
    })
}

pub fn run_pipeline(order: usize, out_dir: &Path) -> Result<Summary> {
    let artifacts = analyze(order)?;
    write_artifacts(&artifacts, out_dir)
}

/// Re-checks a catalog, classification or group listing file. Returns a
/// one-line description on success.
pub fn verify_file(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fail = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let kind = text
        .lines()
        .nth(1)
        .and_then(|l| l.strip_prefix("# kind="))
        .and_then(|l| l.split_whitespace().next())
        .unwrap_or("");
    match kind {
        "catalog" => {
            let catalog = crate::format::parse_catalog(path, &text)?;
            if let Some(i) = catalog.squares.iter().position(|s| !s.is_normal_magic()) {
                return Err(fail(format!("square {} is not magic", i + 1)));
            }
            let distinct: BTreeSet<&Square> = catalog.squares.iter().collect();
            if distinct.len() != catalog.squares.len() {
                return Err(fail("duplicate squares".into()));
            }
            Ok(format!(
                "catalog ok: {} squares of order {}",
                distinct.len(),
                catalog.order
            ))
        }
        "classification" => {
            let records = crate::format::parse_classification(path, &text)?;
            for r in &records {
                if !r.square.is_normal_magic() {
                    return Err(fail(format!("record {} is not magic", r.line)));
                }
                if r.broken_diagonals != r.square.magic_broken_diagonals() {
                    return Err(fail(format!(
                        "record {}: wrong broken diagonal count",
                        r.line
                    )));
                }
            }
            if records.len() == ORDER4_TOTAL {
                let squares: Vec<Square> = records.iter().map(|r| r.square.clone()).collect();
                let fresh = classify_catalog(&squares)?;
                for (r, f) in records.iter().zip(&fresh) {
                    if (r.dudeney, r.vi_split) != (f.dudeney, f.vi_split) {
                        return Err(fail(format!("record {}: label differs", r.line)));
                    }
                }
            }
            let mut orbits: BTreeMap<usize, Vec<&CatalogRecord>> = BTreeMap::new();
            for r in &records {
                match r.orbit_id {
                    Some(id) => orbits.entry(id).or_default().push(r),
                    None if r.is_generator => {
                        return Err(fail(format!("record {}: generator without orbit", r.line)))
                    }
                    None => {}
                }
            }
            for (id, members) in &orbits {
                let gens: Vec<_> = members.iter().filter(|r| r.is_generator).collect();
                let smallest = members
                    .iter()
                    .min_by(|a, b| a.square.text_cmp(&b.square))
                    .expect("nonempty");
                if gens.len() != 1 || gens[0].line != smallest.line {
                    return Err(fail(format!(
                        "orbit {id}: generator is not its smallest member"
                    )));
                }
            }
            Ok(format!(
                "classification ok: {} records, {} orbits",
                records.len(),
                orbits.len()
            ))
        }
        "group" => {
            let mut members = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                members.push(crate::format::parse_transformation(line).map_err(|source| {
                    Error::Parse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        source,
                    }
                })?);
            }
            let set: BTreeSet<&Transformation> = members.iter().collect();
            let first = members.first().ok_or_else(|| fail("empty group".into()))?;
            if !set.contains(&Transformation::identity(first.order())) {
                return Err(fail("identity missing".into()));
            }
            for a in &members {
                if !set.contains(&a.inverse()) {
                    return Err(fail(format!("no inverse for {a}")));
                }
                for b in &members {
                    if !set.contains(&a.compose(b)) {
                        return Err(fail(format!("not closed: {a} after {b}")));
                    }
                }
            }
            Ok(format!("group ok: {} members", set.len()))
        }
        other => Err(fail(format!("cannot verify a file of kind `{other}`"))),
    }
}
