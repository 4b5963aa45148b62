//! Orbit peeling: split a square set into orbits of its transformation
//! group, one generator per orbit.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::classify::{ClassLabel, Trigg};
use crate::group::{are_symmetric, symmetry_group, Orbit, TransformationGroup};
use crate::{Error, Result, Square};

/// Orbit size to number of orbits of that size.
pub type Histogram = BTreeMap<usize, usize>;

/// Which unassigned square is peeled next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    /// Smallest canonical text encoding first.
    Ascending,
    /// Largest first; used to check the result does not depend on order.
    Descending,
}

#[derive(Clone, Debug)]
pub struct OrbitPartition {
    pub subject: String,
    /// Orbits in the order they were peeled.
    pub orbits: Vec<Orbit>,
}

impl OrbitPartition {
    pub fn histogram(&self) -> Histogram {
        let mut h = Histogram::new();
        for o in &self.orbits {
            *h.entry(o.size()).or_default() += 1;
        }
        h
    }

    pub fn total(&self) -> usize {
        self.orbits.iter().map(Orbit::size).sum()
    }

    /// Generators sorted by canonical text encoding.
    pub fn generators(&self) -> Vec<&Square> {
        let mut g: Vec<&Square> = self.orbits.iter().map(Orbit::generator).collect();
        g.sort_by(|a, b| a.text_cmp(b));
        g
    }

    /// The orbits as a set of member sets, for order-free comparison.
    pub fn as_set(&self) -> BTreeSet<&BTreeSet<Square>> {
        self.orbits.iter().map(Orbit::members).collect()
    }
}

pub fn decompose(
    label: &str,
    subject: &[Square],
    group: &TransformationGroup,
    selection: Selection,
) -> Result<OrbitPartition> {
    let set: BTreeSet<Square> = subject.iter().cloned().collect();
    if &set != group.subject() {
        return Err(Error::SubjectMismatch);
    }
    let mut queue: Vec<(String, Square)> = set.into_iter().map(|s| (s.to_text(), s)).collect();
    queue.sort_by(|a, b| a.0.cmp(&b.0));
    if selection == Selection::Descending {
        queue.reverse();
    }

    let mut assigned: BTreeSet<Square> = BTreeSet::new();
    let mut orbits = Vec::new();
    for (_, square) in queue {
        if assigned.contains(&square) {
            continue;
        }
        let orbit = group.orbit(&square)?;
        assigned.extend(orbit.members().iter().cloned());
        orbits.push(orbit);
    }
    Ok(OrbitPartition {
        subject: label.into(),
        orbits,
    })
}

/// Outcome of an independent re-check of a partition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartitionVerdict {
    pub disjoint: bool,
    pub covering: bool,
    pub sizes_sum: bool,
    pub representatives_minimal: bool,
    pub generators_reproduce_orbits: bool,
    pub generators_pairwise_asymmetric: bool,
}

impl PartitionVerdict {
    pub fn passed(&self) -> bool {
        self.disjoint
            && self.covering
            && self.sizes_sum
            && self.representatives_minimal
            && self.generators_reproduce_orbits
            && self.generators_pairwise_asymmetric
    }
}

/// Re-checks a partition against its subject and group without reusing the
/// peeling code path. Generator pairs are compared by scanning every group
/// member.
pub fn verify_partition(
    partition: &OrbitPartition,
    subject: &[Square],
    group: &TransformationGroup,
) -> PartitionVerdict {
    let subject: BTreeSet<&Square> = subject.iter().collect();
    let mut seen: BTreeSet<&Square> = BTreeSet::new();
    let mut disjoint = true;
    for orbit in &partition.orbits {
        for s in orbit.members() {
            disjoint &= seen.insert(s);
        }
    }
    let total: usize = partition.orbits.iter().map(|o| o.members().len()).sum();

    let representatives_minimal = partition.orbits.iter().all(|o| {
        o.members().contains(o.generator())
            && o.members()
                .iter()
                .all(|s| o.generator().to_text() <= s.to_text())
    });
    let generators_reproduce_orbits = partition.orbits.iter().all(|o| {
        let image: BTreeSet<Square> = group
            .members()
            .iter()
            .filter_map(|t| t.apply(o.generator()).ok())
            .collect();
        &image == o.members()
    });
    let generators: Vec<&Square> = partition.orbits.iter().map(Orbit::generator).collect();
    let generators_pairwise_asymmetric = generators.iter().enumerate().all(|(i, a)| {
        generators[i + 1..]
            .iter()
            .all(|b| !are_symmetric(a, b, group.members()))
    });

    PartitionVerdict {
        disjoint,
        covering: seen == subject,
        sizes_sum: total == subject.len(),
        representatives_minimal,
        generators_reproduce_orbits,
        generators_pairwise_asymmetric,
    }
}

/// Reference orbit histograms for the four groups.
pub fn expected_histogram(trigg: Trigg) -> Histogram {
    let pairs: &[(usize, usize)] = match trigg {
        Trigg::A => &[(384, 3)],
        Trigg::B => &[(192, 12), (96, 4), (64, 10), (32, 20)],
        Trigg::C => &[(64, 12), (32, 32)],
        Trigg::D => &[(64, 2)],
    };
    pairs.iter().copied().collect()
}

/// Expected generator total over all four groups.
pub const EXPECTED_GENERATORS: usize = 95;

#[derive(Clone, Debug)]
pub struct ClassCensus {
    pub trigg: Trigg,
    pub group: TransformationGroup,
    /// Permutation pairs admitted with and without transposition.
    pub pair_view_order: usize,
    pub partition: OrbitPartition,
}

impl ClassCensus {
    pub fn population(&self) -> usize {
        self.group.subject().len()
    }

    /// Orbits grouped into sub-splits by orbit size, largest size first
    /// (`B-1` holds the largest orbits).
    pub fn sub_splits(&self) -> Vec<(String, usize, Vec<&Square>)> {
        let hist = self.partition.histogram();
        hist.keys()
            .rev()
            .enumerate()
            .map(|(i, &size)| {
                let mut gens: Vec<&Square> = self
                    .partition
                    .orbits
                    .iter()
                    .filter(|o| o.size() == size)
                    .map(Orbit::generator)
                    .collect();
                gens.sort_by(|a, b| a.text_cmp(b));
                (alloc::format!("{}-{}", self.trigg, i + 1), size, gens)
            })
            .collect()
    }
}

/// Computes the group of one class and peels it into orbits. Fails hard if
/// the orbit sizes do not add up to the class population.
pub fn census_class(trigg: Trigg, squares: &[Square]) -> Result<ClassCensus> {
    let group = symmetry_group(squares)?;
    census_class_with_group(trigg, squares, group)
}

pub fn census_class_with_group(
    trigg: Trigg,
    squares: &[Square],
    group: TransformationGroup,
) -> Result<ClassCensus> {
    let label = alloc::format!("{trigg}");
    let partition = decompose(&label, squares, &group, Selection::Ascending)?;
    if partition.total() != group.subject().len() {
        return Err(Error::SubjectMismatch);
    }
    Ok(ClassCensus {
        trigg,
        pair_view_order: group.pair_view().len(),
        group,
        partition,
    })
}

/// Splits a labeled catalog by group letter.
pub fn split_by_trigg(labeled: &[(Square, ClassLabel)]) -> BTreeMap<Trigg, Vec<Square>> {
    let mut by = BTreeMap::new();
    for (square, label) in labeled {
        by.entry(label.trigg)
            .or_insert_with(Vec::new)
            .push(square.clone());
    }
    by
}

/// A difference between a computed histogram and the expected one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrepancy {
    /// Group letter, or `None` for the overall generator total.
    pub class: Option<Trigg>,
    pub computed: Histogram,
    pub expected: Histogram,
    pub computed_orbits: usize,
    pub expected_orbits: usize,
}

#[derive(Clone, Debug)]
pub struct Census {
    pub classes: Vec<ClassCensus>,
}

pub fn census(labeled: &[(Square, ClassLabel)]) -> Result<Census> {
    let classes = split_by_trigg(labeled)
        .into_iter()
        .map(|(trigg, squares)| census_class(trigg, &squares))
        .collect::<Result<Vec<_>>>()?;
    Ok(Census { classes })
}

impl Census {
    pub fn total_generators(&self) -> usize {
        self.classes.iter().map(|c| c.partition.orbits.len()).sum()
    }

    pub fn class(&self, trigg: Trigg) -> Option<&ClassCensus> {
        self.classes.iter().find(|c| c.trigg == trigg)
    }

    /// Per-class histogram mismatches plus a total entry when the generator
    /// count differs. Empty when everything matches.
    pub fn discrepancies(&self) -> Vec<Discrepancy> {
        let mut out: Vec<Discrepancy> = Trigg::ALL
            .iter()
            .filter_map(|&trigg| {
                let expected = expected_histogram(trigg);
                let computed = self
                    .class(trigg)
                    .map(|c| c.partition.histogram())
                    .unwrap_or_default();
                (computed != expected).then(|| Discrepancy {
                    class: Some(trigg),
                    computed_orbits: computed.values().sum(),
                    expected_orbits: expected.values().sum(),
                    computed,
                    expected,
                })
            })
            .collect();
        if self.total_generators() != EXPECTED_GENERATORS {
            out.push(Discrepancy {
                class: None,
                computed: Histogram::new(),
                expected: Histogram::new(),
                computed_orbits: self.total_generators(),
                expected_orbits: EXPECTED_GENERATORS,
            });
        }
        out
    }
}
