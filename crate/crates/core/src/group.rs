//! Transformation groups of square sets and the orbits they generate.
//!
//! The candidate universe holds every `(row perm, column perm, transpose)`
//! triple of a given order. The group of a set `G` keeps the triples that map
//! every member of `G` back into `G`; each triple is admitted on its own.
//! [`TransformationGroup::pair_view`] gives the coarser reading in which a
//! permutation pair counts only when both of its triples are admitted.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::perm::all_permutations;
use crate::{Error, Result, Square, Transformation};

/// Largest order with a materialized universe: `(5!)² · 2 = 28800` triples.
pub const MAX_UNIVERSE_ORDER: usize = 5;

/// All `(n!)² · 2` triples: untransposed first, then row permutation and
/// column permutation in lexicographic order.
pub fn candidate_universe(n: usize) -> Result<Vec<Transformation>> {
    if n == 0 || n > MAX_UNIVERSE_ORDER {
        return Err(Error::UnsupportedOrder {
            order: n,
            reason: "the transformation universe is materialized up to order 5",
        });
    }
    let perms = all_permutations(n);
    let mut out = Vec::with_capacity(perms.len() * perms.len() * 2);
    for transposed in [false, true] {
        for rows in &perms {
            for cols in &perms {
                out.push(Transformation::new(rows.clone(), cols.clone(), transposed)?);
            }
        }
    }
    Ok(out)
}

/// True iff `t` maps every square of `subject` into `subject`.
pub fn preserves(t: &Transformation, subject: &BTreeSet<Square>) -> bool {
    subject
        .iter()
        .all(|s| subject.contains(&t.apply_unchecked(s)))
}

fn subject_set(squares: &[Square]) -> Result<BTreeSet<Square>> {
    let order = squares.first().ok_or(Error::EmptySet)?.order();
    if let Some(other) = squares.iter().find(|s| s.order() != order) {
        return Err(Error::OrderMismatch {
            expected: order,
            found: other.order(),
        });
    }
    Ok(squares.iter().cloned().collect())
}

#[derive(Clone, Debug)]
pub struct TransformationGroup {
    members: Vec<Transformation>,
    subject: BTreeSet<Square>,
}

/// Filters the candidate universe down to the triples preserving `squares`
/// and verifies the group axioms on the result.
pub fn symmetry_group(squares: &[Square]) -> Result<TransformationGroup> {
    let subject = subject_set(squares)?;
    let order = subject.first().expect("nonempty").order();
    let members = candidate_universe(order)?
        .into_iter()
        .filter(|t| preserves(t, &subject))
        .collect();
    TransformationGroup::from_parts(members, subject)
}

impl TransformationGroup {
    /// Wraps members filtered elsewhere (e.g. in parallel), re-checking that
    /// each preserves the subject and that the axioms hold.
    pub fn from_parts(
        mut members: Vec<Transformation>,
        subject: BTreeSet<Square>,
    ) -> Result<TransformationGroup> {
        if subject.is_empty() {
            return Err(Error::EmptySet);
        }
        if !members.iter().all(|t| preserves(t, &subject)) {
            return Err(Error::GroupAxiom("a member does not preserve the subject"));
        }
        members.sort();
        members.dedup();
        let group = TransformationGroup { members, subject };
        group.verify_axioms()?;
        Ok(group)
    }

    /// Identity, closure under composition, and inverses.
    pub fn verify_axioms(&self) -> Result<()> {
        let n = self.subject.first().expect("nonempty").order();
        if !self.contains(&Transformation::identity(n)) {
            return Err(Error::GroupAxiom("identity missing"));
        }
        for a in &self.members {
            if !self.contains(&a.inverse()) {
                return Err(Error::GroupAxiom("not closed under inverses"));
            }
            for b in &self.members {
                if !self.contains(&a.compose(b)) {
                    return Err(Error::GroupAxiom("not closed under composition"));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, t: &Transformation) -> bool {
        self.members.binary_search(t).is_ok()
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Transformation] {
        &self.members
    }

    pub fn subject(&self) -> &BTreeSet<Square> {
        &self.subject
    }

    /// Permutation pairs whose plain and transposed triples are both members.
    pub fn pair_view(&self) -> Vec<(&[u8], &[u8])> {
        self.members
            .iter()
            .filter(|t| !t.is_transposed())
            .filter(|t| {
                let flipped =
                    Transformation::new(t.row_perm().to_vec(), t.col_perm().to_vec(), true)
                        .expect("same permutations");
                self.contains(&flipped)
            })
            .map(|t| (t.row_perm(), t.col_perm()))
            .collect()
    }

    pub fn orbit(&self, square: &Square) -> Result<Orbit> {
        if !self.subject.contains(square) {
            return Err(Error::NotInSubject);
        }
        let members: BTreeSet<Square> = self
            .members
            .iter()
            .map(|t| t.apply_unchecked(square))
            .collect();
        Ok(Orbit::new(members))
    }
}

/// True iff some triple of `universe` maps `a` to `b`.
pub fn are_symmetric(a: &Square, b: &Square, universe: &[Transformation]) -> bool {
    a.order() == b.order()
        && universe
            .iter()
            .any(|t| t.order() == a.order() && t.apply_unchecked(a) == *b)
}

/// One orbit with its representative: the member whose canonical text
/// encoding sorts first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    members: BTreeSet<Square>,
    generator: Square,
}

impl Orbit {
    pub fn new(members: BTreeSet<Square>) -> Orbit {
        let generator = members
            .iter()
            .min_by(|a, b| a.text_cmp(b))
            .expect("orbits are nonempty")
            .clone();
        Orbit { members, generator }
    }

    pub fn members(&self) -> &BTreeSet<Square> {
        &self.members
    }

    pub fn generator(&self) -> &Square {
        &self.generator
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

pub fn orbit(square: &Square, group: &TransformationGroup) -> Result<Orbit> {
    group.orbit(square)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::collect;
    use crate::square::tests::{durer, lo_shu};
    use alloc::vec;

    #[test]
    fn universe_sizes() {
        assert_eq!(candidate_universe(4).unwrap().len(), 1152);
        assert_eq!(candidate_universe(3).unwrap().len(), 72);
        assert!(candidate_universe(3)
            .unwrap()
            .contains(&Transformation::identity(3)));
        assert!(matches!(
            candidate_universe(6),
            Err(Error::UnsupportedOrder { order: 6, .. })
        ));
    }

    #[test]
    fn order3_group_is_dihedral() {
        let all = collect(3).unwrap();
        let group = symmetry_group(&all).unwrap();
        assert_eq!(group.order(), 8);
        let mut syms = Transformation::grid_symmetries(3);
        syms.sort();
        assert_eq!(group.members(), syms.as_slice());
        let orbit = group.orbit(&lo_shu()).unwrap();
        assert_eq!(orbit.size(), 8);
        assert_eq!(orbit.members().len(), all.len());
        assert_eq!(group.order() % orbit.size(), 0);
        assert_eq!(orbit.generator().to_text(), "2 7 6 9 5 1 4 3 8");
        // every pair has both its triples
        assert_eq!(group.pair_view().len(), 4);
    }

    #[test]
    fn transpose_pair() {
        let d = durer();
        let group = symmetry_group(&[d.clone(), d.transpose()]).unwrap();
        assert!(group.contains(&Transformation::identity(4)));
        let transpose = Transformation::new(vec![0, 1, 2, 3], vec![0, 1, 2, 3], true).unwrap();
        assert!(group.contains(&transpose));
    }

    #[test]
    fn symmetric_pairs() {
        let universe = candidate_universe(3).unwrap();
        let l = lo_shu();
        assert!(are_symmetric(&l, &l, &universe));
        let rotated = Transformation::rotation(3).apply(&l).unwrap();
        assert!(are_symmetric(&l, &rotated, &universe));
        assert!(!are_symmetric(&l, &durer(), &universe));
    }

    #[test]
    fn bad_inputs() {
        assert_eq!(symmetry_group(&[]).unwrap_err(), Error::EmptySet);
        assert!(matches!(
            symmetry_group(&[lo_shu(), durer()]),
            Err(Error::OrderMismatch { .. })
        ));
        let group = symmetry_group(&[lo_shu()]).unwrap();
        let rotated = Transformation::rotation(3).apply(&lo_shu()).unwrap();
        assert_eq!(group.orbit(&rotated).unwrap_err(), Error::NotInSubject);
        let subject: BTreeSet<Square> = [lo_shu()].into_iter().collect();
        assert!(matches!(
            TransformationGroup::from_parts(vec![Transformation::rotation(3)], subject),
            Err(Error::GroupAxiom(_))
        ));
    }
}
