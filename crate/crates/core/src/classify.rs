//! Complement-pair classification of order-4 squares.
//!
//! The values `1..=16` form eight pairs summing to 17. Where those pairs sit
//! in the grid, taken up to rotation and reflection, splits the 7040 squares
//! into twelve classes. The classes are discovered from the catalog itself
//! and then numbered `I`..`XII`:
//!
//! | population | numerals      | group |
//! |-----------:|---------------|:-----:|
//! | 384        | I, II, III    | A     |
//! | 768        | IV, V         | B     |
//! | 2432       | VI            | B     |
//! | 448        | VII .. X      | C     |
//! | 64         | XI, XII       | D     |
//!
//! Inside a population tie the class whose smallest member (by canonical
//! text encoding) sorts first takes the lower numeral.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::constraints::{dependent_cells_order4, validate_grid, GridVerdict};
use crate::square::Transformation;
use crate::{Error, Result, Square};

/// Number of order-4 normal magic squares.
pub const ORDER4_TOTAL: usize = 7040;

/// Class populations in numeral order I..XII.
pub const CLASS_POPULATIONS: [usize; 12] =
    [384, 384, 384, 768, 768, 2432, 448, 448, 448, 448, 64, 64];

/// Free cells `a b c e f g i` of the order-4 basis.
pub const ORDER4_BASIS_CELLS: [usize; 7] = [0, 1, 2, 4, 5, 6, 8];

/// Complement-pair positions canonicalized over the eight grid symmetries.
///
/// Each pair is stored as its sorted cell indices and the pair list is
/// sorted; the signature is the smallest such list over all symmetries.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairingSignature(Vec<(u8, u8)>);

impl PairingSignature {
    pub fn pairs(&self) -> &[(u8, u8)] {
        &self.0
    }
}

impl fmt::Display for PairingSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}-{b}")?;
        }
        Ok(())
    }
}

pub fn signature(square: &Square) -> Result<PairingSignature> {
    if square.order() != 4 {
        return Err(Error::UnsupportedOrder {
            order: square.order(),
            reason: "pairing signatures are defined for order 4",
        });
    }
    let pairs = square.complement_pairs()?;
    // where each cell index lands under each symmetry
    let index_square = Square::from_cells_unchecked(4, (0..16).collect());
    let best = Transformation::grid_symmetries(4)
        .iter()
        .map(|t| {
            let moved = t.apply_unchecked(&index_square);
            let mut dest = [0u8; 16];
            for (to, &from) in moved.cells().iter().enumerate() {
                dest[from as usize] = to as u8;
            }
            let mut encoded: Vec<(u8, u8)> = pairs
                .iter()
                .map(|&(p, q)| {
                    let (p, q) = (dest[p as usize], dest[q as usize]);
                    (p.min(q), p.max(q))
                })
                .collect();
            encoded.sort_unstable();
            encoded
        })
        .min()
        .expect("eight symmetries");
    Ok(PairingSignature(best))
}

/// Class numeral `I`..`XII`, stored as 1..=12.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dudeney(u8);

const NUMERALS: [&str; 12] = [
    "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII",
];

impl Dudeney {
    pub const VI: Dudeney = Dudeney(6);

    pub fn new(n: u8) -> Option<Dudeney> {
        (1..=12).contains(&n).then_some(Dudeney(n))
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn numeral(self) -> &'static str {
        NUMERALS[self.0 as usize - 1]
    }

    pub fn from_numeral(s: &str) -> Option<Dudeney> {
        NUMERALS
            .iter()
            .position(|&n| n == s)
            .map(|i| Dudeney(i as u8 + 1))
    }

    pub fn trigg(self) -> Trigg {
        match self.0 {
            1..=3 => Trigg::A,
            4..=6 => Trigg::B,
            7..=10 => Trigg::C,
            _ => Trigg::D,
        }
    }

    pub fn all() -> impl Iterator<Item = Dudeney> {
        (1..=12).map(Dudeney)
    }
}

impl fmt::Display for Dudeney {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.numeral())
    }
}

/// The coarse four-way grouping of the twelve classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trigg {
    A,
    B,
    C,
    D,
}

impl Trigg {
    pub const ALL: [Trigg; 4] = [Trigg::A, Trigg::B, Trigg::C, Trigg::D];

    pub fn letter(self) -> char {
        match self {
            Trigg::A => 'A',
            Trigg::B => 'B',
            Trigg::C => 'C',
            Trigg::D => 'D',
        }
    }

    pub fn from_letter(s: &str) -> Option<Trigg> {
        match s {
            "A" => Some(Trigg::A),
            "B" => Some(Trigg::B),
            "C" => Some(Trigg::C),
            "D" => Some(Trigg::D),
            _ => None,
        }
    }

    pub fn population(self) -> usize {
        match self {
            Trigg::A => 1152,
            Trigg::B => 3968,
            Trigg::C => 1792,
            Trigg::D => 128,
        }
    }
}

impl fmt::Display for Trigg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Sub-split of class VI: `DoublePrime` squares have at least one broken
/// diagonal summing to 34.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViSplit {
    Prime,
    DoublePrime,
}

impl ViSplit {
    pub fn marker(self) -> &'static str {
        match self {
            ViSplit::Prime => "VI'",
            ViSplit::DoublePrime => "VI''",
        }
    }

    pub fn from_marker(s: &str) -> Option<ViSplit> {
        match s {
            "VI'" => Some(ViSplit::Prime),
            "VI''" => Some(ViSplit::DoublePrime),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassLabel {
    pub dudeney: Dudeney,
    pub trigg: Trigg,
    pub vi_split: Option<ViSplit>,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.vi_split {
            Some(split) => write!(f, "{} ({})", split.marker(), self.trigg),
            None => write!(f, "{} ({})", self.dudeney, self.trigg),
        }
    }
}

pub fn split_type_vi(square: &Square, dudeney: Dudeney) -> Result<ViSplit> {
    if dudeney != Dudeney::VI {
        return Err(Error::WrongClass {
            expected: "VI",
            found: dudeney.numeral().to_string(),
        });
    }
    Ok(if square.magic_broken_diagonals() > 0 {
        ViSplit::DoublePrime
    } else {
        ViSplit::Prime
    })
}

#[derive(Clone, Debug)]
pub struct SignatureClass {
    pub signature: PairingSignature,
    /// Members in catalog order.
    pub members: Vec<Square>,
}

impl SignatureClass {
    pub fn population(&self) -> usize {
        self.members.len()
    }

    /// Smallest member by canonical text encoding.
    pub fn smallest_member(&self) -> &Square {
        self.members
            .iter()
            .min_by(|a, b| a.text_cmp(b))
            .expect("classes are nonempty")
    }
}

/// Partitions the complete order-4 catalog by pairing signature. Classes come
/// back sorted by signature.
pub fn discover_classes(catalog: &[Square]) -> Result<Vec<SignatureClass>> {
    if catalog.len() != ORDER4_TOTAL {
        return Err(Error::IncompleteCatalog {
            found: catalog.len(),
            expected: ORDER4_TOTAL,
        });
    }
    let mut by_sig: BTreeMap<PairingSignature, Vec<Square>> = BTreeMap::new();
    for square in catalog {
        by_sig
            .entry(signature(square)?)
            .or_default()
            .push(square.clone());
    }
    Ok(by_sig
        .into_iter()
        .map(|(signature, members)| SignatureClass { signature, members })
        .collect())
}

/// Signature to numeral table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    by_signature: BTreeMap<PairingSignature, Dudeney>,
}

pub fn assign_labels(classes: &[SignatureClass]) -> Result<Labeling> {
    let mut found: Vec<usize> = classes.iter().map(|c| c.population()).collect();
    found.sort_unstable();
    let mut expected = CLASS_POPULATIONS.to_vec();
    expected.sort_unstable();
    if found != expected {
        return Err(Error::PopulationMismatch { found });
    }

    let mut by_signature = BTreeMap::new();
    let mut next = 1u8;
    // populations in numeral order, each tie group once
    let mut groups: Vec<usize> = CLASS_POPULATIONS.to_vec();
    groups.dedup();
    for population in groups {
        let mut tied: Vec<(alloc::string::String, &SignatureClass)> = classes
            .iter()
            .filter(|c| c.population() == population)
            .map(|c| (c.smallest_member().to_text(), c))
            .collect();
        tied.sort_by(|a, b| a.0.cmp(&b.0));
        for (_, class) in tied {
            by_signature.insert(class.signature.clone(), Dudeney(next));
            next += 1;
        }
    }
    Ok(Labeling { by_signature })
}

impl Labeling {
    pub fn dudeney(&self, signature: &PairingSignature) -> Option<Dudeney> {
        self.by_signature.get(signature).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PairingSignature, Dudeney)> {
        self.by_signature.iter().map(|(s, &d)| (s, d))
    }
}

/// Full-signature classifier over a discovered labeling.
#[derive(Clone, Debug)]
pub struct Classifier {
    labeling: Labeling,
}

impl Classifier {
    pub fn new(labeling: Labeling) -> Classifier {
        Classifier { labeling }
    }

    /// Discovers and labels the classes of a complete catalog.
    pub fn from_catalog(catalog: &[Square]) -> Result<Classifier> {
        Ok(Classifier::new(assign_labels(&discover_classes(catalog)?)?))
    }

    pub fn labeling(&self) -> &Labeling {
        &self.labeling
    }

    pub fn classify(&self, square: &Square) -> Result<ClassLabel> {
        if !square.is_normal_magic() {
            return Err(Error::NotMagic);
        }
        let dudeney = self
            .labeling
            .dudeney(&signature(square)?)
            .ok_or(Error::NotMagic)?;
        let vi_split = (dudeney == Dudeney::VI)
            .then(|| split_type_vi(square, dudeney))
            .transpose()?;
        Ok(ClassLabel {
            dudeney,
            trigg: dudeney.trigg(),
            vi_split,
        })
    }
}

/// Which route produced a fast classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassPath {
    /// The complement pairs among the free cells matched a single class.
    Template,
    /// The partial scan was ambiguous; the full signature decided.
    Fallback,
}

type TemplateKey = Vec<(u8, u8)>;

/// Classifies from the seven basis cells by looking only at complement pairs
/// whose two cells are both free. Templates are learned from a labeled
/// catalog; a template that maps to more than one class is ambiguous and
/// sends the square to the full-signature path.
#[derive(Clone, Debug)]
pub struct FastClassifier {
    full: Classifier,
    templates: BTreeMap<TemplateKey, Option<Dudeney>>,
}

fn template_key(basis: &[u8; 7]) -> TemplateKey {
    let mut key = Vec::new();
    for i in 0..7 {
        for j in i + 1..7 {
            if basis[i] as u16 + basis[j] as u16 == 17 {
                key.push((ORDER4_BASIS_CELLS[i] as u8, ORDER4_BASIS_CELLS[j] as u8));
            }
        }
    }
    key
}

pub fn basis_of(square: &Square) -> [u8; 7] {
    ORDER4_BASIS_CELLS.map(|c| square.cells()[c])
}

impl FastClassifier {
    /// Learns templates from `catalog` and then checks every catalog square
    /// against the full path. Fails if any square disagrees.
    pub fn train(full: Classifier, catalog: &[Square]) -> Result<FastClassifier> {
        let mut templates: BTreeMap<TemplateKey, Option<Dudeney>> = BTreeMap::new();
        for square in catalog {
            let label = full.classify(square)?.dudeney;
            templates
                .entry(template_key(&basis_of(square)))
                .and_modify(|slot| {
                    if *slot != Some(label) {
                        *slot = None;
                    }
                })
                .or_insert(Some(label));
        }
        let fast = FastClassifier { full, templates };
        let disagreements = fast.disagreements(catalog)?;
        if disagreements != 0 {
            return Err(Error::WrongClass {
                expected: "agreement with the full signature path",
                found: alloc::format!("{disagreements} disagreements"),
            });
        }
        Ok(fast)
    }

    pub fn full(&self) -> &Classifier {
        &self.full
    }

    /// Number of distinct templates and how many of them decide a class.
    pub fn template_stats(&self) -> (usize, usize) {
        let decisive = self.templates.values().filter(|v| v.is_some()).count();
        (self.templates.len(), decisive)
    }

    pub fn classify_basis(&self, basis: [u8; 7]) -> Result<(ClassLabel, ClassPath)> {
        let grid = dependent_cells_order4(basis.map(i64::from));
        match validate_grid(4, &grid) {
            GridVerdict::Valid => {}
            GridVerdict::OutOfRange { index, value } => {
                return Err(Error::ValueOutOfRange {
                    index,
                    value,
                    max: 16,
                })
            }
            GridVerdict::Duplicate { index, value } => {
                return Err(Error::DuplicateValue { index, value })
            }
        }
        let square = Square::from_values(4, &grid)?;
        if !square.is_normal_magic() {
            return Err(Error::NotMagic);
        }
        match self.templates.get(&template_key(&basis)).copied().flatten() {
            Some(dudeney) => {
                let vi_split = (dudeney == Dudeney::VI)
                    .then(|| split_type_vi(&square, dudeney))
                    .transpose()?;
                Ok((
                    ClassLabel {
                        dudeney,
                        trigg: dudeney.trigg(),
                        vi_split,
                    },
                    ClassPath::Template,
                ))
            }
            None => Ok((self.full.classify(&square)?, ClassPath::Fallback)),
        }
    }

    /// Squares in `catalog` where the fast and full paths disagree.
    pub fn disagreements(&self, catalog: &[Square]) -> Result<usize> {
        let mut count = 0;
        for square in catalog {
            let (fast, _) = self.classify_basis(basis_of(square))?;
            if fast != self.full.classify(square)? {
                count += 1;
            }
        }
        Ok(count)
    }
}
