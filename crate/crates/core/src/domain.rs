//! Elements, bundles, (partial) assignments and the dense value function.
//!
//! Elements are indexed `0..n` and alternatives `0..m`. A bundle is an
//! `n`-bit mask. The value function is stored densely as `2^n × m` reals in
//! mask-major order, so a lookup is a single index computation.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::binio;
use crate::error::{Error, Result};

/// Largest supported element count; keeps `2^n × m` addressable.
pub const MAX_ELEMENTS: usize = 30;
/// Largest supported alternative count; labels are stored as bytes with
/// `UNASSIGNED` reserved.
pub const MAX_ALTERNATIVES: usize = 255;
/// Label sentinel for elements not yet placed in any bundle.
pub const UNASSIGNED: u8 = u8::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProblemSpec {
    n: usize,
    m: usize,
    seed: u64,
}

impl ProblemSpec {
    pub fn new(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_ELEMENTS {
            return Err(Error::usage(format!(
                "element count n={n} outside 1..={MAX_ELEMENTS}"
            )));
        }
        if m == 0 || m > MAX_ALTERNATIVES {
            return Err(Error::usage(format!(
                "alternative count m={m} outside 1..={MAX_ALTERNATIVES}"
            )));
        }
        Ok(Self { n, m, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of distinct bundles, `2^n`.
    pub fn bundle_count(&self) -> usize {
        1usize << self.n
    }
}

/// A subset of elements as a bitmask (bit `j` ⇔ element `j`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bundle(pub u32);

impl Bundle {
    pub const EMPTY: Bundle = Bundle(0);

    pub fn full(n: usize) -> Self {
        Bundle(((1u64 << n) - 1) as u32)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, element: usize) -> bool {
        self.0 >> element & 1 == 1
    }

    pub fn with(self, element: usize) -> Self {
        Bundle(self.0 | 1 << element)
    }
}

/// Dense value function `v(C, t)`; immutable after construction.
#[derive(Clone, PartialEq)]
pub struct ValueTable {
    spec: ProblemSpec,
    values: Vec<f64>,
}

impl fmt::Debug for ValueTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValueTable")
            .field("n", &self.spec.n)
            .field("m", &self.spec.m)
            .field("seed", &self.spec.seed)
            .finish_non_exhaustive()
    }
}

const TABLE_MAGIC: &[u8; 4] = b"UCAV";
const TABLE_VERSION: u8 = 1;
const TABLE_KIND: &str = "value table";

impl ValueTable {
    /// Wrap mask-major values (`values[mask * m + t]`).
    pub fn from_values(spec: ProblemSpec, values: Vec<f64>) -> Result<Self> {
        let expected = spec.bundle_count() * spec.m;
        if values.len() != expected {
            return Err(Error::usage(format!(
                "value table needs {expected} entries, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::usage(format!(
                "value table entry {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self { spec, values })
    }

    /// Build a table by calling `f(bundle, alternative)` in mask-major order.
    pub fn from_fn(spec: ProblemSpec, mut f: impl FnMut(Bundle, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.bundle_count() * spec.m);
        for mask in 0..spec.bundle_count() {
            for t in 0..spec.m {
                values.push(f(Bundle(mask as u32), t));
            }
        }
        Self::from_values(spec, values)
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, bundle: Bundle, alternative: usize) -> f64 {
        self.values[bundle.0 as usize * self.spec.m + alternative]
    }

    /// `Σ_t v(masks[t], t)`, summed in alternative order.
    #[inline]
    pub fn sum_bundles(&self, masks: &[u32]) -> f64 {
        debug_assert_eq!(masks.len(), self.spec.m);
        let m = self.spec.m;
        masks
            .iter()
            .enumerate()
            .map(|(t, &mask)| self.values[mask as usize * m + t])
            .sum()
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_header(w, TABLE_MAGIC, TABLE_VERSION)?;
        w.write_all(&(self.spec.n as u32).to_le_bytes())?;
        w.write_all(&(self.spec.m as u32).to_le_bytes())?;
        w.write_all(&self.spec.seed.to_le_bytes())?;
        binio::write_f64s(w, &self.values)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        binio::read_header(r, TABLE_KIND, TABLE_MAGIC, TABLE_VERSION)?;
        let n = binio::read_u32(r, TABLE_KIND)? as usize;
        let m = binio::read_u32(r, TABLE_KIND)? as usize;
        let seed = binio::read_u64(r, TABLE_KIND)?;
        let spec = ProblemSpec::new(n, m, seed)
            .map_err(|e| Error::format(TABLE_KIND, e.to_string()))?;
        let values = binio::read_f64s(r, TABLE_KIND, spec.bundle_count() * m)?;
        binio::expect_eof(r, TABLE_KIND)?;
        Self::from_values(spec, values).map_err(|e| Error::format(TABLE_KIND, e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

/// A combinatorial assignment over some subset of the elements.
///
/// `labels[j]` is the alternative holding element `j`, or `UNASSIGNED`.
/// The assigned mask is cached and always agrees with the labels, which
/// makes the derived bundles disjoint by construction.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PartialAssignment {
    n: u8,
    m: u8,
    labels: [u8; MAX_ELEMENTS],
    assigned: u32,
}

impl fmt::Debug for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (j, l) in self.raw_labels().iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            match *l {
                UNASSIGNED => write!(f, "-")?,
                l => write!(f, "{l}")?,
            }
        }
        write!(f, "]")
    }
}

impl PartialAssignment {
    pub fn empty(n: usize, m: usize) -> Self {
        assert!(n <= MAX_ELEMENTS && m <= MAX_ALTERNATIVES);
        Self {
            n: n as u8,
            m: m as u8,
            labels: [UNASSIGNED; MAX_ELEMENTS],
            assigned: 0,
        }
    }

    pub fn for_table(table: &ValueTable) -> Self {
        Self::empty(table.n(), table.m())
    }

    /// Build from byte labels in `0..m` or `UNASSIGNED`.
    pub fn from_raw_labels(m: usize, labels: &[u8]) -> Result<Self> {
        let n = labels.len();
        if n == 0 || n > MAX_ELEMENTS || m == 0 || m > MAX_ALTERNATIVES {
            return Err(Error::usage(format!("bad dimensions n={n}, m={m}")));
        }
        let mut s = Self::empty(n, m);
        for (j, &l) in labels.iter().enumerate() {
            if l != UNASSIGNED {
                if l as usize >= m {
                    return Err(Error::usage(format!(
                        "label {l} of element {j} out of range for m={m}"
                    )));
                }
                s.labels[j] = l;
                s.assigned |= 1 << j;
            }
        }
        Ok(s)
    }

    /// Build from per-element labels; `None` marks an unassigned element.
    pub fn from_labels(m: usize, labels: &[Option<usize>]) -> Result<Self> {
        let raw: Vec<u8> = labels
            .iter()
            .map(|l| match *l {
                None => Ok(UNASSIGNED),
                Some(t) if t < m => Ok(t as u8),
                Some(t) => Err(Error::usage(format!("label {t} out of range for m={m}"))),
            })
            .collect::<Result<_>>()?;
        Self::from_raw_labels(m, &raw)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn m(&self) -> usize {
        self.m as usize
    }

    pub fn raw_labels(&self) -> &[u8] {
        &self.labels[..self.n as usize]
    }

    pub fn label(&self, element: usize) -> Option<usize> {
        match self.labels[element] {
            UNASSIGNED => None,
            l => Some(l as usize),
        }
    }

    pub fn assigned_mask(&self) -> u32 {
        self.assigned
    }

    /// `||S||`: number of assigned elements.
    pub fn assigned_count(&self) -> usize {
        self.assigned.count_ones() as usize
    }

    pub fn is_complete(&self) -> bool {
        self.assigned_count() == self.n()
    }

    pub fn is_assigned(&self, element: usize) -> bool {
        self.assigned >> element & 1 == 1
    }

    pub fn unassigned(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&j| !self.is_assigned(j))
    }

    /// Bundle held by `alternative`.
    pub fn bundle(&self, alternative: usize) -> Bundle {
        let mut mask = 0u32;
        for (j, &l) in self.raw_labels().iter().enumerate() {
            if l as usize == alternative {
                mask |= 1 << j;
            }
        }
        Bundle(mask)
    }

    /// All `m` bundle masks, indexed by alternative.
    pub fn bundle_masks(&self) -> Vec<u32> {
        let mut masks = vec![0u32; self.m()];
        self.fill_masks(&mut masks);
        masks
    }

    pub(crate) fn fill_masks(&self, masks: &mut [u32]) {
        masks.iter_mut().for_each(|b| *b = 0);
        for (j, &l) in self.raw_labels().iter().enumerate() {
            if l != UNASSIGNED {
                masks[l as usize] |= 1 << j;
            }
        }
    }

    /// Copy with `element` placed in `alternative`.
    pub fn with_label(&self, element: usize, alternative: usize) -> Result<Self> {
        if element >= self.n() {
            return Err(Error::usage(format!(
                "element {element} out of range for n={}",
                self.n
            )));
        }
        if alternative >= self.m() {
            return Err(Error::usage(format!(
                "alternative {alternative} out of range for m={}",
                self.m
            )));
        }
        if self.is_assigned(element) {
            return Err(Error::usage(format!("element {element} is already assigned")));
        }
        let mut child = *self;
        child.labels[element] = alternative as u8;
        child.assigned |= 1 << element;
        Ok(child)
    }

    /// The `m` single-element extensions placing `element` into each
    /// alternative in index order.
    pub fn expand_children(&self, element: usize) -> Result<Vec<Self>> {
        (0..self.m())
            .map(|t| self.with_label(element, t))
            .collect()
    }
}

/// `V(S) = Σ_t v(C_t, t)`; empty bundles contribute `v(∅, t)`.
pub fn value_of(s: &PartialAssignment, v: &ValueTable) -> Result<f64> {
    if s.n() != v.n() || s.m() != v.m() {
        return Err(Error::usage(format!(
            "assignment is {}x{} but table is {}x{}",
            s.n(),
            s.m(),
            v.n(),
            v.m()
        )));
    }
    let mut masks = [0u32; MAX_ALTERNATIVES];
    let masks = &mut masks[..v.m()];
    s.fill_masks(masks);
    Ok(v.sum_bundles(masks))
}

/// A permutation of the element indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementOrder {
    perm: Vec<usize>,
}

impl ElementOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::usage(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Self { perm })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        Self { perm }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use rand::Rng;
    use proptest::prelude::*;


    fn random_table(n: usize, m: usize, seed: u64) -> ValueTable {
        let mut rng = seeds::rng(seed);
        ValueTable::from_fn(ProblemSpec::new(n, m, seed).unwrap(), |_, _| {
            rng.random_range(-1.0..1.0)
        })
        .unwrap()
    }

    #[test]
    fn spec_bounds() {
        assert!(ProblemSpec::new(0, 2, 0).is_err());
        assert!(ProblemSpec::new(31, 2, 0).is_err());
        assert!(ProblemSpec::new(3, 0, 0).is_err());
        assert!(ProblemSpec::new(30, 1, 0).is_ok());
    }

    #[test]
    fn table_rejects_non_finite() {
        let spec = ProblemSpec::new(1, 1, 0).unwrap();
        assert!(ValueTable::from_values(spec, vec![0.0, f64::NAN]).is_err());
        assert!(ValueTable::from_values(spec, vec![0.0, f64::INFINITY]).is_err());
        assert!(ValueTable::from_values(spec, vec![0.0]).is_err());
    }

    #[test]
    fn empty_assignment_sums_empty_bundles() {
        let v = random_table(4, 3, 1);
        let s = PartialAssignment::for_table(&v);
        let expected: f64 = (0..3).map(|t| v.get(Bundle::EMPTY, t)).sum();
        assert_eq!(value_of(&s, &v).unwrap(), expected);
    }

    #[test]
    fn single_nonzero_term() {
        let spec = ProblemSpec::new(2, 2, 0).unwrap();
        let v = ValueTable::from_fn(spec, |b, t| if b.0 == 0b11 && t == 0 { 5.0 } else { 0.0 })
            .unwrap();
        let s = PartialAssignment::from_raw_labels(2, &[0, 0]).unwrap();
        assert_eq!(value_of(&s, &v).unwrap(), 5.0);
    }

    #[test]
    fn value_matches_per_element_reaggregation() {
        let v = random_table(3, 2, 42);
        let s = PartialAssignment::from_raw_labels(2, &[0, 1, 0]).unwrap();
        // independent path: rebuild each bundle by scanning the label slice
        let mut total = 0.0;
        for t in 0..2 {
            let mut mask = 0u32;
            for (j, l) in [0u8, 1, 0].iter().enumerate() {
                if *l as usize == t {
                    mask += 1 << j;
                }
            }
            total += v.values()[mask as usize * 2 + t];
        }
        assert_eq!(value_of(&s, &v).unwrap(), total);
        assert_eq!(total, v.get(Bundle(0b101), 0) + v.get(Bundle(0b010), 1));
    }

    #[test]
    fn value_of_dimension_mismatch() {
        let v = random_table(3, 2, 0);
        let s = PartialAssignment::empty(3, 3);
        assert!(matches!(value_of(&s, &v), Err(Error::Usage(_))));
    }

    #[test]
    fn expand_children_basic() {
        let s = PartialAssignment::empty(2, 3);
        let kids = s.expand_children(0).unwrap();
        let labels: Vec<_> = kids.iter().map(|k| format!("{k:?}")).collect();
        assert_eq!(labels, ["[0,-]", "[1,-]", "[2,-]"]);

        let single = PartialAssignment::empty(5, 1).expand_children(3).unwrap();
        assert_eq!(single.len(), 1);

        let assigned = kids[0];
        assert!(matches!(assigned.expand_children(0), Err(Error::Usage(_))));
    }

    #[test]
    fn assigned_count_cases() {
        assert_eq!(PartialAssignment::empty(20, 10).assigned_count(), 0);
        let full = PartialAssignment::from_raw_labels(10, &[3; 20]).unwrap();
        assert_eq!(full.assigned_count(), 20);
        assert!(full.is_complete());
    }

    #[test]
    fn table_file_round_trip_and_validation() {
        let v = random_table(5, 3, 9);
        let mut buf = Vec::new();
        v.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 1 + 4 + 4 + 8 + 32 * 3 * 8);
        assert_eq!(&buf[..4], b"UCAV");
        let back = ValueTable::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, v);

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(ValueTable::read_from(&mut bad.as_slice()), Err(Error::Format { .. })));
        let mut bad = buf.clone();
        bad[4] = 2;
        assert!(ValueTable::read_from(&mut bad.as_slice()).is_err());
        let short = &buf[..buf.len() - 1];
        assert!(ValueTable::read_from(&mut &short[..]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(ValueTable::read_from(&mut long.as_slice()).is_err());
    }

    #[test]
    fn element_order_validation() {
        assert!(ElementOrder::new(vec![2, 0, 1]).is_ok());
        assert!(ElementOrder::new(vec![0, 0, 1]).is_err());
        assert!(ElementOrder::new(vec![0, 3, 1]).is_err());
    }

    fn arb_partial(n: usize, m: usize) -> impl Strategy<Value = PartialAssignment> {
        proptest::collection::vec(prop_oneof![Just(UNASSIGNED), 0..m as u8], n)
            .prop_map(move |l| PartialAssignment::from_raw_labels(m, &l).unwrap())
    }

    proptest! {
        #[test]
        fn children_are_distinct_and_extend_parent(
            s in arb_partial(6, 3),
            pick in 0usize..6,
        ) {
            let free: Vec<_> = s.unassigned().collect();
            prop_assume!(!free.is_empty());
            let a = free[pick % free.len()];
            let kids = s.expand_children(a).unwrap();
            prop_assert_eq!(kids.len(), 3);
            for (i, k) in kids.iter().enumerate() {
                prop_assert_eq!(k.assigned_count(), s.assigned_count() + 1);
                prop_assert_eq!(k.label(a), Some(i));
                for j in 0..6 {
                    if j != a {
                        prop_assert_eq!(k.label(j), s.label(j));
                    }
                }
                let masks = k.bundle_masks();
                let mut union = 0u32;
                for b in &masks {
                    prop_assert_eq!(union & b, 0);
                    union |= b;
                }
                prop_assert_eq!(union, k.assigned_mask());
                for other in &kids[i + 1..] {
                    prop_assert_ne!(k, other);
                }
            }
        }

        #[test]
        fn value_is_label_permutation_covariant(
            s in arb_partial(5, 3),
            seed in any::<u64>(),
            i in 0usize..3,
            j in 0usize..3,
        ) {
            let v = random_table(5, 3, seed);
            let swapped = ValueTable::from_fn(*v.spec(), |b, t| {
                let t = if t == i { j } else if t == j { i } else { t };
                v.get(b, t)
            }).unwrap();
            let relabeled: Vec<u8> = s.raw_labels().iter().map(|&l| match l as usize {
                l if l == i => j as u8,
                l if l == j => i as u8,
                _ => l,
            }).collect();
            let s2 = PartialAssignment::from_raw_labels(3, &relabeled).unwrap();
            let a = value_of(&s, &v).unwrap();
            let b = value_of(&s2, &swapped).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn assigned_count_tracks_construction_steps() {
        let mut rng = seeds::rng(5);
        for k in 0..=8 {
            let mut s = PartialAssignment::empty(8, 3);
            for _ in 0..k {
                let free: Vec<_> = s.unassigned().collect();
                let a = free[rng.random_range(0..free.len())];
                let kids = s.expand_children(a).unwrap();
                s = kids[rng.random_range(0..3)];
            }
            assert_eq!(s.assigned_count(), k);
        }
    }
}
