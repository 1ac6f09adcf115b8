//! Labeled training data: random partial assignments with their current
//! value `V(S)` and exact value-to-go `V*(S)`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::binio;
use crate::domain::{value_of, PartialAssignment, ValueTable, UNASSIGNED};
use crate::error::{Error, Result};
use crate::exact::{self, search_nodes, DEFAULT_NODE_BUDGET};
use crate::seeds;
use crate::workers;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetConfig {
    /// Largest number of unassigned elements in a sampled pair.
    pub kappa: usize,
    pub pairs_per_level: usize,
    /// Share of pairs held out as the test set.
    pub split_fraction: f64,
    pub seed: u64,
    /// Node budget for labeling one level (all of its pairs together).
    pub node_budget: u64,
}

impl DatasetConfig {
    pub fn new(kappa: usize, pairs_per_level: usize, seed: u64) -> Self {
        Self {
            kappa,
            pairs_per_level,
            split_fraction: 0.10,
            seed,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.kappa == 0 || self.kappa > n {
            return Err(Error::usage(format!("kappa={} outside 1..={n}", self.kappa)));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::usage(format!(
                "split fraction {} outside (0, 1)",
                self.split_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledPair {
    pub assignment: PartialAssignment,
    /// `V(S)`.
    pub current_value: f64,
    /// `V*(S)`.
    pub target: f64,
}

impl LabeledPair {
    pub fn unassigned_count(&self) -> usize {
        self.assignment.n() - self.assignment.assigned_count()
    }
}

/// Uniform draw from the partial assignments with exactly `assigned`
/// assigned elements: a uniform `assigned`-subset, each member labeled
/// uniformly over the `m` alternatives.
pub fn sample_partial_assignment<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    assigned: usize,
    rng: &mut R,
) -> Result<PartialAssignment> {
    if assigned > n {
        return Err(Error::usage(format!("cannot assign {assigned} of {n} elements")));
    }
    let mut labels = vec![UNASSIGNED; n];
    let mut subset = index::sample(rng, n, assigned).into_vec();
    subset.sort_unstable();
    for j in subset {
        labels[j] = rng.random_range(0..m) as u8;
    }
    PartialAssignment::from_raw_labels(m, &labels)
}

/// A labeled dataset tied to the dimensions of the table it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub n: usize,
    pub m: usize,
    pub kappa: usize,
    pub pairs: Vec<LabeledPair>,
}

/// Label `pairs_per_level` random partial assignments for every unassigned
/// count `1..=kappa`. Output is ordered by level, then by pair index; pair
/// `k` of level `l` draws from substream `l * pairs_per_level + k`.
pub fn build_dataset(v: &ValueTable, cfg: &DatasetConfig) -> Result<Dataset> {
    let (n, m) = (v.n(), v.m());
    cfg.validate(n)?;
    for unassigned in 1..=cfg.kappa {
        let required = search_nodes(m, unassigned).saturating_mul(cfg.pairs_per_level as u64);
        if required > cfg.node_budget {
            return Err(Error::Budget {
                required,
                budget: cfg.node_budget,
                context: None,
            }
            .with_budget_context(format!(
                "labeling level i={} ({unassigned} unassigned)",
                n - unassigned
            )));
        }
    }
    let per_level = cfg.pairs_per_level;
    let labeled = workers::map_indexed(cfg.kappa * per_level, |idx| {
        let unassigned = idx / per_level + 1;
        let mut rng = seeds::substream(cfg.seed, idx as u64);
        let s = sample_partial_assignment(n, m, n - unassigned, &mut rng)?;
        Ok(LabeledPair {
            assignment: s,
            current_value: value_of(&s, v)?,
            target: exact::value_to_go(&s, v, cfg.node_budget)?,
        })
    });
    Ok(Dataset {
        n,
        m,
        kappa: cfg.kappa,
        pairs: labeled.into_iter().collect::<Result<_>>()?,
    })
}

/// Shuffle, then split into `(train, test)` with `⌈(1−f)·N⌉` training pairs.
pub fn split_dataset<R: Rng + ?Sized>(
    mut pairs: Vec<LabeledPair>,
    split_fraction: f64,
    rng: &mut R,
) -> (Vec<LabeledPair>, Vec<LabeledPair>) {
    pairs.shuffle(rng);
    let n = pairs.len();
    // ⌈(1−f)·N⌉ = N − ⌊f·N⌋; the nudge absorbs products like 0.1·30 = 3.0000000000000004
    let test = ((split_fraction * n as f64) + 1e-9).floor().clamp(0.0, n as f64) as usize;
    let test_pairs = pairs.split_off(n - test);
    (pairs, test_pairs)
}

const DATA_MAGIC: &[u8; 4] = b"UCAD";
const DATA_VERSION: u8 = 1;
const DATA_KIND: &str = "dataset";

impl Dataset {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        binio::write_header(w, DATA_MAGIC, DATA_VERSION)?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.m as u32).to_le_bytes())?;
        w.write_all(&(self.kappa as u32).to_le_bytes())?;
        w.write_all(&(self.pairs.len() as u64).to_le_bytes())?;
        for p in &self.pairs {
            w.write_all(&p.assignment.assigned_mask().to_le_bytes())?;
            w.write_all(p.assignment.raw_labels())?;
            w.write_all(&p.current_value.to_le_bytes())?;
            w.write_all(&p.target.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        binio::read_header(r, DATA_KIND, DATA_MAGIC, DATA_VERSION)?;
        let n = binio::read_u32(r, DATA_KIND)? as usize;
        let m = binio::read_u32(r, DATA_KIND)? as usize;
        let kappa = binio::read_u32(r, DATA_KIND)? as usize;
        let count = binio::read_u64(r, DATA_KIND)?;
        crate::domain::ProblemSpec::new(n, m, 0).map_err(|e| Error::format(DATA_KIND, e.to_string()))?;
        let mut pairs = Vec::with_capacity(count.min(1 << 24) as usize);
        let mut labels = vec![0u8; n];
        for i in 0..count {
            let mask = binio::read_u32(r, DATA_KIND)?;
            binio::read_exact(r, DATA_KIND, &mut labels)?;
            let current_value = binio::read_f64(r, DATA_KIND)?;
            let target = binio::read_f64(r, DATA_KIND)?;
            let assignment = PartialAssignment::from_raw_labels(m, &labels)
                .map_err(|e| Error::format(DATA_KIND, format!("record {i}: {e}")))?;
            if assignment.assigned_mask() != mask {
                return Err(Error::format(
                    DATA_KIND,
                    format!("record {i}: assigned mask disagrees with labels"),
                ));
            }
            if !current_value.is_finite() || !target.is_finite() {
                return Err(Error::format(DATA_KIND, format!("record {i}: non-finite value")));
            }
            pairs.push(LabeledPair {
                assignment,
                current_value,
                target,
            });
        }
        binio::expect_eof(r, DATA_KIND)?;
        Ok(Self { n, m, kappa, pairs })
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

    /// Number of pairs per unassigned count, indexed `0..=n`.
    pub fn level_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0; self.n + 1];
        for p in &self.pairs {
            hist[p.unassigned_count()] += 1;
        }
        hist
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ProblemSpec;
    use crate::valuegen::{generate_npd, NpdParams};
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn npd(n: usize, m: usize, seed: u64) -> ValueTable {
        generate_npd(&ProblemSpec::new(n, m, seed).unwrap(), &NpdParams::default()).unwrap()
    }

    /// Enumerate every completion of `s` directly.
    fn enumerate_completions(s: &PartialAssignment, v: &ValueTable) -> f64 {
        let free: Vec<usize> = s.unassigned().collect();
        let m = v.m();
        let total = m.pow(free.len() as u32);
        let mut best = f64::NEG_INFINITY;
        for code in 0..total {
            let mut labels = s.raw_labels().to_vec();
            let mut c = code;
            for &j in &free {
                labels[j] = (c % m) as u8;
                c /= m;
            }
            let full = PartialAssignment::from_raw_labels(m, &labels).unwrap();
            best = best.max(value_of(&full, v).unwrap());
        }
        best
    }

    #[test]
    fn sample_extremes() {
        let mut rng = seeds::rng(0);
        let s = sample_partial_assignment(7, 3, 0, &mut rng).unwrap();
        assert_eq!(s.assigned_count(), 0);
        let s = sample_partial_assignment(7, 3, 7, &mut rng).unwrap();
        assert!(s.is_complete());
        assert!(sample_partial_assignment(7, 3, 8, &mut rng).is_err());
    }

    #[test]
    fn sample_is_uniform_over_subsets_and_labelings() {
        let mut rng = seeds::rng(1);
        let draws = 100_000;
        let mut subsets: HashMap<u32, usize> = HashMap::new();
        let mut labelings: HashMap<Vec<u8>, usize> = HashMap::new();
        for _ in 0..draws {
            let s = sample_partial_assignment(6, 2, 3, &mut rng).unwrap();
            *subsets.entry(s.assigned_mask()).or_default() += 1;
            if s.assigned_mask() == 0b000111 {
                *labelings.entry(s.raw_labels()[..3].to_vec()).or_default() += 1;
            }
        }
        assert_eq!(subsets.len(), 20);
        let p = 1.0 / 20.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in subsets.values() {
            assert!((c as f64 - draws as f64 * p).abs() < 3.0 * sd, "subset count {c}");
        }
        let fixed = subsets[&0b000111] as f64;
        assert_eq!(labelings.len(), 8);
        let sd = (fixed / 8.0 * 7.0 / 8.0).sqrt();
        for &c in labelings.values() {
            assert!((c as f64 - fixed / 8.0).abs() < 3.0 * sd, "labeling count {c}");
        }
    }

    #[test]
    fn kappa_one_targets_are_single_placements() {
        let v = npd(6, 3, 2);
        let data = build_dataset(&v, &DatasetConfig::new(1, 20, 9)).unwrap();
        assert_eq!(data.pairs.len(), 20);
        for p in &data.pairs {
            assert_eq!(p.unassigned_count(), 1);
            let a = p.assignment.unassigned().next().unwrap();
            let best = (0..3)
                .map(|t| value_of(&p.assignment.with_label(a, t).unwrap(), &v).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(p.target, best);
        }
    }

    #[test]
    fn level_counts_and_order() {
        let v = npd(6, 2, 3);
        let data = build_dataset(&v, &DatasetConfig::new(2, 5, 1)).unwrap();
        assert_eq!(data.pairs.len(), 10);
        let levels: Vec<_> = data.pairs.iter().map(|p| p.unassigned_count()).collect();
        assert_eq!(levels, [1, 1, 1, 1, 1, 2, 2, 2, 2, 2]);
        let hist = data.level_histogram();
        assert_eq!(&hist[1..3], &[5, 5]);
    }

    #[test]
    fn targets_match_enumeration() {
        let v = npd(10, 3, 4);
        let data = build_dataset(&v, &DatasetConfig::new(4, 30, 5)).unwrap();
        for p in &data.pairs {
            assert_eq!(p.target, enumerate_completions(&p.assignment, &v));
            assert_eq!(p.current_value, value_of(&p.assignment, &v).unwrap());
        }
    }

    #[test]
    fn budget_error_names_level() {
        let v = npd(8, 3, 0);
        let mut cfg = DatasetConfig::new(3, 10, 0);
        cfg.node_budget = 10 * search_nodes(3, 2);
        let err = build_dataset(&v, &cfg).unwrap_err();
        assert!(err.to_string().contains("i=5"), "{err}");
    }

    #[test]
    fn config_validation() {
        let v = npd(4, 2, 0);
        assert!(build_dataset(&v, &DatasetConfig::new(0, 1, 0)).is_err());
        assert!(build_dataset(&v, &DatasetConfig::new(5, 1, 0)).is_err());
        let mut cfg = DatasetConfig::new(1, 1, 0);
        cfg.split_fraction = 1.0;
        assert!(build_dataset(&v, &cfg).is_err());
    }

    #[test]
    fn deterministic_file_bytes() {
        let v = npd(7, 3, 8);
        let cfg = DatasetConfig::new(3, 12, 44);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        build_dataset(&v, &cfg).unwrap().write_to(&mut a).unwrap();
        build_dataset(&v, &cfg).unwrap().write_to(&mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(&a[..4], b"UCAD");
        assert_eq!(a.len(), 4 + 1 + 4 * 3 + 8 + 36 * (4 + 7 + 16));
        let back = Dataset::read_from(&mut a.as_slice()).unwrap();
        assert_eq!(back, build_dataset(&v, &cfg).unwrap());
        a[4 + 1 + 12 + 8 + 4] = 9; // label out of range for m=3
        assert!(Dataset::read_from(&mut a.as_slice()).is_err());
    }

    #[test]
    fn split_sizes() {
        let v = npd(4, 2, 0);
        let data = build_dataset(&v, &DatasetConfig::new(1, 10, 0)).unwrap();
        let (train, test) = split_dataset(data.pairs, 0.1, &mut seeds::rng(0));
        assert_eq!((train.len(), test.len()), (9, 1));
        let (train, test) = split_dataset(Vec::new(), 0.1, &mut seeds::rng(0));
        assert!(train.is_empty() && test.is_empty());
    }

    proptest! {
        #[test]
        fn split_preserves_multiset(n in 0usize..60, f in 0.01f64..0.99, seed in any::<u64>()) {
            let pairs: Vec<LabeledPair> = (0..n).map(|i| LabeledPair {
                assignment: PartialAssignment::empty(3, 2),
                current_value: i as f64,
                target: 0.0,
            }).collect();
            let (train, test) = split_dataset(pairs, f, &mut seeds::rng(seed));
            prop_assert_eq!(train.len(), n - (f * n as f64 + 1e-9).floor() as usize);
            let mut all: Vec<f64> = train.iter().chain(&test).map(|p| p.current_value).collect();
            all.sort_by(f64::total_cmp);
            prop_assert_eq!(all, (0..n).map(|i| i as f64).collect::<Vec<_>>());
        }
    }
}
