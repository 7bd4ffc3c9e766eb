//! Exact binomials, the half-row binomial identities, and enumeration of
//! subsets and set partitions in canonical order.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::tensor::SubsystemSet;
use crate::{Error, Result};

/// Largest party count enumerated by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 16;

/// Largest number of partitions materialized by [`set_partitions`].
pub const MAX_PARTITIONS: u64 = 5_000_000;

/// Binomial coefficient C(n, k); zero when `k` lies outside `0..=n`.
pub fn binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        // Each prefix product is C(n, i + 1) times (i + 1)!, so the division is exact.
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Doubled half-row binomial sum.
///
/// Even `n`: 2·C(n,0) + … + 2·C(n,n/2−1) + C(n,n/2).
/// Odd `n`: 2·C(n,0) + … + 2·C(n,(n−1)/2).
/// Both equal 2ⁿ.
pub fn half_binomial_sum(n: u64) -> Result<BigUint> {
    if n < 1 {
        return Err(Error::InvalidArgument("half_binomial_sum needs n >= 1".into()));
    }
    let two = BigUint::from(2u32);
    let upper = if n.is_multiple_of(2) { n / 2 - 1 } else { (n - 1) / 2 };
    let mut total: BigUint = (0..=upper).map(|k| &two * binomial(n, k as i64)).sum();
    if n.is_multiple_of(2) {
        total += binomial(n, (n / 2) as i64);
    }
    Ok(total)
}

/// Stirling number of the second kind S(n, m).
pub fn stirling2(n: usize, m: usize) -> BigUint {
    let mut row = vec![BigUint::zero(); m + 1];
    row[0] = BigUint::one();
    for i in 1..=n {
        for k in (1..=m.min(i)).rev() {
            let prev = std::mem::take(&mut row[k]);
            row[k] = prev * k + &row[k - 1];
        }
        row[0] = BigUint::zero();
    }
    row[m].clone()
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n > 63 {
        Err(Error::TooLarge { n, cap: cap.min(63) })
    } else {
        Ok(())
    }
}

/// Every nonempty proper subset of `1..=n`, in ascending mask order.
pub fn proper_subsets(n: usize) -> Result<Vec<SubsystemSet>> {
    proper_subsets_with_cap(n, DEFAULT_ENUMERATION_CAP)
}

pub fn proper_subsets_with_cap(n: usize, cap: usize) -> Result<Vec<SubsystemSet>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("proper subsets need n >= 2, got {n}")));
    }
    check_cap(n, cap)?;
    Ok((1..(1u64 << n) - 1).map(SubsystemSet::from_mask).collect())
}

/// A set partition of `1..=n` into at least two nonempty blocks.
///
/// Always held in canonical form: blocks ordered by their smallest party.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    n: usize,
    blocks: Vec<SubsystemSet>,
}

impl Partition {
    pub fn new(n: usize, mut blocks: Vec<SubsystemSet>) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a partition needs at least 2 blocks, got {}",
                blocks.len()
            )));
        }
        let full = SubsystemSet::full(n);
        let mut seen = SubsystemSet::EMPTY;
        for &b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidArgument("partition block is empty".into()));
            }
            if !b.is_subset_of(full) {
                return Err(Error::InvalidArgument(format!("block {b:?} is outside 1..={n}")));
            }
            if !b.is_disjoint(seen) {
                return Err(Error::InvalidArgument(format!("block {b:?} overlaps another block")));
            }
            seen = seen.union(b);
        }
        if seen != full {
            return Err(Error::InvalidArgument(format!(
                "blocks do not cover 1..={n} (missing {:?})",
                SubsystemSet::from_mask(full.mask() & !seen.mask())
            )));
        }
        blocks.sort_by_key(|b| b.min_party());
        Ok(Partition { n, blocks })
    }

    /// Every party in its own block.
    pub fn singletons(n: usize) -> Result<Self> {
        Partition::new(n, (1..=n).map(|p| SubsystemSet::from_mask(1 << (p - 1))).collect())
    }

    /// The bipartition `block | complement`.
    pub fn bipartition(n: usize, block: SubsystemSet) -> Result<Self> {
        Partition::new(n, vec![block, block.complement(n)])
    }

    /// The pair block `{i, j}` with singletons elsewhere.
    pub fn pair_with_singletons(n: usize, i: usize, j: usize) -> Result<Self> {
        if i == j || i == 0 || j == 0 || i > n || j > n {
            return Err(Error::InvalidArgument(format!("invalid pair ({i}, {j}) for n = {n}")));
        }
        let pair = SubsystemSet::from_parties(&[i, j])?;
        let mut blocks = vec![pair];
        blocks.extend(
            (1..=n)
                .filter(|&p| p != i && p != j)
                .map(|p| SubsystemSet::from_mask(1 << (p - 1))),
        );
        Partition::new(n, blocks)
    }

    /// Parses the `12|3|4` text form (or `1,12|2|…` when indices reach 10).
    ///
    /// Blocks are split on `|`. When the string contains a comma, or `n ≥ 10`,
    /// blocks are comma-separated party numbers; otherwise each character is
    /// one party.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let comma_mode = text.contains(',') || n >= 10;
        let blocks = text
            .trim()
            .split('|')
            .map(|raw| parse_block_with(raw, n, comma_mode))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(n, blocks).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::Parse(msg),
            other => other,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[SubsystemSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// True when every block but one is a singleton and that one is a pair.
    pub fn is_pair_singleton(&self) -> bool {
        self.blocks.iter().filter(|b| b.len() == 2).count() == 1 && self.blocks.iter().all(|b| b.len() <= 2)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.n >= 10;
        for (k, block) in self.blocks.iter().enumerate() {
            if k > 0 {
                f.write_str("|")?;
            }
            for (m, p) in block.parties().enumerate() {
                if wide && m > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{p}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition({self})")
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Text form without a known party count; `n` is inferred as the largest index.
impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s
            .split(['|', ','])
            .flat_map(|tok| {
                if s.contains(',') {
                    vec![tok.trim().parse::<usize>().unwrap_or(0)]
                } else {
                    tok.chars().filter_map(|c| c.to_digit(10)).map(|d| d as usize).collect()
                }
            })
            .max()
            .unwrap_or(0);
        Partition::parse(s, n)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses one block such as `12` or `1,12` into a party set.
///
/// Comma-separated when the text has a comma or `n ≥ 10`, one digit per
/// party otherwise.
pub fn parse_block(text: &str, n: usize) -> Result<SubsystemSet> {
    parse_block_with(text, n, text.contains(',') || n >= 10)
}

fn parse_block_with(raw: &str, n: usize, comma_mode: bool) -> Result<SubsystemSet> {
    let raw = raw.trim();
    let parties: Vec<usize> = if comma_mode {
        raw.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("block {raw:?}: {e}")))
            })
            .collect::<Result<_>>()?
    } else {
        raw.chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::Parse(format!("bad party {ch:?} in {raw:?}")))
            })
            .collect::<Result<_>>()?
    };
    if parties.is_empty() {
        return Err(Error::Parse("empty block".into()));
    }
    let mut set = SubsystemSet::EMPTY;
    for p in parties {
        if p == 0 || p > n {
            return Err(Error::Parse(format!("party {p} is outside 1..={n}")));
        }
        let single = SubsystemSet::from_parties(&[p])?;
        if !set.is_disjoint(single) {
            return Err(Error::Parse(format!("party {p} repeated in block {raw:?}")));
        }
        set = set.union(single);
    }
    Ok(set)
}

/// Text form of a single block, matching [`Partition`]'s display.
pub fn format_block(block: SubsystemSet, n: usize) -> String {
    let sep = if n >= 10 { "," } else { "" };
    block.parties().map(|p| p.to_string()).collect::<Vec<_>>().join(sep)
}

/// All partitions of `1..=n` into exactly `m` blocks, in canonical form and
/// in lexicographic order of their restricted-growth strings.
pub fn set_partitions(n: usize, m: usize) -> Result<Vec<Partition>> {
    set_partitions_with_cap(n, m, DEFAULT_ENUMERATION_CAP)
}

pub fn set_partitions_with_cap(n: usize, m: usize, cap: usize) -> Result<Vec<Partition>> {
    if m < 2 || m > n {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= m <= n, got n = {n}, m = {m}"
        )));
    }
    check_cap(n, cap)?;
    let count = stirling2(n, m);
    if count > BigUint::from(MAX_PARTITIONS) {
        return Err(Error::InvalidArgument(format!(
            "S({n}, {m}) = {count} partitions exceeds the limit of {MAX_PARTITIONS}"
        )));
    }
    let mut out = Vec::with_capacity(count.to_usize().unwrap_or(0));
    let mut labels = vec![0usize; n];
    grow(&mut labels, 1, 1, m, &mut out);
    Ok(out)
}

/// Extends a restricted-growth string whose first `pos` labels use `used` blocks.
fn grow(labels: &mut [usize], pos: usize, used: usize, m: usize, out: &mut Vec<Partition>) {
    let n = labels.len();
    if pos == n {
        if used == m {
            let mut blocks = vec![SubsystemSet::EMPTY; m];
            for (i, &b) in labels.iter().enumerate() {
                blocks[b] = blocks[b].union(SubsystemSet::from_mask(1 << i));
            }
            out.push(Partition { n, blocks });
        }
        return;
    }
    let remaining = n - pos;
    for label in 0..=used.min(m - 1) {
        let next_used = used.max(label + 1);
        if m - next_used > remaining - 1 {
            continue;
        }
        labels[pos] = label;
        grow(labels, pos + 1, next_used, m, out);
    }
}

/// The C(n,2) partitions with one block `{i, j}` and singletons elsewhere,
/// ordered lexicographically by `(i, j)`.
pub fn pair_singleton_partitions(n: usize) -> Result<Vec<Partition>> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "pair-singleton partitions need n >= 3, got {n}"
        )));
    }
    check_cap(n, DEFAULT_ENUMERATION_CAP)?;
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..=n {
        for j in i + 1..=n {
            out.push(Partition::pair_with_singletons(n, i, j)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(7, 0), BigUint::one());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(5, -1), BigUint::zero());
        assert_eq!(binomial(5, 6), BigUint::zero());
    }

    #[test]
    fn binomial_30_15_matches_pascal_triangle() {
        let mut row = vec![1u64];
        for _ in 0..30 {
            let mut next = vec![1u64; row.len() + 1];
            for k in 1..row.len() {
                next[k] = row[k - 1] + row[k];
            }
            row = next;
        }
        assert_eq!(row[15], 155_117_520);
        assert_eq!(binomial(30, 15), BigUint::from(row[15]));
    }

    #[test]
    fn half_sums_small_cases() {
        assert_eq!(half_binomial_sum(4).unwrap(), BigUint::from(16u32));
        assert_eq!(half_binomial_sum(3).unwrap(), BigUint::from(8u32));
        assert_eq!(half_binomial_sum(1).unwrap(), BigUint::from(2u32));
        assert!(half_binomial_sum(0).is_err());
    }

    #[test]
    fn proper_subset_enumeration() {
        let two = proper_subsets(2).unwrap();
        assert_eq!(two, vec![SubsystemSet::from_mask(1), SubsystemSet::from_mask(2)]);
        assert_eq!(proper_subsets(3).unwrap().len(), 6);
        let four = proper_subsets(4).unwrap();
        assert_eq!(four.len(), 14);
        let mut by_size = [0usize; 5];
        four.iter().for_each(|s| by_size[s.len()] += 1);
        assert_eq!(&by_size[1..4], &[4, 6, 4]);
        assert!(proper_subsets(1).is_err());
        assert!(matches!(proper_subsets(17), Err(Error::TooLarge { .. })));
        assert_eq!(proper_subsets_with_cap(17, 20).unwrap().len(), (1 << 17) - 2);
    }

    #[test]
    fn four_into_three_matches_listed_partitions() {
        let got: Vec<String> = set_partitions(4, 3).unwrap().iter().map(|p| p.to_string()).collect();
        let mut listed: Vec<String> = ["1|2|34", "1|3|24", "1|4|23", "12|3|4", "13|2|4", "14|2|3"]
            .iter()
            .map(|s| Partition::parse(s, 4).unwrap().to_string())
            .collect();
        listed.sort();
        let mut sorted = got.clone();
        sorted.sort();
        assert_eq!(sorted, listed);
        assert_eq!(got, vec!["12|3|4", "13|2|4", "1|23|4", "14|2|3", "1|24|3", "1|2|34"]);
    }

    #[test]
    fn small_partition_counts() {
        let all = set_partitions(5, 5).unwrap();
        assert_eq!(all.len(), 1);
        assert!(all[0].blocks().iter().all(|b| b.len() == 1));
        let three = set_partitions(3, 2).unwrap();
        let text: Vec<String> = three.iter().map(|p| p.to_string()).collect();
        assert_eq!(text, vec!["12|3", "13|2", "1|23"]);
        assert!(set_partitions(3, 1).is_err());
        assert!(set_partitions(3, 4).is_err());
    }

    #[test]
    fn pair_singletons() {
        assert_eq!(pair_singleton_partitions(3).unwrap().len(), 3);
        let six = pair_singleton_partitions(6).unwrap();
        assert_eq!(six.len(), 15);
        assert!(six.iter().all(|p| p.len() == 5 && p.is_pair_singleton()));
        assert_eq!(six[0].to_string(), "12|3|4|5|6");
        assert!(pair_singleton_partitions(2).is_err());
    }

    #[test]
    fn partition_text_round_trip() {
        let p = Partition::parse("3|12|4", 4).unwrap();
        assert_eq!(p.to_string(), "12|3|4");
        let wide = Partition::parse("1,12|2,3,4,5,6,7,8,9,10,11", 12).unwrap();
        assert_eq!(wide.to_string(), "1,12|2,3,4,5,6,7,8,9,10,11");
        assert_eq!(Partition::parse(&wide.to_string(), 12).unwrap(), wide);
        let singles = Partition::singletons(11).unwrap();
        assert_eq!(Partition::parse(&singles.to_string(), 11).unwrap(), singles);
        assert_eq!("12|3|4".parse::<Partition>().unwrap(), p);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::parse("12", 2).is_err());
        assert!(Partition::parse("12|2", 2).is_err());
        assert!(Partition::parse("1|3", 3).is_err());
        assert!(Partition::parse("1|2|5", 3).is_err());
        assert!(Partition::parse("1||2", 2).is_err());
        assert!(Partition::parse("1x|2", 2).is_err());
    }

    #[test]
    fn stirling_values() {
        assert_eq!(stirling2(4, 3), BigUint::from(6u32));
        assert_eq!(stirling2(10, 5), BigUint::from(42_525u32));
        assert_eq!(stirling2(0, 0), BigUint::one());
    }
}
