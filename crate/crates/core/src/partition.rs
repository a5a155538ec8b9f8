//! Set partitions of mode indices.
//!
//! Partitions are kept canonical: elements sorted inside each block and
//! blocks ordered by their smallest element. In that form the block label of
//! each mode is its restricted growth string (RGS), which fixes the
//! enumeration order and the tie-break between equal-valued partitions.

use std::fmt;

use serde::Serialize;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ModePartition {
    n_modes: usize,
    blocks: Vec<Vec<usize>>,
    forced_singletons: Vec<usize>,
}

impl ModePartition {
    /// Validates that `blocks` are nonempty, pairwise disjoint and cover `0..n_modes`.
    pub fn new(n_modes: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidPartition("no modes".into()));
        }
        let mut seen = vec![false; n_modes];
        let mut canonical = Vec::with_capacity(blocks.len());
        for mut block in blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            block.sort_unstable();
            for &m in &block {
                if m >= n_modes {
                    return Err(Error::InvalidMode { index: m, n_modes });
                }
                if std::mem::replace(&mut seen[m], true) {
                    return Err(Error::InvalidPartition(format!(
                        "mode {} appears twice",
                        m + 1
                    )));
                }
            }
            canonical.push(block);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "mode {} is not covered",
                missing + 1
            )));
        }
        canonical.sort_by_key(|b| b[0]);
        Ok(Self {
            n_modes,
            blocks: canonical,
            forced_singletons: Vec::new(),
        })
    }

    /// Records `forced` as modes that must stay separated; each must already
    /// be a singleton block.
    pub fn with_forced_singletons(mut self, forced: &[usize]) -> Result<Self> {
        let mut forced = forced.to_vec();
        forced.sort_unstable();
        forced.dedup();
        for &m in &forced {
            if m >= self.n_modes {
                return Err(Error::InvalidMode {
                    index: m,
                    n_modes: self.n_modes,
                });
            }
            if !self.blocks.iter().any(|b| b.as_slice() == [m]) {
                return Err(Error::InvalidPartition(format!(
                    "forced singleton {} shares a block",
                    m + 1
                )));
            }
        }
        self.forced_singletons = forced;
        Ok(self)
    }

    pub fn singletons(n_modes: usize) -> Self {
        Self::new(n_modes, (0..n_modes).map(|m| vec![m]).collect()).expect("valid by construction")
    }

    pub fn whole(n_modes: usize) -> Self {
        Self::new(n_modes, vec![(0..n_modes).collect()]).expect("valid by construction")
    }

    fn from_rgs(rgs: &[usize]) -> Self {
        let n_blocks = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); n_blocks];
        for (mode, &label) in rgs.iter().enumerate() {
            blocks[label].push(mode);
        }
        Self {
            n_modes: rgs.len(),
            blocks,
            forced_singletons: Vec::new(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn forced_singletons(&self) -> &[usize] {
        &self.forced_singletons
    }

    /// Block label of each mode.
    pub fn rgs(&self) -> Vec<usize> {
        let mut rgs = vec![0; self.n_modes];
        for (label, block) in self.blocks.iter().enumerate() {
            for &m in block {
                rgs[m] = label;
            }
        }
        rgs
    }

    /// Parses one-based notation: `"123:4"`, `"1,2|3,4"` or `"12:3:4"`.
    pub fn parse(text: &str, n_modes: usize) -> Result<Self> {
        let blocks = text
            .split([':', '|'])
            .map(|block| {
                let block = block.trim();
                let items: Vec<&str> = if block.contains(',') {
                    block.split(',').map(str::trim).collect()
                } else {
                    block.split("").filter(|s| !s.is_empty()).collect()
                };
                items
                    .into_iter()
                    .map(|s| {
                        s.parse::<usize>()
                            .ok()
                            .filter(|&i| i >= 1)
                            .map(|i| i - 1)
                            .ok_or_else(|| Error::InvalidPartition(format!("bad mode label `{s}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_modes, blocks)
    }
}

impl fmt::Display for ModePartition {
    /// One-based, `"123:4"` for up to nine modes and `"1,2,3:4"` beyond.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.n_modes <= 9 { "" } else { "," };
        let text = self
            .blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|m| (m + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(sep)
            })
            .collect::<Vec<_>>()
            .join(":");
        f.write_str(&text)
    }
}

fn rgs_recurse(rgs: &mut Vec<usize>, n: usize, max_label: usize, out: &mut Vec<Vec<usize>>) {
    if rgs.len() == n {
        out.push(rgs.clone());
        return;
    }
    let next_max = if rgs.is_empty() { 0 } else { max_label + 1 };
    for label in 0..=next_max {
        rgs.push(label);
        rgs_recurse(rgs, n, max_label.max(label), out);
        rgs.pop();
    }
}

/// All restricted growth strings of length `n`, in lexicographic order.
pub fn restricted_growth_strings(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n > 0 {
        rgs_recurse(&mut Vec::with_capacity(n), n, 0, &mut out);
    }
    out
}

/// Set partitions of `0..n_modes` in which every forced singleton is its own
/// block and the remaining modes form at least `min_blocks` blocks.
///
/// Ordered lexicographically by RGS.
pub fn enumerate_partitions(
    n_modes: usize,
    min_blocks: usize,
    forced_singletons: &[usize],
) -> Result<Vec<ModePartition>> {
    if min_blocks == 0 || min_blocks > n_modes {
        return Err(Error::InvalidPartition(format!(
            "min_blocks = {min_blocks} outside 1..={n_modes}"
        )));
    }
    let mut forced = forced_singletons.to_vec();
    forced.sort_unstable();
    forced.dedup();
    if let Some(&index) = forced.iter().find(|&&m| m >= n_modes) {
        return Err(Error::InvalidMode { index, n_modes });
    }
    let free: Vec<usize> = (0..n_modes).filter(|m| !forced.contains(m)).collect();
    let mut partitions: Vec<ModePartition> = restricted_growth_strings(free.len())
        .into_iter()
        .map(|rgs| ModePartition::from_rgs(&rgs))
        .filter(|p| p.n_blocks() >= min_blocks)
        .map(|p| {
            let mut blocks: Vec<Vec<usize>> = p
                .blocks
                .iter()
                .map(|b| b.iter().map(|&i| free[i]).collect())
                .collect();
            blocks.extend(forced.iter().map(|&m| vec![m]));
            ModePartition::new(n_modes, blocks)
                .and_then(|p| p.with_forced_singletons(&forced))
                .expect("valid by construction")
        })
        .collect();
    partitions.sort_by_cached_key(ModePartition::rgs);
    Ok(partitions)
}

/// The `2^(n-1) - 1` bipartitions `A|B` of `0..n_modes`, with mode 0 in `A`.
///
/// Ordered by the bitmask of `A` (mode `m` at bit `m`).
pub fn bipartitions(n_modes: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    if n_modes < 2 {
        return Vec::new();
    }
    let full = (1usize << n_modes) - 1;
    (0..1usize << (n_modes - 1))
        .map(|rest| 1 | (rest << 1))
        .filter(|&mask| mask != full)
        .map(|mask| {
            let a = (0..n_modes).filter(|m| mask & (1 << m) != 0).collect();
            let b = (0..n_modes).filter(|m| mask & (1 << m) == 0).collect();
            (a, b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bell numbers from the Bell triangle.
    fn bell(n: usize) -> usize {
        let mut row = vec![1usize];
        for _ in 0..n {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                next.push(next.last().unwrap() + x);
            }
            row = next;
        }
        row[0]
    }

    /// Stirling numbers of the second kind.
    fn stirling2(n: usize, k: usize) -> usize {
        match (n, k) {
            (0, 0) => 1,
            (0, _) | (_, 0) => 0,
            _ => k * stirling2(n - 1, k) + stirling2(n - 1, k - 1),
        }
    }

    #[test]
    fn rgs_counts_are_bell_numbers() {
        for n in 1..=8 {
            assert_eq!(restricted_growth_strings(n).len(), bell(n));
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_partitions(4, 2, &[]).unwrap().len(), 14);
        assert_eq!(enumerate_partitions(5, 2, &[4]).unwrap().len(), 14);
        for n in 2..=7 {
            for k in 1..=n {
                let want: usize = (k..=n).map(|j| stirling2(n, j)).sum();
                assert_eq!(enumerate_partitions(n, k, &[]).unwrap().len(), want);
            }
        }
    }

    #[test]
    fn two_modes_two_blocks() {
        let parts = enumerate_partitions(2, 2, &[]).unwrap();
        assert_eq!(parts, vec![ModePartition::singletons(2)]);
    }

    #[test]
    fn forced_singletons_stay_separate() {
        for p in enumerate_partitions(5, 2, &[4]).unwrap() {
            assert!(p.blocks().contains(&vec![4]));
            assert_eq!(p.forced_singletons(), &[4]);
        }
        assert_eq!(
            enumerate_partitions(4, 2, &[7]).unwrap_err(),
            Error::InvalidMode {
                index: 7,
                n_modes: 4
            }
        );
    }

    #[test]
    fn enumeration_is_rgs_sorted() {
        let parts = enumerate_partitions(5, 1, &[2]).unwrap();
        let keys: Vec<_> = parts.iter().map(ModePartition::rgs).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn invalid_partitions_rejected() {
        assert!(ModePartition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(ModePartition::new(3, vec![vec![0, 1]]).is_err());
        assert!(ModePartition::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
        assert!(ModePartition::whole(3)
            .with_forced_singletons(&[1])
            .is_err());
    }

    #[test]
    fn parse_and_display() {
        let p = ModePartition::parse("123:4", 4).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1, 2], vec![3]]);
        assert_eq!(p.to_string(), "123:4");
        let q = ModePartition::parse("3,4|1,2", 4).unwrap();
        assert_eq!(q.to_string(), "12:34");
        assert!(ModePartition::parse("12:0", 2).is_err());
        assert_eq!(
            ModePartition::singletons(10).to_string(),
            "1:2:3:4:5:6:7:8:9:10"
        );
    }

    #[test]
    fn bipartition_count_and_order() {
        for n in 2..=7 {
            assert_eq!(bipartitions(n).len(), (1 << (n - 1)) - 1);
        }
        let b4 = bipartitions(4);
        assert_eq!(b4[0], (vec![0], vec![1, 2, 3]));
        assert_eq!(b4[3], (vec![0, 1, 2], vec![3]));
        assert_eq!(b4[6], (vec![0, 2, 3], vec![1]));
        assert!(bipartitions(1).is_empty());
    }
}
