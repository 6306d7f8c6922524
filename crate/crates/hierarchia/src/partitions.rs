//! Set partitions, two-block splits, ordered dissections, and the signed
//! weights `(−1)^{|P|−1}(|P|−1)!` that drive every cumulant expansion here.

use crate::algebra::Label;
use crate::error::{capacity, domain, Result};

/// A partition of a finite label set into disjoint nonempty blocks.
///
/// Blocks are sorted internally and ordered by their minimum element, so the
/// representation is canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<Label>>,
}

impl Partition {
    pub fn blocks(&self) -> &[Vec<Label>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Restricted-growth-string form, e.g. `0 0 1 0` for `{1,2,4},{3}`.
    pub fn rgs(&self, ground: &[Label]) -> Vec<usize> {
        ground
            .iter()
            .map(|l| self.blocks.iter().position(|b| b.contains(l)).unwrap())
            .collect()
    }
}

/// `(−1)^{|P|−1}(|P|−1)!` for a partition with `k` blocks.
pub fn mobius_weight_for_blocks(k: usize) -> i64 {
    debug_assert!(k >= 1);
    let sign = if (k - 1) % 2 == 0 { 1 } else { -1 };
    let mut fact = 1i64;
    for i in 1..k {
        fact *= i as i64;
    }
    sign * fact
}

/// Signed Möbius weight of a partition on the partition lattice.
pub fn mobius_weight(p: &Partition) -> i64 {
    mobius_weight_for_blocks(p.len())
}

const MAX_PARTITION_GROUND: usize = 12;
const MAX_DISSECTION_GROUND: usize = 8;

/// All set partitions of `ground`, in restricted-growth-string lexicographic
/// order. The count is the Bell number of `|ground|`.
pub fn enumerate_partitions(ground: &[Label]) -> Result<Vec<Partition>> {
    let n = ground.len();
    if n > MAX_PARTITION_GROUND {
        return Err(capacity(format!(
            "partition ground set of size {n} exceeds the supported {MAX_PARTITION_GROUND}"
        )));
    }
    if n == 0 {
        return Ok(vec![Partition { blocks: vec![] }]);
    }
    let mut out = Vec::new();
    let mut assignment = vec![0usize; n];
    enumerate_rgs(ground, &mut assignment, 1, 1, &mut out);
    Ok(out)
}

fn enumerate_rgs(
    ground: &[Label],
    assignment: &mut [usize],
    pos: usize,
    used: usize,
    out: &mut Vec<Partition>,
) {
    let n = ground.len();
    if pos == n {
        let mut blocks: Vec<Vec<Label>> = vec![Vec::new(); used];
        for (i, &b) in assignment.iter().enumerate() {
            blocks[b].push(ground[i]);
        }
        out.push(Partition { blocks });
        return;
    }
    for b in 0..=used {
        assignment[pos] = b;
        let next_used = used.max(b + 1);
        enumerate_rgs(ground, assignment, pos + 1, next_used, out);
    }
}

/// Partitions of `ground` with exactly the block count `k` (convenience slice).
pub fn enumerate_partitions_with_blocks(ground: &[Label], k: usize) -> Result<Vec<Partition>> {
    Ok(enumerate_partitions(ground)?.into_iter().filter(|p| p.len() == k).collect())
}

/// All unordered splits of `ground` into two nonempty disjoint subsets.
///
/// Exactly `2^{n−1} − 1` pairs; each split appears once with the block
/// containing the smallest label first.
pub fn enumerate_two_block(ground: &[Label]) -> Result<Vec<(Vec<Label>, Vec<Label>)>> {
    if ground.len() < 2 {
        return Err(domain("two-block splits need at least two labels"));
    }
    Ok(enumerate_partitions_with_blocks(ground, 2)?
        .into_iter()
        .map(|p| {
            let mut it = p.blocks.into_iter();
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect())
}

/// A decomposition of a linearly ordered ground set into disjoint blocks that
/// each inherit the ground order; blocks are unordered among each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dissection {
    blocks: Vec<Vec<Label>>,
}

impl Dissection {
    pub fn blocks(&self) -> &[Vec<Label>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// All dissections of the ordered `ground` into at most `max_blocks` blocks.
///
/// Realized as set partitions with a block-count cap, each block read off in
/// ground order. Only the low orders are pinned by worked examples; callers
/// treat higher orders as experimental.
pub fn enumerate_dissections(ground: &[Label], max_blocks: usize) -> Result<Vec<Dissection>> {
    let n = ground.len();
    if n > MAX_DISSECTION_GROUND {
        return Err(capacity(format!(
            "dissection ground set of size {n} exceeds the supported {MAX_DISSECTION_GROUND}"
        )));
    }
    if max_blocks == 0 {
        return Err(domain("dissections need max_blocks ≥ 1"));
    }
    Ok(enumerate_partitions(ground)?
        .into_iter()
        .filter(|p| p.len() <= max_blocks && !p.is_empty())
        .map(|p| Dissection { blocks: p.blocks })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell(n: usize) -> usize {
        // triangle recurrence, independent of the enumerator
        let mut row = vec![1usize];
        for _ in 0..n {
            let mut next = vec![*row.last().unwrap()];
            for v in &row {
                next.push(next.last().unwrap() + v);
            }
            row = next;
        }
        row[0]
    }

    /// Exhaustive recursive oracle: insert elements one at a time into every
    /// existing block or a fresh one.
    fn oracle_partitions(ground: &[Label]) -> Vec<Vec<Vec<Label>>> {
        if ground.is_empty() {
            return vec![vec![]];
        }
        let (&last, rest) = ground.split_last().unwrap();
        let mut out = Vec::new();
        for p in oracle_partitions(rest) {
            for i in 0..p.len() {
                let mut q = p.clone();
                q[i].push(last);
                out.push(q);
            }
            let mut q = p.clone();
            q.push(vec![last]);
            out.push(q);
        }
        out
    }

    fn canonical(mut p: Vec<Vec<Label>>) -> Vec<Vec<Label>> {
        for b in &mut p {
            b.sort_unstable();
        }
        p.sort_by_key(|b| b[0]);
        p
    }

    #[test]
    fn counts_match_bell_numbers() {
        for n in 1..=6 {
            let ground: Vec<Label> = (1..=n as Label).collect();
            let ps = enumerate_partitions(&ground).unwrap();
            assert_eq!(ps.len(), bell(n), "Bell({n})");
        }
        assert_eq!(enumerate_partitions(&[1]).unwrap().len(), 1);
        assert_eq!(enumerate_partitions(&[1, 2, 3]).unwrap().len(), 5);
        assert_eq!(enumerate_partitions(&[1, 2, 3, 4, 5]).unwrap().len(), 52);
    }

    #[test]
    fn enumeration_matches_recursive_oracle() {
        for n in 1..=5 {
            let ground: Vec<Label> = (1..=n as Label).collect();
            let mut got: Vec<_> =
                enumerate_partitions(&ground).unwrap().into_iter().map(|p| p.blocks).collect();
            let mut want: Vec<_> =
                oracle_partitions(&ground).into_iter().map(canonical).collect();
            got.sort();
            want.sort();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn no_duplicates_and_deterministic() {
        let ground = [3, 5, 7, 9];
        let a = enumerate_partitions(&ground).unwrap();
        let b = enumerate_partitions(&ground).unwrap();
        assert_eq!(a, b);
        let mut seen = a.clone();
        seen.dedup();
        assert_eq!(seen.len(), a.len());
    }

    #[test]
    fn two_block_counts() {
        assert_eq!(enumerate_two_block(&[1, 2]).unwrap().len(), 1);
        assert_eq!(enumerate_two_block(&[1, 2, 3]).unwrap().len(), 3);
        assert_eq!(enumerate_two_block(&[1, 2, 3, 4]).unwrap().len(), 7);
        assert!(enumerate_two_block(&[1]).is_err());
    }

    #[test]
    fn two_block_is_the_two_block_slice() {
        let ground = [1, 2, 3, 4];
        let slice: Vec<_> = enumerate_partitions_with_blocks(&ground, 2)
            .unwrap()
            .into_iter()
            .map(|p| p.blocks)
            .collect();
        let pairs: Vec<_> =
            enumerate_two_block(&ground).unwrap().into_iter().map(|(a, b)| vec![a, b]).collect();
        assert_eq!(slice, pairs);
    }

    #[test]
    fn mobius_weights() {
        assert_eq!(mobius_weight_for_blocks(1), 1);
        assert_eq!(mobius_weight_for_blocks(2), -1);
        assert_eq!(mobius_weight_for_blocks(3), 2);
        assert_eq!(mobius_weight_for_blocks(4), -6);
    }

    #[test]
    fn mobius_identity_on_partition_lattice() {
        // Σ_P (−1)^{|P|−1}(|P|−1)! = δ_{n,1}
        for n in 1..=6 {
            let ground: Vec<Label> = (1..=n as Label).collect();
            let total: i64 =
                enumerate_partitions(&ground).unwrap().iter().map(mobius_weight).sum();
            assert_eq!(total, if n == 1 { 1 } else { 0 }, "n = {n}");
        }
    }

    #[test]
    fn mobius_inversion_roundtrip_on_scalars() {
        // compose then invert returns the original multiplicative assignment
        for n in 1..=5usize {
            let ground: Vec<Label> = (1..=n as Label).collect();
            let base = |block: &[Label]| -> f64 {
                0.3 + block.iter().map(|&l| l as f64).sum::<f64>() / 10.0
            };
            // moments m(S) = Σ_{P ⊢ S} Π w(block)
            let moment = |s: &[Label]| -> f64 {
                enumerate_partitions(s)
                    .unwrap()
                    .iter()
                    .map(|p| p.blocks().iter().map(|b| base(b)).product::<f64>())
                    .sum()
            };
            let recovered: f64 = enumerate_partitions(&ground)
                .unwrap()
                .iter()
                .map(|p| {
                    mobius_weight(p) as f64
                        * p.blocks().iter().map(|b| moment(b)).product::<f64>()
                })
                .sum();
            assert!(
                (recovered - base(&ground)).abs() < 1e-10,
                "inversion failed at n = {n}: {recovered} vs {}",
                base(&ground)
            );
        }
    }

    #[test]
    fn dissection_examples() {
        let single = enumerate_dissections(&[1], 4).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].blocks(), &[vec![1]]);

        let two = enumerate_dissections(&[1, 2], 2).unwrap();
        let blocks: Vec<_> = two.iter().map(|d| d.blocks().to_vec()).collect();
        assert!(blocks.contains(&vec![vec![1, 2]]));
        assert!(blocks.contains(&vec![vec![1], vec![2]]));
        assert_eq!(two.len(), 2);

        let capped = enumerate_dissections(&[1, 2, 3], 1).unwrap();
        assert_eq!(capped.len(), 1);
        assert_eq!(capped[0].blocks(), &[vec![1, 2, 3]]);
    }

    #[test]
    fn capacity_limits() {
        let big: Vec<Label> = (1..=13).collect();
        assert!(enumerate_partitions(&big).is_err());
        let mid: Vec<Label> = (1..=9).collect();
        assert!(enumerate_dissections(&mid, 3).is_err());
    }
}
