//! Exact counting of the distinguishable challenge space.
//!
//! A single-input pyramid disperses light as a rooted binary tree of MZIs.
//! With `C` columns the dispersal trees that fill the column budget are the
//! binary trees of height exactly `C`, so the distinguishable configuration
//! count for a device is `t(C, M) · 2^bits` where `t(height, nodes)` counts
//! binary trees by height and node count.

use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision non-negative count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn zero() -> Self {
        Self(BigUint::zero())
    }

    pub fn one() -> Self {
        Self(BigUint::one())
    }

    pub fn from_u64(v: u64) -> Self {
        Self(BigUint::from(v))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Scientific notation with `sig` significant figures, rounded half up on
    /// the exact decimal expansion, e.g. `1.19e5`.
    pub fn to_sci(&self, sig: usize) -> String {
        let sig = sig.max(1);
        let digits = self.0.to_str_radix(10);
        if digits == "0" {
            return format!("{}e0", pad_mantissa(&"0".repeat(sig), sig));
        }
        let mut exponent = digits.len() - 1;
        let mut kept: Vec<u8> = digits.bytes().take(sig).map(|b| b - b'0').collect();
        kept.resize(sig, 0);
        let round_up = digits.as_bytes().get(sig).is_some_and(|&b| b >= b'5');
        if round_up {
            let mut i = sig;
            loop {
                if i == 0 {
                    // carried out of the leading digit: 9.99 → 10.0
                    kept.insert(0, 1);
                    kept.truncate(sig);
                    exponent += 1;
                    break;
                }
                i -= 1;
                if kept[i] == 9 {
                    kept[i] = 0;
                } else {
                    kept[i] += 1;
                    break;
                }
            }
        }
        let s: String = kept.iter().map(|d| char::from(b'0' + d)).collect();
        format!("{}e{}", pad_mantissa(&s, sig), exponent)
    }
}

fn pad_mantissa(digits: &str, sig: usize) -> String {
    let mut out = String::with_capacity(sig + 1);
    out.push_str(&digits[..1]);
    if sig > 1 {
        out.push('.');
        out.push_str(&digits[1..]);
    }
    out
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<BigUint> for BigCount {
    fn from(v: BigUint) -> Self {
        Self(v)
    }
}

/// `C_n = (2n)! / ((n+1)! n!)`.
pub fn catalan(n: u32) -> BigCount {
    // C_n = Π_{k=2..n} (n+k)/k, each partial product an integer binomial
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for k in 2..=u64::from(n) {
        num *= u64::from(n) + k;
        den *= k;
    }
    BigCount(num / den)
}

/// `(2^bits)^mzi_count`: every MZI independently at every voltage level.
pub fn naive_challenge_bound(mzi_count: u32, bits: u32) -> BigCount {
    BigCount(BigUint::one() << (u64::from(mzi_count) * u64::from(bits)))
}

/// Binary-tree counts `t(height, nodes)`; a single node has height 1 and the
/// empty tree has height 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeCountTable {
    max_height: usize,
    max_nodes: usize,
    /// `rows[h][n]`
    rows: Vec<Vec<BigUint>>,
}

/// Fills `t(height, nodes)` for `height ≤ max_height`, `nodes ≤ max_nodes`.
///
/// A tree of height `h` has a left subtree of height `h − 1` and a right
/// subtree shorter than `h − 1` (counted twice for the mirror image), or two
/// subtrees both of height `h − 1`.
pub fn tree_counts_by_height(max_height: usize, max_nodes: usize) -> TreeCountTable {
    let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); max_nodes + 1]; max_height + 1];
    rows[0][0] = BigUint::one();
    // shorter[i] = Σ_{j ≤ h−2} t(j, i), accumulated as h grows
    let mut shorter = vec![BigUint::zero(); max_nodes + 1];
    for h in 1..=max_height {
        if h >= 2 {
            for (acc, t) in shorter.iter_mut().zip(&rows[h - 2]) {
                *acc += t;
            }
        }
        let (done, rest) = rows.split_at_mut(h);
        let prev = &done[h - 1];
        let row = &mut rest[0];
        for (nodes, slot) in row.iter_mut().enumerate().skip(1) {
            if !in_support(h, nodes) {
                continue;
            }
            let mut total = BigUint::zero();
            for right in 0..nodes {
                let left = &prev[nodes - 1 - right];
                if left.is_zero() {
                    continue;
                }
                let mut partner = &shorter[right] << 1usize;
                partner += &prev[right];
                total += left * partner;
            }
            *slot = total;
        }
    }
    TreeCountTable {
        max_height,
        max_nodes,
        rows,
    }
}

/// `t(h, n) > 0` exactly when `h ≤ n ≤ 2^h − 1` (or both are zero).
fn in_support(height: usize, nodes: usize) -> bool {
    if height == 0 {
        return nodes == 0;
    }
    nodes >= height && (height >= usize::BITS as usize - 1 || nodes < (1usize << height))
}

impl TreeCountTable {
    pub fn max_height(&self) -> usize {
        self.max_height
    }

    pub fn max_nodes(&self) -> usize {
        self.max_nodes
    }

    /// Trees with exactly `height` and `nodes`; zero outside the table.
    pub fn get(&self, height: usize, nodes: usize) -> BigCount {
        BigCount(
            self.rows
                .get(height)
                .and_then(|r| r.get(nodes))
                .cloned()
                .unwrap_or_default(),
        )
    }

    /// Trees with `nodes` nodes and height at most `height`.
    pub fn at_most_height(&self, height: usize, nodes: usize) -> BigCount {
        let mut sum = BigUint::zero();
        for h in 0..=height.min(self.max_height) {
            if let Some(v) = self.rows[h].get(nodes) {
                sum += v;
            }
        }
        BigCount(sum)
    }
}

/// Distinguishable configurations of a `columns`-column light cone with
/// `mzi_count` MZIs: dispersal trees of height exactly `columns`, times the
/// `2^bits` voltage resolution of the device.
pub fn distinguishable_crp_count(columns: u32, mzi_count: u32, bits: u32) -> BigCount {
    let table = tree_counts_by_height(columns as usize, mzi_count as usize);
    BigCount(table.get(columns as usize, mzi_count as usize).0 << bits as usize)
}

/// Same as [`distinguishable_crp_count`] but counting every tree that fits
/// in the column budget (height at most `columns`).
pub fn height_bounded_crp_count(columns: u32, mzi_count: u32, bits: u32) -> BigCount {
    let table = tree_counts_by_height(columns as usize, mzi_count as usize);
    BigCount(table.at_most_height(columns as usize, mzi_count as usize).0 << bits as usize)
}

/// Total over `subset_count` equally sized devices on one chip.
pub fn chip_crp_total(subset_count: u32, columns: u32, mzi_count: u32, bits: u32) -> BigCount {
    BigCount(distinguishable_crp_count(columns, mzi_count, bits).0 * subset_count)
}

/// `(columns, MZIs)` of the pyramid sizes the chip supports.
pub const TABLE_PRESETS: [(u32, u32); 8] = [(4, 10), (5, 15), (6, 21), (7, 28), (8, 36), (9, 45), (10, 55), (11, 66)];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub columns: u32,
    pub mzis: u32,
    pub count: BigCount,
}

pub fn preset_table(bits: u32) -> Vec<TableRow> {
    TABLE_PRESETS
        .iter()
        .map(|&(columns, mzis)| TableRow {
            columns,
            mzis,
            count: distinguishable_crp_count(columns, mzis, bits),
        })
        .collect()
}

/// CSV with header `columns,mzis,exact,sci`.
pub fn preset_table_csv(bits: u32) -> String {
    let mut out = String::from("columns,mzis,exact,sci\n");
    for row in preset_table(bits) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.columns,
            row.mzis,
            row.count,
            row.count.to_sci(3)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_catalans() {
        let got: Vec<String> = (0..=10).map(|n| catalan(n).to_string()).collect();
        assert_eq!(
            got,
            ["1", "1", "2", "5", "14", "42", "132", "429", "1430", "4862", "16796"]
        );
    }

    #[test]
    fn catalan_from_factorials() {
        let fact = |n: u64| (1..=n).fold(BigUint::one(), |acc, k| acc * k);
        for n in 0..=40u64 {
            let direct = fact(2 * n) / (fact(n + 1) * fact(n));
            assert_eq!(catalan(n as u32).0, direct, "n = {n}");
        }
    }

    #[test]
    fn naive_bounds() {
        assert_eq!(naive_challenge_bound(1, 1).to_string(), "2");
        assert_eq!(naive_challenge_bound(10, 10).0, BigUint::from(1024u32).pow(10));
        assert_eq!(naive_challenge_bound(10, 10).to_sci(3), "1.27e30");
        assert_eq!(naive_challenge_bound(66, 10).to_sci(3), "4.78e198");
    }

    #[test]
    fn tree_table_small_entries() {
        let t = tree_counts_by_height(4, 10);
        assert_eq!(t.get(0, 0).to_string(), "1");
        assert_eq!(t.get(1, 1).to_string(), "1");
        assert_eq!(t.get(2, 2).to_string(), "2");
        assert_eq!(t.get(2, 3).to_string(), "1");
        assert_eq!(t.get(3, 3).to_string(), "4");
        assert_eq!(t.get(2, 4).to_string(), "0");
        assert_eq!(t.at_most_height(4, 10).to_string(), "116");
        assert_eq!(t.get(9, 9), BigCount::zero());
    }

    #[test]
    fn support_guard() {
        assert!(in_support(0, 0));
        assert!(!in_support(0, 1));
        assert!(in_support(3, 7));
        assert!(!in_support(3, 8));
        assert!(!in_support(3, 2));
        assert!(in_support(80, 100));
    }

    #[test]
    fn crp_counts() {
        assert_eq!(distinguishable_crp_count(4, 10, 10).to_string(), "118784");
        assert_eq!(distinguishable_crp_count(1, 1, 10).to_string(), "1024");
        assert_eq!(chip_crp_total(2, 4, 10, 10).to_string(), "237568");
        assert_eq!(chip_crp_total(1, 5, 15, 10), distinguishable_crp_count(5, 15, 10));
        // a 10-node tree is at least 4 tall, so both aggregations agree here
        assert_eq!(
            height_bounded_crp_count(4, 10, 10),
            distinguishable_crp_count(4, 10, 10)
        );
    }

    #[test]
    fn sci_rendering() {
        assert_eq!(BigCount::from_u64(118_784).to_sci(3), "1.19e5");
        assert_eq!(BigCount::from_u64(999_500).to_sci(3), "1.00e6");
        assert_eq!(BigCount::from_u64(999_499).to_sci(3), "9.99e5");
        assert_eq!(BigCount::from_u64(7).to_sci(3), "7.00e0");
        assert_eq!(BigCount::from_u64(0).to_sci(3), "0.00e0");
        assert_eq!(BigCount::from_u64(12_345).to_sci(1), "1e4");
    }

    #[test]
    fn csv_has_all_presets() {
        let csv = preset_table_csv(10);
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.contains("4,10,118784,1.19e5"));
    }
}
