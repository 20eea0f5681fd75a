//! The Construction C point set `C_1 + 2C_2 + ... + 2^{L-1}C_L + 2^L Zⁿ`,
//! held exactly through its residues modulo `2^L`.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2::{is_nested, BinaryCode, BitWord};

/// Maximum number of levels; keeps `2^L` and its powers comfortably in `i64`.
pub const MAX_LEVELS: usize = 16;
/// Maximum residue count per period.
pub const MAX_RESIDUES: u64 = 1 << 22;

/// An integer point of Zⁿ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn zero(n: usize) -> Self {
        Point(vec![0; n])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn norm2(&self) -> i64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<i64>> for Point {
    fn from(v: Vec<i64>) -> Self {
        Point(v)
    }
}

impl From<&[i64]> for Point {
    fn from(v: &[i64]) -> Self {
        Point(v.to_vec())
    }
}

impl Deref for Point {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// L binary codes of common length n, level 1 first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeChain {
    n: usize,
    codes: Vec<BinaryCode>,
}

impl CodeChain {
    pub fn new(codes: Vec<BinaryCode>) -> Result<Self> {
        let first = codes
            .first()
            .ok_or_else(|| Error::InvalidArgument("a chain needs at least one level".into()))?;
        if codes.len() > MAX_LEVELS {
            return Err(Error::GuardExceeded {
                what: "level count",
                limit: MAX_LEVELS as u64,
                actual: codes.len() as u64,
            });
        }
        let n = first.len();
        if let Some(bad) = codes.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self { n, codes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of levels L.
    pub fn levels(&self) -> usize {
        self.codes.len()
    }

    pub fn codes(&self) -> &[BinaryCode] {
        &self.codes
    }

    pub fn code(&self, level: usize) -> &BinaryCode {
        &self.codes[level - 1]
    }

    /// The period 2^L.
    pub fn modulus(&self) -> i64 {
        1i64 << self.levels()
    }

    /// ∏|C_i|, the number of residues per period.
    pub fn residue_count(&self) -> u128 {
        self.codes.iter().map(|c| c.size() as u128).product()
    }

    pub fn is_linear(&self) -> bool {
        self.codes.iter().all(BinaryCode::is_linear)
    }

    pub fn is_nested(&self) -> bool {
        self.codes
            .windows(2)
            .all(|w| is_nested(&w[0], &w[1]).unwrap_or(false))
    }

    pub(crate) fn require_linear(&self) -> Result<()> {
        match self.codes.iter().position(|c| !c.is_linear()) {
            Some(i) => Err(Error::NotLinear { level: i + 1 }),
            None => Ok(()),
        }
    }

    pub(crate) fn require_nested_linear(&self) -> Result<()> {
        self.require_linear()?;
        for (i, w) in self.codes.windows(2).enumerate() {
            if !is_nested(&w[0], &w[1])? {
                return Err(Error::NotNested { level: i + 1 });
            }
        }
        Ok(())
    }

    pub(crate) fn require_levels(&self, expected: usize) -> Result<()> {
        if self.levels() != expected {
            return Err(Error::LevelCount {
                expected,
                found: self.levels(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_point(&self, p: &[i64]) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: p.len(),
            });
        }
        Ok(())
    }

    /// Applies the same coordinate permutation to every level.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let codes = self
            .codes
            .iter()
            .map(|c| c.permuted(perm))
            .collect::<Result<Vec<_>>>()?;
        Self::new(codes)
    }

    /// Membership of a point, by its base-2 digit words modulo 2^L.
    pub fn contains(&self, p: &[i64]) -> Result<bool> {
        self.check_point(p)?;
        Ok(self.contains_unchecked(p))
    }

    pub(crate) fn contains_unchecked(&self, p: &[i64]) -> bool {
        let m = self.modulus();
        let n = self.n;
        self.codes.iter().enumerate().all(|(level, code)| {
            let mut bits = 0u32;
            for (k, &x) in p.iter().enumerate() {
                let digit = (x.rem_euclid(m) >> level) & 1;
                bits |= (digit as u32) << (n - 1 - k);
            }
            code.contains_packed(bits)
        })
    }

    /// Membership of a residue already reduced into [0, 2^L)ⁿ.
    #[inline]
    pub(crate) fn contains_residue(&self, r: &[i64]) -> bool {
        let n = self.n;
        self.codes.iter().enumerate().all(|(level, code)| {
            let mut bits = 0u32;
            for (k, &x) in r.iter().enumerate() {
                bits |= (((x >> level) & 1) as u32) << (n - 1 - k);
            }
            code.contains_packed(bits)
        })
    }
}

/// A member written as `c_1 + 2c_2 + ... + 2^{L-1}c_L + 2^L z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub digits: Vec<BitWord>,
    pub z: Point,
}

impl Decomposition {
    pub fn recompose(&self) -> Point {
        let levels = self.digits.len();
        let m = 1i64 << levels;
        Point(
            (0..self.z.len())
                .map(|k| {
                    let low: i64 = self
                        .digits
                        .iter()
                        .enumerate()
                        .map(|(i, d)| i64::from(d.get(k)) << i)
                        .sum();
                    low + m * self.z[k]
                })
                .collect(),
        )
    }
}

/// Splits a member into its level digit words and integer part.
pub fn decompose(chain: &CodeChain, p: &[i64]) -> Result<Decomposition> {
    if !chain.contains(p)? {
        return Err(Error::NotMember(Point::from(p)));
    }
    let m = chain.modulus();
    let digits = (0..chain.levels())
        .map(|level| {
            let bits: Vec<u8> = p
                .iter()
                .map(|&x| ((x.rem_euclid(m) >> level) & 1) as u8)
                .collect();
            BitWord::from_bits(&bits)
        })
        .collect::<Result<Vec<_>>>()?;
    let z = Point(p.iter().map(|&x| x.div_euclid(m)).collect());
    Ok(Decomposition { digits, z })
}

/// The residues of a chain's constellation modulo 2^L, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueSet {
    n: usize,
    modulus: i64,
    // row-major, `n` entries per residue
    flat: Vec<i64>,
}

impl ResidueSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn get(&self, i: usize) -> &[i64] {
        &self.flat[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.flat.chunks_exact(self.n)
    }

    pub fn points(&self) -> Vec<Point> {
        self.iter().map(Point::from).collect()
    }

    pub fn contains(&self, r: &[i64]) -> bool {
        self.position(r).is_some()
    }

    pub fn position(&self, r: &[i64]) -> Option<usize> {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(r) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub(crate) fn from_points(n: usize, modulus: i64, mut points: Vec<Vec<i64>>) -> Self {
        points.sort_unstable();
        points.dedup();
        Self {
            n,
            modulus,
            flat: points.into_iter().flatten().collect(),
        }
    }
}

pub(crate) fn check_residue_guard(chain: &CodeChain) -> Result<()> {
    let count = chain.residue_count();
    if count > u128::from(MAX_RESIDUES) {
        return Err(Error::GuardExceeded {
            what: "residue count",
            limit: MAX_RESIDUES,
            actual: u64::try_from(count).unwrap_or(u64::MAX),
        });
    }
    Ok(())
}

/// All sums `Σ 2^{i-1} c_i` with `c_i ∈ C_i`.
pub fn residues(chain: &CodeChain) -> Result<ResidueSet> {
    check_residue_guard(chain)?;
    let n = chain.n();
    let mut acc: Vec<Vec<i64>> = vec![vec![0; n]];
    for (level, code) in chain.codes().iter().enumerate() {
        let scale = 1i64 << level;
        let mut next = Vec::with_capacity(acc.len() * code.size());
        for base in &acc {
            for w in code.words() {
                let mut p = base.clone();
                for (k, x) in p.iter_mut().enumerate() {
                    *x += scale * i64::from(w.get(k));
                }
                next.push(p);
            }
        }
        acc = next;
    }
    let set = ResidueSet::from_points(n, chain.modulus(), acc);
    debug_assert_eq!(set.len() as u128, chain.residue_count());
    Ok(set)
}

/// Members of the constellation inside the closed box `[lo, hi]`, sorted.
pub fn points_in_box(chain: &CodeChain, lo: &[i64], hi: &[i64]) -> Result<Vec<Point>> {
    chain.check_point(lo)?;
    chain.check_point(hi)?;
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return Err(Error::InvalidArgument(format!(
            "degenerate box: lo {} exceeds hi {}",
            Point::from(lo),
            Point::from(hi)
        )));
    }
    let res = residues(chain)?;
    let m = chain.modulus();
    let mut out = Vec::new();
    for s in res.iter() {
        // per-coordinate values congruent to s_k inside [lo_k, hi_k]
        let axes: Vec<Vec<i64>> = s
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(&r, (&a, &b))| {
                let first = a + (r - a).rem_euclid(m);
                (0..)
                    .map(|t| first + t * m)
                    .take_while(|&v| v <= b)
                    .collect()
            })
            .collect();
        if axes.iter().any(Vec::is_empty) {
            continue;
        }
        let mut idx = vec![0usize; axes.len()];
        'odometer: loop {
            out.push(Point(idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect()));
            for k in (0..axes.len()).rev() {
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    continue 'odometer;
                }
                idx[k] = 0;
            }
            break;
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;

    fn pts(v: &[&[i64]]) -> Vec<Point> {
        v.iter().map(|p| Point::from(*p)).collect()
    }

    #[test]
    fn residue_examples() {
        let r = residues(&presets::example1()).unwrap();
        assert_eq!(r.modulus(), 4);
        assert_eq!(r.points(), pts(&[&[0, 0], &[1, 1]]));

        let r = residues(&presets::example3()).unwrap();
        assert_eq!(r.modulus(), 8);
        assert_eq!(r.points(), pts(&[&[0], &[1], &[2], &[3]]));

        let zero = CodeChain::new(vec![BinaryCode::zero(2).unwrap(); 2]).unwrap();
        let r = residues(&zero).unwrap();
        assert_eq!((r.modulus(), r.points()), (4, pts(&[&[0, 0]])));
    }

    #[test]
    fn residue_guard() {
        let full = BinaryCode::full(12).unwrap();
        let chain = CodeChain::new(vec![full.clone(), full]).unwrap();
        assert!(matches!(residues(&chain), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn membership_examples() {
        let ex3 = presets::example3();
        assert!(!ex3.contains(&[6]).unwrap());
        assert!(!ex3.contains(&[12]).unwrap());
        assert!(ex3.contains(&[11]).unwrap());
        assert!(ex3.contains(&[-5]).unwrap());
        assert!(presets::example5().contains(&[0, 0, 0]).unwrap());
        assert!(ex3.contains(&[1, 2]).is_err());
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&presets::example5(), &[5, 3, 6]).unwrap();
        let words: Vec<String> = d.digits.iter().map(ToString::to_string).collect();
        assert_eq!(words, ["110", "011", "101"]);
        assert_eq!(d.z, Point::zero(3));

        let d = decompose(&presets::example3(), &[9]).unwrap();
        let bits: Vec<u8> = d.digits.iter().map(|w| w.get(0)).collect();
        assert_eq!(bits, [1, 0, 0]);
        assert_eq!(d.z, Point(vec![1]));

        let d = decompose(&presets::example5(), &[-8, 16, 0]).unwrap();
        assert!(d.digits.iter().all(BitWord::is_zero));
        assert_eq!(d.z, Point(vec![-1, 2, 0]));

        assert!(matches!(
            decompose(&presets::example3(), &[6]),
            Err(Error::NotMember(_))
        ));
    }

    #[test]
    fn box_examples() {
        let got = points_in_box(&presets::example1(), &[0, 0], &[4, 4]).unwrap();
        assert_eq!(got, pts(&[&[0, 0], &[0, 4], &[1, 1], &[4, 0], &[4, 4]]));
        let got = points_in_box(&presets::example3(), &[0], &[12]).unwrap();
        assert_eq!(
            got,
            pts(&[&[0], &[1], &[2], &[3], &[8], &[9], &[10], &[11]])
        );
        let ex5 = presets::example5();
        let got = points_in_box(&ex5, &[0, 0, 0], &[7, 7, 7]).unwrap();
        assert_eq!(got.len() as u128, ex5.residue_count());
        assert!(points_in_box(&ex5, &[0, 1, 0], &[7, 0, 7]).is_err());
    }

    #[test]
    fn construction_a_is_a_subgroup() {
        let code = BinaryCode::even_weight(4).unwrap();
        let chain = CodeChain::new(vec![code]).unwrap();
        let r = residues(&chain).unwrap();
        for a in r.iter() {
            assert!(a.iter().all(|&x| x == 0 || x == 1));
            for b in r.iter() {
                let s: Vec<i64> = a.iter().zip(b).map(|(x, y)| (x + y) % 2).collect();
                assert!(r.contains(&s));
            }
        }
    }

    proptest! {
        #[test]
        fn periodic_membership(p in prop::collection::vec(-40i64..40, 3), j in 0usize..3) {
            let chain = presets::example5();
            let mut q = p.clone();
            q[j] += chain.modulus();
            prop_assert_eq!(chain.contains(&p).unwrap(), chain.contains(&q).unwrap());
        }

        #[test]
        fn decompose_recompose(idx in 0usize..64, z in prop::collection::vec(-5i64..5, 3)) {
            let chain = presets::example5();
            let r = residues(&chain).unwrap();
            let p: Vec<i64> = r.get(idx).iter().zip(&z).map(|(s, z)| s + 8 * z).collect();
            let d = decompose(&chain, &p).unwrap();
            prop_assert_eq!(d.recompose(), Point(p));
        }
    }
}
