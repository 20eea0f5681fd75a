//! Binary words and binary codes over F₂.
//!
//! Words are packed into a `u32` with coordinate 0 in the most significant
//! used bit, so integer order on the packed value coincides with
//! lexicographic order on the coordinate tuple.

use std::fmt;

use crate::constellation::CodeChain;
use crate::error::{Error, Result};

/// Longest supported word length.
pub const MAX_WORD_LEN: usize = 24;
/// Largest number of generators `span` will expand.
pub const MAX_GENERATORS: usize = 20;
/// Largest supported code size.
pub const MAX_CODE_SIZE: usize = 1 << 20;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWord {
    // `len` first so derived ordering compares lengths before bits
    len: u8,
    bits: u32,
}

impl BitWord {
    pub fn new(len: usize, bits: u32) -> Result<Self> {
        check_len(len)?;
        if len < 32 && bits >> len != 0 {
            return Err(Error::InvalidArgument(format!(
                "bit pattern {bits:#b} does not fit in {len} coordinates"
            )));
        }
        Ok(Self {
            len: len as u8,
            bits,
        })
    }

    pub fn zero(len: usize) -> Result<Self> {
        Self::new(len, 0)
    }

    pub fn ones(len: usize) -> Result<Self> {
        check_len(len)?;
        Ok(Self {
            len: len as u8,
            bits: mask(len),
        })
    }

    /// Builds a word from a slice of 0/1 entries.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_len(bits.len())?;
        let mut packed = 0u32;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidArgument(format!("entry {b} is not a bit")));
            }
            packed = (packed << 1) | u32::from(b);
        }
        Self::new(bits.len(), packed)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed representation, coordinate 0 in the high bit.
    #[inline]
    pub fn packed(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len());
        ((self.bits >> (self.len() - 1 - i)) & 1) as u8
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn to_vec(&self) -> Vec<u8> {
        self.iter().collect()
    }

    fn same_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl serde::Serialize for BitWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::InvalidArgument(
            "word length must be positive".into(),
        ));
    }
    if len > MAX_WORD_LEN {
        return Err(Error::GuardExceeded {
            what: "word length",
            limit: MAX_WORD_LEN as u64,
            actual: len as u64,
        });
    }
    Ok(())
}

#[inline]
fn mask(len: usize) -> u32 {
    if len >= 32 {
        u32::MAX
    } else {
        (1u32 << len) - 1
    }
}

/// Component-wise sum modulo 2.
pub fn xor_add(a: BitWord, b: BitWord) -> Result<BitWord> {
    a.same_len(&b)?;
    Ok(BitWord {
        len: a.len,
        bits: a.bits ^ b.bits,
    })
}

/// Component-wise (Schur) product.
pub fn schur(a: BitWord, b: BitWord) -> Result<BitWord> {
    a.same_len(&b)?;
    Ok(BitWord {
        len: a.len,
        bits: a.bits & b.bits,
    })
}

/// Incremental row-echelon form over F₂, used for rank and independence tests.
#[derive(Clone, Debug, Default)]
pub(crate) struct Echelon {
    // (pivot bit, row) with rows reduced against earlier pivots
    rows: Vec<(u32, u32)>,
}

impl Echelon {
    pub(crate) fn reduce(&self, mut v: u32) -> u32 {
        for &(pivot, row) in &self.rows {
            if v & pivot != 0 {
                v ^= row;
            }
        }
        v
    }

    /// Inserts `v`; returns false when it is already in the span.
    pub(crate) fn insert(&mut self, v: u32) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        let pivot = 1u32 << (31 - r.leading_zeros());
        self.rows.push((pivot, r));
        true
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// F₂-rank of a set of words.
pub fn rank(words: &[BitWord]) -> usize {
    let mut ech = Echelon::default();
    for w in words {
        ech.insert(w.bits);
    }
    ech.rank()
}

/// A binary code: a nonempty deduplicated set of words of common length,
/// optionally carrying the spanning set it was generated from.
///
/// Equality compares word sets only; the generator list is provenance.
#[derive(Clone, Debug)]
pub struct BinaryCode {
    n: usize,
    // sorted ascending (lexicographic)
    words: Vec<BitWord>,
    generators: Option<Vec<BitWord>>,
}

impl BinaryCode {
    /// Builds a code from an explicit word list; duplicates are dropped.
    pub fn from_words(n: usize, words: impl IntoIterator<Item = BitWord>) -> Result<Self> {
        check_len(n)?;
        let mut words: Vec<BitWord> = words.into_iter().collect();
        for w in &words {
            if w.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: w.len(),
                });
            }
        }
        words.sort_unstable();
        words.dedup();
        if words.is_empty() {
            return Err(Error::InvalidArgument(
                "code must contain at least one word".into(),
            ));
        }
        if words.len() > MAX_CODE_SIZE {
            return Err(Error::GuardExceeded {
                what: "code size",
                limit: MAX_CODE_SIZE as u64,
                actual: words.len() as u64,
            });
        }
        Ok(Self {
            n,
            words,
            generators: None,
        })
    }

    /// The F₂-span of `generators`. An empty generator list gives the zero code.
    pub fn span(n: usize, generators: &[BitWord]) -> Result<Self> {
        check_len(n)?;
        if generators.len() > MAX_GENERATORS {
            return Err(Error::GuardExceeded {
                what: "generator count",
                limit: MAX_GENERATORS as u64,
                actual: generators.len() as u64,
            });
        }
        let mut ech = Echelon::default();
        let mut words = vec![0u32];
        for g in generators {
            if g.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: g.len(),
                });
            }
            if ech.insert(g.bits) {
                let doubled: Vec<u32> = words.iter().map(|w| w ^ g.bits).collect();
                words.extend(doubled);
            }
        }
        let mut words: Vec<BitWord> = words
            .into_iter()
            .map(|bits| BitWord { len: n as u8, bits })
            .collect();
        words.sort_unstable();
        Ok(Self {
            n,
            words,
            generators: Some(generators.to_vec()),
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::span(n, &[])
    }

    /// The whole space F₂ⁿ.
    pub fn full(n: usize) -> Result<Self> {
        let gens = (0..n)
            .map(|i| BitWord::new(n, 1 << i))
            .collect::<Result<Vec<_>>>()?;
        Self::span(n, &gens)
    }

    /// The [n,1,n] repetition code.
    pub fn repetition(n: usize) -> Result<Self> {
        Self::span(n, &[BitWord::ones(n)?])
    }

    /// The [n,n-1,2] even-weight code, generated by adjacent weight-2 words.
    pub fn even_weight(n: usize) -> Result<Self> {
        let gens = (0..n.saturating_sub(1))
            .map(|i| BitWord::new(n, 0b11 << (n - 2 - i)))
            .collect::<Result<Vec<_>>>()?;
        Self::span(n, &gens)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of codewords.
    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[BitWord] {
        &self.words
    }

    pub fn generators(&self) -> Option<&[BitWord]> {
        self.generators.as_deref()
    }

    pub fn contains(&self, w: BitWord) -> bool {
        w.len() == self.n && self.words.binary_search(&w).is_ok()
    }

    /// Membership of a packed word (no length check).
    #[inline]
    pub(crate) fn contains_packed(&self, bits: u32) -> bool {
        self.words.binary_search_by(|w| w.bits.cmp(&bits)).is_ok()
    }

    /// Closed under addition and containing zero. A code is linear exactly
    /// when its size equals 2 to the power of its rank.
    pub fn is_linear(&self) -> bool {
        let r = rank(&self.words);
        r < usize::BITS as usize && self.words.len() == 1usize << r
    }

    /// Dimension when the code is linear.
    pub fn dimension(&self) -> Option<usize> {
        self.is_linear()
            .then(|| self.words.len().trailing_zeros() as usize)
    }

    /// A spanning set for a linear code: the supplied generators when
    /// present, otherwise a greedy basis taken in lexicographic word order.
    pub fn spanning_set(&self) -> Vec<BitWord> {
        if let Some(g) = &self.generators {
            return g.clone();
        }
        let mut ech = Echelon::default();
        self.words
            .iter()
            .copied()
            .filter(|w| ech.insert(w.bits))
            .collect()
    }

    /// Drops the generator list, leaving the canonical word-set form.
    pub fn into_explicit(mut self) -> Self {
        self.generators = None;
        self
    }

    /// Same words, coordinates permuted: output coordinate `i` is input coordinate `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: perm.len(),
            });
        }
        let map = |w: &BitWord| {
            let bits: Vec<u8> = perm.iter().map(|&p| w.get(p)).collect();
            BitWord::from_bits(&bits)
        };
        let words = self.words.iter().map(map).collect::<Result<Vec<_>>>()?;
        let mut code = Self::from_words(self.n, words)?;
        if let Some(g) = &self.generators {
            code.generators = Some(g.iter().map(map).collect::<Result<Vec<_>>>()?);
        }
        Ok(code)
    }
}

impl PartialEq for BinaryCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.words == other.words
    }
}

impl Eq for BinaryCode {}

/// True iff every word of `inner` lies in `outer`.
pub fn is_nested(inner: &BinaryCode, outer: &BinaryCode) -> Result<bool> {
    if inner.n != outer.n {
        return Err(Error::LengthMismatch {
            expected: outer.n,
            found: inner.n,
        });
    }
    Ok(inner.words.iter().all(|w| outer.contains(*w)))
}

/// A Schur-closure violation: `x * y` left level `level` (1-based) without landing in the next level.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SchurWitness {
    pub level: usize,
    pub x: BitWord,
    pub y: BitWord,
    pub product: BitWord,
}

/// Checks C_i * C_i ⊆ C_{i+1} for every level i below the top.
///
/// Codes must be linear. Nesting is not required: since x * x = x, a word of
/// C_i outside C_{i+1} is reported as a failing diagonal pair.
/// The top level has no successor; its products fall into the `2^L Zⁿ` term.
/// By bilinearity only pairs from a spanning set of each level are tested.
/// The witness is the first failing pair (j ≤ k) in spanning-set order.
pub fn schur_closed_chain(chain: &CodeChain) -> Result<(bool, Option<SchurWitness>)> {
    chain.require_linear()?;
    let codes = chain.codes();
    for (i, pair) in codes.windows(2).enumerate() {
        let (cur, next) = (&pair[0], &pair[1]);
        let basis = cur.spanning_set();
        for (j, &x) in basis.iter().enumerate() {
            for &y in &basis[j..] {
                let product = schur(x, y)?;
                if !next.contains(product) {
                    return Ok((
                        false,
                        Some(SchurWitness {
                            level: i + 1,
                            x,
                            y,
                            product,
                        }),
                    ));
                }
            }
        }
    }
    Ok((true, None))
}
