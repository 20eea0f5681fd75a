//! Exact squared-distance spectra and the equi-distance-spectrum test.
//!
//! For a center `c` and a residue `s`, the points `s + 2^L z` split into
//! independent coordinates, and coordinate `k` contributes the squared
//! offsets `(s_k - c_k + 2^L z_k)^2`. Those offsets depend only on the folded
//! difference `min(d, 2^L - d)` with `d = (s_k - c_k) mod 2^L`, so a center's
//! spectrum is a sum over the histogram of folded difference vectors of a
//! product of per-coordinate offset series.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::constellation::{residues, CodeChain, Point, ResidueSet};
use crate::error::{Error, Result};

/// Upper bound on the integer points a ball query may cover.
pub const MAX_BALL_POINTS: u64 = 100_000_000;

/// Default EDS radius: four squared periods.
pub fn default_r2max(chain: &CodeChain) -> u64 {
    4 * (chain.modulus() as u64).pow(2)
}

/// Counts of constellation points by squared distance from `center`,
/// excluding the center itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumTable {
    pub center: Point,
    pub r2max: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl SpectrumTable {
    /// Squared minimum distance seen within the radius.
    pub fn d2min(&self) -> Option<u64> {
        self.counts.keys().next().copied()
    }

    pub fn count(&self, d2: u64) -> u64 {
        self.counts.get(&d2).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Sign-insensitive coordinate-wise equality: `|a_i| == |b_i|` for all i.
pub fn cw_equidistant(a: &[i64], b: &[i64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter().zip(b).all(|(x, y)| x.abs() == y.abs()))
}

/// Number of integer vectors of Zⁿ with squared norm at most `r2max`.
fn integer_ball_count(n: usize, r2max: u64) -> u64 {
    let len = r2max as usize + 1;
    let mut acc = vec![0u64; len];
    acc[0] = 1;
    let root = (r2max as f64).sqrt() as i64 + 1;
    for _ in 0..n {
        let mut next = vec![0u64; len];
        for (a, &cnt) in acc.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            for x in -root..=root {
                let t = a + (x * x) as usize;
                if t < len {
                    next[t] = next[t].saturating_add(cnt);
                }
            }
        }
        acc = next;
    }
    acc.iter().fold(0u64, |s, &c| s.saturating_add(c))
}

pub(crate) fn check_ball_guard(n: usize, r2max: u64) -> Result<()> {
    if r2max == 0 {
        return Err(Error::InvalidArgument("r2max must be positive".into()));
    }
    // the dense series arrays are r2max long; refuse absurd radii before allocating
    if r2max > MAX_BALL_POINTS {
        return Err(Error::GuardExceeded {
            what: "r2max",
            limit: MAX_BALL_POINTS,
            actual: r2max,
        });
    }
    let count = integer_ball_count(n, r2max);
    if count > MAX_BALL_POINTS {
        return Err(Error::GuardExceeded {
            what: "points enumerated",
            limit: MAX_BALL_POINTS,
            actual: count,
        });
    }
    Ok(())
}

/// Histogram of folded difference vectors for one center, sorted by key.
type Histogram = Vec<(u128, u32)>;

/// Shared machinery for spectra of one chain at one radius.
pub(crate) struct SpectrumEngine<'a> {
    chain: &'a CodeChain,
    res: ResidueSet,
    r2max: u64,
    radix: u128,
    // squared offsets (f + m z)^2 ≤ r2max for each folded value f
    series: Vec<Vec<u64>>,
}

impl<'a> SpectrumEngine<'a> {
    pub(crate) fn new(chain: &'a CodeChain, r2max: u64) -> Result<Self> {
        check_ball_guard(chain.n(), r2max)?;
        let res = residues(chain)?;
        let m = chain.modulus();
        let half = m / 2;
        let radix = half as u128 + 1;
        let bits = (radix as f64).log2() * chain.n() as f64;
        if bits >= 127.0 {
            return Err(Error::GuardExceeded {
                what: "spectrum key bits",
                limit: 127,
                actual: bits.ceil() as u64,
            });
        }
        let series = (0..=half)
            .map(|f| {
                let mut v = Vec::new();
                let reach = (r2max as f64).sqrt() as i64 / m + 2;
                for z in -reach..=reach {
                    let d = f + m * z;
                    let d2 = (d * d) as u64;
                    if d2 <= r2max {
                        v.push(d2);
                    }
                }
                v.sort_unstable();
                v
            })
            .collect();
        Ok(Self {
            chain,
            res,
            r2max,
            radix,
            series,
        })
    }

    fn histogram(&self, c: &[i64]) -> Histogram {
        let m = self.chain.modulus();
        let mut keys: Vec<u128> = self
            .res
            .iter()
            .map(|s| {
                s.iter().zip(c).fold(0u128, |key, (&sk, &ck)| {
                    let d = (sk - ck).rem_euclid(m);
                    key * self.radix + d.min(m - d) as u128
                })
            })
            .collect();
        keys.sort_unstable();
        let mut hist: Histogram = Vec::new();
        for k in keys {
            match hist.last_mut() {
                Some((last, cnt)) if *last == k => *cnt += 1,
                _ => hist.push((k, 1)),
            }
        }
        hist
    }

    /// Distance counts (including distance 0) of all points `s + m z` whose folded
    /// difference vector is `key`.
    fn key_series(&self, key: u128) -> Vec<u64> {
        let n = self.chain.n();
        let len = self.r2max as usize + 1;
        let mut digits = vec![0usize; n];
        let mut k = key;
        for d in digits.iter_mut().rev() {
            *d = (k % self.radix) as usize;
            k /= self.radix;
        }
        let mut acc = vec![0u64; len];
        acc[0] = 1;
        for &f in &digits {
            let mut next = vec![0u64; len];
            for (a, &cnt) in acc.iter().enumerate() {
                if cnt == 0 {
                    continue;
                }
                for &d2 in &self.series[f] {
                    let t = a + d2 as usize;
                    if t >= len {
                        break;
                    }
                    next[t] += cnt;
                }
            }
            acc = next;
        }
        acc
    }

    fn table_from_histogram(
        &self,
        center: Point,
        hist: &Histogram,
        cache: &mut HashMap<u128, Vec<u64>>,
    ) -> SpectrumTable {
        let len = self.r2max as usize + 1;
        let mut total = vec![0u64; len];
        for &(key, mult) in hist {
            let s = cache.entry(key).or_insert_with(|| self.key_series(key));
            for (t, &v) in total.iter_mut().zip(s.iter()) {
                *t += u64::from(mult) * v;
            }
        }
        let counts = total
            .into_iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, c)| c > 0)
            .map(|(d2, c)| (d2 as u64, c))
            .collect();
        SpectrumTable {
            center,
            r2max: self.r2max,
            counts,
        }
    }

    pub(crate) fn table(&self, c: &[i64], cache: &mut HashMap<u128, Vec<u64>>) -> SpectrumTable {
        let hist = self.histogram(c);
        self.table_from_histogram(Point::from(c), &hist, cache)
    }

    /// Tables for every residue, in residue order.
    pub(crate) fn all_tables(&self) -> Vec<SpectrumTable> {
        let hists: Vec<Histogram> = (0..self.res.len())
            .into_par_iter()
            .map(|i| self.histogram(self.res.get(i)))
            .collect();
        // identical histograms give identical tables; build each distinct one once
        let mut distinct: BTreeMap<&Histogram, usize> = BTreeMap::new();
        for h in &hists {
            let next = distinct.len();
            distinct.entry(h).or_insert(next);
        }
        let mut order: Vec<(&Histogram, usize)> = distinct.into_iter().collect();
        order.sort_by_key(|&(_, i)| i);
        let built: Vec<BTreeMap<u64, u64>> = order
            .par_iter()
            .map(|(h, _)| {
                let mut cache = HashMap::new();
                self.table_from_histogram(Point(Vec::new()), h, &mut cache)
                    .counts
            })
            .collect();
        let index: BTreeMap<&Histogram, usize> = order.iter().map(|&(h, i)| (h, i)).collect();
        hists
            .iter()
            .enumerate()
            .map(|(i, h)| SpectrumTable {
                center: Point::from(self.res.get(i)),
                r2max: self.r2max,
                counts: built[index[h]].clone(),
            })
            .collect()
    }
}

/// Exact spectrum around a member `c` out to squared radius `r2max`.
pub fn spectrum_at(chain: &CodeChain, c: &[i64], r2max: u64) -> Result<SpectrumTable> {
    if !chain.contains(c)? {
        return Err(Error::NotMember(Point::from(c)));
    }
    let engine = SpectrumEngine::new(chain, r2max)?;
    Ok(engine.table(c, &mut HashMap::new()))
}

/// First disagreement between two residues' spectra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdsWitness {
    pub c: Point,
    pub c_prime: Point,
    pub d2: u64,
    pub count_c: u64,
    pub count_c_prime: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdsResult {
    pub holds: bool,
    pub r2max: u64,
    pub witness: Option<EdsWitness>,
    /// Spectrum of the first residue.
    pub reference: SpectrumTable,
    pub distinct_tables: usize,
}

/// Checks that every residue has the same spectrum up to `r2max`.
///
/// Translation by `2^L Zⁿ` preserves spectra, so residues cover every center.
pub fn eds_check(chain: &CodeChain, r2max: u64) -> Result<EdsResult> {
    let engine = SpectrumEngine::new(chain, r2max)?;
    let tables = engine.all_tables();
    let reference = tables[0].clone();
    let distinct_tables = tables
        .iter()
        .map(|t| &t.counts)
        .collect::<BTreeSet<_>>()
        .len();
    let witness = tables
        .iter()
        .find(|t| t.counts != reference.counts)
        .map(|t| {
            let d2 = reference
                .counts
                .keys()
                .chain(t.counts.keys())
                .copied()
                .filter(|&d| reference.count(d) != t.count(d))
                .min()
                .expect("tables differ somewhere");
            EdsWitness {
                c: reference.center.clone(),
                c_prime: t.center.clone(),
                d2,
                count_c: reference.count(d2),
                count_c_prime: t.count(d2),
            }
        });
    Ok(EdsResult {
        holds: witness.is_none(),
        r2max,
        witness,
        reference,
        distinct_tables,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KissingStats {
    pub d2min: u64,
    /// Per-residue neighbor counts at `d2min`.
    pub kissing_values: BTreeSet<u64>,
}

/// Global minimum squared distance and the set of kissing numbers across residues.
pub fn kissing_stats(chain: &CodeChain) -> Result<KissingStats> {
    // every point has its own translates at squared distance 4^L
    let r2max = (chain.modulus() as u64).pow(2);
    let engine = SpectrumEngine::new(chain, r2max)?;
    let tables = engine.all_tables();
    let d2min = tables
        .iter()
        .filter_map(SpectrumTable::d2min)
        .min()
        .expect("period translates are always within range");
    let kissing_values = tables.iter().map(|t| t.count(d2min)).collect();
    Ok(KissingStats {
        d2min,
        kissing_values,
    })
}

/// The distinct points `x + σ|e|` over all sign patterns σ, sorted.
pub fn cw_candidates(x: &[i64], e: &[i64]) -> Vec<Point> {
    let mut out = vec![Vec::with_capacity(x.len())];
    for (&xk, &ek) in x.iter().zip(e) {
        let options: &[i64] = if ek == 0 { &[0] } else { &[-1, 1] };
        out = out
            .into_iter()
            .flat_map(|p| {
                options.iter().map(move |&s| {
                    let mut q = p.clone();
                    q.push(xk + s * ek.abs());
                    q
                })
            })
            .collect();
    }
    let mut pts: Vec<Point> = out.into_iter().map(Point).collect();
    pts.sort_unstable();
    pts
}

/// Number of members `y` with `y - x` coordinate-wise equi-distant to `e`.
pub fn cw_count(chain: &CodeChain, x: &[i64], e: &[i64]) -> Result<u64> {
    if !chain.contains(x)? {
        return Err(Error::NotMember(Point::from(x)));
    }
    chain.check_point(e)?;
    Ok(cw_candidates(x, e)
        .iter()
        .filter(|y| chain.contains_unchecked(y))
        .count() as u64)
}
