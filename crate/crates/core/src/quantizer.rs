//! Nearest-point quantization onto a Construction C constellation and Monte
//! Carlo estimation of its normalized second moment.

use std::fmt::Debug;

use num_integer::Integer;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constellation::{residues, CodeChain, Point, ResidueSet};
use crate::error::{Error, Result};
use crate::f2::BinaryCode;

/// Minimum sample count accepted by [`nsm_estimate`].
pub const MIN_SAMPLES: u64 = 1_000;
/// Samples per random stream; fixed so results do not depend on the worker count.
pub const BLOCK_SIZE: u64 = 4_096;

/// Floating-point types the quantizer runs in.
pub trait QuantScalar:
    Float + FromPrimitive + ToPrimitive + Send + Sync + Debug + Serialize
{
}

impl<T> QuantScalar for T where
    T: Float + FromPrimitive + ToPrimitive + Send + Sync + Debug + Serialize
{
}

/// The [n,1,n] repetition code under the [n,n-1,2] even-weight code.
pub fn dplus_chain(n: usize) -> Result<CodeChain> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "the repetition/parity chain needs n >= 2, got {n}"
        )));
    }
    CodeChain::new(vec![
        BinaryCode::repetition(n)?,
        BinaryCode::even_weight(n)?,
    ])
}

/// Nearest-point decoder: the best rounding within each residue coset.
#[derive(Clone, Debug)]
pub struct Quantizer {
    n: usize,
    modulus: i64,
    res: ResidueSet,
}

impl Quantizer {
    pub fn new(chain: &CodeChain) -> Result<Self> {
        Ok(Self {
            n: chain.n(),
            modulus: chain.modulus(),
            res: residues(chain)?,
        })
    }

    /// Closest member to `w`, with its squared distance. Ties go to the
    /// lexicographically smallest point.
    pub fn nearest<F: QuantScalar>(&self, w: &[F]) -> Result<(Point, F)> {
        if w.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: w.len(),
            });
        }
        let m = self.modulus as usize;
        let mf = F::from_i64(self.modulus).unwrap();
        let half = F::from_f64(0.5).unwrap();
        // per coordinate and residue value: nearest congruent integer and its squared offset
        let mut best_value = vec![0i64; self.n * m];
        let mut best_d2 = vec![F::zero(); self.n * m];
        for (k, &wk) in w.iter().enumerate() {
            for r in 0..m {
                let rf = F::from_usize(r).unwrap();
                // round half down so the smaller of two equidistant integers wins
                let z = ((wk - rf) / mf - half).ceil();
                let v = rf + mf * z;
                let d = wk - v;
                best_value[k * m + r] = v.to_i64().expect("finite input");
                best_d2[k * m + r] = d * d;
            }
        }
        let mut best: Option<(usize, F)> = None;
        for (i, s) in self.res.iter().enumerate() {
            let mut d2 = F::zero();
            for (k, &r) in s.iter().enumerate() {
                d2 = d2 + best_d2[k * m + r as usize];
            }
            let better = match best {
                None => true,
                Some((j, bd)) => {
                    d2 < bd
                        || (d2 == bd && {
                            let a = s
                                .iter()
                                .enumerate()
                                .map(|(k, &r)| best_value[k * m + r as usize]);
                            let b = self
                                .res
                                .get(j)
                                .iter()
                                .enumerate()
                                .map(|(k, &r)| best_value[k * m + r as usize]);
                            a.lt(b)
                        })
                }
            };
            if better {
                best = Some((i, d2));
            }
        }
        let (i, d2) = best.expect("residue sets are nonempty");
        let point = self
            .res
            .get(i)
            .iter()
            .enumerate()
            .map(|(k, &r)| best_value[k * m + r as usize])
            .collect();
        Ok((Point(point), d2))
    }
}

/// Closest member of the constellation to `w`.
pub fn nearest<F: QuantScalar>(chain: &CodeChain, w: &[F]) -> Result<Point> {
    Ok(Quantizer::new(chain)?.nearest(w)?.0)
}

/// Volume per point, `2^{Ln} / ∏|C_i|`, as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Covolume {
    pub numerator: u128,
    pub denominator: u128,
}

impl Covolume {
    pub fn of(chain: &CodeChain) -> Result<Self> {
        let bits = chain.levels() * chain.n();
        if bits > 127 {
            return Err(Error::GuardExceeded {
                what: "period volume bits",
                limit: 127,
                actual: bits as u64,
            });
        }
        let num = 1u128 << bits;
        let den = chain.residue_count();
        let g = num.gcd(&den);
        Ok(Self {
            numerator: num / g,
            denominator: den / g,
        })
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsmEstimate<F> {
    pub value: F,
    pub stderr: F,
    pub samples: u64,
    pub seed: u64,
    pub covolume: Covolume,
    pub block_size: u64,
}

fn pairwise_sum<F: QuantScalar>(v: &[F]) -> F {
    match v.len() {
        0 => F::zero(),
        1 => v[0],
        len => {
            let (a, b) = v.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Monte Carlo normalized second moment with uniform samples over one period.
///
/// Sample `i` lives in block `i / BLOCK_SIZE`; each block draws from its own
/// ChaCha stream keyed by `(seed, block)`, so the estimate is bit-identical for
/// any thread count.
pub fn nsm_estimate<F: QuantScalar>(
    chain: &CodeChain,
    samples: u64,
    seed: u64,
) -> Result<NsmEstimate<F>> {
    if samples < MIN_SAMPLES {
        return Err(Error::GuardExceeded {
            what: "too few samples (minimum)",
            limit: MIN_SAMPLES,
            actual: samples,
        });
    }
    let q = Quantizer::new(chain)?;
    let covolume = Covolume::of(chain)?;
    let n = chain.n();
    let m = chain.modulus() as f64;
    let nf = F::from_usize(n).unwrap();
    let blocks = samples.div_ceil(BLOCK_SIZE);
    let partial: Vec<(F, F)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK_SIZE.min(samples - b * BLOCK_SIZE);
            let mut w = vec![F::zero(); n];
            let mut terms = Vec::with_capacity(count as usize);
            let mut squares = Vec::with_capacity(count as usize);
            for _ in 0..count {
                for x in w.iter_mut() {
                    *x = F::from_f64(rng.gen::<f64>() * m).unwrap();
                }
                let (_, d2) = q.nearest(&w).expect("sample has chain length");
                let e = d2 / nf;
                terms.push(e);
                squares.push(e * e);
            }
            (pairwise_sum(&terms), pairwise_sum(&squares))
        })
        .collect();
    let sums: Vec<F> = partial.iter().map(|p| p.0).collect();
    let sq: Vec<F> = partial.iter().map(|p| p.1).collect();
    let total = F::from_u64(samples).unwrap();
    let mean = pairwise_sum(&sums) / total;
    let var = (pairwise_sum(&sq) - total * mean * mean) / (total - F::one());
    let scale = F::from_f64(covolume.to_f64().powf(2.0 / n as f64)).unwrap();
    Ok(NsmEstimate {
        value: mean / scale,
        stderr: (var.max(F::zero()) / total).sqrt() / scale,
        samples,
        seed,
        covolume,
        block_size: BLOCK_SIZE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::points_in_box;
    use crate::presets;
    use proptest::prelude::*;

    #[test]
    fn dplus_examples() {
        let d3 = dplus_chain(3).unwrap();
        let words = |l: usize| -> Vec<String> {
            d3.code(l).words().iter().map(ToString::to_string).collect()
        };
        assert_eq!(words(1), ["000", "111"]);
        assert_eq!(words(2), ["000", "011", "101", "110"]);
        let d8 = dplus_chain(8).unwrap();
        assert_eq!((d8.code(1).size(), d8.code(2).size()), (2, 128));
        assert!(dplus_chain(1).is_err());
    }

    #[test]
    fn nearest_examples() {
        let z = CodeChain::new(vec![BinaryCode::full(1).unwrap()]).unwrap();
        assert_eq!(nearest(&z, &[0.6f64]).unwrap(), Point(vec![1]));
        assert_eq!(nearest(&z, &[-0.6f32]).unwrap(), Point(vec![-1]));
        // exact half rounds to the smaller point
        assert_eq!(nearest(&z, &[2.5f64]).unwrap(), Point(vec![2]));

        let ex5 = presets::example5();
        assert_eq!(
            nearest(&ex5, &[5.0f64, 3.0, 6.0]).unwrap(),
            Point(vec![5, 3, 6])
        );
        assert_eq!(
            nearest(&presets::example1(), &[2.0f64, 2.0]).unwrap(),
            Point(vec![1, 1])
        );
        assert!(nearest(&ex5, &[1.0f64]).is_err());
    }

    #[test]
    fn nearest_breaks_cross_residue_ties_lexicographically() {
        // (0,0) and (1,1) are both at squared distance 0.5 from (0.5, 0.5)
        let p = nearest(&presets::example1(), &[0.5f64, 0.5]).unwrap();
        assert_eq!(p, Point(vec![0, 0]));
        let p = nearest(&presets::example3(), &[5.5f64]).unwrap();
        // 3 and 8 are both 2.5 away
        assert_eq!(p, Point(vec![3]));
    }

    #[test]
    fn covolume_examples() {
        let c = Covolume::of(&presets::dplus(7).unwrap()).unwrap();
        assert_eq!((c.numerator, c.denominator), (128, 1));
        let c = Covolume::of(&presets::example3()).unwrap();
        assert_eq!((c.numerator, c.denominator), (2, 1));
        let c = Covolume::of(&presets::example5()).unwrap();
        assert_eq!((c.numerator, c.denominator), (8, 1));
    }

    #[test]
    fn nsm_guard_and_determinism() {
        let chain = presets::dplus(3).unwrap();
        assert!(nsm_estimate::<f64>(&chain, 999, 1).is_err());
        let a = nsm_estimate::<f64>(&chain, 10_000, 42).unwrap();
        let b = nsm_estimate::<f64>(&chain, 10_000, 42).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        let c = nsm_estimate::<f64>(&chain, 10_000, 43).unwrap();
        assert_ne!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn nsm_of_cubic_lattice_is_one_twelfth() {
        for n in 1..=3 {
            let chain = CodeChain::new(vec![BinaryCode::zero(n).unwrap(); 2]).unwrap();
            let e = nsm_estimate::<f64>(&chain, 50_000, 7).unwrap();
            assert!((e.value - 1.0 / 12.0).abs() < 3.0 * e.stderr, "{e:?}");
            let e32 = nsm_estimate::<f32>(&chain, 50_000, 7).unwrap();
            assert!((f64::from(e32.value) - 1.0 / 12.0).abs() < 3.0 * f64::from(e32.stderr) + 1e-4);
        }
    }

    #[test]
    fn nsm_is_invariant_under_coordinate_permutation() {
        let chain = presets::example5();
        let perm = chain.permuted(&[2, 0, 1]).unwrap();
        let a = nsm_estimate::<f64>(&chain, 40_000, 11).unwrap();
        let b = nsm_estimate::<f64>(&perm, 40_000, 12).unwrap();
        let tol = 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.value - b.value).abs() < tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn nsm_respects_sphere_bound() {
        let bound = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E);
        for chain in [
            presets::dplus(4).unwrap(),
            presets::example5(),
            presets::example1(),
        ] {
            let e = nsm_estimate::<f64>(&chain, 20_000, 3).unwrap();
            assert!(e.value > bound, "{e:?}");
        }
        for n in 4..=6 {
            let e = nsm_estimate::<f64>(&presets::dplus(n).unwrap(), 20_000, 5).unwrap();
            assert!(e.value <= 1.0 / 12.0 + 3.0 * e.stderr, "n={n} {e:?}");
        }
    }

    proptest! {
        #[test]
        fn nearest_matches_box_search(w in prop::collection::vec(-9.0f64..9.0, 3)) {
            let chain = presets::example5();
            let got = nearest(&chain, &w).unwrap();
            let lo: Vec<i64> = w.iter().map(|x| x.floor() as i64 - 9).collect();
            let hi: Vec<i64> = w.iter().map(|x| x.ceil() as i64 + 9).collect();
            let d2 = |p: &Point| p.iter().zip(&w).map(|(&a, &b)| (a as f64 - b).powi(2)).sum::<f64>();
            let best = points_in_box(&chain, &lo, &hi)
                .unwrap()
                .into_iter()
                .min_by(|a, b| d2(a).partial_cmp(&d2(b)).unwrap().then_with(|| a.cmp(b)))
                .unwrap();
            prop_assert!(chain.contains(&got).unwrap());
            prop_assert!(d2(&got) <= d2(&best) + 1e-9);
        }
    }
}
