//! Geometric uniformity: reflection certificates for two-level chains, a
//! signed-permutation isometry search, and coordinate-wise partner
//! construction with brute-force oracles.

use rayon::prelude::*;
use serde::Serialize;

use crate::constellation::{decompose, residues, CodeChain, Point};
use crate::error::{Error, Result};
use crate::spectrum::{check_ball_guard, cw_candidates, eds_check, EdsWitness};

/// Largest dimension the signed-permutation search accepts.
pub const MAX_SEARCH_DIM: usize = 6;

/// A diagonal ±1 map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReflectionMap {
    pub signs: Vec<i8>,
}

impl ReflectionMap {
    pub fn identity(n: usize) -> Self {
        Self { signs: vec![1; n] }
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        v.iter()
            .zip(&self.signs)
            .map(|(&x, &s)| i64::from(s) * x)
            .collect()
    }
}

fn require_member(chain: &CodeChain, p: &[i64]) -> Result<()> {
    if !chain.contains(p)? {
        return Err(Error::NotMember(Point::from(p)));
    }
    Ok(())
}

/// Reflects the coordinates where the level-1 digit of `x` is one.
pub fn reflection_for(chain: &CodeChain, x: &[i64]) -> Result<ReflectionMap> {
    chain.require_levels(2)?;
    require_member(chain, x)?;
    Ok(ReflectionMap {
        signs: x
            .iter()
            .map(|v| if v.rem_euclid(2) == 1 { -1 } else { 1 })
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GuCertificate {
    pub x: Point,
    pub signs: Vec<i8>,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoLevelGu {
    pub holds: bool,
    pub certificates: Vec<GuCertificate>,
}

/// For every residue `x`, checks `T_x(Γ - x) = Γ` modulo 4 with `T_x` from
/// [`reflection_for`]. `T_x` preserves `4Zⁿ` and permutes residues, so
/// image-inside-the-residue-set is enough.
pub fn gu_check_two_level(chain: &CodeChain) -> Result<TwoLevelGu> {
    chain.require_levels(2)?;
    chain.require_linear()?;
    let res = residues(chain)?;
    let certificates: Vec<GuCertificate> = (0..res.len())
        .into_par_iter()
        .map(|i| {
            let x = res.get(i);
            let t = reflection_for(chain, x).expect("residues are members");
            let mut img = vec![0i64; x.len()];
            let valid = res.iter().all(|s| {
                for (k, v) in img.iter_mut().enumerate() {
                    *v = (i64::from(t.signs[k]) * (s[k] - x[k])).rem_euclid(4);
                }
                chain.contains_residue(&img)
            });
            GuCertificate {
                x: Point::from(x),
                signs: t.signs,
                valid,
            }
        })
        .collect();
    Ok(TwoLevelGu {
        holds: certificates.iter().all(|c| c.valid),
        certificates,
    })
}

/// `p ↦ signs ⊙ p[permutation] + translation`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsometryCandidate {
    pub permutation: Vec<usize>,
    pub signs: Vec<i8>,
    pub translation: Point,
}

impl IsometryCandidate {
    pub fn apply(&self, p: &[i64]) -> Point {
        Point(
            self.permutation
                .iter()
                .zip(&self.signs)
                .zip(self.translation.iter())
                .map(|((&j, &s), &t)| i64::from(s) * p[j] + t)
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GuVerdict {
    Certified,
    RefutedByEds,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GuSearchOutcome {
    pub verdict: GuVerdict,
    pub eds_witness: Option<EdsWitness>,
    /// One isometry per residue carrying it to the origin (when certified).
    pub isometries: Vec<IsometryCandidate>,
    /// First residue with no signed-permutation isometry (when inconclusive).
    pub unmatched: Option<Point>,
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Refutes geometric uniformity through the spectrum, or certifies it with a
/// signed permutation plus translation for each residue.
///
/// Only the hyperoctahedral subgroup is searched, so a failed search is
/// `Inconclusive`, never a refutation.
pub fn gu_subgroup_search(chain: &CodeChain, r2max: u64) -> Result<GuSearchOutcome> {
    let eds = eds_check(chain, r2max)?;
    if let Some(w) = eds.witness {
        return Ok(GuSearchOutcome {
            verdict: GuVerdict::RefutedByEds,
            eds_witness: Some(w),
            isometries: Vec::new(),
            unmatched: None,
        });
    }
    let n = chain.n();
    if n > MAX_SEARCH_DIM {
        return Err(Error::GuardExceeded {
            what: "isometry search dimension",
            limit: MAX_SEARCH_DIM as u64,
            actual: n as u64,
        });
    }
    let res = residues(chain)?;
    let m = chain.modulus();
    let found: Vec<Option<IsometryCandidate>> = (0..res.len())
        .into_par_iter()
        .map(|i| {
            let x = res.get(i);
            let mut perm: Vec<usize> = (0..n).collect();
            let mut img = vec![0i64; n];
            loop {
                for mask in 0u32..(1 << n) {
                    let sign = |k: usize| if mask >> k & 1 == 1 { -1i64 } else { 1 };
                    let ok = res.iter().all(|s| {
                        for (k, v) in img.iter_mut().enumerate() {
                            *v = (sign(k) * (s[perm[k]] - x[perm[k]])).rem_euclid(m);
                        }
                        chain.contains_residue(&img)
                    });
                    if ok {
                        let signs: Vec<i8> = (0..n).map(|k| sign(k) as i8).collect();
                        let translation = Point((0..n).map(|k| -sign(k) * x[perm[k]]).collect());
                        return Some(IsometryCandidate {
                            permutation: perm.clone(),
                            signs,
                            translation,
                        });
                    }
                }
                if !next_permutation(&mut perm) {
                    return None;
                }
            }
        })
        .collect();
    let unmatched = found
        .iter()
        .position(Option::is_none)
        .map(|i| Point::from(res.get(i)));
    Ok(match unmatched {
        Some(p) => GuSearchOutcome {
            verdict: GuVerdict::Inconclusive,
            eds_witness: None,
            isometries: Vec::new(),
            unmatched: Some(p),
        },
        None => GuSearchOutcome {
            verdict: GuVerdict::Certified,
            eds_witness: None,
            isometries: found.into_iter().flatten().collect(),
            unmatched: None,
        },
    })
}

/// Which branch of the carry-correction table fixed a coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaCase {
    /// One of the two errors vanishes.
    ZeroError,
    /// Both errors nonzero, sign products agree.
    SameSignProduct,
    /// Sign products differ and the primed errors are equal.
    EqualPrimed,
    /// Sign products differ and the primed errors differ.
    UnequalPrimed,
}

/// Intermediate quantities of the two-level partner construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartnerTrace {
    pub e1: Vec<i64>,
    pub e2: Vec<i64>,
    pub e1p: Vec<i64>,
    pub e2p: Vec<i64>,
    pub delta: Vec<i64>,
    pub cases: Vec<DeltaCase>,
    /// +1 where `y' - x'` matches `y - x` in sign, -1 where it is mirrored.
    pub orientation: Vec<i64>,
    pub zbar: Vec<i64>,
    pub yprime: Point,
}

/// Builds `y'` with `y' - x'` coordinate-wise equi-distant to `y - x` in a
/// two-level constellation of linear codes.
///
/// Level digits of `y'` are `c̃ - c + c' mod 2` at both levels; the integer
/// part is `z̄ = z' + o(z̃ - z) + Δ` where `Δ` comes from the four-case table
/// and the orientation `o = ±1` is the sign relating the primed errors to the
/// unprimed ones.
pub fn partner_lemma1(
    chain: &CodeChain,
    x: &[i64],
    y: &[i64],
    xp: &[i64],
) -> Result<(Point, PartnerTrace)> {
    chain.require_levels(2)?;
    chain.require_linear()?;
    let dx = decompose(chain, x)?;
    let dy = decompose(chain, y)?;
    let dxp = decompose(chain, xp)?;
    let n = chain.n();
    let mut t = PartnerTrace {
        e1: Vec::with_capacity(n),
        e2: Vec::with_capacity(n),
        e1p: Vec::with_capacity(n),
        e2p: Vec::with_capacity(n),
        delta: Vec::with_capacity(n),
        cases: Vec::with_capacity(n),
        orientation: Vec::with_capacity(n),
        zbar: Vec::with_capacity(n),
        yprime: Point(Vec::with_capacity(n)),
    };
    for i in 0..n {
        let bit = |d: &crate::constellation::Decomposition, level: usize| {
            i64::from(d.digits[level].get(i))
        };
        let (c1, c2) = (bit(&dx, 0), bit(&dx, 1));
        let (ct1, ct2) = (bit(&dy, 0), bit(&dy, 1));
        let (cp1, cp2) = (bit(&dxp, 0), bit(&dxp, 1));
        let cpp1 = (ct1 - c1 + cp1).rem_euclid(2);
        let cpp2 = (ct2 - c2 + cp2).rem_euclid(2);
        let (e1, e2) = (ct1 - c1, ct2 - c2);
        let (e1p, e2p) = (cpp1 - cp1, cpp2 - cp2);

        let (case, delta) = if e1 == 0 || e2 == 0 {
            (DeltaCase::ZeroError, 0)
        } else if e1.signum() * e2.signum() == e1p.signum() * e2p.signum() {
            (DeltaCase::SameSignProduct, 0)
        } else if e1p == e2p {
            (DeltaCase::EqualPrimed, -e1p)
        } else {
            (DeltaCase::UnequalPrimed, e1p)
        };
        // |e1p| = |e1| and |e2p| = |e2|; the lowest nonzero level fixes the orientation
        let orientation = if e1 != 0 {
            e1p * e1
        } else if e2 != 0 {
            e2p * e2
        } else {
            1
        };
        let zbar = dxp.z[i] + orientation * (dy.z[i] - dx.z[i]) + delta;
        t.e1.push(e1);
        t.e2.push(e2);
        t.e1p.push(e1p);
        t.e2p.push(e2p);
        t.delta.push(delta);
        t.cases.push(case);
        t.orientation.push(orientation);
        t.zbar.push(zbar);
        t.yprime.0.push(cpp1 + 2 * cpp2 + 4 * zbar);
    }
    let ok = (0..n).all(|i| (t.yprime[i] - xp[i]).abs() == (y[i] - x[i]).abs())
        && chain.contains_unchecked(&t.yprime);
    if !ok {
        return Err(Error::Inconsistent(format!(
            "partner {} for x={}, y={}, x'={} violates coordinate-wise equi-distance",
            t.yprime,
            Point::from(x),
            Point::from(y),
            Point::from(xp)
        )));
    }
    Ok((t.yprime.clone(), t))
}

fn require_members(chain: &CodeChain, pts: &[&[i64]]) -> Result<()> {
    pts.iter().try_for_each(|p| require_member(chain, p))
}

/// Sign-pattern candidates for a coordinate-wise partner of `(x, y, x')`.
pub fn cw_partner_candidates(x: &[i64], y: &[i64], xp: &[i64]) -> Vec<Point> {
    let e: Vec<i64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    cw_candidates(xp, &e)
}

/// Lexicographically first member `y'` with `y' - x'` coordinate-wise
/// equi-distant to `y - x`, by testing every sign pattern.
pub fn partner_bruteforce(
    chain: &CodeChain,
    x: &[i64],
    y: &[i64],
    xp: &[i64],
) -> Result<Option<Point>> {
    require_members(chain, &[x, y, xp])?;
    Ok(cw_partner_candidates(x, y, xp)
        .into_iter()
        .find(|p| chain.contains_unchecked(p)))
}

/// All offsets `v` with `‖v‖² = d2`, lexicographically.
fn shell(n: usize, d2: i64) -> Vec<Vec<i64>> {
    fn rec(n: usize, rest: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == n - 1 {
            let r = (rest as f64).sqrt().round() as i64;
            if r * r == rest {
                for v in if r == 0 { vec![0] } else { vec![-r, r] } {
                    prefix.push(v);
                    out.push(prefix.clone());
                    prefix.pop();
                }
            }
            return;
        }
        let r = (rest as f64).sqrt() as i64;
        for v in -r..=r {
            prefix.push(v);
            rec(n, rest - v * v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d2, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Every member `y'` with `‖y' - x'‖² = ‖y - x‖²`, lexicographically.
pub fn euclidean_partners(
    chain: &CodeChain,
    x: &[i64],
    y: &[i64],
    xp: &[i64],
) -> Result<Vec<Point>> {
    require_members(chain, &[x, y, xp])?;
    let d2: i64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
    if d2 > 0 {
        check_ball_guard(chain.n(), d2 as u64)?;
    }
    Ok(shell(chain.n(), d2)
        .into_iter()
        .map(|v| Point(v.iter().zip(xp).map(|(a, b)| a + b).collect()))
        .filter(|p| chain.contains_unchecked(p))
        .collect())
}

/// Lexicographically first member on the sphere of radius `‖y - x‖` around `x'`.
pub fn euclidean_partner_bruteforce(
    chain: &CodeChain,
    x: &[i64],
    y: &[i64],
    xp: &[i64],
) -> Result<Option<Point>> {
    Ok(euclidean_partners(chain, x, y, xp)?.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::BinaryCode;
    use crate::presets;
    use crate::spectrum::cw_equidistant;
    use proptest::prelude::*;

    fn p(v: &[i64]) -> Point {
        Point::from(v)
    }

    #[test]
    fn reflection_examples() {
        let ex1 = presets::example1();
        assert_eq!(reflection_for(&ex1, &[1, 1]).unwrap().signs, vec![-1, -1]);
        assert_eq!(
            reflection_for(&ex1, &[4, -8]).unwrap(),
            ReflectionMap::identity(2)
        );
        let chain = CodeChain::new(vec![
            BinaryCode::full(3).unwrap(),
            BinaryCode::zero(3).unwrap(),
        ])
        .unwrap();
        assert_eq!(
            reflection_for(&chain, &[1, 0, 1]).unwrap().signs,
            vec![-1, 1, -1]
        );
        assert!(matches!(
            reflection_for(&presets::example3(), &[0]),
            Err(Error::LevelCount { .. })
        ));
        assert!(reflection_for(&ex1, &[1, 0]).is_err());
    }

    #[test]
    fn reflections_are_isometric_involutions() {
        let t = ReflectionMap {
            signs: vec![-1, 1, -1, -1],
        };
        for v in [[3i64, -4, 0, 7], [1, 1, 1, 1], [-9, 2, 5, 0]] {
            let once = t.apply(&v);
            assert_eq!(p(&once).norm2(), p(&v).norm2());
            assert_eq!(t.apply(&once), v.to_vec());
        }
    }

    #[test]
    fn two_level_certificates() {
        let r = gu_check_two_level(&presets::example1()).unwrap();
        assert!(r.holds);
        let cert = r.certificates.iter().find(|c| c.x == p(&[1, 1])).unwrap();
        assert_eq!(cert.signs, vec![-1, -1]);

        let zero = CodeChain::new(vec![BinaryCode::zero(3).unwrap(); 2]).unwrap();
        let r = gu_check_two_level(&zero).unwrap();
        assert!(r.holds && r.certificates.len() == 1);

        assert!(
            gu_check_two_level(&presets::dplus(5).unwrap())
                .unwrap()
                .holds
        );
        assert!(gu_check_two_level(&presets::example5()).is_err());
    }

    #[test]
    fn two_level_certificate_detects_failure_for_nonlinear_level_one() {
        // nonlinear codes are rejected before any certificate is built
        let c1 = BinaryCode::from_words(
            2,
            [
                crate::f2::BitWord::new(2, 0b01).unwrap(),
                crate::f2::BitWord::new(2, 0b10).unwrap(),
            ],
        )
        .unwrap();
        let chain = CodeChain::new(vec![c1, BinaryCode::zero(2).unwrap()]).unwrap();
        assert!(matches!(
            gu_check_two_level(&chain),
            Err(Error::NotLinear { level: 1 })
        ));
    }

    #[test]
    fn subgroup_search_examples() {
        let r = gu_subgroup_search(&presets::example3(), 64).unwrap();
        assert_eq!(r.verdict, GuVerdict::RefutedByEds);
        let w = r.eds_witness.unwrap();
        assert_eq!((w.count_c, w.count_c_prime), (1, 2));

        let chain = presets::example1();
        let r = gu_subgroup_search(&chain, 64).unwrap();
        assert_eq!(r.verdict, GuVerdict::Certified);
        let res = residues(&chain).unwrap();
        for (x, iso) in res.iter().zip(&r.isometries) {
            assert_eq!(iso.apply(x), Point::zero(2));
            for s in res.iter() {
                assert!(chain.contains(&iso.apply(s)).unwrap());
            }
        }

        let r = gu_subgroup_search(&presets::example5(), 64).unwrap();
        assert_ne!(r.verdict, GuVerdict::Certified);
    }

    #[test]
    fn lemma1_examples() {
        let full1 = BinaryCode::full(1).unwrap();
        let z = CodeChain::new(vec![full1.clone(), full1]).unwrap();
        let (yp, t) = partner_lemma1(&z, &[0], &[3], &[1]).unwrap();
        assert_eq!(yp, p(&[-2]));
        assert_eq!(t.cases, vec![DeltaCase::UnequalPrimed]);
        assert_eq!(t.delta, vec![-1]);

        let chain = presets::dplus(4).unwrap();
        let (yp, t) = partner_lemma1(&chain, &[1, 1, 1, 1], &[1, 1, 1, 1], &[2, 0, 0, -2]).unwrap();
        assert_eq!(yp, p(&[2, 0, 0, -2]));
        assert!(t.cases.iter().all(|&c| c == DeltaCase::ZeroError));

        let x = [1, 1, 1, 1];
        let y = [2, 4, 6, -4];
        let (yp, _) = partner_lemma1(&chain, &x, &y, &x).unwrap();
        let a: Vec<i64> = yp.iter().zip(&x).map(|(a, b)| a - b).collect();
        let b: Vec<i64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        assert!(cw_equidistant(&a, &b).unwrap());

        assert!(partner_lemma1(&presets::example3(), &[0], &[3], &[9]).is_err());
        assert!(matches!(
            partner_lemma1(&chain, &[1, 0, 0, 0], &x, &x),
            Err(Error::NotMember(_))
        ));
    }

    #[test]
    fn bruteforce_partner_examples() {
        let ex3 = presets::example3();
        assert_eq!(
            cw_partner_candidates(&[0], &[3], &[9]),
            vec![p(&[6]), p(&[12])]
        );
        assert_eq!(partner_bruteforce(&ex3, &[0], &[3], &[9]).unwrap(), None);

        let ex5 = presets::example5();
        let (x, y, xp) = ([1, 0, 1], [5, 3, 6], [3, 5, 6]);
        assert_eq!(partner_bruteforce(&ex5, &x, &y, &xp).unwrap(), None);

        let sols = euclidean_partners(&ex5, &x, &y, &xp).unwrap();
        assert!(sols.contains(&p(&[8, 9, 9])));
        for s in &sols {
            assert_eq!(s.sub(&p(&xp)).norm2(), 50);
        }
        assert_eq!(
            euclidean_partner_bruteforce(&ex5, &x, &y, &xp).unwrap(),
            sols.first().cloned()
        );

        assert_eq!(
            euclidean_partner_bruteforce(&ex5, &x, &x, &xp).unwrap(),
            Some(p(&xp))
        );
        assert_eq!(
            euclidean_partner_bruteforce(&ex3, &[0], &[3], &[9]).unwrap(),
            None
        );
        assert!(partner_bruteforce(&ex3, &[0], &[6], &[9]).is_err());
    }

    #[test]
    fn shell_enumeration_counts() {
        let mut brute = 0;
        for a in -8i64..=8 {
            for b in -8i64..=8 {
                for c in -8i64..=8 {
                    if a * a + b * b + c * c == 50 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(shell(3, 50).len(), brute);
        assert_eq!(shell(2, 25).len(), 12);
        assert_eq!(shell(4, 0), vec![vec![0; 4]]);
        let s = shell(3, 9);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn lemma1_partner_always_exists(
            n in 1usize..=4,
            seed in any::<u64>(),
            zs in prop::collection::vec(-3i64..3, 12),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let full = (1u32 << n) - 1;
            let gens = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<crate::f2::BitWord> {
                (0..rng.gen_range(0..=n)).map(|_| crate::f2::BitWord::new(n, rng.gen_range(0..=full)).unwrap()).collect()
            };
            let c1 = BinaryCode::span(n, &gens(&mut rng)).unwrap();
            let c2 = BinaryCode::span(n, &gens(&mut rng)).unwrap();
            let chain = CodeChain::new(vec![c1, c2]).unwrap();
            let res = residues(&chain).unwrap();
            let mut pick = |off: usize| -> Vec<i64> {
                let r = res.get(rng.gen_range(0..res.len()));
                r.iter().enumerate().map(|(k, &v)| v + 4 * zs[(off + k) % zs.len()]).collect()
            };
            let (x, y, xp) = (pick(0), pick(4), pick(8));
            let (yp, _) = partner_lemma1(&chain, &x, &y, &xp).unwrap();
            prop_assert!(chain.contains(&yp).unwrap());
            prop_assert!(partner_bruteforce(&chain, &x, &y, &xp).unwrap().is_some());
        }
    }
}
