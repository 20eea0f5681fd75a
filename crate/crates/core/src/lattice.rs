//! Integer lattices in row Hermite Normal Form, the lattice closure of a
//! constellation, Construction D, and the four-way lattice-ness report.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use serde::Serialize;

use crate::constellation::{residues, CodeChain, Point};
use crate::error::{Error, Result};
use crate::f2::{schur_closed_chain, BitWord, Echelon, SchurWitness};

/// Integer types usable as HNF entries.
pub trait LatticeScalar:
    Integer + Signed + Clone + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display
{
}

impl<T> LatticeScalar for T where
    T: Integer + Signed + Clone + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display
{
}

/// A full-rank sublattice of Zⁿ held as its row Hermite Normal Form:
/// upper triangular, positive diagonal, entries above each pivot in `[0, pivot)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerLattice<T> {
    n: usize,
    basis: Vec<Vec<T>>,
    determinant: T,
}

impl<T: LatticeScalar> IntegerLattice<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    pub fn determinant(&self) -> &T {
        &self.determinant
    }

    /// Membership by back-substitution against the triangular basis.
    pub fn contains(&self, v: &[T]) -> bool {
        if v.len() != self.n {
            return false;
        }
        let mut rest = v.to_vec();
        for j in 0..self.n {
            let pivot = &self.basis[j][j];
            let (q, r) = rest[j].div_rem(pivot);
            if !r.is_zero() {
                return false;
            }
            if q.is_zero() {
                continue;
            }
            for (r, b) in rest[j..].iter_mut().zip(&self.basis[j][j..]) {
                *r = r.clone() - q.clone() * b.clone();
            }
        }
        true
    }
}

/// Builds the HNF of the integer span of `generators`.
pub fn hnf<T: LatticeScalar>(n: usize, generators: &[Vec<T>]) -> Result<IntegerLattice<T>> {
    let mut rows: Vec<Option<Vec<T>>> = vec![None; n];
    for g in generators {
        if g.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: g.len(),
            });
        }
        insert_row(&mut rows, g.clone());
    }
    let rank = rows.iter().filter(|r| r.is_some()).count();
    if rank < n {
        return Err(Error::RankDeficient { rank, n });
    }
    let mut basis: Vec<Vec<T>> = rows.into_iter().map(Option::unwrap).collect();
    // reduce entries above each pivot into [0, pivot)
    for j in 0..n {
        for i in 0..j {
            let q = basis[i][j].div_floor(&basis[j][j]);
            if !q.is_zero() {
                let (upper, lower) = basis.split_at_mut(j);
                for (a, b) in upper[i][j..].iter_mut().zip(&lower[0][j..]) {
                    *a = a.clone() - q.clone() * b.clone();
                }
            }
        }
    }
    let determinant = (0..n).fold(T::one(), |acc, j| acc * basis[j][j].clone());
    Ok(IntegerLattice {
        n,
        basis,
        determinant,
    })
}

/// Folds one vector into a partial triangular basis (rows indexed by pivot column).
fn insert_row<T: LatticeScalar>(rows: &mut [Option<Vec<T>>], mut v: Vec<T>) {
    let n = rows.len();
    for j in 0..n {
        if v[j].is_zero() {
            continue;
        }
        match rows[j].take() {
            None => {
                if v[j].is_negative() {
                    v.iter_mut().for_each(|x| *x = -x.clone());
                }
                reduce_tail(rows, &mut v, j);
                rows[j] = Some(v);
                return;
            }
            Some(row) => {
                // [row; v] -> [g-row; v with v_j = 0] by a unimodular 2x2 transform
                let e = row[j].extended_gcd(&v[j]);
                let (a, b) = (row[j].clone() / e.gcd.clone(), v[j].clone() / e.gcd.clone());
                let mut new_row: Vec<T> = row
                    .iter()
                    .zip(&v)
                    .map(|(r, x)| e.x.clone() * r.clone() + e.y.clone() * x.clone())
                    .collect();
                let new_v: Vec<T> = row
                    .iter()
                    .zip(&v)
                    .map(|(r, x)| b.clone() * r.clone() - a.clone() * x.clone())
                    .collect();
                if new_row[j].is_negative() {
                    new_row.iter_mut().for_each(|x| *x = -x.clone());
                }
                reduce_tail(rows, &mut new_row, j);
                rows[j] = Some(new_row);
                v = new_v;
                reduce_tail(rows, &mut v, j);
            }
        }
    }
}

/// Size-reduces entries of `v` right of column `from` against existing pivot rows.
fn reduce_tail<T: LatticeScalar>(rows: &[Option<Vec<T>>], v: &mut [T], from: usize) {
    for k in from + 1..v.len() {
        if let Some(row) = &rows[k] {
            let q = v[k].div_floor(&row[k]);
            if !q.is_zero() {
                for c in k..v.len() {
                    v[c] = v[c].clone() - q.clone() * row[c].clone();
                }
            }
        }
    }
}

fn to_scalar<T: LatticeScalar>(x: i64) -> T {
    T::from_i64(x).expect("i64 fits every lattice scalar")
}

/// The generators `2^L e_j` every constellation lattice contains.
fn period_generators<T: LatticeScalar>(n: usize, m: i64) -> Vec<Vec<T>> {
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| if j == k { to_scalar(m) } else { T::zero() })
                .collect()
        })
        .collect()
}

/// The smallest lattice containing the constellation.
pub fn smallest_lattice<T: LatticeScalar>(chain: &CodeChain) -> Result<IntegerLattice<T>> {
    let res = residues(chain)?;
    let n = chain.n();
    let mut gens = period_generators(n, chain.modulus());
    gens.extend(
        res.iter()
            .map(|s| s.iter().map(|&x| to_scalar(x)).collect()),
    );
    hnf(n, &gens)
}

/// Basis rows `b_1..b_n` of F₂ⁿ whose first `dims[i]` rows span level `i+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NestedBasis {
    pub rows: Vec<BitWord>,
    pub dims: Vec<usize>,
}

/// Greedy nested basis: each level's words are scanned in lexicographic order
/// and kept when independent of the rows so far; the standard unit vectors
/// then complete the basis of F₂ⁿ.
pub fn select_nested_basis(chain: &CodeChain) -> Result<NestedBasis> {
    chain.require_nested_linear()?;
    let n = chain.n();
    let mut ech = Echelon::default();
    let mut rows = Vec::with_capacity(n);
    let mut dims = Vec::with_capacity(chain.levels());
    for code in chain.codes() {
        for &w in code.words() {
            if ech.insert(w.packed()) {
                rows.push(w);
            }
        }
        dims.push(rows.len());
    }
    let mut units: Vec<BitWord> = (0..n)
        .map(|i| BitWord::new(n, 1 << i))
        .collect::<Result<_>>()?;
    units.sort_unstable();
    for u in units {
        if ech.insert(u.packed()) {
            rows.push(u);
        }
    }
    debug_assert_eq!(rows.len(), n);
    Ok(NestedBasis { rows, dims })
}

/// The Construction D lattice together with the residues of its
/// `α`-combinations modulo 2^L.
#[derive(Clone, Debug)]
pub struct ConstructionD<T> {
    pub lattice: IntegerLattice<T>,
    pub basis: NestedBasis,
    /// Sorted residues of `Σ_i 2^{i-1} Σ_{j ≤ k_i} α_j^i b_j` modulo 2^L.
    pub residues: Vec<Point>,
}

/// Construction D: the `α ∈ {0,1}` combinations of scaled nested basis rows plus `2^L Zⁿ`.
pub fn construction_d<T: LatticeScalar>(chain: &CodeChain) -> Result<ConstructionD<T>> {
    let basis = select_nested_basis(chain)?;
    let n = chain.n();
    let m = chain.modulus();
    // generator list: 2^{i-1} b_j for each level i and j ≤ k_i
    let scaled: Vec<Vec<i64>> = basis
        .dims
        .iter()
        .enumerate()
        .flat_map(|(level, &k)| {
            basis.rows[..k].iter().map(move |b| {
                b.iter()
                    .map(|bit| i64::from(bit) << level)
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    let total: usize = basis.dims.iter().sum();
    if total > 22 {
        return Err(Error::GuardExceeded {
            what: "Construction D combination count (log2)",
            limit: 22,
            actual: total as u64,
        });
    }
    let mut combos: Vec<Vec<i64>> = vec![vec![0; n]];
    for g in &scaled {
        let shifted: Vec<Vec<i64>> = combos
            .iter()
            .map(|c| c.iter().zip(g).map(|(a, b)| a + b).collect())
            .collect();
        combos.extend(shifted);
    }
    let residue_set: BTreeSet<Vec<i64>> = combos
        .iter()
        .map(|c| c.iter().map(|x| x.rem_euclid(m)).collect())
        .collect();
    if residue_set.len() != 1usize << total {
        return Err(Error::Inconsistent(format!(
            "Construction D produced {} residues, expected 2^{total}",
            residue_set.len()
        )));
    }
    let mut gens: Vec<Vec<T>> = period_generators(n, m);
    gens.extend(
        scaled
            .iter()
            .map(|g| g.iter().map(|&x| to_scalar(x)).collect()),
    );
    let lattice = hnf(n, &gens)?;
    // the α-combinations must exhaust the lattice modulo 2^L
    let period_volume: T = num_traits::pow(to_scalar::<T>(m), n);
    let expected_index = period_volume / lattice.determinant.clone();
    if expected_index != to_scalar::<T>(1i64 << total) {
        return Err(Error::Inconsistent(format!(
            "Construction D lattice has index {expected_index} per period, expected 2^{total}"
        )));
    }
    Ok(ConstructionD {
        lattice,
        basis,
        residues: residue_set.into_iter().map(Point).collect(),
    })
}

/// A pair of residues whose sum modulo 2^L leaves the residue set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureWitness {
    pub s: Point,
    pub t: Point,
    pub sum: Point,
}

/// Subgroup test on the residue set: closed under addition modulo 2^L.
pub fn is_lattice_direct(chain: &CodeChain) -> Result<(bool, Option<ClosureWitness>)> {
    let res = residues(chain)?;
    let m = chain.modulus();
    let zero = vec![0; chain.n()];
    if !res.contains(&zero) {
        // not even a group; report the first residue paired with itself
        let s = Point::from(res.get(0));
        let sum = Point(s.iter().map(|x| (2 * x).rem_euclid(m)).collect());
        return Ok((
            false,
            Some(ClosureWitness {
                t: s.clone(),
                s,
                sum,
            }),
        ));
    }
    let mut sum = vec![0i64; chain.n()];
    for s in res.iter() {
        for t in res.iter() {
            for (k, x) in sum.iter_mut().enumerate() {
                *x = (s[k] + t[k]).rem_euclid(m);
            }
            if !chain.contains_residue(&sum) {
                return Ok((
                    false,
                    Some(ClosureWitness {
                        s: Point::from(s),
                        t: Point::from(t),
                        sum: Point(sum),
                    }),
                ));
            }
        }
    }
    Ok((true, None))
}

/// The four lattice-ness statements for a nested linear chain, each computed
/// by its own route.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem1Report {
    /// Residue set closed under addition modulo 2^L.
    pub is_lattice: bool,
    /// Residue count equals the number of classes of the lattice closure per period.
    pub equals_lambda_c: bool,
    /// C_i * C_i ⊆ C_{i+1} for each level below the top.
    pub schur_closed: bool,
    /// Residue set equals the Construction D residues.
    pub equals_lambda_d: bool,
    pub closure_witness: Option<ClosureWitness>,
    pub schur_witness: Option<SchurWitness>,
    pub lambda_c_determinant: String,
    /// Absent when the chain is not nested and Construction D is undefined.
    pub lambda_d_determinant: Option<String>,
    pub residue_count: u64,
    pub nested: bool,
    pub dims: Option<Vec<usize>>,
}

impl Theorem1Report {
    pub fn verdicts(&self) -> [bool; 4] {
        [
            self.is_lattice,
            self.equals_lambda_c,
            self.schur_closed,
            self.equals_lambda_d,
        ]
    }

    pub fn consistent(&self) -> bool {
        let v = self.verdicts();
        v.iter().all(|&b| b == v[0])
    }
}

/// Evaluates the four equivalent lattice-ness statements independently.
///
/// A disagreement is returned as `Error::Inconsistent`.
pub fn theorem1_report<T: LatticeScalar>(chain: &CodeChain) -> Result<Theorem1Report> {
    let report = theorem1_unchecked::<T>(chain)?;
    if !report.consistent() {
        return Err(Error::Inconsistent(format!(
            "lattice-ness statements disagree: {:?}",
            report.verdicts()
        )));
    }
    Ok(report)
}

/// Same as [`theorem1_report`] but returns disagreeing verdicts instead of failing.
///
/// Linear chains that are not nested are accepted. Construction D is undefined
/// for them, so its statement is reported false.
pub fn theorem1_unchecked<T: LatticeScalar>(chain: &CodeChain) -> Result<Theorem1Report> {
    chain.require_linear()?;
    let nested = chain.is_nested();
    let res = residues(chain)?;
    let (is_lattice, closure_witness) = is_lattice_direct(chain)?;

    let lambda_c = smallest_lattice::<T>(chain)?;
    let period_volume: T = num_traits::pow(to_scalar::<T>(chain.modulus()), chain.n());
    let classes = period_volume / lambda_c.determinant.clone();
    let equals_lambda_c = classes == to_scalar::<T>(res.len() as i64);

    let (schur_closed, schur_witness) = schur_closed_chain(chain)?;

    let d = if nested {
        Some(construction_d::<T>(chain)?)
    } else {
        None
    };
    let equals_lambda_d = d.as_ref().is_some_and(|d| {
        d.residues.len() == res.len() && d.residues.iter().zip(res.iter()).all(|(a, b)| **a == *b)
    });

    Ok(Theorem1Report {
        is_lattice,
        equals_lambda_c,
        schur_closed,
        equals_lambda_d,
        closure_witness,
        schur_witness,
        lambda_c_determinant: lambda_c.determinant.to_string(),
        lambda_d_determinant: d.as_ref().map(|d| d.lattice.determinant.to_string()),
        residue_count: res.len() as u64,
        nested,
        dims: d.map(|d| d.basis.dims),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::BinaryCode;
    use crate::presets;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn lat(n: usize, gens: &[&[i64]]) -> IntegerLattice<i64> {
        let gens: Vec<Vec<i64>> = gens.iter().map(|g| g.to_vec()).collect();
        hnf(n, &gens).unwrap()
    }

    #[test]
    fn hnf_examples() {
        let l = lat(2, &[&[1, 1], &[4, 0], &[0, 4]]);
        assert_eq!(l.basis(), &[vec![1, 1], vec![0, 4]]);
        assert_eq!(*l.determinant(), 4);

        let l = lat(3, &[&[8, 0, 0], &[0, 8, 0], &[0, 0, 8]]);
        assert_eq!(*l.determinant(), 512);
        assert_eq!(l.basis()[1], vec![0, 8, 0]);

        let l = lat(2, &[&[1, 0], &[0, 1]]);
        assert_eq!(l.basis(), &[vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn hnf_rank_deficiency() {
        let gens = vec![vec![1i64, 1], vec![2, 2]];
        assert!(matches!(
            hnf(2, &gens),
            Err(Error::RankDeficient { rank: 1, n: 2 })
        ));
        assert!(hnf(2, &[vec![1i64, 2, 3]]).is_err());
    }

    #[test]
    fn hnf_negative_and_mixed_entries() {
        let l = lat(2, &[&[-3, 5], &[2, -7], &[6, 6]]);
        // determinant = |gcd of 2x2 minors| = gcd(11, 48, 54) = 1
        assert_eq!(*l.determinant(), 1);
        for row in l.basis() {
            assert!(l.contains(row));
        }
        assert!(l.contains(&[-3, 5]));
    }

    #[test]
    fn wide_and_big_scalars_agree() {
        let gens: Vec<Vec<i64>> = vec![vec![3, 1, 4], vec![1, 5, 9], vec![2, 6, 5], vec![0, 0, 7]];
        let a = hnf(3, &gens).unwrap();
        let wide: Vec<Vec<i128>> = gens
            .iter()
            .map(|g| g.iter().map(|&x| x as i128).collect())
            .collect();
        let big: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|g| g.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let b = hnf(3, &wide).unwrap();
        let c = hnf(3, &big).unwrap();
        assert_eq!(a.determinant().to_string(), b.determinant().to_string());
        assert_eq!(a.determinant().to_string(), c.determinant().to_string());
        assert_eq!(format!("{:?}", a.basis()), format!("{:?}", b.basis()));
    }

    #[test]
    fn smallest_lattice_examples() {
        let l = smallest_lattice::<i64>(&presets::example1()).unwrap();
        assert_eq!(*l.determinant(), 4);
        assert_eq!(l.basis(), &[vec![1, 1], vec![0, 4]]);

        let zero = CodeChain::new(vec![BinaryCode::zero(3).unwrap(); 2]).unwrap();
        let l = smallest_lattice::<i64>(&zero).unwrap();
        assert_eq!(*l.determinant(), 64);

        let d4 = presets::dplus(4).unwrap();
        let l = smallest_lattice::<i64>(&d4).unwrap();
        assert_eq!(256 / l.determinant(), d4.residue_count() as i64);
    }

    #[test]
    fn nested_basis_examples() {
        let b = select_nested_basis(&presets::dplus(4).unwrap()).unwrap();
        assert_eq!(b.dims, vec![1, 3]);
        assert_eq!(b.rows[0].to_string(), "1111");
        assert_eq!(b.rows.len(), 4);
        let d4 = presets::dplus(4).unwrap();
        for (level, &k) in b.dims.iter().enumerate() {
            let spanned = BinaryCode::span(4, &b.rows[..k]).unwrap();
            assert_eq!(&spanned, d4.code(level + 1));
        }
        assert_eq!(crate::f2::rank(&b.rows), 4);

        let b = select_nested_basis(&presets::example5()).unwrap();
        assert_eq!(b.dims, vec![2, 2, 2]);
        assert!(select_nested_basis(&presets::example3()).is_err());
    }

    #[test]
    fn construction_d_examples() {
        let d = construction_d::<i64>(&presets::dplus(4).unwrap()).unwrap();
        assert_eq!(*d.lattice.determinant(), 16);
        assert_eq!(d.residues.len(), 16);

        let code = BinaryCode::even_weight(5).unwrap();
        let a = CodeChain::new(vec![code]).unwrap();
        let d = construction_d::<i64>(&a).unwrap();
        assert_eq!(*d.lattice.determinant(), 32 / 16);

        let zero = CodeChain::new(vec![BinaryCode::zero(2).unwrap(); 3]).unwrap();
        let d = construction_d::<i64>(&zero).unwrap();
        assert_eq!(*d.lattice.determinant(), 64);
        assert_eq!(d.residues, vec![Point::zero(2)]);
    }

    #[test]
    fn direct_lattice_test_examples() {
        let (ok, wit) = is_lattice_direct(&presets::example1()).unwrap();
        assert!(!ok);
        let wit = wit.unwrap();
        assert_eq!(
            (wit.s.clone(), wit.t.clone()),
            (Point(vec![1, 1]), Point(vec![1, 1]))
        );
        assert_eq!(wit.sum, Point(vec![2, 2]));

        assert_eq!(
            is_lattice_direct(&presets::dplus(4).unwrap()).unwrap(),
            (true, None)
        );
        let a = CodeChain::new(vec![BinaryCode::repetition(5).unwrap()]).unwrap();
        assert!(is_lattice_direct(&a).unwrap().0);
    }

    #[test]
    fn theorem1_examples() {
        let r = theorem1_report::<i64>(&presets::example5()).unwrap();
        assert_eq!(r.verdicts(), [false; 4]);
        let r = theorem1_report::<i64>(&presets::dplus(4).unwrap()).unwrap();
        assert_eq!(r.verdicts(), [true; 4]);
        let r = theorem1_report::<BigInt>(&presets::dplus(3).unwrap()).unwrap();
        assert_eq!(r.verdicts(), [false; 4]);
        let r = theorem1_report::<i64>(&presets::example3()).unwrap();
        assert_eq!(r.verdicts(), [false; 4]);
        assert!(!r.nested && r.dims.is_none());
        let r = theorem1_report::<i64>(&presets::dplus(3).unwrap()).unwrap();
        assert!(r.lambda_d_determinant.is_none());
    }

    fn arb_generators(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
        prop::collection::vec(prop::collection::vec(-9i64..10, n), 0..5)
    }

    proptest! {
        #[test]
        fn hnf_is_canonical(extra in arb_generators(3), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut gens: Vec<Vec<i64>> = vec![vec![8, 0, 0], vec![0, 8, 0], vec![0, 0, 8]];
            gens.extend(extra);
            let a = hnf(3, &gens).unwrap();
            let mut shuffled = gens.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            // augmenting with members changes nothing
            shuffled.push(a.basis()[0].iter().zip(&a.basis()[2]).map(|(x, y)| 3 * x - y).collect());
            let b = hnf(3, &shuffled).unwrap();
            prop_assert_eq!(a.basis(), b.basis());
            for row in a.basis() {
                prop_assert!(row.iter().all(|x| *x >= 0));
            }
            for j in 0..3 {
                prop_assert!(a.basis()[j][j] > 0);
                for i in 0..j {
                    prop_assert!(a.basis()[i][j] < a.basis()[j][j]);
                }
                for i in j + 1..3 {
                    prop_assert_eq!(a.basis()[i][j], 0);
                }
            }
            for g in &gens {
                prop_assert!(a.contains(g));
            }
        }
    }
}
