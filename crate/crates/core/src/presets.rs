//! Named chains from the literature examples.

use crate::constellation::CodeChain;
use crate::error::{Error, Result};
use crate::f2::{BinaryCode, BitWord};
use crate::quantizer::dplus_chain;

fn word(s: &str) -> BitWord {
    let bits: Vec<u8> = s.bytes().map(|b| b - b'0').collect();
    BitWord::from_bits(&bits).expect("preset words are valid")
}

/// C1 = {00, 11}, C2 = {00}: a two-point residue set that is not a lattice.
pub fn example1() -> CodeChain {
    CodeChain::new(vec![
        BinaryCode::span(2, &[word("11")]).unwrap(),
        BinaryCode::zero(2).unwrap(),
    ])
    .unwrap()
}

/// n = 1 with C1 = C2 = {0,1} and C3 = {0}: members are 0..3 mod 8.
pub fn example3() -> CodeChain {
    let full = BinaryCode::full(1).unwrap();
    CodeChain::new(vec![full.clone(), full, BinaryCode::zero(1).unwrap()]).unwrap()
}

/// Three copies of {000, 101, 110, 011}: nested and linear but not Schur-closed.
pub fn example5() -> CodeChain {
    let code = BinaryCode::span(3, &[word("101"), word("110")]).unwrap();
    CodeChain::new(vec![code.clone(), code.clone(), code]).unwrap()
}

/// The repetition/even-parity two-level chain of length `n`.
pub fn dplus(n: usize) -> Result<CodeChain> {
    dplus_chain(n)
}

pub const NAMES: &[&str] = &["example1", "example3", "example5", "dplusN"];

pub fn by_name(name: &str) -> Result<CodeChain> {
    match name {
        "example1" => Ok(example1()),
        "example3" => Ok(example3()),
        "example5" => Ok(example5()),
        _ => match name.strip_prefix("dplus").map(str::parse::<usize>) {
            Some(Ok(n)) => dplus(n),
            _ => Err(Error::InvalidArgument(format!(
                "unknown preset '{name}' (known: {})",
                NAMES.join(", ")
            ))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(by_name("example5").unwrap(), example5());
        assert_eq!(by_name("dplus6").unwrap().n(), 6);
        assert!(by_name("dplus1").is_err());
        assert!(by_name("dplus").is_err());
        assert!(by_name("example2").is_err());
    }

    #[test]
    fn shapes() {
        assert_eq!((example1().n(), example1().levels()), (2, 2));
        assert_eq!((example3().n(), example3().levels()), (1, 3));
        let ex5 = example5();
        assert!(ex5.codes().iter().all(|c| c.size() == 4));
        assert!(ex5.is_nested() && ex5.is_linear());
    }
}
