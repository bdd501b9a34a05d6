//! Exhaustive, exact check of `Var(f) <= Σ_i δ_i Inf_i` for a Boolean function
//! on a finite product space and a decision tree computing it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest input space handled exhaustively.
pub const MAX_INPUTS: u64 = 1_000_000;

/// A decision tree: internal nodes query a coordinate and branch on its letter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecisionTree {
    Leaf { leaf: u8 },
    Query { query: usize, children: Vec<DecisionTree> },
}

/// One coordinate: letters `0..probabilities.len()` with the given
/// probabilities, written `[numerator, denominator]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coordinate {
    pub probabilities: Vec<[i64; 2]>,
}

/// Inputs are indexed with the first coordinate most significant; `function`
/// lists `f` (0 or 1) over inputs in that order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteOSSSCase {
    #[serde(default)]
    pub name: Option<String>,
    pub coordinates: Vec<Coordinate>,
    pub function: Vec<u8>,
    pub tree: DecisionTree,
}

/// Exact results, as reduced fractions `"p/q"` with float companions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OsssReport {
    pub name: Option<String>,
    pub variance: String,
    pub revealments: Vec<String>,
    pub influences: Vec<String>,
    pub rhs: String,
    pub holds: bool,
    pub variance_f64: f64,
    pub rhs_f64: f64,
}

fn ratio_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

impl DecisionTree {
    /// The tree that queries coordinates left to right and stops as soon as
    /// `function` is constant on the inputs consistent with the answers.
    pub fn sequential(sizes: &[usize], function: &[u8]) -> Self {
        fn build(sizes: &[usize], function: &[u8], depth: usize, lo: usize, span: usize) -> DecisionTree {
            let first = function[lo];
            if function[lo..lo + span].iter().all(|&v| v == first) {
                return DecisionTree::Leaf { leaf: first };
            }
            let sub = span / sizes[depth];
            let children = (0..sizes[depth]).map(|a| build(sizes, function, depth + 1, lo + a * sub, sub)).collect();
            DecisionTree::Query { query: depth, children }
        }
        build(sizes, function, 0, 0, function.len())
    }

    /// Follows the tree on `input`, recording queried coordinates; returns the
    /// leaf value.
    fn run(&self, input: &[usize], queried: &mut [bool]) -> Result<u8> {
        let mut node = self;
        loop {
            match node {
                DecisionTree::Leaf { leaf } => return Ok(*leaf),
                DecisionTree::Query { query, children } => {
                    let letter = *input.get(*query).ok_or_else(|| {
                        Error::InvalidTree(format!("tree queries coordinate {query}, which does not exist"))
                    })?;
                    queried[*query] = true;
                    node = children.get(letter).ok_or_else(|| {
                        Error::InvalidTree(format!("coordinate {query} has no branch for letter {letter}"))
                    })?;
                }
            }
        }
    }
}

impl DiscreteOSSSCase {
    /// `m` independent fair bits.
    pub fn uniform_bits(m: usize, function: Vec<u8>, tree: DecisionTree) -> Self {
        Self {
            name: None,
            coordinates: vec![Coordinate { probabilities: vec![[1, 2], [1, 2]] }; m],
            function,
            tree,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn sizes(&self) -> Vec<usize> {
        self.coordinates.iter().map(|c| c.probabilities.len()).collect()
    }
}

fn decode(mut index: usize, sizes: &[usize], out: &mut [usize]) {
    for i in (0..sizes.len()).rev() {
        out[i] = index % sizes[i];
        index /= sizes[i];
    }
}

/// Computes `Var(f)`, the revealments and the resampling influences exactly
/// and checks the inequality.
pub fn verify_osss_discrete(case: &DiscreteOSSSCase) -> Result<OsssReport> {
    let sizes = case.sizes();
    let m = sizes.len();
    let mut total: u64 = 1;
    for &s in &sizes {
        if s == 0 {
            return Err(Error::Usage("every coordinate needs at least one letter".into()));
        }
        total = total.saturating_mul(s as u64);
    }
    if total > MAX_INPUTS {
        return Err(Error::Usage(format!("{total} inputs exceed the exhaustive limit {MAX_INPUTS}")));
    }
    if case.function.len() as u64 != total {
        return Err(Error::Usage(format!("function table has {} entries, expected {total}", case.function.len())));
    }
    if case.function.iter().any(|&v| v > 1) {
        return Err(Error::Usage("function values must be 0 or 1".into()));
    }
    let mut probs: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    for (i, c) in case.coordinates.iter().enumerate() {
        let mut row = Vec::with_capacity(c.probabilities.len());
        for &[num, den] in &c.probabilities {
            if den <= 0 || num < 0 {
                return Err(Error::Domain(format!("coordinate {i}: probability {num}/{den} is not valid")));
            }
            row.push(BigRational::new(BigInt::from(num), BigInt::from(den)));
        }
        let sum: BigRational = row.iter().cloned().sum();
        if !sum.is_one() {
            return Err(Error::Domain(format!("coordinate {i}: probabilities sum to {}", ratio_string(&sum))));
        }
        probs.push(row);
    }
    let total = total as usize;
    let mut input = vec![0usize; m];
    let mut mass = Vec::with_capacity(total);
    let mut mean = BigRational::zero();
    let mut delta = vec![BigRational::zero(); m];
    for idx in 0..total {
        decode(idx, &sizes, &mut input);
        let w: BigRational = input.iter().enumerate().map(|(i, &a)| probs[i][a].clone()).product();
        let mut queried = vec![false; m];
        let got = case.tree.run(&input, &mut queried)?;
        if got != case.function[idx] {
            return Err(Error::InvalidTree(format!(
                "tree returns {got} on input {input:?} where the function is {}",
                case.function[idx]
            )));
        }
        if case.function[idx] == 1 {
            mean += &w;
        }
        for i in 0..m {
            if queried[i] {
                delta[i] += &w;
            }
        }
        mass.push(w);
    }
    let variance = &mean - &mean * &mean;
    let mut influence = vec![BigRational::zero(); m];
    let mut stride = 1usize;
    for i in (0..m).rev() {
        for idx in 0..total {
            let a = (idx / stride) % sizes[i];
            let base = idx - a * stride;
            let mut flip = BigRational::zero();
            for (b, pb) in probs[i].iter().enumerate() {
                if case.function[base + b * stride] != case.function[idx] {
                    flip += pb;
                }
            }
            if !flip.is_zero() {
                influence[i] += &mass[idx] * flip;
            }
        }
        stride *= sizes[i];
    }
    let rhs: BigRational = delta.iter().zip(&influence).map(|(d, f)| d * f).sum();
    Ok(OsssReport {
        name: case.name.clone(),
        variance: ratio_string(&variance),
        revealments: delta.iter().map(ratio_string).collect(),
        influences: influence.iter().map(ratio_string).collect(),
        rhs: ratio_string(&rhs),
        holds: variance <= rhs,
        variance_f64: to_f64(&variance),
        rhs_f64: to_f64(&rhs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(m: usize, f: impl Fn(&[usize]) -> u8) -> DiscreteOSSSCase {
        let sizes = vec![2; m];
        let mut input = vec![0; m];
        let table: Vec<u8> = (0..1 << m)
            .map(|i| {
                decode(i, &sizes, &mut input);
                f(&input)
            })
            .collect();
        let tree = DecisionTree::sequential(&sizes, &table);
        DiscreteOSSSCase::uniform_bits(m, table, tree)
    }

    #[test]
    fn dictator() {
        let r = verify_osss_discrete(&bits(2, |x| x[0] as u8)).unwrap();
        assert_eq!(r.variance, "1/4");
        assert_eq!(r.revealments, ["1", "0"]);
        assert_eq!(r.influences, ["1/2", "0"]);
        assert_eq!(r.rhs, "1/2");
        assert!(r.holds);
    }

    #[test]
    fn parity() {
        let r = verify_osss_discrete(&bits(2, |x| (x[0] ^ x[1]) as u8)).unwrap();
        assert_eq!(r.revealments, ["1", "1"]);
        assert_eq!(r.influences, ["1/2", "1/2"]);
        assert_eq!(r.rhs, "1");
    }

    #[test]
    fn majority() {
        let r = verify_osss_discrete(&bits(3, |x| (x[0] + x[1] + x[2] >= 2) as u8)).unwrap();
        assert_eq!(r.variance, "1/4");
        assert_eq!(r.revealments, ["1", "1", "1/2"]);
        assert_eq!(r.influences, ["1/4", "1/4", "1/4"]);
        assert_eq!(r.rhs, "5/8");
    }

    #[test]
    fn wrong_tree_is_rejected() {
        let mut c = bits(2, |x| x[0] as u8);
        c.tree = DecisionTree::Leaf { leaf: 1 };
        assert!(matches!(verify_osss_discrete(&c), Err(Error::InvalidTree(_))));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"name": "dictator2",
            "coordinates": [{"probabilities": [[1, 2], [1, 2]]}, {"probabilities": [[1, 2], [1, 2]]}],
            "function": [0, 0, 1, 1],
            "tree": {"query": 0, "children": [{"leaf": 0}, {"leaf": 1}]}}"#;
        let c = DiscreteOSSSCase::from_json(text).unwrap();
        let r = verify_osss_discrete(&c).unwrap();
        assert_eq!((r.variance.as_str(), r.rhs.as_str()), ("1/4", "1/2"));
    }

    #[test]
    fn biased_coordinates() {
        // f = x0 with P(x0 = 1) = 1/3: Var = 2/9, Inf_0 = 2 p (1 - p) = 4/9
        let c = DiscreteOSSSCase {
            name: None,
            coordinates: vec![Coordinate { probabilities: vec![[2, 3], [1, 3]] }],
            function: vec![0, 1],
            tree: DecisionTree::sequential(&[2], &[0, 1]),
        };
        let r = verify_osss_discrete(&c).unwrap();
        assert_eq!(r.variance, "2/9");
        assert_eq!(r.influences, ["4/9"]);
    }
}
