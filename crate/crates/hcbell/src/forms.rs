//! Product groupings and the signed multilinear forms obtained by expanding a
//! grouped n-fold hypercomplex product.
//!
//! Octonion multiplication is not associative, so an n-fold product only has a
//! value once a parenthesization is fixed. [`enumerate_groupings`] lists all of
//! them (a Catalan number of trees) and [`build_forms`] expands one grouped
//! product into a dense [`CoefficientTensor`] over component tuples.

use crate::hypercomplex::{AlgebraError, HypercomplexScalar, SignedUnit, StructureTable};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormsError {
    #[error("site count must be at least 1")]
    EmptyProduct,
    #[error("grouping has {tree} leaves but {expected} sites were given")]
    LeafCountMismatch { tree: usize, expected: usize },
    #[error("cannot parse grouping `{input}`: {reason}")]
    BadGrouping { input: String, reason: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A parenthesization of an n-fold product: a full binary tree whose leaves
/// are the site indices 1..n in left-to-right order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupingTree {
    Leaf(usize),
    Node(Box<GroupingTree>, Box<GroupingTree>),
}

impl GroupingTree {
    pub fn leaf_count(&self) -> usize {
        match self {
            GroupingTree::Leaf(_) => 1,
            GroupingTree::Node(l, r) => l.leaf_count() + r.leaf_count(),
        }
    }

    /// Canonical textual form, e.g. `((1 2) 3)`; a single leaf renders as `1`.
    pub fn label(&self) -> String {
        match self {
            GroupingTree::Leaf(site) => site.to_string(),
            GroupingTree::Node(l, r) => format!("({} {})", l.label(), r.label()),
        }
    }

    /// Parses the canonical textual form produced by [`GroupingTree::label`].
    pub fn parse(input: &str) -> Result<Self, FormsError> {
        let bad = |reason: &str| FormsError::BadGrouping {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let tokens: Vec<String> = input
            .replace('(', " ( ")
            .replace(')', " ) ")
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let mut pos = 0usize;
        let tree = parse_tokens(&tokens, &mut pos)
            .map_err(|reason| bad(&reason))?;
        if pos != tokens.len() {
            return Err(bad("trailing input"));
        }
        // Leaves must read 1..n left to right.
        let mut leaves = Vec::new();
        collect_leaves(&tree, &mut leaves);
        let expected: Vec<usize> = (1..=leaves.len()).collect();
        if leaves != expected {
            return Err(bad("leaves are not 1..n in order"));
        }
        Ok(tree)
    }
}

fn parse_tokens(tokens: &[String], pos: &mut usize) -> Result<GroupingTree, String> {
    let token = tokens.get(*pos).ok_or("unexpected end of input")?;
    *pos += 1;
    if token == "(" {
        let left = parse_tokens(tokens, pos)?;
        let right = parse_tokens(tokens, pos)?;
        match tokens.get(*pos) {
            Some(t) if t == ")" => {
                *pos += 1;
                Ok(GroupingTree::Node(Box::new(left), Box::new(right)))
            }
            _ => Err("expected `)`".to_string()),
        }
    } else if token == ")" {
        Err("unexpected `)`".to_string())
    } else {
        let site: usize = token.parse().map_err(|_| format!("bad site index `{token}`"))?;
        if site == 0 {
            return Err("site indices start at 1".to_string());
        }
        Ok(GroupingTree::Leaf(site))
    }
}

fn collect_leaves(tree: &GroupingTree, out: &mut Vec<usize>) {
    match tree {
        GroupingTree::Leaf(site) => out.push(*site),
        GroupingTree::Node(l, r) => {
            collect_leaves(l, out);
            collect_leaves(r, out);
        }
    }
}

/// Number of groupings of an n-fold product, `(2n-2)! / (n! (n-1)!)`.
pub fn catalan(n: usize) -> u128 {
    if n == 0 {
        return 0;
    }
    // C(2n-2, n-1) / n, computed multiplicatively.
    let k = (n - 1) as u128;
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * (k + 1 + i) / (i + 1);
    }
    result / n as u128
}

/// All full binary trees over n ordered leaves, in a deterministic order
/// (recursive by split point, left subtree varying slowest).
pub fn enumerate_groupings(n: usize) -> Result<Vec<GroupingTree>, FormsError> {
    if n == 0 {
        return Err(FormsError::EmptyProduct);
    }
    Ok(groupings_over(1, n))
}

fn groupings_over(lo: usize, hi: usize) -> Vec<GroupingTree> {
    if lo == hi {
        return vec![GroupingTree::Leaf(lo)];
    }
    let mut out = Vec::new();
    for split in lo..hi {
        for left in groupings_over(lo, split) {
            for right in groupings_over(split + 1, hi) {
                out.push(GroupingTree::Node(Box::new(left.clone()), Box::new(right)));
            }
        }
    }
    out
}

/// Multiplies one basis unit per site according to the tree, combining signs
/// multiplicatively.
pub fn grouped_unit_product(
    table: &StructureTable,
    units: &[usize],
    grouping: &GroupingTree,
) -> Result<SignedUnit, FormsError> {
    if grouping.leaf_count() != units.len() {
        return Err(FormsError::LeafCountMismatch {
            tree: grouping.leaf_count(),
            expected: units.len(),
        });
    }
    fn go(
        table: &StructureTable,
        units: &[usize],
        tree: &GroupingTree,
    ) -> Result<SignedUnit, FormsError> {
        match tree {
            GroupingTree::Leaf(site) => {
                let index = units[site - 1];
                if index >= table.dim() {
                    return Err(AlgebraError::UnitOutOfRange { index, dim: table.dim() }.into());
                }
                Ok(SignedUnit::new(1, index))
            }
            GroupingTree::Node(l, r) => {
                let a = go(table, units, l)?;
                let b = go(table, units, r)?;
                let prod = table.unit_mul(a.index, b.index)?;
                Ok(prod.with_sign(a.sign * b.sign))
            }
        }
    }
    go(table, units, grouping)
}

/// The expansion of a grouped n-fold hypercomplex product: for every choice of
/// one component index per site, the signed unit of the grouped unit product.
///
/// The induced form `X_s` is the sum of all signed monomials whose tuple maps
/// to output index `s`; there are `dim^(n-1)` of them per form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTensor {
    dim: usize,
    sites: usize,
    entries: Vec<SignedUnit>,
}

impl CoefficientTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Entry for one component tuple, one index per site.
    pub fn entry(&self, tuple: &[usize]) -> SignedUnit {
        assert_eq!(tuple.len(), self.sites);
        self.entries[self.flat_index(tuple)]
    }

    fn flat_index(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &l| acc * self.dim + l)
    }

    /// Iterates `(tuple, signed unit)` pairs in row-major tuple order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, SignedUnit)> + '_ {
        TupleIter::new(self.dim, self.sites).map(move |tuple| {
            let unit = self.entries[self.flat_index(&tuple)];
            (tuple, unit)
        })
    }

    /// The signed monomials of the form `X_s`: pairs of a sign and one
    /// component index per site.
    pub fn monomials_for_form(&self, s: usize) -> Vec<(i8, Vec<usize>)> {
        self.iter()
            .filter(|(_, unit)| unit.index == s)
            .map(|(tuple, unit)| (unit.sign, tuple))
            .collect()
    }

    /// Evaluates all forms on one real vector per site; component `s` of the
    /// result is `X_s(v_1, ..., v_n)`.
    pub fn evaluate(&self, site_vectors: &[&[f64]]) -> Vec<f64> {
        assert_eq!(site_vectors.len(), self.sites);
        let mut forms = vec![0.0; self.dim];
        for (tuple, unit) in self.iter() {
            let mut value = f64::from(unit.sign);
            for (m, &l) in tuple.iter().enumerate() {
                value *= site_vectors[m][l];
            }
            forms[unit.index] += value;
        }
        forms
    }

    /// Renders the tensor as text: one `l_1 ... l_n -> +/-s` line per tuple.
    pub fn render_entries(&self) -> String {
        let mut out = String::new();
        for (tuple, unit) in self.iter() {
            let indices: Vec<String> = tuple.iter().map(usize::to_string).collect();
            out.push_str(&format!(
                "{} -> {}{}\n",
                indices.join(" "),
                if unit.sign >= 0 { '+' } else { '-' },
                unit.index
            ));
        }
        out
    }

    /// Renders each form as a sum of monomials with letter names A..H per
    /// site, e.g. `X_1 = + B1 A2 + A1 B2`.
    pub fn render_forms(&self) -> String {
        const LETTERS: [char; 8] = ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H'];
        let mut out = String::new();
        for s in 0..self.dim {
            out.push_str(&format!("X_{s} ="));
            for (sign, tuple) in self.monomials_for_form(s) {
                out.push_str(if sign >= 0 { " +" } else { " -" });
                for (m, &l) in tuple.iter().enumerate() {
                    out.push_str(&format!(" {}{}", LETTERS[l], m + 1));
                }
            }
            out.push('\n');
        }
        out
    }
}

struct TupleIter {
    dim: usize,
    current: Option<Vec<usize>>,
}

impl TupleIter {
    fn new(dim: usize, sites: usize) -> Self {
        TupleIter { dim, current: Some(vec![0; sites]) }
    }
}

impl Iterator for TupleIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.current.take()?;
        let mut next = current.clone();
        for i in (0..next.len()).rev() {
            next[i] += 1;
            if next[i] < self.dim {
                self.current = Some(next);
                return Some(current);
            }
            next[i] = 0;
        }
        Some(current)
    }
}

/// Expands the grouped n-fold product over `table` into its coefficient
/// tensor.
pub fn build_forms(
    table: &StructureTable,
    sites: usize,
    grouping: &GroupingTree,
) -> Result<CoefficientTensor, FormsError> {
    if sites == 0 {
        return Err(FormsError::EmptyProduct);
    }
    if grouping.leaf_count() != sites {
        return Err(FormsError::LeafCountMismatch {
            tree: grouping.leaf_count(),
            expected: sites,
        });
    }
    let dim = table.dim();
    let mut entries = Vec::with_capacity(dim.pow(sites as u32));
    for tuple in TupleIter::new(dim, sites) {
        entries.push(grouped_unit_product(table, &tuple, grouping)?);
    }
    Ok(CoefficientTensor { dim, sites, entries })
}

/// Numerically multiplies one hypercomplex value per site following the
/// grouping tree.
pub fn grouped_product(
    table: &StructureTable,
    values: &[HypercomplexScalar],
    grouping: &GroupingTree,
) -> Result<HypercomplexScalar, FormsError> {
    if grouping.leaf_count() != values.len() {
        return Err(FormsError::LeafCountMismatch {
            tree: grouping.leaf_count(),
            expected: values.len(),
        });
    }
    fn go(
        table: &StructureTable,
        values: &[HypercomplexScalar],
        tree: &GroupingTree,
    ) -> Result<HypercomplexScalar, FormsError> {
        match tree {
            GroupingTree::Leaf(site) => Ok(values[site - 1].clone()),
            GroupingTree::Node(l, r) => {
                let a = go(table, values, l)?;
                let b = go(table, values, r)?;
                Ok(a.mul(&b, table)?)
            }
        }
    }
    go(table, values, grouping)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercomplex::REL_TOL;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn catalan_counts() {
        assert_eq!(catalan(1), 1);
        assert_eq!(catalan(2), 1);
        assert_eq!(catalan(3), 2);
        assert_eq!(catalan(4), 5);
        assert_eq!(catalan(5), 14);
        assert_eq!(catalan(6), 42);
        assert_eq!(catalan(7), 132);
        assert_eq!(catalan(8), 429);
    }

    #[test]
    fn enumeration_matches_catalan() {
        for n in 1..=8 {
            let groupings = enumerate_groupings(n).unwrap();
            assert_eq!(groupings.len() as u128, catalan(n), "n = {n}");
            // All trees distinct.
            for (i, a) in groupings.iter().enumerate() {
                for b in &groupings[i + 1..] {
                    assert_ne!(a, b);
                }
            }
        }
        assert!(enumerate_groupings(0).is_err());
    }

    #[test]
    fn grouping_labels_for_three_sites() {
        let groupings = enumerate_groupings(3).unwrap();
        let labels: Vec<String> = groupings.iter().map(GroupingTree::label).collect();
        assert_eq!(labels, vec!["(1 (2 3))", "((1 2) 3)"]);
    }

    #[test]
    fn grouping_parse_round_trip() {
        for n in 1..=6 {
            for g in enumerate_groupings(n).unwrap() {
                assert_eq!(GroupingTree::parse(&g.label()).unwrap(), g);
            }
        }
        assert!(GroupingTree::parse("((1 2) 4)").is_err());
        assert!(GroupingTree::parse("((1 2)").is_err());
        assert!(GroupingTree::parse("(2 1)").is_err());
    }

    #[test]
    fn grouped_unit_product_octonion_witness() {
        let t = StructureTable::table1();
        let left_first = GroupingTree::parse("((1 2) 3)").unwrap();
        let right_first = GroupingTree::parse("(1 (2 3))").unwrap();
        assert_eq!(
            grouped_unit_product(&t, &[1, 2, 3], &left_first).unwrap(),
            SignedUnit::new(-1, 6)
        );
        assert_eq!(
            grouped_unit_product(&t, &[1, 2, 3], &right_first).unwrap(),
            SignedUnit::new(1, 6)
        );
        assert_eq!(
            grouped_unit_product(&t, &[0, 0, 0], &left_first).unwrap(),
            SignedUnit::new(1, 0)
        );
    }

    #[test]
    fn build_forms_bipartite_complex() {
        let t = StructureTable::complex();
        let g = GroupingTree::parse("(1 2)").unwrap();
        let tensor = build_forms(&t, 2, &g).unwrap();
        // X_0 = a1 a2 - b1 b2, X_1 = b1 a2 + a1 b2.
        assert_eq!(tensor.entry(&[0, 0]), SignedUnit::new(1, 0));
        assert_eq!(tensor.entry(&[1, 1]), SignedUnit::new(-1, 0));
        assert_eq!(tensor.entry(&[1, 0]), SignedUnit::new(1, 1));
        assert_eq!(tensor.entry(&[0, 1]), SignedUnit::new(1, 1));
    }

    #[test]
    fn build_forms_single_site() {
        let t = StructureTable::quaternion();
        let g = GroupingTree::Leaf(1);
        let tensor = build_forms(&t, 1, &g).unwrap();
        for l in 0..4 {
            assert_eq!(tensor.entry(&[l]), SignedUnit::new(1, l));
        }
    }

    #[test]
    fn forms_per_output_have_expected_monomial_count() {
        let t = StructureTable::degen();
        let g = GroupingTree::parse("((1 2) 3)").unwrap();
        let tensor = build_forms(&t, 3, &g).unwrap();
        for s in 0..8 {
            assert_eq!(tensor.monomials_for_form(s).len(), 64);
        }
    }

    #[test]
    fn associative_algebras_are_grouping_independent() {
        for t in [
            StructureTable::real(),
            StructureTable::complex(),
            StructureTable::quaternion(),
        ] {
            for n in 2..=5 {
                let groupings = enumerate_groupings(n).unwrap();
                let reference = build_forms(&t, n, &groupings[0]).unwrap();
                for g in &groupings[1..] {
                    assert_eq!(build_forms(&t, n, g).unwrap(), reference, "{} n={n}", t.name());
                }
            }
        }
    }

    #[test]
    fn tensor_evaluation_matches_scalar_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in StructureTable::all_builtin() {
            for n in 1..=3 {
                for g in enumerate_groupings(n).unwrap() {
                    let tensor = build_forms(&t, n, &g).unwrap();
                    let values: Vec<HypercomplexScalar> = (0..n)
                        .map(|_| {
                            let coeffs = (0..t.dim()).map(|_| rng.sample(StandardNormal)).collect();
                            HypercomplexScalar::new(coeffs).unwrap()
                        })
                        .collect();
                    let vectors: Vec<&[f64]> = values.iter().map(|v| v.coeffs()).collect();
                    let forms = tensor.evaluate(&vectors);
                    let product = grouped_product(&t, &values, &g).unwrap();
                    for (a, b) in forms.iter().zip(product.coeffs()) {
                        assert!((a - b).abs() <= REL_TOL * b.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn norm_identity_extends_to_many_sites() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for t in StructureTable::all_builtin() {
            for n in 2..=4 {
                for g in enumerate_groupings(n).unwrap() {
                    let tensor = build_forms(&t, n, &g).unwrap();
                    let vectors: Vec<Vec<f64>> = (0..n)
                        .map(|_| (0..t.dim()).map(|_| rng.sample(StandardNormal)).collect())
                        .collect();
                    let refs: Vec<&[f64]> = vectors.iter().map(Vec::as_slice).collect();
                    let lhs: f64 = tensor.evaluate(&refs).iter().map(|x| x * x).sum();
                    let rhs: f64 = vectors
                        .iter()
                        .map(|v| v.iter().map(|x| x * x).sum::<f64>())
                        .product();
                    assert!((lhs - rhs).abs() <= 1e-11 * rhs.max(1.0), "{} n={n}", t.name());
                }
            }
        }
    }

    #[test]
    fn leaf_count_mismatch_is_rejected() {
        let t = StructureTable::complex();
        let g = GroupingTree::parse("((1 2) 3)").unwrap();
        assert!(matches!(
            build_forms(&t, 2, &g),
            Err(FormsError::LeafCountMismatch { tree: 3, expected: 2 })
        ));
        assert!(grouped_unit_product(&t, &[0, 1], &g).is_err());
    }
}
