//! Exact arithmetic in the four normed composition algebras (dimensions 1, 2,
//! 4 and 8) over pluggable structure-constant tables.
//!
//! A [`StructureTable`] fixes one multiplication convention for the imaginary
//! units. Two distinct octonion conventions are shipped: [`StructureTable::table1`]
//! and [`StructureTable::degen`]. Both are composition algebras (the norm is
//! multiplicative) but their structure constants differ, so mixed-convention
//! arithmetic is rejected.

use thiserror::Error;

/// Relative tolerance for floating-point identity checks.
pub const REL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("unit index {index} out of range for algebra dimension {dim}")]
    UnitOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("{0} is not a composition-algebra dimension (must be 1, 2, 4 or 8)")]
    BadDimension(usize),
    #[error("unknown structure-table convention `{0}`")]
    UnknownConvention(String),
}

/// A basis unit with a sign: `(+1, 0)` is `1`, `(-1, 3)` is `-i_3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedUnit {
    pub sign: i8,
    pub index: usize,
}

impl SignedUnit {
    pub fn new(sign: i8, index: usize) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        SignedUnit { sign, index }
    }

    /// Combines an external sign into this unit.
    pub fn with_sign(self, sign: i8) -> Self {
        SignedUnit::new(self.sign * sign, self.index)
    }
}

/// Signed multiplication table for the basis units of one composition algebra.
///
/// Entry `(p, q)` gives the product `u_p u_q` as a [`SignedUnit`], with index 0
/// denoting the real unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureTable {
    dim: usize,
    name: String,
    entries: Vec<SignedUnit>,
}

/// The 64 signed monomials of the Degen eight-square identity: the `s`-th
/// square is `sum_{(s,p,q,sign)} sign * x_p y_q`, letters a..h mapped to
/// indices 0..7 on each side.
const DEGEN_MONOMIALS: [(usize, usize, usize, i8); 64] = [
    (0, 0, 0, 1), (0, 1, 1, -1), (0, 2, 2, -1), (0, 3, 3, -1),
    (0, 4, 4, -1), (0, 5, 5, -1), (0, 6, 6, -1), (0, 7, 7, -1),
    (1, 1, 0, 1), (1, 0, 1, 1), (1, 3, 2, 1), (1, 2, 3, -1),
    (1, 5, 4, 1), (1, 4, 5, -1), (1, 7, 6, -1), (1, 6, 7, 1),
    (2, 2, 0, 1), (2, 3, 1, -1), (2, 0, 2, 1), (2, 1, 3, 1),
    (2, 6, 4, 1), (2, 7, 5, 1), (2, 4, 6, -1), (2, 5, 7, -1),
    (3, 3, 0, 1), (3, 2, 1, 1), (3, 1, 2, -1), (3, 0, 3, 1),
    (3, 7, 4, 1), (3, 6, 5, -1), (3, 5, 6, 1), (3, 4, 7, -1),
    (4, 4, 0, 1), (4, 5, 1, -1), (4, 6, 2, -1), (4, 7, 3, -1),
    (4, 0, 4, 1), (4, 1, 5, 1), (4, 2, 6, 1), (4, 3, 7, 1),
    (5, 5, 0, 1), (5, 4, 1, 1), (5, 7, 2, -1), (5, 6, 3, 1),
    (5, 1, 4, -1), (5, 0, 5, 1), (5, 3, 6, -1), (5, 2, 7, 1),
    (6, 6, 0, 1), (6, 7, 1, 1), (6, 4, 2, 1), (6, 5, 3, -1),
    (6, 2, 4, -1), (6, 3, 5, 1), (6, 0, 6, 1), (6, 1, 7, -1),
    (7, 7, 0, 1), (7, 6, 1, -1), (7, 5, 2, 1), (7, 4, 3, 1),
    (7, 3, 4, -1), (7, 2, 5, -1), (7, 1, 6, 1), (7, 0, 7, 1),
];

/// Imaginary 7x7 block of the octonion multiplication table, rows i_1..i_7 by
/// columns i_1..i_7; `(sign, 0)` stands for `sign * 1`.
const TABLE1_BLOCK: [[(i8, usize); 7]; 7] = [
    [(-1, 0), (1, 4), (1, 7), (-1, 2), (1, 6), (-1, 5), (-1, 3)],
    [(-1, 4), (-1, 0), (1, 5), (1, 1), (-1, 3), (1, 7), (-1, 6)],
    [(-1, 7), (-1, 5), (-1, 0), (1, 6), (1, 2), (-1, 4), (1, 1)],
    [(1, 2), (-1, 1), (-1, 6), (-1, 0), (1, 7), (1, 3), (-1, 5)],
    [(-1, 6), (1, 3), (-1, 2), (-1, 7), (-1, 0), (1, 1), (1, 4)],
    [(1, 5), (-1, 7), (1, 4), (-1, 3), (-1, 1), (-1, 0), (1, 2)],
    [(1, 3), (1, 6), (-1, 1), (1, 5), (-1, 4), (-1, 2), (-1, 0)],
];

impl StructureTable {
    fn from_imaginary_block(dim: usize, name: &str, block: &[&[(i8, usize)]]) -> Self {
        let mut entries = vec![SignedUnit::new(1, 0); dim * dim];
        for p in 0..dim {
            entries[p * dim] = SignedUnit::new(1, p);
            entries[p] = SignedUnit::new(1, p);
        }
        for p in 1..dim {
            for q in 1..dim {
                let (sign, index) = block[p - 1][q - 1];
                entries[p * dim + q] = SignedUnit::new(sign, index);
            }
        }
        StructureTable { dim, name: name.to_string(), entries }
    }

    /// The reals: a single basis unit.
    pub fn real() -> Self {
        StructureTable::from_imaginary_block(1, "real", &[])
    }

    /// The complex numbers: `i^2 = -1`.
    pub fn complex() -> Self {
        StructureTable::from_imaginary_block(2, "complex", &[&[(-1, 0)]])
    }

    /// The quaternions with `ij = -ji = k`, `jk = -kj = i`, `ki = -ik = j`,
    /// units ordered `(1, i, j, k)`.
    pub fn quaternion() -> Self {
        StructureTable::from_imaginary_block(
            4,
            "quaternion",
            &[
                &[(-1, 0), (1, 3), (-1, 2)],
                &[(-1, 3), (-1, 0), (1, 1)],
                &[(1, 2), (-1, 1), (-1, 0)],
            ],
        )
    }

    /// Octonions in the convention of the standard multiplication table for
    /// units `i_1..i_7`.
    pub fn table1() -> Self {
        let rows: Vec<&[(i8, usize)]> = TABLE1_BLOCK.iter().map(|r| r.as_slice()).collect();
        StructureTable::from_imaginary_block(8, "table1", &rows)
    }

    /// Octonions in the convention implicit in the Degen eight-square
    /// identity: each signed monomial of the identity fixes one structure
    /// constant.
    pub fn degen() -> Self {
        let mut entries = vec![None; 64];
        for &(s, p, q, sign) in DEGEN_MONOMIALS.iter() {
            let slot = &mut entries[p * 8 + q];
            assert!(slot.is_none(), "duplicate monomial for units ({p}, {q})");
            *slot = Some(SignedUnit::new(sign, s));
        }
        let entries = entries.into_iter().map(|e| e.expect("table incomplete")).collect();
        StructureTable { dim: 8, name: "degen".to_string(), entries }
    }

    /// The default convention for a given algebra dimension. Dimension 8
    /// defaults to the Degen convention.
    pub fn default_for_dim(dim: usize) -> Result<Self, AlgebraError> {
        match dim {
            1 => Ok(StructureTable::real()),
            2 => Ok(StructureTable::complex()),
            4 => Ok(StructureTable::quaternion()),
            8 => Ok(StructureTable::degen()),
            _ => Err(AlgebraError::BadDimension(dim)),
        }
    }

    /// Looks up a built-in table by convention name.
    pub fn builtin(name: &str) -> Result<Self, AlgebraError> {
        match name {
            "real" => Ok(StructureTable::real()),
            "complex" => Ok(StructureTable::complex()),
            "quaternion" => Ok(StructureTable::quaternion()),
            "table1" => Ok(StructureTable::table1()),
            "degen" => Ok(StructureTable::degen()),
            other => Err(AlgebraError::UnknownConvention(other.to_string())),
        }
    }

    /// All built-in tables, for exhaustive property checks.
    pub fn all_builtin() -> Vec<Self> {
        vec![
            StructureTable::real(),
            StructureTable::complex(),
            StructureTable::quaternion(),
            StructureTable::table1(),
            StructureTable::degen(),
        ]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Product of two basis units, `u_p u_q`.
    pub fn unit_mul(&self, p: usize, q: usize) -> Result<SignedUnit, AlgebraError> {
        for index in [p, q] {
            if index >= self.dim {
                return Err(AlgebraError::UnitOutOfRange { index, dim: self.dim });
            }
        }
        Ok(self.entries[p * self.dim + q])
    }

    /// Checks the defining table invariants entry-by-entry: the real unit is a
    /// two-sided identity, imaginary units square to -1 and anticommute.
    pub fn check_invariants(&self) -> Result<(), String> {
        if ![1, 2, 4, 8].contains(&self.dim) {
            return Err(format!("bad dimension {}", self.dim));
        }
        for p in 0..self.dim {
            let left = self.entries[p * self.dim];
            let right = self.entries[p];
            if left != SignedUnit::new(1, p) || right != SignedUnit::new(1, p) {
                return Err(format!("real unit is not the identity at index {p}"));
            }
        }
        for p in 1..self.dim {
            if self.entries[p * self.dim + p] != SignedUnit::new(-1, 0) {
                return Err(format!("unit {p} does not square to -1"));
            }
            for q in 1..self.dim {
                if p == q {
                    continue;
                }
                let pq = self.entries[p * self.dim + q];
                let qp = self.entries[q * self.dim + p];
                if pq.index != qp.index || pq.sign != -qp.sign {
                    return Err(format!("units {p}, {q} do not anticommute"));
                }
            }
        }
        Ok(())
    }

    /// Renders the table as text, one row per left unit, entries like `+4` for
    /// `+i_4` and `-0` for `-1`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|q| {
                    let e = self.entries[p * self.dim + q];
                    format!("{}{}", if e.sign >= 0 { '+' } else { '-' }, e.index)
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// A real, complex, quaternion or octonion value stored as its real
/// coefficient vector. Coefficient 0 is the real part; coefficient `l` the
/// coefficient of the unit `i_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercomplexScalar {
    coeffs: Vec<f64>,
}

impl HypercomplexScalar {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, AlgebraError> {
        if ![1, 2, 4, 8].contains(&coeffs.len()) {
            return Err(AlgebraError::BadDimension(coeffs.len()));
        }
        Ok(HypercomplexScalar { coeffs })
    }

    pub fn zero(dim: usize) -> Self {
        HypercomplexScalar { coeffs: vec![0.0; dim] }
    }

    pub fn one(dim: usize) -> Self {
        HypercomplexScalar::unit(dim, 0)
    }

    /// The basis element `i_l` (or `1` for `l = 0`).
    pub fn unit(dim: usize, l: usize) -> Self {
        let mut coeffs = vec![0.0; dim];
        coeffs[l] = 1.0;
        HypercomplexScalar { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.dim() != other.dim() {
            return Err(AlgebraError::DimMismatch(self.dim(), other.dim()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(HypercomplexScalar { coeffs })
    }

    /// Bilinear product under the given structure table.
    pub fn mul(&self, other: &Self, table: &StructureTable) -> Result<Self, AlgebraError> {
        if self.dim() != other.dim() {
            return Err(AlgebraError::DimMismatch(self.dim(), other.dim()));
        }
        if self.dim() != table.dim() {
            return Err(AlgebraError::DimMismatch(self.dim(), table.dim()));
        }
        let dim = self.dim();
        let mut coeffs = vec![0.0; dim];
        for p in 0..dim {
            if self.coeffs[p] == 0.0 {
                continue;
            }
            for q in 0..dim {
                let u = table.unit_mul(p, q)?;
                coeffs[u.index] += f64::from(u.sign) * self.coeffs[p] * other.coeffs[q];
            }
        }
        Ok(HypercomplexScalar { coeffs })
    }

    /// Conjugation: negates every imaginary coefficient.
    pub fn conj(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for c in coeffs.iter_mut().skip(1) {
            *c = -*c;
        }
        HypercomplexScalar { coeffs }
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

/// Returns `(ab)c - a(bc)`; the zero vector exactly when the triple
/// associates.
pub fn associator(
    a: &HypercomplexScalar,
    b: &HypercomplexScalar,
    c: &HypercomplexScalar,
    table: &StructureTable,
) -> Result<HypercomplexScalar, AlgebraError> {
    let left = a.mul(b, table)?.mul(c, table)?;
    let right = a.mul(&b.mul(c, table)?, table)?;
    let coeffs = left
        .coeffs
        .iter()
        .zip(&right.coeffs)
        .map(|(l, r)| l - r)
        .collect();
    Ok(HypercomplexScalar { coeffs })
}

/// Evaluates both sides of the `dim`-square identity on a pair of real
/// vectors: the left side is the sum of squared product components, the right
/// side the product of squared norms. The caller asserts equality.
pub fn square_identity_check(
    v1: &[f64],
    v2: &[f64],
    table: &StructureTable,
) -> Result<(f64, f64), AlgebraError> {
    let x = HypercomplexScalar::new(v1.to_vec())?;
    let y = HypercomplexScalar::new(v2.to_vec())?;
    let product = x.mul(&y, table)?;
    let lhs = product.norm_squared();
    let rhs = x.norm_squared() * y.norm_squared();
    Ok((lhs, rhs))
}
