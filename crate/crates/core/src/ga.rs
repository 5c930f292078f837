//! Euclidean geometric algebra restricted to grades 1 and 2.
//!
//! Vectors live in `R^n` with orthonormal basis `σ_1 .. σ_n`. Bivectors are
//! stored densely over the canonical pairs `(1,2), (1,3), .., (1,n), (2,3),
//! .., (n-1,n)`; the value for `j > i` is the negation of the stored `(i, j)`
//! entry. In 3D this gives the component order `(σ12, σ13, σ23)`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// A point or direction in n-phase signal space.
#[derive(Debug, Clone, PartialEq)]
pub struct VecN {
    comps: Vec<f64>,
}

impl VecN {
    /// Checked constructor: at least two components, all finite.
    pub fn new(comps: Vec<f64>) -> Result<Self> {
        if comps.len() < 2 {
            return Err(Error::InvalidDimension(comps.len()));
        }
        if let Some(i) = comps.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { comps })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            comps: vec![0.0; dim],
        }
    }

    /// Basis vector `σ_{index+1}` (zero-based index).
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut comps = vec![0.0; dim];
        comps[index] = 1.0;
        Self { comps }
    }

    /// Unchecked constructor for values produced by arithmetic on valid
    /// vectors. Non-finite values are caught by [`VecN::is_finite`] where it
    /// matters.
    pub(crate) fn from_vec(comps: Vec<f64>) -> Self {
        Self { comps }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    #[inline]
    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.comps
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }

    pub fn norm_squared(&self) -> f64 {
        self.comps.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_vec(self.comps.iter().map(|c| c * s).collect())
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &VecN) {
        assert_eq!(self.dim(), other.dim(), "axpy: dimension mismatch");
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Index<usize> for VecN {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.comps[i]
    }
}

impl fmt::Display for VecN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

macro_rules! impl_vec_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&VecN> for &VecN {
            type Output = VecN;
            fn $m(self, rhs: &VecN) -> VecN {
                assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
                VecN::from_vec(self.comps.iter().zip(&rhs.comps).map(|(a, b)| a $op b).collect())
            }
        }
        impl $tr<VecN> for VecN {
            type Output = VecN;
            fn $m(self, rhs: VecN) -> VecN {
                (&self).$m(&rhs)
            }
        }
    };
}
impl_vec_binop!(Add, add, +);
impl_vec_binop!(Sub, sub, -);

impl AddAssign<&VecN> for VecN {
    fn add_assign(&mut self, rhs: &VecN) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&VecN> for VecN {
    fn sub_assign(&mut self, rhs: &VecN) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &VecN {
    type Output = VecN;
    fn mul(self, s: f64) -> VecN {
        self.scaled(s)
    }
}

impl Mul<f64> for VecN {
    type Output = VecN;
    fn mul(self, s: f64) -> VecN {
        self.scaled(s)
    }
}

impl Neg for &VecN {
    type Output = VecN;
    fn neg(self) -> VecN {
        self.scaled(-1.0)
    }
}

/// Number of independent bivector components in `dim` dimensions.
#[inline]
pub fn bivector_len(dim: usize) -> usize {
    dim * (dim.saturating_sub(1)) / 2
}

/// Storage index of the pair `(i, j)` with `i < j` (zero-based).
#[inline]
pub fn pair_index(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < dim);
    // rows 0..i contribute (dim-1) + (dim-2) + ... + (dim-i) entries
    i * (2 * dim - i - 1) / 2 + (j - i - 1)
}

/// Iterator over the canonical pairs `(i, j)`, `i < j`, in storage order.
pub fn pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |i| (i + 1..dim).map(move |j| (i, j)))
}

/// Label of a basis 2-blade, e.g. `e12` or `e3_11` once indices exceed 9.
pub fn pair_label(i: usize, j: usize) -> String {
    if j < 9 {
        format!("e{}{}", i + 1, j + 1)
    } else {
        format!("e{}_{}", i + 1, j + 1)
    }
}

/// Antisymmetric grade-2 element.
#[derive(Debug, Clone, PartialEq)]
pub struct BivecN {
    dim: usize,
    comps: Vec<f64>,
}

impl BivecN {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            comps: vec![0.0; bivector_len(dim)],
        }
    }

    pub fn new(dim: usize, comps: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if comps.len() != bivector_len(dim) {
            return Err(Error::DimensionMismatch {
                expected: bivector_len(dim),
                found: comps.len(),
            });
        }
        if let Some(i) = comps.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { dim, comps })
    }

    /// Basis blade `σ_i ∧ σ_j` (zero-based, `i != j`).
    pub fn basis(dim: usize, i: usize, j: usize) -> Self {
        let mut b = Self::zeros(dim);
        b.set(i, j, 1.0);
        b
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    /// `B_ij` with the antisymmetric extension; `B_ii = 0`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.comps[pair_index(self.dim, i, j)],
            std::cmp::Ordering::Greater => -self.comps[pair_index(self.dim, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.comps[pair_index(self.dim, i, j)] = value,
            std::cmp::Ordering::Greater => self.comps[pair_index(self.dim, j, i)] = -value,
            std::cmp::Ordering::Equal => panic!("bivector has no diagonal component ({i}, {i})"),
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.comps.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            comps: self.comps.iter().map(|c| c * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &BivecN) {
        assert_eq!(self.dim, other.dim, "axpy: dimension mismatch");
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            *a += s * b;
        }
    }

    /// Largest grade-4 component of `B ∧ B`. Zero exactly when `B` is a
    /// 2-blade, i.e. factors as a single wedge `x ∧ y`.
    pub fn blade_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in k + 1..n {
                        let w = self.get(i, j) * self.get(k, l) - self.get(i, k) * self.get(j, l)
                            + self.get(i, l) * self.get(j, k);
                        worst = worst.max(w.abs());
                    }
                }
            }
        }
        worst
    }

    /// Labeled components in storage order.
    pub fn labeled(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        pairs(self.dim)
            .zip(&self.comps)
            .map(|((i, j), &c)| (pair_label(i, j), c))
    }
}

impl Add<&BivecN> for &BivecN {
    type Output = BivecN;
    fn add(self, rhs: &BivecN) -> BivecN {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub<&BivecN> for &BivecN {
    type Output = BivecN;
    fn sub(self, rhs: &BivecN) -> BivecN {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &BivecN {
    type Output = BivecN;
    fn mul(self, s: f64) -> BivecN {
        self.scaled(s)
    }
}

impl Neg for &BivecN {
    type Output = BivecN;
    fn neg(self) -> BivecN {
        self.scaled(-1.0)
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn dot(a: &VecN, b: &VecN) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok(dot_unchecked(a, b))
}

#[inline]
pub(crate) fn dot_unchecked(a: &VecN, b: &VecN) -> f64 {
    a.comps.iter().zip(&b.comps).map(|(x, y)| x * y).sum()
}

/// Outer product: `(a ∧ b)_ij = a_i b_j - a_j b_i`.
pub fn wedge(a: &VecN, b: &VecN) -> Result<BivecN> {
    check_dims(a.dim(), b.dim())?;
    Ok(wedge_unchecked(a, b))
}

pub(crate) fn wedge_unchecked(a: &VecN, b: &VecN) -> BivecN {
    let n = a.dim();
    let comps = pairs(n).map(|(i, j)| a[i] * b[j] - a[j] * b[i]);
    #[cfg(feature = "fault-wedge-sign")]
    let comps = comps.map(|c| -c);
    BivecN {
        dim: n,
        comps: comps.collect(),
    }
}

/// Left contraction `a ⌋ B`, with `(a ⌋ B)_k = Σ_i a_i B_ik`.
pub fn left_contract(a: &VecN, b: &BivecN) -> Result<VecN> {
    check_dims(a.dim(), b.dim())?;
    let n = a.dim();
    let mut out = vec![0.0; n];
    for (i, j) in pairs(n) {
        let bij = b.comps[pair_index(n, i, j)];
        // B_ij contributes a_i B_ij to component j and a_j B_ji = -a_j B_ij to component i
        out[j] += a[i] * bij;
        out[i] -= a[j] * bij;
    }
    Ok(VecN::from_vec(out))
}

pub fn norm_vec(a: &VecN) -> f64 {
    a.norm()
}

pub fn norm_bivec(b: &BivecN) -> f64 {
    b.norm()
}
