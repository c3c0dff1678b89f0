//! Signals on F_p, dense operators on them, and functions on the
//! time-frequency plane.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Unit-norm tolerance for system members.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// A complex function on F_p, indexed by `t = 0..p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal(Vec<Complex64>);

impl Signal {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn zeros(p: usize) -> Self {
        Self(vec![ZERO; p])
    }

    /// Kronecker delta at `a`.
    pub fn delta(p: usize, a: usize) -> Self {
        let mut s = Self::zeros(p);
        s.0[a % p] = ONE;
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_NORM_TOL
    }

    /// Hermitian product `sum conj(self[t]) * other[t]`.
    pub fn inner(&self, other: &Signal) -> Complex64 {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, s: Complex64) -> Signal {
        Signal(self.0.iter().map(|z| z * s).collect())
    }

    pub fn normalized(&self) -> Result<Signal> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Signal) -> f64 {
        (self - other).norm()
    }
}

impl Index<usize> for Signal {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Signal {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Sub for &Signal {
    type Output = Signal;
    fn sub(self, rhs: &Signal) -> Signal {
        Signal(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for &Signal {
    type Output = Signal;
    fn add(self, rhs: &Signal) -> Signal {
        Signal(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<Complex64>> for Signal {
    fn from(v: Vec<Complex64>) -> Self {
        Signal(v)
    }
}

/// Dense `p x p` complex operator acting on signals.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<Complex64>);

impl Operator {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operators are square");
        Self(m)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(n, n, f))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn diagonal(d: &[Complex64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { ZERO })
    }

    /// Rank-one projector `|phi><phi|`.
    pub fn projector(phi: &Signal) -> Self {
        Self::from_fn(phi.len(), |i, j| phi[i] * phi[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn apply(&self, s: &Signal) -> Signal {
        let n = self.dim();
        assert_eq!(s.len(), n);
        let mut out = vec![ZERO; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for j in 0..n {
                acc += self.0[(i, j)] * s[j];
            }
            *o = acc;
        }
        Signal(out)
    }

    pub fn compose(&self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }

    pub fn adjoint(&self) -> Operator {
        Operator(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Operator {
        Operator(&self.0 * s)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |U U* - I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let uu = &self.0 * self.0.adjoint();
        self.max_abs_diff_matrix(&uu, &DMatrix::identity(self.dim(), self.dim()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    fn max_abs_diff_matrix(&self, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    /// Hilbert-Schmidt product `Tr(self* other)`.
    pub fn hs_inner(&self, other: &Operator) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// First entry in row-major order whose modulus exceeds `tol`.
    pub fn first_nonzero(&self, tol: f64) -> Option<Complex64> {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .find(|z| z.norm() > tol)
    }

    /// Best scalar `lambda` with `self ≈ lambda * other`, and the residual
    /// `max |self - lambda other|`.
    pub fn scalar_ratio(&self, other: &Operator) -> (Complex64, f64) {
        let denom = other.hs_inner(other);
        let lambda = other.hs_inner(self) / denom;
        let residual = self.max_abs_diff(&other.scale(lambda));
        (lambda, residual)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.compose(rhs)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

/// A complex function on the plane `V = F_p x F_p`, stored row-major with
/// `tau` as the row index and `w` as the column index.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceFunction {
    p: usize,
    values: Vec<Complex64>,
}

impl PhaseSpaceFunction {
    pub fn zeros(p: usize) -> Self {
        Self {
            p,
            values: vec![ZERO; p * p],
        }
    }

    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(p * p);
        for tau in 0..p {
            for w in 0..p {
                values.push(f(tau, w));
            }
        }
        Self { p, values }
    }

    /// The delta function at the origin of `V`.
    pub fn delta_origin(p: usize) -> Self {
        let mut f = Self::zeros(p);
        f.values[0] = ONE;
        f
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, tau: usize, w: usize) -> Complex64 {
        self.values[tau * self.p + w]
    }

    pub fn set(&mut self, tau: usize, w: usize, z: Complex64) {
        self.values[tau * self.p + w] = z;
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn max_abs_diff(&self, other: &PhaseSpaceFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &PhaseSpaceFunction {
    type Output = PhaseSpaceFunction;
    fn add(self, rhs: &PhaseSpaceFunction) -> PhaseSpaceFunction {
        PhaseSpaceFunction {
            p: self.p,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}
