//! Dense real vectors and linear maps with adjoints.
//!
//! Primal and dual vectors share the [`Vector`] type; the pairing between
//! them is the standard dot product.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector<S> {
    coords: Vec<S>,
}

impl<S: Scalar> Vector<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::filled(dim, S::zero())
    }

    pub fn filled(dim: usize, value: S) -> Self {
        Self {
            coords: vec![value; dim],
        }
    }

    /// Unit coordinate vector `scale * e_index`.
    pub fn basis(dim: usize, index: usize, scale: S) -> Self {
        let mut v = Self::zeros(dim);
        v.coords[index] = scale;
        v
    }

    pub fn from_f64(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| S::lit(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.coords
    }

    pub fn into_inner(self) -> Vec<S> {
        self.coords
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.coords.iter()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|x| x.to_f64_lossy()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|x| x.is_finite())
    }

    /// Fails unless every entry is finite.
    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            })
        }
    }

    /// Standard pairing `<self, other>`, accumulated with compensation.
    pub fn dot(&self, other: &Self) -> S {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = CompensatedSum::new();
        for (a, b) in self.coords.iter().zip(&other.coords) {
            acc.add(*a * *b);
        }
        acc.value()
    }

    pub fn try_dot(&self, other: &Self) -> Result<S> {
        other.check_dim(self.dim())?;
        Ok(self.dot(other))
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self::new(self.coords.iter().map(|&a| f(a)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: S) -> Self {
        self.map(|a| alpha * a)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: S, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + alpha * b)
    }

    /// The convex combination `(1 - theta) * self + theta * other`,
    /// computed as `self + theta * (other - self)`; `theta = 1` returns `other`
    /// exactly.
    pub fn lerp(&self, other: &Self, theta: S) -> Self {
        if theta == S::one() {
            other.clone()
        } else if theta == S::zero() {
            self.clone()
        } else {
            self.zip_map(other, |a, b| a + theta * (b - a))
        }
    }

    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    pub fn norm2(&self) -> S {
        self.norm_sq().sqrt()
    }

    pub fn norm1(&self) -> S {
        let mut acc = CompensatedSum::new();
        for a in &self.coords {
            acc.add(a.abs());
        }
        acc.value()
    }

    pub fn norm_inf(&self) -> S {
        self.coords
            .iter()
            .fold(S::zero(), |m, a| if a.abs() > m { a.abs() } else { m })
    }

    pub fn sum(&self) -> S {
        let mut acc = CompensatedSum::new();
        for a in &self.coords {
            acc.add(*a);
        }
        acc.value()
    }
}

impl<S> Index<usize> for Vector<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.coords[i]
    }
}

impl<S> IndexMut<usize> for Vector<S> {
    fn index_mut(&mut self, i: usize) -> &mut S {
        &mut self.coords[i]
    }
}

impl<S: Scalar> From<Vec<S>> for Vector<S> {
    fn from(coords: Vec<S>) -> Self {
        Self::new(coords)
    }
}

impl<S: Scalar> FromIterator<S> for Vector<S> {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// A linear map `A : E -> F` together with its adjoint `A* : F* -> E*`.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearMap<S> {
    Identity(usize),
    /// Row-major `rows x cols` matrix.
    Dense {
        rows: usize,
        cols: usize,
        data: Vec<S>,
    },
}

impl<S: Scalar> LinearMap<S> {
    pub fn dense(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self::Dense { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| S::lit(x)));
        }
        Self::dense(r, c, data)
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Self::Identity(n) => *n,
            Self::Dense { cols, .. } => *cols,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Self::Identity(n) => *n,
            Self::Dense { rows, .. } => *rows,
        }
    }

    /// Entry `(i, j)` of the matrix representation.
    pub fn entry(&self, i: usize, j: usize) -> S {
        match self {
            Self::Identity(_) => {
                if i == j {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Self::Dense { cols, data, .. } => data[i * cols + j],
        }
    }

    pub fn column(&self, j: usize) -> Vector<S> {
        (0..self.output_dim()).map(|i| self.entry(i, j)).collect()
    }

    pub fn apply(&self, x: &Vector<S>) -> Result<Vector<S>> {
        x.check_dim(self.input_dim())?;
        Ok(match self {
            Self::Identity(_) => x.clone(),
            Self::Dense { rows, cols, data } => (0..*rows)
                .map(|i| {
                    let mut acc = CompensatedSum::new();
                    for j in 0..*cols {
                        acc.add(data[i * cols + j] * x[j]);
                    }
                    acc.value()
                })
                .collect(),
        })
    }

    pub fn adjoint_apply(&self, u: &Vector<S>) -> Result<Vector<S>> {
        u.check_dim(self.output_dim())?;
        Ok(match self {
            Self::Identity(_) => u.clone(),
            Self::Dense { rows, cols, data } => (0..*cols)
                .map(|j| {
                    let mut acc = CompensatedSum::new();
                    for i in 0..*rows {
                        acc.add(data[i * cols + j] * u[i]);
                    }
                    acc.value()
                })
                .collect(),
        })
    }

    /// Row-major `f64` copy of the matrix representation.
    pub fn to_rows_f64(&self) -> Vec<Vec<f64>> {
        (0..self.output_dim())
            .map(|i| {
                (0..self.input_dim())
                    .map(|j| self.entry(i, j).to_f64_lossy())
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector<f64> {
        Vector::from_f64(x)
    }

    #[test]
    fn apply_examples() {
        let id = LinearMap::<f64>::Identity(2);
        assert_eq!(id.apply(&v(&[1.0, 2.0])).unwrap(), v(&[1.0, 2.0]));
        let diag = LinearMap::<f64>::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(diag.apply(&v(&[3.0, 4.0])).unwrap(), v(&[3.0, 8.0]));
        let row = LinearMap::<f64>::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(row.apply(&v(&[2.0, 5.0])).unwrap(), v(&[7.0]));
    }

    #[test]
    fn adjoint_examples() {
        let id = LinearMap::<f64>::Identity(2);
        assert_eq!(id.adjoint_apply(&v(&[1.0, 2.0])).unwrap(), v(&[1.0, 2.0]));
        let row = LinearMap::<f64>::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(row.adjoint_apply(&v(&[3.0])).unwrap(), v(&[3.0, 3.0]));
        let swap = LinearMap::<f64>::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(
            swap.adjoint_apply(&v(&[-1.5, 7.0])).unwrap(),
            v(&[7.0, -1.5])
        );
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let row = LinearMap::<f64>::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(
            row.apply(&v(&[1.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
        assert!(row.adjoint_apply(&v(&[1.0, 2.0])).is_err());
        assert!(LinearMap::<f64>::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn lerp_endpoints_are_exact() {
        let a = v(&[0.1, 0.7]);
        let b = v(&[0.3, -0.2]);
        assert_eq!(a.lerp(&b, 1.0), b);
        assert_eq!(a.lerp(&b, 0.0), a);
    }

    #[test]
    fn single_precision_matvec() {
        let m = LinearMap::<f32>::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let y = m.apply(&Vector::from_f64(&[1.0, 1.0])).unwrap();
        assert_eq!(y.as_slice(), &[3.0f32, 7.0]);
    }

    proptest! {
        #[test]
        fn adjoint_is_transpose(
            (rows, cols, data, x, u) in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| (
                Just(r),
                Just(c),
                proptest::collection::vec(-3.0f64..3.0, r * c),
                proptest::collection::vec(-3.0f64..3.0, c),
                proptest::collection::vec(-3.0f64..3.0, r),
            ))
        ) {
            let a = LinearMap::dense(rows, cols, data).unwrap();
            let x = Vector::new(x);
            let u = Vector::new(u);
            let lhs = a.apply(&x).unwrap().dot(&u);
            let rhs = x.dot(&a.adjoint_apply(&u).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
