//! Fixed-size 3-vector and 3x3 matrix types.
//!
//! Everything in the localization problem lives in three coordinates, so the
//! crate carries its own small dense types instead of a general linear
//! algebra dependency. The adjugate is exposed because the CRLB expansion is
//! written in terms of cofactors.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Reciprocal condition number below which a matrix is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self([x, y, z])
    }

    pub fn zeros() -> Self {
        Self([T::zero(); 3])
    }

    pub fn splat(v: T) -> Self {
        Self([v; 3])
    }

    pub fn x(&self) -> T {
        self.0[0]
    }

    pub fn y(&self) -> T {
        self.0[1]
    }

    pub fn z(&self) -> T {
        self.0[2]
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, k: T) -> Self {
        Self([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Outer product `self * other^T`.
    pub fn outer(&self, other: &Self) -> Mat3<T> {
        let mut m = Mat3::zeros();
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] = self.0[r] * other.0[c];
            }
        }
        m
    }

    pub fn cast<U: Real>(&self) -> Vec3<U> {
        Vec3(self.0.map(|v| U::lit(v.to_f64_lossy())))
    }

    /// Arithmetic mean, `None` for an empty iterator.
    pub fn mean<'a>(points: impl IntoIterator<Item = &'a Self>) -> Option<Self> {
        let mut acc = Self::zeros();
        let mut n = 0usize;
        for p in points {
            acc += *p;
            n += 1;
        }
        (n > 0).then(|| acc.scale(T::one() / T::from_usize_lossy(n)))
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|v| -v)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        self.scale(k)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    pub fn zeros() -> Self {
        Self([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diagonal(Vec3::splat(T::one()))
    }

    pub fn diagonal(d: Vec3<T>) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = d.0[i];
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.0[r][c]
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] = self.0[c][r];
            }
        }
        m
    }

    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn scale(&self, k: T) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v = *v * k);
        m
    }

    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        Vec3(std::array::from_fn(|r| {
            self.0[r][0] * v.0[0] + self.0[r][1] * v.0[1] + self.0[r][2] * v.0[2]
        }))
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let mut m = Self::zeros();
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] = (0..3).map(|k| self.0[r][k] * o.0[k][c]).sum();
            }
        }
        m
    }

    pub fn det(&self) -> T {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Transposed cofactor matrix; `self * adjugate = det * I`.
    pub fn adjugate(&self) -> Self {
        let a = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]
        };
        Self([
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ])
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes or is
    /// not finite.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(T::one() / det))
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> T {
        self.0.iter().flatten().map(|v| *v * *v).sum::<T>().sqrt()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        (0..3).all(|r| (0..3).all(|c| (self.0[r][c] - self.0[c][r]).abs() <= tol))
    }

    /// Eigenvalues of a symmetric matrix in ascending order (closed-form
    /// trigonometric solution of the characteristic cubic).
    pub fn symmetric_eigenvalues(&self) -> [T; 3] {
        let a = &self.0;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let q = self.trace() / three;
        let mut ev = if p1 == T::zero() {
            [a[0][0], a[1][1], a[2][2]]
        } else {
            let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2)
                + two * p1;
            let p = (p2 / T::lit(6.0)).sqrt();
            if p == T::zero() {
                [q; 3]
            } else {
                let b = (*self - Self::identity().scale(q)).scale(T::one() / p);
                let r = (b.det() / two).max(-T::one()).min(T::one());
                let phi = r.acos() / three;
                let e1 = q + two * p * phi.cos();
                let e3 = q + two * p * (phi + two * T::PI() / three).cos();
                [e1, three * q - e1 - e3, e3]
            }
        };
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    pub fn cast<U: Real>(&self) -> Mat3<U> {
        Mat3(self.0.map(|row| row.map(|v| U::lit(v.to_f64_lossy()))))
    }
}

impl<T: Real> Add for Mat3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut m = self;
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] = m.0[r][c] + o.0[r][c];
            }
        }
        m
    }
}

impl<T: Real> AddAssign for Mat3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Mat3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + o.scale(-T::one())
    }
}

/// Subset of the coordinate axes that are estimated.
///
/// A degenerate AOI interval (for example a ground emitter with known `z`)
/// removes that axis from the search; matrices are then handled on the
/// active sub-block only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axes(pub [bool; 3]);

impl Axes {
    pub const ALL: Axes = Axes([true; 3]);

    pub fn count(&self) -> usize {
        self.0.iter().filter(|a| **a).count()
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(move |i| self.0[*i])
    }

    /// Zeroes the components on inactive axes.
    pub fn project<T: Real>(&self, v: &Vec3<T>) -> Vec3<T> {
        Vec3(std::array::from_fn(|i| if self.0[i] { v.0[i] } else { T::zero() }))
    }

    /// Zeroes the rows and columns of inactive axes.
    pub fn restrict<T: Real>(&self, m: &Mat3<T>) -> Mat3<T> {
        let mut out = Mat3::zeros();
        for r in self.indices() {
            for c in self.indices() {
                out.0[r][c] = m.0[r][c];
            }
        }
        out
    }

    /// Inverse of the active sub-block of a symmetric matrix, embedded back
    /// into 3x3 with zeros on inactive rows and columns. Returns `None` when
    /// the sub-block is singular (reciprocal condition below
    /// [`SINGULAR_RCOND`]) or no axis is active.
    pub fn restricted_inverse<T: Real>(&self, m: &Mat3<T>) -> Option<Mat3<T>> {
        if self.count() == 0 {
            return None;
        }
        let padded = self.pad_inactive(m);
        let rcond = self.reciprocal_condition(m)?;
        if rcond < T::lit(SINGULAR_RCOND) {
            return None;
        }
        padded.inverse().map(|inv| self.restrict(&inv))
    }

    /// Smallest over largest eigenvalue of the active block (symmetric input).
    /// `None` if the largest eigenvalue is not positive.
    pub fn reciprocal_condition<T: Real>(&self, m: &Mat3<T>) -> Option<T> {
        let ev = self.block_eigenvalues(m);
        let hi = ev.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = ev.iter().copied().fold(T::infinity(), T::min);
        (hi > T::zero() && hi.is_finite()).then(|| lo / hi)
    }

    /// Eigenvalues of the active sub-block of a symmetric matrix.
    pub fn block_eigenvalues<T: Real>(&self, m: &Mat3<T>) -> Vec<T> {
        let idx: Vec<usize> = self.indices().collect();
        match idx.as_slice() {
            [] => Vec::new(),
            [i] => vec![m.0[*i][*i]],
            [i, j] => {
                let (a, b, d) = (m.0[*i][*i], m.0[*i][*j], m.0[*j][*j]);
                let half = T::lit(0.5);
                let mean = (a + d) * half;
                let rad = (((a - d) * half).powi(2) + b * b).sqrt();
                vec![mean - rad, mean + rad]
            }
            _ => m.symmetric_eigenvalues().to_vec(),
        }
    }

    fn pad_inactive<T: Real>(&self, m: &Mat3<T>) -> Mat3<T> {
        let mut padded = self.restrict(m);
        for i in 0..3 {
            if !self.0[i] {
                padded.0[i][i] = T::one();
            }
        }
        padded
    }
}
