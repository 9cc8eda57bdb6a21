//! Dense complex matrices and the single-transition operator algebra.
//!
//! Every operator in the simulator is a small (dim ≤ 16) dense complex
//! matrix.  This module provides the carrier type, a complex Hermitian
//! Jacobi eigensolver, matrix exponentials, the fictitious spin-1/2
//! operators `I_x/I_y/I_z` of a level pair, rotations generated by them,
//! and unitary comparison up to a global phase.
//!
//! Sign conventions used throughout the crate:
//! - a rotation propagator is `exp(-iθ·G)` where `G` is the (Hermitian)
//!   generator;
//! - a pulse of phase `p` rotates about the axis
//!   `cos(p)·I_x + sin(p)·I_y`, so `p = π/2` is a rotation about +y;
//! - the lower level `r` of a pair `(r, s)` plays the role of `|0⟩` and
//!   sits at the north pole of the subspace Bloch sphere.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Shorthand constructor re-exported for downstream crates that do
/// not depend on `num-complex` directly.
pub fn complex(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Cartesian axis of a single-transition operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// An ordered pair of levels `(r, s)` with `r < s < dim`, treated as a
/// fictitious spin-1/2 subspace of a `dim`-level system.
///
/// Levels are indexed from 0 internally; user-facing text adds 1 so the
/// labels match the customary energy-level diagrams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspacePair {
    pub r: usize,
    pub s: usize,
    pub dim: usize,
}

impl SubspacePair {
    pub fn new(r: usize, s: usize, dim: usize) -> Result<Self> {
        if r < s && s < dim {
            Ok(Self { r, s, dim })
        } else {
            Err(Error::InvalidPair { r, s, dim })
        }
    }
}

/// Square dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = Complex64::ONE;
        }
        m
    }

    pub fn from_diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (k, &e) in entries.iter().enumerate() {
            m[(k, k)] = e;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|e| e * factor).collect(),
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, e| {
            let n = e.norm();
            if n > acc {
                n
            } else {
                acc
            }
        })
    }

    /// Largest entry-wise difference `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| {
                let n = (a - b).norm();
                if n > acc {
                    n
                } else {
                    acc
                }
            })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for r in 0..self.dim {
            for c in r..self.dim {
                if (self[(r, c)] - self[(c, r)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = self.dagger().mul_ref(self);
        prod.max_abs_diff(&Self::identity(self.dim)) <= tol
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|e| e.re.is_finite() && e.im.is_finite())
    }

    pub fn mul_ref(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }

    pub fn add_ref(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub_ref(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let n = self.dim;
        let m = rhs.dim;
        let mut out = Self::zeros(n * m);
        for ar in 0..n {
            for ac in 0..n {
                let a = self[(ar, ac)];
                if a == Complex64::ZERO {
                    continue;
                }
                for br in 0..m {
                    for bc in 0..m {
                        out[(ar * m + br, ac * m + bc)] = a * rhs[(br, bc)];
                    }
                }
            }
        }
        out
    }

    /// Basis change `U† · self · U`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.dagger().mul_ref(self).mul_ref(u)
    }

    /// Sandwich transform `U · self · U†`.
    pub fn sandwich(&self, u: &Self) -> Self {
        u.mul_ref(self).mul_ref(&u.dagger())
    }

    /// Apply the matrix to a state vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![Complex64::ZERO; self.dim];
        for r in 0..self.dim {
            let mut acc = Complex64::ZERO;
            for c in 0..self.dim {
                acc += self[(r, c)] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = Complex64::ZERO;
        for r in 0..self.dim {
            for c in 0..self.dim {
                acc += self[(r, c)] * other[(c, r)];
            }
        }
        acc
    }
}

impl core::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl core::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.mul_ref(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.add_ref(rhs)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.sub_ref(rhs)
    }
}

/// Single-transition Cartesian operator `I_axis` of the pair `(r, s)`.
///
/// Entries: x puts +1/2 at `(r,s)` and `(s,r)`; y puts −i/2 at `(r,s)`
/// and +i/2 at `(s,r)`; z puts +1/2 at `(r,r)` and −1/2 at `(s,s)`.
/// Everything else is zero, so the operator acts only inside the pair.
pub fn single_transition_op(dim: usize, pair: SubspacePair, axis: Axis) -> Result<ComplexMatrix> {
    if pair.dim != dim {
        return Err(Error::DimensionMismatch {
            left: pair.dim,
            right: dim,
        });
    }
    if pair.r >= pair.s || pair.s >= dim {
        return Err(Error::InvalidPair {
            r: pair.r,
            s: pair.s,
            dim,
        });
    }
    let mut m = ComplexMatrix::zeros(dim);
    let (r, s) = (pair.r, pair.s);
    match axis {
        Axis::X => {
            m[(r, s)] = Complex64::new(0.5, 0.0);
            m[(s, r)] = Complex64::new(0.5, 0.0);
        }
        Axis::Y => {
            m[(r, s)] = Complex64::new(0.0, -0.5);
            m[(s, r)] = Complex64::new(0.0, 0.5);
        }
        Axis::Z => {
            m[(r, r)] = Complex64::new(0.5, 0.0);
            m[(s, s)] = Complex64::new(-0.5, 0.0);
        }
    }
    Ok(m)
}

/// `AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(&a.mul_ref(b) - &b.mul_ref(a))
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.  Returns `(eigenvalues, V)` with `A = V · diag(λ) · V†`;
/// eigenvalues are unsorted (in the order the pivots leave them).
pub fn eigh_hermitian(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.dim();
    let mut m = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.max_abs().max(1e-300);

    let off = |m: &ComplexMatrix| -> f64 {
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    acc += m[(r, c)].norm_sqr();
                }
            }
        }
        libm::sqrt(acc)
    };

    for _sweep in 0..60 {
        if off(&m) <= 1e-14 * scale * n as f64 {
            let vals = (0..n).map(|k| m[(k, k)].re).collect();
            return Ok((vals, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // 2x2 Hermitian rotation zeroing the (p,q) element.
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = phase * (t * c);

                // Columns: new_p = c·p − s̄·q ; new_q = s·p + c·q
                for r in 0..n {
                    let mp = m[(r, p)];
                    let mq = m[(r, q)];
                    m[(r, p)] = mp * c - mq * s.conj();
                    m[(r, q)] = mp * s + mq * c;
                }
                for cidx in 0..n {
                    let mp = m[(p, cidx)];
                    let mq = m[(q, cidx)];
                    m[(p, cidx)] = mp * c - mq * s;
                    m[(q, cidx)] = mp * s.conj() + mq * c;
                }
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = vp * c - vq * s.conj();
                    v[(r, q)] = vp * s + vq * c;
                }
            }
        }
    }
    Err(Error::NoConvergence)
}

fn one_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut worst = 0.0;
    for c in 0..n {
        let mut col = 0.0;
        for r in 0..n {
            col += a[(r, c)].norm();
        }
        if col > worst {
            worst = col;
        }
    }
    worst
}

/// Matrix exponential.
///
/// Hermitian and skew-Hermitian inputs (the only ones produced by pulse
/// and evolution generators) go through the Jacobi eigendecomposition,
/// so `exp(-iθG)` of a Hermitian `G` is unitary to machine precision.
/// Anything else falls back to scaling-and-squaring with a Taylor
/// series.
pub fn mat_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.all_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.dim();
    let scale = a.max_abs();
    let herm_tol = 1e-12 * scale.max(1.0);

    if a.is_hermitian(herm_tol) {
        let (vals, v) = eigh_hermitian(a)?;
        let d: Vec<Complex64> = vals.iter().map(|&l| Complex64::new(libm::exp(l), 0.0)).collect();
        return Ok(v.mul_ref(&ComplexMatrix::from_diag(&d)).mul_ref(&v.dagger()));
    }
    // skew-Hermitian A: iA is Hermitian and exp(A) = V e^{-iλ} V†.
    let ia = a.scale(Complex64::I);
    if ia.is_hermitian(herm_tol) {
        let (vals, v) = eigh_hermitian(&ia)?;
        let d: Vec<Complex64> = vals
            .iter()
            .map(|&l| Complex64::new(libm::cos(l), -libm::sin(l)))
            .collect();
        return Ok(v.mul_ref(&ComplexMatrix::from_diag(&d)).mul_ref(&v.dagger()));
    }

    // General fallback: scale so the norm is ≤ 0.5, Taylor, square back.
    let norm = one_norm(a);
    let mut squarings = 0u32;
    let mut scaled = a.clone();
    if norm > 0.5 {
        squarings = libm::ceil(libm::log2(norm / 0.5)) as u32;
        let factor = Complex64::new(libm::exp2(-(squarings as f64)), 0.0);
        scaled = a.scale(factor);
    }
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=24 {
        term = term.mul_ref(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
        result = result.add_ref(&term);
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.mul_ref(&result);
    }
    Ok(result)
}

/// Rotation of a two-level subspace: `exp(-iθ·(cos(φ_ax)·I_x + sin(φ_ax)·I_y))`
/// on the pair, identity elsewhere.  Built in closed form.
pub fn subspace_rotation(
    dim: usize,
    pair: SubspacePair,
    angle: f64,
    axis_phase: f64,
) -> Result<ComplexMatrix> {
    if pair.dim != dim {
        return Err(Error::DimensionMismatch {
            left: pair.dim,
            right: dim,
        });
    }
    if pair.r >= pair.s || pair.s >= dim {
        return Err(Error::InvalidPair {
            r: pair.r,
            s: pair.s,
            dim,
        });
    }
    if !angle.is_finite() || !axis_phase.is_finite() {
        return Err(Error::NonFinite);
    }
    let half = angle / 2.0;
    let (ch, sh) = (libm::cos(half), libm::sin(half));
    let mut u = ComplexMatrix::identity(dim);
    let (r, s) = (pair.r, pair.s);
    u[(r, r)] = Complex64::new(ch, 0.0);
    u[(s, s)] = Complex64::new(ch, 0.0);
    // off-diagonal block of exp(-iθ n̂·I): -i sin(θ/2) e^{∓i φ_ax}
    u[(r, s)] = Complex64::new(0.0, -sh) * Complex64::cis(-axis_phase);
    u[(s, r)] = Complex64::new(0.0, -sh) * Complex64::cis(axis_phase);
    Ok(u)
}

/// True when `A = c·B` for some unit complex `c`, entry-wise within
/// `tol`.  The reference entry fixing `c` is the largest-magnitude entry
/// of `B`; ties break toward the lowest `(row, col)`.
pub fn equal_up_to_global_phase(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let n = b.dim();
    let mut best = 0.0;
    let mut best_idx = None;
    for r in 0..n {
        for c in 0..n {
            let mag = b[(r, c)].norm();
            if mag > best {
                best = mag;
                best_idx = Some((r, c));
            }
        }
    }
    let Some((r, c)) = best_idx else {
        return Err(Error::ZeroReference);
    };
    let a_ref = a[(r, c)];
    if a_ref.norm() < 1e-300 {
        // no unit phase can map a nonzero entry onto zero
        return Ok(false);
    }
    let phase = a_ref / b[(r, c)];
    let phase = phase / phase.norm();
    Ok(a.max_abs_diff(&b.scale(phase)) <= tol)
}
