//! Matrix Lie algebra arithmetic for 𝔤 ⊂ 𝔤𝔩(n,ℂ).
//!
//! Two algebras are supported:
//!
//! - **u(1)**, represented as the real scalars with vanishing commutator.
//!   An element is stored as a 1×1 matrix with real entry. This matches the
//!   identification 𝔤 = ℝ for the circle group and avoids complex storage
//!   in abelian runs.
//! - **su(n)**, the anti-Hermitian traceless n×n complex matrices.
//!
//! For su(2) the basis `T_a = -(i/2)σ_a` (Pauli matrices σ_a) is used
//! throughout, with the cyclic relations `[T₁,T₂] = T₃` etc. This fixes the
//! sign conventions for all tests.
//!
//! All operations are pure functions on immutable values and are safe to call
//! concurrently.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Relative Frobenius-norm tolerance for algebra membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Which matrix Lie algebra a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraKind {
    /// 𝔤 = ℝ as 1×1 real matrices; all commutators vanish.
    U1,
    /// Anti-Hermitian traceless n×n complex matrices.
    SuN,
}

/// An algebra together with its matrix dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgebraSpec {
    pub kind: AlgebraKind,
    pub n: usize,
}

impl AlgebraSpec {
    pub fn u1() -> Self {
        Self { kind: AlgebraKind::U1, n: 1 }
    }

    pub fn su(n: usize) -> Self {
        assert!(n >= 2, "su(n) requires n >= 2");
        Self { kind: AlgebraKind::SuN, n }
    }

    pub fn su2() -> Self {
        Self::su(2)
    }

    /// Number of complex matrix entries (n²).
    pub fn entry_count(&self) -> usize {
        self.n * self.n
    }

    /// Real dimension of the algebra: 1 for u(1), n²−1 for su(n).
    pub fn dim(&self) -> usize {
        match self.kind {
            AlgebraKind::U1 => 1,
            AlgebraKind::SuN => self.n * self.n - 1,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),
}

/// An n×n complex matrix, the value type of all fields.
///
/// Membership in a particular algebra (anti-Hermitian, traceless, real) is a
/// property checked by [`AlgebraElement::is_member`], not an enforced
/// invariant: intermediate quantities such as matrix products legitimately
/// leave the algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    n: usize,
    entries: Vec<Complex64>,
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Self {
        Self { n, entries: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_entries(n: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), n * n, "entry count must be n^2");
        Self { n, entries }
    }

    /// Real scalar as a u(1) element.
    pub fn scalar(x: f64) -> Self {
        Self { n: 1, entries: vec![Complex64::new(x, 0.0)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self { n: self.n, entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Self { n: self.n, entries }
    }

    pub fn scale(&self, c: f64) -> Self {
        let entries = self.entries.iter().map(|a| a * c).collect();
        Self { n: self.n, entries }
    }

    pub fn scale_complex(&self, c: Complex64) -> Self {
        let entries = self.entries.iter().map(|a| a * c).collect();
        Self { n: self.n, entries }
    }

    /// Matrix product XY.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.entries[i * n + k];
                for j in 0..n {
                    out.entries[i * n + j] += aik * other.entries[k * n + j];
                }
            }
        }
        out
    }

    /// Conjugate transpose X†.
    pub fn dagger(&self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.entries[i * self.n + i]).sum()
    }

    /// Frobenius norm sqrt(tr X†X).
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Orthogonal projection onto the algebra:
    /// u(1) keeps the real part, su(n) applies X ← (X − X†)/2 − (tr/n)·I.
    pub fn project_to(&self, spec: AlgebraSpec) -> Self {
        assert_eq!(self.n, spec.n);
        match spec.kind {
            AlgebraKind::U1 => Self::scalar(self.entries[0].re),
            AlgebraKind::SuN => {
                let n = self.n;
                let mut out = Self::zero(n);
                for i in 0..n {
                    for j in 0..n {
                        let x = self.entries[i * n + j];
                        let y = self.entries[j * n + i].conj();
                        out.entries[i * n + j] = (x - y) * 0.5;
                    }
                }
                let t = out.trace() / n as f64;
                for i in 0..n {
                    out.entries[i * n + i] -= t;
                }
                out
            }
        }
    }

    /// Distance to the algebra relative to the element's own norm.
    pub fn membership_defect(&self, spec: AlgebraSpec) -> f64 {
        let p = self.project_to(spec);
        let d = self.sub(&p).frobenius_norm();
        let scale = self.frobenius_norm();
        if scale == 0.0 {
            d
        } else {
            d / scale
        }
    }

    pub fn is_member(&self, spec: AlgebraSpec, tol: f64) -> bool {
        self.membership_defect(spec) <= tol
    }
}

/// Matrix commutator [X,Y] = XY − YX.
///
/// By closure of the algebra the result is again a member (exactly so for
/// u(1), where it vanishes identically).
pub fn commutator(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    if x.n != y.n {
        return Err(AlgebraError::DimensionMismatch(x.n, y.n));
    }
    Ok(x.mul(y).sub(&y.mul(x)))
}

/// Real inner product Re tr(X†Y); induced norm is the Frobenius norm.
pub fn frobenius_inner(x: &AlgebraElement, y: &AlgebraElement) -> Result<f64, AlgebraError> {
    if x.n != y.n {
        return Err(AlgebraError::DimensionMismatch(x.n, y.n));
    }
    let s: Complex64 = x
        .entries
        .iter()
        .zip(&y.entries)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(s.re)
}

/// Deterministic random draw satisfying the algebra invariants exactly by
/// construction, with ‖X‖ ≤ amplitude·n.
pub fn random_element(spec: AlgebraSpec, seed: u64, amplitude: f64) -> AlgebraElement {
    assert!(amplitude >= 0.0, "amplitude must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_element_with(spec, &mut rng, amplitude)
}

/// Same as [`random_element`], drawing from a caller-supplied stream.
pub fn random_element_with(
    spec: AlgebraSpec,
    rng: &mut impl Rng,
    amplitude: f64,
) -> AlgebraElement {
    if amplitude == 0.0 {
        // Keep the stream position independent of the amplitude.
        let _ = rng.gen::<f64>();
        return AlgebraElement::zero(spec.n);
    }
    match spec.kind {
        AlgebraKind::U1 => {
            let x: f64 = rng.gen_range(-1.0..1.0);
            AlgebraElement::scalar(amplitude * x)
        }
        AlgebraKind::SuN => {
            let n = spec.n;
            let mut raw = AlgebraElement::zero(n);
            for e in raw.entries.iter_mut() {
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                *e = Complex64::new(amplitude * re, amplitude * im);
            }
            let mut x = raw.project_to(spec);
            let bound = amplitude * n as f64;
            let norm = x.frobenius_norm();
            if norm > bound {
                x = x.scale(bound / norm);
            }
            x
        }
    }
}

/// The su(2) basis T_a = −(i/2)σ_a with [T₁,T₂] = T₃ cyclically.
pub fn su2_basis() -> [AlgebraElement; 3] {
    let i = Complex64::new(0.0, 1.0);
    let h = Complex64::new(0.5, 0.0);
    let z = Complex64::new(0.0, 0.0);
    // σ₁ = [[0,1],[1,0]], σ₂ = [[0,-i],[i,0]], σ₃ = [[1,0],[0,-1]]
    let t1 = AlgebraElement::from_entries(2, vec![z, -i * h, -i * h, z]);
    let t2 = AlgebraElement::from_entries(2, vec![z, -h, h, z]);
    let t3 = AlgebraElement::from_entries(2, vec![-i * h, z, z, i * h]);
    [t1, t2, t3]
}

/// An orthonormal basis of the algebra under Re tr(X†Y).
///
/// For su(n): the antisymmetric/symmetric off-diagonal pairs and the
/// traceless imaginary diagonals. For u(1): the scalar 1.
pub fn orthonormal_basis(spec: AlgebraSpec) -> Vec<AlgebraElement> {
    match spec.kind {
        AlgebraKind::U1 => vec![AlgebraElement::scalar(1.0)],
        AlgebraKind::SuN => {
            let n = spec.n;
            let i = Complex64::new(0.0, 1.0);
            let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let mut basis = Vec::with_capacity(n * n - 1);
            for p in 0..n {
                for q in (p + 1)..n {
                    let mut a = AlgebraElement::zero(n);
                    a.set_entry(p, q, inv_sqrt2);
                    a.set_entry(q, p, -inv_sqrt2);
                    basis.push(a);
                    let mut b = AlgebraElement::zero(n);
                    b.set_entry(p, q, i * inv_sqrt2);
                    b.set_entry(q, p, i * inv_sqrt2);
                    basis.push(b);
                }
            }
            for k in 1..n {
                let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
                let mut d = AlgebraElement::zero(n);
                for j in 0..k {
                    d.set_entry(j, j, i * norm);
                }
                d.set_entry(k, k, -i * (k as f64) * norm);
                basis.push(d);
            }
            basis
        }
    }
}

/// Matrix exponential by scaling-and-squaring with a Taylor series.
///
/// Intended for the small matrices of this crate (n ≤ 4 in practice).
pub fn mat_exp(x: &AlgebraElement) -> AlgebraElement {
    let norm = x.frobenius_norm();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = x.scale(0.5f64.powi(s as i32));
    let mut term = AlgebraElement::identity(x.n);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = term.mul(&scaled).scale(1.0 / k as f64);
        sum = sum.add(&term);
    }
    for _ in 0..s {
        sum = sum.mul(&sum);
    }
    sum
}

/// Project a near-unitary matrix back onto the unitary group by
/// Newton–Schulz iteration U ← U(3I − U†U)/2.
///
/// Converges quadratically for ‖U†U − I‖ < 1; two sweeps reduce an O(ε)
/// defect to O(ε⁴).
pub fn unitarize(u: &AlgebraElement, sweeps: usize) -> AlgebraElement {
    let n = u.n;
    let id3 = AlgebraElement::identity(n).scale(3.0);
    let mut v = u.clone();
    for _ in 0..sweeps {
        let g = id3.sub(&v.dagger().mul(&v));
        v = v.mul(&g).scale(0.5);
    }
    v
}
