//! Periodic 3-torus discretization and Fourier-multiplier calculus.
//!
//! Fields live on the torus [0,2π)³ sampled on an N³ grid (N even, N ≥ 8)
//! with integer frequencies ξ ∈ {−N/2+1, …, N/2}³. The discrete transform
//! convention is
//!
//! ```text
//!   û(ξ) = N⁻³ Σ_x u(x) e^{−iξ·x},      u(x) = Σ_ξ û(ξ) e^{iξ·x},
//! ```
//!
//! so a single mode e^{iξ·x} has coefficient exactly 1 and Parseval reads
//! Σ_x |u|²/N³ = Σ_ξ |û|².
//!
//! Zero-mode convention: the singular multipliers |∇|⁻¹, Rᵢ and (−Δ)⁻¹
//! annihilate the ξ = 0 coefficient; ⟨∇⟩^s = (1+|ξ|²)^{s/2} is regular
//! everywhere. Identities involving the singular operators therefore hold
//! on zero-mean fields.
//!
//! Pointwise (matrix) products are dealiased by zero-padding to 3N/2 points
//! per axis: products of two fields supported in the retained band
//! {−N/2+1,…,N/2} are then exact after truncation back to the grid.

use crate::lie_algebra::{AlgebraElement, AlgebraKind, AlgebraSpec};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// Torus volume (2π)³, the measure used by all L²-type norms.
pub const TORUS_VOLUME: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("grid size {0} must be even and at least 8")]
    BadSize(usize),
    #[error("grid mismatch: {0} vs {1} points per axis")]
    GridMismatch(usize, usize),
    #[error("algebra mismatch between operands")]
    AlgebraMismatch,
    #[error("field is in the {0:?} representation, expected {1:?}")]
    WrongRepresentation(Representation, Representation),
}

/// The N³ periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self, GridError> {
        if n < 8 || n % 2 != 0 {
            return Err(GridError::BadSize(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total sample count N³.
    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Frequency of a storage index along one axis: idx ≤ N/2 maps to +idx,
    /// larger indices wrap to idx − N. The frequency set is {−N/2+1,…,N/2}.
    pub fn freq_of_index(&self, idx: usize) -> i64 {
        if idx <= self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    pub fn index_of_freq(&self, f: i64) -> usize {
        let n = self.n as i64;
        (((f % n) + n) % n) as usize
    }

    pub fn max_freq(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Flat storage index of a frequency triple (x fastest).
    pub fn flat_index(&self, f: [i64; 3]) -> usize {
        let ix = self.index_of_freq(f[0]);
        let iy = self.index_of_freq(f[1]);
        let iz = self.index_of_freq(f[2]);
        ix + self.n * (iy + self.n * iz)
    }

    /// Frequency triple of a flat storage index.
    pub fn freq_of_flat(&self, g: usize) -> [i64; 3] {
        let ix = g % self.n;
        let iy = (g / self.n) % self.n;
        let iz = g / (self.n * self.n);
        [
            self.freq_of_index(ix),
            self.freq_of_index(iy),
            self.freq_of_index(iz),
        ]
    }

    /// Physical coordinates of a flat sample index.
    pub fn point_of_flat(&self, g: usize) -> [f64; 3] {
        let h = 2.0 * std::f64::consts::PI / self.n as f64;
        let ix = g % self.n;
        let iy = (g / self.n) % self.n;
        let iz = g / (self.n * self.n);
        [ix as f64 * h, iy as f64 * h, iz as f64 * h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// A 𝔤-valued function on the grid, stored entry-major:
/// `data[e * points + g]` is matrix entry `e` (row-major) at grid index `g`
/// (x fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub algebra: AlgebraSpec,
    pub repr: Representation,
    /// If set, all spectral coefficients with |ξ|∞ > K vanish.
    pub band_limit: Option<usize>,
    data: Vec<Complex64>,
}

/// Fourier multipliers used throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierKind {
    /// |∇|⁻¹ = (−Δ)^{−1/2}: 1/|ξ|, zero mode annihilated.
    InvLen,
    /// Riesz transform Rᵢ = |∇|⁻¹∂ᵢ: iξᵢ/|ξ|, zero mode annihilated.
    Riesz(usize),
    /// ⟨∇⟩^s: (1+|ξ|²)^{s/2}.
    BesselPow(f64),
    /// (−Δ)⁻¹: 1/|ξ|², zero mode annihilated.
    InvLaplace,
}

fn fft_for(len: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)>> =
        OnceLock::new();
    let m = PLANS.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = m.lock().unwrap();
    let key = (len, matches!(dir, FftDirection::Forward));
    if let Some(p) = guard.1.get(&key) {
        return p.clone();
    }
    let plan = guard.0.plan_fft(len, dir);
    guard.1.insert(key, plan.clone());
    plan
}

/// In-place 3D FFT of one scalar component on an m³ grid (x fastest).
/// Forward applies the 1/m³ normalization; inverse is unnormalized.
fn fft3_inplace(data: &mut [Complex64], m: usize, dir: Direction) {
    debug_assert_eq!(data.len(), m * m * m);
    let fft = fft_for(
        m,
        match dir {
            Direction::Forward => FftDirection::Forward,
            Direction::Inverse => FftDirection::Inverse,
        },
    );
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    // x lines are contiguous
    for line in data.chunks_exact_mut(m) {
        fft.process_with_scratch(line, &mut scratch);
    }
    // y lines, stride m
    let mut buf = vec![Complex64::default(); m];
    for iz in 0..m {
        for ix in 0..m {
            let base = ix + m * m * iz;
            for iy in 0..m {
                buf[iy] = data[base + m * iy];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for iy in 0..m {
                data[base + m * iy] = buf[iy];
            }
        }
    }
    // z lines, stride m²
    for iy in 0..m {
        for ix in 0..m {
            let base = ix + m * iy;
            for iz in 0..m {
                buf[iz] = data[base + m * m * iz];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for iz in 0..m {
                data[base + m * m * iz] = buf[iz];
            }
        }
    }
    if matches!(dir, Direction::Forward) {
        let scale = 1.0 / (m * m * m) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

impl SpectralField {
    pub fn zero(grid: GridSpec, algebra: AlgebraSpec, repr: Representation) -> Self {
        Self {
            grid,
            algebra,
            repr,
            band_limit: None,
            data: vec![Complex64::default(); algebra.entry_count() * grid.points()],
        }
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Storage slice of one matrix entry.
    pub fn entry_slice(&self, e: usize) -> &[Complex64] {
        let p = self.grid.points();
        &self.data[e * p..(e + 1) * p]
    }

    pub fn entry_slice_mut(&mut self, e: usize) -> &mut [Complex64] {
        let p = self.grid.points();
        &mut self.data[e * p..(e + 1) * p]
    }

    /// The matrix value at a flat grid/coefficient index.
    pub fn value_at(&self, g: usize) -> AlgebraElement {
        let n = self.algebra.n;
        let p = self.grid.points();
        let mut entries = Vec::with_capacity(n * n);
        for e in 0..n * n {
            entries.push(self.data[e * p + g]);
        }
        AlgebraElement::from_entries(n, entries)
    }

    pub fn set_value_at(&mut self, g: usize, v: &AlgebraElement) {
        let p = self.grid.points();
        for (e, x) in v.entries().iter().enumerate() {
            self.data[e * p + g] = *x;
        }
    }

    /// Spectral coefficient at frequency ξ (requires spectral representation).
    pub fn coeff(&self, f: [i64; 3]) -> AlgebraElement {
        debug_assert_eq!(self.repr, Representation::Spectral);
        self.value_at(self.grid.flat_index(f))
    }

    pub fn set_coeff(&mut self, f: [i64; 3], v: &AlgebraElement) {
        debug_assert_eq!(self.repr, Representation::Spectral);
        self.set_value_at(self.grid.flat_index(f), v)
    }

    pub fn same_shape(&self, other: &Self) -> Result<(), GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch(self.grid.n, other.grid.n));
        }
        if self.algebra != other.algebra {
            return Err(GridError::AlgebraMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.repr, other.repr);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out.band_limit = match (self.band_limit, other.band_limit) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.repr, other.repr);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out.band_limit = match (self.band_limit, other.band_limit) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn scale_complex(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    /// self += c · other
    pub fn axpy(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.repr, other.repr);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        self.band_limit = match (self.band_limit, other.band_limit) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        };
    }

    /// L² norm with the (2π)³ measure: ‖u‖² = ∫ ‖u(x)‖²_F dx.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|v| v.norm_sqr()).sum();
        match self.repr {
            Representation::Spectral => (TORUS_VOLUME * sum).sqrt(),
            Representation::Physical => (TORUS_VOLUME * sum / self.grid.points() as f64).sqrt(),
        }
    }

    /// Sobolev norm ‖⟨∇⟩^s u‖_{L²} (requires spectral representation).
    pub fn hs_norm(&self, s: f64) -> f64 {
        assert_eq!(self.repr, Representation::Spectral);
        let p = self.grid.points();
        let mut sum = 0.0;
        for g in 0..p {
            let f = self.grid.freq_of_flat(g);
            let k2 = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]) as f64;
            let w = (1.0 + k2).powf(s);
            let mut s2 = 0.0;
            for e in 0..self.algebra.entry_count() {
                s2 += self.data[e * p + g].norm_sqr();
            }
            sum += w * s2;
        }
        (TORUS_VOLUME * sum).sqrt()
    }

    /// Zero-frequency coefficient (the spatial mean).
    pub fn mean(&self) -> AlgebraElement {
        match self.repr {
            Representation::Spectral => self.coeff([0, 0, 0]),
            Representation::Physical => {
                let p = self.grid.points();
                let n = self.algebra.n;
                let mut entries = Vec::with_capacity(n * n);
                for e in 0..n * n {
                    let s: Complex64 = self.entry_slice(e).iter().sum();
                    entries.push(s / p as f64);
                }
                AlgebraElement::from_entries(n, entries)
            }
        }
    }

    pub fn project_zero_mean(&mut self) {
        assert_eq!(self.repr, Representation::Spectral);
        let zero = AlgebraElement::zero(self.algebra.n);
        self.set_coeff([0, 0, 0], &zero);
    }

    /// Zero all coefficients with |ξ|∞ > k and record the band limit.
    pub fn apply_band_limit(&mut self, k: usize) {
        assert_eq!(self.repr, Representation::Spectral);
        let p = self.grid.points();
        for g in 0..p {
            let f = self.grid.freq_of_flat(g);
            if f.iter().any(|&c| c.unsigned_abs() as usize > k) {
                for e in 0..self.algebra.entry_count() {
                    self.data[e * p + g] = Complex64::default();
                }
            }
        }
        self.band_limit = Some(k);
    }
}

/// Discrete Fourier transform of each matrix entry.
///
/// The representation flag must match the direction; round trips reproduce
/// the input to ~1e−15 relative.
pub fn transform(field: &SpectralField, direction: Direction) -> Result<SpectralField, GridError> {
    let expected = match direction {
        Direction::Forward => Representation::Physical,
        Direction::Inverse => Representation::Spectral,
    };
    if field.repr != expected {
        return Err(GridError::WrongRepresentation(field.repr, expected));
    }
    let mut out = field.clone();
    let m = field.grid.n;
    let p = field.grid.points();
    out.data
        .par_chunks_exact_mut(p)
        .for_each(|chunk| fft3_inplace(chunk, m, direction));
    out.repr = match direction {
        Direction::Forward => Representation::Spectral,
        Direction::Inverse => Representation::Physical,
    };
    Ok(out)
}

/// The field in spectral representation (transforming if necessary).
pub fn to_spectral(field: &SpectralField) -> SpectralField {
    match field.repr {
        Representation::Spectral => field.clone(),
        Representation::Physical => transform(field, Direction::Forward).unwrap(),
    }
}

/// The field in physical representation (transforming if necessary).
pub fn to_physical(field: &SpectralField) -> SpectralField {
    match field.repr {
        Representation::Physical => field.clone(),
        Representation::Spectral => transform(field, Direction::Inverse).unwrap(),
    }
}

/// Apply a scalar Fourier multiplier σ(ξ) to every matrix entry.
pub fn apply_multiplier(
    field: &SpectralField,
    symbol: impl Fn([i64; 3]) -> Complex64,
) -> SpectralField {
    let mut out = to_spectral(field);
    let p = out.grid.points();
    let factors: Vec<Complex64> = (0..p).map(|g| symbol(out.grid.freq_of_flat(g))).collect();
    for e in 0..out.algebra.entry_count() {
        let slice = out.entry_slice_mut(e);
        for (v, f) in slice.iter_mut().zip(&factors) {
            *v *= f;
        }
    }
    out
}

pub fn multiplier_symbol(kind: MultiplierKind, f: [i64; 3]) -> Complex64 {
    let k2 = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]) as f64;
    match kind {
        MultiplierKind::InvLen => {
            if k2 == 0.0 {
                Complex64::default()
            } else {
                Complex64::new(1.0 / k2.sqrt(), 0.0)
            }
        }
        MultiplierKind::Riesz(i) => {
            if k2 == 0.0 {
                Complex64::default()
            } else {
                Complex64::new(0.0, f[i] as f64 / k2.sqrt())
            }
        }
        MultiplierKind::BesselPow(s) => Complex64::new((1.0 + k2).powf(s / 2.0), 0.0),
        MultiplierKind::InvLaplace => {
            if k2 == 0.0 {
                Complex64::default()
            } else {
                Complex64::new(1.0 / k2, 0.0)
            }
        }
    }
}

/// One of the standard multipliers |∇|⁻¹, Rᵢ, ⟨∇⟩^s, (−Δ)⁻¹.
pub fn standard_multiplier(kind: MultiplierKind, field: &SpectralField) -> SpectralField {
    apply_multiplier(field, |f| multiplier_symbol(kind, f))
}

/// Spectral spatial derivative ∂ᵢ (multiplier iξᵢ).
pub fn spatial_derivative(axis: usize, field: &SpectralField) -> SpectralField {
    assert!(axis < 3);
    apply_multiplier(field, |f| Complex64::new(0.0, f[axis] as f64))
}

/// Padded physical-space samples on the (3N/2)³ grid, used to evaluate
/// dealiased pointwise products. Entry-major like [`SpectralField`].
#[derive(Debug, Clone)]
pub struct PaddedField {
    pub m: usize,
    pub algebra: AlgebraSpec,
    data: Vec<Complex64>,
}

pub fn padded_size(grid: GridSpec) -> usize {
    3 * grid.n / 2
}

impl PaddedField {
    pub fn zero(grid: GridSpec, algebra: AlgebraSpec) -> Self {
        let m = padded_size(grid);
        Self {
            m,
            algebra,
            data: vec![Complex64::default(); algebra.entry_count() * m * m * m],
        }
    }

    pub fn points(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn entry_slice(&self, e: usize) -> &[Complex64] {
        let p = self.points();
        &self.data[e * p..(e + 1) * p]
    }

    pub fn entry_slice_mut(&mut self, e: usize) -> &mut [Complex64] {
        let p = self.points();
        &mut self.data[e * p..(e + 1) * p]
    }
}

/// Zero-pad a spectral field onto the 3N/2 grid and transform to physical
/// samples there.
pub fn pad_to_physical(field: &SpectralField) -> PaddedField {
    let spec = to_spectral(field);
    let grid = spec.grid;
    let m = padded_size(grid);
    let mp = m * m * m;
    let p = grid.points();
    let mut out = PaddedField::zero(grid, spec.algebra);
    // scatter coefficients at their frequencies on the big grid
    let mut index_map = Vec::with_capacity(p);
    for g in 0..p {
        let f = grid.freq_of_flat(g);
        let ix = ((f[0] + m as i64) % m as i64) as usize;
        let iy = ((f[1] + m as i64) % m as i64) as usize;
        let iz = ((f[2] + m as i64) % m as i64) as usize;
        index_map.push(ix + m * (iy + m * iz));
    }
    out.data
        .par_chunks_exact_mut(mp)
        .enumerate()
        .for_each(|(e, chunk)| {
            let src = &spec.data[e * p..(e + 1) * p];
            for (g, &tgt) in index_map.iter().enumerate() {
                chunk[tgt] = src[g];
            }
            fft3_inplace(chunk, m, Direction::Inverse);
        });
    out
}

/// Transform padded physical samples back and truncate to the grid band.
///
/// The retained product band is |ξ|∞ ≤ N/2 − 1: the lone +N/2 slot has no
/// −N/2 partner on the grid, so a product coefficient there can neither be
/// represented faithfully for algebra-valued fields nor protected by the
/// 2/3 rule. That plane is projected out.
pub fn padded_to_spectral(p: &PaddedField, grid: GridSpec) -> SpectralField {
    let m = p.m;
    debug_assert_eq!(m, padded_size(grid));
    let mp = m * m * m;
    let np = grid.points();
    let ec = p.algebra.entry_count();
    let nyquist = grid.max_freq();
    let mut gathered = vec![Complex64::default(); ec * np];
    let mut index_map = Vec::with_capacity(np);
    for g in 0..np {
        let f = grid.freq_of_flat(g);
        if f.iter().any(|&c| c == nyquist) {
            index_map.push(usize::MAX);
            continue;
        }
        let ix = ((f[0] + m as i64) % m as i64) as usize;
        let iy = ((f[1] + m as i64) % m as i64) as usize;
        let iz = ((f[2] + m as i64) % m as i64) as usize;
        index_map.push(ix + m * (iy + m * iz));
    }
    let mut big = p.data.clone();
    big.par_chunks_exact_mut(mp)
        .zip(gathered.par_chunks_exact_mut(np))
        .for_each(|(chunk, dst)| {
            fft3_inplace(chunk, m, Direction::Forward);
            for (g, &src) in index_map.iter().enumerate() {
                if src != usize::MAX {
                    dst[g] = chunk[src];
                }
            }
        });
    SpectralField {
        grid,
        algebra: p.algebra,
        repr: Representation::Spectral,
        band_limit: Some(grid.n / 2 - 1),
        data: gathered,
    }
}

/// dst += c · a·b pointwise (matrix product) on the padded grid.
pub fn padded_mul_acc(dst: &mut PaddedField, c: f64, a: &PaddedField, b: &PaddedField) {
    let n = dst.algebra.n;
    let p = dst.points();
    match n {
        1 => {
            let (da, db) = (a.entry_slice(0), b.entry_slice(0));
            let dd = dst.entry_slice_mut(0);
            for g in 0..p {
                dd[g] += c * da[g] * db[g];
            }
        }
        2 => pointwise_mul2(dst, c, a, b, false),
        _ => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let (ai, bk) = (i * n + k, k * n + j);
                        let (sa, sb) = (a.entry_slice(ai), b.entry_slice(bk));
                        let dd = dst.entry_slice_mut(i * n + j);
                        for g in 0..p {
                            dd[g] += c * sa[g] * sb[g];
                        }
                    }
                }
            }
        }
    }
}

/// dst += c · [a,b] pointwise on the padded grid; exactly zero for u(1).
pub fn padded_commutator_acc(dst: &mut PaddedField, c: f64, a: &PaddedField, b: &PaddedField) {
    let n = dst.algebra.n;
    match n {
        1 => {} // scalar commutators vanish identically
        2 => pointwise_mul2(dst, c, a, b, true),
        _ => {
            padded_mul_acc(dst, c, a, b);
            padded_mul_acc(dst, -c, b, a);
        }
    }
}

/// Fused 2×2 kernel: dst += c·a·b, or dst += c·[a,b] when `comm` is set.
fn pointwise_mul2(dst: &mut PaddedField, c: f64, a: &PaddedField, b: &PaddedField, comm: bool) {
    let p = dst.points();
    let (a00, a01, a10, a11) = (
        a.entry_slice(0).to_vec(),
        a.entry_slice(1).to_vec(),
        a.entry_slice(2).to_vec(),
        a.entry_slice(3).to_vec(),
    );
    let (b00, b01, b10, b11) = (
        b.entry_slice(0).to_vec(),
        b.entry_slice(1).to_vec(),
        b.entry_slice(2).to_vec(),
        b.entry_slice(3).to_vec(),
    );
    let (d, rest) = dst.data.split_at_mut(p);
    let (d01, rest) = rest.split_at_mut(p);
    let (d10, d11) = rest.split_at_mut(p);
    if comm {
        for g in 0..p {
            let da = a00[g] - a11[g];
            let db = b00[g] - b11[g];
            let c00 = a01[g] * b10[g] - b01[g] * a10[g];
            let c01 = b01[g] * da - a01[g] * db;
            let c10 = a10[g] * db - b10[g] * da;
            d[g] += c * c00;
            d01[g] += c * c01;
            d10[g] += c * c10;
            d11[g] -= c * c00;
        }
    } else {
        for g in 0..p {
            d[g] += c * (a00[g] * b00[g] + a01[g] * b10[g]);
            d01[g] += c * (a00[g] * b01[g] + a01[g] * b11[g]);
            d10[g] += c * (a10[g] * b00[g] + a11[g] * b10[g]);
            d11[g] += c * (a10[g] * b01[g] + a11[g] * b11[g]);
        }
    }
}

fn combined_band(u: &SpectralField, v: &SpectralField) -> Option<usize> {
    let cap = u.grid.n / 2 - 1;
    match (u.band_limit, v.band_limit) {
        (Some(a), Some(b)) => Some((a + b).min(cap)),
        _ => Some(cap),
    }
}

/// Pointwise matrix product with 2/3-rule dealiasing (zero-padding to 3N/2
/// per axis). Exact whenever the band limits of the factors sum to within
/// the retained band |ξ|∞ ≤ N/2 − 1.
pub fn dealiased_product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField, GridError> {
    u.same_shape(v)?;
    let pa = pad_to_physical(u);
    let pb = pad_to_physical(v);
    let mut acc = PaddedField::zero(u.grid, u.algebra);
    padded_mul_acc(&mut acc, 1.0, &pa, &pb);
    let mut out = padded_to_spectral(&acc, u.grid);
    out.band_limit = combined_band(u, v);
    Ok(out)
}

/// Pointwise commutator [u,v] with dealiasing; antisymmetry is exact because
/// both orderings are evaluated in a single pass.
pub fn dealiased_commutator(
    u: &SpectralField,
    v: &SpectralField,
) -> Result<SpectralField, GridError> {
    u.same_shape(v)?;
    if u.algebra.kind == AlgebraKind::U1 {
        let mut out = SpectralField::zero(u.grid, u.algebra, Representation::Spectral);
        out.band_limit = combined_band(u, v);
        return Ok(out);
    }
    let pa = pad_to_physical(u);
    let pb = pad_to_physical(v);
    let mut acc = PaddedField::zero(u.grid, u.algebra);
    padded_commutator_acc(&mut acc, 1.0, &pa, &pb);
    let mut out = padded_to_spectral(&acc, u.grid);
    out.band_limit = combined_band(u, v);
    Ok(out)
}

/// Undealised pointwise product on the N³ grid itself (used when the
/// evolution is configured with `dealias: false`).
pub fn aliased_product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField, GridError> {
    u.same_shape(v)?;
    let pu = to_physical(u);
    let pv = to_physical(v);
    let n = u.algebra.n;
    let p = u.grid.points();
    let mut out = SpectralField::zero(u.grid, u.algebra, Representation::Physical);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let sa = pu.entry_slice(i * n + k);
                let sb = pv.entry_slice(k * n + j);
                let dd = out.entry_slice_mut(i * n + j);
                for g in 0..p {
                    dd[g] += sa[g] * sb[g];
                }
            }
        }
    }
    Ok(to_spectral(&out))
}

/// Helmholtz decomposition of a spatial vector field into curl-free and
/// divergence-free parts (the ξ = 0 mode is assigned to neither and dropped
/// from both, per the zero-mode convention).
pub fn helmholtz_split(
    v: &[SpectralField; 3],
) -> ([SpectralField; 3], [SpectralField; 3]) {
    let spec: Vec<SpectralField> = v.iter().map(to_spectral).collect();
    let grid = spec[0].grid;
    let p = grid.points();
    let ec = spec[0].algebra.entry_count();
    let mut cf = [
        SpectralField::zero(grid, spec[0].algebra, Representation::Spectral),
        SpectralField::zero(grid, spec[0].algebra, Representation::Spectral),
        SpectralField::zero(grid, spec[0].algebra, Representation::Spectral),
    ];
    let mut df = cf.clone();
    for g in 0..p {
        let f = grid.freq_of_flat(g);
        let k2 = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]) as f64;
        if k2 == 0.0 {
            continue;
        }
        for e in 0..ec {
            let vals = [
                spec[0].data[e * p + g],
                spec[1].data[e * p + g],
                spec[2].data[e * p + g],
            ];
            let dot = (f[0] as f64) * vals[0] + (f[1] as f64) * vals[1] + (f[2] as f64) * vals[2];
            for i in 0..3 {
                let proj = dot * (f[i] as f64) / k2;
                cf[i].data[e * p + g] = proj;
                df[i].data[e * p + g] = vals[i] - proj;
            }
        }
    }
    for i in 0..3 {
        cf[i].band_limit = spec[i].band_limit;
        df[i].band_limit = spec[i].band_limit;
    }
    (cf, df)
}

/// Deterministic zero-mean band-limited 𝔤-valued random field.
///
/// Coefficients are drawn with a ⟨ξ⟩⁻³ decay profile on a half lattice and
/// mirrored so the field is exactly algebra-valued pointwise
/// (û(−ξ) = −û(ξ)† for su(n), û(−ξ) = conj û(ξ) for the real u(1) scalars).
/// The result is rescaled so that its root-mean-square value over the torus
/// equals `amplitude`.
pub fn random_field(
    grid: GridSpec,
    algebra: AlgebraSpec,
    rng: &mut impl Rng,
    amplitude: f64,
    band: usize,
) -> SpectralField {
    assert!(
        band < grid.n / 2,
        "band {band} must stay below the Nyquist frequency {}",
        grid.n / 2
    );
    let mut out = SpectralField::zero(grid, algebra, Representation::Spectral);
    let kb = band as i64;
    for fz in -kb..=kb {
        for fy in -kb..=kb {
            for fx in -kb..=kb {
                let f = [fx, fy, fz];
                // visit each ±ξ pair once, lexicographically positive side
                if f == [0, 0, 0] || !lexicographically_positive(f) {
                    continue;
                }
                let k2 = (fx * fx + fy * fy + fz * fz) as f64;
                let w = (1.0 + k2).powf(-1.5);
                let c = crate::lie_algebra::random_element_with(algebra, rng, 1.0);
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                let coeff = c.scale_complex(Complex64::from_polar(w, phase));
                // reality/algebra constraint on the opposite mode
                let mirror = match algebra.kind {
                    AlgebraKind::U1 => AlgebraElement::from_entries(
                        1,
                        vec![coeff.entries()[0].conj()],
                    ),
                    AlgebraKind::SuN => coeff.dagger().scale(-1.0),
                };
                out.set_coeff(f, &coeff);
                out.set_coeff([-fx, -fy, -fz], &mirror);
            }
        }
    }
    let rms = out.l2_norm() / TORUS_VOLUME.sqrt();
    if rms > 0.0 {
        out = out.scale(amplitude / rms);
    }
    out.band_limit = Some(band);
    out
}

fn lexicographically_positive(f: [i64; 3]) -> bool {
    if f[2] != 0 {
        return f[2] > 0;
    }
    if f[1] != 0 {
        return f[1] > 0;
    }
    f[0] > 0
}
