//! Potentials, curvature, constraints, energy, and admissible Lorenz-gauge
//! initial data.
//!
//! Index conventions follow □ = ∂^α∂_α = −∂_t² + Δ with the metric
//! diag(−1,1,1,1): raising flips the sign of the time component only,
//! a⁰ = −a₀ and aʲ = +aⱼ. The six independent curvature components are
//! stored as F₀ᵢ (i = 1..3) and Fᵢⱼ (i < j); Fⱼᵢ = −Fᵢⱼ on access.
//!
//! The constrained data generator draws zero-mean band-limited random
//! potentials and solves the Gauss constraint
//! `∂ⁱf₀ᵢ + [aⁱ, f₀ᵢ] = 0` for the curl-free part of ȧ by Picard iteration.
//! On the torus the constraint also fixes the total charge
//! `∫ [aⁱ, f₀ᵢ] dx = 0`, which the Laplacian inversion cannot reach; the
//! generator therefore carries a divergence-free low-mode correction whose
//! algebra coefficients are solved alongside the iteration.

use crate::lie_algebra::{
    commutator, frobenius_inner, orthonormal_basis, AlgebraElement, AlgebraKind, AlgebraSpec,
};
use crate::spectral_grid::{
    dealiased_commutator, dealiased_product, helmholtz_split, random_field, spatial_derivative,
    standard_multiplier, to_spectral, GridError, GridSpec, MultiplierKind, Representation,
    SpectralField,
};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Gauss-constraint tolerance targeted by the data generator (L² norm).
pub const GAUSS_TOL: f64 = 1e-10;
/// Iteration cap for the constraint solve.
pub const MAX_PICARD_ITERS: usize = 50;

#[derive(Debug, Error)]
pub enum DataGenError {
    #[error("constraint iteration stalled at residual {residual:e} after {iterations} iterations (target {tol:e}); amplitude too large")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        tol: f64,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// The pair (A_α, ∂_tA_α), α = 0..3, at one time.
#[derive(Debug, Clone)]
pub struct PotentialState {
    pub a: [SpectralField; 4],
    pub da: [SpectralField; 4],
}

impl PotentialState {
    pub fn zero(grid: GridSpec, algebra: AlgebraSpec) -> Self {
        let z = || SpectralField::zero(grid, algebra, Representation::Spectral);
        Self {
            a: [z(), z(), z(), z()],
            da: [z(), z(), z(), z()],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.a[0].grid
    }

    pub fn algebra(&self) -> AlgebraSpec {
        self.a[0].algebra
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            a: [
                self.a[0].scale(c),
                self.a[1].scale(c),
                self.a[2].scale(c),
                self.a[3].scale(c),
            ],
            da: [
                self.da[0].scale(c),
                self.da[1].scale(c),
                self.da[2].scale(c),
                self.da[3].scale(c),
            ],
        }
    }
}

/// Storage slot of Fᵢⱼ for spatial axes i < j (1-based): (1,2), (1,3), (2,3).
pub fn fs_slot(i: usize, j: usize) -> usize {
    debug_assert!(i < j && (1..=3).contains(&i) && (1..=3).contains(&j));
    match (i, j) {
        (1, 2) => 0,
        (1, 3) => 1,
        (2, 3) => 2,
        _ => unreachable!(),
    }
}

/// The curvature components (F₀ᵢ, Fᵢⱼ) and their time derivatives.
#[derive(Debug, Clone)]
pub struct CurvatureState {
    /// F₀ᵢ for i = 1..3.
    pub f0: [SpectralField; 3],
    /// Fᵢⱼ for (i,j) ∈ {(1,2),(1,3),(2,3)}.
    pub fs: [SpectralField; 3],
    pub df0: [SpectralField; 3],
    pub dfs: [SpectralField; 3],
}

impl CurvatureState {
    pub fn zero(grid: GridSpec, algebra: AlgebraSpec) -> Self {
        let z = || SpectralField::zero(grid, algebra, Representation::Spectral);
        Self {
            f0: [z(), z(), z()],
            fs: [z(), z(), z()],
            df0: [z(), z(), z()],
            dfs: [z(), z(), z()],
        }
    }

    /// Fᵢⱼ for arbitrary spatial i ≠ j (1-based), with Fⱼᵢ = −Fᵢⱼ.
    pub fn f_spatial(&self, i: usize, j: usize) -> SpectralField {
        if i < j {
            self.fs[fs_slot(i, j)].clone()
        } else {
            self.fs[fs_slot(j, i)].scale(-1.0)
        }
    }

    /// ∂_tFᵢⱼ with the same antisymmetry.
    pub fn df_spatial(&self, i: usize, j: usize) -> SpectralField {
        if i < j {
            self.dfs[fs_slot(i, j)].clone()
        } else {
            self.dfs[fs_slot(j, i)].scale(-1.0)
        }
    }

    /// All six independent components, F₀ᵢ first.
    pub fn components(&self) -> impl Iterator<Item = &SpectralField> {
        self.f0.iter().chain(self.fs.iter())
    }
}

/// L² norms of the constraint defects of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintReport {
    /// ‖∂^αA_α‖ = ‖−ȧ₀ + Σᵢ∂ᵢaᵢ‖.
    pub lorenz_residual: f64,
    /// ‖∂ⁱf₀ᵢ + [aⁱ, f₀ᵢ]‖.
    pub gauss_residual: f64,
    /// ‖F − F[A]‖ over the six components.
    pub compat_residual: f64,
    /// ‖∂^αF_{αβ} + [A^α, F_{αβ}]‖ over β.
    pub ym_residual: f64,
}

fn comm(a: &SpectralField, b: &SpectralField) -> SpectralField {
    dealiased_commutator(a, b).expect("conforming fields")
}

/// Curvature F[A] of a potential state: Fᵢⱼ = ∂ᵢaⱼ − ∂ⱼaᵢ + [aᵢ,aⱼ],
/// F₀ᵢ = ȧᵢ − ∂ᵢa₀ + [a₀,aᵢ]. The time-derivative slots are left zero;
/// [`initial_time_derivatives`] fills them.
pub fn curvature(p: &PotentialState) -> CurvatureState {
    let mut c = CurvatureState::zero(p.grid(), p.algebra());
    for i in 1..=3 {
        c.f0[i - 1] = p.da[i]
            .sub(&spatial_derivative(i - 1, &p.a[0]))
            .add(&comm(&p.a[0], &p.a[i]));
        for j in (i + 1)..=3 {
            c.fs[fs_slot(i, j)] = spatial_derivative(i - 1, &p.a[j])
                .sub(&spatial_derivative(j - 1, &p.a[i]))
                .add(&comm(&p.a[i], &p.a[j]));
        }
    }
    c
}

/// Fill the time-derivative slots from the potential data:
/// ∂_tFᵢⱼ = ∂ᵢȧⱼ − ∂ⱼȧᵢ + [ȧᵢ,aⱼ] + [aᵢ,ȧⱼ] and
/// ∂_tF₀ᵢ = ∂ʲfⱼᵢ + [a^α, f_{αi}] (the β = i Yang-Mills equation).
pub fn initial_time_derivatives(p: &PotentialState, c: &CurvatureState) -> CurvatureState {
    let mut out = c.clone();
    for i in 1..=3 {
        for j in (i + 1)..=3 {
            out.dfs[fs_slot(i, j)] = spatial_derivative(i - 1, &p.da[j])
                .sub(&spatial_derivative(j - 1, &p.da[i]))
                .add(&comm(&p.da[i], &p.a[j]))
                .add(&comm(&p.a[i], &p.da[j]));
        }
    }
    for i in 1..=3 {
        // ∂ʲ fⱼᵢ + [a^α, f_{αi}] with a⁰ = −a₀, aʲ = aⱼ
        let mut acc = SpectralField::zero(p.grid(), p.algebra(), Representation::Spectral);
        for j in 1..=3 {
            if j != i {
                let fji = c.f_spatial(j, i);
                acc = acc.add(&spatial_derivative(j - 1, &fji));
                acc = acc.add(&comm(&p.a[j], &fji));
            }
        }
        acc.axpy(-1.0, &comm(&p.a[0], &c.f0[i - 1]));
        out.df0[i - 1] = acc;
    }
    out
}

/// The Gauss-law field ∂ⁱf₀ᵢ + [aⁱ, f₀ᵢ].
fn gauss_field(p: &PotentialState, f0: &[SpectralField; 3]) -> SpectralField {
    let mut g = SpectralField::zero(p.grid(), p.algebra(), Representation::Spectral);
    for i in 1..=3 {
        g = g.add(&spatial_derivative(i - 1, &f0[i - 1]));
        g = g.add(&comm(&p.a[i], &f0[i - 1]));
    }
    g
}

/// All four constraint residual norms of a state.
pub fn constraint_residuals(p: &PotentialState, c: &CurvatureState) -> ConstraintReport {
    // Lorenz: ∂^αA_α = −ȧ₀ + Σᵢ ∂ᵢaᵢ
    let mut lorenz = p.da[0].scale(-1.0);
    for i in 1..=3 {
        lorenz = lorenz.add(&spatial_derivative(i - 1, &p.a[i]));
    }
    let gauss = gauss_field(p, &c.f0);

    let fa = curvature(p);
    let mut compat_sq = 0.0;
    for (have, want) in c.components().zip(fa.components()) {
        compat_sq += have.sub(want).l2_norm().powi(2);
    }

    // Yang-Mills residual: the β = 0 component is −(Gauss law); β = i uses
    // the stored ∂_tF₀ᵢ.
    let mut ym_sq = gauss.l2_norm().powi(2);
    for i in 1..=3 {
        let mut r = c.df0[i - 1].scale(-1.0);
        for j in 1..=3 {
            if j != i {
                let fji = c.f_spatial(j, i);
                r = r.add(&spatial_derivative(j - 1, &fji));
                r = r.add(&comm(&p.a[j], &fji));
            }
        }
        r.axpy(-1.0, &comm(&p.a[0], &c.f0[i - 1]));
        ym_sq += r.l2_norm().powi(2);
    }

    ConstraintReport {
        lorenz_residual: lorenz.l2_norm(),
        gauss_residual: gauss.l2_norm(),
        compat_residual: compat_sq.sqrt(),
        ym_residual: ym_sq.sqrt(),
    }
}

/// Field energy 𝓔 = Σᵢ ∫‖F₀ᵢ‖²_F dx + Σ_{i<j} ∫‖Fᵢⱼ‖²_F dx.
pub fn energy(c: &CurvatureState) -> f64 {
    c.components().map(|f| f.l2_norm().powi(2)).sum()
}

/// sin(k·x)·X as a spectral field.
fn sin_profile_times(grid: GridSpec, k: [i64; 3], x: &AlgebraElement) -> SpectralField {
    let algebra = if x.n() == 1 {
        AlgebraSpec::u1()
    } else {
        AlgebraSpec::su(x.n())
    };
    let mut f = SpectralField::zero(grid, algebra, Representation::Spectral);
    let i2 = Complex64::new(0.0, 0.5);
    f.set_coeff(k, &x.scale_complex(-i2));
    f.set_coeff([-k[0], -k[1], -k[2]], &x.scale_complex(i2));
    f
}

/// cos(k·x)·amp as a u(1) spectral field.
fn cos_profile(grid: GridSpec, k: [i64; 3], amp: f64) -> SpectralField {
    let mut f = SpectralField::zero(grid, AlgebraSpec::u1(), Representation::Spectral);
    let h = AlgebraElement::scalar(0.5 * amp);
    f.set_coeff(k, &h);
    f.set_coeff([-k[0], -k[1], -k[2]], &h);
    f
}

/// Draw a Lorenz-gauge data set: zero-mean band-limited random aᵢ, a₀ and a
/// divergence-free ḃᵢ; ȧ₀ = ∂ⁱaᵢ; ȧᵢ = ḃᵢ + ∂ᵢφ with φ from the Picard
/// iteration φ ← a₀ + (−Δ)⁻¹(∂ⁱ[a₀,aᵢ] + [aⁱ, f₀ᵢ(φ)]) — applied below in
/// residual-correction form — plus a divergence-free low-mode correction
/// that cancels the total charge.
///
/// Deterministic in the seed. Converges for small data: su(2) draws with
/// amplitude ≤ 0.3 (band 4, N = 16) stay well under the iteration cap;
/// larger amplitudes report [`DataGenError::NonConvergence`].
pub fn generate_lorenz_data(
    grid: GridSpec,
    algebra: AlgebraSpec,
    seed: u64,
    amplitude: f64,
    band_limit: usize,
) -> Result<(PotentialState, CurvatureState, ConstraintReport), DataGenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = PotentialState::zero(grid, algebra);
    for i in 1..=3 {
        p.a[i] = random_field(grid, algebra, &mut rng, amplitude, band_limit);
    }
    p.a[0] = random_field(grid, algebra, &mut rng, amplitude, band_limit);
    let b_raw = [
        random_field(grid, algebra, &mut rng, amplitude, band_limit),
        random_field(grid, algebra, &mut rng, amplitude, band_limit),
        random_field(grid, algebra, &mut rng, amplitude, band_limit),
    ];
    let (_, b_df) = helmholtz_split(&b_raw);

    // Lorenz constraint on the data: ȧ₀ = ∂ⁱaᵢ
    let mut da0 = SpectralField::zero(grid, algebra, Representation::Spectral);
    for i in 1..=3 {
        da0 = da0.add(&spatial_derivative(i - 1, &p.a[i]));
    }
    p.da[0] = da0;

    // Charge-correction machinery (su(n) only; abelian charges vanish).
    // Correction fields χ_b = P_df([a, e_b]) couple to the charge at the
    // same ‖a‖² scale as the charge itself, so the joint iteration with the
    // φ-update contracts uniformly in the amplitude.
    let charge = if algebra.kind == AlgebraKind::U1 {
        None
    } else {
        Some(ChargeCorrector::new(&p, &orthonormal_basis(algebra)))
    };
    let mut coeffs = vec![0.0f64; charge.as_ref().map_or(0, |c| c.dim())];

    let mut phi = p.a[0].clone();
    let mut last_residual = f64::INFINITY;
    for iter in 0..MAX_PICARD_ITERS {
        // current ȧᵢ = ḃᵢ + correction + ∂ᵢφ
        for i in 1..=3 {
            let mut dai = b_df[i - 1].add(&spatial_derivative(i - 1, &phi));
            if let Some(cc) = &charge {
                cc.accumulate(i, &coeffs, &mut dai);
            }
            p.da[i] = dai;
        }
        let c = curvature(&p);
        let r = gauss_field(&p, &c.f0);
        let res = r.l2_norm();
        if std::env::var("YM_DEBUG_PICARD").is_ok() {
            eprintln!(
                "iter {iter}: res {res:e} q {:e}",
                to_spectral(&r).mean().frobenius_norm()
            );
        }
        if res <= GAUSS_TOL {
            let c = initial_time_derivatives(&p, &c);
            let report = constraint_residuals(&p, &c);
            return Ok((p, c, report));
        }
        if iter == MAX_PICARD_ITERS - 1 || (iter > 2 && res > 10.0 * last_residual) {
            return Err(DataGenError::NonConvergence {
                residual: res,
                iterations: iter + 1,
                tol: GAUSS_TOL,
            });
        }
        last_residual = res;

        // φ-update: equivalent to the Picard step, written as a correction
        // by the current residual (the ξ = 0 part is untouchable here)
        let mut dphi = standard_multiplier(MultiplierKind::InvLaplace, &r);
        dphi.project_zero_mean();
        phi = phi.add(&dphi);

        // charge update: cancel the ξ = 0 residual via the χ corrections
        // (compared in the L² measure, like the convergence check)
        if let Some(cc) = &charge {
            let q = to_spectral(&r).mean();
            if q.frobenius_norm() * TORUS_VOLUME.sqrt() > 0.2 * GAUSS_TOL {
                if let Some(delta) = cc.solve(&q) {
                    if std::env::var("YM_DEBUG_PICARD").is_ok() {
                        let dn: f64 = delta.iter().map(|d| d.abs()).sum();
                        eprintln!("   charge: |q|={:e} |dc|={dn:e} coeffs={coeffs:?}", q.frobenius_norm());
                    }
                    for (c, d) in coeffs.iter_mut().zip(delta) {
                        *c += d;
                    }
                }
            }
        }
    }
    unreachable!("loop returns or errors before exhausting iterations");
}

/// Divergence-free correction fields χ_b = P_df([a, e_b]) with their charge
/// response matrix R[a][b] = ⟨e_a, mean(Σᵢ [aᵢ, χ_{b,i}])⟩, solved each
/// iteration for the coefficients cancelling the total-charge residual.
struct ChargeCorrector {
    basis_dim: usize,
    /// χ[b][i−1]: spatial components of the b-th correction field.
    fields: Vec<[SpectralField; 3]>,
    response: Vec<f64>,
}

impl ChargeCorrector {
    fn new(p: &PotentialState, basis: &[AlgebraElement]) -> Self {
        let grid = p.grid();
        let algebra = p.algebra();
        let dim = basis.len();
        let mut fields = Vec::with_capacity(dim);
        for e in basis {
            let mut carrier = SpectralField::zero(grid, algebra, Representation::Spectral);
            carrier.set_coeff([0, 0, 0], e);
            let raw = [
                comm(&p.a[1], &carrier),
                comm(&p.a[2], &carrier),
                comm(&p.a[3], &carrier),
            ];
            let (_, df) = helmholtz_split(&raw);
            fields.push(df);
        }
        let mut response = vec![0.0f64; dim * dim];
        for (b, chi) in fields.iter().enumerate() {
            let mut resp = AlgebraElement::zero(algebra.n);
            for i in 1..=3 {
                let prod = comm(&p.a[i], &chi[i - 1]);
                resp = resp.add(&to_spectral(&prod).mean());
            }
            for (a, ea) in basis.iter().enumerate() {
                response[a * dim + b] = frobenius_inner(ea, &resp).expect("same algebra");
            }
        }
        Self {
            basis_dim: dim,
            fields,
            response,
        }
    }

    fn dim(&self) -> usize {
        self.basis_dim
    }

    /// dst += Σ_b coeffs[b]·χ_{b,i}
    fn accumulate(&self, i: usize, coeffs: &[f64], dst: &mut SpectralField) {
        for (b, chi) in self.fields.iter().enumerate() {
            if coeffs[b] != 0.0 {
                dst.axpy(coeffs[b], &chi[i - 1]);
            }
        }
    }

    /// Solve R·δ = −q in basis coordinates.
    fn solve(&self, q: &AlgebraElement) -> Option<Vec<f64>> {
        let dim = self.basis_dim;
        let basis = orthonormal_basis(if q.n() == 1 {
            AlgebraSpec::u1()
        } else {
            AlgebraSpec::su(q.n())
        });
        let mut m = self.response.clone();
        let mut rhs: Vec<f64> = basis
            .iter()
            .map(|e| -frobenius_inner(e, q).expect("same algebra"))
            .collect();
        solve_dense(&mut m, &mut rhs, dim)
    }
}

/// Gaussian elimination with partial pivoting; None on (near-)singularity.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for col in 0..n {
        let (mut pivot, mut pval) = (col, a[col * n + col].abs());
        for row in (col + 1)..n {
            if a[row * n + col].abs() > pval {
                pivot = row;
                pval = a[row * n + col].abs();
            }
        }
        if pval <= 1e-13 * scale {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in (row + 1)..n {
            s -= a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    Some(x)
}

/// The abelian plane wave A₁ = cos(x₂ − t) at time t, with its curvature.
///
/// A closed-form solution of the full system: it satisfies □A = 0, the
/// Lorenz condition, and both constraints, with all commutators vanishing.
/// Used as the integrator oracle.
pub fn abelian_plane_wave_at(grid: GridSpec, t: f64) -> (PotentialState, CurvatureState) {
    let k = [0i64, 1, 0];
    // cos(x₂−t) = cos t·cos x₂ + sin t·sin x₂, sin(x₂−t) = cos t·sin x₂ − sin t·cos x₂
    let cos_w = |amp: f64| {
        cos_profile(grid, k, amp * t.cos()).add(&sin_profile_times(
            grid,
            k,
            &AlgebraElement::scalar(amp * t.sin()),
        ))
    };
    let sin_w = |amp: f64| {
        sin_profile_times(grid, k, &AlgebraElement::scalar(amp * t.cos()))
            .add(&cos_profile(grid, k, -amp * t.sin()))
    };
    let mut p = PotentialState::zero(grid, AlgebraSpec::u1());
    p.a[1] = cos_w(1.0);
    p.da[1] = sin_w(1.0);
    let mut c = CurvatureState::zero(grid, AlgebraSpec::u1());
    c.f0[0] = sin_w(1.0);
    c.fs[fs_slot(1, 2)] = sin_w(1.0);
    c.df0[0] = cos_w(-1.0);
    c.dfs[fs_slot(1, 2)] = cos_w(-1.0);
    (p, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_algebra::{mat_exp, random_element, su2_basis};
    use crate::spectral_grid::{to_physical, transform, Direction, TORUS_VOLUME};

    fn grid16() -> GridSpec {
        GridSpec::new(16).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn abelian_pure_gauge_has_zero_curvature() {
        let grid = grid16();
        let algebra = AlgebraSpec::u1();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = random_field(grid, algebra, &mut rng, 1.0, 4);
        let mut p = PotentialState::zero(grid, algebra);
        for i in 1..=3 {
            p.a[i] = spatial_derivative(i - 1, &phi);
        }
        let c = curvature(&p);
        for f in c.components() {
            assert!(f.l2_norm() <= 1e-12, "curl of gradient must vanish");
        }
    }

    #[test]
    fn constant_su2_potentials_give_commutator_curvature() {
        let grid = grid16();
        let [t1, t2, t3] = su2_basis();
        let mut p = PotentialState::zero(grid, AlgebraSpec::su2());
        for (i, t) in [&t1, &t2, &t3].iter().enumerate() {
            p.a[i + 1].set_coeff([0, 0, 0], t);
        }
        let c = curvature(&p);
        // F₁₂ = [T₁,T₂] = T₃, F₁₃ = [T₁,T₃] = −T₂, F₂₃ = [T₂,T₃] = T₁
        let f12 = c.fs[fs_slot(1, 2)].coeff([0, 0, 0]);
        let f13 = c.fs[fs_slot(1, 3)].coeff([0, 0, 0]);
        let f23 = c.fs[fs_slot(2, 3)].coeff([0, 0, 0]);
        assert!(f12.sub(&t3).frobenius_norm() <= 1e-13);
        assert!(f13.sub(&t2.scale(-1.0)).frobenius_norm() <= 1e-13);
        assert!(f23.sub(&t1).frobenius_norm() <= 1e-13);
    }

    /// 6th-order centered stencil derivative of physical samples.
    fn stencil_derivative(f: &SpectralField, axis: usize) -> SpectralField {
        let n = f.grid.n();
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let stride = [1usize, n, n * n][axis];
        let p = f.grid.points();
        let mut out = f.clone();
        let w = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
        for e in 0..f.algebra.entry_count() {
            let src = f.entry_slice(e).to_vec();
            let dst = out.entry_slice_mut(e);
            for g in 0..p {
                let coord = match axis {
                    0 => g % n,
                    1 => (g / n) % n,
                    _ => g / (n * n),
                };
                let base = g - coord * stride;
                let mut acc = Complex64::default();
                for (s, ws) in w.iter().enumerate() {
                    let sp = (coord + s + 1) % n;
                    let sm = (coord + n - (s + 1)) % n;
                    acc += ws * (src[base + sp * stride] - src[base + sm * stride]);
                }
                dst[g] = acc / h;
            }
        }
        out
    }

    #[test]
    fn curvature_matches_finite_difference_oracle() {
        // Band-1 data evaluated on a 64³ refinement; the 6th-order stencil
        // error is ~|ξ_axis|⁷h⁶/140 ≈ 3e−7, inside the 1e−6 target.
        let coarse = grid16();
        let fine = GridSpec::new(64).unwrap();
        let algebra = AlgebraSpec::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut p = PotentialState::zero(coarse, algebra);
        for i in 0..4 {
            p.a[i] = random_field(coarse, algebra, &mut rng, 0.7, 1);
            p.da[i] = random_field(coarse, algebra, &mut rng, 0.7, 1);
        }
        let embed = |f: &SpectralField| {
            let mut out = SpectralField::zero(fine, algebra, Representation::Spectral);
            for g in 0..coarse.points() {
                let fr = coarse.freq_of_flat(g);
                out.set_coeff(fr, &f.coeff(fr));
            }
            to_physical(&out)
        };
        let c = curvature(&p);
        for i in 1..=3usize {
            for j in (i + 1)..=3 {
                let ai = embed(&p.a[i]);
                let aj = embed(&p.a[j]);
                let mut fd = stencil_derivative(&aj, i - 1).sub(&stencil_derivative(&ai, j - 1));
                // pointwise commutator, exact on samples
                let mut commf = SpectralField::zero(fine, algebra, Representation::Physical);
                for g in 0..fine.points() {
                    let v = commutator(&ai.value_at(g), &aj.value_at(g)).unwrap();
                    commf.set_value_at(g, &v);
                }
                fd = fd.add(&commf);
                let spectral = embed(&c.fs[fs_slot(i, j)]);
                let err = fd.sub(&spectral).l2_norm() / spectral.l2_norm();
                assert!(err <= 1e-6, "F_{i}{j} oracle error {err:e}");
            }
        }
    }

    #[test]
    fn zero_state_residuals_vanish() {
        let p = PotentialState::zero(grid16(), AlgebraSpec::su2());
        let c = initial_time_derivatives(&p, &curvature(&p));
        let r = constraint_residuals(&p, &c);
        assert_eq!(r.lorenz_residual, 0.0);
        assert_eq!(r.gauss_residual, 0.0);
        assert_eq!(r.compat_residual, 0.0);
        assert_eq!(r.ym_residual, 0.0);
        assert_eq!(energy(&c), 0.0);
    }

    #[test]
    fn generated_data_satisfies_constraints() {
        let (p, c, report) = generate_lorenz_data(grid16(), AlgebraSpec::su2(), 1, 0.1, 4).unwrap();
        assert!(report.gauss_residual <= 1e-10, "gauss {:e}", report.gauss_residual);
        assert!(report.lorenz_residual <= 1e-12, "lorenz {:e}", report.lorenz_residual);
        assert!(report.compat_residual <= 1e-12);
        // at data time the Yang-Mills residual reduces to the Gauss part
        assert!(report.ym_residual <= 1e-9, "ym {:e}", report.ym_residual);
        assert!(energy(&c) > 0.0);
        assert!(p.a[1].l2_norm() > 0.0);
    }

    #[test]
    fn generated_data_is_deterministic() {
        let (p1, _, _) = generate_lorenz_data(grid16(), AlgebraSpec::su2(), 7, 0.05, 3).unwrap();
        let (p2, _, _) = generate_lorenz_data(grid16(), AlgebraSpec::su2(), 7, 0.05, 3).unwrap();
        assert_eq!(p1.a[2], p2.a[2]);
        assert_eq!(p1.da[3], p2.da[3]);
    }

    #[test]
    fn abelian_generation_converges_immediately() {
        let (_, _, report) = generate_lorenz_data(grid16(), AlgebraSpec::u1(), 5, 0.5, 4).unwrap();
        assert!(report.gauss_residual <= 1e-13, "gauss {:e}", report.gauss_residual);
    }

    #[test]
    fn zero_amplitude_gives_zero_data() {
        let (p, c, report) = generate_lorenz_data(grid16(), AlgebraSpec::su2(), 9, 0.0, 4).unwrap();
        assert_eq!(p.a[1].l2_norm(), 0.0);
        assert_eq!(energy(&c), 0.0);
        assert_eq!(report.gauss_residual, 0.0);
    }

    #[test]
    fn perturbed_da0_shifts_lorenz_residual_linearly() {
        let (mut p, c, base) =
            generate_lorenz_data(grid16(), AlgebraSpec::su2(), 13, 0.05, 3).unwrap();
        assert!(base.lorenz_residual <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let g = random_field(grid16(), AlgebraSpec::su2(), &mut rng, 0.01, 2);
        p.da[0] = p.da[0].add(&g);
        let r = constraint_residuals(&p, &c);
        assert!(rel(r.lorenz_residual, g.l2_norm()) <= 1e-10);
    }

    #[test]
    fn plane_wave_energy_is_torus_volume() {
        let (_, c) = abelian_plane_wave_at(grid16(), 0.0);
        let e = energy(&c);
        assert!(rel(e, TORUS_VOLUME) <= 1e-12, "energy {e}");
        // the closed form satisfies the data relations at any time
        let (p, c) = abelian_plane_wave_at(grid16(), 0.4);
        let r = constraint_residuals(&p, &c);
        assert!(r.compat_residual <= 1e-12);
        assert!(r.lorenz_residual <= 1e-12);
        assert!(r.gauss_residual <= 1e-12);
        assert!(r.ym_residual <= 1e-12);
    }

    #[test]
    fn plane_wave_time_derivatives_match_closed_form() {
        let grid = grid16();
        let (p, c) = abelian_plane_wave_at(grid, 0.0);
        let filled = initial_time_derivatives(&p, &curvature(&p));
        assert!(filled.df0[0].sub(&c.df0[0]).l2_norm() <= 1e-12);
        assert!(filled.dfs[0].sub(&c.dfs[0]).l2_norm() <= 1e-12);
    }

    #[test]
    fn energy_invariant_under_constant_conjugation() {
        let (p, c, _) = generate_lorenz_data(grid16(), AlgebraSpec::su2(), 21, 0.1, 3).unwrap();
        let u = mat_exp(&random_element(AlgebraSpec::su2(), 4, 1.0));
        let ui = u.dagger();
        let conj_field = |f: &SpectralField| {
            let mut out = f.clone();
            for g in 0..f.grid.points() {
                out.set_value_at(g, &u.mul(&f.value_at(g)).mul(&ui));
            }
            out
        };
        let mut cc = c.clone();
        for k in 0..3 {
            cc.f0[k] = conj_field(&c.f0[k]);
            cc.fs[k] = conj_field(&c.fs[k]);
            cc.df0[k] = conj_field(&c.df0[k]);
            cc.dfs[k] = conj_field(&c.dfs[k]);
        }
        assert!(rel(energy(&cc), energy(&c)) <= 1e-12);

        // Gauss residual norm is invariant under constant gauge rotations
        let mut pp = p.clone();
        for k in 0..4 {
            pp.a[k] = conj_field(&p.a[k]);
            pp.da[k] = conj_field(&p.da[k]);
        }
        let r0 = constraint_residuals(&p, &c);
        let r1 = constraint_residuals(&pp, &cc);
        assert!((r0.gauss_residual - r1.gauss_residual).abs() <= 1e-10 * (1.0 + r0.gauss_residual));
    }

    #[test]
    fn antisymmetric_access() {
        let (_, c, _) = generate_lorenz_data(grid16(), AlgebraSpec::su2(), 31, 0.1, 3).unwrap();
        assert_eq!(c.f_spatial(1, 2).scale(-1.0), c.f_spatial(2, 1));
        assert_eq!(c.df_spatial(1, 3).scale(-1.0), c.df_spatial(3, 1));
    }

    #[test]
    fn curvature_scales_as_linear_plus_quadratic() {
        let (p, _, _) = generate_lorenz_data(grid16(), AlgebraSpec::su2(), 41, 0.1, 3).unwrap();
        let c1 = curvature(&p);
        let c2 = curvature(&p.scale(2.0));
        let ch = curvature(&p.scale(0.5));
        for ((a, b), h) in c1.components().zip(c2.components()).zip(ch.components()) {
            // c(λ) = λL + λ²Q: recover L, Q from λ ∈ {1,2}, predict λ = 1/2
            let q = b.sub(&a.scale(2.0)).scale(0.5);
            let l = a.sub(&q);
            let predicted = l.scale(0.5).add(&q.scale(0.25));
            let err = predicted.sub(h).l2_norm();
            assert!(err <= 1e-12 * (1.0 + h.l2_norm()), "err {err:e}");
        }
    }

    #[test]
    fn nonconvergence_reported_for_large_amplitude() {
        let r = generate_lorenz_data(grid16(), AlgebraSpec::su2(), 2, 20.0, 4);
        assert!(matches!(r, Err(DataGenError::NonConvergence { .. })));
    }

    #[test]
    fn plane_wave_samples() {
        let (p, _) = abelian_plane_wave_at(grid16(), 0.0);
        let phys = transform(&p.a[1], Direction::Inverse).unwrap();
        let g = phys.grid;
        for gi in (0..g.points()).step_by(33) {
            let x = g.point_of_flat(gi);
            let have = phys.value_at(gi).entries()[0].re;
            assert!((x[1].cos() - have).abs() <= 1e-12);
        }
    }
}
