//! Minimum-error discrimination and quantum fidelity.

use crate::error::{Error, Result};
use crate::linops::{
    eigh, polar_unitary, pow_pd, pow_support, sqrt_psd, symmetrize, trace_product, CMat,
    HermitianMatrix, TOL_NULL,
};
use crate::states::{check_same_dim, dot3, tensor, BlochVector, DensityOperator, Povm};

/// Helstrom measurement for a prior-weighted pair.
#[derive(Clone, Debug)]
pub struct HelstromResult {
    pub pe: f64,
    /// Ascending eigenvalues of π1ρ1 − π0ρ0.
    pub gamma_eigs: Vec<f64>,
    /// Outcome 0 first.
    pub povm: Povm,
}

/// Fidelity together with the measurement and unitary that attain it.
#[derive(Clone, Debug)]
pub struct FidelityResult {
    pub f: f64,
    pub bures: f64,
    /// ρ1^{-1/2} √(ρ1^{1/2} ρ0 ρ1^{1/2}) ρ1^{-1/2}, inverses taken on the support.
    pub m_operator: HermitianMatrix,
    /// Projective measurement in an eigenbasis of the M operator.
    pub measurement: Povm,
    /// Unitary with U ρ0^{1/2} ρ1^{1/2} = √(ρ1^{1/2} ρ0 ρ1^{1/2}).
    pub u_c: CMat,
}

fn check_prior(pi0: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&pi0) {
        return Err(Error::BadArgument(format!("prior {pi0} outside [0,1]")));
    }
    Ok(())
}

pub fn helstrom(r0: &DensityOperator, r1: &DensityOperator, pi0: f64) -> Result<HelstromResult> {
    check_same_dim(r0, r1)?;
    check_prior(pi0)?;
    let pi1 = 1.0 - pi0;
    let gamma = r1.matrix() * nalgebra::Complex::new(pi1, 0.0) - r0.matrix() * nalgebra::Complex::new(pi0, 0.0);
    let e = eigh(&gamma);
    let d = e.dim();
    // Zero eigenvalues (up to rounding) go to outcome 0.
    let tol = 1e-14 * e.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut e0 = CMat::zeros(d, d);
    let mut e1 = CMat::zeros(d, d);
    let mut pe = pi0;
    for k in 0..d {
        if e.values[k] <= tol {
            e0 += e.projector(k);
            pe += e.values[k];
        } else {
            e1 += e.projector(k);
        }
    }
    let pe = pe.clamp(0.0, pi0.min(pi1));
    Ok(HelstromResult { pe, gamma_eigs: e.values, povm: Povm::new(vec![symmetrize(&e0), symmetrize(&e1)])? })
}

/// Bayes error π0 tr(ρ0 E1) + π1 tr(ρ1 E0) of a two-outcome measurement.
pub fn error_of_povm(r0: &DensityOperator, r1: &DensityOperator, pi0: f64, povm: &Povm) -> Result<f64> {
    if povm.len() != 2 {
        return Err(Error::BadPovm(format!("{} outcomes, need 2", povm.len())));
    }
    let p0 = povm.probabilities(r0)?;
    let p1 = povm.probabilities(r1)?;
    Ok(pi0 * p0[1] + (1.0 - pi0) * p1[0])
}

pub const MAX_MULTICOPY_DIM: usize = 64;

/// Helstrom measurement on m copies of each state.
pub fn helstrom_multicopy(r0: &DensityOperator, r1: &DensityOperator, pi0: f64, m: usize) -> Result<HelstromResult> {
    check_same_dim(r0, r1)?;
    if m == 0 {
        return Err(Error::BadArgument("need at least one copy".into()));
    }
    let big = (r0.dim() as f64).powi(m as i32);
    if big > MAX_MULTICOPY_DIM as f64 {
        return Err(Error::TooLarge(format!("dimension {big}")));
    }
    let (mut a, mut b) = (r0.clone(), r1.clone());
    for _ in 1..m {
        a = tensor(&a, r0);
        b = tensor(&b, r1);
    }
    helstrom(&a, &b, pi0)
}

/// Equal-prior Bayes error for two linear polarizations at 0 and θ when each
/// of the m copies is measured along the axis at angle φ.
pub fn photon_error(theta: f64, phi: f64, m: usize) -> f64 {
    let p0 = phi.cos().powi(2);
    let p1 = (phi - theta).cos().powi(2);
    let mut binom = 1.0;
    let mut acc = 0.0;
    for k in 0..=m {
        let a = p0.powi(k as i32) * (1.0 - p0).powi((m - k) as i32);
        let b = p1.powi(k as i32) * (1.0 - p1).powi((m - k) as i32);
        acc += binom * 0.5 * a.min(b);
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    acc
}

/// Best repeated single-axis measurement for two polarizations θ apart.
///
/// The error is periodic in φ with period π/2 and symmetric under
/// φ ↦ θ − φ, so the search covers [θ/2, θ/2 + π/4] where the optimum is
/// unique. `curve` samples the error over [0, π).
pub fn photon_angle_sweep(theta: f64, m: usize, grid: usize) -> Result<(f64, Vec<(f64, f64)>)> {
    if m == 0 || m > 4 {
        return Err(Error::BadArgument(format!("copies {m} outside 1..=4")));
    }
    if grid < 3 {
        return Err(Error::BadGrid(grid));
    }
    let pi = std::f64::consts::PI;
    let curve: Vec<(f64, f64)> = (0..grid)
        .map(|i| {
            let phi = pi * i as f64 / grid as f64;
            (phi, photon_error(theta, phi, m))
        })
        .collect();
    let lo = theta / 2.0;
    let hi = lo + pi / 4.0;
    let f = |x: f64| photon_error(theta, x, m);
    let best = golden_on_grid(f, lo, hi, grid);
    Ok((best, curve))
}

/// Grid minimum on [lo, hi] followed by golden-section refinement in the
/// neighbouring cells.
pub(crate) fn golden_on_grid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize) -> f64 {
    let h = (hi - lo) / (grid - 1) as f64;
    let mut bi = 0;
    let mut bv = f64::INFINITY;
    for i in 0..grid {
        let v = f(lo + h * i as f64);
        if v < bv {
            bv = v;
            bi = i;
        }
    }
    let a = lo + h * bi.saturating_sub(1) as f64;
    let b = (lo + h * (bi + 1) as f64).min(hi);
    let x = golden_min(&f, a, b, 1e-12, 200);
    if f(x) <= bv { x } else { lo + h * bi as f64 }
}

pub(crate) fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64, cap: usize) -> f64 {
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..cap {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        }
    }
    // Endpoints are candidates too; the minimum may sit on the boundary.
    let mid = 0.5 * (lo + hi);
    let mut best = (f(mid), mid);
    for x in [lo, hi] {
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// tr√(ρ1^{1/2}ρ0ρ1^{1/2}), computed as the sum of singular values of
/// ρ0^{1/2}ρ1^{1/2}.
pub fn fidelity_value(r0: &DensityOperator, r1: &DensityOperator) -> Result<f64> {
    check_same_dim(r0, r1)?;
    let s0 = sqrt_psd(r0.matrix());
    let s1 = sqrt_psd(r1.matrix());
    Ok(nuclear_norm(&(s0 * s1)).min(1.0))
}

fn nuclear_norm(m: &CMat) -> f64 {
    m.clone().singular_values().iter().sum()
}

pub fn fidelity_q(r0: &DensityOperator, r1: &DensityOperator) -> Result<FidelityResult> {
    check_same_dim(r0, r1)?;
    let d = r0.dim();
    let s0 = sqrt_psd(r0.matrix());
    let s1 = sqrt_psd(r1.matrix());
    let prod = &s0 * &s1;
    let f = nuclear_norm(&prod).min(1.0);
    let bures = (2.0 - 2.0 * f).max(0.0).sqrt();
    let u_c = polar_unitary(&prod);

    let inner = sqrt_psd(&(&s1 * r0.matrix() * &s1));
    let inv_half = pow_support(r1.matrix(), -0.5);
    let m = symmetrize(&(&inv_half * inner * &inv_half));

    // On the null space of ρ1 the basis is arbitrary; lifting it above the
    // spectrum of M keeps it from mixing with support directions.
    let e1 = r1.eig();
    let mut lifted = m.clone();
    let null: Vec<usize> = (0..d).filter(|&k| e1.values[k] <= TOL_NULL).collect();
    if !null.is_empty() {
        let top = eigh(&m).max() + 1.0;
        for k in null {
            lifted += e1.projector(k) * nalgebra::Complex::new(top, 0.0);
        }
    }
    let basis = eigh(&lifted).vectors;
    let measurement = Povm::projective(&basis)?;
    Ok(FidelityResult { f, bures, m_operator: HermitianMatrix::from_raw(m), measurement, u_c })
}

/// Σ√(tr ρ0E_b)√(tr ρ1E_b). Probabilities below 1e-14 are rounding noise
/// and would otherwise be amplified by the square root.
pub fn overlap_of_povm(r0: &DensityOperator, r1: &DensityOperator, povm: &Povm) -> Result<f64> {
    let clean = |p: Vec<f64>| p.into_iter().map(|x| if x < 1e-14 { 0.0 } else { x }).collect::<Vec<_>>();
    let p0 = clean(povm.probabilities(r0)?);
    let p1 = clean(povm.probabilities(r1)?);
    Ok(p0.iter().zip(&p1).map(|(a, b)| (a * b).sqrt()).sum())
}

/// Qubit fidelity from Bloch vectors.
pub fn fidelity_bloch_2d(a: &BlochVector, b: &BlochVector) -> f64 {
    let ra = (1.0 - a.dot(a)).max(0.0).sqrt();
    let rb = (1.0 - b.dot(b)).max(0.0).sqrt();
    (0.5 * (1.0 + a.dot(b) + ra * rb)).max(0.0).sqrt().min(1.0)
}

/// Bloch axis a/√(1−a²) − b/√(1−b²) of the optimal fidelity measurement
/// for two mixed qubit states.
pub fn fidelity_axis_2d(a: &BlochVector, b: &BlochVector) -> Result<[f64; 3]> {
    let (la, lb) = (1.0 - a.dot(a), 1.0 - b.dot(b));
    if la <= 1e-12 || lb <= 1e-12 {
        return Err(Error::PureStateVector);
    }
    let (ca, cb) = (a.coords(), b.coords());
    Ok([0, 1, 2].map(|i| ca[i] / la.sqrt() - cb[i] / lb.sqrt()))
}

fn require_invertible(r: &DensityOperator) -> Result<()> {
    let m = r.min_eigenvalue();
    if m <= TOL_NULL {
        return Err(Error::SingularState(m));
    }
    Ok(())
}

/// ρ0^{-1/2} √(ρ0^{1/2} ρ1 ρ0^{1/2}) ρ0^{-1/2}, the inverse of the M operator.
pub fn n_operator(r0: &DensityOperator, r1: &DensityOperator) -> Result<HermitianMatrix> {
    check_same_dim(r0, r1)?;
    require_invertible(r0)?;
    let s0 = sqrt_psd(r0.matrix());
    let inv = pow_pd(r0.matrix(), -0.5)?;
    let inner = sqrt_psd(&(&s0 * r1.matrix() * &s0));
    Ok(HermitianMatrix::from_raw(symmetrize(&(&inv * inner * &inv))))
}

/// √(tr(ρ0 G) tr(ρ1 G⁻¹)) for positive definite G.
pub fn g_objective(r0: &DensityOperator, r1: &DensityOperator, g: &CMat) -> Result<f64> {
    let ginv = pow_pd(g, -1.0)?;
    let a = trace_product(r0.matrix(), g).re;
    let b = trace_product(r1.matrix(), &ginv).re;
    Ok((a * b).max(0.0).sqrt())
}

/// Fidelity as a minimum over positive operators G, with the minimizer.
pub fn min_over_g(r0: &DensityOperator, r1: &DensityOperator) -> Result<(f64, HermitianMatrix)> {
    require_invertible(r0)?;
    require_invertible(r1)?;
    let g = n_operator(r0, r1)?;
    let v = g_objective(r0, r1, g.matrix())?;
    Ok((v, g))
}

/// a^{1/2}(a^{-1/2} b a^{-1/2})^α a^{1/2}.
pub fn geometric_mean(a: &HermitianMatrix, b: &HermitianMatrix, alpha: f64) -> Result<HermitianMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BadArgument(format!("order {alpha} outside [0,1]")));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { expected: a.dim(), got: b.dim() });
    }
    let ea = a.eig();
    if ea.min() <= TOL_NULL {
        return Err(Error::SingularBase(ea.min()));
    }
    let half = ea.apply(f64::sqrt);
    let inv = ea.apply(|x| 1.0 / x.sqrt());
    let inner = eigh(&(&inv * b.matrix() * &inv)).apply(|x| x.max(0.0).powf(alpha));
    Ok(HermitianMatrix::from_raw(symmetrize(&(&half * inner * &half))))
}

#[cfg(test)]
fn real_diag(d: &[f64]) -> CMat {
    CMat::from_fn(d.len(), d.len(), |i, j| nalgebra::Complex::new(if i == j { d[i] } else { 0.0 }, 0.0))
}

/// Residual of the stationarity condition for the qubit overlap
/// measurement along axis n; zero at the optimum.
pub fn fidelity_axis_residual(a: &BlochVector, b: &BlochVector, n: &[f64; 3]) -> f64 {
    let (aa, bb) = (a.dot(a), b.dot(b));
    let nn = dot3(n, n);
    let (an, bn) = (dot3(&a.coords(), n), dot3(&b.coords(), n));
    (aa - bb) * nn - (1.0 - bb) * an * an + (1.0 - aa) * bn * bn
}
