//! Bounds on the measured (quantum) Kullback-Leibler information
//! max over measurements of K(p0/p1).

use serde::Serialize;

use crate::classical::kl_raw;
use crate::error::{Error, Result};
use crate::linops::{
    eigh, func_hermitian, lowering_solve_eig, pow_pd, pow_support, sylvester_solve,
    symmetrize, trace_product, trace_rho_ln, CMat, HermitianMatrix, TOL_NULL,
};
use crate::qdisc::fidelity_q;
use crate::states::{check_same_dim, DensityOperator, Povm};

/// Mixing weight used when a singular ρ1 is regularized.
pub const REGULARIZATION: f64 = 1e-9;

/// Lower and upper bounds on the measured Kullback information.
#[derive(Clone, Debug, Serialize)]
pub struct KullbackBounds {
    pub k_f: f64,
    pub k_b: f64,
    pub hiai_lower: f64,
    pub jensen_lower: f64,
    pub k_umegaki: f64,
    pub ando_upper: f64,
    pub jensen_upper: f64,
    /// (p, bound) pairs.
    pub hiai_upper: Vec<(f64, f64)>,
    /// True when ρ1 was mixed with the maximally mixed state.
    pub regularized: bool,
}

impl KullbackBounds {
    pub fn best_lower(&self) -> f64 {
        self.k_f.max(self.k_b).max(self.hiai_lower).max(self.jensen_lower)
    }

    pub fn best_upper(&self) -> f64 {
        self.hiai_upper
            .iter()
            .map(|x| x.1)
            .fold(self.k_umegaki.min(self.ando_upper).min(self.jensen_upper), f64::min)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBounds {
    pub k_f: f64,
    pub k_b: f64,
    pub hiai_lower: f64,
    pub jensen_lower: f64,
    pub regularized: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperBounds {
    pub k_umegaki: f64,
    pub ando_upper: f64,
    pub jensen_upper: f64,
    pub hiai_upper: Vec<(f64, f64)>,
    pub regularized: bool,
}

/// K(p0/p1) for the distributions a measurement induces; infinite when an
/// outcome impossible under ρ1 has weight under ρ0.
pub fn k_measured(r0: &DensityOperator, r1: &DensityOperator, m: &Povm) -> Result<f64> {
    check_same_dim(r0, r1)?;
    Ok(kl_raw(&m.probabilities(r0)?, &m.probabilities(r1)?))
}

fn invertible_or_regularized(r1: &DensityOperator, regularize: bool) -> Result<(DensityOperator, bool)> {
    if r1.min_eigenvalue() > TOL_NULL {
        Ok((r1.clone(), false))
    } else if regularize {
        Ok((r1.regularized(REGULARIZATION), true))
    } else {
        Err(Error::SingularState(r1.min_eigenvalue()))
    }
}

/// L_{ρ1}(ρ0), the solution of ρ1X + Xρ1 = 2ρ0.
fn lowered(r0: &DensityOperator, r1: &DensityOperator) -> Result<CMat> {
    lowering_solve_eig(&r1.eig(), r0.matrix())
}

pub fn k_lower_bounds(r0: &DensityOperator, r1: &DensityOperator, regularize: bool) -> Result<LowerBounds> {
    check_same_dim(r0, r1)?;
    let (r1, regularized) = invertible_or_regularized(r1, regularize)?;
    let l = lowered(r0, &r1)?;
    let k_f = trace_rho_ln(r0.matrix(), &l)?;
    let fq = fidelity_q(r0, &r1)?;
    let k_b = 2.0 * trace_rho_ln(r0.matrix(), fq.m_operator.matrix())?;
    let inv = pow_pd(r1.matrix(), -0.5)?;
    let y = symmetrize(&(&inv * r0.matrix() * &inv));
    let hiai_lower = trace_rho_ln(r0.matrix(), &y)?;
    let jensen_lower = if fq.f > 0.0 { -2.0 * fq.f.ln() } else { f64::INFINITY };
    Ok(LowerBounds { k_f, k_b, hiai_lower, jensen_lower, regularized })
}

/// tr ρ0 ln ρ0 − tr ρ0 ln ρ1 on the support of ρ1.
pub fn umegaki(r0: &DensityOperator, r1: &DensityOperator) -> Result<f64> {
    check_same_dim(r0, r1)?;
    let e0 = r0.eig();
    let s: f64 = e0.values.iter().filter(|&&x| x > TOL_NULL).map(|x| x * x.ln()).sum();
    Ok(s - trace_rho_ln(r0.matrix(), r1.matrix())?)
}

pub fn k_upper_bounds(
    r0: &DensityOperator,
    r1: &DensityOperator,
    p_list: &[f64],
    regularize: bool,
) -> Result<UpperBounds> {
    check_same_dim(r0, r1)?;
    if let Some(p) = p_list.iter().find(|p| !(**p > 0.0)) {
        return Err(Error::BadArgument(format!("Hiai order {p} must be positive")));
    }
    let k_umegaki = umegaki(r0, r1)?;
    let (r1, regularized) = invertible_or_regularized(r1, regularize)?;

    let inv = pow_pd(r1.matrix(), -0.5)?;
    let y = HermitianMatrix::from_raw(symmetrize(&(&inv * r0.matrix() * &inv)));
    let xlnx = func_hermitian(&y, |x| if x > 0.0 { x * x.ln() } else { 0.0 }, false)?;
    let ando_upper = trace_product(r1.matrix(), xlnx.matrix()).re;

    let l = lowered(r0, &r1)?;
    let jensen_upper = trace_product(r0.matrix(), &l).re.ln();

    let mut hiai_upper = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let a = pow_support(r0.matrix(), p / 2.0);
        let b = pow_pd(r1.matrix(), -p)?;
        let z = symmetrize(&(&a * b * &a));
        hiai_upper.push((p, trace_rho_ln(r0.matrix(), &z)? / p));
    }
    Ok(UpperBounds { k_umegaki, ando_upper, jensen_upper, hiai_upper, regularized })
}

pub fn kullback_bounds(
    r0: &DensityOperator,
    r1: &DensityOperator,
    p_list: &[f64],
    regularize: bool,
) -> Result<KullbackBounds> {
    let lo = k_lower_bounds(r0, r1, regularize)?;
    let up = k_upper_bounds(r0, r1, p_list, regularize)?;
    Ok(KullbackBounds {
        k_f: lo.k_f,
        k_b: lo.k_b,
        hiai_lower: lo.hiai_lower,
        jensen_lower: lo.jensen_lower,
        k_umegaki: up.k_umegaki,
        ando_upper: up.ando_upper,
        jensen_upper: up.jensen_upper,
        hiai_upper: up.hiai_upper,
        regularized: lo.regularized || up.regularized,
    })
}

fn param_residual(r0: &CMat, r1: &CMat, x: &CMat, alpha: f64) -> CMat {
    let half = nalgebra::Complex::new(0.5 * alpha, 0.0);
    let quad = nalgebra::Complex::new(1.0 - alpha, 0.0);
    (r1 * x + x * r1) * half + x * r1 * x * quad - r0
}

fn newton_param(r0: &CMat, r1: &CMat, mut x: CMat, alpha: f64) -> Result<CMat> {
    let scale = r0.norm().max(1.0);
    let mut res = param_residual(r0, r1, &x, alpha);
    for _ in 0..200 {
        let rn = res.norm();
        if rn <= 1e-13 * scale {
            return Ok(x);
        }
        let b = r1 * nalgebra::Complex::new(0.5 * alpha, 0.0) + &x * r1 * nalgebra::Complex::new(1.0 - alpha, 0.0);
        let h = symmetrize(&sylvester_solve(&b, &b, &(-&res))?);
        let mut step = 1.0;
        loop {
            let cand = symmetrize(&(&x + &h * nalgebra::Complex::new(step, 0.0)));
            let cres = param_residual(r0, r1, &cand, alpha);
            if cres.norm() < rn || step < 1e-6 {
                x = cand;
                res = cres;
                break;
            }
            step *= 0.5;
        }
    }
    if res.norm() <= 1e-8 * scale {
        Ok(x)
    } else {
        Err(Error::NoConvergence(format!("Newton residual {:.3e} at order {alpha}", res.norm())))
    }
}

/// Solves ½α(ρ1X + Xρ1) + (1−α)Xρ1X = ρ0 for positive X and returns
/// tr(ρ0 ln((1−α)X² + αX)) with X.
///
/// Both endpoints have explicit solutions (the lowered ρ0 at α = 1, the M
/// operator at α = 0); the nearer one seeds Newton continuation in steps of
/// 0.1 in α.
pub fn k_param(r0: &DensityOperator, r1: &DensityOperator, alpha: f64) -> Result<(f64, HermitianMatrix)> {
    check_same_dim(r0, r1)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BadArgument(format!("order {alpha} outside [0,1]")));
    }
    for r in [r0, r1] {
        if r.min_eigenvalue() <= TOL_NULL {
            return Err(Error::SingularState(r.min_eigenvalue()));
        }
    }
    let (start_alpha, mut x) = if alpha < 0.5 {
        (0.0, fidelity_q(r0, r1)?.m_operator.into_matrix())
    } else {
        (1.0, lowered(r0, r1)?)
    };
    let n_steps = ((alpha - start_alpha).abs() / 0.1).ceil() as usize;
    for k in 1..=n_steps {
        let a = start_alpha + (alpha - start_alpha) * k as f64 / n_steps as f64;
        x = newton_param(r0.matrix(), r1.matrix(), x, a)?;
    }
    let e = eigh(&x);
    if e.min() < -1e-10 {
        return Err(Error::NoConvergence(format!("solution has eigenvalue {:.3e}", e.min())));
    }
    let arg = e.apply(|v| (1.0 - alpha) * v * v + alpha * v);
    let bound = trace_rho_ln(r0.matrix(), &arg)?;
    Ok((bound, HermitianMatrix::from_raw(x)))
}
