//! Inference against disturbance: what a two-outcome measurement
//! interaction gains in success probability and loses in clonability.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{eigh, symmetrize, trace_product, CMat};
use crate::qdisc::{fidelity_value, golden_min};
use crate::states::{check_same_dim, DensityOperator};

const COMPLETENESS_TOL: f64 = 1e-9;

/// Kraus operators grouped by measurement outcome.
#[derive(Clone, Debug)]
pub struct KrausOperation {
    groups: Vec<Vec<CMat>>,
    dim: usize,
}

impl KrausOperation {
    pub fn new(groups: Vec<Vec<CMat>>) -> Result<Self> {
        let dim = groups
            .iter()
            .flatten()
            .next()
            .ok_or_else(|| Error::BadChannel("no Kraus operators".into()))?
            .ncols();
        if groups.iter().flatten().any(|a| a.ncols() != dim || a.nrows() != dim) {
            return Err(Error::BadChannel("Kraus operators must be square of one size".into()));
        }
        let op = Self { groups, dim };
        let res = (op.povm().iter().fold(CMat::zeros(dim, dim), |acc, e| acc + e) - CMat::identity(dim, dim)).norm();
        if res > COMPLETENESS_TOL {
            return Err(Error::BadChannel(format!("completeness residual {res:e}")));
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self { groups: vec![vec![CMat::identity(dim, dim)]], dim }
    }

    pub fn groups(&self) -> &[Vec<CMat>] {
        &self.groups
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// E_b = Σ_i A_bi† A_bi.
    pub fn povm(&self) -> Vec<CMat> {
        self.groups
            .iter()
            .map(|g| g.iter().fold(CMat::zeros(self.dim, self.dim), |acc, a| acc + a.adjoint() * a))
            .collect()
    }

    /// ‖Σ A†A − I‖_F.
    pub fn completeness_residual(&self) -> f64 {
        (self.povm().iter().fold(CMat::zeros(self.dim, self.dim), |acc, e| acc + e) - CMat::identity(self.dim, self.dim))
            .norm()
    }

    /// Same operators with the outcome labels permuted.
    pub fn relabeled(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.groups.len() {
            return Err(Error::BadGrouping(order.len()));
        }
        Self::new(order.iter().map(|&b| self.groups[b].clone()).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Selective(usize),
    All,
}

/// State after the operation and the probability of getting there.
pub fn apply_operation(op: &KrausOperation, rho: &DensityOperator, outcome: Outcome) -> Result<(DensityOperator, f64)> {
    if rho.dim() != op.dim {
        return Err(Error::DimMismatch { expected: op.dim, got: rho.dim() });
    }
    let sandwich = |g: &[CMat]| g.iter().fold(CMat::zeros(op.dim, op.dim), |acc, a| acc + a * rho.matrix() * a.adjoint());
    match outcome {
        Outcome::All => {
            let out = op.groups.iter().fold(CMat::zeros(op.dim, op.dim), |acc, g| acc + sandwich(g));
            Ok((DensityOperator::from_raw(symmetrize(&out)), 1.0))
        }
        Outcome::Selective(b) => {
            let g = op.groups.get(b).ok_or(Error::BadGrouping(op.groups.len()))?;
            let out = sandwich(g);
            let p = out.trace().re;
            if p <= 1e-14 {
                return Err(Error::ZeroProbabilityOutcome(p));
            }
            Ok((DensityOperator::from_raw(symmetrize(&(out / Complex64::new(p, 0.0)))), p))
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TradeoffPoint {
    /// Success probability of guessing the state from the outcome.
    pub ps: f64,
    /// Mean squared fidelity between each input and its disturbed version.
    pub c: f64,
    pub theta: Option<f64>,
    pub xi: Option<f64>,
    pub phi: Option<f64>,
}

/// Success probability and clonability of a guess-0/guess-1 operation at
/// equal priors.
pub fn success_and_clonability(op: &KrausOperation, r0: &DensityOperator, r1: &DensityOperator) -> Result<TradeoffPoint> {
    check_same_dim(r0, r1)?;
    if op.groups.len() != 2 {
        return Err(Error::BadGrouping(op.groups.len()));
    }
    let e = op.povm();
    let ps = 0.5 * (trace_product(r0.matrix(), &e[0]).re + trace_product(r1.matrix(), &e[1]).re);
    let (o0, _) = apply_operation(op, r0, Outcome::All)?;
    let (o1, _) = apply_operation(op, r1, Outcome::All)?;
    let f0 = fidelity_value(r0, &o0)?;
    let f1 = fidelity_value(r1, &o1)?;
    Ok(TradeoffPoint { ps: ps.clamp(0.0, 1.0), c: (0.5 * (f0 * f0 + f1 * f1)).clamp(0.0, 1.0), theta: None, xi: None, phi: None })
}

/// Angle between each basis vector and the nearer signal state when the
/// basis straddles two states at angle θ symmetrically.
pub fn straddle_angle(theta: f64) -> f64 {
    0.5 * (std::f64::consts::FRAC_PI_2 - theta)
}

fn real_vec(angle: f64) -> DVector<Complex64> {
    DVector::from_vec(vec![Complex64::new(angle.cos(), 0.0), Complex64::new(angle.sin(), 0.0)])
}

/// Signal states |ψ0⟩, |ψ1⟩ at angles ξ and ξ+θ from |0⟩.
pub fn restricted_states(theta: f64) -> Result<(DensityOperator, DensityOperator)> {
    check_theta(theta)?;
    let xi = straddle_angle(theta);
    Ok((DensityOperator::pure(&real_vec(xi))?, DensityOperator::pure(&real_vec(xi + theta))?))
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::BadArgument(format!("angle {theta} outside [0, π/2]")));
    }
    Ok(())
}

/// A_b = |φ_b⟩⟨b|: measure in the straddling basis, then send φ_b, which
/// is turned from ψ_b by φ toward the other signal state.
pub fn restricted_operation(theta: f64, phi: f64) -> Result<KrausOperation> {
    check_theta(theta)?;
    let xi = straddle_angle(theta);
    let e0 = real_vec(0.0);
    let e1 = real_vec(std::f64::consts::FRAC_PI_2);
    let a0 = real_vec(xi + phi) * e0.adjoint();
    let a1 = real_vec(xi + theta - phi) * e1.adjoint();
    KrausOperation::new(vec![vec![a0], vec![a1]])
}

/// Clonability of the restricted operation in closed form.
pub fn restricted_clonability(theta: f64, phi: f64) -> f64 {
    let xi = straddle_angle(theta);
    xi.cos().powi(2) * phi.cos().powi(2) + (xi + theta).cos().powi(2) * (theta - phi).cos().powi(2)
}

/// Pure pair at angle θ measured in the straddling basis, resent at angle φ.
pub fn restricted_example(theta: f64, phi: f64) -> Result<TradeoffPoint> {
    check_theta(theta)?;
    Ok(TradeoffPoint {
        ps: 0.5 * (1.0 + theta.sin()),
        c: restricted_clonability(theta, phi),
        theta: Some(theta),
        xi: Some(straddle_angle(theta)),
        phi: Some(phi),
    })
}

/// Resend angle maximizing the restricted clonability.
pub fn phi_opt(theta: f64) -> f64 {
    let s = theta.sin();
    // ½ arctan[sin2θ / ((1+s)/(1−s) + cos2θ)], multiplied through by 1−s so
    // that θ = π/2 is regular.
    0.5 * ((2.0 * theta).sin() * (1.0 - s)).atan2((1.0 + s) + (2.0 * theta).cos() * (1.0 - s))
}

/// (θ, φ_o(θ)) at the largest resend angle over 0 < θ < π/2.
pub fn phi_opt_maximum() -> (f64, f64) {
    let theta = golden_min(&|t: f64| -phi_opt(t), 0.0, std::f64::consts::FRAC_PI_2, 1e-12, 200);
    (theta, phi_opt(theta))
}

/// 1 + ½(1 + Σ⁺λ(ρ1 − ρ0)), with the sum over positive eigenvalues.
pub fn loose_bound(r0: &DensityOperator, r1: &DensityOperator) -> Result<f64> {
    check_same_dim(r0, r1)?;
    let pos: f64 = eigh(&(r1.matrix() - r0.matrix())).values.iter().filter(|&&v| v > 0.0).sum();
    Ok(1.0 + 0.5 * (1.0 + pos))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TradeoffRow {
    pub theta: f64,
    pub phi_opt: f64,
    pub ps: f64,
    pub c: f64,
    pub loose_bound: f64,
}

/// Restricted optimum on θ_i = (π/2)·i/(n+1), i = 1..n.
pub fn tradeoff_sweep(n: usize) -> Result<Vec<TradeoffRow>> {
    if n == 0 {
        return Err(Error::BadGrid(n));
    }
    (1..=n)
        .map(|i| {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / (n + 1) as f64;
            let phi = phi_opt(theta);
            let p = restricted_example(theta, phi)?;
            let (r0, r1) = restricted_states(theta)?;
            Ok(TradeoffRow { theta, phi_opt: phi, ps: p.ps, c: p.c, loose_bound: loose_bound(&r0, &r1)? })
        })
        .collect()
}
