//! Accessible information of a binary channel and its bounds.
//!
//! A channel sends ρ0 with probability 1−t and ρ1 with probability t; the
//! mean state is ρ = (1−t)ρ0 + tρ1 and Δ = ρ1 − ρ0. Every bound vanishes at
//! t = 0 and t = 1.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{entropy_raw, mutual_raw};
use crate::error::{Error, Result};
use crate::linops::{eigh, kron_sum, lowering_solve_eig, simpson_clustered, trace_product, trace_re, vec_of, CMat, TOL_NULL};
use crate::oracle::best_axis_in_plane;
use crate::qdisc::fidelity_value;
use crate::states::{check_same_dim, cross3, dot3, norm3, BlochVector, DensityOperator, Povm};

/// Default number of quadrature nodes for the twice-integrated bounds.
pub const QUAD_POINTS: usize = 401;
/// Mixing weight used to make singular endpoint states invertible.
pub const REGULARIZATION: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct BinaryChannel {
    pub r0: DensityOperator,
    pub r1: DensityOperator,
    /// Prior of r1.
    pub t: f64,
}

impl BinaryChannel {
    pub fn new(r0: DensityOperator, r1: DensityOperator, t: f64) -> Result<Self> {
        check_same_dim(&r0, &r1)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::BadArgument(format!("prior {t} outside [0,1]")));
        }
        Ok(Self { r0, r1, t })
    }

    /// Qubit channel with Bloch vectors aa·x̂ and bb·(cos θ, sin θ, 0).
    pub fn from_bloch(aa: f64, bb: f64, theta: f64, t: f64) -> Result<Self> {
        let a = BlochVector::in_plane(aa, 0.0)?;
        let b = BlochVector::in_plane(bb, theta)?;
        Self::new(DensityOperator::from_bloch(&a), DensityOperator::from_bloch(&b), t)
    }

    pub fn at(&self, t: f64) -> Result<Self> {
        Self::new(self.r0.clone(), self.r1.clone(), t)
    }

    pub fn dim(&self) -> usize {
        self.r0.dim()
    }

    pub fn rho(&self) -> CMat {
        mix(self.r0.matrix(), self.r1.matrix(), self.t)
    }

    pub fn delta(&self) -> CMat {
        self.r1.matrix() - self.r0.matrix()
    }

    fn blochs(&self) -> Result<([f64; 3], [f64; 3])> {
        Ok((self.r0.to_bloch()?.coords(), self.r1.to_bloch()?.coords()))
    }
}

fn mix(a: &CMat, b: &CMat, t: f64) -> CMat {
    a * Complex64::new(1.0 - t, 0.0) + b * Complex64::new(t, 0.0)
}

fn interior(t: f64) -> bool {
    t > 0.0 && t < 1.0
}

/// x ln y with the convention that a vanishing prefactor wins.
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 { 0.0 } else { x * y.ln() }
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 { 0.0 } else { x * x.ln() }
}

/// J = H(p) − (1−t)H(p0) − tH(p1) for the distributions a measurement induces.
pub fn mutual_info_q(ch: &BinaryChannel, m: &Povm) -> Result<f64> {
    let p0 = m.probabilities(&ch.r0)?;
    let p1 = m.probabilities(&ch.r1)?;
    Ok(mutual_raw(&p0, &p1, ch.t).max(0.0))
}

pub fn von_neumann(rho: &CMat) -> f64 {
    let e = eigh(rho);
    entropy_raw(&e.values)
}

/// S(ρ) − (1−t)S(ρ0) − tS(ρ1).
pub fn holevo_s(ch: &BinaryChannel) -> f64 {
    if !interior(ch.t) {
        return 0.0;
    }
    let v = von_neumann(&ch.rho()) - (1.0 - ch.t) * von_neumann(ch.r0.matrix()) - ch.t * von_neumann(ch.r1.matrix());
    v.max(0.0)
}

/// Subentropy of a qubit state with Bloch length c.
pub fn subentropy_bloch(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    if c < 1e-3 {
        let c2 = c * c;
        return 2f64.ln() - 0.5 - c2 / 6.0 - c2 * c2 / 60.0;
    }
    (xlny((1.0 - c).powi(2), (1.0 - c) / 2.0) - (1.0 + c).powi(2) * ((1.0 + c) / 2.0).ln()) / (4.0 * c)
}

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// k-th derivative of x^D ln x divided by k!, for k < D.
fn scaled_derivative(x: f64, dim: usize, k: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut falling = 1.0;
    for i in 0..k {
        falling *= (dim - i) as f64;
    }
    let kfact: f64 = (1..=k).map(|i| i as f64).product();
    falling / kfact * x.powi((dim - k) as i32) * (x.ln() + harmonic(dim) - harmonic(dim - k))
}

/// Subentropy −Σ_j (Π_{k≠j} λ_j/(λ_j−λ_k)) λ_j ln λ_j, evaluated as the
/// divided difference of x^D ln x over the spectrum. Eigenvalues closer
/// than 1e-6 are merged to their mean and handled by confluent
/// (derivative) entries, which keeps the formula regular at degeneracies.
pub fn subentropy(rho: &DensityOperator) -> f64 {
    if rho.dim() == 2 {
        return subentropy_bloch(rho.to_bloch().map(|b| b.norm()).unwrap_or(0.0));
    }
    subentropy_spectrum(&rho.eigenvalues())
}

pub fn subentropy_spectrum(values: &[f64]) -> f64 {
    let dim = values.len();
    let mut x: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut i = 0;
    while i < dim {
        let mut j = i + 1;
        while j < dim && x[j] - x[j - 1] < 1e-6 {
            j += 1;
        }
        if j - i > 1 {
            let mean = x[i..j].iter().sum::<f64>() / (j - i) as f64;
            x[i..j].iter_mut().for_each(|v| *v = mean);
        }
        i = j;
    }
    // Newton divided-difference table, column by column.
    let mut col: Vec<f64> = x.iter().map(|&v| scaled_derivative(v, dim, 0)).collect();
    for order in 1..dim {
        let mut next = Vec::with_capacity(dim - order);
        for i in 0..dim - order {
            let (lo, hi) = (x[i], x[i + order]);
            if hi == lo {
                next.push(scaled_derivative(lo, dim, order));
            } else {
                next.push((col[i + 1] - col[i]) / (hi - lo));
            }
        }
        col = next;
    }
    (-col[0]).max(0.0)
}

/// Q(ρ) − (1−t)Q(ρ0) − tQ(ρ1).
pub fn jrw_q(ch: &BinaryChannel) -> f64 {
    if !interior(ch.t) {
        return 0.0;
    }
    let rho = DensityOperator::from_raw(ch.rho());
    let v = subentropy(&rho) - (1.0 - ch.t) * subentropy(&ch.r0) - ch.t * subentropy(&ch.r1);
    v.max(0.0)
}

/// Lower bound from the measurement diagonalizing L_ρ(Δ), with that
/// measurement. Outside 0 < t < 1 the value is 0 and the measurement is
/// the standard basis.
pub fn lower_m(ch: &BinaryChannel) -> Result<(f64, Povm)> {
    let d = ch.dim();
    if !interior(ch.t) {
        return Ok((0.0, Povm::projective(&CMat::identity(d, d))?));
    }
    let e = eigh(&ch.rho());
    let x = lowering_solve_eig(&e, &ch.delta())?;
    let m = Povm::projective(&eigh(&x).vectors)?;
    Ok((mutual_info_q(ch, &m)?, m))
}

/// tr((1−t)ρ0 ln L_ρ(ρ0) + tρ1 ln L_ρ(ρ1)), the closed form of the lower bound.
pub fn lower_m_trace_form(ch: &BinaryChannel) -> Result<f64> {
    if !interior(ch.t) {
        return Ok(0.0);
    }
    let e = eigh(&ch.rho());
    let l0 = lowering_solve_eig(&e, ch.r0.matrix())?;
    let l1 = lowering_solve_eig(&e, ch.r1.matrix())?;
    Ok((1.0 - ch.t) * crate::linops::trace_rho_ln(ch.r0.matrix(), &l0)?
        + ch.t * crate::linops::trace_rho_ln(ch.r1.matrix(), &l1)?)
}

/// L″(t) = −tr(Δ L_ρ(Δ)).
pub fn l_second(ch: &BinaryChannel) -> Result<f64> {
    let e = eigh(&ch.rho());
    let delta = ch.delta();
    let x = lowering_solve_eig(&e, &delta)?;
    Ok(-trace_product(&delta, &x).re)
}

/// N″(t) = −tr(L_{√ρ}(Δ)²) = −Σ (2/(√λj+√λk))² |Δjk|².
pub fn n_second(ch: &BinaryChannel) -> f64 {
    let e = eigh(&ch.rho());
    let dt = e.vectors.adjoint() * ch.delta() * &e.vectors;
    let d = e.dim();
    let mut acc = 0.0;
    for j in 0..d {
        for k in 0..d {
            let s = e.values[j].max(0.0).sqrt() + e.values[k].max(0.0).sqrt();
            if e.values[j] + e.values[k] > TOL_NULL {
                acc += (2.0 / s).powi(2) * dt[(j, k)].norm_sqr();
            }
        }
    }
    -acc
}

/// (ln x − ln y)/(x − y), with Φ(x, x) = 1/x.
pub fn phi_log_mean(x: f64, y: f64) -> f64 {
    if (x - y).abs() <= 1e-12 * x.max(y) {
        2.0 / (x + y)
    } else {
        (x.ln() - y.ln()) / (x - y)
    }
}

/// S″(t) = −Σ Φ(λj, λk)|Δjk|² over pairs with λj + λk ≠ 0.
pub fn s_second(ch: &BinaryChannel) -> f64 {
    let e = eigh(&ch.rho());
    let dt = e.vectors.adjoint() * ch.delta() * &e.vectors;
    let d = e.dim();
    let mut acc = 0.0;
    for j in 0..d {
        for k in 0..d {
            let (x, y) = (e.values[j].max(0.0), e.values[k].max(0.0));
            if x + y > TOL_NULL {
                let w = dt[(j, k)].norm_sqr();
                if w > 0.0 {
                    acc += phi_log_mean(x, y) * w;
                }
            }
        }
    }
    -acc
}

/// J″(t) = −Σ_b (tr ΔE_b)² / tr(ρE_b) for a fixed measurement.
pub fn j_second(ch: &BinaryChannel, m: &Povm) -> f64 {
    let rho = ch.rho();
    let delta = ch.delta();
    m.elements()
        .iter()
        .map(|e| {
            let p = trace_product(&rho, e).re;
            let q = trace_product(&delta, e).re;
            if p > 0.0 { -q * q / p } else { 0.0 }
        })
        .sum()
}

/// Solution of y″ = g on [0,1] with y(0) = y(1) = 0 at the point t, from the
/// Green's function of the second derivative.
fn twice_integrated(g: impl Fn(f64) -> f64 + Sync, t: f64, n: usize) -> Result<f64> {
    if !interior(t) {
        return Ok(0.0);
    }
    let left = simpson_clustered(|s| s * g(s), 0.0, t, n)?;
    let right = simpson_clustered(|s| (1.0 - s) * g(s), t, 1.0, n)?;
    Ok(-((1.0 - t) * left + t * right))
}

/// Qubit upper bound from the closed-form double integral of L″.
pub fn upper_l_bloch(a: &[f64; 3], b: &[f64; 3], t: f64) -> f64 {
    if !interior(t) {
        return 0.0;
    }
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let d2 = dot3(&d, &d);
    if d2 < 1e-24 {
        return 0.0;
    }
    let c = [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]];
    let (aa, bb, ab) = (dot3(a, a), dot3(b, b), dot3(a, b));
    let delta = ((1.0 - ab).powi(2) - (1.0 - aa).max(0.0) * (1.0 - bb).max(0.0)).max(0.0).sqrt();
    let (ad, bd, cd) = (dot3(a, &d), dot3(b, &d), dot3(&c, &d));
    let la = xlnx(delta - ad) + xlnx(delta + ad);
    let lb = xlnx(delta - bd) + xlnx(delta + bd) - la;
    let lc = -xlnx(delta - cd) - xlnx(delta + cd);
    (delta / (2.0 * d2) * (lc + t * lb + la)).max(0.0)
}

/// Precomputed spectral data for the vectorized route to L(t).
///
/// With S(s) = I⊗ρ(s) + ρ(s)ᵀ⊗I = Sm + (s−½)SΔ, where Sm belongs to the
/// midpoint state, the lowered difference is vec L_{ρ(s)}(Δ) = 2 S(s)⁻¹ vec Δ.
/// Its antiderivative from s = ½ is H(t) = 2 Sm^{-1/2} h_t(K) Sm^{-1/2} vec Δ
/// with K = Sm^{-1/2} SΔ Sm^{-1/2} and h_t(x) = ln(1 + (t−½)x)/x. Then
/// −tr(ρ(t)H(t)) has second derivative L″, and the linear part is fixed by
/// the endpoint conditions. Expanding about the midpoint keeps K well
/// conditioned even when an endpoint state is nearly singular.
pub struct KroneckerL {
    r0: CMat,
    r1: CMat,
    sm_inv_half: CMat,
    kappa: Vec<f64>,
    w: CMat,
    z: DVector<Complex64>,
    at0: f64,
    at1: f64,
    dim: usize,
}

impl KroneckerL {
    pub fn new(r0: &DensityOperator, r1: &DensityOperator) -> Result<Self> {
        check_same_dim(r0, r1)?;
        let singular = r0.min_eigenvalue() <= 1e-9 || r1.min_eigenvalue() <= 1e-9;
        let (r0, r1) = if singular {
            (r0.regularized(REGULARIZATION), r1.regularized(REGULARIZATION))
        } else {
            (r0.clone(), r1.clone())
        };
        let d = r0.dim();
        let (m0, m1) = (r0.matrix().clone(), r1.matrix().clone());
        let delta = &m1 - &m0;
        if delta.norm() < 1e-14 {
            return Err(Error::SingularDelta);
        }
        let mid = mix(&m0, &m1, 0.5);
        let sm = kron_sum(&mid, &mid);
        let sd = kron_sum(&delta, &delta);
        let em = eigh(&sm);
        if em.min() <= 0.0 {
            return Err(Error::SingularKroneckerSum(em.min()));
        }
        let sm_inv_half = em.apply(|x| 1.0 / x.sqrt());
        let k = &sm_inv_half * sd * &sm_inv_half;
        let ek = eigh(&k);
        let z = ek.vectors.adjoint() * (&sm_inv_half * vec_of(&delta));
        let mut me = Self { r0: m0, r1: m1, sm_inv_half, kappa: ek.values, w: ek.vectors, z, at0: 0.0, at1: 0.0, dim: d };
        me.at0 = trace_product(&me.r0, &me.h(0.0)).re;
        me.at1 = trace_product(&me.r1, &me.h(1.0)).re;
        Ok(me)
    }

    /// H(t) = ∫_{1/2}^t L_{ρ(s)}(Δ) ds.
    pub fn h(&self, t: f64) -> CMat {
        let u = t - 0.5;
        let scaled = DVector::from_fn(self.z.len(), |i, _| {
            let x = self.kappa[i];
            let h = if x == 0.0 { u } else { (u * x).ln_1p() / x };
            self.z[i] * h * 2.0
        });
        let v = &self.sm_inv_half * (&self.w * scaled);
        crate::linops::unvec(&v, self.dim, self.dim)
    }

    /// L(t) = (1−t) tr(ρ0 H(0)) + t tr(ρ1 H(1)) − tr(ρ(t) H(t)).
    pub fn value(&self, t: f64) -> f64 {
        if !interior(t) {
            return 0.0;
        }
        let h = self.h(t);
        ((1.0 - t) * self.at0 + t * self.at1 - trace_product(&mix(&self.r0, &self.r1, t), &h).re).max(0.0)
    }
}

/// Upper bound obtained by integrating the minimal J″ twice. Qubit
/// channels use the closed form; larger dimensions the vectorized route.
pub fn upper_l(ch: &BinaryChannel) -> Result<f64> {
    if !interior(ch.t) {
        return Ok(0.0);
    }
    if ch.dim() == 2 {
        let (a, b) = ch.blochs()?;
        return Ok(upper_l_bloch(&a, &b, ch.t));
    }
    match KroneckerL::new(&ch.r0, &ch.r1) {
        Ok(k) => Ok(k.value(ch.t)),
        Err(Error::SingularDelta) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// The same bound by direct quadrature of L″.
pub fn upper_l_quadrature(ch: &BinaryChannel, n: usize) -> Result<f64> {
    let g = |s: f64| l_second(&ch.at(s).expect("prior in range")).unwrap_or(f64::NAN);
    // Interior nodes only; endpoint states may be singular.
    let v = twice_integrated(g, ch.t, n)?;
    if v.is_nan() {
        return Err(Error::UnsolvableLyapunov(f64::NAN));
    }
    Ok(v.max(0.0))
}

/// Upper bound from the square-root lowering, N″ = −tr(L_{√ρ}(Δ)²),
/// integrated twice by quadrature.
pub fn upper_n(ch: &BinaryChannel) -> Result<f64> {
    upper_n_with(ch, QUAD_POINTS)
}

pub fn upper_n_with(ch: &BinaryChannel, n: usize) -> Result<f64> {
    let g = |s: f64| n_second(&ch.at(s).expect("prior in range"));
    Ok(twice_integrated(g, ch.t, n)?.max(0.0))
}

/// Qubit N″ written with the scalar part r0 of √ρ = r0·I + r·σ.
pub fn n_second_bloch(a: &[f64; 3], b: &[f64; 3], t: f64) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let c = [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]];
    let c2 = dot3(&c, &c);
    let r0sq = 0.25 * (1.0 + (1.0 - c2).max(0.0).sqrt());
    let cd = dot3(&c, &d);
    -(1.0 / (2.0 * r0sq)) * (cd * cd / (1.0 - c2) * (1.0 - 1.0 / (8.0 * r0sq)) + dot3(&d, &d))
}

/// (1−t) ln tr(ρ0 L_ρ(ρ0)) + t ln tr(ρ1 L_ρ(ρ1)).
pub fn upper_r(ch: &BinaryChannel) -> Result<f64> {
    if !interior(ch.t) {
        return Ok(0.0);
    }
    let e = eigh(&ch.rho());
    let l0 = lowering_solve_eig(&e, ch.r0.matrix())?;
    let l1 = lowering_solve_eig(&e, ch.r1.matrix())?;
    let a = trace_product(ch.r0.matrix(), &l0).re;
    let b = trace_product(ch.r1.matrix(), &l1).re;
    Ok(((1.0 - ch.t) * a.ln() + ch.t * b.ln()).max(0.0))
}

/// Qubit traces tr(ρ0 L_ρ(ρ0)) and tr(ρ1 L_ρ(ρ1)) from Bloch vectors.
pub fn r_traces_bloch(a: &[f64; 3], b: &[f64; 3], t: f64) -> (f64, f64) {
    let c = [0, 1, 2].map(|i| (1.0 - t) * a[i] + t * b[i]);
    let c2 = dot3(&c, &c);
    let ra = dot3(a, a) + (1.0 - dot3(a, &c)).powi(2) / (1.0 - c2);
    let rb = dot3(b, b) + (1.0 - dot3(b, &c)).powi(2) / (1.0 - c2);
    (ra, rb)
}

/// Accessible information of two pure states with squared overlap q.
pub fn exact_pure_i(q: f64, t: f64) -> f64 {
    if !interior(t) {
        return 0.0;
    }
    let q = q.clamp(0.0, 1.0);
    let n = (1.0 - 4.0 * t * (1.0 - t) * q).max(0.0).sqrt();
    if n < 1e-8 {
        return 0.0;
    }
    let s = 1.0 - t;
    let first = xlny(n + 1.0 - 2.0 * t * q, (1.0 + n) / (2.0 * s)) + xlny(n - 1.0 + 2.0 * t * q, (1.0 - n) / (2.0 * s));
    let second = xlny(n + 1.0 - 2.0 * s * q, (1.0 + n) / (2.0 * t)) + xlny(n - 1.0 + 2.0 * s * q, (1.0 - n) / (2.0 * t));
    ((s * first + t * second) / (2.0 * n)).max(0.0)
}

/// Accessible information of the maximally overlapping purifications.
pub fn upper_p(ch: &BinaryChannel) -> Result<f64> {
    let f = fidelity_value(&ch.r0, &ch.r1)?;
    Ok(exact_pure_i(f * f, ch.t))
}

/// Mutual information of the qubit measurement along unit axis n.
pub fn j_bloch(a: &[f64; 3], b: &[f64; 3], t: f64, n: &[f64; 3]) -> f64 {
    let (an, bn) = (dot3(a, n), dot3(b, n));
    let p0 = [(1.0 + an) / 2.0, (1.0 - an) / 2.0];
    let p1 = [(1.0 + bn) / 2.0, (1.0 - bn) / 2.0];
    mutual_raw(&p0, &p1, t).max(0.0)
}

/// Residual norm of the stationarity condition for the optimal qubit
/// measurement axis n (unit length).
pub fn vary_residual(a: &[f64; 3], b: &[f64; 3], t: f64, n: &[f64; 3]) -> f64 {
    let c = [0, 1, 2].map(|i| (1.0 - t) * a[i] + t * b[i]);
    let (an, bn, cn) = (dot3(a, n), dot3(b, n), dot3(&c, n));
    let la = ((1.0 + cn) * (1.0 - an) / ((1.0 - cn) * (1.0 + an))).ln();
    let lb = ((1.0 + cn) * (1.0 - bn) / ((1.0 - cn) * (1.0 + bn))).ln();
    let r = [0, 1, 2].map(|i| (1.0 - t) * la * (a[i] - an * n[i]) + t * lb * (b[i] - bn * n[i]));
    norm3(&r)
}

/// Optimal projective qubit measurement for the channel, with its axis.
///
/// Every functional of the outcome distributions used here is convex in
/// the measurement probabilities, so the optimal axis lies in the plane
/// spanned by the two Bloch vectors; the search runs over that great circle.
pub fn optimal_i_2d(ch: &BinaryChannel, grid: usize, refine: usize) -> Result<(f64, [f64; 3])> {
    let (a, b) = ch.blochs()?;
    let t = ch.t;
    let (v, n) = best_axis_in_plane(&a, &b, |n| j_bloch(&a, &b, t, n), grid, refine, true)?;
    Ok((v, n))
}

/// (1 − a·c)b − (1 − b·c)a, the optimal axis in the exactly solvable cases.
pub fn solvable_axis(a: &[f64; 3], b: &[f64; 3], t: f64) -> [f64; 3] {
    let c = [0, 1, 2].map(|i| (1.0 - t) * a[i] + t * b[i]);
    let (ac, bc) = (dot3(a, &c), dot3(b, &c));
    [0, 1, 2].map(|i| (1.0 - ac) * b[i] - (1.0 - bc) * a[i])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BoundKind {
    S,
    Q,
    M,
    L,
    N,
    R,
    P,
    #[serde(rename = "I_num")]
    INum,
    #[serde(rename = "I_pure")]
    IPure,
    J,
}

impl BoundKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::S => "S",
            BoundKind::Q => "Q",
            BoundKind::M => "M",
            BoundKind::L => "L",
            BoundKind::N => "N",
            BoundKind::R => "R",
            BoundKind::P => "P",
            BoundKind::INum => "I_num",
            BoundKind::IPure => "I_pure",
            BoundKind::J => "J",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCurve {
    pub kind: BoundKind,
    /// (t, value in nats).
    pub samples: Vec<(f64, f64)>,
}

/// Knobs for [`bounds_sweep`].
#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub quad_points: usize,
    pub axis_grid: usize,
    pub axis_refine: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { quad_points: QUAD_POINTS, axis_grid: 720, axis_refine: 60 }
    }
}

/// Order of the columns in sweep output.
pub const SWEEP_KINDS: [BoundKind; 8] =
    [BoundKind::Q, BoundKind::M, BoundKind::INum, BoundKind::L, BoundKind::N, BoundKind::R, BoundKind::P, BoundKind::S];

fn point_values(r0: &DensityOperator, r1: &DensityOperator, t: f64, opts: &SweepOptions, kron: Option<&KroneckerL>) -> Result<Vec<Option<f64>>> {
    let ch = BinaryChannel::new(r0.clone(), r1.clone(), t)?;
    let qubit = ch.dim() == 2;
    let l = match kron {
        Some(k) if !qubit => k.value(t),
        _ => upper_l(&ch)?,
    };
    Ok(vec![
        Some(jrw_q(&ch)),
        Some(lower_m(&ch)?.0),
        if qubit { Some(optimal_i_2d(&ch, opts.axis_grid, opts.axis_refine)?.0) } else { None },
        Some(l),
        Some(upper_n_with(&ch, opts.quad_points)?),
        Some(upper_r(&ch)?),
        Some(upper_p(&ch)?),
        Some(holevo_s(&ch)),
    ])
}

/// All bounds on t_i = i/(n−1). The numerically optimized projective
/// information is only produced for qubits. Grid points are evaluated in
/// parallel; output order is fixed.
pub fn bounds_sweep(r0: &DensityOperator, r1: &DensityOperator, n: usize, opts: &SweepOptions) -> Result<Vec<BoundCurve>> {
    check_same_dim(r0, r1)?;
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::BadGrid(n));
    }
    let kron = if r0.dim() > 2 {
        match KroneckerL::new(r0, r1) {
            Ok(k) => Some(k),
            Err(Error::SingularDelta) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let ts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let rows: Vec<Vec<Option<f64>>> =
        ts.par_iter().map(|&t| point_values(r0, r1, t, opts, kron.as_ref())).collect::<Result<_>>()?;
    let mut curves = Vec::new();
    for (k, kind) in SWEEP_KINDS.iter().enumerate() {
        if rows[0][k].is_none() {
            continue;
        }
        let samples = ts.iter().zip(&rows).map(|(&t, r)| (t, r[k].unwrap_or(0.0))).collect();
        curves.push(BoundCurve { kind: *kind, samples });
    }
    Ok(curves)
}

/// Qubit channels used as fixed references: (label, |a|, |b|, angle).
pub fn reference_channels() -> Vec<(&'static str, f64, f64, f64)> {
    use std::f64::consts::PI;
    vec![
        ("pure-mixed-60deg", 1.0, 2.0 / 3.0, PI / 3.0),
        ("pure-mixed-45deg", 1.0, 2.0 / 3.0, PI / 4.0),
        ("pure-pure-45deg", 1.0, 1.0, PI / 4.0),
        ("mixed-mixed-60deg", 0.8, 0.9, PI / 3.0),
        ("pure-pure-60deg", 1.0, 1.0, PI / 3.0),
        ("mixed-mixed-36deg", 0.9, 0.6, PI / 5.0),
        ("equal-mixed-45deg", 2.0 / 3.0, 2.0 / 3.0, PI / 4.0),
    ]
}

/// Unit vector perpendicular to both inputs, for building test channels.
pub fn plane_normal(a: &[f64; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let n = cross3(a, b);
    let l = norm3(&n);
    if l < 1e-12 { None } else { Some(n.map(|x| x / l)) }
}

/// tr of a Hermitian matrix product, shared by tests.
pub fn trace_of_product(a: &CMat, b: &CMat) -> f64 {
    trace_re(&(a * b))
}
