//! Brute-force measurement optimization, used as ground truth for the
//! closed forms elsewhere in the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{kl_raw, mutual_raw, Distribution, MAX_STRINGS};
use crate::error::{Error, Result};
use crate::linops::{eigh, CMat};
use crate::qdisc::golden_min;
use crate::states::{check_same_dim, cross3, dot3, norm3, DensityOperator, Povm};

/// Default number of random restarts for [`optimize_povm`].
pub const DEFAULT_RESTARTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    MinOverlap,
    MinError,
    MaxKl,
    MaxMutual,
}

impl FunctionalKind {
    pub fn minimizes(&self) -> bool {
        matches!(self, FunctionalKind::MinOverlap | FunctionalKind::MinError)
    }
}

/// An objective over measurements of a pair of states. `t` is the prior
/// weight of `r1`; it only matters for the error and mutual information.
#[derive(Clone, Debug)]
pub struct Functional {
    pub kind: FunctionalKind,
    pub r0: DensityOperator,
    pub r1: DensityOperator,
    pub t: f64,
}

impl Functional {
    pub fn new(kind: FunctionalKind, r0: DensityOperator, r1: DensityOperator, t: f64) -> Result<Self> {
        Self::from_states(kind, &[r0, r1], t)
    }

    /// Only binary ensembles are supported.
    pub fn from_states(kind: FunctionalKind, states: &[DensityOperator], t: f64) -> Result<Self> {
        if states.len() != 2 {
            return Err(Error::BadFunctional(format!("{} signal states, only 2 supported", states.len())));
        }
        check_same_dim(&states[0], &states[1])?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::BadArgument(format!("prior {t} outside [0,1]")));
        }
        Ok(Self { kind, r0: states[0].clone(), r1: states[1].clone(), t })
    }

    pub fn dim(&self) -> usize {
        self.r0.dim()
    }

    fn score_probs(&self, p0: &[f64], p1: &[f64]) -> f64 {
        match self.kind {
            FunctionalKind::MinOverlap => p0.iter().zip(p1).map(|(a, b)| (a * b).sqrt()).sum(),
            FunctionalKind::MinError => {
                p0.iter().zip(p1).map(|(a, b)| ((1.0 - self.t) * a).min(self.t * b)).sum()
            }
            FunctionalKind::MaxKl => kl_raw(p0, p1),
            FunctionalKind::MaxMutual => mutual_raw(p0, p1, self.t),
        }
    }

    /// Value at a measurement; outcomes are read with the Bayes decision rule.
    pub fn evaluate(&self, m: &Povm) -> Result<f64> {
        Ok(self.score_probs(&m.probabilities(&self.r0)?, &m.probabilities(&self.r1)?))
    }

    fn axis_value(&self, a: &[f64; 3], b: &[f64; 3], n: &[f64; 3]) -> f64 {
        let (an, bn) = (dot3(a, n), dot3(b, n));
        let clip = |x: f64| x.clamp(0.0, 1.0);
        let p0 = [clip((1.0 + an) / 2.0), clip((1.0 - an) / 2.0)];
        let p1 = [clip((1.0 + bn) / 2.0), clip((1.0 - bn) / 2.0)];
        self.score_probs(&p0, &p1)
    }

    /// Value oriented so that smaller is better.
    fn loss(&self, v: f64) -> f64 {
        if self.kind.minimizes() { v } else { -v }
    }
}

/// Orthonormal pair spanning a plane that contains both vectors.
fn plane_basis(a: &[f64; 3], b: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let unit = |v: [f64; 3]| {
        let l = norm3(&v);
        v.map(|x| x / l)
    };
    let e1 = if norm3(a) > 1e-12 {
        unit(*a)
    } else if norm3(b) > 1e-12 {
        unit(*b)
    } else {
        [1.0, 0.0, 0.0]
    };
    let r = [0, 1, 2].map(|i| b[i] - dot3(b, &e1) * e1[i]);
    let e2 = if norm3(&r) > 1e-12 * norm3(b).max(1e-300) && norm3(&r) > 1e-14 {
        unit(r)
    } else {
        // Any direction perpendicular to e1.
        let k = (0..3).min_by(|&i, &j| e1[i].abs().partial_cmp(&e1[j].abs()).unwrap()).unwrap();
        let mut axis = [0.0; 3];
        axis[k] = 1.0;
        unit(cross3(&e1, &axis))
    };
    (e1, e2)
}

/// Best measurement axis on the great circle through the plane of a and b:
/// a grid over [0, π) followed by golden-section refinement of the best
/// cell. The refined point replaces the grid incumbent only if it is no
/// worse. Returns (value, unit axis).
pub(crate) fn best_axis_in_plane(
    a: &[f64; 3],
    b: &[f64; 3],
    f: impl Fn(&[f64; 3]) -> f64,
    grid: usize,
    refine: usize,
    maximize: bool,
) -> Result<(f64, [f64; 3])> {
    if grid < 3 {
        return Err(Error::BadGrid(grid));
    }
    let (e1, e2) = plane_basis(a, b);
    let axis = |psi: f64| [0, 1, 2].map(|i| psi.cos() * e1[i] + psi.sin() * e2[i]);
    let loss = |psi: f64| {
        let v = f(&axis(psi));
        if maximize { -v } else { v }
    };
    let h = std::f64::consts::PI / grid as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..grid {
        let psi = h * i as f64;
        let v = loss(psi);
        if v < best.0 {
            best = (v, psi);
        }
    }
    if refine > 0 {
        let psi = golden_min(&loss, best.1 - h, best.1 + h, 0.0, refine);
        let v = loss(psi);
        if v <= best.0 {
            best = (v, psi);
        }
    }
    let value = if maximize { -best.0 } else { best.0 };
    Ok((value, axis(best.1)))
}

/// Optimal projective qubit measurement on the great circle through both
/// Bloch vectors. All four objectives are convex (max) or concave (min) in
/// the outcome probabilities, which are affine in the axis, so the optimum
/// over the Bloch ball of axes sits on that circle.
pub fn optimize_projective_2d(f: &Functional, grid: usize, refine: usize) -> Result<(f64, [f64; 3])> {
    if f.dim() != 2 {
        return Err(Error::DimMismatch { expected: 2, got: f.dim() });
    }
    let a = f.r0.to_bloch()?.coords();
    let b = f.r1.to_bloch()?.coords();
    best_axis_in_plane(&a, &b, |n| f.axis_value(&a, &b, n), grid, refine, !f.kind.minimizes())
}

/// Projective search over the whole sphere of axes: a Fibonacci grid of
/// `points` directions, then alternating golden searches along two
/// tangent great circles. Used to cross-check the great-circle reduction.
pub fn optimize_projective_sphere(f: &Functional, points: usize, rounds: usize) -> Result<(f64, [f64; 3])> {
    if f.dim() != 2 {
        return Err(Error::DimMismatch { expected: 2, got: f.dim() });
    }
    if points < 3 {
        return Err(Error::BadGrid(points));
    }
    let a = f.r0.to_bloch()?.coords();
    let b = f.r1.to_bloch()?.coords();
    let loss = |n: &[f64; 3]| f.loss(f.axis_value(&a, &b, n));
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = (f64::INFINITY, [0.0, 0.0, 1.0]);
    for i in 0..points {
        let z = 1.0 - (i as f64 + 0.5) / points as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        let n = [r * phi.cos(), r * phi.sin(), z];
        let v = loss(&n);
        if v < best.0 {
            best = (v, n);
        }
    }
    let step = 4.0 * (std::f64::consts::PI / points as f64).sqrt();
    for _ in 0..rounds {
        let n = best.1;
        let (t1, _) = plane_basis(&cross3(&n, &[0.3, 0.5, 0.8]), &n);
        let t2 = cross3(&n, &t1);
        for t in [t1, t2] {
            let along = |s: f64| [0, 1, 2].map(|i| s.cos() * n[i] + s.sin() * t[i]);
            let s = golden_min(&|s: f64| loss(&along(s)), -step, step, 1e-12, 100);
            let v = loss(&along(s));
            if v <= best.0 {
                best = (v, along(s));
            }
        }
    }
    Ok((f.loss(best.0), best.1))
}

/// Rank-one POVM from the rows of Z(Z†Z)^{-1/2}.
fn povm_from_params(x: &[f64], n: usize, d: usize) -> Option<Povm> {
    let z = DMatrix::from_fn(n, d, |i, j| {
        let k = 2 * (i * d + j);
        Complex64::new(x[k], x[k + 1])
    });
    let s = z.adjoint() * &z;
    let e = eigh(&s);
    if e.min() <= 1e-12 * e.max().max(1e-300) {
        return None;
    }
    let w = &z * e.apply(|v| 1.0 / v.sqrt());
    let elements: Vec<CMat> = (0..n)
        .map(|b| {
            let row = w.row(b);
            row.adjoint() * row
        })
        .collect();
    Povm::new(elements).ok()
}

fn bfgs(loss: impl Fn(&[f64]) -> f64, mut x: Vec<f64>, iters: usize) -> (f64, Vec<f64>) {
    let m = x.len();
    let h = 1e-6;
    let grad = |x: &[f64], fx: f64| -> Vec<f64> {
        let mut xp = x.to_vec();
        (0..m)
            .map(|i| {
                let xi = xp[i];
                xp[i] = xi + h;
                let up = loss(&xp);
                xp[i] = xi - h;
                let dn = loss(&xp);
                xp[i] = xi;
                if up.is_finite() && dn.is_finite() {
                    (up - dn) / (2.0 * h)
                } else if up.is_finite() {
                    (up - fx) / h
                } else {
                    0.0
                }
            })
            .collect()
    };
    let mut fx = loss(&x);
    if !fx.is_finite() {
        return (fx, x);
    }
    let mut g = grad(&x, fx);
    let mut hinv = DMatrix::<f64>::identity(m, m);
    for _ in 0..iters {
        let gv = nalgebra::DVector::from_vec(g.clone());
        if gv.amax() < 1e-10 {
            break;
        }
        let mut p = -(&hinv * &gv);
        if p.dot(&gv) >= 0.0 {
            hinv = DMatrix::identity(m, m);
            p = -gv.clone();
        }
        let slope = p.dot(&gv);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let xn: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + alpha * b).collect();
            let fnew = loss(&xn);
            if fnew.is_finite() && fnew <= fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fnew));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let gn = grad(&xn, fnew);
        let s = nalgebra::DVector::from_iterator(m, xn.iter().zip(&x).map(|(a, b)| a - b));
        let y = nalgebra::DVector::from_iterator(m, gn.iter().zip(&g).map(|(a, b)| a - b));
        let sy = s.dot(&y);
        let done = (fx - fnew).abs() <= 1e-15 * fx.abs().max(1.0);
        x = xn;
        fx = fnew;
        g = gn;
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        if done {
            break;
        }
    }
    (fx, x)
}

/// Best rank-one POVM with `outcomes` elements found by quasi-Newton
/// descent from `restarts` random starts. Restarts run in parallel; the
/// reduction keeps the lowest-index restart among equals, so the result
/// depends only on the seed.
pub fn optimize_povm(f: &Functional, outcomes: usize, seed: u64, restarts: usize) -> Result<(f64, Povm)> {
    let d = f.dim();
    if d > 4 {
        return Err(Error::TooLarge(format!("dimension {d} > 4")));
    }
    if outcomes < d || outcomes > d * d {
        return Err(Error::BadArgument(format!("{outcomes} outcomes outside [{d}, {}]", d * d)));
    }
    if restarts == 0 {
        return Err(Error::BadArgument("need at least one restart".into()));
    }
    let loss = |x: &[f64]| match povm_from_params(x, outcomes, d) {
        Some(m) => f.evaluate(&m).map(|v| f.loss(v)).unwrap_or(f64::INFINITY),
        None => f64::INFINITY,
    };
    let runs: Vec<(f64, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            let x0: Vec<f64> = (0..2 * outcomes * d).map(|_| StandardNormal.sample(&mut rng)).collect();
            bfgs(loss, x0, 400)
        })
        .collect();
    let mut best: Option<&(f64, Vec<f64>)> = None;
    for run in &runs {
        if run.0.is_finite() && best.is_none_or(|b| run.0 < b.0) {
            best = Some(run);
        }
    }
    let (v, x) = best.ok_or_else(|| Error::NoConvergence("every restart failed".into()))?;
    let povm = povm_from_params(x, outcomes, d).ok_or_else(|| Error::NoConvergence("degenerate optimum".into()))?;
    Ok((f.loss(*v), povm))
}

/// Minimum error for n independent copies by direct enumeration of all
/// outcome strings.
pub fn multicopy_error_exact(p0: &Distribution, p1: &Distribution, pi0: f64, n: usize) -> Result<f64> {
    if p0.len() != p1.len() {
        return Err(Error::LengthMismatch(p0.len(), p1.len()));
    }
    if !(0.0..=1.0).contains(&pi0) {
        return Err(Error::BadArgument(format!("prior {pi0} outside [0,1]")));
    }
    let k = p0.len();
    if (k as f64).powi(n as i32) > MAX_STRINGS as f64 {
        return Err(Error::TooLarge(format!("{k}^{n} outcome strings")));
    }
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let a: f64 = idx.iter().map(|&i| p0.probs()[i]).product();
        let b: f64 = idx.iter().map(|&i| p1.probs()[i]).product();
        total += (pi0 * a).min((1.0 - pi0) * b);
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(total);
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
