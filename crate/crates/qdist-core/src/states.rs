//! Density operators, measurements, Bloch vectors and purifications.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{
    eigh, hermitian_residual, kron, polar_unitary, re, sqrt_psd, symmetrize, CMat,
    EigenDecomposition, HermitianMatrix, TOL_NULL,
};

const PSD_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const RENORMALIZE_WINDOW: f64 = 1e-6;
const POVM_COMPLETENESS_TOL: f64 = 1e-9;

/// A positive semidefinite Hermitian matrix with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    h: HermitianMatrix,
}

impl DensityOperator {
    /// Validates `m`. A trace within 1e-6 of one is renormalized.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let res = hermitian_residual(&m);
        if res > 1e-8 * m.norm().max(1.0) {
            return Err(Error::NonHermitian(res));
        }
        let mut m = symmetrize(&m);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > RENORMALIZE_WINDOW {
            return Err(Error::BadTrace(tr));
        }
        if (tr - 1.0).abs() > 0.0 {
            m /= re(tr);
        }
        let e = eigh(&m);
        if e.min() < -PSD_TOL {
            return Err(Error::NotPsd(e.min()));
        }
        debug_assert!((m.trace().re - 1.0).abs() <= TRACE_TOL);
        Ok(Self { h: HermitianMatrix::from_raw(m) })
    }

    /// Internal constructor for matrices that are density operators by
    /// construction (mixtures, tensor products, channel outputs).
    pub(crate) fn from_raw(m: CMat) -> Self {
        let m = symmetrize(&m);
        let tr = m.trace().re;
        Self { h: HermitianMatrix::from_raw(m / re(tr)) }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMat::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimMismatch { expected: n, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = re(v);
            }
        }
        Self::new(m)
    }

    pub fn from_diag(p: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diag(p).into_matrix())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_raw(CMat::identity(d, d))
    }

    /// |ψ⟩⟨ψ| for the normalized `psi`.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::BadArgument("zero state vector".into()));
        }
        let v = psi / re(n);
        Ok(Self::from_raw(&v * v.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.h.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn eig(&self) -> EigenDecomposition {
        self.h.eig()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eig().values
    }

    pub fn purity(&self) -> f64 {
        let m = self.matrix();
        (m * m).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().min()
    }

    pub fn is_invertible(&self) -> bool {
        self.min_eigenvalue() > TOL_NULL
    }

    /// (1 − t)·self + t·other.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self::from_raw(self.matrix() * re(1.0 - t) + other.matrix() * re(t)))
    }

    /// (1 − ε)ρ + ε I/D.
    pub fn regularized(&self, eps: f64) -> Self {
        let d = self.dim();
        Self::from_raw(self.matrix() * re(1.0 - eps) + CMat::identity(d, d) * re(eps / d as f64))
    }

    /// UρU†.
    pub fn conjugate_by(&self, u: &CMat) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: u.nrows() });
        }
        Ok(Self::from_raw(u * self.matrix() * u.adjoint()))
    }

    pub fn to_bloch(&self) -> Result<BlochVector> {
        density_to_bloch(self)
    }

    pub fn from_bloch(r: &BlochVector) -> Self {
        bloch_to_density(r)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let parsed: StateJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::BadArgument(format!("state JSON: {e}")))?;
        parsed.into_density()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = self.dim();
        let m = self.matrix();
        let rows: Vec<Vec<[f64; 2]>> = (0..d)
            .map(|i| (0..d).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        serde_json::json!({ "dim": d, "matrix": rows })
    }
}

pub fn make_density(m: CMat) -> Result<DensityOperator> {
    DensityOperator::new(m)
}

pub(crate) fn check_same_dim(a: &DensityOperator, b: &DensityOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(())
}

/// Serialized state: either a full matrix of `[re, im]` pairs or a Bloch vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Matrix { dim: usize, matrix: Vec<Vec<[f64; 2]>> },
    Bloch { bloch: [f64; 3] },
}

impl StateJson {
    pub fn into_density(self) -> Result<DensityOperator> {
        match self {
            StateJson::Bloch { bloch } => Ok(bloch_to_density(&BlochVector::new(bloch)?)),
            StateJson::Matrix { dim, matrix } => {
                if matrix.len() != dim {
                    return Err(Error::DimMismatch { expected: dim, got: matrix.len() });
                }
                let mut m = CMat::zeros(dim, dim);
                for (i, row) in matrix.iter().enumerate() {
                    if row.len() != dim {
                        return Err(Error::DimMismatch { expected: dim, got: row.len() });
                    }
                    for (j, z) in row.iter().enumerate() {
                        m[(i, j)] = Complex64::new(z[0], z[1]);
                    }
                }
                DensityOperator::new(m)
            }
        }
    }
}

/// Real 3-vector of norm at most one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub fn new(r: [f64; 3]) -> Result<Self> {
        let n = norm3(&r);
        if !n.is_finite() || n > 1.0 + 1e-12 {
            return Err(Error::BadBloch(n));
        }
        Ok(Self(r))
    }

    /// `len·(cos θ, sin θ, 0)`.
    pub fn in_plane(len: f64, theta: f64) -> Result<Self> {
        Self::new([len * theta.cos(), len * theta.sin(), 0.0])
    }

    pub fn norm(&self) -> f64 {
        norm3(&self.0)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot3(&self.0, &other.0)
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }
}

pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

pub fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// The Pauli matrices σx, σy, σz.
pub fn pauli() -> [CMat; 3] {
    let i = Complex64::i();
    [
        CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]),
        CMat::from_row_slice(2, 2, &[re(0.0), -i, i, re(0.0)]),
        CMat::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)]),
    ]
}

/// ½(I + r·σ).
pub fn bloch_operator(r: &[f64; 3]) -> CMat {
    let s = pauli();
    (CMat::identity(2, 2) + &s[0] * re(r[0]) + &s[1] * re(r[1]) + &s[2] * re(r[2])) * re(0.5)
}

pub fn bloch_to_density(r: &BlochVector) -> DensityOperator {
    DensityOperator::from_raw(bloch_operator(&r.0))
}

/// r_k = tr(ρ σ_k).
pub fn density_to_bloch(rho: &DensityOperator) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimMismatch { expected: 2, got: rho.dim() });
    }
    let s = pauli();
    let m = rho.matrix();
    let r = [(m * &s[0]).trace().re, (m * &s[1]).trace().re, (m * &s[2]).trace().re];
    // A valid state always gives norm ≤ 1 up to rounding.
    let n = norm3(&r);
    if n > 1.0 {
        return Ok(BlochVector([r[0] / n, r[1] / n, r[2] / n]));
    }
    Ok(BlochVector(r))
}

pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    DensityOperator::from_raw(kron(a.matrix(), b.matrix()))
}

/// Which factor a partial trace keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of an operator on a D_A·D_B space with A the slow index.
pub fn partial_trace_matrix(m: &CMat, da: usize, db: usize, keep: Keep) -> Result<CMat> {
    if m.nrows() != da * db || m.ncols() != da * db {
        return Err(Error::DimMismatch { expected: da * db, got: m.nrows() });
    }
    Ok(match keep {
        Keep::A => CMat::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Keep::B => CMat::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    })
}

pub fn partial_trace(ab: &DensityOperator, dims: (usize, usize), keep: Keep) -> Result<DensityOperator> {
    let m = partial_trace_matrix(ab.matrix(), dims.0, dims.1, keep)?;
    Ok(DensityOperator::from_raw(m))
}

/// Purifications of a pair of states with maximal overlap.
#[derive(Clone, Debug)]
pub struct PurifiedPair {
    /// Vectors on the doubled space, first factor the slow index.
    pub psi0: DVector<Complex64>,
    pub psi1: DVector<Complex64>,
    /// |⟨ψ0|ψ1⟩|².
    pub q: f64,
}

/// Builds (√ρ0 ⊗ I)|Ω⟩ and (√ρ1 ⊗ R)|Ω⟩ with |Ω⟩ = Σ|ii⟩, choosing the
/// unitary R that maximizes the overlap from the polar decomposition of
/// ρ0^{1/2}ρ1^{1/2}.
pub fn purify_pair(r0: &DensityOperator, r1: &DensityOperator) -> Result<PurifiedPair> {
    check_same_dim(r0, r1)?;
    let d = r0.dim();
    let s0 = sqrt_psd(r0.matrix());
    let s1 = sqrt_psd(r1.matrix());
    let u = polar_unitary(&(&s0 * &s1));
    let psi1m = &s1 * &u;
    let flat = |m: &CMat| DVector::from_fn(d * d, |idx, _| m[(idx / d, idx % d)]);
    let psi0 = flat(&s0);
    let psi1 = flat(&psi1m);
    let ov = psi0.dotc(&psi1).norm();
    Ok(PurifiedPair { psi0, psi1, q: ov * ov })
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let g = ginibre(rng, d, d);
    polar_unitary(&g)
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        Complex64::new(a, b)
    })
}

pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityOperator {
    let g = ginibre(rng, d, 1);
    DensityOperator::from_raw(&g * g.adjoint())
}

/// GG†/tr for a D×r complex Gaussian G.
pub fn random_density_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<DensityOperator> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { dim, rank });
    }
    let g = ginibre(rng, dim, rank);
    Ok(DensityOperator::from_raw(&g * g.adjoint()))
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_with(&mut rng, dim, rank)
}

/// Positive operators summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<CMat>,
}

impl Povm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        let d = match elements.first() {
            Some(e) => e.nrows(),
            None => return Err(Error::BadPovm("no outcomes".into())),
        };
        let mut sum = CMat::zeros(d, d);
        for e in &elements {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::DimMismatch { expected: d, got: e.nrows() });
            }
            if hermitian_residual(e) > 1e-9 {
                return Err(Error::BadPovm("element not Hermitian".into()));
            }
            let m = eigh(e).min();
            if m < -PSD_TOL {
                return Err(Error::BadPovm(format!("element has eigenvalue {m:.3e}")));
            }
            sum += e;
        }
        let resid = (sum - CMat::identity(d, d)).norm();
        if resid > POVM_COMPLETENESS_TOL {
            return Err(Error::BadPovm(format!("completeness residual {resid:.3e}")));
        }
        Ok(Self { elements: elements.iter().map(symmetrize).collect() })
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn projective(basis: &CMat) -> Result<Self> {
        let n = basis.ncols();
        Self::new((0..n).map(|k| {
            let v = basis.column(k);
            v * v.adjoint()
        }).collect())
    }

    /// Qubit measurement ½(I ± n̂·σ) along a nonzero axis, "+" first.
    pub fn qubit_axis(n: &[f64; 3]) -> Result<Self> {
        let l = norm3(n);
        if l == 0.0 {
            return Err(Error::BadArgument("zero measurement axis".into()));
        }
        let u = [n[0] / l, n[1] / l, n[2] / l];
        let plus = bloch_operator(&u);
        let minus = CMat::identity(2, 2) - &plus;
        Self::new(vec![plus, minus])
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// tr(ρE_b), clamped at zero against rounding.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: rho.dim() });
        }
        Ok(self
            .elements
            .iter()
            .map(|e| crate::linops::trace_product(rho.matrix(), e).re.max(0.0))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdisc::fidelity_q;
    use proptest::prelude::*;

    #[test]
    fn construction_examples() {
        let m = DensityOperator::new(CMat::identity(2, 2) * re(0.5)).unwrap();
        assert!((m.purity() - 0.5).abs() < 1e-15);
        let p = DensityOperator::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!((p.purity() - 1.0).abs() < 1e-15);
        let bad = DensityOperator::from_real_rows(&[vec![0.6, 0.5], vec![0.5, 0.4]]);
        match bad {
            Err(Error::NotPsd(l)) => assert!((l - (1.0 - 1.04f64.sqrt()) / 2.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            DensityOperator::from_real_rows(&[vec![0.7, 0.0], vec![0.0, 0.4]]),
            Err(Error::BadTrace(_))
        ));
        let mut nh = CMat::identity(2, 2) * re(0.5);
        nh[(0, 1)] = re(0.2);
        assert!(matches!(DensityOperator::new(nh), Err(Error::NonHermitian(_))));
        let near = DensityOperator::from_real_rows(&[vec![0.5 + 4e-7, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((near.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bloch_examples() {
        let z = bloch_to_density(&BlochVector::new([0.0, 0.0, 0.0]).unwrap());
        assert!((z.matrix() - CMat::identity(2, 2) * re(0.5)).norm() < 1e-15);
        let up = bloch_to_density(&BlochVector::new([0.0, 0.0, 1.0]).unwrap());
        assert!((up.matrix() - HermitianMatrix::from_diag(&[1.0, 0.0]).matrix()).norm() < 1e-15);
        let x = bloch_to_density(&BlochVector::new([1.0, 0.0, 0.0]).unwrap());
        assert!((x.matrix() - CMat::from_element(2, 2, re(0.5))).norm() < 1e-15);
        assert!(matches!(BlochVector::new([1.0, 0.1, 0.0]), Err(Error::BadBloch(_))));
        assert!(matches!(
            density_to_bloch(&DensityOperator::maximally_mixed(3)),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_density_with(&mut rng, 2, 2).unwrap();
        let b = random_density_with(&mut rng, 3, 2).unwrap();
        let ab = tensor(&a, &b);
        let ra = partial_trace(&ab, (2, 3), Keep::A).unwrap();
        let rb = partial_trace(&ab, (2, 3), Keep::B).unwrap();
        assert!((ra.matrix() - a.matrix()).norm() < 1e-12);
        assert!((rb.matrix() - b.matrix()).norm() < 1e-12);

        let s = 1.0 / 2f64.sqrt();
        let bell = DVector::from_vec(vec![re(s), re(0.0), re(0.0), re(s)]);
        let bell = DensityOperator::pure(&bell).unwrap();
        let half = CMat::identity(2, 2) * re(0.5);
        assert!((partial_trace(&bell, (2, 2), Keep::A).unwrap().matrix() - &half).norm() < 1e-12);

        // Perfectly correlated diagonal state has the same diagonal marginals.
        let lam = [0.2, 0.3, 0.5];
        let mut m = CMat::zeros(9, 9);
        for (b, &l) in lam.iter().enumerate() {
            m[(b * 3 + b, b * 3 + b)] = re(l);
        }
        let joint = DensityOperator::new(m).unwrap();
        let want = HermitianMatrix::from_diag(&lam);
        for keep in [Keep::A, Keep::B] {
            let r = partial_trace(&joint, (3, 3), keep).unwrap();
            assert!((r.matrix() - want.matrix()).norm() < 1e-12);
        }
        assert!(matches!(partial_trace(&joint, (2, 3), Keep::A), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn tensor_spectrum_is_products() {
        let a = DensityOperator::from_diag(&[0.3, 0.7]).unwrap();
        let b = DensityOperator::from_diag(&[0.1, 0.2, 0.7]).unwrap();
        let mut want: Vec<f64> = [0.3, 0.7].iter().flat_map(|x| [0.1, 0.2, 0.7].map(|y| x * y)).collect();
        want.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let got = tensor(&a, &b).eigenvalues();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-14);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = tensor(&random_pure(&mut rng, 2), &random_pure(&mut rng, 3));
        assert!((p.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purification_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = random_density_with(&mut rng, 3, 3).unwrap();
        assert!((purify_pair(&r, &r).unwrap().q - 1.0).abs() < 1e-10);
        let a = DensityOperator::from_diag(&[1.0, 0.0]).unwrap();
        let b = DensityOperator::from_diag(&[0.0, 1.0]).unwrap();
        assert!(purify_pair(&a, &b).unwrap().q.abs() < 1e-12);
    }

    #[test]
    fn random_density_rank_and_determinism() {
        let p = random_density(3, 1, 5).unwrap();
        assert!((p.purity() - 1.0).abs() < 1e-12);
        assert_eq!(random_density(4, 4, 77).unwrap(), random_density(4, 4, 77).unwrap());
        assert!(matches!(random_density(2, 3, 0), Err(Error::BadRank { .. })));
        assert!(matches!(random_density(2, 0, 0), Err(Error::BadRank { .. })));
        let e = random_density(4, 2, 8).unwrap().eigenvalues();
        assert!(e[0].abs() < TOL_NULL && e[1].abs() < TOL_NULL && e[2] > 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mean: f64 = (0..1000)
            .map(|_| random_density_with(&mut rng, 2, 2).unwrap().to_bloch().unwrap().norm())
            .sum::<f64>()
            / 1000.0;
        assert!(mean > 0.0 && mean < 1.0);
    }

    #[test]
    fn povm_validation() {
        let z = Povm::qubit_axis(&[0.0, 0.0, 1.0]).unwrap();
        let rho = DensityOperator::from_diag(&[0.25, 0.75]).unwrap();
        let p = z.probabilities(&rho).unwrap();
        assert!((p[0] - 0.25).abs() < 1e-15);
        let half = CMat::identity(2, 2) * re(0.5);
        assert!(matches!(Povm::new(vec![half.clone()]), Err(Error::BadPovm(_))));
        assert!(Povm::new(vec![half.clone(), half]).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let r = random_density_with(&mut rng, 3, 2).unwrap();
        let back = DensityOperator::from_json(&r.to_json()).unwrap();
        assert!((back.matrix() - r.matrix()).norm() < 1e-15);
        let b = DensityOperator::from_json(&serde_json::json!({"bloch": [0.0, 0.0, 1.0]})).unwrap();
        assert!((b.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn bloch_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let n = norm3(&[x, y, z]);
            let s = if n > 1.0 { 1.0 / n } else { 1.0 };
            let r = BlochVector::new([x * s, y * s, z * s]).unwrap();
            let rho = bloch_to_density(&r);
            let back = density_to_bloch(&rho).unwrap();
            for k in 0..3 {
                prop_assert!((back.0[k] - r.0[k]).abs() <= 1e-12);
            }
            let e = rho.eigenvalues();
            prop_assert!((e[0] - (1.0 - r.norm()) / 2.0).abs() <= 1e-12);
            prop_assert!((e[1] - (1.0 + r.norm()) / 2.0).abs() <= 1e-12);
            prop_assert_eq!((rho.purity() - 1.0).abs() <= 1e-10, (r.norm() - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn partial_trace_preserves_trace_and_positivity(seed in 0u64..10_000, da in 1usize..4, db in 1usize..4, rank in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rank = rank.min(da * db);
            let ab = random_density_with(&mut rng, da * db, rank).unwrap();
            for keep in [Keep::A, Keep::B] {
                let m = partial_trace_matrix(ab.matrix(), da, db, keep).unwrap();
                prop_assert!((m.trace().re - 1.0).abs() <= 1e-12);
                prop_assert!(eigh(&m).min() >= -1e-12);
            }
        }

        #[test]
        fn purification_attains_fidelity(seed in 0u64..10_000, d in 2usize..4, r0 in 1usize..4, r1 in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_density_with(&mut rng, d, r0.min(d)).unwrap();
            let b = random_density_with(&mut rng, d, r1.min(d)).unwrap();
            let pp = purify_pair(&a, &b).unwrap();
            for (psi, rho) in [(&pp.psi0, &a), (&pp.psi1, &b)] {
                let joint = psi * psi.adjoint();
                let marg = partial_trace_matrix(&joint, d, d, Keep::A).unwrap();
                prop_assert!((marg - rho.matrix()).norm() <= 1e-9);
            }
            let f = fidelity_q(&a, &b).unwrap().f;
            prop_assert!((pp.q.sqrt() - f).abs() <= 1e-9);
            prop_assert!((pp.q - f * f).abs() <= 1e-9);
        }
    }
}
