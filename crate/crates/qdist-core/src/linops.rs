//! Dense Hermitian linear algebra and the operator-equation solvers used by
//! every other module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Hermiticity tolerance after symmetrization.
pub const TOL_HERM: f64 = 1e-12;
/// Eigenvalues at or below this magnitude span the numerical null space.
pub const TOL_NULL: f64 = 1e-10;

const NON_HERMITIAN_LIMIT: f64 = 1e-8;
const DEGENERACY_TOL: f64 = 1e-9;

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A square matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Validates and symmetrizes `m`.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let res = hermitian_residual(&m);
        if res > NON_HERMITIAN_LIMIT * m.norm().max(1.0) {
            return Err(Error::NonHermitianInput(res));
        }
        Ok(Self(symmetrize(&m)))
    }

    /// Symmetrizes without checking. Callers guarantee Hermiticity up to rounding.
    pub(crate) fn from_raw(m: CMat) -> Self {
        Self(symmetrize(&m))
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

    pub fn from_diag(d: &[f64]) -> Self {
        let v = DVector::from_iterator(d.len(), d.iter().map(|&x| re(x)));
        Self(CMat::from_diagonal(&v))
    }

    pub fn identity(d: usize) -> Self {
        Self(CMat::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(CMat::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eig(&self) -> EigenDecomposition {
        eigh(&self.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }
}

/// Eigenvalues in ascending order with unitary eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// V f(Λ) V†.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let fk = f(self.values[k]);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.apply(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Projector onto the eigenvector `k`.
    pub fn projector(&self, k: usize) -> CMat {
        let v = self.vectors.column(k);
        v * v.adjoint()
    }
}

pub fn hermitian_residual(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

pub fn eig_hermitian(a: &HermitianMatrix) -> EigenDecomposition {
    eigh(a.matrix())
}

/// Hermitian eigendecomposition of the symmetrized part of `m`.
///
/// Eigenvectors are canonicalized so the output does not depend on the
/// internals of the solver: a nondegenerate vector has its first component
/// of at least half the maximal modulus made real and positive, and a
/// degenerate eigenspace is spanned by Gram-Schmidt on projected standard
/// basis vectors, picked by the same rule.
pub fn eigh(m: &CMat) -> EigenDecomposition {
    let h = symmetrize(m);
    let n = h.nrows();
    if n == 0 {
        return EigenDecomposition { values: vec![], vectors: CMat::zeros(0, 0) };
    }
    let se = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        se.eigenvalues[i]
            .partial_cmp(&se.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(i));
    }
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= DEGENERACY_TOL * scale {
            end += 1;
        }
        canonicalize_block(&mut vectors, start, end);
        start = end;
    }
    EigenDecomposition { values, vectors }
}

fn pick_index(norms: &[f64]) -> usize {
    let max = norms.iter().cloned().fold(0.0, f64::max);
    norms.iter().position(|&x| x >= 0.5 * max).unwrap_or(0)
}

fn canonicalize_block(v: &mut CMat, start: usize, end: usize) {
    let n = v.nrows();
    if end - start == 1 {
        let col = v.column(start).clone_owned();
        let norms: Vec<f64> = col.iter().map(|z| z.norm()).collect();
        let j = pick_index(&norms);
        let z = col[j];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            v.set_column(start, &col.map(|x| x * phase));
        }
        return;
    }
    let block = v.columns(start, end - start).clone_owned();
    let proj = &block * block.adjoint();
    let mut chosen: Vec<DVector<Complex64>> = Vec::new();
    for _ in start..end {
        let mut residuals = Vec::with_capacity(n);
        for j in 0..n {
            let mut r = proj.column(j).clone_owned();
            for q in &chosen {
                let c = q.dotc(&r);
                r -= q * c;
            }
            residuals.push(r);
        }
        let norms: Vec<f64> = residuals.iter().map(|r| r.norm()).collect();
        let j = pick_index(&norms);
        let r = &residuals[j];
        chosen.push(r / re(norms[j]));
    }
    for (k, q) in chosen.iter().enumerate() {
        v.set_column(start + k, q);
    }
}

/// V f(Λ) V†. With `support_only`, eigenvalues of magnitude at most
/// `TOL_NULL` map to zero instead of being passed to `f`.
pub fn func_hermitian(
    a: &HermitianMatrix,
    f: impl Fn(f64) -> f64,
    support_only: bool,
) -> Result<HermitianMatrix> {
    let e = a.eig();
    let mut fv = Vec::with_capacity(e.dim());
    for &x in &e.values {
        if support_only && x.abs() <= TOL_NULL {
            fv.push(0.0);
            continue;
        }
        let y = f(x);
        if !y.is_finite() {
            return Err(Error::SingularInput(x));
        }
        fv.push(y);
    }
    let out = EigenDecomposition { values: fv, vectors: e.vectors.clone() }.reconstruct();
    Ok(HermitianMatrix::from_raw(out))
}

/// Positive square root. Negative rounding noise is clamped to zero, and
/// eigenvalues below 1e-15 of the largest are treated as zero so that
/// rank-deficient inputs keep their exact null space.
pub fn sqrt_psd(m: &CMat) -> CMat {
    let e = eigh(m);
    let cut = 1e-15 * e.max().abs().max(1.0);
    symmetrize(&e.apply(|x| if x > cut { x.sqrt() } else { 0.0 }))
}

/// `m^p` for positive definite `m`.
pub fn pow_pd(m: &CMat, p: f64) -> Result<CMat> {
    let e = eigh(m);
    if e.min() <= TOL_NULL {
        return Err(Error::SingularInput(e.min()));
    }
    Ok(symmetrize(&e.apply(|x| x.powf(p))))
}

/// `m^p` on the support, zero on the null space.
pub fn pow_support(m: &CMat, p: f64) -> CMat {
    symmetrize(&eigh(m).apply(|x| if x > TOL_NULL { x.powf(p) } else { 0.0 }))
}

pub fn ln_pd(m: &CMat) -> Result<CMat> {
    let e = eigh(m);
    if e.min() <= TOL_NULL {
        return Err(Error::SingularInput(e.min()));
    }
    Ok(symmetrize(&e.apply(f64::ln)))
}

/// tr(ρ ln X) with the convention that directions where X vanishes
/// contribute nothing when ρ has no weight there.
pub fn trace_rho_ln(rho: &CMat, x: &CMat) -> Result<f64> {
    let e = eigh(x);
    let mut acc = 0.0;
    for k in 0..e.dim() {
        let v = e.vectors.column(k);
        let w = (v.adjoint() * rho * v)[(0, 0)].re;
        let lam = e.values[k];
        if lam > TOL_NULL {
            acc += w * lam.ln();
        } else if w > 1e-9 {
            return Err(Error::SupportViolation);
        }
    }
    Ok(acc)
}

pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// tr(AB) without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    (a * b - b * a).norm()
}

/// Solves ρX + Xρ = 2A in the eigenbasis of ρ, with X set to zero on the
/// null space of ρ.
pub fn lowering_solve(rho: &HermitianMatrix, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = rho.eig();
    lowering_solve_eig(&e, a.matrix()).map(HermitianMatrix::from_raw)
}

/// Same as [`lowering_solve`] with a precomputed decomposition of ρ.
pub fn lowering_solve_eig(e: &EigenDecomposition, a: &CMat) -> Result<CMat> {
    let n = e.dim();
    let v = &e.vectors;
    let at = v.adjoint() * a * v;
    let limit = 1e-9 * a.norm().max(1.0);
    let mut x = CMat::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let s = e.values[j] + e.values[k];
            if s > TOL_NULL {
                x[(j, k)] = at[(j, k)] * (2.0 / s);
            } else if at[(j, k)].norm() > limit {
                return Err(Error::UnsolvableLyapunov(at[(j, k)].norm()));
            }
        }
    }
    Ok(symmetrize(&(v * x * v.adjoint())))
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec_of(m: &CMat) -> DVector<Complex64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &DVector<Complex64>, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

/// I ⊗ b + cᵀ ⊗ I, the matrix of X ↦ bX + Xc under column stacking.
pub fn kron_sum(b: &CMat, c: &CMat) -> CMat {
    let n = b.nrows();
    let m = c.nrows();
    kron(&CMat::identity(m, m), b) + kron(&c.transpose(), &CMat::identity(n, n))
}

/// Solves bX + Xc† = d for general square b, c through the vectorized system.
pub fn sylvester_solve(b: &CMat, c: &CMat, d: &CMat) -> Result<CMat> {
    let n = b.nrows();
    let m = c.nrows();
    if d.nrows() != n || d.ncols() != m {
        return Err(Error::DimMismatch { expected: n * m, got: d.nrows() * d.ncols() });
    }
    let k = kron_sum(b, &c.adjoint());
    let lu = k.lu();
    let x = lu.solve(&vec_of(d)).ok_or(Error::SingularKroneckerSum(0.0))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularKroneckerSum(0.0));
    }
    Ok(unvec(&x, n, m))
}

/// Solves bX + Xc† = d for Hermitian b, c.
pub fn kron_sum_solve(b: &HermitianMatrix, c: &HermitianMatrix, d: &CMat) -> Result<CMat> {
    let eb = b.eig();
    let ec = c.eig();
    let scale = eb
        .values
        .iter()
        .chain(ec.values.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let mut smallest = f64::INFINITY;
    for x in &eb.values {
        for y in &ec.values {
            smallest = smallest.min((x + y).abs());
        }
    }
    if smallest <= 1e-12 * scale {
        return Err(Error::SingularKroneckerSum(smallest));
    }
    sylvester_solve(b.matrix(), c.matrix(), d)
}

/// Unitary U with U·o = sqrt(o†o). On the kernel of `o` the map is
/// completed by pairing canonical bases of ker(o) and range(o)^⊥ in order.
pub fn polar_unitary(o: &CMat) -> CMat {
    let n = o.nrows();
    let e = eigh(&(o.adjoint() * o));
    let scale = e.max().max(1.0);
    let mut u = CMat::zeros(n, n);
    let mut kernel = Vec::new();
    let mut range_cols = Vec::new();
    for k in 0..n {
        let v = e.vectors.column(k).clone_owned();
        let lam = e.values[k];
        if lam > 1e-14 * scale {
            let mut w = (o * &v) / re(lam.sqrt());
            for q in &range_cols {
                let c = (q as &DVector<Complex64>).dotc(&w);
                w -= q * c;
            }
            let nw = w.norm();
            w /= re(nw);
            u += &v * w.adjoint();
            range_cols.push(w);
        } else {
            kernel.push(v);
        }
    }
    if !kernel.is_empty() {
        let mut comp = CMat::identity(n, n);
        for w in &range_cols {
            comp -= w * w.adjoint();
        }
        let ec = eigh(&comp);
        // Eigenvalue-1 eigenvectors come last in ascending order.
        let m = kernel.len();
        for (i, kv) in kernel.iter().enumerate() {
            let col = ec.vectors.column(n - m + i).clone_owned();
            u += kv * col.adjoint();
        }
    }
    u
}

/// Composite Simpson rule on equally spaced samples over [lo, hi].
pub fn integrate_scalar(samples: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let n = samples.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::BadGrid(n));
    }
    let h = (hi - lo) / (n - 1) as f64;
    let mut acc = samples[0] + samples[n - 1];
    for (i, &s) in samples.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * s } else { 2.0 * s };
    }
    Ok(acc * h / 3.0)
}

/// Simpson integration of `f` sampled on `n` points.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Result<f64> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::BadGrid(n));
    }
    let h = (hi - lo) / (n - 1) as f64;
    let samples: Vec<f64> = (0..n).map(|i| f(lo + h * i as f64)).collect();
    integrate_scalar(&samples, lo, hi)
}

/// Simpson rule after the substitution s = lo + (hi-lo)(1 - cos πu)/2,
/// which clusters nodes at both ends and removes square-root endpoint
/// behaviour from the integrand.
pub fn simpson_clustered(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Result<f64> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::BadGrid(n));
    }
    let w = hi - lo;
    let pi = std::f64::consts::PI;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let u = i as f64 / (n - 1) as f64;
            // The Jacobian vanishes at both ends; never evaluate f there.
            let jac = 0.5 * w * pi * (pi * u).sin();
            if i == 0 || i == n - 1 {
                0.0
            } else {
                f(lo + 0.5 * w * (1.0 - (pi * u).cos())) * jac
            }
        })
        .collect();
    integrate_scalar(&samples, 0.0, 1.0)
}
