//! Broadcasting and cloning of a pair of states.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};

use crate::error::{Error, Result};
use crate::linops::{commutator_norm, eigh, CMat};
use crate::qdisc::fidelity_value;
use crate::states::{check_same_dim, DensityOperator};

/// Frobenius tolerance on [ρ0, ρ1] for treating a pair as commuting.
pub const COMMUTE_TOL: f64 = 1e-9;
const COMPLETENESS_TOL: f64 = 1e-9;

/// Completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug)]
pub struct Channel {
    kraus: Vec<CMat>,
    d_in: usize,
    d_out: usize,
}

impl Channel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::BadChannel("no Kraus operators".into()))?;
        let (d_out, d_in) = first.shape();
        if kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::BadChannel("Kraus operators differ in shape".into()));
        }
        let sum = kraus.iter().fold(CMat::zeros(d_in, d_in), |acc, k| acc + k.adjoint() * k);
        let res = (sum - CMat::identity(d_in, d_in)).norm();
        if res > COMPLETENESS_TOL {
            return Err(Error::BadChannel(format!("completeness residual {res:e}")));
        }
        Ok(Self { kraus, d_in, d_out })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![CMat::identity(d, d)], d_in: d, d_out: d }
    }

    /// ρ ↦ (1−p)ρ + p I/D.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadArgument(format!("depolarizing weight {p} outside [0,1]")));
        }
        let mut kraus = vec![CMat::identity(d, d) * Complex64::new((1.0 - p).sqrt(), 0.0)];
        let w = (p / d as f64).sqrt();
        for i in 0..d {
            for j in 0..d {
                let mut k = CMat::zeros(d, d);
                k[(i, j)] = Complex64::new(w, 0.0);
                kraus.push(k);
            }
        }
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        channel_apply(self, rho)
    }
}

/// Σ_k A_k ρ A_k†.
pub fn channel_apply(ch: &Channel, rho: &DensityOperator) -> Result<DensityOperator> {
    if rho.dim() != ch.d_in {
        return Err(Error::DimMismatch { expected: ch.d_in, got: rho.dim() });
    }
    let out = ch.kraus.iter().fold(CMat::zeros(ch.d_out, ch.d_out), |acc, k| acc + k * rho.matrix() * k.adjoint());
    Ok(DensityOperator::from_raw(crate::linops::symmetrize(&out)))
}

/// Random channel from the blocks of a Haar-like isometry C^{d_in} → C^{d_out}⊗C^{n}.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, d_in: usize, d_out: usize, n_kraus: usize) -> Result<Channel> {
    if n_kraus == 0 || d_out * n_kraus < d_in {
        return Err(Error::BadArgument(format!("{n_kraus} Kraus operators cannot map {d_in} into {d_out}")));
    }
    let rows = d_out * n_kraus;
    let z = CMat::from_fn(rows, d_in, |_, _| {
        Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
    });
    let s = eigh(&(z.adjoint() * &z));
    let v = &z * s.apply(|x| 1.0 / x.sqrt());
    let kraus = (0..n_kraus).map(|k| v.rows(k * d_out, d_out).into_owned()).collect();
    Channel::new(kraus)
}

/// Two states can be broadcast exactly iff they commute.
pub fn can_broadcast(r0: &DensityOperator, r1: &DensityOperator) -> bool {
    r0.dim() == r1.dim() && commutator_norm(r0.matrix(), r1.matrix()) <= COMMUTE_TOL
}

/// Orthonormal basis diagonalizing both commuting states.
fn common_eigenbasis(r0: &DensityOperator, r1: &DensityOperator) -> Result<CMat> {
    let off = |w: &CMat, m: &CMat| {
        let t = w.adjoint() * m * w;
        let mut s = 0.0;
        for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                if i != j {
                    s += t[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    // A generic combination separates any degeneracy of one state that the
    // other lifts.
    for c in [std::f64::consts::SQRT_2, std::f64::consts::E, 0.5772156649] {
        let w = eigh(&(r0.matrix() + r1.matrix() * Complex64::new(c, 0.0))).vectors;
        if off(&w, r0.matrix()) <= 1e-10 && off(&w, r1.matrix()) <= 1e-10 {
            return Ok(w);
        }
    }
    Err(Error::NonCommuting(commutator_norm(r0.matrix(), r1.matrix())))
}

/// Controlled shift U|w_b⟩|w_k⟩ = |w_b⟩|w_{k+b mod D}⟩ in the basis w; with
/// the ancilla in |w_0⟩ it copies each basis vector.
pub fn controlled_copy_unitary(w: &CMat) -> CMat {
    let d = w.nrows();
    let mut u = CMat::zeros(d * d, d * d);
    for b in 0..d {
        let proj = w.column(b) * w.column(b).adjoint();
        let mut shift = CMat::zeros(d, d);
        for k in 0..d {
            shift += w.column((k + b) % d) * w.column(k).adjoint();
        }
        u += crate::linops::kron(&proj, &shift);
    }
    u
}

/// Channel D → D² whose two marginals reproduce each of the commuting
/// inputs: copy the common eigenbasis onto an ancilla prepared in its first
/// vector.
pub fn build_commuting_broadcaster(r0: &DensityOperator, r1: &DensityOperator) -> Result<Channel> {
    check_same_dim(r0, r1)?;
    let norm = commutator_norm(r0.matrix(), r1.matrix());
    if norm > COMMUTE_TOL {
        return Err(Error::NonCommuting(norm));
    }
    let w = common_eigenbasis(r0, r1)?;
    let d = w.nrows();
    let u = controlled_copy_unitary(&w);
    let attach = crate::linops::kron(&CMat::identity(d, d), &CMat::from_column_slice(d, 1, w.column(0).as_slice()));
    Channel::new(vec![u * attach])
}

/// Exact cloning of a pair is possible only for identical or orthogonal states.
pub fn cloning_feasible(r0: &DensityOperator, r1: &DensityOperator) -> bool {
    match fidelity_value(r0, r1) {
        Ok(f) => f <= 1e-9 || f >= 1.0 - 1e-9,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::kron;
    use crate::qdisc::fidelity_q;
    use crate::states::{partial_trace, random_density_with, random_pure, tensor, BlochVector, Keep};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn marginals(out: &DensityOperator, d: usize) -> (CMat, CMat) {
        (
            partial_trace(out, (d, d), Keep::A).unwrap().matrix().clone(),
            partial_trace(out, (d, d), Keep::B).unwrap().matrix().clone(),
        )
    }

    #[test]
    fn channel_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random_density_with(&mut rng, 3, 3).unwrap();
        assert!((Channel::identity(3).apply(&r).unwrap().matrix() - r.matrix()).norm() < 1e-15);
        let dep = Channel::depolarizing(3, 1.0).unwrap();
        let out = dep.apply(&r).unwrap();
        assert!((out.matrix() - DensityOperator::maximally_mixed(3).matrix()).norm() < 1e-14);
        let ch = random_channel(&mut rng, 3, 2, 4).unwrap();
        let out = ch.apply(&r).unwrap();
        assert_eq!(out.dim(), 2);
        assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(matches!(ch.apply(&DensityOperator::maximally_mixed(2)), Err(Error::DimMismatch { .. })));
        assert!(Channel::new(vec![CMat::identity(2, 2) * Complex64::new(0.5, 0.0)]).is_err());
    }

    #[test]
    fn broadcast_examples() {
        let a = DensityOperator::from_diag(&[0.25, 0.75]).unwrap();
        let b = DensityOperator::from_diag(&[0.5, 0.5]).unwrap();
        assert!(can_broadcast(&a, &b));
        let bc = build_commuting_broadcaster(&a, &b).unwrap();
        for s in [&a, &b] {
            let out = bc.apply(s).unwrap();
            let (ma, mb) = marginals(&out, 2);
            assert!((ma - s.matrix()).norm() < 1e-10);
            assert!((mb - s.matrix()).norm() < 1e-10);
        }
        let x = DensityOperator::from_bloch(&BlochVector::new([1.0, 0.0, 0.0]).unwrap());
        let z = DensityOperator::from_bloch(&BlochVector::new([0.0, 0.0, 1.0]).unwrap());
        assert!(!can_broadcast(&x, &z));
        assert!(matches!(build_commuting_broadcaster(&x, &z), Err(Error::NonCommuting(_))));

        // Orthogonal pure states are cloned outright.
        let up = DensityOperator::from_diag(&[1.0, 0.0]).unwrap();
        let down = DensityOperator::from_diag(&[0.0, 1.0]).unwrap();
        let bc = build_commuting_broadcaster(&up, &down).unwrap();
        for s in [&up, &down] {
            let out = bc.apply(s).unwrap();
            assert!((out.matrix() - kron(s.matrix(), s.matrix())).norm() < 1e-12);
        }
        // Identical states, in a basis that is not the standard one.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_density_with(&mut rng, 3, 3).unwrap();
        let bc = build_commuting_broadcaster(&r, &r).unwrap();
        let (ma, mb) = marginals(&bc.apply(&r).unwrap(), 3);
        assert!((ma - r.matrix()).norm() < 1e-10 && (mb - r.matrix()).norm() < 1e-10);
    }

    #[test]
    fn degenerate_commuting_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = crate::states::random_unitary(&mut rng, 3);
        let r0 = DensityOperator::from_diag(&[0.2, 0.4, 0.4]).unwrap().conjugate_by(&u).unwrap();
        let r1 = DensityOperator::from_diag(&[0.5, 0.1, 0.4]).unwrap().conjugate_by(&u).unwrap();
        let bc = build_commuting_broadcaster(&r0, &r1).unwrap();
        let f = fidelity_value(&r0, &r1).unwrap();
        let o0 = bc.apply(&r0).unwrap();
        let o1 = bc.apply(&r1).unwrap();
        assert!((fidelity_value(&o0, &o1).unwrap() - f).abs() < 1e-8);
        for (s, o) in [(&r0, &o0), (&r1, &o1)] {
            let (ma, mb) = marginals(o, 3);
            assert!((ma - s.matrix()).norm() < 1e-10 && (mb - s.matrix()).norm() < 1e-10);
        }
        // Marginal fidelities through the optimal measurement on one side.
        let m = fidelity_q(&r0, &r1).unwrap().measurement;
        let side = |keep: Keep| {
            m.elements()
                .iter()
                .map(|e| {
                    let lift = match keep {
                        Keep::A => kron(e, &CMat::identity(3, 3)),
                        Keep::B => kron(&CMat::identity(3, 3), e),
                    };
                    let p0 = crate::linops::trace_product(o0.matrix(), &lift).re.max(0.0);
                    let p1 = crate::linops::trace_product(o1.matrix(), &lift).re.max(0.0);
                    (p0 * p1).sqrt()
                })
                .sum::<f64>()
        };
        assert!((side(Keep::A) - f).abs() < 1e-8);
        assert!((side(Keep::B) - f).abs() < 1e-8);
    }

    #[test]
    fn cloning_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_density_with(&mut rng, 2, 2).unwrap();
        assert!(cloning_feasible(&r, &r));
        let up = DensityOperator::from_diag(&[1.0, 0.0]).unwrap();
        let down = DensityOperator::from_diag(&[0.0, 1.0]).unwrap();
        assert!(cloning_feasible(&up, &down));
        let a = DensityOperator::from_bloch(&BlochVector::in_plane(1.0, 0.0).unwrap());
        let b = DensityOperator::from_bloch(&BlochVector::in_plane(1.0, 2.0 * 0.9f64.acos()).unwrap());
        assert!((fidelity_value(&a, &b).unwrap() - 0.9).abs() < 1e-12);
        assert!(!cloning_feasible(&a, &b));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fidelity_never_decreases_under_channels(seed in any::<u64>(), d_out in 1usize..4, n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            prop_assume!(d_out * n >= 2);
            let r0 = random_density_with(&mut rng, 2, 2).unwrap();
            let r1 = random_pure(&mut rng, 2);
            let ch = random_channel(&mut rng, 2, d_out, n).unwrap();
            let before = fidelity_value(&r0, &r1).unwrap();
            let after = fidelity_value(&ch.apply(&r0).unwrap(), &ch.apply(&r1).unwrap()).unwrap();
            prop_assert!(after >= before - 1e-9);
        }

        #[test]
        fn ancilla_leaves_fidelity_unchanged(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r0 = random_density_with(&mut rng, 2, 2).unwrap();
            let r1 = random_density_with(&mut rng, 2, 1).unwrap();
            let sigma = random_density_with(&mut rng, 2, 2).unwrap();
            let f = fidelity_value(&r0, &r1).unwrap();
            let g = fidelity_value(&tensor(&r0, &sigma), &tensor(&r1, &sigma)).unwrap();
            prop_assert!((f - g).abs() < 1e-10);
        }

        #[test]
        fn random_pairs_do_not_commute(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r0 = random_density_with(&mut rng, 3, 3).unwrap();
            let r1 = random_density_with(&mut rng, 3, 3).unwrap();
            prop_assert!(!can_broadcast(&r0, &r1));
        }
    }
}
