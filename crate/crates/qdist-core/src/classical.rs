//! Distinguishability measures for finite probability distributions.
//! Informations are in nats.

use serde::Serialize;

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;
/// Largest number of outcome strings enumerated exactly.
pub const MAX_STRINGS: u64 = 10_000_000;

/// Nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Distribution {
    p: Vec<f64>,
}

impl Distribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::BadDistribution("empty".into()));
        }
        if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::BadDistribution(format!("entry {x}")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::BadDistribution(format!("sum {s}")));
        }
        Ok(Self { p })
    }

    /// Clamps rounding noise and renormalizes; for probabilities computed
    /// from quantum measurements.
    pub fn from_unnormalized(p: Vec<f64>) -> Result<Self> {
        let p: Vec<f64> = p.into_iter().map(|x| x.max(0.0)).collect();
        let s: f64 = p.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::BadDistribution(format!("sum {s}")));
        }
        Self::new(p.into_iter().map(|x| x / s).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self { p: vec![1.0 / n as f64; n] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

fn check_len(p0: &Distribution, p1: &Distribution) -> Result<()> {
    if p0.len() != p1.len() {
        return Err(Error::LengthMismatch(p0.len(), p1.len()));
    }
    Ok(())
}

fn check_prior(pi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::BadArgument(format!("prior {pi} outside [0,1]")));
    }
    Ok(())
}

/// Bayes error Σ min(π0 p0, π1 p1) and the decision rule (ties to 0).
pub fn error_probability(p0: &Distribution, p1: &Distribution, pi0: f64) -> Result<(f64, Vec<u8>)> {
    check_len(p0, p1)?;
    check_prior(pi0)?;
    let pi1 = 1.0 - pi0;
    let mut pe = 0.0;
    let mut decision = Vec::with_capacity(p0.len());
    for (a, b) in p0.p.iter().zip(&p1.p) {
        let (x, y) = (pi0 * a, pi1 * b);
        if x >= y {
            decision.push(0);
            pe += y;
        } else {
            decision.push(1);
            pe += x;
        }
    }
    Ok((pe, decision))
}

/// Bayes error for `n` independent samples, summed over every outcome string.
pub fn error_probability_iid(p0: &Distribution, p1: &Distribution, pi0: f64, n: usize) -> Result<f64> {
    check_len(p0, p1)?;
    check_prior(pi0)?;
    if n == 0 {
        return Err(Error::BadArgument("need at least one sample".into()));
    }
    let b = p0.len() as u64;
    let count = (b as f64).powi(n as i32);
    if count > MAX_STRINGS as f64 {
        return Err(Error::TooLarge(format!("{b}^{n} outcome strings")));
    }
    fn walk(p0: &[f64], p1: &[f64], depth: usize, a: f64, c: f64, pi0: f64, acc: &mut f64) {
        if depth == 0 {
            *acc += (pi0 * a).min((1.0 - pi0) * c);
            return;
        }
        for k in 0..p0.len() {
            walk(p0, p1, depth - 1, a * p0[k], c * p1[k], pi0, acc);
        }
    }
    let mut acc = 0.0;
    walk(&p0.p, &p1.p, n, 1.0, 1.0, pi0, &mut acc);
    Ok(acc)
}

/// Σ p0^α p1^{1−α} for α ∈ [0,1], with 0^0 = 1 at the endpoints.
pub fn renyi_sum(p0: &Distribution, p1: &Distribution, alpha: f64) -> f64 {
    p0.p.iter()
        .zip(&p1.p)
        .map(|(&a, &b)| {
            if alpha <= 0.0 {
                if a > 0.0 { b } else { 0.0 }
            } else if alpha >= 1.0 {
                if b > 0.0 { a } else { 0.0 }
            } else if a == 0.0 || b == 0.0 {
                0.0
            } else {
                (alpha * a.ln() + (1.0 - alpha) * b.ln()).exp()
            }
        })
        .sum()
}

pub fn renyi_overlap(p0: &Distribution, p1: &Distribution, alpha: f64) -> Result<f64> {
    check_len(p0, p1)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadAlpha(alpha));
    }
    Ok(renyi_sum(p0, p1, alpha))
}

/// Statistical overlap Σ√(p0 p1) and its angle arccos.
pub fn fidelity_classical(p0: &Distribution, p1: &Distribution) -> Result<(f64, f64)> {
    check_len(p0, p1)?;
    let f: f64 = p0.p.iter().zip(&p1.p).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((f, f.clamp(0.0, 1.0).acos()))
}

/// K(p0/p1) = Σ p0 ln(p0/p1), infinite on a support violation.
pub fn kl_divergence(p0: &Distribution, p1: &Distribution) -> Result<f64> {
    check_len(p0, p1)?;
    Ok(kl_raw(&p0.p, &p1.p))
}

pub(crate) fn kl_raw(p0: &[f64], p1: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p0.iter().zip(p1) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc += a * (a / b).ln();
        }
    }
    acc
}

pub(crate) fn entropy_raw(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

pub fn shannon_entropy(p: &Distribution) -> f64 {
    entropy_raw(&p.p)
}

fn mixture(p0: &[f64], p1: &[f64], t: f64) -> Vec<f64> {
    p0.iter().zip(p1).map(|(a, b)| (1.0 - t) * a + t * b).collect()
}

/// J = H(p) − (1−t)H(p0) − tH(p1) with p = (1−t)p0 + t p1.
pub fn mutual_information(p0: &Distribution, p1: &Distribution, t: f64) -> Result<f64> {
    check_len(p0, p1)?;
    check_prior(t)?;
    Ok(mutual_raw(&p0.p, &p1.p, t))
}

pub(crate) fn mutual_raw(p0: &[f64], p1: &[f64], t: f64) -> f64 {
    let p = mixture(p0, p1, t);
    entropy_raw(&p) - (1.0 - t) * entropy_raw(p0) - t * entropy_raw(p1)
}

/// The same quantity written as (1−t)K(p0/p) + tK(p1/p).
pub fn mutual_information_kl_form(p0: &Distribution, p1: &Distribution, t: f64) -> Result<f64> {
    check_len(p0, p1)?;
    check_prior(t)?;
    let p = mixture(&p0.p, &p1.p, t);
    let k0 = if t < 1.0 { (1.0 - t) * kl_raw(&p0.p, &p) } else { 0.0 };
    let k1 = if t > 0.0 { t * kl_raw(&p1.p, &p) } else { 0.0 };
    Ok(k0 + k1)
}

/// Optimal Chernoff bound and the tilted distribution at the optimum.
#[derive(Clone, Debug, Serialize)]
pub struct ChernoffResult {
    pub lambda: f64,
    pub alpha_star: f64,
    /// −ln λ.
    pub exponent: f64,
    /// K(p_α*/p0).
    pub k0: f64,
    /// K(p_α*/p1).
    pub k1: f64,
    /// False when the minimum sits at α = 0 or 1, or λ = 0.
    pub interior: bool,
}

/// λ = min_α Σ p0^α p1^{1−α}. Golden-section search brackets the minimum,
/// then Newton steps on the derivative polish it inside the bracket.
pub fn chernoff(p0: &Distribution, p1: &Distribution) -> Result<ChernoffResult> {
    check_len(p0, p1)?;
    let f = |a: f64| renyi_sum(p0, p1, a);
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-10 {
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
    let mut alpha = 0.5 * (lo + hi);
    // Candidates include the endpoints, where the minimum may sit.
    let mut best = (f(alpha), alpha);
    for a in [0.0, 1.0] {
        let v = f(a);
        if v < best.0 {
            best = (v, a);
        }
    }
    alpha = best.1;

    let both: Vec<(f64, f64)> = p0
        .p
        .iter()
        .zip(&p1.p)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let disjoint_mass = both.is_empty();
    let interior = !disjoint_mass && alpha > 0.0 && alpha < 1.0 && best.0 > 0.0;
    if interior {
        // Newton on F'(α) = Σ w ln(p0/p1) where w = p0^α p1^{1−α}.
        // The golden bracket is only as good as the flatness of F allows,
        // so Newton may leave it; steps stay short and inside (0,1).
        for _ in 0..50 {
            let (mut d1, mut d2) = (0.0, 0.0);
            for &(la, lb) in &both {
                let w = (alpha * la + (1.0 - alpha) * lb).exp();
                let r = la - lb;
                d1 += w * r;
                d2 += w * r * r;
            }
            if d2 <= 0.0 {
                break;
            }
            let step = d1 / d2;
            let next = alpha - step;
            if !(next > 0.0 && next < 1.0) || step.abs() > 1e-3 {
                break;
            }
            let done = (next - alpha).abs() < 1e-16;
            alpha = next;
            if done {
                break;
            }
        }
    }
    let lambda = f(alpha);
    let (k0, k1) = if lambda > 0.0 {
        let tilt: Vec<f64> = p0
            .p
            .iter()
            .zip(&p1.p)
            .map(|(&a, &b)| {
                if a == 0.0 || b == 0.0 {
                    if alpha <= 0.0 && a > 0.0 {
                        b / lambda
                    } else if alpha >= 1.0 && b > 0.0 {
                        a / lambda
                    } else {
                        0.0
                    }
                } else {
                    (alpha * a.ln() + (1.0 - alpha) * b.ln()).exp() / lambda
                }
            })
            .collect();
        (kl_raw(&tilt, &p0.p), kl_raw(&tilt, &p1.p))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(ChernoffResult { lambda, alpha_star: alpha, exponent: -lambda.ln(), k0, k1, interior })
}

/// Closed-form optimal order for p0 = {q, 1−q}, p1 = {r, 1−r}, q ≠ r,
/// all entries strictly inside (0,1).
pub fn chernoff_alpha_two_outcome(q: f64, r: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0 && r > 0.0 && r < 1.0) || q == r {
        return Err(Error::BadArgument("need distinct q, r in (0,1)".into()));
    }
    let num = -((1.0 - r) / r) * ((1.0 - q).ln() - (1.0 - r).ln()) / (q.ln() - r.ln());
    Ok(num.ln() / (q * (1.0 - r) / (r * (1.0 - q))).ln())
}

/// Probability of a type class and its two exponential bounds.
#[derive(Clone, Debug, Serialize)]
pub struct TypeClassProbability {
    pub exact: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Probability that `n` samples from `p_true` have empirical frequencies `f`.
pub fn type_class_probability(p_true: &Distribution, f: &[f64], n: usize) -> Result<TypeClassProbability> {
    if f.len() != p_true.len() {
        return Err(Error::LengthMismatch(p_true.len(), f.len()));
    }
    let mut counts = Vec::with_capacity(f.len());
    for &x in f {
        let c = x * n as f64;
        let r = c.round();
        if (c - r).abs() > 1e-9 || r < 0.0 {
            return Err(Error::NonIntegralCounts);
        }
        counts.push(r as usize);
    }
    if counts.iter().sum::<usize>() != n {
        return Err(Error::NonIntegralCounts);
    }
    let ln_fact = |k: usize| (2..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let mut ln_exact = ln_fact(n);
    let mut impossible = false;
    for (&k, &p) in counts.iter().zip(p_true.probs()) {
        ln_exact -= ln_fact(k);
        if k > 0 {
            if p == 0.0 {
                impossible = true;
            } else {
                ln_exact += k as f64 * p.ln();
            }
        }
    }
    let freq: Vec<f64> = counts.iter().map(|&k| k as f64 / n as f64).collect();
    let k = kl_raw(&freq, p_true.probs());
    let upper = (-(n as f64) * k).exp();
    let lower = upper * (n as f64 + 1.0).powi(-(f.len() as i32));
    let exact = if impossible { 0.0 } else { ln_exact.exp() };
    Ok(TypeClassProbability { exact, lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bayes_error_small_examples() {
        let (p0, p1) = (d(&[0.96, 0.04]), d(&[0.04, 0.96]));
        let (q0, q1) = (d(&[0.9, 0.1]), d(&[0.0, 1.0]));
        assert!((error_probability(&p0, &p1, 0.5).unwrap().0 - 0.04).abs() < 1e-12);
        assert!((error_probability(&q0, &q1, 0.5).unwrap().0 - 0.05).abs() < 1e-12);
        assert!((error_probability_iid(&p0, &p1, 0.5, 2).unwrap() - 0.04).abs() < 1e-12);
        assert!((error_probability_iid(&q0, &q1, 0.5, 2).unwrap() - 0.005).abs() < 1e-12);
        let (pe, dec) = error_probability(&p0, &p0, 0.3).unwrap();
        assert!((pe - 0.3).abs() < 1e-15);
        assert_eq!(dec, vec![1, 1]);
        let (_, dec) = error_probability(&p0, &p0, 0.5).unwrap();
        assert_eq!(dec, vec![0, 0]);
        assert!(matches!(error_probability(&p0, &d(&[1.0]), 0.5), Err(Error::LengthMismatch(2, 1))));
        let big = Distribution::uniform(10);
        assert!(matches!(error_probability_iid(&big, &big, 0.5, 8), Err(Error::TooLarge(_))));
    }

    #[test]
    fn chernoff_examples() {
        let p = d(&[0.3, 0.7]);
        let c = chernoff(&p, &p).unwrap();
        assert!((c.lambda - 1.0).abs() < 1e-12 && c.exponent.abs() < 1e-12);

        let (p0, p1) = (d(&[0.96, 0.04]), d(&[0.04, 0.96]));
        let c = chernoff(&p0, &p1).unwrap();
        assert!((c.alpha_star - 0.5).abs() < 1e-8);
        assert!((c.lambda - 2.0 * (0.96f64 * 0.04).sqrt()).abs() < 1e-14);

        let c = chernoff(&d(&[0.7, 0.3]), &d(&[0.2, 0.8])).unwrap();
        let closed = chernoff_alpha_two_outcome(0.7, 0.2).unwrap();
        assert!((c.alpha_star - closed).abs() < 1e-8);
        assert!((c.k0 - c.k1).abs() < 1e-8);
        assert!((c.exponent - c.k0).abs() < 1e-8);

        // Support mismatch puts the optimum on the boundary.
        let c = chernoff(&d(&[0.9, 0.1]), &d(&[0.0, 1.0])).unwrap();
        assert!(!c.interior);
        assert!((c.lambda - 0.1).abs() < 1e-9);
    }

    #[test]
    fn overlap_examples() {
        let p = d(&[0.2, 0.8]);
        let q = d(&[0.6, 0.4]);
        let (f, _) = fidelity_classical(&p, &q).unwrap();
        assert!((renyi_overlap(&p, &q, 0.5).unwrap() - f).abs() < 1e-15);
        assert!((renyi_overlap(&p, &p, 0.3).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(renyi_overlap(&d(&[1.0, 0.0]), &d(&[0.0, 1.0]), 0.4).unwrap(), 0.0);
        assert!(matches!(renyi_overlap(&p, &q, 1.0), Err(Error::BadAlpha(_))));
        assert_eq!(fidelity_classical(&p, &p).unwrap().1, 0.0);
        let (f, a) = fidelity_classical(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap();
        assert_eq!(f, 0.0);
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let (f, a) = fidelity_classical(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])).unwrap();
        assert!((f - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((a - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn kl_and_entropy_examples() {
        let p = d(&[0.25, 0.75]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert!((kl_divergence(&d(&[1.0, 0.0]), &d(&[0.5, 0.5])).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(kl_divergence(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])).unwrap(), f64::INFINITY);
        assert_eq!(shannon_entropy(&d(&[0.0, 1.0, 0.0])), 0.0);
        assert!((shannon_entropy(&Distribution::uniform(5)) - 5f64.ln()).abs() < 1e-15);
        let want = -0.25 * 0.25f64.ln() - 0.75 * 0.75f64.ln();
        assert!((shannon_entropy(&p) - want).abs() < 1e-15);
    }

    #[test]
    fn mutual_information_examples() {
        let p = d(&[0.3, 0.7]);
        assert!(mutual_information(&p, &p, 0.4).unwrap().abs() < 1e-15);
        let j = mutual_information(&d(&[1.0, 0.0]), &d(&[0.0, 1.0]), 0.5).unwrap();
        assert!((j - 2f64.ln()).abs() < 1e-15);
        let (p0, p1) = (d(&[0.96, 0.04]), d(&[0.04, 0.96]));
        let j = mutual_information(&p0, &p1, 0.5).unwrap();
        let direct = shannon_entropy(&d(&[0.5, 0.5])) - 0.5 * shannon_entropy(&p0) - 0.5 * shannon_entropy(&p1);
        assert!((j - direct).abs() < 1e-15);
        assert!((mutual_information_kl_form(&p0, &p1, 0.5).unwrap() - j).abs() < 1e-12);
    }

    #[test]
    fn type_class_examples() {
        let p = d(&[0.5, 0.5]);
        let r = type_class_probability(&p, &[0.3, 0.7], 10).unwrap();
        assert!((r.exact - 120.0 / 1024.0).abs() < 1e-14);
        assert!(r.lower <= r.exact && r.exact <= r.upper);
        let r = type_class_probability(&p, &[0.5, 0.5], 4).unwrap();
        assert!(r.exact >= 5f64.powi(-2));
        let q = d(&[0.2, 0.3, 0.5]);
        let r = type_class_probability(&q, &[0.0, 1.0, 0.0], 1).unwrap();
        assert!((r.exact - 0.3).abs() < 1e-15);
        assert!(matches!(type_class_probability(&p, &[0.25, 0.75], 3), Err(Error::NonIntegralCounts)));
    }

    fn two_point() -> impl Strategy<Value = Distribution> {
        (0.001f64..0.999).prop_map(|q| d(&[q, 1.0 - q]))
    }

    fn three_point() -> impl Strategy<Value = Distribution> {
        (0.001f64..1.0, 0.001f64..1.0, 0.001f64..1.0).prop_map(|(a, b, c)| {
            let s = a + b + c;
            Distribution::new(vec![a / s, b / s, 1.0 - a / s - b / s]).unwrap()
        })
    }

    proptest! {
        #[test]
        fn chernoff_is_a_lower_envelope(p0 in three_point(), p1 in three_point(), alpha in 0.001f64..0.999) {
            let c = chernoff(&p0, &p1).unwrap();
            prop_assert!(c.lambda <= renyi_overlap(&p0, &p1, alpha).unwrap() + 1e-14);
            prop_assert!((c.k0 - c.k1).abs() <= 1e-8);
            prop_assert!((c.exponent - c.k0).abs() <= 1e-8);
        }

        #[test]
        fn chernoff_dominates_iid_error(p0 in two_point(), p1 in two_point()) {
            let c = chernoff(&p0, &p1).unwrap();
            for n in 1..=6 {
                let pe = error_probability_iid(&p0, &p1, 0.5, n).unwrap();
                prop_assert!(pe <= c.lambda.powi(n as i32) + 1e-15);
            }
        }

        #[test]
        fn mutual_information_forms_and_concavity(p0 in three_point(), p1 in three_point()) {
            let h = 0.01;
            let mut prev: Option<(f64, f64)> = None;
            for i in 0..=100 {
                let t = i as f64 * h;
                let j = mutual_information(&p0, &p1, t).unwrap();
                let jk = mutual_information_kl_form(&p0, &p1, t).unwrap();
                prop_assert!((j - jk).abs() <= 1e-12);
                let hp = entropy_raw(&[t, 1.0 - t]);
                prop_assert!(j >= -1e-15 && j <= hp + 1e-12);
                if let Some((a, b)) = prev {
                    if i >= 2 {
                        prop_assert!(j - 2.0 * b + a <= 1e-9);
                    }
                    prev = Some((b, j));
                } else {
                    prev = Some((j, j));
                }
            }
        }

        #[test]
        fn kl_exceeds_overlap_bound(p0 in three_point(), p1 in three_point()) {
            let k = kl_divergence(&p0, &p1).unwrap();
            let (f, _) = fidelity_classical(&p0, &p1).unwrap();
            prop_assert!(k >= -2.0 * f.ln() - 1e-12);
            prop_assert!(k >= 0.0);
        }
    }
}
