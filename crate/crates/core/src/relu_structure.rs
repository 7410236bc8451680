//! Admissibility, reducibility with constructive reduction, and equivalence
//! certificates for ReLU networks.
//!
//! Reducibility follows the grouped form `(K1, K2, c)`. Writing each pair as
//! `s1·σ(u) + s2·σ(-u) = (s1+s2)·σ(u) - s2·u`, a network is a sum of ridge
//! terms over its distinct hyperplanes plus an affine part. The reduction
//! clauses decide whether that affine part can be absorbed with fewer
//! neurons. When a pair cancels (`s1 + s2 = 0`) its hyperplane disappears
//! from the function altogether, and the count is decided by
//! [`minimal_plan`] instead.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{
    group, relu_admissibility, Activation, AdmissibilityReport, GroupedReLU, Hyperplane, Neuron, ShallowNet,
};
use crate::numerics::{dot, norm, ToleranceConfig};

/// Clause of the reducibility decision that fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionCase {
    K1Eq1,
    K1Eq2,
    K1Ge3,
    Cancellation,
}

/// Reference to an entry of the grouped form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermRef {
    K1(usize),
    K2(usize),
}

/// Evidence that a grouped network can be rewritten with fewer neurons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionWitness {
    pub case: ReductionCase,
    /// `ε_k` per `K1` entry (empty for the cancellation case).
    pub epsilon: Vec<i8>,
    /// `i_k = 1` iff `ε_k = +1`.
    pub i_index: Vec<u8>,
    /// Indices into `K2` whose neuron is flipped.
    pub k2_prime: Vec<usize>,
    pub k0: Option<TermRef>,
    pub c0: Option<f64>,
    /// Cancellation case: `K1` entries with `s1 + s2 = 0`.
    pub cancelled: Vec<usize>,
    /// Cancellation case: surviving terms re-expressed in the opposite orientation.
    pub flips: Vec<TermRef>,
    /// Cancellation case: direction `w` of a fresh pair `σ(<w,x>) - σ(-<w,x>)`.
    pub fresh: Option<Vec<f64>>,
    /// Neuron count after the rewrite.
    pub reduced_count: usize,
    digest: u64,
}

/// Admissibility report for a ReLU network.
pub fn check_admissible(net: &ShallowNet, tol: &ToleranceConfig) -> AdmissibilityReport {
    relu_admissibility(net, tol)
}

fn digest(g: &GroupedReLU) -> u64 {
    let mut h = DefaultHasher::new();
    g.d.hash(&mut h);
    g.c.to_bits().hash(&mut h);
    for t in &g.k1 {
        for v in t.h.a.iter().chain([&t.h.b, &t.s1, &t.s2]) {
            v.to_bits().hash(&mut h);
        }
    }
    0xffu8.hash(&mut h);
    for t in &g.k2 {
        for v in t.a.iter().chain([&t.b, &t.s]) {
            v.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

fn is_zero_vec(v: &[f64], scale: f64, tol: &ToleranceConfig) -> bool {
    norm(v) <= tol.zero_tol * (1.0 + scale)
}

fn axpy(acc: &mut [f64], alpha: f64, x: &[f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += alpha * v;
    }
}

/// `(a, b)` of a term in its base orientation: the canonical one for `K1`,
/// the stored one for `K2`.
fn term_affine(g: &GroupedReLU, t: TermRef) -> (&[f64], f64) {
    match t {
        TermRef::K1(k) => (&g.k1[k].h.a, g.k1[k].h.b),
        TermRef::K2(k) => (&g.k2[k].a, g.k2[k].b),
    }
}

fn is_cancelled(s1: f64, s2: f64, tol: &ToleranceConfig) -> bool {
    (s1 + s2).abs() <= tol.zero_tol * (1.0 + s1.abs() + s2.abs())
}

/// Largest `K2` for which subsets are enumerated exhaustively.
const MAX_SUBSET_BITS: usize = 24;

/// How the affine part of a network is absorbed in a cheapest representation.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalPlan {
    /// Hyperplane terms with nonzero ridge coefficient, with that coefficient.
    pub surviving: Vec<(TermRef, f64)>,
    pub flips: Vec<TermRef>,
    /// Pair merged into an existing hyperplane: `-c0·σ(u) + c0·σ(-u)`.
    pub k0: Option<(TermRef, f64)>,
    pub fresh: Option<Vec<f64>>,
    /// Minimal neuron count for the function.
    pub count: usize,
}

/// Finds a cheapest representation of the function of `g`.
///
/// The function determines its hyperplanes with nonzero ridge coefficient
/// (`H`) and the affine remainder `w0`. Each hyperplane of `H` costs one
/// neuron. Flipping a subset `F ⊆ H` changes the remainder to
/// `w0 + Σ_F c_h a_h`; if that vanishes no extra neuron is needed, if it is
/// parallel to some `a_h` one extra neuron on `h` absorbs it, otherwise a
/// fresh pair does. Exhaustive in `|H|` up to 16 hyperplanes.
pub fn minimal_plan(g: &GroupedReLU, tol: &ToleranceConfig) -> MinimalPlan {
    let d = g.d;
    let mut surviving = Vec::new();
    let mut w0 = vec![0.0; d];
    let mut scale = 0.0;
    for (k, t) in g.k1.iter().enumerate() {
        axpy(&mut w0, -t.s2, &t.h.a);
        scale += t.s1.abs() + t.s2.abs();
        if !is_cancelled(t.s1, t.s2, tol) {
            surviving.push((TermRef::K1(k), t.s1 + t.s2));
        }
    }
    for (k, t) in g.k2.iter().enumerate() {
        surviving.push((TermRef::K2(k), t.s));
        scale += t.s.abs();
    }
    let n = surviving.len();
    let remainder = |mask: u64| {
        let mut w = w0.clone();
        for (i, (t, c)) in surviving.iter().enumerate() {
            if mask >> i & 1 == 1 {
                axpy(&mut w, *c, term_affine(g, *t).0);
            }
        }
        w
    };
    let flips_of =
        |mask: u64| -> Vec<TermRef> { (0..n).filter(|i| mask >> i & 1 == 1).map(|i| surviving[i].0).collect() };
    let exhaustive = n <= 16;
    let masks: Vec<u64> = if exhaustive { (0..1u64 << n).collect() } else { vec![0] };
    for &mask in &masks {
        if is_zero_vec(&remainder(mask), scale, tol) {
            return MinimalPlan {
                flips: flips_of(mask),
                k0: None,
                fresh: None,
                count: n,
                surviving,
            };
        }
    }
    for &mask in &masks {
        let w = remainder(mask);
        for (t, _) in &surviving {
            let a = term_affine(g, *t).0;
            let c0 = -dot(&w, a);
            let mut r = w.clone();
            axpy(&mut r, c0, a);
            if is_zero_vec(&r, scale, tol) {
                return MinimalPlan {
                    flips: flips_of(mask),
                    k0: Some((*t, c0)),
                    fresh: None,
                    count: n + 1,
                    surviving,
                };
            }
        }
    }
    MinimalPlan {
        flips: Vec::new(),
        k0: None,
        fresh: Some(w0),
        count: n + 2,
        surviving,
    }
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let n = n.min(MAX_SUBSET_BITS);
    (0..1u64 << n).map(move |mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
}

/// `Σ_{K1} ε_k s_{k,i_k} a_k + Σ_{K2'} s_k a_k` and the matching offset sum.
fn residual_sum(g: &GroupedReLU, eps: &[i8], k2p: &[usize]) -> (Vec<f64>, f64, f64) {
    let mut r = vec![0.0; g.d];
    let mut beta = 0.0;
    let mut scale = 0.0;
    for (t, &e) in g.k1.iter().zip(eps) {
        let s = if e > 0 { t.s1 } else { t.s2 };
        let e = e as f64;
        axpy(&mut r, e * s, &t.h.a);
        beta += e * s * t.h.b;
        scale += s.abs();
    }
    for &k in k2p {
        let t = &g.k2[k];
        axpy(&mut r, t.s, &t.a);
        beta += t.s * t.b;
        scale += t.s.abs();
    }
    (r, beta, scale)
}

fn clause_witness(
    g: &GroupedReLU,
    case: ReductionCase,
    eps: Vec<i8>,
    k2_prime: Vec<usize>,
    k0: Option<(TermRef, f64)>,
) -> ReductionWitness {
    let i_index = eps.iter().map(|&e| if e > 0 { 1 } else { 2 }).collect();
    let reduced_count = match case {
        ReductionCase::K1Eq1 => g.neuron_count() - 1,
        ReductionCase::K1Eq2 => g.neuron_count() - 1,
        _ => g.hyperplane_count() + 2,
    };
    ReductionWitness {
        case,
        epsilon: eps,
        i_index,
        k2_prime,
        k0: k0.map(|(t, _)| t),
        c0: k0.map(|(_, c)| c),
        cancelled: Vec::new(),
        flips: Vec::new(),
        fresh: None,
        reduced_count,
        digest: digest(g),
    }
}

/// Decides whether `g` can be realized with fewer neurons.
///
/// Search order: cancelled pairs, then `#K1 ≥ 3`, `#K1 = 1`, `#K1 = 2`.
/// The `#K1 ∈ {1, 2}` clauses enumerate all subsets of `K2`, so the cost is
/// exponential in `#K2`.
pub fn test_reducible(g: &GroupedReLU, tol: &ToleranceConfig) -> Option<ReductionWitness> {
    let m = g.neuron_count();
    let cancelled: Vec<usize> =
        g.k1.iter()
            .enumerate()
            .filter(|(_, t)| is_cancelled(t.s1, t.s2, tol))
            .map(|(k, _)| k)
            .collect();
    if !cancelled.is_empty() {
        let plan = minimal_plan(g, tol);
        if plan.count < m {
            return Some(ReductionWitness {
                case: ReductionCase::Cancellation,
                epsilon: Vec::new(),
                i_index: Vec::new(),
                k2_prime: Vec::new(),
                k0: plan.k0.map(|(t, _)| t),
                c0: plan.k0.map(|(_, c)| c),
                cancelled,
                flips: plan.flips,
                fresh: plan.fresh,
                reduced_count: plan.count,
                digest: digest(g),
            });
        }
    }

    match g.k1.len() {
        0 => None,
        1 => {
            for e in [1i8, -1] {
                for k2p in subsets(g.k2.len()) {
                    let (r, _, scale) = residual_sum(g, &[e], &k2p);
                    if is_zero_vec(&r, scale, tol) {
                        return Some(clause_witness(g, ReductionCase::K1Eq1, vec![e], k2p, None));
                    }
                }
            }
            None
        }
        2 => {
            let refs: Vec<TermRef> = (0..2)
                .map(TermRef::K1)
                .chain((0..g.k2.len()).map(TermRef::K2))
                .collect();
            for eps in [[1i8, 1], [1, -1], [-1, 1], [-1, -1]] {
                for k2p in subsets(g.k2.len()) {
                    let (r, _, scale) = residual_sum(g, &eps, &k2p);
                    for &t in &refs {
                        let a = term_affine(g, t).0;
                        let c0 = -dot(&r, a);
                        let mut res = r.clone();
                        axpy(&mut res, c0, a);
                        if is_zero_vec(&res, scale + c0.abs(), tol) {
                            return Some(clause_witness(
                                g,
                                ReductionCase::K1Eq2,
                                eps.to_vec(),
                                k2p,
                                Some((t, c0)),
                            ));
                        }
                    }
                }
            }
            None
        }
        n => Some(clause_witness(g, ReductionCase::K1Ge3, vec![1; n], Vec::new(), None)),
    }
}

/// Drops vanishing neurons, folds constant neurons into `c`, and merges
/// neurons with the same oriented hyperplane.
fn simplify(d: usize, raw: Vec<Neuron>, mut c: f64, tol: &ToleranceConfig) -> ShallowNet {
    let scale = 1.0 + raw.iter().map(|n| n.s.abs() * norm(&n.a)).fold(0.0_f64, f64::max);
    let mut merged: Vec<Neuron> = Vec::new();
    for n in raw {
        let r = norm(&n.a);
        if r <= tol.zero_tol {
            c += n.s * n.b.max(0.0);
            continue;
        }
        let unit = Neuron::new(n.a.iter().map(|v| v / r).collect(), n.b / r, n.s * r);
        let o = Hyperplane::from_affine(&unit.a, unit.b, tol).expect("unit direction");
        let slot = merged.iter_mut().find(|m| {
            o.hyperplane
                .orientation_of(&m.a, m.b, tol)
                .is_some_and(|sign| sign == o.sign)
        });
        match slot {
            Some(m) => m.s += unit.s,
            None => merged.push(unit),
        }
    }
    merged.retain(|n| n.s.abs() > tol.zero_tol * scale);
    ShallowNet {
        activation: Activation::Relu,
        d,
        neurons: merged,
        c,
    }
}

fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|v| -v).collect()
}

/// Applies the rewrite described by `w`.
///
/// Oriented terms are flipped with `σ(u) = u + σ(-u)`; the resulting linear
/// term goes into the constant (`K1Eq1`), into a `∓c0` pair on `k0`
/// (`K1Eq2`), into a fresh pair `σ(<w,x>) - σ(-<w,x>)` (`K1Ge3`), or per the
/// stored plan (cancellation).
pub fn reduce_once(g: &GroupedReLU, w: &ReductionWitness, tol: &ToleranceConfig) -> Result<GroupedReLU> {
    if w.digest != digest(g) {
        return Err(Error::Invariant(
            "reduction witness was computed for a different network".into(),
        ));
    }
    let mut neurons = Vec::new();
    let mut c = g.c;
    let mut lin = vec![0.0; g.d];
    let absorb = |neurons: &mut Vec<Neuron>, c: &mut f64, t: TermRef, c0: f64| {
        let (a, b) = term_affine(g, t);
        neurons.push(Neuron::new(a.to_vec(), b, -c0));
        neurons.push(Neuron::new(neg(a), -b, c0));
        *c += c0 * b;
    };

    if w.case == ReductionCase::Cancellation {
        for (k, t) in g.k1.iter().enumerate() {
            axpy(&mut lin, -t.s2, &t.h.a);
            c -= t.s2 * t.h.b;
            if !w.cancelled.contains(&k) {
                let r = TermRef::K1(k);
                push_term(g, r, t.s1 + t.s2, w.flips.contains(&r), &mut neurons, &mut lin, &mut c);
            }
        }
        for (k, t) in g.k2.iter().enumerate() {
            let r = TermRef::K2(k);
            push_term(g, r, t.s, w.flips.contains(&r), &mut neurons, &mut lin, &mut c);
        }
        match (&w.k0, w.c0, &w.fresh) {
            (Some(t), Some(c0), _) => absorb(&mut neurons, &mut c, *t, c0),
            (_, _, Some(dir)) => {
                neurons.push(Neuron::new(dir.clone(), 0.0, 1.0));
                neurons.push(Neuron::new(neg(dir), 0.0, -1.0));
            }
            _ => {}
        }
    } else {
        if w.epsilon.len() != g.k1.len() {
            return Err(Error::Invariant("witness sign count does not match K1".into()));
        }
        for (t, &e) in g.k1.iter().zip(&w.epsilon) {
            let e = e as f64;
            let s_i = if e > 0.0 { t.s1 } else { t.s2 };
            let a: Vec<f64> = t.h.a.iter().map(|v| -e * v).collect();
            neurons.push(Neuron::new(a, -e * t.h.b, t.s1 + t.s2));
            axpy(&mut lin, e * s_i, &t.h.a);
            c += e * s_i * t.h.b;
        }
        for (k, t) in g.k2.iter().enumerate() {
            if w.k2_prime.contains(&k) {
                neurons.push(Neuron::new(neg(&t.a), -t.b, t.s));
                axpy(&mut lin, t.s, &t.a);
                c += t.s * t.b;
            } else {
                neurons.push(Neuron::new(t.a.clone(), t.b, t.s));
            }
        }
        match w.case {
            ReductionCase::K1Eq1 => {}
            ReductionCase::K1Eq2 => {
                let (t, c0) =
                    w.k0.zip(w.c0)
                        .ok_or_else(|| Error::Invariant("K1Eq2 witness without k0/c0".into()))?;
                absorb(&mut neurons, &mut c, t, c0);
            }
            ReductionCase::K1Ge3 => {
                if norm(&lin) > 0.0 {
                    neurons.push(Neuron::new(lin.clone(), 0.0, 1.0));
                    neurons.push(Neuron::new(neg(&lin), 0.0, -1.0));
                }
            }
            ReductionCase::Cancellation => unreachable!(),
        }
    }

    let net = simplify(g.d, neurons, c, tol);
    let reduced = group(&net, tol)?;
    if reduced.neuron_count() >= g.neuron_count() {
        return Err(Error::Internal(format!(
            "rewrite did not reduce the neuron count ({} -> {})",
            g.neuron_count(),
            reduced.neuron_count()
        )));
    }
    Ok(reduced)
}

/// Emits the neuron for a surviving term, flipped if requested.
fn push_term(
    g: &GroupedReLU,
    t: TermRef,
    coef: f64,
    flip: bool,
    neurons: &mut Vec<Neuron>,
    lin: &mut [f64],
    c: &mut f64,
) {
    let (a, b) = term_affine(g, t);
    if flip {
        neurons.push(Neuron::new(neg(a), -b, coef));
        axpy(lin, coef, a);
        *c += coef * b;
    } else {
        neurons.push(Neuron::new(a.to_vec(), b, coef));
    }
}

/// Reduces until no witness remains. An irreducible input is returned as is.
pub fn reduce_fully(net: &ShallowNet, tol: &ToleranceConfig) -> Result<ShallowNet> {
    let mut g = group(net, tol)?;
    let limit = net.m();
    let mut steps = 0;
    while let Some(w) = test_reducible(&g, tol) {
        steps += 1;
        if steps > limit {
            return Err(Error::Internal(format!(
                "reduction did not terminate within {limit} steps"
            )));
        }
        g = reduce_once(&g, &w, tol)?;
    }
    if steps == 0 {
        return Ok(net.clone());
    }
    Ok(g.to_net())
}

/// Witness that two ReLU networks compute the same function.
///
/// Indices are 0-based: neuron `k` of the first network corresponds to
/// neuron `permutation[k]` of the second, with
/// `ε_k λ_k (a_k, b_k) = (a'_π(k), b'_π(k))` and `s_k / λ_k = s'_π(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCertificate {
    pub permutation: Vec<usize>,
    pub epsilon: Vec<i8>,
    pub lambda: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    /// `c' - c = Σ_{k∈K} s_k b_k`.
    pub constant_shift: f64,
}

fn validate_for_equivalence(net: &ShallowNet, which: &str, tol: &ToleranceConfig) -> Result<Vec<crate::net::Oriented>> {
    if net.activation != Activation::Relu {
        return Err(Error::Input(format!("{which}: equivalence test needs relu networks")));
    }
    net.validate_shape()?;
    relu_admissibility(net, tol)
        .into_result()
        .map_err(|e| Error::Inadmissible(format!("{which}: {e}")))?;
    let oriented: Vec<_> = net
        .neurons
        .iter()
        .map(|n| Hyperplane::from_affine(&n.a, n.b, tol).expect("admissible direction"))
        .collect();
    for i in 0..oriented.len() {
        for j in (i + 1)..oriented.len() {
            if oriented[i].hyperplane.approx_eq(&oriented[j].hyperplane, tol) {
                return Err(Error::Hypothesis(format!(
                    "{which}: neurons {i} and {j} share a hyperplane"
                )));
            }
        }
    }
    Ok(oriented)
}

/// Tests equivalence of two ReLU networks whose hyperplanes are mutually
/// distinct. A returned certificate implies pointwise equality.
pub fn test_equivalent(
    n1: &ShallowNet,
    n2: &ShallowNet,
    tol: &ToleranceConfig,
) -> Result<Option<EquivalenceCertificate>> {
    let h1 = validate_for_equivalence(n1, "first network", tol)?;
    let h2 = validate_for_equivalence(n2, "second network", tol)?;
    if n1.d != n2.d {
        return Err(Error::Input(format!("dimension mismatch: {} vs {}", n1.d, n2.d)));
    }
    if n1.m() != n2.m() {
        return Ok(None);
    }
    let m = n1.m();
    let mut used = vec![false; m];
    let mut cert = EquivalenceCertificate {
        permutation: Vec::with_capacity(m),
        epsilon: Vec::with_capacity(m),
        lambda: Vec::with_capacity(m),
        k: Vec::new(),
        constant_shift: 0.0,
    };
    for (k, o) in h1.iter().enumerate() {
        let Some(j) = (0..m).find(|&j| !used[j] && o.hyperplane.approx_eq(&h2[j].hyperplane, tol)) else {
            return Ok(None);
        };
        used[j] = true;
        let rel = o
            .hyperplane
            .orientation_of(&h2[j].hyperplane.a, h2[j].hyperplane.b, tol)
            .unwrap_or(1.0);
        let eps = o.sign * h2[j].sign * rel;
        let lambda = h2[j].scale / o.scale;
        let s_mapped = n1.neurons[k].s / lambda;
        let s_other = n2.neurons[j].s;
        if (s_mapped - s_other).abs() > tol.match_tol * (1.0 + s_mapped.abs().max(s_other.abs())) {
            return Ok(None);
        }
        cert.permutation.push(j);
        cert.epsilon.push(if eps > 0.0 { 1 } else { -1 });
        cert.lambda.push(lambda);
        if eps < 0.0 {
            cert.k.push(k);
        }
    }
    let mut sum_a = vec![0.0; n1.d];
    let mut sum_b = 0.0;
    let mut scale = 0.0;
    for &k in &cert.k {
        let n = &n1.neurons[k];
        axpy(&mut sum_a, n.s, &n.a);
        sum_b += n.s * n.b;
        scale += n.s.abs() * (norm(&n.a) + n.b.abs());
    }
    if norm(&sum_a) > tol.match_tol * (1.0 + scale) {
        return Ok(None);
    }
    let shift = n2.c - n1.c;
    if (shift - sum_b).abs() > tol.match_tol * (1.0 + scale + n1.c.abs().max(n2.c.abs())) {
        return Ok(None);
    }
    cert.constant_shift = sum_b;
    Ok(Some(cert))
}

impl EquivalenceCertificate {
    /// Re-checks every relation of the certificate against the two networks.
    pub fn verify(&self, n1: &ShallowNet, n2: &ShallowNet, tol: &ToleranceConfig) -> Result<()> {
        let m = n1.m();
        if n2.m() != m || self.permutation.len() != m || self.epsilon.len() != m || self.lambda.len() != m {
            return Err(Error::Invariant("certificate size does not match the networks".into()));
        }
        let mut seen = vec![false; m];
        for k in 0..m {
            let j = self.permutation[k];
            if j >= m || seen[j] {
                return Err(Error::Invariant("permutation is not a bijection".into()));
            }
            seen[j] = true;
            let (p, q) = (&n1.neurons[k], &n2.neurons[j]);
            let el = self.epsilon[k] as f64 * self.lambda[k];
            let scale = 1.0 + norm(&q.a) + q.b.abs();
            let da =
                p.a.iter()
                    .zip(&q.a)
                    .map(|(x, y)| (el * x - y).abs())
                    .fold(0.0, f64::max);
            if da > tol.match_tol * scale || (el * p.b - q.b).abs() > tol.match_tol * scale {
                return Err(Error::Invariant(format!("neuron {k}: parameters do not map")));
            }
            if (p.s / self.lambda[k] - q.s).abs() > tol.match_tol * (1.0 + q.s.abs()) {
                return Err(Error::Invariant(format!("neuron {k}: output weight does not map")));
            }
            if (self.epsilon[k] < 0) != self.k.contains(&k) {
                return Err(Error::Invariant(format!("neuron {k}: K disagrees with epsilon")));
            }
        }
        let mut sum_a = vec![0.0; n1.d];
        let mut sum_b = 0.0;
        let mut scale = 0.0;
        for &k in &self.k {
            let n = &n1.neurons[k];
            axpy(&mut sum_a, n.s, &n.a);
            sum_b += n.s * n.b;
            scale += n.s.abs() * (norm(&n.a) + n.b.abs());
        }
        if norm(&sum_a) > tol.match_tol * (1.0 + scale) {
            return Err(Error::Invariant("flipped directions do not cancel".into()));
        }
        if (n2.c - n1.c - sum_b).abs() > tol.match_tol * (1.0 + scale + n1.c.abs().max(n2.c.abs())) {
            return Err(Error::Invariant("constant shift does not match".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Neuron;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn relu(d: usize, neurons: Vec<(Vec<f64>, f64, f64)>, c: f64) -> ShallowNet {
        ShallowNet::new(
            Activation::Relu,
            d,
            neurons.into_iter().map(|(a, b, s)| Neuron::new(a, b, s)).collect(),
            c,
        )
        .unwrap()
    }

    fn two_ridges() -> ShallowNet {
        relu(2, vec![(vec![1.0, 1.0], 0.0, 1.0), (vec![1.0, -1.0], 0.0, 1.0)], 0.0)
    }

    fn two_cancelled_pairs() -> ShallowNet {
        relu(
            2,
            vec![
                (vec![1.0, 0.0], 0.0, 1.0),
                (vec![-1.0, 0.0], 0.0, -1.0),
                (vec![0.0, 1.0], 0.0, 1.0),
                (vec![0.0, -1.0], 0.0, -1.0),
            ],
            0.0,
        )
    }

    fn grid() -> Vec<[f64; 2]> {
        let mut pts = Vec::new();
        for i in 0..21 {
            for j in 0..21 {
                pts.push([-3.0 + 0.3 * i as f64, -3.0 + 0.3 * j as f64 + 0.011]);
            }
        }
        pts
    }

    fn same_function(n1: &ShallowNet, n2: &ShallowNet) {
        for x in grid() {
            let (p, q) = (n1.evaluate(&x).unwrap(), n2.evaluate(&x).unwrap());
            assert!((p - q).abs() <= 1e-9 * (1.0 + p.abs()), "{p} vs {q} at {x:?}");
        }
    }

    #[test]
    fn admissibility_examples() {
        assert!(check_admissible(&two_ridges(), &tol()).admissible);
        let zero = relu(1, vec![(vec![1.0], 0.0, 0.0)], 0.0);
        let r = check_admissible(&zero, &tol());
        assert!(!r.admissible);
        assert!(r.violations[0].to_string().contains("clause (i)"));
        let dup = relu(2, vec![(vec![1.0, 2.0], 0.5, 1.0), (vec![2.0, 4.0], 1.0, 3.0)], 0.0);
        let r = check_admissible(&dup, &tol());
        assert!(r.violations[0].to_string().contains("clause (ii)"));
    }

    #[test]
    fn two_ridges_is_irreducible() {
        let g = group(&two_ridges(), &tol()).unwrap();
        assert!(test_reducible(&g, &tol()).is_none());
        assert_eq!(reduce_fully(&two_ridges(), &tol()).unwrap(), two_ridges());
    }

    #[test]
    fn cancellation_example_reduces_to_two_neurons() {
        let g = group(&two_cancelled_pairs(), &tol()).unwrap();
        let w = test_reducible(&g, &tol()).unwrap();
        assert_eq!(w.case, ReductionCase::Cancellation);
        assert_eq!(w.cancelled, vec![0, 1]);
        assert_eq!(w.reduced_count, 2);
        let r = reduce_fully(&two_cancelled_pairs(), &tol()).unwrap();
        assert_eq!(r.m(), 2);
        same_function(&two_cancelled_pairs(), &r);
        // The two neurons are ±(a1 + a2) up to scale.
        let a = &r.neurons[0].a;
        assert!((a[0] - a[1]).abs() < 1e-12);
    }

    #[test]
    fn lone_cancelled_pair_is_a_fixpoint() {
        let net = relu(2, vec![(vec![1.0, 2.0], 0.0, 1.0), (vec![-1.0, -2.0], 0.0, -1.0)], 0.0);
        let g = group(&net, &tol()).unwrap();
        assert!(test_reducible(&g, &tol()).is_none());
        assert_eq!(reduce_fully(&net, &tol()).unwrap(), net);
    }

    #[test]
    fn cancelled_pair_next_to_a_single_is_irreducible() {
        // σ(x1) - σ(-x1) + σ(x2) = x1 + σ(x2) needs three neurons.
        let net = relu(
            2,
            vec![
                (vec![1.0, 0.0], 0.0, 1.0),
                (vec![-1.0, 0.0], 0.0, -1.0),
                (vec![0.0, 1.0], 0.0, 1.0),
            ],
            0.0,
        );
        let g = group(&net, &tol()).unwrap();
        assert!(test_reducible(&g, &tol()).is_none());
    }

    #[test]
    fn cancelled_pair_absorbed_by_a_parallel_single() {
        // σ(x1) - σ(-x1) + σ(x1 - 1) = x1 + σ(x1 - 1): two neurons suffice.
        let net = relu(
            1,
            vec![(vec![1.0], 0.0, 1.0), (vec![-1.0], 0.0, -1.0), (vec![1.0], -1.0, 1.0)],
            0.0,
        );
        let g = group(&net, &tol()).unwrap();
        let w = test_reducible(&g, &tol()).unwrap();
        assert_eq!(w.case, ReductionCase::Cancellation);
        let r = reduce_fully(&net, &tol()).unwrap();
        assert_eq!(r.m(), 2);
        for i in 0..40 {
            let x = [-4.0 + 0.2 * i as f64];
            assert!((net.evaluate(&x).unwrap() - r.evaluate(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn three_pairs_reduce() {
        let s = 1.0 / 3.0_f64.sqrt();
        let dirs = [vec![1.0, 0.0], vec![0.0, 1.0], vec![s, 2.0 * s]];
        let mut neurons = Vec::new();
        for (i, a) in dirs.iter().enumerate() {
            neurons.push((a.clone(), 0.1 * i as f64, 1.0));
            neurons.push((a.iter().map(|v| -v).collect(), -0.1 * i as f64, 1.0));
        }
        let net = relu(2, neurons, 0.0);
        let g = group(&net, &tol()).unwrap();
        let w = test_reducible(&g, &tol()).unwrap();
        assert_eq!(w.case, ReductionCase::K1Ge3);
        let g2 = reduce_once(&g, &w, &tol()).unwrap();
        assert!(g2.neuron_count() <= 5);
        let r = reduce_fully(&net, &tol()).unwrap();
        assert!(r.m() <= 5);
        same_function(&net, &r);
    }

    #[test]
    fn clause_one_instance() {
        // Pair on x1 with s1 = 1, and a single whose direction cancels ε s1 a.
        let net = relu(
            2,
            vec![
                (vec![1.0, 0.0], 0.5, 1.0),
                (vec![-1.0, 0.0], -0.5, 2.0),
                (vec![0.0, 1.0], 0.0, 1.0),
                (vec![-1.0, 0.0], 1.0, 1.0),
            ],
            0.0,
        );
        let g = group(&net, &tol()).unwrap();
        assert_eq!(g.k1.len(), 1);
        let w = test_reducible(&g, &tol()).unwrap();
        assert_eq!(w.case, ReductionCase::K1Eq1);
        let g2 = reduce_once(&g, &w, &tol()).unwrap();
        assert_eq!(g2.neuron_count(), 3);
        same_function(&net, &g2.to_net());
    }

    #[test]
    fn stale_witness_is_rejected() {
        let g = group(&two_cancelled_pairs(), &tol()).unwrap();
        let w = test_reducible(&g, &tol()).unwrap();
        let mut other = g.clone();
        other.c = 1.0;
        assert!(matches!(reduce_once(&other, &w, &tol()), Err(Error::Invariant(_))));
    }

    #[test]
    fn equivalence_with_rescaled_permutation() {
        let net = relu(
            2,
            vec![
                (vec![1.0, 0.5], 0.2, 1.5),
                (vec![-0.3, 1.0], -1.0, -2.0),
                (vec![0.7, 0.7], 0.4, 0.5),
            ],
            0.3,
        );
        let lam = [2.0, 0.5, 3.0];
        let order = [2usize, 0, 1];
        let neurons = order
            .iter()
            .map(|&k| {
                let n = &net.neurons[k];
                Neuron::new(n.a.iter().map(|v| lam[k] * v).collect(), lam[k] * n.b, n.s / lam[k])
            })
            .collect();
        let other = ShallowNet::new(Activation::Relu, 2, neurons, 0.3).unwrap();
        let cert = test_equivalent(&net, &other, &tol()).unwrap().unwrap();
        assert!(cert.k.is_empty());
        assert_eq!(cert.permutation, vec![1, 2, 0]);
        assert!((cert.lambda[0] - 2.0).abs() < 1e-12);
        cert.verify(&net, &other, &tol()).unwrap();
    }

    #[test]
    fn equivalence_with_all_flipped() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s2 = std::f64::consts::SQRT_2;
        let net = relu(
            2,
            vec![
                (vec![1.0, 0.0], 0.0, 1.0),
                (vec![0.0, 1.0], 0.0, 1.0),
                (vec![r, r], 0.0, -s2),
            ],
            0.0,
        );
        let flipped = ShallowNet {
            neurons: net
                .neurons
                .iter()
                .map(|n| Neuron::new(n.a.iter().map(|v| -v).collect(), -n.b, n.s))
                .collect(),
            ..net.clone()
        };
        let cert = test_equivalent(&net, &flipped, &tol()).unwrap().unwrap();
        assert_eq!(cert.k, vec![0, 1, 2]);
        assert_eq!(cert.epsilon, vec![-1, -1, -1]);
        cert.verify(&net, &flipped, &tol()).unwrap();
        same_function(&net, &flipped);
    }

    #[test]
    fn constant_offset_breaks_equivalence() {
        let mut shifted = two_ridges();
        shifted.c += 1.0;
        assert!(test_equivalent(&two_ridges(), &shifted, &tol()).unwrap().is_none());
    }

    #[test]
    fn shared_hyperplane_is_a_hypothesis_error() {
        assert!(matches!(
            test_equivalent(&two_cancelled_pairs(), &two_cancelled_pairs(), &tol()),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn certificate_json_uses_capital_k() {
        let cert = EquivalenceCertificate {
            permutation: vec![0],
            epsilon: vec![-1],
            lambda: vec![1.0],
            k: vec![0],
            constant_shift: 0.0,
        };
        let text = serde_json::to_string(&cert).unwrap();
        assert!(text.contains("\"K\":[0]"));
    }
}
