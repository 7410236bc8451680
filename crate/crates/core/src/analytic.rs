//! Sigmoid and tanh networks: admissibility, canonical forms, equivalence,
//! full spark frames, the universal sample plan and exponential-sum
//! expansions.
//!
//! For these activations an admissible network is irreducible, and two
//! admissible networks are equivalent exactly when their canonical forms
//! (every direction's first significant entry positive, via
//! `σ(u) = c0 - σ(-u)`) agree as multisets.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{
    analytic_admissibility, from_json_str, to_json_string, Activation, AdmissibilityReport, Neuron, ShallowNet,
};
use crate::numerics::{dot, norm, rank, ToleranceConfig};
use crate::relu_sampling::binomial;

/// Default cap on the number of points of an analytic plan.
pub const DEFAULT_PLAN_CAP: u64 = 1_000_000;
/// Frames up to this size are checked on every `d`-subset.
pub const EXHAUSTIVE_FRAME_SIZE: usize = 12;
/// Subsets checked when a frame is too large for exhaustion.
const SAMPLED_SUBSETS: usize = 10_000;
/// Minimum `|det|` of a row-normalized `d`-subset.
const MIN_SUBSET_DET: f64 = 1e-9;
/// Largest `n` accepted by [`exp_sum_expansion`].
pub const MAX_EXPSUM_TERMS: usize = 20;

fn require_analytic(net: &ShallowNet) -> Result<()> {
    if !net.activation.is_analytic() {
        return Err(Error::Input(
            "expected a sigmoid or tanh network; use the relu routines instead".into(),
        ));
    }
    net.validate_shape()
}

/// Admissibility for sigmoid/tanh: `s_k a_k ≠ 0` and no `(a_j, b_j) = ±(a_k, b_k)`.
pub fn check_admissible_analytic(net: &ShallowNet, tol: &ToleranceConfig) -> Result<AdmissibilityReport> {
    require_analytic(net)?;
    Ok(analytic_admissibility(net, tol))
}

/// Sign-normalized, sorted form of an admissible analytic network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCanonicalForm {
    pub activation: Activation,
    pub d: usize,
    pub neurons: Vec<Neuron>,
    pub c: f64,
}

impl AnalyticCanonicalForm {
    pub fn to_net(&self) -> ShallowNet {
        ShallowNet {
            activation: self.activation,
            d: self.d,
            neurons: self.neurons.clone(),
            c: self.c,
        }
    }
}

fn leading_sign(a: &[f64], tol: &ToleranceConfig) -> f64 {
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    a.iter()
        .copied()
        .find(|v| v.abs() > tol.match_tol * scale)
        .map(|v| v.signum())
        .unwrap_or(1.0)
}

fn cmp_neurons(x: &Neuron, y: &Neuron) -> std::cmp::Ordering {
    x.a.iter()
        .zip(&y.a)
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| x.b.total_cmp(&y.b))
}

/// Flips every neuron whose direction starts negative, using
/// `s·σ(u) = -s·σ(-u) + s·c0`, and sorts by `(a, b)`.
pub fn canonicalize_analytic(net: &ShallowNet, tol: &ToleranceConfig) -> Result<AnalyticCanonicalForm> {
    check_admissible_analytic(net, tol)?.into_result()?;
    let c0 = net.activation.c0().expect("analytic activation");
    let mut c = net.c;
    let mut neurons: Vec<Neuron> = net
        .neurons
        .iter()
        .map(|n| {
            if leading_sign(&n.a, tol) < 0.0 {
                c += n.s * c0;
                Neuron::new(n.a.iter().map(|v| -v).collect(), -n.b, -n.s)
            } else {
                n.clone()
            }
        })
        .collect();
    neurons.sort_by(cmp_neurons);
    Ok(AnalyticCanonicalForm {
        activation: net.activation,
        d: net.d,
        neurons,
        c,
    })
}

fn close(x: f64, y: f64, tol: &ToleranceConfig) -> bool {
    (x - y).abs() <= tol.match_tol * (1.0 + x.abs().max(y.abs()))
}

/// Equivalence of two admissible analytic networks with the same activation.
pub fn test_equivalent_analytic(n1: &ShallowNet, n2: &ShallowNet, tol: &ToleranceConfig) -> Result<bool> {
    require_analytic(n1)?;
    require_analytic(n2)?;
    if n1.activation != n2.activation {
        return Err(Error::Input(format!(
            "activation mismatch: {} vs {}",
            n1.activation, n2.activation
        )));
    }
    if n1.d != n2.d {
        return Err(Error::Input(format!("dimension mismatch: {} vs {}", n1.d, n2.d)));
    }
    let f1 = canonicalize_analytic(n1, tol)?;
    let f2 = canonicalize_analytic(n2, tol)?;
    if f1.neurons.len() != f2.neurons.len() || !close(f1.c, f2.c, tol) {
        return Ok(false);
    }
    let mut used = vec![false; f2.neurons.len()];
    for p in &f1.neurons {
        let hit = f2.neurons.iter().enumerate().find(|(j, q)| {
            !used[*j]
                && close(p.b, q.b, tol)
                && close(p.s, q.s, tol)
                && p.a.iter().zip(&q.a).all(|(x, y)| close(*x, *y, tol))
        });
        match hit {
            Some((j, _)) => used[j] = true,
            None => return Ok(false),
        }
    }
    Ok(true)
}

/// `N` vectors in `ℝ^d` of which every `d` form a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSparkFrame {
    pub vectors: Vec<Vec<f64>>,
    pub nodes: Vec<f64>,
}

/// Result of checking the full spark property.
#[derive(Debug, Clone, PartialEq)]
pub struct SparkCheck {
    pub subsets_checked: usize,
    pub exhaustive: bool,
    pub min_abs_det: f64,
}

impl FullSparkFrame {
    pub fn d(&self) -> usize {
        self.vectors.first().map(Vec::len).unwrap_or(0)
    }

    /// Checks that `d`-subsets have full rank and, after scaling each row to
    /// unit length, `|det| > 1e-9`. Exhaustive for at most 12 vectors,
    /// otherwise on 10 000 subsets drawn with `seed`.
    pub fn verify_full_spark(&self, seed: u64, tol: &ToleranceConfig) -> Result<SparkCheck> {
        let d = self.d();
        let n = self.vectors.len();
        if n < d || d == 0 {
            return Err(Error::Input(format!("frame of {n} vectors in dimension {d}")));
        }
        let mut min_abs_det = f64::INFINITY;
        let mut check = |subset: &[usize]| -> Result<()> {
            let m = DMatrix::from_fn(d, d, |r, c| {
                let v = &self.vectors[subset[r]];
                v[c] / norm(v)
            });
            let det = m.determinant().abs();
            min_abs_det = min_abs_det.min(det);
            if rank(&m, tol)? != d || det <= MIN_SUBSET_DET {
                return Err(Error::Invariant(format!(
                    "frame subset {subset:?} is not a basis (|det| = {det:e})"
                )));
            }
            Ok(())
        };
        let exhaustive = n <= EXHAUSTIVE_FRAME_SIZE;
        let mut checked = 0;
        if exhaustive {
            for subset in (0..n).combinations(d) {
                check(&subset)?;
                checked += 1;
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..SAMPLED_SUBSETS {
                let mut subset = rand::seq::index::sample(&mut rng, n, d).into_vec();
                subset.sort_unstable();
                check(&subset)?;
                checked += 1;
            }
        }
        Ok(SparkCheck {
            subsets_checked: checked,
            exhaustive,
            min_abs_det,
        })
    }
}

fn equispaced(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Vandermonde frame: nodes equispaced in `[-1, 1]`, vectors
/// `(1, t, t², …, t^{d-1})`.
pub fn vandermonde_frame(d: usize, n: usize) -> Result<FullSparkFrame> {
    if d == 0 {
        return Err(Error::Input("dimension must be positive".into()));
    }
    if n < d {
        return Err(Error::Input(format!("frame size {n} is smaller than dimension {d}")));
    }
    let nodes = equispaced(n, -1.0, 1.0);
    Ok(frame_from_nodes(d, nodes))
}

fn frame_from_nodes(d: usize, nodes: Vec<f64>) -> FullSparkFrame {
    let vectors = nodes
        .iter()
        .map(|&t| (0..d).map(|p| t.powi(p as i32)).collect())
        .collect();
    FullSparkFrame { vectors, nodes }
}

/// `C(M, 2)·(d - 1) + 1`: frame size that guarantees a separating vector for
/// `M` distinct vectors.
pub fn separating_frame_size(m_vectors: usize, d: usize) -> u128 {
    binomial(m_vectors, 2) * (d as u128 - 1) + 1
}

/// First frame vector on which all `vectors` have pairwise distinct inner
/// products.
pub fn separating_direction(frame: &FullSparkFrame, vectors: &[Vec<f64>], tol: &ToleranceConfig) -> Result<Vec<f64>> {
    let d = frame.d();
    if d == 0 || frame.vectors.is_empty() {
        return Err(Error::Input("empty frame".into()));
    }
    if let Some(i) = vectors.iter().position(|v| v.len() != d) {
        return Err(Error::Input(format!(
            "vector {i} has dimension {}, expected {d}",
            vectors[i].len()
        )));
    }
    let needed = separating_frame_size(vectors.len(), d);
    if (frame.vectors.len() as u128) < needed {
        return Err(Error::Input(format!(
            "{} vectors need a frame of at least {needed}, got {}",
            vectors.len(),
            frame.vectors.len()
        )));
    }
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            let gap = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            if gap <= tol.match_tol * (1.0 + norm(&vectors[i]).max(norm(&vectors[j]))) {
                return Err(Error::Input(format!("vectors {i} and {j} coincide")));
            }
        }
    }
    for v in &frame.vectors {
        let ip: Vec<f64> = vectors.iter().map(|a| dot(a, v)).collect();
        let vn = norm(v);
        let separates = (0..vectors.len()).tuple_combinations().all(|(i, j)| {
            let scale = 1.0 + norm(&vectors[i]) + norm(&vectors[j]);
            (ip[i] - ip[j]).abs() > tol.zero_tol * scale * vn
        });
        if separates {
            return Ok(v.clone());
        }
    }
    Err(Error::Tolerance(
        "no frame vector separates the inputs; they are too close to each other".into(),
    ))
}

/// The finite point set `{z_i·v_j}` identifying analytic networks with at
/// most `m` neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSamplePlan {
    pub m: usize,
    pub d: usize,
    pub frame: FullSparkFrame,
    pub scalars: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AnalyticPlanFile {
    m: usize,
    d: usize,
    nodes: Vec<f64>,
    scalars: Vec<f64>,
}

/// `(C(4m,2)·(d-1) + 1, 4^m)`, or `None` on overflow.
pub fn analytic_plan_shape(m: usize, d: usize) -> Option<(u128, u128)> {
    if m == 0 || d == 0 || m > 60 {
        return None;
    }
    let n = binomial(4 * m, 2).checked_mul(d as u128 - 1)?.checked_add(1)?;
    let z = 1u128.checked_shl(2 * m as u32)?;
    Some((n, z))
}

impl AnalyticSamplePlan {
    pub fn frame_size(&self) -> usize {
        self.frame.vectors.len()
    }

    pub fn point_count(&self) -> usize {
        self.frame_size() * self.scalars.len()
    }

    /// Points `z_i·v_j`, scalar-major.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.scalars
            .iter()
            .flat_map(|&z| {
                self.frame
                    .vectors
                    .iter()
                    .map(move |v| v.iter().map(|x| z * x).collect())
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        to_json_string(&AnalyticPlanFile {
            m: self.m,
            d: self.d,
            nodes: self.frame.nodes.clone(),
            scalars: self.scalars.clone(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: AnalyticPlanFile = from_json_str(text, "analytic plan")?;
        let (n, z) = analytic_plan_shape(f.m, f.d)
            .ok_or_else(|| Error::parse("analytic plan.m", "m and d must be positive and small"))?;
        if f.nodes.len() as u128 != n {
            return Err(Error::parse(
                "analytic plan.nodes",
                format!("expected {n} nodes, got {}", f.nodes.len()),
            ));
        }
        if f.scalars.len() as u128 != z {
            return Err(Error::parse(
                "analytic plan.scalars",
                format!("expected {z} scalars, got {}", f.scalars.len()),
            ));
        }
        for (what, xs) in [("nodes", &f.nodes), ("scalars", &f.scalars)] {
            let mut sorted = xs.clone();
            sorted.sort_by(f64::total_cmp);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::parse(
                    format!("analytic plan.{what}"),
                    "values must be pairwise distinct",
                ));
            }
        }
        Ok(Self {
            m: f.m,
            d: f.d,
            frame: frame_from_nodes(f.d, f.nodes),
            scalars: f.scalars,
        })
    }
}

/// Builds the plan: `N = C(4m,2)·(d-1) + 1` Vandermonde vectors and `4^m`
/// scalars equispaced in `[-2, 2]`. Fails before allocating when the point
/// count would exceed `cap`.
pub fn build_analytic_plan(m: usize, d: usize, cap: u64) -> Result<AnalyticSamplePlan> {
    if m == 0 || d == 0 {
        return Err(Error::Input("m and d must be positive".into()));
    }
    let (n, z) = analytic_plan_shape(m, d)
        .ok_or_else(|| Error::Size(format!("plan for m = {m}, d = {d} is too large to represent")))?;
    let count = n.checked_mul(z);
    if count.is_none_or(|c| c > cap as u128) {
        return Err(Error::Size(format!(
            "plan for m = {m}, d = {d} has {} points, cap is {cap}",
            count.map_or("more than 2^128".to_string(), |c| c.to_string())
        )));
    }
    Ok(AnalyticSamplePlan {
        m,
        d,
        frame: vandermonde_frame(d, n as usize)?,
        scalars: equispaced(z as usize, -2.0, 2.0),
    })
}

/// Outcome of comparing two networks on an analytic plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationReport {
    pub max_gap: f64,
    pub equal_on_plan: bool,
    pub equivalent: bool,
    pub warning: Option<String>,
}

/// Evaluates both networks on the plan and compares with canonical-form
/// equivalence. Agreement on the plan without equivalence contradicts exact
/// identifiability and is reported as numerical saturation, never as a
/// certificate.
pub fn verify_identification(
    n1: &ShallowNet,
    n2: &ShallowNet,
    plan: &AnalyticSamplePlan,
    tol: &ToleranceConfig,
) -> Result<IdentificationReport> {
    let equivalent = test_equivalent_analytic(n1, n2, tol)?;
    if n1.d != plan.d {
        return Err(Error::Input(format!(
            "plan dimension {} does not match network dimension {}",
            plan.d, n1.d
        )));
    }
    for (which, net) in [("first", n1), ("second", n2)] {
        if net.m() > plan.m {
            return Err(Error::Input(format!(
                "{which} network has {} neurons, plan supports at most {}",
                net.m(),
                plan.m
            )));
        }
    }
    let mut max_gap = 0.0_f64;
    let mut scale = 0.0_f64;
    for x in plan.points() {
        let (p, q) = (n1.eval(&x), n2.eval(&x));
        max_gap = max_gap.max((p - q).abs());
        scale = scale.max(p.abs()).max(q.abs());
    }
    let equal_on_plan = max_gap <= tol.residual_tol * (1.0 + scale);
    let warning = match (equal_on_plan, equivalent) {
        (true, false) => Some(format!(
            "networks agree on the plan to {max_gap:e} but are not equivalent; evaluation is numerically saturated"
        )),
        (false, true) => Some(format!(
            "equivalent networks differ on the plan by {max_gap:e}; parameters are badly scaled"
        )),
        _ => None,
    };
    Ok(IdentificationReport {
        max_gap,
        equal_on_plan,
        equivalent,
        warning,
    })
}

/// Coefficients `c_α` of `h(x) = f(x)·Π_k (1 + e^{-(a_k x + b_k)}) = Σ_α c_α e^{-α x}`
/// for a one-dimensional sigmoid network `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSumExpansion {
    /// `(α, c_α)` sorted by `α`, one entry per distinct subset sum.
    pub terms: Vec<(f64, f64)>,
}

impl ExpSumExpansion {
    /// The exponent set `A`.
    pub fn exponents(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.0).collect()
    }

    /// `Σ_α c_α e^{-α x}`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.terms.iter().map(|(alpha, c)| c * (-alpha * x).exp()).sum()
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }
}

/// `f(x)·Π_k (1 + e^{-(a_k x + b_k)})` evaluated directly.
pub fn exp_sum_direct(a: &[f64], b: &[f64], s: &[f64], s0: f64, x: f64) -> f64 {
    let f = s0
        + a.iter()
            .zip(b)
            .zip(s)
            .map(|((a, b), s)| s * crate::net::sigmoid(a * x + b))
            .sum::<f64>();
    f * a
        .iter()
        .zip(b)
        .map(|(a, b)| 1.0 + (-(a * x + b)).exp())
        .product::<f64>()
}

/// Expands a one-dimensional sigmoid network `Σ s_k σ(a_k x + b_k) + s0`.
///
/// `c_α = Σ_{K: Σ_K a_k = α} (s0 + Σ_{k∉K} s_k)·Π_{k∈K} e^{-b_k}`, with
/// subset sums merged within `match_tol`.
pub fn exp_sum_expansion(a: &[f64], b: &[f64], s: &[f64], s0: f64, tol: &ToleranceConfig) -> Result<ExpSumExpansion> {
    let n = a.len();
    if b.len() != n || s.len() != n {
        return Err(Error::Input(format!(
            "parameter lengths differ: a {n}, b {}, s {}",
            b.len(),
            s.len()
        )));
    }
    if n > MAX_EXPSUM_TERMS {
        return Err(Error::Size(format!(
            "expansion enumerates 2^n subsets; n = {n} exceeds {MAX_EXPSUM_TERMS}"
        )));
    }
    if let Some(k) = a.iter().position(|v| v.abs() <= tol.zero_tol) {
        return Err(Error::Input(format!("a[{k}] is zero")));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for sign in [1.0, -1.0] {
                if close(a[i], sign * a[j], tol) && close(b[i], sign * b[j], tol) {
                    return Err(Error::Input(format!("neurons {i} and {j} coincide up to sign")));
                }
            }
        }
    }
    let total: f64 = s.iter().sum();
    let mut raw: Vec<(f64, f64)> = (0..1u64 << n)
        .map(|mask| {
            let mut alpha = 0.0;
            let mut coef = s0 + total;
            let mut weight = 1.0;
            for k in 0..n {
                if mask >> k & 1 == 1 {
                    alpha += a[k];
                    coef -= s[k];
                    weight *= (-b[k]).exp();
                }
            }
            (alpha, coef * weight)
        })
        .collect();
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut terms: Vec<(f64, f64)> = Vec::new();
    for (alpha, c) in raw {
        match terms.last_mut() {
            Some(last) if close(last.0, alpha, tol) => last.1 += c,
            _ => terms.push((alpha, c)),
        }
    }
    Ok(ExpSumExpansion { terms })
}

/// Expansion of a one-dimensional sigmoid or tanh network; tanh is first
/// rewritten in sigmoid form.
pub fn exp_sum_for_net(net: &ShallowNet, tol: &ToleranceConfig) -> Result<ExpSumExpansion> {
    require_analytic(net)?;
    if net.d != 1 {
        return Err(Error::Input(format!(
            "expansion needs a one-dimensional network, got d = {}",
            net.d
        )));
    }
    let sig = net.to_sigmoid_form();
    let a: Vec<f64> = sig.neurons.iter().map(|n| n.a[0]).collect();
    let b: Vec<f64> = sig.neurons.iter().map(|n| n.b).collect();
    let s: Vec<f64> = sig.neurons.iter().map(|n| n.s).collect();
    exp_sum_expansion(&a, &b, &s, sig.c, tol)
}
