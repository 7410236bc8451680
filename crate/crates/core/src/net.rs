//! Network representation, activations, canonical hyperplanes, grouping and
//! the JSON file format.

use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, norm, ToleranceConfig};

/// Activation function of the hidden layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    /// The flip constant `σ(x) + σ(-x)`; `None` for ReLU where the sum is `|x|`.
    pub fn c0(self) -> Option<f64> {
        match self {
            Activation::Relu => None,
            Activation::Sigmoid => Some(1.0),
            Activation::Tanh => Some(0.0),
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
        }
    }

    pub fn is_analytic(self) -> bool {
        !matches!(self, Activation::Relu)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        })
    }
}

/// Logistic sigmoid, evaluated without overflow for large `|x|`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One hidden unit `s·σ(<a, x> + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neuron {
    pub a: Vec<f64>,
    pub b: f64,
    pub s: f64,
}

impl Neuron {
    pub fn new(a: Vec<f64>, b: f64, s: f64) -> Self {
        Self { a, b, s }
    }

    pub fn preactivation(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) + self.b
    }
}

/// `f(x) = Σ s_k σ(<a_k, x> + b_k) + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShallowNet {
    pub activation: Activation,
    pub d: usize,
    pub neurons: Vec<Neuron>,
    pub c: f64,
}

impl ShallowNet {
    /// Builds a network, checking that every direction has length `d`.
    pub fn new(activation: Activation, d: usize, neurons: Vec<Neuron>, c: f64) -> Result<Self> {
        let net = Self {
            activation,
            d,
            neurons,
            c,
        };
        net.validate_shape()?;
        Ok(net)
    }

    pub fn validate_shape(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Input("input dimension d must be positive".into()));
        }
        for (k, n) in self.neurons.iter().enumerate() {
            if n.a.len() != self.d {
                return Err(Error::Input(format!(
                    "neuron {k}: direction has length {}, expected {}",
                    n.a.len(),
                    self.d
                )));
            }
            if !(n.b.is_finite() && n.s.is_finite() && n.a.iter().all(|v| v.is_finite())) {
                return Err(Error::Input(format!("neuron {k}: non-finite parameter")));
            }
        }
        if !self.c.is_finite() {
            return Err(Error::Input("non-finite output constant".into()));
        }
        Ok(())
    }

    /// Number of hidden neurons.
    pub fn m(&self) -> usize {
        self.neurons.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::Input(format!(
                "point has dimension {}, network expects {}",
                x.len(),
                self.d
            )));
        }
        Ok(self.eval(x))
    }

    /// Evaluation without the dimension check.
    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        self.neurons
            .iter()
            .map(|n| n.s * self.activation.apply(n.preactivation(x)))
            .sum::<f64>()
            + self.c
    }

    /// Rewrites a tanh network as a sigmoid network with the same function,
    /// via `tanh(u) = 2·sigmoid(2u) - 1`. Other activations are returned as is.
    pub fn to_sigmoid_form(&self) -> ShallowNet {
        if self.activation != Activation::Tanh {
            return self.clone();
        }
        let neurons = self
            .neurons
            .iter()
            .map(|n| Neuron::new(n.a.iter().map(|v| 2.0 * v).collect(), 2.0 * n.b, 2.0 * n.s))
            .collect();
        let c = self.c - self.neurons.iter().map(|n| n.s).sum::<f64>();
        ShallowNet {
            activation: Activation::Sigmoid,
            d: self.d,
            neurons,
            c,
        }
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: ShallowNet = from_json_str(text, "network")?;
        if net.d == 0 {
            return Err(Error::parse("network.d", "input dimension must be positive"));
        }
        for (k, n) in net.neurons.iter().enumerate() {
            if n.a.len() != net.d {
                return Err(Error::parse(
                    format!("network.neurons[{k}].a"),
                    format!("length {} does not match d = {}", n.a.len(), net.d),
                ));
            }
        }
        Ok(net)
    }
}

/// Pretty JSON with a trailing newline. Floats use the shortest representation
/// that round-trips.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializing plain data cannot fail");
    s.push('\n');
    s
}

/// Parses JSON, reporting failures as [`Error::Parse`] with line and column.
pub fn from_json_str<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("{what} (line {}, column {})", e.line(), e.column()),
            e.to_string(),
        )
    })
}

/// A hyperplane `<a, x> + b = 0` in canonical form: `a` has unit length and
/// its first entry of magnitude above `match_tol` is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub a: Vec<f64>,
    pub b: f64,
}

/// Decomposition `(a, b) = sign · scale · (h.a, h.b)` of an affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct Oriented {
    pub hyperplane: Hyperplane,
    pub scale: f64,
    pub sign: f64,
}

fn first_significant(a: &[f64], threshold: f64) -> Option<f64> {
    a.iter().copied().find(|v| v.abs() > threshold)
}

impl Hyperplane {
    /// Canonicalizes `(a, b)`; `None` when `a` is (numerically) zero.
    pub fn from_affine(a: &[f64], b: f64, tol: &ToleranceConfig) -> Option<Oriented> {
        let scale = norm(a);
        if !scale.is_finite() || scale <= tol.zero_tol {
            return None;
        }
        let unit: Vec<f64> = a.iter().map(|v| v / scale).collect();
        let lead = first_significant(&unit, tol.match_tol)
            .or_else(|| unit.iter().copied().find(|v| *v != 0.0))
            .unwrap_or(1.0);
        let sign = if lead > 0.0 { 1.0 } else { -1.0 };
        Some(Oriented {
            hyperplane: Hyperplane {
                a: unit.iter().map(|v| sign * v).collect(),
                b: sign * b / scale,
            },
            scale,
            sign,
        })
    }

    pub fn canonical(&self, tol: &ToleranceConfig) -> Hyperplane {
        Hyperplane::from_affine(&self.a, self.b, tol)
            .map(|o| o.hyperplane)
            .unwrap_or_else(|| self.clone())
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) + self.b
    }

    /// `Some(+1)` when the unit pair `(a, b)` matches this hyperplane's
    /// orientation, `Some(-1)` when it matches the opposite one.
    pub fn orientation_of(&self, a: &[f64], b: f64, tol: &ToleranceConfig) -> Option<f64> {
        if a.len() != self.a.len() {
            return None;
        }
        let close = |sign: f64| {
            let da = self
                .a
                .iter()
                .zip(a)
                .fold(0.0_f64, |m, (x, y)| m.max((x - sign * y).abs()));
            let db = (self.b - sign * b).abs();
            da <= tol.match_tol && db <= tol.match_tol * (1.0 + self.b.abs().max(b.abs()))
        };
        if close(1.0) {
            Some(1.0)
        } else if close(-1.0) {
            Some(-1.0)
        } else {
            None
        }
    }

    /// Set equality of the two hyperplanes. The negated form is accepted as
    /// well, so near-tie canonical signs cannot split one hyperplane in two.
    pub fn approx_eq(&self, other: &Hyperplane, tol: &ToleranceConfig) -> bool {
        self.orientation_of(&other.a, other.b, tol).is_some()
    }

    /// Lexicographic order on `(a, b)`, used for deterministic sorting.
    pub fn total_cmp(&self, other: &Hyperplane) -> std::cmp::Ordering {
        for (x, y) in self.a.iter().zip(&other.a) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => {}
                o => return o,
            }
        }
        self.b.total_cmp(&other.b)
    }
}

/// A hyperplane carrying neurons of both orientations:
/// `s1·σ(<a,x>+b) + s2·σ(-<a,x>-b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTerm {
    pub h: Hyperplane,
    pub s1: f64,
    pub s2: f64,
}

/// A hyperplane carrying one neuron `s·σ(<a,x>+b)` with unit `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleTerm {
    pub a: Vec<f64>,
    pub b: f64,
    pub s: f64,
}

/// ReLU network in the grouped normal form `(K1, K2, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedReLU {
    pub k1: Vec<PairedTerm>,
    pub k2: Vec<SingleTerm>,
    pub c: f64,
    pub d: usize,
}

impl GroupedReLU {
    /// `2·#K1 + #K2`.
    pub fn neuron_count(&self) -> usize {
        2 * self.k1.len() + self.k2.len()
    }

    /// Number of distinct hyperplanes, `#K1 + #K2`.
    pub fn hyperplane_count(&self) -> usize {
        self.k1.len() + self.k2.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::Input(format!(
                "point has dimension {}, network expects {}",
                x.len(),
                self.d
            )));
        }
        let relu = |u: f64| u.max(0.0);
        let mut y = self.c;
        for t in &self.k1 {
            let u = t.h.signed_distance(x);
            y += t.s1 * relu(u) + t.s2 * relu(-u);
        }
        for t in &self.k2 {
            y += t.s * relu(dot(&t.a, x) + t.b);
        }
        Ok(y)
    }

    /// The hyperplanes of `K1` followed by the canonical hyperplanes of `K2`.
    pub fn hyperplanes(&self, tol: &ToleranceConfig) -> Vec<Hyperplane> {
        self.k1
            .iter()
            .map(|t| t.h.clone())
            .chain(
                self.k2
                    .iter()
                    .map(|t| Hyperplane { a: t.a.clone(), b: t.b }.canonical(tol)),
            )
            .collect()
    }

    /// Expands back to a flat network: each `K1` entry becomes two neurons.
    pub fn to_net(&self) -> ShallowNet {
        let mut neurons = Vec::with_capacity(self.neuron_count());
        for t in &self.k1 {
            neurons.push(Neuron::new(t.h.a.clone(), t.h.b, t.s1));
            neurons.push(Neuron::new(t.h.a.iter().map(|v| -v).collect(), -t.h.b, t.s2));
        }
        for t in &self.k2 {
            neurons.push(Neuron::new(t.a.clone(), t.b, t.s));
        }
        ShallowNet {
            activation: Activation::Relu,
            d: self.d,
            neurons,
            c: self.c,
        }
    }
}

/// A violated admissibility clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Violation {
    /// Clause (i): `a_k = 0`.
    ZeroDirection { neuron: usize },
    /// Clause (i): `s_k = 0`.
    ZeroScale { neuron: usize },
    /// Clause (ii): `(a_j, b_j) = λ (a_k, b_k)` with `λ > 0`.
    PositiveDuplicate { first: usize, second: usize },
    /// Analytic clause (ii): `(a_j, b_j) = -(a_k, b_k)`.
    NegativeDuplicate { first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroDirection { neuron } => write!(f, "clause (i): neuron {neuron} has zero direction"),
            Violation::ZeroScale { neuron } => write!(f, "clause (i): neuron {neuron} has zero output weight"),
            Violation::PositiveDuplicate { first, second } => write!(
                f,
                "clause (ii): neurons {first} and {second} are positive multiples of each other"
            ),
            Violation::NegativeDuplicate { first, second } => {
                write!(
                    f,
                    "clause (ii): neurons {first} and {second} are negatives of each other"
                )
            }
        }
    }
}

/// Outcome of an admissibility check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub violations: Vec<Violation>,
}

impl AdmissibilityReport {
    pub(crate) fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            admissible: violations.is_empty(),
            violations,
        }
    }

    pub(crate) fn into_result(self) -> Result<()> {
        if self.admissible {
            return Ok(());
        }
        let text: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        Err(Error::Inadmissible(text.join("; ")))
    }
}

fn zero_clause(net: &ShallowNet, tol: &ToleranceConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    for (k, n) in net.neurons.iter().enumerate() {
        if norm(&n.a) <= tol.zero_tol {
            out.push(Violation::ZeroDirection { neuron: k });
        }
        if n.s.abs() <= tol.zero_tol {
            out.push(Violation::ZeroScale { neuron: k });
        }
    }
    out
}

/// `(a, b) / ||a||`, skipping zero directions.
fn unit_affine(n: &Neuron, tol: &ToleranceConfig) -> Option<(Vec<f64>, f64)> {
    let r = norm(&n.a);
    (r > tol.zero_tol).then(|| (n.a.iter().map(|v| v / r).collect(), n.b / r))
}

fn same_affine(x: &(Vec<f64>, f64), y: &(Vec<f64>, f64), sign: f64, tol: &ToleranceConfig) -> bool {
    let da =
        x.0.iter()
            .zip(&y.0)
            .fold(0.0_f64, |m, (p, q)| m.max((p - sign * q).abs()));
    da <= tol.match_tol && (x.1 - sign * y.1).abs() <= tol.match_tol * (1.0 + x.1.abs().max(y.1.abs()))
}

/// Admissibility in the ReLU sense: no zero neuron, no positive-scale duplicates.
pub fn relu_admissibility(net: &ShallowNet, tol: &ToleranceConfig) -> AdmissibilityReport {
    let mut violations = zero_clause(net, tol);
    let units: Vec<_> = net.neurons.iter().map(|n| unit_affine(n, tol)).collect();
    for i in 0..units.len() {
        for j in (i + 1)..units.len() {
            if let (Some(x), Some(y)) = (&units[i], &units[j]) {
                if same_affine(x, y, 1.0, tol) {
                    violations.push(Violation::PositiveDuplicate { first: i, second: j });
                }
            }
        }
    }
    AdmissibilityReport::from_violations(violations)
}

/// Admissibility in the analytic sense: no zero neuron and no pair with
/// `(a_j, b_j) = ±(a_k, b_k)`. Rescaled copies are distinct analytic neurons.
pub fn analytic_admissibility(net: &ShallowNet, tol: &ToleranceConfig) -> AdmissibilityReport {
    let mut violations = zero_clause(net, tol);
    let n = &net.neurons;
    for i in 0..n.len() {
        for j in (i + 1)..n.len() {
            let scale = 1.0 + norm(&n[i].a).max(norm(&n[j].a)) + n[i].b.abs().max(n[j].b.abs());
            let gap = |sign: f64| {
                n[i].a
                    .iter()
                    .zip(&n[j].a)
                    .map(|(p, q)| (p - sign * q).abs())
                    .chain(std::iter::once((n[i].b - sign * n[j].b).abs()))
                    .fold(0.0_f64, f64::max)
            };
            if gap(1.0) <= tol.match_tol * scale {
                violations.push(Violation::PositiveDuplicate { first: i, second: j });
            } else if gap(-1.0) <= tol.match_tol * scale {
                violations.push(Violation::NegativeDuplicate { first: i, second: j });
            }
        }
    }
    AdmissibilityReport::from_violations(violations)
}

/// Groups an admissible ReLU network into `(K1, K2, c)`.
///
/// Each neuron is rescaled to a unit direction, folding `||a||` into `s`.
/// Neurons on the same hyperplane with opposite orientations become one `K1`
/// entry (`s1` on the canonical orientation); the rest go to `K2` with their
/// own orientation. Order follows first appearance.
pub fn group(net: &ShallowNet, tol: &ToleranceConfig) -> Result<GroupedReLU> {
    if net.activation != Activation::Relu {
        return Err(Error::Input(format!(
            "group() needs a relu network, got {}",
            net.activation
        )));
    }
    net.validate_shape()?;
    relu_admissibility(net, tol).into_result()?;

    struct Slot {
        h: Hyperplane,
        plus: Option<f64>,
        minus: Option<f64>,
        first_sign: f64,
    }
    let mut slots: Vec<Slot> = Vec::new();
    for (k, n) in net.neurons.iter().enumerate() {
        let o = Hyperplane::from_affine(&n.a, n.b, tol)
            .ok_or_else(|| Error::Inadmissible(format!("clause (i): neuron {k} has zero direction")))?;
        let s = n.s * o.scale;
        let found = slots.iter().position(|sl| sl.h.approx_eq(&o.hyperplane, tol));
        let (idx, sign) = match found {
            Some(i) => {
                let rel = slots[i]
                    .h
                    .orientation_of(&o.hyperplane.a, o.hyperplane.b, tol)
                    .unwrap_or(1.0);
                (i, rel * o.sign)
            }
            None => {
                slots.push(Slot {
                    h: o.hyperplane.clone(),
                    plus: None,
                    minus: None,
                    first_sign: o.sign,
                });
                (slots.len() - 1, o.sign)
            }
        };
        let slot = &mut slots[idx];
        let target = if sign > 0.0 { &mut slot.plus } else { &mut slot.minus };
        if target.is_some() {
            return Err(Error::Inadmissible(format!(
                "clause (ii): neuron {k} duplicates an earlier neuron up to positive scale"
            )));
        }
        *target = Some(s);
    }

    let mut k1 = Vec::new();
    let mut k2 = Vec::new();
    for sl in slots {
        match (sl.plus, sl.minus) {
            (Some(s1), Some(s2)) => k1.push(PairedTerm { h: sl.h, s1, s2 }),
            (Some(s), None) | (None, Some(s)) => {
                let sign = sl.first_sign;
                k2.push(SingleTerm {
                    a: sl.h.a.iter().map(|v| sign * v).collect(),
                    b: sign * sl.h.b,
                    s,
                })
            }
            (None, None) => unreachable!("slots are created with one neuron"),
        }
    }
    Ok(GroupedReLU {
        k1,
        k2,
        c: net.c,
        d: net.d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn two_ridges() -> ShallowNet {
        ShallowNet::new(
            Activation::Relu,
            2,
            vec![
                Neuron::new(vec![1.0, 1.0], 0.0, 1.0),
                Neuron::new(vec![1.0, -1.0], 0.0, 1.0),
            ],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(two_ridges().evaluate(&[1.0, 0.0]).unwrap(), 2.0);
        let sig = ShallowNet::new(Activation::Sigmoid, 1, vec![Neuron::new(vec![1.0], 0.0, 1.0)], 0.0).unwrap();
        assert_eq!(sig.evaluate(&[0.0]).unwrap(), 0.5);
        assert!(matches!(two_ridges().evaluate(&[1.0]), Err(Error::Input(_))));
    }

    #[test]
    fn flip_constants() {
        assert_eq!(Activation::Sigmoid.c0(), Some(1.0));
        assert_eq!(Activation::Tanh.c0(), Some(0.0));
        assert_eq!(Activation::Relu.c0(), None);
        for x in [-30.0, -2.5, 0.0, 0.7, 40.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sigmoid_is_stable_far_out() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }

    #[test]
    fn tanh_as_sigmoid() {
        let net = ShallowNet::new(
            Activation::Tanh,
            2,
            vec![
                Neuron::new(vec![0.3, -1.2], 0.4, 1.5),
                Neuron::new(vec![-0.7, 0.2], -1.0, -0.5),
            ],
            0.25,
        )
        .unwrap();
        let sig = net.to_sigmoid_form();
        assert_eq!(sig.activation, Activation::Sigmoid);
        for i in 0..50 {
            let x = [i as f64 * 0.13 - 3.0, 2.0 - i as f64 * 0.07];
            let (p, q) = (net.evaluate(&x).unwrap(), sig.evaluate(&x).unwrap());
            assert!((p - q).abs() < 1e-12 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn canonical_hyperplane() {
        let o = Hyperplane::from_affine(&[-3.0, 4.0], 5.0, &tol()).unwrap();
        assert_eq!(o.sign, -1.0);
        assert!((o.scale - 5.0).abs() < 1e-15);
        assert!((o.hyperplane.a[0] - 0.6).abs() < 1e-15);
        assert!((o.hyperplane.a[1] + 0.8).abs() < 1e-15);
        assert!((o.hyperplane.b + 1.0).abs() < 1e-15);
        let again = o.hyperplane.canonical(&tol());
        assert_eq!(again, o.hyperplane);
        // Leading entry below match_tol is skipped.
        let o = Hyperplane::from_affine(&[1e-12, -1.0], 0.0, &tol()).unwrap();
        assert!(o.hyperplane.a[1] > 0.0);
        assert!(Hyperplane::from_affine(&[0.0, 0.0], 1.0, &tol()).is_none());
    }

    #[test]
    fn group_two_ridges() {
        let g = group(&two_ridges(), &tol()).unwrap();
        assert!(g.k1.is_empty());
        assert_eq!(g.k2.len(), 2);
        let r = std::f64::consts::SQRT_2;
        assert!((g.k2[0].s - r).abs() < 1e-14 && (g.k2[1].s - r).abs() < 1e-14);
        assert!((g.k2[0].a[0] - 1.0 / r).abs() < 1e-14);
        assert!((g.k2[1].a[1] + 1.0 / r).abs() < 1e-14);
        for x in [[0.3, -2.0], [1.0, 1.0], [-4.0, 0.5]] {
            assert!((g.evaluate(&x).unwrap() - two_ridges().evaluate(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn group_pairs_opposite_orientations() {
        let net = ShallowNet::new(
            Activation::Relu,
            2,
            vec![
                Neuron::new(vec![1.0, 0.0], 0.0, 1.0),
                Neuron::new(vec![-1.0, 0.0], 0.0, -1.0),
                Neuron::new(vec![0.0, 1.0], 0.0, 1.0),
                Neuron::new(vec![0.0, -1.0], 0.0, -1.0),
            ],
            0.0,
        )
        .unwrap();
        let g = group(&net, &tol()).unwrap();
        assert_eq!(g.k1.len(), 2);
        assert!(g.k2.is_empty());
        assert_eq!(g.neuron_count(), 4);
        assert_eq!((g.k1[0].s1, g.k1[0].s2), (1.0, -1.0));
    }

    #[test]
    fn group_rescales_negative_first_orientation() {
        let net = ShallowNet::new(
            Activation::Relu,
            1,
            vec![Neuron::new(vec![-2.0], 1.0, 3.0), Neuron::new(vec![4.0], -2.0, 1.0)],
            0.5,
        )
        .unwrap();
        let g = group(&net, &tol()).unwrap();
        assert_eq!(g.k1.len(), 1);
        let t = &g.k1[0];
        assert_eq!(t.h.a, vec![1.0]);
        assert!((t.h.b + 0.5).abs() < 1e-15);
        assert!((t.s1 - 4.0).abs() < 1e-15);
        assert!((t.s2 - 6.0).abs() < 1e-15);
    }

    #[test]
    fn group_rejects_inadmissible() {
        let dup = ShallowNet::new(
            Activation::Relu,
            2,
            vec![
                Neuron::new(vec![1.0, 2.0], 1.0, 1.0),
                Neuron::new(vec![2.0, 4.0], 2.0, -1.0),
            ],
            0.0,
        )
        .unwrap();
        let err = group(&dup, &tol()).unwrap_err();
        assert!(matches!(err, Error::Inadmissible(ref m) if m.contains("clause (ii)")));
        let zero = ShallowNet::new(Activation::Relu, 1, vec![Neuron::new(vec![0.0], 1.0, 1.0)], 0.0).unwrap();
        assert!(matches!(group(&zero, &tol()), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn analytic_admissibility_flags_negatives_only_exactly() {
        let net = ShallowNet::new(
            Activation::Sigmoid,
            1,
            vec![Neuron::new(vec![1.0], 0.5, 1.0), Neuron::new(vec![-1.0], -0.5, 1.0)],
            0.0,
        )
        .unwrap();
        let r = analytic_admissibility(&net, &tol());
        assert!(!r.admissible);
        assert_eq!(r.violations, vec![Violation::NegativeDuplicate { first: 0, second: 1 }]);
        // A rescaled copy is a different analytic neuron.
        let net = ShallowNet::new(
            Activation::Sigmoid,
            1,
            vec![Neuron::new(vec![1.0], 0.5, 1.0), Neuron::new(vec![2.0], 1.0, 1.0)],
            0.0,
        )
        .unwrap();
        assert!(analytic_admissibility(&net, &tol()).admissible);
    }

    #[test]
    fn json_round_trip() {
        let net = ShallowNet::new(
            Activation::Relu,
            2,
            vec![Neuron::new(vec![0.1, 1.0 / 3.0], -2.5e-17, std::f64::consts::PI)],
            -0.0,
        )
        .unwrap();
        let back = ShallowNet::from_json(&net.to_json()).unwrap();
        assert_eq!(back, net);
        assert_eq!(ShallowNet::from_json(&two_ridges().to_json()).unwrap(), two_ridges());
    }

    #[test]
    fn json_errors() {
        let missing = r#"{"d":1,"neurons":[],"c":0}"#;
        let e = ShallowNet::from_json(missing).unwrap_err();
        assert!(e.is_parse());
        assert!(e.to_string().contains("activation"));
        let wrong = r#"{"activation":"relu","d":2,"neurons":[{"a":[1,0],"b":0,"s":1},{"a":[1],"b":0,"s":1}],"c":0}"#;
        let e = ShallowNet::from_json(wrong).unwrap_err();
        assert!(matches!(e, Error::Parse { ref location, .. } if location.contains("neurons[1]")));
        assert!(
            ShallowNet::from_json(r#"{"activation":"gelu","d":1,"neurons":[],"c":0}"#)
                .unwrap_err()
                .is_parse()
        );
    }
}
