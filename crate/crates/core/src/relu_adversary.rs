//! Pairs of irreducible ReLU networks that agree on a given finite point set
//! but differ elsewhere.
//!
//! Pick a hyperplane `<w, x> + b = 0` missing every input point and a unit
//! `n ⊥ w`. The two neurons `σ(<w ± ε n, x> + b)` sum to `2(<w,x> + b)` or to
//! `0` at every input point as long as `ε |<n, x_j>| < |<w, x_j> + b|`, so
//! changing `ε` is invisible there. On the hyperplane itself they sum to
//! `ε <n, x>`, which is visible at `x0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{from_json_str, to_json_string, Activation, Hyperplane, Neuron, ShallowNet};
use crate::numerics::{dot, norm, ToleranceConfig};
use crate::relu_sampling::RETRY_BUDGET;

/// Candidate hyperplanes drawn per attempt; the one with the widest margin wins.
const CANDIDATES_PER_ATTEMPT: usize = 64;
/// `ε` below this multiple of `match_tol` would make the two hyperplanes of a
/// pair indistinguishable.
const MIN_EPS_FACTOR: f64 = 1e3;

/// Construction parameters of an [`AdversarialPair`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryParams {
    pub w: Vec<f64>,
    pub b: f64,
    pub n: Vec<f64>,
    pub eps: f64,
    pub eps_prime: f64,
    pub extra_neurons: Vec<Neuron>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialPair {
    pub net1: ShallowNet,
    pub net2: ShallowNet,
    pub witness: Vec<f64>,
    pub params: AdversaryParams,
}

impl AdversarialPair {
    /// `max_j |net1(x_j) - net2(x_j)|`.
    pub fn agreement_gap(&self, points: &[Vec<f64>]) -> f64 {
        points
            .iter()
            .map(|x| (self.net1.eval(x) - self.net2.eval(x)).abs())
            .fold(0.0, f64::max)
    }

    /// `|net1(x0) - net2(x0)|`.
    pub fn witness_gap(&self) -> f64 {
        (self.net1.eval(&self.witness) - self.net2.eval(&self.witness)).abs()
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        from_json_str(text, "pair")
    }
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let r = norm(&v);
        if r > 0.1 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

fn margin(points: &[Vec<f64>], w: &[f64], b: f64) -> f64 {
    points
        .iter()
        .map(|x| (dot(w, x) + b).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Builds two non-equivalent irreducible `m`-neuron networks that agree on
/// every point of `points`.
///
/// `(w, b)` is the best of 64 draws by margin `min_j |<w, x_j> + b|`, with
/// `w` a unit vector. Then `ε' = ½·margin / max_j |<n, x_j>|` (or 1 when every
/// `<n, x_j>` vanishes) and `ε = ε'/2`. The `m - 2` extra neurons have unit
/// directions, offsets in `[-1, 1]`, and hyperplanes distinct from all others.
pub fn build_pair(points: &[Vec<f64>], m: usize, seed: u64, tol: &ToleranceConfig) -> Result<AdversarialPair> {
    let d = points.first().map(Vec::len).unwrap_or(0);
    if points.is_empty() {
        return Err(Error::Input("point set is empty".into()));
    }
    if let Some(i) = points.iter().position(|p| p.len() != d) {
        return Err(Error::Input(format!(
            "point {i} has dimension {}, expected {d}",
            points[i].len()
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("point set contains non-finite coordinates".into()));
    }
    if d < 2 {
        return Err(Error::Input("adversarial pairs need d >= 2".into()));
    }
    if m < 2 {
        return Err(Error::Input("adversarial pairs need m >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = points.iter().map(|x| norm(x)).fold(0.0, f64::max) + 1.0;

    for _ in 0..RETRY_BUDGET {
        let (w, b, gap) = (0..CANDIDATES_PER_ATTEMPT)
            .map(|_| {
                let w = unit_vector(&mut rng, d);
                let b = rng.gen_range(-reach..=reach);
                let gap = margin(points, &w, b);
                (w, b, gap)
            })
            .max_by(|x, y| x.2.total_cmp(&y.2))
            .expect("at least one candidate");
        if gap <= tol.zero_tol {
            continue;
        }
        let r = unit_vector(&mut rng, d);
        let mut n: Vec<f64> = r.iter().zip(&w).map(|(ri, wi)| ri - dot(&r, &w) * wi).collect();
        let nn = norm(&n);
        if nn < 0.1 {
            continue;
        }
        n.iter_mut().for_each(|v| *v /= nn);
        let spread = points.iter().map(|x| dot(&n, x).abs()).fold(0.0, f64::max);
        let eps_prime = if spread <= tol.zero_tol {
            1.0
        } else {
            0.5 * gap / spread.max(tol.zero_tol)
        };
        let eps = eps_prime / 2.0;
        if eps < MIN_EPS_FACTOR * tol.match_tol {
            continue;
        }

        let pair_neurons = |e: f64| -> [Neuron; 2] {
            [
                Neuron::new(w.iter().zip(&n).map(|(wi, ni)| wi + e * ni).collect(), b, 1.0),
                Neuron::new(w.iter().zip(&n).map(|(wi, ni)| wi - e * ni).collect(), b, 1.0),
            ]
        };
        let mut taken: Vec<Hyperplane> = pair_neurons(eps)
            .iter()
            .chain(pair_neurons(eps_prime).iter())
            .map(|nr| {
                Hyperplane::from_affine(&nr.a, nr.b, tol)
                    .expect("nonzero direction")
                    .hyperplane
            })
            .collect();
        let separation = ToleranceConfig {
            match_tol: MIN_EPS_FACTOR * tol.match_tol,
            ..*tol
        };
        let mut extras = Vec::with_capacity(m - 2);
        let mut draws = 0;
        while extras.len() < m - 2 && draws < RETRY_BUDGET {
            draws += 1;
            let a = unit_vector(&mut rng, d);
            let bb = rng.gen_range(-1.0..=1.0);
            let h = Hyperplane::from_affine(&a, bb, tol).expect("unit direction").hyperplane;
            if taken.iter().any(|t| t.approx_eq(&h, &separation)) {
                continue;
            }
            taken.push(h);
            extras.push(Neuron::new(a, bb, 1.0));
        }
        if extras.len() < m - 2 {
            continue;
        }
        let build = |e: f64| -> ShallowNet {
            let mut neurons = pair_neurons(e).to_vec();
            neurons.extend(extras.iter().cloned());
            ShallowNet {
                activation: Activation::Relu,
                d,
                neurons,
                c: 0.0,
            }
        };
        let ww = dot(&w, &w);
        let witness: Vec<f64> = w.iter().zip(&n).map(|(wi, ni)| -b * wi / ww + ni).collect();
        return Ok(AdversarialPair {
            net1: build(eps),
            net2: build(eps_prime),
            witness,
            params: AdversaryParams {
                w,
                b,
                n,
                eps,
                eps_prime,
                extra_neurons: extras,
            },
        });
    }
    Err(Error::Construction(format!(
        "no separating hyperplane with a usable margin after {RETRY_BUDGET} attempts"
    )))
}
