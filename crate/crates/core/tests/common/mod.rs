#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shallow_ident::{Activation, Neuron, ShallowNet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 0.2 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

fn signed_scale(rng: &mut ChaCha8Rng) -> f64 {
    let s = rng.gen_range(0.5..2.0);
    if rng.gen_bool(0.5) {
        s
    } else {
        -s
    }
}

/// ReLU net with `m` neurons on generic, pairwise distinct hyperplanes.
pub fn random_generic_relu(rng: &mut ChaCha8Rng, d: usize, m: usize) -> ShallowNet {
    let neurons = (0..m)
        .map(|_| {
            let r = rng.gen_range(0.5..2.0);
            let a: Vec<f64> = unit(rng, d).iter().map(|v| v * r).collect();
            Neuron::new(a, rng.gen_range(-1.0..1.0), signed_scale(rng))
        })
        .collect();
    ShallowNet::new(Activation::Relu, d, neurons, rng.gen_range(-1.0..1.0)).unwrap()
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize, r: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(-r..r)).collect()).collect()
}

/// Analytic net with parameters in `[-2, 2]`.
pub fn random_analytic(rng: &mut ChaCha8Rng, act: Activation, d: usize, m: usize) -> ShallowNet {
    let neurons = (0..m)
        .map(|_| {
            let a = loop {
                let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
                if a.iter().map(|v| v.abs()).fold(0.0, f64::max) > 0.3 {
                    break a;
                }
            };
            let s = loop {
                let s: f64 = rng.gen_range(-2.0..2.0);
                if s.abs() > 0.3 {
                    break s;
                }
            };
            Neuron::new(a, rng.gen_range(-2.0..2.0), s)
        })
        .collect();
    ShallowNet::new(act, d, neurons, rng.gen_range(-2.0..2.0)).unwrap()
}

/// Small integer ReLU nets in the plane whose neurons share a few
/// hyperplanes, so that pairs, cancellations and parallel terms are common.
pub fn random_degenerate_relu(rng: &mut ChaCha8Rng, m: usize) -> ShallowNet {
    const DIRS: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    const OFFSETS: [f64; 2] = [0.0, 1.0];
    loop {
        let mut neurons: Vec<Neuron> = Vec::with_capacity(m);
        for _ in 0..m {
            let lambda = [1.0, 1.0, 2.0][rng.gen_range(0..3)];
            let s = [-1.0, 1.0][rng.gen_range(0..2)];
            // Often put the neuron on an earlier hyperplane, opposite orientation.
            let (dir, off) = if !neurons.is_empty() && rng.gen_bool(0.4) {
                let prev = &neurons[rng.gen_range(0..neurons.len())];
                (vec![-prev.a[0], -prev.a[1]], -prev.b)
            } else {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let dir = DIRS[rng.gen_range(0..DIRS.len())];
                (
                    vec![sign * dir[0], sign * dir[1]],
                    sign * OFFSETS[rng.gen_range(0..OFFSETS.len())],
                )
            };
            neurons.push(Neuron::new(dir.iter().map(|v| lambda * v).collect(), lambda * off, s));
        }
        let net = ShallowNet::new(Activation::Relu, 2, neurons, 0.0).unwrap();
        if shallow_ident::relu_structure::check_admissible(&net, &Default::default()).admissible {
            return net;
        }
    }
}

/// Exhaustive minimal neuron count of a ReLU net's function, found by
/// rewriting the raw neurons and checking the rewrite on a grid.
///
/// Every neuron is written as `λ·σ(±u_H)` for a unit normal `u_H` of its
/// hyperplane. With `σ(-u) = σ(u) - u` the function becomes
/// `Σ_H C_H σ(u_H) + <w, x> + β`. Hyperplanes with `C_H ≠ 0` need a neuron
/// each; choosing which of them to realize flipped changes `w`. The count is
/// `#{C_H ≠ 0}` plus 0, 1 or 2 for the leftover linear part. Every candidate
/// is rebuilt as a network and compared with the input on a grid.
pub fn brute_force_minimal_count(net: &ShallowNet) -> usize {
    assert_eq!(net.d, 2);
    struct Plane {
        n: [f64; 2],
        beta: f64,
        coef: f64,
    }
    let mut planes: Vec<Plane> = Vec::new();
    let mut w = [0.0, 0.0];
    for nr in &net.neurons {
        let r = (nr.a[0] * nr.a[0] + nr.a[1] * nr.a[1]).sqrt();
        let mut n = [nr.a[0] / r, nr.a[1] / r];
        let mut beta = nr.b / r;
        let mut sign = 1.0;
        if n[0] < -1e-12 || (n[0].abs() <= 1e-12 && n[1] < 0.0) {
            n = [-n[0], -n[1]];
            beta = -beta;
            sign = -1.0;
        }
        let weight = nr.s * r;
        if sign < 0.0 {
            // weight·σ(-u) = weight·σ(u) - weight·u
            w[0] -= weight * n[0];
            w[1] -= weight * n[1];
        }
        let hit = planes
            .iter_mut()
            .find(|p| (p.n[0] - n[0]).abs() < 1e-9 && (p.n[1] - n[1]).abs() < 1e-9 && (p.beta - beta).abs() < 1e-9);
        match hit {
            Some(p) => p.coef += weight,
            None => planes.push(Plane { n, beta, coef: weight }),
        }
    }
    let active: Vec<&Plane> = planes.iter().filter(|p| p.coef.abs() > 1e-9).collect();
    let grid: Vec<[f64; 2]> = (0..31)
        .flat_map(|i| (0..31).map(move |j| [-3.0 + 0.2 * i as f64 + 0.003, -3.0 + 0.2 * j as f64 + 0.007]))
        .collect();
    let agrees = |cand: &[Neuron]| -> bool {
        let mut c = ShallowNet::new(Activation::Relu, 2, cand.to_vec(), 0.0).unwrap();
        let origin_gap = net.evaluate(&[0.0, 0.0]).unwrap() - c.evaluate(&[0.0, 0.0]).unwrap();
        c.c = origin_gap;
        grid.iter().all(|x| {
            let (p, q) = (net.evaluate(x).unwrap(), c.evaluate(x).unwrap());
            (p - q).abs() <= 1e-9 * (1.0 + p.abs())
        })
    };

    let mut best = usize::MAX;
    for mask in 0..1u32 << active.len() {
        let mut cand = Vec::new();
        let mut rem = w;
        for (i, p) in active.iter().enumerate() {
            if mask >> i & 1 == 1 {
                // C·σ(u) = C·σ(-u) + C·u
                cand.push(Neuron::new(vec![-p.n[0], -p.n[1]], -p.beta, p.coef));
                rem[0] += p.coef * p.n[0];
                rem[1] += p.coef * p.n[1];
            } else {
                cand.push(Neuron::new(p.n.to_vec(), p.beta, p.coef));
            }
        }
        let rn = (rem[0] * rem[0] + rem[1] * rem[1]).sqrt();
        let extra: Vec<Vec<Neuron>> = if rn <= 1e-9 {
            vec![vec![]]
        } else {
            // <rem, x> = rn·σ(<e, x>) - rn·σ(-<e, x>) with e = rem / rn, or with
            // one of the pair merged into an active hyperplane parallel to e.
            let e = [rem[0] / rn, rem[1] / rn];
            let mut options = vec![vec![
                Neuron::new(e.to_vec(), 0.0, rn),
                Neuron::new(vec![-e[0], -e[1]], 0.0, -rn),
            ]];
            for p in &active {
                let cross = p.n[0] * e[1] - p.n[1] * e[0];
                if cross.abs() <= 1e-9 {
                    let along = p.n[0] * e[0] + p.n[1] * e[1];
                    // rn·<e,x> = rn·along·(u_p - beta): ±σ pair on p, one of
                    // which merges with the term already there.
                    options.push(vec![
                        Neuron::new(p.n.to_vec(), p.beta, rn * along),
                        Neuron::new(vec![-p.n[0], -p.n[1]], -p.beta, -rn * along),
                    ]);
                }
            }
            options
        };
        for ex in extra {
            let mut full = cand.clone();
            full.extend(ex);
            let merged = merge_oriented(full);
            if merged.len() < best && agrees(&merged) {
                best = merged.len();
            }
        }
    }
    assert!(best != usize::MAX, "oracle found no representation");
    best
}

/// Merges neurons on the same oriented hyperplane and drops zero ones.
fn merge_oriented(neurons: Vec<Neuron>) -> Vec<Neuron> {
    let mut out: Vec<Neuron> = Vec::new();
    for n in neurons {
        match out
            .iter_mut()
            .find(|o| o.a.iter().zip(&n.a).all(|(x, y)| (x - y).abs() < 1e-9) && (o.b - n.b).abs() < 1e-9)
        {
            Some(o) => o.s += n.s,
            None => out.push(n),
        }
    }
    out.retain(|n| n.s.abs() > 1e-9);
    out
}

/// `max |f(x) - g(x)| / (1 + |f(x)|)` over `points`.
pub fn max_rel_gap(f: &ShallowNet, g: &ShallowNet, points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .map(|x| {
            let (p, q) = (f.evaluate(x).unwrap(), g.evaluate(x).unwrap());
            (p - q).abs() / (1.0 + p.abs())
        })
        .fold(0.0, f64::max)
}
