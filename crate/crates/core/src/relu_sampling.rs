//! Feasible line collections, the `(2m+2)·m·d` sample plan, and exact
//! reconstruction of ReLU networks from samples on that plan.
//!
//! Along a line `u + t·v` a ReLU network is piecewise affine in `t` with a
//! kink at each hyperplane crossing. Two samples per piece pin down every
//! piece, consecutive pieces give the crossings, `d` crossings on `d` lines
//! give a hyperplane, and the output weights follow by least squares.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{from_json_str, to_json_string, Activation, GroupedReLU, Hyperplane, Neuron, ShallowNet};
use crate::numerics::{affine_fit, dot, matrix_from_rows, norm, rank, solve_least_squares, ToleranceConfig};

/// Retry budget for every seeded construction in this module.
pub const RETRY_BUDGET: usize = 1000;
/// Largest `m` for which all `2^m` orientations are tried.
pub const MAX_ORIENTATION_M: usize = 20;

/// Lines with `|<a, v>| / ||v||` below this are redrawn: the crossing would
/// be badly conditioned.
const MIN_CROSSING_COSINE: f64 = 0.05;
/// Minimal spacing of crossings along one line, relative to `1 + max |t|`.
const MIN_CROSSING_GAP: f64 = 1e-2;
const MIN_DIRECTION_NORM: f64 = 0.25;
/// Above this many `d`-subsets per hyperplane the span check samples subsets.
const MAX_EXHAUSTIVE_SUBSETS: usize = 20_000;
/// Mixed into the seed for sample jitter so it is independent of the lines.
const JITTER_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// The line `{u + t·v : t ∈ ℝ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Line {
    pub fn point(&self, t: f64) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(u, v)| u + t * v).collect()
    }

    /// Parameter where the line meets `h`, if it is not parallel to it.
    pub fn crossing(&self, h: &Hyperplane) -> Option<f64> {
        let av = dot(&h.a, &self.v);
        (av != 0.0).then(|| -(dot(&h.a, &self.u) + h.b) / av)
    }
}

/// A crossing of a line with hyperplane number `hyperplane`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub hyperplane: usize,
}

/// `m·d` lines feasible for a set of `m` hyperplanes.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleLineSet {
    pub hyperplanes: Vec<Hyperplane>,
    pub lines: Vec<Line>,
    /// Per line, the crossings sorted by parameter.
    pub crossings: Vec<Vec<Crossing>>,
}

impl FeasibleLineSet {
    /// Crossing point of line `j` with hyperplane `k`.
    pub fn crossing_point(&self, j: usize, k: usize) -> Vec<f64> {
        let c = self.crossings[j]
            .iter()
            .find(|c| c.hyperplane == k)
            .expect("every line crosses every hyperplane");
        self.lines[j].point(c.t)
    }
}

/// Lines plus `2m+2` increasing parameters per line, two per affine piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub lines: Vec<Line>,
    pub params: Vec<Vec<f64>>,
}

impl SamplePlan {
    /// The `m` the plan was built for.
    pub fn m(&self) -> usize {
        self.params.first().map(|p| p.len() / 2 - 1).unwrap_or(0)
    }

    pub fn d(&self) -> usize {
        self.lines.first().map(|l| l.u.len()).unwrap_or(0)
    }

    pub fn point_count(&self) -> usize {
        self.params.iter().map(Vec::len).sum()
    }

    /// All sample points, line by line.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.lines
            .iter()
            .zip(&self.params)
            .flat_map(|(l, ts)| ts.iter().map(move |&t| l.point(t)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |loc: String, msg: String| Err(Error::parse(loc, msg));
        if self.lines.is_empty() {
            return fail("plan.lines".into(), "no lines".into());
        }
        if self.params.len() != self.lines.len() {
            return fail(
                "plan.params".into(),
                format!("{} parameter lists for {} lines", self.params.len(), self.lines.len()),
            );
        }
        let d = self.d();
        if d == 0 {
            return fail("plan.lines[0].u".into(), "empty base point".into());
        }
        let per_line = self.params[0].len();
        for (j, (l, ts)) in self.lines.iter().zip(&self.params).enumerate() {
            if l.u.len() != d || l.v.len() != d {
                return fail(format!("plan.lines[{j}]"), format!("expected vectors of length {d}"));
            }
            if norm(&l.v) == 0.0 {
                return fail(format!("plan.lines[{j}].v"), "zero direction".into());
            }
            if ts.len() != per_line || ts.len() < 2 || ts.len() % 2 != 0 {
                return fail(
                    format!("plan.params[{j}]"),
                    format!("expected {per_line} parameters (an even number >= 2), got {}", ts.len()),
                );
            }
            if ts
                .windows(2)
                .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
            {
                return fail(
                    format!("plan.params[{j}]"),
                    "parameters are not strictly increasing".into(),
                );
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: SamplePlan = from_json_str(text, "plan")?;
        plan.validate()?;
        Ok(plan)
    }
}

/// Function values on the points of a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSamples {
    #[serde(rename = "plan_ref")]
    pub plan: SamplePlan,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl LabeledSamples {
    /// Evaluates `net` on every point of `plan`.
    pub fn from_net(net: &ShallowNet, plan: &SamplePlan) -> Result<Self> {
        plan.validate()?;
        if plan.d() != net.d {
            return Err(Error::Input(format!(
                "plan dimension {} does not match network dimension {}",
                plan.d(),
                net.d
            )));
        }
        let points = plan.points();
        let values = points.iter().map(|x| net.eval(x)).collect();
        Ok(Self {
            plan: plan.clone(),
            points,
            values,
        })
    }

    pub fn validate(&self, tol: &ToleranceConfig) -> Result<()> {
        self.plan.validate()?;
        let n = self.plan.point_count();
        if self.values.len() != n {
            return Err(Error::parse(
                "samples.values",
                format!("expected {n} values, got {}", self.values.len()),
            ));
        }
        if self.points.len() != n {
            return Err(Error::parse(
                "samples.points",
                format!("expected {n} points, got {}", self.points.len()),
            ));
        }
        for (i, (p, q)) in self.points.iter().zip(self.plan.points()).enumerate() {
            let scale = 1.0 + norm(&q);
            if p.len() != q.len() || p.iter().zip(&q).any(|(x, y)| (x - y).abs() > tol.match_tol * scale) {
                return Err(Error::Input(format!("samples.points[{i}] does not lie on the plan")));
            }
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite sample value".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: LabeledSamples = from_json_str(text, "samples")?;
        s.plan.validate()?;
        Ok(s)
    }
}

fn uniform_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

fn distinct_hyperplanes(g: &GroupedReLU, tol: &ToleranceConfig) -> Result<Vec<Hyperplane>> {
    if !g.k1.is_empty() {
        return Err(Error::Hypothesis(format!(
            "sampling needs mutually distinct hyperplanes, but {} hyperplane(s) carry two neurons",
            g.k1.len()
        )));
    }
    Ok(g.hyperplanes(tol))
}

/// Draws one candidate line and its sorted crossings, or `None` when the
/// crossings are badly conditioned.
fn draw_line(rng: &mut ChaCha8Rng, hs: &[Hyperplane]) -> Option<(Line, Vec<Crossing>)> {
    let d = hs[0].d();
    let line = Line {
        u: uniform_vec(rng, d),
        v: uniform_vec(rng, d),
    };
    let vn = norm(&line.v);
    if vn < MIN_DIRECTION_NORM {
        return None;
    }
    let mut crossings = Vec::with_capacity(hs.len());
    for (k, h) in hs.iter().enumerate() {
        if dot(&h.a, &line.v).abs() < MIN_CROSSING_COSINE * vn {
            return None;
        }
        crossings.push(Crossing {
            t: line.crossing(h)?,
            hyperplane: k,
        });
    }
    crossings.sort_by(|x, y| x.t.total_cmp(&y.t));
    let span = 1.0 + crossings.iter().map(|c| c.t.abs()).fold(0.0, f64::max);
    if crossings.windows(2).any(|w| w[1].t - w[0].t < MIN_CROSSING_GAP * span) {
        return None;
    }
    Some((line, crossings))
}

/// Every `d`-subset of one hyperplane's crossing points must affinely span it.
fn spans_every_subset(points: &[Vec<f64>], d: usize, rng: &mut ChaCha8Rng, tol: &ToleranceConfig) -> Result<bool> {
    if d == 1 {
        return Ok(true);
    }
    let check = |subset: &[usize]| -> Result<bool> {
        let base = &points[subset[0]];
        let rows: Vec<Vec<f64>> = subset[1..]
            .iter()
            .map(|&i| points[i].iter().zip(base).map(|(x, y)| x - y).collect())
            .collect();
        Ok(rank(&matrix_from_rows(&rows)?, tol)? == d - 1)
    };
    let n = points.len();
    let total = binomial(n, d);
    if total <= MAX_EXHAUSTIVE_SUBSETS as u128 {
        for subset in (0..n).combinations(d) {
            if !check(&subset)? {
                return Ok(false);
            }
        }
    } else {
        for _ in 0..MAX_EXHAUSTIVE_SUBSETS {
            let subset = rand::seq::index::sample(rng, n, d).into_vec();
            if !check(&subset)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Draws `m·d` lines feasible for the hyperplanes of `g`.
///
/// Conditions checked: the directions span `ℝ^d`; all crossing points are
/// distinct; every `d` crossing points on one hyperplane affinely span it
/// (exhaustively up to 20 000 subsets per hyperplane, by seeded sampling
/// above). Lines with near-parallel or crowded crossings are redrawn, and a
/// dry-run hyperplane recovery on the exact crossings must succeed.
pub fn build_feasible_lines(g: &GroupedReLU, seed: u64, tol: &ToleranceConfig) -> Result<FeasibleLineSet> {
    let hs = distinct_hyperplanes(g, tol)?;
    let d = g.d;
    let m = hs.len();
    if d < 2 {
        return Err(Error::Input("feasible lines need d >= 2".into()));
    }
    if m == 0 {
        return Err(Error::Input("feasible lines need at least one neuron".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RETRY_BUDGET {
        let mut lines = Vec::with_capacity(m * d);
        let mut crossings = Vec::with_capacity(m * d);
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(m * m * d);
        while lines.len() < m * d {
            let mut accepted = false;
            for _ in 0..RETRY_BUDGET {
                let Some((line, cr)) = draw_line(&mut rng, &hs) else {
                    continue;
                };
                let new_points: Vec<Vec<f64>> = cr.iter().map(|c| line.point(c.t)).collect();
                let clash = new_points.iter().any(|p| {
                    points.iter().any(|q| {
                        let gap = p.iter().zip(q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                        gap <= tol.match_tol * (1.0 + norm(p).max(norm(q)))
                    })
                });
                if clash {
                    continue;
                }
                points.extend(new_points);
                lines.push(line);
                crossings.push(cr);
                accepted = true;
                break;
            }
            if !accepted {
                return Err(Error::Construction(format!(
                    "no well-conditioned line found after {RETRY_BUDGET} draws"
                )));
            }
        }
        let set = FeasibleLineSet {
            hyperplanes: hs.clone(),
            lines,
            crossings,
        };
        let dirs: Vec<Vec<f64>> = set.lines.iter().map(|l| l.v.clone()).collect();
        if rank(&matrix_from_rows(&dirs)?, tol)? != d {
            continue;
        }
        let mut spans = true;
        for k in 0..m {
            let pts: Vec<Vec<f64>> = (0..m * d).map(|j| set.crossing_point(j, k)).collect();
            if !spans_every_subset(&pts, d, &mut rng, tol)? {
                spans = false;
                break;
            }
        }
        if !spans {
            continue;
        }
        let grouped: Vec<Vec<Vec<f64>>> = (0..m * d)
            .map(|j| set.crossings[j].iter().map(|c| set.lines[j].point(c.t)).collect())
            .collect();
        match recover_hyperplanes(&grouped, tol) {
            Ok(found) if found.len() == m && found.iter().all(|h| hs.iter().any(|t| t.approx_eq(h, tol))) => {
                return Ok(set)
            }
            _ => continue,
        }
    }
    Err(Error::Construction(format!(
        "no feasible line set found after {RETRY_BUDGET} attempts"
    )))
}

/// Three points that are collinear but not on one plan line.
fn stray_collinear_triple(points: &[Vec<f64>], line_of: &[usize], tol: &ToleranceConfig) -> bool {
    let n = points.len();
    let diff = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(x, y)| x - y).collect() };
    for i in 0..n {
        for j in (i + 1)..n {
            let e1 = diff(&points[j], &points[i]);
            let n1 = dot(&e1, &e1);
            for k in (j + 1)..n {
                if line_of[i] == line_of[j] && line_of[j] == line_of[k] {
                    continue;
                }
                let e2 = diff(&points[k], &points[i]);
                let n2 = dot(&e2, &e2);
                let cross = dot(&e1, &e2);
                // Gram determinant = (|e1||e2| sin θ)^2.
                if n1 * n2 - cross * cross <= tol.match_tol * tol.match_tol * n1 * n2 {
                    return true;
                }
            }
        }
    }
    false
}

/// Places `2m+2` parameters on every line, two in each open interval between
/// consecutive crossings: at `1/3` and `2/3` of interior intervals and at
/// `w_1-2, w_1-1, w_m+1, w_m+2` outside, each with seeded jitter. The jitter is
/// redrawn until no three points off a common plan line are collinear.
pub fn build_sample_plan(
    g: &GroupedReLU,
    ls: &FeasibleLineSet,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<SamplePlan> {
    let m = distinct_hyperplanes(g, tol)?.len();
    if ls.hyperplanes.len() != m || ls.lines.len() != m * g.d || ls.crossings.iter().any(|c| c.len() != m) {
        return Err(Error::Input("line set does not match the network".into()));
    }
    let base: Vec<Vec<(f64, f64)>> = ls
        .crossings
        .iter()
        .map(|cr| {
            let w: Vec<f64> = cr.iter().map(|c| c.t).collect();
            let mut ps = vec![(w[0] - 2.0, 0.1), (w[0] - 1.0, 0.1)];
            for pair in w.windows(2) {
                let len = pair[1] - pair[0];
                ps.push((pair[0] + len / 3.0, 0.05 * len));
                ps.push((pair[0] + 2.0 * len / 3.0, 0.05 * len));
            }
            ps.push((w[m - 1] + 1.0, 0.1));
            ps.push((w[m - 1] + 2.0, 0.1));
            ps
        })
        .collect();
    let line_of: Vec<usize> = (0..ls.lines.len())
        .flat_map(|j| std::iter::repeat_n(j, 2 * m + 2))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ JITTER_STREAM);
    for _ in 0..RETRY_BUDGET {
        let params: Vec<Vec<f64>> = base
            .iter()
            .map(|ps| ps.iter().map(|&(t, r)| t + rng.gen_range(-r..=r)).collect())
            .collect();
        let plan = SamplePlan {
            lines: ls.lines.clone(),
            params,
        };
        if !stray_collinear_triple(&plan.points(), &line_of, tol) {
            return Ok(plan);
        }
    }
    Err(Error::Construction(format!(
        "collinearity condition not met after {RETRY_BUDGET} jitter draws"
    )))
}

/// Affine pieces and breakpoints of a piecewise affine function sampled twice
/// per piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoints {
    pub breakpoints: Vec<f64>,
    /// `(slope, intercept)` per piece after merging equal neighbours.
    pub pieces: Vec<(f64, f64)>,
}

/// Fits consecutive sample pairs to affine pieces and intersects neighbours
/// whose slopes differ by more than `match_tol` (relative).
pub fn extract_breakpoints(params: &[f64], values: &[f64], tol: &ToleranceConfig) -> Result<Breakpoints> {
    if params.len() != values.len() {
        return Err(Error::Input(format!(
            "{} parameters but {} values",
            params.len(),
            values.len()
        )));
    }
    if params.len() < 2 || !params.len().is_multiple_of(2) {
        return Err(Error::Input(format!("expected 2m+2 parameters, got {}", params.len())));
    }
    if params
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::Input("parameters are not strictly increasing".into()));
    }
    let raw: Vec<(f64, f64)> = params
        .chunks(2)
        .zip(values.chunks(2))
        .map(|(t, y)| {
            let p = (y[1] - y[0]) / (t[1] - t[0]);
            (p, y[0] - p * t[0])
        })
        .collect();
    let mut pieces = vec![raw[0]];
    let mut breakpoints = Vec::new();
    for &(p, q) in &raw[1..] {
        let (p0, q0) = *pieces.last().unwrap();
        if (p - p0).abs() <= tol.match_tol * (1.0 + p.abs() + p0.abs()) {
            continue;
        }
        breakpoints.push((q0 - q) / (p - p0));
        pieces.push((p, q));
    }
    Ok(Breakpoints { breakpoints, pieces })
}

/// Recovers the `m` hyperplanes from `m` crossing points on each of `m·d`
/// lines.
///
/// Candidates are fit through one crossing on each of `d` lines (line
/// subsets in lexicographic order, starting with the first `d` lines). A
/// candidate is kept when it passes within a loose tolerance of exactly one
/// crossing per line; it is then refit through all of those points and must
/// pass within `match_tol`. Stops once `m` hyperplanes are found; the result
/// is sorted canonically.
pub fn recover_hyperplanes(crossing_points: &[Vec<Vec<f64>>], tol: &ToleranceConfig) -> Result<Vec<Hyperplane>> {
    let lines = crossing_points.len();
    let m = crossing_points.first().map(Vec::len).unwrap_or(0);
    if crossing_points.iter().any(|c| c.len() != m) {
        return Err(Error::Input(
            "every line must contribute the same number of crossings".into(),
        ));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let d = crossing_points[0][0].len();
    if crossing_points.iter().flatten().any(|p| p.len() != d) {
        return Err(Error::Input("crossing points of mixed dimension".into()));
    }
    if lines < d {
        return Err(Error::Input(format!("need at least d = {d} lines, got {lines}")));
    }
    let loose = 100.0 * tol.match_tol;
    let hits = |h: &Hyperplane, slack: f64| -> Option<Vec<Vec<f64>>> {
        let mut chosen = Vec::with_capacity(lines);
        for pts in crossing_points {
            let mut on: Vec<&Vec<f64>> = pts
                .iter()
                .filter(|p| h.signed_distance(p).abs() <= slack * (1.0 + norm(p)))
                .collect();
            if on.len() != 1 {
                return None;
            }
            chosen.push(on.pop().unwrap().clone());
        }
        Some(chosen)
    };

    let mut found: Vec<Hyperplane> = Vec::new();
    'search: for subset in (0..lines).combinations(d) {
        for choice in (0..d).map(|_| 0..m).multi_cartesian_product() {
            let pts: Vec<Vec<f64>> = subset
                .iter()
                .zip(&choice)
                .map(|(&j, &i)| crossing_points[j][i].clone())
                .collect();
            let Ok(fit) = affine_fit(&pts, tol) else { continue };
            if found.iter().any(|h| h.approx_eq(&fit.hyperplane, tol)) {
                continue;
            }
            let Some(all) = hits(&fit.hyperplane, loose) else {
                continue;
            };
            let Ok(refit) = affine_fit(&all, tol) else { continue };
            if hits(&refit.hyperplane, tol.match_tol).is_none() {
                continue;
            }
            if !found.iter().any(|h| h.approx_eq(&refit.hyperplane, tol)) {
                found.push(refit.hyperplane);
            }
            if found.len() == m {
                break 'search;
            }
        }
    }
    if found.len() != m {
        return Err(Error::Recovery {
            expected: m,
            found: found.len(),
        });
    }
    found.sort_by(|x, y| x.total_cmp(y));
    Ok(found)
}

/// Reconstructs a ReLU network from samples on a plan.
///
/// The neuron count is the number of breakpoints, which must agree across
/// lines. All `2^m` orientations of the recovered hyperplanes are tried in
/// order; the first whose least-squares fit of `(s, c)` leaves a residual
/// within `residual_tol·(1 + ||y||)` is returned.
pub fn reconstruct(data: &LabeledSamples, tol: &ToleranceConfig) -> Result<ShallowNet> {
    data.validate(tol)?;
    let plan = &data.plan;
    let d = plan.d();
    let mut offset = 0;
    let mut per_line = Vec::with_capacity(plan.lines.len());
    for ts in &plan.params {
        let ys = &data.values[offset..offset + ts.len()];
        offset += ts.len();
        per_line.push(extract_breakpoints(ts, ys, tol)?);
    }
    let m = per_line.iter().map(|b| b.breakpoints.len()).max().unwrap_or(0);
    if let Some(j) = per_line.iter().position(|b| b.breakpoints.len() != m) {
        return Err(Error::Reconstruction(format!(
            "line {j} shows {} breakpoints while another shows {m}",
            per_line[j].breakpoints.len()
        )));
    }
    let y = DVector::from_column_slice(&data.values);
    let y_scale = 1.0 + y.norm();
    if m == 0 {
        let c = data.values.iter().sum::<f64>() / data.values.len() as f64;
        let resid = data.values.iter().map(|v| (v - c).powi(2)).sum::<f64>().sqrt();
        if resid > tol.residual_tol * y_scale {
            return Err(Error::Reconstruction(
                "no breakpoints found but the samples are not constant".into(),
            ));
        }
        return Ok(ShallowNet {
            activation: Activation::Relu,
            d,
            neurons: Vec::new(),
            c,
        });
    }
    if m > MAX_ORIENTATION_M {
        return Err(Error::Size(format!(
            "orientation search is limited to m <= {MAX_ORIENTATION_M}, detected m = {m}"
        )));
    }
    if plan.lines.len() < m * d {
        return Err(Error::Reconstruction(format!(
            "{m} hyperplanes in dimension {d} need {} lines, plan has {}",
            m * d,
            plan.lines.len()
        )));
    }
    let crossing_points: Vec<Vec<Vec<f64>>> = plan
        .lines
        .iter()
        .zip(&per_line)
        .map(|(l, b)| b.breakpoints.iter().map(|&t| l.point(t)).collect())
        .collect();
    let hs = recover_hyperplanes(&crossing_points, tol)?;

    let n = data.points.len();
    let pre: Vec<Vec<f64>> = data
        .points
        .iter()
        .map(|x| hs.iter().map(|h| h.signed_distance(x)).collect())
        .collect();
    for mask in 0..1u64 << m {
        let eps: Vec<f64> = (0..m).map(|k| if mask >> k & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let a = DMatrix::from_fn(
            n,
            m + 1,
            |i, k| if k == m { 1.0 } else { (eps[k] * pre[i][k]).max(0.0) },
        );
        let (z, resid) = solve_least_squares(&a, &y, tol)?;
        if resid > tol.residual_tol * y_scale {
            continue;
        }
        let s_scale = 1.0 + z.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if z.iter().take(m).any(|s| s.abs() <= tol.zero_tol * s_scale) {
            continue;
        }
        let neurons = hs
            .iter()
            .zip(&eps)
            .zip(z.iter())
            .map(|((h, &e), &s)| Neuron::new(h.a.iter().map(|v| e * v).collect(), e * h.b, s))
            .collect();
        return Ok(ShallowNet {
            activation: Activation::Relu,
            d,
            neurons,
            c: z[m],
        });
    }
    Err(Error::Reconstruction(format!(
        "no orientation of the {m} recovered hyperplanes fits the samples"
    )))
}

/// Builds lines and plan for an irreducible network with distinct
/// hyperplanes. Lines use `seed`, jitter a stream derived from it.
pub fn plan_for(net: &ShallowNet, seed: u64, tol: &ToleranceConfig) -> Result<SamplePlan> {
    let g = crate::net::group(net, tol)?;
    let ls = build_feasible_lines(&g, seed, tol)?;
    build_sample_plan(&g, &ls, seed, tol)
}
