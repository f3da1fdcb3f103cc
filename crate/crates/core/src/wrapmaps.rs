//! Explicit maps from ℝⁿ onto spheres minus a small set, and numerical
//! estimates of their Lipschitz constants, Jacobians and asymptotic degree.
//!
//! All derivative-based quantities are sampled almost everywhere: points
//! whose difference stencil meets a seam of the piecewise definition are
//! skipped.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Central-difference step for numerical Jacobians.
pub const DIFF_STEP: f64 = 1e-5;
/// Ratio above which the quasiregularity estimate is reported as diverged.
pub const QR_DIVERGENCE: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("point {0:?} lies outside the domain")]
    OutOfDomain(Vec<f64>),
    #[error("expected a point of dimension {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("radii must be positive and increasing")]
    BadRadii,
    #[error("step must be positive")]
    BadStep,
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "dim", rename_all = "kebab-case")]
pub enum Target {
    Euclidean(usize),
    /// Unit sphere Sᵈ ⊂ ℝ^{d+1}.
    Sphere(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "map", rename_all = "kebab-case")]
pub enum EvaluableMap {
    Identity {
        n: usize,
    },
    Constant {
        n: usize,
    },
    /// x ↦ |x|^α x on ℝ².
    RadialStretch {
        alpha: f64,
    },
    /// Strip map [−1, 1] × [0, ∞) → punctured disk, in Cartesian form.
    F0,
    /// ℝ² → S² ∖ {poles}.
    SphereWrap,
    /// ℝᵈ → Sᵈ through the torus with its codimension-1 skeleton collapsed.
    TorusCollapse {
        d: usize,
    },
    /// ℝⁿ → Sⁿ ∖ Sⁿ⁻² via the join Sⁿ ≅ S¹ ∗ Sⁿ⁻².
    JoinMap {
        n: usize,
    },
}

impl EvaluableMap {
    pub fn name(&self) -> String {
        match self {
            EvaluableMap::Identity { n } => format!("identity({n})"),
            EvaluableMap::Constant { n } => format!("constant({n})"),
            EvaluableMap::RadialStretch { alpha } => format!("radial-stretch(α = {alpha})"),
            EvaluableMap::F0 => "f0".into(),
            EvaluableMap::SphereWrap => "sphere-wrap".into(),
            EvaluableMap::TorusCollapse { d } => format!("torus-collapse({d})"),
            EvaluableMap::JoinMap { n } => format!("join-map({n})"),
        }
    }

    pub fn domain_dim(&self) -> usize {
        match self {
            EvaluableMap::Identity { n } | EvaluableMap::Constant { n } | EvaluableMap::JoinMap { n } => *n,
            EvaluableMap::RadialStretch { .. } | EvaluableMap::F0 | EvaluableMap::SphereWrap => 2,
            EvaluableMap::TorusCollapse { d } => *d,
        }
    }

    pub fn target(&self) -> Target {
        match self {
            EvaluableMap::Identity { n } | EvaluableMap::Constant { n } => Target::Euclidean(*n),
            EvaluableMap::RadialStretch { .. } | EvaluableMap::F0 => Target::Euclidean(2),
            EvaluableMap::SphereWrap => Target::Sphere(2),
            EvaluableMap::TorusCollapse { d } => Target::Sphere(*d),
            EvaluableMap::JoinMap { n } => Target::Sphere(*n),
        }
    }

    pub fn validate(&self) -> Result<(), MapError> {
        match self {
            EvaluableMap::TorusCollapse { d } if *d == 0 => {
                Err(MapError::Unsupported("torus collapse needs d ≥ 1".into()))
            }
            EvaluableMap::JoinMap { n } if *n < 3 => Err(MapError::Unsupported("join map needs n ≥ 3".into())),
            EvaluableMap::Identity { n } | EvaluableMap::Constant { n } if *n == 0 => {
                Err(MapError::Unsupported("dimension must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>, MapError> {
        if p.len() != self.domain_dim() {
            return Err(MapError::Dimension {
                expected: self.domain_dim(),
                found: p.len(),
            });
        }
        Ok(match self {
            EvaluableMap::Identity { .. } => p.to_vec(),
            EvaluableMap::Constant { n } => vec![0.0; *n],
            EvaluableMap::RadialStretch { alpha } => {
                let s = (p[0] * p[0] + p[1] * p[1]).sqrt().powf(*alpha);
                vec![s * p[0], s * p[1]]
            }
            EvaluableMap::F0 => {
                let (r, t) = eval_f0(p[0], p[1])?;
                vec![r * t.cos(), r * t.sin()]
            }
            EvaluableMap::SphereWrap => eval_sphere_wrap(p[0], p[1]).to_vec(),
            EvaluableMap::TorusCollapse { .. } => eval_torus_collapse(p),
            EvaluableMap::JoinMap { n } => eval_fn(p[0], p[1], &p[2..], *n)?,
        })
    }

    /// True if a stencil of radius `margin` around `p` may cross a seam.
    pub fn near_seam(&self, p: &[f64], margin: f64) -> bool {
        let near_int = |t: f64| (t - t.round()).abs() <= margin;
        match self {
            EvaluableMap::Identity { .. } | EvaluableMap::Constant { .. } => false,
            EvaluableMap::RadialStretch { .. } => p[0].hypot(p[1]) <= margin,
            EvaluableMap::F0 => p[0].abs() <= margin || p[1] <= margin || p[0].abs() >= 1.0 - margin,
            EvaluableMap::SphereWrap => near_int(p[0]) || p[1].abs() <= margin,
            EvaluableMap::TorusCollapse { .. } => collapse_near_seam(p, margin),
            EvaluableMap::JoinMap { .. } => {
                near_int(p[0]) || p[1].abs() <= margin || collapse_near_seam(&p[2..], margin)
            }
        }
    }

    /// Intrinsic distance in the target.
    pub fn target_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let chord = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        match self.target() {
            Target::Euclidean(_) => chord,
            Target::Sphere(_) => 2.0 * (chord / 2.0).min(1.0).asin(),
        }
    }
}

fn collapse_near_seam(z: &[f64], margin: f64) -> bool {
    let mut norm2 = 0.0;
    for &t in z {
        if (t - t.round()).abs() <= margin {
            return true;
        }
        let v = t - t.floor() - 0.5;
        norm2 += v * v;
    }
    (norm2.sqrt() - 0.5).abs() <= margin
}

/// f₀ in polar form on [−1, 1] × [0, ∞).
pub fn eval_f0(x: f64, y: f64) -> Result<(f64, f64), MapError> {
    if !(-1.0..=1.0).contains(&x) || y < 0.0 || !y.is_finite() {
        return Err(MapError::OutOfDomain(vec![x, y]));
    }
    let a = x.abs();
    let r = a + (-y).exp() * (1.0 - a);
    let theta = y + r.ln();
    Ok((r, if x < 0.0 { -theta } else { theta }))
}

/// Azimuthal hemisphere charts; they agree on the unit circle.
pub fn hemisphere(r: f64, theta: f64, north: bool) -> [f64; 3] {
    let s = (PI * r / 2.0).sin();
    let c = (PI * r / 2.0).cos();
    [s * theta.cos(), s * theta.sin(), if north { c } else { -c }]
}

/// The wrapping map ℝ² → S² ∖ {(0, 0, ±1)}: period 4 in x, and for y < 0
/// the reflection of the upper half-plane value in the equator.
pub fn eval_sphere_wrap(x: f64, y: f64) -> [f64; 3] {
    let mut x = (x + 1.0).rem_euclid(4.0) - 1.0;
    if x >= 3.0 {
        x -= 4.0;
    }
    let (ay, flip) = (y.abs(), y < 0.0);
    let v = if x <= 1.0 {
        let (r, t) = eval_f0(x, ay).expect("reduced into the strip");
        hemisphere(r, t, true)
    } else {
        let (r, t) = eval_f0(2.0 - x, ay).expect("reduced into the strip");
        hemisphere(r, t, false)
    };
    if flip {
        [v[0], v[1], -v[2]]
    } else {
        v
    }
}

/// Unit-cube collapse ℝᵈ → Sᵈ ⊂ ℝ^{d+1}: the ball of radius ½ about each
/// cube centre wraps once around the sphere, everything else goes to the
/// base point (−1, 0, …, 0).
pub fn eval_torus_collapse(z: &[f64]) -> Vec<f64> {
    let v: Vec<f64> = z.iter().map(|t| t - t.floor() - 0.5).collect();
    let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    let mut out = vec![0.0; z.len() + 1];
    if norm >= 0.5 {
        out[0] = -1.0;
        return out;
    }
    let t = PI * 2.0 * norm;
    out[0] = t.cos();
    if norm > 0.0 {
        let s = t.sin() / norm;
        for (o, c) in out[1..].iter_mut().zip(&v) {
            *o = s * c;
        }
    }
    out
}

/// Spherical join q: D² × Sᵏ → S^{k+2}, constant in u on the boundary circle.
pub fn join(w: (f64, f64), u: &[f64]) -> Vec<f64> {
    let r = w.0.hypot(w.1);
    let mut out = Vec::with_capacity(u.len() + 2);
    let s = if r > 0.0 { (PI * r / 2.0).sin() / r } else { 0.0 };
    out.push(s * w.0);
    out.push(s * w.1);
    let c = (PI * r / 2.0).cos();
    out.extend(u.iter().map(|x| c * x));
    out
}

/// ℝⁿ → Sⁿ ∖ Sⁿ⁻², built from f₀ in (x, y) and the torus collapse in z.
/// The excluded Sⁿ⁻² is the locus where the first two coordinates vanish.
pub fn eval_fn(x: f64, y: f64, z: &[f64], n: usize) -> Result<Vec<f64>, MapError> {
    if n < 3 || z.len() != n - 2 {
        return Err(MapError::Dimension {
            expected: n.saturating_sub(2),
            found: z.len(),
        });
    }
    let flip = |z: &[f64]| -> Vec<f64> {
        let mut w = z.to_vec();
        w[0] = -w[0];
        w
    };
    if y < 0.0 {
        return eval_fn(x, -y, &flip(z), n);
    }
    let mut x = (x + 1.0).rem_euclid(4.0) - 1.0;
    if x >= 3.0 {
        x -= 4.0;
    }
    let polar = |(r, t): (f64, f64)| (r * t.cos(), r * t.sin());
    Ok(if x <= 1.0 {
        join(polar(eval_f0(x, y)?), &eval_torus_collapse(z))
    } else {
        join(polar(eval_f0(2.0 - x, y)?), &eval_torus_collapse(&flip(z)))
    })
}

/// Largest gap between the two branch formulas of the join map on the seam x = 1.
pub fn join_seam_gap(y: f64, z: &[f64]) -> f64 {
    let polar = |(r, t): (f64, f64)| (r * t.cos(), r * t.sin());
    let w = polar(eval_f0(1.0, y).expect("on the strip"));
    let mut flipped = z.to_vec();
    flipped[0] = -flipped[0];
    let a = join(w, &eval_torus_collapse(z));
    let b = join(w, &eval_torus_collapse(&flipped));
    a.iter().zip(&b).map(|(s, t)| (s - t).abs()).fold(0.0, f64::max)
}

/// Central-difference Jacobian; columns are partial derivatives.
pub fn jacobian_matrix(m: &EvaluableMap, p: &[f64]) -> Result<DMatrix<f64>, MapError> {
    let base = m.eval(p)?;
    let rows = base.len();
    let mut j = DMatrix::zeros(rows, p.len());
    let mut q = p.to_vec();
    for c in 0..p.len() {
        q[c] = p[c] + DIFF_STEP;
        let plus = m.eval(&q)?;
        q[c] = p[c] - DIFF_STEP;
        let minus = m.eval(&q)?;
        q[c] = p[c];
        for r in 0..rows {
            j[(r, c)] = (plus[r] - minus[r]) / (2.0 * DIFF_STEP);
        }
    }
    Ok(j)
}

/// Signed Jacobian of the pulled-back target volume form.
pub fn jacobian_det(m: &EvaluableMap, p: &[f64]) -> Result<f64, MapError> {
    let j = jacobian_matrix(m, p)?;
    Ok(match m.target() {
        Target::Euclidean(_) => j.determinant(),
        Target::Sphere(d) => {
            // det[f, ∂₁f, …, ∂_d f] with f the outward normal
            let f = m.eval(p)?;
            let full = DMatrix::from_fn(d + 1, d + 1, |r, c| if c == 0 { f[r] } else { j[(r, c - 1)] });
            full.determinant()
        }
    })
}

fn operator_norm(j: &DMatrix<f64>) -> f64 {
    j.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Axis-aligned box in the domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub step: f64,
    pub pairs: usize,
}

/// Largest ratio of target distance to grid step over neighbouring grid points.
pub fn estimate_lipschitz(m: &EvaluableMap, region: &Region, h: f64) -> Result<LipschitzEstimate, MapError> {
    if h <= 0.0 {
        return Err(MapError::BadStep);
    }
    let d = m.domain_dim();
    if region.lo.len() != d || region.hi.len() != d {
        return Err(MapError::Dimension {
            expected: d,
            found: region.lo.len(),
        });
    }
    let counts: Vec<usize> = (0..d)
        .map(|i| ((region.hi[i] - region.lo[i]) / h).round() as usize + 1)
        .collect();
    let point = |idx: &[usize]| -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(i, &k)| region.lo[i] + k as f64 * h)
            .collect()
    };
    // slices along the first axis are independent; each compares with its successor
    let slice = |k0: usize| -> Result<(f64, usize), MapError> {
        let mut best: f64 = 0.0;
        let mut pairs = 0;
        let rest: usize = counts[1..].iter().product();
        for flat in 0..rest {
            let mut idx = vec![k0; d];
            let mut f = flat;
            for i in (1..d).rev() {
                idx[i] = f % counts[i];
                f /= counts[i];
            }
            let p = point(&idx);
            let fp = m.eval(&p)?;
            for i in 0..d {
                if idx[i] + 1 >= counts[i] {
                    continue;
                }
                let mut nidx = idx.clone();
                nidx[i] += 1;
                let q = point(&nidx);
                let ratio = m.target_distance(&fp, &m.eval(&q)?) / h;
                best = best.max(ratio);
                pairs += 1;
            }
        }
        Ok((best, pairs))
    };
    let results: Vec<Result<(f64, usize), MapError>> = par_map(0..counts[0], slice);
    let mut value: f64 = 0.0;
    let mut pairs = 0;
    for r in results {
        let (v, c) = r?;
        value = value.max(v);
        pairs += c;
    }
    Ok(LipschitzEstimate { value, step: h, pairs })
}

fn par_map<T: Send>(range: std::ops::Range<usize>, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        range.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(f).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeReport {
    pub map: String,
    pub radii: Vec<f64>,
    /// R⁻ⁿ ∫_{B_R} Jf for each radius.
    pub normalized: Vec<f64>,
    pub step: f64,
    /// Least-squares slope of the normalized values against R.
    pub trend_slope: f64,
    pub skipped_seam_points: usize,
}

impl DegreeReport {
    pub fn floor(&self) -> f64 {
        self.normalized.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Delimited table: R, normalized integral.
    pub fn table(&self) -> String {
        let mut s = String::from("R\tnormalized_integral\n");
        for (r, v) in self.radii.iter().zip(&self.normalized) {
            s.push_str(&format!("{r}\t{v:.9}\n"));
        }
        s
    }
}

pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Midpoint quadrature of the Jacobian over balls B_R on one grid of step
/// `h` centred at the origin.
pub fn asymptotic_degree(m: &EvaluableMap, radii: &[f64], h: f64) -> Result<DegreeReport, MapError> {
    if h <= 0.0 {
        return Err(MapError::BadStep);
    }
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MapError::BadRadii);
    }
    let d = m.domain_dim();
    let rmax = *radii.last().expect("nonempty");
    let half = (rmax / h).ceil() as usize;
    let side = 2 * half;
    let coord = |k: usize| (k as f64 + 0.5) * h - half as f64 * h;
    let margin = 2.0 * DIFF_STEP;
    let slice = |k0: usize| -> Result<(Vec<f64>, usize), MapError> {
        let mut buckets = vec![0.0; radii.len()];
        let mut skipped = 0;
        let rest = side.pow(d as u32 - 1);
        let mut p = vec![0.0; d];
        for flat in 0..rest {
            p[0] = coord(k0);
            let mut f = flat;
            for i in (1..d).rev() {
                p[i] = coord(f % side);
                f /= side;
            }
            let r = p.iter().map(|t| t * t).sum::<f64>().sqrt();
            if r > rmax {
                continue;
            }
            if m.near_seam(&p, margin) {
                skipped += 1;
                continue;
            }
            let j = jacobian_det(m, &p)?;
            let b = radii.partition_point(|&big_r| big_r < r);
            buckets[b] += j;
        }
        Ok((buckets, skipped))
    };
    let results = par_map(0..side, slice);
    let mut totals = vec![0.0; radii.len()];
    let mut skipped = 0;
    for r in results {
        let (b, s) = r?;
        for (t, v) in totals.iter_mut().zip(b) {
            *t += v;
        }
        skipped += s;
    }
    let cell = h.powi(d as i32);
    let mut acc = 0.0;
    let normalized: Vec<f64> = radii
        .iter()
        .zip(&totals)
        .map(|(r, t)| {
            acc += t;
            acc * cell / r.powi(d as i32)
        })
        .collect();
    Ok(DegreeReport {
        map: m.name(),
        trend_slope: least_squares_slope(radii, &normalized),
        radii: radii.to_vec(),
        normalized,
        step: h,
        skipped_seam_points: skipped,
    })
}

/// Domain subsets used for sampled Jacobian bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "set", rename_all = "kebab-case")]
pub enum SampleSet {
    Box(Region),
    /// ⋃_z [2z + ½, 2z + 3/2] × ([y_lo, y_hi] ∪ [−y_hi, −y_lo]), for x in [x_lo, x_hi].
    Strips {
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        y_hi: f64,
    },
}

impl SampleSet {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            SampleSet::Box(r) => r.lo.iter().zip(&r.hi).map(|(a, b)| rng.random_range(*a..*b)).collect(),
            SampleSet::Strips { x_lo, x_hi, y_lo, y_hi } => loop {
                let x = rng.random_range(*x_lo..*x_hi);
                let frac = (x - 0.5).rem_euclid(2.0);
                if frac > 1.0 {
                    continue;
                }
                let y = rng.random_range(*y_lo..*y_hi);
                break vec![x, if rng.random_bool(0.5) { y } else { -y }];
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloorReport {
    pub floor: f64,
    pub argmin: Vec<f64>,
    pub samples: usize,
    pub skipped_seam_points: usize,
}

/// Smallest sampled Jacobian over the set.
pub fn jacobian_floor(m: &EvaluableMap, set: &SampleSet, count: usize, seed: u64) -> Result<FloorReport, MapError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..count).map(|_| set.sample(&mut rng)).collect();
    let margin = 2.0 * DIFF_STEP;
    let values = par_map(0..points.len(), |i| {
        let p = &points[i];
        if m.near_seam(p, margin) {
            Ok(None)
        } else {
            jacobian_det(m, p).map(Some)
        }
    });
    let mut floor = f64::INFINITY;
    let mut argmin = Vec::new();
    let mut skipped = 0;
    for (p, v) in points.iter().zip(values) {
        match v? {
            None => skipped += 1,
            Some(j) if j < floor => {
                floor = j;
                argmin = p.clone();
            }
            Some(_) => {}
        }
    }
    Ok(FloorReport {
        floor,
        argmin,
        samples: count - skipped,
        skipped_seam_points: skipped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiregularityReport {
    /// sup of ‖Df‖ⁿ / det Df over samples with det Df > 0.
    pub ratio: f64,
    pub diverged: bool,
    pub worst_point: Vec<f64>,
    pub nonpositive_fraction: f64,
    pub samples: usize,
}

/// Sampled distortion ‖Df‖ⁿ_op / det Df.
pub fn quasiregularity_ratio(m: &EvaluableMap, samples: &[Vec<f64>]) -> Result<QuasiregularityReport, MapError> {
    let n = m.domain_dim() as i32;
    let margin = 2.0 * DIFF_STEP;
    let values = par_map(0..samples.len(), |i| -> Result<Option<(f64, f64)>, MapError> {
        let p = &samples[i];
        if m.near_seam(p, margin) {
            return Ok(None);
        }
        let j = jacobian_matrix(m, p)?;
        Ok(Some((operator_norm(&j).powi(n), jacobian_det(m, p)?)))
    });
    let mut ratio: f64 = 0.0;
    let mut worst = Vec::new();
    let mut nonpositive = 0;
    let mut used = 0;
    for (p, v) in samples.iter().zip(values) {
        let Some((norm, det)) = v? else { continue };
        used += 1;
        // relative to the scale of Df, so a constant map counts as degenerate
        if det <= 1e-12 * norm.max(1e-300) || det <= 0.0 {
            nonpositive += 1;
            continue;
        }
        let q = norm / det;
        if q > ratio {
            ratio = q;
            worst = p.clone();
        }
    }
    let nonpositive_fraction = if used == 0 {
        0.0
    } else {
        nonpositive as f64 / used as f64
    };
    Ok(QuasiregularityReport {
        ratio,
        diverged: ratio > QR_DIVERGENCE || nonpositive_fraction > 1e-3,
        worst_point: worst,
        nonpositive_fraction,
        samples: used,
    })
}

/// Smallest distance from the sphere-wrap image to the poles on a uniform grid.
pub fn min_pole_distance(x_range: (f64, f64), y_range: (f64, f64), per_side: usize) -> f64 {
    let rows = par_map(0..per_side, |i| {
        let x = x_range.0 + (x_range.1 - x_range.0) * i as f64 / (per_side - 1) as f64;
        let mut best = f64::INFINITY;
        for k in 0..per_side {
            let y = y_range.0 + (y_range.1 - y_range.0) * k as f64 / (per_side - 1) as f64;
            let v = eval_sphere_wrap(x, y);
            let d = (v[0] * v[0] + v[1] * v[1] + (1.0 - v[2].abs()).powi(2)).sqrt();
            best = best.min(d);
        }
        best
    });
    rows.into_iter().fold(f64::INFINITY, f64::min)
}

/// Smallest distance from the join-map image to the excluded Sⁿ⁻² over random samples.
pub fn min_excluded_distance(n: usize, box_half: f64, count: usize, seed: u64) -> Result<f64, MapError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..count {
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-box_half..box_half)).collect();
        let v = eval_fn(p[0], p[1], &p[2..], n)?;
        best = best.min(v[0].hypot(v[1]));
    }
    Ok(best)
}

/// Signed count of preimages of a regular value of the torus collapse in
/// the cube [0, 1]ᵈ, found by Gauss–Newton from a grid of seeds.
pub fn collapse_degree(d: usize, value: &[f64], seeds_per_side: usize) -> Result<i64, MapError> {
    let m = EvaluableMap::TorusCollapse { d };
    let total = seeds_per_side.pow(d as u32);
    let mut roots: Vec<Vec<f64>> = Vec::new();
    let mut degree = 0;
    for flat in 0..total {
        let mut z = vec![0.0; d];
        let mut f = flat;
        for zi in z.iter_mut() {
            *zi = ((f % seeds_per_side) as f64 + 0.5) / seeds_per_side as f64;
            f /= seeds_per_side;
        }
        for _ in 0..60 {
            let g = m.eval(&z)?;
            let j = jacobian_matrix(&m, &z)?;
            let r = DMatrix::from_fn(d + 1, 1, |i, _| g[i] - value[i]);
            let jt = j.transpose();
            let Some(step) = (&jt * &j).lu().solve(&(&jt * &r)) else {
                break;
            };
            for (zi, s) in z.iter_mut().zip(step.iter()) {
                *zi -= s;
            }
            if step.norm() < 1e-13 {
                break;
            }
        }
        let g = m.eval(&z)?;
        let res: f64 = g.iter().zip(value).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let inside = z.iter().all(|t| (0.0..1.0).contains(t));
        if res < 1e-9
            && inside
            && !roots
                .iter()
                .any(|q| q.iter().zip(&z).all(|(a, b)| (a - b).abs() < 1e-6))
        {
            degree += jacobian_det(&m, &z)?.signum() as i64;
            roots.push(z);
        }
    }
    Ok(degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f0_examples() {
        for x in [0.0, 0.3, 1.0] {
            let (r, t) = eval_f0(x, 0.0).unwrap();
            assert!((r - 1.0).abs() < 1e-15 && t.abs() < 1e-15);
        }
        let (r, t) = eval_f0(1.0, 3.5).unwrap();
        assert!((r - 1.0).abs() < 1e-15 && (t - 3.5).abs() < 1e-15);
        let (r, t) = eval_f0(0.0, 2.0).unwrap();
        assert!((r - (-2f64).exp()).abs() < 1e-15 && t.abs() < 1e-12);
        assert!(eval_f0(1.5, 0.0).is_err());
        assert!(eval_f0(0.0, -1.0).is_err());
    }

    #[test]
    fn sphere_wrap_examples() {
        for x in [0.0, 0.5, 1.0] {
            let v = eval_sphere_wrap(x, 0.0);
            assert!((v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12 && v[2].abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let (x, y) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
            let v = eval_sphere_wrap(x, y);
            assert!(((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs() < 1e-12);
            let w = eval_sphere_wrap(x + 4.0, y);
            assert!(v.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-9));
        }
        // hemisphere charts agree on the boundary circle
        for k in 0..16 {
            let t = k as f64 * 0.4;
            let (a, b) = (hemisphere(1.0, t, true), hemisphere(1.0, t, false));
            assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
        }
    }

    #[test]
    fn orientation_is_coherent() {
        let m = EvaluableMap::SphereWrap;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let p = vec![rng.random_range(-4.0..4.0), rng.random_range(-6.0..6.0)];
            if m.near_seam(&p, 1e-4) {
                continue;
            }
            assert!(jacobian_det(&m, &p).unwrap() >= -1e-9, "{p:?}");
        }
    }

    #[test]
    fn identity_and_constant() {
        let id = EvaluableMap::Identity { n: 2 };
        let l = estimate_lipschitz(
            &id,
            &Region {
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
            },
            0.1,
        )
        .unwrap();
        assert!((l.value - 1.0).abs() < 1e-9);
        let rep = asymptotic_degree(&id, &[5.0, 10.0], 0.05).unwrap();
        assert!(rep.normalized.iter().all(|v| (v - PI).abs() < 0.01));
        let c = EvaluableMap::Constant { n: 2 };
        let rep = asymptotic_degree(&c, &[5.0], 0.1).unwrap();
        assert_eq!(rep.normalized, vec![0.0]);
        let box_set = SampleSet::Box(Region {
            lo: vec![-1.0, -1.0],
            hi: vec![1.0, 1.0],
        });
        assert!((jacobian_floor(&id, &box_set, 100, 1).unwrap().floor - 1.0).abs() < 1e-9);
        assert_eq!(jacobian_floor(&c, &box_set, 100, 1).unwrap().floor, 0.0);
        let pts: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 * 0.1 + 0.05, 0.3]).collect();
        assert!((quasiregularity_ratio(&id, &pts).unwrap().ratio - 1.0).abs() < 1e-6);
        assert!(quasiregularity_ratio(&c, &pts).unwrap().diverged);
    }

    #[test]
    fn radial_stretch_distortion() {
        // singular values (1 + α)|x|^α and |x|^α give ratio 1 + α in the plane
        let m = EvaluableMap::RadialStretch { alpha: 0.5 };
        let pts: Vec<Vec<f64>> = (1..40).map(|i| vec![0.1 * i as f64, 0.05 * i as f64 - 0.7]).collect();
        let rep = quasiregularity_ratio(&m, &pts).unwrap();
        assert!((rep.ratio - 1.5).abs() < 1e-5, "{}", rep.ratio);
        assert!(!rep.diverged);
    }

    #[test]
    fn torus_collapse_examples() {
        let c = eval_torus_collapse(&[0.5, 0.5]);
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert_eq!(eval_torus_collapse(&[0.0, 0.3]), vec![-1.0, 0.0, 0.0]);
        assert_eq!(eval_torus_collapse(&[0.2, 1.0]), vec![-1.0, 0.0, 0.0]);
        for d in 1..=2 {
            let mut v = vec![0.0; d + 1];
            v[0] = 0.3f64.cos();
            v[1] = 0.3f64.sin();
            assert_eq!(collapse_degree(d, &v, 8).unwrap(), 1);
        }
    }

    #[test]
    fn join_map_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [3, 4] {
            for _ in 0..500 {
                let p: Vec<f64> = (0..n).map(|_| rng.random_range(-9.0..9.0)).collect();
                let v = eval_fn(p[0], p[1], &p[2..], n).unwrap();
                assert!((v.iter().map(|t| t * t).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
                assert!(v[0].hypot(v[1]) > 0.0);
                // the S¹ join coordinate repeats the planar construction
                let s = eval_sphere_wrap(p[0], p[1]);
                assert!((v[0] - s[0]).abs() < 1e-12 && (v[1] - s[1]).abs() < 1e-12);
                assert!(join_seam_gap(p[1].abs(), &p[2..]) < 1e-12);
            }
        }
    }
}
