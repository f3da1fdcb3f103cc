//! Rotationally symmetric surfaces (conformal type, curvature, volume of
//! revolution profiles) and combinatorics of loops in the unit grid.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("profile value {value} at r = {r} is not positive")]
    NonPositive { r: f64, value: f64 },
    #[error("radii must be strictly increasing (at index {0})")]
    NotIncreasing(usize),
    #[error("curvature test needs r₀ > 1, got {0}")]
    RadiusTooSmall(f64),
    #[error("grid step {step} exceeds tolerance {tolerance}")]
    GridTooCoarse { step: f64, tolerance: f64 },
    #[error("grid is not uniform")]
    NonUniformGrid,
    #[error("need at least {0} samples")]
    TooFewSamples(usize),
    #[error("loop does not close: ends at ({0}, {1})")]
    NotClosed(i64, i64),
    #[error("turning number of the empty loop is undefined")]
    EmptyLoop,
    #[error("loop backtracks at step {0}")]
    NotReduced(usize),
    #[error("chain is not a cycle: boundary nonzero at ({0}, {1})")]
    NotACycle(i64, i64),
    #[error("unknown step `{0}` (expected E, N, W or S)")]
    BadStep(char),
    #[error("dimension must be at least 2")]
    BadDimension,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConformalType {
    Parabolic,
    Hyperbolic,
    Inconclusive,
}

impl fmt::Display for ConformalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConformalType::Parabolic => "parabolic",
            ConformalType::Hyperbolic => "hyperbolic",
            ConformalType::Inconclusive => "inconclusive",
        })
    }
}

/// Windows needed in the tail for a numerical verdict.
pub const TAIL_WINDOWS: usize = 8;
/// Successive window ratios below this count as geometric decay.
pub const DECAY_RATIO: f64 = 0.9;
/// Tail windows staying within this factor of the first count as divergent.
pub const FLAT_FACTOR: f64 = 2.0;

/// Windows used for tabulated circumference data.
pub const TABULATED_WINDOWS: usize = 12;

/// Metric dr² + ρ(r)² dθ² on the plane, described by its tail.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RadialProfile {
    Euclidean,
    Hyperbolic,
    /// ρ = r (log r)^{1+ε} for large r.
    PowerLog {
        epsilon: f64,
    },
    /// ρ = r^φ for r ≥ 1, φ the golden ratio; curvature −1/r².
    InverseSquare,
    /// Circumference samples (r, L(r)).
    Tabulated {
        samples: Vec<(f64, f64)>,
    },
}

pub const GOLDEN: f64 = 1.618_033_988_749_895;

impl RadialProfile {
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self, GeomError> {
        if samples.len() < 2 {
            return Err(GeomError::TooFewSamples(2));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(GeomError::NotIncreasing(i + 1));
            }
        }
        if let Some(&(r, value)) = samples.iter().find(|(r, v)| *r <= 0.0 || *v <= 0.0) {
            return Err(GeomError::NonPositive { r, value });
        }
        Ok(RadialProfile::Tabulated { samples })
    }

    pub fn name(&self) -> String {
        match self {
            RadialProfile::Euclidean => "euclidean".into(),
            RadialProfile::Hyperbolic => "hyperbolic".into(),
            RadialProfile::PowerLog { epsilon } => format!("power-log(ε = {epsilon})"),
            RadialProfile::InverseSquare => "inverse-square".into(),
            RadialProfile::Tabulated { samples } => format!("tabulated({} samples)", samples.len()),
        }
    }

    /// ρ(r) on the tail where the closed form holds.
    pub fn rho(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Euclidean => r,
            RadialProfile::Hyperbolic => r.sinh(),
            RadialProfile::PowerLog { epsilon } => r * r.ln().powf(1.0 + epsilon),
            RadialProfile::InverseSquare => r.powf(GOLDEN),
            RadialProfile::Tabulated { .. } => (self.ln_circumference(r.ln()) - (2.0 * PI).ln()).exp(),
        }
    }

    /// Gaussian curvature −ρ''/ρ in closed form; `None` for tabulated data.
    pub fn curvature(&self, r: f64) -> Option<f64> {
        match self {
            RadialProfile::Euclidean => Some(0.0),
            RadialProfile::Hyperbolic => Some(-1.0),
            RadialProfile::PowerLog { epsilon } => {
                let a = 1.0 + epsilon;
                let l = r.ln();
                Some(-a / (r * r * l) - a * epsilon / (r * r * l * l))
            }
            RadialProfile::InverseSquare => Some(-1.0 / (r * r)),
            RadialProfile::Tabulated { .. } => None,
        }
    }

    /// ln L(e^u), kept in log form so far tails do not overflow.
    fn ln_circumference(&self, u: f64) -> f64 {
        let two_pi = (2.0 * PI).ln();
        match self {
            RadialProfile::Euclidean => two_pi + u,
            RadialProfile::Hyperbolic => {
                let r = u.exp();
                // ln(2π sinh r) = ln π + r + ln(1 − e^{−2r})
                PI.ln() + r + (-(-2.0 * r).exp()).ln_1p()
            }
            RadialProfile::PowerLog { epsilon } => two_pi + u + (1.0 + epsilon) * u.ln(),
            RadialProfile::InverseSquare => two_pi + GOLDEN * u,
            RadialProfile::Tabulated { samples } => {
                // linear in log-log coordinates, constant slope beyond the ends
                let lr: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
                let i = match lr.iter().position(|&x| x >= u) {
                    Some(0) => 1,
                    Some(i) => i,
                    None => lr.len() - 1,
                };
                let (u0, u1) = (lr[i - 1], lr[i]);
                let (v0, v1) = (samples[i - 1].1.ln(), samples[i].1.ln());
                v0 + (v1 - v0) * (u - u0) / (u1 - u0)
            }
        }
    }

    /// Conformal type in closed form, when known.
    fn analytic_type(&self) -> Option<ConformalType> {
        match self {
            RadialProfile::Euclidean => Some(ConformalType::Parabolic),
            RadialProfile::Hyperbolic | RadialProfile::InverseSquare => Some(ConformalType::Hyperbolic),
            RadialProfile::PowerLog { epsilon } => Some(if *epsilon > 0.0 {
                ConformalType::Hyperbolic
            } else {
                ConformalType::Parabolic
            }),
            RadialProfile::Tabulated { .. } => None,
        }
    }
}

/// ∫ dr/L(r) over one window, with the window bounds in log r.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Window {
    pub log_r_start: f64,
    pub log_r_end: f64,
    pub integral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AhlforsReport {
    pub verdict: ConformalType,
    /// Verdict of the window heuristic alone.
    pub numerical: ConformalType,
    pub analytic: Option<ConformalType>,
    pub windows: Vec<Window>,
}

impl AhlforsReport {
    /// Delimited trace: log r start, log r end, window integral.
    pub fn trace_table(&self) -> String {
        let mut s = String::from("log_r_start\tlog_r_end\tintegral\n");
        for w in &self.windows {
            s.push_str(&format!(
                "{:.6}\t{:.6}\t{:.12e}\n",
                w.log_r_start, w.log_r_end, w.integral
            ));
        }
        s
    }
}

/// ∫_{a}^{b} e^u / L(e^u) du by composite Simpson in log-space.
fn window_integral(p: &RadialProfile, a: f64, b: f64) -> f64 {
    let panels = 128;
    let h = (b - a) / panels as f64;
    let f = |u: f64| (u - p.ln_circumference(u)).exp();
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let u = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(u);
    }
    s * h / 3.0
}

/// Heuristic verdict from the last [`TAIL_WINDOWS`] window integrals.
pub fn window_verdict(sums: &[f64]) -> ConformalType {
    if sums.len() < TAIL_WINDOWS + 1 {
        return ConformalType::Inconclusive;
    }
    let tail = &sums[sums.len() - TAIL_WINDOWS - 1..];
    let decays = tail.windows(2).all(|w| w[0] == 0.0 || w[1] / w[0] < DECAY_RATIO);
    if decays {
        return ConformalType::Hyperbolic;
    }
    let first = tail[0];
    if first > 0.0 && tail.iter().all(|&s| s * FLAT_FACTOR >= first) {
        return ConformalType::Parabolic;
    }
    ConformalType::Inconclusive
}

/// Conformal type from ∫ dr/L(r): divergent means parabolic.
///
/// Closed-form families are decided analytically and their numerical
/// trace uses windows [e^{2^j}, e^{2^{j+1}}]; tabulated data splits
/// [max(r₀, e), r_max] into windows of equal length in log log r.
pub fn ahlfors_classify(p: &RadialProfile) -> AhlforsReport {
    let bounds: Vec<(f64, f64)> = match p {
        RadialProfile::Tabulated { samples } => {
            let (lo, hi) = (samples[0].0.ln().max(1.0), samples[samples.len() - 1].0.ln());
            if hi <= lo {
                Vec::new()
            } else {
                let k = (hi / lo).powf(1.0 / TABULATED_WINDOWS as f64);
                (0..TABULATED_WINDOWS as i32)
                    .map(|j| (lo * k.powi(j), lo * k.powi(j + 1)))
                    .collect()
            }
        }
        _ => (0..10)
            .map(|j| ((1u64 << j) as f64, (1u64 << (j + 1)) as f64))
            .collect(),
    };
    let windows: Vec<Window> = bounds
        .iter()
        .map(|&(a, b)| Window {
            log_r_start: a,
            log_r_end: b,
            integral: window_integral(p, a, b),
        })
        .collect();
    let sums: Vec<f64> = windows.iter().map(|w| w.integral).collect();
    let numerical = window_verdict(&sums);
    let analytic = p.analytic_type();
    AhlforsReport {
        verdict: analytic.unwrap_or(numerical),
        numerical,
        analytic,
        windows,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MilnorReport {
    pub verdict: ConformalType,
    /// min over the tail of −K r² log r − 1.
    pub fitted_epsilon: f64,
    pub tail_start: f64,
}

/// Milnor's curvature test on samples (r, K) with r > 1, applied to the
/// tail r ≥ √(r₀ r_max).
pub fn milnor_classify(samples: &[(f64, f64)]) -> Result<MilnorReport, GeomError> {
    if samples.len() < 2 {
        return Err(GeomError::TooFewSamples(2));
    }
    let r0 = samples[0].0;
    if r0 <= 1.0 {
        return Err(GeomError::RadiusTooSmall(r0));
    }
    for (i, w) in samples.windows(2).enumerate() {
        if w[1].0 <= w[0].0 {
            return Err(GeomError::NotIncreasing(i + 1));
        }
    }
    let tail_start = (r0 * samples[samples.len() - 1].0).sqrt();
    let tail: Vec<&(f64, f64)> = samples.iter().filter(|(r, _)| *r >= tail_start).collect();
    // scaled curvature −K r² log r; the borderline is 1
    let scaled: Vec<f64> = tail.iter().map(|(r, k)| -k * r * r * r.ln()).collect();
    let fitted_epsilon = scaled.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let verdict = if scaled.iter().all(|&s| s <= 1.0 + 1e-12) {
        ConformalType::Parabolic
    } else if fitted_epsilon > 1e-9 {
        ConformalType::Hyperbolic
    } else {
        ConformalType::Inconclusive
    };
    Ok(MilnorReport {
        verdict,
        fitted_epsilon,
        tail_start,
    })
}

/// Log-spaced curvature samples of a closed-form family on [r0, rmax].
pub fn sample_curvature(p: &RadialProfile, r0: f64, rmax: f64, count: usize) -> Option<Vec<(f64, f64)>> {
    let (a, b) = (r0.ln(), rmax.ln());
    (0..count)
        .map(|i| {
            let r = (a + (b - a) * i as f64 / (count - 1) as f64).exp();
            p.curvature(r).map(|k| (r, k))
        })
        .collect()
}

/// K = −ρ''/ρ by symmetric second differences on a uniform grid.
pub fn curvature_from_profile(samples: &[(f64, f64)], max_step: f64) -> Result<Vec<(f64, f64)>, GeomError> {
    if samples.len() < 3 {
        return Err(GeomError::TooFewSamples(3));
    }
    let h = samples[1].0 - samples[0].0;
    if h <= 0.0 {
        return Err(GeomError::NotIncreasing(1));
    }
    if h > max_step {
        return Err(GeomError::GridTooCoarse {
            step: h,
            tolerance: max_step,
        });
    }
    for w in samples.windows(2) {
        if ((w[1].0 - w[0].0) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(GeomError::NonUniformGrid);
        }
    }
    let mut out = Vec::with_capacity(samples.len() - 2);
    for w in samples.windows(3) {
        let (r, rho) = w[1];
        if rho <= 0.0 {
            return Err(GeomError::NonPositive { r, value: rho });
        }
        let second = (w[0].1 - 2.0 * rho + w[2].1) / (h * h);
        out.push((r, -second / rho));
    }
    Ok(out)
}

/// Volume of the unit (n−1)-sphere.
pub fn sphere_area(n: usize) -> f64 {
    // 2π^{n/2} / Γ(n/2) by the recursion ω_{k+1} = 2π ω_{k−1} / k
    let mut omega = [2.0, 2.0 * PI];
    let mut k = 1;
    while k + 1 < n {
        let next = 2.0 * PI * omega[0] / k as f64;
        omega = [omega[1], next];
        k += 1;
    }
    if n == 1 {
        omega[0]
    } else {
        omega[1]
    }
}

/// ∫ ω_{n−1} ρ^{n−1} √(1 + ρ'²) dt of a hypersurface of revolution in ℝ^{n+1},
/// from samples (t, ρ) by the trapezoid rule with centred slopes.
pub fn revolution_volume(samples: &[(f64, f64)], n: usize) -> Result<f64, GeomError> {
    if n < 2 {
        return Err(GeomError::BadDimension);
    }
    if samples.len() < 3 {
        return Err(GeomError::TooFewSamples(3));
    }
    for (i, w) in samples.windows(2).enumerate() {
        if w[1].0 <= w[0].0 {
            return Err(GeomError::NotIncreasing(i + 1));
        }
    }
    if let Some(&(r, value)) = samples.iter().find(|s| s.1 <= 0.0) {
        return Err(GeomError::NonPositive { r, value });
    }
    let m = samples.len();
    let integrand: Vec<f64> = (0..m)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(m - 1));
            let slope = (samples[b].1 - samples[a].1) / (samples[b].0 - samples[a].0);
            samples[i].1.powi(n as i32 - 1) * (1.0 + slope * slope).sqrt()
        })
        .collect();
    let mut total = 0.0;
    for i in 1..m {
        total += 0.5 * (integrand[i] + integrand[i - 1]) * (samples[i].0 - samples[i - 1].0);
    }
    Ok(sphere_area(n) * total)
}

/// Finite-volume cylinder S^{n−1} × [0, ∞) as a hypersurface of revolution:
/// minima ρ(p) = 2^{−2p/(n−1)}, maxima ρ(p + ½) = 2^{−p/(n−1)}, joined by
/// smoothstep ramps whose width is chosen so the mean of ρ over [p, p + 1]
/// is `mean_ratio` times the maximum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoduleProfile {
    pub n: usize,
    pub mean_ratio: f64,
}

impl NoduleProfile {
    /// The mean ratio is the one a plain smoothstep gives on the first
    /// nodule; later nodules get flatter tops.
    pub fn new(n: usize) -> Result<Self, GeomError> {
        if n < 2 {
            return Err(GeomError::BadDimension);
        }
        let q = 2f64.powf(-1.0 / (n as f64 - 1.0));
        Ok(Self {
            n,
            mean_ratio: (1.0 + q) / 2.0,
        })
    }

    pub fn minimum(&self, p: u32) -> f64 {
        2f64.powf(-2.0 * p as f64 / (self.n as f64 - 1.0))
    }

    pub fn maximum(&self, p: u32) -> f64 {
        2f64.powf(-(p as f64) / (self.n as f64 - 1.0))
    }

    /// Ramp width w ∈ (0, ½] with mean M − w(2M − m₀ − m₁)/2 = cM.
    pub fn ramp_width(&self, p: u32) -> f64 {
        let (m0, big, m1) = (self.minimum(p), self.maximum(p), self.minimum(p + 1));
        (2.0 * (1.0 - self.mean_ratio) * big / (2.0 * big - m0 - m1)).clamp(1e-3, 0.5)
    }

    /// ρ on [p, p + 1], descending to the next neck at p + 1.
    pub fn rho(&self, t: f64) -> f64 {
        let p = t.floor().max(1.0) as u32;
        let s = t - p as f64;
        let (m0, big, m1) = (self.minimum(p), self.maximum(p), self.minimum(p + 1));
        let w = self.ramp_width(p);
        let smooth = |x: f64| x * x * (3.0 - 2.0 * x);
        if s < w {
            m0 + (big - m0) * smooth(s / w)
        } else if s > 1.0 - w {
            m1 + (big - m1) * smooth((1.0 - s) / w)
        } else {
            big
        }
    }

    pub fn samples(&self, start: f64, end: f64, per_unit: usize) -> Vec<(f64, f64)> {
        let count = ((end - start) * per_unit as f64).round() as usize;
        (0..=count)
            .map(|i| {
                let t = start + (end - start) * i as f64 / count as f64;
                (t, self.rho(t))
            })
            .collect()
    }

    /// Volume of the nodule between p and p + 1.
    pub fn nodule_volume(&self, p: u32, per_unit: usize) -> f64 {
        let s = self.samples(p as f64, p as f64 + 1.0 - 1e-12, per_unit);
        revolution_volume(&s, self.n).expect("profile is positive")
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Step {
    E,
    N,
    W,
    S,
}

impl Step {
    pub const ALL: [Step; 4] = [Step::E, Step::N, Step::W, Step::S];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Step::E => (1, 0),
            Step::N => (0, 1),
            Step::W => (-1, 0),
            Step::S => (0, -1),
        }
    }

    pub fn inverse(self) -> Step {
        match self {
            Step::E => Step::W,
            Step::N => Step::S,
            Step::W => Step::E,
            Step::S => Step::N,
        }
    }

    fn quarter(self) -> i32 {
        match self {
            Step::E => 0,
            Step::N => 1,
            Step::W => 2,
            Step::S => 3,
        }
    }

    /// +1 for a left turn, −1 for a right turn, 0 straight; `None` on a backtrack.
    pub fn turn(self, next: Step) -> Option<i32> {
        match (next.quarter() - self.quarter()).rem_euclid(4) {
            0 => Some(0),
            1 => Some(1),
            3 => Some(-1),
            _ => None,
        }
    }

    pub fn from_char(c: char) -> Result<Self, GeomError> {
        match c.to_ascii_uppercase() {
            'E' => Ok(Step::E),
            'N' => Ok(Step::N),
            'W' => Ok(Step::W),
            'S' => Ok(Step::S),
            _ => Err(GeomError::BadStep(c)),
        }
    }
}

/// Closed walk in the unit grid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeLoop {
    start: (i64, i64),
    steps: Vec<Step>,
}

impl LatticeLoop {
    pub fn new(start: (i64, i64), steps: Vec<Step>) -> Result<Self, GeomError> {
        let (dx, dy) = steps
            .iter()
            .fold((0, 0), |(x, y), s| (x + s.delta().0, y + s.delta().1));
        if (dx, dy) != (0, 0) {
            return Err(GeomError::NotClosed(start.0 + dx, start.1 + dy));
        }
        Ok(Self { start, steps })
    }

    pub fn parse(start: (i64, i64), text: &str) -> Result<Self, GeomError> {
        let steps = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(Step::from_char)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(start, steps)
    }

    pub fn start(&self) -> (i64, i64) {
        self.start
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Vertices visited, starting and ending at the start point.
    pub fn vertices(&self) -> Vec<(i64, i64)> {
        let mut v = vec![self.start];
        let mut p = self.start;
        for s in &self.steps {
            p = (p.0 + s.delta().0, p.1 + s.delta().1);
            v.push(p);
        }
        v
    }

    pub fn reversed(&self) -> Self {
        Self {
            start: self.start,
            steps: self.steps.iter().rev().map(|s| s.inverse()).collect(),
        }
    }

    pub fn word(&self) -> String {
        self.steps.iter().map(|s| format!("{s:?}")).collect()
    }

    /// Cancels backtracks, including across the base point.
    pub fn reduce(&self) -> Self {
        let mut stack: Vec<Step> = Vec::with_capacity(self.steps.len());
        for &s in &self.steps {
            if stack.last() == Some(&s.inverse()) {
                stack.pop();
            } else {
                stack.push(s);
            }
        }
        let mut start = self.start;
        let (mut lo, mut hi) = (0, stack.len());
        while hi - lo >= 2 && stack[lo] == stack[hi - 1].inverse() {
            let d = stack[lo].delta();
            start = (start.0 + d.0, start.1 + d.1);
            lo += 1;
            hi -= 1;
        }
        Self {
            start,
            steps: stack[lo..hi].to_vec(),
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.backtrack().is_none()
    }

    fn backtrack(&self) -> Option<usize> {
        let m = self.steps.len();
        (0..m).find(|&i| self.steps[(i + 1) % m] == self.steps[i].inverse())
    }

    /// Loop traversing `self`, then `path`, then `other` (based at the end of
    /// `path`), then `path` backwards.
    pub fn concatenate(&self, path: &[Step], other: &LatticeLoop) -> Result<Self, GeomError> {
        let end = path
            .iter()
            .fold(self.start, |(x, y), s| (x + s.delta().0, y + s.delta().1));
        if end != other.start {
            return Err(GeomError::NotClosed(end.0 - other.start.0, end.1 - other.start.1));
        }
        let mut steps = self.steps.clone();
        steps.extend_from_slice(path);
        steps.extend_from_slice(&other.steps);
        steps.extend(path.iter().rev().map(|s| s.inverse()));
        Self::new(self.start, steps)
    }
}

/// (left − right)/4 around a reduced nonempty loop, wrap-around corner included.
pub fn turning_number(g: &LatticeLoop) -> Result<Ratio<i64>, GeomError> {
    if g.is_empty() {
        return Err(GeomError::EmptyLoop);
    }
    if let Some(i) = g.backtrack() {
        return Err(GeomError::NotReduced(i));
    }
    let m = g.steps.len();
    let total: i64 = (0..m)
        .map(|i| g.steps[i].turn(g.steps[(i + 1) % m]).expect("reduced") as i64)
        .sum();
    Ok(Ratio::new(total, 4))
}

/// Turning number of the reduced representative of a free loop.
pub fn free_turning_number(g: &LatticeLoop) -> Result<Ratio<i64>, GeomError> {
    turning_number(&g.reduce())
}

/// Turning number relative to the square [−s, s]²: each maximal stretch of
/// the loop inside the square is replaced by the staircase that goes in x
/// first and then in y.
pub fn turning_number_rel_square(g: &LatticeLoop, s: i64) -> Result<Ratio<i64>, GeomError> {
    let inside = |p: (i64, i64)| p.0.abs() <= s && p.1.abs() <= s;
    let verts = g.vertices();
    let m = g.steps.len();
    if m == 0 || verts.iter().all(|&p| inside(p)) {
        return Err(GeomError::EmptyLoop);
    }
    // rotate so the loop starts outside the square
    let k = (0..m).find(|&i| !inside(verts[i])).expect("some vertex outside");
    let steps: Vec<Step> = g.steps[k..].iter().chain(&g.steps[..k]).copied().collect();
    let start = verts[k];
    let mut out = Vec::with_capacity(m);
    let mut p = start;
    let mut i = 0;
    while i < m {
        let d = steps[i].delta();
        let q = (p.0 + d.0, p.1 + d.1);
        if inside(p) && inside(q) {
            // p is an entry vertex; run to the last vertex still inside
            let entry = p;
            let mut exit = q;
            let mut j = i + 1;
            while j < m {
                let d = steps[j].delta();
                let r = (exit.0 + d.0, exit.1 + d.1);
                if !inside(r) {
                    break;
                }
                exit = r;
                j += 1;
            }
            out.extend(staircase(entry, exit));
            p = exit;
            i = j;
        } else {
            out.push(steps[i]);
            p = q;
            i += 1;
        }
    }
    free_turning_number(&LatticeLoop::new(start, out)?)
}

fn staircase(a: (i64, i64), b: (i64, i64)) -> Vec<Step> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut v = Vec::new();
    v.extend(std::iter::repeat(if dx >= 0 { Step::E } else { Step::W }).take(dx.unsigned_abs() as usize));
    v.extend(std::iter::repeat(if dy >= 0 { Step::N } else { Step::S }).take(dy.unsigned_abs() as usize));
    v
}

/// Unit edge of the grid: horizontal from (x, y) to (x + 1, y), or vertical
/// from (x, y) to (x, y + 1).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Edge {
    H(i64, i64),
    V(i64, i64),
}

/// Integer 1-chain on grid edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LatticeCycle {
    edges: BTreeMap<Edge, i64>,
}

impl LatticeCycle {
    pub fn from_loop(g: &LatticeLoop) -> Self {
        let mut c = Self::default();
        c.add_loop(g, 1);
        c
    }

    pub fn add_loop(&mut self, g: &LatticeLoop, weight: i64) {
        let mut p = g.start;
        for s in &g.steps {
            let (e, sign) = match s {
                Step::E => (Edge::H(p.0, p.1), 1),
                Step::W => (Edge::H(p.0 - 1, p.1), -1),
                Step::N => (Edge::V(p.0, p.1), 1),
                Step::S => (Edge::V(p.0, p.1 - 1), -1),
            };
            self.add_edge(e, sign * weight);
            let d = s.delta();
            p = (p.0 + d.0, p.1 + d.1);
        }
    }

    pub fn add_edge(&mut self, e: Edge, c: i64) {
        let v = self.edges.entry(e).or_insert(0);
        *v += c;
        if *v == 0 {
            self.edges.remove(&e);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, &c) in &other.edges {
            out.add_edge(e, c);
        }
        out
    }

    pub fn edges(&self) -> &BTreeMap<Edge, i64> {
        &self.edges
    }

    /// Sum of absolute coefficients.
    pub fn mass(&self) -> i64 {
        self.edges.values().map(|c| c.abs()).sum()
    }

    /// First vertex where the boundary is nonzero, if any.
    pub fn boundary_defect(&self) -> Option<(i64, i64)> {
        let mut b: BTreeMap<(i64, i64), i64> = BTreeMap::new();
        for (&e, &c) in &self.edges {
            let (from, to) = match e {
                Edge::H(x, y) => ((x, y), (x + 1, y)),
                Edge::V(x, y) => ((x, y), (x, y + 1)),
            };
            *b.entry(to).or_insert(0) += c;
            *b.entry(from).or_insert(0) -= c;
        }
        b.into_iter().find(|(_, c)| *c != 0).map(|(p, _)| p)
    }
}

/// Integer 2-chain: the cell [a, a + 1] × [b, b + 1] is keyed by (a, b).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LatticeChain {
    cells: BTreeMap<(i64, i64), i64>,
}

impl LatticeChain {
    pub fn cells(&self) -> &BTreeMap<(i64, i64), i64> {
        &self.cells
    }

    pub fn mass(&self) -> i64 {
        self.cells.values().map(|c| c.abs()).sum()
    }

    /// Boundary with cells oriented counterclockwise.
    pub fn boundary(&self) -> LatticeCycle {
        let mut z = LatticeCycle::default();
        for (&(a, b), &c) in &self.cells {
            z.add_edge(Edge::H(a, b), c);
            z.add_edge(Edge::V(a + 1, b), c);
            z.add_edge(Edge::H(a, b + 1), -c);
            z.add_edge(Edge::V(a, b), -c);
        }
        z
    }

    /// Number of cells with coefficient at least `i`.
    pub fn level_count(&self, i: i64) -> usize {
        self.cells.values().filter(|&&c| c >= i).count()
    }

    pub fn max_coefficient(&self) -> i64 {
        self.cells.values().copied().max().unwrap_or(0)
    }
}

/// The compactly supported 2-chain with boundary `z`; each cell gets the
/// winding number of `z` around its centre.
pub fn fill_cycle(z: &LatticeCycle) -> Result<LatticeChain, GeomError> {
    if let Some(p) = z.boundary_defect() {
        return Err(GeomError::NotACycle(p.0, p.1));
    }
    // c(a, b) = Σ_{h ≤ b} z(H(a, h)), accumulated column by column
    let mut columns: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
    for (&e, &c) in z.edges() {
        if let Edge::H(a, h) = e {
            columns.entry(a).or_default().push((h, c));
        }
    }
    let mut cells = BTreeMap::new();
    for (a, mut hs) in columns {
        hs.sort_unstable();
        let mut acc = 0;
        for (k, &(h, c)) in hs.iter().enumerate() {
            acc += c;
            let next = hs.get(k + 1).map(|x| x.0);
            if acc != 0 {
                let until = next.expect("a cycle closes every column");
                for b in h..until {
                    cells.insert((a, b), acc);
                }
            }
        }
    }
    let chain = LatticeChain { cells };
    debug_assert_eq!(chain.boundary(), *z);
    Ok(chain)
}

/// Right-hand side Σ_{i ≥ 1} 4 √#c(i) of the ℓ∞ isoperimetric chain bound.
pub fn isoperimetric_sum(c: &LatticeChain) -> f64 {
    (1..=c.max_coefficient())
        .map(|i| 4.0 * (c.level_count(i) as f64).sqrt())
        .sum()
}

/// Calls `visit` on every closed cyclically reduced loop from the origin of
/// length at most `max_len`.
pub fn for_each_reduced_loop(max_len: usize, mut visit: impl FnMut(&[Step])) {
    fn go(path: &mut Vec<Step>, pos: (i64, i64), left: usize, visit: &mut dyn FnMut(&[Step])) {
        if pos == (0, 0) && !path.is_empty() && path[0] != path[path.len() - 1].inverse() {
            visit(path);
        }
        if left == 0 {
            return;
        }
        for s in Step::ALL {
            if path.last() == Some(&s.inverse()) {
                continue;
            }
            let d = s.delta();
            let q = (pos.0 + d.0, pos.1 + d.1);
            if (q.0.abs() + q.1.abs()) as usize > left - 1 {
                continue;
            }
            path.push(s);
            go(path, q, left - 1, visit);
            path.pop();
        }
    }
    go(&mut Vec::new(), (0, 0), max_len, &mut visit);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(text: &str) -> LatticeLoop {
        LatticeLoop::parse((0, 0), text).unwrap()
    }

    #[test]
    fn closed_form_types() {
        assert_eq!(
            ahlfors_classify(&RadialProfile::Euclidean).verdict,
            ConformalType::Parabolic
        );
        assert_eq!(
            ahlfors_classify(&RadialProfile::Euclidean).numerical,
            ConformalType::Parabolic
        );
        assert_eq!(
            ahlfors_classify(&RadialProfile::Hyperbolic).numerical,
            ConformalType::Hyperbolic
        );
        assert_eq!(
            ahlfors_classify(&RadialProfile::InverseSquare).numerical,
            ConformalType::Hyperbolic
        );
        let pl = ahlfors_classify(&RadialProfile::PowerLog { epsilon: 0.5 });
        assert_eq!(
            (pl.verdict, pl.numerical),
            (ConformalType::Hyperbolic, ConformalType::Hyperbolic)
        );
    }

    #[test]
    fn spiky_plane_circumference_is_parabolic() {
        let samples: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let r = 2f64.powf(1.0 + 39.0 * i as f64 / 400.0);
                (r, 3.0 * r * r.ln())
            })
            .collect();
        let p = RadialProfile::tabulated(samples).unwrap();
        let rep = ahlfors_classify(&p);
        assert_eq!(rep.verdict, ConformalType::Parabolic);
        assert!(rep.trace_table().lines().count() > TAIL_WINDOWS);
    }

    #[test]
    fn milnor_examples() {
        let flat: Vec<(f64, f64)> = (2..200).map(|r| (r as f64, 0.0)).collect();
        assert_eq!(milnor_classify(&flat).unwrap().verdict, ConformalType::Parabolic);
        let inv = sample_curvature(&RadialProfile::InverseSquare, 2.0, 1e6, 200).unwrap();
        assert_eq!(milnor_classify(&inv).unwrap().verdict, ConformalType::Hyperbolic);
        let half: Vec<(f64, f64)> = (2..200)
            .map(|r| {
                let r = r as f64;
                (r, -1.0 / (2.0 * r * r * r.ln()))
            })
            .collect();
        assert_eq!(milnor_classify(&half).unwrap().verdict, ConformalType::Parabolic);
        assert_eq!(
            milnor_classify(&[(1.0, 0.0), (2.0, 0.0)]),
            Err(GeomError::RadiusTooSmall(1.0))
        );
    }

    #[test]
    fn curvature_oracles() {
        let h = 1e-3;
        let grid = |f: fn(f64) -> f64| -> Vec<(f64, f64)> {
            (0..2000).map(|i| (0.5 + i as f64 * h, f(0.5 + i as f64 * h))).collect()
        };
        for (k, kexp) in [
            (curvature_from_profile(&grid(|r| r), 1e-2).unwrap(), 0.0),
            (curvature_from_profile(&grid(f64::sinh), 1e-2).unwrap(), -1.0),
            (curvature_from_profile(&grid(f64::sin), 1e-2).unwrap(), 1.0),
        ] {
            assert!(k.iter().all(|(_, v)| (v - kexp).abs() < 1e-4));
        }
        assert!(matches!(
            curvature_from_profile(&grid(|r| r), 1e-4),
            Err(GeomError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn cylinder_volume() {
        let s: Vec<(f64, f64)> = (0..=100).map(|i| (i as f64 / 100.0, 1.0)).collect();
        assert!((revolution_volume(&s, 2).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn nodule_profile_hits_its_extrema() {
        let p = NoduleProfile::new(3).unwrap();
        for q in 1..6 {
            assert!((p.rho(q as f64) - p.minimum(q)).abs() < 1e-12);
            assert!((p.rho(q as f64 + 0.5) - p.maximum(q)).abs() < 1e-12);
            let s = p.samples(q as f64, q as f64 + 1.0 - 1e-12, 4000);
            let mean = s.iter().map(|x| x.1).sum::<f64>() / s.len() as f64;
            assert!((mean / p.maximum(q) - p.mean_ratio).abs() < 1e-3);
        }
    }

    #[test]
    fn loop_reduction_and_turning() {
        let square = sq("ENWS");
        assert_eq!(square.reduce(), square);
        assert!(sq("EENNWWSS").reduce().is_reduced());
        assert!(sq("ENSW").reduce().is_empty());
        assert_eq!(sq("ENNSWS").reduce().word(), "ENWS");
        assert_eq!(turning_number(&square).unwrap(), Ratio::from_integer(1));
        assert_eq!(turning_number(&square.reversed()).unwrap(), Ratio::from_integer(-1));
        assert_eq!(turning_number(&sq("EENWWS")).unwrap(), Ratio::from_integer(1));
        assert_eq!(turning_number(&sq("")), Err(GeomError::EmptyLoop));
        assert!(matches!(turning_number(&sq("ENSW")), Err(GeomError::NotReduced(_))));
        assert!(LatticeLoop::parse((0, 0), "EN").is_err());
    }

    #[test]
    fn fill_examples() {
        let c = fill_cycle(&LatticeCycle::from_loop(&sq("ENWS"))).unwrap();
        assert_eq!(c.cells().iter().collect::<Vec<_>>(), vec![(&(0, 0), &1)]);
        let mut twice = LatticeCycle::from_loop(&sq("ENWS"));
        twice.add_loop(&sq("ENWS"), 1);
        let c = fill_cycle(&twice).unwrap();
        assert_eq!((c.mass(), c.max_coefficient()), (2, 2));
        let l = fill_cycle(&LatticeCycle::from_loop(&sq("EENWNWSS"))).unwrap();
        assert_eq!(
            l.cells().keys().copied().collect::<Vec<_>>(),
            vec![(0, 0), (0, 1), (1, 0)]
        );
        assert!(l.cells().values().all(|&c| c == 1));
        let mut open = LatticeCycle::default();
        open.add_edge(Edge::H(0, 0), 1);
        assert_eq!(fill_cycle(&open), Err(GeomError::NotACycle(0, 0)));
    }

    #[test]
    fn square_relative_turning() {
        // a loop around the square [−1, 1]² with an inward dent
        let outer = LatticeLoop::parse((-2, -2), "EEEENNNNWWWWSSSS").unwrap();
        assert_eq!(turning_number_rel_square(&outer, 1).unwrap(), Ratio::from_integer(1));
        let wiggle = LatticeLoop::parse((-2, 0), "ENESEENNWWWWSS").unwrap();
        assert_eq!(turning_number_rel_square(&wiggle, 1).unwrap(), Ratio::from_integer(1));
        let inside = LatticeLoop::parse((0, 0), "ENWS").unwrap();
        assert_eq!(turning_number_rel_square(&inside, 1), Err(GeomError::EmptyLoop));
    }

    #[test]
    fn loop_enumeration_counts() {
        let mut by_len = [0usize; 7];
        for_each_reduced_loop(6, |p| by_len[p.len()] += 1);
        // the unit square in 4 rotations × 2 orientations, for each of 4
        // starting corners relative to the origin; length 6 gives 2×1 rectangles
        assert_eq!(by_len[4], 8);
        assert_eq!(by_len[2], 0);
        assert_eq!(by_len[6], 24);
    }
}
