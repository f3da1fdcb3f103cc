//! The obstruction battery: runs every necessary condition on a descriptor,
//! then optionally searches for an embedding of its cohomology.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::descriptor::{parse_descriptor, ManifoldDescriptor, Pi1Descriptor};
use crate::embed::{self, Check, SearchOutcome, Verdict, CITE_EMBEDDING, CITE_FOUR};
use crate::Error;

pub const CITE_GROWTH: &str = "π₁ of an elliptic n-manifold has polynomial growth of degree at most n";
pub const CITE_VIRTUALLY_ABELIAN: &str =
    "a closed elliptic manifold with nilpotent π₁ has virtually abelian π₁; the Nomizu model of a nonabelian nilmanifold kills degree-1 products";

#[derive(Clone, Debug)]
pub struct BatteryOptions {
    /// Target dimension of the exterior algebra; defaults to the manifold dimension.
    pub target_n: Option<usize>,
    pub search: bool,
    pub budget: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self {
            target_n: None,
            search: true,
            budget: 32,
            seed: 0,
            tolerance: embed::RESIDUAL_TOLERANCE,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overall {
    NoObstructionFound,
    ExcludedWithWitness,
}

impl Overall {
    pub fn as_str(self) -> &'static str {
        match self {
            Overall::NoObstructionFound => "no-obstruction-found",
            Overall::ExcludedWithWitness => "excluded-with-witness",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub status: String,
    pub target_n: usize,
    pub stage: Option<String>,
    pub trial: Option<usize>,
    pub assignment: Vec<String>,
    pub residual: Option<f64>,
    pub fundamental_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatteryReport {
    pub name: String,
    pub n: u32,
    pub pi1: String,
    pub betti: Vec<usize>,
    pub euler_characteristic: i64,
    pub checks: Vec<Check>,
    pub overall: Overall,
    pub embedding: Option<EmbeddingReport>,
}

impl BatteryReport {
    pub fn failing(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.failed())
    }

    pub fn excluded(&self) -> bool {
        self.overall == Overall::ExcludedWithWitness
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let b: Vec<String> = self.betti.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "manifold: {} (n = {})", self.name, self.n);
        let _ = writeln!(s, "betti: {}  χ = {}", b.join(" "), self.euler_characteristic);
        let _ = writeln!(s, "pi1: {}", self.pi1);
        for c in &self.checks {
            let _ = writeln!(s, "[{}] {}: {}", c.verdict, c.name, c.detail);
            if let Some(w) = &c.witness {
                let _ = writeln!(s, "    witness: {w}");
            }
            if c.failed() {
                let _ = writeln!(s, "    by: {}", c.citation);
            }
        }
        let _ = writeln!(s, "overall: {}", self.overall.as_str());
        if let Some(e) = &self.embedding {
            let _ = write!(s, "embedding into Λ*ℝ^{}: {}", e.target_n, e.status);
            if let Some(stage) = &e.stage {
                let _ = write!(s, " ({stage})");
            }
            s.push('\n');
            if let Some(r) = e.residual {
                let _ = writeln!(
                    s,
                    "    residual {r:.3e}, |image of [M]| {:.3e}",
                    e.fundamental_norm.unwrap_or(0.0)
                );
            }
            for line in &e.assignment {
                let _ = writeln!(s, "    {line}");
            }
        }
        s
    }

    /// One line of the corpus verdict table.
    pub fn verdict_row(&self) -> String {
        let failing: Vec<&str> = self.failing().map(|c| c.name.as_str()).collect();
        format!(
            "{:<28} n={:<2} {:<22} {:<28} {}",
            self.name,
            self.n,
            self.overall.as_str(),
            self.embedding.as_ref().map_or("search-skipped", |e| e.status.as_str()),
            if failing.is_empty() {
                "-".to_string()
            } else {
                failing.join(",")
            },
        )
    }
}

fn check(name: &str, citation: &str, verdict: Verdict, detail: String, witness: Option<String>) -> Check {
    Check {
        name: name.into(),
        citation: citation.into(),
        verdict,
        detail,
        witness,
    }
}

fn pi1_checks(d: &ManifoldDescriptor) -> Result<Vec<Check>, Error> {
    let n = d.n as usize;
    let mut out = Vec::new();
    match &d.pi1 {
        Pi1Descriptor::Finite => out.push(check(
            "pi1-growth",
            CITE_GROWTH,
            Verdict::Pass,
            "finite π₁ has growth degree 0".into(),
            None,
        )),
        Pi1Descriptor::FreeAbelian(k) => out.push(check(
            "pi1-growth",
            CITE_GROWTH,
            if *k <= n { Verdict::Pass } else { Verdict::Fail },
            format!("ℤ^{k} has growth degree {k}"),
            (*k > n).then(|| format!("growth degree {k} > {n}")),
        )),
        Pi1Descriptor::Lie(g) => {
            let v = g.pi1_verdict(n)?;
            let growth_fails = v.growth_degree > n;
            out.push(check(
                "pi1-growth",
                CITE_GROWTH,
                if growth_fails { Verdict::Fail } else { Verdict::Pass },
                format!("Bass growth degree {} of the Mal'cev model", v.growth_degree),
                growth_fails.then(|| format!("growth degree {} > {n}", v.growth_degree)),
            ));
            let nomizu = g.nomizu_kernel()?;
            let detail = format!(
                "nilpotency class {}; H²(𝔤/γ₂) → H²(𝔤/γ₃) has kernel of dimension {} (dim γ₂ − dim γ₃ = {})",
                v.nilpotency_class, nomizu.kernel_dim, nomizu.expected
            );
            out.push(if v.abelian {
                check(
                    "pi1-virtually-abelian",
                    CITE_VIRTUALLY_ABELIAN,
                    Verdict::Pass,
                    detail,
                    None,
                )
            } else {
                check(
                    "pi1-virtually-abelian",
                    CITE_VIRTUALLY_ABELIAN,
                    Verdict::Fail,
                    detail,
                    Some(format!(
                        "π₁ nonabelian of class {}: {} independent products of degree-1 classes vanish",
                        v.nilpotency_class, nomizu.kernel_dim
                    )),
                )
            });
        }
        Pi1Descriptor::Other(s) => out.push(check(
            "pi1-growth",
            CITE_GROWTH,
            Verdict::Inconclusive,
            format!("no growth data for π₁ = {s}"),
            None,
        )),
    }
    Ok(out)
}

fn four_check(d: &ManifoldDescriptor, basis: &crate::algebra::GradedBasis) -> Check {
    let (bp, bm) = match d.betti.or_else(|| embed::intersection_signature(basis)) {
        Some(b) => b,
        None => {
            return check(
                "four-manifold",
                CITE_FOUR,
                Verdict::Inconclusive,
                "intersection form unavailable".into(),
                None,
            )
        }
    };
    match embed::fourmanifold_battery(bp, bm, &d.pi1.class()) {
        Ok(v) => {
            let detail = match &v.label {
                Some(l) => format!("{}; {l}", v.detail),
                None => v.detail.clone(),
            };
            let witness =
                (v.verdict == Verdict::Fail).then(|| format!("(b⁺, b⁻) = ({bp}, {bm}), π₁ {}", d.pi1.describe()));
            check("four-manifold", CITE_FOUR, v.verdict, detail, witness)
        }
        Err(e) => check("four-manifold", CITE_FOUR, Verdict::Inconclusive, e.to_string(), None),
    }
}

/// Runs, in order: π₁ checks, Euler characteristic, degree-1 subalgebra,
/// rank n − 1, the dimension bound, the 4-manifold checks when n = 4, and,
/// if nothing failed, the embedding search.
pub fn run_battery(d: &ManifoldDescriptor, opts: &BatteryOptions) -> Result<BatteryReport, Error> {
    let basis = d.cohomology.basis_and_dims()?;
    let pd = embed::poincare_check_with(&basis);
    if pd.failed() {
        return Err(Error::InvalidInput(format!(
            "cohomology of {} is not a Poincaré duality algebra: {}",
            d.name, pd.detail
        )));
    }
    let n = d.n as usize;
    let mut checks = pi1_checks(d)?;
    checks.push(embed::euler_obstruction_with(&basis));
    checks.push(embed::torus_subalgebra_check_with(&basis, n));
    checks.push(embed::rank_check_with(&basis));
    checks.push(embed::dimension_check_with(&basis, n));
    if n == 4 {
        checks.push(four_check(d, &basis));
    }
    let mut embedding = None;
    if opts.search && !checks.iter().any(Check::failed) {
        let target = opts.target_n.unwrap_or(n);
        let outcome = embed::search_embedding_with(&d.cohomology, target, opts.budget, opts.seed, opts.tolerance)?;
        let status = outcome.status().to_string();
        let report = match outcome {
            SearchOutcome::Certified { morphism, stage, trial } => EmbeddingReport {
                status,
                target_n: target,
                stage: Some(stage.into()),
                trial,
                assignment: morphism.describe(),
                residual: None,
                fundamental_norm: None,
            },
            SearchOutcome::Numerical {
                morphism,
                residual,
                fundamental_norm,
                trial,
            } => EmbeddingReport {
                status,
                target_n: target,
                stage: Some("least-squares".into()),
                trial: Some(trial),
                assignment: morphism.describe(),
                residual: Some(residual),
                fundamental_norm: Some(fundamental_norm),
            },
            SearchOutcome::NotFound {
                best_residual,
                obstruction,
            } => {
                if let Some(c) = obstruction {
                    checks.push(c);
                }
                EmbeddingReport {
                    status,
                    target_n: target,
                    stage: None,
                    trial: None,
                    assignment: Vec::new(),
                    residual: best_residual,
                    fundamental_norm: None,
                }
            }
        };
        let verdict = match report.status.as_str() {
            "found-certified" => Verdict::Pass,
            "not-found-obstructed" => Verdict::Fail,
            _ => Verdict::Inconclusive,
        };
        if verdict != Verdict::Fail {
            checks.push(check(
                "embedding-search",
                CITE_EMBEDDING,
                verdict,
                format!("search into Λ*ℝ^{target}: {}", report.status),
                None,
            ));
        }
        embedding = Some(report);
    }
    for c in checks.iter_mut().filter(|c| c.failed() && c.witness.is_none()) {
        c.witness = Some(c.detail.clone());
    }
    let overall = if checks.iter().any(Check::failed) {
        Overall::ExcludedWithWitness
    } else {
        Overall::NoObstructionFound
    };
    Ok(BatteryReport {
        name: d.name.clone(),
        n: d.n,
        pi1: d.pi1.describe(),
        betti: basis.ranks(),
        euler_characteristic: basis.euler_characteristic(),
        checks,
        overall,
        embedding,
    })
}

/// Runs the battery on every `*.toml` descriptor in `dir`, in file name order.
pub fn run_corpus(dir: &Path, opts: &BatteryOptions) -> Result<Vec<(String, BatteryReport)>, Error> {
    let entries = fs::read_dir(dir).map_err(|e| Error::InvalidInput(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    let mut out = Vec::with_capacity(files.len());
    for f in &files {
        let text = fs::read_to_string(f).map_err(|e| Error::InvalidInput(format!("{}: {e}", f.display())))?;
        let d = parse_descriptor(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", f.display())))?;
        let stem = f
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push((stem, run_battery(&d, opts)?));
    }
    Ok(out)
}

/// The corpus verdict table, one row per descriptor.
pub fn verdict_table(reports: &[(String, BatteryReport)]) -> String {
    let mut s = String::new();
    for (stem, r) in reports {
        let _ = writeln!(s, "{stem:<16} {}", r.verdict_row());
    }
    s
}
