//! TOML experiment configs.
//!
//! Every struct rejects unknown keys, so a typo fails the run with exit
//! code 2 instead of silently falling back to a default. All fields have
//! defaults; `bloomlab <cmd>` with no `--config` runs a sensible small
//! batch. Schema reference lives in the README.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use bloomlab_core::{Ext, FormParams, Mesh};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 17;

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

/// An exponent that may be ∞: a number or the string "inf".
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtSpec {
    Num(f64),
    Word(String),
}

impl ExtSpec {
    pub fn to_ext(&self) -> Result<Ext> {
        match self {
            ExtSpec::Num(x) if x.is_finite() && *x > 0.0 => Ok(Ext::Finite(*x)),
            ExtSpec::Num(x) => bail!("exponent must be positive and finite, got {x}"),
            ExtSpec::Word(w) if w.eq_ignore_ascii_case("inf") => Ok(Ext::Inf),
            ExtSpec::Word(w) => bail!("exponent must be a number or \"inf\", got {w:?}"),
        }
    }

    pub fn label(&self) -> String {
        match self.to_ext() {
            Ok(Ext::Inf) => "inf".into(),
            Ok(Ext::Finite(x)) => format!("{x}"),
            Err(_) => "invalid".into(),
        }
    }
}

fn ext_inf() -> ExtSpec {
    ExtSpec::Word("inf".into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSpec {
    /// "uniform" or "graded".
    pub kind: String,
    pub dim: u32,
    pub depth: u32,
    pub bands: u32,
    pub per_band: u32,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            kind: "uniform".into(),
            dim: 1,
            depth: 8,
            bands: 40,
            per_band: 16,
        }
    }
}

impl MeshSpec {
    pub fn build(&self) -> Result<Arc<Mesh>> {
        let mesh = match self.kind.as_str() {
            "uniform" => Mesh::uniform(self.dim, self.depth)?,
            "graded" => Mesh::graded(self.bands, self.per_band)?,
            other => bail!("mesh kind must be \"uniform\" or \"graded\", got {other:?}"),
        };
        Ok(Arc::new(mesh))
    }

    /// `--depth` overrides the refinement knob: depth for uniform
    /// meshes, band count for graded ones.
    pub fn override_depth(&mut self, d: u32) {
        match self.kind.as_str() {
            "graded" => self.bands = d,
            _ => self.depth = d,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub mesh: MeshSpec,
    pub instances: u64,
    /// Haar-band series knobs for the random weights.
    pub amp: f64,
    pub rho: f64,
    pub p: Vec<f64>,
    pub rh: Vec<f64>,
    /// Optional symmetric-bracket probes (p, r, s) with r < p < s.
    pub sym: Vec<SymSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymSpec {
    pub p: f64,
    pub r: f64,
    #[serde(default = "ext_inf")]
    pub s: ExtSpec,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            seed: None,
            out: None,
            mesh: MeshSpec::default(),
            instances: 50,
            amp: 0.6,
            rho: 0.75,
            p: vec![1.5, 2.0, 3.0],
            rh: vec![2.0],
            sym: vec![],
        }
    }
}

impl ConstantsConfig {
    pub fn validate(&self) -> Result<()> {
        self.mesh.build()?;
        if self.instances == 0 {
            bail!("instances must be positive");
        }
        for &p in &self.p {
            if !(p > 1.0) {
                bail!("A_p needs p > 1, got {p}");
            }
        }
        for &r in &self.rh {
            if !(r >= 1.0) {
                bail!("RH_r needs r >= 1, got {r}");
            }
        }
        for sym in &self.sym {
            let s = sym.s.to_ext()?;
            if !(sym.r > 0.0 && sym.r < sym.p) || !s.gt(sym.p) {
                bail!("symmetric bracket needs 0 < r < p < s");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentsConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub p: Vec<f64>,
    /// Defaults to the diagonal q = p.
    pub q: Option<Vec<f64>>,
    pub m: Vec<u32>,
    pub r: f64,
    pub s: ExtSpec,
    /// Fractional-form exponents to evaluate at each (q, r, s).
    pub alpha: Vec<f64>,
}

impl Default for ExponentsConfig {
    fn default() -> Self {
        ExponentsConfig {
            seed: None,
            out: None,
            p: vec![1.1, 1.5, 2.0, 3.0, 8.0],
            q: None,
            m: vec![1, 2, 3, 4, 5],
            r: 1.0,
            s: ext_inf(),
            alpha: vec![],
        }
    }
}

impl ExponentsConfig {
    pub fn validate(&self) -> Result<()> {
        let s = self.s.to_ext()?;
        if self.p.is_empty() || self.m.is_empty() {
            bail!("p and m lists must be nonempty");
        }
        for &p in &self.p {
            let qs = self.q.clone().unwrap_or_else(|| vec![p]);
            for q in qs {
                for &m in &self.m {
                    FormParams::new(self.r, s, p, q, m)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    /// "lambda": μ ≡ 1 and the power law sits on λ; "mu": the reverse.
    pub side: String,
    pub p: f64,
    /// δ = 2^{-k} for each listed k.
    pub delta_log2: Vec<u32>,
    pub bands: u32,
    pub per_band: u32,
    /// Re-run the smallest δ with 8 extra bands and record the relative
    /// change of R — the convergence gate.
    pub refine_check: bool,
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        SharpnessConfig {
            seed: None,
            out: None,
            side: "lambda".into(),
            p: 2.0,
            delta_log2: vec![3, 4, 5, 6, 7, 8],
            bands: 40,
            per_band: 16,
            refine_check: false,
        }
    }
}

impl SharpnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.side != "lambda" && self.side != "mu" {
            bail!("side must be \"lambda\" or \"mu\", got {:?}", self.side);
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            bail!("sharpness needs p in (1, inf), got {}", self.p);
        }
        if self.delta_log2.is_empty() {
            bail!("delta_log2 must be nonempty");
        }
        if self.delta_log2.iter().any(|&k| k == 0 || k > 60) {
            bail!("delta exponents must lie in 1..=60");
        }
        Mesh::graded(self.bands, self.per_band)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DominateConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    /// "hilbert", "martingale" or "zero".
    pub operator: String,
    pub m: u32,
    pub r: f64,
    pub s: ExtSpec,
    pub depth: u32,
    pub instances: u64,
    /// Symbol series knobs.
    pub amp: f64,
    pub rho: f64,
    /// Input spread for f, g.
    pub spread: f64,
}

impl Default for DominateConfig {
    fn default() -> Self {
        DominateConfig {
            seed: None,
            out: None,
            operator: "martingale".into(),
            m: 1,
            r: 1.0,
            s: ext_inf(),
            depth: 8,
            instances: 100,
            amp: 0.8,
            rho: 0.7,
            spread: 1.0,
        }
    }
}

impl DominateConfig {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.operator.as_str(), "hilbert" | "martingale" | "zero") {
            bail!("operator must be hilbert, martingale or zero, got {:?}", self.operator);
        }
        if self.m == 0 {
            bail!("m must be positive");
        }
        let s = self.s.to_ext()?;
        if !(self.r >= 1.0) || !s.gt(self.r) {
            bail!("domination needs 1 <= r < s");
        }
        if self.instances == 0 {
            bail!("instances must be positive");
        }
        Mesh::uniform(1, self.depth)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormBoundConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: ExtSpec,
    pub m: u32,
    pub depth: u32,
    pub instances: u64,
    /// Weight series knobs (μ and λ).
    pub amp: f64,
    pub rho: f64,
    /// Symbol series knobs.
    pub amp_b: f64,
    pub rho_b: f64,
    pub spread: f64,
    /// Replace the random symbol by a constant — the degenerate check
    /// that the form itself vanishes.
    pub constant_b: bool,
}

impl Default for FormBoundConfig {
    fn default() -> Self {
        FormBoundConfig {
            seed: None,
            out: None,
            p: 2.0,
            q: 2.0,
            r: 1.0,
            s: ext_inf(),
            m: 1,
            depth: 6,
            instances: 200,
            amp: 0.5,
            rho: 0.7,
            amp_b: 0.8,
            rho_b: 0.7,
            spread: 1.0,
            constant_b: false,
        }
    }
}

impl FormBoundConfig {
    pub fn params(&self) -> Result<FormParams> {
        Ok(FormParams::new(self.r, self.s.to_ext()?, self.p, self.q, self.m)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        if self.instances == 0 {
            bail!("instances must be positive");
        }
        Mesh::uniform(1, self.depth)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestingConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub depth: u32,
    pub instances: u64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: ExtSpec,
    /// Extra random ascent starts beyond the constant pair.
    pub restarts: u32,
    /// Coefficient density on the stopping family.
    pub density: f64,
    pub amp: f64,
    pub rho: f64,
    /// Prepend the single-cube analytic instance (λ = 1 on the root,
    /// both weights ≡ 1), whose constants are known exactly.
    pub analytic: bool,
}

impl Default for TestingConfig {
    fn default() -> Self {
        TestingConfig {
            seed: None,
            out: None,
            depth: 6,
            instances: 100,
            p: 2.0,
            q: 2.0,
            r: 1.0,
            s: ExtSpec::Num(4.0),
            restarts: 2,
            density: 0.5,
            amp: 0.5,
            rho: 0.7,
            analytic: true,
        }
    }
}

impl TestingConfig {
    pub fn validate(&self) -> Result<()> {
        let s = self.s.to_ext()?;
        if !(1.0 < self.p && self.p <= self.q) || !s.gt(self.q) {
            bail!("testing needs 1 < p <= q < s");
        }
        if !(self.r > 0.0 && self.r < self.p) {
            bail!("testing needs r in (0, p)");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            bail!("density must lie in (0, 1]");
        }
        if self.instances == 0 {
            bail!("instances must be positive");
        }
        Mesh::uniform(1, self.depth)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmasConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    /// two | cov | coveq | fh | fs | duality | oscsparse
    pub which: String,
    pub instances: u64,
    pub depth: u32,
    /// Exponent list for cov/coveq/duality/fs (entries must exceed 1
    /// where the lemma demands it; cov and coveq accept p = 1).
    pub p: Vec<f64>,
    /// Lemma `two` draws m uniformly in 1..=m_max and r, t from the
    /// choice lists.
    pub m_max: u32,
    pub r_choices: Vec<f64>,
    pub t_choices: Vec<f64>,
    /// Packing exponents for fh (alpha > 0, alpha+beta+gamma >= 1).
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Maximal-function bump for fs, in (0, 1).
    pub delta: f64,
    pub density: f64,
    pub amp: f64,
    pub rho: f64,
    pub spread: f64,
}

impl Default for LemmasConfig {
    fn default() -> Self {
        LemmasConfig {
            seed: None,
            out: None,
            which: "two".into(),
            instances: 1000,
            depth: 6,
            p: vec![1.0, 1.5, 2.0, 3.0],
            m_max: 4,
            r_choices: vec![1.0, 1.5, 2.0],
            t_choices: vec![1.0, 1.5, 2.0],
            alpha: 0.5,
            beta: 0.25,
            gamma: 0.5,
            delta: 0.5,
            density: 0.3,
            amp: 0.6,
            rho: 0.7,
            spread: 1.0,
        }
    }
}

impl LemmasConfig {
    pub fn validate(&self) -> Result<()> {
        const WHICH: [&str; 7] = ["two", "cov", "coveq", "fh", "fs", "duality", "oscsparse"];
        if !WHICH.contains(&self.which.as_str()) {
            bail!("which must be one of {WHICH:?}, got {:?}", self.which);
        }
        if self.instances == 0 {
            bail!("instances must be positive");
        }
        if self.which == "two" {
            if self.m_max == 0 {
                bail!("m_max must be positive");
            }
            if self.r_choices.iter().chain(&self.t_choices).any(|&x| x < 1.0) {
                bail!("r and t choices must be >= 1");
            }
            if self.r_choices.is_empty() || self.t_choices.is_empty() {
                bail!("r_choices and t_choices must be nonempty");
            }
        }
        if matches!(self.which.as_str(), "cov" | "coveq" | "duality" | "fs") && self.p.is_empty() {
            bail!("p list must be nonempty for {}", self.which);
        }
        if self.which == "duality" && self.p.iter().any(|&p| p <= 1.0) {
            bail!("duality needs p > 1 throughout");
        }
        if self.which == "fh" {
            if !(self.alpha > 0.0) || self.beta < 0.0 || self.gamma < 0.0 {
                bail!("fh needs alpha > 0 and beta, gamma >= 0");
            }
            if self.alpha + self.beta + self.gamma < 1.0 {
                bail!("fh needs alpha + beta + gamma >= 1");
            }
        }
        if self.which == "fs" && !(self.delta > 0.0 && self.delta < 1.0) {
            bail!("fs needs delta in (0, 1)");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            bail!("density must lie in (0, 1]");
        }
        Mesh::uniform(1, self.depth)?;
        Ok(())
    }
}
