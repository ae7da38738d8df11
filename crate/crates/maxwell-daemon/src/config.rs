//! Run configurations. Keys mirror the library field names; unknown keys are rejected.

use std::f64::consts::PI;

use maxwell_daemon_core::classical::{ClassicalEnsemble, Particle};
use maxwell_daemon_core::dielectric::InverseProblemSpec;
use maxwell_daemon_core::em::{BilayerStack, Layer, ModeOptions};
use maxwell_daemon_core::greens::{ContainerSpec, Perturbation};
use maxwell_daemon_core::lattice::DaemonConfig;
use maxwell_daemon_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::RunError;

/// Parse TOML text; diagnostics carry the line and column of the offending key.
pub fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, RunError> {
    toml::from_str(text).map_err(|e| RunError::Config(format!("{origin}: {e}")))
}

pub fn to_toml<T: Serialize>(cfg: &T) -> Result<String, RunError> {
    toml::to_string(cfg).map_err(|e| RunError::Config(format!("cannot serialize config: {e}")))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn bad(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Boltzmann,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeRunConfig {
    pub half_size: usize,
    pub upsilon0: f64,
    #[serde(rename = "kappa_R")]
    pub kappa_r: f64,
    #[serde(rename = "kappa_D", default = "pi")]
    pub kappa_d: f64,
    pub state: InitialState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// A sweep: one entropy trace per value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default)]
    pub tau_start: f64,
    pub tau_end: f64,
    pub n_frames: usize,
    /// Keep every `carpet_stride`-th frame in carpet.csv.
    #[serde(default = "one_usize")]
    pub carpet_stride: usize,
}

fn pi() -> f64 {
    PI
}
fn one_usize() -> usize {
    1
}

impl LatticeRunConfig {
    pub fn daemon(&self) -> Result<DaemonConfig, RunError> {
        Ok(DaemonConfig::new(self.half_size, self.upsilon0, self.kappa_r, self.kappa_d)?)
    }

    pub fn taus(&self) -> Vec<f64> {
        linspace(self.tau_start, self.tau_end, self.n_frames)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.daemon()?;
        if self.n_frames == 0 || !(self.tau_end >= self.tau_start) || !self.tau_end.is_finite() {
            return Err(bad("need n_frames >= 1 and tau_start <= tau_end"));
        }
        if self.carpet_stride == 0 {
            return Err(bad("carpet_stride must be at least 1"));
        }
        match (self.state, &self.beta, &self.betas) {
            (InitialState::Boltzmann, Some(_), Some(_)) => Err(bad("give either beta or betas, not both")),
            (InitialState::Boltzmann, None, None) => Err(bad("boltzmann state needs beta or betas")),
            (InitialState::Boltzmann, _, Some(b)) if b.is_empty() => Err(bad("betas is empty")),
            (InitialState::Uniform, None, None) => Ok(()),
            (InitialState::Uniform, _, _) => Err(bad("uniform state takes no beta")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Daemon,
    Approximate,
    Zero,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreensConfig {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub truncation: usize,
    #[serde(rename = "P_R")]
    pub p_r: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Scales the daemon blocks; 0 leaves the bare container.
    #[serde(default = "one")]
    pub coupling: f64,
    pub perturbation: PerturbationKind,
    /// Strength of the local delta for `perturbation = "constant"`.
    #[serde(rename = "V0", default)]
    pub v0: f64,
    pub x: Vec<f64>,
    pub xp: Vec<f64>,
    pub e_min: f64,
    pub e_max: f64,
    pub n_e: usize,
    /// Pole search range; defaults to the evaluation range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pole_e_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pole_e_max: Option<f64>,
}

fn default_eta() -> f64 {
    1e-6
}

impl GreensConfig {
    pub fn spec(&self) -> Result<ContainerSpec, RunError> {
        Ok(ContainerSpec::new(self.length, self.truncation, self.p_r, self.eta)?.with_coupling(self.coupling))
    }

    pub fn perturbation(&self) -> Perturbation {
        match self.perturbation {
            PerturbationKind::Daemon => Perturbation::Daemon,
            PerturbationKind::Approximate => Perturbation::Approximate,
            PerturbationKind::Zero => Perturbation::Zero,
            PerturbationKind::Constant => Perturbation::Constant(self.v0),
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        linspace(self.e_min, self.e_max, self.n_e)
    }

    pub fn pole_range(&self) -> (f64, f64) {
        (self.pole_e_min.unwrap_or(self.e_min), self.pole_e_max.unwrap_or(self.e_max))
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let spec = self.spec()?;
        let half = 0.5 * spec.length;
        if self.x.iter().chain(&self.xp).any(|v| !(v.abs() <= half)) {
            return Err(bad(format!("x and xp must lie in [-{half}, {half}]")));
        }
        if self.x.is_empty() || self.xp.is_empty() || self.n_e == 0 {
            return Err(bad("need at least one x, one xp and n_e >= 1"));
        }
        if !(self.e_min <= self.e_max) {
            return Err(bad("need e_min <= e_max"));
        }
        let (lo, hi) = self.pole_range();
        if !(lo < hi) {
            return Err(bad("pole search range is empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleInit {
    /// Slow particles moving right in `x > 0` and fast particles moving left in `x < 0`,
    /// both uniform over the quadrant.
    Quadrants,
    /// Uniform in the box with `P_UV < |p| < p_max`.
    AboveCutoff,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    #[serde(rename = "P_R")]
    pub p_r: f64,
    #[serde(rename = "P_UV")]
    pub p_uv: f64,
    #[serde(rename = "x_L")]
    pub x_l: f64,
    pub n_particles: usize,
    pub seed: u64,
    pub init: EnsembleInit,
    /// Smallest `|p|` drawn for `quadrants`.
    #[serde(default)]
    pub p_min: f64,
    /// Largest `|p|` drawn; defaults to `P_UV` (or `2 P_UV` above the cutoff).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "one_usize")]
    pub snapshot_every: usize,
    /// Export every `trajectory_stride`-th particle.
    #[serde(default = "one_usize")]
    pub trajectory_stride: usize,
}

impl ClassicalConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        if self.snapshot_every == 0 || self.trajectory_stride == 0 {
            return Err(bad("snapshot_every and trajectory_stride must be at least 1"));
        }
        if !(self.dt > 0.0) {
            return Err(bad("dt must be positive"));
        }
        if !(self.p_min >= 0.0) {
            return Err(bad("p_min must be non-negative"));
        }
        if let Some(p) = self.p_max {
            let floor = match self.init {
                EnsembleInit::AboveCutoff => self.p_uv,
                _ => self.p_min,
            };
            if !(p > floor && p.is_finite()) {
                return Err(bad(format!("p_max = {p} must exceed {floor}")));
            }
        }
        Ok(())
    }

    /// Deterministic in `seed`.
    pub fn ensemble(&self) -> Result<ClassicalEnsemble, RunError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut ps = Vec::with_capacity(self.n_particles);
        match self.init {
            EnsembleInit::Empty => {}
            EnsembleInit::Quadrants => {
                let hi = self.p_max.unwrap_or(self.p_uv);
                for _ in 0..self.n_particles {
                    let x = self.x_l * (1.0 - rng.random::<f64>());
                    let p = self.p_min + (hi - self.p_min) * (1.0 - rng.random::<f64>());
                    if p < self.p_r {
                        ps.push(Particle { x, p });
                    } else {
                        ps.push(Particle { x: -x, p: -p });
                    }
                }
            }
            EnsembleInit::AboveCutoff => {
                let hi = self.p_max.unwrap_or(2.0 * self.p_uv);
                for _ in 0..self.n_particles {
                    let x = self.x_l * (2.0 * rng.random::<f64>() - 1.0);
                    let p = hi - (hi - self.p_uv) * rng.random::<f64>();
                    let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    ps.push(Particle { x, p: s * p });
                }
            }
        }
        Ok(ClassicalEnsemble::new(ps, self.p_r, self.p_uv, self.x_l)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonConfig {
    pub omega_over_c: Vec<f64>,
    /// Multiply every `*_over_c` value by pi.
    #[serde(default)]
    pub scale_by_pi: bool,
    #[serde(rename = "omega_R_over_c")]
    pub omega_r_over_c: f64,
    #[serde(rename = "omega_UV_over_c", default, skip_serializing_if = "Option::is_none")]
    pub omega_uv_over_c: Option<f64>,
    #[serde(default = "one")]
    pub mu_r: f64,
    /// `[re, im]`.
    pub eps0: [f64; 2],
    pub deps0: [f64; 2],
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_refine")]
    pub max_refine: u32,
    /// Add the closed-form small-deviation profile as extra columns.
    #[serde(default)]
    pub harmonic_compare: bool,
}

fn default_step() -> f64 {
    1e-3
}
fn default_tol() -> f64 {
    1e-8
}
fn default_refine() -> u32 {
    12
}

impl EpsilonConfig {
    fn scale(&self) -> f64 {
        if self.scale_by_pi {
            PI
        } else {
            1.0
        }
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.omega_over_c.iter().map(|w| w * self.scale()).collect()
    }

    pub fn spec(&self, omega_over_c: f64) -> InverseProblemSpec {
        let mut s = InverseProblemSpec::new(
            omega_over_c,
            self.omega_r_over_c * self.scale(),
            Complex64::new(self.eps0[0], self.eps0[1]),
            Complex64::new(self.deps0[0], self.deps0[1]),
            linspace(self.x_min, self.x_max, self.n_x),
        );
        s.omega_uv_over_c = self.omega_uv_over_c.map_or(f64::INFINITY, |w| w * self.scale());
        s.mu_r = self.mu_r;
        s.step = self.step;
        s.tol = self.tol;
        s.max_refine = self.max_refine;
        s
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.omega_over_c.is_empty() {
            return Err(bad("omega_over_c is empty"));
        }
        if self.n_x < 2 || !(self.x_min < self.x_max) {
            return Err(bad("need n_x >= 2 and x_min < x_max"));
        }
        for w in self.omegas() {
            self.spec(w).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub omega_p: f64,
    pub omega_0: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmConfig {
    pub b: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(default = "one")]
    pub mu_r: f64,
    #[serde(default)]
    pub xi2: f64,
    pub n_modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keep: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_iter")]
    pub max_iter: usize,
    #[serde(default = "default_min_den")]
    pub min_denominator: f64,
    /// Keep the logarithmic-derivative couplings in the transcendental part.
    #[serde(default = "yes")]
    pub log_terms: bool,
    /// Initial coefficients over the Neumann basis; defaults to `(1, 0, ..., 0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_init: Option<Vec<f64>>,
    #[serde(default)]
    pub tau_start: f64,
    pub tau_end: f64,
    pub n_tau: usize,
    pub n_x: usize,
    /// Also write mode_vectors.csv.
    #[serde(default)]
    pub write_vectors: bool,
    /// Ordered `k = -N ..= N`; empty for a bare cavity.
    #[serde(default)]
    pub layers: Vec<LayerConfig>,
}

fn default_iter() -> usize {
    50
}
fn default_min_den() -> f64 {
    1e-3
}

impl EmConfig {
    pub fn stack(&self) -> BilayerStack {
        BilayerStack {
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    omega_p: l.omega_p,
                    omega_0: l.omega_0,
                    gamma: l.gamma,
                })
                .collect(),
            b: self.b,
            length: self.length,
            mu_r: self.mu_r,
            xi2: self.xi2,
        }
    }

    pub fn options(&self) -> ModeOptions {
        ModeOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            min_denominator: self.min_denominator,
            keep: self.keep,
        }
    }

    pub fn b_vector(&self) -> Vec<f64> {
        match &self.b_init {
            Some(b) => b.clone(),
            None => {
                let mut b = vec![0.0; self.n_modes];
                if let Some(first) = b.first_mut() {
                    *first = 1.0;
                }
                b
            }
        }
    }

    pub fn taus(&self) -> Vec<f64> {
        linspace(self.tau_start, self.tau_end, self.n_tau)
    }

    pub fn x_grid(&self) -> Vec<f64> {
        linspace(0.0, self.length, self.n_x)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.stack().validate()?;
        if self.n_modes == 0 {
            return Err(bad("n_modes must be at least 1"));
        }
        if self.b_vector().len() != self.n_modes {
            return Err(bad(format!("b_init needs {} entries", self.n_modes)));
        }
        if self.n_tau == 0 || self.n_x < 2 || !(self.tau_end >= self.tau_start) {
            return Err(bad("need n_tau >= 1, n_x >= 2 and tau_start <= tau_end"));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(bad("need tol > 0 and max_iter >= 1"));
        }
        Ok(())
    }
}
