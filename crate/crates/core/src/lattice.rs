//! Tight-binding lattice with the daemonic defect at site 0.
//!
//! Everything is in rescaled units: energies `Xi = 2 m a^2 E / hbar^2`,
//! times `tau = hbar t / (2 m a^2)`, strength `upsilon0 = m a^2 V0 / hbar^2`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DaemonConfig {
    pub half_size: usize,
    pub upsilon0: f64,
    pub kappa_r: f64,
    pub kappa_d: f64,
}

impl DaemonConfig {
    pub fn new(half_size: usize, upsilon0: f64, kappa_r: f64, kappa_d: f64) -> Result<Self> {
        let cfg = DaemonConfig {
            half_size,
            upsilon0,
            kappa_r,
            kappa_d,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_size < 1 {
            return Err(Error::Config("half_size must be >= 1".into()));
        }
        if !(self.upsilon0 >= 0.0 && self.upsilon0.is_finite()) {
            return Err(Error::Config(format!("upsilon0 = {} must be finite and >= 0", self.upsilon0)));
        }
        if !(self.kappa_r > 0.0 && self.kappa_r < self.kappa_d && self.kappa_d <= PI) {
            return Err(Error::Config(format!(
                "need 0 < kappa_r < kappa_d <= pi, got kappa_r = {}, kappa_d = {}",
                self.kappa_r, self.kappa_d
            )));
        }
        Ok(())
    }

    /// Number of sites, `2N + 1`.
    pub fn dim(&self) -> usize {
        2 * self.half_size + 1
    }

    /// Same lattice with the defect switched off.
    pub fn free(&self) -> Self {
        DaemonConfig {
            upsilon0: 0.0,
            ..*self
        }
    }

    /// Row index of site `n`.
    pub fn index(&self, n: i64) -> usize {
        (n + self.half_size as i64) as usize
    }

    pub fn site(&self, index: usize) -> i64 {
        index as i64 - self.half_size as i64
    }
}

/// Ascending eigenvalues with orthonormal, phase-fixed eigenvectors in the columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: DVector<f64>,
    pub vectors: DMatrix<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Normalizes on construction.
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("state has non-finite entries".into()));
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0) {
            return Err(Error::Domain("state has zero norm".into()));
        }
        Ok(StateVector {
            amplitudes: amplitudes / Complex64::from(norm),
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| Complex64::from(v)),
        ))
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }
}

/// Frames are stored time x site.
#[derive(Debug, Clone)]
pub struct WaveField {
    pub times: Vec<f64>,
    pub frames: DMatrix<Complex64>,
}

impl WaveField {
    pub fn frame(&self, t: usize) -> DVector<Complex64> {
        self.frames.row(t).transpose()
    }

    pub fn n_sites(&self) -> usize {
        self.frames.ncols()
    }
}

/// `(2 cos(kappa_R n) - 1 - e^{-i kappa_D n}) / (2 i pi n)` for `n != 0`,
/// its `n -> 0` limit `kappa_D / (2 pi)` otherwise.
fn band_transform(n: i64, kappa_r: f64, kappa_d: f64) -> Complex64 {
    if n == 0 {
        return Complex64::from(kappa_d / (2.0 * PI));
    }
    let nf = n as f64;
    let num = Complex64::from(2.0 * (kappa_r * nf).cos() - 1.0) - Complex64::from_polar(1.0, -kappa_d * nf);
    num / (2.0 * PI * nf * I)
}

/// Column-0 daemon entry `<n|H_d|0>` for `n != 0`.
pub fn daemon_column_entry(cfg: &DaemonConfig, n: i64) -> Complex64 {
    band_transform(n, cfg.kappa_r, cfg.kappa_d) * cfg.upsilon0
}

pub fn build_hamiltonian(cfg: &DaemonConfig) -> Result<DMatrix<Complex64>> {
    cfg.validate()?;
    let d = cfg.dim();
    let c = cfg.half_size;
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = Complex64::from(2.0);
        if i + 1 < d {
            h[(i, i + 1)] = Complex64::from(-1.0);
            h[(i + 1, i)] = Complex64::from(-1.0);
        }
    }
    if cfg.upsilon0 != 0.0 {
        for i in 0..d {
            if i == c {
                continue;
            }
            let v = daemon_column_entry(cfg, cfg.site(i));
            h[(i, c)] += v;
            h[(c, i)] = h[(i, c)].conj();
        }
    }
    h[(c, c)] = Complex64::from(2.0 + cfg.upsilon0 * cfg.kappa_d / PI);
    Ok(h)
}

/// `<n|H|kappa>` for the plane wave `e^{i kappa n} / sqrt(2 pi)`.
///
/// The kinetic part is the infinite-lattice dispersion. At `n = 0` the
/// daemon row is summed over the sites of the configured lattice.
pub fn hamiltonian_on_plane_wave(cfg: &DaemonConfig, kappa: f64, n: i64) -> Result<Complex64> {
    cfg.validate()?;
    if kappa.abs() > PI {
        return Err(Error::Domain(format!("|kappa| = {} exceeds pi", kappa.abs())));
    }
    let norm = 1.0 / (2.0 * PI).sqrt();
    let wave = |m: i64| Complex64::from_polar(norm, kappa * m as f64);
    let mut out = wave(n) * (2.0 * (1.0 - kappa.cos()));
    if cfg.upsilon0 == 0.0 {
        return Ok(out);
    }
    if n != 0 {
        out += daemon_column_entry(cfg, n) * wave(0);
    } else {
        out += wave(0) * (cfg.upsilon0 * cfg.kappa_d / PI);
        let nmax = cfg.half_size as i64;
        for m in (-nmax..=nmax).filter(|&m| m != 0) {
            out += daemon_column_entry(cfg, m).conj() * wave(m);
        }
    }
    Ok(out)
}

fn hermiticity_defect(h: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..h.nrows() {
        for j in i..h.ncols() {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Make the first component with `|z| > 1e-8` real and positive.
pub(crate) fn fix_phase(v: &mut DVector<Complex64>) {
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-8) {
        let rot = z.conj() / z.norm();
        for e in v.iter_mut() {
            *e *= rot;
        }
    }
}

pub fn diagonalize(h: &DMatrix<Complex64>) -> Result<EigenSystem> {
    if !h.is_square() {
        return Err(Error::Contract("matrix is not square".into()));
    }
    let defect = hermiticity_defect(h);
    if defect > 1e-12 {
        return Err(Error::Contract(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    let n = h.nrows();
    if n == 0 {
        return Err(Error::Contract("empty matrix".into()));
    }
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let energies = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        let nv = v.norm();
        v /= Complex64::from(nv);
        fix_phase(&mut v);
        vectors.set_column(dst, &v);
    }
    Ok(EigenSystem { energies, vectors })
}

/// `sum_{q=1}^{2N+1} exp(-beta (q^2 - 1)) sin(q (n + N) pi / 2N)`, normalized.
pub fn boltzmann_state(cfg: &DaemonConfig, beta: f64) -> Result<StateVector> {
    cfg.validate()?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta = {beta} must be positive")));
    }
    let nn = cfg.half_size as f64;
    let d = cfg.dim();
    let amps: Vec<f64> = (0..d)
        .map(|i| {
            let shift = cfg.site(i) as f64 + nn;
            (1..=d)
                .map(|q| {
                    let qf = q as f64;
                    (-beta * (qf * qf - 1.0)).exp() * (qf * shift * PI / (2.0 * nn)).sin()
                })
                .sum()
        })
        .collect();
    StateVector::from_real(&amps)
}

pub fn uniform_state(cfg: &DaemonConfig) -> StateVector {
    let d = cfg.dim();
    let a = Complex64::from(1.0 / (d as f64).sqrt());
    StateVector {
        amplitudes: DVector::from_element(d, a),
    }
}

/// `Psi(tau) = sum_m exp(-i tau Xi_m) (nu_m^dag psi0) nu_m`.
pub fn evolve(eig: &EigenSystem, psi0: &StateVector, taus: &[f64]) -> Result<WaveField> {
    let d = eig.energies.len();
    if eig.vectors.nrows() != d || eig.vectors.ncols() != d || psi0.len() != d {
        return Err(Error::Contract(format!(
            "dimension mismatch: {} energies, {}x{} vectors, state of length {}",
            d,
            eig.vectors.nrows(),
            eig.vectors.ncols(),
            psi0.len()
        )));
    }
    if let Some(t) = taus.iter().find(|t| !t.is_finite()) {
        return Err(Error::Contract(format!("non-finite time {t}")));
    }
    let coeffs = eig.vectors.ad_mul(psi0.amplitudes());
    // phases: time x mode, then frames = phases * V^T
    let mut phased = DMatrix::<Complex64>::zeros(taus.len(), d);
    for (t, &tau) in taus.iter().enumerate() {
        for m in 0..d {
            phased[(t, m)] = Complex64::from_polar(1.0, -tau * eig.energies[m]) * coeffs[m];
        }
    }
    let frames = phased * eig.vectors.transpose();
    Ok(WaveField {
        times: taus.to_vec(),
        frames,
    })
}

/// Free-chain spectrum `2 - 2 cos(k pi / (2N + 2))`, `k = 1..=2N+1`.
pub fn free_energies(half_size: usize) -> Vec<f64> {
    let m = (2 * half_size + 2) as f64;
    (1..=2 * half_size + 1)
        .map(|k| 2.0 - 2.0 * (k as f64 * PI / m).cos())
        .collect()
}
