//! Entropy, lateral splits, potential work and density carpets of a [`WaveField`].

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::lattice::{build_hamiltonian, diagonalize, DaemonConfig, EigenSystem, WaveField};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTrace {
    pub taus: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Left (`n < 0`), right (`n > 0`) and center (`n = 0`) shares of a quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct LateralTrace {
    pub taus: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub center: Vec<f64>,
}

impl LateralTrace {
    fn with_capacity(taus: &[f64]) -> Self {
        LateralTrace {
            taus: taus.to_vec(),
            left: Vec::with_capacity(taus.len()),
            right: Vec::with_capacity(taus.len()),
            center: Vec::with_capacity(taus.len()),
        }
    }

    pub fn total(&self, t: usize) -> f64 {
        self.left[t] + self.center[t] + self.right[t]
    }
}

/// `<V>(tau)` and its running mean `(1/tau) int_0^tau <V>`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTrace {
    pub taus: Vec<f64>,
    pub potential: Vec<f64>,
    pub running_mean: Vec<f64>,
}

pub fn free_energy_basis(cfg: &DaemonConfig) -> Result<EigenSystem> {
    diagonalize(&build_hamiltonian(&cfg.free())?)
}

/// Occupations `|nu_m^dag Psi(tau)|^2`, time x mode.
pub fn occupations(field: &WaveField, basis: &EigenSystem) -> Result<DMatrix<f64>> {
    if basis.vectors.nrows() != field.n_sites() {
        return Err(Error::Contract(format!(
            "basis has {} sites, field has {}",
            basis.vectors.nrows(),
            field.n_sites()
        )));
    }
    let proj = &field.frames * basis.vectors.map(|z| z.conj());
    Ok(proj.map(|z| z.norm_sqr()))
}

pub fn shannon_entropy(field: &WaveField, basis: &EigenSystem) -> Result<EntropyTrace> {
    let rho = occupations(field, basis)?;
    let sigma = (0..rho.nrows())
        .map(|t| {
            rho.row(t)
                .iter()
                .filter(|&&r| r > 0.0)
                .map(|&r| -r * r.ln())
                .sum()
        })
        .collect();
    Ok(EntropyTrace {
        taus: field.times.clone(),
        sigma,
    })
}

fn split<F: Fn(usize, usize) -> f64>(field: &WaveField, weight: F) -> LateralTrace {
    let c = field.n_sites() / 2;
    let mut out = LateralTrace::with_capacity(&field.times);
    for t in 0..field.times.len() {
        out.left.push((0..c).map(|i| weight(t, i)).sum());
        out.center.push(weight(t, c));
        out.right.push((c + 1..field.n_sites()).map(|i| weight(t, i)).sum());
    }
    out
}

pub fn lateral_probability(field: &WaveField) -> LateralTrace {
    split(field, |t, i| field.frames[(t, i)].norm_sqr())
}

/// `Re(Psi^dag Pi H Psi)` for the site projectors `Pi` onto each side.
pub fn lateral_energy(field: &WaveField, h: &DMatrix<Complex64>) -> Result<LateralTrace> {
    if h.nrows() != field.n_sites() || h.ncols() != field.n_sites() {
        return Err(Error::Contract("Hamiltonian and field dimensions differ".into()));
    }
    let hpsi = &field.frames * h.transpose();
    Ok(split(field, |t, i| (field.frames[(t, i)].conj() * hpsi[(t, i)]).re))
}

pub fn potential_work_trace(field: &WaveField, cfg: &DaemonConfig) -> Result<PotentialTrace> {
    if cfg.dim() != field.n_sites() {
        return Err(Error::Contract("config and field dimensions differ".into()));
    }
    let v = build_hamiltonian(cfg)? - build_hamiltonian(&cfg.free())?;
    let vpsi = &field.frames * v.transpose();
    let potential: Vec<f64> = (0..field.times.len())
        .map(|t| {
            (0..field.n_sites())
                .map(|i| (field.frames[(t, i)].conj() * vpsi[(t, i)]).re)
                .sum()
        })
        .collect();
    let taus = &field.times;
    let mut running_mean = Vec::with_capacity(taus.len());
    let mut integral = 0.0;
    for t in 0..taus.len() {
        if t > 0 {
            integral += 0.5 * (potential[t] + potential[t - 1]) * (taus[t] - taus[t - 1]);
        }
        let span = taus[t] - taus[0];
        running_mean.push(if span > 0.0 { integral / span } else { potential[t] });
    }
    Ok(PotentialTrace {
        taus: taus.clone(),
        potential,
        running_mean,
    })
}

/// `|Psi(n, tau)|^2`, time x site.
pub fn density_carpet(field: &WaveField) -> DMatrix<f64> {
    field.frames.map(|z| z.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{boltzmann_state, evolve, free_energies, StateVector};
    use core::f64::consts::PI;
    use nalgebra::DVector;

    fn single_frame(v: DVector<Complex64>) -> WaveField {
        WaveField {
            times: alloc::vec![0.0],
            frames: DMatrix::from_row_slice(1, v.len(), v.as_slice()),
        }
    }

    #[test]
    fn free_basis_three_sites() {
        let cfg = DaemonConfig::new(1, 0.4, PI / 4.0, PI).unwrap();
        let b = free_energy_basis(&cfg).unwrap();
        for (k, e) in free_energies(1).iter().enumerate() {
            assert!((b.energies[k] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_of_mode_and_mixture() {
        let cfg = DaemonConfig::new(5, 0.0, PI / 4.0, PI).unwrap();
        let b = free_energy_basis(&cfg).unwrap();
        let f = single_frame(b.vectors.column(3).into_owned());
        assert!(shannon_entropy(&f, &b).unwrap().sigma[0].abs() < 1e-12);
        let mix = (b.vectors.column(0) + b.vectors.column(4) + b.vectors.column(7)) / Complex64::from(3f64.sqrt());
        let s = shannon_entropy(&single_frame(mix), &b).unwrap().sigma[0];
        assert!((s - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lateral_probability_edges() {
        let cfg = DaemonConfig::new(4, 0.0, PI / 4.0, PI).unwrap();
        let mut v = DVector::zeros(cfg.dim());
        v[cfg.index(4)] = Complex64::from(1.0);
        let lp = lateral_probability(&single_frame(v));
        assert_eq!((lp.left[0], lp.center[0], lp.right[0]), (0.0, 0.0, 1.0));
        let even = StateVector::from_real(&[1.0, 2.0, 3.0, 4.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let lp = lateral_probability(&single_frame(even.amplitudes().clone()));
        assert!((lp.left[0] - lp.right[0]).abs() < 1e-15);
    }

    #[test]
    fn lateral_energy_of_eigenmode() {
        let cfg = DaemonConfig::new(10, 0.2, PI / 4.0, PI).unwrap();
        let h = build_hamiltonian(&cfg).unwrap();
        let e = diagonalize(&h).unwrap();
        let le = lateral_energy(&single_frame(e.vectors.column(6).into_owned()), &h).unwrap();
        assert!((le.total(0) - e.energies[6]).abs() < 1e-12);
    }

    #[test]
    fn potential_vanishes_without_defect_or_overlap() {
        let cfg = DaemonConfig::new(10, 0.0, PI / 4.0, PI).unwrap();
        let e = diagonalize(&build_hamiltonian(&cfg).unwrap()).unwrap();
        let psi = boltzmann_state(&cfg, 0.1).unwrap();
        let f = evolve(&e, &psi, &[0.0, 1.0, 2.0]).unwrap();
        assert!(potential_work_trace(&f, &cfg).unwrap().potential.iter().all(|v| *v == 0.0));

        let cfg = DaemonConfig::new(10, 0.3, PI / 4.0, PI).unwrap();
        let mut v = DVector::zeros(cfg.dim());
        v[cfg.index(3)] = Complex64::from(1.0);
        v[cfg.index(-3)] = Complex64::from(1.0);
        let pt = potential_work_trace(&single_frame(v), &cfg).unwrap();
        assert!(pt.potential[0].abs() < 1e-14);
    }

    #[test]
    fn carpet_rows_sum_to_one() {
        let cfg = DaemonConfig::new(8, 0.1, PI / 4.0, PI).unwrap();
        let e = diagonalize(&build_hamiltonian(&cfg).unwrap()).unwrap();
        let psi = boltzmann_state(&cfg, 0.1).unwrap();
        let f = evolve(&e, &psi, &[0.0, 5.0]).unwrap();
        let c = density_carpet(&f);
        for t in 0..2 {
            assert!((c.row(t).sum() - 1.0).abs() < 1e-12);
        }
    }
}
