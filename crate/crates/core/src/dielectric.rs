//! Inverse problem for the daemonic permittivity.
//!
//! With `u = log eps_r`, `k = omega / c` and `r = f_+/f_-`:
//! `u'' = 2 (i k r u' - mu_r k^2 (e^u - 1))`. Lengths in cm.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::classical::band_weights;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    /// Daemon on, with ratio `f_+(omega) / f_-(omega)`.
    Active(f64),
    /// Above the cutoff (or exactly at `omega_R`): the free equation applies.
    Inactive,
}

impl Activation {
    pub fn ratio(&self) -> f64 {
        match self {
            Activation::Active(r) => *r,
            Activation::Inactive => 0.0,
        }
    }
}

pub fn activation_ratio(omega: f64, omega_r: f64, omega_uv: f64) -> Activation {
    let (fp, fm) = band_weights(omega.abs(), omega_r, omega_uv);
    if fm == 0.0 {
        Activation::Inactive
    } else {
        Activation::Active(fp / fm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseProblemSpec {
    pub omega_over_c: f64,
    pub omega_r_over_c: f64,
    pub omega_uv_over_c: f64,
    pub mu_r: f64,
    pub eps0: Complex64,
    pub deps0: Complex64,
    pub x_grid: Vec<f64>,
    /// Base RK4 step (cm).
    pub step: f64,
    /// Relative Richardson tolerance per block.
    pub tol: f64,
    /// Step halvings allowed before giving up.
    pub max_refine: u32,
}

impl InverseProblemSpec {
    pub fn new(omega_over_c: f64, omega_r_over_c: f64, eps0: Complex64, deps0: Complex64, x_grid: Vec<f64>) -> Self {
        InverseProblemSpec {
            omega_over_c,
            omega_r_over_c,
            omega_uv_over_c: f64::INFINITY,
            mu_r: 1.0,
            eps0,
            deps0,
            x_grid,
            step: 1e-3,
            tol: 1e-8,
            max_refine: 12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_over_c > 0.0 && self.omega_r_over_c > 0.0 && self.omega_uv_over_c > self.omega_r_over_c) {
            return Err(Error::Config("need omega/c > 0 and 0 < omega_R/c < omega_UV/c".into()));
        }
        if !(self.mu_r > 0.0) {
            return Err(Error::Config(format!("mu_r = {} must be positive", self.mu_r)));
        }
        if !(self.eps0.norm() > 0.0) {
            return Err(Error::Config("eps0 must be nonzero".into()));
        }
        if self.x_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("x_grid must be strictly increasing".into()));
        }
        if self.x_grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("x_grid has non-finite entries".into()));
        }
        if !(self.step > 0.0 && self.tol > 0.0) {
            return Err(Error::Config("step and tol must be positive".into()));
        }
        Ok(())
    }

    pub fn activation(&self) -> Activation {
        activation_ratio(self.omega_over_c, self.omega_r_over_c, self.omega_uv_over_c)
    }

    /// `kappa = (omega/c) f_+/f_-`, the wavenumber of the harmonic envelope.
    pub fn kappa(&self) -> f64 {
        self.omega_over_c * self.activation().ratio()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonProfile {
    pub x: Vec<f64>,
    pub eps: Vec<Complex64>,
    /// `d/dx log eps_r`.
    pub dlog: Vec<Complex64>,
    /// `V_B = -(i omega / (c f_-)) d/dx log eps_r`; `NaN` when the daemon is off.
    pub v_b: Vec<Complex64>,
    pub activation: Activation,
}

#[derive(Clone, Copy)]
struct State {
    u: Complex64,
    w: Complex64,
}

struct Rhs {
    ikr: Complex64,
    mk2: f64,
}

impl Rhs {
    fn eval(&self, s: State) -> State {
        State {
            u: s.w,
            w: (self.ikr * s.w - (s.u.exp() - 1.0) * self.mk2) * 2.0,
        }
    }

    fn rk4(&self, s: State, h: f64) -> State {
        let add = |a: State, b: State, f: f64| State {
            u: a.u + b.u * f,
            w: a.w + b.w * f,
        };
        let k1 = self.eval(s);
        let k2 = self.eval(add(s, k1, 0.5 * h));
        let k3 = self.eval(add(s, k2, 0.5 * h));
        let k4 = self.eval(add(s, k3, h));
        State {
            u: s.u + (k1.u + (k2.u + k3.u) * 2.0 + k4.u) * (h / 6.0),
            w: s.w + (k1.w + (k2.w + k3.w) * 2.0 + k4.w) * (h / 6.0),
        }
    }

    /// `n` equal steps from `x0` to `x0 + len`.
    fn run(&self, mut s: State, x0: f64, len: f64, n: usize) -> Result<State> {
        let h = len / n as f64;
        for j in 0..n {
            s = self.rk4(s, h);
            let x = x0 + h * (j + 1) as f64;
            if !(s.u.re.is_finite() && s.u.im.is_finite() && s.w.re.is_finite() && s.w.im.is_finite()) {
                return Err(Error::Stiffness { x });
            }
            if s.u.re < COLLAPSE_LOG {
                return Err(Error::BranchCollapse { x });
            }
        }
        Ok(s)
    }
}

/// `log(1e-8)`: `|eps_r| = e^{Re u}` below this is a branch collapse.
const COLLAPSE_LOG: f64 = -18.420_680_743_952_367;

const BLOCK: usize = 100;

/// March from 0 through `targets` (all of one sign, ordered outward).
fn march(rhs: &Rhs, start: State, targets: &[f64], spec: &InverseProblemSpec) -> Result<Vec<State>> {
    let mut out = Vec::with_capacity(targets.len());
    let mut s = start;
    let mut x = 0.0f64;
    let mut h = spec.step;
    let mut refinements = 0u32;
    for &t in targets {
        while x != t {
            let remaining = t - x;
            let dir = remaining.signum();
            let len = if remaining.abs() <= BLOCK as f64 * h {
                remaining
            } else {
                dir * BLOCK as f64 * h
            };
            let n = ((len.abs() / h).ceil() as usize).max(1);
            let coarse = rhs.run(s, x, len, n)?;
            let fine = rhs.run(s, x, len, 2 * n)?;
            let err = ((coarse.u - fine.u).norm() / (1.0 + fine.u.norm()))
                .max((coarse.w - fine.w).norm() / (1.0 + fine.w.norm()))
                / 15.0;
            if err > spec.tol {
                refinements += 1;
                if refinements > spec.max_refine {
                    return Err(Error::Stiffness { x });
                }
                h *= 0.5;
                continue;
            }
            s = fine;
            x = if remaining.abs() <= BLOCK as f64 * h || x + len == t { t } else { x + len };
        }
        out.push(s);
    }
    Ok(out)
}

pub fn solve_epsilon_ode(spec: &InverseProblemSpec) -> Result<EpsilonProfile> {
    spec.validate()?;
    let act = spec.activation();
    let k = spec.omega_over_c;
    let rhs = Rhs {
        ikr: I * (k * act.ratio()),
        mk2: spec.mu_r * k * k,
    };
    let start = State {
        u: spec.eps0.ln(),
        w: spec.deps0 / spec.eps0,
    };
    let neg: Vec<f64> = spec.x_grid.iter().copied().filter(|&x| x < 0.0).rev().collect();
    let pos: Vec<f64> = spec.x_grid.iter().copied().filter(|&x| x > 0.0).collect();
    let mut left = march(&rhs, start, &neg, spec)?;
    left.reverse();
    let right = march(&rhs, start, &pos, spec)?;
    let n_zero = spec.x_grid.iter().filter(|&&x| x == 0.0).count();
    let states: Vec<State> = left
        .into_iter()
        .chain(core::iter::repeat_n(start, n_zero))
        .chain(right)
        .collect();
    let (_, fm) = band_weights(k, spec.omega_r_over_c, spec.omega_uv_over_c);
    let v_b = states
        .iter()
        .map(|s| {
            if fm == 0.0 {
                Complex64::new(f64::NAN, f64::NAN)
            } else {
                -(I * (k / fm)) * s.w
            }
        })
        .collect();
    Ok(EpsilonProfile {
        x: spec.x_grid.clone(),
        eps: states.iter().map(|s| s.u.exp()).collect(),
        dlog: states.iter().map(|s| s.w).collect(),
        v_b,
        activation: act,
    })
}

/// Closed form of the linearized envelope equation
/// `v'' + (kappa^2 + 2 mu k^2) v = 0`, which is `sqrt(1 + 2 mu) k` when `|kappa| = k`.
pub fn harmonic_v(x: f64, v0: Complex64, v0p: Complex64, k: f64, kappa: f64, mu_r: f64) -> Complex64 {
    let q = (kappa * kappa + 2.0 * mu_r * k * k).sqrt();
    v0 * (q * x).cos() + v0p * ((q * x).sin() / q)
}

/// `(v(x), eps_r(x) = exp(v e^{i kappa x}))` with `v0 = log eps0` and
/// `v0' = eps0'/eps0 - i kappa v0`, the envelope data matching `eps_r(0)`, `eps_r'(0)`.
pub fn harmonic_approx(x: f64, spec: &InverseProblemSpec) -> (Complex64, Complex64) {
    let kappa = spec.kappa();
    let v0 = spec.eps0.ln();
    let v0p = spec.deps0 / spec.eps0 - I * kappa * v0;
    let v = harmonic_v(x, v0, v0p, spec.omega_over_c, kappa, spec.mu_r);
    (v, (v * Complex64::from_polar(1.0, kappa * x)).exp())
}
