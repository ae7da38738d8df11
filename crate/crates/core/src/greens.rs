//! Green's function of a particle in a box `[-L/2, L/2]` perturbed by the
//! non-local daemonic point interaction, with `hbar = m = 1`.
//!
//! `kappa_n = n pi / L`, `E_n = kappa_n^2 / 2`. Odd `n` carry the cosine
//! (even-parity) modes, even `n` the sine modes.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::si::si;
use crate::{heaviside, Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainerSpec {
    pub length: f64,
    pub truncation: usize,
    pub p_r: f64,
    pub eta: f64,
    /// Overall scale of the activation transform; `0` switches the daemon off.
    pub coupling: f64,
}

impl ContainerSpec {
    pub fn new(length: f64, truncation: usize, p_r: f64, eta: f64) -> Result<Self> {
        let s = ContainerSpec {
            length,
            truncation,
            p_r,
            eta,
            coupling: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!("length = {} must be positive", self.length)));
        }
        if self.truncation < 1 {
            return Err(Error::Config("truncation must be >= 1".into()));
        }
        if !(self.p_r > 0.0 && self.p_r.is_finite()) {
            return Err(Error::Config(format!("p_r = {} must be positive", self.p_r)));
        }
        if !(self.eta > 0.0) {
            return Err(Error::Config(format!("eta = {} must be positive", self.eta)));
        }
        if !self.coupling.is_finite() {
            return Err(Error::Config("coupling must be finite".into()));
        }
        Ok(())
    }

    pub fn kappa(&self, n: usize) -> f64 {
        n as f64 * PI / self.length
    }

    pub fn energy(&self, n: usize) -> f64 {
        let k = self.kappa(n);
        0.5 * k * k
    }

    /// `a = P_R L / 2`.
    pub fn a(&self) -> f64 {
        0.5 * self.p_r * self.length
    }

    /// `floor(a / pi)`.
    pub fn special_index(&self) -> usize {
        (self.a() / PI).floor() as usize
    }

    /// Fractional part of `a / pi`.
    pub fn fraction(&self) -> f64 {
        let r = self.a() / PI;
        r - r.floor()
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(x.abs() <= 0.5 * self.length) {
            return Err(Error::Domain(format!("|x| = {} outside the box", x.abs())));
        }
        Ok(())
    }
}

/// A container with its sine-integral coefficients
/// `S_n = Si(xi_+) - Si(xi_-) - Si(n pi)`, `xi_pm = (P_R pm kappa_2n) L / 2`, cached.
#[derive(Debug, Clone)]
pub struct Container {
    pub spec: ContainerSpec,
    s: Vec<f64>,
}

/// `P_1`, `P_2`, `Q_1`, `Q_2` of the container form. `P_2 = -P_1` and
/// `Q_2 = 0` hold by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainerBlocks {
    pub p1: Complex64,
    pub p2: Complex64,
    pub q1: Complex64,
    pub q2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEvaluation {
    pub value: Complex64,
    pub g0: Complex64,
    pub p1_x: Complex64,
    pub p1_xp: Complex64,
    pub q1: Complex64,
    pub q2: Complex64,
}

/// Which perturbation enters the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// Exact sine-integral blocks.
    Daemon,
    /// The step-function approximation of the blocks.
    Approximate,
    /// `P_1 = Q_1 = 0`.
    Zero,
    /// Local `V0 delta(x)`, fed through the same closed form.
    Constant(f64),
}

/// Everything the general closed form needs at one `(x, x', E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralBlocks {
    pub g0_xxp: Complex64,
    pub g0_x0: Complex64,
    pub g0_0xp: Complex64,
    pub g0_00: Complex64,
    pub p1_xp: Complex64,
    pub p2_x: Complex64,
    pub p2_0: Complex64,
    pub q1: Complex64,
    pub q2: Complex64,
}

/// `G_0 + [G0(x,0) G0(0,x') Q3 - G0(x,0) R1 (1 + P2(0)) - P2(x) (G0(0,x') - G0(0,0) R1)] / den`
/// with `R1 = P1/(1+Q2)`, `Q3 = Q1/(1+Q2)`, `den = 1 + P2(0) - G0(0,0) Q3`.
pub fn assemble_general(b: &GeneralBlocks) -> Result<Complex64> {
    let q3 = b.q1 / (ONE + b.q2);
    let r1 = b.p1_xp / (ONE + b.q2);
    let den = ONE + b.p2_0 - b.g0_00 * q3;
    if den.norm() < 1e-14 {
        return Err(Error::Pole(format!("denominator {den} vanishes")));
    }
    Ok(b.g0_xxp + (b.g0_x0 * b.g0_0xp * q3 - b.g0_x0 * r1 * (ONE + b.p2_0) - b.p2_x * (b.g0_0xp - b.g0_00 * r1)) / den)
}

impl Container {
    pub fn new(spec: ContainerSpec) -> Result<Self> {
        spec.validate()?;
        let a = spec.a();
        let s = (1..=spec.truncation)
            .map(|n| {
                let np = n as f64 * PI;
                si(a + np) - si(a - np) - si(np)
            })
            .collect();
        Ok(Container { spec, s })
    }

    pub fn si_coefficients(&self) -> &[f64] {
        &self.s
    }

    pub fn g0(&self, x: f64, xp: f64, e: Complex64) -> Result<Complex64> {
        self.spec.check_x(x)?;
        self.spec.check_x(xp)?;
        Ok(self.g0_unchecked(x, xp, e))
    }

    fn g0_unchecked(&self, x: f64, xp: f64, e: Complex64) -> Complex64 {
        let sp = &self.spec;
        let mut sum = Complex64::new(0.0, 0.0);
        for m in 1..=sp.truncation {
            let ks = sp.kappa(2 * m);
            let kc = sp.kappa(2 * m - 1);
            sum += (ks * x).sin() * (ks * xp).sin() / (sp.energy(2 * m) - e);
            sum += (kc * x).cos() * (kc * xp).cos() / (sp.energy(2 * m - 1) - e);
        }
        sum * (2.0 / sp.length)
    }

    fn g00(&self, e: Complex64) -> Complex64 {
        let sp = &self.spec;
        let sum: Complex64 = (1..=sp.truncation).map(|m| ONE / (sp.energy(2 * m - 1) - e)).sum();
        sum * (2.0 / sp.length)
    }

    /// `P_1^C(x, E) = -(2 g / (i pi L)) sum_n S_n sin(kappa_2n x) / (E_2n - E)`.
    pub fn p1(&self, x: f64, e: Complex64) -> Complex64 {
        let sp = &self.spec;
        let sum: Complex64 = self
            .s
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let n = i + 1;
                (sp.kappa(2 * n) * x).sin() * s / (sp.energy(2 * n) - e)
            })
            .sum();
        -sum * (2.0 * sp.coupling / (PI * sp.length)) / I
    }

    /// `Q_1^C(E) = (2 g^2 / (pi^2 L)) sum_n S_n^2 / (E_2n - E)`.
    pub fn q1(&self, e: Complex64) -> Complex64 {
        let sp = &self.spec;
        let sum: Complex64 = self
            .s
            .iter()
            .enumerate()
            .map(|(i, &s)| s * s / (sp.energy(2 * (i + 1)) - e))
            .sum();
        sum * (2.0 * sp.coupling * sp.coupling / (PI * PI * sp.length))
    }

    pub fn blocks(&self, x: f64, e: Complex64) -> Result<ContainerBlocks> {
        self.spec.check_x(x)?;
        let p1 = self.p1(x, e);
        Ok(ContainerBlocks {
            p1,
            p2: -p1,
            q1: self.q1(e),
            q2: Complex64::new(0.0, 0.0),
        })
    }

    /// Step-function approximation of `P_1^C(x, E)` and `Q_1^C(E)`.
    ///
    /// The `P_1` form follows the sign of the exact sum: the step
    /// approximation is applied to `Si(a + n pi) - Si(a - n pi)`, which is the
    /// combination that enters `S_n`.
    pub fn approx_blocks(&self, x: f64, e: Complex64) -> Result<(Complex64, Complex64)> {
        self.spec.check_x(x)?;
        let sp = &self.spec;
        let f = sp.special_index();
        if f < 1 {
            return Err(Error::Domain(format!("a = {} must exceed pi", sp.a())));
        }
        let eps = sp.fraction();
        let term = |n: usize| (sp.kappa(2 * n) * x).sin() / (sp.energy(2 * n) - e);
        let below: Complex64 = (1..f).map(term).sum();
        let all: Complex64 = (1..=sp.truncation).map(term).sum();
        let p1 = (below - all * 0.5 + term(f) * (0.5 * (1.0 + 2.0 * eps))) * (2.0 * sp.coupling / sp.length) / I;
        let inv = |n: usize| ONE / (sp.energy(2 * n) - e);
        let q_all: Complex64 = (1..=sp.truncation).map(inv).sum();
        let q1 = (q_all - inv(f)) * (sp.coupling * sp.coupling / (2.0 * sp.length));
        Ok((p1, q1))
    }

    fn general_blocks(&self, x: f64, xp: f64, e: Complex64, pert: Perturbation) -> Result<GeneralBlocks> {
        let g0_xxp = self.g0(x, xp, e)?;
        let g0_x0 = self.g0_unchecked(x, 0.0, e);
        let g0_0xp = self.g0_unchecked(0.0, xp, e);
        let g0_00 = self.g00(e);
        let zero = Complex64::new(0.0, 0.0);
        let (p1_x, p1_xp, q1) = match pert {
            Perturbation::Daemon => (self.p1(x, e), self.p1(xp, e), self.q1(e)),
            Perturbation::Approximate => {
                let (px, q1) = self.approx_blocks(x, e)?;
                let (pxp, _) = self.approx_blocks(xp, e)?;
                (px, pxp, q1)
            }
            Perturbation::Zero => (zero, zero, zero),
            Perturbation::Constant(v0) => {
                let v = 0.5 * v0;
                let g = GeneralBlocks {
                    g0_xxp,
                    g0_x0,
                    g0_0xp,
                    g0_00,
                    p1_xp: g0_0xp * v,
                    p2_x: g0_x0 * v,
                    p2_0: g0_00 * v,
                    q1: g0_00 * (v * v),
                    q2: g0_00 * v,
                };
                return Ok(g);
            }
        };
        Ok(GeneralBlocks {
            g0_xxp,
            g0_x0,
            g0_0xp,
            g0_00,
            p1_xp,
            p2_x: -p1_x,
            p2_0: zero,
            q1,
            q2: zero,
        })
    }

    /// Perturbed container Green's function at `E + i eta`.
    pub fn green(&self, x: f64, xp: f64, e: f64, pert: Perturbation) -> Result<GreenEvaluation> {
        let ez = Complex64::new(e, self.spec.eta);
        let b = self.general_blocks(x, xp, ez, pert)?;
        let value = assemble_general(&b)?;
        let (p1_x, p1_xp) = match pert {
            Perturbation::Constant(_) => (b.p2_x, b.p1_xp),
            _ => (-b.p2_x, b.p1_xp),
        };
        Ok(GreenEvaluation {
            value,
            g0: b.g0_xxp,
            p1_x,
            p1_xp,
            q1: b.q1,
            q2: b.q2,
        })
    }

    /// `P_1(x) G0(0,x') - G0(x,0) P_1(x')` over the container denominator: the
    /// only part of `G_p` that is not symmetric in `(x, x')`.
    pub fn cross_term(&self, x: f64, xp: f64, e: f64) -> Result<Complex64> {
        let ez = Complex64::new(e, self.spec.eta);
        let den = ONE - self.g00(ez) * self.q1(ez);
        if den.norm() < 1e-14 {
            return Err(Error::Pole(format!("denominator {den} vanishes")));
        }
        Ok((self.p1(x, ez) * self.g0(0.0, xp, ez)? - self.g0(x, 0.0, ez)? * self.p1(xp, ez)) / den)
    }

    /// Local-delta Green's function `G0 - V0 G0(x,0) G0(0,x') / (1 + V0 G0(0,0))`.
    pub fn green_delta(&self, x: f64, xp: f64, e: Complex64, v0: f64) -> Result<Complex64> {
        let g0 = self.g0(x, xp, e)?;
        let den = ONE + self.g00(e) * v0;
        if den.norm() < 1e-14 {
            return Err(Error::Pole(format!("1 + V0 G0(0,0) = {den}")));
        }
        Ok(g0 - self.g0_unchecked(x, 0.0, e) * self.g0_unchecked(0.0, xp, e) * v0 / den)
    }

    /// `1 - G0(0,0,E) Q1(E)` on the real axis.
    pub fn pole_function(&self, e: f64) -> f64 {
        let ez = Complex64::new(e, 0.0);
        (ONE - self.g00(ez) * self.q1(ez)).re
    }

    /// Bare poles `E_n` inside `[e_min, e_max]` and the real roots of the
    /// container denominator between them.
    pub fn find_poles(&self, e_min: f64, e_max: f64) -> Result<PoleTable> {
        let f = |e: f64| self.pole_function(e);
        let active = self.spec.coupling != 0.0;
        self.poles_of(e_min, e_max, active.then_some(&f as &dyn Fn(f64) -> f64), true)
    }

    /// Poles of the local-delta Green's function: bare levels and the real roots of
    /// `1 + V0 G0(0,0,E)`. Only odd levels couple, so even levels keep their energies.
    pub fn find_delta_poles(&self, v0: f64, e_min: f64, e_max: f64) -> Result<PoleTable> {
        let f = |e: f64| (ONE + self.g00(Complex64::new(e, 0.0)) * v0).re;
        self.poles_of(e_min, e_max, (v0 != 0.0).then_some(&f as &dyn Fn(f64) -> f64), false)
    }

    fn poles_of(&self, e_min: f64, e_max: f64, den: Option<&dyn Fn(f64) -> f64>, tag_new: bool) -> Result<PoleTable> {
        if !(e_min < e_max) {
            return Err(Error::Domain(format!("empty energy range [{e_min}, {e_max}]")));
        }
        let sp = &self.spec;
        let bare: Vec<(usize, f64)> = (1..=2 * sp.truncation)
            .map(|n| (n, sp.energy(n)))
            .filter(|&(_, e)| e >= e_min && e <= e_max)
            .collect();
        if bare.iter().any(|&(_, e)| e == e_min || e == e_max) {
            return Err(Error::Domain("energy range ends on a bare pole".into()));
        }
        let mut edges = Vec::with_capacity(bare.len() + 2);
        edges.push(e_min);
        edges.extend(bare.iter().map(|&(_, e)| e));
        edges.push(e_max);

        let mut roots = Vec::new();
        if let Some(f) = den {
            for w in edges.windows(2) {
                for e in bracket_roots(f, w[0], w[1]) {
                    roots.push(e);
                }
            }
        }
        let nearest = |e: f64| -> usize {
            let k = (2.0 * e).sqrt() * sp.length / PI;
            let lo = k.floor().max(1.0) as usize;
            if (sp.energy(lo) - e).abs() <= (sp.energy(lo + 1) - e).abs() {
                lo
            } else {
                lo + 1
            }
        };
        let special = 2 * sp.special_index();
        let mut rows: Vec<PoleRow> = roots
            .iter()
            .map(|&e| PoleRow {
                energy: e,
                parent: nearest(e),
                kind: PoleKind::Perturbed,
            })
            .collect();
        if tag_new && special >= 2 {
            let target = sp.energy(special);
            if let Some(row) = rows
                .iter_mut()
                .filter(|r| r.parent == special)
                .min_by(|a, b| (a.energy - target).abs().partial_cmp(&(b.energy - target).abs()).unwrap())
            {
                row.kind = PoleKind::New;
            }
        }
        Ok(PoleTable { bare, roots: rows })
    }
}

fn bracket_roots(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let gap = hi - lo;
    let mut ts: Vec<f64> = (1..64).map(|j| j as f64 / 64.0).collect();
    for k in 2..=15 {
        let d = 10f64.powi(-k);
        ts.push(d);
        ts.push(1.0 - d);
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    let pts: Vec<f64> = ts
        .iter()
        .map(|t| lo + gap * t)
        .filter(|&e| e > lo && e < hi)
        .collect();
    let vals: Vec<f64> = pts.iter().map(|&e| f(e)).collect();
    let mut out = Vec::new();
    for i in 0..pts.len().saturating_sub(1) {
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            out.push(pts[i]);
        } else if fa.signum() != fb.signum() && fb != 0.0 && fa.is_finite() && fb.is_finite() {
            out.push(bisect(f, pts[i], pts[i + 1], fa));
        }
    }
    out
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleKind {
    Bare,
    Perturbed,
    /// The root attached to the weakly coupled level `2 floor(a/pi)`.
    New,
}

impl PoleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PoleKind::Bare => "bare",
            PoleKind::Perturbed => "perturbed",
            PoleKind::New => "new",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleRow {
    pub energy: f64,
    /// Index `n` of the nearest bare level `E_n`.
    pub parent: usize,
    pub kind: PoleKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleTable {
    pub bare: Vec<(usize, f64)>,
    pub roots: Vec<PoleRow>,
}

pub fn g0_container(x: f64, xp: f64, e: Complex64, spec: &ContainerSpec) -> Result<Complex64> {
    Container::new(*spec)?.g0(x, xp, e)
}

pub fn container_blocks(x: f64, e: Complex64, spec: &ContainerSpec) -> Result<ContainerBlocks> {
    Container::new(*spec)?.blocks(x, e)
}

pub fn approx_blocks(x: f64, e: Complex64, spec: &ContainerSpec) -> Result<(Complex64, Complex64)> {
    Container::new(*spec)?.approx_blocks(x, e)
}

pub fn green_delta(x: f64, xp: f64, e: Complex64, v0: f64, spec: &ContainerSpec) -> Result<Complex64> {
    Container::new(*spec)?.green_delta(x, xp, e, v0)
}

pub fn green_daemon(x: f64, xp: f64, e: f64, spec: &ContainerSpec, pert: Perturbation) -> Result<GreenEvaluation> {
    Container::new(*spec)?.green(x, xp, e, pert)
}

pub fn find_poles(spec: &ContainerSpec, e_min: f64, e_max: f64) -> Result<PoleTable> {
    Container::new(*spec)?.find_poles(e_min, e_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `Vt(+-y) = +-(1 - 2 cos(P_R y)) / (2 i pi y)`; the odd singular part is
/// given its principal value `0` at `y = 0`.
pub fn fourier_activation(y: f64, p_r: f64, sign: Sign) -> Complex64 {
    if y == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    Complex64::from(s * (1.0 - 2.0 * (p_r * y).cos())) / (2.0 * PI * y * I)
}

/// Step approximation of `Si(n pi + a) - Si(n pi - a)`:
/// `pi/2 - (pi/2) Theta(n - f) + (pi/2) Theta(f - n) + pi eps delta_{n f}`,
/// `f = floor(a/pi)`, with both steps taken as zero at `n = f`.
pub fn si_step_approx(n: i64, a: f64) -> f64 {
    let r = a / PI;
    let f = r.floor() as i64;
    let eps = r - r.floor();
    if n == f {
        return 0.5 * PI + PI * eps;
    }
    let d = (n - f) as f64;
    0.5 * PI - 0.5 * PI * heaviside(d) + 0.5 * PI * heaviside(-d)
}
