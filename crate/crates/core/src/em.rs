//! Dielectric bilayer stack in a conducting cavity.
//!
//! Fields expand over the orthonormal Neumann basis `phi_0 = 1/sqrt(L)`,
//! `phi_m = sqrt(2/L) cos(kappa_m x)`. Units: cm, with `c = 1` so `omega` is in cm^-1.
//! The modal equation is `T(omega) x = 0` with
//! `T = -I1 + I2 - mu_r omega^2 I3 - I4 - I5` and `D(omega) = T + omega^2`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::{Float, Zero};

use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub omega_p: f64,
    pub omega_0: f64,
    pub gamma: f64,
}

/// Right half-window carries `eps_k(omega, Gamma)`, left half `eps_k(omega, -Gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Layer {
    pub fn signed_gamma(&self, side: Side) -> f64 {
        match side {
            Side::Right => self.gamma,
            Side::Left => -self.gamma,
        }
    }

    pub fn epsilon(&self, omega: Complex64, side: Side) -> Result<Complex64> {
        let den = denominator(omega, self.omega_0, self.signed_gamma(side));
        if den.norm() < 1e-12 {
            return Err(Error::Pole(format!("Lorentz-Drude resonance at omega = {omega}")));
        }
        Ok(1.0 + self.omega_p * self.omega_p / den)
    }
}

fn denominator(omega: Complex64, omega_0: f64, gamma: f64) -> Complex64 {
    omega_0 * omega_0 - omega * omega - I * gamma * omega
}

pub fn lorentz_drude(omega: Complex64, layer: &Layer) -> Result<Complex64> {
    layer.epsilon(omega, Side::Right)
}

pub fn lorentz_drude_star(omega: Complex64, layer: &Layer) -> Result<Complex64> {
    layer.epsilon(omega, Side::Left)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilayerStack {
    /// Ordered `k = -N ..= N`.
    pub layers: Vec<Layer>,
    pub b: f64,
    pub length: f64,
    pub mu_r: f64,
    pub xi2: f64,
}

impl BilayerStack {
    pub fn empty(length: f64) -> Self {
        BilayerStack {
            layers: Vec::new(),
            b: 0.0,
            length,
            mu_r: 1.0,
            xi2: 0.0,
        }
    }

    /// Thirteen bilayers, `omega_p = 3`, `omega_0 = 1.2 - 0.12|k|`,
    /// `Gamma = 0.05 - 0.005|k|`, `b = 0.12`, `L = 12`.
    pub fn reference() -> Self {
        let layers = (-6i32..=6)
            .map(|k| {
                let a = f64::from(k.abs());
                Layer {
                    omega_p: 3.0,
                    omega_0: 1.2 - 0.12 * a,
                    gamma: 0.05 - 0.005 * a,
                }
            })
            .collect();
        BilayerStack {
            layers,
            b: 0.12,
            length: 12.0,
            mu_r: 1.0,
            xi2: 0.0,
        }
    }

    pub fn half_count(&self) -> usize {
        self.layers.len() / 2
    }

    /// `a_k = L/2 + k b` for the layer at position `idx` of `layers`.
    pub fn center(&self, idx: usize) -> f64 {
        let k = idx as f64 - self.half_count() as f64;
        0.5 * self.length + k * self.b
    }

    /// `[lo, hi)` covered by the stack.
    pub fn extent(&self) -> (f64, f64) {
        let h = (self.half_count() as f64 + 0.5) * self.b;
        (0.5 * self.length - h, 0.5 * self.length + h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!("cavity length {} must be positive", self.length)));
        }
        if !(self.mu_r > 0.0) || !self.xi2.is_finite() || self.xi2 < 0.0 {
            return Err(Error::Config("need mu_r > 0 and xi2 >= 0".into()));
        }
        if self.layers.is_empty() {
            return Ok(());
        }
        if self.layers.len().is_multiple_of(2) {
            return Err(Error::Config(format!(
                "{} layers given; the stack needs 2N+1",
                self.layers.len()
            )));
        }
        if !(self.b > 0.0) || !(self.layers.len() as f64 * self.b < self.length) {
            return Err(Error::Config("need b > 0 and (2N+1) b < L".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.omega_0 > 0.0) || !(l.gamma >= 0.0) || !l.omega_p.is_finite() {
                return Err(Error::Config(format!("layer {i}: need omega_0 > 0, gamma >= 0")));
            }
        }
        Ok(())
    }

    /// Permittivity windows `(start, end, layer index, side)` in increasing `x`.
    pub fn windows(&self) -> Vec<(f64, f64, usize, Side)> {
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for idx in 0..self.layers.len() {
            let a = self.center(idx);
            out.push((a - 0.5 * self.b, a, idx, Side::Left));
            out.push((a, a + 0.5 * self.b, idx, Side::Right));
        }
        out
    }
}

pub fn epsilon_profile(x: f64, omega: Complex64, stack: &BilayerStack) -> Result<Complex64> {
    let (lo, hi) = stack.extent();
    if stack.layers.is_empty() || x < lo || x >= hi {
        return Ok(Complex64::from(1.0));
    }
    let idx = (((x - lo) / stack.b).floor() as usize).min(stack.layers.len() - 1);
    let side = if x >= stack.center(idx) { Side::Right } else { Side::Left };
    stack.layers[idx].epsilon(omega, side)
}

/// A principal-branch logarithm taken close to its cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchWarning {
    pub layer: usize,
    pub side: Side,
    pub epsilon: Complex64,
}

pub fn branch_warnings(omega: Complex64, stack: &BilayerStack) -> Result<Vec<BranchWarning>> {
    let mut out = Vec::new();
    for (layer, l) in stack.layers.iter().enumerate() {
        for side in [Side::Left, Side::Right] {
            let e = l.epsilon(omega, side)?;
            if e.re < 0.0 && e.im.abs() <= 0.1 * e.re.abs() {
                out.push(BranchWarning { layer, side, epsilon: e });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannBasis {
    pub length: f64,
    pub n_modes: usize,
}

impl NeumannBasis {
    pub fn kappa(&self, m: usize) -> f64 {
        m as f64 * core::f64::consts::PI / self.length
    }

    fn scale(&self, m: usize) -> f64 {
        if m == 0 {
            (1.0 / self.length).sqrt()
        } else {
            (2.0 / self.length).sqrt()
        }
    }

    pub fn phi(&self, m: usize, x: f64) -> f64 {
        self.scale(m) * (self.kappa(m) * x).cos()
    }

    pub fn dphi(&self, m: usize, x: f64) -> f64 {
        -self.scale(m) * self.kappa(m) * (self.kappa(m) * x).sin()
    }

    /// `int_0^x phi_m phi_n`.
    pub fn antiderivative(&self, x: f64) -> DMatrix<f64> {
        let n = self.n_modes;
        DMatrix::from_fn(n, n, |m, k| {
            let (km, kn) = (self.kappa(m), self.kappa(k));
            let raw = if m == k {
                if m == 0 {
                    x
                } else {
                    0.5 * x + (2.0 * km * x).sin() / (4.0 * km)
                }
            } else {
                let (d, s) = (km - kn, km + kn);
                0.5 * ((d * x).sin() / d + (s * x).sin() / s)
            };
            raw * self.scale(m) * self.scale(k)
        })
    }

    /// `int_a^c phi_m phi_n`.
    pub fn overlap(&self, a: f64, c: f64) -> DMatrix<f64> {
        self.antiderivative(c) - self.antiderivative(a)
    }
}

/// The five matrix families of `T(omega)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrals {
    pub i1: DMatrix<Complex64>,
    pub i2: DMatrix<Complex64>,
    pub i3: DMatrix<Complex64>,
    pub i4: DMatrix<Complex64>,
    pub i5: DMatrix<Complex64>,
}

/// Cached geometry of a stack over a fixed basis.
#[derive(Debug, Clone)]
pub struct Cavity {
    pub stack: BilayerStack,
    pub basis: NeumannBasis,
    vacuum: DMatrix<f64>,
    windows: Vec<(usize, Side, DMatrix<f64>)>,
    edges: Vec<Edge>,
    log_terms: bool,
}

#[derive(Debug, Clone)]
struct Edge {
    x: f64,
    phi: DVector<f64>,
    dphi: DVector<f64>,
}

impl Cavity {
    pub fn new(stack: &BilayerStack, n_modes: usize) -> Result<Self> {
        stack.validate()?;
        if n_modes == 0 {
            return Err(Error::Config("n_modes must be at least 1".into()));
        }
        let basis = NeumannBasis {
            length: stack.length,
            n_modes,
        };
        let (vacuum, windows) = if stack.layers.is_empty() {
            (DMatrix::identity(n_modes, n_modes), Vec::new())
        } else {
            let (lo, hi) = stack.extent();
            let vac = basis.overlap(0.0, lo) + basis.overlap(hi, stack.length);
            let w = stack
                .windows()
                .into_iter()
                .map(|(a, c, idx, side)| (idx, side, basis.overlap(a, c)))
                .collect();
            (vac, w)
        };
        let mut xs: Vec<f64> = Vec::new();
        for idx in 0..stack.layers.len() {
            let a = stack.center(idx);
            xs.extend([a - 0.5 * stack.b, a, a + 0.5 * stack.b]);
        }
        let edges = xs
            .into_iter()
            .map(|x| Edge {
                x,
                phi: DVector::from_fn(n_modes, |m, _| basis.phi(m, x)),
                dphi: DVector::from_fn(n_modes, |m, _| basis.dphi(m, x)),
            })
            .collect();
        Ok(Cavity {
            stack: stack.clone(),
            basis,
            vacuum,
            windows,
            edges,
            log_terms: true,
        })
    }

    /// Drop `I4` and `I5`, leaving the purely algebraic operator.
    pub fn without_log_terms(mut self) -> Self {
        self.log_terms = false;
        self
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes
    }

    fn stiffness(&self) -> DMatrix<Complex64> {
        let n = self.n_modes();
        DMatrix::from_fn(n, n, |m, k| {
            if m == k {
                Complex64::from(self.basis.kappa(m).powi(2) + self.stack.xi2)
            } else {
                Complex64::from(0.0)
            }
        })
    }

    fn i3(&self, omega: Complex64) -> Result<DMatrix<Complex64>> {
        let mut out = self.vacuum.map(Complex64::from);
        for (idx, side, w) in &self.windows {
            let e = self.stack.layers[*idx].epsilon(omega, *side)?;
            out += w.map(|v| e * v);
        }
        Ok(out)
    }

    /// Jumps of `log eps` at each edge, in the order of `self.edges`.
    fn jumps(&self, omega: Complex64) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(self.edges.len());
        if !self.log_terms {
            out.resize(self.edges.len(), Complex64::from(0.0));
            return Ok(out);
        }
        for l in &self.stack.layers {
            let ls = l.epsilon(omega, Side::Left)?.ln();
            let le = l.epsilon(omega, Side::Right)?.ln();
            out.extend([ls, le - ls, -le]);
        }
        Ok(out)
    }

    pub fn integrals(&self, omega: Complex64) -> Result<Integrals> {
        let n = self.n_modes();
        let i1 = DMatrix::from_fn(n, n, |m, k| {
            if m == k {
                Complex64::from(-self.basis.kappa(m).powi(2))
            } else {
                Complex64::from(0.0)
            }
        });
        let i2 = DMatrix::from_diagonal_element(n, n, Complex64::from(self.stack.xi2));
        let i3 = self.i3(omega)?;
        let mut i4 = DMatrix::zeros(n, n);
        let mut i5 = DMatrix::zeros(n, n);
        for (edge, jump) in self.edges.iter().zip(self.jumps(omega)?) {
            for m in 0..n {
                for k in 0..n {
                    let d = edge.dphi[m] * edge.phi[k] + edge.phi[m] * edge.dphi[k];
                    i4[(m, k)] -= jump * d;
                    i5[(m, k)] += jump * (edge.phi[m] * edge.dphi[k]);
                }
            }
        }
        Ok(Integrals { i1, i2, i3, i4, i5 })
    }

    /// `K + xi^2 - mu_r omega^2 I3`, without the logarithmic terms.
    pub fn algebraic_t(&self, omega: Complex64) -> Result<DMatrix<Complex64>> {
        let w2 = omega * omega * self.stack.mu_r;
        Ok(self.stiffness() - self.i3(omega)? * w2)
    }

    pub fn t_matrix(&self, omega: Complex64) -> Result<DMatrix<Complex64>> {
        let mut t = self.algebraic_t(omega)?;
        for (edge, jump) in self.edges.iter().zip(self.jumps(omega)?) {
            for m in 0..self.n_modes() {
                for k in 0..self.n_modes() {
                    t[(m, k)] += jump * (edge.dphi[m] * edge.phi[k]);
                }
            }
        }
        Ok(t)
    }

    pub fn d_matrix(&self, omega: Complex64) -> Result<DMatrix<Complex64>> {
        let n = self.n_modes();
        Ok(self.t_matrix(omega)? + DMatrix::from_diagonal_element(n, n, omega * omega))
    }

    pub fn edge_positions(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.x).collect()
    }
}

pub fn d_matrix(omega: Complex64, stack: &BilayerStack, n_modes: usize) -> Result<DMatrix<Complex64>> {
    Cavity::new(stack, n_modes)?.d_matrix(omega)
}

/// One cleared factor `omega_0^2 - omega^2 - i gamma omega`; `gamma` carries the side sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub omega_0: f64,
    pub gamma: f64,
}

impl Factor {
    pub fn eval(&self, omega: Complex64) -> Complex64 {
        denominator(omega, self.omega_0, self.gamma)
    }

    fn coeffs(&self) -> [Complex64; 3] {
        [
            Complex64::from(self.omega_0 * self.omega_0),
            Complex64::new(0.0, -self.gamma),
            Complex64::from(-1.0),
        ]
    }
}

/// `P(omega) = sum_p coeffs[p] omega^p = prod_j d_j(omega) * algebraic T(omega)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    pub coeffs: Vec<DMatrix<Complex64>>,
    pub factors: Vec<Factor>,
    /// `C_j = sum omega_p^2 W` over the windows sharing factor `j`.
    pub weights: Vec<DMatrix<f64>>,
}

pub const MAX_DEGREE: usize = 64;

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::from(0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn product(factors: &[Factor], skip: Option<usize>) -> Vec<Complex64> {
    let mut p = vec![Complex64::from(1.0)];
    for (i, f) in factors.iter().enumerate() {
        if Some(i) != skip {
            p = poly_mul(&p, &f.coeffs());
        }
    }
    p
}

impl MatrixPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, omega: Complex64) -> DMatrix<Complex64> {
        let mut acc = self.coeffs[self.degree()].clone();
        for c in self.coeffs[..self.degree()].iter().rev() {
            acc = acc * omega + c;
        }
        acc
    }

    pub fn denominator(&self, omega: Complex64) -> Complex64 {
        self.factors.iter().map(|f| f.eval(omega)).product()
    }
}

pub fn polynomialize(stack: &BilayerStack, n_modes: usize) -> Result<MatrixPolynomial> {
    polynomialize_cavity(&Cavity::new(stack, n_modes)?, MAX_DEGREE)
}

pub fn polynomialize_cavity(cav: &Cavity, max_degree: usize) -> Result<MatrixPolynomial> {
    let n = cav.n_modes();
    let mut factors: Vec<Factor> = Vec::new();
    let mut weights: Vec<DMatrix<f64>> = Vec::new();
    for (idx, side, w) in &cav.windows {
        let l = cav.stack.layers[*idx];
        // +0.0 folds -0.0 into 0.0 so lossless sides share a factor
        let f = Factor {
            omega_0: l.omega_0,
            gamma: l.signed_gamma(*side) + 0.0,
        };
        let c = w * (l.omega_p * l.omega_p);
        match factors
            .iter()
            .position(|g| g.omega_0.to_bits() == f.omega_0.to_bits() && g.gamma.to_bits() == f.gamma.to_bits())
        {
            Some(j) => weights[j] += c,
            None => {
                factors.push(f);
                weights.push(c);
            }
        }
    }
    let degree = 2 + 2 * factors.len();
    if degree > max_degree {
        return Err(Error::Config(format!("polynomial degree {degree} exceeds cap {max_degree}")));
    }
    let mu = cav.stack.mu_r;
    let mut coeffs = vec![DMatrix::<Complex64>::zeros(n, n); degree + 1];
    let base = cav.stiffness();
    for (p, c) in product(&factors, None).iter().enumerate() {
        coeffs[p] += &base * *c;
        for m in 0..n {
            coeffs[p + 2][(m, m)] -= c * mu;
        }
    }
    for (j, w) in weights.iter().enumerate() {
        let wc = w.map(Complex64::from);
        for (p, c) in product(&factors, Some(j)).iter().enumerate() {
            coeffs[p + 2] -= &wc * (c * mu);
        }
    }
    Ok(MatrixPolynomial { coeffs, factors, weights })
}

fn companion_tail<T: nalgebra::ComplexField + Copy>(coeffs: &[DMatrix<T>]) -> Option<DMatrix<T>> {
    let d = coeffs.len() - 1;
    let n = coeffs[0].nrows();
    let lu = coeffs[d].clone().lu();
    let mut c = DMatrix::<T>::zeros(n * d, n * d);
    for i in 0..n * (d - 1) {
        c[(i, i + n)] = T::one();
    }
    for (p, m) in coeffs[..d].iter().enumerate() {
        let block = lu.solve(m)?;
        for r in 0..n {
            for s in 0..n {
                c[(n * (d - 1) + r, n * p + s)] = -block[(r, s)];
            }
        }
    }
    Some(c)
}

fn leading_is_regular<T: nalgebra::ComplexField + Copy>(m: &DMatrix<T>) -> bool {
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(T::RealField::zero(), |a, b| if *b > a { b.clone() } else { a });
    let min = sv.iter().fold(max.clone(), |a, b| if *b < a { b.clone() } else { a });
    max > T::RealField::zero() && min > max * nalgebra::convert(1e-12)
}

fn complex_companion_eigs(coeffs: &[DMatrix<Complex64>]) -> Result<Vec<Complex64>> {
    let c = companion_tail(coeffs).ok_or_else(|| Error::Numerical("singular leading coefficient".into()))?;
    let schur = nalgebra::Schur::try_new(c, 1e-14, 100_000)
        .ok_or_else(|| Error::Numerical("companion Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Taylor shift `P(sigma + s)` then reversal; eigenvalues `nu` map to `sigma + 1/nu`.
fn shift_invert_eigs(coeffs: &[DMatrix<Complex64>], sigma: Complex64) -> Result<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let mut shifted = coeffs.to_vec();
    for i in 0..d {
        for j in (i..d).rev() {
            let next = shifted[j + 1].clone();
            shifted[j] += next * sigma;
        }
    }
    shifted.reverse();
    let nus = complex_companion_eigs(&shifted)?;
    Ok(nus
        .into_iter()
        .filter(|nu| nu.norm() > 1e-10)
        .map(|nu| sigma + 1.0 / nu)
        .collect())
}

/// Eigenvalues `lambda^(1)` of the block companion linearization.
///
/// When `P(i z)` has real coefficients (always the case for Lorentz-Drude stacks)
/// the companion is real in `z` and the spectrum pairs exactly as `-omega = omega*`.
pub fn pencil_eigs(poly: &MatrixPolynomial) -> Result<Vec<Complex64>> {
    let coeffs = &poly.coeffs;
    let d = coeffs.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut rotated: Vec<DMatrix<Complex64>> = Vec::with_capacity(d + 1);
    let mut ip = Complex64::from(1.0);
    for c in coeffs {
        rotated.push(c * ip);
        ip *= I;
    }
    let scale = rotated.iter().map(|m| m.camax()).fold(0.0, f64::max);
    let imag = rotated.iter().map(|m| m.map(|z| z.im.abs()).max()).fold(0.0, f64::max);
    if imag <= 1e-13 * scale {
        let real: Vec<DMatrix<f64>> = rotated.iter().map(|m| m.map(|z| z.re)).collect();
        if leading_is_regular(&real[d]) {
            let c = companion_tail(&real).ok_or_else(|| Error::Numerical("singular leading coefficient".into()))?;
            let zs = c.complex_eigenvalues();
            return Ok(zs.iter().map(|z| I * z).collect());
        }
    } else if leading_is_regular(&coeffs[d]) {
        return complex_companion_eigs(coeffs);
    }
    shift_invert_eigs(coeffs, Complex64::new(0.3137, -0.2729))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub omega: Complex64,
    pub converged: bool,
    pub iterations: usize,
    /// Smallest singular value of `T(omega)`.
    pub residual: f64,
}

pub fn smallest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    m.clone().singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

impl Cavity {
    /// Newton-like correction: `T(l + xi) ~ A + xi B`, `xi` the smallest root of `det(A + xi B)`.
    pub fn refine_mode(&self, lambda1: Complex64, tol: f64, max_iter: usize) -> Result<Refinement> {
        let mut l = lambda1;
        let mut iterations = 0;
        while iterations < max_iter {
            let a = self.t_matrix(l)?;
            let h = l.norm().max(1.0) * 1e-6;
            let b = (self.t_matrix(l + h)? - self.t_matrix(l - h)?) / Complex64::from(2.0 * h);
            let Some(m) = b.lu().solve(&a) else { break };
            let m = -m;
            let Some(schur) = nalgebra::Schur::try_new(m, 1e-15, 10_000) else { break };
            let (_, t) = schur.unpack();
            let xi = (0..t.nrows())
                .map(|i| t[(i, i)])
                .fold(None::<Complex64>, |best, z| match best {
                    Some(b) if b.norm() <= z.norm() => Some(b),
                    _ => Some(z),
                })
                .unwrap_or_default();
            if !(xi.re.is_finite() && xi.im.is_finite()) {
                break;
            }
            l += xi;
            iterations += 1;
            if xi.norm() <= 1e-13 * l.norm().max(1.0) {
                break;
            }
        }
        let residual = smallest_singular_value(&self.t_matrix(l)?);
        Ok(Refinement {
            omega: l,
            converged: residual < tol,
            iterations,
            residual,
        })
    }

    pub fn null_vector(&self, omega: Complex64) -> Result<NullVector> {
        let svd = self.t_matrix(omega)?.svd(false, true);
        let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD did not return V".into()))?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let pick = |i: usize| fix_phase(vt.row(i).adjoint());
        let sv = svd.singular_values[order[0]];
        let secondary = if order.len() > 1 && (svd.singular_values[order[1]] - sv).abs() < 1e-8 {
            Some(pick(order[1]))
        } else {
            None
        };
        Ok(NullVector {
            vector: pick(order[0]),
            singular_value: sv,
            secondary,
        })
    }
}

/// Unit vector, largest-magnitude entry made real positive (first one on ties).
fn fix_phase(mut v: DVector<Complex64>) -> DVector<Complex64> {
    let nrm = v.norm();
    if nrm > 0.0 {
        v /= Complex64::from(nrm);
    }
    let mut best = 0;
    for i in 0..v.len() {
        if v[i].norm() > v[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let z = v[best];
    if z.norm() > 0.0 {
        v *= z.conj() / z.norm();
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullVector {
    pub vector: DVector<Complex64>,
    pub singular_value: f64,
    /// Present when the two smallest singular values are within 1e-8.
    pub secondary: Option<DVector<Complex64>>,
}

pub fn refine_mode(lambda1: Complex64, stack: &BilayerStack, n_modes: usize, tol: f64) -> Result<Refinement> {
    Cavity::new(stack, n_modes)?.refine_mode(lambda1, tol, 50)
}

pub fn null_vector(omega: Complex64, stack: &BilayerStack, n_modes: usize) -> Result<NullVector> {
    Cavity::new(stack, n_modes)?.null_vector(omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOptions {
    /// Residual (smallest singular value) below which a refined mode counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Modes closer than this to a Lorentz-Drude resonance are dropped.
    pub min_denominator: f64,
    /// How many modes to keep; `None` keeps `n_modes`.
    pub keep: Option<usize>,
}

impl Default for ModeOptions {
    fn default() -> Self {
        ModeOptions {
            tol: 1e-8,
            max_iter: 50,
            min_denominator: 1e-3,
            keep: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalSolution {
    pub omegas: Vec<Complex64>,
    /// Column `m` is `v(omega_m)`.
    pub vectors: DMatrix<Complex64>,
    pub residuals: Vec<f64>,
    pub initial: Vec<Complex64>,
    pub iterations: Vec<usize>,
    /// `sum_j |omega_p^2 / d_j| |x^dag C_j x|`, the share of the mode living in the dielectric.
    pub material_weight: Vec<f64>,
    pub degenerate: Vec<bool>,
    /// Size of the companion spectrum before filtering.
    pub n_candidates: usize,
}

impl ModalSolution {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Rows are `v(omega_m)^T`.
    pub fn modal_matrix(&self) -> DMatrix<Complex64> {
        self.vectors.transpose()
    }
}

fn scale_tol(z: Complex64, rel: f64) -> f64 {
    rel * z.norm().max(1.0)
}

pub fn solve_modes(stack: &BilayerStack, n_modes: usize, opts: &ModeOptions) -> Result<ModalSolution> {
    solve_cavity_modes(&Cavity::new(stack, n_modes)?, opts)
}

/// Pencil, refinement, causal filter, then the `keep` modes with least material weight.
pub fn solve_cavity_modes(cav: &Cavity, opts: &ModeOptions) -> Result<ModalSolution> {
    let n_modes = cav.n_modes();
    let poly = polynomialize_cavity(cav, MAX_DEGREE)?;
    let lambdas = pencil_eigs(&poly)?;
    let n_candidates = lambdas.len();

    struct Cand {
        init: Complex64,
        r: Refinement,
        weight: f64,
    }
    let mut cands: Vec<Cand> = Vec::new();
    for &l in &lambdas {
        if l.im > scale_tol(l, 1e-6) || l.re < -scale_tol(l, 1e-6) {
            continue;
        }
        let r = match cav.refine_mode(l, opts.tol, opts.max_iter) {
            Ok(r) => r,
            Err(Error::Pole(_)) => continue,
            Err(e) => return Err(e),
        };
        let w = r.omega;
        if !r.converged || w.im > scale_tol(w, 1e-9) || w.re < -scale_tol(w, 1e-9) {
            continue;
        }
        if poly.factors.iter().any(|f| f.eval(w).norm() <= opts.min_denominator) {
            continue;
        }
        if cands.iter().any(|c| (c.r.omega - w).norm() < scale_tol(w, 1e-5)) {
            continue;
        }
        let x = cav.null_vector(w)?.vector;
        let weight = poly
            .factors
            .iter()
            .zip(&poly.weights)
            .map(|(f, c)| {
                let cx = c.map(Complex64::from) * &x;
                x.dotc(&cx).norm() / f.eval(w).norm()
            })
            .sum();
        cands.push(Cand { init: l, r, weight });
    }
    cands.sort_by(|a, b| {
        a.weight
            .total_cmp(&b.weight)
            .then(a.r.omega.re.total_cmp(&b.r.omega.re))
            .then(a.r.omega.im.total_cmp(&b.r.omega.im))
    });
    cands.truncate(opts.keep.unwrap_or(n_modes));
    cands.sort_by(|a, b| a.r.omega.re.total_cmp(&b.r.omega.re).then(a.r.omega.im.total_cmp(&b.r.omega.im)));

    let mut vectors = DMatrix::zeros(n_modes, cands.len());
    let mut degenerate = Vec::with_capacity(cands.len());
    for (j, c) in cands.iter().enumerate() {
        let nv = cav.null_vector(c.r.omega)?;
        vectors.set_column(j, &nv.vector);
        degenerate.push(nv.secondary.is_some());
    }
    Ok(ModalSolution {
        omegas: cands.iter().map(|c| c.r.omega).collect(),
        vectors,
        residuals: cands.iter().map(|c| c.r.residual).collect(),
        initial: cands.iter().map(|c| c.init).collect(),
        iterations: cands.iter().map(|c| c.r.iterations).collect(),
        material_weight: cands.iter().map(|c| c.weight).collect(),
        degenerate,
        n_candidates,
    })
}

/// `|omega' + conj(omega)|` where `omega'` is refined from `-conj(omega)`.
pub fn pairing_error(cav: &Cavity, omega: Complex64, tol: f64) -> Result<f64> {
    let r = cav.refine_mode(-omega.conj(), tol, 50)?;
    Ok((r.omega + omega.conj()).norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldReconstruction {
    pub times: Vec<f64>,
    pub x_grid: Vec<f64>,
    /// Time x position.
    pub frames: DMatrix<Complex64>,
    /// Modal coefficients `c = b V^+`.
    pub coefficients: DVector<Complex64>,
    /// `|c V - b|` at `tau = 0`.
    pub projection_residual: f64,
    /// Set when `cond(V)^2 > 1e12` forced a truncated pseudoinverse.
    pub truncated: bool,
    pub condition: f64,
}

impl FieldReconstruction {
    /// `(R - L) / (R + L)` of `int |Psi|^2` about `x = mid` at frame `t` (trapezoid rule).
    pub fn asymmetry(&self, t: usize, mid: f64) -> f64 {
        let (mut left, mut right) = (0.0, 0.0);
        for i in 1..self.x_grid.len() {
            let (x0, x1) = (self.x_grid[i - 1], self.x_grid[i]);
            let seg = 0.5 * (self.frames[(t, i - 1)].norm_sqr() + self.frames[(t, i)].norm_sqr()) * (x1 - x0);
            if 0.5 * (x0 + x1) < mid {
                left += seg;
            } else {
                right += seg;
            }
        }
        (right - left) / (right + left)
    }
}

pub fn reconstruct_field(
    modes: &ModalSolution,
    basis: &NeumannBasis,
    b_init: &[f64],
    taus: &[f64],
    x_grid: &[f64],
) -> Result<FieldReconstruction> {
    let n = basis.n_modes;
    if modes.is_empty() {
        return Err(Error::Contract("no modes to reconstruct from".into()));
    }
    if b_init.len() != n || modes.vectors.nrows() != n {
        return Err(Error::Contract(format!(
            "b has {} entries, basis has {n}, mode vectors have {}",
            b_init.len(),
            modes.vectors.nrows()
        )));
    }
    let v = modes.modal_matrix();
    let sv = v.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let truncated = condition * condition > 1e12;
    let cut = if truncated { smax * 1e-6 } else { smax * 1e-15 };
    let vplus = v
        .clone()
        .pseudo_inverse(cut)
        .map_err(|e| Error::Numerical(format!("pseudoinverse failed: {e}")))?;
    let b = DVector::from_iterator(n, b_init.iter().map(|&x| Complex64::from(x))).transpose();
    let c = &b * &vplus;
    let projection_residual = (&c * &v - &b).norm();
    let phi = DMatrix::from_fn(n, x_grid.len(), |m, i| Complex64::from(basis.phi(m, x_grid[i])));
    let shapes = &v * &phi;
    let mut frames = DMatrix::zeros(taus.len(), x_grid.len());
    for (t, &tau) in taus.iter().enumerate() {
        let ct = DVector::from_fn(modes.len(), |m, _| c[m] * (-I * modes.omegas[m] * tau).exp()).transpose();
        frames.set_row(t, &(ct * &shapes));
    }
    Ok(FieldReconstruction {
        times: taus.to_vec(),
        x_grid: x_grid.to_vec(),
        frames,
        coefficients: c.transpose(),
        projection_residual,
        truncated,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentz_drude_values() {
        let l = Layer { omega_p: 3.0, omega_0: 1.2, gamma: 0.05 };
        let e = lorentz_drude(Complex64::from(1.0), &l).unwrap();
        let want = 1.0 + 9.0 / Complex64::new(0.44, -0.05);
        assert!((e - want).norm() < 1e-14);
        assert!((e.re - 21.19).abs() < 0.01 && (e.im - 2.295).abs() < 0.01);
        let s = lorentz_drude_star(Complex64::from(1.0), &l).unwrap();
        assert!((s - e.conj()).norm() < 1e-14);
        let lossless = Layer { gamma: 0.0, ..l };
        assert_eq!(lorentz_drude(Complex64::from(0.0), &lossless).unwrap(), Complex64::from(1.0 + 9.0 / 1.44));
        let hit = Layer { omega_0: 1.0, gamma: 0.0, ..l };
        assert!(matches!(lorentz_drude(Complex64::from(1.0), &hit), Err(Error::Pole(_))));
    }

    #[test]
    fn profile_windows() {
        let s = BilayerStack::reference();
        let w = Complex64::from(0.9);
        assert_eq!(epsilon_profile(1.0, w, &s).unwrap(), Complex64::from(1.0));
        for idx in [0, 4, 6, 12] {
            let a = s.center(idx);
            let l = s.layers[idx];
            assert_eq!(epsilon_profile(a + s.b / 4.0, w, &s).unwrap(), lorentz_drude(w, &l).unwrap());
            assert_eq!(epsilon_profile(a - s.b / 4.0, w, &s).unwrap(), lorentz_drude_star(w, &l).unwrap());
        }
    }

    #[test]
    fn overlap_is_orthonormal_on_full_interval() {
        let b = NeumannBasis { length: 12.0, n_modes: 8 };
        let w = b.overlap(0.0, 12.0);
        assert!((w - DMatrix::identity(8, 8)).amax() < 1e-13);
    }

    #[test]
    fn empty_cavity_is_diagonal() {
        let cav = Cavity::new(&BilayerStack::empty(12.0), 6).unwrap();
        let d = cav.d_matrix(Complex64::new(0.7, -0.2)).unwrap();
        for m in 0..6 {
            for k in 0..6 {
                let want = if m == k { cav.basis.kappa(m).powi(2) } else { 0.0 };
                assert!((d[(m, k)] - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn polynomial_matches_algebraic_part() {
        let s = BilayerStack::reference();
        let cav = Cavity::new(&s, 5).unwrap();
        let p = polynomialize_cavity(&cav, MAX_DEGREE).unwrap();
        assert_eq!(p.factors.len(), 14);
        assert_eq!(p.degree(), 30);
        let w = Complex64::new(1.5, 0.2);
        let lhs = p.eval(w) / p.denominator(w);
        let rhs = cav.algebraic_t(w).unwrap();
        let err = (lhs - &rhs).camax() / rhs.camax();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn degree_cap() {
        let cav = Cavity::new(&BilayerStack::reference(), 2).unwrap();
        assert!(polynomialize_cavity(&cav, 20).unwrap_err().is_config());
    }

    #[test]
    fn phase_is_fixed() {
        let v = DVector::from_vec(vec![Complex64::new(0.0, 0.1), Complex64::new(0.0, -2.0)]);
        let f = fix_phase(v);
        assert!((f.norm() - 1.0).abs() < 1e-15);
        assert!(f[1].im.abs() < 1e-15 && f[1].re > 0.0);
    }
}
