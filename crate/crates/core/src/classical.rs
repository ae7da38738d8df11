//! Classical phase-space daemon: free flight in `[-x_L, x_L]` with a
//! momentum-selective wall at `x = 0`. Mass is 1.

use alloc::format;
use alloc::vec::Vec;

use crate::{heaviside, Error, Result};

/// `f_pm(|p|)` from `2 f_pm = Theta(P_R - |p|) pm Theta(|p| - P_R) -+ Theta(|p| - P_UV)`.
pub fn band_weights(abs_p: f64, p_r: f64, p_uv: f64) -> (f64, f64) {
    let below = heaviside(p_r - abs_p);
    let above = heaviside(abs_p - p_r);
    let cut = heaviside(abs_p - p_uv);
    (0.5 * (below + above - cut), 0.5 * (below - above + cut))
}

/// `V_act(p) = f_-(|p|) sgn(p) + f_+(|p|)`.
///
/// Nonzero on `0 < p < P_R` and on `-P_UV < p < -P_R`, where it equals `+1`.
pub fn activation(p: f64, p_r: f64, p_uv: f64) -> f64 {
    let (fp, fm) = band_weights(p.abs(), p_r, p_uv);
    let sgn = if p > 0.0 {
        1.0
    } else if p < 0.0 {
        -1.0
    } else {
        0.0
    };
    fm * sgn + fp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    pub particles: Vec<Particle>,
    pub p_r: f64,
    pub p_uv: f64,
    pub x_l: f64,
}

/// Momentum classes used for occupancy summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Slow,
    Fast,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Occupancy {
    /// Fraction of slow (`|p| < P_R`) particles on the left.
    pub slow_left: f64,
    /// Fraction of fast (`P_R < |p| < P_UV`) particles on the right.
    pub fast_right: f64,
    /// Fraction of above-cutoff particles on the left.
    pub free_left: f64,
    pub n_slow: usize,
    pub n_fast: usize,
    pub n_free: usize,
    /// Mean `p^2` on each side; `NaN` for an empty side.
    pub temperature_left: f64,
    pub temperature_right: f64,
}

impl ClassicalEnsemble {
    pub fn new(particles: Vec<Particle>, p_r: f64, p_uv: f64, x_l: f64) -> Result<Self> {
        let e = ClassicalEnsemble {
            particles,
            p_r,
            p_uv,
            x_l,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_r > 0.0 && self.p_uv > self.p_r && self.x_l > 0.0) {
            return Err(Error::Config(format!(
                "need 0 < p_r < p_uv and x_l > 0, got p_r = {}, p_uv = {}, x_l = {}",
                self.p_r, self.p_uv, self.x_l
            )));
        }
        if let Some(q) = self.particles.iter().find(|q| !(q.x.abs() <= self.x_l) || !q.p.is_finite()) {
            return Err(Error::Config(format!("particle ({}, {}) outside the box", q.x, q.p)));
        }
        Ok(())
    }

    pub fn band(&self, p: f64) -> Band {
        let a = p.abs();
        if a < self.p_r {
            Band::Slow
        } else if a < self.p_uv {
            Band::Fast
        } else {
            Band::Free
        }
    }

    pub fn occupancy(&self) -> Occupancy {
        let mut o = Occupancy::default();
        let (mut sl, mut fr, mut fl) = (0usize, 0usize, 0usize);
        let (mut tl, mut nl, mut tr, mut nr) = (0.0, 0usize, 0.0, 0usize);
        for q in &self.particles {
            let left = is_left(q);
            match self.band(q.p) {
                Band::Slow => {
                    o.n_slow += 1;
                    sl += left as usize;
                }
                Band::Fast => {
                    o.n_fast += 1;
                    fr += (!left) as usize;
                }
                Band::Free => {
                    o.n_free += 1;
                    fl += left as usize;
                }
            }
            if left {
                tl += q.p * q.p;
                nl += 1;
            } else {
                tr += q.p * q.p;
                nr += 1;
            }
        }
        let frac = |k: usize, n: usize| if n == 0 { f64::NAN } else { k as f64 / n as f64 };
        o.slow_left = frac(sl, o.n_slow);
        o.fast_right = frac(fr, o.n_fast);
        o.free_left = frac(fl, o.n_free);
        o.temperature_left = if nl == 0 { f64::NAN } else { tl / nl as f64 };
        o.temperature_right = if nr == 0 { f64::NAN } else { tr / nr as f64 };
        o
    }
}

/// Left compartment; a particle sitting on the daemon belongs to the side it moves into.
pub fn is_left(q: &Particle) -> bool {
    q.x < 0.0 || (q.x == 0.0 && q.p < 0.0)
}

/// Advance one particle by `dt`, resolving wall and daemon events exactly.
pub fn advance(q: Particle, dt: f64, p_r: f64, p_uv: f64, x_l: f64) -> Particle {
    let Particle { mut x, mut p } = q;
    if p == 0.0 {
        return q;
    }
    let mut left = dt;
    while left > 0.0 {
        let wall = if p > 0.0 { x_l } else { -x_l };
        let t_wall = (wall - x) / p;
        let approaching = (x < 0.0 && p > 0.0) || (x > 0.0 && p < 0.0);
        let t_origin = if approaching { -x / p } else { f64::INFINITY };
        if t_origin < t_wall && t_origin <= left {
            left -= t_origin;
            x = 0.0;
            if activation(p, p_r, p_uv) != 0.0 {
                p = -p;
            }
        } else if t_wall <= left {
            left -= t_wall;
            x = wall;
            p = -p;
        } else {
            x = (x + p * left).clamp(-x_l, x_l);
            left = 0.0;
        }
    }
    Particle { x, p }
}

/// Snapshots after every `every` steps (the initial state is snapshot 0).
pub fn step_ensemble(ens: &ClassicalEnsemble, dt: f64, n_steps: usize, every: usize) -> Result<Vec<ClassicalEnsemble>> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt = {dt} must be positive")));
    }
    ens.validate()?;
    let every = every.max(1);
    let mut out = Vec::with_capacity(n_steps / every + 1);
    let mut cur = ens.clone();
    out.push(cur.clone());
    for step in 1..=n_steps {
        for q in cur.particles.iter_mut() {
            *q = advance(*q, dt, ens.p_r, ens.p_uv, ens.x_l);
        }
        if step % every == 0 || step == n_steps {
            out.push(cur.clone());
        }
    }
    Ok(out)
}
