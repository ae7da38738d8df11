//! One driver per subcommand: parse, validate, compute, write.

use std::path::Path;

use maxwell_daemon_core::classical::step_ensemble;
use maxwell_daemon_core::dielectric::{harmonic_approx, solve_epsilon_ode, EpsilonProfile};
use maxwell_daemon_core::em::{branch_warnings, pairing_error, reconstruct_field, solve_cavity_modes, Cavity};
use maxwell_daemon_core::greens::{Container, PoleKind};
use maxwell_daemon_core::lattice::{boltzmann_state, build_hamiltonian, diagonalize, evolve, uniform_state};
use maxwell_daemon_core::observables::{
    density_carpet, free_energy_basis, lateral_energy, lateral_probability, potential_work_trace, shannon_entropy,
    LateralTrace,
};
use maxwell_daemon_core::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    parse, ClassicalConfig, EmConfig, EpsilonConfig, GreensConfig, InitialState, LatticeRunConfig, PerturbationKind,
};
use crate::output::{num, OutputDir, RunManifest};
use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    LatticeRun,
    Greens,
    Classical,
    Epsilon,
    Em,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::LatticeRun => "lattice-run",
            Subcommand::Greens => "greens",
            Subcommand::Classical => "classical",
            Subcommand::Epsilon => "epsilon",
            Subcommand::Em => "em",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub manifest: RunManifest,
    /// Human-readable lines for standard output.
    pub summary: Vec<String>,
    /// Lines for standard error; the run still succeeded.
    pub warnings: Vec<String>,
}

/// Parse and validate a config without running it.
pub fn check(sub: Subcommand, text: &str, origin: &str) -> Result<(), RunError> {
    match sub {
        Subcommand::LatticeRun => parse::<LatticeRunConfig>(text, origin)?.validate(),
        Subcommand::Greens => parse::<GreensConfig>(text, origin)?.validate(),
        Subcommand::Classical => parse::<ClassicalConfig>(text, origin)?.ensemble().map(|_| ()),
        Subcommand::Epsilon => parse::<EpsilonConfig>(text, origin)?.validate(),
        Subcommand::Em => parse::<EmConfig>(text, origin)?.validate(),
    }
}

pub fn run_text(sub: Subcommand, text: &str, origin: &str, out: &Path) -> Result<Report, RunError> {
    match sub {
        Subcommand::LatticeRun => lattice_run(&parse(text, origin)?, out),
        Subcommand::Greens => greens(&parse(text, origin)?, out),
        Subcommand::Classical => classical(&parse(text, origin)?, out),
        Subcommand::Epsilon => epsilon(&parse(text, origin)?, out),
        Subcommand::Em => em(&parse(text, origin)?, out),
    }
}

fn report<C: Serialize>(dir: OutputDir, sub: Subcommand, cfg: &C, summary: Vec<String>, warnings: Vec<String>) -> Result<Report, RunError> {
    Ok(Report {
        manifest: dir.finish(sub.name(), cfg)?,
        summary,
        warnings,
    })
}

fn lateral_rows(tr: &LateralTrace) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..tr.taus.len()).map(|t| vec![num(tr.taus[t]), num(tr.left[t]), num(tr.center[t]), num(tr.right[t])])
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i] < v[best] { i } else { best })
}

pub fn lattice_run(cfg: &LatticeRunConfig, out: &Path) -> Result<Report, RunError> {
    cfg.validate()?;
    let dc = cfg.daemon()?;
    let h = build_hamiltonian(&dc)?;
    let eig = diagonalize(&h)?;
    let basis = free_energy_basis(&dc)?;
    let taus = cfg.taus();
    let mut dir = OutputDir::create(out)?;
    let mut summary = Vec::new();

    if let Some(betas) = &cfg.betas {
        let runs = betas
            .par_iter()
            .map(|&beta| {
                let field = evolve(&eig, &boltzmann_state(&dc, beta)?, &taus)?;
                Ok((shannon_entropy(&field, &basis)?, lateral_probability(&field)))
            })
            .collect::<Result<Vec<_>, maxwell_daemon_core::Error>>()?;
        let mut sweep = Vec::with_capacity(betas.len());
        for (i, (beta, (ent, lat))) in betas.iter().zip(&runs).enumerate() {
            let name = format!("entropy_beta_{i:02}.csv");
            dir.write_csv(
                &name,
                &["tau", "sigma"],
                ent.taus.iter().zip(&ent.sigma).map(|(t, s)| vec![num(*t), num(*s)]),
            )?;
            let m = argmin(&ent.sigma);
            let gaps: Vec<f64> = (0..lat.taus.len()).map(|t| -(lat.right[t] - lat.left[t]).abs()).collect();
            let g = argmin(&gaps);
            sweep.push(vec![
                i.to_string(),
                num(*beta),
                name,
                num(ent.sigma[0]),
                num(ent.sigma[m]),
                num(ent.taus[m]),
                num(-gaps[g]),
                num(lat.taus[g]),
            ]);
        }
        dir.write_csv(
            "sweep.csv",
            &["index", "beta", "file", "sigma_initial", "sigma_min", "tau_sigma_min", "max_lateral_gap", "tau_max_gap"],
            sweep,
        )?;
        summary.push(format!("{} entropy traces written", betas.len()));
        return report(dir, Subcommand::LatticeRun, cfg, summary, Vec::new());
    }

    let psi0 = match cfg.state {
        InitialState::Uniform => uniform_state(&dc),
        InitialState::Boltzmann => boltzmann_state(&dc, cfg.beta.unwrap_or_default())?,
    };
    let field = evolve(&eig, &psi0, &taus)?;
    let ent = shannon_entropy(&field, &basis)?;
    dir.write_csv(
        "entropy.csv",
        &["tau", "sigma"],
        ent.taus.iter().zip(&ent.sigma).map(|(t, s)| vec![num(*t), num(*s)]),
    )?;
    let lp = lateral_probability(&field);
    dir.write_csv("lateral_prob.csv", &["tau", "left", "center", "right"], lateral_rows(&lp))?;
    let le = lateral_energy(&field, &h)?;
    dir.write_csv("lateral_energy.csv", &["tau", "left", "center", "right"], lateral_rows(&le))?;
    let pot = potential_work_trace(&field, &dc)?;
    dir.write_csv(
        "potential.csv",
        &["tau", "potential", "running_mean"],
        (0..taus.len()).map(|t| vec![num(taus[t]), num(pot.potential[t]), num(pot.running_mean[t])]),
    )?;
    let carpet = density_carpet(&field);
    let rows = (0..taus.len()).step_by(cfg.carpet_stride).flat_map(|t| {
        let carpet = &carpet;
        let taus = &taus;
        (0..dc.dim()).map(move |i| vec![num(taus[t]), dc.site(i).to_string(), num(carpet[(t, i)])])
    });
    dir.write_csv("carpet.csv", &["tau", "n", "density"], rows)?;

    let m = argmin(&pot.potential);
    let negative = pot.potential.iter().filter(|v| **v < 0.0).count();
    let last = *pot.running_mean.last().unwrap_or(&0.0);
    summary.push(format!(
        "<V>: minimum {} at tau = {}; negative on {negative} of {} frames; running mean at end {} ({})",
        num(pot.potential[m]),
        num(taus[m]),
        taus.len(),
        num(last),
        if last < 0.0 {
            "negative"
        } else if last > 0.0 {
            "positive"
        } else {
            "zero"
        }
    ));
    let e = argmin(&ent.sigma);
    summary.push(format!(
        "entropy: initial {}, minimum {} at tau = {}",
        num(ent.sigma[0]),
        num(ent.sigma[e]),
        num(ent.taus[e])
    ));
    report(dir, Subcommand::LatticeRun, cfg, summary, Vec::new())
}

pub fn greens(cfg: &GreensConfig, out: &Path) -> Result<Report, RunError> {
    cfg.validate()?;
    let c = Container::new(cfg.spec()?)?;
    let pert = cfg.perturbation();
    let energies = cfg.energies();
    let blocks = energies
        .par_iter()
        .map(|&e| {
            let mut rows = Vec::with_capacity(cfg.x.len() * cfg.xp.len());
            for &x in &cfg.x {
                for &xp in &cfg.xp {
                    let g = c.green(x, xp, e, pert)?;
                    rows.push(vec![
                        num(x),
                        num(xp),
                        num(e),
                        num(g.value.re),
                        num(g.value.im),
                        num(g.g0.re),
                        num(g.g0.im),
                    ]);
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>, maxwell_daemon_core::Error>>()?;
    let mut dir = OutputDir::create(out)?;
    dir.write_csv(
        "green_grid.csv",
        &["x", "xp", "E", "re_G", "im_G", "re_G0", "im_G0"],
        blocks.into_iter().flatten(),
    )?;

    let (lo, hi) = cfg.pole_range();
    let table = match cfg.perturbation {
        PerturbationKind::Constant => c.find_delta_poles(cfg.v0, lo, hi)?,
        PerturbationKind::Zero => Container::new(cfg.spec()?.with_coupling(0.0))?.find_poles(lo, hi)?,
        _ => c.find_poles(lo, hi)?,
    };
    let mut rows: Vec<(f64, usize, PoleKind)> = table.bare.iter().map(|&(n, e)| (e, n, PoleKind::Bare)).collect();
    rows.extend(table.roots.iter().map(|r| (r.energy, r.parent, r.kind)));
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n_new = table.roots.iter().filter(|r| r.kind == PoleKind::New).count();
    dir.write_csv(
        "poles.csv",
        &["energy", "level", "kind"],
        rows.iter().map(|(e, n, k)| vec![num(*e), n.to_string(), k.as_str().to_string()]),
    )?;
    let summary = vec![format!(
        "{} grid points; {} bare levels and {} roots ({n_new} new) in [{}, {}]",
        energies.len() * cfg.x.len() * cfg.xp.len(),
        table.bare.len(),
        table.roots.len(),
        num(lo),
        num(hi)
    )];
    report(dir, Subcommand::Greens, cfg, summary, Vec::new())
}

pub fn classical(cfg: &ClassicalConfig, out: &Path) -> Result<Report, RunError> {
    let ens = cfg.ensemble()?;
    let snaps = step_ensemble(&ens, cfg.dt, cfg.n_steps, cfg.snapshot_every)?;
    let time = |j: usize| (j * cfg.snapshot_every).min(cfg.n_steps) as f64 * cfg.dt;
    let mut dir = OutputDir::create(out)?;
    let traj = snaps.iter().enumerate().flat_map(|(j, s)| {
        s.particles
            .iter()
            .enumerate()
            .step_by(cfg.trajectory_stride)
            .map(move |(i, q)| vec![j.to_string(), num(time(j)), i.to_string(), num(q.x), num(q.p)])
    });
    dir.write_csv("trajectory.csv", &["snapshot", "t", "particle", "x", "p"], traj)?;
    let occ: Vec<_> = snaps.iter().map(|s| s.occupancy()).collect();
    dir.write_csv(
        "occupancy.csv",
        &[
            "snapshot",
            "t",
            "slow_left",
            "fast_right",
            "free_left",
            "n_slow",
            "n_fast",
            "n_free",
            "temperature_left",
            "temperature_right",
        ],
        occ.iter().enumerate().map(|(j, o)| {
            vec![
                j.to_string(),
                num(time(j)),
                num(o.slow_left),
                num(o.fast_right),
                num(o.free_left),
                o.n_slow.to_string(),
                o.n_fast.to_string(),
                o.n_free.to_string(),
                num(o.temperature_left),
                num(o.temperature_right),
            ]
        }),
    )?;
    let last = occ.last().copied().unwrap_or_default();
    let summary = vec![format!(
        "final occupancy: slow-left {}, fast-right {}, above-cutoff-left {}",
        num(last.slow_left),
        num(last.fast_right),
        num(last.free_left)
    )];
    report(dir, Subcommand::Classical, cfg, summary, Vec::new())
}

pub fn epsilon(cfg: &EpsilonConfig, out: &Path) -> Result<Report, RunError> {
    cfg.validate()?;
    let omegas = cfg.omegas();
    let profiles = omegas
        .par_iter()
        .map(|&w| solve_epsilon_ode(&cfg.spec(w)))
        .collect::<Result<Vec<EpsilonProfile>, _>>()?;
    let mut header = vec!["omega_over_c", "x", "re_eps", "im_eps", "re_dlog", "im_dlog", "re_vb", "im_vb"];
    if cfg.harmonic_compare {
        header.extend(["re_eps_harmonic", "im_eps_harmonic"]);
    }
    let mut rows = Vec::new();
    let mut worst_parity = 0.0f64;
    for (&w, p) in omegas.iter().zip(&profiles) {
        let spec = cfg.spec(w);
        for i in 0..p.x.len() {
            let mut row = vec![
                num(w),
                num(p.x[i]),
                num(p.eps[i].re),
                num(p.eps[i].im),
                num(p.dlog[i].re),
                num(p.dlog[i].im),
                num(p.v_b[i].re),
                num(p.v_b[i].im),
            ];
            if cfg.harmonic_compare {
                let (_, e) = harmonic_approx(p.x[i], &spec);
                row.extend([num(e.re), num(e.im)]);
            }
            rows.push(row);
        }
        worst_parity = worst_parity.max(parity_defect(p));
    }
    let mut dir = OutputDir::create(out)?;
    dir.write_csv("epsilon.csv", &header, rows)?;
    let summary = vec![format!(
        "{} frequencies; largest parity defect |eps(-x) - conj(eps(x))| = {}",
        omegas.len(),
        num(worst_parity)
    )];
    report(dir, Subcommand::Epsilon, cfg, summary, Vec::new())
}

/// `max |eps(-x) - conj(eps(x))|` over mirrored grid pairs; `NaN` if the grid is not symmetric.
pub fn parity_defect(p: &EpsilonProfile) -> f64 {
    let n = p.x.len();
    let mut worst = 0.0f64;
    for i in 0..n / 2 {
        let j = n - 1 - i;
        if (p.x[i] + p.x[j]).abs() > 1e-12 * p.x[j].abs().max(1.0) {
            return f64::NAN;
        }
        worst = worst.max((p.eps[i] - p.eps[j].conj()).norm());
    }
    worst
}

pub fn em(cfg: &EmConfig, out: &Path) -> Result<Report, RunError> {
    cfg.validate()?;
    let stack = cfg.stack();
    let mut cav = Cavity::new(&stack, cfg.n_modes)?;
    if !cfg.log_terms {
        cav = cav.without_log_terms();
    }
    let modes = solve_cavity_modes(&cav, &cfg.options())?;
    if modes.is_empty() {
        return Err(RunError::Numerical("no causal modes survived filtering".into()));
    }
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(modes.len());
    for m in 0..modes.len() {
        let w = modes.omegas[m];
        let pair = pairing_error(&cav, w, cfg.tol)?;
        let near = branch_warnings(w, &stack)?;
        if !near.is_empty() {
            let mut layers: Vec<usize> = near.iter().map(|b| b.layer).collect();
            layers.dedup();
            warnings.push(format!(
                "mode {m} (omega = {} {:+}i): eps near the negative real axis in layers {layers:?}",
                num(w.re),
                w.im
            ));
        }
        rows.push(vec![
            m.to_string(),
            num(w.re),
            num(w.im),
            num(modes.residuals[m]),
            modes.iterations[m].to_string(),
            num(modes.initial[m].re),
            num(modes.initial[m].im),
            num(modes.material_weight[m]),
            modes.degenerate[m].to_string(),
            num(pair),
        ]);
    }
    let mut dir = OutputDir::create(out)?;
    dir.write_csv(
        "modes.csv",
        &[
            "mode",
            "re_omega",
            "im_omega",
            "residual",
            "iterations",
            "re_initial",
            "im_initial",
            "material_weight",
            "degenerate",
            "pairing_error",
        ],
        rows,
    )?;
    if cfg.write_vectors {
        let v = &modes.vectors;
        dir.write_csv(
            "mode_vectors.csv",
            &["mode", "n", "re", "im"],
            (0..v.ncols()).flat_map(|m| (0..v.nrows()).map(move |n| vec![m.to_string(), n.to_string(), num(v[(n, m)].re), num(v[(n, m)].im)])),
        )?;
    }

    let taus = cfg.taus();
    let xs = cfg.x_grid();
    let field = reconstruct_field(&modes, &cav.basis, &cfg.b_vector(), &taus, &xs)?;
    let frames = &field.frames;
    dir.write_csv(
        "field.csv",
        &["x", "tau", "re", "im", "abs2"],
        (0..taus.len()).flat_map(|t| {
            let (taus, xs) = (&taus, &xs);
            (0..xs.len()).map(move |i| {
                let z: Complex64 = frames[(t, i)];
                vec![num(xs[i]), num(taus[t]), num(z.re), num(z.im), num(z.norm_sqr())]
            })
        }),
    )?;

    let mut summary = vec![
        format!("{} modes kept from {} candidates", modes.len(), modes.n_candidates),
        format!(
            "largest residual {}; modal matrix condition {}; projection residual {}{}",
            num(modes.residuals.iter().cloned().fold(0.0, f64::max)),
            num(field.condition),
            num(field.projection_residual),
            if field.truncated { " (pseudoinverse truncated)" } else { "" }
        ),
    ];
    let t1 = argmin(&taus.iter().map(|t| (t - 1.0).abs()).collect::<Vec<_>>());
    summary.push(format!(
        "left/right asymmetry at tau = {}: {}",
        num(taus[t1]),
        num(field.asymmetry(t1, 0.5 * cfg.length))
    ));
    report(dir, Subcommand::Em, cfg, summary, warnings)
}
