//! The moving frame `α, α', β` along the profile curve and the conserved
//! vector `ρ`.
//!
//! The system `α'' = bd κ2 β - ad α`, `β' = -κ2 α'` is solved in coefficient
//! space relative to `u1, u2, u3`, where the inner product is `diag(a, b, d)`.
//! With `a = 0` the `u1` coefficients stay zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{FrameVectors, Vector};
use crate::ode::rk4_step;
use crate::profile::{kappas_at, profile_rhs, ProfileParams, ProfileSolution};

pub type Coeffs = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameOptions {
    /// Bound on [`FrameTrajectory::gram_drift`].
    pub tol: f64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        Self { tol: 1e-8 }
    }
}

/// Profile and frame values at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameState {
    pub g: f64,
    pub g_prime: f64,
    pub alpha: Coeffs,
    pub alpha_prime: Coeffs,
    pub beta: Coeffs,
}

impl FrameState {
    fn pack(&self) -> [f64; 11] {
        let mut y = [0.0; 11];
        y[0] = self.g;
        y[1] = self.g_prime;
        y[2..5].copy_from_slice(&self.alpha);
        y[5..8].copy_from_slice(&self.alpha_prime);
        y[8..11].copy_from_slice(&self.beta);
        y
    }

    fn unpack(y: &[f64; 11]) -> Self {
        let c = |i: usize| [y[i], y[i + 1], y[i + 2]];
        Self {
            g: y[0],
            g_prime: y[1],
            alpha: c(2),
            alpha_prime: c(5),
            beta: c(8),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrajectory {
    pub params: ProfileParams,
    pub t_grid: Vec<f64>,
    pub step: f64,
    pub origin: usize,
    pub states: Vec<FrameState>,
    pub frame: FrameVectors,
    pub rho0_coeffs: Coeffs,
    pub rho0: Vector,
    /// `max_t ‖Gram(α, β, α') - diag(a, b, d)‖∞ / max(1, c²)`, with `c` the
    /// largest coefficient at `t`; only `β, α'` enter when `a = 0`.
    pub gram_drift: f64,
    /// The same maximum without the scaling.
    pub gram_drift_abs: f64,
    /// `max_t ‖ρ(t) - ρ0‖∞ / max(1, max(g, |g'|) c)` in coefficient space.
    pub rho_drift: f64,
    pub rho_drift_abs: f64,
    /// The profile is an equilibrium and `g` is held fixed.
    pub frozen: bool,
}

fn frame_rhs(p: &ProfileParams, frozen: bool, y: &[f64; 11]) -> [f64; 11] {
    let mut out = [0.0; 11];
    if !frozen {
        let gp = profile_rhs(p, &[y[0], y[1]]);
        out[0] = gp[0];
        out[1] = gp[1];
    }
    let (_, k2) = kappas_at(p, y[0]);
    let (ad, bd) = (p.ad(), p.bd());
    for j in 0..3 {
        out[2 + j] = y[5 + j];
        out[5 + j] = bd * k2 * y[8 + j] - ad * y[2 + j];
        out[8 + j] = -k2 * y[5 + j];
    }
    out
}

/// `<x, y>` for coefficient vectors, with `<u_i, u_j> = diag(a, b, d)`.
pub fn coeff_inner(p: &ProfileParams, x: &Coeffs, y: &Coeffs) -> f64 {
    f64::from(p.a) * x[0] * y[0] + f64::from(p.b) * x[1] * y[1] + f64::from(p.d) * x[2] * y[2]
}

fn rho_coeffs(p: &ProfileParams, s: &FrameState) -> Coeffs {
    let (k1, _) = kappas_at(p, s.g);
    let da = p.ad();
    let bd = p.bd();
    let mut r = [0.0; 3];
    for (j, rj) in r.iter_mut().enumerate() {
        *rj = -s.g_prime * s.alpha_prime[j] + bd * k1 * s.g * s.beta[j] - da * s.g * s.alpha[j];
    }
    r
}

fn gram_deviation(p: &ProfileParams, s: &FrameState) -> f64 {
    let ip = |x: &Coeffs, y: &Coeffs| coeff_inner(p, x, y);
    let (a, b, d) = (f64::from(p.a), f64::from(p.b), f64::from(p.d));
    let mut dev = [
        ip(&s.beta, &s.beta) - b,
        ip(&s.alpha_prime, &s.alpha_prime) - d,
        ip(&s.beta, &s.alpha_prime),
    ]
    .iter()
    .fold(0.0f64, |m, x| m.max(x.abs()));
    if p.a != 0 {
        for x in [
            ip(&s.alpha, &s.alpha) - a,
            ip(&s.alpha, &s.beta),
            ip(&s.alpha, &s.alpha_prime),
        ] {
            dev = dev.max(x.abs());
        }
    }
    dev
}

/// `ρ0 = -g'(0) u3 + bd g(0) κ1(0) u2 - da g(0) u1`.
pub fn rho0(p: &ProfileParams, g0: f64, g_prime0: f64, frame: &FrameVectors) -> Result<Vector> {
    if !(g0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "g0 must be positive, got {g0}"
        )));
    }
    Ok(frame.combine(&rho0_coeffs(p, g0, g_prime0)))
}

fn rho0_coeffs(p: &ProfileParams, g0: f64, g_prime0: f64) -> Coeffs {
    let (k1, _) = kappas_at(p, g0);
    [-p.ad() * g0, p.bd() * g0 * k1, -g_prime0]
}

fn initial_state(p: &ProfileParams, g0: f64, g_prime0: f64) -> FrameState {
    FrameState {
        g: g0,
        g_prime: g_prime0,
        alpha: [if p.a != 0 { 1.0 } else { 0.0 }, 0.0, 0.0],
        alpha_prime: [0.0, 0.0, 1.0],
        beta: [0.0, 1.0, 0.0],
    }
}

/// Integrate the frame on the profile's grid, stepping the profile alongside
/// with the same RK4 step and resetting `g, g'` to the profile's values at
/// every node.
pub fn integrate_frame(
    p: &ProfileParams,
    sol: &ProfileSolution,
    frame: &FrameVectors,
    opts: &FrameOptions,
) -> Result<FrameTrajectory> {
    if sol.params != *p {
        return Err(Error::InvalidInput(
            "profile solution was computed for other parameters".into(),
        ));
    }
    if frame.signs != p.signs() {
        return Err(Error::InvalidInput(
            "frame vectors have signs different from the profile".into(),
        ));
    }
    let len = sol.len();
    if len == 0 || sol.origin >= len || sol.g.len() != len || sol.g_prime.len() != len {
        return Err(Error::InvalidInput(
            "profile grid is empty or inconsistent".into(),
        ));
    }
    let h = sol.step;
    let mismatch = sol
        .t_grid
        .iter()
        .enumerate()
        .any(|(i, t)| (t - (i as f64 - sol.origin as f64) * h).abs() > 1e-9 * h.max(t.abs()));
    if mismatch {
        return Err(Error::InvalidInput("profile grid is not uniform".into()));
    }
    let frozen = sol.is_equilibrium();
    let o = sol.origin;
    let start = initial_state(p, sol.g[o], sol.g_prime[o]);

    let mut states = vec![start; len];
    let mut advance = |range: &mut dyn Iterator<Item = (usize, usize)>, dt: f64| {
        for (from, to) in range {
            let y = rk4_step(|s| frame_rhs(p, frozen, s), &states[from].pack(), dt);
            let mut next = FrameState::unpack(&y);
            next.g = sol.g[to];
            next.g_prime = sol.g_prime[to];
            states[to] = next;
        }
    };
    advance(&mut (o..len - 1).map(|i| (i, i + 1)), h);
    advance(&mut (1..=o).rev().map(|i| (i, i - 1)), -h);

    let rho0_c = rho0_coeffs(p, start.g, start.g_prime);
    let (mut gram_drift, mut gram_drift_abs) = (0.0f64, 0.0f64);
    let (mut rho_drift, mut rho_drift_abs) = (0.0f64, 0.0f64);
    for s in &states {
        let mut c = 0.0f64;
        for x in s.alpha.iter().chain(&s.alpha_prime).chain(&s.beta) {
            if !x.is_finite() {
                return Err(Error::NumericalFailure("frame became non-finite".into()));
            }
            c = c.max(x.abs());
        }
        let dev = gram_deviation(p, s);
        gram_drift_abs = gram_drift_abs.max(dev);
        gram_drift = gram_drift.max(dev / (c * c).max(1.0));
        let r = rho_coeffs(p, s);
        let rho_scale = (s.g.max(s.g_prime.abs()) * c).max(1.0);
        for j in 0..3 {
            let e = (r[j] - rho0_c[j]).abs();
            rho_drift_abs = rho_drift_abs.max(e);
            rho_drift = rho_drift.max(e / rho_scale);
        }
    }
    if !(gram_drift < opts.tol) {
        return Err(Error::NumericalFailure(format!(
            "frame Gram drift {gram_drift:e} exceeds tolerance {:e}",
            opts.tol
        )));
    }
    Ok(FrameTrajectory {
        params: *p,
        t_grid: sol.t_grid.clone(),
        step: h,
        origin: o,
        states,
        frame: frame.clone(),
        rho0_coeffs: rho0_c,
        rho0: frame.combine(&rho0_c),
        gram_drift,
        gram_drift_abs,
        rho_drift,
        rho_drift_abs,
        frozen,
    })
}

impl FrameTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "grid index {i} out of range 0..{}",
                self.len()
            )))
        }
    }

    pub fn state(&self, i: usize) -> Result<&FrameState> {
        self.check_index(i)?;
        Ok(&self.states[i])
    }

    /// State at `t_i + dt` from one RK4 step off grid node `i`.
    pub fn local_state(&self, i: usize, dt: f64) -> Result<FrameState> {
        self.check_index(i)?;
        if dt == 0.0 {
            return Ok(self.states[i]);
        }
        let p = &self.params;
        let y = rk4_step(|s| frame_rhs(p, self.frozen, s), &self.states[i].pack(), dt);
        Ok(FrameState::unpack(&y))
    }

    pub fn alpha(&self, i: usize) -> Result<Vector> {
        Ok(self.frame.combine(&self.state(i)?.alpha))
    }

    pub fn alpha_prime(&self, i: usize) -> Result<Vector> {
        Ok(self.frame.combine(&self.state(i)?.alpha_prime))
    }

    pub fn beta(&self, i: usize) -> Result<Vector> {
        Ok(self.frame.combine(&self.state(i)?.beta))
    }

    /// `ρ = -g' α' + bd κ1 g β - da g α` at grid node `i`.
    pub fn rho_coeffs_at(&self, i: usize) -> Result<Coeffs> {
        Ok(rho_coeffs(&self.params, self.state(i)?))
    }
}

/// `ρ(t_i)` in the embedding space.
pub fn rho_t(traj: &FrameTrajectory, t_index: usize) -> Result<Vector> {
    Ok(traj.frame.combine(&traj.rho_coeffs_at(t_index)?))
}
