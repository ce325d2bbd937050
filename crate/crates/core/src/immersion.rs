//! The explicit immersion `φ(y, t)`, its Gauss map `ν`, curvature scalars, and
//! a finite-difference check of the principal curvatures.

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{integrate_frame, FrameOptions, FrameState, FrameTrajectory};
use crate::metric::{
    orth_complement_basis, pick_frame, sample_flat, sample_quadric, SignatureMetric, SpaceFormSpec,
    Vector,
};
use crate::profile::{
    classify, integrate_profile, kappas_at, IntegrationOptions, ProfileParams, ProfileSolution,
};

/// `|C|` at or below this uses the `C = 0` construction.
pub const ZERO_C: f64 = 1e-12;

/// Normalized tangent Gram determinants below this are degenerate.
const DEGENERATE_GRAM: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstructionCase {
    CzeroAnzero,
    CzeroAzero,
    CnonzeroAnzero,
    CnonzeroAzero,
}

impl ConstructionCase {
    pub fn select(p: &ProfileParams) -> Self {
        match (p.c.abs() <= ZERO_C, p.a == 0) {
            (true, false) => ConstructionCase::CzeroAnzero,
            (true, true) => ConstructionCase::CzeroAzero,
            (false, false) => ConstructionCase::CnonzeroAnzero,
            (false, true) => ConstructionCase::CnonzeroAzero,
        }
    }

    pub fn c_is_zero(&self) -> bool {
        matches!(
            self,
            ConstructionCase::CzeroAnzero | ConstructionCase::CzeroAzero
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImmersionOptions {
    pub integration: IntegrationOptions,
    pub frame: FrameOptions,
    /// Index `k` of the ambient space form; the smallest admissible one when `None`.
    pub index: Option<usize>,
    pub s_count: usize,
    pub seed: u64,
    /// Half-width of the coefficient box sampled on the flat factor when `C = 0`.
    pub flat_radius: f64,
}

impl Default for ImmersionOptions {
    fn default() -> Self {
        Self {
            integration: IntegrationOptions::default(),
            frame: FrameOptions::default(),
            index: None,
            s_count: 8,
            seed: 0,
            flat_radius: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImmersionSpec {
    pub params: ProfileParams,
    pub case: ConstructionCase,
    pub space: SpaceFormSpec,
    pub solution: ProfileSolution,
    pub frame: FrameTrajectory,
    /// Orthogonal basis `E_1, ..., E_{n-1}` of the complement of `u1, u2, u3`.
    pub complement: Vec<Vector>,
    /// Basis of the linear span holding `S`: the complement, plus `ρ0` when `C ≠ 0`.
    pub s_basis: Vec<Vector>,
    /// `<y, y>` on `S` when `C ≠ 0`.
    pub quadric: Option<f64>,
    pub s_points: Vec<Vector>,
}

impl ImmersionSpec {
    /// Assemble the construction from an integrated profile and frame.
    pub fn new(
        space: SpaceFormSpec,
        solution: ProfileSolution,
        frame: FrameTrajectory,
        s_count: usize,
        seed: u64,
        flat_radius: f64,
    ) -> Result<Self> {
        let params = solution.params;
        if frame.params != params || frame.len() != solution.len() {
            return Err(Error::InvalidInput("frame and profile do not match".into()));
        }
        if space.embedding_dim() != frame.frame.metric.dim() {
            return Err(Error::InvalidInput(
                "frame vectors live in another space".into(),
            ));
        }
        let case = ConstructionCase::select(&params);
        let metric = frame.frame.metric;
        let vs: Vec<Vector> = frame.frame.vectors().into_iter().cloned().collect();
        let complement = orth_complement_basis(&metric, &vs)?;
        let wanted = params.n - 1;
        if complement.len() != wanted {
            return Err(Error::DegenerateComplement {
                found: complement.len(),
                wanted,
            });
        }
        let (s_basis, quadric, s_points) = if case.c_is_zero() {
            let pts = sample_flat(&metric, &complement, flat_radius, s_count, seed)?;
            (complement.clone(), None, pts)
        } else {
            let mut basis = complement.clone();
            basis.push(frame.rho0.clone());
            let target = f64::from(params.d) * params.c.signum();
            let pts = sample_quadric(&metric, &basis, target, s_count, seed)?;
            (basis, Some(target), pts)
        };
        Ok(Self {
            params,
            case,
            space,
            solution,
            frame,
            complement,
            s_basis,
            quadric,
            s_points,
        })
    }

    /// Integrate the profile from `g0` and the frame, then assemble.
    pub fn build(params: &ProfileParams, g0: f64, opts: &ImmersionOptions) -> Result<Self> {
        let cls = classify(params);
        if cls.branch_containing(g0).is_none() {
            return Err(Error::InvalidInput(format!(
                "g0 = {g0} lies on no branch admitting a solution on the whole line"
            )));
        }
        let solution = integrate_profile(params, g0, &opts.integration)?;
        let signs = params.signs();
        // the frame needs one negative direction for each of b, d equal to -1
        let k = opts
            .index
            .unwrap_or(usize::from(signs.b < 0) + usize::from(signs.d < 0));
        let space = SpaceFormSpec::new(params.n, k, params.a)?;
        let vectors = pick_frame(&space, &signs)?;
        let frame = integrate_frame(params, &solution, &vectors, &opts.frame)?;
        Self::new(
            space,
            solution,
            frame,
            opts.s_count,
            opts.seed,
            opts.flat_radius,
        )
    }

    pub fn metric(&self) -> &SignatureMetric {
        &self.frame.frame.metric
    }

    /// Reject points off `S`.
    pub fn check_point(&self, y: &Vector) -> Result<()> {
        let m = self.metric();
        if y.len() != m.dim() {
            return Err(Error::InvalidInput(format!(
                "y has length {}, expected {}",
                y.len(),
                m.dim()
            )));
        }
        let scale = y.amax().max(1.0);
        let fv = &self.frame.frame;
        let mut residual = Vector::zeros(m.dim());
        for u in fv.vectors() {
            residual += u * (m.dot(y, u) / m.norm_sq(u));
        }
        if let Some(target) = self.quadric {
            let rho = &self.frame.rho0;
            residual -= rho * (m.dot(y, rho) / m.norm_sq(rho));
            if (m.norm_sq(y) - target).abs() > 1e-10 * scale * scale {
                return Err(Error::InvalidInput(format!(
                    "<y, y> = {} but S needs {target}",
                    m.norm_sq(y)
                )));
            }
        }
        if residual.amax() > 1e-12 * scale {
            return Err(Error::InvalidInput(
                "y has a component along the frame outside S".into(),
            ));
        }
        Ok(())
    }

    fn point_at(&self, s: &FrameState, y: &Vector) -> Vector {
        let p = &self.params;
        let m = self.metric();
        let alpha = self.frame.frame.combine(&s.alpha);
        let rho = &self.frame.rho0;
        if self.case.c_is_zero() {
            let d = f64::from(p.d);
            y + alpha + rho * (d * m.norm_sq(y) / (2.0 * s.g))
        } else {
            let sc = p.c.abs().sqrt();
            y * (s.g / sc) + alpha + rho * (s.g / p.c)
        }
    }

    fn gauss_at(&self, s: &FrameState, y: &Vector) -> Vector {
        let p = &self.params;
        let m = self.metric();
        let (k1, _) = kappas_at(p, s.g);
        let beta = self.frame.frame.combine(&s.beta);
        let rho = &self.frame.rho0;
        if self.case.c_is_zero() {
            let d = f64::from(p.d);
            beta - y * k1 - rho * (d * k1 * m.norm_sq(y) / (2.0 * s.g))
        } else {
            let sc = p.c.abs().sqrt();
            y * (-k1 * s.g / sc) + beta - rho * (k1 * s.g / p.c)
        }
    }

    /// Tangent directions of `S` at `y` and the curve through `y` along each.
    fn s_directions(&self, y: &Vector) -> Vec<Vector> {
        let m = self.metric();
        let Some(target) = self.quadric else {
            return self.complement.clone();
        };
        let mut out: Vec<Vector> = Vec::with_capacity(self.params.n - 1);
        for w in &self.s_basis {
            let mut v = w - y * (m.dot(w, y) / target);
            for e in &out {
                v -= e * (m.dot(&v, e) / m.norm_sq(e));
            }
            let nv = m.norm_sq(&v);
            if nv.abs() > 1e-8 * v.amax().max(1.0).powi(2) {
                out.push(v / nv.abs().sqrt());
            }
            if out.len() == self.params.n - 1 {
                break;
            }
        }
        out
    }

    fn move_on_s(&self, y: &Vector, v: &Vector, s: f64) -> Vector {
        let z = y + v * s;
        match self.quadric {
            None => z,
            Some(target) => {
                let q = self.metric().norm_sq(&z);
                &z * (target / q).sqrt()
            }
        }
    }
}

pub fn build_point(spec: &ImmersionSpec, y: &Vector, t_index: usize) -> Result<Vector> {
    spec.check_point(y)?;
    Ok(spec.point_at(spec.frame.state(t_index)?, y))
}

pub fn gauss_map(spec: &ImmersionSpec, y: &Vector, t_index: usize) -> Result<Vector> {
    spec.check_point(y)?;
    Ok(spec.gauss_at(spec.frame.state(t_index)?, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureScalars {
    /// `|A|^2 = n(n-1) g^-2n + n H^2`.
    pub norm_a_sq: f64,
    /// `|Φ| = sqrt(n(n-1)) g^-n`.
    pub norm_phi: f64,
    /// `S = a + b H^2 - b g^-2n`.
    pub scalar_curv: f64,
}

pub fn curvature_scalars(p: &ProfileParams, g: f64) -> Result<CurvatureScalars> {
    if !(g > 0.0) {
        return Err(Error::InvalidInput(format!("g must be positive, got {g}")));
    }
    let n = p.n as f64;
    let x = g.powi(-(p.n as i32));
    let (a, b) = (f64::from(p.a), f64::from(p.b));
    Ok(CurvatureScalars {
        norm_a_sq: n * (n - 1.0) * x * x + n * p.h * p.h,
        norm_phi: (n * (n - 1.0)).sqrt() * x,
        scalar_curv: a + b * p.h * p.h - b * x * x,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyPlan {
    /// The first `y_count` points of `spec.s_points` are used.
    pub y_count: usize,
    pub t_indices: Vec<usize>,
    pub fd_step: f64,
}

impl VerifyPlan {
    /// `t_count` grid indices spread evenly over `[t_lo, t_hi]`, clipped to the grid.
    pub fn window(
        spec: &ImmersionSpec,
        y_count: usize,
        t_count: usize,
        t_range: (f64, f64),
        fd_step: f64,
    ) -> Self {
        let grid = &spec.frame.t_grid;
        let last = grid.len().saturating_sub(2).max(1);
        let to_index = |t: f64| {
            let i = spec.frame.origin as f64 + (t / spec.frame.step).round();
            (i.max(1.0) as usize).min(last)
        };
        let (lo, hi) = (to_index(t_range.0), to_index(t_range.1));
        let t_indices = (0..t_count)
            .map(|i| {
                if t_count == 1 {
                    lo
                } else {
                    lo + i * (hi - lo) / (t_count - 1)
                }
            })
            .collect();
        Self {
            y_count,
            t_indices,
            fd_step,
        }
    }

    /// `t_count` grid indices spread evenly over the profile grid.
    pub fn spread(spec: &ImmersionSpec, y_count: usize, t_count: usize, fd_step: f64) -> Self {
        let len = spec.frame.len();
        let t_indices = (0..t_count)
            .map(|i| {
                if t_count == 1 {
                    spec.frame.origin
                } else {
                    // keep one step of margin for the finite differences
                    1 + i * (len.saturating_sub(3)) / (t_count - 1)
                }
            })
            .collect();
        Self {
            y_count,
            t_indices,
            fd_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub y_index: usize,
    pub t_index: usize,
    pub t: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Real parts of the shape operator eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Width of the cluster assigned to `κ1`.
    pub spread: f64,
    /// Distance between the mean of the `κ1` cluster and the `κ2` eigenvalue.
    pub gap: f64,
    pub mean_curvature: f64,
}

/// Residuals are relative to the Euclidean size of the vectors involved, so
/// they equal the plain residuals wherever the coordinates are of order one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub samples: usize,
    /// `|<φ, φ> - a| / max(1, |φ|^2)`; zero when `a = 0`.
    pub max_ambient_residual: f64,
    /// `|<ν, ν> - b| / max(1, |ν|^2)`.
    pub max_gauss_norm_residual: f64,
    /// `|<ν, X>| / (|ν| |X|)` over the tangent vectors `X`, and `φ` when `a ≠ 0`.
    pub max_tangency_residual: f64,
    pub kappa1_err: f64,
    pub kappa2_err: f64,
    pub mean_curvature_err: f64,
    pub mean_curvature_mean: f64,
    pub mean_curvature_stddev: f64,
    /// Largest imaginary part among the eigenvalues.
    pub max_imag: f64,
    pub fd_step: f64,
    pub records: Vec<SampleRecord>,
}

struct SampleOutcome {
    ambient: f64,
    gauss_norm: f64,
    tangency: f64,
    kappa1_err: f64,
    kappa2_err: f64,
    imag: f64,
    record: SampleRecord,
}

/// Fourth-order derivative from central differences at `h` and `2h`.
fn richardson(f: impl Fn(f64) -> (Vector, Vector), h: f64) -> (Vector, Vector) {
    let (p1, n1) = f(h);
    let (m1, nm1) = f(-h);
    let (p2, n2) = f(2.0 * h);
    let (m2, nm2) = f(-2.0 * h);
    let dh = |a: &Vector, b: &Vector, s: f64| (a - b) / (2.0 * s);
    let dphi = (dh(&p1, &m1, h) * 4.0 - dh(&p2, &m2, 2.0 * h)) / 3.0;
    let dnu = (dh(&n1, &nm1, h) * 4.0 - dh(&n2, &nm2, 2.0 * h)) / 3.0;
    (dphi, dnu)
}

/// Real parts of the eigenvalues of `G^-1 B` and the largest imaginary part.
///
/// For a definite induced metric `G = L L^T` and the operator is similar to
/// the symmetric `L^-1 B L^-T`; otherwise a bounded Schur iteration is used.
fn shape_eigenvalues(
    gram: &DMatrix<f64>,
    b: &DMatrix<f64>,
    shape: &DMatrix<f64>,
) -> Result<(Vec<f64>, f64)> {
    let sym = (b + b.transpose()) * 0.5;
    for sign in [1.0, -1.0] {
        if let Some(ch) = (gram * sign).cholesky() {
            let l_inv = ch
                .l()
                .try_inverse()
                .ok_or_else(|| Error::DegenerateSample("singular Cholesky factor".into()))?;
            let m = &l_inv * (&sym * sign) * l_inv.transpose();
            let m = (&m + m.transpose()) * 0.5;
            return Ok((
                SymmetricEigen::new(m).eigenvalues.iter().copied().collect(),
                0.0,
            ));
        }
    }
    let schur = Schur::try_new(shape.clone(), 1e-14, 100_000).ok_or_else(|| {
        Error::NumericalFailure("shape operator eigenvalues did not converge".into())
    })?;
    let eig: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    let imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok((eig.iter().map(|z| z.re).collect(), imag))
}

fn euclid(v: &Vector) -> f64 {
    v.norm()
}

fn verify_sample(
    spec: &ImmersionSpec,
    y_index: usize,
    t_index: usize,
    h: f64,
) -> Result<SampleOutcome> {
    let p = &spec.params;
    let m = spec.metric();
    let n = p.n;
    let y = &spec.s_points[y_index];
    let state = *spec.frame.state(t_index)?;
    let phi = spec.point_at(&state, y);
    let nu = spec.gauss_at(&state, y);

    let mut tangents = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let (dt_phi, dt_nu) = richardson(
        |s| {
            // the step is far below the grid step, so one RK4 step is exact to rounding
            let st = spec
                .frame
                .local_state(t_index, s)
                .expect("index checked above");
            (spec.point_at(&st, y), spec.gauss_at(&st, y))
        },
        h,
    );
    tangents.push(dt_phi);
    normals.push(dt_nu);
    for v in spec.s_directions(y) {
        let (dp, dn) = richardson(
            |s| {
                let ys = spec.move_on_s(y, &v, s);
                (spec.point_at(&state, &ys), spec.gauss_at(&state, &ys))
            },
            h,
        );
        tangents.push(dp);
        normals.push(dn);
    }
    if tangents.len() != n {
        return Err(Error::DegenerateSample(format!(
            "only {} independent directions on S at sample ({y_index}, {t_index})",
            tangents.len() - 1
        )));
    }

    let gram = DMatrix::from_fn(n, n, |i, j| m.dot(&tangents[i], &tangents[j]));
    let b = DMatrix::from_fn(n, n, |i, j| -m.dot(&tangents[i], &normals[j]));
    let norms: f64 = tangents.iter().map(|t| t.norm_squared()).product();
    let det = gram.determinant();
    if !(det.abs() / norms >= DEGENERATE_GRAM) {
        return Err(Error::DegenerateSample(format!(
            "tangent Gram determinant {det:e} (normalized {:e}) at sample ({y_index}, {t_index})",
            det.abs() / norms
        )));
    }
    let shape = gram
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::DegenerateSample("singular tangent Gram matrix".into()))?;
    let (mut vals, imag) = shape_eigenvalues(&gram, &b, &shape)?;
    vals.sort_by(f64::total_cmp);

    let (k1, k2) = kappas_at(p, state.g);
    let k2_idx = (0..n)
        .min_by(|&i, &j| (vals[i] - k2).abs().total_cmp(&(vals[j] - k2).abs()))
        .expect("n >= 3");
    let cluster: Vec<f64> = (0..n).filter(|&i| i != k2_idx).map(|i| vals[i]).collect();
    let kappa1_err = cluster.iter().map(|v| (v - k1).abs()).fold(0.0, f64::max);
    let kappa2_err = (vals[k2_idx] - k2).abs();
    let lo = cluster.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cluster.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = cluster.iter().sum::<f64>() / cluster.len() as f64;
    let mean_curvature = shape.trace() / n as f64;

    let rel = |x: f64, v: &Vector| x.abs() / v.norm_squared().max(1.0);
    let ambient = if p.a != 0 {
        rel(m.norm_sq(&phi) - f64::from(p.a), &phi)
    } else {
        0.0
    };
    let gauss_norm = rel(m.norm_sq(&nu) - f64::from(p.b), &nu);
    let mut tangency = tangents
        .iter()
        .map(|t| m.dot(&nu, t).abs() / (euclid(&nu) * euclid(t)).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if p.a != 0 {
        tangency = tangency.max(m.dot(&nu, &phi).abs() / (euclid(&nu) * euclid(&phi)));
    }
    Ok(SampleOutcome {
        ambient,
        gauss_norm,
        tangency,
        kappa1_err,
        kappa2_err,
        imag,
        record: SampleRecord {
            y_index,
            t_index,
            t: spec.frame.t_grid[t_index],
            kappa1: k1,
            kappa2: k2,
            eigenvalues: vals.clone(),
            spread: hi - lo,
            gap: (mean - vals[k2_idx]).abs(),
            mean_curvature,
        },
    })
}

/// Check the immersion at `plan.y_count × plan.t_indices` samples.
///
/// Samples run in parallel; the reductions run in sample order so the report
/// does not depend on scheduling.
pub fn verify(spec: &ImmersionSpec, plan: &VerifyPlan) -> Result<VerificationReport> {
    if !(plan.fd_step > 0.0) || plan.fd_step * 2.0 > spec.frame.step {
        return Err(Error::InvalidInput(format!(
            "fd_step must be positive and at most half the grid step {}, got {}",
            spec.frame.step, plan.fd_step
        )));
    }
    if plan.y_count == 0 || plan.y_count > spec.s_points.len() {
        return Err(Error::InvalidInput(format!(
            "y_count must be in 1..={}, got {}",
            spec.s_points.len(),
            plan.y_count
        )));
    }
    if plan.t_indices.is_empty() {
        return Err(Error::InvalidInput("no t samples requested".into()));
    }
    for &i in &plan.t_indices {
        spec.frame.state(i)?;
    }
    let pairs: Vec<(usize, usize)> = plan
        .t_indices
        .iter()
        .flat_map(|&t| (0..plan.y_count).map(move |y| (y, t)))
        .collect();
    let outcomes: Vec<SampleOutcome> = pairs
        .par_iter()
        .map(|&(y, t)| verify_sample(spec, y, t, plan.fd_step))
        .collect::<Result<_>>()?;

    let count = outcomes.len() as f64;
    let max = |f: fn(&SampleOutcome) -> f64| outcomes.iter().map(f).fold(0.0, f64::max);
    let hs: Vec<f64> = outcomes.iter().map(|o| o.record.mean_curvature).collect();
    let mean = hs.iter().sum::<f64>() / count;
    let var = hs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / count;
    let h_err = hs
        .iter()
        .map(|h| (h - spec.params.h).abs())
        .fold(0.0, f64::max);
    Ok(VerificationReport {
        samples: outcomes.len(),
        max_ambient_residual: max(|o| o.ambient),
        max_gauss_norm_residual: max(|o| o.gauss_norm),
        max_tangency_residual: max(|o| o.tangency),
        kappa1_err: max(|o| o.kappa1_err),
        kappa2_err: max(|o| o.kappa2_err),
        mean_curvature_err: h_err,
        mean_curvature_mean: mean,
        mean_curvature_stddev: var.sqrt(),
        max_imag: max(|o| o.imag),
        fd_step: plan.fd_step,
        records: outcomes.into_iter().map(|o| o.record).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::{phi_bounds, seam, threshold, Curve, SignCase};

    fn spec_for(case: SignCase, h: f64, c: f64, g0: f64) -> ImmersionSpec {
        let s = case.canonical_signs();
        let p = ProfileParams::new(4, s.a, s.b, s.d, h, c).unwrap();
        ImmersionSpec::build(&p, g0, &ImmersionOptions::default()).unwrap()
    }

    #[test]
    fn construction_case_selection() {
        let mk = |a, c| ProfileParams::new(4, a, 1, 1, -0.9, c).unwrap();
        assert_eq!(
            ConstructionCase::select(&mk(-1, 0.0)),
            ConstructionCase::CzeroAnzero
        );
        assert_eq!(
            ConstructionCase::select(&mk(0, 0.0)),
            ConstructionCase::CzeroAzero
        );
        assert_eq!(
            ConstructionCase::select(&mk(-1, -1.15)),
            ConstructionCase::CnonzeroAnzero
        );
        assert_eq!(
            ConstructionCase::select(&mk(0, 1.0)),
            ConstructionCase::CnonzeroAzero
        );
    }

    #[test]
    fn points_lie_on_the_space_form() {
        let spec = spec_for(SignCase::HypLike, -0.9, -1.15, 1.2);
        let m = *spec.metric();
        for y in &spec.s_points {
            let phi = build_point(&spec, y, spec.frame.origin).unwrap();
            assert!((m.norm_sq(&phi) + 1.0).abs() < 1e-10);
            let nu = gauss_map(&spec, y, spec.frame.origin).unwrap();
            assert!((m.norm_sq(&nu) - 1.0).abs() < 1e-10);
            assert!(m.dot(&nu, &phi).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_factor_origin_traces_the_profile_curve() {
        let spec = spec_for(SignCase::HypLike, -0.9, 0.0, 1.0);
        let zero = Vector::zeros(spec.metric().dim());
        for i in [0, spec.frame.origin, spec.frame.len() - 1] {
            assert_eq!(
                build_point(&spec, &zero, i).unwrap(),
                spec.frame.alpha(i).unwrap()
            );
            assert_eq!(
                gauss_map(&spec, &zero, i).unwrap(),
                spec.frame.beta(i).unwrap()
            );
        }
    }

    #[test]
    fn minkowski_null_construction() {
        let q = threshold(SignCase::MinkowskiLike, 4, -2.0, Curve::Q1).unwrap();
        let spec = spec_for(SignCase::MinkowskiLike, -2.0, 0.0, q);
        let m = *spec.metric();
        assert!(m.norm_sq(&spec.frame.rho0).abs() < 1e-10);
        for y in &spec.s_points {
            let i = spec.frame.origin + 300;
            let diff = build_point(&spec, y, i).unwrap() - spec.frame.alpha(i).unwrap();
            assert!((m.norm_sq(&diff) - m.norm_sq(y)).abs() < 1e-10);
        }
    }

    #[test]
    fn off_surface_points_are_rejected() {
        let spec = spec_for(SignCase::HypLike, -0.9, -1.15, 1.2);
        let y = &spec.s_points[0] * 2.0;
        assert!(matches!(
            build_point(&spec, &y, 0),
            Err(Error::InvalidInput(_))
        ));
        let u2 = spec.frame.frame.u2.clone();
        assert!(gauss_map(&spec, &(&spec.s_points[0] + u2), 0).is_err());
        assert!(build_point(&spec, &spec.s_points[0], spec.frame.len()).is_err());
    }

    #[test]
    fn curvature_scalar_values() {
        let p = ProfileParams::new(4, -1, 1, 1, -2.0, 0.0).unwrap();
        let cs = curvature_scalars(&p, 1.0).unwrap();
        assert!((cs.norm_phi - 12f64.sqrt()).abs() < 1e-14);
        assert!((cs.norm_a_sq - 28.0).abs() < 1e-12);
        assert!((cs.norm_phi.powi(2) + 16.0 - cs.norm_a_sq).abs() < 1e-12 * cs.norm_a_sq);
        assert!(curvature_scalars(&p, 0.0).is_err());

        let hyp = ProfileParams::new(4, -1, 1, 1, -0.9, 0.0).unwrap();
        let q2 = threshold(SignCase::HypLike, 4, -0.9, Curve::Q2).unwrap();
        let b2 = phi_bounds(SignCase::HypLike, 4, -0.9).unwrap().b2.unwrap();
        assert!((curvature_scalars(&hyp, q2).unwrap().norm_phi - b2).abs() < 1e-10);
        assert!((b2 - 0.473545).abs() < 1e-6);

        let mk = ProfileParams::new(4, 0, -1, 1, -2.0, 0.0).unwrap();
        let q1 = 0.5f64.powf(0.25);
        assert!((curvature_scalars(&mk, q1).unwrap().norm_phi - 4.0 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_immersion_has_constant_curvatures() {
        let h = seam(4);
        let q = threshold(SignCase::HypLike, 4, h, Curve::Q1).unwrap();
        let r = threshold(SignCase::HypLike, 4, h, Curve::R1).unwrap();
        let spec = spec_for(SignCase::HypLike, h, r, q);
        let plan = VerifyPlan::spread(&spec, 4, 5, 1e-4);
        let rep = verify(&spec, &plan).unwrap();
        assert!(rep.kappa1_err < 1e-6, "{rep:?}");
        assert!(rep.kappa2_err < 1e-6);
    }

    #[test]
    fn periodic_hyperbolic_immersion_has_mean_curvature_h() {
        let spec = spec_for(SignCase::HypLike, -0.9, -1.15, 1.2);
        let plan = VerifyPlan::spread(&spec, 8, 16, 1e-4);
        let rep = verify(&spec, &plan).unwrap();
        assert_eq!(rep.samples, 128);
        assert!(rep.mean_curvature_err < 1e-5, "{}", rep.mean_curvature_err);
        assert!(rep.mean_curvature_stddev < 1e-5);
        assert!(rep.max_tangency_residual < 1e-7);
        assert!(rep.max_ambient_residual < 1e-8);
        assert!(rep.max_gauss_norm_residual < 1e-8);
        assert!(
            rep.kappa1_err < 1e-4 && rep.kappa2_err < 1e-4,
            "{} {}",
            rep.kappa1_err,
            rep.kappa2_err
        );
    }

    #[test]
    fn de_sitter_type2_splits_multiplicity() {
        let r = threshold(SignCase::DeSitterLike, 4, -2.0, Curve::R1).unwrap();
        let spec = spec_for(SignCase::DeSitterLike, -2.0, r, 1.0);
        let plan = VerifyPlan::window(&spec, 4, 21, (-1.0, 1.0), 1e-4);
        let rep = verify(&spec, &plan).unwrap();
        assert!(
            rep.max_tangency_residual < 1e-8,
            "{}",
            rep.max_tangency_residual
        );
        for rec in rep
            .records
            .iter()
            .filter(|r| (r.kappa1 - r.kappa2).abs() > 0.1)
        {
            assert!(rec.gap > 10.0 * rec.spread, "{rec:?}");
        }
        assert!(rep.mean_curvature_err < 1e-5, "{}", rep.mean_curvature_err);
    }

    #[test]
    fn window_plan_stays_inside_the_grid() {
        let spec = spec_for(SignCase::HypLike, -0.9, -1.15, 1.2);
        let plan = VerifyPlan::window(&spec, 1, 3, (-100.0, 100.0), 1e-4);
        assert_eq!(
            plan.t_indices,
            vec![1, 1 + (spec.frame.len() - 3) / 2, spec.frame.len() - 2]
        );
    }

    #[test]
    fn verify_plan_validation() {
        let spec = spec_for(SignCase::HypLike, -0.9, -1.15, 1.2);
        let mut plan = VerifyPlan::spread(&spec, 2, 2, 1e-4);
        plan.fd_step = 0.0;
        assert!(verify(&spec, &plan).is_err());
        plan.fd_step = 1e-4;
        plan.y_count = 100;
        assert!(verify(&spec, &plan).is_err());
    }
}
