//! The one-dimensional potential `f(v) = C - d v^2 (a + b (H + v^-n)^2)` that
//! governs the profile function `g`, its critical points and roots, the
//! classification of positive solutions of `(g')^2 = f(g)`, and the
//! integration of `g'' = f'(g) / 2`.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::metric::SignTriple;
use crate::ode::rk4_step;

/// A critical value this close to zero makes the critical point a multiple root.
pub const MULTIPLE_ROOT_TOL: f64 = 1e-9;

/// Relative size of the critical-point discriminant below which the two
/// critical points are considered to have merged into an inflection.
const MERGED_DISCRIMINANT_TOL: f64 = 1e-12;

/// Distance from a multiple root, relative to `max(1, root)`, below which the
/// profile is integrated in first-order form.
const APPROACH_RADIUS: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileParams {
    pub n: usize,
    pub a: i8,
    pub b: i8,
    pub d: i8,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl ProfileParams {
    pub fn new(n: usize, a: i8, b: i8, d: i8, h: f64, c: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!(
                "n must be at least 3, got {n}"
            )));
        }
        SignTriple::new(a, b, d)?;
        if !h.is_finite() || !c.is_finite() {
            return Err(Error::InvalidInput(format!(
                "H and C must be finite, got H = {h}, C = {c}"
            )));
        }
        Ok(Self { n, a, b, d, h, c })
    }

    pub fn signs(&self) -> SignTriple {
        SignTriple {
            a: self.a,
            b: self.b,
            d: self.d,
        }
    }

    pub fn with_c(&self, c: f64) -> Self {
        Self { c, ..*self }
    }

    pub fn ad(&self) -> f64 {
        f64::from(self.a * self.d)
    }

    pub fn bd(&self) -> f64 {
        f64::from(self.b * self.d)
    }

    pub fn ab(&self) -> f64 {
        f64::from(self.a * self.b)
    }

    pub(crate) fn f_at(&self, v: f64) -> f64 {
        let x = v.powi(-(self.n as i32));
        let s = self.h + x;
        self.c - self.ad() * v * v - self.bd() * v * v * s * s
    }

    pub(crate) fn f_prime_at(&self, v: f64) -> f64 {
        let n = self.n as f64;
        let x = v.powi(-(self.n as i32));
        let h = self.h;
        -2.0 * v * (self.ad() + self.bd() * (h * h + (2.0 - n) * h * x + (1.0 - n) * x * x))
    }
}

fn check_positive(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "expected a positive argument, got {v}"
        )))
    }
}

pub fn eval_f(p: &ProfileParams, v: f64) -> Result<f64> {
    check_positive(v)?;
    Ok(p.f_at(v))
}

pub fn eval_f_prime(p: &ProfileParams, v: f64) -> Result<f64> {
    check_positive(v)?;
    Ok(p.f_prime_at(v))
}

/// `(κ1, κ2) = (H + g^-n, H - (n-1) g^-n)`.
pub fn kappas(p: &ProfileParams, g: f64) -> Result<(f64, f64)> {
    check_positive(g)?;
    Ok(kappas_at(p, g))
}

pub(crate) fn kappas_at(p: &ProfileParams, g: f64) -> (f64, f64) {
    let x = g.powi(-(p.n as i32));
    (p.h + x, p.h - (p.n as f64 - 1.0) * x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CriticalPoint {
    pub v: f64,
    /// Both roots of the quadratic in `v^-n` coincide here.
    pub merged: bool,
}

/// Positive critical points via `(n-1) x^2 + H (n-2) x - (H^2 + ab) = 0`, `x = v^-n`.
pub(crate) fn critical_structure(p: &ProfileParams) -> Vec<CriticalPoint> {
    let n = p.n as f64;
    let qa = n - 1.0;
    let qb = p.h * (n - 2.0);
    let qc = -(p.h * p.h + p.ab());
    let disc = qb * qb - 4.0 * qa * qc;
    let scale = (p.h * p.h * n * n).max(1.0);
    let to_v = |x: f64| x.powf(-1.0 / n);
    if disc.abs() <= MERGED_DISCRIMINANT_TOL * scale {
        let x = -qb / (2.0 * qa);
        return if x > 0.0 {
            vec![CriticalPoint {
                v: to_v(x),
                merged: true,
            }]
        } else {
            vec![]
        };
    }
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    let (x1, x2) = if qb == 0.0 {
        (sq / (2.0 * qa), -sq / (2.0 * qa))
    } else {
        let q = -0.5 * (qb + qb.signum() * sq);
        (q / qa, qc / q)
    };
    let mut vs: Vec<f64> = [x1, x2]
        .into_iter()
        .filter(|x| *x > 0.0 && x.is_finite())
        .map(to_v)
        .collect();
    vs.sort_by(f64::total_cmp);
    vs.into_iter()
        .map(|v| CriticalPoint { v, merged: false })
        .collect()
}

/// Positive critical points of `f`, ascending.
pub fn critical_points(p: &ProfileParams) -> Vec<f64> {
    critical_structure(p).into_iter().map(|c| c.v).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub v: f64,
    pub multiplicity: u8,
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Sign of `f` as `v -> 0+`, dominated by `-bd v^(2-2n)`.
fn sign_near_zero(p: &ProfileParams) -> i8 {
    -sign_of(p.bd())
}

/// Sign of `f` as `v -> ∞`.
fn sign_at_infinity(p: &ProfileParams) -> i8 {
    let lead = -(p.ad() + p.bd() * p.h * p.h);
    if lead != 0.0 {
        sign_of(lead)
    } else if p.c != 0.0 {
        sign_of(p.c)
    } else if p.h != 0.0 {
        -sign_of(p.bd() * p.h)
    } else {
        -sign_of(p.bd())
    }
}

/// Bisect a sign change of `f` on `[lo, hi]` down to adjacent floats.
fn bisect(p: &ProfileParams, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = p.f_at(lo);
    let mut fhi = p.f_at(hi);
    let slo = sign_of(flo);
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = p.f_at(mid);
        if fm == 0.0 {
            return mid;
        }
        if sign_of(fm) == slo {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    if flo.abs() <= fhi.abs() {
        lo
    } else {
        hi
    }
}

/// Move from `start` by factor `factor` until `f` takes sign `want`.
fn walk_to_sign(p: &ProfileParams, start: f64, factor: f64, want: i8) -> Option<f64> {
    let mut v = start;
    for _ in 0..2200 {
        if !(v > 0.0 && v.is_finite()) {
            return None;
        }
        if sign_of(p.f_at(v)) == want {
            return Some(v);
        }
        v *= factor;
    }
    None
}

/// All positive roots of `f` with multiplicities, ascending.
///
/// `(0, ∞)` is cut at the critical points; `f` is monotone on every cell so
/// each cell holds at most one simple root, found by bisection. A critical
/// point whose critical value is within [`MULTIPLE_ROOT_TOL`] of zero is a
/// double root, or a triple root when the two critical points have merged.
pub fn find_positive_roots(p: &ProfileParams) -> Vec<Root> {
    let crits = critical_structure(p);
    let mut roots = Vec::new();
    // (position, sign); None marks the ends 0 and ∞
    let mut marks: Vec<(Option<f64>, i8)> = vec![(None, sign_near_zero(p))];
    for c in &crits {
        let fc = p.f_at(c.v);
        if fc.abs() < MULTIPLE_ROOT_TOL {
            roots.push(Root {
                v: c.v,
                multiplicity: if c.merged { 3 } else { 2 },
            });
            marks.push((Some(c.v), 0));
        } else {
            marks.push((Some(c.v), sign_of(fc)));
        }
    }
    marks.push((None, sign_at_infinity(p)));

    let last = marks.len() - 1;
    for i in 0..last {
        let (left, sl) = marks[i];
        let (right, sr) = marks[i + 1];
        if sl * sr >= 0 {
            continue;
        }
        let bracket = match (left, right) {
            (Some(l), Some(r)) => Some((l, r)),
            (None, Some(r)) => walk_to_sign(p, 0.5 * r, 0.5, sl).map(|l| (l, r)),
            (Some(l), None) => walk_to_sign(p, 2.0 * l.max(1.0), 2.0, sr).map(|r| (l, r)),
            (None, None) => {
                let s1 = sign_of(p.f_at(1.0));
                if s1 == 0 {
                    roots.push(Root {
                        v: 1.0,
                        multiplicity: 1,
                    });
                    None
                } else if s1 == sl {
                    walk_to_sign(p, 2.0, 2.0, sr).map(|r| (1.0, r))
                } else {
                    walk_to_sign(p, 0.5, 0.5, sl).map(|l| (l, 1.0))
                }
            }
        };
        if let Some((l, r)) = bracket {
            roots.push(Root {
                v: bisect(p, l, r),
                multiplicity: 1,
            });
        }
    }
    roots.sort_by(|x, y| x.v.total_cmp(&y.v));
    roots
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SolutionTag {
    #[serde(rename = "Type1")]
    Type1Periodic,
    #[serde(rename = "Type2")]
    Type2UnboundedNoMin,
    #[serde(rename = "Type3")]
    Type3UnboundedWithMin,
    #[serde(rename = "Type4")]
    Type4BoundedWithMin,
    #[serde(rename = "Type5")]
    Type5BoundedWithMax,
    Equilibrium,
    NoPositiveSolution,
}

impl SolutionTag {
    pub fn label(&self) -> &'static str {
        match self {
            SolutionTag::Type1Periodic => "Type1",
            SolutionTag::Type2UnboundedNoMin => "Type2",
            SolutionTag::Type3UnboundedWithMin => "Type3",
            SolutionTag::Type4BoundedWithMin => "Type4",
            SolutionTag::Type5BoundedWithMax => "Type5",
            SolutionTag::Equilibrium => "Equilibrium",
            SolutionTag::NoPositiveSolution => "NoPositiveSolution",
        }
    }
}

fn serialize_bound<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str("inf")
    }
}

/// Range of `g`; `hi` is `+∞` for unbounded branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    #[serde(serialize_with = "serialize_bound")]
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, v: f64, rel_tol: f64) -> bool {
        let slack = |x: f64| rel_tol * x.abs().max(1.0);
        v >= self.lo - slack(self.lo) && (self.hi.is_infinite() || v <= self.hi + slack(self.hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionType {
    pub tag: SolutionTag,
    pub interval: Interval,
    pub root_multiplicities: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    /// Branches admitting a positive solution on the whole line, ascending in
    /// `v`, followed by the equilibria at multiple roots.
    pub solutions: Vec<SolutionType>,
    /// Positivity intervals touching `v = 0`; they never give a solution on
    /// the whole line.
    pub rejected: Vec<Interval>,
}

/// Which branch of a classification to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchHint {
    Index(usize),
    Containing(f64),
}

impl Classification {
    /// Tags of the non-constant branches, in order.
    pub fn tags(&self) -> Vec<SolutionTag> {
        self.solutions
            .iter()
            .map(|s| s.tag)
            .filter(|t| *t != SolutionTag::Equilibrium)
            .collect()
    }

    pub fn has_solution(&self) -> bool {
        !self.solutions.is_empty()
    }

    pub fn select(&self, hint: BranchHint) -> Option<&SolutionType> {
        match hint {
            BranchHint::Index(i) => self.solutions.get(i),
            BranchHint::Containing(v) => self.branch_containing(v),
        }
    }

    /// The branch whose closed range holds `v`; equilibria take precedence
    /// when `v` sits on a multiple root.
    pub fn branch_containing(&self, v: f64) -> Option<&SolutionType> {
        const REL: f64 = 1e-9;
        self.solutions
            .iter()
            .find(|s| {
                s.tag == SolutionTag::Equilibrium && (s.interval.lo - v).abs() <= REL * v.max(1.0)
            })
            .or_else(|| {
                self.solutions
                    .iter()
                    .find(|s| s.tag != SolutionTag::Equilibrium && s.interval.contains(v, REL))
            })
    }
}

/// Solution types of `(g')^2 = f(g)` on each maximal positivity interval of `f`.
pub fn classify(p: &ProfileParams) -> Classification {
    let roots = find_positive_roots(p);
    let mut points: Vec<(f64, u8)> = vec![(0.0, 0)];
    points.extend(roots.iter().map(|r| (r.v, r.multiplicity)));
    points.push((f64::INFINITY, 0));

    let mut solutions = Vec::new();
    let mut rejected = Vec::new();
    for w in points.windows(2) {
        let ((lo, mlo), (hi, mhi)) = (w[0], w[1]);
        let probe = match (lo == 0.0, hi.is_infinite()) {
            (true, true) => 1.0,
            (true, false) => 0.5 * hi,
            (false, true) => 2.0 * lo,
            (false, false) => (lo * hi).sqrt(),
        };
        if p.f_at(probe) <= 0.0 {
            continue;
        }
        let interval = Interval { lo, hi };
        if lo == 0.0 {
            rejected.push(interval);
            continue;
        }
        let lo_multiple = mlo > 1;
        let (tag, mults) = if hi.is_infinite() {
            let tag = if lo_multiple {
                SolutionTag::Type2UnboundedNoMin
            } else {
                SolutionTag::Type3UnboundedWithMin
            };
            (tag, vec![mlo])
        } else {
            let tag = match (lo_multiple, mhi > 1) {
                (false, false) => SolutionTag::Type1Periodic,
                (false, true) => SolutionTag::Type4BoundedWithMin,
                (true, false) => SolutionTag::Type5BoundedWithMax,
                // a heteroclinic range needs f to vanish at two critical
                // points, which the quadratic structure of f' rules out
                (true, true) => {
                    rejected.push(interval);
                    continue;
                }
            };
            (tag, vec![mlo, mhi])
        };
        solutions.push(SolutionType {
            tag,
            interval,
            root_multiplicities: mults,
        });
    }
    for r in roots.iter().filter(|r| r.multiplicity > 1) {
        solutions.push(SolutionType {
            tag: SolutionTag::Equilibrium,
            interval: Interval { lo: r.v, hi: r.v },
            root_multiplicities: vec![r.multiplicity],
        });
    }
    Classification {
        solutions,
        rejected,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationOptions {
    pub step: f64,
    /// Bound on [`ProfileSolution::energy_drift`].
    pub tol: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Unbounded branches are truncated once `g` exceeds this.
    pub max_g: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            tol: 1e-8,
            t_min: -10.0,
            t_max: 10.0,
            max_g: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub below: bool,
    pub above: bool,
}

/// Sampled solution of `(g')^2 = f(g)` with `g(0) = g0`, `g'(0) >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSolution {
    pub params: ProfileParams,
    pub step: f64,
    pub t_grid: Vec<f64>,
    pub g: Vec<f64>,
    pub g_prime: Vec<f64>,
    pub solution_type: SolutionType,
    /// `max |(g')^2 - f(g)| / max(1, g^2)` over the grid.
    pub energy_drift: f64,
    pub truncated: Truncation,
    /// Grid index of `t = 0`.
    pub origin: usize,
}

impl ProfileSolution {
    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn is_equilibrium(&self) -> bool {
        self.solution_type.tag == SolutionTag::Equilibrium
    }

    /// Unscaled `max |(g')^2 - f(g)|`.
    pub fn max_abs_energy_residual(&self) -> f64 {
        self.g
            .iter()
            .zip(&self.g_prime)
            .map(|(g, gp)| (gp * gp - self.params.f_at(*g)).abs())
            .fold(0.0, f64::max)
    }

    /// Period estimated from successive maxima of `g` (zero crossings of `g'`
    /// from positive to non-positive). Needs at least two maxima.
    pub fn measured_period(&self) -> Option<f64> {
        let mut maxima = Vec::new();
        for i in 0..self.len().saturating_sub(1) {
            let (a, b) = (self.g_prime[i], self.g_prime[i + 1]);
            if a > 0.0 && b <= 0.0 {
                let dt = self.t_grid[i + 1] - self.t_grid[i];
                maxima.push(self.t_grid[i] + dt * a / (a - b));
            }
        }
        if maxima.len() < 2 {
            return None;
        }
        Some((maxima[maxima.len() - 1] - maxima[0]) / (maxima.len() - 1) as f64)
    }
}

pub(crate) fn profile_rhs(p: &ProfileParams, y: &[f64; 2]) -> [f64; 2] {
    [y[1], 0.5 * p.f_prime_at(y[0])]
}

/// Whether `v` is a constant solution: `f(v) = f'(v) = 0` within tolerance.
pub fn is_equilibrium_point(p: &ProfileParams, v: f64) -> bool {
    p.f_at(v).abs() < MULTIPLE_ROOT_TOL && p.f_prime_at(v).abs() < MULTIPLE_ROOT_TOL * v.max(1.0)
}

/// `f` expanded about a root `m` of multiplicity `mult`, as
/// `x^mult * Σ F_k x^(k - mult)` with `x = (v - m)/m`.
///
/// Evaluating `f` directly near a multiple root loses everything below the
/// rounding of `C`, which caps `sqrt(f)` at about 1e-8 accuracy; the series
/// keeps full relative accuracy. Valid for `|x| <= 1/4`.
struct RootExpansion {
    m: f64,
    mult: i32,
    coeffs: Vec<f64>,
}

impl RootExpansion {
    const TERMS: usize = 40;

    fn new(p: &ProfileParams, m: f64, mult: u8) -> Self {
        let n = p.n as f64;
        // f(v) = C - (ad + bd H^2) v^2 - 2 bd H v^(2-n) - bd v^(2-2n)
        let terms = [
            (-(p.ad() + p.bd() * p.h * p.h), 2.0),
            (-2.0 * p.bd() * p.h, 2.0 - n),
            (-p.bd(), 2.0 - 2.0 * n),
        ];
        let mult = usize::from(mult);
        let mut coeffs = vec![0.0; Self::TERMS];
        for (a, e) in terms {
            let scale = a * m.powf(e);
            // binomial coefficients of (1 + x)^e
            let mut binom = 1.0;
            for k in 1..mult + Self::TERMS {
                binom *= (e - (k - 1) as f64) / k as f64;
                if k >= mult {
                    coeffs[k - mult] += scale * binom;
                }
            }
        }
        Self {
            m,
            mult: mult as i32,
            coeffs,
        }
    }

    fn f(&self, v: f64) -> f64 {
        let x = (v - self.m) / self.m;
        let s = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        x.powi(self.mult) * s
    }
}

/// Integrate `g'' = f'(g)/2` from `g(0) = g0`, `g'(0) = +sqrt(max(f(g0), 0))`
/// forward to `t_max` and backward to `t_min` with fixed RK4 steps.
///
/// The grid is `t_i = i * step` for integer `i`, so `t = 0` is always a grid
/// point. Branches that leave `g <= max_g` are truncated and flagged.
pub fn integrate_profile(
    p: &ProfileParams,
    g0: f64,
    opts: &IntegrationOptions,
) -> Result<ProfileSolution> {
    check_positive(g0)?;
    if !(opts.step > 0.0) || !(opts.t_min <= 0.0 && opts.t_max >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need step > 0 and t_min <= 0 <= t_max, got step = {}, span = [{}, {}]",
            opts.step, opts.t_min, opts.t_max
        )));
    }
    let f0 = p.f_at(g0);
    if f0 < -1e-12 {
        return Err(Error::InvalidInput(format!(
            "f(g0) = {f0} < 0: g0 = {g0} is not attainable"
        )));
    }
    let h = opts.step;
    let n_back = (-opts.t_min / h).round() as usize;
    let n_fwd = (opts.t_max / h).round() as usize;
    let classification = classify(p);

    if is_equilibrium_point(p, g0) {
        let t_grid: Vec<f64> = (0..=n_back + n_fwd)
            .map(|i| (i as f64 - n_back as f64) * h)
            .collect();
        let len = t_grid.len();
        let solution_type = classification
            .branch_containing(g0)
            .filter(|s| s.tag == SolutionTag::Equilibrium)
            .cloned()
            .unwrap_or(SolutionType {
                tag: SolutionTag::Equilibrium,
                interval: Interval { lo: g0, hi: g0 },
                root_multiplicities: vec![2],
            });
        return Ok(ProfileSolution {
            params: *p,
            step: h,
            t_grid,
            g: vec![g0; len],
            g_prime: vec![0.0; len],
            solution_type,
            energy_drift: 0.0,
            truncated: Truncation::default(),
            origin: n_back,
        });
    }

    let solution_type = classification
        .branch_containing(g0)
        .cloned()
        .unwrap_or(SolutionType {
            tag: SolutionTag::NoPositiveSolution,
            interval: Interval { lo: g0, hi: g0 },
            root_multiplicities: vec![],
        });
    // A multiple root bounding the branch is only approached asymptotically,
    // and the second-order form is unstable on that approach: rounding either
    // carries the state across the root or turns it back just short. Close to
    // the root the first-order form g' = ±sqrt(f(g)) is smooth and stable, so
    // the integrator switches to it there; a crossing pins the state.
    let mults = &solution_type.root_multiplicities;
    let iv = solution_type.interval;
    let mut attractors = Vec::new();
    if let Some(&m) = mults.first().filter(|m| **m > 1) {
        attractors.push((RootExpansion::new(p, iv.lo, m), iv.hi));
    }
    if iv.hi.is_finite() && mults.len() == 2 && mults[1] > 1 {
        attractors.push((RootExpansion::new(p, iv.hi, mults[1]), iv.lo));
    }

    #[derive(Clone, Copy)]
    enum Mode {
        Second,
        First { root: usize, sign: f64 },
        Pinned,
    }

    let y0 = [g0, f0.max(0.0).sqrt()];
    let run = |steps: usize, dt: f64| -> Result<(Vec<[f64; 2]>, bool)> {
        let mut ys = Vec::with_capacity(steps);
        let mut y = y0;
        let mut mode = Mode::Second;
        for i in 1..=steps {
            let prev = y;
            match mode {
                Mode::Pinned => {}
                Mode::Second => y = rk4_step(|s| profile_rhs(p, s), &y, dt),
                Mode::First { root, sign } => {
                    let ex = &attractors[root].0;
                    let g = rk4_step(|s| [sign * ex.f(s[0]).max(0.0).sqrt()], &[y[0]], dt)[0];
                    y = if (prev[0] - ex.m) * (g - ex.m) <= 0.0 {
                        mode = Mode::Pinned;
                        [ex.m, 0.0]
                    } else {
                        [g, sign * ex.f(g).max(0.0).sqrt()]
                    };
                }
            }
            if !y[0].is_finite() || !y[1].is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "non-finite state at t = {}",
                    i as f64 * dt
                )));
            }
            if matches!(mode, Mode::Second) {
                for (k, (ex, other)) in attractors.iter().enumerate() {
                    let m = ex.m;
                    let (before, after) = (prev[0] - m, y[0] - m);
                    let radius = (APPROACH_RADIUS * m.max(1.0))
                        .min(0.25 * (other - m).abs())
                        .min(0.25 * m);
                    if before * after <= 0.0 {
                        y = [m, 0.0];
                        mode = Mode::Pinned;
                    } else if after.abs() < radius {
                        let sign = if (m - y[0]) * dt > 0.0 { 1.0 } else { -1.0 };
                        y = [y[0], sign * ex.f(y[0]).max(0.0).sqrt()];
                        mode = Mode::First { root: k, sign };
                    }
                }
            }
            if y[0] <= 0.0 {
                return Err(Error::DomainExit {
                    t: i as f64 * dt,
                    g: y[0],
                });
            }
            if y[0] > opts.max_g {
                return Ok((ys, true));
            }
            ys.push(y);
        }
        Ok((ys, false))
    };
    let (back, cut_below) = run(n_back, -h)?;
    let (fwd, cut_above) = run(n_fwd, h)?;

    let origin = back.len();
    let states: Vec<[f64; 2]> = back
        .iter()
        .rev()
        .copied()
        .chain(std::iter::once(y0))
        .chain(fwd)
        .collect();
    let t_grid = (0..states.len())
        .map(|i| (i as f64 - origin as f64) * h)
        .collect();
    let g: Vec<f64> = states.iter().map(|s| s[0]).collect();
    let g_prime: Vec<f64> = states.iter().map(|s| s[1]).collect();
    let energy_drift = g
        .iter()
        .zip(&g_prime)
        .map(|(g, gp)| (gp * gp - p.f_at(*g)).abs() / (g * g).max(1.0))
        .fold(0.0, f64::max);
    if energy_drift >= opts.tol {
        return Err(Error::NumericalFailure(format!(
            "energy drift {energy_drift:e} exceeds tolerance {:e}",
            opts.tol
        )));
    }
    Ok(ProfileSolution {
        params: *p,
        step: h,
        t_grid,
        g,
        g_prime,
        solution_type,
        energy_drift,
        truncated: Truncation {
            below: cut_below,
            above: cut_above,
        },
        origin,
    })
}

/// Composite Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let m = order;
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Period `2 ∫ dv / sqrt(f(v))` of a periodic branch between simple roots.
///
/// The substitution `v = m - r cos θ` removes the inverse square-root
/// singularities at both turning points.
pub fn quadrature_period(p: &ProfileParams, range: Interval) -> Result<f64> {
    if !(range.lo > 0.0 && range.hi.is_finite() && range.hi > range.lo) {
        return Err(Error::InvalidInput(format!(
            "period needs a bounded range, got [{}, {}]",
            range.lo, range.hi
        )));
    }
    let mid = 0.5 * (range.lo + range.hi);
    let rad = 0.5 * (range.hi - range.lo);
    let nodes = gauss_legendre(10);
    let panels = 64;
    let width = std::f64::consts::PI / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let centre = (k as f64 + 0.5) * width;
        for (x, w) in &nodes {
            let theta = centre + 0.5 * width * x;
            let v = mid - rad * theta.cos();
            let fv = p.f_at(v);
            if fv <= 0.0 {
                return Err(Error::NumericalFailure(format!(
                    "f({v}) = {fv} inside a periodic range"
                )));
            }
            total += 0.5 * width * w * rad * theta.sin() / fv.sqrt();
        }
    }
    Ok(2.0 * total)
}
