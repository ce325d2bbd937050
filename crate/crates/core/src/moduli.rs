//! Threshold curves `q1, q2, r1, r2`, admissibility of `(H, C)` for each sign
//! case, the traceless second fundamental form bounds and `(H, C)` sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::SignTriple;
use crate::profile::SolutionTag;

/// `|C - r_i(H)|` below this snaps `C` onto the threshold curve.
pub const THRESHOLD_SNAP: f64 = 1e-9;

/// `H` within this of a special value (`±1`, `-2√(n-1)/n`, `0`) is treated as equal.
const H_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SignCase {
    HypLike,
    DeSitterLike,
    SphereLike,
    AntiDeSitterLike,
    EuclideanLike,
    MinkowskiLike,
}

impl SignCase {
    pub const ALL: [SignCase; 6] = [
        SignCase::HypLike,
        SignCase::DeSitterLike,
        SignCase::SphereLike,
        SignCase::AntiDeSitterLike,
        SignCase::EuclideanLike,
        SignCase::MinkowskiLike,
    ];

    pub fn from_signs(s: &SignTriple) -> SignCase {
        let bd = s.b * s.d;
        match (s.a * s.d, bd > 0) {
            (0, true) => SignCase::EuclideanLike,
            (0, false) => SignCase::MinkowskiLike,
            (ad, true) if ad < 0 => SignCase::HypLike,
            (_, true) => SignCase::SphereLike,
            (ad, false) if ad > 0 => SignCase::DeSitterLike,
            (_, false) => SignCase::AntiDeSitterLike,
        }
    }

    /// Representative signs with `d = 1`.
    pub fn canonical_signs(&self) -> SignTriple {
        let (a, b) = match self {
            SignCase::HypLike => (-1, 1),
            SignCase::DeSitterLike => (1, -1),
            SignCase::SphereLike => (1, 1),
            SignCase::AntiDeSitterLike => (-1, -1),
            SignCase::EuclideanLike => (0, 1),
            SignCase::MinkowskiLike => (0, -1),
        };
        SignTriple { a, b, d: 1 }
    }

    /// Index of the ambient space form for the canonical signs: the smallest
    /// `k` that leaves room for a normal of sign `b`.
    pub fn canonical_index(&self) -> usize {
        usize::from(self.canonical_signs().b < 0)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SignCase::HypLike => "hyperbolic",
            SignCase::DeSitterLike => "desitter",
            SignCase::SphereLike => "sphere",
            SignCase::AntiDeSitterLike => "antidesitter",
            SignCase::EuclideanLike => "euclidean",
            SignCase::MinkowskiLike => "minkowski",
        }
    }

    pub fn parse(name: &str) -> Result<SignCase> {
        let lower = name.to_ascii_lowercase();
        let found = match lower.as_str() {
            "hyperbolic" | "hyp" | "hyplike" => SignCase::HypLike,
            "desitter" | "ds" | "desitterlike" => SignCase::DeSitterLike,
            "sphere" | "spherelike" => SignCase::SphereLike,
            "antidesitter" | "ads" | "antidesitterlike" => SignCase::AntiDeSitterLike,
            "euclidean" | "euclideanlike" => SignCase::EuclideanLike,
            "minkowski" | "minkowskilike" => SignCase::MinkowskiLike,
            _ => return Err(Error::InvalidInput(format!("unknown sign case '{name}'"))),
        };
        Ok(found)
    }

    fn ad_bd(&self) -> (f64, f64) {
        let s = self.canonical_signs();
        (f64::from(s.a * s.d), f64::from(s.b * s.d))
    }

    fn has_two_curves(&self) -> bool {
        matches!(self, SignCase::HypLike | SignCase::DeSitterLike)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Curve {
    Q1,
    Q2,
    R1,
    R2,
}

impl Curve {
    pub fn name(&self) -> &'static str {
        match self {
            Curve::Q1 => "q1",
            Curve::Q2 => "q2",
            Curve::R1 => "r1",
            Curve::R2 => "r2",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Thresholds {
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
}

/// `-2√(n-1)/n`, where the two critical points of the two-curve cases merge.
pub fn seam(n: usize) -> f64 {
    -2.0 * ((n - 1) as f64).sqrt() / n as f64
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        Err(Error::InvalidInput(format!(
            "n must be at least 3, got {n}"
        )))
    } else {
        Ok(())
    }
}

fn discriminant(case: SignCase, n: usize, h: f64) -> f64 {
    let (ad, bd) = case.ad_bd();
    let nf = n as f64;
    let d = h * h * nf * nf + 4.0 * ad * bd * (nf - 1.0);
    // exact zero at the seam is lost to rounding of H = -2√(n-1)/n
    if d < 0.0 && d.abs() <= 1e-12 * (h * h * nf * nf).max(1.0) {
        0.0
    } else {
        d
    }
}

/// Whether the curve is defined at `H` for this case.
fn in_domain(case: SignCase, curve: Curve, n: usize, h: f64) -> bool {
    let s = seam(n);
    let near = |x: f64| (h - x).abs() <= H_SNAP;
    match (case.has_two_curves(), curve) {
        (true, Curve::Q1) => (h <= s || near(s) || h >= 1.0) && !near(1.0),
        (true, Curve::R1) => h <= s || near(s) || h >= 1.0 || near(1.0),
        (true, Curve::Q2) => (h > -1.0 && (h <= s || near(s))) && !near(-1.0),
        (true, Curve::R2) => (h >= -1.0 || near(-1.0)) && (h <= s || near(s)),
        (false, Curve::Q1) => case_has_a(case) || !near(0.0),
        (false, Curve::R1) => true,
        (false, _) => false,
    }
}

fn case_has_a(case: SignCase) -> bool {
    !matches!(case, SignCase::EuclideanLike | SignCase::MinkowskiLike)
}

/// The root `x = v^-n` of the critical-point quadratic feeding `curve`.
fn critical_x(case: SignCase, curve: Curve, n: usize, h: f64) -> f64 {
    let nf = n as f64;
    let sq = discriminant(case, n, h).max(0.0).sqrt();
    let sign = match curve {
        Curve::Q1 | Curve::R1 => 1.0,
        Curve::Q2 | Curve::R2 => -1.0,
    };
    let x = (-h * (nf - 2.0) + sign * sq) / (2.0 * (nf - 1.0));
    // at H = ±1 the exact value is 0 but rounding can leave a tiny negative
    if x < 0.0 && x.abs() <= 1e-14 * (1.0 + h.abs()) * nf {
        0.0
    } else {
        x
    }
}

/// A single threshold value, or `DomainError` naming the curve.
pub fn threshold(case: SignCase, n: usize, h: f64, curve: Curve) -> Result<f64> {
    check_n(n)?;
    let domain_err = || Error::DomainError {
        curve: curve.name().to_string(),
        h,
    };
    if !h.is_finite() || !in_domain(case, curve, n, h) {
        return Err(domain_err());
    }
    let nf = n as f64;
    let x = critical_x(case, curve, n, h);
    let (ad, bd) = case.ad_bd();
    match curve {
        Curve::Q1 | Curve::Q2 => {
            if x > 0.0 {
                Ok(x.powf(-1.0 / nf))
            } else {
                Err(domain_err())
            }
        }
        Curve::R1 | Curve::R2 => {
            if x > 0.0 {
                // r = -f(q) at C = 0, written in terms of x = q^-n
                let s = h + x;
                Ok(x.powf(-2.0 / nf) * (ad + bd * s * s))
            } else if x == 0.0 && (ad + bd * h * h).abs() <= 1e-12 {
                // the critical point escapes to infinity; -f tends to 0
                Ok(0.0)
            } else {
                Err(domain_err())
            }
        }
    }
}

/// All threshold values defined at `H`. Absent entries are outside the domain.
pub fn thresholds(case: SignCase, n: usize, h: f64) -> Result<Thresholds> {
    check_n(n)?;
    let get = |c| threshold(case, n, h, c).ok();
    Ok(Thresholds {
        q1: get(Curve::Q1),
        q2: get(Curve::Q2),
        r1: get(Curve::R1),
        r2: get(Curve::R2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    /// `C = r1(H)`.
    OnR1,
    /// `C = r2(H)`.
    OnR2,
    /// `H` sits on one of the special values of the case table.
    HThreshold,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub case: SignCase,
    pub n: usize,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub admissible: bool,
    /// Expected solution types, ascending in `v`.
    pub types: Vec<SolutionTag>,
    pub boundary: Boundary,
    pub thresholds: Thresholds,
    pub notes: String,
}

/// Which side of a threshold `C` lies on, with snapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Below,
    On,
    Above,
}

fn side(c: f64, r: f64) -> Side {
    if (c - r).abs() < THRESHOLD_SNAP {
        Side::On
    } else if c < r {
        Side::Below
    } else {
        Side::Above
    }
}

/// Admissibility of `(H, C)` and the solution types it produces.
pub fn admissible(case: SignCase, n: usize, h: f64, c: f64) -> AdmissibilityReport {
    use SolutionTag::*;
    let th = thresholds(case, n, h).unwrap_or_default();
    let s = seam(n);
    let near = |x: f64| (h - x).abs() <= H_SNAP;
    let r1 = th.r1.unwrap_or(f64::NAN);
    let r2 = th.r2.unwrap_or(f64::NAN);
    let s1 = side(c, r1);
    let s2 = side(c, r2);

    let mut boundary = match (s1, s2) {
        (Side::On, _) => Boundary::OnR1,
        (_, Side::On) => Boundary::OnR2,
        _ => Boundary::Interior,
    };
    let mut notes = String::new();
    let types: Vec<SolutionTag> = match case {
        SignCase::HypLike => {
            if near(-1.0) {
                boundary = Boundary::HThreshold;
                match c {
                    _ if c >= 0.0 => vec![Type3UnboundedWithMin],
                    _ if s1 == Side::Above => vec![Type1Periodic],
                    _ => vec![],
                }
            } else if near(s) {
                boundary = Boundary::HThreshold;
                if s1 == Side::On {
                    notes.push_str("triple root at q1");
                    vec![Type2UnboundedNoMin]
                } else {
                    vec![Type3UnboundedWithMin]
                }
            } else if near(1.0) {
                boundary = Boundary::HThreshold;
                if c > 0.0 {
                    vec![Type3UnboundedWithMin]
                } else {
                    vec![]
                }
            } else if !(-1.0..=1.0).contains(&h) {
                if s1 == Side::Above {
                    vec![Type1Periodic]
                } else {
                    vec![]
                }
            } else if h < s {
                match (s1, s2) {
                    (Side::Below | Side::On, _) => vec![Type3UnboundedWithMin],
                    (_, Side::Below) => {
                        notes.push_str("two immersions");
                        vec![Type1Periodic, Type3UnboundedWithMin]
                    }
                    (_, Side::On) => {
                        notes.push_str("two immersions");
                        vec![Type4BoundedWithMin, Type2UnboundedNoMin]
                    }
                    (_, Side::Above) => vec![Type3UnboundedWithMin],
                }
            } else {
                vec![Type3UnboundedWithMin]
            }
        }
        SignCase::DeSitterLike => {
            if (h >= s || near(s)) && (h <= 1.0 || near(1.0)) {
                notes.push_str("H in the forbidden interval");
                boundary = if near(s) || near(1.0) {
                    Boundary::HThreshold
                } else {
                    boundary
                };
                vec![]
            } else if near(-1.0) {
                boundary = Boundary::HThreshold;
                match s1 {
                    Side::On => vec![Type2UnboundedNoMin],
                    Side::Below if c > 0.0 => vec![Type3UnboundedWithMin],
                    _ => vec![],
                }
            } else if !(-1.0..=1.0).contains(&h) {
                match s1 {
                    Side::On => vec![Type2UnboundedNoMin],
                    Side::Below => vec![Type3UnboundedWithMin],
                    Side::Above => vec![],
                }
            } else {
                match (s1, s2) {
                    (Side::On, _) => vec![Type5BoundedWithMax],
                    (Side::Below, Side::Above) => vec![Type1Periodic],
                    _ => vec![],
                }
            }
        }
        SignCase::SphereLike => match s1 {
            Side::Above => vec![Type1Periodic],
            _ => vec![],
        },
        SignCase::AntiDeSitterLike => match s1 {
            Side::On => vec![Type2UnboundedNoMin],
            Side::Below => vec![Type3UnboundedWithMin],
            Side::Above => vec![],
        },
        SignCase::MinkowskiLike => {
            if near(0.0) {
                boundary = Boundary::HThreshold;
                notes.push_str("H must be non-zero");
                vec![]
            } else {
                match s1 {
                    Side::On => vec![Type2UnboundedNoMin],
                    Side::Below => vec![Type3UnboundedWithMin],
                    Side::Above => vec![],
                }
            }
        }
        SignCase::EuclideanLike => {
            if near(0.0) {
                boundary = Boundary::HThreshold;
                if c > 0.0 {
                    vec![Type3UnboundedWithMin]
                } else {
                    vec![]
                }
            } else if s1 == Side::Above {
                vec![Type1Periodic]
            } else {
                vec![]
            }
        }
    };
    AdmissibilityReport {
        case,
        n,
        h,
        c,
        admissible: !types.is_empty(),
        types,
        boundary,
        thresholds: th,
        notes,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhiBounds {
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub b3: Option<f64>,
}

/// Bounds of `|Φ|` from the closed forms; for `a = 0` only `b3` is given.
pub fn phi_bounds(case: SignCase, n: usize, h: f64) -> Result<PhiBounds> {
    check_n(n)?;
    let nf = n as f64;
    if !case_has_a(case) {
        let b3 = if h < 0.0 {
            -(nf * (nf - 1.0)).sqrt() * h
        } else {
            nf.sqrt() / (nf - 1.0).sqrt() * h
        };
        return Ok(PhiBounds {
            b3: Some(b3),
            ..PhiBounds::default()
        });
    }
    let disc = discriminant(case, n, h);
    if disc < 0.0 {
        return Err(Error::DomainError {
            curve: "b1".to_string(),
            h,
        });
    }
    let sq = disc.sqrt();
    let scale = nf.sqrt() / (2.0 * (nf - 1.0).sqrt());
    let b1 = scale * (sq - h * (nf - 2.0));
    let b2 = -scale * (sq + h * (nf - 2.0));
    Ok(PhiBounds {
        b1: Some(b1),
        b2: case.has_two_curves().then_some(b2),
        b3: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    #[serde(rename = "H")]
    pub h: f64,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub case: SignCase,
    pub n: usize,
    pub h_values: Vec<f64>,
    pub c_values: Vec<f64>,
    /// Row-major: `reports[i * c_values.len() + j]` is at `(h_values[i], c_values[j])`.
    pub reports: Vec<AdmissibilityReport>,
    pub curves: Vec<CurveSample>,
}

impl SweepGrid {
    pub fn at(&self, i: usize, j: usize) -> &AdmissibilityReport {
        &self.reports[i * self.c_values.len() + j]
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// Admissibility over a uniform `(H, C)` grid, with `r1`, `r2` sampled on the `H` nodes.
pub fn sweep(
    case: SignCase,
    n: usize,
    h_range: (f64, f64),
    c_range: (f64, f64),
    grid: (usize, usize),
) -> Result<SweepGrid> {
    check_n(n)?;
    let (nh, nc) = grid;
    if nh == 0 || nc == 0 {
        return Err(Error::InvalidInput(format!(
            "grid dimensions must be positive, got {nh}x{nc}"
        )));
    }
    let finite = [h_range.0, h_range.1, c_range.0, c_range.1]
        .iter()
        .all(|x| x.is_finite());
    if !finite {
        return Err(Error::InvalidInput(
            "sweep ranges must be finite".to_string(),
        ));
    }
    let h_values = linspace(h_range.0, h_range.1, nh);
    let c_values = linspace(c_range.0, c_range.1, nc);
    let reports = (0..nh * nc)
        .into_par_iter()
        .map(|k| admissible(case, n, h_values[k / nc], c_values[k % nc]))
        .collect();
    let curves = h_values
        .iter()
        .map(|&h| CurveSample {
            h,
            r1: threshold(case, n, h, Curve::R1).ok(),
            r2: threshold(case, n, h, Curve::R2).ok(),
        })
        .collect();
    Ok(SweepGrid {
        case,
        n,
        h_values,
        c_values,
        reports,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{eval_f, eval_f_prime, ProfileParams};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn hyperbolic_closed_forms() {
        let t = thresholds(SignCase::HypLike, 4, -0.9).unwrap();
        let r2 = -(2.0 / 15.0) * ((378.0 - 8.0 * 6f64.sqrt()) / 5.0).sqrt();
        let q2 = (30.0 / (9.0 - 2.0 * 6f64.sqrt())).powf(0.25);
        assert!(close(t.r2.unwrap(), r2, 1e-13), "{:?}", t);
        assert!(close(t.q2.unwrap(), q2, 1e-13));
        assert!(close(t.r1.unwrap(), -1.18898, 1e-5));
        assert!(close(t.q1.unwrap(), 1.21209, 1e-5));
    }

    #[test]
    fn de_sitter_and_anti_de_sitter_closed_forms() {
        let r1 = threshold(SignCase::DeSitterLike, 4, -2.0, Curve::R1).unwrap();
        let s13 = 13f64.sqrt();
        assert!(close(
            r1,
            4.0 * (2.0 * s13 - 5.0) / (3.0 * (3.0 * (s13 + 2.0)).sqrt()),
            1e-13
        ));

        let t = thresholds(SignCase::AntiDeSitterLike, 4, -2.0).unwrap();
        let s19 = 19f64.sqrt();
        let r1 = 4.0 * (2.0 * s19 - 11.0) / (3.0 * (3.0 * (s19 + 2.0)).sqrt());
        assert!(close(t.r1.unwrap(), r1, 1e-13));
        assert!(close(t.q1.unwrap(), (3.0 / (s19 + 2.0)).powf(0.25), 1e-13));
        assert_eq!(t.q2, None);
        assert_eq!(t.r2, None);
    }

    #[test]
    fn de_sitter_mirrors_hyperbolic() {
        for h in [-3.0, -1.5, -0.9, 1.5, 4.0] {
            let a = thresholds(SignCase::HypLike, 5, h).unwrap();
            let b = thresholds(SignCase::DeSitterLike, 5, h).unwrap();
            assert_eq!(a.q1, b.q1);
            assert_eq!(a.q2, b.q2);
            assert_eq!(a.r1.map(|r| -r), b.r1);
            assert_eq!(a.r2.map(|r| -r), b.r2);
        }
    }

    #[test]
    fn minkowski_and_euclidean_piecewise() {
        assert_eq!(
            threshold(SignCase::MinkowskiLike, 4, -2.0, Curve::R1).unwrap(),
            0.0
        );
        let q = threshold(SignCase::MinkowskiLike, 4, -2.0, Curve::Q1).unwrap();
        assert!(close(q, 0.5f64.powf(0.25), 1e-14));
        let h: f64 = 1.5;
        let expected = h * h * 16.0 / 9.0 * (3.0 / h).powf(0.5);
        assert!(close(
            threshold(SignCase::EuclideanLike, 4, h, Curve::R1).unwrap(),
            expected,
            1e-13
        ));
        assert!(close(
            threshold(SignCase::MinkowskiLike, 4, h, Curve::R1).unwrap(),
            -expected,
            1e-13
        ));
        assert!(matches!(
            threshold(SignCase::EuclideanLike, 4, 0.0, Curve::Q1),
            Err(Error::DomainError { .. })
        ));
        assert_eq!(
            threshold(SignCase::EuclideanLike, 4, 0.0, Curve::R1).unwrap(),
            0.0
        );
    }

    #[test]
    fn domains_and_limits() {
        let e = threshold(SignCase::HypLike, 4, 0.0, Curve::R1).unwrap_err();
        assert!(matches!(e, Error::DomainError { ref curve, .. } if curve == "r1"));
        assert!(threshold(SignCase::HypLike, 4, 1.0, Curve::Q1).is_err());
        assert_eq!(
            threshold(SignCase::HypLike, 4, 1.0, Curve::R1).unwrap(),
            0.0
        );
        assert!(threshold(SignCase::HypLike, 4, -1.0, Curve::Q2).is_err());
        assert_eq!(
            threshold(SignCase::HypLike, 4, -1.0, Curve::R2).unwrap(),
            0.0
        );
        assert!(threshold(SignCase::HypLike, 4, -2.0, Curve::R2).is_err());
        let empty = thresholds(SignCase::DeSitterLike, 4, 0.5).unwrap();
        assert_eq!(empty, Thresholds::default());
    }

    #[test]
    fn seam_continuity() {
        for n in [3, 4, 7, 12] {
            let s = seam(n);
            let t = thresholds(SignCase::HypLike, n, s).unwrap();
            assert!(close(t.q1.unwrap(), t.q2.unwrap(), 1e-6), "n = {n}: {t:?}");
            assert!(close(t.r1.unwrap(), t.r2.unwrap(), 1e-10));
        }
    }

    #[test]
    fn thresholds_are_double_roots() {
        for case in SignCase::ALL {
            let sg = case.canonical_signs();
            for h in [-3.0, -1.7, -0.95, -0.9, 0.3, 1.2, 2.5] {
                let t = thresholds(case, 4, h).unwrap();
                for (q, r) in [(t.q1, t.r1), (t.q2, t.r2)] {
                    if let (Some(q), Some(r)) = (q, r) {
                        let p = ProfileParams::new(4, sg.a, sg.b, sg.d, h, r).unwrap();
                        assert!(eval_f(&p, q).unwrap().abs() < 1e-9, "{case:?} H = {h}");
                        assert!(
                            eval_f_prime(&p, q).unwrap().abs() < 1e-9,
                            "{case:?} H = {h}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn admissibility_examples() {
        use SolutionTag::*;
        let r = admissible(SignCase::HypLike, 4, -0.9, -1.15);
        assert!(r.admissible);
        assert_eq!(r.types, vec![Type1Periodic, Type3UnboundedWithMin]);
        assert_eq!(r.boundary, Boundary::Interior);

        assert!(!admissible(SignCase::DeSitterLike, 4, 0.0, 1.0).admissible);
        let r1 = threshold(SignCase::SphereLike, 4, 0.0, Curve::R1).unwrap();
        assert!(!admissible(SignCase::SphereLike, 4, 0.0, r1).admissible);
        assert!(!admissible(SignCase::SphereLike, 4, 0.0, r1 - 0.1).admissible);
        assert_eq!(
            admissible(SignCase::SphereLike, 4, 0.0, r1 + 0.1).types,
            vec![Type1Periodic]
        );
        assert_eq!(
            admissible(SignCase::EuclideanLike, 4, 0.0, 1.0).types,
            vec![Type3UnboundedWithMin]
        );
        assert!(!admissible(SignCase::MinkowskiLike, 4, 0.0, -1.0).admissible);
    }

    #[test]
    fn threshold_snapping() {
        let r2 = threshold(SignCase::HypLike, 4, -0.9, Curve::R2).unwrap();
        let on = admissible(SignCase::HypLike, 4, -0.9, r2 + 1e-11);
        assert_eq!(on.boundary, Boundary::OnR2);
        assert_eq!(
            on.types,
            vec![
                SolutionTag::Type4BoundedWithMin,
                SolutionTag::Type2UnboundedNoMin
            ]
        );
        let off = admissible(SignCase::HypLike, 4, -0.9, r2 + 1e-6);
        assert_eq!(off.boundary, Boundary::Interior);
    }

    #[test]
    fn bound_closed_forms() {
        let b = phi_bounds(SignCase::HypLike, 4, -0.9).unwrap();
        let s6 = 6f64.sqrt();
        let s3 = 3f64.sqrt();
        assert!(close(b.b1.unwrap(), (2.0 * s6 + 9.0) / (5.0 * s3), 1e-13));
        assert!(close(b.b2.unwrap(), (9.0 - 2.0 * s6) / (5.0 * s3), 1e-13));
        let ds = phi_bounds(SignCase::DeSitterLike, 4, -2.0).unwrap();
        assert!(close(
            ds.b1.unwrap(),
            2.0 * (13f64.sqrt() + 2.0) / s3,
            1e-13
        ));
        let mk = phi_bounds(SignCase::MinkowskiLike, 4, -2.0).unwrap();
        assert!(close(mk.b3.unwrap(), 4.0 * s3, 1e-13));
        assert_eq!(
            phi_bounds(SignCase::EuclideanLike, 4, 0.0).unwrap().b3,
            Some(0.0)
        );
        for n in [3, 4, 9] {
            let sp = phi_bounds(SignCase::SphereLike, n, 0.0).unwrap();
            assert!(close(sp.b1.unwrap(), (n as f64).sqrt(), 1e-14));
        }
        assert!(matches!(
            phi_bounds(SignCase::HypLike, 4, 0.0),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn bounds_match_critical_points() {
        for case in SignCase::ALL {
            for n in [3, 4, 6] {
                for h in [-2.5, -1.2, -0.95, 0.7, 1.3, 3.0] {
                    let Ok(b) = phi_bounds(case, n, h) else {
                        continue;
                    };
                    let t = thresholds(case, n, h).unwrap();
                    let nf = n as f64;
                    let k = (nf * (nf - 1.0)).sqrt();
                    let b1 = b.b1.or(b.b3).unwrap();
                    if let Some(q1) = t.q1 {
                        assert!(
                            close(b1, k * q1.powi(-(n as i32)), 1e-10),
                            "{case:?} n={n} H={h}"
                        );
                    }
                    if let (Some(b2), Some(q2)) = (b.b2, t.q2) {
                        assert!(close(b2, k * q2.powi(-(n as i32)), 1e-10));
                    }
                }
            }
        }
    }

    #[test]
    fn sweep_degenerate_grid_matches_single_report() {
        let g = sweep(SignCase::HypLike, 4, (-0.9, 0.0), (-1.15, 5.0), (1, 1)).unwrap();
        assert_eq!(g.reports.len(), 1);
        assert_eq!(g.reports[0], admissible(SignCase::HypLike, 4, -0.9, -1.15));
    }

    #[test]
    fn sweep_forbidden_de_sitter_band() {
        let g = sweep(SignCase::DeSitterLike, 4, (-0.8, 0.9), (-3.0, 3.0), (9, 13)).unwrap();
        assert!(g.reports.iter().all(|r| !r.admissible));
    }

    #[test]
    fn sweep_flips_across_curves() {
        let n = 12;
        let g = sweep(SignCase::HypLike, n, (-3.0, -0.56), (-3.0, 0.5), (25, 60)).unwrap();
        for (i, h) in g.h_values.iter().enumerate() {
            let Some(r1) = g.curves[i].r1 else { continue };
            for j in 0..g.c_values.len() - 1 {
                let (c0, c1) = (g.c_values[j], g.c_values[j + 1]);
                let (a0, a1) = (g.at(i, j), g.at(i, j + 1));
                if a0.types != a1.types {
                    let straddles = |r: Option<f64>| r.is_some_and(|r| c0 <= r && r <= c1);
                    let special = *h >= -1.0 && (c0..=c1).contains(&0.0);
                    assert!(
                        straddles(Some(r1)) || straddles(g.curves[i].r2) || special,
                        "H = {h}: flip on [{c0}, {c1}] without a threshold"
                    );
                }
            }
        }
        assert_eq!(g.at(3, 7).h, g.h_values[3]);
        assert_eq!(g.at(3, 7).c, g.c_values[7]);
    }
}
