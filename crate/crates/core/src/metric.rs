//! Signature inner products and the bookkeeping of the ambient space forms.
//!
//! Coordinates carry the metric `-dx_1^2 - ... - dx_k^2 + dx_{k+1}^2 + ... + dx_N^2`,
//! with the minus signs always on the first `k` coordinates.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

/// Residual squared norms below this are treated as null during Gram-Schmidt.
pub const NULL_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureMetric {
    dim: usize,
    neg_count: usize,
}

impl SignatureMetric {
    pub fn new(dim: usize, neg_count: usize) -> Result<Self> {
        if dim == 0 || neg_count >= dim {
            return Err(Error::InvalidInput(format!(
                "signature needs 0 <= k < dim, got dim = {dim}, k = {neg_count}"
            )));
        }
        Ok(Self { dim, neg_count })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn neg_count(&self) -> usize {
        self.neg_count
    }

    /// `<e_i, e_i>` for the i-th standard basis vector (0-based).
    pub fn sign(&self, i: usize) -> f64 {
        if i < self.neg_count {
            -1.0
        } else {
            1.0
        }
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        let mut e = Vector::zeros(self.dim);
        e[i] = 1.0;
        e
    }

    pub fn inner(&self, u: &Vector, v: &Vector) -> Result<f64> {
        if u.len() != self.dim || v.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "vectors of length {} and {} for a metric of dimension {}",
                u.len(),
                v.len(),
                self.dim
            )));
        }
        Ok(self.dot(u, v))
    }

    /// Unchecked inner product; callers guarantee matching lengths.
    ///
    /// The negative and positive blocks are summed separately so the result
    /// is symmetric bit for bit.
    pub fn dot(&self, u: &Vector, v: &Vector) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        debug_assert_eq!(v.len(), self.dim);
        let k = self.neg_count;
        let neg: f64 = (0..k).map(|i| u[i] * v[i]).sum();
        let pos: f64 = (k..self.dim).map(|i| u[i] * v[i]).sum();
        pos - neg
    }

    pub fn norm_sq(&self, u: &Vector) -> f64 {
        self.dot(u, u)
    }
}

/// The space form `SF(n+1, k, a)` together with its embedding space `L(n+2, k, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceFormSpec {
    pub n: usize,
    pub k: usize,
    pub a: i8,
}

impl SpaceFormSpec {
    pub fn new(n: usize, k: usize, a: i8) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!(
                "n must be at least 3, got {n}"
            )));
        }
        if !(-1..=1).contains(&a) {
            return Err(Error::InvalidInput(format!(
                "a must be -1, 0 or 1, got {a}"
            )));
        }
        let spec = Self { n, k, a };
        // index must leave at least one spacelike direction
        SignatureMetric::new(spec.embedding_dim(), spec.embedding_index())?;
        Ok(spec)
    }

    pub fn embedding_dim(&self) -> usize {
        if self.a == 0 {
            self.n + 1
        } else {
            self.n + 2
        }
    }

    pub fn embedding_index(&self) -> usize {
        if self.a == -1 {
            self.k + 1
        } else {
            self.k
        }
    }

    pub fn metric(&self) -> SignatureMetric {
        SignatureMetric {
            dim: self.embedding_dim(),
            neg_count: self.embedding_index(),
        }
    }

    /// Whether `x` lies on the space form (`<x,x> = a` for `a = ±1`).
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if x.len() != self.embedding_dim() {
            return false;
        }
        self.a == 0 || (self.metric().norm_sq(x) - f64::from(self.a)).abs() <= tol
    }
}

/// Signs `a` (curvature), `b = <ν,ν>` and `d = <e_n,e_n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignTriple {
    pub a: i8,
    pub b: i8,
    pub d: i8,
}

impl SignTriple {
    pub fn new(a: i8, b: i8, d: i8) -> Result<Self> {
        if !(-1..=1).contains(&a) || b.abs() != 1 || d.abs() != 1 {
            return Err(Error::InvalidInput(format!(
                "need a in {{-1,0,1}} and b, d in {{-1,1}}, got ({a}, {b}, {d})"
            )));
        }
        Ok(Self { a, b, d })
    }
}

/// Mutually orthogonal `u1, u2, u3` with `<u1,u1> = a`, `<u2,u2> = b`, `<u3,u3> = d`.
/// `u1` is absent when `a = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameVectors {
    pub metric: SignatureMetric,
    pub signs: SignTriple,
    pub u1: Option<Vector>,
    pub u2: Vector,
    pub u3: Vector,
}

impl FrameVectors {
    /// The non-zero frame vectors, in order.
    pub fn vectors(&self) -> Vec<&Vector> {
        let mut out = Vec::with_capacity(3);
        if let Some(u1) = &self.u1 {
            out.push(u1);
        }
        out.push(&self.u2);
        out.push(&self.u3);
        out
    }

    /// `c0 u1 + c1 u2 + c2 u3` (`c0` ignored when `u1` is absent).
    pub fn combine(&self, c: &[f64; 3]) -> Vector {
        let mut v = &self.u2 * c[1] + &self.u3 * c[2];
        if let Some(u1) = &self.u1 {
            v += u1 * c[0];
        }
        v
    }
}

/// Deterministic frame: each vector takes the lowest-index unused standard
/// basis vector of the required sign, assigned in the order `u1, u2, u3`.
pub fn pick_frame(spec: &SpaceFormSpec, signs: &SignTriple) -> Result<FrameVectors> {
    if signs.a != spec.a {
        return Err(Error::InvalidInput(format!(
            "sign triple has a = {} but the space form has a = {}",
            signs.a, spec.a
        )));
    }
    let metric = spec.metric();
    let mut used = vec![false; metric.dim()];
    let mut take = |sign: i8, label: &str| -> Result<Vector> {
        let wanted = f64::from(sign);
        let idx = (0..metric.dim())
            .find(|&i| !used[i] && metric.sign(i) == wanted)
            .ok_or_else(|| {
                Error::SignatureUnavailable(format!(
                    "no unused basis vector with <{label},{label}> = {sign} in signature ({}, {})",
                    metric.neg_count(),
                    metric.dim() - metric.neg_count()
                ))
            })?;
        used[idx] = true;
        Ok(metric.basis_vector(idx))
    };
    let u1 = if signs.a != 0 {
        Some(take(signs.a, "u1")?)
    } else {
        None
    };
    let u2 = take(signs.b, "u2")?;
    let u3 = take(signs.d, "u3")?;
    Ok(FrameVectors {
        metric,
        signs: *signs,
        u1,
        u2,
        u3,
    })
}

/// Orthonormal (up to sign) basis of the orthogonal complement of `frame`.
///
/// Sign-aware Gram-Schmidt over the standard basis in index order; residuals
/// whose squared norm is below [`NULL_RESIDUAL`] are skipped.
pub fn orth_complement_basis(metric: &SignatureMetric, frame: &[Vector]) -> Result<Vec<Vector>> {
    let mut accepted: Vec<(Vector, f64)> = Vec::with_capacity(metric.dim());
    for f in frame {
        if f.len() != metric.dim() {
            return Err(Error::InvalidInput(
                "frame vector has the wrong length".into(),
            ));
        }
        let nsq = metric.norm_sq(f);
        if nsq.abs() < NULL_RESIDUAL {
            return Err(Error::InvalidInput("frame contains a null vector".into()));
        }
        for (g, gsq) in &accepted {
            if (metric.dot(f, g) / (nsq.abs().sqrt() * gsq.abs().sqrt())).abs() > 1e-10 {
                return Err(Error::InvalidInput(
                    "frame vectors are not orthogonal".into(),
                ));
            }
        }
        accepted.push((f.clone(), nsq));
    }
    let wanted = metric.dim().saturating_sub(frame.len());
    let mut out = Vec::with_capacity(wanted);
    for i in 0..metric.dim() {
        if out.len() == wanted {
            break;
        }
        let mut r = metric.basis_vector(i);
        // two passes of projection for numerical orthogonality
        for _ in 0..2 {
            for (g, gsq) in &accepted {
                let c = metric.dot(&r, g) / gsq;
                r -= g * c;
            }
        }
        let rsq = metric.norm_sq(&r);
        if rsq.abs() < NULL_RESIDUAL {
            continue;
        }
        r /= rsq.abs().sqrt();
        let s = metric.norm_sq(&r).signum();
        accepted.push((r.clone(), s));
        out.push(r);
    }
    if out.len() < wanted {
        return Err(Error::DegenerateComplement {
            found: out.len(),
            wanted,
        });
    }
    Ok(out)
}

/// Points `y = Σ c_i E_i` with `<y,y> = target` on the span of an orthogonal basis.
///
/// Coefficients are drawn uniformly from `[-1, 1]` and rescaled onto the
/// quadric; when the draw has the wrong sign, the coefficient of the last basis
/// vector of the target's sign is solved for instead.
pub fn sample_quadric(
    metric: &SignatureMetric,
    basis: &[Vector],
    target: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vector>> {
    let signs = basis_signs(metric, basis)?;
    let target_sign = if target > 0.0 {
        1.0
    } else if target < 0.0 {
        -1.0
    } else {
        0.0
    };
    // the last basis vector with the target's sign, used for the solve step
    let solve_idx = if target_sign == 0.0 {
        let has_pos = signs.iter().any(|&s| s > 0.0);
        let has_neg = signs.iter().any(|&s| s < 0.0);
        if !(has_pos && has_neg) && !basis.is_empty() {
            // the null cone of a definite span is just the origin
            None
        } else {
            signs.iter().rposition(|&s| s < 0.0)
        }
    } else {
        signs.iter().rposition(|&s| s.signum() == target_sign)
    };
    if target != 0.0 && solve_idx.is_none() {
        return Err(Error::SignatureUnavailable(format!(
            "no direction with squared norm of sign {target_sign} in the span"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut c: Vec<f64> = (0..basis.len())
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect();
        let q: f64 = c.iter().zip(&signs).map(|(ci, s)| s * ci * ci).sum();
        if target != 0.0 && q.signum() == target_sign && q.abs() > 1e-3 {
            let scale = (target / q).sqrt();
            c.iter_mut().for_each(|ci| *ci *= scale);
        } else if let Some(j) = solve_idx {
            let rest = q - signs[j] * c[j] * c[j];
            let cj_sq = (target - rest) / signs[j];
            if cj_sq < 0.0 {
                continue;
            }
            c[j] = cj_sq.sqrt().copysign(c[j]);
        } else {
            // target 0 on a definite span
            c.iter_mut().for_each(|ci| *ci = 0.0);
        }
        let mut y = Vector::zeros(metric.dim());
        for (ci, e) in c.iter().zip(basis) {
            y += e * *ci;
        }
        out.push(y);
    }
    Ok(out)
}

/// Points of the linear span with coefficients uniform in `[-radius, radius]`.
pub fn sample_flat(
    metric: &SignatureMetric,
    basis: &[Vector],
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vector>> {
    basis_signs(metric, basis)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "flat sampling radius must be positive, got {radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let mut y = Vector::zeros(metric.dim());
            for e in basis {
                y += e * rng.gen_range(-radius..=radius);
            }
            y
        })
        .collect())
}

fn basis_signs(metric: &SignatureMetric, basis: &[Vector]) -> Result<Vec<f64>> {
    basis
        .iter()
        .map(|e| {
            if e.len() != metric.dim() {
                return Err(Error::InvalidInput(
                    "basis vector has the wrong length".into(),
                ));
            }
            let s = metric.norm_sq(e);
            if s.abs() < NULL_RESIDUAL {
                return Err(Error::InvalidInput("basis contains a null vector".into()));
            }
            Ok(s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn inner_on_basis_and_null_vectors() {
        let m = SignatureMetric::new(3, 1).unwrap();
        assert_eq!(m.inner(&v(&[1., 0., 0.]), &v(&[1., 0., 0.])).unwrap(), -1.0);
        assert_eq!(m.inner(&v(&[1., 1., 0.]), &v(&[1., 1., 0.])).unwrap(), 0.0);
        let m6 = SignatureMetric::new(6, 1).unwrap();
        let u = v(&[0., 1., 1., 1., 1., 1.]);
        assert_eq!(m6.inner(&u, &u).unwrap(), 5.0);
    }

    #[test]
    fn inner_rejects_mismatched_lengths() {
        let m = SignatureMetric::new(3, 1).unwrap();
        assert!(matches!(
            m.inner(&v(&[1., 0.]), &v(&[1., 0., 0.])),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn embedding_bookkeeping() {
        let hyp = SpaceFormSpec::new(5, 0, -1).unwrap();
        assert_eq!((hyp.embedding_dim(), hyp.embedding_index()), (7, 1));
        let mink = SpaceFormSpec::new(4, 1, 0).unwrap();
        assert_eq!((mink.embedding_dim(), mink.embedding_index()), (5, 1));
        assert!(SpaceFormSpec::new(2, 0, 1).is_err());
    }

    fn gram(frame: &FrameVectors) -> Vec<Vec<f64>> {
        let vs = frame.vectors();
        vs.iter()
            .map(|x| vs.iter().map(|y| frame.metric.dot(x, y)).collect())
            .collect()
    }

    #[test]
    fn pick_frame_de_sitter() {
        let spec = SpaceFormSpec::new(4, 1, 1).unwrap();
        let f = pick_frame(&spec, &SignTriple::new(1, -1, 1).unwrap()).unwrap();
        assert_eq!(f.u2, spec.metric().basis_vector(0));
        assert_eq!(f.u1.as_ref().unwrap(), &spec.metric().basis_vector(1));
        assert_eq!(f.u3, spec.metric().basis_vector(2));
        assert_eq!(
            gram(&f),
            vec![vec![1., 0., 0.], vec![0., -1., 0.], vec![0., 0., 1.]]
        );
    }

    #[test]
    fn pick_frame_hyperbolic() {
        let spec = SpaceFormSpec::new(4, 0, -1).unwrap();
        let f = pick_frame(&spec, &SignTriple::new(-1, 1, 1).unwrap()).unwrap();
        assert_eq!(
            gram(&f),
            vec![vec![-1., 0., 0.], vec![0., 1., 0.], vec![0., 0., 1.]]
        );
    }

    #[test]
    fn pick_frame_exhausted_signature() {
        let spec = SpaceFormSpec::new(4, 0, 1).unwrap();
        assert!(matches!(
            pick_frame(&spec, &SignTriple::new(1, -1, 1).unwrap()),
            Err(Error::SignatureUnavailable(_))
        ));
    }

    #[test]
    fn complement_of_standard_vectors() {
        let m = SignatureMetric::new(6, 1).unwrap();
        let frame: Vec<_> = (0..3).map(|i| m.basis_vector(i)).collect();
        let e = orth_complement_basis(&m, &frame).unwrap();
        assert_eq!(e, (3..6).map(|i| m.basis_vector(i)).collect::<Vec<_>>());

        let m2 = SignatureMetric::new(6, 2).unwrap();
        let frame2 = vec![m2.basis_vector(0), m2.basis_vector(2), m2.basis_vector(3)];
        let e2 = orth_complement_basis(&m2, &frame2).unwrap();
        assert_eq!(
            e2,
            vec![m2.basis_vector(1), m2.basis_vector(4), m2.basis_vector(5)]
        );
        assert_eq!(m2.norm_sq(&e2[0]), -1.0);
    }

    #[test]
    fn complement_rejects_null_frame() {
        let m = SignatureMetric::new(5, 1).unwrap();
        let null = &m.basis_vector(0) + &m.basis_vector(1);
        assert!(matches!(
            orth_complement_basis(&m, &[null]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn complement_of_tilted_frame() {
        let m = SignatureMetric::new(5, 1).unwrap();
        // timelike and spacelike boosted pair
        let (ch, sh) = (1.3f64.cosh(), 1.3f64.sinh());
        let f1 = v(&[ch, sh, 0., 0., 0.]);
        let f2 = v(&[sh, ch, 0., 0., 0.]);
        let e = orth_complement_basis(&m, &[f1.clone(), f2.clone()]).unwrap();
        assert_eq!(e.len(), 3);
        for (i, ei) in e.iter().enumerate() {
            assert!(m.dot(ei, &f1).abs() < 1e-12 && m.dot(ei, &f2).abs() < 1e-12);
            for (j, ej) in e.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((m.dot(ei, ej).abs() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadric_unit_sphere() {
        let m = SignatureMetric::new(6, 1).unwrap();
        let basis: Vec<_> = (3..6).map(|i| m.basis_vector(i)).collect();
        let ys = sample_quadric(&m, &basis, 1.0, 1, 0).unwrap();
        assert_eq!(ys.len(), 1);
        assert!((m.norm_sq(&ys[0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadric_timelike_target() {
        // Gram diag(1, 1, 1, -1) with the timelike direction last
        let m = SignatureMetric::new(5, 1).unwrap();
        let basis = vec![
            m.basis_vector(2),
            m.basis_vector(3),
            m.basis_vector(4),
            m.basis_vector(0),
        ];
        for y in sample_quadric(&m, &basis, -1.0, 20, 3).unwrap() {
            // solve-for-last oracle: y_0^2 = 1 + Σ spacelike^2
            let spatial: f64 = (2..5).map(|i| y[i] * y[i]).sum();
            assert!((y[0] * y[0] - (1.0 + spatial)).abs() < 1e-12);
            assert!((m.norm_sq(&y) + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadric_unreachable_sign() {
        let m = SignatureMetric::new(4, 0).unwrap();
        let basis: Vec<_> = (0..4).map(|i| m.basis_vector(i)).collect();
        assert!(matches!(
            sample_quadric(&m, &basis, -1.0, 1, 0),
            Err(Error::SignatureUnavailable(_))
        ));
    }

    #[test]
    fn flat_samples_reproduce_coefficients() {
        let m = SignatureMetric::new(5, 1).unwrap();
        let basis = vec![m.basis_vector(0), m.basis_vector(3), m.basis_vector(4)];
        let ys = sample_flat(&m, &basis, 2.0, 5, 11).unwrap();
        assert_eq!(ys.len(), 5);
        for y in &ys {
            for e in &basis {
                let c = m.dot(y, e) / m.norm_sq(e);
                let direct = e.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>();
                assert_eq!(c, direct);
                assert!(c.abs() <= 2.0);
            }
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let m = SignatureMetric::new(6, 1).unwrap();
        let basis: Vec<_> = (0..4).map(|i| m.basis_vector(i)).collect();
        let a = sample_quadric(&m, &basis, 1.0, 7, 42).unwrap();
        let b = sample_quadric(&m, &basis, 1.0, 7, 42).unwrap();
        assert_eq!(a, b);
    }
}
