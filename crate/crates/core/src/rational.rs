//! Rational maps of the sphere: homogeneous evaluation and recovery of a
//! map from samples.
//!
//! A map of degree `n` that sends `z_j ↦ w_j` satisfies, for each sample,
//! `w₂·N(z) − w₁·D(z) = 0` in homogeneous coordinates. Stacking one such row
//! per sample gives a matrix whose kernel, found by SVD, holds the
//! coefficients.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::conformal::SphereMap;
use crate::error::{Error, Result};
use crate::geometry::{MobiusTransform, ProjectivePoint};
use crate::poly;
use crate::C64;

/// `z ↦ (Σ aᵢ zⁱ) / (Σ bᵢ zⁱ)`, both sums of formal degree `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RationalCoeffs", into = "RationalCoeffs")]
pub struct RationalMap {
    /// `a_n, …, a_0`
    num: Vec<C64>,
    /// `b_n, …, b_0`
    den: Vec<C64>,
}

/// Serialized form: degree-descending `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalCoeffs {
    pub numerator: Vec<[f64; 2]>,
    pub denominator: Vec<[f64; 2]>,
}

impl TryFrom<RationalCoeffs> for RationalMap {
    type Error = Error;

    fn try_from(c: RationalCoeffs) -> Result<Self> {
        let conv = |v: Vec<[f64; 2]>| v.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        RationalMap::new(conv(c.numerator), conv(c.denominator))
    }
}

impl From<RationalMap> for RationalCoeffs {
    fn from(r: RationalMap) -> Self {
        let conv = |v: &[C64]| v.iter().map(|c| [c.re, c.im]).collect();
        RationalCoeffs { numerator: conv(&r.num), denominator: conv(&r.den) }
    }
}

impl RationalMap {
    /// Builds and normalizes a map, rejecting a common factor.
    pub fn new(num: Vec<C64>, den: Vec<C64>) -> Result<Self> {
        let map = Self::from_coefficients(num, den)?;
        let s = map.sylvester_min_singular_value();
        if s <= 1e-8 {
            return Err(Error::CommonFactor(s));
        }
        Ok(map)
    }

    /// Builds and normalizes a map without the common-factor check.
    pub fn from_coefficients(mut num: Vec<C64>, mut den: Vec<C64>) -> Result<Self> {
        let n = num.len().max(den.len());
        if n == 0 {
            return Err(Error::InvalidParameter("rational map needs coefficients".into()));
        }
        let pad = |v: &mut Vec<C64>| {
            let mut p = vec![C64::new(0.0, 0.0); n - v.len()];
            p.append(v);
            *v = p;
        };
        pad(&mut num);
        pad(&mut den);
        let big = num
            .iter()
            .chain(&den)
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or_default();
        if !(big.norm() > 0.0 && big.is_finite()) {
            return Err(Error::InvalidParameter("rational map coefficients are all zero".into()));
        }
        for c in num.iter_mut().chain(den.iter_mut()) {
            *c /= big;
        }
        Ok(Self { num, den })
    }

    /// The Möbius transformation as a degree-1 map.
    pub fn from_mobius(m: &MobiusTransform) -> Self {
        Self::from_coefficients(vec![m.a, m.b], vec![m.c, m.d]).expect("nonzero matrix")
    }

    pub fn degree(&self) -> usize {
        self.num.len() - 1
    }

    pub fn numerator(&self) -> &[C64] {
        &self.num
    }

    pub fn denominator(&self) -> &[C64] {
        &self.den
    }

    /// Coefficients `(a_n … a_0, b_n … b_0)` as one vector.
    pub fn coefficient_vector(&self) -> Vec<C64> {
        self.num.iter().chain(&self.den).copied().collect()
    }

    fn form(coeffs: &[C64], z: ProjectivePoint) -> C64 {
        // homogeneous Horner: Σ cₖ z1^{n−k} z2^k
        let mut acc = C64::new(0.0, 0.0);
        let mut z2k = C64::new(1.0, 0.0);
        for &c in coeffs {
            acc = acc * z.z1 + c * z2k;
            z2k *= z.z2;
        }
        acc
    }

    /// `(N(z1, z2), D(z1, z2))`; no case distinction at `∞`.
    pub fn eval(&self, z: ProjectivePoint) -> ProjectivePoint {
        let z = z.normalized();
        ProjectivePoint::new(Self::form(&self.num, z), Self::form(&self.den, z))
    }

    /// Affine evaluation `N(z)/D(z)`.
    pub fn eval_affine(&self, z: C64) -> C64 {
        poly::eval(&self.num, z) / poly::eval(&self.den, z)
    }

    /// Smallest singular value of the Sylvester matrix of the two forms,
    /// each scaled to unit norm. Zero exactly when they share a root on `Ĉ`.
    pub fn sylvester_min_singular_value(&self) -> f64 {
        let n = self.degree();
        if n == 0 {
            return 1.0;
        }
        let unit = |v: &[C64]| {
            let s = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            v.iter().map(|c| c / s).collect::<Vec<_>>()
        };
        let (a, b) = (unit(&self.num), unit(&self.den));
        if a.iter().any(|c| !c.is_finite()) || b.iter().any(|c| !c.is_finite()) {
            return 0.0;
        }
        let size = 2 * n;
        let mut s = DMatrix::<C64>::zeros(size, size);
        for r in 0..n {
            for (k, c) in a.iter().enumerate() {
                s[(r, r + k)] = *c;
            }
            for (k, c) in b.iter().enumerate() {
                s[(n + r, r + k)] = *c;
            }
        }
        s.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Critical points: roots of the Wronskian `N′D − ND′` as a form of
    /// degree `2n − 2`.
    pub fn critical_points(&self) -> Vec<ProjectivePoint> {
        let n = self.degree();
        if n < 2 {
            return Vec::new();
        }
        let w = poly::subtract(
            &poly::multiply(&poly::derivative(&self.num), &self.den),
            &poly::multiply(&self.num, &poly::derivative(&self.den)),
        );
        // formal degree 2n − 2
        let mut form = vec![C64::new(0.0, 0.0); (2 * n - 1).saturating_sub(w.len())];
        form.extend(w.iter().skip(w.len().saturating_sub(2 * n - 1)));
        poly::roots(&form)
    }
}

/// Evaluates a rational map at a projective point.
pub fn rational_eval(r: &RationalMap, z: ProjectivePoint) -> ProjectivePoint {
    r.eval(z)
}

impl SphereMap for RationalMap {
    fn eval(&self, z: ProjectivePoint) -> Option<ProjectivePoint> {
        let w = RationalMap::eval(self, z);
        w.is_valid().then_some(w)
    }

    fn singular_points(&self) -> Vec<ProjectivePoint> {
        self.critical_points()
    }
}

/// Outcome of [`fit_rational`].
#[derive(Debug, Clone)]
pub struct RationalFit {
    pub map: RationalMap,
    /// `‖M v‖` for the unit kernel vector `v` (rows of `M` have unit norm).
    pub residual: f64,
    /// The two smallest singular values, ascending.
    pub smallest_singular_values: [f64; 2],
    pub samples_used: usize,
}

/// Residual above which the degree is declared too low.
pub const FIT_RESIDUAL_TOL: f64 = 1e-6;

/// Recovers a degree-`n` rational map from samples of `f`.
///
/// Fails with `DegreeTooLow` when no degree-`n` map fits, and with
/// `RankDeficient` when several do (degree too high or degenerate samples).
pub fn fit_rational(f: &dyn SphereMap, n: usize, samples: &[ProjectivePoint]) -> Result<RationalFit> {
    if n == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    let cols = 2 * n + 2;
    let mut rows: Vec<Vec<C64>> = Vec::with_capacity(samples.len());
    for &z in samples {
        let Some(w) = f.eval(z) else { continue };
        let (z, w) = (z.normalized(), w.normalized());
        let mut row = Vec::with_capacity(cols);
        let monomials: Vec<C64> = (0..=n).map(|k| z.z1.powu((n - k) as u32) * z.z2.powu(k as u32)).collect();
        row.extend(monomials.iter().map(|m| w.z2 * m));
        row.extend(monomials.iter().map(|m| -w.z1 * m));
        let norm = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            rows.push(row.into_iter().map(|c| c / norm).collect());
        }
    }
    if rows.len() < cols {
        return Err(Error::TooFewSamples { needed: cols, got: rows.len() });
    }
    let m = DMatrix::<C64>::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let (i1, i2) = (order[0], order[1]);
    let (s1, s2) = (svd.singular_values[i1], svd.singular_values[i2]);
    if s1 > FIT_RESIDUAL_TOL {
        return Err(Error::DegreeTooLow { degree: n, residual: s1 });
    }
    if s2 <= (1e3 * s1).max(1e-10) {
        return Err(Error::RankDeficient { smallest: s1, second: s2 });
    }
    let kernel: Vec<C64> = (0..cols).map(|j| v_t[(i1, j)].conj()).collect();
    let map = RationalMap::from_coefficients(kernel[..=n].to_vec(), kernel[n + 1..].to_vec())?;
    let syl = map.sylvester_min_singular_value();
    if syl <= 1e-8 {
        return Err(Error::CommonFactor(syl));
    }
    Ok(RationalFit { map, residual: s1, smallest_singular_values: [s1, s2], samples_used: rows.len() })
}

/// Sample points for fitting degree `n`: `6n` points split between the
/// circles `|z| = 0.7` and `|z| = 1.3` with seeded angular jitter, skipping
/// points within `0.05` (chordal) of the map's singular set.
pub fn default_samples(f: &dyn SphereMap, n: usize, seed: u64) -> Vec<ProjectivePoint> {
    let target = 6 * n.max(1);
    let per_circle = target.div_ceil(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(target);
    let mut attempts = 0;
    while out.len() < target && attempts < 50 * target {
        let k = attempts % target;
        attempts += 1;
        let radius = if k.is_multiple_of(2) { 0.7 } else { 1.3 };
        let slot = (k / 2) as f64;
        let angle = TAU * (slot + rng.gen_range(-0.3..0.3)) / per_circle as f64;
        let z = ProjectivePoint::finite(C64::from_polar(radius, angle));
        if f.distance_to_singular(z) < 0.05 || f.eval(z).is_none() {
            continue;
        }
        out.push(z);
    }
    out
}

/// Fits with [`default_samples`].
pub fn fit_rational_auto(f: &dyn SphereMap, n: usize, seed: u64) -> Result<RationalFit> {
    fit_rational(f, n, &default_samples(f, n, seed))
}

/// How [`rational_equiv`] compares maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivalence {
    /// Proportional coefficient vectors.
    Strict,
    /// `C ∘ R1 ∘ C′ = R2` for some Möbius `C`, `C′`.
    Relaxed,
}

/// Compares two maps of the same degree.
pub fn rational_equiv(r1: &RationalMap, r2: &RationalMap, tol: f64, mode: Equivalence) -> bool {
    if r1.degree() != r2.degree() {
        return false;
    }
    match mode {
        Equivalence::Strict => proportional(&r1.coefficient_vector(), &r2.coefficient_vector(), tol),
        Equivalence::Relaxed => proportional(&r1.coefficient_vector(), &r2.coefficient_vector(), tol)
            || relaxed_match(r1, r2, tol).is_some(),
    }
}

/// Largest coefficient deviation after scaling `b` onto `a` (both unit norm).
pub fn coefficient_distance(a: &[C64], b: &[C64]) -> f64 {
    let unit = |v: &[C64]| {
        let s = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.iter().map(|c| c / s).collect::<Vec<_>>()
    };
    let (a, b) = (unit(a), unit(b));
    let dot: C64 = a.iter().zip(&b).map(|(x, y)| y.conj() * x).sum();
    if dot.norm() == 0.0 {
        return f64::INFINITY;
    }
    let phase = dot / dot.norm();
    a.iter().zip(&b).map(|(x, y)| (x - y * phase).norm()).fold(0.0, f64::max)
}

fn proportional(a: &[C64], b: &[C64], tol: f64) -> bool {
    a.len() == b.len() && coefficient_distance(a, b) < tol
}

/// Finds `(C, C′)` with `C ∘ R1 ∘ C′ = R2`, if any.
///
/// Degree 1 and 2 maps are all equivalent. Beyond that, `C` must carry the
/// critical values of `R1` to those of `R2`, and `C′` the critical points of
/// `R2` to those of `R1`; candidate matchings of three points each are
/// checked against fresh evaluations.
pub fn relaxed_match(r1: &RationalMap, r2: &RationalMap, tol: f64) -> Option<(MobiusTransform, MobiusTransform)> {
    let n = r1.degree();
    if n != r2.degree() {
        return None;
    }
    if n <= 2 {
        let c = MobiusTransform::IDENTITY;
        return (n == r2.degree()).then_some((c, c));
    }
    let dedupe = |pts: Vec<ProjectivePoint>| {
        let mut out: Vec<ProjectivePoint> = Vec::new();
        for p in pts {
            if !out.iter().any(|q| q.chordal_distance(&p) < 1e-6) {
                out.push(p);
            }
        }
        out
    };
    let crit1 = dedupe(r1.critical_points());
    let crit2 = dedupe(r2.critical_points());
    let values1 = dedupe(crit1.iter().map(|&p| r1.eval(p)).collect());
    let values2 = dedupe(crit2.iter().map(|&p| r2.eval(p)).collect());
    if values1.len() != values2.len() || values1.len() < 3 || crit1.len() != crit2.len() || crit1.len() < 3 {
        return None;
    }
    let probes: Vec<ProjectivePoint> = (0..12)
        .map(|k| ProjectivePoint::finite(C64::from_polar(0.4 + 0.23 * k as f64, 1.1 + 2.3 * k as f64)))
        .collect();
    let src_v = [values1[0], values1[1], values1[2]];
    let src_c = [crit2[0], crit2[1], crit2[2]];
    for tv in triples(&values2) {
        let Ok(c) = MobiusTransform::mapping_three(src_v, tv) else { continue };
        // C′ sends each chosen critical point of R2 to a critical point of
        // R1 whose value C maps to the matching critical value of R2
        let options: Vec<Vec<ProjectivePoint>> = src_c
            .iter()
            .map(|&p| {
                let want = r2.eval(p);
                crit1
                    .iter()
                    .copied()
                    .filter(|&d| c.apply(r1.eval(d)).chordal_distance(&want) < 1e-5)
                    .collect()
            })
            .collect();
        for &d0 in &options[0] {
            for &d1 in &options[1] {
                for &d2 in &options[2] {
                    let Ok(cp) = MobiusTransform::mapping_three(src_c, [d0, d1, d2]) else { continue };
                    let ok = probes.iter().all(|&z| {
                        let lhs = c.apply(r1.eval(cp.apply(z)));
                        lhs.chordal_distance(&r2.eval(z)) < tol
                    });
                    if ok {
                        return Some((c, cp));
                    }
                }
            }
        }
    }
    None
}

fn triples(pts: &[ProjectivePoint]) -> Vec<[ProjectivePoint; 3]> {
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            for k in 0..pts.len() {
                if i != j && j != k && i != k {
                    out.push([pts[i], pts[j], pts[k]]);
                }
            }
        }
    }
    out
}
