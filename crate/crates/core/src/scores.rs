//! Orthonormal score functions.
//!
//! Shifted Legendre polynomials `Leg_j(u)` on [0, 1], and custom score
//! functions `T_j(x; X)` obtained by Gram-Schmidt orthonormalization of the
//! powers of the standardized mid-rank `T_1 = Z(Fmid(X; X))` under the
//! empirical measure of a sample. For tie-free samples the custom scores
//! approach `Leg_j(Fmid(x))` as n grows.

use crate::empirical::{check_open_unit, Sample};
use crate::error::{LpError, Result};

/// Highest Legendre order accepted by [`legendre_eval`].
pub const MAX_LEGENDRE_ORDER: usize = 12;

/// Default number of score functions used throughout.
pub const DEFAULT_ORDER: usize = 4;

/// A residual below this fraction of the pre-projection norm marks a power of
/// `T_1` as numerically dependent on the lower orders.
const RANK_TOLERANCE: f64 = 1e-8;

/// Orthonormal shifted Legendre polynomial of order `j` at `u` in [0, 1].
pub fn legendre_eval(j: usize, u: f64) -> Result<f64> {
    if j > MAX_LEGENDRE_ORDER {
        return Err(LpError::OrderTooHigh {
            order: j,
            max: MAX_LEGENDRE_ORDER,
        });
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(LpError::DomainError {
            what: "u",
            value: u,
            domain: "[0, 1]",
        });
    }
    Ok(legendre_unchecked(j, u))
}

pub(crate) fn legendre_unchecked(j: usize, u: f64) -> f64 {
    let x = 2.0 * u - 1.0;
    let mut p0 = 1.0;
    if j == 0 {
        return 1.0;
    }
    let mut p1 = x;
    for k in 1..j {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    ((2 * j + 1) as f64).sqrt() * p1
}

/// Values of `Leg_1..=Leg_m` at `u`.
pub(crate) fn legendre_all(m: usize, u: f64) -> Vec<f64> {
    let x = 2.0 * u - 1.0;
    let mut out = Vec::with_capacity(m);
    let (mut p0, mut p1) = (1.0, x);
    for j in 1..=m {
        if j > 1 {
            let kf = (j - 1) as f64;
            let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        out.push(((2 * j + 1) as f64).sqrt() * p1);
    }
    out
}

/// Table of orthonormal score functions `T_1..T_m` at the distinct values of a sample.
#[derive(Debug, Clone)]
pub struct ScoreBasis {
    sample: Sample,
    requested_order: usize,
    // table[j - 1][i] = T_j(x_i)
    table: Vec<Vec<f64>>,
    truncated: bool,
    max_mean_error: f64,
    max_gram_error: f64,
}

impl ScoreBasis {
    /// Builds scores up to `max_order`, clipped to `r - 1` for a sample with
    /// `r` distinct values.
    pub fn new(sample: &Sample, max_order: usize) -> Result<Self> {
        let r = sample.r();
        if r < 2 {
            return Err(LpError::DegenerateSample);
        }
        let p = sample.masses();
        let m = max_order.min(r - 1);

        let fmid = sample.fmid_at_atoms();
        let center = dot(p, fmid, &vec![1.0; r]);
        let t1: Vec<f64> = fmid.iter().map(|f| f - center).collect();
        let scale = dot(p, &t1, &t1).sqrt();
        if scale <= 0.0 {
            return Err(LpError::DegenerateSample);
        }
        let t1: Vec<f64> = t1.iter().map(|v| v / scale).collect();

        let mut table: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut truncated = false;
        let mut power = vec![1.0; r];
        for _ in 1..=m {
            for (pw, t) in power.iter_mut().zip(&t1) {
                *pw *= t;
            }
            let mut v = power.clone();
            let mean = dot(p, &v, &vec![1.0; r]);
            v.iter_mut().for_each(|x| *x -= mean);
            let before = dot(p, &v, &v).sqrt();
            // modified Gram-Schmidt, then one re-orthogonalization pass
            for _ in 0..2 {
                let mean = dot(p, &v, &vec![1.0; r]);
                v.iter_mut().for_each(|x| *x -= mean);
                for b in &table {
                    let c = dot(p, &v, b);
                    v.iter_mut().zip(b).for_each(|(x, bx)| *x -= c * bx);
                }
            }
            let norm = dot(p, &v, &v).sqrt();
            if !(norm > RANK_TOLERANCE * before) {
                truncated = true;
                break;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            table.push(v);
        }

        let mut basis = Self {
            sample: sample.clone(),
            requested_order: max_order,
            table,
            truncated,
            max_mean_error: 0.0,
            max_gram_error: 0.0,
        };
        basis.max_mean_error = basis
            .table
            .iter()
            .map(|t| dot(p, t, &vec![1.0; r]).abs())
            .fold(0.0, f64::max);
        let g = basis.gram();
        let mut worst: f64 = 0.0;
        for (j, row) in g.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        basis.max_gram_error = worst;
        Ok(basis)
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    /// Number of score functions actually built.
    pub fn max_order(&self) -> usize {
        self.table.len()
    }

    pub fn requested_order(&self) -> usize {
        self.requested_order
    }

    /// True when a power of `T_1` was numerically dependent and the basis
    /// stopped early.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Largest |mean| of any score under the empirical measure.
    pub fn max_mean_error(&self) -> f64 {
        self.max_mean_error
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn max_gram_error(&self) -> f64 {
        self.max_gram_error
    }

    /// Values of `T_j` at the distinct sample values.
    pub fn scores(&self, j: usize) -> Result<&[f64]> {
        self.check_order(j)?;
        Ok(&self.table[j - 1])
    }

    /// `T_j` at every original observation.
    pub fn obs_scores(&self, j: usize) -> Result<Vec<f64>> {
        let col = self.scores(j)?;
        Ok(self.sample.obs_atoms().iter().map(|&a| col[a]).collect())
    }

    /// Weighted Gram matrix of the scores.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let p = self.sample.masses();
        self.table
            .iter()
            .map(|a| self.table.iter().map(|b| dot(p, a, b)).collect())
            .collect()
    }

    /// `T_j(x; X)`; off the atoms, the value at the largest atom `<= x`
    /// (the smallest atom when `x` is below the support).
    pub fn eval_score(&self, j: usize, x: f64) -> Result<f64> {
        self.check_order(j)?;
        let i = self.sample.atom_at_or_below(x).unwrap_or(0);
        Ok(self.table[j - 1][i])
    }

    /// `S_j(u; X) = T_j(Q(u; X); X)`.
    pub fn score_quantile(&self, j: usize, u: f64) -> Result<f64> {
        self.check_order(j)?;
        check_open_unit("u", u)?;
        Ok(self.table[j - 1][self.sample.atom_for_level(u)])
    }

    /// All `S_1..S_m` at `u` (no validation).
    pub(crate) fn score_quantiles_at(&self, u: f64, m: usize) -> Vec<f64> {
        let i = self.sample.atom_for_level(u);
        self.table[..m].iter().map(|t| t[i]).collect()
    }

    /// `∫ S_j S_k du` by summing over the probability interval of each atom;
    /// the interval of atom i has length `p_i`, so this runs the same sum as
    /// [`ScoreBasis::gram`].
    pub fn step_inner_product(&self, j: usize, k: usize) -> Result<f64> {
        let a = self.scores(j)?;
        let b = self.scores(k)?;
        Ok(dot(self.sample.masses(), a, b))
    }

    pub(crate) fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    fn check_order(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.max_order() {
            Err(LpError::OrderOutOfRange {
                order: j,
                max: self.max_order(),
            })
        } else {
            Ok(())
        }
    }
}

/// Convenience wrapper around [`ScoreBasis::new`].
pub fn build_score_basis(sample: &Sample, max_order: usize) -> Result<ScoreBasis> {
    ScoreBasis::new(sample, max_order)
}

fn dot(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    p.iter().zip(a).zip(b).map(|((p, a), b)| p * a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, intervals: usize) -> f64 {
        let h = 1.0 / intervals as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn legendre_low_orders() {
        assert_eq!(legendre_eval(0, 0.3).unwrap(), 1.0);
        assert_eq!(legendre_eval(0, 1.0).unwrap(), 1.0);
        assert_eq!(legendre_eval(1, 0.5).unwrap(), 0.0);
        let u = 0.83;
        let l2 = 5f64.sqrt() * (6.0 * u * u - 6.0 * u + 1.0);
        let l3 = 7f64.sqrt() * (20.0 * u * u * u - 30.0 * u * u + 12.0 * u - 1.0);
        assert!((legendre_eval(1, u).unwrap() - 12f64.sqrt() * (u - 0.5)).abs() < 1e-14);
        assert!((legendre_eval(2, u).unwrap() - l2).abs() < 1e-13);
        assert!((legendre_eval(3, u).unwrap() - l3).abs() < 1e-13);
        assert!(matches!(
            legendre_eval(13, 0.5),
            Err(LpError::OrderTooHigh { order: 13, max: 12 })
        ));
        assert!(legendre_eval(2, 1.2).is_err());
    }

    #[test]
    fn legendre_orthonormal_two_routes() {
        let gl = crate::quadrature::GaussLegendre::new(64);
        for j in 0..=6 {
            for k in 0..=6 {
                let want = if j == k { 1.0 } else { 0.0 };
                let a = gl.integrate(|u| legendre_unchecked(j, u) * legendre_unchecked(k, u));
                let b = simpson(
                    |u| legendre_unchecked(j, u) * legendre_unchecked(k, u),
                    4000,
                );
                assert!((a - want).abs() < 1e-12, "gl j={j} k={k}");
                assert!((b - want).abs() < 1e-9, "simpson j={j} k={k}");
            }
        }
        let all = legendre_all(6, 0.37);
        for (j, v) in all.iter().enumerate() {
            assert!((v - legendre_unchecked(j + 1, 0.37)).abs() < 1e-14);
        }
    }

    #[test]
    fn binary_sample_has_one_score() {
        let s = Sample::new(&[0.0, 1.0, 1.0, 0.0]).unwrap();
        let b = ScoreBasis::new(&s, 4).unwrap();
        assert_eq!(b.max_order(), 1);
        let t = b.scores(1).unwrap();
        assert!((t[0] + 1.0).abs() < 1e-14 && (t[1] - 1.0).abs() < 1e-14);
        assert!(!b.truncated());
    }

    #[test]
    fn three_atom_hand_gram_schmidt() {
        // Fmid = 1/6, 1/2, 5/6; T1 = sqrt(3/2) (-1, 0, 1); T1^2 centered:
        // (1/2, -1, 1/2) with norm 1/sqrt(2) -> T2 = (1, -2, 1)/sqrt(2)
        let s = Sample::new(&[10.0, 20.0, 30.0]).unwrap();
        let b = ScoreBasis::new(&s, 4).unwrap();
        assert_eq!(b.max_order(), 2);
        let r = 1.5f64.sqrt();
        let t1 = b.scores(1).unwrap();
        let t2 = b.scores(2).unwrap();
        let h = 2f64.sqrt();
        for (got, want) in t1.iter().zip([-r, 0.0, r]) {
            assert!((got - want).abs() < 1e-14);
        }
        for (got, want) in t2.iter().zip([1.0 / h, -2.0 / h, 1.0 / h]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(b.max_gram_error() < 1e-14);
    }

    #[test]
    fn degenerate_sample() {
        let s = Sample::new(&[3.0, 3.0]).unwrap();
        assert!(matches!(
            ScoreBasis::new(&s, 2),
            Err(LpError::DegenerateSample)
        ));
    }

    #[test]
    fn order_range_checks() {
        let s = Sample::new(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let b = ScoreBasis::new(&s, 2).unwrap();
        assert!(matches!(
            b.eval_score(3, 1.0),
            Err(LpError::OrderOutOfRange { order: 3, max: 2 })
        ));
        assert!(b.eval_score(0, 1.0).is_err());
        assert!(b.score_quantile(1, 0.0).is_err());
    }

    #[test]
    fn step_extension_and_symmetry() {
        let s = Sample::new(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let b = ScoreBasis::new(&s, 4).unwrap();
        assert!(b.eval_score(1, 3.0).unwrap().abs() < 1e-12);
        assert_eq!(b.eval_score(2, 3.7).unwrap(), b.eval_score(2, 3.0).unwrap());
        assert_eq!(b.eval_score(1, -10.0).unwrap(), b.scores(1).unwrap()[0]);
        assert_eq!(b.eval_score(1, 99.0).unwrap(), b.scores(1).unwrap()[4]);
        // probability interval (0.2, 0.4] belongs to the value 2
        assert_eq!(b.score_quantile(3, 0.3).unwrap(), b.scores(3).unwrap()[1]);
        assert_eq!(b.score_quantile(3, 0.4).unwrap(), b.scores(3).unwrap()[1]);
    }

    #[test]
    fn step_integral_equals_discrete_inner_product() {
        let s = Sample::new(&[1.0, 1.0, 2.0, 5.0, 5.0, 5.0, 7.0, 8.0]).unwrap();
        let b = ScoreBasis::new(&s, 4).unwrap();
        let g = b.gram();
        for j in 1..=b.max_order() {
            for k in 1..=b.max_order() {
                let si = b.step_inner_product(j, k).unwrap();
                assert!((si - g[j - 1][k - 1]).abs() < 1e-12);
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((si - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn continuous_scores_approach_legendre() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| ((i * 7919) % n) as f64 * 0.37).collect();
        let s = Sample::new(&xs).unwrap();
        let b = ScoreBasis::new(&s, 4).unwrap();
        for j in 1..=4 {
            let t = b.scores(j).unwrap();
            let dev = s
                .fmid_at_atoms()
                .iter()
                .zip(t)
                .map(|(&u, &v)| (v - legendre_unchecked(j, u)).abs())
                .fold(0.0, f64::max);
            assert!(dev < 0.05, "order {j} deviation {dev}");
        }
    }
}
