//! Bivariate copula density series and the conditional curves derived from it.
//!
//! The copula density of `(X, Y)` is estimated as
//! `1 + sum_selected LP(j, k) S_j(u; X) S_k(v; Y)`. For fixed `u`, the series
//! in `v` is the conditional comparison density of `Y` given `X = Q(u; X)`;
//! integrating it against the quantile of `Y` gives conditional means and
//! inverting its integral gives conditional quantiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compdensity::{open_unit, CLIP_FLOOR};
use crate::empirical::{check_open_unit, Sample};
use crate::error::{LpError, Result};
use crate::lp::{lp_comoments, select_significant, LPComomentMatrix, SelectionRule};
use crate::scores::ScoreBasis;

/// Smallest pre-normalization integral accepted for a clipped slice.
pub const MIN_SLICE_MASS: f64 = 1e-3;

/// Minimum paired sample size for a copula fit.
pub const MIN_COPULA_N: usize = 20;

#[derive(Debug, Clone)]
pub struct CopulaModel {
    bx: ScoreBasis,
    by: ScoreBasis,
    lpm: LPComomentMatrix,
}

/// Builds both score bases, the comoment matrix and its selection.
pub fn fit_copula(x: &[f64], y: &[f64], m: usize, rule: SelectionRule) -> Result<CopulaModel> {
    if x.len() != y.len() {
        return Err(LpError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < MIN_COPULA_N {
        return Err(LpError::InsufficientData {
            needed: MIN_COPULA_N,
            got: x.len(),
        });
    }
    let bx = ScoreBasis::new(&Sample::new(x)?, m)?;
    let by = ScoreBasis::new(&Sample::new(y)?, m)?;
    let order = bx.max_order().min(by.max_order());
    let lpm = lp_comoments(&bx, &by, order, rule)?;
    Ok(CopulaModel { bx, by, lpm })
}

impl CopulaModel {
    /// Assembles a model from existing parts.
    pub fn from_parts(bx: ScoreBasis, by: ScoreBasis, lpm: LPComomentMatrix) -> Result<Self> {
        if lpm.rows() > bx.max_order() || lpm.cols() > by.max_order() {
            return Err(LpError::OrderOutOfRange {
                order: lpm.rows().max(lpm.cols()),
                max: bx.max_order().min(by.max_order()),
            });
        }
        Ok(Self { bx, by, lpm })
    }

    pub fn x_basis(&self) -> &ScoreBasis {
        &self.bx
    }

    pub fn y_basis(&self) -> &ScoreBasis {
        &self.by
    }

    pub fn comoments(&self) -> &LPComomentMatrix {
        &self.lpm
    }

    /// Model of the swapped pair (Y, X).
    pub fn swapped(&self) -> Self {
        Self {
            bx: self.by.clone(),
            by: self.bx.clone(),
            lpm: self.lpm.transposed(),
        }
    }

    /// Raw series value at `(u, v)`; may be negative.
    pub fn eval_copula(&self, u: f64, v: f64) -> Result<f64> {
        check_open_unit("u", u)?;
        check_open_unit("v", v)?;
        let su = self.bx.score_quantiles_at(u, self.lpm.rows());
        let sv = self.by.score_quantiles_at(v, self.lpm.cols());
        // summing in value order makes the swapped model agree bit for bit
        let mut terms: Vec<f64> = self
            .lpm
            .selected_cells()
            .iter()
            .map(|&(j, k, c)| c * (su[j - 1] * sv[k - 1]))
            .collect();
        terms.sort_by(f64::total_cmp);
        Ok(1.0 + terms.iter().sum::<f64>())
    }

    /// Exact integral of the raw series over the unit square, summing over
    /// the atom cells of both margins.
    pub fn integrate_copula(&self) -> f64 {
        let (sx, sy) = (self.bx.sample(), self.by.sample());
        let cells = self.lpm.selected_cells();
        let (tx, ty) = (self.bx.table(), self.by.table());
        let mut total = 0.0;
        for (i, &px) in sx.masses().iter().enumerate() {
            for (l, &py) in sy.masses().iter().enumerate() {
                let c: f64 = cells
                    .iter()
                    .map(|&(j, k, v)| v * tx[j - 1][i] * ty[k - 1][l])
                    .sum();
                total += px * py * (1.0 + c);
            }
        }
        total
    }

    /// `∫ E[Y | X = Q(u; X)] du`, summed exactly over the atom cells of `X`
    /// (the slice only depends on `u` through the cell it falls in).
    pub fn integrated_conditional_mean(&self) -> Result<f64> {
        let sx = self.bx.sample();
        let mut total = 0.0;
        for (&u, &p) in sx.fmid_at_atoms().iter().zip(sx.masses()) {
            total += p * self.slice(u)?.mean();
        }
        Ok(total)
    }

    /// Conditional comparison density of `Y` at `X = Q(u; X)`.
    pub fn slice(&self, u: f64) -> Result<ConditionalSlice<'_>> {
        check_open_unit("u", u)?;
        let su = self.bx.score_quantiles_at(u, self.lpm.rows());
        let mut weights = vec![0.0; self.lpm.cols()];
        for (j, k, c) in self.lpm.selected_cells() {
            weights[k - 1] += c * su[j - 1];
        }
        let sy = self.by.sample();
        let ty = self.by.table();
        let raw: Vec<f64> = (0..sy.r())
            .map(|l| {
                1.0 + weights
                    .iter()
                    .enumerate()
                    .map(|(k, w)| w * ty[k][l])
                    .sum::<f64>()
            })
            .collect();
        let clipped: Vec<f64> = raw.iter().map(|d| d.max(CLIP_FLOOR)).collect();
        let mass: f64 = clipped.iter().zip(sy.masses()).map(|(d, p)| d * p).sum();
        if !(mass >= MIN_SLICE_MASS) {
            return Err(LpError::DegenerateSlice(mass));
        }
        let density: Vec<f64> = clipped.iter().map(|d| d / mass).collect();
        let mut cumulative = Vec::with_capacity(density.len());
        let mut acc = 0.0;
        for (d, p) in density.iter().zip(sy.masses()) {
            acc += d * p;
            cumulative.push(acc);
        }
        Ok(ConditionalSlice {
            u,
            weights,
            raw,
            density,
            cumulative,
            y: sy,
        })
    }

    /// Normalized conditional density at `(u, v)`.
    pub fn conditional_density(&self, u: f64, v: f64) -> Result<f64> {
        check_open_unit("v", v)?;
        Ok(self.slice(u)?.density_at(v))
    }

    /// `E[Y | X = Q(u; X)] = ∫ Q(v; Y) d(v | u) dv`.
    pub fn conditional_mean(&self, u: f64) -> Result<f64> {
        Ok(self.slice(u)?.mean())
    }

    /// Conditional quantile of `Y` at level `p`, mapped through the
    /// mid-quantile of `Y`.
    pub fn conditional_quantile(&self, u: f64, p: f64) -> Result<f64> {
        check_open_unit("p", p)?;
        let s = self.slice(u)?;
        Ok(self.by.sample().mid_quantile_unchecked(s.inverse_cdf(p)))
    }

    /// Accept-reject draws from the conditional distribution of `Y` at `u`.
    pub fn simulate_conditional(&self, u: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
        let s = self.slice(u)?;
        let bound = s.max_density();
        let y = self.by.sample();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let v = open_unit(&mut rng);
            let accept: f64 = rng.random();
            if accept * bound < s.density_at(v) {
                out.push(y.mid_quantile_unchecked(v));
            }
        }
        Ok(out)
    }
}

/// Conditional comparison density of `Y` for one conditioning level `u`.
///
/// Piecewise constant in `v` over the probability intervals of the atoms of
/// `Y`; clipped at `1e-6` and renormalized to integrate to one.
#[derive(Debug, Clone)]
pub struct ConditionalSlice<'a> {
    u: f64,
    weights: Vec<f64>,
    raw: Vec<f64>,
    density: Vec<f64>,
    cumulative: Vec<f64>,
    y: &'a Sample,
}

impl ConditionalSlice<'_> {
    pub fn u(&self) -> f64 {
        self.u
    }

    /// `c_k(u) = sum_j LP(j, k) S_j(u; X)` over selected cells.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Unclipped series at each atom of `Y`.
    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    /// Normalized density at each atom of `Y`.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn density_at(&self, v: f64) -> f64 {
        self.density[self.y.atom_for_level(v)]
    }

    pub fn max_density(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    /// Exact integral of the normalized density.
    pub fn integral(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    pub fn mean(&self) -> f64 {
        self.y
            .values()
            .iter()
            .zip(self.y.masses())
            .zip(&self.density)
            .map(|((y, p), d)| y * p * d)
            .sum()
    }

    /// Conditional CDF in `v`: piecewise linear through the atom intervals.
    pub fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let l = self.y.atom_for_level(v);
        let start = if l == 0 {
            0.0
        } else {
            self.y.cdf_at_atoms()[l - 1]
        };
        let below = if l == 0 { 0.0 } else { self.cumulative[l - 1] };
        below + (v - start) * self.density[l]
    }

    /// Level `v` at which the conditional CDF reaches `p`, by exact inversion
    /// of the linear pieces.
    pub fn inverse_cdf(&self, p: f64) -> f64 {
        let total = self.integral();
        let target = p * total;
        let l = self
            .cumulative
            .partition_point(|&c| c < target)
            .min(self.density.len() - 1);
        let start = if l == 0 {
            0.0
        } else {
            self.y.cdf_at_atoms()[l - 1]
        };
        let below = if l == 0 { 0.0 } else { self.cumulative[l - 1] };
        let v = start + (target - below) / self.density[l];
        v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    }

    /// Number of local maxima of the density across the atoms of `Y`,
    /// counting runs of equal values once and including the end points.
    pub fn local_maxima(&self) -> usize {
        count_local_maxima(&self.density)
    }
}

pub(crate) fn count_local_maxima(values: &[f64]) -> usize {
    let mut runs: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if runs.last() != Some(&v) {
            runs.push(v);
        }
    }
    if runs.len() < 2 {
        return runs.len();
    }
    (0..runs.len())
        .filter(|&i| {
            let left = i == 0 || runs[i] > runs[i - 1];
            let right = i + 1 == runs.len() || runs[i] > runs[i + 1];
            left && right
        })
        .count()
}

/// Linear series regression `E[Y | X] ~ mean(Y) + sum C_j T_j(X; X)`.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesRegression {
    pub intercept: f64,
    /// `C_j = E[Y T_j(X; X)]`, j = 1..m.
    pub coefficients: Vec<f64>,
    pub selected: Vec<bool>,
    #[serde(skip)]
    basis: Option<ScoreBasis>,
}

impl SeriesRegression {
    /// Fitted conditional mean at `x` (step extension of the scores).
    pub fn predict(&self, x: f64) -> f64 {
        let b = self
            .basis
            .as_ref()
            .expect("fitted regression keeps its basis");
        let i = b.sample().atom_at_or_below(x).unwrap_or(0);
        self.predict_atom(b, i)
    }

    fn predict_atom(&self, b: &ScoreBasis, i: usize) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(&self.selected)
                .enumerate()
                .filter(|(_, (_, &s))| s)
                .map(|(j, (c, _))| c * b.table()[j][i])
                .sum::<f64>()
    }

    /// Fitted values at the original observations of `X`.
    pub fn fitted(&self) -> Vec<f64> {
        let b = self
            .basis
            .as_ref()
            .expect("fitted regression keeps its basis");
        b.sample()
            .obs_atoms()
            .iter()
            .map(|&i| self.predict_atom(b, i))
            .collect()
    }
}

/// Coefficients `C_j = (1/n) sum y_t T_j(x_t)`, selected on `C_j / sd(Y)`.
pub fn series_regression(
    bx: &ScoreBasis,
    y: &[f64],
    m: usize,
    rule: SelectionRule,
) -> Result<SeriesRegression> {
    let x = bx.sample();
    if x.n() != y.len() {
        return Err(LpError::LengthMismatch {
            left: x.n(),
            right: y.len(),
        });
    }
    if m > bx.max_order() {
        return Err(LpError::OrderOutOfRange {
            order: m,
            max: bx.max_order(),
        });
    }
    let sy = Sample::new(y)?;
    let nf = y.len() as f64;
    let atoms = x.obs_atoms();
    let coefficients: Vec<f64> = bx.table()[..m]
        .iter()
        .map(|t| atoms.iter().zip(y).map(|(&a, yv)| yv * t[a]).sum::<f64>() / nf)
        .collect();
    let selected = if sy.sd() > 0.0 {
        let scaled: Vec<f64> = coefficients.iter().map(|c| c / sy.sd()).collect();
        select_significant(&scaled, y.len(), rule)
    } else {
        vec![false; m]
    };
    Ok(SeriesRegression {
        intercept: sy.mean(),
        coefficients,
        selected,
        basis: Some(bx.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_maxima_counting() {
        assert_eq!(count_local_maxima(&[1.0, 2.0, 1.0]), 1);
        assert_eq!(count_local_maxima(&[3.0, 2.0, 1.0, 2.0]), 2);
        assert_eq!(count_local_maxima(&[1.0, 1.0, 2.0, 2.0, 1.0, 3.0, 3.0]), 2);
        assert_eq!(count_local_maxima(&[0.5, 0.5, 0.5]), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 3.0]), 1);
    }

    fn sample_pair(n: usize) -> (Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..n).map(|i| ((i * 37) % n) as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| v + ((i * 11) % 7) as f64 * 3.0)
            .collect();
        (x, y)
    }

    #[test]
    fn empty_selection_is_independence() {
        let (x, y) = sample_pair(60);
        let mut m = fit_copula(&x, &y, 3, SelectionRule::Bic).unwrap();
        let mask = vec![vec![false; 3]; 3];
        m.lpm = m.lpm.clone().with_mask(mask);
        let sy = Sample::new(&y).unwrap();
        assert_eq!(m.eval_copula(0.3, 0.8).unwrap(), 1.0);
        assert!((m.conditional_mean(0.2).unwrap() - sy.mean()).abs() < 1e-12);
        for &p in &[0.1, 0.5, 0.9] {
            let q = m.conditional_quantile(0.7, p).unwrap();
            assert!((q - sy.mid_quantile(p).unwrap()).abs() < 1e-9);
        }
        assert!((m.conditional_density(0.4, 0.4).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_or_mismatched_input() {
        let (x, y) = sample_pair(30);
        assert!(matches!(
            fit_copula(&x[..10], &y[..10], 2, SelectionRule::Bic),
            Err(LpError::InsufficientData { .. })
        ));
        assert!(matches!(
            fit_copula(&x, &y[..29], 2, SelectionRule::Bic),
            Err(LpError::LengthMismatch { .. })
        ));
        let m = fit_copula(&x, &y, 2, SelectionRule::Bic).unwrap();
        assert!(m.eval_copula(0.0, 0.5).is_err());
        assert!(m.conditional_quantile(0.5, 1.0).is_err());
    }

    #[test]
    fn identity_pair_concentrates_on_diagonal() {
        let x: Vec<f64> = (0..200).map(|i| ((i * 71) % 200) as f64).collect();
        let m = fit_copula(&x, &x, 4, SelectionRule::Bic).unwrap();
        for &u in &[0.1, 0.3] {
            let on = m.eval_copula(u, u).unwrap();
            let off = m.eval_copula(u, 1.0 - u).unwrap();
            assert!(on > off, "u={u} {on} {off}");
        }
    }

    #[test]
    fn regression_with_constant_response() {
        let (x, _) = sample_pair(40);
        let b = ScoreBasis::new(&Sample::new(&x).unwrap(), 4).unwrap();
        let r = series_regression(&b, &[2.5; 40], 4, SelectionRule::Bic).unwrap();
        assert!(r.coefficients.iter().all(|c| c.abs() < 1e-12));
        assert!(r.selected.iter().all(|s| !s));
        assert!(r.fitted().iter().all(|&f| (f - 2.5).abs() < 1e-12));
        assert!(series_regression(&b, &[1.0; 39], 4, SelectionRule::Bic).is_err());
    }

    #[test]
    fn regression_recovers_first_score() {
        let (x, _) = sample_pair(50);
        let b = ScoreBasis::new(&Sample::new(&x).unwrap(), 4).unwrap();
        let y = b.obs_scores(1).unwrap();
        let r = series_regression(&b, &y, 4, SelectionRule::Bic).unwrap();
        assert!((r.coefficients[0] - 1.0).abs() < 1e-10);
        for c in &r.coefficients[1..] {
            assert!(c.abs() < 1e-10);
        }
        for (f, yv) in r.fitted().iter().zip(&y) {
            assert!((f - yv).abs() < 1e-10);
        }
    }
}
