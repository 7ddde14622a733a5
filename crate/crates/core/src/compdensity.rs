//! Comparison density estimation against a reference distribution `G`.
//!
//! The comparison density `d(u) = f(Q_G(u)) / g(Q_G(u))` is estimated by an
//! orthonormal shifted-Legendre series, either directly (L2 coefficients
//! `C_j = E[Leg_j(G(X))]`) or through the exponential model
//! `log d(u) = theta_0 + sum theta_j Leg_j(u)` whose parameters match the
//! selected L2 moments. Reweighting `g` by the estimate gives the skew-G
//! density, which can also be sampled by accept-reject.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::empirical::{check_open_unit, Sample};
use crate::error::{LpError, Result};
use crate::lp::{select_significant, SelectionRule};
use crate::quadrature::GaussLegendre;
use crate::scores::{legendre_all, legendre_unchecked};
use crate::special::{std_normal_cdf, std_normal_pdf, std_normal_quantile};

/// Highest series order accepted by [`l2_fit`].
pub const MAX_L2_ORDER: usize = 8;
/// Most coefficients the exponential model will match.
pub const MAX_MAXENT_COEFFICIENTS: usize = 6;
/// Floor applied by the clipped L2 flavor.
pub const CLIP_FLOOR: f64 = 1e-6;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 30;
const BOUND_GRID: usize = 4096;
const BOUND_SAFETY: f64 = 1.001;
const MAX_BOUND: f64 = 1e6;

/// Reference distribution `G`.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceDistribution {
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
    Empirical(Sample),
}

impl ReferenceDistribution {
    /// Normal with the sample's mean and (population) standard deviation.
    pub fn fit_normal(s: &Sample) -> Result<Self> {
        if s.sd() <= 0.0 {
            return Err(LpError::DegenerateScale("standard deviation"));
        }
        Ok(Self::Normal {
            mean: s.mean(),
            sd: s.sd(),
        })
    }

    /// Exponential with rate `1 / mean`.
    pub fn fit_exponential(s: &Sample) -> Result<Self> {
        if s.mean() <= 0.0 {
            return Err(LpError::DegenerateScale("mean"));
        }
        Ok(Self::Exponential {
            rate: 1.0 / s.mean(),
        })
    }

    /// Uniform on the sample range.
    pub fn fit_uniform(s: &Sample) -> Result<Self> {
        let v = s.values();
        if v.len() < 2 {
            return Err(LpError::DegenerateSample);
        }
        Ok(Self::Uniform {
            low: v[0],
            high: v[v.len() - 1],
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Normal { .. } => "normal",
            Self::Exponential { .. } => "exponential",
            Self::Uniform { .. } => "uniform",
            Self::Empirical(_) => "empirical",
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            Self::Empirical(s) => s.cdf(x),
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Self::Normal { mean, sd } => std_normal_pdf((x - mean) / sd) / sd,
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Self::Uniform { low, high } => {
                if x < *low || x > *high {
                    0.0
                } else {
                    1.0 / (high - low)
                }
            }
            Self::Empirical(_) => return Err(LpError::NoDensity),
        })
    }

    /// `Q_G(u)` for `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_open_unit("u", u)?;
        Ok(self.quantile_unchecked(u))
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        match self {
            Self::Normal { mean, sd } => mean + sd * std_normal_quantile(u),
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Uniform { low, high } => low + u * (high - low),
            Self::Empirical(s) => s.values()[s.atom_for_level(u)],
        }
    }
}

/// `D(u; G, F) = F(Q_G(u); X)`.
pub fn comparison_distribution(s: &Sample, g: &ReferenceDistribution, u: f64) -> Result<f64> {
    Ok(s.cdf(g.quantile(u)?))
}

/// P-P plot points `(G(x_j), F(x_j))` at the distinct sample values.
pub fn pp_grid(s: &Sample, g: &ReferenceDistribution) -> Vec<(f64, f64)> {
    s.values()
        .iter()
        .zip(s.cdf_at_atoms())
        .map(|(&x, &f)| (g.cdf(x), f))
        .collect()
}

/// Density flavor used by [`CompDensityModel::eval_density`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityFlavor {
    /// `1 + sum C_j Leg_j(u)`, possibly negative.
    L2,
    /// `max(l2, 1e-6)` renormalized to integrate to one.
    L2Clipped,
    /// Exponential model.
    MaxEnt,
}

impl DensityFlavor {
    pub fn name(self) -> &'static str {
        match self {
            DensityFlavor::L2 => "l2",
            DensityFlavor::L2Clipped => "l2_clipped",
            DensityFlavor::MaxEnt => "maxent",
        }
    }
}

/// Parameters of `log d(u) = theta_0 + sum theta_j Leg_j(u)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEntParams {
    pub theta0: f64,
    /// `(order, theta_order)` pairs.
    pub theta: Vec<(usize, f64)>,
    pub iterations: usize,
    /// Largest |moment residual| at convergence.
    pub residual: f64,
}

impl MaxEntParams {
    pub fn uniform() -> Self {
        Self {
            theta0: 0.0,
            theta: Vec::new(),
            iterations: 0,
            residual: 0.0,
        }
    }

    pub fn density(&self, u: f64) -> f64 {
        let m = self.theta.iter().map(|t| t.0).max().unwrap_or(0);
        let leg = legendre_all(m, u);
        let s: f64 = self.theta.iter().map(|&(j, t)| t * leg[j - 1]).sum();
        (self.theta0 + s).exp()
    }
}

/// Solves the moment equations `∫ Leg_j d = C_j` for the exponential model.
///
/// Newton's method on the convex dual `log ∫ exp(sum theta_j Leg_j) - sum
/// theta_j C_j`, with step halving until the objective decreases and a
/// steepest-descent step when the Hessian is not positive definite.
pub fn maxent_solve(targets: &[(usize, f64)]) -> Result<MaxEntParams> {
    if targets.len() > MAX_MAXENT_COEFFICIENTS {
        return Err(LpError::TooManyCoefficients {
            count: targets.len(),
            max: MAX_MAXENT_COEFFICIENTS,
        });
    }
    if targets.is_empty() {
        return Ok(MaxEntParams::uniform());
    }
    let max_order = targets.iter().map(|t| t.0).max().unwrap();
    let rule = GaussLegendre::unit();
    // basis[node][i] = Leg_{targets[i].0}(node)
    let basis: Vec<Vec<f64>> = rule
        .nodes()
        .iter()
        .map(|&u| {
            let all = legendre_all(max_order, u);
            targets.iter().map(|&(j, _)| all[j - 1]).collect()
        })
        .collect();
    let target: Vec<f64> = targets.iter().map(|t| t.1).collect();
    let fit = maxent_newton(&basis, rule.weights(), &target)?;
    Ok(finish(
        targets,
        fit.theta,
        fit.log_z,
        fit.iterations,
        fit.residual,
    ))
}

/// Exponential-family fit on a weighted point set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMaxEnt {
    pub theta: Vec<f64>,
    /// `log sum_i w_i exp(theta . b_i)`
    pub log_z: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl DiscreteMaxEnt {
    /// `exp(theta . b - log_z)` at a point with basis values `b`.
    pub fn density(&self, b: &[f64]) -> f64 {
        (b.iter().zip(&self.theta).map(|(b, t)| b * t).sum::<f64>() - self.log_z).exp()
    }
}

/// Solves `sum_i w_i b_i exp(theta . b_i) / Z = target` for `theta` by
/// damped Newton steps on the convex dual. `basis[i]` holds the basis
/// values at point `i`; the weights sum to one.
pub fn maxent_newton(
    basis: &[Vec<f64>],
    weights: &[f64],
    target: &[f64],
) -> Result<DiscreteMaxEnt> {
    let k = target.len();
    if k > MAX_MAXENT_COEFFICIENTS {
        return Err(LpError::TooManyCoefficients {
            count: k,
            max: MAX_MAXENT_COEFFICIENTS,
        });
    }

    // log partition, moments, covariance at theta
    let eval = |theta: &[f64]| -> (f64, Vec<f64>, Vec<Vec<f64>>) {
        let expo: Vec<f64> = basis
            .iter()
            .map(|b| b.iter().zip(theta).map(|(b, t)| b * t).sum::<f64>())
            .collect();
        let shift = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = expo.iter().map(|x| (x - shift).exp()).collect();
        let z: f64 = e.iter().zip(weights).map(|(e, w)| e * w).sum();
        let mut mean = vec![0.0; k];
        let mut second = vec![vec![0.0; k]; k];
        for ((b, e), w) in basis.iter().zip(&e).zip(weights) {
            let pw = e * w / z;
            for i in 0..k {
                mean[i] += pw * b[i];
                for j in 0..=i {
                    second[i][j] += pw * b[i] * b[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..=i {
                let c = second[i][j] - mean[i] * mean[j];
                second[i][j] = c;
                second[j][i] = c;
            }
        }
        (z.ln() + shift, mean, second)
    };
    let objective = |log_z: f64, theta: &[f64]| -> f64 {
        log_z - theta.iter().zip(target).map(|(t, c)| t * c).sum::<f64>()
    };

    let mut theta = vec![0.0; k];
    let (mut log_z, mut mean, mut hess) = eval(&theta);
    let mut residual = max_abs_diff(&mean, target);
    for it in 0..NEWTON_MAX_ITER {
        if residual < NEWTON_TOL {
            return Ok(DiscreteMaxEnt {
                theta,
                log_z,
                iterations: it,
                residual,
            });
        }
        let grad: Vec<f64> = mean.iter().zip(target).map(|(m, c)| m - c).collect();
        let current = objective(log_z, &theta);
        let newton = cholesky_solve(&hess, &grad);
        let mut accepted = false;
        for direction in [newton, Some(grad.clone())].into_iter().flatten() {
            let mut step = 1.0;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<f64> = theta
                    .iter()
                    .zip(&direction)
                    .map(|(t, d)| t - step * d)
                    .collect();
                let (lz, m, h) = eval(&trial);
                let obj = objective(lz, &trial);
                // near the optimum the objective is flat to rounding, so a
                // step that shrinks the residual without raising it is kept
                let flat = obj <= current + 1e-14 * (1.0 + current.abs())
                    && max_abs_diff(&m, target) < residual;
                if obj.is_finite() && (obj < current || flat) {
                    theta = trial;
                    log_z = lz;
                    mean = m;
                    hess = h;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if accepted {
                break;
            }
        }
        residual = max_abs_diff(&mean, target);
        if !accepted {
            if residual < NEWTON_TOL {
                return Ok(DiscreteMaxEnt {
                    theta,
                    log_z,
                    iterations: it + 1,
                    residual,
                });
            }
            return Err(LpError::IllConditioned);
        }
    }
    if residual < NEWTON_TOL {
        return Ok(DiscreteMaxEnt {
            theta,
            log_z,
            iterations: NEWTON_MAX_ITER,
            residual,
        });
    }
    Err(LpError::NonConvergence {
        iterations: NEWTON_MAX_ITER,
        residual,
    })
}

fn finish(
    targets: &[(usize, f64)],
    theta: Vec<f64>,
    log_z: f64,
    iterations: usize,
    residual: f64,
) -> MaxEntParams {
    MaxEntParams {
        theta0: -log_z,
        theta: targets.iter().map(|t| t.0).zip(theta).collect(),
        iterations,
        residual,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Solves `H x = g` for symmetric positive definite `H`; `None` otherwise.
fn cholesky_solve(h: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = h[i][i] - s;
                if !(d > 1e-14) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (h[i][j] - s) / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (g[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    Some(x)
}

/// Comparison density estimate against `G`.
#[derive(Debug, Clone)]
pub struct CompDensityModel {
    g: ReferenceDistribution,
    coefficients: Vec<f64>,
    selected: Vec<bool>,
    n: usize,
    clip_norm: f64,
    maxent: Option<MaxEntParams>,
}

/// L2 series fit: `C_j = mean of Leg_j(G(x_t))` for j = 1..m, then selection.
pub fn l2_fit(
    s: &Sample,
    g: &ReferenceDistribution,
    m: usize,
    rule: SelectionRule,
) -> Result<CompDensityModel> {
    if m > MAX_L2_ORDER {
        return Err(LpError::OrderTooHigh {
            order: m,
            max: MAX_L2_ORDER,
        });
    }
    let mut c = vec![0.0; m];
    for (&x, &p) in s.values().iter().zip(s.masses()) {
        let leg = legendre_all(m, g.cdf(x));
        for (cj, l) in c.iter_mut().zip(leg) {
            *cj += p * l;
        }
    }
    let selected = select_significant(&c, s.n(), rule);
    Ok(CompDensityModel::from_coefficients(
        g.clone(),
        c,
        selected,
        s.n(),
    ))
}

/// Fits the L2 series and then the exponential model on its selected coefficients.
pub fn maxent_fit(
    s: &Sample,
    g: &ReferenceDistribution,
    m: usize,
    rule: SelectionRule,
) -> Result<CompDensityModel> {
    l2_fit(s, g, m, rule)?.with_maxent()
}

impl CompDensityModel {
    pub fn from_coefficients(
        g: ReferenceDistribution,
        coefficients: Vec<f64>,
        selected: Vec<bool>,
        n: usize,
    ) -> Self {
        assert_eq!(coefficients.len(), selected.len(), "mask length");
        let mut out = Self {
            g,
            coefficients,
            selected,
            n,
            clip_norm: 1.0,
            maxent: None,
        };
        out.clip_norm = GaussLegendre::unit().integrate(|u| out.l2(u).max(CLIP_FLOOR));
        out
    }

    /// Adds the exponential model matching the selected coefficients.
    pub fn with_maxent(mut self) -> Result<Self> {
        let targets = self.selected_coefficients();
        self.maxent = Some(maxent_solve(&targets)?);
        Ok(self)
    }

    pub fn reference(&self) -> &ReferenceDistribution {
        &self.g
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn selected(&self) -> &[bool] {
        &self.selected
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn maxent(&self) -> Option<&MaxEntParams> {
        self.maxent.as_ref()
    }

    /// `(order, C_order)` for every selected coefficient.
    pub fn selected_coefficients(&self) -> Vec<(usize, f64)> {
        self.coefficients
            .iter()
            .zip(&self.selected)
            .enumerate()
            .filter(|(_, (_, &s))| s)
            .map(|(j, (&c, _))| (j + 1, c))
            .collect()
    }

    fn l2(&self, u: f64) -> f64 {
        let leg = legendre_all(self.order(), u);
        1.0 + self
            .coefficients
            .iter()
            .zip(&self.selected)
            .zip(leg)
            .filter(|((_, &s), _)| s)
            .map(|((c, _), l)| c * l)
            .sum::<f64>()
    }

    pub fn eval_density(&self, u: f64, flavor: DensityFlavor) -> Result<f64> {
        check_open_unit("u", u)?;
        self.density_at(u, flavor)
    }

    fn density_at(&self, u: f64, flavor: DensityFlavor) -> Result<f64> {
        Ok(match flavor {
            DensityFlavor::L2 => self.l2(u),
            DensityFlavor::L2Clipped => self.l2(u).max(CLIP_FLOOR) / self.clip_norm,
            DensityFlavor::MaxEnt => self
                .maxent
                .as_ref()
                .ok_or(LpError::FlavorNotFitted("maxent"))?
                .density(u),
        })
    }

    /// MaxEnt when fitted, otherwise the clipped L2 series.
    pub fn positive_flavor(&self) -> DensityFlavor {
        if self.maxent.is_some() {
            DensityFlavor::MaxEnt
        } else {
            DensityFlavor::L2Clipped
        }
    }

    /// `g(x) d(G(x))`.
    pub fn skew_g_density(&self, x: f64) -> Result<f64> {
        let gx = self.g.pdf(x)?;
        if gx == 0.0 {
            return Ok(0.0);
        }
        let u = self.g.cdf(x).clamp(0.0, 1.0);
        Ok(gx * self.density_at(u, self.positive_flavor())?)
    }

    /// `∫ |d_l2 - 1|^2 du = sum of selected C_j^2`.
    pub fn gof_distance(&self) -> f64 {
        self.selected_coefficients()
            .iter()
            .map(|(_, c)| c * c)
            .sum()
    }

    /// Upper bound used for accept-reject: grid maximum times a safety factor.
    pub fn density_bound(&self) -> Result<f64> {
        let flavor = self.positive_flavor();
        let mut max: f64 = 0.0;
        for i in 0..=BOUND_GRID {
            let u = i as f64 / BOUND_GRID as f64;
            max = max.max(self.density_at(u, flavor)?);
        }
        let bound = max * BOUND_SAFETY;
        if bound > MAX_BOUND || !bound.is_finite() {
            return Err(LpError::UnboundedDensity(bound));
        }
        Ok(bound)
    }

    /// Draws `count` values from the skew-G model: propose `X` from `G`,
    /// accept when `U < d(G(X)) / C`.
    pub fn simulate_skew_g(&self, count: usize, seed: u64) -> Result<Simulation> {
        let bound = self.density_bound()?;
        let flavor = self.positive_flavor();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draws = Vec::with_capacity(count);
        let mut proposals = 0usize;
        while draws.len() < count {
            proposals += 1;
            let v: f64 = open_unit(&mut rng);
            let x = self.g.quantile_unchecked(v);
            let u = self.g.cdf(x).clamp(0.0, 1.0);
            let accept: f64 = rng.random();
            if accept * bound < self.density_at(u, flavor)? {
                draws.push(x);
            }
        }
        Ok(Simulation {
            draws,
            proposals,
            bound,
        })
    }
}

/// Accept-reject output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation {
    pub draws: Vec<f64>,
    pub proposals: usize,
    pub bound: f64,
}

impl Simulation {
    pub fn acceptance_rate(&self) -> f64 {
        self.draws.len() as f64 / self.proposals as f64
    }
}

/// Uniform draw strictly inside (0, 1).
pub(crate) fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Integral of `|d_l2 - 1|^2` by quadrature, the Parseval counterpart of
/// [`CompDensityModel::gof_distance`].
pub fn gof_by_quadrature(model: &CompDensityModel) -> f64 {
    GaussLegendre::unit().integrate(|u| {
        let d = model.l2(u) - 1.0;
        d * d
    })
}

/// Moments `∫ Leg_j d du` of a fitted flavor, for j = 1..m.
pub fn density_moments(
    model: &CompDensityModel,
    flavor: DensityFlavor,
    m: usize,
) -> Result<Vec<f64>> {
    let rule = GaussLegendre::unit();
    let mut out = vec![0.0; m];
    for (&u, &w) in rule.nodes().iter().zip(rule.weights()) {
        let d = model.density_at(u, flavor)?;
        for (j, o) in out.iter_mut().enumerate() {
            *o += w * d * legendre_unchecked(j + 1, u);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform01() -> ReferenceDistribution {
        ReferenceDistribution::Uniform {
            low: 0.0,
            high: 1.0,
        }
    }

    #[test]
    fn reference_quantile_inverts_cdf() {
        let gs = [
            ReferenceDistribution::Normal { mean: 2.0, sd: 3.0 },
            ReferenceDistribution::Exponential { rate: 0.5 },
            ReferenceDistribution::Uniform {
                low: -1.0,
                high: 4.0,
            },
        ];
        for g in &gs {
            for &u in &[0.001, 0.1, 0.5, 0.9, 0.999] {
                let x = g.quantile(u).unwrap();
                assert!((g.cdf(x) - u).abs() < 1e-9, "{} u={u}", g.name());
            }
        }
        assert!(gs[0].quantile(0.0).is_err());
        let e = ReferenceDistribution::Empirical(Sample::new(&[1.0, 2.0]).unwrap());
        assert_eq!(e.pdf(1.0), Err(LpError::NoDensity));
    }

    #[test]
    fn self_comparison_tracks_diagonal() {
        let v: Vec<f64> = (0..40).map(|i| ((i * 17) % 40) as f64 + 0.5).collect();
        let s = Sample::new(&v).unwrap();
        let g = ReferenceDistribution::Empirical(s.clone());
        for i in 1..1000 {
            let u = i as f64 / 1000.0;
            let d = comparison_distribution(&s, &g, u).unwrap();
            assert!((d - u).abs() <= 1.0 / 40.0 + 1e-12);
        }
        let tiny = comparison_distribution(&s, &uniform01(), 1e-12).unwrap();
        assert_eq!(tiny, 0.0);
    }

    #[test]
    fn midpoints_against_uniform_have_zero_first_coefficient() {
        let n = 200;
        let v: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let m = l2_fit(
            &Sample::new(&v).unwrap(),
            &uniform01(),
            4,
            SelectionRule::Bic,
        )
        .unwrap();
        assert!(m.coefficients()[0].abs() < 1e-12);
        assert!(l2_fit(
            &Sample::new(&v).unwrap(),
            &uniform01(),
            9,
            SelectionRule::Bic
        )
        .is_err());
    }

    #[test]
    fn flavors_with_empty_selection() {
        let m =
            CompDensityModel::from_coefficients(uniform01(), vec![0.3, 0.1], vec![false; 2], 100)
                .with_maxent()
                .unwrap();
        for &u in &[0.01, 0.5, 0.99] {
            for f in [
                DensityFlavor::L2,
                DensityFlavor::L2Clipped,
                DensityFlavor::MaxEnt,
            ] {
                assert!((m.eval_density(u, f).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(m.gof_distance(), 0.0);
    }

    #[test]
    fn l2_first_order_arithmetic() {
        let m = CompDensityModel::from_coefficients(uniform01(), vec![0.5], vec![true], 100);
        assert!((m.eval_density(0.5, DensityFlavor::L2).unwrap() - 1.0).abs() < 1e-15);
        let top = m.eval_density(1.0 - 1e-12, DensityFlavor::L2).unwrap();
        assert!((top - (1.0 + 0.5 * 12f64.sqrt() * 0.5)).abs() < 1e-9);
        assert_eq!(
            m.eval_density(0.5, DensityFlavor::MaxEnt),
            Err(LpError::FlavorNotFitted("maxent"))
        );
        let single = CompDensityModel::from_coefficients(uniform01(), vec![0.3], vec![true], 100);
        assert!((single.gof_distance() - 0.09).abs() < 1e-15);
    }

    #[test]
    fn clipped_flavor_integrates_to_one() {
        let m =
            CompDensityModel::from_coefficients(uniform01(), vec![0.9, -0.4], vec![true; 2], 100);
        // the raw series goes negative near u = 0
        assert!(m.eval_density(0.001, DensityFlavor::L2).unwrap() < 0.0);
        let total = GaussLegendre::unit()
            .integrate(|u| m.eval_density(u, DensityFlavor::L2Clipped).unwrap());
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn maxent_zero_targets() {
        let p = maxent_solve(&[(1, 0.0), (2, 0.0)]).unwrap();
        assert!(p.theta0.abs() < 1e-12);
        assert!(p.theta.iter().all(|t| t.1.abs() < 1e-12));
        assert!(maxent_solve(&[(1, 0.0); 7]).is_err());
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, intervals: usize) -> f64 {
        let h = 1.0 / intervals as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..intervals {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn maxent_single_coefficient_matches_bisection() {
        // independent route: bisection on theta_1 with Simpson moments
        let leg1 = |u: f64| 12f64.sqrt() * (u - 0.5);
        let moment = |t: f64| {
            let z = simpson(|u| (t * leg1(u)).exp(), 2000);
            simpson(|u| leg1(u) * (t * leg1(u)).exp(), 2000) / z
        };
        let (mut lo, mut hi) = (0.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if moment(mid) < 0.2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = maxent_solve(&[(1, 0.2)]).unwrap();
        assert!((p.theta[0].1 - 0.5 * (lo + hi)).abs() < 1e-7);
        let m = CompDensityModel::from_coefficients(uniform01(), vec![0.2], vec![true], 100)
            .with_maxent()
            .unwrap();
        let back = density_moments(&m, DensityFlavor::MaxEnt, 1).unwrap();
        assert!((back[0] - 0.2).abs() < 1e-6);
    }

    #[test]
    fn infeasible_targets_fail() {
        // |C_1| cannot exceed sqrt(3) for any density on [0, 1]
        let r = maxent_solve(&[(1, 2.0)]);
        assert!(r.is_err(), "{r:?}");
    }

    #[test]
    fn skew_g_with_flat_density_is_g() {
        let g = ReferenceDistribution::Normal { mean: 1.0, sd: 2.0 };
        let m = CompDensityModel::from_coefficients(g.clone(), vec![0.0; 3], vec![false; 3], 50);
        for &x in &[-3.0, 0.0, 1.0, 4.5] {
            assert!((m.skew_g_density(x).unwrap() - g.pdf(x).unwrap()).abs() < 1e-15);
        }
        let sim = m.simulate_skew_g(500, 9).unwrap();
        assert_eq!(sim.draws.len(), 500);
        assert!(sim.acceptance_rate() > 0.99);
        let again = m.simulate_skew_g(500, 9).unwrap();
        assert_eq!(sim, again);
    }

    #[test]
    fn unbounded_density_is_rejected() {
        let m = CompDensityModel::from_coefficients(uniform01(), vec![0.0; 1], vec![false], 50);
        let mut huge = m.clone().with_maxent().unwrap();
        huge.maxent = Some(MaxEntParams {
            theta0: 0.0,
            theta: vec![(1, 10.0)],
            iterations: 0,
            residual: 0.0,
        });
        assert!(matches!(
            huge.simulate_skew_g(10, 1),
            Err(LpError::UnboundedDensity(_))
        ));
    }
}
