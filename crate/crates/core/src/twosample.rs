//! Two-sample statistics as special cases of the LP machinery.
//!
//! A binary `X` marks group membership and `Y` is the response. Group
//! summaries pool by the combined mean/variance formulas; Student's t and the
//! Pearson correlation are two views of the same mean difference; Wilcoxon's
//! statistic is the comoment `LP(1, 1; X, Y)` and its higher-order siblings
//! `LP(1, k)` are the coefficients of the comparison density of the group
//! `X = 1` against the pooled sample.
//!
//! Group encoding: the smaller of the two distinct labels is group 0 and the
//! larger is group 1, so positive `w` means group 1 sits higher.

use serde::Serialize;

use crate::compdensity::{maxent_newton, DiscreteMaxEnt, CLIP_FLOOR};
use crate::empirical::Sample;
use crate::error::{LpError, Result};
use crate::lp::{lp_comoments_rect, select_significant, SelectionRule};
use crate::scores::ScoreBasis;

/// Size, mean and population variance of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupSummary {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
}

impl GroupSummary {
    pub fn new(n: usize, mean: f64, var: f64) -> Result<Self> {
        if n == 0 {
            return Err(LpError::EmptyInput);
        }
        if !(var >= 0.0) || !mean.is_finite() || !var.is_finite() {
            return Err(LpError::DomainError {
                what: "variance",
                value: var,
                domain: "[0, inf)",
            });
        }
        Ok(Self { n, mean, var })
    }

    /// Summary of raw values (two-pass variance).
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(LpError::EmptyInput);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LpError::NonFiniteValue(i));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Ok(Self {
            n: values.len(),
            mean,
            var,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CombineResult {
    pub n: usize,
    pub tau1: f64,
    pub tau2: f64,
    pub mean: f64,
    pub var: f64,
    pub vpool: f64,
}

struct Pooled {
    tau1: f64,
    tau2: f64,
    mean: f64,
    var: f64,
    vpool: f64,
}

fn pool(n1: f64, m1: f64, v1: f64, n2: f64, m2: f64, v2: f64) -> Pooled {
    let n = n1 + n2;
    let (tau1, tau2) = (n1 / n, n2 / n);
    let vpool = tau1 * v1 + tau2 * v2;
    Pooled {
        tau1,
        tau2,
        mean: tau1 * m1 + tau2 * m2,
        var: vpool + tau1 * tau2 * (m2 - m1).powi(2),
        vpool,
    }
}

/// Mean and variance of the concatenation of two groups from their summaries.
pub fn combine(g1: &GroupSummary, g2: &GroupSummary) -> CombineResult {
    let p = pool(g1.n as f64, g1.mean, g1.var, g2.n as f64, g2.mean, g2.var);
    CombineResult {
        n: g1.n + g2.n,
        tau1: p.tau1,
        tau2: p.tau2,
        mean: p.mean,
        var: p.var,
        vpool: p.vpool,
    }
}

/// Folds one more observation into a running summary.
pub fn recursive_update(state: &GroupSummary, y: f64) -> GroupSummary {
    let n = state.n + 1;
    let nf = n as f64;
    let d = y - state.mean;
    GroupSummary {
        n,
        mean: state.mean + d / nf,
        var: (nf - 1.0) / nf * state.var + (nf - 1.0) / (nf * nf) * d * d,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudentT {
    /// `(m2 - m1) sqrt(tau1 tau2 / vpool)`
    pub t_core: f64,
    /// `sqrt(n - 2) t_core`
    pub t_scaled: f64,
    pub df: usize,
}

pub fn student_t(g1: &GroupSummary, g2: &GroupSummary) -> Result<StudentT> {
    let c = combine(g1, g2);
    if !(c.vpool > 0.0) {
        return Err(LpError::DegenerateScale("pooled variance"));
    }
    let t_core = (g2.mean - g1.mean) * (c.tau1 * c.tau2 / c.vpool).sqrt();
    let df = c.n.saturating_sub(2);
    Ok(StudentT {
        t_core,
        t_scaled: (df as f64).sqrt() * t_core,
        df,
    })
}

/// Binary group indicator with the original labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupCoding {
    /// `[label of group 0, label of group 1]`
    pub labels: [f64; 2],
    pub indicator: Vec<f64>,
}

impl GroupCoding {
    pub fn tau(&self) -> f64 {
        self.indicator.iter().sum::<f64>() / self.indicator.len() as f64
    }
}

pub fn encode_groups(x: &[f64]) -> Result<GroupCoding> {
    if x.is_empty() {
        return Err(LpError::EmptyInput);
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(LpError::NonFiniteValue(i));
    }
    let mut labels: Vec<f64> = x.to_vec();
    labels.sort_by(f64::total_cmp);
    labels.dedup();
    match labels.len() {
        1 => Err(LpError::SingleGroup),
        2 => Ok(GroupCoding {
            labels: [labels[0], labels[1]],
            indicator: x
                .iter()
                .map(|&v| if v == labels[1] { 1.0 } else { 0.0 })
                .collect(),
        }),
        k => Err(LpError::NotBinary(k)),
    }
}

fn split_groups(x: &[f64], y: &[f64]) -> Result<(GroupCoding, [GroupSummary; 2])> {
    if x.len() != y.len() {
        return Err(LpError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let coding = encode_groups(x)?;
    let pick = |g: f64| -> Vec<f64> {
        coding
            .indicator
            .iter()
            .zip(y)
            .filter(|(&i, _)| i == g)
            .map(|(_, &v)| v)
            .collect()
    };
    let g0 = GroupSummary::from_values(&pick(0.0))?;
    let g1 = GroupSummary::from_values(&pick(1.0))?;
    Ok((coding, [g0, g1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationStats {
    /// Pearson correlation of the 0/1 indicator with `Y`.
    pub r: f64,
    /// `(M1 - M0) sqrt(tau (1 - tau) / V)`
    pub r_odds: f64,
    pub r2: f64,
    /// `r / sqrt(1 - r^2)`
    pub t: f64,
    /// `vpool = V (1 - r^2)` within 1e-12 relative.
    pub vpool_identity_ok: bool,
}

pub fn correlation_stats(x: &[f64], y: &[f64]) -> Result<CorrelationStats> {
    let (coding, [g0, g1]) = split_groups(x, y)?;
    let c = combine(&g0, &g1);
    if !(c.var > 0.0) {
        return Err(LpError::DegenerateScale("standard deviation"));
    }
    let n = y.len() as f64;
    let tau = coding.tau();
    let sx = (tau * (1.0 - tau)).sqrt();
    let sy = c.var.sqrt();
    let r = coding
        .indicator
        .iter()
        .zip(y)
        .map(|(i, v)| (i - tau) * (v - c.mean))
        .sum::<f64>()
        / (n * sx * sy);
    let r_odds = (g1.mean - g0.mean) * (tau * (1.0 - tau) / c.var).sqrt();
    let r2 = r * r;
    if !(c.vpool > 0.0) || !(r2 < 1.0) {
        return Err(LpError::DegenerateScale("1 - r^2"));
    }
    Ok(CorrelationStats {
        r,
        r_odds,
        r2,
        t: r / (1.0 - r2).sqrt(),
        vpool_identity_ok: (c.vpool - c.var * (1.0 - r2)).abs() <= 1e-12 * c.var,
    })
}

/// Scaling of the Wilcoxon z statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum ZScaling {
    /// `sqrt(n) w`
    #[default]
    SqrtN,
    /// `sqrt(n - 1) w`, preferable for small samples.
    SqrtNMinusOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Wilcoxon {
    /// `LP(1, 1; X, Y)`
    pub w: f64,
    /// `(M1 - .5) sqrt(odds(tau) / V)` from the pooled mid-ranks.
    pub w_rank: f64,
    pub z_stat: f64,
    /// Mean of `Fmid(Y)` over group 1.
    pub m1: f64,
    /// `(1/12)(1 - sum p^3)`, the variance of `Fmid(Y)`.
    pub v: f64,
}

pub fn wilcoxon(x: &[f64], y: &[f64], scaling: ZScaling) -> Result<Wilcoxon> {
    if x.len() != y.len() {
        return Err(LpError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let coding = encode_groups(x)?;
    let sy = Sample::new(y)?;
    if sy.r() < 2 {
        return Err(LpError::DegenerateSample);
    }
    let bx = ScoreBasis::new(&Sample::new(&coding.indicator)?, 1)?;
    let by = ScoreBasis::new(&sy, 1)?;
    let w = lp_comoments_rect(&bx, &by, 1, 1, SelectionRule::None)?.entry(1, 1);

    let tau = coding.tau();
    let fmid = sy.fmid_at_atoms();
    let (sum1, n1) = coding
        .indicator
        .iter()
        .zip(sy.obs_atoms())
        .filter(|(&i, _)| i == 1.0)
        .fold((0.0, 0usize), |(s, c), (_, &a)| (s + fmid[a], c + 1));
    let m1 = sum1 / n1 as f64;
    let v = (1.0 - sy.masses().iter().map(|p| p.powi(3)).sum::<f64>()) / 12.0;
    let w_rank = (m1 - 0.5) * (tau / (1.0 - tau) / v).sqrt();
    let n = y.len() as f64;
    let z_stat = match scaling {
        ZScaling::SqrtN => n.sqrt() * w,
        ZScaling::SqrtNMinusOne => (n - 1.0).sqrt() * w,
    };
    Ok(Wilcoxon {
        w,
        w_rank,
        z_stat,
        m1,
        v,
    })
}

/// Comparison density of `Y | X = 1` against pooled `Y`, in pooled scores.
#[derive(Debug, Clone)]
pub struct TwoSampleDensity {
    basis: ScoreBasis,
    tau: f64,
    /// `C_k = E[T_k(Y; Y) | X = 1]`
    coefficients: Vec<f64>,
    /// `LP(1, k) = sqrt(odds(tau)) C_k`
    lp1k: Vec<f64>,
    selected: Vec<bool>,
    clipped: Vec<f64>,
    maxent: Option<DiscreteMaxEnt>,
    /// Per-atom values of the positive flavor: MaxEnt when it converged,
    /// otherwise the clipped series.
    positive: Vec<f64>,
}

pub fn two_sample_comp_density(
    x: &[f64],
    y: &[f64],
    m: usize,
    rule: SelectionRule,
) -> Result<TwoSampleDensity> {
    if x.len() != y.len() {
        return Err(LpError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let coding = encode_groups(x)?;
    let basis = ScoreBasis::new(&Sample::new(y)?, m)?;
    let m = basis.max_order();
    let tau = coding.tau();
    let atoms = basis.sample().obs_atoms();
    let n1 = coding.indicator.iter().filter(|&&i| i == 1.0).count() as f64;
    let coefficients: Vec<f64> = basis.table()[..m]
        .iter()
        .map(|t| {
            coding
                .indicator
                .iter()
                .zip(atoms)
                .filter(|(&i, _)| i == 1.0)
                .map(|(_, &a)| t[a])
                .sum::<f64>()
                / n1
        })
        .collect();
    let odds = (tau / (1.0 - tau)).sqrt();
    let lp1k: Vec<f64> = coefficients.iter().map(|c| odds * c).collect();
    let selected = select_significant(&lp1k, y.len(), rule);
    let mut out = TwoSampleDensity {
        basis,
        tau,
        coefficients,
        lp1k,
        selected,
        clipped: Vec::new(),
        maxent: None,
        positive: Vec::new(),
    };
    out.refit();
    Ok(out)
}

impl TwoSampleDensity {
    /// Recomputes the clipped and MaxEnt flavors from the current selection.
    fn refit(&mut self) {
        self.clipped = self.normalize();
        let orders = self.selected_orders();
        let t = self.basis.table();
        let points: Vec<Vec<f64>> = (0..self.basis.sample().r())
            .map(|l| orders.iter().map(|&k| t[k - 1][l]).collect())
            .collect();
        let target: Vec<f64> = orders.iter().map(|&k| self.coefficients[k - 1]).collect();
        self.maxent = maxent_newton(&points, self.basis.sample().masses(), &target).ok();
        self.positive = match &self.maxent {
            Some(fit) => points.iter().map(|b| fit.density(b)).collect(),
            None => self.clipped.clone(),
        };
    }

    fn normalize(&self) -> Vec<f64> {
        let s = self.basis.sample();
        let raw: Vec<f64> = (0..s.r())
            .map(|l| self.raw_at_atom(l).max(CLIP_FLOOR))
            .collect();
        let mass: f64 = raw.iter().zip(s.masses()).map(|(d, p)| d * p).sum();
        raw.iter().map(|d| d / mass).collect()
    }

    fn raw_at_atom(&self, l: usize) -> f64 {
        let t = self.basis.table();
        1.0 + self
            .coefficients
            .iter()
            .zip(&self.selected)
            .enumerate()
            .filter(|(_, (_, &s))| s)
            .map(|(k, (c, _))| c * t[k][l])
            .sum::<f64>()
    }

    pub fn basis(&self) -> &ScoreBasis {
        &self.basis
    }

    /// `Pr[X = 1]`
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// High-order Wilcoxon statistics `LP(1, k)`, k = 1..m.
    pub fn lp1k(&self) -> &[f64] {
        &self.lp1k
    }

    pub fn selected(&self) -> &[bool] {
        &self.selected
    }

    /// Selected orders, 1-based.
    pub fn selected_orders(&self) -> Vec<usize> {
        self.selected
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(k, _)| k + 1)
            .collect()
    }

    /// Raw series `1 + sum C_k S_k(v; Y)` at level `v`.
    pub fn raw_density(&self, v: f64) -> f64 {
        self.raw_at_atom(self.basis.sample().atom_for_level(v))
    }

    /// Clipped and renormalized series at level `v`.
    pub fn clipped_density(&self, v: f64) -> f64 {
        self.clipped[self.basis.sample().atom_for_level(v)]
    }

    /// Exponential model matching the selected `C_k` over the pooled atoms.
    pub fn maxent(&self) -> Option<&DiscreteMaxEnt> {
        self.maxent.as_ref()
    }

    /// Positive density (MaxEnt, or the clipped series as fallback) at `v`.
    pub fn density(&self, v: f64) -> f64 {
        self.positive[self.basis.sample().atom_for_level(v)]
    }

    /// Positive density at the response value `y` (step extension).
    pub fn density_at_value(&self, y: f64) -> f64 {
        let l = self.basis.sample().atom_at_or_below(y).unwrap_or(0);
        self.positive[l]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Posterior {
    /// `Pr[X = 1 | Y = y]`
    pub p1: f64,
    /// `Pr[X = 0 | Y = y]`
    pub p0: f64,
}

/// Posterior group probabilities at `y` for prior `Pr[X = 1] = prior`.
///
/// `p1 = prior d(Fmid(y))` clipped to [0, 1] with the positive density
/// flavor; group 0 gets the complementary
/// density `(1 - prior d) / (1 - prior)`, so the two posteriors sum to one.
pub fn classify(model: &TwoSampleDensity, y: f64, prior: f64) -> Result<Posterior> {
    crate::empirical::check_open_unit("prior", prior)?;
    let p1 = (prior * model.density_at_value(y)).clamp(0.0, 1.0);
    Ok(Posterior { p1, p0: 1.0 - p1 })
}

/// Selected pooled score functions for a logistic model of `X` on `Y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogisticFeatures {
    /// Selected orders `k`, 1-based.
    pub orders: Vec<usize>,
    /// One column per selected order: `T_k(y_t; Y)` for every observation.
    pub columns: Vec<Vec<f64>>,
}

pub fn logistic_score_features(
    x: &[f64],
    y: &[f64],
    m: usize,
    rule: SelectionRule,
) -> Result<LogisticFeatures> {
    let d = two_sample_comp_density(x, y, m, rule)?;
    let orders = d.selected_orders();
    let columns = orders
        .iter()
        .map(|&k| d.basis.obs_scores(k))
        .collect::<Result<Vec<_>>>()?;
    Ok(LogisticFeatures { orders, columns })
}

/// Full two-sample summary of a binary-group dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoSampleReport {
    /// `[label of group 0, label of group 1]`
    pub labels: [f64; 2],
    pub groups: [GroupSummary; 2],
    pub combine: CombineResult,
    pub r: f64,
    pub r2: f64,
    pub t: f64,
    pub t_scaled: f64,
    pub df: usize,
    pub w: f64,
    pub z_stat: f64,
    pub high_order_w: Vec<f64>,
}

pub fn two_sample_report(
    x: &[f64],
    y: &[f64],
    m: usize,
    rule: SelectionRule,
    scaling: ZScaling,
) -> Result<TwoSampleReport> {
    let (coding, groups) = split_groups(x, y)?;
    let corr = correlation_stats(x, y)?;
    let st = student_t(&groups[0], &groups[1])?;
    let wx = wilcoxon(x, y, scaling)?;
    let dens = two_sample_comp_density(x, y, m, rule)?;
    Ok(TwoSampleReport {
        labels: coding.labels,
        groups,
        combine: combine(&groups[0], &groups[1]),
        r: corr.r,
        r2: corr.r2,
        t: st.t_core,
        t_scaled: st.t_scaled,
        df: st.df,
        w: wx.w,
        z_stat: wx.z_stat,
        high_order_w: dens.lp1k().to_vec(),
    })
}

/// Prior or posterior for a normal mean and variance, held as a pseudo-sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BayesNormalState {
    pub n_eff: f64,
    pub mean: f64,
    pub var: f64,
}

impl BayesNormalState {
    pub fn new(n_eff: f64, mean: f64, var: f64) -> Result<Self> {
        if !(n_eff > 0.0) || !n_eff.is_finite() {
            return Err(LpError::DomainError {
                what: "n_eff",
                value: n_eff,
                domain: "(0, inf)",
            });
        }
        if !(var >= 0.0) || !var.is_finite() || !mean.is_finite() {
            return Err(LpError::DomainError {
                what: "variance",
                value: var,
                domain: "[0, inf)",
            });
        }
        Ok(Self { n_eff, mean, var })
    }
}

/// Treats the prior as a first sample and combines it with the data.
pub fn bayes_normal_update(prior: &BayesNormalState, data: &GroupSummary) -> BayesNormalState {
    let p = pool(
        prior.n_eff,
        prior.mean,
        prior.var,
        data.n as f64,
        data.mean,
        data.var,
    );
    BayesNormalState {
        n_eff: prior.n_eff + data.n as f64,
        mean: p.mean,
        var: p.var,
    }
}
