//! LP moments and comoments, dependence coefficients, coefficient selection
//! and the LHermite normality diagnostic.

use serde::Serialize;

use crate::empirical::Sample;
use crate::error::{LpError, Result};
use crate::scores::ScoreBasis;
use crate::special::std_normal_quantile;

/// Cumulative squared LP moment level that defines the tail index.
pub const TAIL_INDEX_THRESHOLD: f64 = 0.95;

/// Penalized selection of orthonormal coefficients.
///
/// Coefficients are ranked by squared magnitude and the kept prefix maximizes
/// `sum(c^2) - k * penalty`, with penalty `2/n` (AIC) or `ln(n)/n` (BIC).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionRule {
    Aic,
    #[default]
    Bic,
    /// Keep every coefficient.
    None,
}

impl SelectionRule {
    pub fn penalty(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            SelectionRule::Aic => 2.0 / nf,
            SelectionRule::Bic => nf.ln() / nf,
            SelectionRule::None => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SelectionRule::Aic => "aic",
            SelectionRule::Bic => "bic",
            SelectionRule::None => "none",
        }
    }
}

impl std::str::FromStr for SelectionRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(SelectionRule::Aic),
            "bic" => Ok(SelectionRule::Bic),
            "none" => Ok(SelectionRule::None),
            other => Err(format!("unknown selection rule '{other}' (aic|bic|none)")),
        }
    }
}

/// Selection mask for `coeffs` estimated from `n` observations.
///
/// Ties in squared magnitude are broken by position, so a row-major
/// flattened matrix ties by (row, col).
pub fn select_significant(coeffs: &[f64], n: usize, rule: SelectionRule) -> Vec<bool> {
    if rule == SelectionRule::None {
        return vec![true; coeffs.len()];
    }
    let penalty = rule.penalty(n.max(1));
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    // stable sort keeps index order among equal squares
    order.sort_by(|&a, &b| (coeffs[b] * coeffs[b]).total_cmp(&(coeffs[a] * coeffs[a])));

    let mut best_k = 0;
    let mut best = 0.0;
    let mut running = 0.0;
    for (k, &i) in order.iter().enumerate() {
        running += coeffs[i] * coeffs[i];
        let crit = running - (k + 1) as f64 * penalty;
        if crit > best {
            best = crit;
            best_k = k + 1;
        }
    }
    let mut mask = vec![false; coeffs.len()];
    for &i in &order[..best_k] {
        mask[i] = true;
    }
    mask
}

/// `LP(j; X) = E[Z(X) T_j(X; X)]` for j = 1..m, and the tail index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LPMomentVector {
    pub moments: Vec<f64>,
    /// Smallest order whose cumulative squared moments reach the threshold,
    /// `None` if no order does.
    pub tail_index: Option<usize>,
}

impl LPMomentVector {
    pub fn cumulative_squares(&self) -> Vec<f64> {
        self.moments
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m * m;
                Some(*acc)
            })
            .collect()
    }
}

pub fn lp_moments(basis: &ScoreBasis, m: usize) -> Result<LPMomentVector> {
    lp_moments_with_threshold(basis, m, TAIL_INDEX_THRESHOLD)
}

pub fn lp_moments_with_threshold(
    basis: &ScoreBasis,
    m: usize,
    threshold: f64,
) -> Result<LPMomentVector> {
    let s = basis.sample();
    if s.sd() <= 0.0 {
        return Err(LpError::DegenerateScale("standard deviation"));
    }
    if m > basis.max_order() {
        return Err(LpError::OrderOutOfRange {
            order: m,
            max: basis.max_order(),
        });
    }
    let z: Vec<f64> = s.values().iter().map(|x| (x - s.mean()) / s.sd()).collect();
    let p = s.masses();
    let moments: Vec<f64> = basis.table()[..m]
        .iter()
        .map(|t| p.iter().zip(&z).zip(t).map(|((p, z), t)| p * z * t).sum())
        .collect();
    let mut acc = 0.0;
    let mut tail_index = None;
    for (j, lp) in moments.iter().enumerate() {
        acc += lp * lp;
        if acc >= threshold {
            tail_index = Some(j + 1);
            break;
        }
    }
    Ok(LPMomentVector {
        moments,
        tail_index,
    })
}

/// Matrix of `LP(j, k; X, Y) = E[T_j(X; X) T_k(Y; Y)]` with a selection mask.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LPComomentMatrix {
    entries: Vec<Vec<f64>>,
    selected: Vec<Vec<bool>>,
    n: usize,
    rule: SelectionRule,
    lpinfor: f64,
}

impl LPComomentMatrix {
    /// Wraps precomputed entries and applies `rule`.
    pub fn from_entries(entries: Vec<Vec<f64>>, n: usize, rule: SelectionRule) -> Self {
        let mut out = Self {
            entries,
            selected: Vec::new(),
            n,
            rule,
            lpinfor: 0.0,
        };
        out.reselect(rule);
        out
    }

    /// Replaces the selection with an explicit mask.
    pub fn with_mask(mut self, mask: Vec<Vec<bool>>) -> Self {
        assert_eq!(mask.len(), self.entries.len(), "mask shape");
        self.selected = mask;
        self.lpinfor = self.selected_sum_of_squares();
        self
    }

    pub fn reselect(&mut self, rule: SelectionRule) {
        let flat: Vec<f64> = self.entries.iter().flatten().copied().collect();
        let mask = select_significant(&flat, self.n, rule);
        let cols = self.cols();
        self.selected = mask.chunks(cols.max(1)).map(|c| c.to_vec()).collect();
        self.selected.truncate(self.entries.len());
        self.rule = rule;
        self.lpinfor = self.selected_sum_of_squares();
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rule(&self) -> SelectionRule {
        self.rule
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn selected(&self) -> &[Vec<bool>] {
        &self.selected
    }

    /// `LP(j, k)` with 1-based orders.
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.entries[j - 1][k - 1]
    }

    pub fn is_selected(&self, j: usize, k: usize) -> bool {
        self.selected[j - 1][k - 1]
    }

    /// Selected cells as `(j, k, value)` with 1-based orders.
    pub fn selected_cells(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (j, row) in self.entries.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if self.selected[j][k] {
                    out.push((j + 1, k + 1, v));
                }
            }
        }
        out
    }

    /// Sum of squares of the selected comoments.
    pub fn lpinfor(&self) -> f64 {
        self.lpinfor
    }

    /// Matrix for the swapped pair (Y, X).
    pub fn transposed(&self) -> Self {
        let t = |m: &[Vec<f64>]| -> Vec<Vec<f64>> {
            (0..self.cols())
                .map(|k| m.iter().map(|row| row[k]).collect())
                .collect()
        };
        let sel: Vec<Vec<bool>> = (0..self.cols())
            .map(|k| self.selected.iter().map(|row| row[k]).collect())
            .collect();
        Self {
            entries: t(&self.entries),
            selected: sel,
            n: self.n,
            rule: self.rule,
            lpinfor: self.lpinfor,
        }
    }

    fn selected_sum_of_squares(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(self.selected.iter().flatten())
            .filter(|(_, &s)| s)
            .map(|(v, _)| v * v)
            .sum()
    }
}

/// LP comoment matrix of the paired observations behind `bx` and `by`.
pub fn lp_comoments(
    bx: &ScoreBasis,
    by: &ScoreBasis,
    m: usize,
    rule: SelectionRule,
) -> Result<LPComomentMatrix> {
    lp_comoments_rect(bx, by, m, m, rule)
}

/// Comoments `LP(j, k)` for j = 1..mx, k = 1..my.
pub fn lp_comoments_rect(
    bx: &ScoreBasis,
    by: &ScoreBasis,
    mx: usize,
    my: usize,
    rule: SelectionRule,
) -> Result<LPComomentMatrix> {
    let (nx, ny) = (bx.sample().n(), by.sample().n());
    if nx != ny {
        return Err(LpError::LengthMismatch {
            left: nx,
            right: ny,
        });
    }
    for (b, m) in [(bx, mx), (by, my)] {
        if m > b.max_order() {
            return Err(LpError::OrderOutOfRange {
                order: m,
                max: b.max_order(),
            });
        }
    }
    let ax = bx.sample().obs_atoms();
    let ay = by.sample().obs_atoms();
    let (tx, ty) = (bx.table(), by.table());
    let nf = nx as f64;
    let entries: Vec<Vec<f64>> = (0..mx)
        .map(|j| {
            (0..my)
                .map(|k| {
                    let s: f64 = ax.iter().zip(ay).map(|(&a, &b)| tx[j][a] * ty[k][b]).sum();
                    s / nf
                })
                .collect()
        })
        .collect();
    Ok(LPComomentMatrix::from_entries(entries, nx, rule))
}

/// Sum of squares of the selected comoments.
pub fn lpinfor(matrix: &LPComomentMatrix) -> f64 {
    matrix.lpinfor()
}

/// Four dependence coefficients of a paired sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationReport {
    /// `E[Z(X) Z(Y)]`
    pub pearson: f64,
    /// `E[T_1(X) T_1(Y)] = LP(1, 1)`
    pub spearman_mid: f64,
    /// `Cor(X, Fmid(Y))`
    pub gini_xy: f64,
    /// `Cor(Fmid(X), Y)`
    pub gini_yx: f64,
}

pub fn correlations(x: &[f64], y: &[f64]) -> Result<CorrelationReport> {
    if x.len() != y.len() {
        return Err(LpError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(LpError::InsufficientData {
            needed: 2,
            got: x.len(),
        });
    }
    let sx = Sample::new(x)?;
    let sy = Sample::new(y)?;
    if sx.sd() <= 0.0 || sy.sd() <= 0.0 {
        return Err(LpError::DegenerateScale("standard deviation"));
    }
    let zx: Vec<f64> = x.iter().map(|v| (v - sx.mean()) / sx.sd()).collect();
    let zy: Vec<f64> = y.iter().map(|v| (v - sy.mean()) / sy.sd()).collect();
    let tx = ScoreBasis::new(&sx, 1)?.obs_scores(1)?;
    let ty = ScoreBasis::new(&sy, 1)?.obs_scores(1)?;
    let mean_prod = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(a, b)| a * b).sum::<f64>() / a.len() as f64
    };
    Ok(CorrelationReport {
        pearson: mean_prod(&zx, &zy),
        spearman_mid: mean_prod(&tx, &ty),
        gini_xy: mean_prod(&zx, &ty),
        gini_yx: mean_prod(&tx, &zy),
    })
}

/// Outcome of the LHermite normality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityCheck {
    pub statistic: f64,
    /// `-ln(statistic) > 1/n`
    pub significant: bool,
}

/// Ratio of `E[Z(X) Phi^-1(Fmid(X))]` to the standard deviation of the
/// normal scores `Phi^-1(Fmid(X))`, both under the empirical measure.
pub fn lhermite_normality(s: &Sample) -> Result<NormalityCheck> {
    if s.n() < 8 {
        return Err(LpError::InsufficientData {
            needed: 8,
            got: s.n(),
        });
    }
    if s.sd() <= 0.0 {
        return Err(LpError::DegenerateScale("standard deviation"));
    }
    let p = s.masses();
    let q: Vec<f64> = s
        .fmid_at_atoms()
        .iter()
        .map(|&u| std_normal_quantile(u))
        .collect();
    let q_mean: f64 = p.iter().zip(&q).map(|(p, q)| p * q).sum();
    let q_sd = p
        .iter()
        .zip(&q)
        .map(|(p, q)| p * (q - q_mean) * (q - q_mean))
        .sum::<f64>()
        .sqrt();
    if q_sd <= 0.0 {
        return Err(LpError::DegenerateScale("normal scores"));
    }
    let num: f64 = s
        .values()
        .iter()
        .zip(p)
        .zip(&q)
        .map(|((x, p), q)| p * (x - s.mean()) / s.sd() * q)
        .sum();
    let statistic = num / q_sd;
    let significant = statistic <= 0.0 || -statistic.ln() > 1.0 / s.n() as f64;
    Ok(NormalityCheck {
        statistic,
        significant,
    })
}
