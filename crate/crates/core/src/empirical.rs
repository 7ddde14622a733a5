//! Empirical distributions: mid-distribution, quantile and mid-quantile
//! functions, quartile summaries and the informative quantile.
//!
//! A [`Sample`] stores the sorted distinct values of a data vector with their
//! probability masses, together with the original observations so paired
//! analyses can line rows up again.

use serde::Serialize;

use crate::error::{LpError, Result};
use crate::special::std_normal_cdf;

/// Weighted empirical distribution of a data vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    counts: Vec<usize>,
    masses: Vec<f64>,
    cdf: Vec<f64>,
    fmid: Vec<f64>,
    obs: Vec<f64>,
    obs_atom: Vec<usize>,
    mean: f64,
    sd: f64,
}

impl Sample {
    /// Builds the empirical distribution of `values`.
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(LpError::EmptyInput);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LpError::NonFiniteValue(i));
        }
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

        let mut atoms: Vec<f64> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut obs_atom = vec![0usize; n];
        for &i in &order {
            let v = values[i];
            // -0.0 and 0.0 are the same atom
            if atoms.last().is_some_and(|&last| last == v) {
                *counts.last_mut().unwrap() += 1;
            } else {
                atoms.push(v);
                counts.push(1);
            }
            obs_atom[i] = atoms.len() - 1;
        }

        let nf = n as f64;
        let masses: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
        let mut cdf = Vec::with_capacity(atoms.len());
        let mut fmid = Vec::with_capacity(atoms.len());
        let mut below = 0usize;
        for &c in &counts {
            // exact rationals: (below + c/2) / n
            fmid.push((2 * below + c) as f64 / (2.0 * nf));
            below += c;
            cdf.push(below as f64 / nf);
        }

        let mean: f64 = atoms.iter().zip(&masses).map(|(x, p)| x * p).sum();
        let var: f64 = atoms
            .iter()
            .zip(&masses)
            .map(|(x, p)| (x - mean) * (x - mean) * p)
            .sum();

        Ok(Self {
            values: atoms,
            counts,
            masses,
            cdf,
            fmid,
            obs: values.to_vec(),
            obs_atom,
            mean,
            sd: var.sqrt(),
        })
    }

    /// Sorted distinct values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Probability mass of each distinct value.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// CDF evaluated at each distinct value.
    pub fn cdf_at_atoms(&self) -> &[f64] {
        &self.cdf
    }

    /// Mid-distribution evaluated at each distinct value.
    pub fn fmid_at_atoms(&self) -> &[f64] {
        &self.fmid
    }

    /// Original observations in input order.
    pub fn obs(&self) -> &[f64] {
        &self.obs
    }

    /// Index of the distinct value each observation equals.
    pub fn obs_atoms(&self) -> &[usize] {
        &self.obs_atom
    }

    pub fn n(&self) -> usize {
        self.obs.len()
    }

    /// Number of distinct values.
    pub fn r(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population standard deviation (divide by n).
    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }

    /// Index of the largest atom `<= x`, or `None` when `x` is below the support.
    pub fn atom_at_or_below(&self, x: f64) -> Option<usize> {
        let k = self.values.partition_point(|&v| v <= x);
        k.checked_sub(1)
    }

    /// Index of the atom whose probability interval contains `u`, i.e. the
    /// atom returned by [`Sample::quantile`].
    pub fn atom_for_level(&self, u: f64) -> usize {
        self.cdf.partition_point(|&f| f < u).min(self.r() - 1)
    }

    /// `F(x) = Pr[X <= x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.atom_at_or_below(x) {
            Some(j) => self.cdf[j],
            None => 0.0,
        }
    }

    /// `p(x) = Pr[X = x]`.
    pub fn pmf(&self, x: f64) -> f64 {
        match self.atom_at_or_below(x) {
            Some(j) if self.values[j] == x => self.masses[j],
            _ => 0.0,
        }
    }

    /// Mid-distribution `Fmid(x) = F(x) - p(x)/2`.
    pub fn mid_distribution(&self, x: f64) -> f64 {
        match self.atom_at_or_below(x) {
            Some(j) if self.values[j] == x => self.fmid[j],
            Some(j) => self.cdf[j],
            None => 0.0,
        }
    }

    /// Mid-distribution of every observation, `(midrank - .5) / n`.
    pub fn mid_ranks(&self) -> Vec<f64> {
        self.obs_atom.iter().map(|&j| self.fmid[j]).collect()
    }

    /// Left-continuous quantile: smallest atom `x` with `F(x) >= u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_open_unit("u", u)?;
        Ok(self.values[self.atom_for_level(u)])
    }

    /// Mid-quantile: linear interpolation through `(Fmid(x_j), x_j)`, flat
    /// beyond the first and last knot.
    pub fn mid_quantile(&self, u: f64) -> Result<f64> {
        check_open_unit("u", u)?;
        Ok(self.mid_quantile_unchecked(u))
    }

    pub(crate) fn mid_quantile_unchecked(&self, u: f64) -> f64 {
        let r = self.r();
        if u <= self.fmid[0] {
            return self.values[0];
        }
        if u >= self.fmid[r - 1] {
            return self.values[r - 1];
        }
        // fmid[j] <= u < fmid[j + 1]
        let j = self.fmid.partition_point(|&f| f <= u) - 1;
        let (u0, u1) = (self.fmid[j], self.fmid[j + 1]);
        let (x0, x1) = (self.values[j], self.values[j + 1]);
        x0 + (u - u0) / (u1 - u0) * (x1 - x0)
    }

    pub fn quartile_summary(&self) -> QuartileSummary {
        let q1 = self.mid_quantile_unchecked(0.25);
        let q2 = self.mid_quantile_unchecked(0.5);
        let q3 = self.mid_quantile_unchecked(0.75);
        QuartileSummary {
            q1,
            q2,
            q3,
            mq: 0.5 * (q1 + q3),
            dq: 2.0 * (q3 - q1),
        }
    }

    /// `QIQ(u) = (Qmid(u) - MQ) / DQ`.
    pub fn informative_quantile(&self, u: f64) -> Result<f64> {
        let qs = self.quartile_summary();
        if qs.dq <= 0.0 {
            return Err(LpError::DegenerateScale("quartile deviation"));
        }
        Ok((self.mid_quantile(u)? - qs.mq) / qs.dq)
    }

    /// `Z(x) = (x - mean) / sd`.
    pub fn standardize(&self, x: f64) -> Result<f64> {
        if self.sd <= 0.0 {
            return Err(LpError::DegenerateScale("standard deviation"));
        }
        Ok((x - self.mean) / self.sd)
    }
}

/// Convenience wrapper around [`Sample::new`].
pub fn make_sample(values: &[f64]) -> Result<Sample> {
    Sample::new(values)
}

/// Quartiles from the mid-quantile, mid-quartile `MQ` and quartile deviation `DQ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuartileSummary {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub mq: f64,
    pub dq: f64,
}

/// Normal approximation `Phi((x - mean) / sd)` to the mid-distribution of a
/// discrete sum with the given mean and standard deviation.
pub fn mid_clt_approx(mean: f64, sd: f64, x: f64) -> Result<f64> {
    if sd <= 0.0 || !sd.is_finite() {
        return Err(LpError::DegenerateScale("standard deviation"));
    }
    Ok(std_normal_cdf((x - mean) / sd))
}

pub(crate) fn check_open_unit(what: &'static str, u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(LpError::DomainError {
            what,
            value: u,
            domain: "(0, 1)",
        })
    }
}
