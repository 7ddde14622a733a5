//! Mid-distribution based nonparametric statistics.
//!
//! Everything is built on the empirical mid-distribution `Fmid` of a sample
//! and the orthonormal score functions `T_j(x; X)` constructed from it: LP
//! moments and comoments, comparison densities against a reference model,
//! copula density series with conditional mean and quantile curves, and the
//! two-sample statistics that fall out as special cases.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compdensity;
pub mod copula;
pub mod empirical;
pub mod error;
pub mod lp;
pub mod quadrature;
pub mod scores;
pub mod special;
pub mod twosample;

pub use compdensity::{
    comparison_distribution, l2_fit, maxent_fit, maxent_solve, pp_grid, CompDensityModel,
    DensityFlavor, MaxEntParams, ReferenceDistribution,
};
pub use copula::{fit_copula, series_regression, ConditionalSlice, CopulaModel, SeriesRegression};
pub use empirical::{make_sample, mid_clt_approx, QuartileSummary, Sample};
pub use error::{LpError, Result};
pub use lp::{
    correlations, lhermite_normality, lp_comoments, lp_moments, lpinfor, select_significant,
    CorrelationReport, LPComomentMatrix, LPMomentVector, NormalityCheck, SelectionRule,
};
pub use scores::{build_score_basis, legendre_eval, ScoreBasis};
pub use twosample::{
    bayes_normal_update, classify, combine, correlation_stats, logistic_score_features,
    recursive_update, student_t, two_sample_comp_density, two_sample_report, wilcoxon,
    BayesNormalState, CombineResult, GroupSummary, TwoSampleDensity, TwoSampleReport, ZScaling,
};
