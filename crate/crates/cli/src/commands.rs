//! Subcommand implementations. Each returns a JSON payload, an optional tidy
//! table for `--format csv`, and warnings.

use serde_json::{json, Value};

use lpstat_core::compdensity::{gof_by_quadrature, DensityFlavor, ReferenceDistribution};
use lpstat_core::copula::CopulaModel;
use lpstat_core::lp::{correlations, lhermite_normality, lp_moments};
use lpstat_core::twosample::{
    bayes_normal_update, classify, correlation_stats, two_sample_comp_density, two_sample_report,
    wilcoxon, BayesNormalState, GroupSummary, ZScaling,
};
use lpstat_core::{
    fit_copula, l2_fit, pp_grid, series_regression, LpError, Sample, ScoreBasis, SelectionRule,
};

use crate::args::{Global, RefArg};
use crate::output::Table;

pub struct Output {
    pub payload: Value,
    pub table: Table,
    pub warnings: Vec<String>,
}

type Res = std::result::Result<Output, LpError>;

/// Midpoints `(i + .5) / n` of an `n`-cell partition of (0, 1).
pub fn midpoint_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

fn basis_with_warning(
    s: &Sample,
    order: usize,
    what: &str,
    warnings: &mut Vec<String>,
) -> Result<ScoreBasis, LpError> {
    let b = ScoreBasis::new(s, order)?;
    if b.max_order() < order {
        warnings.push(format!(
            "{what}: order reduced from {order} to {} (distinct values or rank)",
            b.max_order()
        ));
    }
    Ok(b)
}

pub fn describe(g: &Global, values: &[f64], moments: usize) -> Res {
    let mut warnings = Vec::new();
    let s = Sample::new(values)?;
    let b = basis_with_warning(&s, moments, "lp moments", &mut warnings)?;
    let lm = lp_moments(&b, b.max_order())?;
    let lhermite = match lhermite_normality(&s) {
        Ok(c) => json!({"statistic": c.statistic, "significant": c.significant}),
        Err(e) => {
            warnings.push(format!("lhermite: {e}"));
            Value::Null
        }
    };
    let mut table = Table::new(["u", "mid_quantile", "qiq"]);
    let mut qiq = Vec::new();
    let mut qiq_failed = false;
    for u in midpoint_grid(g.grid) {
        let mq = s.mid_quantile(u)?;
        let q = match s.informative_quantile(u) {
            Ok(q) => q,
            Err(e) => {
                if !qiq_failed {
                    warnings.push(format!("qiq: {e}"));
                    qiq_failed = true;
                }
                f64::NAN
            }
        };
        table.push(vec![u, mq, q]);
        qiq.push(json!({"u": u, "mid_quantile": mq, "qiq": q}));
    }
    let payload = json!({
        "n": s.n(),
        "distinct": s.r(),
        "mean": s.mean(),
        "sd": s.sd(),
        "quartiles": s.quartile_summary(),
        "lp_moments": lm.moments,
        "cumulative_squares": lm.cumulative_squares(),
        "tail_index": lm.tail_index,
        "lhermite": lhermite,
        "qiq_grid": qiq,
    });
    Ok(Output {
        payload,
        table,
        warnings,
    })
}

fn effective_order(m: &CopulaModel, order: usize, warnings: &mut Vec<String>) {
    let got = m.comoments().rows();
    if got < order {
        warnings.push(format!("comoments: order reduced from {order} to {got}"));
    }
}

fn rule_name(r: SelectionRule) -> &'static str {
    r.name()
}

pub fn depend(g: &Global, x: &[f64], y: &[f64], grid: usize) -> Res {
    let mut warnings = Vec::new();
    let model = fit_copula(x, y, g.order, g.select.into())?;
    effective_order(&model, g.order, &mut warnings);
    let corr = correlations(x, y)?;
    let lpm = model.comoments();
    let us = midpoint_grid(grid);
    let mut table = Table::new(["u", "v", "copula"]);
    let mut density = Vec::with_capacity(grid);
    for &u in &us {
        let mut row = Vec::with_capacity(grid);
        for &v in &us {
            let c = model.eval_copula(u, v)?;
            table.push(vec![u, v, c]);
            row.push(c);
        }
        density.push(row);
    }
    let cells: Vec<Value> = lpm
        .selected_cells()
        .into_iter()
        .map(|(j, k, v)| json!({"j": j, "k": k, "value": v}))
        .collect();
    let payload = json!({
        "n": lpm.n(),
        "order": lpm.rows(),
        "rule": rule_name(lpm.rule()),
        "correlations": corr,
        "comoments": lpm.entries(),
        "selected": lpm.selected(),
        "selected_cells": cells,
        "lpinfor": lpm.lpinfor(),
        "copula_grid": {"u": us, "v": us, "density": density},
    });
    Ok(Output {
        payload,
        table,
        warnings,
    })
}

pub fn regress(g: &Global, x: &[f64], y: &[f64], at: &[f64]) -> Res {
    let mut warnings = Vec::new();
    let sx = Sample::new(x)?;
    let b = basis_with_warning(&sx, g.order, "regression", &mut warnings)?;
    let reg = series_regression(&b, y, b.max_order(), g.select.into())?;
    let mut table = Table::new(["x", "u", "fitted"]);
    let mut curve = Vec::with_capacity(sx.r());
    for (&xv, &u) in sx.values().iter().zip(sx.fmid_at_atoms()) {
        let f = reg.predict(xv);
        table.push(vec![xv, u, f]);
        curve.push(json!({"x": xv, "u": u, "fitted": f}));
    }
    let at: Vec<Value> = at
        .iter()
        .map(|&xv| json!({"x": xv, "fitted": reg.predict(xv)}))
        .collect();
    let payload = json!({
        "n": sx.n(),
        "intercept": reg.intercept,
        "coefficients": reg.coefficients,
        "selected": reg.selected,
        "rule": rule_name(g.select.into()),
        "curve": curve,
        "at": at,
    });
    Ok(Output {
        payload,
        table,
        warnings,
    })
}

pub fn cquantile(g: &Global, x: &[f64], y: &[f64], ps: &[f64], slice_us: &[f64]) -> Res {
    let mut warnings = Vec::new();
    for &p in ps.iter().chain(slice_us) {
        if !(p > 0.0 && p < 1.0) {
            return Err(LpError::DomainError {
                what: "probability level",
                value: p,
                domain: "(0, 1)",
            });
        }
    }
    let model = fit_copula(x, y, g.order, g.select.into())?;
    effective_order(&model, g.order, &mut warnings);
    let sx = model.x_basis().sample();
    let mut headers = vec!["x".to_string(), "u".to_string(), "mean".to_string()];
    headers.extend(ps.iter().map(|p| format!("q_{p}")));
    let mut table = Table::new(headers);
    let mut curves = Vec::with_capacity(sx.r());
    let mut ordered = true;
    for (&xv, &u) in sx.values().iter().zip(sx.fmid_at_atoms()) {
        let slice = model.slice(u)?;
        let qs: Vec<f64> = ps
            .iter()
            .map(|&p| model.conditional_quantile(u, p))
            .collect::<Result<_, _>>()?;
        ordered &= qs.windows(2).all(|w| w[0] < w[1]);
        let mean = slice.mean();
        let mut row = vec![xv, u, mean];
        row.extend(&qs);
        table.push(row);
        curves.push(json!({"x": xv, "u": u, "mean": mean, "quantiles": qs}));
    }
    if !ordered {
        warnings.push("conditional quantile curves cross at some grid points".to_string());
    }
    let vs = midpoint_grid(g.grid);
    let mut slices = Vec::with_capacity(slice_us.len());
    for &u in slice_us {
        let s = model.slice(u)?;
        let maxima = s.local_maxima();
        let density: Vec<f64> = vs.iter().map(|&v| s.density_at(v)).collect();
        slices.push(json!({
            "u": u,
            "mean": s.mean(),
            "local_maxima": maxima,
            "bimodal": maxima >= 2,
            "density": density,
        }));
    }
    let payload = json!({
        "n": sx.n(),
        "order": model.comoments().rows(),
        "rule": rule_name(model.comoments().rule()),
        "p": ps,
        "curves": curves,
        "ordered": ordered,
        "slice_v": vs,
        "slices": slices,
    });
    Ok(Output {
        payload,
        table,
        warnings,
    })
}

fn reference_json(g: &ReferenceDistribution) -> Value {
    match g {
        ReferenceDistribution::Normal { mean, sd } => {
            json!({"name": "normal", "mean": mean, "sd": sd})
        }
        ReferenceDistribution::Exponential { rate } => json!({"name": "exponential", "rate": rate}),
        ReferenceDistribution::Uniform { low, high } => {
            json!({"name": "uniform", "low": low, "high": high})
        }
        ReferenceDistribution::Empirical(s) => json!({"name": "empirical", "n": s.n()}),
    }
}

pub fn fit(g: &Global, values: &[f64], reference: RefArg, draws: usize) -> Res {
    let mut warnings = Vec::new();
    let s = Sample::new(values)?;
    let gref = match reference {
        RefArg::Normal => ReferenceDistribution::fit_normal(&s)?,
        RefArg::Exponential => ReferenceDistribution::fit_exponential(&s)?,
        RefArg::Uniform => ReferenceDistribution::fit_uniform(&s)?,
    };
    let l2 = l2_fit(&s, &gref, g.order, g.select.into())?;
    let model = match l2.clone().with_maxent() {
        Ok(m) => m,
        Err(e) => {
            warnings.push(format!("maxent: {e}; using the clipped L2 density"));
            l2
        }
    };
    let maxent = model.maxent().map(|p| {
        let theta: Vec<Value> = p
            .theta
            .iter()
            .map(|&(j, t)| json!({"order": j, "theta": t}))
            .collect();
        json!({
            "theta0": p.theta0,
            "theta": theta,
            "iterations": p.iterations,
            "residual": p.residual,
        })
    });
    let us = midpoint_grid(g.grid);
    let mut table = Table::new(["u", "l2", "l2_clipped", "maxent", "x", "skew_g"]);
    let mut dens = Vec::with_capacity(us.len());
    for &u in &us {
        let a = model.eval_density(u, DensityFlavor::L2)?;
        let b = model.eval_density(u, DensityFlavor::L2Clipped)?;
        let c = match model.maxent() {
            Some(_) => model.eval_density(u, DensityFlavor::MaxEnt)?,
            None => f64::NAN,
        };
        let xv = s.mid_quantile(u)?;
        let sg = model.skew_g_density(xv)?;
        table.push(vec![u, a, b, c, xv, sg]);
        dens.push(json!({"u": u, "l2": a, "l2_clipped": b, "maxent": c, "x": xv, "skew_g": sg}));
    }
    let pp: Vec<Value> = pp_grid(&s, &gref)
        .into_iter()
        .map(|(gu, fu)| json!({"g": gu, "f": fu}))
        .collect();
    let simulation = if draws > 0 {
        match model.simulate_skew_g(draws, g.seed) {
            Ok(sim) => {
                let ss = Sample::new(&sim.draws)?;
                json!({
                    "count": sim.draws.len(),
                    "proposals": sim.proposals,
                    "acceptance_rate": sim.acceptance_rate(),
                    "bound": sim.bound,
                    "mean": ss.mean(),
                    "sd": ss.sd(),
                    "quartiles": ss.quartile_summary(),
                })
            }
            Err(e) => {
                warnings.push(format!("simulation: {e}"));
                Value::Null
            }
        }
    } else {
        Value::Null
    };
    let payload = json!({
        "n": s.n(),
        "reference": reference_json(&gref),
        "coefficients": model.coefficients(),
        "selected": model.selected(),
        "rule": rule_name(g.select.into()),
        "gof": model.gof_distance(),
        "gof_quadrature": gof_by_quadrature(&model),
        "maxent": maxent,
        "positive_flavor": model.positive_flavor().name(),
        "density_grid": dens,
        "pp_grid": pp,
        "simulation": simulation,
    });
    Ok(Output {
        payload,
        table,
        warnings,
    })
}

pub fn twosample(g: &Global, group: &[f64], y: &[f64], prior: Option<f64>, small_n: bool) -> Res {
    let mut warnings = Vec::new();
    let scaling = if small_n {
        ZScaling::SqrtNMinusOne
    } else {
        ZScaling::SqrtN
    };
    let rule: SelectionRule = g.select.into();
    let report = two_sample_report(group, y, g.order, rule, scaling)?;
    let corr = correlation_stats(group, y)?;
    let wx = wilcoxon(group, y, scaling)?;
    let dens = two_sample_comp_density(group, y, g.order, rule)?;
    if dens.basis().max_order() < g.order {
        warnings.push(format!(
            "comparison density: order reduced from {} to {}",
            g.order,
            dens.basis().max_order()
        ));
    }
    let prior = prior.unwrap_or(dens.tau());
    let vs = midpoint_grid(g.grid);
    let mut table = Table::new(["v", "raw", "density"]);
    let mut grid = Vec::with_capacity(vs.len());
    for &v in &vs {
        let (r, d) = (dens.raw_density(v), dens.density(v));
        table.push(vec![v, r, d]);
        grid.push(json!({"v": v, "raw": r, "density": d}));
    }
    let sy = dens.basis().sample();
    let mut classification = Vec::with_capacity(sy.r());
    for &yv in sy.values() {
        let p = classify(&dens, yv, prior)?;
        classification.push(json!({"y": yv, "p1": p.p1, "p0": p.p0}));
    }
    let c = &report.combine;
    let chain = json!({
        "r2": report.r2,
        "r2_from_means": c.tau1 * c.tau2 * (report.groups[1].mean - report.groups[0].mean).powi(2) / c.var,
        "one_minus_r2": 1.0 - report.r2,
        "vpool_over_v": c.vpool / c.var,
        "r2_from_t": report.t * report.t / (1.0 + report.t * report.t),
    });
    let payload = json!({
        "sign_convention": "group 1 is the larger label; positive t and w mean group 1 sits higher",
        "report": report,
        "correlation": corr,
        "wilcoxon": {
            "w": wx.w,
            "w_rank": wx.w_rank,
            "z_stat": wx.z_stat,
            "m1": wx.m1,
            "v": wx.v,
            "scaling": if small_n { "sqrt(n-1)" } else { "sqrt(n)" },
        },
        "identity_chain": chain,
        "comparison_density": {
            "coefficients": dens.coefficients(),
            "lp1k": dens.lp1k(),
            "selected_orders": dens.selected_orders(),
            "grid": grid,
        },
        "classification": {"prior": prior, "points": classification},
    });
    Ok(Output {
        payload,
        table,
        warnings,
    })
}

pub fn bayes_update(prior: BayesNormalState, data: GroupSummary) -> Res {
    let post = bayes_normal_update(&prior, &data);
    let mut table = Table::new(["n_eff", "mean", "var"]);
    table.push(vec![post.n_eff, post.mean, post.var]);
    Ok(Output {
        payload: json!({"prior": prior, "data": data, "posterior": post}),
        table,
        warnings: Vec::new(),
    })
}
