//! Execution of a validated [`RunConfig`].

use panel_power::edgeworth::{edgeworth_cdf, edgeworth_vs_exact, EdgeworthQuery, Hypothesis};
use panel_power::estimators::panel_statistics_with;
use panel_power::fredholm::{imhof_cdf, uv_moments};
use panel_power::io::{format_sig, read_panel};
use panel_power::montecarlo::{rejection_rates, replicate_table2_with, Table2Grid, TABLE2_PERIODS, TABLE2_VARIANTS};
use panel_power::power::{c_moments, drift, local_power, norm_cdf, power_curve, power_table};
use panel_power::sawa::{exact_t_moment, NullMomentTable};
use panel_power::{CDistribution, CMomentSummary, Result, TestVariant};
use serde_json::{json, Value};

use crate::config::{CommandConfig, RunConfig};

/// Result of a command in both output encodings.
pub struct Report {
    /// Machine-readable result.
    pub result: Value,
    /// CSV header.
    pub header: Vec<String>,
    /// CSV rows.
    pub rows: Vec<Vec<String>>,
    /// Extra `#` lines printed before the CSV table.
    pub notes: Vec<String>,
}

impl Report {
    fn table(result: Value, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Report {
            result,
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
            notes: Vec::new(),
        }
    }
}

fn num(x: f64) -> String {
    format_sig(x)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialise to JSON")
}

/// Run the command of `cfg`.
pub fn execute(cfg: &RunConfig) -> Result<Report> {
    match &cfg.command {
        CommandConfig::Test(c) => {
            let panel = read_panel(&c.input)?;
            let variants: Vec<TestVariant> = if c.variants.is_empty() {
                TestVariant::TABLE
                    .into_iter()
                    .filter(|v| c.case.is_none_or(|case| v.case() == case))
                    .collect()
            } else {
                c.variants.clone()
            };
            let outcomes = panel_statistics_with(&panel, &variants, c.divisor)?;
            let rows = outcomes
                .iter()
                .map(|o| {
                    let mut row = vec![o.variant.id().to_string(), num(o.statistic), num(o.p_value)];
                    row.extend(o.reject_at.iter().map(|d| d.reject.to_string()));
                    row.push(o.n_units.to_string());
                    row.push(o.n_periods.to_string());
                    row
                })
                .collect();
            Ok(Report::table(
                to_value(&outcomes),
                &[
                    "variant",
                    "statistic",
                    "p_value",
                    "reject_0.01",
                    "reject_0.05",
                    "reject_0.10",
                    "n_units",
                    "n_periods",
                ],
                rows,
            ))
        }
        CommandConfig::Power(c) => {
            let m = c_moments(&c.distribution)?;
            let power = local_power(c.variant, &m, c.level)?;
            let d = drift(c.variant, &m);
            Ok(Report::table(
                json!({ "variant": c.variant, "distribution": c.distribution, "moments": m,
                        "level": c.level, "drift": d, "power": power }),
                &["variant", "distribution", "level", "drift", "power"],
                vec![vec![
                    c.variant.id().to_string(),
                    c.distribution.to_string(),
                    num(c.level),
                    num(d),
                    num(power),
                ]],
            ))
        }
        CommandConfig::PowerTable(c) => {
            let cells = power_table(c.level)?;
            let mut header = vec!["distribution"];
            header.extend(TestVariant::TABLE.iter().map(|v| v.id()));
            let rows = CDistribution::TABLE
                .iter()
                .map(|dist| {
                    let mut row = vec![dist.to_string()];
                    row.extend(TestVariant::TABLE.iter().map(|v| {
                        let cell = cells
                            .iter()
                            .find(|p| p.distribution == *dist && p.variant == *v)
                            .expect("power table covers every cell");
                        num(cell.power)
                    }));
                    row
                })
                .collect();
            Ok(Report::table(to_value(&cells), &header, rows))
        }
        CommandConfig::PowerCurve(c) => {
            let variants: Vec<TestVariant> = if c.variants.is_empty() {
                TestVariant::TABLE.to_vec()
            } else {
                c.variants.clone()
            };
            let grid: Vec<f64> = (0..c.points)
                .map(|k| c.c_max * k as f64 / (c.points - 1) as f64)
                .collect();
            let curves = variants
                .iter()
                .map(|&v| power_curve(v, &grid, c.design, c.level))
                .collect::<Result<Vec<_>>>()?;
            let mut header = vec!["c"];
            header.extend(variants.iter().map(|v| v.id()));
            let rows = grid
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let mut row = vec![num(x)];
                    row.extend(curves.iter().map(|curve| num(curve[k].1)));
                    row
                })
                .collect();
            let result = json!({
                "c": grid,
                "curves": variants.iter().zip(&curves).map(|(v, curve)| json!({
                    "variant": v,
                    "power": curve.iter().map(|p| p.1).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            });
            Ok(Report::table(result, &header, rows))
        }
        CommandConfig::Moments(c) => {
            let mean = exact_t_moment(c.case, 1, c.c, &c.quadrature)?;
            let second = exact_t_moment(c.case, 2, c.c, &c.quadrature)?;
            let third = exact_t_moment(c.case, 3, c.c, &c.quadrature)?;
            let var = second - mean * mean;
            let uv = uv_moments(c.case, c.c);
            let null = NullMomentTable::shared().get(c.case);
            let entries = [
                ("t_mean", mean),
                ("t_var", var),
                ("t_second", second),
                ("t_third", third),
                ("u_mean", uv.mean_u),
                ("u_var", uv.var_u),
                ("v_mean", uv.mean_v),
                ("v_var", uv.var_v),
                ("null_t_mean", null.mean),
                ("null_t_sd", null.sd),
                ("null_t_skewness", null.skewness),
            ];
            let rows = entries.iter().map(|(k, v)| vec![k.to_string(), num(*v)]).collect();
            let result = json!({
                "case": c.case,
                "c": c.c,
                "t": { "mean": mean, "var": var, "second": second, "third": third },
                "uv": uv,
                "null": null,
            });
            Ok(Report::table(result, &["quantity", "value"], rows))
        }
        CommandConfig::Edgeworth(c) => {
            let (hypothesis, moments) = match &c.distribution {
                None => (Hypothesis::Null, CMomentSummary::zero()),
                Some(d) => (Hypothesis::Local, c_moments(d)?),
            };
            let points = c
                .x
                .iter()
                .map(|&x| {
                    let q = EdgeworthQuery {
                        variant: c.variant,
                        x,
                        n: c.n_units,
                        moments,
                        hypothesis,
                    };
                    Ok((x, edgeworth_cdf(&q)?, norm_cdf(x)))
                })
                .collect::<Result<Vec<_>>>()?;
            let check = match &c.check {
                Some(k) => Some(edgeworth_vs_exact(
                    c.variant,
                    c.n_units as usize,
                    k.n_periods,
                    c.distribution,
                    k.reps,
                    k.seed,
                )?),
                None => None,
            };
            let rows = points.iter().map(|(x, f, p)| vec![num(*x), num(*f), num(*p)]).collect();
            let result = json!({
                "variant": c.variant,
                "n_units": c.n_units,
                "hypothesis": hypothesis,
                "points": points.iter().map(|(x, f, p)| json!({"x": x, "cdf": f, "normal_cdf": p})).collect::<Vec<_>>(),
                "check": check,
            });
            let mut report = Report::table(result, &["x", "cdf", "normal_cdf"], rows);
            if let Some(d) = check {
                report.notes.push(format!(
                    "check: n_periods={} reps={} edgeworth_distance={} normal_distance={}",
                    d.n_periods,
                    d.reps,
                    num(d.edgeworth_distance),
                    num(d.normal_distance)
                ));
            }
            Ok(report)
        }
        CommandConfig::Simulate(c) => {
            let reports = rejection_rates(&c.spec, &c.variants, c.level)?;
            let rows = reports
                .iter()
                .map(|r| {
                    vec![
                        r.variant.id().to_string(),
                        num(r.level),
                        num(r.rate),
                        num(r.mc_std_err),
                        r.reps.to_string(),
                        r.seed.to_string(),
                    ]
                })
                .collect();
            Ok(Report::table(
                to_value(&reports),
                &["variant", "level", "rate", "mc_std_err", "reps", "seed"],
                rows,
            ))
        }
        CommandConfig::Table2(c) => {
            let cells = replicate_table2_with(c.reps, c.seed, c.grid, c.divisor)?;
            let periods: &[usize] = match c.grid {
                Table2Grid::Full => &TABLE2_PERIODS,
                Table2Grid::Desk => &TABLE2_PERIODS[..1],
            };
            let column_names: Vec<String> = TABLE2_VARIANTS
                .iter()
                .flat_map(|v| periods.iter().map(move |t| format!("{}:T={t}", v.id())))
                .collect();
            let mut header = vec!["n_units", "distribution"];
            header.extend(column_names.iter().map(String::as_str));
            let mut rows = Vec::new();
            let mut seen: Vec<(usize, CDistribution)> = Vec::new();
            for cell in &cells {
                let key = (cell.n_units, cell.distribution);
                if seen.contains(&key) {
                    continue;
                }
                seen.push(key);
                let mut row = vec![cell.n_units.to_string(), cell.distribution.to_string()];
                for v in TABLE2_VARIANTS {
                    for &t in periods {
                        let hit = cells
                            .iter()
                            .find(|x| {
                                x.n_units == key.0
                                    && x.distribution == key.1
                                    && x.n_periods == t
                                    && x.report.variant == v
                            })
                            .expect("grid covers every cell");
                        row.push(num(hit.report.rate));
                    }
                }
                rows.push(row);
            }
            Ok(Report::table(to_value(&cells), &header, rows))
        }
        CommandConfig::DfCdf(c) => {
            let values = c
                .x
                .iter()
                .map(|&x| Ok((x, imhof_cdf(c.model, x, c.c, c.r, &c.imhof)?)))
                .collect::<Result<Vec<_>>>()?;
            let rows = values
                .iter()
                .map(|(x, f)| vec![c.model.to_string(), num(*x), num(c.c), num(c.r), num(*f)])
                .collect();
            let result = json!({
                "model": c.model,
                "c": c.c,
                "r": c.r,
                "points": values.iter().map(|(x, f)| json!({"x": x, "cdf": f})).collect::<Vec<_>>(),
            });
            Ok(Report::table(result, &["model", "x", "c", "r", "cdf"], rows))
        }
    }
}
