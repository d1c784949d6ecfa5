use rayon::prelude::*;

use mwp_core::cobb_douglas::{cd_cost_point, cd_scalar_identities};
use mwp_core::expansion_path::{discrete_mwp, mwp_responsible, path_point, scalar_mp_report};
use mwp_core::ledger::impute;
use mwp_core::leontief::{sraffa_mwp_labor, sraffa_wp, verify_equilibrium, year_end_value, LeontiefError};
use mwp_core::product_vectors::value;

use crate::economy::{LeontiefSetup, Smooth};
use crate::error::CliError;
use crate::report::{Cell, Frame, Report, Section, Value};

fn solver(e: impl std::fmt::Display) -> CliError {
    CliError::Solver(e.to_string())
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub struct AnalyzeOptions {
    pub y: f64,
    pub factor: usize,
    pub delta_y: f64,
    pub tol: f64,
}

pub fn analyze(eco: &Smooth, opts: &AnalyzeOptions) -> Result<Report, CliError> {
    let f = eco.function.as_ref();
    let (w, p) = (eco.w(), eco.p());
    let labels = eco.vector_labels();
    let point = path_point(f, w, opts.y).map_err(solver)?;
    let mut report = Report::default();

    report.push(
        Section::new("cost_solution")
            .num("y", point.y)
            .with("x", Value::vector(&eco.inputs, &point.x))
            .num("lambda", point.lambda)
            .num("cost", point.cost),
    );
    report.push(
        Section::new("expansion_point")
            .with("dphi_dy", Value::vector(&eco.inputs, &point.dphi_dy))
            .with("dphi_dy_fd", Value::vector(&eco.inputs, &point.dphi_dy_fd))
            .num("fd_discrepancy", point.fd_discrepancy())
            .num("mc", point.mc)
            .with("mp", Value::vector(&eco.inputs, &point.mp))
            .num("mp_dphi_sum", point.mp_dphi_sum()),
    );

    let scalar = scalar_mp_report(&point, w, p);
    report.push(
        Section::new("scalar_mp")
            .num("p", p)
            .num("p_minus_mc", scalar.p_minus_mc)
            .with("p_mp_minus_w", Value::vector(&eco.inputs, &scalar.residuals)),
    );

    let mwp = point.mwp();
    let value_mwp = value(&eco.prices, &mwp).map_err(solver)?;
    report.push(Section::new("mwp").with("vector", Value::product(&labels, &mwp)).num("value", value_mwp));

    let discrete = discrete_mwp(f, w, opts.y, opts.delta_y).map_err(solver)?;
    report.push(
        Section::new("discrete_mwp")
            .num("delta_y", opts.delta_y)
            .with("vector", Value::product(&labels, &discrete))
            .num("value", value(&eco.prices, &discrete).map_err(solver)?),
    );

    let resp = mwp_responsible(f, w, opts.y, opts.factor).map_err(solver)?;
    let value_resp = value(&eco.prices, &resp).map_err(solver)?;
    let w_factor = w[opts.factor];
    report.push(
        Section::new("mwp_responsible")
            .with("factor", Value::Text(eco.inputs[opts.factor].clone()))
            .with("vector", Value::product(&labels, &resp))
            .num("value", value_resp)
            .num("factor_price", w_factor)
            .num("value_minus_factor_price", value_resp - w_factor),
    );

    // P.MWP = p - MC and P.MWP_f - w_f = (p - MC) / (dphi_f/dy)
    let gap_mwp = value_mwp - scalar.p_minus_mc;
    let gap_resp = value_resp - w_factor - scalar.p_minus_mc / point.dphi_dy[opts.factor];
    let gap_sum = point.mp_dphi_sum() - 1.0;
    let gap_lambda = point.lambda - point.mc;
    let mut identities = Section::new("identities")
        .num("tolerance", opts.tol)
        .num("mwp_value_gap", gap_mwp)
        .num("responsible_value_gap", gap_resp)
        .num("mp_dphi_sum_gap", gap_sum)
        .num("lambda_minus_mc", gap_lambda);
    let mut worst = [gap_mwp, gap_resp, gap_sum, gap_lambda].iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    if let Some(cd) = &eco.cd {
        let (r, wl) = (w[0], w[1]);
        let ids = cd_scalar_identities(cd, p, r, wl, point.x[1]).map_err(solver)?;
        let oracle = cd_cost_point(cd, r, wl, opts.y).map_err(solver)?;
        let oracle_gap = [
            rel_diff(point.x[0], oracle.capital),
            rel_diff(point.x[1], oracle.labor),
            rel_diff(point.lambda, oracle.marginal_cost),
            rel_diff(point.dphi_dy[0], oracle.dphi_dy[0]),
            rel_diff(point.dphi_dy[1], oracle.dphi_dy[1]),
        ]
        .into_iter()
        .fold(0.0_f64, f64::max);
        let conversion = ids.conversion_gap();
        let exhaustion = ids.exhaustion_gap();
        identities = identities
            .num("p_mp_l", ids.p_mp_l)
            .num("value_mwp_l", ids.value_mwp_l)
            .num("converted_p_mp_l", ids.converted_p_mp_l)
            .num("conversion_gap", conversion)
            .num("exhaustion_gap", exhaustion)
            .num("closed_form_max_rel_diff", oracle_gap);
        worst = worst.max(conversion.abs()).max(exhaustion.abs() / ids.scaled_output.abs().max(1.0));
        worst = worst.max(oracle_gap);
    }
    report.push(identities.with("all_hold", Value::Flag(worst <= opts.tol)));

    if eco.n() == 2 {
        report.push(ledger_section(point.y, point.x[0], point.x[1], &eco.prices)?);
    }
    Ok(report)
}

fn ledger_section(q: f64, k: f64, l: f64, prices: &mwp_core::PriceSystem) -> Result<Section, CliError> {
    let rep = impute(q, k, l, prices).map_err(|e| CliError::Config(e.to_string()))?;
    let row = |v: &mwp_core::ProductVector, val: f64| {
        let mut c = v.components();
        c.push(val);
        c
    };
    Ok(Section::new("ledger")
        .with(
            "imputation",
            Value::Table {
                columns: vec!["Q".into(), "K".into(), "L".into(), "value".into()],
                rows: vec![
                    ("labor responsible for (WP_L)".into(), row(&rep.wp_l, rep.value_added)),
                    ("labor appropriates (0,0,L)".into(), row(&rep.labor_commodity, rep.labor_cost)),
                    ("whole product (WP)".into(), row(&rep.wp, rep.profit)),
                ],
            },
        )
        .num("value_added", rep.value_added)
        .num("labor_cost", rep.labor_cost)
        .num("profit", rep.profit)
        .with("zero_profit", Value::Flag(rep.zero_profit)))
}

pub fn ledger(q: f64, k: f64, l: f64, prices: &mwp_core::PriceSystem) -> Result<Report, CliError> {
    if [q, k, l].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(CliError::Config("Q, K and L must be non-negative".into()));
    }
    let mut report = Report::default();
    report.push(ledger_section(q, k, l, prices)?);
    Ok(report)
}

/// Evenly spaced grid; a single step gives `y_min`.
pub fn grid(y_min: f64, y_max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CliError::Config("--steps must be at least 1".into()));
    }
    if !(y_min.is_finite() && y_max.is_finite() && y_min > 0.0 && y_max >= y_min) {
        return Err(CliError::Config("need 0 < y-min <= y-max".into()));
    }
    if steps == 1 {
        return Ok(vec![y_min]);
    }
    let h = (y_max - y_min) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { y_max } else { y_min + h * i as f64 }).collect())
}

/// Path trace; returns the frame and how many rows failed.
pub fn path(eco: &Smooth, ys: &[f64]) -> (Frame, usize) {
    let n = eco.n();
    let mut columns = vec!["y".to_string()];
    columns.extend(eco.inputs.iter().cloned());
    columns.push("MC".into());
    columns.extend(eco.inputs.iter().map(|l| format!("MP_{l}")));
    columns.push("MWP_y".into());
    columns.extend(eco.inputs.iter().map(|l| format!("MWP_{l}")));
    columns.push("status".into());

    let f = eco.function.as_ref();
    let rows: Vec<(Vec<Cell>, bool)> = ys
        .par_iter()
        .map(|&y| match path_point(f, eco.w(), y) {
            Ok(pt) => {
                let mut row = vec![Cell::Number(y)];
                row.extend(pt.x.iter().map(|v| Cell::Number(*v)));
                row.push(Cell::Number(pt.mc));
                row.extend(pt.mp.iter().map(|v| Cell::Number(*v)));
                row.extend(pt.mwp().components().into_iter().map(Cell::Number));
                row.push(Cell::Text("ok".into()));
                (row, false)
            }
            Err(e) => {
                let mut row = vec![Cell::Number(y)];
                row.extend((0..2 * n + 2 + n).map(|_| Cell::Number(f64::NAN)));
                row.push(Cell::Text(format!("failed: {e}")));
                (row, true)
            }
        })
        .collect();
    let flagged = rows.iter().filter(|(_, bad)| *bad).count();
    (Frame { columns, rows: rows.into_iter().map(|(r, _)| r).collect() }, flagged)
}

pub fn leontief(setup: &LeontiefSetup, tol: f64) -> Result<Report, CliError> {
    let econ = &setup.economy;
    let n = econ.goods();
    let check = verify_equilibrium(econ).map_err(|e| match e {
        LeontiefError::NonViable { radius } => {
            CliError::Solver(format!("economy is not viable: spectral radius of (1+r)A = {radius:.17e}"))
        }
        other => solver(other),
    })?;
    let p = &check.prices;
    let goods: Vec<String> = (1..=n).map(|i| format!("good{i}")).collect();
    let mut labels: Vec<String> = (1..=n).map(|i| format!("out{i}")).collect();
    labels.extend((1..=n).map(|i| format!("in{i}")));
    labels.push("labor".into());

    let wp = sraffa_wp(econ, &setup.x).map_err(solver)?;
    let wp_l = wp.of_labor();
    let mut report = Report::default();
    report.push(
        Section::new("economy")
            .with("goods", Value::Count(n))
            .num("r", econ.r)
            .num("w", econ.w)
            .num("spectral_radius", check.spectral_radius)
            .with("gross_output", Value::vector(&goods, &setup.x)),
    );
    report.push(Section::new("prices").with("p", Value::vector(&goods, p)));
    report.push(
        Section::new("whole_product")
            .with("wp", Value::vector(&labels, &wp.components()))
            .num("value_wp", year_end_value(econ, p, &wp))
            .with("wp_l", Value::vector(&labels, &wp_l.components()))
            .num("value_wp_l", year_end_value(econ, p, &wp_l)),
    );

    let mut columns = labels.clone();
    columns.extend(["value".to_string(), "wage_cost".to_string(), "residual".to_string()]);
    let mut rows = Vec::with_capacity(n);
    for (j, good) in goods.iter().enumerate() {
        let m = sraffa_mwp_labor(econ, j).map_err(solver)?;
        let v = year_end_value(econ, p, &m.vector);
        let cost = econ.w * m.labor_required;
        let mut row = m.vector.components();
        row.extend([v, cost, check.mwp_residuals[j]]);
        rows.push((good.clone(), row));
    }
    report.push(Section::new("labor_marginals").with("mwp_l", Value::Table { columns, rows }));

    let worst = check.max_relative_residual();
    report.push(
        Section::new("residuals")
            .with("price_condition", Value::vector(&goods, &check.condition_residual))
            .with("mwp_l_condition", Value::vector(&goods, &check.mwp_residuals))
            .num("max_relative", worst)
            .num("tolerance", tol)
            .with("holds", Value::Flag(worst <= tol)),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        assert_eq!(grid(1.0, 5.0, 5).unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(grid(2.0, 5.0, 1).unwrap(), vec![2.0]);
        assert!(grid(1.0, 5.0, 0).is_err());
        assert!(grid(5.0, 1.0, 3).is_err());
        assert!(grid(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn ledger_rejects_negative_quantities() {
        let p = mwp_core::PriceSystem::new(1.0, vec![1.0, 1.0]).unwrap();
        assert!(ledger(1.0, -1.0, 1.0, &p).is_err());
        assert!(ledger(1.0, 1.0, 1.0, &p).is_ok());
    }
}
