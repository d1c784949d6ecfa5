//! Invariant checks run by `mwp verify`.
//!
//! Every check reduces to one measured residual compared against a
//! tolerance. Random instances come from a seeded ChaCha stream so that
//! reruns are identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mwp_core::cobb_douglas::{cd_cost_point, cd_labor_for_wage, cd_scalar_identities, WageCondition};
use mwp_core::expansion_path::{discrete_mwp, integrate_responsible, mwp_responsible, path_point};
use mwp_core::ledger::impute;
use mwp_core::leontief::{spectral_radius, verify_equilibrium, LeontiefEconomy};
use mwp_core::product_vectors::value;
use mwp_core::{parse, CobbDouglasParams, PriceSystem};

use crate::economy::{Economy, Smooth};
use crate::report::{Cell, Frame};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub note: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Running maximum of a residual, remembering the first failure message.
struct Tally {
    cases: usize,
    worst: f64,
    note: String,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, worst: 0.0, note: String::new() }
    }

    fn add(&mut self, r: f64) {
        self.cases += 1;
        if r.is_nan() {
            self.worst = f64::INFINITY;
        } else if r > self.worst {
            self.worst = r;
        }
    }

    fn fail(&mut self, msg: impl std::fmt::Display) {
        self.cases += 1;
        self.worst = f64::INFINITY;
        if self.note.is_empty() {
            self.note = msg.to_string();
        }
    }
}

pub struct Battery {
    rng: ChaCha8Rng,
    tol_override: Option<f64>,
    pub checks: Vec<Check>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy)]
struct CdCase {
    params: CobbDouglasParams,
    r: f64,
    w: f64,
    y: f64,
}

impl Battery {
    pub fn new(seed: u64, tol_override: Option<f64>) -> Self {
        Battery { rng: ChaCha8Rng::seed_from_u64(seed), tol_override, checks: Vec::new() }
    }

    fn record(&mut self, name: &str, tolerance: f64, tally: Tally) {
        self.checks.push(Check {
            name: name.to_string(),
            cases: tally.cases,
            residual: tally.worst,
            tolerance: self.tol_override.unwrap_or(tolerance),
            note: tally.note,
        });
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }

    pub fn frame(&self) -> Frame {
        Frame {
            columns: ["check", "cases", "residual", "tolerance", "status", "note"].map(String::from).to_vec(),
            rows: self
                .checks
                .iter()
                .map(|c| {
                    vec![
                        Cell::Text(c.name.clone()),
                        Cell::Text(c.cases.to_string()),
                        Cell::Number(c.residual),
                        Cell::Number(c.tolerance),
                        Cell::Text(if c.passed() { "PASS" } else { "FAIL" }.into()),
                        Cell::Text(c.note.clone()),
                    ]
                })
                .collect(),
        }
    }

    fn cd_case(&mut self) -> CdCase {
        let rng = &mut self.rng;
        let params = CobbDouglasParams::new(rng.gen_range(0.5..2.0), rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8))
            .expect("parameters in range");
        CdCase { params, r: rng.gen_range(0.5..2.0), w: rng.gen_range(0.5..2.0), y: rng.gen_range(0.5..5.0) }
    }

    pub fn run_default(&mut self) {
        self.cd_battery(200);
        self.reciprocal_witness();
        self.equivalence(50);
        self.adding_up();
        self.exhaustion(50);
        self.leontief_random(100);
        self.leontief_one_good();
        self.discrete(20);
        self.parser(100);
        self.ledger(100);
    }

    /// Closed-form agreement, multiplier = marginal cost, `sum MP dphi = 1`
    /// and the finite-difference cross-check, on one shared battery.
    fn cd_battery(&mut self, count: usize) {
        let cases: Vec<CdCase> = (0..count).map(|_| self.cd_case()).collect();
        let (mut oracle, mut lambda, mut sum, mut fd) = (Tally::new(), Tally::new(), Tally::new(), Tally::new());
        for c in &cases {
            let w = [c.r, c.w];
            let exact = cd_cost_point(&c.params, c.r, c.w, c.y).expect("valid case");
            let pt = match path_point(&c.params, &w, c.y) {
                Ok(pt) => pt,
                Err(e) => {
                    for t in [&mut oracle, &mut lambda, &mut sum, &mut fd] {
                        t.fail(&e);
                    }
                    continue;
                }
            };
            let resp = match mwp_responsible(&c.params, &w, c.y, 1) {
                Ok(v) => v,
                Err(e) => {
                    oracle.fail(e);
                    continue;
                }
            };
            let agreement = max_rel(&pt.x, &[exact.capital, exact.labor])
                .max(rel(pt.mc, exact.marginal_cost))
                .max(max_rel(&pt.mwp().components(), &exact.mwp().components()))
                .max(max_rel(&resp.components(), &exact.mwp_responsible(1).components()));
            oracle.add(agreement);
            lambda.add(rel(pt.lambda, pt.mc));
            sum.add((pt.mp_dphi_sum() - 1.0).abs());
            fd.add(pt.fd_discrepancy());
        }
        self.record("cd_closed_form_agreement", 1e-6, oracle);
        self.record("lambda_equals_marginal_cost", 1e-6, lambda);
        self.record("mp_dphi_sum_is_one", 1e-6, sum);
        self.record("dphi_dy_finite_difference", 1e-5, fd);
    }

    /// At `A=1, a=b=0.5, r=w=1, y=1`: `MP_L = 0.5` while `1/(dL/dy) = 1`.
    fn reciprocal_witness(&mut self) {
        let mut t = Tally::new();
        let params = CobbDouglasParams::new(1.0, 0.5, 0.5).expect("valid");
        match path_point(&params, &[1.0, 1.0], 1.0) {
            Ok(pt) => t.add((pt.mp[1] - 0.5).abs().max((1.0 / pt.dphi_dy[1] - 1.0).abs())),
            Err(e) => t.fail(e),
        }
        self.record("mp_is_not_reciprocal_dphi", 1e-6, t);
    }

    fn equivalence(&mut self, count: usize) {
        let (mut same, mut conversion) = (Tally::new(), Tally::new());
        let mut done = 0;
        while done < count {
            let c = self.cd_case();
            if (c.params.returns_to_scale() - 1.0).abs() < 0.1 {
                continue;
            }
            done += 1;
            let p = self.rng.gen_range(0.5..3.0);
            let scalar = cd_labor_for_wage(&c.params, p, c.r, c.w, WageCondition::Scalar);
            let vector = cd_labor_for_wage(&c.params, p, c.r, c.w, WageCondition::Vectorial);
            match (scalar, vector) {
                (Ok(ls), Ok(lv)) => same.add(rel(ls, lv)),
                (Err(e), _) | (_, Err(e)) => same.fail(e),
            }
            let labor = self.rng.gen_range(0.1..10.0);
            match cd_scalar_identities(&c.params, p, c.r, c.w, labor) {
                Ok(ids) => conversion.add(ids.conversion_gap().abs() / ids.p_mp_l.abs()),
                Err(e) => conversion.fail(e),
            }
        }
        self.record("scalar_vector_wage_equivalence", 1e-8, same);
        self.record("conversion_identity", 1e-8, conversion);
    }

    fn adding_up(&mut self) {
        let mut t = Tally::new();
        let mut cases = vec![
            (CobbDouglasParams::new(1.0, 0.5, 0.5).expect("valid"), 1.0, 1.0, 2.0),
            (CobbDouglasParams::new(1.0, 0.25, 0.25).expect("valid"), 1.0, 1.0, 1.5),
        ];
        for _ in 0..3 {
            let c = self.cd_case();
            cases.push((c.params, c.r, c.w, self.rng.gen_range(0.5..3.0)));
        }
        for (params, r, w, labor) in cases {
            let k = params.a * w / (params.b * r);
            let capital = k * labor;
            let q = params.output(capital, labor);
            match integrate_responsible(&params, &[r, w], labor, 1, 1e-8) {
                Ok(res) => {
                    let got = res.integral.components();
                    t.add([q, -capital, 0.0].iter().zip(&got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
                }
                Err(e) => t.fail(e),
            }
        }
        self.record("adding_up_integral", 1e-6, t);
    }

    fn exhaustion(&mut self, count: usize) {
        let mut t = Tally::new();
        let mut cases = vec![(1.0, 0.5, 0.5), (1.3, 0.25, 0.25), (0.7, 0.3, 0.7)];
        for _ in 0..count {
            let c = self.cd_case();
            cases.push((c.params.scale, c.params.a, c.params.b));
        }
        for (scale, a, b) in cases {
            let params = CobbDouglasParams::new(scale, a, b).expect("valid");
            let labor = self.rng.gen_range(0.1..10.0);
            match cd_scalar_identities(&params, 1.0, 1.0, 1.0, labor) {
                Ok(ids) => t.add(ids.exhaustion_gap().abs() / ids.scaled_output.abs()),
                Err(e) => t.fail(e),
            }
        }
        self.record("exhaustion_of_product", 1e-10, t);
    }

    fn random_economy(&mut self) -> LeontiefEconomy {
        let rng = &mut self.rng;
        let n = rng.gen_range(1..=6);
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| if rng.gen_bool(0.7) { rng.gen_range(0.0..1.0) } else { 0.0 }).collect())
            .collect();
        let a0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        let r = rng.gen_range(0.0..0.5);
        let w = rng.gen_range(0.5..2.0);
        let target = rng.gen_range(0.1..0.9);
        let draft = LeontiefEconomy::new(a.clone(), a0.clone(), r, w).expect("non-negative draw");
        let radius = spectral_radius(&draft);
        let s = if radius > 0.0 { target / radius } else { 1.0 };
        let a = a.into_iter().map(|row| row.into_iter().map(|v| v * s).collect()).collect();
        LeontiefEconomy::new(a, a0, r, w).expect("scaled draw")
    }

    fn leontief_random(&mut self, count: usize) {
        let mut t = Tally::new();
        for _ in 0..count {
            let econ = self.random_economy();
            match verify_equilibrium(&econ) {
                Ok(check) => t.add(check.max_relative_residual()),
                Err(e) => t.fail(e),
            }
        }
        self.record("leontief_equilibrium_residual", 1e-10, t);
    }

    fn leontief_one_good(&mut self) {
        let mut t = Tally::new();
        let econ = LeontiefEconomy::new(vec![vec![0.5]], vec![1.0], 0.0, 1.0).expect("valid");
        match verify_equilibrium(&econ) {
            Ok(check) => t.add(rel(check.prices[0], 2.0)),
            Err(e) => t.fail(e),
        }
        self.record("leontief_one_good_price", 1e-15, t);
    }

    fn discrete(&mut self, count: usize) {
        let mut t = Tally::new();
        for _ in 0..count {
            let c = self.cd_case();
            let w = [c.r, c.w];
            match (discrete_mwp(&c.params, &w, c.y, 1e-4), cd_cost_point(&c.params, c.r, c.w, c.y)) {
                (Ok(d), Ok(exact)) => {
                    let m = exact.mwp();
                    t.add(d.max_abs_diff(&m).unwrap_or(f64::INFINITY));
                }
                (Err(e), _) => t.fail(e),
                (_, Err(e)) => t.fail(e),
            }
        }
        self.record("discrete_to_continuous_mwp", 1e-3, t);
    }

    fn random_expression(&mut self, n: usize, depth: u32) -> String {
        let rng = &mut self.rng;
        if depth == 0 || rng.gen_bool(0.25) {
            return if rng.gen_bool(0.7) {
                format!("x{}", rng.gen_range(1..=n))
            } else {
                format!("{:.3}", rng.gen_range(0.5..3.0))
            };
        }
        let op = self.rng.gen_range(0..6);
        let a = self.random_expression(n, depth - 1);
        match op {
            0 => format!("({a} + {})", self.random_expression(n, depth - 1)),
            1 => format!("{a} * {}", self.random_expression(n, depth - 1)),
            2 => format!("{a} / ({})", self.random_expression(n, depth - 1)),
            3 => format!("({a})^({:.3})", self.rng.gen_range(-1.5..2.5)),
            4 => format!("exp(-{a})"),
            _ => format!("log(1 + {a})"),
        }
    }

    fn parser(&mut self, count: usize) {
        let (mut grad, mut trip) = (Tally::new(), Tally::new());
        for _ in 0..count {
            let n = self.rng.gen_range(1..=3);
            let text = self.random_expression(n, 4);
            let x: Vec<f64> = (0..n).map(|_| self.rng.gen_range(0.5..2.0)).collect();
            let expr = match parse(&text, n) {
                Ok(e) => e,
                Err(e) => {
                    grad.fail(format!("{text}: {e}"));
                    trip.fail(format!("{text}: {e}"));
                    continue;
                }
            };
            let printed = expr.to_string();
            match parse(&printed, n) {
                Ok(again) => trip.add(if again == expr && again.to_string() == printed { 0.0 } else { 1.0 }),
                Err(e) => trip.fail(format!("{printed}: {e}")),
            }
            match expr.grad(&x) {
                Ok(g) => {
                    let fd = richardson_gradient(|z| expr.eval(z).unwrap_or(f64::NAN), &x);
                    let worst = g.iter().zip(&fd).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)).fold(0.0, f64::max);
                    grad.add(worst);
                }
                Err(e) => grad.fail(format!("{text}: {e}")),
            }
        }
        self.record("parser_gradient_vs_fd", 1e-6, grad);
        self.record("parser_round_trip", 0.0, trip);
    }

    fn ledger(&mut self, count: usize) {
        let mut t = Tally::new();
        for _ in 0..count {
            let rng = &mut self.rng;
            let (q, k, l) = (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
            let prices =
                PriceSystem::new(rng.gen_range(0.0..10.0), vec![rng.gen_range(0.01..10.0), rng.gen_range(0.01..10.0)])
                    .expect("positive prices");
            let scale = 1.0 + prices.output_price * q + prices.input_prices[0] * k + prices.input_prices[1] * l;
            match impute(q, k, l, &prices) {
                Ok(rep) => {
                    let vals = [
                        value(&prices, &rep.wp).map(|v| v - rep.profit),
                        value(&prices, &rep.wp_l).map(|v| v - rep.value_added),
                        value(&prices, &rep.labor_commodity).map(|v| v - rep.labor_cost),
                        (&rep.wp_l - &rep.labor_commodity).max_abs_diff(&rep.wp),
                    ];
                    let worst = vals.iter().map(|v| v.as_ref().map_or(f64::INFINITY, |d| d.abs())).fold(0.0, f64::max);
                    t.add(worst / scale);
                }
                Err(e) => t.fail(e),
            }
        }
        self.record("ledger_consistency", 1e-12, t);
    }

    /// Checks tied to the economy given on the command line.
    pub fn run_for(&mut self, economy: &Economy, y: f64) {
        match economy {
            Economy::Smooth(s) => self.smooth_checks(s, y),
            Economy::Leontief(setup) => {
                let mut t = Tally::new();
                match verify_equilibrium(&setup.economy) {
                    Ok(check) => t.add(check.max_relative_residual()),
                    Err(e) => t.fail(e),
                }
                self.record("config_leontief_equilibrium", 1e-10, t);
            }
        }
    }

    fn smooth_checks(&mut self, s: &Smooth, y: f64) {
        let f = s.function.as_ref();
        let (mut lambda, mut sum, mut fd, mut oracle) = (Tally::new(), Tally::new(), Tally::new(), Tally::new());
        match path_point(f, s.w(), y) {
            Ok(pt) => {
                lambda.add(rel(pt.lambda, pt.mc));
                sum.add((pt.mp_dphi_sum() - 1.0).abs());
                fd.add(pt.fd_discrepancy());
                if let Some(cd) = &s.cd {
                    match cd_cost_point(cd, s.w()[0], s.w()[1], y) {
                        Ok(exact) => oracle.add(
                            max_rel(&pt.x, &[exact.capital, exact.labor])
                                .max(rel(pt.mc, exact.marginal_cost))
                                .max(max_rel(&pt.mwp().components(), &exact.mwp().components())),
                        ),
                        Err(e) => oracle.fail(e),
                    }
                }
            }
            Err(e) => {
                for t in [&mut lambda, &mut sum, &mut fd, &mut oracle] {
                    t.fail(&e);
                }
            }
        }
        self.record("config_lambda_equals_marginal_cost", 1e-6, lambda);
        self.record("config_mp_dphi_sum_is_one", 1e-6, sum);
        self.record("config_dphi_dy_finite_difference", 1e-5, fd);
        if s.cd.is_some() {
            self.record("config_cd_closed_form_agreement", 1e-6, oracle);
        }
    }
}

/// Central differences at steps `h` and `h/2` combined by Richardson
/// extrapolation.
fn richardson_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    let mut central = |i: usize, h: f64| {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        (up - down) / (2.0 * h)
    };
    (0..x.len())
        .map(|i| {
            let h = 1e-3 * x[i].abs().max(1e-3);
            let coarse = central(i, h);
            let fine = central(i, h / 2.0);
            (4.0 * fine - coarse) / 3.0
        })
        .collect()
}
