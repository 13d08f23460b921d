use qsm_core::measures::{
    blp_measure, cp_divisibility_scan, divisibility_boundary, holevo_curve, sss_measure, uniform_grid, MeasureForm,
    ReferenceMode, StepStatus,
};
use qsm_core::quantum::DephasingNormalization;
use qsm_core::semimarkov::{classical_jump_simulate, regime_classify, Regime};
use qsm_core::{
    DensityMatrix, DephasingSemiMarkov, Error, HolevoEnsemble, NonUnitalSemiMarkov, SssConfig, WaitingTimeDist,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::args::{Cli, Command, Family, Form, Mode, Wtd};
use crate::error::CliError;
use crate::output::{config_num, Column, Excision, Table};

/// Effective dephasing parameters after resolving `(λ1, λ2)` into `(s, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dephasing {
    s: f64,
    p: f64,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn family(cli: &Cli) -> Family {
    cli.family.unwrap_or(if cli.lambda.is_some() {
        Family::Nonunital
    } else {
        Family::Dephasing
    })
}

fn require_dephasing(cli: &Cli, command: Command) -> Result<(), CliError> {
    if family(cli) == Family::Nonunital {
        return Err(config_err(format!(
            "`{}` supports only the dephasing family",
            command.name()
        )));
    }
    Ok(())
}

fn check_positive(name: &str, value: f64) -> Result<f64, CliError> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(config_err(format!("--{name} must be positive, got {value}")));
    }
    Ok(value)
}

fn check_grid(grid: usize) -> Result<usize, CliError> {
    if grid < 2 {
        return Err(config_err(format!("--grid must be at least 2, got {grid}")));
    }
    Ok(grid)
}

fn dephasing_s(cli: &Cli, default_s: f64) -> Result<f64, CliError> {
    Ok(dephasing_params(cli, default_s, 0.0)?.s)
}

fn dephasing_params(cli: &Cli, default_s: f64, default_p: f64) -> Result<Dephasing, CliError> {
    if cli.lambda.is_some() {
        return Err(config_err("--lambda belongs to the nonunital family"));
    }
    let rates = (cli.lambda1, cli.lambda2);
    if rates != (None, None) {
        if cli.s.is_some() || cli.p.is_some() {
            return Err(config_err("--lambda1/--lambda2 and --s/--p are mutually exclusive"));
        }
        let (Some(l1), Some(l2)) = rates else {
            return Err(config_err("--lambda1 and --lambda2 must be given together"));
        };
        if !(l1 >= 0.0 && l2 >= 0.0 && l1 + l2 > 0.0) {
            return Err(config_err(format!(
                "rates must be non-negative with positive sum, got {l1}, {l2}"
            )));
        }
        return Ok(Dephasing { s: l1 + l2, p: l1 * l2 });
    }
    let s = check_positive("s", cli.s.unwrap_or(default_s))?;
    let p = cli.p.unwrap_or(default_p);
    if !(p >= 0.0) || !p.is_finite() {
        return Err(config_err(format!("--p must be non-negative, got {p}")));
    }
    Ok(Dephasing { s, p })
}

fn nonunital_lambda(cli: &Cli) -> Result<f64, CliError> {
    if cli.s.is_some() || cli.p.is_some() || cli.lambda1.is_some() || cli.lambda2.is_some() {
        return Err(config_err(
            "the nonunital family takes --lambda, not --s/--p/--lambda1/--lambda2",
        ));
    }
    let lambda = cli.lambda.unwrap_or(1.0);
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(config_err(format!("--lambda must be non-negative, got {lambda}")));
    }
    Ok(lambda)
}

fn grid_times(t_max: f64, points: usize) -> Vec<f64> {
    uniform_grid(t_max, points - 1)
}

fn sweep(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

fn base_config(entries: &[(&str, Value)]) -> Map<String, Value> {
    entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub fn run(command: Command, cli: &Cli) -> Result<Table, CliError> {
    match command {
        Command::Rate => rate(cli),
        Command::Measure => measure(cli),
        Command::Holevo => holevo(cli),
        Command::Blp => blp(cli),
        Command::Divisibility => divisibility(cli),
        Command::ClassicalSim => classical_sim(cli),
        Command::KernelCheck => kernel_check(cli),
    }
}

fn rate(cli: &Cli) -> Result<Table, CliError> {
    require_dephasing(cli, Command::Rate)?;
    let Dephasing { s, p } = dephasing_params(cli, 1.0, 3.0)?;
    let t_max = check_positive("t-max", cli.t_max.unwrap_or(6.0))?;
    let grid = check_grid(cli.grid.unwrap_or(500))?;
    let process = DephasingSemiMarkov::new(s, p)?;
    let times = grid_times(t_max, grid);
    let gamma = times
        .iter()
        .map(|&t| match process.rate(t) {
            Ok(g) => Ok(g),
            Err(Error::Singularity { .. }) => Ok(f64::NAN),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    let q: Vec<f64> = times.iter().map(|&t| process.q(t)).collect();

    let mut table = Table::new(
        "rate",
        base_config(&[
            ("family", json!("dephasing")),
            ("s", config_num(s)),
            ("p", config_num(p)),
            ("t_max", config_num(t_max)),
            ("grid", json!(grid)),
        ]),
    );
    table.push(Column::number("t", times));
    table.push(Column::number("gamma", gamma));
    table.push(Column::number("q", q).unplotted());
    table.metadata.singularities = process.zeros_of_q(t_max);
    table
        .metadata
        .extra
        .push(("regime".into(), json!(process.regime().name())));
    Ok(table)
}

fn sss_config(cli: &Cli) -> Result<SssConfig, CliError> {
    let horizon = check_positive("T", cli.horizon.unwrap_or(1.0))?;
    let mode = match cli.mode.unwrap_or(Mode::Paper) {
        Mode::Paper => ReferenceMode::PaperReference {
            gamma_ref: cli.gamma_ref.unwrap_or(0.0),
        },
        Mode::Min => {
            if cli.gamma_ref.is_some() {
                return Err(config_err("--gamma-ref applies only to --mode paper"));
            }
            ReferenceMode::TrueMinimum
        }
    };
    let form = match cli.form.unwrap_or(Form::Rate) {
        Form::Rate => MeasureForm::Rate,
        Form::Choi => MeasureForm::Choi,
    };
    let mut config = SssConfig::default()
        .with_horizon(horizon)
        .with_mode(mode)
        .with_form(form);
    if let Some(eps) = cli.epsilon {
        config = config.with_epsilon(check_positive("epsilon", eps)?);
    }
    Ok(config)
}

fn measure_config_echo(cli: &Cli, config: &SssConfig) -> Vec<(&'static str, Value)> {
    let mut echo = vec![
        ("T", config_num(config.horizon)),
        (
            "mode",
            json!(match config.mode {
                ReferenceMode::PaperReference { .. } => "paper",
                ReferenceMode::TrueMinimum => "min",
            }),
        ),
        (
            "form",
            json!(match config.form {
                MeasureForm::Rate => "rate",
                MeasureForm::Choi => "choi",
            }),
        ),
        ("epsilon", config_num(config.epsilon)),
    ];
    if let ReferenceMode::PaperReference { gamma_ref } = config.mode {
        echo.push(("gamma_ref", config_num(gamma_ref)));
    }
    if config.form == MeasureForm::Choi {
        echo.push(("dim", json!(cli.dim.unwrap_or(2))));
    }
    echo
}

fn measure(cli: &Cli) -> Result<Table, CliError> {
    let config = sss_config(cli)?;
    match family(cli) {
        Family::Dephasing => measure_dephasing(cli, &config),
        Family::Nonunital => measure_nonunital(cli, &config),
    }
}

fn measure_dephasing(cli: &Cli, config: &SssConfig) -> Result<Table, CliError> {
    let s = dephasing_s(cli, 1.0)?;
    let ps: Vec<f64> = if let Some(list) = &cli.p_list {
        list.clone()
    } else if let Some(p) = cli.p {
        vec![p]
    } else if cli.lambda1.is_some() {
        vec![dephasing_params(cli, 1.0, 0.0)?.p]
    } else {
        let points = cli.points.unwrap_or(51);
        if points == 0 {
            return Err(config_err("--points must be at least 1"));
        }
        let lo = cli.p_min.unwrap_or(0.0);
        let hi = cli.p_max.unwrap_or(0.5);
        if !(lo >= 0.0 && hi >= lo) {
            return Err(config_err(format!("invalid p range [{lo}, {hi}]")));
        }
        sweep(lo, hi, points)
    };
    if let Some(p) = ps.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(config_err(format!("p values must be non-negative, got {p}")));
    }
    let dim = cli.dim.unwrap_or(2);
    if dim < 2 {
        return Err(config_err(format!("--dim must be at least 2, got {dim}")));
    }
    let choi = config.form == MeasureForm::Choi;

    // Rows are evaluated in parallel; collect keeps input order.
    let results = ps
        .par_iter()
        .map(|&p| {
            let mut process = DephasingSemiMarkov::new(s, p)?;
            if choi {
                process = process.with_choi_generator(dim, DephasingNormalization::PerDimension)?;
            }
            sss_measure(&process, config)
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut echo = vec![("family", json!("dephasing")), ("s", config_num(s))];
    echo.extend(measure_config_echo(cli, config));
    let mut table = Table::new("measure", base_config(&echo));
    let regimes: Vec<Regime> = ps.iter().map(|&p| regime_classify(s, p)).collect();
    table.push(Column::number("p", ps.clone()));
    table.push(Column::number("xi", results.iter().map(|r| r.xi).collect()));
    table.push(Column::number("zeta", results.iter().map(|r| r.zeta).collect()));
    table.push(Column::number("gamma_ref", results.iter().map(|r| r.gamma_ref).collect()).unplotted());
    table.push(Column::number("excised_measure", results.iter().map(|r| r.excised_measure).collect()).unplotted());
    table.push(Column::text(
        "regime",
        regimes.iter().map(|r| r.name().to_string()).collect(),
    ));
    table.push(
        Column::number(
            "cp_indivisible",
            regimes
                .iter()
                .map(|r| if *r == Regime::CPIndivisible { 1.0 } else { 0.0 })
                .collect(),
        )
        .unplotted(),
    );
    if choi {
        let details: Vec<_> = results
            .iter()
            .map(|r| r.choi.expect("choi form reports details"))
            .collect();
        table.push(Column::number("family_constant", details.iter().map(|d| d.family_constant).collect()).unplotted());
        table.push(Column::number(
            "xi_normalized",
            details.iter().map(|d| d.normalized).collect(),
        ));
    }
    for (row, r) in results.iter().enumerate() {
        table
            .metadata
            .excised
            .extend(r.excised.iter().map(|&(from, to)| Excision { row, from, to }));
    }
    table
        .metadata
        .extra
        .push(("regime_boundary_p".into(), config_num(s * s / 8.0)));
    Ok(table)
}

fn measure_nonunital(cli: &Cli, config: &SssConfig) -> Result<Table, CliError> {
    let lambda = nonunital_lambda(cli)?;
    let process = NonUnitalSemiMarkov::new(lambda)?;
    let r = sss_measure(&process, config)?;
    let mut echo = vec![("family", json!("nonunital")), ("lambda", config_num(lambda))];
    echo.extend(measure_config_echo(cli, config));
    let mut table = Table::new("measure", base_config(&echo));
    table.push(Column::number("lambda", vec![lambda]));
    table.push(Column::number("xi", vec![r.xi]));
    table.push(Column::number("zeta", vec![r.zeta]));
    table.push(Column::number("gamma_ref", vec![r.gamma_ref]).unplotted());
    if let Some(d) = r.choi {
        table.push(Column::number("family_constant", vec![d.family_constant]).unplotted());
        table.push(Column::number("xi_normalized", vec![d.normalized]));
    }
    Ok(table)
}

fn holevo(cli: &Cli) -> Result<Table, CliError> {
    require_dephasing(cli, Command::Holevo)?;
    let s = dephasing_s(cli, 1.0)?;
    let ps = cli
        .p_list
        .clone()
        .or(cli.p.map(|p| vec![p]))
        .unwrap_or_else(|| vec![2.0, 0.1, 0.01]);
    let t_max = check_positive("t-max", cli.t_max.unwrap_or(6.0))?;
    let grid = check_grid(cli.grid.unwrap_or(500))?;
    let times = grid_times(t_max, grid);
    let ensemble = HolevoEnsemble::plus_minus();
    let curves = ps
        .par_iter()
        .map(|&p| holevo_curve(&DephasingSemiMarkov::new(s, p)?, &ensemble, &times))
        .collect::<Result<Vec<_>, Error>>()?;

    let mut table = Table::new(
        "holevo",
        base_config(&[
            ("family", json!("dephasing")),
            ("s", config_num(s)),
            ("p_list", Value::Array(ps.iter().map(|&p| config_num(p)).collect())),
            ("t_max", config_num(t_max)),
            ("grid", json!(grid)),
            ("ensemble", json!("plus_minus")),
        ]),
    );
    table.push(Column::number("t", times));
    for (p, curve) in ps.iter().zip(curves) {
        table.push(Column::number(
            format!("chi_p={}", crate::output::fmt_num(*p)),
            curve.into_iter().map(|(_, chi)| chi).collect(),
        ));
    }
    Ok(table)
}

fn blp(cli: &Cli) -> Result<Table, CliError> {
    let t_max = check_positive("t-max", cli.t_max.unwrap_or(10.0))?;
    let grid = check_grid(cli.grid.unwrap_or(4001))?;
    let times = grid_times(t_max, grid);
    let pair = (DensityMatrix::plus(), DensityMatrix::minus());
    let (result, mut echo) = match family(cli) {
        Family::Dephasing => {
            let Dephasing { s, p } = dephasing_params(cli, 1.0, 0.1)?;
            let process = DephasingSemiMarkov::new(s, p)?;
            let r = blp_measure(&process, &times, (&pair.0, &pair.1))?;
            (
                r,
                vec![
                    ("family", json!("dephasing")),
                    ("s", config_num(s)),
                    ("p", config_num(p)),
                ],
            )
        }
        Family::Nonunital => {
            let lambda = nonunital_lambda(cli)?;
            let process = NonUnitalSemiMarkov::new(lambda)?;
            let r = blp_measure(&process, &times, (&pair.0, &pair.1))?;
            (r, vec![("family", json!("nonunital")), ("lambda", config_num(lambda))])
        }
    };
    echo.extend([
        ("t_max", config_num(t_max)),
        ("grid", json!(grid)),
        ("pair", json!("plus_minus")),
    ]);
    let mut table = Table::new("blp", base_config(&echo));
    table.push(Column::number("t", times));
    table.push(Column::number("trace_distance", result.distances));
    table.metadata.extra.push(("blp".into(), config_num(result.value)));
    table.metadata.extra.push((
        "revival_intervals".into(),
        Value::Array(
            result
                .revival_intervals
                .iter()
                .map(|&(a, b)| json!([config_num(a), config_num(b)]))
                .collect(),
        ),
    ));
    Ok(table)
}

fn divisibility(cli: &Cli) -> Result<Table, CliError> {
    require_dephasing(cli, Command::Divisibility)?;
    if cli.boundary_search {
        return divisibility_boundary_search(cli);
    }
    let Dephasing { s, p } = dephasing_params(cli, 1.0, 3.0)?;
    let t_max = check_positive("t-max", cli.t_max.unwrap_or(10.0))?;
    let grid = check_grid(cli.grid.unwrap_or(1001))?;
    let process = DephasingSemiMarkov::new(s, p)?;
    let report = cp_divisibility_scan(&process, &grid_times(t_max, grid))?;

    let mut table = Table::new(
        "divisibility",
        base_config(&[
            ("family", json!("dephasing")),
            ("s", config_num(s)),
            ("p", config_num(p)),
            ("t_max", config_num(t_max)),
            ("grid", json!(grid)),
        ]),
    );
    let (mut status, mut min_eig, mut condition) = (Vec::new(), Vec::new(), Vec::new());
    for step in &report.steps {
        let (name, eig, cond) = match step.status {
            StepStatus::Divisible { min_eigenvalue } => ("divisible", min_eigenvalue, f64::NAN),
            StepStatus::Violation { min_eigenvalue } => ("violation", min_eigenvalue, f64::NAN),
            StepStatus::SingularMap { condition } => ("singular", f64::NAN, condition),
        };
        status.push(name.to_string());
        min_eig.push(eig);
        condition.push(cond);
    }
    table.push(Column::number("t1", report.steps.iter().map(|s| s.t1).collect()));
    table.push(Column::number("t2", report.steps.iter().map(|s| s.t2).collect()).unplotted());
    table.push(Column::number("min_eigenvalue", min_eig));
    table.push(Column::number("condition", condition).unplotted());
    table.push(Column::text("status", status));
    table.metadata.singularities = process.zeros_of_q(t_max);
    let extra = &mut table.metadata.extra;
    extra.push(("divisible".into(), json!(report.is_divisible())));
    extra.push(("violations".into(), json!(report.violations().len())));
    extra.push(("singular_steps".into(), json!(report.singular_steps())));
    extra.push(("regime".into(), json!(process.regime().name())));
    Ok(table)
}

fn divisibility_boundary_search(cli: &Cli) -> Result<Table, CliError> {
    let s = dephasing_s(cli, 1.0)?;
    let lo = cli.p_min.unwrap_or(0.0);
    let hi = cli.p_max.unwrap_or(0.5 * s * s);
    let t_max = check_positive("t-max", cli.t_max.unwrap_or(80.0))?;
    let grid = check_grid(cli.grid.unwrap_or(8001))?;
    let tol = 1e-4;
    let estimate = divisibility_boundary(s, (lo, hi), &grid_times(t_max, grid), tol)?;
    let mut table = Table::new(
        "divisibility",
        base_config(&[
            ("family", json!("dephasing")),
            ("s", config_num(s)),
            ("boundary_search", json!(true)),
            ("p_min", config_num(lo)),
            ("p_max", config_num(hi)),
            ("t_max", config_num(t_max)),
            ("grid", json!(grid)),
            ("tolerance", config_num(tol)),
        ]),
    );
    table.push(Column::number("s", vec![s]));
    table.push(Column::number("p_boundary", vec![estimate.estimate]));
    table.push(Column::number("p_divisible", vec![estimate.bracket.0]).unplotted());
    table.push(Column::number("p_indivisible", vec![estimate.bracket.1]).unplotted());
    table.push(Column::number("iterations", vec![estimate.iterations as f64]).unplotted());
    table.push(Column::number("p_closed_form", vec![s * s / 8.0]));
    Ok(table)
}

fn classical_sim(cli: &Cli) -> Result<Table, CliError> {
    let seed = cli
        .seed
        .ok_or_else(|| config_err("classical-sim needs --seed for reproducibility"))?;
    let kind = cli.wtd.unwrap_or(Wtd::Convolution);
    let (wtd, rates) = match kind {
        Wtd::Exponential => {
            let rate = cli.lambda.unwrap_or(1.0);
            (WaitingTimeDist::exponential(rate)?, json!([config_num(rate)]))
        }
        Wtd::Convolution => {
            let (l1, l2) = match (cli.lambda1, cli.lambda2) {
                (None, None) => (1.0, 2.0),
                (Some(a), Some(b)) => (a, b),
                _ => return Err(config_err("--lambda1 and --lambda2 must be given together")),
            };
            (
                WaitingTimeDist::exp_convolution(l1, l2)?,
                json!([config_num(l1), config_num(l2)]),
            )
        }
        Wtd::TanhSech => {
            let rate = cli.lambda.unwrap_or(1.0);
            (WaitingTimeDist::tanh_sech(rate)?, json!([config_num(rate)]))
        }
    };
    let pi = cli.pi.unwrap_or(0.5);
    let paths = cli.paths.unwrap_or(100_000);
    let t_max = check_positive("t-max", cli.t_max.unwrap_or(2.0))?;
    let grid = check_grid(cli.grid.unwrap_or(5))?;
    let times = grid_times(t_max, grid);
    let sim = classical_jump_simulate(&wtd, pi, &times, paths, seed)?;
    let exact = times
        .iter()
        .map(|&t| wtd.survival(t))
        .collect::<Result<Vec<f64>, Error>>()?;

    let mut table = Table::new(
        "classical-sim",
        base_config(&[
            (
                "wtd",
                json!(match kind {
                    Wtd::Exponential => "exponential",
                    Wtd::Convolution => "convolution",
                    Wtd::TanhSech => "tanh-sech",
                }),
            ),
            ("rates", rates),
            ("pi", config_num(pi)),
            ("paths", json!(paths)),
            ("seed", json!(seed)),
            ("t_max", config_num(t_max)),
            ("grid", json!(grid)),
        ]),
    );
    let occupation1 = sim.occupation1();
    table.push(Column::number("t", sim.times));
    table.push(Column::number("survival", sim.survival));
    table.push(Column::number("survival_stderr", sim.survival_stderr).unplotted());
    table.push(Column::number("survival_exact", exact));
    table.push(Column::number("occupation0", sim.occupation0));
    table.push(Column::number("occupation1", occupation1).unplotted());
    table.push(Column::number("occupation_stderr", sim.occupation_stderr).unplotted());
    Ok(table)
}

fn kernel_check(cli: &Cli) -> Result<Table, CliError> {
    require_dephasing(cli, Command::KernelCheck)?;
    let Dephasing { s, p } = dephasing_params(cli, 1.0, 0.1)?;
    let dt = check_positive("dt", cli.dt.unwrap_or(1e-3))?;
    let t_max = check_positive("t-max", cli.t_max.unwrap_or(5.0))?;
    let process = DephasingSemiMarkov::new(s, p)?;
    let deviation = |dt: f64| -> Result<f64, Error> {
        let (times, q) = process.volterra_coherence(t_max, dt)?;
        Ok(times
            .iter()
            .zip(&q)
            .map(|(&t, &v)| (v - process.q(t)).abs())
            .fold(0.0, f64::max))
    };
    let steps = [dt, 0.5 * dt];
    let deviations = steps
        .par_iter()
        .map(|&h| deviation(h))
        .collect::<Result<Vec<f64>, Error>>()?;
    let order = (deviations[0] / deviations[1]).log2();

    let mut table = Table::new(
        "kernel-check",
        base_config(&[
            ("family", json!("dephasing")),
            ("s", config_num(s)),
            ("p", config_num(p)),
            ("dt", config_num(dt)),
            ("t_max", config_num(t_max)),
        ]),
    );
    table.push(Column::number("dt", steps.to_vec()));
    table.push(Column::number("max_deviation", deviations.clone()));
    table
        .metadata
        .extra
        .push(("error_ratio".into(), config_num(deviations[0] / deviations[1])));
    table.metadata.extra.push(("order".into(), config_num(order)));
    Ok(table)
}
