//! The four subcommands, each producing a [`Table`].

use anyhow::{bail, Context, Result};
use harq_core::outage::{
    asymptotic_outage, cc_threshold, cdf_y, ir_threshold, mgf_poles, type1_to_tolerance,
};
use harq_core::{
    allocate_closed_form, allocate_fixed, allocate_numerical_exact, estimate_all_schemes,
    AllocationProblem, AllocationResult, ChannelParams, Scheme,
};
use log::{info, warn};
use rayon::prelude::*;

use crate::config::{parse_grid, Method, Settings, SweepAxis};
use crate::table::{Cell, Table};

const DEFAULT_POWER_DB_GRID: &str = "0:30:5";
const DEFAULT_VALIDATE_POWER: f64 = 10.0;
const DEFAULT_ALLOCATE_METHODS: [Method; 3] = [Method::PpaAsymptotic, Method::PpaExact, Method::Fpa];
const DEFAULT_SWEEP_METHODS: [Method; 1] = [Method::PpaAsymptotic];

/// Number of standard errors tolerated by `validate`.
pub const VALIDATE_SIGMAS: f64 = 3.0;

fn power_columns(rounds: usize) -> impl Iterator<Item = String> {
    (1..=rounds).map(|i| format!("P{i}"))
}

/// Exact and high-SNR outage for every prefix `l`, per scheme, over a power grid.
pub fn outage(settings: &Settings) -> Result<Table> {
    let params = settings.channel()?;
    let l_max = settings.rounds;
    let points: Vec<(Option<f64>, Vec<f64>)> = match settings.explicit_powers()? {
        Some(p) => vec![(None, p)],
        None => {
            let grid = settings.power_db.as_deref().unwrap_or(DEFAULT_POWER_DB_GRID);
            parse_grid(grid)
                .context("power grid")?
                .into_iter()
                .map(|db| (Some(db), vec![10f64.powf(db / 10.0); l_max]))
                .collect()
        }
    };
    let tasks: Vec<(Scheme, usize)> = settings
        .schemes()
        .into_iter()
        .flat_map(|s| (0..points.len()).map(move |i| (s, i)))
        .collect();
    let blocks: Vec<Vec<Vec<Cell>>> = tasks
        .par_iter()
        .map(|&(scheme, i)| {
            let (db, powers) = &points[i];
            (1..=l_max)
                .map(|l| {
                    let prefix = &powers[..l];
                    let (exact, detail) = exact_with_detail(scheme, prefix, settings, &params)?;
                    let asym = asymptotic_outage(scheme, prefix, settings.rate, &params)?;
                    let mut row: Vec<Cell> = vec![
                        scheme.as_str().into(),
                        db.map_or(Cell::Empty, Cell::Float),
                        l.into(),
                    ];
                    row.extend(powers.iter().map(|&p| Cell::Float(p)));
                    row.extend([exact.into(), asym.into(), detail.into()]);
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut header = vec!["scheme".to_owned(), "power_db".into(), "l".into()];
    header.extend(power_columns(l_max));
    header.extend(["exact".into(), "asymptotic".into(), "order_or_poles".into()]);
    let mut table = Table::new(header);
    blocks.into_iter().flatten().for_each(|r| table.push(r));
    Ok(table)
}

/// Exact outage plus the truncation order (Type I) or number of distinct
/// MGF poles (CC, IR).
fn exact_with_detail(
    scheme: Scheme,
    powers: &[f64],
    settings: &Settings,
    params: &ChannelParams,
) -> Result<(f64, usize)> {
    Ok(match scheme {
        Scheme::TypeI => {
            let r = type1_to_tolerance(powers, settings.rate, params, settings.truncation_tolerance)?;
            (r.value, r.order)
        }
        Scheme::ChaseCombining | Scheme::IncrementalRedundancy => {
            let d = mgf_poles(powers, params)?;
            let y = if scheme == Scheme::ChaseCombining {
                cc_threshold(settings.rate)
            } else {
                ir_threshold(settings.rate, powers.len())
            };
            (cdf_y(y, &d)?, d.poles().len())
        }
    })
}

pub fn solve(method: Method, problem: &AllocationProblem) -> Result<AllocationResult> {
    let result = match method {
        Method::PpaAsymptotic => allocate_closed_form(problem),
        Method::PpaExact => allocate_numerical_exact(problem),
        Method::Fpa => allocate_fixed(problem, false),
        Method::FpaExact => allocate_fixed(problem, true),
    };
    result.with_context(|| {
        format!(
            "{} allocation for {} (L={}, epsilon={})",
            method.as_str(),
            problem.scheme,
            problem.max_rounds,
            problem.epsilon
        )
    })
}

/// Allocation results for every requested scheme and method.
pub fn allocate(settings: &Settings) -> Result<Table> {
    let params = settings.channel()?;
    let methods = settings.methods.clone().unwrap_or_else(|| DEFAULT_ALLOCATE_METHODS.to_vec());
    let tasks: Vec<(Scheme, Method)> = settings
        .schemes()
        .into_iter()
        .flat_map(|s| methods.iter().map(move |&m| (s, m)))
        .collect();
    let results: Vec<AllocationResult> = tasks
        .par_iter()
        .map(|&(scheme, method)| {
            let problem = AllocationProblem::new(
                scheme,
                settings.rounds,
                settings.rate,
                settings.epsilon,
                params.clone(),
            )?;
            solve(method, &problem)
        })
        .collect::<Result<_>>()?;

    let mut header: Vec<String> = ["method", "scheme", "L", "m", "rho", "epsilon"]
        .map(String::from)
        .to_vec();
    header.extend(power_columns(settings.rounds));
    header.extend(["avg_power".into(), "achieved_outage".into()]);
    let mut table = Table::new(header);
    for (&(scheme, method), r) in tasks.iter().zip(results) {
        let mut row: Vec<Cell> = vec![
            method.as_str().into(),
            scheme.as_str().into(),
            settings.rounds.into(),
            settings.m.into(),
            settings.rho.into(),
            settings.epsilon.into(),
        ];
        row.extend(r.powers.iter().map(|&p| Cell::Float(p)));
        row.extend([r.average_power.into(), r.achieved_outage.into()]);
        table.push(row);
    }
    Ok(table)
}

/// Whether an analytic value agrees with a simulated one.
///
/// The standard error uses the larger of the analytic and empirical binomial
/// variances, so a zero count against a tiny analytic value still passes. The
/// IR analytic value is a lower bound and only has to stay below the
/// estimate.
pub fn agrees(analytic: f64, p_hat: f64, trials: u64, lower_bound_only: bool) -> bool {
    let var = (analytic * (1.0 - analytic)).max(p_hat * (1.0 - p_hat));
    let slack = VALIDATE_SIGMAS * (var / trials as f64).sqrt();
    if lower_bound_only {
        analytic <= p_hat + slack
    } else {
        (analytic - p_hat).abs() <= slack
    }
}

/// Analytic outage against Monte Carlo, side by side. The flag is false when
/// any row fails.
pub fn validate(settings: &Settings) -> Result<(Table, bool)> {
    let params = settings.channel()?;
    let powers = settings
        .explicit_powers()?
        .unwrap_or_else(|| vec![DEFAULT_VALIDATE_POWER; settings.rounds]);
    info!("simulating {} trials with seed {}", settings.trials, settings.seed);
    let mc = estimate_all_schemes(&powers, settings.rate, &params, settings.trials, settings.seed)?;

    let mut header: Vec<String> = ["scheme", "l"].map(String::from).to_vec();
    header.extend(power_columns(settings.rounds));
    header.extend(
        ["analytic", "kind", "p_hat", "std_error", "ci_low", "ci_high", "trials", "seed", "pass"]
            .map(String::from),
    );
    let mut table = Table::new(header);
    let mut all_pass = true;
    for scheme in settings.schemes() {
        for (l, est) in (1..=settings.rounds).zip(mc.get(scheme)) {
            let (analytic, _) = exact_with_detail(scheme, &powers[..l], settings, &params)?;
            let bound = scheme == Scheme::IncrementalRedundancy;
            let pass = agrees(analytic, est.p_hat, est.trials, bound);
            if !pass {
                warn!("{scheme} l={l}: analytic {analytic:e} vs simulated {:e}", est.p_hat);
            }
            all_pass &= pass;
            let mut row: Vec<Cell> = vec![scheme.as_str().into(), l.into()];
            row.extend(powers.iter().map(|&p| Cell::Float(p)));
            row.extend([
                analytic.into(),
                if bound { "lower_bound" } else { "exact" }.into(),
                est.p_hat.into(),
                est.standard_error().into(),
                (est.p_hat - est.half_width).max(0.0).into(),
                (est.p_hat + est.half_width).min(1.0).into(),
                est.trials.into(),
                est.seed.into(),
                pass.into(),
            ]);
            table.push(row);
        }
    }
    Ok((table, all_pass))
}

/// Optimal average power over a grid of `ε`, `ρ` or `m`.
pub fn sweep(settings: &Settings) -> Result<Table> {
    let axis = settings.over.unwrap_or(SweepAxis::Epsilon);
    let grid = parse_grid(settings.values.as_deref().unwrap_or(axis.default_values()))
        .with_context(|| format!("sweep values for {}", axis.as_str()))?;
    if axis == SweepAxis::M {
        if let Some(v) = grid.iter().find(|v| v.fract() != 0.0 || **v < 1.0) {
            bail!("m must be a positive integer, got {v}");
        }
    }
    let methods = settings.methods.clone().unwrap_or_else(|| DEFAULT_SWEEP_METHODS.to_vec());
    let mut tasks: Vec<(f64, Scheme, Method)> = Vec::new();
    for &v in &grid {
        for s in settings.schemes() {
            tasks.extend(methods.iter().map(|&m| (v, s, m)));
        }
    }
    // Indexed parallel collect keeps grid order whatever the completion order.
    let results: Vec<AllocationResult> = tasks
        .par_iter()
        .map(|&(value, scheme, method)| {
            let (mut m, mut rho, mut eps) = (settings.m, settings.rho, settings.epsilon);
            match axis {
                SweepAxis::Epsilon => eps = value,
                SweepAxis::Rho => rho = value,
                SweepAxis::M => m = value as u32,
            }
            let params = settings.channel_with(m, rho)?;
            let problem = AllocationProblem::new(scheme, settings.rounds, settings.rate, eps, params)?;
            solve(method, &problem)
        })
        .collect::<Result<_>>()?;

    let mut header: Vec<String> = ["over", "value", "scheme", "method", "avg_power"]
        .map(String::from)
        .to_vec();
    header.extend(power_columns(settings.rounds));
    let mut table = Table::new(header);
    for (&(value, scheme, method), r) in tasks.iter().zip(results) {
        let mut row: Vec<Cell> = vec![
            axis.as_str().into(),
            value.into(),
            scheme.as_str().into(),
            method.as_str().into(),
            r.average_power.into(),
        ];
        row.extend(r.powers.iter().map(|&p| Cell::Float(p)));
        table.push(row);
    }
    Ok(table)
}
