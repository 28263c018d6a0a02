use serde_json::json;

use super::report::{Cell, Report, Table};
use super::state_file::StateFile;
use super::{
    Bound, Cli, CliError, Command, ContinuumArgs, ContinuumTask, FisherArgs, KernelArgs, MseArgs, NoonArgs,
    OptimizeArgs, ProfileKind, SimulateArgs, StateSource, SweepArgs, TwostepArgs,
};
use crate::continuum::{
    dirichlet_discrete_eigenvalue, dirichlet_ground_state, gaussian_profile, scaling_convergence, sine_profile,
    uncertainty_check, ContinuumFunction,
};
use crate::fisher::{lub_bound, sld_fisher};
use crate::mse::{covariant_mse, kernel_entry, quadrature_mse_oracle};
use crate::optimizer::{
    candidate_count, noon_divergence_sweep, noon_local_minimax_lower, optimize_avg_constraint,
    optimize_max_constraint, AvgConstraintOptions, Constraint, OptimizationResult, PhaseSearch,
};
use crate::simulator::{noon_plateau_demo, two_step_demo, wrapped_error, OutcomeSampler, PlateauOptions, PlateauRow};
use crate::state::StateVector;

const PI: f64 = std::f64::consts::PI;

pub(super) fn execute(cli: &Cli) -> Result<Report, CliError> {
    let seed = cli.global.seed;
    let config = json!({ "global": cli.global, "args": cli.command });
    let mut report = Report::new(cli.command.name(), config, seed);
    match &cli.command {
        Command::Kernel(a) => kernel(a, &mut report),
        Command::Mse(a) => mse(a, &mut report),
        Command::Fisher(a) => fisher(a, &mut report),
        Command::Optimize(a) => optimize(a, &mut report),
        Command::Sweep(a) => sweep(a, seed, &mut report),
        Command::Noon(a) => noon(a, seed, &mut report),
        Command::Continuum(a) => continuum(a, &mut report),
        Command::Simulate(a) => simulate(a, seed, &mut report),
        Command::Twostep(a) => twostep(a, seed, &mut report),
    }?;
    Ok(report)
}

fn load(source: &StateSource) -> Result<StateVector<f64>, CliError> {
    match (&source.state, &source.state_file) {
        (Some(spec), None) => spec.build(),
        (None, Some(path)) => StateFile::read(path),
        _ => Err(CliError::Usage("give exactly one of --state or --state-file".into())),
    }
}

fn kernel(a: &KernelArgs, report: &mut Report) -> Result<(), CliError> {
    let mut t = Table::new("kernel", &["k", "theta"]);
    for k in 0..=a.max_lag as u64 {
        t.push(vec![k.into(), kernel_entry::<f64>(k).into()]);
    }
    report.tables.push(t);
    Ok(())
}

fn mse(a: &MseArgs, report: &mut Report) -> Result<(), CliError> {
    let state = load(&a.source)?;
    let m = state.metrics();
    let value = covariant_mse(&state);
    let mut cols = vec!["lo", "hi", "n_max", "n2_avg", "n_mean", "mse"];
    let mut row: Vec<Cell> = vec![
        state.lo().into(),
        state.hi().into(),
        m.n_max.into(),
        m.n2_avg.into(),
        m.n_mean.into(),
        value.into(),
    ];
    if let Some(grid) = a.grid {
        let oracle = quadrature_mse_oracle(&state, grid)?;
        cols.extend(["quadrature", "difference"]);
        row.extend([oracle.into(), (value - oracle).into()]);
    }
    let mut t = Table::new("mse", &cols);
    t.push(row);
    report.tables.push(t);
    if let Some(path) = &a.emit_state {
        StateFile::write(&state, path)?;
        report.note(format!("state written to {}", path.display()));
    }
    Ok(())
}

fn fisher(a: &FisherArgs, report: &mut Report) -> Result<(), CliError> {
    let state = load(&a.source)?;
    let m = state.metrics();
    let f = sld_fisher(&state);
    let lub = if m.n_max >= 1 {
        lub_bound(Constraint::<f64>::MaxPhoton(m.n_max))?
    } else {
        f64::INFINITY
    };
    let mut t = Table::new("fisher", &["n_max", "n2_avg", "n_mean", "j", "cr_bound", "four_n2_avg", "lub_bound"]);
    t.push(vec![
        m.n_max.into(),
        m.n2_avg.into(),
        m.n_mean.into(),
        f.j.into(),
        f.cr_bound.into(),
        (4.0 * m.n2_avg).into(),
        lub.into(),
    ]);
    report.tables.push(t);
    Ok(())
}

fn integer_budget(e: f64) -> Result<u64, CliError> {
    if e >= 1.0 && e.fract() == 0.0 && e <= u32::MAX as f64 {
        Ok(e as u64)
    } else {
        Err(CliError::Usage(format!("--E must be a positive integer for the max constraint, got {e}")))
    }
}

fn solve(bound: Bound, e: f64, trunc_factor: f64, rel_tol: f64) -> Result<OptimizationResult<f64>, CliError> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(CliError::Usage(format!("--E must be positive, got {e}")));
    }
    match bound {
        Bound::Max => Ok(optimize_max_constraint(integer_budget(e)?)?),
        Bound::Avg => {
            if !(trunc_factor > 0.0) || !trunc_factor.is_finite() {
                return Err(CliError::Usage(format!("--trunc-factor must be positive, got {trunc_factor}")));
            }
            if !(rel_tol > 0.0 && rel_tol < 1.0) {
                return Err(CliError::Usage(format!("--rel-tol must lie in (0, 1), got {rel_tol}")));
            }
            let options = AvgConstraintOptions {
                truncation: Some((trunc_factor * e).ceil().max(1.0) as u64),
                rel_tol,
                ..AvgConstraintOptions::default()
            };
            Ok(optimize_avg_constraint(e, options)?)
        }
    }
}

fn limit(bound: Bound) -> f64 {
    match bound {
        Bound::Max => PI * PI / 4.0,
        Bound::Avg => 0.25,
    }
}

fn bound_name(bound: Bound) -> &'static str {
    match bound {
        Bound::Max => "max",
        Bound::Avg => "avg",
    }
}

fn optimize(a: &OptimizeArgs, report: &mut Report) -> Result<(), CliError> {
    let r = solve(a.constraint, a.energy, a.trunc_factor, a.rel_tol)?;
    let e = a.energy;
    let mut t = Table::new(
        "optimize",
        &[
            "constraint",
            "E",
            "value",
            "scaled",
            "residual",
            "multiplier",
            "constraint_value",
            "iterations",
            "degenerate",
            "limit",
        ],
    );
    t.push(vec![
        bound_name(a.constraint).into(),
        e.into(),
        r.value.into(),
        (e * e * r.value).into(),
        r.residual.into(),
        r.multiplier.unwrap_or(f64::NAN).into(),
        r.constraint_value.into(),
        r.iterations.into(),
        r.degenerate.into(),
        limit(a.constraint).into(),
    ]);
    report.tables.push(t);
    if let Some(path) = &a.emit_state {
        StateFile::write(&r.state, path)?;
        report.note(format!("state written to {}", path.display()));
    }
    Ok(())
}

fn ascending<T: PartialOrd + Copy + std::fmt::Display>(name: &str, list: &[T]) -> Result<(), CliError> {
    if list.is_empty() {
        return Err(CliError::Usage(format!("{name} list is empty")));
    }
    if let Some(w) = list.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(CliError::Usage(format!("{name} list must be strictly ascending ({} then {})", w[0], w[1])));
    }
    Ok(())
}

fn sweep(a: &SweepArgs, seed: u64, report: &mut Report) -> Result<(), CliError> {
    if a.noon {
        ascending("--n", &a.n_list)?;
        let search = PhaseSearch {
            restarts: a.restarts,
            seed,
            ..PhaseSearch::default()
        };
        let rows = noon_divergence_sweep::<f64>(&a.n_list, search)?;
        let mut t = Table::new("noon_sweep", &["n", "scaled", "mse"]);
        for r in &rows {
            t.push(vec![r.n.into(), r.scaled.into(), r.mse.into()]);
        }
        let increasing = rows.windows(2).all(|w| w[1].scaled > w[0].scaled);
        report.note(format!("n²·C strictly increasing: {increasing}"));
        report.tables.push(t);
        return Ok(());
    }
    let bound = a.bound.ok_or_else(|| CliError::Usage("give --bound or --noon".into()))?;
    ascending("--E", &a.energies)?;
    let lim = limit(bound);
    let mut t = Table::new("sweep", &["E", "scaled", "value", "limit", "gap", "residual", "degenerate"]);
    let mut gaps = Vec::new();
    for &e in &a.energies {
        let r = solve(bound, e, a.trunc_factor, a.rel_tol)?;
        let scaled = e * e * r.value;
        gaps.push((scaled - lim).abs());
        t.push(vec![
            e.into(),
            scaled.into(),
            r.value.into(),
            lim.into(),
            (scaled - lim).into(),
            r.residual.into(),
            r.degenerate.into(),
        ]);
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    report.note(format!("|E²·C - limit| strictly decreasing: {decreasing}"));
    report.tables.push(t);
    Ok(())
}

fn plateau_cells(state: &str, r: &PlateauRow<f64>) -> Vec<Cell> {
    vec![
        state.into(),
        r.n.into(),
        r.worst_mse.into(),
        r.worst_stderr.into(),
        r.worst_theta.into(),
        r.lower_bound.into(),
        r.trend.into(),
        r.in_plateau_regime.into(),
    ]
}

fn noon(a: &NoonArgs, seed: u64, report: &mut Report) -> Result<(), CliError> {
    if a.n_list.is_empty() {
        return Err(CliError::Usage("--n list is empty".into()));
    }
    let search = PhaseSearch {
        restarts: a.restarts,
        seed,
        ..PhaseSearch::default()
    };
    let rows = noon_divergence_sweep::<f64>(&a.n_list, search)?;
    let mut t = Table::new("noon", &["n", "eps", "candidates", "lower_bound", "mse", "scaled"]);
    for r in &rows {
        t.push(vec![
            r.n.into(),
            a.eps.into(),
            candidate_count(r.n, a.eps)?.into(),
            noon_local_minimax_lower(r.n, a.eps)?.into(),
            r.mse.into(),
            r.scaled.into(),
        ]);
    }
    report.tables.push(t);

    if a.plateau {
        let options = PlateauOptions {
            theta0: a.theta0,
            theta_points: a.theta_points,
            sine_energy: a.sine_energy,
        };
        let demo = noon_plateau_demo(&a.n_list, a.eps, a.count, seed, options)?;
        let mut t = Table::new(
            "plateau",
            &["state", "n", "worst_mse", "stderr", "worst_theta", "lower_bound", "trend", "plateau_regime"],
        );
        for r in &demo.rows {
            t.push(plateau_cells("noon", r));
        }
        t.push(plateau_cells("sine", &demo.contrast));
        if let Some(w) = demo.warning {
            report.note(format!("warning: {w}"));
        }
        report.tables.push(t);
    }
    Ok(())
}

fn continuum(a: &ContinuumArgs, report: &mut Report) -> Result<(), CliError> {
    match a.task {
        ContinuumTask::Dirichlet => {
            let m0 = a.grid.unwrap_or(401);
            if a.levels == 0 {
                return Err(CliError::Usage("--levels must be positive".into()));
            }
            let exact = PI * PI / 4.0;
            let mut t = Table::new(
                "dirichlet",
                &["M", "h", "eigenvalue", "discrete_exact", "limit", "rel_error", "order"],
            );
            let mut prev: Option<f64> = None;
            for k in 0..a.levels {
                let m = (m0.saturating_sub(1) << k) + 1;
                let (value, _) = dirichlet_ground_state::<f64>(m)?;
                let err = (value - exact).abs();
                let order = prev.map_or(f64::NAN, |p| (p / err).log2());
                prev = Some(err);
                t.push(vec![
                    m.into(),
                    (2.0 / (m - 1) as f64).into(),
                    value.into(),
                    dirichlet_discrete_eigenvalue::<f64>(m).into(),
                    exact.into(),
                    (err / exact).into(),
                    order.into(),
                ]);
            }
            report.tables.push(t);
        }
        ContinuumTask::Uncertainty => {
            let m = a.grid.unwrap_or(4001);
            let f = profile(a.profile, m, a.half_width, true)?;
            let u = uncertainty_check(&f)?;
            let mut t = Table::new("uncertainty", &["profile", "M", "q2", "p2", "product", "ok"]);
            t.push(vec![
                profile_name(a.profile).into(),
                f.len().into(),
                u.q2.into(),
                u.p2.into(),
                u.product.into(),
                u.ok.into(),
            ]);
            report.tables.push(t);
        }
        ContinuumTask::Scaling => {
            let m = a.grid.unwrap_or(4001);
            let f = profile(a.profile, m, a.half_width, false)?;
            if a.energies.iter().any(|&e| !(e > 0.0)) {
                return Err(CliError::Usage("--E entries must be positive".into()));
            }
            let s = scaling_convergence(&f, &a.energies)?;
            let mut t = Table::new("scaling", &["E", "scaled", "limit", "gap"]);
            for r in &s.rows {
                t.push(vec![
                    r.energy.into(),
                    r.scaled.into(),
                    s.limit.into(),
                    ((r.scaled - s.limit) / s.limit).into(),
                ]);
            }
            report.note(format!("final relative gap: {}", super::format_g17(s.final_gap)));
            if !s.monotone_tail {
                report.note("warning: the sequence is not monotone beyond its first two entries");
            }
            report.tables.push(t);
        }
    }
    Ok(())
}

fn profile_name(p: ProfileKind) -> &'static str {
    match p {
        ProfileKind::Sine => "sine",
        ProfileKind::Gaussian => "gaussian",
        ProfileKind::Dirichlet => "dirichlet",
    }
}

fn profile(kind: ProfileKind, m: usize, half_width: f64, extend: bool) -> Result<ContinuumFunction<f64>, CliError> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(CliError::Usage(format!("--half-width must be positive, got {half_width}")));
    }
    Ok(match kind {
        ProfileKind::Sine => sine_profile(m)?,
        ProfileKind::Gaussian => gaussian_profile(half_width, m)?,
        ProfileKind::Dirichlet => {
            let (_, f) = dirichlet_ground_state(m)?;
            if extend && half_width > 1.0 {
                f.extend_by_zero(-half_width, half_width)?
            } else {
                f
            }
        }
    })
}

fn simulate(a: &SimulateArgs, seed: u64, report: &mut Report) -> Result<(), CliError> {
    let state = load(&a.source)?;
    let sampler = OutcomeSampler::new(&state)?;
    let batch = sampler.sample(a.theta, a.count, seed)?;
    let stats = crate::simulator::empirical_mse(&batch)?;
    let exact = covariant_mse(&state);
    let mut t = Table::new(
        "simulate",
        &["theta_true", "count", "grid_cells", "mse", "stderr", "covariant_mse", "z"],
    );
    t.push(vec![
        batch.theta_true.into(),
        batch.count.into(),
        sampler.cells().into(),
        stats.mse.into(),
        stats.stderr.into(),
        exact.into(),
        ((stats.mse - exact) / stats.stderr).into(),
    ]);
    report.tables.push(t);
    if a.dump {
        let mut d = Table::new("samples", &["index", "estimate", "wrapped_error"]);
        for (i, &e) in batch.estimates.iter().enumerate() {
            d.push(vec![i.into(), e.into(), wrapped_error(batch.theta_true, e).value().into()]);
        }
        report.tables.push(d);
    }
    Ok(())
}

fn twostep(a: &TwostepArgs, seed: u64, report: &mut Report) -> Result<(), CliError> {
    let r = two_step_demo(a.energy, a.split, a.trials, seed)?;
    let mut t = Table::new("twostep", &["method", "e_stage1", "e_stage2", "mse", "stderr", "ratio_to_reference"]);
    let mut row = |name: &str, e1: u64, e2: u64, s: &crate::simulator::ErrorStats<f64>| {
        t.push(vec![
            name.into(),
            e1.into(),
            e2.into(),
            s.mse.into(),
            s.stderr.into(),
            (s.mse / r.reference).into(),
        ]);
    };
    row("two_step", r.e1, r.e2, &r.two_step);
    row("one_shot", r.e_total, 0, &r.one_shot);
    if let Some(n) = &r.noon_stage2 {
        row("noon_stage2", r.e1, r.e2, n);
    }
    report.note(format!("reference π²/(4E²): {}", super::format_g17(r.reference)));
    if r.degenerate {
        report.note("degenerate split: one stage holds the whole budget, so the run is a one-shot estimate");
    }
    report.tables.push(t);
    Ok(())
}
