//! The four subcommands, each producing one output table.

use std::fs;

use gkp_link::cavity::{pulse_length_check, CavityParams, PulseShape, PulseSpec};
use gkp_link::channel::{loss_db_to_transmissivity, transform_variance};
use gkp_link::csum::{
    amplitude_schedule, csum_fidelity as fidelity, simulate_csum_with, SimulationOptions,
};
use gkp_link::exec::map_range;
use gkp_link::gkp::{squeezing_db_to_variance, GkpCode};
use gkp_link::montecarlo::{compare_marginals, run_swap_trials, swap_outcomes, SwapTrialConfig};
use gkp_link::rate::{
    ansatz_dimension, asymptotic_rate, link_rate_eta, nearest_power_of_two, optimize_xi_with,
    repeaterless_bound, sweep, SweepGrid,
};
use gkp_link::{AmpMode, Execution};
use num_complex::Complex64 as C64;

use crate::args::{AsymptoteArgs, CsumArgs, RateCurveArgs, SwapMcArgs};
use crate::output::{Cell, Table};
use crate::{CliError, Report};

pub const RATE_CURVE_COLUMNS: &[&str] = &[
    "n",
    "d",
    "lattice",
    "amp",
    "combine",
    "half_loss_db",
    "eta_arm",
    "squeezing_db",
    "sigma2_eff",
    "rate",
    "q2",
    "capacity_c",
];

pub const ASYMPTOTE_COLUMNS: &[&str] = &[
    "record",
    "lattice",
    "amp",
    "xi_opt",
    "gap",
    "eps",
    "q2",
    "i_lb",
    "gap_lb",
    "n",
    "d",
    "rate_full",
    "gap_full",
];

pub const CSUM_COLUMNS: &[&str] = &[
    "lattice",
    "gate",
    "n",
    "d",
    "cooperativity",
    "zeta",
    "bs_zeta",
    "squeezing_db",
    "variant",
    "fidelity",
    "g_offdiag_min",
    "g_offdiag_mean",
    "beta_error_max",
    "pulse_check",
    "tau_threshold",
];

pub const SWAP_MC_COLUMNS: &[&str] = &[
    "lattice",
    "n",
    "d",
    "combine",
    "amp",
    "squeezing_db",
    "half_loss_db",
    "sigma2_arm",
    "sigma2_eff",
    "seed",
    "trials",
    "quadrature",
    "k",
    "count",
    "empirical",
    "analytic",
    "z",
];

pub const DUMP_COLUMNS: &[&str] = &[
    "point",
    "trial",
    "x",
    "y",
    "x_l",
    "y_l",
    "x_f",
    "y_f",
    "k_herald",
    "l_herald",
    "shift_q",
    "shift_p",
    "true_shift_q",
    "true_shift_p",
];

/// Largest `|z|` tolerated by `swap-mc` before it reports a failure.
pub const Z_LIMIT: f64 = 5.0;

/// Bins whose expected count (or expected complement) is below this are
/// outside the normal approximation and only fail on an impossible count.
pub const MIN_EXPECTED: f64 = 5.0;

fn z_fails(z: f64, trials: u64, p: f64) -> bool {
    let expected = trials as f64 * p;
    let tail = expected.min(trials as f64 - expected);
    z.is_infinite() || (tail >= MIN_EXPECTED && z.abs() > Z_LIMIT)
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::Usage(format!("--{name} must not be empty")));
    }
    Ok(())
}

pub fn rate_curve(args: &RateCurveArgs) -> Result<Table, CliError> {
    let grid = SweepGrid {
        lattices: args.lattice.0.clone(),
        amps: args.amp.0.clone(),
        combine: args.combine,
        ns: args.n.0.clone(),
        squeezing_db: args.squeeze_db.0.clone(),
        half_loss_db: args.loss_db.0.clone(),
    };
    nonempty("n", &grid.ns)?;
    nonempty("loss-db", &grid.half_loss_db)?;
    nonempty("squeeze-db", &grid.squeezing_db)?;
    let points = sweep(&grid, Execution::Parallel)?;
    let mut table = Table::new(RATE_CURVE_COLUMNS);
    for p in points {
        table.push(vec![
            p.n.into(),
            p.d.into(),
            p.lattice.short_name().into(),
            p.amp_mode.short_name().into(),
            p.combine.short_name().into(),
            p.half_loss_db.into(),
            p.eta_arm.into(),
            p.squeezing_db.into(),
            p.sigma2_eff.into(),
            p.rate.into(),
            p.q2.into(),
            p.capacity_c.into(),
        ]);
    }
    Ok(table)
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && lo <= hi && hi < 1.0) {
        return Err(CliError::Usage(format!(
            "need 0 < eps-min ≤ eps-max < 1, got {lo} and {hi}"
        )));
    }
    if points == 0 || (points == 1 && lo != hi) {
        return Err(CliError::Usage("--points must be ≥ 2 for a range".into()));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect())
}

pub fn asymptote(args: &AsymptoteArgs) -> Result<Table, CliError> {
    nonempty("lattice", &args.lattice.0)?;
    nonempty("amp", &args.amp.0)?;
    let eps_grid = log_grid(args.eps_min, args.eps_max, args.points)?;
    let mut table = Table::new(ASYMPTOTE_COLUMNS);
    for &lattice in &args.lattice.0 {
        for &amp in &args.amp.0 {
            let opt = optimize_xi_with(lattice, amp)?;
            table.push(vec![
                "optimum".into(),
                lattice.short_name().into(),
                amp.short_name().into(),
                opt.xi_opt.into(),
                opt.gap.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ]);
            let rows = map_range(
                eps_grid.len(),
                Execution::Parallel,
                |i| -> Result<Vec<Cell>, CliError> {
                    let eps = eps_grid[i];
                    let q2 = repeaterless_bound(1.0 - eps)?;
                    let i_lb = asymptotic_rate(eps, opt.xi_opt, lattice, amp)?;
                    let (n, d, full, gap_full) = if args.full_rate {
                        let n =
                            nearest_power_of_two(ansatz_dimension(eps, opt.xi_opt, lattice, amp))?;
                        let code = GkpCode::new(lattice, n)?;
                        let r = link_rate_eta(code, 1.0 - eps, 0.0, amp, args.combine)?.rate;
                        (
                            Cell::from(n),
                            Cell::from(code.d()),
                            Cell::from(r),
                            Cell::from(q2 - r),
                        )
                    } else {
                        (Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty)
                    };
                    Ok(vec![
                        "curve".into(),
                        lattice.short_name().into(),
                        amp.short_name().into(),
                        opt.xi_opt.into(),
                        opt.gap.into(),
                        eps.into(),
                        q2.into(),
                        i_lb.into(),
                        (q2 - i_lb).into(),
                        n,
                        d,
                        full,
                        gap_full,
                    ])
                },
            );
            for row in rows {
                table.push(row?);
            }
        }
    }
    Ok(table)
}

enum PulseSource {
    Shape(PulseShape),
    Table(String),
}

fn pulse_source(spec: &str) -> Result<PulseSource, CliError> {
    match spec.to_ascii_lowercase().as_str() {
        "gaussian" => Ok(PulseSource::Shape(PulseShape::Gaussian)),
        "flat-top" | "flattop" | "flat" => Ok(PulseSource::Shape(PulseShape::FlatTop)),
        _ => fs::read_to_string(spec)
            .map(PulseSource::Table)
            .map_err(|e| CliError::Io(format!("cannot read pulse table {spec}: {e}"))),
    }
}

pub fn csum_fidelity(args: &CsumArgs) -> Result<Table, CliError> {
    nonempty("lattice", &args.lattice.0)?;
    nonempty("n", &args.n.0)?;
    nonempty("cooperativity", &args.cooperativity.0)?;
    nonempty("zeta", &args.zeta.0)?;
    let source = pulse_source(&args.pulse)?;
    let sigma2 = squeezing_db_to_variance(args.squeeze_db)?;
    let options = SimulationOptions {
        beamsplitter_noise: args.bs_noise,
        variant: args.variant.0,
        exec: Execution::Parallel,
    };
    let mut table = Table::new(CSUM_COLUMNS);
    for &lattice in &args.lattice.0 {
        for &n in &args.n.0 {
            let code = GkpCode::new(lattice, n)?;
            let schedule = amplitude_schedule(code, args.gate, args.bs_zeta)?;
            let pulses = schedule
                .alphas
                .iter()
                .map(|&a: &C64| match &source {
                    PulseSource::Shape(shape) => {
                        PulseSpec::from_shape(*shape, args.tau, a, args.samples)
                    }
                    PulseSource::Table(text) => PulseSpec::from_table(text, args.tau, a),
                })
                .collect::<Result<Vec<_>, _>>()?;
            for &zeta in &args.zeta.0 {
                let check = pulse_length_check(code.d(), args.kappa, zeta, args.tau, args.margin)?;
                if !check.passed {
                    eprintln!(
                        "warning: d = {} at zeta = {zeta}: pulse length {} s is below the threshold {} s",
                        code.d(),
                        args.tau,
                        check.threshold
                    );
                }
                for &c in &args.cooperativity.0 {
                    let cavity = CavityParams::new(c, zeta, args.kappa, args.gamma)?
                        .with_detunings(args.delta_c, args.delta_a)?;
                    let state = simulate_csum_with(&schedule, &cavity, &pulses, options)?;
                    let f = fidelity(&state, sigma2)?;
                    let d = state.d;
                    let mut min_abs = f64::INFINITY;
                    let mut sum_abs = 0.0;
                    for ((i, j), z) in state.g.indexed_iter() {
                        if i != j {
                            min_abs = min_abs.min(z.norm());
                            sum_abs += z.norm();
                        }
                    }
                    let beta_err = state
                        .beta
                        .iter()
                        .zip(&state.target)
                        .map(|(b, t)| (b - t).norm())
                        .fold(0.0, f64::max);
                    table.push(vec![
                        lattice.short_name().into(),
                        args.gate.short_name().into(),
                        n.into(),
                        d.into(),
                        c.into(),
                        zeta.into(),
                        args.bs_zeta.into(),
                        args.squeeze_db.into(),
                        args.variant.to_string().into(),
                        f.into(),
                        min_abs.into(),
                        (sum_abs / (d * (d - 1)) as f64).into(),
                        beta_err.into(),
                        (if check.passed { "pass" } else { "warn" }).into(),
                        check.threshold.into(),
                    ]);
                }
            }
        }
    }
    Ok(table)
}

struct McPoint {
    config: SwapTrialConfig,
    amp: Option<AmpMode>,
    squeezing_db: Option<f64>,
    half_loss_db: Option<f64>,
}

fn swap_points(args: &SwapMcArgs) -> Result<Vec<McPoint>, CliError> {
    nonempty("lattice", &args.lattice.0)?;
    nonempty("n", &args.n.0)?;
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let mut points = Vec::new();
    for &lattice in &args.lattice.0 {
        for &n in &args.n.0 {
            let code = GkpCode::new(lattice, n)?;
            let base = |sigma2_arm| SwapTrialConfig {
                code,
                sigma2_arm,
                n_trials: args.trials,
                seed: args.seed,
                combine: args.combine,
            };
            match &args.sigma2 {
                Some(list) => {
                    nonempty("sigma2", &list.0)?;
                    for &s in &list.0 {
                        let config = base(s);
                        config.validate()?;
                        points.push(McPoint {
                            config,
                            amp: None,
                            squeezing_db: None,
                            half_loss_db: None,
                        });
                    }
                }
                None => {
                    nonempty("amp", &args.amp.0)?;
                    nonempty("squeeze-db", &args.squeeze_db.0)?;
                    nonempty("loss-db", &args.loss_db.0)?;
                    for &amp in &args.amp.0 {
                        for &sq in &args.squeeze_db.0 {
                            for &loss in &args.loss_db.0 {
                                let eta = loss_db_to_transmissivity(loss)?;
                                let s =
                                    transform_variance(squeezing_db_to_variance(sq)?, eta, amp)?;
                                points.push(McPoint {
                                    config: base(s),
                                    amp: Some(amp),
                                    squeezing_db: Some(sq),
                                    half_loss_db: Some(loss),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(points)
}

fn write_dump(path: &std::path::Path, points: &[McPoint]) -> Result<(), CliError> {
    let mut table = Table::new(DUMP_COLUMNS);
    for (i, p) in points.iter().enumerate() {
        for (t, o) in swap_outcomes(&p.config)?.into_iter().enumerate() {
            table.push(vec![
                i.into(),
                t.into(),
                o.x.into(),
                o.y.into(),
                o.x_l.into(),
                o.y_l.into(),
                o.x_f.into(),
                o.y_f.into(),
                o.heralded.0.into(),
                o.heralded.1.into(),
                o.measured_shift.0.into(),
                o.measured_shift.1.into(),
                o.true_shift.0.into(),
                o.true_shift.1.into(),
            ]);
        }
    }
    let file = fs::File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    table
        .write(&mut w, crate::output::Format::Csv)
        .map_err(|e| CliError::Io(e.to_string()))
}

pub fn swap_mc(args: &SwapMcArgs) -> Result<Report, CliError> {
    let points = swap_points(args)?;
    let mut table = Table::new(SWAP_MC_COLUMNS);
    let mut flagged = 0usize;
    let mut worst: f64 = 0.0;
    for p in &points {
        let c = &p.config;
        let hist = run_swap_trials(c, Execution::Parallel)?;
        for row in compare_marginals(c, &hist)? {
            if z_fails(row.z, c.n_trials, row.analytic) {
                flagged += 1;
                worst = worst.max(row.z.abs());
            }
            table.push(vec![
                c.code.lattice.short_name().into(),
                c.code.n_qubits().into(),
                c.code.d().into(),
                c.combine.short_name().into(),
                p.amp.map(|a| a.short_name()).into(),
                p.squeezing_db.into(),
                p.half_loss_db.into(),
                c.sigma2_arm.into(),
                c.sigma2_eff().into(),
                c.seed.into(),
                c.n_trials.into(),
                row.quadrature.short_name().into(),
                row.k.into(),
                row.count.into(),
                row.empirical.into(),
                row.analytic.into(),
                row.z.into(),
            ]);
        }
    }
    if let Some(path) = &args.dump {
        write_dump(path, &points)?;
    }
    let failure = (flagged > 0).then(|| {
        CliError::Numerical(format!(
            "{flagged} bins with |z| > {Z_LIMIT} (largest {worst:.3})"
        ))
    });
    Ok(Report { table, failure })
}
