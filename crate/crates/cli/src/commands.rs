use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;

use prandtl4_core::datum::unit_mass_bump;
use prandtl4_core::diagnostics::{functional_e, functional_f};
use prandtl4_core::kernel::{kernel_mass, kernel_mass_outside, kernel_row_l1, kernel_value};
use prandtl4_core::semigroup::{apply_ibp, build_operator, smoothing_rate_fit, verify_semigroup, T_MIN};
use prandtl4_core::solver::{evolve as run_solver, EvolutionTrace, Termination};
use prandtl4_core::stencil::fornberg_weights;
use prandtl4_core::{Grid, KernelKind, Profile, QuadratureSpec};

use crate::config::{CommandDefaults, RunConfig};
use crate::output::{fmt, write_json, write_profile};
use crate::svg::{Plot, Series};
use crate::PropertyFailure;

/// Grid for a kernel row at time `t`: reaches `40 t^{1/4}` past the last
/// `x` and resolves the kernel width with ten points.
fn row_grid(t: f64, x_max: f64) -> anyhow::Result<Grid> {
    let r = t.powf(0.25);
    let length = x_max + 40.0 * r;
    Ok(Grid::new(length, (length / (0.1 * r)).ceil() as usize + 1)?)
}

pub fn kernel_table(cfg: &RunConfig) -> anyhow::Result<()> {
    let quad = cfg.quadrature()?;
    let kind = cfg.kind()?;
    let m = cfg.m;
    let ys = cfg.y_list.as_ref().unwrap_or(&cfg.x_list);
    if cfg.t_list.is_empty() || cfg.x_list.is_empty() {
        bail!("tList and xList must be nonempty");
    }
    let x_max = cfg.x_list.iter().copied().fold(0.0, f64::max);

    let path = cfg.output_dir.join("kernel_values.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["t", "x", "y", "m", "kind", "value"])?;
    for &t in &cfg.t_list {
        for &x in &cfg.x_list {
            for &y in ys {
                let v = kernel_value(t, x, y, m, kind, &quad)?;
                w.write_record([fmt(t), fmt(x), fmt(y), m.to_string(), kind.name().into(), fmt(v)])?;
            }
        }
    }
    w.flush()?;

    let path = cfg.output_dir.join("kernel_l1.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["t", "x", "m", "kind", "l1", "scaled_l1"])?;
    for &t in &cfg.t_list {
        let grid = row_grid(t, x_max)?;
        for &x in &cfg.x_list {
            let l1 = kernel_row_l1(t, x, m, kind, &grid, &quad)?;
            let scaled = l1 * t.powf(m as f64 / 4.0);
            w.write_record([fmt(t), fmt(x), m.to_string(), kind.name().into(), fmt(l1), fmt(scaled)])?;
        }
    }
    w.flush()?;
    println!(
        "wrote kernel_values.csv and kernel_l1.csv to {}",
        cfg.output_dir.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    measured: f64,
    limit: f64,
    detail: String,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, limit: f64, detail: String) -> Self {
        Self {
            name,
            passed: measured <= limit,
            measured,
            limit,
            detail,
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyReport {
    passed: bool,
    length: f64,
    points: usize,
    checks: Vec<Check>,
    /// Largest scaled row L1 norm `t^{m/4} ∫|∂_x^m K|` over the sweep, per order.
    l1_constants: Vec<f64>,
}

/// Central difference in `y` of `kernel_value`, with a step-halving error estimate.
fn fd_y(t: f64, x: f64, y: f64, m: usize, q: &QuadratureSpec) -> anyhow::Result<(f64, f64)> {
    let half = m.div_ceil(2) + 1;
    let offsets: Vec<f64> = (0..=2 * half).map(|j| j as f64 - half as f64).collect();
    let w = fornberg_weights(0.0, &offsets, m);
    let eval = |delta: f64| -> anyhow::Result<f64> {
        let mut s = 0.0;
        for (o, wj) in offsets.iter().zip(&w) {
            s += wj * kernel_value(t, x, y + o * delta, 0, KernelKind::K, q)?;
        }
        Ok(s / delta.powi(m as i32))
    };
    let delta = 0.02 * t.powf(0.25);
    let coarse = eval(delta)?;
    let fine = eval(0.5 * delta)?;
    Ok((fine, (coarse - fine).abs()))
}

pub fn verify(cfg: &RunConfig) -> anyhow::Result<()> {
    let quad = cfg.quadrature()?;
    if let Some(&t) = cfg.smoothing_times.iter().find(|&&t| t < T_MIN) {
        bail!("smoothing time {t:e} is below the resolvable minimum {T_MIN:e}");
    }
    if cfg.smoothing_times.len() < 2 {
        bail!("smoothingTimes needs at least two entries");
    }
    let defaults = CommandDefaults::STANDARD;
    let f = cfg.datum(defaults)?;
    let grid = *f.grid();
    let scale = f.sup_norm().max(f64::MIN_POSITIVE);
    let mut checks = Vec::new();

    let mass_grid = Grid::new(10.0, 4001)?;
    let mass = kernel_mass(1e-4, 1.0, &mass_grid, &quad)?;
    checks.push(Check::at_most(
        "kernel_mass",
        (mass - 1.0).abs(),
        0.01,
        format!("row mass at t = 1e-4, x = 1 is {mass:.8}"),
    ));
    let outside: Vec<f64> = [1e-3, 1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&t| kernel_mass_outside(t, 1.0, 0.5, &mass_grid, &quad))
        .collect::<Result<_, _>>()?;
    let shrinking = outside.windows(2).all(|w| w[1] < w[0]);
    let last = outside[outside.len() - 1];
    checks.push(Check {
        name: "kernel_concentration",
        passed: shrinking && last <= 1e-3,
        measured: last,
        limit: 1e-3,
        detail: format!(
            "mass of |K| farther than 0.5 from x = 1 at t = 1e-3 .. 1e-6 ends at {last:.3e}; decreasing: {shrinking}"
        ),
    });

    let mut boundary: f64 = 0.0;
    for t in [1e-3, 1e-1, 1.0] {
        let u = build_operator(&grid, t, 0, KernelKind::K, &quad)?.apply(&f)?;
        boundary = boundary.max(u.trace(0).abs()).max(u.trace(1).abs());
    }
    checks.push(Check::at_most(
        "clamped_boundary",
        boundary / scale,
        1e-6,
        "max boundary trace of S(t)f and its derivative over t = 1e-3, 0.1, 1, relative to sup f".into(),
    ));

    let semigroup = verify_semigroup(&f, 0.1, 0.2, &quad)? / scale;
    checks.push(Check::at_most(
        "semigroup_law",
        semigroup,
        1e-4,
        "|S(0.1)S(0.2)f - S(0.3)f| relative to sup f".into(),
    ));

    let derivs: Vec<Profile> = (0..=1).map(|q| f.derivative(q)).collect();
    let via_ibp = apply_ibp(&grid, 0.1, 1, &derivs, &quad, cfg.compat_tol)?;
    let direct = build_operator(&grid, 0.1, 1, KernelKind::K, &quad)?.apply(&f)?;
    let ibp_err = via_ibp.sup_distance(&direct)? / direct.sup_norm().max(f64::MIN_POSITIVE);
    checks.push(Check::at_most(
        "derivative_by_parts",
        ibp_err,
        1e-4,
        "first derivative of S(0.1)f by parts against the direct operator, relative".into(),
    ));

    let sgrid = Grid::new(4.0, grid.points())?;
    let half_width = (3.0 * sgrid.spacing()).max(0.02);
    let spike = unit_mass_bump(&sgrid, 2.0, half_width);
    for (m, name, target) in [(0usize, "smoothing_rate_m0", -0.25), (1, "smoothing_rate_m1", -0.5)] {
        let slope = smoothing_rate_fit(&spike, m, &cfg.smoothing_times, &quad)?;
        checks.push(Check::at_most(
            name,
            (slope - target).abs(),
            0.07,
            format!("fitted slope {slope:.4} against {target} for a unit-mass bump of half-width {half_width:.3}"),
        ));
    }

    let mut fd_worst: f64 = 0.0;
    let mut fd_excess = f64::NEG_INFINITY;
    for m in 1..=3 {
        let t: f64 = 0.05;
        let r = t.powf(0.25);
        for (x, y) in [(0.4 * r, 1.9 * r), (1.3 * r, 0.7 * r), (3.1 * r, 3.6 * r)] {
            let (fd, est) = fd_y(t, x, y, m, &quad)?;
            let direct = kernel_value(t, x, y, m, KernelKind::y_transfer(m), &quad)?;
            let s = t.powf(-(m as f64 + 1.0) / 4.0);
            let err = (fd - direct).abs() / s;
            fd_worst = fd_worst.max(err);
            fd_excess = fd_excess.max(err - 1e-6f64.max(4.0 * est / s));
        }
    }
    checks.push(Check {
        name: "derivative_transfer",
        passed: fd_excess <= 0.0,
        measured: fd_worst,
        limit: 1e-6,
        detail: "y-derivatives of K by finite differences against x-derivatives of the modified kernels, scaled; the limit widens to the difference error estimate".into(),
    });

    let xs: Vec<f64> = cfg.x_list.iter().copied().filter(|&x| x > 0.0).collect();
    let x_max = xs.iter().copied().fold(0.0, f64::max);
    let mut constants = Vec::new();
    let mut worst_ratio: f64 = 1.0;
    if !xs.is_empty() {
        for m in 0..=3 {
            let mut values = Vec::new();
            for &t in &cfg.t_list {
                let g = row_grid(t, x_max)?;
                for &x in &xs {
                    values.push(kernel_row_l1(t, x, m, KernelKind::K, &g, &quad)? * t.powf(m as f64 / 4.0));
                }
            }
            let max = values.iter().copied().fold(0.0, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            worst_ratio = worst_ratio.max(max / min);
            constants.push(max);
        }
    }
    checks.push(Check::at_most(
        "uniform_l1_bound",
        worst_ratio,
        10.0,
        "largest max/min of the scaled row L1 norms over tList x xList for m = 0..3".into(),
    ));

    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        passed,
        length: grid.length(),
        points: grid.points(),
        checks,
        l1_constants: constants,
    };
    write_json(&cfg.output_dir.join("verify.json"), &report)?;
    for c in &report.checks {
        println!(
            "{:<22} {} measured {:.3e} limit {:.1e}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.measured,
            c.limit
        );
    }
    if !passed {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        return Err(PropertyFailure(failed.join(", ")).into());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct SnapshotRecord {
    level: u32,
    index: usize,
    t: f64,
    sup: f64,
    f: f64,
    e: f64,
    /// Peak location of `|a|`.
    peak_y: f64,
    /// Largest `|a|` on the last tenth of the domain, relative to the peak.
    tail_ratio: f64,
    file: String,
}

#[derive(Debug, Serialize)]
struct Series1d {
    t: Vec<f64>,
    #[serde(rename = "F")]
    f: Vec<f64>,
    #[serde(rename = "E")]
    e: Vec<f64>,
    #[serde(rename = "G")]
    g: Vec<Option<f64>>,
    sup: Vec<f64>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct Summary {
    termination: Termination,
    final_time: f64,
    length: f64,
    points: usize,
    datum_sup: f64,
    e0: f64,
    f0: f64,
    riccati_bound: Option<f64>,
    doublings: usize,
    snapshots: Vec<SnapshotRecord>,
    series: Series1d,
}

fn peak_and_tail(a: &Profile) -> (f64, f64) {
    let v = a.values();
    let (imax, peak) = v.iter().enumerate().fold(
        (0, 0.0f64),
        |(i, p), (j, x)| if x.abs() > p { (j, x.abs()) } else { (i, p) },
    );
    let start = v.len() - v.len() / 10;
    let tail = v[start..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let ratio = if peak > 0.0 { tail / peak } else { 0.0 };
    (a.grid().node(imax), ratio)
}

fn write_run(trace: &EvolutionTrace, dir: &Path) -> anyhow::Result<Summary> {
    let mut snapshots = Vec::new();
    for s in &trace.snapshots {
        let a = &trace.profiles[s.index];
        let file = format!("snapshot_{:02}.csv", s.level);
        write_profile(&dir.join(&file), a)?;
        let r = &trace.reports[s.index];
        let (peak_y, tail_ratio) = peak_and_tail(a);
        snapshots.push(SnapshotRecord {
            level: s.level,
            index: s.index,
            t: trace.times[s.index],
            sup: r.sup,
            f: functional_f(a),
            e: functional_e(a),
            peak_y,
            tail_ratio,
            file,
        });
    }
    let a0 = &trace.profiles[0];
    let r0 = &trace.reports[0];
    let summary = Summary {
        termination: trace.termination,
        final_time: trace.final_time(),
        length: a0.grid().length(),
        points: a0.grid().points(),
        datum_sup: r0.sup,
        e0: r0.e,
        f0: r0.f,
        riccati_bound: r0.riccati_bound,
        doublings: trace.doubling_count(),
        snapshots,
        series: Series1d {
            t: trace.times.clone(),
            f: trace.reports.iter().map(|r| r.f).collect(),
            e: trace.reports.iter().map(|r| r.e).collect(),
            g: trace.reports.iter().map(|r| r.g).collect(),
            sup: trace.reports.iter().map(|r| r.sup).collect(),
        },
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Right end of the plotted window: past the last node where any snapshot
/// exceeds a thousandth of its own peak.
fn plot_extent(trace: &EvolutionTrace) -> f64 {
    let grid = trace.profiles[0].grid();
    let mut last = 0;
    for s in &trace.snapshots {
        let a = &trace.profiles[s.index];
        let cut = 1e-3 * a.sup_norm();
        if let Some(i) = a.values().iter().rposition(|v| v.abs() > cut) {
            last = last.max(i);
        }
    }
    let y = grid.node(last) * 1.1;
    if y > 0.0 {
        y.min(grid.length())
    } else {
        grid.length()
    }
}

fn snapshot_plot(trace: &EvolutionTrace, title: &str, caption: String) -> Plot {
    let extent = plot_extent(trace);
    let series = trace
        .snapshots
        .iter()
        .map(|s| {
            let a = &trace.profiles[s.index];
            let grid = a.grid();
            let (xs, ys): (Vec<f64>, Vec<f64>) = (0..a.len())
                .map(|i| (grid.node(i), a.values()[i]))
                .take_while(|(y, _)| *y <= extent)
                .unzip();
            Series {
                label: format!("t_{} = {:.4}", s.level, trace.times[s.index]),
                xs,
                ys,
            }
        })
        .collect();
    Plot {
        title: title.into(),
        caption,
        x_label: "y".into(),
        y_label: "a(t, y)".into(),
        series,
    }
}

fn caption(summary: &Summary) -> String {
    let bound = summary.riccati_bound.map_or("none".to_string(), |b| format!("{b:.4}"));
    format!(
        "E(a0) = {:.4}; {:?} at t = {:.5} after {} doublings; Riccati bound {bound}; L = {}, N = {}",
        summary.e0, summary.termination, summary.final_time, summary.doublings, summary.length, summary.points
    )
}

fn run_and_write(cfg: &RunConfig, defaults: CommandDefaults, svg_name: &str, title: &str) -> anyhow::Result<Summary> {
    let quad = cfg.quadrature()?;
    let a0 = cfg.datum(defaults)?;
    let trace = run_solver(&a0, cfg.t_end, &cfg.solver(defaults), &quad)?;
    let summary = write_run(&trace, &cfg.output_dir)?;
    let svg = snapshot_plot(&trace, title, caption(&summary)).render();
    std::fs::write(cfg.output_dir.join(svg_name), svg)?;
    println!("{}", caption(&summary));
    if let Some(s) = summary.snapshots.iter().find(|s| s.tail_ratio > 1e-6) {
        eprintln!(
            "warning: snapshot {} reaches the end of the domain (tail/peak {:.2e}); increase length",
            s.level, s.tail_ratio
        );
    }
    Ok(summary)
}

pub fn evolve(cfg: &RunConfig) -> anyhow::Result<()> {
    run_and_write(
        cfg,
        CommandDefaults::STANDARD,
        "evolution.svg",
        "Snapshots at sup-norm doublings",
    )?;
    Ok(())
}

pub fn figure1(cfg: &RunConfig) -> anyhow::Result<()> {
    run_and_write(
        cfg,
        CommandDefaults::FIGURE1,
        "figure1.svg",
        "Finite-time blow-up of the bump datum",
    )?;
    Ok(())
}
