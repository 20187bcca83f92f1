//! Scenario dispatch.

use std::path::Path;

use serde_json::{json, Map, Value};
use toa_core::quadrature::linspace;
use toa_core::{
    arrival_amplitude, arrival_amplitude_via_time_basis, arrival_distribution,
    check_even_kernel_orthogonality, check_position_orthogonality,
    check_position_orthogonality_unrestricted, check_time_orthogonality,
    check_time_orthogonality_unrestricted, crosscheck_arrival_vs_current,
    even_kernel_arrival_routes, evolve_tep, exact_rectangular_transmission,
    nonrel_arrival_amplitude, tunneling_probability, BranchConfig, Complex64, Dispersion,
    EnergySign, FullLineWavefunction, HalfLine, MomentumGrid, MomentumWavefunction,
    PositionWavefunction, PotentialSpec, Regime, SmearingTest, TimeWindow,
};

use crate::config::{
    CheckSel, Command, Extra, Packet, PotentialArg, RegimeArg, Route, ScenarioConfig, Sign, StateKind,
};
use crate::output::{num, Emission};
use crate::CliError;

/// Jitter allowed by the monotonicity flag in orthogonality reports.
const MONOTONE_JITTER: f64 = 0.05;

pub fn run(config: &ScenarioConfig) -> Result<Emission, CliError> {
    match config.command {
        Command::Toa | Command::ToaNonrel => toa(config),
        Command::Ortho => ortho(config),
        Command::AppendixDemo => appendix(config),
        Command::TepEvolve => tep_evolve(config),
        Command::Crosscheck => crosscheck(config),
        Command::Tunnel => tunnel(config),
    }
}

fn dispersion(config: &ScenarioConfig) -> Result<Dispersion, CliError> {
    let regime = match config.physics.regime {
        RegimeArg::Rel => Regime::Relativistic,
        RegimeArg::Nonrel => Regime::Nonrelativistic,
    };
    Ok(Dispersion::new(config.physics.mass, regime)?)
}

fn half_line(config: &ScenarioConfig) -> HalfLine {
    match config.physics.branch {
        Sign::Pos => HalfLine::NonNegative,
        Sign::Neg => HalfLine::NonPositive,
    }
}

fn branch(config: &ScenarioConfig) -> BranchConfig {
    let energy = match config.physics.energy_sign {
        Sign::Pos => EnergySign::Positive,
        Sign::Neg => EnergySign::Negative,
    };
    BranchConfig::new(energy, half_line(config))
}

fn momentum_state(config: &ScenarioConfig) -> Result<MomentumWavefunction, CliError> {
    let g = &config.grids;
    let s = &config.state;
    let half = half_line(config);
    Ok(match s.kind {
        StateKind::Gaussian => {
            MomentumWavefunction::gaussian(MomentumGrid::uniform(g.p_min, g.p_max, g.np, half)?, s.p0, s.sigma_p)?
        }
        StateKind::Eigenstate => {
            let spacing = (g.p_max - g.p_min) / (g.np - 1) as f64;
            MomentumWavefunction::eigenstate(s.p0, spacing, half)?
        }
        StateKind::File => {
            let path = s.path.as_deref().expect("validated");
            let rows = read_columns(path, 3)?;
            let nodes = rows.iter().map(|r| r[0]).collect();
            let amps = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
            MomentumWavefunction::new(MomentumGrid::new(nodes, half)?, amps)?
        }
    })
}

/// Whitespace- or comma-separated numeric columns; `#` starts a comment.
pub fn read_columns(path: &Path, width: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == width => rows.push(v),
            // a non-numeric first line is a column header
            None if rows.is_empty() => continue,
            _ => {
                return Err(CliError::Usage(format!(
                    "{}:{}: expected {width} numeric columns, got `{line}`",
                    path.display(),
                    n + 1
                )))
            }
        }
    }
    Ok(rows)
}

fn times(config: &ScenarioConfig) -> Vec<f64> {
    linspace(config.grids.t_min, config.grids.t_max, config.grids.nt)
}

fn complex_rows(xs: &[f64], zs: &[Complex64]) -> Vec<Vec<String>> {
    xs.iter()
        .zip(zs)
        .map(|(x, z)| vec![num(*x), num(z.re), num(z.im), num(z.norm_sqr())])
        .collect()
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => unreachable!("object literal"),
    }
}

fn toa(config: &ScenarioConfig) -> Result<Emission, CliError> {
    let state = momentum_state(config)?;
    let d = dispersion(config)?;
    let b = branch(config);
    let g = &config.grids;
    let ts = times(config);
    let route = match config.extra {
        Extra::Toa { route } => route,
        _ => Route::Direct,
    };
    let amplitude = match (config.command, route) {
        (Command::ToaNonrel, _) if b.energy_sign == EnergySign::Positive => {
            nonrel_arrival_amplitude(&state, g.x1, g.x2, &ts, config.physics.mass)?
        }
        (_, Route::TimeBasis) => arrival_amplitude_via_time_basis(&state, g.x1, g.x2, &ts, &d, b)?,
        _ => arrival_amplitude(&state, g.x1, g.x2, &ts, &d, b)?,
    };
    let dist = arrival_distribution(&amplitude);
    let summary = object(json!({
        "peak_t": dist.peak_time(),
        "total_mass": dist.total_mass,
        "state_mass": state.norm_squared(),
        "state_normalized": state.is_normalized(),
    }));
    let payload = object(json!({
        "t": amplitude.times,
        "re": amplitude.amplitudes.iter().map(|z| z.re).collect::<Vec<_>>(),
        "im": amplitude.amplitudes.iter().map(|z| z.im).collect::<Vec<_>>(),
        "prob": dist.density,
    }));
    Ok(Emission {
        columns: vec!["t", "re", "im", "prob"],
        rows: complex_rows(&amplitude.times, &amplitude.amplitudes),
        payload,
        summary,
    })
}

fn ortho(config: &ScenarioConfig) -> Result<Emission, CliError> {
    let Extra::Ortho { check, width, center, ref cutoffs, resolution } = config.extra else {
        unreachable!("resolved for ortho");
    };
    let d = dispersion(config)?;
    let b = branch(config);
    let test = SmearingTest::gaussian(center, width, cutoffs, resolution)?;
    let kinds: &[CheckSel] = match check {
        CheckSel::All => &[
            CheckSel::Time,
            CheckSel::Position,
            CheckSel::EvenKernel,
            CheckSel::TimeUnrestricted,
            CheckSel::PositionUnrestricted,
        ],
        ref one => std::slice::from_ref(one),
    };
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for kind in kinds {
        let r = match kind {
            CheckSel::Time => check_time_orthogonality(&d, b, &test)?,
            CheckSel::Position => check_position_orthogonality(&d, b, &test)?,
            CheckSel::EvenKernel => check_even_kernel_orthogonality(&d, &test)?,
            CheckSel::TimeUnrestricted => check_time_orthogonality_unrestricted(&d, &test)?,
            CheckSel::PositionUnrestricted => check_position_orthogonality_unrestricted(&d, &test)?,
            CheckSel::All => unreachable!(),
        };
        let branch_text = r.branch.map(|b| b.to_string()).unwrap_or_else(|| "both".into());
        for (cutoff, err) in &r.cutoff_sequence {
            rows.push(vec![r.check.name().to_string(), branch_text.clone(), num(*cutoff), num(*err)]);
        }
        let mut entry = object(serde_json::to_value(&r).expect("report serializes"));
        entry.insert("monotone".into(), json!(r.is_monotone(MONOTONE_JITTER)));
        reports.push(Value::Object(entry));
    }
    let summary = object(json!({
        "final_errors": reports
            .iter()
            .map(|r| json!({ "check": r["check"], "reproduction_error": r["reproduction_error"], "monotone": r["monotone"] }))
            .collect::<Vec<_>>(),
    }));
    Ok(Emission {
        columns: vec!["check", "branch", "cutoff", "error"],
        rows,
        payload: object(json!({ "reports": reports })),
        summary,
    })
}

fn appendix(config: &ScenarioConfig) -> Result<Emission, CliError> {
    let Extra::Appendix { packet } = config.extra else {
        unreachable!("resolved for appendix-demo");
    };
    let d = dispersion(config)?;
    let g = &config.grids;
    let s = &config.state;
    let p_max = g.p_min.abs().max(g.p_max.abs());
    let p0 = s.p0.abs();
    let centres = match packet {
        Packet::Mixed => {
            let c = Complex64::new(0.5f64.sqrt(), 0.0);
            vec![(-p0, c), (p0, c)]
        }
        Packet::Positive => vec![(p0, Complex64::new(1.0, 0.0))],
    };
    let state = FullLineWavefunction::gaussians(p_max, g.np, s.sigma_p, &centres)?;
    let ts = times(config);
    let routes = even_kernel_arrival_routes(&state, g.x1, g.x2, &ts, &d, branch(config).energy_sign)?;
    let (a, c) = (&routes.route_direct.amplitudes, &routes.route_collapsed.amplitudes);
    let rows = ts
        .iter()
        .zip(a.iter().zip(c))
        .map(|(t, (a, c))| vec![num(*t), num(a.re), num(a.im), num(c.re), num(c.im)])
        .collect();
    Ok(Emission {
        columns: vec!["t", "direct_re", "direct_im", "collapsed_re", "collapsed_im"],
        rows,
        payload: object(json!({
            "t": ts,
            "direct": a,
            "collapsed": c,
        })),
        summary: object(json!({ "l2_discrepancy": routes.l2_discrepancy, "packet": packet })),
    })
}

fn tep_evolve(config: &ScenarioConfig) -> Result<Emission, CliError> {
    let Extra::Tep { x_min, x_max, nx, t2 } = config.extra else {
        unreachable!("resolved for tep-evolve");
    };
    let d = dispersion(config)?;
    let state = momentum_state(config)?;
    let start = PositionWavefunction::from_momentum(&state, config.grids.x1, linspace(x_min, x_max, nx), config.grids.t_min)?;
    let end = evolve_tep(&start, t2, &d, branch(config))?;
    Ok(Emission {
        columns: vec!["x", "re", "im", "prob"],
        rows: complex_rows(end.positions(), end.amplitudes()),
        payload: object(json!({
            "x": end.positions(),
            "re": end.amplitudes().iter().map(|z| z.re).collect::<Vec<_>>(),
            "im": end.amplitudes().iter().map(|z| z.im).collect::<Vec<_>>(),
        })),
        summary: object(json!({
            "t": t2,
            "norm_before": start.norm_squared(),
            "norm_after": end.norm_squared(),
            "centroid": end.centroid(),
        })),
    })
}

fn crosscheck(config: &ScenarioConfig) -> Result<Emission, CliError> {
    let d = dispersion(config)?;
    let state = momentum_state(config)?;
    let g = &config.grids;
    let window = TimeWindow::new(g.t_min, g.t_max, g.nt)?;
    let r = crosscheck_arrival_vs_current(&state, g.x1, g.x2, window, &d)?;
    let rows = r
        .times
        .iter()
        .zip(r.arrival_density.iter().zip(&r.current))
        .map(|(t, (a, j))| vec![num(*t), num(*a), num(*j)])
        .collect();
    Ok(Emission {
        columns: vec!["t", "arrival", "J"],
        rows,
        payload: object(json!({ "t": r.times, "arrival": r.arrival_density, "J": r.current })),
        summary: object(json!({
            "l1_distance": r.l1_distance,
            "arrival_mass": r.arrival_mass,
            "current_mass": r.current_mass,
            "relative_spread": r.relative_spread,
            "position_nodes": r.position_nodes,
            "position_spacing": r.position_spacing,
        })),
    })
}

fn potential(arg: &PotentialArg) -> Result<PotentialSpec, CliError> {
    Ok(match arg {
        PotentialArg::Rect { v0, left, width } => PotentialSpec::rectangular(*v0, *left, *width)?,
        PotentialArg::Parab { v0, k, center } => PotentialSpec::parabolic(*v0, *k, *center)?,
        PotentialArg::File { path } => {
            let rows = read_columns(path, 2)?;
            PotentialSpec::tabulated(rows.into_iter().map(|r| (r[0], r[1])).collect())?
        }
    })
}

fn tunnel(config: &ScenarioConfig) -> Result<Emission, CliError> {
    let Extra::Tunnel { potential: ref arg, ref energies, bracket } = config.extra else {
        unreachable!("resolved for tunnel");
    };
    let v = potential(arg)?;
    let bracket = bracket.unwrap_or_else(|| v.default_bracket());
    let mass = config.physics.mass;
    let exact = match v {
        PotentialSpec::Rectangular { v0, width, .. } => Some((v0, width)),
        _ => None,
    };
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for &e in energies {
        let r = tunneling_probability(&v, e, mass, bracket)?;
        let t_exact = exact.map(|(v0, w)| exact_rectangular_transmission(v0, w, e, mass)).transpose()?;
        let mut row = vec![num(e), num(r.turning_points.0), num(r.turning_points.1), num(r.im_w), num(r.probability)];
        if let Some(t) = t_exact {
            row.push(num(t));
        }
        rows.push(row);
        results.push(json!({
            "E": e,
            "a": r.turning_points.0,
            "b": r.turning_points.1,
            "imW": r.im_w,
            "P_wkb": r.probability,
            "T_exact": t_exact,
        }));
    }
    let mut columns = vec!["E", "a", "b", "imW", "P_wkb"];
    if exact.is_some() {
        columns.push("T_exact");
    }
    Ok(Emission {
        columns,
        rows,
        payload: object(json!({ "results": results })),
        summary: object(json!({ "energies": energies.len(), "potential": arg.to_string() })),
    })
}
