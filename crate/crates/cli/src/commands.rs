use lrchain::exact::{distinct_levels, spectrum, spectrum_sweep};
use lrchain::meanfield::{
    bifurcation_histogram, deviation_with_mode, ConfigMode, distinct_couplings, lowest_semiclassical,
    semiclassical_level, stable_levels, Reductions,
};
use lrchain::model::{clausen_truncated, eta, zeta, DEFAULT_TOL};
use lrchain::spinwaves::{critical_field, dispersion, gap_scan};
use lrchain::sublattice::{bdg_bands, stationary_angles};
use lrchain::Alpha;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{Cell, Table};
use crate::CliError;

pub struct Report {
    pub table: Table,
    pub summary: Value,
    /// One-line human summary for stdout.
    pub line: String,
    pub warnings: Vec<String>,
}

fn header(table: &mut Table, cfg: &RunConfig) {
    let spec = cfg.spec();
    table.comment(format!("lrchain {} {}", env!("CARGO_PKG_VERSION"), cfg.command.as_deref().unwrap_or("")));
    table.comment(format!(
        "N={} spin2={} alpha={} J0={} B={} boundary={:?} kac={}",
        spec.n_sites, spec.spin2, spec.alpha, spec.j0, spec.b, spec.boundary, spec.kac_rescale
    ));
    table.comment(format!("energies in {}", cfg.energy_unit()));
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command.as_deref().unwrap_or("") {
        "spectrum" => cmd_spectrum(cfg),
        "sweep" => cmd_sweep(cfg),
        "semiclassical" => cmd_semiclassical(cfg),
        "dispersion" => cmd_dispersion(cfg),
        "gap" => cmd_gap(cfg),
        "bifurcations" => cmd_bifurcations(cfg),
        "deviation" => cmd_deviation(cfg),
        "sublattice" => cmd_sublattice(cfg),
        "special" => cmd_special(cfg),
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    let es = cfg.energy_scale();
    let levels = spectrum(&cfg.spec())?;
    let mut table = Table::new(&["index", "energy"]);
    header(&mut table, cfg);
    for (i, e) in levels.iter().enumerate() {
        table.push(vec![i.into(), (e * es).into()]);
    }
    let distinct = distinct_levels(&levels);
    Ok(Report {
        line: format!(
            "{} levels ({} distinct), ground energy {}",
            levels.len(),
            distinct.len(),
            levels[0] * es
        ),
        summary: json!({
            "dimension": levels.len(),
            "distinct_levels": distinct.iter().map(|(e, d)| json!({"energy": e * es, "degeneracy": d})).collect::<Vec<_>>(),
        }),
        table,
        warnings: vec![],
    })
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let es = cfg.energy_scale();
    let grid = cfg.grid()?;
    let series = spectrum_sweep(&cfg.spec(), &grid)?;
    let dim = series.levels.first().map_or(0, Vec::len);
    let keep = cfg.levels.unwrap_or(dim).min(dim);
    let names: Vec<String> = std::iter::once("b".to_string())
        .chain((0..keep).map(|i| format!("e{i}")))
        .collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut table = Table::new(&names);
    header(&mut table, cfg);
    for (b, levels) in series.b_grid.iter().zip(&series.levels) {
        let mut row = vec![Cell::F(*b)];
        row.extend(levels[..keep].iter().map(|e| Cell::F(e * es)));
        table.push(row);
    }
    Ok(Report {
        line: format!("{} fields x {keep} levels", grid.len()),
        summary: json!({"fields": grid.len(), "levels": keep, "dimension": dim}),
        table,
        warnings: vec![],
    })
}

fn cmd_semiclassical(cfg: &RunConfig) -> Result<Report, CliError> {
    let es = cfg.energy_scale();
    let spec = cfg.spec();
    let b = spec.b;
    let mode = cfg.mode.unwrap_or(ConfigMode::EpsOnly);
    let couplings = distinct_couplings(
        &spec,
        mode,
        Reductions {
            global_flip: true,
            mirror: true,
        },
    )?;
    let mut table = Table::new(&["j_mu", "slope", "multiplicity", "stable", "branch", "b_c", "energy"]);
    header(&mut table, cfg);
    table.comment(format!("energy = total extremal energy at B = {b}; rows without a level have empty branch"));
    let mut n_levels = 0usize;
    for c in &couplings {
        let (branch, b_c, energy) = match semiclassical_level(c) {
            Ok(l) => {
                n_levels += 1;
                let l = l.for_chain(&spec)?;
                (format!("{:?}", l.branch).to_lowercase(), l.b_c, l.total_energy(b) * es)
            }
            Err(_) => (String::new(), f64::NAN, f64::NAN),
        };
        table.push(vec![
            c.j_mu.into(),
            c.b_mu_per_field.into(),
            c.multiplicity.into(),
            c.stable.into(),
            Cell::S(branch),
            b_c.into(),
            energy.into(),
        ]);
    }
    let stable = stable_levels(&spec, mode)?;
    let ground = lowest_semiclassical(&stable, b).map(|e| e * es);
    Ok(Report {
        line: format!(
            "{} distinct couplings, {n_levels} levels, lowest stable energy {}",
            couplings.len(),
            ground.map_or("n/a".to_string(), |g| g.to_string())
        ),
        summary: json!({"couplings": couplings.len(), "levels": n_levels, "ground_energy": ground}),
        table,
        warnings: vec![],
    })
}

fn cmd_dispersion(cfg: &RunConfig) -> Result<Report, CliError> {
    let es = cfg.energy_scale();
    let spec = cfg.spec();
    let kind = cfg.kind.unwrap_or(lrchain::spinwaves::StationaryKind::Uniform);
    let d = dispersion(&spec, kind, spec.b)?;
    let mut table = Table::new(&["k", "g", "f", "energy", "imaginary", "stable", "positive_f", "theta"]);
    header(&mut table, cfg);
    table.comment(format!("kind={kind:?} phi_c={} j_eff={}", d.angle.phi_c, d.angle.j_eff_p));
    for i in 0..d.k_grid.len() {
        table.push(vec![
            d.k_grid[i].into(),
            (d.g[i] * es).into(),
            (d.f[i] * es).into(),
            (d.energy[i] * es).into(),
            (d.imaginary[i] * es).into(),
            d.stable[i].into(),
            d.positive_f[i].into(),
            d.theta[i].into(),
        ]);
    }
    Ok(Report {
        line: format!(
            "{} modes, gap {} at k = {}",
            d.k_grid.len(),
            d.gap * es,
            d.k_grid[d.gap_mode]
        ),
        summary: json!({
            "phi_c": d.angle.phi_c,
            "regime": d.angle.regime,
            "j_eff_p": d.angle.j_eff_p,
            "e0": d.e0 * es,
            "gap": d.gap * es,
            "gap_k": d.k_grid[d.gap_mode],
            "corr_length": d.corr_length,
            "warning": d.warning,
        }),
        table,
        warnings: d.warning.into_iter().collect(),
    })
}

fn cmd_gap(cfg: &RunConfig) -> Result<Report, CliError> {
    let es = cfg.energy_scale();
    let spec = cfg.spec();
    let kind = cfg.kind.unwrap_or(lrchain::spinwaves::StationaryKind::Uniform);
    let b_c = critical_field(&spec, kind)?;
    let mut grid = cfg.grid()?;
    let inserted = grid.len() > 1
        && b_c > grid[0]
        && b_c < grid[grid.len() - 1]
        && !grid.contains(&b_c);
    if inserted {
        grid.push(b_c);
        grid.sort_by(f64::total_cmp);
    }
    let scan = gap_scan(&spec, kind, &grid)?;
    let mut table = Table::new(&["b", "gap", "gap_k", "corr_length"]);
    header(&mut table, cfg);
    table.comment(format!("kind={kind:?} b_c={b_c}{}", if inserted { " (inserted into grid)" } else { "" }));
    for p in &scan.points {
        table.push(vec![
            p.b.into(),
            (p.gap * es).into(),
            p.gap_k.into(),
            p.corr_length.unwrap_or(f64::INFINITY).into(),
        ]);
    }
    let closed = scan.points.iter().find(|p| p.gap == 0.0).map(|p| p.b);
    Ok(Report {
        line: format!(
            "critical field {b_c}; gap {} ; exponents below {:?} above {:?}",
            closed.map_or("stays open on this grid".to_string(), |b| format!("hits 0 at b = {b}")),
            scan.exponent_below,
            scan.exponent_above
        ),
        summary: json!({
            "b_c": b_c,
            "b_c_inserted": inserted,
            "gap_closes_at": closed,
            "exponent_below": scan.exponent_below,
            "exponent_above": scan.exponent_above,
        }),
        table,
        warnings: vec![],
    })
}

fn cmd_bifurcations(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = bifurcation_histogram(
        &cfg.spec(),
        cfg.bins_per_decade.unwrap_or(10),
        cfg.stable_only.unwrap_or(true),
    )?;
    let mut table = Table::new(&["b_lo", "b_hi", "configurations", "levels"]);
    header(&mut table, cfg);
    table.comment(format!("source={:?} stable_only={}", h.source, h.stable_only));
    for i in 0..h.counts.len() {
        table.push(vec![
            h.edges[i].into(),
            h.edges[i + 1].into(),
            h.counts[i].into(),
            h.level_counts[i].into(),
        ]);
    }
    let peak = h.peak(true);
    Ok(Report {
        line: format!("{} bins, {} levels, peak at b = {:?}", h.counts.len(), h.levels, peak),
        summary: json!({
            "source": h.source,
            "configurations": h.configurations,
            "levels": h.levels,
            "peak_by_level": peak,
            "peak_by_configuration": h.peak(false),
        }),
        table,
        warnings: vec![],
    })
}

fn cmd_deviation(cfg: &RunConfig) -> Result<Report, CliError> {
    let es = cfg.energy_scale();
    let grid = cfg.grid()?;
    let pts = deviation_with_mode(&cfg.spec(), &grid, cfg.mode.unwrap_or(ConfigMode::EpsOnly))?;
    let mut table = Table::new(&["b", "exact", "semiclassical", "d"]);
    header(&mut table, cfg);
    for p in &pts {
        table.push(vec![p.b.into(), (p.exact * es).into(), (p.semiclassical * es).into(), p.d.into()]);
    }
    let min_d = pts.iter().map(|p| p.d).fold(f64::INFINITY, f64::min);
    let max_d = pts.iter().map(|p| p.d).fold(f64::NEG_INFINITY, f64::max);
    Ok(Report {
        line: format!("{} fields, d in [{min_d:e}, {max_d:e}]", pts.len()),
        summary: json!({"points": pts.len(), "min_d": min_d, "max_d": max_d}),
        table,
        warnings: vec![],
    })
}

fn cmd_sublattice(cfg: &RunConfig) -> Result<Report, CliError> {
    let es = cfg.energy_scale();
    let spec = cfg.spec();
    let config = stationary_angles(&spec, (cfg.phi_b.unwrap_or(1.0), cfg.phi_c.unwrap_or(1.0)))?;
    let blocks = bdg_bands(&spec, &config)?;
    let mut table = Table::new(&["k", "band1", "band2", "stable"]);
    header(&mut table, cfg);
    table.comment(format!(
        "phi_b={} phi_c={} m_b={} m_c={} residual={:e}",
        config.phi_b, config.phi_c, config.m_b, config.m_c, config.residual
    ));
    let mut unstable = 0;
    for blk in &blocks {
        unstable += usize::from(!blk.stable);
        table.push(vec![blk.k.into(), (blk.bands[0] * es).into(), (blk.bands[1] * es).into(), blk.stable.into()]);
    }
    let warnings = if unstable > 0 {
        vec![format!("{unstable} of {} momenta have complex frequencies", blocks.len())]
    } else {
        vec![]
    };
    Ok(Report {
        line: format!(
            "phi_b = {}, phi_c = {}, {} momenta",
            config.phi_b,
            config.phi_c,
            blocks.len()
        ),
        summary: json!({
            "phi_b": config.phi_b,
            "phi_c": config.phi_c,
            "m_b": config.m_b,
            "m_c": config.m_c,
            "residual": config.residual,
            "iterations": config.iterations,
            "unstable_momenta": unstable,
        }),
        table,
        warnings,
    })
}

fn cmd_special(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut table = Table::new(&["function", "argument", "value"]);
    table.comment(format!("lrchain {} special", env!("CARGO_PKG_VERSION")));
    let mut lines = Vec::new();
    if let Some(a) = cfg.zeta {
        let v = zeta(a, DEFAULT_TOL)?;
        table.push(vec!["zeta".into(), a.into(), v.into()]);
        lines.push(format!("zeta({a}) = {v}"));
    }
    if let Some(a) = cfg.eta {
        let v = eta(a, DEFAULT_TOL)?;
        table.push(vec!["eta".into(), a.into(), v.into()]);
        lines.push(format!("eta({a}) = {v}"));
    }
    if let Some(k) = cfg.clausen_k {
        let alpha = cfg.alpha.unwrap_or(Alpha::Finite(1.0));
        let n = cfg.n_sites.unwrap_or(lrchain::Sites::Infinite);
        let v = clausen_truncated(alpha, k, n)?;
        table.push(vec![Cell::S(format!("clausen(alpha={alpha},n={n})")), k.into(), v.into()]);
        lines.push(format!("C_{alpha}({k}; N = {n}) = {v}"));
    }
    if lines.is_empty() {
        return Err(CliError::Usage("special needs --zeta, --eta or --clausen-k".into()));
    }
    Ok(Report {
        line: lines.join("; "),
        summary: json!({"values": lines}),
        table,
        warnings: vec![],
    })
}
