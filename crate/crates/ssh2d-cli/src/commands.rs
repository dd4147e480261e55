//! One runner per subcommand, each producing a table of results.

use std::f64::consts::PI;

use serde_json::json;
use ssh2d::bloch::{
    bands, closed_grid, gap, high_symmetry_path, high_symmetry_points, high_symmetry_sums,
    symmetry_residuals, Momentum,
};
use ssh2d::lattice::{hopping_set, HoppingSet};
use ssh2d::phases::{scan_with, BetaRange, ClassifyOptions, PhaseLabel};
use ssh2d::realspace::{
    localization_report, midgap_filter, spectrum, BulkWindow, FiniteLatticeSpec, Region, BULK_GRID,
};
use ssh2d::ribbon::{ribbon_spectrum, RibbonSpec};
use ssh2d::topology::{berry_curvature_map, dirac_points, trace_nodal_lines, zak_vector};

use crate::config::{BandsMode, CommandOptions, Report, RunConfig};
use crate::output::{PlotSpec, Results, Table};
use crate::CliError;

pub fn run(config: &RunConfig) -> Result<Results, CliError> {
    match config.options {
        CommandOptions::Bands { mode, per_segment, grid } => run_bands(config, mode, per_segment, grid),
        CommandOptions::Symm { per_segment } => run_symm(config, per_segment),
        CommandOptions::Zak { lines, steps } => run_zak(config, lines, steps),
        CommandOptions::Dirac { seed_grid, radius, samples } => run_dirac(config, seed_grid, radius, samples),
        CommandOptions::Nodal { grid, tol } => run_nodal(config, grid, tol),
        CommandOptions::Curvature { grid } => run_curvature(config, grid),
        CommandOptions::Finite { .. } => run_finite(config),
        CommandOptions::Ribbon { orientation, width, k_samples } => run_ribbon(
            config,
            RibbonSpec {
                orientation,
                width,
                k_samples,
            },
        ),
        CommandOptions::PhaseDiagram { .. } => run_phase_diagram(config),
    }
}

fn hoppings(config: &RunConfig) -> Result<HoppingSet, CliError> {
    Ok(config.overrides.apply(hopping_set(&config.geometry())?))
}

fn lines_plot(x: &str, ys: &[&str], xlabel: &str, ylabel: &str) -> Option<PlotSpec> {
    Some(PlotSpec {
        x: x.into(),
        ys: ys.iter().map(|s| s.to_string()).collect(),
        color: None,
        xlabel: xlabel.into(),
        ylabel: ylabel.into(),
        points: false,
    })
}

fn run_bands(config: &RunConfig, mode: BandsMode, per_segment: usize, grid: usize) -> Result<Results, CliError> {
    let h = hoppings(config)?;
    let (mut table, plot) = match mode {
        BandsMode::Path => {
            let mut t = Table::new(&["s", "kx", "ky", "e_minus*", "e_plus*", "gap*"]);
            let mut s = 0.0;
            let mut prev: Option<Momentum> = None;
            for k in high_symmetry_path(per_segment) {
                if let Some(p) = prev {
                    s += (k.kx - p.kx).hypot(k.ky - p.ky);
                }
                prev = Some(k);
                let b = bands(&h, k);
                t.push(vec![s.into(), k.kx.into(), k.ky.into(), b.e_minus.into(), b.e_plus.into(), b.gap.into()]);
            }
            (t, lines_plot("s", &["e_minus", "e_plus"], "G-X-M-G-Y", "E / J"))
        }
        BandsMode::Grid => {
            let mut t = Table::new(&["kx", "ky", "e_minus*", "e_plus*", "gap*"]);
            let ks = closed_grid(grid);
            for &ky in &ks {
                for &kx in &ks {
                    let b = bands(&h, Momentum::raw(kx, ky));
                    t.push(vec![kx.into(), ky.into(), b.e_minus.into(), b.e_plus.into(), b.gap.into()]);
                }
            }
            (t, None)
        }
    };
    let summary = format!("{} k-points", table.len());
    table = table.scaled(config.scale_mhz);
    Ok(Results {
        table,
        json: None,
        plot,
        summary,
    })
}

fn run_symm(config: &RunConfig, per_segment: usize) -> Result<Results, CliError> {
    let h = hoppings(config)?;
    let mut t = Table::new(&["point", "kx", "ky", "signed_sum*", "gap*", "time_reversal", "inversion", "chiral"]);
    let sums = high_symmetry_sums(&h);
    for ((name, k), (_, sum)) in high_symmetry_points().into_iter().zip(sums) {
        let r = symmetry_residuals(&h, k);
        t.push(vec![
            name.into(),
            k.kx.into(),
            k.ky.into(),
            sum.into(),
            gap(&h, k).into(),
            r.time_reversal.into(),
            r.inversion.into(),
            r.chiral.into(),
        ]);
    }
    let mut worst = [0.0f64; 2];
    for k in high_symmetry_path(per_segment) {
        let r = symmetry_residuals(&h, k);
        worst[0] = worst[0].max(r.time_reversal);
        worst[1] = worst[1].max(r.inversion);
        t.push(vec![
            "path".into(),
            k.kx.into(),
            k.ky.into(),
            f64::NAN.into(),
            gap(&h, k).into(),
            r.time_reversal.into(),
            r.inversion.into(),
            r.chiral.into(),
        ]);
    }
    Ok(Results {
        table: t.scaled(config.scale_mhz),
        json: None,
        plot: None,
        summary: format!("max residuals: time reversal {:.3e}, inversion {:.3e}", worst[0], worst[1]),
    })
}

fn zak_label(q: Option<(u8, u8)>) -> &'static str {
    match q {
        Some((0, 0)) => "NT",
        Some((1, 0)) => "TX",
        Some((0, 1)) => "TY",
        Some(_) => "TXY",
        None => "unquantized",
    }
}

fn run_zak(config: &RunConfig, lines: usize, steps: usize) -> Result<Results, CliError> {
    let h = hoppings(config)?;
    let z = zak_vector(&h, lines, steps)?;
    let label = zak_label(z.quantized(ClassifyOptions::default().zak_tol));
    let mut t = Table::new(&["zx", "zy", "zx_over_pi", "zy_over_pi", "std_x", "std_y", "label"]);
    t.push(vec![
        z.zx.into(),
        z.zy.into(),
        (z.zx / PI).into(),
        (z.zy / PI).into(),
        z.std_x.into(),
        z.std_y.into(),
        label.into(),
    ]);
    let transverse: Vec<f64> = (0..lines).map(|t| -PI + 2.0 * PI * t as f64 / lines as f64).collect();
    let json = json!({
        "zak": {
            "zx": z.zx,
            "zy": z.zy,
            "std_x": z.std_x,
            "std_y": z.std_y,
            "label": label,
        },
        "lines": {
            "transverse_k": transverse,
            "x": z.per_line_x,
            "y": z.per_line_y,
        },
    });
    Ok(Results {
        table: t,
        json: Some(json),
        plot: None,
        summary: format!("Z = ({:.6}, {:.6}) = ({:.4}, {:.4}) pi [{label}]", z.zx, z.zy, z.zx / PI, z.zy / PI),
    })
}

fn run_dirac(config: &RunConfig, seed_grid: usize, radius: f64, samples: usize) -> Result<Results, CliError> {
    let h = hoppings(config)?;
    let points = dirac_points(&h, seed_grid, radius, samples)?;
    let mut t = Table::new(&["kx", "ky", "charge", "tilt_x*", "tilt_y*", "v_major*", "v_minor*", "anisotropy"]);
    for p in &points {
        t.push(vec![
            p.k.kx.into(),
            p.k.ky.into(),
            p.charge.into(),
            p.tilt[0].into(),
            p.tilt[1].into(),
            p.velocities[0].into(),
            p.velocities[1].into(),
            p.anisotropy.into(),
        ]);
    }
    Ok(Results {
        table: t.scaled(config.scale_mhz),
        json: None,
        plot: None,
        summary: format!("{} Dirac point(s)", points.len()),
    })
}

fn run_nodal(config: &RunConfig, grid: usize, tol: f64) -> Result<Results, CliError> {
    let h = hoppings(config)?;
    let set = trace_nodal_lines(&h, grid, tol);
    let mut t = Table::new(&["line", "vertex", "kx", "ky", "gap*"]);
    for (i, line) in set.polylines.iter().enumerate() {
        for (j, k) in line.iter().enumerate() {
            t.push(vec![i.into(), j.into(), k.kx.into(), k.ky.into(), gap(&h, *k).into()]);
        }
    }
    Ok(Results {
        table: t.scaled(config.scale_mhz),
        json: None,
        plot: Some(PlotSpec {
            x: "kx".into(),
            ys: vec!["ky".into()],
            color: None,
            xlabel: "kx".into(),
            ylabel: "ky".into(),
            points: true,
        }),
        summary: format!("{} polyline(s), {} vertices", set.polylines.len(), set.vertex_count()),
    })
}

fn run_curvature(config: &RunConfig, grid: usize) -> Result<Results, CliError> {
    let h = hoppings(config)?;
    let map = berry_curvature_map(&h, grid)?;
    let ks = closed_grid(grid);
    let mut t = Table::new(&["kx", "ky", "plaquette_phase"]);
    for iy in 0..grid - 1 {
        for ix in 0..grid - 1 {
            let kx = 0.5 * (ks[ix] + ks[ix + 1]);
            let ky = 0.5 * (ks[iy] + ks[iy + 1]);
            t.push(vec![kx.into(), ky.into(), map.plaquettes[iy * (grid - 1) + ix].into()]);
        }
    }
    Ok(Results {
        table: t,
        json: None,
        plot: Some(PlotSpec {
            x: "kx".into(),
            ys: vec!["ky".into()],
            color: Some("plaquette_phase".into()),
            xlabel: "kx".into(),
            ylabel: "ky".into(),
            points: true,
        }),
        summary: format!("Chern number {}, max |F| {:.3e}", map.chern, map.max_abs()),
    })
}

fn region_name(r: Option<Region>) -> &'static str {
    match r {
        Some(Region::XEdge) => "x_edge",
        Some(Region::YEdge) => "y_edge",
        Some(Region::Corner) => "corner",
        None => "bulk",
    }
}

fn run_finite(config: &RunConfig) -> Result<Results, CliError> {
    let CommandOptions::Finite {
        cells_x,
        cells_y,
        boundary,
        coupling,
        report,
    } = config.options
    else {
        unreachable!()
    };
    let geom = config.geometry();
    let mut spec = FiniteLatticeSpec::open(cells_x, cells_y).with_coupling(coupling);
    spec.boundary = boundary;
    if config.overrides.touches_inter() {
        spec.hoppings = Some(hoppings(config)?);
    }
    spec.j2x = config.overrides.j2x;
    spec.j2y = config.overrides.j2y;
    let eigs = spectrum(&spec, &geom)?;
    let rep = localization_report(&eigs, &spec, &geom)?;
    let window = BulkWindow::from_bands(&spec.effective_hoppings(&geom)?, BULK_GRID);
    let midgap = midgap_filter(&eigs, &window);
    let mut t = Table::new(&[
        "index",
        "energy*",
        "midgap",
        "x_edge",
        "y_edge",
        "corner",
        "ipr",
        "region",
        "zero_energy",
        "decay",
        "rate",
        "r2_exp",
        "r2_poly",
    ]);
    for s in &rep.states {
        let is_mid = midgap.contains(&s.index);
        if report == Report::Summary && !is_mid {
            continue;
        }
        t.push(vec![
            s.index.into(),
            s.energy.into(),
            is_mid.into(),
            s.x_edge().into(),
            s.y_edge().into(),
            s.corner.into(),
            s.ipr.into(),
            region_name(s.region).into(),
            s.zero_energy.into(),
            s.decay.label().into(),
            s.rate.into(),
            s.r2_exp.into(),
            s.r2_poly.into(),
        ]);
    }
    Ok(Results {
        table: t.scaled(config.scale_mhz),
        json: None,
        plot: lines_plot("index", &["energy"], "state", "E / J").map(|mut p| {
            p.points = true;
            p
        }),
        summary: format!("{} states, {} mid-gap, |H|_F = {:.6}", eigs.len(), midgap.len(), rep.h_norm),
    })
}

fn run_ribbon(config: &RunConfig, spec: RibbonSpec) -> Result<Results, CliError> {
    let h = hoppings(config)?;
    let r = ribbon_spectrum(&h, &spec)?;
    let mut t = Table::new(&["k", "band", "energy*", "edge_weight", "edge_branch"]);
    for (i, &k) in r.momenta.iter().enumerate() {
        for b in 0..r.energies[i].len() {
            t.push(vec![
                k.into(),
                b.into(),
                r.energies[i][b].into(),
                r.edge_weights[i][b].into(),
                r.edge_branch[i][b].into(),
            ]);
        }
    }
    Ok(Results {
        table: t.scaled(config.scale_mhz),
        json: None,
        plot: Some(PlotSpec {
            x: "k".into(),
            ys: vec!["energy".into()],
            color: Some("edge_weight".into()),
            xlabel: "k".into(),
            ylabel: "E / J".into(),
            points: true,
        }),
        summary: format!("{} edge-branch samples", r.edge_state_count()),
    })
}

fn run_phase_diagram(config: &RunConfig) -> Result<Results, CliError> {
    let CommandOptions::PhaseDiagram {
        resolution,
        beta_min,
        beta_max,
        gap_tol,
        grid,
    } = config.options
    else {
        unreachable!()
    };
    let opts = ClassifyOptions {
        gap_tol,
        grid,
        ..ClassifyOptions::default()
    };
    let range = BetaRange {
        min: beta_min,
        max: beta_max,
    };
    let points = scan_with(&range, config.theta_m, resolution, &opts)?;
    let mut t = Table::new(&["beta_x", "beta_y", "label", "label_code", "min_gap*", "zx", "zy", "n_dirac", "diagnostic"]);
    let mut counts = [0usize; 8];
    for p in &points {
        let row = match &p.outcome {
            Ok(pt) => {
                let code = PhaseLabel::ALL.iter().position(|l| *l == pt.label).unwrap_or(7);
                counts[code] += 1;
                let (zx, zy) = pt.zak.as_ref().map_or((f64::NAN, f64::NAN), |z| (z.zx, z.zy));
                vec![
                    p.beta_x.into(),
                    p.beta_y.into(),
                    pt.label.as_str().into(),
                    code.into(),
                    pt.min_gap.into(),
                    zx.into(),
                    zy.into(),
                    pt.n_dirac.into(),
                    pt.diagnostic.clone().unwrap_or_default().into(),
                ]
            }
            Err(msg) => {
                counts[7] += 1;
                vec![
                    p.beta_x.into(),
                    p.beta_y.into(),
                    "ERROR".into(),
                    7usize.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    0usize.into(),
                    msg.clone().into(),
                ]
            }
        };
        t.push(row);
    }
    let summary = PhaseLabel::ALL
        .iter()
        .zip(counts)
        .map(|(l, c)| format!("{l} {c}"))
        .chain((counts[7] > 0).then(|| format!("ERROR {}", counts[7])))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(Results {
        table: t.scaled(config.scale_mhz),
        json: None,
        plot: Some(PlotSpec {
            x: "beta_x".into(),
            ys: vec!["beta_y".into()],
            color: Some("label_code".into()),
            xlabel: "beta_x".into(),
            ylabel: "beta_y".into(),
            points: true,
        }),
        summary,
    })
}
