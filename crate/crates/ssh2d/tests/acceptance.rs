//! Acceptance criteria. Each test prints one PASS/FAIL line.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ssh2d::bloch::{bands, diagonal, gap, high_symmetry_points, symmetry_residuals, Momentum};
use ssh2d::lattice::{hopping_set, magic_angle, GeometryConfig, HoppingSet};
use ssh2d::linalg::hermitian_eig;
use ssh2d::phases::{find_closing, scan, BetaRange, PhaseLabel, ScanPoint};
use ssh2d::realspace::{
    localization_report, midgap_filter, spectrum, BulkWindow, Decay, FiniteLatticeSpec, Region,
    StateReport, BULK_GRID,
};
use ssh2d::ribbon::{closed_ribbon_hamiltonian, ribbon_spectrum, Orientation, RibbonSpec};
use ssh2d::topology::dirac::{characterize_cone, locate_dirac_points, merging_exponents, winding_number};
use ssh2d::topology::{berry_curvature_map, trace_nodal_lines, zak_vector};

fn verdict(n: u32, name: &str, checks: &[(&str, bool)]) {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    if failed.is_empty() {
        println!("criterion {n:>2} {name}: PASS");
    } else {
        println!("criterion {n:>2} {name}: FAIL [{}]", failed.join("; "));
    }
    assert!(failed.is_empty(), "criterion {n} failed: {failed:?}");
}

fn h_at(bx: f64, by: f64) -> HoppingSet {
    hopping_set(&GeometryConfig::magic(bx, by)).unwrap()
}

fn near(phase: f64, target: f64, tol: f64) -> bool {
    let d = (phase - target).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d) <= tol
}

#[test]
fn c01_zak_labels() {
    let start = Instant::now();
    let mut checks = Vec::new();
    for ((bx, by), (ex, ey)) in [((0.8, 0.2), (PI, 0.0)), ((0.2, 0.8), (0.0, PI)), ((0.8, 0.8), (PI, PI))] {
        let z = zak_vector(&h_at(bx, by), 201, 401).unwrap();
        println!("  ({bx}, {by}): zx = {:.6}, zy = {:.6}", z.zx, z.zy);
        checks.push(near(z.zx, ex, 0.05 * PI) && near(z.zy, ey, 0.05 * PI));
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(1, "Zak labels", &[
        ("(0.8,0.2) -> (pi,0)", checks[0]),
        ("(0.2,0.8) -> (0,pi)", checks[1]),
        ("(0.8,0.8) -> (pi,pi)", checks[2]),
        ("runtime < 30 s", elapsed < 30.0),
    ]);
}

#[test]
fn c02_dirac_pair() {
    let h = h_at(0.6, 0.6);
    let search = locate_dirac_points(&h, 301).unwrap();
    let pts = &search.points;
    let two = pts.len() == 2;
    let (mut related, mut charges, mut residual_ok, mut tilted, mut untilted) = (false, false, false, false, false);
    if two {
        related = pts[0].distance(&pts[1].neg()) < 1e-8;
        let w: Vec<(i32, f64)> = pts.iter().map(|&k| winding_number(&h, k, 0.1, 256).unwrap()).collect();
        let mut q = [w[0].0, w[1].0];
        q.sort();
        charges = q == [-1, 1];
        residual_ok = w.iter().all(|(q, raw)| (raw - *q as f64).abs() < 1e-3);
        let cone = characterize_cone(&h, pts[0]).unwrap();
        tilted = cone.tilt[0].hypot(cone.tilt[1]) > 0.0 && cone.anisotropy > 1.0;
        let chiral = characterize_cone(&h.chiral(), pts[0]).unwrap();
        untilted = chiral.tilt[0].hypot(chiral.tilt[1]) < 1e-10;
        println!("  points {:?}, tilt {:?}, anisotropy {:.4}", pts, cone.tilt, cone.anisotropy);
    }
    verdict(2, "Dirac pair", &[
        ("exactly two zeros", two),
        ("k1 = -k2", related),
        ("charges +1 and -1", charges),
        ("winding residual < 1e-3", residual_ok),
        ("tilted and anisotropic", tilted),
        ("no tilt without intra couplings", untilted),
    ]);
}

#[test]
fn c03_high_symmetry_closings() {
    let mut ok = true;
    for (jxp, jyp, jx) in [(1.0, 0.6, 0.3), (-0.7, 1.3, 0.45), (2.0, -0.5, 0.8)] {
        // jy from each signed-sum condition
        let conditions = [
            -(jxp + jyp + jx),
            jxp + jyp - jx,
            jxp - jyp + jx,
            -jxp + jyp + jx,
        ];
        for (target, jy) in conditions.into_iter().enumerate() {
            let h = HoppingSet::new(jxp, jx, jyp, jy, 0.3, -0.2);
            for (i, (name, k)) in high_symmetry_points().into_iter().enumerate() {
                let g = gap(&h, k);
                let good = if i == target { g < 1e-12 } else { g > 1e-3 };
                if !good {
                    println!("  condition {target}: gap at {name} = {g:e}");
                }
                ok &= good;
            }
        }
    }
    verdict(3, "high-symmetry closings", &[("closes only at the constructed point", ok)]);
}

#[test]
fn c04_nodal_lines() {
    let h = h_at(0.5, 0.5);
    let set = trace_nodal_lines(&h, 301, 1e-6);
    let (j1, j2) = (h.jx, h.jxp);
    let gap_ok = set.vertices().all(|&k| gap(&h, k) < 1e-6);
    let factor_ok = set.vertices().all(|k| {
        (j2 * (0.5 * (k.kx - k.ky)).cos() + j1 * (0.5 * (k.kx + k.ky)).cos()).abs() < 1e-6
    });
    let perturbed = locate_dirac_points(&h_at(0.52, 0.5), 301).unwrap();
    println!(
        "  {} polylines, {} vertices; perturbed: {} zeros, extended = {}",
        set.polylines.len(),
        set.vertex_count(),
        perturbed.zeros.len(),
        perturbed.extended
    );
    verdict(4, "nodal lines", &[
        ("nonempty", !set.is_empty()),
        ("vertex gap < 1e-6", gap_ok),
        ("factorized condition < 1e-6", factor_ok),
        ("perturbation leaves <= 2 isolated zeros", !perturbed.extended && perturbed.points.len() <= 2),
    ]);
}

#[test]
fn c05_bloch_realspace_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let g = GeometryConfig::new(
            rng.gen_range(0.05..0.95),
            rng.gen_range(0.05..0.95),
            rng.gen_range(0.0..FRAC_PI_2),
        );
        let e = spectrum(&FiniteLatticeSpec::periodic(8, 8), &g).unwrap().values;
        let h = hopping_set(&g).unwrap();
        let mut bloch = Vec::new();
        for jx in 0..8 {
            for jy in 0..8 {
                let b = bands(&h, Momentum::raw(2.0 * PI * jx as f64 / 8.0, 2.0 * PI * jy as f64 / 8.0));
                bloch.push(b.e_minus);
                bloch.push(b.e_plus);
            }
        }
        bloch.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&bloch) {
            worst = worst.max((a - b).abs());
        }
    }
    println!("  max deviation {worst:e}");
    verdict(5, "Bloch/real-space oracle", &[("spectra agree to 1e-9", worst < 1e-9)]);
}

struct Finite {
    states: Vec<StateReport>,
    midgap: Vec<usize>,
    h_norm: f64,
}

fn finite(g: GeometryConfig, chiral: bool) -> Finite {
    let mut spec = FiniteLatticeSpec::open(6, 6);
    if chiral {
        spec = spec.with_intra(0.0, 0.0);
    }
    let eigs = spectrum(&spec, &g).unwrap();
    let window = BulkWindow::from_bands(&spec.effective_hoppings(&g).unwrap(), BULK_GRID);
    let report = localization_report(&eigs, &spec, &g).unwrap();
    Finite {
        midgap: midgap_filter(&eigs, &window),
        h_norm: report.h_norm,
        states: report.states,
    }
}

#[test]
fn c06_edge_and_corner_states() {
    let ty = finite(GeometryConfig::magic(0.25, 0.75), false);
    let ty_ok = !ty.midgap.is_empty()
        && ty.midgap.iter().all(|&i| ty.states[i].y_edge() >= 0.6 && ty.states[i].decay == Decay::Exponential);

    let tx = finite(GeometryConfig::magic(0.75, 0.25), false);
    let tx_ok = !tx.midgap.is_empty()
        && tx.midgap.iter().all(|&i| tx.states[i].x_edge() >= 0.6 && tx.states[i].decay == Decay::Exponential);

    let txy = finite(GeometryConfig::magic(0.75, 0.75), false);
    let zero_y = txy
        .midgap
        .iter()
        .filter(|&&i| txy.states[i].energy.abs() < 1e-6 * txy.h_norm && txy.states[i].y_edge() >= 0.6)
        .count();
    let finite_x = txy
        .midgap
        .iter()
        .filter(|&&i| txy.states[i].energy.abs() >= 1e-6 * txy.h_norm && txy.states[i].x_edge() >= 0.6)
        .count();
    let smallest_y = txy
        .midgap
        .iter()
        .filter(|&&i| txy.states[i].y_edge() >= 0.6)
        .map(|&i| txy.states[i].energy.abs())
        .fold(f64::INFINITY, f64::min);
    println!(
        "  Txy: {zero_y} zero-energy y-edge states (smallest |E| on y-edges {smallest_y:.4}, threshold {:.3e}), {finite_x} finite-energy x-edge states",
        1e-6 * txy.h_norm
    );

    let chiral = finite(GeometryConfig::magic(0.75, 0.75), true);
    let corner_zero = chiral
        .states
        .iter()
        .filter(|s| s.energy.abs() < 1e-8 * chiral.h_norm && s.corner >= 0.5)
        .count();
    let mut near_zero: Vec<f64> = chiral.states.iter().map(|s| s.energy.abs()).collect();
    near_zero.sort_by(f64::total_cmp);
    println!(
        "  chiral limit: {corner_zero} corner zero modes; |E| ascending {:.3e} {:.3e} {:.3e} {:.3e}, threshold {:.3e}",
        near_zero[0], near_zero[1], near_zero[2], near_zero[3], 1e-8 * chiral.h_norm
    );

    let quarter = finite(GeometryConfig::new(0.75, 0.75, FRAC_PI_4), false);
    let corner_states: Vec<&StateReport> = quarter
        .midgap
        .iter()
        .map(|&i| &quarter.states[i])
        .filter(|s| s.region == Some(Region::Corner))
        .collect();
    let polynomial = corner_states.iter().filter(|s| s.decay == Decay::Polynomial).count();
    println!(
        "  theta = pi/4: {polynomial} of {} corner-localized mid-gap states polynomial",
        corner_states.len()
    );

    verdict(6, "edge and corner states", &[
        ("Ty y-edge exponential", ty_ok),
        ("Tx x-edge exponential", tx_ok),
        ("Txy zero-energy y-edge subset", zero_y > 0),
        ("Txy finite-energy x-edge subset", finite_x > 0),
        ("chiral limit >= 4 corner zero modes", corner_zero >= 4),
        ("pi/4 corner states polynomial", !corner_states.is_empty() && polynomial == corner_states.len()),
    ]);
}

#[test]
fn c07_ribbons() {
    let count = |bx, by, o| {
        ribbon_spectrum(&h_at(bx, by), &RibbonSpec::new(o))
            .unwrap()
            .edge_state_count()
    };
    use Orientation::{XInfinite, YInfinite};
    let x_ribbon = count(0.2, 0.8, XInfinite) > 0 && count(0.8, 0.8, XInfinite) > 0 && count(0.8, 0.2, XInfinite) == 0;
    let y_ribbon = count(0.8, 0.2, YInfinite) > 0 && count(0.8, 0.8, YInfinite) > 0 && count(0.2, 0.8, YInfinite) == 0;

    let spectrum = ribbon_spectrum(&h_at(0.8, 0.2), &RibbonSpec::new(YInfinite)).unwrap();
    let branch: Vec<f64> = spectrum.edge_states().map(|(k, i)| spectrum.energies[k][i]).collect();
    let spread = branch.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - branch.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("  y-ribbon edge-branch spread {spread:.4}");

    let mut worst: f64 = 0.0;
    for g in [GeometryConfig::magic(0.2, 0.8), GeometryConfig::new(0.35, 0.6, 0.4)] {
        let h = hopping_set(&g).unwrap();
        for o in [XInfinite, YInfinite] {
            for k in [-2.7, -0.3, 0.0, 1.1, PI] {
                let e = hermitian_eig(&closed_ribbon_hamiltonian(&h, o, k, 8)).unwrap().values;
                let mut bulk = Vec::new();
                for j in 0..8 {
                    let q = 2.0 * PI * j as f64 / 8.0;
                    let m = if o == XInfinite { Momentum::raw(k, q) } else { Momentum::raw(q, k) };
                    let b = bands(&h, m);
                    bulk.extend([b.e_minus, b.e_plus]);
                }
                bulk.sort_by(f64::total_cmp);
                for (a, b) in e.iter().zip(&bulk) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    verdict(7, "ribbon spectra", &[
        ("x-ribbon edge branches at Ty, Txy, none at Tx", x_ribbon),
        ("y-ribbon edge branches at Tx, Txy, none at Ty", y_ribbon),
        ("y-ribbon branch spread > 1e-3", spread > 1e-3),
        ("closed ribbon matches bulk to 1e-9", worst < 1e-9),
    ]);
}

#[test]
fn c08_curvature() {
    let mut ok = true;
    for (bx, by) in [(0.2, 0.2), (0.8, 0.2), (0.2, 0.8), (0.8, 0.8)] {
        let map = berry_curvature_map(&h_at(bx, by), 101).unwrap();
        println!("  ({bx}, {by}): max |F| = {:e}, chern = {}", map.max_abs(), map.chern);
        ok &= map.max_abs() < 1e-6 && map.chern == 0;
    }
    verdict(8, "curvature and Chern", &[("flat curvature, zero Chern", ok)]);
}

#[test]
fn c09_symmetry_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut tr_inv, mut chiral_rel, mut chiral_limit) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let j: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let h = HoppingSet::new(j[0], j[1], j[2], j[3], j[4], j[5]);
        let k = Momentum::new(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        let r = symmetry_residuals(&h, k);
        tr_inv = tr_inv.max(r.time_reversal).max(r.inversion);
        chiral_rel = chiral_rel.max((r.chiral - 2.0 * SQRT_2 * diagonal(&h, k).abs()).abs());
        chiral_limit = chiral_limit.max(symmetry_residuals(&h.chiral(), k).chiral);
    }
    let spec = FiniteLatticeSpec::open(6, 6).with_intra(0.0, 0.0);
    let e = spectrum(&spec, &GeometryConfig::magic(0.75, 0.75)).unwrap().values;
    let mirror = e
        .iter()
        .zip(e.iter().rev())
        .map(|(a, b)| (a + b).abs())
        .fold(0.0, f64::max);
    println!("  tr/inv {tr_inv:e}, chiral relation {chiral_rel:e}, chiral limit {chiral_limit:e}, +-E {mirror:e}");
    verdict(9, "symmetry residuals", &[
        ("time reversal and inversion < 1e-12", tr_inv < 1e-12),
        ("chiral = 2 sqrt2 |n0| to 1e-10", chiral_rel < 1e-10),
        ("chiral limit < 1e-12", chiral_limit < 1e-12),
        ("real-space +-E symmetry to 1e-9", mirror < 1e-9),
    ]);
}

#[test]
fn c10_phase_diagram() {
    let start = Instant::now();
    let range = BetaRange::default();
    let base = scan(&range, magic_angle(), 61).unwrap();
    let mirrored = scan(&range, FRAC_PI_2 - magic_angle(), 61).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let labels: HashSet<PhaseLabel> = base.iter().filter_map(ScanPoint::label).collect();
    let required = [PhaseLabel::NT, PhaseLabel::TX, PhaseLabel::TY, PhaseLabel::TXY, PhaseLabel::SM];
    let all_present = required.iter().all(|l| labels.contains(l));
    let nlsm = base
        .iter()
        .find(|p| (p.beta_x - 0.5).abs() < 1e-12 && (p.beta_y - 0.5).abs() < 1e-12)
        .and_then(ScanPoint::label)
        == Some(PhaseLabel::NLSM);

    let key = |bx: f64, by: f64| ((bx * 60.0).round() as i64, (by * 60.0).round() as i64);
    let lookup: std::collections::HashMap<(i64, i64), Option<PhaseLabel>> = mirrored
        .iter()
        .map(|p| (key(p.beta_x, p.beta_y), p.label()))
        .collect();
    let (mut compared, mut mismatched) = (0, 0);
    for p in &base {
        if let Some(l @ (PhaseLabel::TX | PhaseLabel::TY)) = p.label() {
            compared += 1;
            if lookup.get(&key(p.beta_y, p.beta_x)).copied().flatten() != Some(l.exchanged()) {
                mismatched += 1;
            }
        }
    }
    let mut counts: Vec<(String, usize)> = PhaseLabel::ALL
        .iter()
        .map(|l| (l.to_string(), base.iter().filter(|p| p.label() == Some(*l)).count()))
        .collect();
    counts.retain(|c| c.1 > 0);
    println!("  labels {counts:?}; swap mismatches {mismatched}/{compared}; {elapsed:.1} s");
    verdict(10, "phase diagram", &[
        ("NT, TX, TY, TXY, SM present", all_present),
        ("NLSM at (0.5, 0.5)", nlsm),
        ("TX <-> TY under exchange", compared > 0 && mismatched == 0),
        ("runtime < 2 min", elapsed < 120.0),
    ]);
}

#[test]
fn c11_merging_exponents() {
    let (g, k) = find_closing(|t| GeometryConfig::magic(t, 0.6), "X", 0.7, 0.75).unwrap();
    let m = merging_exponents(&hopping_set(&g).unwrap(), k).unwrap();
    let mut e = m.exponents;
    e.sort_by(f64::total_cmp);
    println!("  boundary at beta = ({:.10}, 0.6); exponents {:?}, R^2 {:?}", g.beta_x, e, m.r2);
    verdict(11, "merging exponents", &[
        ("linear direction ~ 1", (e[0] - 1.0).abs() < 0.1),
        ("quadratic direction ~ 2", (e[1] - 2.0).abs() < 0.1),
    ]);
}
