//! Acceptance run: eight end-to-end checks, one PASS/FAIL line each.
//!
//! Runs as its own binary (`harness = false`) so the lines show up in plain
//! `cargo test` output.

use bulkedge::config::RunConfig;
use bulkedge::pipeline::{self, Command, Prepared};
use bulkedge_core::bulk::{bulk_chern_at, bulk_index_with};
use bulkedge_core::edge::edge_flow_at;
use bulkedge_core::grafporta::{flat_fiber, flat_matrix, gp_chern_at, local_index, select_k, transfer_matrix_fiber, FlatOperatorPlan};
use bulkedge_core::grid::unit;
use bulkedge_core::math::max_abs_diff;
use bulkedge_core::spectral::{fermi_projection, grid_point, kernel_frame, riesz_projection, subspace_angle};
use bulkedge_core::{Error, TorusGrid, C64};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

type Check = Result<String, String>;

struct Case {
    label: &'static str,
    cfg: RunConfig,
}

fn config_file(name: &str) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    RunConfig::load(&path, &[]).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn config_text(text: &str) -> RunConfig {
    RunConfig::from_text(text, None, &[]).unwrap()
}

/// The six agreement models, the constant symbol and two copies of the
/// flux-1/3 model.
fn suite() -> Vec<Case> {
    vec![
        Case { label: "hof(1,3) gap 1", cfg: config_file("hofstadter-1-3-gap1.toml") },
        Case { label: "hof(1,3) gap 2", cfg: config_file("hofstadter-1-3-gap2.toml") },
        Case { label: "hof(1,5) gap 1", cfg: config_file("hofstadter-1-5-gap1.toml") },
        Case { label: "qwz(-1)", cfg: config_file("qwz-m-1.toml") },
        Case { label: "qwz(1)", cfg: config_file("qwz-m1.toml") },
        Case { label: "qwz(3)", cfg: config_file("qwz-m3.toml") },
        Case { label: "atomic", cfg: config_file("atomic.toml") },
        Case { label: "2 x hof(1,3) gap 2", cfg: config_text("model = \"hofstadter\"\np = 1\nq = 3\ncopies = 2\ngap = 2\n") },
    ]
}

fn prepare(case: &Case) -> Result<Prepared, String> {
    pipeline::prepare(&case.cfg).map_err(|e| format!("{}: {e}", case.label))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn three_way_agreement() -> Check {
    let start = Instant::now();
    let cases = [
        ("hofstadter-1-3-gap1.toml", 1),
        ("hofstadter-1-3-gap2.toml", 1),
        ("hofstadter-1-5-gap1.toml", 1),
        ("qwz-m-1.toml", 1),
        ("qwz-m1.toml", 1),
        ("qwz-m3.toml", 0),
    ];
    let mut got = Vec::new();
    for (file, abs) in cases {
        let cfg = config_file(file);
        let out = pipeline::run(Command::Verify, &cfg).map_err(|e| format!("{file}: {e}"))?;
        let s = out.report.expect("verify writes a report").summary;
        let (b, e, g) = (s.i_bulk, s.i_edge, s.i_gp);
        ensure(s.agree && b == e && e == g, || format!("{file}: bulk {b:?}, edge {e:?}, gp {g:?}, errors {:?}", s.errors))?;
        let i = b.unwrap();
        ensure(i.abs() == abs, || format!("{file}: |I| = {} but the oracle says {abs}", i.abs()))?;
        got.push(i);
    }
    // qwz(m) for m = -1, 1, 3 gives (s, -s, 0).
    ensure(got[3] == -got[4] && got[5] == 0, || format!("qwz pattern {:?}", &got[3..]))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.0} s"))?;
    Ok(format!("indices {got:?} in {secs:.1} s"))
}

fn diophantine() -> Check {
    let mut sign = 0i64;
    let mut seen = Vec::new();
    let mut skipped = Vec::new();
    for q in [3i64, 4, 5] {
        for r in 1..q {
            let cfg = config_text(&format!("model = \"hofstadter\"\np = 1\nq = {q}\ngap = {r}\n"));
            let p = match pipeline::prepare(&cfg) {
                Ok(p) => p,
                // Flux 1/4 has Dirac points in its middle gap: there is no Fermi level to place.
                Err(bulkedge::CliError::Core(Error::Gap(msg))) if q == 4 && r == 2 => {
                    skipped.push(format!("q={q} r={r} closed ({msg})"));
                    continue;
                }
                Err(e) => return Err(format!("q={q} r={r}: {e}")),
            };
            let grid = TorusGrid::new(cfg.grids.eta, cfg.grids.t);
            let i = bulk_index_with(&p.symbol, &p.gamma, grid, &cfg.tolerances).map_err(|e| format!("q={q} r={r}: {e}"))?.index;
            // Unique |s| <= q/2 with s = r mod q.
            let s = if 2 * r <= q { r } else { r - q };
            ensure(i.abs() == s.abs(), || format!("q={q} r={r}: |I| = {} but |s| = {}", i.abs(), s.abs()))?;
            let sg = i.signum() * s.signum();
            ensure(sign == 0 || sg == sign, || format!("q={q} r={r}: I = {i}, s = {s} breaks the sign relation"))?;
            sign = sg;
            seen.push(format!("({q},{r}):{i}"));
        }
    }
    Ok(format!("I = {}s; {}; skipped {}", if sign < 0 { "-" } else { "+" }, seen.join(" "), skipped.join(", ")))
}

fn rank_law() -> Check {
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    let mut dense_worst = f64::INFINITY;
    let mut points = 0usize;
    for case in suite() {
        let p = prepare(&case)?;
        let g = &case.cfg.grids;
        let nodes = p.gamma.resampled(g.z).unwrap();
        let (field, k) = select_k(&p.family, &nodes, g.t, case.cfg.gp_cells(), None, &case.cfg.tolerances).map_err(|e| format!("{}: {e}", case.label))?;
        let kn = k * p.family.dim();
        ensure(field.plan.rank() == kn, || format!("{}: plan rank {}", case.label, field.plan.rank()))?;
        for f in field.field.frames() {
            ensure(f.ncols() == kn, || format!("{}: fibre of dimension {} != kN = {kn}", case.label, f.ncols()))?;
        }
        points += field.field.frames().len();
        ensure(field.min_gap_ratio > 1e4, || format!("{}: certified gap ratio {:.2e}", case.label, field.min_gap_ratio))?;
        worst = worst.min(field.min_gap_ratio);
        // Independent dense SVD at random grid points.
        for _ in 0..8 {
            let (s, j) = (rng.random_range(0..g.z), rng.random_range(0..g.t));
            let h = flat_matrix(&p.family, nodes.nodes[s], unit(j, g.t), &field.plan);
            let kf = kernel_frame(&h, None, case.cfg.tolerances.sigma_tol).map_err(|e| format!("{}: {e}", case.label))?;
            // The padded SVD has exact zeros below kN; compare sigma_{kN+1}
            // with what the dense kernel frame actually leaves behind.
            let q = kf.singular_values.len();
            let ratio = kf.singular_values[q - kn - 1] / (&h * &kf.frame).norm().max(f64::MIN_POSITIVE);
            ensure(kf.frame.ncols() == kn && ratio > 1e4, || {
                format!("{}: dense kernel {} (kN = {kn}), ratio {ratio:.2e}", case.label, kf.frame.ncols())
            })?;
            dense_worst = dense_worst.min(ratio);
        }
    }
    Ok(format!("{points} fibres of dimension kN; certified ratio >= {worst:.2e}, dense spot checks >= {dense_worst:.2e}"))
}

fn transfer_matrix_oracle() -> Check {
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut models = Vec::new();
    for case in suite() {
        let p = prepare(&case)?;
        let f = &p.family;
        let r = f.range() as i64;
        // A_{+-R}(t) does not depend on t for any suite model.
        let invertible = r >= 1 && [-r, r].iter().all(|&j| f.hopping(j, C64::new(1.0, 0.0)).determinant().norm() > 1e-8);
        if !invertible {
            continue;
        }
        let left = p.cert.spectrum_min() - p.cert.gap();
        let (center, radius) = (0.5 * (p.cert.mu + left), 0.5 * (p.cert.mu - left));
        let cells = case.cfg.gp_cells();
        let plan = FlatOperatorPlan::new(f, f.range().max(1), cells).map_err(|e| e.to_string())?;
        for _ in 0..200 {
            let phi = rng.random_range(0.0..2.0 * PI);
            let psi = rng.random_range(-PI..PI);
            let z = C64::new(center, 0.0) + C64::from_polar(radius, phi);
            let t = C64::from_polar(1.0, psi);
            let a = flat_fiber(f, z, t, &plan).map_err(|e| format!("{}: {e}", case.label))?.frame;
            let b = transfer_matrix_fiber(f, z, t, cells).map_err(|e| format!("{}: {e}", case.label))?;
            let angle = subspace_angle(&a, &b);
            ensure(angle < 1e-6, || format!("{}: angle {angle:.2e} at z = {z:.4}, t-angle {psi:.4}", case.label))?;
            worst = worst.max(angle);
        }
        models.push(case.label);
    }
    ensure(models.len() >= 4, || format!("only {} invertible models", models.len()))?;
    Ok(format!("200 samples on each of {}; max angle {worst:.2e}", models.join(", ")))
}

fn local_law() -> Check {
    let mut lines = Vec::new();
    let cases = [
        ("model = \"hofstadter\"\np = 1\nq = 3\ngap = 1\n", 1usize),
        ("model = \"hofstadter\"\np = 1\nq = 3\ngap = 2\n", 1),
        ("model = \"hofstadter\"\np = 1\nq = 3\ncopies = 2\ngap = 2\n", 2),
        ("model = \"hofstadter\"\np = 1\nq = 3\ncopies = 2\ngap = 4\n", 2),
    ];
    for (text, mult) in cases {
        let cfg = config_text(text);
        let label = text.lines().skip(1).collect::<Vec<_>>().join(" ");
        let p = pipeline::prepare(&cfg).map_err(|e| e.to_string())?;
        let edge = pipeline::run_edge(&cfg, &p).map_err(|e| format!("{label}: {e}"))?;
        let plan = FlatOperatorPlan::new(&p.family, 1, edge.cells).map_err(|e| e.to_string())?;
        let local = local_index(&p.family, &edge.sweep, &edge.account, &plan, &cfg.tolerances).map_err(|e| format!("{label}: {e}"))?;
        ensure(!local.is_empty(), || format!("{label}: no counted crossings"))?;
        for c in &local {
            ensure(c.multiplicity == mult && c.winding == mult as i64 && c.kernel_dim == mult, || {
                format!("{label}: crossing at t = {:.4}: multiplicity {}, winding {}, dim Ker g {}", c.theta, c.multiplicity, c.winding, c.kernel_dim)
            })?;
        }
        let sum: i64 = local.iter().map(|c| c.direction * c.winding).sum();
        ensure(sum == edge.index, || format!("{label}: signed sum {sum} != I_edge {}", edge.index))?;
        lines.push(format!("[{label}] {} crossing(s), sum {sum}", local.len()));
    }
    Ok(lines.join("; "))
}

fn zero_sum() -> Check {
    let mut runs = 0;
    let mut crossings = 0;
    let mut refined = Vec::new();
    for case in suite() {
        let p = prepare(&case)?;
        let r = p.family.range().max(1);
        for cells in [16usize, 32, 64, 128] {
            if cells < 4 * r {
                continue;
            }
            // Branch matching may ask for a finer t grid, as in the edge ladder.
            let mut g = case.cfg.grids.edge_t;
            let acc = loop {
                match edge_flow_at(&p.family, &p.cert, cells, g, 0.0) {
                    Ok((acc, _)) => break acc,
                    Err(e) if e.is_refinable() && g < 16 * case.cfg.grids.edge_t => g *= 2,
                    Err(e) => return Err(format!("{} L={cells} G_t={g}: {e}", case.label)),
                }
            };
            if g != case.cfg.grids.edge_t {
                refined.push(format!("{} L={cells} at G_t={g}", case.label));
            }
            ensure(acc.total == 0 && acc.partition_total == 0, || format!("{} L={cells}: unfiltered flow {} / {}", case.label, acc.total, acc.partition_total))?;
            crossings += acc.crossings.len();
            runs += 1;
        }
    }
    ensure(crossings > 0, || "no crossings at all".into())?;
    Ok(format!("{runs} truncations, {crossings} crossings, every closed-loop flow 0; refined t grid: {}", if refined.is_empty() { "none".to_string() } else { refined.join(", ") }))
}

fn stability() -> Check {
    let mut lines = Vec::new();
    for case in suite() {
        let cfg = &case.cfg;
        let tol = &cfg.tolerances;
        let p = prepare(&case)?;
        let err = |e: Error| format!("{}: {e}", case.label);
        let bulk = pipeline::run_bulk(cfg, &p).map_err(|e| format!("{}: {e}", case.label))?;
        let edge = pipeline::run_edge(cfg, &p).map_err(|e| format!("{}: {e}", case.label))?;
        let gp = pipeline::run_gp(cfg, &p).map_err(|e| format!("{}: {e}", case.label))?;
        let (g1, g2) = (bulk.result.grid.g1, bulk.result.grid.g2);
        let fixed_k = Some(gp.plan.k);
        let gp_at = |gz, gt, l| gp_chern_at(&p.family, &p.gamma, gz, gt, l, fixed_k, tol).map(|(r, _)| r.chern).map_err(err);
        let doubled = [
            ("G_eta", bulk_chern_at(&p.symbol, &p.gamma, TorusGrid::new(2 * g1, g2), tol).map(|r| r.chern).map_err(err)?),
            ("G_t(bulk)", bulk_chern_at(&p.symbol, &p.gamma, TorusGrid::new(g1, 2 * g2), tol).map(|r| r.chern).map_err(err)?),
            ("G_t(edge)", edge_flow_at(&p.family, &p.cert, edge.cells, 2 * edge.t_points, cfg.edge.theta).map(|(a, _)| a.total).map_err(err)?),
            ("L(edge)", edge_flow_at(&p.family, &p.cert, 2 * edge.cells, edge.t_points, cfg.edge.theta).map(|(a, _)| a.total).map_err(err)?),
            ("G_z", gp_at(2 * gp.g_z, gp.t_points, gp.plan.cells)?),
            ("G_t(gp)", gp_at(gp.g_z, 2 * gp.t_points, gp.plan.cells)?),
            ("L(gp)", gp_at(gp.g_z, gp.t_points, 2 * gp.plan.cells)?),
        ];
        let base = [("bulk", bulk.index), ("edge", edge.index), ("gp", gp.index)];
        for (name, v) in base {
            ensure(v == bulk.index, || format!("{}: {name} = {v} vs bulk {}", case.label, bulk.index))?;
        }
        for (name, v) in doubled {
            ensure(v == bulk.index, || format!("{}: doubling {name} gives {v}, reported {}", case.label, bulk.index))?;
        }
        lines.push(format!("{} {}", case.label, bulk.index));
    }
    Ok(format!("7 doublings each: {}", lines.join(", ")))
}

fn quadrature() -> Check {
    let mut worst = 0.0f64;
    let mut points = 0;
    for case in suite() {
        let p = prepare(&case)?;
        let grid = TorusGrid::new(case.cfg.grids.eta, case.cfg.grids.t);
        for i in 0..grid.g1 {
            for j in 0..grid.g2 {
                let (eta, t) = grid_point(grid, i, j);
                let r = riesz_projection(&p.symbol, eta, t, &p.gamma).map_err(|e| format!("{}: {e}", case.label))?;
                let f = fermi_projection(&p.symbol, eta, t, p.cert.mu).map_err(|e| format!("{}: {e}", case.label))?;
                let d = max_abs_diff(&r, &f);
                ensure(d < 1e-8, || format!("{} at ({i}, {j}): |P_riesz - P_fermi| = {d:.2e}", case.label))?;
                worst = worst.max(d);
                points += 1;
            }
        }
    }
    Ok(format!("{points} grid points, max deviation {worst:.2e}"))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 8] = [
        ("three-way agreement", three_way_agreement),
        ("Diophantine rule", diophantine),
        ("kernel rank law", rank_law),
        ("transfer-matrix oracle", transfer_matrix_oracle),
        ("local index law", local_law),
        ("zero unfiltered flow", zero_sum),
        ("doubling stability", stability),
        ("Riesz vs Fermi projection", quadrature),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({secs:.1} s): {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name} ({secs:.1} s): {why}", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
