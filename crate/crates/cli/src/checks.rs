//! Executable acceptance criteria. Each check returns a verdict with the
//! measured numbers; `selftest` runs the oracle-agreement subset.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nfpls::depth::{
    boresight_correlation, cos_psi_numeric, depth_closed, depth_scan, upsilon_threshold,
};
use nfpls::geometry::region_boundaries;
use nfpls::power::{min_power_closed, min_power_eigen_oracle, PowerStatus};
use nfpls::secrecy::{capacity_eigen_oracle, secrecy_capacity_closed, LinkBudget};
use nfpls::stats::{rho_nusw, rho_upw, rho_usw};
use nfpls::{
    build_channel, chebyshev_gauss_nodes, closed_form_stats, rho_direct, ArrayGeometry,
    ChannelModel, DepthInterval, FormVariant, NodeGeometry, OracleMethod,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SweepConfig;
use crate::experiments::{build_tables, Experiment};
use crate::grid::{GridScale, GridSpec};
use crate::table::Cell;

/// Capacities below this many bits compare as zero.
pub const ZERO_BITS: f64 = 1e-12;
const SEED: u64 = 0x5EC2E7;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Failure is documented as inherent to the criterion, not to the implementation.
    pub known_unattainable: bool,
}

impl CheckOutcome {
    fn new(id: &'static str, passed: bool, detail: String) -> Self {
        Self {
            id,
            passed,
            detail,
            known_unattainable: KNOWN_UNATTAINABLE.contains(&id),
        }
    }

    pub fn line(&self) -> String {
        let tag = match (self.passed, self.known_unattainable) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known unattainable)",
            (false, false) => "FAIL",
        };
        format!("{tag} {}: {}", self.id, self.detail)
    }
}

pub const KNOWN_UNATTAINABLE: &[&str] = &["nusw_capacity_saturation", "nusw_power_floor"];

/// Random link instance on a small array.
#[derive(Debug, Clone)]
pub struct Instance {
    pub model: ChannelModel,
    pub arr: ArrayGeometry,
    pub nb: NodeGeometry,
    pub ne: NodeGeometry,
    pub budget: LinkBudget,
    pub r0: f64,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn random_node(rng: &mut ChaCha8Rng) -> NodeGeometry {
    let r = log_uniform(rng, 1.0, 50.0);
    NodeGeometry::new(
        r,
        rng.gen_range(0.2..PI - 0.2),
        rng.gen_range(0.2..PI - 0.2),
    )
    .unwrap()
}

/// Deterministic instance set: arrays up to 15×15, all models, log-uniform budgets,
/// one in ten with Eve co-directional.
pub fn random_instances(n: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let model = ChannelModel::ALL[rng.gen_range(0..3)];
            let (mx, mz) = loop {
                let (a, b) = (2 * rng.gen_range(0..8) + 1, 2 * rng.gen_range(0..8) + 1);
                if a * b > 1 {
                    break (a, b);
                }
            };
            let arr = ArrayGeometry::half_wavelength(mx, mz, 0.125).unwrap();
            let nb = random_node(&mut rng);
            let ne = if rng.gen_bool(0.1) {
                nb.with_range(log_uniform(&mut rng, 1.0, 50.0)).unwrap()
            } else {
                random_node(&mut rng)
            };
            let budget = LinkBudget::new(
                log_uniform(&mut rng, 1e-2, 1e4),
                log_uniform(&mut rng, 1e-3, 1e-1),
                log_uniform(&mut rng, 1e-3, 1e-1),
            )
            .unwrap();
            Instance {
                model,
                arr,
                nb,
                ne,
                budget,
                r0: rng.gen_range(0.1..4.0),
            }
        })
        .collect()
}

/// Forward-error allowance of a backward-stable dense eigensolver: an eigenvalue
/// `lambda` of an `n`×`n` Hermitian matrix with norm at most `scale` is only
/// resolved to about `n·ε·scale`, which dominates when `lambda` is tiny.
fn eigen_allowance(n: usize, scale: f64, lambda: f64) -> f64 {
    16.0 * n as f64 * f64::EPSILON * scale / lambda
}

pub fn capacity_oracle_equivalence() -> CheckOutcome {
    let t0 = Instant::now();
    let inst = random_instances(1000, SEED);
    let (mut bad, mut widened) = (0, 0);
    let mut worst = 0.0f64;
    for i in &inst {
        let hb = build_channel(i.model, &i.arr, &i.nb).unwrap();
        let he = build_channel(i.model, &i.arr, &i.ne).unwrap();
        let s = rho_direct(&hb, &he).unwrap();
        let closed = secrecy_capacity_closed(&s, &i.budget).capacity;
        let oracle = capacity_eigen_oracle(
            hb.entries(),
            he.entries(),
            &i.budget,
            OracleMethod::DenseEigen,
        )
        .map(|o| o.capacity)
        .unwrap_or(f64::NAN);
        if closed < ZERO_BITS && oracle < ZERO_BITS {
            continue;
        }
        let rel = (closed - oracle).abs() / closed.max(oracle);
        let scale = i.budget.gamma_b() * s.gain_bob + i.budget.gamma_e() * s.gain_eve;
        let nu = closed.max(oracle).exp2() - 1.0;
        let allowance = eigen_allowance(hb.entries().len(), scale, nu);
        worst = worst.max(rel);
        if rel > 1e-9 {
            if rel <= allowance {
                widened += 1;
            } else {
                bad += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    CheckOutcome::new(
        "capacity_oracle_equivalence",
        bad == 0 && secs < 60.0,
        format!(
            "{} instances, {bad} mismatches, {widened} within the eigensolver error bound only, worst relative error {worst:.2e}, {secs:.1} s",
            inst.len()
        ),
    )
}

pub fn power_oracle_equivalence() -> CheckOutcome {
    let inst = random_instances(1000, SEED);
    let (mut bad, mut widened, mut verdicts, mut unach) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    for i in &inst {
        let hb = build_channel(i.model, &i.arr, &i.nb).unwrap();
        let he = build_channel(i.model, &i.arr, &i.ne).unwrap();
        let (sb, se) = (i.budget.noise_bob(), i.budget.noise_eve());
        let closed = min_power_closed(&rho_direct(&hb, &he).unwrap(), sb, se, i.r0).unwrap();
        let oracle = min_power_eigen_oracle(
            hb.entries(),
            he.entries(),
            sb,
            se,
            i.r0,
            OracleMethod::DenseEigen,
        )
        .unwrap();
        match (closed.status, oracle.status) {
            (PowerStatus::Achievable(a), PowerStatus::Achievable(b)) => {
                let rel = (a - b).abs() / a;
                worst = worst.max(rel);
                let s = rho_direct(&hb, &he).unwrap();
                let scale = s.gain_bob / sb + i.r0.exp2() * s.gain_eve / se;
                let mu = (i.r0 * std::f64::consts::LN_2).exp_m1() / a.min(b);
                if rel > 1e-9 {
                    if rel <= eigen_allowance(hb.entries().len(), scale, mu) {
                        widened += 1;
                    } else {
                        bad += 1;
                    }
                }
            }
            (PowerStatus::Unachievable, PowerStatus::Unachievable) => unach += 1,
            _ => verdicts += 1,
        }
    }
    CheckOutcome::new(
        "power_oracle_equivalence",
        bad == 0 && verdicts == 0,
        format!(
            "{} instances ({unach} unachievable), {bad} value mismatches, {widened} within the eigensolver error bound only, {verdicts} verdict mismatches, worst relative error {worst:.2e}",
            inst.len()
        ),
    )
}

pub fn correlation_validation() -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let rule = chebyshev_gauss_nodes(100).unwrap();

    let mut upw_worst = 0.0f64;
    for _ in 0..300 {
        let side = [3, 7, 15, 31, 51][rng.gen_range(0..5)];
        let arr =
            ArrayGeometry::half_wavelength(side, 2 * rng.gen_range(0..26) + 1, 0.125).unwrap();
        let (nb, ne) = (random_node(&mut rng), random_node(&mut rng));
        let direct = rho_direct(
            &build_channel(ChannelModel::Upw, &arr, &nb).unwrap(),
            &build_channel(ChannelModel::Upw, &arr, &ne).unwrap(),
        )
        .unwrap()
        .rho;
        upw_worst = upw_worst.max((rho_upw(&arr, &nb, &ne, FormVariant::Corrected) - direct).abs());
    }

    // co-directional pairs beyond the Fresnel distance, where ρ is not negligible
    let arr = ArrayGeometry::baseline();
    let (rayleigh, fresnel) = region_boundaries(&arr);
    let mut usw_worst = 0.0f64;
    for _ in 0..200 {
        let nb = NodeGeometry::new(
            log_uniform(&mut rng, fresnel, rayleigh),
            rng.gen_range(0.5..PI - 0.5),
            rng.gen_range(0.5..PI - 0.5),
        )
        .unwrap();
        let ne = nb
            .with_range(log_uniform(&mut rng, fresnel, rayleigh))
            .unwrap();
        let direct = rho_direct(
            &build_channel(ChannelModel::Usw, &arr, &nb).unwrap(),
            &build_channel(ChannelModel::Usw, &arr, &ne).unwrap(),
        )
        .unwrap()
        .rho;
        let closed = rho_usw(&arr, &nb, &ne).unwrap();
        if direct > 1e-3 {
            usw_worst = usw_worst.max((closed - direct).abs() / direct);
        }
    }

    let mut nusw_worst = 0.0f64;
    let pairs = [
        (
            (10.0, PI / 3.0, 2.0 * PI / 3.0),
            (20.0, PI / 3.0, 2.0 * PI / 3.0),
        ),
        ((6.0, 1.3, 1.7), (9.0, 1.3, 1.7)),
        ((4.0, PI / 2.0, PI / 2.0), (5.0, PI / 2.0, PI / 2.0)),
    ];
    for side in [3, 11, 25, 51, 75, 101] {
        let arr = ArrayGeometry::half_wavelength(side, side, 0.125).unwrap();
        for &((rb, tb, pb), (re, te, pe)) in &pairs {
            let nb = NodeGeometry::new(rb, tb, pb).unwrap();
            let ne = NodeGeometry::new(re, te, pe).unwrap();
            let direct = rho_direct(
                &build_channel(ChannelModel::Nusw, &arr, &nb).unwrap(),
                &build_channel(ChannelModel::Nusw, &arr, &ne).unwrap(),
            )
            .unwrap()
            .rho;
            let closed = rho_nusw(&arr, &nb, &ne, &rule, FormVariant::Corrected).unwrap();
            nusw_worst = nusw_worst.max((closed - direct).abs() / direct);
        }
    }
    CheckOutcome::new(
        "correlation_validation",
        upw_worst <= 1e-9 && usw_worst <= 0.05 && nusw_worst <= 0.02,
        format!("UPW max abs error {upw_worst:.2e}, USW max rel error {usw_worst:.2e}, NUSW max rel error {nusw_worst:.2e}"),
    )
}

fn baseline_tables(
    models: Vec<ChannelModel>,
    exp: Experiment,
    grid: GridSpec,
) -> Vec<(ChannelModel, Vec<Vec<Cell>>)> {
    let cfg = SweepConfig {
        models,
        grid: Some(grid),
        ..SweepConfig::default()
    };
    build_tables(&cfg, exp)
        .expect("baseline sweep runs")
        .into_iter()
        .map(|(m, t)| (m, t.rows))
        .collect()
}

fn num(c: Cell) -> f64 {
    match c {
        Cell::Num(v) => v,
        Cell::Skipped => f64::NAN,
    }
}

pub fn far_field_plateau() -> CheckOutcome {
    let grid = GridSpec::new("snr_db", 60.0, 80.0, 21, GridScale::Linear).unwrap();
    let rows = &baseline_tables(vec![ChannelModel::Upw], Experiment::CapacityVsSnr, grid)[0].1;
    let worst = rows
        .iter()
        .map(|r| (num(r[1]) - 2.0).abs())
        .fold(0.0, f64::max);
    CheckOutcome::new(
        "far_field_plateau",
        worst <= 0.005,
        format!("max |C − 2| over 60–80 dB = {worst:.2e} bits"),
    )
}

pub fn nusw_capacity_saturation() -> CheckOutcome {
    let grid = GridSpec::new("side", 3.0, 501.0, 40, GridScale::Log).unwrap();
    let rows = &baseline_tables(vec![ChannelModel::Nusw], Experiment::CapacityVsM, grid)[0].1;
    let bound = num(rows[0][4]);
    let exceed = rows.iter().filter(|r| num(r[2]) > bound).count();
    let last = rows.last().expect("grid is non-empty");
    let gap = bound - num(last[2]);
    CheckOutcome::new(
        "nusw_capacity_saturation",
        exceed == 0 && gap <= 0.1,
        format!(
            "bound {bound:.4} bits never exceeded ({exceed} violations); at {0}x{0} C = {1:.4}, gap {gap:.3} bits",
            num(last[0]),
            num(last[2])
        ),
    )
}

pub fn high_snr_slopes() -> CheckOutcome {
    let cfg = SweepConfig::default();
    let (arr, nb, ne) = (cfg.array().unwrap(), cfg.bob().unwrap(), cfg.eve().unwrap());
    let rule = chebyshev_gauss_nodes(cfg.quad_order).unwrap();
    let noise = cfg.noise();
    let mut parts = Vec::new();
    let mut ok = true;
    for model in ChannelModel::ALL {
        let s = closed_form_stats(model, &arr, &nb, &ne, &rule, FormVariant::Corrected).unwrap();
        let c = |g: f64| {
            secrecy_capacity_closed(&s, &LinkBudget::new(g * noise, noise, noise).unwrap()).capacity
        };
        let slope = c(2e8) - c(1e8);
        let want = if model == ChannelModel::Upw { 0.0 } else { 1.0 };
        ok &= (slope - want).abs() <= 0.02;
        parts.push(format!("{model} {slope:.4}"));
    }
    CheckOutcome::new(
        "high_snr_slopes",
        ok,
        format!("slope per doubling at 1e8: {}", parts.join(", ")),
    )
}

pub fn min_power_closed_loop() -> CheckOutcome {
    let inst = random_instances(500, SEED + 2);
    let rule = chebyshev_gauss_nodes(100).unwrap();
    let (mut tried, mut bad) = (0, 0);
    let mut worst = 0.0f64;
    for i in &inst {
        let Ok(s) = closed_form_stats(i.model, &i.arr, &i.nb, &i.ne, &rule, FormVariant::Corrected)
        else {
            continue;
        };
        let (sb, se) = (i.budget.noise_bob(), i.budget.noise_eve());
        let Some(p) = min_power_closed(&s, sb, se, i.r0).unwrap().watts() else {
            continue;
        };
        tried += 1;
        let at =
            |x: f64| secrecy_capacity_closed(&s, &LinkBudget::new(x, sb, se).unwrap()).capacity;
        let err = (at(p) - i.r0).abs();
        worst = worst.max(err);
        if err > 1e-6 || at(0.99 * p) >= i.r0 {
            bad += 1;
        }
    }
    CheckOutcome::new(
        "min_power_closed_loop",
        bad == 0 && tried >= 450,
        format!("{tried} feasible instances, {bad} failures, worst |C(P) − R0| = {worst:.2e} bits"),
    )
}

pub fn nusw_power_floor() -> CheckOutcome {
    let grid = GridSpec::new("side", 1001.0, 1001.0, 2, GridScale::Linear).unwrap();
    let rows = &baseline_tables(vec![ChannelModel::Nusw], Experiment::PowerVsM, grid)[0].1;
    let (p, floor) = (num(rows[0][2]), num(rows[0][4]));
    let rel = p / floor - 1.0;
    CheckOutcome::new(
        "nusw_power_floor",
        rel.abs() <= 0.05,
        format!(
            "1001x1001 P = {p:.4} W vs floor {floor:.4} W ({:+.1}%)",
            100.0 * rel
        ),
    )
}

pub fn cos_psi_identity() -> CheckOutcome {
    let inst = random_instances(260, SEED + 3);
    let mut worst = 0.0f64;
    let mut n = 0;
    for i in inst
        .iter()
        .filter(|i| !i.nb.same_direction(&i.ne, 1e-12))
        .take(200)
    {
        let hb = build_channel(i.model, &i.arr, &i.nb).unwrap();
        let he = build_channel(i.model, &i.arr, &i.ne).unwrap();
        let rho = rho_direct(&hb, &he).unwrap().rho;
        worst =
            worst.max((cos_psi_numeric(hb.entries(), he.entries()).unwrap() - (1.0 - rho)).abs());
        n += 1;
    }
    CheckOutcome::new(
        "cos_psi_identity",
        n == 200 && worst <= 1e-9,
        format!("{n} instances, max deviation {worst:.2e}"),
    )
}

pub fn threshold_root() -> CheckOutcome {
    let u = upsilon_threshold(0.5).unwrap();
    let resid = (boresight_correlation(u).unwrap() - 0.5).abs();
    CheckOutcome::new(
        "threshold_root",
        (u - 0.79).abs() <= 0.005 && resid <= 1e-6,
        format!("root {u:.6}, residual {resid:.1e}"),
    )
}

pub fn depth_agreement() -> CheckOutcome {
    let nb = NodeGeometry::boresight(10.0).unwrap();
    let arr = ArrayGeometry::baseline();
    let closed = depth_closed(&arr, &nb, 0.5).unwrap();
    let scan = depth_scan(&arr, &nb, 0.5, ChannelModel::Usw).unwrap();
    let rel = scan.depth / closed.depth - 1.0;
    let mut mismatched = Vec::new();
    let cases: Vec<(usize, f64)> = [15, 21, 27, 29, 35, 51]
        .iter()
        .map(|&s| (s, 10.0))
        .chain([(51, 30.0), (51, 40.0), (51, 60.0)])
        .collect();
    for &(side, rb) in &cases {
        let a = ArrayGeometry::half_wavelength(side, side, 0.125).unwrap();
        let b = NodeGeometry::boresight(rb).unwrap();
        let c = depth_closed(&a, &b, 0.5).unwrap();
        let s = depth_scan(&a, &b, 0.5, ChannelModel::Usw).unwrap();
        let scan_inf = matches!(s.interval, DepthInterval::RightInfinite { .. });
        if c.depth.is_infinite() != scan_inf {
            mismatched.push(format!("{side}x{side}@{rb}m"));
        }
    }
    CheckOutcome::new(
        "depth_agreement",
        rel.abs() <= 0.01 && mismatched.is_empty(),
        format!(
            "r_s = {:.2} m, closed {:.3} m vs scan {:.3} m ({:+.2}%); infinite-depth verdicts disagree on {} of {} cases{}",
            closed.r_s.unwrap(),
            closed.depth,
            scan.depth,
            100.0 * rel,
            mismatched.len(),
            cases.len(),
            if mismatched.is_empty() { String::new() } else { format!(" ({})", mismatched.join(", ")) }
        ),
    )
}

/// Runs the binary twice with different thread counts and compares the CSV bytes.
pub fn determinism(binary: &Path, scratch: &Path) -> CheckOutcome {
    let run = |threads: usize| -> Result<Vec<(String, Vec<u8>)>, String> {
        let dir = scratch.join(format!("threads{threads}"));
        let out = Command::new(binary)
            .args(["capacity_vs_M", "--threads", &threads.to_string(), "--out"])
            .arg(&dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "exit status {}: {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            ));
        }
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
            .map(|e| {
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap_or_default(),
                )
            })
            .collect();
        files.sort();
        Ok(files)
    };
    match (run(1), run(8)) {
        (Ok(a), Ok(b)) => {
            let same = !a.is_empty() && a == b;
            CheckOutcome::new(
                "determinism",
                same,
                format!("{} CSV files, byte-identical: {same}", a.len()),
            )
        }
        (Err(e), _) | (_, Err(e)) => {
            CheckOutcome::new("determinism", false, format!("run failed: {e}"))
        }
    }
}

/// Oracle-agreement subset used by `nfpls selftest`.
pub fn selftest() -> Vec<CheckOutcome> {
    vec![
        capacity_oracle_equivalence(),
        power_oracle_equivalence(),
        correlation_validation(),
        min_power_closed_loop(),
        cos_psi_identity(),
        threshold_root(),
    ]
}

/// Every criterion except determinism, which needs the built binary.
pub fn library_checks() -> Vec<CheckOutcome> {
    let mut out = selftest();
    out.extend([
        far_field_plateau(),
        nusw_capacity_saturation(),
        high_snr_slopes(),
        nusw_power_floor(),
        depth_agreement(),
    ]);
    out
}
