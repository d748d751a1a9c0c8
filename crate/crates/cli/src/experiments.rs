//! The nine sweep experiments. Each grid point is evaluated independently and
//! rows are gathered in grid order, so output bytes do not depend on the
//! number of worker threads.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use nfpls::depth::{cos_psi, cos_psi_numeric, depth_closed, depth_scan};
use nfpls::power::{min_power_closed, min_power_eigen_oracle, power_limit, PowerLimit};
use nfpls::secrecy::{
    asymptotic_capacity, capacity_eigen_oracle, secrecy_capacity_closed, LinkBudget, Regime,
};
use nfpls::{
    build_channel, chebyshev_gauss_nodes, closed_form_stats, ArrayGeometry, ChannelModel,
    FormVariant, LinkStats, NodeGeometry, OracleMethod, QuadratureRule,
};
use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::grid::{odd_sides, GridScale, GridSpec};
use crate::table::{Cell, CsvTable};

/// Oracle columns are filled only up to this many antennas.
pub const ORACLE_MAX_ELEMENTS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Experiment {
    #[value(name = "capacity_vs_snr")]
    CapacityVsSnr,
    #[value(name = "capacity_vs_M")]
    CapacityVsM,
    #[value(name = "capacity_vs_re")]
    CapacityVsRe,
    #[value(name = "capacity_perturbation")]
    CapacityPerturbation,
    #[value(name = "cospsi_vs_re")]
    CospsiVsRe,
    #[value(name = "depth_vs_M")]
    DepthVsM,
    #[value(name = "power_vs_R0")]
    PowerVsR0,
    #[value(name = "power_vs_re")]
    PowerVsRe,
    #[value(name = "power_vs_M")]
    PowerVsM,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::CapacityVsSnr,
        Experiment::CapacityVsM,
        Experiment::CapacityVsRe,
        Experiment::CapacityPerturbation,
        Experiment::CospsiVsRe,
        Experiment::DepthVsM,
        Experiment::PowerVsR0,
        Experiment::PowerVsRe,
        Experiment::PowerVsM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CapacityVsSnr => "capacity_vs_snr",
            Experiment::CapacityVsM => "capacity_vs_M",
            Experiment::CapacityVsRe => "capacity_vs_re",
            Experiment::CapacityPerturbation => "capacity_perturbation",
            Experiment::CospsiVsRe => "cospsi_vs_re",
            Experiment::DepthVsM => "depth_vs_M",
            Experiment::PowerVsR0 => "power_vs_R0",
            Experiment::PowerVsRe => "power_vs_re",
            Experiment::PowerVsM => "power_vs_M",
        }
    }

    pub fn default_grid(self) -> GridSpec {
        use GridScale::*;
        let (var, start, stop, points, scale) = match self {
            Experiment::CapacityVsSnr => ("snr_db", -10.0, 80.0, 91, Linear),
            Experiment::CapacityVsM => ("side", 3.0, 501.0, 40, Log),
            Experiment::CapacityVsRe | Experiment::PowerVsRe => ("r_e", 1.0, 100.0, 100, Log),
            Experiment::CapacityPerturbation => ("delta", -0.1, 0.1, 41, Linear),
            Experiment::CospsiVsRe => ("r_e", 1.0, 100.0, 200, Log),
            Experiment::DepthVsM => ("side", 11.0, 401.0, 40, Log),
            Experiment::PowerVsR0 => ("r0", 0.25, 6.0, 24, Linear),
            Experiment::PowerVsM => ("side", 3.0, 1001.0, 40, Log),
        };
        GridSpec::new(var, start, stop, points, scale).expect("built-in grids are valid")
    }

    pub fn grid_variables(self) -> &'static [&'static str] {
        match self {
            Experiment::CapacityVsSnr => &["snr_db", "snr"],
            Experiment::CapacityVsM | Experiment::DepthVsM | Experiment::PowerVsM => &["side"],
            Experiment::CapacityVsRe | Experiment::CospsiVsRe | Experiment::PowerVsRe => &["r_e"],
            Experiment::CapacityPerturbation => &["delta"],
            Experiment::PowerVsR0 => &["r0"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] nfpls::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Configuration with the experiment's own defaults applied to keys the user left unset.
pub fn effective_config(cfg: &SweepConfig, exp: Experiment) -> Result<SweepConfig, RunError> {
    let mut eff = cfg.clone();
    if matches!(exp, Experiment::CapacityVsM | Experiment::PowerVsM)
        && !cfg.is_explicit("theta_e")
        && !cfg.is_explicit("phi_e")
    {
        eff.theta_e = 2.0 * PI / 3.0;
        eff.phi_e = PI / 3.0;
    }
    if exp == Experiment::DepthVsM && !cfg.is_explicit("theta_b") && !cfg.is_explicit("phi_b") {
        eff.theta_b = PI / 2.0;
        eff.phi_b = PI / 2.0;
    }
    let grid = cfg.grid.clone().unwrap_or_else(|| exp.default_grid());
    if !exp.grid_variables().contains(&grid.variable.as_str()) {
        return Err(RunError::Config(format!(
            "{exp} sweeps {}, not `{}`",
            exp.grid_variables().join(" or "),
            grid.variable
        )));
    }
    eff.grid = Some(grid);
    Ok(eff)
}

/// Fixed inputs shared by every grid point.
#[derive(Debug, Clone)]
struct Scenario {
    arr: ArrayGeometry,
    nb: NodeGeometry,
    ne: NodeGeometry,
    noise: f64,
    snr: f64,
    r0: f64,
    threshold: f64,
    rule: QuadratureRule,
    variant: FormVariant,
}

impl Scenario {
    fn from_config(cfg: &SweepConfig) -> nfpls::Result<Self> {
        Ok(Self {
            arr: cfg.array()?,
            nb: cfg.bob()?,
            ne: cfg.eve()?,
            noise: cfg.noise(),
            snr: cfg.snr(),
            r0: cfg.r0,
            threshold: cfg.threshold,
            rule: chebyshev_gauss_nodes(cfg.quad_order)?,
            variant: if cfg.uncorrected_forms {
                FormVariant::Uncorrected
            } else {
                FormVariant::Corrected
            },
        })
    }

    fn budget(&self) -> nfpls::Result<LinkBudget> {
        LinkBudget::new(self.snr * self.noise, self.noise, self.noise)
    }

    fn stats(&self, model: ChannelModel) -> nfpls::Result<LinkStats> {
        closed_form_stats(
            model,
            &self.arr,
            &self.nb,
            &self.ne,
            &self.rule,
            self.variant,
        )
    }

    fn oracle_ok(&self) -> bool {
        self.arr.m_total() <= ORACLE_MAX_ELEMENTS
    }

    fn channels(
        &self,
        model: ChannelModel,
    ) -> nfpls::Result<(nfpls::ChannelVector, nfpls::ChannelVector)> {
        Ok((
            build_channel(model, &self.arr, &self.nb)?,
            build_channel(model, &self.arr, &self.ne)?,
        ))
    }

    fn capacity_closed(&self, model: ChannelModel) -> nfpls::Result<f64> {
        Ok(secrecy_capacity_closed(&self.stats(model)?, &self.budget()?).capacity)
    }

    fn capacity_oracle(&self, model: ChannelModel) -> nfpls::Result<Cell> {
        if !self.oracle_ok() {
            return Ok(Cell::Skipped);
        }
        let (hb, he) = self.channels(model)?;
        let out = capacity_eigen_oracle(
            hb.entries(),
            he.entries(),
            &self.budget()?,
            OracleMethod::DenseEigen,
        )?;
        Ok(Cell::Num(out.capacity))
    }

    fn capacity_asymptote(&self, model: ChannelModel, regime: Regime) -> nfpls::Result<f64> {
        let s = self.stats(model)?;
        Ok(
            asymptotic_capacity(regime, &self.arr, &self.nb, &self.ne, &s, self.snr)
                .bits()
                .unwrap_or(f64::NAN),
        )
    }

    fn power_closed(&self, model: ChannelModel) -> nfpls::Result<f64> {
        let out = min_power_closed(&self.stats(model)?, self.noise, self.noise, self.r0)?;
        Ok(out.watts().unwrap_or(f64::INFINITY))
    }

    fn power_oracle(&self, model: ChannelModel) -> nfpls::Result<Cell> {
        if !self.oracle_ok() {
            return Ok(Cell::Skipped);
        }
        let (hb, he) = self.channels(model)?;
        let out = min_power_eigen_oracle(
            hb.entries(),
            he.entries(),
            self.noise,
            self.noise,
            self.r0,
            OracleMethod::DenseEigen,
        )?;
        Ok(Cell::Num(out.watts().unwrap_or(f64::INFINITY)))
    }

    fn power_asymptote(&self, model: ChannelModel) -> f64 {
        match power_limit(model, &self.arr, &self.nb, &self.ne, self.noise, self.r0) {
            PowerLimit::Zero => 0.0,
            PowerLimit::Infinite => f64::INFINITY,
            PowerLimit::Floor(p) => p,
        }
    }
}

/// Failed evaluations become `nan` cells with a warning; the sweep continues.
fn cell(label: &str, x: f64, model: ChannelModel, r: nfpls::Result<impl Into<Cell>>) -> Cell {
    match r {
        Ok(v) => v.into(),
        Err(e) => {
            log::warn!("{label} at {x} ({model}): {e}");
            Cell::Num(f64::NAN)
        }
    }
}

fn header(exp: Experiment, var: &str) -> Vec<String> {
    let cols: &[&str] = match exp {
        Experiment::CapacityVsM | Experiment::PowerVsM => {
            &["side", "m_total", "closed", "oracle", "asymptote"]
        }
        Experiment::DepthVsM => &[
            "side",
            "m_total",
            "closed",
            "oracle",
            "r_s",
            "m_s",
            "m_s_literal",
        ],
        Experiment::CapacityPerturbation => {
            &["delta_theta", "delta_phi", "normalized", "closed", "oracle"]
        }
        Experiment::CospsiVsRe => &["", "closed", "oracle"],
        _ => &["", "closed", "oracle", "asymptote"],
    };
    cols.iter()
        .map(|c| {
            if c.is_empty() {
                var.to_string()
            } else {
                c.to_string()
            }
        })
        .collect()
}

/// Builds one table per model without touching the filesystem.
pub fn build_tables(
    cfg: &SweepConfig,
    exp: Experiment,
) -> Result<Vec<(ChannelModel, CsvTable)>, RunError> {
    let eff = effective_config(cfg, exp)?;
    let grid = eff.grid.clone().expect("effective config has a grid");
    let base = Scenario::from_config(&eff)?;
    let var = grid.variable.clone();
    let values = grid.values();
    let sides = odd_sides(&values);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = eff.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;

    let mut out = Vec::new();
    for &model in &eff.models {
        let h = header(exp, &var);
        let mut table = CsvTable {
            header: h,
            rows: Vec::new(),
        };
        let rows: Vec<Vec<Cell>> = pool.install(|| match exp {
            Experiment::CapacityVsM | Experiment::PowerVsM | Experiment::DepthVsM => sides
                .par_iter()
                .map(|&side| size_row(exp, &base, model, side))
                .collect::<Result<_, RunError>>(),
            Experiment::CapacityPerturbation => {
                let pairs: Vec<(f64, f64)> = values
                    .iter()
                    .flat_map(|&a| values.iter().map(move |&b| (a, b)))
                    .collect();
                pairs
                    .par_iter()
                    .map(|&(dt, dp)| perturbation_row(&base, model, dt, dp))
                    .collect()
            }
            _ => values
                .par_iter()
                .map(|&x| scalar_row(exp, &base, model, &var, x))
                .collect(),
        })?;
        table.rows = rows;
        if exp == Experiment::CapacityPerturbation {
            normalize(&mut table);
        }
        out.push((model, table));
    }
    Ok(out)
}

fn scalar_row(
    exp: Experiment,
    base: &Scenario,
    model: ChannelModel,
    var: &str,
    x: f64,
) -> Result<Vec<Cell>, RunError> {
    let mut sc = base.clone();
    match var {
        "snr_db" => sc.snr = 10f64.powf(x / 10.0),
        "snr" => sc.snr = x,
        "r_e" => sc.ne = base.ne.with_range(x)?,
        "r0" => sc.r0 = x,
        _ => unreachable!("grid variable validated by effective_config"),
    }
    let name = exp.name();
    Ok(match exp {
        Experiment::CapacityVsSnr | Experiment::CapacityVsRe => {
            let regime = if exp == Experiment::CapacityVsSnr {
                Regime::HighSnr
            } else {
                Regime::LargeM
            };
            vec![
                Cell::Num(x),
                cell(name, x, model, sc.capacity_closed(model)),
                cell(name, x, model, sc.capacity_oracle(model)),
                cell(name, x, model, sc.capacity_asymptote(model, regime)),
            ]
        }
        Experiment::CospsiVsRe => {
            let closed = sc.stats(model).and_then(|s| cos_psi(s.rho));
            let oracle = if sc.oracle_ok() {
                sc.channels(model)
                    .and_then(|(hb, he)| cos_psi_numeric(hb.entries(), he.entries()))
                    .map(Cell::Num)
            } else {
                Ok(Cell::Skipped)
            };
            vec![
                Cell::Num(x),
                cell(name, x, model, closed),
                cell(name, x, model, oracle),
            ]
        }
        Experiment::PowerVsR0 | Experiment::PowerVsRe => vec![
            Cell::Num(x),
            cell(name, x, model, sc.power_closed(model)),
            cell(name, x, model, sc.power_oracle(model)),
            Cell::Num(sc.power_asymptote(model)),
        ],
        _ => unreachable!("array-size and perturbation experiments have their own rows"),
    })
}

fn size_row(
    exp: Experiment,
    base: &Scenario,
    model: ChannelModel,
    side: usize,
) -> Result<Vec<Cell>, RunError> {
    let mut sc = base.clone();
    sc.arr = base.arr.with_counts(side, side)?;
    let m = sc.arr.m_total() as f64;
    let x = side as f64;
    let name = exp.name();
    Ok(match exp {
        Experiment::CapacityVsM => vec![
            Cell::Num(x),
            Cell::Num(m),
            cell(name, x, model, sc.capacity_closed(model)),
            cell(name, x, model, sc.capacity_oracle(model)),
            cell(name, x, model, sc.capacity_asymptote(model, Regime::LargeM)),
        ],
        Experiment::PowerVsM => vec![
            Cell::Num(x),
            Cell::Num(m),
            cell(name, x, model, sc.power_closed(model)),
            cell(name, x, model, sc.power_oracle(model)),
            Cell::Num(sc.power_asymptote(model)),
        ],
        Experiment::DepthVsM => {
            let closed = depth_closed(&sc.arr, &sc.nb, sc.threshold);
            let oracle = if sc.oracle_ok() {
                depth_scan(&sc.arr, &sc.nb, sc.threshold, model).map(|r| Cell::Num(r.depth))
            } else {
                Ok(Cell::Skipped)
            };
            let field = |f: fn(&nfpls::DepthReport) -> Option<f64>| {
                closed
                    .as_ref()
                    .ok()
                    .and_then(f)
                    .map_or(Cell::Num(f64::NAN), Cell::Num)
            };
            vec![
                Cell::Num(x),
                Cell::Num(m),
                cell(
                    name,
                    x,
                    model,
                    closed.as_ref().map(|r| r.depth).map_err(Clone::clone),
                ),
                cell(name, x, model, oracle),
                field(|r| r.r_s),
                field(|r| r.m_s),
                field(|r| r.m_s_literal),
            ]
        }
        _ => unreachable!("only array-size experiments sweep the side length"),
    })
}

fn perturbation_row(
    base: &Scenario,
    model: ChannelModel,
    dt: f64,
    dp: f64,
) -> Result<Vec<Cell>, RunError> {
    let mut sc = base.clone();
    let name = Experiment::CapacityPerturbation.name();
    let moved = NodeGeometry::new(base.ne.range(), base.nb.theta() + dt, base.nb.phi() + dp);
    let (closed, oracle) = match moved {
        Ok(ne) => {
            sc.ne = ne;
            (
                cell(name, dt, model, sc.capacity_closed(model)),
                cell(name, dt, model, sc.capacity_oracle(model)),
            )
        }
        Err(e) => {
            log::warn!("{name} at ({dt}, {dp}): {e}");
            (Cell::Num(f64::NAN), Cell::Num(f64::NAN))
        }
    };
    Ok(vec![
        Cell::Num(dt),
        Cell::Num(dp),
        Cell::Num(f64::NAN),
        closed,
        oracle,
    ])
}

/// Fills the `normalized` column with closed / max(closed) over the table.
fn normalize(table: &mut CsvTable) {
    let peak = table
        .rows
        .iter()
        .filter_map(|r| match r[3] {
            Cell::Num(v) if v.is_finite() => Some(v),
            _ => None,
        })
        .fold(0.0, f64::max);
    for row in &mut table.rows {
        if let Cell::Num(v) = row[3] {
            row[2] = Cell::Num(if peak > 0.0 { v / peak } else { f64::NAN });
        }
    }
}

/// Runs `exp`, writing `<exp>_<model>.csv` per model plus `<exp>.effective.cfg` into `out_dir`.
pub fn run_experiment(
    cfg: &SweepConfig,
    exp: Experiment,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(out_dir)?;
    let eff = effective_config(cfg, exp)?;
    std::fs::write(out_dir.join(format!("{exp}.effective.cfg")), eff.echo())?;
    let mut written = Vec::new();
    for (model, table) in build_tables(cfg, exp)? {
        let path = out_dir.join(format!("{exp}_{}.csv", model.name()));
        table.write_path(&path)?;
        log::info!("wrote {} ({} rows)", path.display(), table.rows.len());
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridScale;

    fn cfg_with(grid: GridSpec) -> SweepConfig {
        SweepConfig {
            grid: Some(grid),
            threads: Some(2),
            ..SweepConfig::default()
        }
    }

    fn num(c: Cell) -> f64 {
        match c {
            Cell::Num(v) => v,
            Cell::Skipped => panic!("unexpected skipped cell"),
        }
    }

    #[test]
    fn far_field_plateau_at_high_snr() {
        let cfg = SweepConfig {
            models: vec![ChannelModel::Upw],
            ..cfg_with(GridSpec::new("snr_db", 60.0, 80.0, 3, GridScale::Linear).unwrap())
        };
        let tables = build_tables(&cfg, Experiment::CapacityVsSnr).unwrap();
        let closed = tables[0].1.column("closed").unwrap();
        assert!((num(closed[2]) - 2.0).abs() < 1e-3);
    }

    #[test]
    fn upw_power_is_infinite_above_two_bits() {
        let cfg = SweepConfig {
            models: vec![ChannelModel::Upw],
            ..cfg_with(GridSpec::new("r0", 1.0, 3.0, 5, GridScale::Linear).unwrap())
        };
        let t = &build_tables(&cfg, Experiment::PowerVsR0).unwrap()[0].1;
        let x = t.column("r0").unwrap();
        let p = t.column("closed").unwrap();
        for (x, p) in x.into_iter().zip(p) {
            // R0 = 2 is the boundary Gb/Ge = 2^R0, itself unreachable
            assert_eq!(num(x) >= 2.0, num(p).is_infinite(), "R0 = {}", num(x));
        }
    }

    #[test]
    fn oracle_columns_track_closed_form_for_small_arrays() {
        let cfg = SweepConfig {
            models: vec![ChannelModel::Nusw],
            ..cfg_with(GridSpec::new("side", 3.0, 25.0, 4, GridScale::Linear).unwrap())
        };
        let t = &build_tables(&cfg, Experiment::CapacityVsM).unwrap()[0].1;
        for row in &t.rows {
            if num(row[1]) <= 400.0 {
                let (c, o) = (num(row[2]), num(row[3]));
                assert!((c - o).abs() < 0.02 * o.max(1e-3), "{c} vs {o}");
            } else {
                assert_eq!(row[3], Cell::Skipped);
            }
        }
    }

    #[test]
    fn unknown_grid_variable_is_a_config_error() {
        let cfg = cfg_with(GridSpec::new("r_b", 1.0, 2.0, 2, GridScale::Linear).unwrap());
        assert!(matches!(
            effective_config(&cfg, Experiment::PowerVsRe),
            Err(RunError::Config(_))
        ));
    }

    #[test]
    fn perturbation_is_normalized() {
        let cfg = SweepConfig {
            models: vec![ChannelModel::Usw],
            ..cfg_with(GridSpec::new("delta", -0.01, 0.01, 3, GridScale::Linear).unwrap())
        };
        let t = &build_tables(&cfg, Experiment::CapacityPerturbation).unwrap()[0].1;
        assert_eq!(t.rows.len(), 9);
        let peak = t
            .column("normalized")
            .unwrap()
            .into_iter()
            .map(num)
            .fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-15);
    }
}
