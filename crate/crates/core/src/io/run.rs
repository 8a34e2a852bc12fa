//! Subcommand drivers producing [`ResultRecord`]s.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use crate::density::{check_kinetic_inequalities, DensityMatrix};
use crate::error::{Error, Result};
use crate::fields::{Cell, C64};
use crate::io::checkpoint::Checkpoint;
use crate::io::config::RunConfig;
use crate::io::record::{InequalityEntry, Quantity, Residual, ResultRecord, Table, Unit};
use crate::pauli::{BoundaryMode, MagneticPotential, SystemSpec};
use crate::scf::{scan_alpha, scf_solve_from, ScfConfig, ScfStatus};
use crate::tf::{beta_lower_bound_chain, tf_minimize};
use crate::zero_modes::{alpha_c_from_beta, beta_rank1_upper_bound, grid_residual, instability_scan, loss_yau, ZeroModeFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Scf,
    ScfPeriodic,
    ZeroMode,
    BetaBound,
    AlphaC,
    InstabilityScan,
    AlphaScan,
    TfBound,
    CheckInequalities,
}

impl Subcommand {
    pub const ALL: [Subcommand; 9] = [
        Subcommand::Scf,
        Subcommand::ScfPeriodic,
        Subcommand::ZeroMode,
        Subcommand::BetaBound,
        Subcommand::AlphaC,
        Subcommand::InstabilityScan,
        Subcommand::AlphaScan,
        Subcommand::TfBound,
        Subcommand::CheckInequalities,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Scf => "scf",
            Subcommand::ScfPeriodic => "scf-periodic",
            Subcommand::ZeroMode => "zero-mode",
            Subcommand::BetaBound => "beta-bound",
            Subcommand::AlphaC => "alpha-c",
            Subcommand::InstabilityScan => "instability-scan",
            Subcommand::AlphaScan => "alpha-scan",
            Subcommand::TfBound => "tf-bound",
            Subcommand::CheckInequalities => "check-inequalities",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown subcommand '{s}'")))
    }
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    /// Warm-start source (if it exists) and destination for SCF runs.
    pub checkpoint: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Runs `sub`; failures are recorded in [`ResultRecord::error`] together
/// with whatever was computed before them. The record is written to the
/// output directory when one is configured.
pub fn run(sub: Subcommand, config: &RunConfig, opts: &RunOptions) -> ResultRecord {
    let hash = config.hash();
    let seed = opts.seed.unwrap_or(config.seed);
    let run_id = config
        .output
        .run_id
        .clone()
        .unwrap_or_else(|| format!("{}-{}", sub.as_str(), &hash[..12]));
    let mut rec = ResultRecord::new(&run_id, sub.as_str(), &hash, seed);
    let start = Instant::now();
    let outcome = config.validate().and_then(|_| dispatch(sub, config, opts, seed, &mut rec));
    if let Err(e) = outcome {
        log::error!("{sub} failed: {e}");
        rec.error = Some(e.to_string());
    }
    rec.timing = Quantity::new(start.elapsed().as_secs_f64(), Unit::Second);
    let out = opts.out.clone().or_else(|| config.output.dir.as_ref().map(PathBuf::from));
    if let Some(dir) = out {
        match rec.write(&dir) {
            Ok(path) => log::info!("wrote {}", path.display()),
            Err(e) => {
                log::error!("could not write record: {e}");
                if rec.error.is_none() {
                    rec.error = Some(format!("writing record: {e}"));
                }
            }
        }
    }
    rec
}

fn dispatch(sub: Subcommand, config: &RunConfig, opts: &RunOptions, seed: u64, rec: &mut ResultRecord) -> Result<()> {
    match sub {
        Subcommand::Scf => run_scf(config, opts, seed, BoundaryMode::Molecular, rec),
        Subcommand::ScfPeriodic => run_scf(config, opts, seed, BoundaryMode::Periodic, rec),
        Subcommand::ZeroMode => run_zero_mode(config, rec),
        Subcommand::BetaBound => run_beta_bound(config, rec),
        Subcommand::AlphaC => run_alpha_c(config, rec),
        Subcommand::InstabilityScan => run_instability(config, rec),
        Subcommand::AlphaScan => run_alpha_scan(config, seed, rec),
        Subcommand::TfBound => run_tf_bound(config, rec),
        Subcommand::CheckInequalities => run_check_inequalities(config, seed, rec),
    }
}

fn scf_config(config: &RunConfig, seed: u64) -> ScfConfig {
    ScfConfig {
        seed,
        constants: config.constants,
        ..config.scf.clone()
    }
}

/// System of the SCF subcommands; the boundary mode is set by the subcommand.
fn system_for(config: &RunConfig, mode: BoundaryMode) -> Result<SystemSpec> {
    let mut sys = config
        .system
        .clone()
        .ok_or_else(|| Error::Config {
            path: "system".into(),
            message: "this subcommand needs a [system] block".into(),
        })?;
    if sys.mode != mode {
        log::warn!("boundary mode {} overridden by the subcommand", sys.mode.as_str());
        sys.mode = mode;
    }
    sys.build()
}

fn family(config: &RunConfig) -> Result<ZeroModeFamily> {
    let w = config.zero_mode.w;
    let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    loss_yau([w[0] / n, w[1] / n, w[2] / n])
}

fn status_code(s: ScfStatus) -> f64 {
    match s {
        ScfStatus::Converged => 0.0,
        ScfStatus::NotConverged => 1.0,
        ScfStatus::Diverged => 2.0,
    }
}

fn run_scf(config: &RunConfig, opts: &RunOptions, seed: u64, mode: BoundaryMode, rec: &mut ResultRecord) -> Result<()> {
    let spec = system_for(config, mode)?;
    let cfg = scf_config(config, seed);
    let warm = match &opts.checkpoint {
        Some(p) if p.exists() => {
            let ws = Checkpoint::load(p)?.warm_start(&spec)?;
            log::info!("warm start from {}", p.display());
            rec.flags.push(format!("warm start from {}", p.display()));
            Some(ws)
        }
        _ => None,
    };
    let state = scf_solve_from(&spec, &cfg, warm.as_ref())?;
    rec.set_energy(&state.energy);
    rec.set("fermi_energy", state.fermi_energy, Unit::Hartree);
    rec.set("iterations", state.iterations as f64, Unit::Dimensionless);
    rec.set("status", status_code(state.status), Unit::Dimensionless);
    rec.set("electrons", spec.electrons(), Unit::Dimensionless);
    rec.set("alpha", spec.alpha(), Unit::Dimensionless);
    rec.set("cell_length", spec.cell().length(), Unit::Bohr);
    rec.set("field_energy", state.a.field_energy_raw(), Unit::Dimensionless);
    let r = &state.residuals;
    for (name, v) in [
        ("orbital", r.orbital),
        ("vector_potential", r.vector_potential),
        ("continuity", r.continuity),
    ] {
        rec.residuals.push(Residual::new(name, v, cfg.tolerance));
    }
    rec.set("density_residual", r.density, Unit::Dimensionless);
    let mut hist = Table::new("iterations", &[("iteration", Unit::Dimensionless), ("energy", Unit::Hartree)]);
    for (i, e) in state.energy_history.iter().enumerate() {
        hist.push(vec![(i + 1) as f64, *e]);
    }
    rec.tables.push(hist);
    let mut levels = Table::new("levels", &[("index", Unit::Dimensionless), ("level", Unit::Hartree)]);
    for (i, l) in state.levels.iter().enumerate() {
        levels.push(vec![i as f64, *l]);
    }
    rec.tables.push(levels);
    for (i, rep) in state.inequality_reports.iter().enumerate() {
        rec.inequalities.push(InequalityEntry::new(format!("iterate {}", i + 1), rep));
    }
    rec.flags.extend(state.flags.iter().cloned());
    if let Some(p) = &opts.checkpoint {
        Checkpoint::from_state(&state).save(p)?;
        log::info!("checkpoint written to {}", p.display());
    }
    Ok(())
}

/// Rank-1 density matrix and field of the zero mode sampled on `cell`.
pub fn sampled_zero_mode(fam: &ZeroModeFamily, cell: &Cell) -> Result<(DensityMatrix, MagneticPotential)> {
    let (psi, a) = fam.sample(cell);
    let psi = psi.scaled(C64::new(1.0 / psi.norm(), 0.0));
    let gamma = DensityMatrix::new(vec![psi], vec![1.0], BoundaryMode::Molecular)?;
    Ok((gamma, MagneticPotential::new(a, false)))
}

fn run_zero_mode(config: &RunConfig, rec: &mut ResultRecord) -> Result<()> {
    let zc = &config.zero_mode;
    let fam = family(config)?;
    let base = fam.base_integrals();
    rec.set("norm_sq", base.norm_sq, Unit::Dimensionless);
    rec.set("i1", base.i1, Unit::Dimensionless);
    rec.set("d1", base.d1, Unit::Dimensionless);
    rec.set("b2", base.b2, Unit::Dimensionless);
    rec.set("covariant_kinetic", base.covariant_kinetic, Unit::Hartree);
    let mut table = Table::new(
        "residuals",
        &[("points", Unit::Dimensionless), ("spacing", Unit::Bohr), ("residual", Unit::Dimensionless)],
    );
    let mut points = zc.points.clone();
    points.sort_unstable();
    let mut last = None;
    for &n in &points {
        let cell = Cell::new(zc.length, n)?;
        let r = grid_residual(&fam, &cell)?;
        log::info!("zero mode residual at n = {n}: {r:.3e}");
        table.push(vec![n as f64, cell.spacing(), r]);
        last = Some((cell, r));
    }
    let res = table.column("residual").unwrap_or_default();
    if res.windows(2).any(|w| w[1] >= w[0]) {
        rec.flags.push("zero-mode residual does not decrease under refinement".into());
    }
    rec.tables.push(table);
    if let Some((cell, r)) = last {
        rec.residuals.push(Residual::new("zero_mode", r, zc.tolerance));
        let (gamma, a) = sampled_zero_mode(&fam, &cell)?;
        let report = check_kinetic_inequalities(&gamma, &a, &config.constants)?;
        rec.inequalities.push(InequalityEntry::new(format!("zero mode n = {}", cell.points()), &report));
        if !report.all_hold() {
            rec.flags.push("kinetic inequality violated on the sampled zero mode".into());
        }
    }
    Ok(())
}

fn run_beta_bound(config: &RunConfig, rec: &mut ResultRecord) -> Result<()> {
    let fam = family(config)?;
    let n = config.scan.electrons;
    let tf = tf_minimize(&config.tf.grid()?, &config.tf)?;
    rec.set("i_tf", tf.energy, Unit::Hartree);
    rec.residuals.push(Residual::new("tf_kkt", tf.kkt_residual, config.tf.tolerance));
    let mut table = Table::new(
        "beta",
        &[
            ("z", Unit::Dimensionless),
            ("electrons", Unit::Dimensionless),
            ("epsilon_star", Unit::Dimensionless),
            ("beta_upper", Unit::Hartree),
            ("beta_lower", Unit::Hartree),
        ],
    );
    for &z in &config.scan.charges {
        let (eps, beta) = beta_rank1_upper_bound(z, n, &fam)?;
        let lower = beta_lower_bound_chain(z, &config.constants, Some(tf.energy), &config.tf)?;
        if lower.bound > beta {
            rec.flags.push(format!("lower bound above upper bound at z = {z}"));
        }
        table.push(vec![z, n, eps, beta, lower.bound]);
    }
    rec.tables.push(table);
    Ok(())
}

fn run_alpha_c(config: &RunConfig, rec: &mut ResultRecord) -> Result<()> {
    let fam = family(config)?;
    let n = config.scan.electrons;
    let mut table = Table::new(
        "alpha_c",
        &[
            ("z", Unit::Dimensionless),
            ("electrons", Unit::Dimensionless),
            ("beta_upper", Unit::Hartree),
            ("alpha_c_upper", Unit::Dimensionless),
        ],
    );
    for &z in &config.scan.charges {
        let (_, beta) = beta_rank1_upper_bound(z, n, &fam)?;
        let alpha_c = alpha_c_from_beta(beta)?;
        table.push(vec![z, n, beta, alpha_c]);
        if config.scan.charges.len() == 1 {
            rec.set("beta_upper", beta, Unit::Hartree);
            rec.set("alpha_c_upper", alpha_c, Unit::Dimensionless);
        }
    }
    rec.tables.push(table);
    Ok(())
}

fn run_instability(config: &RunConfig, rec: &mut ResultRecord) -> Result<()> {
    let fam = family(config)?;
    let s = &config.scan;
    let z = *s.charges.first().ok_or_else(|| Error::invalid("scan.charges is empty"))?;
    let (_, beta) = beta_rank1_upper_bound(z, s.electrons, &fam)?;
    let alpha_c = alpha_c_from_beta(beta)?;
    let alpha = s.alpha.unwrap_or(s.alpha_factor * alpha_c);
    let scan = instability_scan(z, s.electrons, alpha, &s.lambdas, &fam)?;
    rec.set("z", z, Unit::Dimensionless);
    rec.set("electrons", s.electrons, Unit::Dimensionless);
    rec.set("alpha", alpha, Unit::Dimensionless);
    rec.set("alpha_c_upper", scan.alpha_c_ub, Unit::Dimensionless);
    rec.set("beta_upper", scan.beta_ub, Unit::Hartree);
    rec.set("epsilon_star", scan.epsilon_star, Unit::Dimensionless);
    rec.set("slope_closed_form", scan.closed_form_slope, Unit::Hartree);
    rec.set("slope_fitted", scan.fitted_slope, Unit::Hartree);
    rec.set("intercept_fitted", scan.fitted_intercept, Unit::Hartree);
    let mut table = Table::new("instability", &[("lambda", Unit::Dimensionless), ("energy", Unit::Hartree)]);
    for (l, e) in scan.lambdas.iter().zip(&scan.energies) {
        table.push(vec![*l, *e]);
    }
    rec.tables.push(table);
    if alpha > alpha_c && scan.energies.windows(2).any(|w| w[1] >= w[0]) {
        rec.flags.push("energy not strictly decreasing above the critical coupling".into());
    }
    Ok(())
}

fn run_alpha_scan(config: &RunConfig, seed: u64, rec: &mut ResultRecord) -> Result<()> {
    let spec = config.system_spec()?;
    let cfg = scf_config(config, seed);
    let scan = scan_alpha(&spec, &config.scan.alphas, &cfg)?;
    let mut table = Table::new(
        "alpha_scan",
        &[
            ("alpha", Unit::Dimensionless),
            ("energy", Unit::Hartree),
            ("status", Unit::Dimensionless),
            ("iterations", Unit::Dimensionless),
            ("max_residual", Unit::Dimensionless),
            ("increment", Unit::Hartree),
            ("concavity_defect", Unit::Hartree),
        ],
    );
    for (i, row) in scan.rows.iter().enumerate() {
        let inc = if i > 0 { scan.increments[i - 1] } else { f64::NAN };
        let def = if i > 0 && i + 1 < scan.rows.len() {
            scan.concavity_defects[i - 1]
        } else {
            f64::NAN
        };
        table.push(vec![
            row.alpha,
            row.energy,
            status_code(row.status),
            row.iterations as f64,
            row.max_residual,
            inc,
            def,
        ]);
        rec.residuals.push(Residual::new(&format!("alpha {}", row.alpha), row.max_residual, cfg.tolerance));
        if let Some(e) = &row.error {
            rec.flags.push(format!("alpha {}: {e}", row.alpha));
        }
    }
    rec.tables.push(table);
    rec.set("max_increment", scan.max_increment(), Unit::Hartree);
    rec.set("max_concavity_defect", scan.max_concavity_defect(), Unit::Hartree);
    Ok(())
}

fn run_tf_bound(config: &RunConfig, rec: &mut ResultRecord) -> Result<()> {
    let tf = tf_minimize(&config.tf.grid()?, &config.tf)?;
    rec.set("i_tf", tf.energy, Unit::Hartree);
    rec.set("tf_kinetic", tf.terms.kinetic, Unit::Hartree);
    rec.set("tf_hartree", tf.terms.hartree, Unit::Hartree);
    rec.set("tf_attraction", tf.terms.attraction, Unit::Hartree);
    rec.set("tf_mass", tf.density.mass(), Unit::Dimensionless);
    rec.set("tf_iterations", tf.iterations as f64, Unit::Dimensionless);
    rec.residuals.push(Residual::new("tf_kkt", tf.kkt_residual, config.tf.tolerance));
    let mut table = Table::new(
        "chain",
        &[
            ("z", Unit::Dimensionless),
            ("a", Unit::Dimensionless),
            ("b", Unit::Dimensionless),
            ("lambda", Unit::Dimensionless),
            ("bound", Unit::Hartree),
            ("bound_over_z76", Unit::Hartree),
        ],
    );
    for (i, &z) in config.scan.charges.iter().enumerate() {
        let l = beta_lower_bound_chain(z, &config.constants, Some(tf.energy), &config.tf)?;
        if i == 0 {
            rec.set("interpolation_constant", l.interpolation_constant, Unit::Dimensionless);
            rec.set("young_epsilon", l.young_epsilon, Unit::Dimensionless);
            rec.set("young_coefficient", l.young_coefficient, Unit::Dimensionless);
            rec.set("chain_constant", l.chain_constant, Unit::Hartree);
            rec.set("penalty", l.penalty, Unit::Hartree);
        }
        table.push(vec![z, l.a, l.b, l.lambda, l.bound, l.bound / z.powf(7.0 / 6.0)]);
    }
    rec.tables.push(table);
    let mut profile = Table::new("density", &[("r", Unit::Bohr), ("rho", Unit::Dimensionless)]);
    let stride = (tf.density.grid().len() / 256).max(1);
    for (i, (r, p)) in tf.density.grid().radii().iter().zip(tf.density.values()).enumerate() {
        if i % stride == 0 {
            profile.push(vec![*r, *p]);
        }
    }
    rec.tables.push(profile);
    Ok(())
}

fn run_check_inequalities(config: &RunConfig, seed: u64, rec: &mut ResultRecord) -> Result<()> {
    let spec = config.system_spec()?;
    let mut cfg = scf_config(config, seed);
    cfg.inequality_checks = true;
    let state = scf_solve_from(&spec, &cfg, None)?;
    for (i, rep) in state.inequality_reports.iter().enumerate() {
        rec.inequalities.push(InequalityEntry::new(format!("iterate {}", i + 1), rep));
    }
    let fam = family(config)?;
    let (gamma, a) = sampled_zero_mode(&fam, spec.cell())?;
    let report = check_kinetic_inequalities(&gamma, &a, &config.constants)?;
    rec.inequalities.push(InequalityEntry::new("zero mode", &report));
    let violations = rec.inequalities.iter().filter(|e| !e.holds).count();
    rec.set("checked", rec.inequalities.len() as f64, Unit::Dimensionless);
    rec.residuals.push(Residual::new("violations", violations as f64, 0.0));
    rec.flags.extend(state.flags.iter().cloned());
    Ok(())
}
