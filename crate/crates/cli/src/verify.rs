//! The `verify` and `value` commands: everything that re-derives a strategy
//! profile's optimality from its environment.

use std::path::Path;

use ezgames_core::equilibrium::{
    mfg_consistency_check, mfg_profile_environment, profile_environment, solve_mfge_uncertified,
    solve_nash_uncertified,
};
use ezgames_core::model::GameConfig;
use ezgames_core::valuation::TIME_ADDITIVE_TOL;
use ezgames_core::{
    best_reply, consumption_identity_residual, deviation_scan, value_simple, value_time_additive_mc,
    Consumption, DeviationGrid, Error, Horizon, NPlayerGame, SimpleStrategy, TypeDistribution,
    ValuationContext,
};
use serde::Serialize;

use crate::commands::{load_game, load_strategies, mean_field_law, nash_game};
use crate::output::{prepare_dir, write_json};
use crate::{Common, Failure};

pub enum Game {
    Nash(NPlayerGame),
    MeanField(TypeDistribution),
}

/// A game together with the profile to examine.
pub struct Profile {
    pub game: Game,
    pub horizon: Horizon,
    pub strategies: Vec<SimpleStrategy>,
    /// False when the strategies came from a file.
    pub solved: bool,
}

impl Profile {
    /// One profile per game present in `cfg`; a strategy file is only
    /// accepted when the file describes exactly one game.
    pub fn load_all(
        cfg: &GameConfig,
        hz: Horizon,
        strategies: Option<&Path>,
    ) -> Result<Vec<Profile>, Failure> {
        let has_nash = !cfg.agents.is_empty();
        let has_mfg = !cfg.mfg_atoms.is_empty();
        if !has_nash && !has_mfg {
            return Err(Error::InvalidInput("the game file lists neither agents nor mfg_atoms".into()).into());
        }
        if strategies.is_some() && has_nash && has_mfg {
            return Err(Failure::Validation(
                "a strategy file needs a game file with either agents or mfg_atoms, not both".into(),
            ));
        }
        let given = strategies.map(load_strategies).transpose()?;
        let mut out = Vec::new();
        if has_nash {
            let game = nash_game(cfg, hz)?;
            let (strategies, solved) = match &given {
                Some(s) => (s.clone(), false),
                None => (solve_nash_uncertified(&game)?.strategies, true),
            };
            out.push(Profile { game: Game::Nash(game), horizon: hz, strategies, solved });
        }
        if has_mfg {
            let dist = mean_field_law(cfg)?;
            let (strategies, solved) = match &given {
                Some(s) => (s.clone(), false),
                None => (solve_mfge_uncertified(&dist, &hz)?.strategies, true),
            };
            out.push(Profile { game: Game::MeanField(dist), horizon: hz, strategies, solved });
        }
        for p in &out {
            p.check_shape()?;
        }
        Ok(out)
    }

    fn members(&self) -> usize {
        match &self.game {
            Game::Nash(g) => g.n(),
            Game::MeanField(d) => d.len(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self.game {
            Game::Nash(_) => "nash",
            Game::MeanField(_) => "mean_field",
        }
    }

    fn check_shape(&self) -> Result<(), Failure> {
        if self.strategies.len() != self.members() {
            return Err(Error::DimensionMismatch(format!(
                "{} strategies for {} {}",
                self.strategies.len(),
                self.members(),
                if matches!(self.game, Game::Nash(_)) { "agents" } else { "atoms" }
            ))
            .into());
        }
        for s in &self.strategies {
            let t = s.consumption.t_end();
            if (t - self.horizon.t_end()).abs() > 1e-12 * self.horizon.t_end().max(1.0) {
                return Err(Error::DimensionMismatch(format!(
                    "strategy horizon {t} differs from game horizon {}",
                    self.horizon.t_end()
                ))
                .into());
            }
        }
        Ok(())
    }

    pub fn contexts(&self) -> Result<Vec<ValuationContext>, Failure> {
        (0..self.members())
            .map(|i| {
                Ok(match &self.game {
                    Game::Nash(g) => profile_environment(g, &self.strategies, i)?,
                    Game::MeanField(d) => mfg_profile_environment(d, &self.strategies, &self.horizon, i)?,
                })
            })
            .collect()
    }
}

#[derive(Serialize)]
pub struct MemberValue {
    pub index: usize,
    pub v0: f64,
    pub log_abs_v0: f64,
}

#[derive(Serialize)]
pub struct ProfileValues {
    pub game: &'static str,
    pub solved: bool,
    pub values: Vec<MemberValue>,
}

pub fn profile_values(p: &Profile) -> Result<ProfileValues, Failure> {
    let values = p
        .contexts()?
        .iter()
        .zip(&p.strategies)
        .enumerate()
        .map(|(index, (ctx, s))| {
            let v = value_simple(ctx, s)?;
            Ok(MemberValue { index, v0: v.v0, log_abs_v0: v.log_abs_v0 })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(ProfileValues { game: p.label(), solved: p.solved, values })
}

#[derive(Serialize)]
pub struct Check {
    pub check: &'static str,
    /// Agent or atom index; absent for game-level checks.
    pub member: Option<usize>,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn check(check: &'static str, member: Option<usize>, residual: f64, threshold: f64) -> Check {
    Check { check, member, residual, threshold, pass: residual <= threshold }
}

#[derive(Serialize)]
pub struct MonteCarloRow {
    pub member: usize,
    pub closed_form: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct ProfileVerification {
    pub game: &'static str,
    pub solved: bool,
    pub checks: Vec<Check>,
    /// Present for members with `gamma delta = 1`.
    pub monte_carlo: Vec<MonteCarloRow>,
}

#[derive(Serialize)]
pub struct VerificationReport {
    pub tolerances: ezgames_core::Tolerances,
    pub profiles: Vec<ProfileVerification>,
    pub failures: usize,
    pub all_pass: bool,
}

fn verify_profile(
    p: &Profile,
    tol: &ezgames_core::Tolerances,
    seed: u64,
    paths: usize,
) -> Result<ProfileVerification, Failure> {
    let hz = &p.horizon;
    let grid = DeviationGrid::default();
    let mut checks = Vec::new();
    let mut monte_carlo = Vec::new();
    for (i, (ctx, s)) in p.contexts()?.iter().zip(&p.strategies).enumerate() {
        let m = Some(i);
        let br = best_reply(ctx)?;
        let dpi = (br.strategy.pi - s.pi).abs();
        let rel = if s.pi != 0.0 { dpi / s.pi.abs() } else { dpi };
        checks.push(check("fixed_point_pi", m, rel, tol.fixed_point_pi));
        let ours = s.consumption.on_grid(hz);
        let theirs = br.strategy.consumption.on_grid(hz);
        let dc = ours.iter().zip(&theirs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        checks.push(check("fixed_point_c", m, dc, tol.fixed_point_c));
        if let Some(b) = &br.bernoulli {
            let scale = b.h.iter().fold(1.0f64, |acc, h| acc.max(h.abs()));
            checks.push(check("bernoulli_residual", m, b.residual_sup / scale, tol.bernoulli_residual));
        }
        if let Consumption::Chi { chi1, chi2, .. } = s.consumption {
            let r = consumption_identity_residual(chi1, chi2, &ours, hz);
            checks.push(check("consumption_identity", m, r, tol.consumption_identity));
        }
        let scan = deviation_scan(ctx, s, &grid)?;
        checks.push(check("deviation_scan", m, scan.relative_improvement.max(0.0), tol.deviation));
        if (ctx.agent.lambda() - 1.0).abs() <= TIME_ADDITIVE_TOL {
            let stream = seed.wrapping_add(i as u64);
            let closed = value_simple(ctx, s)?.v0 / ctx.agent.eta;
            let mc = value_time_additive_mc(ctx, s, paths, stream)?;
            let z = (closed - mc.mean).abs() / mc.std_error;
            checks.push(check("monte_carlo_value", m, z, tol.mc_standard_errors));
            monte_carlo.push(MonteCarloRow {
                member: i,
                closed_form: closed,
                estimate: mc.mean,
                std_error: mc.std_error,
                n_paths: mc.n_paths,
                seed: stream,
            });
        }
    }
    if let (Game::MeanField(dist), true) = (&p.game, p.solved) {
        let report = solve_mfge_uncertified(dist, hz)?;
        let c = mfg_consistency_check(&report, dist)?;
        checks.push(check("mfg_consistency", None, c.max(), tol.mfg_consistency));
    }
    Ok(ProfileVerification { game: p.label(), solved: p.solved, checks, monte_carlo })
}

pub fn run(
    input: &Path,
    strategies: Option<&Path>,
    seed: u64,
    paths: usize,
    common: &Common,
) -> Result<String, Failure> {
    let tol = common.tolerances()?;
    let (cfg, hz) = load_game(input, common)?;
    let profiles = Profile::load_all(&cfg, hz, strategies)?;
    let verified =
        profiles.iter().map(|p| verify_profile(p, &tol, seed, paths)).collect::<Result<Vec<_>, _>>()?;
    let failed: Vec<String> = verified
        .iter()
        .flat_map(|v| {
            v.checks.iter().filter(|c| !c.pass).map(move |c| match c.member {
                Some(m) => format!("{} {} of member {m}", v.game, c.check),
                None => format!("{} {}", v.game, c.check),
            })
        })
        .collect();
    let total: usize = verified.iter().map(|v| v.checks.len()).sum();
    let report = VerificationReport {
        tolerances: tol,
        profiles: verified,
        failures: failed.len(),
        all_pass: failed.is_empty(),
    };
    prepare_dir(&common.out)?;
    write_json(&common.out.join("verification.json"), &report)?;
    if failed.is_empty() {
        Ok(format!("{total} checks passed; wrote verification.json to {}", common.out.display()))
    } else {
        Err(Failure::Verification(format!(
            "{} of {total} checks failed: {}",
            failed.len(),
            failed.join("; ")
        )))
    }
}
