use std::path::Path;

use ezgames_core::analysis::{
    consumption_statics, emit_figure1_data, linspace, observed_monotonicity, portfolio_statics,
    ConsumptionAggregates, Monotonicity, StaticsReport,
};
use ezgames_core::asymptotics::{
    approximate_ne_gap, standard_ns, strategy_convergence, value_convergence, wealth_convergence, RateFit,
    SymmetricFixture,
};
use ezgames_core::model::{GameConfig, HorizonSpec};
use ezgames_core::{
    solve_mfge, solve_nash, Error, Horizon, NPlayerGame, SimpleStrategy, Tolerances, TypeDistribution,
};
use serde::{Deserialize, Serialize};

use crate::output::{fmt_f64, prepare_dir, read_text, write_csv, write_json};
use crate::verify::{profile_values, Profile};
use crate::{Common, Failure};

pub fn load_game(input: &Path, common: &Common) -> Result<(GameConfig, Horizon), Failure> {
    let cfg = GameConfig::from_json(&read_text(input)?)?;
    let grid_n = common.grid_n.map_or(cfg.horizon.grid_n, |g| g as usize);
    let hz = Horizon::new(cfg.horizon.t_end, grid_n)?;
    Ok((cfg, hz))
}

pub fn nash_game(cfg: &GameConfig, hz: Horizon) -> Result<NPlayerGame, Failure> {
    if cfg.agents.is_empty() {
        return Err(Error::InvalidInput("the game file lists no agents".into()).into());
    }
    Ok(NPlayerGame::new(cfg.agents.clone(), hz)?)
}

pub fn mean_field_law(cfg: &GameConfig) -> Result<TypeDistribution, Failure> {
    if cfg.mfg_atoms.is_empty() {
        return Err(Error::InvalidInput("the game file lists no mfg_atoms".into()).into());
    }
    Ok(cfg.distribution()?)
}

/// Reads either a JSON array of strategies or an object with a
/// `strategies` array, such as a solve report.
pub fn load_strategies(path: &Path) -> Result<Vec<SimpleStrategy>, Failure> {
    let value: serde_json::Value = serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::Validation(format!("parsing {}: {e}", path.display())))?;
    let list = match value {
        serde_json::Value::Object(mut m) => match m.remove("strategies") {
            Some(s) => s,
            None => match m.remove("report").and_then(|mut r| r.get_mut("strategies").map(|s| s.take())) {
                Some(s) => s,
                None => return Err(Failure::Validation("strategy file has no `strategies` array".into())),
            },
        },
        other => other,
    };
    let out: Vec<SimpleStrategy> =
        serde_json::from_value(list).map_err(|e| Failure::Validation(format!("parsing strategies: {e}")))?;
    for s in &out {
        s.validate()?;
    }
    Ok(out)
}

fn consumption_rows(strategies: &[SimpleStrategy], hz: &Horizon) -> Vec<Vec<String>> {
    let times = hz.times();
    strategies
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            let c = s.consumption.on_grid(hz);
            times
                .iter()
                .zip(c)
                .map(move |(t, c)| vec![i.to_string(), fmt_f64(*t), fmt_f64(c)])
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Serialize)]
struct SolveOutput<'a, R: Serialize> {
    /// Whether every certification residual is under its tolerance.
    certified: bool,
    tolerances: &'a Tolerances,
    report: &'a R,
}

pub fn solve_ne(input: &Path, common: &Common) -> Result<String, Failure> {
    let tol = common.tolerances()?;
    let (cfg, hz) = load_game(input, common)?;
    let game = nash_game(&cfg, hz)?;
    let report = solve_nash(&game)?;
    let r = &report.residuals;
    let certified = r.fixed_point_pi.unwrap_or(f64::INFINITY) <= tol.fixed_point_pi
        && r.fixed_point_c.unwrap_or(f64::INFINITY) <= tol.fixed_point_c
        && r.consumption_identity <= tol.consumption_identity;
    prepare_dir(&common.out)?;
    write_json(
        &common.out.join("equilibrium.json"),
        &SolveOutput { certified, tolerances: &tol, report: &report },
    )?;
    write_csv(
        &common.out.join("consumption.csv"),
        &["agent", "t", "c"],
        consumption_rows(&report.strategies, &hz),
    )?;
    Ok(format!(
        "Nash equilibrium of {} agents; certified: {certified}; wrote equilibrium.json and consumption.csv to {}",
        game.n(),
        common.out.display()
    ))
}

pub fn solve_mfg(input: &Path, common: &Common) -> Result<String, Failure> {
    let tol = common.tolerances()?;
    let (cfg, hz) = load_game(input, common)?;
    let dist = mean_field_law(&cfg)?;
    let report = solve_mfge(&dist, &hz)?;
    let r = &report.residuals;
    let certified = r.fixed_point_pi.unwrap_or(f64::INFINITY) <= tol.fixed_point_pi
        && r.fixed_point_c.unwrap_or(f64::INFINITY) <= tol.fixed_point_c
        && r.consumption_identity <= tol.consumption_identity
        && r.mfg_consistency.is_some_and(|m| m.max() <= tol.mfg_consistency);
    prepare_dir(&common.out)?;
    write_json(
        &common.out.join("equilibrium.json"),
        &SolveOutput { certified, tolerances: &tol, report: &report },
    )?;
    write_csv(
        &common.out.join("consumption.csv"),
        &["atom", "t", "c"],
        consumption_rows(&report.strategies, &hz),
    )?;
    Ok(format!(
        "mean-field equilibrium of {} atoms; certified: {certified}; wrote equilibrium.json and consumption.csv to {}",
        dist.len(),
        common.out.display()
    ))
}

pub fn value(input: &Path, strategies: Option<&Path>, common: &Common) -> Result<String, Failure> {
    common.tolerances()?;
    let (cfg, hz) = load_game(input, common)?;
    let profiles = Profile::load_all(&cfg, hz, strategies)?;
    let values = profiles.iter().map(profile_values).collect::<Result<Vec<_>, _>>()?;
    prepare_dir(&common.out)?;
    write_json(&common.out.join("values.json"), &values)?;
    Ok(format!("wrote values.json to {}", common.out.display()))
}

// ---------------------------------------------------------------------------

fn parse_ns(text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Validation(format!("--ns entry {s:?} is not a positive integer")))
        })
        .collect()
}

#[derive(Serialize)]
struct RateCheck {
    fit: RateFit,
    band: [f64; 2],
    pass: bool,
}

/// A skipped fit passes only when every gap is exactly zero.
fn rate_check(fit: RateFit, band: [f64; 2]) -> RateCheck {
    let pass = match fit.slope {
        Some(s) => (band[0]..=band[1]).contains(&s),
        None => fit.values.iter().all(|v| *v == 0.0),
    };
    RateCheck { fit, band, pass }
}

#[derive(Serialize)]
struct WealthCheck {
    median_slope: Option<f64>,
    slopes: Vec<Option<f64>>,
    band: [f64; 2],
    pass: bool,
}

#[derive(Serialize)]
struct ConvergeReport {
    fixture: SymmetricFixture,
    ns: Vec<usize>,
    grid_n: usize,
    simulation_grid_n: usize,
    realizations: usize,
    seed: u64,
    strategy_pi: RateCheck,
    strategy_c: RateCheck,
    value: RateCheck,
    approximate_ne: RateCheck,
    approximate_ne_signed_gaps: Vec<f64>,
    wealth: WealthCheck,
    all_pass: bool,
}

pub fn converge(
    input: Option<&Path>,
    ns: Option<&str>,
    seed: u64,
    realizations: usize,
    sim_grid_n: usize,
    common: &Common,
) -> Result<String, Failure> {
    let tol = common.tolerances()?;
    let fixture = match input {
        Some(p) => serde_json::from_str::<SymmetricFixture>(&read_text(p)?)
            .map_err(|e| Failure::Validation(format!("parsing {}: {e}", p.display())))?,
        None => SymmetricFixture::standard(),
    };
    fixture.typical_agent()?;
    if !(fixture.log_x0_sd >= 0.0 && fixture.log_x0_mean.is_finite() && fixture.log_x0_sd.is_finite()) {
        return Err(Failure::Validation("log_x0_sd must be finite and non-negative".into()));
    }
    let ns = ns.map_or_else(|| Ok(standard_ns()), parse_ns)?;
    let grid_n = common.grid_n.map_or(1000, |g| g as usize);

    let rate_band = [tol.rate_slope_low, tol.rate_slope_high];
    let s = strategy_convergence(&fixture, &ns, grid_n)?;
    let v = value_convergence(&fixture, &ns, grid_n)?;
    let g = approximate_ne_gap(&fixture, &ns, grid_n)?;
    let w = wealth_convergence(&fixture, &ns, realizations, seed, sim_grid_n)?;

    let mut rows = Vec::new();
    for (name, fit) in
        [("strategy_pi", &s.pi), ("strategy_c", &s.c), ("value", &v), ("approximate_ne", &g.fit)]
    {
        for (n, gap) in fit.ns.iter().zip(&fit.values) {
            rows.push(vec![name.to_string(), n.to_string(), fmt_f64(*gap)]);
        }
    }
    let wealth_rows: Vec<Vec<String>> = w
        .realizations
        .iter()
        .enumerate()
        .flat_map(|(r, fit)| {
            fit.ns
                .iter()
                .zip(&fit.values)
                .map(move |(n, gap)| vec![r.to_string(), n.to_string(), fmt_f64(*gap)])
        })
        .collect();

    let wealth_band = [tol.wealth_slope_low, tol.wealth_slope_high];
    let wealth_pass = match w.median_slope {
        Some(m) => tol.wealth_in_band(m),
        None => w.realizations.iter().all(|f| f.values.iter().all(|v| *v == 0.0)),
    };
    let report = ConvergeReport {
        fixture,
        ns: ns.clone(),
        grid_n,
        simulation_grid_n: sim_grid_n,
        realizations,
        seed,
        strategy_pi: rate_check(s.pi, rate_band),
        strategy_c: rate_check(s.c, rate_band),
        value: rate_check(v, rate_band),
        approximate_ne: rate_check(g.fit, [tol.approximate_ne_slope_low, tol.approximate_ne_slope_high]),
        approximate_ne_signed_gaps: g.signed_gaps,
        wealth: WealthCheck {
            median_slope: w.median_slope,
            slopes: w.realizations.iter().map(|f| f.slope).collect(),
            band: wealth_band,
            pass: wealth_pass,
        },
        all_pass: false,
    };
    let checks = [
        ("strategy_pi", report.strategy_pi.pass),
        ("strategy_c", report.strategy_c.pass),
        ("value", report.value.pass),
        ("approximate_ne", report.approximate_ne.pass),
        ("wealth", report.wealth.pass),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let report = ConvergeReport { all_pass: failed.is_empty(), ..report };

    prepare_dir(&common.out)?;
    write_json(&common.out.join("converge.json"), &report)?;
    write_csv(&common.out.join("rates.csv"), &["experiment", "N", "gap"], rows)?;
    write_csv(&common.out.join("wealth.csv"), &["realization", "N", "gap"], wealth_rows)?;
    let slope = |c: &RateCheck| c.fit.slope.map_or("skipped".to_string(), |s| format!("{s:.4}"));
    let summary = format!(
        "slopes: pi {}, c {}, value {}, approximate NE {}, wealth median {}",
        slope(&report.strategy_pi),
        slope(&report.strategy_c),
        slope(&report.value),
        slope(&report.approximate_ne),
        report.wealth.median_slope.map_or("skipped".to_string(), |s| format!("{s:.4}")),
    );
    if failed.is_empty() {
        Ok(format!(
            "{summary}; all in band; wrote converge.json, rates.csv, wealth.csv to {}",
            common.out.display()
        ))
    } else {
        Err(Failure::Verification(format!("{summary}; out of band: {}", failed.join(", "))))
    }
}

// ---------------------------------------------------------------------------

fn default_range() -> [f64; 2] {
    [0.25, 3.0]
}

fn default_count() -> usize {
    12
}

fn default_curve_horizon() -> HorizonSpec {
    HorizonSpec { t_end: 5.0, grid_n: 500 }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StaticsConfig {
    /// Population aggregates given directly.
    #[serde(default)]
    aggregates: Option<ConsumptionAggregates>,
    /// A game file whose `mfg_atoms` define the population.
    #[serde(default)]
    population: Option<GameConfig>,
    /// Focal atom of `population` for the consumption statics.
    #[serde(default)]
    atom: usize,
    #[serde(default)]
    deltas: Option<Vec<f64>>,
    #[serde(default = "default_range")]
    delta_range: [f64; 2],
    #[serde(default = "default_count")]
    delta_count: usize,
    #[serde(default = "default_curve_horizon")]
    curve_horizon: HorizonSpec,
}

impl Default for StaticsConfig {
    fn default() -> Self {
        StaticsConfig {
            aggregates: None,
            population: None,
            atom: 0,
            deltas: None,
            delta_range: default_range(),
            delta_count: default_count(),
            curve_horizon: default_curve_horizon(),
        }
    }
}

#[derive(Serialize)]
struct CurveCheck {
    delta: f64,
    label: Monotonicity,
    observed: Option<Monotonicity>,
    terminal_gap: f64,
}

#[derive(Serialize)]
struct StaticsOutput {
    statics: StaticsReport,
    portfolio_note: Option<String>,
    curves: Vec<CurveCheck>,
}

pub fn statics(input: Option<&Path>, common: &Common) -> Result<String, Failure> {
    common.tolerances()?;
    let cfg = match input {
        Some(p) => serde_json::from_str::<StaticsConfig>(&read_text(p)?)
            .map_err(|e| Failure::Validation(format!("parsing {}: {e}", p.display())))?,
        None => StaticsConfig::default(),
    };
    let population = match &cfg.population {
        Some(g) => Some((mean_field_law(g)?, g.horizon()?)),
        None => None,
    };
    let agg = match (&cfg.aggregates, &population) {
        (Some(a), _) => *a,
        (None, Some((dist, hz))) => ConsumptionAggregates::from_distribution(dist, cfg.atom, hz)?,
        (None, None) => ConsumptionAggregates::figure(0.5),
    };
    let deltas = match cfg.deltas {
        Some(d) => d,
        None => linspace(cfg.delta_range[0], cfg.delta_range[1], cfg.delta_count),
    };
    let consumption = consumption_statics(&agg, &deltas)?;
    let (portfolio, portfolio_note) = match &population {
        Some((dist, _)) => match portfolio_statics(dist) {
            Ok(p) => (Some(p), None),
            Err(e) if e.is_validation() => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        },
        None => (None, Some("no population given".to_string())),
    };
    let grid_n = common.grid_n.map_or(cfg.curve_horizon.grid_n, |g| g as usize);
    let hz = Horizon::new(cfg.curve_horizon.t_end, grid_n)?;
    let points = emit_figure1_data(&agg, &deltas, &hz)?;
    let nodes = hz.nodes();
    let curves: Vec<CurveCheck> = deltas
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let c: Vec<f64> = points[k * nodes..(k + 1) * nodes].iter().map(|p| p.c).collect();
            CurveCheck {
                delta: *d,
                label: consumption.rows[k].label,
                observed: observed_monotonicity(&c),
                terminal_gap: (c[nodes - 1] - agg.chi1).abs(),
            }
        })
        .collect();
    let summary = match consumption.delta_star {
        Some(ds) => format!("delta* = {ds:.9}"),
        None => "no sign change of chi2 - chi1 in the scanned range".to_string(),
    };
    let out = StaticsOutput { statics: StaticsReport { portfolio, consumption }, portfolio_note, curves };
    prepare_dir(&common.out)?;
    write_json(&common.out.join("statics.json"), &out)?;
    write_csv(
        &common.out.join("figure1.csv"),
        &["delta", "t", "c"],
        points.iter().map(|p| vec![fmt_f64(p.delta), fmt_f64(p.t), fmt_f64(p.c)]),
    )?;
    Ok(format!("{summary}; wrote statics.json and figure1.csv to {}", common.out.display()))
}
