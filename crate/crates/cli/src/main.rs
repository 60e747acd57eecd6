mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use coordcom::canon::{self, fixtures::named_distribution, two_round};
use coordcom::cp::{self, efficiency, finite, CpConfig};
use coordcom::equil::{self, induced};
use coordcom::evo::{self, EvoConfig};
use coordcom::ext::{extreme, multiaction, multidim, nplayer};
use coordcom::payoff;
use coordcom::props;
use coordcom::scenario::{Scenario, StrategySpec};
use coordcom::{ModelError, Strategy, TypeDistribution};

use output::{emit, object, Format};

#[derive(Parser)]
#[command(name = "coordcom", version, about = "Cheap talk before a two-action coordination game")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Select {
    /// Scenario file (JSON). Overrides --dist and --strategy.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Built-in strategy: sigma_l, sigma_r, sigma_c, sigma_alpha, babbling,
    /// extreme, example1_miscoordination, split_left,
    /// partial_coordination, always_left.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Babbling cutoff: ALL_L, ALL_R or a number.
    #[arg(long)]
    cutoff: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Named type distribution.
    #[arg(long, default_value = "uniform")]
    dist: String,
    #[arg(long, default_value_t = equil::DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = equil::DEFAULT_TOL)]
    tol: f64,
    /// Message labels to build the strategy over, comma separated.
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Baseline,
    Md,
    Nplayer,
    Multiaction,
    Extreme,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CpMode {
    Strong,
    Weak,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvoCheck {
    Nss,
    Ess,
    Dominance,
    Nis,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Repro {
    Example1,
    Counterexample,
    SigmaEx,
    Extreme,
    Efficiency,
    Multiaction,
    Nplayer,
}

#[derive(Subcommand)]
enum Command {
    /// Bayesian Nash equilibrium check on a type grid.
    Verify {
        #[command(flatten)]
        sel: Select,
    },
    /// Mutual preference consistency, coordination, binary communication.
    Props {
        #[command(flatten)]
        sel: Select,
        #[arg(long, value_enum, default_value = "baseline")]
        family: FamilyArg,
    },
    /// Communication-proofness against the candidate family.
    Cp {
        #[command(flatten)]
        sel: Select,
        #[arg(long, value_enum, default_value = "strong")]
        mode: CpMode,
        #[arg(long, value_enum, default_value = "baseline")]
        family: FamilyArg,
    },
    /// Equilibria of the two-type-per-side posterior game.
    Enumerate {
        /// Mass of the strong-L type among row players.
        #[arg(long)]
        alpha: Option<f64>,
        /// Mass of the strong-R type among column players.
        #[arg(long)]
        beta: Option<f64>,
        /// Grid steps per axis when alpha and beta are not given.
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// No-communication equilibria and their stability.
    Babbling {
        #[command(flatten)]
        sel: Select,
    },
    /// Evolutionary stability checks.
    Evo {
        #[command(flatten)]
        sel: Select,
        #[arg(long, value_enum)]
        check: EvoCheck,
        /// Number of messages when the strategy is built by name.
        #[arg(long)]
        messages: Option<usize>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        m1: usize,
        #[arg(long, default_value_t = 1)]
        m2: usize,
    },
    /// Reproduce a worked example.
    Repro {
        #[arg(value_enum)]
        what: Repro,
        #[command(flatten)]
        sel: Select,
    },
    /// Payoffs of a profile: pairwise, interim or ex ante.
    Payoff {
        #[command(flatten)]
        sel: Select,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        v: Option<f64>,
        /// Emit the outcome class (L, R, C or M) on a grid of type pairs.
        #[arg(long)]
        outcome_map: bool,
        #[arg(long, default_value_t = 21)]
        map_grid: usize,
    },
}

/// Inputs shared by the subcommands after scenario resolution.
struct Ctx {
    dist: TypeDistribution,
    opp_dist: TypeDistribution,
    profile: Option<(Strategy, Strategy)>,
    name: String,
    grid: usize,
    tol: f64,
    epsilon: f64,
    seed: u64,
}

impl Ctx {
    fn strategy(&self) -> Result<&Strategy> {
        self.profile.as_ref().map(|p| &p.0).ok_or_else(|| anyhow!(ModelError::Config("no strategy given; use --strategy or a scenario".into())))
    }

    fn pair(&self) -> Result<(&Strategy, &Strategy)> {
        self.profile.as_ref().map(|p| (&p.0, &p.1)).ok_or_else(|| anyhow!(ModelError::Config("no strategy given; use --strategy or a scenario".into())))
    }

    fn symmetric(&self) -> bool {
        self.profile.as_ref().map_or(true, |(a, b)| a == b) && self.dist == self.opp_dist
    }
}

fn resolve(sel: &Select, seed: u64, default_strategy: Option<&str>) -> Result<Ctx> {
    if let Some(path) = &sel.scenario {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let sc = Scenario::from_json(&text)?;
        let (game, profile) = sc.resolve()?;
        return Ok(Ctx {
            dist: game.seat(0).clone(),
            opp_dist: game.seat(1).clone(),
            profile,
            name: path.display().to_string(),
            grid: sc.params.grid.unwrap_or(sel.grid),
            tol: sc.params.tol.unwrap_or(sel.tol),
            epsilon: sc.params.epsilon.unwrap_or(sel.epsilon),
            seed: sc.params.seed.unwrap_or(seed),
        });
    }
    let dist = named_distribution(&sel.dist, sel.epsilon)?;
    let name = sel.strategy.as_deref().or(default_strategy);
    let profile = match name {
        None => None,
        Some(n) => {
            let mut spec = json!({ "kind": "builtin", "name": n.to_lowercase(), "epsilon": sel.epsilon });
            if let Some(k) = sel.k {
                spec["k"] = json!(k);
            }
            if let Some(n) = sel.n {
                spec["n"] = json!(n);
            }
            if let Some(c) = &sel.cutoff {
                spec["cutoff"] = json!(c);
            }
            if let Some(l) = &sel.labels {
                spec["labels"] = json!(l);
            }
            let spec: StrategySpec =
                serde_json::from_value(spec).map_err(|e| ModelError::Config(format!("strategy `{n}`: {e}")))?;
            let s = spec.build(&dist)?;
            Some((s.clone(), s))
        }
    };
    Ok(Ctx {
        opp_dist: dist.clone(),
        dist,
        profile,
        name: name.unwrap_or("").to_string(),
        grid: sel.grid,
        tol: sel.tol,
        epsilon: sel.epsilon,
        seed,
    })
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn verify(ctx: &Ctx) -> Result<Value> {
    let (s, t) = ctx.pair()?;
    if ctx.symmetric() {
        let r = equil::verify_equilibrium(s, &ctx.dist, ctx.grid, ctx.tol);
        return Ok(object(vec![("strategy", json!(ctx.name)), ("report", to_value(&r))]));
    }
    let (a, b) = equil::verify_pair(s, &ctx.dist, t, &ctx.opp_dist, ctx.grid, ctx.tol)?;
    Ok(object(vec![
        ("strategy", json!(ctx.name)),
        ("is_equilibrium", json!(a.is_equilibrium && b.is_equilibrium)),
        ("first", to_value(&a)),
        ("second", to_value(&b)),
    ]))
}

fn md_report(tol: f64) -> Value {
    let game = finite::FiniteGame::counterexample();
    let s = finite::counterexample_strategy();
    let rows = multidim::multidim_spot_check(&multidim::unambiguous_fixture(), tol);
    object(vec![
        ("counterexample_properties", to_value(&multidim::finite_properties(&game, &s))),
        ("counterexample_verdict", to_value(&finite::finite_cp_verdict(&game, &s, tol))),
        ("rows", to_value(&rows)),
    ])
}

fn props_cmd(ctx: &Ctx, family: FamilyArg) -> Result<Value> {
    if family == FamilyArg::Md {
        return Ok(md_report(1e-12));
    }
    let s = ctx.strategy()?;
    let p = props::properties(s, &ctx.dist);
    Ok(object(vec![
        ("strategy", json!(ctx.name)),
        ("mpc", json!(p.mpc)),
        ("coordinated", json!(p.coordinated)),
        ("binary", json!(p.binary)),
        ("alpha", json!(p.left_tendency)),
        ("report", to_value(&p)),
    ]))
}

fn cp_cmd(ctx: &Ctx, mode: CpMode, family: FamilyArg) -> Result<Value> {
    if family == FamilyArg::Md {
        return Ok(md_report(1e-12));
    }
    if mode == CpMode::Weak {
        bail!(ModelError::Config("weak communication-proofness is decided for finite-type games only; use --family md".into()));
    }
    let s = ctx.strategy()?;
    let cfg = CpConfig { tol: ctx.tol, ..CpConfig::default() };
    let equilibrium = equil::verify_equilibrium(s, &ctx.dist, ctx.grid, ctx.tol);
    let v = cp::is_strongly_cp(s, &ctx.dist, &cfg);
    Ok(object(vec![
        ("strategy", json!(ctx.name)),
        ("equilibrium", json!(equilibrium.is_equilibrium)),
        ("strongly_cp", json!(equilibrium.is_equilibrium && v.strongly_cp)),
        ("verdict", to_value(&v)),
    ]))
}

fn enumerate_cmd(alpha: Option<f64>, beta: Option<f64>, steps: usize) -> Result<Value> {
    match (alpha, beta) {
        (Some(a), Some(b)) => {
            let eqs = induced::enumerate_induced_equilibria(&induced::InducedGame::counterexample(a, b)?);
            let rows: Vec<Value> = eqs
                .iter()
                .map(|e| {
                    let (r, c) = e.pattern();
                    json!({ "row": r, "col": c, "row_payoffs": e.row_payoffs, "col_payoffs": e.col_payoffs, "degenerate": e.degenerate })
                })
                .collect();
            Ok(object(vec![("alpha", json!(a)), ("beta", json!(b)), ("rows", Value::Array(rows))]))
        }
        (None, None) => {
            if steps == 0 {
                bail!(ModelError::Config("--steps must be positive".into()));
            }
            // Pattern -> (points, alpha range, beta range).
            let mut seen: Vec<((String, String), usize, [f64; 4])> = Vec::new();
            for i in 0..=steps {
                for j in 0..=steps {
                    let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
                    for e in induced::enumerate_induced_equilibria(&induced::InducedGame::counterexample(a, b)?) {
                        if e.degenerate {
                            continue;
                        }
                        let p = e.pattern();
                        match seen.iter_mut().find(|x| x.0 == p) {
                            Some(x) => {
                                x.1 += 1;
                                x.2 = [x.2[0].min(a), x.2[1].max(a), x.2[2].min(b), x.2[3].max(b)];
                            }
                            None => seen.push((p, 1, [a, a, b, b])),
                        }
                    }
                }
            }
            let rows: Vec<Value> = seen
                .into_iter()
                .map(|((r, c), n, g)| {
                    json!({ "row": r, "col": c, "points": n, "alpha_min": g[0], "alpha_max": g[1], "beta_min": g[2], "beta_max": g[3] })
                })
                .collect();
            Ok(object(vec![("steps", json!(steps)), ("rows", Value::Array(rows))]))
        }
        _ => bail!(ModelError::Config("give both --alpha and --beta, or neither".into())),
    }
}

fn babbling_cmd(ctx: &Ctx) -> Result<Value> {
    let r = equil::babbling_fixed_points(&ctx.dist);
    let dom = efficiency::no_talk_dominance_check(&ctx.dist, ctx.grid, ctx.tol)?;
    Ok(object(vec![("fixed_points", to_value(&r)), ("dominated", to_value(&dom))]))
}

fn evo_cmd(sel: &Select, seed: u64, check: EvoCheck, messages: Option<usize>, samples: usize, m1: usize, m2: usize) -> Result<Value> {
    let mut sel = sel.clone();
    if let Some(m) = messages {
        if m < 2 {
            bail!(ModelError::Config("--messages must be at least 2".into()));
        }
        let mut l = vec!["m_L".to_string(), "m_R".to_string()];
        l.extend((2..m).map(|i| format!("m_{i}")));
        sel.labels = Some(l);
    }
    let ctx = resolve(&sel, seed, Some("sigma_l"))?;
    let s = ctx.strategy()?;
    let cfg = EvoConfig { tol: ctx.tol, ..EvoConfig::default() };
    let r = match check {
        EvoCheck::Nss => evo::nss_check(s, &ctx.dist, &cfg)?,
        EvoCheck::Ess => evo::ess_check(s, &ctx.dist, &cfg)?,
        EvoCheck::Dominance => {
            let pairs = evo::sample_message_pairs(s.len(), samples, ctx.seed);
            evo::message_dominance_check(s, &ctx.dist, &pairs, ctx.grid, &cfg)?
        }
        EvoCheck::Nis => evo::nis_check(s, &ctx.dist, m1, m2, &cfg)?,
    };
    Ok(object(vec![("strategy", json!(ctx.name)), ("seed", json!(ctx.seed)), ("report", to_value(&r))]))
}

fn exante(s: &Strategy, d: &TypeDistribution) -> Result<f64> {
    Ok(payoff::exante_payoff(s, s, d, d)?)
}

fn repro_example1(eps: f64) -> Result<Value> {
    let d = canon::example1_distribution(eps)?;
    let mis = canon::example1_miscoordination(eps)?;
    let rep = equil::verify_equilibrium(&mis, &d, equil::DEFAULT_GRID, equil::DEFAULT_TOL);
    let mut rows = vec![json!({ "strategy": "babbling(1/2)", "payoff": exante(&canon::make_babbling(coordcom::Cutoff::at(0.5)), &d)?, "equilibrium": true })];
    for (name, s) in [("sigma_L", canon::make_sigma_l()), ("sigma_R", canon::make_sigma_r()), ("sigma_alpha(1/2)", canon::make_sigma_alpha(1, 2)?)] {
        rows.push(json!({ "strategy": name, "payoff": exante(&s, &d)?, "equilibrium": equil::verify_equilibrium(&s, &d, equil::DEFAULT_GRID, equil::DEFAULT_TOL).is_equilibrium }));
    }
    rows.push(json!({ "strategy": "miscoordination", "payoff": exante(&mis, &d)?, "equilibrium": rep.is_equilibrium }));
    Ok(object(vec![("epsilon", json!(eps)), ("rows", Value::Array(rows)), ("miscoordination_max_regret", json!(rep.max_regret))]))
}

fn repro_counterexample(tol: f64) -> Result<Value> {
    let game = finite::FiniteGame::counterexample();
    let g0 = game.as_two_sided();
    let s = finite::counterexample_strategy();
    let v = finite::profile_values(&g0, &s);
    let post = enumerate_cmd(Some(1.0 / 9.0), Some(1.0 / 9.0), 0)?;
    let grid = enumerate_cmd(None, None, 20)?;
    let verdict = finite::finite_cp_verdict(&game, &s, tol);
    Ok(object(vec![
        ("types", json!(game.names)),
        ("interim_payoffs", json!(v.row_follow)),
        ("misreport_payoff", json!(v.row_message_best[1][1])),
        ("posterior_equilibria", post["rows"].clone()),
        ("pattern_ranges", grid["rows"].clone()),
        ("strongly_cp", json!(verdict.strongly_cp)),
        ("weakly_cp", json!(verdict.weakly_cp)),
        ("witness", to_value(&verdict.witness)),
    ]))
}

fn repro_sigma_ex(ctx: &Ctx) -> Result<Value> {
    let x = two_round::solve_sigma_ex_threshold(&ctx.dist)?;
    let s = two_round::make_sigma_ex(x)?;
    let rep = equil::verify_two_round(&s, &ctx.dist, ctx.grid, ctx.tol);
    let p = props::two_round_properties(&s, &ctx.dist);
    Ok(object(vec![
        ("threshold", json!(x)),
        ("equilibrium", json!(rep.is_equilibrium)),
        ("max_regret", json!(rep.max_regret)),
        ("payoff", json!(two_round::exante(&s, &ctx.dist))),
        ("sigma_L_payoff", json!(exante(&canon::make_sigma_l(), &ctx.dist)?)),
        ("mpc", json!(p.mpc)),
        ("coordinated", json!(p.coordinated)),
        ("binary", json!(p.binary)),
        ("strongly_cp", json!(cp::find_cp_trump_two_round(&s, &ctx.dist, &CpConfig::default()).is_none())),
    ]))
}

fn repro_extreme(ctx: &Ctx) -> Result<Value> {
    let mut rows = Vec::new();
    for name in ["extreme-a", "extreme-b", "extreme-c"] {
        let d = named_distribution(name, 0.0)?;
        let a = canon::extreme_left_tendency(&d)?;
        let gap = extreme::half_type_values(&d, a)?.gap();
        let eq = equil::verify_equilibrium(&extreme::extreme_strategy_with(a)?, &d, ctx.grid, ctx.tol);
        let gaps: Vec<f64> = [a - 0.05, a + 0.05].iter().map(|&b| extreme::half_type_values(&d, b).map(|h| h.gap())).collect::<coordcom::Result<_>>()?;
        let sl = equil::verify_equilibrium(&canon::with_dominant_actions(&canon::make_sigma_l()), &d, ctx.grid, ctx.tol);
        rows.push(json!({
            "distribution": name,
            "alpha": a,
            "gap": gap,
            "equilibrium": eq.is_equilibrium,
            "gap_below": gaps[0],
            "gap_above": gaps[1],
            "sigma_L_equilibrium": sl.is_equilibrium,
            "sigma_L_worst_type": sl.worst.first().map(|w| w.u),
        }));
    }
    Ok(object(vec![("rows", Value::Array(rows))]))
}

fn repro_efficiency(ctx: &Ctx) -> Result<Value> {
    let d = &ctx.dist;
    let pl = exante(&canon::make_sigma_l(), d)?;
    let pr = exante(&canon::make_sigma_r(), d)?;
    let mut rows = Vec::new();
    for k in 0..=4 {
        let s = canon::make_sigma_alpha(k, 4)?;
        let a = k as f64 / 4.0;
        let p = exante(&s, d)?;
        let pareto = efficiency::interim_pareto_check(&s, d, 4, ctx.tol)?;
        rows.push(json!({ "alpha": a, "payoff": p, "linear": a * pl + (1.0 - a) * pr, "pareto_optimal": pareto.pareto_optimal }));
    }
    let dom = efficiency::no_talk_dominance_check(d, ctx.grid, ctx.tol)?;
    Ok(object(vec![("rows", Value::Array(rows)), ("no_talk", to_value(&dom))]))
}

fn repro_nplayer(ctx: &Ctx) -> Result<Value> {
    let mut rows = Vec::new();
    for side in [vec![true, false, false], vec![true, true, false], vec![true, true, false, false]] {
        let post = nplayer::revealing_posteriors(&ctx.dist, &side)?;
        for x in nplayer::interior_cutoff_profiles(&post, &side) {
            let c = nplayer::coin_toss_dominance(&post, &x, ctx.grid, ctx.tol);
            rows.push(json!({ "left_side": side, "cutoffs": x, "coin_toss_weakly_better": c.weakly_better, "strictly_somewhere": c.strictly_somewhere, "min_margin": c.min_margin }));
        }
    }
    Ok(object(vec![("rows", Value::Array(rows))]))
}

fn repro(what: Repro, sel: &Select, seed: u64) -> Result<Value> {
    let ctx = resolve(sel, seed, None)?;
    match what {
        Repro::Example1 => repro_example1(ctx.epsilon),
        Repro::Counterexample => repro_counterexample(1e-12),
        Repro::SigmaEx => repro_sigma_ex(&ctx),
        Repro::Extreme => repro_extreme(&ctx),
        Repro::Efficiency => repro_efficiency(&ctx),
        Repro::Multiaction => {
            let r = multiaction::different_message_search(ctx.seed, 200, 3, 5, 20, ctx.tol)?;
            Ok(object(vec![("seed", json!(ctx.seed)), ("report", to_value(&r))]))
        }
        Repro::Nplayer => repro_nplayer(&ctx),
    }
}

/// Outcome class of a type pair: L or R when that coordination is sure,
/// M when miscoordination has positive probability, C otherwise.
fn outcome_class(s: &Strategy, t: &Strategy, u: f64, v: f64, tol: f64) -> &'static str {
    let (mut ll, mut rr) = (0.0, 0.0);
    for (m, pu) in s.mu().row(u).iter().enumerate() {
        for (mp, pv) in t.mu().row(v).iter().enumerate() {
            let a = s.xi().get(m, mp).left_prob(u);
            let b = t.xi().get(mp, m).left_prob(v);
            ll += pu * pv * a * b;
            rr += pu * pv * (1.0 - a) * (1.0 - b);
        }
    }
    if ll + rr < 1.0 - tol {
        "M"
    } else if ll > 1.0 - tol {
        "L"
    } else if rr > 1.0 - tol {
        "R"
    } else {
        "C"
    }
}

fn payoff_cmd(ctx: &Ctx, u: Option<f64>, v: Option<f64>, outcome_map: bool, map_grid: usize) -> Result<Value> {
    let (s, t) = ctx.pair()?;
    if outcome_map {
        if map_grid < 2 {
            bail!(ModelError::Config("--map-grid must be at least 2".into()));
        }
        let (lo, hi) = (ctx.dist.lower(), ctx.dist.upper());
        let pts: Vec<f64> = (0..map_grid).map(|i| lo + (hi - lo) * i as f64 / (map_grid - 1) as f64).collect();
        let mut rows = Vec::new();
        for &x in &pts {
            for &y in &pts {
                rows.push(json!({ "u": x, "v": y, "outcome": outcome_class(s, t, x, y, ctx.tol), "payoff": payoff::pairwise_payoff(s, t, x, y)? }));
            }
        }
        return Ok(object(vec![("strategy", json!(ctx.name)), ("rows", Value::Array(rows))]));
    }
    let value = match (u, v) {
        (Some(u), Some(v)) => json!({ "u": u, "v": v, "payoff": payoff::pairwise_payoff(s, t, u, v)? }),
        (Some(u), None) => json!({ "u": u, "payoff": payoff::interim_payoff(s, t, u, &ctx.opp_dist)? }),
        (None, None) => json!({ "payoff": payoff::exante_payoff(s, t, &ctx.dist, &ctx.opp_dist)? }),
        (None, Some(_)) => bail!(ModelError::Config("--v needs --u".into())),
    };
    Ok(object(vec![("strategy", json!(ctx.name)), ("result", value)]))
}

fn run(cli: &Cli) -> Result<Value> {
    let seed = cli.seed;
    match &cli.command {
        Command::Verify { sel } => verify(&resolve(sel, seed, None)?),
        Command::Props { sel, family } => {
            let default = (*family == FamilyArg::Md).then_some("sigma_l");
            props_cmd(&resolve(sel, seed, default)?, *family)
        }
        Command::Cp { sel, mode, family } => {
            let default = (*family == FamilyArg::Md).then_some("sigma_l");
            cp_cmd(&resolve(sel, seed, default)?, *mode, *family)
        }
        Command::Enumerate { alpha, beta, steps } => enumerate_cmd(*alpha, *beta, *steps),
        Command::Babbling { sel } => babbling_cmd(&resolve(sel, seed, None)?),
        Command::Evo { sel, check, messages, samples, m1, m2 } => evo_cmd(sel, seed, *check, *messages, *samples, *m1, *m2),
        Command::Repro { what, sel } => repro(*what, sel, seed),
        Command::Payoff { sel, u, v, outcome_map, map_grid } => {
            payoff_cmd(&resolve(sel, seed, None)?, *u, *v, *outcome_map, *map_grid)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<ModelError>()) {
        Some(ModelError::ZeroProbabilityMessage(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|report| emit(report, cli.format, cli.output.as_deref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
