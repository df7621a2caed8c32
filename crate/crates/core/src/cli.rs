//! Command-line surface: `train`, `eval`, `replay`, `plate-test`,
//! `trace-forces`. Exit codes: 0 success, 1 runtime failure, 2 usage.
//! The environment variable `TERRA_SEED` overrides the config seeds; an
//! explicit `--seed` flag overrides both.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::biped::build_model;
use crate::config::{load_config, parse_config, write_config, Config};
use crate::ddpg::{evaluate, train, Agent, DdpgError};
use crate::env::{Action, BipedEnv, Observation};
use crate::nn::{load_mlp, save_mlp, Activation};
use crate::rng::Rng;
use crate::soil::{step_contact, BodyTag, ContactSample, SoilParams, TerrainGrid};
use crate::trace::{read_trace, write_trace, EpisodeTrace, TraceRow};

const USAGE: &str = "\
usage: terrawalk <command> [flags]

commands:
  train        --config F --episodes N --seed S --out DIR
  eval         --checkpoint DIR --episodes N [--seed S]
  plate-test   --weight W --side L [--config F]
  trace-forces --checkpoint DIR --out FILE [--seed S] [--grid-out FILE]
  replay       --trace FILE
";

/// Entry point shared by the binary and the test suites.
pub fn run_command(argv: &[String]) -> i32 {
    match dispatch(argv) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            2
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

/// CLI-level failure: usage errors exit 2, runtime errors exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<DdpgError> for CliError {
    fn from(e: DdpgError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn dispatch(argv: &[String]) -> Result<(), CliError> {
    let Some(cmd) = argv.first() else {
        return Err(CliError::Usage("missing subcommand".into()));
    };
    let flags = parse_flags(&argv[1..])?;
    match cmd.as_str() {
        "train" => cmd_train(&flags),
        "eval" => cmd_eval(&flags),
        "plate-test" => cmd_plate_test(&flags),
        "trace-forces" => cmd_trace_forces(&flags),
        "replay" => cmd_replay(&flags),
        other => Err(CliError::Usage(format!("unknown subcommand {other:?}"))),
    }
}

fn parse_flags(args: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    let mut flags = BTreeMap::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| CliError::Usage(format!("expected --flag, got {arg:?}")))?;
        let value = it
            .next()
            .ok_or_else(|| CliError::Usage(format!("flag --{key} needs a value")))?;
        flags.insert(key.to_string(), value.clone());
    }
    Ok(flags)
}

fn flag_num<T: std::str::FromStr>(
    flags: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match flags.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("--{key}: cannot parse {v:?}"))),
    }
}

/// Config from `--config`, with seed overrides applied: TERRA_SEED beats
/// the file, an explicit `--seed` beats both.
fn load_run_config(flags: &BTreeMap<String, String>) -> Result<Config, CliError> {
    let mut cfg = match flags.get("config") {
        Some(path) => load_config(Path::new(path)).map_err(|e| CliError::Runtime(e.to_string()))?,
        None => Config::default(),
    };
    if let Ok(text) = std::env::var("TERRA_SEED") {
        let seed = text
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("TERRA_SEED: cannot parse {text:?}")))?;
        cfg.env.seed = seed;
        cfg.ddpg.seed = seed;
    }
    if let Some(seed) = flag_num::<u64>(flags, "seed")? {
        cfg.env.seed = seed;
        cfg.ddpg.seed = seed;
    }
    Ok(cfg)
}

fn build_env(cfg: &Config) -> Result<BipedEnv, CliError> {
    let model = build_model(&cfg.robot).map_err(|e| CliError::Runtime(e.to_string()))?;
    BipedEnv::new(model, cfg.soil.clone(), cfg.env.clone(), cfg.reward.clone())
        .map_err(|e| CliError::Runtime(e.to_string()))
}

// ---------------------------------------------------------------------------
// checkpoints

const NET_FILES: [(&str, &str); 4] = [
    ("actor", "actor.txt"),
    ("critic", "critic.txt"),
    ("target_actor", "target_actor.txt"),
    ("target_critic", "target_critic.txt"),
];

/// Write a checkpoint directory: one text file per network plus a manifest
/// holding the config and the agent's rng state.
pub fn save_checkpoint(dir: &Path, agent: &Agent, cfg: &Config) -> Result<(), DdpgError> {
    std::fs::create_dir_all(dir).map_err(crate::nn::NnError::Io)?;
    let nets = [&agent.actor, &agent.critic, &agent.target_actor, &agent.target_critic];
    for ((role, file), net) in NET_FILES.iter().zip(nets) {
        save_mlp(dir.join(file), role, net)?;
    }
    let s = agent.rng_state();
    let manifest = format!(
        "TWKM1\nrng {:016x} {:016x} {:016x} {:016x}\n\n{}",
        s[0],
        s[1],
        s[2],
        s[3],
        write_config(cfg)
    );
    std::fs::write(dir.join("manifest.txt"), manifest).map_err(crate::nn::NnError::Io)?;
    Ok(())
}

/// Rebuild the agent and config from a checkpoint directory. Optimizer
/// moments are not persisted; evaluation and tracing are unaffected.
pub fn load_checkpoint(dir: &Path) -> Result<(Config, Agent), DdpgError> {
    let manifest = std::fs::read_to_string(dir.join("manifest.txt"))
        .map_err(crate::nn::NnError::Io)?;
    let mut lines = manifest.lines();
    match lines.next() {
        Some("TWKM1") => {}
        other => {
            return Err(DdpgError::Parameter(format!("bad manifest magic {other:?}")));
        }
    }
    let rng_line = lines
        .next()
        .ok_or_else(|| DdpgError::Parameter("manifest missing rng line".into()))?;
    let words: Vec<&str> = rng_line.split_whitespace().collect();
    if words.len() != 5 || words[0] != "rng" {
        return Err(DdpgError::Parameter(format!("bad rng line {rng_line:?}")));
    }
    let mut state = [0u64; 4];
    for (dst, w) in state.iter_mut().zip(&words[1..]) {
        *dst = u64::from_str_radix(w, 16)
            .map_err(|_| DdpgError::Parameter(format!("bad rng word {w:?}")))?;
    }
    let config_text: String = lines.collect::<Vec<_>>().join("\n");
    let cfg = parse_config(&config_text)
        .map_err(|e| DdpgError::Parameter(format!("manifest config: {e}")))?;

    let mut agent = Agent::new(Observation::DIM, 6, cfg.ddpg.clone())?;
    let roles = [Activation::Tanh, Activation::Identity, Activation::Tanh, Activation::Identity];
    let mut nets = Vec::new();
    for ((role, file), act) in NET_FILES.iter().zip(roles) {
        let (found_role, net) = load_mlp(dir.join(file), act)?;
        if found_role != *role {
            return Err(DdpgError::Parameter(format!(
                "{file}: role {found_role:?}, expected {role:?}"
            )));
        }
        nets.push(net);
    }
    agent.target_critic = nets.pop().unwrap();
    agent.target_actor = nets.pop().unwrap();
    agent.critic = nets.pop().unwrap();
    agent.actor = nets.pop().unwrap();
    agent.set_rng_state(state);
    Ok((cfg, agent))
}

// ---------------------------------------------------------------------------
// train / eval

fn cmd_train(flags: &BTreeMap<String, String>) -> Result<(), CliError> {
    let cfg = load_run_config(flags)?;
    let episodes = flag_num::<usize>(flags, "episodes")?.unwrap_or(100);
    let out_dir = PathBuf::from(flags.get("out").cloned().unwrap_or_else(|| cfg.output_dir.clone()));
    std::fs::create_dir_all(&out_dir)?;

    let mut env = build_env(&cfg)?;
    let mut agent = Agent::new(Observation::DIM, 6, cfg.ddpg.clone())?;

    let result = train(&mut agent, &mut env, episodes);
    let metrics = match result {
        Ok(m) => m,
        Err(e) => {
            // Preserve the state that produced the failure for inspection.
            let dump = out_dir.join("checkpoint-aborted");
            save_checkpoint(&dump, &agent, &cfg)?;
            return Err(CliError::Runtime(format!(
                "training aborted ({e}); state dumped to {}",
                dump.display()
            )));
        }
    };

    std::fs::write(out_dir.join("metrics.csv"), metrics.to_csv())?;
    save_checkpoint(&out_dir.join("checkpoint"), &agent, &cfg)?;
    println!(
        "trained {} episodes; mean return over last 10: {:.4}",
        episodes,
        metrics.mean_return_of_last(10)
    );
    println!("metrics: {}", out_dir.join("metrics.csv").display());
    println!("checkpoint: {}", out_dir.join("checkpoint").display());
    Ok(())
}

fn cmd_eval(flags: &BTreeMap<String, String>) -> Result<(), CliError> {
    let dir = flags
        .get("checkpoint")
        .ok_or_else(|| CliError::Usage("eval needs --checkpoint".into()))?;
    let episodes = flag_num::<usize>(flags, "episodes")?.unwrap_or(1);
    let (cfg, mut agent) = load_checkpoint(Path::new(dir))?;
    let seed = flag_num::<u64>(flags, "seed")?.unwrap_or(cfg.env.seed);
    let mut env = build_env(&cfg)?;
    let returns = evaluate(&mut agent, &mut env, episodes, seed)?;
    let mean = returns.iter().sum::<f64>() / returns.len().max(1) as f64;
    println!("episodes {episodes} mean_return {mean:?}");
    Ok(())
}

// ---------------------------------------------------------------------------
// plate-test

/// Result of pressing a rigid square plate into fresh soil.
#[derive(Debug, Clone, Copy)]
pub struct PlateTestResult {
    pub analytic_sinkage: f64,
    pub simulated_sinkage: f64,
    pub rel_err: f64,
    pub settled_steps: usize,
}

/// Static indentation oracle: a rigid plate of side `side` loaded with
/// `weight` settles on fresh soil until the Bekker pressure carries the
/// load; the analytic inversion gives the expected depth directly.
pub fn plate_test(soil: &SoilParams, weight: f64, side: f64) -> Result<PlateTestResult, String> {
    if !(weight > 0.0 && side > 0.0) {
        return Err(format!("weight and side must be > 0, got {weight}, {side}"));
    }
    soil.validate().map_err(|e| e.to_string())?;

    let spacing = 0.01;
    let mut grid = TerrainGrid::new(side * 4.0 + 1.0, side * 4.0 + 1.0, spacing, 0.0)
        .map_err(|e| e.to_string())?;

    // One sample per covered cell, placed exactly on node positions so the
    // nearest-node map never sees a boundary tie and the covered area is
    // exactly n^2 cells.
    let n = (side / spacing).round().max(1.0) as i64;
    let mut points = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = (i - n / 2) as f64 * spacing;
            let y = (j - n / 2) as f64 * spacing;
            points.push((x, y));
        }
    }
    let area = (n * n) as f64 * spacing * spacing;

    let g = 9.81;
    let mass = weight / g;
    let dt = 1e-3;
    let mut z = 0.0f64;
    let mut vz = 0.0f64;
    let mut steps = 0usize;
    let mut quiet = 0usize;
    for k in 0..20_000 {
        let samples: Vec<ContactSample> = points
            .iter()
            .map(|&(x, y)| ContactSample {
                world_pos: [x, y, z],
                velocity: [0.0, 0.0, vz],
                owner: BodyTag::Other,
            })
            .collect();
        let forces = step_contact(&mut grid, soil, &samples, dt).map_err(|e| e.to_string())?;
        let fz: f64 = forces.iter().map(|f| f[2]).sum();
        vz += dt * (fz / mass - g);
        z += dt * vz;
        steps = k + 1;
        if vz.abs() < 1e-7 && (fz - weight).abs() < 1e-6 * weight {
            quiet += 1;
            if quiet > 200 {
                break;
            }
        } else {
            quiet = 0;
        }
    }

    // Analytic inversion of sigma = (k_c / b + k_phi) y^n at the plate
    // pressure, with the square footprint's b = 2A/L = side/2.
    let b = side / 2.0;
    let sigma = weight / area;
    let analytic = (sigma / (soil.k_c / b + soil.k_phi)).powf(1.0 / soil.n);
    let simulated = -z;
    let rel_err = (simulated - analytic).abs() / analytic;
    Ok(PlateTestResult {
        analytic_sinkage: analytic,
        simulated_sinkage: simulated,
        rel_err,
        settled_steps: steps,
    })
}

fn cmd_plate_test(flags: &BTreeMap<String, String>) -> Result<(), CliError> {
    let cfg = load_run_config(flags)?;
    let weight = flag_num::<f64>(flags, "weight")?.unwrap_or(10.0);
    let side = flag_num::<f64>(flags, "side")?.unwrap_or(0.1);
    let r = plate_test(&cfg.soil, weight, side).map_err(CliError::Runtime)?;
    println!(
        "analytic sinkage {:.4} mm, simulated {:.4} mm, rel err {:.3e} ({} steps)",
        r.analytic_sinkage * 1e3,
        r.simulated_sinkage * 1e3,
        r.rel_err,
        r.settled_steps
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// trace-forces / replay

/// One greedy episode through `env`, recording per-step forces, CoM and
/// reward.
pub fn trace_episode(
    env: &mut BipedEnv,
    agent: &mut Agent,
    seed: u64,
) -> Result<EpisodeTrace, CliError> {
    let control_dt = env.config().control_dt;
    let mut obs = BipedEnv::reset(env, seed);
    let mut trace = EpisodeTrace::default();
    loop {
        let a = agent.act(&obs.to_vec(), false)?;
        let mut u = [0.0; 6];
        u.copy_from_slice(&a);
        let (next, reward, done, info) =
            BipedEnv::step(env, &Action { u }).map_err(|e| CliError::Runtime(e.to_string()))?;
        trace.push(TraceRow {
            t: env.steps_taken() as f64 * control_dt,
            fz_left: info.fz_left,
            fz_right: info.fz_right,
            fx_left: info.fx_left,
            fx_right: info.fx_right,
            com_x: info.com_x,
            com_z: info.com_z,
            reward,
        });
        obs = next;
        if done {
            break;
        }
    }
    Ok(trace)
}

fn cmd_trace_forces(flags: &BTreeMap<String, String>) -> Result<(), CliError> {
    let dir = flags
        .get("checkpoint")
        .ok_or_else(|| CliError::Usage("trace-forces needs --checkpoint".into()))?;
    let out = flags.get("out").cloned().unwrap_or_else(|| "trace.csv".into());
    let (cfg, mut agent) = load_checkpoint(Path::new(dir))?;
    let seed = flag_num::<u64>(flags, "seed")?.unwrap_or(cfg.env.seed);

    let mut env = build_env(&cfg)?;
    let trace = trace_episode(&mut env, &mut agent, seed)?;
    write_trace(Path::new(&out), &trace).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("wrote {} rows to {out}", trace.len());
    if let Some(grid_out) = flags.get("grid-out") {
        let mut grid_csv = Vec::new();
        env.grid().dump_csv(&mut grid_csv)?;
        std::fs::write(grid_out, grid_csv)?;
        println!("wrote terrain state to {grid_out}");
    }
    Ok(())
}

fn cmd_replay(flags: &BTreeMap<String, String>) -> Result<(), CliError> {
    let path = flags.get("trace").ok_or_else(|| CliError::Usage("replay needs --trace".into()))?;
    let trace = read_trace(Path::new(path)).map_err(|e| CliError::Runtime(e.to_string()))?;
    let n = trace.len();
    if n == 0 {
        println!("rows 0");
        return Ok(());
    }
    let dur = trace.rows.last().unwrap().t - trace.rows[0].t;
    let mean_fz =
        trace.rows.iter().map(|r| r.fz_left + r.fz_right).sum::<f64>() / n as f64;
    let total_reward: f64 = trace.rows.iter().map(|r| r.reward).sum();
    let forward = trace.rows.last().unwrap().com_x - trace.rows[0].com_x;
    println!(
        "rows {n} duration {dur:.3} s mean_fz {mean_fz:.3} N total_reward {total_reward:.4} forward {forward:.4} m"
    );
    Ok(())
}

// ---------------------------------------------------------------------------

/// Standing support harness: hold the nominal pose with a physics-rate PD
/// and average the total vertical contact force over `duration` seconds.
/// Internal torques cannot change the momentum balance, so the mean must
/// match the robot's weight once settled.
pub fn standing_support(cfg: &Config, duration: f64) -> Result<(f64, f64), CliError> {
    let model = build_model(&cfg.robot).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut grid = TerrainGrid::new(4.0, 1.0, 0.01, 0.0).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut state = crate::biped::RobotState::standing(&model, 0.0);
    let dt = 1e-3;
    let steps = (duration / dt).round() as usize;
    let n_len = ((model.foot_length / 0.01).round() as usize).max(2);
    let n_rows = ((model.foot_width / 0.01).round() as usize).max(1);
    // Hold hips and knees against gravity buckling; ankles stay passive
    // (the foot's inertia is tiny, so even physics-rate damping there
    // would need to fight the stiff soil rocking mode).
    let kp = 60.0;
    let kd = 3.0;

    let mut force_sum = 0.0;
    for _ in 0..steps {
        let center = crate::biped::foot_contact_samples(&model, &state, n_len);
        let mut samples = Vec::with_capacity(center.len() * n_rows);
        for s in &center {
            for k in 0..n_rows {
                let mut dup = *s;
                dup.world_pos[1] += (k as f64 - (n_rows as f64 - 1.0) / 2.0) * 0.01;
                samples.push(dup);
            }
        }
        let forces =
            step_contact(&mut grid, &cfg.soil, &samples, dt).map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut external = Vec::new();
        for (s, f) in samples.iter().zip(forces.iter()) {
            force_sum += f[2];
            if f[0] != 0.0 || f[2] != 0.0 {
                external.push(crate::biped::ExternalForce {
                    body: if s.owner == BodyTag::LeftFoot {
                        crate::biped::LinkId::FootL
                    } else {
                        crate::biped::LinkId::FootR
                    },
                    point: [s.world_pos[0], s.world_pos[2]],
                    force: [f[0], f[2]],
                });
            }
        }
        let mut torques = [0.0; 6];
        for j in [0usize, 1, 3, 4] {
            torques[j] = -kp * state.q[3 + j] - kd * state.qd[3 + j];
        }
        state = crate::biped::dynamics_step(&model, &state, &torques, &external, dt)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        if crate::biped::detect_fall(&model, &state) {
            return Err(CliError::Runtime("standing robot fell".into()));
        }
    }
    let mean_force = force_sum / steps as f64;
    let weight = crate::biped::total_mass(&model) * 9.81;
    Ok((mean_force, weight))
}

/// Zero-torque baseline displacement measured by the same harness that
/// scores training episodes.
pub fn zero_torque_baseline(cfg: &Config, episodes: usize) -> Result<f64, CliError> {
    let mut env = build_env(cfg)?;
    let mut total = 0.0;
    for ep in 0..episodes {
        let seed = Rng::new(cfg.env.seed).derive(ep as u64).next_u64();
        BipedEnv::reset(&mut env, seed);
        loop {
            let (_, _, done, _) =
                BipedEnv::step(&mut env, &Action { u: [0.0; 6] }).map_err(|e| CliError::Runtime(e.to_string()))?;
            if done {
                break;
            }
        }
        let info = env.last_info();
        total += info.com_x;
    }
    Ok(total / episodes as f64)
}
