//! Seeded 2D unicycle navigation simulator.
//!
//! The robot starts at the origin facing +x, drives at constant linear speed
//! and picks its angular velocity from a five-entry menu. A hand-written
//! policy steers toward a sampled goal, is pushed away from nearby obstacles
//! and walls, and is perturbed by Gaussian noise.
//!
//! Random streams are pinned so that traces are reproducible bit for bit:
//!
//! * Each episode owns two ChaCha8 generators built with `from_seed` on a
//!   32-byte key: bytes 0..8 hold the episode seed (little endian), bytes
//!   8..16 the goal sampler seed for the goal stream (zero for the noise
//!   stream), bytes 16..24 the ASCII tag `goal` or `noise` zero padded, and
//!   bytes 24..32 are zero.
//! * A uniform draw is `(next_u64 >> 11) * 2^-53`.
//! * A Gaussian draw uses one Box-Muller branch per pair of uniforms:
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`.
//!
//! Emitted traces use the step index as their time column, so interval bounds
//! in rules count steps. The physical step length `dt` scales the kinematics.

use std::f64::consts::{PI, TAU};

use indexmap::IndexMap;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{Series, Trace};

/// Distance to the goal at which an episode counts as successful.
pub const GOAL_TOLERANCE: f64 = 0.2;
/// Sampled goals keep at least this much free space around them.
pub const GOAL_CLEARANCE: f64 = 0.6;
const GOAL_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("no goal with {GOAL_CLEARANCE} m clearance found for seed {seed}")]
    NoFeasibleGoal { seed: u64 },
    #[error("fleet size must be at least 1")]
    EmptyFleet,
    #[error("config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalSampler {
    pub seed: u64,
    pub min_radius: f64,
    pub max_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Walls sit at `x = ±map_half_extent` and `y = ±map_half_extent` (m).
    pub map_half_extent: f64,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub goal_sampler: GoalSampler,
    /// m/s
    pub linear_speed: f64,
    /// s
    pub dt: f64,
    pub max_steps: usize,
    /// rad/s
    pub angular_menu: Vec<f64>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidScenario(msg));
        let finite = [self.map_half_extent, self.linear_speed, self.dt]
            .into_iter()
            .chain(self.angular_menu.iter().copied())
            .chain(self.obstacles.iter().flat_map(|o| [o.x, o.y, o.radius]))
            .chain([self.goal_sampler.min_radius, self.goal_sampler.max_radius])
            .all(f64::is_finite);
        if !finite {
            return bad("all numeric fields must be finite".into());
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.max_steps < 1 {
            return bad("max_steps must be at least 1".into());
        }
        if !(self.map_half_extent > 0.0) {
            return bad("map_half_extent must be positive".into());
        }
        if !(self.linear_speed > 0.0) {
            return bad("linear_speed must be positive".into());
        }
        if self.angular_menu.len() != 5 {
            return bad(format!("angular_menu needs exactly 5 entries, got {}", self.angular_menu.len()));
        }
        let mut menu = self.angular_menu.clone();
        menu.sort_by(f64::total_cmp);
        if (0..5).any(|i| menu[i] != -menu[4 - i]) {
            return bad("angular_menu must be symmetric about 0".into());
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0) {
                return bad(format!("obstacle {i} has nonpositive radius"));
            }
            if o.x.hypot(o.y) <= o.radius {
                return bad(format!("obstacle {i} covers the origin"));
            }
        }
        let g = &self.goal_sampler;
        if g.min_radius < 0.0 || g.max_radius < g.min_radius {
            return bad("goal_sampler needs 0 <= min_radius <= max_radius".into());
        }
        Ok(())
    }

    /// Distance from `(x, y)` to the nearest obstacle surface or wall.
    /// Negative inside an obstacle or outside the walls.
    pub fn clearance(&self, x: f64, y: f64) -> f64 {
        let walls = (self.map_half_extent - x.abs()).min(self.map_half_extent - y.abs());
        self.obstacles
            .iter()
            .map(|o| (x - o.x).hypot(y - o.y) - o.radius)
            .fold(walls, f64::min)
    }

    /// Nearest surface points as `(distance, bearing in world frame)`.
    fn surfaces(&self, x: f64, y: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let e = self.map_half_extent;
        let walls = [(e - x, 0.0), (e + x, PI), (e - y, PI / 2.0), (e + y, -PI / 2.0)];
        let circles = self.obstacles.iter().map(move |o| {
            let (dx, dy) = (o.x - x, o.y - y);
            (dx.hypot(dy) - o.radius, dy.atan2(dx))
        });
        walls.into_iter().chain(circles)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyParams {
    pub turn_gain: f64,
    /// Standard deviation of the additive turn-rate noise.
    pub noise_std: f64,
    pub repulsion_gain: f64,
    /// m
    pub repulsion_range: f64,
    /// Weight of the previous desired turn rate, in `[0, 1]`.
    pub turn_smoothing: f64,
}

impl PolicyParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidPolicy(msg.to_string()));
        let all = [self.turn_gain, self.noise_std, self.repulsion_gain, self.repulsion_range, self.turn_smoothing];
        if !all.iter().all(|x| x.is_finite()) {
            return bad("all fields must be finite");
        }
        if self.noise_std < 0.0 {
            return bad("noise_std must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.turn_smoothing) {
            return bad("turn_smoothing must lie in [0, 1]");
        }
        if self.repulsion_range < 0.0 {
            return bad("repulsion_range must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    GoalReached,
    Collision,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// Channels `x, y, phi, dist_obst, goal_reached, speed`.
    pub trace: Trace,
    pub seed: u64,
    pub goal: (f64, f64),
    pub outcome: Outcome,
    /// Control steps executed before termination.
    pub steps: usize,
}

/// Signal declarations matching the channels of an [`EpisodeRecord`].
pub const EPISODE_SIGNALS: &str = "signal x : real
signal y : real
signal phi : real
signal dist_obst : real
signal goal_reached : bool
signal speed : real
";

fn stream(seed: u64, salt: u64, tag: &[u8]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&salt.to_le_bytes());
    key[16..16 + tag.len()].copy_from_slice(tag);
    ChaCha8Rng::from_seed(key)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

fn sample_goal(cfg: &ScenarioConfig, seed: u64) -> Result<(f64, f64), SimError> {
    let g = &cfg.goal_sampler;
    let mut rng = stream(seed, g.seed, b"goal");
    for _ in 0..GOAL_ATTEMPTS {
        let angle = TAU * uniform(&mut rng);
        let radius = g.min_radius + (g.max_radius - g.min_radius) * uniform(&mut rng);
        let goal = (radius * angle.cos(), radius * angle.sin());
        if cfg.clearance(goal.0, goal.1) >= GOAL_CLEARANCE {
            return Ok(goal);
        }
    }
    Err(SimError::NoFeasibleGoal { seed })
}

fn nearest_in_menu(menu: &[f64], desired: f64) -> f64 {
    let mut best = menu[0];
    for &w in &menu[1..] {
        if (w - desired).abs() < (best - desired).abs() {
            best = w;
        }
    }
    best
}

fn repulsion(cfg: &ScenarioConfig, params: &PolicyParams, x: f64, y: f64, phi: f64) -> f64 {
    if params.repulsion_range <= 0.0 {
        return 0.0;
    }
    cfg.surfaces(x, y)
        .filter(|&(d, _)| d < params.repulsion_range)
        .filter_map(|(d, bearing)| {
            let rel = wrap_angle(bearing - phi);
            if rel.abs() >= PI / 2.0 {
                return None;
            }
            // turn away from the side the surface is on
            let side = if rel >= 0.0 { 1.0 } else { -1.0 };
            Some(-side * params.repulsion_gain * (1.0 - d / params.repulsion_range))
        })
        .sum()
}

#[derive(Default)]
struct Channels {
    x: Vec<f64>,
    y: Vec<f64>,
    phi: Vec<f64>,
    dist: Vec<f64>,
    reached: Vec<bool>,
    speed: Vec<f64>,
}

impl Channels {
    fn push(&mut self, x: f64, y: f64, phi: f64, dist: f64, reached: bool, speed: f64) {
        self.x.push(x);
        self.y.push(y);
        self.phi.push(phi);
        self.dist.push(dist);
        self.reached.push(reached);
        self.speed.push(speed);
    }

    fn into_trace(self, id: String) -> Trace {
        let n = self.x.len();
        let channels: IndexMap<String, Series> = [
            ("x", Series::Real(self.x)),
            ("y", Series::Real(self.y)),
            ("phi", Series::Real(self.phi)),
            ("dist_obst", Series::Real(self.dist)),
            ("goal_reached", Series::Bool(self.reached)),
            ("speed", Series::Real(self.speed)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Trace::new(id, (0..n).map(|i| i as f64).collect(), channels)
            .expect("simulator emits well-formed traces")
    }
}

/// Runs one episode toward a sampled goal.
pub fn simulate_episode(cfg: &ScenarioConfig, params: &PolicyParams, seed: u64) -> Result<EpisodeRecord, SimError> {
    cfg.validate()?;
    let goal = sample_goal(cfg, seed)?;
    simulate_episode_to(cfg, params, seed, goal)
}

/// Runs one episode toward an explicit goal.
pub fn simulate_episode_to(
    cfg: &ScenarioConfig,
    params: &PolicyParams,
    seed: u64,
    goal: (f64, f64),
) -> Result<EpisodeRecord, SimError> {
    cfg.validate()?;
    params.validate()?;
    let mut noise = stream(seed, 0, b"noise");
    let v = cfg.linear_speed;
    let (mut x, mut y, mut phi) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut desired = 0.0;
    let mut channels = Channels::default();

    let status = |x: f64, y: f64| {
        let dist = cfg.clearance(x, y);
        let reached = (goal.0 - x).hypot(goal.1 - y) <= GOAL_TOLERANCE;
        let outcome = if dist <= 0.0 {
            Some(Outcome::Collision)
        } else if reached {
            Some(Outcome::GoalReached)
        } else {
            None
        };
        (dist, reached, outcome)
    };

    let (dist, mut reached, mut outcome) = status(x, y);
    channels.push(x, y, phi, dist, reached, v);
    let mut steps = 0;

    while outcome.is_none() && steps < cfg.max_steps {
        let heading_error = wrap_angle((goal.1 - y).atan2(goal.0 - x) - phi);
        let raw = params.turn_gain * heading_error
            + repulsion(cfg, params, x, y, phi)
            + params.noise_std * gaussian(&mut noise);
        desired = params.turn_smoothing * desired + (1.0 - params.turn_smoothing) * raw;
        let omega = nearest_in_menu(&cfg.angular_menu, desired);

        x += v * phi.cos() * cfg.dt;
        y += v * phi.sin() * cfg.dt;
        phi += omega * cfg.dt;
        steps += 1;

        let (dist, hit_goal, next) = status(x, y);
        reached |= hit_goal;
        outcome = next;
        channels.push(x, y, phi, dist, reached, v);
    }

    if channels.x.len() < 2 {
        // terminated before moving; hold the state for one more sample
        let dist = channels.dist[0];
        channels.push(x, y, phi, dist, reached, 0.0);
    }

    Ok(EpisodeRecord {
        trace: channels.into_trace(format!("episode_{seed}")),
        seed,
        goal,
        outcome: outcome.unwrap_or(Outcome::Timeout),
        steps,
    })
}

/// Runs `n` episodes with seeds `base_seed..base_seed + n`, in parallel.
/// The output order and contents do not depend on scheduling.
pub fn simulate_fleet(
    cfg: &ScenarioConfig,
    params: &PolicyParams,
    n: usize,
    base_seed: u64,
) -> Result<Vec<EpisodeRecord>, SimError> {
    if n == 0 {
        return Err(SimError::EmptyFleet);
    }
    cfg.validate()?;
    params.validate()?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_episode(cfg, params, base_seed.wrapping_add(i)))
        .collect()
}

/// Shipped scenario plus the "pre" and "post" policies.
pub fn builtin_presets() -> (ScenarioConfig, PolicyParams, PolicyParams) {
    let obstacle = |x, y| Obstacle { x, y, radius: 0.3 };
    let cfg = ScenarioConfig {
        map_half_extent: 2.5,
        obstacles: vec![obstacle(1.0, 1.0), obstacle(-1.0, 1.0), obstacle(-1.0, -1.0), obstacle(1.0, -1.0)],
        goal_sampler: GoalSampler { seed: 0, min_radius: 1.0, max_radius: 1.9 },
        linear_speed: 0.15,
        dt: 0.1,
        max_steps: 800,
        angular_menu: vec![-2.5, -1.0, 0.0, 1.0, 2.5],
    };
    let pre = PolicyParams {
        turn_gain: 0.5,
        noise_std: 4.0,
        repulsion_gain: 0.2,
        repulsion_range: 0.3,
        turn_smoothing: 0.5,
    };
    let post = PolicyParams {
        turn_gain: 1.5,
        noise_std: 0.3,
        repulsion_gain: 4.0,
        repulsion_range: 0.7,
        turn_smoothing: 0.7,
    };
    (cfg, pre, post)
}

/// Scenario and both policies, as read from a simulator config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: ScenarioConfig,
    pub pre: PolicyParams,
    pub post: PolicyParams,
}

impl SimConfig {
    pub fn preset() -> Self {
        let (scenario, pre, post) = builtin_presets();
        SimConfig { scenario, pre, post }
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.scenario.validate()?;
        cfg.pre.validate()?;
        cfg.post.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn policy(&self, name: &str) -> Option<&PolicyParams> {
        match name {
            "pre" => Some(&self.pre),
            "post" => Some(&self.post),
            _ => None,
        }
    }
}

/// One line of a [`FleetManifest`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeEntry {
    pub file: String,
    pub seed: u64,
    pub goal_x: f64,
    pub goal_y: f64,
    pub outcome: Outcome,
    pub steps: usize,
}

/// Record of a simulated fleet: everything needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetManifest {
    /// `preset` or the config path as given.
    pub config_source: String,
    pub policy: String,
    pub n: usize,
    pub base_seed: u64,
    /// Seconds per trace time unit; trace times count steps.
    pub step_seconds: f64,
    pub scenario: ScenarioConfig,
    pub params: PolicyParams,
    pub episodes: Vec<EpisodeEntry>,
}

impl FleetManifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest is always serializable")
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Series;

    fn open_field(v: f64) -> ScenarioConfig {
        ScenarioConfig {
            map_half_extent: 50.0,
            obstacles: vec![],
            goal_sampler: GoalSampler { seed: 0, min_radius: 0.0, max_radius: 0.0 },
            linear_speed: v,
            dt: 0.1,
            max_steps: 800,
            angular_menu: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
        }
    }

    fn calm() -> PolicyParams {
        PolicyParams { turn_gain: 1.0, noise_std: 0.0, repulsion_gain: 0.0, repulsion_range: 0.0, turn_smoothing: 0.0 }
    }

    fn real<'a>(trace: &'a Trace, name: &str) -> &'a [f64] {
        trace.real(name).unwrap()
    }

    #[test]
    fn straight_line_to_goal() {
        let ep = simulate_episode_to(&open_field(0.2), &calm(), 1, (1.0, 0.0)).unwrap();
        assert_eq!(ep.outcome, Outcome::GoalReached);
        // 0.8 m of travel at 0.02 m per step
        assert!((39..=41).contains(&ep.steps), "{}", ep.steps);
        assert!(real(&ep.trace, "phi").iter().all(|&p| p == 0.0));
    }

    #[test]
    fn goal_at_start_emits_two_samples() {
        let ep = simulate_episode(&open_field(0.2), &calm(), 3).unwrap();
        assert_eq!(ep.goal, (0.0, 0.0));
        assert_eq!(ep.outcome, Outcome::GoalReached);
        assert_eq!(ep.trace.len(), 2);
        assert_eq!(ep.trace.series("goal_reached").unwrap(), &Series::Bool(vec![true, true]));
    }

    #[test]
    fn deterministic_per_seed() {
        let (cfg, pre, _) = builtin_presets();
        let a = simulate_episode(&cfg, &pre, 42).unwrap();
        let b = simulate_episode(&cfg, &pre, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_episode(&cfg, &pre, 43).unwrap();
        assert_ne!(a.goal, c.goal);
    }

    #[test]
    fn fleet_matches_episodes() {
        let (cfg, _, post) = builtin_presets();
        let fleet = simulate_fleet(&cfg, &post, 1, 9).unwrap();
        assert_eq!(fleet, vec![simulate_episode(&cfg, &post, 9).unwrap()]);
        assert_eq!(simulate_fleet(&cfg, &post, 0, 9).unwrap_err(), SimError::EmptyFleet);
    }

    #[test]
    fn presets_are_valid() {
        let (cfg, pre, post) = builtin_presets();
        cfg.validate().unwrap();
        pre.validate().unwrap();
        post.validate().unwrap();
        assert!(post.turn_smoothing > pre.turn_smoothing);
        assert!(post.noise_std < pre.noise_std);
        assert!(post.repulsion_gain > pre.repulsion_gain);
        assert_eq!(cfg.max_steps, 800);
        assert_eq!(cfg.obstacles.len(), 4);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = open_field(0.2);
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = open_field(0.2);
        cfg.angular_menu = vec![-1.0, 0.0, 1.0];
        assert!(cfg.validate().is_err());
        let mut cfg = open_field(0.2);
        cfg.angular_menu = vec![-2.0, -1.0, 0.0, 1.0, 3.0];
        assert!(cfg.validate().is_err());
        let mut cfg = open_field(0.2);
        cfg.obstacles.push(Obstacle { x: 0.1, y: 0.0, radius: 0.5 });
        assert!(cfg.validate().unwrap_err().to_string().contains("origin"));
        let mut cfg = open_field(0.2);
        cfg.max_steps = 0;
        assert!(cfg.validate().is_err());

        let mut p = calm();
        p.turn_smoothing = 1.5;
        assert!(p.validate().is_err());
        let mut p = calm();
        p.noise_std = -0.1;
        assert!(simulate_episode(&open_field(0.2), &p, 0).is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = SimConfig::preset();
        let text = cfg.to_toml();
        assert_eq!(SimConfig::from_toml(&text).unwrap(), cfg);
        assert!(SimConfig::from_toml(&text.replace("max_steps = 800", "max_steps = 0")).is_err());
        assert!(SimConfig::from_toml("[scenario]\nbogus = 1").is_err());
    }

    #[test]
    fn manifest_round_trips() {
        let (scenario, params, _) = builtin_presets();
        let ep = simulate_episode(&scenario, &params, 11).unwrap();
        let manifest = FleetManifest {
            config_source: "preset".into(),
            policy: "pre".into(),
            n: 1,
            base_seed: 11,
            step_seconds: scenario.dt,
            scenario,
            params,
            episodes: vec![EpisodeEntry {
                file: "trace_0000.csv".into(),
                seed: ep.seed,
                goal_x: ep.goal.0,
                goal_y: ep.goal.1,
                outcome: ep.outcome,
                steps: ep.steps,
            }],
        };
        assert_eq!(FleetManifest::from_toml(&manifest.to_toml()).unwrap(), manifest);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn gaussian_stream_moments() {
        let mut rng = stream(5, 0, b"noise");
        let draws: Vec<f64> = (0..20_000).map(|_| gaussian(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.03, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }
}
