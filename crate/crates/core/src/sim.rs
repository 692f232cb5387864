//! Agents moving through an n-dimensional unit hypercube of beliefs.
//!
//! Each agent carries a position and a unit heading. On every tick it blends
//! its own heading with the distance-weighted mean heading of agents inside
//! its social influence horizon (alignment) and with the direction toward
//! their weighted centroid (cohesion), applies a small random rotation, and
//! moves. Walls reflect. The cell an agent occupies determines the statement
//! it posts, so a run produces a textual trajectory per agent.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Post, Role};
use crate::error::{Error, FieldError, Result};

/// Coordinates of one environment cell, one entry per dimension.
pub type Cell = Vec<u32>;

const HEADING_EPS: f64 = 1e-9;

/// Thresholds used by [`classify_regime`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeThresholds {
    /// Minimum polarization for a stampede.
    pub stampede_polarization: f64,
    /// A stampede's spread must be below this fraction of the uniform spread.
    pub stampede_spread_ratio: f64,
    /// Minimum mean within-cluster polarization for a flock.
    pub flock_polarization: f64,
    /// Upper bound on the single-linkage radius used for clustering.
    pub cluster_radius_cap: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            stampede_polarization: 0.9,
            stampede_spread_ratio: 0.2,
            flock_polarization: 0.7,
            cluster_radius_cap: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dimensions: usize,
    pub agent_count: usize,
    /// Social influence horizon, in hypercube units.
    pub sih: f64,
    pub speed: f64,
    pub steps: usize,
    pub align_weight: f64,
    pub cohesion_weight: f64,
    /// Maximum noise rotation per tick, radians.
    pub noise_angle: f64,
    pub cells_per_axis: u32,
    pub post_interval: usize,
    pub seed: u64,
    #[serde(default)]
    pub regime: RegimeThresholds,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dimensions: 2,
            agent_count: 100,
            sih: 0.3,
            speed: 0.0005,
            steps: 2000,
            align_weight: 0.4,
            cohesion_weight: 0.35,
            noise_angle: 10f64.to_radians(),
            cells_per_axis: 10,
            post_interval: 1,
            seed: 0,
            regime: RegimeThresholds::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &str, msg: &str| {
            if !ok {
                errs.push(FieldError::new(format!("sim.{field}"), msg));
            }
        };
        check(self.dimensions >= 1, "dimensions", "must be a positive integer");
        check(self.agent_count >= 1, "agent_count", "must be a positive integer");
        check(
            self.sih.is_finite() && self.sih >= 0.0,
            "sih",
            "must be a finite value >= 0",
        );
        check(
            self.speed.is_finite() && self.speed > 0.0 && self.speed <= 0.5,
            "speed",
            "must be in (0, 0.5]",
        );
        check(
            (0.0..=1.0).contains(&self.align_weight),
            "align_weight",
            "must be in [0, 1]",
        );
        check(
            (0.0..=1.0).contains(&self.cohesion_weight),
            "cohesion_weight",
            "must be in [0, 1]",
        );
        check(
            self.align_weight + self.cohesion_weight <= 1.0 + 1e-12,
            "cohesion_weight",
            "align_weight + cohesion_weight must not exceed 1",
        );
        check(
            self.noise_angle.is_finite() && self.noise_angle >= 0.0,
            "noise_angle",
            "must be a finite angle >= 0",
        );
        check(self.cells_per_axis >= 1, "cells_per_axis", "must be a positive integer");
        check(self.post_interval >= 1, "post_interval", "must be a positive integer");
        let r = &self.regime;
        check(
            (0.0..=1.0).contains(&r.stampede_polarization),
            "regime.stampede_polarization",
            "must be in [0, 1]",
        );
        check(
            r.stampede_spread_ratio.is_finite() && r.stampede_spread_ratio >= 0.0,
            "regime.stampede_spread_ratio",
            "must be >= 0",
        );
        check(
            (0.0..=1.0).contains(&r.flock_polarization),
            "regime.flock_polarization",
            "must be in [0, 1]",
        );
        check(
            r.cluster_radius_cap.is_finite() && r.cluster_radius_cap >= 0.0,
            "regime.cluster_radius_cap",
            "must be >= 0",
        );
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errs))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: usize,
    pub position: Vec<f64>,
    pub heading: Vec<f64>,
}

impl Agent {
    /// Spawns agent `id` at a uniformly random position with a uniformly
    /// random heading, returning it together with its private noise stream.
    pub fn spawn(id: usize, dimensions: usize, seed: u64) -> (Agent, AgentRng) {
        let mut rng = AgentRng::new(seed, id);
        let position = (0..dimensions).map(|_| rng.0.random::<f64>()).collect();
        let heading = loop {
            let v: Vec<f64> = (0..dimensions)
                .map(|_| rng.0.sample::<f64, _>(StandardNormal))
                .collect();
            if let Some(h) = normalized(&v) {
                break h;
            }
        };
        (Agent { id, position, heading }, rng)
    }

    pub fn cell(&self, cells_per_axis: u32) -> Cell {
        cell_of(&self.position, cells_per_axis)
    }
}

/// Per-agent random stream. Streams are keyed by (seed, agent id), so an
/// agent's noise does not depend on how many other agents exist.
#[derive(Debug, Clone)]
pub struct AgentRng(ChaCha8Rng);

impl AgentRng {
    pub fn new(seed: u64, agent_id: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(agent_id as u64);
        AgentRng(rng)
    }
}

/// Grid of statement-bearing cells over the unit hypercube.
///
/// Cells without an explicit entry carry a single generated statement
/// `cell_i_j_…`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvironmentData", into = "EnvironmentData")]
pub struct Environment {
    pub dimensions: usize,
    pub cells_per_axis: u32,
    statements: BTreeMap<Cell, Vec<String>>,
    reverse: HashMap<String, Cell>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvironmentData {
    dimensions: usize,
    cells_per_axis: u32,
    #[serde(default)]
    statements: Vec<(Cell, Vec<String>)>,
}

impl TryFrom<EnvironmentData> for Environment {
    type Error = Error;

    fn try_from(d: EnvironmentData) -> Result<Self> {
        let mut env = Environment::new(d.dimensions, d.cells_per_axis);
        for (cell, statements) in d.statements {
            env.set_statements(cell, statements)?;
        }
        Ok(env)
    }
}

impl From<Environment> for EnvironmentData {
    fn from(e: Environment) -> Self {
        EnvironmentData {
            dimensions: e.dimensions,
            cells_per_axis: e.cells_per_axis,
            statements: e.statements.into_iter().collect(),
        }
    }
}

impl Environment {
    pub fn new(dimensions: usize, cells_per_axis: u32) -> Self {
        Self {
            dimensions,
            cells_per_axis,
            statements: BTreeMap::new(),
            reverse: HashMap::new(),
        }
    }

    pub fn for_config(cfg: &SimConfig) -> Self {
        Self::new(cfg.dimensions, cfg.cells_per_axis)
    }

    /// Replaces the statements of one cell.
    pub fn set_statements(&mut self, cell: Cell, statements: Vec<String>) -> Result<()> {
        if !self.is_valid_cell(&cell) {
            return Err(Error::Config(format!("cell {cell:?} outside the environment")));
        }
        if statements.is_empty() {
            return Err(Error::Config(format!("cell {cell:?} needs at least one statement")));
        }
        for s in &statements {
            self.reverse.insert(s.clone(), cell.clone());
        }
        self.statements.insert(cell, statements);
        Ok(())
    }

    pub fn is_valid_cell(&self, cell: &[u32]) -> bool {
        cell.len() == self.dimensions && cell.iter().all(|&c| c < self.cells_per_axis)
    }

    pub fn statements(&self, cell: &[u32]) -> Vec<String> {
        match self.statements.get(cell) {
            Some(s) => s.clone(),
            None => vec![default_statement(cell)],
        }
    }

    /// The statement an agent in `cell` posts.
    pub fn first_statement(&self, cell: &[u32]) -> String {
        match self.statements.get(cell) {
            Some(s) => s[0].clone(),
            None => default_statement(cell),
        }
    }

    /// Maps a statement back to the cell it belongs to.
    pub fn cell_for_statement(&self, statement: &str) -> Option<Cell> {
        if let Some(c) = self.reverse.get(statement) {
            return Some(c.clone());
        }
        let rest = statement.strip_prefix("cell_")?;
        let cell: Option<Cell> = rest.split('_').map(|p| p.parse().ok()).collect();
        let cell = cell?;
        // a generated name only belongs to a cell that has no explicit statements
        (self.is_valid_cell(&cell) && !self.statements.contains_key(&cell)).then_some(cell)
    }

    /// Number of cells, saturating for very large grids.
    pub fn cell_count(&self) -> u128 {
        (self.cells_per_axis as u128)
            .checked_pow(self.dimensions as u32)
            .unwrap_or(u128::MAX)
    }
}

fn default_statement(cell: &[u32]) -> String {
    let mut s = String::from("cell");
    for c in cell {
        s.push('_');
        s.push_str(&c.to_string());
    }
    s
}

pub fn cell_of(position: &[f64], cells_per_axis: u32) -> Cell {
    position
        .iter()
        .map(|&x| ((x * cells_per_axis as f64).floor().max(0.0) as u32).min(cells_per_axis - 1))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentPost {
    pub agent_id: usize,
    pub tick: usize,
    pub cell: Cell,
    pub statement: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Nomad,
    Flock,
    Stampede,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Nomad => "nomad",
            Regime::Flock => "flock",
            Regime::Stampede => "stampede",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// Norm of the mean heading.
    pub polarization: f64,
    /// Mean pairwise position distance.
    pub spread: f64,
    pub cluster_count: usize,
    /// Mean polarization over clusters with at least two members.
    pub cluster_polarization: f64,
    pub regime: Regime,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    (n >= HEADING_EPS && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_dims(agents: &[Agent], dimensions: usize) -> Result<()> {
    for a in agents {
        if a.position.len() != dimensions || a.heading.len() != dimensions {
            return Err(Error::Config(format!(
                "agent {} has dimension {} but the configuration expects {}",
                a.id,
                a.position.len(),
                dimensions
            )));
        }
    }
    Ok(())
}

/// Advances every agent by one tick.
///
/// Reads only the old state and writes a fresh vector, so per-agent updates
/// are independent of evaluation order. `rngs[i]` is agent `i`'s stream.
pub fn step(agents: &[Agent], env: &Environment, cfg: &SimConfig, rngs: &mut [AgentRng]) -> Result<Vec<Agent>> {
    let n = cfg.dimensions;
    if env.dimensions != n {
        return Err(Error::Config(format!(
            "environment has dimension {} but the configuration expects {n}",
            env.dimensions
        )));
    }
    check_dims(agents, n)?;
    if rngs.len() != agents.len() {
        return Err(Error::Config(format!(
            "{} noise streams for {} agents",
            rngs.len(),
            agents.len()
        )));
    }
    let keep = 1.0 - cfg.align_weight - cfg.cohesion_weight;
    let sih2 = cfg.sih * cfg.sih;

    let count = agents.len();
    let pos: Vec<f64> = agents.iter().flat_map(|a| a.position.iter().copied()).collect();
    let head: Vec<f64> = agents.iter().flat_map(|a| a.heading.iter().copied()).collect();
    let mut heading_sum = vec![0.0; n];
    let mut centroid = vec![0.0; n];
    let mut toward = vec![0.0; n];

    let mut next = Vec::with_capacity(count);
    for (i, me) in agents.iter().enumerate() {
        let my_pos = &pos[i * n..(i + 1) * n];
        // alignment averages over the neighborhood including the agent itself
        heading_sum.copy_from_slice(&head[i * n..(i + 1) * n]);
        centroid.iter_mut().for_each(|c| *c = 0.0);
        let mut weight_sum = 0.0;
        if cfg.sih > 0.0 {
            for j in 0..count {
                if i == j {
                    continue;
                }
                let other = &pos[j * n..(j + 1) * n];
                let d2: f64 = my_pos.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 >= sih2 {
                    continue;
                }
                let w = 1.0 - d2.sqrt() / cfg.sih;
                weight_sum += w;
                let other_head = &head[j * n..(j + 1) * n];
                for k in 0..n {
                    heading_sum[k] += w * other_head[k];
                    centroid[k] += w * other[k];
                }
            }
        }
        toward.iter_mut().for_each(|t| *t = 0.0);
        if weight_sum > 0.0 {
            for k in 0..n {
                toward[k] = centroid[k] / weight_sum - my_pos[k];
            }
            let len = norm(&toward);
            if len >= HEADING_EPS {
                toward.iter_mut().for_each(|t| *t /= len);
            } else {
                toward.iter_mut().for_each(|t| *t = 0.0);
            }
        }
        let blend: Vec<f64> = (0..n)
            .map(|k| {
                keep * me.heading[k]
                    + cfg.align_weight * heading_sum[k] / (1.0 + weight_sum)
                    + cfg.cohesion_weight * toward[k]
            })
            .collect();
        let mut heading = normalized(&blend).unwrap_or_else(|| me.heading.clone());

        rotate_randomly(&mut heading, cfg.noise_angle, &mut rngs[i].0);

        let mut position = my_pos.to_vec();
        for k in 0..n {
            position[k] += cfg.speed * heading[k];
            if position[k] < 0.0 {
                position[k] = -position[k];
                heading[k] = -heading[k];
            } else if position[k] > 1.0 {
                position[k] = 2.0 - position[k];
                heading[k] = -heading[k];
            }
            position[k] = position[k].clamp(0.0, 1.0);
        }
        next.push(Agent {
            id: me.id,
            position,
            heading,
        });
    }
    Ok(next)
}

/// Rotates `heading` by an angle drawn from `[-max_angle, max_angle]` in a
/// random coordinate plane. The draws happen even when `max_angle` is zero so
/// the stream advances identically for every configuration.
fn rotate_randomly(heading: &mut [f64], max_angle: f64, rng: &mut ChaCha8Rng) {
    let n = heading.len();
    let u: f64 = rng.random();
    if n < 2 {
        return;
    }
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let theta = (2.0 * u - 1.0) * max_angle;
    let (s, c) = theta.sin_cos();
    let (ha, hb) = (heading[a], heading[b]);
    heading[a] = c * ha - s * hb;
    heading[b] = s * ha + c * hb;
    if let Some(h) = normalized(heading) {
        heading.copy_from_slice(&h);
    }
}

/// Spawns the configured population.
pub fn spawn_population(cfg: &SimConfig) -> (Vec<Agent>, Vec<AgentRng>) {
    (0..cfg.agent_count)
        .map(|id| Agent::spawn(id, cfg.dimensions, cfg.seed))
        .unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub agents: Vec<Agent>,
    pub posts: Vec<AgentPost>,
    pub report: RegimeReport,
}

/// Runs the configured simulation.
///
/// At every tick that is a multiple of `post_interval` each agent first posts
/// the first statement of its current cell, then the population advances.
/// Posts are ordered by (agent, tick).
pub fn run_simulation(cfg: &SimConfig, env: &Environment) -> Result<SimulationOutput> {
    cfg.validate()?;
    let (mut agents, mut rngs) = spawn_population(cfg);
    let mut posts = Vec::with_capacity(cfg.agent_count * cfg.steps.div_ceil(cfg.post_interval));
    for tick in 0..cfg.steps {
        if tick % cfg.post_interval == 0 {
            for a in &agents {
                let cell = a.cell(cfg.cells_per_axis);
                let statement = env.first_statement(&cell);
                posts.push(AgentPost {
                    agent_id: a.id,
                    tick,
                    cell,
                    statement,
                });
            }
        }
        agents = step(&agents, env, cfg, &mut rngs)?;
    }
    posts.sort_by_key(|p| (p.agent_id, p.tick));
    let report = classify_population(&agents, cfg);
    Ok(SimulationOutput { agents, posts, report })
}

/// Like [`classify_regime`], but a single agent is reported as a nomad
/// instead of failing.
fn classify_population(agents: &[Agent], cfg: &SimConfig) -> RegimeReport {
    classify_regime(agents, cfg).unwrap_or(RegimeReport {
        polarization: if agents.is_empty() { 0.0 } else { 1.0 },
        spread: 0.0,
        cluster_count: agents.len(),
        cluster_polarization: 0.0,
        regime: Regime::Nomad,
    })
}

fn polarization<'a>(headings: impl Iterator<Item = &'a [f64]>, n: usize) -> f64 {
    let mut sum = vec![0.0; n];
    let mut count = 0usize;
    for h in headings {
        for k in 0..n {
            sum[k] += h[k];
        }
        count += 1;
    }
    if count == 0 {
        return 0.0;
    }
    (norm(&sum) / count as f64).min(1.0)
}

/// Classifies the population as nomad, flock or stampede.
pub fn classify_regime(agents: &[Agent], cfg: &SimConfig) -> Result<RegimeReport> {
    if agents.len() < 2 {
        return Err(Error::InsufficientPopulation {
            needed: 2,
            got: agents.len(),
        });
    }
    let n = cfg.dimensions;
    check_dims(agents, n)?;
    let th = &cfg.regime;

    let phi = polarization(agents.iter().map(|a| a.heading.as_slice()), n);

    let count = agents.len();
    let mut total = 0.0;
    for i in 0..count {
        for j in i + 1..count {
            total += distance(&agents[i].position, &agents[j].position);
        }
    }
    let spread = total / (count * (count - 1) / 2) as f64;

    let radius = cfg.sih.min(th.cluster_radius_cap);
    let clusters = single_linkage(agents, radius);
    let groups: Vec<&Vec<usize>> = clusters.iter().filter(|c| c.len() >= 2).collect();
    let cluster_polarization = if groups.is_empty() {
        0.0
    } else {
        groups
            .iter()
            .map(|c| polarization(c.iter().map(|&i| agents[i].heading.as_slice()), n))
            .sum::<f64>()
            / groups.len() as f64
    };

    let regime = if phi > th.stampede_polarization && spread < th.stampede_spread_ratio * uniform_spread(n) {
        Regime::Stampede
    } else if groups.len() >= 2 && cluster_polarization > th.flock_polarization {
        Regime::Flock
    } else {
        Regime::Nomad
    };

    Ok(RegimeReport {
        polarization: phi,
        spread,
        cluster_count: clusters.len(),
        cluster_polarization,
        regime,
    })
}

/// Connected components under single linkage at `radius`, each sorted, in
/// order of their smallest member.
pub fn single_linkage(agents: &[Agent], radius: f64) -> Vec<Vec<usize>> {
    let n = agents.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if distance(&agents[i].position, &agents[j].position) <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        by_root.entry(r).or_default().push(i);
    }
    by_root.into_values().collect()
}

const UNIFORM_SPREAD_PAIRS: usize = 100_000;
const UNIFORM_SPREAD_SEED: u64 = 0x5e_ed0f_5eed;

/// Expected distance between two uniform points of `[0,1]^n`, estimated once
/// per dimension by seeded Monte-Carlo over 10^5 pairs.
pub fn uniform_spread(dimensions: usize) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    *guard.entry(dimensions).or_insert_with(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(UNIFORM_SPREAD_SEED);
        let mut total = 0.0;
        let mut a = vec![0.0; dimensions];
        let mut b = vec![0.0; dimensions];
        for _ in 0..UNIFORM_SPREAD_PAIRS {
            for k in 0..dimensions {
                a[k] = rng.random();
                b[k] = rng.random();
            }
            total += distance(&a, &b);
        }
        total / UNIFORM_SPREAD_PAIRS as f64
    })
}

/// Converts a post log into corpus posts (group `sim`, author `agent_<id>`).
/// Tick `t` is stamped `t` seconds after the Unix epoch.
pub fn posts_to_corpus(posts: &[AgentPost]) -> Corpus {
    let width = posts.iter().map(|p| p.tick).max().unwrap_or(0).to_string().len();
    let records = posts
        .iter()
        .map(|p| Post {
            post_id: format!("sim-{}-{:0width$}", p.agent_id, p.tick),
            group_id: "sim".to_string(),
            player_id: format!("agent_{}", p.agent_id),
            role: Role::Player,
            timestamp: crate::corpus::Timestamp::from_millis(p.tick as i64 * 1000),
            text: p.statement.clone(),
        })
        .collect();
    Corpus::from_posts(records)
}
