// SPDX-License-Identifier: Apache-2.0

//! Preemptible-session simulator.
//!
//! Time is counted in wall units where one training step costs one unit and
//! one checkpoint save costs `save_cost` units. A session ends after its
//! length in wall units. The save triggered by a step commits only if the
//! session still has room for the whole save. When a session ends before the
//! run is done, every step after the last commit is lost, the next session
//! starts after `reconnect_delay` units and training restarts from the
//! commit.
//!
//! Every row satisfies `useful + lost + overhead = wall`, where overhead is
//! the save and reconnect time.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::rng::TrainRng;

/// Sessions in a row that commit nothing before a row is declared stalled.
pub const STALL_LIMIT: u64 = 1000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid session model `{0}`: expected fixed:n or uniform:lo:hi with 1 <= lo <= hi")]
    BadSessionModel(String),
    #[error("{0} must be >= 1")]
    NonPositive(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionLength {
    Fixed(u64),
    Uniform { lo: u64, hi: u64 },
}

impl SessionLength {
    fn draw(&self, rng: &mut TrainRng) -> u64 {
        match *self {
            SessionLength::Fixed(n) => n,
            SessionLength::Uniform { lo, hi } => rng.inner_mut().random_range(lo..=hi),
        }
    }
}

impl FromStr for SessionLength {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::BadSessionModel(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.trim().parse::<u64>().map_err(|_| bad());
        let parsed = match parts.as_slice() {
            ["fixed", n] => SessionLength::Fixed(num(n)?),
            ["uniform", lo, hi] => SessionLength::Uniform { lo: num(lo)?, hi: num(hi)? },
            _ => return Err(bad()),
        };
        match parsed {
            SessionLength::Fixed(n) if n >= 1 => Ok(parsed),
            SessionLength::Uniform { lo, hi } if lo >= 1 && lo <= hi => Ok(parsed),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for SessionLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionLength::Fixed(n) => write!(f, "fixed:{n}"),
            SessionLength::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionModel {
    pub length: SessionLength,
    pub reconnect_delay: u64,
    pub seed: u64,
}

impl SessionModel {
    pub fn fixed(n: u64) -> Self {
        Self { length: SessionLength::Fixed(n), reconnect_delay: 0, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimSettings {
    pub total_steps: u64,
    /// Wall units per save.
    pub save_cost: u64,
    /// Saves also happen at every multiple of this, like epoch ends.
    pub steps_per_epoch: Option<u64>,
}

/// One policy-table row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimRow {
    pub interval: u64,
    pub wall_steps: u64,
    pub useful_steps: u64,
    pub lost_steps: u64,
    pub overhead_steps: u64,
    pub checkpoints: u64,
    pub crashes: u64,
    pub sessions: u64,
    /// Steps lost by each crash, in order.
    pub lost_per_crash: Vec<u64>,
    pub stalled: bool,
}

impl SimRow {
    pub fn conserves(&self) -> bool {
        self.useful_steps + self.lost_steps + self.overhead_steps == self.wall_steps
    }

    pub fn max_lost_per_crash(&self) -> u64 {
        self.lost_per_crash.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyTable {
    pub model: SessionModel,
    pub settings: SimSettings,
    pub rows: Vec<SimRow>,
}

impl fmt::Display for PolicyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "sessions {} reconnect_delay {} total_steps {} save_cost {}",
            self.model.length, self.model.reconnect_delay, self.settings.total_steps, self.settings.save_cost
        )?;
        writeln!(f, "interval  wall  useful  lost  overhead  checkpoints  crashes  max_lost  status")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>8}  {:>4}  {:>6}  {:>4}  {:>8}  {:>11}  {:>7}  {:>8}  {}",
                r.interval,
                r.wall_steps,
                r.useful_steps,
                r.lost_steps,
                r.overhead_steps,
                r.checkpoints,
                r.crashes,
                r.max_lost_per_crash(),
                if r.stalled { "stalled" } else { "done" }
            )?;
        }
        Ok(())
    }
}

/// Simulates one checkpoint interval.
pub fn simulate_interval(interval: u64, model: &SessionModel, settings: &SimSettings) -> Result<SimRow, SimError> {
    if interval == 0 {
        return Err(SimError::NonPositive("interval"));
    }
    if settings.total_steps == 0 {
        return Err(SimError::NonPositive("total steps"));
    }
    let total = settings.total_steps;
    let mut rng = TrainRng::seed_from_u64(model.seed);
    let mut row = SimRow {
        interval,
        wall_steps: 0,
        useful_steps: 0,
        lost_steps: 0,
        overhead_steps: 0,
        checkpoints: 0,
        crashes: 0,
        sessions: 0,
        lost_per_crash: Vec::new(),
        stalled: false,
    };
    let (mut progress, mut committed) = (0u64, 0u64);
    let mut idle_sessions = 0;
    while committed < total {
        row.sessions += 1;
        let committed_at_start = committed;
        let mut budget = model.length.draw(&mut rng);
        while budget > 0 && committed < total {
            budget -= 1;
            row.wall_steps += 1;
            progress += 1;
            let epoch_end = settings.steps_per_epoch.is_some_and(|e| progress % e == 0);
            if progress % interval == 0 || progress == total || epoch_end {
                let cost = settings.save_cost.min(budget);
                budget -= cost;
                row.wall_steps += cost;
                row.overhead_steps += cost;
                if cost == settings.save_cost {
                    committed = progress;
                    row.checkpoints += 1;
                }
            }
        }
        if committed < total {
            let lost = progress - committed;
            row.crashes += 1;
            row.lost_steps += lost;
            row.lost_per_crash.push(lost);
            progress = committed;
            row.wall_steps += model.reconnect_delay;
            row.overhead_steps += model.reconnect_delay;
            idle_sessions = if committed == committed_at_start { idle_sessions + 1 } else { 0 };
            if idle_sessions >= STALL_LIMIT {
                row.stalled = true;
                break;
            }
        }
    }
    row.useful_steps = committed;
    Ok(row)
}

/// One row per interval, each from the same session draw sequence.
pub fn simulate_sessions(intervals: &[u64], model: &SessionModel, settings: &SimSettings) -> Result<PolicyTable, SimError> {
    let rows = intervals.iter().map(|&i| simulate_interval(i, model, settings)).collect::<Result<_, _>>()?;
    Ok(PolicyTable { model: *model, settings: *settings, rows })
}
