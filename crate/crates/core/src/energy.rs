//! Interface energy accounting and utilization classification.
//!
//! An interface's energy over an interval is
//! `P_active*T_ac + P_idle*T_id + P_sleep*T_sl + E_c*C`, where `C` counts sleep-to-idle
//! transitions. Within a sample window an awake interface is "active" for `b_T / br` seconds (the
//! time its line rate needs to move the bits it handled) and idle for the rest.

use thiserror::Error;

use crate::graph::PowerRating;
use crate::types::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("negative duration {0}")]
    NegativeDuration(f64),
    #[error("wakeup recorded for an interface that was not asleep ({0:?})")]
    InvalidTransition(OperState),
    #[error("sample window must be positive")]
    ZeroWindow,
    #[error("line rate must be positive")]
    ZeroRate,
    #[error("thresholds must satisfy 0 <= lower < upper <= 1 (lower={lower}, upper={upper})")]
    InvalidThresholds { lower: f64, upper: f64 },
}

/// Operational power state of an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperState {
    Active,
    Idle,
    Sleep,
}

impl OperState {
    pub fn is_awake(self) -> bool {
        self != OperState::Sleep
    }
}

/// Topology role of an interface with respect to the spanning tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeRole {
    /// On the spanning tree; never cut.
    McstTree,
    /// Off the tree and currently powered.
    McstUncut,
    /// Off the tree and asleep after a cut.
    McstCut,
    /// Off the tree and restored by a graft.
    McstGraft,
}

impl TreeRole {
    pub fn label(self) -> &'static str {
        match self {
            TreeRole::McstTree => "MCST_TREE",
            TreeRole::McstUncut => "MCST_UNCUT",
            TreeRole::McstCut => "MCST_CUT",
            TreeRole::McstGraft => "MCST_GRAFT",
        }
    }
}

/// Per-interface state: operational power state plus its tree role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfaceState {
    pub oper: OperState,
    pub role: TreeRole,
}

/// Running energy total of one interface.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAccount {
    pub rating: PowerRating,
    t_active: CompensatedSum,
    t_idle: CompensatedSum,
    t_sleep: CompensatedSum,
    switches: u64,
    energy: CompensatedSum,
}

impl EnergyAccount {
    pub fn new(rating: PowerRating) -> Self {
        EnergyAccount {
            rating,
            t_active: CompensatedSum::default(),
            t_idle: CompensatedSum::default(),
            t_sleep: CompensatedSum::default(),
            switches: 0,
            energy: CompensatedSum::default(),
        }
    }

    /// Adds `duration` seconds spent in `state`.
    pub fn accrue(&mut self, state: OperState, duration: f64) -> Result<(), EnergyError> {
        if !(duration >= 0.0) {
            return Err(EnergyError::NegativeDuration(duration));
        }
        if duration == 0.0 {
            return Ok(());
        }
        let (bucket, power) = match state {
            OperState::Active => (&mut self.t_active, self.rating.p_active),
            OperState::Idle => (&mut self.t_idle, self.rating.p_idle),
            OperState::Sleep => (&mut self.t_sleep, self.rating.p_sleep),
        };
        bucket.add(duration);
        self.energy.add(power * duration);
        Ok(())
    }

    /// Counts one sleep-to-idle transition. `previous` is the state being left.
    pub fn record_wakeup(&mut self, previous: OperState) -> Result<(), EnergyError> {
        if previous != OperState::Sleep {
            return Err(EnergyError::InvalidTransition(previous));
        }
        self.switches += 1;
        self.energy.add(self.rating.e_c);
        Ok(())
    }

    /// Splits `awake` seconds of a sample window into active and idle time from the bits handled,
    /// then accrues `asleep` seconds of sleep.
    pub fn accrue_window(
        &mut self,
        awake: f64,
        asleep: f64,
        bits: f64,
        line_rate: f64,
    ) -> Result<(), EnergyError> {
        let active = if line_rate > 0.0 {
            (bits / line_rate).min(awake)
        } else {
            0.0
        };
        self.accrue(OperState::Active, active)?;
        self.accrue(OperState::Idle, awake - active)?;
        self.accrue(OperState::Sleep, asleep)
    }

    pub fn t_active(&self) -> f64 {
        self.t_active.value()
    }

    pub fn t_idle(&self) -> f64 {
        self.t_idle.value()
    }

    pub fn t_sleep(&self) -> f64 {
        self.t_sleep.value()
    }

    pub fn elapsed(&self) -> f64 {
        let mut s = CompensatedSum::default();
        s.add(self.t_active.value());
        s.add(self.t_idle.value());
        s.add(self.t_sleep.value());
        s.value()
    }

    pub fn switches(&self) -> u64 {
        self.switches
    }

    pub fn energy(&self) -> f64 {
        self.energy.value()
    }
}

/// Utilization `U_r = (b_T / br) / T`, clamped to `[0, 1]`.
pub fn utilization(bits: f64, line_rate: f64, window: f64) -> Result<f64, EnergyError> {
    if !(window > 0.0) {
        return Err(EnergyError::ZeroWindow);
    }
    if !(line_rate > 0.0) {
        return Err(EnergyError::ZeroRate);
    }
    Ok((bits / (line_rate * window)).clamp(0.0, 1.0))
}

/// One interface's measurement over a sample window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilizationSample {
    /// Bits transmitted plus received in the window.
    pub bits: f64,
    pub line_rate: f64,
    pub window: f64,
}

impl UtilizationSample {
    pub fn rate(&self) -> Result<f64, EnergyError> {
        utilization(self.bits, self.line_rate, self.window)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LoadClass {
    Underutilized,
    Normal,
    Overutilized,
}

/// The `(lower, upper)` utilization band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    lower: f64,
    upper: f64,
}

impl Thresholds {
    pub fn new(lower: f64, upper: f64) -> Result<Self, EnergyError> {
        if !(0.0..=1.0).contains(&lower) || !(0.0..=1.0).contains(&upper) || lower >= upper {
            return Err(EnergyError::InvalidThresholds { lower, upper });
        }
        Ok(Thresholds { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn classify(&self, utilization: f64) -> LoadClass {
        if utilization > self.upper {
            LoadClass::Overutilized
        } else if utilization < self.lower {
            LoadClass::Underutilized
        } else {
            LoadClass::Normal
        }
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            lower: 0.2,
            upper: 0.8,
        }
    }
}

/// Classifies `utilization` against `lower`/`upper` thresholds.
pub fn classify(utilization: f64, upper: f64, lower: f64) -> Result<LoadClass, EnergyError> {
    Ok(Thresholds::new(lower, upper)?.classify(utilization))
}

/// Sum of accumulated energy over all interfaces.
pub fn total_network_energy<'a>(accounts: impl IntoIterator<Item = &'a EnergyAccount>) -> f64 {
    let mut total = CompensatedSum::default();
    for a in accounts {
        total.add(a.energy());
    }
    total.value()
}
