//! Problem-instance data model shared by the solver, the oracle and the
//! simulator.
//!
//! Units: CPU in abstract units, memory and disk in MB, battery in percent,
//! time in seconds.

use std::fmt;
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CoreError;
use crate::scalar::Scalar;

/// Number of priority levels `t`; priorities range over `1..=PRIORITY_LEVELS`.
pub const PRIORITY_LEVELS: u32 = 10;

/// A volunteer device offered for deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct ClientProfile<T> {
    pub id: usize,
    pub cpu_capacity: T,
    pub memory_capacity: T,
    pub disk_capacity: T,
    pub battery_level: T,
    /// Expected remaining stay in the current area.
    pub availability_secs: T,
    pub area_id: usize,
    /// Visit rate reported by the orchestrators.
    pub movements: T,
    pub priority: u32,
    #[serde(default)]
    pub rounds_served: u32,
}

/// Resources the learning service consumes on a client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct UtilizationProfile<T> {
    pub cpu: T,
    pub memory: T,
    pub battery: T,
    pub disk: T,
}

/// One flag per area; 1 means that area's orchestrator asked for deployments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AreaRequestVector {
    pub requested: Vec<u8>,
}

impl AreaRequestVector {
    pub fn none(area_count: usize) -> Self {
        Self {
            requested: vec![0; area_count],
        }
    }

    #[inline]
    pub fn is_requested(&self, area: usize) -> bool {
        self.requested.get(area).is_some_and(|&f| f == 1)
    }

    pub fn any(&self) -> bool {
        self.requested.contains(&1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct ObjectiveWeights<T> {
    pub w1: T,
    pub w2: T,
    pub w3: T,
    pub w4: T,
    pub w5: T,
}

impl<T: Scalar> ObjectiveWeights<T> {
    pub fn uniform() -> Self {
        let w = T::lit(0.2);
        Self {
            w1: w,
            w2: w,
            w3: w,
            w4: w,
            w5: w,
        }
    }

    pub fn as_array(&self) -> [T; 5] {
        [self.w1, self.w2, self.w3, self.w4, self.w5]
    }

    pub fn sum(&self) -> T {
        self.as_array().iter().fold(T::zero(), |acc, &w| acc + w)
    }

    pub fn sums_to_one(&self) -> bool {
        (self.sum() - T::one()).abs() <= T::weight_sum_tolerance()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct DeploymentThresholds<T> {
    /// Minimum time a selected client must stay reachable (`T`).
    pub min_round_time_secs: T,
    /// Clients with `movements >= movement_threshold` count as high-movement.
    pub movement_threshold: T,
    /// Fraction of the selected clients allowed to be high-movement.
    pub high_movement_fraction: T,
    pub min_selected: usize,
    pub max_selected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct ProblemInstance<T> {
    pub clients: Vec<ClientProfile<T>>,
    pub utilizations: Vec<UtilizationProfile<T>>,
    pub requests: AreaRequestVector,
    pub weights: ObjectiveWeights<T>,
    pub thresholds: DeploymentThresholds<T>,
    pub area_count: usize,
}

impl<T: Scalar> ProblemInstance<T> {
    #[inline]
    pub fn len(&self) -> usize {
        self.clients.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.clients.is_empty()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_instance(self)
    }
}

impl<T> ProblemInstance<T>
where
    T: Scalar + Serialize + for<'a> Deserialize<'a>,
{
    pub fn from_json_str(s: &str) -> Result<Self, CoreError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String, CoreError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CoreError> {
        let text =
            std::fs::read_to_string(path.as_ref()).map_err(|e| CoreError::io(path.as_ref(), e))?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CoreError> {
        std::fs::write(path.as_ref(), self.to_json_string()?)
            .map_err(|e| CoreError::io(path.as_ref(), e))
    }
}

/// Binary deployment decision, one gene per candidate client.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SelectionVector {
    genes: Vec<bool>,
}

impl SelectionVector {
    pub fn empty(n: usize) -> Self {
        Self {
            genes: vec![false; n],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self {
            genes: bits.iter().map(|&b| b != 0).collect(),
        }
    }

    pub fn from_indices(n: usize, selected: &[usize]) -> Self {
        let mut sel = Self::empty(n);
        for &i in selected {
            sel.genes[i] = true;
        }
        sel
    }

    /// Bit `i` of `mask` becomes gene `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self {
            genes: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.genes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.genes[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, on: bool) {
        self.genes[i] = on;
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.genes[i] = !self.genes[i];
    }

    pub fn genes(&self) -> &[bool] {
        &self.genes
    }

    pub fn count(&self) -> usize {
        self.genes.iter().filter(|&&g| g).count()
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.genes
            .iter()
            .enumerate()
            .filter(|(_, &g)| g)
            .map(|(i, _)| i)
    }

    pub fn bits(&self) -> Vec<u8> {
        self.genes.iter().map(|&g| g as u8).collect()
    }
}

impl fmt::Display for SelectionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &g in &self.genes {
            f.write_str(if g { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct GenesRepr {
    genes: Vec<u8>,
}

impl Serialize for SelectionVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GenesRepr { genes: self.bits() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SelectionVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = GenesRepr::deserialize(deserializer)?;
        if let Some(bad) = repr.genes.iter().find(|&&g| g > 1) {
            return Err(D::Error::custom(format!("gene value {bad} is not 0 or 1")));
        }
        Ok(Self::from_bits(&repr.genes))
    }
}

/// A broken type invariant found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceIssue {
    LengthMismatch {
        clients: usize,
        utilizations: usize,
    },
    NegativeCapacity {
        client: usize,
        field: &'static str,
    },
    BatteryOutOfRange {
        client: usize,
        value: f64,
    },
    AreaOutOfRange {
        client: usize,
        area: usize,
        area_count: usize,
    },
    PriorityOutOfRange {
        client: usize,
        priority: u32,
    },
    NegativeUtilization {
        client: usize,
        field: &'static str,
    },
    RequestLength {
        expected: usize,
        found: usize,
    },
    RequestFlag {
        area: usize,
        value: u8,
    },
    WeightOutOfRange {
        index: usize,
        value: f64,
    },
    WeightsSum {
        sum: f64,
    },
    NegativeRoundTime,
    HighMovementFractionOutOfRange {
        value: f64,
    },
    CardinalityBounds {
        min: usize,
        max: usize,
        n: usize,
    },
}

impl fmt::Display for InstanceIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LengthMismatch {
                clients,
                utilizations,
            } => {
                write!(
                    f,
                    "length mismatch: {clients} clients but {utilizations} utilizations"
                )
            }
            Self::NegativeCapacity { client, field } => {
                write!(f, "client {client}: negative {field}")
            }
            Self::BatteryOutOfRange { client, value } => {
                write!(f, "client {client}: battery {value} outside [0,100]")
            }
            Self::AreaOutOfRange {
                client,
                area,
                area_count,
            } => {
                write!(f, "area out of range: client {client} has area {area} but area_count is {area_count}")
            }
            Self::PriorityOutOfRange { client, priority } => {
                write!(
                    f,
                    "client {client}: priority {priority} outside 1..={PRIORITY_LEVELS}"
                )
            }
            Self::NegativeUtilization { client, field } => {
                write!(f, "client {client}: negative {field} utilization")
            }
            Self::RequestLength { expected, found } => {
                write!(f, "request vector has {found} entries, expected {expected}")
            }
            Self::RequestFlag { area, value } => {
                write!(f, "request flag for area {area} is {value}, not 0/1")
            }
            Self::WeightOutOfRange { index, value } => {
                write!(f, "weight w{} = {value} outside [0,1]", index + 1)
            }
            Self::WeightsSum { sum } => write!(f, "weights sum ≠ 1 (sum = {sum})"),
            Self::NegativeRoundTime => write!(f, "min_round_time_secs is negative"),
            Self::HighMovementFractionOutOfRange { value } => {
                write!(f, "high_movement_fraction {value} outside [0,1]")
            }
            Self::CardinalityBounds { min, max, n } => {
                write!(
                    f,
                    "cardinality bounds require 0 <= min ({min}) <= max ({max}) <= n ({n})"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<InstanceIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    /// `true` if any issue's message contains `needle`.
    pub fn mentions(&self, needle: &str) -> bool {
        self.issues.iter().any(|i| i.to_string().contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Lists every violated type invariant. Never aborts.
pub fn validate_instance<T: Scalar>(instance: &ProblemInstance<T>) -> ValidationReport {
    let mut issues = Vec::new();
    let n = instance.clients.len();
    let zero = T::zero();

    if instance.utilizations.len() != n {
        issues.push(InstanceIssue::LengthMismatch {
            clients: n,
            utilizations: instance.utilizations.len(),
        });
    }

    for (i, c) in instance.clients.iter().enumerate() {
        for (field, v) in [
            ("cpu_capacity", c.cpu_capacity),
            ("memory_capacity", c.memory_capacity),
            ("disk_capacity", c.disk_capacity),
            ("availability_secs", c.availability_secs),
            ("movements", c.movements),
        ] {
            if !(v >= zero) {
                issues.push(InstanceIssue::NegativeCapacity { client: i, field });
            }
        }
        if !(c.battery_level >= zero && c.battery_level <= T::lit(100.0)) {
            issues.push(InstanceIssue::BatteryOutOfRange {
                client: i,
                value: c.battery_level.as_f64(),
            });
        }
        if c.area_id >= instance.area_count {
            issues.push(InstanceIssue::AreaOutOfRange {
                client: i,
                area: c.area_id,
                area_count: instance.area_count,
            });
        }
        if !(1..=PRIORITY_LEVELS).contains(&c.priority) {
            issues.push(InstanceIssue::PriorityOutOfRange {
                client: i,
                priority: c.priority,
            });
        }
    }

    for (i, u) in instance.utilizations.iter().enumerate() {
        for (field, v) in [
            ("cpu", u.cpu),
            ("memory", u.memory),
            ("battery", u.battery),
            ("disk", u.disk),
        ] {
            if !(v >= zero) {
                issues.push(InstanceIssue::NegativeUtilization { client: i, field });
            }
        }
    }

    if instance.requests.requested.len() != instance.area_count {
        issues.push(InstanceIssue::RequestLength {
            expected: instance.area_count,
            found: instance.requests.requested.len(),
        });
    }
    for (area, &value) in instance.requests.requested.iter().enumerate() {
        if value > 1 {
            issues.push(InstanceIssue::RequestFlag { area, value });
        }
    }

    for (index, w) in instance.weights.as_array().into_iter().enumerate() {
        if !(w >= zero && w <= T::one()) {
            issues.push(InstanceIssue::WeightOutOfRange {
                index,
                value: w.as_f64(),
            });
        }
    }
    if !instance.weights.sums_to_one() {
        issues.push(InstanceIssue::WeightsSum {
            sum: instance.weights.sum().as_f64(),
        });
    }

    let th = &instance.thresholds;
    if !(th.min_round_time_secs >= zero) {
        issues.push(InstanceIssue::NegativeRoundTime);
    }
    if !(th.high_movement_fraction >= zero && th.high_movement_fraction <= T::one()) {
        issues.push(InstanceIssue::HighMovementFractionOutOfRange {
            value: th.high_movement_fraction.as_f64(),
        });
    }
    if th.min_selected > th.max_selected || th.max_selected > n {
        issues.push(InstanceIssue::CardinalityBounds {
            min: th.min_selected,
            max: th.max_selected,
            n,
        });
    }

    ValidationReport { issues }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn client(id: usize, area: usize, movements: f64, priority: u32) -> ClientProfile<f64> {
        ClientProfile {
            id,
            cpu_capacity: 4.0,
            memory_capacity: 2048.0,
            disk_capacity: 16000.0,
            battery_level: 80.0,
            availability_secs: 3600.0,
            area_id: area,
            movements,
            priority,
            rounds_served: 0,
        }
    }

    pub fn light_load() -> UtilizationProfile<f64> {
        UtilizationProfile {
            cpu: 1.0,
            memory: 512.0,
            battery: 5.0,
            disk: 1000.0,
        }
    }

    /// The three-client instance used by the objective examples.
    pub fn three_clients() -> ProblemInstance<f64> {
        ProblemInstance {
            clients: vec![
                client(0, 0, 3.0, 2),
                client(1, 1, 5.0, 4),
                client(2, 1, 7.0, 1),
            ],
            utilizations: vec![light_load(); 3],
            requests: AreaRequestVector {
                requested: vec![1, 0],
            },
            weights: ObjectiveWeights::uniform(),
            thresholds: DeploymentThresholds {
                min_round_time_secs: 600.0,
                movement_threshold: 100.0,
                high_movement_fraction: 0.5,
                min_selected: 0,
                max_selected: 3,
            },
            area_count: 2,
        }
    }
}
