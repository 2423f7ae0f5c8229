//! Run configuration and scale presets.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{parse_relation_group, NodeType};

/// Smallest explicit population the generator accepts.
pub const MIN_USERS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetName {
    Toy,
    Small,
    Medium,
    Large,
    Xlarge,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::Toy,
        PresetName::Small,
        PresetName::Medium,
        PresetName::Large,
        PresetName::Xlarge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Toy => "toy",
            PresetName::Small => "small",
            PresetName::Medium => "medium",
            PresetName::Large => "large",
            PresetName::Xlarge => "xlarge",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown preset '{s}'; expected one of toy, small, medium, large, xlarge"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalePreset {
    pub name: PresetName,
    pub n_users: usize,
    /// Default ring count for each of the three ring types.
    pub rings_per_type: usize,
}

impl PresetName {
    pub fn preset(self) -> ScalePreset {
        let (n_users, rings_per_type) = match self {
            PresetName::Toy => (500, 2),
            PresetName::Small => (2_000, 7),
            PresetName::Medium => (10_000, 30),
            PresetName::Large => (50_000, 180),
            PresetName::Xlarge => (200_000, 720),
        };
        ScalePreset {
            name: self,
            n_users,
            rings_per_type,
        }
    }
}

pub fn resolve_preset(name: &str) -> Result<ScalePreset> {
    Ok(name.parse::<PresetName>()?.preset())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Preset(PresetName),
    Users(usize),
}

impl Scale {
    pub fn n_users(self) -> usize {
        match self {
            Scale::Preset(p) => p.preset().n_users,
            Scale::Users(n) => n,
        }
    }

    /// Default rings per type: the preset's count, or the medium ratio
    /// (30 per 10,000 users) for explicit populations.
    pub fn default_rings_per_type(self) -> usize {
        match self {
            Scale::Preset(p) => p.preset().rings_per_type,
            Scale::Users(n) => ((n as f64) * 0.003).round() as usize,
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scale::Preset(p) => write!(f, "{p}"),
            Scale::Users(n) => write!(f, "{n} users"),
        }
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeRange {
    pub min: usize,
    pub max: usize,
}

impl SizeRange {
    pub const fn new(min: usize, max: usize) -> Self {
        SizeRange { min, max }
    }

    pub const fn exactly(n: usize) -> Self {
        SizeRange { min: n, max: n }
    }

    pub fn mean(&self) -> f64 {
        (self.min + self.max) as f64 / 2.0
    }

    pub fn contains(&self, v: usize) -> bool {
        (self.min..=self.max).contains(&v)
    }

    fn within(&self, outer: &SizeRange) -> bool {
        self.min >= outer.min && self.max <= outer.max
    }
}

impl fmt::Display for SizeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.min, self.max)
    }
}

/// Per-type ring size ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSizes {
    pub ticketing: SizeRange,
    pub ghost_reviewers: SizeRange,
    pub ghost_hotels: SizeRange,
    pub ato_compromised: SizeRange,
    pub ato_mules: SizeRange,
}

impl RingSizes {
    /// Documented hard bounds for each ring parameter.
    pub const BOUNDS: RingSizes = RingSizes {
        ticketing: SizeRange::new(3, 20),
        ghost_reviewers: SizeRange::new(10, 80),
        ghost_hotels: SizeRange::new(1, 3),
        ato_compromised: SizeRange::new(5, 30),
        ato_mules: SizeRange::new(2, 8),
    };

    /// Default sampling ranges. They sit inside [`RingSizes::BOUNDS`] and are
    /// narrowed so that 30 rings per type at 10,000 users lands near a 13.5%
    /// user fraud rate with ticketing hubs of ~15 users and ghost-hotel
    /// cliques of ~15 reviewers.
    pub const DEFAULT: RingSizes = RingSizes {
        ticketing: SizeRange::new(11, 20),
        ghost_reviewers: SizeRange::new(10, 21),
        ghost_hotels: SizeRange::new(1, 3),
        ato_compromised: SizeRange::new(6, 22),
        ato_mules: SizeRange::new(2, 8),
    };

    fn fields(&self) -> [(&'static str, SizeRange); 5] {
        [
            ("ticketing", self.ticketing),
            ("ghost_reviewers", self.ghost_reviewers),
            ("ghost_hotels", self.ghost_hotels),
            ("ato_compromised", self.ato_compromised),
            ("ato_mules", self.ato_mules),
        ]
    }

    pub fn validate(&self, widen_bounds: bool) -> Result<()> {
        for ((name, range), (_, bound)) in self.fields().into_iter().zip(Self::BOUNDS.fields()) {
            if range.min > range.max {
                return Err(Error::Config(format!("ring size range {name} {range} is empty")));
            }
            if range.min == 0 {
                return Err(Error::Config(format!("ring size range {name} {range} admits zero")));
            }
            if !widen_bounds && !range.within(&bound) {
                return Err(Error::Config(format!(
                    "ring size range {name} {range} lies outside the documented bounds {bound}; \
                     set widen_bounds to allow it"
                )));
            }
        }
        Ok(())
    }

    /// Expected fraud users contributed by one ring of each type.
    pub fn expected_members(&self) -> [f64; 3] {
        [
            self.ticketing.mean(),
            self.ghost_reviewers.mean(),
            self.ato_compromised.mean(),
        ]
    }
}

impl Default for RingSizes {
    fn default() -> Self {
        RingSizes::DEFAULT
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub scale: Scale,
    pub seed: u64,
    pub n_ticketing_rings: usize,
    pub n_ghost_hotel_rings: usize,
    pub n_ato_rings: usize,
    pub ring_sizes: RingSizes,
    /// Accept ring sizes outside [`RingSizes::BOUNDS`].
    pub widen_bounds: bool,
    pub fraud_rate_target: Option<f64>,
    pub feature_exclusions: BTreeSet<String>,
    pub relation_exclusions: BTreeSet<String>,
}

impl GeneratorConfig {
    pub fn new(scale: Scale, seed: u64) -> Self {
        let rings = scale.default_rings_per_type();
        GeneratorConfig {
            scale,
            seed,
            n_ticketing_rings: rings,
            n_ghost_hotel_rings: rings,
            n_ato_rings: rings,
            ring_sizes: RingSizes::DEFAULT,
            widen_bounds: false,
            fraud_rate_target: None,
            feature_exclusions: BTreeSet::new(),
            relation_exclusions: BTreeSet::new(),
        }
    }

    pub fn preset(name: PresetName, seed: u64) -> Self {
        GeneratorConfig::new(Scale::Preset(name), seed)
    }

    pub fn with_rings(mut self, ticketing: usize, ghost: usize, ato: usize) -> Self {
        self.n_ticketing_rings = ticketing;
        self.n_ghost_hotel_rings = ghost;
        self.n_ato_rings = ato;
        self
    }

    pub fn n_users(&self) -> usize {
        self.scale.n_users()
    }

    pub fn ring_counts(&self) -> [usize; 3] {
        [self.n_ticketing_rings, self.n_ghost_hotel_rings, self.n_ato_rings]
    }

    pub fn validate(&self) -> Result<()> {
        if let Scale::Users(n) = self.scale {
            if n < MIN_USERS {
                return Err(Error::Config(format!(
                    "explicit user count {n} is below the minimum of {MIN_USERS}"
                )));
            }
        }
        self.ring_sizes.validate(self.widen_bounds)?;
        if let Some(rate) = self.fraud_rate_target {
            if !(rate > 0.0 && rate < 1.0) {
                return Err(Error::Config(format!("fraud_rate_target must lie in (0, 1), got {rate}")));
            }
        }
        for name in &self.relation_exclusions {
            parse_relation_group(name)?;
        }
        for name in &self.feature_exclusions {
            if NodeType::User.feature_index(name).is_none() {
                return Err(Error::Config(format!(
                    "unknown user feature '{name}'; expected one of {}",
                    NodeType::User.features().join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Reads a TOML config file. See [`ConfigFile`] for the key names.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))?;
        file.into_config()
    }
}

/// On-disk config layout. Every key is optional; absent keys take the
/// preset defaults.
///
/// ```toml
/// scale = "medium"        # or: users = 5000
/// seed = 42
/// n_ticketing_rings = 30
/// n_ghost_hotel_rings = 30
/// n_ato_rings = 30
/// fraud_rate_target = 0.13
/// feature_exclusions = ["distinct_device_count"]
/// relation_exclusions = ["uses_device"]
/// widen_bounds = false
///
/// [ring_sizes]
/// ticketing = [11, 20]
/// ghost_reviewers = [10, 21]
/// ghost_hotels = [1, 3]
/// ato_compromised = [6, 22]
/// ato_mules = [2, 8]
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scale: Option<String>,
    pub users: Option<usize>,
    pub seed: Option<u64>,
    pub n_ticketing_rings: Option<usize>,
    pub n_ghost_hotel_rings: Option<usize>,
    pub n_ato_rings: Option<usize>,
    pub fraud_rate_target: Option<f64>,
    #[serde(default)]
    pub feature_exclusions: Vec<String>,
    #[serde(default)]
    pub relation_exclusions: Vec<String>,
    #[serde(default)]
    pub widen_bounds: bool,
    pub ring_sizes: Option<RingSizeFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSizeFile {
    pub ticketing: Option<[usize; 2]>,
    pub ghost_reviewers: Option<[usize; 2]>,
    pub ghost_hotels: Option<[usize; 2]>,
    pub ato_compromised: Option<[usize; 2]>,
    pub ato_mules: Option<[usize; 2]>,
}

impl ConfigFile {
    pub fn into_config(self) -> Result<GeneratorConfig> {
        let scale = match (self.scale.as_deref(), self.users) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("set either 'scale' or 'users', not both".into()))
            }
            (Some(name), None) => Scale::Preset(name.parse()?),
            (None, Some(n)) => Scale::Users(n),
            (None, None) => Scale::Preset(PresetName::Medium),
        };
        let mut config = GeneratorConfig::new(scale, self.seed.unwrap_or(42));
        if let Some(n) = self.n_ticketing_rings {
            config.n_ticketing_rings = n;
        }
        if let Some(n) = self.n_ghost_hotel_rings {
            config.n_ghost_hotel_rings = n;
        }
        if let Some(n) = self.n_ato_rings {
            config.n_ato_rings = n;
        }
        config.fraud_rate_target = self.fraud_rate_target;
        config.feature_exclusions = self.feature_exclusions.into_iter().collect();
        config.relation_exclusions = self.relation_exclusions.into_iter().collect();
        config.widen_bounds = self.widen_bounds;
        if let Some(sizes) = self.ring_sizes {
            let set = |slot: &mut SizeRange, v: Option<[usize; 2]>| {
                if let Some([lo, hi]) = v {
                    *slot = SizeRange::new(lo, hi);
                }
            };
            set(&mut config.ring_sizes.ticketing, sizes.ticketing);
            set(&mut config.ring_sizes.ghost_reviewers, sizes.ghost_reviewers);
            set(&mut config.ring_sizes.ghost_hotels, sizes.ghost_hotels);
            set(&mut config.ring_sizes.ato_compromised, sizes.ato_compromised);
            set(&mut config.ring_sizes.ato_mules, sizes.ato_mules);
        }
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medium_preset_is_ten_thousand_users() {
        let p = resolve_preset("medium").unwrap();
        assert_eq!(p.n_users, 10_000);
        assert_eq!(p.rings_per_type, 30);
    }

    #[test]
    fn nominal_presets_are_exact() {
        let users: Vec<usize> = PresetName::ALL.iter().map(|p| p.preset().n_users).collect();
        assert_eq!(users, vec![500, 2_000, 10_000, 50_000, 200_000]);
    }

    #[test]
    fn unknown_preset_names_the_valid_set() {
        let err = resolve_preset("mega").unwrap_err().to_string();
        assert!(err.contains("mega") && err.contains("toy") && err.contains("xlarge"), "{err}");
    }

    #[test]
    fn default_sizes_sit_inside_bounds() {
        RingSizes::DEFAULT.validate(false).unwrap();
    }

    #[test]
    fn out_of_bounds_sizes_need_widening() {
        let mut config = GeneratorConfig::preset(PresetName::Small, 1);
        config.ring_sizes.ticketing = SizeRange::new(3, 30);
        assert!(config.validate().is_err());
        config.widen_bounds = true;
        config.validate().unwrap();
        config.ring_sizes.ticketing = SizeRange::new(5, 4);
        assert!(config.validate().is_err());
    }

    #[test]
    fn tiny_explicit_population_rejected() {
        assert!(GeneratorConfig::new(Scale::Users(9), 1).validate().is_err());
        GeneratorConfig::new(Scale::Users(10), 1).validate().unwrap();
    }

    #[test]
    fn fraud_rate_target_must_be_a_fraction() {
        let mut config = GeneratorConfig::preset(PresetName::Toy, 1);
        config.fraud_rate_target = Some(1.0);
        assert!(config.validate().is_err());
    }

    #[test]
    fn toml_round_trip_of_documented_keys() {
        let config = GeneratorConfig::from_toml_str(
            r#"
            scale = "small"
            seed = 7
            n_ato_rings = 3
            feature_exclusions = ["distinct_device_count"]
            [ring_sizes]
            ticketing = [3, 5]
            "#,
        )
        .unwrap();
        assert_eq!(config.scale, Scale::Preset(PresetName::Small));
        assert_eq!(config.seed, 7);
        assert_eq!(config.ring_counts(), [7, 7, 3]);
        assert_eq!(config.ring_sizes.ticketing, SizeRange::new(3, 5));
        assert!(config.feature_exclusions.contains("distinct_device_count"));

        assert!(GeneratorConfig::from_toml_str("colour = 1").is_err());
        assert!(GeneratorConfig::from_toml_str("scale = \"toy\"\nusers = 50").is_err());
    }
}
