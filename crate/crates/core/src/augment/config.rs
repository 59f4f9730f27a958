use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classes;
use crate::database::DatabaseConfig;
use crate::error::{Error, Result};
use crate::sensor::SensorModel;

/// Every knob of the augmentation pipeline. Deserialized from JSON with
/// unknown keys rejected; omitted keys take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    /// Probability of applying global augmentation to the frame.
    pub p_global: f64,
    /// Probability of fusing the frame with a partner scene.
    pub p_fusion: f64,
    /// Probability of running the class-balancing injection loop.
    pub p_inject: f64,
    /// Successful injections allowed per frame.
    pub max_injections: u32,
    /// Target point share for each injection class.
    pub desired_share: f64,
    pub injection_classes: Vec<u16>,
    /// Radians; bounds the partner rotation in fusion.
    pub fusion_rotation_limit: f64,
    /// Radians; bounds global and instance rotations.
    pub global_rotation_limit: f64,
    pub point_drop_rate: f64,
    /// Meters; range differences within this tolerance are ties.
    pub range_epsilon: f64,
    /// Injection attempts are capped at `max_attempts_factor · max_injections`.
    pub max_attempts_factor: u32,
    pub seed: u64,
    /// Smallest instance accepted into the database.
    pub min_points: usize,
    /// Whether an instance may be injected into the frame it was extracted from.
    pub allow_self_injection: bool,
    pub sensor: SensorModel,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            p_global: 0.5,
            p_fusion: 0.3,
            p_inject: 0.5,
            max_injections: 3,
            desired_share: 0.02,
            injection_classes: classes::default_injection_classes(),
            fusion_rotation_limit: 10.0_f64.to_radians(),
            global_rotation_limit: std::f64::consts::PI,
            point_drop_rate: 0.05,
            range_epsilon: 0.05,
            max_attempts_factor: 10,
            seed: 0,
            min_points: 20,
            allow_self_injection: true,
            sensor: SensorModel::default(),
        }
    }
}

impl AugmentConfig {
    /// All stage probabilities set to zero: the pipeline becomes the identity.
    pub fn disabled() -> Self {
        Self {
            p_global: 0.0,
            p_fusion: 0.0,
            p_inject: 0.0,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, p) in [
            ("p_global", self.p_global),
            ("p_fusion", self.p_fusion),
            ("p_inject", self.p_inject),
            ("point_drop_rate", self.point_drop_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(0.0..1.0).contains(&self.desired_share) {
            return bad(format!("desired_share must lie in [0, 1), got {}", self.desired_share));
        }
        for (name, limit) in [
            ("fusion_rotation_limit", self.fusion_rotation_limit),
            ("global_rotation_limit", self.global_rotation_limit),
        ] {
            if !(0.0..=std::f64::consts::PI).contains(&limit) {
                return bad(format!("{name} must lie in [0, π], got {limit}"));
            }
        }
        if !(self.range_epsilon >= 0.0 && self.range_epsilon.is_finite()) {
            return bad(format!("range_epsilon must be finite and non-negative, got {}", self.range_epsilon));
        }
        self.sensor.validate()
    }

    pub fn database_config(&self) -> DatabaseConfig {
        DatabaseConfig {
            sensor: self.sensor,
            classes: self.injection_classes.clone(),
            min_points: self.min_points,
        }
    }

    /// Injection classes, sorted and deduplicated.
    pub fn sorted_classes(&self) -> Vec<u16> {
        let mut c = self.injection_classes.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn max_attempts(&self) -> u32 {
        self.max_attempts_factor.saturating_mul(self.max_injections)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = AugmentConfig::default();
        assert_eq!((c.p_global, c.p_fusion, c.p_inject), (0.5, 0.3, 0.5));
        assert_eq!(c.max_injections, 3);
        assert_eq!(c.desired_share, 0.02);
        assert!((c.fusion_rotation_limit - 0.17453).abs() < 1e-5);
        assert_eq!(c.max_attempts(), 30);
        c.validate().unwrap();
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c = AugmentConfig::from_json(r#"{"p_fusion": 0.0, "seed": 7}"#).unwrap();
        assert_eq!(c.p_fusion, 0.0);
        assert_eq!(c.seed, 7);
        assert_eq!(c.p_inject, 0.5);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = AugmentConfig::from_json(r#"{"p_fuson": 0.1}"#).unwrap_err();
        assert!(err.to_string().contains("p_fuson"), "{err}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(AugmentConfig::from_json(r#"{"p_global": 1.5}"#).is_err());
        assert!(AugmentConfig::from_json(r#"{"desired_share": 1.0}"#).is_err());
        assert!(AugmentConfig::from_json(r#"{"fusion_rotation_limit": 4.0}"#).is_err());
        assert!(AugmentConfig::from_json(r#"{"range_epsilon": -0.1}"#).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = AugmentConfig::default();
        assert_eq!(AugmentConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
