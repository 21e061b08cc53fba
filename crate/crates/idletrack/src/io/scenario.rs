//! Scenario file: the simulator spec as TOML.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::simulator::ScenarioSpec;

pub const SCENARIO_VERSION: u32 = 1;

pub fn read_scenario_str(text: &str) -> Result<ScenarioSpec> {
    let mut table: toml::Table =
        toml::from_str(text).map_err(|e| Error::invalid("scenario file", e.to_string()))?;
    check_version(&mut table, "scenario", SCENARIO_VERSION)?;
    // deserialize from the parsed table so errors carry the field path
    let spec: ScenarioSpec = serde_path_to_error::deserialize(toml::Value::Table(table))
        .map_err(|e| Error::invalid("scenario file", format!("{}: {}", e.path(), e.inner())))?;
    spec.validate()?;
    Ok(spec)
}

/// Pops and checks the `version` key of a TOML document.
pub(crate) fn check_version(
    table: &mut toml::Table,
    format: &'static str,
    expected: u32,
) -> Result<()> {
    let found = table
        .remove("version")
        .and_then(|v| v.as_integer())
        .ok_or_else(|| Error::invalid(format, "missing integer `version` field"))?;
    if found != expected as i64 {
        return Err(Error::VersionMismatch {
            format,
            found: found.try_into().unwrap_or(u32::MAX),
            expected,
        });
    }
    Ok(())
}

pub fn read_scenario(path: impl AsRef<Path>) -> Result<ScenarioSpec> {
    read_scenario_str(&fs::read_to_string(path)?)
}

pub fn write_scenario(path: impl AsRef<Path>, spec: &ScenarioSpec) -> Result<()> {
    spec.validate()?;
    let body = toml::to_string(spec).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(path, format!("version = {SCENARIO_VERSION}\n{body}"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbox::BBox;
    use crate::detection::ClassLabel;
    use crate::simulator::{MachineSpec, MotionMode, MotionScript, MotionSegment, NoiseSpec};

    const SAMPLE: &str = r#"
version = 1
frame_count = 100
frame_width = 640.0
frame_height = 640.0
fps = 10.0
seed = 42

[noise]
miss_prob = 0.05
bbox_jitter_std = 1.5
confidence_mean = 0.85
confidence_std = 0.1
false_positive_rate = 0.2

[[machines]]
class = "excavator"
bbox = { x = 100.0, y = 100.0, w = 60.0, h = 40.0 }
occlusions = [[40, 55]]

[[machines.script]]
frames = 50
mode = "stationary"
jitter_std = 0.0

[[machines.script]]
frames = 50
mode = "linear"
vx = 2.0
vy = -1.0

[[machines]]
class = "dump_truck"
bbox = { x = 400.0, y = 300.0, w = 80.0, h = 50.0 }

[[machines.script]]
frames = 100
mode = "stop_go"
period = 20
duty = 0.5
vx = 3.0
vy = 0.0
"#;

    #[test]
    fn parses_a_full_scenario() {
        let spec = read_scenario_str(SAMPLE).unwrap();
        assert_eq!(spec.frame_count, 100);
        assert_eq!(spec.machines.len(), 2);
        assert_eq!(spec.machines[0].class, ClassLabel::excavator());
        assert_eq!(spec.machines[0].occlusions, vec![(40, 55)]);
        assert_eq!(
            spec.machines[0].script.segments[1].mode,
            MotionMode::Linear { vx: 2.0, vy: -1.0 }
        );
        assert_eq!(
            spec.machines[1].script.segments[0].mode,
            MotionMode::StopGo { period: 20, duty: 0.5, vx: 3.0, vy: 0.0 }
        );
        assert_eq!(spec.noise.miss_prob, 0.05);
    }

    #[test]
    fn round_trips_through_write() {
        let spec = read_scenario_str(SAMPLE).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.toml");
        write_scenario(&path, &spec).unwrap();
        let again = read_scenario(&path).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn negative_duration_is_rejected_with_field_path() {
        let broken = SAMPLE.replace("frames = 50", "frames = -3");
        let err = read_scenario_str(&broken).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("frames") || msg.contains("script"), "unhelpful error: {msg}");
    }

    #[test]
    fn zero_duration_is_rejected_with_field_path() {
        let broken = SAMPLE.replacen("frames = 50", "frames = 0", 1);
        let err = read_scenario_str(&broken).unwrap_err();
        assert!(err.to_string().contains("machines[0].script[0].frames"), "{err}");
    }

    #[test]
    fn version_is_checked() {
        let broken = SAMPLE.replace("version = 1", "version = 2");
        assert!(matches!(
            read_scenario_str(&broken),
            Err(Error::VersionMismatch { format: "scenario", .. })
        ));
    }

    #[test]
    fn custom_class_table_form() {
        let spec = ScenarioSpec {
            frame_count: 10,
            frame_width: 640.0,
            frame_height: 640.0,
            fps: 10.0,
            machines: vec![MachineSpec {
                class: ClassLabel::new(7, "crane").unwrap(),
                bbox: BBox::new(10.0, 10.0, 20.0, 20.0).unwrap(),
                script: MotionScript {
                    segments: vec![MotionSegment {
                        frames: 10,
                        mode: MotionMode::Stationary { jitter_std: 0.0 },
                    }],
                },
                occlusions: vec![],
            }],
            noise: NoiseSpec::default(),
            seed: 1,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.toml");
        write_scenario(&path, &spec).unwrap();
        let again = read_scenario(&path).unwrap();
        assert_eq!(again.machines[0].class, ClassLabel::new(7, "crane").unwrap());
    }
}
