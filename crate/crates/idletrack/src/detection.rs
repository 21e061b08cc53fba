use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bbox::BBox;
use crate::error::{Error, Result};

/// Machinery class. Three classes are built in; anything else is a custom
/// label carried through the pipeline untouched.
///
/// Serialized as a bare string for labels the built-in table can map back
/// (`"excavator"`, `"class_7"`, ...) and as an `{id, name}` table otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassLabel {
    pub id: u32,
    pub name: String,
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if ClassLabel::from_id(self.id).name == self.name {
            serializer.serialize_str(&self.name)
        } else {
            let mut s = serializer.serialize_struct("ClassLabel", 2)?;
            s.serialize_field("id", &self.id)?;
            s.serialize_field("name", &self.name)?;
            s.end()
        }
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct LabelVisitor;

        impl<'de> Visitor<'de> for LabelVisitor {
            type Value = ClassLabel;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a class name, a numeric class id, or an {id, name} table")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ClassLabel, E> {
                if let Some(label) = ClassLabel::from_name(v) {
                    return Ok(label);
                }
                if let Some(id) = v.strip_prefix("class_").and_then(|s| s.parse::<u32>().ok()) {
                    return Ok(ClassLabel::from_id(id));
                }
                Err(E::custom(format!(
                    "unknown class name {v:?}; use a built-in name, class_<id>, or {{id, name}}"
                )))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ClassLabel, E> {
                let id = u32::try_from(v)
                    .map_err(|_| E::custom(format!("class id {v} out of range")))?;
                Ok(ClassLabel::from_id(id))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ClassLabel, E> {
                let id = u32::try_from(v)
                    .map_err(|_| E::custom(format!("class id {v} out of range")))?;
                Ok(ClassLabel::from_id(id))
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<ClassLabel, A::Error> {
                let mut id: Option<u32> = None;
                let mut name: Option<String> = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "id" => id = Some(map.next_value()?),
                        "name" => name = Some(map.next_value()?),
                        other => return Err(de::Error::unknown_field(other, &["id", "name"])),
                    }
                }
                let id = id.ok_or_else(|| de::Error::missing_field("id"))?;
                let name = name.ok_or_else(|| de::Error::missing_field("name"))?;
                ClassLabel::new(id, name).map_err(|e| de::Error::custom(e.to_string()))
            }
        }

        deserializer.deserialize_any(LabelVisitor)
    }
}

pub const EXCAVATOR_ID: u32 = 0;
pub const DUMP_TRUCK_ID: u32 = 1;
pub const CEMENT_MIXER_TRUCK_ID: u32 = 2;

impl ClassLabel {
    pub fn new(id: u32, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::invalid("class label", "name must be nonempty"));
        }
        Ok(ClassLabel { id, name })
    }

    pub fn excavator() -> Self {
        ClassLabel { id: EXCAVATOR_ID, name: "excavator".into() }
    }

    pub fn dump_truck() -> Self {
        ClassLabel { id: DUMP_TRUCK_ID, name: "dump_truck".into() }
    }

    pub fn cement_mixer_truck() -> Self {
        ClassLabel { id: CEMENT_MIXER_TRUCK_ID, name: "cement_mixer_truck".into() }
    }

    /// Maps a numeric class id to its built-in label, or a synthetic
    /// `class_<id>` label for ids outside the built-in table.
    pub fn from_id(id: u32) -> Self {
        match id {
            EXCAVATOR_ID => Self::excavator(),
            DUMP_TRUCK_ID => Self::dump_truck(),
            CEMENT_MIXER_TRUCK_ID => Self::cement_mixer_truck(),
            other => ClassLabel { id: other, name: format!("class_{other}") },
        }
    }

    /// Inverse of the built-in name table.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "excavator" => Some(Self::excavator()),
            "dump_truck" => Some(Self::dump_truck()),
            "cement_mixer_truck" => Some(Self::cement_mixer_truck()),
            _ => None,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Persistent track identity. Positive, unique per stream, never reused.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct TrackId(pub u64);

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One detector output: a box with confidence and class on a given frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame: u64,
    pub bbox: BBox,
    pub confidence: f64,
    pub class: ClassLabel,
}

impl Detection {
    pub fn new(frame: u64, bbox: BBox, confidence: f64, class: ClassLabel) -> Result<Self> {
        bbox.validate()?;
        if !(0.0..=1.0).contains(&confidence) || !confidence.is_finite() {
            return Err(Error::invalid(
                "detection",
                format!("confidence must be in [0,1], got {confidence}"),
            ));
        }
        Ok(Detection { frame, bbox, confidence, class })
    }
}
