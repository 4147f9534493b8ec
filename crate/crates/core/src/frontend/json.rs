//! JSON e-graph documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportDocument {
    pub classes: Vec<ExportClass>,
    pub bindings: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportClass {
    pub id: u32,
    pub sort: String,
    pub nodes: Vec<ExportNode>,
}

/// A node. Literal nodes use their sort name as `op` and carry `literal`
/// (`null` for the unit value); other nodes omit it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportNode {
    pub op: String,
    pub children: Vec<u32>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        deserialize_with = "present"
    )]
    pub literal: Option<serde_json::Value>,
}

// distinguishes `"literal": null` from an absent key
fn present<'de, D: Deserializer<'de>>(d: D) -> Result<Option<serde_json::Value>, D::Error> {
    serde_json::Value::deserialize(d).map(Some)
}

impl ExportDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("export document serializes")
    }
}
