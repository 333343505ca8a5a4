//! The on-disk network format: a UTF-8 JSON document describing vertices
//! with their rotations, edges, decorations, trivial components, and
//! optionally an orientation and a gate signage. Unknown keys are rejected;
//! serialization is canonical (sorted keys, two-space indent), so identical
//! networks produce identical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, HalfEdgeId, SpinNetwork, VertexId};
use crate::orient::{GateSignage, SmoothOrientation};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: u32,
    pub rotation: [u32; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: u32,
    pub halfedges: [u32; 2],
}

/// The document schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    /// edge id (as a string key) -> strand count
    pub decoration: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trivial_components: Vec<u32>,
    /// edge id -> [tail half-edge, head half-edge]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<BTreeMap<String, [u32; 2]>>,
    /// vertex id -> ordered gate pair
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gates: Option<BTreeMap<String, [u32; 2]>>,
}

/// A parsed document: the validated network plus any orientation data.
#[derive(Debug, Clone)]
pub struct ParsedNetwork {
    pub net: SpinNetwork,
    pub orientation: Option<SmoothOrientation>,
    pub gates: Option<GateSignage>,
}

fn parse_key(key: &str, what: &str) -> Result<u32> {
    key.parse()
        .map_err(|_| Error::Schema(format!("{what} key {key:?} is not an integer")))
}

impl NetworkFile {
    pub fn from_json(text: &str) -> Result<NetworkFile> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes") + "\n"
    }

    /// Validates and converts into a network (plus optional orientation).
    pub fn into_parsed(self) -> Result<ParsedNetwork> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| (VertexId(v.id), v.rotation.map(HalfEdgeId)))
            .collect();
        let edges: Vec<(EdgeId, [HalfEdgeId; 2])> = self
            .edges
            .iter()
            .map(|e| (EdgeId(e.id), e.halfedges.map(HalfEdgeId)))
            .collect();
        let mut decoration = BTreeMap::new();
        for (k, g) in &self.decoration {
            decoration.insert(EdgeId(parse_key(k, "decoration")?), *g);
        }
        let net = SpinNetwork::build(vertices, edges, decoration, self.trivial_components.clone())
            .map_err(|e| Error::Schema(e.to_string()))?;

        let orientation = match &self.orientation {
            None => None,
            Some(map) => {
                let mut direction = BTreeMap::new();
                for (k, [t, h]) in map {
                    direction.insert(
                        EdgeId(parse_key(k, "orientation")?),
                        (HalfEdgeId(*t), HalfEdgeId(*h)),
                    );
                }
                Some(SmoothOrientation::new(direction))
            }
        };
        let gates = match &self.gates {
            None => None,
            Some(map) => {
                let mut order = BTreeMap::new();
                for (k, [a, b]) in map {
                    order.insert(
                        VertexId(parse_key(k, "gates")?),
                        (HalfEdgeId(*a), HalfEdgeId(*b)),
                    );
                }
                Some(GateSignage::new(order))
            }
        };
        Ok(ParsedNetwork {
            net,
            orientation,
            gates,
        })
    }

    /// Canonical document for a network, optionally with orientation data.
    pub fn from_parts(
        net: &SpinNetwork,
        orientation: Option<&SmoothOrientation>,
        gates: Option<&GateSignage>,
    ) -> NetworkFile {
        NetworkFile {
            vertices: net
                .vertices()
                .iter()
                .map(|(v, rot)| VertexRecord {
                    id: v.0,
                    rotation: [rot[0].0, rot[1].0, rot[2].0],
                })
                .collect(),
            edges: net
                .edges()
                .iter()
                .map(|(e, pair)| EdgeRecord {
                    id: e.0,
                    halfedges: [pair[0].0, pair[1].0],
                })
                .collect(),
            decoration: net
                .decorations()
                .iter()
                .map(|(e, g)| (e.0.to_string(), *g))
                .collect(),
            trivial_components: net.trivial_components().to_vec(),
            orientation: orientation.map(|o| {
                o.directions()
                    .iter()
                    .map(|(e, (t, h))| (e.0.to_string(), [t.0, h.0]))
                    .collect()
            }),
            gates: gates.map(|g| {
                g.orders()
                    .iter()
                    .map(|(v, (a, b))| (v.0.to_string(), [a.0, b.0]))
                    .collect()
            }),
        }
    }
}

/// Parse a JSON document into a network.
pub fn parse(text: &str) -> Result<ParsedNetwork> {
    NetworkFile::from_json(text)?.into_parsed()
}

/// Serialize a network (with optional orientation data) canonically.
pub fn serialize(
    net: &SpinNetwork,
    orientation: Option<&SmoothOrientation>,
    gates: Option<&GateSignage>,
) -> String {
    NetworkFile::from_parts(net, orientation, gates).to_json()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;
    use crate::orient;

    #[test]
    fn round_trip_is_lossless() {
        for net in [
            graph::theta(2, 4, 2),
            graph::tetrahedron([2, 4, 2, 2, 2, 4]),
            graph::dumbbell(3, 1, 0),
            graph::trivial(5),
        ] {
            let text = serialize(&net, None, None);
            let parsed = parse(&text).unwrap();
            assert_eq!(parsed.net, net);
            assert_eq!(serialize(&parsed.net, None, None), text);
        }
    }

    #[test]
    fn round_trip_with_orientation() {
        let net = graph::tetrahedron([2; 6]);
        let o = orient::find_smooth_orientation(&net).unwrap();
        let g = orient::canonical_gate_signage(&net, &o).unwrap();
        let text = serialize(&net, Some(&o), Some(&g));
        let parsed = parse(&text).unwrap();
        assert_eq!(parsed.orientation.as_ref(), Some(&o));
        assert_eq!(parsed.gates.as_ref(), Some(&g));
        assert!(orient::validate_smooth(&parsed.net, parsed.orientation.as_ref().unwrap()));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"vertices":[],"edges":[],"decoration":{},"surprise":1}"#;
        let err = parse(text).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        assert!(err.to_string().contains("surprise"));
    }

    #[test]
    fn structural_problems_are_schema_errors() {
        // a half-edge used twice
        let text = r#"{
            "vertices": [{"id": 0, "rotation": [0, 0, 1]}],
            "edges": [{"id": 0, "halfedges": [0, 1]}],
            "decoration": {"0": 2}
        }"#;
        let err = parse(text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        // malformed JSON reports position
        let err = parse("{").unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn missing_rotation_is_rejected() {
        let text = r#"{
            "vertices": [{"id": 0}],
            "edges": [],
            "decoration": {}
        }"#;
        assert!(parse(text).is_err());
    }
}
