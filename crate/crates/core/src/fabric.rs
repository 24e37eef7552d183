//! Multi-tier compute/network infrastructure.
//!
//! Nodes carry a capacity per resource type and a tier label. Network capacity
//! is node-local (the ingress budget of the node hosting a function); there is
//! no link topology.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::validate::Violation;

/// Kind of resource a node provides and a function consumes.
///
/// Compute is measured in CPU cores (fractional allowed), network in Mbps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResourceType {
    Compute,
    Network,
    Other(String),
}

impl ResourceType {
    pub fn as_str(&self) -> &str {
        match self {
            ResourceType::Compute => "com",
            ResourceType::Network => "net",
            ResourceType::Other(s) => s,
        }
    }

    pub fn builtins() -> [ResourceType; 2] {
        [ResourceType::Compute, ResourceType::Network]
    }
}

impl fmt::Display for ResourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResourceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "" => Err(Error::InvalidInput("empty resource type".into())),
            "com" | "compute" => Ok(ResourceType::Compute),
            "net" | "network" => Ok(ResourceType::Network),
            other => Ok(ResourceType::Other(other.to_string())),
        }
    }
}

impl Serialize for ResourceType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ResourceType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tier(pub String);

impl Tier {
    pub fn new(name: impl Into<String>) -> Self {
        Tier(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeNode {
    pub id: String,
    pub tier: Tier,
    pub capacity: BTreeMap<ResourceType, f64>,
}

impl ComputeNode {
    pub fn new(id: impl Into<String>, tier: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            tier: Tier::new(tier),
            capacity: BTreeMap::new(),
        }
    }

    pub fn with_capacity(mut self, resource: ResourceType, amount: f64) -> Self {
        self.capacity.insert(resource, amount);
        self
    }

    /// Capacity for `resource`, zero when undeclared.
    pub fn capacity_of(&self, resource: &ResourceType) -> f64 {
        self.capacity.get(resource).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Infrastructure {
    pub nodes: Vec<ComputeNode>,
    pub resource_types: Vec<ResourceType>,
    pub tiers: Vec<Tier>,
}

/// Per-(function, node, resource) allocation amounts.
pub type NodeAllocations = BTreeMap<(String, String, ResourceType), f64>;

/// Remaining capacity per (node, resource).
pub type CapacityMap = BTreeMap<(String, ResourceType), f64>;

impl Infrastructure {
    pub fn new(tiers: &[&str]) -> Self {
        Self {
            nodes: Vec::new(),
            resource_types: ResourceType::builtins().to_vec(),
            tiers: tiers.iter().map(|t| Tier::new(*t)).collect(),
        }
    }

    pub fn with_node(mut self, node: ComputeNode) -> Self {
        self.nodes.push(node);
        self
    }

    pub fn node(&self, id: &str) -> Option<&ComputeNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn resource_index(&self, resource: &ResourceType) -> Option<usize> {
        self.resource_types.iter().position(|r| r == resource)
    }

    pub fn nodes_in_tier<'a>(&'a self, tier: &'a Tier) -> impl Iterator<Item = &'a ComputeNode> {
        self.nodes.iter().filter(move |n| &n.tier == tier)
    }
}

pub fn validate_infrastructure(infra: &Infrastructure) -> Vec<Violation> {
    let mut out = Vec::new();

    for builtin in ResourceType::builtins() {
        if !infra.resource_types.contains(&builtin) {
            out.push(Violation::new(
                "infrastructure",
                format!("built-in resource type {builtin} not declared"),
            ));
        }
    }
    let mut seen = BTreeSet::new();
    for r in &infra.resource_types {
        if !seen.insert(r) {
            out.push(Violation::new(
                "infrastructure",
                format!("duplicate resource type {r}"),
            ));
        }
    }
    let mut seen = BTreeSet::new();
    for t in &infra.tiers {
        if !seen.insert(t) {
            out.push(Violation::new("infrastructure", format!("duplicate tier {t}")));
        }
    }

    let mut ids = BTreeSet::new();
    for node in &infra.nodes {
        let subject = format!("node {}", node.id);
        if !ids.insert(node.id.as_str()) {
            out.push(Violation::new(&subject, format!("duplicate node id {}", node.id)));
        }
        if !infra.tiers.contains(&node.tier) {
            out.push(Violation::new(
                &subject,
                format!("tier {} not declared", node.tier),
            ));
        }
        for r in &infra.resource_types {
            if !node.capacity.contains_key(r) {
                out.push(Violation::new(&subject, format!("missing capacity for {r}")));
            }
        }
        for (r, &cap) in &node.capacity {
            if !infra.resource_types.contains(r) {
                out.push(Violation::new(
                    &subject,
                    format!("capacity for undeclared resource type {r}"),
                ));
            }
            if !cap.is_finite() {
                out.push(Violation::new(&subject, format!("non-finite capacity for {r}")));
            } else if cap < 0.0 {
                out.push(Violation::new(&subject, format!("negative capacity for {r}")));
            }
        }
    }
    out
}

/// Capacity left on each node after subtracting `allocations`.
///
/// Oversubscription shows up as a negative entry; it is not an error here.
pub fn remaining_capacity(
    infra: &Infrastructure,
    allocations: &NodeAllocations,
) -> Result<CapacityMap> {
    let mut remaining: CapacityMap = infra
        .nodes
        .iter()
        .flat_map(|n| {
            infra
                .resource_types
                .iter()
                .map(move |r| ((n.id.clone(), r.clone()), n.capacity_of(r)))
        })
        .collect();

    for ((function, node, resource), &amount) in allocations {
        if infra.node(node).is_none() {
            return Err(Error::unknown("node", node.as_str()));
        }
        if infra.resource_index(resource).is_none() {
            return Err(Error::unknown("resource type", resource.as_str()));
        }
        if !(amount >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "allocation of {resource} to {function} on {node} is negative"
            )));
        }
        if let Some(slot) = remaining.get_mut(&(node.clone(), resource.clone())) {
            *slot -= amount;
        }
    }
    Ok(remaining)
}
