use serde::{Deserialize, Serialize};

use super::{MergeReason, ModelStats, TermModel};
use crate::parser::print_signature;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Serialisable form of a term model (`.qmodel`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDump {
    pub format_version: u32,
    pub signature: String,
    pub depth: usize,
    pub saturated: bool,
    pub stats: ModelStats,
    pub sorts: Vec<SortDump>,
    pub merges: Vec<MergeDump>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortDump {
    pub sort: String,
    pub index_classes: Vec<IndexClassDump>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexClassDump {
    pub index: Vec<String>,
    pub classes: Vec<ClassDump>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDump {
    pub id: usize,
    pub representative: String,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeDump {
    pub left: String,
    pub right: String,
    /// Path constructor name, or `congruence`.
    pub reason: String,
    pub round: usize,
}

pub(super) fn dump(m: &TermModel) -> ModelDump {
    let schema = m.schema();
    let sorts = (0..schema.sorts.len())
        .map(|s| SortDump {
            sort: schema.sorts[s].name.clone(),
            index_classes: m
                .index_classes(s)
                .into_iter()
                .map(|(idx, cs)| IndexClassDump {
                    index: m.show_index(s, &idx),
                    classes: cs
                        .into_iter()
                        .map(|c| {
                            let class = m.class(s, c);
                            ClassDump {
                                id: c,
                                representative: m.show_term(class.rep),
                                members: class.members.iter().map(|&t| m.show_term(t)).collect(),
                            }
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    let merges = m
        .merges()
        .iter()
        .map(|mg| MergeDump {
            left: m.show_term(mg.left),
            right: m.show_term(mg.right),
            reason: match &mg.reason {
                MergeReason::Path { path, .. } => schema.paths[*path].name.clone(),
                MergeReason::Congruence => "congruence".into(),
            },
            round: mg.round,
        })
        .collect();
    ModelDump {
        format_version: MODEL_FORMAT_VERSION,
        signature: print_signature(m.signature()),
        depth: m.depth(),
        saturated: m.saturated(),
        stats: m.stats(),
        sorts,
        merges,
    }
}
