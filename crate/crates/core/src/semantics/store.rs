//! Facts attached to statements, with provenance, and the warning log.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::c::ast::*;
use crate::c::visit::NodeRef;
use crate::lang::property::{ExpProp, MemAccess, Property, StmlProp};

/// One entry of the machine-readable warning log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub kind: WarningKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    pub message: String,
    /// Fact that stays in the program.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kept: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kept_origin: Option<Origin>,
    /// Fact that was discarded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejected_origin: Option<Origin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarningKind {
    Conflict,
    DroppedPragma,
}

impl Warning {
    pub fn conflict(node: NodeId, line: Option<u32>, kept: &Pragma, rejected: &Pragma) -> Warning {
        Warning {
            kind: WarningKind::Conflict,
            node: Some(node),
            line,
            message: format!(
                "`{}` contradicts `{}`; keeping the {} fact",
                rejected.prop, kept.prop, kept.origin
            ),
            kept: Some(kept.prop.to_string()),
            kept_origin: Some(kept.origin),
            rejected: Some(rejected.prop.to_string()),
            rejected_origin: Some(rejected.origin),
        }
    }

    pub fn dropped(rule: &str, p: &Pragma) -> Warning {
        Warning {
            kind: WarningKind::DroppedPragma,
            node: None,
            line: None,
            message: format!("rule {rule} dropped `{}`", p.prop.to_pragma()),
            kept: None,
            kept_origin: None,
            rejected: Some(p.prop.to_string()),
            rejected_origin: Some(p.origin),
        }
    }

    /// One-line JSON form.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("warning serializes")
    }
}

/// Facts per statement node. The tree is the source of truth; a store is
/// an index over it plus the warnings produced while building it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PropertyStore {
    pub by_node: BTreeMap<NodeId, Vec<Pragma>>,
    pub warnings: Vec<Warning>,
}

impl PropertyStore {
    pub fn from_ast(ast: &AnnotatedAst) -> PropertyStore {
        let mut by_node = BTreeMap::new();
        for v in ast.nodes() {
            if let NodeRef::Stmt(s) = v.node {
                if !s.pragmas.is_empty() {
                    by_node.insert(v.id, s.pragmas.clone());
                }
            }
        }
        PropertyStore {
            by_node,
            warnings: Vec::new(),
        }
    }

    pub fn with_warnings(mut self, w: Vec<Warning>) -> Self {
        self.warnings = w;
        self
    }

    pub fn facts(&self) -> impl Iterator<Item = (NodeId, &Pragma)> {
        self.by_node
            .iter()
            .flat_map(|(id, v)| v.iter().map(move |p| (*id, p)))
    }

    pub fn at(&self, id: NodeId) -> &[Pragma] {
        self.by_node.get(&id).map_or(&[], |v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.by_node.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_node.is_empty()
    }
}

/// Whether two facts on the same statement cannot both hold.
///
/// Access facts on the same target disagree when their offset lists differ,
/// two write-set equations for the same expression when their location
/// lists differ, two iteration spaces when their bounds differ, and
/// `pure e` is contradicted by a non-empty `write(e) = {...}`.
pub fn contradicts(a: &Property, b: &Property) -> bool {
    let (Property::Stml(a), Property::Stml(b)) = (a, b) else {
        return false;
    };
    match (a, b) {
        (
            StmlProp::Access {
                mode: m1,
                target: t1,
                offsets: o1,
            },
            StmlProp::Access {
                mode: m2,
                target: t2,
                offsets: o2,
            },
        ) => m1 == m2 && t1 == t2 && norm_offsets(o1) != norm_offsets(o2),
        (
            StmlProp::WriteSet {
                expr: e1,
                locations: l1,
            },
            StmlProp::WriteSet {
                expr: e2,
                locations: l2,
            },
        ) => e1 == e2 && l1 != l2,
        (
            StmlProp::IterationSpace { lo: a1, hi: b1 },
            StmlProp::IterationSpace { lo: a2, hi: b2 },
        ) => a1 != a2 || b1 != b2,
        (
            StmlProp::Exp {
                prop: ExpProp::Pure,
                qualifier: None,
                expr,
            },
            StmlProp::WriteSet { expr: e, locations },
        )
        | (
            StmlProp::WriteSet { expr: e, locations },
            StmlProp::Exp {
                prop: ExpProp::Pure,
                qualifier: None,
                expr,
            },
        ) => expr == e && !locations.is_empty(),
        _ => false,
    }
}

fn norm_offsets(o: &Option<Vec<i64>>) -> Option<Vec<i64>> {
    o.as_ref().map(|v| {
        let mut v = v.clone();
        v.sort_unstable();
        v.dedup();
        v
    })
}

/// Add `new` to a statement's pragma list unless an equal fact is already
/// there. A contradicting fact already present wins; the warning records
/// the clash. Returns whether the fact was added.
pub fn merge_fact(
    pragmas: &mut Vec<Pragma>,
    new: Pragma,
    at: usize,
    node: NodeId,
    line: Option<u32>,
    warnings: &mut Vec<Warning>,
) -> bool {
    if pragmas.iter().any(|p| p.prop == new.prop) {
        return false;
    }
    if let Some(old) = pragmas.iter().find(|p| contradicts(&p.prop, &new.prop)) {
        warnings.push(Warning::conflict(node, line, old, &new));
        return false;
    }
    pragmas.insert(at.min(pragmas.len()), new);
    true
}

/// `true` for `reads`/`writes`/`rw` facts on `base` or `base[...]`.
pub fn is_access_on(p: &Property, base: &str, mode: MemAccess) -> bool {
    match p {
        Property::Stml(StmlProp::Access {
            mode: m, target, ..
        }) if *m == mode => match target {
            Expr::Var(n) | Expr::Index(n, _) => n == base,
            _ => false,
        },
        _ => false,
    }
}
