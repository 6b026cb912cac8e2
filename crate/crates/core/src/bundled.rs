//! Signatures shipped with the crate.

use std::sync::Arc;

use crate::algebra::{AlgebraDoc, Diagram, FiniteAlgebra};
use crate::parser::parse_str;
use crate::schema::Schema;
use crate::syntax::Signature;

pub const NAT: &str = include_str!("../signatures/nat.qiit");
pub const TREES2: &str = include_str!("../signatures/trees2.qiit");
pub const CON_TY: &str = include_str!("../signatures/con_ty.qiit");
pub const INTERVAL: &str = include_str!("../signatures/interval.qiit");
pub const ONESORT: &str = include_str!("../signatures/onesort.qiit");
pub const EMPTY: &str = include_str!("../signatures/empty.qiit");
pub const CYCLIC: &str = include_str!("../signatures/cyclic.qiit");
pub const COMM: &str = include_str!("../signatures/comm.qiit");
pub const VEC: &str = include_str!("../signatures/vec.qiit");

/// Every accepted bundled signature, by file stem.
pub const ACCEPTED: &[(&str, &str)] = &[
    ("nat", NAT),
    ("trees2", TREES2),
    ("con_ty", CON_TY),
    ("interval", INTERVAL),
    ("onesort", ONESORT),
    ("empty", EMPTY),
    ("comm", COMM),
    ("vec", VEC),
];

/// Parses a bundled signature.
///
/// # Panics
/// If the text does not parse; bundled files are tested to parse.
pub fn load(text: &str) -> Signature {
    parse_str(text).unwrap_or_else(|e| panic!("bundled signature does not parse: {e:?}"))
}

pub fn nat() -> Signature {
    load(NAT)
}

pub fn trees2() -> Signature {
    load(TREES2)
}

pub fn con_ty() -> Signature {
    load(CON_TY)
}

pub fn interval() -> Signature {
    load(INTERVAL)
}

/// A finite algebra shipped with the crate.
pub struct BundledAlgebra {
    pub name: &'static str,
    pub signature: &'static str,
    pub text: &'static str,
    /// Whether it satisfies its path equations.
    pub valid: bool,
}

macro_rules! algebra {
    ($name:literal, $sig:expr, $valid:expr) => {
        BundledAlgebra {
            name: $name,
            signature: $sig,
            text: include_str!(concat!("../algebras/", $name, ".qalg")),
            valid: $valid,
        }
    };
}

pub const ALGEBRAS: &[BundledAlgebra] = &[
    algebra!("nat_mod2", NAT, true),
    algebra!("nat_mod3", NAT, true),
    algebra!("nat_mod4", NAT, true),
    algebra!("trees_max", TREES2, true),
    algebra!("trees_isnode", TREES2, true),
    algebra!("trees_first", TREES2, false),
    algebra!("interval_unit", INTERVAL, true),
    algebra!("interval_two", INTERVAL, true),
    algebra!("interval_apart", INTERVAL, false),
    algebra!("con_ty_nonempty", CON_TY, true),
    algebra!("con_ty_length", CON_TY, false),
    algebra!("comm_mod3", COMM, true),
    algebra!("comm_sub", COMM, false),
    algebra!("vec_count", VEC, true),
];

impl BundledAlgebra {
    /// Decodes the algebra against its signature.
    ///
    /// # Panics
    /// If the document does not decode; bundled files are tested to.
    pub fn load(&self) -> FiniteAlgebra {
        let schema = Arc::new(Schema::new(&load(self.signature)).expect("bundled signature"));
        let doc: AlgebraDoc = serde_json::from_str(self.text).expect("bundled algebra is JSON");
        doc.to_algebra(schema).unwrap_or_else(|e| panic!("bundled algebra {}: {e}", self.name))
    }
}

/// Looks up a bundled algebra by name.
pub fn algebra(name: &str) -> FiniteAlgebra {
    ALGEBRAS.iter().find(|a| a.name == name).unwrap_or_else(|| panic!("no bundled algebra {name}")).load()
}

/// Diagrams of families shipped with the crate, by name.
pub const DIAGRAMS: &[(&str, &str)] = &[
    ("product", include_str!("../diagrams/product.json")),
    ("pullback", include_str!("../diagrams/pullback.json")),
    ("equaliser", include_str!("../diagrams/equaliser.json")),
];

/// Looks up a bundled diagram by name.
pub fn diagram(name: &str) -> Diagram {
    let (_, text) = DIAGRAMS.iter().find(|(n, _)| *n == name).unwrap_or_else(|| panic!("no bundled diagram {name}"));
    serde_json::from_str(text).expect("bundled diagram is JSON")
}
