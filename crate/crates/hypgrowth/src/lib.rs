//! Product-set growth experiments for groups acting on trees and on finite
//! hyperbolic graphs.

pub mod config;
pub mod energy;
pub mod exact;
pub mod harness;
pub mod hypgeom;
pub mod mode;
pub mod periodicity;
pub mod reduction;
pub mod spaces;
pub mod suite;
pub mod treeapprox;
pub mod words;

pub use words::{ElementSet, GroupElement, Presentation, WordError};

/// Serde helpers writing exact numbers as `"p/q"` strings.
pub mod ser {
    use serde::Serializer;
    use std::fmt::Display;

    pub fn display<T: Display, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }

    pub fn display_opt<T: Display, S: Serializer>(x: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    /// The serde name of a unit enum variant.
    pub fn tag<T: serde::Serialize>(x: &T) -> String {
        match serde_json::to_value(x) {
            Ok(serde_json::Value::String(s)) => s,
            _ => panic!("not a unit variant"),
        }
    }

    pub fn display_vec<T: Display, S: Serializer>(x: &[T], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(x.iter().map(|v| v.to_string()))
    }
}
