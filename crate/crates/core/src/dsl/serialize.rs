//! Canonical DSL emission: defaults omitted, sets in registry order, one
//! statement per line. `parse(serialize(p))` equals `p` structurally.

use std::fmt::Write;

use crate::dsl::ast::{LevelProgram, MechanicsParams, Region};
use crate::registry::AchSet;

/// Shortest text that parses back to the same f64 (Rust's float Display is
/// round-trip exact); integral values drop the fraction.
fn fmt_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn fmt_ach_set(set: AchSet) -> String {
    set.iter().map(|a| a.name()).collect::<Vec<_>>().join(", ")
}

pub fn serialize(p: &LevelProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "level \"{}\" {{", p.name);
    if p.floor != 0 {
        let _ = writeln!(out, "  floor = {}", p.floor);
    }
    if !p.inventory_overrides.is_empty() {
        let items: Vec<String> = p
            .inventory_overrides
            .iter()
            .map(|(item, count)| format!("{} = {count};", item.name()))
            .collect();
        let _ = writeln!(out, "  inventory {{ {} }}", items.join(" "));
    }
    for place in &p.placements {
        let region = match place.region {
            Region::At { row, col } => format!("at ({row}, {col})"),
            Region::Near { min, max, n } => {
                format!("near {{ min = {min}; max = {max}; n = {n} }}")
            }
        };
        let _ = writeln!(
            out,
            "  place {{ block = {}; {region} }}",
            place.block.name()
        );
    }
    for mob in &p.mob_placements {
        let _ = writeln!(
            out,
            "  mob {{ kind = {}; n = {}; near {{ min = {}; max = {}; n = {} }} }}",
            mob.kind.name(),
            mob.count,
            mob.min,
            mob.max,
            mob.count
        );
    }
    let defaults = MechanicsParams::default();
    let mut mech_entries: Vec<String> = Vec::new();
    for field in crate::dsl::ast::MECHANICS_FIELDS {
        let value = p.mechanics.get(field).unwrap();
        if value != defaults.get(field).unwrap() {
            mech_entries.push(format!("{field} = {};", fmt_number(value)));
        }
    }
    if !mech_entries.is_empty() {
        let _ = writeln!(out, "  mechanics {{ {} }}", mech_entries.join(" "));
    }
    let _ = writeln!(out, "  goal {{ {} }}", fmt_ach_set(p.goal));
    if !p.completed.is_empty() {
        let _ = writeln!(out, "  completed {{ {} }}", fmt_ach_set(p.completed));
    }
    out.push('}');
    out.push('\n');
    out
}
