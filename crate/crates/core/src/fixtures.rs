//! The nine-row call-behaviour sample used throughout the tests and docs.

use crate::dataset::{validate_dataset, Attribute, AttributeSchema, Dataset, UncheckedRow};

pub const TABLE1_ROWS: [[&str; 5]; 9] = [
    ["Fri[S1]", "Office", "Meeting", "Friend", "Reject"],
    ["Fri[S1]", "Office", "Meeting", "Colleague", "Reject"],
    ["Fri[S1]", "Office", "Meeting", "Boss", "Accept"],
    ["Fri[S1]", "Office", "Meeting", "Friend", "Reject"],
    ["Fri[S2]", "Home", "Dinner", "Friend", "Accept"],
    ["Wed[S1]", "Office", "Seminar", "Unknown", "Reject"],
    ["Wed[S1]", "Office", "Seminar", "Colleague", "Reject"],
    ["Wed[S1]", "Office", "Seminar", "Mother", "Accept"],
    ["Wed[S2]", "Home", "Dinner", "Unknown", "Accept"],
];

pub const TABLE1_ATTRIBUTES: [&str; 4] = ["DayTime", "Location", "Situation", "Relationship"];

/// The sample dataset with ids equal to the 1-based row numbers.
pub fn table1() -> Dataset {
    let schema = AttributeSchema::new(
        TABLE1_ATTRIBUTES.iter().map(|n| Attribute::new(*n)).collect(),
        "Behavior",
        ["Reject", "Accept"],
    )
    .expect("static schema");
    let rows = TABLE1_ROWS
        .iter()
        .enumerate()
        .map(|(i, r)| UncheckedRow::new(r[..4].iter().copied(), r[4]).with_id(i + 1))
        .collect();
    validate_dataset(schema, rows).expect("static rows")
}
