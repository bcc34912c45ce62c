//! Operational shell: file formats, random instances and property suites.

pub mod generate;
pub mod io;
pub mod suite;

pub use generate::{generate, Profile};
pub use io::{
    parse_function, parse_instance, parse_region, FunctionRecord, Instance, InstanceRecord,
};
pub use suite::{run_groups, run_suite, Group, PropertyResult, Report};
