//! Bundled example architectures used by the test suites, the documentation
//! and the CLI demos.

use crate::model::Architecture;
use crate::parser;

/// The web server monitor: three sensors, four context operators, two
/// controllers and two actuators.
pub const WEBSERVER_ADL: &str = include_str!("../fixtures/webserver.adl");

/// The web server monitor extended with synchronized statistics operators and
/// a disjunctive danger detector.
pub const WEBSERVER_EXTENDED_ADL: &str = include_str!("../fixtures/webserver_extended.adl");

/// The web server monitor extended with the public top-five page.
pub const WEBSERVER_TOPFIVE_ADL: &str = include_str!("../fixtures/webserver_topfive.adl");

/// A demo scenario for the web server monitor: two accesses and one direct
/// profile probe.
pub const WEBSERVER_SCENARIO: &str = include_str!("../fixtures/webserver.scenario");

fn must_parse(text: &str, what: &str) -> Architecture {
    match parser::parse_str(text) {
        Ok(arch) => arch,
        Err(diags) => panic!("bundled fixture `{what}` does not parse: {diags:?}"),
    }
}

pub fn webserver() -> Architecture {
    must_parse(WEBSERVER_ADL, "webserver")
}

pub fn webserver_extended() -> Architecture {
    must_parse(WEBSERVER_EXTENDED_ADL, "webserver_extended")
}

pub fn webserver_topfive() -> Architecture {
    must_parse(WEBSERVER_TOPFIVE_ADL, "webserver_topfive")
}
