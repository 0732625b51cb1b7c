//! Shipped reference files. Set `OSMOFLOW_BLESS=1` to regenerate them.

mod common;

use common::{cli, data};
use osmoflow::eos::{run_eos_campaign, CampaignConfig};
use osmoflow::ttl::{emit_ttl, workflow_to_triples};
use osmoflow::workflow::{ambiguity_b, ambiguity_c, SimulationWorkflow};

fn check(name: &str, actual: &str) {
    let path = data(name);
    if std::env::var_os("OSMOFLOW_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from the shipped copy");
}

fn ttl(wf: &SimulationWorkflow) -> String {
    emit_ttl(&workflow_to_triples(wf))
}

#[test]
fn ambiguity_ttl() {
    check("ambiguity-b.ttl", &ttl(&ambiguity_b()));
    check("ambiguity-c.ttl", &ttl(&ambiguity_c()));
}

#[test]
fn ambiguity_b_dot() {
    let (code, dot, err) = cli(&["export-dot", data("ambiguity-b.ttl").to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    check("ambiguity-b.dot", &dot);
    assert_eq!(dot.matches("shape=ellipse").count(), 4);
    assert_eq!(dot.matches("shape=triangle").count(), 2);
    assert_eq!(dot.matches("shape=point").count(), 1);
}

#[test]
fn solver_applies_to_file() {
    let mut wf = ambiguity_b();
    wf.applies_to("S1", "W").unwrap();
    check("solver-applies-to.ttl", &ttl(&wf));
}

#[test]
fn eos_parameterization_ttl() {
    let out = run_eos_campaign(&CampaignConfig::default()).unwrap();
    check("eos-parameterization.ttl", &out.ttl);
    let (code, _, err) = cli(&["validate", data("eos-parameterization.ttl").to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn example_config_is_the_default() {
    let text = std::fs::read_to_string(data("campaign.toml")).unwrap();
    let parsed: CampaignConfig = toml::from_str(&text).unwrap();
    assert_eq!(parsed, CampaignConfig::default());
}
