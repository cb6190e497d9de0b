//! Golden-file checks: the committed fixture and config JSON must stay
//! byte-identical to the in-code builders they mirror.
//!
//! Run with `PHYSMCP_BLESS=1` to regenerate the files after an intentional
//! change.

use std::path::{Path, PathBuf};

use physmcp::config::{AdapterConfig, WeightProfiles};
use physmcp::fixtures::{self, DescriptorPair};
use physmcp::harness::SelectorSuite;

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn check_golden<T: serde::Serialize>(rel: &str, value: &T) {
    let path = repo_path(rel);
    let mut rendered = serde_json::to_string_pretty(value).expect("golden values serialize");
    rendered.push('\n');
    if std::env::var("PHYSMCP_BLESS").is_ok() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &rendered).unwrap();
        return;
    }
    let on_disk = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {rel}: {e}; run with PHYSMCP_BLESS=1"));
    assert_eq!(
        on_disk, rendered,
        "{rel} has drifted from its builder; regenerate with PHYSMCP_BLESS=1"
    );
}

#[test]
fn descriptor_fixtures_match_their_builders() {
    for (resource, capability) in fixtures::all_descriptors() {
        let file = fixtures::fixture_file_name(&resource.backend_id);
        let pair: DescriptorPair = (resource, capability).into();
        check_golden(&format!("fixtures/descriptors/{file}"), &pair);
    }
}

#[test]
fn selector_suite_fixture_matches_the_builtin_suite() {
    check_golden("fixtures/selector_suite.json", &SelectorSuite::builtin());
}

#[test]
fn weight_profiles_config_matches_the_defaults() {
    check_golden("config/weights.json", &WeightProfiles::default().profiles);
}

#[test]
fn adapter_config_matches_the_defaults() {
    check_golden("config/adapters.json", &AdapterConfig::default());
}

#[test]
fn committed_configs_load_back_identically() {
    let config_dir = repo_path("config");
    let adapters = AdapterConfig::load(&config_dir).expect("adapters.json loads");
    assert_eq!(adapters.chemical.dim, AdapterConfig::default().chemical.dim);
    let profiles = WeightProfiles::load(&config_dir).expect("weights.json loads");
    assert_eq!(
        profiles.get("default").unwrap(),
        physmcp::MatchWeights::default()
    );

    let suite = SelectorSuite::load(&repo_path("fixtures/selector_suite.json")).unwrap();
    assert_eq!(suite.tasks.len(), 7);
}
