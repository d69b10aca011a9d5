use std::path::Path;

#[test]
fn committed_demo_matches_generator() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo");
    let demo = fsqca::synth::demo();
    let read = |f: &str| std::fs::read_to_string(dir.join(f)).unwrap();
    assert_eq!(read("dataset.csv"), demo.dataset_csv());
    assert_eq!(read("schema.toml"), demo.schema.to_toml_string());
    assert_eq!(read("config.toml"), demo.config);
}

#[test]
fn committed_demo_runs() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo/config.toml");
    let inputs = fsqca::pipeline::Inputs::load(&config).unwrap();
    let out = fsqca::pipeline::run_pipeline(&inputs).unwrap();
    assert_eq!(out.runs.len(), 6);
    let h = &out.bundle.analysis.hypotheses;
    assert!(h.group_integration["development"].verdict);
    assert!(h.distinct_outcomes.as_ref().unwrap().verdict);
}
