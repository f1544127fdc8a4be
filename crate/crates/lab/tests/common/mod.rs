#![allow(dead_code)]

use ganlab::config::ExperimentConfig;
use serde_json::Value;

/// A config small enough to run in well under a second per method.
/// `extra` holds further top-level members (`, "k": 2`), overriding the base.
pub fn tiny_config(methods: &str, extra: &str) -> ExperimentConfig {
    let base = format!(
        r#"{{
            "distribution": "ring8",
            "n_points": 600,
            "split": {{ "train_fraction": 0.5, "test_fraction": 0.25 }},
            "train": {{
                "epochs": 4,
                "batch_size": 32,
                "adam": {{ "learning_rate": 0.001 }},
                "architecture": {{ "generator_hidden": [8], "discriminator_hidden": [8], "init_std": 0.1 }}
            }},
            "methods": {methods},
            "n_generated": 120,
            "k": 3,
            "repetitions": 2
        }}"#
    );
    let mut value: Value = serde_json::from_str(&base).expect("base config");
    if !extra.trim().is_empty() {
        let more: Value =
            serde_json::from_str(&format!("{{{}}}", extra.trim().trim_start_matches(','))).expect("extra members");
        for (k, v) in more.as_object().expect("object") {
            value[k] = v.clone();
        }
    }
    ExperimentConfig::from_json(&value.to_string(), "inline.json".as_ref()).expect("tiny config parses")
}
