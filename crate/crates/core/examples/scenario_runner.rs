//! Running the named scenarios from JSON parameters, as the CLI does.
//!
//! cargo run --release --example scenario_runner

use ppslab::scenario::{run_scenario, OutputFormat, ScenarioConfig, ScenarioName};
use serde_json::json;

fn main() -> ppslab::Result<()> {
    for name in ScenarioName::ALL {
        let table = run_scenario(&ScenarioConfig::new(name))?;
        println!("{:<22} {:>6} rows  [{}]", name.as_str(), table.rows.len(), table.columns.join(", "));
    }

    let cfg = ScenarioConfig::new(ScenarioName::MeterSweep)
        .with_params(json!({"couplings": [0.1, 0.01, 0.001]}));
    run_scenario(&cfg)?.write(std::io::stdout().lock(), OutputFormat::Csv)?;

    let cfg = ScenarioConfig::new(ScenarioName::TomographyRoundtrip)
        .with_params(json!({"dims": [2], "trials": 3, "sigma": 1e-3}))
        .with_seed(42);
    run_scenario(&cfg)?.write(std::io::stdout().lock(), OutputFormat::Json)?;
    println!();
    Ok(())
}
