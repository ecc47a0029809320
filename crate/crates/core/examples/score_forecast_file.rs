//! Score observations against a forecast density read from JSON, as the
//! `score` subcommand does.
//!
//! cargo run --example score_forecast_file [forecast.json] [obs.csv]

use std::fs;

use cone_scoring::cli::{default_cone, parse_observations, score_observations};
use cone_scoring::densities::cone_check;
use cone_scoring::{make_density, DensityConfig, QuadratureScheme, ScoringRuleId};

const FORECAST: &str =
    r#"{"family":"mixture","components":[{"mean":[0],"var":1},{"mean":[2.5],"var":0.5}],"weights":[0.7,0.3]}"#;
const OBS: &str = "x\n-1.2\n0.0\n0.4\n2.6\n3.1\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let forecast = match args.first() {
        Some(p) => fs::read_to_string(p)?,
        None => FORECAST.to_string(),
    };
    let obs = match args.get(1) {
        Some(p) => fs::read_to_string(p)?,
        None => OBS.to_string(),
    };
    let scheme = QuadratureScheme::default();
    let q = make_density(&DensityConfig::from_json(&forecast)?)?;
    let xs = parse_observations(&obs)?;

    for rule in [
        ScoringRuleId::Logarithmic,
        ScoringRuleId::Hyvarinen,
        ScoringRuleId::Quadratic,
    ] {
        let (records, summary) = score_observations(rule, &q, &xs, &scheme)?;
        let line: Vec<String> = records.iter().map(|r| format!("{:+.4}", r.score.0)).collect();
        let cone = cone_check(&q, &default_cone(rule, &q), &scheme);
        println!(
            "{:10} [{}]  mean {:+.6}  in default cone: {}",
            rule.name(),
            line.join(" "),
            summary.mean,
            cone.member
        );
    }
    Ok(())
}
