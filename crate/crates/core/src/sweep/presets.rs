//! Named sweep configurations for the standard datasets.

use super::config::{AxisName, AxisSpec, SweepConfig};
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 8] = [
    "fig2a", "fig2b", "fig2e", "fig3", "fig4a", "fig4b", "fig5a", "fig5b",
];

/// Coupling axis shared by the bias maps: `0.005..=0.22` in steps of `0.005`.
pub fn coupling_axis() -> AxisSpec {
    AxisSpec::linear(AxisName::Lambda, 0.005, 0.22, 44)
}

/// Positive bias axis `0.025..=2` in steps of `0.025`; zero is left out since
/// rectification is undefined there.
pub fn positive_bias_axis() -> AxisSpec {
    AxisSpec::linear(AxisName::DeltaT, 0.025, 2.0, 80)
}

fn with(grid: Vec<AxisSpec>, outputs: &[&str]) -> SweepConfig {
    SweepConfig {
        grid,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        ..SweepConfig::default()
    }
}

pub fn figure_preset(name: &str) -> Result<SweepConfig> {
    let cfg = match name {
        "fig2a" => with(
            vec![
                AxisSpec::explicit(AxisName::Lambda, vec![0.001, 0.01, 0.1]),
                AxisSpec::linear(AxisName::DeltaT, -2.0, 2.0, 81),
            ],
            &["current", "current_scaled"],
        ),
        "fig2b" => with(
            vec![coupling_axis(), AxisSpec::linear(AxisName::DeltaT, 0.0, 2.0, 81)],
            &["current"],
        ),
        "fig2e" => {
            let mut c = with(
                vec![AxisSpec::linear(AxisName::DeltaT, 0.0, 2.0, 81)],
                &["weak_current", "weak_components", "current"],
            );
            c.model.lambda = 0.001;
            c
        }
        "fig3" => with(vec![coupling_axis(), positive_bias_axis()], &["rectification"]),
        "fig4a" => with(vec![coupling_axis(), positive_bias_axis()], &["noise"]),
        "fig4b" => with(vec![coupling_axis(), positive_bias_axis()], &["skewness"]),
        "fig5a" => with(
            vec![
                AxisSpec::linear(AxisName::T0, 0.0, 1.0, 51),
                AxisSpec::linear(AxisName::Lambda, 0.0, 0.24, 49),
            ],
            &["xi_squared"],
        ),
        "fig5b" => {
            let mut c = with(
                vec![
                    AxisSpec::linear(AxisName::TR, 0.0, 2.0, 81),
                    AxisSpec::linear(AxisName::TQ, 0.0, 2.0, 81),
                ],
                &["xi_squared"],
            );
            c.model.lambda = 0.2;
            c
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESET_NAMES {
            let c = figure_preset(name).unwrap();
            assert!(c.violations().is_empty(), "{name}");
        }
        assert_eq!(figure_preset("fig9"), Err(Error::UnknownPreset("fig9".into())));
    }

    #[test]
    fn preset_shapes() {
        let a = figure_preset("fig2a").unwrap();
        assert_eq!(a.grid_points().len(), 3 * 81);
        assert_eq!(a.axes()[1].1[0], -2.0);
        let l = coupling_axis().points();
        assert!(l.iter().any(|x| (x - 0.1).abs() < 1e-12));
        assert!(l.iter().any(|x| (x - 0.15).abs() < 1e-12));
        let three = figure_preset("fig3").unwrap();
        assert_eq!(three.axes().len(), 2);
        assert!(three.axes()[1].1.iter().all(|&d| d > 0.0));
        let b = figure_preset("fig5b").unwrap();
        assert_eq!(b.model.lambda, 0.2);
        assert_eq!(b.axes()[0].0, AxisName::TR);
    }
}
