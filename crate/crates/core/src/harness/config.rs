use std::fmt::Write;
use std::path::Path;

use nalgebra::Vector3;
use serde::Deserialize;

use super::HarnessError;
use crate::integrators::{IntegratorKind, DEFAULT_ZHAI_PHI, DEFAULT_ZHAI_PSI};
use crate::model::DloProperties;
use crate::scenario::{
    build_scenario, ConfigError, ScenarioKind, ScenarioOverrides, SimulationConfig, DEFAULT_FORCE_AMPLITUDE,
    DEFAULT_FORCE_FREQUENCY, STANDARD_GRAVITY,
};

/// Marker appended to echoed settings whose value is an implementer default.
pub const NON_PAPER_DEFAULT: &str = "[non-paper-default]";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    material: MaterialSection,
    #[serde(default)]
    time: TimeSection,
    #[serde(default)]
    scenario: ScenarioSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    n_u: Option<usize>,
    n_s: Option<usize>,
    length: Option<f64>,
    diameter: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialSection {
    young: Option<f64>,
    shear: Option<f64>,
    density: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeSection {
    tau: Option<f64>,
    duration: Option<f64>,
    integrator: Option<String>,
    zhai_psi: Option<f64>,
    zhai_phi: Option<f64>,
    record_stride: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    kind: Option<String>,
    gravity: Option<[f64; 3]>,
    spring_kx: Option<f64>,
    force_amplitude: Option<f64>,
    force_frequency: Option<f64>,
    force_direction: Option<[f64; 3]>,
    force_apply_u: Option<f64>,
}

/// Parses TOML text with `[model]`, `[material]`, `[time]` and `[scenario]`
/// sections. Missing keys take the reference values.
pub fn parse_config(text: &str) -> Result<SimulationConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.message().to_string()))?;
    let kind: ScenarioKind = match &file.scenario.kind {
        Some(k) => k.parse()?,
        None => ScenarioKind::GravityOnly,
    };
    let mut config = SimulationConfig::reference(kind);
    let d = DloProperties::default();
    config.properties = DloProperties {
        length: file.model.length.unwrap_or(d.length),
        diameter: file.model.diameter.unwrap_or(d.diameter),
        young: file.material.young.unwrap_or(d.young),
        shear: file.material.shear.unwrap_or(d.shear),
        density: file.material.density.unwrap_or(d.density),
        plastic_strain: Vec::new(),
    };
    config.n_u = file.model.n_u.unwrap_or(config.n_u);
    config.n_s = file.model.n_s.unwrap_or(config.n_s);

    let t = &file.time;
    config.duration = t.duration.unwrap_or(config.duration);
    config.record_stride = t.record_stride.unwrap_or(config.record_stride);
    config.step.tau = t.tau.unwrap_or(config.step.tau);
    if let Some(name) = &t.integrator {
        config.step.kind = name.parse::<IntegratorKind>()?;
    }
    config.step.zhai_psi = t.zhai_psi.unwrap_or(config.step.zhai_psi);
    config.step.zhai_phi = t.zhai_phi.unwrap_or(config.step.zhai_phi);

    let s = &file.scenario;
    let overrides = ScenarioOverrides {
        gravity: s.gravity.map(Vector3::from),
        spring_kx: s.spring_kx,
        force_amplitude: s.force_amplitude,
        force_frequency: s.force_frequency,
        force_direction: s.force_direction.map(Vector3::from),
        force_apply_u: s.force_apply_u,
    };
    config.scenario = build_scenario(kind, config.properties.length, &overrides)?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SimulationConfig, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(parse_config(&text)?)
}

fn flag(is_default: bool) -> &'static str {
    if is_default {
        "  # [non-paper-default]"
    } else {
        ""
    }
}

fn vec3(v: &Vector3<f64>) -> String {
    format!("[{:?}, {:?}, {:?}]", v.x, v.y, v.z)
}

/// The config as TOML that [`parse_config`] reads back unchanged. Settings
/// left at values the reference setup does not pin down carry
/// [`NON_PAPER_DEFAULT`] in a trailing comment.
pub fn config_to_toml(config: &SimulationConfig) -> String {
    let p = &config.properties;
    let d = DloProperties::default();
    let s = &config.scenario;
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "[model]").unwrap();
    writeln!(w, "n_u = {}", config.n_u).unwrap();
    writeln!(w, "n_s = {}", config.n_s).unwrap();
    writeln!(w, "length = {:?}", p.length).unwrap();
    writeln!(w, "diameter = {:?}", p.diameter).unwrap();
    writeln!(w, "\n[material]").unwrap();
    writeln!(w, "young = {:?}{}", p.young, flag(p.young == d.young)).unwrap();
    writeln!(w, "shear = {:?}{}", p.shear, flag(p.shear == d.shear)).unwrap();
    writeln!(w, "density = {:?}{}", p.density, flag(p.density == d.density)).unwrap();
    writeln!(w, "\n[time]").unwrap();
    writeln!(w, "tau = {:?}", config.step.tau).unwrap();
    writeln!(w, "duration = {:?}", config.duration).unwrap();
    writeln!(w, "integrator = \"{}\"", config.step.kind).unwrap();
    let zhai = config.step.kind == IntegratorKind::Zhai;
    writeln!(
        w,
        "zhai_psi = {:?}{}",
        config.step.zhai_psi,
        flag(zhai && config.step.zhai_psi == DEFAULT_ZHAI_PSI)
    )
    .unwrap();
    writeln!(
        w,
        "zhai_phi = {:?}{}",
        config.step.zhai_phi,
        flag(zhai && config.step.zhai_phi == DEFAULT_ZHAI_PHI)
    )
    .unwrap();
    writeln!(w, "record_stride = {}", config.record_stride).unwrap();
    writeln!(w, "\n[scenario]").unwrap();
    writeln!(w, "kind = \"{}\"", s.kind).unwrap();
    let g_default = s.gravity == Vector3::new(0.0, 0.0, -STANDARD_GRAVITY);
    writeln!(w, "gravity = {}{}", vec3(&s.gravity), flag(g_default)).unwrap();
    writeln!(w, "spring_kx = {:?}", s.spring_kx).unwrap();
    if let Some(f) = &s.external_force {
        writeln!(
            w,
            "force_amplitude = {:?}{}",
            f.amplitude,
            flag(f.amplitude == DEFAULT_FORCE_AMPLITUDE)
        )
        .unwrap();
        writeln!(
            w,
            "force_frequency = {:?}{}",
            f.frequency,
            flag(f.frequency == DEFAULT_FORCE_FREQUENCY)
        )
        .unwrap();
        writeln!(w, "force_direction = {}", vec3(&f.direction)).unwrap();
        writeln!(w, "force_apply_u = {:?}", f.apply_u).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_reference() {
        let c = parse_config("").unwrap();
        assert_eq!(c, SimulationConfig::reference(ScenarioKind::GravityOnly));
    }

    #[test]
    fn overrides_apply() {
        let c = parse_config(
            r#"
            [model]
            n_u = 13
            [time]
            tau = 1e-5
            integrator = "zhai"
            zhai_psi = 0.3
            [scenario]
            kind = "sinusoidal_center"
            force_amplitude = 2.5
            gravity = [0.0, 0.0, 0.0]
            "#,
        )
        .unwrap();
        assert_eq!(c.n_u, 13);
        assert_eq!(c.step.tau, 1e-5);
        assert_eq!(c.step.kind, IntegratorKind::Zhai);
        assert_eq!(c.step.zhai_psi, 0.3);
        assert_eq!(c.step.zhai_phi, 0.5);
        let f = c.scenario.external_force.as_ref().unwrap();
        assert_eq!(f.amplitude, 2.5);
        assert_eq!(f.apply_u, 1.0);
        assert_eq!(c.scenario.gravity, Vector3::zeros());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_config("[model]\nn_u = 3"), Err(ConfigError::Invalid(_))));
        assert!(matches!(
            parse_config("[scenario]\nkind = \"obstacle\""),
            Err(ConfigError::UnknownScenario(_))
        ));
        assert!(matches!(
            parse_config("[time]\nintegrator = \"euler\""),
            Err(ConfigError::UnknownIntegrator(_))
        ));
        assert!(parse_config("[time]\nwobble = 1").is_err());
        assert!(parse_config("[time]\ntau = -1.0").is_err());
        assert!(parse_config("not toml [").is_err());
    }

    #[test]
    fn echo_round_trips_and_flags_defaults() {
        let mut c = SimulationConfig::reference(ScenarioKind::SinusoidalCenter);
        c.step.tau = 3.25e-6;
        c.properties.young = 70e9;
        let text = config_to_toml(&c);
        assert_eq!(parse_config(&text).unwrap(), c);
        let flagged = |key: &str| {
            text.lines()
                .find(|l| l.starts_with(&format!("{key} =")))
                .unwrap()
                .contains(NON_PAPER_DEFAULT)
        };
        assert!(!flagged("young"));
        assert!(flagged("shear"));
        assert!(flagged("gravity"));
        assert!(flagged("force_amplitude"));
        assert!(!flagged("tau"));
        assert!(!flagged("n_u"));
    }
}
