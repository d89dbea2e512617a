//! Flat INI-style run configurations with line-level diagnostics.

use std::path::{Path, PathBuf};

use gradiometry::ensemble::{ChainGeometry, EnsembleSpec, Spin};
use gradiometry::noise::NoiseConfig;
use gradiometry::profile::{load_tabulated_samples, DensityProfile, TabulatedProfile};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Chain,
    Profile,
    Noise,
    Spinj,
    OracleValidate,
    Compare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Chain => "chain",
            Mode::Profile => "profile",
            Mode::Noise => "noise",
            Mode::Spinj => "spinj",
            Mode::OracleValidate => "oracle-validate",
            Mode::Compare => "compare",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        Some(match s {
            "chain" => Mode::Chain,
            "profile" => Mode::Profile,
            "noise" => Mode::Noise,
            "spinj" => Mode::Spinj,
            "oracle-validate" => Mode::OracleValidate,
            "compare" => Mode::Compare,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub enum GeometrySpec {
    Equidistant {
        spacing: f64,
        offset: f64,
    },
    Positions {
        positions: Vec<f64>,
        char_length: f64,
    },
}

impl GeometrySpec {
    pub fn build(&self, n: usize) -> Result<ChainGeometry, CliError> {
        match self {
            GeometrySpec::Equidistant { spacing, offset } => {
                ChainGeometry::equidistant(n, *spacing, *offset)
            }
            GeometrySpec::Positions {
                positions,
                char_length,
            } => {
                if positions.len() != n {
                    return Err(CliError::Config(format!(
                        "[geometry] lists {} positions but [ensemble] particles = {n}",
                        positions.len()
                    )));
                }
                ChainGeometry::new(positions.clone(), *char_length)
            }
        }
        .map_err(|e| CliError::Config(format!("[geometry] {e}")))
    }
}

#[derive(Debug, Clone)]
pub enum ProfileSpec {
    Gaussian {
        center: f64,
        width: f64,
        char_length: f64,
    },
    Tabulated {
        file: PathBuf,
        normalize: bool,
        char_length: f64,
    },
    DeltaChain,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_count: usize,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        if self.theta_count == 1 {
            return vec![self.theta_min];
        }
        let span = self.theta_max - self.theta_min;
        (0..self.theta_count)
            .map(|k| self.theta_min + span * k as f64 / (self.theta_count - 1) as f64)
            .collect()
    }
}

/// One parsed run: the mode, the ensemble, the target (geometry or
/// profile), the Θ grid, and optional noise and spin-j settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub particles: usize,
    pub spin: Spin,
    pub geometry: Option<GeometrySpec>,
    pub profile: Option<ProfileSpec>,
    pub sweep: SweepSpec,
    pub noise: Option<NoiseConfig>,
    pub spinj_oracle_moments: bool,
    /// Flattened section.key = value pairs in file order, echoed into the
    /// output header so every artifact records its configuration.
    pub echo: Vec<(String, String)>,
}

struct IniEntry {
    section: String,
    key: String,
    value: String,
    line: usize,
}

fn parse_ini(text: &str) -> Result<Vec<IniEntry>, CliError> {
    let mut entries = Vec::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                CliError::Config(format!("line {line}: unterminated section header"))
            })?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| {
            CliError::Config(format!(
                "line {line}: expected 'key = value', got '{content}'"
            ))
        })?;
        if section.is_empty() {
            return Err(CliError::Config(format!(
                "line {line}: key outside of any [section]"
            )));
        }
        entries.push(IniEntry {
            section: section.clone(),
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(entries)
}

struct SectionReader<'a> {
    entries: Vec<&'a IniEntry>,
    used: Vec<bool>,
    section: &'a str,
}

impl<'a> SectionReader<'a> {
    fn new(entries: &'a [IniEntry], section: &'a str) -> Self {
        let entries: Vec<&IniEntry> = entries.iter().filter(|e| e.section == section).collect();
        let used = vec![false; entries.len()];
        SectionReader {
            entries,
            used,
            section,
        }
    }

    fn exists(&self) -> bool {
        !self.entries.is_empty()
    }

    fn get(&mut self, key: &str) -> Option<&'a IniEntry> {
        for (k, e) in self.entries.iter().enumerate() {
            if e.key == key {
                self.used[k] = true;
                return Some(e);
            }
        }
        None
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|_| {
                CliError::Config(format!(
                    "line {}: [{}] {key} = '{}' is not a valid value",
                    e.line, self.section, e.value
                ))
            }),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        self.parse(key)?.ok_or_else(|| {
            CliError::Config(format!("missing key '{key}' in section [{}]", self.section))
        })
    }

    fn finish(self) -> Result<(), CliError> {
        for (k, e) in self.entries.iter().enumerate() {
            if !self.used[k] {
                return Err(CliError::Config(format!(
                    "line {}: unknown key '{}' in section [{}]",
                    e.line, e.key, self.section
                )));
            }
        }
        Ok(())
    }
}

pub fn load_config(path: &Path, mode: Mode) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, mode)
}

pub fn parse_config(text: &str, mode: Mode) -> Result<RunConfig, CliError> {
    let entries = parse_ini(text)?;
    let known_sections = [
        "run", "ensemble", "geometry", "profile", "sweep", "noise", "spinj",
    ];
    for e in &entries {
        if !known_sections.contains(&e.section.as_str()) {
            return Err(CliError::Config(format!(
                "line {}: unknown section [{}]",
                e.line, e.section
            )));
        }
    }
    let echo: Vec<(String, String)> = entries
        .iter()
        .map(|e| (format!("{}.{}", e.section, e.key), e.value.clone()))
        .collect();

    let mut run = SectionReader::new(&entries, "run");
    if let Some(entry) = run.get("mode") {
        let declared = Mode::parse(&entry.value).ok_or_else(|| {
            CliError::Config(format!(
                "line {}: unknown mode '{}'",
                entry.line, entry.value
            ))
        })?;
        if declared != mode {
            return Err(CliError::Config(format!(
                "line {}: config declares mode '{}' but the '{}' subcommand was invoked",
                entry.line,
                declared.name(),
                mode.name()
            )));
        }
    }
    run.finish()?;

    let mut ensemble = SectionReader::new(&entries, "ensemble");
    let particles: usize = ensemble.require("particles")?;
    let spin_value: f64 = ensemble.parse("spin")?.unwrap_or(0.5);
    ensemble.finish()?;
    let spin = Spin::new(spin_value).map_err(|e| CliError::Config(format!("[ensemble] {e}")))?;
    let ensemble_spec = EnsembleSpec::new(particles, spin)
        .map_err(|e| CliError::Config(format!("[ensemble] {e}")))?;
    let (particles, spin) = (ensemble_spec.n_particles(), ensemble_spec.spin());
    if mode != Mode::Spinj && spin != Spin::HALF {
        return Err(CliError::Config(format!(
            "[ensemble] spin = {spin_value} requires the spinj mode"
        )));
    }

    let geometry = {
        let mut geometry = SectionReader::new(&entries, "geometry");
        if !geometry.exists() {
            None
        } else {
            let kind: String = geometry.require("kind")?;
            let spec = match kind.as_str() {
                "equidistant" => GeometrySpec::Equidistant {
                    spacing: geometry.parse("spacing")?.unwrap_or(1.0),
                    offset: geometry.parse("offset")?.unwrap_or(0.0),
                },
                "positions" => {
                    let entry = geometry.get("positions").ok_or_else(|| {
                        CliError::Config("missing key 'positions' in section [geometry]".into())
                    })?;
                    let positions = entry
                        .value
                        .split_whitespace()
                        .map(|w| {
                            w.parse::<f64>().map_err(|_| {
                                CliError::Config(format!(
                                    "line {}: bad position '{w}' in [geometry]",
                                    entry.line
                                ))
                            })
                        })
                        .collect::<Result<Vec<f64>, CliError>>()?;
                    GeometrySpec::Positions {
                        positions,
                        char_length: geometry.require("char_length")?,
                    }
                }
                other => {
                    return Err(CliError::Config(format!(
                        "[geometry] unknown kind '{other}'"
                    )))
                }
            };
            geometry.finish()?;
            Some(spec)
        }
    };

    let profile = {
        let mut profile = SectionReader::new(&entries, "profile");
        if !profile.exists() {
            None
        } else {
            let kind: String = profile.require("kind")?;
            let spec = match kind.as_str() {
                "gaussian" => ProfileSpec::Gaussian {
                    center: profile.parse("center")?.unwrap_or(0.0),
                    width: profile.require("width")?,
                    char_length: profile.parse("char_length")?.unwrap_or(1.0),
                },
                "tabulated" => ProfileSpec::Tabulated {
                    file: PathBuf::from(profile.require::<String>("file")?),
                    normalize: profile.parse("normalize")?.unwrap_or(true),
                    char_length: profile.parse("char_length")?.unwrap_or(1.0),
                },
                "delta-chain" => ProfileSpec::DeltaChain,
                other => {
                    return Err(CliError::Config(format!(
                        "[profile] unknown kind '{other}'"
                    )))
                }
            };
            profile.finish()?;
            Some(spec)
        }
    };

    let mut sweep = SectionReader::new(&entries, "sweep");
    let sweep_spec = if sweep.exists() {
        let spec = SweepSpec {
            theta_min: sweep.require("theta_min")?,
            theta_max: sweep.require("theta_max")?,
            theta_count: sweep.require("theta_count")?,
        };
        sweep.finish()?;
        spec
    } else if mode == Mode::OracleValidate {
        SweepSpec {
            theta_min: 0.0,
            theta_max: std::f64::consts::TAU,
            theta_count: 0,
        }
    } else {
        return Err(CliError::Config("missing section [sweep]".into()));
    };
    if mode != Mode::OracleValidate {
        if sweep_spec.theta_count < 1 {
            return Err(CliError::Config(
                "[sweep] theta_count must be at least 1".into(),
            ));
        }
        if !(sweep_spec.theta_max >= sweep_spec.theta_min) {
            return Err(CliError::Config(
                "[sweep] theta_max must not be below theta_min".into(),
            ));
        }
    }

    let mut noise = SectionReader::new(&entries, "noise");
    let noise_config = if noise.exists() {
        let q: f64 = noise.require("q")?;
        let p_global: f64 = noise.parse("p_global")?.unwrap_or(0.0);
        noise.finish()?;
        Some(NoiseConfig::new(q, p_global).map_err(|e| CliError::Config(format!("[noise] {e}")))?)
    } else {
        None
    };

    let mut spinj = SectionReader::new(&entries, "spinj");
    let spinj_oracle_moments = if spinj.exists() {
        let flag: bool = spinj.parse("oracle_moments")?.unwrap_or(false);
        spinj.finish()?;
        flag
    } else {
        false
    };

    let config = RunConfig {
        mode,
        particles,
        spin,
        geometry,
        profile,
        sweep: sweep_spec,
        noise: noise_config,
        spinj_oracle_moments,
        echo,
    };
    validate_mode_requirements(&config)?;
    Ok(config)
}

fn validate_mode_requirements(config: &RunConfig) -> Result<(), CliError> {
    let missing = |section: &str| {
        CliError::Config(format!(
            "mode '{}' needs a [{section}] section",
            config.mode.name()
        ))
    };
    match config.mode {
        Mode::Chain => {
            config
                .geometry
                .as_ref()
                .ok_or_else(|| missing("geometry"))?;
            if config.particles % 2 != 0 || config.particles < 4 {
                return Err(CliError::Config(format!(
                    "chain sweeps need an even particle number of at least 4, got {}",
                    config.particles
                )));
            }
        }
        Mode::Profile | Mode::Noise => {
            let spec = config.profile.as_ref().ok_or_else(|| missing("profile"))?;
            if matches!(spec, ProfileSpec::DeltaChain) {
                config
                    .geometry
                    .as_ref()
                    .ok_or_else(|| missing("geometry"))?;
                if config.particles % 2 != 0 || config.particles < 4 {
                    return Err(CliError::Config(format!(
                        "delta-chain sweeps need an even particle number of at least 4, got {}",
                        config.particles
                    )));
                }
            }
            if config.mode == Mode::Noise && config.noise.is_none() {
                return Err(CliError::Config(
                    "noise sweeps need a [noise] section with q".into(),
                ));
            }
        }
        Mode::Spinj => {
            if config.geometry.is_none() && config.profile.is_none() {
                return Err(CliError::Config(
                    "spinj sweeps need a [geometry] or [profile] section".into(),
                ));
            }
            if config.spinj_oracle_moments && config.geometry.is_none() {
                return Err(CliError::Config(
                    "spinj oracle moments need a fixed [geometry]".into(),
                ));
            }
        }
        Mode::OracleValidate => {
            if config.particles % 2 != 0 || !(2..=8).contains(&config.particles) {
                return Err(CliError::Config(format!(
                    "oracle validation needs an even particle number in 2..=8, got {}",
                    config.particles
                )));
            }
        }
        Mode::Compare => {}
    }
    Ok(())
}

/// Build the density profile a profile-like mode runs on.
pub fn build_profile(config: &RunConfig) -> Result<DensityProfile, CliError> {
    let spec = config
        .profile
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [profile] section".into()))?;
    match spec {
        ProfileSpec::Gaussian {
            center,
            width,
            char_length,
        } => DensityProfile::gaussian(*center, *width, *char_length)
            .map_err(|e| CliError::Config(format!("[profile] {e}"))),
        ProfileSpec::Tabulated {
            file,
            normalize,
            char_length,
        } => {
            let samples = load_tabulated_samples(file)
                .map_err(|e| CliError::Config(format!("[profile] file {}: {e}", file.display())))?;
            let tab = if *normalize {
                TabulatedProfile::normalized(samples)
            } else {
                TabulatedProfile::new(samples)
            }
            .map_err(|e| CliError::Config(format!("[profile] {e}")))?;
            DensityProfile::tabulated(tab, *char_length)
                .map_err(|e| CliError::Config(format!("[profile] {e}")))
        }
        ProfileSpec::DeltaChain => {
            let geom = config
                .geometry
                .as_ref()
                .ok_or_else(|| CliError::Config("delta-chain profile needs [geometry]".into()))?
                .build(config.particles)?;
            DensityProfile::delta_chain(geom)
                .map_err(|e| CliError::Config(format!("[profile] {e}")))
        }
    }
}
