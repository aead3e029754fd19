use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use bldl_core::archsim::{ArchConfig, UnitLatencies};
use bldl_core::io::parse_key_values;
use bldl_core::prep::{FixedConfig, NoiseConfig, Normalization};
use bldl_core::{Error, Result};

/// `key=value` settings from an optional config file; command-line flags take
/// precedence over anything read here.
#[derive(Debug, Default)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => Ok(Self {
                map: parse_key_values(&std::fs::read_to_string(p)?)?,
            }),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.map
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("cannot parse `{key}={v}`")))
            })
            .transpose()
    }

    /// Like [`get`](Self::get) for types whose parser already reports a
    /// descriptive error.
    pub fn get_named<T: FromStr<Err = Error>>(&self, key: &str) -> Result<Option<T>> {
        self.map.get(key).map(|v| v.parse()).transpose()
    }

    pub fn get_named_list<T: FromStr<Err = Error>>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.map
            .get(key)
            .map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect())
            .transpose()
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.map
            .get(key)
            .map(|v| match v.as_str() {
                "true" | "1" | "yes" | "on" => Ok(true),
                "false" | "0" | "no" | "off" => Ok(false),
                _ => Err(Error::Config(format!("`{key}` must be true or false, got `{v}`"))),
            })
            .transpose()
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.map
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|_| Error::Config(format!("cannot parse `{s}` in `{key}`"))))
                    .collect()
            })
            .transpose()
    }
}

/// Settings shared by the matrix commands after merging flags and file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub noise: NoiseConfig,
    pub fixed: bool,
    pub rd_mode: bool,
    pub normalization: Normalization,
    pub word_bits: u32,
    pub clock_hz: f64,
    pub handoff_cycles: u64,
    pub latencies: UnitLatencies,
    pub seed: u64,
}

impl RunConfig {
    pub fn fixed_config(&self) -> Result<FixedConfig> {
        Ok(FixedConfig::with_word_bits(self.word_bits)?.rd(self.rd_mode))
    }

    pub fn arch_config(&self) -> Result<ArchConfig> {
        Ok(ArchConfig {
            fixed: self.fixed_config()?,
            lat: self.latencies,
            normalization: self.normalization,
            clock_hz: self.clock_hz,
            handoff_cycles: self.handoff_cycles,
        })
    }
}

/// Values given on the command line, all optional.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub rho: Option<f64>,
    pub n0: Option<f64>,
    pub es: Option<f64>,
    pub fixed: Option<bool>,
    pub rd: bool,
    pub norm: Option<Normalization>,
    pub word_bits: Option<u32>,
    pub clock_hz: Option<f64>,
    pub seed: Option<u64>,
}

pub fn merge(o: &Overrides, f: &FileConfig) -> Result<RunConfig> {
    let es = o.es.or(f.get("es")?).unwrap_or(1.0);
    let rho = o.rho.or(f.get("rho")?);
    let n0 = o.n0.or(f.get("n0")?);
    let noise = match (rho, n0) {
        (Some(_), Some(_)) => return Err(Error::Config("give either rho or n0, not both".into())),
        (Some(r), None) => NoiseConfig::new(r * es, es)?,
        (None, Some(n)) => NoiseConfig::new(n, es)?,
        (None, None) => NoiseConfig::new(0.0, es)?,
    };
    let d = UnitLatencies::default();
    let lat = UnitLatencies::new(
        f.get("mmac_latency")?.unwrap_or(d.mmac),
        f.get("msub_latency")?.unwrap_or(d.msub),
        f.get("minv_latency")?.unwrap_or(d.minv),
        f.get("mmult_latency")?.unwrap_or(d.mmult),
    )?;
    let clock_hz = o.clock_hz.or(f.get("clock_hz")?).unwrap_or(870e6);
    if !(clock_hz > 0.0) {
        return Err(Error::Config("clock_hz must be positive".into()));
    }
    Ok(RunConfig {
        noise,
        fixed: o.fixed.or(f.get_bool("fixed")?).unwrap_or(true),
        rd_mode: o.rd || f.get_bool("rd")?.unwrap_or(false),
        normalization: o.norm.or(f.get_named("norm")?).unwrap_or(Normalization::Global),
        word_bits: o.word_bits.or(f.get("word_bits")?).unwrap_or(bldl_core::fxp::WORD_BITS),
        clock_hz,
        handoff_cycles: f.get("handoff_cycles")?.unwrap_or(0),
        latencies: lat,
        seed: o.seed.or(f.get("seed")?).unwrap_or(0),
    })
}
