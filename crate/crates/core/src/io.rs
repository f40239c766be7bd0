//! Text and binary formats for complex arrays, instance bundles and reports.
//!
//! Complex text arrays hold one `re,im` pair per line in shortest
//! round-trip decimal form. The binary form is the 8-byte magic `MIMOCSC1`,
//! a little-endian `u64` element count, then interleaved little-endian
//! `f64` real and imaginary parts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::gaussian_noise;
use crate::model::{generate_signals, DopplerMode, GridIndex, RadarConfig, RadarOperator, SignalFamily, SignalSet};
use crate::support::{make_scene, EtaRule, TargetScene};
use crate::C64;

pub const BINARY_MAGIC: &[u8; 8] = b"MIMOCSC1";

pub const CONFIG_FILE: &str = "config.txt";
pub const SCENE_FILE: &str = "scene.txt";
pub const MEASUREMENTS_FILE: &str = "measurements.txt";
pub const NOISE_FILE: &str = "noise.txt";
pub const SIGNALS_FILE: &str = "signals.txt";
pub const RESULT_FILE: &str = "result.txt";
pub const CURVES_FILE: &str = "curves.csv";

pub fn complex_to_text(values: &[C64]) -> String {
    let mut out = String::with_capacity(values.len() * 40);
    for v in values {
        out.push_str(&format!("{},{}\n", v.re, v.im));
    }
    out
}

pub fn complex_from_text(text: &str, path: &Path) -> Result<Vec<C64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(n, line)| {
            let bad = || Error::parse(path, format!("line {}: expected `re,im`, found `{line}`", n + 1));
            let (re, im) = line.split_once(',').ok_or_else(bad)?;
            Ok(C64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

pub fn complex_to_binary(values: &[C64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 16 * values.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn complex_from_binary(bytes: &[u8], path: &Path) -> Result<Vec<C64>> {
    if bytes.len() < 16 || &bytes[..8] != BINARY_MAGIC {
        return Err(Error::parse(path, "missing binary array header"));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = &bytes[16..];
    if body.len() != count.saturating_mul(16) {
        return Err(Error::parse(path, format!("header announces {count} values, body holds {} bytes", body.len())));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
    Ok(body.chunks_exact(16).map(|c| C64::new(f(&c[..8]), f(&c[8..]))).collect())
}

/// Write a complex array, binary when the extension is `.bin`.
pub fn write_complex(path: &Path, values: &[C64]) -> Result<()> {
    let bytes = if path.extension().is_some_and(|e| e == "bin") {
        complex_to_binary(values)
    } else {
        complex_to_text(values).into_bytes()
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Read a complex array written by [`write_complex`]; the format is sniffed from the magic bytes.
pub fn read_complex(path: &Path) -> Result<Vec<C64>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(BINARY_MAGIC) {
        return complex_from_binary(&bytes, path);
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::parse(path, "not UTF-8 text"))?;
    complex_from_text(&text, path)
}

/// `key = value` lines.
pub fn key_values_to_text(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

pub fn key_values_from_text(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::parse(path, format!("line {}: expected `key = value`", n + 1)))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Metadata of an instance bundle, stored as TOML in `config.txt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceMeta {
    pub n_transmit: usize,
    pub n_receive: usize,
    pub n_samples: usize,
    pub doppler_mode: DopplerMode,
    pub family: String,
    pub signal_seed: u64,
    pub seed: u64,
    pub sparsity: usize,
    pub eta: String,
    pub sigma: f64,
    pub amplitude: f64,
    /// Raw signals are stored in `signals.txt` rather than regenerated from the seed.
    #[serde(default)]
    pub materialized: bool,
}

/// A self-contained recovery problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub meta: InstanceMeta,
    pub cfg: RadarConfig,
    pub signals: SignalSet,
    pub scene: TargetScene,
    pub noise: Vec<C64>,
    pub measurements: Vec<C64>,
}

impl Instance {
    /// Draw signals, support, phases and noise from `seed`.
    pub fn generate(
        cfg: RadarConfig,
        family: SignalFamily,
        s: usize,
        eta: EtaRule,
        sigma: f64,
        amplitude: f64,
        seed: u64,
    ) -> Result<Self> {
        let signals = generate_signals(&cfg, family, seed);
        let support = eta.sample(&cfg, s, seed)?;
        let scene = make_scene(support, amplitude, seed)?;
        let op = RadarOperator::new(cfg, signals.clone())?;
        let noise = gaussian_noise(cfg.n_measurements(), sigma, seed);
        let mut measurements = op.forward_sparse(&scene.entries())?;
        measurements.iter_mut().zip(&noise).for_each(|(y, n)| *y += n);
        let meta = InstanceMeta {
            n_transmit: cfg.n_transmit,
            n_receive: cfg.n_receive,
            n_samples: cfg.n_samples,
            doppler_mode: cfg.doppler_mode,
            family: family.to_string(),
            signal_seed: seed,
            seed,
            sparsity: s,
            eta: eta.to_string(),
            sigma,
            amplitude,
            materialized: false,
        };
        Ok(Instance { meta, cfg, signals, scene, noise, measurements })
    }

    pub fn operator(&self) -> Result<RadarOperator> {
        RadarOperator::new(self.cfg, self.signals.clone())
    }

    /// Write `config.txt`, `scene.txt`, `measurements.txt`, `noise.txt` and,
    /// when `materialize` is set, `signals.txt` into `dir`.
    pub fn write(&self, dir: &Path, materialize: bool) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let meta = InstanceMeta { materialized: materialize, ..self.meta.clone() };
        let text = toml::to_string(&meta).map_err(|e| Error::parse(dir.join(CONFIG_FILE), e.to_string()))?;
        write_text(&dir.join(CONFIG_FILE), &text)?;
        write_text(&dir.join(SCENE_FILE), &scene_to_text(&self.scene))?;
        write_complex(&dir.join(MEASUREMENTS_FILE), &self.measurements)?;
        write_complex(&dir.join(NOISE_FILE), &self.noise)?;
        if materialize {
            write_complex(&dir.join(SIGNALS_FILE), &self.signals.stacked())?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(CONFIG_FILE);
        let text = read_text(&path)?;
        let meta: InstanceMeta = toml::from_str(&text).map_err(|e| Error::parse(&path, e.to_string()))?;
        let cfg = RadarConfig::new(meta.n_transmit, meta.n_receive, meta.n_samples, meta.doppler_mode)?;
        let family: SignalFamily = meta.family.parse()?;
        let signals = if meta.materialized {
            let flat = read_complex(&dir.join(SIGNALS_FILE))?;
            cfg.check_len("signals", flat.len(), cfg.n_transmit * cfg.n_samples)?;
            let rows = flat.chunks_exact(cfg.n_samples).map(<[C64]>::to_vec).collect();
            SignalSet::from_raw(&cfg, family, meta.signal_seed, rows)?
        } else {
            generate_signals(&cfg, family, meta.signal_seed)
        };
        let scene = scene_from_text(&cfg, &read_text(&dir.join(SCENE_FILE))?, &dir.join(SCENE_FILE))?;
        let measurements = read_complex(&dir.join(MEASUREMENTS_FILE))?;
        cfg.check_len("measurements", measurements.len(), cfg.n_measurements())?;
        let noise_path = dir.join(NOISE_FILE);
        let noise = if noise_path.exists() {
            read_complex(&noise_path)?
        } else {
            vec![C64::default(); cfg.n_measurements()]
        };
        cfg.check_len("noise", noise.len(), cfg.n_measurements())?;
        Ok(Instance { meta, cfg, signals, scene, noise, measurements })
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

const SCENE_HEADER: &str = "beta,tau,f,re,im";

pub fn scene_to_text(scene: &TargetScene) -> String {
    let mut out = format!("{SCENE_HEADER}\n");
    for (theta, c) in scene.entries() {
        out.push_str(&format!("{},{},{},{},{}\n", theta.beta, theta.tau, theta.f, c.re, c.im));
    }
    out
}

pub fn scene_from_text(cfg: &RadarConfig, text: &str, path: &Path) -> Result<TargetScene> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(SCENE_HEADER) {
        return Err(Error::parse(path, format!("expected header `{SCENE_HEADER}`")));
    }
    let mut entries = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = || Error::parse(path, format!("line {}: malformed scene entry", n + 2));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(bad());
        }
        let idx = |k: usize| f[k].parse::<usize>().map_err(|_| bad());
        let val = |k: usize| f[k].parse::<f64>().map_err(|_| bad());
        entries.push((GridIndex::new(idx(0)?, idx(1)?, idx(2)?), C64::new(val(3)?, val(4)?)));
    }
    let support = crate::support::SupportSet::new(cfg, entries.iter().map(|e| e.0))?;
    // Coefficients follow the support's storage order.
    let coefficients = support
        .indices()
        .iter()
        .map(|theta| entries.iter().find(|e| e.0 == *theta).map(|e| e.1).expect("index present"))
        .collect();
    TargetScene::new(support, coefficients)
}

/// Path helper for fixed output names under a directory.
pub fn output_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn text_and_binary_round_trip(v in prop::collection::vec((any::<f64>(), any::<f64>()), 0..40)) {
            let values: Vec<C64> = v.iter().filter(|(a, b)| a.is_finite() && b.is_finite()).map(|&(a, b)| C64::new(a, b)).collect();
            let p = Path::new("mem");
            prop_assert_eq!(&complex_from_text(&complex_to_text(&values), p).unwrap(), &values);
            prop_assert_eq!(&complex_from_binary(&complex_to_binary(&values), p).unwrap(), &values);
        }
    }

    #[test]
    fn binary_layout() {
        let b = complex_to_binary(&[C64::new(1.0, -2.0)]);
        assert_eq!(&b[..8], b"MIMOCSC1");
        assert_eq!(&b[8..16], &1u64.to_le_bytes());
        assert_eq!(&b[16..24], &1.0f64.to_le_bytes());
        assert_eq!(&b[24..], &(-2.0f64).to_le_bytes());
        assert!(complex_from_binary(&b[..20], Path::new("x")).is_err());
    }

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RadarConfig::new(2, 2, 8, DopplerMode::DopplerFree).unwrap();
        let inst = Instance::generate(cfg, SignalFamily::Rademacher, 2, EtaRule::Balanced(1), 1.0, 0.7, 7).unwrap();
        for materialize in [false, true] {
            inst.write(dir.path(), materialize).unwrap();
            let back = Instance::read(dir.path()).unwrap();
            assert_eq!(back.scene, inst.scene);
            assert_eq!(back.measurements, inst.measurements);
            assert_eq!(back.signals.signals(), inst.signals.signals());
            assert_eq!(back.meta.materialized, materialize);
        }
    }
}
