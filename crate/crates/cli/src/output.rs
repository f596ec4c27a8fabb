//! Result files. JSON documents carry a `config_hash` field; CSV files
//! start with a `# config_hash=<hex>` comment line followed by a header row.
//!
//! Diagnostics CSV columns: `t, charge, l1_u, l1_v, gauge_residual`, then
//! `sup_a<j>` and `sup_cone_a<j>` for each transverse potential,
//! `sup_transverse_sum_cone, forcing_l2`, `source_l1_a<mu>` for every
//! potential and `min_modulus_ratio` (empty where undefined).

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use mdlab_core::cone_solver::DiagnosticSample;
use mdlab_core::dirac_algebra::Dim;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub config_hash: String,
    pub kind: String,
    #[serde(flatten)]
    pub body: T,
}

pub struct OutDir {
    root: PathBuf,
    hash: String,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path, hash: &str) -> Result<Self, Failure> {
        std::fs::create_dir_all(root).map_err(|e| Failure::output(root, e))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            hash: hash.to_string(),
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn path(&mut self, name: &str) -> Result<PathBuf, Failure> {
        let path = self.root.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Failure::output(dir, e))?;
        }
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, kind: &str, body: &T) -> Result<(), Failure> {
        let path = self.path(name)?;
        let env = Envelope {
            config_hash: self.hash.clone(),
            kind: kind.to_string(),
            body,
        };
        let text = serde_json::to_string_pretty(&env).expect("results serialize");
        std::fs::write(&path, text + "\n").map_err(|e| Failure::output(&path, e))
    }

    /// `comments` become extra `# key=value` lines after the hash.
    pub fn csv(
        &mut self,
        name: &str,
        comments: &[(&str, String)],
        header: &[String],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), Failure> {
        let path = self.path(name)?;
        let io = |e: std::io::Error| Failure::output(&path, e);
        let mut file = File::create(&path).map_err(io)?;
        writeln!(file, "# config_hash={}", self.hash).map_err(io)?;
        for (k, v) in comments {
            writeln!(file, "# {k}={v}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(file);
        let csv_err = |e: csv::Error| Failure::output(&path, std::io::Error::other(e));
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }

    pub fn diagnostics(
        &mut self,
        name: &str,
        comments: &[(&str, String)],
        dim: Dim,
        samples: &[DiagnosticSample],
    ) -> Result<(), Failure> {
        let transverse: Vec<usize> = (2..dim.potentials()).collect();
        let mut header: Vec<String> = ["t", "charge", "l1_u", "l1_v", "gauge_residual"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend(transverse.iter().map(|j| format!("sup_a{j}")));
        header.extend(transverse.iter().map(|j| format!("sup_cone_a{j}")));
        header.push("sup_transverse_sum_cone".into());
        header.push("forcing_l2".into());
        header.extend((0..dim.potentials()).map(|mu| format!("source_l1_a{mu}")));
        header.push("min_modulus_ratio".into());
        let rows = samples.iter().map(|d| {
            let mut row = vec![num(d.t), num(d.charge), num(d.l1_u), num(d.l1_v), num(d.gauge_residual)];
            row.extend(d.sup_transverse.iter().copied().map(num));
            row.extend(d.sup_transverse_cone.iter().copied().map(num));
            row.push(num(d.sup_transverse_sum_cone));
            row.push(num(d.forcing_l2));
            row.extend(d.source_l1.iter().copied().map(num));
            row.push(d.min_modulus_ratio.map(num).unwrap_or_default());
            row
        });
        self.csv(name, comments, &header, rows)
    }
}

/// Round-trip exact decimal form.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Envelope<T>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}
