//! Subcommand options shared by the command line and JSON config files.
//!
//! Every option is optional here so that a flag can be told apart from its
//! absence; flags win over config values and built-in defaults fill the rest.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Deserializer};

use crate::CliError;

/// Accepts `"4"`, `4` or `"auto"`.
fn number_or_string<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(u64),
        Text(String),
    }
    Ok(Option::<Raw>::deserialize(d)?.map(|raw| match raw {
        Raw::Int(n) => n.to_string(),
        Raw::Text(s) => s,
    }))
}

/// Fills every `None` field of `self` from `other`.
macro_rules! layered {
    ($name:ident { $($field:ident),* $(,)? }) => {
        impl $name {
            pub fn or(self, other: $name) -> $name {
                $name { $($field: self.$field.or(other.$field)),* }
            }
        }
    };
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalOpts {
    /// Directory of predicted masks
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Directory of ground-truth masks with the same file names
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Patch size for the Betti-0 error [default: 64]
    #[arg(long)]
    pub patch: Option<usize>,
    /// Pixel connectivity, 4 or 8 [default: 8]
    #[arg(long)]
    pub conn: Option<u8>,
    /// Standard deviation flavour: population or sample [default: population]
    #[arg(long)]
    pub std: Option<String>,
    /// Report format: csv or md [default: csv]
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads, a positive integer or auto [default: auto]
    #[arg(long)]
    #[serde(default, deserialize_with = "number_or_string")]
    pub threads: Option<String>,
}
layered!(EvalOpts {
    pred,
    gt,
    patch,
    conn,
    std,
    out,
    threads
});

#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepairOpts {
    /// Directory of masks to repair
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Directory for the repaired masks
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest gap to bridge, in pixels [default: 20]
    #[arg(long)]
    pub dmax: Option<f64>,
    /// Minimum alignment cosine of both tips [default: 0.5]
    #[arg(long)]
    pub cos: Option<f64>,
    /// Bridge width: dt or fixed:R [default: dt]
    #[arg(long)]
    pub width: Option<String>,
    /// Also write the drawn bridges to this CSV file
    #[arg(long)]
    pub bridges: Option<PathBuf>,
    /// Worker threads, a positive integer or auto [default: auto]
    #[arg(long)]
    #[serde(default, deserialize_with = "number_or_string")]
    pub threads: Option<String>,
}
layered!(RepairOpts {
    input,
    out,
    dmax,
    cos,
    width,
    bridges,
    threads
});

#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentOpts {
    /// Directory of intact ground-truth masks
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Directory for the fragmented masks
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Breaks per mask [default: 3]
    #[arg(long)]
    pub breaks: Option<usize>,
    /// Smallest cut radius [default: 2]
    #[arg(long)]
    pub rmin: Option<u32>,
    /// Largest cut radius [default: 5]
    #[arg(long)]
    pub rmax: Option<u32>,
    /// Generator seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the break records to this CSV file
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Worker threads, a positive integer or auto [default: auto]
    #[arg(long)]
    #[serde(default, deserialize_with = "number_or_string")]
    pub threads: Option<String>,
}
layered!(FragmentOpts {
    gt,
    out,
    breaks,
    rmin,
    rmax,
    seed,
    records,
    threads
});

#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonizeOpts {
    /// Mask file to thin
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Output file; a .pbm extension writes P4, anything else P5
    #[arg(long)]
    pub out: Option<PathBuf>,
}
layered!(SkeletonizeOpts { input, out });

#[derive(Args, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineOpts {
    /// Directory of intact ground-truth masks
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Breaks per mask [default: 3]
    #[arg(long)]
    pub breaks: Option<usize>,
    /// Smallest cut radius [default: 2]
    #[arg(long)]
    pub rmin: Option<u32>,
    /// Largest cut radius [default: 5]
    #[arg(long)]
    pub rmax: Option<u32>,
    /// Generator seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest gap to bridge, in pixels [default: 20]
    #[arg(long)]
    pub dmax: Option<f64>,
    /// Minimum alignment cosine of both tips [default: 0.5]
    #[arg(long)]
    pub cos: Option<f64>,
    /// Bridge width: dt or fixed:R [default: dt]
    #[arg(long)]
    pub width: Option<String>,
    /// Patch size for the Betti-0 error [default: 64]
    #[arg(long)]
    pub patch: Option<usize>,
    /// Pixel connectivity, 4 or 8 [default: 8]
    #[arg(long)]
    pub conn: Option<u8>,
    /// Standard deviation flavour: population or sample [default: population]
    #[arg(long)]
    pub std: Option<String>,
    /// Report format: csv or md [default: md]
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads, a positive integer or auto [default: auto]
    #[arg(long)]
    #[serde(default, deserialize_with = "number_or_string")]
    pub threads: Option<String>,
}
layered!(PipelineOpts {
    gt,
    breaks,
    rmin,
    rmax,
    seed,
    dmax,
    cos,
    width,
    patch,
    conn,
    std,
    out,
    threads
});

/// Reads a JSON object whose keys mirror the subcommand's flags.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
