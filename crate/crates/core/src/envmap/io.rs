use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EnvironmentMap, Parameterization};
use crate::codec;
use crate::error::{Error, Result};

const SIDECAR_LEN: usize = 32;

#[derive(Serialize, Deserialize)]
struct Sidecar {
    param: Parameterization,
}

/// `map.pfm` -> `map.json`
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Sidecar body: compact JSON space-padded to 32 bytes with a trailing newline.
pub fn encode_sidecar(param: Parameterization) -> Vec<u8> {
    let mut s = serde_json::to_string(&Sidecar { param }).expect("sidecar serializes");
    while s.len() < SIDECAR_LEN - 1 {
        s.push(' ');
    }
    s.push('\n');
    s.into_bytes()
}

/// Writes the map by extension (PFM with alpha sibling, PNG, or PPM) plus its sidecar.
pub fn save_envmap(path: &Path, map: &EnvironmentMap) -> Result<()> {
    codec::write_rgba(path, map.texels())?;
    codec::write_file(&sidecar_path(path), &encode_sidecar(map.param()))
}

/// Reads a map; without a sidecar the parameterization is inferred from the
/// aspect ratio (2:1 LatLong, 1:1 SphereMap).
pub fn load_envmap(path: &Path) -> Result<EnvironmentMap> {
    let texels = codec::read_rgba(path)?;
    let side = sidecar_path(path);
    let param = if side.exists() {
        let bytes = codec::read_file(&side)?;
        serde_json::from_slice::<Sidecar>(&bytes)
            .map_err(|source| Error::Json { path: side, source })?
            .param
    } else {
        match texels.dims() {
            (w, h) if w == 2 * h => Parameterization::LatLong,
            (w, h) if w == h => Parameterization::SphereMap,
            (w, h) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("no sidecar and {w}x{h} matches no parameterization"),
                })
            }
        }
    };
    EnvironmentMap::new(param, texels)
}
