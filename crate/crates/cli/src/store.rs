use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use qtraffic::autoencoder::Autoencoder;
use qtraffic::eval::{EncoderKey, EncoderStore};
use qtraffic::nn::checkpoint::{read_checkpoint, write_checkpoint};
use qtraffic::nn::{ParamBlock, ParameterBundle, Parameterized};

const HISTORY_BLOCK: &str = "meta.history";

/// Encoder checkpoints under `<dir>/<key>.ckpt`.
#[derive(Clone, Debug)]
pub struct FileStore {
    dir: PathBuf,
    pub hits: usize,
    pub misses: usize,
    /// Every key looked up, in order.
    pub keys: Vec<EncoderKey>,
}

impl FileStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), hits: 0, misses: 0, keys: Vec::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &EncoderKey) -> PathBuf {
        self.dir.join(Self::file_name(key))
    }

    pub fn file_name(key: &EncoderKey) -> String {
        format!("{}.ckpt", key.file_stem())
    }
}

fn tag_for(ae: &Autoencoder) -> String {
    format!("autoencoder window={} n_latent={}", ae.window(), ae.n_latent())
}

impl EncoderStore for FileStore {
    fn load(&mut self, key: &EncoderKey) -> qtraffic::Result<Option<(Autoencoder, Vec<f64>)>> {
        self.keys.push(key.clone());
        let path = self.path_for(key);
        if !path.exists() {
            self.misses += 1;
            return Ok(None);
        }
        let (tag, mut bundle) = read_checkpoint(BufReader::new(File::open(&path)?))?;
        let window = tag
            .split_whitespace()
            .find_map(|t| t.strip_prefix("window="))
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| qtraffic::Error::Usage(format!("{}: unexpected tag `{tag}`", path.display())))?;
        let history = match bundle.blocks.last() {
            Some(b) if b.name == HISTORY_BLOCK => bundle.blocks.pop().map(|b| b.values).unwrap_or_default(),
            _ => Vec::new(),
        };
        let mut ae = Autoencoder::zeros(window, key.n_latent);
        ae.load_params(&bundle)?;
        ae.epochs_run = history.len();
        ae.final_loss = history.last().copied();
        self.hits += 1;
        Ok(Some((ae, history)))
    }

    fn store(&mut self, key: &EncoderKey, ae: &Autoencoder, history: &[f64]) -> qtraffic::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let mut bundle = ParameterBundle::snapshot(ae);
        bundle.blocks.push(ParamBlock { name: HISTORY_BLOCK.into(), shape: vec![history.len()], values: history.to_vec() });
        let path = self.path_for(key);
        let tmp = path.with_extension("ckpt.tmp");
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_checkpoint(&mut w, &tag_for(ae), &bundle)?;
        w.flush()?;
        drop(w);
        std::fs::rename(tmp, path)?;
        Ok(())
    }
}
