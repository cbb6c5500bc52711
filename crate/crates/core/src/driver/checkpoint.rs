use std::fs;
use std::io::Write;
use std::path::Path;

use super::{DriverError, RunStats};

const VERSION: u32 = 1;

/// Resume point: every `n < completed_upper_bound` has been written out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub config_hash: String,
    pub completed_upper_bound: u64,
    pub stats: RunStats,
}

impl Checkpoint {
    fn render(&self) -> String {
        let mut line = format!(
            "version={VERSION},config={},bound={}",
            self.config_hash, self.completed_upper_bound
        );
        for (name, value) in self.stats.counters() {
            line.push_str(&format!(",{name}={value}"));
        }
        line.push('\n');
        line
    }

    fn parse(text: &str) -> Result<Self, String> {
        let line = text.strip_suffix('\n').ok_or("missing trailing newline")?;
        if line.contains('\n') {
            return Err("more than one line".into());
        }
        let mut fields = line.split(',').map(|f| f.split_once('=').ok_or(format!("bad field {f:?}")));
        let mut next = |want: &str| -> Result<String, String> {
            let (key, value) = fields.next().ok_or(format!("missing {want}"))??;
            if key != want {
                return Err(format!("expected {want}, found {key}"));
            }
            Ok(value.to_owned())
        };
        let int = |s: String| s.parse::<u64>().map_err(|e| format!("{s:?}: {e}"));
        if int(next("version")?)? != VERSION as u64 {
            return Err("unsupported version".into());
        }
        let config_hash = next("config")?;
        if config_hash.len() != 32 || !config_hash.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err("bad config hash".into());
        }
        let completed_upper_bound = int(next("bound")?)?;
        let mut stats = RunStats::default();
        for name in RunStats::COUNTER_NAMES {
            *stats.counter_mut(name) = int(next(name)?)?;
        }
        if fields.next().is_some() {
            return Err("trailing fields".into());
        }
        Ok(Checkpoint { config_hash, completed_upper_bound, stats })
    }
}

/// Writes the checkpoint atomically: a sibling temporary file renamed over the target.
pub fn checkpoint_save(path: &Path, checkpoint: &Checkpoint) -> Result<(), DriverError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    let mut file = fs::File::create(tmp)?;
    file.write_all(checkpoint.render().as_bytes())?;
    file.sync_all()?;
    fs::rename(tmp, path)?;
    Ok(())
}

pub fn checkpoint_load(path: &Path) -> Result<Checkpoint, DriverError> {
    let text = fs::read_to_string(path)?;
    Checkpoint::parse(&text).map_err(|e| DriverError::Checkpoint(format!("{}: {e}", path.display())))
}
