use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::failure::Failure;

/// Output directory plus the comment header stamped on every file.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    header: Vec<String>,
}

impl Output {
    /// The directory must already exist.
    pub fn new(dir: &Path, command: &str, config_hash: &str) -> Result<Self, Failure> {
        if !dir.is_dir() {
            return Err(Failure::io(dir, "output directory does not exist"));
        }
        let header = vec![
            format!("indentfit {command} {}", env!("CARGO_PKG_VERSION")),
            format!("config-hash {config_hash}"),
        ];
        Ok(Self { dir: dir.to_path_buf(), header })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Write `body` after the header, via a temporary file renamed into place.
    pub fn write(&self, name: &str, body: &str) -> Result<PathBuf, Failure> {
        let mut text = String::new();
        for line in &self.header {
            text.push_str("# ");
            text.push_str(line);
            text.push('\n');
        }
        text.push_str(body);
        self.write_raw(name, text.as_bytes())
    }

    /// Write `bytes` unchanged, atomically.
    pub fn write_raw(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        let target = self.path(name);
        let tmp = self.path(&format!(".{name}.{}.tmp", std::process::id()));
        let result = fs::File::create(&tmp)
            .and_then(|mut f| {
                f.write_all(bytes)?;
                f.sync_all()
            })
            .and_then(|_| fs::rename(&tmp, &target));
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            return Err(Failure::io(&target, e));
        }
        Ok(target)
    }
}
