//! All-or-nothing output: files are staged next to their targets and only
//! renamed into place on commit. Dropping an uncommitted set removes them.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub struct OutputSet {
    dir: PathBuf,
    staged: Vec<(PathBuf, PathBuf)>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
        })
    }

    /// Stages `bytes` for `name`, a path relative to the output directory.
    pub fn stage(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        let target = self.dir.join(name);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent)?;
        }
        let file_name = target
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let tmp = target.with_file_name(format!(".{file_name}.partial"));
        self.staged.push((tmp.clone(), target));
        fs::write(&tmp, bytes)
    }

    pub fn commit(mut self) -> io::Result<Vec<PathBuf>> {
        let staged = std::mem::take(&mut self.staged);
        let mut done = Vec::new();
        for (i, (tmp, target)) in staged.iter().enumerate() {
            if let Err(e) = fs::rename(tmp, target) {
                for (t, _) in &staged[i..] {
                    let _ = fs::remove_file(t);
                }
                for d in &done {
                    let _ = fs::remove_file(d);
                }
                return Err(e);
            }
            done.push(target.clone());
        }
        Ok(done)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        for (tmp, _) in &self.staged {
            let _ = fs::remove_file(tmp);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncommitted_files_disappear() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut set = OutputSet::new(dir.path()).unwrap();
            set.stage("a.csv", b"x").unwrap();
            set.stage("plot/b.csv", b"y").unwrap();
        }
        assert!(!dir.path().join("a.csv").exists());
        assert!(!dir.path().join(".a.csv.partial").exists());
        assert!(!dir.path().join("plot/.b.csv.partial").exists());
    }

    #[test]
    fn commit_moves_files_into_place() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = OutputSet::new(dir.path()).unwrap();
        set.stage("a.csv", b"x").unwrap();
        set.commit().unwrap();
        assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), b"x");
    }
}
