//! All-or-nothing file output.
//!
//! Files are written to temporaries in the destination directory and only
//! renamed into place by [`OutputSet::commit`]. Dropping an uncommitted set
//! removes every temporary, so a failed command leaves no partial artifacts.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

pub struct OutputSet {
    dir: PathBuf,
    pending: Vec<(NamedTempFile, PathBuf)>,
}

/// Buffered writer into one pending file of an [`OutputSet`].
pub struct PendingFile<'a> {
    inner: BufWriter<&'a mut NamedTempFile>,
}

impl Write for PendingFile<'_> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.inner.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

impl OutputSet {
    pub fn new(dir: impl AsRef<Path>) -> io::Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            pending: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Opens a new pending file that will become `dir/name` on commit.
    pub fn create(&mut self, name: &str) -> io::Result<PendingFile<'_>> {
        let tmp = NamedTempFile::new_in(&self.dir)?;
        self.pending.push((tmp, self.dir.join(name)));
        let (tmp, _) = self.pending.last_mut().expect("just pushed");
        Ok(PendingFile {
            inner: BufWriter::with_capacity(1 << 16, tmp),
        })
    }

    /// Writes a whole pending file at once.
    pub fn write_file(&mut self, name: &str, contents: &[u8]) -> io::Result<()> {
        let mut f = self.create(name)?;
        f.write_all(contents)?;
        f.flush()
    }

    pub fn commit(self) -> io::Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.pending.len());
        for (tmp, dest) in self.pending {
            tmp.as_file().sync_all()?;
            tmp.persist(&dest).map_err(|e| e.error)?;
            written.push(dest);
        }
        Ok(written)
    }
}

/// Incremental SHA-256 over emitted bytes, rendered as lowercase hex.
#[derive(Default, Clone)]
pub struct Checksum(Sha256);

impl Checksum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, bytes: &[u8]) {
        self.0.update(bytes);
    }

    pub fn hex(self) -> String {
        hex::encode(self.0.finalize())
    }
}

/// Checksum over the concatenated contents of `files`, in order.
pub fn checksum_files<P: AsRef<Path>>(files: &[P]) -> io::Result<String> {
    let mut sum = Checksum::new();
    for f in files {
        sum.update(&fs::read(f)?);
    }
    Ok(sum.hex())
}
