//! Thin wrapper over the `git` command line.

use std::ffi::OsStr;
use std::fs;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use crate::error::SourceError;
use crate::net::Deadline;

/// A work tree with `.git`, or a bare repository.
pub(crate) fn is_repository(dir: &Path) -> bool {
    dir.join(".git").exists() || (dir.join("HEAD").is_file() && dir.join("objects").is_dir())
}

pub(crate) fn clone(url: &str, target: &Path, deadline: Deadline) -> Result<(), SourceError> {
    let partial = target.with_extension(format!("partial-{}", std::process::id()));
    if partial.exists() {
        fs::remove_dir_all(&partial)?;
    }
    let result = run(
        url,
        None,
        [OsStr::new("clone"), OsStr::new("--quiet"), OsStr::new("--"), OsStr::new(url), partial.as_os_str()],
        deadline,
    );
    if let Err(e) = result {
        let _ = fs::remove_dir_all(&partial);
        return Err(e);
    }
    fs::rename(&partial, target)?;
    Ok(())
}

/// Moves the cached clone to the remote default branch head, discarding
/// local changes.
pub(crate) fn update(url: &str, target: &Path, deadline: Deadline) -> Result<(), SourceError> {
    let git = |args: &[&str]| run(url, Some(target), args.iter().map(OsStr::new), deadline);
    git(&["remote", "set-url", "origin", url])?;
    git(&["fetch", "--quiet", "--prune", "origin"])?;
    let _ = git(&["remote", "set-head", "origin", "--auto"]);
    if git(&["reset", "--quiet", "--hard", "origin/HEAD"]).is_err() {
        git(&["reset", "--quiet", "--hard", "FETCH_HEAD"])?;
    }
    git(&["clean", "-q", "-f", "-d", "-x"])
}

fn run<'a>(
    url: &str,
    dir: Option<&Path>,
    args: impl IntoIterator<Item = &'a OsStr>,
    deadline: Deadline,
) -> Result<(), SourceError> {
    let fail = |message: String| SourceError::Acquire { url: url.to_string(), message };
    let mut cmd = Command::new("git");
    if let Some(dir) = dir {
        cmd.arg("-C").arg(dir);
    }
    cmd.args(args)
        .env("GIT_TERMINAL_PROMPT", "0")
        .env("GIT_ASKPASS", "")
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().map_err(|e| fail(format!("cannot run git: {e}")))?;
    let mut stderr = child.stderr.take().expect("piped stderr");
    let reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if deadline.expired() {
            let _ = child.kill();
            let _ = child.wait();
            return Err(fail("deadline exceeded".into()));
        }
        thread::sleep(Duration::from_millis(10));
    };
    let stderr = reader.join().unwrap_or_default();
    if status.success() {
        Ok(())
    } else {
        let detail = stderr.trim();
        Err(fail(if detail.is_empty() { format!("git exited with {status}") } else { detail.to_string() }))
    }
}
