use std::process::Command;

fn main() {
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/refs");
    let describe = Command::new("git")
        .args(["describe", "--tags", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_default();
    if !describe.is_empty() {
        let version = env!("CARGO_PKG_VERSION");
        println!("cargo:rustc-env=CAUTIOUS_GIT_DESCRIBE=v{version}-g{describe}");
    }
}
