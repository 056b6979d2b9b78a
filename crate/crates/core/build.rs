use std::process::Command;

fn main() {
    let id = std::env::var("BMTRANSFORM_BUILD_ID").ok().or_else(|| {
        let out = Command::new("git")
            .args(["describe", "--tags", "--always", "--dirty"])
            .output()
            .ok()?;
        out.status
            .success()
            .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
            .filter(|s| !s.is_empty())
    });
    let id = id.unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")));
    println!("cargo:rustc-env=BMTRANSFORM_BUILD_ID={id}");
    println!("cargo:rerun-if-env-changed=BMTRANSFORM_BUILD_ID");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/index");
}
