use std::process::ExitCode;

pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Default)]
pub struct Report {
    outcomes: Vec<Outcome>,
}

impl Report {
    /// Record and print one criterion. A panic inside `check` is a failure.
    pub fn run(&mut self, name: &'static str, check: impl FnOnce() -> Result<String, String>) {
        let (passed, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)) {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                (false, format!("panicked: {msg}"))
            }
        };
        println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        self.outcomes.push(Outcome { name, passed, detail });
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn finish(self) -> ExitCode {
        let failed: Vec<_> = self.outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
        println!("acceptance: {} passed, {} failed", self.outcomes.len() - failed.len(), failed.len());
        if failed.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }
    }
}

/// `Ok` when `|got - want| <= tol`.
pub fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<String, String> {
    let msg = format!("{label} {got} (want {want} ± {tol})");
    if (got - want).abs() <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn exact<T: PartialEq + std::fmt::Debug>(label: &str, got: T, want: T) -> Result<String, String> {
    let msg = format!("{label} {got:?} (want {want:?})");
    if got == want {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Join several checks; all must pass.
pub fn all(parts: Vec<Result<String, String>>) -> Result<String, String> {
    let ok = parts.iter().all(|p| p.is_ok());
    let text = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("[x] {e}"))).collect::<Vec<_>>().join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}
