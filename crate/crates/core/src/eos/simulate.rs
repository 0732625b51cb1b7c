//! Synthetic stand-in for the molecular simulation of one state point.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{truth_derivs, Eos, EosError, MassieuDerivs, StatePoint};
use crate::wms::TaskObject;

pub const RESULT_FILE: &str = "result.txt";

/// Truth derivatives plus Gaussian noise of standard deviation
/// `sigma_rel * |A_nm|`, reproducible per (task id, seed).
pub fn simulate_state_point(
    task: &TaskObject,
    truth: &Eos,
    orders: &[(u32, u32)],
    sigma_rel: f64,
    seed: u64,
) -> Result<MassieuDerivs, EosError> {
    let get = |k: &str| task.param(k).ok_or_else(|| EosError::MissingParam(k.to_string()));
    let sp = StatePoint::new(get("T")?, get("rho")?, get("step")? as u32)?;
    let mut out = truth_derivs(sp, truth, orders);
    if sigma_rel > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(task.id);
        for e in &mut out.entries {
            let z: f64 = StandardNormal.sample(&mut rng);
            e.sigma = sigma_rel * e.value.abs();
            e.value += e.sigma * z;
        }
    }
    Ok(out)
}

/// Plain-text `key=value` rendering of a result.
pub fn format_result(d: &MassieuDerivs) -> String {
    let mut s = String::from("# osmoflow state point result\n# A<n><m> = tau^n delta^m d^(n+m) a_res / dtau^n ddelta^m; sigma_A<n><m> its standard error\n");
    let _ = writeln!(s, "T={:?}\nrho={:?}\nstep={}", d.state.t, d.state.rho, d.state.step);
    for e in &d.entries {
        let _ = writeln!(s, "A{}{}={:?}\nsigma_A{}{}={:?}", e.n, e.m, e.value, e.n, e.m, e.sigma);
    }
    s
}

/// Writes `format_result` to `root/taskdir/result.txt`.
pub fn write_result_file(root: &Path, taskdir: &str, d: &MassieuDerivs) -> Result<PathBuf, EosError> {
    let dir = root.join(taskdir);
    std::fs::create_dir_all(&dir).map_err(|e| EosError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(RESULT_FILE);
    std::fs::write(&path, format_result(d)).map_err(|e| EosError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}
