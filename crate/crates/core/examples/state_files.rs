//! Writing state files and driving the command-line front end in-process.

use qsrlab::cli::{load_state, run_command, save_state, StateFile};
use qsrlab::states::{random_state, RandomKind, RegisterLayout};

fn main() -> qsrlab::Result<()> {
    let dir = std::env::temp_dir().join("qsrlab-example");
    std::fs::create_dir_all(&dir).map_err(|e| qsrlab::Error::Input(e.to_string()))?;
    let layout = RegisterLayout::new([("A", 2), ("B", 2)])?;
    let rho = random_state(layout.clone(), RandomKind::MixedGinibre, 1);
    let sigma = random_state(layout, RandomKind::MixedGinibre, 2);
    let rho_path = dir.join("rho.json");
    let sigma_path = dir.join("sigma.json");
    save_state(&StateFile::from_mixed(&rho), &rho_path)?;
    save_state(&StateFile::from_mixed(&sigma), &sigma_path)?;

    let back = load_state(&rho_path)?.density();
    println!(
        "reload error {:.1e}",
        back.matrix().max_abs_diff(rho.matrix())
    );

    let (code, report) = run_command(&[
        "entropy",
        "--quantity",
        "dh",
        "--eps",
        "0.1",
        "--in",
        rho_path.to_str().unwrap(),
        "--sigma",
        sigma_path.to_str().unwrap(),
    ]);
    println!("exit {code}: D_H = {}", report.results["result"]["value"]);

    let (code, report) = run_command(&[
        "entropy",
        "--quantity",
        "mi",
        "--partition",
        "A,B",
        "--in",
        rho_path.to_str().unwrap(),
    ]);
    println!(
        "exit {code}: I(A:B) = {}",
        report.results["result"]["value"]
    );
    Ok(())
}
