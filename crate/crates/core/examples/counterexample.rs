//! A bounded divergence-measure field whose ball averages at the origin do
//! not converge: large balls see at most `1 - 1/6^d`, small balls at least
//! `1 - δ`.

use tvcalib::counterexample::{div_lp_norm, lebesgue_failure_report, CounterexampleSettings};

fn main() -> tvcalib::Result<()> {
    for (d, delta) in [(2, 0.01), (3, 1e-3)] {
        let cfg = CounterexampleSettings::new(d, 0.5, delta).build()?;
        let report = lebesgue_failure_report(&cfg, 10_000)?;
        println!("d = {d}, δ = {delta}, radii {:?}", cfg.radii());
        print!("{}", report.to_csv());
        println!(
            "gap {:.5} (bound {:.5}), passed {}",
            report.gap,
            report.gap_bound,
            report.passed()
        );
        for p in [d as f64 - 0.5, d as f64 + 0.5] {
            let n = div_lp_norm(&cfg, p, 10_000)?;
            println!(
                "∫|div z|^{p} = {:.4e} (bound {:.4e}, supercritical {})",
                n.value, n.bound, n.supercritical
            );
        }
    }
    Ok(())
}
