//! Evaluates the built-in anisotropy presets: `F`, `F°`, gradients, the
//! duality `F°(∇F(p)) = 1` and the measured convexity constants.

use tvcalib::anisotropy::AnisotropyModel;

fn main() -> tvcalib::Result<()> {
    let x = [0.3, 0.7];
    let p = [1.0, -0.5];
    println!(
        "{:<10} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "preset", "F(p)", "F°(p)", "F°(∇F)", "c0", "delta"
    );
    for name in ["euclidean", "ellipse", "rotating", "ramp", "bump"] {
        let m = AnisotropyModel::preset(name, 2)?;
        let f = m.value(&x, &p)?;
        let fo = m.polar(&x, &p)?;
        let g = m.grad(&x, &p)?;
        let dual = m.polar(&x, &g)?;
        println!(
            "{name:<10} {f:>9.5} {fo:>9.5} {dual:>9.5} {:>9.5} {:>9.5}",
            m.c0(),
            m.delta()
        );
    }

    let m = AnisotropyModel::preset("ellipse", 3)?;
    let z = [2.0, 0.5, -1.0];
    let proj = m.project_dual(&[0.5; 3], &z);
    println!(
        "3-D ellipse: F°(z) = {:.4}, after projection {:.4}",
        m.polar(&[0.5; 3], &z)?,
        m.polar(&[0.5; 3], &proj)?
    );
    Ok(())
}
