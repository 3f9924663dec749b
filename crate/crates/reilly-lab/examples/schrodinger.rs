//! Bounds for `L_T + q` on the unit sphere with a constant and a
//! non-constant potential.

use reilly_lab::immersion::{gallery, GallerySpec};
use reilly_lab::reilly::{schrodinger_report, OperatorSpec, Potential, Resolution};

fn main() -> reilly_lab::Result<()> {
    let imm = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 })?;
    let potentials = [
        Potential::Constant { value: 3.0 },
        Potential::Coordinate { axis: 0, scale: 3.0, offset: 0.0 },
        Potential::Coordinate { axis: 2, scale: 1.0, offset: 2.0 },
    ];
    for q in potentials {
        let spec = OperatorSpec::identity(0).with_potential(q);
        let r = schrodinger_report(&imm, &spec, Resolution::Fem { level: 4 })?;
        println!(
            "{:<28} lambda2 {:.6} rhs {:.6} (qbar {:.3}) gap {:+.3e} potential spread {:.3e}",
            r.operator,
            r.lambda2,
            r.rhs,
            r.qbar.unwrap_or(0.0),
            r.gap,
            r.equality.potential_condition_spread.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
