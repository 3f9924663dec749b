//! A user-supplied tensor field: the report checks ellipticity and the
//! precondition on `T' = (tr T) I - 2T` pointwise before asserting anything.

use std::sync::Arc;

use nalgebra::DMatrix;
use reilly_lab::immersion::{gallery, GallerySpec, PointFrame};
use reilly_lab::reilly::{check_inequality, OperatorKind, OperatorSpec, Resolution, TensorProvider};

struct Stretched(f64);

impl TensorProvider for Stretched {
    fn tensor(&self, frame: &PointFrame) -> reilly_lab::Result<DMatrix<f64>> {
        let z = frame.position[2];
        Ok(DMatrix::from_row_slice(2, 2, &[1.0 + self.0 * z * z, 0.0, 0.0, 1.0]))
    }

    fn label(&self) -> String {
        format!("stretched({})", self.0)
    }
}

fn main() -> reilly_lab::Result<()> {
    let imm = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 })?;
    for s in [0.0, 0.5, 3.0] {
        let spec = OperatorSpec { kind: OperatorKind::Custom(Arc::new(Stretched(s))), potential: None, c: 0 };
        let r = check_inequality(&imm, &spec, Resolution::Fem { level: 4 })?;
        println!(
            "{:<16} lambda2 {:.6} rhs {:.6} gap {:+.3e} T min {:.3} T' min {:+.3} asserted {}",
            r.operator, r.lambda2, r.rhs, r.gap, r.preconditions.t_posdef_min, r.preconditions.tprime_min, r.asserted
        );
        for note in &r.notes {
            println!("    {note}");
        }
    }
    Ok(())
}
