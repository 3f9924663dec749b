//! Frames, principal curvatures and mean curvature vectors of the gallery.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reilly_lab::immersion::{gallery, gallery_names, GallerySpec};

fn main() -> reilly_lab::Result<()> {
    for (name, synopsis) in gallery_names() {
        println!("{name:<28} {synopsis}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let specs = [
        GallerySpec::Sphere { n: 2, a: 0.6, codim: 1, c: 1 },
        GallerySpec::CliffordTorus { m: 1, n: 2, a: 0.6, c: -1 },
        GallerySpec::VeroneseRp2,
        GallerySpec::Ellipsoid { axes: vec![1.0, 1.0, 1.3] },
        GallerySpec::HyperbolicGeodesicSphere { r: 1.0, n: 2 },
    ];
    for spec in &specs {
        let imm = gallery(spec)?;
        let y = imm.sample_points(&mut rng, 1).remove(0);
        let f = imm.frame_at(&y)?;
        let hv = f.h.mean_vector();
        println!(
            "{:<40} n={} p={} |H|={:.6} |h|^2={:.6}",
            imm.name,
            imm.n(),
            imm.codim(),
            hv.norm(),
            f.h.squared_norm()
        );
    }
    Ok(())
}
