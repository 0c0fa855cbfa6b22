//! Tour of the file formats: operator-spec JSON, binary grid fields, packed
//! masks with JSON sidecars, and one-byte-per-cell bitmap imports.
//!
//! ```sh
//! cargo run --example operator_files
//! ```

use maxrank::catalog;
use maxrank::domain::{export_bitmap, named_mask, DomainMask, Shape};
use maxrank::grid::{random_band_limited, BoxGrid};
use maxrank::io;

fn main() -> maxrank::Result<()> {
    let dir = std::env::temp_dir().join("maxrank-files-demo");
    std::fs::create_dir_all(&dir)?;

    // operator spec JSON
    let spec = catalog::deviatoric(3)?;
    let spec_path = dir.join("deviatoric3.json");
    io::write_spec_json(&spec_path, &spec)?;
    let back = io::read_spec_json(&spec_path)?;
    println!("spec json: wrote and re-read {back:?}");

    // binary field
    let grid = BoxGrid::new(2, 64, 1.0, 2)?;
    let field = random_band_limited(&grid, 3, 6, 99);
    let field_path = dir.join("field.grf");
    io::write_field(&field_path, &field)?;
    let field2 = io::read_field(&field_path, 2)?;
    println!(
        "field roundtrip: {} points x {} components, bit-identical: {}",
        grid.points(),
        field2.dim(),
        field.data() == field2.data()
    );

    // packed mask with sidecar
    let shape = Shape::Ball {
        center: vec![0.5, 0.5],
        radius: 0.18,
    };
    let mask = DomainMask::from_shape(&grid, &shape)?;
    let mask_path = dir.join("disk.mask");
    mask.write_mask_file(&mask_path, Some(&shape))?;
    let mask2 = DomainMask::read_mask_file(&mask_path, &grid)?;
    println!(
        "mask roundtrip: {} cells, sidecar at {}",
        mask2.cell_count(),
        mask_path.with_extension("mask.json").display()
    );

    // bitmap import of an irregular blob
    let blob = named_mask(&grid, "blob")?;
    let bmp_path = dir.join("blob.bmp8");
    export_bitmap(&blob, &bmp_path)?;
    let blob2 = DomainMask::from_shape(
        &grid,
        &Shape::Bitmap {
            path: bmp_path.to_string_lossy().into_owned(),
        },
    )?;
    println!(
        "bitmap import: {} cells in {} component(s)",
        blob2.cell_count(),
        blob2.component_count()
    );

    println!("\nall demo files under {}", dir.display());
    Ok(())
}
