//! Ball mesh generation, the refinement kernels and the mesh text format.

use std::error::Error;

use pbe_core::mesh::{
    build_ball_mesh_with, read_mesh, refine_around_points, refine_marked_with, refine_uniform, write_mesh,
    BallMeshParams, MarkedMode, Point3, Region,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = BallMeshParams { layers: 3, surface_subdivisions: 1, ..Default::default() };
    let mesh = build_ball_mesh_with(&params)?;
    let molecular = mesh.cells_in_region(Region::Molecular).len();
    println!(
        "generated: {} vertices, {} cells ({molecular} molecular), {} interface facets, min dihedral {:.1} deg",
        mesh.num_vertices(),
        mesh.num_cells(),
        mesh.interface_facets().len(),
        mesh.min_dihedral_angle_deg()
    );

    let uniform = refine_uniform(&mesh);
    println!("uniform: {} vertices, {} cells", uniform.num_vertices(), uniform.num_cells());

    let interface = mesh.cells_touching_interface();
    for mode in [MarkedMode::Bisect, MarkedMode::SplitAllEdges, MarkedMode::RedGreen] {
        let refined = refine_marked_with(&mesh, &interface, mode)?;
        refined.validate()?;
        println!(
            "{:>9} on {} interface cells: {} vertices, min dihedral {:.1} deg",
            mode.name(),
            interface.len(),
            refined.num_vertices(),
            refined.min_dihedral_angle_deg()
        );
    }

    let local = refine_around_points(&mesh, &[Point3::ORIGIN], 2)?;
    println!("two rounds around the centre: {} vertices", local.num_vertices());

    let text = write_mesh(&mesh);
    let back = read_mesh(&text)?;
    assert_eq!(back.num_cells(), mesh.num_cells());
    println!("mesh text: {} bytes, first line `{}`", text.len(), text.lines().next().unwrap_or(""));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
