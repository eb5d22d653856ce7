//! Charges from a PQR file, solved and refined through the configuration layer.

use std::error::Error;
use std::path::Path;

use pbe_core::app::{emit_table, load_charges, load_config, refine_records, TableFormat};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/methanol.ini");
    let cfg = load_config(Some(&path))?;
    let charges = load_charges(&cfg)?;
    for c in charges.charges() {
        println!("charge {:>6.2} at ({:.2}, {:.2}, {:.2})", c.charge, c.position.x, c.position.y, c.position.z);
    }
    println!("net charge {:.2}\n", charges.total_charge());
    let records = refine_records(&cfg, None, None, None)?;
    print!("{}", emit_table(&records, TableFormat::Aligned));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
