//! Configuration parsing with paper units, canonical SI provenance, and a
//! run rebuilt from that provenance.
//!
//! ```bash
//! cargo run --example config_roundtrip
//! ```

use levitated_nv::cli::{parse_document, run, Format};

fn main() {
    let toml = "drive_voltage = \"0.25 kV\"\ndrive_frequency = \"16 kHz\"\nring_inner = \"270 um\"\n";
    let cfg = parse_document("trap-design", toml, Format::Toml).unwrap();
    let provenance = cfg.provenance();
    println!("{}", serde_json::to_string_pretty(&provenance).unwrap());

    let dir = std::env::temp_dir().join("levnv-config-roundtrip");
    let files = run(&cfg, &dir).unwrap();
    let doc = std::fs::read_to_string(dir.join("trap-design.json")).unwrap();
    let again = parse_document("trap-design", &doc, Format::Json).unwrap();
    assert_eq!(again.provenance(), provenance);
    println!("\nwrote {} files; the output document parses back to the same configuration\n", files.len());

    for bad in ["drive_voltage = 250", "drive_voltage = \"250 Hz\"", "drive_voltag = \"250 V\"", "drive_frequency = \"2*pi*16 krad/s\""] {
        println!("{bad:38} -> {}", parse_document("trap-design", bad, Format::Toml).unwrap_err());
    }
}
