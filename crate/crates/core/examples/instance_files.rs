//! Instance files and reduction bundles: generate a planted graph, reduce
//! it, save and reload the bundle, then verify it end to end.

use circcons::bundle::{generated_graph_file, reduce_rmcc_to_mscs, GenMode};
use circcons::costfn::Builtin;
use circcons::io::InstanceFile;
use circcons::reductions::MscsOverrides;
use circcons::verify::verify;
use circcons::Guard;

fn main() -> circcons::Result<()> {
    let guard = Guard::default();
    let dir = std::env::temp_dir().join("circcons-example");
    std::fs::create_dir_all(&dir)?;

    let graph = generated_graph_file(3, 3, 2, GenMode::Planted, 42, &guard)?;
    let graph_path = dir.join("graph.json");
    graph.save(&graph_path)?;
    println!("wrote {} (sha256 {})", graph_path.display(), graph.sha256());

    let bundle = reduce_rmcc_to_mscs(&InstanceFile::load(&graph_path)?, &Builtin::Sigma.into(), &MscsOverrides::default(), &guard)?;
    let bundle_path = dir.join("bundle.json");
    bundle.save(&bundle_path)?;
    let reloaded = InstanceFile::load(&bundle_path)?;
    assert_eq!(reloaded, bundle);
    println!("bundle round-trips: {} bytes", bundle.to_json().len());

    let rep = verify(&reloaded, &guard)?;
    print!("{}", rep.to_text());

    let bad = InstanceFile::from_json(r#"{"kind": "mscs", "strings": ["101", "01"], "cost_fn": "sigma"}"#);
    println!("malformed file: {}", bad.unwrap_err());
    Ok(())
}
