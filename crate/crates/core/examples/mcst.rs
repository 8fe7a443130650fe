//! Spanning tree of the bundled backbone and the hop-distance rows a router files cut links under.

use gospf::graph::{compute_mcst, hop_distance};
use gospf::scenarios::garr48;
use gospf::NodeId;

fn main() {
    let topology = garr48();
    let tree = compute_mcst(&topology).expect("backbone is connected");
    println!(
        "{} routers, {} links, {} on the tree",
        topology.node_count(),
        topology.link_count(),
        tree.len()
    );

    let root = NodeId(0);
    let mut rows = std::collections::BTreeMap::<u32, Vec<String>>::new();
    for link in topology.links().iter().filter(|l| !tree.contains(l.id)) {
        rows.entry(hop_distance(&topology, root, link.id).unwrap()).or_default().push(format!(
            "{}-{}",
            topology.node(link.a).unwrap().name,
            topology.node(link.b).unwrap().name
        ));
    }
    println!("off-tree links by distance from {}:", topology.node(root).unwrap().name);
    for (row, links) in rows {
        println!("  {row}: {}", links.join(" "));
    }
}
