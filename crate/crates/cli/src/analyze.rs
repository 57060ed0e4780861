use rolemodel::analysis::{export_transition_graphs, occupancy_table, state_summary, tables_csv};
use rolemodel::corpus::EffType;

use crate::artifact::{read_json_payload, write_text, Provenance};
use crate::config::RunConfig;
use crate::decode::{decode_all, load_profiles, DecodedUser};
use crate::input::load_sequences;
use crate::Failure;

// Decoded paths: an explicit decoded file, else `decoded.json` in the
// output directory, else a fresh decode of the configured input, else none.
fn decoded_paths(cfg: &RunConfig, profiles: &rolemodel::sttm::StateProfiles) -> Result<Vec<DecodedUser>, Failure> {
    if let Some(p) = &cfg.paths.decoded {
        return read_json_payload(p, "sequences");
    }
    let default = cfg.out_dir().join("decoded.json");
    if default.exists() {
        return read_json_payload(&default, "sequences");
    }
    match load_sequences(cfg) {
        Ok(set) => decode_all(profiles, &set),
        Err(_) if cfg.paths.sequences.is_none() && cfg.paths.documents.is_none() => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let profiles = load_profiles(&cfg.path_or_out(&cfg.paths.profiles, "profiles.json"))?;
    let decoded = decoded_paths(cfg, &profiles)?;
    let paths: Vec<Vec<usize>> = decoded.iter().map(|d| d.states.clone()).collect();
    let cats: Vec<Vec<usize>> = decoded.iter().map(|d| d.categories.clone()).collect();
    let states = profiles.hyper.states;

    let occupancy = occupancy_table(&paths, &cats, states)?;
    let summary = state_summary(&profiles, cfg.analyze.top_topics, cfg.analyze.top_words);
    let labels: Vec<&str> = if profiles.hyper.doc_types == EffType::COUNT {
        EffType::ALL.iter().map(|t| t.label()).collect()
    } else {
        Vec::new()
    };
    let prov = Provenance::of(cfg);
    let mut tables = tables_csv(&summary, &labels, &occupancy)?;
    tables.push_str(&prov.csv_rows());

    let out = cfg.out_dir();
    write_text(&out.join("tables.csv"), &tables)?;
    let graphs = export_transition_graphs(&paths, &cats, states, &cfg.analyze.categories)?;
    for (cat, dot) in &graphs {
        write_text(
            &out.join("graphs").join(format!("{}.dot", cat.label())),
            &format!("{}{dot}", prov.dot_comment()),
        )?;
    }
    eprintln!(
        "analyze: {} decoded sequences, {} graphs -> {}",
        decoded.len(),
        graphs.len(),
        out.display()
    );
    Ok(())
}
