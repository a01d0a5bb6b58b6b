//! `generate`: write synthetic instances plus a `.meta.json` sidecar.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use schulze_core::generators::{
    mcgarvey_profile, preprocess_emas, random_digraph, random_emas_instance, random_profile, random_tournament,
    reduce_emas, reduce_reachability,
};
use schulze_core::ingest::{parse_tournament, write_profile, write_tournament};
use schulze_core::oracles::emas;
use schulze_core::{build_tournament, CandidateDirectory};

use crate::{read_file, write_file, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Profile realizing an even-weight tournament read from `--input`.
    Mcgarvey,
    /// Uniformly random linear orders.
    UniformProfile,
    RandomTournament,
    /// Reachability reduction of a random digraph, source 0 and target 1.
    ReachReduction,
    /// EMAS reduction of a random ordered edge list.
    EmasReduction,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub model: Model,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Candidates (or digraph vertices for the reductions).
    #[arg(long, default_value_t = 100)]
    pub m: usize,
    /// Pair density for random tournaments and digraphs.
    #[arg(long, default_value_t = 0.94)]
    pub density: f64,
    #[arg(long, default_value_t = 100)]
    pub max_weight: u64,
    #[arg(long, default_value_t = 101)]
    pub voters: usize,
    /// Edge count for the EMAS model.
    #[arg(long, default_value_t = 20)]
    pub edges: usize,
    /// Tournament file for the McGarvey model.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerateReport {
    pub model: Model,
    pub output: String,
    pub metadata: String,
    pub candidates: usize,
    /// Edges for tournament outputs, ballots for profiles.
    pub records: usize,
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn run_generate(args: &GenerateArgs) -> Result<GenerateReport, CliError> {
    let mut meta = json!({
        "model": args.model,
        "seed": args.seed,
    });
    let (text, candidates, records) = match args.model {
        Model::RandomTournament => {
            let t = random_tournament(args.m, args.density, args.max_weight, args.seed)?;
            meta["m"] = json!(args.m);
            meta["density"] = json!(args.density);
            meta["max_weight"] = json!(args.max_weight);
            (write_tournament(&t), t.candidate_count(), t.edge_count())
        }
        Model::UniformProfile => {
            if args.m == 0 || args.voters == 0 {
                return Err(CliError::Usage("--m and --voters must be positive".into()));
            }
            let p = random_profile(args.m, args.voters, args.seed);
            meta["m"] = json!(args.m);
            meta["voters"] = json!(args.voters);
            (
                write_profile(&CandidateDirectory::numeric(args.m), &p)?,
                args.m,
                p.voter_count(),
            )
        }
        Model::Mcgarvey => {
            let input = args
                .input
                .as_ref()
                .ok_or_else(|| CliError::Usage("mcgarvey needs --input <tournament file>".into()))?;
            let t = parse_tournament(&read_file(input)?)?;
            let p = mcgarvey_profile(&t)?;
            meta["input"] = json!(input.display().to_string());
            let m = t.candidate_count();
            (write_profile(&CandidateDirectory::numeric(m), &p)?, m, p.voter_count())
        }
        Model::ReachReduction => {
            if args.m < 2 || !(0.0..=1.0).contains(&args.density) {
                return Err(CliError::Usage(
                    "reach-reduction needs --m >= 2 and --density in [0, 1]".into(),
                ));
            }
            let g = random_digraph(args.m, args.density, args.seed);
            let t = reduce_reachability(&g, 0, 1)?;
            meta["vertices"] = json!(args.m);
            meta["edge_probability"] = json!(args.density);
            meta["digraph_edges"] = json!(g.edges());
            meta["source"] = json!(0);
            meta["target"] = json!(1);
            meta["reachable"] = json!(g.reaches(0, 1));
            (write_tournament(&t), t.candidate_count(), t.edge_count())
        }
        Model::EmasReduction => {
            if args.m == 0 || args.edges == 0 {
                return Err(CliError::Usage("emas-reduction needs --m and --edges positive".into()));
            }
            let inst = preprocess_emas(&random_emas_instance(args.m, args.edges, args.seed));
            let (margins, tie_break) = reduce_emas(&inst)?;
            let t = build_tournament(&margins)?;
            meta["vertices"] = json!(inst.vertex_count());
            meta["edge_order"] = json!(inst.edges());
            meta["designated"] = json!(inst.designated_edge());
            meta["designated_in_emas"] = json!(emas(&inst).designated_kept);
            meta["tie_break"] = json!(tie_break.order());
            (write_tournament(&t), t.candidate_count(), t.edge_count())
        }
    };
    write_file(&args.output, &text)?;
    let sidecar = sidecar_path(&args.output);
    meta["output"] = json!(args.output.display().to_string());
    write_file(&sidecar, &serde_json::to_string_pretty(&meta)?)?;
    Ok(GenerateReport {
        model: args.model,
        output: args.output.display().to_string(),
        metadata: sidecar.display().to_string(),
        candidates,
        records,
    })
}
