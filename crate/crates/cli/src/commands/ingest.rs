//! `ragforge ingest`: corpus directory → cleaned documents → chunks →
//! embeddings → named vector store.

use std::collections::HashSet;

use ragforge::chunker::chunk_text;
use ragforge::ingest::{ingest_directory, CleanConfig, IngestError};
use ragforge::vector_store::get_or_create_store;

use crate::commands::{build_embedder, ingest_error_name, operational, store_error_name};
use crate::config::Settings;
use crate::{CliError, IngestArgs};

pub fn run(mut settings: Settings, args: IngestArgs) -> Result<(), CliError> {
    if let Some(v) = args.chunk_max {
        settings.chunk.max_chunk_tokens = v;
    }
    if let Some(v) = args.chunk_overlap {
        settings.chunk.overlap_tokens = v;
    }
    if let Some(mode) = &args.chunk_mode {
        settings.chunk_mode = mode
            .parse()
            .map_err(|e| CliError::usage(format!("--chunk-mode: {e}")))?;
    }
    if let Some(d) = args.dimension {
        settings.embed_dimension = d;
    }
    if let Some(name) = args.store {
        settings.store_name = Some(name);
    }
    if let Some(root) = args.store_root {
        settings.store_root = root;
    }
    if let Some(dir) = args.corpus {
        settings.corpus_dir = dir;
    }
    settings.validate().map_err(|e| CliError::usage(e.0))?;
    let store_name = settings
        .require_store_name()
        .map_err(|e| CliError::usage(e.0))?
        .to_string();

    let report =
        ingest_directory(&settings.corpus_dir, &CleanConfig::default()).map_err(|e| match e {
            IngestError::EmptyDirectory(_) => CliError::usage(e.to_string()),
            other => operational(ingest_error_name(&other), other),
        })?;

    let embedder = build_embedder(&settings, settings.embed_dimension);
    let mut store = get_or_create_store(
        &settings.store_root,
        &store_name,
        embedder.dimension(),
        &embedder.embedder_id(),
    )
    .map_err(|e| operational(store_error_name(&e), e))?;

    let mut seen: HashSet<String> = store
        .records()
        .iter()
        .map(|r| r.chunk.doc_id.clone())
        .collect();
    let mut documents = 0usize;
    let mut chunks_total = 0usize;
    let mut duplicates = 0usize;

    for doc in &report.documents {
        if seen.contains(&doc.doc_id) {
            duplicates += 1;
            println!(
                "duplicate skipped: {} (doc_id {})",
                doc.metadata.source_file,
                &doc.doc_id[..12.min(doc.doc_id.len())]
            );
            continue;
        }
        let chunks = chunk_text(
            &doc.doc_id,
            &doc.cleaned_text,
            &settings.chunk,
            settings.chunk_mode,
        )
        .map_err(|e| operational("InvalidConfig", e))?;
        let texts: Vec<String> = chunks.iter().map(|c| c.text.clone()).collect();
        let vectors = embedder
            .embed_batch(&texts)
            .map_err(|e| operational(crate::commands::embedding_error_name(&e), e))?;
        let items = chunks
            .into_iter()
            .zip(vectors)
            .map(|(c, v)| (c, doc.metadata.source_file.clone(), v))
            .collect::<Vec<_>>();
        let added = items.len();
        store
            .add_records(items)
            .map_err(|e| operational(store_error_name(&e), e))?;
        println!("ingested {}: {} chunks", doc.metadata.source_file, added);
        seen.insert(doc.doc_id.clone());
        documents += 1;
        chunks_total += added;
    }

    for failure in &report.failures {
        println!(
            "failed: {}: {}: {}",
            failure.file_name,
            ingest_error_name(&failure.error),
            failure.error
        );
    }

    println!("{documents} documents, {chunks_total} chunks, {chunks_total} records");
    if duplicates > 0 {
        println!("{duplicates} duplicates skipped");
    }
    println!(
        "store '{}' holds {} records",
        store_name,
        store.manifest().record_count
    );
    Ok(())
}
