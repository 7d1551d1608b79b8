//! `ragforge stores`: list and delete local stores.

use ragforge::vector_store::{delete_store, list_stores};

use crate::commands::{operational, store_error_name};
use crate::config::Settings;
use crate::{CliError, StoresAction, StoresArgs};

pub fn run(mut settings: Settings, args: StoresArgs) -> Result<(), CliError> {
    if let Some(root) = args.store_root {
        settings.store_root = root;
    }
    match args.action {
        StoresAction::List => {
            let manifests = list_stores(&settings.store_root)
                .map_err(|e| operational(store_error_name(&e), e))?;
            if manifests.is_empty() {
                println!("no stores");
                return Ok(());
            }
            for m in manifests {
                println!(
                    "{}  id={}  records={}  dim={}  embedder={}  created={}",
                    m.name, m.store_id, m.record_count, m.dimension, m.embedder_id, m.created_at
                );
            }
            Ok(())
        }
        StoresAction::Delete { name } => {
            delete_store(&settings.store_root, &name)
                .map_err(|e| operational(store_error_name(&e), e))?;
            println!("deleted store '{name}'");
            Ok(())
        }
    }
}
