//! Layered configuration: defaults < `ragforge.toml` < environment <
//! command-line flags. Invalid values are rejected at startup with the
//! offending key named.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ragforge::chunker::{ChunkConfig, ChunkMode};
use ragforge::generation::{GenerationBackend, GenerationConfig};

/// A configuration problem is a usage error: exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    store: StoreSection,
    #[serde(default)]
    corpus: CorpusSection,
    #[serde(default)]
    chunk: ChunkSection,
    #[serde(default)]
    retrieve: RetrieveSection,
    #[serde(default)]
    prompt: PromptSection,
    #[serde(default)]
    embed: EmbedSection,
    #[serde(default)]
    generation: GenerationSection,
    #[serde(default)]
    remote: RemoteSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreSection {
    root: Option<String>,
    name: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusSection {
    dir: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChunkSection {
    max_tokens: Option<usize>,
    overlap: Option<usize>,
    mode: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RetrieveSection {
    k: Option<usize>,
    min_score: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PromptSection {
    template_path: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbedSection {
    backend: Option<String>,
    dimension: Option<usize>,
    endpoint: Option<String>,
    model: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerationSection {
    backend: Option<String>,
    model: Option<String>,
    temperature: Option<f64>,
    top_p: Option<f64>,
    endpoint: Option<String>,
    timeout_s: Option<u64>,
    max_retries: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RemoteSection {
    endpoint: Option<String>,
    assistant_name: Option<String>,
}

/// Which embedder the pipeline runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbedBackendChoice {
    Reference,
    Remote,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub store_root: PathBuf,
    pub store_name: Option<String>,
    pub corpus_dir: PathBuf,
    pub chunk: ChunkConfig,
    pub chunk_mode: ChunkMode,
    pub retrieve_k: usize,
    pub retrieve_min_score: f64,
    pub template_path: Option<PathBuf>,
    pub embed_backend: EmbedBackendChoice,
    pub embed_dimension: usize,
    pub embed_endpoint: Option<String>,
    pub embed_model: Option<String>,
    pub generation_backend: GenerationBackend,
    pub generation_model: Option<String>,
    pub temperature: f64,
    pub top_p: f64,
    pub generation_endpoint: String,
    pub timeout_s: u64,
    pub max_retries: u32,
    pub remote_endpoint: Option<String>,
    pub remote_assistant_name: String,
}

impl Settings {
    /// Load the config file (when present), apply environment overrides,
    /// and validate. Flag overrides are applied afterwards by the command
    /// layer, then [`Settings::validate`] runs again.
    pub fn load(config_path: Option<&Path>) -> Result<Self, ConfigError> {
        let file = match config_path {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    ConfigError(format!("cannot read config file {}: {e}", path.display()))
                })?;
                parse_file(&text, path)?
            }
            None => {
                let default_path = Path::new("ragforge.toml");
                if default_path.is_file() {
                    let text = std::fs::read_to_string(default_path).map_err(|e| {
                        ConfigError(format!("cannot read config file ragforge.toml: {e}"))
                    })?;
                    parse_file(&text, default_path)?
                } else {
                    FileConfig::default()
                }
            }
        };

        let env = |key: &str| std::env::var(key).ok().filter(|v| !v.is_empty());

        let chunk = ChunkConfig {
            max_chunk_tokens: file.chunk.max_tokens.unwrap_or(800),
            overlap_tokens: file.chunk.overlap.unwrap_or(400),
        };
        let chunk_mode = match file.chunk.mode.as_deref() {
            None => ChunkMode::Fixed,
            Some(mode) => mode
                .parse()
                .map_err(|e| ConfigError(format!("chunk.mode: {e}")))?,
        };
        let embed_backend = match file.embed.backend.as_deref() {
            None | Some("reference") => EmbedBackendChoice::Reference,
            Some("remote") => EmbedBackendChoice::Remote,
            Some(other) => {
                return Err(ConfigError(format!(
                    "embed.backend: unknown value '{other}' (expected reference|remote)"
                )))
            }
        };
        let generation_backend = match file.generation.backend.as_deref() {
            None => GenerationBackend::OfflineEcho,
            Some(backend) => backend
                .parse()
                .map_err(|e| ConfigError(format!("generation.backend: {e}")))?,
        };

        let settings = Self {
            store_root: env("RAGFORGE_STORE_ROOT")
                .or(file.store.root)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("./stores")),
            store_name: env("RAGFORGE_STORE_NAME").or(file.store.name),
            corpus_dir: env("RAGFORGE_CORPUS_DIR")
                .or(file.corpus.dir)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("Upload")),
            chunk,
            chunk_mode,
            retrieve_k: file.retrieve.k.unwrap_or(4),
            retrieve_min_score: file.retrieve.min_score.unwrap_or(0.0),
            template_path: file.prompt.template_path.map(PathBuf::from),
            embed_backend,
            embed_dimension: file.embed.dimension.unwrap_or(256),
            embed_endpoint: file.embed.endpoint,
            embed_model: file.embed.model,
            generation_backend,
            generation_model: file.generation.model,
            temperature: file.generation.temperature.unwrap_or(0.7),
            top_p: file.generation.top_p.unwrap_or(0.9),
            generation_endpoint: env("RAGFORGE_ENDPOINT")
                .or(file.generation.endpoint)
                .unwrap_or_default(),
            timeout_s: file.generation.timeout_s.unwrap_or(60),
            max_retries: file.generation.max_retries.unwrap_or(2),
            remote_endpoint: env("RAGFORGE_REMOTE_ENDPOINT").or(file.remote.endpoint),
            remote_assistant_name: file
                .remote
                .assistant_name
                .unwrap_or_else(|| "ragforge-assistant".to_string()),
        };
        settings.validate()?;
        Ok(settings)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.chunk.max_chunk_tokens == 0 {
            return Err(ConfigError("chunk.max_tokens: must be positive".into()));
        }
        if self.chunk.overlap_tokens >= self.chunk.max_chunk_tokens {
            return Err(ConfigError(format!(
                "chunk.overlap: {} must be smaller than chunk.max_tokens {}",
                self.chunk.overlap_tokens, self.chunk.max_chunk_tokens
            )));
        }
        if self.embed_dimension == 0 {
            return Err(ConfigError("embed.dimension: must be >= 1".into()));
        }
        if self.embed_backend == EmbedBackendChoice::Remote
            && (self.embed_endpoint.is_none() || self.embed_model.is_none())
        {
            return Err(ConfigError(
                "embed.backend: 'remote' requires embed.endpoint and embed.model".into(),
            ));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ConfigError(format!(
                "generation.temperature: {} outside [0, 2]",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(ConfigError(format!(
                "generation.top_p: {} outside (0, 1]",
                self.top_p
            )));
        }
        if self.timeout_s == 0 {
            return Err(ConfigError("generation.timeout_s: must be positive".into()));
        }
        Ok(())
    }

    /// Store name, required by most commands.
    pub fn require_store_name(&self) -> Result<&str, ConfigError> {
        self.store_name
            .as_deref()
            .filter(|n| !n.is_empty())
            .ok_or_else(|| {
                ConfigError(
                    "store.name is not set: pass --store or set [store] name in ragforge.toml"
                        .into(),
                )
            })
    }

    /// A [`GenerationConfig`] from these settings.
    pub fn generation_config(&self) -> GenerationConfig {
        let mut cfg = GenerationConfig::new(self.generation_backend);
        if let Some(model) = &self.generation_model {
            cfg.model_name = model.clone();
        }
        cfg.temperature = self.temperature;
        cfg.top_p = self.top_p;
        cfg.endpoint = self.generation_endpoint.clone();
        cfg.timeout_s = self.timeout_s;
        cfg.max_retries = self.max_retries;
        cfg
    }
}

fn parse_file(text: &str, path: &Path) -> Result<FileConfig, ConfigError> {
    toml::from_str(text)
        .map_err(|e| ConfigError(format!("invalid config file {}: {e}", path.display())))
}
