//! `ragforge ask`: the question REPL and one-shot `--once` mode.

use std::io::{BufRead, Write};
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use ragforge::generation::{
    api_key_from_env_or_dotenv, chat_turn, AnnotatedAnswer, ChatTurnOptions, ConversationSession,
    GenerationBackend,
};
use ragforge::retrieval::PromptTemplate;
use ragforge::vector_store::load_store;

use crate::commands::{build_embedder, generation_error_name, operational, store_error_name};
use crate::config::Settings;
use crate::{AskArgs, CliError};

pub fn run(mut settings: Settings, args: AskArgs) -> Result<(), CliError> {
    if let Some(name) = args.store {
        settings.store_name = Some(name);
    }
    if let Some(root) = args.store_root {
        settings.store_root = root;
    }
    if let Some(k) = args.k {
        settings.retrieve_k = k;
    }
    if let Some(s) = args.min_score {
        settings.retrieve_min_score = s;
    }
    if let Some(backend) = &args.backend {
        settings.generation_backend = backend
            .parse()
            .map_err(|e| CliError::usage(format!("--backend: {e}")))?;
        settings.generation_model = None; // re-derive the backend default
    }
    if let Some(model) = args.model {
        settings.generation_model = Some(model);
    }
    if let Some(t) = args.temperature {
        settings.temperature = t;
    }
    if let Some(p) = args.top_p {
        settings.top_p = p;
    }
    if let Some(endpoint) = args.endpoint {
        settings.generation_endpoint = endpoint;
    }
    if let Some(path) = args.template {
        settings.template_path = Some(path);
    }
    settings.validate().map_err(|e| CliError::usage(e.0))?;
    let store_name = settings
        .require_store_name()
        .map_err(|e| CliError::usage(e.0))?
        .to_string();

    let gen_cfg = settings.generation_config();
    if gen_cfg.backend == GenerationBackend::ChatCompletions {
        // The key guard runs at startup, not at first use.
        if api_key_from_env_or_dotenv(Path::new(".env")).is_none() {
            return Err(CliError::usage(
                "OPENAI_API_KEY is not set in the environment. Please set it in the .env file.",
            ));
        }
    }

    let template = match &settings.template_path {
        Some(path) => PromptTemplate::from_file(path)
            .map_err(|e| CliError::usage(format!("prompt.template_path: {e}")))?,
        None => PromptTemplate::default(),
    };

    let store = load_store(&settings.store_root, &store_name)
        .map_err(|e| operational(store_error_name(&e), e))?;
    let embedder = build_embedder(&settings, store.manifest().dimension);

    let options = ChatTurnOptions {
        k: settings.retrieve_k,
        min_score: settings.retrieve_min_score,
        template,
    };
    let session_id = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| format!("cli-{}", d.as_secs()))
        .unwrap_or_else(|_| "cli".to_string());
    let mut session = ConversationSession::new(session_id, store_name);

    if let Some(question) = args.once {
        let answer = chat_turn(
            &mut session,
            &store,
            embedder.as_ref(),
            &question,
            &gen_cfg,
            &options,
        )
        .map_err(|e| operational(generation_error_name(&e), e))?;
        print_answer(&answer, args.typewriter);
        return Ok(());
    }

    // Interactive loop. A failed turn is reported and the loop continues.
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        print!("Enter your question (or type 'exit' to quit): ");
        std::io::stdout().flush().ok();
        let Some(Ok(line)) = lines.next() else {
            println!();
            println!("Exiting the conversation. Goodbye!");
            return Ok(());
        };
        let question = line.trim();
        if question.eq_ignore_ascii_case("exit") {
            println!("Exiting the conversation. Goodbye!");
            return Ok(());
        }
        if question.is_empty() {
            continue;
        }
        match chat_turn(
            &mut session,
            &store,
            embedder.as_ref(),
            question,
            &gen_cfg,
            &options,
        ) {
            Ok(answer) => print_answer(&answer, args.typewriter),
            Err(e) => eprintln!("error: {}: {e}", generation_error_name(&e)),
        }
        println!();
    }
}

fn print_answer(answer: &AnnotatedAnswer, typewriter: bool) {
    if typewriter {
        for word in answer.text.split_whitespace() {
            print!("{word} ");
            std::io::stdout().flush().ok();
            std::thread::sleep(Duration::from_millis(50));
        }
        println!();
    } else {
        println!("{}", answer.text);
    }
    if !answer.citations.is_empty() {
        println!();
        println!("Sources: {}", answer.citations.join(", "));
    }
}
