use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eqsat::frontend::{parse_program, FrontendError, Output, Session};
use eqsat::scheduler::{RunConfig, DEFAULT_NODE_LIMIT};

#[derive(Parser)]
#[command(name = "eqsat", version, about = "Typed e-graph equality saturation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a program file.
    Run {
        file: PathBuf,
        /// Node budget for every `run` command.
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        max_nodes: usize,
        /// Write the final e-graph and bindings as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Print every command's output and per-iteration statistics.
        #[arg(long)]
        verbose: bool,
    },
    /// Read commands from standard input.
    Repl {
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        max_nodes: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Cmd::Run {
            file,
            max_nodes,
            json,
            verbose,
        } => run_file(&file, max_nodes, json.as_deref(), verbose),
        Cmd::Repl { max_nodes } => repl(max_nodes),
    };
    ExitCode::from(code)
}

fn report(origin: &str, err: &FrontendError) -> u8 {
    eprintln!("{origin}:{err}");
    err.exit_code() as u8
}

fn print_output(out: &Output, verbose: bool) {
    match out {
        Output::Extracted { .. } | Output::Check { passed: false, .. } => println!("{out}"),
        _ if verbose => {
            println!("{out}");
            if let Output::Ran(report) = out {
                for (i, it) in report.per_iteration.iter().enumerate() {
                    let matches: Vec<String> = it
                        .rules
                        .iter()
                        .map(|r| format!("{}: {}", r.rule, r.matches))
                        .collect();
                    println!(
                        "  iteration {}: {} new nodes, {} merges, {} classes; matches [{}]",
                        i + 1,
                        it.new_nodes,
                        it.merges,
                        it.classes_after,
                        matches.join(", ")
                    );
                }
            }
        }
        _ => {}
    }
}

fn run_file(path: &Path, max_nodes: usize, json: Option<&Path>, verbose: bool) -> u8 {
    let origin = path.display().to_string();
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("{origin}: {e}");
            return 2;
        }
    };
    let commands = match parse_program(&text) {
        Ok(cmds) => cmds,
        Err(e) => return report(&origin, &e),
    };
    let mut session = Session::with_config(RunConfig {
        node_limit: max_nodes,
    });
    let mut failed_checks = 0;
    for cmd in &commands {
        match session.eval_command(cmd) {
            Ok(out) => {
                if let Output::Check { passed: false, .. } = out {
                    failed_checks += 1;
                    eprintln!("{origin}:{}: check failed", cmd.span);
                }
                print_output(&out, verbose);
            }
            Err(e) => return report(&origin, &e),
        }
    }
    if let Some(json_path) = json {
        let doc = session.export_json().to_json();
        if let Err(e) = std::fs::write(json_path, doc + "\n") {
            eprintln!("{}: {e}", json_path.display());
            return 3;
        }
    }
    u8::from(failed_checks > 0)
}

/// True once every opened paren in `text` is closed, ignoring strings and
/// comments.
fn balanced(text: &str) -> bool {
    let mut depth = 0i64;
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '"' => {
                while let Some(c) = chars.next() {
                    match c {
                        '\\' => {
                            chars.next();
                        }
                        '"' => break,
                        _ => {}
                    }
                }
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            _ => {}
        }
    }
    depth <= 0
}

fn repl(max_nodes: usize) -> u8 {
    let interactive = io::stdin().is_terminal();
    let mut session = Session::with_config(RunConfig {
        node_limit: max_nodes,
    });
    let mut buffer = String::new();
    let prompt = |cont: bool| {
        if interactive {
            print!("{}", if cont { ".. " } else { "> " });
            io::stdout().flush().ok();
        }
    };
    prompt(false);
    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        buffer.push_str(&line);
        buffer.push('\n');
        if !balanced(&buffer) {
            prompt(true);
            continue;
        }
        let text = std::mem::take(&mut buffer);
        match parse_program(&text) {
            Ok(cmds) => {
                for cmd in &cmds {
                    match session.eval_command(cmd) {
                        Ok(out) => println!("{out}"),
                        Err(e) => {
                            report("<stdin>", &e);
                            break;
                        }
                    }
                }
            }
            Err(e) => {
                report("<stdin>", &e);
            }
        }
        prompt(false);
    }
    0
}
