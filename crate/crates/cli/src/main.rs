//! Command-line front end: load grammar files, run queries, or talk to a
//! session interactively.

use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use tdl::expand::Mode;
use tdl::hierarchy::Encoding;
use tdl::session::{Options, Session, FORMAT_VERSION};
use tdl::simplify::Target;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EncodingArg {
    TransitiveClosure,
    Compact,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NfArg {
    Cnf,
    Dnf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Complete,
    Resolved,
}

#[derive(Debug, Parser)]
#[command(name = "tdl", version, about = "Type description language for typed feature structure grammars")]
struct Args {
    /// Grammar files, loaded in order.
    files: Vec<PathBuf>,
    /// Command or definition to run after loading (repeatable).
    #[arg(short = 'e', long = "eval", value_name = "LINE")]
    eval: Vec<String>,
    /// Read further lines from standard input.
    #[arg(short, long)]
    interactive: bool,
    #[arg(long, value_enum, default_value = "transitive-closure")]
    encoding: EncodingArg,
    /// Normal form used when decomposing definitions.
    #[arg(long, value_enum, default_value = "cnf")]
    nf: NfArg,
    #[arg(long, value_enum, default_value = "complete")]
    mode: ModeArg,
    #[arg(long, value_name = "N", default_value_t = tdl::expand::DEFAULT_MAX_PATH_LENGTH)]
    max_path_length: usize,
    /// Disable the simplification memo table.
    #[arg(long)]
    no_memo: bool,
}

impl Args {
    fn options(&self) -> Options {
        Options {
            encoding: match self.encoding {
                EncodingArg::TransitiveClosure => Encoding::TransitiveClosure,
                EncodingArg::Compact => Encoding::Compact,
            },
            target: match self.nf {
                NfArg::Cnf => Target::Cnf,
                NfArg::Dnf => Target::Dnf,
            },
            mode: match self.mode {
                ModeArg::Complete => Mode::Complete,
                ModeArg::Resolved => Mode::Resolved,
            },
            max_path_length: Some(self.max_path_length),
            memo: !self.no_memo,
        }
    }
}

struct Runner {
    session: Session,
    errors: usize,
    out: io::StdoutLock<'static>,
}

impl Runner {
    fn line(&mut self, origin: &str, line: &str) -> bool {
        match self.session.execute_line(line) {
            Ok(reply) => {
                if !reply.text.is_empty() {
                    let _ = writeln!(self.out, "{}", reply.text);
                }
                !reply.quit
            }
            Err(e) => {
                self.errors += 1;
                let _ = self.out.flush();
                eprintln!("{origin}: {e}");
                true
            }
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut r = Runner { session: Session::new(&args.options()), errors: 0, out: io::stdout().lock() };
    let _ = writeln!(r.out, "{FORMAT_VERSION}");
    for path in &args.files {
        let loaded = std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|src| r.session.load_source(&src).map_err(|e| e.to_string()));
        if let Err(e) = loaded {
            let _ = r.out.flush();
            eprintln!("{}:{e}", path.display());
            return ExitCode::from(2);
        }
    }
    if !args.files.is_empty() {
        let undefined = r.session.types().hierarchy().undefined_types().join(" ");
        if !undefined.is_empty() {
            let _ = writeln!(r.out, "undefined: {undefined}");
        }
    }
    let mut running = true;
    for cmd in &args.eval {
        if !r.line("-e", cmd) {
            running = false;
            break;
        }
    }
    if running && args.interactive {
        let stdin = io::stdin();
        let prompt = stdin.is_terminal();
        let mut input = stdin.lock();
        let mut n = 0;
        loop {
            if prompt {
                let _ = write!(r.out, "{}", if r.session.has_pending() { "  ... " } else { "tdl> " });
                let _ = r.out.flush();
            }
            let mut line = String::new();
            match input.read_line(&mut line) {
                Ok(0) | Err(_) => break,
                Ok(_) => {}
            }
            n += 1;
            if !r.line(&format!("<stdin>:{n}"), line.trim_end_matches(['\n', '\r'])) {
                break;
            }
        }
        if r.session.has_pending() {
            r.errors += 1;
            eprintln!("<stdin>: unterminated definition at end of input");
        }
    }
    let _ = r.out.flush();
    if r.errors > 0 {
        ExitCode::from(2)
    } else if r.session.found_inconsistency() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
