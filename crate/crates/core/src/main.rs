use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use checkworthy::corpus::{self, ColumnMap, Language, Split};
use checkworthy::error::{Error, Result};
use checkworthy::eval;
use checkworthy::experiment::{self, ExperimentConfig, TrainedClassifier, RECIPES};
use checkworthy::preprocess::{self, PreprocessConfig};

#[derive(Parser)]
#[command(name = "checkworthy", version, about = "Check-worthiness classification for tweets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Append a clean_text column to a TSV file.
    Preprocess {
        #[arg(long)]
        lang: Language,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        /// Stopword list replacing the bundled one.
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// Print the most frequent cleaned tokens.
    FreqReport {
        #[arg(long)]
        lang: Language,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Fit a model from a recipe name or config file and save it.
    Train {
        #[arg(long)]
        config: String,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Write predictions for a TSV file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Score a prediction file against gold labels.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value = "english")]
        lang: Language,
        /// Model name shown in the report.
        #[arg(long, default_value = "model")]
        model_name: String,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Run or list experiment recipes.
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run the full pipeline for a recipe name or config file.
    Run {
        config: String,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List the bundled recipes.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Preprocess {
            lang,
            input,
            output,
            stopwords,
        } => preprocess_file(lang, &input, &output, stopwords.as_deref()),
        Command::FreqReport { lang, input, top } => {
            let data = corpus::load_dataset(&input, lang, Split::Train, &ColumnMap::default())?;
            let config = PreprocessConfig::for_language(lang);
            let mut out = io::stdout().lock();
            for (token, count) in experiment::freq_report(&data, &config, top) {
                writeln!(out, "{token}\t{count}").map_err(|e| Error::io("<stdout>", e))?;
            }
            Ok(())
        }
        Command::Train {
            config,
            output,
            data_dir,
        } => {
            let mut config = ExperimentConfig::resolve(&config)?;
            if let Some(dir) = data_dir {
                config.paths.data_dir = dir;
            }
            let training = experiment::load_training(&config)?;
            let (trained, summary) = experiment::train_classifier(&config, &training)?;
            trained.save(&output)?;
            info!(
                "trained {} on {} rows ({} synthetic), vocabulary {}; saved to {}",
                config.name,
                summary.training_rows,
                summary.synthetic_rows,
                trained.features.len(),
                output.display()
            );
            Ok(())
        }
        Command::Predict {
            model,
            input,
            output,
        } => {
            let trained = TrainedClassifier::load(&model)?;
            let columns = ColumnMap {
                label: None,
                ..ColumnMap::default()
            };
            let data = corpus::load_dataset(&input, trained.preprocess.language, Split::Test, &columns)?;
            let predictions = trained.predict_dataset(&data);
            write_with(&output, |w| eval::write_predictions(&predictions, w))?;
            info!("wrote {} predictions to {}", predictions.len(), output.display());
            Ok(())
        }
        Command::Evaluate {
            gold,
            predictions,
            lang,
            model_name,
            output,
        } => {
            let gold = corpus::load_dataset(&gold, lang, Split::Test, &ColumnMap::default())?;
            let file = fs::File::open(&predictions).map_err(|e| Error::io(&predictions, e))?;
            let preds = eval::read_predictions(file, &predictions.display().to_string())?;
            let report = eval::evaluate(&gold, &preds)?;
            let text = eval::format_report(&report, &model_name);
            print!("{text}");
            if let Some(path) = output {
                fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            }
            Ok(())
        }
        Command::Experiment { command } => match command {
            ExperimentCommand::List => {
                for (name, _) in RECIPES {
                    let c = ExperimentConfig::resolve(name)?;
                    println!(
                        "{name}\t{}\t{}\tngram_max={}\tmax_features={}",
                        c.language,
                        c.model.name(),
                        c.ngram_max,
                        c.max_features
                    );
                }
                Ok(())
            }
            ExperimentCommand::Run {
                config,
                data_dir,
                out_dir,
            } => {
                let mut config = ExperimentConfig::resolve(&config)?;
                if let Some(dir) = data_dir {
                    config.paths.data_dir = dir;
                }
                if let Some(dir) = out_dir {
                    config.paths.out_dir = dir;
                }
                let out = experiment::run(&config)?;
                if let Some(r) = &out.report {
                    print!("{}", eval::format_report(r, config.model.display_name()));
                }
                info!("outputs in {}", config.paths.out_dir.display());
                Ok(())
            }
        },
    }
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn preprocess_file(lang: Language, input: &Path, output: &Path, stopwords: Option<&Path>) -> Result<()> {
    let mut config = PreprocessConfig::for_language(lang);
    if let Some(path) = stopwords {
        config.stopwords = preprocess::load_stopwords(path)?;
    }
    config.validate()?;
    let file = fs::File::open(input).map_err(|e| Error::io(input, e))?;
    let columns = ColumnMap {
        label: None,
        ..ColumnMap::default()
    };
    let table = corpus::read_table(file, &input.display().to_string(), &columns)?;
    let text_col = table.text_column();
    write_with(output, |w| {
        writeln!(w, "{}\tclean_text", table.header.join("\t"))?;
        for (_, fields) in &table.records {
            let text = corpus::unescape(&fields[text_col]);
            let tokens = preprocess::clean(&text, &config);
            let mut row = fields.clone();
            row[text_col] = corpus::escape(&text);
            writeln!(w, "{}\t{}", row.join("\t"), tokens.join(" "))?;
        }
        Ok(())
    })?;
    info!("cleaned {} rows into {}", table.records.len(), output.display());
    Ok(())
}
