use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Writes the files of one run into a directory. Every CSV opens with a
/// comment line carrying the config hash and seed, followed by a header.
pub struct Output {
    dir: PathBuf,
    stamp: String,
    plots: bool,
    written: Vec<PathBuf>,
}

pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn row<I, T>(&mut self, values: I)
    where
        I: IntoIterator<Item = T>,
        T: std::fmt::Display,
    {
        let mut n = 0;
        for (i, v) in values.into_iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{v}");
            n += 1;
        }
        debug_assert_eq!(n, self.columns);
        self.text.push('\n');
    }
}

impl Output {
    pub fn create(dir: &Path, config_hash: &str, seed: u64, plots: bool) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            stamp: format!("# robininv config_hash={config_hash} seed={seed}\n"),
            plots,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn csv(&self, header: &[&str]) -> Csv {
        Csv {
            text: format!("{}{}\n", self.stamp, header.join(",")),
            columns: header.len(),
        }
    }

    pub fn save_csv(&mut self, name: &str, csv: Csv) -> io::Result<()> {
        self.save(name, &csv.text)
    }

    pub fn save(&mut self, name: &str, text: &str) -> io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    /// Saves a gnuplot script next to the data when plot scripts are enabled.
    pub fn plot(&mut self, name: &str, script: &str) -> io::Result<()> {
        if self.plots {
            self.save(name, script)?;
        }
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// `key: value` lines of a plain-text summary.
#[derive(Default)]
pub struct Summary(String);

impl Summary {
    pub fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key}: {value}");
    }

    pub fn note(&mut self, text: &str) {
        let _ = writeln!(self.0, "{text}");
    }

    pub fn text(&self) -> &str {
        &self.0
    }
}

/// Minimal gnuplot script plotting columns of one or more CSV files.
pub fn gnuplot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    logscale_y: bool,
    series: &[(&str, usize, usize, &str)],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel '{ylabel}'");
    if logscale_y {
        let _ = writeln!(s, "set logscale y");
    }
    let plots: Vec<String> = series
        .iter()
        .map(|(file, x, y, style)| format!("'{file}' using {x}:{y} with {style}"))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}
