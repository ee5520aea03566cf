use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use necklace_core::calculus::{derive_rewrite_catalog, parse_catalog, HarshTable, RewriteRule, DEFAULT_SEGMENT_LEN};
use necklace_core::refine::RefinementConvention;
use necklace_core::screen::SegmentClassifier;
use serde::Deserialize;

/// Settings file. Relative paths resolve against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub classifier: Option<PathBuf>,
    pub harsh_table: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub catalog_length: Option<usize>,
    pub refinement_convention: Option<String>,
    #[serde(skip)]
    base: PathBuf,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Config = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn read(&self, flag: Option<&Path>, configured: Option<&PathBuf>) -> Result<Option<String>> {
        let path = match (flag, configured) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.resolve(p),
            (None, None) => return Ok(None),
        };
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Some(text))
    }

    pub fn classifier(&self, flag: Option<&Path>) -> Result<SegmentClassifier> {
        Ok(match self.read(flag, self.classifier.as_ref())? {
            Some(text) => SegmentClassifier::parse(&text)?,
            None => SegmentClassifier::default(),
        })
    }

    pub fn harsh_table(&self, flag: Option<&Path>) -> Result<HarshTable> {
        Ok(match self.read(flag, self.harsh_table.as_ref())? {
            Some(text) => HarshTable::parse(&text)?,
            None => HarshTable::default(),
        })
    }

    pub fn catalog(&self, flag: Option<&Path>, length: Option<usize>) -> Result<Vec<RewriteRule>> {
        Ok(match self.read(flag, self.catalog.as_ref())? {
            Some(text) => parse_catalog(&text)?,
            None => derive_rewrite_catalog(length.or(self.catalog_length).unwrap_or(DEFAULT_SEGMENT_LEN))?,
        })
    }

    pub fn convention(&self, flag: Option<&str>) -> Result<RefinementConvention> {
        Ok(match flag.or(self.refinement_convention.as_deref()) {
            Some(s) => s.parse()?,
            None => RefinementConvention::default(),
        })
    }
}
