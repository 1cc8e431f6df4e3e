//! Corpus manifests: the on-disk description of a dataset, plus loading
//! into candidate sets and human-ranked triples.
//!
//! The grammar is line-based; blank lines and `#` comments are ignored and
//! paths are relative to the manifest file (no spaces in paths or ids):
//!
//! ```text
//! image <id>
//! gt <path>
//! map <model-name> <path>
//!
//! triple <image-id> <path0> <path1> <path2> <i,j,k>
//! ```
//!
//! Each `image` line opens a record that must carry a `gt` line and at least
//! one `map` line. A `triple` line attaches three ranked candidate maps to
//! an image: `<i,j,k>` is the human order as map indices, best first. The
//! ground truth for a triple comes from the image record with the same id.

use std::fs;
use std::path::{Path, PathBuf};

use fmeval_core::map::{self, ThresholdMode};

use crate::meta::{CandidateSet, HumanRankedTriple};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestImage {
    pub id: String,
    pub gt_path: PathBuf,
    pub maps: Vec<(String, PathBuf)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestTriple {
    pub image_id: String,
    pub map_paths: [PathBuf; 3],
    /// Map indices in human order, best first.
    pub human_order: [usize; 3],
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub images: Vec<ManifestImage>,
    pub triples: Vec<ManifestTriple>,
}

impl Manifest {
    pub fn image(&self, id: &str) -> Option<&ManifestImage> {
        self.images.iter().find(|img| img.id == id)
    }
}

/// Parses manifest text. Paths stay as written; [`load_manifest`] resolves
/// them against the manifest's directory.
pub fn parse_manifest(text: &str) -> Result<Manifest, Error> {
    let mut manifest = Manifest::default();
    let mut current: Option<ManifestImage> = None;

    let parse_err = |line: usize, message: String| Error::ManifestParse { line, message };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().expect("non-empty line has a token");
        let rest: Vec<&str> = tokens.collect();
        match keyword {
            "image" => {
                if let Some(img) = current.take() {
                    finish_image(img, &mut manifest, line_no)?;
                }
                let [id] = rest[..] else {
                    return Err(parse_err(line_no, "expected `image <id>`".into()));
                };
                current = Some(ManifestImage {
                    id: id.to_string(),
                    gt_path: PathBuf::new(),
                    maps: Vec::new(),
                });
            }
            "gt" => {
                let img = current
                    .as_mut()
                    .ok_or_else(|| parse_err(line_no, "`gt` before any `image`".into()))?;
                let [path] = rest[..] else {
                    return Err(parse_err(line_no, "expected `gt <path>`".into()));
                };
                img.gt_path = PathBuf::from(path);
            }
            "map" => {
                let img = current
                    .as_mut()
                    .ok_or_else(|| parse_err(line_no, "`map` before any `image`".into()))?;
                let [name, path] = rest[..] else {
                    return Err(parse_err(line_no, "expected `map <name> <path>`".into()));
                };
                img.maps.push((name.to_string(), PathBuf::from(path)));
            }
            "triple" => {
                let [image_id, p0, p1, p2, order] = rest[..] else {
                    return Err(parse_err(
                        line_no,
                        "expected `triple <image-id> <p0> <p1> <p2> <i,j,k>`".into(),
                    ));
                };
                let order: Vec<usize> = order
                    .split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| parse_err(line_no, format!("bad order {order:?}")))?;
                let [a, b, c] = order[..] else {
                    return Err(parse_err(line_no, "order must have three indices".into()));
                };
                manifest.triples.push(ManifestTriple {
                    image_id: image_id.to_string(),
                    map_paths: [PathBuf::from(p0), PathBuf::from(p1), PathBuf::from(p2)],
                    human_order: [a, b, c],
                });
            }
            other => {
                return Err(parse_err(line_no, format!("unknown keyword {other:?}")));
            }
        }
    }
    if let Some(img) = current.take() {
        finish_image(img, &mut manifest, 0)?;
    }
    Ok(manifest)
}

fn finish_image(img: ManifestImage, manifest: &mut Manifest, line: usize) -> Result<(), Error> {
    if img.gt_path.as_os_str().is_empty() {
        return Err(Error::ManifestParse {
            line,
            message: format!("image {:?} has no gt line", img.id),
        });
    }
    if img.maps.is_empty() {
        return Err(Error::ManifestParse {
            line,
            message: format!("image {:?} has no map lines", img.id),
        });
    }
    manifest.images.push(img);
    Ok(())
}

/// Reads and parses a manifest file, resolving every path relative to the
/// manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Manifest, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut manifest = parse_manifest(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for img in &mut manifest.images {
        img.gt_path = base.join(&img.gt_path);
        for (_, map_path) in &mut img.maps {
            *map_path = base.join(&*map_path);
        }
    }
    for triple in &mut manifest.triples {
        for p in &mut triple.map_paths {
            *p = base.join(&*p);
        }
    }
    Ok(manifest)
}

/// Loads every image record: ground truths as declared-binary files, model
/// maps under the given threshold mode.
pub fn load_candidate_sets(
    manifest: &Manifest,
    mode: ThresholdMode,
) -> Result<Vec<CandidateSet>, Error> {
    if manifest.images.is_empty() {
        return Err(Error::MissingSection("image"));
    }
    manifest
        .images
        .iter()
        .map(|img| {
            let gt = map::load_binary(&img.gt_path)?;
            let models = img
                .maps
                .iter()
                .map(|(name, path)| Ok((name.clone(), map::load_with_mode(path, mode)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            CandidateSet::new(img.id.clone(), gt, models)
        })
        .collect()
}

/// Loads the human-ranked triples, taking each triple's ground truth from
/// the image record with the matching id.
pub fn load_triples(
    manifest: &Manifest,
    mode: ThresholdMode,
) -> Result<Vec<HumanRankedTriple>, Error> {
    if manifest.triples.is_empty() {
        return Err(Error::MissingSection("triple"));
    }
    manifest
        .triples
        .iter()
        .map(|triple| {
            let img = manifest.image(&triple.image_id).ok_or_else(|| Error::ManifestParse {
                line: 0,
                message: format!("triple references unknown image {:?}", triple.image_id),
            })?;
            let gt = map::load_binary(&img.gt_path)?;
            let [p0, p1, p2] = &triple.map_paths;
            let maps = [
                map::load_with_mode(p0, mode)?,
                map::load_with_mode(p1, mode)?,
                map::load_with_mode(p2, mode)?,
            ];
            HumanRankedTriple::new(triple.image_id.clone(), gt, maps, triple.human_order)
        })
        .collect()
}

/// Writes a corpus to `dir` as one subdirectory of PNGs per image plus a
/// `manifest.txt`, and returns the manifest path.
pub fn write_corpus(corpus: &[CandidateSet], dir: &Path) -> Result<PathBuf, Error> {
    let io_err = |path: &Path, source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let mut text = String::from("# fmeval corpus manifest\n");
    for set in corpus {
        let image_dir = dir.join(set.image_id());
        fs::create_dir_all(&image_dir).map_err(|e| io_err(&image_dir, e))?;

        let gt_rel = format!("{}/gt.png", set.image_id());
        map::save_binary(set.gt(), &dir.join(&gt_rel))?;
        text.push_str(&format!("image {}\ngt {}\n", set.image_id(), gt_rel));

        for (name, fm) in set.models() {
            let map_rel = format!("{}/{}.png", set.image_id(), name);
            map::save_binary(fm, &dir.join(&map_rel))?;
            text.push_str(&format!("map {name} {map_rel}\n"));
        }
        text.push('\n');
    }
    let manifest_path = dir.join("manifest.txt");
    fs::write(&manifest_path, text).map_err(|e| io_err(&manifest_path, e))?;
    Ok(manifest_path)
}
