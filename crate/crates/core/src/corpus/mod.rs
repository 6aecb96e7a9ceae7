//! Songs, artists and listeners: JSONL ingestion and the corpus filtering rules.
//!
//! Input files are UTF-8 JSON Lines:
//!
//! * `songs.jsonl`: `{song_id, artist_id, title, lyrics, popularity_rank}`
//! * `artists.jsonl`: `{artist_id, name, popularity}`
//! * `users.jsonl`: `{user_id, liked_artist_ids: [...], gender, age_bin,
//!   mft: {care, fairness, loyalty, authority, purity}}`
//!
//! Ids may be JSON strings or integers; they are kept as strings.

mod langid;

pub use langid::{trigram_profile, Detection, LanguageDetector, LanguageProfile, PROFILE_SIZE, UNDETERMINED};

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::{Error, Foundation, Result};

fn de_id<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        S(String),
        I(i64),
        U(u64),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::S(s) => s,
        Raw::I(i) => i.to_string(),
        Raw::U(u) => u.to_string(),
    })
}

fn de_ids<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeSet<String>, D::Error> {
    #[derive(Deserialize)]
    struct Wrap(#[serde(deserialize_with = "de_id")] String);
    let v: Vec<Wrap> = Vec::deserialize(d)?;
    Ok(v.into_iter().map(|w| w.0).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Song {
    #[serde(deserialize_with = "de_id")]
    pub song_id: String,
    #[serde(deserialize_with = "de_id")]
    pub artist_id: String,
    pub title: String,
    pub lyrics: String,
    /// 1 = most popular song of the artist.
    pub popularity_rank: u32,
    /// ISO-639-1 code, filled by language detection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

/// One artist and its songs, sorted ascending by `popularity_rank`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtistCatalog {
    #[serde(deserialize_with = "de_id")]
    pub artist_id: String,
    pub name: String,
    /// Page-follower proxy; non-negative.
    pub popularity: f64,
    #[serde(default, skip)]
    pub songs: Vec<Song>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "M")]
    Male,
    #[serde(rename = "F")]
    Female,
    #[default]
    #[serde(rename = "unknown")]
    Unknown,
}

impl Gender {
    pub const ALL: [Gender; 3] = [Gender::Male, Gender::Female, Gender::Unknown];

    pub fn parse(s: Option<&str>) -> Gender {
        match s.map(|s| s.trim().to_ascii_lowercase()).as_deref() {
            Some("m") | Some("male") => Gender::Male,
            Some("f") | Some("female") => Gender::Female,
            _ => Gender::Unknown,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Gender::Male => "m",
            Gender::Female => "f",
            Gender::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgeBin {
    /// Under 25.
    Younger,
    /// 25 or older.
    Older,
    #[default]
    Unknown,
}

impl AgeBin {
    pub const ALL: [AgeBin; 3] = [AgeBin::Younger, AgeBin::Older, AgeBin::Unknown];

    pub fn parse(s: Option<&str>) -> AgeBin {
        match s.map(|s| s.trim().to_ascii_lowercase()).as_deref() {
            Some("younger") => AgeBin::Younger,
            Some("older") => AgeBin::Older,
            _ => AgeBin::Unknown,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AgeBin::Younger => "younger",
            AgeBin::Older => "older",
            AgeBin::Unknown => "unknown",
        }
    }
}

/// Questionnaire scores for the five foundations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MftScores {
    pub care: f64,
    pub fairness: f64,
    pub loyalty: f64,
    pub authority: f64,
    pub purity: f64,
}

impl MftScores {
    pub fn get(&self, f: Foundation) -> f64 {
        match f {
            Foundation::Care => self.care,
            Foundation::Fairness => self.fairness,
            Foundation::Loyalty => self.loyalty,
            Foundation::Authority => self.authority,
            Foundation::Purity => self.purity,
        }
    }

    /// Mean of Care and Fairness.
    pub fn individualising(&self) -> f64 {
        (self.care + self.fairness) / 2.0
    }

    /// Mean of Loyalty, Authority and Purity.
    pub fn binding(&self) -> f64 {
        (self.loyalty + self.authority + self.purity) / 3.0
    }

    pub fn target(&self, t: crate::Target) -> f64 {
        use crate::Target as T;
        match t {
            T::Care => self.care,
            T::Fairness => self.fairness,
            T::Loyalty => self.loyalty,
            T::Authority => self.authority,
            T::Purity => self.purity,
            T::Individualising => self.individualising(),
            T::Binding => self.binding(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserRecord {
    pub user_id: String,
    pub liked_artist_ids: BTreeSet<String>,
    pub gender: Gender,
    pub age_bin: AgeBin,
    pub mft: MftScores,
}

impl UserRecord {
    pub fn individualising(&self) -> f64 {
        self.mft.individualising()
    }

    pub fn binding(&self) -> f64 {
        self.mft.binding()
    }
}

#[derive(Deserialize)]
struct RawUser {
    #[serde(deserialize_with = "de_id")]
    user_id: String,
    #[serde(deserialize_with = "de_ids")]
    liked_artist_ids: BTreeSet<String>,
    #[serde(default)]
    gender: Option<String>,
    #[serde(default)]
    age_bin: Option<String>,
    mft: MftScores,
}

#[derive(Serialize)]
struct UserOut<'a> {
    user_id: &'a str,
    liked_artist_ids: &'a BTreeSet<String>,
    gender: &'a str,
    age_bin: &'a str,
    mft: &'a MftScores,
}

/// Songs (grouped under their artists) and listeners.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub catalog: BTreeMap<String, ArtistCatalog>,
    pub users: Vec<UserRecord>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub songs: usize,
    pub artists: usize,
    pub users: usize,
}

impl Corpus {
    pub fn songs(&self) -> impl Iterator<Item = &Song> {
        self.catalog.values().flat_map(|a| a.songs.iter())
    }

    pub fn songs_mut(&mut self) -> impl Iterator<Item = &mut Song> {
        self.catalog.values_mut().flat_map(|a| a.songs.iter_mut())
    }

    pub fn song_count(&self) -> usize {
        self.catalog.values().map(|a| a.songs.len()).sum()
    }

    pub fn report(&self) -> LoadReport {
        LoadReport {
            songs: self.song_count(),
            artists: self.catalog.len(),
            users: self.users.len(),
        }
    }

    /// Fill `Song::language` for every song using `detector`.
    pub fn annotate_languages(&mut self, detector: &LanguageDetector) {
        for song in self.songs_mut() {
            song.language = Some(detector.detect(&song.lyrics).code);
        }
    }
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

/// Parse the three corpus files, rejecting duplicate ids and songs whose
/// artist is missing from the artists file.
pub fn load_corpus(songs_path: &Path, artists_path: &Path, users_path: &Path) -> Result<(Corpus, LoadReport)> {
    let mut catalog = BTreeMap::new();
    for (line, artist) in parse_jsonl::<ArtistCatalog>(artists_path)? {
        if !(artist.popularity >= 0.0 && artist.popularity.is_finite()) {
            return Err(Error::Parse {
                path: artists_path.display().to_string(),
                line,
                message: format!("popularity must be a non-negative number, got {}", artist.popularity),
            });
        }
        let id = artist.artist_id.clone();
        if catalog.insert(id.clone(), artist).is_some() {
            return Err(Error::DuplicateId { kind: "artist", id });
        }
    }

    let mut song_ids = HashSet::new();
    for (line, mut song) in parse_jsonl::<Song>(songs_path)? {
        let parse_err = |message: String| Error::Parse {
            path: songs_path.display().to_string(),
            line,
            message,
        };
        if song.lyrics.trim().is_empty() {
            return Err(parse_err("lyrics are empty".into()));
        }
        if song.popularity_rank == 0 {
            return Err(parse_err("popularity_rank must be positive".into()));
        }
        if !song_ids.insert(song.song_id.clone()) {
            return Err(Error::DuplicateId {
                kind: "song",
                id: song.song_id,
            });
        }
        let Some(artist) = catalog.get_mut(&song.artist_id) else {
            return Err(Error::UnknownReference {
                path: songs_path.display().to_string(),
                line,
                kind: "artist",
                id: song.artist_id,
            });
        };
        if artist.songs.iter().any(|s| s.popularity_rank == song.popularity_rank) {
            return Err(parse_err(format!(
                "popularity_rank {} repeated for artist `{}`",
                song.popularity_rank, song.artist_id
            )));
        }
        song.language = song.language.filter(|l| !l.is_empty());
        artist.songs.push(song);
    }
    for artist in catalog.values_mut() {
        artist.songs.sort_by_key(|s| s.popularity_rank);
    }

    let mut users = Vec::new();
    let mut user_ids = HashSet::new();
    for (_, raw) in parse_jsonl::<RawUser>(users_path)? {
        if !user_ids.insert(raw.user_id.clone()) {
            return Err(Error::DuplicateId {
                kind: "user",
                id: raw.user_id,
            });
        }
        users.push(UserRecord {
            user_id: raw.user_id,
            liked_artist_ids: raw.liked_artist_ids,
            gender: Gender::parse(raw.gender.as_deref()),
            age_bin: AgeBin::parse(raw.age_bin.as_deref()),
            mft: raw.mft,
        });
    }

    let corpus = Corpus { catalog, users };
    let report = corpus.report();
    Ok((corpus, report))
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(&item).map_err(|e| Error::InvalidInput(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write the corpus back as the three JSONL files (songs carry their
/// detected language as an extra field).
pub fn write_corpus(corpus: &Corpus, songs_path: &Path, artists_path: &Path, users_path: &Path) -> Result<()> {
    write_jsonl(songs_path, corpus.songs())?;
    write_jsonl(artists_path, corpus.catalog.values())?;
    write_jsonl(
        users_path,
        corpus.users.iter().map(|u| UserOut {
            user_id: &u.user_id,
            liked_artist_ids: &u.liked_artist_ids,
            gender: u.gender.label(),
            age_bin: u.age_bin.label(),
            mft: &u.mft,
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilterParams {
    pub top_n: usize,
    pub min_likes: usize,
    pub language: String,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            top_n: 5,
            min_likes: 10,
            language: "en".into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub songs_in: usize,
    pub songs_wrong_language: usize,
    pub songs_beyond_top_n: usize,
    pub songs_kept: usize,
    pub artists_in: usize,
    pub artists_kept: usize,
    pub users_in: usize,
    pub users_kept: usize,
}

/// Apply the language filter, the top-n songs rule, and the minimum-likes
/// threshold. Likes are counted after the language filter, against artists
/// that keep at least one song. Artists no surviving user likes are removed.
pub fn filter_corpus(corpus: &Corpus, params: &FilterParams) -> (Corpus, FilterReport) {
    let mut report = FilterReport {
        songs_in: corpus.song_count(),
        artists_in: corpus.catalog.len(),
        users_in: corpus.users.len(),
        ..Default::default()
    };

    let mut catalog = BTreeMap::new();
    for (id, artist) in &corpus.catalog {
        let mut songs: Vec<Song> = Vec::new();
        for song in &artist.songs {
            if song.language.as_deref() != Some(params.language.as_str()) {
                report.songs_wrong_language += 1;
            } else if songs.len() < params.top_n {
                songs.push(song.clone());
            } else {
                report.songs_beyond_top_n += 1;
            }
        }
        if !songs.is_empty() {
            catalog.insert(id.clone(), ArtistCatalog { songs, ..artist.clone() });
        }
    }

    let users: Vec<UserRecord> = corpus
        .users
        .iter()
        .filter_map(|u| {
            let liked: BTreeSet<String> = u
                .liked_artist_ids
                .iter()
                .filter(|a| catalog.contains_key(*a))
                .cloned()
                .collect();
            (liked.len() >= params.min_likes).then(|| UserRecord {
                liked_artist_ids: liked,
                ..u.clone()
            })
        })
        .collect();

    let liked: HashSet<&String> = users.iter().flat_map(|u| u.liked_artist_ids.iter()).collect();
    catalog.retain(|id, _| liked.contains(id));

    let out = Corpus { catalog, users };
    report.songs_kept = out.song_count();
    report.artists_kept = out.catalog.len();
    report.users_kept = out.users.len();
    (out, report)
}
