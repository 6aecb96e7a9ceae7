//! Planted-signal cohorts for end-to-end checks.
//!
//! Artists get a latent moral tone, a positivity level and a theme; their
//! lyrics are sampled from lexicon words accordingly. Listeners like artists
//! close to their own taste. The planted target is a linear function of the
//! listener's *measured* lexical features (computed with the same text
//! pipeline and mean aggregation the feature stage uses), plus Gaussian
//! noise, so the best achievable correlation is known in advance.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AgeBin, ArtistCatalog, Corpus, Gender, MftScores, Song, UserRecord};
use crate::features::{aggregate_user, lexical_scores, lyrical_labels, Aggregation, TextPipeline, MIN_SD};
use crate::util::stream_rng;
use crate::{Error, Foundation, Result, Target};

/// Mean and spread of the generated questionnaire scores.
const SCORE_MEAN: f64 = 3.0;
const SCORE_SD: f64 = 0.6;
/// Spread of the foundations inside a planted superior foundation around it.
const WITHIN_SD: f64 = 0.3;
/// Sharpness of the taste-to-artist affinity.
const TASTE_SHARPNESS: f64 = 3.0;

const FUNCTION_WORDS: &[&str] = &[
    "the", "and", "you", "i", "my", "me", "we", "to", "in", "of", "on", "with", "it", "is", "all", "your", "when",
    "this", "that", "for", "our", "from", "they", "she", "he", "at", "into", "through",
];

const THEMES: &[&[&str]] = &[
    &[
        "road", "highway", "engine", "wheel", "mile", "truck", "gasoline", "motel", "border", "desert", "dust",
        "map", "signal", "bridge", "tunnel", "station", "ticket", "train", "track", "passenger", "driver", "exit",
        "gravel", "canyon", "horizon", "compass", "journey", "west", "county", "diesel",
    ],
    &[
        "ocean", "wave", "shore", "sand", "tide", "harbor", "boat", "sail", "island", "coast", "salt", "anchor",
        "lighthouse", "shell", "current", "reef", "deck", "captain", "gull", "pier", "dune", "seaweed", "bay",
        "mast", "rope", "lagoon", "cove", "spray", "water", "blue",
    ],
    &[
        "city", "street", "corner", "neon", "subway", "tower", "window", "avenue", "taxi", "concrete", "block",
        "apartment", "elevator", "traffic", "downtown", "alley", "rooftop", "siren", "sidewalk", "crowd", "metro",
        "skyline", "billboard", "building", "lamp", "garage", "hallway", "stair", "door", "glass",
    ],
    &[
        "farm", "field", "barn", "harvest", "corn", "river", "creek", "porch", "fence", "tractor", "meadow", "hay",
        "orchard", "cattle", "valley", "hill", "pine", "oak", "mud", "grain", "acre", "mill", "wagon", "pasture",
        "well", "cabin", "chimney", "gate", "stone", "clay",
    ],
    &[
        "night", "moon", "star", "midnight", "shadow", "candle", "dream", "sky", "cloud", "planet", "comet",
        "galaxy", "orbit", "dawn", "dusk", "twilight", "lantern", "owl", "silver", "echo", "mirror", "velvet",
        "horizon", "constellation", "telescope", "eclipse", "satellite", "rocket", "space", "light",
    ],
    &[
        "dance", "floor", "rhythm", "beat", "drum", "bass", "guitar", "piano", "radio", "record", "speaker",
        "melody", "chorus", "microphone", "stage", "band", "club", "vinyl", "tempo", "groove", "jukebox", "song",
        "note", "tune", "disco", "saxophone", "violin", "trumpet", "headphone", "playlist",
    ],
];

const FOREIGN: &[&[&str]] = &[
    &[
        "il", "la", "che", "non", "per", "una", "sono", "della", "questo", "nella", "come", "quando", "sempre",
        "ancora", "cuore", "notte", "amore", "vita", "mare", "strada", "tempo", "sole", "luna", "parole", "dove",
        "anche", "tutto", "niente", "perché", "cosa",
    ],
    &[
        "el", "la", "que", "de", "los", "las", "por", "una", "con", "para", "como", "cuando", "siempre", "todavía",
        "corazón", "noche", "amor", "vida", "mar", "calle", "tiempo", "sol", "luna", "palabras", "donde", "también",
        "todo", "nada", "porque", "cosa",
    ],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub users: usize,
    pub artists: usize,
    pub songs_per_artist: usize,
    pub min_likes: usize,
    pub max_likes: usize,
    /// Probability that an artist gets one extra non-English song.
    pub foreign_share: f64,
    pub words_per_song: usize,
    pub target: Target,
    /// Lyrical feature label (morals, sentiment or emotions) to weight.
    pub coefficients: BTreeMap<String, f64>,
    /// Noise sd relative to the standardised signal; the noiseless-model
    /// correlation ceiling is `1 / sqrt(1 + noise^2)`.
    pub noise: f64,
    /// Not read from config files; callers derive it from their master seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            users: 1000,
            artists: 300,
            songs_per_artist: 5,
            min_likes: 10,
            max_likes: 30,
            foreign_share: 0.1,
            words_per_song: 120,
            target: Target::Binding,
            coefficients: [("loyalty", 1.0), ("authority", 1.0), ("purity", 1.0), ("compound", 1.0)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            noise: 3f64.sqrt(),
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn ceiling(&self) -> f64 {
        1.0 / (1.0 + self.noise * self.noise).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct SynthCohort {
    pub corpus: Corpus,
    /// Standardised planted signal per user, in `corpus.users` order.
    pub signal: Vec<f64>,
    /// Planted target value per user.
    pub planted: Vec<f64>,
    /// `1 / sqrt(1 + noise^2)`.
    pub ceiling: f64,
}

struct Pools {
    moral: [[Vec<String>; 2]; 5],
    positive: Vec<String>,
    negative: Vec<String>,
    emotion: Vec<String>,
    themes: Vec<Vec<String>>,
}

fn is_plain(w: &str) -> bool {
    w.len() >= 3 && w.chars().all(|c| c.is_ascii_lowercase())
}

impl Pools {
    fn build(pipe: &TextPipeline) -> Result<Self> {
        let lex = &pipe.lexicons;
        let fixed = |w: &str| pipe.lemmatize(w).lemmas == [w];
        let mut moral: [[Vec<String>; 2]; 5] = Default::default();
        for (w, vals) in &lex.moral.valence {
            if !fixed(w) {
                continue;
            }
            for (f, v) in vals.iter().enumerate() {
                match v {
                    Some(v) if *v >= 6.0 => moral[f][0].push(w.clone()),
                    Some(v) if *v <= 4.0 => moral[f][1].push(w.clone()),
                    _ => {}
                }
            }
        }
        let sent = &lex.sentiment;
        let usable = |w: &&String| is_plain(w) && !sent.boosters.contains_key(*w) && !sent.negations.contains(*w);
        let mut positive: Vec<String> =
            sent.valence.iter().filter(|(w, v)| **v >= 1.5 && usable(w)).map(|(w, _)| w.clone()).collect();
        let mut negative: Vec<String> =
            sent.valence.iter().filter(|(w, v)| **v <= -1.5 && usable(w)).map(|(w, _)| w.clone()).collect();
        let mut emotion: Vec<String> = lex.emotion.assoc.keys().filter(|w| fixed(w)).cloned().collect();
        let neutral = |w: &str| {
            fixed(w)
                && !sent.valence.contains_key(w)
                && !sent.boosters.contains_key(w)
                && !lex.moral.valence.contains_key(w)
                && !lex.emotion.assoc.contains_key(w)
        };
        let themes: Vec<Vec<String>> = THEMES
            .iter()
            .map(|t| t.iter().filter(|w| neutral(w)).map(|w| w.to_string()).collect())
            .collect();

        for pool in moral.iter_mut().flatten() {
            pool.sort();
        }
        positive.sort();
        negative.sort();
        emotion.sort();
        let empty = moral.iter().flatten().any(Vec::is_empty)
            || positive.is_empty()
            || negative.is_empty()
            || emotion.is_empty()
            || themes.iter().any(Vec::is_empty);
        if empty {
            return Err(Error::InvalidInput("lexicons too small to build synthetic lyrics".into()));
        }
        Ok(Pools {
            moral,
            positive,
            negative,
            emotion,
            themes,
        })
    }
}

struct ArtistLatent {
    /// Probability of a virtue (rather than vice) word, per foundation.
    virtue: [f64; 5],
    /// Foundation mixture for moral words.
    weights: [f64; 5],
    positivity: f64,
    theme: usize,
}

impl ArtistLatent {
    fn draw(rng: &mut ChaCha8Rng, themes: usize) -> Self {
        let mut weights = [0.0; 5];
        for w in &mut weights {
            *w = -(1.0 - rng.random::<f64>()).ln();
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        ArtistLatent {
            virtue: std::array::from_fn(|_| rng.random()),
            weights,
            positivity: rng.random(),
            theme: rng.random_range(0..themes),
        }
    }

    fn taste_vector(&self) -> [f64; 6] {
        let v = self.virtue;
        [v[0], v[1], v[2], v[3], v[4], self.positivity]
    }
}

fn pick<'a>(pool: &'a [String], rng: &mut ChaCha8Rng) -> &'a str {
    pool.choose(rng).expect("pools are non-empty")
}

fn english_lyrics(a: &ArtistLatent, pools: &Pools, words: usize, rng: &mut ChaCha8Rng) -> String {
    let mut lines = Vec::new();
    let mut line = Vec::new();
    for _ in 0..words {
        let u: f64 = rng.random();
        let w: &str = if u < 0.35 {
            FUNCTION_WORDS.choose(rng).expect("non-empty")
        } else if u < 0.62 {
            pick(&pools.themes[a.theme], rng)
        } else if u < 0.77 {
            let mut r: f64 = rng.random();
            let f = a
                .weights
                .iter()
                .position(|&w| {
                    r -= w;
                    r < 0.0
                })
                .unwrap_or(4);
            let vice = usize::from(rng.random::<f64>() >= a.virtue[f]);
            pick(&pools.moral[f][vice], rng)
        } else if u < 0.92 {
            if rng.random::<f64>() < a.positivity {
                pick(&pools.positive, rng)
            } else {
                pick(&pools.negative, rng)
            }
        } else {
            pick(&pools.emotion, rng)
        };
        line.push(w);
        if line.len() >= 7 {
            lines.push(line.join(" "));
            line.clear();
        }
    }
    if !line.is_empty() {
        lines.push(line.join(" "));
    }
    lines.join("\n")
}

fn foreign_lyrics(words: usize, rng: &mut ChaCha8Rng) -> String {
    let vocab = FOREIGN.choose(rng).expect("non-empty");
    let tokens: Vec<&str> = (0..words).map(|_| *vocab.choose(rng).expect("non-empty")).collect();
    tokens.chunks(7).map(|c| c.join(" ")).collect::<Vec<_>>().join("\n")
}

fn standardize(col: &mut [f64]) {
    let n = col.len() as f64;
    let m = col.iter().sum::<f64>() / n;
    let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
    for v in col.iter_mut() {
        *v = if sd < MIN_SD { 0.0 } else { (*v - m) / sd };
    }
}

fn members(t: Target) -> Vec<Foundation> {
    use Foundation as F;
    match t {
        Target::Care => vec![F::Care],
        Target::Fairness => vec![F::Fairness],
        Target::Loyalty => vec![F::Loyalty],
        Target::Authority => vec![F::Authority],
        Target::Purity => vec![F::Purity],
        Target::Individualising => vec![F::Care, F::Fairness],
        Target::Binding => vec![F::Loyalty, F::Authority, F::Purity],
    }
}

fn set_score(m: &mut MftScores, f: Foundation, v: f64) {
    match f {
        Foundation::Care => m.care = v,
        Foundation::Fairness => m.fairness = v,
        Foundation::Loyalty => m.loyalty = v,
        Foundation::Authority => m.authority = v,
        Foundation::Purity => m.purity = v,
    }
}

/// Generate a cohort. Deterministic for fixed params, pipeline and seed.
/// The signal is measured over every English song, so it matches the
/// feature stage as long as `songs_per_artist` does not exceed its top-n.
pub fn synthesize(params: &SynthParams, pipe: &TextPipeline) -> Result<SynthCohort> {
    if params.users == 0 || params.artists == 0 || params.songs_per_artist == 0 {
        return Err(Error::InvalidInput("synthetic cohort needs users, artists and songs".into()));
    }
    if params.min_likes == 0 || params.min_likes > params.max_likes || params.max_likes > params.artists {
        return Err(Error::InvalidInput(format!(
            "likes range {}..={} does not fit {} artists",
            params.min_likes, params.max_likes, params.artists
        )));
    }
    if !(params.noise >= 0.0 && params.noise.is_finite()) {
        return Err(Error::InvalidInput(format!("noise must be a non-negative number, got {}", params.noise)));
    }
    let labels = lyrical_labels(0);
    let mut coef = Vec::new();
    for (name, &c) in &params.coefficients {
        let j = labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown lyrical feature `{name}` in coefficients")))?;
        coef.push((j, c));
    }
    if coef.iter().all(|&(_, c)| c == 0.0) {
        return Err(Error::InvalidInput("at least one coefficient must be non-zero".into()));
    }

    let pools = Pools::build(pipe)?;
    let mut rng = stream_rng(params.seed, 0);

    let latents: Vec<ArtistLatent> =
        (0..params.artists).map(|_| ArtistLatent::draw(&mut rng, pools.themes.len())).collect();
    let mut catalog = BTreeMap::new();
    let mut english = BTreeMap::new();
    for (a, lat) in latents.iter().enumerate() {
        let artist_id = format!("a{:04}", a + 1);
        let popularity = (8.0 + 1.5 * rng.sample::<f64, _>(StandardNormal)).exp().round();
        let foreign = rng.random::<f64>() < params.foreign_share;
        let total = params.songs_per_artist + usize::from(foreign);
        let mut ranks: Vec<u32> = (1..=total as u32).collect();
        ranks.shuffle(&mut rng);
        let mut songs = Vec::with_capacity(total);
        for (j, &rank) in ranks.iter().enumerate() {
            let is_foreign = foreign && j == total - 1;
            let words = rng.random_range(params.words_per_song * 4 / 5..=params.words_per_song * 6 / 5).max(20);
            let lyrics = if is_foreign {
                foreign_lyrics(words, &mut rng)
            } else {
                english_lyrics(lat, &pools, words, &mut rng)
            };
            songs.push(Song {
                song_id: format!("{artist_id}-{:02}", j + 1),
                artist_id: artist_id.clone(),
                title: format!("Track {}", j + 1),
                lyrics,
                popularity_rank: rank,
                language: None,
            });
        }
        let foreign_id = format!("{artist_id}-{total:02}");
        songs.sort_by_key(|s| s.popularity_rank);
        let artist = ArtistCatalog {
            artist_id: artist_id.clone(),
            name: format!("Artist {}", a + 1),
            popularity,
            songs,
        };
        let mut en = artist.clone();
        en.songs.retain(|s| !(foreign && s.song_id == foreign_id));
        english.insert(artist_id.clone(), en);
        catalog.insert(artist_id, artist);
    }

    let artist_ids: Vec<&String> = catalog.keys().collect();
    let mut users = Vec::with_capacity(params.users);
    for u in 0..params.users {
        let taste: [f64; 6] = std::array::from_fn(|_| rng.random());
        let likes = rng.random_range(params.min_likes..=params.max_likes);
        let order: Vec<usize> = (0..params.artists).collect();
        let chosen = order
            .choose_multiple_weighted(&mut rng, likes, |&a| {
                let d: f64 = latents[a].taste_vector().iter().zip(&taste).map(|(x, y)| (x - y).powi(2)).sum();
                (-TASTE_SHARPNESS * d).exp()
            })
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        let liked: BTreeSet<String> = chosen.map(|&a| artist_ids[a].clone()).collect();
        let gender = *[Gender::Male, Gender::Female, Gender::Unknown]
            .choose_weighted(&mut rng, |g| if *g == Gender::Unknown { 0.1 } else { 0.45 })
            .expect("valid weights");
        let age_bin = *[AgeBin::Younger, AgeBin::Older, AgeBin::Unknown]
            .choose_weighted(&mut rng, |g| if *g == AgeBin::Unknown { 0.1 } else { 0.45 })
            .expect("valid weights");
        users.push(UserRecord {
            user_id: format!("u{:05}", u + 1),
            liked_artist_ids: liked,
            gender,
            age_bin,
            mft: MftScores {
                care: 0.0,
                fairness: 0.0,
                loyalty: 0.0,
                authority: 0.0,
                purity: 0.0,
            },
        });
    }

    // measured lexical features, aggregated as the feature stage does
    let english_songs: Vec<&Song> = english.values().flat_map(|a| a.songs.iter()).collect();
    let song_features: HashMap<String, Vec<f64>> = english_songs
        .par_iter()
        .map(|s| (s.song_id.clone(), lexical_scores(&s.lyrics, pipe).to_vec()))
        .collect();
    let lyrical: Vec<Vec<f64>> = users
        .iter()
        .map(|u| aggregate_user(u, &song_features, &english, Aggregation::Mean).map(|f| f.lyrical))
        .collect::<Result<_>>()?;

    let mut signal = vec![0.0; users.len()];
    for &(j, c) in &coef {
        let mut col: Vec<f64> = lyrical.iter().map(|r| r[j]).collect();
        standardize(&mut col);
        signal.iter_mut().zip(&col).for_each(|(s, z)| *s += c * z);
    }
    standardize(&mut signal);
    if signal.iter().all(|&s| s == 0.0) {
        return Err(Error::InvalidInput("planted signal has no variance across users".into()));
    }

    let scale = (1.0 + params.noise * params.noise).sqrt();
    let planted_members = members(params.target);
    let mut planted = Vec::with_capacity(users.len());
    for (u, s) in users.iter_mut().zip(&signal) {
        let eps: f64 = rng.sample(StandardNormal);
        let t = SCORE_MEAN + SCORE_SD * (s + params.noise * eps) / scale;
        planted.push(t);
        for f in Foundation::ALL {
            if !planted_members.contains(&f) {
                let v = SCORE_MEAN + SCORE_SD * rng.sample::<f64, _>(StandardNormal);
                set_score(&mut u.mft, f, v);
            }
        }
        let jitter: Vec<f64> =
            planted_members.iter().map(|_| WITHIN_SD * rng.sample::<f64, _>(StandardNormal)).collect();
        let mean = jitter.iter().sum::<f64>() / jitter.len() as f64;
        for (&f, d) in planted_members.iter().zip(&jitter) {
            let d = if planted_members.len() == 1 { 0.0 } else { d - mean };
            set_score(&mut u.mft, f, t + d);
        }
    }

    Ok(SynthCohort {
        corpus: Corpus { catalog, users },
        signal,
        planted,
        ceiling: params.ceiling(),
    })
}
