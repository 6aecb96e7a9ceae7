use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{AgeBin, ArtistCatalog, Gender, UserRecord};
use crate::{Error, Result, Target};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserFeatures {
    pub user_id: String,
    /// Aggregated lyrical block, same layout as the song vectors.
    pub lyrical: Vec<f64>,
    pub gender: Gender,
    pub age_bin: AgeBin,
    pub artist_like_count: usize,
    pub mean_artist_popularity: f64,
    pub n_songs: usize,
    /// Questionnaire targets in [`Target::ALL`] order.
    pub targets: [f64; 7],
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Aggregate the features of every retained song of every liked artist.
pub fn aggregate_user(
    user: &UserRecord,
    songs: &HashMap<String, Vec<f64>>,
    catalog: &BTreeMap<String, ArtistCatalog>,
    mode: Aggregation,
) -> Result<UserFeatures> {
    let mut rows: Vec<&[f64]> = Vec::new();
    let mut popularity = 0.0;
    for aid in &user.liked_artist_ids {
        let artist = catalog
            .get(aid)
            .ok_or_else(|| Error::InvalidInput(format!("user `{}` likes unknown artist `{aid}`", user.user_id)))?;
        popularity += artist.popularity;
        for song in &artist.songs {
            let f = songs
                .get(&song.song_id)
                .ok_or_else(|| Error::InvalidInput(format!("no features for song `{}`", song.song_id)))?;
            rows.push(f);
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyUser(user.user_id.clone()));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidInput("song feature vectors differ in length".into()));
    }
    let lyrical = (0..dim)
        .map(|j| match mode {
            Aggregation::Mean => rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64,
            Aggregation::Median => median(&mut rows.iter().map(|r| r[j]).collect::<Vec<_>>()),
        })
        .collect();
    let likes = user.liked_artist_ids.len();
    Ok(UserFeatures {
        user_id: user.user_id.clone(),
        lyrical,
        gender: user.gender,
        age_bin: user.age_bin,
        artist_like_count: likes,
        mean_artist_popularity: popularity / likes as f64,
        n_songs: rows.len(),
        targets: Target::ALL.map(|t| user.mft.target(t)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{MftScores, Song};

    fn song(id: &str, artist: &str) -> Song {
        Song {
            song_id: id.into(),
            artist_id: artist.into(),
            title: String::new(),
            lyrics: "x".into(),
            popularity_rank: 1,
            language: Some("en".into()),
        }
    }

    fn setup() -> (UserRecord, HashMap<String, Vec<f64>>, BTreeMap<String, ArtistCatalog>) {
        let mut catalog = BTreeMap::new();
        catalog.insert(
            "a".to_string(),
            ArtistCatalog {
                artist_id: "a".into(),
                name: "A".into(),
                popularity: 10.0,
                songs: vec![song("s1", "a")],
            },
        );
        catalog.insert(
            "b".to_string(),
            ArtistCatalog {
                artist_id: "b".into(),
                name: "B".into(),
                popularity: 30.0,
                songs: vec![song("s2", "b"), song("s3", "b")],
            },
        );
        let songs = [("s1", vec![-0.5, 1.0]), ("s2", vec![0.5, 2.0]), ("s3", vec![0.0, 6.0])]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let user = UserRecord {
            user_id: "u".into(),
            liked_artist_ids: ["a", "b"].iter().map(|s| s.to_string()).collect(),
            gender: Gender::Female,
            age_bin: AgeBin::Older,
            mft: MftScores {
                care: 4.0,
                fairness: 2.0,
                loyalty: 3.0,
                authority: 3.0,
                purity: 0.0,
            },
        };
        (user, songs, catalog)
    }

    #[test]
    fn mean_over_all_songs() {
        let (u, s, c) = setup();
        let f = aggregate_user(&u, &s, &c, Aggregation::Mean).unwrap();
        assert_eq!(f.lyrical, vec![0.0, 3.0]);
        assert_eq!(f.artist_like_count, 2);
        assert_eq!(f.mean_artist_popularity, 20.0);
        assert_eq!(f.n_songs, 3);
        assert_eq!(f.targets[5], 3.0);
        assert_eq!(f.targets[6], 2.0);
    }

    #[test]
    fn median_mode() {
        let (u, s, c) = setup();
        let f = aggregate_user(&u, &s, &c, Aggregation::Median).unwrap();
        assert_eq!(f.lyrical, vec![0.0, 2.0]);
    }

    #[test]
    fn user_without_songs_is_an_error() {
        let (mut u, s, c) = setup();
        u.liked_artist_ids.clear();
        assert!(matches!(aggregate_user(&u, &s, &c, Aggregation::Mean), Err(Error::EmptyUser(_))));
    }
}
