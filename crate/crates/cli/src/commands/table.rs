//! CSV reading and writing, and the user-feature table.

use std::path::Path;

use moralens_core::corpus::{AgeBin, Gender};
use moralens_core::features::{lyrical_labels, UserFeatures};
use moralens_core::Target;

use crate::error::{CliError, Result};

/// Shortest round-trip form; `NA` for NaN.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        v.to_string()
    }
}

pub fn write_csv<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(header).map_err(|e| CliError::csv(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
        let header = r.headers().map_err(|e| CliError::csv(path, e))?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| CliError::csv(path, e))?;
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str, path: &Path) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::csv(path, format!("missing column `{name}`")))
    }
}

pub fn parse_num(s: &str, path: &Path) -> Result<f64> {
    if s == "NA" {
        return Ok(f64::NAN);
    }
    s.parse().map_err(|_| CliError::csv(path, format!("not a number: `{s}`")))
}

/// Target columns carry a prefix so they cannot clash with the lexical
/// moral scores of the same name.
pub fn target_column(t: Target) -> String {
    format!("mfq_{}", t.name())
}

const USER_META: [&str; 6] = ["user_id", "gender", "age_bin", "artist_likes", "mean_artist_popularity", "n_songs"];

pub fn write_users(path: &Path, users: &[UserFeatures], k: usize) -> Result<()> {
    let mut header = strings(&USER_META);
    header.extend(lyrical_labels(k));
    header.extend(Target::ALL.iter().map(|t| target_column(*t)));
    let rows = users.iter().map(|u| {
        let mut r = vec![
            u.user_id.clone(),
            u.gender.label().to_string(),
            u.age_bin.label().to_string(),
            u.artist_like_count.to_string(),
            num(u.mean_artist_popularity),
            u.n_songs.to_string(),
        ];
        r.extend(u.lyrical.iter().map(|&v| num(v)));
        r.extend(u.targets.iter().map(|&v| num(v)));
        r
    });
    write_csv(path, &header, rows)
}

/// Users and the topic count `k` of their lyrical block.
pub fn read_users(path: &Path) -> Result<(Vec<UserFeatures>, usize)> {
    let t = Table::read(path)?;
    let k = t.header.iter().filter(|h| h.starts_with("topic_")).count();
    let lyr = lyrical_labels(k);
    let expected: Vec<String> = USER_META
        .iter()
        .map(|s| s.to_string())
        .chain(lyr.iter().cloned())
        .chain(Target::ALL.iter().map(|t| target_column(*t)))
        .collect();
    if t.header != expected {
        return Err(CliError::csv(path, "unexpected header"));
    }
    let bad = |m: String| CliError::csv(path, m);
    let mut users = Vec::with_capacity(t.rows.len());
    for r in &t.rows {
        let nums = |range: std::ops::Range<usize>| -> Result<Vec<f64>> { r[range].iter().map(|s| parse_num(s, path)).collect() };
        let lyrical = nums(6..6 + lyr.len())?;
        let targets: [f64; 7] = nums(6 + lyr.len()..6 + lyr.len() + 7)?.try_into().expect("seven targets");
        users.push(UserFeatures {
            user_id: r[0].clone(),
            gender: Gender::parse(Some(&r[1])),
            age_bin: AgeBin::parse(Some(&r[2])),
            artist_like_count: r[3].parse().map_err(|_| bad(format!("bad artist_likes `{}`", r[3])))?,
            mean_artist_popularity: parse_num(&r[4], path)?,
            n_songs: r[5].parse().map_err(|_| bad(format!("bad n_songs `{}`", r[5])))?,
            lyrical,
            targets,
        });
    }
    Ok((users, k))
}
