use moralens_core::corpus::{AgeBin, Gender};
use moralens_core::features::{
    build_design_matrix, lyrical_labels, target_matrix, ExperimentId, ExperimentSpec, FeatureGroup,
    NormalizationParams, SongFeatures, UserFeatures,
};
use moralens_core::Error;
use ndarray::Array2;
use proptest::prelude::*;

fn user(i: usize, k: usize) -> UserFeatures {
    UserFeatures {
        user_id: format!("u{i}"),
        lyrical: (0..SongFeatures::dim(k)).map(|j| (i * 100 + j) as f64).collect(),
        gender: Gender::ALL[i % 3],
        age_bin: AgeBin::ALL[(i + 1) % 3],
        artist_like_count: i + 1,
        mean_artist_popularity: i as f64 * 10.0,
        n_songs: 3,
        targets: [i as f64; 7],
    }
}

proptest! {
    #[test]
    fn normalised_columns_have_zero_mean_and_unit_sd(
        rows in 2usize..40,
        vals in prop::collection::vec(-1e3f64..1e3, 120),
    ) {
        let x = Array2::from_shape_fn((rows, 3), |(i, j)| vals[(i * 3 + j) % vals.len()]);
        let labels: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let p = NormalizationParams::fit(x.view(), &labels);
        let z = p.apply(x.view());
        for j in 0..3 {
            let col = z.column(j);
            let n = rows as f64;
            let m = col.sum() / n;
            let sd = (col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
            prop_assert!(m.abs() < 1e-9);
            if p.sd[j] >= 1e-9 {
                prop_assert!((sd - 1.0).abs() < 1e-9);
            } else {
                prop_assert!(col.iter().all(|&v| v == 0.0));
            }
        }
        prop_assert_eq!(NormalizationParams::from_text(&p.to_text()).unwrap(), p);
    }
}

#[test]
fn experiment_widths() {
    use ExperimentId::*;
    let k = 6;
    assert_eq!(ExperimentSpec::new(Ex1).width(k).unwrap(), 4);
    assert_eq!(ExperimentSpec::new(Ex2).width(k).unwrap(), 8);
    assert_eq!(ExperimentSpec::new(Ex3).width(k).unwrap(), 12);
    let cases = [(Ex4, 5), (Ex5, k), (Ex6, 5 + k), (Ex7, 5 + k + 6), (Ex8, 5 + k + 6 + 2)];
    for base in ExperimentId::BASES {
        let bw = ExperimentSpec::new(base).width(k).unwrap();
        for (ex, extra) in cases {
            assert_eq!(ExperimentSpec::with_base(ex, base).width(k).unwrap(), bw + extra, "{ex} on {base}");
        }
    }
}

#[test]
fn experiments_above_three_need_a_base() {
    for ex in ExperimentId::ALL {
        let r = ExperimentSpec::new(ex).groups();
        assert_eq!(r.is_err(), ex.needs_base(), "{ex}");
        if ex.needs_base() {
            assert!(matches!(r, Err(Error::UnresolvedBase(_))));
            assert!(ExperimentSpec::with_base(ex, ExperimentId::Ex5).groups().is_err());
        }
    }
}

#[test]
fn design_matrix_picks_the_right_columns() {
    let k = 3;
    let users: Vec<UserFeatures> = (0..4).map(|i| user(i, k)).collect();
    let spec = ExperimentSpec::with_base(ExperimentId::Ex8, ExperimentId::Ex1);
    let groups = spec.groups().unwrap();
    let d = build_design_matrix(&groups, &users, k).unwrap();
    assert_eq!(d.x.shape(), &[4, spec.width(k).unwrap()]);
    assert_eq!(d.labels.len(), d.x.ncols());
    assert_eq!(d.groups.len(), d.x.ncols());

    let lyr = lyrical_labels(k);
    for (c, label) in d.labels.iter().enumerate() {
        for (i, u) in users.iter().enumerate() {
            let got = d.x[[i, c]];
            let want = if let Some(j) = lyr.iter().position(|l| l == label) {
                u.lyrical[j]
            } else if let Some(a) = AgeBin::ALL.iter().find(|a| *label == format!("age_{}", a.label())) {
                f64::from(u8::from(u.age_bin == *a))
            } else if let Some(g) = Gender::ALL.iter().find(|g| *label == format!("gender_{}", g.label())) {
                f64::from(u8::from(u.gender == *g))
            } else if label == "artist_likes" {
                u.artist_like_count as f64
            } else if label == "artist_popularity" {
                (1.0 + u.mean_artist_popularity).ln()
            } else {
                panic!("unexpected column {label}");
            };
            assert_eq!(got, want, "{label} for {}", u.user_id);
        }
    }
    // emotions are not part of EX8 on an EX1 base
    assert!(!d.groups.contains(&FeatureGroup::Emotions));
    assert_eq!(d.groups.iter().filter(|&&g| g == FeatureGroup::Topics).count(), k);

    let y = target_matrix(&users);
    assert_eq!(y.shape(), &[4, 7]);
    assert_eq!(y[[2, 6]], 2.0);
}

#[test]
fn design_rejects_wrong_lyrical_width() {
    let mut u = user(0, 3);
    u.lyrical.pop();
    assert!(build_design_matrix(&[FeatureGroup::Sentiment], &[u], 3).is_err());
}
