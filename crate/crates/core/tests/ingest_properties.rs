mod common;

use festcircuit::ingest::{
    assign_film_keys, country_appearance_counts, expanded_row_count, filter_period,
    parse_screenings_from_reader, total_count, Period, Weight,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn to_csv(records: &[festcircuit::ingest::ScreeningRecord]) -> (String, usize) {
    let mut out = String::from(
        "film_title,festival_id,festival_series_id,event_year,host_country,producer_country,production_year,languages,genre_tags\n",
    );
    let mut rows = 0;
    for r in records {
        for p in &r.producer_countries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},,\n",
                r.title,
                r.festival_id,
                r.festival_series_id,
                r.event_year,
                r.host_country,
                p,
                r.production_year
            ));
            rows += 1;
        }
    }
    (out, rows)
}

proptest! {
    #[test]
    fn weights_sum_to_record_count(seed in any::<u64>(), n in 1usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records = common::random_records(&mut rng, n, &common::country_pool(12));
        let weighted = country_appearance_counts(&records, true);
        prop_assert_eq!(total_count(&weighted), Weight::from_integer(n as u64));
        let unweighted = country_appearance_counts(&records, false);
        prop_assert_eq!(total_count(&unweighted), Weight::from_integer(expanded_row_count(&records) as u64));
    }

    #[test]
    fn reexpansion_round_trips_rows(seed in any::<u64>(), n in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records = common::random_records(&mut rng, n, &common::country_pool(8));
        let (csv, rows) = to_csv(&records);
        let parsed = parse_screenings_from_reader(csv.as_bytes(), "mem", None).unwrap();
        prop_assert_eq!(parsed.len(), records.len());
        prop_assert_eq!(expanded_row_count(&parsed), rows);
    }

    #[test]
    fn film_keys_idempotent_and_order_free(seed in any::<u64>(), n in 1usize..100) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut records = common::random_records(&mut rng, n, &common::country_pool(6));
        for r in records.iter_mut() {
            r.title = format!("film {}", r.source_line % 17);
        }
        let mut shuffled = records.clone();
        shuffled.shuffle(&mut rng);
        let a = assign_film_keys(&mut records);
        let once: Vec<_> = records.iter().map(|r| r.film_key).collect();
        prop_assert_eq!(assign_film_keys(&mut records), a);
        let twice: Vec<_> = records.iter().map(|r| r.film_key).collect();
        prop_assert_eq!(&once, &twice);
        assign_film_keys(&mut shuffled);
        for r in &shuffled {
            let same = records.iter().find(|o| o.source_line == r.source_line).unwrap();
            prop_assert_eq!(r.film_key, same.film_key);
        }
    }

    #[test]
    fn nested_period_filters_compose(seed in any::<u64>(), a in 2012i32..=2021, b in 2012i32..=2021, c in 0i32..4, d in 0i32..4) {
        let (lo, hi) = (a.min(b), a.max(b));
        let inner = Period::new(lo, hi).unwrap();
        let outer = Period::new(lo - c, hi + d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records = common::random_records(&mut rng, 120, &common::country_pool(5));
        prop_assert_eq!(filter_period(&filter_period(&records, outer), inner), filter_period(&records, inner));
        prop_assert_eq!(filter_period(&filter_period(&records, inner), outer), filter_period(&records, inner));
    }
}
