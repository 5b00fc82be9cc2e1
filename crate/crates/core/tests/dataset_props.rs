use airborne_core::dataset::{detrend, REQUIRED_SERIES};
use airborne_core::{AnnualSeries, Dataset, LulccSource};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset> {
    (1900i32..2000, 3usize..40).prop_flat_map(|(start, n)| {
        prop::collection::vec(
            prop::collection::vec(-5.0f64..5.0, n),
            REQUIRED_SERIES.len(),
        )
        .prop_map(move |cols| {
            let years: Vec<i32> = (start..start + n as i32).collect();
            let columns = REQUIRED_SERIES
                .iter()
                .map(|s| s.to_string())
                .zip(cols)
                .collect();
            Dataset::from_columns(&years, columns).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn emissions_minus_fossil_is_lulcc(d in dataset()) {
        let ff = d.values("emissions_ff").unwrap();
        for src in LulccSource::ALL {
            let e = d.emissions(src);
            let l = d.values(src.lulcc_column()).unwrap();
            for t in 0..d.len() {
                prop_assert_eq!(e.values()[t], ff[t] + l[t]);
                let scale = ff[t].abs().max(l[t].abs());
                prop_assert!((e.values()[t] - ff[t] - l[t]).abs() <= 2.0 * f64::EPSILON * scale);
            }
        }
    }

    #[test]
    fn emissions_difference_is_exact_on_dyadic_data(
        ff in prop::collection::vec(0i32..20_000, 10),
        lulcc in prop::collection::vec(-2_000i32..2_000, 10),
    ) {
        let years: Vec<i32> = (2000..2010).collect();
        let scaled = |v: &[i32]| v.iter().map(|x| *x as f64 / 1024.0).collect::<Vec<_>>();
        let columns = REQUIRED_SERIES
            .iter()
            .map(|name| {
                let col = match *name {
                    "emissions_ff" => scaled(&ff),
                    n if n.starts_with("lulcc_") => scaled(&lulcc),
                    _ => vec![0.0; 10],
                };
                (name.to_string(), col)
            })
            .collect();
        let d = Dataset::from_columns(&years, columns).unwrap();
        let f = d.values("emissions_ff").unwrap();
        for src in LulccSource::ALL {
            let e = d.emissions(src);
            let l = d.values(src.lulcc_column()).unwrap();
            for t in 0..10 {
                prop_assert_eq!(e.values()[t] - f[t], l[t]);
            }
        }
    }

    #[test]
    fn nested_subsets_compose(d in dataset(), a in 0usize..40, b in 0usize..40, c in 0usize..40, e in 0usize..40) {
        let (first, last) = d.year_range();
        let span = (last - first) as usize;
        let pick = |x: usize| first + (x % (span + 1)) as i32;
        let (f1, t1) = { let (x, y) = (pick(a), pick(b)); (x.min(y), x.max(y)) };
        let (f2, t2) = { let (x, y) = (pick(c), pick(e)); (x.min(y), x.max(y)) };
        let (lo, hi) = (f1.max(f2), t1.min(t2));
        prop_assume!(lo <= hi);
        let twice = d.subset(f1, t1).unwrap().subset(lo, hi).unwrap();
        let once = d.subset(lo, hi).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn detrended_series_is_orthogonal_to_constant_and_trend(
        start in 1900i32..2000,
        values in prop::collection::vec(-100.0f64..100.0, 3..64),
    ) {
        let s = AnnualSeries::new("enso", start, values).unwrap();
        let r = detrend(&s).unwrap();
        let ones: f64 = r.values().iter().sum();
        let trend: f64 = r.values().iter().enumerate().map(|(t, v)| t as f64 * v).sum();
        prop_assert!(ones.abs() <= 1e-10 * (1.0 + s.len() as f64));
        prop_assert!(trend.abs() <= 1e-10 * (1.0 + (s.len() * s.len()) as f64));
    }
}
