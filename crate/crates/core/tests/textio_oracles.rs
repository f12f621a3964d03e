use widgetspace::datum::days_in_month;
use widgetspace::textio::{
    format_date_card, format_date_fbi, format_simple_date_long, format_simple_date_short, ordinal_word,
    parse_simple_date_fbi,
};
use widgetspace::SimpleDate;

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
    "November", "December",
];

// Built from parts rather than a lookup table.
fn ordinal_oracle(n: u32) -> String {
    const UNITS: [&str; 10] = ["", "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth"];
    const TEENS: [&str; 10] = [
        "tenth", "eleventh", "twelfth", "thirteenth", "fourteenth", "fifteenth", "sixteenth", "seventeenth",
        "eighteenth", "nineteenth",
    ];
    match (n / 10, n % 10) {
        (0, u) => UNITS[u as usize].to_string(),
        (1, u) => TEENS[u as usize].to_string(),
        (2, 0) => "twentieth".to_string(),
        (3, 0) => "thirtieth".to_string(),
        (2, u) => format!("twenty-{}", UNITS[u as usize]),
        (3, u) => format!("thirty-{}", UNITS[u as usize]),
        _ => unreachable!(),
    }
}

fn every_day(from: i32, to: i32) -> impl Iterator<Item = SimpleDate> {
    (from..=to).flat_map(|y| {
        (1..=12).flat_map(move |m| (1..=days_in_month(y, m)).map(move |d| SimpleDate::new(y, m, d).unwrap()))
    })
}

// MM/DD/YYYY read back independently.
fn parse_card(s: &str) -> (i32, u32, u32) {
    let parts: Vec<&str> = s.split('/').collect();
    assert_eq!(parts.len(), 3, "{s}");
    assert_eq!((parts[0].len(), parts[1].len(), parts[2].len()), (2, 2, 4), "{s}");
    (parts[2].parse().unwrap(), parts[0].parse().unwrap(), parts[1].parse().unwrap())
}

#[test]
fn ordinals_match_composed_words() {
    for n in 1..=31 {
        assert_eq!(ordinal_word(n), Some(ordinal_oracle(n).as_str()), "{n}");
    }
    assert_eq!(ordinal_word(0), None);
    assert_eq!(ordinal_word(32), None);
}

#[test]
fn golden_dates() {
    let d = SimpleDate::new(2010, 7, 4).unwrap();
    assert_eq!(format_simple_date_short(&d), "7/4/2010");
    assert_eq!(format_simple_date_long(&d), "the fourth of July, 2010");
    assert_eq!(format_date_fbi(&d), "20100704");
    assert_eq!(format_date_card(&d), "07/04/2010");
}

#[test]
fn long_and_short_forms_match_oracle_for_a_leap_year() {
    for d in every_day(2012, 2012) {
        let long = format!(
            "the {} of {}, {}",
            ordinal_oracle(d.day()),
            MONTHS[d.month() as usize - 1],
            d.year()
        );
        assert_eq!(format_simple_date_long(&d), long);
        assert_eq!(format_simple_date_short(&d), format!("{}/{}/{}", d.month(), d.day(), d.year()));
    }
}

#[test]
fn card_form_reads_back() {
    for d in every_day(1900, 2100) {
        assert_eq!(parse_card(&format_date_card(&d)), (d.year(), d.month(), d.day()));
    }
}

#[test]
fn fbi_round_trip_1900_to_2100() {
    let mut n = 0;
    for d in every_day(1900, 2100) {
        assert_eq!(parse_simple_date_fbi(&format_date_fbi(&d)).unwrap(), d);
        n += 1;
    }
    assert_eq!(n, 73_414);
}

#[test]
fn fbi_parser_accepts_slashes_only() {
    let d = SimpleDate::new(2010, 7, 4).unwrap();
    assert_eq!(parse_simple_date_fbi("20100704").unwrap(), d);
    assert_eq!(parse_simple_date_fbi("2010/07/04").unwrap(), d);
    assert!(parse_simple_date_fbi("2010-07-04").is_err());
    assert!(parse_simple_date_fbi("2010074").is_err());
    assert!(parse_simple_date_fbi("20101304").is_err());
}
