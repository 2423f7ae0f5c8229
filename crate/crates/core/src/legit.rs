//! Agent-based legitimate traveler population and the shared node builders
//! that ring injection reuses.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::GraphData;
use crate::rng::Stream;
use crate::sampling::{DistributionSpec, Sampler};
use crate::schema::{NodeType, Relation, AIRLINES, AIRPORTS, COUNTRIES};

/// Simulation window length in days; day 0 is `WINDOW_START_UNIX`.
pub const WINDOW_DAYS: f64 = 90.0;
pub const WINDOW_START_UNIX: i64 = 1_704_067_200;
/// Bookings on or after this day fall in the trailing 30-day window.
pub const RECENT_FROM_DAY: f64 = WINDOW_DAYS - 30.0;

/// Cap applied to the stored device `shared_user_count` feature.
pub const DEVICE_SHARED_CAP: f64 = 3.0;

pub const FLIGHTS_PER_USER: f64 = 0.15;
pub const HOTELS_PER_USER: f64 = 0.08;

pub const DEVICE_REUSE_P: f64 = 0.006;
pub const IP_REUSE_P: f64 = 0.01;
pub const REFERRAL_P: f64 = 0.04;
pub const LOYALTY_P: f64 = 0.61;
pub const EXTRA_CARD_P: f64 = 0.33;
pub const HOTEL_BOOKING_P: f64 = 0.45;
pub const REVIEW_P: f64 = 0.78;
pub const CANCEL_P: f64 = 0.18;
pub const CHARGEBACK_P: f64 = 0.02;
pub const GEO_MISMATCH_P: f64 = 0.03;
pub const LEGIT_HOTEL_QUALITY_MEAN: f64 = 3.91;

/// Identity stamped on every node created for a ring (or for the legit
/// population when `ring_id` is -1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tag {
    pub ring_id: i64,
    pub ring_type: u8,
}

impl Tag {
    pub const LEGIT: Tag = Tag {
        ring_id: -1,
        ring_type: 0,
    };

    pub fn is_fraud(self) -> bool {
        self.ring_id >= 0
    }

    fn label(self) -> u8 {
        self.is_fraud() as u8
    }
}

/// Behavioural distributions of the population, shared by the injectors.
pub struct Samplers {
    pub account_age: Sampler,
    pub bookings_recent: Sampler,
    pub bookings_older: Sampler,
    pub lead_time: Sampler,
    pub booking_value: Sampler,
    pub country: Sampler,
    pub device_count: Sampler,
    pub review_noise: Normal<f64>,
    pub velocity_noise: Normal<f64>,
    pub hotel_quality: Normal<f64>,
    pub extra_ips: Binomial,
}

/// Weights of the 16 country codes: the four named markets, then a
/// geometric tail (ratio 0.85) carrying the remaining 47%.
pub fn country_weights() -> Vec<f64> {
    let head = [0.20, 0.15, 0.10, 0.08];
    let tail_mass = 1.0 - head.iter().sum::<f64>();
    let raw: Vec<f64> = (0..COUNTRIES.len() - head.len()).map(|i| 0.85f64.powi(i as i32)).collect();
    let total: f64 = raw.iter().sum();
    head.iter()
        .copied()
        .chain(raw.iter().map(|r| r / total * tail_mass))
        .collect()
}

impl Samplers {
    pub fn new() -> Result<Self> {
        let spec = |s: DistributionSpec| s.sampler();
        Ok(Samplers {
            account_age: spec(DistributionSpec::Gamma {
                shape: 2.0,
                scale: 180.0,
            })?,
            bookings_recent: spec(DistributionSpec::Poisson { rate: 2.2 })?,
            bookings_older: spec(DistributionSpec::Poisson { rate: 0.6 })?,
            lead_time: spec(DistributionSpec::Gamma {
                shape: 2.0,
                scale: 30.0,
            })?,
            booking_value: spec(DistributionSpec::LogNormal {
                mu: 6.1,
                sigma: 0.7,
            })?,
            country: spec(DistributionSpec::Categorical {
                weights: country_weights(),
            })?,
            device_count: spec(DistributionSpec::Categorical {
                weights: vec![0.55, 0.32, 0.13],
            })?,
            review_noise: Normal::new(0.0, 0.9).map_err(cfg)?,
            velocity_noise: Normal::new(0.0, 0.015).map_err(cfg)?,
            hotel_quality: Normal::new(LEGIT_HOTEL_QUALITY_MEAN, 0.45).map_err(cfg)?,
            extra_ips: Binomial::new(2, 0.5).map_err(cfg)?,
        })
    }
}

fn cfg(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Booking attributes decided by the caller; the rest are filled in by
/// [`add_booking`].
#[derive(Debug, Clone, Copy)]
pub struct BookingSpec {
    pub value: f64,
    pub lead_time: f64,
    pub day: f64,
    pub chargeback: bool,
    pub cancelled: bool,
    pub geo_mismatch: bool,
}

pub fn bernoulli(rng: &mut Stream, p: f64) -> bool {
    rng.random::<f64>() < p
}

pub fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Velocity score as a noisy linear function of recent booking count.
pub fn velocity_score(s: &Samplers, rng: &mut Stream, recent: usize, shift: f64) -> f64 {
    clamp01(0.08 * recent as f64 + 0.06 + shift + s.velocity_noise.sample(rng))
}

/// Adds a user whose count-derived columns are filled by [`finalize`].
pub fn add_user(g: &mut GraphData, tag: Tag, account_age: f64, velocity: f64, country: f64) -> usize {
    let mut row = [0.0; 10];
    row[0] = account_age;
    row[3] = velocity;
    row[9] = country;
    g.table_mut(NodeType::User)
        .push(&row, tag.label(), tag.ring_id, tag.ring_type)
}

pub fn add_device(g: &mut GraphData, rng: &mut Stream, tag: Tag, owner_age: f64) -> usize {
    let emulator_p = if tag.is_fraud() { 0.25 } else { 0.01 };
    let device_type = match rng.random::<f64>() {
        x if x < 0.6 => 0.0,
        x if x < 0.9 => 1.0,
        _ => 2.0,
    };
    let row = [
        device_type,
        0.0,
        flag(bernoulli(rng, emulator_p)),
        rng.random_range(0.0..=owner_age.clamp(1.0, 720.0)).round(),
        rng.random_range(2..=60) as f64,
    ];
    g.table_mut(NodeType::Device)
        .push(&row, 0, tag.ring_id, tag.ring_type)
}

pub fn add_ip(g: &mut GraphData, rng: &mut Stream, tag: Tag, country: f64) -> usize {
    let (vpn_p, dc_p, abuse_hi) = if tag.is_fraud() {
        (0.35, 0.2, 0.9)
    } else {
        (0.05, 0.02, 0.3)
    };
    let row = [
        flag(bernoulli(rng, vpn_p)),
        flag(bernoulli(rng, dc_p)),
        rng.random_range(0.0..abuse_hi),
        0.0,
        country,
    ];
    g.table_mut(NodeType::IpAddress)
        .push(&row, 0, tag.ring_id, tag.ring_type)
}

pub fn add_card(g: &mut GraphData, rng: &mut Stream, tag: Tag, country: f64, compromised: bool) -> usize {
    let card_type = match rng.random::<f64>() {
        x if x < 0.5 => 0.0,
        x if x < 0.8 => 1.0,
        x if x < 0.9 => 2.0,
        _ => 3.0,
    };
    let row = [
        card_type,
        0.0,
        flag(compromised),
        country,
        rng.random_range(30.0..3000.0f64).round(),
        flag(bernoulli(rng, 0.05)),
    ];
    g.table_mut(NodeType::PaymentCard)
        .push(&row, 0, tag.ring_id, tag.ring_type)
}

pub fn add_loyalty(g: &mut GraphData, rng: &mut Stream, tag: Tag, owner_age: f64, suspicious: f64) -> usize {
    let tier = match rng.random::<f64>() {
        x if x < 0.55 => 0.0,
        x if x < 0.8 => 1.0,
        x if x < 0.95 => 2.0,
        _ => 3.0,
    };
    let row = [
        (rng.random::<f64>() * 40_000.0).round(),
        0.0,
        suspicious,
        tier,
        rng.random_range(0.0..=owner_age.max(1.0)).round(),
        rng.random_range(0..=2) as f64,
        rng.random_range(0..=3000) as f64,
    ];
    g.table_mut(NodeType::LoyaltyAccount)
        .push(&row, tag.label(), tag.ring_id, tag.ring_type)
}

/// Adds a booking made by `user` and its flight/hotel and payment edges.
#[allow(clippy::too_many_arguments)]
pub fn add_booking(
    g: &mut GraphData,
    rng: &mut Stream,
    tag: Tag,
    user: usize,
    spec: BookingSpec,
    hotel: Option<usize>,
    flight: Option<usize>,
    card: usize,
) -> usize {
    let is_hotel = hotel.is_some();
    let nights = if is_hotel { rng.random_range(1..=7) as f64 } else { 0.0 };
    let row = [
        spec.value,
        spec.lead_time,
        flag(spec.chargeback),
        flag(spec.cancelled),
        spec.day,
        flag(is_hotel),
        nights,
        rng.random_range(1..=4) as f64,
        flag(spec.geo_mismatch),
    ];
    let id = g
        .table_mut(NodeType::Booking)
        .push(&row, tag.label(), tag.ring_id, tag.ring_type);
    g.add_edge(Relation::Made, user, id);
    if let Some(h) = hotel {
        g.add_edge(Relation::ForHotel, id, h);
    }
    if let Some(f) = flight {
        g.add_edge(Relation::ForFlight, id, f);
    }
    g.add_edge(Relation::PaidWith, id, card);
    id
}

/// Adds a review by `user` about `hotel`, posted on `day`.
pub fn add_review(
    g: &mut GraphData,
    rng: &mut Stream,
    tag: Tag,
    user: usize,
    hotel: usize,
    rating: f64,
    day: f64,
) -> usize {
    let row = [
        rating,
        1.0,
        rng.random_range(0..=14) as f64,
        rng.random_range(40..=1200) as f64,
        rng.random_range(0..=6) as f64,
        day,
    ];
    let id = g
        .table_mut(NodeType::Review)
        .push(&row, tag.label(), tag.ring_id, tag.ring_type);
    g.add_edge(Relation::Wrote, user, id);
    g.add_edge(Relation::About, id, hotel);
    id
}

pub fn add_hotel(
    g: &mut GraphData,
    rng: &mut Stream,
    tag: Tag,
    country: f64,
    avg_rating: f64,
    listing_age: f64,
) -> usize {
    let policy = match rng.random::<f64>() {
        x if x < 0.5 => 0.0,
        x if x < 0.8 => 1.0,
        _ => 2.0,
    };
    let row = [
        rng.random_range(1..=5) as f64,
        avg_rating,
        flag(tag.is_fraud()),
        listing_age,
        0.0,
        country,
        (rng.random_range(3.8..5.8f64)).exp().round(),
        rng.random_range(10..=400) as f64,
        policy,
    ];
    g.table_mut(NodeType::Hotel)
        .push(&row, tag.label(), tag.ring_id, tag.ring_type)
}

fn add_flight(g: &mut GraphData, rng: &mut Stream) -> usize {
    let origin = rng.random_range(0..AIRPORTS.len());
    let mut dest = rng.random_range(0..AIRPORTS.len() - 1);
    if dest >= origin {
        dest += 1;
    }
    let departure = WINDOW_START_UNIX + rng.random_range(0..(WINDOW_DAYS as i64 + 60) * 86_400);
    let row = [
        origin as f64,
        dest as f64,
        rng.random_range(0..AIRLINES.len()) as f64,
        departure as f64,
        (rng.random_range(4.8..6.6f64)).exp().round(),
        (rng.random_range(1.0..15.0f64) * 4.0).round() / 4.0,
        *[150.0, 180.0, 250.0, 350.0].choose(rng).expect("non-empty"),
    ];
    g.table_mut(NodeType::Flight).push(&row, 0, -1, 0)
}

/// Legit hotel and flight catalogues referenced by bookings.
#[derive(Debug, Clone)]
pub struct Catalog {
    pub hotels: Vec<usize>,
    pub hotel_quality: Vec<f64>,
    pub flights: Vec<usize>,
}

impl Catalog {
    pub fn random_hotel(&self, rng: &mut Stream) -> usize {
        self.hotels[rng.random_range(0..self.hotels.len())]
    }

    pub fn random_flight(&self, rng: &mut Stream) -> usize {
        self.flights[rng.random_range(0..self.flights.len())]
    }
}

/// Result of the legit pass: the graph so far and the shared catalogue.
pub struct LegitPopulation {
    pub graph: GraphData,
    pub catalog: Catalog,
}

/// Generates `n_legit` legitimate users plus catalogues sized for a
/// platform of `n_platform_users`.
pub fn generate_legit_population(
    n_legit: usize,
    n_platform_users: usize,
    rng: &mut Stream,
) -> Result<LegitPopulation> {
    if n_platform_users < crate::config::MIN_USERS {
        return Err(Error::Config(format!(
            "population of {n_platform_users} users is below the minimum of {}",
            crate::config::MIN_USERS
        )));
    }
    let s = Samplers::new()?;
    let mut g = GraphData::new();

    let n_flights = ((n_platform_users as f64 * FLIGHTS_PER_USER).round() as usize).max(1);
    let n_hotels = ((n_platform_users as f64 * HOTELS_PER_USER).round() as usize).max(1);
    let flights: Vec<usize> = (0..n_flights).map(|_| add_flight(&mut g, rng)).collect();
    let mut hotels = Vec::with_capacity(n_hotels);
    let mut hotel_quality = Vec::with_capacity(n_hotels);
    for _ in 0..n_hotels {
        let q = s.hotel_quality.sample(rng).clamp(1.0, 5.0);
        let country = s.country.draw(rng);
        let age = rng.random_range(60.0..3000.0f64).round();
        hotels.push(add_hotel(&mut g, rng, Tag::LEGIT, country, q, age));
        hotel_quality.push(q);
    }
    let catalog = Catalog {
        hotels,
        hotel_quality,
        flights,
    };

    let tag = Tag::LEGIT;
    for _ in 0..n_legit {
        let age = s.account_age.draw(rng);
        let country = s.country.draw(rng);
        let recent = s.bookings_recent.draw_count(rng);
        let older = s.bookings_older.draw_count(rng);
        let velocity = velocity_score(&s, rng, recent, 0.0);
        let user = add_user(&mut g, tag, age, velocity, country);

        let n_devices = s.device_count.draw_count(rng) + 1;
        let mut own = Vec::with_capacity(n_devices);
        for _ in 0..n_devices {
            let existing = g.count(NodeType::Device);
            let reused = (existing > 0 && bernoulli(rng, DEVICE_REUSE_P))
                .then(|| rng.random_range(0..existing))
                .filter(|d| !own.contains(d));
            let device = match reused {
                Some(d) => d,
                None => add_device(&mut g, rng, tag, age),
            };
            own.push(device);
            g.add_edge(Relation::UsesDevice, user, device);
        }
        // One address per device plus a home connection.
        let n_ips = n_devices + 1;
        own.clear();
        for _ in 0..n_ips {
            let existing = g.count(NodeType::IpAddress);
            let reused = (existing > 0 && bernoulli(rng, IP_REUSE_P))
                .then(|| rng.random_range(0..existing))
                .filter(|d| !own.contains(d));
            let ip = match reused {
                Some(d) => d,
                None => add_ip(&mut g, rng, tag, country),
            };
            own.push(ip);
            g.add_edge(Relation::UsesIp, user, ip);
        }
        let n_cards = 1 + bernoulli(rng, EXTRA_CARD_P) as usize;
        let cards: Vec<usize> = (0..n_cards)
            .map(|_| {
                let c = add_card(&mut g, rng, tag, country, false);
                g.add_edge(Relation::OwnsCard, user, c);
                c
            })
            .collect();
        if bernoulli(rng, LOYALTY_P) {
            let suspicious = rng.random_range(0.0..0.2);
            let l = add_loyalty(&mut g, rng, tag, age, suspicious);
            g.add_edge(Relation::HasLoyalty, user, l);
        }
        if user > 0 && bernoulli(rng, REFERRAL_P) {
            let referrer = rng.random_range(0..user);
            g.add_edge(Relation::Referred, referrer, user);
        }

        for k in 0..recent + older {
            let day = if k < recent {
                rng.random_range(RECENT_FROM_DAY..WINDOW_DAYS)
            } else {
                rng.random_range(0.0..RECENT_FROM_DAY)
            };
            let hotel = bernoulli(rng, HOTEL_BOOKING_P).then(|| catalog.random_hotel(rng));
            let flight = match hotel {
                Some(_) => None,
                None => Some(catalog.random_flight(rng)),
            };
            let spec = BookingSpec {
                value: s.booking_value.draw(rng),
                lead_time: s.lead_time.draw(rng),
                day,
                chargeback: bernoulli(rng, CHARGEBACK_P),
                cancelled: bernoulli(rng, CANCEL_P),
                geo_mismatch: bernoulli(rng, GEO_MISMATCH_P),
            };
            let card = *cards.choose(rng).expect("at least one card");
            add_booking(&mut g, rng, tag, user, spec, hotel, flight, card);
            if let Some(h) = hotel {
                if !spec.cancelled && bernoulli(rng, REVIEW_P) {
                    let q = catalog.hotel_quality[h];
                    let rating = (q + s.review_noise.sample(rng)).round().clamp(1.0, 5.0);
                    add_review(&mut g, rng, tag, user, h, rating, day);
                }
            }
        }
    }
    Ok(LegitPopulation { graph: g, catalog })
}

/// Fills every column derived from graph structure: user counts and
/// averages, hub `shared_user_count`, hotel review counts and loyalty
/// transfer counts.
pub fn finalize(g: &mut GraphData) {
    let n_users = g.count(NodeType::User);
    let made = g.out_adjacency(Relation::Made);
    let wrote = g.out_adjacency(Relation::Wrote);
    let degree = |g: &GraphData, r: Relation| {
        let mut d = vec![0usize; g.count(r.source())];
        for &(s, _) in g.edges(r) {
            d[s] += 1;
        }
        d
    };
    let devices = degree(g, Relation::UsesDevice);
    let ips = degree(g, Relation::UsesIp);
    let cards = degree(g, Relation::OwnsCard);

    let bookings = g.table(NodeType::Booking).clone();
    let reviews = g.table(NodeType::Review).clone();
    let users = g.table_mut(NodeType::User);
    for u in 0..n_users {
        let mut recent = 0usize;
        let mut value = 0.0;
        let mut cancelled = 0usize;
        for &b in &made[u] {
            if bookings.get(b, "booked_at_day") >= RECENT_FROM_DAY {
                recent += 1;
            }
            value += bookings.get(b, "booking_value_usd");
            cancelled += (bookings.get(b, "is_cancelled") > 0.5) as usize;
        }
        let n = made[u].len();
        let recent_reviews = wrote[u]
            .iter()
            .filter(|&&r| reviews.get(r, "posted_day") >= RECENT_FROM_DAY)
            .count();
        users.set(u, "booking_count_30d", recent as f64);
        users.set(u, "distinct_device_count", devices[u] as f64);
        users.set(u, "ip_count", ips[u] as f64);
        users.set(u, "card_count", cards[u] as f64);
        users.set(u, "review_count_30d", recent_reviews as f64);
        users.set(u, "avg_booking_value", if n > 0 { value / n as f64 } else { 0.0 });
        users.set(
            u,
            "cancellation_rate",
            if n > 0 { cancelled as f64 / n as f64 } else { 0.0 },
        );
    }

    let hub_counts = |g: &GraphData, r: Relation| -> Vec<usize> {
        g.in_adjacency(r).iter().map(|v| v.len()).collect()
    };
    let dev = hub_counts(g, Relation::UsesDevice);
    let t = g.table_mut(NodeType::Device);
    for (i, &c) in dev.iter().enumerate() {
        t.set(i, "shared_user_count", (c as f64).min(DEVICE_SHARED_CAP));
    }
    let ip = hub_counts(g, Relation::UsesIp);
    let t = g.table_mut(NodeType::IpAddress);
    for (i, &c) in ip.iter().enumerate() {
        t.set(i, "shared_user_count", c as f64);
    }
    let card = hub_counts(g, Relation::OwnsCard);
    let t = g.table_mut(NodeType::PaymentCard);
    for (i, &c) in card.iter().enumerate() {
        t.set(i, "shared_user_count", c as f64);
    }
    let about = hub_counts(g, Relation::About);
    let t = g.table_mut(NodeType::Hotel);
    for (i, &c) in about.iter().enumerate() {
        t.set(i, "review_count", c as f64);
    }
    let transfers = degree(g, Relation::TransferredTo);
    let t = g.table_mut(NodeType::LoyaltyAccount);
    for (i, &c) in transfers.iter().enumerate() {
        t.set(i, "transfer_count_30d", c as f64);
    }
}
