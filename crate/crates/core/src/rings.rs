//! The three fraud ring topologies and their ground-truth records.
//!
//! Fraud features are drawn from shifted copies of the legit distributions.
//! Every shift is multiplied by a back-off factor `s` so the generator can
//! shrink them if the feature-overlap gate fails.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::config::{GeneratorConfig, RingSizes, SizeRange};
use crate::error::{Error, Result};
use crate::graph::GraphData;
use crate::legit::{
    add_booking, add_card, add_device, add_hotel, add_ip, add_loyalty, add_review, add_user,
    bernoulli, velocity_score, BookingSpec, Catalog, Samplers, Tag, EXTRA_CARD_P,
    RECENT_FROM_DAY, WINDOW_DAYS,
};
use crate::rng::{make_rng, Stream};
use crate::sampling::DistributionSpec;
use crate::schema::{Relation, RingType};

/// Ground truth for one injected ring. All ids are per-type node ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RingRecord {
    pub ring_id: i64,
    pub ring_type: RingType,
    pub members: Vec<usize>,
    pub devices: Vec<usize>,
    pub ips: Vec<usize>,
    pub cards: Vec<usize>,
    pub bookings: Vec<usize>,
    pub reviews: Vec<usize>,
    pub ghost_hotels: Vec<usize>,
    pub loyalty: Vec<usize>,
    pub mules: Vec<usize>,
}

impl RingRecord {
    fn new(ring_id: i64, ring_type: RingType) -> Self {
        RingRecord {
            ring_id,
            ring_type,
            members: Vec::new(),
            devices: Vec::new(),
            ips: Vec::new(),
            cards: Vec::new(),
            bookings: Vec::new(),
            reviews: Vec::new(),
            ghost_hotels: Vec::new(),
            loyalty: Vec::new(),
            mules: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    fn tag(&self) -> Tag {
        Tag {
            ring_id: self.ring_id,
            ring_type: self.ring_type.code(),
        }
    }
}

/// Sizes chosen for one ring before injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingShape {
    Ticketing { k: usize, devices: usize },
    GhostHotel { reviewers: usize, hotels: usize },
    Ato { compromised: usize, mules: usize },
}

impl RingShape {
    pub fn ring_type(&self) -> RingType {
        match self {
            RingShape::Ticketing { .. } => RingType::Ticketing,
            RingShape::GhostHotel { .. } => RingType::GhostHotel,
            RingShape::Ato { .. } => RingType::Ato,
        }
    }

    pub fn users(&self) -> usize {
        match *self {
            RingShape::Ticketing { k, .. } => k,
            RingShape::GhostHotel { reviewers, .. } => reviewers,
            RingShape::Ato { compromised, .. } => compromised,
        }
    }
}

/// A ring's shape and the stream that drew it; injection continues on
/// the same stream.
#[derive(Debug, Clone)]
pub struct RingPlan {
    pub ring_id: i64,
    pub shape: RingShape,
    pub rng: Stream,
}

pub const TICKETING_MAX_DEVICES: usize = 4;

fn cycled(r: SizeRange, offset: usize, index: usize) -> usize {
    r.min + (offset + index) % (r.max - r.min + 1)
}

fn draw(rng: &mut Stream, r: SizeRange) -> usize {
    rng.random_range(r.min..=r.max)
}

/// Draws every ring's shape. Ring ids run ticketing, ghost hotel, ATO;
/// each ring has its own stream `ring/<type>/<index>`.
pub fn plan_rings(config: &GeneratorConfig) -> Vec<RingPlan> {
    let sizes: &RingSizes = &config.ring_sizes;
    let mut plans = Vec::new();
    // Ticketing device counts and ghost hotel counts cycle through their
    // range from a random start so every value is equally represented.
    let device_offset = make_rng(config.seed, "ring/ticketing/devices").random_range(0..TICKETING_MAX_DEVICES);
    let hotel_offset = make_rng(config.seed, "ring/ghost_hotel/hotels").random_range(0..sizes.ghost_hotels.max);
    for (ring_type, count) in RingType::ALL.into_iter().zip(config.ring_counts()) {
        for index in 0..count {
            let mut rng = make_rng(config.seed, &format!("ring/{ring_type}/{index}"));
            let shape = match ring_type {
                RingType::Ticketing => RingShape::Ticketing {
                    k: draw(&mut rng, sizes.ticketing),
                    devices: cycled(SizeRange { min: 1, max: TICKETING_MAX_DEVICES }, device_offset, index),
                },
                RingType::GhostHotel => RingShape::GhostHotel {
                    reviewers: draw(&mut rng, sizes.ghost_reviewers),
                    hotels: cycled(sizes.ghost_hotels, hotel_offset, index),
                },
                RingType::Ato => RingShape::Ato {
                    compromised: draw(&mut rng, sizes.ato_compromised),
                    mules: draw(&mut rng, sizes.ato_mules),
                },
            };
            plans.push(RingPlan {
                ring_id: plans.len() as i64,
                shape,
                rng,
            });
        }
    }
    plans
}

/// Shared inputs for the injectors.
pub struct Injector<'a> {
    pub catalog: &'a Catalog,
    pub samplers: &'a Samplers,
    /// Back-off factor applied to every fraud feature shift.
    pub shift: f64,
}

impl Injector<'_> {
    fn account_age(&self, rng: &mut Stream, shrink: f64) -> f64 {
        Gamma::new(2.0, 180.0 * (1.0 - shrink * self.shift))
            .expect("positive scale")
            .sample(rng)
    }

    fn cards(&self, g: &mut GraphData, rng: &mut Stream, rec: &mut RingRecord, user: usize, country: f64, compromised: bool) -> Vec<usize> {
        let n = 1 + bernoulli(rng, EXTRA_CARD_P) as usize;
        (0..n)
            .map(|_| {
                let c = add_card(g, rng, rec.tag(), country, compromised);
                g.add_edge(Relation::OwnsCard, user, c);
                rec.cards.push(c);
                c
            })
            .collect()
    }

    pub fn inject(&self, g: &mut GraphData, plan: &mut RingPlan) -> Result<RingRecord> {
        let id = plan.ring_id;
        match plan.shape {
            RingShape::Ticketing { k, devices } => self.inject_ticketing(g, &mut plan.rng, id, k, devices),
            RingShape::GhostHotel { reviewers, hotels } => {
                self.inject_ghost_hotel(g, &mut plan.rng, id, reviewers, hotels)
            }
            RingShape::Ato { compromised, mules } => {
                self.inject_ato(g, &mut plan.rng, id, compromised, mules)
            }
        }
    }

    /// Star hubs: every member uses every ring device and IP and files
    /// chargebacks on short-lead flight bookings.
    pub fn inject_ticketing(
        &self,
        g: &mut GraphData,
        rng: &mut Stream,
        ring_id: i64,
        k: usize,
        n_devices: usize,
    ) -> Result<RingRecord> {
        if k == 0 || n_devices == 0 {
            return Err(Error::Config("ticketing ring needs at least one member and one device".into()));
        }
        let mut rec = RingRecord::new(ring_id, RingType::Ticketing);
        let tag = rec.tag();
        let s = self.shift;
        // Hubs are provisioned per device, so IPs track devices more
        // tightly than the legit devices-plus-extra pattern.
        let n_ips = (n_devices + self.samplers.extra_ips.sample(rng) as usize).saturating_sub(1).max(1);
        let chargeback_p = rng.random_range(0.55..0.95);
        let value = DistributionSpec::LogNormal {
            mu: 6.1 + 0.15 * s,
            sigma: 0.7,
        }
        .sampler()?;
        let hub_country = self.samplers.country.draw(rng);
        for _ in 0..n_devices {
            rec.devices.push(add_device(g, rng, tag, 30.0));
        }
        for _ in 0..n_ips {
            rec.ips.push(add_ip(g, rng, tag, hub_country));
        }
        for _ in 0..k {
            let age = self.account_age(rng, 0.055);
            let country = self.samplers.country.draw(rng);
            let n_bookings = rng.random_range(1..=4);
            let velocity = velocity_score(self.samplers, rng, n_bookings, 0.012 * s);
            let user = add_user(g, tag, age, velocity, country);
            rec.members.push(user);
            for &d in &rec.devices {
                g.add_edge(Relation::UsesDevice, user, d);
            }
            for &ip in &rec.ips {
                g.add_edge(Relation::UsesIp, user, ip);
            }
            let cards = self.cards(g, rng, &mut rec, user, country, true);
            for _ in 0..n_bookings {
                let spec = BookingSpec {
                    value: value.draw(rng),
                    lead_time: rng.random_range(0.0..7.0),
                    day: rng.random_range(RECENT_FROM_DAY..WINDOW_DAYS),
                    chargeback: bernoulli(rng, chargeback_p),
                    cancelled: bernoulli(rng, 0.15),
                    geo_mismatch: bernoulli(rng, 0.1),
                };
                let flight = self.catalog.random_flight(rng);
                let card = cards[rng.random_range(0..cards.len())];
                rec.bookings
                    .push(add_booking(g, rng, tag, user, spec, None, Some(flight), card));
            }
        }
        Ok(rec)
    }

    /// Complete bipartite review block: every reviewer books and rates 5
    /// every ghost hotel, from a small shared device pool.
    pub fn inject_ghost_hotel(
        &self,
        g: &mut GraphData,
        rng: &mut Stream,
        ring_id: i64,
        n_reviewers: usize,
        n_hotels: usize,
    ) -> Result<RingRecord> {
        if n_reviewers == 0 || n_hotels == 0 {
            return Err(Error::Config("ghost hotel ring needs reviewers and hotels".into()));
        }
        let mut rec = RingRecord::new(ring_id, RingType::GhostHotel);
        let tag = rec.tag();
        let s = self.shift;
        for _ in 0..n_hotels {
            let rating = rng.random_range(4.6..=5.0);
            let listing_age = rng.random_range(1..=60) as f64;
            let country = self.samplers.country.draw(rng);
            rec.ghost_hotels
                .push(add_hotel(g, rng, tag, country, rating, listing_age));
        }
        let pool = (n_reviewers / 8).clamp(1, 3);
        for _ in 0..pool {
            rec.devices.push(add_device(g, rng, tag, 30.0));
        }
        for i in 0..n_reviewers {
            let age = self.account_age(rng, 0.28);
            let country = self.samplers.country.draw(rng);
            let velocity = velocity_score(self.samplers, rng, n_hotels, 0.035 * s);
            let user = add_user(g, tag, age, velocity, country);
            rec.members.push(user);
            g.add_edge(Relation::UsesDevice, user, rec.devices[i % pool]);
            let n_ips = 2 + bernoulli(rng, 0.5) as usize;
            for _ in 0..n_ips {
                let ip = add_ip(g, rng, tag, country);
                g.add_edge(Relation::UsesIp, user, ip);
                rec.ips.push(ip);
            }
            let cards = self.cards(g, rng, &mut rec, user, country, false);
            for h in 0..n_hotels {
                let hotel = rec.ghost_hotels[h];
                let day = rng.random_range(RECENT_FROM_DAY..WINDOW_DAYS);
                let spec = BookingSpec {
                    value: self.samplers.booking_value.draw(rng),
                    lead_time: self.samplers.lead_time.draw(rng),
                    day,
                    chargeback: bernoulli(rng, 0.03),
                    cancelled: bernoulli(rng, 0.12),
                    geo_mismatch: bernoulli(rng, 0.03),
                };
                let card = cards[rng.random_range(0..cards.len())];
                rec.bookings
                    .push(add_booking(g, rng, tag, user, spec, Some(hotel), None, card));
                rec.reviews
                    .push(add_review(g, rng, tag, user, hotel, 5.0, day));
            }
        }
        Ok(rec)
    }

    /// Compromised accounts reached from a shared attacker IP pool, each
    /// draining points into the head of a linear mule chain.
    pub fn inject_ato(
        &self,
        g: &mut GraphData,
        rng: &mut Stream,
        ring_id: i64,
        n_compromised: usize,
        n_mules: usize,
    ) -> Result<RingRecord> {
        if n_compromised == 0 || n_mules == 0 {
            return Err(Error::Config("ATO ring needs compromised accounts and mules".into()));
        }
        let mut rec = RingRecord::new(ring_id, RingType::Ato);
        let tag = rec.tag();
        let s = self.shift;
        let chargeback_p = rng.random_range(0.2..0.42);
        let attacker_country = self.samplers.country.draw(rng);
        let pool = (n_compromised / 6).clamp(1, 3);
        let attacker_ips: Vec<usize> = (0..pool)
            .map(|_| add_ip(g, rng, tag, attacker_country))
            .collect();
        rec.ips.extend(&attacker_ips);
        for _ in 0..n_mules {
            let suspicious = rng.random_range(0.5..1.0);
            let mule = add_loyalty(g, rng, tag, 30.0, suspicious);
            rec.mules.push(mule);
        }
        for w in rec.mules.windows(2) {
            g.add_edge(Relation::TransferredTo, w[0], w[1]);
        }
        for i in 0..n_compromised {
            let age = self.account_age(rng, 0.05);
            let country = self.samplers.country.draw(rng);
            let n_bookings = rng.random_range(1..=3);
            let velocity = velocity_score(self.samplers, rng, n_bookings, 0.03 * s);
            let user = add_user(g, tag, age, velocity, country);
            rec.members.push(user);
            let n_devices = self.samplers.device_count.draw_count(rng) + 1;
            for _ in 0..n_devices {
                let d = add_device(g, rng, tag, age);
                g.add_edge(Relation::UsesDevice, user, d);
                rec.devices.push(d);
            }
            // The attacker address takes the place of the owner's home one.
            let n_own_ips = n_devices;
            for _ in 0..n_own_ips {
                let ip = add_ip(g, rng, tag, country);
                g.add_edge(Relation::UsesIp, user, ip);
                rec.ips.push(ip);
            }
            g.add_edge(Relation::UsesIp, user, attacker_ips[i % pool]);
            let cards = self.cards(g, rng, &mut rec, user, country, true);
            let suspicious = rng.random_range(0.5..1.0);
            let account = add_loyalty(g, rng, tag, age, suspicious);
            g.add_edge(Relation::HasLoyalty, user, account);
            g.add_edge(Relation::TransferredTo, account, rec.mules[0]);
            rec.loyalty.push(account);
            for _ in 0..n_bookings {
                let (hotel, flight) = if bernoulli(rng, 0.7) {
                    (Some(self.catalog.random_hotel(rng)), None)
                } else {
                    (None, Some(self.catalog.random_flight(rng)))
                };
                let spec = BookingSpec {
                    value: self.samplers.booking_value.draw(rng),
                    lead_time: rng.random_range(0.0..3.0),
                    day: rng.random_range(RECENT_FROM_DAY..WINDOW_DAYS),
                    chargeback: bernoulli(rng, chargeback_p),
                    cancelled: bernoulli(rng, 0.2),
                    geo_mismatch: bernoulli(rng, 0.85),
                };
                let card = cards[rng.random_range(0..cards.len())];
                rec.bookings
                    .push(add_booking(g, rng, tag, user, spec, hotel, flight, card));
            }
        }
        Ok(rec)
    }
}

/// Transfer edges inside an ATO ring under the fan-in plus chain pattern.
pub fn ato_transfer_edges(n_compromised: usize, n_mules: usize) -> usize {
    n_compromised + n_mules.saturating_sub(1)
}
