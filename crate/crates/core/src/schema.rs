//! Node types, relations, feature columns and categorical code tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeType {
    User,
    Device,
    IpAddress,
    Booking,
    Flight,
    Hotel,
    Review,
    PaymentCard,
    LoyaltyAccount,
}

pub const USER_FEATURES: &[&str] = &[
    "account_age_days",
    "booking_count_30d",
    "distinct_device_count",
    "velocity_score",
    "ip_count",
    "card_count",
    "review_count_30d",
    "avg_booking_value",
    "cancellation_rate",
    "country_code",
];

pub const DEVICE_FEATURES: &[&str] = &[
    "device_type",
    "shared_user_count",
    "is_emulator",
    "first_seen_days_ago",
    "session_count_30d",
];

pub const IP_FEATURES: &[&str] = &[
    "is_vpn",
    "is_datacenter",
    "abuse_score",
    "shared_user_count",
    "geo_country",
];

pub const BOOKING_FEATURES: &[&str] = &[
    "booking_value_usd",
    "lead_time_days",
    "chargeback_flag",
    "is_cancelled",
    "booked_at_day",
    "is_hotel",
    "nights",
    "party_size",
    "geo_mismatch",
];

pub const FLIGHT_FEATURES: &[&str] = &[
    "origin",
    "destination",
    "airline",
    "departure_unix",
    "base_price",
    "duration_hours",
    "seat_capacity",
];

pub const HOTEL_FEATURES: &[&str] = &[
    "hotel_class",
    "avg_rating",
    "is_ghost",
    "listing_age_days",
    "review_count",
    "country_code",
    "nightly_rate_usd",
    "room_count",
    "cancellation_policy",
];

pub const REVIEW_FEATURES: &[&str] = &[
    "rating",
    "verified_booking",
    "days_after_checkin",
    "text_length",
    "helpful_votes",
    "posted_day",
];

pub const CARD_FEATURES: &[&str] = &[
    "card_type",
    "shared_user_count",
    "is_compromised",
    "issuer_country",
    "card_age_days",
    "is_prepaid",
];

pub const LOYALTY_FEATURES: &[&str] = &[
    "point_balance",
    "transfer_count_30d",
    "suspicious_velocity",
    "tier",
    "account_age_days",
    "redemption_count_30d",
    "points_earned_30d",
];

impl NodeType {
    pub const ALL: [NodeType; 9] = [
        NodeType::User,
        NodeType::Device,
        NodeType::IpAddress,
        NodeType::Booking,
        NodeType::Flight,
        NodeType::Hotel,
        NodeType::Review,
        NodeType::PaymentCard,
        NodeType::LoyaltyAccount,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeType::User => "user",
            NodeType::Device => "device",
            NodeType::IpAddress => "ip_address",
            NodeType::Booking => "booking",
            NodeType::Flight => "flight",
            NodeType::Hotel => "hotel",
            NodeType::Review => "review",
            NodeType::PaymentCard => "payment_card",
            NodeType::LoyaltyAccount => "loyalty_account",
        }
    }

    /// Canonical feature columns, in storage order.
    pub fn features(self) -> &'static [&'static str] {
        match self {
            NodeType::User => USER_FEATURES,
            NodeType::Device => DEVICE_FEATURES,
            NodeType::IpAddress => IP_FEATURES,
            NodeType::Booking => BOOKING_FEATURES,
            NodeType::Flight => FLIGHT_FEATURES,
            NodeType::Hotel => HOTEL_FEATURES,
            NodeType::Review => REVIEW_FEATURES,
            NodeType::PaymentCard => CARD_FEATURES,
            NodeType::LoyaltyAccount => LOYALTY_FEATURES,
        }
    }

    pub fn dim(self) -> usize {
        self.features().len()
    }

    /// Types whose label vector is populated by the generator. The others
    /// (device, ip, card, flight) get a derived label from `ring_id` instead.
    pub fn carries_label(self) -> bool {
        matches!(
            self,
            NodeType::User
                | NodeType::Booking
                | NodeType::Hotel
                | NodeType::Review
                | NodeType::LoyaltyAccount
        )
    }

    pub fn feature_index(self, name: &str) -> Option<usize> {
        self.features().iter().position(|f| *f == name)
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NodeType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Data(format!("unknown node type '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Made,
    UsesDevice,
    UsesIp,
    HasLoyalty,
    OwnsCard,
    Wrote,
    ForFlight,
    ForHotel,
    PaidWith,
    About,
    Referred,
    TransferredTo,
}

impl Relation {
    pub const ALL: [Relation; 12] = [
        Relation::Made,
        Relation::UsesDevice,
        Relation::UsesIp,
        Relation::HasLoyalty,
        Relation::OwnsCard,
        Relation::Wrote,
        Relation::ForFlight,
        Relation::ForHotel,
        Relation::PaidWith,
        Relation::About,
        Relation::Referred,
        Relation::TransferredTo,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Made => "made",
            Relation::UsesDevice => "uses_device",
            Relation::UsesIp => "uses_ip",
            Relation::HasLoyalty => "has_loyalty",
            Relation::OwnsCard => "owns_card",
            Relation::Wrote => "wrote",
            Relation::ForFlight => "for_flight",
            Relation::ForHotel => "for_hotel",
            Relation::PaidWith => "paid_with",
            Relation::About => "about",
            Relation::Referred => "referred",
            Relation::TransferredTo => "transferred_to",
        }
    }

    /// (source type, target type).
    pub fn signature(self) -> (NodeType, NodeType) {
        use NodeType::*;
        match self {
            Relation::Made => (User, Booking),
            Relation::UsesDevice => (User, Device),
            Relation::UsesIp => (User, IpAddress),
            Relation::HasLoyalty => (User, LoyaltyAccount),
            Relation::OwnsCard => (User, PaymentCard),
            Relation::Wrote => (User, Review),
            Relation::ForFlight => (Booking, Flight),
            Relation::ForHotel => (Booking, Hotel),
            Relation::PaidWith => (Booking, PaymentCard),
            Relation::About => (Review, Hotel),
            Relation::Referred => (User, User),
            Relation::TransferredTo => (LoyaltyAccount, LoyaltyAccount),
        }
    }

    pub fn source(self) -> NodeType {
        self.signature().0
    }

    pub fn target(self) -> NodeType {
        self.signature().1
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Relation::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown relation '{s}'; expected one of {}",
                    Relation::ALL.map(Relation::as_str).join(", ")
                ))
            })
    }
}

/// Resolves a relation argument, accepting the paired `wrote/about` form.
pub fn parse_relation_group(name: &str) -> Result<Vec<Relation>> {
    if name == "wrote/about" {
        return Ok(vec![Relation::Wrote, Relation::About]);
    }
    Ok(vec![name.parse()?])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingType {
    Ticketing = 1,
    GhostHotel = 2,
    Ato = 3,
}

impl RingType {
    pub const ALL: [RingType; 3] = [RingType::Ticketing, RingType::GhostHotel, RingType::Ato];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<RingType> {
        match code {
            1 => Some(RingType::Ticketing),
            2 => Some(RingType::GhostHotel),
            3 => Some(RingType::Ato),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RingType::Ticketing => "ticketing",
            RingType::GhostHotel => "ghost_hotel",
            RingType::Ato => "ato",
        }
    }
}

impl fmt::Display for RingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RingType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RingType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Data(format!("unknown ring type '{s}'")))
    }
}

/// Market codes, head first; `country_code` features store the index.
pub const COUNTRIES: &[&str] = &[
    "US", "CN", "DE", "UK", "FR", "JP", "IN", "BR", "CA", "AU", "ES", "IT", "MX", "KR", "NL", "SG",
];

pub const AIRPORTS: &[&str] = &[
    "ATL", "PEK", "LAX", "DXB", "HND", "ORD", "LHR", "PVG", "CDG", "DFW", "AMS", "FRA", "IST",
    "CAN", "JFK", "SIN", "ICN", "DEN", "BKK", "MUC",
];

pub const AIRLINES: &[&str] = &["AA", "DL", "UA", "LH", "BA", "AF", "CA", "MU", "EK", "SQ"];

pub const DEVICE_TYPES: &[&str] = &["mobile", "desktop", "tablet"];

pub const CARD_TYPES: &[&str] = &["visa", "mastercard", "amex", "unionpay"];

pub const LOYALTY_TIERS: &[&str] = &["basic", "silver", "gold", "platinum"];

pub const CANCELLATION_POLICIES: &[&str] = &["flexible", "moderate", "strict"];

/// Code tables keyed by `(node type, feature)` for every categorical column.
pub fn code_tables() -> Vec<(NodeType, &'static str, &'static [&'static str])> {
    vec![
        (NodeType::User, "country_code", COUNTRIES),
        (NodeType::Device, "device_type", DEVICE_TYPES),
        (NodeType::IpAddress, "geo_country", COUNTRIES),
        (NodeType::Flight, "origin", AIRPORTS),
        (NodeType::Flight, "destination", AIRPORTS),
        (NodeType::Flight, "airline", AIRLINES),
        (NodeType::Hotel, "country_code", COUNTRIES),
        (NodeType::Hotel, "cancellation_policy", CANCELLATION_POLICIES),
        (NodeType::PaymentCard, "card_type", CARD_TYPES),
        (NodeType::PaymentCard, "issuer_country", COUNTRIES),
        (NodeType::LoyaltyAccount, "tier", LOYALTY_TIERS),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_widths() {
        let dims: Vec<usize> = NodeType::ALL.iter().map(|t| t.dim()).collect();
        assert_eq!(dims, vec![10, 5, 5, 9, 7, 9, 6, 6, 7]);
    }

    #[test]
    fn relation_signatures() {
        use NodeType::*;
        let expected = [
            ("made", User, Booking),
            ("uses_device", User, Device),
            ("uses_ip", User, IpAddress),
            ("has_loyalty", User, LoyaltyAccount),
            ("owns_card", User, PaymentCard),
            ("wrote", User, Review),
            ("for_flight", Booking, Flight),
            ("for_hotel", Booking, Hotel),
            ("paid_with", Booking, PaymentCard),
            ("about", Review, Hotel),
            ("referred", User, User),
            ("transferred_to", LoyaltyAccount, LoyaltyAccount),
        ];
        for (name, src, dst) in expected {
            let rel: Relation = name.parse().unwrap();
            assert_eq!(rel.signature(), (src, dst), "{name}");
        }
    }

    #[test]
    fn names_round_trip() {
        for t in NodeType::ALL {
            assert_eq!(t.as_str().parse::<NodeType>().unwrap(), t);
        }
        for r in Relation::ALL {
            assert_eq!(r.as_str().parse::<Relation>().unwrap(), r);
        }
        for t in RingType::ALL {
            assert_eq!(RingType::from_code(t.code()), Some(t));
        }
        assert!("follows".parse::<Relation>().is_err());
    }

    #[test]
    fn review_pair_expands() {
        assert_eq!(
            parse_relation_group("wrote/about").unwrap(),
            vec![Relation::Wrote, Relation::About]
        );
    }

    #[test]
    fn code_tables_reference_real_columns() {
        for (t, col, table) in code_tables() {
            assert!(t.feature_index(col).is_some(), "{t}.{col}");
            assert!(!table.is_empty());
        }
    }
}
