//! SemanticKITTI raw semantic label ids.

pub const UNLABELED: u16 = 0;
pub const OUTLIER: u16 = 1;
pub const CAR: u16 = 10;
pub const BICYCLE: u16 = 11;
pub const BUS: u16 = 13;
pub const MOTORCYCLE: u16 = 15;
pub const ON_RAILS: u16 = 16;
pub const TRUCK: u16 = 18;
pub const OTHER_VEHICLE: u16 = 20;
pub const PERSON: u16 = 30;
pub const BICYCLIST: u16 = 31;
pub const MOTORCYCLIST: u16 = 32;
pub const ROAD: u16 = 40;
pub const PARKING: u16 = 44;
pub const SIDEWALK: u16 = 48;
pub const OTHER_GROUND: u16 = 49;
pub const BUILDING: u16 = 50;
pub const FENCE: u16 = 51;
pub const OTHER_STRUCTURE: u16 = 52;
pub const LANE_MARKING: u16 = 60;
pub const VEGETATION: u16 = 70;
pub const TRUNK: u16 = 71;
pub const TERRAIN: u16 = 72;
pub const POLE: u16 = 80;
pub const TRAFFIC_SIGN: u16 = 81;
pub const OTHER_OBJECT: u16 = 99;

pub const GROUND_CLASSES: [u16; 6] = [ROAD, PARKING, SIDEWALK, OTHER_GROUND, TERRAIN, LANE_MARKING];

/// Countable object classes (carrying instance ids), including the moving variants 252–259.
pub fn is_thing(class: u16) -> bool {
    matches!(
        class,
        CAR | BICYCLE | BUS | MOTORCYCLE | ON_RAILS | TRUCK | OTHER_VEHICLE | PERSON | BICYCLIST | MOTORCYCLIST
    ) || (252..=259).contains(&class)
}

pub fn is_ground(class: u16) -> bool {
    GROUND_CLASSES.contains(&class)
}

pub fn default_injection_classes() -> Vec<u16> {
    vec![BICYCLE, MOTORCYCLE, TRUCK, OTHER_VEHICLE, PERSON, BICYCLIST, MOTORCYCLIST]
}

pub fn name(class: u16) -> &'static str {
    match class {
        UNLABELED => "unlabeled",
        OUTLIER => "outlier",
        CAR => "car",
        BICYCLE => "bicycle",
        BUS => "bus",
        MOTORCYCLE => "motorcycle",
        ON_RAILS => "on-rails",
        TRUCK => "truck",
        OTHER_VEHICLE => "other-vehicle",
        PERSON => "person",
        BICYCLIST => "bicyclist",
        MOTORCYCLIST => "motorcyclist",
        ROAD => "road",
        PARKING => "parking",
        SIDEWALK => "sidewalk",
        OTHER_GROUND => "other-ground",
        BUILDING => "building",
        FENCE => "fence",
        OTHER_STRUCTURE => "other-structure",
        LANE_MARKING => "lane-marking",
        VEGETATION => "vegetation",
        TRUNK => "trunk",
        TERRAIN => "terrain",
        POLE => "pole",
        TRAFFIC_SIGN => "traffic-sign",
        OTHER_OBJECT => "other-object",
        252 => "moving-car",
        253 => "moving-bicyclist",
        254 => "moving-person",
        255 => "moving-motorcyclist",
        256 => "moving-on-rails",
        257 => "moving-bus",
        258 => "moving-truck",
        259 => "moving-other-vehicle",
        _ => "unknown",
    }
}

/// RGB display color, following the dataset's usual palette.
pub fn color(class: u16) -> [u8; 3] {
    match class {
        CAR | 252 => [100, 150, 245],
        BICYCLE => [100, 230, 245],
        BUS | 257 => [100, 80, 250],
        MOTORCYCLE => [30, 60, 150],
        ON_RAILS | 256 => [0, 0, 255],
        TRUCK | 258 => [80, 30, 180],
        OTHER_VEHICLE | 259 => [0, 0, 255],
        PERSON | 254 => [255, 30, 30],
        BICYCLIST | 253 => [255, 40, 200],
        MOTORCYCLIST | 255 => [150, 30, 90],
        ROAD => [255, 0, 255],
        PARKING => [255, 150, 255],
        SIDEWALK => [75, 0, 75],
        OTHER_GROUND => [175, 0, 75],
        BUILDING => [255, 200, 0],
        FENCE => [255, 120, 50],
        VEGETATION => [0, 175, 0],
        TRUNK => [135, 60, 0],
        TERRAIN => [150, 240, 80],
        POLE => [255, 240, 150],
        TRAFFIC_SIGN => [255, 0, 0],
        LANE_MARKING => [150, 255, 170],
        _ => [128, 128, 128],
    }
}
