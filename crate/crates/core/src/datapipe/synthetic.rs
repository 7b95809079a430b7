use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ranker::Speaker;

use super::types::{ChatLog, ChatMessage, Listing, ReplyPair};

/// Generator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_listings: usize,
    pub questions_per_listing: usize,
    /// Share of questions asking about an attribute the listing lacks. The
    /// count is rounded to the nearest whole question, then spread at random.
    pub negative_fraction: f64,
    /// Share of questions sent as a topic cue followed by a vague question,
    /// so only the preceding message says what is being asked.
    pub followup_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { seed: 0, n_listings: 100, questions_per_listing: 4, negative_fraction: 0.37, followup_fraction: 0.0 }
    }
}

/// What the generator intended for one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub listing_id: String,
    /// Position of the chat in [`SyntheticCorpus::chats`].
    pub chat: usize,
    /// `index` of the buyer question message in the chat.
    pub message_index: u32,
    pub attribute: String,
    /// 1-based answer sentence, 0 when the listing lacks the attribute.
    pub answer: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    pub listings: Vec<Listing>,
    pub chats: Vec<ChatLog>,
    pub truths: Vec<GroundTruth>,
}

type R = ChaCha8Rng;

struct Attribute {
    name: &'static str,
    value: fn(&mut R) -> String,
    sentences: &'static [&'static str],
    questions: &'static [&'static str],
    cues: &'static [&'static str],
    replies: &'static [&'static str],
}

const COLORS: &[&str] = &[
    "red", "blue", "black", "white", "grey", "green", "navy", "beige", "brown", "pink", "purple", "maroon", "teal",
    "olive", "cream-white", "off-white", "charcoal", "silver", "gold", "rose-gold", "mint", "lavender", "mustard",
    "khaki", "ivory", "turquoise", "burgundy", "peach", "coral", "lilac", "tan", "jet-black", "sky-blue",
    "forest-green", "orange", "yellow", "cyan", "magenta", "bronze", "copper",
];
const DIMENSIONS: &[&str] = &["tall", "wide", "long", "deep", "high"];
const PRICE_TERMS: &[&str] = &["nett", "only", "negotiable", "firm", "flat"];
const MODES: &[&str] = &["meetup", "self collection", "pickup", "doorstep delivery", "courier delivery"];
const PLACES: &[&str] = &[
    "tampines", "jurong east", "bishan", "woodlands", "punggol", "sengkang", "clementi", "bedok", "yishun",
    "ang mo kio", "toa payoh", "serangoon", "hougang", "pasir ris", "bukit batok", "choa chu kang", "queenstown",
    "kallang", "novena", "orchard", "bugis", "dhoby ghaut", "buona vista", "redhill", "tiong bahru", "outram",
    "paya lebar", "eunos", "khatib", "admiralty",
];
const FINISH_ADJ: &[&str] = &["solid", "genuine", "premium", "sturdy", "durable", "soft"];
const MATERIALS: &[&str] = &[
    "oak", "teak", "walnut", "pine", "bamboo", "rattan", "leather", "suede", "velvet", "linen", "cotton", "wool",
    "canvas", "steel", "aluminium", "brass", "marble", "granite", "glass", "acrylic", "ceramic", "plastic", "nylon",
    "polyester", "denim",
];
const PARTS: &[&str] = &["frame", "build", "body", "finish", "material", "surface"];
const BRANDS: &[&str] = &[
    "aurelia", "brixton", "caldera", "dunmore", "everly", "fairbanks", "galloway", "harlow", "ingram", "juniper",
    "kestrel", "linden", "marlow", "norvell", "oakridge", "pemberton", "quill", "rowan", "sterling", "thornbury",
    "umber", "valeria", "whitmore", "yardley", "zephyr", "ashby", "bellamy", "corwin", "darby", "ellison",
];
const LINES: &[&str] = &["series", "edition", "collection", "model", "range"];
const WARRANTY_KINDS: &[&str] = &["local", "official", "extended", "manufacturer", "store"];
const PRODUCTS: &[&str] = &[
    "cat tower", "sofa", "study desk", "bookshelf", "bicycle", "office chair", "dining table", "wardrobe",
    "bed frame", "coffee table", "tv console", "shoe rack", "stroller", "guitar", "rice cooker", "air fryer",
    "standing fan", "floor lamp", "backpack", "camera bag",
];

fn pick<'a>(rng: &mut R, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn color_value(rng: &mut R) -> String {
    let a = pick(rng, COLORS);
    let mut b = pick(rng, COLORS);
    while b == a {
        b = pick(rng, COLORS);
    }
    let joiner = if rng.gen_bool(0.5) { "or" } else { "and" };
    format!("{a} {joiner} {b}")
}

fn size_value(rng: &mut R) -> String {
    let n = rng.gen_range(20..=250);
    if rng.gen_bool(0.5) {
        format!("{n} cm {}", pick(rng, DIMENSIONS))
    } else {
        format!("{n} by {} cm", rng.gen_range(20..=250))
    }
}

fn price_value(rng: &mut R) -> String {
    format!("{} dollars {}", rng.gen_range(5..=900), pick(rng, PRICE_TERMS))
}

fn delivery_value(rng: &mut R) -> String {
    format!("{} at {}", pick(rng, MODES), pick(rng, PLACES))
}

fn material_value(rng: &mut R) -> String {
    format!("{} {} {}", pick(rng, FINISH_ADJ), pick(rng, MATERIALS), pick(rng, PARTS))
}

fn condition_value(rng: &mut R) -> String {
    match rng.gen_range(0..4) {
        0 => format!("used {} times only", rng.gen_range(2..=20)),
        1 => format!("{} months old", rng.gen_range(2..=36)),
        2 => format!("{} weeks old", rng.gen_range(2..=12)),
        _ => format!("brand new sealed {}", pick(rng, &["box", "pack", "carton", "unit"])),
    }
}

fn brand_value(rng: &mut R) -> String {
    format!("original {} {}", pick(rng, BRANDS), pick(rng, LINES))
}

fn warranty_value(rng: &mut R) -> String {
    if rng.gen_bool(0.5) {
        format!("{} months {} warranty", rng.gen_range(1..=24), pick(rng, WARRANTY_KINDS))
    } else {
        format!("{} year {} warranty", rng.gen_range(1..=5), pick(rng, WARRANTY_KINDS))
    }
}

const ATTRIBUTES: &[Attribute] = &[
    Attribute {
        name: "color",
        value: color_value,
        sentences: &["We sell it in {v}.", "It comes in {v}.", "Available colours are {v}.", "Colour options: {v}."],
        questions: &["What colours are there?", "What colour is it?", "Which colours do you have?", "Any other colors?", "What color options are there?"],
        cues: &["About the colour.", "Question on the colours."],
        replies: &["We have {v}.", "Only {v} left.", "Currently {v}.", "There is {v}."],
    },
    Attribute {
        name: "size",
        value: size_value,
        sentences: &["It measures {v}.", "Dimensions are {v}.", "The size is {v}.", "Roughly {v} in total."],
        questions: &["How big is it?", "What is the size?", "What are the dimensions?", "How tall is it?", "Will it fit a small room?"],
        cues: &["About the size.", "Question on the dimensions."],
        replies: &["It is {v}.", "About {v}.", "Measures {v}."],
    },
    Attribute {
        name: "price",
        value: price_value,
        sentences: &["Selling at {v}.", "Price is {v}.", "Going for {v}.", "Asking {v}."],
        questions: &["How much is it?", "What is the price?", "Is the price negotiable?", "Can you do cheaper?", "How much?"],
        cues: &["About the price.", "Question on the pricing."],
        replies: &["It's {v}.", "Selling for {v}.", "Best I can do is {v}."],
    },
    Attribute {
        name: "delivery",
        value: delivery_value,
        sentences: &["Delivery or {v} available.", "Collection is by {v}.", "Prefer {v}.", "Deal via {v}."],
        questions: &["Can you do delivery?", "Where can we meet?", "Where to collect?", "Do you deliver?", "Where is the meetup?"],
        cues: &["About the delivery.", "Question on the meetup."],
        replies: &["Can do {v}.", "{v} is fine.", "Only {v}."],
    },
    Attribute {
        name: "material",
        value: material_value,
        sentences: &["Made of {v}.", "It has a {v}.", "Crafted with {v}."],
        questions: &["What material is it?", "What is it made of?", "Is it sturdy?", "Is it real wood?"],
        cues: &["About the material.", "Question on the build."],
        replies: &["It's {v}.", "Made from {v}.", "It uses {v}."],
    },
    Attribute {
        name: "condition",
        value: condition_value,
        sentences: &["Condition is {v}.", "Item is {v}.", "Selling as {v}."],
        questions: &["Is it new?", "What is the condition?", "Any defects?", "How old is it?", "Is it used?"],
        cues: &["About the condition.", "Question on the wear."],
        replies: &["It's {v}.", "Yes, {v}.", "Honestly {v}."],
    },
    Attribute {
        name: "brand",
        value: brand_value,
        sentences: &["This is an {v}.", "Brand is {v}.", "Genuine item from the {v}."],
        questions: &["What brand is it?", "Is it original?", "Is it authentic?", "Which brand?"],
        cues: &["About the brand.", "Question on authenticity."],
        replies: &["It's {v}.", "Yes, {v}.", "Definitely {v}."],
    },
    Attribute {
        name: "warranty",
        value: warranty_value,
        sentences: &["Comes with {v}.", "Still has {v}.", "Includes {v}."],
        questions: &["Any warranty?", "Is there warranty?", "Does it come with warranty?", "How long is the warranty?"],
        cues: &["About the warranty.", "Question on coverage."],
        replies: &["Yes, {v}.", "Still {v}.", "There is {v}."],
    },
];

const FOLLOWUPS: &[&str] = &["What are the options?", "Can you share more details?", "Any info on this?", "What about it?"];
const FILLERS: &[&str] = &[
    "This is one of the best {p} we offer.",
    "Your family will love it.",
    "Selling because moving house.",
    "Well kept in a smoke free home.",
    "Great value {p} for students.",
    "Must go soon.",
    "Serious buyers please.",
];
const NEGATIVE_REPLIES: &[&str] =
    &["Sorry, not sure.", "Hmm, let me check and revert.", "No idea, sorry.", "Let me check first.", "Not sure, will revert."];
const GREETINGS: &[&str] = &["Hi, is this still available?", "Hello!", "Hi there."];

fn fill(template: &str, key: &str, value: &str) -> String {
    template.replace(key, value)
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

struct ListingPlan {
    /// (attribute index, 1-based sentence position, key phrase)
    present: Vec<(usize, usize, String)>,
    absent: Vec<usize>,
}

fn make_listing(rng: &mut R, id: &str) -> (Listing, ListingPlan) {
    let product = pick(rng, PRODUCTS);
    let mut order: Vec<usize> = (0..ATTRIBUTES.len()).collect();
    order.shuffle(rng);
    let n_present = rng.gen_range(3..=5);
    let (present_ids, absent) = order.split_at(n_present);

    enum Slot {
        Attr(usize, String),
        Filler(String),
    }
    let mut slots: Vec<Slot> = present_ids
        .iter()
        .map(|&a| Slot::Attr(a, (ATTRIBUTES[a].value)(rng)))
        .collect();
    for _ in 0..rng.gen_range(1..=2) {
        slots.push(Slot::Filler(fill(pick(rng, FILLERS), "{p}", product)));
    }
    slots.shuffle(rng);

    let mut sentences = Vec::with_capacity(slots.len());
    let mut present = Vec::new();
    for slot in slots {
        match slot {
            Slot::Attr(a, value) => {
                let s = capitalize(&fill(pick(rng, ATTRIBUTES[a].sentences), "{v}", &value));
                sentences.push(s);
                present.push((a, sentences.len(), value));
            }
            Slot::Filler(s) => sentences.push(s),
        }
    }
    let mut description = String::new();
    for (i, s) in sentences.iter().enumerate() {
        if i > 0 {
            description.push_str(if rng.gen_bool(0.3) { "\n" } else { " " });
        }
        description.push_str(s);
    }
    let listing = Listing {
        listing_id: id.to_string(),
        title: format!("{} for sale", capitalize(product)),
        description,
    };
    (listing, ListingPlan { present, absent: absent.to_vec() })
}

/// Generate listings, chats about them, and the intended answer for every
/// buyer question. Each question is asked in its own chat, as if by a
/// different buyer. Output is a pure function of the configuration.
pub fn generate_synthetic(config: &SynthConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut corpus = SyntheticCorpus::default();
    let total = config.n_listings * config.questions_per_listing;
    let n_negative = libm::round(config.negative_fraction.clamp(0.0, 1.0) * total as f64) as usize;
    let mut negatives: Vec<bool> = (0..total).map(|i| i < n_negative).collect();
    negatives.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed ^ 0x6e65_6761_7469_7665));
    let mut negatives = negatives.into_iter();
    for n in 0..config.n_listings {
        let id = format!("L{:06}", n);
        let (listing, plan) = make_listing(&mut rng, &id);
        let push = |messages: &mut Vec<ChatMessage>, speaker, text: String| {
            let index = messages.len() as u32;
            messages.push(ChatMessage { speaker, text, index });
        };
        for _ in 0..config.questions_per_listing {
            let mut messages = Vec::new();
            if rng.gen_bool(0.5) {
                push(&mut messages, Speaker::Buyer, pick(&mut rng, GREETINGS).to_string());
            }
            let negative = negatives.next().expect("one flag per question");
            let (attr, answer, value) = if negative {
                (*plan.absent.choose(&mut rng).expect("at least three attributes are absent"), 0, None)
            } else {
                let (a, pos, v) = plan.present.choose(&mut rng).expect("at least three attributes are present");
                (*a, *pos, Some(v.clone()))
            };
            let kind = &ATTRIBUTES[attr];
            let question = if rng.gen_bool(config.followup_fraction.clamp(0.0, 1.0)) {
                push(&mut messages, Speaker::Buyer, pick(&mut rng, kind.cues).to_string());
                pick(&mut rng, FOLLOWUPS).to_string()
            } else {
                pick(&mut rng, kind.questions).to_string()
            };
            let message_index = messages.len() as u32;
            push(&mut messages, Speaker::Buyer, question);
            let reply = match value {
                Some(v) => capitalize(&fill(pick(&mut rng, kind.replies), "{v}", &v)),
                None => pick(&mut rng, NEGATIVE_REPLIES).to_string(),
            };
            push(&mut messages, Speaker::Seller, reply);
            corpus.truths.push(GroundTruth {
                listing_id: id.clone(),
                chat: corpus.chats.len(),
                message_index,
                attribute: kind.name.to_string(),
                answer,
            });
            corpus.chats.push(ChatLog { listing_id: id.clone(), messages });
        }
        corpus.listings.push(listing);
    }
    corpus
}

/// Seller replies paired with the buyer messages just before them.
///
/// Up to the last two consecutive buyer messages are joined into the context.
pub fn extract_reply_pairs(chats: &[ChatLog]) -> Vec<ReplyPair> {
    let mut pairs = Vec::new();
    for chat in chats {
        let msgs = &chat.messages;
        for i in 1..msgs.len() {
            if msgs[i].speaker != Speaker::Seller || msgs[i - 1].speaker != Speaker::Buyer {
                continue;
            }
            let mut start = i - 1;
            while start > 0 && i - start < 2 && msgs[start - 1].speaker == Speaker::Buyer {
                start -= 1;
            }
            let context = msgs[start..i].iter().map(|m| m.text.as_str()).collect::<Vec<_>>().join(" ");
            pairs.push(ReplyPair { context, reply: msgs[i].text.clone() });
        }
    }
    pairs
}
