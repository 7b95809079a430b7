#![allow(dead_code)]

use std::sync::OnceLock;

use listingqa_core::datapipe::{generate_synthetic, mine_all, Listing, MiningConfig, QAExample, SynthConfig};
use listingqa_core::ranker::{Model, ModelConfig};
use listingqa_core::trainer::{build_training_vocab, finetune, TrainConfig};

pub struct Fixture {
    pub model: Model,
    pub listings: Vec<Listing>,
    pub test: Vec<QAExample>,
}

pub fn small_config() -> ModelConfig {
    ModelConfig { embed_dim: 24, ff_size: 48, lstm_hidden: 16, ..ModelConfig::default() }
}

pub fn synthetic(seed: u64, n_listings: usize, followup: f64) -> (Vec<QAExample>, Vec<Listing>) {
    let c = generate_synthetic(&SynthConfig {
        seed,
        n_listings,
        questions_per_listing: 4,
        followup_fraction: followup,
        ..SynthConfig::default()
    });
    let (examples, skipped) = mine_all(&c.chats, &c.listings, &MiningConfig::default());
    assert_eq!(skipped, 0);
    (examples, c.listings)
}

/// A baseline model trained on synthetic data, shared by all tests in a binary.
pub fn trained() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let (train, _) = synthetic(900, 400, 0.2);
        let (test, listings) = synthetic(901, 40, 0.2);
        let config = small_config();
        let vocab = build_training_vocab(&train, &[], &config).unwrap();
        let model = Model::new(config, vocab, 1).unwrap();
        let tc = TrainConfig { epochs: 6, patience: 6, ..TrainConfig::default() };
        let out = finetune(&train, &[], model, &tc).unwrap();
        Fixture { model: out.model, listings, test }
    })
}

pub const CAT_TOWER: &str = "This is one of the best cat towers we offer and your cats will love it.\n\
    At 185cm tall, it's a great vertical gym.\n\
    8 scratch posts ensure healthy nails.\n\
    You've a choice of two colours.\n\
    We sell it in cream-white or black.";
