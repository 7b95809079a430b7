use listingqa::checkpoint::{self, MAGIC, VERSION};
use listingqa::configfile::{format_settings, parse_settings, Settings};
use listingqa::jsonl::{parse_dataset, read_dataset, write_dataset};
use listingqa::vocabfile::{format_vocab, parse_vocab};
use listingqa::Error;
use listingqa_core::datapipe::{generate_synthetic, mine_all, MiningConfig, QAExample, SynthConfig};
use listingqa_core::nncore::ParamSet;
use listingqa_core::ranker::{Message, Model, ModelConfig};
use listingqa_core::textproc::build_vocab;
use proptest::prelude::*;

fn examples(n_listings: usize) -> Vec<QAExample> {
    let c = generate_synthetic(&SynthConfig { seed: 21, n_listings, followup_fraction: 0.3, ..SynthConfig::default() });
    mine_all(&c.chats, &c.listings, &MiningConfig::default()).0
}

#[test]
fn dataset_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    let mut data = examples(20);
    data[0].context.push(Message::seller("tab\tand \"quotes\" and ünïcode"));
    write_dataset(&path, &data).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), data);
}

#[test]
fn dataset_record_uses_documented_fields() {
    let line = r#"{"context":[{"speaker":"buyer","text":"hi"}],"question":"colour?","candidates":["Red.","Blue."],"label":2,"listing_id":"x"}"#;
    let parsed = parse_dataset(line.as_bytes(), "inline").into_result().unwrap();
    assert_eq!(parsed[0].label, 2);
    assert_eq!(parsed[0].context, vec![Message::buyer("hi")]);
}

#[test]
fn label_past_candidates_is_a_validation_error_naming_the_line() {
    let good = r#"{"context":[],"question":"q","candidates":["a","b"],"label":2,"listing_id":"x"}"#;
    let bad = r#"{"context":[],"question":"q","candidates":["a","b"],"label":3,"listing_id":"x"}"#;
    let text = format!("{good}\n{good}\n{bad}\n{good}\n");
    let partial = parse_dataset(text.as_bytes(), "set.jsonl");
    assert_eq!(partial.records.len(), 2);
    match partial.error {
        Some(Error::Validation { line, ref source_name, .. }) => {
            assert_eq!(line, 3);
            assert_eq!(source_name, "set.jsonl");
        }
        other => panic!("expected validation error, got {other:?}"),
    }
    assert!(partial.error.unwrap().to_string().starts_with("set.jsonl:3:"));
}

#[test]
fn truncated_final_line_keeps_prior_records() {
    let data = examples(5);
    let mut buf = Vec::new();
    listingqa::jsonl::write_records_to(&mut buf, &data).unwrap();
    let cut = buf.len() - 15;
    let partial = parse_dataset(&buf[..cut], "cut.jsonl");
    assert_eq!(partial.records, data[..data.len() - 1]);
    match partial.error {
        Some(Error::Parse { line, .. }) => assert_eq!(line, data.len()),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn malformed_line_reports_its_number() {
    let text = "\n{\"context\":[],\"question\":\"q\",\"candidates\":[],\"label\":0,\"listing_id\":\"x\"}\nnot json\n";
    match parse_dataset(text.as_bytes(), "m").error {
        Some(Error::Parse { line: 3, .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn vocab_file_round_trip() {
    let texts = ["We sell it in cream-white or black.", "· odd · tokens ·· here", "price 45 dollars nett!"];
    let vocab = build_vocab(texts, 100, 100).unwrap();
    let text = format_vocab(&vocab);
    let first = text.lines().next().unwrap();
    assert_eq!(first.split('\t').count(), 3);
    assert!(text.contains("cream\u{b7}-\t"));
    let back = parse_vocab(&text, "v", Some((100, 100))).unwrap();
    assert_eq!(back, vocab);
}

#[test]
fn vocab_file_rejects_out_of_order_ids() {
    assert!(matches!(parse_vocab("a\t0\t3\nb\t2\t1\n", "v", None), Err(Error::Parse { line: 2, .. })));
    assert!(matches!(parse_vocab("a\u{b7}b\t0\t3\nc\t1\t1\n", "v", None), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn settings_file_overrides_defaults() {
    let text = "# small model\nembed_dim = 32\nuse_attention=true\n\nlr = 0.01\nbatch_size = 16\n";
    let s = parse_settings(text, "cfg").unwrap();
    assert_eq!(s.model.embed_dim, 32);
    assert!(s.model.use_attention);
    assert_eq!(s.train.lr, 0.01);
    assert_eq!(s.train.batch_size, 16);
    assert_eq!(s.model.ff_size, ModelConfig::default().ff_size);
    assert_eq!(parse_settings(&format_settings(&s), "again").unwrap(), s);
    assert_eq!(parse_settings("", "empty").unwrap(), Settings::default());
}

#[test]
fn settings_file_errors_name_the_line() {
    assert!(matches!(parse_settings("embed_dim = 3\nbogus = 1\n", "c"), Err(Error::Parse { line: 2, .. })));
    assert!(matches!(parse_settings("embed_dim = -3\n", "c"), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(parse_settings("use_attention\n", "c"), Err(Error::Parse { line: 1, .. })));
    assert!(parse_settings("embed_dim = 0\n", "c").is_err());
}

fn tiny_model(lstm: bool, attention: bool, context: bool, seed: u64) -> (Model, Vec<QAExample>) {
    let data = examples(10);
    let config = ModelConfig {
        embed_dim: 6,
        ff_size: 5,
        lstm_hidden: 4,
        use_answer_lstm: lstm,
        use_attention: attention,
        use_conv_context: context,
        ..ModelConfig::default()
    };
    let texts = data.iter().flat_map(|e| e.candidates.iter().chain([&e.question]).cloned()).collect::<Vec<_>>();
    let vocab = build_vocab(&texts, 1000, 1000).unwrap();
    let mut model = Model::new(config, vocab, seed).unwrap();
    // move biases off zero so every tensor carries information
    for p in model.params.params_mut() {
        for (i, v) in p.data.iter_mut().enumerate() {
            *v += 1e-3 * ((i % 7) as f64 - 3.0);
        }
    }
    (model, data)
}

#[test]
fn checkpoint_round_trip_is_bit_exact_for_every_variant() {
    for bits in 0..8u8 {
        let (model, data) = tiny_model(bits & 1 != 0, bits & 2 != 0, bits & 4 != 0, bits as u64);
        let bytes = checkpoint::encode(&model).unwrap();
        assert_eq!(&bytes[..4], MAGIC);
        let loaded = checkpoint::decode(&bytes).unwrap();
        assert_eq!(loaded, model);
        assert_eq!(checkpoint::encode(&loaded).unwrap(), bytes);
        for ex in data.iter().take(10) {
            let input = ex.to_input(&model.config);
            let a = model.score(&input).unwrap();
            let b = loaded.score(&input).unwrap();
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.probs), bits(&b.probs));
            assert_eq!(bits(&a.scores), bits(&b.scores));
        }
    }
}

#[test]
fn checkpoint_file_round_trip() {
    let (model, _) = tiny_model(true, false, true, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mqar");
    checkpoint::save(&path, &model).unwrap();
    assert_eq!(checkpoint::load(&path).unwrap(), model);
    assert!(matches!(checkpoint::load(&dir.path().join("missing")), Err(Error::Io { .. })));
}

#[test]
fn corrupted_checkpoints_are_rejected_with_specific_errors() {
    let (model, _) = tiny_model(false, true, false, 4);
    let bytes = checkpoint::encode(&model).unwrap();

    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(checkpoint::decode(&bad_magic), Err(Error::Format(_))));

    let mut bumped = bytes.clone();
    bumped[4..8].copy_from_slice(&(VERSION + 1).to_le_bytes());
    match checkpoint::decode(&bumped) {
        Err(Error::UnsupportedVersion { found, supported }) => assert_eq!((found, supported), (VERSION + 1, VERSION)),
        other => panic!("{other:?}"),
    }

    for cut in [3, 10, bytes.len() / 2, bytes.len() - 1] {
        assert!(matches!(checkpoint::decode(&bytes[..cut]), Err(Error::Format(_))), "cut at {cut}");
    }
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(matches!(checkpoint::decode(&trailing), Err(Error::Format(_))));
}

#[test]
fn checkpoint_with_shapes_not_matching_its_config_is_a_validation_error() {
    let (model, _) = tiny_model(false, false, false, 5);
    let bytes = checkpoint::encode(&model).unwrap();
    // rewrite the header so the config claims a wider embedding
    let json_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let header = std::str::from_utf8(&bytes[12..12 + json_len]).unwrap();
    let edited = header.replacen("\"embed_dim\":6", "\"embed_dim\":7", 1);
    assert_ne!(edited, header);
    let mut out = bytes[..8].to_vec();
    out.extend_from_slice(&(edited.len() as u32).to_le_bytes());
    out.extend_from_slice(edited.as_bytes());
    out.extend_from_slice(&bytes[12 + json_len..]);
    assert!(matches!(checkpoint::decode(&out), Err(Error::Shape(_))));

    // and a config switching on an encoder the file has no tensors for
    let edited = header.replacen("\"use_attention\":false", "\"use_attention\":true", 1);
    let mut out = bytes[..8].to_vec();
    out.extend_from_slice(&(edited.len() as u32).to_le_bytes());
    out.extend_from_slice(edited.as_bytes());
    out.extend_from_slice(&bytes[12 + json_len..]);
    assert!(matches!(checkpoint::decode(&out), Err(Error::Shape(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn byte_flips_never_yield_an_inconsistent_model(pos in 0usize..4096, byte in any::<u8>()) {
        let (model, _) = tiny_model(false, false, false, 6);
        let mut bytes = checkpoint::encode(&model).unwrap();
        let pos = pos % bytes.len();
        bytes[pos] = byte;
        // decoding never panics, and whatever decodes is a consistent model
        if let Ok(m) = checkpoint::decode(&bytes) {
            let canonical = checkpoint::encode(&m).unwrap();
            prop_assert_eq!(checkpoint::encode(&checkpoint::decode(&canonical).unwrap()).unwrap(), canonical);
        }
    }
}
