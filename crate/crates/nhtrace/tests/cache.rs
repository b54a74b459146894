use std::fs;

use nhtrace::cache::{decode, encode, CacheKey, Decoded, SystemCache, FORMAT_VERSION};
use nhtrace::Error;
use nhtrace_core::ModelId;
use proptest::prelude::*;

fn key() -> CacheKey {
    CacheKey::new(ModelId::TwistedH, Some(2.0), 12, None)
}

#[test]
fn put_then_get_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = SystemCache::new(dir.path());
    let built = key().build().unwrap();
    let path = cache.put(&key(), &built).unwrap();
    assert!(path.exists());
    let loaded = cache.get(&key()).unwrap().expect("hit");
    assert_eq!(encode(&loaded, FORMAT_VERSION), encode(&built, FORMAT_VERSION));
    assert_eq!(loaded, built);
}

#[test]
fn missing_file_is_a_miss() {
    let dir = tempfile::tempdir().unwrap();
    assert!(SystemCache::new(dir.path()).get(&key()).unwrap().is_none());
}

#[test]
fn other_format_version_is_a_miss() {
    let dir = tempfile::tempdir().unwrap();
    let old = SystemCache::with_version(dir.path(), FORMAT_VERSION);
    let built = key().build().unwrap();
    let path = old.put(&key(), &built).unwrap();
    let newer = SystemCache::with_version(dir.path(), FORMAT_VERSION + 1);
    // same file under the new version's name, so only the header differs
    fs::copy(&path, newer.path(&key())).unwrap();
    assert!(newer.get(&key()).unwrap().is_none());
    let rebuilt = newer.get_or_build(&key()).unwrap();
    assert_eq!(rebuilt, built);
    assert!(matches!(decode(&fs::read(newer.path(&key())).unwrap(), FORMAT_VERSION + 1), Decoded::System(_)));
}

#[test]
fn corrupt_file_is_rebuilt_and_replaced() {
    let dir = tempfile::tempdir().unwrap();
    let cache = SystemCache::new(dir.path());
    let built = key().build().unwrap();
    let path = cache.put(&key(), &built).unwrap();
    let mut bytes = fs::read(&path).unwrap();
    bytes.truncate(bytes.len() / 2);
    fs::write(&path, &bytes).unwrap();

    assert!(cache.get(&key()).unwrap().is_none());
    assert_eq!(cache.get_or_build(&key()).unwrap(), built);
    assert_eq!(fs::read(&path).unwrap(), encode(&built, FORMAT_VERSION));
}

#[test]
fn file_for_another_key_is_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let cache = SystemCache::new(dir.path());
    let other = CacheKey::new(ModelId::TwistedH, Some(3.0), 12, None);
    let built = other.build().unwrap();
    fs::write(cache.path(&key()), encode(&built, FORMAT_VERSION)).unwrap();
    assert!(cache.get(&key()).unwrap().is_none());
}

#[test]
fn unreadable_cache_dir_reports_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("not_a_dir");
    fs::write(&blocker, b"x").unwrap();
    let cache = SystemCache::new(&blocker);
    match cache.put(&key(), &key().build().unwrap()) {
        Err(Error::Io { path, .. }) => assert_eq!(path, blocker),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn encode_decode_roundtrips(model in 0usize..3, modes in 1usize..24, h in 1.1f64..6.0) {
        let id = ModelId::ALL[model];
        let key = CacheKey::new(id, Some(h), modes, None);
        let system = key.build().unwrap();
        let bytes = encode(&system, FORMAT_VERSION);
        match decode(&bytes, FORMAT_VERSION) {
            Decoded::System(back) => prop_assert_eq!(encode(&back, FORMAT_VERSION), bytes),
            _ => prop_assert!(false, "roundtrip failed for {:?}", key),
        }
    }
}
