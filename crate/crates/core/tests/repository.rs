use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::thread;

use mvnlock_core::repo::{artifact_rel_path, Artifact, PomSource, RepoError};
use mvnlock_core::{ChecksumAlgorithm, ChecksumMode, Gav, Repository, RepositoryConfig};
use mvnlock_fixtures::{flip_byte, package, write_file, Workspace};

// Digests of the gson fixture jar, computed with Python's hashlib.
const GSON_SHA1: &str = "2284ceeab2111ae500980dc1b61d808964912e77";
const GSON_SHA256: &str = "895d0f89630ec46f142b9026de10d837d9c58f4ae24f212843894a82b14ecc11";
const GSON_SHA512: &str = "3750e163ba1136909685093e6c55d7cde8af0a2357354cbf632de79f34032054be9b0951a970a25807da6271b04d91bd5a10e84795dbfa8bbdaf920c3690b763";
const GSON_SHA256_BYTE_3_FLIPPED: &str = "994d169dee37ce3ba5f0ccc56778e9c85dbee9b893b5018fb02675249232ad23";

fn gson() -> Gav {
    Gav::new("com.google.code.gson", "gson", "2.13.2").unwrap()
}

fn with_gson() -> Workspace {
    let ws = Workspace::new();
    ws.publish(&package("com.google.code.gson", "gson", "2.13.2"));
    ws
}

fn offline(ws: &Workspace) -> Repository {
    Repository::new(RepositoryConfig::local(ws.cache()).offline(true)).unwrap()
}

#[test]
fn pom_fetch_fills_cache_then_serves_offline() {
    let ws = with_gson();
    let cached = ws.cache().join(artifact_rel_path(&gson(), "pom", None));
    assert!(matches!(offline(&ws).fetch_pom(&gson()), Err(RepoError::Offline { .. })));
    assert!(!cached.exists());

    let text = ws.repository().fetch_pom(&gson()).unwrap();
    assert!(text.contains("<artifactId>gson</artifactId>"));
    assert_eq!(fs::read_to_string(&cached).unwrap(), text);

    fs::remove_dir_all(ws.remote()).unwrap();
    assert_eq!(offline(&ws).fetch_pom(&gson()).unwrap(), text);
}

#[test]
fn missing_artifact_is_not_found() {
    let ws = with_gson();
    let missing = Gav::new("com.google.code.gson", "gson", "9.9").unwrap();
    assert!(matches!(ws.repository().fetch_pom(&missing), Err(RepoError::NotFound { .. })));
}

#[test]
fn local_checksums_match_independent_digests() {
    let ws = with_gson();
    let repo = ws.repository();
    let jar = Artifact::jar(gson());
    for (alg, want) in [(ChecksumAlgorithm::Sha1, GSON_SHA1), (ChecksumAlgorithm::Sha256, GSON_SHA256), (ChecksumAlgorithm::Sha512, GSON_SHA512)] {
        let record = repo.checksum_local(&jar, alg).unwrap();
        assert_eq!((record.algorithm(), record.digest(), record.mode()), (alg, want, ChecksumMode::Local));
    }
    assert_eq!(repo.checksum_local(&jar, ChecksumAlgorithm::Sha256).unwrap(), repo.checksum_local(&jar, ChecksumAlgorithm::Sha256).unwrap());

    flip_byte(&ws.cached_jar(&gson()), 3);
    assert_eq!(repo.checksum_local(&jar, ChecksumAlgorithm::Sha256).unwrap().digest(), GSON_SHA256_BYTE_3_FLIPPED);
}

fn sidecar(ws: &Workspace, gav: &Gav, alg: ChecksumAlgorithm) -> PathBuf {
    ws.remote().join(format!("{}.{}", artifact_rel_path(gav, "jar", None), alg.extension()))
}

#[test]
fn remote_checksums_come_from_sidecars() {
    let ws = with_gson();
    write_file(&sidecar(&ws, &gson(), ChecksumAlgorithm::Sha256), format!("{GSON_SHA256}  gson-2.13.2.jar\n").as_bytes());
    let record = ws.repository().checksum_remote(&Artifact::jar(gson()), ChecksumAlgorithm::Sha256).unwrap();
    assert_eq!((record.digest(), record.mode()), (GSON_SHA256, ChecksumMode::Remote));

    fs::remove_file(sidecar(&ws, &gson(), ChecksumAlgorithm::Sha256)).unwrap();
    assert!(sidecar(&ws, &gson(), ChecksumAlgorithm::Sha1).exists());
    let err = ws.repository().checksum_remote(&Artifact::jar(gson()), ChecksumAlgorithm::Sha256).unwrap_err();
    assert!(matches!(err, RepoError::ChecksumUnavailable { algorithm: ChecksumAlgorithm::Sha256, .. }), "{err}");

    let err = offline(&ws).checksum_remote(&Artifact::jar(gson()), ChecksumAlgorithm::Sha1).unwrap_err();
    assert!(matches!(err, RepoError::OfflineRemoteChecksum));
}

#[test]
fn malformed_sidecar_is_an_integrity_error() {
    let ws = with_gson();
    write_file(&sidecar(&ws, &gson(), ChecksumAlgorithm::Sha256), b"not-a-digest\n");
    let err = ws.repository().checksum_remote(&Artifact::jar(gson()), ChecksumAlgorithm::Sha256).unwrap_err();
    assert!(matches!(err, RepoError::IntegrityFormat { .. }), "{err}");
}

#[test]
fn unsorted_metadata_is_listed_in_version_order() {
    let ws = Workspace::new();
    let xml = "<metadata><groupId>org.x</groupId><artifactId>y</artifactId><versioning><versions>\
               <version>2.0</version><version>1.0</version><version>1.10</version><version>1.5</version>\
               </versions></versioning></metadata>";
    write_file(&ws.remote().join("org/x/y/maven-metadata.xml"), xml.as_bytes());
    assert_eq!(ws.repository().list_versions("org.x", "y").unwrap(), ["1.0", "1.5", "1.10", "2.0"]);
    assert_eq!(offline(&ws).list_versions("org.x", "y").unwrap(), ["1.0", "1.5", "1.10", "2.0"]);
}

#[test]
fn later_repositories_fill_gaps() {
    let first = Workspace::new();
    let second = with_gson();
    let config = RepositoryConfig::local(first.cache()).with_remote(first.remote_url()).with_remote(second.remote_url());
    let repo = Repository::new(config).unwrap();
    assert!(repo.fetch_pom(&gson()).is_ok());
    assert_eq!(mvnlock_core::ArtifactRepository::source_of(&repo, &Artifact::jar(gson())), "local");
    repo.checksum_local(&Artifact::jar(gson()), ChecksumAlgorithm::Sha256).unwrap();
    let source = mvnlock_core::ArtifactRepository::source_of(&repo, &Artifact::jar(gson()));
    assert_eq!(source.trim_end_matches('/'), second.remote_url().trim_end_matches('/'));
}

/// Serves files below `root` over plain HTTP until the test process exits.
fn serve(root: PathBuf) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let mut reader = BufReader::new(&stream);
            let mut request = String::new();
            reader.read_line(&mut request).unwrap();
            let mut line = String::new();
            while reader.read_line(&mut line).is_ok_and(|n| n > 2) {
                line.clear();
            }
            let path = request.split_whitespace().nth(1).unwrap_or("/").trim_start_matches('/').to_string();
            let mut stream = &stream;
            match fs::read(root.join(path)) {
                Ok(body) => {
                    write!(stream, "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n", body.len()).unwrap();
                    stream.write_all(&body).unwrap();
                }
                Err(_) => write!(stream, "HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n").unwrap(),
            }
        }
    });
    format!("http://{addr}/")
}

#[test]
fn http_repository() {
    let ws = with_gson();
    let url = serve(ws.remote());
    let repo = Repository::new(RepositoryConfig::local(ws.cache()).with_remote(url.clone())).unwrap();
    assert_eq!(repo.list_versions("com.google.code.gson", "gson").unwrap(), ["2.13.2"]);
    assert!(repo.fetch_pom(&gson()).unwrap().contains("gson"));
    assert_eq!(repo.checksum_local(&Artifact::jar(gson()), ChecksumAlgorithm::Sha256).unwrap().digest(), GSON_SHA256);
    assert_eq!(repo.checksum_remote(&Artifact::jar(gson()), ChecksumAlgorithm::Sha512).unwrap().digest(), GSON_SHA512);
    let missing = Gav::new("com.google.code.gson", "gson", "0.1").unwrap();
    assert!(matches!(repo.fetch_pom(&missing), Err(RepoError::NotFound { .. })));
}
