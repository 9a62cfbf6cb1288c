import base64
import hashlib
import threading

import numpy as np
import pytest

from bitextmine.embedding.cache import CacheRecord, EmbeddingCache, cache_get, cache_key, cache_put, iter_records
from bitextmine.errors import CacheCorruption, ValidationError


def _key(s):
    return hashlib.sha256(s.encode()).hexdigest()


def test_key_formula():
    expected = hashlib.sha256("model-x\nsearch_document\nSannu da zuwa".encode("utf-8")).hexdigest()
    assert cache_key("model-x", "search_document", "Sannu da zuwa") == expected


def test_put_get_round_trip(tmp_path):
    path = tmp_path / "c.tsv"
    vec = np.array([0.1, -2.5, 3e-38, np.float32(1) / 3], dtype=np.float32)
    cache_put(CacheRecord.build(_key("a"), vec), path)
    rec = cache_get(_key("a"), path)
    assert rec.dim == 4 and rec.vector.tobytes() == vec.astype("<f4").tobytes()


def test_line_format(tmp_path):
    path = tmp_path / "c.tsv"
    cache_put(CacheRecord.build(_key("a"), [1.0, -1.0]), path)
    line = path.read_text()
    key, dim, payload = line.rstrip("\n").split("\t")
    assert line.endswith("\n") and key == _key("a") and dim == "2"
    assert np.frombuffer(base64.b64decode(payload), "<f4").tolist() == [1.0, -1.0]


def test_absent(tmp_path):
    assert cache_get(_key("a"), tmp_path / "missing") is None
    (tmp_path / "empty").write_text("")
    assert cache_get(_key("a"), tmp_path / "empty") is None


def test_last_write_wins(tmp_path):
    path = tmp_path / "c.tsv"
    cache_put(CacheRecord.build(_key("a"), [1.0, 2.0]), path)
    cache_put(CacheRecord.build(_key("a"), [3.0, 4.0]), path)
    assert cache_get(_key("a"), path).vector.tolist() == [3.0, 4.0]
    assert EmbeddingCache(path).get(_key("a")).vector.tolist() == [3.0, 4.0]


def test_torn_final_line_detected(tmp_path):
    path = tmp_path / "c.tsv"
    for s in "abc":
        cache_put(CacheRecord.build(_key(s), [1.0, 2.0, 3.0]), path)
    data = path.read_bytes()
    path.write_bytes(data[:-7])
    with pytest.raises(CacheCorruption) as err:
        EmbeddingCache(path)
    assert err.value.line_no == 3


@pytest.mark.parametrize(
    "line, reason",
    [
        ("nothex\t1\tAAAAAA==\n", "key"),
        (f"{'a' * 64}\tx\tAAAAAA==\n", "dim"),
        (f"{'a' * 64}\t2\tAAAAAA==\n", "bytes"),
        (f"{'a' * 64}\t1\t!!!!\n", "base64"),
        (f"{'a' * 64}\t1\n", "fields"),
        (f"{'A' * 64}\t1\tAAAAAA==\n", "key"),
    ],
)
def test_malformed_lines(tmp_path, line, reason):
    path = tmp_path / "c.tsv"
    cache_put(CacheRecord.build(_key("ok"), [1.0]), path)
    with open(path, "a") as fh:
        fh.write(line)
    with pytest.raises(CacheCorruption, match=reason) as err:
        list(iter_records(path))
    assert err.value.line_no == 2


def test_non_ascii_bytes_report_line(tmp_path):
    path = tmp_path / "c.tsv"
    cache_put(CacheRecord.build(_key("ok"), [1.0]), path)
    with open(path, "ab") as fh:
        fh.write(b"\xff\xfe garbage\n")
    with pytest.raises(CacheCorruption) as err:
        EmbeddingCache(path)
    assert err.value.line_no == 2


def test_put_validates(tmp_path):
    with pytest.raises(ValidationError):
        cache_put(CacheRecord("short", 1, np.zeros(1, np.float32)), tmp_path / "c")
    with pytest.raises(ValidationError):
        cache_put(CacheRecord(_key("a"), 3, np.zeros(2, np.float32)), tmp_path / "c")


def test_bulk_round_trip_is_bit_exact(tmp_path, rng):
    path = tmp_path / "bulk.tsv"
    vecs = rng.standard_normal((10_000, 24)).astype(np.float32) * 10.0 ** rng.integers(-30, 30, (10_000, 1))
    cache = EmbeddingCache(path)
    cache.put_many(CacheRecord.build(_key(str(i)), v) for i, v in enumerate(vecs))
    reread = EmbeddingCache(path)
    assert len(reread) == 10_000
    got = np.stack([reread.get(_key(str(i))).vector for i in range(10_000)])
    assert got.tobytes() == vecs.astype("<f4").tobytes()


def test_concurrent_writers_leave_valid_file(tmp_path):
    cache = EmbeddingCache(tmp_path / "c.tsv")

    def work(t):
        for i in range(200):
            cache.put(CacheRecord.build(_key(f"{t}-{i}"), [float(t), float(i)]))

    threads = [threading.Thread(target=work, args=(t,)) for t in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    reread = EmbeddingCache(tmp_path / "c.tsv")
    assert len(reread) == 800
    assert reread.get(_key("3-199")).vector.tolist() == [3.0, 199.0]
