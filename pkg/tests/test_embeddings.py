import io
import threading

import numpy as np
import pytest

from devseq.embeddings import (
    EmbeddingFormatError,
    EmbeddingTable,
    OovPolicy,
    load_embeddings,
    lookup,
    random_table,
)


def test_load_with_header():
    t = load_embeddings(io.StringIO("2 3\nक 1 0 0\nख 0 1 0\n"))
    assert len(t) == 2 and t.dim == 3
    assert lookup(t, "ख").tolist() == [0.0, 1.0, 0.0]


def test_load_without_header_infers_dim():
    t = load_embeddings(io.StringIO("a 0.5 -1.25\nb 1e-3 2\n"))
    assert t.dim == 2 and lookup(t, "b").tolist() == [0.001, 2.0]


def test_arity_error_names_line():
    with pytest.raises(EmbeddingFormatError, match="line 3"):
        load_embeddings(io.StringIO("2 3\nक 1 0 0\nग 1 2\n"))


def test_bad_number_and_empty():
    with pytest.raises(EmbeddingFormatError, match="line 1"):
        load_embeddings(io.StringIO("a 1 x\n"))
    with pytest.raises(EmbeddingFormatError):
        load_embeddings(io.StringIO("\n\n"))
    with pytest.raises(EmbeddingFormatError):
        load_embeddings(io.StringIO("a 1 2\n"), expected_dim=3)


def test_duplicates_first_wins(caplog):
    t = load_embeddings(io.StringIO("a 1 1\nb 2 2\na 3 3\n"))
    assert lookup(t, "a").tolist() == [1.0, 1.0]
    assert t.duplicates == 1
    assert "duplicate" in caplog.text


def test_order_independence():
    a = load_embeddings(io.StringIO("a 1 1\nb 2 2\n"), seed=3)
    b = load_embeddings(io.StringIO("b 2 2\na 1 1\n"), seed=3)
    for w in ("a", "b", "oov"):
        assert np.array_equal(a.lookup(w), b.lookup(w))


def test_oov_zero():
    t = EmbeddingTable(4, {}, OovPolicy.ZERO)
    assert lookup(t, "x").tolist() == [0.0] * 4


def test_oov_random_memoized_and_in_range():
    t = EmbeddingTable(50, {}, OovPolicy.RANDOM, seed=9)
    v1 = lookup(t, "x")
    v2 = lookup(t, "x")
    assert np.array_equal(v1, v2)
    assert np.all(np.abs(v1) < 0.25)
    # keyed on (seed, word): a fresh table with the same seed agrees
    assert np.array_equal(EmbeddingTable(50, {}, seed=9).lookup("x"), v1)
    assert not np.array_equal(EmbeddingTable(50, {}, seed=10).lookup("x"), v1)


def test_oov_concurrent_first_insert():
    t = EmbeddingTable(8, {}, seed=1)
    results = []
    threads = [threading.Thread(target=lambda: results.append(t.lookup("w"))) for _ in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert all(np.array_equal(r, results[0]) for r in results)


def test_random_table_deterministic():
    a = random_table(["a"], 2, seed=5)
    b = random_table(["a"], 2, seed=5)
    assert np.array_equal(a.lookup("a"), b.lookup("a"))


def test_random_table_range():
    low, high = 0.3, 0.3 + 1e-9
    t = random_table([f"w{i}" for i in range(100)], 10, low, high, seed=1)
    vals = np.array(list(t.vectors.values()))
    assert vals.min() >= low and vals.max() < high


def test_random_table_mean():
    t = random_table([f"w{i}" for i in range(1000)], 100, 0.0, 1.0, seed=11)
    vals = np.array(list(t.vectors.values()))
    assert vals.size == 10**5
    assert abs(vals.mean() - 0.5) < 0.01


def test_random_table_errors():
    with pytest.raises(ValueError):
        random_table([], 3)
    with pytest.raises(ValueError):
        random_table(["a"], 0)
    with pytest.raises(ValueError):
        random_table(["a"], 3, 1.0, 1.0)
