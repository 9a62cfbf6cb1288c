import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bitextmine.alignment import AlignedRow, AlignmentPair, AlignmentParams, AlignmentResult
from bitextmine.corpus_prep import CleanCorpus
from bitextmine.errors import (
    ConfigError,
    EmptyPairs,
    IndexOutOfBounds,
    InvalidLabel,
    LineCountMismatch,
    ValidationError,
)
from bitextmine.evaluation import (
    ANNOTATION_HEADER,
    GoldAlignment,
    compute_stats,
    evaluate_f1,
    format_annotation_tsv,
    format_f1_table,
    load_gold_from_parallel,
    sample_for_annotation,
    shuffle_corpus,
    stats_from_rows,
    summarize_annotations,
    unshuffle_targets,
)


def result_of(pairs, n_src, n_tgt):
    return AlignmentResult(tuple(AlignmentPair(i, j, 1.0, "nn") for i, j in pairs), AlignmentParams(), n_src, n_tgt)


def test_identity_scores_one():
    rep = evaluate_f1(result_of([(i, i) for i in range(10)], 10, 10), GoldAlignment.identity(10))
    assert (rep.precision, rep.recall, rep.f1) == (1.0, 1.0, 1.0)


def test_seven_of_ten():
    pred = [(i, i) for i in range(7)] + [(7, 8), (8, 9), (9, 7)]
    rep = evaluate_f1(pred, GoldAlignment.identity(10))
    assert rep.n_correct == 7
    assert rep.f1 == pytest.approx(0.7, abs=1e-9)


def test_partial_prediction():
    pred = [(i, i) for i in range(7)] + [(7, 9)]
    rep = evaluate_f1(pred, GoldAlignment.identity(10))
    assert rep.precision == pytest.approx(0.875, abs=1e-12)
    assert rep.recall == pytest.approx(0.7, abs=1e-12)
    assert rep.f1 == pytest.approx(2 * 0.875 * 0.7 / 1.575, abs=1e-12)
    assert rep.f1 == pytest.approx(0.7778, abs=1e-4)


def test_empty_prediction_scores_zero():
    rep = evaluate_f1([], GoldAlignment.identity(4))
    assert (rep.precision, rep.recall, rep.f1) == (0.0, 0.0, 0.0)


def test_out_of_range_prediction():
    with pytest.raises(IndexOutOfBounds):
        evaluate_f1([(0, 5)], GoldAlignment.identity(3))
    with pytest.raises(IndexOutOfBounds):
        evaluate_f1(result_of([(0, 0)], 4, 4), GoldAlignment.identity(3))


def test_gold_validation():
    with pytest.raises(ValidationError):
        GoldAlignment(frozenset({(0, 0), (0, 1)}), 2, 2)
    with pytest.raises(IndexOutOfBounds):
        GoldAlignment(frozenset({(2, 0)}), 2, 2)


@settings(max_examples=50, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 19), st.integers(0, 19)), max_size=40))
def test_f1_bounds_and_symmetry(pred):
    rep = evaluate_f1(pred, GoldAlignment.identity(20))
    assert 0.0 <= rep.f1 <= 1.0
    lo, hi = sorted((rep.precision, rep.recall))
    assert lo - 1e-12 <= rep.f1 <= hi + 1e-12


def test_gold_from_parallel_files(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.write_text("x\ny\nz\n", encoding="utf-8")
    b.write_text("p\nq\nr\n", encoding="utf-8")
    assert load_gold_from_parallel(a, b).pairs == frozenset({(0, 0), (1, 1), (2, 2)})
    b.write_text("p\nq\n", encoding="utf-8")
    with pytest.raises(LineCountMismatch) as err:
        load_gold_from_parallel(a, b)
    assert "3" in str(err.value) and "2" in str(err.value)


def test_gold_from_large_files(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.write_text("".join(f"s{i}\n" for i in range(997)), encoding="utf-8")
    b.write_text("".join(f"t{i}\n" for i in range(997)), encoding="utf-8")
    gold = load_gold_from_parallel(a, b)
    assert len(gold.pairs) == 997 and gold.n_src == gold.n_tgt == 997


def test_shuffle_round_trip():
    corpus = CleanCorpus.from_texts([f"sentence {i}" for i in range(50)])
    shuffled, perm = shuffle_corpus(corpus, 42)
    assert sorted(perm.tolist()) == list(range(50))
    assert [shuffled[p].text for p in range(50)] == [corpus[int(perm[p])].text for p in range(50)]
    # align every source i to its own sentence in the shuffled order
    where = np.argsort(perm)
    res = unshuffle_targets(result_of([(i, int(where[i])) for i in range(50)], 50, 50), perm)
    assert res.index_pairs() == {(i, i) for i in range(50)}
    assert np.array_equal(shuffle_corpus(corpus, 42)[1], perm)


def test_length_ratio_and_uniqueness():
    src = CleanCorpus.from_texts(["a b c d e", "a b c d e f g h i j"])
    tgt = CleanCorpus.from_texts(["a b c d e f", "a b c d e f g h i j k l"])
    s = compute_stats([(0, 0), (1, 1)], src, tgt)
    assert s.mean_len_ratio == pytest.approx(1.2, abs=1e-12)
    assert s.unique_tgt_frac == 1.0


def test_unique_target_fraction():
    src = CleanCorpus.from_texts(["one", "two", "three"])
    tgt = CleanCorpus.from_texts(["uno", "dos"])
    s = compute_stats([(0, 0), (1, 0), (2, 1)], src, tgt)
    assert s.unique_tgt_frac == pytest.approx(2 / 3, abs=1e-12)


def test_self_alignment_ratio_is_one():
    corpus = CleanCorpus.from_texts(["a b c", "d e f g , h", "i !"])
    s = compute_stats([(i, i) for i in range(3)], corpus, corpus)
    assert s.mean_len_ratio == 1.0 and s.unique_tgt_frac == 1.0


def test_stats_empty_pairs():
    with pytest.raises(EmptyPairs):
        stats_from_rows([])


def test_stats_from_rows_matches_corpus_stats():
    src = CleanCorpus.from_texts(["How are you ?", "I am fine , thanks ."])
    tgt = CleanCorpus.from_texts(["Wie geht es dir ?", "Gut ."])
    rows = [AlignedRow(0, 0, 1.0, src[0].text, tgt[0].text), AlignedRow(1, 1, 1.0, src[1].text, tgt[1].text)]
    assert stats_from_rows(rows) == compute_stats([(0, 0), (1, 1)], src, tgt)


def _rows(n):
    return [AlignedRow(i, i, 0.5, f"s{i}", f"t{i}") for i in range(n)]


def test_sample_all_keeps_order():
    rows = _rows(30)
    assert sample_for_annotation(rows, 30, 7) == rows


def test_sample_is_seeded():
    rows = _rows(13_560)
    a = sample_for_annotation(rows, 150, 42)
    assert a == sample_for_annotation(rows, 150, 42)
    assert len({r.src_idx for r in a}) == 150
    assert [r.src_idx for r in a] == sorted(r.src_idx for r in a)
    assert a != sample_for_annotation(rows, 150, 43)


def test_sample_size_bounds():
    with pytest.raises(ConfigError):
        sample_for_annotation(_rows(5), 6, 0)
    with pytest.raises(ConfigError):
        sample_for_annotation(_rows(5), 0, 0)


def test_annotation_round_trip(tmp_path):
    rows = _rows(4)
    path = tmp_path / "ann.tsv"
    path.write_text(format_annotation_tsv(rows, [1, 1, 1, 5]), encoding="utf-8")
    assert path.read_text(encoding="utf-8").startswith(ANNOTATION_HEADER + "\n")
    dist = summarize_annotations(path)
    assert dist.fractions == {1: 0.75, 2: 0.0, 3: 0.0, 4: 0.0, 5: 0.25}
    assert dist.n_labeled == 4 and dist.n_blank == 0


def test_blank_labels_are_counted_apart():
    text = format_annotation_tsv(_rows(3), [2, "", 2])
    dist = summarize_annotations(text.splitlines())
    assert dist.n_blank == 1 and dist.fractions[2] == 1.0


@pytest.mark.parametrize("bad", ["6", "0", "x", "2.5"])
def test_invalid_label_names_line(bad):
    lines = format_annotation_tsv(_rows(3), [1, bad, 1]).splitlines()
    with pytest.raises(InvalidLabel) as err:
        summarize_annotations(lines)
    assert err.value.line_no == 3


@settings(max_examples=30, deadline=None)
@given(label=st.integers(1, 5), n=st.integers(1, 40))
def test_point_mass(label, n):
    dist = summarize_annotations(format_annotation_tsv(_rows(n), [label] * n).splitlines())
    assert dist.fractions[label] == 1.0
    assert sum(dist.fractions.values()) == 1.0


def test_f1_table():
    rep = evaluate_f1([(i, i) for i in range(997)], GoldAlignment.identity(997))
    assert format_f1_table([("wmt", 997, rep)]) == "data\t# sents\tf1\nwmt\t997\t100.00%\n"
