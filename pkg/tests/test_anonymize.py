import pytest
from hypothesis import given, settings, strategies as st

from codeanon.anonymize import (
    DETERMINISTIC,
    AnonymizationMap,
    AnonymizedSnippet,
    Regime,
    anonymize_all,
    anonymize_oov,
    collect_oov,
    deanonymize,
    replace_unk,
    sample_injection,
)
from codeanon.corpus import Node, Snippet
from codeanon.errors import CapacityError, CorruptionError, NotInvertibleError
from codeanon.placeholders import escape_value, unescape_value
from codeanon.rng import SplitMix64
from codeanon.vocab import EMPTY_VOCABULARY, Vocabulary

from conftest import random_snippet, render_fig1


def values_of(snippet: Snippet) -> list:
    return [n.node_value for n in snippet.nodes]


class TestCollectOov:
    def test_fig1(self, fig1_snippet, fig1_vocab):
        assert collect_oov(fig1_snippet, fig1_vocab) == ["my_y", "my_x"]

    def test_everything_in_vocab(self, fig1_snippet):
        vocab = Vocabulary(entries=(("my_x", 2), ("my_y", 1), ("np", 1), ("sin", 1)),
                           size_limit=4)
        assert collect_oov(fig1_snippet, vocab) == []

    def test_empty_vocab_yields_first_occurrence_order(self, fig1_snippet):
        assert collect_oov(fig1_snippet, EMPTY_VOCABULARY) == ["my_y", "np", "sin", "my_x"]


class TestSampleInjection:
    def test_k_zero(self):
        assert sample_injection(0, 10, seed=123) == []

    def test_deterministic_mode(self):
        assert sample_injection(3, 10, DETERMINISTIC) == [1, 2, 3]

    def test_capacity_error(self):
        with pytest.raises(CapacityError):
            sample_injection(11, 10, seed=0)

    def test_same_seed_same_output(self):
        assert sample_injection(5, 100, seed=42) == sample_injection(5, 100, seed=42)

    def test_full_draw_is_permutation(self):
        for seed in range(20):
            out = sample_injection(50, 50, seed=seed)
            assert sorted(out) == list(range(1, 51))

    def test_distinct_indices_within_range(self):
        for seed in range(50):
            out = sample_injection(7, 30, seed=seed)
            assert len(set(out)) == 7
            assert all(1 <= i <= 30 for i in out)

    def test_first_draw_uniform_chi_square(self):
        # 20000 draws over [1..100]; chi-square against uniform
        from scipy.stats import chisquare
        counts = [0] * 100
        for seed in range(20000):
            counts[sample_injection(1, 100, seed=seed)[0] - 1] += 1
        assert chisquare(counts).pvalue > 0.001


class TestAnonymizeOov:
    def test_fig1_deterministic_golden(self, fig1_snippet, fig1_vocab):
        out = anonymize_oov(fig1_snippet, fig1_vocab, budget=1000, seed=DETERMINISTIC)
        assert list(out.snippet.values()) == ["var1", "np", "sin", "var2", "var2"]
        assert render_fig1(out.snippet) == "var1 = np.sin(var2) + var2"
        assert out.map.pairs == (("my_y", 1), ("my_x", 2))
        assert out.regime is Regime.OOV_ANON

    def test_fig1_seeded_pattern(self, fig1_snippet, fig1_vocab):
        out = anonymize_oov(fig1_snippet, fig1_vocab, budget=1000, seed=99)
        v = list(out.snippet.values())
        assert v[1:3] == ["np", "sin"]
        assert v[0].startswith("var") and v[3].startswith("var")
        assert v[3] == v[4] and v[0] != v[3]
        indices = [i for _, i in out.map.pairs]
        assert len(set(indices)) == 2 and all(1 <= i <= 1000 for i in indices)

    def test_types_and_length_unchanged(self, fig1_snippet, fig1_vocab):
        out = anonymize_oov(fig1_snippet, fig1_vocab, seed=5)
        assert len(out.snippet.nodes) == len(fig1_snippet.nodes)
        assert [n.node_type for n in out.snippet.nodes] == \
               [n.node_type for n in fig1_snippet.nodes]

    def test_no_oov_is_identity_with_empty_map(self):
        s = Snippet("s", "r", "p", (Node("T", "a"), Node("T", None), Node("T", "b")))
        vocab = Vocabulary(entries=(("a", 1), ("b", 1)), size_limit=2)
        out = anonymize_oov(s, vocab, seed=3)
        assert out.snippet == s
        assert out.map.pairs == ()

    def test_seed_determinism(self, fig1_snippet, fig1_vocab):
        a = anonymize_oov(fig1_snippet, fig1_vocab, seed=7)
        b = anonymize_oov(fig1_snippet, fig1_vocab, seed=7)
        assert a == b

    def test_capacity_error_propagates(self, fig1_snippet):
        with pytest.raises(CapacityError):
            anonymize_oov(fig1_snippet, EMPTY_VOCABULARY, budget=3, seed=1)


class TestAnonymizeAll:
    def test_fig1_deterministic(self, fig1_snippet):
        out = anonymize_all(fig1_snippet, seed=DETERMINISTIC)
        assert list(out.snippet.values()) == ["var1", "var2", "var3", "var4", "var4"]
        assert out.regime is Regime.FULL_ANON

    def test_repeated_value_shares_placeholder(self):
        s = Snippet("s", "r", "p", (Node("T", "x"), Node("T", "x")))
        out = anonymize_all(s, seed=17)
        v = values_of(out.snippet)
        assert v[0] == v[1]

    def test_equals_oov_with_empty_vocab(self):
        rng = SplitMix64(2)
        for i in range(50):
            s = random_snippet(rng, f"s{i}")
            assert anonymize_all(s, budget=100, seed=i) == \
                   anonymize_oov(s, EMPTY_VOCABULARY, budget=100, seed=i,
                                 regime=Regime.FULL_ANON)


class TestReplaceUnk:
    def test_fig1(self, fig1_snippet, fig1_vocab):
        out = replace_unk(fig1_snippet, fig1_vocab)
        assert list(out.snippet.values()) == ["UNK", "np", "sin", "UNK", "UNK"]
        assert render_fig1(out.snippet) == "UNK = np.sin(UNK) + UNK"
        assert out.map.pairs == () and out.regime is Regime.UNK_REPLACE

    def test_no_oov_unchanged(self):
        s = Snippet("s", "r", "p", (Node("T", "a"),))
        vocab = Vocabulary(entries=(("a", 1),), size_limit=1)
        assert replace_unk(s, vocab).snippet == s

    def test_empty_vocab_collapses_everything(self, fig1_snippet):
        out = replace_unk(fig1_snippet, EMPTY_VOCABULARY)
        assert set(out.snippet.values()) == {"UNK"}


class TestDeanonymize:
    def test_round_trip_oov(self, fig1_snippet, fig1_vocab):
        for seed in [DETERMINISTIC, 0, 1, 99999]:
            out = anonymize_oov(fig1_snippet, fig1_vocab, seed=seed)
            assert deanonymize(out) == fig1_snippet

    def test_identity_on_empty_map(self):
        s = Snippet("s", "r", "p", (Node("T", "a"),))
        vocab = Vocabulary(entries=(("a", 1),), size_limit=1)
        assert deanonymize(anonymize_oov(s, vocab, seed=4)) == s

    def test_unk_regime_rejected(self, fig1_snippet, fig1_vocab):
        with pytest.raises(NotInvertibleError):
            deanonymize(replace_unk(fig1_snippet, fig1_vocab))

    def test_unmapped_placeholder_is_corruption(self):
        snippet = Snippet("s", "r", "p", (Node("T", "var5"),))
        anon = AnonymizedSnippet(snippet=snippet,
                                 map=AnonymizationMap((), placeholder_budget=10),
                                 regime=Regime.FULL_ANON)
        with pytest.raises(CorruptionError):
            deanonymize(anon)

    def test_fuzzed_round_trips(self):
        rng = SplitMix64(909)
        pool = ["a", "b", "var1", "var2", "var3_orig", "np", "UNK-ish", "x_orig"]
        for i in range(500):
            s = random_snippet(rng, f"s{i}", value_pool=pool)
            vocab_n = rng.randrange(4)
            from codeanon.vocab import build_vocabulary, count_values
            from codeanon.corpus import Corpus
            vocab = build_vocabulary(count_values(Corpus((s,))), vocab_n)
            out = anonymize_oov(s, vocab, budget=50, seed=i)
            assert deanonymize(out) == s


class TestEscapeRule:
    def test_escape_then_unescape_is_identity(self):
        for v in ["var1", "var99", "var1_orig", "var2_orig_orig", "x", "vary",
                  "var0", "var01", "variable", "_orig", "var", "var10x"]:
            assert unescape_value(escape_value(v)) == v

    def test_only_placeholder_shaped_values_escape(self):
        assert escape_value("var7") == "var7_orig"
        assert escape_value("var7_orig") == "var7_orig_orig"
        assert escape_value("var0") == "var0"
        assert escape_value("var01") == "var01"
        assert escape_value("Var7") == "Var7"
        assert escape_value("foo") == "foo"

    def test_in_vocab_placeholder_like_value_round_trips(self):
        s = Snippet("s", "r", "p", (Node("T", "var5"), Node("T", "other")))
        from codeanon.vocab import build_vocabulary
        from collections import Counter
        vocab = build_vocabulary(Counter({"var5": 10}), 1)
        out = anonymize_oov(s, vocab, budget=50, seed=8)
        v = values_of(out.snippet)
        assert v[0] == "var5_orig"           # kept, but out of placeholder namespace
        assert v[1].startswith("var") and v[1] != "var5"
        assert deanonymize(out) == s

    def test_oov_placeholder_like_value_round_trips(self):
        s = Snippet("s", "r", "p", (Node("T", "var5"),))
        out = anonymize_oov(s, EMPTY_VOCABULARY, budget=50, seed=8)
        assert out.map.pairs[0][0] == "var5"
        assert deanonymize(out) == s


snippet_strategy = st.lists(
    st.tuples(st.sampled_from(["NameLoad", "If", "Call"]),
              st.one_of(st.none(), st.text(min_size=1, max_size=5))),
    min_size=1, max_size=25,
).map(lambda pairs: Snippet("h", "r", "p", tuple(Node(t, v) for t, v in pairs)))


def equality_pattern(snippet: Snippet) -> set:
    vals = [n.node_value for n in snippet.nodes]
    return {(i, j) for i in range(len(vals)) for j in range(i + 1, len(vals))
            if vals[i] is not None and vals[i] == vals[j]}


class TestEqualityPattern:
    @given(snippet_strategy, st.integers(0, 3), st.integers(0, 2 ** 32))
    @settings(max_examples=150)
    def test_preserved_by_anonymization(self, snippet, vocab_n, seed):
        from codeanon.vocab import build_vocabulary, count_values
        from codeanon.corpus import Corpus
        vocab = build_vocabulary(count_values(Corpus((snippet,))), vocab_n)
        for out in (anonymize_oov(snippet, vocab, budget=100, seed=seed),
                    anonymize_all(snippet, budget=100, seed=seed)):
            assert equality_pattern(out.snippet) == equality_pattern(snippet)

    @given(snippet_strategy, st.integers(0, 2 ** 32))
    @settings(max_examples=150)
    def test_injection_within_snippet(self, snippet, seed):
        out = anonymize_all(snippet, budget=100, seed=seed)
        forward = {}
        for before, after in zip(snippet.nodes, out.snippet.nodes):
            if before.node_value is None:
                assert after.node_value is None
                continue
            forward.setdefault(before.node_value, after.node_value)
            assert forward[before.node_value] == after.node_value
        mapped = list(forward.values())
        assert len(set(mapped)) == len(mapped)

    def test_unk_destroys_pattern_with_two_oov_values(self):
        s = Snippet("s", "r", "p", (Node("T", "a"), Node("T", "b")))
        out = replace_unk(s, EMPTY_VOCABULARY)
        assert equality_pattern(s) == set()
        assert equality_pattern(out.snippet) == {(0, 1)}
