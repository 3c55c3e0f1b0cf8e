import json
import logging

import pytest
from hypothesis import given, strategies as st

from codeanon.corpus import (
    Corpus,
    Node,
    Snippet,
    parse_ast_record,
    parse_token_record,
    read_corpus,
    repo_from_path,
    snippet_to_json,
    write_corpus,
)
from codeanon.errors import ParseError, StructuralError
from codeanon.rng import SplitMix64

from conftest import FIG1_RECORD, random_snippet


def record(*nodes) -> str:
    return json.dumps(list(nodes))


# --- independent oracle: recursive pre-order traversal ----------------------

def preorder_oracle(raw: list, idx: int = 0) -> list[int]:
    out = [idx]
    for child in raw[idx].get("children", []):
        out.extend(preorder_oracle(raw, child))
    return out


@st.composite
def random_trees(draw):
    """Random rooted tree in node-array form, children in shuffled index order."""
    n = draw(st.integers(min_value=1, max_value=40))
    parents = [draw(st.integers(min_value=0, max_value=i - 1)) for i in range(1, n)]
    nodes = [{"type": f"T{i}"} for i in range(n)]
    for i, p in enumerate(parents, start=1):
        nodes[p].setdefault("children", []).append(i)
    for i in range(n):
        if draw(st.booleans()):
            nodes[i]["value"] = f"v{draw(st.integers(0, 5))}"
    return nodes


class TestParseAstRecord:
    def test_single_root_node(self):
        s = parse_ast_record(record({"type": "Module"}))
        assert [(n.node_type, n.node_value) for n in s.nodes] == [("Module", None)]
        assert s.subtree_sizes == (1,)

    def test_two_children_in_order(self):
        raw = record({"type": "root", "children": [1, 2]},
                     {"type": "A"}, {"type": "B"})
        s = parse_ast_record(raw)
        assert [n.node_type for n in s.nodes] == ["root", "A", "B"]

    def test_seven_node_tree_matches_recursive_oracle(self):
        # root(0) -> [1, 4]; 1 -> [2, 3]; 4 -> [5, 6]
        raw = [{"type": "n0", "children": [1, 4]},
               {"type": "n1", "children": [2, 3]},
               {"type": "n2", "value": "a"}, {"type": "n3"},
               {"type": "n4", "children": [5, 6]},
               {"type": "n5", "value": "b"}, {"type": "n6"}]
        s = parse_ast_record(json.dumps(raw))
        assert [n.node_type for n in s.nodes] == [f"n{i}" for i in preorder_oracle(raw)]
        assert len(s.nodes) == 7

    @given(random_trees())
    def test_traversal_matches_oracle_on_random_trees(self, raw):
        s = parse_ast_record(json.dumps(raw))
        order = preorder_oracle(raw)
        assert len(s.nodes) == len(raw)
        assert [n.node_type for n in s.nodes] == [raw[i]["type"] for i in order]
        assert [n.node_value for n in s.nodes] == [raw[i].get("value") for i in order]

    @given(random_trees())
    def test_descendants_follow_their_root(self, raw):
        s = parse_ast_record(json.dumps(raw))
        # every subtree slice is exactly the node plus its descendants
        for i, size in enumerate(s.subtree_sizes):
            assert 1 <= size <= len(s.nodes) - i

    def test_fig1_traversal(self):
        s = parse_ast_record(FIG1_RECORD)
        assert list(s.values()) == ["my_y", "np", "sin", "my_x", "my_x"]
        assert len(s.nodes) == 10

    def test_trailing_zero_sentinel_tolerated(self):
        s = parse_ast_record('[{"type": "Module"}, 0]')
        assert len(s.nodes) == 1

    def test_malformed_json(self):
        with pytest.raises(ParseError, match="malformed JSON"):
            parse_ast_record("{not json")

    def test_dangling_child_index(self):
        with pytest.raises(StructuralError, match="out of range"):
            parse_ast_record(record({"type": "root", "children": [5]}))

    def test_cycle_detected(self):
        raw = record({"type": "a", "children": [1]},
                     {"type": "b", "children": [0]})
        with pytest.raises(StructuralError, match="cycle|multiple parents"):
            parse_ast_record(raw)

    def test_shared_child_rejected(self):
        raw = record({"type": "root", "children": [1, 2]},
                     {"type": "a", "children": [2]}, {"type": "b"})
        with pytest.raises(StructuralError, match="multiple parents"):
            parse_ast_record(raw)

    def test_unreachable_node_rejected(self):
        raw = record({"type": "root"}, {"type": "orphan"})
        with pytest.raises(StructuralError, match="unreachable"):
            parse_ast_record(raw)

    def test_non_object_node_rejected(self):
        with pytest.raises(ParseError):
            parse_ast_record('[{"type": "root", "children": [1]}, 7]')


class TestReadWriteCorpus:
    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        assert len(read_corpus(str(p))) == 0

    def test_three_lines_in_order(self, tmp_path):
        p = tmp_path / "c.jsonl"
        lines = [json.dumps({"id": f"s{i}", "repo": "r", "path": "p",
                             "nodes": [["T", f"v{i}"]]}) for i in range(3)]
        p.write_text("\n".join(lines) + "\n")
        corpus = read_corpus(str(p))
        assert [s.id for s in corpus] == ["s0", "s1", "s2"]

    def test_skip_mode_logs_and_drops_bad_line(self, tmp_path, caplog):
        p = tmp_path / "c.jsonl"
        good = json.dumps({"id": "a", "repo": "", "path": "", "nodes": [["T", None]]})
        p.write_text(good + "\nBROKEN\n" + good.replace('"a"', '"b"') + "\n")
        with caplog.at_level(logging.WARNING):
            corpus = read_corpus(str(p), on_error="skip")
        assert [s.id for s in corpus] == ["a", "b"]
        assert sum(":2:" in r.message for r in caplog.records) == 1

    def test_fail_fast_names_line(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text("BROKEN\n")
        with pytest.raises(ParseError, match=":1:"):
            read_corpus(str(p))

    def test_ids_assigned_from_path_and_line(self, tmp_path):
        p = tmp_path / "trees.json"
        p.write_text(FIG1_RECORD + "\n" + FIG1_RECORD + "\n")
        corpus = read_corpus(str(p), format="ast-json")
        assert [s.id for s in corpus] == [f"{p}:1", f"{p}:2"]

    def test_paths_file_sets_repo(self, tmp_path):
        p = tmp_path / "trees.json"
        p.write_text(FIG1_RECORD + "\n")
        sidecar = tmp_path / "paths.txt"
        sidecar.write_text("data/octocat/hello/src/a.py\n")
        corpus = read_corpus(str(p), format="ast-json", paths_file=str(sidecar))
        assert corpus.snippets[0].repository == "octocat/hello"
        assert corpus.snippets[0].path == "data/octocat/hello/src/a.py"

    def test_round_trip_identity_and_byte_stability(self, tmp_path):
        rng = SplitMix64(7)
        snippets = tuple(random_snippet(rng, f"s{i}") for i in range(20))
        corpus = Corpus(snippets, provenance="fuzz")
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_corpus(corpus, str(p1))
        back = read_corpus(str(p1))
        assert back.snippets == corpus.snippets
        write_corpus(back, str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_unicode_values_preserved_exactly(self, tmp_path):
        values = ["π", "データ", "naïve", "🐍", "a\tb", 'q"uote']
        nodes = tuple(Node("NameLoad", v) for v in values)
        corpus = Corpus((Snippet("u", "r", "p", nodes),))
        p = tmp_path / "u.jsonl"
        write_corpus(corpus, str(p))
        assert list(read_corpus(str(p)).snippets[0].values()) == values

    def test_empty_corpus_writes_empty_file(self, tmp_path):
        p = tmp_path / "e.jsonl"
        write_corpus(Corpus(()), str(p))
        assert p.read_bytes() == b""

    def test_no_trailing_whitespace(self):
        line = snippet_to_json(Snippet("i", "r", "p", (Node("T", "v"),)))
        assert line == line.rstrip()
        assert json.loads(line) == {"id": "i", "repo": "r", "path": "p",
                                    "nodes": [["T", "v"]]}


class TestInvariants:
    def test_duplicate_ids_rejected(self):
        s = Snippet("dup", "r", "p", (Node("T", None),))
        with pytest.raises(ValueError, match="duplicate"):
            Corpus((s, s))

    def test_empty_snippet_rejected(self):
        with pytest.raises(ValueError):
            Snippet("s", "r", "p", ())

    def test_empty_node_type_rejected(self):
        with pytest.raises(ValueError):
            Node("", "v")

    def test_empty_value_becomes_parse_error_in_token_jsonl(self):
        with pytest.raises(ParseError):
            parse_token_record(json.dumps({"id": "x", "repo": "", "path": "",
                                           "nodes": [["T", ""]]}))


def test_repo_from_path_variants():
    assert repo_from_path("data/owner/repo/src/f.py") == "owner/repo"
    assert repo_from_path("owner/repo/f.py") == "owner/repo"
    assert repo_from_path("single.py") == "single.py"
    assert repo_from_path("") == ""
