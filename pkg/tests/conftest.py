import json

import pytest
from hypothesis import settings

from codeanon.corpus import Node, Snippet, parse_ast_record
from codeanon.rng import SplitMix64
from codeanon.vocab import Vocabulary

settings.register_profile("default", deadline=None)
settings.load_profile("default")

# AST for `my_y = np.sin(my_x) + my_x`, py150 node-array layout.
FIG1_RECORD = json.dumps([
    {"type": "Module", "children": [1]},
    {"type": "Assign", "children": [2, 3]},
    {"type": "NameStore", "value": "my_y"},
    {"type": "BinOpAdd", "children": [4, 9]},
    {"type": "CallFunc", "children": [5, 8]},
    {"type": "AttributeLoad", "children": [6, 7]},
    {"type": "NameLoad", "value": "np"},
    {"type": "attr", "value": "sin"},
    {"type": "NameLoad", "value": "my_x"},
    {"type": "NameLoad", "value": "my_x"},
])

FIG1_EXPR = "{} = {}.{}({}) + {}"


def render_fig1(snippet: Snippet) -> str:
    """Render the five values of the fig-1 snippet back into source form."""
    return FIG1_EXPR.format(*snippet.values())


@pytest.fixture
def fig1_snippet() -> Snippet:
    return parse_ast_record(FIG1_RECORD, snippet_id="fig1", repository="demo", path="fig1.py")


@pytest.fixture
def fig1_vocab() -> Vocabulary:
    return Vocabulary(entries=(("np", 4), ("sin", 4)), size_limit=2)


# Plain non-placeholder identifier pool for fuzzing.
_IDENT_POOL = [
    "alpha", "beta", "gamma", "delta", "count", "idx", "total", "buf",
    "name", "value", "result", "tmp", "node", "left", "right", "päron",
    "データ", "x", "y", "z",
]
_TYPE_POOL = ["NameLoad", "NameStore", "NameParam", "If", "For", "Call", "attr", "Num"]


def random_snippet(rng: SplitMix64, snippet_id: str, min_len: int = 1,
                   max_len: int = 30, value_pool: list[str] | None = None,
                   p_valueless_percent: int = 30) -> Snippet:
    """Small random snippet; value-bearing and structural nodes mixed."""
    pool = value_pool if value_pool is not None else _IDENT_POOL
    length = min_len + rng.randrange(max_len - min_len + 1)
    nodes = []
    for _ in range(length):
        node_type = _TYPE_POOL[rng.randrange(len(_TYPE_POOL))]
        if rng.randrange(100) < p_valueless_percent:
            nodes.append(Node(node_type, None))
        else:
            nodes.append(Node(node_type, pool[rng.randrange(len(pool))]))
    return Snippet(id=snippet_id, repository="r0", path="p.py", nodes=tuple(nodes))


_VAR_TYPES = ["NameLoad", "NameStore", "NameParam"]
_FILLER = [("If", None), ("For", None), ("Num", "1"), ("attr", "items"),
           ("Str", "doc"), ("Compare", None)]


def random_function(rng: SplitMix64, fid: str, var_prefix: str = "v") -> Snippet:
    """Function snippet passing the variable-misuse filters: 3..6 distinct
    variables, each used at least twice, plus structural filler."""
    n_vars = 3 + rng.randrange(4)
    pool = [f"{var_prefix}{i}" for i in range(n_vars)]
    body = []
    for var in pool:
        for _ in range(2 + rng.randrange(3)):
            body.append((_VAR_TYPES[rng.randrange(len(_VAR_TYPES))], var))
    for _ in range(rng.randrange(12)):
        body.append(_FILLER[rng.randrange(len(_FILLER))])
    rng.shuffle(body)
    nodes = (Node("FunctionDef", f"f_{fid}"),) + tuple(Node(t, v) for t, v in body)
    return Snippet(id=fid, repository="r0", path="p.py", nodes=nodes)
